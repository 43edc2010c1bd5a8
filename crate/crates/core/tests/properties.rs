use proptest::prelude::*;
use spanloc::document::{CategoryDocument, LoadedDocument};
use spanloc::fincat::{category_from_arrows, is_pullback_cone, validate_category, FinCategory, MorId};
use spanloc::localization::{compare_localizations, ho_via_spans, oracle_localize, OracleResult};
use spanloc::relcat::{two_out_of_three_closure, validate_hypercovers, RelativeCategory};
use spanloc::sigma::{build_sigma, sigma_map, Monotone};
use spanloc::sset::{component_count, nerve};

/// Transitive closure of a random relation on `0..n` compatible with the usual order.
fn poset_relation(n: usize, bits: &[bool]) -> Vec<Vec<bool>> {
    let mut le = vec![vec![false; n]; n];
    let mut k = 0;
    for i in 0..n {
        le[i][i] = true;
        for j in i + 1..n {
            le[i][j] = bits[k % bits.len()];
            k += 1;
        }
    }
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                if le[i][m] && le[m][j] {
                    le[i][j] = true;
                }
            }
        }
    }
    le
}

fn poset(le: &[Vec<bool>]) -> FinCategory {
    let n = le.len();
    let arrows: Vec<(usize, usize, (usize, usize))> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| i != j).map(move |j| (i, j)))
        .filter(|&(i, j)| le[i][j])
        .map(|(i, j)| (i, j, (i, j)))
        .collect();
    category_from_arrows(
        (0..n).map(|i| format!("p{i}")).collect(),
        &arrows,
        |g, f| (f.0, g.1),
        |o| (o, o),
        |s, t, _| format!("p{s}<p{t}"),
    )
}

fn arb_poset() -> impl Strategy<Value = Vec<Vec<bool>>> {
    (1usize..6, prop::collection::vec(any::<bool>(), 1..16)).prop_map(|(n, bits)| poset_relation(n, &bits))
}

fn subset(c: &FinCategory, mask: u64) -> Vec<MorId> {
    (0..c.morphism_count()).filter(|&f| mask >> (f % 64) & 1 == 1).collect()
}

fn arb_monotone(m: usize, n: usize) -> impl Strategy<Value = Monotone> {
    prop::collection::vec(0..=n, m + 1).prop_map(move |mut v| {
        v.sort_unstable();
        Monotone::new(v, n).unwrap()
    })
}

proptest! {
    #[test]
    fn random_posets_are_categories(le in arb_poset()) {
        prop_assert!(validate_category(&poset(&le)).is_valid());
    }

    #[test]
    fn canonical_pullbacks_are_meets(le in arb_poset()) {
        let c = poset(&le);
        let n = le.len();
        for f in 0..c.morphism_count() {
            for g in 0..c.morphism_count() {
                if c.cod(f) != c.cod(g) {
                    continue;
                }
                let (a, b) = (c.dom(f), c.dom(g));
                let lower: Vec<usize> = (0..n).filter(|&x| le[x][a] && le[x][b]).collect();
                let meet = lower.iter().copied().find(|&m| lower.iter().all(|&x| le[x][m]));
                let cone = c.canonical_pullback(f, g);
                prop_assert_eq!(cone.map(|p| p.apex), meet);
                if let Some(p) = cone {
                    prop_assert!(is_pullback_cone(&c, f, g, p.apex, p.leg1, p.leg2));
                }
            }
        }
    }

    #[test]
    fn closure_is_extensive_idempotent_and_monotone(le in arb_poset(), small in any::<u64>(), extra in any::<u64>()) {
        let c = poset(&le);
        let w = subset(&c, small);
        let w2 = subset(&c, small | extra);
        let r = RelativeCategory::new(c.clone(), &w);
        let closed = two_out_of_three_closure(&r);
        prop_assert!(w.iter().all(|f| closed.contains(f)));
        prop_assert_eq!(two_out_of_three_closure(&RelativeCategory::new(c.clone(), &closed)), closed.clone());
        let bigger = two_out_of_three_closure(&RelativeCategory::new(c, &w2));
        prop_assert!(closed.iter().all(|f| bigger.contains(f)));
    }

    #[test]
    fn nerve_components_match_comparability(le in arb_poset()) {
        let n = le.len();
        let mut comp: Vec<usize> = (0..n).collect();
        for _ in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if le[i][j] {
                        let m = comp[i].min(comp[j]);
                        comp[i] = m;
                        comp[j] = m;
                    }
                }
            }
        }
        comp.sort_unstable();
        comp.dedup();
        prop_assert_eq!(component_count(&nerve(&poset(&le), 2)), comp.len());
    }

    #[test]
    fn documents_round_trip(le in arb_poset(), mask in any::<u64>()) {
        let c = poset(&le);
        let w = subset(&c, mask);
        let r = RelativeCategory::new(c, &w);
        let doc = CategoryDocument::from_relative(&r, None);
        let loaded = LoadedDocument::parse(&doc.to_json()).unwrap();
        let back = loaded.relative().unwrap();
        prop_assert_eq!(back.hypercover_names(), r.hypercover_names());
        prop_assert_eq!(back.base.objects(), r.base.objects());
        prop_assert_eq!(back.base.morphism_count(), r.base.morphism_count());
        let again = LoadedDocument::parse(&loaded.normalized().to_json()).unwrap();
        prop_assert_eq!(again.digest(), loaded.digest());
    }

    #[test]
    fn monotone_composition_is_associative(
        (a, b, c) in (0usize..4, 0usize..4, 0usize..4, 0usize..4)
            .prop_flat_map(|(k, l, m, n)| (arb_monotone(m, n), arb_monotone(l, m), arb_monotone(k, l)))
    ) {
        prop_assert_eq!(a.after(&b).after(&c), a.after(&b.after(&c)));
    }

    #[test]
    fn sigma_maps_are_functorial(
        (a, b) in (0usize..4, 0usize..4, 0usize..4)
            .prop_flat_map(|(l, m, n)| (arb_monotone(m, n), arb_monotone(l, m)))
    ) {
        let composite = sigma_map(&a.after(&b));
        prop_assert!(composite.preserves_structure());
        prop_assert_eq!(composite, sigma_map(&a).after(&sigma_map(&b)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn span_localization_matches_oracle(le in arb_poset(), mask in any::<u64>()) {
        let c = poset(&le);
        let w = subset(&c, mask);
        let r = RelativeCategory::new(c, &w);
        prop_assume!(validate_hypercovers(&r).is_valid());
        let spans = ho_via_spans(&r).unwrap();
        prop_assert!(spans.check_axioms(&r.base).is_ok());
        if let OracleResult::Localized { ho, .. } = oracle_localize(&r, 6, 10_000) {
            let cmp = compare_localizations(&spans, &ho);
            prop_assert!(cmp.holds, "{:?}", cmp.witness);
        }
    }
}

#[test]
fn sigma_has_expected_size() {
    for n in 0..5 {
        assert_eq!(build_sigma(n).elements.len(), (n + 1) * (n + 2) / 2);
    }
}
