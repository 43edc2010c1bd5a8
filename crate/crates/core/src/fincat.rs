//! Finite categories presented by an explicit composition table.
//!
//! Everything downstream (relative categories, span diagrams, nerves) is built
//! on [`FinCategory`]. Objects and morphisms are addressed by dense indices;
//! identities are generated by [`CategoryBuilder`] and always occupy the last
//! `object_count()` morphism slots, named `id_<object>`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::Hash;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub type ObjId = usize;
pub type MorId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FinCatError {
    #[error("cospan mismatch: cod({f}) = {f_cod} but cod({g}) = {g_cod}")]
    CospanMismatch {
        f: String,
        g: String,
        f_cod: String,
        g_cod: String,
    },
    #[error("search space estimate {estimate} exceeds budget {budget}")]
    BudgetExceeded { estimate: u64, budget: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Morphism {
    pub name: String,
    pub dom: ObjId,
    pub cod: ObjId,
}

/// Reference to a morphism while a category is still being assembled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MorRef {
    Declared(usize),
    Identity(ObjId),
}

#[derive(Clone, Debug, Default)]
pub struct CategoryBuilder {
    objects: Vec<String>,
    morphisms: Vec<Morphism>,
    composites: Vec<(MorRef, MorRef, MorRef)>,
}

impl CategoryBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn object(&mut self, name: impl Into<String>) -> ObjId {
        self.objects.push(name.into());
        self.objects.len() - 1
    }

    pub fn morphism(&mut self, name: impl Into<String>, dom: ObjId, cod: ObjId) -> MorRef {
        self.morphisms.push(Morphism {
            name: name.into(),
            dom,
            cod,
        });
        MorRef::Declared(self.morphisms.len() - 1)
    }

    pub fn identity(&self, obj: ObjId) -> MorRef {
        MorRef::Identity(obj)
    }

    /// Records `equals = after ∘ then`.
    pub fn composite(&mut self, after: MorRef, then: MorRef, equals: MorRef) {
        self.composites.push((after, then, equals));
    }

    /// Assembles the table without checking any axiom; see [`validate_category`].
    pub fn build(self) -> FinCategory {
        let declared = self.morphisms.len();
        let resolve = |r: MorRef| match r {
            MorRef::Declared(i) => i,
            MorRef::Identity(o) => declared + o,
        };
        let mut morphisms = self.morphisms;
        for (o, name) in self.objects.iter().enumerate() {
            morphisms.push(Morphism {
                name: format!("id_{name}"),
                dom: o,
                cod: o,
            });
        }
        let m = morphisms.len();
        let identities: Vec<MorId> = (0..self.objects.len()).map(|o| declared + o).collect();
        let mut composition = vec![None; m * m];
        let mut build_issues = Vec::new();
        for (f, mor) in morphisms.iter().enumerate() {
            if mor.dom < self.objects.len() && mor.cod < self.objects.len() {
                composition[identities[mor.cod] * m + f] = Some(f);
                composition[f * m + identities[mor.dom]] = Some(f);
            }
        }
        let mut seen: HashMap<(MorId, MorId), MorId> = HashMap::new();
        for (after, then, equals) in self.composites {
            let (g, f, h) = (resolve(after), resolve(then), resolve(equals));
            if let Some(&prev) = seen.get(&(g, f)) {
                if prev != h {
                    build_issues.push(CategoryViolation::ConflictingComposite {
                        after: morphisms[g].name.clone(),
                        then: morphisms[f].name.clone(),
                        first: morphisms[prev].name.clone(),
                        second: morphisms[h].name.clone(),
                    });
                }
            }
            seen.insert((g, f), h);
            composition[g * m + f] = Some(h);
        }
        FinCategory::from_parts(self.objects, morphisms, identities, composition, build_issues)
    }
}

#[derive(Default)]
struct PullbackCache(Mutex<HashMap<(MorId, MorId), Option<PullbackCone>>>);

impl Clone for PullbackCache {
    fn clone(&self) -> Self {
        Self::default()
    }
}

impl fmt::Debug for PullbackCache {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("PullbackCache")
    }
}

#[derive(Clone, Debug)]
pub struct FinCategory {
    objects: Vec<String>,
    morphisms: Vec<Morphism>,
    identities: Vec<MorId>,
    /// Dense table: entry `g * m + f` holds `g ∘ f`.
    composition: Vec<Option<MorId>>,
    homs: Vec<Vec<MorId>>,
    inverses: Vec<Option<MorId>>,
    object_index: HashMap<String, ObjId>,
    morphism_index: HashMap<String, MorId>,
    build_issues: Vec<CategoryViolation>,
    pullbacks: PullbackCache,
}

impl FinCategory {
    fn from_parts(
        objects: Vec<String>,
        morphisms: Vec<Morphism>,
        identities: Vec<MorId>,
        composition: Vec<Option<MorId>>,
        build_issues: Vec<CategoryViolation>,
    ) -> Self {
        let k = objects.len();
        let m = morphisms.len();
        let mut homs = vec![Vec::new(); k * k];
        for (f, mor) in morphisms.iter().enumerate() {
            if mor.dom < k && mor.cod < k {
                homs[mor.dom * k + mor.cod].push(f);
            }
        }
        let mut inverses = vec![None; m];
        for (f, mor) in morphisms.iter().enumerate() {
            if mor.dom >= k || mor.cod >= k {
                continue;
            }
            inverses[f] = homs[mor.cod * k + mor.dom].iter().copied().find(|&g| {
                composition[g * m + f] == Some(identities[mor.dom])
                    && composition[f * m + g] == Some(identities[mor.cod])
            });
        }
        let mut object_index = HashMap::new();
        for (i, o) in objects.iter().enumerate() {
            object_index.entry(o.clone()).or_insert(i);
        }
        let mut morphism_index = HashMap::new();
        for (i, mor) in morphisms.iter().enumerate() {
            morphism_index.entry(mor.name.clone()).or_insert(i);
        }
        Self {
            objects,
            morphisms,
            identities,
            composition,
            homs,
            inverses,
            object_index,
            morphism_index,
            build_issues,
            pullbacks: PullbackCache::default(),
        }
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn morphism_count(&self) -> usize {
        self.morphisms.len()
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn morphisms(&self) -> &[Morphism] {
        &self.morphisms
    }

    pub fn object_name(&self, o: ObjId) -> &str {
        &self.objects[o]
    }

    pub fn morphism_name(&self, f: MorId) -> &str {
        &self.morphisms[f].name
    }

    pub fn object_id(&self, name: &str) -> Option<ObjId> {
        self.object_index.get(name).copied()
    }

    pub fn morphism_id(&self, name: &str) -> Option<MorId> {
        self.morphism_index.get(name).copied()
    }

    pub fn dom(&self, f: MorId) -> ObjId {
        self.morphisms[f].dom
    }

    pub fn cod(&self, f: MorId) -> ObjId {
        self.morphisms[f].cod
    }

    pub fn identity(&self, o: ObjId) -> MorId {
        self.identities[o]
    }

    pub fn is_identity(&self, f: MorId) -> bool {
        self.identities[self.dom(f)] == f
    }

    /// `g ∘ f`, or `None` when the pair is not composable.
    pub fn compose(&self, g: MorId, f: MorId) -> Option<MorId> {
        if self.cod(f) != self.dom(g) {
            return None;
        }
        self.composition[g * self.morphisms.len() + f]
    }

    /// Raw table entry, including entries stored on non-composable pairs.
    fn table(&self, g: MorId, f: MorId) -> Option<MorId> {
        self.composition[g * self.morphisms.len() + f]
    }

    pub fn hom(&self, a: ObjId, b: ObjId) -> &[MorId] {
        &self.homs[a * self.objects.len() + b]
    }

    /// Every morphism out of `a`.
    pub fn out_arrows(&self, a: ObjId) -> impl Iterator<Item = &MorId> {
        let k = self.objects.len();
        self.homs[a * k..(a + 1) * k].iter().flatten()
    }

    pub fn inverse(&self, f: MorId) -> Option<MorId> {
        self.inverses[f]
    }

    pub fn is_isomorphism(&self, f: MorId) -> bool {
        self.inverses[f].is_some()
    }

    pub fn are_isomorphic(&self, a: ObjId, b: ObjId) -> bool {
        self.hom(a, b).iter().any(|&f| self.is_isomorphism(f))
    }

    /// Declared (non-identity) morphisms, in declaration order.
    pub fn declared_morphisms(&self) -> std::ops::Range<MorId> {
        0..self.morphisms.len() - self.objects.len()
    }

    pub fn max_hom_size(&self) -> usize {
        self.homs.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn opposite(&self) -> FinCategory {
        let m = self.morphisms.len();
        let morphisms = self
            .morphisms
            .iter()
            .map(|mor| Morphism {
                name: mor.name.clone(),
                dom: mor.cod,
                cod: mor.dom,
            })
            .collect();
        let mut composition = vec![None; m * m];
        for g in 0..m {
            for f in 0..m {
                composition[g * m + f] = self.composition[f * m + g];
            }
        }
        FinCategory::from_parts(
            self.objects.clone(),
            morphisms,
            self.identities.clone(),
            composition,
            self.build_issues.clone(),
        )
    }

    /// Canonical pullback of the cospan `(f, g)`, memoised per cospan.
    pub fn canonical_pullback(&self, f: MorId, g: MorId) -> Option<PullbackCone> {
        if let Some(hit) = self.pullbacks.0.lock().unwrap().get(&(f, g)) {
            return *hit;
        }
        let cone = pullback(self, f, g).ok().flatten();
        self.pullbacks.0.lock().unwrap().insert((f, g), cone);
        cone
    }
}

/// Assembles a category from keyed arrows. `arrows` lists the non-identity
/// arrows as `(source, target, key)`; `compose(g, f)` and `identity(o)` must
/// return keys of listed arrows or identities.
pub fn category_from_arrows<K, C, I, N>(
    objects: Vec<String>,
    arrows: &[(ObjId, ObjId, K)],
    compose: C,
    identity: I,
    name: N,
) -> FinCategory
where
    K: Clone + Eq + Hash,
    C: Fn(&K, &K) -> K,
    I: Fn(ObjId) -> K,
    N: Fn(ObjId, ObjId, &K) -> String,
{
    let mut b = CategoryBuilder::new();
    let k = objects.len();
    for o in objects {
        b.object(o);
    }
    let mut refs: HashMap<(ObjId, ObjId, K), MorRef> = HashMap::new();
    for o in 0..k {
        refs.insert((o, o, identity(o)), MorRef::Identity(o));
    }
    let mut all = Vec::with_capacity(arrows.len());
    for (s, t, key) in arrows {
        let r = b.morphism(name(*s, *t, key), *s, *t);
        refs.insert((*s, *t, key.clone()), r);
        all.push((*s, *t, key.clone(), r));
    }
    for (s, t, f, fr) in &all {
        for (s2, t2, g, gr) in &all {
            if s2 == t {
                if let Some(&h) = refs.get(&(*s, *t2, compose(g, f))) {
                    b.composite(*gr, *fr, h);
                }
            }
        }
    }
    b.build()
}

/// One violated axiom with its witnesses (by name).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "clause", rename_all = "snake_case")]
pub enum CategoryViolation {
    DuplicateObject {
        name: String,
    },
    DuplicateMorphism {
        name: String,
    },
    ConflictingComposite {
        after: String,
        then: String,
        first: String,
        second: String,
    },
    MissingComposite {
        after: String,
        then: String,
    },
    NotComposable {
        after: String,
        then: String,
        equals: String,
    },
    CompositeEndpoints {
        after: String,
        then: String,
        equals: String,
    },
    IdentityLaw {
        morphism: String,
        side: String,
    },
    Associativity {
        h: String,
        g: String,
        f: String,
        left: String,
        right: String,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CategoryReport {
    pub violations: Vec<CategoryViolation>,
}

impl CategoryReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Exhaustive scan of the category axioms.
pub fn validate_category(c: &FinCategory) -> CategoryReport {
    let mut violations = c.build_issues.clone();
    let mut seen = HashSet::new();
    for o in &c.objects {
        if !seen.insert(o) {
            violations.push(CategoryViolation::DuplicateObject { name: o.clone() });
        }
    }
    let mut seen = HashSet::new();
    for mor in &c.morphisms {
        if !seen.insert(&mor.name) {
            violations.push(CategoryViolation::DuplicateMorphism {
                name: mor.name.clone(),
            });
        }
    }
    let m = c.morphism_count();
    let name = |f: MorId| c.morphisms[f].name.clone();
    let mut table_ok = true;
    for g in 0..m {
        for f in 0..m {
            let composable = c.cod(f) == c.dom(g);
            match (composable, c.table(g, f)) {
                (true, None) => {
                    table_ok = false;
                    violations.push(CategoryViolation::MissingComposite {
                        after: name(g),
                        then: name(f),
                    });
                }
                (false, Some(h)) => violations.push(CategoryViolation::NotComposable {
                    after: name(g),
                    then: name(f),
                    equals: name(h),
                }),
                (true, Some(h)) if c.dom(h) != c.dom(f) || c.cod(h) != c.cod(g) => {
                    table_ok = false;
                    violations.push(CategoryViolation::CompositeEndpoints {
                        after: name(g),
                        then: name(f),
                        equals: name(h),
                    });
                }
                _ => {}
            }
        }
    }
    for f in 0..m {
        if c.compose(c.identity(c.cod(f)), f) != Some(f) {
            violations.push(CategoryViolation::IdentityLaw {
                morphism: name(f),
                side: "left".into(),
            });
        }
        if c.compose(f, c.identity(c.dom(f))) != Some(f) {
            violations.push(CategoryViolation::IdentityLaw {
                morphism: name(f),
                side: "right".into(),
            });
        }
    }
    if table_ok {
        for f in 0..m {
            for &g in c.out_arrows(c.cod(f)) {
                let gf = c.compose(g, f).expect("table checked");
                for &h in c.out_arrows(c.cod(g)) {
                    let left = c.compose(c.compose(h, g).expect("table checked"), f).unwrap();
                    let right = c.compose(h, gf).unwrap();
                    if left != right {
                        violations.push(CategoryViolation::Associativity {
                            h: name(h),
                            g: name(g),
                            f: name(f),
                            left: name(left),
                            right: name(right),
                        });
                    }
                }
            }
        }
    }
    CategoryReport { violations }
}

// ---------------------------------------------------------------------------
// Pullbacks

/// A cone `leg1: apex → dom f`, `leg2: apex → dom g` over the cospan `(f, g)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PullbackCone {
    pub apex: ObjId,
    pub leg1: MorId,
    pub leg2: MorId,
    pub over: (MorId, MorId),
}

/// All commuting cones over `(f, g)`, in lexicographic (apex, leg1, leg2) order.
pub fn cones_over(c: &FinCategory, f: MorId, g: MorId) -> Vec<(ObjId, MorId, MorId)> {
    let mut out = Vec::new();
    for p in 0..c.object_count() {
        for &l1 in c.hom(p, c.dom(f)) {
            for &l2 in c.hom(p, c.dom(g)) {
                if c.compose(f, l1) == c.compose(g, l2) {
                    out.push((p, l1, l2));
                }
            }
        }
    }
    out
}

/// Every `m: test.0 → apex` with `leg1 ∘ m = test.1` and `leg2 ∘ m = test.2`.
pub fn mediating_morphisms(
    c: &FinCategory,
    apex: ObjId,
    leg1: MorId,
    leg2: MorId,
    test: (ObjId, MorId, MorId),
) -> Vec<MorId> {
    c.hom(test.0, apex)
        .iter()
        .copied()
        .filter(|&m| c.compose(leg1, m) == Some(test.1) && c.compose(leg2, m) == Some(test.2))
        .collect()
}

/// The unique mediating morphism into a universal cone, if there is exactly one.
pub fn mediate(c: &FinCategory, cone: &PullbackCone, test: (ObjId, MorId, MorId)) -> Option<MorId> {
    match mediating_morphisms(c, cone.apex, cone.leg1, cone.leg2, test).as_slice() {
        [m] => Some(*m),
        _ => None,
    }
}

fn universal_among(
    c: &FinCategory,
    cones: &[(ObjId, MorId, MorId)],
    (apex, leg1, leg2): (ObjId, MorId, MorId),
) -> bool {
    cones
        .iter()
        .all(|&t| mediating_morphisms(c, apex, leg1, leg2, t).len() == 1)
}

/// Whether `(apex, leg1, leg2)` is a pullback of `(f, g)`, by exhaustive search.
pub fn is_pullback_cone(
    c: &FinCategory,
    f: MorId,
    g: MorId,
    apex: ObjId,
    leg1: MorId,
    leg2: MorId,
) -> bool {
    if c.cod(f) != c.cod(g) || c.dom(leg1) != apex || c.dom(leg2) != apex {
        return false;
    }
    if c.compose(f, leg1).is_none() || c.compose(f, leg1) != c.compose(g, leg2) {
        return false;
    }
    universal_among(c, &cones_over(c, f, g), (apex, leg1, leg2))
}

/// Brute-force pullback of `f` and `g`, or `None` when no cone is universal.
///
/// The choice is normalized: along an identity the pullback is the other
/// arrow itself, and two isomorphisms are pulled back at their common
/// codomain with the inverses as legs. Otherwise the lexicographically least
/// universal `(apex, leg1, leg2)` is returned. The normalization keeps
/// iterated pullbacks strictly compatible with pasting on groupoid parts.
pub fn pullback(c: &FinCategory, f: MorId, g: MorId) -> Result<Option<PullbackCone>, FinCatError> {
    if c.cod(f) != c.cod(g) {
        return Err(FinCatError::CospanMismatch {
            f: c.morphism_name(f).into(),
            g: c.morphism_name(g).into(),
            f_cod: c.object_name(c.cod(f)).into(),
            g_cod: c.object_name(c.cod(g)).into(),
        });
    }
    let cone = |(apex, leg1, leg2)| PullbackCone {
        apex,
        leg1,
        leg2,
        over: (f, g),
    };
    if c.is_identity(g) {
        return Ok(Some(cone((c.dom(f), c.identity(c.dom(f)), f))));
    }
    if c.is_identity(f) {
        return Ok(Some(cone((c.dom(g), g, c.identity(c.dom(g))))));
    }
    if let (Some(fi), Some(gi)) = (c.inverse(f), c.inverse(g)) {
        return Ok(Some(cone((c.cod(f), fi, gi))));
    }
    let cones = cones_over(c, f, g);
    Ok(cones
        .iter()
        .copied()
        .find(|&cand| universal_among(c, &cones, cand))
        .map(cone))
}

// ---------------------------------------------------------------------------
// Functors and natural transformations

#[derive(Clone, Debug)]
pub struct FinFunctor<'a> {
    pub source: &'a FinCategory,
    pub target: &'a FinCategory,
    pub objects: Vec<ObjId>,
    pub morphisms: Vec<MorId>,
}

impl<'a> FinFunctor<'a> {
    pub fn identity(c: &'a FinCategory) -> Self {
        Self {
            source: c,
            target: c,
            objects: (0..c.object_count()).collect(),
            morphisms: (0..c.morphism_count()).collect(),
        }
    }

    /// Checks endpoints, identities and composition exhaustively.
    pub fn is_functor(&self) -> bool {
        let (s, t) = (self.source, self.target);
        if self.objects.len() != s.object_count() || self.morphisms.len() != s.morphism_count() {
            return false;
        }
        let endpoints = (0..s.morphism_count()).all(|f| {
            let img = self.morphisms[f];
            t.dom(img) == self.objects[s.dom(f)] && t.cod(img) == self.objects[s.cod(f)]
        });
        let identities =
            (0..s.object_count()).all(|o| self.morphisms[s.identity(o)] == t.identity(self.objects[o]));
        endpoints
            && identities
            && (0..s.morphism_count()).all(|f| {
                (0..s.morphism_count()).all(|g| match s.compose(g, f) {
                    Some(h) => t.compose(self.morphisms[g], self.morphisms[f]) == Some(self.morphisms[h]),
                    None => true,
                })
            })
    }

    /// The same assignment viewed between the opposite categories.
    pub fn opposite<'b>(&self, source_op: &'b FinCategory, target_op: &'b FinCategory) -> FinFunctor<'b> {
        FinFunctor {
            source: source_op,
            target: target_op,
            objects: self.objects.clone(),
            morphisms: self.morphisms.clone(),
        }
    }

    pub fn compose_after(&self, first: &FinFunctor<'a>) -> FinFunctor<'a> {
        FinFunctor {
            source: first.source,
            target: self.target,
            objects: first.objects.iter().map(|&o| self.objects[o]).collect(),
            morphisms: first.morphisms.iter().map(|&f| self.morphisms[f]).collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct NatTransformation<'a> {
    pub source: FinFunctor<'a>,
    pub target: FinFunctor<'a>,
    pub components: Vec<MorId>,
}

impl NatTransformation<'_> {
    pub fn is_natural(&self) -> bool {
        let s = self.source.source;
        let t = self.source.target;
        let typed = (0..s.object_count()).all(|o| {
            let c = self.components[o];
            t.dom(c) == self.source.objects[o] && t.cod(c) == self.target.objects[o]
        });
        typed
            && (0..s.morphism_count()).all(|f| {
                let (a, b) = (s.dom(f), s.cod(f));
                t.compose(self.target.morphisms[f], self.components[a])
                    == t.compose(self.components[b], self.source.morphisms[f])
            })
    }
}

fn search_estimate(d: &FinCategory, c: &FinCategory) -> u64 {
    let objects = (c.object_count() as u64).saturating_pow(d.object_count() as u32);
    let per_morphism = c.max_hom_size().max(1) as u64;
    let declared = d.declared_morphisms().len() as u32;
    objects.saturating_mul(per_morphism.saturating_pow(declared))
}

/// All functors `d → c`, by backtracking with incremental functoriality checks.
pub fn enumerate_functors<'a>(
    d: &'a FinCategory,
    c: &'a FinCategory,
    budget: u64,
) -> Result<Vec<FinFunctor<'a>>, FinCatError> {
    let estimate = search_estimate(d, c);
    if estimate > budget {
        return Err(FinCatError::BudgetExceeded { estimate, budget });
    }
    if d.object_count() > 0 && c.object_count() == 0 {
        return Ok(Vec::new());
    }

    // Object `t` is assigned at step t, followed by every declared morphism
    // whose later endpoint is `t`.
    enum Step {
        Object(ObjId),
        Morphism(MorId),
    }
    let mut steps = Vec::new();
    let mut position = vec![usize::MAX; d.morphism_count()];
    for o in 0..d.object_count() {
        steps.push(Step::Object(o));
        position[d.identity(o)] = steps.len() - 1;
        for f in d.declared_morphisms() {
            if d.dom(f).max(d.cod(f)) == o {
                steps.push(Step::Morphism(f));
                position[f] = steps.len() - 1;
            }
        }
    }
    let mut checks: Vec<Vec<(MorId, MorId, MorId)>> = vec![Vec::new(); steps.len()];
    for f in 0..d.morphism_count() {
        for g in 0..d.morphism_count() {
            if let Some(h) = d.compose(g, f) {
                if d.is_identity(f) || d.is_identity(g) {
                    continue;
                }
                let last = position[f].max(position[g]).max(position[h]);
                checks[last].push((g, f, h));
            }
        }
    }

    struct Search<'s> {
        d: &'s FinCategory,
        c: &'s FinCategory,
        steps: &'s [Step],
        checks: &'s [Vec<(MorId, MorId, MorId)>],
        objects: Vec<ObjId>,
        morphisms: Vec<MorId>,
        found: Vec<(Vec<ObjId>, Vec<MorId>)>,
    }
    impl Search<'_> {
        fn consistent(&self, step: usize) -> bool {
            self.checks[step].iter().all(|&(g, f, h)| {
                self.c.compose(self.morphisms[g], self.morphisms[f]) == Some(self.morphisms[h])
            })
        }
        fn run(&mut self, step: usize) {
            if step == self.steps.len() {
                self.found.push((self.objects.clone(), self.morphisms.clone()));
                return;
            }
            match self.steps[step] {
                Step::Object(o) => {
                    for x in 0..self.c.object_count() {
                        self.objects[o] = x;
                        self.morphisms[self.d.identity(o)] = self.c.identity(x);
                        if self.consistent(step) {
                            self.run(step + 1);
                        }
                    }
                }
                Step::Morphism(f) => {
                    let (a, b) = (self.objects[self.d.dom(f)], self.objects[self.d.cod(f)]);
                    for i in 0..self.c.hom(a, b).len() {
                        self.morphisms[f] = self.c.hom(a, b)[i];
                        if self.consistent(step) {
                            self.run(step + 1);
                        }
                    }
                }
            }
        }
    }
    let mut search = Search {
        d,
        c,
        steps: &steps,
        checks: &checks,
        objects: vec![0; d.object_count()],
        morphisms: vec![0; d.morphism_count()],
        found: Vec::new(),
    };
    search.run(0);
    Ok(search
        .found
        .into_iter()
        .map(|(objects, morphisms)| FinFunctor {
            source: d,
            target: c,
            objects,
            morphisms,
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Equivalence checking, generic over lazily presented categories

/// A finite category whose hom-sets are produced on demand.
pub trait Category: Sync {
    type Arrow: Clone + Eq + Hash + fmt::Debug + Send;

    fn object_count(&self) -> usize;
    fn object_label(&self, a: usize) -> String;
    fn hom(&self, a: usize, b: usize) -> Vec<Self::Arrow>;
    fn identity(&self, a: usize) -> Self::Arrow;
    /// `g ∘ f` for a composable pair.
    fn compose(&self, g: &Self::Arrow, f: &Self::Arrow) -> Self::Arrow;
}

impl Category for FinCategory {
    type Arrow = MorId;

    fn object_count(&self) -> usize {
        self.objects.len()
    }
    fn object_label(&self, a: usize) -> String {
        self.objects[a].clone()
    }
    fn hom(&self, a: usize, b: usize) -> Vec<MorId> {
        FinCategory::hom(self, a, b).to_vec()
    }
    fn identity(&self, a: usize) -> MorId {
        self.identities[a]
    }
    fn compose(&self, g: &MorId, f: &MorId) -> MorId {
        FinCategory::compose(self, *g, *f).expect("composable pair")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EquivalenceWitness {
    /// `hom(source, target)` maps onto `image` distinct arrows of a target
    /// hom-set of size `target_hom`; fully faithful requires all three equal.
    HomMismatch {
        source: String,
        target: String,
        source_hom: usize,
        image: usize,
        target_hom: usize,
    },
    NotEssentiallySurjective {
        object: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquivalenceCheck {
    pub holds: bool,
    pub witness: Option<EquivalenceWitness>,
}

fn isomorphic<C: Category>(c: &C, a: usize, b: usize) -> bool {
    let back = c.hom(b, a);
    c.hom(a, b).iter().any(|f| {
        back.iter()
            .any(|g| c.compose(g, f) == c.identity(a) && c.compose(f, g) == c.identity(b))
    })
}

/// Fully faithful and essentially surjective, checked exhaustively. The
/// witness is the first failing pair in (source, target) index order.
pub fn check_equivalence_with<S, T, O, M>(source: &S, target: &T, object_map: O, arrow_map: M) -> EquivalenceCheck
where
    S: Category,
    T: Category,
    O: Fn(usize) -> usize + Sync,
    M: Fn(&S::Arrow) -> T::Arrow + Sync,
{
    let k = source.object_count();
    let failure = (0..k).into_par_iter().find_map_first(|a| {
        let fa = object_map(a);
        (0..k).find_map(|b| {
            let fb = object_map(b);
            let src = source.hom(a, b);
            let image: HashSet<T::Arrow> = src.iter().map(&arrow_map).collect();
            let target_hom = target.hom(fa, fb).len();
            (image.len() != src.len() || target_hom != src.len()).then(|| EquivalenceWitness::HomMismatch {
                source: source.object_label(a),
                target: source.object_label(b),
                source_hom: src.len(),
                image: image.len(),
                target_hom,
            })
        })
    });
    if let Some(w) = failure {
        return EquivalenceCheck {
            holds: false,
            witness: Some(w),
        };
    }
    let image: HashSet<usize> = (0..k).map(&object_map).collect();
    let missing = (0..target.object_count())
        .into_par_iter()
        .filter(|t| !image.contains(t))
        .find_first(|&t| !image.iter().any(|&s| isomorphic(target, s, t)));
    match missing {
        Some(t) => EquivalenceCheck {
            holds: false,
            witness: Some(EquivalenceWitness::NotEssentiallySurjective {
                object: target.object_label(t),
            }),
        },
        None => EquivalenceCheck {
            holds: true,
            witness: None,
        },
    }
}

pub fn check_equivalence(functor: &FinFunctor<'_>) -> EquivalenceCheck {
    check_equivalence_with(
        functor.source,
        functor.target,
        |o| functor.objects[o],
        |f| functor.morphisms[*f],
    )
}

// ---------------------------------------------------------------------------
// (Co)cartesian arrows

/// `e: x → y` is p-cocartesian: every `u: x → z` with `p(u) = k ∘ p(e)`
/// factors uniquely as `v ∘ e` with `p(v) = k`.
pub fn is_cocartesian(p: &FinFunctor<'_>, e: MorId) -> bool {
    let (h, base) = (p.source, p.target);
    let (x, y) = (h.dom(e), h.cod(e));
    (0..h.object_count()).all(|z| {
        h.hom(x, z).iter().all(|&u| {
            base.hom(p.objects[y], p.objects[z])
                .iter()
                .filter(|&&k| base.compose(k, p.morphisms[e]) == Some(p.morphisms[u]))
                .all(|&k| {
                    h.hom(y, z)
                        .iter()
                        .filter(|&&v| p.morphisms[v] == k && h.compose(v, e) == Some(u))
                        .count()
                        == 1
                })
        })
    })
}

/// `e: y → x` is p-cartesian: every `u: z → x` with `p(u) = p(e) ∘ k`
/// factors uniquely as `e ∘ v` with `p(v) = k`.
pub fn is_cartesian(p: &FinFunctor<'_>, e: MorId) -> bool {
    let (h, base) = (p.source, p.target);
    let (y, x) = (h.dom(e), h.cod(e));
    (0..h.object_count()).all(|z| {
        h.hom(z, x).iter().all(|&u| {
            base.hom(p.objects[z], p.objects[y])
                .iter()
                .filter(|&&k| base.compose(p.morphisms[e], k) == Some(p.morphisms[u]))
                .all(|&k| {
                    h.hom(z, y)
                        .iter()
                        .filter(|&&v| p.morphisms[v] == k && h.compose(e, v) == Some(u))
                        .count()
                        == 1
                })
        })
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn poset_of_subsets(n: u32) -> FinCategory {
        let mut b = CategoryBuilder::new();
        let name = |s: u32| {
            let items: Vec<String> = (0..n).filter(|i| s & (1 << i) != 0).map(|i| (i + 1).to_string()).collect();
            format!("{{{}}}", items.join(","))
        };
        let subsets: Vec<u32> = (0..1u32 << n).collect();
        for &s in &subsets {
            b.object(name(s));
        }
        let mut arrows = HashMap::new();
        for &a in &subsets {
            for &c in &subsets {
                if a != c && a & c == a {
                    let r = b.morphism(format!("{}<={}", name(a), name(c)), a as usize, c as usize);
                    arrows.insert((a, c), r);
                }
            }
        }
        for (&(a, c), &ac) in &arrows {
            for (&(c2, d), &cd) in &arrows {
                if c2 == c {
                    b.composite(cd, ac, arrows[&(a, d)]);
                }
            }
        }
        b.build()
    }

    pub fn parallel_pair() -> FinCategory {
        let mut b = CategoryBuilder::new();
        let x = b.object("x");
        let y = b.object("y");
        b.morphism("f", x, y);
        b.morphism("g", x, y);
        b.build()
    }

    pub fn collapse() -> FinCategory {
        let mut b = CategoryBuilder::new();
        let z = b.object("0");
        let x = b.object("x");
        let y = b.object("y");
        let f = b.morphism("f", x, y);
        let g = b.morphism("g", x, y);
        let zx = b.morphism("0_x", z, x);
        let zy = b.morphism("0_y", z, y);
        b.composite(f, zx, zy);
        b.composite(g, zx, zy);
        b.build()
    }

    pub fn walking_iso() -> FinCategory {
        let mut b = CategoryBuilder::new();
        let a = b.object("a");
        let c = b.object("b");
        let i = b.morphism("i", a, c);
        let j = b.morphism("j", c, a);
        let ida = b.identity(a);
        let idb = b.identity(c);
        b.composite(j, i, ida);
        b.composite(i, j, idb);
        b.build()
    }

    pub fn terminal() -> FinCategory {
        let mut b = CategoryBuilder::new();
        b.object("*");
        b.build()
    }

    pub fn walking_arrow() -> FinCategory {
        let mut b = CategoryBuilder::new();
        let s = b.object("0");
        let t = b.object("1");
        b.morphism("a", s, t);
        b.build()
    }

    fn mor(c: &FinCategory, name: &str) -> MorId {
        c.morphism_id(name).unwrap()
    }

    #[test]
    fn fixtures_are_categories() {
        for c in [poset_of_subsets(2), poset_of_subsets(3), parallel_pair(), collapse(), walking_iso()] {
            assert!(validate_category(&c).is_valid(), "{:?}", validate_category(&c));
        }
    }

    #[test]
    fn corrupted_associativity_names_the_triple() {
        // A two-element monoid table that is not associative:
        // (y∘x)∘y = x∘y = y but y∘(x∘y) = y∘y = x.
        let mut b = CategoryBuilder::new();
        let o = b.object("o");
        let x = b.morphism("x", o, o);
        let y = b.morphism("y", o, o);
        b.composite(x, x, x);
        b.composite(x, y, y);
        b.composite(y, x, x);
        b.composite(y, y, x);
        let report = validate_category(&b.build());
        assert!(report.violations.contains(&CategoryViolation::Associativity {
            h: "y".into(),
            g: "x".into(),
            f: "y".into(),
            left: "y".into(),
            right: "x".into(),
        }));
    }

    #[test]
    fn missing_and_misplaced_composites_are_reported() {
        let mut b = CategoryBuilder::new();
        let a = b.object("a");
        let c = b.object("b");
        let d = b.object("c");
        let f = b.morphism("f", a, c);
        let g = b.morphism("g", c, d);
        b.composite(f, g, f);
        let report = validate_category(&b.build());
        assert!(report.violations.contains(&CategoryViolation::MissingComposite {
            after: "g".into(),
            then: "f".into()
        }));
        assert!(report.violations.contains(&CategoryViolation::NotComposable {
            after: "f".into(),
            then: "g".into(),
            equals: "f".into()
        }));
    }

    #[test]
    fn meet_pullback_is_intersection() {
        let c = poset_of_subsets(2);
        let cone = pullback(&c, mor(&c, "{1}<={1,2}"), mor(&c, "{2}<={1,2}")).unwrap().unwrap();
        assert_eq!(c.object_name(cone.apex), "{}");
    }

    #[test]
    fn pullback_along_identity() {
        for c in [poset_of_subsets(2), parallel_pair(), collapse(), walking_iso()] {
            for f in 0..c.morphism_count() {
                let cone = pullback(&c, f, c.identity(c.cod(f))).unwrap().unwrap();
                assert_eq!((cone.apex, cone.leg1, cone.leg2), (c.dom(f), c.identity(c.dom(f)), f));
            }
        }
    }

    #[test]
    fn collapse_pullback_is_initial() {
        let c = collapse();
        let cone = pullback(&c, mor(&c, "f"), mor(&c, "g")).unwrap().unwrap();
        assert_eq!(c.object_name(cone.apex), "0");
    }

    #[test]
    fn cospan_mismatch_is_an_error() {
        let c = collapse();
        assert!(matches!(
            pullback(&c, mor(&c, "f"), mor(&c, "0_x")),
            Err(FinCatError::CospanMismatch { .. })
        ));
    }

    #[test]
    fn parallel_pair_has_no_pullback_of_f_and_g() {
        let c = parallel_pair();
        assert_eq!(pullback(&c, mor(&c, "f"), mor(&c, "g")).unwrap(), None);
    }

    #[test]
    fn returned_pullbacks_are_universal_and_symmetric() {
        for c in [poset_of_subsets(2), poset_of_subsets(3), collapse(), walking_iso()] {
            for f in 0..c.morphism_count() {
                for g in 0..c.morphism_count() {
                    if c.cod(f) != c.cod(g) {
                        continue;
                    }
                    let Some(p) = pullback(&c, f, g).unwrap() else { continue };
                    for t in cones_over(&c, f, g) {
                        assert_eq!(mediating_morphisms(&c, p.apex, p.leg1, p.leg2, t).len(), 1);
                    }
                    let q = pullback(&c, g, f).unwrap().expect("symmetric existence");
                    let m = mediate(&c, &p, (q.apex, q.leg2, q.leg1)).unwrap();
                    assert!(c.is_isomorphism(m));
                }
            }
        }
    }

    #[test]
    fn functors_from_terminal_pick_objects() {
        let t = terminal();
        let c = poset_of_subsets(2);
        assert_eq!(enumerate_functors(&t, &c, 1000).unwrap().len(), c.object_count());
    }

    #[test]
    fn functors_from_walking_arrow_into_meet_poset() {
        // |{(e, c) : e ⊆ c ⊆ {1,2}}| = 3^2.
        let d = walking_arrow();
        let c = poset_of_subsets(2);
        let all = enumerate_functors(&d, &c, 1000).unwrap();
        assert_eq!(all.len(), 9);
        assert!(all.iter().all(FinFunctor::is_functor));
    }

    #[test]
    fn functor_budget() {
        let d = poset_of_subsets(2);
        let c = poset_of_subsets(3);
        // 8^4 objects times unit hom bound.
        assert_eq!(
            enumerate_functors(&d, &c, 10).unwrap_err(),
            FinCatError::BudgetExceeded { estimate: 4096, budget: 10 }
        );
    }

    #[test]
    fn enumeration_is_complete_against_brute_force() {
        // Brute force: every assignment of objects and morphisms, filtered.
        let d = parallel_pair();
        let c = collapse();
        let mut brute = 0;
        for ox in 0..3 {
            for oy in 0..3 {
                for &f in c.hom(ox, oy) {
                    for &g in c.hom(ox, oy) {
                        let mut morphisms = vec![f, g, c.identity(ox), c.identity(oy)];
                        morphisms.truncate(4);
                        let cand = FinFunctor { source: &d, target: &c, objects: vec![ox, oy], morphisms };
                        if cand.is_functor() {
                            brute += 1;
                        }
                    }
                }
            }
        }
        let all = enumerate_functors(&d, &c, 10_000).unwrap();
        assert_eq!(all.len(), brute);
        let distinct: HashSet<_> = all.iter().map(|f| (f.objects.clone(), f.morphisms.clone())).collect();
        assert_eq!(distinct.len(), all.len());
    }

    #[test]
    fn identity_is_equivalence() {
        let c = collapse();
        assert!(check_equivalence(&FinFunctor::identity(&c)).holds);
    }

    #[test]
    fn skeleton_inclusion_is_equivalence() {
        let iso = walking_iso();
        let t = terminal();
        let incl = FinFunctor {
            source: &t,
            target: &iso,
            objects: vec![0],
            morphisms: vec![iso.identity(0)],
        };
        assert!(incl.is_functor());
        let check = check_equivalence(&incl);
        assert!(check.holds, "{check:?}");
        let (t_op, iso_op) = (t.opposite(), iso.opposite());
        assert!(check_equivalence(&incl.opposite(&t_op, &iso_op)).holds);
    }

    #[test]
    fn collapsing_parallel_pair_is_not_equivalence() {
        let d = parallel_pair();
        let t = terminal();
        let constant = FinFunctor {
            source: &d,
            target: &t,
            objects: vec![0, 0],
            morphisms: vec![0; 4],
        };
        assert!(constant.is_functor());
        let check = check_equivalence(&constant);
        assert!(!check.holds);
        assert_eq!(
            check.witness,
            Some(EquivalenceWitness::HomMismatch {
                source: "x".into(),
                target: "y".into(),
                source_hom: 2,
                image: 1,
                target_hom: 1
            })
        );
    }

    #[test]
    fn natural_transformation_check() {
        let d = walking_arrow();
        let c = poset_of_subsets(2);
        let all = enumerate_functors(&d, &c, 1000).unwrap();
        let (lo, hi) = (&all[0], all.iter().find(|f| f.objects == vec![3, 3]).unwrap());
        let components = (0..2).map(|o| c.hom(lo.objects[o], hi.objects[o])[0]).collect();
        let eta = NatTransformation { source: lo.clone(), target: hi.clone(), components };
        assert!(eta.is_natural());
    }
}
