//! The homotopy category of `C[W⁻¹]`, computed from components of span
//! categories and, independently, by closing zigzag words under the
//! localization relations.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::fincat::{FinCategory, MorId, ObjId};
use crate::relcat::RelativeCategory;
use crate::sigma::Span;
use crate::span::{compose_spans, identity_span, mapping_category, span_label, SpanError};
use crate::sset::{nerve, pi0, UnionFind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LocalizationError {
    #[error("composition is not well defined on components: {first} then {second}")]
    IllDefinedComposition { first: String, second: String },
    #[error(transparent)]
    Span(#[from] SpanError),
}

/// A finite category presented by class representatives, with the canonical
/// functor from the base.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HoCategory {
    pub objects: Vec<String>,
    /// `homs[c * k + d]` lists representatives of the classes `c → d`.
    pub homs: Vec<Vec<String>>,
    /// `compose[(c * k + d) * k + e][i][j]` is the class of `j ∘ i`.
    pub compose: Vec<Vec<Vec<usize>>>,
    pub identities: Vec<usize>,
    /// Class of each base morphism, and that morphism's endpoints.
    pub canonical: Vec<usize>,
    pub base_ends: Vec<(ObjId, ObjId)>,
}

impl HoCategory {
    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn hom(&self, c: ObjId, d: ObjId) -> &[String] {
        &self.homs[c * self.objects.len() + d]
    }

    pub fn compose(&self, c: ObjId, d: ObjId, e: ObjId, i: usize, j: usize) -> usize {
        let k = self.objects.len();
        self.compose[(c * k + d) * k + e][i][j]
    }

    pub fn is_iso(&self, c: ObjId, d: ObjId, i: usize) -> bool {
        (0..self.hom(d, c).len()).any(|j| {
            self.compose(c, d, c, i, j) == self.identities[c] && self.compose(d, c, d, j, i) == self.identities[d]
        })
    }

    /// Unit and associativity laws, and functoriality of the canonical functor.
    pub fn check_axioms(&self, base: &FinCategory) -> Result<(), String> {
        let k = self.objects.len();
        for c in 0..k {
            for d in 0..k {
                for i in 0..self.hom(c, d).len() {
                    if self.compose(c, c, d, self.identities[c], i) != i || self.compose(c, d, d, i, self.identities[d]) != i {
                        return Err(format!("unit law fails at {}", self.hom(c, d)[i]));
                    }
                }
            }
        }
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    for d in 0..k {
                        for f in 0..self.hom(a, b).len() {
                            for g in 0..self.hom(b, c).len() {
                                let gf = self.compose(a, b, c, f, g);
                                for h in 0..self.hom(c, d).len() {
                                    let hg = self.compose(b, c, d, g, h);
                                    if self.compose(a, c, d, gf, h) != self.compose(a, b, d, f, hg) {
                                        return Err(format!("associativity fails at {}", self.hom(a, b)[f]));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        for o in 0..base.object_count() {
            if self.canonical[base.identity(o)] != self.identities[o] {
                return Err(format!("identity of {} is not preserved", base.object_name(o)));
            }
        }
        for f in 0..base.morphism_count() {
            for &g in base.out_arrows(base.cod(f)) {
                let h = base.compose(g, f).unwrap();
                let (a, b, c) = (base.dom(f), base.cod(f), base.cod(g));
                if self.compose(a, b, c, self.canonical[f], self.canonical[g]) != self.canonical[h] {
                    return Err(format!("composite {} after {} is not preserved", base.morphism_name(g), base.morphism_name(f)));
                }
            }
        }
        Ok(())
    }

    pub fn hom_sizes(&self) -> Vec<Vec<usize>> {
        let k = self.objects.len();
        (0..k).map(|c| (0..k).map(|d| self.hom(c, d).len()).collect()).collect()
    }
}

/// Classes of spans `c ⇐ e → d` under the components of the mapping category.
struct SpanClasses {
    spans: Vec<Span>,
    index: HashMap<Span, usize>,
    class: Vec<usize>,
    count: usize,
}

fn span_classes(r: &RelativeCategory, c: ObjId, d: ObjId) -> SpanClasses {
    let mc = mapping_category(r, c, d);
    let class = pi0(&nerve(&mc.category, 1));
    let count = class.iter().max().map_or(0, |m| m + 1);
    let index = mc.spans.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    SpanClasses {
        spans: mc.spans,
        index,
        class,
        count,
    }
}

/// Homs are components of the span categories; composition is induced by
/// span composition and checked on every pair of representatives.
pub fn ho_via_spans(r: &RelativeCategory) -> Result<HoCategory, LocalizationError> {
    let c = &r.base;
    let k = c.object_count();
    let classes: Vec<SpanClasses> = (0..k * k).map(|i| span_classes(r, i / k, i % k)).collect();
    let homs = classes
        .iter()
        .map(|sc| {
            (0..sc.count)
                .map(|cl| span_label(c, &sc.spans[sc.class.iter().position(|&x| x == cl).unwrap()]))
                .collect()
        })
        .collect();
    let mut compose = Vec::with_capacity(k * k * k);
    for a in 0..k {
        for b in 0..k {
            for e in 0..k {
                let (first, second, out) = (&classes[a * k + b], &classes[b * k + e], &classes[a * k + e]);
                let mut table: Vec<Vec<Option<usize>>> = vec![vec![None; second.count]; first.count];
                for (i, s1) in first.spans.iter().enumerate() {
                    for (j, s2) in second.spans.iter().enumerate() {
                        let s = compose_spans(r, s1, s2)?;
                        let cls = out.class[out.index[&s]];
                        let slot = &mut table[first.class[i]][second.class[j]];
                        match slot {
                            None => *slot = Some(cls),
                            Some(prev) if *prev != cls => {
                                return Err(LocalizationError::IllDefinedComposition {
                                    first: span_label(c, s1),
                                    second: span_label(c, s2),
                                })
                            }
                            _ => {}
                        }
                    }
                }
                compose.push(table.into_iter().map(|row| row.into_iter().map(|x| x.unwrap()).collect()).collect());
            }
        }
    }
    let class_of = |s: Span, a: ObjId, b: ObjId| {
        let sc = &classes[a * k + b];
        sc.class[sc.index[&s]]
    };
    let identities = (0..k).map(|o| class_of(identity_span(c, o), o, o)).collect();
    let canonical = (0..c.morphism_count())
        .map(|f| {
            let a = c.dom(f);
            class_of(Span { apex: a, left: c.identity(a), right: f }, a, c.cod(f))
        })
        .collect();
    Ok(HoCategory {
        objects: c.objects().iter().map(|s| s.to_string()).collect(),
        homs,
        compose,
        identities,
        canonical,
        base_ends: base_ends(c),
    })
}

fn base_ends(c: &FinCategory) -> Vec<(ObjId, ObjId)> {
    (0..c.morphism_count()).map(|f| (c.dom(f), c.cod(f))).collect()
}

// ---------------------------------------------------------------------------
// Zigzag oracle

/// A letter of a zigzag: a non-identity morphism, or the formal inverse of a
/// non-identity member of `W`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Letter {
    Forward(MorId),
    Inverse(MorId),
}

/// A path of letters starting at `start`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ZigzagWord {
    pub start: ObjId,
    pub letters: Vec<Letter>,
}

impl ZigzagWord {
    pub fn end(&self, c: &FinCategory) -> ObjId {
        self.letters.last().map_or(self.start, |&l| letter_end(c, l))
    }

    pub fn label(&self, c: &FinCategory) -> String {
        if self.letters.is_empty() {
            return format!("id_{}", c.object_name(self.start));
        }
        self.letters
            .iter()
            .map(|&l| match l {
                Letter::Forward(f) => c.morphism_name(f).to_string(),
                Letter::Inverse(w) => format!("{}^-1", c.morphism_name(w)),
            })
            .collect::<Vec<_>>()
            .join(" ; ")
    }

    /// Adjacent letters agree on endpoints.
    pub fn is_path(&self, c: &FinCategory) -> bool {
        let mut at = self.start;
        for &l in &self.letters {
            if letter_start(c, l) != at {
                return false;
            }
            at = letter_end(c, l);
        }
        true
    }
}

fn letter_start(c: &FinCategory, l: Letter) -> ObjId {
    match l {
        Letter::Forward(f) => c.dom(f),
        Letter::Inverse(w) => c.cod(w),
    }
}

fn letter_end(c: &FinCategory, l: Letter) -> ObjId {
    match l {
        Letter::Forward(f) => c.cod(f),
        Letter::Inverse(w) => c.dom(w),
    }
}

/// One-step rewrites of the pair `(x, y)` (x traversed first); `None` means
/// no relation applies, `Some(vec![])` means the pair cancels.
fn rewrite_pair(r: &RelativeCategory, x: Letter, y: Letter) -> Option<Vec<Letter>> {
    let c = &r.base;
    let as_word = |m: MorId, forward: bool| {
        if c.is_identity(m) {
            vec![]
        } else if forward {
            vec![Letter::Forward(m)]
        } else {
            vec![Letter::Inverse(m)]
        }
    };
    match (x, y) {
        (Letter::Forward(f), Letter::Forward(g)) => Some(as_word(c.compose(g, f).expect("path"), true)),
        (Letter::Forward(w), Letter::Inverse(v)) | (Letter::Inverse(w), Letter::Forward(v)) if w == v => Some(vec![]),
        // w̄ then v̄ is the inverse of w ∘ v, when that composite is in W.
        (Letter::Inverse(w), Letter::Inverse(v)) => {
            let h = c.compose(w, v).expect("path");
            r.is_hypercover(h).then(|| as_word(h, false))
        }
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleStats {
    pub max_len: usize,
    pub words: usize,
    pub probe_words: usize,
    pub rewrites: u64,
    /// Closure rounds, counted against the iteration budget.
    pub rounds: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum OracleResult {
    Localized { ho: HoCategory, stats: OracleStats },
    Inconclusive { reason: String, stats: OracleStats },
}

impl OracleResult {
    pub fn ho(&self) -> Option<&HoCategory> {
        match self {
            OracleResult::Localized { ho, .. } => Some(ho),
            OracleResult::Inconclusive { .. } => None,
        }
    }
}

/// All paths of length ≤ `len`, in shortlex order (length, then letters) per start object.
fn all_words(r: &RelativeCategory, len: usize) -> Vec<ZigzagWord> {
    let c = &r.base;
    let mut letters: Vec<Letter> = c.declared_morphisms().map(Letter::Forward).collect();
    letters.extend(c.declared_morphisms().filter(|&w| r.is_hypercover(w)).map(Letter::Inverse));
    letters.sort();
    let mut out_letters: Vec<Vec<Letter>> = vec![Vec::new(); c.object_count()];
    for &l in &letters {
        out_letters[letter_start(c, l)].push(l);
    }
    let mut layer: Vec<ZigzagWord> = (0..c.object_count())
        .map(|start| ZigzagWord { start, letters: vec![] })
        .collect();
    let mut out = layer.clone();
    for _ in 0..len {
        let mut next = Vec::new();
        for w in &layer {
            for &l in &out_letters[w.end(c)] {
                let mut e = w.clone();
                e.letters.push(l);
                next.push(e);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Congruence closure over the first `limit` words: one-step rewrites are
/// merged, then `p ~ p′ ⇒ pa ~ p′a` and `s ~ s′ ⇒ as ~ as′` are propagated in
/// rounds until nothing changes. `None` when the rounds exceed `max_iter`.
fn close(
    r: &RelativeCategory,
    words: &[ZigzagWord],
    index: &HashMap<ZigzagWord, usize>,
    limit: usize,
    stats: &mut OracleStats,
    max_iter: u64,
) -> Option<UnionFind> {
    let c = &r.base;
    let mut uf = UnionFind::new(words.len());
    let mut split = Vec::with_capacity(limit);
    for (id, w) in words[..limit].iter().enumerate() {
        for p in 1..w.letters.len() {
            if let Some(rep) = rewrite_pair(r, w.letters[p - 1], w.letters[p]) {
                stats.rewrites += 1;
                let mut letters = w.letters[..p - 1].to_vec();
                letters.extend(rep);
                letters.extend_from_slice(&w.letters[p + 1..]);
                uf.union(id, index[&ZigzagWord { start: w.start, letters }]);
            }
        }
        if let (Some(&first), Some(&last)) = (w.letters.first(), w.letters.last()) {
            let n = w.letters.len();
            let prefix = index[&ZigzagWord { start: w.start, letters: w.letters[..n - 1].to_vec() }];
            let suffix = index[&ZigzagWord { start: letter_end(c, first), letters: w.letters[1..].to_vec() }];
            split.push((id, prefix, last, first, suffix));
        }
    }
    loop {
        if stats.rounds >= max_iter {
            return None;
        }
        stats.rounds += 1;
        let mut changed = false;
        let mut right: HashMap<(usize, Letter), usize> = HashMap::new();
        let mut left: HashMap<(Letter, usize), usize> = HashMap::new();
        for &(id, prefix, last, first, suffix) in &split {
            let key = (uf.find(prefix), last);
            match right.get(&key) {
                Some(&other) => changed |= uf.union(id, other),
                None => {
                    right.insert(key, id);
                }
            }
            let key = (first, uf.find(suffix));
            match left.get(&key) {
                Some(&other) => changed |= uf.union(id, other),
                None => {
                    left.insert(key, id);
                }
            }
        }
        if !changed {
            return Some(uf);
        }
    }
}

/// Classes of zigzag words of length ≤ `max_len`, accepted only when they
/// agree with the classes over length ≤ `max_len + 2`.
pub fn oracle_localize(r: &RelativeCategory, max_len: usize, max_iter: u64) -> OracleResult {
    let c = &r.base;
    let k = c.object_count();
    let words = all_words(r, max_len + 2);
    let index: HashMap<ZigzagWord, usize> = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
    let short = words.iter().take_while(|w| w.letters.len() <= max_len).count();
    let mut stats = OracleStats {
        max_len,
        words: short,
        probe_words: words.len(),
        rewrites: 0,
        rounds: 0,
    };
    let inconclusive = |reason: &str, stats: OracleStats| OracleResult::Inconclusive {
        reason: reason.to_string(),
        stats,
    };
    let Some(mut small) = close(r, &words, &index, short, &mut stats, max_iter) else {
        return inconclusive("iteration budget exhausted", stats);
    };
    let Some(mut probe) = close(r, &words, &index, words.len(), &mut stats, max_iter) else {
        return inconclusive("iteration budget exhausted", stats);
    };
    // Classes numbered per hom-set in order of their shortlex-least word.
    let mut class_of_root: HashMap<usize, usize> = HashMap::new();
    let mut probe_to_class: HashMap<usize, usize> = HashMap::new();
    let mut homs: Vec<Vec<String>> = vec![Vec::new(); k * k];
    let mut class_of = vec![usize::MAX; short];
    let mut order: Vec<usize> = (0..short).collect();
    order.sort_by(|&a, &b| {
        let (wa, wb) = (&words[a], &words[b]);
        (wa.letters.len(), &wa.letters, wa.start).cmp(&(wb.letters.len(), &wb.letters, wb.start))
    });
    for id in order {
        let w = &words[id];
        let pair = w.start * k + w.end(c);
        let root = small.find(id);
        let cls = *class_of_root.entry(root).or_insert_with(|| {
            homs[pair].push(w.label(c));
            homs[pair].len() - 1
        });
        class_of[id] = cls;
        match probe_to_class.insert(probe.find(id), cls) {
            Some(prev) if prev != cls => return inconclusive("classes merge at the probe length", stats),
            _ => {}
        }
    }
    if (short..words.len()).any(|id| !probe_to_class.contains_key(&probe.find(id))) {
        return inconclusive("new classes appear at the probe length", stats);
    }
    // Composition through representatives, reduced into the probe universe.
    // Shortlex-least word of each class.
    let mut reps: Vec<Vec<Option<&ZigzagWord>>> = homs.iter().map(|h| vec![None; h.len()]).collect();
    for (id, w) in words[..short].iter().enumerate() {
        let slot = &mut reps[w.start * k + w.end(c)][class_of[id]];
        if slot.is_none_or(|s| (w.letters.len(), &w.letters) < (s.letters.len(), &s.letters)) {
            *slot = Some(w);
        }
    }
    let mut compose = Vec::with_capacity(k * k * k);
    for a in 0..k {
        for b in 0..k {
            for e in 0..k {
                let mut table = Vec::new();
                for u in reps[a * k + b].iter().flatten() {
                    let mut row = Vec::new();
                    for v in reps[b * k + e].iter().flatten() {
                        let mut letters = u.letters.clone();
                        letters.extend_from_slice(&v.letters);
                        let Some(w) = reduce_into(r, ZigzagWord { start: a, letters }, max_len + 2) else {
                            return inconclusive("composite of representatives does not reduce", stats);
                        };
                        row.push(probe_to_class[&probe.find(index[&w])]);
                    }
                    table.push(row);
                }
                compose.push(table);
            }
        }
    }
    let word_class = |w: ZigzagWord, probe: &mut UnionFind| probe_to_class[&probe.find(index[&w])];
    let identities = (0..k)
        .map(|o| word_class(ZigzagWord { start: o, letters: vec![] }, &mut probe))
        .collect();
    let canonical = (0..c.morphism_count())
        .map(|f| {
            let letters = if c.is_identity(f) { vec![] } else { vec![Letter::Forward(f)] };
            word_class(ZigzagWord { start: c.dom(f), letters }, &mut probe)
        })
        .collect();
    OracleResult::Localized {
        ho: HoCategory {
            objects: c.objects().iter().map(|s| s.to_string()).collect(),
            homs,
            compose,
            identities,
            canonical,
            base_ends: base_ends(c),
        },
        stats,
    }
}

/// Applies the leftmost rewrite until the word fits in `len` letters.
fn reduce_into(r: &RelativeCategory, mut w: ZigzagWord, len: usize) -> Option<ZigzagWord> {
    while w.letters.len() > len {
        let p = (1..w.letters.len()).find(|&p| rewrite_pair(r, w.letters[p - 1], w.letters[p]).is_some())?;
        let rep = rewrite_pair(r, w.letters[p - 1], w.letters[p]).unwrap();
        w.letters.splice(p - 1..=p, rep);
    }
    Some(w)
}

// ---------------------------------------------------------------------------
// Comparison

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum ComparisonWitness {
    ObjectsDiffer,
    HomCardinality { source: String, target: String, left: usize, right: usize },
    NoCompatibleBijection { source: String, target: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Comparison {
    pub holds: bool,
    pub witness: Option<ComparisonWitness>,
}

/// Searches for an identity-on-objects isomorphism `A → B` under both
/// canonical functors.
pub fn compare_localizations(a: &HoCategory, b: &HoCategory) -> Comparison {
    let fail = |w| Comparison {
        holds: false,
        witness: Some(w),
    };
    if a.objects != b.objects || a.canonical.len() != b.canonical.len() {
        return fail(ComparisonWitness::ObjectsDiffer);
    }
    let k = a.object_count();
    for c in 0..k {
        for d in 0..k {
            let (l, r) = (a.hom(c, d).len(), b.hom(c, d).len());
            if l != r {
                return fail(ComparisonWitness::HomCardinality {
                    source: a.objects[c].clone(),
                    target: a.objects[d].clone(),
                    left: l,
                    right: r,
                });
            }
        }
    }
    let mut state = IsoSearch {
        a,
        b,
        k,
        map: (0..k * k).map(|p| vec![None; a.homs[p].len()]).collect(),
        used: (0..k * k).map(|p| vec![false; b.homs[p].len()]).collect(),
    };
    let mut forced: Vec<(usize, usize, usize)> = (0..k).map(|o| (o * k + o, a.identities[o], b.identities[o])).collect();
    for (f, &(s, t)) in a.base_ends.iter().enumerate() {
        if b.base_ends[f] != (s, t) {
            return fail(ComparisonWitness::ObjectsDiffer);
        }
        forced.push((s * k + t, a.canonical[f], b.canonical[f]));
    }
    if let Err(p) = state.assign_all(forced) {
        return fail(ComparisonWitness::NoCompatibleBijection {
            source: a.objects[p / k].clone(),
            target: a.objects[p % k].clone(),
        });
    }
    match state.search() {
        Ok(()) => Comparison {
            holds: true,
            witness: None,
        },
        Err(p) => fail(ComparisonWitness::NoCompatibleBijection {
            source: a.objects[p / k].clone(),
            target: a.objects[p % k].clone(),
        }),
    }
}

#[derive(Clone)]
struct IsoSearch<'h> {
    a: &'h HoCategory,
    b: &'h HoCategory,
    k: usize,
    map: Vec<Vec<Option<usize>>>,
    used: Vec<Vec<bool>>,
}

impl IsoSearch<'_> {
    /// Assigns pairs and closes under composition; `Err` names the hom-set of a conflict.
    fn assign_all(&mut self, mut queue: Vec<(usize, usize, usize)>) -> Result<(), usize> {
        let k = self.k;
        while let Some((p, i, j)) = queue.pop() {
            match self.map[p][i] {
                Some(prev) if prev == j => continue,
                Some(_) => return Err(p),
                None if self.used[p][j] => return Err(p),
                None => {}
            }
            self.map[p][i] = Some(j);
            self.used[p][j] = true;
            let (c, d) = (p / k, p % k);
            for e in 0..k {
                for (i2, m) in self.map[d * k + e].iter().enumerate() {
                    if let Some(j2) = *m {
                        queue.push((c * k + e, self.a.compose(c, d, e, i, i2), self.b.compose(c, d, e, j, j2)));
                    }
                }
                for (i2, m) in self.map[e * k + c].iter().enumerate() {
                    if let Some(j2) = *m {
                        queue.push((e * k + d, self.a.compose(e, c, d, i2, i), self.b.compose(e, c, d, j2, j)));
                    }
                }
            }
        }
        Ok(())
    }

    fn search(&mut self) -> Result<(), usize> {
        let open = (0..self.map.len()).find_map(|p| self.map[p].iter().position(Option::is_none).map(|i| (p, i)));
        let Some((p, i)) = open else { return Ok(()) };
        for j in 0..self.used[p].len() {
            if self.used[p][j] {
                continue;
            }
            let mut next = self.clone();
            if next.assign_all(vec![(p, i, j)]).is_ok() && next.search().is_ok() {
                *self = next;
                return Ok(());
            }
        }
        Err(p)
    }
}

// ---------------------------------------------------------------------------
// W-locality of mapping categories

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WLocalityFailure {
    pub hypercover: String,
    pub source: String,
    pub components_before: usize,
    pub components_after: usize,
    /// Number of distinct images of the components under post-composition.
    pub image_size: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WLocalityReport {
    pub checked: usize,
    pub failures: Vec<WLocalityFailure>,
}

impl WLocalityReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// For each non-identity `w: d′ → d` in `W` and each object `c`, post-composition
/// with `w` must be a bijection on components of the mapping categories.
pub fn w_locality_report(r: &RelativeCategory) -> WLocalityReport {
    let c = &r.base;
    let k = c.object_count();
    let mut checked = 0;
    let mut failures = Vec::new();
    let classes: Vec<SpanClasses> = (0..k * k).map(|i| span_classes(r, i / k, i % k)).collect();
    for w in c.declared_morphisms().filter(|&w| r.is_hypercover(w)) {
        let (d1, d) = (c.dom(w), c.cod(w));
        for src in 0..k {
            checked += 1;
            let (before, after) = (&classes[src * k + d1], &classes[src * k + d]);
            let mut image: Vec<Option<usize>> = vec![None; before.count];
            let mut well_defined = true;
            for (i, s) in before.spans.iter().enumerate() {
                let moved = Span { right: c.compose(w, s.right).unwrap(), ..*s };
                let cls = after.class[after.index[&moved]];
                match image[before.class[i]] {
                    None => image[before.class[i]] = Some(cls),
                    Some(prev) => well_defined &= prev == cls,
                }
            }
            let mut distinct: Vec<usize> = image.iter().flatten().copied().collect();
            distinct.sort_unstable();
            distinct.dedup();
            if !well_defined || distinct.len() != before.count || before.count != after.count {
                failures.push(WLocalityFailure {
                    hypercover: c.morphism_name(w).into(),
                    source: c.object_name(src).into(),
                    components_before: before.count,
                    components_after: after.count,
                    image_size: distinct.len(),
                });
            }
        }
    }
    WLocalityReport { checked, failures }
}
