//! The simplicial object Span(C,W): level categories of span diagrams, the
//! Segal check, the unit map from the nerve, mapping categories and H(c).

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::fincat::{
    category_from_arrows, check_equivalence_with, mediating_morphisms, Category, EquivalenceCheck, FinCategory,
    FinFunctor, MorId, ObjId,
};
use crate::relcat::RelativeCategory;
use crate::sigma::{
    build_sigma, elem_index, element_count, iso_over_lambda, right_kan_extend, Elem, LambdaAssignment, Monotone,
    SigmaError, SpanDiagram,
};

pub use crate::sigma::Span;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpanError {
    #[error("estimated {estimate} diagrams exceeds budget {budget}")]
    BudgetExceeded { estimate: u64, budget: u64 },
    #[error("no pullback of {hypercover} along {along}")]
    MissingPullback { hypercover: String, along: String },
    #[error("chain is not composable at position {index}")]
    NotComposable { index: usize },
    #[error("diagram restricted along {values:?} is not an object of level {level}")]
    NotInLevel { values: Vec<usize>, level: usize },
    #[error(transparent)]
    Sigma(#[from] SigmaError),
}

/// All spans `c ⇐ e → d` with left leg in `W`, ordered by (apex, left, right).
pub fn spans_between(r: &RelativeCategory, c: ObjId, d: ObjId) -> Vec<Span> {
    let base = &r.base;
    let mut out = Vec::new();
    for e in 0..base.object_count() {
        for &left in base.hom(e, c) {
            if r.is_hypercover(left) {
                for &right in base.hom(e, d) {
                    out.push(Span { apex: e, left, right });
                }
            }
        }
    }
    out
}

/// All spans out of `c`, ordered by (apex, left, right).
pub fn spans_from(r: &RelativeCategory, c: ObjId) -> Vec<Span> {
    let base = &r.base;
    let mut out = Vec::new();
    for e in 0..base.object_count() {
        for &left in base.hom(e, c) {
            if r.is_hypercover(left) {
                for &right in base.out_arrows(e) {
                    out.push(Span { apex: e, left, right });
                }
            }
        }
    }
    out
}

/// Exact number of relative functors on Λₙ: `1ᵀ Mⁿ 1`, `M[c][d]` = #spans c → d.
pub fn lambda_chain_count(r: &RelativeCategory, n: usize) -> u64 {
    let k = r.base.object_count();
    let mut m = vec![0u64; k * k];
    for c in 0..k {
        for s in spans_from(r, c) {
            m[c * k + r.base.cod(s.right)] += 1;
        }
    }
    let mut v = vec![1u64; k];
    for _ in 0..n {
        let mut next = vec![0u64; k];
        for c in 0..k {
            for d in 0..k {
                next[c] = next[c].saturating_add(m[c * k + d].saturating_mul(v[d]));
            }
        }
        v = next;
    }
    v.into_iter().fold(0u64, u64::saturating_add)
}

/// Every relative functor on Λₙ, depth-first in (c₀, span₁, …) order.
pub fn enumerate_lambda(r: &RelativeCategory, n: usize) -> Vec<LambdaAssignment> {
    let from: Vec<Vec<Span>> = (0..r.base.object_count()).map(|c| spans_from(r, c)).collect();
    let mut out = Vec::new();
    fn rec(
        r: &RelativeCategory,
        from: &[Vec<Span>],
        n: usize,
        cur: &mut LambdaAssignment,
        out: &mut Vec<LambdaAssignment>,
    ) {
        if cur.spans.len() == n {
            out.push(cur.clone());
            return;
        }
        let last = *cur.vertices.last().unwrap();
        for &s in &from[last] {
            cur.spans.push(s);
            cur.vertices.push(r.base.cod(s.right));
            rec(r, from, n, cur, out);
            cur.spans.pop();
            cur.vertices.pop();
        }
    }
    for c in 0..r.base.object_count() {
        let mut cur = LambdaAssignment {
            vertices: vec![c],
            spans: Vec::new(),
        };
        rec(r, &from, n, &mut cur, &mut out);
    }
    out
}

/// Span(C,W)ₙ. Objects are the canonical extensions of all relative
/// functors on Λₙ; arrows are natural transformations that are invertible at
/// every `(i,i)`.
pub struct SpanLevel<'a> {
    pub rel: &'a RelativeCategory,
    pub n: usize,
    pub objects: Vec<SpanDiagram>,
    index: HashMap<LambdaAssignment, usize>,
    /// Elements in assignment order: diagonal first, then by width.
    order: Vec<Elem>,
    /// For each position in `order`, generators whose other end is already placed.
    constraints: Vec<Vec<Generator>>,
}

#[derive(Clone, Copy, Debug)]
enum Generator {
    Down(Elem),
    Right(Elem),
}

impl Generator {
    fn ends(self) -> (Elem, Elem) {
        match self {
            Generator::Down((i, j)) => ((i, j), (i, j - 1)),
            Generator::Right((i, j)) => ((i, j), (i + 1, j)),
        }
    }
    fn arrow(self, f: &SpanDiagram) -> MorId {
        match self {
            Generator::Down(e) => f.down(e),
            Generator::Right(e) => f.right(e),
        }
    }
}

pub fn build_span_level<'a>(r: &'a RelativeCategory, n: usize, budget: u64) -> Result<SpanLevel<'a>, SpanError> {
    let estimate = lambda_chain_count(r, n);
    if estimate > budget {
        return Err(SpanError::BudgetExceeded { estimate, budget });
    }
    let chains = enumerate_lambda(r, n);
    let objects = chains
        .par_iter()
        .map(|chain| {
            right_kan_extend(r, chain).map_err(|e| match e {
                SigmaError::MissingPullback { hypercover, along } => SpanError::MissingPullback { hypercover, along },
                other => SpanError::Sigma(other),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SpanLevel::from_objects(r, n, objects))
}

impl<'a> SpanLevel<'a> {
    fn from_objects(rel: &'a RelativeCategory, n: usize, objects: Vec<SpanDiagram>) -> Self {
        let index = objects.iter().enumerate().map(|(k, f)| (f.restrict_lambda(), k)).collect();
        let mut order: Vec<Elem> = build_sigma(n).elements;
        order.sort_by_key(|&(i, j)| (j - i, i));
        let position: HashMap<Elem, usize> = order.iter().enumerate().map(|(k, &e)| (e, k)).collect();
        let mut constraints = vec![Vec::new(); order.len()];
        for &(i, j) in &order {
            if j > i {
                for g in [Generator::Down((i, j)), Generator::Right((i, j))] {
                    let (a, b) = g.ends();
                    constraints[position[&a].max(position[&b])].push(g);
                }
            }
        }
        Self {
            rel,
            n,
            objects,
            index,
            order,
            constraints,
        }
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    /// Index of the canonical object with the given Λₙ restriction.
    pub fn index_of(&self, lambda: &LambdaAssignment) -> Option<usize> {
        self.index.get(lambda).copied()
    }

    pub fn base(&self) -> &'a FinCategory {
        &self.rel.base
    }

    /// Every arrow of the level, grouped by (source, target).
    pub fn all_arrows(&self) -> Vec<(usize, usize, Vec<MorId>)> {
        (0..self.len())
            .into_par_iter()
            .flat_map_iter(|a| {
                (0..self.len()).flat_map(move |b| self.hom(a, b).into_iter().map(move |h| (a, b, h)))
            })
            .collect()
    }

    /// Checks every arrow is natural and invertible on the diagonal.
    pub fn is_valid_arrow(&self, a: usize, b: usize, comps: &[MorId]) -> bool {
        let c = self.base();
        let (f, g) = (&self.objects[a], &self.objects[b]);
        build_sigma(self.n).elements.iter().all(|&e| {
            let m = comps[elem_index(self.n, e)];
            c.dom(m) == f.object(e) && c.cod(m) == g.object(e) && (e.0 != e.1 || c.is_isomorphism(m))
        }) && self.constraints.iter().flatten().all(|&gen| {
            let (s, t) = gen.ends();
            c.compose(gen.arrow(g), comps[elem_index(self.n, s)])
                == c.compose(comps[elem_index(self.n, t)], gen.arrow(f))
        })
    }
}

impl Category for SpanLevel<'_> {
    type Arrow = Vec<MorId>;

    fn object_count(&self) -> usize {
        self.objects.len()
    }

    fn object_label(&self, a: usize) -> String {
        let c = self.base();
        let f = &self.objects[a];
        let l = f.restrict_lambda();
        let mut s = c.object_name(l.vertices[0]).to_string();
        for (k, sp) in l.spans.iter().enumerate() {
            s.push_str(&format!(
                " <={}= {} -{}-> {}",
                c.morphism_name(sp.left),
                c.object_name(sp.apex),
                c.morphism_name(sp.right),
                c.object_name(l.vertices[k + 1])
            ));
        }
        s
    }

    /// Brute-force enumeration of natural transformations, one element at a time.
    fn hom(&self, a: usize, b: usize) -> Vec<Vec<MorId>> {
        let c = self.base();
        let (f, g) = (&self.objects[a], &self.objects[b]);
        let mut out = Vec::new();
        let mut comps = vec![0; element_count(self.n)];
        self.extend(c, f, g, 0, &mut comps, &mut out);
        out
    }

    fn identity(&self, a: usize) -> Vec<MorId> {
        let c = self.base();
        self.objects[a].objects.iter().map(|&o| c.identity(o)).collect()
    }

    fn compose(&self, g: &Vec<MorId>, f: &Vec<MorId>) -> Vec<MorId> {
        let c = self.base();
        g.iter().zip(f).map(|(&y, &x)| c.compose(y, x).expect("composable components")).collect()
    }
}

impl SpanLevel<'_> {
    fn extend(
        &self,
        c: &FinCategory,
        f: &SpanDiagram,
        g: &SpanDiagram,
        step: usize,
        comps: &mut Vec<MorId>,
        out: &mut Vec<Vec<MorId>>,
    ) {
        if step == self.order.len() {
            out.push(comps.clone());
            return;
        }
        let e = self.order[step];
        let idx = elem_index(self.n, e);
        for &m in c.hom(f.object(e), g.object(e)) {
            if e.0 == e.1 && !c.is_isomorphism(m) {
                continue;
            }
            comps[idx] = m;
            let natural = self.constraints[step].iter().all(|&gen| {
                let (s, t) = gen.ends();
                c.compose(gen.arrow(g), comps[elem_index(self.n, s)])
                    == c.compose(comps[elem_index(self.n, t)], gen.arrow(f))
            });
            if natural {
                self.extend(c, f, g, step + 1, comps, out);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Segal maps

/// Strict fiber product `Span₁ ×_{Span₀} ⋯ ×_{Span₀} Span₁` (n factors).
pub struct FiberProduct<'l, 'a> {
    pub level1: &'l SpanLevel<'a>,
    pub n: usize,
    pub objects: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

impl<'l, 'a> FiberProduct<'l, 'a> {
    pub fn new(level1: &'l SpanLevel<'a>, n: usize) -> Self {
        assert_eq!(level1.n, 1);
        let k = level1.base().object_count();
        let mut by_source = vec![Vec::new(); k];
        for (idx, f) in level1.objects.iter().enumerate() {
            by_source[f.object((0, 0))].push(idx);
        }
        let mut objects = Vec::new();
        fn rec(l1: &SpanLevel, by_source: &[Vec<usize>], n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == n {
                out.push(cur.clone());
                return;
            }
            let at = l1.objects[*cur.last().unwrap()].object((1, 1));
            for &next in &by_source[at] {
                cur.push(next);
                rec(l1, by_source, n, cur, out);
                cur.pop();
            }
        }
        for first in 0..level1.len() {
            let mut cur = vec![first];
            rec(level1, &by_source, n, &mut cur, &mut objects);
        }
        let index = objects.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self {
            level1,
            n,
            objects,
            index,
        }
    }

    pub fn index_of(&self, tuple: &[usize]) -> Option<usize> {
        self.index.get(tuple).copied()
    }
}

impl Category for FiberProduct<'_, '_> {
    /// Concatenated level-1 components, three per factor.
    type Arrow = Vec<MorId>;

    fn object_count(&self) -> usize {
        self.objects.len()
    }

    fn object_label(&self, a: usize) -> String {
        self.objects[a]
            .iter()
            .map(|&s| self.level1.object_label(s))
            .collect::<Vec<_>>()
            .join(" ; ")
    }

    fn hom(&self, a: usize, b: usize) -> Vec<Vec<MorId>> {
        let homs: Vec<Vec<Vec<MorId>>> = (0..self.n)
            .map(|k| self.level1.hom(self.objects[a][k], self.objects[b][k]))
            .collect();
        if homs.iter().any(Vec::is_empty) {
            return Vec::new();
        }
        let mut out = Vec::new();
        fn rec(homs: &[Vec<Vec<MorId>>], k: usize, cur: &mut Vec<MorId>, out: &mut Vec<Vec<MorId>>) {
            if k == homs.len() {
                out.push(cur.clone());
                return;
            }
            for h in &homs[k] {
                if k > 0 && cur[cur.len() - 1] != h[0] {
                    continue;
                }
                cur.extend_from_slice(h);
                rec(homs, k + 1, cur, out);
                cur.truncate(cur.len() - 3);
            }
        }
        rec(&homs, 0, &mut Vec::new(), &mut out);
        out
    }

    fn identity(&self, a: usize) -> Vec<MorId> {
        self.objects[a].iter().flat_map(|&s| self.level1.identity(s)).collect()
    }

    fn compose(&self, g: &Vec<MorId>, f: &Vec<MorId>) -> Vec<MorId> {
        let c = self.level1.base();
        g.iter().zip(f).map(|(&y, &x)| c.compose(y, x).expect("composable components")).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SegalReport {
    pub n: usize,
    pub level_objects: usize,
    pub fiber_product_objects: usize,
    pub check: EquivalenceCheck,
}

/// The Segal functor `levelₙ → level₁ ×_{level₀} ⋯` checked for equivalence.
pub fn segal_check_levels(level_n: &SpanLevel, level1: &SpanLevel) -> SegalReport {
    let n = level_n.n;
    let fp = FiberProduct::new(level1, n);
    let spans_of = |f: &SpanDiagram| -> Vec<usize> {
        let l = f.restrict_lambda();
        (0..n)
            .map(|k| {
                level1
                    .index_of(&LambdaAssignment {
                        vertices: vec![l.vertices[k], l.vertices[k + 1]],
                        spans: vec![l.spans[k]],
                    })
                    .expect("level one holds every span")
            })
            .collect()
    };
    let object_map: Vec<usize> = level_n
        .objects
        .iter()
        .map(|f| fp.index_of(&spans_of(f)).expect("restriction is a fiber product object"))
        .collect();
    let check = check_equivalence_with(
        level_n,
        &fp,
        |a| object_map[a],
        |comps: &Vec<MorId>| {
            (0..n)
                .flat_map(|k| {
                    [
                        comps[elem_index(n, (k, k))],
                        comps[elem_index(n, (k, k + 1))],
                        comps[elem_index(n, (k + 1, k + 1))],
                    ]
                })
                .collect()
        },
    );
    SegalReport {
        n,
        level_objects: level_n.len(),
        fiber_product_objects: fp.objects.len(),
        check,
    }
}

pub fn segal_check(r: &RelativeCategory, n: usize, budget: u64) -> Result<SegalReport, SpanError> {
    let level1 = build_span_level(r, 1, budget)?;
    if n == 1 {
        return Ok(segal_check_levels(&level1, &level1));
    }
    let level_n = build_span_level(r, n, budget)?;
    Ok(segal_check_levels(&level_n, &level1))
}

// ---------------------------------------------------------------------------
// Simplicial structure

/// The functor `levelₙ → levelₘ` induced by `α: [m] → [n]`.
#[derive(Clone, Debug)]
pub struct SimplicialAction {
    pub alpha: Monotone,
    pub objects: Vec<usize>,
    /// Per source object: iso from the precomposed diagram to the canonical
    /// one, when they differ.
    pub conjugation: Vec<Option<Vec<MorId>>>,
}

impl SimplicialAction {
    pub fn is_strict(&self) -> bool {
        self.conjugation.iter().all(Option::is_none)
    }

    pub fn map_arrow(&self, c: &FinCategory, a: usize, b: usize, comps: &[MorId], n: usize) -> Vec<MorId> {
        let m = self.alpha.source();
        let mut out: Vec<MorId> = build_sigma(m)
            .elements
            .iter()
            .map(|&(i, j)| comps[elem_index(n, (self.alpha.apply(i), self.alpha.apply(j)))])
            .collect();
        if let Some(to) = &self.conjugation[b] {
            out = out.iter().zip(to).map(|(&x, &t)| c.compose(t, x).unwrap()).collect();
        }
        if let Some(from) = &self.conjugation[a] {
            out = out
                .iter()
                .zip(from)
                .map(|(&x, &t)| c.compose(x, c.inverse(t).unwrap()).unwrap())
                .collect();
        }
        out
    }
}

pub fn simplicial_action(alpha: &Monotone, from: &SpanLevel, to: &SpanLevel) -> Result<SimplicialAction, SpanError> {
    assert_eq!(alpha.target, from.n);
    assert_eq!(alpha.source(), to.n);
    let c = from.base();
    let mut objects = Vec::with_capacity(from.len());
    let mut conjugation = Vec::with_capacity(from.len());
    for f in &from.objects {
        let g = f.precompose(c, alpha);
        let not_in = || SpanError::NotInLevel {
            values: alpha.values.clone(),
            level: to.n,
        };
        let idx = to.index_of(&g.restrict_lambda()).ok_or_else(not_in)?;
        objects.push(idx);
        if g == to.objects[idx] {
            conjugation.push(None);
        } else {
            conjugation.push(Some(iso_over_lambda(c, &g, &to.objects[idx]).ok_or_else(not_in)?));
        }
    }
    Ok(SimplicialAction {
        alpha: alpha.clone(),
        objects,
        conjugation,
    })
}

/// The degenerate diagram of a composable chain `c₀ → ⋯ → cₙ`.
pub fn nerve_unit(c: &FinCategory, start: ObjId, chain: &[MorId]) -> Result<SpanDiagram, SpanError> {
    let mut at = start;
    for (k, &f) in chain.iter().enumerate() {
        if c.dom(f) != at {
            return Err(SpanError::NotComposable { index: k });
        }
        at = c.cod(f);
    }
    Ok(SpanDiagram::from_chain(c, start, chain))
}

/// The chain `α*(c₀ → ⋯ → cₙ)`: vertices `c_{α(k)}`, arrows composites.
pub fn restrict_chain(c: &FinCategory, start: ObjId, chain: &[MorId], alpha: &Monotone) -> (ObjId, Vec<MorId>) {
    let mut vertices = vec![start];
    for &f in chain {
        vertices.push(c.cod(f));
    }
    let between = |p: usize, q: usize| {
        (p..q).fold(c.identity(vertices[p]), |acc, k| c.compose(chain[k], acc).unwrap())
    };
    let new_start = vertices[alpha.apply(0)];
    let arrows = (0..alpha.source())
        .map(|k| between(alpha.apply(k), alpha.apply(k + 1)))
        .collect();
    (new_start, arrows)
}

/// All composable chains of length `n` (identities included).
pub fn chains(c: &FinCategory, n: usize) -> Vec<(ObjId, Vec<MorId>)> {
    let mut out = Vec::new();
    fn rec(c: &FinCategory, n: usize, start: ObjId, at: ObjId, cur: &mut Vec<MorId>, out: &mut Vec<(ObjId, Vec<MorId>)>) {
        if cur.len() == n {
            out.push((start, cur.clone()));
            return;
        }
        for &f in c.out_arrows(at) {
            cur.push(f);
            rec(c, n, start, c.cod(f), cur, out);
            cur.pop();
        }
    }
    for o in 0..c.object_count() {
        rec(c, n, o, o, &mut Vec::new(), &mut out);
    }
    out
}

/// Face and degeneracy maps between levels `≤ max_level`.
fn generators(max_level: usize) -> Vec<Monotone> {
    let mut out = Vec::new();
    for n in 1..=max_level {
        for i in 0..=n {
            out.push(Monotone::face(n, i));
        }
        for i in 0..n {
            out.push(Monotone::degeneracy(n - 1, i));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SimplicialReport {
    pub max_level: usize,
    pub strict_maps: usize,
    pub composites: usize,
    pub unit_squares: usize,
    pub failure: Option<String>,
}

/// For every composable pair of generators `β` then `α`, the action of `α ∘ β`
/// equals the composite of actions on objects and arrows; every action is
/// strict; and `nerve_unit` commutes with every generator.
pub fn simplicial_check(r: &RelativeCategory, max_level: usize, budget: u64) -> Result<SimplicialReport, SpanError> {
    let levels = (0..=max_level)
        .map(|m| build_span_level(r, m, budget))
        .collect::<Result<Vec<_>, _>>()?;
    simplicial_check_levels(r, &levels)
}

/// As [`simplicial_check`], over already built levels `0..levels.len()`.
pub fn simplicial_check_levels(r: &RelativeCategory, levels: &[SpanLevel]) -> Result<SimplicialReport, SpanError> {
    let c = &r.base;
    let max_level = levels.len() - 1;
    let arrows: Vec<Vec<(usize, usize, Vec<MorId>)>> = levels.iter().map(|l| l.all_arrows()).collect();
    let gens = generators(max_level);
    let act = |alpha: &Monotone| simplicial_action(alpha, &levels[alpha.target], &levels[alpha.source()]);
    let mut report = SimplicialReport {
        max_level,
        strict_maps: 0,
        composites: 0,
        unit_squares: 0,
        failure: None,
    };
    let fail = |mut report: SimplicialReport, msg: String| {
        report.failure = Some(msg);
        Ok(report)
    };
    let actions = gens.iter().map(act).collect::<Result<Vec<_>, _>>()?;
    for (alpha, a) in gens.iter().zip(&actions) {
        if !a.is_strict() {
            return fail(report, format!("{:?} is not strict", alpha.values));
        }
        report.strict_maps += 1;
    }
    for (alpha, a) in gens.iter().zip(&actions) {
        for (beta, b) in gens.iter().zip(&actions) {
            if beta.target != alpha.source() {
                continue;
            }
            let composite = act(&alpha.after(beta))?;
            let (n, m) = (alpha.target, alpha.source());
            for x in 0..levels[n].len() {
                if composite.objects[x] != b.objects[a.objects[x]] {
                    return fail(report, format!("objects differ for {:?} after {:?}", alpha.values, beta.values));
                }
            }
            for (x, y, comps) in &arrows[n] {
                let once = a.map_arrow(c, *x, *y, comps, n);
                let twice = b.map_arrow(c, a.objects[*x], a.objects[*y], &once, m);
                if twice != composite.map_arrow(c, *x, *y, comps, n) {
                    return fail(report, format!("arrows differ for {:?} after {:?}", alpha.values, beta.values));
                }
            }
            report.composites += 1;
        }
    }
    for n in 0..=max_level {
        for (start, chain) in chains(c, n) {
            let unit = nerve_unit(c, start, &chain)?;
            let idx = levels[n].index_of(&unit.restrict_lambda());
            if idx.map(|i| &levels[n].objects[i]) != Some(&unit) {
                return fail(report, format!("nerve unit of a chain at level {n} is not a level object"));
            }
            for (alpha, a) in gens.iter().zip(&actions) {
                if alpha.target != n {
                    continue;
                }
                let (s, ch) = restrict_chain(c, start, &chain, alpha);
                let image = &levels[alpha.source()].objects[a.objects[idx.unwrap()]];
                if *image != nerve_unit(c, s, &ch)? {
                    return fail(report, format!("unit square fails for {:?}", alpha.values));
                }
                report.unit_squares += 1;
            }
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Spans and their composition

/// `s2 ∘ s1`, pulling back `s2.left` along `s1.right`.
pub fn compose_spans(r: &RelativeCategory, s1: &Span, s2: &Span) -> Result<Span, SpanError> {
    let c = &r.base;
    let cone = c
        .canonical_pullback(s2.left, s1.right)
        .ok_or_else(|| SpanError::MissingPullback {
            hypercover: c.morphism_name(s2.left).into(),
            along: c.morphism_name(s1.right).into(),
        })?;
    Ok(Span {
        apex: cone.apex,
        left: c.compose(s1.left, cone.leg2).expect("composable"),
        right: c.compose(s2.right, cone.leg1).expect("composable"),
    })
}

/// The constant span `c ⇐ c → c`.
pub fn identity_span(c: &FinCategory, o: ObjId) -> Span {
    Span {
        apex: o,
        left: c.identity(o),
        right: c.identity(o),
    }
}

/// Isomorphisms `s.apex → t.apex` commuting with both legs.
pub fn span_isos(c: &FinCategory, s: &Span, t: &Span) -> Vec<MorId> {
    c.hom(s.apex, t.apex)
        .iter()
        .copied()
        .filter(|&u| {
            c.is_isomorphism(u) && c.compose(t.left, u) == Some(s.left) && c.compose(t.right, u) == Some(s.right)
        })
        .collect()
}

pub fn span_label(c: &FinCategory, s: &Span) -> String {
    format!(
        "{} <={}= {} -{}-> {}",
        c.object_name(c.cod(s.left)),
        c.morphism_name(s.left),
        c.object_name(s.apex),
        c.morphism_name(s.right),
        c.object_name(c.cod(s.right))
    )
}

// ---------------------------------------------------------------------------
// Mapping categories and H(c)

/// Spans between fixed endpoints with their morphisms.
#[derive(Clone, Debug)]
pub struct MappingCategory {
    pub source: ObjId,
    pub target: ObjId,
    pub spans: Vec<Span>,
    pub category: FinCategory,
}

/// Arrows are apex maps commuting with both legs (endpoint components are identities).
pub fn mapping_category(r: &RelativeCategory, c: ObjId, d: ObjId) -> MappingCategory {
    let base = &r.base;
    let spans = spans_between(r, c, d);
    let mut arrows = Vec::new();
    for (a, s) in spans.iter().enumerate() {
        for (b, t) in spans.iter().enumerate() {
            for &u in base.hom(s.apex, t.apex) {
                let commutes =
                    base.compose(t.left, u) == Some(s.left) && base.compose(t.right, u) == Some(s.right);
                if commutes && !(a == b && u == base.identity(s.apex)) {
                    arrows.push((a, b, u));
                }
            }
        }
    }
    let category = category_from_arrows(
        spans.iter().map(|s| span_label(base, s)).collect(),
        &arrows,
        |g, f| base.compose(*g, *f).unwrap(),
        |o| base.identity(spans[o].apex),
        |a, b, u| format!("{}:{a}->{b}", base.morphism_name(*u)),
    );
    MappingCategory {
        source: c,
        target: d,
        spans,
        category,
    }
}

/// Variant with arbitrary automorphisms of the endpoints as end components.
pub fn mapping_category_unnormalized(r: &RelativeCategory, c: ObjId, d: ObjId) -> MappingCategory {
    let base = &r.base;
    let spans = spans_between(r, c, d);
    let autos = |o: ObjId| -> Vec<MorId> {
        base.hom(o, o).iter().copied().filter(|&f| base.is_isomorphism(f)).collect()
    };
    let (ac, ad) = (autos(c), autos(d));
    let mut arrows = Vec::new();
    for (a, s) in spans.iter().enumerate() {
        for (b, t) in spans.iter().enumerate() {
            for &u in base.hom(s.apex, t.apex) {
                for &x in &ac {
                    for &y in &ad {
                        let commutes = base.compose(t.left, u) == base.compose(x, s.left)
                            && base.compose(t.right, u) == base.compose(y, s.right);
                        let is_id = a == b && u == base.identity(s.apex) && x == base.identity(c) && y == base.identity(d);
                        if commutes && !is_id {
                            arrows.push((a, b, (x, u, y)));
                        }
                    }
                }
            }
        }
    }
    let category = category_from_arrows(
        spans.iter().map(|s| span_label(base, s)).collect(),
        &arrows,
        |g, f| {
            (
                base.compose(g.0, f.0).unwrap(),
                base.compose(g.1, f.1).unwrap(),
                base.compose(g.2, f.2).unwrap(),
            )
        },
        |o| (base.identity(c), base.identity(spans[o].apex), base.identity(d)),
        |a, b, k| {
            format!(
                "({},{},{}):{a}->{b}",
                base.morphism_name(k.0),
                base.morphism_name(k.1),
                base.morphism_name(k.2)
            )
        },
    );
    MappingCategory {
        source: c,
        target: d,
        spans,
        category,
    }
}

/// The span fibration over `C`: spans out of `c` with arbitrary endpoint.
#[derive(Clone, Debug)]
pub struct HCategory {
    pub base_object: ObjId,
    pub spans: Vec<Span>,
    pub category: FinCategory,
    /// `π` on objects (the endpoint) and on morphisms.
    pub proj_objects: Vec<ObjId>,
    pub proj_morphisms: Vec<MorId>,
    arrow_index: HashMap<(usize, usize, MorId, MorId), MorId>,
    span_index: HashMap<Span, usize>,
}

impl HCategory {
    pub fn projection<'a>(&'a self, base: &'a FinCategory) -> FinFunctor<'a> {
        FinFunctor {
            source: &self.category,
            target: base,
            objects: self.proj_objects.clone(),
            morphisms: self.proj_morphisms.clone(),
        }
    }

    pub fn object_of(&self, s: &Span) -> Option<usize> {
        self.span_index.get(s).copied()
    }

    pub fn arrow(&self, from: usize, to: usize, apex_map: MorId, end_map: MorId) -> Option<MorId> {
        self.arrow_index.get(&(from, to, apex_map, end_map)).copied()
    }

    /// Objects over `d` and arrows over `id_d`, as (spans, apex maps between span indices).
    pub fn fiber(&self, base: &FinCategory, d: ObjId) -> (Vec<Span>, Vec<(usize, usize, MorId)>) {
        let objs: Vec<usize> = (0..self.spans.len()).filter(|&o| self.proj_objects[o] == d).collect();
        let local: HashMap<usize, usize> = objs.iter().enumerate().map(|(k, &o)| (o, k)).collect();
        let mut arrows: Vec<(usize, usize, MorId)> = self
            .arrow_index
            .iter()
            .filter(|(&(a, b, _, v), _)| local.contains_key(&a) && local.contains_key(&b) && v == base.identity(d))
            .map(|(&(a, b, u, _), _)| (local[&a], local[&b], u))
            .collect();
        arrows.sort();
        (objs.iter().map(|&o| self.spans[o]).collect(), arrows)
    }
}

pub fn build_h(r: &RelativeCategory, c: ObjId) -> HCategory {
    let base = &r.base;
    let spans: Vec<Span> = (0..base.object_count())
        .flat_map(|d| spans_between(r, c, d))
        .collect();
    let mut arrows = Vec::new();
    for (a, s) in spans.iter().enumerate() {
        for (b, t) in spans.iter().enumerate() {
            let (d, d2) = (base.cod(s.right), base.cod(t.right));
            for &u in base.hom(s.apex, t.apex) {
                if base.compose(t.left, u) != Some(s.left) {
                    continue;
                }
                for &v in base.hom(d, d2) {
                    if base.compose(t.right, u) == base.compose(v, s.right)
                        && !(a == b && u == base.identity(s.apex) && v == base.identity(d))
                    {
                        arrows.push((a, b, (u, v)));
                    }
                }
            }
        }
    }
    let category = category_from_arrows(
        spans.iter().map(|s| span_label(base, s)).collect(),
        &arrows,
        |g, f| (base.compose(g.0, f.0).unwrap(), base.compose(g.1, f.1).unwrap()),
        |o| (base.identity(spans[o].apex), base.identity(base.cod(spans[o].right))),
        |a, b, k| format!("({},{}):{a}->{b}", base.morphism_name(k.0), base.morphism_name(k.1)),
    );
    let proj_objects: Vec<ObjId> = spans.iter().map(|s| base.cod(s.right)).collect();
    let mut arrow_index = HashMap::new();
    let mut proj_morphisms = vec![0; category.morphism_count()];
    for (k, &(a, b, (u, v))) in arrows.iter().enumerate() {
        arrow_index.insert((a, b, u, v), k);
        proj_morphisms[k] = v;
    }
    for (o, s) in spans.iter().enumerate() {
        let id = category.identity(o);
        let v = base.identity(base.cod(s.right));
        arrow_index.insert((o, o, base.identity(s.apex), v), id);
        proj_morphisms[id] = v;
    }
    let span_index = spans.iter().enumerate().map(|(k, s)| (*s, k)).collect();
    HCategory {
        base_object: c,
        spans,
        category,
        proj_objects,
        proj_morphisms,
        arrow_index,
        span_index,
    }
}

/// The arrow `(id, h)` from `x` to its post-composition with `h`.
pub fn cocartesian_lift(r: &RelativeCategory, h: &HCategory, x: usize, hm: MorId) -> Option<MorId> {
    let base = &r.base;
    let s = h.spans[x];
    let t = Span {
        apex: s.apex,
        left: s.left,
        right: base.compose(hm, s.right)?,
    };
    h.arrow(x, h.object_of(&t)?, base.identity(s.apex), hm)
}

/// The arrow into `x` over `w` built from the canonical pullback of `x`'s
/// right leg along `w`.
pub fn cartesian_lift(r: &RelativeCategory, h: &HCategory, x: usize, w: MorId) -> Result<MorId, SpanError> {
    let base = &r.base;
    let s = h.spans[x];
    let cone = base
        .canonical_pullback(w, s.right)
        .ok_or_else(|| SpanError::MissingPullback {
            hypercover: base.morphism_name(w).into(),
            along: base.morphism_name(s.right).into(),
        })?;
    let lifted = Span {
        apex: cone.apex,
        left: base.compose(s.left, cone.leg2).expect("composable"),
        right: cone.leg1,
    };
    let missing = || SpanError::MissingPullback {
        hypercover: base.morphism_name(w).into(),
        along: base.morphism_name(s.right).into(),
    };
    let from = h.object_of(&lifted).ok_or_else(missing)?;
    h.arrow(from, x, cone.leg2, w).ok_or_else(missing)
}

/// Mediating maps between two cones with the same legs' targets.
pub fn comparison_map(c: &FinCategory, from: &Span, to: &Span) -> Vec<MorId> {
    mediating_morphisms(c, to.apex, to.left, to.right, (from.apex, from.left, from.right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{is_cartesian, is_cocartesian, validate_category};
    use crate::relcat::tests::{all_fixtures, collapse_rel, cube, meet, parallel_rel};
    use crate::sigma::check_diagram_conditions;

    fn m(r: &RelativeCategory, name: &str) -> MorId {
        r.base.morphism_id(name).unwrap()
    }

    fn o(r: &RelativeCategory, name: &str) -> ObjId {
        r.base.object_id(name).unwrap()
    }

    #[test]
    fn simplicial_identities_hold_strictly() {
        for (name, r) in all_fixtures() {
            let max = if name == "meet-poset" { 2 } else { 3 };
            let rep = simplicial_check(&r, max, 1_000_000).unwrap();
            assert_eq!(rep.failure, None, "{name}");
            assert!(rep.composites > 0 && rep.unit_squares > 0);
        }
    }

    #[test]
    fn level_zero_is_the_core() {
        for (_, r) in all_fixtures() {
            let l0 = build_span_level(&r, 0, 1000).unwrap();
            assert_eq!(l0.len(), r.base.object_count());
            let arrows = l0.all_arrows();
            let isos = (0..r.base.morphism_count()).filter(|&f| r.base.is_isomorphism(f)).count();
            assert_eq!(arrows.len(), isos);
        }
    }

    #[test]
    fn parallel_pair_spans_from_x_to_y() {
        let r = parallel_rel();
        let spans = spans_between(&r, o(&r, "x"), o(&r, "y"));
        let names: Vec<String> = spans.iter().map(|s| span_label(&r.base, s)).collect();
        assert_eq!(names, vec!["x <=id_x= x -f-> y", "x <=id_x= x -g-> y"]);
    }

    #[test]
    fn cube_level_one_count() {
        let r = cube();
        let l1 = build_span_level(&r, 1, 10_000).unwrap();
        // Triples (c, e, d) with e ⊆ c ∩ d and c ∖ e ⊆ {3}.
        let mut expected = 0;
        for c in 0..8usize {
            for e in 0..8usize {
                for d in 0..8usize {
                    if e & c == e && e & d == e && (c & !e) & !0b100 == 0 {
                        expected += 1;
                    }
                }
            }
        }
        assert_eq!(l1.len(), expected);
        assert_eq!(lambda_chain_count(&r, 1), expected as u64);
    }

    #[test]
    fn chain_count_matches_enumeration() {
        for (_, r) in all_fixtures() {
            for n in 0..4 {
                assert_eq!(lambda_chain_count(&r, n), enumerate_lambda(&r, n).len() as u64);
            }
        }
    }

    #[test]
    fn span_level_budget() {
        assert_eq!(
            build_span_level(&cube(), 3, 1).err(),
            Some(SpanError::BudgetExceeded { estimate: lambda_chain_count(&cube(), 3), budget: 1 })
        );
    }

    #[test]
    fn level_objects_are_valid_diagrams() {
        for (_, r) in all_fixtures() {
            let level = build_span_level(&r, 2, 100_000).unwrap();
            for f in &level.objects {
                assert!(f.is_functor(&r.base) && f.is_relative(&r));
                let conds = check_diagram_conditions(&r.base, f);
                assert!(conds.cond_all_squares && conds.cond_inner_squares && conds.cond_rke);
            }
            for (a, b, h) in level.all_arrows() {
                assert!(level.is_valid_arrow(a, b, &h));
            }
        }
    }

    #[test]
    fn segal_level_one_is_identity() {
        for (_, r) in all_fixtures() {
            let report = segal_check(&r, 1, 10_000).unwrap();
            assert!(report.check.holds);
            assert_eq!(report.level_objects, report.fiber_product_objects);
        }
    }

    #[test]
    fn segal_meet_level_two() {
        assert!(segal_check(&meet(), 2, 100_000).unwrap().check.holds);
    }

    #[test]
    fn degeneracy_sends_object_to_constant_span() {
        let r = cube();
        let l0 = build_span_level(&r, 0, 1000).unwrap();
        let l1 = build_span_level(&r, 1, 1000).unwrap();
        let act = simplicial_action(&Monotone::degeneracy(0, 0), &l0, &l1).unwrap();
        for (a, &b) in act.objects.iter().enumerate() {
            let s = l1.objects[b].restrict_lambda().spans[0];
            assert_eq!(s, identity_span(&r.base, a));
        }
    }

    #[test]
    fn inner_face_composes_the_span() {
        let r = cube();
        let l1 = build_span_level(&r, 1, 10_000).unwrap();
        let l2 = build_span_level(&r, 2, 100_000).unwrap();
        let act = simplicial_action(&Monotone::face(2, 1), &l2, &l1).unwrap();
        assert!(act.is_strict());
        for (a, &b) in act.objects.iter().enumerate() {
            let lam = l2.objects[a].restrict_lambda();
            let composite = compose_spans(&r, &lam.spans[0], &lam.spans[1]).unwrap();
            assert_eq!(l1.objects[b].restrict_lambda().spans[0], composite);
            assert_eq!(l2.objects[a].object((0, 2)), composite.apex);
        }
    }

    #[test]
    fn nerve_unit_examples() {
        let r = parallel_rel();
        let f = nerve_unit(&r.base, o(&r, "x"), &[m(&r, "f")]).unwrap();
        let lam = f.restrict_lambda();
        assert_eq!(span_label(&r.base, &lam.spans[0]), "x <=id_x= x -f-> y");
        let c0 = nerve_unit(&r.base, o(&r, "y"), &[]).unwrap();
        assert_eq!(c0.objects, vec![o(&r, "y")]);
        assert_eq!(
            nerve_unit(&r.base, o(&r, "y"), &[m(&r, "f")]).err(),
            Some(SpanError::NotComposable { index: 0 })
        );
    }

    #[test]
    fn cube_compose_spans_example() {
        let r = cube();
        let s1 = Span { apex: o(&r, "{1,2}"), left: m(&r, "{1,2}<={1,2,3}"), right: r.base.identity(o(&r, "{1,2}")) };
        // {1} ⊆ {1,2} is not a cube hypercover; compose on the underlying maximal W.
        let rm = RelativeCategory::maximal(r.base.clone());
        let s2 = Span { apex: o(&r, "{1}"), left: m(&r, "{1}<={1,2}"), right: m(&r, "{1}<={1,3}") };
        let comp = compose_spans(&rm, &s1, &s2).unwrap();
        assert_eq!(span_label(&r.base, &comp), "{1,2,3} <={1}<={1,2,3}= {1} -{1}<={1,3}-> {1,3}");
    }

    #[test]
    fn composition_is_unital_and_associative_up_to_iso() {
        for (_, r) in all_fixtures() {
            let c = &r.base;
            let all: Vec<Span> = (0..c.object_count()).flat_map(|x| spans_from(&r, x)).collect();
            for s in &all {
                let right_unit = compose_spans(&r, s, &identity_span(c, c.cod(s.right))).unwrap();
                let left_unit = compose_spans(&r, &identity_span(c, c.cod(s.left)), s).unwrap();
                assert_eq!(span_isos(c, &right_unit, s).len(), 1);
                assert_eq!(span_isos(c, &left_unit, s).len(), 1);
            }
            for s1 in &all {
                for s2 in all.iter().filter(|s| c.cod(s.left) == c.cod(s1.right)) {
                    let s12 = compose_spans(&r, s1, s2).unwrap();
                    for s3 in all.iter().filter(|s| c.cod(s.left) == c.cod(s2.right)) {
                        let a = compose_spans(&r, &s12, s3).unwrap();
                        let b = compose_spans(&r, s1, &compose_spans(&r, s2, s3).unwrap()).unwrap();
                        assert!(!span_isos(c, &a, &b).is_empty());
                    }
                }
            }
        }
    }

    #[test]
    fn mapping_category_examples() {
        let r = meet();
        for c in 0..4 {
            for d in 0..4 {
                let mc = mapping_category(&r, c, d);
                assert!(validate_category(&mc.category).is_valid());
                assert_eq!(mc.spans.len(), (0..4).filter(|e| e & c & d == *e).count());
            }
        }
        let p = parallel_rel();
        let mc = mapping_category(&p, o(&p, "x"), o(&p, "y"));
        assert_eq!(mc.category.morphism_count(), 2);
        let col = collapse_rel();
        let mc = mapping_category(&col, o(&col, "x"), o(&col, "y"));
        let names: Vec<String> = mc.spans.iter().map(|s| span_label(&col.base, s)).collect();
        assert_eq!(names, vec!["x <=0_x= 0 -0_y-> y", "x <=id_x= x -f-> y", "x <=id_x= x -g-> y"]);
        // Two non-identity arrows, both out of the span through 0.
        let declared: Vec<_> = mc.category.declared_morphisms().collect();
        assert_eq!(declared.len(), 2);
        assert!(declared.iter().all(|&f| mc.category.dom(f) == 0));
    }

    #[test]
    fn h_fibers_are_mapping_categories() {
        for (_, r) in all_fixtures() {
            let c = &r.base;
            for x in 0..c.object_count() {
                let h = build_h(&r, x);
                assert!(validate_category(&h.category).is_valid());
                assert!(h.projection(c).is_functor());
                let constant = identity_span(c, x);
                assert!(h.object_of(&constant).is_some());
                for d in 0..c.object_count() {
                    let mc = mapping_category(&r, x, d);
                    let (spans, arrows) = h.fiber(c, d);
                    assert_eq!(spans, mc.spans);
                    let mut expected: Vec<(usize, usize, MorId)> = (0..mc.category.morphism_count())
                        .map(|f| {
                            let name = mc.category.morphism_name(f);
                            let u = if mc.category.is_identity(f) {
                                c.identity(mc.spans[mc.category.dom(f)].apex)
                            } else {
                                c.morphism_id(name.split(':').next().unwrap()).unwrap()
                            };
                            (mc.category.dom(f), mc.category.cod(f), u)
                        })
                        .collect();
                    expected.sort();
                    assert_eq!(arrows, expected);
                }
            }
        }
    }

    #[test]
    fn lifts_are_universal() {
        for (_, r) in all_fixtures() {
            let c = &r.base;
            for x in 0..c.object_count() {
                let h = build_h(&r, x);
                let p = h.projection(c);
                for obj in 0..h.spans.len() {
                    let d = h.proj_objects[obj];
                    for &hm in c.out_arrows(d) {
                        let lift = cocartesian_lift(&r, &h, obj, hm).unwrap();
                        if c.is_identity(hm) {
                            assert!(h.category.is_identity(lift));
                        }
                        assert!(is_cocartesian(&p, lift));
                    }
                    for w in r.hypercovers().into_iter().filter(|&w| c.cod(w) == d) {
                        let lift = cartesian_lift(&r, &h, obj, w).unwrap();
                        if c.is_identity(w) {
                            assert!(h.category.is_identity(lift));
                        }
                        assert!(is_cartesian(&p, lift));
                    }
                }
            }
        }
    }

    #[test]
    fn cube_lift_examples() {
        let r = cube();
        let c = &r.base;
        let top = o(&r, "{1,2,3}");
        let h = build_h(&r, top);
        let x = h
            .object_of(&Span { apex: o(&r, "{1,2}"), left: m(&r, "{1,2}<={1,2,3}"), right: m(&r, "{1,2}<={1,2,3}") })
            .unwrap();
        // w: {1,2} ⊆ {1,2,3} is a hypercover; lifted apex = {1,2} ∩ {1,2}.
        let w = m(&r, "{1,2}<={1,2,3}");
        let lift = cartesian_lift(&r, &h, x, w).unwrap();
        let src = h.spans[h.category.dom(lift)];
        assert_eq!(c.object_name(src.apex), "{1,2}");
        let y = h
            .object_of(&Span { apex: o(&r, "{1,2}"), left: m(&r, "{1,2}<={1,2,3}"), right: c.identity(o(&r, "{1,2}")) })
            .unwrap();
        let lift = cocartesian_lift(&r, &h, y, m(&r, "{1,2}<={1,2,3}")).unwrap();
        let tgt = h.spans[h.category.cod(lift)];
        assert_eq!(c.morphism_name(tgt.right), "{1,2}<={1,2,3}");
    }
}
