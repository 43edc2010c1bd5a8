//! The marked posets Σₙ, their simplicial functoriality, and span diagrams
//! `Σₙ → C` built by iterated pullback.
//!
//! Elements of Σₙ are pairs `(i, j)` with `0 ≤ i ≤ j ≤ n`, listed
//! lexicographically. A diagram is stored by its generating arrows
//! `down(i,j): (i,j) → (i,j−1)` (marked) and `right(i,j): (i,j) → (i+1,j)`.

use serde::Serialize;
use thiserror::Error;

use crate::fincat::{mediating_morphisms, CategoryBuilder, FinCategory, MorId, ObjId};
use crate::relcat::RelativeCategory;

pub type Elem = (usize, usize);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SigmaError {
    #[error("map {values:?} is not monotone into [{target}]")]
    NonMonotone { values: Vec<usize>, target: usize },
    #[error("no pullback of {hypercover} along {along}")]
    MissingPullback { hypercover: String, along: String },
    #[error("left leg {morphism} of span {index} is not a hypercover")]
    NotRelative { index: usize, morphism: String },
    #[error("malformed chain of spans at position {index}")]
    MalformedChain { index: usize },
}

pub fn element_count(n: usize) -> usize {
    (n + 1) * (n + 2) / 2
}

/// Position of `(i, j)` in the lexicographic listing of Σₙ.
pub fn elem_index(n: usize, (i, j): Elem) -> usize {
    debug_assert!(i <= j && j <= n);
    // Row r holds n + 1 - r elements.
    i * (n + 1) - i * i.saturating_sub(1) / 2 + (j - i)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SigmaPoset {
    pub n: usize,
    pub elements: Vec<Elem>,
    /// Generating marked edges `(i,j) → (i,j−1)`.
    pub marked: Vec<(Elem, Elem)>,
    /// Generating unmarked edges `(i,j) → (i+1,j)`.
    pub unmarked: Vec<(Elem, Elem)>,
}

impl SigmaPoset {
    pub fn leq(a: Elem, b: Elem) -> bool {
        a.0 <= b.0 && a.1 >= b.1
    }

    /// Every relation `a ≤ b` with `a ≠ b`, marked or not.
    pub fn relations(&self) -> Vec<(Elem, Elem, bool)> {
        let mut out = Vec::new();
        for &a in &self.elements {
            for &b in &self.elements {
                if a != b && Self::leq(a, b) {
                    out.push((a, b, a.0 == b.0));
                }
            }
        }
        out
    }

    pub fn index(&self, e: Elem) -> usize {
        elem_index(self.n, e)
    }

    /// Σₙ as a finite category (a thin category with one arrow per relation).
    pub fn to_category(&self) -> FinCategory {
        let mut b = CategoryBuilder::new();
        for &(i, j) in &self.elements {
            b.object(format!("({i},{j})"));
        }
        let rel = self.relations();
        let mut refs = std::collections::HashMap::new();
        for &(a, c, _) in &rel {
            let r = b.morphism(
                format!("({},{})<=({},{})", a.0, a.1, c.0, c.1),
                self.index(a),
                self.index(c),
            );
            refs.insert((a, c), r);
        }
        for &(a, c, _) in &rel {
            for &(c2, d, _) in &rel {
                if c2 == c {
                    b.composite(refs[&(c, d)], refs[&(a, c)], refs[&(a, d)]);
                }
            }
        }
        b.build()
    }
}

pub fn build_sigma(n: usize) -> SigmaPoset {
    let mut elements = Vec::with_capacity(element_count(n));
    for i in 0..=n {
        for j in i..=n {
            elements.push((i, j));
        }
    }
    let marked = elements.iter().filter(|e| e.1 > e.0).map(|&(i, j)| ((i, j), (i, j - 1))).collect();
    let unmarked = elements.iter().filter(|e| e.1 > e.0).map(|&(i, j)| ((i, j), (i + 1, j))).collect();
    SigmaPoset {
        n,
        elements,
        marked,
        unmarked,
    }
}

/// The width-≤1 part Λₙ of Σₙ.
pub fn lambda_subposet(n: usize) -> Vec<Elem> {
    build_sigma(n).elements.into_iter().filter(|&(i, j)| j - i <= 1).collect()
}

/// A monotone map `[m] → [n]`, stored by its values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Monotone {
    pub values: Vec<usize>,
    pub target: usize,
}

impl Monotone {
    pub fn new(values: Vec<usize>, target: usize) -> Result<Self, SigmaError> {
        let ok = !values.is_empty()
            && values.windows(2).all(|w| w[0] <= w[1])
            && values.iter().all(|&v| v <= target);
        if ok {
            Ok(Self { values, target })
        } else {
            Err(SigmaError::NonMonotone { values, target })
        }
    }

    pub fn source(&self) -> usize {
        self.values.len() - 1
    }

    pub fn identity(n: usize) -> Self {
        Self {
            values: (0..=n).collect(),
            target: n,
        }
    }

    /// The coface `[n−1] → [n]` skipping `k`.
    pub fn face(n: usize, k: usize) -> Self {
        assert!(n >= 1 && k <= n);
        Self {
            values: (0..n).map(|i| if i < k { i } else { i + 1 }).collect(),
            target: n,
        }
    }

    /// The codegeneracy `[n+1] → [n]` hitting `k` twice.
    pub fn degeneracy(n: usize, k: usize) -> Self {
        assert!(k <= n);
        Self {
            values: (0..=n + 1).map(|i| if i <= k { i } else { i - 1 }).collect(),
            target: n,
        }
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &Monotone) -> Monotone {
        assert_eq!(first.target, self.source());
        Monotone {
            values: first.values.iter().map(|&v| self.values[v]).collect(),
            target: self.target,
        }
    }

    pub fn apply(&self, i: usize) -> usize {
        self.values[i]
    }

    /// All monotone maps `[m] → [n]`, lexicographically.
    pub fn all(m: usize, n: usize) -> Vec<Monotone> {
        fn rec(m: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Monotone>) {
            if cur.len() == m + 1 {
                out.push(Monotone { values: cur.clone(), target: n });
                return;
            }
            let lo = cur.last().copied().unwrap_or(0);
            for v in lo..=n {
                cur.push(v);
                rec(m, n, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(m, n, &mut Vec::new(), &mut out);
        out
    }
}

/// The induced poset map Σ_m → Σ_n, `(i,j) ↦ (α i, α j)`, as an element table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SigmaMap {
    pub source: usize,
    pub target: usize,
    pub images: Vec<Elem>,
}

impl SigmaMap {
    pub fn apply(&self, e: Elem) -> Elem {
        self.images[elem_index(self.source, e)]
    }

    pub fn after(&self, first: &SigmaMap) -> SigmaMap {
        SigmaMap {
            source: first.source,
            target: self.target,
            images: first.images.iter().map(|&e| self.apply(e)).collect(),
        }
    }

    /// Order and marking preserved on every relation of the source.
    pub fn preserves_structure(&self) -> bool {
        build_sigma(self.source).relations().into_iter().all(|(a, b, marked)| {
            let (fa, fb) = (self.apply(a), self.apply(b));
            SigmaPoset::leq(fa, fb) && (!marked || fa.0 == fb.0)
        })
    }
}

pub fn sigma_map(alpha: &Monotone) -> SigmaMap {
    let m = alpha.source();
    SigmaMap {
        source: m,
        target: alpha.target,
        images: build_sigma(m)
            .elements
            .iter()
            .map(|&(i, j)| (alpha.apply(i), alpha.apply(j)))
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// Diagrams

/// A span `c ⇐ apex → d`; `left` is the (hypercover) leg.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Span {
    pub apex: ObjId,
    pub left: MorId,
    pub right: MorId,
}

/// Values on Λₙ: vertices `c₀ … cₙ` and the spans `cₖ ⇐ F(k,k+1) → cₖ₊₁`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct LambdaAssignment {
    pub vertices: Vec<ObjId>,
    pub spans: Vec<Span>,
}

impl LambdaAssignment {
    pub fn n(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn check_shape(&self, c: &FinCategory) -> Result<(), SigmaError> {
        if self.spans.len() + 1 != self.vertices.len() {
            return Err(SigmaError::MalformedChain { index: self.spans.len() });
        }
        for (k, s) in self.spans.iter().enumerate() {
            let ok = c.dom(s.left) == s.apex
                && c.dom(s.right) == s.apex
                && c.cod(s.left) == self.vertices[k]
                && c.cod(s.right) == self.vertices[k + 1];
            if !ok {
                return Err(SigmaError::MalformedChain { index: k });
            }
        }
        Ok(())
    }
}

/// A functor Σₙ → C given by objects and generating arrows.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SpanDiagram {
    pub n: usize,
    pub objects: Vec<ObjId>,
    /// `down[(i,j)]: F(i,j) → F(i,j−1)` for `i < j`.
    pub down: Vec<Option<MorId>>,
    /// `right[(i,j)]: F(i,j) → F(i+1,j)` for `i < j`.
    pub right: Vec<Option<MorId>>,
}

impl SpanDiagram {
    fn empty(n: usize) -> Self {
        let e = element_count(n);
        Self {
            n,
            objects: vec![0; e],
            down: vec![None; e],
            right: vec![None; e],
        }
    }

    pub fn object(&self, e: Elem) -> ObjId {
        self.objects[elem_index(self.n, e)]
    }

    pub fn down(&self, e: Elem) -> MorId {
        self.down[elem_index(self.n, e)].expect("off-diagonal element")
    }

    pub fn right(&self, e: Elem) -> MorId {
        self.right[elem_index(self.n, e)].expect("off-diagonal element")
    }

    /// `F(a → b)` for `a ≤ b`: first down to `(a.0, b.1)`, then right.
    pub fn arrow(&self, c: &FinCategory, a: Elem, b: Elem) -> Option<MorId> {
        if !SigmaPoset::leq(a, b) {
            return None;
        }
        let mut f = c.identity(self.object(a));
        let (i, mut j) = a;
        while j > b.1 {
            f = c.compose(self.down((i, j)), f)?;
            j -= 1;
        }
        let mut i = i;
        while i < b.0 {
            f = c.compose(self.right((i, j)), f)?;
            i += 1;
        }
        Some(f)
    }

    /// Types of generators are right and every unit square commutes.
    pub fn is_functor(&self, c: &FinCategory) -> bool {
        let n = self.n;
        let typed = build_sigma(n).elements.iter().filter(|e| e.1 > e.0).all(|&(i, j)| {
            let (d, r) = (self.down((i, j)), self.right((i, j)));
            c.dom(d) == self.object((i, j))
                && c.cod(d) == self.object((i, j - 1))
                && c.dom(r) == self.object((i, j))
                && c.cod(r) == self.object((i + 1, j))
        });
        typed
            && build_sigma(n).elements.iter().filter(|e| e.1 >= e.0 + 2).all(|&(i, j)| {
                c.compose(self.down((i + 1, j)), self.right((i, j)))
                    == c.compose(self.right((i, j - 1)), self.down((i, j)))
            })
    }

    /// Every marked edge lands in `W` (enough to check the generators).
    pub fn is_relative(&self, r: &RelativeCategory) -> bool {
        self.down.iter().flatten().all(|&d| r.is_hypercover(d))
    }

    pub fn restrict_lambda(&self) -> LambdaAssignment {
        LambdaAssignment {
            vertices: (0..=self.n).map(|k| self.object((k, k))).collect(),
            spans: (0..self.n)
                .map(|k| Span {
                    apex: self.object((k, k + 1)),
                    left: self.down((k, k + 1)),
                    right: self.right((k, k + 1)),
                })
                .collect(),
        }
    }

    /// Restriction along `sigma_map(α)`.
    pub fn precompose(&self, c: &FinCategory, alpha: &Monotone) -> SpanDiagram {
        assert_eq!(alpha.target, self.n);
        let m = alpha.source();
        let a = |k: usize| alpha.apply(k);
        let mut out = SpanDiagram::empty(m);
        for (idx, &(i, j)) in build_sigma(m).elements.iter().enumerate() {
            out.objects[idx] = self.object((a(i), a(j)));
            if j > i {
                out.down[idx] = self.arrow(c, (a(i), a(j)), (a(i), a(j - 1)));
                out.right[idx] = self.arrow(c, (a(i), a(j)), (a(i + 1), a(j)));
            }
        }
        out
    }

    /// The degenerate diagram `F(i,j) = cᵢ` with identity marked edges.
    pub fn from_chain(c: &FinCategory, start: ObjId, chain: &[MorId]) -> SpanDiagram {
        let n = chain.len();
        let mut vertices = vec![start];
        for &f in chain {
            vertices.push(c.cod(f));
        }
        let mut out = SpanDiagram::empty(n);
        for (idx, &(i, j)) in build_sigma(n).elements.iter().enumerate() {
            out.objects[idx] = vertices[i];
            if j > i {
                out.down[idx] = Some(c.identity(vertices[i]));
                out.right[idx] = Some(chain[i]);
            }
        }
        out
    }

    /// Reads a diagram off a functor from `build_sigma(n).to_category()`.
    pub fn from_functor(n: usize, objects: &[ObjId], morphisms: &[MorId], sigma_cat: &FinCategory) -> Self {
        let mut out = SpanDiagram::empty(n);
        let name = |a: Elem, b: Elem| format!("({},{})<=({},{})", a.0, a.1, b.0, b.1);
        for (idx, &(i, j)) in build_sigma(n).elements.iter().enumerate() {
            out.objects[idx] = objects[idx];
            if j > i {
                out.down[idx] = Some(morphisms[sigma_cat.morphism_id(&name((i, j), (i, j - 1))).unwrap()]);
                out.right[idx] = Some(morphisms[sigma_cat.morphism_id(&name((i, j), (i + 1, j))).unwrap()]);
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FillOrder {
    /// `F(i,j) = F(i,j−1) ×_{F(i+1,j−1)} F(i+1,j)`, by increasing `j − i`.
    Squares,
    /// `F(i,j) = F(i,i+1) ×_{F(i+1,i+1)} F(i+1,j)`.
    Hook,
}

fn missing(c: &FinCategory, w: MorId, f: MorId) -> SigmaError {
    SigmaError::MissingPullback {
        hypercover: c.morphism_name(w).into(),
        along: c.morphism_name(f).into(),
    }
}

/// Iterated canonical pullbacks on the base category, ignoring `W`.
pub fn kan_extend(c: &FinCategory, partial: &LambdaAssignment, order: FillOrder) -> Result<SpanDiagram, SigmaError> {
    partial.check_shape(c)?;
    let n = partial.n();
    let mut out = SpanDiagram::empty(n);
    for k in 0..=n {
        out.objects[elem_index(n, (k, k))] = partial.vertices[k];
    }
    for (k, s) in partial.spans.iter().enumerate() {
        let idx = elem_index(n, (k, k + 1));
        out.objects[idx] = s.apex;
        out.down[idx] = Some(s.left);
        out.right[idx] = Some(s.right);
    }
    // For the hook order, the composite marked leg F(i,j) → F(i,i+1).
    let mut hook_leg = vec![None; element_count(n)];
    for k in 0..n {
        hook_leg[elem_index(n, (k, k + 1))] = Some(c.identity(partial.spans[k].apex));
    }
    for d in 2..=n {
        for i in 0..=n - d {
            let j = i + d;
            let idx = elem_index(n, (i, j));
            match order {
                FillOrder::Squares => {
                    let w = out.down((i + 1, j));
                    let f = out.right((i, j - 1));
                    let cone = c.canonical_pullback(w, f).ok_or_else(|| missing(c, w, f))?;
                    out.objects[idx] = cone.apex;
                    out.right[idx] = Some(cone.leg1);
                    out.down[idx] = Some(cone.leg2);
                }
                FillOrder::Hook => {
                    let w = hook_leg[elem_index(n, (i + 1, j))]
                        .map(|h| c.compose(out.down((i + 1, i + 2)), h).expect("composable"))
                        .expect("filled");
                    let f = out.right((i, i + 1));
                    let cone = c.canonical_pullback(w, f).ok_or_else(|| missing(c, w, f))?;
                    out.objects[idx] = cone.apex;
                    out.right[idx] = Some(cone.leg1);
                    hook_leg[idx] = Some(cone.leg2);
                    // The marked generator is the mediating map into F(i,j−1).
                    let prev = elem_index(n, (i, j - 1));
                    let test_b = c.compose(out.down((i + 1, j)), cone.leg1).expect("composable");
                    let down = if j - 1 == i + 1 {
                        cone.leg2
                    } else {
                        let found = mediating_morphisms(
                            c,
                            out.objects[prev],
                            hook_leg[prev].unwrap(),
                            out.right[prev].unwrap(),
                            (cone.apex, cone.leg2, test_b),
                        );
                        *found.first().ok_or_else(|| missing(c, w, f))?
                    };
                    out.down[idx] = Some(down);
                }
            }
        }
    }
    Ok(out)
}

/// Canonical extension of a relative Λₙ assignment.
pub fn right_kan_extend(r: &RelativeCategory, partial: &LambdaAssignment) -> Result<SpanDiagram, SigmaError> {
    for (k, s) in partial.spans.iter().enumerate() {
        if !r.is_hypercover(s.left) {
            return Err(SigmaError::NotRelative {
                index: k,
                morphism: r.base.morphism_name(s.left).into(),
            });
        }
    }
    kan_extend(&r.base, partial, FillOrder::Squares)
}

/// The square at `i < i' ≤ j' < j` is a pullback.
pub fn square_is_cartesian(c: &FinCategory, f: &SpanDiagram, (i, ip, jp, j): (usize, usize, usize, usize)) -> bool {
    let (Some(a), Some(b), Some(l1), Some(l2)) = (
        f.arrow(c, (i, jp), (ip, jp)),
        f.arrow(c, (ip, j), (ip, jp)),
        f.arrow(c, (i, j), (i, jp)),
        f.arrow(c, (i, j), (ip, j)),
    ) else {
        return false;
    };
    crate::fincat::is_pullback_cone(c, a, b, f.object((i, j)), l1, l2)
}

/// Natural isomorphism `src ⇒ dst` that is the identity over Λₙ, if one
/// exists. `dst` must have cartesian inner squares.
pub fn iso_over_lambda(c: &FinCategory, src: &SpanDiagram, dst: &SpanDiagram) -> Option<Vec<MorId>> {
    if src.n != dst.n || src.restrict_lambda() != dst.restrict_lambda() {
        return None;
    }
    let n = src.n;
    let mut comp = vec![0; element_count(n)];
    for &(i, j) in &lambda_subposet(n) {
        comp[elem_index(n, (i, j))] = c.identity(src.object((i, j)));
    }
    for d in 2..=n {
        for i in 0..=n - d {
            let j = i + d;
            let to_left = c.compose(comp[elem_index(n, (i, j - 1))], src.down((i, j)))?;
            let to_right = c.compose(comp[elem_index(n, (i + 1, j))], src.right((i, j)))?;
            let found = mediating_morphisms(
                c,
                dst.object((i, j)),
                dst.down((i, j)),
                dst.right((i, j)),
                (src.object((i, j)), to_left, to_right),
            );
            match found.as_slice() {
                [m] if c.is_isomorphism(*m) => comp[elem_index(n, (i, j))] = *m,
                _ => return None,
            }
        }
    }
    Some(comp)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DiagramConditions {
    pub cond_all_squares: bool,
    pub cond_inner_squares: bool,
    pub cond_rke: bool,
}

impl DiagramConditions {
    pub fn agree(&self) -> bool {
        self.cond_all_squares == self.cond_inner_squares && self.cond_inner_squares == self.cond_rke
    }
}

/// The three equivalent pullback conditions, each evaluated independently.
pub fn check_diagram_conditions(c: &FinCategory, f: &SpanDiagram) -> DiagramConditions {
    let n = f.n;
    let mut all = true;
    let mut inner = true;
    for i in 0..=n {
        for ip in i + 1..=n {
            for jp in ip..=n {
                for j in jp + 1..=n {
                    let ok = square_is_cartesian(c, f, (i, ip, jp, j));
                    all &= ok;
                    if ip == i + 1 && jp == j - 1 {
                        inner &= ok;
                    }
                }
            }
        }
    }
    let rke = kan_extend(c, &f.restrict_lambda(), FillOrder::Squares)
        .ok()
        .is_some_and(|g| iso_over_lambda(c, f, &g).is_some());
    DiagramConditions {
        cond_all_squares: all,
        cond_inner_squares: inner,
        cond_rke: rke,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::enumerate_functors;
    use crate::fincat::tests::{collapse, poset_of_subsets};
    use crate::relcat::tests::{collapse_rel, cube, meet};

    fn m(c: &FinCategory, name: &str) -> MorId {
        c.morphism_id(name).unwrap()
    }

    #[test]
    fn element_indexing_is_lexicographic() {
        for n in 0..6 {
            for (k, &e) in build_sigma(n).elements.iter().enumerate() {
                assert_eq!(elem_index(n, e), k);
            }
        }
    }

    #[test]
    fn small_sigmas() {
        let s0 = build_sigma(0);
        assert_eq!(s0.elements, vec![(0, 0)]);
        assert!(s0.relations().is_empty());
        let s1 = build_sigma(1);
        assert_eq!(s1.elements.len(), 3);
        assert!(s1.relations().contains(&((0, 1), (0, 0), true)));
        assert!(s1.relations().contains(&((0, 1), (1, 1), false)));
        let s2 = build_sigma(2);
        assert_eq!(s2.elements.len(), 6);
        // Squares are 4-element intervals [a, b] with a < b not in a chain.
        let squares: Vec<_> = s2
            .elements
            .iter()
            .flat_map(|&a| s2.elements.iter().map(move |&b| (a, b)))
            .filter(|&(a, b)| a.0 < b.0 && a.1 > b.1)
            .collect();
        assert_eq!(squares, vec![((0, 2), (1, 1))]);
    }

    #[test]
    fn sigma_counts_and_order() {
        for n in 0..5 {
            let s = build_sigma(n);
            assert_eq!(s.elements.len(), (n + 1) * (n + 2) / 2);
            assert_eq!(lambda_subposet(n).len(), 2 * n + 1);
            let cat = s.to_category();
            assert!(crate::fincat::validate_category(&cat).is_valid());
            for (a, b, marked) in s.relations() {
                for (b2, c, marked2) in s.relations() {
                    if b2 == b && marked && marked2 {
                        assert!(s.relations().contains(&(a, c, true)));
                    }
                }
            }
        }
        assert_eq!(lambda_subposet(0), vec![(0, 0)]);
    }

    #[test]
    fn sigma_map_examples() {
        let id = sigma_map(&Monotone::identity(2));
        assert_eq!(id.images, build_sigma(2).elements);
        let d1 = sigma_map(&Monotone::face(2, 1));
        assert_eq!(d1.images, vec![(0, 0), (0, 2), (2, 2)]);
        let s0 = sigma_map(&Monotone::degeneracy(0, 0));
        assert_eq!(s0.images, vec![(0, 0); 3]);
        assert!(matches!(Monotone::new(vec![1, 0], 2), Err(SigmaError::NonMonotone { .. })));
    }

    #[test]
    fn sigma_map_is_functorial() {
        for m in 0..3 {
            for n in 0..3 {
                for p in 0..3 {
                    for a in Monotone::all(m, n) {
                        assert!(sigma_map(&a).preserves_structure());
                        for b in Monotone::all(n, p) {
                            assert_eq!(sigma_map(&b.after(&a)), sigma_map(&b).after(&sigma_map(&a)));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn level_one_extension_is_the_input() {
        let r = meet();
        let c = &r.base;
        let s = Span { apex: 1, left: m(c, "{1}<={1,2}"), right: m(c, "{1}<={1,2}") };
        let partial = LambdaAssignment { vertices: vec![3, 3], spans: vec![s] };
        let f = right_kan_extend(&r, &partial).unwrap();
        assert_eq!(f.restrict_lambda(), partial);
    }

    #[test]
    fn cube_two_level_extension() {
        let r = cube();
        let c = &r.base;
        let o = |s: &str| c.object_id(s).unwrap();
        let partial = LambdaAssignment {
            vertices: vec![o("{1,2,3}"), o("{1,2}"), o("{1,3}")],
            spans: vec![
                Span { apex: o("{1,2}"), left: m(c, "{1,2}<={1,2,3}"), right: c.identity(o("{1,2}")) },
                Span { apex: o("{1}"), left: m(c, "{1}<={1,2}"), right: m(c, "{1}<={1,3}") },
            ],
        };
        // {1} ⊆ {1,2} is not a hypercover in the cube, so the relative version refuses.
        assert!(matches!(right_kan_extend(&r, &partial), Err(SigmaError::NotRelative { index: 1, .. })));
        let f = kan_extend(c, &partial, FillOrder::Squares).unwrap();
        assert_eq!(c.object_name(f.object((0, 2))), "{1}");
        assert!(check_diagram_conditions(c, &f).cond_all_squares);
    }

    #[test]
    fn collapse_two_level_extension() {
        let r = collapse_rel();
        let c = &r.base;
        let partial = LambdaAssignment {
            vertices: vec![1, 2, 1],
            spans: vec![
                Span { apex: 0, left: m(c, "0_x"), right: m(c, "0_y") },
                Span { apex: 0, left: m(c, "0_y"), right: m(c, "0_x") },
            ],
        };
        let f = right_kan_extend(&r, &partial).unwrap();
        assert_eq!(c.object_name(f.object((0, 2))), "0");
        assert!(f.is_functor(c) && f.is_relative(&r));
    }

    #[test]
    fn degenerate_diagram_meets_all_conditions() {
        let c = poset_of_subsets(2);
        let chain = [m(&c, "{}<={1}"), m(&c, "{1}<={1,2}")];
        let f = SpanDiagram::from_chain(&c, 0, &chain);
        let conds = check_diagram_conditions(&c, &f);
        assert!(conds.cond_all_squares && conds.cond_inner_squares && conds.cond_rke);
    }

    #[test]
    fn corrupted_apex_fails_all_conditions() {
        // Both legs {1,2} ⇐ {1,2} → {1,2}; pullback apex should be {1,2} but is {}.
        let c = poset_of_subsets(2);
        let top = 3;
        let partial = LambdaAssignment {
            vertices: vec![top; 3],
            spans: vec![Span { apex: top, left: c.identity(top), right: c.identity(top) }; 2],
        };
        let mut f = kan_extend(&c, &partial, FillOrder::Squares).unwrap();
        let idx = elem_index(2, (0, 2));
        f.objects[idx] = 0;
        f.down[idx] = Some(m(&c, "{}<={1,2}"));
        f.right[idx] = Some(m(&c, "{}<={1,2}"));
        assert!(f.is_functor(&c));
        let conds = check_diagram_conditions(&c, &f);
        assert_eq!(conds, DiagramConditions { cond_all_squares: false, cond_inner_squares: false, cond_rke: false });
    }

    #[test]
    fn conditions_agree_on_all_functors_into_collapse() {
        let c = collapse();
        for n in 2..=3 {
            let s = build_sigma(n).to_category();
            for func in enumerate_functors(&s, &c, u64::MAX).unwrap() {
                let f = SpanDiagram::from_functor(n, &func.objects, &func.morphisms, &s);
                assert!(f.is_functor(&c));
                assert!(check_diagram_conditions(&c, &f).agree(), "{f:?}");
            }
        }
    }

    #[test]
    fn fill_orders_agree_up_to_iso() {
        let r = cube();
        let c = &r.base;
        let spans: Vec<Span> = (0..c.object_count())
            .flat_map(|a| {
                r.hypercovers().into_iter().filter(move |&w| c.dom(w) == a).flat_map(move |w| {
                    c.out_arrows(a).map(move |&f| Span { apex: a, left: w, right: f })
                })
            })
            .collect();
        for s1 in &spans {
            for s2 in spans.iter().filter(|s2| c.cod(s2.left) == c.cod(s1.right)) {
                for s3 in spans.iter().filter(|s3| c.cod(s3.left) == c.cod(s2.right)) {
                    let partial = LambdaAssignment {
                        vertices: vec![c.cod(s1.left), c.cod(s1.right), c.cod(s2.right), c.cod(s3.right)],
                        spans: vec![*s1, *s2, *s3],
                    };
                    let a = kan_extend(c, &partial, FillOrder::Squares).unwrap();
                    let b = kan_extend(c, &partial, FillOrder::Hook).unwrap();
                    assert!(b.is_functor(c));
                    assert!(iso_over_lambda(c, &b, &a).is_some());
                    assert!(iso_over_lambda(c, &a, &b).is_some());
                }
            }
        }
    }
}
