//! Two-cells between spans: whiskering, coherence isomorphisms, the
//! adjunction for a hypercover and the Beck–Chevalley comparison.

use serde::Serialize;
use thiserror::Error;

use crate::fincat::{cones_over, is_pullback_cone, mediate, FinCategory, MorId, ObjId, PullbackCone};
use crate::relcat::RelativeCategory;
use crate::sigma::Span;
use crate::span::{compose_spans, identity_span, span_label, SpanError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BicatError {
    #[error("{morphism} is not a hypercover")]
    NotHypercover { morphism: String },
    #[error("the square does not commute")]
    NotCommuting,
    #[error("the square is not cartesian: {reason}")]
    NotCartesian { reason: String },
    #[error(transparent)]
    Span(#[from] SpanError),
}

/// An apex map between parallel spans commuting with both legs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TwoCell {
    pub from: Span,
    pub to: Span,
    pub apex_map: MorId,
}

impl TwoCell {
    pub fn identity(c: &FinCategory, s: Span) -> Self {
        Self {
            from: s,
            to: s,
            apex_map: c.identity(s.apex),
        }
    }

    pub fn is_valid(&self, c: &FinCategory) -> bool {
        let u = self.apex_map;
        c.dom(u) == self.from.apex
            && c.cod(u) == self.to.apex
            && c.compose(self.to.left, u) == Some(self.from.left)
            && c.compose(self.to.right, u) == Some(self.from.right)
    }

    pub fn is_identity(&self, c: &FinCategory) -> bool {
        self.from == self.to && c.is_identity(self.apex_map)
    }

    /// `next ∘ self`.
    pub fn then(&self, c: &FinCategory, next: &TwoCell) -> TwoCell {
        assert_eq!(self.to, next.from, "2-cells are not composable");
        TwoCell {
            from: self.from,
            to: next.to,
            apex_map: c.compose(next.apex_map, self.apex_map).unwrap(),
        }
    }

    pub fn inverse(&self, c: &FinCategory) -> Option<TwoCell> {
        c.inverse(self.apex_map).map(|u| TwoCell {
            from: self.to,
            to: self.from,
            apex_map: u,
        })
    }
}

fn composite_cone(r: &RelativeCategory, s1: &Span, s2: &Span) -> Result<PullbackCone, SpanError> {
    let c = &r.base;
    c.canonical_pullback(s2.left, s1.right).ok_or_else(|| SpanError::MissingPullback {
        hypercover: c.morphism_name(s2.left).into(),
        along: c.morphism_name(s1.right).into(),
    })
}

/// `α` followed by `t`: `t ∘ s ⇒ t ∘ s′`.
pub fn whisker_right(r: &RelativeCategory, alpha: &TwoCell, t: &Span) -> Result<TwoCell, SpanError> {
    let c = &r.base;
    let p = composite_cone(r, &alpha.from, t)?;
    let q = composite_cone(r, &alpha.to, t)?;
    let u = mediate(c, &q, (p.apex, p.leg1, c.compose(alpha.apex_map, p.leg2).unwrap())).expect("cone over the target pullback");
    Ok(TwoCell {
        from: compose_spans(r, &alpha.from, t)?,
        to: compose_spans(r, &alpha.to, t)?,
        apex_map: u,
    })
}

/// `s` followed by `β`: `t ∘ s ⇒ t′ ∘ s`.
pub fn whisker_left(r: &RelativeCategory, s: &Span, beta: &TwoCell) -> Result<TwoCell, SpanError> {
    let c = &r.base;
    let p = composite_cone(r, s, &beta.from)?;
    let q = composite_cone(r, s, &beta.to)?;
    let u = mediate(c, &q, (p.apex, c.compose(beta.apex_map, p.leg1).unwrap(), p.leg2)).expect("cone over the target pullback");
    Ok(TwoCell {
        from: compose_spans(r, s, &beta.from)?,
        to: compose_spans(r, s, &beta.to)?,
        apex_map: u,
    })
}

/// `(c ∘ b) ∘ a ⇒ c ∘ (b ∘ a)` as the unique mediating map.
pub fn associator(r: &RelativeCategory, a: &Span, b: &Span, s3: &Span) -> Result<TwoCell, SpanError> {
    let c = &r.base;
    let ab = composite_cone(r, a, b)?;
    let ab_span = compose_spans(r, a, b)?;
    let outer_l = composite_cone(r, &ab_span, s3)?;
    let bc = composite_cone(r, b, s3)?;
    let bc_span = compose_spans(r, b, s3)?;
    let outer_r = composite_cone(r, a, &bc_span)?;
    let (l1, l2) = (outer_l.leg1, outer_l.leg2);
    let x = mediate(c, &bc, (outer_l.apex, l1, c.compose(ab.leg1, l2).unwrap())).expect("cone over b and c");
    let u = mediate(c, &outer_r, (outer_l.apex, x, c.compose(ab.leg2, l2).unwrap())).expect("cone over a and bc");
    Ok(TwoCell {
        from: compose_spans(r, &ab_span, s3)?,
        to: compose_spans(r, a, &bc_span)?,
        apex_map: u,
    })
}

/// `s ∘ id ⇒ s`.
pub fn left_unitor(r: &RelativeCategory, s: &Span) -> Result<TwoCell, SpanError> {
    let c = &r.base;
    let id = identity_span(c, c.cod(s.left));
    let p = composite_cone(r, &id, s)?;
    Ok(TwoCell {
        from: compose_spans(r, &id, s)?,
        to: *s,
        apex_map: p.leg1,
    })
}

/// `id ∘ s ⇒ s`.
pub fn right_unitor(r: &RelativeCategory, s: &Span) -> Result<TwoCell, SpanError> {
    let c = &r.base;
    let id = identity_span(c, c.cod(s.right));
    let p = composite_cone(r, s, &id)?;
    Ok(TwoCell {
        from: compose_spans(r, s, &id)?,
        to: *s,
        apex_map: p.leg2,
    })
}

/// The span `d ⇐ d → c` of a morphism `f: d → c`.
pub fn forward_span(c: &FinCategory, f: MorId) -> Span {
    Span {
        apex: c.dom(f),
        left: c.identity(c.dom(f)),
        right: f,
    }
}

/// The span `c ⇐ d = d` of a hypercover `f: d → c`.
pub fn backward_span(c: &FinCategory, f: MorId) -> Span {
    Span {
        apex: c.dom(f),
        left: f,
        right: c.identity(c.dom(f)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdjunctionDatum {
    pub left: Span,
    pub right: Span,
    /// `id_d ⇒ right ∘ left`, through the diagonal.
    pub unit: TwoCell,
    /// `left ∘ right ⇒ id_c`, induced by `f`.
    pub counit: TwoCell,
}

pub fn adjunction_datum(r: &RelativeCategory, f: MorId) -> Result<AdjunctionDatum, BicatError> {
    let c = &r.base;
    if !r.is_hypercover(f) {
        return Err(BicatError::NotHypercover {
            morphism: c.morphism_name(f).into(),
        });
    }
    let (d, cod) = (c.dom(f), c.cod(f));
    let left = forward_span(c, f);
    let right = backward_span(c, f);
    let kernel = composite_cone(r, &left, &right)?;
    let diagonal = mediate(c, &kernel, (d, c.identity(d), c.identity(d))).expect("diagonal");
    let unit = TwoCell {
        from: identity_span(c, d),
        to: compose_spans(r, &left, &right)?,
        apex_map: diagonal,
    };
    let lr = compose_spans(r, &right, &left)?;
    let counit = TwoCell {
        from: lr,
        to: identity_span(c, cod),
        apex_map: lr.left,
    };
    Ok(AdjunctionDatum {
        left,
        right,
        unit,
        counit,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdjunctionWitness {
    pub hypercover: String,
    /// 1 for the triangle on the left adjoint, 2 for the right adjoint.
    pub triangle: u8,
    pub composite: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdjunctionReport {
    pub hypercover: String,
    pub left: String,
    pub right: String,
    pub holds: bool,
    pub witness: Option<AdjunctionWitness>,
}

/// Both triangle composites, transported along the coherence isomorphisms,
/// must be identity 2-cells.
pub fn adjunction_check(r: &RelativeCategory, f: MorId) -> Result<AdjunctionReport, BicatError> {
    let c = &r.base;
    let datum = adjunction_datum(r, f)?;
    let (l, rt) = (&datum.left, &datum.right);
    let inv = |cell: TwoCell| cell.inverse(c).expect("coherence maps are invertible");
    for cell in [&datum.unit, &datum.counit] {
        assert!(cell.is_valid(c), "unit or counit is not a 2-cell");
    }
    // Spans compose in diagrammatic order: l ≅ id;l ⇒ (l;r);l ≅ l;(r;l) ⇒ l;id ≅ l.
    let first = inv(left_unitor(r, l)?)
        .then(c, &whisker_right(r, &datum.unit, l)?)
        .then(c, &associator(r, l, rt, l)?)
        .then(c, &whisker_left(r, l, &datum.counit)?)
        .then(c, &right_unitor(r, l)?);
    let second = inv(right_unitor(r, rt)?)
        .then(c, &whisker_left(r, rt, &datum.unit)?)
        .then(c, &inv(associator(r, rt, l, rt)?))
        .then(c, &whisker_right(r, &datum.counit, rt)?)
        .then(c, &left_unitor(r, rt)?);
    let name = c.morphism_name(f).to_string();
    let witness = [(1u8, first), (2, second)]
        .into_iter()
        .find(|(_, cell)| !cell.is_identity(c))
        .map(|(triangle, cell)| AdjunctionWitness {
            hypercover: name.clone(),
            triangle,
            composite: c.morphism_name(cell.apex_map).into(),
        });
    Ok(AdjunctionReport {
        hypercover: name,
        left: span_label(c, l),
        right: span_label(c, rt),
        holds: witness.is_none(),
        witness,
    })
}

/// A commuting square `f ∘ g′ = g ∘ f′` with `f: e → c`, `g: d → c`,
/// `f′: d′ → d` and `g′: d′ → e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Square {
    pub f: MorId,
    pub g: MorId,
    pub f_prime: MorId,
    pub g_prime: MorId,
}

impl Square {
    pub fn commutes(&self, c: &FinCategory) -> bool {
        c.cod(self.f) == c.cod(self.g)
            && c.cod(self.g_prime) == c.dom(self.f)
            && c.cod(self.f_prime) == c.dom(self.g)
            && c.dom(self.f_prime) == c.dom(self.g_prime)
            && c.compose(self.f, self.g_prime) == c.compose(self.g, self.f_prime)
    }

    pub fn apex(&self, c: &FinCategory) -> ObjId {
        c.dom(self.f_prime)
    }

    pub fn is_cartesian(&self, c: &FinCategory) -> bool {
        is_pullback_cone(c, self.f, self.g, self.apex(c), self.g_prime, self.f_prime)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BeckChevalleyReport {
    pub source: String,
    pub target: String,
    pub comparison: String,
    pub holds: bool,
}

/// The 2-cell `g′ ∘ f′^⊥ ⇒ f^⊥ ∘ g` between spans `d → e`, whose apex map is
/// the comparison `d′ → d ×_c e`. Requires only a commuting square.
pub fn beck_chevalley_comparison(r: &RelativeCategory, sq: &Square) -> Result<(TwoCell, bool), BicatError> {
    let c = &r.base;
    for m in [sq.f, sq.f_prime] {
        if !r.is_hypercover(m) {
            return Err(BicatError::NotHypercover {
                morphism: c.morphism_name(m).into(),
            });
        }
    }
    if !sq.commutes(c) {
        return Err(BicatError::NotCommuting);
    }
    let top = compose_spans(r, &backward_span(c, sq.f_prime), &forward_span(c, sq.g_prime))?;
    let bottom = compose_spans(r, &forward_span(c, sq.g), &backward_span(c, sq.f))?;
    let x = composite_cone(r, &forward_span(c, sq.g), &backward_span(c, sq.f))?;
    let apex = sq.apex(c);
    // Legs of `top` may differ from (f′, g′) by the canonical identity pullback.
    let u = mediate(c, &x, (top.apex, top.right, top.left)).expect("commuting square gives a cone");
    let cell = TwoCell {
        from: top,
        to: bottom,
        apex_map: u,
    };
    debug_assert_eq!(top.apex, apex);
    Ok((cell, c.is_isomorphism(u)))
}

/// Verifies the square is cartesian, then reports whether the comparison is invertible.
pub fn beck_chevalley_check(r: &RelativeCategory, sq: &Square) -> Result<BeckChevalleyReport, BicatError> {
    let c = &r.base;
    if !sq.commutes(c) {
        return Err(BicatError::NotCommuting);
    }
    if !sq.is_cartesian(c) {
        return Err(BicatError::NotCartesian {
            reason: format!(
                "{} with {} and {} is not a pullback of {} and {}",
                c.object_name(sq.apex(c)),
                c.morphism_name(sq.g_prime),
                c.morphism_name(sq.f_prime),
                c.morphism_name(sq.f),
                c.morphism_name(sq.g)
            ),
        });
    }
    let (cell, iso) = beck_chevalley_comparison(r, sq)?;
    Ok(BeckChevalleyReport {
        source: span_label(c, &cell.from),
        target: span_label(c, &cell.to),
        comparison: c.morphism_name(cell.apex_map).into(),
        holds: iso,
    })
}

/// Every commuting square with `f ∈ W` and `f′ ∈ W`, cartesian or not.
pub fn hypercover_squares(r: &RelativeCategory) -> Vec<Square> {
    let c = &r.base;
    let mut out = Vec::new();
    for f in r.hypercovers() {
        for g in 0..c.morphism_count() {
            if c.cod(g) != c.cod(f) {
                continue;
            }
            for (_, g_prime, f_prime) in cones_over(c, f, g) {
                if r.is_hypercover(f_prime) {
                    out.push(Square { f, g, f_prime, g_prime });
                }
            }
        }
    }
    out
}
