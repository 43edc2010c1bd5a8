//! Relative categories `(C, W)` and the hypercover axioms.

use serde::Serialize;
use thiserror::Error;

use crate::fincat::{FinCategory, MorId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelCatError {
    #[error("unknown morphism {0:?} in hypercover list")]
    UnknownMorphism(String),
}

/// A finite category with a distinguished class `W`. Identities are always in `W`.
#[derive(Clone, Debug)]
pub struct RelativeCategory {
    pub base: FinCategory,
    in_w: Vec<bool>,
}

impl RelativeCategory {
    pub fn new(base: FinCategory, hypercovers: &[MorId]) -> Self {
        let mut in_w = vec![false; base.morphism_count()];
        for o in 0..base.object_count() {
            in_w[base.identity(o)] = true;
        }
        for &w in hypercovers {
            in_w[w] = true;
        }
        Self { base, in_w }
    }

    pub fn from_names<S: AsRef<str>>(base: FinCategory, names: &[S]) -> Result<Self, RelCatError> {
        let ids = names
            .iter()
            .map(|n| {
                base.morphism_id(n.as_ref())
                    .ok_or_else(|| RelCatError::UnknownMorphism(n.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(base, &ids))
    }

    /// `W` = isomorphisms only.
    pub fn minimal(base: FinCategory) -> Self {
        let isos: Vec<MorId> = (0..base.morphism_count()).filter(|&f| base.is_isomorphism(f)).collect();
        Self::new(base, &isos)
    }

    /// `W` = every morphism.
    pub fn maximal(base: FinCategory) -> Self {
        let all: Vec<MorId> = (0..base.morphism_count()).collect();
        Self::new(base, &all)
    }

    pub fn is_hypercover(&self, f: MorId) -> bool {
        self.in_w[f]
    }

    /// Members of `W` in morphism order, identities included.
    pub fn hypercovers(&self) -> Vec<MorId> {
        (0..self.in_w.len()).filter(|&f| self.in_w[f]).collect()
    }

    /// Non-identity members of `W`, by name.
    pub fn hypercover_names(&self) -> Vec<String> {
        self.base
            .declared_morphisms()
            .filter(|&f| self.in_w[f])
            .map(|f| self.base.morphism_name(f).to_string())
            .collect()
    }

    pub fn with_hypercovers(&self, w: &[MorId]) -> Self {
        Self::new(self.base.clone(), w)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "clause", rename_all = "snake_case")]
pub enum HypercoverViolation {
    MissingIso {
        morphism: String,
    },
    NotClosedUnderComposition {
        after: String,
        then: String,
        composite: String,
    },
    MissingPullback {
        hypercover: String,
        along: String,
    },
    ProjectionNotInW {
        hypercover: String,
        along: String,
        projection: String,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct HypercoverReport {
    pub violations: Vec<HypercoverViolation>,
}

impl HypercoverReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Exhaustive scan of the three hypercover clauses. Assumes the base category is valid.
pub fn validate_hypercovers(r: &RelativeCategory) -> HypercoverReport {
    let c = &r.base;
    let name = |f: MorId| c.morphism_name(f).to_string();
    let mut violations = Vec::new();
    for f in 0..c.morphism_count() {
        if c.is_isomorphism(f) && !r.is_hypercover(f) {
            violations.push(HypercoverViolation::MissingIso { morphism: name(f) });
        }
    }
    let w = r.hypercovers();
    for &f in &w {
        for &g in &w {
            if let Some(h) = c.compose(g, f) {
                if !r.is_hypercover(h) {
                    violations.push(HypercoverViolation::NotClosedUnderComposition {
                        after: name(g),
                        then: name(f),
                        composite: name(h),
                    });
                }
            }
        }
    }
    for &hw in &w {
        for f in 0..c.morphism_count() {
            if c.cod(f) != c.cod(hw) {
                continue;
            }
            match c.canonical_pullback(hw, f) {
                None => violations.push(HypercoverViolation::MissingPullback {
                    hypercover: name(hw),
                    along: name(f),
                }),
                Some(cone) if !r.is_hypercover(cone.leg2) => {
                    violations.push(HypercoverViolation::ProjectionNotInW {
                        hypercover: name(hw),
                        along: name(f),
                        projection: name(cone.leg2),
                    })
                }
                Some(_) => {}
            }
        }
    }
    HypercoverReport { violations }
}

/// Smallest superset of `W` closed under 2-out-of-3, as a sorted morphism list.
pub fn two_out_of_three_closure(r: &RelativeCategory) -> Vec<MorId> {
    let c = &r.base;
    let mut in_w: Vec<bool> = (0..c.morphism_count()).map(|f| r.is_hypercover(f)).collect();
    loop {
        let mut changed = false;
        for f in 0..c.morphism_count() {
            for &g in c.out_arrows(c.cod(f)).collect::<Vec<_>>() {
                let h = c.compose(g, f).expect("composable");
                let count = [f, g, h].iter().filter(|&&x| in_w[x]).count();
                if count == 2 {
                    for x in [f, g, h] {
                        in_w[x] = true;
                    }
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    (0..in_w.len()).filter(|&f| in_w[f]).collect()
}
