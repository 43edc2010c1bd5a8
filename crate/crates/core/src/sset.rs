//! Simplicial sets stored up to a dimension bound: nerves, horn lifting,
//! categories of elements, W-locality of left fibrations, π₀ and π₁.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fincat::{category_from_arrows, FinCategory, MorId, ObjId};
use crate::relcat::RelativeCategory;
use crate::sigma::Monotone;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SSetError {
    #[error("dimension bound {dim} is below the required {required}")]
    DimensionBoundTooLow { dim: usize, required: usize },
    #[error("assignment is not a functor: {0}")]
    NotAFunctor(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedSimplicialSet {
    pub dim: usize,
    pub labels: Vec<Vec<String>>,
    /// `faces[k][x][i] = dᵢ x` for `k ≥ 1`.
    pub faces: Vec<Vec<Vec<usize>>>,
    /// `degeneracies[k][x][i] = sᵢ x` for `k < dim`.
    pub degeneracies: Vec<Vec<Vec<usize>>>,
}

impl TruncatedSimplicialSet {
    pub fn count(&self, k: usize) -> usize {
        self.labels[k].len()
    }

    pub fn face(&self, k: usize, x: usize, i: usize) -> usize {
        self.faces[k][x][i]
    }

    /// Vertex `v` of a `k`-simplex, by repeatedly dropping the other vertices.
    pub fn vertex(&self, k: usize, mut x: usize, v: usize) -> usize {
        let mut idx = v;
        for level in (1..=k).rev() {
            // Drop the last vertex unless it is the one we keep.
            if idx < level {
                x = self.faces[level][x][level];
            } else {
                x = self.faces[level][x][0];
                idx -= 1;
            }
        }
        x
    }

    /// The simplicial identities on every stored simplex.
    pub fn check_identities(&self) -> Result<(), String> {
        let d = |k: usize, x: usize, i: usize| self.faces[k][x][i];
        let s = |k: usize, x: usize, i: usize| self.degeneracies[k][x][i];
        for k in 2..=self.dim {
            for x in 0..self.count(k) {
                for j in 1..=k {
                    for i in 0..j {
                        if d(k - 1, d(k, x, j), i) != d(k - 1, d(k, x, i), j - 1) {
                            return Err(format!("d{i} d{j} on {}", self.labels[k][x]));
                        }
                    }
                }
            }
        }
        for k in 0..self.dim {
            for x in 0..self.count(k) {
                for i in 0..=k {
                    let sx = s(k, x, i);
                    for j in 0..=k + 1 {
                        let lhs = d(k + 1, sx, j);
                        let ok = if j < i {
                            k >= 1 && lhs == s(k - 1, d(k, x, j), i - 1)
                        } else if j == i || j == i + 1 {
                            lhs == x
                        } else {
                            k >= 1 && lhs == s(k - 1, d(k, x, j - 1), i)
                        };
                        if !ok {
                            return Err(format!("d{j} s{i} on {}", self.labels[k][x]));
                        }
                    }
                    if k + 1 < self.dim {
                        for j in i..=k {
                            if s(k + 1, s(k, x, j), i) != s(k + 1, sx, j + 1) {
                                return Err(format!("s{i} s{j} on {}", self.labels[k][x]));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Flags of simplices in the image of some degeneracy.
    pub fn degenerate(&self, k: usize) -> Vec<bool> {
        let mut out = vec![false; self.count(k)];
        if k > 0 {
            for row in &self.degeneracies[k - 1] {
                for &y in row {
                    out[y] = true;
                }
            }
        }
        out
    }

    pub fn nondegenerate_count(&self, k: usize) -> usize {
        self.degenerate(k).iter().filter(|&&b| !b).count()
    }

    /// Generic construction from a list of simplices per dimension with
    /// face/degeneracy functions on keys.
    fn from_keys<K, FL, FD, FS>(dim: usize, keys: Vec<Vec<K>>, label: FL, face: FD, degen: FS) -> Self
    where
        K: Clone + Eq + std::hash::Hash,
        FL: Fn(&K) -> String,
        FD: Fn(usize, &K, usize) -> K,
        FS: Fn(usize, &K, usize) -> K,
    {
        let index: Vec<HashMap<K, usize>> = keys
            .iter()
            .map(|ks| ks.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect())
            .collect();
        let labels = keys.iter().map(|ks| ks.iter().map(&label).collect()).collect();
        let mut faces = vec![Vec::new()];
        for k in 1..=dim {
            faces.push(
                keys[k]
                    .iter()
                    .map(|x| (0..=k).map(|i| index[k - 1][&face(k, x, i)]).collect())
                    .collect(),
            );
        }
        let mut degeneracies = Vec::new();
        for k in 0..dim {
            degeneracies.push(
                keys[k]
                    .iter()
                    .map(|x| (0..=k).map(|i| index[k + 1][&degen(k, x, i)]).collect())
                    .collect(),
            );
        }
        Self {
            dim,
            labels,
            faces,
            degeneracies,
        }
    }

    pub fn disjoint_union(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let shift = |k: usize| self.count(k);
        let mut out = self.clone();
        for k in 0..=self.dim {
            out.labels[k].extend(other.labels[k].iter().map(|l| format!("{l}'")));
            if k >= 1 {
                out.faces[k].extend(other.faces[k].iter().map(|fs| fs.iter().map(|&y| y + shift(k - 1)).collect()));
            }
            if k < self.dim {
                out.degeneracies[k]
                    .extend(other.degeneracies[k].iter().map(|ss| ss.iter().map(|&y| y + shift(k + 1)).collect()));
            }
        }
        out
    }
}

/// The nerve truncated at `dim`. `k`-simplices are chains `(f₁, …, f_k)`;
/// 1-simplices follow morphism order, higher ones lexicographic order.
pub fn nerve(c: &FinCategory, dim: usize) -> TruncatedSimplicialSet {
    nerve_with_chains(c, dim).0
}

/// The nerve together with the chain behind each simplex (empty for vertices).
pub fn nerve_with_chains(c: &FinCategory, dim: usize) -> (TruncatedSimplicialSet, Vec<Vec<Vec<MorId>>>) {
    #[derive(Clone, PartialEq, Eq, Hash)]
    enum Key {
        Vertex(ObjId),
        Chain(Vec<MorId>),
    }
    let mut keys: Vec<Vec<Key>> = vec![(0..c.object_count()).map(Key::Vertex).collect()];
    let mut all_chains = vec![vec![Vec::new(); c.object_count()]];
    let mut chains: Vec<Vec<MorId>> = (0..c.morphism_count()).map(|f| vec![f]).collect();
    for k in 1..=dim {
        if k > 1 {
            let mut next = Vec::new();
            for ch in &chains {
                for &g in c.out_arrows(c.cod(*ch.last().unwrap())) {
                    let mut e = ch.clone();
                    e.push(g);
                    next.push(e);
                }
            }
            next.sort();
            chains = next;
        }
        keys.push(chains.iter().cloned().map(Key::Chain).collect());
        all_chains.push(chains.clone());
    }
    let vertices = |k: &Key| -> Vec<ObjId> {
        match k {
            Key::Vertex(o) => vec![*o],
            Key::Chain(ch) => std::iter::once(c.dom(ch[0])).chain(ch.iter().map(|&f| c.cod(f))).collect(),
        }
    };
    let from_parts = |start: ObjId, ch: Vec<MorId>| if ch.is_empty() { Key::Vertex(start) } else { Key::Chain(ch) };
    let x = TruncatedSimplicialSet::from_keys(
        dim,
        keys,
        |k| match k {
            Key::Vertex(o) => c.object_name(*o).to_string(),
            Key::Chain(ch) => ch.iter().map(|&f| c.morphism_name(f)).collect::<Vec<_>>().join(" ; "),
        },
        |k, key, i| {
            let vs = vertices(key);
            let Key::Chain(ch) = key else { unreachable!() };
            let mut out = ch.clone();
            if i == 0 {
                out.remove(0);
                from_parts(vs[1], out)
            } else if i == k {
                out.pop();
                from_parts(vs[0], out)
            } else {
                let composite = c.compose(ch[i], ch[i - 1]).expect("composable");
                out.splice(i - 1..=i, [composite]);
                from_parts(vs[0], out)
            }
        },
        |_, key, i| {
            let vs = vertices(key);
            let mut out = match key {
                Key::Vertex(_) => Vec::new(),
                Key::Chain(ch) => ch.clone(),
            };
            out.insert(i, c.identity(vs[i]));
            Key::Chain(out)
        },
    );
    (x, all_chains)
}

/// Simplices of `Δ[n]` truncated at `dim`, optionally restricted by a predicate on
/// monotone maps closed under faces and degeneracies.
fn simplex_subcomplex<P: Fn(&Monotone) -> bool>(n: usize, dim: usize, keep: P) -> TruncatedSimplicialSet {
    let keys: Vec<Vec<Monotone>> = (0..=dim).map(|k| Monotone::all(k, n).into_iter().filter(&keep).collect()).collect();
    TruncatedSimplicialSet::from_keys(
        dim,
        keys,
        |m| m.values.iter().map(|v| v.to_string()).collect::<String>(),
        |k, m, i| m.after(&Monotone::face(k, i)),
        |k, m, i| m.after(&Monotone::degeneracy(k, i)),
    )
}

pub fn standard_simplex(n: usize, dim: usize) -> TruncatedSimplicialSet {
    simplex_subcomplex(n, dim, |_| true)
}

pub fn boundary(n: usize, dim: usize) -> TruncatedSimplicialSet {
    simplex_subcomplex(n, dim, |m| (0..=n).any(|v| !m.values.contains(&v)))
}

pub fn horn(n: usize, k: usize, dim: usize) -> TruncatedSimplicialSet {
    simplex_subcomplex(n, dim, |m| (0..=n).any(|v| v != k && !m.values.contains(&v)))
}

/// A terminal simplicial set: one simplex per dimension.
pub fn point(dim: usize) -> TruncatedSimplicialSet {
    standard_simplex(0, dim)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SSetMap {
    pub source: TruncatedSimplicialSet,
    pub target: TruncatedSimplicialSet,
    pub maps: Vec<Vec<usize>>,
}

impl SSetMap {
    pub fn identity(x: &TruncatedSimplicialSet) -> Self {
        Self {
            source: x.clone(),
            target: x.clone(),
            maps: (0..=x.dim).map(|k| (0..x.count(k)).collect()).collect(),
        }
    }

    pub fn to_point(x: &TruncatedSimplicialSet) -> Self {
        Self {
            source: x.clone(),
            target: point(x.dim),
            maps: (0..=x.dim).map(|k| vec![0; x.count(k)]).collect(),
        }
    }

    /// Commutation with all faces and degeneracies.
    pub fn is_simplicial(&self) -> bool {
        let (x, y) = (&self.source, &self.target);
        (1..=x.dim).all(|k| {
            (0..x.count(k)).all(|s| (0..=k).all(|i| self.maps[k - 1][x.face(k, s, i)] == y.face(k, self.maps[k][s], i)))
        }) && (0..x.dim).all(|k| {
            (0..x.count(k)).all(|s| {
                (0..=k).all(|i| self.maps[k + 1][x.degeneracies[k][s][i]] == y.degeneracies[k][self.maps[k][s]][i])
            })
        })
    }

    /// Pullback of `self` along `q: Z → target`, as a map onto `Z`.
    pub fn pullback_along(&self, q: &SSetMap) -> SSetMap {
        let dim = self.source.dim.min(q.source.dim);
        let (x, z) = (&self.source, &q.source);
        let keys: Vec<Vec<(usize, usize)>> = (0..=dim)
            .map(|k| {
                let mut by_image: HashMap<usize, Vec<usize>> = HashMap::new();
                for s in 0..x.count(k) {
                    by_image.entry(self.maps[k][s]).or_default().push(s);
                }
                (0..z.count(k))
                    .flat_map(|t| {
                        by_image
                            .get(&q.maps[k][t])
                            .into_iter()
                            .flatten()
                            .map(move |&s| (t, s))
                    })
                    .collect()
            })
            .collect();
        let source = TruncatedSimplicialSet::from_keys(
            dim,
            keys.clone(),
            |&(t, s)| format!("({t}|{s})"),
            |k, &(t, s), i| (z.face(k, t, i), x.face(k, s, i)),
            |k, &(t, s), i| (z.degeneracies[k][t][i], x.degeneracies[k][s][i]),
        );
        let maps = keys.iter().map(|ks| ks.iter().map(|&(t, _)| t).collect()).collect();
        SSetMap {
            source,
            target: truncate(z, dim),
            maps,
        }
    }
}

fn truncate(x: &TruncatedSimplicialSet, dim: usize) -> TruncatedSimplicialSet {
    TruncatedSimplicialSet {
        dim,
        labels: x.labels[..=dim].to_vec(),
        faces: x.faces[..=dim].to_vec(),
        degeneracies: x.degeneracies[..dim].to_vec(),
    }
}

// ---------------------------------------------------------------------------
// Horn lifting

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HornKind {
    Inner,
    Left,
    Right,
    Kan,
}

impl HornKind {
    pub fn admits(self, n: usize, k: usize) -> bool {
        match self {
            HornKind::Inner => 0 < k && k < n,
            HornKind::Left => k < n,
            HornKind::Right => 0 < k,
            HornKind::Kan => true,
        }
    }
}

impl FromStr for HornKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "inner" => Ok(HornKind::Inner),
            "left" => Ok(HornKind::Left),
            "right" => Ok(HornKind::Right),
            "kan" => Ok(HornKind::Kan),
            other => Err(format!("unknown horn kind {other:?}")),
        }
    }
}

impl fmt::Display for HornKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HornKind::Inner => "inner",
            HornKind::Left => "left",
            HornKind::Right => "right",
            HornKind::Kan => "kan",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HornFace {
    pub index: usize,
    pub simplex: String,
}

/// An unsolvable lifting problem `Λᵏ[n] → X` over a base `n`-simplex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HornWitness {
    pub n: usize,
    pub k: usize,
    pub base: String,
    pub faces: Vec<HornFace>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HornReport {
    pub kind: HornKind,
    pub dim: usize,
    pub problems: u64,
    pub holds: bool,
    pub witness: Option<HornWitness>,
}

/// Every horn problem of the selected kind with `n ≤ dim`, in order of
/// `(n, k, base simplex, horn faces)`; the first failure is the witness.
pub fn horn_lift_check(p: &SSetMap, kind: HornKind, dim: usize) -> Result<HornReport, SSetError> {
    if dim < 2 {
        return Err(SSetError::DimensionBoundTooLow { dim, required: 2 });
    }
    let top = p.source.dim.min(p.target.dim);
    if dim > top {
        return Err(SSetError::DimensionBoundTooLow { dim: top, required: dim });
    }
    let (x, y) = (&p.source, &p.target);
    let mut problems = 0u64;
    for n in 1..=dim {
        let fiber: Vec<Vec<usize>> = {
            let mut f = vec![Vec::new(); y.count(n - 1)];
            for s in 0..x.count(n - 1) {
                f[p.maps[n - 1][s]].push(s);
            }
            f
        };
        for k in 0..=n {
            if !kind.admits(n, k) {
                continue;
            }
            let others: Vec<usize> = (0..=n).filter(|&i| i != k).collect();
            // Horn faces realized by fillers over each base simplex.
            let mut filled: Vec<HashSet<Vec<usize>>> = vec![HashSet::new(); y.count(n)];
            for s in 0..x.count(n) {
                filled[p.maps[n][s]].insert(others.iter().map(|&i| x.face(n, s, i)).collect());
            }
            for b in 0..y.count(n) {
                let candidates: Vec<&Vec<usize>> = others.iter().map(|&i| &fiber[y.face(n, b, i)]).collect();
                let mut cur = Vec::with_capacity(others.len());
                let mut failure = None;
                search_horns(x, n, &others, &candidates, &mut cur, &mut |tuple| {
                    problems += 1;
                    if failure.is_none() && !filled[b].contains(tuple) {
                        failure = Some(tuple.to_vec());
                    }
                    failure.is_none()
                });
                if let Some(tuple) = failure {
                    return Ok(HornReport {
                        kind,
                        dim,
                        problems,
                        holds: false,
                        witness: Some(HornWitness {
                            n,
                            k,
                            base: y.labels[n][b].clone(),
                            faces: others
                                .iter()
                                .zip(&tuple)
                                .map(|(&i, &s)| HornFace {
                                    index: i,
                                    simplex: x.labels[n - 1][s].clone(),
                                })
                                .collect(),
                        }),
                    });
                }
            }
        }
    }
    Ok(HornReport {
        kind,
        dim,
        problems,
        holds: true,
        witness: None,
    })
}

/// Compatible tuples `(y_i)_{i ∈ others}` with `d_i y_j = d_{j−1} y_i` for `i < j`.
fn search_horns<F: FnMut(&[usize]) -> bool>(
    x: &TruncatedSimplicialSet,
    n: usize,
    others: &[usize],
    candidates: &[&Vec<usize>],
    cur: &mut Vec<usize>,
    visit: &mut F,
) -> bool {
    let pos = cur.len();
    if pos == others.len() {
        return visit(cur);
    }
    let j = others[pos];
    for &yj in candidates[pos] {
        let compatible = n < 2
            || others[..pos]
                .iter()
                .zip(cur.iter())
                .all(|(&i, &yi)| x.face(n - 1, yj, i) == x.face(n - 1, yi, j - 1));
        if compatible {
            cur.push(yj);
            let go_on = search_horns(x, n, others, candidates, cur, visit);
            cur.pop();
            if !go_on {
                return false;
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Set-valued functors and their categories of elements

/// A functor to finite sets: `sizes[c] = |F(c)|`, `maps[f][x] = F(f)(x)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetFunctor {
    pub sizes: Vec<usize>,
    pub maps: Vec<Vec<usize>>,
}

impl SetFunctor {
    pub fn constant(c: &FinCategory, size: usize) -> Self {
        Self {
            sizes: vec![size; c.object_count()],
            maps: (0..c.morphism_count()).map(|_| (0..size).collect()).collect(),
        }
    }

    pub fn check(&self, c: &FinCategory) -> Result<(), SSetError> {
        let err = |m: String| Err(SSetError::NotAFunctor(m));
        if self.sizes.len() != c.object_count() || self.maps.len() != c.morphism_count() {
            return err("shape mismatch".into());
        }
        for f in 0..c.morphism_count() {
            let (a, b) = (c.dom(f), c.cod(f));
            if self.maps[f].len() != self.sizes[a] || self.maps[f].iter().any(|&v| v >= self.sizes[b]) {
                return err(format!("{} is not a map F({}) -> F({})", c.morphism_name(f), c.object_name(a), c.object_name(b)));
            }
            if c.is_identity(f) && self.maps[f].iter().enumerate().any(|(i, &v)| i != v) {
                return err(format!("{} is not sent to an identity", c.morphism_name(f)));
            }
        }
        for f in 0..c.morphism_count() {
            for &g in c.out_arrows(c.cod(f)) {
                let h = c.compose(g, f).unwrap();
                if (0..self.sizes[c.dom(f)]).any(|x| self.maps[g][self.maps[f][x]] != self.maps[h][x]) {
                    return err(format!("composite {} after {}", c.morphism_name(g), c.morphism_name(f)));
                }
            }
        }
        Ok(())
    }

    /// Sends every listed morphism to a bijection.
    pub fn inverts(&self, c: &FinCategory, f: MorId) -> bool {
        let (a, b) = (c.dom(f), c.cod(f));
        self.sizes[a] == self.sizes[b] && self.maps[f].iter().collect::<HashSet<_>>().len() == self.sizes[b]
    }
}

/// The category of elements of `F`, its objects `(c, x)` and the base arrow
/// under each of its morphisms.
pub fn category_of_elements(c: &FinCategory, functor: &SetFunctor) -> (FinCategory, Vec<(ObjId, usize)>, Vec<MorId>) {
    let objects: Vec<(ObjId, usize)> = (0..c.object_count())
        .flat_map(|o| (0..functor.sizes[o]).map(move |x| (o, x)))
        .collect();
    let index: HashMap<(ObjId, usize), usize> = objects.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mut arrows = Vec::new();
    for f in c.declared_morphisms() {
        for x in 0..functor.sizes[c.dom(f)] {
            let s = index[&(c.dom(f), x)];
            let t = index[&(c.cod(f), functor.maps[f][x])];
            arrows.push((s, t, (f, x)));
        }
    }
    let cat = category_from_arrows(
        objects.iter().map(|&(o, x)| format!("{}#{x}", c.object_name(o))).collect(),
        &arrows,
        |g, f| (c.compose(g.0, f.0).unwrap(), f.1),
        |o| (c.identity(objects[o].0), objects[o].1),
        |_, _, k| format!("{}#{}", c.morphism_name(k.0), k.1),
    );
    // Declared arrows come first in the order given, identities after.
    let underlying = arrows
        .iter()
        .map(|a| a.2 .0)
        .chain(objects.iter().map(|&(o, _)| c.identity(o)))
        .collect();
    (cat, objects, underlying)
}

/// The nerve of the category of elements with its projection to the nerve of `C`.
pub fn grothendieck(c: &FinCategory, functor: &SetFunctor, dim: usize) -> Result<SSetMap, SSetError> {
    functor.check(c)?;
    let (el, objects, underlying) = category_of_elements(c, functor);
    let (source, el_chains) = nerve_with_chains(&el, dim);
    let (target, base_chains) = nerve_with_chains(c, dim);
    let mut maps = vec![objects.iter().map(|&(o, _)| o).collect::<Vec<_>>()];
    for k in 1..=dim {
        let index: HashMap<&[MorId], usize> =
            base_chains[k].iter().enumerate().map(|(i, ch)| (ch.as_slice(), i)).collect();
        maps.push(
            el_chains[k]
                .iter()
                .map(|ch| {
                    let image: Vec<MorId> = ch.iter().map(|&f| underlying[f]).collect();
                    index[image.as_slice()]
                })
                .collect(),
        );
    }
    Ok(SSetMap { source, target, maps })
}

// ---------------------------------------------------------------------------
// W-locality

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum WLocalFailure {
    NotKan { hypercover: String, horn: HornWitness },
    TransportNotBijective { hypercover: String, source_components: usize, target_components: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WLocalReport {
    pub checked: usize,
    pub holds: bool,
    pub witness: Option<WLocalFailure>,
}

/// The 1-simplex `w` of `nerve(C)` as a map `Δ[1] → nerve(C)`.
fn edge_map(c: &FinCategory, nerve_c: &TruncatedSimplicialSet, w: MorId, dim: usize) -> SSetMap {
    let (_, chains) = nerve_with_chains(c, dim);
    let (a, b) = (c.dom(w), c.cod(w));
    let mut maps = vec![vec![a, b]];
    for k in 1..=dim {
        let index: HashMap<&[MorId], usize> = chains[k].iter().enumerate().map(|(i, ch)| (ch.as_slice(), i)).collect();
        maps.push(
            Monotone::all(k, 1)
                .iter()
                .map(|m| {
                    let chain: Vec<MorId> = m
                        .values
                        .windows(2)
                        .map(|p| match (p[0], p[1]) {
                            (0, 0) => c.identity(a),
                            (1, 1) => c.identity(b),
                            _ => w,
                        })
                        .collect();
                    index[chain.as_slice()]
                })
                .collect(),
        );
    }
    SSetMap {
        source: standard_simplex(1, dim),
        target: nerve_c.clone(),
        maps,
    }
}

/// For each non-identity `w ∈ W`: the base change of `p` along `w` is a Kan
/// fibration, and transport along `w` is a bijection on fiber components.
pub fn w_local_check(p: &SSetMap, r: &RelativeCategory, dim: usize) -> Result<WLocalReport, SSetError> {
    let c = &r.base;
    let mut checked = 0;
    for w in c.declared_morphisms().filter(|&w| r.is_hypercover(w)) {
        checked += 1;
        let q = edge_map(c, &p.target, w, dim);
        let restricted = p.pullback_along(&q);
        let kan = horn_lift_check(&restricted, HornKind::Kan, dim)?;
        if let Some(horn) = kan.witness {
            return Ok(WLocalReport {
                checked,
                holds: false,
                witness: Some(WLocalFailure::NotKan {
                    hypercover: c.morphism_name(w).into(),
                    horn,
                }),
            });
        }
        // Components of each fiber, then the relation induced by edges over w.
        let x = &restricted.source;
        let over = |v: usize| restricted.maps[0][v];
        let mut fiber_comps: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        let fiber_uf = fiber_components(x, &restricted.maps);
        for v in 0..x.count(0) {
            let side = over(v);
            if !fiber_comps[side].contains(&fiber_uf[v]) {
                fiber_comps[side].push(fiber_uf[v]);
            }
        }
        let mut relation: HashSet<(usize, usize)> = HashSet::new();
        for e in 0..x.count(1) {
            let (s, t) = (x.face(1, e, 1), x.face(1, e, 0));
            if over(s) == 0 && over(t) == 1 {
                relation.insert((fiber_uf[s], fiber_uf[t]));
            }
        }
        let functional = fiber_comps[0]
            .iter()
            .all(|a| relation.iter().filter(|(s, _)| s == a).map(|&(_, t)| t).collect::<HashSet<_>>().len() == 1);
        let injective = fiber_comps[1]
            .iter()
            .all(|b| relation.iter().filter(|(_, t)| t == b).map(|&(s, _)| s).collect::<HashSet<_>>().len() == 1);
        if !(functional && injective) {
            return Ok(WLocalReport {
                checked,
                holds: false,
                witness: Some(WLocalFailure::TransportNotBijective {
                    hypercover: c.morphism_name(w).into(),
                    source_components: fiber_comps[0].len(),
                    target_components: fiber_comps[1].len(),
                }),
            });
        }
    }
    Ok(WLocalReport {
        checked,
        holds: true,
        witness: None,
    })
}

/// Component labels of vertices using only edges that lie over degenerate edges.
fn fiber_components(x: &TruncatedSimplicialSet, maps: &[Vec<usize>]) -> Vec<usize> {
    let mut uf = UnionFind::new(x.count(0));
    for e in 0..x.count(1) {
        let (s, t) = (x.face(1, e, 1), x.face(1, e, 0));
        if maps[0][s] == maps[0][t] {
            uf.union(s, t);
        }
    }
    (0..x.count(0)).map(|v| uf.find(v)).collect()
}

// ---------------------------------------------------------------------------
// π₀ and π₁

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    /// Keeps the smaller root so labels are deterministic.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

/// Component of each vertex, numbered by first appearance.
pub fn pi0(x: &TruncatedSimplicialSet) -> Vec<usize> {
    let mut uf = UnionFind::new(x.count(0));
    if x.dim >= 1 {
        for e in 0..x.count(1) {
            uf.union(x.face(1, e, 0), x.face(1, e, 1));
        }
    }
    let mut numbering = HashMap::new();
    (0..x.count(0))
        .map(|v| {
            let root = uf.find(v);
            let next = numbering.len();
            *numbering.entry(root).or_insert(next)
        })
        .collect()
}

pub fn component_count(x: &TruncatedSimplicialSet) -> usize {
    pi0(x).into_iter().max().map_or(0, |m| m + 1)
}

/// Generators are non-tree nondegenerate edges of the basepoint component;
/// each nondegenerate 2-simplex gives the relation `d₂σ · d₀σ · (d₁σ)⁻¹`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroupoidPresentation {
    pub basepoint: usize,
    pub component: usize,
    pub generators: Vec<String>,
    /// Words as (generator index, ±1).
    pub relations: Vec<Vec<(usize, i32)>>,
}

impl GroupoidPresentation {
    /// Rank of the abelianization's free part.
    pub fn abelianization_rank(&self) -> usize {
        let g = self.generators.len();
        let rows: Vec<Vec<i128>> = self
            .relations
            .iter()
            .map(|w| {
                let mut row = vec![0i128; g];
                for &(x, s) in w {
                    row[x] += s as i128;
                }
                row
            })
            .collect();
        g - integer_rank(rows, g)
    }
}

/// Rank over ℚ by fraction-free (Bareiss) elimination.
fn integer_rank(mut rows: Vec<Vec<i128>>, cols: usize) -> usize {
    let mut rank = 0;
    let mut prev = 1i128;
    for col in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else { continue };
        rows.swap(rank, p);
        for r in rank + 1..rows.len() {
            for k in col + 1..cols {
                rows[r][k] = (rows[rank][col] * rows[r][k] - rows[r][col] * rows[rank][k]) / prev;
            }
            rows[r][col] = 0;
        }
        prev = rows[rank][col];
        rank += 1;
    }
    rank
}

pub fn pi1_presentation(x: &TruncatedSimplicialSet, basepoint: usize) -> Result<GroupoidPresentation, SSetError> {
    if x.dim < 2 {
        return Err(SSetError::DimensionBoundTooLow { dim: x.dim, required: 2 });
    }
    let comps = pi0(x);
    let component = comps[basepoint];
    let degenerate = x.degenerate(1);
    let edges: Vec<usize> = (0..x.count(1))
        .filter(|&e| !degenerate[e] && comps[x.face(1, e, 1)] == component)
        .collect();
    // Spanning tree by BFS from the basepoint, edges taken in index order.
    let mut seen = vec![false; x.count(0)];
    seen[basepoint] = true;
    let mut tree = HashSet::new();
    let mut queue = std::collections::VecDeque::from([basepoint]);
    while let Some(v) = queue.pop_front() {
        for &e in &edges {
            let (s, t) = (x.face(1, e, 1), x.face(1, e, 0));
            let other = if s == v { t } else if t == v { s } else { continue };
            if !seen[other] {
                seen[other] = true;
                tree.insert(e);
                queue.push_back(other);
            }
        }
    }
    let generators: Vec<usize> = edges.iter().copied().filter(|e| !tree.contains(e)).collect();
    let gen_index: HashMap<usize, usize> = generators.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let degenerate2 = x.degenerate(2);
    let mut relations = Vec::new();
    for s in 0..x.count(2) {
        if degenerate2[s] || comps[x.vertex(2, s, 0)] != component {
            continue;
        }
        let word: Vec<(usize, i32)> = [(x.face(2, s, 2), 1), (x.face(2, s, 0), 1), (x.face(2, s, 1), -1)]
            .into_iter()
            .filter_map(|(e, sign)| gen_index.get(&e).map(|&g| (g, sign)))
            .collect();
        relations.push(word);
    }
    Ok(GroupoidPresentation {
        basepoint,
        component,
        generators: generators.iter().map(|&e| x.labels[1][e].clone()).collect(),
        relations,
    })
}
