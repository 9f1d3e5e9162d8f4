//! Finitely generated subgroups: word enumeration by shells and reduction
//! modulo a cyclic subgroup.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{validate_group, Flavor, GroupElement, MatrixJson, EPS_GRP};

pub const DEFAULT_ELEMENT_CAP: usize = 200_000;
pub const DEFAULT_DEDUP_TOL: f64 = 1e-8;

/// Generators of a subgroup and the enumeration limits.
#[derive(Clone, Debug)]
pub struct LatticeSpec {
    /// Generators followed by any inverses that were not listed.
    pub generators: Vec<GroupElement>,
    pub max_word_length: usize,
    pub dedup_tol: f64,
    pub element_cap: usize,
}

/// On-disk form of a [`LatticeSpec`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticeConfig {
    pub generators: Vec<MatrixJson>,
    pub max_word_length: usize,
    #[serde(default = "default_dedup_tol")]
    pub dedup_tol: f64,
    #[serde(default = "default_cap")]
    pub element_cap: usize,
}

fn default_dedup_tol() -> f64 {
    DEFAULT_DEDUP_TOL
}

fn default_cap() -> usize {
    DEFAULT_ELEMENT_CAP
}

impl LatticeSpec {
    pub fn new(generators: Vec<GroupElement>, max_word_length: usize) -> Result<Self> {
        LatticeSpec::with_limits(generators, max_word_length, DEFAULT_DEDUP_TOL, DEFAULT_ELEMENT_CAP)
    }

    pub fn with_limits(generators: Vec<GroupElement>, max_word_length: usize, dedup_tol: f64, element_cap: usize) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidParameter("lattice needs at least one generator".into()));
        }
        if dedup_tol.is_nan() || dedup_tol <= 0.0 {
            return Err(Error::InvalidParameter("dedup_tol must be positive".into()));
        }
        let dim = generators[0].dim();
        if let Some(g) = generators.iter().find(|g| g.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: g.dim(),
            });
        }
        let mut set = ElementSet::new(dedup_tol);
        let mut all = Vec::new();
        for g in &generators {
            if set.insert(g) {
                all.push(g.clone());
            }
        }
        for g in &generators {
            let inv = g.inverse();
            if set.insert(&inv) {
                all.push(inv);
            }
        }
        Ok(LatticeSpec {
            generators: all,
            max_word_length,
            dedup_tol,
            element_cap,
        })
    }

    pub fn from_config(cfg: &LatticeConfig) -> Result<Self> {
        let gens = cfg
            .generators
            .iter()
            .map(|m| validate_group(m.to_matrix()?, Flavor::SU, EPS_GRP))
            .collect::<Result<Vec<_>>>()?;
        LatticeSpec::with_limits(gens, cfg.max_word_length, cfg.dedup_tol, cfg.element_cap)
    }

    pub fn to_config(&self) -> LatticeConfig {
        LatticeConfig {
            generators: self.generators.iter().map(|g| MatrixJson::from_matrix(g.matrix())).collect(),
            max_word_length: self.max_word_length,
            dedup_tol: self.dedup_tol,
            element_cap: self.element_cap,
        }
    }

    /// Generators conjugated by `h`.
    pub fn conjugated(&self, h: &GroupElement) -> LatticeSpec {
        LatticeSpec {
            generators: self.generators.iter().map(|g| g.conjugate_by(h)).collect(),
            ..self.clone()
        }
    }
}

/// Set of group elements up to entrywise distance `tol * max(1, |g|_max)`.
///
/// Long words have large entries, so the tolerance scales with the element.
/// Elements are bucketed by the logarithm of their Frobenius norm; a match
/// can only sit in the same or an adjacent bucket.
pub struct ElementSet {
    tol: f64,
    width: f64,
    buckets: HashMap<i64, Vec<GroupElement>>,
    len: usize,
}

fn max_abs(g: &GroupElement) -> f64 {
    g.matrix().iter().map(|x| x.norm()).fold(0.0, f64::max)
}

impl ElementSet {
    pub fn new(tol: f64) -> Self {
        ElementSet {
            tol,
            width: 0.0,
            buckets: HashMap::new(),
            len: 0,
        }
    }

    fn key(&mut self, g: &GroupElement) -> i64 {
        if self.width == 0.0 {
            // |g|_F of entrywise-close elements differ by at most d * tol * scale,
            // and |g|_F >= scale, with d = n + 1 entries per side
            let d = g.dim() + 1;
            self.width = 2.0 * self.tol * d as f64;
        }
        (g.frobenius_norm().ln() / self.width).floor() as i64
    }

    pub fn contains(&mut self, g: &GroupElement) -> bool {
        let key = self.key(g);
        let tol = self.tol * max_abs(g).max(1.0);
        (key - 1..=key + 1).any(|k| {
            self.buckets
                .get(&k)
                .is_some_and(|b| b.iter().any(|h| h.max_entry_distance(g) < tol))
        })
    }

    /// Insert `g`; returns `false` when an equal element is already present.
    pub fn insert(&mut self, g: &GroupElement) -> bool {
        if self.contains(g) {
            return false;
        }
        let key = self.key(g);
        self.buckets.entry(key).or_default().push(g.clone());
        self.len += 1;
        true
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// Breadth-first word closure. Shell `n` holds the elements whose shortest
/// word has length `n`, in lexicographic order of the generator words.
pub fn enumerate_group(lat: &LatticeSpec) -> Result<Vec<Vec<GroupElement>>> {
    let dim = lat.generators[0].dim();
    let id = GroupElement::identity(dim, lat.generators[0].flavor());
    let mut seen = ElementSet::new(lat.dedup_tol);
    seen.insert(&id);
    let mut shells = vec![vec![id]];
    for _ in 0..lat.max_word_length {
        let mut next = Vec::new();
        for g in shells.last().expect("shell 0 exists") {
            for s in &lat.generators {
                let h = g.compose(s);
                if seen.insert(&h) {
                    if seen.len() > lat.element_cap {
                        return Err(Error::EnumerationOverflow { cap: lat.element_cap });
                    }
                    next.push(h);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        shells.push(next);
    }
    Ok(shells)
}

/// Representatives of `<gamma_0> \ Gamma`, grouped by the first shell in
/// which each coset appears.
#[derive(Clone, Debug)]
pub struct CosetReps {
    pub shells: Vec<Vec<GroupElement>>,
    /// Elements whose minimizing power sat on the search boundary.
    pub boundary_hits: usize,
}

impl CosetReps {
    pub fn len(&self) -> usize {
        self.shells.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &GroupElement> {
        self.shells.iter().flatten()
    }
}

/// `gamma_0^m g` with the smallest Frobenius norm over `|m| <= max_power`,
/// ties (to relative `1e-9`) going to the smaller `m`. Also returns `m`.
pub fn canonical_rep(g: &GroupElement, gamma0: &GroupElement, max_power: i64) -> (GroupElement, i64) {
    let inv = gamma0.inverse();
    let mut candidates = Vec::with_capacity(2 * max_power as usize + 1);
    let mut down = g.clone();
    for m in 0..max_power {
        down = inv.compose(&down);
        candidates.push((-(m + 1), down.clone()));
    }
    candidates.reverse();
    candidates.push((0, g.clone()));
    let mut up = g.clone();
    for m in 0..max_power {
        up = gamma0.compose(&up);
        candidates.push((m + 1, up.clone()));
    }
    let mut best = 0;
    let mut best_norm = f64::INFINITY;
    for (i, (_, c)) in candidates.iter().enumerate() {
        let norm = c.frobenius_norm();
        if norm < best_norm * (1.0 - 1e-9) {
            best = i;
            best_norm = norm;
        }
    }
    let (m, rep) = candidates.swap_remove(best);
    (rep, m)
}

pub fn coset_reps(shells: &[Vec<GroupElement>], gamma0: &GroupElement, max_power: i64, dedup_tol: f64) -> CosetReps {
    let mut seen = ElementSet::new(dedup_tol);
    let mut boundary_hits = 0;
    let out = shells
        .iter()
        .map(|shell| {
            let mut reps = Vec::new();
            for g in shell {
                let (rep, m) = canonical_rep(g, gamma0, max_power);
                if m.abs() == max_power && max_power > 0 {
                    boundary_hits += 1;
                }
                if seen.insert(&rep) {
                    reps.push(rep);
                }
            }
            reps
        })
        .collect();
    CosetReps {
        shells: out,
        boundary_hits,
    }
}
