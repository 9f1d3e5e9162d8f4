//! Relative Poincaré series over `<gamma_0> \ Gamma`.
//!
//! The seed is
//!
//! ```text
//! q_l(z) = <z,v>^{2l} / (<z,X> <z,Y>)^{3k+l}
//! ```
//!
//! on the lift `(z, 1)`. It is homogeneous of degree `-6k` in the lift, so a
//! term `q_l(g z) det J(g, z)^{2k}` equals the same expression evaluated at
//! `g (z, 1)`; terms are computed that way, which avoids dividing by the
//! denominator of `g z`.

pub mod lattice;
pub mod residue;
pub mod torus_integral;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermitian::{herm_form, BallPoint, GroupElement, HVec, C64};
use crate::quadrature::pairwise_sum;
use crate::random::{random_hyperbolic, seeded};
use crate::spectral::{assumption_31_check, hyperbolic_data, normal_form, HyperbolicData};
use crate::torus::TorusSpec;

pub use lattice::{canonical_rep, coset_reps, enumerate_group, CosetReps, LatticeConfig, LatticeSpec};

/// Eigenvectors and weights defining the seed `q_l`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedData {
    pub k: u32,
    pub l: u32,
    pub x: HVec,
    pub y: HVec,
    pub v: HVec,
}

impl SeedData {
    /// Uses the first column of the normalizer as `v`.
    pub fn from_torus(spec: &TorusSpec) -> Self {
        let v = HVec::from_dvector(&spec.normalizer.matrix().column(0).into_owned());
        SeedData {
            k: spec.k,
            l: spec.l,
            x: spec.hyp.x.clone(),
            y: spec.hyp.y.clone(),
            v,
        }
    }

    pub fn from_hyperbolic(k: u32, l: u32, hyp: HyperbolicData) -> Result<Self> {
        Ok(SeedData::from_torus(&TorusSpec::new(k, l, hyp)?))
    }

    /// `q_l` on an arbitrary (not necessarily normalized) lift `u`.
    pub fn homogeneous(&self, u: &HVec) -> Result<C64> {
        let num = herm_form(u, &self.v)?.powu(2 * self.l);
        let den = herm_form(u, &self.x)? * herm_form(u, &self.y)?;
        let e = 3 * self.k + self.l;
        Ok(num * den.powi(-(e as i32)))
    }

    pub fn q_l(&self, z: &BallPoint) -> Result<C64> {
        self.homogeneous(&z.lift())
    }

    /// `q_l(g z) det J(g, z)^{2k}`.
    pub fn term(&self, g: &GroupElement, z: &BallPoint) -> Result<C64> {
        self.homogeneous(&g.apply(&z.lift()))
    }
}

/// General seed `prod <z,v_i>^{l_i} / (<z,X><z,Y>)^{(n+1)k + sum l_i / 2}`.
pub fn q_multi(z: &BallPoint, x: &HVec, y: &HVec, vs: &[HVec], ls: &[u32], k: u32) -> Result<C64> {
    if vs.len() != ls.len() {
        return Err(Error::DimensionMismatch {
            expected: vs.len(),
            found: ls.len(),
        });
    }
    let total: u32 = ls.iter().sum();
    if total % 2 == 1 {
        return Err(Error::OddWeightVector(total));
    }
    let u = z.lift();
    let mut num = C64::new(1.0, 0.0);
    for (v, &li) in vs.iter().zip(ls) {
        num *= herm_form(&u, v)?.powu(li);
    }
    let n = z.dim() as u32;
    let e = (n + 1) * k + total / 2;
    let den = herm_form(&u, x)? * herm_form(&u, y)?;
    Ok(num * den.powi(-(e as i32)))
}

/// Seed, cyclic subgroup and ambient lattice.
#[derive(Clone, Debug)]
pub struct SeriesSpec {
    pub seed: SeedData,
    pub gamma0: GroupElement,
    pub lattice: LatticeSpec,
}

impl SeriesSpec {
    pub fn new(k: u32, l: u32, gamma0: GroupElement, lattice: LatticeSpec) -> Result<Self> {
        let hyp = hyperbolic_data(&gamma0, crate::hermitian::EPS_GRP)?;
        if !assumption_31_check(&hyp) {
            return Err(Error::InvalidParameter(
                "gamma_0 must have eigenvalue 1 on its positive eigenvector".into(),
            ));
        }
        Ok(SeriesSpec {
            seed: SeedData::from_hyperbolic(k, l, hyp)?,
            gamma0,
            lattice,
        })
    }

    /// Coset representatives grouped by shell; powers of `gamma_0` are
    /// searched up to twice the word length.
    pub fn coset_reps(&self) -> Result<CosetReps> {
        let shells = enumerate_group(&self.lattice)?;
        let max_power = 2 * self.lattice.max_word_length as i64 + 2;
        Ok(coset_reps(&shells, &self.gamma0, max_power, self.lattice.dedup_tol))
    }
}

/// Cumulative sum through one shell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartialSum {
    pub shell: usize,
    pub terms: usize,
    pub value: C64,
    /// `|value(shell) - value(shell - 1)|`; zero for shell 0.
    pub cauchy_gap: f64,
    /// `max_g |Theta(g z) det J(g,z)^{2k} - Theta(z)|` over the test elements.
    pub automorphy_residual: f64,
}

fn shell_sum(seed: &SeedData, reps: &[GroupElement], u: &HVec) -> Result<C64> {
    let terms: Vec<Result<C64>> = reps
        .par_iter()
        .map(|g| seed.homogeneous(&g.apply(u)))
        .collect();
    let terms = terms.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&terms))
}

/// Shell-by-shell partial sums at `z`.
pub fn theta_series(z: &BallPoint, seed: &SeedData, reps: &CosetReps, test_elements: &[GroupElement]) -> Result<Vec<PartialSum>> {
    let base = z.lift();
    let moved: Vec<HVec> = test_elements.iter().map(|g| g.apply(&base)).collect();
    let mut value = C64::new(0.0, 0.0);
    let mut shifted = vec![C64::new(0.0, 0.0); moved.len()];
    let mut terms = 0;
    let mut out = Vec::with_capacity(reps.shells.len());
    for (shell, group) in reps.shells.iter().enumerate() {
        let inc = shell_sum(seed, group, &base)?;
        value += inc;
        terms += group.len();
        let mut residual: f64 = 0.0;
        for (acc, u) in shifted.iter_mut().zip(&moved) {
            *acc += shell_sum(seed, group, u)?;
            residual = residual.max((*acc - value).norm());
        }
        out.push(PartialSum {
            shell,
            terms,
            value,
            cauchy_gap: if shell == 0 { 0.0 } else { inc.norm() },
            automorphy_residual: residual,
        });
    }
    Ok(out)
}

/// Element `gamma_0` used by the shipped examples.
pub fn example_gamma0() -> GroupElement {
    normal_form(3.0).expect("valid normal form")
}

/// `Gamma = <gamma_0>`: every series has a single term.
pub fn example_cyclic(max_word_length: usize) -> Result<SeriesSpec> {
    let g0 = example_gamma0();
    let lat = LatticeSpec::new(vec![g0.clone()], max_word_length)?;
    SeriesSpec::new(1, 1, g0, lat)
}

/// Second generator of the two-generator example: a hyperbolic element
/// conjugated away from the axis of `gamma_0`. Much stronger generators make
/// the identity coset of `rep * g` cancel badly in floating point.
pub fn example_second_generator() -> GroupElement {
    random_hyperbolic(5.0, 1.0, &mut seeded(2024))
}

/// `Gamma = <gamma_0, h>` with `h` from [`example_second_generator`].
pub fn example_two_generator(max_word_length: usize) -> Result<SeriesSpec> {
    let g0 = example_gamma0();
    let lat = LatticeSpec::new(vec![g0.clone(), example_second_generator()], max_word_length)?;
    SeriesSpec::new(1, 1, g0, lat)
}

/// One row of the nonvanishing probe.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeRow {
    pub k: u32,
    pub point_id: usize,
    pub abs_theta: f64,
    pub cauchy_gap: f64,
}

/// `|Theta|` at points of the projected torus for each `k`, using the last
/// computed shell.
pub fn nonvanishing_probe(ks: &[u32], l: u32, gamma0: &GroupElement, lattice: &LatticeSpec, points: &[BallPoint]) -> Result<Vec<ProbeRow>> {
    let mut rows = Vec::new();
    for &k in ks {
        let spec = SeriesSpec::new(k, l, gamma0.clone(), lattice.clone())?;
        let reps = spec.coset_reps()?;
        for (id, z) in points.iter().enumerate() {
            let sums = theta_series(z, &spec.seed, &reps, &[])?;
            let last = sums.last().expect("shell 0 always present");
            rows.push(ProbeRow {
                k,
                point_id: id,
                abs_theta: last.value.norm(),
                cauchy_gap: last.cauchy_gap,
            });
        }
    }
    Ok(rows)
}

/// Points of the torus around the axis of `gamma_0`, projected to the ball.
pub fn probe_points(k: u32, l: u32, gamma0: &GroupElement, count: usize) -> Result<Vec<BallPoint>> {
    let spec = TorusSpec::for_element(k, l, gamma0)?;
    let l2 = spec.lambda().powi(2);
    (0..count)
        .map(|j| {
            let t = (j as f64 + 0.5) / count as f64;
            let p = crate::torus::lambda_point(&spec, l2.powf(t), 2.0 * std::f64::consts::PI * t)?;
            Ok(p.base().clone())
        })
        .collect()
}

pub fn probe_csv(rows: &[ProbeRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Parse(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::EPS_GRP;
    use crate::random::{random_ball_point, random_su};

    fn normal_seed(k: u32, l: u32) -> SeedData {
        let g = normal_form(2.0).unwrap();
        SeedData::from_hyperbolic(k, l, hyperbolic_data(&g, EPS_GRP).unwrap()).unwrap()
    }

    #[test]
    fn normal_form_seed_values() {
        let seed = normal_seed(1, 1);
        assert_eq!(seed.q_l(&BallPoint::origin(2)).unwrap(), C64::new(0.0, 0.0));
        // z_1^2 / (z_2^2 - 1)^4 for v = e_1, X = (0,1,1), Y = (0,1,-1)
        let z = BallPoint::from_real_imag(&[(0.3, 0.0), (0.2, 0.0)]).unwrap();
        let expect = 0.09 / 0.96f64.powi(4);
        assert!((seed.q_l(&z).unwrap() - expect).norm() < 1e-14);
    }

    #[test]
    fn seed_is_invariant_under_gamma0() {
        let mut rng = seeded(6);
        for (k, l) in [(1u32, 1u32), (2, 1), (1, 3)] {
            let g = example_gamma0();
            let seed = SeedData::from_hyperbolic(k, l, hyperbolic_data(&g, EPS_GRP).unwrap()).unwrap();
            for _ in 0..20 {
                let z = random_ball_point(2, 0.8, &mut rng);
                let a = seed.q_l(&z).unwrap();
                let two_step = seed.q_l(&crate::hermitian::act(&g, &z).unwrap()).unwrap()
                    * crate::hermitian::jacobian_det(&g, &z).unwrap().powu(2 * k);
                assert!((two_step - a).norm() < 1e-11 * a.norm().max(1.0));
                assert!((seed.term(&g, &z).unwrap() - a).norm() < 1e-11 * a.norm().max(1.0));
            }
        }
    }

    #[test]
    fn multi_seed_specializes() {
        let seed = normal_seed(1, 2);
        let z = BallPoint::from_real_imag(&[(0.1, 0.3), (-0.2, 0.1)]).unwrap();
        let m = q_multi(&z, &seed.x, &seed.y, std::slice::from_ref(&seed.v), &[4], 1).unwrap();
        assert!((m - seed.q_l(&z).unwrap()).norm() < 1e-14);
        assert!(matches!(
            q_multi(&z, &seed.x, &seed.y, std::slice::from_ref(&seed.v), &[3], 1),
            Err(Error::OddWeightVector(3))
        ));
    }

    #[test]
    fn cyclic_lattice_gives_the_seed() {
        let spec = example_cyclic(4).unwrap();
        let reps = spec.coset_reps().unwrap();
        let z = BallPoint::from_real_imag(&[(0.3, 0.0), (0.2, 0.0)]).unwrap();
        let sums = theta_series(&z, &spec.seed, &reps, std::slice::from_ref(&spec.gamma0)).unwrap();
        let last = sums.last().unwrap();
        assert_eq!(last.terms, 1);
        assert!((last.value - spec.seed.q_l(&z).unwrap()).norm() < 1e-15);
    }

    #[test]
    fn representative_choice_does_not_matter() {
        let spec = example_two_generator(3).unwrap();
        let reps = spec.coset_reps().unwrap();
        let z = random_ball_point(2, 0.5, &mut seeded(8));
        for (i, g) in reps.iter().enumerate().take(30) {
            let m = (i as i64 % 5) - 2;
            let moved = spec.gamma0.pow(m).compose(g);
            let a = spec.seed.term(g, &z).unwrap();
            let b = spec.seed.term(&moved, &z).unwrap();
            assert!((a - b).norm() < 1e-11 * a.norm().max(1.0));
        }
    }

    #[test]
    fn conjugation_invariance() {
        let spec = example_two_generator(3).unwrap();
        let h = random_su(2, 0.5, &mut seeded(19));
        let mut conj = SeriesSpec::new(1, 1, spec.gamma0.conjugate_by(&h), spec.lattice.conjugated(&h)).unwrap();
        // eigenvectors of the conjugate are only determined up to scale
        conj.seed = SeedData {
            x: h.apply(&spec.seed.x),
            y: h.apply(&spec.seed.y),
            v: h.apply(&spec.seed.v),
            ..spec.seed.clone()
        };
        let z = BallPoint::from_real_imag(&[(0.2, 0.1), (-0.1, 0.2)]).unwrap();
        let hz = crate::hermitian::act(&h, &z).unwrap();
        let det = crate::hermitian::jacobian_det(&h, &z).unwrap().powu(2);
        let a = theta_series(&z, &spec.seed, &spec.coset_reps().unwrap(), &[]).unwrap();
        let b = theta_series(&hz, &conj.seed, &conj.coset_reps().unwrap(), &[]).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.terms, y.terms);
            let lhs = y.value * det;
            assert!((lhs - x.value).norm() < 1e-9 * x.value.norm().max(1e-12), "{lhs} vs {}", x.value);
        }
    }

    #[test]
    fn power_invariance() {
        let g0 = example_gamma0();
        let g3 = g0.pow(3);
        let s1 = SeriesSpec::new(1, 1, g0.clone(), LatticeSpec::new(vec![g0.clone()], 6).unwrap()).unwrap();
        let s3 = SeriesSpec::new(1, 1, g3, LatticeSpec::new(vec![g0.clone()], 6).unwrap()).unwrap();
        let z = BallPoint::from_real_imag(&[(0.3, 0.1), (0.2, -0.1)]).unwrap();
        // identical seeds
        assert!((s1.seed.q_l(&z).unwrap() - s3.seed.q_l(&z).unwrap()).norm() < 1e-12);
        // <gamma_0^3> has three cosets in <gamma_0>
        let r3 = s3.coset_reps().unwrap();
        assert_eq!(r3.len(), 3);
        let v1 = theta_series(&z, &s1.seed, &s1.coset_reps().unwrap(), &[]).unwrap();
        let v3 = theta_series(&z, &s3.seed, &r3, &[]).unwrap();
        let (a, b) = (v1.last().unwrap().value, v3.last().unwrap().value);
        assert!((b - a * 3.0).norm() < 1e-11 * a.norm());
    }

    #[test]
    fn two_generator_trend() {
        let spec = example_two_generator(5).unwrap();
        let reps = spec.coset_reps().unwrap();
        assert_eq!(reps.len(), 243);
        assert_eq!(reps.boundary_hits, 0);
        let h = example_second_generator();
        let z = BallPoint::from_real_imag(&[(0.3, 0.0), (0.2, 0.0)]).unwrap();
        let sums = theta_series(&z, &spec.seed, &reps, &[h.clone(), h.inverse()]).unwrap();
        for w in sums[2..].windows(2) {
            assert!(w[1].cauchy_gap < w[0].cauchy_gap);
        }
        assert!(sums[5].automorphy_residual * 10.0 < sums[2].automorphy_residual);
    }

    #[test]
    fn probe_rows_and_csv() {
        let spec = example_cyclic(3).unwrap();
        let pts = probe_points(1, 1, &spec.gamma0, 3).unwrap();
        let rows = nonvanishing_probe(&[1, 2], 1, &spec.gamma0, &spec.lattice, &pts).unwrap();
        assert_eq!(rows.len(), 6);
        for r in &rows {
            assert!(r.abs_theta > 0.0);
        }
        let csv = probe_csv(&rows).unwrap();
        assert!(csv.starts_with("k,point_id,abs_theta,cauchy_gap\n"));
        assert_eq!(csv.lines().count(), 7);
    }
}
