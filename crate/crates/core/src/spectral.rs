//! Eigen-analysis of group elements.
//!
//! A loxodromic element has two null eigenvectors `X`, `Y` with eigenvalues
//! of moduli `rho > 1` and `1/rho`, plus `n-1` positive eigenvectors with
//! unimodular eigenvalues. It is hyperbolic when removing a common unit phase
//! makes every eigenvalue real. For `n = 2` the normalizer
//!
//! ```text
//! A = [ v | X/<X,Y> + Y/2 | X/<X,Y> - Y/2 ]
//! ```
//!
//! conjugates a hyperbolic `gamma_0` (with eigenvalue 1 on `v`) into the
//! normal form `[[1,0,0],[0,a,b],[0,b,a]]`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermitian::{
    herm_form, validate_group, Flavor, GroupElement, HVec, C64, EPS_GRP, ONE, ZERO,
};

/// Elements with `rho - 1` below this are rejected as near-parabolic.
pub const NEAR_PARABOLIC: f64 = 1e-6;
/// Relative tolerance used to pair moduli and to test for real spectra.
pub const PAIRING_TOL: f64 = 1e-8;

/// Eigen-data of a hyperbolic element.
///
/// With `tau = phase`, the rescaled element `g / tau` satisfies
/// `X -> lambda X`, `Y -> Y / lambda` and fixes every vector in `positives`.
#[derive(Clone, Debug)]
pub struct HyperbolicData {
    pub lambda: f64,
    pub phase: C64,
    pub x: HVec,
    pub y: HVec,
    pub positives: Vec<HVec>,
    pub element: GroupElement,
}

impl HyperbolicData {
    /// The positive eigenvector used for `n = 2`.
    pub fn v(&self) -> &HVec {
        &self.positives[0]
    }

    /// `<X, Y>`.
    pub fn pairing(&self) -> C64 {
        herm_form(&self.x, &self.y).expect("eigenvectors share a dimension")
    }

    /// Data with `lambda` inverted: the roles of `X` and `Y` swap.
    pub fn swapped(&self) -> HyperbolicData {
        HyperbolicData {
            lambda: 1.0 / self.lambda,
            phase: self.phase,
            x: self.y.clone(),
            y: self.x.clone(),
            positives: self.positives.clone(),
            element: self.element.clone(),
        }
    }
}

/// Eigen-data of a loxodromic element whose spectrum cannot be made real.
#[derive(Clone, Debug)]
pub struct LoxodromicData {
    pub lambda: C64,
    pub taus: Vec<C64>,
    pub x: HVec,
    pub y: HVec,
    pub positives: Vec<HVec>,
}

#[derive(Clone, Debug)]
pub enum ElementClass {
    EllipticOrOther,
    Loxodromic(LoxodromicData),
    Hyperbolic(HyperbolicData),
}

impl ElementClass {
    pub fn tag(&self) -> &'static str {
        match self {
            ElementClass::EllipticOrOther => "elliptic-or-other",
            ElementClass::Loxodromic(_) => "loxodromic",
            ElementClass::Hyperbolic(_) => "hyperbolic",
        }
    }
}

fn eigenvalues(m: &DMatrix<C64>) -> Result<Vec<C64>> {
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or(Error::DegenerateSpectrum { gap: f64::NAN })?;
    let ev = schur
        .eigenvalues()
        .ok_or(Error::DegenerateSpectrum { gap: f64::NAN })?;
    Ok(ev.iter().copied().collect())
}

/// Basis of the approximate kernel of `m - mu I`: the right singular vectors
/// belonging to the `dim` smallest singular values.
fn eigen_space(m: &DMatrix<C64>, mu: C64, dim: usize) -> Vec<HVec> {
    let size = m.nrows();
    let shifted = m - DMatrix::<C64>::identity(size, size) * mu;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[a]
            .partial_cmp(&svd.singular_values[b])
            .expect("finite singular values")
    });
    order
        .into_iter()
        .take(dim)
        .map(|row| HVec((0..size).map(|j| v_t[(row, j)].conj()).collect()))
        .collect()
}

/// Scale so the entry of largest modulus is real and positive, unit Euclidean norm.
fn canonical_positive(v: &HVec) -> HVec {
    let (mut best, mut idx) = (0.0, 0);
    for (i, x) in v.0.iter().enumerate() {
        if x.norm() > best + 1e-12 {
            best = x.norm();
            idx = i;
        }
    }
    let norm = v.0.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let phase = v.0[idx] / v.0[idx].norm();
    v.scale(C64::new(1.0 / norm, 0.0) / phase)
}

/// Scale a null vector so its last coordinate equals `target`.
fn with_last(v: &HVec, target: C64) -> Result<HVec> {
    let last = v.last();
    if last.norm() < 1e-14 {
        return Err(Error::DenominatorNearZero {
            modulus: last.norm(),
        });
    }
    Ok(v.scale(target / last))
}

/// Classify `g` by its spectrum.
///
/// `tol` bounds `rho - 1` for elements reported as elliptic-or-other.
pub fn classify_element(g: &GroupElement, tol: f64) -> Result<ElementClass> {
    let n = g.dim();
    let m = g.matrix();
    let mut ev = eigenvalues(m)?;
    ev.sort_by(|a, b| {
        b.norm()
            .partial_cmp(&a.norm())
            .expect("finite eigenvalues")
            .then(a.arg().partial_cmp(&b.arg()).expect("finite eigenvalues"))
    });
    let rho = ev[0].norm();
    let gap = rho - 1.0;
    if gap <= tol {
        return Ok(ElementClass::EllipticOrOther);
    }
    if gap < NEAR_PARABOLIC {
        return Err(Error::DegenerateSpectrum { gap });
    }
    let lam = ev[0];
    let mu = ev[n];
    if (rho * mu.norm() - 1.0).abs() > PAIRING_TOL.sqrt() {
        return Err(Error::DegenerateSpectrum { gap });
    }
    let taus: Vec<C64> = ev[1..n].to_vec();
    if taus
        .iter()
        .any(|t| (t.norm() - 1.0).abs() > PAIRING_TOL.sqrt())
    {
        return Err(Error::DegenerateSpectrum { gap });
    }

    let x = with_last(&eigen_space(m, lam, 1).remove(0), ONE)?;
    let y = with_last(&eigen_space(m, mu, 1).remove(0), -ONE)?;

    // Common unit phase of the tau's, if any.
    let common = match taus.first() {
        Some(t0) if taus.iter().all(|t| (t - t0).norm() <= PAIRING_TOL) => {
            let mean = taus.iter().sum::<C64>() / taus.len() as f64;
            Some(mean / mean.norm())
        }
        Some(_) => None,
        None => Some(lam / lam.norm()),
    };

    if let Some(phase) = common {
        let lr = lam / phase;
        let mr = mu / phase;
        if lr.im.abs() <= PAIRING_TOL * lr.norm() && mr.im.abs() <= PAIRING_TOL * lr.norm() {
            let positives = if n > 1 {
                eigen_space(m, phase, n - 1)
                    .iter()
                    .map(canonical_positive)
                    .collect()
            } else {
                Vec::new()
            };
            return Ok(ElementClass::Hyperbolic(HyperbolicData {
                lambda: lr.re,
                phase,
                x,
                y,
                positives,
                element: g.clone(),
            }));
        }
    }

    let mut positives = Vec::new();
    for t in &taus {
        positives.push(canonical_positive(&eigen_space(m, *t, 1).remove(0)));
    }
    Ok(ElementClass::Loxodromic(LoxodromicData {
        lambda: lam,
        taus,
        x,
        y,
        positives,
    }))
}

/// Classify and require a hyperbolic result.
pub fn hyperbolic_data(g: &GroupElement, tol: f64) -> Result<HyperbolicData> {
    match classify_element(g, tol)? {
        ElementClass::Hyperbolic(d) => Ok(d),
        other => Err(Error::NotHyperbolic(other.tag().into())),
    }
}

/// Whether 1 itself is an eigenvalue of the element (on the positive eigenvectors).
pub fn assumption_31_check(data: &HyperbolicData) -> bool {
    !data.positives.is_empty() && (data.phase - ONE).norm() < EPS_GRP
}

/// The square of a hyperbolic element, validated in `SU(n,1)`.
pub fn square_to_su(g: &GroupElement) -> Result<GroupElement> {
    hyperbolic_data(g, EPS_GRP)?;
    let sq = g.matrix() * g.matrix();
    validate_group(sq, Flavor::SU, EPS_GRP)
}

/// `[[1,0,0],[0,a,b],[0,b,a]]` with `a = (lambda^2+1)/(2 lambda)`,
/// `b = (lambda^2-1)/(2 lambda)`.
pub fn normal_form(lambda: f64) -> Result<GroupElement> {
    if !lambda.is_finite() || lambda.abs() <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "normal form needs |lambda| > 1, got {lambda}"
        )));
    }
    let (a, b) = normal_form_coefficients(lambda);
    let (a, b) = (C64::new(a, 0.0), C64::new(b, 0.0));
    let m = DMatrix::from_row_slice(3, 3, &[ONE, ZERO, ZERO, ZERO, a, b, ZERO, b, a]);
    validate_group(m, Flavor::SU, EPS_GRP)
}

pub fn normal_form_coefficients(lambda: f64) -> (f64, f64) {
    let a = (lambda * lambda + 1.0) / (2.0 * lambda);
    let b = (lambda * lambda - 1.0) / (2.0 * lambda);
    (a, b)
}

/// Build the normalizer `A` in `SU(2,1)`. The positive eigenvector is
/// rescaled to unit form-norm and its phase is chosen so that `det A = 1`.
pub fn build_a(data: &HyperbolicData) -> Result<GroupElement> {
    if data.x.len() != 3 {
        return Err(Error::InvalidParameter(
            "the normalizer is defined for n = 2".into(),
        ));
    }
    let p = data.pairing();
    if p.norm() < 1e-12 {
        return Err(Error::NormalizationFailure("<X,Y> vanishes".into()));
    }
    let xp = data.x.scale(ONE / p);
    let half_y = data.y.scale(C64::new(0.5, 0.0));
    let c2 = xp.add(&half_y);
    let c3 = xp.sub(&half_y);
    let v = data.v();
    let vv = herm_form(v, v)?.re;
    if vv <= 0.0 {
        return Err(Error::NormalizationFailure(format!(
            "<v,v> = {vv} is not positive"
        )));
    }
    let v_unit = v.scale(C64::new(1.0 / vv.sqrt(), 0.0));
    let columns = |first: &HVec| {
        DMatrix::from_columns(&[first.to_dvector(), c2.to_dvector(), c3.to_dvector()])
    };
    let det = columns(&v_unit).determinant();
    if (det.norm() - 1.0).abs() > 1e-6 {
        return Err(Error::NormalizationFailure(format!(
            "|det| = {} after unit scaling",
            det.norm()
        )));
    }
    let m = columns(&v_unit.scale(ONE / det));
    validate_group(m, Flavor::SU, EPS_GRP).map_err(|e| Error::NormalizationFailure(e.to_string()))
}

/// Boundary fixed points `X` and `Y` in affine coordinates.
pub fn axis_endpoints(data: &HyperbolicData) -> Result<(Vec<C64>, Vec<C64>)> {
    let a = data.x.projectivize()?;
    let b = data.y.projectivize()?;
    for end in [&a, &b] {
        let r: f64 = end.iter().map(|x| x.norm_sqr()).sum();
        if (r - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "axis endpoint off the sphere (|p|^2 = {r})"
            )));
        }
    }
    Ok((a, b))
}

/// Max eigen-residual `|g u - mu u|` over the returned pairs, using `g / phase`.
pub fn eigen_residual(data: &HyperbolicData) -> f64 {
    let g = data.element.matrix().map(|x| x / data.phase);
    let res = |u: &HVec, mu: f64| {
        let gu = &g * u.to_dvector();
        (gu - u.to_dvector() * C64::new(mu, 0.0))
            .iter()
            .map(|x| x.norm())
            .fold(0.0, f64::max)
    };
    let mut r = res(&data.x, data.lambda).max(res(&data.y, 1.0 / data.lambda));
    for v in &data.positives {
        r = r.max(res(v, 1.0));
    }
    r
}

/// `max |A^{-1} g A - normal_form(lambda)|`.
pub fn normal_form_residual(data: &HyperbolicData, a: &GroupElement) -> Result<f64> {
    let conj = a.inverse().compose(&data.element);
    let conj = conj.compose(a);
    Ok(conj.max_entry_distance(&normal_form(data.lambda)?))
}

/// JSON view of hyperbolic eigen-data.
#[derive(Serialize)]
pub struct HyperbolicReport {
    pub lambda: f64,
    pub phase: [f64; 2],
    pub x: Vec<[f64; 2]>,
    pub y: Vec<[f64; 2]>,
    pub v: Vec<Vec<[f64; 2]>>,
    pub assumption_eigenvalue_one: bool,
}

pub(crate) fn pairs(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter().map(|x| [x.re, x.im]).collect()
}

impl HyperbolicReport {
    pub fn new(d: &HyperbolicData) -> Self {
        HyperbolicReport {
            lambda: d.lambda,
            phase: [d.phase.re, d.phase.im],
            x: pairs(&d.x.0),
            y: pairs(&d.y.0),
            v: d.positives.iter().map(|p| pairs(&p.0)).collect(),
            assumption_eigenvalue_one: assumption_31_check(d),
        }
    }
}
