//! Signature-(n,1) linear algebra on `C^{n+1}` and the ball model of complex
//! hyperbolic space.
//!
//! A point `z` of the unit ball `B^n` is represented in homogeneous
//! coordinates by its lift `(z_1, ..., z_n, 1)`. The Hermitian form
//!
//! ```text
//! <z, w> = z_1 conj(w_1) + ... + z_n conj(w_n) - z_{n+1} conj(w_{n+1})
//! ```
//!
//! is negative exactly on lifts of ball points. Group elements are
//! `(n+1) x (n+1)` complex matrices preserving this form, acting on the ball
//! by fractional-linear transformations.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Group membership tolerance for `g* J g = J` and `det g = 1`.
pub const EPS_GRP: f64 = 1e-9;
/// Slack kept between ball points and the unit sphere.
pub const EPS_BALL: f64 = 1e-12;
/// Smallest admissible modulus of the fractional-linear denominator.
pub const EPS_DEN: f64 = 1e-13;

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Vector in `C^{n+1}` paired by the signature-(n,1) form.
#[derive(Clone, Debug, PartialEq)]
pub struct HVec(pub Vec<C64>);

impl HVec {
    pub fn new(coords: Vec<C64>) -> Self {
        HVec(coords)
    }

    pub fn from_real(coords: &[f64]) -> Self {
        HVec(coords.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coords(&self) -> &[C64] {
        &self.0
    }

    pub fn last(&self) -> C64 {
        *self.0.last().expect("HVec is never empty")
    }

    pub fn scale(&self, s: C64) -> HVec {
        HVec(self.0.iter().map(|&x| x * s).collect())
    }

    pub fn add(&self, other: &HVec) -> HVec {
        HVec(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &HVec) -> HVec {
        HVec(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn to_dvector(&self) -> DVector<C64> {
        DVector::from_column_slice(&self.0)
    }

    pub fn from_dvector(v: &DVector<C64>) -> Self {
        HVec(v.iter().copied().collect())
    }

    /// Dehomogenize: divide by the last coordinate and drop it.
    pub fn projectivize(&self) -> Result<Vec<C64>> {
        let last = self.last();
        if last.norm() < EPS_DEN {
            return Err(Error::DenominatorNearZero {
                modulus: last.norm(),
            });
        }
        let n = self.len() - 1;
        Ok(self.0[..n].iter().map(|&x| x / last).collect())
    }
}

/// `<z, w> = sum_{i<=n} z_i conj(w_i) - z_{n+1} conj(w_{n+1})`.
pub fn herm_form(z: &HVec, w: &HVec) -> Result<C64> {
    if z.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: z.len(),
            found: w.len(),
        });
    }
    Ok(herm_slices(&z.0, &w.0))
}

/// Unchecked form on raw coordinate slices of equal length.
pub(crate) fn herm_slices(z: &[C64], w: &[C64]) -> C64 {
    let n = z.len() - 1;
    let mut acc = ZERO;
    for i in 0..n {
        acc += z[i] * w[i].conj();
    }
    acc - z[n] * w[n].conj()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VectorClass {
    Negative,
    Null,
    Positive,
}

pub fn classify_vector(z: &HVec, tol: f64) -> Result<VectorClass> {
    if z.0.iter().all(|x| *x == ZERO) {
        return Err(Error::ZeroVector);
    }
    let q = herm_slices(&z.0, &z.0).re;
    Ok(if q.abs() <= tol {
        VectorClass::Null
    } else if q < 0.0 {
        VectorClass::Negative
    } else {
        VectorClass::Positive
    })
}

/// Point of the open unit ball `B^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct BallPoint(Vec<C64>);

impl BallPoint {
    pub fn new(affine: Vec<C64>) -> Result<Self> {
        let norm_sqr: f64 = affine.iter().map(|x| x.norm_sqr()).sum();
        if affine.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if !norm_sqr.is_finite() || norm_sqr >= 1.0 - EPS_BALL {
            return Err(Error::OutsideBall { norm_sqr });
        }
        Ok(BallPoint(affine))
    }

    pub fn from_real_imag(parts: &[(f64, f64)]) -> Result<Self> {
        Self::new(parts.iter().map(|&(re, im)| C64::new(re, im)).collect())
    }

    /// Skip the boundary check; for quadrature nodes known to be interior.
    pub(crate) fn from_trusted(affine: Vec<C64>) -> Self {
        BallPoint(affine)
    }

    pub(crate) fn into_coords(self) -> Vec<C64> {
        self.0
    }

    pub fn origin(n: usize) -> Self {
        BallPoint(vec![ZERO; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[C64] {
        &self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|x| x.norm_sqr()).sum()
    }

    /// Homogeneous lift `(z_1, ..., z_n, 1)`.
    pub fn lift(&self) -> HVec {
        let mut v = self.0.clone();
        v.push(ONE);
        HVec(v)
    }

    /// `<(z,1), (w,1)>` without allocating the lifts.
    pub fn lifted_pairing(&self, w: &BallPoint) -> C64 {
        self.0
            .iter()
            .zip(&w.0)
            .fold(-ONE, |acc, (a, b)| acc + a * b.conj())
    }

    /// `-<z,z> = 1 - |z|^2` for the standard lift.
    pub fn neg_form(&self) -> f64 {
        1.0 - self.norm_sqr()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    /// `U(n,1)`: preserves the form.
    U,
    /// `SU(n,1)`: preserves the form and has unit determinant.
    SU,
}

/// Matrix in `U(n,1)` or `SU(n,1)` that passed validation.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    matrix: DMatrix<C64>,
    flavor: Flavor,
}

/// `J = diag(1, ..., 1, -1)` of size `n+1`.
pub fn signature_matrix(size: usize) -> DMatrix<C64> {
    let mut j = DMatrix::<C64>::identity(size, size);
    j[(size - 1, size - 1)] = -ONE;
    j
}

/// `max |g* J g - J|` over entries.
pub fn form_residual(m: &DMatrix<C64>) -> f64 {
    let j = signature_matrix(m.nrows());
    let r = m.adjoint() * &j * m - j;
    r.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn validate_group(matrix: DMatrix<C64>, flavor: Flavor, tol: f64) -> Result<GroupElement> {
    if matrix.nrows() != matrix.ncols() || matrix.nrows() < 2 {
        return Err(Error::BadShape);
    }
    if matrix
        .iter()
        .any(|x| !x.re.is_finite() || !x.im.is_finite())
    {
        return Err(Error::NotInGroup {
            residual: f64::INFINITY,
        });
    }
    let mut residual = form_residual(&matrix);
    if flavor == Flavor::SU {
        residual = residual.max((matrix.determinant() - ONE).norm());
    }
    if residual > tol {
        return Err(Error::NotInGroup { residual });
    }
    Ok(GroupElement { matrix, flavor })
}

/// Divide by the principal `(n+1)`-th root of the determinant.
pub fn normalize_det(matrix: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let det = matrix.determinant();
    if det.norm() < EPS_DEN {
        return Err(Error::InvalidParameter("singular matrix".into()));
    }
    let root = det.powf(1.0 / matrix.nrows() as f64);
    Ok(matrix.map(|x| x / root))
}

impl GroupElement {
    pub fn identity(n: usize, flavor: Flavor) -> Self {
        GroupElement {
            matrix: DMatrix::identity(n + 1, n + 1),
            flavor,
        }
    }

    /// Wrap a matrix without checking it; used for products of validated
    /// elements whose drift stays far below `EPS_GRP`.
    pub(crate) fn from_trusted(matrix: DMatrix<C64>, flavor: Flavor) -> Self {
        GroupElement { matrix, flavor }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    /// Ball dimension `n`.
    pub fn dim(&self) -> usize {
        self.matrix.nrows() - 1
    }

    pub fn residual(&self) -> f64 {
        let mut r = form_residual(&self.matrix);
        if self.flavor == Flavor::SU {
            r = r.max((self.matrix.determinant() - ONE).norm());
        }
        r
    }

    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        let flavor = if self.flavor == Flavor::SU && other.flavor == Flavor::SU {
            Flavor::SU
        } else {
            Flavor::U
        };
        GroupElement {
            matrix: &self.matrix * &other.matrix,
            flavor,
        }
    }

    /// `g^{-1} = J g* J`, exact for elements of `U(n,1)`.
    pub fn inverse(&self) -> GroupElement {
        let j = signature_matrix(self.matrix.nrows());
        GroupElement {
            matrix: &j * self.matrix.adjoint() * &j,
            flavor: self.flavor,
        }
    }

    pub fn pow(&self, m: i64) -> GroupElement {
        let base = if m < 0 { self.inverse() } else { self.clone() };
        let mut acc = GroupElement::identity(self.dim(), self.flavor);
        let mut sq = base;
        let mut e = m.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.compose(&sq);
            }
        }
        acc
    }

    /// Conjugate `h g h^{-1}`.
    pub fn conjugate_by(&self, h: &GroupElement) -> GroupElement {
        h.compose(self).compose(&h.inverse())
    }

    pub fn apply(&self, v: &HVec) -> HVec {
        let n1 = self.matrix.nrows();
        let mut out = vec![ZERO; n1];
        for (i, o) in out.iter_mut().enumerate() {
            for j in 0..n1 {
                *o += self.matrix[(i, j)] * v.0[j];
            }
        }
        HVec(out)
    }

    /// `c.z + d`, the last coordinate of `g (z, 1)`.
    pub fn denominator(&self, z: &BallPoint) -> Result<C64> {
        self.check_dim(z)?;
        let n = self.dim();
        let mut den = self.matrix[(n, n)];
        for j in 0..n {
            den += self.matrix[(n, j)] * z.0[j];
        }
        if den.norm() < EPS_DEN {
            return Err(Error::DenominatorNearZero {
                modulus: den.norm(),
            });
        }
        Ok(den)
    }

    fn check_dim(&self, z: &BallPoint) -> Result<()> {
        if z.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: z.dim(),
            });
        }
        Ok(())
    }

    pub fn max_entry_distance(&self, other: &GroupElement) -> f64 {
        (&self.matrix - &other.matrix)
            .iter()
            .map(|x| x.norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Fractional-linear action `z -> (A z + b) / (c.z + d)`.
pub fn act(g: &GroupElement, z: &BallPoint) -> Result<BallPoint> {
    let den = g.denominator(z)?;
    let n = g.dim();
    let m = &g.matrix;
    let out: Vec<C64> = (0..n)
        .map(|i| {
            let mut num = m[(i, n)];
            for j in 0..n {
                num += m[(i, j)] * z.0[j];
            }
            num / den
        })
        .collect();
    BallPoint::new(out)
}

/// `det J(g, z) = (c.z + d)^{-(n+1)}`.
pub fn jacobian_det(g: &GroupElement, z: &BallPoint) -> Result<C64> {
    let den = g.denominator(z)?;
    Ok(den.powi(-((g.dim() + 1) as i32)))
}

/// Holomorphic Jacobian matrix `dw_i/dz_j` of the fractional-linear map.
pub fn jacobian_matrix(g: &GroupElement, z: &BallPoint) -> Result<DMatrix<C64>> {
    let den = g.denominator(z)?;
    let n = g.dim();
    let m = &g.matrix;
    let num: Vec<C64> = (0..n)
        .map(|i| {
            let mut s = m[(i, n)];
            for j in 0..n {
                s += m[(i, j)] * z.0[j];
            }
            s
        })
        .collect();
    let den2 = den * den;
    Ok(DMatrix::from_fn(n, n, |i, j| {
        (m[(i, j)] * den - num[i] * m[(n, j)]) / den2
    }))
}

/// Row-major JSON form: an array of rows, each an array of `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixJson(pub Vec<Vec<[f64; 2]>>);

impl MatrixJson {
    pub fn from_matrix(m: &DMatrix<C64>) -> Self {
        MatrixJson(
            (0..m.nrows())
                .map(|i| {
                    (0..m.ncols())
                        .map(|j| [m[(i, j)].re, m[(i, j)].im])
                        .collect()
                })
                .collect(),
        )
    }

    pub fn to_matrix(&self) -> Result<DMatrix<C64>> {
        let rows = self.0.len();
        if rows == 0 || self.0.iter().any(|r| r.len() != rows) {
            return Err(Error::BadShape);
        }
        Ok(DMatrix::from_fn(rows, rows, |i, j| {
            C64::new(self.0[i][j][0], self.0[i][j][1])
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn diag_phase(phi: f64) -> DMatrix<C64> {
        let e = C64::from_polar(1.0, phi);
        DMatrix::from_diagonal(&DVector::from_vec(vec![e, e, e.powi(-2)]))
    }

    #[test]
    fn form_on_basis_vectors() {
        let e3 = HVec::from_real(&[0.0, 0.0, 1.0]);
        let e1 = HVec::from_real(&[1.0, 0.0, 0.0]);
        assert_eq!(herm_form(&e3, &e3).unwrap(), c(-1.0, 0.0));
        assert_eq!(herm_form(&e1, &e3).unwrap(), ZERO);
        let z = BallPoint::from_real_imag(&[(0.5, 0.0), (0.0, 0.0)]).unwrap();
        let q = herm_form(&z.lift(), &z.lift()).unwrap();
        assert!((q - c(-0.75, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn form_dimension_mismatch() {
        let a = HVec::from_real(&[1.0, 0.0]);
        let b = HVec::from_real(&[1.0, 0.0, 0.0]);
        assert!(matches!(
            herm_form(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn vector_classes() {
        let t = 1e-12;
        let cls = |v: &[f64]| classify_vector(&HVec::from_real(v), t).unwrap();
        assert_eq!(cls(&[0.0, 0.0, 1.0]), VectorClass::Negative);
        assert_eq!(cls(&[1.0, 0.0, 1.0]), VectorClass::Null);
        assert_eq!(cls(&[1.0, 0.0, 0.0]), VectorClass::Positive);
        assert_eq!(
            classify_vector(&HVec::from_real(&[0.0, 0.0, 0.0]), t),
            Err(Error::ZeroVector)
        );
    }

    #[test]
    fn validation_cases() {
        let id = DMatrix::<C64>::identity(3, 3);
        assert!(validate_group(id, Flavor::SU, EPS_GRP).is_ok());
        assert!(validate_group(diag_phase(0.3), Flavor::SU, EPS_GRP).is_ok());
        let mut bad = DMatrix::<C64>::identity(3, 3);
        bad[(0, 0)] = c(2.0, 0.0);
        match validate_group(bad, Flavor::U, EPS_GRP) {
            Err(Error::NotInGroup { residual }) => assert!((residual - 3.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        // unit determinant required only for SU
        let u = diag_phase(0.3).map(|x| x * C64::from_polar(1.0, 0.1));
        assert!(validate_group(u.clone(), Flavor::U, EPS_GRP).is_ok());
        assert!(validate_group(u, Flavor::SU, EPS_GRP).is_err());
        assert_eq!(
            validate_group(DMatrix::<C64>::identity(1, 1), Flavor::U, EPS_GRP),
            Err(Error::BadShape)
        );
    }

    #[test]
    fn normalize_det_gives_su() {
        let u = diag_phase(0.3).map(|x| x * C64::from_polar(1.0, 0.4));
        let s = normalize_det(&u).unwrap();
        assert!((s.determinant() - ONE).norm() < 1e-14);
        assert!(validate_group(s, Flavor::SU, EPS_GRP).is_ok());
    }

    #[test]
    fn act_identity_and_normal_form() {
        let z = BallPoint::from_real_imag(&[(0.1, 0.2), (-0.3, 0.05)]).unwrap();
        let id = GroupElement::identity(2, Flavor::SU);
        assert_eq!(act(&id, &z).unwrap(), z);
        // a = 1.25, b = 0.75 block on (z2, 1)
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[
                ONE,
                ZERO,
                ZERO,
                ZERO,
                c(1.25, 0.0),
                c(0.75, 0.0),
                ZERO,
                c(0.75, 0.0),
                c(1.25, 0.0),
            ],
        );
        let g = validate_group(m, Flavor::SU, EPS_GRP).unwrap();
        let w = act(&g, &BallPoint::origin(2)).unwrap();
        assert!((w.coords()[0]).norm() < 1e-15);
        assert!((w.coords()[1] - c(0.6, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn jacobian_of_diagonal_phase() {
        let phi = 0.3;
        let g = validate_group(diag_phase(phi), Flavor::SU, EPS_GRP).unwrap();
        let z = BallPoint::from_real_imag(&[(0.2, -0.1), (0.4, 0.3)]).unwrap();
        let j = jacobian_det(&g, &z).unwrap();
        assert!((j - C64::from_polar(1.0, 6.0 * phi)).norm() < 1e-14);
        let id = GroupElement::identity(2, Flavor::SU);
        assert_eq!(jacobian_det(&id, &z).unwrap(), ONE);
    }

    #[test]
    fn jacobian_matrix_matches_determinant() {
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[
                ONE,
                ZERO,
                ZERO,
                ZERO,
                c(1.25, 0.0),
                c(0.75, 0.0),
                ZERO,
                c(0.75, 0.0),
                c(1.25, 0.0),
            ],
        );
        let g = validate_group(m, Flavor::SU, EPS_GRP).unwrap();
        let z = BallPoint::from_real_imag(&[(0.2, -0.1), (0.4, 0.3)]).unwrap();
        let jm = jacobian_matrix(&g, &z).unwrap();
        assert!((jm.determinant() - jacobian_det(&g, &z).unwrap()).norm() < 1e-13);
    }

    #[test]
    fn inverse_and_pow() {
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[
                ONE,
                ZERO,
                ZERO,
                ZERO,
                c(1.25, 0.0),
                c(0.75, 0.0),
                ZERO,
                c(0.75, 0.0),
                c(1.25, 0.0),
            ],
        );
        let g = validate_group(m, Flavor::SU, EPS_GRP).unwrap();
        let e = g.compose(&g.inverse());
        assert!(e.max_entry_distance(&GroupElement::identity(2, Flavor::SU)) < 1e-14);
        let g3 = g.pow(3);
        let manual = g.compose(&g).compose(&g);
        assert!(g3.max_entry_distance(&manual) < 1e-13);
        let gm2 = g.pow(-2);
        assert!(
            gm2.compose(&g.pow(2))
                .max_entry_distance(&GroupElement::identity(2, Flavor::SU))
                < 1e-13
        );
    }

    #[test]
    fn ball_point_rejects_boundary() {
        assert!(BallPoint::from_real_imag(&[(1.0, 0.0), (0.0, 0.0)]).is_err());
        assert!(BallPoint::from_real_imag(&[(0.6, 0.0), (0.8, 0.0)]).is_err());
        assert!(BallPoint::from_real_imag(&[(0.6, 0.0), (0.7, 0.0)]).is_ok());
    }

    #[test]
    fn matrix_json_round_trip() {
        let m = diag_phase(0.7);
        let js = serde_json::to_string(&MatrixJson::from_matrix(&m)).unwrap();
        let back: MatrixJson = serde_json::from_str(&js).unwrap();
        assert_eq!(back.to_matrix().unwrap(), m);
        let ragged: MatrixJson = serde_json::from_str("[[[1,0],[0,0]],[[0,0]]]").unwrap();
        assert_eq!(ragged.to_matrix(), Err(Error::BadShape));
    }
}
