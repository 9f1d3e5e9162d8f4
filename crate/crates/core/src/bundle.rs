//! Bergman kernel, Kähler form, potential and connection forms, the circle
//! bundle `P` and inner products of weighted functions.
//!
//! Points of `P` are pairs `(z, zeta)` with `|zeta| = (-<z,z>)^{(n+1)/2}`.
//! Tangent vectors are carried as complex increments `dz` (and `dzeta`);
//! a real tangent vector `u` pairs with `dz_j` as `u_j` and with `dzbar_j`
//! as `conj(u_j)`.
//!
//! Inner products integrate against `4 dx_1 dy_1 dx_2 dy_2`:
//! `dz ^ dzbar = -2i dx ^ dy`, hence
//! `i^2 dz_1 ^ dzbar_1 ^ dz_2 ^ dzbar_2 = i^2 (-2i)^2 dx_1 dy_1 dx_2 dy_2 = 4 dV`.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hermitian::{act, jacobian_det, jacobian_matrix, BallPoint, GroupElement, C64, ZERO};
use crate::quadrature::{ball2_integrate_many, pairwise_sum, Integral, QuadratureSpec, Rule};

/// Allowed defect in the fiber-modulus constraint.
pub const EPS_FIB: f64 = 1e-10;
/// Smallest finite-difference step accepted by [`curvature_check`].
pub const MIN_FD_STEP: f64 = 1e-7;

const I: C64 = C64::new(0.0, 1.0);

/// Sign in front of the potential form, `theta = sigma (n+1) i <dz,z>/<z,z>`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SignConvention {
    /// `sigma = +1`, the form `i d' ln (-<z,z>)^{n+1}` as written.
    Definition,
    /// `sigma = -1`; makes the connection form invariant under the bundle
    /// action and the tori Legendrian.
    #[default]
    Legendrian,
}

impl SignConvention {
    pub fn sigma(self) -> f64 {
        match self {
            SignConvention::Definition => 1.0,
            SignConvention::Legendrian => -1.0,
        }
    }
}

/// A point `(z, zeta)` of the unit circle bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct CirclePoint {
    z: BallPoint,
    zeta: C64,
}

pub fn fiber_modulus(z: &BallPoint) -> f64 {
    z.neg_form().powf((z.dim() + 1) as f64 / 2.0)
}

impl CirclePoint {
    pub fn new(z: BallPoint, zeta: C64) -> Result<Self> {
        let defect = (zeta.norm() - fiber_modulus(&z)).abs();
        if defect >= EPS_FIB {
            return Err(Error::NotOnCircleBundle { defect });
        }
        Ok(CirclePoint { z, zeta })
    }

    /// The point over `z` with fiber phase `phase`.
    pub fn with_phase(z: BallPoint, phase: f64) -> Self {
        let zeta = C64::from_polar(fiber_modulus(&z), phase);
        CirclePoint { z, zeta }
    }

    pub fn base(&self) -> &BallPoint {
        &self.z
    }

    pub fn zeta(&self) -> C64 {
        self.zeta
    }

    pub fn dim(&self) -> usize {
        self.z.dim()
    }
}

/// Complex increments of a tangent vector. `dzeta` is ignored by forms on the
/// base.
#[derive(Clone, Debug, PartialEq)]
pub struct Tangent {
    pub dz: Vec<C64>,
    pub dzeta: C64,
}

impl Tangent {
    pub fn base(dz: Vec<C64>) -> Self {
        Tangent { dz, dzeta: ZERO }
    }

    /// The generator of fiber rotation at `p`.
    pub fn vertical(p: &CirclePoint) -> Self {
        Tangent {
            dz: vec![ZERO; p.dim()],
            dzeta: I * p.zeta,
        }
    }

    /// Real coordinate direction: `axis` counts `x_1, y_1, x_2, y_2, ...`.
    pub fn coordinate(n: usize, axis: usize) -> Self {
        let mut dz = vec![ZERO; n];
        dz[axis / 2] = if axis.is_multiple_of(2) { C64::new(1.0, 0.0) } else { I };
        Tangent::base(dz)
    }
}

/// Defect of the linearized constraint `d|zeta|^2 = d (-<z,z>)^{n+1}`.
pub fn fiber_tangency_defect(p: &CirclePoint, t: &Tangent) -> f64 {
    let n = p.dim();
    let q = p.z.neg_form();
    let dq = -2.0 * pair_affine(&t.dz, p.z.coords()).re;
    let lhs = 2.0 * (p.zeta.conj() * t.dzeta).re;
    let rhs = (n + 1) as f64 * q.powi(n as i32) * dq;
    (lhs - rhs).abs()
}

/// `sum_j a_j conj(b_j)` over affine coordinates.
fn pair_affine(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).fold(ZERO, |acc, (x, y)| acc + x * y.conj())
}

/// `1 / (-<z,w>)^{n+1}` on lifted points.
pub fn bergman_kernel(z: &BallPoint, w: &BallPoint) -> Result<C64> {
    if z.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: z.dim(),
            found: w.dim(),
        });
    }
    let base = -z.lifted_pairing(w);
    if base.re <= 0.0 {
        return Err(Error::BranchCut {
            re: base.re,
            im: base.im,
        });
    }
    Ok(base.powi(-((z.dim() + 1) as i32)))
}

/// `theta(dz)` at `z`.
pub fn theta_form(z: &BallPoint, dz: &[C64], conv: SignConvention) -> C64 {
    let n = z.dim();
    let q = z.norm_sqr() - 1.0;
    I * (conv.sigma() * (n + 1) as f64) * pair_affine(dz, z.coords()) / q
}

/// `alpha = theta + i dzeta / zeta`.
pub fn alpha_form(p: &CirclePoint, t: &Tangent, conv: SignConvention) -> C64 {
    theta_form(&p.z, &t.dz, conv) + I * t.dzeta / p.zeta
}

/// `(z, zeta) -> (M z, zeta det J(M, z))`.
pub fn bundle_action(m: &GroupElement, p: &CirclePoint) -> Result<CirclePoint> {
    let z = act(m, &p.z)?;
    let zeta = p.zeta * jacobian_det(m, &p.z)?;
    CirclePoint::new(z, zeta)
}

/// Differential of [`bundle_action`] applied to `t` at `p`.
pub fn push_tangent(m: &GroupElement, p: &CirclePoint, t: &Tangent) -> Result<Tangent> {
    let n = p.dim();
    let jac = jacobian_matrix(m, &p.z)?;
    let dz: Vec<C64> = (0..n)
        .map(|i| (0..n).fold(ZERO, |acc, j| acc + jac[(i, j)] * t.dz[j]))
        .collect();
    let den = m.denominator(&p.z)?;
    let mat = m.matrix();
    let c_dz = (0..n).fold(ZERO, |acc, j| acc + mat[(n, j)] * t.dz[j]);
    let det = den.powi(-((n + 1) as i32));
    let d_det = -((n + 1) as f64) * den.powi(-((n + 2) as i32)) * c_dz;
    Ok(Tangent {
        dz,
        dzeta: t.dzeta * det + p.zeta * d_det,
    })
}

/// Kähler form `Phi_kappa(u, v)` at `z`.
pub fn kahler_form(z: &BallPoint, u: &[C64], v: &[C64], kappa: f64) -> C64 {
    let zc = z.coords();
    let q = z.norm_sqr() - 1.0;
    let flat = pair_affine(u, v) - pair_affine(v, u);
    // <dz,z> ^ <z,dz> evaluated on (u, v)
    let mixed = pair_affine(u, zc) * pair_affine(zc, v) - pair_affine(v, zc) * pair_affine(zc, u);
    I * (2.0 * kappa) / (q * q) * (q * flat - mixed)
}

/// `d theta(u, v)` by central differences of `theta` with step `h`.
pub fn d_theta(z: &BallPoint, u: &[C64], v: &[C64], h: f64, conv: SignConvention) -> Result<C64> {
    if h < MIN_FD_STEP {
        return Err(Error::StepTooSmall { step: h });
    }
    let shifted = |dir: &[C64], s: f64| -> Result<BallPoint> {
        BallPoint::new(z.coords().iter().zip(dir).map(|(a, b)| a + b * s).collect())
    };
    let deriv = |along: &[C64], of: &[C64]| -> Result<C64> {
        let plus = theta_form(&shifted(along, h)?, of, conv);
        let minus = theta_form(&shifted(along, -h)?, of, conv);
        Ok((plus - minus) / (2.0 * h))
    };
    Ok(deriv(u, v)? - deriv(v, u)?)
}

/// `|d theta_sigma(u,v) + sigma Phi_{(n+1)/2}(u,v)|`.
///
/// With `sigma = +1` this is the curvature identity `d theta = -Phi`.
pub fn curvature_check(
    z: &BallPoint,
    u: &[C64],
    v: &[C64],
    h: f64,
    conv: SignConvention,
) -> Result<f64> {
    let kappa = (z.dim() + 1) as f64 / 2.0;
    let dt = d_theta(z, u, v, h, conv)?;
    Ok((dt + kahler_form(z, u, v, kappa) * conv.sigma()).norm())
}

/// `int_a^b theta(c'(t)) dt` with an `nodes`-point Gauss rule.
pub fn theta_line_integral<C>(
    curve: C,
    a: f64,
    b: f64,
    nodes: usize,
    conv: SignConvention,
) -> Result<C64>
where
    C: Fn(f64) -> Result<(BallPoint, Vec<C64>)> + Sync,
{
    let rule = Rule::gauss(nodes, a, b);
    let vals: Vec<Result<C64>> = rule
        .nodes
        .iter()
        .map(|&t| curve(t).map(|(z, dz)| theta_form(&z, &dz, conv)))
        .collect();
    let mut terms = Vec::with_capacity(vals.len());
    for (v, w) in vals.into_iter().zip(&rule.weights) {
        terms.push(v? * *w);
    }
    Ok(pairwise_sum(&terms))
}

type Eval = Arc<dyn Fn(&BallPoint) -> C64 + Send + Sync>;

/// A function on `B^2` of weight `(n+1) k`.
#[derive(Clone)]
pub struct WeightedFunction {
    pub k: u32,
    eval: Eval,
}

impl std::fmt::Debug for WeightedFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WeightedFunction")
            .field("k", &self.k)
            .finish_non_exhaustive()
    }
}

impl WeightedFunction {
    pub fn new<F>(k: u32, eval: F) -> Self
    where
        F: Fn(&BallPoint) -> C64 + Send + Sync + 'static,
    {
        WeightedFunction {
            k,
            eval: Arc::new(eval),
        }
    }

    pub fn zero(k: u32) -> Self {
        WeightedFunction::new(k, |_| ZERO)
    }

    pub fn eval(&self, z: &BallPoint) -> C64 {
        (self.eval)(z)
    }
}

fn common_weight(fs: &[WeightedFunction]) -> Result<u32> {
    let k = fs.first().map(|f| f.k).ok_or(Error::BadShape)?;
    if k == 0 {
        return Err(Error::InvalidParameter(
            "weight parameter must be positive".into(),
        ));
    }
    if let Some(bad) = fs.iter().find(|f| f.k != k) {
        return Err(Error::InvalidParameter(format!(
            "weights differ: {k} vs {}",
            bad.k
        )));
    }
    Ok(k)
}

fn gram_raw(fs: &[WeightedFunction], k: u32, spec: QuadratureSpec) -> Vec<C64> {
    let m = fs.len();
    let power = 3 * k as i32 - 3;
    let upper = ball2_integrate_many(
        |z, out| {
            let w = 4.0 * z.neg_form().powi(power);
            let mut vals = [ZERO; 16];
            let vals: &mut [C64] = if m <= 16 {
                &mut vals[..m]
            } else {
                return gram_point_slow(fs, z, w, out);
            };
            for (v, f) in vals.iter_mut().zip(fs) {
                *v = f.eval(z);
            }
            let mut slot = 0;
            for i in 0..m {
                let vi = vals[i] * w;
                for vj in &vals[i..] {
                    out[slot] = vi * vj.conj();
                    slot += 1;
                }
            }
        },
        m * (m + 1) / 2,
        spec,
    );
    let mut full = vec![ZERO; m * m];
    let mut slot = 0;
    for i in 0..m {
        for j in i..m {
            full[i * m + j] = upper[slot];
            full[j * m + i] = upper[slot].conj();
            slot += 1;
        }
    }
    full
}

fn gram_point_slow(fs: &[WeightedFunction], z: &BallPoint, w: f64, out: &mut [C64]) {
    let vals: Vec<C64> = fs.iter().map(|f| f.eval(z)).collect();
    let mut slot = 0;
    for i in 0..vals.len() {
        for j in i..vals.len() {
            out[slot] = vals[i] * w * vals[j].conj();
            slot += 1;
        }
    }
}

/// Gram matrix `G_ij = (f_i, f_j)` over the whole ball, with the largest
/// full-vs-half rule gap.
pub fn gram_matrix(fs: &[WeightedFunction], spec: QuadratureSpec) -> Result<(DMatrix<C64>, f64)> {
    let k = common_weight(fs)?;
    let m = fs.len();
    let full = gram_raw(fs, k, spec);
    let half = gram_raw(fs, k, spec.halved());
    let err = full
        .iter()
        .zip(&half)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok((DMatrix::from_row_slice(m, m, &full), err))
}

/// `(f, g) = int f conj(g) (-<z,z>)^{3k-3} 4 dV` over `B^2`.
pub fn petersson_inner(
    f: &WeightedFunction,
    g: &WeightedFunction,
    spec: QuadratureSpec,
) -> Result<Integral> {
    let (gram, est_error) = gram_matrix(&[f.clone(), g.clone()], spec)?;
    let value = gram[(0, 1)];
    let scale = gram[(0, 0)].norm().max(gram[(1, 1)].norm()).max(1.0);
    if est_error > spec.tol * scale {
        return Err(Error::NonConvergent { est_error });
    }
    Ok(Integral { value, est_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_ball_point, random_su, seeded};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pt(a: &[(f64, f64)]) -> BallPoint {
        BallPoint::from_real_imag(a).unwrap()
    }

    #[test]
    fn kernel_values() {
        let o = BallPoint::origin(2);
        assert!((bergman_kernel(&o, &o).unwrap() - 1.0).norm() < 1e-15);
        let z = pt(&[(0.5, 0.0), (0.0, 0.0)]);
        let k = bergman_kernel(&z, &z).unwrap();
        assert!((k - c(0.75f64.powi(-3), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn kernel_symmetry_and_transformation() {
        let mut rng = seeded(21);
        for _ in 0..20 {
            let g = random_su(2, 1.5, &mut rng);
            let z = random_ball_point(2, 0.8, &mut rng);
            let w = random_ball_point(2, 0.8, &mut rng);
            let kzw = bergman_kernel(&z, &w).unwrap();
            assert!((kzw - bergman_kernel(&w, &z).unwrap().conj()).norm() < 1e-10 * kzw.norm());
            let lhs = bergman_kernel(&act(&g, &z).unwrap(), &act(&g, &w).unwrap()).unwrap();
            let jz = jacobian_det(&g, &z).unwrap();
            let jw = jacobian_det(&g, &w).unwrap();
            let rhs = kzw / (jz * jw.conj());
            assert!((lhs - rhs).norm() < 1e-10 * rhs.norm().max(1.0));
        }
    }

    #[test]
    fn theta_values() {
        let o = BallPoint::origin(2);
        assert_eq!(
            theta_form(&o, &[c(1.0, 0.0), c(0.0, 1.0)], SignConvention::Legendrian),
            ZERO
        );
        let z = pt(&[(0.5, 0.0), (0.0, 0.0)]);
        let dz = [c(1.0, 0.0), ZERO];
        for conv in [SignConvention::Definition, SignConvention::Legendrian] {
            let t = theta_form(&z, &dz, conv);
            assert!((t - c(0.0, -2.0 * conv.sigma())).norm() < 1e-14);
        }
    }

    #[test]
    fn vertical_alpha_is_minus_one() {
        let p = CirclePoint::with_phase(pt(&[(0.2, 0.1), (-0.3, 0.4)]), 0.7);
        let a = alpha_form(&p, &Tangent::vertical(&p), SignConvention::Legendrian);
        assert!((a - c(-1.0, 0.0)).norm() < 1e-15);
        assert!(fiber_tangency_defect(&p, &Tangent::vertical(&p)) < 1e-15);
    }

    #[test]
    fn circle_point_rejects_wrong_modulus() {
        let z = pt(&[(0.5, 0.0), (0.0, 0.0)]);
        assert!(matches!(
            CirclePoint::new(z.clone(), c(1.0, 0.0)),
            Err(Error::NotOnCircleBundle { .. })
        ));
        assert!(CirclePoint::new(z, c(0.75f64.powf(1.5), 0.0)).is_ok());
    }

    #[test]
    fn bundle_action_laws() {
        let mut rng = seeded(8);
        let z = random_ball_point(2, 0.7, &mut rng);
        let p = CirclePoint::with_phase(z, 1.3);
        let id = GroupElement::identity(2, crate::hermitian::Flavor::SU);
        let q = bundle_action(&id, &p).unwrap();
        assert!((q.zeta - p.zeta).norm() < 1e-15);
        let g = random_su(2, 1.0, &mut rng);
        let h = random_su(2, 1.0, &mut rng);
        let two_step = bundle_action(&g, &bundle_action(&h, &p).unwrap()).unwrap();
        let one_step = bundle_action(&g.compose(&h), &p).unwrap();
        assert!((two_step.zeta - one_step.zeta).norm() < 1e-10);
    }

    #[test]
    fn alpha_is_invariant_under_action() {
        let mut rng = seeded(2);
        for _ in 0..100 {
            let m = random_su(2, 1.5, &mut rng);
            let z = random_ball_point(2, 0.9, &mut rng);
            let p = CirclePoint::with_phase(z, 0.4);
            let t = Tangent {
                dz: vec![c(0.3, -0.2), c(0.1, 0.5)],
                dzeta: c(0.2, 0.7) * p.zeta,
            };
            let before = alpha_form(&p, &t, SignConvention::Legendrian);
            let after = alpha_form(
                &bundle_action(&m, &p).unwrap(),
                &push_tangent(&m, &p, &t).unwrap(),
                SignConvention::Legendrian,
            );
            assert!((before - after).norm() < 1e-9, "{before} vs {after}");
        }
    }

    #[test]
    fn definition_sign_is_not_invariant() {
        let mut rng = seeded(4);
        let m = random_su(2, 1.5, &mut rng);
        let p = CirclePoint::with_phase(random_ball_point(2, 0.8, &mut rng), 0.0);
        let t = Tangent::base(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        let conv = SignConvention::Definition;
        let before = alpha_form(&p, &t, conv);
        let after = alpha_form(
            &bundle_action(&m, &p).unwrap(),
            &push_tangent(&m, &p, &t).unwrap(),
            conv,
        );
        assert!((before - after).norm() > 1e-3);
    }

    #[test]
    fn kahler_form_at_center() {
        let o = BallPoint::origin(2);
        let u = Tangent::coordinate(2, 0).dz;
        let v = Tangent::coordinate(2, 1).dz;
        let phi = kahler_form(&o, &u, &v, 1.5);
        assert!((phi - c(-6.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn curvature_matches_kahler_form() {
        let mut rng = seeded(13);
        for _ in 0..20 {
            let z = random_ball_point(2, 0.8, &mut rng);
            for (a, b) in [(0, 1), (0, 2), (1, 3), (2, 3), (0, 3)] {
                let u = Tangent::coordinate(2, a).dz;
                let v = Tangent::coordinate(2, b).dz;
                for conv in [SignConvention::Definition, SignConvention::Legendrian] {
                    let r = curvature_check(&z, &u, &v, 1e-4, conv).unwrap();
                    assert!(r < 1e-5, "residual {r}");
                }
                let uv = d_theta(&z, &u, &v, 1e-4, SignConvention::Legendrian).unwrap();
                let vu = d_theta(&z, &v, &u, 1e-4, SignConvention::Legendrian).unwrap();
                assert!((uv + vu).norm() < 1e-10);
            }
        }
        let o = BallPoint::origin(2);
        assert!(matches!(
            d_theta(
                &o,
                &[c(1.0, 0.0), ZERO],
                &[ZERO, c(1.0, 0.0)],
                1e-9,
                SignConvention::Legendrian
            ),
            Err(Error::StepTooSmall { .. })
        ));
    }

    #[test]
    fn closed_loop_integral_is_invariant() {
        let mut rng = seeded(17);
        let m = random_su(2, 1.0, &mut rng);
        let loop_pt = |t: f64| {
            let z = vec![
                c(0.2, 0.1) + C64::from_polar(0.3, t),
                c(-0.1, 0.05) + C64::from_polar(0.2, 2.0 * t),
            ];
            let dz = vec![
                I * C64::from_polar(0.3, t),
                I * C64::from_polar(0.4, 2.0 * t),
            ];
            (BallPoint::new(z).unwrap(), dz)
        };
        let conv = SignConvention::Legendrian;
        let tau = 2.0 * std::f64::consts::PI;
        let base = theta_line_integral(|t| Ok(loop_pt(t)), 0.0, tau, 512, conv).unwrap();
        let moved = theta_line_integral(
            |t| {
                let (z, dz) = loop_pt(t);
                let p = CirclePoint::with_phase(z, 0.0);
                let pushed = push_tangent(&m, &p, &Tangent::base(dz))?;
                Ok((act(&m, p.base())?, pushed.dz))
            },
            0.0,
            tau,
            512,
            conv,
        )
        .unwrap();
        assert!((base - moved).norm() < 1e-8, "{base} vs {moved}");
    }

    #[test]
    fn inner_products() {
        let spec = QuadratureSpec::new(32, 16);
        let zero = WeightedFunction::zero(1);
        assert_eq!(petersson_inner(&zero, &zero, spec).unwrap().value, ZERO);
        // constant function: 4 * vol(B^2) = 2 pi^2
        let one = WeightedFunction::new(1, |_| C64::new(1.0, 0.0));
        let v = petersson_inner(&one, &one, spec).unwrap().value;
        assert!((v.re - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-12);
        let z1 = WeightedFunction::new(1, |z| z.coords()[0]);
        let z2 = WeightedFunction::new(1, |z| z.coords()[1]);
        assert!(petersson_inner(&z1, &z2, spec).unwrap().value.norm() < 1e-14);
        let other = WeightedFunction::new(2, |_| ZERO);
        assert!(petersson_inner(&one, &other, spec).is_err());
    }
}
