//! The invariant suite: every module invariant plus the numbered
//! acceptance criteria, rendered as a pass/fail table.
//!
//! Checks draw their random samples from ChaCha streams derived from one
//! seed, and every reduction underneath is order-fixed, so the report is
//! byte-identical across runs and thread counts.

use std::f64::consts::PI;

use hyperball_core::bundle::{
    alpha_form, bergman_kernel, bundle_action, curvature_check, petersson_inner, push_tangent,
    theta_line_integral, CirclePoint, SignConvention, Tangent,
};
use hyperball_core::coherent::{
    basis_function, coherent_eval, equivariance_check, kernel_double_series, reproducing_check,
    BasisIndex, CoherentState,
};
use hyperball_core::exact::{format_rational, to_f64};
use hyperball_core::hermitian::{jacobian_matrix, EPS_GRP};
use hyperball_core::quadrature::QuadratureSpec;
use hyperball_core::random::{random_ball_point, random_hyperbolic, random_su, seeded, SampleRng};
use hyperball_core::series::residue::{
    c1_closed_form, c1_residue, c1_sum, radial_integral, radial_integral_beta,
};
use hyperball_core::series::torus_integral::{
    constant_variants, default_torus_quadrature, empirical_constant,
};
use hyperball_core::series::{
    example_cyclic, example_gamma0, example_second_generator, example_two_generator, theta_series,
    LatticeSpec, SeedData, SeriesSpec,
};
use hyperball_core::spectral::{
    eigen_residual, hyperbolic_data, normal_form_coefficients, normal_form_residual,
};
use hyperball_core::torus::{
    bs_integral, gamma_in_coords, legendrian_residual, reduce_r, CylCoords, TorusLoop, TorusSpec,
};
use hyperball_core::{
    act, build_a, classify_element, classify_vector, herm_form, jacobian_det, normal_form,
    BallPoint, ElementClass, GroupElement, Result, C64,
};
use rand::Rng;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Pass,
    Fail,
    /// Reported discrepancy that does not fail the suite.
    Flag,
}

impl Status {
    fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Flag => "FLAG",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    Below,
    Above,
    Equal,
    Report,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Below => "<",
            Relation::Above => ">",
            Relation::Equal => "==",
            Relation::Report => "vs",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub relation: Relation,
    pub status: Status,
}

fn pass_if(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

impl Check {
    pub fn below(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound,
            relation: Relation::Below,
            status: pass_if(value < bound),
        }
    }

    pub fn above(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound,
            relation: Relation::Above,
            status: pass_if(value > bound),
        }
    }

    pub fn equal(name: impl Into<String>, value: f64, expected: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound: expected,
            relation: Relation::Equal,
            status: pass_if(value == expected),
        }
    }

    /// Flag `value` when it differs from `reference`.
    pub fn flag(name: impl Into<String>, value: f64, reference: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound: reference,
            relation: Relation::Report,
            status: if value == reference { Status::Pass } else { Status::Flag },
        }
    }

    fn error(name: &str, e: &hyperball_core::Error) -> Self {
        Check {
            name: format!("{name}: {e}"),
            value: f64::NAN,
            bound: f64::NAN,
            relation: Relation::Report,
            status: Status::Fail,
        }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Section {
    /// Acceptance criterion number, if the section is one.
    pub criterion: Option<u8>,
    pub title: String,
    pub checks: Vec<Check>,
}

impl Section {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub sections: Vec<Section>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.sections.iter().all(Section::passed)
    }

    pub fn render(&self) -> String {
        let mut out = format!("hyperball invariant suite, seed {}\n", self.seed);
        for s in &self.sections {
            let tag = match s.criterion {
                Some(n) => format!("[{n}] "),
                None => String::new(),
            };
            let status = if s.passed() { "PASS" } else { "FAIL" };
            out.push_str(&format!("\n{status} {tag}{}\n", s.title));
            for c in &s.checks {
                out.push_str(&format!(
                    "  {}  {:<62} {:>11.3e} {:>2} {:>10.3e}\n",
                    c.status.label(),
                    c.name,
                    c.value,
                    c.relation.symbol(),
                    c.bound
                ));
            }
        }
        let total: usize = self.sections.iter().map(|s| s.checks.len()).sum();
        let failed: usize = self
            .sections
            .iter()
            .flat_map(|s| &s.checks)
            .filter(|c| !c.passed())
            .count();
        let flagged: usize = self
            .sections
            .iter()
            .flat_map(|s| &s.checks)
            .filter(|c| c.status == Status::Flag)
            .count();
        out.push_str(&format!(
            "\n{} checks, {failed} failed, {flagged} flagged\n",
            total
        ));
        out
    }
}

fn section(criterion: Option<u8>, title: &str, checks: Result<Vec<Check>>) -> Section {
    Section {
        criterion,
        title: title.into(),
        checks: checks.unwrap_or_else(|e| vec![Check::error(title, &e)]),
    }
}

/// Independent stream per section.
fn stream(seed: u64, id: u64) -> SampleRng {
    seeded(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(id))
}

fn rel(a: C64, b: C64) -> f64 {
    let s = a.norm().max(b.norm());
    if s == 0.0 {
        0.0
    } else {
        (a - b).norm() / s
    }
}

fn pt(parts: &[(f64, f64)]) -> Result<BallPoint> {
    BallPoint::from_real_imag(parts)
}

// ---- acceptance criteria -------------------------------------------------

/// Cocycle identity and form isometry over 1000 random triples.
pub fn group_algebra(seed: u64) -> Result<Vec<Check>> {
    let mut rng = stream(seed, 1);
    let (mut cocycle, mut isometry) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let g1 = random_su(2, 1.0, &mut rng);
        let g2 = random_su(2, 1.0, &mut rng);
        let z = random_ball_point(2, 0.9, &mut rng);
        let w = random_ball_point(2, 0.9, &mut rng);
        let lhs = jacobian_det(&g1.compose(&g2), &z)?;
        let rhs = jacobian_det(&g1, &act(&g2, &z)?)? * jacobian_det(&g2, &z)?;
        cocycle = cocycle.max(rel(lhs, rhs));
        let (zl, wl) = (z.lift(), w.lift());
        let moved = herm_form(&g1.apply(&zl), &g1.apply(&wl))?;
        isometry = isometry.max(rel(moved, herm_form(&zl, &wl)?));
    }
    Ok(vec![
        Check::below("cocycle identity, 1000 triples (relative)", cocycle, 1e-10),
        Check::below("form isometry <gz,gw> = <z,w>, 1000 pairs (relative)", isometry, 1e-10),
    ])
}

/// Normalizer recovery for 20 random conjugates of normal forms.
pub fn normal_form_recovery(seed: u64) -> Result<Vec<Check>> {
    let mut rng = stream(seed, 2);
    let (mut residual, mut lambda_err, mut ab) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let lambda = rng.random_range(1.2..6.0);
        let m = random_su(2, 1.0, &mut rng);
        let g = normal_form(lambda)?.conjugate_by(&m);
        let d = hyperbolic_data(&g, EPS_GRP)?;
        let a = build_a(&d)?;
        residual = residual.max(normal_form_residual(&d, &a)?);
        lambda_err = lambda_err.max((d.lambda - lambda).abs() / lambda);
        let (ca, cb) = normal_form_coefficients(lambda);
        ab = ab.max((ca * ca - cb * cb - 1.0).abs());
    }
    Ok(vec![
        Check::below("max |A^-1 g A - normal_form(lambda)|, 20 elements", residual, 1e-8),
        Check::below("recovered lambda (relative)", lambda_err, 1e-9),
        Check::below("|a^2 - b^2 - 1|", ab, 1e-14),
    ])
}

/// R and phi are fixed by the normal form and r scales by lambda^2.
pub fn cylinder_invariance(seed: u64) -> Result<Vec<Check>> {
    let mut rng = stream(seed, 3);
    let (mut drift, mut mult) = (0.0f64, 0.0f64);
    for lambda in [1.5, 2.0, 3.7, 6.0] {
        let spec = TorusSpec::normal(1, 1, lambda)?;
        let l2 = lambda * lambda;
        for _ in 0..250 {
            let c = CylCoords::new(
                rng.random_range(-2.3f64..2.3).exp(),
                rng.random_range(0.1..PI - 0.1),
                rng.random_range(0.0..0.95),
                rng.random_range(0.0..2.0 * PI),
            )?;
            let g = gamma_in_coords(&spec, &c)?;
            drift = drift.max((g.phi - c.phi).abs()).max((g.radius - c.radius).abs());
            mult = mult.max((g.r / c.r - l2).abs() / l2);
        }
    }
    Ok(vec![
        Check::below("max drift of phi and R, 1000 points", drift, 1e-12),
        Check::below("r multiplier vs lambda^2 (relative)", mult, 1e-12),
    ])
}

/// The lifted tori are Legendrian; a perturbed radius is not.
pub fn legendrian(seed: u64) -> Result<Vec<Check>> {
    let mut rng = stream(seed, 4);
    let g = random_hyperbolic(2.5, 0.8, &mut rng);
    let mut worst = 0.0f64;
    for k in 1..=3 {
        for l in 1..=3 {
            let spec = TorusSpec::for_element(k, l, &g)?;
            worst = worst.max(legendrian_residual(&spec, 200)?.max());
        }
    }
    let spec = TorusSpec::for_element(1, 1, &g)?;
    let off = spec.clone().with_radius(0.9 * spec.radius)?;
    let control = legendrian_residual(&off, 200)?.torus;
    Ok(vec![
        Check::below("max |alpha(tangent)|, 200 points, (k,l) in {1,2,3}^2", worst, 1e-8),
        Check::above("control: radius 0.9 R0", control, 1e-2),
    ])
}

/// Bohr-Sommerfeld values of the theta loops.
pub fn bohr_sommerfeld(seed: u64) -> Result<Vec<Check>> {
    let mut rng = stream(seed, 5);
    let g = random_hyperbolic(2.5, 0.8, &mut rng);
    let mut worst = 0.0f64;
    for l in 1..=3u32 {
        let spec = TorusSpec::for_element(1, l, &g)?;
        for m in 1..=2i64 {
            let v = bs_integral(&spec, TorusLoop::Theta(m))?;
            worst = worst.max((v.value + 3.0 * (l as f64) * m as f64).abs());
        }
    }
    Ok(vec![Check::below(
        "|bs(theta loop m) + 3lm|, l in 1..3, m in 1..2",
        worst,
        1e-6,
    )])
}

fn basis(l: u32, m: u32, k: u32) -> Result<hyperball_core::bundle::WeightedFunction> {
    basis_function(BasisIndex::new(l, m, k)?)
}

/// Gram matrix, reproducing property and the kernel double series.
pub fn bergman_basis(_seed: u64) -> Result<Vec<Check>> {
    let fs = (0..=2)
        .flat_map(|l| (0..=2).map(move |m| (l, m)))
        .map(|(l, m)| basis(l, m, 1))
        .collect::<Result<Vec<_>>>()?;
    let quad = QuadratureSpec::new(128, 64);
    let (g, _) = hyperball_core::bundle::gram_matrix(&fs, quad)?;
    let mut gram = 0.0f64;
    for i in 0..fs.len() {
        for j in 0..fs.len() {
            let id = if i == j { 1.0 } else { 0.0 };
            gram = gram.max((g[(i, j)] - id).norm());
        }
    }
    let mut repro = 0.0f64;
    let points = [
        CirclePoint::with_phase(pt(&[(0.3, 0.1), (-0.2, 0.0)])?, 0.7),
        CirclePoint::with_phase(pt(&[(-0.1, 0.25), (0.2, -0.15)])?, -1.2),
    ];
    for (l, m) in [(1, 0), (2, 1)] {
        let f = basis(l, m, 1)?;
        for p in &points {
            let cs = CoherentState::new(p.clone(), 1)?;
            repro = repro.max(reproducing_check(&f, &cs, QuadratureSpec::default())?.relative);
        }
    }
    let mut series = 0.0f64;
    for (k, x, y) in [(1u32, 0.2f64, 0.15f64), (2, 0.1, 0.25), (3, 0.15, 0.1)] {
        let closed = (1..3 * k as u64).product::<u64>() as f64 / (1.0 - x - y).powi(3 * k as i32);
        let trunc = kernel_double_series(k, x, y, 200);
        series = series.max(((trunc - closed) / closed).abs());
    }
    Ok(vec![
        Check::below("Gram matrix of F_{l,m,1}, l,m <= 2, (128,64) nodes", gram, 1e-4),
        Check::below("reproducing residual, 2 functions x 2 points (relative)", repro, 1e-3),
        Check::below("kernel double series vs (3k-1)!/(1-x-y)^{3k}", series, 1e-8),
    ])
}

/// Coherent states move with the group.
pub fn coherent_equivariance(seed: u64) -> Result<Vec<Check>> {
    let mut rng = stream(seed, 7);
    let cs = CoherentState::new(CirclePoint::with_phase(pt(&[(0.2, 0.1), (0.0, -0.3)])?, 0.5), 1)?;
    let samples: Vec<CirclePoint> = (0..8)
        .map(|j| CirclePoint::with_phase(random_ball_point(2, 0.7, &mut rng), j as f64))
        .collect();
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let g = random_su(2, 1.0, &mut rng);
        worst = worst.max(equivariance_check(&g, &cs, &samples)?);
    }
    Ok(vec![Check::below("equivariance residual, 50 elements", worst, 1e-9)])
}

/// Exact residue coefficients and the radial integral.
pub fn residues(_seed: u64) -> Result<Vec<Check>> {
    let r11 = c1_residue(1, 1)?;
    let expected = -1.0 / 140.0;
    let exact_ok = format_rational(&r11) == "-1/140";
    let radial = radial_integral(-1.0, 1, 1, 16, 1e-14)?.value.re;
    let beta = radial_integral_beta(-1.0, 1, 1)?;
    let mut mismatches = 0.0;
    for k in 1..=3 {
        for l in 1..=3 {
            if c1_residue(k, l)? != c1_closed_form(k, l)? {
                mismatches += 1.0;
            }
        }
    }
    Ok(vec![
        Check::equal("c1_residue(1,1) == -1/140 exactly", if exact_ok { 0.0 } else { 1.0 }, 0.0),
        Check::below("radial_integral(-1,1,1) vs 1/140 (relative)", (radial + expected).abs() * 140.0, 1e-10),
        Check::below("radial_integral(-1,1,1) vs Beta oracle (relative)", (radial - beta).abs() / beta, 1e-10),
        Check::equal("closed-form mismatches over (k,l) in {1,2,3}^2", mismatches, 0.0),
        Check::flag("printed c1_sum(1,1) vs residue coefficient", to_f64(&c1_sum(1, 1)?), to_f64(&r11)),
    ])
}

/// Base points used for the torus-integral ratio.
pub fn ratio_points() -> Result<Vec<CirclePoint>> {
    Ok(vec![
        CirclePoint::with_phase(pt(&[(0.3, 0.0), (0.2, 0.0)])?, 0.0),
        CirclePoint::with_phase(pt(&[(0.1, 0.2), (-0.3, 0.1)])?, 0.4),
        CirclePoint::with_phase(pt(&[(-0.2, -0.1), (0.1, 0.25)])?, 1.3),
        CirclePoint::with_phase(pt(&[(0.0, 0.35), (0.05, 0.0)])?, -0.8),
        CirclePoint::with_phase(pt(&[(0.15, -0.15), (-0.1, -0.2)])?, 2.5),
    ])
}

/// `torus_integral / (q_l zeta^{2k})` does not depend on the base point.
pub fn torus_integral_structure(seed: u64) -> Result<Vec<Check>> {
    let mut rng = stream(seed, 9);
    let g = random_hyperbolic(2.0, 0.6, &mut rng);
    let spec = TorusSpec::for_element(1, 1, &g)?;
    let quad = default_torus_quadrature();
    let values = ratio_points()?
        .iter()
        .map(|p| empirical_constant(&spec, p, quad))
        .collect::<Result<Vec<_>>>()?;
    let mean = values.iter().sum::<C64>() / values.len() as f64;
    let spread = values.iter().map(|v| (v - mean).norm()).fold(0.0, f64::max) / mean.norm();
    let derived = constant_variants(1, 1, spec.hyp.pairing().conj())?.derived;
    Ok(vec![
        Check::below("ratio spread over 5 base points (relative)", spread, 1e-3),
        Check::below("ratio vs derived constant (relative)", rel(mean, derived), 1e-3),
    ])
}

/// Seed invariance, the degenerate lattice and convergence trends.
pub fn series_trends(seed: u64) -> Result<Vec<Check>> {
    let mut rng = stream(seed, 10);
    let g0 = example_gamma0();
    let hyp = hyperbolic_data(&g0, EPS_GRP)?;
    let mut inv = 0.0f64;
    for (k, l) in [(1u32, 1u32), (1, 2), (2, 1)] {
        let sd = SeedData::from_hyperbolic(k, l, hyp.clone())?;
        for _ in 0..50 {
            let z = random_ball_point(2, 0.8, &mut rng);
            let a = sd.q_l(&z)?;
            let b = sd.q_l(&act(&g0, &z)?)? * jacobian_det(&g0, &z)?.powu(2 * k);
            inv = inv.max((a - b).norm() / a.norm().max(1.0));
        }
    }
    let cyclic = example_cyclic(4)?;
    let reps = cyclic.coset_reps()?;
    let mut degenerate = 0.0f64;
    for _ in 0..5 {
        let z = random_ball_point(2, 0.8, &mut rng);
        let sums = theta_series(&z, &cyclic.seed, &reps, &[])?;
        let last = sums.last().expect("shell 0").value;
        degenerate = degenerate.max((last - cyclic.seed.q_l(&z)?).norm());
    }
    let spec = example_two_generator(5)?;
    let reps = spec.coset_reps()?;
    let h = example_second_generator();
    let z = pt(&[(0.3, 0.0), (0.2, 0.0)])?;
    let sums = theta_series(&z, &spec.seed, &reps, &[h.clone(), h.inverse()])?;
    let gap_ratio = sums[2..=5]
        .windows(2)
        .map(|w| w[1].cauchy_gap / w[0].cauchy_gap)
        .fold(0.0, f64::max);
    let auto_ratio = sums[5].automorphy_residual / sums[2].automorphy_residual;
    Ok(vec![
        Check::below("term-level gamma_0 invariance", inv, 1e-11),
        Check::equal("cyclic lattice: number of cosets", reps_len(&cyclic)? as f64, 1.0),
        Check::equal("cyclic lattice: |Theta - q_l|", degenerate, 0.0),
        Check::below("two generators: max gap(s+1)/gap(s), shells 2..5", gap_ratio, 1.0),
        Check::below("two generators: automorphy shell 5 / shell 2", auto_ratio, 0.1),
    ])
}

fn reps_len(spec: &SeriesSpec) -> Result<usize> {
    Ok(spec.coset_reps()?.len())
}

// ---- module invariants -----------------------------------------------------

pub fn form_properties(seed: u64) -> Result<Vec<Check>> {
    let mut rng = stream(seed, 21);
    let (mut sym, mut class_changes, mut outside) = (0.0f64, 0.0, 0.0f64);
    for _ in 0..500 {
        let v: Vec<C64> = (0..6).map(|_| C64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect();
        let (a, b) = (hyperball_core::HVec::new(v[..3].to_vec()), hyperball_core::HVec::new(v[3..].to_vec()));
        sym = sym.max((herm_form(&a, &b)? - herm_form(&b, &a)?.conj()).norm());
        let g = random_su(2, 1.5, &mut rng);
        let q = herm_form(&a, &a)?.re;
        if q.abs() > 1e-3 && classify_vector(&a, 1e-9)? != classify_vector(&g.apply(&a), 1e-9)? {
            class_changes += 1.0;
        }
        let z = random_ball_point(2, 0.99, &mut rng);
        outside = outside.max(act(&g, &z)?.norm_sqr());
    }
    Ok(vec![
        Check::below("herm_form(z,w) - conj(herm_form(w,z))", sym, 1e-14),
        Check::equal("sign-class changes under the action", class_changes, 0.0),
        Check::below("max |act(g,z)|^2", outside, 1.0),
    ])
}

pub fn spectral_properties(seed: u64) -> Result<Vec<Check>> {
    let mut rng = stream(seed, 22);
    let (mut eig, mut conj, mut axis) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let lambda = rng.random_range(1.2..8.0);
        let g = random_hyperbolic(lambda, 1.0, &mut rng);
        eig = eig.max(eigen_residual(&hyperbolic_data(&g, EPS_GRP)?));
        let h = random_su(2, 1.0, &mut rng);
        match classify_element(&g.conjugate_by(&h), EPS_GRP)? {
            ElementClass::Hyperbolic(d) => conj = conj.max((d.lambda - lambda).abs() / lambda),
            _ => conj = f64::INFINITY,
        }
        let t = rng.random_range(-0.99..0.99);
        let w = act(&normal_form(lambda)?, &pt(&[(0.0, 0.0), (t, 0.0)])?)?;
        axis = axis.max(w.coords()[0].norm()).max(w.coords()[1].im.abs());
    }
    Ok(vec![
        Check::below("eigen residuals |g u - mu u|", eig, 1e-9),
        Check::below("classification under conjugation: lambda drift", conj, 1e-9),
        Check::below("normal form keeps the axis {z_1 = 0, z_2 real}", axis, 1e-14),
    ])
}

fn push(g: &GroupElement, z: &BallPoint, dz: &[C64]) -> Result<Vec<C64>> {
    let j = jacobian_matrix(g, z)?;
    Ok((0..dz.len())
        .map(|i| (0..dz.len()).map(|c| j[(i, c)] * dz[c]).sum())
        .collect())
}

pub fn bundle_properties(seed: u64) -> Result<Vec<Check>> {
    let mut rng = stream(seed, 23);
    let conv = SignConvention::Legendrian;
    let (mut bergman, mut alpha) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let g = random_su(2, 1.0, &mut rng);
        let z = random_ball_point(2, 0.8, &mut rng);
        let w = random_ball_point(2, 0.8, &mut rng);
        let k = bergman_kernel(&z, &w)?;
        let moved = bergman_kernel(&act(&g, &z)?, &act(&g, &w)?)?
            * jacobian_det(&g, &z)?
            * jacobian_det(&g, &w)?.conj();
        bergman = bergman
            .max(rel(moved, k))
            .max(rel(k, bergman_kernel(&w, &z)?.conj()));
        let p = CirclePoint::with_phase(z, rng.random_range(0.0..2.0 * PI));
        let mut t = Tangent::base(
            (0..2)
                .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
        );
        t.dzeta = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let before = alpha_form(&p, &t, conv);
        let after = alpha_form(&bundle_action(&g, &p)?, &push_tangent(&g, &p, &t)?, conv);
        alpha = alpha.max((after - before).norm() / before.norm().max(1.0));
    }
    let mut curvature = 0.0f64;
    for _ in 0..6 {
        let z = random_ball_point(2, 0.7, &mut rng);
        for (i, j) in [(0, 1), (0, 2), (1, 3), (2, 3)] {
            let u = Tangent::coordinate(2, i).dz;
            let v = Tangent::coordinate(2, j).dz;
            curvature = curvature.max(curvature_check(&z, &u, &v, 1e-4, SignConvention::Definition)?);
            curvature = curvature.max(curvature_check(&z, &u, &v, 1e-4, conv)?);
        }
    }
    let mut loops = 0.0f64;
    for _ in 0..5 {
        let m = random_su(2, 0.8, &mut rng);
        let c = random_ball_point(2, 0.5, &mut rng);
        let (c0, c1, rho) = (c.coords()[0], c.coords()[1], 0.2);
        let curve = move |t: f64| {
            let (s, co) = t.sin_cos();
            let z = BallPoint::new(vec![c0 + rho * C64::new(co, 0.3 * s), c1 + rho * C64::new(0.5 * s, co)])?;
            Ok((z, vec![rho * C64::new(-s, 0.3 * co), rho * C64::new(0.5 * co, -s)]))
        };
        let moved = |t: f64| {
            let (z, dz) = curve(t)?;
            let d = push(&m, &z, &dz)?;
            Ok((act(&m, &z)?, d))
        };
        let a = theta_line_integral(curve, 0.0, 2.0 * PI, 256, conv)?;
        let b = theta_line_integral(moved, 0.0, 2.0 * PI, 256, conv)?;
        loops = loops.max((a - b).norm());
    }
    let f = basis(1, 1, 1)?;
    let coarse = QuadratureSpec::new(32, 32);
    let fine = QuadratureSpec::new(64, 64);
    let doubling = (petersson_inner(&f, &f, coarse)?.value - petersson_inner(&f, &f, fine)?.value).norm();
    Ok(vec![
        Check::below("Bergman symmetry and transformation law (relative)", bergman, 1e-10),
        Check::below("alpha invariance, 100 triples", alpha, 1e-9),
        Check::below("|d theta + sigma Phi| for both sign conventions", curvature, 1e-5),
        Check::below("closed-loop integral of theta under M", loops, 1e-8),
        Check::below("petersson_inner change under node doubling", doubling, 10.0 * fine.tol),
    ])
}

pub fn torus_properties(seed: u64) -> Result<Vec<Check>> {
    let mut rng = stream(seed, 24);
    let g = random_hyperbolic(2.5, 0.8, &mut rng);
    let mut transport = 0.0f64;
    for (k, l) in [(1, 1), (2, 3), (3, 2)] {
        let rep = legendrian_residual(&TorusSpec::for_element(k, l, &g)?, 200)?;
        transport = transport.max((rep.torus - rep.transported).abs());
    }
    let spec = TorusSpec::for_element(1, 1, &g)?;
    let l2 = spec.lambda().powi(2);
    let mut tiling = 0.0f64;
    for _ in 0..200 {
        let r: f64 = rng.random_range(-8.0f64..8.0).exp();
        let (r0, n) = reduce_r(&spec, r)?;
        let inside = (1.0..l2).contains(&r0);
        let err = (r0 * l2.powi(n as i32) - r).abs() / r;
        tiling = tiling.max(if inside { err } else { f64::INFINITY });
    }
    let mut radial = 0.0f64;
    for k in 1..=2 {
        radial = radial.max(bs_integral(&TorusSpec::normal(k, 1, 2.0)?, TorusLoop::Radial)?.integrality_defect);
    }
    Ok(vec![
        Check::below("Legendrian residual: torus vs A-transported", transport, 1e-9),
        Check::below("r-domain [1, lambda^2) tiles orbits (relative)", tiling, 1e-12),
        Check::below("radial loop integrality defect", radial, 1e-6),
    ])
}

pub fn coherent_properties(seed: u64) -> Result<Vec<Check>> {
    let mut rng = stream(seed, 25);
    let mut herm = 0.0f64;
    for _ in 0..50 {
        let p = CirclePoint::with_phase(random_ball_point(2, 0.8, &mut rng), rng.random_range(0.0..2.0 * PI));
        let q = CirclePoint::with_phase(random_ball_point(2, 0.8, &mut rng), rng.random_range(0.0..2.0 * PI));
        for k in [1, 2] {
            let a = coherent_eval(&CoherentState::new(q.clone(), k)?, &p)?;
            let b = coherent_eval(&CoherentState::new(p.clone(), k)?, &q)?;
            herm = herm.max(rel(a, b.conj()));
        }
    }
    let f = basis(2, 1, 1)?;
    let cs = CoherentState::new(CirclePoint::with_phase(pt(&[(0.5, 0.2), (0.3, -0.2)])?, 0.0), 1)?;
    let coarse = reproducing_check(&f, &cs, QuadratureSpec::new(8, 16))?.absolute;
    let fine = reproducing_check(&f, &cs, QuadratureSpec::new(16, 32))?.absolute;
    Ok(vec![
        Check::below("coherent_eval Hermitian in its two points (relative)", herm, 1e-12),
        Check::above("reproducing residual ratio under node doubling", coarse / fine, 4.0),
    ])
}

pub fn series_properties(seed: u64) -> Result<Vec<Check>> {
    let mut rng = stream(seed, 26);
    let spec = example_two_generator(3)?;
    let reps = spec.coset_reps()?;
    let z = random_ball_point(2, 0.5, &mut rng);
    let mut choice = 0.0f64;
    for (i, g) in reps.iter().enumerate() {
        let moved = spec.gamma0.pow((i as i64 % 7) - 3).compose(g);
        let a = spec.seed.term(g, &z)?;
        choice = choice.max((a - spec.seed.term(&moved, &z)?).norm() / a.norm().max(1.0));
    }
    let g0 = example_gamma0();
    let lat = LatticeSpec::new(vec![g0.clone()], 6)?;
    let s1 = SeriesSpec::new(1, 1, g0.clone(), lat.clone())?;
    let s3 = SeriesSpec::new(1, 1, g0.pow(3), lat)?;
    let v1 = theta_series(&z, &s1.seed, &s1.coset_reps()?, &[])?.last().expect("shell 0").value;
    let v3 = theta_series(&z, &s3.seed, &s3.coset_reps()?, &[])?.last().expect("shell 0").value;
    let power = rel(v3, v1 * 3.0);
    let mut radial = 0.0f64;
    for (k, l, a) in [(1, 2, -0.7), (2, 1, -3.0), (3, 3, -1.3)] {
        let num = radial_integral(a, k, l, 16, 1e-14)?.value.re;
        let res = -to_f64(&c1_residue(k, l)?) * f64::abs(a).powi(-((3 * k + l) as i32));
        radial = radial.max(((num - res) / res).abs());
    }
    let mut constants = 0.0f64;
    let p = CirclePoint::with_phase(pt(&[(0.3, 0.0), (0.2, 0.1)])?, 0.2);
    for (k, l) in [(1, 2), (2, 1)] {
        let spec = TorusSpec::normal(k, l, 2.0)?;
        let c = empirical_constant(&spec, &p, default_torus_quadrature())?;
        let derived = constant_variants(k, l, spec.hyp.pairing().conj())?.derived;
        constants = constants.max(rel(c, derived));
    }
    Ok(vec![
        Check::below("representative choice gamma_0^m g", choice, 1e-11),
        Check::below("Theta for <gamma_0^3> equals 3 Theta for <gamma_0>", power, 1e-11),
        Check::below("c1_residue vs radial_integral (relative)", radial, 1e-10),
        Check::below("empirical vs derived constant, (k,l) = (1,2), (2,1)", constants, 1e-3),
    ])
}

type SectionFn = fn(u64) -> Result<Vec<Check>>;

/// `(criterion, title, check)` for every section, in report order.
pub const SECTIONS: &[(Option<u8>, &str, SectionFn)] = &[
    (Some(1), "group algebra", group_algebra),
    (Some(2), "normal form recovery", normal_form_recovery),
    (Some(3), "cylinder invariance under gamma", cylinder_invariance),
    (Some(4), "Legendrian tori", legendrian),
    (Some(5), "Bohr-Sommerfeld theta loops", bohr_sommerfeld),
    (Some(6), "weighted Bergman basis and kernel", bergman_basis),
    (Some(7), "coherent-state equivariance", coherent_equivariance),
    (Some(8), "residue calculus", residues),
    (Some(9), "torus integral structure", torus_integral_structure),
    (Some(10), "relative Poincare series", series_trends),
    (None, "hermitian form and action", form_properties),
    (None, "spectral data", spectral_properties),
    (None, "Bergman kernel and circle bundle", bundle_properties),
    (None, "torus geometry", torus_properties),
    (None, "coherent states", coherent_properties),
    (None, "series and residues", series_properties),
];

pub fn run_section(seed: u64, index: usize) -> Section {
    let (criterion, title, f) = SECTIONS[index];
    section(criterion, title, f(seed))
}

/// Section for acceptance criterion `n`.
pub fn run_criterion(seed: u64, n: u8) -> Option<Section> {
    SECTIONS
        .iter()
        .position(|s| s.0 == Some(n))
        .map(|i| run_section(seed, i))
}

pub fn run_suite(seed: u64) -> SuiteReport {
    SuiteReport {
        seed,
        sections: (0..SECTIONS.len()).map(|i| run_section(seed, i)).collect(),
    }
}
