//! One function per subcommand. Each returns the rendered report and
//! whether its assertions held.

use std::path::Path;

use hyperball_core::bundle::CirclePoint;
use hyperball_core::coherent::{basis_function, kernel_double_series, reproducing_check, BasisIndex, CoherentState, ReproducingReport};
use hyperball_core::exact::format_rational;
use hyperball_core::hermitian::{form_residual, validate_group, Flavor, MatrixJson};
use hyperball_core::quadrature::QuadratureSpec;
use hyperball_core::series::residue::{c1_closed_form, c1_residue, c1_sum};
use hyperball_core::series::torus_integral::{constant_variants, default_torus_quadrature, empirical_constant};
use hyperball_core::series::{theta_series, LatticeSpec, PartialSum, SeriesSpec};
use hyperball_core::spectral::{normal_form_residual, HyperbolicReport};
use hyperball_core::torus::{bs_integral, legendrian_residual, BsValue, LegendrianReport, TorusLoop, TorusSpec};
use hyperball_core::{build_a, classify_element, BallPoint, ElementClass, Error, C64};
use serde::Serialize;

use crate::{io, suite, CliError, Report, RunConfig};

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn cx(c: C64) -> [f64; 2] {
    [c.re, c.im]
}

fn point_pairs(z: &BallPoint) -> Vec<[f64; 2]> {
    z.coords().iter().map(|c| cx(*c)).collect()
}

#[derive(Serialize)]
struct ValidateReport {
    size: usize,
    form_residual: f64,
    det: [f64; 2],
    /// "SU", "U", or null when the form is not preserved.
    group: Option<&'static str>,
}

pub fn validate(config: &RunConfig, file: &Path) -> Result<Report, CliError> {
    let m = io::read_matrix(file)?.to_matrix()?;
    let tol = config.tolerances.group;
    let group = if validate_group(m.clone(), Flavor::SU, tol).is_ok() {
        Some("SU")
    } else if validate_group(m.clone(), Flavor::U, tol).is_ok() {
        Some("U")
    } else {
        None
    };
    let report = ValidateReport {
        size: m.nrows(),
        form_residual: form_residual(&m),
        det: cx(m.determinant()),
        group,
    };
    Ok(Report {
        text: json(&report)?,
        passed: group.is_some(),
    })
}

#[derive(Serialize)]
struct LoxodromicReport {
    lambda: [f64; 2],
    taus: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct ClassifyReport {
    tag: &'static str,
    hyperbolic: Option<HyperbolicReport>,
    normalizer: Option<MatrixJson>,
    normal_form_residual: Option<f64>,
    normalizer_error: Option<String>,
    loxodromic: Option<LoxodromicReport>,
}

pub fn classify(config: &RunConfig, file: &Path) -> Result<Report, CliError> {
    let tol = config.tolerances.group;
    let g = validate_group(io::read_matrix(file)?.to_matrix()?, Flavor::U, tol)?;
    let class = classify_element(&g, tol)?;
    let mut report = ClassifyReport {
        tag: class.tag(),
        hyperbolic: None,
        normalizer: None,
        normal_form_residual: None,
        normalizer_error: None,
        loxodromic: None,
    };
    match &class {
        ElementClass::Hyperbolic(d) => {
            report.hyperbolic = Some(HyperbolicReport::new(d));
            match build_a(d) {
                Ok(a) => {
                    report.normal_form_residual = Some(normal_form_residual(d, &a)?);
                    report.normalizer = Some(MatrixJson::from_matrix(a.matrix()));
                }
                Err(e) => report.normalizer_error = Some(e.to_string()),
            }
        }
        ElementClass::Loxodromic(d) => {
            report.loxodromic = Some(LoxodromicReport {
                lambda: cx(d.lambda),
                taus: d.taus.iter().map(|t| cx(*t)).collect(),
            })
        }
        ElementClass::EllipticOrOther => {}
    }
    Ok(Report {
        text: json(&report)?,
        passed: true,
    })
}

#[derive(Serialize)]
struct BsEntry {
    #[serde(flatten)]
    bs: BsValue,
    /// `-3 l m` for theta loops.
    expected: Option<f64>,
}

#[derive(Serialize)]
struct BsReport {
    k: u32,
    l: u32,
    lambda: f64,
    radius: f64,
    legendrian_residual: LegendrianReport,
    bs_values: Vec<BsEntry>,
    radial_error: Option<String>,
    passed: bool,
}

pub fn bs_check(config: &RunConfig, k: u32, l: u32, lambda: f64, matrix: Option<&Path>) -> Result<Report, CliError> {
    let spec = match matrix {
        Some(path) => TorusSpec::for_element(k, l, &io::read_group(path)?)?,
        None => TorusSpec::normal(k, l, lambda)?,
    };
    let tol = config.tolerances;
    let legendrian = legendrian_residual(&spec, 200)?;
    let mut passed = legendrian.max() < tol.legendrian;
    let mut entries = Vec::new();
    for m in [1i64, 2] {
        let bs = bs_integral(&spec, TorusLoop::Theta(m))?;
        let expected = -3.0 * l as f64 * m as f64;
        passed &= (bs.value - expected).abs() < tol.bs_value;
        entries.push(BsEntry {
            bs,
            expected: Some(expected),
        });
    }
    let mut radial_error = None;
    match bs_integral(&spec, TorusLoop::Radial) {
        Ok(bs) => {
            passed &= bs.integrality_defect < tol.bs_value;
            entries.push(BsEntry { bs, expected: None });
        }
        Err(e @ Error::CurveNotClosed) => radial_error = Some(e.to_string()),
        Err(e) => return Err(e.into()),
    }
    let report = BsReport {
        k,
        l,
        lambda: spec.lambda(),
        radius: spec.radius,
        legendrian_residual: legendrian,
        bs_values: entries,
        radial_error,
        passed,
    };
    Ok(Report {
        text: json(&report)?,
        passed,
    })
}

#[derive(Serialize)]
struct ReproducingEntry {
    l: u32,
    m: u32,
    point: Vec<[f64; 2]>,
    phase: f64,
    #[serde(flatten)]
    report: ReproducingReport,
}

#[derive(Serialize)]
struct SeriesEntry {
    x: f64,
    y: f64,
    terms: u64,
    relative_error: f64,
}

#[derive(Serialize)]
struct KernelReport {
    k: u32,
    n_rad: usize,
    n_ang: usize,
    gram_deviation: f64,
    gram_est_error: f64,
    reproducing: Vec<ReproducingEntry>,
    kernel_series: Vec<SeriesEntry>,
    passed: bool,
}

pub fn kernel_check(config: &RunConfig, k: u32) -> Result<Report, CliError> {
    let quad = config.quadrature(QuadratureSpec::new(128, 64))?;
    let fs = (0..=2u32)
        .flat_map(|l| (0..=2u32).map(move |m| (l, m)))
        .map(|(l, m)| basis_function(BasisIndex::new(l, m, k)?))
        .collect::<hyperball_core::Result<Vec<_>>>()?;
    let (g, gram_est_error) = hyperball_core::bundle::gram_matrix(&fs, quad)?;
    let mut gram = 0.0f64;
    for i in 0..fs.len() {
        for j in 0..fs.len() {
            let id = if i == j { 1.0 } else { 0.0 };
            gram = gram.max((g[(i, j)] - id).norm());
        }
    }
    let points = [
        (BallPoint::from_real_imag(&[(0.3, 0.1), (-0.2, 0.0)])?, 0.7),
        (BallPoint::from_real_imag(&[(-0.1, 0.25), (0.2, -0.15)])?, -1.2),
    ];
    let mut reproducing = Vec::new();
    for (l, m) in [(1, 0), (2, 1)] {
        let f = basis_function(BasisIndex::new(l, m, k)?)?;
        for (z, phase) in &points {
            let cs = CoherentState::new(CirclePoint::with_phase(z.clone(), *phase), k)?;
            reproducing.push(ReproducingEntry {
                l,
                m,
                point: point_pairs(z),
                phase: *phase,
                report: reproducing_check(&f, &cs, quad)?,
            });
        }
    }
    let closed_num = (1..3 * k as u64).map(|x| x as f64).product::<f64>();
    let kernel_series: Vec<SeriesEntry> = [(0.2, 0.15), (0.1, 0.25)]
        .iter()
        .map(|&(x, y): &(f64, f64)| {
            let terms = 200;
            let closed = closed_num / (1.0 - x - y).powi(3 * k as i32);
            let trunc = kernel_double_series(k, x, y, terms);
            SeriesEntry {
                x,
                y,
                terms,
                relative_error: ((trunc - closed) / closed).abs(),
            }
        })
        .collect();
    let tol = config.tolerances;
    let passed = gram < tol.gram
        && reproducing.iter().all(|r| r.report.relative < tol.reproducing)
        && kernel_series.iter().all(|s| s.relative_error < tol.kernel_series);
    let report = KernelReport {
        k,
        n_rad: quad.n_rad,
        n_ang: quad.n_ang,
        gram_deviation: gram,
        gram_est_error,
        reproducing,
        kernel_series,
        passed,
    };
    Ok(Report {
        text: json(&report)?,
        passed,
    })
}

#[derive(Serialize)]
struct SeriesReport {
    k: u32,
    l: u32,
    gamma0: usize,
    z: Vec<[f64; 2]>,
    cosets: usize,
    boundary_hits: usize,
    rows: Vec<PartialSum>,
}

#[derive(Serialize)]
struct SeriesRow {
    shell: usize,
    terms: usize,
    value_re: f64,
    value_im: f64,
    cauchy_gap: f64,
    automorphy_residual: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn series(
    _config: &RunConfig,
    spec_path: &Path,
    z: &str,
    shells: Option<usize>,
    k: u32,
    l: u32,
    gamma0: usize,
    csv: bool,
) -> Result<Report, CliError> {
    let mut cfg = io::read_lattice(spec_path)?;
    if let Some(s) = shells {
        cfg.max_word_length = s;
    }
    let listed = cfg.generators.len();
    if gamma0 >= listed {
        return Err(CliError::Config(format!(
            "--gamma0 {gamma0} is out of range for {listed} generators"
        )));
    }
    let lattice = LatticeSpec::from_config(&cfg)?;
    let tests: Vec<_> = lattice.generators.iter().take(listed).cloned().collect();
    let g0 = tests[gamma0].clone();
    let spec = SeriesSpec::new(k, l, g0, lattice)?;
    let point = io::parse_point(z)?;
    let reps = spec.coset_reps()?;
    let rows = theta_series(&point, &spec.seed, &reps, &tests)?;
    let text = if csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &rows {
            w.serialize(SeriesRow {
                shell: r.shell,
                terms: r.terms,
                value_re: r.value.re,
                value_im: r.value.im,
                cauchy_gap: r.cauchy_gap,
                automorphy_residual: r.automorphy_residual,
            })
            .map_err(|e| CliError::Config(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Config(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Config(e.to_string()))?
    } else {
        json(&SeriesReport {
            k,
            l,
            gamma0,
            z: point_pairs(&point),
            cosets: reps.len(),
            boundary_hits: reps.boundary_hits,
            rows,
        })?
    };
    Ok(Report { text, passed: true })
}

#[derive(Serialize)]
struct ConstantsReport {
    k: u32,
    l: u32,
    lambda: f64,
    c1_sum: String,
    c1_residue: String,
    c1_closed_form: String,
    /// The printed sum disagrees with the residue coefficient.
    c1_sum_discrepant: bool,
    yx: [f64; 2],
    #[serde(rename = "C_printed")]
    c_printed: [f64; 2],
    #[serde(rename = "C_printed_with_residue")]
    c_printed_with_residue: [f64; 2],
    #[serde(rename = "C_derivation_final_line")]
    c_derivation_final_line: [f64; 2],
    #[serde(rename = "C_derived")]
    c_derived: [f64; 2],
    #[serde(rename = "C_empirical")]
    c_empirical: [f64; 2],
    empirical_point: Vec<[f64; 2]>,
    empirical_relative_gap: f64,
    passed: bool,
}

pub fn constants(config: &RunConfig, k: u32, l: u32, lambda: f64) -> Result<Report, CliError> {
    let sum = c1_sum(k, l)?;
    let residue = c1_residue(k, l)?;
    let closed = c1_closed_form(k, l)?;
    let spec = TorusSpec::normal(k, l, lambda)?;
    let quad = config.quadrature(default_torus_quadrature())?;
    let z = BallPoint::from_real_imag(&[(0.3, 0.0), (0.2, 0.0)])?;
    let empirical = empirical_constant(&spec, &CirclePoint::with_phase(z.clone(), 0.0), quad)?;
    let yx = spec.hyp.pairing().conj();
    let v = constant_variants(k, l, yx)?;
    let gap = (empirical - v.derived).norm() / v.derived.norm();
    let passed = residue == closed && gap < config.tolerances.constant;
    let report = ConstantsReport {
        k,
        l,
        lambda,
        c1_sum: format_rational(&sum),
        c1_residue: format_rational(&residue),
        c1_closed_form: format_rational(&closed),
        c1_sum_discrepant: sum != residue,
        yx: cx(yx),
        c_printed: cx(v.printed),
        c_printed_with_residue: cx(v.printed_with_residue),
        c_derivation_final_line: cx(v.derivation_final_line),
        c_derived: cx(v.derived),
        c_empirical: cx(empirical),
        empirical_point: point_pairs(&z),
        empirical_relative_gap: gap,
        passed,
    };
    Ok(Report {
        text: json(&report)?,
        passed,
    })
}

pub fn suite(seed: u64, as_json: bool) -> Result<Report, CliError> {
    let report = suite::run_suite(seed);
    let text = if as_json { json(&report)? } else { report.render() };
    Ok(Report {
        text,
        passed: report.passed(),
    })
}
