use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::Arc;

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;

use stepfield::cert::{self, CertificateInput, TrialFunctionParams};
use stepfield::domain::{self, DomainShape, DomainSpec, FourierMode};
use stepfield::gl::{self, GlOptions, GlProblem, Init, Mode};
use stepfield::halfplane::{self, StepAngleSpec};
use stepfield::model1d::{self, FiberKind, Grid1D};
use stepfield::output::{self, Table};
use stepfield::{C64, THETA0, THETA0_LOW};

use crate::error::CliError;

/// Where a command writes, and what it wrote.
pub struct Sink {
    pub dir: PathBuf,
    pub written: Vec<String>,
}

impl Sink {
    pub fn new(dir: PathBuf) -> Result<Self, CliError> {
        std::fs::create_dir_all(&dir)?;
        Ok(Self { dir, written: Vec::new() })
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        std::fs::write(self.dir.join(name), body)?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn csv(&mut self, name: &str, table: &Table) -> Result<(), CliError> {
        self.text(name, &table.to_csv())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<String, CliError> {
        let body = output::to_json(value)?;
        self.text(name, &format!("{body}\n"))?;
        Ok(body)
    }
}

fn need<T: Copy>(v: Option<T>, key: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Config(format!("missing required parameter `{key}`")))
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(rename_all = "kebab-case")]
pub struct Theta0Params {
    /// Grid spacing of the fiber discretization.
    #[arg(long)]
    pub h: Option<f64>,
    /// Golden-section tolerance in ξ.
    #[arg(long)]
    pub xi_tol: Option<f64>,
    /// Also write the sampled band as band.csv.
    #[arg(long)]
    pub band: Option<bool>,
}

pub fn theta0(p: &mut Theta0Params, sink: &mut Sink) -> Result<String, CliError> {
    let h = *p.h.get_or_insert(0.01);
    let xi_tol = *p.xi_tol.get_or_insert(1e-6);
    let band = *p.band.get_or_insert(false);
    let m = model1d::de_gennes_theta0(&Grid1D::with_spacing(h), xi_tol)?;
    if band {
        let (lo, hi, step) = model1d::XI_SCAN;
        let n = ((hi - lo) / step).round() as usize;
        let xis: Vec<f64> = (0..=n).map(|i| lo + i as f64 * step).collect();
        let mut t = Table::new(&["xi", "energy"]);
        for (xi, e) in model1d::band_table(FiberKind::HalfLineDeGennes, 1.0, &xis, h)? {
            t.push(vec![xi.into(), e.into()]);
        }
        sink.csv("band.csv", &t)?;
    }
    sink.json("theta0.json", &json!({ "theta0": m.energy, "xi_star": m.xi_star, "h": h }))
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(rename_all = "kebab-case")]
pub struct BetaParams {
    /// Field values a on the left half-plane.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub a: Option<Vec<f64>>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub xi_tol: Option<f64>,
}

pub fn beta(p: &mut BetaParams, sink: &mut Sink) -> Result<String, CliError> {
    let a_list = p.a.get_or_insert_with(|| vec![-1.0, -0.75, -0.5, -0.25, 0.25, 0.5, 0.75]).clone();
    let h = *p.h.get_or_insert(0.01);
    let xi_tol = *p.xi_tol.get_or_insert(1e-6);
    let grid = Grid1D::with_spacing(h);
    let mut t = Table::new(&["a", "beta", "xi_star", "attained"]);
    let mut rows = Vec::new();
    for &a in &a_list {
        let m = model1d::iwatsuka_beta(a, &grid, xi_tol)?;
        t.push(vec![a.into(), m.energy.into(), m.xi_star.into(), m.attained.into()]);
        rows.push(json!({ "a": a, "beta": m.energy, "xi_star": m.xi_star, "attained": m.attained }));
    }
    sink.csv("beta.csv", &t)?;
    sink.json("beta.json", &rows)
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(rename_all = "kebab-case")]
pub struct MuParams {
    /// Angle of the interface ray, in (0, π).
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Truncation radii, increasing.
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    #[arg(long)]
    pub h: Option<f64>,
    /// Write the ground state at the largest radius as eigvec.csv.
    #[arg(long)]
    pub dump: Option<bool>,
}

pub fn mu(p: &mut MuParams, sink: &mut Sink) -> Result<String, CliError> {
    let alpha = need(p.alpha, "alpha")?;
    let a = need(p.a, "a")?;
    let spec = StepAngleSpec::new(alpha, a)?;
    let (ladder, h_default) = halfplane::default_ladder(&spec);
    let radii = p.radii.get_or_insert(ladder).clone();
    let h = *p.h.get_or_insert(h_default);
    let dump = *p.dump.get_or_insert(false);
    let (ex, last) = halfplane::mu_extrapolated_with_state(&spec, &radii, h)?;
    let slope = halfplane::decay_profile(&last).ok().map(|d| d.slope);
    let mut t = Table::new(&["r", "mu"]);
    for (r, v) in ex.radii.iter().zip(&ex.values) {
        t.push(vec![(*r).into(), (*v).into()]);
    }
    sink.csv("ladder.csv", &t)?;
    if dump {
        let u = last.grid.lattice.unscale(&last.pair.vector);
        sink.csv("eigvec.csv", &output::field_table(&last.grid.positions(), &u))?;
    }
    sink.json(
        "mu.json",
        &json!({
            "alpha": alpha, "a": a, "r": radii.last(), "h": h, "mu": ex.mu,
            "converged": ex.converged, "slope": slope, "threshold": spec.threshold(),
            "tail_fit": ex.tail_fit,
        }),
    )
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(rename_all = "kebab-case")]
pub struct SectorParams {
    /// Opening angle of the Neumann sector.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    #[arg(long)]
    pub h: Option<f64>,
}

pub fn sector(p: &mut SectorParams, sink: &mut Sink) -> Result<String, CliError> {
    let alpha = need(p.alpha, "alpha")?;
    let radii = p.radii.get_or_insert_with(|| halfplane::DEFAULT_LADDER.to_vec()).clone();
    let h = *p.h.get_or_insert(halfplane::DEFAULT_H);
    let ex = halfplane::sector_mu_extrapolated(alpha, &radii, h)?;
    sink.json(
        "sector.json",
        &json!({ "alpha": alpha, "h": h, "mu": ex.mu, "converged": ex.converged, "radii": ex.radii, "values": ex.values }),
    )
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(rename_all = "kebab-case")]
pub struct CertifyParams {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Trial decay rate; defaults to 1/x* of the certificate polynomial.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Value of Θ₀ used in the polynomial.
    #[arg(long)]
    pub theta0: Option<f64>,
}

pub fn certify(p: &mut CertifyParams, sink: &mut Sink) -> Result<String, CliError> {
    let alpha = need(p.alpha, "alpha")?;
    let a = need(p.a, "a")?;
    let theta0 = *p.theta0.get_or_insert(THETA0_LOW);
    let input = CertificateInput::new(alpha, a, theta0)?;
    let res = cert::certify(&input);
    let beta = p.beta.or(res.x_star.map(|x| 1.0 / x));
    let trial = match beta {
        Some(b) => {
            let params = TrialFunctionParams::optimal(alpha, a, b);
            let closed = cert::trial_energy_closed(alpha, a, &params, theta0);
            Some(json!({ "beta": b, "c1": params.c1, "c2": params.c2, "c3": params.c3, "energy": closed,
                         "p_at_inverse_beta": cert::p_poly(&input, 1.0 / b) }))
        }
        None => None,
    };
    sink.json(
        "certificate.json",
        &json!({ "alpha": alpha, "a": a, "theta0": theta0, "A": res.coeff_a, "x_star": res.x_star,
                 "p_min": if res.p_min.is_finite() { json!(res.p_min) } else { json!("-inf") },
                 "admissible": res.admissible, "trial": trial }),
    )
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(rename_all = "kebab-case")]
pub struct RegionParams {
    /// α = πi/n for i = 1..n−1.
    #[arg(long)]
    pub alpha_steps: Option<usize>,
    /// a = −1 + 2j/n for j = 0..n−1, skipping 0.
    #[arg(long)]
    pub a_steps: Option<usize>,
    #[arg(long)]
    pub theta0: Option<f64>,
}

pub fn region(p: &mut RegionParams, sink: &mut Sink) -> Result<String, CliError> {
    let na = *p.alpha_steps.get_or_insert(200);
    let nb = *p.a_steps.get_or_insert(200);
    let theta0 = *p.theta0.get_or_insert(THETA0_LOW);
    if na < 2 || nb < 2 {
        return Err(CliError::Config("alpha-steps and a-steps must be at least 2".into()));
    }
    let rows = cert::region_scan(&cert::alpha_grid(na), &cert::a_grid(nb), theta0)?;
    let mut t = Table::new(&["alpha", "a", "A", "x_star", "p_min", "admissible"]);
    let mut admissible = 0usize;
    for r in &rows {
        admissible += r.result.admissible as usize;
        t.push(vec![
            r.alpha.into(),
            r.a.into(),
            r.result.coeff_a.into(),
            r.result.x_star.unwrap_or(f64::NAN).into(),
            r.result.p_min.into(),
            r.result.admissible.into(),
        ]);
    }
    sink.csv("region.csv", &t)?;
    sink.json("region.json", &json!({ "rows": rows.len(), "admissible": admissible, "theta0": theta0 }))
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(rename_all = "kebab-case")]
pub struct DomainParams {
    /// Mean radius of the domain.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Barrier offset: the barrier is the chord x = d.
    #[arg(long, allow_hyphen_values = true)]
    pub d: Option<f64>,
    /// Field value on the side x < d.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Boundary perturbation as `k:cos:sin` terms separated by `;`.
    #[arg(long, allow_hyphen_values = true)]
    pub modes: Option<String>,
    /// Grid spacing.
    #[arg(long)]
    pub h: Option<f64>,
}

impl DomainParams {
    fn resolve(&mut self, h_default: f64) -> Result<(DomainSpec, f64), CliError> {
        let radius = *self.radius.get_or_insert(1.0);
        let d = *self.d.get_or_insert(0.0);
        let a = *self.a.get_or_insert(-1.0);
        let h = *self.h.get_or_insert(h_default);
        let shape = match self.modes.as_deref().map(str::trim) {
            None | Some("") => DomainShape::Disc { radius },
            Some(s) => {
                let modes = s
                    .split(';')
                    .map(|term| {
                        let f: Vec<&str> = term.trim().split(':').collect();
                        let bad = || CliError::Config(format!("mode `{term}` is not k:cos:sin"));
                        if f.len() != 3 {
                            return Err(bad());
                        }
                        Ok(FourierMode {
                            k: f[0].parse().map_err(|_| bad())?,
                            cos: f[1].parse().map_err(|_| bad())?,
                            sin: f[2].parse().map_err(|_| bad())?,
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                DomainShape::Blob { radius, modes }
            }
        };
        Ok((DomainSpec { shape, d, a }, h))
    }
}

fn build_field(spec: &DomainSpec, h: f64) -> Result<Arc<domain::VectorPotentialField>, CliError> {
    let grid = Arc::new(domain::build_domain(spec, h)?);
    Ok(Arc::new(domain::compute_F(&grid)?))
}

/// min over the barrier endpoints of μ(α_j, a).
fn mu_star(field: &domain::VectorPotentialField) -> Result<f64, CliError> {
    let dom = &field.grid.domain;
    let mut best = f64::INFINITY;
    let mut seen: Vec<f64> = Vec::new();
    for &alpha in &dom.angles {
        if seen.iter().any(|s| (s - alpha).abs() < 1e-9) {
            continue;
        }
        seen.push(alpha);
        let spec = StepAngleSpec::new(alpha, dom.spec.a)?;
        let (radii, h) = halfplane::default_ladder(&spec);
        let ex = halfplane::mu_extrapolated(&spec, &radii, h)?;
        best = best.min(ex.mu);
    }
    Ok(best)
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(rename_all = "kebab-case")]
pub struct LambdaCurveParams {
    #[command(flatten)]
    #[serde(flatten)]
    pub domain: DomainParams,
    #[arg(long)]
    pub b_min: Option<f64>,
    /// Defaults to the largest b the grid resolves.
    #[arg(long)]
    pub b_max: Option<f64>,
    #[arg(long)]
    pub b_steps: Option<usize>,
}

pub fn lambda_curve(p: &mut LambdaCurveParams, sink: &mut Sink) -> Result<String, CliError> {
    let (spec, h) = p.domain.resolve(0.02)?;
    let b_min = *p.b_min.get_or_insert(10.0);
    let b_max = *p.b_max.get_or_insert(domain::max_resolvable_b(h).floor());
    let steps = *p.b_steps.get_or_insert(8);
    if steps < 2 || !(b_max > b_min) {
        return Err(CliError::Config("need b-steps ≥ 2 and b-max > b-min".into()));
    }
    let b_list: Vec<f64> = (0..steps).map(|k| b_min + (b_max - b_min) * k as f64 / (steps - 1) as f64).collect();
    let field = build_field(&spec, h)?;
    let curve = domain::lambda_curve(&field, &b_list)?;
    let mut t = Table::new(&["b", "lambda", "lambda_over_b", "frac_p1", "frac_p2"]);
    for r in &curve.rows {
        t.push(vec![r.b.into(), r.lambda.into(), r.lambda_over_b.into(), r.frac_p1.into(), r.frac_p2.into()]);
    }
    sink.csv("lambda_curve.csv", &t)?;
    let dom = &field.grid.domain;
    sink.json(
        "lambda_curve.json",
        &json!({ "points": dom.points, "angles": dom.angles, "h": h, "nodes": field.grid.len(),
                 "tail_increasing": curve.tail_increasing(),
                 "last_lambda_over_b": curve.rows.last().map(|r| r.lambda_over_b) }),
    )
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(rename_all = "kebab-case")]
pub struct Hc3Params {
    #[command(flatten)]
    #[serde(flatten)]
    pub domain: DomainParams,
    #[arg(long, value_delimiter = ',')]
    pub kappa: Option<Vec<f64>>,
    /// Model energy μ*; computed from the barrier angles when absent.
    #[arg(long)]
    pub mu_star: Option<f64>,
    /// Bracket for H·μ*/κ.
    #[arg(long, value_delimiter = ',')]
    pub bracket: Option<Vec<f64>>,
}

fn bracket_of(v: &[f64]) -> Result<(f64, f64), CliError> {
    match v {
        [lo, hi] if hi > lo && *lo > 0.0 => Ok((*lo, *hi)),
        _ => Err(CliError::Config("bracket must be two increasing positive numbers".into())),
    }
}

pub fn hc3(p: &mut Hc3Params, sink: &mut Sink) -> Result<String, CliError> {
    let (spec, h) = p.domain.resolve(0.0125)?;
    let kappas = p.kappa.get_or_insert_with(|| vec![6.0, 10.0, 14.0]).clone();
    let (lo, hi) = bracket_of(p.bracket.get_or_insert_with(|| vec![0.8, 1.25]))?;
    let field = build_field(&spec, h)?;
    let mu = match p.mu_star {
        Some(m) => m,
        None => *p.mu_star.insert(output::round_sig(mu_star(&field)?)),
    };
    let mut t = Table::new(&["kappa", "Hc3", "mu_star", "ratio"]);
    let mut rows = Vec::new();
    let mut hc = Vec::new();
    for &k in &kappas {
        let r = domain::solve_hc3(&field, k, (lo * k / mu, hi * k / mu))?;
        let ratio = r.hc3 * mu / k;
        t.push(vec![k.into(), r.hc3.into(), mu.into(), ratio.into()]);
        rows.push(json!({ "kappa": k, "Hc3": r.hc3, "mu_star": mu, "ratio": ratio }));
        hc.push(r.hc3);
    }
    sink.csv("hc3.csv", &t)?;
    let exponent = domain::remainder_exponent(&kappas, &hc, mu);
    sink.json("hc3.json", &json!({ "rows": rows, "remainder_exponent": exponent }))
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(rename_all = "kebab-case")]
pub struct GlSweepParams {
    #[command(flatten)]
    #[serde(flatten)]
    pub domain: DomainParams,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Applied field values; defaults to 0.8–1.2 times the linear H_C3.
    #[arg(long, value_delimiter = ',')]
    pub fields: Option<Vec<f64>>,
    /// `frozen` or `coupled`.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Write ψ at the last superconducting field as psi.csv.
    #[arg(long)]
    pub dump: Option<bool>,
}

pub fn gl_sweep(p: &mut GlSweepParams, seed: u64, sink: &mut Sink) -> Result<String, CliError> {
    let (spec, h) = p.domain.resolve(1.0 / 64.0)?;
    let kappa = *p.kappa.get_or_insert(8.0);
    let mode = match p.mode.get_or_insert_with(|| "frozen".into()).as_str() {
        "frozen" => Mode::FrozenA,
        "coupled" => Mode::Coupled,
        m => return Err(CliError::Config(format!("mode `{m}` is not frozen or coupled"))),
    };
    let defaults = GlOptions::default();
    let opts = GlOptions {
        tol: *p.tol.get_or_insert(defaults.tol),
        max_iter: *p.max_iter.get_or_insert(defaults.max_iter),
        ..defaults
    };
    let dump = *p.dump.get_or_insert(false);
    let field = build_field(&spec, h)?;
    let mut hc3 = None;
    if p.fields.is_none() {
        let mu = mu_star(&field)?;
        let r = domain::solve_hc3(&field, kappa, (0.8 * kappa / mu, 1.25 * kappa / mu))?;
        let grid: Vec<f64> = (0..9).map(|k| output::round_sig(r.hc3 * (0.8 + 0.05 * k as f64))).collect();
        p.fields = Some(grid);
        hc3 = Some(r.hc3);
    }
    let fields = p.fields.clone().expect("set above");
    let sweep = gl::onset_sweep(&field, kappa, &fields, mode, &opts, seed)?;
    let mut t = Table::new(&["H", "energy", "mass", "frac_p1", "frac_p2", "is_normal"]);
    for r in &sweep.rows {
        t.push(vec![
            r.h_field.into(),
            r.energy.into(),
            r.mass.into(),
            r.frac_p1.into(),
            r.frac_p2.into(),
            r.is_normal.into(),
        ]);
    }
    sink.csv("gl_sweep.csv", &t)?;
    if dump {
        if let Some(r) = sweep.rows.iter().rev().find(|r| !r.is_normal) {
            let problem = GlProblem::new(field.clone(), kappa, r.h_field)?;
            let (st, _) = gl::gl_minimize(&problem, mode, &Init::Random { seed }, &opts)?;
            let mut dumpt = Table::new(&["x", "y", "re", "im"]);
            for (n, z) in field.grid.lattice.nodes.iter().zip(&st.psi) {
                dumpt.push(vec![n.x.into(), n.y.into(), z.re.into(), z.im.into()]);
            }
            sink.csv("psi.csv", &dumpt)?;
        }
    }
    sink.json(
        "gl_sweep.json",
        &json!({ "kappa": kappa, "onset": sweep.onset, "Hc3_linear": hc3,
                 "mass_nonincreasing": sweep.mass_nonincreasing, "h": h }),
    )
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

/// Quick structural checks; fails with a compute error if any check fails.
pub fn validate(sink: &mut Sink) -> Result<String, CliError> {
    let mut checks = Vec::new();
    let mut push = |name, passed, detail: String| checks.push(Check { name, passed, detail });

    let mut worst: f64 = 0.0;
    for (alpha, a) in [(0.3, -0.9), (PI / 2.0, -1.0), (2.5, 0.5)] {
        let inp = CertificateInput::new(alpha, a, THETA0_LOW)?;
        worst = worst.max((cert::p_poly(&inp, 0.0) - PI / 2.0).abs());
    }
    push("certificate_polynomial_at_zero", worst == 0.0, format!("max |P(0) − π/2| = {worst:e}"));

    let e = model1d::band_energy(FiberKind::HalfLineDeGennes, 1.0, 0.0, 0.01)?;
    push("harmonic_level", (e - 1.0).abs() < 1e-3, format!("μ₁(0) = {e}"));

    let dspec = DomainSpec { shape: DomainShape::unit_disc(), d: 0.0, a: -1.0 };
    let field = build_field(&dspec, 0.1)?;
    let m = field.matrix(5.0);
    let phases: Vec<f64> = (0..m.dim()).map(|k| (k as f64 * 0.7).sin() * 3.0).collect();
    let l0 = stepfield::eigen::dense_reference_spectrum(&m)?[0];
    let l1 = stepfield::eigen::dense_reference_spectrum(&m.conjugate_by_phases(&phases))?[0];
    push("gauge_invariance", (l0 - l1).abs() < 1e-10, format!("|Δλ| = {:e}", (l0 - l1).abs()));

    let worst_curl = field
        .plaquette_curls()
        .iter()
        .map(|&((x, y), c)| (c - field.grid.domain.b0_cell(x, y, 0.1)).abs())
        .fold(0.0, f64::max);
    push("plaquette_flux", worst_curl < 1e-8, format!("max |curl F − B₀| = {worst_curl:e}"));

    let problem = GlProblem::new(field.clone(), 2.0, 2.0)?;
    let normal = gl::GLState {
        psi: vec![C64::new(0.0, 0.0); field.grid.len()],
        s: vec![0.0; field.dual_nodes.len()],
        kappa: 2.0,
        h_field: 2.0,
        parts: Default::default(),
    };
    let e0 = gl::gl_energy(&problem, &normal)?.total();
    push("normal_state_energy", e0 == 0.0, format!("E(0, F) = {e0:e}"));
    let diag = gl::gl_diagnostics(&problem, &normal)?;
    push("normal_state_diagnostics", diag.item1_holds, format!("{diag:?}"));

    push("number_format", output::fmt_num(THETA0) == "0.590106125000", output::fmt_num(THETA0));

    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    let body = sink.json("validate.json", &json!({ "checks": checks, "passed": failed.is_empty() }))?;
    if failed.is_empty() {
        Ok(body)
    } else {
        Err(CliError::Compute(stepfield::Error::Input(format!("failed checks: {}", failed.join(", ")))))
    }
}
