//! Study drivers. Each returns a [`StudyTable`] and writes its artifacts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constitutive::PhysParams;
use crate::diagnostics::{relaxation_residuals, EnergyMonitor, EntropyBalance};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::initdata::{build_profile, Preset};
use crate::limit_solver::{classical_integrate, ClassicalState, LimitConfig};
use crate::solver::{self, ImexStepper, Manufactured, Model, Probe, RunSummary, Snapshots, Trajectory};
use crate::state::State;
use crate::structure::{self, BoundaryReport, Side, StateVec};

use super::config::{RunConfig, StudyKind};
use super::fit::{fit_order, Fit};
use super::output::{classical_rows, snapshot_rows, EntropyRow, OutputDir};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    InsufficientPoints,
    PassByZero,
}

impl Status {
    pub fn passed(self) -> bool {
        matches!(self, Status::Pass | Status::PassByZero)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Verdict {
    pub fn check(name: &str, ok: bool, value: f64, threshold: f64) -> Self {
        Verdict {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            value: Some(value),
            threshold: Some(threshold),
            note: None,
        }
    }

    pub fn flag(name: &str, ok: bool) -> Self {
        Verdict {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            value: None,
            threshold: None,
            note: None,
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub param: f64,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub metric: String,
    pub fit: Option<Fit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyTable {
    pub study: StudyKind,
    /// name of the swept parameter
    pub param: String,
    pub rows: Vec<Row>,
    pub fits: Vec<FitRecord>,
    pub verdicts: Vec<Verdict>,
}

impl StudyTable {
    pub fn new(study: StudyKind, param: &str) -> Self {
        StudyTable { study, param: param.into(), rows: Vec::new(), fits: Vec::new(), verdicts: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.status.passed())
    }

    /// Plain-text report: one line per verdict, then fitted slopes.
    pub fn summary_text(&self) -> String {
        let mut out = format!("{}: {}\n", self.study, if self.passed() { "PASS" } else { "FAIL" });
        for v in &self.verdicts {
            let status = match v.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::InsufficientPoints => "insufficient points",
                Status::PassByZero => "pass (all zero)",
            };
            out.push_str(&format!("  {:<28} {status}", v.name));
            if let Some(x) = v.value {
                out.push_str(&format!("  value {x:.4e}"));
            }
            if let Some(t) = v.threshold {
                out.push_str(&format!("  threshold {t:.4e}"));
            }
            if let Some(n) = &v.note {
                out.push_str(&format!("  ({n})"));
            }
            out.push('\n');
        }
        for f in &self.fits {
            if let Some(fit) = f.fit {
                out.push_str(&format!(
                    "  fit {:<24} slope {:.3}  95% [{:.3}, {:.3}]\n",
                    f.metric, fit.slope, fit.band[0], fit.band[1]
                ));
            }
        }
        out
    }

    pub fn push(&mut self, param: f64, metric: &str, value: f64) {
        self.rows.push(Row { param, metric: metric.into(), value });
    }

    /// Values of `metric` ordered by parameter.
    pub fn series(&self, metric: &str) -> (Vec<f64>, Vec<f64>) {
        let mut pts: Vec<(f64, f64)> =
            self.rows.iter().filter(|r| r.metric == metric).map(|r| (r.param, r.value)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.into_iter().unzip()
    }

    /// Fit `metric` against the parameter and judge the slope. Values must
    /// shrink strictly with the parameter and fit a slope of at least
    /// `threshold`; all-zero values pass trivially.
    pub fn slope_verdict(&mut self, metric: &str, threshold: f64) -> Verdict {
        let (xs, ys) = self.series(metric);
        let name = format!("{metric}_slope");
        let note = "empirical target";
        let verdict = if !ys.is_empty() && ys.iter().all(|y| *y == 0.0) {
            self.fits.push(FitRecord { metric: metric.into(), fit: None });
            Verdict { name, status: Status::PassByZero, value: None, threshold: Some(threshold), note: None }
        } else if xs.len() < 3 {
            self.fits.push(FitRecord { metric: metric.into(), fit: None });
            Verdict { name, status: Status::InsufficientPoints, value: None, threshold: Some(threshold), note: None }
        } else {
            let monotone = ys.windows(2).all(|w| w[0] < w[1]);
            match fit_order(&xs, &ys) {
                Ok(fit) => {
                    self.fits.push(FitRecord { metric: metric.into(), fit: Some(fit) });
                    let ok = monotone && fit.slope >= threshold;
                    let v = Verdict::check(&name, ok, fit.slope, threshold);
                    if monotone {
                        v.with_note(note)
                    } else {
                        v.with_note(format!("{note}; values not monotone in {}", self.param))
                    }
                }
                Err(e) => {
                    self.fits.push(FitRecord { metric: metric.into(), fit: None });
                    Verdict::check(&name, false, f64::NAN, threshold).with_note(e.to_string())
                }
            }
        };
        self.verdicts.push(verdict.clone());
        verdict
    }
}

/// What a study produced besides its table.
#[derive(Debug, Default)]
pub struct Extras {
    /// printed on stdout by the CLI
    pub stdout: Option<serde_json::Value>,
}

fn with_tau_context(tau: f64, e: Error) -> Error {
    match e {
        Error::StepAborted { t, reason } => Error::StepAborted { t, reason: format!("tau = {tau}: {reason}") },
        other => other,
    }
}

fn initial_state(cfg: &RunConfig, grid: &Grid, pp: &PhysParams) -> Result<State> {
    build_profile(cfg.init.preset, cfg.init.amplitude, cfg.init.prepared, pp, grid)
}

fn l2_diff(grid: &Grid, pairs: &[(&[f64], &[f64])]) -> f64 {
    pairs
        .iter()
        .map(|(a, b)| grid.l2_sq(&a.iter().zip(b.iter()).map(|(x, y)| x - y).collect::<Vec<_>>()))
        .sum::<f64>()
        .sqrt()
}

fn run_relaxed(
    grid: &Grid,
    pp: &PhysParams,
    init: &State,
    scheme: &solver::SchemeConfig,
    probes: &mut [&mut dyn Probe],
) -> Result<Trajectory> {
    let model = Model::new(grid, pp, scheme.eps);
    let stepper = ImexStepper::new(model, scheme.imex);
    solver::integrate(&model, &stepper, init, scheme, probes)
}

pub fn simulate(cfg: &RunConfig, out: &OutputDir) -> Result<StudyTable> {
    let grid = Grid::new(cfg.grid.n)?;
    let pp = &cfg.phys;
    let init = initial_state(cfg, &grid, pp)?;
    let scheme = cfg.scheme();
    let model = Model::new(&grid, pp, scheme.eps);
    let stepper = ImexStepper::new(model, scheme.imex);
    let mut snaps = Snapshots::default();
    let traj = solver::integrate_report(&model, &stepper, &init, &scheme, &mut [&mut snaps])?;
    out.write_csv("snapshots.csv", snapshot_rows(&grid, &snaps.states))?;
    out.write_json("summary.json", &traj.summary)?;
    if let Some(a) = &traj.summary.abort {
        return Err(Error::StepAborted { t: a.t, reason: a.reason.clone() });
    }
    let mut table = StudyTable::new(StudyKind::Simulate, "t");
    let m0 = grid.integrate(&init.fields.v);
    let last = grid.last();
    let mut pinned = true;
    let mut drift: f64 = 0.0;
    for s in &snaps.states {
        let f = &s.fields;
        pinned &= [f.u[0], f.u[last], f.q[0], f.q[last]].iter().all(|x| *x == 0.0);
        let d = (grid.integrate(&f.v) - m0).abs();
        drift = drift.max(d);
        table.push(s.t, "mass_drift", d);
        table.push(s.t, "max_deviation", f.max_abs_diff(&init.fields));
    }
    let tol = cfg.study.thresholds.mass_drift * cfg.scheme.t_end.max(1.0);
    table.verdicts.push(Verdict::flag("completed", true));
    table.verdicts.push(Verdict::flag("boundary_pinned", pinned));
    table.verdicts.push(Verdict::check("mass_drift", drift <= tol, drift, tol));
    if cfg.init.preset == Preset::Equilibrium {
        let dev = snaps.states.iter().map(|s| s.fields.max_abs_diff(&init.fields)).fold(0.0, f64::max);
        table.verdicts.push(Verdict::check("equilibrium_preserved", dev == 0.0, dev, 0.0));
    }
    Ok(table)
}

pub fn relax_study(cfg: &RunConfig, out: &OutputDir) -> Result<StudyTable> {
    let grid = Grid::new(cfg.grid.n)?;
    let t_cmp = cfg.study.t_compare;
    let mut taus = cfg.study.tau_list.clone();
    taus.sort_by(f64::total_cmp);
    taus.dedup();

    let init0 = initial_state(cfg, &grid, &cfg.phys)?;
    let c0 = ClassicalState::from_relaxed(&init0);
    let lcfg = LimitConfig {
        cfl: cfg.scheme.cfl,
        implicit_diffusion: cfg.scheme.implicit_diffusion,
        t_end: t_cmp,
        cadence: None,
    };
    let classical = classical_integrate(&grid, &c0, &cfg.phys, &lcfg, &mut |_| Ok(()))?;
    out.write_csv("classical.csv", classical_rows(&grid, std::slice::from_ref(&classical.state)))?;

    let mut table = StudyTable::new(StudyKind::RelaxStudy, "tau");
    let mut summaries = Vec::new();
    for &tau in &taus {
        let pp = cfg.phys.with_tau(tau);
        let init = initial_state(cfg, &grid, &pp)?;
        let scheme = solver::SchemeConfig { t_end: t_cmp, ..cfg.scheme() };
        let mut mon = EnergyMonitor::default();
        let traj = run_relaxed(&grid, &pp, &init, &scheme, &mut [&mut mon]).map_err(|e| with_tau_context(tau, e))?;
        let f = &traj.state.fields;
        let c = &classical.state;
        let diff = l2_diff(&grid, &[(&f.v, &c.v), (&f.u, &c.u), (&f.theta, &c.theta)]);
        let (rq, rs) = relaxation_residuals(f, &grid, &pp);
        table.push(tau, "diff_l2", diff);
        table.push(tau, "res_q", rq);
        table.push(tau, "res_S", rs);
        table.push(tau, "max_E_w", mon.max_e_weighted());
        table.push(tau, "steps", traj.summary.steps_accepted as f64);
        table.push(tau, "dt_mean", t_cmp / traj.summary.steps_accepted.max(1) as f64);
        out.write_csv(&format!("relaxed_tau={tau:e}.csv"), snapshot_rows(&grid, std::slice::from_ref(&traj.state)))?;
        summaries.push((tau, traj.summary));
    }
    let th = &cfg.study.thresholds;
    table.slope_verdict("diff_l2", th.relax_slope);
    table.slope_verdict("res_q", th.residual_slope);
    table.slope_verdict("res_S", th.residual_slope);
    // observed step-size law, reported without a verdict
    let (xs, ys) = table.series("dt_mean");
    if xs.len() >= 3 {
        table.fits.push(FitRecord { metric: "dt_mean".into(), fit: fit_order(&xs, &ys).ok() });
    }
    out.write_json("runs.json", &summaries.iter().map(|(t, s)| RunRecord { param: *t, summary: s.clone() }).collect::<Vec<_>>())?;
    Ok(table)
}

#[derive(Debug, Serialize)]
struct RunRecord {
    param: f64,
    summary: RunSummary,
}

pub fn eps_study(cfg: &RunConfig, out: &OutputDir) -> Result<StudyTable> {
    let grid = Grid::new(cfg.grid.n)?;
    let pp = &cfg.phys;
    let init = initial_state(cfg, &grid, pp)?;
    let t_cmp = cfg.study.t_compare;
    let base = solver::SchemeConfig { t_end: t_cmp, cadence: None, ..cfg.scheme() };
    let reference = run_relaxed(&grid, pp, &init, &solver::SchemeConfig { eps: 0.0, ..base.clone() }, &mut [])?;
    let mut eps_list: Vec<f64> = cfg.study.eps_list.iter().copied().filter(|e| *e > 0.0).collect();
    eps_list.sort_by(f64::total_cmp);
    eps_list.dedup();
    let mut table = StudyTable::new(StudyKind::EpsStudy, "eps");
    let mut summaries = Vec::new();
    for &eps in &eps_list {
        let traj = run_relaxed(&grid, pp, &init, &solver::SchemeConfig { eps, ..base.clone() }, &mut [])?;
        let (a, b) = (&traj.state.fields, &reference.state.fields);
        let diff = l2_diff(&grid, &[(&a.v, &b.v), (&a.u, &b.u), (&a.theta, &b.theta), (&a.q, &b.q), (&a.s, &b.s)]);
        table.push(eps, "diff_l2", diff);
        summaries.push(RunRecord { param: eps, summary: traj.summary });
    }
    table.slope_verdict("diff_l2", cfg.study.thresholds.eps_slope);
    out.write_json("runs.json", &summaries)?;
    Ok(table)
}

pub fn mms_verify(cfg: &RunConfig, out: &OutputDir) -> Result<StudyTable> {
    let pp = &cfg.phys;
    let m = Manufactured::five_field(cfg.study.mms_amplitude);
    let scheme = solver::SchemeConfig { cadence: None, ..cfg.scheme() };
    let mut ns = cfg.study.n_list.clone();
    ns.sort_unstable();
    ns.dedup();
    let names = ["err_v", "err_u", "err_theta", "err_q", "err_S"];
    let mut table = StudyTable::new(StudyKind::MmsVerify, "dx");
    let mut summaries = Vec::new();
    for &n in &ns {
        let grid = Grid::new(n)?;
        let init = State::new(0.0, m.sample(&grid, 0.0));
        let traj = solver::run(&grid, pp, &init, &scheme, Some(&m), &mut [])?;
        let exact = m.sample(&grid, traj.state.t);
        for (k, (a, b)) in traj.state.fields.arrays().into_iter().zip(exact.arrays()).enumerate() {
            table.push(grid.dx(), names[k], l2_diff(&grid, &[(a, b)]));
        }
        summaries.push(RunRecord { param: grid.dx(), summary: traj.summary });
    }
    for name in names {
        table.slope_verdict(name, cfg.study.thresholds.mms_order);
    }
    out.write_json("runs.json", &summaries)?;
    Ok(table)
}

/// Random admissible boundary state with `q = 0`.
pub fn random_boundary_state(rng: &mut impl Rng, pp: &PhysParams) -> StateVec {
    loop {
        let u = StateVec::new(
            rng.gen_range(0.6..1.4),
            rng.gen_range(-0.2..0.2),
            rng.gen_range(0.6..1.4),
            0.0,
            rng.gen_range(-0.3..0.3),
        );
        if structure::assemble(&u, 0.0, pp, 0.0).is_ok() {
            return u;
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BcRecord {
    pub eps: f64,
    pub sample: usize,
    #[serde(flatten)]
    pub report: BoundaryReport,
    pub det_scale: f64,
    pub det_eps0: f64,
}

pub fn bc_analyze(cfg: &RunConfig, out: &OutputDir) -> Result<(StudyTable, Extras)> {
    let pp = &cfg.phys;
    let mut eps_list: Vec<f64> = cfg.study.eps_list.clone();
    if eps_list.is_empty() {
        eps_list = vec![1e-3, 1e-1];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.study.seed);
    let mut records = Vec::new();
    let mut table = StudyTable::new(StudyKind::BcAnalyze, "eps");
    let (mut all_ok, mut det_err, mut det0): (bool, f64, f64) = (true, 0.0, 0.0);
    for &eps in &eps_list {
        let (mut kmin, mut p1, mut p3, mut p2r) = (f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for sample in 0..cfg.study.samples {
            let u = random_boundary_state(&mut rng, pp);
            for side in [Side::Left, Side::Right] {
                let report = structure::check_maximal_nonnegativity(&u, side, pp, eps)?;
                let scale = structure::boundary_det_scale(&u, side.x(), pp, eps)?;
                let d0 = structure::boundary_det(&u, side.x(), pp, 0.0)?;
                let s0 = structure::boundary_det_scale(&u, side.x(), pp, 0.0)?;
                all_ok &= report.verdict;
                if eps > 0.0 {
                    det_err = det_err.max(((report.det - report.det_closed_form) / report.det_closed_form).abs());
                }
                det0 = det0.max(d0.abs() / s0);
                kmin = kmin.min(report.kernel_min);
                p1 = p1.max(report.psi1);
                p3 = p3.max(report.psi3);
                if report.psi2_asserted {
                    p2r = p2r.max(report.psi2);
                }
                records.push(BcRecord { eps, sample, report, det_scale: scale, det_eps0: d0 });
            }
        }
        table.push(eps, "kernel_min", kmin);
        table.push(eps, "psi1_max", p1);
        table.push(eps, "psi2_max_right", p2r);
        table.push(eps, "psi3_max", p3);
    }
    table.verdicts.push(Verdict::flag("maximal_nonnegative", all_ok && !records.is_empty()));
    table.verdicts.push(Verdict::check("det_closed_form_rel_err", det_err <= 1e-12, det_err, 1e-12));
    table.verdicts.push(Verdict::check("det_eps0_scaled", det0 <= 1e-14, det0, 1e-14));
    out.write_json("bc_reports.json", &records)?;
    let stdout = serde_json::to_value(&records).map_err(|e| Error::Numerical(e.to_string()))?;
    Ok((table, Extras { stdout: Some(stdout) }))
}

pub fn entropy_study(cfg: &RunConfig, out: &OutputDir) -> Result<StudyTable> {
    let grid = Grid::new(cfg.grid.n)?;
    let mut taus = cfg.study.tau_list.clone();
    if taus.is_empty() {
        taus.push(cfg.phys.tau);
    }
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    let th = &cfg.study.thresholds;
    let mut table = StudyTable::new(StudyKind::EntropyReport, "tau");
    let mut maxima = Vec::new();
    let mut envelope_ok = true;
    let mut worst_increase: f64 = f64::NEG_INFINITY;
    for &tau in &taus {
        let pp = cfg.phys.with_tau(tau);
        let init = initial_state(cfg, &grid, &pp)?;
        let mut mon = EnergyMonitor::default();
        let mut bal = EntropyBalance::default();
        let traj = run_relaxed(&grid, &pp, &init, &cfg.scheme(), &mut [&mut mon, &mut bal])
            .map_err(|e| with_tau_context(tau, e))?;
        let name = if taus.len() == 1 { "entropy.csv".to_string() } else { format!("entropy_tau={tau:e}.csv") };
        out.write_csv(&name, mon.rows.iter().map(EntropyRow::from))?;
        let e0 = mon.rows.first().map(|r| r.e_weighted).unwrap_or(0.0);
        let emax = mon.max_e_weighted();
        envelope_ok &= emax <= th.envelope_factor * e0;
        worst_increase = worst_increase.max(bal.max_increase_rate);
        maxima.push(emax);
        table.push(tau, "E_w_initial", e0);
        table.push(tau, "E_w_max", emax);
        table.push(tau, "D_w_integral", mon.d_weighted_integral());
        table.push(tau, "entropy_max_increase_rate", bal.max_increase_rate);
        table.push(tau, "entropy_max_defect", bal.max_defect);
        table.push(tau, "steps", traj.summary.steps_accepted as f64);
    }
    table.verdicts.push(Verdict::check(
        "entropy_nonincreasing",
        worst_increase <= th.entropy_band,
        worst_increase,
        th.entropy_band,
    ));
    table.verdicts.push(Verdict::flag("E_w_envelope", envelope_ok).with_note(format!(
        "running max at most {} times the initial value",
        th.envelope_factor
    )));
    if maxima.len() >= 2 {
        let hi = maxima.iter().cloned().fold(0.0, f64::max);
        let lo = maxima.iter().cloned().fold(f64::INFINITY, f64::min);
        let v = if hi == 0.0 {
            Verdict { name: "E_w_uniformity".into(), status: Status::PassByZero, value: None, threshold: Some(th.uniformity_factor), note: None }
        } else {
            Verdict::check("E_w_uniformity", hi <= th.uniformity_factor * lo, hi / lo, th.uniformity_factor)
        };
        table.verdicts.push(v);
    }
    Ok(table)
}
