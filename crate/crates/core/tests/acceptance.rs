//! Acceptance suite. Prints one line per criterion and exits nonzero if any
//! criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use relaxnsf::constitutive::{
    a_of_theta, admissibility, check_thermo_relation, total_energy_density, z_of_theta, Admissibility, CoeffFn,
    PhysParams, ThermoPoint,
};
use relaxnsf::diagnostics::{EnergyMonitor, EntropyBalance};
use relaxnsf::grid::Grid;
use relaxnsf::harness::{self, RunConfig, Status, StudyKind, StudyTable};
use relaxnsf::initdata::{build_profile, Preset};
use relaxnsf::solver::{self, DtPolicy, SchemeConfig, Snapshots};
use relaxnsf::state::State;
use relaxnsf::structure::{self, Side};
use relaxnsf::Result;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(limit: Duration, elapsed: Duration) -> bool {
    elapsed <= limit
}

fn cfl_scheme(eps: f64, t_end: f64, cadence: Option<f64>) -> SchemeConfig {
    SchemeConfig { dt: DtPolicy::Cfl { cfl: 0.5, refresh: 10 }, eps, imex: true, t_end, cadence }
}

fn energy(grid: &Grid, pp: &PhysParams, s: &State) -> f64 {
    let f = &s.fields;
    grid.integrate_with(|i| total_energy_density(&f.point(i), f.u[i], pp).unwrap())
}

fn run_study(cfg: RunConfig, kind: StudyKind) -> Result<StudyTable> {
    let dir = tempfile::tempdir()?;
    Ok(harness::run(&cfg, kind, Some(dir.path().to_path_buf()))?.table)
}

fn verdict_summary(table: &StudyTable) -> String {
    table
        .verdicts
        .iter()
        .map(|v| {
            let val = v.value.map(|x| format!("={x:.3}")).unwrap_or_default();
            let st = match v.status {
                Status::Pass => "ok",
                Status::PassByZero => "ok(zero)",
                Status::Fail => "FAIL",
                Status::InsufficientPoints => "insufficient",
            };
            format!("{}{val} {st}", v.name)
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn equilibrium_fidelity() -> Result<Outcome> {
    let start = Instant::now();
    let grid = Grid::new(128)?;
    let pp = PhysParams { tau: 1e-2, ..PhysParams::default() };
    let init = State::equilibrium(grid.len());
    let mut worst: f64 = 0.0;
    for eps in [0.0, 1e-2] {
        let mut snaps = Snapshots::default();
        solver::run(&grid, &pp, &init, &cfl_scheme(eps, 1.0, Some(0.1)), None, &mut [&mut snaps])?;
        for s in &snaps.states {
            worst = worst.max(s.fields.max_abs_diff(&init.fields));
        }
    }
    let el = start.elapsed();
    Ok(outcome(
        worst <= 1e-12 && within(Duration::from_secs(5), el),
        format!("max deviation {worst:.3e} (limit 1e-12), {:.2}s (limit 5s)", el.as_secs_f64()),
    ))
}

struct ConservationRun {
    mass_drift: f64,
    energy_drift: f64,
    entropy_band: f64,
    /// largest growth of the entropy between output times, per unit time
    max_output_increase: f64,
}

fn conservation_run(n: usize) -> Result<ConservationRun> {
    let grid = Grid::new(n)?;
    let pp = PhysParams::default();
    let init = build_profile(Preset::Acoustic, 1e-2, true, &pp, &grid)?;
    let mut mon = EnergyMonitor::default();
    let mut bal = EntropyBalance::default();
    let traj = solver::run(&grid, &pp, &init, &cfl_scheme(0.0, 1.0, Some(0.1)), None, &mut [&mut mon, &mut bal])?;
    let m0 = grid.integrate(&init.fields.v);
    let e0 = energy(&grid, &pp, &init);
    let max_output_increase = mon
        .rows
        .windows(2)
        .map(|w| (w[1].entropy_total - w[0].entropy_total) / (w[1].t - w[0].t))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ConservationRun {
        mass_drift: (grid.integrate(&traj.state.fields.v) - m0).abs(),
        energy_drift: (energy(&grid, &pp, &traj.state) - e0).abs() / e0,
        entropy_band: bal.max_defect,
        max_output_increase,
    })
}

fn conservation(coarse: &ConservationRun, fine: &ConservationRun, el: Duration) -> Outcome {
    let order = (coarse.energy_drift / fine.energy_drift).log2();
    outcome(
        fine.mass_drift <= 1e-12 && fine.energy_drift <= 1e-4 && order >= 1.8 && within(Duration::from_secs(30), el),
        format!(
            "mass drift {:.2e} (limit 1e-12), energy drift {:.3e} (limit 1e-4), drift order {order:.2} (limit 1.8), {:.1}s (limit 30s)",
            fine.mass_drift,
            fine.energy_drift,
            el.as_secs_f64()
        ),
    )
}

fn entropy_dissipation(coarse: &ConservationRun, fine: &ConservationRun) -> Outcome {
    let order = (coarse.entropy_band / fine.entropy_band).log2();
    let within_band = fine.max_output_increase <= fine.entropy_band;
    outcome(
        within_band && order >= 1.8,
        format!(
            "max entropy growth rate {:.3e} within band {:.3e}: {within_band}, band order {order:.2} (limit 1.8)",
            fine.max_output_increase, fine.entropy_band
        ),
    )
}

fn boundary_algebra() -> Result<Outcome> {
    let start = Instant::now();
    let pp = PhysParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut ok, mut rel, mut det0) = (true, 0.0_f64, 0.0_f64);
    let mut checked = 0;
    for eps in [1e-3, 1e-1] {
        for _ in 0..100 {
            let u = harness::study::random_boundary_state(&mut rng, &pp);
            for side in [Side::Left, Side::Right] {
                let r = structure::check_maximal_nonnegativity(&u, side, &pp, eps)?;
                ok &= r.verdict && r.kernel_min >= 0.0 && r.psi1 < 0.0 && r.psi3 < 0.0;
                if side == Side::Right {
                    ok &= r.psi2 < 0.0;
                }
                rel = rel.max(((r.det - r.det_closed_form) / r.det_closed_form).abs());
                let d0 = structure::boundary_det(&u, side.x(), &pp, 0.0)?;
                det0 = det0.max(d0.abs() / structure::boundary_det_scale(&u, side.x(), &pp, 0.0)?);
                checked += 1;
            }
        }
    }
    let el = start.elapsed();
    Ok(outcome(
        ok && rel <= 1e-12 && det0 <= 1e-14 && within(Duration::from_secs(1), el),
        format!(
            "{checked} boundary checks all nonnegative: {ok}, det rel err {rel:.2e} (limit 1e-12), eps=0 det {det0:.2e} (limit 1e-14), {:.3}s (limit 1s)",
            el.as_secs_f64()
        ),
    ))
}

fn relaxation_limit() -> Result<Outcome> {
    let start = Instant::now();
    let mut cfg = RunConfig::default();
    cfg.grid.n = 256;
    cfg.init.preset = Preset::Acoustic;
    cfg.init.amplitude = 1e-3;
    cfg.init.prepared = true;
    cfg.study.tau_list = vec![1e-2, 1e-3, 1e-4];
    cfg.study.t_compare = 0.5;
    let table = run_study(cfg, StudyKind::RelaxStudy)?;
    let el = start.elapsed();
    let values = |m: &str| {
        let (_, ys) = table.series(m);
        ys.iter().map(|y| format!("{y:.2e}")).collect::<Vec<_>>().join("/")
    };
    Ok(outcome(
        table.passed() && within(Duration::from_secs(180), el),
        format!(
            "{}; diff {} res_q {} res_S {} (tau 1e-4/1e-3/1e-2), {:.1}s (limit 180s)",
            verdict_summary(&table),
            values("diff_l2"),
            values("res_q"),
            values("res_S"),
            el.as_secs_f64()
        ),
    ))
}

fn eps_limit() -> Result<Outcome> {
    let mut cfg = RunConfig::default();
    cfg.phys.tau = 1e-2;
    cfg.study.eps_list = vec![1e-1, 1e-2, 1e-3];
    cfg.study.t_compare = 0.5;
    let table = run_study(cfg, StudyKind::EpsStudy)?;
    Ok(outcome(table.passed(), verdict_summary(&table)))
}

fn mms() -> Result<Outcome> {
    let start = Instant::now();
    let mut cfg = RunConfig::default();
    cfg.scheme.t_end = 0.5;
    cfg.study.n_list = vec![64, 128, 256];
    let table = run_study(cfg, StudyKind::MmsVerify)?;
    let el = start.elapsed();
    Ok(outcome(
        table.passed() && within(Duration::from_secs(60), el),
        format!("{}, {:.1}s (limit 60s)", verdict_summary(&table), el.as_secs_f64()),
    ))
}

fn uniform_boundedness() -> Result<Outcome> {
    let mut cfg = RunConfig::default();
    cfg.init.preset = Preset::Acoustic;
    cfg.init.amplitude = 1e-3;
    cfg.scheme.t_end = 2.0;
    cfg.out.cadence = 0.02;
    cfg.study.tau_list = vec![1e-2, 1e-3, 1e-4];
    let table = run_study(cfg, StudyKind::EntropyReport)?;
    let relevant: Vec<_> =
        table.verdicts.iter().filter(|v| v.name == "E_w_envelope" || v.name == "E_w_uniformity").collect();
    let pass = relevant.len() == 2 && relevant.iter().all(|v| v.status.passed());
    let ratios: Vec<String> = {
        let (_, e0) = table.series("E_w_initial");
        let (_, em) = table.series("E_w_max");
        e0.iter().zip(&em).map(|(a, b)| format!("{:.3}", b / a)).collect()
    };
    Ok(outcome(
        pass,
        format!("max/initial per tau (1e-4/1e-3/1e-2) {}; {}", ratios.join("/"), verdict_summary(&table)),
    ))
}

fn constitutive_identities() -> Result<Outcome> {
    let start = Instant::now();
    let pp = PhysParams {
        kappa: "poly:0.5,0.5".parse::<CoeffFn>()?,
        g: CoeffFn::Power { alpha: 1.0 },
        tau: 1e-2,
        ..PhysParams::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut points = 0;
    let mut thermo: f64 = 0.0;
    while points < 100 {
        let pt = ThermoPoint::new(rng.gen_range(0.5..2.0), rng.gen_range(0.5..1.5), rng.gen_range(-1.0..1.0), 0.0);
        if admissibility(&pt, &pp) != Admissibility::Admissible {
            continue;
        }
        thermo = thermo.max(check_thermo_relation(&pt, &pp));
        points += 1;
    }

    let mut ratio_err: f64 = 0.0;
    for &theta in &[0.6, 0.9, 1.0, 1.3] {
        let base = a_of_theta(theta, &pp.with_tau(1.0))?.a;
        for tau in [1e-1, 1e-3, 1e-6] {
            let a = a_of_theta(theta, &pp.with_tau(tau))?.a;
            ratio_err = ratio_err.max((a / tau - base).abs() / base.abs());
        }
    }

    let fd_err = |h: f64| -> Result<f64> {
        let mut err: f64 = 0.0;
        for &theta in &[0.7, 1.0, 1.2] {
            let z = |t: f64| z_of_theta(t, &pp);
            let a = |t: f64| a_of_theta(t, &pp);
            let (zp, zm, z0) = (z(theta + h)?, z(theta - h)?, z(theta)?);
            let (ap, am, a0) = (a(theta + h)?, a(theta - h)?, a(theta)?);
            let c = |p: f64, m: f64| (p - m) / (2.0 * h);
            for (fd, exact) in [
                (c(zp.z, zm.z), z0.dz),
                (c(zp.dz, zm.dz), z0.d2z),
                (c(zp.d2z, zm.d2z), z0.d3z),
                (c(ap.a, am.a), a0.da),
                (c(ap.da, am.da), a0.d2a),
            ] {
                err = err.max((fd - exact).abs() / pp.tau);
            }
        }
        Ok(err)
    };
    let order = (fd_err(1e-2)? / fd_err(5e-3)?).log2();
    let el = start.elapsed();
    Ok(outcome(
        thermo == 0.0 && ratio_err <= 1e-12 && order >= 1.9 && within(Duration::from_secs(1), el),
        format!(
            "thermo residual {thermo:.1e} on {points} points, a/tau spread {ratio_err:.2e} (limit 1e-12), derivative order {order:.2} (limit 1.9), {:.3}s (limit 1s)",
            el.as_secs_f64()
        ),
    ))
}

fn report(number: usize, name: &str, result: Result<Outcome>) -> bool {
    let (pass, detail) = match result {
        Ok(o) => (o.pass, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    println!("criterion {number} {:<4} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn main() -> ExitCode {
    let mut all = true;
    all &= report(1, "equilibrium fidelity", equilibrium_fidelity());

    let start = Instant::now();
    let runs = conservation_run(128).and_then(|c| Ok((c, conservation_run(256)?)));
    let el = start.elapsed();
    match runs {
        Ok((coarse, fine)) => {
            all &= report(2, "conservation", Ok(conservation(&coarse, &fine, el)));
            all &= report(3, "entropy dissipation", Ok(entropy_dissipation(&coarse, &fine)));
        }
        Err(e) => {
            let msg = e.to_string();
            all &= report(2, "conservation", Err(e));
            println!("criterion 3 FAIL entropy dissipation: error: {msg}");
        }
    }

    all &= report(4, "boundary algebra", boundary_algebra());
    all &= report(5, "relaxation limit", relaxation_limit());
    all &= report(6, "boundary-weight limit", eps_limit());
    all &= report(7, "manufactured solution", mms());
    all &= report(8, "uniform boundedness", uniform_boundedness());
    all &= report(9, "constitutive identities", constitutive_identities());

    if all {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: some criteria fail");
        ExitCode::FAILURE
    }
}
