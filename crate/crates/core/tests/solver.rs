use relaxnsf::constitutive::{total_energy_density, PhysParams};
use relaxnsf::grid::Grid;
use relaxnsf::initdata::{build_profile, Preset};
use relaxnsf::solver::{
    self, DtPolicy, ImexStepper, Manufactured, Model, Probe, SchemeConfig, Snapshots,
};
use relaxnsf::state::State;

fn cfl(t_end: f64) -> SchemeConfig {
    SchemeConfig { dt: DtPolicy::Cfl { cfl: 0.5, refresh: 10 }, t_end, ..SchemeConfig::default() }
}

fn mass(grid: &Grid, s: &State) -> f64 {
    grid.integrate(&s.fields.v)
}

fn energy(grid: &Grid, pp: &PhysParams, s: &State) -> f64 {
    let f = &s.fields;
    grid.integrate_with(|i| total_energy_density(&f.point(i), f.u[i], pp).unwrap())
}

#[test]
fn equilibrium_snapshots_stay_at_rest() {
    let grid = Grid::new(64).unwrap();
    let pp = PhysParams::default();
    let init = State::equilibrium(grid.len());
    for eps in [0.0, 0.01] {
        let cfg = SchemeConfig { eps, cadence: Some(0.25), ..cfl(1.0) };
        let mut snaps = Snapshots::default();
        solver::run(&grid, &pp, &init, &cfg, None, &mut [&mut snaps]).unwrap();
        assert_eq!(snaps.states.len(), 5);
        for s in &snaps.states {
            assert!(s.fields.max_abs_diff(&init.fields) <= 1e-13);
        }
    }
}

#[test]
fn single_step_preserves_equilibrium() {
    let grid = Grid::new(32).unwrap();
    let pp = PhysParams::default();
    let model = Model::new(&grid, &pp, 0.0);
    let init = State::equilibrium(grid.len());
    let next = ImexStepper::new(model, true).step(&init, 1e-3).unwrap();
    assert!(next.fields.max_abs_diff(&init.fields) <= 1e-15);
}

#[test]
fn small_step_is_consistent_with_the_rates() {
    let grid = Grid::new(64).unwrap();
    let pp = PhysParams::default();
    let init = build_profile(Preset::Acoustic, 1e-2, false, &pp, &grid).unwrap();
    let model = Model::new(&grid, &pp, 0.0);
    let dt = 1e-8;
    let rates = model.rates(&init.fields).unwrap();
    let mut euler = init.fields.clone();
    euler.axpy(dt, &rates);
    for imex in [true, false] {
        let next = ImexStepper::new(model, imex).step(&init, dt).unwrap();
        let err = next.fields.max_abs_diff(&euler);
        assert!(err <= 1e-13, "imex={imex}: {err}");
    }
}

#[test]
fn mass_is_conserved_and_boundary_stays_pinned() {
    let grid = Grid::new(64).unwrap();
    let pp = PhysParams::default();
    let init = build_profile(Preset::Compression, 5e-2, true, &pp, &grid).unwrap();
    let cfg = SchemeConfig { eps: 0.05, cadence: Some(0.1), ..cfl(0.5) };
    let mut snaps = Snapshots::default();
    solver::run(&grid, &pp, &init, &cfg, None, &mut [&mut snaps]).unwrap();
    let m0 = mass(&grid, &init);
    for s in &snaps.states {
        assert!((mass(&grid, s) - m0).abs() <= 1e-12 * 0.5);
        let f = &s.fields;
        let last = grid.last();
        assert_eq!([f.u[0], f.u[last], f.q[0], f.q[last]], [0.0; 4]);
    }
}

#[test]
fn energy_drift_is_small_at_fine_resolution() {
    let grid = Grid::new(128).unwrap();
    let pp = PhysParams::default();
    let init = build_profile(Preset::Acoustic, 1e-2, false, &pp, &grid).unwrap();
    let traj = solver::run(&grid, &pp, &init, &cfl(1.0), None, &mut []).unwrap();
    let e0 = energy(&grid, &pp, &init);
    let drift = (energy(&grid, &pp, &traj.state) - e0).abs() / e0;
    eprintln!("energy drift N=128: {drift:e}");
    assert!(drift <= 1e-4);
}

#[test]
fn stiff_relaxation_is_stable_at_the_transport_step() {
    let grid = Grid::new(64).unwrap();
    let pp = PhysParams { tau: 1e-6, ..PhysParams::default() };
    // heat flux prepared from the exact temperature gradient
    let mut init = build_profile(Preset::Acoustic, 1e-2, true, &pp, &grid).unwrap();
    let a = 1e-2;
    let pi = std::f64::consts::PI;
    for (i, &x) in grid.x().iter().enumerate().take(grid.last()).skip(1) {
        init.fields.q[i] = a * pi * (pi * x).sin();
    }
    let residual = |s: &State| {
        let f = &s.fields;
        let d = grid.sbp_d1_vec(&f.theta);
        (1..grid.last()).map(|i| (f.q[i] + pp.kappa.value(f.theta[i]) * d[i] / f.v[i]).abs()).fold(0.0, f64::max)
    };
    let r0 = residual(&init);
    assert!(r0 > 0.0);
    let model = Model::new(&grid, &pp, 0.0);
    let stepper = ImexStepper::new(model, true);
    let dt = solver::cfl_dt(&model, &init.fields, 0.5).unwrap();
    let mut s = init;
    for _ in 0..100 {
        s = stepper.step(&s, dt).unwrap();
        assert!(residual(&s) <= 10.0 * r0);
    }
}

#[test]
fn acoustic_self_convergence() {
    let pp = PhysParams::default();
    let solve = |n: usize| {
        let grid = Grid::new(n).unwrap();
        let init = build_profile(Preset::Acoustic, 1e-3, false, &pp, &grid).unwrap();
        let traj = solver::run(&grid, &pp, &init, &cfl(0.5), None, &mut []).unwrap();
        (grid, traj.state.fields.u)
    };
    let (g0, u0) = solve(64);
    let (g1, u1) = solve(128);
    let (g2, u2) = solve(256);
    let u1c = g0.resample(&g1, &u1);
    let u2c = g0.resample(&g2, &u2);
    let diff = |a: &[f64], b: &[f64]| g0.l2(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>());
    let e1 = diff(&u0, &u1c);
    let e2 = diff(&u1c, &u2c);
    let order = (e1 / e2).ln() / (g0.dx() / g1.dx()).ln();
    eprintln!("self-convergence order {order} ({e1:e}, {e2:e})");
    assert!(order >= 1.8);
}

#[test]
fn manufactured_solution_converges_at_second_order() {
    let pp = PhysParams { tau: 0.05, ..PhysParams::default() };
    let m = Manufactured::five_field(0.05);
    let t_end = 0.5;
    let errors = |n: usize| {
        let grid = Grid::new(n).unwrap();
        let init = State::new(0.0, m.sample(&grid, 0.0));
        let traj = solver::run(&grid, &pp, &init, &cfl(t_end), Some(&m), &mut []).unwrap();
        let exact = m.sample(&grid, t_end);
        let e: Vec<f64> = traj
            .state
            .fields
            .arrays()
            .iter()
            .zip(exact.arrays())
            .map(|(a, b)| grid.l2(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>()))
            .collect();
        (grid.dx(), e)
    };
    let (h0, e0) = errors(64);
    let (h1, e1) = errors(128);
    for k in 0..5 {
        let order = (e0[k] / e1[k]).ln() / (h0 / h1).ln();
        eprintln!("field {k}: {:e} {:e} order {order}", e0[k], e1[k]);
        assert!(order >= 1.8);
    }
}

struct Counter(usize);

impl Probe for Counter {
    fn observe(&mut self, _: &Model<'_>, _: &State) -> relaxnsf::Result<()> {
        Ok(())
    }
    fn on_step(&mut self, _: &Model<'_>, _: &State, _: &State) -> relaxnsf::Result<()> {
        self.0 += 1;
        Ok(())
    }
}

#[test]
fn runs_are_bit_identical() {
    let grid = Grid::new(32).unwrap();
    let pp = PhysParams::default();
    let init = build_profile(Preset::Thermal, 2e-2, false, &pp, &grid).unwrap();
    let cfg = SchemeConfig { eps: 0.01, ..cfl(0.2) };
    let mut c = Counter(0);
    let a = solver::run(&grid, &pp, &init, &cfg, None, &mut [&mut c]).unwrap();
    let b = solver::run(&grid, &pp, &init, &cfg, None, &mut []).unwrap();
    assert_eq!(a.state, b.state);
    assert_eq!(c.0, a.summary.steps_accepted);
}

#[test]
fn step_failure_aborts_with_time() {
    let grid = Grid::new(16).unwrap();
    let pp = PhysParams::default();
    let init = build_profile(Preset::Acoustic, 0.3, false, &pp, &grid).unwrap();
    let cfg = SchemeConfig { dt: DtPolicy::Fixed(10.0), ..cfl(10.0) };
    match solver::run(&grid, &pp, &init, &cfg, None, &mut []) {
        Err(relaxnsf::Error::StepAborted { t, .. }) => assert!(t >= 0.0),
        other => panic!("expected abort, got {other:?}"),
    }
}

#[test]
fn flux_step_follows_the_square_root_of_tau() {
    let grid = Grid::new(64).unwrap();
    let mut dts = Vec::new();
    let taus = [1e-2, 1e-4, 1e-6];
    for tau in taus {
        let pp = PhysParams { tau, ..PhysParams::default() };
        let init = build_profile(Preset::Acoustic, 1e-3, true, &pp, &grid).unwrap();
        let model = Model::new(&grid, &pp, 0.0);
        dts.push(solver::cfl_dt(&model, &init.fields, 0.5).unwrap());
    }
    let fit = relaxnsf::harness::fit_order(&taus, &dts).unwrap();
    assert!((0.45..=0.55).contains(&fit.slope), "{}", fit.slope);
}
