//! Time integration of the relaxed system.

mod imex;
mod mms;
mod rhs;

pub use imex::{solve_relaxation, Forcing, ImexStepper};
pub use mms::{mms_rhs, FieldSeries, Jet, Manufactured, Mode, Trig};
pub use rhs::Model;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Gate, Result};
use crate::state::{Fields, State};
use crate::structure::{self, StateVec};

/// How the step size is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DtPolicy {
    Fixed(f64),
    /// `dt = cfl * dx / max speed`, the speed re-evaluated every `refresh`
    /// accepted steps
    Cfl { cfl: f64, refresh: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub dt: DtPolicy,
    pub eps: f64,
    pub imex: bool,
    pub t_end: f64,
    /// probe interval; `None` probes only at the start and the end
    pub cadence: Option<f64>,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            dt: DtPolicy::Cfl { cfl: 0.5, refresh: 10 },
            eps: 0.0,
            imex: true,
            t_end: 1.0,
            cadence: None,
        }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        match self.dt {
            DtPolicy::Fixed(dt) if !(dt > 0.0 && dt.is_finite()) => {
                return Err(Error::Config(format!("fixed dt must be positive, got {dt}")))
            }
            DtPolicy::Cfl { cfl, .. } if !(cfl > 0.0 && cfl <= 1.0) => {
                return Err(Error::Config(format!("cfl must lie in (0, 1], got {cfl}")))
            }
            DtPolicy::Cfl { refresh: 0, .. } => {
                return Err(Error::Config("dt refresh interval must be at least 1".into()))
            }
            _ => {}
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::Config(format!("eps must be nonnegative, got {}", self.eps)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end must be nonnegative, got {}", self.t_end)));
        }
        if let Some(c) = self.cadence {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Config(format!("output cadence must be positive, got {c}")));
            }
        }
        Ok(())
    }
}

/// Observer called by [`integrate`].
pub trait Probe {
    /// At `t = 0` and at every output time.
    fn observe(&mut self, model: &Model<'_>, state: &State) -> Result<()>;

    /// After every accepted step.
    fn on_step(&mut self, _model: &Model<'_>, _prev: &State, _next: &State) -> Result<()> {
        Ok(())
    }
}

/// Records the state at every output time.
#[derive(Debug, Default, Clone)]
pub struct Snapshots {
    pub states: Vec<State>,
}

impl Probe for Snapshots {
    fn observe(&mut self, _model: &Model<'_>, state: &State) -> Result<()> {
        self.states.push(state.clone());
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbortInfo {
    pub t: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub dt_min: f64,
    pub dt_max: f64,
    pub t_final: f64,
    pub abort: Option<AbortInfo>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub state: State,
    pub summary: RunSummary,
}

/// Largest characteristic speed over all nodes.
pub fn max_char_speed(model: &Model<'_>, f: &Fields) -> Result<f64> {
    let mut speed: f64 = 0.0;
    for (i, &x) in model.grid.x().iter().enumerate() {
        let u = StateVec::new(f.v[i], f.u[i], f.theta[i], f.q[i], f.s[i]);
        let m = structure::assemble(&u, x, model.params, model.eps).map_err(|e| match e {
            Error::Inadmissible { gate, .. } => Error::Inadmissible { node: Some(i), gate },
            other => other,
        })?;
        speed = speed.max(structure::max_speed(&m)?);
    }
    Ok(speed)
}

/// CFL step for the current state.
pub fn cfl_dt(model: &Model<'_>, f: &Fields, cfl: f64) -> Result<f64> {
    let speed = max_char_speed(model, f)?;
    if speed > 0.0 {
        Ok(cfl * model.grid.dx() / speed)
    } else {
        Err(Error::Numerical("zero characteristic speed".into()))
    }
}

const MAX_FAILURES: usize = 4;

fn output_times(cfg: &SchemeConfig) -> Vec<f64> {
    let mut out = Vec::new();
    if let Some(c) = cfg.cadence {
        let mut k = 1usize;
        loop {
            let t = k as f64 * c;
            if t >= cfg.t_end * (1.0 - 1e-12) {
                break;
            }
            out.push(t);
            k += 1;
        }
    }
    if cfg.t_end > 0.0 {
        out.push(cfg.t_end);
    }
    out
}

fn retryable(e: &Error) -> bool {
    match e {
        Error::Inadmissible { gate, .. } => *gate != Gate::APrioriBand,
        Error::NewtonDiverged { .. } | Error::Numerical(_) => true,
        _ => false,
    }
}

/// Advance to `cfg.t_end`; an abort is reported in the summary rather than
/// as an error.
pub fn integrate_report(
    model: &Model<'_>,
    stepper: &ImexStepper<'_>,
    initial: &State,
    cfg: &SchemeConfig,
    probes: &mut [&mut dyn Probe],
) -> Result<Trajectory> {
    cfg.validate()?;
    let mut state = initial.clone();
    for p in probes.iter_mut() {
        p.observe(model, &state)?;
    }
    let mut summary = RunSummary {
        steps_accepted: 0,
        steps_rejected: 0,
        dt_min: f64::INFINITY,
        dt_max: 0.0,
        t_final: state.t,
        abort: None,
    };
    let mut dt_base = match cfg.dt {
        DtPolicy::Fixed(dt) => dt,
        DtPolicy::Cfl { .. } => 0.0,
    };
    let t0 = state.t;
    'outer: for t_out in output_times(cfg) {
        let t_out = t0 + t_out;
        while state.t < t_out {
            if let DtPolicy::Cfl { cfl, refresh } = cfg.dt {
                if summary.steps_accepted % refresh == 0 || dt_base == 0.0 {
                    match cfl_dt(model, &state.fields, cfl) {
                        Ok(dt) => dt_base = dt,
                        Err(e) => {
                            summary.abort = Some(AbortInfo { t: state.t, reason: e.to_string() });
                            break 'outer;
                        }
                    }
                }
            }
            let remaining = t_out - state.t;
            // avoid a sliver step just before an output time
            let mut dt = if remaining <= dt_base * (1.0 + 1e-10) { remaining } else { dt_base };
            let mut failures = 0;
            let next = loop {
                match stepper.step(&state, dt) {
                    Ok(next) => break next,
                    Err(e) if retryable(&e) && failures + 1 < MAX_FAILURES => {
                        failures += 1;
                        summary.steps_rejected += 1;
                        dt *= 0.5;
                    }
                    Err(e) => {
                        if retryable(&e) {
                            summary.steps_rejected += 1;
                        }
                        summary.abort = Some(AbortInfo { t: state.t, reason: e.to_string() });
                        break 'outer;
                    }
                }
            };
            let mut next = next;
            if dt == remaining {
                next.t = t_out;
            }
            for p in probes.iter_mut() {
                p.on_step(model, &state, &next)?;
            }
            summary.steps_accepted += 1;
            summary.dt_min = summary.dt_min.min(dt);
            summary.dt_max = summary.dt_max.max(dt);
            state = next;
        }
        for p in probes.iter_mut() {
            p.observe(model, &state)?;
        }
    }
    summary.t_final = state.t;
    if summary.steps_accepted == 0 {
        summary.dt_min = 0.0;
    }
    Ok(Trajectory { state, summary })
}

/// Advance to `cfg.t_end`, failing with [`Error::StepAborted`] if the step
/// policy gives up.
pub fn integrate(
    model: &Model<'_>,
    stepper: &ImexStepper<'_>,
    initial: &State,
    cfg: &SchemeConfig,
    probes: &mut [&mut dyn Probe],
) -> Result<Trajectory> {
    let traj = integrate_report(model, stepper, initial, cfg, probes)?;
    match traj.summary.abort {
        Some(AbortInfo { t, ref reason }) => Err(Error::StepAborted { t, reason: reason.clone() }),
        None => Ok(traj),
    }
}

/// Convenience wrapper building the model and stepper from a scheme config.
pub fn run(
    grid: &crate::grid::Grid,
    params: &crate::constitutive::PhysParams,
    initial: &State,
    cfg: &SchemeConfig,
    forcing: Option<&dyn Forcing>,
    probes: &mut [&mut dyn Probe],
) -> Result<Trajectory> {
    let model = Model::new(grid, params, cfg.eps);
    let mut stepper = ImexStepper::new(model, cfg.imex);
    if let Some(f) = forcing {
        stepper = stepper.with_forcing(f);
    }
    integrate(&model, &stepper, initial, cfg, probes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::PhysParams;
    use crate::grid::Grid;

    #[test]
    fn zero_end_time_returns_initial_state() {
        let grid = Grid::new(16).unwrap();
        let pp = PhysParams::default();
        let mut init = State::equilibrium(grid.len());
        init.fields.v[3] = 1.01;
        let cfg = SchemeConfig { t_end: 0.0, ..SchemeConfig::default() };
        let traj = run(&grid, &pp, &init, &cfg, None, &mut []).unwrap();
        assert_eq!(traj.state, init);
        assert_eq!(traj.summary.steps_accepted, 0);
    }

    #[test]
    fn output_times_include_end() {
        let cfg = SchemeConfig { t_end: 1.0, cadence: Some(0.25), ..SchemeConfig::default() };
        assert_eq!(output_times(&cfg), vec![0.25, 0.5, 0.75, 1.0]);
        let cfg = SchemeConfig { t_end: 0.3, cadence: Some(0.25), ..SchemeConfig::default() };
        assert_eq!(output_times(&cfg), vec![0.25, 0.3]);
    }

    #[test]
    fn config_validation() {
        let bad = SchemeConfig { dt: DtPolicy::Cfl { cfl: 1.5, refresh: 1 }, ..SchemeConfig::default() };
        assert!(bad.validate().is_err());
        let bad = SchemeConfig { eps: -1.0, ..SchemeConfig::default() };
        assert!(bad.validate().is_err());
        assert!(SchemeConfig::default().validate().is_ok());
    }

    #[test]
    fn snapshots_hit_output_times_exactly() {
        let grid = Grid::new(16).unwrap();
        let pp = PhysParams::default();
        let cfg = SchemeConfig { t_end: 0.1, cadence: Some(0.03), ..SchemeConfig::default() };
        let mut snaps = Snapshots::default();
        run(&grid, &pp, &State::equilibrium(grid.len()), &cfg, None, &mut [&mut snaps]).unwrap();
        let ts: Vec<f64> = snaps.states.iter().map(|s| s.t).collect();
        assert_eq!(ts.len(), 5);
        assert_eq!(ts[0], 0.0);
        assert_eq!(*ts.last().unwrap(), 0.1);
    }
}
