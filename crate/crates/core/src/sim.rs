//! Closed-loop simulation of the four-phase co-carrying scenario.
//!
//! Plant, admittance reference, joint reference `Q`, and the PID integral
//! are stacked into one state vector and advanced together by a fixed-step
//! RK4. The noise sample and the interaction phase are frozen over each
//! step, so every stage sees a smooth right-hand side.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DVector, Matrix2, Vector2, Vector3};

use crate::admittance::{AdmittanceKind, AdmittanceParams, AdmittanceState};
use crate::baselines::{self, PidGains};
use crate::dynamics::{forward_kinematics, jacobian, solve_augmented, DynMatrices, RobotParams};
use crate::energy::{self, EnergyReport, PassivityMonitor};
use crate::error::{Error, Result};
use crate::field::{self, FieldParams, FieldSample, TaskReference};
use crate::human::{
    estimated_intention_in, human_force, true_intention_in, HumanParams, IntentSample, NoiseTrack, Phase,
    PhaseSchedule,
};
use crate::pvfc::{self, PvfcGains};

/// `(q1, q2, qf, q̇1, q̇2, q̇f, x_a, y_a, ẋ_a, ẏ_a, Q1, Q2, ∫e_x, ∫e_y)`.
pub const STATE_DIM: usize = 14;
pub type SimState = [f64; STATE_DIM];

/// Tolerance of the integral passivity check (J).
pub const INTEGRAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Proposed,
    MdkPid,
    MdPid,
    Opvfc,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Proposed, Strategy::MdkPid, Strategy::MdPid, Strategy::Opvfc];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Proposed => "proposed",
            Strategy::MdkPid => "mdk_pid",
            Strategy::MdPid => "md_pid",
            Strategy::Opvfc => "opvfc",
        }
    }

    pub fn uses_pvfc(self) -> bool {
        matches!(self, Strategy::Proposed | Strategy::Opvfc)
    }

    pub fn admittance(self) -> AdmittanceKind {
        match self {
            Strategy::MdkPid => AdmittanceKind::MassDamperSpring,
            _ => AdmittanceKind::MassDamper,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid("strategy", format!("unknown strategy `{s}` (expected proposed, mdk_pid, md_pid, opvfc)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialConditions {
    pub q: Vector2<f64>,
    pub qf: f64,
    pub qd: Vector2<f64>,
    /// Ignored by the PID strategies, which keep the flywheel at rest.
    pub qdf: f64,
}

impl Default for InitialConditions {
    fn default() -> Self {
        Self {
            q: Vector2::new(-0.785, 1.57),
            qf: 0.0,
            qd: Vector2::new(0.01, 0.01),
            qdf: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub strategy: Strategy,
    pub dt_sim: f64,
    pub dt_out: f64,
    pub t_end: f64,
    pub seed: u64,
    pub robot: RobotParams,
    pub initial: InitialConditions,
    pub human: HumanParams,
    pub phases: PhaseSchedule,
    pub admittance: AdmittanceParams,
    pub field: FieldParams,
    pub pvfc: PvfcGains,
    pub pid: PidGains,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::Proposed,
            dt_sim: 1e-3,
            dt_out: 0.01,
            t_end: 20.0,
            seed: 42,
            robot: RobotParams::default(),
            initial: InitialConditions::default(),
            human: HumanParams::default(),
            phases: PhaseSchedule::default(),
            admittance: AdmittanceParams::default(),
            field: FieldParams::default(),
            pvfc: PvfcGains::default(),
            pid: PidGains::default(),
        }
    }
}

fn whole_ratio(num: f64, den: f64) -> Option<usize> {
    let r = num / den;
    let n = r.round();
    ((r - n).abs() <= 1e-9 * n.max(1.0) && n >= 1.0).then_some(n as usize)
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_sim.is_finite() && self.dt_sim > 0.0) {
            return Err(Error::invalid("sim.dt_sim", "must be > 0"));
        }
        if !(self.dt_out.is_finite() && self.dt_out > 0.0) {
            return Err(Error::invalid("sim.dt_out", "must be > 0"));
        }
        if self.dt_sim > self.dt_out {
            return Err(Error::invalid("sim.dt_sim", "must not exceed sim.dt_out"));
        }
        if whole_ratio(self.dt_out, self.dt_sim).is_none() {
            return Err(Error::invalid("sim.dt_out", "must be a whole multiple of sim.dt_sim"));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::invalid("sim.t_end", "must be > 0"));
        }
        if whole_ratio(self.t_end, self.dt_out).is_none() {
            return Err(Error::invalid("sim.t_end", "must be a whole multiple of sim.dt_out"));
        }
        if self.field.ea != self.pvfc.ea {
            return Err(Error::invalid("pvfc.ea", "field and controller budgets differ"));
        }
        if self.pvfc.k2.len() != 3 {
            return Err(Error::invalid("pvfc.k2", "needs one entry per augmented coordinate (3)"));
        }
        let finite = self.initial.q.iter().chain(self.initial.qd.iter()).all(|v| v.is_finite())
            && self.initial.qf.is_finite()
            && self.initial.qdf.is_finite();
        if !finite {
            return Err(Error::invalid("initial", "values must be finite"));
        }
        self.robot.validate()?;
        self.human.validate()?;
        self.phases.validate()?;
        self.admittance.validate()?;
        self.field.validate()?;
        self.pvfc.validate()?;
        self.pid.validate()
    }

    pub fn steps_per_output(&self) -> usize {
        whole_ratio(self.dt_out, self.dt_sim).unwrap_or(1)
    }

    /// Output samples after `t = 0`.
    pub fn output_count(&self) -> usize {
        whole_ratio(self.t_end, self.dt_out).unwrap_or(0)
    }

    /// Row label; plain PVFC rows carry their `K1` gain.
    pub fn label(&self) -> String {
        match self.strategy {
            Strategy::Opvfc => format!("opvfc_k1_{}", self.field.k1[(0, 0)]),
            s => s.name().to_string(),
        }
    }

    pub fn with_strategy(&self, strategy: Strategy) -> Self {
        Self { strategy, ..self.clone() }
    }

    pub fn with_k1(&self, k1: f64) -> Self {
        let mut c = self.clone();
        c.field.k1 = Matrix2::identity() * k1;
        c
    }
}

/// One output sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub q: Vector2<f64>,
    pub qf: f64,
    pub qda: Vector3<f64>,
    pub x: Vector2<f64>,
    pub x_h: Vector2<f64>,
    pub x_hat: Vector2<f64>,
    pub x_a: Vector2<f64>,
    pub f_ext: Vector2<f64>,
    pub tau_a: Vector3<f64>,
    pub energy: EnergyReport,
    /// `½VᵀMV` of the field; NaN when no field is in use.
    pub field_energy: f64,
    pub abort_flag: bool,
}

impl TraceRow {
    /// End-effector velocity.
    pub fn xd(&self, p: &RobotParams) -> Vector2<f64> {
        jacobian(&self.q, p) * Vector2::new(self.qda[0], self.qda[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbortInfo {
    pub t: f64,
    pub field_energy: f64,
    pub budget: f64,
}

/// Energy-balance conformance over every integrator step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassivitySummary {
    pub max_abs_residual: f64,
    /// End of the step with the largest residual.
    pub t_max_residual: f64,
    pub max_integral_violation: f64,
    pub segments: usize,
    pub integral_form_holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
    pub abort: Option<AbortInfo>,
    pub passivity: PassivitySummary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryMetrics {
    pub avg_fx: f64,
    pub avg_fy: f64,
    pub avg_power: f64,
    pub aborted_at: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub label: String,
    pub metrics: SummaryMetrics,
}

/// Mean absolute value of a sampled series.
pub fn average_metric(series: &[f64]) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok(series.iter().map(|v| v.abs()).sum::<f64>() / series.len() as f64)
}

/// Averages over every sample after `t = 0`.
pub fn summarize(trace: &Trace) -> Result<SummaryMetrics> {
    let rows = trace.rows.get(1..).unwrap_or(&[]);
    let col = |f: fn(&TraceRow) -> f64| average_metric(&rows.iter().map(f).collect::<Vec<_>>());
    Ok(SummaryMetrics {
        avg_fx: col(|r| r.f_ext[0])?,
        avg_fy: col(|r| r.f_ext[1])?,
        avg_power: col(|r| r.energy.p_r2h)?,
        aborted_at: trace.abort.map(|a| a.t),
    })
}

/// Classic four-stage Runge–Kutta step.
pub fn rk4_step<const N: usize, E>(
    y: &[f64; N],
    t: f64,
    dt: f64,
    mut f: impl FnMut(f64, &[f64; N]) -> std::result::Result<[f64; N], E>,
) -> std::result::Result<[f64; N], E> {
    debug_assert!(dt > 0.0);
    let shift = |k: &[f64; N], h: f64| {
        let mut out = *y;
        for (o, ki) in out.iter_mut().zip(k) {
            *o += h * ki;
        }
        out
    };
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * dt, &shift(&k1, 0.5 * dt))?;
    let k3 = f(t + 0.5 * dt, &shift(&k2, 0.5 * dt))?;
    let k4 = f(t + dt, &shift(&k3, dt))?;
    let mut out = *y;
    for i in 0..N {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

/// Everything that follows from the state without the controller.
struct Observation {
    t: f64,
    q: Vector2<f64>,
    qf: f64,
    qd: Vector2<f64>,
    qda: DVector<f64>,
    x: Vector2<f64>,
    j: Matrix2<f64>,
    truth: IntentSample,
    est: IntentSample,
    adm: AdmittanceState,
    q_ref: Vector2<f64>,
    integral: Vector2<f64>,
    f_ext: Vector2<f64>,
    tau_ext_a: DVector<f64>,
    dm: DynMatrices,
}

struct Control {
    tau_a: DVector<f64>,
    xdd_a: Vector2<f64>,
    qd_ref: Vector2<f64>,
    s_val: f64,
    field: Option<FieldSample>,
}

struct Closure<'a> {
    cfg: &'a ScenarioConfig,
}

impl Closure<'_> {
    fn observe(&self, t: f64, y: &SimState, phase: Phase, d: f64) -> Observation {
        let cfg = self.cfg;
        let q = Vector2::new(y[0], y[1]);
        let qd = Vector2::new(y[3], y[4]);
        let qda = DVector::from_column_slice(&y[3..6]);
        let x = forward_kinematics(&q, &cfg.robot);
        let j = jacobian(&q, &cfg.robot);
        let truth = true_intention_in(phase, t, &cfg.phases);
        let est = estimated_intention_in(phase, t, &cfg.phases, d);
        let f_ext = human_force(&x, &(j * qd), &truth, &cfg.human);
        let tau_ext = j.transpose() * f_ext;
        Observation {
            t,
            q,
            qf: y[2],
            qd,
            qda,
            x,
            j,
            truth,
            est,
            adm: AdmittanceState {
                xa: Vector2::new(y[6], y[7]),
                xda: Vector2::new(y[8], y[9]),
            },
            q_ref: Vector2::new(y[10], y[11]),
            integral: Vector2::new(y[12], y[13]),
            f_ext,
            tau_ext_a: DVector::from_column_slice(&[tau_ext[0], tau_ext[1], 0.0]),
            dm: DynMatrices::evaluate(&q, &qd, &cfg.robot),
        }
    }

    fn control(&self, o: &Observation) -> Result<Control> {
        let cfg = self.cfg;
        let xdd_a = cfg.strategy.admittance().accel(&o.adm, &o.est, &o.f_ext, &cfg.admittance);
        match cfg.strategy {
            Strategy::Proposed | Strategy::Opvfc => {
                let tref = if cfg.strategy == Strategy::Proposed {
                    TaskReference {
                        q_ref: o.q_ref,
                        xd: o.adm.xda,
                        xdd: xdd_a,
                    }
                } else {
                    TaskReference::from_intent(o.q_ref, &o.est)
                };
                let sample = field::field_at(&o.q, &tref, &cfg.field, &cfg.robot)?;
                let vadot = field::field_time_derivative(&o.q, &o.qd, &tref, &cfg.field, &cfg.robot)?;
                let out = if cfg.strategy == Strategy::Proposed {
                    pvfc::evaluate(&o.dm.ma, &o.dm.ca, &sample.va, &vadot, &o.qda, &cfg.pvfc, true)
                } else {
                    baselines::opvfc_torque(&o.dm.ma, &o.dm.ca, &sample, &vadot, &o.qda, &cfg.pvfc)
                };
                Ok(Control {
                    tau_a: out.tau,
                    xdd_a,
                    qd_ref: field::reference_rate(&o.q, &tref.xd, &cfg.robot).qd_ref,
                    s_val: out.s_val,
                    field: Some(sample),
                })
            }
            Strategy::MdkPid | Strategy::MdPid => {
                let f = baselines::pid_force(
                    &(o.adm.xa - o.x),
                    &(o.adm.xda - o.j * o.qd),
                    &o.integral,
                    &cfg.pid,
                );
                let tau = baselines::torque_from_task_force(&o.j, &f);
                Ok(Control {
                    tau_a: DVector::from_column_slice(&[tau[0], tau[1], 0.0]),
                    xdd_a,
                    qd_ref: Vector2::zeros(),
                    s_val: 0.0,
                    field: None,
                })
            }
        }
    }

    /// Rate of change of stored energy predicted by the port.
    fn port_power(&self, o: &Observation, c: &Control) -> f64 {
        if self.cfg.strategy.uses_pvfc() {
            energy::port_power(&o.qda, &o.tau_ext_a, c.s_val, &self.cfg.pvfc)
        } else {
            o.qda.dot(&(&c.tau_a + &o.tau_ext_a))
        }
    }

    fn derivative(&self, o: &Observation, c: &Control) -> Result<SimState> {
        let qdd = solve_augmented(&o.dm.ma, &o.dm.ca, &o.qda, &c.tau_a, &o.tau_ext_a)?;
        let e = o.adm.xa - o.x;
        Ok([
            o.qda[0],
            o.qda[1],
            o.qda[2],
            qdd[0],
            qdd[1],
            qdd[2],
            o.adm.xda[0],
            o.adm.xda[1],
            c.xdd_a[0],
            c.xdd_a[1],
            c.qd_ref[0],
            c.qd_ref[1],
            e[0],
            e[1],
        ])
    }

    fn row(&self, o: &Observation, c: Option<&Control>, residual: f64, abort: Option<f64>) -> TraceRow {
        let cfg = self.cfg;
        let (ka, k_robot, k_flywheel) = energy::kinetic_energy(&o.dm.ma, &o.qda);
        let pvfc = cfg.strategy.uses_pvfc();
        let alpha = if pvfc { pvfc::alpha(ka, cfg.pvfc.ea) } else { 0.0 };
        let v2 = match (pvfc, c.and_then(|c| c.field.as_ref())) {
            (true, Some(f)) => energy::lyapunov_v2(&o.q, &o.q_ref, &o.qda, f, &o.dm.ma, alpha),
            (true, None) => f64::NAN,
            (false, _) => 0.0,
        };
        let tau_a = c.map_or(Vector3::from_element(f64::NAN), |c| Vector3::new(c.tau_a[0], c.tau_a[1], c.tau_a[2]));
        let field_energy = match (abort, c.and_then(|c| c.field.as_ref())) {
            (Some(e), _) => e,
            (None, Some(f)) => f.manip_energy,
            (None, None) => f64::NAN,
        };
        TraceRow {
            t: o.t,
            q: o.q,
            qf: o.qf,
            qda: Vector3::new(o.qda[0], o.qda[1], o.qda[2]),
            x: o.x,
            x_h: o.truth.pos,
            x_hat: o.est.pos,
            x_a: o.adm.xa,
            f_ext: o.f_ext,
            tau_a,
            energy: EnergyReport {
                ka,
                k_robot,
                k_flywheel,
                alpha,
                p_r2h: energy::power_flow(&o.qda, &o.tau_ext_a),
                v1: energy::lyapunov_v1(ka, cfg.pvfc.kd_a),
                v2,
                passivity_residual: residual,
            },
            field_energy,
            abort_flag: abort.is_some(),
        }
    }
}

fn kinetic(y: &SimState, p: &RobotParams) -> f64 {
    let q = Vector2::new(y[0], y[1]);
    let dm = DynMatrices::evaluate(&q, &Vector2::zeros(), p);
    energy::kinetic_energy(&dm.ma, &DVector::from_column_slice(&y[3..6])).0
}

/// Initial closed-loop state: reference starts on the noiseless estimate,
/// `Q` on the initial joint angles.
pub fn initial_state(cfg: &ScenarioConfig) -> SimState {
    let i = &cfg.initial;
    let est = estimated_intention_in(cfg.phases.phase(0.0), 0.0, &cfg.phases, 0.0);
    let qdf = if cfg.strategy.uses_pvfc() { i.qdf } else { 0.0 };
    [
        i.q[0], i.q[1], i.qf, i.qd[0], i.qd[1], qdf, est.pos[0], est.pos[1], est.vel[0], est.vel[1], i.q[0], i.q[1],
        0.0, 0.0,
    ]
}

fn field_abort(err: Error) -> Result<(f64, f64)> {
    match err {
        Error::FieldEnergyExceeded { field_energy, budget } => Ok((field_energy, budget)),
        other => Err(other),
    }
}

/// Runs one scenario to the end or to the first field-energy violation.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<(Trace, SummaryMetrics)> {
    cfg.validate()?;
    let sys = Closure { cfg };
    let noise = NoiseTrack::new(cfg.human.noise_std, cfg.seed, cfg.dt_out, cfg.t_end)?;
    let dt = cfg.dt_sim;
    let spo = cfg.steps_per_output();
    let n_out = cfg.output_count();
    let mut monitor = PassivityMonitor::new(cfg.pvfc.kd_a, INTEGRAL_TOL);
    let mut rows = Vec::with_capacity(n_out + 1);
    let mut abort = None;
    let mut y = initial_state(cfg);
    let mut residual = 0.0;
    let mut t_max_residual = 0.0;

    // Logs the sample at `t`; reports an abort when the field has no solution.
    let log = |t: f64, y: &SimState, residual: f64, rows: &mut Vec<TraceRow>| -> Result<Option<AbortInfo>> {
        let o = sys.observe(t, y, cfg.phases.phase(t), noise.sample_at(t));
        match sys.control(&o) {
            Ok(c) => {
                rows.push(sys.row(&o, Some(&c), residual, None));
                Ok(None)
            }
            Err(e) => {
                let (field_energy, budget) = field_abort(e)?;
                rows.push(sys.row(&o, None, residual, Some(field_energy)));
                Ok(Some(AbortInfo { t, field_energy, budget }))
            }
        }
    };

    abort = abort.or(log(0.0, &y, residual, &mut rows)?);
    'outer: for k in 0..n_out {
        if abort.is_some() {
            break;
        }
        for s in 0..spo {
            let step = k * spo + s;
            let t = step as f64 * dt;
            let phase = cfg.phases.phase(t + 0.5 * dt);
            let d = noise.sample_at(t);
            let mut port = [0.0; 4];
            let mut ext = [0.0; 4];
            let mut stage = 0;
            let ka_prev = kinetic(&y, &cfg.robot);
            let res = rk4_step(&y, t, dt, |ts, ys| {
                let o = sys.observe(ts, ys, phase, d);
                let c = sys.control(&o).map_err(|e| (ts, *ys, e))?;
                port[stage] = sys.port_power(&o, &c);
                ext[stage] = o.qda.dot(&o.tau_ext_a);
                stage += 1;
                sys.derivative(&o, &c).map_err(|e| (ts, *ys, e))
            });
            match res {
                Ok(next) => {
                    if next.iter().any(|v| !v.is_finite()) {
                        return Err(Error::NonFinite("closed-loop state"));
                    }
                    y = next;
                    let mean = |p: &[f64; 4]| (p[0] + 2.0 * p[1] + 2.0 * p[2] + p[3]) / 6.0;
                    residual = monitor.step(ka_prev, kinetic(&y, &cfg.robot), dt, mean(&port), mean(&ext));
                    if residual.abs() == monitor.max_abs_residual {
                        t_max_residual = t + dt;
                    }
                }
                Err((ts, ys, e)) => {
                    let (field_energy, budget) = field_abort(e)?;
                    let o = sys.observe(ts, &ys, phase, d);
                    rows.push(sys.row(&o, None, residual, Some(field_energy)));
                    abort = Some(AbortInfo { t: ts, field_energy, budget });
                    break 'outer;
                }
            }
        }
        let t = ((k + 1) * spo) as f64 * dt;
        abort = log(t, &y, residual, &mut rows)?;
    }

    let trace = Trace {
        rows,
        abort,
        passivity: PassivitySummary {
            max_abs_residual: monitor.max_abs_residual,
            t_max_residual,
            max_integral_violation: monitor.max_integral_violation,
            segments: monitor.segments,
            integral_form_holds: monitor.integral_form_holds(),
        },
    };
    let metrics = summarize(&trace)?;
    Ok((trace, metrics))
}

/// The five comparison rows, in table order.
pub fn comparison_configs(base: &ScenarioConfig) -> Vec<ScenarioConfig> {
    vec![
        base.with_strategy(Strategy::MdkPid),
        base.with_strategy(Strategy::MdPid),
        base.with_strategy(Strategy::Opvfc).with_k1(100.0),
        base.with_strategy(Strategy::Opvfc).with_k1(10.0),
        base.with_strategy(Strategy::Proposed),
    ]
}

/// Runs every configuration on its own thread, keeping the input order.
pub fn run_table(cfgs: &[ScenarioConfig]) -> Result<Vec<(Trace, SummaryMetrics)>> {
    if cfgs.is_empty() {
        return Err(Error::invalid("table", "needs at least one configuration"));
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = cfgs.iter().map(|cfg| scope.spawn(move || run_scenario(cfg))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario thread panicked"))
            .collect()
    })
}

/// One summary row per configuration.
pub fn compare_table(cfgs: &[ScenarioConfig]) -> Result<Vec<TableRow>> {
    Ok(run_table(cfgs)?
        .into_iter()
        .zip(cfgs)
        .map(|((_, metrics), cfg)| TableRow { label: cfg.label(), metrics })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn decay(dt: f64, t_end: f64) -> f64 {
        let mut y = [1.0];
        let n = (t_end / dt).round() as usize;
        for i in 0..n {
            y = rk4_step(&y, i as f64 * dt, dt, |_, y| Ok::<_, ()>([-y[0]])).unwrap();
        }
        y[0]
    }

    #[test]
    fn rk4_local_error() {
        assert!((decay(0.1, 0.1) - (-0.1f64).exp()).abs() < 1e-7);
    }

    #[test]
    fn rk4_fourth_order() {
        let exact = (-1.0f64).exp();
        let e1 = (decay(0.1, 1.0) - exact).abs();
        let e2 = (decay(0.05, 1.0) - exact).abs();
        let ratio = e1 / e2;
        assert!((ratio - 16.0).abs() < 1.0, "{ratio}");
    }

    #[test]
    fn rk4_constant_velocity() {
        let y = rk4_step(&[0.25, 0.5], 0.0, 1e-3, |_, y| Ok::<_, ()>([y[1], 0.0])).unwrap();
        assert_eq!(y, [0.25 + 0.5 * 1e-3, 0.5]);
    }

    #[test]
    fn rk4_propagates_stage_errors() {
        let r = rk4_step(&[1.0], 0.0, 0.1, |t, _| if t > 0.0 { Err(t) } else { Ok([1.0]) });
        assert_eq!(r, Err(0.05));
    }

    #[test]
    fn average_metric_values() {
        assert_eq!(average_metric(&[2.0; 5]).unwrap(), 2.0);
        assert_eq!(average_metric(&[1.0, -1.0, 1.0, -1.0]).unwrap(), 1.0);
        assert!(matches!(average_metric(&[]), Err(Error::EmptySeries)));
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert!("pid".parse::<Strategy>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(ScenarioConfig::default().validate().is_ok());
        let c = ScenarioConfig { dt_sim: 0.02, ..ScenarioConfig::default() };
        assert!(c.validate().is_err());
        let c = ScenarioConfig { dt_out: 0.0105, ..ScenarioConfig::default() };
        assert!(c.validate().is_err());
        assert_eq!(ScenarioConfig::default().output_count(), 2000);
        assert_eq!(ScenarioConfig::default().steps_per_output(), 10);
    }

    #[test]
    fn labels() {
        let rows: Vec<_> = comparison_configs(&ScenarioConfig::default()).iter().map(|c| c.label()).collect();
        assert_eq!(rows, ["mdk_pid", "md_pid", "opvfc_k1_100", "opvfc_k1_10", "proposed"]);
    }

    #[test]
    fn short_run_is_consistent() {
        let cfg = ScenarioConfig { t_end: 0.2, ..ScenarioConfig::default() };
        let (trace, m) = run_scenario(&cfg).unwrap();
        assert_eq!(trace.rows.len(), 21);
        assert!(trace.abort.is_none());
        for r in &trace.rows {
            assert_eq!(r.energy.ka, r.energy.k_robot + r.energy.k_flywheel);
            assert!(!r.abort_flag);
        }
        assert_abs_diff_eq!(trace.rows[20].t, 0.2, epsilon = 1e-12);
        assert!(m.avg_fx >= 0.0 && m.avg_power >= 0.0);
        let (again, _) = run_scenario(&cfg).unwrap();
        assert_eq!(trace, again);
    }

    #[test]
    fn single_config_table_matches_run() {
        let cfg = ScenarioConfig { t_end: 0.1, strategy: Strategy::MdPid, ..ScenarioConfig::default() };
        let table = compare_table(std::slice::from_ref(&cfg)).unwrap();
        assert_eq!(table.len(), 1);
        assert_eq!(table[0].metrics, run_scenario(&cfg).unwrap().1);
    }
}
