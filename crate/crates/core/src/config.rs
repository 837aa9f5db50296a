//! TOML scenario files.
//!
//! Every key is optional; anything left out keeps its default. Matrices
//! are given by their diagonals. Unknown keys are rejected.
//!
//! ```toml
//! strategy = "proposed"   # proposed | mdk_pid | md_pid | opvfc
//! seed = 42
//!
//! [sim]
//! dt_sim = 0.001
//! dt_out = 0.01
//! t_end = 20.0
//!
//! [robot]
//! m1 = 3.05
//! m2 = 3.05
//! l1 = 0.4
//! l2 = 0.4
//! i1 = 0.0414
//! i2 = 0.0414
//! mf = 10.0
//!
//! [initial]
//! q = [-0.785, 1.57]
//! qf = 0.0
//! qd = [0.01, 0.01]
//! qdf = 1.0
//!
//! [human]
//! k1h = [500.0, 500.0]
//! k2h = [100.0, 100.0]
//! noise_std = 0.005
//!
//! [phases]
//! t1 = 5.0
//! t2 = 10.0
//! t3 = 15.0
//!
//! [admittance]
//! md = [1.0, 1.0]
//! dd = [14.0, 14.0]
//! kd = [100.0, 100.0]
//!
//! [field]
//! k1 = [100.0, 100.0]
//! h_fd = 1e-5
//!
//! [pvfc]
//! ea = 3000.0
//! kd_a = 30.0
//! r1 = 3
//! r2 = 5
//! kappa = 2.0
//! k2 = [5.0, 5.0, 5.0]
//! delta1 = -0.01
//! delta2 = 0.01
//! eta_min = -1.0
//! eta_max = 1.0
//!
//! [pid]
//! kp = [300.0, 300.0]
//! ki = [10.0, 10.0]
//! kd = [400.0, 400.0]
//! ```

use std::path::Path;

use nalgebra::{DVector, Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{ScenarioConfig, Strategy};

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    strategy: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default)]
    sim: RawSim,
    #[serde(default)]
    robot: RawRobot,
    #[serde(default)]
    initial: RawInitial,
    #[serde(default)]
    human: RawHuman,
    #[serde(default)]
    phases: RawPhases,
    #[serde(default)]
    admittance: RawAdmittance,
    #[serde(default)]
    field: RawField,
    #[serde(default)]
    pvfc: RawPvfc,
    #[serde(default)]
    pid: RawPid,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSim {
    dt_sim: Option<f64>,
    dt_out: Option<f64>,
    t_end: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRobot {
    m1: Option<f64>,
    m2: Option<f64>,
    l1: Option<f64>,
    l2: Option<f64>,
    i1: Option<f64>,
    i2: Option<f64>,
    mf: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    q: Option<[f64; 2]>,
    qf: Option<f64>,
    qd: Option<[f64; 2]>,
    qdf: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHuman {
    k1h: Option<[f64; 2]>,
    k2h: Option<[f64; 2]>,
    noise_std: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhases {
    t1: Option<f64>,
    t2: Option<f64>,
    t3: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAdmittance {
    md: Option<[f64; 2]>,
    dd: Option<[f64; 2]>,
    kd: Option<[f64; 2]>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    k1: Option<[f64; 2]>,
    h_fd: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPvfc {
    ea: Option<f64>,
    kd_a: Option<f64>,
    r1: Option<u32>,
    r2: Option<u32>,
    kappa: Option<f64>,
    k2: Option<[f64; 3]>,
    delta1: Option<f64>,
    delta2: Option<f64>,
    eta_min: Option<f64>,
    eta_max: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPid {
    kp: Option<[f64; 2]>,
    ki: Option<[f64; 2]>,
    kd: Option<[f64; 2]>,
}

fn diag(d: [f64; 2]) -> Matrix2<f64> {
    Matrix2::from_diagonal(&Vector2::from(d))
}

fn undiag(m: &Matrix2<f64>) -> [f64; 2] {
    [m[(0, 0)], m[(1, 1)]]
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl RawConfig {
    fn apply(self) -> Result<ScenarioConfig> {
        let mut c = ScenarioConfig::default();
        if let Some(s) = self.strategy {
            c.strategy = s.parse::<Strategy>()?;
        }
        set(&mut c.seed, self.seed);

        set(&mut c.dt_sim, self.sim.dt_sim);
        set(&mut c.dt_out, self.sim.dt_out);
        set(&mut c.t_end, self.sim.t_end);

        let r = self.robot;
        set(&mut c.robot.m1, r.m1);
        set(&mut c.robot.m2, r.m2);
        set(&mut c.robot.l1, r.l1);
        set(&mut c.robot.l2, r.l2);
        set(&mut c.robot.i1, r.i1);
        set(&mut c.robot.i2, r.i2);
        set(&mut c.robot.mf, r.mf);

        let i = self.initial;
        set(&mut c.initial.q, i.q.map(Vector2::from));
        set(&mut c.initial.qf, i.qf);
        set(&mut c.initial.qd, i.qd.map(Vector2::from));
        set(&mut c.initial.qdf, i.qdf);

        let h = self.human;
        set(&mut c.human.k1h, h.k1h.map(Vector2::from));
        set(&mut c.human.k2h, h.k2h.map(Vector2::from));
        set(&mut c.human.noise_std, h.noise_std);

        set(&mut c.phases.t1, self.phases.t1);
        set(&mut c.phases.t2, self.phases.t2);
        set(&mut c.phases.t3, self.phases.t3);

        let a = self.admittance;
        set(&mut c.admittance.md, a.md.map(diag));
        set(&mut c.admittance.dd, a.dd.map(diag));
        set(&mut c.admittance.kd, a.kd.map(diag));

        set(&mut c.field.k1, self.field.k1.map(diag));
        set(&mut c.field.h_fd, self.field.h_fd);

        let p = self.pvfc;
        set(&mut c.pvfc.ea, p.ea);
        c.field.ea = c.pvfc.ea;
        set(&mut c.pvfc.kd_a, p.kd_a);
        set(&mut c.pvfc.r1, p.r1);
        set(&mut c.pvfc.r2, p.r2);
        set(&mut c.pvfc.kappa, p.kappa);
        set(&mut c.pvfc.k2, p.k2.map(|k| DVector::from_column_slice(&k)));
        set(&mut c.pvfc.delta1, p.delta1);
        set(&mut c.pvfc.delta2, p.delta2);
        set(&mut c.pvfc.eta_min, p.eta_min);
        set(&mut c.pvfc.eta_max, p.eta_max);

        set(&mut c.pid.kp, self.pid.kp.map(diag));
        set(&mut c.pid.ki, self.pid.ki.map(diag));
        set(&mut c.pid.kd, self.pid.kd.map(diag));

        c.validate()?;
        Ok(c)
    }

    fn from_config(c: &ScenarioConfig) -> Self {
        let k2 = &c.pvfc.k2;
        Self {
            strategy: Some(c.strategy.name().to_string()),
            seed: Some(c.seed),
            sim: RawSim {
                dt_sim: Some(c.dt_sim),
                dt_out: Some(c.dt_out),
                t_end: Some(c.t_end),
            },
            robot: RawRobot {
                m1: Some(c.robot.m1),
                m2: Some(c.robot.m2),
                l1: Some(c.robot.l1),
                l2: Some(c.robot.l2),
                i1: Some(c.robot.i1),
                i2: Some(c.robot.i2),
                mf: Some(c.robot.mf),
            },
            initial: RawInitial {
                q: Some(c.initial.q.into()),
                qf: Some(c.initial.qf),
                qd: Some(c.initial.qd.into()),
                qdf: Some(c.initial.qdf),
            },
            human: RawHuman {
                k1h: Some(c.human.k1h.into()),
                k2h: Some(c.human.k2h.into()),
                noise_std: Some(c.human.noise_std),
            },
            phases: RawPhases {
                t1: Some(c.phases.t1),
                t2: Some(c.phases.t2),
                t3: Some(c.phases.t3),
            },
            admittance: RawAdmittance {
                md: Some(undiag(&c.admittance.md)),
                dd: Some(undiag(&c.admittance.dd)),
                kd: Some(undiag(&c.admittance.kd)),
            },
            field: RawField {
                k1: Some(undiag(&c.field.k1)),
                h_fd: Some(c.field.h_fd),
            },
            pvfc: RawPvfc {
                ea: Some(c.pvfc.ea),
                kd_a: Some(c.pvfc.kd_a),
                r1: Some(c.pvfc.r1),
                r2: Some(c.pvfc.r2),
                kappa: Some(c.pvfc.kappa),
                k2: (k2.len() == 3).then(|| [k2[0], k2[1], k2[2]]),
                delta1: Some(c.pvfc.delta1),
                delta2: Some(c.pvfc.delta2),
                eta_min: Some(c.pvfc.eta_min),
                eta_max: Some(c.pvfc.eta_max),
            },
            pid: RawPid {
                kp: Some(undiag(&c.pid.kp)),
                ki: Some(undiag(&c.pid.ki)),
                kd: Some(undiag(&c.pid.kd)),
            },
        }
    }
}

/// Parses TOML text; `origin` only labels errors.
pub fn parse_config_str(text: &str, origin: &Path) -> Result<ScenarioConfig> {
    let wrap = |reason: String| Error::Config {
        path: origin.to_path_buf(),
        reason,
    };
    let raw: RawConfig = toml::from_str(text).map_err(|e| wrap(e.message().to_string()))?;
    raw.apply().map_err(|e| wrap(e.to_string()))
}

pub fn parse_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text, path)
}

/// Fully resolved configuration as TOML; parsing it back gives the same
/// configuration.
pub fn render_config(cfg: &ScenarioConfig) -> String {
    toml::to_string(&RawConfig::from_config(cfg)).expect("config tables always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ScenarioConfig> {
        parse_config_str(text, Path::new("test.toml"))
    }

    #[test]
    fn empty_is_defaults() {
        let c = parse("").unwrap();
        assert_eq!(c, ScenarioConfig::default());
        assert_eq!(c.strategy, Strategy::Proposed);
        assert_eq!(c.t_end, 20.0);
    }

    #[test]
    fn overrides() {
        let c = parse("strategy = \"opvfc\"\nseed = 7\n[field]\nk1 = [10.0, 10.0]\n[pvfc]\nea = 2000.0\n").unwrap();
        assert_eq!(c.strategy, Strategy::Opvfc);
        assert_eq!(c.seed, 7);
        assert_eq!(c.field.k1, Matrix2::identity() * 10.0);
        assert_eq!((c.field.ea, c.pvfc.ea), (2000.0, 2000.0));
        assert_eq!(c.label(), "opvfc_k1_10");
    }

    #[test]
    fn even_exponent_rejected() {
        let err = parse("[pvfc]\nr1 = 2\n").unwrap_err().to_string();
        assert!(err.contains("pvfc.r1") && err.contains("odd"), "{err}");
    }

    #[test]
    fn coarse_integrator_rejected() {
        let err = parse("[sim]\ndt_sim = 0.02\n").unwrap_err().to_string();
        assert!(err.contains("dt_sim"), "{err}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = parse("[pvfc]\ngain = 1.0\n").unwrap_err().to_string();
        assert!(err.contains("gain"), "{err}");
        assert!(parse("colour = 1\n").is_err());
        assert!(parse("strategy = \"lqr\"\n").is_err());
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = parse_config(Path::new("/nonexistent/cfg.toml")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn render_round_trips() {
        let mut c = ScenarioConfig::default().with_strategy(Strategy::MdkPid).with_k1(10.0);
        c.seed = 99;
        c.human.noise_std = 0.0;
        let text = render_config(&c);
        assert_eq!(parse(&text).unwrap(), c);
    }
}
