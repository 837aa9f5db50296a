//! Scripted human partner: the true intention, what the robot believes the
//! intention to be in each phase, and the spring-damper hand force.

use nalgebra::{Matrix2, Vector2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Start of the carrying ramp, equal to the initial end-effector position.
pub const RAMP_START: Vector2<f64> = Vector2::new(0.5657, 0.0);
/// Constant carrying velocity while the human moves.
pub const RAMP_VELOCITY: Vector2<f64> = Vector2::new(0.01, 0.01);
/// Amplitude of the sinusoidal direction error in the first phase.
pub const DIRECTION_ERROR: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HumanParams {
    /// Diagonal of the hand stiffness (N/m).
    pub k1h: Vector2<f64>,
    /// Diagonal of the hand damping (N·s/m).
    pub k2h: Vector2<f64>,
    /// Standard deviation of the estimate disturbance (m).
    pub noise_std: f64,
}

impl Default for HumanParams {
    fn default() -> Self {
        Self {
            k1h: Vector2::new(500.0, 500.0),
            k2h: Vector2::new(100.0, 100.0),
            noise_std: 0.005,
        }
    }
}

impl HumanParams {
    pub fn validate(&self) -> Result<()> {
        if self.k1h.iter().chain(self.k2h.iter()).any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("human.k1h/k2h", "gains must be finite and >= 0"));
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return Err(Error::invalid("human.noise_std", "must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Boundaries between the four interaction phases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSchedule {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
}

impl Default for PhaseSchedule {
    fn default() -> Self {
        Self {
            t1: 5.0,
            t2: 10.0,
            t3: 15.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Estimate carries a direction error.
    DirectionConflict,
    Harmonious,
    /// Human has stopped, the estimate keeps going.
    ParkingConflict,
    Parked,
}

impl PhaseSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.t1 && self.t1 < self.t2 && self.t2 < self.t3) {
            return Err(Error::invalid("phases", "require 0 < t1 < t2 < t3"));
        }
        Ok(())
    }

    pub fn phase(&self, t: f64) -> Phase {
        if t < self.t1 {
            Phase::DirectionConflict
        } else if t < self.t2 {
            Phase::Harmonious
        } else if t < self.t3 {
            Phase::ParkingConflict
        } else {
            Phase::Parked
        }
    }

    /// Where the human parks the object.
    pub fn parking_position(&self) -> Vector2<f64> {
        RAMP_START + RAMP_VELOCITY * self.t2
    }
}

/// Position, velocity, and acceleration of an intention trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntentSample {
    pub pos: Vector2<f64>,
    pub vel: Vector2<f64>,
    pub acc: Vector2<f64>,
}

impl IntentSample {
    fn ramp(t: f64) -> Self {
        Self {
            pos: RAMP_START + RAMP_VELOCITY * t,
            vel: RAMP_VELOCITY,
            acc: Vector2::zeros(),
        }
    }

    fn at_rest(pos: Vector2<f64>) -> Self {
        Self {
            pos,
            vel: Vector2::zeros(),
            acc: Vector2::zeros(),
        }
    }
}

/// What the human actually wants: ramp until `t2`, then stop.
pub fn true_intention(t: f64, sched: &PhaseSchedule) -> IntentSample {
    true_intention_in(sched.phase(t), t, sched)
}

/// [`true_intention`] with the phase supplied by the caller.
pub fn true_intention_in(phase: Phase, t: f64, sched: &PhaseSchedule) -> IntentSample {
    match phase {
        Phase::DirectionConflict | Phase::Harmonious => IntentSample::ramp(t),
        Phase::ParkingConflict | Phase::Parked => IntentSample::at_rest(sched.parking_position()),
    }
}

/// What the robot believes the human wants. `d` is the held disturbance
/// sample, added to both position coordinates during the first phase only.
/// Velocity and acceleration are derivatives of the noiseless part; at
/// phase boundaries the right limit applies.
pub fn estimated_intention(t: f64, sched: &PhaseSchedule, d: f64) -> IntentSample {
    estimated_intention_in(sched.phase(t), t, sched, d)
}

/// [`estimated_intention`] with the phase supplied by the caller, so an
/// integrator step can stay on one side of a boundary.
pub fn estimated_intention_in(phase: Phase, t: f64, sched: &PhaseSchedule, d: f64) -> IntentSample {
    match phase {
        Phase::DirectionConflict => {
            let (s, c) = t.sin_cos();
            let ramp = IntentSample::ramp(t);
            IntentSample {
                pos: ramp.pos + DIRECTION_ERROR * Vector2::new(s, c) + Vector2::new(d, d),
                vel: ramp.vel + DIRECTION_ERROR * Vector2::new(c, -s),
                acc: DIRECTION_ERROR * Vector2::new(-s, -c),
            }
        }
        Phase::Harmonious | Phase::ParkingConflict => IntentSample::ramp(t),
        Phase::Parked => IntentSample::at_rest(sched.parking_position()),
    }
}

/// Hand force `−k1h(x − x_h) − k2h(ẋ − ẋ_h)`.
pub fn human_force(x: &Vector2<f64>, xd: &Vector2<f64>, intent: &IntentSample, hp: &HumanParams) -> Vector2<f64> {
    -Matrix2::from_diagonal(&hp.k1h) * (x - intent.pos) - Matrix2::from_diagonal(&hp.k2h) * (xd - intent.vel)
}

/// Zero-mean Gaussian disturbance held constant over each `hold` interval.
#[derive(Debug, Clone)]
pub struct NoiseTrack {
    hold: f64,
    samples: Vec<f64>,
}

impl NoiseTrack {
    pub fn new(std: f64, seed: u64, hold: f64, horizon: f64) -> Result<Self> {
        if !(hold > 0.0 && hold.is_finite()) {
            return Err(Error::invalid("noise hold", "must be > 0"));
        }
        let count = (horizon.max(0.0) / hold).ceil() as usize + 2;
        let samples = if std == 0.0 {
            vec![0.0; count]
        } else {
            let normal = Normal::new(0.0, std).map_err(|e| Error::invalid("human.noise_std", e.to_string()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count).map(|_| normal.sample(&mut rng)).collect()
        };
        Ok(Self { hold, samples })
    }

    pub fn silent() -> Self {
        Self {
            hold: 1.0,
            samples: vec![0.0],
        }
    }

    pub fn sample_at(&self, t: f64) -> f64 {
        // Integration stages land on interval edges up to rounding.
        let idx = ((t / self.hold) + 1e-9).floor().max(0.0) as usize;
        self.samples[idx.min(self.samples.len() - 1)]
    }
}
