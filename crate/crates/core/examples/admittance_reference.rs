//! Response of the three admittance models to a constant push while the
//! estimated intention sits still.

use nalgebra::Vector2;

use copvfc::admittance::{AdmittanceKind, AdmittanceParams, AdmittanceState};
use copvfc::human::IntentSample;

fn main() {
    let p = AdmittanceParams::default();
    let intent = IntentSample {
        pos: Vector2::new(0.5, 0.0),
        vel: Vector2::zeros(),
        acc: Vector2::zeros(),
    };
    let push = Vector2::new(1.0, 0.0);
    let dt = 1e-3;

    for kind in [AdmittanceKind::MassDamper, AdmittanceKind::MassDamperSpring, AdmittanceKind::Trigger] {
        let mut s = AdmittanceState::from_intent(&intent);
        for _ in 0..2000 {
            let a = kind.accel(&s, &intent, &push, &p);
            s.xda += a * dt;
            s.xa += s.xda * dt;
        }
        println!(
            "{kind:?}: after 2 s x_a offset {:.4} m, velocity {:.4} m/s",
            s.xa[0] - intent.pos[0],
            s.xda[0]
        );
    }
}
