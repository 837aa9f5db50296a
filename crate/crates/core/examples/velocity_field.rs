//! The augmented velocity field: the arm part tracks the reference and the
//! flywheel takes up the rest of the energy budget.

use nalgebra::Vector2;

use copvfc::dynamics::{forward_kinematics, RobotParams};
use copvfc::field::{augmented_field, FieldParams, ReferenceState};

fn main() {
    let p = RobotParams::default();
    let fp = FieldParams::default();
    let q = Vector2::new(-0.785, 1.57);
    println!("end effector at {:?}", forward_kinematics(&q, &p).as_slice());

    for offset in [0.0, 0.05, 0.2, 0.5, 1.0] {
        let r = ReferenceState {
            q_ref: q + Vector2::new(offset, -offset),
            qd_ref: Vector2::new(0.3, -0.2),
        };
        match augmented_field(&q, &r, &fp, &p) {
            Ok(s) => println!(
                "offset {offset:.2} rad: V = ({:>8.3}, {:>8.3}), Vf = {:>7.3}, arm energy {:>8.2} of {} J",
                s.v[0], s.v[1], s.vf, s.manip_energy, fp.ea
            ),
            Err(e) => println!("offset {offset:.2} rad: {e}"),
        }
    }
}
