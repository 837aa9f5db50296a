//! Forward kinematics, Jacobian, and inertia of the two-link arm at the
//! initial pose.

use nalgebra::Vector2;

use copvfc::dynamics::{forward_kinematics, jacobian, pseudoinverse, DynMatrices, RobotParams};
use copvfc::energy::max_inertia_eigenvalue;

fn main() {
    let p = RobotParams::default();
    let q = Vector2::new(-0.785, 1.57);
    let qd = Vector2::new(0.01, 0.01);

    let x = forward_kinematics(&q, &p);
    println!("end effector: ({:.4}, {:.4}) m", x[0], x[1]);
    let j = jacobian(&q, &p);
    println!("J = {j:.4}");
    let pinv = pseudoinverse(&j);
    println!("J+ (damped: {}) = {:.4}", pinv.singular, pinv.matrix);

    let dm = DynMatrices::evaluate(&q, &qd, &p);
    println!("M = {:.4}", dm.m);
    println!("augmented M = {:.4}", dm.ma);
    println!("largest augmented inertia eigenvalue over q2: {:.4}", max_inertia_eigenvalue(&p));
}
