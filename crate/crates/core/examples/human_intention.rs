//! True and estimated human intention across the four phases, and the
//! force the human applies when the object lags behind.

use nalgebra::Vector2;

use copvfc::human::{estimated_intention, human_force, true_intention, HumanParams, NoiseTrack, PhaseSchedule};

fn main() {
    let sched = PhaseSchedule::default();
    let hp = HumanParams::default();
    let noise = NoiseTrack::new(hp.noise_std, 42, 1e-3, 20.0).expect("valid noise");

    println!("{:>5} {:>18} {:>20} {:>20}", "t", "phase", "true pos", "estimated pos");
    for t in [0.0, 2.5, 5.0, 7.5, 10.0, 12.5, 15.0, 17.5, 20.0] {
        let truth = true_intention(t, &sched);
        let est = estimated_intention(t, &sched, noise.sample_at(t));
        println!(
            "{t:>5.1} {:>18} ({:>7.4}, {:>7.4}) ({:>7.4}, {:>7.4})",
            format!("{:?}", sched.phase(t)),
            truth.pos[0],
            truth.pos[1],
            est.pos[0],
            est.pos[1]
        );
    }

    let truth = true_intention(3.0, &sched);
    let lagging = truth.pos - Vector2::new(0.01, 0.0);
    let f = human_force(&lagging, &truth.vel, &truth, &hp);
    println!("1 cm behind the true intention: f = ({:.3}, {:.3}) N", f[0], f[1]);
    println!("parking position: {:?}", sched.parking_position().as_slice());
}
