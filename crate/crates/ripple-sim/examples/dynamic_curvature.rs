//! Curvature from the linear response of a driven trajectory, and how the
//! estimate converges as the quench slows down.
//!
//! On the sphere case (omega1 = delta1, delta2 = 0) the exact curvature is
//! sin(theta)/2, so the equator value pins the extraction sign and scale.

use std::f64::consts::{FRAC_PI_2, PI};

use ripple_sim::dynamics::{evolve_ramp, extract_curvature_dynamic, RampProtocol, Smoothing};
use ripple_sim::spin::DriveParams;

fn main() {
    let base = DriveParams::sphere(0.0);

    println!("Dynamic curvature at the equator vs ramp duration (sphere case)");
    println!("{}", "-".repeat(56));
    println!("{:>10}  {:>12}  {:>13}  {:>10}", "T [1/d1]", "theta_t", "F_dyn(pi/2)", "error");
    for total_time in [250.0, 500.0, 1000.0, 2000.0, 4000.0] {
        let steps = (total_time / 0.1) as usize;
        let protocol =
            RampProtocol::new(0.0, PI, total_time, steps, 0.0, Smoothing::Linear).unwrap();
        let traj = evolve_ramp(&protocol, &base).expect("ramp");
        let samples = extract_curvature_dynamic(&traj, &base, None).expect("extraction");
        let equator = samples
            .iter()
            .min_by(|a, b| (a.theta - FRAC_PI_2).abs().total_cmp(&(b.theta - FRAC_PI_2).abs()))
            .unwrap()
            .value;
        println!(
            "{:>10.0}  {:>12.3e}  {:>13.9}  {:>10.2e}",
            total_time,
            protocol.quench_velocity(),
            equator,
            (equator - 0.5).abs()
        );
    }
    println!("{}", "-".repeat(56));
    println!("Exact value 0.5; the deviation shrinks with the quench velocity");
    println!("until the sampling floor of the fixed step (dt = 0.1) is reached.");
}
