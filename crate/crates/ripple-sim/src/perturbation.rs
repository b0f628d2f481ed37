//! First-order adiabatic perturbation theory, used as an independent
//! oracle against the exact stepper: transition amplitudes
//! `a_1 = -i theta_t <1|dH/dtheta|0> / (E1 - E0)^2`, the accumulated phase
//! `theta_10 = int dtheta [(E1 - E0)/theta_t - (A_1 - A_0)]`, the
//! velocity-linear force expansion, and the residual-scaling law in the
//! quench velocity.

use num_complex::Complex64 as C64;

use crate::berry::{self, sandwich};
use crate::dynamics::{self, RampProtocol, Smoothing, Trajectory};
use crate::error::{Result, SimError};
use crate::quad;
use crate::spin::{self, DriveParams};

/// Gap floor (relative to delta1) below which the expansion is invalid.
pub const GAP_CLOSURE_REL: f64 = 1e-6;

/// Outcome of the velocity-scaling experiment. The point values are
/// evaluated at the smallest velocity in the list.
#[derive(Debug, Clone, Copy)]
pub struct PerturbationResult {
    pub amplitude_a1: C64,
    pub phase_theta10: f64,
    pub predicted_force: f64,
    /// Fitted exponent of the perturbative-vs-exact residual in theta_t.
    pub order_estimate: f64,
    /// True when the fitted exponent sits in the quadratic window
    /// [1.5, 2.5] where the first-order theory applies.
    pub reliable: bool,
}

fn require_linear(protocol: &RampProtocol) -> Result<()> {
    protocol.validate()?;
    if protocol.smoothing != Smoothing::Linear {
        return Err(SimError::InvalidParams(
            "the perturbative expansion is set up for linear ramps".into(),
        ));
    }
    Ok(())
}

fn min_gap_along(protocol: &RampProtocol, base: &DriveParams) -> f64 {
    // the gap profile is smooth in theta; a bounded scan resolves it
    let segments = protocol.steps.min(4096);
    let mut min = f64::INFINITY;
    for k in 0..=segments {
        let theta = protocol.theta_at_fraction(k as f64 / segments as f64);
        min = min.min(spin::gap(&base.with_theta(theta)));
    }
    min
}

fn check_gap(protocol: &RampProtocol, base: &DriveParams) -> Result<()> {
    let min = min_gap_along(protocol, base);
    if min < GAP_CLOSURE_REL * base.delta1 {
        return Err(SimError::GapClosure(format!(
            "minimum gap {min:.3e} along the ramp below {GAP_CLOSURE_REL:.0e} * delta1"
        )));
    }
    Ok(())
}

/// <1|dH/dtheta|0> in the fixed gauge.
fn dtheta_matrix_element(p: &DriveParams) -> Result<C64> {
    let es = spin::eigensystem(&spin::build_hamiltonian(p)?)?;
    Ok(sandwich(es.v1, &berry::dtheta_hamiltonian(p), es.v0))
}

/// Endpoint form of the first-order excited amplitude,
/// `a_1 = -i theta_t <1|dH/dtheta|0> / (E1 - E0)^2` at the final theta.
pub fn first_order_amplitude(base: &DriveParams, protocol: &RampProtocol) -> Result<C64> {
    require_linear(protocol)?;
    check_gap(protocol, base)?;
    let theta_t = protocol.quench_velocity();
    if theta_t == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    if !theta_t.is_finite() {
        return Err(SimError::InvalidParams(
            "sudden quench: the expansion needs a finite quench velocity".into(),
        ));
    }
    let p_end = DriveParams { theta: protocol.theta_end, phi: protocol.phi, ..*base };
    let gap = spin::gap(&p_end);
    Ok(-C64::i() * theta_t * dtheta_matrix_element(&p_end)? / (gap * gap))
}

/// Full phase difference between the two instantaneous levels accumulated
/// over the ramp: quadrature of gap/theta_t minus the connection
/// difference, which vanishes identically in the real gauge of phi = 0
/// ramps (asserted).
pub fn accumulated_phase(base: &DriveParams, protocol: &RampProtocol) -> Result<f64> {
    require_linear(protocol)?;
    check_gap(protocol, base)?;
    let span = protocol.theta_end - protocol.theta_start;
    if span == 0.0 {
        return Ok(0.0);
    }
    let theta_t = protocol.quench_velocity();
    let dynamical = if theta_t.is_finite() {
        let mut nodes = protocol.steps.min(20_000) + 1;
        if nodes.is_multiple_of(2) {
            nodes += 1;
        }
        quad::simpson(
            |theta| spin::gap(&base.with_theta(theta)),
            protocol.theta_start,
            protocol.theta_end,
            nodes,
        ) / theta_t
    } else {
        0.0
    };
    // geometric part: discrete connection difference along the path
    let mut conn_diff = 0.0;
    let segments = protocol.steps.min(4096);
    let mut prev = spin::eigensystem(&spin::build_hamiltonian(
        &base.with_theta(protocol.theta_start).with_phi(protocol.phi),
    )?)?;
    for k in 1..=segments {
        let theta = protocol.theta_start + span * k as f64 / segments as f64;
        let es = spin::eigensystem(&spin::build_hamiltonian(
            &base.with_theta(theta).with_phi(protocol.phi),
        )?)?;
        let o0 = prev.v0[0].conj() * es.v0[0] + prev.v0[1].conj() * es.v0[1];
        let o1 = prev.v1[0].conj() * es.v1[0] + prev.v1[1].conj() * es.v1[1];
        conn_diff += -o1.arg() - (-o0.arg());
        prev = es;
    }
    assert!(
        conn_diff.abs() < 1e-9,
        "connection difference {conn_diff:.3e} should vanish in the real gauge"
    );
    Ok(dynamical - conn_diff)
}

/// Velocity-linear prediction of the generalized force `-<dH/dphi>`:
/// the Born-Oppenheimer term `-<0|dH/dphi|0>` (zero in the real gauge at
/// phi = 0) plus the curvature reaction, signed to match the
/// trajectory-measured force.
pub fn predicted_force(p: &DriveParams, theta_t: f64) -> Result<f64> {
    p.validate()?;
    let g = spin::gap(p);
    if g < GAP_CLOSURE_REL * p.delta1 {
        return Err(SimError::GapClosure(format!(
            "gap {g:.3e} below {GAP_CLOSURE_REL:.0e} * delta1"
        )));
    }
    let es = spin::eigensystem(&spin::build_hamiltonian(p)?)?;
    let bo = -sandwich(es.v0, &berry::dphi_hamiltonian(p), es.v0).re;
    Ok(bo - theta_t * berry::curvature_closed_form(p).value)
}

/// Exact first-order amplitude as measured from a trajectory: the
/// eigenframe coherence `<1|psi><psi|0>` averaged over the final local
/// Larmor period, which filters the fast phase beating.
pub fn measured_first_order_amplitude(traj: &Trajectory, base: &DriveParams) -> Result<C64> {
    let n = traj.samples.len();
    let end_gap = spin::gap(&base.with_theta(traj.samples[n - 1].theta));
    let w = window_len(end_gap, traj.dt, n);
    let mut acc = C64::new(0.0, 0.0);
    for s in &traj.samples[n - w..] {
        let p = base.with_theta(s.theta).with_phi(traj.protocol.phi);
        let (c0, c1) = dynamics::eigenframe_amplitudes(&s.state, &p)?;
        acc += c1 * c0.conj();
    }
    Ok(acc / w as f64)
}

fn window_len(gap: f64, dt: f64, n: usize) -> usize {
    if gap <= 0.0 || dt <= 0.0 {
        return n;
    }
    ((std::f64::consts::TAU / (gap * dt)).round() as usize).clamp(1, n)
}

/// Pointwise residual between the exact evolved amplitude and the
/// two-boundary first-order form
/// `a_1(t) = -i theta_t [K(theta) e^{i theta_10(t)} - K(theta_i)]`,
/// `K = <1|dH/dtheta|0> / gap^2`, averaged over the final Larmor period.
fn first_order_residual(traj: &Trajectory, base: &DriveParams) -> Result<f64> {
    let n = traj.samples.len();
    let theta_t = traj.theta_velocity();
    // cumulative dynamical phase by trapezoid in time
    let gaps: Vec<f64> = traj
        .samples
        .iter()
        .map(|s| spin::gap(&base.with_theta(s.theta)))
        .collect();
    let mut theta10 = vec![0.0; n];
    for k in 1..n {
        theta10[k] = theta10[k - 1] + 0.5 * traj.dt * (gaps[k] + gaps[k - 1]);
    }
    let p_start = base.with_theta(traj.samples[0].theta).with_phi(traj.protocol.phi);
    let k_start = dtheta_matrix_element(&p_start)? / (gaps[0] * gaps[0]);
    let w = window_len(*gaps.last().unwrap(), traj.dt, n);
    let mut acc = 0.0;
    for (k, s) in traj.samples.iter().enumerate().skip(n - w) {
        let p = base.with_theta(s.theta).with_phi(traj.protocol.phi);
        let (c0, c1) = dynamics::eigenframe_amplitudes(&s.state, &p)?;
        let rot = C64::from_polar(1.0, theta10[k]);
        let exact = c1 * c0.conj() * rot;
        let k_here = dtheta_matrix_element(&p)? / (gaps[k] * gaps[k]);
        let predicted = -C64::i() * theta_t * (k_here * rot - k_start);
        acc += (exact - predicted).norm();
    }
    Ok(acc / w as f64)
}

/// Run the ramp at each velocity, compare exact and first-order amplitudes,
/// and fit the residual exponent in theta_t. Velocities must be given as a
/// decreasing sequence of at least three distinct values (halving is the
/// intended protocol); the time step of `template` is reused so every run
/// resolves the Larmor precession equally well.
pub fn scaling_report(
    base: &DriveParams,
    template: &RampProtocol,
    velocities: &[f64],
) -> Result<PerturbationResult> {
    require_linear(template)?;
    if velocities.len() < 3 {
        return Err(SimError::InsufficientPoints(format!(
            "scaling fit needs >= 3 velocities, got {}",
            velocities.len()
        )));
    }
    for pair in velocities.windows(2) {
        if pair[1] >= pair[0] {
            return Err(SimError::InsufficientPoints(
                "velocities must strictly decrease (repeated or increasing values)".into(),
            ));
        }
    }
    let span = template.theta_end - template.theta_start;
    if span <= 0.0 {
        return Err(SimError::InvalidParams(
            "scaling runs need theta_end > theta_start".into(),
        ));
    }
    let dt = template.dt();
    let mut residuals = Vec::with_capacity(velocities.len());
    let mut last_protocol = *template;
    for &v in velocities {
        if !(v > 0.0) || !v.is_finite() {
            return Err(SimError::InvalidParams(format!(
                "velocities must be positive and finite, got {v}"
            )));
        }
        let total_time = span / v;
        let steps = ((total_time / dt).round() as usize).max(100);
        let protocol = RampProtocol::new(
            template.theta_start,
            template.theta_end,
            total_time,
            steps,
            template.phi,
            Smoothing::Linear,
        )?;
        check_gap(&protocol, base)?;
        let traj = dynamics::evolve_ramp(&protocol, base)?;
        residuals.push(first_order_residual(&traj, base)?);
        last_protocol = protocol;
    }
    // least-squares slope of log residual vs log velocity
    let xs: Vec<f64> = velocities.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = residuals.iter().map(|r| r.max(1e-300).ln()).collect();
    let xm = xs.iter().sum::<f64>() / xs.len() as f64;
    let ym = ys.iter().sum::<f64>() / ys.len() as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        num += (x - xm) * (y - ym);
        den += (x - xm) * (x - xm);
    }
    let order_estimate = num / den;
    Ok(PerturbationResult {
        amplitude_a1: first_order_amplitude(base, &last_protocol)?,
        phase_theta10: accumulated_phase(base, &last_protocol)?,
        predicted_force: predicted_force(
            &base.with_theta(last_protocol.theta_end).with_phi(last_protocol.phi),
            *velocities.last().unwrap(),
        )?,
        order_estimate,
        reliable: (1.5..=2.5).contains(&order_estimate),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn half_ramp(theta_t: f64, dt: f64) -> RampProtocol {
        let total_time = FRAC_PI_2 / theta_t;
        let steps = ((total_time / dt).round() as usize).max(100);
        RampProtocol::new(0.0, FRAC_PI_2, total_time, steps, 0.0, Smoothing::Linear).unwrap()
    }

    #[test]
    fn amplitude_sphere_value() {
        // |<1|dH/dtheta|0>| = |d|/2 on the sphere, so |a1| = theta_t / 2
        let base = DriveParams::sphere(0.0);
        let a1 = first_order_amplitude(&base, &half_ramp(0.01, 0.0125)).unwrap();
        assert_abs_diff_eq!(a1.norm(), 0.005, epsilon = 1e-12);
    }

    #[test]
    fn amplitude_vanishes_in_adiabatic_limit() {
        let base = DriveParams::sphere(0.0);
        let a1 = first_order_amplitude(&base, &half_ramp(1e-9, 0.0125)).unwrap();
        assert!(a1.norm() < 1e-9);
        let frozen =
            RampProtocol::new(1.0, 1.0, 100.0, 1000, 0.0, Smoothing::Linear).unwrap();
        assert_eq!(first_order_amplitude(&base, &frozen).unwrap().norm(), 0.0);
    }

    #[test]
    fn amplitude_rejects_gap_closure() {
        let base = DriveParams { delta1: 1.0, delta2: 1.0, omega1: 0.5, theta: 0.0, phi: 0.0 };
        let protocol = RampProtocol::default();
        assert!(matches!(
            first_order_amplitude(&base, &protocol),
            Err(SimError::GapClosure(_))
        ));
    }

    #[test]
    fn windowed_amplitude_converges_quadratically_to_endpoint_form() {
        // generic (non-sphere) parameters: the residual halves twice per
        // velocity halving
        let base = DriveParams { delta1: 1.0, delta2: 0.5, omega1: 0.7, theta: 0.0, phi: 0.0 };
        let mut residuals = Vec::new();
        for theta_t in [PI / 500.0, PI / 1000.0] {
            let protocol = half_ramp(theta_t, 0.0125);
            let traj = dynamics::evolve_ramp(&protocol, &base).unwrap();
            let measured = measured_first_order_amplitude(&traj, &base).unwrap();
            let predicted = first_order_amplitude(&base, &protocol).unwrap();
            residuals.push((measured.norm() - predicted.norm()).abs());
        }
        let ratio = residuals[0] / residuals[1];
        assert!(
            (3.0..=5.0).contains(&ratio),
            "ratio {ratio:.2} from {residuals:?}"
        );
    }

    #[test]
    fn phase_of_constant_gap_ramp() {
        let base = DriveParams::sphere(0.0);
        let phase = accumulated_phase(&base, &half_ramp(PI / 2000.0, 0.0125)).unwrap();
        assert_abs_diff_eq!(phase, 1000.0, epsilon = 1e-6);
    }

    #[test]
    fn phase_vanishes_for_sudden_quench() {
        let base = DriveParams::sphere(0.0);
        let protocol =
            RampProtocol::new(0.0, FRAC_PI_2, 0.0, 1000, 0.0, Smoothing::Linear).unwrap();
        assert_eq!(accumulated_phase(&base, &protocol).unwrap(), 0.0);
    }

    #[test]
    fn phase_factor_matches_exact_coherence() {
        let base = DriveParams::sphere(0.0);
        let protocol = half_ramp(PI / 2000.0, 0.0125);
        let traj = dynamics::evolve_ramp(&protocol, &base).unwrap();
        let theta10 = accumulated_phase(&base, &protocol).unwrap();
        let fin = traj.final_state();
        let p_end = base.with_theta(FRAC_PI_2);
        let (c0, c1) = dynamics::eigenframe_amplitudes(&fin, &p_end).unwrap();
        let measured = c1 * c0.conj();
        let p_start = base.with_theta(0.0);
        let k_start = dtheta_matrix_element(&p_start).unwrap();
        let k_end = dtheta_matrix_element(&p_end).unwrap();
        let v = protocol.quench_velocity();
        let rot = C64::from_polar(1.0, -theta10);
        let predicted = -C64::i() * v * (k_end - k_start * rot);
        let defect = (measured / predicted).arg().abs();
        assert!(defect < 0.1, "phase defect {defect:.3} rad");
    }

    #[test]
    fn force_prediction_values() {
        let p = DriveParams::sphere(FRAC_PI_2);
        assert_eq!(predicted_force(&p, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(predicted_force(&p, 0.001).unwrap(), -0.0005, epsilon = 1e-12);
    }

    #[test]
    fn force_matches_trajectory_measurement() {
        let base = DriveParams::sphere(0.0);
        let theta_t = PI / 20_000.0;
        let protocol = half_ramp(theta_t, 0.0125);
        let traj = dynamics::evolve_ramp(&protocol, &base).unwrap();
        let measured = dynamics::generalized_force_at_end(&traj, &base).unwrap();
        let predicted =
            predicted_force(&base.with_theta(FRAC_PI_2), theta_t).unwrap();
        assert!(
            (measured - predicted).abs() <= 0.1 * predicted.abs(),
            "measured {measured:.3e}, predicted {predicted:.3e}"
        );
    }

    #[test]
    fn scaling_fit_is_quadratic_on_the_sphere() {
        let base = DriveParams::sphere(0.0);
        let template = half_ramp(PI / 500.0, 0.0125);
        let report = scaling_report(
            &base,
            &template,
            &[PI / 500.0, PI / 1000.0, PI / 2000.0],
        )
        .unwrap();
        assert!(
            (1.5..=2.5).contains(&report.order_estimate),
            "order {:.3}",
            report.order_estimate
        );
        assert!(report.reliable);
        assert!(report.amplitude_a1.norm() <= 1.0);
    }

    #[test]
    fn scaling_rejects_degenerate_velocity_lists() {
        let base = DriveParams::sphere(0.0);
        let template = half_ramp(PI / 500.0, 0.0125);
        assert!(matches!(
            scaling_report(&base, &template, &[0.01, 0.01, 0.01]),
            Err(SimError::InsufficientPoints(_))
        ));
        assert!(matches!(
            scaling_report(&base, &template, &[0.01, 0.005]),
            Err(SimError::InsufficientPoints(_))
        ));
    }

    #[test]
    fn far_from_adiabatic_fit_is_flagged() {
        let base = DriveParams::sphere(0.0);
        let template = half_ramp(2.0 * PI, 0.0125);
        let report = scaling_report(
            &base,
            &template,
            &[2.0 * PI, PI, FRAC_PI_2],
        )
        .unwrap();
        assert!(!report.reliable, "order {:.3}", report.order_estimate);
    }
}
