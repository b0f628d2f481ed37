//! Time evolution under theta-ramp protocols: an exact two-level unitary
//! stepper with the Hamiltonian frozen at each step midpoint, a classic
//! fourth-order reference integrator used only for validation, dynamical
//! curvature extraction from the linear response of <sigma_y>, and the
//! fidelity-ripple experiment.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI, TAU};

use crate::berry::{CurvatureMethod, CurvatureSample};
use crate::error::{Result, SimError};
use crate::spin::{self, DriveParams, Hamiltonian2};

/// Normalized pure state (a, b) in the bare qubit basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    pub a: C64,
    pub b: C64,
}

impl QubitState {
    pub fn new(a: C64, b: C64) -> Self {
        Self { a, b }
    }

    pub fn from_vector(v: [C64; 2]) -> Self {
        Self { a: v[0], b: v[1] }
    }

    pub fn norm(&self) -> f64 {
        (self.a.norm_sqr() + self.b.norm_sqr()).sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self { a: self.a / n, b: self.b / n }
    }

    pub fn overlap(&self, other: &Self) -> C64 {
        self.a.conj() * other.a + self.b.conj() * other.b
    }

    /// |<self|other>|^2.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.overlap(other).norm_sqr()
    }

    pub fn sigma_y_expectation(&self) -> f64 {
        2.0 * (self.a.conj() * self.b).im
    }
}

/// Shape of the ramp velocity profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothing {
    Linear,
    /// Velocity eased in and out with sin^2 edges over the given fraction
    /// of the total time on each side (fraction in (0, 0.5]).
    SinSquaredEdges(f64),
}

/// Ramp of theta over a fixed interval at fixed phi.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampProtocol {
    pub theta_start: f64,
    pub theta_end: f64,
    /// Duration in units of 1/delta1.
    pub total_time: f64,
    pub steps: usize,
    pub phi: f64,
    pub smoothing: Smoothing,
}

impl Default for RampProtocol {
    /// Default protocol: linear theta ramp over the full interval [0, pi],
    /// deep in the adiabatic regime at desk-scale runtime.
    fn default() -> Self {
        Self {
            theta_start: 0.0,
            theta_end: PI,
            total_time: 2000.0,
            steps: 20_000,
            phi: 0.0,
            smoothing: Smoothing::Linear,
        }
    }
}

impl RampProtocol {
    pub fn new(
        theta_start: f64,
        theta_end: f64,
        total_time: f64,
        steps: usize,
        phi: f64,
        smoothing: Smoothing,
    ) -> Result<Self> {
        let p = Self { theta_start, theta_end, total_time, steps, phi, smoothing };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 100 {
            return Err(SimError::InvalidParams(format!(
                "ramp needs >= 100 steps, got {}",
                self.steps
            )));
        }
        if !(self.total_time >= 0.0) || !self.total_time.is_finite() {
            return Err(SimError::InvalidParams(format!(
                "total_time must be finite and >= 0, got {}",
                self.total_time
            )));
        }
        for theta in [self.theta_start, self.theta_end] {
            if !(0.0..=PI).contains(&theta) {
                return Err(SimError::InvalidParams(format!(
                    "ramp angles must lie in [0, pi], got {theta}"
                )));
            }
        }
        if !(0.0..TAU).contains(&self.phi) {
            return Err(SimError::InvalidParams(format!(
                "phi must lie in [0, 2*pi), got {}",
                self.phi
            )));
        }
        if let Smoothing::SinSquaredEdges(f) = self.smoothing {
            if !(f > 0.0 && f <= 0.5) {
                return Err(SimError::InvalidParams(format!(
                    "edge fraction must lie in (0, 0.5], got {f}"
                )));
            }
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.total_time / self.steps as f64
    }

    /// Quench velocity theta_t; constant for `Linear`, the mean velocity
    /// otherwise. Zero-duration ramps of nonzero span report infinity.
    pub fn quench_velocity(&self) -> f64 {
        let span = self.theta_end - self.theta_start;
        if span == 0.0 {
            0.0
        } else if self.total_time == 0.0 {
            f64::INFINITY
        } else {
            span / self.total_time
        }
    }

    /// Ramp progress s(u) in [0, 1] for u = t / total_time.
    fn progress(&self, u: f64) -> f64 {
        match self.smoothing {
            Smoothing::Linear => u,
            Smoothing::SinSquaredEdges(f) => {
                // integral of the eased velocity profile, normalized by 1 - f
                let base = |x: f64| 0.5 * x - (f / (2.0 * PI)) * (PI * x / f).sin();
                let s = if u <= f {
                    base(u)
                } else if u <= 1.0 - f {
                    u - 0.5 * f
                } else {
                    (1.0 - 1.5 * f) + (0.5 * f - base(1.0 - u))
                };
                s / (1.0 - f)
            }
        }
    }

    pub fn theta_at_fraction(&self, u: f64) -> f64 {
        if u <= 0.0 {
            self.theta_start
        } else if u >= 1.0 {
            self.theta_end
        } else {
            self.theta_start + (self.theta_end - self.theta_start) * self.progress(u)
        }
    }
}

/// One recorded point of a trajectory.
#[derive(Debug, Clone, Copy)]
pub struct TrajectorySample {
    pub t: f64,
    pub theta: f64,
    pub state: QubitState,
    pub sigma_y: f64,
}

/// Time-ordered evolution record (uniform step).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub dt: f64,
    pub protocol: RampProtocol,
    /// Set when any step had |d| * dt > pi/4, where the piecewise-constant
    /// Hamiltonian approximation starts to degrade.
    pub step_warning: bool,
}

impl Trajectory {
    pub fn final_state(&self) -> QubitState {
        self.samples.last().expect("trajectory is never empty").state
    }

    pub fn theta_velocity(&self) -> f64 {
        self.protocol.quench_velocity()
    }
}

/// Exact two-level step `exp(-i H dt)` applied to a state:
/// for H = c I + 1/2 d.sigma the propagator is
/// `e^{-i c dt} (cos(|d| dt / 2) I - i sin(|d| dt / 2) dhat.sigma)`,
/// unitary up to rounding. `dt = 0` returns the input unchanged.
pub fn step_propagator(s: &QubitState, h: &Hamiltonian2, dt: f64) -> QubitState {
    if dt == 0.0 {
        return *s;
    }
    let (d, c) = h.bloch_components();
    let dnorm = d.norm();
    let phase = C64::from_polar(1.0, -c * dt);
    if dnorm == 0.0 {
        return QubitState::new(phase * s.a, phase * s.b);
    }
    let half = 0.5 * dnorm * dt;
    let (sn, cs) = half.sin_cos();
    let (nx, ny, nz) = (d.dx / dnorm, d.dy / dnorm, d.dz / dnorm);
    let u00 = C64::new(cs, -nz * sn);
    let u11 = C64::new(cs, nz * sn);
    let u01 = C64::new(-ny * sn, -nx * sn);
    let u10 = C64::new(ny * sn, -nx * sn);
    QubitState::new(
        phase * (u00 * s.a + u01 * s.b),
        phase * (u10 * s.a + u11 * s.b),
    )
}

/// Whether a step is too coarse for the piecewise-constant approximation.
pub fn step_too_large(h: &Hamiltonian2, dt: f64) -> bool {
    let (d, _) = h.bloch_components();
    d.norm() * dt > FRAC_PI_4
}

/// Instantaneous ground state of the drive Hamiltonian.
pub fn ground_state(p: &DriveParams) -> Result<QubitState> {
    let es = spin::eigensystem(&spin::build_hamiltonian(p)?)?;
    Ok(QubitState::from_vector(es.v0))
}

/// Amplitudes of a state in the instantaneous eigenbasis: (<0|psi>, <1|psi>).
pub fn eigenframe_amplitudes(state: &QubitState, p: &DriveParams) -> Result<(C64, C64)> {
    let es = spin::eigensystem(&spin::build_hamiltonian(p)?)?;
    let c0 = es.v0[0].conj() * state.a + es.v0[1].conj() * state.b;
    let c1 = es.v1[0].conj() * state.a + es.v1[1].conj() * state.b;
    Ok((c0, c1))
}

fn start_checks(protocol: &RampProtocol, base: &DriveParams) -> Result<DriveParams> {
    protocol.validate()?;
    let p0 = DriveParams {
        theta: protocol.theta_start,
        phi: protocol.phi,
        ..*base
    };
    p0.validate()?;
    let g = spin::gap(&p0);
    if g < 1e-9 * base.delta1 {
        return Err(SimError::DegenerateStart(format!(
            "gap {g:.3e} at theta_start = {}; ground state ill-defined",
            protocol.theta_start
        )));
    }
    Ok(p0)
}

pub(crate) fn evolve_ramp_from(
    protocol: &RampProtocol,
    base: &DriveParams,
    initial: QubitState,
) -> Result<Trajectory> {
    let p0 = start_checks(protocol, base)?;
    let dt = protocol.dt();
    let steps = protocol.steps;
    let mut state = initial;
    let mut warning = false;
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(TrajectorySample {
        t: 0.0,
        theta: protocol.theta_start,
        state,
        sigma_y: state.sigma_y_expectation(),
    });
    for k in 0..steps {
        let u_mid = (k as f64 + 0.5) / steps as f64;
        let p_mid = p0.with_theta(protocol.theta_at_fraction(u_mid));
        let h = spin::build_hamiltonian(&p_mid)?;
        warning |= step_too_large(&h, dt);
        state = step_propagator(&state, &h, dt);
        samples.push(TrajectorySample {
            t: (k + 1) as f64 * dt,
            theta: protocol.theta_at_fraction((k + 1) as f64 / steps as f64),
            state,
            sigma_y: state.sigma_y_expectation(),
        });
    }
    Ok(Trajectory { samples, dt, protocol: *protocol, step_warning: warning })
}

/// Evolve the instantaneous ground state of H(theta_start) through the ramp,
/// stepping with the Hamiltonian frozen at each step's midpoint theta.
pub fn evolve_ramp(protocol: &RampProtocol, base: &DriveParams) -> Result<Trajectory> {
    let p0 = start_checks(protocol, base)?;
    evolve_ramp_from(protocol, base, ground_state(&p0)?)
}

const REFERENCE_REFINEMENT: usize = 10;

pub(crate) fn reference_evolve_from(
    protocol: &RampProtocol,
    base: &DriveParams,
    initial: QubitState,
) -> Result<Trajectory> {
    let p0 = start_checks(protocol, base)?;
    let steps = protocol.steps;
    let fine_total = steps * REFERENCE_REFINEMENT;
    let h_fine = protocol.dt() / REFERENCE_REFINEMENT as f64;
    let ham = |frac: f64| -> Result<Hamiltonian2> {
        spin::build_hamiltonian(&p0.with_theta(protocol.theta_at_fraction(frac)))
    };
    let rhs = |h: &Hamiltonian2, s: &QubitState| -> (C64, C64) {
        // i dpsi/dt = H psi  =>  dpsi/dt = -i H psi
        let v = h.apply([s.a, s.b]);
        (-C64::i() * v[0], -C64::i() * v[1])
    };
    let mut state = initial;
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(TrajectorySample {
        t: 0.0,
        theta: protocol.theta_start,
        state,
        sigma_y: state.sigma_y_expectation(),
    });
    for k in 0..steps {
        for j in 0..REFERENCE_REFINEMENT {
            let idx = (k * REFERENCE_REFINEMENT + j) as f64;
            let h0 = ham(idx / fine_total as f64)?;
            let hm = ham((idx + 0.5) / fine_total as f64)?;
            let h1 = ham((idx + 1.0) / fine_total as f64)?;
            let (k1a, k1b) = rhs(&h0, &state);
            let s2 = QubitState::new(state.a + 0.5 * h_fine * k1a, state.b + 0.5 * h_fine * k1b);
            let (k2a, k2b) = rhs(&hm, &s2);
            let s3 = QubitState::new(state.a + 0.5 * h_fine * k2a, state.b + 0.5 * h_fine * k2b);
            let (k3a, k3b) = rhs(&hm, &s3);
            let s4 = QubitState::new(state.a + h_fine * k3a, state.b + h_fine * k3b);
            let (k4a, k4b) = rhs(&h1, &s4);
            state = QubitState::new(
                state.a + h_fine / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a),
                state.b + h_fine / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b),
            );
            state = state.normalized();
        }
        samples.push(TrajectorySample {
            t: (k + 1) as f64 * protocol.dt(),
            theta: protocol.theta_at_fraction((k + 1) as f64 / steps as f64),
            state,
            sigma_y: state.sigma_y_expectation(),
        });
    }
    Ok(Trajectory { samples, dt: protocol.dt(), protocol: *protocol, step_warning: false })
}

/// Independent validation oracle: classic fourth-order Runge-Kutta on
/// `i dpsi/dt = H(t) psi` at 10x finer step, renormalized each fine step.
pub fn reference_evolve(protocol: &RampProtocol, base: &DriveParams) -> Result<Trajectory> {
    let p0 = start_checks(protocol, base)?;
    reference_evolve_from(protocol, base, ground_state(&p0)?)
}

/// Mean of the piecewise-linear interpolant of uniformly spaced samples
/// over a continuous time window. Averaging over the exact window width
/// (rather than a whole number of samples) keeps the leakage of the
/// Larmor-frequency oscillation negligible.
struct WindowAverager<'a> {
    values: &'a [f64],
    dt: f64,
    prefix: Vec<f64>,
}

impl<'a> WindowAverager<'a> {
    fn new(values: &'a [f64], dt: f64) -> Self {
        let mut prefix = Vec::with_capacity(values.len());
        prefix.push(0.0);
        for w in values.windows(2) {
            prefix.push(prefix.last().unwrap() + 0.5 * dt * (w[0] + w[1]));
        }
        Self { values, dt, prefix }
    }

    fn t_end(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.dt
    }

    /// Integral of the interpolant over [0, x].
    fn cumulative(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, self.t_end());
        let j = ((x / self.dt) as usize).min(self.values.len() - 2);
        let frac = x - j as f64 * self.dt;
        let v_left = self.values[j];
        let v_x = v_left + (self.values[j + 1] - v_left) * frac / self.dt;
        self.prefix[j] + 0.5 * frac * (v_left + v_x)
    }

    /// Mean over a window of width `width` centered at `t`, shifted (not
    /// shrunk) where it would cross the trajectory ends.
    fn mean_centered(&self, t: f64, width: f64) -> f64 {
        let t_end = self.t_end();
        let width = width.clamp(self.dt.min(t_end), t_end);
        let mut ta = t - 0.5 * width;
        let mut tb = t + 0.5 * width;
        if ta < 0.0 {
            ta = 0.0;
            tb = width;
        } else if tb > t_end {
            tb = t_end;
            ta = t_end - width;
        }
        (self.cumulative(tb) - self.cumulative(ta)) / (tb - ta)
    }
}

/// One local Larmor period 2*pi/gap as a time window.
fn larmor_width(gap: f64) -> f64 {
    if gap > 0.0 {
        TAU / gap
    } else {
        f64::INFINITY
    }
}

/// Dynamical curvature estimate from the linear response of the force:
/// per sample `F_k = (omega1 sin(theta_k) / (2 theta_t)) <sigma_y>_k`,
/// window-averaged to suppress the oscillatory transients. `window` is a
/// fixed sample count; `None` picks one local Larmor period per sample.
/// The sign is fixed so the sphere-case estimate is +sin(theta)/2.
pub fn extract_curvature_dynamic(
    traj: &Trajectory,
    base: &DriveParams,
    window: Option<usize>,
) -> Result<Vec<CurvatureSample>> {
    let theta_t = traj.theta_velocity();
    if theta_t == 0.0 {
        return Err(SimError::ZeroVelocity(
            "curvature extraction needs a ramp with theta_t > 0".into(),
        ));
    }
    if !(theta_t > 0.0) || !theta_t.is_finite() {
        return Err(SimError::InvalidParams(format!(
            "curvature extraction needs a finite positive quench velocity, got {theta_t}"
        )));
    }
    if traj.protocol.smoothing != Smoothing::Linear {
        return Err(SimError::InvalidParams(
            "curvature extraction requires a linear ramp (constant theta_t)".into(),
        ));
    }
    if traj.protocol.phi != 0.0 {
        return Err(SimError::InvalidParams(
            "curvature extraction is defined for phi = 0".into(),
        ));
    }
    if traj.samples.len() < 2 {
        return Err(SimError::InsufficientPoints(
            "curvature extraction needs at least two samples".into(),
        ));
    }
    let raw: Vec<f64> = traj
        .samples
        .iter()
        .map(|s| base.omega1 * s.theta.sin() / (2.0 * theta_t) * s.sigma_y)
        .collect();
    let averager = WindowAverager::new(&raw, traj.dt);
    let samples = traj
        .samples
        .iter()
        .map(|s| {
            let width = match window {
                Some(w) => w as f64 * traj.dt,
                None => larmor_width(spin::gap(&base.with_theta(s.theta))),
            };
            CurvatureSample {
                theta: s.theta,
                value: averager.mean_centered(s.t, width),
                method: CurvatureMethod::Dynamic,
            }
        })
        .collect();
    Ok(samples)
}

/// Window-averaged generalized force `F_phi = -<dH/dphi>` over the final
/// local Larmor period of a trajectory.
pub fn generalized_force_at_end(traj: &Trajectory, base: &DriveParams) -> Result<f64> {
    let n = traj.samples.len();
    if n < 2 || traj.dt <= 0.0 {
        return Err(SimError::InsufficientPoints(
            "force averaging needs a nonzero-duration trajectory".into(),
        ));
    }
    let raw: Vec<f64> = traj
        .samples
        .iter()
        .map(|s| -(base.omega1 * s.theta.sin() / 2.0) * s.sigma_y)
        .collect();
    let averager = WindowAverager::new(&raw, traj.dt);
    let end = traj.samples[n - 1];
    let width = larmor_width(spin::gap(&base.with_theta(end.theta)));
    Ok(averager.mean_centered(end.t, width))
}

/// Fidelity of the evolved state with the equal superposition
/// `(|g> + |e>)/sqrt(2)` after ramping theta from 0 to pi:
/// `f = |<psi_target|psi(T)>|^2` for pure-state evolution.
pub fn fidelity_experiment(
    base: &DriveParams,
    d2_ratio: f64,
    protocol: &RampProtocol,
) -> Result<f64> {
    if protocol.theta_start.abs() > 1e-12 || (protocol.theta_end - PI).abs() > 1e-12 {
        return Err(SimError::InvalidParams(
            "fidelity experiment requires a theta ramp from 0 to pi".into(),
        ));
    }
    let params = DriveParams {
        delta2: d2_ratio * base.delta1,
        ..*base
    };
    let traj = evolve_ramp(protocol, &params)?;
    let fin = traj.final_state();
    let f = 0.5 * (fin.a + fin.b).norm_sqr();
    Ok(f.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use crate::berry;
    use std::f64::consts::FRAC_PI_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn zero_dt_returns_input_unchanged() {
        let s = QubitState::new(c(0.6, 0.3), c(-0.2, 0.7)).normalized();
        let h = spin::build_hamiltonian(&DriveParams::sphere(1.0)).unwrap();
        assert_eq!(step_propagator(&s, &h, 0.0), s);
    }

    #[test]
    fn diagonal_step_is_a_pure_phase() {
        let h = spin::build_hamiltonian(&DriveParams::new(1.0, 0.0, 0.5, 0.0, 0.0).unwrap())
            .unwrap();
        let s = QubitState::new(c(1.0, 0.0), c(0.0, 0.0));
        let out = step_propagator(&s, &h, PI);
        // e^{-i E t} with E = +0.5, t = pi gives -i
        assert!((out.a - c(0.0, -1.0)).norm() < 1e-14);
        assert!(out.b.norm() < 1e-15);
    }

    #[test]
    fn step_size_warning_threshold() {
        let h = spin::build_hamiltonian(&DriveParams::sphere(1.0)).unwrap();
        assert!(!step_too_large(&h, 0.7));
        assert!(step_too_large(&h, 0.8));
    }

    #[test]
    fn stepper_matches_reference_integrator() {
        // arbitrary normalized initial state through a slow partial ramp
        let initial = QubitState::new(c(0.6, -0.3), c(0.2, 0.71)).normalized();
        let protocol =
            RampProtocol::new(0.0, FRAC_PI_4, 10.0, 10_000, 0.0, Smoothing::Linear).unwrap();
        let base = DriveParams::sphere(0.0);
        let exact = evolve_ramp_from(&protocol, &base, initial).unwrap().final_state();
        let reference = reference_evolve_from(&protocol, &base, initial)
            .unwrap()
            .final_state();
        let dist = ((exact.a - reference.a).norm_sqr() + (exact.b - reference.b).norm_sqr()).sqrt();
        assert!(dist < 1e-8, "state distance {dist:.3e}");
    }

    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn adiabatic_ramp_tracks_ground_state() {
        let base = DriveParams { delta1: 1.0, delta2: 0.0, omega1: 0.5, theta: 0.0, phi: 0.0 };
        let traj = evolve_ramp(&RampProtocol::default(), &base).unwrap();
        let fin = traj.final_state();
        let gs_end = ground_state(&base.with_theta(PI)).unwrap();
        assert!(gs_end.fidelity(&fin) >= 0.99);
        assert!(!traj.step_warning);
    }

    #[test]
    fn sudden_quench_leaves_state_unchanged() {
        let base = DriveParams { delta1: 1.0, delta2: 0.0, omega1: 0.5, theta: 0.0, phi: 0.0 };
        let initial = ground_state(&base).unwrap();
        for total_time in [0.0, 1e-9] {
            let protocol =
                RampProtocol::new(0.0, PI, total_time, 200, 0.0, Smoothing::Linear).unwrap();
            let fin = evolve_ramp(&protocol, &base).unwrap().final_state();
            let dist = ((fin.a - initial.a).norm_sqr() + (fin.b - initial.b).norm_sqr()).sqrt();
            assert!(dist < 1e-6, "T={total_time}: distance {dist:.3e}");
        }
    }

    #[test]
    fn stationary_ramp_only_accumulates_phase() {
        let base = DriveParams { delta1: 1.0, delta2: 0.3, omega1: 0.5, theta: 1.1, phi: 0.0 };
        let protocol =
            RampProtocol::new(1.1, 1.1, 500.0, 5000, 0.0, Smoothing::Linear).unwrap();
        let traj = evolve_ramp(&protocol, &base).unwrap();
        let sy0 = traj.samples[0].sigma_y;
        for s in &traj.samples {
            assert!((s.sigma_y - sy0).abs() < 1e-10);
            assert!((s.state.norm() - 1.0).abs() < 1e-12);
        }
        // the evolved state differs from the initial one by e^{-i e0 t} only
        let p = base.with_theta(1.1);
        let e0 = spin::eigensystem(&spin::build_hamiltonian(&p).unwrap()).unwrap().e0;
        let expected_phase = C64::from_polar(1.0, -e0 * protocol.total_time);
        let overlap = traj.samples[0].state.overlap(&traj.final_state());
        assert!((overlap - expected_phase).norm() < 1e-9);
    }

    #[test]
    fn reference_matches_exact_phase_when_theta_fixed() {
        let base = DriveParams { delta1: 1.0, delta2: 0.0, omega1: 0.5, theta: 0.7, phi: 0.0 };
        let protocol =
            RampProtocol::new(0.7, 0.7, 500.0, 5_000, 0.0, Smoothing::Linear).unwrap();
        let traj = reference_evolve(&protocol, &base).unwrap();
        let p = base.with_theta(0.7);
        let e0 = spin::eigensystem(&spin::build_hamiltonian(&p).unwrap()).unwrap().e0;
        let expected = C64::from_polar(1.0, -e0 * protocol.total_time);
        let overlap = traj.samples[0].state.overlap(&traj.final_state());
        assert!(
            (overlap - expected).norm() < 1e-9,
            "phase defect {:.3e}",
            (overlap - expected).norm()
        );
    }

    #[test]
    fn unitarity_over_a_million_steps() {
        let base = DriveParams { delta1: 1.0, delta2: 0.3, omega1: 0.5, theta: 0.0, phi: 0.0 };
        let protocol =
            RampProtocol::new(0.0, PI, 2000.0, 1_000_000, 0.0, Smoothing::Linear).unwrap();
        let traj = evolve_ramp(&protocol, &base).unwrap();
        let drift = traj
            .samples
            .iter()
            .map(|s| (s.state.norm() - 1.0).abs())
            .fold(0.0f64, f64::max);
        assert!(drift <= 1e-10, "norm drift {drift:.3e}");
    }

    #[test]
    fn ground_population_improves_as_ramps_slow() {
        for d2_ratio in [0.0, 0.5, 2.0] {
            let base =
                DriveParams { delta1: 1.0, delta2: d2_ratio, omega1: 0.5, theta: 0.0, phi: 0.0 };
            let gs_end = ground_state(&base.with_theta(PI)).unwrap();
            let mut populations = Vec::new();
            for doubling in 0..=4 {
                let total_time = 125.0 * (1 << doubling) as f64;
                let steps = (total_time / 0.1) as usize;
                let protocol =
                    RampProtocol::new(0.0, PI, total_time, steps, 0.0, Smoothing::Linear)
                        .unwrap();
                let fin = evolve_ramp(&protocol, &base).unwrap().final_state();
                populations.push(gs_end.fidelity(&fin));
            }
            for pair in populations.windows(2) {
                assert!(
                    pair[1] >= pair[0] - 1e-3,
                    "d2_ratio {d2_ratio}: populations not improving: {populations:?}"
                );
            }
            assert!(populations.last().unwrap() > populations.first().unwrap());
        }
    }

    #[test]
    fn reference_norm_drift_is_negligible() {
        let base = DriveParams::sphere(0.0);
        let protocol =
            RampProtocol::new(0.0, PI, 1000.0, 10_000, 0.0, Smoothing::Linear).unwrap();
        let traj = reference_evolve(&protocol, &base).unwrap();
        for s in &traj.samples {
            assert!((s.state.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dynamic_curvature_on_the_sphere() {
        let base = DriveParams::sphere(0.0);
        let traj = evolve_ramp(&RampProtocol::default(), &base).unwrap();
        let est = extract_curvature_dynamic(&traj, &base, None).unwrap();
        // nearest sample to the equator
        let mid = est
            .iter()
            .min_by(|a, b| {
                (a.theta - FRAC_PI_2)
                    .abs()
                    .total_cmp(&(b.theta - FRAC_PI_2).abs())
            })
            .unwrap();
        assert!(
            (mid.value - 0.5).abs() < 0.05 * 0.5,
            "F(pi/2) = {}",
            mid.value
        );
        // the sin(theta) prefactor kills the estimate near the pole
        for s in est.iter().take(est.len() / 100) {
            assert!(s.value.abs() < 0.02);
        }
    }

    #[test]
    fn extraction_requires_moving_ramp() {
        let base = DriveParams { delta1: 1.0, delta2: 0.0, omega1: 0.5, theta: 1.0, phi: 0.0 };
        let protocol =
            RampProtocol::new(1.0, 1.0, 100.0, 1000, 0.0, Smoothing::Linear).unwrap();
        let traj = evolve_ramp(&protocol, &base).unwrap();
        assert!(matches!(
            extract_curvature_dynamic(&traj, &base, None),
            Err(SimError::ZeroVelocity(_))
        ));
    }

    #[test]
    fn halving_velocity_shrinks_extraction_error() {
        // generic parameters where the first-order residual survives; the
        // error is averaged over a band around the equator to wash out the
        // beat phase of the transient
        let base = DriveParams { delta1: 1.0, delta2: 0.5, omega1: 0.5, theta: 0.0, phi: 0.0 };
        let dt = 0.025f64;
        let mut errors = Vec::new();
        for total_time in [500.0f64, 1000.0] {
            let steps = (total_time / dt).round() as usize;
            let protocol =
                RampProtocol::new(0.0, PI, total_time, steps, 0.0, Smoothing::Linear).unwrap();
            let traj = evolve_ramp(&protocol, &base).unwrap();
            let est = extract_curvature_dynamic(&traj, &base, None).unwrap();
            let band: Vec<f64> = est
                .iter()
                .filter(|s| (s.theta - FRAC_PI_2).abs() < 0.3)
                .map(|s| {
                    let truth = berry::curvature_closed_form(&base.with_theta(s.theta)).value;
                    (s.value - truth).abs()
                })
                .collect();
            errors.push(band.iter().sum::<f64>() / band.len() as f64);
        }
        let ratio = errors[0] / errors[1];
        assert!(
            (1.5..=3.0).contains(&ratio),
            "error ratio {ratio:.2} from {errors:?}"
        );
    }

    #[test]
    fn fidelity_plateaus_and_ripple() {
        let base = DriveParams { delta1: 1.0, delta2: 0.0, omega1: 0.5, theta: 0.0, phi: 0.0 };
        let protocol = RampProtocol::default();
        let inside = fidelity_experiment(&base, 0.0, &protocol).unwrap();
        assert!((inside - 0.5).abs() < 0.05, "f(0) = {inside}");
        let outside = fidelity_experiment(&base, 2.0, &protocol).unwrap();
        assert!((outside - 0.5).abs() < 0.05, "f(2) = {outside}");
        let max_ripple = (0..=8)
            .map(|i| {
                let r = 0.8 + 0.05 * i as f64;
                (fidelity_experiment(&base, r, &protocol).unwrap() - 0.5).abs()
            })
            .fold(0.0f64, f64::max);
        assert!(max_ripple >= 0.2, "max ripple {max_ripple}");
    }

    #[test]
    fn fidelity_requires_full_ramp() {
        let base = DriveParams { delta1: 1.0, delta2: 0.0, omega1: 0.5, theta: 0.0, phi: 0.0 };
        let protocol =
            RampProtocol::new(0.0, FRAC_PI_2, 100.0, 1000, 0.0, Smoothing::Linear).unwrap();
        assert!(matches!(
            fidelity_experiment(&base, 0.0, &protocol),
            Err(SimError::InvalidParams(_))
        ));
    }

    #[test]
    fn degenerate_start_is_rejected() {
        // delta2 = -delta1 closes the gap at theta = 0
        let base = DriveParams { delta1: 1.0, delta2: -1.0, omega1: 0.5, theta: 0.0, phi: 0.0 };
        let protocol = RampProtocol::default();
        assert!(matches!(
            evolve_ramp(&protocol, &base),
            Err(SimError::DegenerateStart(_))
        ));
    }

    #[test]
    fn smoothed_ramp_reaches_the_endpoint() {
        let protocol =
            RampProtocol::new(0.0, PI, 400.0, 4000, 0.0, Smoothing::SinSquaredEdges(0.2))
                .unwrap();
        assert_abs_diff_eq!(protocol.theta_at_fraction(0.0), 0.0);
        assert_abs_diff_eq!(protocol.theta_at_fraction(1.0), PI);
        assert_abs_diff_eq!(protocol.theta_at_fraction(0.5), FRAC_PI_2, epsilon = 1e-12);
        // progress is monotone
        let mut prev = -1.0;
        for i in 0..=100 {
            let v = protocol.theta_at_fraction(i as f64 / 100.0);
            assert!(v >= prev);
            prev = v;
        }
        let base = DriveParams { delta1: 1.0, delta2: 0.0, omega1: 0.5, theta: 0.0, phi: 0.0 };
        let traj = evolve_ramp(&protocol, &base).unwrap();
        let gs_end = ground_state(&base.with_theta(PI)).unwrap();
        assert!(gs_end.fidelity(&traj.final_state()) > 0.99);
    }
}
