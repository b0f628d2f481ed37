//! Cross-module validation: every pair of independent routes to the same
//! quantity is compared at an explicit tolerance, one pass/fail line per
//! check. This backs the `validate` CLI subcommand.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::berry::{self, CurvatureMethod};
use crate::dynamics::{self, RampProtocol, Smoothing};
use crate::perturbation;
use crate::quad;
use crate::spin::{self, DriveParams};
use crate::sweep::{self, Experiment, GridAxis, GridSpec, Overrides, SweepConfig, SweepSpec};

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!(
                "{status} {name}: measured {measured:.3e} (tolerance {threshold:.1e}) {detail}\n",
                name = c.name,
                measured = c.measured,
                threshold = c.threshold,
                detail = c.detail,
            ));
        }
        let passed = self.checks.iter().filter(|c| c.passed).count();
        out.push_str(&format!("{passed}/{} checks passed\n", self.checks.len()));
        out
    }
}

/// Knobs for the validation run. The trajectory-based checks scale with
/// `total_time`/`steps`; `flip_extraction_sign` is a fault-injection hook
/// that negates the dynamically extracted curvature.
#[derive(Debug, Clone, Copy)]
pub struct ValidateOptions {
    pub chern_nodes: usize,
    pub loop_nodes: usize,
    pub total_time: f64,
    pub steps: usize,
    pub flip_extraction_sign: bool,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            chern_nodes: berry::DEFAULT_CHERN_NODES,
            loop_nodes: berry::DEFAULT_LOOP_NODES,
            total_time: 2000.0,
            steps: 20_000,
            flip_extraction_sign: false,
        }
    }
}

fn check(name: &'static str, measured: f64, threshold: f64, detail: String) -> CheckResult {
    CheckResult {
        name,
        passed: measured.is_finite() && measured <= threshold,
        measured,
        threshold,
        detail,
    }
}

fn fail(name: &'static str, threshold: f64, detail: String) -> CheckResult {
    CheckResult { name, passed: false, measured: f64::NAN, threshold, detail }
}

fn full_ramp(opts: &ValidateOptions) -> RampProtocol {
    RampProtocol {
        theta_start: 0.0,
        theta_end: PI,
        total_time: opts.total_time,
        steps: opts.steps,
        phi: 0.0,
        smoothing: Smoothing::Linear,
    }
}

/// Dynamic curvature estimate at the sample closest to `theta`.
fn dynamic_at(
    base: &DriveParams,
    protocol: &RampProtocol,
    theta: f64,
    sign: f64,
) -> Result<f64, crate::SimError> {
    let traj = dynamics::evolve_ramp(protocol, base)?;
    let samples = dynamics::extract_curvature_dynamic(&traj, base, None)?;
    Ok(sign
        * samples
            .iter()
            .min_by(|a, b| (a.theta - theta).abs().total_cmp(&(b.theta - theta).abs()))
            .map(|s| s.value)
            .unwrap_or(f64::NAN))
}

pub fn validate(opts: &ValidateOptions) -> ValidationReport {
    let mut checks = Vec::new();
    let sign = if opts.flip_extraction_sign { -1.0 } else { 1.0 };

    // spectral vs closed form over the (theta, d2_ratio) grid
    {
        let mut max_diff: f64 = 0.0;
        let mut used = 0;
        for i in 0..=100 {
            let theta = PI * i as f64 / 100.0;
            for j in 0..=20 {
                let d2 = 2.0 * j as f64 / 20.0;
                for omega1 in [0.5, 1.0] {
                    let p = DriveParams { delta1: 1.0, delta2: d2, omega1, theta, phi: 0.0 };
                    if spin::gap(&p) <= 1e-6 {
                        continue;
                    }
                    used += 1;
                    match berry::curvature_spectral(&p) {
                        Ok(s) => {
                            let c = berry::curvature_closed_form(&p).value;
                            max_diff = max_diff.max((s.value - c).abs());
                        }
                        Err(e) => {
                            checks.push(fail(
                                "spectral vs closed-form curvature",
                                1e-9,
                                format!("unexpected error at theta={theta}, d2={d2}: {e}"),
                            ));
                        }
                    }
                }
            }
        }
        checks.push(check(
            "spectral vs closed-form curvature",
            max_diff,
            1e-9,
            format!("{used} grid points, gap > 1e-6"),
        ));
    }

    // sphere-case profiles against sin(theta)/2
    {
        let mut max_spectral: f64 = 0.0;
        let mut max_closed: f64 = 0.0;
        for i in 0..=1000 {
            let theta = PI * i as f64 / 1000.0;
            let p = DriveParams::sphere(theta);
            let truth = 0.5 * theta.sin();
            max_closed = max_closed.max((berry::curvature_closed_form(&p).value - truth).abs());
            if spin::gap(&p) > 1e-9 {
                if let Ok(s) = berry::curvature_spectral(&p) {
                    max_spectral = max_spectral.max((s.value - truth).abs());
                }
            }
        }
        checks.push(check(
            "sphere closed-form curvature",
            max_closed,
            1e-12,
            "1001 theta nodes vs sin(theta)/2".into(),
        ));
        checks.push(check(
            "sphere spectral curvature",
            max_spectral,
            1e-9,
            "1001 theta nodes vs sin(theta)/2".into(),
        ));
    }

    // Chern quantization across the transition
    {
        let mut max_dev: f64 = 0.0;
        let mut max_est: f64 = 0.0;
        let mut failed: Option<String> = None;
        for j in 0..=20 {
            let r = 0.1 * j as f64;
            let want = if (r - 1.0).abs() < 1e-12 {
                0.5
            } else if r < 1.0 {
                1.0
            } else {
                0.0
            };
            match berry::chern_number(1.0, r, 0.5, CurvatureMethod::ClosedForm, opts.chern_nodes) {
                Ok(c) => {
                    max_dev = max_dev.max((c.chern - want).abs());
                    max_est = max_est.max(c.est_error);
                }
                Err(e) => failed = Some(e.to_string()),
            }
        }
        checks.push(match failed {
            Some(e) => fail("chern quantization", 1e-3, e),
            None => check(
                "chern quantization",
                max_dev,
                1e-3,
                format!("21 ratios, {} nodes, max est_error {max_est:.2e}", opts.chern_nodes),
            ),
        });
    }

    // loop phase: overlap product vs solid angle
    {
        let mut max_dev: f64 = 0.0;
        let mut failed: Option<String> = None;
        for &theta in &[0.4, 1.0, FRAC_PI_2, 2.0, 2.8] {
            for &(d2, omega1) in &[(0.0, 1.0), (0.5, 0.5)] {
                let p = DriveParams { delta1: 1.0, delta2: d2, omega1, theta, phi: 0.0 };
                match (berry::berry_phase_loop(&p, opts.loop_nodes), berry::solid_angle_loop_phase(&p)) {
                    (Ok(lp), Ok(sa)) => {
                        let d = (lp.gamma - sa).rem_euclid(TAU);
                        max_dev = max_dev.max(d.min(TAU - d));
                    }
                    (Err(e), _) | (_, Err(e)) => failed = Some(e.to_string()),
                }
            }
        }
        checks.push(match failed {
            Some(e) => fail("loop phase vs solid angle", 1e-6, e),
            None => check(
                "loop phase vs solid angle",
                max_dev,
                1e-6,
                format!("10 loops, {} nodes", opts.loop_nodes),
            ),
        });
    }

    // Stokes: loop-phase differences vs curvature flux
    {
        let pairs = [
            (0.3, 0.9),
            (0.5, 1.3),
            (0.7, 1.8),
            (0.9, 2.2),
            (1.2, 2.6),
            (0.4, 2.9),
            (1.0, 1.6),
            (1.5, 2.4),
            (0.6, 2.0),
            (0.2, 1.1),
        ];
        let mut max_dev: f64 = 0.0;
        let mut failed: Option<String> = None;
        for &(d2, omega1) in &[(0.0, 1.0), (0.5, 0.5)] {
            let base = DriveParams { delta1: 1.0, delta2: d2, omega1, theta: 0.0, phi: 0.0 };
            for &(ta, tb) in &pairs {
                let flux = TAU
                    * quad::simpson(
                        |t| berry::curvature_closed_form(&base.with_theta(t)).value,
                        ta,
                        tb,
                        2001,
                    );
                let ga = berry::berry_phase_loop(&base.with_theta(ta), opts.loop_nodes);
                let gb = berry::berry_phase_loop(&base.with_theta(tb), opts.loop_nodes);
                match (ga, gb) {
                    (Ok(ga), Ok(gb)) => {
                        let d = (gb.gamma - ga.gamma - flux).rem_euclid(TAU);
                        max_dev = max_dev.max(d.min(TAU - d));
                    }
                    (Err(e), _) | (_, Err(e)) => failed = Some(e.to_string()),
                }
            }
        }
        checks.push(match failed {
            Some(e) => fail("stokes consistency", 1e-5, e),
            None => check(
                "stokes consistency",
                max_dev,
                1e-5,
                "10 theta pairs, sphere and d2_ratio = 0.5".into(),
            ),
        });
    }

    // exact stepper vs reference integrator
    {
        let protocol = full_ramp(opts);
        let mut worst: f64 = 0.0;
        let mut failed: Option<String> = None;
        for d2 in [0.0, 0.5] {
            let base = DriveParams { delta1: 1.0, delta2: d2, omega1: 0.5, theta: 0.0, phi: 0.0 };
            match (
                dynamics::evolve_ramp(&protocol, &base),
                dynamics::reference_evolve(&protocol, &base),
            ) {
                (Ok(a), Ok(b)) => {
                    worst = worst.max(1.0 - a.final_state().fidelity(&b.final_state()));
                }
                (Err(e), _) | (_, Err(e)) => failed = Some(e.to_string()),
            }
        }
        checks.push(match failed {
            Some(e) => fail("propagator vs reference integrator", 1e-6, e),
            None => check(
                "propagator vs reference integrator",
                worst,
                1e-6,
                "final-state infidelity, d2_ratio in {0, 0.5}".into(),
            ),
        });
    }

    // norm conservation over a long ramp
    {
        let protocol = RampProtocol {
            theta_start: 0.0,
            theta_end: PI,
            total_time: 1000.0,
            steps: 100_000,
            phi: 0.0,
            smoothing: Smoothing::Linear,
        };
        let base = DriveParams::sphere(0.0);
        match dynamics::evolve_ramp(&protocol, &base) {
            Ok(traj) => {
                let drift = traj
                    .samples
                    .iter()
                    .map(|s| (s.state.norm() - 1.0).abs())
                    .fold(0.0f64, f64::max);
                checks.push(check(
                    "norm conservation",
                    drift,
                    1e-10,
                    "1e5 exact-exponential steps".into(),
                ));
            }
            Err(e) => checks.push(fail("norm conservation", 1e-10, e.to_string())),
        }
    }

    // dynamic curvature at the equator (sphere case)
    {
        let base = DriveParams::sphere(0.0);
        match dynamic_at(&base, &full_ramp(opts), FRAC_PI_2, sign) {
            Ok(f) => checks.push(check(
                "dynamic curvature at the equator",
                (f - 0.5).abs() / 0.5,
                0.05,
                format!("F_dyn(pi/2) = {f:.5}, relative to 0.5"),
            )),
            Err(e) => checks.push(fail("dynamic curvature at the equator", 0.05, e.to_string())),
        }
    }

    // dynamically integrated Chern numbers
    {
        let protocol = full_ramp(opts);
        let mut max_dev: f64 = 0.0;
        let mut failed: Option<String> = None;
        for r in [0.0, 0.5, 1.5, 2.0] {
            let base = DriveParams { delta1: 1.0, delta2: r, omega1: 0.5, theta: 0.0, phi: 0.0 };
            let analytic =
                berry::chern_number(1.0, r, 0.5, CurvatureMethod::ClosedForm, opts.chern_nodes);
            let dynamic = dynamics::evolve_ramp(&protocol, &base)
                .and_then(|traj| dynamics::extract_curvature_dynamic(&traj, &base, None))
                .and_then(|mut samples| {
                    if opts.flip_extraction_sign {
                        for s in &mut samples {
                            s.value = -s.value;
                        }
                    }
                    berry::chern_from_samples(r, &samples)
                });
            match (analytic, dynamic) {
                (Ok(a), Ok(d)) => max_dev = max_dev.max((a.chern - d.chern).abs()),
                (Err(e), _) | (_, Err(e)) => failed = Some(e.to_string()),
            }
        }
        checks.push(match failed {
            Some(e) => fail("dynamically integrated chern", 0.1, e),
            None => check(
                "dynamically integrated chern",
                max_dev,
                0.1,
                "d2_ratio in {0, 0.5, 1.5, 2}".into(),
            ),
        });
    }

    // response linearity: F estimates constant across velocities and equal
    // to the analytic curvature at the smallest velocity
    {
        let base = DriveParams::sphere(0.0);
        let dt = opts.total_time / opts.steps as f64;
        let mut estimates = Vec::new();
        let mut failed: Option<String> = None;
        for scale in [1.0, 2.0, 4.0] {
            let total_time = opts.total_time * scale;
            let protocol = RampProtocol {
                theta_start: 0.0,
                theta_end: PI,
                total_time,
                steps: ((total_time / dt).round() as usize).max(100),
                phi: 0.0,
                smoothing: Smoothing::Linear,
            };
            match dynamic_at(&base, &protocol, FRAC_PI_2, sign) {
                Ok(f) => estimates.push(f),
                Err(e) => failed = Some(e.to_string()),
            }
        }
        match failed {
            Some(e) => {
                checks.push(fail("response linearity", 0.10, e.clone()));
                checks.push(fail("linear-response curvature agreement", 0.05, e));
            }
            None => {
                let mut spread: f64 = 0.0;
                for a in &estimates {
                    for b in &estimates {
                        spread = spread.max((a - b).abs() / b.abs());
                    }
                }
                checks.push(check(
                    "response linearity",
                    spread,
                    0.10,
                    format!("F_dyn across velocities: {estimates:?}"),
                ));
                let truth = berry::curvature_closed_form(&DriveParams::sphere(FRAC_PI_2)).value;
                checks.push(check(
                    "linear-response curvature agreement",
                    (estimates[2] - truth).abs() / truth,
                    0.05,
                    format!("smallest velocity vs analytic {truth}"),
                ));
            }
        }
    }

    // first-order perturbation theory: residual order in the quench velocity
    {
        let base = DriveParams::sphere(0.0);
        let template = RampProtocol {
            theta_start: 0.0,
            theta_end: FRAC_PI_2,
            total_time: 250.0,
            steps: 20_000,
            phi: 0.0,
            smoothing: Smoothing::Linear,
        };
        match perturbation::scaling_report(
            &base,
            &template,
            &[PI / 500.0, PI / 1000.0, PI / 2000.0],
        ) {
            Ok(report) => checks.push(check(
                "perturbative residual scaling",
                (report.order_estimate - 2.0).abs(),
                0.5,
                format!("fitted order {:.3}", report.order_estimate),
            )),
            Err(e) => checks.push(fail("perturbative residual scaling", 0.5, e.to_string())),
        }
    }

    // perturbative vs exact amplitude magnitude on generic points
    {
        let mut worst: f64 = 0.0;
        let mut failed: Option<String> = None;
        for &(d2, omega1) in &[(0.3, 0.55), (0.6, 0.8)] {
            let base = DriveParams { delta1: 1.0, delta2: d2, omega1, theta: 0.0, phi: 0.0 };
            let theta_t = PI / 1000.0;
            let total_time = FRAC_PI_2 / theta_t;
            let protocol = RampProtocol {
                theta_start: 0.0,
                theta_end: FRAC_PI_2,
                total_time,
                steps: ((total_time / 0.0125).round() as usize).max(100),
                phi: 0.0,
                smoothing: Smoothing::Linear,
            };
            let outcome = dynamics::evolve_ramp(&protocol, &base).and_then(|traj| {
                let measured = perturbation::measured_first_order_amplitude(&traj, &base)?;
                let predicted = perturbation::first_order_amplitude(&base, &protocol)?;
                Ok((measured.norm() - predicted.norm()).abs() / measured.norm())
            });
            match outcome {
                Ok(rel) => worst = worst.max(rel),
                Err(e) => failed = Some(e.to_string()),
            }
        }
        checks.push(match failed {
            Some(e) => fail("perturbative amplitude consistency", 0.25, e),
            None => check(
                "perturbative amplitude consistency",
                worst,
                0.25,
                "relative |a1| deviation on generic parameter points".into(),
            ),
        });
    }

    // predicted vs measured generalized force
    {
        let base = DriveParams::sphere(0.0);
        let theta_t = PI / (10.0 * opts.total_time);
        let total_time = FRAC_PI_2 / theta_t;
        let dt = opts.total_time / opts.steps as f64;
        let protocol = RampProtocol {
            theta_start: 0.0,
            theta_end: FRAC_PI_2,
            total_time,
            steps: ((total_time / dt).round() as usize).max(100),
            phi: 0.0,
            smoothing: Smoothing::Linear,
        };
        let outcome = dynamics::evolve_ramp(&protocol, &base).and_then(|traj| {
            let measured = sign * dynamics::generalized_force_at_end(&traj, &base)?;
            let predicted =
                perturbation::predicted_force(&base.with_theta(FRAC_PI_2), theta_t)?;
            Ok((measured - predicted).abs() / predicted.abs())
        });
        checks.push(match outcome {
            Ok(rel) => check(
                "force consistency",
                rel,
                0.10,
                format!("theta_t = {theta_t:.3e} at theta = pi/2"),
            ),
            Err(e) => fail("force consistency", 0.10, e.to_string()),
        });
    }

    // fidelity plateaus, ripple, and reference cross-check
    {
        let protocol = full_ramp(opts);
        let base = DriveParams { delta1: 1.0, delta2: 0.0, omega1: 0.5, theta: 0.0, phi: 0.0 };
        let mut plateau_dev: f64 = 0.0;
        let mut ripple: f64 = 0.0;
        let mut failed: Option<String> = None;
        for r in [0.0, 0.25, 0.5, 1.5, 1.75, 2.0] {
            match dynamics::fidelity_experiment(&base, r, &protocol) {
                Ok(f) => plateau_dev = plateau_dev.max((f - 0.5).abs()),
                Err(e) => failed = Some(e.to_string()),
            }
        }
        for i in 0..=8 {
            let r = 0.8 + 0.05 * i as f64;
            match dynamics::fidelity_experiment(&base, r, &protocol) {
                Ok(f) => ripple = ripple.max((f - 0.5).abs()),
                Err(e) => failed = Some(e.to_string()),
            }
        }
        match failed {
            Some(e) => {
                checks.push(fail("fidelity plateaus", 0.05, e.clone()));
                checks.push(fail("fidelity ripple", 1.0, e));
            }
            None => {
                checks.push(check(
                    "fidelity plateaus",
                    plateau_dev,
                    0.05,
                    "|f - 0.5| for d2_ratio <= 0.5 and >= 1.5".into(),
                ));
                checks.push(check(
                    "fidelity ripple",
                    // pass when the excursion is at least 0.2
                    0.2 - ripple,
                    0.0,
                    format!("max |f - 0.5| = {ripple:.3} over d2_ratio in [0.8, 1.2]"),
                ));
            }
        }
        // the 1e-6 agreement is tied to the default protocol, so this
        // cross-check does not scale down with the options
        let ref_protocol = RampProtocol::default();
        let mut ref_dev: f64 = 0.0;
        let mut ref_failed: Option<String> = None;
        for r in [0.0, 1.0, 2.0] {
            let params = DriveParams { delta2: r, ..base };
            let fine = dynamics::evolve_ramp(&ref_protocol, &params).map(|t| {
                let s = t.final_state();
                0.5 * (s.a + s.b).norm_sqr()
            });
            let reference = dynamics::reference_evolve(&ref_protocol, &params).map(|t| {
                let s = t.final_state();
                0.5 * (s.a + s.b).norm_sqr()
            });
            match (fine, reference) {
                (Ok(a), Ok(b)) => ref_dev = ref_dev.max((a - b).abs()),
                (Err(e), _) | (_, Err(e)) => ref_failed = Some(e.to_string()),
            }
        }
        checks.push(match ref_failed {
            Some(e) => fail("fidelity vs reference integrator", 1e-6, e),
            None => check(
                "fidelity vs reference integrator",
                ref_dev,
                1e-6,
                "d2_ratio in {0, 1, 2}".into(),
            ),
        });
    }

    // sweep determinism across worker counts
    {
        let config = SweepConfig {
            grid: Some(GridSpec { axis: GridAxis::D2Ratio, min: 0.0, max: 2.0, count: 21 }),
            ..SweepConfig::default()
        };
        let run = |workers: usize| -> Result<String, crate::SimError> {
            let mut spec = SweepSpec::resolve(Experiment::Chern, &config, &Overrides::default())?;
            spec.workers = workers;
            spec.nodes = opts.chern_nodes;
            Ok(sweep::csv_string(&sweep::run_sweep(&spec)?))
        };
        checks.push(match (run(1), run(8)) {
            (Ok(a), Ok(b)) => check(
                "sweep determinism",
                if a == b { 0.0 } else { 1.0 },
                0.0,
                "chern sweep bytes, workers 1 vs 8".into(),
            ),
            (Err(e), _) | (_, Err(e)) => fail("sweep determinism", 0.0, e.to_string()),
        });
    }

    ValidationReport { checks }
}
