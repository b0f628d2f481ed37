//! Berry curvature over the (theta, phi) manifold, the loop (geometric)
//! phase from overlap products, and the first Chern number whose jump from
//! 1 to 0 marks the topological transition.
//!
//! Two independent analytic routes are kept side by side: the spectral
//! two-level formula
//! `F = -Im[<0|dH/dtheta|1><1|dH/dphi|0> - (theta <-> phi)] / (E1 - E0)^2`
//! and the closed form
//! `F = omega1^2 sin(theta) (delta1 + delta2 cos(theta)) / (2 |d|^3)`.
//! They are cross-checked against each other and against the dynamical
//!(linear-response) estimate produced by `dynamics`.

use num_complex::Complex64 as C64;
use std::f64::consts::{PI, TAU};

use crate::error::{Result, SimError};
use crate::quad;
use crate::spin::{self, DriveParams, Hamiltonian2};

/// Gap threshold (relative to delta1) below which spectral formulas refuse
/// to divide by (E1 - E0)^2.
pub const NEAR_DEGENERACY_REL: f64 = 1e-9;

/// Default Simpson node count for Chern quadrature.
pub const DEFAULT_CHERN_NODES: usize = 2001;
/// Smallest admissible Chern node count.
pub const MIN_CHERN_NODES: usize = 101;
/// Default discretization of the phi loop for the overlap-product phase.
pub const DEFAULT_LOOP_NODES: usize = 20_000;

/// How a curvature value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvatureMethod {
    Spectral,
    ClosedForm,
    Dynamic,
}

/// A theta-tagged curvature value with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureSample {
    pub theta: f64,
    pub value: f64,
    pub method: CurvatureMethod,
}

/// Chern quadrature outcome; `est_error` comes from node halving.
#[derive(Debug, Clone, Copy)]
pub struct ChernResult {
    pub d2_ratio: f64,
    pub chern: f64,
    pub quadrature_nodes: usize,
    pub est_error: f64,
}

/// Geometric phase of the phi loop at fixed theta, reported mod 2*pi.
#[derive(Debug, Clone, Copy)]
pub struct LoopPhase {
    pub theta: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    Ground,
    Excited,
}

/// dH/dtheta, formed analytically from the drive convention.
pub fn dtheta_hamiltonian(p: &DriveParams) -> Hamiltonian2 {
    let (s, c) = p.theta.sin_cos();
    spin::BlochVector {
        dx: p.omega1 * c * p.phi.cos(),
        dy: p.omega1 * c * p.phi.sin(),
        dz: -p.delta1 * s,
    }
    .hamiltonian()
}

/// dH/dphi; at phi = 0 this is (Omega/2) sigma_y.
pub fn dphi_hamiltonian(p: &DriveParams) -> Hamiltonian2 {
    let omega = p.rabi();
    spin::BlochVector {
        dx: -omega * p.phi.sin(),
        dy: omega * p.phi.cos(),
        dz: 0.0,
    }
    .hamiltonian()
}

pub(crate) fn sandwich(bra: [C64; 2], op: &Hamiltonian2, ket: [C64; 2]) -> C64 {
    let w = op.apply(ket);
    bra[0].conj() * w[0] + bra[1].conj() * w[1]
}

/// Spectral-formula curvature for a chosen band. The two bands carry
/// opposite curvature.
pub fn curvature_spectral_band(p: &DriveParams, band: Band) -> Result<f64> {
    p.validate()?;
    let g = spin::gap(p);
    if g <= NEAR_DEGENERACY_REL * p.delta1 {
        return Err(SimError::NearDegeneracy(format!(
            "gap {g:.3e} below {:.1e} * delta1; use the closed-form limit",
            NEAR_DEGENERACY_REL
        )));
    }
    let es = spin::eigensystem(&spin::build_hamiltonian(p)?)?;
    let (lo, hi) = match band {
        Band::Ground => (es.v0, es.v1),
        Band::Excited => (es.v1, es.v0),
    };
    let ht = dtheta_hamiltonian(p);
    let hp = dphi_hamiltonian(p);
    let term = sandwich(lo, &ht, hi) * sandwich(hi, &hp, lo)
        - sandwich(lo, &hp, hi) * sandwich(hi, &ht, lo);
    Ok(-term.im / (es.gap() * es.gap()))
}

/// Ground-band curvature from the spectral formula.
pub fn curvature_spectral(p: &DriveParams) -> Result<CurvatureSample> {
    Ok(CurvatureSample {
        theta: p.theta,
        value: curvature_spectral_band(p, Band::Ground)?,
        method: CurvatureMethod::Spectral,
    })
}

/// Finite limit of the closed form at a gap-closing point.
fn closed_form_limit(p: &DriveParams) -> f64 {
    p.delta1 / (4.0 * p.omega1)
}

/// Closed-form ground-band curvature; total on the whole parameter range
/// because the gap-closing points are removable (limit delta1/(4 omega1)).
pub fn curvature_closed_form(p: &DriveParams) -> CurvatureSample {
    let g = spin::gap(p);
    let value = if g <= NEAR_DEGENERACY_REL * p.delta1 {
        closed_form_limit(p)
    } else {
        let s = p.theta.sin();
        p.omega1 * p.omega1 * s * (p.delta1 + p.delta2 * p.theta.cos()) / (2.0 * g * g * g)
    };
    CurvatureSample {
        theta: p.theta,
        value,
        method: CurvatureMethod::ClosedForm,
    }
}

/// Geometric phase of the ground state around the phi loop at fixed theta,
/// accumulated from discrete overlap products
/// `gamma = -sum_k arg <0(phi_k)|0(phi_{k+1})>`, which is gauge invariant
/// by construction. Matches the solid-angle value `pi (1 - dz/|d|)` mod 2*pi.
pub fn berry_phase_loop(p: &DriveParams, nodes: usize) -> Result<LoopPhase> {
    p.validate()?;
    if nodes < 16 {
        return Err(SimError::InvalidParams(format!(
            "phi loop needs >= 16 nodes, got {nodes}"
        )));
    }
    let g = spin::gap(p);
    if g <= NEAR_DEGENERACY_REL * p.delta1 {
        return Err(SimError::NearDegeneracy(format!(
            "gap {g:.3e} too small along the phi loop"
        )));
    }
    let ground = |phi: f64| -> Result<[C64; 2]> {
        let q = DriveParams { phi, ..*p };
        Ok(spin::eigensystem(&spin::build_hamiltonian(&q)?)?.v0)
    };
    let mut gamma = 0.0;
    let mut prev = ground(0.0)?;
    for k in 1..=nodes {
        let phi = if k == nodes { 0.0 } else { TAU * k as f64 / nodes as f64 };
        let next = ground(phi)?;
        let overlap = prev[0].conj() * next[0] + prev[1].conj() * next[1];
        gamma -= overlap.arg();
        prev = next;
    }
    Ok(LoopPhase {
        theta: p.theta,
        gamma: gamma.rem_euclid(TAU),
    })
}

/// Solid-angle value of the same loop phase, `pi (1 - dz/|d|)` mod 2*pi.
/// Independent analytic route used to cross-check `berry_phase_loop`.
pub fn solid_angle_loop_phase(p: &DriveParams) -> Result<f64> {
    p.validate()?;
    let g = spin::gap(p);
    if g <= NEAR_DEGENERACY_REL * p.delta1 {
        return Err(SimError::NearDegeneracy(format!(
            "gap {g:.3e} too small for a well-defined loop phase"
        )));
    }
    Ok((PI * (1.0 - p.detuning() / g)).rem_euclid(TAU))
}

fn quadrature_point(
    delta1: f64,
    delta2: f64,
    omega1: f64,
    method: CurvatureMethod,
    theta: f64,
) -> Result<f64> {
    let p = DriveParams { delta1, delta2, omega1, theta, phi: 0.0 };
    if spin::gap(&p) <= NEAR_DEGENERACY_REL * delta1 {
        // removable endpoint: substitute the closed-form limit
        return Ok(closed_form_limit(&p));
    }
    match method {
        CurvatureMethod::ClosedForm => Ok(curvature_closed_form(&p).value),
        CurvatureMethod::Spectral => Ok(curvature_spectral(&p)?.value),
        CurvatureMethod::Dynamic => unreachable!("rejected before quadrature"),
    }
}

/// First Chern number `C1 = int_0^pi F dtheta` (the phi integral is 2*pi
/// times trivial by axial symmetry), by composite Simpson quadrature.
pub fn chern_number(
    delta1: f64,
    delta2: f64,
    omega1: f64,
    method: CurvatureMethod,
    nodes: usize,
) -> Result<ChernResult> {
    if !(delta1 > 0.0) || !delta1.is_finite() || !delta2.is_finite() {
        return Err(SimError::InvalidParams(
            "chern_number needs finite detunings with delta1 > 0".into(),
        ));
    }
    if !(omega1 > 0.0) {
        return Err(SimError::InvalidParams(
            "chern_number needs omega1 > 0".into(),
        ));
    }
    if nodes < MIN_CHERN_NODES || nodes.is_multiple_of(2) {
        return Err(SimError::InvalidParams(format!(
            "chern quadrature needs an odd node count >= {MIN_CHERN_NODES}, got {nodes}"
        )));
    }
    if method == CurvatureMethod::Dynamic {
        return Err(SimError::InvalidParams(
            "dynamic Chern integration works on trajectory samples; use chern_from_samples".into(),
        ));
    }
    let f = |theta: f64| quadrature_point(delta1, delta2, omega1, method, theta);
    let fine = quad::try_simpson(f, 0.0, PI, nodes)?;
    let mut coarse_nodes = nodes / 2 + 1;
    if coarse_nodes.is_multiple_of(2) {
        coarse_nodes += 1;
    }
    let coarse = quad::try_simpson(f, 0.0, PI, coarse_nodes)?;
    Ok(ChernResult {
        d2_ratio: delta2 / delta1,
        chern: fine,
        quadrature_nodes: nodes,
        est_error: (fine - coarse).abs(),
    })
}

/// Chern number from uniformly spaced curvature samples (the dynamic route).
pub fn chern_from_samples(d2_ratio: f64, samples: &[CurvatureSample]) -> Result<ChernResult> {
    if samples.len() < 3 {
        return Err(SimError::InsufficientPoints(format!(
            "dynamic Chern integration needs >= 3 samples, got {}",
            samples.len()
        )));
    }
    let h = samples[1].theta - samples[0].theta;
    if h <= 0.0 {
        return Err(SimError::InvalidParams("theta samples must increase".into()));
    }
    for w in samples.windows(2) {
        if ((w[1].theta - w[0].theta) - h).abs() > 1e-9 * h.max(1e-300) {
            return Err(SimError::InvalidParams(
                "dynamic Chern integration needs uniform theta spacing".into(),
            ));
        }
    }
    let values: Vec<f64> = samples.iter().map(|s| s.value).collect();
    let fine = quad::simpson_samples(&values, h)?;
    let coarse_values: Vec<f64> = values.iter().copied().step_by(2).collect();
    let coarse = quad::simpson_samples(&coarse_values, 2.0 * h)?;
    Ok(ChernResult {
        d2_ratio,
        chern: fine,
        quadrature_nodes: samples.len(),
        est_error: (fine - coarse).abs(),
    })
}
