//! Driven-qubit model: control parameters, the 2x2 Hamiltonian
//! `H = 1/2 [[Delta, Omega e^{-i phi}], [Omega e^{i phi}, -Delta]]`
//! with `Delta = delta1 cos(theta) + delta2` and `Omega = omega1 sin(theta)`,
//! its Bloch-vector form, closed-form eigensystem, and the degeneracy
//! (monopole) locator on the parameter manifold.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Result, SimError};

/// Degeneracy tolerance relative to `delta1`: well above double-precision
/// noise, far below any physical scale used here.
pub const DEGENERACY_TOL_REL: f64 = 1e-12;

/// Control parameters of the drive. Internally dimensionless with
/// `delta1` as the frequency unit and hbar = 1; the config layer converts
/// laboratory 2*pi*MHz values at the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    pub delta1: f64,
    pub delta2: f64,
    pub omega1: f64,
    /// Polar control angle in [0, pi].
    pub theta: f64,
    /// Drive-tone phase in [0, 2*pi).
    pub phi: f64,
}

impl DriveParams {
    pub fn new(delta1: f64, delta2: f64, omega1: f64, theta: f64, phi: f64) -> Result<Self> {
        let p = Self { delta1, delta2, omega1, theta, phi };
        p.validate()?;
        Ok(p)
    }

    /// Sphere case: omega1 = delta1, delta2 = 0, where the Bloch vector
    /// sweeps the unit sphere and the curvature is sin(theta)/2 exactly.
    pub fn sphere(theta: f64) -> Self {
        Self { delta1: 1.0, delta2: 0.0, omega1: 1.0, theta, phi: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta1 > 0.0) || !self.delta1.is_finite() {
            return Err(SimError::InvalidParams(format!(
                "delta1 must be positive and finite, got {}",
                self.delta1
            )));
        }
        if !(self.omega1 >= 0.0) || !self.omega1.is_finite() {
            return Err(SimError::InvalidParams(format!(
                "omega1 must be non-negative and finite, got {}",
                self.omega1
            )));
        }
        if !self.delta2.is_finite() {
            return Err(SimError::InvalidParams("delta2 must be finite".into()));
        }
        if !(0.0..=PI).contains(&self.theta) {
            return Err(SimError::InvalidParams(format!(
                "theta must lie in [0, pi], got {}",
                self.theta
            )));
        }
        if !(0.0..2.0 * PI).contains(&self.phi) {
            return Err(SimError::InvalidParams(format!(
                "phi must lie in [0, 2*pi), got {}",
                self.phi
            )));
        }
        Ok(())
    }

    /// Detuning Delta = delta1 cos(theta) + delta2. Always recomputed, never stored.
    pub fn detuning(&self) -> f64 {
        self.delta1 * self.theta.cos() + self.delta2
    }

    /// Rabi frequency Omega = omega1 sin(theta).
    pub fn rabi(&self) -> f64 {
        self.omega1 * self.theta.sin()
    }

    pub fn with_theta(self, theta: f64) -> Self {
        Self { theta, ..self }
    }

    pub fn with_phi(self, phi: f64) -> Self {
        Self { phi, ..self }
    }

    pub fn d2_ratio(&self) -> f64 {
        self.delta2 / self.delta1
    }
}

/// Hermitian 2x2 operator stored entrywise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hamiltonian2 {
    pub m: [[C64; 2]; 2],
}

impl Hamiltonian2 {
    pub fn new(m: [[C64; 2]; 2]) -> Self {
        Self { m }
    }

    pub fn trace(&self) -> C64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d00 = (self.m[0][0] - self.m[0][0].conj()).norm();
        let d11 = (self.m[1][1] - self.m[1][1].conj()).norm();
        let d01 = (self.m[0][1] - self.m[1][0].conj()).norm();
        d00.max(d11).max(d01)
    }

    /// Bloch decomposition H = c*I + 1/2 d.sigma, returning (d, c).
    /// The off-diagonal pair is symmetrized so tiny Hermiticity defects
    /// cannot leak into the components.
    pub fn bloch_components(&self) -> (BlochVector, f64) {
        let h01 = 0.5 * (self.m[0][1] + self.m[1][0].conj());
        let d = BlochVector {
            dx: 2.0 * h01.re,
            dy: -2.0 * h01.im,
            dz: (self.m[0][0] - self.m[1][1]).re,
        };
        (d, 0.5 * self.trace().re)
    }

    /// Apply the operator to a 2-vector.
    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }
}

/// Real 3-vector d with H = 1/2 d.sigma; |d| is the energy gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
}

impl BlochVector {
    pub fn norm(&self) -> f64 {
        // hypot twice keeps the norm accurate near under/overflow
        self.dx.hypot(self.dy).hypot(self.dz)
    }

    /// 1/2 d.sigma as an explicit matrix.
    pub fn hamiltonian(&self) -> Hamiltonian2 {
        let off = 0.5 * C64::new(self.dx, -self.dy);
        Hamiltonian2::new([
            [C64::new(0.5 * self.dz, 0.0), off],
            [off.conj(), C64::new(-0.5 * self.dz, 0.0)],
        ])
    }
}

/// Eigensystem of a Hermitian 2x2 operator with a deterministic gauge:
/// the second component of each eigenvector is real and >= 0; if its
/// magnitude is below 1e-12 the first component is made real and >= 0
/// instead.
#[derive(Debug, Clone, Copy)]
pub struct EigenSystem {
    pub e0: f64,
    pub e1: f64,
    pub v0: [C64; 2],
    pub v1: [C64; 2],
}

impl EigenSystem {
    pub fn gap(&self) -> f64 {
        self.e1 - self.e0
    }
}

/// Eq.-style Hamiltonian construction from the drive parameters.
pub fn build_hamiltonian(p: &DriveParams) -> Result<Hamiltonian2> {
    p.validate()?;
    let delta = p.detuning();
    let omega = p.rabi();
    let off = 0.5 * omega * C64::from_polar(1.0, -p.phi);
    Ok(Hamiltonian2::new([
        [C64::new(0.5 * delta, 0.0), off],
        [off.conj(), C64::new(-0.5 * delta, 0.0)],
    ]))
}

/// Bloch vector (Omega cos(phi), Omega sin(phi), Delta) of the same operator.
pub fn bloch_vector(p: &DriveParams) -> Result<BlochVector> {
    p.validate()?;
    let omega = p.rabi();
    Ok(BlochVector {
        dx: omega * p.phi.cos(),
        dy: omega * p.phi.sin(),
        dz: p.detuning(),
    })
}

/// Energy gap |d| = sqrt(Delta^2 + Omega^2). Total on all parameter values.
pub fn gap(p: &DriveParams) -> f64 {
    p.detuning().hypot(p.rabi())
}

const GAUGE_SECOND_COMPONENT_MIN: f64 = 1e-12;

fn fix_gauge(v: [C64; 2]) -> [C64; 2] {
    let anchor = if v[1].norm() >= GAUGE_SECOND_COMPONENT_MIN { v[1] } else { v[0] };
    let mag = anchor.norm();
    if mag == 0.0 {
        return v;
    }
    let phase = anchor.conj() / mag;
    [v[0] * phase, v[1] * phase]
}

/// Closed-form eigensystem with the deterministic gauge above.
/// Fails with `DegenerateInput` when |d| < 1e-12 (in the operator's own
/// frequency unit) because the eigenvectors are then ill-defined.
pub fn eigensystem(h: &Hamiltonian2) -> Result<EigenSystem> {
    let (d, c) = h.bloch_components();
    let dnorm = d.norm();
    if dnorm < 1e-12 {
        return Err(SimError::DegenerateInput(format!(
            "|d| = {dnorm:.3e} below 1e-12; eigenvectors ill-defined"
        )));
    }
    let r_xy = d.dx.hypot(d.dy);
    let polar = r_xy.atan2(d.dz);
    let (st, ct) = (0.5 * polar).sin_cos();
    let azim = if r_xy > 0.0 {
        C64::from_polar(1.0, -d.dy.atan2(d.dx))
    } else {
        C64::new(1.0, 0.0)
    };
    let v0 = fix_gauge([-st * azim, C64::new(ct, 0.0)]);
    let v1 = fix_gauge([ct * azim, C64::new(st, 0.0)]);
    Ok(EigenSystem {
        e0: c - 0.5 * dnorm,
        e1: c + 0.5 * dnorm,
        v0,
        v1,
    })
}

/// Where the degeneracy point Delta = Omega = 0 sits relative to the
/// closed manifold swept by theta in [0, pi], phi in [0, 2*pi).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonopoleLocation {
    Inside,
    OnSurface,
    Outside,
}

/// The surface spans detunings [delta2 - delta1, delta2 + delta1] on the
/// z-axis, so it encloses the origin iff |delta2| < delta1; the degeneracy
/// sits on the surface at theta = pi when delta2 = delta1 (and at theta = 0
/// when delta2 = -delta1).
pub fn monopole_classification(
    delta1: f64,
    delta2: f64,
    omega1: f64,
) -> Result<MonopoleLocation> {
    if !(delta1 > 0.0) {
        return Err(SimError::InvalidParams(format!(
            "delta1 must be positive, got {delta1}"
        )));
    }
    if !(omega1 > 0.0) {
        return Err(SimError::InvalidParams(
            "omega1 must be positive: with omega1 = 0 the manifold collapses to a line".into(),
        ));
    }
    let band = DEGENERACY_TOL_REL * delta1;
    if (delta2.abs() - delta1).abs() <= band {
        Ok(MonopoleLocation::OnSurface)
    } else if delta2.abs() < delta1 {
        Ok(MonopoleLocation::Inside)
    } else {
        Ok(MonopoleLocation::Outside)
    }
}
