//! Electromagnetic scattering by small bodies in the single-scattering
//! approximation: each body is driven by the field supplied at its position.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use thiserror::Error;

use crate::mesh::{summarize, TriangleMesh, Vec3};
use crate::potential::{electric_polarizability, magnetic_polarizability, PotentialError};

pub type CVec3 = Vector3<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmError {
    #[error("contrast denominator vanishes (material + background = 0)")]
    ZeroDenominator,
    #[error("contrast {0} is complex; polarizabilities are computed for real contrasts only")]
    ComplexContrast(Complex64),
    #[error("{bodies} bodies but {fields} incident fields")]
    LengthMismatch { bodies: usize, fields: usize },
    #[error("direction {0:?} is not a unit vector")]
    NotUnit([f64; 3]),
    #[error("polarization is not transverse to the propagation direction")]
    NotTransverse,
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

/// The six-component field `(E, H)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EMField6 {
    pub e: CVec3,
    pub h: CVec3,
}

impl EMField6 {
    pub fn zero() -> Self {
        Self {
            e: CVec3::zeros(),
            h: CVec3::zeros(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            e: self.e * s,
            h: self.h * s,
        }
    }

    pub fn norm(&self) -> f64 {
        (self.e.norm_squared() + self.h.norm_squared()).sqrt()
    }
}

impl std::ops::Add for EMField6 {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self {
            e: self.e + rhs.e,
            h: self.h + rhs.h,
        }
    }
}

/// Background permittivity and permeability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium {
    pub eps0: Complex64,
    pub mu0: Complex64,
}

impl Default for Medium {
    fn default() -> Self {
        Self {
            eps0: Complex64::new(1.0, 0.0),
            mu0: Complex64::new(1.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EMBody {
    pub position: Vec3,
    pub volume: f64,
    pub alpha: Matrix3<f64>,
    pub beta_tilde: Matrix3<f64>,
    pub medium: Medium,
}

impl EMBody {
    /// Computes `α(γ)` and `β̃` for a body of permittivity `eps` and
    /// permeability `mu`; the position is the volume centroid.
    pub fn from_mesh(mesh: &TriangleMesh, eps: Complex64, mu: Complex64, medium: Medium) -> Result<Self, EmError> {
        let geometry = summarize(mesh);
        let gamma = real_contrast(gamma_contrast(eps, medium.eps0)?)?;
        Ok(Self {
            position: geometry.centroid,
            volume: geometry.volume,
            alpha: electric_polarizability(mesh, gamma)?.entries,
            beta_tilde: beta_tilde(mesh, mu, medium.mu0)?,
            medium,
        })
    }
}

fn real_contrast(g: Complex64) -> Result<f64, EmError> {
    if g.im != 0.0 {
        return Err(EmError::ComplexContrast(g));
    }
    Ok(g.re)
}

fn unit(v: &Vec3) -> Result<Vec3, EmError> {
    if (v.norm() - 1.0).abs() > 1e-12 {
        return Err(EmError::NotUnit([v.x, v.y, v.z]));
    }
    Ok(*v)
}

/// `(ε − ε₀)/(ε + ε₀)`; an infinite `ε` gives 1.
pub fn gamma_contrast(value: Complex64, background: Complex64) -> Result<Complex64, EmError> {
    if value.re.is_infinite() {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let den = value + background;
    if den.norm() == 0.0 {
        return Err(EmError::ZeroDenominator);
    }
    Ok((value - background) / den)
}

/// `β̃ = α(γ̃) + α(−1)` with `γ̃ = (μ − μ₀)/(μ + μ₀)`.
pub fn beta_tilde(mesh: &TriangleMesh, mu: Complex64, mu0: Complex64) -> Result<Matrix3<f64>, EmError> {
    let gamma = real_contrast(gamma_contrast(mu, mu0)?)?;
    let beta = magnetic_polarizability(mesh)?.entries;
    let alpha = if gamma == -1.0 {
        beta
    } else {
        electric_polarizability(mesh, gamma)?.entries
    };
    Ok(alpha + beta)
}

fn real_action(m: &Matrix3<f64>, v: &CVec3) -> CVec3 {
    m.map(Complex64::from) * v
}

/// Scattered far-field contribution of one body for observation direction
/// `θ′`:
///
/// ```text
/// E = k²V/4π · (αE − θ′(θ′·αE) − μ₀^{3/2} ε₀^{−1/2} θ′×β̃H)
/// H = k²V/4π · ((ε₀/μ₀)^{1/2} θ′×αE + μ₀(β̃H − θ′(θ′·β̃H)))
/// ```
pub fn apply_scattering_matrix(body: &EMBody, direction: &Vec3, incident: &EMField6, k: f64) -> Result<EMField6, EmError> {
    let t = unit(direction)?.map(Complex64::from);
    let Medium { eps0, mu0 } = body.medium;
    let ae = real_action(&body.alpha, &incident.e);
    let bh = real_action(&body.beta_tilde, &incident.h);
    let pref = k * k * body.volume / (4.0 * PI);
    let e = ae - t * t.dot(&ae) - t.cross(&bh) * (mu0.powf(1.5) / eps0.sqrt());
    let h = t.cross(&ae) * (eps0 / mu0).sqrt() + (bh - t * t.dot(&bh)) * mu0;
    Ok(EMField6 { e, h }.scale(Complex64::from(pref)))
}

/// `Σ_m S_m U_m e^{−ik θ′·x_m}`, with `U_m` the field driving body `m`.
pub fn em_amplitude(bodies: &[EMBody], fields: &[EMField6], direction: &Vec3, k: f64) -> Result<EMField6, EmError> {
    if bodies.len() != fields.len() {
        return Err(EmError::LengthMismatch {
            bodies: bodies.len(),
            fields: fields.len(),
        });
    }
    let d = unit(direction)?;
    bodies.iter().zip(fields).try_fold(EMField6::zero(), |acc, (b, u)| {
        let phase = (-I * k * d.dot(&b.position)).exp();
        Ok(acc + apply_scattering_matrix(b, &d, u, k)?.scale(phase))
    })
}

/// Incident plane wave `(E₀, H₀) e^{ik θ·x}` with `H₀ = (ε₀/μ₀)^{1/2} θ×E₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmPlaneWave {
    direction: Vec3,
    polarization: CVec3,
    k: f64,
    medium: Medium,
}

impl EmPlaneWave {
    pub fn new(direction: Vec3, polarization: CVec3, k: f64, medium: Medium) -> Result<Self, EmError> {
        let direction = unit(&direction)?;
        let t = direction.map(Complex64::from);
        if t.dot(&polarization).norm() > 1e-12 * polarization.norm().max(1.0) {
            return Err(EmError::NotTransverse);
        }
        Ok(Self {
            direction,
            polarization,
            k,
            medium,
        })
    }

    pub fn direction(&self) -> Vec3 {
        self.direction
    }

    pub fn polarization(&self) -> CVec3 {
        self.polarization
    }

    pub fn at(&self, x: &Vec3) -> EMField6 {
        let t = self.direction.map(Complex64::from);
        let h = t.cross(&self.polarization) * (self.medium.eps0 / self.medium.mu0).sqrt();
        EMField6 {
            e: self.polarization,
            h,
        }
        .scale((I * self.k * self.direction.dot(x)).exp())
    }
}
