//! Multi-body acoustic scattering reduced to small dense linear systems.
//!
//! Dirichlet and impedance bodies carry one unknown each, the total surface
//! charge `Q_m`; Neumann bodies carry four, the Laplacian and gradient of the
//! field that excites them. All bodies are collapsed onto their reference
//! points `x_m`.

mod dirichlet;
mod neumann;
mod system;

pub use dirichlet::{
    amplitude_dirichlet, assemble_dirichlet, diagonal_dominance_margin, field_dirichlet,
    scattered_dirichlet, solve_charges, ChargeSolution,
};
pub use neumann::{
    amplitude_neumann, assemble_neumann, field_neumann, field_neumann_excluding, scattered_neumann,
    solve_neumann, NeumannSolution,
};
pub use system::{CoupledSystem, SolveInfo, SolveMethod};

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mesh::{summarize, MeshError, TriangleMesh, Vec3};
use crate::potential::{self, PotentialError};

pub type CVec3 = Vector3<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AcousticError {
    #[error("scene has no scatterers")]
    EmptyScene,
    #[error("wavenumber must be positive and finite, got {0}")]
    InvalidWavenumber(f64),
    #[error("plane wave wavenumber {wave} differs from the scene wavenumber {scene}")]
    WavenumberMismatch { wave: f64, scene: f64 },
    #[error("direction must be a non-zero finite vector")]
    ZeroDirection,
    #[error("direction {0:?} is not a unit vector")]
    NotUnit([f64; 3]),
    #[error("bodies {0} and {1} share the reference point")]
    CoincidentPoints(usize, usize),
    #[error("bodies {0} and {1} overlap (bounding spheres intersect)")]
    Overlap(usize, usize),
    #[error("mixed boundary conditions unsupported: {0}")]
    MixedConditions(String),
    #[error("body {body}: missing {property}")]
    MissingProperty { body: usize, property: &'static str },
    #[error("point lies inside the bounding sphere of body {0}")]
    InsideBody(usize),
    #[error("singular system matrix")]
    Singular,
    #[error("fixed-point iteration did not converge in {iterations} iterations (margin μ = {margin:.6})")]
    NotConverged { iterations: usize, margin: f64 },
    #[error("solution residual {0:e} exceeds the acceptance threshold")]
    Inaccurate(f64),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error("mesh: {0}")]
    Mesh(String),
}

impl From<MeshError> for AcousticError {
    fn from(e: MeshError) -> Self {
        Self::Mesh(e.to_string())
    }
}

/// `e^{ik|x−y|} / (4π|x−y|)`.
pub fn green(x: &Vec3, y: &Vec3, k: f64) -> Complex64 {
    let r = (x - y).norm();
    (I * k * r).exp() / (4.0 * PI * r)
}

/// Gradient of [`green`] with respect to `x`.
pub fn green_gradient(x: &Vec3, y: &Vec3, k: f64) -> CVec3 {
    let d = x - y;
    let r = d.norm();
    let factor = green(x, y, k) * (I * k - 1.0 / r) / r;
    d.map(|c| factor * c)
}

pub(crate) fn unit(v: &Vec3) -> Result<Vec3, AcousticError> {
    if (v.norm() - 1.0).abs() > 1e-12 {
        return Err(AcousticError::NotUnit([v.x, v.y, v.z]));
    }
    Ok(*v)
}

/// Incident plane wave `u₀(x) = e^{ik α·x}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    direction: Vec3,
    k: f64,
}

impl PlaneWave {
    /// The direction is normalized; it must be non-zero.
    pub fn new(direction: Vec3, k: f64) -> Result<Self, AcousticError> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(AcousticError::InvalidWavenumber(k));
        }
        let n = direction.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(AcousticError::ZeroDirection);
        }
        Ok(Self {
            direction: direction / n,
            k,
        })
    }

    pub fn direction(&self) -> Vec3 {
        self.direction
    }

    pub fn wavenumber(&self) -> f64 {
        self.k
    }

    pub fn value(&self, x: &Vec3) -> Complex64 {
        (I * self.k * self.direction.dot(x)).exp()
    }

    pub fn gradient(&self, x: &Vec3) -> CVec3 {
        let u = self.value(x) * I * self.k;
        self.direction.map(|c| u * c)
    }

    pub fn laplacian(&self, x: &Vec3) -> Complex64 {
        -self.k * self.k * self.value(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    Dirichlet,
    Impedance(Complex64),
    Neumann,
}

/// A small body collapsed onto its reference point, with the shape constants
/// its boundary condition requires.
#[derive(Debug, Clone, PartialEq)]
pub struct Scatterer {
    pub reference_point: Vec3,
    pub diameter: f64,
    pub condition: BoundaryCondition,
    pub area: Option<f64>,
    pub volume: Option<f64>,
    pub capacitance: Option<f64>,
    /// Magnetic polarizability per unit volume.
    pub beta: Option<Matrix3<f64>>,
}

impl Scatterer {
    /// A body given only by its reference point and diameter; shape constants
    /// are attached with the `with_*` builders.
    pub fn point(reference_point: Vec3, diameter: f64, condition: BoundaryCondition) -> Self {
        Self {
            reference_point,
            diameter,
            condition,
            area: None,
            volume: None,
            capacitance: None,
            beta: None,
        }
    }

    pub fn with_capacitance(mut self, c: f64) -> Self {
        self.capacitance = Some(c);
        self
    }

    pub fn with_area(mut self, area: f64) -> Self {
        self.area = Some(area);
        self
    }

    pub fn with_volume(mut self, volume: f64) -> Self {
        self.volume = Some(volume);
        self
    }

    pub fn with_beta(mut self, beta: Matrix3<f64>) -> Self {
        self.beta = Some(beta);
        self
    }

    /// Computes the shape constants needed by `condition` from the mesh. The
    /// reference point is the volume centroid.
    pub fn from_mesh(
        mesh: &TriangleMesh,
        condition: BoundaryCondition,
        capacitance_order: usize,
    ) -> Result<Self, AcousticError> {
        let geometry = summarize(mesh);
        let mut body = Self::point(geometry.centroid, geometry.diameter, condition)
            .with_area(geometry.area)
            .with_volume(geometry.volume);
        match condition {
            BoundaryCondition::Dirichlet | BoundaryCondition::Impedance(_) => {
                body.capacitance = Some(potential::capacitance(mesh, capacitance_order)?.value);
            }
            BoundaryCondition::Neumann => {
                body.beta = Some(potential::magnetic_polarizability(mesh)?.entries);
            }
        }
        Ok(body)
    }

    /// `C_m` for Dirichlet bodies, `C_{mζ}` for impedance bodies.
    pub fn effective_capacitance(&self, index: usize) -> Result<Complex64, AcousticError> {
        let c = self.capacitance.ok_or(AcousticError::MissingProperty {
            body: index,
            property: "capacitance",
        })?;
        match self.condition {
            BoundaryCondition::Dirichlet => Ok(Complex64::from(c)),
            BoundaryCondition::Impedance(zeta) => {
                let area = self.area.ok_or(AcousticError::MissingProperty {
                    body: index,
                    property: "surface area",
                })?;
                Ok(potential::impedance_capacitance(c, zeta, area)?)
            }
            BoundaryCondition::Neumann => Err(AcousticError::MixedConditions(format!(
                "body {index} is Neumann; capacitance systems need Dirichlet or impedance bodies"
            ))),
        }
    }
}

/// Validity diagnostics of the small-body approximation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    /// Largest body diameter.
    pub a: f64,
    /// Smallest distance between reference points; `None` for one body.
    pub d: Option<f64>,
    pub ka: f64,
    pub a_over_d: Option<f64>,
    pub kd: Option<f64>,
    pub warnings: Vec<String>,
}

/// Threshold above which `ka` and `a/d` are reported as outside the
/// small-body regime.
pub const REGIME_THRESHOLD: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    scatterers: Vec<Scatterer>,
    k: f64,
    allow_overlap: bool,
}

impl Scene {
    pub fn new(scatterers: Vec<Scatterer>, k: f64) -> Result<Self, AcousticError> {
        if scatterers.is_empty() {
            return Err(AcousticError::EmptyScene);
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(AcousticError::InvalidWavenumber(k));
        }
        for (i, a) in scatterers.iter().enumerate() {
            for (j, b) in scatterers.iter().enumerate().skip(i + 1) {
                if a.reference_point == b.reference_point {
                    return Err(AcousticError::CoincidentPoints(i, j));
                }
            }
        }
        Ok(Self {
            scatterers,
            k,
            allow_overlap: false,
        })
    }

    pub fn scatterers(&self) -> &[Scatterer] {
        &self.scatterers
    }

    pub fn len(&self) -> usize {
        self.scatterers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scatterers.is_empty()
    }

    pub fn wavenumber(&self) -> f64 {
        self.k
    }

    /// Lets assembly proceed on scenes whose bounding spheres intersect,
    /// for deliberate studies outside the small-body regime.
    pub fn with_overlap_allowed(mut self) -> Self {
        self.allow_overlap = true;
        self
    }

    /// Bounding-sphere disjointness: `|x_m − x_j| > (diam_m + diam_j) / 2`.
    pub fn check_disjoint(&self) -> Result<(), AcousticError> {
        self.first_overlap()
            .map_or(Ok(()), |(i, j)| Err(AcousticError::Overlap(i, j)))
    }

    pub fn first_overlap(&self) -> Option<(usize, usize)> {
        for (i, a) in self.scatterers.iter().enumerate() {
            for (j, b) in self.scatterers.iter().enumerate().skip(i + 1) {
                if (a.reference_point - b.reference_point).norm() <= 0.5 * (a.diameter + b.diameter) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub(crate) fn check_assembly(&self, wave: &PlaneWave) -> Result<(), AcousticError> {
        self.check_wave(wave)?;
        if !self.allow_overlap {
            self.check_disjoint()?;
        }
        Ok(())
    }

    pub(crate) fn check_wave(&self, wave: &PlaneWave) -> Result<(), AcousticError> {
        if (wave.k - self.k).abs() > 1e-14 * self.k {
            return Err(AcousticError::WavenumberMismatch {
                wave: wave.k,
                scene: self.k,
            });
        }
        Ok(())
    }

    /// `a`, `d`, `ka`, `a/d`, `kd` with warnings for the acoustic regime
    /// (`ka ≪ 1`, `a ≪ d`) and, when `electromagnetic`, for `d ≫ λ`.
    pub fn regime(&self, electromagnetic: bool) -> Regime {
        let a = self.scatterers.iter().map(|s| s.diameter).fold(0.0, f64::max);
        let mut d: Option<f64> = None;
        for (i, p) in self.scatterers.iter().enumerate() {
            for q in &self.scatterers[i + 1..] {
                let r = (p.reference_point - q.reference_point).norm();
                d = Some(d.map_or(r, |d: f64| d.min(r)));
            }
        }
        let ka = self.k * a;
        let a_over_d = d.map(|d| a / d);
        let kd = d.map(|d| self.k * d);
        let mut warnings = Vec::new();
        if ka >= REGIME_THRESHOLD {
            warnings.push(format!("ka = {ka:.4} >= {REGIME_THRESHOLD}: bodies are not small compared with the wavelength"));
        }
        if let Some(r) = a_over_d {
            if r >= REGIME_THRESHOLD {
                warnings.push(format!("a/d = {r:.4} >= {REGIME_THRESHOLD}: bodies are not well separated"));
            }
        }
        if electromagnetic {
            if let Some(kd) = kd {
                if kd < 2.0 * PI {
                    warnings.push(format!(
                        "kd = {kd:.4} < 2π: separation below one wavelength violates d ≫ λ"
                    ));
                }
            }
        }
        Regime {
            a,
            d,
            ka,
            a_over_d,
            kd,
            warnings,
        }
    }

    pub(crate) fn check_outside(&self, x: &Vec3) -> Result<(), AcousticError> {
        for (m, s) in self.scatterers.iter().enumerate() {
            if (x - s.reference_point).norm() <= s.diameter {
                return Err(AcousticError::InsideBody(m));
            }
        }
        Ok(())
    }

    /// True when `x` is closer than five diameters to some body, where the
    /// point-scatterer field is a poor approximation.
    pub fn is_near_field(&self, x: &Vec3) -> bool {
        self.scatterers
            .iter()
            .any(|s| (x - s.reference_point).norm() < 5.0 * s.diameter)
    }
}
