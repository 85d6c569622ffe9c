//! Electrostatic shape constants of a closed surface.
//!
//! Densities are piecewise constant on the mesh triangles. The single-layer
//! kernel `1/r` is integrated in Galerkin form (both panels integrated), the
//! normal-derivative kernels are collocated at panel centroids and evaluated
//! in closed form. Capacitances use the rationalized convention in which a
//! sphere of radius `a` has capacitance `4πa`.

pub mod kernels;

use std::f64::consts::PI;

use nalgebra::{Matrix3, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::linalg::{gmres, DenseMatrix};
use crate::mesh::{summarize, GeometrySummary, Panel, TriangleMesh};
use kernels::{single_layer_pair, solid_angle, triangle_field, PairRules};

/// Highest supported order of the capacitance series.
pub const MAX_CAPACITANCE_ORDER: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("capacitance order {0} exceeds the supported maximum {MAX_CAPACITANCE_ORDER}")]
    OrderTooHigh(usize),
    #[error("contrast γ = {0} outside [-1, 1]")]
    ContrastOutOfRange(f64),
    #[error("complex contrast {0} is not supported; polarizability tensors are real")]
    ComplexContrast(Complex64),
    #[error("impedance ζ = 0 is a degenerate boundary condition")]
    ZeroImpedance,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(
        "integral equation not solved: relative residual {residual:e} after {iterations} \
         iterations (condition estimate {condition_estimate:e})"
    )]
    Singular {
        residual: f64,
        iterations: usize,
        condition_estimate: f64,
    },
}

const ROW_BLOCKS: usize = 64;

/// `J = ∫_S ∫_S ds dt / |s − t|`.
pub fn inverse_distance_double_integral(mesh: &TriangleMesh) -> f64 {
    single_layer_row_sums(&mesh.panels()).iter().sum()
}

/// Row sums `Σ_j ∫_{T_i}∫_{T_j} 1/|s − t|` of the Galerkin single-layer
/// matrix. Each pair is integrated once, so the implied matrix is exactly
/// symmetric.
pub fn single_layer_row_sums(panels: &[Panel]) -> Vec<f64> {
    let n = panels.len();
    let rules = PairRules::default();
    let row = |i: usize, acc: &mut Vec<f64>| {
        let a = &panels[i];
        acc[i] += single_layer_pair(a, a, &rules);
        for (j, b) in panels.iter().enumerate().skip(i + 1) {
            let v = single_layer_pair(a, b, &rules);
            acc[i] += v;
            acc[j] += v;
        }
    };
    // Fixed blocks summed in order keep the result independent of the
    // thread count.
    let blocks: Vec<std::ops::Range<usize>> = (0..ROW_BLOCKS)
        .map(|b| b * n / ROW_BLOCKS..(b + 1) * n / ROW_BLOCKS)
        .collect();
    let block_sums = |range: &std::ops::Range<usize>| {
        let mut acc = vec![0.0; n];
        range.clone().for_each(|i| row(i, &mut acc));
        acc
    };
    #[cfg(feature = "parallel")]
    let partial: Vec<Vec<f64>> = blocks.par_iter().map(block_sums).collect();
    #[cfg(not(feature = "parallel"))]
    let partial: Vec<Vec<f64>> = blocks.iter().map(block_sums).collect();
    let mut total = vec![0.0; n];
    for p in &partial {
        total.iter_mut().zip(p).for_each(|(t, v)| *t += v);
    }
    total
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacitanceResult {
    pub order: usize,
    pub value: f64,
    /// `C⁽⁰⁾ … C⁽ⁿ⁾`.
    pub series: Vec<f64>,
    /// `|C⁽ⁿ⁾ − C⁽ⁿ⁻¹⁾| / |C⁽ⁿ⁻¹⁾ − C⁽ⁿ⁻²⁾|`, available from order 2.
    pub estimated_ratio: Option<f64>,
    /// Set when successive corrections grow at two consecutive orders.
    pub diverging: bool,
    pub area: f64,
    /// The double integral `J` used for `C⁽⁰⁾`.
    pub inverse_distance_integral: f64,
}

/// Adjoint double-layer matrix `P[i][j] = ∫_{T_j} ∂/∂N_{c_i} (1/|c_i − t|) dt`.
///
/// The flat-panel self term is a principal value of zero; the diagonal is
/// instead chosen so that `Σ_i |T_i| P[i][j] = −2π |T_j|`, the discrete form
/// of `∫_S ∂/∂N_s (1/|s − t|) ds = −2π`.
fn adjoint_double_layer(panels: &[Panel]) -> DenseMatrix {
    let n = panels.len();
    let mut p = DenseMatrix::from_rows(n, |i, row| {
        let (c, normal) = (panels[i].centroid, panels[i].normal);
        for (j, panel) in panels.iter().enumerate() {
            row[j] = if i == j { 0.0 } else { normal.dot(&triangle_field(&c, panel)) };
        }
    });
    let mut column = vec![0.0; n];
    for (i, pi) in panels.iter().enumerate() {
        for (j, cj) in column.iter_mut().enumerate() {
            *cj += pi.area * p.get(i, j);
        }
    }
    for (j, pj) in panels.iter().enumerate() {
        p.set(j, j, (-2.0 * PI * pj.area - column[j]) / pj.area);
    }
    p
}

/// Capacitance series `C⁽⁰⁾ … C⁽ⁿ⁾`.
///
/// With `σ₀ = 1` and `σ_{k+1} = −(1/2π) Ψ σ_k` (Ψ the adjoint double-layer
/// operator), `C⁽ᵏ⁾ = 4π|S|² / ∫∫ σ_k(t) / |s − t| ds dt`. Order zero is
/// `4π|S|²/J`.
pub fn capacitance(mesh: &TriangleMesh, order: usize) -> Result<CapacitanceResult, PotentialError> {
    if order > MAX_CAPACITANCE_ORDER {
        return Err(PotentialError::OrderTooHigh(order));
    }
    let panels = mesh.panels();
    let area: f64 = panels.iter().map(|p| p.area).sum();
    let weights = single_layer_row_sums(&panels);
    let j_integral: f64 = weights.iter().sum();
    let numerator = 4.0 * PI * area * area;
    let mut series = vec![numerator / j_integral];
    if order > 0 {
        let psi = adjoint_double_layer(&panels);
        let mut density = vec![1.0; panels.len()];
        let mut next = vec![0.0; panels.len()];
        for _ in 0..order {
            psi.apply(&density, &mut next);
            density.iter_mut().zip(&next).for_each(|(d, v)| *d = -v / (2.0 * PI));
            let energy: f64 = weights.iter().zip(&density).map(|(w, d)| w * d).sum();
            series.push(numerator / energy);
        }
    }
    let diffs: Vec<f64> = series.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let estimated_ratio = (diffs.len() >= 2).then(|| diffs[diffs.len() - 1] / diffs[diffs.len() - 2]);
    let diverging = diffs.windows(3).any(|w| w[1] > w[0] && w[2] > w[1]);
    Ok(CapacitanceResult {
        order,
        value: *series.last().expect("series has order zero"),
        series,
        estimated_ratio,
        diverging,
        area,
        inverse_distance_integral: j_integral,
    })
}

/// Effective capacitance of a body with impedance condition `u_N = ζ u`:
/// `C / (1 + C / (ζ |S|))`.
pub fn impedance_capacitance(capacitance: f64, zeta: Complex64, area: f64) -> Result<Complex64, PotentialError> {
    if !(capacitance > 0.0) || !(area > 0.0) {
        return Err(PotentialError::InvalidArgument(format!(
            "capacitance and area must be positive (got C = {capacitance}, |S| = {area})"
        )));
    }
    if zeta == Complex64::new(0.0, 0.0) {
        return Err(PotentialError::ZeroImpedance);
    }
    let c = Complex64::from(capacitance);
    Ok(c / (1.0 + c / (zeta * area)))
}

/// Piecewise-constant surface density, one value per triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceDensity(pub Vec<f64>);

impl SurfaceDensity {
    pub fn total(&self, panels: &[Panel]) -> f64 {
        self.0.iter().zip(panels).map(|(s, p)| s * p.area).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TensorKind {
    Electric { gamma: f64 },
    Magnetic,
}

/// Polarizability per unit volume, `V T_pq = ∫_S (s_p − x̄_p) σ⁽q⁾(s) ds`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizabilityTensor {
    pub entries: Matrix3<f64>,
    pub kind: TensorKind,
}

impl PolarizabilityTensor {
    pub fn zero(kind: TensorKind) -> Self {
        Self {
            entries: Matrix3::zeros(),
            kind,
        }
    }

    /// `max |T_pq − T_qp| / max |T_pq|`.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.entries.amax();
        if scale == 0.0 {
            return 0.0;
        }
        (self.entries - self.entries.transpose()).amax() / scale
    }

    pub fn eigenvalues(&self) -> [f64; 3] {
        let sym = (self.entries + self.entries.transpose()) * 0.5;
        let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        [ev[0], ev[1], ev[2]]
    }
}

/// Collocated double-layer operator
/// `(Aσ)(c_i) = ∫_S ∂/∂N_t (1/(2π|c_i − t|)) σ(t) dt`, with `A·1 = −1` imposed
/// row by row through the diagonal.
#[derive(Debug, Clone)]
pub struct DoubleLayerOperator {
    matrix: DenseMatrix,
    panels: Vec<Panel>,
    geometry: GeometrySummary,
}

pub fn double_layer_operator(mesh: &TriangleMesh) -> DoubleLayerOperator {
    DoubleLayerOperator::assemble(mesh)
}

impl DoubleLayerOperator {
    pub fn assemble(mesh: &TriangleMesh) -> Self {
        let panels = mesh.panels();
        let matrix = DenseMatrix::from_rows(panels.len(), |i, row| {
            let c = panels[i].centroid;
            let mut off = 0.0;
            for (j, panel) in panels.iter().enumerate() {
                if i != j {
                    // ∂/∂N_t (1/r) integrated over a flat panel is minus its
                    // solid angle.
                    row[j] = -solid_angle(&c, panel) / (2.0 * PI);
                    off += row[j];
                }
            }
            row[i] = -1.0 - off;
        });
        Self {
            matrix,
            panels,
            geometry: summarize(mesh),
        }
    }

    pub fn dim(&self) -> usize {
        self.panels.len()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn panels(&self) -> &[Panel] {
        &self.panels
    }

    pub fn geometry(&self) -> &GeometrySummary {
        &self.geometry
    }

    pub fn apply(&self, density: &SurfaceDensity) -> SurfaceDensity {
        let mut out = vec![0.0; self.dim()];
        self.matrix.apply(&density.0, &mut out);
        SurfaceDensity(out)
    }

    /// Solves `(I + γA) σ = 2γ N_q` for the normal component `q`.
    pub fn solve_density(&self, gamma: f64, q: usize) -> Result<SurfaceDensity, PotentialError> {
        let rhs: Vec<f64> = self.panels.iter().map(|p| 2.0 * gamma * p.normal[q]).collect();
        let n = self.dim();
        let apply = |x: &[f64], y: &mut [f64]| {
            self.matrix.apply(x, y);
            for k in 0..n {
                y[k] = x[k] + gamma * y[k];
            }
        };
        let out = gmres(apply, &rhs, 1e-12, 60, 600);
        if !out.converged && out.relative_residual > 1e-9 {
            return Err(PotentialError::Singular {
                residual: out.relative_residual,
                iterations: out.iterations,
                condition_estimate: out.condition_estimate,
            });
        }
        Ok(SurfaceDensity(out.solution))
    }

    /// `α(γ)`: the three densities for `q = x, y, z` contracted with the
    /// moment arm measured from the volume centroid and divided by the volume.
    pub fn polarizability(&self, gamma: f64) -> Result<PolarizabilityTensor, PotentialError> {
        if !(-1.0..=1.0).contains(&gamma) {
            return Err(PotentialError::ContrastOutOfRange(gamma));
        }
        let kind = TensorKind::Electric { gamma };
        if gamma == 0.0 {
            return Ok(PolarizabilityTensor::zero(kind));
        }
        let centroid = self.geometry.centroid;
        let mut entries = Matrix3::zeros();
        for q in 0..3 {
            let sigma = self.solve_density(gamma, q)?;
            for (panel, s) in self.panels.iter().zip(&sigma.0) {
                let arm = panel.centroid - centroid;
                for p in 0..3 {
                    entries[(p, q)] += arm[p] * s * panel.area;
                }
            }
        }
        Ok(PolarizabilityTensor {
            entries: entries / self.geometry.volume,
            kind,
        })
    }

    /// `β = α(−1)`, from `σ = Aσ − 2N_q`.
    pub fn magnetic_polarizability(&self) -> Result<PolarizabilityTensor, PotentialError> {
        let alpha = self.polarizability(-1.0)?;
        Ok(PolarizabilityTensor {
            entries: alpha.entries,
            kind: TensorKind::Magnetic,
        })
    }
}

pub fn magnetic_polarizability(mesh: &TriangleMesh) -> Result<PolarizabilityTensor, PotentialError> {
    DoubleLayerOperator::assemble(mesh).magnetic_polarizability()
}

pub fn electric_polarizability(mesh: &TriangleMesh, gamma: f64) -> Result<PolarizabilityTensor, PotentialError> {
    if !(-1.0..=1.0).contains(&gamma) {
        return Err(PotentialError::ContrastOutOfRange(gamma));
    }
    if gamma == 0.0 {
        return Ok(PolarizabilityTensor::zero(TensorKind::Electric { gamma }));
    }
    DoubleLayerOperator::assemble(mesh).polarizability(gamma)
}
