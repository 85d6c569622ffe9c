use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    green, green_gradient, unit, AcousticError, BoundaryCondition, CVec3, CoupledSystem, PlaneWave, Scene,
    SolveInfo, SolveMethod, I,
};
use crate::mesh::Vec3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeumannSolution {
    /// `Δu(x_m)` per body.
    pub laplacians: Vec<Complex64>,
    /// `∇u(x_m)` per body.
    pub gradients: Vec<[Complex64; 3]>,
    pub info: SolveInfo,
}

struct Body {
    x: Vec3,
    volume: f64,
    beta: Matrix3<f64>,
}

fn neumann_bodies(scene: &Scene) -> Result<Vec<Body>, AcousticError> {
    scene
        .scatterers()
        .iter()
        .enumerate()
        .map(|(m, s)| {
            if s.condition != BoundaryCondition::Neumann {
                return Err(AcousticError::MixedConditions(format!(
                    "body {m} is not Neumann; the Neumann system needs every body Neumann"
                )));
            }
            Ok(Body {
                x: s.reference_point,
                volume: s.volume.ok_or(AcousticError::MissingProperty { body: m, property: "volume" })?,
                beta: s.beta.ok_or(AcousticError::MissingProperty {
                    body: m,
                    property: "magnetic polarizability",
                })?,
            })
        })
        .collect()
}

/// `ik βᵀ ê`: weights of the gradient components in the dipole bracket.
fn dipole_weights(beta: &Matrix3<f64>, e: &Vec3, k: f64) -> CVec3 {
    (beta.transpose() * e).map(|c| I * k * c)
}

/// `V [L + ik Σ_pq β_pq ê_p G_q]`.
fn bracket(body: &Body, l: Complex64, g: &CVec3, e: &Vec3, k: f64) -> Complex64 {
    let w = dipole_weights(&body.beta, e, k);
    body.volume * (l + w.dot(g))
}

/// 4M×4M system in the unknowns `(L_1, G_1, …, L_M, G_M)`, with
/// `L_m = Δu(x_m)` and `G_m = ∇u(x_m)`.
pub fn assemble_neumann(scene: &Scene, wave: &PlaneWave) -> Result<CoupledSystem, AcousticError> {
    scene.check_assembly(wave)?;
    let bodies = neumann_bodies(scene)?;
    let n = bodies.len();
    let k = scene.wavenumber();
    let mut coupling = DMatrix::zeros(4 * n, 4 * n);
    for (m, target) in bodies.iter().enumerate() {
        for (j, source) in bodies.iter().enumerate() {
            if m == j {
                continue;
            }
            let d = target.x - source.x;
            let e = d / d.norm();
            let g = green(&target.x, &source.x, k);
            let dg = green_gradient(&target.x, &source.x, k);
            let w = dipole_weights(&source.beta, &e, k);
            let mut coeff = [Complex64::new(source.volume, 0.0); 4];
            for q in 0..3 {
                coeff[q + 1] = source.volume * w[q];
            }
            for (c, v) in coeff.iter().enumerate() {
                coupling[(4 * m, 4 * j + c)] = k * k * g * v;
                for p in 0..3 {
                    coupling[(4 * m + 1 + p, 4 * j + c)] = -dg[p] * v;
                }
            }
        }
    }
    let mut rhs = DVector::zeros(4 * n);
    for (m, body) in bodies.iter().enumerate() {
        rhs[4 * m] = wave.laplacian(&body.x);
        let grad = wave.gradient(&body.x);
        for p in 0..3 {
            rhs[4 * m + 1 + p] = grad[p];
        }
    }
    Ok(CoupledSystem { coupling, rhs })
}

pub fn solve_neumann(system: &CoupledSystem, method: SolveMethod) -> Result<NeumannSolution, AcousticError> {
    let (x, info) = system.solve(method)?;
    let n = x.len() / 4;
    Ok(NeumannSolution {
        laplacians: (0..n).map(|m| x[4 * m]).collect(),
        gradients: (0..n).map(|m| [x[4 * m + 1], x[4 * m + 2], x[4 * m + 3]]).collect(),
        info,
    })
}

fn scattered_terms(
    solution: &NeumannSolution,
    scene: &Scene,
    x: &Vec3,
    exclude: Option<usize>,
) -> Result<Complex64, AcousticError> {
    let bodies = neumann_bodies(scene)?;
    let k = scene.wavenumber();
    Ok(bodies
        .iter()
        .enumerate()
        .filter(|&(m, _)| Some(m) != exclude)
        .map(|(m, body)| {
            let d = x - body.x;
            let e = d / d.norm();
            let g = CVec3::from(solution.gradients[m]);
            green(x, &body.x, k) * bracket(body, solution.laplacians[m], &g, &e, k)
        })
        .sum())
}

/// Scattered part `Σ_m g(x, x_m) V_m [L_m + ik Σ_pq β_pq,m ê_p (G_m)_q]`,
/// `ê = (x − x_m)/|x − x_m|`.
pub fn scattered_neumann(solution: &NeumannSolution, scene: &Scene, x: &Vec3) -> Result<Complex64, AcousticError> {
    scattered_terms(solution, scene, x, None)
}

pub fn field_neumann(
    solution: &NeumannSolution,
    scene: &Scene,
    wave: &PlaneWave,
    x: &Vec3,
) -> Result<Complex64, AcousticError> {
    scene.check_outside(x)?;
    Ok(wave.value(x) + scattered_terms(solution, scene, x, None)?)
}

/// The field with body `m`'s own contribution removed, i.e. the field that
/// excites body `m`. Defined inside body `m` as well.
pub fn field_neumann_excluding(
    solution: &NeumannSolution,
    scene: &Scene,
    wave: &PlaneWave,
    x: &Vec3,
    m: usize,
) -> Result<Complex64, AcousticError> {
    Ok(wave.value(x) + scattered_terms(solution, scene, x, Some(m))?)
}

/// `A = (1/4π) Σ_m V_m e^{−ik α′·x_m} [L_m + ik Σ_pq β_pq,m α′_p (G_m)_q]`.
pub fn amplitude_neumann(
    solution: &NeumannSolution,
    scene: &Scene,
    direction: &Vec3,
) -> Result<Complex64, AcousticError> {
    let d = unit(direction)?;
    let bodies = neumann_bodies(scene)?;
    let k = scene.wavenumber();
    Ok(bodies
        .iter()
        .enumerate()
        .map(|(m, body)| {
            let g = CVec3::from(solution.gradients[m]);
            (-I * k * d.dot(&body.x)).exp() * bracket(body, solution.laplacians[m], &g, &d, k)
        })
        .sum::<Complex64>()
        / (4.0 * PI))
}
