use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{green, unit, AcousticError, CoupledSystem, PlaneWave, Scene, SolveInfo, SolveMethod, I};
use crate::mesh::Vec3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeSolution {
    /// Total charge `Q_m` of each body.
    pub charges: Vec<Complex64>,
    pub info: SolveInfo,
}

fn effective_capacitances(scene: &Scene) -> Result<Vec<Complex64>, AcousticError> {
    scene
        .scatterers()
        .iter()
        .enumerate()
        .map(|(m, s)| s.effective_capacitance(m))
        .collect()
}

/// `(I + B) Q = −c` with `B_mj = C_m g(x_m, x_j)` off the diagonal and
/// `c_m = C_m u₀(x_m)`; impedance bodies use their effective capacitance.
pub fn assemble_dirichlet(scene: &Scene, wave: &PlaneWave) -> Result<CoupledSystem, AcousticError> {
    scene.check_assembly(wave)?;
    let caps = effective_capacitances(scene)?;
    let points: Vec<Vec3> = scene.scatterers().iter().map(|s| s.reference_point).collect();
    let n = points.len();
    let k = scene.wavenumber();
    let coupling = DMatrix::from_fn(n, n, |m, j| {
        if m == j {
            Complex64::new(0.0, 0.0)
        } else {
            caps[m] * green(&points[m], &points[j], k)
        }
    });
    let rhs = DVector::from_fn(n, |m, _| -caps[m] * wave.value(&points[m]));
    Ok(CoupledSystem { coupling, rhs })
}

/// `μ = max_m Σ_{j≠m} |C_m| / (4π|x_m − x_j|)`; values below one guarantee
/// a contracting fixed-point iteration.
pub fn diagonal_dominance_margin(scene: &Scene) -> Result<f64, AcousticError> {
    let caps = effective_capacitances(scene)?;
    let points: Vec<Vec3> = scene.scatterers().iter().map(|s| s.reference_point).collect();
    Ok(points
        .iter()
        .enumerate()
        .map(|(m, xm)| {
            points
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != m)
                .map(|(_, xj)| caps[m].norm() / (4.0 * PI * (xm - xj).norm()))
                .sum::<f64>()
        })
        .fold(0.0, f64::max))
}

pub fn solve_charges(system: &CoupledSystem, method: SolveMethod) -> Result<ChargeSolution, AcousticError> {
    let (q, info) = system.solve(method)?;
    Ok(ChargeSolution {
        charges: q.iter().copied().collect(),
        info,
    })
}

/// `Σ_m g(x, x_m) Q_m`, the scattered part of the field.
pub fn scattered_dirichlet(solution: &ChargeSolution, scene: &Scene, x: &Vec3) -> Complex64 {
    let k = scene.wavenumber();
    scene
        .scatterers()
        .iter()
        .zip(&solution.charges)
        .map(|(s, q)| green(x, &s.reference_point, k) * q)
        .sum()
}

/// Total field `u₀(x) + Σ_m g(x, x_m) Q_m`. Points inside a body's bounding
/// sphere are rejected; use [`Scene::is_near_field`] to flag points where
/// the approximation is coarse.
pub fn field_dirichlet(
    solution: &ChargeSolution,
    scene: &Scene,
    wave: &PlaneWave,
    x: &Vec3,
) -> Result<Complex64, AcousticError> {
    scene.check_outside(x)?;
    Ok(wave.value(x) + scattered_dirichlet(solution, scene, x))
}

/// `A(α′, α) = Σ_m Q_m e^{−ik α′·x_m} / 4π`.
pub fn amplitude_dirichlet(
    solution: &ChargeSolution,
    scene: &Scene,
    direction: &Vec3,
) -> Result<Complex64, AcousticError> {
    let d = unit(direction)?;
    let k = scene.wavenumber();
    Ok(scene
        .scatterers()
        .iter()
        .zip(&solution.charges)
        .map(|(s, q)| q * (-I * k * d.dot(&s.reference_point)).exp())
        .sum::<Complex64>()
        / (4.0 * PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acoustic::{BoundaryCondition, Scatterer};

    fn sphere_at(x: Vec3, c: f64) -> Scatterer {
        Scatterer::point(x, 2.0, BoundaryCondition::Dirichlet).with_capacitance(c)
    }

    fn wave(k: f64) -> PlaneWave {
        PlaneWave::new(Vec3::new(0.3, -0.4, 0.866), k).unwrap()
    }

    #[test]
    fn single_body_closed_form() {
        let x = Vec3::new(0.5, 1.5, -2.0);
        let scene = Scene::new(vec![sphere_at(x, 4.0 * PI)], 0.7).unwrap();
        let w = wave(0.7);
        let sys = assemble_dirichlet(&scene, &w).unwrap();
        assert_eq!(sys.coupling[(0, 0)], Complex64::new(0.0, 0.0));
        let sol = solve_charges(&sys, SolveMethod::Direct).unwrap();
        assert_eq!(sol.charges[0], -4.0 * PI * w.value(&x));
        assert_eq!(diagonal_dominance_margin(&scene).unwrap(), 0.0);
    }

    #[test]
    fn pair_coupling_and_margin() {
        let c = 4.0 * PI;
        let scene = Scene::new(vec![sphere_at(Vec3::zeros(), c), sphere_at(Vec3::new(10.0, 0.0, 0.0), c)], 0.3).unwrap();
        let sys = assemble_dirichlet(&scene, &wave(0.3)).unwrap();
        let expected = c * (I * 3.0).exp() / (40.0 * PI);
        assert!((sys.coupling[(0, 1)] - expected).norm() < 1e-15);
        assert_eq!(sys.coupling[(0, 1)], sys.coupling[(1, 0)]);
        assert!((diagonal_dominance_margin(&scene).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn overlapping_scene_is_rejected_unless_allowed() {
        let c = 4.0 * PI;
        let scene = Scene::new(vec![sphere_at(Vec3::zeros(), c), sphere_at(Vec3::new(0.5, 0.0, 0.0), c)], 0.3).unwrap();
        assert_eq!(assemble_dirichlet(&scene, &wave(0.3)), Err(AcousticError::Overlap(0, 1)));
        assert!((diagonal_dominance_margin(&scene).unwrap() - 2.0).abs() < 1e-12);
        assert!(assemble_dirichlet(&scene.with_overlap_allowed(), &wave(0.3)).is_ok());
    }

    #[test]
    fn mirror_symmetric_pair_has_equal_charges() {
        let c = 4.0 * PI;
        let scene = Scene::new(
            vec![sphere_at(Vec3::new(-3.0, 0.0, 0.0), c), sphere_at(Vec3::new(3.0, 0.0, 0.0), c)],
            0.4,
        )
        .unwrap();
        let w = PlaneWave::new(Vec3::new(0.0, 0.6, 0.8), 0.4).unwrap();
        let sol = solve_charges(&assemble_dirichlet(&scene, &w).unwrap(), SolveMethod::Direct).unwrap();
        assert!((sol.charges[0] - sol.charges[1]).norm() < 1e-12);
    }

    #[test]
    fn zero_charges_leave_incident_field() {
        let scene = Scene::new(vec![sphere_at(Vec3::zeros(), 1.0)], 1.0).unwrap();
        let w = wave(1.0);
        let sol = ChargeSolution {
            charges: vec![Complex64::new(0.0, 0.0)],
            info: SolveInfo {
                method: SolveMethod::Direct,
                iterations: 0,
                residual: 0.0,
                observed_rate: None,
            },
        };
        let x = Vec3::new(3.0, 1.0, 0.0);
        assert_eq!(field_dirichlet(&sol, &scene, &w, &x).unwrap(), w.value(&x));
        assert_eq!(field_dirichlet(&sol, &scene, &w, &Vec3::new(0.5, 0.0, 0.0)), Err(AcousticError::InsideBody(0)));
    }

    #[test]
    fn impedance_body_uses_effective_capacitance() {
        let c = 4.0 * PI;
        let area = 4.0 * PI;
        let body = Scatterer::point(Vec3::zeros(), 2.0, BoundaryCondition::Impedance(Complex64::new(1.0, 0.0)))
            .with_capacitance(c)
            .with_area(area);
        let scene = Scene::new(vec![body], 1.0).unwrap();
        let sol = solve_charges(&assemble_dirichlet(&scene, &wave(1.0)).unwrap(), SolveMethod::Direct).unwrap();
        assert!((sol.charges[0] + Complex64::new(c / 2.0, 0.0)).norm() < 1e-12);
    }
}
