//! Browser bindings: far-field pattern and near-field slice of a line of
//! sound-soft spheres, and the capacitance series of a prolate spheroid.

use std::f64::consts::PI;

use wasm_bindgen::prelude::*;

use smallscatter::acoustic::{
    amplitude_dirichlet, assemble_dirichlet, field_dirichlet, solve_charges, BoundaryCondition, ChargeSolution,
    PlaneWave, Scatterer, Scene, SolveMethod,
};
use smallscatter::mesh::{generate_ellipsoid, generate_sphere};
use smallscatter::potential::capacitance;
use smallscatter::Vec3;

fn err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// `count` spheres of radius `radius` spaced `spacing` apart along x,
/// lit by a plane wave travelling at `incidence` radians from +z toward +x.
fn sphere_line(
    count: usize,
    radius: f64,
    spacing: f64,
    k: f64,
    incidence: f64,
) -> Result<(Scene, PlaneWave, ChargeSolution), JsError> {
    let mesh = generate_sphere(radius, 2).map_err(err)?;
    let c = capacitance(&mesh, 1).map_err(err)?.value;
    let offset = 0.5 * spacing * (count.max(1) - 1) as f64;
    let bodies = (0..count)
        .map(|i| {
            Scatterer::point(
                Vec3::new(i as f64 * spacing - offset, 0.0, 0.0),
                2.0 * radius,
                BoundaryCondition::Dirichlet,
            )
            .with_capacitance(c)
        })
        .collect();
    let scene = Scene::new(bodies, k).map_err(err)?.with_overlap_allowed();
    let wave = PlaneWave::new(Vec3::new(incidence.sin(), 0.0, incidence.cos()), k).map_err(err)?;
    let system = assemble_dirichlet(&scene, &wave).map_err(err)?;
    let sol = solve_charges(&system, SolveMethod::Direct).map_err(err)?;
    Ok((scene, wave, sol))
}

/// `|A|` at `samples` equally spaced angles in the xz-plane, measured from
/// +z toward +x.
#[wasm_bindgen]
pub fn far_field_pattern(
    count: usize,
    radius: f64,
    spacing: f64,
    k: f64,
    incidence: f64,
    samples: usize,
) -> Result<Vec<f64>, JsError> {
    let (scene, _, sol) = sphere_line(count, radius, spacing, k, incidence)?;
    (0..samples)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / samples as f64;
            amplitude_dirichlet(&sol, &scene, &Vec3::new(t.sin(), 0.0, t.cos()))
                .map(|a| a.norm())
                .map_err(err)
        })
        .collect()
}

/// `|u|` on an `n × n` grid covering `[−half, half]²` of the xz-plane, row
/// by row from −z; points inside a body are NaN.
#[wasm_bindgen]
pub fn near_field_slice(
    count: usize,
    radius: f64,
    spacing: f64,
    k: f64,
    incidence: f64,
    half: f64,
    n: usize,
) -> Result<Vec<f64>, JsError> {
    let (scene, wave, sol) = sphere_line(count, radius, spacing, k, incidence)?;
    let step = 2.0 * half / (n.max(2) - 1) as f64;
    let mut out = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            let x = Vec3::new(-half + c as f64 * step, 0.0, -half + r as f64 * step);
            out.push(field_dirichlet(&sol, &scene, &wave, &x).map_or(f64::NAN, |u| u.norm()));
        }
    }
    Ok(out)
}

/// `[C_exact, C⁽⁰⁾, …, C⁽ⁿ⁾]` for the spheroid with semi-axes
/// `(aspect, 1, 1)`, `aspect > 1`.
#[wasm_bindgen]
pub fn spheroid_capacitance(aspect: f64, subdivisions: u32, order: usize) -> Result<Vec<f64>, JsError> {
    if aspect.is_nan() || aspect <= 1.0 {
        return Err(JsError::new("aspect ratio must exceed 1"));
    }
    let mesh = generate_ellipsoid([aspect, 1.0, 1.0], subdivisions).map_err(err)?;
    let result = capacitance(&mesh, order).map_err(err)?;
    let e = (aspect * aspect - 1.0).sqrt();
    let exact = 4.0 * PI * e / aspect.acosh();
    Ok(std::iter::once(exact).chain(result.series).collect())
}
