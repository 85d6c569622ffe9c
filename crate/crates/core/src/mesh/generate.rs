use std::collections::HashMap;

use super::{MeshError, TriangleMesh, Vec3};

/// Unit icosphere: icosahedron refined `subdivisions` times, vertices projected
/// onto the unit sphere. Returns 20·4^subdivisions outward-oriented triangles.
fn unit_icosphere(subdivisions: u32) -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ]
    .iter()
    .map(|p| Vec3::from(*p).normalize())
    .collect();

    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::with_capacity(faces.len() * 3 / 2);
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Vec3>| -> usize {
            *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
                vertices.push(((vertices[a] + vertices[b]) * 0.5).normalize());
                vertices.len() - 1
            })
        };
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    (vertices, faces)
}

/// Icosphere of the given radius centred at the origin; every vertex lies
/// exactly on the sphere.
pub fn generate_sphere(radius: f64, subdivisions: u32) -> Result<TriangleMesh, MeshError> {
    generate_ellipsoid([radius; 3], subdivisions)
}

/// Icosphere scaled anisotropically by the three semi-axes (x, y, z).
pub fn generate_ellipsoid(semi_axes: [f64; 3], subdivisions: u32) -> Result<TriangleMesh, MeshError> {
    if semi_axes.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(MeshError::InvalidParameter(format!(
            "semi-axes must be positive and finite, got {semi_axes:?}"
        )));
    }
    if subdivisions > 8 {
        return Err(MeshError::InvalidParameter(format!(
            "subdivisions {subdivisions} exceeds the supported maximum of 8"
        )));
    }
    let (unit, faces) = unit_icosphere(subdivisions);
    let scale = Vec3::from(semi_axes);
    let vertices = unit.into_iter().map(|v| v.component_mul(&scale)).collect();
    TriangleMesh::new(vertices, faces)
}
