use std::f64::consts::PI;

use crate::mesh::Vec3;

use super::schema::GridSpec;

/// Far-field observation directions.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldGrid {
    pub directions: Vec<Vec3>,
}

impl FarFieldGrid {
    /// The 26 directions toward the faces, edges and corners of a cube.
    pub fn cube26() -> Self {
        let mut directions = Vec::with_capacity(26);
        for x in -1..=1 {
            for y in -1..=1 {
                for z in -1..=1 {
                    if (x, y, z) != (0, 0, 0) {
                        directions.push(Vec3::new(x as f64, y as f64, z as f64).normalize());
                    }
                }
            }
        }
        Self { directions }
    }

    /// Cell-centred polar angles `θ_i = (i + ½)π/n_θ` times equally spaced
    /// azimuths `φ_j = 2πj/n_φ`.
    pub fn lat_long(n_theta: usize, n_phi: usize) -> Self {
        let mut directions = Vec::with_capacity(n_theta * n_phi);
        for i in 0..n_theta {
            let theta = (i as f64 + 0.5) * PI / n_theta as f64;
            for j in 0..n_phi {
                let phi = 2.0 * PI * j as f64 / n_phi as f64;
                directions.push(Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()));
            }
        }
        Self { directions }
    }

    pub fn from_spec(spec: &GridSpec) -> Self {
        match spec {
            GridSpec::Default => Self::cube26(),
            GridSpec::LatLong { n_theta, n_phi } => Self::lat_long(*n_theta, *n_phi),
        }
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }
}
