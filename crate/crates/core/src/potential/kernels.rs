//! Closed-form integrals of the Newtonian kernel over a flat triangle, and
//! Gauss rules for the smooth remainder.

use crate::mesh::{Panel, Vec3};

/// Symmetric triangle quadrature rule in barycentric coordinates; weights sum
/// to one and are multiplied by the panel area at the call site.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    pub fn centroid() -> Self {
        Self {
            points: vec![[1.0 / 3.0; 3]],
            weights: vec![1.0],
        }
    }

    /// Three interior points, exact for quadratics.
    pub fn degree2() -> Self {
        let (a, b) = (2.0 / 3.0, 1.0 / 6.0);
        Self {
            points: vec![[a, b, b], [b, a, b], [b, b, a]],
            weights: vec![1.0 / 3.0; 3],
        }
    }

    /// Seven-point rule exact for quintics.
    pub fn degree5() -> Self {
        let s = 15f64.sqrt();
        let (a1, b1) = ((9.0 - 2.0 * s) / 21.0, (6.0 + s) / 21.0);
        let (a2, b2) = ((9.0 + 2.0 * s) / 21.0, (6.0 - s) / 21.0);
        let (w1, w2) = ((155.0 + s) / 1200.0, (155.0 - s) / 1200.0);
        Self {
            points: vec![
                [1.0 / 3.0; 3],
                [a1, b1, b1],
                [b1, a1, b1],
                [b1, b1, a1],
                [a2, b2, b2],
                [b2, a2, b2],
                [b2, b2, a2],
            ],
            weights: vec![9.0 / 40.0, w1, w1, w1, w2, w2, w2],
        }
    }

    /// Physical points and area-scaled weights on a panel.
    pub fn nodes<'a>(&'a self, panel: &'a Panel) -> impl Iterator<Item = (Vec3, f64)> + 'a {
        self.points
            .iter()
            .zip(&self.weights)
            .map(move |(b, w)| (panel.point(*b), w * panel.area))
    }
}

struct Edge {
    /// In-plane unit normal pointing out of the triangle.
    outward: Vec3,
    /// Signed distance from the projected observation point to the edge
    /// line; positive on the interior side.
    offset: f64,
    /// `ln((R+ + s+) / (R- + s-))`, the integral of 1/R along the edge.
    log_term: f64,
    s_minus: f64,
    s_plus: f64,
    r_minus: f64,
    r_plus: f64,
}

/// `R + s` for a point at distance `r` from an edge endpoint with axial
/// coordinate `s` and squared distance `perp2` from the edge line; avoids the
/// cancellation when `s ≈ -R`.
#[inline]
fn r_plus_s(r: f64, s: f64, perp2: f64) -> f64 {
    if s > 0.0 {
        r + s
    } else {
        perp2 / (r - s)
    }
}

fn edges(p: &Vec3, panel: &Panel, h: f64) -> [Option<Edge>; 3] {
    let scale2 = panel.area;
    std::array::from_fn(|k| {
        let a = panel.vertices[k];
        let b = panel.vertices[(k + 1) % 3];
        let along = (b - a).normalize();
        let outward = along.cross(&panel.normal);
        let offset = (a - p).dot(&outward);
        let perp2 = offset * offset + h * h;
        // Observation point on the edge line: the edge contributes nothing.
        if perp2 <= 1e-24 * scale2 {
            return None;
        }
        let s_minus = (a - p).dot(&along);
        let s_plus = (b - p).dot(&along);
        let r_minus = (a - p).norm();
        let r_plus = (b - p).norm();
        let log_term = (r_plus_s(r_plus, s_plus, perp2) / r_plus_s(r_minus, s_minus, perp2)).ln();
        Some(Edge {
            outward,
            offset,
            log_term,
            s_minus,
            s_plus,
            r_minus,
            r_plus,
        })
    })
}

/// ∫_T 1/|p − t| dt, exact for any observation point `p`.
pub fn triangle_potential(p: &Vec3, panel: &Panel) -> f64 {
    let h = (p - panel.vertices[0]).dot(&panel.normal);
    let habs = h.abs();
    let mut total = 0.0;
    for e in edges(p, panel, h).into_iter().flatten() {
        total += e.offset * e.log_term;
        if habs > 0.0 {
            let r02 = e.offset * e.offset + h * h;
            total -= habs
                * ((e.offset * e.s_plus).atan2(r02 + habs * e.r_plus)
                    - (e.offset * e.s_minus).atan2(r02 + habs * e.r_minus));
        }
    }
    total
}

/// Signed solid angle ∫_T (t − p)·n / |t − p|³ dt subtended by the panel at
/// `p`; positive when the panel normal points away from `p`.
pub fn solid_angle(p: &Vec3, panel: &Panel) -> f64 {
    let r1 = panel.vertices[0] - p;
    let r2 = panel.vertices[1] - p;
    let r3 = panel.vertices[2] - p;
    let (l1, l2, l3) = (r1.norm(), r2.norm(), r3.norm());
    let num = r1.dot(&r2.cross(&r3));
    let den = l1 * l2 * l3 + r1.dot(&r2) * l3 + r1.dot(&r3) * l2 + r2.dot(&r3) * l1;
    2.0 * num.atan2(den)
}

/// ∫_T (t − p) / |t − p|³ dt, the gradient of [`triangle_potential`] with
/// respect to `p`. Undefined for `p` on the panel itself.
pub fn triangle_field(p: &Vec3, panel: &Panel) -> Vec3 {
    let h = (p - panel.vertices[0]).dot(&panel.normal);
    let mut v = panel.normal * solid_angle(p, panel);
    for e in edges(p, panel, h).into_iter().flatten() {
        v -= e.outward * e.log_term;
    }
    v
}

/// ∫_{T_a} ∫_{T_b} 1/|s − t| ds dt.
///
/// Well-separated pairs use tensor Gauss rules of increasing order as the
/// pair approaches; touching and coincident pairs integrate the inner panel
/// in closed form and the outer panel on a refined Gauss grid.
pub fn single_layer_pair(a: &Panel, b: &Panel, rules: &PairRules) -> f64 {
    let dist2 = (a.centroid - b.centroid).norm_squared();
    let size = a.radius + b.radius;
    if dist2 > 100.0 * size * size {
        return a.area * b.area / dist2.sqrt();
    }
    let dist = dist2.sqrt();
    if dist > 4.0 * size {
        let mut sum = 0.0;
        for (x, wx) in rules.low.nodes(a) {
            for (y, wy) in rules.low.nodes(b) {
                sum += wx * wy / (x - y).norm();
            }
        }
        sum
    } else if dist > 1.5 * size {
        rules.high.nodes(a).map(|(x, w)| w * triangle_potential(&x, b)).sum()
    } else if shares_vertex(a, b) {
        extrapolated_outer(a, b, &rules.high)
    } else {
        refined_outer(a, b, 1, &rules.high)
    }
}

fn shares_vertex(a: &Panel, b: &Panel) -> bool {
    let tol = 1e-12 * (a.radius + b.radius);
    a.vertices
        .iter()
        .any(|u| b.vertices.iter().any(|v| (u - v).norm() <= tol))
}

/// Outer integral of the closed-form inner potential over a uniformly
/// refined outer panel.
fn refined_outer(outer: &Panel, inner: &Panel, level: u32, rule: &TriangleRule) -> f64 {
    if level == 0 {
        return rule.nodes(outer).map(|(x, w)| w * triangle_potential(&x, inner)).sum();
    }
    outer
        .subdivide()
        .iter()
        .map(|child| refined_outer(child, inner, level - 1, rule))
        .sum()
}

/// Touching and coincident panels: the inner potential has a logarithmic
/// gradient singularity on the shared edges, and uniform refinement of the
/// outer panel converges as `c₁ 4⁻ᴸ + c₂ 8⁻ᴸ + …`. Two Richardson steps over
/// levels 1–3 remove both leading terms.
fn extrapolated_outer(outer: &Panel, inner: &Panel, rule: &TriangleRule) -> f64 {
    let [i1, i2, i3] = [1, 2, 3].map(|l| refined_outer(outer, inner, l, rule));
    let r12 = (4.0 * i2 - i1) / 3.0;
    let r23 = (4.0 * i3 - i2) / 3.0;
    (8.0 * r23 - r12) / 7.0
}

#[derive(Debug, Clone)]
pub struct PairRules {
    pub low: TriangleRule,
    pub high: TriangleRule,
}

impl Default for PairRules {
    fn default() -> Self {
        Self {
            low: TriangleRule::degree2(),
            high: TriangleRule::degree5(),
        }
    }
}
