use std::collections::HashMap;
use std::path::Path;

use nalgebra::Matrix3;
use num_complex::Complex64;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::FarFieldGrid;
use super::schema::{Complex, ConditionKind, Family, OutputSpec, Scenario, ShapeSpec};
use super::ScenarioError;
use crate::acoustic::{
    amplitude_dirichlet, amplitude_neumann, assemble_dirichlet, assemble_neumann, diagonal_dominance_margin,
    field_dirichlet, field_neumann, solve_charges, solve_neumann, BoundaryCondition, PlaneWave, Regime, Scatterer,
    Scene, SolveInfo,
};
use crate::em::{self, EMBody, EMField6, EmPlaneWave, Medium};
use crate::mesh::{generate_ellipsoid, generate_sphere, load_mesh, summarize, MeshFormat, GeometrySummary, TriangleMesh, Vec3};
use crate::potential::{self, CapacitanceResult};

const MESH: &str = "mesh_geometry";
const POTENTIAL: &str = "potential_theory";
const ACOUSTIC: &str = "acoustic_solver";
const EM: &str = "em_scattering";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyReport {
    pub index: usize,
    pub reference_point: [f64; 3],
    pub diameter: f64,
    pub area: f64,
    pub volume: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub capacitance: Option<CapacitanceResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effective_capacitance: Option<Complex>,
    /// Magnetic polarizability `β = α(−1)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<[[f64; 3]; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<[[f64; 3]; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_tilde: Option<[[f64; 3]; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheStats {
    pub computed: usize,
    pub reused: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub regime: Regime,
    /// Diagonal-dominance margin of the charge system.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolveInfo>,
    pub property_cache: CacheStats,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeumannReport {
    pub laplacians: Vec<Complex>,
    pub gradients: Vec<[Complex; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmFarField {
    pub e: Vec<[Complex; 3]>,
    pub h: Vec<[Complex; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarFieldReport {
    pub directions: Vec<[f64; 3]>,
    /// Acoustic amplitude, or the co-polar component of the EM electric
    /// amplitude.
    pub amplitude: Vec<Complex>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub em: Option<EmFarField>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub point: [f64; 3],
    pub total: Complex,
    pub incident: Complex,
    pub near_field: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Results {
    pub diagnostics: Diagnostics,
    pub bodies: Vec<BodyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub charges: Option<Vec<Complex>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub neumann: Option<NeumannReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub far_field: Option<FarFieldReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field_samples: Option<Vec<FieldSample>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Property {
    Capacitance(usize),
    Beta,
    Alpha(u64),
}

#[derive(Debug, Clone)]
enum Value {
    Capacitance(CapacitanceResult),
    Tensor(Matrix3<f64>),
}

fn compute(mesh: &TriangleMesh, property: Property) -> Result<Value, potential::PotentialError> {
    Ok(match property {
        Property::Capacitance(order) => Value::Capacitance(potential::capacitance(mesh, order)?),
        Property::Beta => Value::Tensor(potential::magnetic_polarizability(mesh)?.entries),
        Property::Alpha(bits) => Value::Tensor(potential::electric_polarizability(mesh, f64::from_bits(bits))?.entries),
    })
}

/// Shape properties keyed by mesh content, so identical bodies share one
/// computation.
struct PropertyCache {
    values: HashMap<(u64, Property), Value>,
    stats: CacheStats,
}

impl PropertyCache {
    fn fill(meshes: &[TriangleMesh], requests: &[Vec<Property>]) -> Result<Self, ScenarioError> {
        let hashes: Vec<u64> = meshes.iter().map(TriangleMesh::content_hash).collect();
        let mut tasks: Vec<(usize, Property)> = Vec::new();
        let mut seen = HashMap::new();
        let mut total = 0;
        for (m, props) in requests.iter().enumerate() {
            for &p in props {
                total += 1;
                seen.entry((hashes[m], p)).or_insert_with(|| {
                    tasks.push((m, p));
                });
            }
        }
        let run = |&(m, p): &(usize, Property)| {
            compute(&meshes[m], p)
                .map(|v| ((hashes[m], p), v))
                .map_err(|e| ScenarioError::module(POTENTIAL, Some(m), e))
        };
        #[cfg(feature = "parallel")]
        let computed: Vec<_> = tasks.par_iter().map(run).collect();
        #[cfg(not(feature = "parallel"))]
        let computed: Vec<_> = tasks.iter().map(run).collect();
        let values = computed.into_iter().collect::<Result<HashMap<_, _>, _>>()?;
        Ok(Self {
            stats: CacheStats {
                computed: tasks.len(),
                reused: total - tasks.len(),
            },
            values,
        })
    }

    fn capacitance(&self, mesh: &TriangleMesh, order: usize) -> CapacitanceResult {
        match &self.values[&(mesh.content_hash(), Property::Capacitance(order))] {
            Value::Capacitance(c) => c.clone(),
            Value::Tensor(_) => unreachable!("capacitance key holds a capacitance"),
        }
    }

    fn tensor(&self, mesh: &TriangleMesh, property: Property) -> Matrix3<f64> {
        match &self.values[&(mesh.content_hash(), property)] {
            Value::Tensor(t) => *t,
            Value::Capacitance(_) => unreachable!("tensor key holds a tensor"),
        }
    }
}

fn rows(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    [0, 1, 2].map(|i| [0, 1, 2].map(|j| m[(i, j)]))
}

fn arr(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

fn overlap_warning(scene: &Scene) -> Option<String> {
    scene
        .first_overlap()
        .map(|(i, j)| format!("bodies {i} and {j} overlap (bounding spheres intersect); small-body approximation invalid"))
}

fn build_mesh(shape: &ShapeSpec, base: &Path) -> Result<TriangleMesh, String> {
    match shape {
        ShapeSpec::Sphere { radius, subdivisions } => generate_sphere(*radius, *subdivisions).map_err(|e| e.to_string()),
        ShapeSpec::Ellipsoid { semi_axes, subdivisions } => {
            generate_ellipsoid(*semi_axes, *subdivisions).map_err(|e| e.to_string())
        }
        ShapeSpec::Mesh { path } => {
            let path = base.join(path);
            let format = MeshFormat::from_extension(&path)
                .ok_or_else(|| format!("{}: unrecognized mesh extension (expected .stl or .obj)", path.display()))?;
            load_mesh(&path, format).map_err(|e| format!("{}: {e}", path.display()))
        }
    }
}

fn real_contrast(value: Option<Complex>, background: f64, body: usize) -> Result<f64, ScenarioError> {
    let value = value.map_or(Complex64::new(background, 0.0), |c| c.0);
    let g = em::gamma_contrast(value, Complex64::new(background, 0.0)).map_err(|e| ScenarioError::module(EM, Some(body), e))?;
    if g.im != 0.0 {
        return Err(ScenarioError::module(EM, Some(body), em::EmError::ComplexContrast(g)));
    }
    Ok(g.re)
}

/// Runs the full pipeline. Mesh paths are resolved against `base_dir`.
pub fn run(scenario: &Scenario, base_dir: &Path) -> Result<Results, ScenarioError> {
    scenario.validate()?;
    let family = scenario.family();
    let props_requested = scenario.outputs.contains(&OutputSpec::ShapeProperties);
    let order = scenario.capacitance.order;

    let meshes = scenario
        .bodies
        .iter()
        .enumerate()
        .map(|(m, b)| build_mesh(&b.shape, base_dir).map_err(|e| ScenarioError::module(MESH, Some(m), e)))
        .collect::<Result<Vec<_>, _>>()?;
    let geometry: Vec<GeometrySummary> = meshes.iter().map(summarize).collect();

    let mut contrasts = Vec::new();
    let requests: Vec<Vec<Property>> = scenario
        .bodies
        .iter()
        .enumerate()
        .map(|(m, b)| {
            let mut props = Vec::new();
            if props_requested || family == Family::Charges {
                props.push(Property::Capacitance(order));
            }
            if props_requested || family != Family::Charges {
                props.push(Property::Beta);
            }
            if family == Family::Electromagnetic {
                let gamma = real_contrast(b.eps, scenario.medium.eps0, m)?;
                let gamma_mu = real_contrast(b.mu, scenario.medium.mu0, m)?;
                props.push(Property::Alpha(gamma.to_bits()));
                props.push(Property::Alpha(gamma_mu.to_bits()));
                contrasts.push((gamma, gamma_mu));
            }
            Ok(props)
        })
        .collect::<Result<_, ScenarioError>>()?;
    let cache = PropertyCache::fill(&meshes, &requests)?;

    let mut warnings = Vec::new();
    let mut reports = Vec::with_capacity(meshes.len());
    for (m, (mesh, geo)) in meshes.iter().zip(&geometry).enumerate() {
        let position = Vec3::from(scenario.bodies[m].position);
        let has = |p: Property| requests[m].contains(&p);
        let capacitance = has(Property::Capacitance(order)).then(|| cache.capacitance(mesh, order));
        if let Some(c) = &capacitance {
            if c.diverging {
                warnings.push(format!(
                    "body {m}: capacitance series is not contracting (estimated ratio {:.4})",
                    c.estimated_ratio.unwrap_or(f64::NAN)
                ));
            }
        }
        let beta = has(Property::Beta).then(|| cache.tensor(mesh, Property::Beta));
        let (alpha, beta_tilde) = match contrasts.get(m) {
            Some(&(g, gm)) => (
                Some(cache.tensor(mesh, Property::Alpha(g.to_bits()))),
                Some(cache.tensor(mesh, Property::Alpha(gm.to_bits())) + cache.tensor(mesh, Property::Beta)),
            ),
            None => (None, None),
        };
        reports.push(BodyReport {
            index: m,
            reference_point: arr(&(geo.centroid + position)),
            diameter: geo.diameter,
            area: geo.area,
            volume: geo.volume,
            capacitance,
            effective_capacitance: None,
            beta: beta.as_ref().map(rows),
            alpha: alpha.as_ref().map(rows),
            beta_tilde: beta_tilde.as_ref().map(rows),
        });
    }

    let condition = |m: usize| match scenario.bodies[m].condition {
        Some(ConditionKind::Dirichlet) | None => BoundaryCondition::Dirichlet,
        Some(ConditionKind::Impedance) => BoundaryCondition::Impedance(scenario.bodies[m].zeta.expect("validated").0),
        Some(ConditionKind::Neumann) => BoundaryCondition::Neumann,
    };
    let scatterers: Vec<Scatterer> = reports
        .iter()
        .map(|r| {
            let mut s = Scatterer::point(Vec3::from(r.reference_point), r.diameter, condition(r.index))
                .with_area(r.area)
                .with_volume(r.volume);
            s.capacitance = r.capacitance.as_ref().map(|c| c.value);
            s.beta = r.beta.map(|b| Matrix3::from_fn(|i, j| b[i][j]));
            s
        })
        .collect();
    let k = scenario.medium.k;
    let scene = Scene::new(scatterers, k)
        .map_err(|e| ScenarioError::module(ACOUSTIC, None, e))?
        .with_overlap_allowed();
    let regime = scene.regime(family == Family::Electromagnetic);
    warnings.extend(regime.warnings.iter().cloned());
    warnings.extend(overlap_warning(&scene));

    let grid = scenario.outputs.iter().find_map(|o| match o {
        OutputSpec::FarField { grid } => Some(FarFieldGrid::from_spec(grid)),
        _ => None,
    });
    let samples = scenario.outputs.iter().find_map(|o| match o {
        OutputSpec::FieldSamples { points } => Some(points.clone()),
        _ => None,
    });
    let wants_charges = scenario.outputs.contains(&OutputSpec::Charges);
    let solves = wants_charges || grid.is_some() || samples.is_some();
    let method = scenario.solver.method();
    let direction = Vec3::from(scenario.incident.direction);

    let mut results = Results {
        diagnostics: Diagnostics {
            regime,
            margin: None,
            solver: None,
            property_cache: cache.stats,
            warnings: Vec::new(),
        },
        bodies: reports,
        charges: None,
        neumann: None,
        far_field: None,
        field_samples: None,
    };
    let acoustic = |e| ScenarioError::module(ACOUSTIC, None, e);
    let tag_body = |e: crate::acoustic::AcousticError| match e {
        crate::acoustic::AcousticError::MissingProperty { body, .. } => ScenarioError::module(ACOUSTIC, Some(body), e),
        crate::acoustic::AcousticError::InsideBody(body) => ScenarioError::module(ACOUSTIC, Some(body), e),
        e => ScenarioError::module(ACOUSTIC, None, e),
    };

    match family {
        Family::Charges => {
            for (m, r) in results.bodies.iter_mut().enumerate() {
                r.effective_capacitance = Some(Complex(scene.scatterers()[m].effective_capacitance(m).map_err(tag_body)?));
            }
            let mu = diagonal_dominance_margin(&scene).map_err(tag_body)?;
            results.diagnostics.margin = Some(mu);
            if mu >= 1.0 {
                warnings.push(format!("diagonal dominance violated: margin μ = {mu:.6} >= 1"));
            }
            if solves {
                let wave = PlaneWave::new(direction, k).map_err(acoustic)?;
                let system = assemble_dirichlet(&scene, &wave).map_err(tag_body)?;
                let sol = solve_charges(&system, method).map_err(acoustic)?;
                results.diagnostics.solver = Some(sol.info.clone());
                if wants_charges {
                    results.charges = Some(sol.charges.iter().map(|&q| Complex(q)).collect());
                }
                if let Some(grid) = &grid {
                    let amplitude = grid
                        .directions
                        .iter()
                        .map(|d| amplitude_dirichlet(&sol, &scene, d).map(Complex))
                        .collect::<Result<_, _>>()
                        .map_err(acoustic)?;
                    results.far_field = Some(FarFieldReport {
                        directions: grid.directions.iter().map(arr).collect(),
                        amplitude,
                        em: None,
                    });
                }
                if let Some(points) = &samples {
                    results.field_samples = Some(sample_field(&scene, &wave, points, &mut warnings, |x| {
                        field_dirichlet(&sol, &scene, &wave, x).map_err(tag_body)
                    })?);
                }
            }
        }
        Family::Neumann => {
            if solves {
                let wave = PlaneWave::new(direction, k).map_err(acoustic)?;
                let system = assemble_neumann(&scene, &wave).map_err(tag_body)?;
                let margin = system.margin();
                if margin >= 1.0 && matches!(method, crate::acoustic::SolveMethod::FixedPoint { .. }) {
                    warnings.push(format!(
                        "Neumann coupling row-sum bound {margin:.6} >= 1: fixed-point convergence not guaranteed"
                    ));
                }
                let sol = solve_neumann(&system, method).map_err(acoustic)?;
                results.diagnostics.solver = Some(sol.info.clone());
                if wants_charges {
                    results.neumann = Some(NeumannReport {
                        laplacians: sol.laplacians.iter().map(|&l| Complex(l)).collect(),
                        gradients: sol.gradients.iter().map(|g| g.map(Complex)).collect(),
                    });
                }
                if let Some(grid) = &grid {
                    let amplitude = grid
                        .directions
                        .iter()
                        .map(|d| amplitude_neumann(&sol, &scene, d).map(Complex))
                        .collect::<Result<_, _>>()
                        .map_err(acoustic)?;
                    results.far_field = Some(FarFieldReport {
                        directions: grid.directions.iter().map(arr).collect(),
                        amplitude,
                        em: None,
                    });
                }
                if let Some(points) = &samples {
                    results.field_samples = Some(sample_field(&scene, &wave, points, &mut warnings, |x| {
                        field_neumann(&sol, &scene, &wave, x).map_err(tag_body)
                    })?);
                }
            }
        }
        Family::Electromagnetic => {
            if let Some(grid) = &grid {
                results.far_field = Some(em_far_field(scenario, &results.bodies, grid)?);
            }
        }
    }
    results.diagnostics.warnings = warnings;
    Ok(results)
}

fn sample_field<F>(
    scene: &Scene,
    wave: &PlaneWave,
    points: &[[f64; 3]],
    warnings: &mut Vec<String>,
    field: F,
) -> Result<Vec<FieldSample>, ScenarioError>
where
    F: Fn(&Vec3) -> Result<Complex64, ScenarioError>,
{
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let x = Vec3::from(*p);
            let near_field = scene.is_near_field(&x);
            if near_field {
                warnings.push(format!(
                    "field sample {i} lies within five body diameters of a scatterer; point approximation is coarse there"
                ));
            }
            Ok(FieldSample {
                point: *p,
                total: Complex(field(&x)?),
                incident: Complex(wave.value(&x)),
                near_field,
            })
        })
        .collect()
}

fn em_far_field(scenario: &Scenario, bodies: &[BodyReport], grid: &FarFieldGrid) -> Result<FarFieldReport, ScenarioError> {
    let tag = |e| ScenarioError::module(EM, None, e);
    let medium = Medium {
        eps0: Complex64::new(scenario.medium.eps0, 0.0),
        mu0: Complex64::new(scenario.medium.mu0, 0.0),
    };
    let polarization = scenario.incident.polarization.expect("validated").map(|c| c.0);
    let polarization = crate::em::CVec3::from(polarization);
    let k = scenario.medium.k;
    let wave = EmPlaneWave::new(Vec3::from(scenario.incident.direction), polarization, k, medium).map_err(tag)?;
    let tensor = |t: &Option<[[f64; 3]; 3]>| {
        let t = t.expect("EM bodies carry tensors");
        Matrix3::from_fn(|i, j| t[i][j])
    };
    let em_bodies: Vec<EMBody> = bodies
        .iter()
        .map(|b| EMBody {
            position: Vec3::from(b.reference_point),
            volume: b.volume,
            alpha: tensor(&b.alpha),
            beta_tilde: tensor(&b.beta_tilde),
            medium,
        })
        .collect();
    let fields: Vec<EMField6> = em_bodies.iter().map(|b| wave.at(&b.position)).collect();
    let unit_pol = polarization / Complex64::new(polarization.norm(), 0.0);
    let mut amplitude = Vec::with_capacity(grid.len());
    let mut e = Vec::with_capacity(grid.len());
    let mut h = Vec::with_capacity(grid.len());
    for d in &grid.directions {
        let a = em::em_amplitude(&em_bodies, &fields, d, k).map_err(tag)?;
        amplitude.push(Complex(unit_pol.dotc(&a.e)));
        e.push([a.e.x, a.e.y, a.e.z].map(Complex));
        h.push([a.h.x, a.h.y, a.h.z].map(Complex));
    }
    Ok(FarFieldReport {
        directions: grid.directions.iter().map(arr).collect(),
        amplitude,
        em: Some(EmFarField { e, h }),
    })
}

/// Parses geometry and reports regime diagnostics without computing shape
/// constants or solving.
pub fn check(scenario: &Scenario, base_dir: &Path) -> Result<Results, ScenarioError> {
    scenario.validate()?;
    let mut reports = Vec::new();
    let mut scatterers = Vec::new();
    for (m, b) in scenario.bodies.iter().enumerate() {
        let mesh = build_mesh(&b.shape, base_dir).map_err(|e| ScenarioError::module(MESH, Some(m), e))?;
        let geo = summarize(&mesh);
        let x = geo.centroid + Vec3::from(b.position);
        scatterers.push(Scatterer::point(x, geo.diameter, BoundaryCondition::Dirichlet));
        reports.push(BodyReport {
            index: m,
            reference_point: arr(&x),
            diameter: geo.diameter,
            area: geo.area,
            volume: geo.volume,
            capacitance: None,
            effective_capacitance: None,
            beta: None,
            alpha: None,
            beta_tilde: None,
        });
    }
    let scene = Scene::new(scatterers, scenario.medium.k).map_err(|e| ScenarioError::module(ACOUSTIC, None, e))?;
    let regime = scene.regime(scenario.family() == Family::Electromagnetic);
    let mut warnings = regime.warnings.clone();
    warnings.extend(overlap_warning(&scene));
    Ok(Results {
        diagnostics: Diagnostics {
            regime,
            margin: None,
            solver: None,
            property_cache: CacheStats { computed: 0, reused: 0 },
            warnings,
        },
        bodies: reports,
        charges: None,
        neumann: None,
        far_field: None,
        field_samples: None,
    })
}
