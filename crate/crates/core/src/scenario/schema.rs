use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ScenarioError;
use crate::acoustic::SolveMethod;

/// A complex number written either as a plain number or as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complex(pub Complex64);

impl Serialize for Complex {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.0.re, self.0.im].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Complex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Real(f64),
            Pair([f64; 2]),
        }
        match Repr::deserialize(d).map_err(|_| {
            serde::de::Error::custom("expected a number or a [re, im] pair")
        })? {
            Repr::Real(re) => Ok(Self(Complex64::new(re, 0.0))),
            Repr::Pair([re, im]) => Ok(Self(Complex64::new(re, im))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumSpec {
    pub k: f64,
    #[serde(default = "one")]
    pub eps0: f64,
    #[serde(default = "one")]
    pub mu0: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IncidentKind {
    AcousticPlane,
    EmPlane,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidentSpec {
    pub kind: IncidentKind,
    pub direction: [f64; 3],
    /// Electric polarization `E₀`; EM only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polarization: Option<[Complex; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    Sphere { radius: f64, subdivisions: u32 },
    Ellipsoid { semi_axes: [f64; 3], subdivisions: u32 },
    /// STL or OBJ file, relative to the scenario file.
    Mesh { path: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionKind {
    Dirichlet,
    Impedance,
    Neumann,
}

/// One condition, or a list that must name a single condition.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum ConditionRepr {
    One(ConditionKind),
    Many(Vec<ConditionKind>),
}

fn condition_from_repr<'de, D: Deserializer<'de>>(d: D) -> Result<Option<ConditionKind>, D::Error> {
    let repr = Option::<ConditionRepr>::deserialize(d)?;
    match repr {
        None => Ok(None),
        Some(ConditionRepr::One(c)) => Ok(Some(c)),
        Some(ConditionRepr::Many(list)) => {
            match list.first() {
                None => Err(serde::de::Error::custom("empty boundary condition list")),
                Some(c) if list.iter().all(|x| x == c) => Ok(Some(*c)),
                Some(_) => Err(serde::de::Error::custom(format!(
                    "conflicting boundary conditions {list:?}"
                ))),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodySpec {
    pub shape: ShapeSpec,
    #[serde(default)]
    pub position: [f64; 3],
    /// Required for acoustic scenarios.
    #[serde(default, deserialize_with = "condition_from_repr", skip_serializing_if = "Option::is_none")]
    pub condition: Option<ConditionKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<Complex>,
    /// EM only; defaults to the background value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Complex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Complex>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    Direct,
    FixedPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "direct")]
    pub method: MethodKind,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn direct() -> MethodKind {
    MethodKind::Direct
}

fn default_tol() -> f64 {
    SolveMethod::DEFAULT_TOL
}

fn default_max_iter() -> usize {
    SolveMethod::DEFAULT_MAX_ITER
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            method: MethodKind::Direct,
            tol: default_tol(),
            max_iter: default_max_iter(),
        }
    }
}

impl SolverSpec {
    pub fn method(&self) -> SolveMethod {
        match self.method {
            MethodKind::Direct => SolveMethod::Direct,
            MethodKind::FixedPoint => SolveMethod::FixedPoint {
                tol: self.tol,
                max_iter: self.max_iter,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacitanceSpec {
    #[serde(default = "default_order")]
    pub order: usize,
}

fn default_order() -> usize {
    2
}

impl Default for CapacitanceSpec {
    fn default() -> Self {
        Self { order: default_order() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GridSpec {
    /// Axes, edge midpoints and corners of the cube: 26 directions.
    Default,
    LatLong { n_theta: usize, n_phi: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum OutputSpec {
    Charges,
    ShapeProperties,
    FarField { grid: GridSpec },
    FieldSamples { points: Vec<[f64; 3]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub medium: MediumSpec,
    pub incident: IncidentSpec,
    pub bodies: Vec<BodySpec>,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub capacitance: CapacitanceSpec,
    pub outputs: Vec<OutputSpec>,
}

/// Acoustic boundary-condition family of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Charges,
    Neumann,
    Electromagnetic,
}

impl Scenario {
    pub fn family(&self) -> Family {
        match self.incident.kind {
            IncidentKind::EmPlane => Family::Electromagnetic,
            IncidentKind::AcousticPlane => {
                if self.bodies.iter().any(|b| b.condition == Some(ConditionKind::Neumann)) {
                    Family::Neumann
                } else {
                    Family::Charges
                }
            }
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let invalid = |msg: String| Err(ScenarioError::Invalid(msg));
        if !(self.medium.k > 0.0 && self.medium.k.is_finite()) {
            return invalid(format!("medium.k: must be positive, got {}", self.medium.k));
        }
        if !(self.medium.eps0 > 0.0 && self.medium.mu0 > 0.0) {
            return invalid("medium.eps0 and medium.mu0 must be positive".into());
        }
        let dir = self.incident.direction;
        if (dir.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() > 1e-12 {
            return invalid(format!("incident.direction: {dir:?} is not a unit vector"));
        }
        if self.bodies.is_empty() {
            return invalid("bodies: at least one body is required".into());
        }
        if self.outputs.is_empty() {
            return invalid("outputs: at least one output must be requested".into());
        }
        if self.capacitance.order > crate::potential::MAX_CAPACITANCE_ORDER {
            return invalid(format!(
                "capacitance.order: {} exceeds the supported maximum {}",
                self.capacitance.order,
                crate::potential::MAX_CAPACITANCE_ORDER
            ));
        }
        if !(self.solver.tol > 0.0) || self.solver.max_iter == 0 {
            return invalid("solver: tol must be positive and max_iter at least 1".into());
        }
        for (m, b) in self.bodies.iter().enumerate() {
            self.validate_body(m, b)?;
        }
        let em = self.incident.kind == IncidentKind::EmPlane;
        if em {
            if self.incident.polarization.is_none() {
                return invalid("incident.polarization: required for em_plane".into());
            }
            for o in &self.outputs {
                if matches!(o, OutputSpec::Charges | OutputSpec::FieldSamples { .. }) {
                    return invalid(
                        "outputs: charges and field_samples are only available for acoustic scenarios".into(),
                    );
                }
            }
        } else {
            if self.incident.polarization.is_some() {
                return invalid("incident.polarization: only allowed for em_plane".into());
            }
            let neumann = self.bodies.iter().filter(|b| b.condition == Some(ConditionKind::Neumann)).count();
            if neumann != 0 && neumann != self.bodies.len() {
                return invalid(
                    "mixed boundary conditions unsupported: Neumann bodies cannot be combined with Dirichlet or impedance bodies"
                        .into(),
                );
            }
        }
        for o in &self.outputs {
            if let OutputSpec::FarField {
                grid: GridSpec::LatLong { n_theta, n_phi },
            } = o
            {
                if n_theta * n_phi < 6 {
                    return invalid("outputs.far_field: grid needs at least 6 directions".into());
                }
            }
        }
        Ok(())
    }

    fn validate_body(&self, m: usize, b: &BodySpec) -> Result<(), ScenarioError> {
        let invalid = |msg: String| Err(ScenarioError::Invalid(format!("bodies[{m}].{msg}")));
        match &b.shape {
            ShapeSpec::Sphere { radius, .. } if !(*radius > 0.0) => return invalid("shape.radius: must be positive".into()),
            ShapeSpec::Ellipsoid { semi_axes, .. } if semi_axes.iter().any(|a| !(*a > 0.0)) => {
                return invalid("shape.semi_axes: must be positive".into())
            }
            _ => {}
        }
        match self.incident.kind {
            IncidentKind::AcousticPlane => {
                let Some(condition) = b.condition else {
                    return invalid("condition: required for acoustic scenarios".into());
                };
                if b.eps.is_some() || b.mu.is_some() {
                    return invalid("eps/mu: only allowed for em_plane scenarios".into());
                }
                match (condition, b.zeta) {
                    (ConditionKind::Impedance, None) => invalid("zeta: required for impedance bodies".into()),
                    (ConditionKind::Impedance, Some(z)) if z.0.norm() == 0.0 => {
                        invalid("zeta: must be non-zero".into())
                    }
                    (ConditionKind::Dirichlet | ConditionKind::Neumann, Some(_)) => Err(ScenarioError::Invalid(
                        format!("bodies[{m}]: conflicting boundary conditions (zeta given for a {condition:?} body)"),
                    )),
                    _ => Ok(()),
                }
            }
            IncidentKind::EmPlane => {
                if b.condition.is_some() || b.zeta.is_some() {
                    return invalid("condition/zeta: only allowed for acoustic scenarios".into());
                }
                Ok(())
            }
        }
    }
}
