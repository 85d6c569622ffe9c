use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::AcousticError;

/// How a coupled system `(I + B) x = rhs` is solved.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SolveMethod {
    #[default]
    Direct,
    FixedPoint { tol: f64, max_iter: usize },
}

impl SolveMethod {
    pub const DEFAULT_TOL: f64 = 1e-12;
    pub const DEFAULT_MAX_ITER: usize = 200;

    pub fn fixed_point() -> Self {
        Self::FixedPoint {
            tol: Self::DEFAULT_TOL,
            max_iter: Self::DEFAULT_MAX_ITER,
        }
    }

    /// Largest accepted residual for solutions produced by this method.
    pub fn residual_threshold(&self) -> f64 {
        match self {
            Self::Direct => 1e-10,
            Self::FixedPoint { tol, .. } => (10.0 * tol).max(1e-10),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveInfo {
    pub method: SolveMethod,
    /// Zero for direct solves.
    pub iterations: usize,
    /// `‖(I + B)x − rhs‖∞ / ‖rhs‖∞`.
    pub residual: f64,
    /// Geometric-mean contraction of successive fixed-point updates.
    pub observed_rate: Option<f64>,
}

/// `(I + B) x = rhs` with `B` the inter-body coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledSystem {
    pub coupling: DMatrix<Complex64>,
    pub rhs: DVector<Complex64>,
}

fn max_abs(v: &DVector<Complex64>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl CoupledSystem {
    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    /// `I + B`.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        &self.coupling + DMatrix::identity(self.dim(), self.dim())
    }

    /// Largest absolute row sum of `B`: the contraction bound of the
    /// fixed-point map.
    pub fn margin(&self) -> f64 {
        self.coupling
            .row_iter()
            .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn residual(&self, x: &DVector<Complex64>) -> f64 {
        let r = x + &self.coupling * x - &self.rhs;
        let scale = max_abs(&self.rhs);
        if scale == 0.0 {
            max_abs(&r)
        } else {
            max_abs(&r) / scale
        }
    }

    pub fn solve(&self, method: SolveMethod) -> Result<(DVector<Complex64>, SolveInfo), AcousticError> {
        let (x, iterations, observed_rate) = match method {
            SolveMethod::Direct => {
                let x = self.matrix().lu().solve(&self.rhs).ok_or(AcousticError::Singular)?;
                (x, 0, None)
            }
            SolveMethod::FixedPoint { tol, max_iter } => self.iterate(tol, max_iter)?,
        };
        if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(AcousticError::Singular);
        }
        let residual = self.residual(&x);
        if residual > method.residual_threshold() {
            return Err(AcousticError::Inaccurate(residual));
        }
        Ok((
            x,
            SolveInfo {
                method,
                iterations,
                residual,
                observed_rate,
            },
        ))
    }

    fn iterate(
        &self,
        tol: f64,
        max_iter: usize,
    ) -> Result<(DVector<Complex64>, usize, Option<f64>), AcousticError> {
        let mut x = self.rhs.clone();
        let mut first_change = None;
        for n in 1..=max_iter {
            let next = &self.rhs - &self.coupling * &x;
            let scale = max_abs(&next);
            let change = max_abs(&(&next - &x));
            x = next;
            if n == 1 {
                first_change = Some(change);
            }
            if change <= tol * scale || change == 0.0 {
                let rate = match first_change {
                    Some(c0) if n > 1 && c0 > 0.0 && change > 0.0 => {
                        Some((change / c0).powf(1.0 / (n - 1) as f64))
                    }
                    _ => None,
                };
                return Ok((x, n, rate));
            }
        }
        Err(AcousticError::NotConverged {
            iterations: max_iter,
            margin: self.margin(),
        })
    }
}
