//! Dense row-major matrices and a restarted GMRES for the boundary-integral
//! systems.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Square row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Builds the matrix row by row; `fill(i, row)` writes row `i`.
    pub fn from_rows<F>(n: usize, fill: F) -> Self
    where
        F: Fn(usize, &mut [f64]) + Sync,
    {
        let mut data = vec![0.0; n * n];
        #[cfg(feature = "parallel")]
        data.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| fill(i, row));
        #[cfg(not(feature = "parallel"))]
        data.chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| fill(i, row));
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// `y = M x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n;
        let dot = |row: &[f64]| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        #[cfg(feature = "parallel")]
        y.par_iter_mut()
            .zip(self.data.par_chunks(n.max(1)))
            .for_each(|(yi, row)| *yi = dot(row));
        #[cfg(not(feature = "parallel"))]
        y.iter_mut()
            .zip(self.data.chunks(n.max(1)))
            .for_each(|(yi, row)| *yi = dot(row));
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().sum()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmresOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// ‖b − A x‖ / ‖b‖ at exit.
    pub relative_residual: f64,
    /// Ratio of extreme diagonal magnitudes of the last Hessenberg
    /// factor; a cheap lower bound on the condition number.
    pub condition_estimate: f64,
    pub converged: bool,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Restarted GMRES(m) with modified Gram–Schmidt and Givens rotations.
pub fn gmres<F>(
    apply: F,
    rhs: &[f64],
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> GmresOutcome
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = rhs.len();
    let mut x = vec![0.0; n];
    let bnorm = norm(rhs);
    if bnorm == 0.0 {
        return GmresOutcome {
            solution: x,
            iterations: 0,
            relative_residual: 0.0,
            condition_estimate: 1.0,
            converged: true,
        };
    }
    let m = restart.max(1).min(n.max(1));
    let mut total = 0;
    let mut ax = vec![0.0; n];
    let mut cond = 1.0;
    loop {
        apply(&x, &mut ax);
        let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let beta = norm(&r);
        if beta <= tol * bnorm || total >= max_iter {
            return GmresOutcome {
                solution: x,
                iterations: total,
                relative_residual: beta / bnorm,
                condition_estimate: cond,
                converged: beta <= tol * bnorm,
            };
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut hess = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k = 0;
        while k < m && total < max_iter {
            let mut w = vec![0.0; n];
            apply(&basis[k], &mut w);
            for (j, vj) in basis.iter().enumerate() {
                let h = dot(&w, vj);
                hess[j][k] = h;
                w.iter_mut().zip(vj).for_each(|(wi, vi)| *wi -= h * vi);
            }
            let wn = norm(&w);
            hess[k + 1][k] = wn;
            for j in 0..k {
                let t = cs[j] * hess[j][k] + sn[j] * hess[j + 1][k];
                hess[j + 1][k] = -sn[j] * hess[j][k] + cs[j] * hess[j + 1][k];
                hess[j][k] = t;
            }
            let rho = hess[k][k].hypot(hess[k + 1][k]);
            (cs[k], sn[k]) = if rho > 0.0 {
                (hess[k][k] / rho, hess[k + 1][k] / rho)
            } else {
                (1.0, 0.0)
            };
            hess[k][k] = rho;
            hess[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            total += 1;
            k += 1;
            if g[k].abs() <= tol * bnorm || wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        // back substitution on the k×k triangular factor
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| hess[i][j] * y[j]).sum();
            y[i] = if hess[i][i] != 0.0 { (g[i] - s) / hess[i][i] } else { 0.0 };
        }
        let diag: Vec<f64> = (0..k).map(|i| hess[i][i].abs()).collect();
        let (lo, hi) = diag
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &d| (lo.min(d), hi.max(d)));
        cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        for (yi, vi) in y.iter().zip(&basis) {
            x.iter_mut().zip(vi).for_each(|(xj, vj)| *xj += yi * vj);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_nonsymmetric_system() {
        let n = 40;
        let m = DenseMatrix::from_rows(n, |i, row| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = if i == j { 4.0 } else { 1.0 / (1.0 + (i as f64) + 2.0 * j as f64) };
            }
        });
        let exact: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut b = vec![0.0; n];
        m.apply(&exact, &mut b);
        let out = gmres(|x, y| m.apply(x, y), &b, 1e-12, 10, 500);
        assert!(out.converged);
        for (a, e) in out.solution.iter().zip(&exact) {
            assert!((a - e).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_rhs_is_trivial() {
        let out = gmres(|x, y| y.copy_from_slice(x), &[0.0; 5], 1e-12, 5, 10);
        assert_eq!(out.solution, vec![0.0; 5]);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn singular_system_reports_failure() {
        // Projects out the first component: rhs along e0 is unreachable.
        let apply = |x: &[f64], y: &mut [f64]| {
            y.copy_from_slice(x);
            y[0] = 0.0;
        };
        let out = gmres(apply, &[1.0, 1.0, 0.0], 1e-12, 3, 20);
        assert!(!out.converged);
        assert!(out.relative_residual > 0.5);
    }
}
