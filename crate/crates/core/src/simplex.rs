//! Maximization of `f(p) = sum_y (sum_x p_x A[x][y])^r` over the probability simplex, for
//! `0 <= r <= 1`, where `f` is concave.
//!
//! With `q = p A` and `D_x = sum_y A[x][y] q_y^(r-1)`, Euler's identity gives `sum_x p_x D_x = f`,
//! and `p` is optimal exactly when `D_x <= f` for every `x`, with equality on the support. The
//! relative Frank-Wolfe gap `max_x D_x / f - 1` is zero exactly there and, because `f` is concave
//! and positively homogeneous of degree `r`, it bounds the relative suboptimality:
//! `max f / f(p) - 1 <= r * gap`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Result of a simplex maximization.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOptimum {
    pub value: f64,
    pub argmax: Vec<f64>,
    /// Relative Frank-Wolfe gap at `argmax`.
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub tolerance: f64,
    /// Residual at which a stalled run still counts as converged.
    pub acceptance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-11,
            acceptance: 1e-8,
            max_iterations: 100_000,
        }
    }
}

/// Weights, their mixture `q`, the objective value and its gradient.
type Iterate = (Vec<f64>, Vec<f64>, f64, Vec<f64>);

/// Dense `K x L` non-negative matrix with exponent `r`.
pub(crate) struct PowerSum<'a> {
    matrix: &'a [f64],
    rows: usize,
    cols: usize,
    power: f64,
}

impl<'a> PowerSum<'a> {
    pub fn new(matrix: &'a [f64], rows: usize, cols: usize, power: f64) -> Self {
        debug_assert_eq!(matrix.len(), rows * cols);
        Self {
            matrix,
            rows,
            cols,
            power,
        }
    }

    fn mix(&self, p: &[f64]) -> Vec<f64> {
        let mut q = vec![CompensatedSum::new(); self.cols];
        for (x, &px) in p.iter().enumerate() {
            if px == 0.0 {
                continue;
            }
            let row = &self.matrix[x * self.cols..(x + 1) * self.cols];
            for (acc, &a) in q.iter_mut().zip(row) {
                acc.add(px * a);
            }
        }
        q.iter().map(CompensatedSum::value).collect()
    }

    fn value_at(&self, q: &[f64]) -> f64 {
        let mut acc = CompensatedSum::new();
        for &v in q {
            if v > 0.0 {
                acc.add(v.powf(self.power));
            }
        }
        acc.value()
    }

    pub fn value(&self, p: &[f64]) -> f64 {
        self.value_at(&self.mix(p))
    }

    fn gradient(&self, q: &[f64]) -> Vec<f64> {
        let weights: Vec<f64> = q
            .iter()
            .map(|&v| {
                if v > 0.0 {
                    v.powf(self.power - 1.0)
                } else {
                    0.0
                }
            })
            .collect();
        (0..self.rows)
            .map(|x| {
                let row = &self.matrix[x * self.cols..(x + 1) * self.cols];
                let mut acc = CompensatedSum::new();
                for ((&a, &w), &v) in row.iter().zip(&weights).zip(q) {
                    if a > 0.0 {
                        if v > 0.0 {
                            acc.add(a * w);
                        } else {
                            return f64::INFINITY;
                        }
                    }
                }
                acc.value()
            })
            .collect()
    }

    /// Linear case `r = 1`: `f(p) = sum_x p_x rowsum_x`, maximized by the uniform law on the
    /// maximizing rows.
    fn maximize_linear(&self) -> SimplexOptimum {
        let sums: Vec<f64> = (0..self.rows)
            .map(|x| {
                self.matrix[x * self.cols..(x + 1) * self.cols]
                    .iter()
                    .copied()
                    .collect::<CompensatedSum>()
                    .value()
            })
            .collect();
        let best = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let winners: Vec<usize> = (0..self.rows)
            .filter(|&x| sums[x] >= best * (1.0 - 1e-14))
            .collect();
        let mut argmax = vec![0.0; self.rows];
        for &x in &winners {
            argmax[x] = 1.0 / winners.len() as f64;
        }
        SimplexOptimum {
            value: self.value(&argmax),
            argmax,
            residual: 0.0,
            iterations: 0,
        }
    }

    /// `r = 0`: `f` counts the outputs reachable from the support, maximized by any full-support
    /// law.
    fn maximize_support_count(&self) -> SimplexOptimum {
        let argmax = vec![1.0 / self.rows as f64; self.rows];
        SimplexOptimum {
            value: self.value(&argmax),
            argmax,
            residual: 0.0,
            iterations: 0,
        }
    }

    /// Accepts a candidate that increases the value beyond rounding noise, or keeps the value
    /// within the noise band while shrinking the gap (near the optimum the value moves by less
    /// than its own rounding error).
    fn judge(&self, candidate: Vec<f64>, value: f64, residual: f64) -> Option<Iterate> {
        let cq = self.mix(&candidate);
        let cv = self.value_at(&cq);
        if cv > value * (1.0 + 4.0 * f64::EPSILON) {
            let cg = self.gradient(&cq);
            return Some((candidate, cq, cv, cg));
        }
        if cv >= value * (1.0 - 4.0 * f64::EPSILON) {
            let cg = self.gradient(&cq);
            if relative_gap(&cg, cv) < residual {
                return Some((candidate, cq, cv, cg));
            }
        }
        None
    }

    /// Newton step for `max f` restricted to the affine hull of the current support, truncated
    /// to stay in the simplex and backtracked through [`Self::judge`].
    fn newton_step(
        &self,
        p: &[f64],
        q: &[f64],
        grad: &[f64],
        value: f64,
        residual: f64,
    ) -> Option<Iterate> {
        let top = p.iter().copied().fold(0.0, f64::max);
        let support: Vec<usize> = (0..self.rows).filter(|&x| p[x] > top * 1e-9).collect();
        let k = support.len();
        if k < 2 || grad.iter().any(|g| !g.is_finite()) {
            return None;
        }
        // Hessian of f up to the positive factor r: (r - 1) sum_y A_xy A_zy q_y^(r-2).
        let curv: Vec<f64> = q
            .iter()
            .map(|&v| {
                if v > 0.0 {
                    (self.power - 1.0) * v.powf(self.power - 2.0)
                } else {
                    0.0
                }
            })
            .collect();
        let mut hess = DMatrix::<f64>::zeros(k, k);
        for (i, &x) in support.iter().enumerate() {
            let rx = &self.matrix[x * self.cols..(x + 1) * self.cols];
            for (j, &z) in support.iter().enumerate().skip(i) {
                let rz = &self.matrix[z * self.cols..(z + 1) * self.cols];
                let h: f64 = (0..self.cols).map(|y| rx[y] * rz[y] * curv[y]).sum();
                hess[(i, j)] = h;
                hess[(j, i)] = h;
            }
        }
        // Work in the tangent space {sum dp = 0} through the centering projector.
        let proj =
            DMatrix::<f64>::identity(k, k) - DMatrix::<f64>::from_element(k, k, 1.0 / k as f64);
        let reduced = &proj * &hess * &proj;
        let g = DVector::<f64>::from_iterator(k, support.iter().map(|&x| grad[x]));
        let rhs = -(&proj * g);
        let svd = reduced.svd(true, true);
        let scale = svd.singular_values.max();
        let dp = svd.solve(&rhs, scale * 1e-12).ok()?;
        let dp = &proj * dp;
        let mut limit: f64 = 1.0;
        for (i, &x) in support.iter().enumerate() {
            if dp[i] < 0.0 {
                limit = limit.min(-p[x] / dp[i]);
            }
        }
        let mut alpha = limit;
        for _ in 0..30 {
            let mut candidate = p.to_vec();
            for (i, &x) in support.iter().enumerate() {
                candidate[x] = (p[x] + alpha * dp[i]).max(0.0);
            }
            let total: f64 = candidate
                .iter()
                .copied()
                .collect::<CompensatedSum>()
                .value();
            candidate.iter_mut().for_each(|v| *v /= total);
            if let Some(found) = self.judge(candidate, value, residual) {
                return Some(found);
            }
            alpha *= 0.5;
        }
        None
    }

    pub fn maximize(&self, options: &SolverOptions) -> Result<SimplexOptimum> {
        if !(0.0..=1.0).contains(&self.power) {
            return Err(Error::InvalidParameter(format!(
                "power-sum exponent {} outside [0, 1]",
                self.power
            )));
        }
        if self.power == 1.0 || self.rows == 1 {
            return Ok(self.maximize_linear());
        }
        if self.power == 0.0 {
            return Ok(self.maximize_support_count());
        }
        let base_step = 1.0 / (1.0 - self.power);
        let mut step = base_step;
        let mut p = vec![1.0 / self.rows as f64; self.rows];
        let mut q = self.mix(&p);
        let mut value = self.value_at(&q);
        let mut grad = self.gradient(&q);
        let mut residual = relative_gap(&grad, value);
        let mut iterations = 0;
        let mut polishes = 0;
        while residual > options.tolerance && iterations < options.max_iterations {
            iterations += 1;
            // A coordinate that underflowed while its gradient says it should grow can never
            // come back under multiplicative updates, so it gets a little mass back.
            let mut reseeded = false;
            for x in 0..self.rows {
                if p[x] < 1e-30 && grad[x] > value * (1.0 + options.tolerance) {
                    p[x] = 1e-9;
                    reseeded = true;
                }
            }
            if reseeded {
                let total: f64 = p.iter().copied().collect::<CompensatedSum>().value();
                p.iter_mut().for_each(|v| *v /= total);
                q = self.mix(&p);
                value = self.value_at(&q);
                grad = self.gradient(&q);
                residual = relative_gap(&grad, value);
            }
            let mut accepted = None;
            for _ in 0..60 {
                let candidate = multiplicative_step(&p, &grad, value, step);
                if let Some(found) = self.judge(candidate, value, residual) {
                    accepted = Some(found);
                    break;
                }
                step *= 0.5;
            }
            // Once the multiplicative update has slowed down (tiny accepted step) or failed,
            // a Newton step on the current support finishes the job.
            let slow = step < base_step * 1e-3 || (residual < 1e-5 && iterations % 16 == 0);
            if (accepted.is_none() || slow) && polishes < 400 {
                polishes += 1;
                let base = accepted
                    .as_ref()
                    .map_or((&p, &q, &grad, value), |a| (&a.0, &a.1, &a.3, a.2));
                if let Some(found) = self.newton_step(base.0, base.1, base.2, base.3, residual) {
                    accepted = Some(found);
                    step = base_step;
                }
            }
            let Some((candidate, cq, cv, cg)) = accepted else {
                break;
            };
            p = candidate;
            q = cq;
            value = cv;
            grad = cg;
            residual = relative_gap(&grad, value);
            step = (step * 2.0).min(base_step);
        }
        if residual <= options.acceptance {
            Ok(SimplexOptimum {
                value,
                argmax: p,
                residual,
                iterations,
            })
        } else {
            Err(Error::NotConverged {
                iterations,
                residual,
                value,
                argmax: p,
            })
        }
    }
}

fn relative_gap(grad: &[f64], value: f64) -> f64 {
    let top = grad.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (top / value - 1.0).max(0.0)
}

/// `p_x <- p_x (D_x / f)^step`, normalized, computed in the log domain.
fn multiplicative_step(p: &[f64], grad: &[f64], value: f64, step: f64) -> Vec<f64> {
    let logs: Vec<f64> = p
        .iter()
        .zip(grad)
        .map(|(&px, &d)| {
            if px > 0.0 {
                px.ln() + step * (d / value).ln()
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs.iter().map(|&l| (l - top).exp()).collect();
    let total: f64 = weights.iter().copied().collect::<CompensatedSum>().value();
    weights.iter().map(|w| w / total).collect()
}
