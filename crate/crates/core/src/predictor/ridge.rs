//! Exact closed-form ridge regression with an unpenalized intercept.
//!
//! Solves `min_w |Xw + b - y|^2 + l2 |w|^2` through the bordered normal
//! equations and a Cholesky factorization; with `l2 > 0` the system is
//! positive definite for any non-empty sample set.

use super::PredictorError;

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub l2: f64,
}

impl RidgeModel {
    pub fn fit(x: &[Vec<f64>], y: &[f64], l2: f64) -> Result<Self, PredictorError> {
        debug_assert_eq!(x.len(), y.len());
        let d = x[0].len();
        let dim = d + 1; // weights plus intercept
        let mut a = vec![vec![0.0f64; dim]; dim];
        let mut rhs = vec![0.0f64; dim];
        for (xi, &yi) in x.iter().zip(y) {
            for p in 0..d {
                let xp = xi[p];
                for q in p..d {
                    a[p][q] += xp * xi[q];
                }
                a[p][d] += xp;
                rhs[p] += xp * yi;
            }
            a[d][d] += 1.0;
            rhs[d] += yi;
        }
        for p in 0..d {
            a[p][p] += l2;
        }
        for p in 0..dim {
            for q in 0..p {
                a[p][q] = a[q][p];
            }
        }
        let sol = solve_spd(a, rhs)?;
        let bias = sol[d];
        let mut weights = sol;
        weights.truncate(d);
        Ok(RidgeModel { weights, bias, l2 })
    }

    pub fn predict(&self, input: &[f64]) -> f64 {
        debug_assert_eq!(input.len(), self.weights.len());
        self.weights
            .iter()
            .zip(input)
            .map(|(w, x)| w * x)
            .sum::<f64>()
            + self.bias
    }
}

/// Solves `A x = b` for symmetric positive-definite `A` by in-place
/// Cholesky factorization.
fn solve_spd(mut a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Vec<f64>, PredictorError> {
    let n = a.len();
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= a[i][k] * a[j][k];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(PredictorError::Singular);
                }
                a[i][i] = sum.sqrt();
            } else {
                a[i][j] = sum / a[j][j];
            }
        }
    }
    // forward substitution L z = b
    let mut z = b;
    for i in 0..n {
        for k in 0..i {
            let v = a[i][k] * z[k];
            z[i] -= v;
        }
        z[i] /= a[i][i];
    }
    // back substitution L^T x = z
    for i in (0..n).rev() {
        for k in i + 1..n {
            let v = a[k][i] * z[k];
            z[i] -= v;
        }
        z[i] /= a[i][i];
    }
    Ok(z)
}
