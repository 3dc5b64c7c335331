//! Small dense Levenberg–Marquardt solver for the fringe-analysis fits.

use crate::error::{Error, Result};

pub(crate) const MAX_ITERATIONS: usize = 200;
pub(crate) const PARAM_RTOL: f64 = 1e-10;

/// Weighted residuals `(model - data) / sigma` and their Jacobian rows.
pub(crate) trait Residuals<const P: usize> {
    fn len(&self) -> usize;
    fn eval(&self, params: &[f64; P], residuals: &mut [f64], jacobian: &mut [[f64; P]]);
}

#[derive(Debug, Clone)]
pub(crate) struct LsqSolution<const P: usize> {
    pub params: [f64; P],
    pub chi2: f64,
    /// Inverse of `JᵀJ` at the solution; `None` when it is singular.
    pub covariance: Option<[[f64; P]; P]>,
    #[allow(dead_code)]
    pub iterations: usize,
}

fn normal_equations<const P: usize>(r: &[f64], jac: &[[f64; P]]) -> ([[f64; P]; P], [f64; P], f64) {
    let mut a = [[0.0; P]; P];
    let mut g = [0.0; P];
    let mut chi2 = 0.0;
    for (ri, row) in r.iter().zip(jac) {
        chi2 += ri * ri;
        for i in 0..P {
            g[i] += row[i] * ri;
            for j in 0..=i {
                a[i][j] += row[i] * row[j];
            }
        }
    }
    for i in 0..P {
        for j in 0..i {
            a[j][i] = a[i][j];
        }
    }
    (a, g, chi2)
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub(crate) fn solve<const P: usize>(mut a: [[f64; P]; P], mut b: [f64; P]) -> Option<[f64; P]> {
    let scale = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    for col in 0..P {
        let pivot = (col..P).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= scale * 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..P {
            let f = a[row][col] / a[col][col];
            for k in col..P {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; P];
    for i in (0..P).rev() {
        let mut s = b[i];
        for k in i + 1..P {
            s -= a[i][k] * x[k];
        }
        x[i] = s / a[i][i];
    }
    Some(x)
}

pub(crate) fn invert<const P: usize>(a: &[[f64; P]; P]) -> Option<[[f64; P]; P]> {
    // equilibrate so wildly different parameter units do not trip the pivot test
    let d: Vec<f64> = (0..P).map(|i| a[i][i].abs().sqrt()).collect();
    if d.iter().any(|&x| x == 0.0 || !x.is_finite()) {
        return None;
    }
    let mut scaled = [[0.0; P]; P];
    for i in 0..P {
        for j in 0..P {
            scaled[i][j] = a[i][j] / (d[i] * d[j]);
        }
    }
    let mut inv = [[0.0; P]; P];
    for j in 0..P {
        let mut e = [0.0; P];
        e[j] = 1.0;
        let col = solve(scaled, e)?;
        for i in 0..P {
            inv[i][j] = col[i] / (d[i] * d[j]);
        }
    }
    Some(inv)
}

/// Minimizes the sum of squared residuals starting from `init`.
///
/// `scale` gives a typical magnitude per parameter; convergence is declared
/// when every step satisfies `|δ_i| ≤ 1e-10 (|p_i| + scale_i)`.
pub(crate) fn levenberg_marquardt<const P: usize, R: Residuals<P>>(
    problem: &R,
    init: [f64; P],
    scale: [f64; P],
    what: &'static str,
) -> Result<LsqSolution<P>> {
    let n = problem.len();
    let mut r = vec![0.0; n];
    let mut jac = vec![[0.0; P]; n];
    let mut r_try = vec![0.0; n];
    let mut jac_try = vec![[0.0; P]; n];

    let mut params = init;
    problem.eval(&params, &mut r, &mut jac);
    let (mut a, mut g, mut chi2) = normal_equations(&r, &jac);
    if !chi2.is_finite() {
        return Err(Error::domain(format!("{what}: non-finite residuals at the starting point")));
    }
    let mut lambda = 1e-3;

    for iter in 1..=MAX_ITERATIONS {
        if chi2 == 0.0 {
            return Ok(finish(params, chi2, &a, iter));
        }
        let mut damped = a;
        for i in 0..P {
            let d = if a[i][i] > 0.0 { a[i][i] } else { 1.0 };
            damped[i][i] += lambda * d;
        }
        let neg_g = g.map(|x| -x);
        let Some(step) = solve(damped, neg_g) else {
            lambda *= 10.0;
            if lambda > 1e20 {
                return Err(Error::NoConvergence { what, iterations: iter });
            }
            continue;
        };
        let mut trial = params;
        for i in 0..P {
            trial[i] += step[i];
        }
        problem.eval(&trial, &mut r_try, &mut jac_try);
        let (a_t, g_t, chi2_t) = normal_equations(&r_try, &jac_try);
        let small = (0..P).all(|i| step[i].abs() <= PARAM_RTOL * (params[i].abs() + scale[i]));

        if chi2_t.is_finite() && chi2_t <= chi2 {
            params = trial;
            a = a_t;
            g = g_t;
            chi2 = chi2_t;
            std::mem::swap(&mut r, &mut r_try);
            std::mem::swap(&mut jac, &mut jac_try);
            lambda = (lambda / 10.0).max(1e-12);
            if small {
                return Ok(finish(params, chi2, &a, iter));
            }
        } else {
            if small {
                return Ok(finish(params, chi2, &a, iter));
            }
            lambda *= 10.0;
            if lambda > 1e20 {
                // no downhill step exists at any damping: a minimum to round-off
                return Ok(finish(params, chi2, &a, iter));
            }
        }
    }
    Err(Error::NoConvergence {
        what,
        iterations: MAX_ITERATIONS,
    })
}

fn finish<const P: usize>(params: [f64; P], chi2: f64, a: &[[f64; P]; P], iterations: usize) -> LsqSolution<P> {
    LsqSolution {
        params,
        chi2,
        covariance: invert(a),
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Exp {
        x: Vec<f64>,
        y: Vec<f64>,
    }

    impl Residuals<2> for Exp {
        fn len(&self) -> usize {
            self.x.len()
        }
        fn eval(&self, p: &[f64; 2], r: &mut [f64], j: &mut [[f64; 2]]) {
            for i in 0..self.x.len() {
                let e = (-p[1] * self.x[i]).exp();
                r[i] = p[0] * e - self.y[i];
                j[i] = [e, -p[0] * self.x[i] * e];
            }
        }
    }

    #[test]
    fn recovers_exponential_decay() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.25).collect();
        let y = x.iter().map(|&t| 3.0 * (-0.7 * t).exp()).collect();
        let sol = levenberg_marquardt(&Exp { x, y }, [1.0, 0.1], [1.0, 1.0], "test").unwrap();
        assert!((sol.params[0] - 3.0).abs() < 1e-9);
        assert!((sol.params[1] - 0.7).abs() < 1e-9);
        assert!(sol.chi2 < 1e-20);
    }

    #[test]
    fn inverse_of_known_matrix() {
        let a = [[4.0, 1.0], [1.0, 3.0]];
        let inv = invert(&a).unwrap();
        let det = 11.0;
        assert!((inv[0][0] - 3.0 / det).abs() < 1e-15);
        assert!((inv[0][1] + 1.0 / det).abs() < 1e-15);
        assert!(invert(&[[1.0, 0.0], [0.0, 0.0]]).is_none());
    }
}
