//! Local optimizers used by the likelihood search and the calibration fit:
//! a Nelder-Mead simplex and a Levenberg-Marquardt least-squares loop with
//! central-difference Jacobians. Both are deterministic given the same
//! starting point.

use crate::scalar::Real;

/// Outcome of a minimization run.
#[derive(Debug, Clone)]
pub struct MinimizeResult<T: Real> {
    pub params: Vec<T>,
    pub objective: T,
    pub evaluations: usize,
    pub converged: bool,
}

/// Nelder-Mead downhill simplex. Stops when the best objective improves by
/// less than `tol` over a full iteration, or after `max_evals` objective
/// evaluations.
pub fn nelder_mead<T: Real>(
    objective: impl Fn(&[T]) -> T,
    start: &[T],
    initial_step: T,
    tol: T,
    max_evals: usize,
) -> MinimizeResult<T> {
    let n = start.len();
    let mut evals = 0usize;
    let eval = |p: &[T], evals: &mut usize| {
        *evals += 1;
        objective(p)
    };

    // Simplex: start point plus one vertex per coordinate.
    let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(n + 1);
    let f0 = eval(start, &mut evals);
    simplex.push((start.to_vec(), f0));
    for i in 0..n {
        let mut v = start.to_vec();
        let step = if v[i].abs() > T::one() {
            initial_step * v[i].abs()
        } else {
            initial_step
        };
        v[i] = v[i] + step;
        let f = eval(&v, &mut evals);
        simplex.push((v, f));
    }

    let (alpha, gamma, rho, sigma) = (T::one(), T::two(), T::half(), T::half());
    let mut converged = false;

    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("NaN objective"));
        let best_before = simplex[0].1;

        // Centroid of everything but the worst vertex.
        let mut centroid = vec![T::zero(); n];
        for (v, _) in &simplex[..n] {
            for (ci, vi) in centroid.iter_mut().zip(v) {
                *ci = *ci + *vi;
            }
        }
        for ci in centroid.iter_mut() {
            *ci = *ci / T::of(n as f64);
        }

        let worst = simplex[n].clone();
        let lerp = |a: &[T], b: &[T], t: T| -> Vec<T> {
            a.iter().zip(b).map(|(x, y)| *x + t * (*y - *x)).collect()
        };

        // Reflect.
        let reflected = lerp(&centroid, &worst.0, -alpha);
        let f_r = eval(&reflected, &mut evals);
        if f_r < simplex[0].1 {
            // Expand.
            let expanded = lerp(&centroid, &worst.0, -gamma);
            let f_e = eval(&expanded, &mut evals);
            simplex[n] = if f_e < f_r {
                (expanded, f_e)
            } else {
                (reflected, f_r)
            };
        } else if f_r < simplex[n - 1].1 {
            simplex[n] = (reflected, f_r);
        } else {
            // Contract (toward the reflection if it helped at all).
            let contracted = if f_r < worst.1 {
                lerp(&centroid, &reflected, rho)
            } else {
                lerp(&centroid, &worst.0, rho)
            };
            let f_c = eval(&contracted, &mut evals);
            if f_c < worst.1.min(f_r) {
                simplex[n] = (contracted, f_c);
            } else {
                // Shrink toward the best vertex.
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    entry.0 = lerp(&best, &entry.0, sigma);
                    entry.1 = eval(&entry.0, &mut evals);
                }
            }
        }

        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("NaN objective"));
        let improvement = best_before - simplex[0].1;
        let spread = simplex[n].1 - simplex[0].1;
        if improvement < tol && spread < tol.max(T::epsilon() * T::of(16.0)) {
            converged = true;
            break;
        }
    }

    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("NaN objective"));
    MinimizeResult {
        params: simplex[0].0.clone(),
        objective: simplex[0].1,
        evaluations: evals,
        converged,
    }
}

/// Levenberg-Marquardt for least squares: minimizes Σ r_i(p)².
/// The Jacobian is formed by central differences.
pub fn levenberg_marquardt<T: Real>(
    residuals: impl Fn(&[T]) -> Vec<T>,
    start: &[T],
    max_iters: usize,
) -> MinimizeResult<T> {
    let n = start.len();
    let mut params = start.to_vec();
    let mut r = residuals(&params);
    let mut cost = dot(&r, &r);
    let mut evals = 1usize;
    let mut lambda = T::of(1e-3);
    let mut converged = false;

    let h_base = T::epsilon().powf(T::of(1.0 / 3.0));

    for _ in 0..max_iters {
        // J[i][j] = ∂r_i/∂p_j by central differences.
        let m = r.len();
        let mut jac = vec![vec![T::zero(); n]; m];
        for j in 0..n {
            let h = h_base * params[j].abs().max(T::one());
            let mut plus = params.clone();
            plus[j] = plus[j] + h;
            let mut minus = params.clone();
            minus[j] = minus[j] - h;
            let rp = residuals(&plus);
            let rm = residuals(&minus);
            evals += 2;
            for i in 0..m {
                jac[i][j] = (rp[i] - rm[i]) / (T::two() * h);
            }
        }
        // Normal equations (JᵀJ + λ·diag(JᵀJ)) δ = −Jᵀr.
        let mut jtj = vec![vec![T::zero(); n]; n];
        let mut jtr = vec![T::zero(); n];
        for i in 0..m {
            for a in 0..n {
                jtr[a] = jtr[a] + jac[i][a] * r[i];
                for b in 0..n {
                    jtj[a][b] = jtj[a][b] + jac[i][a] * jac[i][b];
                }
            }
        }

        let mut improved = false;
        for _ in 0..16 {
            let mut damped = jtj.clone();
            for (a, row) in damped.iter_mut().enumerate() {
                row[a] = row[a] + lambda * row[a].max(T::of(1e-12));
            }
            let rhs: Vec<T> = jtr.iter().map(|v| -*v).collect();
            let Some(delta) = solve_dense(&damped, &rhs) else {
                lambda = lambda * T::of(10.0);
                continue;
            };
            let trial: Vec<T> = params.iter().zip(&delta).map(|(p, d)| *p + *d).collect();
            let r_trial = residuals(&trial);
            evals += 1;
            let cost_trial = dot(&r_trial, &r_trial);
            if cost_trial < cost {
                let gain = cost - cost_trial;
                params = trial;
                r = r_trial;
                cost = cost_trial;
                lambda = (lambda * T::of(0.3)).max(T::of(1e-12));
                improved = true;
                if gain < T::of(1e-16) * (T::one() + cost) {
                    converged = true;
                }
                break;
            }
            lambda = lambda * T::of(10.0);
        }
        if !improved || converged {
            converged = true;
            break;
        }
    }

    MinimizeResult {
        params,
        objective: cost,
        evaluations: evals,
        converged,
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// Gaussian elimination with partial pivoting; `None` on a singular system.
pub fn solve_dense<T: Real>(matrix: &[Vec<T>], rhs: &[T]) -> Option<Vec<T>> {
    let n = rhs.len();
    let mut a: Vec<Vec<T>> = matrix
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut r = row.clone();
            r.push(*b);
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .expect("NaN pivot")
        })?;
        if a[pivot][col].abs() < T::of(1e-300) {
            return None;
        }
        a.swap(col, pivot);
        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            for k in col..=n {
                let upper = a[col][k];
                a[row][k] = a[row][k] - factor * upper;
            }
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = a[row][n];
        for k in (row + 1)..n {
            acc = acc - a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}
