//! BFGS with central-difference gradients and Armijo backtracking.
//!
//! Fills the sequential-quadratic-programming slot of the method lineup:
//! with no constraints present, that approach reduces to quasi-Newton
//! steps, so reports label this method "quasi-newton".

use super::{central_gradient, Driver, Objective, OptimizerConfig};

const GRADIENT_FLOOR: f64 = 1e-12;
const MIN_STEP: f64 = 1e-14;
const CURVATURE_FLOOR: f64 = 1e-12;

pub(crate) fn run(obj: &Objective, x0: &[f64], cfg: &OptimizerConfig, driver: &mut Driver) {
    let d = obj.dim();
    let p = cfg.quasi_newton;
    let mut x = x0.to_vec();
    let mut f = obj.eval(&x);
    driver.record(&x, f);

    // Inverse Hessian approximation, dense row-major.
    let mut h_inv = identity(d);
    let mut previous: Option<(Vec<f64>, Vec<f64>)> = None; // (x, gradient)

    while !driver.should_stop() {
        let g = central_gradient(obj, &x, p.fd_step);
        if let Some((x_prev, g_prev)) = previous.take() {
            let s: Vec<f64> = (0..d).map(|k| x[k] - x_prev[k]).collect();
            let y: Vec<f64> = (0..d).map(|k| g[k] - g_prev[k]).collect();
            bfgs_update(&mut h_inv, &s, &y);
        }
        let g_norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if g_norm < GRADIENT_FLOOR {
            driver.mark_converged();
            break;
        }
        let mut direction = neg_matvec(&h_inv, &g);
        let mut slope: f64 = direction.iter().zip(&g).map(|(p, g)| p * g).sum();
        if slope >= 0.0 {
            // Curvature information went stale; restart from steepest descent.
            h_inv = identity(d);
            direction = g.iter().map(|v| -v).collect();
            slope = -g.iter().map(|v| v * v).sum::<f64>();
        }

        let mut step = 1.0;
        let mut accepted = None;
        while step >= MIN_STEP {
            let candidate: Vec<f64> = (0..d).map(|k| x[k] + step * direction[k]).collect();
            let value = obj.eval(&candidate);
            if value <= f + p.armijo * step * slope {
                accepted = Some((candidate, value));
                break;
            }
            step *= p.backtrack;
        }
        let Some((x_new, f_new)) = accepted else {
            // No descent step exists at this resolution.
            driver.mark_converged();
            break;
        };
        previous = Some((x.clone(), g));
        x = x_new;
        f = f_new;
        driver.record(&x, f);
    }
}

fn identity(d: usize) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for k in 0..d {
        m[k * d + k] = 1.0;
    }
    m
}

fn neg_matvec(m: &[f64], v: &[f64]) -> Vec<f64> {
    let d = v.len();
    (0..d)
        .map(|i| -(0..d).map(|j| m[i * d + j] * v[j]).sum::<f64>())
        .collect()
}

/// Standard inverse-Hessian update; skipped when curvature is too small.
fn bfgs_update(h_inv: &mut [f64], s: &[f64], y: &[f64]) {
    let d = s.len();
    let sy: f64 = s.iter().zip(y).map(|(a, b)| a * b).sum();
    if sy <= CURVATURE_FLOOR {
        return;
    }
    let rho = 1.0 / sy;
    // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
    let hy: Vec<f64> = (0..d)
        .map(|i| (0..d).map(|j| h_inv[i * d + j] * y[j]).sum())
        .collect();
    let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
    for i in 0..d {
        for j in 0..d {
            h_inv[i * d + j] += -rho * (s[i] * hy[j] + hy[i] * s[j])
                + rho * rho * yhy * s[i] * s[j]
                + rho * s[i] * s[j];
        }
    }
}
