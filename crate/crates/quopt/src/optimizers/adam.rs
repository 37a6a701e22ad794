//! Adam with central-difference gradients.

use super::{central_gradient, Driver, Objective, OptimizerConfig};

const EPSILON: f64 = 1e-8;

pub(crate) fn run(obj: &Objective, x0: &[f64], cfg: &OptimizerConfig, driver: &mut Driver) {
    let d = obj.dim();
    let p = cfg.adam;
    let mut x = x0.to_vec();
    driver.record(&x, obj.eval(&x));

    let mut m = vec![0.0; d];
    let mut v = vec![0.0; d];
    let mut t = 0u32;
    while !driver.should_stop() {
        t += 1;
        let g = central_gradient(obj, &x, p.fd_step);
        let bias1 = 1.0 - p.beta1.powi(t as i32);
        let bias2 = 1.0 - p.beta2.powi(t as i32);
        for k in 0..d {
            m[k] = p.beta1 * m[k] + (1.0 - p.beta1) * g[k];
            v[k] = p.beta2 * v[k] + (1.0 - p.beta2) * g[k] * g[k];
            let m_hat = m[k] / bias1;
            let v_hat = v[k] / bias2;
            x[k] -= p.step * m_hat / (v_hat.sqrt() + EPSILON);
        }
        driver.record(&x, obj.eval(&x));
    }
}
