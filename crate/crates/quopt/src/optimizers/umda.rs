//! Continuous univariate marginal distribution algorithm: independent
//! per-dimension Gaussians refit to the elite fraction each generation.

use super::{Driver, Objective, OptimizerConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub(crate) fn run(obj: &Objective, x0: &[f64], cfg: &OptimizerConfig, driver: &mut Driver) {
    let d = obj.dim();
    let p = cfg.umda;
    let elite_count =
        ((p.population as f64 * p.elite_fraction).ceil() as usize).clamp(1, p.population);
    let std_floor = p.variance_floor.sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut mean = x0.to_vec();
    let mut std = vec![p.initial_std; d];

    driver.record(x0, obj.eval(x0));

    let mut samples: Vec<(Vec<f64>, f64)> = Vec::with_capacity(p.population);
    while !driver.should_stop() {
        samples.clear();
        for _ in 0..p.population {
            let x: Vec<f64> = (0..d)
                .map(|k| mean[k] + std[k] * standard_normal(&mut rng))
                .collect();
            let value = obj.eval(&x);
            samples.push((x, value));
        }
        samples.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("objective returned NaN"));
        let elites = &samples[..elite_count];
        for k in 0..d {
            let m: f64 = elites.iter().map(|(x, _)| x[k]).sum::<f64>() / elite_count as f64;
            let var: f64 =
                elites.iter().map(|(x, _)| (x[k] - m).powi(2)).sum::<f64>() / elite_count as f64;
            mean[k] = m;
            std[k] = var.sqrt().max(std_floor);
        }
        let generation_best = &samples[0];
        driver.record(&generation_best.0, generation_best.1);
    }
}

/// Box-Muller draw; two uniforms per call keep the stream reproducible.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
