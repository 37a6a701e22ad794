//! Downhill simplex with the standard reflection, expansion, contraction
//! and shrink moves.

use super::{Driver, Objective, OptimizerConfig};

/// Relative offset for nonzero coordinates of the initial simplex.
const NONZERO_DELTA: f64 = 0.05;
/// Absolute offset where a coordinate is exactly zero.
const ZERO_DELTA: f64 = 0.00025;

pub(crate) fn run(obj: &Objective, x0: &[f64], cfg: &OptimizerConfig, driver: &mut Driver) {
    let d = obj.dim();
    let p = cfg.nelder_mead;

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    let f0 = obj.eval(x0);
    simplex.push((x0.to_vec(), f0));
    for k in 0..d {
        let mut vertex = x0.to_vec();
        vertex[k] = if vertex[k] != 0.0 {
            vertex[k] * (1.0 + NONZERO_DELTA)
        } else {
            ZERO_DELTA
        };
        let value = obj.eval(&vertex);
        simplex.push((vertex, value));
    }
    sort_simplex(&mut simplex);
    driver.record(&simplex[0].0, simplex[0].1);

    while !driver.should_stop() {
        let worst = simplex[d].1;
        let second_worst = simplex[d - 1].1;
        let best = simplex[0].1;

        let mut centroid = vec![0.0; d];
        for (vertex, _) in &simplex[..d] {
            for k in 0..d {
                centroid[k] += vertex[k];
            }
        }
        for c in &mut centroid {
            *c /= d as f64;
        }

        let reflected: Vec<f64> = (0..d)
            .map(|k| centroid[k] + p.reflection * (centroid[k] - simplex[d].0[k]))
            .collect();
        let f_reflected = obj.eval(&reflected);

        if f_reflected < best {
            let expanded: Vec<f64> = (0..d)
                .map(|k| centroid[k] + p.expansion * (reflected[k] - centroid[k]))
                .collect();
            let f_expanded = obj.eval(&expanded);
            if f_expanded < f_reflected {
                simplex[d] = (expanded, f_expanded);
            } else {
                simplex[d] = (reflected, f_reflected);
            }
        } else if f_reflected < second_worst {
            simplex[d] = (reflected, f_reflected);
        } else {
            let (toward, f_toward) = if f_reflected < worst {
                (reflected.clone(), f_reflected)
            } else {
                (simplex[d].0.clone(), worst)
            };
            let contracted: Vec<f64> = (0..d)
                .map(|k| centroid[k] + p.contraction * (toward[k] - centroid[k]))
                .collect();
            let f_contracted = obj.eval(&contracted);
            if f_contracted < f_toward {
                simplex[d] = (contracted, f_contracted);
            } else {
                // Shrink everything toward the best vertex.
                let anchor = simplex[0].0.clone();
                for (vertex, value) in simplex.iter_mut().skip(1) {
                    for k in 0..d {
                        vertex[k] = anchor[k] + p.shrink * (vertex[k] - anchor[k]);
                    }
                    *value = obj.eval(vertex);
                }
            }
        }
        sort_simplex(&mut simplex);
        driver.record(&simplex[0].0, simplex[0].1);
    }
}

fn sort_simplex(simplex: &mut [(Vec<f64>, f64)]) {
    // Stable sort keeps insertion order on exact ties, so runs replay
    // identically.
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("objective returned NaN"));
}
