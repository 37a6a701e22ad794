//! Run-analysis artifacts: energy traces, loss-landscape plane scans and
//! 2-D parameter-trajectory reductions, exportable as tabular text files.

use crate::error::{Error, Result};
use crate::optimizers::{Objective, OptimizerTrace};
use std::io::Write;
use std::path::Path;

/// Energies of an objective over a plane through parameter space.
#[derive(Debug, Clone)]
pub struct LandscapeScan {
    pub center: Vec<f64>,
    /// Orthonormal in-plane directions.
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Half-extent along each axis.
    pub extent: f64,
    /// Grid has (2k+1) x (2k+1) cells.
    pub resolution: usize,
    /// energies[i][j] at offsets (a_i, b_j), both running -extent..extent.
    pub energies: Vec<Vec<f64>>,
}

impl LandscapeScan {
    /// Offset along an axis for grid index `i`.
    pub fn offset(&self, i: usize) -> f64 {
        (i as f64 - self.resolution as f64) / self.resolution as f64 * self.extent
    }
}

/// 2-D reduction of an optimization trajectory via its two leading
/// principal components.
#[derive(Debug, Clone)]
pub struct TrajectoryProjection {
    pub points: Vec<[f64; 2]>,
    pub components: [Vec<f64>; 2],
    /// Fractions of total variance captured, non-increasing.
    pub explained: [f64; 2],
}

/// Evaluates the objective over the plane spanned by `u` and `v` around
/// `center`. Inputs are orthonormalized by Gram-Schmidt; parallel inputs
/// are an error. Costs exactly (2k+1)^2 objective calls and the center cell
/// is a direct evaluation of `center`.
pub fn landscape_scan(
    obj: &Objective,
    center: &[f64],
    u: &[f64],
    v: &[f64],
    extent: f64,
    k: usize,
) -> Result<LandscapeScan> {
    let d = center.len();
    if u.len() != d || v.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: u.len().max(v.len()),
        });
    }
    if k < 1 {
        return Err(Error::Config("resolution must be at least 1".into()));
    }
    if !(extent > 0.0) {
        return Err(Error::Config("extent must be positive".into()));
    }
    let (u, v) = orthonormalize(u, v)?;
    let side = 2 * k + 1;
    let mut energies = Vec::with_capacity(side);
    let mut point = vec![0.0; d];
    for i in 0..side {
        let a = (i as f64 - k as f64) / k as f64 * extent;
        let mut row = Vec::with_capacity(side);
        for j in 0..side {
            let b = (j as f64 - k as f64) / k as f64 * extent;
            for t in 0..d {
                point[t] = center[t] + a * u[t] + b * v[t];
            }
            row.push(obj.eval(&point));
        }
        energies.push(row);
    }
    Ok(LandscapeScan {
        center: center.to_vec(),
        u,
        v,
        extent,
        resolution: k,
        energies,
    })
}

/// Unit vectors along the first two coordinate axes, the default scan plane.
pub fn axis_plane(d: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if d < 2 {
        return Err(Error::Config(
            "a plane scan needs at least 2 parameters".into(),
        ));
    }
    let mut u = vec![0.0; d];
    let mut v = vec![0.0; d];
    u[0] = 1.0;
    v[1] = 1.0;
    Ok((u, v))
}

fn orthonormalize(u: &[f64], v: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let norm_u = norm(u);
    if norm_u < 1e-12 {
        return Err(Error::Degenerate("first direction has zero length".into()));
    }
    let u: Vec<f64> = u.iter().map(|x| x / norm_u).collect();
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let w: Vec<f64> = v.iter().zip(&u).map(|(b, a)| b - dot * a).collect();
    let norm_w = norm(&w);
    if norm_w < 1e-12 * norm(v).max(1.0) {
        return Err(Error::Degenerate("scan directions are parallel".into()));
    }
    Ok((u, w.into_iter().map(|x| x / norm_w).collect()))
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Mean-centers the accepted iterates, extracts the top two principal
/// components and projects onto them.
///
/// A constant trajectory yields all-zero coordinates with zero explained
/// variance.
pub fn project_trajectory(trace: &OptimizerTrace) -> Result<TrajectoryProjection> {
    project_points(&trace.params)
}

/// PCA projection of raw parameter rows (the trace-independent core).
pub fn project_points(rows: &[Vec<f64>]) -> Result<TrajectoryProjection> {
    let count = rows.len();
    if count < 2 {
        return Err(Error::Invalid(
            "projection needs at least 2 iterates".into(),
        ));
    }
    let d = rows[0].len();
    let mut mean = vec![0.0; d];
    for row in rows {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= count as f64;
    }
    let centered: Vec<Vec<f64>> = rows
        .iter()
        .map(|row| row.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();

    // Sample covariance, then its two leading eigenpairs.
    let mut covariance = vec![0.0; d * d];
    for row in &centered {
        for i in 0..d {
            for j in 0..d {
                covariance[i * d + j] += row[i] * row[j];
            }
        }
    }
    let denom = (count - 1) as f64;
    covariance.iter_mut().for_each(|c| *c /= denom);

    let (mut eigenvalues, mut eigenvectors) = jacobi_eigen(&covariance, d);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eigenvalues[b].partial_cmp(&eigenvalues[a]).unwrap());
    eigenvalues = order.iter().map(|&i| eigenvalues[i]).collect();
    eigenvectors = order.iter().map(|&i| eigenvectors[i].clone()).collect();

    let total: f64 = eigenvalues.iter().map(|&l| l.max(0.0)).sum();
    let component = |idx: usize| -> Vec<f64> {
        if idx < d {
            let mut c = eigenvectors[idx].clone();
            // Deterministic sign: the largest-magnitude entry is positive.
            let lead = c
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
                .map(|(i, _)| i)
                .unwrap_or(0);
            if c[lead] < 0.0 {
                c.iter_mut().for_each(|x| *x = -*x);
            }
            c
        } else {
            vec![0.0; d]
        }
    };
    let pc = [component(0), component(1)];
    let explained = if total > 0.0 {
        [
            eigenvalues.first().copied().unwrap_or(0.0).max(0.0) / total,
            eigenvalues.get(1).copied().unwrap_or(0.0).max(0.0) / total,
        ]
    } else {
        [0.0, 0.0]
    };
    let points = centered
        .iter()
        .map(|row| {
            [
                row.iter().zip(&pc[0]).map(|(x, c)| x * c).sum(),
                row.iter().zip(&pc[1]).map(|(x, c)| x * c).sum(),
            ]
        })
        .collect();
    Ok(TrajectoryProjection {
        points,
        components: pc,
        explained,
    })
}

/// Cyclic Jacobi sweeps on a symmetric matrix; returns eigenvalues and
/// row-wise eigenvectors.
fn jacobi_eigen(matrix: &[f64], d: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; d * d];
    for i in 0..d {
        v[i * d + i] = 1.0;
    }
    let scale: f64 = matrix.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1.0);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..d {
            for j in (i + 1)..d {
                off += a[i * d + j].abs();
            }
        }
        if off <= 1e-14 * scale {
            break;
        }
        for i in 0..d {
            for j in (i + 1)..d {
                let apq = a[i * d + j];
                if apq.abs() <= 1e-16 * scale {
                    continue;
                }
                let app = a[i * d + i];
                let aqq = a[j * d + j];
                let theta = 0.5 * (aqq - app) / apq;
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let aik = a[i * d + k];
                    let ajk = a[j * d + k];
                    a[i * d + k] = c * aik - s * ajk;
                    a[j * d + k] = s * aik + c * ajk;
                }
                for k in 0..d {
                    let aki = a[k * d + i];
                    let akj = a[k * d + j];
                    a[k * d + i] = c * aki - s * akj;
                    a[k * d + j] = s * aki + c * akj;
                }
                for k in 0..d {
                    let vik = v[i * d + k];
                    let vjk = v[j * d + k];
                    v[i * d + k] = c * vik - s * vjk;
                    v[j * d + k] = s * vik + c * vjk;
                }
            }
        }
    }
    let eigenvalues = (0..d).map(|i| a[i * d + i]).collect();
    let eigenvectors = (0..d).map(|i| v[i * d..(i + 1) * d].to_vec()).collect();
    (eigenvalues, eigenvectors)
}

/// Writes a trace as tab-separated rows:
/// `iter eval_count energy best_energy param_0 .. param_{d-1}`.
pub fn export_trace(trace: &OptimizerTrace, out: &mut impl Write) -> Result<()> {
    let d = trace.params.first().map_or(0, Vec::len);
    write!(out, "iter\teval_count\tenergy\tbest_energy")?;
    for k in 0..d {
        write!(out, "\tparam_{k}")?;
    }
    writeln!(out)?;
    for i in 0..trace.params.len() {
        write!(
            out,
            "{}\t{}\t{}\t{}",
            i, trace.evals_at[i], trace.energies[i], trace.best_energies[i]
        )?;
        for value in &trace.params[i] {
            write!(out, "\t{value}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Writes a scan as `a b energy` rows over the grid.
pub fn export_landscape(scan: &LandscapeScan, out: &mut impl Write) -> Result<()> {
    writeln!(out, "a\tb\tenergy")?;
    for (i, row) in scan.energies.iter().enumerate() {
        for (j, energy) in row.iter().enumerate() {
            writeln!(out, "{}\t{}\t{}", scan.offset(i), scan.offset(j), energy)?;
        }
    }
    Ok(())
}

/// Writes a projection as `iter x y` rows.
pub fn export_projection(projection: &TrajectoryProjection, out: &mut impl Write) -> Result<()> {
    writeln!(out, "iter\tx\ty")?;
    for (i, [x, y]) in projection.points.iter().enumerate() {
        writeln!(out, "{i}\t{x}\t{y}")?;
    }
    Ok(())
}

/// File-writing convenience used by the command-line layer.
pub fn write_file(path: &Path, render: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut buffer = Vec::new();
    render(&mut buffer)?;
    std::fs::write(path, buffer)?;
    Ok(())
}
