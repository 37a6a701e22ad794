//! Classical outer-loop optimizers over circuit parameters with uniform
//! evaluation accounting and trace recording.
//!
//! All methods share one stopping rule: converged when the best energy
//! improves by no more than the tolerance over the last 10 iterations,
//! otherwise iteration or evaluation budgets end the run.

mod adam;
mod nelder_mead;
mod quasi_newton;
mod umda;

use crate::error::{Error, Result};
use crate::qsim::ParameterVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::cell::Cell;
use std::time::{Duration, Instant};

/// Identifiers for the implemented methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Adam,
    NelderMead,
    Umda,
    QuasiNewton,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Adam,
        Method::NelderMead,
        Method::Umda,
        Method::QuasiNewton,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Method::Adam => "adam",
            Method::NelderMead => "nelder-mead",
            Method::Umda => "umda",
            Method::QuasiNewton => "quasi-newton",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        match s {
            "adam" => Ok(Method::Adam),
            "nelder-mead" => Ok(Method::NelderMead),
            "umda" => Ok(Method::Umda),
            "quasi-newton" => Ok(Method::QuasiNewton),
            other => Err(Error::Config(format!("unknown optimizer `{other}`"))),
        }
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    /// Iteration or evaluation budget exhausted.
    MaxIter,
    Timeout,
}

impl Termination {
    pub fn id(&self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIter => "max-iter",
            Termination::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamParams {
    pub step: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub fd_step: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        AdamParams {
            step: 0.05,
            beta1: 0.9,
            beta2: 0.999,
            fd_step: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadParams {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
}

impl Default for NelderMeadParams {
    fn default() -> Self {
        NelderMeadParams {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UmdaParams {
    pub population: usize,
    pub elite_fraction: f64,
    pub variance_floor: f64,
    /// Standard deviation of the initial sampling distribution around x0.
    pub initial_std: f64,
}

impl Default for UmdaParams {
    fn default() -> Self {
        UmdaParams {
            population: 40,
            elite_fraction: 0.25,
            variance_floor: 1e-6,
            initial_std: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiNewtonParams {
    pub fd_step: f64,
    /// Armijo sufficient-decrease constant for backtracking.
    pub armijo: f64,
    pub backtrack: f64,
}

impl Default for QuasiNewtonParams {
    fn default() -> Self {
        QuasiNewtonParams {
            fd_step: 1e-3,
            armijo: 1e-4,
            backtrack: 0.5,
        }
    }
}

/// Method selection, budgets and per-method knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub method: Method,
    pub max_iter: usize,
    pub max_evals: u64,
    pub tolerance: f64,
    pub seed: u64,
    #[serde(skip)]
    pub timeout: Option<Duration>,
    pub adam: AdamParams,
    pub nelder_mead: NelderMeadParams,
    pub umda: UmdaParams,
    pub quasi_newton: QuasiNewtonParams,
}

impl OptimizerConfig {
    pub fn new(method: Method) -> Self {
        OptimizerConfig {
            method,
            max_iter: 500,
            max_evals: 20_000,
            tolerance: 1e-6,
            seed: 0,
            timeout: None,
            adam: AdamParams::default(),
            nelder_mead: NelderMeadParams::default(),
            umda: UmdaParams::default(),
            quasi_newton: QuasiNewtonParams::default(),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if dim == 0 {
            return Err(Error::Config("objective dimension must be positive".into()));
        }
        if self.max_iter == 0 || self.max_evals == 0 {
            return Err(Error::Config("budgets must be positive".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        if !(self.umda.elite_fraction > 0.0 && self.umda.elite_fraction < 1.0) {
            return Err(Error::Config("elite fraction must lie in (0, 1)".into()));
        }
        if self.umda.population < 2 {
            return Err(Error::Config("population must be at least 2".into()));
        }
        Ok(())
    }

    /// Predicted objective evaluations per iteration of the chosen method.
    pub fn evaluations_per_iteration(&self, dim: usize) -> u64 {
        match self.method {
            Method::Adam | Method::QuasiNewton => 2 * dim as u64 + 1,
            Method::NelderMead => 2,
            Method::Umda => self.umda.population as u64,
        }
    }
}

/// Predicted per-iteration evaluation cost under default knobs.
pub fn evaluation_cost(method: Method, dim: usize) -> u64 {
    OptimizerConfig::new(method).evaluations_per_iteration(dim)
}

/// A counting objective: every call to [`Objective::eval`] increments the
/// counter exactly once, gradient probes included.
pub struct Objective<'a> {
    dim: usize,
    f: Box<dyn Fn(&[f64]) -> f64 + 'a>,
    evals: Cell<u64>,
}

impl<'a> Objective<'a> {
    pub fn new(dim: usize, f: impl Fn(&[f64]) -> f64 + 'a) -> Self {
        Objective {
            dim,
            f: Box::new(f),
            evals: Cell::new(0),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim, "objective called with wrong dimension");
        self.evals.set(self.evals.get() + 1);
        (self.f)(x)
    }

    pub fn evaluations(&self) -> u64 {
        self.evals.get()
    }
}

/// Full history of one run.
#[derive(Debug, Clone)]
pub struct OptimizerTrace {
    pub method: Method,
    /// Accepted iterates, the initial point first.
    pub params: Vec<Vec<f64>>,
    pub energies: Vec<f64>,
    pub best_energies: Vec<f64>,
    /// Cumulative evaluation count at each accepted iterate.
    pub evals_at: Vec<u64>,
    pub total_evaluations: u64,
    pub termination: Termination,
    pub wall_time: Duration,
}

impl OptimizerTrace {
    pub fn iterations(&self) -> usize {
        self.params.len().saturating_sub(1)
    }

    pub fn best_energy(&self) -> f64 {
        *self.best_energies.last().expect("trace is never empty")
    }

    /// Parameters of the lowest-energy iterate.
    pub fn best_params(&self) -> &[f64] {
        let best =
            self.energies
                .iter()
                .enumerate()
                .fold((0usize, f64::INFINITY), |acc, (i, &e)| {
                    if e < acc.1 {
                        (i, e)
                    } else {
                        acc
                    }
                });
        &self.params[best.0]
    }
}

/// Parameter initialization strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitStrategy {
    LinearRamp,
    UniformRandom,
}

/// Produces starting angles for a depth-p circuit.
///
/// The linear ramp rises in gamma and falls in beta, mirroring an annealing
/// schedule; the random strategy draws gamma from [0, pi) and beta from
/// [0, pi/2), seeded.
pub fn init_params(p: usize, strategy: InitStrategy, seed: u64) -> Result<ParameterVector> {
    if p == 0 {
        return Err(Error::Config("depth must be at least 1".into()));
    }
    match strategy {
        InitStrategy::LinearRamp => {
            let gammas = (1..=p).map(|k| 0.5 * k as f64 / p as f64).collect();
            let betas = (1..=p).map(|k| 0.5 * (1.0 - k as f64 / p as f64)).collect();
            ParameterVector::new(gammas, betas)
        }
        InitStrategy::UniformRandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let gammas = (0..p)
                .map(|_| rng.gen_range(0.0..std::f64::consts::PI))
                .collect();
            let betas = (0..p)
                .map(|_| rng.gen_range(0.0..std::f64::consts::FRAC_PI_2))
                .collect();
            ParameterVector::new(gammas, betas)
        }
    }
}

/// Runs the configured method until convergence or budget exhaustion.
///
/// Deterministic: identical objective, start point and configuration
/// (including the seed) produce identical traces.
pub fn minimize(obj: &Objective, x0: &[f64], cfg: &OptimizerConfig) -> Result<OptimizerTrace> {
    if x0.len() != obj.dim() {
        return Err(Error::DimensionMismatch {
            expected: obj.dim(),
            got: x0.len(),
        });
    }
    cfg.validate(obj.dim())?;
    let mut driver = Driver::new(obj, cfg);
    match cfg.method {
        Method::Adam => adam::run(obj, x0, cfg, &mut driver),
        Method::NelderMead => nelder_mead::run(obj, x0, cfg, &mut driver),
        Method::Umda => umda::run(obj, x0, cfg, &mut driver),
        Method::QuasiNewton => quasi_newton::run(obj, x0, cfg, &mut driver),
    }
    Ok(driver.finish())
}

/// Convergence window for the shared stopping rule.
const STALL_WINDOW: usize = 10;

/// Shared trace recorder and stop detector.
pub(crate) struct Driver<'a, 'b> {
    obj: &'a Objective<'b>,
    cfg: &'a OptimizerConfig,
    started: Instant,
    params: Vec<Vec<f64>>,
    energies: Vec<f64>,
    best: Vec<f64>,
    evals_at: Vec<u64>,
    termination: Option<Termination>,
}

impl<'a, 'b> Driver<'a, 'b> {
    fn new(obj: &'a Objective<'b>, cfg: &'a OptimizerConfig) -> Self {
        Driver {
            obj,
            cfg,
            started: Instant::now(),
            params: Vec::new(),
            energies: Vec::new(),
            best: Vec::new(),
            evals_at: Vec::new(),
            termination: None,
        }
    }

    /// Appends an accepted iterate.
    pub(crate) fn record(&mut self, x: &[f64], energy: f64) {
        let best = match self.best.last() {
            Some(&b) => b.min(energy),
            None => energy,
        };
        self.params.push(x.to_vec());
        self.energies.push(energy);
        self.best.push(best);
        self.evals_at.push(self.obj.evaluations());
    }

    /// Decides whether the run is over; sets the termination reason once.
    pub(crate) fn should_stop(&mut self) -> bool {
        if self.termination.is_some() {
            return true;
        }
        let iterations = self.params.len().saturating_sub(1);
        let k = self.best.len();
        if k > STALL_WINDOW
            && self.best[k - 1 - STALL_WINDOW] - self.best[k - 1] <= self.cfg.tolerance
        {
            self.termination = Some(Termination::Converged);
        } else if let Some(limit) = self.cfg.timeout {
            if self.started.elapsed() >= limit {
                self.termination = Some(Termination::Timeout);
            }
        }
        if self.termination.is_none()
            && (iterations >= self.cfg.max_iter || self.obj.evaluations() >= self.cfg.max_evals)
        {
            self.termination = Some(Termination::MaxIter);
        }
        self.termination.is_some()
    }

    /// Methods call this when they run out of moves (degenerate simplex,
    /// vanished gradient).
    pub(crate) fn mark_converged(&mut self) {
        self.termination.get_or_insert(Termination::Converged);
    }

    fn finish(self) -> OptimizerTrace {
        OptimizerTrace {
            method: self.cfg.method,
            total_evaluations: self.obj.evaluations(),
            termination: self.termination.unwrap_or(Termination::MaxIter),
            wall_time: self.started.elapsed(),
            params: self.params,
            energies: self.energies,
            best_energies: self.best,
            evals_at: self.evals_at,
        }
    }
}

/// Central-difference gradient; costs exactly `2 * dim` evaluations.
pub(crate) fn central_gradient(obj: &Objective, x: &[f64], step: f64) -> Vec<f64> {
    let mut gradient = Vec::with_capacity(x.len());
    let mut probe = x.to_vec();
    for k in 0..x.len() {
        probe[k] = x[k] + step;
        let plus = obj.eval(&probe);
        probe[k] = x[k] - step;
        let minus = obj.eval(&probe);
        probe[k] = x[k];
        gradient.push((plus - minus) / (2.0 * step));
    }
    gradient
}
