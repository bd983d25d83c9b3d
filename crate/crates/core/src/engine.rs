//! Monte Carlo orchestration: path fan-out, deterministic reduction and
//! run-level statistics.
//!
//! Path `i` of run `k` draws from logical stream `k * n_paths + i`. For the
//! pseudo sampler that is a ChaCha stream index; for Sobol it is the point
//! index (after skipping the origin), so runs use disjoint point blocks.
//! Paths are summed in fixed chunks in index order and the chunk sums are
//! merged in chunk order, so the thread count never changes a result.

use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{HestonError, Result};
use crate::exact_sim::{exact_step, DRAWS_PER_EXACT_STEP};
use crate::model::HestonParams;
use crate::num::{mean_and_std, CompensatedSum, Real};
use crate::products::{
    discounted_payoff, pathwise_delta, pathwise_rho, OptionSpec, PathObservables, Style,
};
use crate::random::{SamplerKind, UniformStream, SOBOL_MAX_DIMENSION};
use crate::schemes::{simulate_path, AveragingPlan, Discretisation, GridSpec, DRAWS_PER_STEP};

/// Paths per reduction chunk.
pub const CHUNK_PATHS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Exact,
    Euler,
    Milstein,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Exact => "exact",
            Scheme::Euler => "euler",
            Scheme::Milstein => "milstein",
        }
    }

    fn discretisation(&self) -> Option<Discretisation> {
        match self {
            Scheme::Exact => None,
            Scheme::Euler => Some(Discretisation::Euler),
            Scheme::Milstein => Some(Discretisation::Milstein),
        }
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Scheme::Exact),
            "euler" => Ok(Scheme::Euler),
            "milstein" => Ok(Scheme::Milstein),
            other => Err(format!(
                "unknown scheme `{other}` (expected exact|euler|milstein)"
            )),
        }
    }
}

/// Worker thread budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Parallelism {
    #[default]
    Auto,
    Fixed(usize),
}

impl Parallelism {
    pub fn threads(&self) -> usize {
        match self {
            Parallelism::Auto => std::thread::available_parallelism().map_or(1, |n| n.get()),
            Parallelism::Fixed(n) => *n,
        }
    }
}

impl std::fmt::Display for Parallelism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Parallelism::Auto => f.write_str("auto"),
            Parallelism::Fixed(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for Parallelism {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(Parallelism::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Parallelism::Fixed(n)),
            _ => Err(format!(
                "invalid parallelism `{s}` (expected auto or a positive integer)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub scheme: Scheme,
    pub sampler: SamplerKind,
    pub n_paths: usize,
    /// Time steps for the discretised schemes; ignored by the exact scheme.
    pub n_steps: usize,
    pub n_runs: usize,
    pub seed: u64,
    pub parallelism: Parallelism,
    /// Allows Sobol points to drive a discretised scheme.
    pub sobol_highdim_ack: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Exact,
            sampler: SamplerKind::Pseudo,
            n_paths: 10_000,
            n_steps: 128,
            n_runs: 30,
            seed: 42,
            parallelism: Parallelism::Auto,
            sobol_highdim_ack: false,
        }
    }
}

impl SimConfig {
    pub fn new(scheme: Scheme, sampler: SamplerKind, n_paths: usize, n_steps: usize) -> Self {
        Self {
            scheme,
            sampler,
            n_paths,
            n_steps,
            ..Self::default()
        }
    }

    pub fn with_runs(mut self, n_runs: usize) -> Self {
        self.n_runs = n_runs;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_parallelism(mut self, parallelism: Parallelism) -> Self {
        self.parallelism = parallelism;
        self
    }

    pub fn with_sobol_ack(mut self) -> Self {
        self.sobol_highdim_ack = true;
        self
    }

    /// Checks the configuration on its own, without a product.
    pub fn validate(&self) -> Result<()> {
        for (name, n) in [
            ("paths", self.n_paths),
            ("steps", self.n_steps),
            ("runs", self.n_runs),
        ] {
            if n == 0 {
                return Err(HestonError::invalid(name, "must be a positive integer"));
            }
        }
        if self.parallelism == Parallelism::Fixed(0) {
            return Err(HestonError::invalid("parallelism", "must be auto or >= 1"));
        }
        if self.sampler == SamplerKind::Sobol
            && self.scheme != Scheme::Exact
            && !self.sobol_highdim_ack
        {
            return Err(HestonError::ConfigInvalid(format!(
                "sobol sampling of the {} scheme is high-dimensional; pass the acknowledge flag to allow it",
                self.scheme.as_str()
            )));
        }
        Ok(())
    }

    /// Logical uniforms per path for `spec`.
    pub fn draws_per_path<T: Real>(&self, spec: &OptionSpec<T>) -> usize {
        match self.scheme {
            Scheme::Exact => DRAWS_PER_EXACT_STEP * spec.observation_times().len(),
            _ => DRAWS_PER_STEP * self.n_steps,
        }
    }
}

/// Run-level summary of one estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct McSummary {
    /// Mean of the per-run estimates.
    pub estimate: f64,
    /// Sample standard deviation of the per-run estimates.
    pub std_error: f64,
    pub per_run_values: Vec<f64>,
    /// Mean wall-clock time per run in milliseconds.
    pub wall_ms: f64,
    pub n_paths: usize,
    pub n_runs: usize,
}

impl McSummary {
    pub fn from_runs(per_run_values: Vec<f64>, wall_ms: f64, n_paths: usize) -> Self {
        let (estimate, std_error) = mean_and_std(&per_run_values);
        Self {
            estimate,
            std_error,
            n_runs: per_run_values.len(),
            per_run_values,
            wall_ms,
            n_paths,
        }
    }

    /// Standard error of the pooled mean, `std_error / sqrt(n_runs)`.
    pub fn sem(&self) -> f64 {
        self.std_error / (self.n_runs as f64).sqrt()
    }

    /// Whether `value` lies within `k` standard errors of the estimate.
    pub fn within(&self, value: f64, k: f64) -> bool {
        (self.estimate - value).abs() <= k * self.std_error
    }
}

/// Price, Delta and Rho estimated from the same paths.
#[derive(Debug, Clone, PartialEq)]
pub struct Greeks {
    pub price: McSummary,
    pub delta: McSummary,
    pub rho: McSummary,
}

#[derive(Debug, Clone, Copy, Default)]
struct ChunkSums {
    payoff: CompensatedSum,
    delta: CompensatedSum,
    rho: CompensatedSum,
}

impl ChunkSums {
    fn merge(&mut self, other: &ChunkSums) {
        self.payoff.merge(&other.payoff);
        self.delta.merge(&other.delta);
        self.rho.merge(&other.rho);
    }
}

enum PathPlan<T> {
    Exact {
        times: Vec<T>,
    },
    Discretised {
        grid: GridSpec<T>,
        plan: AveragingPlan,
        scheme: Discretisation,
    },
}

impl<T: Real> PathPlan<T> {
    fn new(spec: &OptionSpec<T>, config: &SimConfig) -> Result<Self> {
        Ok(match config.scheme.discretisation() {
            None => PathPlan::Exact {
                times: spec.observation_times(),
            },
            Some(scheme) => {
                let grid = GridSpec::new(spec.maturity, config.n_steps)?;
                let plan = match spec.style {
                    Style::European => AveragingPlan::terminal(&grid),
                    Style::AsianArithmetic => AveragingPlan::new(&grid, &spec.averaging_times)?,
                };
                PathPlan::Discretised { grid, plan, scheme }
            }
        })
    }

    fn simulate(
        &self,
        stream: &mut UniformStream,
        params: &HestonParams<T>,
        spot: T,
    ) -> Result<PathObservables<T>> {
        match self {
            PathPlan::Exact { times } => {
                let (mut s, mut v, mut t) = (spot, params.v0, T::zero());
                let mut sum = T::zero();
                let mut weighted = T::zero();
                for &ti in times {
                    let step = exact_step(stream, params, s, v, ti - t)?;
                    s = step.s;
                    v = step.v;
                    t = ti;
                    sum += s;
                    weighted += s * ti;
                }
                let n = T::lit(times.len() as f64);
                Ok(PathObservables {
                    s_t: s,
                    avg: sum / n,
                    tw_sum: weighted / n,
                })
            }
            PathPlan::Discretised { grid, plan, scheme } => {
                Ok(simulate_path(stream, params, grid, *scheme, spot, plan))
            }
        }
    }
}

fn make_stream(config: &SimConfig, dimension: usize, index: u64) -> Result<UniformStream> {
    match config.sampler {
        SamplerKind::Pseudo => Ok(UniformStream::pseudo(config.seed, index)),
        SamplerKind::Sobol => UniformStream::sobol(config.seed, dimension, index, 1),
    }
}

fn check_inputs<T: Real>(
    params: &HestonParams<T>,
    spec: &OptionSpec<T>,
    config: &SimConfig,
) -> Result<usize> {
    params.validate()?;
    spec.validate()?;
    config.validate()?;
    let dimension = config.draws_per_path(spec);
    if config.sampler == SamplerKind::Sobol && dimension > SOBOL_MAX_DIMENSION {
        return Err(HestonError::ConfigInvalid(format!(
            "sobol dimension {dimension} exceeds the supported {SOBOL_MAX_DIMENSION}"
        )));
    }
    Ok(dimension)
}

fn build_pool(parallelism: Parallelism) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.threads())
        .build()
        .map_err(|e| HestonError::ConfigInvalid(format!("thread pool: {e}")))
}

/// Checks every input the engine would reject before simulating: parameter
/// and contract bounds, the configuration, Sobol dimension, averaging dates
/// on the time grid and, for the exact scheme, the transition dof.
pub fn validate_inputs<T: Real>(
    params: &HestonParams<T>,
    spec: &OptionSpec<T>,
    config: &SimConfig,
) -> Result<()> {
    check_inputs(params, spec, config)?;
    PathPlan::new(spec, config)?;
    if config.scheme == Scheme::Exact {
        let dof = params.dof().as_f64();
        if !(dof > 1.0) {
            return Err(HestonError::DofOutOfRange { dof });
        }
    }
    Ok(())
}

/// Single-pass evaluation of payoff, Delta and Rho over all runs.
fn estimate<T: Real>(
    params: &HestonParams<T>,
    spec: &OptionSpec<T>,
    config: &SimConfig,
) -> Result<Greeks> {
    let dimension = check_inputs(params, spec, config)?;
    let plan = PathPlan::new(spec, config)?;
    let pool = build_pool(config.parallelism)?;
    let n = config.n_paths;
    let n_chunks = n.div_ceil(CHUNK_PATHS);

    let mut price = Vec::with_capacity(config.n_runs);
    let mut delta = Vec::with_capacity(config.n_runs);
    let mut rho = Vec::with_capacity(config.n_runs);
    let mut wall = 0.0;
    for run in 0..config.n_runs {
        let started = Instant::now();
        let base = (run as u64)
            .checked_mul(n as u64)
            .ok_or_else(|| HestonError::ConfigInvalid("path index overflow".into()))?;
        let chunks: Vec<ChunkSums> = pool.install(|| {
            (0..n_chunks)
                .into_par_iter()
                .map(|c| {
                    let mut acc = ChunkSums::default();
                    for i in c * CHUNK_PATHS..((c + 1) * CHUNK_PATHS).min(n) {
                        let mut stream = make_stream(config, dimension, base + i as u64)?;
                        let obs = plan.simulate(&mut stream, params, spec.spot)?;
                        acc.payoff
                            .add(discounted_payoff(spec, &obs, params.r).as_f64());
                        acc.delta
                            .add(pathwise_delta(spec, &obs, params.r)?.as_f64());
                        acc.rho.add(pathwise_rho(spec, &obs, params.r)?.as_f64());
                    }
                    Ok(acc)
                })
                .collect::<Result<Vec<_>>>()
        })?;
        let mut total = ChunkSums::default();
        chunks.iter().for_each(|c| total.merge(c));
        price.push(total.payoff.value() / n as f64);
        delta.push(total.delta.value() / n as f64);
        rho.push(total.rho.value() / n as f64);
        wall += started.elapsed().as_secs_f64() * 1e3;
    }
    let wall_ms = wall / config.n_runs as f64;
    Ok(Greeks {
        price: McSummary::from_runs(price, wall_ms, n),
        delta: McSummary::from_runs(delta, wall_ms, n),
        rho: McSummary::from_runs(rho, wall_ms, n),
    })
}

/// Discounted expected payoff.
pub fn price<T: Real>(
    params: &HestonParams<T>,
    spec: &OptionSpec<T>,
    config: &SimConfig,
) -> Result<McSummary> {
    estimate(params, spec, config).map(|g| g.price)
}

/// Price with pathwise Delta and Rho from one pass.
pub fn greeks<T: Real>(
    params: &HestonParams<T>,
    spec: &OptionSpec<T>,
    config: &SimConfig,
) -> Result<Greeks> {
    estimate(params, spec, config)
}

/// Gamma by central finite difference of pathwise Delta, bumping the spot by
/// `rel_bump` either side. Both legs share random numbers.
pub fn gamma_fd<T: Real>(
    params: &HestonParams<T>,
    spec: &OptionSpec<T>,
    config: &SimConfig,
    rel_bump: f64,
) -> Result<McSummary> {
    if !(rel_bump > 0.0 && rel_bump < 1.0) {
        return Err(HestonError::invalid("rel_bump", "must lie in (0, 1)"));
    }
    let h = spec.spot * T::lit(rel_bump);
    let up = greeks(params, &spec.with_spot(spec.spot + h), config)?.delta;
    let down = greeks(params, &spec.with_spot(spec.spot - h), config)?.delta;
    let width = 2.0 * h.as_f64();
    let values = up
        .per_run_values
        .iter()
        .zip(&down.per_run_values)
        .map(|(u, d)| (u - d) / width)
        .collect();
    Ok(McSummary::from_runs(
        values,
        up.wall_ms + down.wall_ms,
        config.n_paths,
    ))
}

/// One row of an experiment sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub config: SimConfig,
    pub summary: McSummary,
}

/// Prices `spec` under each configuration in turn.
pub fn run_experiment<T: Real>(
    grid: &[SimConfig],
    params: &HestonParams<T>,
    spec: &OptionSpec<T>,
) -> Result<Vec<ExperimentRow>> {
    grid.iter()
        .map(|config| {
            Ok(ExperimentRow {
                config: config.clone(),
                summary: price(params, spec, config)?,
            })
        })
        .collect()
}
