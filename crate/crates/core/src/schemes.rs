//! Log-Euler and Milstein discretisation with full truncation of the variance.
//!
//! Both schemes use exactly two normals per step, ordered `(Z1 asset, Z2 variance)`,
//! so runs sharing a stream are pathwise coupled.

use crate::error::{HestonError, Result};
use crate::model::HestonParams;
use crate::num::Real;
use crate::products::PathObservables;
use crate::random::{correlated_pair, UniformSource};

/// Logical uniforms consumed per discretised step.
pub const DRAWS_PER_STEP: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Discretisation {
    Euler,
    Milstein,
}

/// Uniform time grid on `[0, maturity]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    pub maturity: T,
    pub n_steps: usize,
}

impl<T: Real> GridSpec<T> {
    pub fn new(maturity: T, n_steps: usize) -> Result<Self> {
        if !(maturity > T::zero()) {
            return Err(HestonError::invalid("maturity", "must be > 0"));
        }
        if n_steps == 0 {
            return Err(HestonError::invalid("n_steps", "must be >= 1"));
        }
        Ok(Self { maturity, n_steps })
    }

    pub fn dt(&self) -> T {
        self.maturity / T::lit(self.n_steps as f64)
    }

    /// `t_k = k T / n`, computed directly rather than accumulated.
    pub fn time(&self, k: usize) -> T {
        if k == self.n_steps {
            return self.maturity;
        }
        T::lit(k as f64) * self.maturity / T::lit(self.n_steps as f64)
    }

    /// Grid index of `t`, if `t` is a grid point (relative tolerance 1e-9).
    pub fn index_of(&self, t: T) -> Option<usize> {
        let x = (t / self.maturity).as_f64() * self.n_steps as f64;
        let k = x.round();
        if k < 0.0 || k > self.n_steps as f64 || (x - k).abs() > 1e-9 * self.n_steps as f64 {
            return None;
        }
        Some(k as usize)
    }
}

/// Simulation state at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathState<T> {
    pub s: T,
    pub v: T,
    pub t: T,
}

/// Euler update given the two correlated normals.
#[inline]
pub fn euler_update<T: Real>(
    p: &HestonParams<T>,
    state: PathState<T>,
    dt: T,
    z1: T,
    z2: T,
) -> PathState<T> {
    let half = T::lit(0.5);
    let vdt = state.v * dt;
    let root = vdt.sqrt();
    let s = state.s * ((p.r - half * state.v) * dt + root * z1).exp();
    let v = state.v + p.kappa * (p.theta - state.v) * dt + p.sigma * root * z2;
    PathState {
        s,
        v: v.max(T::zero()),
        t: state.t + dt,
    }
}

/// Milstein update: Euler plus `sigma^2 dt (Z2^2 - 1) / 4` on the variance.
#[inline]
pub fn milstein_update<T: Real>(
    p: &HestonParams<T>,
    state: PathState<T>,
    dt: T,
    z1: T,
    z2: T,
) -> PathState<T> {
    let half = T::lit(0.5);
    let vdt = state.v * dt;
    let root = vdt.sqrt();
    let s = state.s * ((p.r - half * state.v) * dt + root * z1).exp();
    let v = state.v
        + p.kappa * (p.theta - state.v) * dt
        + p.sigma * root * z2
        + T::lit(0.25) * p.sigma * p.sigma * dt * (z2 * z2 - T::one());
    PathState {
        s,
        v: v.max(T::zero()),
        t: state.t + dt,
    }
}

#[inline]
fn draw_pair<T: Real, S: UniformSource + ?Sized>(stream: &mut S, rho: T) -> (T, T) {
    let (z1, z2) = correlated_pair(stream, rho.as_f64());
    (T::lit(z1), T::lit(z2))
}

pub fn euler_step<T: Real, S: UniformSource + ?Sized>(
    stream: &mut S,
    params: &HestonParams<T>,
    state: PathState<T>,
    dt: T,
) -> PathState<T> {
    let (z1, z2) = draw_pair(stream, params.rho);
    euler_update(params, state, dt, z1, z2)
}

pub fn milstein_step<T: Real, S: UniformSource + ?Sized>(
    stream: &mut S,
    params: &HestonParams<T>,
    state: PathState<T>,
    dt: T,
) -> PathState<T> {
    let (z1, z2) = draw_pair(stream, params.rho);
    milstein_update(params, state, dt, z1, z2)
}

/// Grid indices at which the running average is sampled.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragingPlan {
    indices: Vec<usize>,
}

impl AveragingPlan {
    /// Maps each averaging time onto the grid. Times must be grid points.
    pub fn new<T: Real>(grid: &GridSpec<T>, times: &[T]) -> Result<Self> {
        if times.is_empty() {
            return Err(HestonError::invalid("averaging_times", "must not be empty"));
        }
        let mut indices = Vec::with_capacity(times.len());
        for &t in times {
            let k = grid.index_of(t).filter(|&k| k > 0).ok_or_else(|| {
                HestonError::invalid(
                    "averaging_times",
                    format!(
                        "{t} is not a point of the {}-step grid on (0, {}]",
                        grid.n_steps, grid.maturity
                    ),
                )
            })?;
            if indices.last().is_some_and(|&last| k <= last) {
                return Err(HestonError::invalid(
                    "averaging_times",
                    "must be strictly increasing",
                ));
            }
            indices.push(k);
        }
        Ok(Self { indices })
    }

    /// Terminal-only plan (European observables).
    pub fn terminal<T: Real>(grid: &GridSpec<T>) -> Self {
        Self {
            indices: vec![grid.n_steps],
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

/// Runs `grid.n_steps` steps from `(s0, params.v0)` and collects the payoff
/// observables at the plan's averaging dates.
pub fn simulate_path<T: Real, S: UniformSource + ?Sized>(
    stream: &mut S,
    params: &HestonParams<T>,
    grid: &GridSpec<T>,
    scheme: Discretisation,
    s0: T,
    plan: &AveragingPlan,
) -> PathObservables<T> {
    let dt = grid.dt();
    let mut state = PathState {
        s: s0,
        v: params.v0,
        t: T::zero(),
    };
    let mut sum = T::zero();
    let mut weighted = T::zero();
    let mut next = plan.indices.iter().peekable();
    for k in 1..=grid.n_steps {
        state = match scheme {
            Discretisation::Euler => euler_step(stream, params, state, dt),
            Discretisation::Milstein => milstein_step(stream, params, state, dt),
        };
        if next.peek().is_some_and(|&&i| i == k) {
            next.next();
            sum += state.s;
            weighted += state.s * grid.time(k);
        }
    }
    let n = T::lit(plan.indices.len() as f64);
    PathObservables {
        s_t: state.s,
        avg: sum / n,
        tw_sum: weighted / n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::UniformStream;

    struct Constant(f64);
    impl UniformSource for Constant {
        fn next_uniform(&mut self) -> f64 {
            self.0
        }
    }

    fn params() -> HestonParams<f64> {
        HestonParams::benchmark()
    }

    fn start() -> PathState<f64> {
        PathState {
            s: 100.0,
            v: 0.010201,
            t: 0.0,
        }
    }

    #[test]
    fn drift_only_step() {
        let p = params();
        let dt = 0.01;
        let out = euler_update(&p, start(), dt, 0.0, 0.0);
        assert!((out.s - 100.0 * ((p.r - 0.5 * 0.010201) * dt).exp()).abs() < 1e-12);
        assert!((out.v - (0.010201 + p.kappa * (p.theta - 0.010201) * dt)).abs() < 1e-15);
        let m = milstein_update(&p, start(), dt, 0.0, 0.0);
        let want = 0.010201 + p.kappa * (p.theta - 0.010201) * dt - 0.25 * p.sigma * p.sigma * dt;
        assert!((m.v - want.max(0.0)).abs() < 1e-15);
        assert_eq!(m.s, out.s);
    }

    #[test]
    fn forced_zero_normals_via_median_uniform() {
        let p = params();
        let mut s = Constant(0.5);
        let a = euler_step(&mut s, &p, start(), 0.1);
        assert_eq!(a, euler_update(&p, start(), 0.1, 0.0, 0.0));
    }

    #[test]
    fn truncation_at_zero() {
        let p = params();
        let state = PathState {
            s: 100.0,
            v: 0.0,
            t: 0.0,
        };
        let big = p.with_sigma(2.0);
        let out = euler_update(&big, state, 0.5, 0.0, -3.0);
        assert!(out.v >= 0.0);
        let state = PathState {
            s: 100.0,
            v: 1e-4,
            t: 0.0,
        };
        let out = euler_update(&big, state, 0.5, 0.0, -5.0);
        assert_eq!(out.v, 0.0);
        let out = milstein_update(&big, state, 0.5, 0.0, -0.5);
        assert!(out.v >= 0.0);
    }

    #[test]
    fn milstein_correction_vanishes_at_unit_normal() {
        let p = params();
        for z2 in [-1.0, 1.0] {
            let e = euler_update(&p, start(), 0.01, 0.3, z2);
            let m = milstein_update(&p, start(), 0.01, 0.3, z2);
            assert!((e.v - m.v).abs() < 1e-18);
        }
    }

    #[test]
    fn single_drift_step_path() {
        let p = params();
        let grid = GridSpec::new(1.0, 1).unwrap();
        let plan = AveragingPlan::terminal(&grid);
        let obs = simulate_path(
            &mut Constant(0.5),
            &p,
            &grid,
            Discretisation::Milstein,
            100.0,
            &plan,
        );
        assert!((obs.s_t - 100.0 * (p.r - 0.5 * p.v0).exp()).abs() < 1e-12);
        assert_eq!(obs.avg, obs.s_t);
        assert_eq!(obs.tw_sum, obs.s_t);
    }

    #[test]
    fn terminal_average_equals_terminal_price() {
        let p = params();
        let grid = GridSpec::new(1.0, 64).unwrap();
        let plan = AveragingPlan::new(&grid, &[1.0]).unwrap();
        assert_eq!(plan, AveragingPlan::terminal(&grid));
        let mut s = UniformStream::pseudo(3, 9);
        let obs = simulate_path(&mut s, &p, &grid, Discretisation::Euler, 100.0, &plan);
        assert_eq!(obs.avg, obs.s_t);
    }

    #[test]
    fn averaging_plan_requires_grid_alignment() {
        let grid = GridSpec::new(1.0, 128).unwrap();
        let plan = AveragingPlan::new(&grid, &[0.25, 0.5, 0.75, 1.0]).unwrap();
        assert_eq!(plan.indices(), &[32, 64, 96, 128]);
        let grid = GridSpec::new(1.0, 10).unwrap();
        assert!(AveragingPlan::new(&grid, &[0.25, 1.0]).is_err());
        assert!(AveragingPlan::new(&grid, &[0.5, 0.5]).is_err());
        assert!(AveragingPlan::new(&grid, &[0.0]).is_err());
        assert!(AveragingPlan::new::<f64>(&grid, &[]).is_err());
    }

    #[test]
    fn grid_times_exact() {
        let grid = GridSpec::new(1.0, 3).unwrap();
        assert_eq!(grid.time(3), 1.0);
        assert_eq!(grid.index_of(2.0 / 3.0), Some(2));
        assert!(GridSpec::new(1.0, 0).is_err());
    }

    #[test]
    fn variance_stays_non_negative_under_stress() {
        let p = params().with_sigma(2.0);
        let mut s = UniformStream::pseudo(77, 0);
        let mut state = PathState {
            s: 100.0,
            v: 1e-6,
            t: 0.0,
        };
        for i in 0..1_000_000 {
            state = if i % 2 == 0 {
                euler_step(&mut s, &p, state, 0.01)
            } else {
                milstein_step(&mut s, &p, state, 0.01)
            };
            assert!(state.v >= 0.0);
            if i % 1000 == 0 {
                state = PathState {
                    s: 100.0,
                    v: 1e-6,
                    t: 0.0,
                };
            }
        }
    }

    #[test]
    fn schemes_agree_when_vol_of_vol_vanishes() {
        let p = params().with_sigma(1e-8);
        let grid = GridSpec::new(1.0, 64).unwrap();
        let plan = AveragingPlan::terminal(&grid);
        for path in 0..200 {
            let mut a = UniformStream::pseudo(5, path);
            let mut b = UniformStream::pseudo(5, path);
            let e = simulate_path(&mut a, &p, &grid, Discretisation::Euler, 100.0, &plan);
            let m = simulate_path(&mut b, &p, &grid, Discretisation::Milstein, 100.0, &plan);
            assert!((e.s_t / m.s_t - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn generic_over_f32() {
        let p = HestonParams::<f32>::benchmark();
        let grid = GridSpec::new(1.0f32, 16).unwrap();
        let plan = AveragingPlan::terminal(&grid);
        let mut s = UniformStream::pseudo(1, 1);
        let obs = simulate_path(&mut s, &p, &grid, Discretisation::Milstein, 100.0f32, &plan);
        assert!(obs.s_t > 0.0 && obs.s_t.is_finite());
    }
}
