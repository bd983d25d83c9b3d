//! European and arithmetic-Asian payoffs with pathwise Delta and Rho.

use crate::error::{HestonError, Result};
use crate::num::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Style {
    European,
    AsianArithmetic,
}

impl Style {
    pub fn as_str(&self) -> &'static str {
        match self {
            Style::European => "european",
            Style::AsianArithmetic => "asian",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Right {
    Call,
    Put,
}

impl Right {
    pub fn as_str(&self) -> &'static str {
        match self {
            Right::Call => "call",
            Right::Put => "put",
        }
    }
}

/// Option contract.
#[derive(Debug, Clone, PartialEq)]
pub struct OptionSpec<T> {
    pub style: Style,
    pub right: Right,
    pub strike: T,
    pub maturity: T,
    pub spot: T,
    /// Averaging dates in `(0, maturity]`; empty for European options.
    pub averaging_times: Vec<T>,
}

impl<T: Real> OptionSpec<T> {
    pub fn european(right: Right, strike: T, maturity: T, spot: T) -> Result<Self> {
        let spec = Self {
            style: Style::European,
            right,
            strike,
            maturity,
            spot,
            averaging_times: Vec::new(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn asian(
        right: Right,
        strike: T,
        maturity: T,
        spot: T,
        averaging_times: Vec<T>,
    ) -> Result<Self> {
        let spec = Self {
            style: Style::AsianArithmetic,
            right,
            strike,
            maturity,
            spot,
            averaging_times,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Benchmark at-the-money call: S0 = K = 100, one year.
    pub fn benchmark_european() -> Self {
        Self::european(Right::Call, T::lit(100.0), T::one(), T::lit(100.0)).unwrap()
    }

    /// Benchmark Asian call averaging quarterly over one year.
    pub fn benchmark_asian() -> Self {
        let times = [0.25, 0.5, 0.75, 1.0].map(T::lit).to_vec();
        Self::asian(Right::Call, T::lit(100.0), T::one(), T::lit(100.0), times).unwrap()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [
            ("strike", self.strike),
            ("maturity", self.maturity),
            ("spot", self.spot),
        ] {
            if !(x > T::zero() && x.is_finite()) {
                return Err(HestonError::invalid(name, "must be > 0"));
            }
        }
        match self.style {
            Style::European => {
                if !self.averaging_times.is_empty() {
                    return Err(HestonError::invalid(
                        "averaging_times",
                        "only apply to Asian options",
                    ));
                }
            }
            Style::AsianArithmetic => {
                if self.averaging_times.is_empty() {
                    return Err(HestonError::invalid("averaging_times", "must not be empty"));
                }
                let mut prev = T::zero();
                for &t in &self.averaging_times {
                    if !(t > prev) {
                        return Err(HestonError::invalid(
                            "averaging_times",
                            "must be strictly increasing and positive",
                        ));
                    }
                    prev = t;
                }
                if prev > self.maturity {
                    return Err(HestonError::invalid(
                        "averaging_times",
                        "must not exceed the maturity",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Dates at which the path must be observed.
    pub fn observation_times(&self) -> Vec<T> {
        match self.style {
            Style::European => vec![self.maturity],
            Style::AsianArithmetic => self.averaging_times.clone(),
        }
    }

    pub fn with_spot(&self, spot: T) -> Self {
        Self {
            spot,
            ..self.clone()
        }
    }

    pub fn with_strike(&self, strike: T) -> Self {
        Self {
            strike,
            ..self.clone()
        }
    }

    pub fn with_right(&self, right: Right) -> Self {
        Self {
            right,
            ..self.clone()
        }
    }
}

/// What a payoff or pathwise estimator needs from one path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathObservables<T> {
    /// Terminal price.
    pub s_t: T,
    /// Arithmetic mean over the averaging dates (`s_t` for European paths).
    pub avg: T,
    /// `(1/N) sum_i S_{t_i} t_i` over the averaging dates.
    pub tw_sum: T,
}

fn underlying<T: Real>(spec: &OptionSpec<T>, obs: &PathObservables<T>) -> T {
    match spec.style {
        Style::European => obs.s_t,
        Style::AsianArithmetic => obs.avg,
    }
}

/// Strict in-the-money indicator; a tie with the strike counts as out.
fn in_the_money<T: Real>(right: Right, x: T, strike: T) -> bool {
    match right {
        Right::Call => x > strike,
        Right::Put => x < strike,
    }
}

/// Undiscounted payoff.
pub fn payoff<T: Real>(spec: &OptionSpec<T>, obs: &PathObservables<T>) -> T {
    let x = underlying(spec, obs);
    match spec.right {
        Right::Call => (x - spec.strike).max(T::zero()),
        Right::Put => (spec.strike - x).max(T::zero()),
    }
}

/// Discounted payoff `e^{-rT} payoff`.
pub fn discounted_payoff<T: Real>(spec: &OptionSpec<T>, obs: &PathObservables<T>, r: T) -> T {
    (-r * spec.maturity).exp() * payoff(spec, obs)
}

/// Pathwise Delta, `e^{-rT} (X / S0) 1{X > K}` for calls with `X` the terminal
/// price or the average. Puts use the mirrored indicator and sign.
pub fn pathwise_delta<T: Real>(spec: &OptionSpec<T>, obs: &PathObservables<T>, r: T) -> Result<T> {
    let x = underlying(spec, obs);
    if !in_the_money(spec.right, x, spec.strike) {
        return Ok(T::zero());
    }
    let d = (-r * spec.maturity).exp() * x / spec.spot;
    Ok(match spec.right {
        Right::Call => d,
        Right::Put => -d,
    })
}

/// Pathwise Rho (sensitivity to `r`).
///
/// European call: `e^{-rT} K T 1{S_T > K}`.
/// Asian call: `e^{-rT} 1{A > K} ((1/N) sum S_{t_i} t_i - T (A - K))`, using
/// `dS_{t_i}/dr = t_i S_{t_i}`.
pub fn pathwise_rho<T: Real>(spec: &OptionSpec<T>, obs: &PathObservables<T>, r: T) -> Result<T> {
    let x = underlying(spec, obs);
    if !in_the_money(spec.right, x, spec.strike) {
        return Ok(T::zero());
    }
    let disc = (-r * spec.maturity).exp();
    let k = spec.strike;
    let t = spec.maturity;
    Ok(match (spec.style, spec.right) {
        (Style::European, Right::Call) => disc * k * t,
        (Style::European, Right::Put) => -disc * k * t,
        (Style::AsianArithmetic, Right::Call) => disc * (obs.tw_sum - t * (x - k)),
        (Style::AsianArithmetic, Right::Put) => -disc * (obs.tw_sum + t * (k - x)),
    })
}
