use crate::error::{HestonError, Result};
use crate::num::Real;

/// Heston model constants.
///
/// `dS = r S dt + sqrt(V) S dW1`, `dV = kappa (theta - V) dt + sigma sqrt(V) dW2`,
/// with `d<W1, W2> = rho dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HestonParams<T> {
    /// Mean-reversion speed (1/year).
    pub kappa: T,
    /// Long-run variance.
    pub theta: T,
    /// Volatility of variance.
    pub sigma: T,
    /// Correlation of the two Brownian drivers.
    pub rho: T,
    /// Risk-free rate (1/year).
    pub r: T,
    /// Initial variance.
    pub v0: T,
}

impl<T: Real> HestonParams<T> {
    pub fn new(kappa: T, theta: T, sigma: T, rho: T, r: T, v0: T) -> Result<Self> {
        let p = Self {
            kappa,
            theta,
            sigma,
            rho,
            r,
            v0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Duffie–Pan–Singleton calibration used throughout the benchmarks:
    /// kappa 6.21, theta 0.019, sigma 0.61, rho -0.7, r 3.19%, v0 0.010201.
    pub fn benchmark() -> Self {
        Self {
            kappa: T::lit(6.21),
            theta: T::lit(0.019),
            sigma: T::lit(0.61),
            rho: T::lit(-0.7),
            r: T::lit(0.0319),
            v0: T::lit(0.010201),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &'static str, ok: bool, reason: &str| {
            if ok {
                Ok(())
            } else {
                Err(HestonError::invalid(name, reason.to_string()))
            }
        };
        check("kappa", self.kappa > T::zero(), "must be > 0")?;
        check("theta", self.theta > T::zero(), "must be > 0")?;
        check("sigma", self.sigma > T::zero(), "must be > 0")?;
        check(
            "rho",
            self.rho >= -T::one() && self.rho <= T::one(),
            "must lie in [-1, 1]",
        )?;
        check("r", self.r.is_finite(), "must be finite")?;
        check(
            "v0",
            self.v0 >= T::zero() && self.v0.is_finite(),
            "must be >= 0",
        )?;
        for (name, x) in [
            ("kappa", self.kappa),
            ("theta", self.theta),
            ("sigma", self.sigma),
        ] {
            check(name, x.is_finite(), "must be finite")?;
        }
        Ok(())
    }

    /// Degrees of freedom of the variance transition, `4 kappa theta / sigma^2`.
    pub fn dof(&self) -> T {
        T::lit(4.0) * self.kappa * self.theta / (self.sigma * self.sigma)
    }

    /// `E[V_t | V_u = v]` after `dt`.
    pub fn conditional_variance_mean(&self, v: T, dt: T) -> T {
        self.theta + (v - self.theta) * (-self.kappa * dt).exp()
    }

    /// `E[int_0^T V_s ds]` starting from `v0`.
    pub fn expected_integrated_variance(&self, maturity: T) -> T {
        self.theta * maturity
            + (self.v0 - self.theta) * (-(-self.kappa * maturity).exp_m1()) / self.kappa
    }

    pub fn with_sigma(mut self, sigma: T) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_rate(mut self, r: T) -> Self {
        self.r = r;
        self
    }

    pub fn with_rho(mut self, rho: T) -> Self {
        self.rho = rho;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn benchmark_dof() {
        let p = HestonParams::<f64>::benchmark();
        assert!((p.dof() - 1.268_368_718_086_536).abs() < 1e-12);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn rejects_out_of_range() {
        let p = HestonParams::<f64>::benchmark();
        assert!(p.with_rho(1.5).validate().is_err());
        assert!(p.with_sigma(0.0).validate().is_err());
        let mut q = p;
        q.kappa = 0.0;
        assert!(matches!(
            q.validate(),
            Err(HestonError::InvalidParams { name: "kappa", .. })
        ));
        q = p;
        q.v0 = -1e-3;
        assert!(q.validate().is_err());
    }

    #[test]
    fn cir_mean_limits() {
        let p = HestonParams::<f64>::benchmark();
        assert!((p.conditional_variance_mean(0.03, 0.0) - 0.03).abs() < 1e-15);
        assert!((p.conditional_variance_mean(0.03, 100.0) - p.theta).abs() < 1e-15);
    }
}
