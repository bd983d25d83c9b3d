//! Law of `int_u^t V_s ds` conditional on the endpoint variances.
//!
//! The characteristic function is written as
//!
//! ```text
//! Phi(a) = exp((1 + nu) (L(g) - L(k)) + (v_u + v_t)/sigma^2 (k coth(k dt/2) - g coth(g dt/2)))
//!          * S(z(g)) / S(z(k))
//! L(x)   = ln x - x dt / 2 - ln(1 - exp(-x dt))
//! z(x)   = 4 sqrt(v_u v_t) / sigma^2 * exp(L(x))
//! ```
//!
//! with `g = sqrt(k^2 - 2 sigma^2 i a)`, `k = kappa`, `nu = d/2 - 1` and `S` the
//! entire part of the Bessel series. `L` is continuous in `a` because
//! `Re g >= kappa > 0`, so no Bessel branch tracking is needed.
//!
//! The CDF uses the trapezoidal rule on a fixed grid `h j`, `h = pi / u_eps`,
//! where `u_eps` is the conditional mean plus twelve standard deviations. The
//! grid values `Re Phi(h j)` are computed once per law and reused by every
//! CDF evaluation during inversion.

use num_complex::Complex;

use super::bessel::{bessel_series, ScaledSeries};
use crate::error::{HestonError, Result};
use crate::model::HestonParams;
use crate::num::Real;

const TAIL_SDS: f64 = 12.0;
const DECAY_TOL: f64 = 1e-10;
const DECAY_RUN: usize = 3;
const MAX_QUAD_TERMS: usize = 500_000;
const NEWTON_TOL: f64 = 1e-10;
const NEWTON_MAX_ITERS: usize = 100;

/// CDF value with its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfEval<T> {
    pub value: T,
    pub density: T,
    pub slope: T,
}

/// Conditional law of the integrated variance over one step.
#[derive(Debug, Clone)]
pub struct IntegratedVarianceLaw<T: Real> {
    params: HestonParams<T>,
    v_u: T,
    v_t: T,
    dt: T,
    nu: T,
    bessel_scale: T,
    l_kappa: T,
    coth_kappa: T,
    series_kappa: ScaledSeries<T>,
    mean: T,
    std_dev: T,
    cutoff: T,
    step: T,
    // Re Phi(h j) for j = 1..=n
    grid: Vec<T>,
}

impl<T: Real> IntegratedVarianceLaw<T> {
    pub fn new(params: &HestonParams<T>, v_u: T, v_t: T, dt: T) -> Result<Self> {
        params.validate()?;
        if !(dt > T::zero()) {
            return Err(HestonError::invalid("dt", "must be > 0"));
        }
        if !(v_u >= T::zero()) || !(v_t >= T::zero()) {
            return Err(HestonError::invalid("variance", "endpoints must be >= 0"));
        }
        let dof = params.dof();
        if !(dof > T::one()) {
            return Err(HestonError::DofOutOfRange { dof: dof.as_f64() });
        }
        let sigma2 = params.sigma * params.sigma;
        let nu = dof * T::lit(0.5) - T::one();
        let bessel_scale = T::lit(4.0) * (v_u * v_t).sqrt() / sigma2;
        let kappa = Complex::new(params.kappa, T::zero());

        let mut law = Self {
            params: *params,
            v_u,
            v_t,
            dt,
            nu,
            bessel_scale,
            l_kappa: T::zero(),
            coth_kappa: T::zero(),
            series_kappa: ScaledSeries {
                mantissa: Complex::new(T::one(), T::zero()),
                log_scale: T::zero(),
            },
            mean: T::zero(),
            std_dev: T::zero(),
            cutoff: T::zero(),
            step: T::zero(),
            grid: Vec::new(),
        };
        let (l_kappa, coth_kappa) = law.exponents(kappa);
        law.l_kappa = l_kappa.re;
        law.coth_kappa = coth_kappa.re;
        law.series_kappa = bessel_series(nu, law.bessel_argument(l_kappa))?;

        law.estimate_moments()?;
        law.build_grid()?;
        Ok(law)
    }

    pub fn params(&self) -> &HestonParams<T> {
        &self.params
    }

    pub fn endpoints(&self) -> (T, T) {
        (self.v_u, self.v_t)
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    /// Conditional mean, from the characteristic function at the origin.
    pub fn mean(&self) -> T {
        self.mean
    }

    pub fn std_dev(&self) -> T {
        self.std_dev
    }

    /// Upper end of the support the quadrature resolves; `F(cutoff) ~ 1`.
    pub fn cutoff(&self) -> T {
        self.cutoff
    }

    pub fn quadrature_step(&self) -> T {
        self.step
    }

    pub fn quadrature_terms(&self) -> usize {
        self.grid.len()
    }

    /// `(L(x), x coth(x dt / 2))` for complex `x` with positive real part.
    fn exponents(&self, x: Complex<T>) -> (Complex<T>, Complex<T>) {
        let one = Complex::new(T::one(), T::zero());
        let e = (-x * self.dt).exp();
        let one_minus = one - e;
        let l = x.ln() - x * (self.dt * T::lit(0.5)) - one_minus.ln();
        let coth = x * (one + e) / one_minus;
        (l, coth)
    }

    fn bessel_argument(&self, l: Complex<T>) -> Complex<T> {
        l.exp() * self.bessel_scale
    }

    /// `ln Phi(a)`.
    fn ln_phi(&self, a: T) -> Result<Complex<T>> {
        let p = &self.params;
        let sigma2 = p.sigma * p.sigma;
        let gamma = Complex::new(p.kappa * p.kappa, -T::lit(2.0) * sigma2 * a).sqrt();
        let (l_gamma, coth_gamma) = self.exponents(gamma);
        let series = bessel_series(self.nu, self.bessel_argument(l_gamma))?;
        let mut out = (l_gamma - self.l_kappa) * (T::one() + self.nu)
            + (Complex::new(self.coth_kappa, T::zero()) - coth_gamma)
                * ((self.v_u + self.v_t) / sigma2);
        out = out
            + (series.mantissa / self.series_kappa.mantissa).ln()
            + Complex::new(series.log_scale - self.series_kappa.log_scale, T::zero());
        Ok(out)
    }

    /// Characteristic function `E[exp(i a X)]` of the integrated variance.
    pub fn characteristic_fn(&self, a: T) -> Result<Complex<T>> {
        if a == T::zero() {
            return Ok(Complex::new(T::one(), T::zero()));
        }
        Ok(self.ln_phi(a)?.exp())
    }

    /// Mean and variance from the cumulant expansion of `ln Phi` near zero.
    fn estimate_moments(&mut self) -> Result<()> {
        let p = &self.params;
        let guess =
            (self.v_u + self.v_t) * T::lit(0.5) * self.dt + p.theta * self.dt * T::lit(1e-3);
        let mut scale = guess;
        let mut mean = guess;
        let mut var = guess * guess;
        for _ in 0..2 {
            let delta = T::lit(1e-2) / scale;
            let psi = self.ln_phi(delta)?;
            mean = psi.im / delta;
            var = -T::lit(2.0) * psi.re / (delta * delta);
            if !(mean > T::zero()) || !mean.is_finite() {
                return Err(HestonError::QuadratureNonConvergence { terms: 0 });
            }
            scale = mean;
        }
        self.mean = mean;
        self.std_dev = var.max(T::zero()).sqrt();
        Ok(())
    }

    fn build_grid(&mut self) -> Result<()> {
        self.cutoff = self.mean + T::lit(TAIL_SDS) * self.std_dev;
        self.step = T::PI() / self.cutoff;
        let tol = T::lit(DECAY_TOL);
        let mut quiet = 0;
        let mut grid = Vec::with_capacity(256);
        let mut j = T::zero();
        while grid.len() < MAX_QUAD_TERMS {
            j += T::one();
            let phi = self.characteristic_fn(self.step * j)?;
            grid.push(phi.re);
            if phi.norm() / j < tol {
                quiet += 1;
                if quiet >= DECAY_RUN {
                    self.grid = grid;
                    return Ok(());
                }
            } else {
                quiet = 0;
            }
        }
        Err(HestonError::QuadratureNonConvergence {
            terms: MAX_QUAD_TERMS,
        })
    }

    /// Trapezoidal CDF with first and second derivatives, unclamped.
    ///
    /// `x` is taken in `[0, cutoff]`; beyond the cutoff the periodic
    /// quadrature is not a CDF.
    pub fn cdf_eval(&self, x: T) -> CdfEval<T> {
        let h = self.step;
        let theta = h * x;
        let rot = Complex::new(theta.cos(), theta.sin());
        let mut w = rot;
        let mut s0 = T::zero();
        let mut s1 = T::zero();
        let mut s2 = T::zero();
        let mut j = T::zero();
        for &c in &self.grid {
            j += T::one();
            s0 += w.im * c / j;
            s1 += w.re * c;
            s2 += w.im * c * j;
            w *= rot;
        }
        let inv_pi = T::FRAC_1_PI();
        let two = T::lit(2.0);
        CdfEval {
            value: h * x * inv_pi + two * inv_pi * s0,
            density: h * inv_pi + two * h * inv_pi * s1,
            slope: -two * h * h * inv_pi * s2,
        }
    }

    /// `P(X <= x)`, clamped to `[0, 1]`.
    pub fn cdf(&self, x: T) -> T {
        if x <= T::zero() {
            return T::zero();
        }
        let x = x.min(self.cutoff);
        self.cdf_eval(x).value.max(T::zero()).min(T::one())
    }

    /// Inverse CDF by safeguarded second-order Newton iteration
    /// `x <- x - 2 f / (f' + sqrt(f'^2 - 2 f f''))`, falling back to
    /// bisection on `[0, cutoff]` whenever the step is undefined or leaves the
    /// current bracket.
    pub fn inverse_cdf(&self, u: T) -> Result<T> {
        if !(u > T::zero() && u < T::one()) {
            return Err(HestonError::RootNotBracketed { u: u.as_f64() });
        }
        let tol = T::lit(NEWTON_TOL).max(T::epsilon() * T::lit(64.0));
        let mut lo = T::zero();
        let mut hi = self.cutoff;
        let hi_val = self.cdf_eval(hi).value;
        if u >= hi_val {
            return Ok(hi);
        }
        let mut x = self.mean.min(hi * T::lit(0.5));
        for _ in 0..NEWTON_MAX_ITERS {
            let e = self.cdf_eval(x);
            let f = e.value - u;
            if f.abs() < tol {
                return Ok(x);
            }
            if f < T::zero() {
                lo = lo.max(x);
            } else {
                hi = hi.min(x);
            }
            let disc = e.density * e.density - T::lit(2.0) * f * e.slope;
            let mut next = T::nan();
            if e.density > T::zero() && disc >= T::zero() {
                next = x - T::lit(2.0) * f / (e.density + disc.sqrt());
            }
            if !(next > lo && next < hi) {
                next = (lo + hi) * T::lit(0.5);
            }
            if (hi - lo) <= T::epsilon() * self.cutoff {
                return Ok(next);
            }
            x = next;
        }
        let e = self.cdf_eval(x);
        if (e.value - u).abs() < T::lit(1e-6) {
            return Ok(x);
        }
        Err(HestonError::RootNotBracketed { u: u.as_f64() })
    }
}
