//! Modified Bessel function of the first kind for complex argument, by power
//! series.
//!
//! `I_nu(z) = (z/2)^nu / Gamma(nu+1) * S(z^2/4)` with the entire function
//! `S(w) = sum_k w^k / (k! (nu+1)_k)`. The characteristic function only needs
//! ratios of `I_nu`, so it works with `S` and a separately continued
//! `log(z)`, which sidesteps the branch cut of `z^nu`.

use num_complex::Complex;

use crate::error::{HestonError, Result};
use crate::num::Real;

const MAX_TERMS: usize = 200_000;

/// `S(z^2/4)` as `mantissa * exp(log_scale)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ScaledSeries<T> {
    pub mantissa: Complex<T>,
    pub log_scale: T,
}

impl<T: Real> ScaledSeries<T> {
    pub fn ln(&self) -> Complex<T> {
        self.mantissa.ln() + Complex::new(self.log_scale, T::zero())
    }
}

fn series_tolerance<T: Real>() -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(4.0))
}

/// Evaluates the entire part `S` of `I_nu` at `z`. Requires `nu > -1`.
pub(crate) fn bessel_series<T: Real>(nu: T, z: Complex<T>) -> Result<ScaledSeries<T>> {
    let w = z * z * T::lit(0.25);
    let modulus = z.norm();
    let tol = series_tolerance::<T>();
    let rescale_at = T::max_value().sqrt();
    let mut term = Complex::new(T::one(), T::zero());
    let mut sum = term;
    let mut log_scale = T::zero();
    // terms grow until k(k + nu + 1) ~ |w|
    let half = modulus * T::lit(0.5);
    let mut k = T::zero();
    for _ in 0..MAX_TERMS {
        k += T::one();
        term = term * w / (k * (k + nu));
        sum += term;
        if sum.norm() > rescale_at {
            let s = sum.norm();
            sum /= s;
            term /= s;
            log_scale += s.ln();
        }
        if k > half && term.norm() <= tol * sum.norm() {
            return Ok(ScaledSeries {
                mantissa: sum,
                log_scale,
            });
        }
        if !sum.re.is_finite() || !sum.im.is_finite() {
            break;
        }
    }
    Err(HestonError::BesselNonConvergence {
        order: nu.as_f64(),
        modulus: modulus.as_f64(),
    })
}

/// Principal-branch `I_nu(z)` for `nu > -1`.
pub fn bessel_i<T: Real>(nu: T, z: Complex<T>) -> Result<Complex<T>> {
    if !(nu > -T::one()) {
        return Err(HestonError::invalid("nu", "Bessel order must exceed -1"));
    }
    let series = bessel_series(nu, z)?;
    let zero = Complex::new(T::zero(), T::zero());
    if z == zero {
        return Ok(if nu == T::zero() {
            Complex::new(T::one(), T::zero())
        } else {
            zero
        });
    }
    let ln_gamma = T::lit(statrs::function::gamma::ln_gamma(nu.as_f64() + 1.0));
    let half = z * T::lit(0.5);
    let log = half.ln() * nu - Complex::new(ln_gamma, T::zero()) + series.ln();
    Ok(log.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Real-argument reference: direct summation in f64 with Gamma from statrs.
    fn real_reference(nu: f64, x: f64) -> f64 {
        let mut sum = 0.0;
        let g = statrs::function::gamma::gamma(nu + 1.0);
        let mut k = 0.0f64;
        let mut term = (x / 2.0).powf(nu) / g;
        while k < 500.0 {
            sum += term;
            k += 1.0;
            term *= (x * x / 4.0) / (k * (k + nu));
            if term < 1e-18 * sum {
                break;
            }
        }
        sum
    }

    #[test]
    fn known_values() {
        // scipy.special.iv
        let cases: [(f64, f64, f64); 4] = [
            (0.0, 1.0, 1.266_065_877_752_008_4),
            (1.0, 2.5, 2.516_716_245_288_700_6),
            (-0.366, 0.3, 1.464_574_074_634_709),
            (2.5, 10.0, 2_028.512_757_391_935_6),
        ];
        for (nu, x, expected) in cases {
            let got = bessel_i(nu, Complex::new(x, 0.0)).unwrap();
            assert!(
                (got.re / expected - 1.0).abs() < 1e-10,
                "I_{nu}({x}) = {got}"
            );
            assert!(got.im.abs() < 1e-12 * expected);
        }
    }

    #[test]
    fn series_rescales_large_arguments() {
        let s = bessel_series(0.5f64, Complex::new(900.0, 0.0)).unwrap();
        assert!(s.log_scale > 0.0);
        // I_{1/2}(x) = sqrt(2/(pi x)) sinh x, so ln I ~ x - 0.5 ln(2 pi x)
        let ln_i = (450.0f64).ln() * 0.5 - statrs::function::gamma::ln_gamma(1.5) + s.ln().re;
        let expected = 900.0 - 0.5 * (2.0 * std::f64::consts::PI * 900.0).ln();
        assert!((ln_i - expected).abs() < 1e-9);
    }

    #[test]
    fn rejects_low_order() {
        assert!(bessel_i(-1.5, Complex::new(1.0, 0.0)).is_err());
    }

    proptest! {
        #[test]
        fn agrees_with_real_reference(nu in -0.9f64..5.0, x in 0.01f64..40.0) {
            let got = bessel_i(nu, Complex::new(x, 0.0)).unwrap();
            let want = real_reference(nu, x);
            prop_assert!((got.re / want - 1.0).abs() < 1e-10);
        }

        #[test]
        fn conjugate_symmetry(nu in -0.9f64..5.0, re in 0.01f64..20.0, im in -20.0f64..20.0) {
            let z = Complex::new(re, im);
            let a = bessel_i(nu, z.conj()).unwrap();
            let b = bessel_i(nu, z).unwrap().conj();
            prop_assert!((a - b).norm() <= 1e-12 * b.norm().max(1e-300));
        }
    }
}
