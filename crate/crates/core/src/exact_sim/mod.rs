//! Exact transition of the Heston state over one interval.
//!
//! Per step the logical stream supplies exactly three uniforms: the normal of
//! the non-central chi-squared variance draw, the uniform inverted through the
//! integrated-variance CDF, and the normal of the conditional log-price. The
//! Gamma part of the variance draw comes from the auxiliary substream.

mod bessel;
mod law;

pub use bessel::bessel_i;
pub use law::{CdfEval, IntegratedVarianceLaw};

use crate::error::{HestonError, Result};
use crate::model::HestonParams;
use crate::num::Real;
use crate::random::{nccs_from_normal, NccsParams, UniformSource, UniformStream};

/// Logical uniforms consumed per exact step.
pub const DRAWS_PER_EXACT_STEP: usize = 3;

/// Scale `c` and noncentrality `lambda` of `V_t = c * chi'^2_d(lambda)`.
pub fn variance_transition_law<T: Real>(params: &HestonParams<T>, v_u: T, dt: T) -> (T, T) {
    let sigma2 = params.sigma * params.sigma;
    let decay = (-params.kappa * dt).exp();
    let one_minus = -(-params.kappa * dt).exp_m1();
    let scale = sigma2 * one_minus / (T::lit(4.0) * params.kappa);
    let lambda = T::lit(4.0) * params.kappa * decay * v_u / (sigma2 * one_minus);
    (scale, lambda)
}

/// Draws `V_t` given `V_u = v_u` after `dt`.
pub fn variance_transition<T: Real>(
    stream: &mut UniformStream,
    params: &HestonParams<T>,
    v_u: T,
    dt: T,
) -> Result<T> {
    if !(dt > T::zero()) {
        return Err(HestonError::invalid("dt", "must be > 0"));
    }
    let dof = params.dof().as_f64();
    if !(dof > 1.0) {
        return Err(HestonError::DofOutOfRange { dof });
    }
    let (scale, lambda) = variance_transition_law(params, v_u, dt);
    let nccs = NccsParams::new(dof, lambda.as_f64().max(0.0))?;
    let z = stream.next_normal();
    let x = nccs_from_normal(stream.aux(), nccs, z);
    Ok(scale * T::lit(x))
}

/// Draws `int_u^t V_s ds` from its conditional law by inversion.
pub fn sample_integrated_variance<T: Real>(
    stream: &mut UniformStream,
    law: &IntegratedVarianceLaw<T>,
) -> Result<T> {
    let u = T::lit(stream.next_uniform());
    law.inverse_cdf(u)
}

/// Result of one exact transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactStep<T> {
    pub s: T,
    pub v: T,
    /// Realised `int_u^t V_s ds`.
    pub integrated_variance: T,
}

/// One exact step of `(S, V)` over `dt`.
pub fn exact_step<T: Real>(
    stream: &mut UniformStream,
    params: &HestonParams<T>,
    s_u: T,
    v_u: T,
    dt: T,
) -> Result<ExactStep<T>> {
    if !(s_u > T::zero()) {
        return Err(HestonError::invalid("spot", "must be > 0"));
    }
    let v_t = variance_transition(stream, params, v_u, dt)?;
    let law = IntegratedVarianceLaw::new(params, v_u, v_t, dt)?;
    let iv = sample_integrated_variance(stream, &law)?;
    let z = T::lit(stream.next_normal());

    let p = params;
    // int sqrt(V) dW2 recovered from the integrated variance SDE
    let vol_integral = (v_t - v_u - p.kappa * p.theta * dt + p.kappa * iv) / p.sigma;
    let drift = p.r * dt - T::lit(0.5) * iv + p.rho * vol_integral;
    let var = (T::one() - p.rho * p.rho).max(T::zero()) * iv;
    let s = s_u * (drift + var.sqrt() * z).exp();
    Ok(ExactStep {
        s,
        v: v_t,
        integrated_variance: iv,
    })
}
