//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use heston_core::random::{sobol_point, PseudoStream, UniformSource};
use heston_core::HestonParams;
use statrs::distribution::{ContinuousCDF, Normal};

pub fn std_normal_cdf(x: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().cdf(x)
}

/// Black–Scholes call with total variance `w` over `[0, t]`.
pub fn bs_call(s0: f64, k: f64, r: f64, t: f64, w: f64) -> f64 {
    let sd = w.sqrt();
    let d1 = ((s0 / k).ln() + r * t + 0.5 * w) / sd;
    let d2 = d1 - sd;
    s0 * std_normal_cdf(d1) - k * (-r * t).exp() * std_normal_cdf(d2)
}

/// `int_0^T v(t) dt` for the noiseless variance ODE `v' = kappa (theta - v)`.
pub fn deterministic_variance_integral(p: &HestonParams<f64>, t: f64) -> f64 {
    p.theta * t + (p.v0 - p.theta) * (1.0 - (-p.kappa * t).exp()) / p.kappa
}

/// Gamma(alpha, scale) CDF at ascending `xs` by composite Simpson on the
/// substitution `t = y^(1/alpha)`, which removes the singularity at zero.
pub fn gamma_cdf_quadrature(alpha: f64, scale: f64, xs: &[f64]) -> Vec<f64> {
    let norm = statrs::function::gamma::gamma(alpha) * scale.powf(alpha) * alpha;
    let f = |y: f64| (-y.powf(1.0 / alpha) / scale).exp();
    let panels = 64;
    let mut acc = 0.0;
    let mut y_prev = 0.0;
    xs.iter()
        .map(|&x| {
            let y = x.max(0.0).powf(alpha);
            if y > y_prev {
                let h = (y - y_prev) / panels as f64;
                let mut s = f(y_prev) + f(y);
                for i in 1..panels {
                    let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                    s += w * f(y_prev + i as f64 * h);
                }
                acc += s * h / 3.0;
                y_prev = y;
            }
            acc / norm
        })
        .collect()
}

/// Kolmogorov–Smirnov distance of a sorted sample from CDF values at its points.
pub fn ks_one_sample(sorted: &[f64], cdf_at_sample: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    cdf_at_sample
        .iter()
        .enumerate()
        .map(|(i, &f)| (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs()))
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov–Smirnov distance of sorted samples.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Brute-force non-central chi-squared draws at integer `dof`, from
/// `(Z_1 + sqrt(lambda))^2 + Z_2^2 + ... + Z_dof^2`.
pub fn nccs_by_squares(dof: usize, lambda: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut s = PseudoStream::new(seed, 7);
    let shift = lambda.sqrt();
    (0..n)
        .map(|_| {
            let z = s.next_normal() + shift;
            z * z + (1..dof).map(|_| s.next_normal().powi(2)).sum::<f64>()
        })
        .collect()
}

/// Whether the first `2^d` points of the `d`-dimensional sequence put one
/// point in each of the `2^d` subcubes obtained by halving every axis.
pub fn has_property_a(d: usize) -> bool {
    let n = 1usize << d;
    let mut seen = vec![false; n];
    for i in 0..n {
        let p = sobol_point(d, i as u64).unwrap();
        let cell = p
            .iter()
            .enumerate()
            .fold(0usize, |c, (k, &x)| c | (usize::from(x >= 0.5) << k));
        if seen[cell] {
            return false;
        }
        seen[cell] = true;
    }
    true
}

pub fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}
