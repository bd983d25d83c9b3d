mod common;

use heston_core::exact_sim::{
    exact_step, sample_integrated_variance, variance_transition, IntegratedVarianceLaw,
};
use heston_core::num::mean_and_std;
use heston_core::random::{PseudoStream, UniformSource, UniformStream};
use heston_core::HestonParams;

fn params() -> HestonParams<f64> {
    HestonParams::benchmark()
}

/// Averaging the sampled integrated variance over the variance transition
/// must reproduce the unconditional CIR mean.
#[test]
fn tower_law_mean_of_integrated_variance() {
    let p = params();
    let dt = 0.5;
    let n = 40_000;
    let mut s = UniformStream::pseudo(11, 0);
    let draws: Vec<f64> = (0..n)
        .map(|_| {
            let v_t = variance_transition(&mut s, &p, p.v0, dt).unwrap();
            let law = IntegratedVarianceLaw::new(&p, p.v0, v_t, dt).unwrap();
            sample_integrated_variance(&mut s, &law).unwrap()
        })
        .collect();
    let (m, sd) = mean_and_std(&draws);
    let want = p.expected_integrated_variance(dt);
    let se = sd / (n as f64).sqrt();
    assert!((m - want).abs() < 4.0 * se, "mean {m} vs {want} (se {se})");
}

/// Fine Euler paths of the variance alone, kept when they end near `v_t`,
/// give the conditional law of the integrated variance.
#[test]
fn conditional_law_matches_discretised_paths() {
    let p = params();
    let (dt, steps, n) = (0.25, 100, 400_000);
    let h = dt / steps as f64;
    let mut s = PseudoStream::new(12, 0);
    let mut ends = Vec::with_capacity(n);
    for _ in 0..n {
        let (mut v, mut iv) = (p.v0, 0.0);
        for _ in 0..steps {
            let next = v + p.kappa * (p.theta - v) * h + p.sigma * (v * h).sqrt() * s.next_normal();
            let next = next.max(0.0);
            iv += 0.5 * (v + next) * h;
            v = next;
        }
        ends.push((v, iv));
    }
    let mut vs: Vec<f64> = ends.iter().map(|e| e.0).collect();
    vs.sort_by(f64::total_cmp);
    let v_t = vs[n / 2];
    let kept = common::sorted(
        ends.iter()
            .filter(|e| (e.0 / v_t - 1.0).abs() < 0.02)
            .map(|e| e.1)
            .collect(),
    );
    assert!(kept.len() > 2_000, "only {} paths kept", kept.len());
    let law = IntegratedVarianceLaw::new(&p, p.v0, v_t, dt).unwrap();
    let (m, _) = mean_and_std(&kept);
    let median = kept[kept.len() / 2];
    assert!(
        (m / law.mean() - 1.0).abs() < 0.02,
        "mean {m} vs {}",
        law.mean()
    );
    let law_median = law.inverse_cdf(0.5).unwrap();
    assert!(
        (median / law_median - 1.0).abs() < 0.02,
        "median {median} vs {law_median}"
    );
}

/// Two exact half steps and one full step give the same terminal law.
#[test]
fn exact_steps_compose() {
    let p = params();
    let n = 15_000;
    let mut a = UniformStream::pseudo(13, 0);
    let one = common::sorted(
        (0..n)
            .map(|_| exact_step(&mut a, &p, 100.0, p.v0, 1.0).unwrap().s)
            .collect(),
    );
    let mut b = UniformStream::pseudo(14, 0);
    let two = common::sorted(
        (0..n)
            .map(|_| {
                let h = exact_step(&mut b, &p, 100.0, p.v0, 0.5).unwrap();
                exact_step(&mut b, &p, h.s, h.v, 0.5).unwrap().s
            })
            .collect(),
    );
    let d = common::ks_two_sample(&one, &two);
    // 0.1% critical value of the two-sample statistic
    let crit = 1.95 * (2.0 / n as f64).sqrt();
    assert!(d < crit, "KS {d} >= {crit}");
}

#[test]
fn small_sigma_integrated_variance_is_nearly_deterministic() {
    let p = params().with_sigma(0.01);
    let dt = 1.0;
    let mut s = UniformStream::pseudo(15, 0);
    let want = common::deterministic_variance_integral(&p, dt);
    for _ in 0..200 {
        let step = exact_step(&mut s, &p, 100.0, p.v0, dt).unwrap();
        assert!((step.integrated_variance / want - 1.0).abs() < 0.05);
    }
}
