//! Acceptance criteria for the pricing engine. Prints one PASS/FAIL line per
//! check and exits non-zero if any check fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use heston_core::exact_sim::IntegratedVarianceLaw;
use heston_core::random::{
    correlated_pair, sample_gamma, sample_nccs, NccsParams, PseudoStream, UniformStream,
};
use heston_core::{
    greeks, price, HestonParams, McSummary, OptionSpec, Parallelism, Right, SamplerKind, Scheme,
    SimConfig,
};

const EURO_PRICE: f64 = 6.8061;
const ASIAN_PRICE: f64 = 4.3840;
const EURO_DELTA: f64 = 0.6958;
const EURO_RHO: f64 = 62.7752;
const ASIAN_DELTA: f64 = 0.6733;
const ASIAN_EXACT_RHO: f64 = 38.1664;

#[derive(Default)]
struct Report {
    failures: usize,
    total: usize,
}

impl Report {
    fn check(&mut self, criterion: &str, pass: bool, detail: String) {
        self.total += 1;
        if !pass {
            self.failures += 1;
        }
        println!(
            "[{}] {criterion}: {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
    }

    fn within(&mut self, criterion: &str, got: &McSummary, target: f64, tol: f64) {
        let diff = (got.estimate - target).abs();
        self.check(
            criterion,
            diff <= tol,
            format!(
                "{:.5} (se {:.5}) vs {target} |diff| {diff:.5} <= {tol:.5}",
                got.estimate, got.std_error
            ),
        );
    }
}

fn params() -> HestonParams<f64> {
    HestonParams::benchmark()
}

fn combined(a: &McSummary, b: &McSummary) -> f64 {
    (a.std_error.powi(2) + b.std_error.powi(2)).sqrt()
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut report = Report::default();
    let p = params();
    let euro = OptionSpec::<f64>::benchmark_european();
    let asian = OptionSpec::<f64>::benchmark_asian();

    // 1 and 5 (exact European Greeks) share one pass.
    let exact_euro = greeks(
        &p,
        &euro,
        &SimConfig::new(Scheme::Exact, SamplerKind::Sobol, 2048, 1),
    )
    .unwrap();
    report.within(
        "1 exact european price, sobol 2048x30",
        &exact_euro.price,
        EURO_PRICE,
        3.0 * 0.0060,
    );

    let exact_asian = greeks(
        &p,
        &asian,
        &SimConfig::new(Scheme::Exact, SamplerKind::Sobol, 512, 1),
    )
    .unwrap();
    report.within(
        "2 exact asian price, sobol 512x30",
        &exact_asian.price,
        ASIAN_PRICE,
        3.0 * 0.0064,
    );

    let sweep: Vec<_> = [32, 64, 128, 256]
        .into_iter()
        .map(|steps| {
            let cfg = SimConfig::new(Scheme::Milstein, SamplerKind::Pseudo, 32_000, steps);
            (steps, greeks(&p, &euro, &cfg).unwrap())
        })
        .collect();
    let mil_euro = &sweep[2].1;
    report.within(
        "3 milstein european price, 32000x128",
        &mil_euro.price,
        EURO_PRICE,
        3.0 * 0.05,
    );
    let mut plateau = true;
    let mut worst = 0.0f64;
    for (i, (_, a)) in sweep.iter().enumerate() {
        for (_, b) in &sweep[i + 1..] {
            let z = (a.price.estimate - b.price.estimate).abs() / combined(&a.price, &b.price);
            worst = worst.max(z);
            plateau &= z <= 3.0;
        }
    }
    let means: Vec<String> = sweep
        .iter()
        .map(|(s, g)| format!("{s}:{:.4}", g.price.estimate))
        .collect();
    report.check(
        "3 milstein step sweep plateau",
        plateau,
        format!(
            "[{}] worst pair {worst:.2} combined SE <= 3",
            means.join(" ")
        ),
    );

    let asian_cfg = SimConfig::new(Scheme::Milstein, SamplerKind::Pseudo, 32_000, 128);
    let mil_asian = greeks(&p, &asian, &asian_cfg).unwrap();
    report.within(
        "4 milstein asian price, 32000x128",
        &mil_asian.price,
        ASIAN_PRICE,
        3.0 * 0.05,
    );

    for (name, g) in [("exact", &exact_euro), ("milstein", mil_euro)] {
        report.within(
            &format!("5 {name} european delta"),
            &g.delta,
            EURO_DELTA,
            3.0 * g.delta.std_error,
        );
        report.within(
            &format!("5 {name} european rho"),
            &g.rho,
            EURO_RHO,
            3.0 * g.rho.std_error,
        );
    }
    for (name, g) in [("exact", &exact_asian), ("milstein", &mil_asian)] {
        report.within(
            &format!("5 {name} asian delta"),
            &g.delta,
            ASIAN_DELTA,
            3.0 * g.delta.std_error,
        );
    }
    let h = 1e-4;
    let up = price(&p.with_rate(p.r + h), &asian, &asian_cfg).unwrap();
    let down = price(&p.with_rate(p.r - h), &asian, &asian_cfg).unwrap();
    let fd_runs: Vec<f64> = up
        .per_run_values
        .iter()
        .zip(&down.per_run_values)
        .map(|(u, d)| (u - d) / (2.0 * h))
        .collect();
    let fd = McSummary::from_runs(fd_runs, 0.0, up.n_paths);
    let tol = 3.0 * combined(&mil_asian.rho, &fd);
    report.within(
        "5 milstein asian pathwise rho vs CRN finite difference",
        &mil_asian.rho,
        fd.estimate,
        tol,
    );
    report.within(
        "5 exact asian pathwise rho vs reference",
        &exact_asian.rho,
        ASIAN_EXACT_RHO,
        3.0 * exact_asian.rho.std_error,
    );

    let qmc = price(
        &p,
        &euro,
        &SimConfig::new(Scheme::Exact, SamplerKind::Sobol, 1024, 1),
    )
    .unwrap();
    let mc = price(
        &p,
        &euro,
        &SimConfig::new(Scheme::Exact, SamplerKind::Pseudo, 1024, 1),
    )
    .unwrap();
    let ratio = qmc.std_error / mc.std_error;
    report.check(
        "6 sobol vs pseudo run spread, exact 1024x30",
        ratio < 0.5,
        format!(
            "{:.5} / {:.5} = {ratio:.3} < 0.5",
            qmc.std_error, mc.std_error
        ),
    );

    property_suite(&mut report, &p, &euro);
    sigma_to_zero(&mut report, &p, &euro);

    println!(
        "{} of {} checks passed in {:.1}s",
        report.total - report.failures,
        report.total,
        started.elapsed().as_secs_f64()
    );
    if report.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn property_suite(report: &mut Report, p: &HestonParams<f64>, euro: &OptionSpec<f64>) {
    let n = 1_000_000;

    // Gamma against a quadrature CDF.
    let (alpha, scale) = (0.634, 2.0);
    let mut s = PseudoStream::new(101, 0);
    let draws = common::sorted((0..n).map(|_| sample_gamma(&mut s, alpha, scale)).collect());
    let ks = common::ks_one_sample(&draws, &common::gamma_cdf_quadrature(alpha, scale, &draws));
    report.check(
        "7 gamma(0.634, 2) KS vs quadrature CDF",
        ks < 0.002,
        format!("{ks:.5} < 0.002"),
    );

    // Non-central chi-squared against sums of squared normals.
    let nccs = NccsParams::new(3.0, 2.0).unwrap();
    let mut s = UniformStream::pseudo(102, 0);
    let draws = common::sorted((0..n).map(|_| sample_nccs(&mut s, nccs).unwrap()).collect());
    let oracle = common::sorted(common::nccs_by_squares(3, 2.0, 10 * n, 103));
    let ks = common::ks_two_sample(&draws, &oracle);
    report.check(
        "7 nccs(3, 2) KS vs squared normals",
        ks < 0.002,
        format!("{ks:.5} < 0.002"),
    );

    let nccs = NccsParams::new(2.5, 3.0).unwrap();
    let mut s = UniformStream::pseudo(104, 0);
    let draws: Vec<f64> = (0..n).map(|_| sample_nccs(&mut s, nccs).unwrap()).collect();
    let (m, sd) = heston_core::num::mean_and_std(&draws);
    let (em, ev) = (5.5, 17.0);
    report.check(
        "7 nccs(2.5, 3) moments",
        (m / em - 1.0).abs() < 0.005 && (sd * sd / ev - 1.0).abs() < 0.02,
        format!("mean {m:.4} vs {em}, var {:.4} vs {ev}", sd * sd),
    );

    let rho = -0.7;
    let mut s = UniformStream::pseudo(105, 0);
    let pairs: Vec<(f64, f64)> = (0..n).map(|_| correlated_pair(&mut s, rho)).collect();
    let (a, b): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    let (ma, sa) = heston_core::num::mean_and_std(&a);
    let (mb, sb) = heston_core::num::mean_and_std(&b);
    let corr =
        pairs.iter().map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / ((n - 1) as f64 * sa * sb);
    report.check(
        "7 correlated normal pair moments",
        ma.abs() < 0.005
            && mb.abs() < 0.005
            && (sa - 1.0).abs() < 0.005
            && (sb - 1.0).abs() < 0.005
            && (corr - rho).abs() < 0.005,
        format!("means {ma:.4} {mb:.4}, sds {sa:.4} {sb:.4}, corr {corr:.4}"),
    );

    let dims: Vec<usize> = (1..=6).filter(|&d| !common::has_property_a(d)).collect();
    report.check(
        "7 sobol property A for d <= 6",
        dims.is_empty(),
        format!("failing dimensions {dims:?}"),
    );

    let mut monotone = true;
    let mut worst: f64 = 0.0;
    for (v_u, v_t, dt) in [(p.v0, p.v0, 1.0), (p.v0, 0.02, 0.25), (0.03, 0.005, 0.5)] {
        let law = IntegratedVarianceLaw::new(p, v_u, v_t, dt).unwrap();
        let grid: Vec<f64> = (0..=400)
            .map(|i| law.cutoff() * i as f64 / 400.0)
            .map(|x| law.cdf(x))
            .collect();
        monotone &= grid.windows(2).all(|w| w[1] >= w[0] - 1e-8);
        for u in [0.01, 0.1, 0.5, 0.9, 0.99] {
            let x = law.inverse_cdf(u).unwrap();
            worst = worst.max((law.cdf(x) - u).abs());
        }
    }
    report.check(
        "7 integrated-variance CDF monotone and inverse round trip",
        monotone && worst < 1e-6,
        format!("monotone {monotone}, worst |F(F^-1(u)) - u| {worst:.2e} < 1e-6"),
    );

    // A near-zero strike call pays S_T - K on every path.
    let forward = euro.with_strike(1e-6);
    let cfg = SimConfig::new(Scheme::Milstein, SamplerKind::Pseudo, 20_000, 64);
    let g = price(p, &forward, &cfg).unwrap();
    let target = euro.spot - 1e-6 * (-p.r).exp();
    report.within("7 martingale, milstein", &g, target, 3.0 * g.std_error);
    let cfg = SimConfig::new(Scheme::Exact, SamplerKind::Pseudo, 1_000, 1).with_runs(10);
    let g = price(p, &forward, &cfg).unwrap();
    report.within("7 martingale, exact", &g, target, 3.0 * g.std_error);

    let cfg = SimConfig::new(Scheme::Milstein, SamplerKind::Pseudo, 20_000, 64);
    let call = price(p, euro, &cfg).unwrap();
    let put = price(p, &euro.with_right(Right::Put), &cfg).unwrap();
    let diff = McSummary::from_runs(
        call.per_run_values
            .iter()
            .zip(&put.per_run_values)
            .map(|(c, q)| c - q)
            .collect(),
        0.0,
        cfg.n_paths,
    );
    let parity = euro.spot - euro.strike * (-p.r).exp();
    report.within(
        "7 put-call parity, milstein",
        &diff,
        parity,
        3.0 * diff.std_error,
    );

    let mut identical = true;
    for cfg in [
        SimConfig::new(Scheme::Exact, SamplerKind::Pseudo, 600, 1).with_runs(2),
        SimConfig::new(Scheme::Exact, SamplerKind::Sobol, 600, 1).with_runs(2),
        SimConfig::new(Scheme::Milstein, SamplerKind::Pseudo, 3_000, 32).with_runs(2),
    ] {
        let one = greeks(
            p,
            euro,
            &cfg.clone().with_parallelism(Parallelism::Fixed(1)),
        )
        .unwrap();
        let eight = greeks(p, euro, &cfg.with_parallelism(Parallelism::Fixed(8))).unwrap();
        identical &= one.price.per_run_values == eight.price.per_run_values
            && one.delta.per_run_values == eight.delta.per_run_values
            && one.rho.per_run_values == eight.rho.per_run_values;
    }
    report.check(
        "7 bit-identical results, 1 vs 8 threads",
        identical,
        format!("identical {identical}"),
    );

    let small = SimConfig::new(Scheme::Milstein, SamplerKind::Pseudo, 1_000, 32).with_runs(120);
    let large = SimConfig {
        n_paths: 4_000,
        ..small.clone()
    };
    let se_small = price(p, euro, &small).unwrap().std_error;
    let se_large = price(p, euro, &large).unwrap().std_error;
    let ratio = se_large / se_small;
    report.check(
        "7 error scaling, 4x paths halves the spread",
        (ratio - 0.5).abs() <= 0.15,
        format!("{se_large:.5} / {se_small:.5} = {ratio:.3} in [0.35, 0.65]"),
    );
}

fn sigma_to_zero(report: &mut Report, p: &HestonParams<f64>, euro: &OptionSpec<f64>) {
    let t = euro.maturity;
    // Runs of 10^4 paths, 10^5 paths in all; the tolerance uses the pooled SE.
    let cases = [
        (
            "exact",
            p.with_sigma(0.01),
            SimConfig::new(Scheme::Exact, SamplerKind::Pseudo, 10_000, 1),
        ),
        (
            "euler",
            p.with_sigma(1e-6),
            SimConfig::new(Scheme::Euler, SamplerKind::Pseudo, 10_000, 128),
        ),
        (
            "milstein",
            p.with_sigma(1e-6),
            SimConfig::new(Scheme::Milstein, SamplerKind::Pseudo, 10_000, 128),
        ),
    ];
    for (name, q, cfg) in cases {
        let target = common::bs_call(
            euro.spot,
            euro.strike,
            q.r,
            t,
            common::deterministic_variance_integral(&q, t),
        );
        let g = price(&q, euro, &cfg.with_runs(10)).unwrap();
        let tol = 3.0 * g.sem();
        report.within(
            &format!("8 {name} sigma -> 0 vs Black-Scholes (sigma {})", q.sigma),
            &g,
            target,
            tol,
        );
    }
}
