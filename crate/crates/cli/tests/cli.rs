use std::process::{Command, Output};

use heston_cli::config::parse_config;
use heston_cli::output::{CsvRow, JsonRow, ManifestRecord};
use heston_cli::CliError;
use heston_core::HestonError;

const SMALL: &[&str] = &[
    "--scheme", "euler", "--steps", "8", "--paths", "300", "--runs", "3",
];

fn heston(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heston"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn args<'a>(cmd: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![cmd];
    v.extend_from_slice(SMALL);
    v.extend_from_slice(extra);
    v
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// CSV text with the timing column blanked.
fn without_timing(csv_text: &str) -> String {
    csv_text
        .lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn csv_header_and_determinism() {
    let a = heston(&args("price", &["--format", "csv"]));
    let b = heston(&args("price", &["--format", "csv"]));
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let (ta, tb) = (stdout(&a), stdout(&b));
    assert_eq!(
        ta.lines().next().unwrap(),
        "scheme,sampler,paths,steps,runs,mean,std,wall_ms_mean"
    );
    assert_eq!(ta.lines().count(), 2);
    assert_eq!(without_timing(&ta), without_timing(&tb));
}

#[test]
fn csv_rows_round_trip() {
    let argv = args("price", &["--format", "csv"]);
    let manifest = parse_config(std::iter::once("heston").chain(argv.iter().copied())).unwrap();
    let out = heston(&argv);
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let rows: Vec<CsvRow> = reader.deserialize().collect::<Result<_, _>>().unwrap();
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert_eq!(row.scheme, manifest.config.scheme.as_str());
    assert_eq!(row.sampler, manifest.config.sampler.as_str());
    assert_eq!((row.paths, row.steps, row.runs), (300, 8, 3));
    // the printed mean is the engine's value to the last bit
    let summary = heston_core::price(&manifest.params, &manifest.spec, &manifest.config).unwrap();
    assert_eq!(row.mean.to_bits(), summary.estimate.to_bits());
    assert_eq!(row.std.to_bits(), summary.std_error.to_bits());
}

#[test]
fn jsonl_rows_carry_the_manifest() {
    let argv = args(
        "greeks",
        &[
            "--format",
            "jsonl",
            "--product",
            "asian",
            "--averaging-times",
            "0.25,0.5,0.75,1",
            "--rho",
            "-0.5",
        ],
    );
    let manifest = parse_config(std::iter::once("heston").chain(argv.iter().copied())).unwrap();
    let out = heston(&argv);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows: Vec<JsonRow> = stdout(&out)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let quantities: Vec<&str> = rows.iter().map(|r| r.quantity.as_str()).collect();
    assert_eq!(quantities, ["price", "delta", "rho"]);
    let mut expected = ManifestRecord::new(&manifest, &manifest.config);
    for row in &rows {
        expected.timestamp = row.manifest.timestamp.clone();
        assert_eq!(row.manifest, expected);
        assert_eq!(row.per_run.len(), 3);
    }
    assert_eq!(rows[0].manifest.averaging_times, vec![0.25, 0.5, 0.75, 1.0]);
    assert_eq!(rows[0].manifest.rho, -0.5);
}

#[test]
fn single_cell_bench_matches_price() {
    let p = heston(&args("price", &["--format", "csv"]));
    let b = heston(&args("bench", &["--format", "csv"]));
    assert_eq!(without_timing(&stdout(&p)), without_timing(&stdout(&b)));
}

#[test]
fn bench_sweeps_rows() {
    let out = heston(&[
        "bench",
        "--scheme",
        "euler,milstein",
        "--steps",
        "4,8",
        "--paths",
        "200",
        "--runs",
        "2",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 5);
}

#[test]
fn table_output_and_manifest_on_stderr() {
    let out = heston(&args("greeks", &[]));
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.lines().next().unwrap().contains("mean (std)"));
    assert_eq!(text.lines().count(), 4);
    let err = String::from_utf8(out.stderr).unwrap();
    let json = err
        .lines()
        .next()
        .unwrap()
        .strip_prefix("manifest ")
        .unwrap();
    let record: ManifestRecord = serde_json::from_str(json).unwrap();
    assert_eq!(record.paths, 300);
}

#[test]
fn validation_exits_with_two() {
    let out = heston(&["price", "--rho", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("rho") && err.contains("[-1, 1]"), "{err}");

    let out = heston(&["price", "--paths", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("usage error"));

    let out = heston(&[
        "price",
        "--product",
        "asian",
        "--scheme",
        "milstein",
        "--steps",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = heston(&["price", "--not-a-flag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    std::fs::write(&path, "# knobs\nkappa = 2.5\ntheta = 0.04\npaths = 77\n").unwrap();
    let p = path.to_str().unwrap();
    let m = parse_config(["heston", "price", "--config", p, "--theta", "0.05"]).unwrap();
    assert_eq!(m.params.kappa, 2.5);
    assert_eq!(m.params.theta, 0.05);
    assert_eq!(m.config.n_paths, 77);
    assert_eq!(m.params.sigma, 0.61);

    std::fs::write(&path, "volatility = 0.2\n").unwrap();
    let out = heston(&["price", "--config", p]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("unknown key"));
}

#[test]
fn emits_point_dump() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("points.csv");
    let out = heston(&args(
        "bench",
        &["--format", "csv", "--emit-points", path.to_str().unwrap()],
    ));
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "sampler,index,x,y");
    assert_eq!(lines.len(), 1 + 2 * 300);
    assert_eq!(lines[301], "sobol,0,0.5,0.5");
}

#[test]
fn error_classes() {
    let numerical: CliError = HestonError::RootNotBracketed { u: 0.5 }.into();
    assert_eq!(numerical.exit_code(), 1);
    assert!(numerical.to_string().contains("RootNotBracketed"));
    let invalid: CliError = HestonError::ConfigInvalid("x".into()).into();
    assert_eq!(invalid.exit_code(), 2);
}
