use std::collections::BTreeMap;

use proptest::prelude::*;
use sntail::{RegionIntegrand, Side, StatisticKind};
use sntail_cli::config::{
    parse_ini, Command, EpsSpec, ExperimentConfig, ModelSpec, OracleMethod, OutputFormat, Spacing, VariantSel,
};
use sntail_cli::run_from_args;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("sntail").chain(args.iter().copied());
    let code = run_from_args(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn header(csv: &str) -> &str {
    csv.lines().find(|l| !l.starts_with('#')).unwrap()
}

#[test]
fn constants_csv_has_metadata_and_header() {
    let (code, out, _) = run(&["constants", "--n", "3", "--workers", "1"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("# tool_version="));
    assert!(out.contains("# config_hash="));
    assert_eq!(header(&out), "n,beta,variant,det,K,ln_K");
    assert!(out.contains("3,2,paper,0.333333333333,"));
    assert!(out.contains("3,2,corrected,0.111111111111,"));
}

#[test]
fn predict_json_keys() {
    let (code, out, _) = run(&["predict", "--n", "3", "--eps", "0.01", "--variant", "corrected", "--format", "json"]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    for key in ["tool_version", "command", "config_hash", "seed", "config", "results", "K", "h", "constant", "exponent", "value"] {
        assert!(doc.get(key).is_some(), "missing {key}");
    }
    let c = doc["constant"].as_f64().unwrap();
    assert!((c - 1.0 / 12f64.sqrt()).abs() < 1e-10);
}

#[test]
fn eps_grid_emits_one_row_per_value() {
    let (code, out, _) = run(&["oracle", "--n", "2", "--eps", "1e-2:1e-4:geometric:3"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().filter(|l| !l.starts_with('#')).count(), 4);
}

#[test]
fn mc_is_worker_invariant() {
    let base = ["mc", "--n", "3", "--eps", "0.1", "--trials", "20000", "--seed", "9"];
    let (_, one, _) = run(&[&base[..], &["--workers", "1"]].concat());
    let (_, four, _) = run(&[&base[..], &["--workers", "4"]].concat());
    assert_eq!(one, four);
}

#[test]
fn mc_warns_when_too_few_hits_are_expected() {
    let (code, _, err) = run(&["mc", "--n", "6", "--eps", "0.01", "--trials", "1000"]);
    assert_eq!(code, 0);
    assert!(err.contains("expected hits"));
}

#[test]
fn verify_runs_clean_for_the_normal_model() {
    let (code, out, err) = run(&["verify", "--n", "3", "--trials", "1e5"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(header(&out), "quantity,n,beta,paper,corrected,oracle,ratio_paper,ratio_corrected,status,note");
    assert!(out.contains("det_A,3,2,0.333333333333,,0.111111111111,3,,discrepant"));
    assert!(out.lines().any(|l| l.starts_with("constant_corrected,") && l.contains(",confirmed,")));
}

#[test]
fn counterexample_confirms_the_rademacher_mass() {
    let (code, out, _) = run(&["counterexample", "--model", "rademacher", "--n", "4", "--eps", "0.2", "--trials", "1e5"]);
    assert_eq!(code, 0);
    assert!(out.contains("rademacher,4,0.2,1.8,0.0625,0.0625,"));
    assert!(out.trim_end().ends_with(",confirmed"));
}

#[test]
fn invalid_input_exits_2_and_lists_every_violation() {
    let (code, _, err) = run(&["predict", "--n", "1", "--beta", "0.5", "--side", "up"]);
    assert_eq!(code, 2);
    assert!(err.contains("n must be ≥ 2"));
    assert!(err.contains("beta must be > 1"));
    assert!(err.contains("eps is required for predict"));
    assert!(err.contains("side must be one of"));
}

#[test]
fn density_command_on_a_discrete_model_exits_2() {
    let (code, _, _) = run(&["predict", "--model", "rademacher", "--n", "3", "--eps", "0.1"]);
    assert_eq!(code, 2);
}

#[test]
fn unknown_subcommand_exits_2() {
    assert_eq!(run(&["frobnicate"]).0, 2);
}

#[test]
fn region_outside_validity_exits_2() {
    let (code, _, err) = run(&["oracle", "--n", "3", "--eps", "0.5", "--method", "region"]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn missing_config_file_exits_3() {
    let (code, _, err) = run(&["constants", "--n", "3", "--config", "/nonexistent/sntail.ini"]);
    assert_eq!(code, 3);
    assert!(err.contains("/nonexistent/sntail.ini"));
}

#[test]
fn unwritable_output_exits_3() {
    let (code, _, _) = run(&["constants", "--n", "3", "--output", "/nonexistent/dir/out.csv"]);
    assert_eq!(code, 3);
}

#[test]
fn flags_override_the_config_file() {
    let dir = std::env::temp_dir().join(format!("sntail-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.ini");
    std::fs::write(&path, "command = constants\nn = 5\nbeta = 3\n").unwrap();
    let p = path.to_str().unwrap();
    let (code, out, _) = run(&["constants", "--config", p, "--n", "4"]);
    assert_eq!(code, 0);
    assert!(out.contains("\n4,3,paper,"));

    let (code, _, err) = run(&["predict", "--config", p]);
    assert_eq!(code, 2);
    assert!(err.contains("config file is for command `constants`"));

    let out_path = dir.join("out.csv");
    let (code, stdout, _) = run(&["constants", "--config", p, "--output", out_path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    assert!(std::fs::read_to_string(&out_path).unwrap().contains("5,3,corrected,"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn ini_rejects_sections_unknown_and_duplicate_keys() {
    let err = parse_ini("[run]\nfoo = 1\nn = 2\nn = 3\nnonsense\n").unwrap_err();
    assert_eq!(err.violations.len(), 4);
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![1e-6..10.0f64, (1u32..1000).prop_map(|k| k as f64 / 64.0)]
}

fn arb_model() -> impl Strategy<Value = ModelSpec> {
    prop_oneof![
        Just(ModelSpec::IidNormal),
        (2.0001..50.0f64).prop_map(|nu| ModelSpec::StudentT { nu }),
        (-3.0..3.0f64).prop_map(|shift| ModelSpec::FoldedNormal { shift }),
        (-0.9..0.9f64).prop_map(|rho| ModelSpec::Equicorrelated { rho }),
        Just(ModelSpec::Rademacher),
        Just(ModelSpec::DegenerateFirst),
    ]
}

fn arb_eps() -> impl Strategy<Value = Option<EpsSpec>> {
    prop_oneof![
        Just(None),
        finite().prop_map(|e| Some(EpsSpec::Value(e))),
        (finite(), finite(), any::<bool>(), 1usize..20).prop_map(|(start, end, geo, count)| Some(EpsSpec::Grid {
            start,
            end,
            spacing: if geo { Spacing::Geometric } else { Spacing::Linear },
            count,
        })),
    ]
}

prop_compose! {
    fn arb_config()(
        command in prop::sample::select(Command::ALL.to_vec()),
        model in arb_model(),
        n in 2usize..5000,
        beta_sel in prop_oneof![Just(2.0), 1.0001..8.0f64],
        eps in arb_eps(),
        side in prop::sample::select(vec![Side::Right, Side::Left, Side::TwoSided]),
        variant in prop::sample::select(vec![VariantSel::Paper, VariantSel::Corrected, VariantSel::Both]),
        statistic in prop::sample::select(vec![StatisticKind::Sum, StatisticKind::MaxOverZn, StatisticKind::MaxOverZk]),
        method in prop::sample::select(vec![OracleMethod::Auto, OracleMethod::Sphere, OracleMethod::Region]),
        integrand in prop::sample::select(vec![RegionIntegrand::Weighted, RegionIntegrand::Paper]),
        seed in any::<u64>(),
        trials in 1u64..1_000_000_000_000,
        workers in 1usize..64,
        format in prop::sample::select(vec![OutputFormat::Csv, OutputFormat::Json]),
        output in prop::option::of("[a-z][a-z0-9_./-]{0,20}"),
    ) -> ExperimentConfig {
        let eps = if eps.is_none() && !matches!(command, Command::Constants | Command::Verify) {
            Some(EpsSpec::Value(0.1))
        } else {
            eps
        };
        let beta = if side == Side::Right { beta_sel } else { 2.0 };
        ExperimentConfig {
            command, model, n, beta, eps, side, variant, statistic, method, integrand,
            seed, trials, workers, format, output,
        }
    }
}

proptest! {
    #[test]
    fn config_round_trips_through_ini(cfg in arb_config()) {
        let text = cfg.to_ini_string();
        let back = ExperimentConfig::from_ini_str(&text, 1).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.config_hash(), cfg.config_hash());
    }

    #[test]
    fn hash_ignores_workers_format_and_output(cfg in arb_config(), workers in 1usize..64) {
        let mut other = cfg.clone();
        other.workers = workers;
        other.format = OutputFormat::Json;
        other.output = None;
        prop_assert_eq!(other.config_hash(), cfg.config_hash());
    }

    #[test]
    fn flag_map_matches_file_map(cfg in arb_config()) {
        let pairs: BTreeMap<String, String> = cfg.to_pairs().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        prop_assert_eq!(ExperimentConfig::from_map(&pairs, 1).unwrap(), cfg);
    }
}

#[test]
fn numerical_failures_map_to_exit_1() {
    use sntail_cli::error::CliError;
    let e = CliError::Core(sntail::Error::Convergence("x".into()));
    assert_eq!(e.exit_code(), 1);
    let e = CliError::Core(sntail::Error::NonPowerLaw { residual: 1.0, threshold: 0.05 });
    assert_eq!(e.exit_code(), 1);
    assert_eq!(CliError::Core(sntail::Error::OutsideValidity("x".into())).exit_code(), 2);
}
