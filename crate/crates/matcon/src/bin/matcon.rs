//! Command-line front end: scenario-driven bound computation, simulation,
//! and the Monte Carlo / psd verification harness.
//!
//! Results land as CSV/JSON files under the output directory; everything on
//! stderr is diagnostics. Exit code 0 means every verdict passed, 1 means
//! some verdict failed, 2 means the configuration or invocation was invalid.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use matcon::bounds::presets::Preset;
use matcon::bounds::ThresholdForm;
use matcon::checks::{
    check_deviation_bound, check_domination, check_golden_thompson, check_mean_norm,
    check_odd_dilation_powers, check_supermartingale, check_variance, run_tail_experiment,
    DeviationPairKind, SupermartingaleCheck, TailExperiment, Verdict,
};
use matcon::linalg::{dilation, Matrix};
use matcon::piecewise::PiecewiseProcess;
use matcon::report::{BoundReport, LemmaSuite, PresetConsistency, TOOLKIT_VERSION};
use matcon::scenario::{scenario_for_preset, CompiledScenario, ScenarioConfig};
use matcon::sim::IntensitySpec;

#[derive(Parser)]
#[command(
    name = "matcon",
    version,
    about = "Concentration toolkit for continuous-time matrix martingales"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for replicate-parallel checks; falls back to
    /// MATCON_THREADS, then to all cores. Results are identical for any
    /// thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory receiving result files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormArg {
    /// e^-x cap with the dimensional log folded into the threshold.
    Folded,
    /// (m+n) e^-x cap with the bare-x threshold.
    Bare,
    /// Sub-Gaussian folded form (requires a zero jump bound).
    Gaussian,
}

impl From<FormArg> for ThresholdForm {
    fn from(arg: FormArg) -> Self {
        match arg {
            FormArg::Folded => ThresholdForm::FreedmanFolded,
            FormArg::Bare => ThresholdForm::FreedmanBare,
            FormArg::Gaussian => ThresholdForm::GaussianFolded,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute the analytic variance report of a scenario.
    Bound { scenario: PathBuf },
    /// Simulate replicate paths and record terminal operator norms.
    Simulate {
        scenario: PathBuf,
        #[arg(long, default_value_t = 1000)]
        reps: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Additionally dump the full trajectory of one replicate.
        #[arg(long)]
        dump_path: Option<u64>,
    },
    /// Monte Carlo tail experiment against the plug-in threshold.
    VerifyTail {
        scenario: PathBuf,
        /// Confidence exponents, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 2.0, 3.0])]
        x: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        reps: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Tail statement form; defaults to the preset's form when the
        /// scenario is preset-tagged, else to the folded form.
        #[arg(long, value_enum)]
        form: Option<FormArg>,
    },
    /// Terminal-mean check of the corrected trace-exponential
    /// supermartingale.
    CheckSupermartingale {
        scenario: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1.0])]
        xi: Vec<f64>,
        #[arg(long, default_value_t = 10_000)]
        reps: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Deviation-bound, odd-dilation-power and trace-product suites.
    CheckLemmas {
        #[arg(long, default_value_t = 100)]
        trials: u64,
        /// Trials for the Monte Carlo deviation check.
        #[arg(long, default_value_t = 20_000)]
        deviation_trials: u64,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 2.0])]
        x: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// psd domination of the truncated compensator series.
    CheckCompensator {
        scenario: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        xi: f64,
        /// Series truncation order.
        #[arg(short = 'K', long = "K", default_value_t = 25)]
        truncation: u32,
    },
    /// Aggregate prior artifacts plus consistency checks into one report.
    Report {
        scenario: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        reps: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// List the built-in closed-form presets and write their scenarios.
    Presets,
}

enum CliError {
    Config(String),
}

impl From<matcon::scenario::ConfigError> for CliError {
    fn from(e: matcon::scenario::ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn main() {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(|| {
        std::env::var("MATCON_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = match builder.build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: could not build thread pool: {e}");
            std::process::exit(2);
        }
    };
    let code = pool.install(|| match run(&cli) {
        Ok(Verdict::Pass) => 0,
        Ok(Verdict::Fail) => 1,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    });
    std::process::exit(code);
}

fn load_scenario(path: &Path) -> Result<(ScenarioConfig, CompiledScenario), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config = ScenarioConfig::from_json(&text)?;
    let compiled = config.compile()?;
    Ok((config, compiled))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn check_err(e: matcon::checks::CheckError) -> CliError {
    CliError::Config(e.to_string())
}

/// Every JSON artifact carries the toolkit version, the seed and the full
/// scenario snapshot, so a result file alone suffices to rerun it.
fn write_envelope<T: serde::Serialize>(
    out: &Path,
    name: &str,
    config: Option<&ScenarioConfig>,
    seed: Option<u64>,
    results: &T,
) -> Result<PathBuf, CliError> {
    let body = serde_json::json!({
        "toolkit_version": TOOLKIT_VERSION,
        "master_seed": seed,
        "config": config,
        "results": results,
    });
    write_file(
        out,
        name,
        &serde_json::to_string_pretty(&body).expect("serializes"),
    )
}

/// Reads the `results` payload back out of an artifact envelope.
fn read_envelope<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Option<T>, CliError> {
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("cannot parse {}: {e}", path.display())))?;
    serde_json::from_value(value["results"].clone())
        .map(Some)
        .map_err(|e| CliError::Config(format!("cannot parse {}: {e}", path.display())))
}

fn run(cli: &Cli) -> Result<Verdict, CliError> {
    match &cli.command {
        Command::Bound { scenario } => cmd_bound(scenario, &cli.out),
        Command::Simulate {
            scenario,
            reps,
            seed,
            dump_path,
        } => cmd_simulate(scenario, *reps, *seed, *dump_path, &cli.out),
        Command::VerifyTail {
            scenario,
            x,
            reps,
            seed,
            form,
        } => cmd_verify_tail(scenario, x, *reps, *seed, *form, &cli.out),
        Command::CheckSupermartingale {
            scenario,
            xi,
            reps,
            seed,
        } => cmd_supermartingale(scenario, xi, *reps, *seed, &cli.out),
        Command::CheckLemmas {
            trials,
            deviation_trials,
            x,
            seed,
        } => cmd_lemmas(*trials, *deviation_trials, x, *seed, &cli.out),
        Command::CheckCompensator {
            scenario,
            xi,
            truncation,
        } => cmd_compensator(scenario, *xi, *truncation, &cli.out),
        Command::Report {
            scenario,
            reps,
            seed,
        } => cmd_report(scenario, *reps, *seed, &cli.out),
        Command::Presets => cmd_presets(&cli.out),
    }
}

fn preset_consistency(compiled: &CompiledScenario) -> Result<Option<PresetConsistency>, CliError> {
    let Some(preset) = &compiled.preset else {
        return Ok(None);
    };
    let closed = preset
        .closed_form()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let report = compiled
        .variance_report()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(Some(PresetConsistency::compare(
        preset.name(),
        closed,
        &report,
    )))
}

fn cmd_bound(path: &Path, out: &Path) -> Result<Verdict, CliError> {
    let (config, compiled) = load_scenario(path)?;
    let report = compiled
        .variance_report()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let consistency = preset_consistency(&compiled)?;
    let body = serde_json::json!({
        "variance": report,
        "preset_consistency": consistency,
    });
    let file = write_envelope(
        out,
        &format!("{}.bound.json", compiled.name),
        Some(&config),
        None,
        &body,
    )?;
    eprintln!(
        "bound: sigma_sq = {}, jump bound = {} -> {}",
        report.sigma_sq,
        report.jump_bound,
        file.display()
    );
    Ok(Verdict::from_bool(
        consistency.is_none_or(|c| c.verdict.passed()),
    ))
}

fn cmd_simulate(
    path: &Path,
    reps: u64,
    seed: u64,
    dump_path: Option<u64>,
    out: &Path,
) -> Result<Verdict, CliError> {
    let (_config, compiled) = load_scenario(path)?;
    let mut csv = String::from("replicate,terminal_norm,jump_events\n");
    for rep in 0..reps {
        let path = compiled
            .simulate(seed, rep)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let norm = dilation(path.terminal_value()).lambda_max();
        let events = path.jump_events().map_or(0, |e| e.len());
        csv.push_str(&format!("{rep},{norm},{events}\n"));
    }
    let file = write_file(out, &format!("{}.paths.csv", compiled.name), &csv)?;
    eprintln!("simulate: {reps} paths -> {}", file.display());

    if let Some(rep) = dump_path {
        let path = compiled
            .simulate(seed, rep)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let (m, n) = compiled.out_dims();
        let mut header = String::from("time");
        for i in 0..m {
            for j in 0..n {
                header.push_str(&format!(",z_{i}_{j}"));
            }
        }
        header.push('\n');
        let mut rows = String::new();
        let mut push_row = |t: f64, z: &Matrix| {
            rows.push_str(&format!("{t}"));
            for i in 0..m {
                for j in 0..n {
                    rows.push_str(&format!(",{}", z.get(i, j)));
                }
            }
            rows.push('\n');
        };
        if let Some((times, values)) = path.grid_values() {
            for (t, z) in times.iter().zip(values) {
                push_row(*t, z);
            }
        } else if let Some(events) = path.jump_events() {
            push_row(0.0, &Matrix::zeros(m, n));
            for ev in events {
                push_row(ev.time, &ev.value_after);
            }
            push_row(compiled.horizon, path.terminal_value());
        }
        let file = write_file(
            out,
            &format!("{}.path{rep}.csv", compiled.name),
            &(header + &rows),
        )?;
        eprintln!("simulate: replicate {rep} trajectory -> {}", file.display());
    }
    Ok(Verdict::Pass)
}

fn cmd_verify_tail(
    path: &Path,
    x: &[f64],
    reps: u64,
    seed: u64,
    form: Option<FormArg>,
    out: &Path,
) -> Result<Verdict, CliError> {
    let (config, compiled) = load_scenario(path)?;
    let form = form.map(ThresholdForm::from).unwrap_or_else(|| {
        compiled
            .preset
            .as_ref()
            .and_then(|p| p.closed_form().ok())
            .map(|c| c.form)
            .unwrap_or(ThresholdForm::FreedmanFolded)
    });
    let experiment = run_tail_experiment(&compiled, form, x, reps, seed).map_err(check_err)?;
    write_envelope(
        out,
        &format!("{}.tail.json", compiled.name),
        Some(&config),
        Some(seed),
        &experiment,
    )?;
    let file = write_file(
        out,
        &format!("{}.tail.csv", compiled.name),
        &experiment.to_csv(),
    )?;
    for row in &experiment.rows {
        eprintln!(
            "tail x={}: exceed {}/{} upper_cl {:.3e} cap {:.3e} {}",
            row.x, row.exceed_count, reps, row.upper_cl, row.cap, row.verdict
        );
    }
    eprintln!("verify-tail: {} -> {}", experiment.verdict, file.display());
    Ok(experiment.verdict)
}

fn cmd_supermartingale(
    path: &Path,
    xis: &[f64],
    reps: u64,
    seed: u64,
    out: &Path,
) -> Result<Verdict, CliError> {
    let (config, compiled) = load_scenario(path)?;
    let mut checks: Vec<SupermartingaleCheck> = Vec::new();
    for &xi in xis {
        let check = check_supermartingale(&compiled, xi, reps, seed).map_err(check_err)?;
        eprintln!(
            "supermartingale xi={xi}: mean {:.6} (se {:.2e}) cap {} {}",
            check.mean, check.se, check.cap, check.verdict
        );
        checks.push(check);
    }
    let verdict = Verdict::from_bool(checks.iter().all(|c| c.verdict.passed()));
    let file = write_envelope(
        out,
        &format!("{}.supermartingale.json", compiled.name),
        Some(&config),
        Some(seed),
        &checks,
    )?;
    eprintln!("check-supermartingale: {verdict} -> {}", file.display());
    Ok(verdict)
}

fn cmd_lemmas(
    trials: u64,
    deviation_trials: u64,
    x: &[f64],
    seed: u64,
    out: &Path,
) -> Result<Verdict, CliError> {
    let deviation = vec![
        check_deviation_bound(
            DeviationPairKind::IdenticalDeterministic,
            3,
            x,
            deviation_trials,
            seed,
        )
        .map_err(check_err)?,
        check_deviation_bound(
            DeviationPairKind::DiagonalGaussianShift,
            3,
            x,
            deviation_trials,
            seed,
        )
        .map_err(check_err)?,
        check_deviation_bound(
            DeviationPairKind::WignerAgainstZero,
            3,
            x,
            deviation_trials,
            seed,
        )
        .map_err(check_err)?,
    ];
    let odd_power =
        check_odd_dilation_powers(trials, (4, 6), &[0, 1, 2], seed).map_err(check_err)?;
    let golden = check_golden_thompson(trials, 5, seed).map_err(check_err)?;
    let suite = LemmaSuite::collect(deviation, odd_power, golden);
    write_envelope(out, "lemmas.json", None, Some(seed), &suite)?;
    let file = write_file(out, "lemmas.csv", &suite.to_csv())?;
    eprintln!("check-lemmas: {} -> {}", suite.verdict, file.display());
    Ok(suite.verdict)
}

fn cmd_compensator(path: &Path, xi: f64, truncation: u32, out: &Path) -> Result<Verdict, CliError> {
    let (config, compiled) = load_scenario(path)?;
    let check = check_domination(&compiled, xi, truncation, 1e-9).map_err(check_err)?;
    eprintln!(
        "compensator: min gap eigenvalue {:.3e}, tolerance {:.3e} + tail {:.3e} {}",
        check.min_gap_eigenvalue, check.tolerance, check.tail_estimate, check.verdict
    );
    let file = write_envelope(
        out,
        &format!("{}.compensator.json", compiled.name),
        Some(&config),
        None,
        &check,
    )?;
    eprintln!("check-compensator: {} -> {}", check.verdict, file.display());
    Ok(check.verdict)
}

fn cmd_report(path: &Path, reps: u64, seed: u64, out: &Path) -> Result<Verdict, CliError> {
    let started = Instant::now();
    let (config, compiled) = load_scenario(path)?;
    let variance = compiled
        .variance_report()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let name = compiled.name.clone();

    let tail: Option<TailExperiment> = read_envelope(&out.join(format!("{name}.tail.json")))?;
    let supermartingale: Option<Vec<SupermartingaleCheck>> =
        read_envelope(&out.join(format!("{name}.supermartingale.json")))?;
    let compensator = read_envelope(&out.join(format!("{name}.compensator.json")))?;
    let lemmas: Option<LemmaSuite> = read_envelope(&out.join("lemmas.json"))?;

    let variance_consistency = check_variance(&compiled, reps, seed).map_err(check_err)?;
    let mean_norm = check_mean_norm(&compiled, reps, seed).map_err(check_err)?;

    let mut report = BoundReport {
        scenario: name.clone(),
        toolkit_version: TOOLKIT_VERSION.to_string(),
        master_seed: seed,
        runtime_seconds: 0.0,
        config,
        variance,
        preset_consistency: preset_consistency(&compiled)?,
        tail,
        supermartingale: supermartingale.unwrap_or_default(),
        compensator,
        variance_consistency: Some(variance_consistency),
        mean_norm: Some(mean_norm),
        lemmas,
        verdict: Verdict::Pass,
    };
    report.finalize_verdict();
    report.runtime_seconds = started.elapsed().as_secs_f64();
    let file = write_file(out, &format!("{name}.report.json"), &report.to_json())?;
    eprintln!("report: {} -> {}", report.verdict, file.display());
    Ok(report.verdict)
}

/// Built-in preset instances with concrete parameters.
fn builtin_presets() -> Vec<(String, Preset)> {
    use rand::Rng;
    let mut seeded = matcon::rng::substream(7, &[104]);
    let tropp_pieces: Vec<Matrix> = (0..4)
        .map(|_| Matrix::from_fn(2, 2, |_, _| seeded.gen_range(-1.0..1.0)))
        .collect();
    vec![
        (
            "counting_matrix".into(),
            Preset::CountingMatrix {
                c: PiecewiseProcess::constant(5.0, Matrix::filled(3, 3, 1.0)),
                intensity: IntensitySpec::constant(5.0, Matrix::filled(3, 3, 1.0))
                    .expect("nonnegative"),
            },
        ),
        (
            "scalar_point_process".into(),
            Preset::ScalarPointProcess {
                weights: PiecewiseProcess::constant(
                    2.0,
                    Matrix::from_rows(vec![vec![0.5, -0.8, 0.3]]).expect("well formed"),
                ),
                intensity: IntensitySpec::constant(
                    2.0,
                    Matrix::from_rows(vec![vec![1.0], vec![2.0], vec![0.5]]).expect("well formed"),
                )
                .expect("nonnegative"),
            },
        ),
        (
            "static_gaussian".into(),
            Preset::StaticGaussian {
                c: Matrix::filled(20, 20, 1.0),
            },
        ),
        (
            "static_poisson".into(),
            Preset::StaticPoisson {
                lam: Matrix::filled(5, 5, 2.0),
            },
        ),
        (
            "tropp_continuous".into(),
            Preset::TroppContinuous {
                integrand: PiecewiseProcess::new(vec![0.0, 1.0, 2.0, 3.0, 4.0], tropp_pieces)
                    .expect("well formed"),
            },
        ),
    ]
}

fn cmd_presets(out: &Path) -> Result<Verdict, CliError> {
    for (name, preset) in builtin_presets() {
        let config = scenario_for_preset(&preset, &name);
        let closed = preset
            .closed_form()
            .map_err(|e| CliError::Config(e.to_string()))?;
        let file = write_file(out, &format!("{name}.json"), &config.to_json())?;
        println!(
            "{name}: dims {}x{}, sigma_sq {}, written to {}",
            closed.dims.0,
            closed.dims.1,
            closed.sigma_sq,
            file.display()
        );
    }
    Ok(Verdict::Pass)
}
