//! Command-line interface: screen, calibrate, simulate, waterfall.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hubscreen::io::{
    load_matrix, read_report, sha256_hex, write_report, write_trajectory_csv, write_waterfall_csv,
    IngestOptions, MissingPolicy, Orientation, Provenance, ReportBundle,
};
use hubscreen::sim::{run_monte_carlo, Shape, SimModel, SimSpec};
use hubscreen::stats::xi_rate;
use hubscreen::{
    build_waterfall, cap_probability, critical_threshold, expected_hub_count, fwer, gram_spectrum,
    screen, standardize, trajectory, u_scores, y_scores, Error, GraphEngine, PhiConvention,
    ScreeningMode, ScreeningParams,
};

#[derive(Parser)]
#[command(
    name = "hubscreen",
    version,
    about = "Screen high-dimensional data for correlation and partial correlation hubs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the screening pipeline on a delimited data file
    Screen(ScreenArgs),
    /// Print thresholds, rates and expected counts for given (n, p)
    Calibrate(CalibrateArgs),
    /// Monte Carlo screening of synthetic data, result as JSON
    Simulate(SimulateArgs),
    /// Re-emit waterfall curves or one trajectory from a report as CSV
    Waterfall(WaterfallArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Corr,
    Parcor,
}

impl From<ModeArg> for ScreeningMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Corr => ScreeningMode::Correlation,
            ModeArg::Parcor => ScreeningMode::PartialCorrelation,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    Paper,
    Poisson,
}

impl From<ConventionArg> for PhiConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Paper => PhiConvention::PaperPvalue,
            ConventionArg::Poisson => PhiConvention::PoissonLimit,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Exact,
    Range,
}

impl From<EngineArg> for GraphEngine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Exact => GraphEngine::Exact,
            EngineArg::Range => GraphEngine::Range,
        }
    }
}

#[derive(Args)]
struct ScreenArgs {
    /// Input delimited text file
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Initial screening threshold ρ* in (0, 1]
    #[arg(long)]
    rho_star: f64,
    /// Cap reported per-degree statistics at this δ (0 = no cap)
    #[arg(long, default_value_t = 0)]
    delta_max: usize,
    #[arg(long, value_enum, default_value = "poisson")]
    phi_convention: ConventionArg,
    /// Output directory for report.json, waterfall.csv, provenance.json
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum, default_value = "exact")]
    engine: EngineArg,
    /// Dependency constant J
    #[arg(long, default_value_t = 1.0)]
    j: f64,
    /// Field delimiter
    #[arg(long, default_value = ",")]
    delimiter: char,
    /// Input has no header row
    #[arg(long)]
    no_header: bool,
    /// Treat rows as variables instead of samples
    #[arg(long)]
    variables_as_rows: bool,
    /// Drop columns containing missing values instead of failing
    #[arg(long)]
    drop_missing: bool,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    /// Largest δ to tabulate
    #[arg(long, default_value_t = 1)]
    delta_max: usize,
    /// Dependency constant J
    #[arg(long, default_value_t = 1.0)]
    j: f64,
    #[arg(long, value_enum, default_value = "poisson")]
    phi_convention: ConventionArg,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    /// Block size for the block model
    #[arg(long)]
    k: Option<usize>,
    /// Within-block correlation for the block model
    #[arg(long)]
    block_rho: Option<f64>,
    /// Degrees of freedom for the elliptical model
    #[arg(long)]
    dof: Option<f64>,
    #[arg(long)]
    rho: f64,
    #[arg(long)]
    delta: usize,
    #[arg(long)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value = "corr")]
    mode: ModeArg,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Identity,
    Block,
    Elliptical,
}

#[derive(Args)]
struct WaterfallArgs {
    /// report.json produced by `screen`
    #[arg(long)]
    report: PathBuf,
    /// Emit the trajectory of this vertex label instead of the full curves
    #[arg(long)]
    vertex: Option<String>,
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Screen(args) => cmd_screen(args),
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Waterfall(args) => cmd_waterfall(args),
    };
    if let Err(err) = outcome {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}

fn init_threads(threads: Option<usize>) -> usize {
    if let Some(t) = threads {
        // ignore failure: the global pool can only be set once per process
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
        t
    } else {
        rayon::current_num_threads()
    }
}

fn cmd_screen(args: ScreenArgs) -> Result<(), Error> {
    let threads = init_threads(args.threads);
    if !(args.rho_star > 0.0 && args.rho_star <= 1.0) {
        return Err(Error::InvalidParams(format!(
            "--rho-star must lie in (0, 1], got {}",
            args.rho_star
        )));
    }
    let started = Instant::now();
    let opts = IngestOptions {
        delimiter: args.delimiter as u8,
        has_header: !args.no_header,
        orientation: if args.variables_as_rows {
            Orientation::VariablesAsRows
        } else {
            Orientation::SamplesAsRows
        },
        missing_policy: if args.drop_missing {
            MissingPolicy::DropColumns
        } else {
            MissingPolicy::FailOnMissing
        },
    };
    let bytes = std::fs::read(&args.input)?;
    let input_sha256 = sha256_hex(&bytes);
    let loaded = load_matrix(&args.input, &opts)?;
    let data = loaded.data;
    if !loaded.dropped.is_empty() {
        eprintln!(
            "dropped {} column(s) with missing values: {}",
            loaded.dropped.len(),
            loaded.dropped.join(", ")
        );
    }

    let mode: ScreeningMode = args.mode.into();
    let t = standardize(&data)?;
    let u = u_scores(&t, data.labels())?;
    let z = match mode {
        ScreeningMode::Correlation => u,
        ScreeningMode::PartialCorrelation => {
            let spectrum = gram_spectrum(&u)?;
            y_scores(&u, &spectrum)?
        }
    };

    let params = ScreeningParams::new(data.n(), data.p(), 1, args.rho_star, mode)
        .with_j(args.j)
        .with_convention(args.phi_convention.into());
    let mut report = screen(&z, args.rho_star, &params, args.engine.into())?;
    if args.delta_max > 0 {
        truncate_report(&mut report, args.delta_max);
    }
    let waterfall = build_waterfall(&report);

    let provenance = Provenance {
        input_path: args.input.display().to_string(),
        input_sha256,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        engine: match args.engine {
            EngineArg::Exact => "exact".to_string(),
            EngineArg::Range => "range".to_string(),
        },
        threads,
        elapsed_seconds: started.elapsed().as_secs_f64(),
        parameters: report.params.clone(),
        dropped_columns: loaded.dropped.clone(),
    };
    let bundle = ReportBundle {
        report,
        waterfall,
        provenance,
    };
    write_report(&bundle, &args.out)?;

    let summary = screen_summary(&bundle);
    std::fs::write(args.out.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(())
}

/// Cap per-degree output at `delta_max` without touching discovery degrees.
fn truncate_report(report: &mut hubscreen::ScreeningReport, delta_max: usize) {
    report.counts.retain(|&delta, _| delta <= delta_max);
    for rec in &mut report.discoveries {
        rec.profile.truncate(delta_max);
        rec.lambdas.truncate(delta_max);
        rec.pvalues.truncate(delta_max);
    }
    report.d_max = report.d_max.min(delta_max);
}

fn screen_summary(bundle: &ReportBundle) -> String {
    use std::fmt::Write as _;
    let report = &bundle.report;
    let params = &report.params;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "hub screening: n={} p={} mode={} rho_star={} engine={}",
        params.n, params.p, params.mode, params.rho, bundle.provenance.engine
    );
    match critical_threshold(params.p, params.n, 1, params.j_factor, params.phi_convention) {
        Ok(rc) => {
            let _ = writeln!(s, "critical threshold rho_c(delta=1) = {rc:.6}");
        }
        Err(err) => {
            let _ = writeln!(s, "critical threshold rho_c(delta=1): {err}");
        }
    }
    let _ = writeln!(
        s,
        "discoveries: {} vertices with degree >= 1, max degree {}",
        report.discoveries.len(),
        report.d_max
    );
    let _ = writeln!(s, "{:>6} {:>10} {:>14} {:>12}", "delta", "N", "E[N]", "FWER");
    for (&delta, &count) in &report.counts {
        let per_delta = params.clone().with_delta(delta);
        let expected = expected_hub_count(&per_delta)
            .map(|e| e.binomial)
            .unwrap_or(f64::NAN);
        let alpha = fwer(&per_delta).unwrap_or(f64::NAN);
        let _ = writeln!(s, "{delta:>6} {count:>10} {expected:>14.2} {alpha:>12.4}");
    }
    let _ = writeln!(
        s,
        "elapsed: {:.2}s with {} thread(s)",
        bundle.provenance.elapsed_seconds, bundle.provenance.threads
    );
    s
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<(), Error> {
    if args.delta_max < 1 {
        return Err(Error::InvalidParams("--delta-max must be at least 1".into()));
    }
    let convention: PhiConvention = args.phi_convention.into();
    println!(
        "calibration for n={} p={} J={} convention={:?}",
        args.n, args.p, args.j, convention
    );
    for delta in 1..=args.delta_max {
        match critical_threshold(args.p, args.n, delta, args.j, convention) {
            Ok(rc) => println!("delta={delta} rho_c={rc:.8}"),
            Err(err) => println!("delta={delta} rho_c: {err}"),
        }
        println!(
            "{:>8} {:>14} {:>14} {:>14} {:>12}",
            "rho", "P0", "xi", "E[N]", "FWER"
        );
        for step in 1..=19 {
            let rho = step as f64 * 0.05;
            let params = ScreeningParams::new(args.n, args.p, delta, rho, ScreeningMode::Correlation)
                .with_j(args.j)
                .with_convention(convention);
            let p0 = cap_probability(rho, args.n)?;
            let xi = xi_rate(&params)?;
            let expected = expected_hub_count(&params)?;
            let alpha = fwer(&params)?;
            println!(
                "{rho:>8.2} {p0:>14.6e} {:>14.6e} {:>14.6e} {alpha:>12.6}",
                xi.linear * args.j,
                expected.binomial
            );
        }
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Error> {
    init_threads(args.threads);
    let model = match args.model {
        ModelArg::Identity => SimModel::IdentityGaussian,
        ModelArg::Block => {
            let k = args.k.ok_or_else(|| {
                Error::InvalidParams("--k is required for the block model".into())
            })?;
            let block_rho = args.block_rho.ok_or_else(|| {
                Error::InvalidParams("--block-rho is required for the block model".into())
            })?;
            SimModel::BlockSparseGaussian { k, block_rho }
        }
        ModelArg::Elliptical => {
            let dof = args.dof.ok_or_else(|| {
                Error::InvalidParams("--dof is required for the elliptical model".into())
            })?;
            let shape = match (args.k, args.block_rho) {
                (Some(k), Some(block_rho)) => Shape::Block { k, block_rho },
                (None, None) => Shape::Identity,
                _ => {
                    return Err(Error::InvalidParams(
                        "block shape needs both --k and --block-rho".into(),
                    ))
                }
            };
            SimModel::EllipticalT { dof, shape }
        }
    };
    let spec = SimSpec {
        n: args.n,
        p: args.p,
        seed: args.seed,
        model,
        trials: args.trials,
    };
    let result = run_monte_carlo(&spec, args.rho, args.delta, args.mode.into())?;
    println!("{}", serde_json::to_string_pretty(&result)?);
    Ok(())
}

fn cmd_waterfall(args: WaterfallArgs) -> Result<(), Error> {
    let report = read_report(&args.report)?;
    let stdout = std::io::stdout();
    match args.vertex {
        Some(label) => {
            let rec = report
                .discoveries
                .iter()
                .find(|rec| rec.label == label)
                .ok_or_else(|| {
                    Error::InvalidParams(format!("no discovery with label {label:?}"))
                })?;
            let traj = trajectory(&report, rec.vertex)?;
            write_trajectory_csv(stdout.lock(), &traj)?;
        }
        None => {
            let curves = build_waterfall(&report);
            write_waterfall_csv(stdout.lock(), &curves)?;
        }
    }
    Ok(())
}
