use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::{info, LevelFilter};

use bcs_tc::model::Config;
use bcs_tc::pipeline::{config_digest, run_config, sweep, ResultBundle, Stage, SweepAxis};
use bcs_tc::report::{self, Format};
use bcs_tc::verify::CheckOptions;
use bcs_tc::Error;

/// Exit code when the run finished but some identity check failed.
const EXIT_CHECKS_FAILED: u8 = 7;

#[derive(Parser, Debug)]
#[command(
    name = "bcs-tc",
    version,
    about = "BCS critical temperature, Ginzburg-Landau coefficients and the field-induced T_c shift"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
}

#[derive(clap::Args, Debug)]
struct Common {
    #[arg(long)]
    config: PathBuf,

    /// Output root; results go to <out>/<digest prefix>. Defaults to
    /// $BCS_TC_OUT_DIR, then ./bcs-tc-out.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,

    /// Worker threads for matrix assembly and sweeps.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Check the standing assumptions on V, W and mu.
    Validate(Common),
    /// Solve for beta_c.
    Tc(Common),
    /// Lambda0, Lambda1, Lambda2.
    Gl(Common),
    /// Effective Schroedinger problem and D_c.
    Dc(Common),
    /// T_c(h) table.
    Shift(Common),
    /// Full pipeline plus every identity check.
    Verify(Common),
    /// Run the shift stage over a list of parameter values.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        sweep_axis: AxisArg,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        sweep_values: Vec<f64>,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum AxisArg {
    H,
    Mu,
    VAmplitude,
    WAmplitude,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        }
    }
}

impl From<AxisArg> for SweepAxis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::H => SweepAxis::H,
            AxisArg::Mu => SweepAxis::Mu,
            AxisArg::VAmplitude => SweepAxis::VAmplitude,
            AxisArg::WAmplitude => SweepAxis::WAmplitude,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        _ => LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();

    let common = match &cli.verb {
        Verb::Validate(c)
        | Verb::Tc(c)
        | Verb::Gl(c)
        | Verb::Dc(c)
        | Verb::Shift(c)
        | Verb::Verify(c) => c,
        Verb::Sweep { common, .. } => common,
    };
    if let Some(n) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }

    let started_at = report::timestamp();
    let config = match Config::load(&common.config) {
        Ok(c) => c,
        Err(e) => return fail(&e, &report::output_dir(common.out.as_deref(), "")),
    };
    let dir = report::output_dir(common.out.as_deref(), &config_digest(&config));

    let stage = match &cli.verb {
        Verb::Validate(_) => Stage::Validate,
        Verb::Tc(_) => Stage::Tc,
        Verb::Gl(_) => Stage::Gl,
        Verb::Dc(_) => Stage::Dc,
        Verb::Shift(_) => Stage::Shift,
        Verb::Verify(_) => Stage::Verify,
        Verb::Sweep {
            sweep_axis,
            sweep_values,
            ..
        } => {
            return run_sweep(&config, (*sweep_axis).into(), sweep_values, &dir);
        }
    };
    let bundle = match run_config(&config, stage, &CheckOptions::default()) {
        Ok(b) => b,
        Err(e) => return fail(&e, &dir),
    };
    match report::emit(&bundle, &dir, common.format.into(), &started_at) {
        Ok(paths) => paths.iter().for_each(|p| info!("wrote {}", p.display())),
        Err(e) => return fail(&e, &dir),
    }
    summarize(&bundle, &dir);
    exit_status(&bundle, stage)
}

fn run_sweep(config: &Config, axis: SweepAxis, values: &[f64], dir: &Path) -> ExitCode {
    let report = match sweep(config, axis, values) {
        Ok(r) => r,
        Err(e) => return fail(&e, dir),
    };
    if let Err(e) = report::emit_sweep(&report, dir) {
        return fail(&e, dir);
    }
    let failed = report.rows.iter().filter(|r| r.error.is_some()).count();
    println!(
        "sweep: {} rows ({} failed), {} pairing solves, {} reused",
        report.rows.len(),
        failed,
        report.pair_stages,
        report.cache_hits
    );
    println!("output: {}", dir.display());
    ExitCode::SUCCESS
}

fn fail(err: &Error, dir: &Path) -> ExitCode {
    eprintln!("error: {err}");
    if let Some(p) = report::emit_error(err, dir) {
        eprintln!("error record: {}", p.display());
    }
    ExitCode::from(err.exit_code() as u8)
}

fn summarize(bundle: &ResultBundle, dir: &Path) {
    let v = &bundle.validation;
    println!(
        "assumptions: {}/{} hold",
        v.items.len() - v.failures().len(),
        v.items.len()
    );
    for item in v.failures() {
        println!("  FAILED {}: {}", item.id, item.detail);
    }
    if let Some(tc) = &bundle.tc {
        println!("beta_c = {}  T_c = {}", tc.beta_c, tc.t_c);
    }
    if let Some(gl) = &bundle.gl {
        println!(
            "Lambda0 = {:e}  Lambda1 = {:e}  Lambda2 = {:e}",
            gl.lambda0, gl.lambda1, gl.lambda2
        );
    }
    if let Some(eff) = &bundle.effective {
        println!("e0 = {}  D_c = {}", eff.ground_state.e0, eff.d_c);
    }
    if let Some(shift) = &bundle.shift {
        for w in &shift.warnings {
            println!("warning: {w}");
        }
    }
    if !bundle.checks.is_empty() {
        let failed: Vec<&str> = bundle
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.id.as_str())
            .collect();
        println!(
            "checks: {}/{} passed",
            bundle.checks.len() - failed.len(),
            bundle.checks.len()
        );
        for id in failed {
            println!("  FAILED {id}");
        }
    }
    println!("output: {}", dir.display());
}

fn exit_status(bundle: &ResultBundle, stage: Stage) -> ExitCode {
    if !bundle.validation.all_passed() {
        return ExitCode::from(Error::AssumptionViolation(String::new()).exit_code() as u8);
    }
    if stage == Stage::Verify && !bundle.checks_passed() {
        return ExitCode::from(EXIT_CHECKS_FAILED);
    }
    ExitCode::SUCCESS
}
