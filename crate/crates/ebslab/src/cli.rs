use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ebslab_core::rng::{CounterRng, Purpose};
use ebslab_core::{credible, mmle, sparsity, thresholds};
use ebslab_core::{ConvolvedDensity, EbConstants, EllFloor, SlabModel};

use crate::config::SimulateConfig;
use crate::error::{exit, CliError, CliResult};
use crate::report::{self, KeyValueReport, RunManifest};
use crate::runner;
use crate::vector_io::{self, fmt_f64};

#[derive(Debug, Parser)]
#[command(name = "ebslab", version, about = "Spike-and-slab empirical Bayes for sparse normal means")]
pub struct Cli {
    /// Root seed for every random stream; overrides the config file's seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the mixing weight by marginal maximum likelihood and build a credible ball.
    Fit(FitArgs),
    /// Run a Monte Carlo experiment described by a JSON config.
    Simulate(SimulateArgs),
    /// Check the excessive-bias restriction for a signal vector.
    CheckEb(CheckEbArgs),
    /// Tabulate the thresholds zeta, tau and t over a log grid of alpha.
    Thresholds(ThresholdsArgs),
    /// Tabulate the convolved density g on a grid.
    Gtable(GtableArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SlabChoice {
    HeavyTail,
    Cauchy,
    Laplace,
}

#[derive(Debug, Clone, Args)]
pub struct SlabArgs {
    #[arg(long, value_enum, default_value = "heavy-tail")]
    pub slab: SlabChoice,
    /// Tail index of the heavy-tailed slab; required for `heavy-tail`.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Laplace scale.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
}

impl SlabArgs {
    pub fn model(&self) -> CliResult<SlabModel> {
        Ok(match self.slab {
            SlabChoice::HeavyTail => {
                let delta = self.delta.ok_or_else(|| CliError::Config("--delta is required for heavy-tail".into()))?;
                SlabModel::heavy_tail(delta)?
            }
            SlabChoice::Cauchy => SlabModel::cauchy(),
            SlabChoice::Laplace => SlabModel::laplace(self.scale)?,
        })
    }

    fn describe(&self) -> String {
        match self.slab {
            SlabChoice::HeavyTail => format!("heavy_tail(delta={})", self.delta.unwrap_or(f64::NAN)),
            SlabChoice::Cauchy => "cauchy".to_string(),
            SlabChoice::Laplace => format!("laplace(scale={})", self.scale),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Observations, one per line or a single-column CSV.
    pub data: PathBuf,
    #[command(flatten)]
    pub slab: SlabArgs,
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    /// Radius multiplier M of the moment ball.
    #[arg(long, default_value_t = 20.0)]
    pub m: f64,
    /// Also compute the quantile radius at this credibility level beta.
    #[arg(long)]
    pub quantile_beta: Option<f64>,
    /// Blow-up factor L applied to the quantile radius.
    #[arg(long, requires = "quantile_beta")]
    pub inflation: Option<f64>,
    #[arg(long, default_value_t = 2000)]
    pub draws: usize,
    /// Write the posterior medians here.
    #[arg(long)]
    pub theta_out: Option<PathBuf>,
    /// Write the report here instead of stdout; a manifest is written next to it.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// JSON experiment config.
    pub config: PathBuf,
    /// Per-replicate CSV; the summary and manifest are written next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EllFloorChoice {
    Log2Squared,
    LnSquared,
    One,
}

#[derive(Debug, Clone, Args)]
pub struct CheckEbArgs {
    /// Signal vector, one value per line.
    pub theta: PathBuf,
    #[arg(long)]
    pub s: usize,
    #[arg(long)]
    pub a: f64,
    #[arg(long)]
    pub cq: f64,
    #[arg(long)]
    pub dq: f64,
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    #[arg(long, value_enum, default_value = "log2-squared")]
    pub ell_floor: EllFloorChoice,
}

#[derive(Debug, Clone, Args)]
pub struct ThresholdsArgs {
    #[command(flatten)]
    pub slab: SlabArgs,
    #[arg(long, default_value_t = 1e-8)]
    pub alpha_min: f64,
    #[arg(long, default_value_t = 0.1)]
    pub alpha_max: f64,
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GtableArgs {
    #[command(flatten)]
    pub slab: SlabArgs,
    #[arg(long, default_value_t = 0.0)]
    pub x_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub x_max: f64,
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::INPUT } else { exit::OK };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> CliResult<i32> {
    match &cli.command {
        Command::Fit(a) => fit(a, cli.seed.unwrap_or(0)),
        Command::Simulate(a) => simulate(a, cli.seed),
        Command::CheckEb(a) => check_eb(a),
        Command::Thresholds(a) => threshold_table(a),
        Command::Gtable(a) => g_table(a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn fit(args: &FitArgs, seed: u64) -> CliResult<i32> {
    let xs = vector_io::read_vector(&args.data)?;
    if xs.len() < 2 {
        return Err(CliError::Data { path: args.data.clone(), message: "fit requires at least two values".into() });
    }
    let slab = args.slab.model()?;
    let g = ConvolvedDensity::new(slab)?;
    let fit = mmle::fit_alpha(&g, &xs)?;
    let alpha = fit.alpha_hat;
    let ball = credible::build_moment_ball(&g, &xs, args.q, args.m, alpha)?;
    let v = ball.radius / args.m;

    let mut r = KeyValueReport::new();
    r.text("n", xs.len())
        .text("slab", args.slab.describe())
        .real("alpha_hat", alpha)
        .real("alpha_n", fit.alpha_n)
        .text("at_lower_boundary", fit.at_lower_boundary)
        .text("at_upper_boundary", fit.at_upper_boundary)
        .real("score_at_solution", fit.score_at_solution)
        .text("iterations", fit.iterations)
        .real("t_alpha_hat", thresholds::t_of(&g, alpha)?)
        .text("nonzero_medians", ball.center.iter().filter(|&&c| c != 0.0).count())
        .real("q", args.q)
        .real("m", args.m)
        .real("posterior_radius", v)
        .real("ball_radius", ball.radius)
        .real("diameter_bound", ball.diameter_bound());
    if let Some(beta) = args.quantile_beta {
        let stream = CounterRng::new(seed).stream(0, Purpose::PosteriorDraw);
        let mut qball = credible::build_quantile_ball(&g, &xs, args.q, beta, alpha, args.draws, &stream)?;
        let l = args.inflation.unwrap_or(1.0);
        qball = qball.inflated(l)?;
        r.real("quantile_beta", beta).text("quantile_draws", args.draws).real("inflation", l).real(
            "quantile_radius",
            qball.radius,
        );
    }
    match &args.theta_out {
        Some(path) => {
            vector_io::write_vector(path, &ball.center)?;
            r.text("theta_hat_path", path.display());
        }
        None => {
            r.text("theta_hat_path", "none");
        }
    }
    if let Some(path) = &args.report {
        let manifest_path = report::sibling_path(path, "manifest.json");
        r.text("manifest", manifest_path.display());
        let config = serde_json::json!({
            "data": args.data.display().to_string(),
            "slab": args.slab.describe(),
            "q": args.q,
            "m": args.m,
            "quantile_beta": args.quantile_beta,
            "inflation": args.inflation,
            "draws": args.draws,
        });
        let mut manifest = RunManifest::new("fit", config, seed, 1);
        manifest.outputs.push(path.display().to_string());
        if let Some(p) = &args.theta_out {
            manifest.outputs.push(p.display().to_string());
        }
        if fit.at_lower_boundary || fit.at_upper_boundary {
            manifest.warnings.push("alpha_hat is at the boundary of [alpha_n, 1]".into());
        }
        manifest.finish();
        manifest.write(&manifest_path)?;
    }
    emit(args.report.as_deref(), &r.render())?;
    Ok(exit::OK)
}

fn simulate(args: &SimulateArgs, seed: Option<u64>) -> CliResult<i32> {
    let mut cfg = SimulateConfig::load(&args.config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let experiment = cfg.resolve()?;
    let workers = runner::workers_from_env()?;
    let resolved = serde_json::to_value(&cfg).map_err(|e| CliError::Config(e.to_string()))?;
    let mut manifest = RunManifest::new("simulate", resolved, cfg.seed, workers);
    let result = runner::run_parallel(&experiment, workers)?;

    let summary_path = report::sibling_path(&args.out, "summary.csv");
    let manifest_path = report::sibling_path(&args.out, "manifest.json");
    report::write_records_csv(&args.out, &result)?;
    report::write_summary_csv(&summary_path, &result)?;

    if result.below_sparsity_floor {
        manifest.warnings.push("s < (log n)^2: outside the regime covered by the theory".into());
    }
    if result.failures > 0 {
        manifest.warnings.push(format!("{} replicate(s) aborted by numerical errors", result.failures));
    }
    for w in &manifest.warnings {
        eprintln!("warning: {w}");
    }
    manifest.warnings.push("coverage bands are desk-scale calibrations, not finite-sample guarantees".into());
    manifest.outputs = vec![args.out.display().to_string(), summary_path.display().to_string()];
    manifest.finish();
    manifest.write(&manifest_path)?;
    if result.records.is_empty() {
        return Ok(exit::NUMERICAL);
    }
    Ok(exit::OK)
}

fn check_eb(args: &CheckEbArgs) -> CliResult<i32> {
    let theta = vector_io::read_vector(&args.theta)?;
    let constants = EbConstants::new(args.a, args.cq, args.dq, args.q)?;
    let floor = match args.ell_floor {
        EllFloorChoice::Log2Squared => EllFloor::Log2Squared,
        EllFloorChoice::LnSquared => EllFloor::NaturalLogSquared,
        EllFloorChoice::One => EllFloor::One,
    };
    let rep = sparsity::check_eb(&theta, args.s, &constants, floor)?;
    let mut r = KeyValueReport::new();
    r.text("n", theta.len())
        .text("s", args.s)
        .text("satisfied", rep.satisfied)
        .opt_count("smallest_ell", rep.smallest_ell)
        .opt_count("effective_sparsity", rep.effective_sparsity)
        .text("large_signal_count_at_ell", rep.large_signal_count_at_ell)
        .real("small_signal_energy_at_ell", rep.small_signal_energy_at_ell)
        .text("ell_floor", rep.ell_floor);
    emit(None, &r.render())?;
    Ok(if rep.satisfied { exit::OK } else { exit::NOT_SATISFIED })
}

fn threshold_table(args: &ThresholdsArgs) -> CliResult<i32> {
    let (lo, hi) = (args.alpha_min, args.alpha_max);
    if !(lo > 0.0 && lo <= hi && hi <= 1.0) || args.points < 1 {
        return Err(CliError::Config("need 0 < alpha-min <= alpha-max <= 1 and points >= 1".into()));
    }
    let g = ConvolvedDensity::new(args.slab.model()?)?;
    let mut text = String::from("alpha,zeta,tau,t\n");
    for k in 0..args.points {
        let alpha = match k {
            0 => lo,
            k if k + 1 == args.points => hi,
            k => (lo.ln() + k as f64 / (args.points - 1) as f64 * (hi.ln() - lo.ln())).exp(),
        };
        let t = thresholds::ThresholdTriple::compute(&g, alpha)?;
        text.push_str(&format!("{},{},{},{}\n", fmt_f64(alpha), fmt_f64(t.zeta), fmt_f64(t.tau), fmt_f64(t.t)));
    }
    emit(args.out.as_deref(), &text)?;
    Ok(exit::OK)
}

fn g_table(args: &GtableArgs) -> CliResult<i32> {
    if !(args.step > 0.0 && args.x_min <= args.x_max) {
        return Err(CliError::Config("need step > 0 and x-min <= x-max".into()));
    }
    let g = ConvolvedDensity::new(args.slab.model()?)?;
    let count = ((args.x_max - args.x_min) / args.step + 1e-9).floor() as usize + 1;
    let mut text = String::from("x,g,log_ratio,score_b,ln_g_slope\n");
    for k in 0..count {
        let x = args.x_min + k as f64 * args.step;
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(x),
            fmt_f64(g.g(x)),
            fmt_f64(g.log_ratio(x)),
            fmt_f64(thresholds::score_b(&g, x)),
            fmt_f64(g.score_ln_g(x)),
        ));
    }
    emit(args.out.as_deref(), &text)?;
    Ok(exit::OK)
}

