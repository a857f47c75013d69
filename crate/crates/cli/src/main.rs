use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use blockmax::blocks::{circmax, disjoint_maxima, runs_weighted, sliding_maxima, CompressedBlocks};
use blockmax::boot::{bootstrap_ci, Anchor, BootstrapSpec, Correction, CorrectionTarget, Estimator, ResampleMethod};
use blockmax::fit::{default_truncation, fit_frechet, fit_gev, return_level_from_gev, WeightedSample};
use blockmax::io::{format_f64, parse_series_csv, series_to_csv};
use blockmax::mc::spec::format_experiment_spec;
use blockmax::mc::{parse_experiment_spec, run_experiment};
use blockmax::scan::{scan_to_csv, window_scan, ScanMethod, WindowScanSpec};
use blockmax::sim::Model;
use blockmax::{Error, TimeSeries};

mod report;

use report::Report;

#[derive(Parser)]
#[command(name = "blockmax", version, about = "Block maxima inference with circular block bootstrap intervals")]
struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate an ARMAX series and write it as a `value` CSV
    Simulate(SimulateArgs),
    /// Extract block maxima from a series
    Blocks(BlocksArgs),
    /// Fit a GEV or Fréchet model to block maxima
    Fit(FitArgs),
    /// Point estimate and basic bootstrap confidence interval
    BootstrapCi(BootArgs),
    /// Run a Monte Carlo experiment described by a spec file
    Experiment(ExperimentArgs),
    /// Estimates and intervals over moving windows
    WindowScan(ScanArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    ArmaxGpd,
    ArmaxPareto,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    model: ModelKind,
    /// GPD shape (armax-gpd)
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    gamma: f64,
    /// Pareto tail index (armax-pareto)
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Autoregression coefficient in [0, 1)
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    beta: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BlockKind {
    Disjoint,
    Sliding,
    Circular,
}

#[derive(Args)]
struct BlocksArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum)]
    method: BlockKind,
    #[arg(long)]
    r: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Write `block,value,multiplicity` rows instead of the maxima series
    #[arg(long)]
    compressed: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Gev,
    Frechet,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value_t = BlockKind::Sliding)]
    method: BlockKind,
    #[arg(long)]
    r: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, value_enum, default_value_t = Family::Gev)]
    family: Family,
    /// Fréchet truncation constant (default: 1e-6 times the median)
    #[arg(long)]
    c_trunc: Option<f64>,
    /// Also report the GEV return level for this period
    #[arg(long)]
    period: Option<f64>,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum CiMethod {
    Disjoint,
    Circular,
    SlidingCircular,
    NaiveSliding,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetKind {
    Mean,
    ReturnLevel,
    FrechetShape,
    FrechetScale,
    GevShape,
}

#[derive(Clone, Copy, ValueEnum)]
enum CorrectionKind {
    None,
    Auto,
    Factor,
}

#[derive(Clone, Copy, ValueEnum)]
enum CorrectionFor {
    Rl100,
    Mean,
}

#[derive(Args)]
struct BootOptions {
    #[arg(long, value_enum, default_value_t = TargetKind::ReturnLevel)]
    target: TargetKind,
    /// Return period in blocks
    #[arg(long, default_value_t = 100.0)]
    period: f64,
    #[arg(long)]
    r: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Bootstrap replicates
    #[arg(long = "replicates", short = 'B', default_value_t = 1000)]
    replicates: usize,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = CorrectionKind::None)]
    correction: CorrectionKind,
    /// Regression used by `--correction auto`
    #[arg(long, value_enum, default_value_t = CorrectionFor::Rl100)]
    correction_target: CorrectionFor,
    /// Enlargement factor used by `--correction factor`
    #[arg(long, default_value_t = 1.0)]
    factor: f64,
    #[arg(long)]
    c_trunc: Option<f64>,
}

#[derive(Args)]
struct BootArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value_t = CiMethod::SlidingCircular)]
    method: CiMethod,
    #[command(flatten)]
    opts: BootOptions,
    /// Permit the naive sliding bootstrap, which underestimates the variance
    #[arg(long)]
    allow_inconsistent: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment spec file
    spec: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    data: PathBuf,
    /// Window length in blocks
    #[arg(long)]
    window: usize,
    /// Window step in blocks
    #[arg(long, default_value_t = 1)]
    step: usize,
    /// Methods to scan (repeatable)
    #[arg(long = "method", value_enum, default_values_t = [ScanKind::Disjoint, ScanKind::SlidingCircular])]
    methods: Vec<ScanKind>,
    /// Moving-average width for the smoothed columns
    #[arg(long, default_value_t = 2)]
    smoothing: usize,
    #[command(flatten)]
    opts: BootOptions,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum ScanKind {
    Disjoint,
    SlidingCircular,
}

enum Failure {
    Usage(String),
    Io(String),
    Statistical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_statistical() {
            Failure::Statistical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

type Outcome = Result<(), Failure>;

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))
}

fn read_series(path: &Path) -> Result<TimeSeries, Failure> {
    parse_series_csv(&read_text(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Io(format!("cannot write output: {e}"))),
    }
}

fn print_report(r: &Report, json: bool) -> Outcome {
    for w in r.warnings() {
        eprintln!("warning: {w}");
    }
    emit(None, &if json { r.to_json() } else { r.to_text() })
}

fn simulate(a: SimulateArgs) -> Outcome {
    let model = match a.model {
        ModelKind::ArmaxGpd => Model::ArmaxGpd { gamma: a.gamma, beta: a.beta },
        ModelKind::ArmaxPareto => Model::ArmaxPareto { alpha: a.alpha, beta: a.beta },
    };
    let x = model.simulate(a.n, a.seed)?;
    emit(a.out.as_deref(), &series_to_csv(&x))
}

fn blocks(a: BlocksArgs) -> Outcome {
    let x = read_series(&a.data)?;
    let (values, block_len) = match a.method {
        BlockKind::Disjoint => (disjoint_maxima(&x, a.r)?.values, 1),
        BlockKind::Sliding => (sliding_maxima(&x, a.r)?.values, a.r),
        BlockKind::Circular => (circmax(&x, a.r, a.k)?.values, a.k * a.r),
    };
    let text = if a.compressed {
        let c = CompressedBlocks::from_values(&values, block_len, true)?;
        let mut s = String::from("block,value,multiplicity\n");
        for (i, b) in c.blocks.iter().enumerate() {
            for (v, mult) in b {
                s.push_str(&format!("{i},{},{mult}\n", format_f64(*v)));
            }
        }
        s
    } else {
        series_to_csv(&TimeSeries::new(values)?)
    };
    emit(a.out.as_deref(), &text)
}

fn sample_for(x: &[f64], method: BlockKind, r: usize, k: usize) -> Result<WeightedSample, Error> {
    match method {
        BlockKind::Disjoint => WeightedSample::from_values(&disjoint_maxima(x, r)?.values),
        BlockKind::Sliding => Ok(runs_weighted(&sliding_maxima(x, r)?.values)),
        BlockKind::Circular => Ok(CompressedBlocks::from_values(&circmax(x, r, k)?.values, k * r, false)?.unit_weighted()),
    }
}

fn fit(a: FitArgs) -> Outcome {
    let x = read_series(&a.data)?;
    let s = sample_for(&x, a.method, a.r, a.k)?;
    let mut rep = Report::new();
    rep.int("n", x.len() as u64).int("r", a.r as u64);
    match a.family {
        Family::Gev => {
            let f = fit_gev(&s)?;
            rep.text("family", "gev")
                .num("loc", f.params.loc)
                .num("scale", f.params.scale)
                .num("shape", f.params.shape)
                .num("loglik", f.loglik)
                .int("iterations", f.iterations as u64);
            if !f.converged {
                rep.warn("GEV optimiser stopped at its iteration limit");
            }
            if let Some(t) = a.period {
                rep.num("period", t).num("return_level", return_level_from_gev(&f.params, t)?);
            }
        }
        Family::Frechet => {
            let c = match a.c_trunc {
                Some(c) => c,
                None => default_truncation(&s)?,
            };
            let f = fit_frechet(&s, c)?;
            rep.text("family", "frechet")
                .num("shape", f.params.shape)
                .num("scale", f.params.scale)
                .num("loglik", f.loglik)
                .num("c_trunc", c);
            if let Some(t) = a.period {
                rep.num("period", t)
                    .num("return_level", return_level_from_gev(&f.params.to_gev(), t)?);
            }
        }
    }
    print_report(&rep, a.json)
}

fn estimator(o: &BootOptions) -> Estimator {
    match o.target {
        TargetKind::Mean => Estimator::Mean,
        TargetKind::ReturnLevel => Estimator::ReturnLevel { period: o.period },
        TargetKind::FrechetShape => Estimator::FrechetShape,
        TargetKind::FrechetScale => Estimator::FrechetScale,
        TargetKind::GevShape => Estimator::GevShape,
    }
}

fn correction(o: &BootOptions) -> Correction {
    match o.correction {
        CorrectionKind::None => Correction::None,
        CorrectionKind::Factor => Correction::Factor { factor: o.factor },
        CorrectionKind::Auto => Correction::Auto {
            target: match o.correction_target {
                CorrectionFor::Rl100 => CorrectionTarget::Rl100,
                CorrectionFor::Mean => CorrectionTarget::Mean,
            },
        },
    }
}

fn target_label(e: &Estimator) -> String {
    blockmax::scan::estimator_label(e)
}

fn bootstrap(a: BootArgs) -> Outcome {
    let x = read_series(&a.data)?;
    let o = &a.opts;
    let (resample, anchor, label) = match a.method {
        CiMethod::Disjoint => (ResampleMethod::Disjoint, Anchor::Disjoint, "disjoint"),
        CiMethod::Circular => (ResampleMethod::Circular { k: o.k }, Anchor::Circular, "circular"),
        CiMethod::SlidingCircular => (ResampleMethod::Circular { k: o.k }, Anchor::Sliding, "sliding-circular"),
        CiMethod::NaiveSliding => (ResampleMethod::NaiveSliding { k: o.k }, Anchor::Sliding, "naive-sliding"),
    };
    let est = estimator(o);
    let spec = BootstrapSpec {
        correction: correction(o),
        c_trunc: o.c_trunc,
        allow_inconsistent: a.allow_inconsistent,
        ..BootstrapSpec::new(resample, o.r, o.replicates, o.level, o.seed, est)
    };
    if matches!(a.method, CiMethod::NaiveSliding) && !a.allow_inconsistent {
        return Err(Failure::Usage(
            "the naive sliding bootstrap is inconsistent and underestimates the variance; \
             pass --allow-inconsistent to run it anyway"
                .into(),
        ));
    }
    if matches!(a.method, CiMethod::SlidingCircular) && o.k < 2 {
        return Err(Failure::Usage("sliding-circular intervals need --k 2 or larger".into()));
    }
    let res = bootstrap_ci(&x, &spec, anchor)?;
    let iv = res.interval;
    let mut rep = Report::new();
    rep.text("target", target_label(&est))
        .text("method", label)
        .int("n", x.len() as u64)
        .int("r", o.r as u64)
        .int("k", resample.k() as u64)
        .int("m", res.m as u64)
        .num("estimate", iv.point)
        .num("lower", iv.lower)
        .num("upper", iv.upper)
        .num("width", iv.width())
        .num("level", iv.level)
        .int("replicates", o.replicates as u64)
        .int("failures", res.replicates.failures as u64)
        .num("correction_factor", res.factor);
    if let Some(g) = res.shape_estimate {
        rep.num("shape_estimate", g);
    }
    for w in &res.warnings {
        rep.warn(w.clone());
    }
    print_report(&rep, a.json)
}

fn experiment(a: ExperimentArgs) -> Outcome {
    let text = read_text(&a.spec)?;
    let spec = parse_experiment_spec(&text).map_err(|e| Failure::Usage(format!("{}: {e}", a.spec.display())))?;
    let table = run_experiment(&spec)?;
    let mut out = format!("# blockmax {}\n", env!("CARGO_PKG_VERSION"));
    for line in format_experiment_spec(&spec).lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str(&table.to_csv());
    emit(a.out.as_deref(), &out)
}

fn scan(a: ScanArgs) -> Outcome {
    let x = read_series(&a.data)?;
    let o = &a.opts;
    let mut methods = a.methods.clone();
    methods.dedup();
    let spec = WindowScanSpec {
        window_blocks: a.window,
        r: o.r,
        step_blocks: a.step,
        targets: vec![estimator(o)],
        methods: methods
            .iter()
            .map(|m| match m {
                ScanKind::Disjoint => ScanMethod::Disjoint,
                ScanKind::SlidingCircular => ScanMethod::SlidingCircular,
            })
            .collect(),
        k: o.k,
        replicates: o.replicates,
        level: o.level,
        seed: o.seed,
        correction: correction(o),
        smoothing: a.smoothing,
    };
    let rows = window_scan(&x, &spec)?;
    emit(a.out.as_deref(), &scan_to_csv(&rows))
}

fn run(cli: Cli) -> Outcome {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Usage(format!("cannot set up {t} threads: {e}")))?;
    }
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Blocks(a) => blocks(a),
        Command::Fit(a) => fit(a),
        Command::BootstrapCi(a) => bootstrap(a),
        Command::Experiment(a) => experiment(a),
        Command::WindowScan(a) => scan(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Statistical(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(4)
        }
    }
}
