//! Command-line front end: parameter parsing, dB/unit conversion, curve
//! sweeps, and machine-readable table output.
//!
//! The library works in linear SNR and SI units; everything dB, kbit, MHz
//! or ms lives here.

mod output;
mod range;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use fascop::copula::{
    empirical_kendall, empirical_spearman, kendall_from_eta, sample_copula, spearman_from_eta,
};
use fascop::fas::{
    delay_outage_rate, fas_cdf, fas_pdf, jakes_correlation, outage_probability, DorParams,
    FasConfig, FasError, NakagamiMarginal, SnrParams,
};
use fascop::montecarlo::{
    estimate_exceedance, sample_fas_gains, sample_jakes_direct, scatter_pairs, McEstimate,
    ScatterSource,
};
use fascop::mvn::MvnOpts;
use fascop::specfun::bessel_j0;
use fascop::validation::run_suite;

use output::{emit, emit_text, Cell, Format, Manifest, Table};
use range::{ScalarOrRange, SweepRange};

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Parser)]
#[command(
    name = "fascop",
    version,
    about = "Channel statistics, outage probability and delay outage rate of a \
             fluid antenna system whose port dependence is a Gaussian copula \
             fitted to Jakes' spatial correlation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Outage probability versus average transmit SNR
    OpCurve(OpCurveArgs),
    /// Delay outage rate versus SNR, payload size, or bandwidth
    DorCurve(DorCurveArgs),
    /// CDF and PDF of the best-port channel gain over a gain grid
    Dist(DistArgs),
    /// Dependence measures (eta, Spearman's rho, Kendall's tau) per antenna size
    RankTable(RankTableArgs),
    /// Dump correlated 2-port sample pairs for scatterplots
    Sample(SampleArgs),
    /// Run the dual-oracle consistency suite
    Validate(ValidateArgs),
}

#[derive(Args)]
struct ChannelArgs {
    /// Number of antenna ports K
    #[arg(long, default_value_t = 4)]
    ports: usize,
    /// Antenna size W in wavelengths
    #[arg(long, default_value_t = 0.5)]
    width: f64,
    /// Nakagami shape parameter m (at least 0.5; 1 is Rayleigh)
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    /// Nakagami spread parameter mu
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
}

impl ChannelArgs {
    fn build(&self) -> Result<(FasConfig, NakagamiMarginal), FasError> {
        Ok((
            FasConfig::new(self.ports, self.width)?,
            NakagamiMarginal::new(self.m, self.mu)?,
        ))
    }

    fn params(&self) -> serde_json::Value {
        json!({
            "ports": self.ports,
            "width": self.width,
            "m": self.m,
            "mu": self.mu,
        })
    }
}

#[derive(Args)]
struct IoArgs {
    /// Seed for every stochastic stage (sampling and QMC shifts)
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Write to this path instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct MvnArgs {
    /// Absolute tolerance of the multivariate-normal CDF integrator
    #[arg(long, default_value_t = 1e-6)]
    mvn_tol: f64,
}

impl MvnArgs {
    fn opts(&self, seed: u64) -> MvnOpts {
        MvnOpts {
            abs_tol: self.mvn_tol,
            seed,
            ..MvnOpts::default()
        }
    }
}

#[derive(Args)]
struct OpCurveArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// Outage SNR threshold in dB
    #[arg(long, default_value_t = 10.0)]
    gamma_th_db: f64,
    /// Average transmit SNR sweep in dB, from:to:step
    #[arg(long, default_value = "0:25:1")]
    gamma_bar_db: SweepRange,
    /// Monte Carlo cross-check draws per estimator (0 disables MC columns)
    #[arg(long, default_value_t = 0)]
    mc_samples: usize,
    #[command(flatten)]
    mvn: MvnArgs,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepVar {
    Snr,
    Data,
    Bandwidth,
}

#[derive(Args)]
struct DorCurveArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// Which variable the rows run over
    #[arg(long, value_enum, default_value_t = SweepVar::Snr)]
    sweep: SweepVar,
    /// Average transmit SNR in dB; from:to:step when swept
    /// [default: 0:25:1 when swept, 20 otherwise]
    #[arg(long)]
    gamma_bar_db: Option<ScalarOrRange>,
    /// Payload in kilobits; from:to:step when swept
    /// [default: 1:10:0.5 when swept, 5 otherwise]
    #[arg(long)]
    data_kbits: Option<ScalarOrRange>,
    /// Bandwidth in MHz; from:to:step when swept
    /// [default: 0.5:5:0.25 when swept, 2 otherwise]
    #[arg(long)]
    bandwidth_mhz: Option<ScalarOrRange>,
    /// Delivery deadline in milliseconds
    #[arg(long, default_value_t = 3.0)]
    deadline_ms: f64,
    /// Monte Carlo cross-check draws per estimator (0 disables MC columns)
    #[arg(long, default_value_t = 0)]
    mc_samples: usize,
    #[command(flatten)]
    mvn: MvnArgs,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct DistArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// Gain grid, from:to:step
    #[arg(long, default_value = "0:3:0.05")]
    r: SweepRange,
    #[command(flatten)]
    mvn: MvnArgs,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct RankTableArgs {
    /// Comma-separated antenna sizes W (a 2-port geometry is implied)
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.5,1,2,4,6")]
    widths: Vec<f64>,
    /// Add empirical rank-correlation columns from this many copula draws
    #[arg(long, default_value_t = 0)]
    mc_samples: usize,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Source {
    /// Copula uniforms (u1, u2)
    CopulaUniform,
    /// Copula uniforms through the Nakagami quantile (h1, h2)
    CopulaNakagami,
    /// Direct Jakes construction; requires half-integer m
    JakesDirect,
}

#[derive(Args)]
struct SampleArgs {
    /// Which generator feeds the pair dump
    #[arg(long, value_enum)]
    source: Source,
    /// Antenna size W in wavelengths
    #[arg(long, default_value_t = 0.5)]
    width: f64,
    /// Nakagami shape parameter m
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    /// Nakagami spread parameter mu
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    /// Number of pairs
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct ValidateArgs {
    /// Reduced sample sizes: seconds instead of minutes
    #[arg(long)]
    quick: bool,
    #[command(flatten)]
    io: IoArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::OpCurve(args) => run_op_curve(args),
        Command::DorCurve(args) => run_dor_curve(args),
        Command::Dist(args) => run_dist(args),
        Command::RankTable(args) => run_rank_table(args),
        Command::Sample(args) => run_sample(args),
        Command::Validate(args) => run_validate(args),
    };
    match code {
        Ok(c) => ExitCode::from(c),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn usage_error(msg: &str) -> std::io::Result<u8> {
    eprintln!("error: {msg}");
    Ok(2)
}

/// Column layout shared by the curve commands; MC estimator columns appear
/// when a sample budget was given, the direct-Jakes pair only for
/// half-integer shapes.
struct CurveColumns {
    mc: bool,
    jakes: bool,
}

impl CurveColumns {
    fn names(&self, sweep: &str, metric: &str) -> Vec<String> {
        let mut cols = vec![sweep.to_string(), format!("{metric}_analytic")];
        if self.mc {
            cols.push(format!("{metric}_copula_mc"));
            cols.push(format!("{metric}_copula_stderr"));
            if self.jakes {
                cols.push(format!("{metric}_jakes_mc"));
                cols.push(format!("{metric}_jakes_stderr"));
            }
        }
        cols.push(format!("{metric}_siso"));
        cols
    }
}

struct McSamples {
    copula_best: Vec<f64>,
    jakes_best: Option<Vec<f64>>,
}

fn draw_mc_samples(config: &FasConfig, nak: &NakagamiMarginal, n: usize, seed: u64) -> McSamples {
    let copula_best = sample_fas_gains(config, nak, n, seed)
        .expect("copula sampling over a repaired matrix cannot fail")
        .best;
    let jakes_best = sample_jakes_direct(config, nak.m(), nak.mu(), n, seed ^ 0x4A41_4B45).ok();
    McSamples {
        copula_best,
        jakes_best,
    }
}

fn push_estimate(row: &mut Vec<Cell>, est: McEstimate) {
    row.push(est.value.into());
    row.push(est.std_err.into());
}

fn new_table(cols: &[String]) -> Table {
    Table::new(&cols.iter().map(String::as_str).collect::<Vec<_>>())
}

fn run_op_curve(args: OpCurveArgs) -> std::io::Result<u8> {
    let (config, nak) = match args.channel.build() {
        Ok(v) => v,
        Err(e) => return usage_error(&e.to_string()),
    };
    if !(args.mvn.mvn_tol > 0.0) {
        return usage_error("--mvn-tol must be positive");
    }
    if !args.gamma_th_db.is_finite() {
        return usage_error("--gamma-th-db must be finite");
    }
    let opts = args.mvn.opts(args.io.seed);
    let gamma_th = db_to_linear(args.gamma_th_db);
    let siso = FasConfig::new(1, args.channel.width).expect("SISO config");

    let mc =
        (args.mc_samples > 0).then(|| draw_mc_samples(&config, &nak, args.mc_samples, args.io.seed));
    let layout = CurveColumns {
        mc: mc.is_some(),
        jakes: mc.as_ref().is_some_and(|m| m.jakes_best.is_some()),
    };
    let mut table = new_table(&layout.names("gamma_bar_db", "op"));

    let mut eval_failed = false;
    for snr_db in args.gamma_bar_db.values() {
        let snr = SnrParams::new(db_to_linear(snr_db), gamma_th).expect("positive by construction");
        let mut row: Vec<Cell> = vec![snr_db.into()];
        match outage_probability(&snr, &config, &nak, &opts) {
            Ok(v) => row.push(v.into()),
            Err(e) => {
                eprintln!("evaluation failed at gamma_bar = {snr_db} dB: {e}");
                eval_failed = true;
                row.push(f64::NAN.into());
            }
        }
        if let Some(mc) = &mc {
            let thr = snr.gain_threshold();
            push_estimate(&mut row, estimate_exceedance(&mc.copula_best, thr));
            if let Some(jakes) = &mc.jakes_best {
                push_estimate(&mut row, estimate_exceedance(jakes, thr));
            }
        }
        row.push(
            outage_probability(&snr, &siso, &nak, &opts)
                .unwrap_or(f64::NAN)
                .into(),
        );
        table.push(row);
    }

    let manifest = Manifest::new(
        "op-curve",
        args.io.seed,
        json!({
            "channel": args.channel.params(),
            "gamma_th_db": args.gamma_th_db,
            "gamma_bar_db": args.gamma_bar_db.to_string(),
            "mc_samples": args.mc_samples,
            "mvn_tol": args.mvn.mvn_tol,
        }),
    );
    emit(&manifest, &table, args.io.format, args.io.out.as_deref())?;
    Ok(if eval_failed { 1 } else { 0 })
}

fn run_dor_curve(args: DorCurveArgs) -> std::io::Result<u8> {
    let (config, nak) = match args.channel.build() {
        Ok(v) => v,
        Err(e) => return usage_error(&e.to_string()),
    };
    if !(args.mvn.mvn_tol > 0.0) {
        return usage_error("--mvn-tol must be positive");
    }
    if !(args.deadline_ms > 0.0) {
        return usage_error("--deadline-ms must be positive");
    }
    let opts = args.mvn.opts(args.io.seed);

    // per-sweep defaults: the swept flag defaults to a grid, the others to
    // a paper-style scalar operating point
    let gamma_bar_db = args.gamma_bar_db.unwrap_or(match args.sweep {
        SweepVar::Snr => ScalarOrRange::Range("0:25:1".parse().unwrap()),
        _ => ScalarOrRange::Scalar(20.0),
    });
    let data_kbits = args.data_kbits.unwrap_or(match args.sweep {
        SweepVar::Data => ScalarOrRange::Range("1:10:0.5".parse().unwrap()),
        _ => ScalarOrRange::Scalar(5.0),
    });
    let bandwidth_mhz = args.bandwidth_mhz.unwrap_or(match args.sweep {
        SweepVar::Bandwidth => ScalarOrRange::Range("0.5:5:0.25".parse().unwrap()),
        _ => ScalarOrRange::Scalar(2.0),
    });

    let (sweep_name, grid) = match args.sweep {
        SweepVar::Snr => ("gamma_bar_db", gamma_bar_db.values()),
        SweepVar::Data => ("data_kbits", data_kbits.values()),
        SweepVar::Bandwidth => ("bandwidth_mhz", bandwidth_mhz.values()),
    };
    // non-swept variables must be plain numbers
    let fixed = |name: &str, v: &ScalarOrRange, swept: bool| -> Result<f64, String> {
        if swept {
            Ok(f64::NAN) // replaced by the grid value row by row
        } else {
            v.scalar().ok_or(format!(
                "--{name} must be a single value unless it is the swept variable"
            ))
        }
    };
    let fixed_vals = (|| -> Result<(f64, f64, f64), String> {
        Ok((
            fixed("gamma-bar-db", &gamma_bar_db, args.sweep == SweepVar::Snr)?,
            fixed("data-kbits", &data_kbits, args.sweep == SweepVar::Data)?,
            fixed(
                "bandwidth-mhz",
                &bandwidth_mhz,
                args.sweep == SweepVar::Bandwidth,
            )?,
        ))
    })();
    let (fixed_gamma_db, fixed_kbits, fixed_mhz) = match fixed_vals {
        Ok(v) => v,
        Err(msg) => return usage_error(&msg),
    };
    let deadline_s = args.deadline_ms * 1e-3;
    let siso = FasConfig::new(1, args.channel.width).expect("SISO config");

    let mc =
        (args.mc_samples > 0).then(|| draw_mc_samples(&config, &nak, args.mc_samples, args.io.seed));
    let layout = CurveColumns {
        mc: mc.is_some(),
        jakes: mc.as_ref().is_some_and(|m| m.jakes_best.is_some()),
    };
    let mut table = new_table(&layout.names(sweep_name, "dor"));

    let mut eval_failed = false;
    for x in grid {
        let (gamma_db, kbits, mhz) = match args.sweep {
            SweepVar::Snr => (x, fixed_kbits, fixed_mhz),
            SweepVar::Data => (fixed_gamma_db, x, fixed_mhz),
            SweepVar::Bandwidth => (fixed_gamma_db, fixed_kbits, x),
        };
        if !(kbits > 0.0 && mhz > 0.0) {
            return usage_error("payload and bandwidth must be positive");
        }
        let gamma_bar = db_to_linear(gamma_db);
        let dor = DorParams::new(kbits * 1000.0, mhz * 1e6, deadline_s)
            .expect("positive by construction");
        let mut row: Vec<Cell> = vec![x.into()];
        match delay_outage_rate(&dor, gamma_bar, &config, &nak, &opts) {
            Ok(v) => row.push(v.into()),
            Err(e) => {
                eprintln!("evaluation failed at {sweep_name} = {x}: {e}");
                eval_failed = true;
                row.push(f64::NAN.into());
            }
        }
        if let Some(mc) = &mc {
            let thr = dor.gain_threshold(gamma_bar);
            push_estimate(&mut row, estimate_exceedance(&mc.copula_best, thr));
            if let Some(jakes) = &mc.jakes_best {
                push_estimate(&mut row, estimate_exceedance(jakes, thr));
            }
        }
        row.push(
            delay_outage_rate(&dor, gamma_bar, &siso, &nak, &opts)
                .unwrap_or(f64::NAN)
                .into(),
        );
        table.push(row);
    }

    let manifest = Manifest::new(
        "dor-curve",
        args.io.seed,
        json!({
            "channel": args.channel.params(),
            "sweep": sweep_name,
            "gamma_bar_db": gamma_bar_db.to_string(),
            "data_kbits": data_kbits.to_string(),
            "bandwidth_mhz": bandwidth_mhz.to_string(),
            "deadline_ms": args.deadline_ms,
            "mc_samples": args.mc_samples,
            "mvn_tol": args.mvn.mvn_tol,
        }),
    );
    emit(&manifest, &table, args.io.format, args.io.out.as_deref())?;
    Ok(if eval_failed { 1 } else { 0 })
}

fn run_dist(args: DistArgs) -> std::io::Result<u8> {
    let (config, nak) = match args.channel.build() {
        Ok(v) => v,
        Err(e) => return usage_error(&e.to_string()),
    };
    if !(args.mvn.mvn_tol > 0.0) {
        return usage_error("--mvn-tol must be positive");
    }
    let opts = args.mvn.opts(args.io.seed);
    let mut table = Table::new(&["r", "cdf", "pdf"]);
    let mut eval_failed = false;
    for r in args.r.values() {
        let cdf = match fas_cdf(r, &config, &nak, &opts) {
            Ok(v) => Cell::from(v),
            Err(e) => {
                eprintln!("evaluation failed at r = {r}: {e}");
                eval_failed = true;
                Cell::from(f64::NAN)
            }
        };
        // the density is undefined where the marginal CDF sits on 0 or 1;
        // those cells stay empty
        let pdf = match fas_pdf(r, &config, &nak, &opts) {
            Ok(v) => Cell::from(v),
            Err(FasError::BoundaryDensity) => Cell::Empty,
            Err(e) => {
                eprintln!("evaluation failed at r = {r}: {e}");
                eval_failed = true;
                Cell::from(f64::NAN)
            }
        };
        table.push(vec![r.into(), cdf, pdf]);
    }
    let manifest = Manifest::new(
        "dist",
        args.io.seed,
        json!({
            "channel": args.channel.params(),
            "r": args.r.to_string(),
            "mvn_tol": args.mvn.mvn_tol,
        }),
    );
    emit(&manifest, &table, args.io.format, args.io.out.as_deref())?;
    Ok(if eval_failed { 1 } else { 0 })
}

fn run_rank_table(args: RankTableArgs) -> std::io::Result<u8> {
    if args.widths.is_empty() {
        return usage_error("--widths needs at least one antenna size");
    }
    if args.widths.iter().any(|w| !(*w > 0.0)) {
        return usage_error("antenna sizes must be positive");
    }
    let mut cols = vec!["w", "eta", "rho_s", "tau_k"];
    if args.mc_samples > 0 {
        cols.push("rho_s_mc");
        cols.push("tau_k_mc");
    }
    let mut table = Table::new(&cols);
    for (i, &w) in args.widths.iter().enumerate() {
        let eta = bessel_j0(2.0 * std::f64::consts::PI * w);
        let rho_s = spearman_from_eta(eta).expect("J0 lies in [-1, 1]");
        let tau_k = kendall_from_eta(eta).expect("J0 lies in [-1, 1]");
        let mut row: Vec<Cell> = vec![w.into(), eta.into(), rho_s.into(), tau_k.into()];
        if args.mc_samples > 0 {
            let config = FasConfig::new(2, w).expect("validated above");
            let batch = sample_copula(
                &jakes_correlation(&config),
                args.mc_samples,
                args.io.seed ^ ((i as u64) << 8),
            )
            .expect("repaired matrix samples");
            row.push(empirical_spearman(&batch, 0, 1).expect("n >= 2").into());
            row.push(empirical_kendall(&batch, 0, 1).expect("n >= 2").into());
        }
        table.push(row);
    }
    let manifest = Manifest::new(
        "rank-table",
        args.io.seed,
        json!({
            "widths": args.widths,
            "mc_samples": args.mc_samples,
        }),
    );
    emit(&manifest, &table, args.io.format, args.io.out.as_deref())?;
    Ok(0)
}

fn run_sample(args: SampleArgs) -> std::io::Result<u8> {
    if args.n == 0 {
        return usage_error("--n must be positive");
    }
    let config = match FasConfig::new(2, args.width) {
        Ok(c) => c,
        Err(e) => return usage_error(&e.to_string()),
    };
    let nak = match NakagamiMarginal::new(args.m, args.mu) {
        Ok(n) => n,
        Err(e) => return usage_error(&e.to_string()),
    };
    if args.source == Source::JakesDirect && (2.0 * args.m).fract().abs() > 1e-9 {
        return usage_error("--source jakes-direct requires 2m to be an integer");
    }
    let source = match args.source {
        Source::CopulaUniform => ScatterSource::CopulaUniform,
        Source::CopulaNakagami => ScatterSource::CopulaMarginal(&nak),
        Source::JakesDirect => ScatterSource::JakesDirect {
            m: args.m,
            mu: args.mu,
        },
    };
    let pairs = match scatter_pairs(&config, source, args.n, args.io.seed) {
        Ok(p) => p,
        Err(e) => return usage_error(&e.to_string()),
    };
    let cols = if args.source == Source::CopulaUniform {
        ["u1", "u2"]
    } else {
        ["h1", "h2"]
    };
    let mut table = Table::new(&cols);
    for (x, y) in pairs {
        table.push(vec![x.into(), y.into()]);
    }
    let source_name = match args.source {
        Source::CopulaUniform => "copula-uniform",
        Source::CopulaNakagami => "copula-nakagami",
        Source::JakesDirect => "jakes-direct",
    };
    let manifest = Manifest::new(
        "sample",
        args.io.seed,
        json!({
            "source": source_name,
            "width": args.width,
            "m": args.m,
            "mu": args.mu,
            "n": args.n,
        }),
    );
    emit(&manifest, &table, args.io.format, args.io.out.as_deref())?;
    Ok(0)
}

fn run_validate(args: ValidateArgs) -> std::io::Result<u8> {
    let report = run_suite(args.quick, args.io.seed);
    // human-readable lines to stderr; the byte-stable report goes to stdout
    // or the requested file
    for c in &report.checks {
        eprintln!(
            "{} {} (observed {:e} <= bound {:e}) - {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.observed,
            c.bound,
            c.detail
        );
    }
    let manifest = Manifest::new("validate", report.seed, json!({ "quick": report.quick }));
    let rendered = match args.io.format {
        Format::Csv => {
            let mut s = format!(
                "# manifest: {}\n",
                serde_json::to_string(&manifest).expect("manifest serializes")
            );
            s.push_str("check,passed,observed,bound\n");
            for c in &report.checks {
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    c.name, c.passed, c.observed, c.bound
                ));
            }
            s
        }
        Format::Json => {
            let doc = json!({
                "manifest": manifest,
                "checks": report.checks.iter().map(|c| json!({
                    "name": c.name,
                    "passed": c.passed,
                    "observed": c.observed,
                    "bound": c.bound,
                    "detail": c.detail,
                })).collect::<Vec<_>>(),
                "all_passed": report.all_passed(),
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
            s.push('\n');
            s
        }
    };
    emit_text(&rendered, args.io.out.as_deref())?;
    Ok(if report.all_passed() { 0 } else { 1 })
}
