//! Command-line front end. `run` returns the process exit status: 0 on
//! success, 1 on a runtime error, 2 on a usage error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{configured_threads, run_benchmark, BenchmarkReport, Method, SimConfig};
use crate::engine::{fit, FitConfig, WeightStrategy};
use crate::error::{GocreError, Result};
use crate::family::LinkFamily;
use crate::firth::BiasMode;
use crate::io::{
    format_sig, load_csv, load_model, load_table, save_model, wilcoxon_rank_features, ModelFile,
    ResponseColumn,
};

#[derive(Parser, Debug)]
#[command(
    name = "gocre",
    version,
    about = "Generalized orthogonal components regression"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fit a model to a CSV file and write it as JSON.
    Fit(FitArgs),
    /// Predict linear predictors and means for the rows of a CSV file.
    Predict(PredictArgs),
    /// Run the AR(1) simulation study and write the summary report.
    Simulate(SimArgs),
    /// Like `simulate`, optionally adding wall-clock columns.
    Bench(BenchArgs),
    /// Rank predictors by two-sided Wilcoxon rank-sum p-value.
    RankFeatures(RankArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FamilyArg {
    Logit,
    Identity,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BiasArg {
    None,
    Full,
    Closed,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum WeightsArg {
    DynamicFirst,
    TwoRun,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Response column, by header name or 0-based index.
    #[arg(long)]
    pub response: String,
    #[arg(long, value_enum, default_value = "logit")]
    pub family: FamilyArg,
    #[arg(long, default_value_t = 10)]
    pub kappa_max: usize,
    /// Defaults to `closed` for logit and `none` for identity.
    #[arg(long, value_enum)]
    pub bias: Option<BiasArg>,
    #[arg(long, value_enum, default_value = "dynamic-first")]
    pub weights: WeightsArg,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_alpha: f64,
    #[arg(long, default_value_t = 100)]
    pub max_inner_iter: usize,
    #[arg(long, default_value_t = 0.5)]
    pub weight_relaxation: f64,
    #[arg(long)]
    pub standardize: bool,
    #[arg(long)]
    pub out_model: PathBuf,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimArgs {
    #[arg(long, default_value_t = 100)]
    pub n_train: usize,
    #[arg(long, default_value_t = 100)]
    pub n_valid: usize,
    #[arg(long, default_value_t = 200)]
    pub n_test: usize,
    #[arg(long, default_value_t = 1000)]
    pub p: usize,
    #[arg(long, default_value_t = 10)]
    pub n_blocks: usize,
    /// Comma-separated correlations.
    #[arg(long, value_delimiter = ',', default_value = "0,0.3,0.5,0.7")]
    pub rho: Vec<f64>,
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    pub laplace_location: f64,
    #[arg(long, default_value_t = 1.0)]
    pub laplace_scale: f64,
    #[arg(long, default_value_t = 20)]
    pub replicates: usize,
    #[arg(long, default_value_t = 10)]
    pub kappa_max: usize,
    #[arg(long, default_value_t = 0)]
    pub base_seed: u64,
    /// Comma-separated subset of irpls-m, irpls-dg, gocre0, gocre.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "irpls-m,irpls-dg,gocre0,gocre"
    )]
    pub methods: Vec<Method>,
    /// Summary CSV; standard output when omitted.
    #[arg(long)]
    pub out_report: Option<PathBuf>,
    /// Long-format CSV with one row per method, ρ, replicate and κ.
    #[arg(long)]
    pub out_replicates: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    /// Add mean wall-clock seconds and time relative to the fastest method.
    #[arg(long)]
    pub timings: bool,
}

#[derive(Args, Debug)]
pub struct RankArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub response: String,
    /// Keep only the K best-ranked predictors.
    #[arg(long)]
    pub top: Option<usize>,
    /// Ranking CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the response plus the selected predictors, in file order.
    #[arg(long)]
    pub out_data: Option<PathBuf>,
}

impl SimArgs {
    fn config(&self) -> SimConfig {
        SimConfig {
            n_train: self.n_train,
            n_valid: self.n_valid,
            n_test: self.n_test,
            p: self.p,
            n_blocks: self.n_blocks,
            rho: self.rho.first().copied().unwrap_or(0.0),
            laplace_location: self.laplace_location,
            laplace_scale: self.laplace_scale,
            replicates: self.replicates,
            kappa_max: self.kappa_max,
            base_seed: self.base_seed,
        }
    }
}

/// Parses `args` (program name first) and executes the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Fit(a) => cmd_fit(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Simulate(a) => cmd_simulate(&a, false),
        Command::Bench(a) => cmd_simulate(&a.sim, a.timings),
        Command::RankFeatures(a) => cmd_rank(a),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_fit(a: FitArgs) -> Result<()> {
    let data = load_csv(&a.data, &a.response.parse().expect("infallible"))?;
    let family = match a.family {
        FamilyArg::Logit => LinkFamily::logit(),
        FamilyArg::Identity => LinkFamily::identity(),
    };
    let bias = match a.bias {
        Some(BiasArg::None) => BiasMode::None,
        Some(BiasArg::Full) => BiasMode::FullDelta,
        Some(BiasArg::Closed) => BiasMode::ClosedFormDelta,
        None if family.is_logit() => BiasMode::ClosedFormDelta,
        None => BiasMode::None,
    };
    let config = FitConfig {
        kappa_max: a.kappa_max,
        tol_alpha: a.tol_alpha,
        max_inner_iter: a.max_inner_iter,
        weight_strategy: match a.weights {
            WeightsArg::DynamicFirst => WeightStrategy::DynamicFirstComponent,
            WeightsArg::TwoRun => WeightStrategy::TwoRun,
        },
        bias_mode: bias,
        weight_relaxation: a.weight_relaxation,
        standardize: a.standardize,
        ..FitConfig::default()
    };
    let model = fit(&data.data, &family, &config)?;
    let file = ModelFile::from_model(&model, &data.response, &data.predictors)?;
    save_model(&a.out_model, &file)?;
    let d = &model.diagnostics;
    eprintln!(
        "built {} component(s), stop reason {:?}, all converged: {}",
        d.components_built,
        d.stop_reason,
        d.all_converged()
    );
    Ok(())
}

fn cmd_predict(a: PredictArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let table = load_table(&a.data)?;
    let x = table.select(&model.predictors)?;
    let (eta, mean) = model.predict(x.view())?;
    let mut out = output(a.out.as_deref())?;
    writeln!(out, "row,eta,mean")?;
    for (i, (e, m)) in eta.iter().zip(&mean).enumerate() {
        writeln!(out, "{},{},{}", i, format_sig(*e), format_sig(*m))?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_simulate(a: &SimArgs, timings: bool) -> Result<()> {
    if a.rho.is_empty() || a.methods.is_empty() {
        return Err(GocreError::InvalidArgument(
            "need at least one rho and one method".into(),
        ));
    }
    let report = run_benchmark(&a.config(), &a.rho, &a.methods, configured_threads())?;
    let mut out = output(a.out_report.as_deref())?;
    write_report(&mut out, &report, timings)?;
    out.flush()?;
    if let Some(path) = &a.out_replicates {
        let mut w = BufWriter::new(File::create(path)?);
        write_replicates(&mut w, &report)?;
        w.flush()?;
    }
    Ok(())
}

/// One row per method and ρ. Wall-clock columns appear only with `timings`,
/// which keeps the default report byte-for-byte reproducible.
pub fn write_report<W: Write>(out: &mut W, report: &BenchmarkReport, timings: bool) -> Result<()> {
    let mut header = "method,rho,replicates,failures,convergence_frequency,median_mr,mr_spread,\
                      median_press,press_spread,median_press_sum,press_sum_spread"
        .to_string();
    if timings {
        header.push_str(",mean_seconds,relative_time");
    }
    writeln!(out, "{header}")?;
    let relative = report.relative_times();
    for (row, rel) in report.rows.iter().zip(relative) {
        let mut fields = vec![
            row.method.name().to_string(),
            format_sig(row.rho),
            row.replicates.to_string(),
            row.failures.to_string(),
        ];
        fields.extend(
            [
                row.convergence_frequency,
                row.median_mr,
                row.mr_spread,
                row.median_press,
                row.press_spread,
                row.median_press_sum,
                row.press_sum_spread,
            ]
            .map(format_sig),
        );
        if timings {
            fields.push(format_sig(row.mean_seconds));
            fields.push(format_sig(rel));
        }
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

/// Long format for plotting MR/PRESS against κ.
pub fn write_replicates<W: Write>(out: &mut W, report: &BenchmarkReport) -> Result<()> {
    writeln!(
        out,
        "method,rho,replicate,kappa,converged,valid_mr,valid_press,test_mr,test_press,test_press_sum,selected,error"
    )?;
    for o in &report.outcomes {
        if let Some(err) = &o.error {
            writeln!(
                out,
                "{},{},{},,,,,,,,,{:?}",
                o.method.name(),
                format_sig(o.rho),
                o.replicate,
                err.replace('"', "'")
            )?;
            continue;
        }
        for (v, t) in o.valid_curve.iter().zip(&o.test_curve) {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},",
                o.method.name(),
                format_sig(o.rho),
                o.replicate,
                v.kappa,
                v.converged,
                format_sig(v.mr),
                format_sig(v.press),
                format_sig(t.mr),
                format_sig(t.press),
                format_sig(t.press_sum),
                v.kappa == o.selected_kappa
            )?;
        }
    }
    Ok(())
}

fn cmd_rank(a: RankArgs) -> Result<()> {
    let response: ResponseColumn = a.response.parse().expect("infallible");
    let data = load_csv(&a.data, &response)?;
    let (p_values, order) = wilcoxon_rank_features(data.data.x.view(), data.data.y.view())?;
    let k = a.top.unwrap_or(order.len()).min(order.len());
    let mut out = output(a.out.as_deref())?;
    writeln!(out, "rank,column,name,p_value")?;
    for (rank, &j) in order.iter().take(k).enumerate() {
        writeln!(
            out,
            "{},{},{},{}",
            rank + 1,
            j,
            data.predictors[j],
            format_sig(p_values[j])
        )?;
    }
    out.flush()?;
    if let Some(path) = &a.out_data {
        let mut keep: Vec<usize> = order[..k].to_vec();
        keep.sort_unstable();
        let subset = crate::io::NamedDataset {
            data: crate::engine::Dataset::new(
                data.data.x.select(ndarray::Axis(1), &keep),
                data.data.y.clone(),
            )?,
            response: data.response.clone(),
            predictors: keep.iter().map(|&j| data.predictors[j].clone()).collect(),
        };
        crate::io::write_csv(path, &subset)?;
    }
    Ok(())
}

/// Sizes the global worker pool from `GOCRE_THREADS`.
pub fn init_threads() {
    let n = configured_threads();
    if n > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}
