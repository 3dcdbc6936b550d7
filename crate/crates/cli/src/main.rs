//! `fringe-step`: synthesize fringe pairs, estimate phase steps, demodulate,
//! and run noise-sweep experiments.
//!
//! Exit status: 0 success, 2 usage, 3 data or format error, 4 numerical
//! degeneracy (blank frames, parallel frames, starved mask).

mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{ArgGroup, Args, Parser, Subcommand};
use fringe_step::{
    aggregate_mae, demodulate, estimate_step, load_pfm, read_csv, read_plan, run_plan, save_pfm, save_pgm_preview,
    synthesize, write_csv, Aggregator, Case, Estimator, ExperimentPlan, Field, Field32, Prefilter, PrefilterConfig,
    SynthSpec,
};

#[derive(Parser)]
#[command(name = "fringe-step", version, about = "Phase-step estimation for two-frame fringe patterns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic fringe pair and its ground truth as PFM files.
    Synth(SynthArgs),
    /// Estimate the phase step between two frames.
    Estimate(EstimateArgs),
    /// Recover the wrapped phase of a pair.
    Demod(DemodArgs),
    /// Run a noise sweep and write one CSV row per trial.
    Experiment(ExperimentArgs),
    /// Chart median MAE against noise level from a results CSV.
    Plot(PlotArgs),
    /// Print the default experiment plan in plan-file format.
    DefaultPlan,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    case: Case,
    /// Phase step in radians.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_3)]
    delta: f64,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Side length of the square images.
    #[arg(long, default_value_t = fringe_step::synth::DEFAULT_SIZE)]
    size: usize,
    #[arg(long, default_value_t = fringe_step::synth::DEFAULT_FRINGE_SCALE)]
    fringe_scale: f64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Also write 8-bit PGM previews.
    #[arg(long)]
    preview: bool,
}

#[derive(Args)]
struct PairArgs {
    #[arg(long)]
    i1: PathBuf,
    #[arg(long)]
    i2: PathBuf,
    #[arg(long, default_value = "none")]
    prefilter: Prefilter,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    pair: PairArgs,
    #[arg(long, default_value = "sin")]
    estimator: Estimator,
    #[arg(long, default_value = "median")]
    aggregator: Aggregator,
}

#[derive(Args)]
struct DemodArgs {
    #[command(flatten)]
    pair: PairArgs,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    preview: bool,
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["plan", "default_paper"])))]
struct ExperimentArgs {
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Cases I to III with the default sweep; also writes one chart per case.
    #[arg(long)]
    default_paper: bool,
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Only plot this case.
    #[arg(long)]
    case: Option<Case>,
}

fn load_pair(p: &PairArgs) -> anyhow::Result<(Field, Field)> {
    let load = |path: &Path| -> anyhow::Result<Field> {
        let f: Field32 = load_pfm(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(f.cast())
    };
    let (i1, i2) = (load(&p.i1)?, load(&p.i2)?);
    i1.check_same_shape(&i2)?;
    let config = PrefilterConfig::default();
    Ok((p.prefilter.apply(&i1, &config)?, p.prefilter.apply(&i2, &config)?))
}

fn save(path: &Path, f: &Field, preview: bool) -> anyhow::Result<()> {
    let f32_field: Field32 = f.cast();
    save_pfm(path, &f32_field).with_context(|| format!("writing {}", path.display()))?;
    if preview {
        let pgm = path.with_extension("pgm");
        save_pgm_preview(&pgm, &f32_field).with_context(|| format!("writing {}", pgm.display()))?;
    }
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> anyhow::Result<()> {
    let spec = SynthSpec::new(a.case, a.delta, a.sigma, a.seed).with_size(a.size, a.size).with_fringe_scale(a.fringe_scale);
    let pair = synthesize::<f64>(&spec)?;
    let truth = pair.truth.as_ref().context("synthesis produced no ground truth")?;
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    for (name, field) in [
        ("i1", &pair.i1),
        ("i2", &pair.i2),
        ("truth_phi", &truth.phi),
        ("truth_a", &truth.a),
        ("truth_b", &truth.b),
    ] {
        save(&a.out_dir.join(format!("{name}.pfm")), field, a.preview)?;
    }
    let meta = serde_json::json!({
        "spec": spec,
        "delta_rad": spec.delta,
        "delta_deg": spec.delta.to_degrees(),
    });
    let meta_path = a.out_dir.join("meta.json");
    fs::write(&meta_path, serde_json::to_string_pretty(&meta)? + "\n")
        .with_context(|| format!("writing {}", meta_path.display()))?;
    Ok(())
}

fn cmd_estimate(a: EstimateArgs) -> anyhow::Result<()> {
    let (i1, i2) = load_pair(&a.pair)?;
    let est = estimate_step(&i1, &i2, a.estimator, a.aggregator)?;
    println!(
        "delta_hat_rad={} delta_hat_deg={} sign={} estimator={} kappa_ratio={} mask_fraction={}",
        est.delta_hat,
        est.delta_hat.to_degrees(),
        est.sign,
        est.estimator,
        est.kappa_ratio,
        est.mask_fraction
    );
    Ok(())
}

fn cmd_demod(a: DemodArgs) -> anyhow::Result<()> {
    let (i1, i2) = load_pair(&a.pair)?;
    let phi = demodulate(&i1, &i2)?;
    save(&a.out, &phi, a.preview)
}

fn write_results(path: &Path, plan: &ExperimentPlan) -> anyhow::Result<Vec<fringe_step::ExperimentRecord>> {
    let records = run_plan(plan)?;
    let mut buf = Vec::new();
    write_csv(&mut buf, &records)?;
    fs::write(path, buf).with_context(|| format!("writing {}", path.display()))?;
    let failed = records.iter().filter(|r| !r.is_ok()).count();
    eprintln!("wrote {} records ({failed} failed) to {}", records.len(), path.display());
    Ok(records)
}

fn cmd_experiment(a: ExperimentArgs) -> anyhow::Result<()> {
    if let Some(path) = &a.plan {
        let plan = read_plan(path).with_context(|| format!("plan {}", path.display()))?;
        write_results(&a.out, &plan)?;
        return Ok(());
    }
    let records = write_results(&a.out, &ExperimentPlan::default_paper())?;
    let summaries = aggregate_mae(&records)?;
    let stem = a.out.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
    for case in Case::ALL {
        let subset: Vec<_> = summaries.iter().filter(|s| s.combination.case == case).cloned().collect();
        let path = a.out.with_file_name(format!("{stem}_case_{case}.svg"));
        fs::write(&path, svg::mae_chart(&format!("Case {case}"), &subset))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn cmd_plot(a: PlotArgs) -> anyhow::Result<()> {
    let file = fs::File::open(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let mut records = read_csv(file).with_context(|| format!("parsing {}", a.input.display()))?;
    if let Some(case) = a.case {
        records.retain(|r| r.case == case);
    }
    if records.is_empty() {
        bail!(fringe_step::Error::Empty("results file has no records to plot"));
    }
    let summaries = aggregate_mae(&records)?;
    let title = match a.case {
        Some(c) => format!("Case {c}"),
        None => "MAE vs noise".to_string(),
    };
    fs::write(&a.out, svg::mae_chart(&title, &summaries)).with_context(|| format!("writing {}", a.out.display()))?;
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let degenerate = err
        .chain()
        .filter_map(|c| c.downcast_ref::<fringe_step::Error>())
        .any(fringe_step::Error::is_degeneracy);
    if degenerate {
        4
    } else {
        3
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Demod(a) => cmd_demod(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Plot(a) => cmd_plot(a),
        Command::DefaultPlan => {
            print!("{}", ExperimentPlan::default_paper().to_toml());
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
