use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use roadrough_cli::{export_report, io, run_pipeline, PipelineConfig, ReportFormat, RunReport, Stage, Stages};

#[derive(Parser)]
#[command(name = "roadrough", about = "Road roughness estimation from vehicle telemetry")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    Simulate(Common),
    Match(Common),
    Align(Common),
    Featurize(Common),
    Select(Common),
    Train(Common),
    Evaluate(Common),
    /// Write tables from the run report in the output directory.
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "csv")]
        formats: Vec<String>,
    },
    /// Every stage enabled in the configuration.
    Run(Common),
    /// Print the default configuration.
    Config,
}

fn load(c: &Common) -> anyhow::Result<PipelineConfig> {
    let mut cfg = match &c.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.seed = Some(s);
    }
    if let Some(o) = &c.out {
        cfg.out_dir = o.clone();
    }
    Ok(cfg)
}

fn stage(c: &Common, stage: Stage) -> anyhow::Result<()> {
    let mut cfg = load(c)?;
    cfg.stages = Stages::only(stage);
    run_pipeline(&cfg)?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(c) => stage(c, Stage::Simulate),
        Command::Match(c) => stage(c, Stage::Match),
        Command::Align(c) => stage(c, Stage::Align),
        Command::Featurize(c) => stage(c, Stage::Featurize),
        Command::Select(c) => stage(c, Stage::Select),
        Command::Train(c) => stage(c, Stage::Train),
        Command::Evaluate(c) => stage(c, Stage::Evaluate),
        Command::Run(c) => load(c).and_then(|cfg| Ok(run_pipeline(&cfg).map(|_| ())?)),
        Command::Report { common, formats } => (|| {
            let cfg = load(common)?;
            let formats = formats
                .iter()
                .map(|f| match f.as_str() {
                    "csv" => Ok(ReportFormat::Csv),
                    "json" => Ok(ReportFormat::Json),
                    other => Err(anyhow::anyhow!("unknown report format '{other}'")),
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            let report: RunReport = io::read_json(&cfg.out_dir.join("report.json"))?;
            let files = export_report(&report, &cfg.out_dir.join("tables"), &formats)?;
            log::info!("wrote {} tables", files.len());
            Ok(())
        })(),
        Command::Config => PipelineConfig::default().to_toml().map(|t| print!("{t}")),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
