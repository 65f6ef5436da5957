use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use equibound::gram::VectorSet;
use equibound::rational::Angle;
use equibound::report::{
    cmd_bound, cmd_cache_merge, cmd_cache_show, cmd_figure_data, cmd_table, cmd_verify, parse_angle, parse_backends,
    CliError, DimRange, FileConfig, Format, Output, RunConfig, DEFAULT_BACKENDS,
};
use equibound::two_distance::SDP_CMD_ENV;
use equibound::verify::VerifyConfig;

/// Upper bounds on the number of equiangular lines in R^r.
#[derive(Parser)]
#[command(name = "equibound", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bound for one dimension, with the per-angle breakdown.
    Bound {
        #[arg(long)]
        dim: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Bounds over a range of dimensions.
    Table {
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Comparison series for angle 1/5 or 1/7.
    FigureData {
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Numerical checks of the Gram-matrix identities.
    Verify {
        #[arg(long, value_parser = parse_angle)]
        alpha: Option<Angle>,
        #[arg(long)]
        extremal: bool,
        #[arg(long, default_value_t = 120)]
        configs: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Vector set file to check as well.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value = "text")]
        format: Format,
    },
    /// Inspect or combine SDP cache files.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Subcommand)]
enum CacheAction {
    /// Print the shipped cache merged with --cache.
    Show {
        #[arg(long, env = "EQUIBOUND_CACHE")]
        cache: Option<PathBuf>,
        #[arg(long, default_value = "text")]
        format: Format,
    },
    /// Merge cache files into OUTPUT, keeping the smaller bound per key.
    Merge {
        #[arg(long, short)]
        output: PathBuf,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, value_parser = parse_angle)]
    angle: Option<Angle>,
    /// Comma-separated: closed-form, negative-pair, cache, external.
    #[arg(long)]
    backends: Option<String>,
    #[arg(long, env = "EQUIBOUND_CACHE")]
    cache: Option<PathBuf>,
    #[arg(long, env = SDP_CMD_ENV)]
    sdp_cmd: Option<String>,
    /// Per-query solver timeout in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// table, markdown, csv, tsv-plot or json.
    #[arg(long)]
    format: Option<Format>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Use r(r+3)/2 when no backend answers.
    #[arg(long)]
    allow_fallback: bool,
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Common {
    fn into_run(self, dims: DimRange, default_format: Format) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let mut cfg = RunConfig::new(dims);
        cfg.angle = self.angle;
        cfg.backends = match (self.backends, file.backends) {
            (Some(s), _) => parse_backends(&s)?,
            (None, Some(list)) => parse_backends(&list.join(","))?,
            (None, None) => parse_backends(DEFAULT_BACKENDS)?,
        };
        cfg.cache_path = self.cache.or(file.cache);
        cfg.sdp_cmd = self.sdp_cmd.or(file.sdp_cmd);
        if let Some(t) = self.timeout.or(file.timeout_secs) {
            cfg.timeout = Duration::try_from_secs_f64(t)
                .ok()
                .filter(|d| !d.is_zero())
                .ok_or_else(|| CliError::Config(format!("invalid timeout {t}")))?;
        }
        cfg.format = match (self.format, file.format) {
            (Some(f), _) => f,
            (None, Some(s)) => s.parse().map_err(CliError::Config)?,
            (None, None) => default_format,
        };
        cfg.jobs = self.jobs.or(file.jobs).unwrap_or(1);
        cfg.allow_fallback = self.allow_fallback || file.allow_fallback.unwrap_or(false);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<Output, CliError> {
    match cli.command {
        Command::Bound { dim, common } => cmd_bound(&common.into_run(DimRange::single(dim), Format::Text)?),
        Command::Table { from, to, common } => cmd_table(&common.into_run(DimRange { from, to }, Format::Text)?),
        Command::FigureData { from, to, common } => cmd_figure_data(&common.into_run(DimRange { from, to }, Format::Tsv)?),
        Command::Verify { alpha, extremal, configs, seed, input, format } => {
            let input = match input {
                Some(p) => Some(VectorSet::load(&p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?),
                None => None,
            };
            let cfg = VerifyConfig { seed, configurations: configs, angle: alpha, extremal, input, ..VerifyConfig::default() };
            Ok(cmd_verify(&cfg, format))
        }
        Command::Cache { action: CacheAction::Show { cache, format } } => {
            let mut cfg = RunConfig::new(DimRange::single(equibound::engine::MIN_DIMENSION));
            cfg.cache_path = cache;
            Ok(cmd_cache_show(&cfg.load_cache()?, format))
        }
        Command::Cache { action: CacheAction::Merge { output, inputs } } => cmd_cache_merge(&inputs, &output),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{}", out.text);
            for n in &out.notes {
                eprintln!("{n}");
            }
            ExitCode::from(out.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
