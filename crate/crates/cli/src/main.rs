//! `twmean`: batch front end for twisted spherical mean verification.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{AnnulusConfig, FunctionConfig, GridConfig, JobConfig, PointConfig, SampleConfig, SupportConfig};

#[derive(Parser, Debug)]
#[command(name = "twmean", version, about = "Twisted spherical means on C^n: bases, means, membership and support checks")]
struct Cli {
    /// Worker threads; output does not depend on it.
    #[arg(long, env = "TWMEAN_THREADS", global = true)]
    threads: Option<usize>,
    /// JSON job file; its values override command-line flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for report.json and CSV tables.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Orthonormal bases of H_{p,q}.
    Basis {
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        q: Option<String>,
    },
    /// Harmonic layers P = P_0 + |z|^2 P_1 + ... of a polynomial file.
    Decompose {
        input: Option<PathBuf>,
        #[arg(long)]
        n: Option<String>,
    },
    /// One twisted, left or Euclidean sphere mean.
    Mean(JobArgs),
    /// Sampled membership test on an annulus.
    Verify(JobArgs),
    /// Coefficient fits against the characterization basis.
    Characterize(JobArgs),
    /// Support radius estimate from vanishing means.
    Support(JobArgs),
    /// The built-in acceptance suite.
    Selftest {
        /// Comma-separated criterion numbers.
        #[arg(long, value_delimiter = ',')]
        criteria: Option<Vec<String>>,
    },
}

#[derive(Args, Debug, Default)]
#[command(allow_negative_numbers = true)]
struct JobArgs {
    /// constant, zero, gaussian, bump, thm33, thm34, euclid, monomial or structured.
    function: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    r: Option<String>,
    /// Outer radius, or `inf`.
    #[arg(long = "R")]
    outer: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    /// Bidegrees to fit, e.g. `--pq 1,1 --pq 0,0`.
    #[arg(long)]
    pq: Vec<String>,
    #[arg(long)]
    order: Option<String>,
    #[arg(long)]
    grid_count: Option<String>,
    #[arg(long)]
    placement: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    two_sided: bool,
    #[arg(long)]
    euclidean: bool,
    /// Function parameters.
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    q: Option<String>,
    /// Model index (`i` for thm33/euclid, `k` for thm34).
    #[arg(long, alias = "k")]
    i: Option<String>,
    #[arg(long)]
    value: Option<String>,
    #[arg(long)]
    sign: Option<String>,
    /// Bump centre, one `re,im` per coordinate.
    #[arg(long, allow_hyphen_values = true)]
    centre: Vec<String>,
    #[arg(long)]
    radius: Option<String>,
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    beta: Option<Vec<String>>,
    #[arg(long)]
    profile: Option<PathBuf>,
    #[arg(long)]
    poly: Option<PathBuf>,
    /// Sample centres for membership tests.
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    max_norm: Option<String>,
    #[arg(long, value_delimiter = ',')]
    offsets: Option<Vec<String>>,
    /// Mean centre, one `re,im` per coordinate.
    #[arg(long, allow_hyphen_values = true)]
    z: Vec<String>,
    #[arg(long)]
    s: Option<String>,
    /// right, left or euclidean.
    #[arg(long)]
    side: Option<String>,
    #[arg(long)]
    r_max: Option<String>,
    #[arg(long)]
    step: Option<String>,
}

fn some_if<T>(present: bool, v: T) -> Option<T> {
    present.then_some(v)
}

impl JobArgs {
    fn into_config(self, command: &str) -> JobConfig {
        let degrees: Vec<[String; 2]> = self
            .pq
            .iter()
            .map(|s| {
                let (p, q) = s.split_once(',').unwrap_or((s.as_str(), ""));
                [p.trim().to_string(), q.trim().to_string()]
            })
            .collect();
        let mode = if self.euclidean {
            Some("euclidean".to_string())
        } else if self.two_sided {
            Some("two-sided".to_string())
        } else {
            None
        };
        let function = FunctionConfig {
            name: self.function,
            p: self.p,
            q: self.q,
            index: self.i,
            value: self.value,
            sign: self.sign,
            centre: some_if(!self.centre.is_empty(), self.centre),
            radius: self.radius,
            alpha: self.alpha,
            beta: self.beta,
            profile: self.profile,
            poly: self.poly,
        };
        JobConfig {
            command: Some(command.to_string()),
            n: self.n,
            annulus: Some(AnnulusConfig { r: self.r, outer: self.outer }),
            lambda: self.lambda,
            degrees: some_if(!degrees.is_empty(), degrees),
            order: self.order,
            grid: Some(GridConfig { count: self.grid_count, placement: self.placement }),
            tolerance: self.tol,
            function: Some(function),
            samples: Some(SampleConfig { count: self.samples, max_norm: self.max_norm, offsets: self.offsets.clone() }),
            point: Some(PointConfig { z: some_if(!self.z.is_empty(), self.z), s: self.s, side: self.side }),
            support: Some(SupportConfig { r_max: self.r_max, step: self.step, centres: None, centre_max: None, offsets: None }),
            mode,
            ..JobConfig::default()
        }
    }
}

fn flags_config(cli: Cli) -> (JobConfig, Option<PathBuf>, Option<usize>) {
    let mut cfg = match cli.command {
        Cmd::Basis { n, p, q } => JobConfig {
            command: Some("basis".into()),
            n,
            degrees: match (p, q) {
                (None, None) => None,
                (p, q) => Some(vec![[p.unwrap_or_else(|| "0".into()), q.unwrap_or_else(|| "0".into())]]),
            },
            ..JobConfig::default()
        },
        Cmd::Decompose { input, n } => JobConfig { command: Some("decompose".into()), n, input, ..JobConfig::default() },
        Cmd::Mean(a) => a.into_config("mean"),
        Cmd::Verify(a) => a.into_config("verify"),
        Cmd::Characterize(a) => a.into_config("characterize"),
        Cmd::Support(a) => a.into_config("support"),
        Cmd::Selftest { criteria } => JobConfig { command: Some("selftest".into()), criteria, ..JobConfig::default() },
    };
    cfg.output = cli.out;
    cfg.seed = cli.seed;
    (cfg, cli.config, cli.threads)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (flags, config_path, threads) = flags_config(cli);
    if let Some(t) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let merged = match config_path {
        Some(path) => match JobConfig::load(&path) {
            Ok(file) => file.over(&flags),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        },
        None => flags,
    };
    let job = match merged.validate() {
        Ok(job) => job,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match run::run(&job) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
