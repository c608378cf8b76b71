//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_angle_list, Family, PartialConfig, ReproduceItem, RunConfig};
use crate::error::{CliError, Result};
use crate::{commands, reproduce};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "SSRBELL_THREADS";

#[derive(Debug, Parser)]
#[command(name = "ssrbell", version, about = "Bell tests for pairs of bosonic states under particle-number superselection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bell term over (phi_a2, phi_b1) with phi_a1, phi_b2 fixed; CSV plus JSON sidecar.
    Surface(RunArgs),
    /// Maximize the Bell term over the four phases; JSON report.
    Optimize(RunArgs),
    /// Regenerate one dataset and compare with the quoted numbers.
    Reproduce {
        #[arg(value_parser = parse_item)]
        item: ReproduceItem,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Projected entanglement entropy of the two-copy state.
    Entropy(RunArgs),
    /// Spin-squeezing parameter of one copy.
    Squeezing(RunArgs),
    /// Maximize the CGLMP value with d = T + 1 outcomes.
    Cglmp(RunArgs),
}

fn parse_item(s: &str) -> std::result::Result<ReproduceItem, String> {
    s.parse().map_err(|e: CliError| e.to_string())
}

fn parse_family(s: &str) -> std::result::Result<Family, String> {
    s.parse().map_err(|e: CliError| e.to_string())
}

fn parse_angles(s: &str) -> std::result::Result<[f64; 2], String> {
    parse_angle_list(s).map_err(|e| e.to_string())
}

#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// bec, noon, squeezed, toy_mixed or custom
    #[arg(long, value_parser = parse_family)]
    pub family: Option<Family>,
    /// Particles per copy
    #[arg(long)]
    pub n: Option<usize>,
    /// Minority occupation of a noon state
    #[arg(long)]
    pub m: Option<usize>,
    /// Squeezed-state parameter
    #[arg(long)]
    pub c: Option<f64>,
    /// Toy-state mixing weight
    #[arg(long)]
    pub p: Option<f64>,
    /// Particles in the second copy
    #[arg(long)]
    pub n2: Option<usize>,
    /// Custom two-mode state, `n,m:re[:im]` terms separated by `;`
    #[arg(long)]
    pub state: Option<String>,
    /// Beamsplitter transmissivity amplitude
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Surface points per axis, or optimizer grid points per angle
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Polish the grid optimum with Nelder-Mead (default)
    #[arg(long, overrides_with = "no_refine")]
    pub refine: bool,
    /// Report the grid optimum as found
    #[arg(long, overrides_with = "refine")]
    pub no_refine: bool,
    /// Fixed phi_a1,phi_b2 for surfaces, radians
    #[arg(long, value_parser = parse_angles, allow_hyphen_values = true)]
    pub fixed_angles: Option<[f64; 2]>,
    /// Output file, or output directory for reproduce
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Key-value config file; flags win over its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed for the restart starting points
    #[arg(long)]
    pub seed: Option<u64>,
    /// Seeded simplex restarts after the grid search
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Also optimize each party's transmissivity
    #[arg(long)]
    pub co_optimize: bool,
}

impl RunArgs {
    fn flags(&self) -> PartialConfig {
        let refine = match (self.refine, self.no_refine) {
            (true, _) => Some(true),
            (_, true) => Some(false),
            _ => None,
        };
        PartialConfig {
            family: self.family,
            n: self.n,
            m: self.m,
            c: self.c,
            p: self.p,
            n2: self.n2,
            state: self.state.clone(),
            alpha: self.alpha,
            resolution: self.resolution,
            refine,
            fixed_angles: self.fixed_angles,
            out: self.out.clone(),
            seed: self.seed,
            restarts: self.restarts,
            co_optimize: self.co_optimize.then_some(true),
        }
    }

    /// File values, flags on top, validated.
    pub fn resolve(&self) -> Result<RunConfig> {
        let base = match &self.config {
            Some(path) => PartialConfig::from_file(path)?,
            None => PartialConfig::default(),
        };
        base.overridden_by(self.flags()).validate()
    }

    /// For `reproduce`, where the state comes from the item itself.
    fn resolve_for_reproduce(&self) -> Result<RunConfig> {
        let base = match &self.config {
            Some(path) => PartialConfig::from_file(path)?,
            None => PartialConfig::default(),
        };
        let merged = base.overridden_by(self.flags());
        if merged.family.is_some() || merged.n.is_some() || merged.c.is_some() || merged.p.is_some() {
            return Err(CliError::invalid("reproduce takes its states from the item; drop the family flags"));
        }
        PartialConfig {
            family: Some(Family::Bec),
            n: Some(1),
            ..merged
        }
        .validate()
    }
}

/// Caps the global worker pool from `SSRBELL_THREADS`, when set.
pub fn configure_threads() -> Result<Option<usize>> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::invalid(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    // a pool may already exist when called twice in one process; the first cap stands
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(Some(n))
}

/// Runs one command and returns its stdout text.
pub fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Surface(a) => commands::surface(&a.resolve()?),
        Command::Optimize(a) => commands::optimize(&a.resolve()?),
        Command::Entropy(a) => commands::entropy(&a.resolve()?),
        Command::Squeezing(a) => commands::squeezing(&a.resolve()?),
        Command::Cglmp(a) => commands::cglmp(&a.resolve()?),
        Command::Reproduce { item, run } => reproduce::reproduce(*item, &run.resolve_for_reproduce()?),
    }
}
