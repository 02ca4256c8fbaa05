//! Command-line flags. Every flag maps to a config key; flags override
//! values read from `--config`.

use std::collections::BTreeMap;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{parse_pairs, Command, RunConfig};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "sdiv", version, about = "S-divergence breakdown bounds and contamination sweeps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Lower bound on the breakdown point over an (alpha, lambda) grid.
    BoundGrid(Flags),
    /// Minimum-divergence estimates along a contamination grid.
    Sweep(Flags),
    /// Closed-form breakdown values for limiting contamination scenarios.
    ScenarioBound(Flags),
    /// Randomized batches of inequality checks; exits 3 on any violation.
    Check(CheckFlags),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CheckKind {
    Lemma1,
    Bp3,
}

#[derive(Debug, Args)]
pub struct CheckFlags {
    /// Which inequality to check [default: lemma1].
    #[arg(long, value_enum)]
    pub check: Option<CheckKind>,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Default, Args)]
pub struct Flags {
    /// Config file of `key = value` lines.
    #[arg(long)]
    pub config: Option<String>,
    /// Print the resolved config instead of running.
    #[arg(long)]
    pub print_config: bool,
    /// Alpha values: a comma list or start:stop:step.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Lambda values: a comma list or start:stop:step.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    #[arg(long)]
    pub family: Option<String>,
    /// Contaminant location.
    #[arg(long, allow_hyphen_values = true)]
    pub mu0: Option<String>,
    /// Contaminant standard deviation.
    #[arg(long)]
    pub sigma0: Option<String>,
    /// Contaminant rate.
    #[arg(long)]
    pub rate0: Option<String>,
    /// Gamma shape.
    #[arg(long)]
    pub shape: Option<String>,
    /// Dimension of the multivariate families.
    #[arg(long)]
    pub dim: Option<String>,
    /// Binomial size.
    #[arg(long)]
    pub n: Option<String>,
    /// Comma list of limiting scenarios.
    #[arg(long)]
    pub scenario: Option<String>,
    /// implode or explode.
    #[arg(long)]
    pub direction: Option<String>,
    /// unknown, estimate-faster or estimate-slower.
    #[arg(long)]
    pub regime: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub eta: Option<String>,
    /// Contamination grid.
    #[arg(long)]
    pub eps: Option<String>,
    /// Monte Carlo sample size; 0 selects quadrature.
    #[arg(long)]
    pub mc_samples: Option<String>,
    #[arg(long)]
    pub rel_tol: Option<String>,
    #[arg(long)]
    pub abs_tol: Option<String>,
    #[arg(long)]
    pub max_subdivisions: Option<String>,
    /// Coarse-grid points per dimension for the optimizer.
    #[arg(long)]
    pub n_grid: Option<String>,
    /// Instances per check batch.
    #[arg(long)]
    pub instances: Option<String>,
    #[arg(long)]
    pub eps_cap_factor: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Output file; `-` for standard output.
    #[arg(long)]
    pub out: Option<String>,
}

impl Flags {
    fn overrides(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("alpha", &self.alpha),
            ("lambda", &self.lambda),
            ("family", &self.family),
            ("mu0", &self.mu0),
            ("sigma0", &self.sigma0),
            ("rate0", &self.rate0),
            ("shape", &self.shape),
            ("dim", &self.dim),
            ("n", &self.n),
            ("scenario", &self.scenario),
            ("direction", &self.direction),
            ("regime", &self.regime),
            ("eta", &self.eta),
            ("eps", &self.eps),
            ("mc_samples", &self.mc_samples),
            ("rel_tol", &self.rel_tol),
            ("abs_tol", &self.abs_tol),
            ("max_subdivisions", &self.max_subdivisions),
            ("n_grid", &self.n_grid),
            ("instances", &self.instances),
            ("eps_cap_factor", &self.eps_cap_factor),
            ("seed", &self.seed),
            ("out", &self.out),
        ]
    }
}

impl Cli {
    /// Resolves file values, flag overrides and defaults into a config.
    pub fn resolve(&self) -> Result<(RunConfig, bool), CliError> {
        let (flags, fixed) = match &self.command {
            Sub::BoundGrid(f) => (f, Some(Command::BoundGrid)),
            Sub::Sweep(f) => (f, Some(Command::Sweep)),
            Sub::ScenarioBound(f) => (f, Some(Command::ScenarioBound)),
            Sub::Check(c) => (
                &c.flags,
                c.check.map(|k| match k {
                    CheckKind::Lemma1 => Command::CheckLemma1,
                    CheckKind::Bp3 => Command::CheckBp3,
                }),
            ),
        };
        let mut map: BTreeMap<String, String> = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{path}: {e}")))?;
                parse_pairs(&text)?
            }
            None => BTreeMap::new(),
        };
        for (k, v) in flags.overrides() {
            if let Some(v) = v {
                map.insert(k.to_string(), v.clone());
            }
        }
        let from_file: Option<Command> = map.get("command").map(|c| c.parse()).transpose()?;
        let command = match (&self.command, fixed, from_file) {
            (_, Some(c), _) => c,
            // `check` without --check: the file may name the batch
            (Sub::Check(_), None, Some(c @ (Command::CheckLemma1 | Command::CheckBp3))) => c,
            (Sub::Check(_), None, _) => Command::CheckLemma1,
            _ => unreachable!("every other subcommand fixes the command"),
        };
        Ok((RunConfig::from_pairs(command, &map)?, flags.print_config))
    }
}

/// Parses `argv`, runs, and returns the exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { crate::exit::USAGE } else { crate::exit::OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = cli.resolve().and_then(|(cfg, print_only)| {
        if print_only {
            print!("{}", cfg.serialize());
            Ok(crate::exit::OK)
        } else {
            crate::execute(&cfg)
        }
    });
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("sdiv: {e}");
            e.exit_code()
        }
    }
}
