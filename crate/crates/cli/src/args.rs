//! Command-line flags. Every flag is optional and overrides the config file.

use std::collections::BTreeMap;

use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CommandArg {
    /// Determinant and K constant, printed and corrected
    Constants,
    /// Leading-order tail prediction
    Predict,
    /// Curvature bounds and the sandwich check
    Bounds,
    /// Exact, quadrature or enumeration tail value
    Oracle,
    /// Monte Carlo tail estimate with a Wilson interval
    Mc,
    /// Ledger of printed values against corrected and oracle values
    Verify,
    /// Discrete and degenerate counterexamples
    Counterexample,
}

#[derive(Debug, Parser)]
#[command(name = "sntail", version, about = "Tail probabilities of self-normalised sums")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: CommandArg,

    /// Flat `key = value` config file
    #[arg(long)]
    pub config: Option<String>,

    /// iid-normal, student-t, folded-normal, equicorrelated, rademacher or degenerate-first
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub beta: Option<String>,
    /// A value, or start:end:geometric|linear:count
    #[arg(long)]
    pub eps: Option<String>,
    /// right, left or two-sided
    #[arg(long)]
    pub side: Option<String>,
    /// paper, corrected or both
    #[arg(long)]
    pub variant: Option<String>,
    /// sum, max-over-zn or max-over-zk
    #[arg(long)]
    pub statistic: Option<String>,
    /// auto, sphere or region
    #[arg(long)]
    pub method: Option<String>,
    /// weighted or paper
    #[arg(long)]
    pub integrand: Option<String>,
    /// Student-t degrees of freedom
    #[arg(long)]
    pub nu: Option<String>,
    /// Folded-normal shift
    #[arg(long)]
    pub shift: Option<String>,
    /// Equicorrelation coefficient
    #[arg(long)]
    pub rho: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Accepts scientific notation, e.g. 1e7
    #[arg(long)]
    pub trials: Option<String>,
    /// Defaults to $SNTAIL_WORKERS, then the available parallelism
    #[arg(long)]
    pub workers: Option<String>,
    /// csv or json
    #[arg(long)]
    pub format: Option<String>,
    /// Write results here instead of stdout
    #[arg(long)]
    pub output: Option<String>,
}

impl CommandArg {
    pub fn name(&self) -> &'static str {
        match self {
            CommandArg::Constants => "constants",
            CommandArg::Predict => "predict",
            CommandArg::Bounds => "bounds",
            CommandArg::Oracle => "oracle",
            CommandArg::Mc => "mc",
            CommandArg::Verify => "verify",
            CommandArg::Counterexample => "counterexample",
        }
    }
}

impl Cli {
    /// Flags that were given, keyed like the config file.
    pub fn overrides(&self) -> BTreeMap<String, String> {
        let pairs = [
            ("model", &self.model),
            ("n", &self.n),
            ("beta", &self.beta),
            ("eps", &self.eps),
            ("side", &self.side),
            ("variant", &self.variant),
            ("statistic", &self.statistic),
            ("method", &self.method),
            ("integrand", &self.integrand),
            ("nu", &self.nu),
            ("shift", &self.shift),
            ("rho", &self.rho),
            ("seed", &self.seed),
            ("trials", &self.trials),
            ("workers", &self.workers),
            ("format", &self.format),
            ("output", &self.output),
        ];
        pairs.into_iter().filter_map(|(k, v)| v.clone().map(|v| (k.to_string(), v))).collect()
    }
}
