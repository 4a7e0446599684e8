//! Flag and config-file parameters. Every field is optional so that a JSON
//! config file can supply what the command line leaves out.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;
use toeplitz_minimax::ellipsoid::{EllipsoidClass, EllipsoidSpec};
use toeplitz_minimax::montecarlo::{rho_grid, Family, TestKind, M_GRID};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassName {
    Poly,
    Exp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyName {
    Poly,
    Tridiag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestName {
    Chi,
    Cm,
}

#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Ellipsoid class of the weight plan.
    #[arg(long, value_enum)]
    pub class: Option<ClassName>,
    /// Polynomial smoothness (default 1).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Ellipsoid radius (default 1).
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: Option<f64>,
    /// Exponential decay rate (default 1).
    #[arg(long = "A")]
    #[serde(rename = "A")]
    pub a: Option<f64>,
    /// Separation radius.
    #[arg(long)]
    pub psi: Option<f64>,
    /// Sample size.
    #[arg(long)]
    pub n: Option<usize>,
    /// Dimension.
    #[arg(long)]
    pub p: Option<usize>,
    /// Monte Carlo replicates (default 1000).
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Master seed (default 1).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated grid of M (poly family) or rho (tridiag family).
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    /// Alternative family for power studies (default poly).
    #[arg(long, value_enum)]
    pub family: Option<FamilyName>,
    /// Test statistic (default chi).
    #[arg(long, value_enum)]
    pub test: Option<TestName>,
    /// Nominal level (default 0.05).
    #[arg(long)]
    pub level: Option<f64>,
    /// Comma-separated lags sigma_1, sigma_2, ... for check-pd.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lags: Option<Vec<f64>>,
    /// Family parameter (M or rho) for check-pd.
    #[arg(long)]
    pub value: Option<f64>,
    /// Figure preset name (fig1 to fig4).
    #[arg(long)]
    pub name: Option<String>,
    /// CSV output path (default <command>.csv).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write an SVG plot next to the CSV.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub svg: Option<bool>,
    /// Worker threads for the Monte Carlo engine.
    #[arg(long)]
    pub threads: Option<usize>,
    /// JSON file with the same keys; flags take precedence.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

macro_rules! overlay {
    ($flags:expr, $file:expr, $($field:ident),*) => {
        Params { $($field: $flags.$field.or($file.$field),)* config: $flags.config }
    };
}

impl Params {
    /// Reads the config file, if any, and lets flags override it.
    pub fn resolve(self) -> Result<Params, CliError> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let file = load_config(&path)?;
        Ok(overlay!(
            self, file, class, alpha, l, a, psi, n, p, replicates, seed, grid, family, test, level,
            lags, value, name, output, svg, threads
        ))
    }

    pub fn class(&self) -> Result<EllipsoidClass, CliError> {
        let class = match self.class.unwrap_or(ClassName::Poly) {
            ClassName::Poly => EllipsoidClass::Polynomial {
                alpha: self.alpha.unwrap_or(1.0),
                l: self.l.unwrap_or(1.0),
            },
            ClassName::Exp => EllipsoidClass::Exponential {
                a: self.a.unwrap_or(1.0),
                l: self.l.unwrap_or(1.0),
            },
        };
        class.validate()?;
        Ok(class)
    }

    pub fn spec(&self) -> Result<EllipsoidSpec, CliError> {
        Ok(EllipsoidSpec::new(self.class()?, self.require_psi()?)?)
    }

    pub fn require_psi(&self) -> Result<f64, CliError> {
        self.psi.ok_or_else(|| CliError::missing("psi"))
    }

    pub fn require_n(&self) -> Result<usize, CliError> {
        self.n.ok_or_else(|| CliError::missing("n"))
    }

    pub fn require_p(&self) -> Result<usize, CliError> {
        self.p.ok_or_else(|| CliError::missing("p"))
    }

    pub fn replicates(&self) -> usize {
        self.replicates.unwrap_or(1000)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }

    pub fn level(&self) -> f64 {
        self.level.unwrap_or(0.05)
    }

    pub fn test(&self) -> TestKind {
        match self.test.unwrap_or(TestName::Chi) {
            TestName::Chi => TestKind::Chi,
            TestName::Cm => TestKind::Cm,
        }
    }

    pub fn family(&self) -> Family {
        match self.family.unwrap_or(FamilyName::Poly) {
            FamilyName::Poly => Family::PolyM(self.grid.clone().unwrap_or_else(|| M_GRID.to_vec())),
            FamilyName::Tridiag => Family::Tridiag(self.grid.clone().unwrap_or_else(rho_grid)),
        }
    }

    pub fn output_or(&self, default: &str) -> PathBuf {
        self.output
            .clone()
            .unwrap_or_else(|| PathBuf::from(default))
    }

    pub fn svg(&self) -> bool {
        self.svg.unwrap_or(false)
    }

    /// `key=value` pairs describing the class parameters.
    pub fn class_echo(&self) -> Result<Vec<(String, String)>, CliError> {
        Ok(match self.class()? {
            EllipsoidClass::Polynomial { alpha, l } => vec![
                ("class".into(), "poly".into()),
                ("alpha".into(), alpha.to_string()),
                ("L".into(), l.to_string()),
            ],
            EllipsoidClass::Exponential { a, l } => vec![
                ("class".into(), "exp".into()),
                ("A".into(), a.to_string()),
                ("L".into(), l.to_string()),
            ],
        })
    }
}

fn load_config(path: &Path) -> Result<Params, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("invalid config {}: {e}", path.display())))
}
