//! Command-line front end: figure reproductions, field scatters and
//! single queries, all written as CSV.

pub mod error;
pub mod experiments;
pub mod stats;

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use latsec_core::bounds::{
    avg_flatness_mc, ecdp_awgn, ecdp_fading, info_bound_gaussian_coset, info_bound_h, info_bound_mod_lambda,
    CosetCode, FadingModel, LogBase,
};
use latsec_core::catalog;
use latsec_core::csv::{fmt12, Table};
use latsec_core::flatness::{flatness, flatness_dual, flatness_primal};
use latsec_core::theta::{ThetaProfile, TruncationPolicy};
use latsec_core::Lattice;

pub use error::{CliError, CliResult};
use experiments::{parse_grid, sigma_from_snr_db, Settings, DEFAULT_FIELD_COUNT, DEFAULT_SNR_GRID};

#[derive(Debug, Parser)]
#[command(name = "latsec", version, about = "Secrecy bounds for lattice coset codes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// AWGN ECDP bounds for Z8, L, E8 and A8* (index 2^8).
    Fig1(FigArgs),
    /// AWGN ECDP bounds for Z24, Leech, E8^3 and E6^4 (index 2^24).
    Fig2(FigArgs),
    /// ECDP against the discriminant proxy, before and after the sublattice procedure.
    DiscScatter(DiscScatterArgs),
    /// ECDP against the inverse norm sum, before and after the sublattice procedure.
    InsScatter(InsScatterArgs),
    /// Z4 against the best and worst full-diversity sublattices.
    DiversityZ4(DiversityArgs),
    /// Flatness factor of one lattice.
    Flatness(FlatnessArgs),
    /// ECDP bound of a coset code.
    Ecdp(EcdpArgs),
    /// Monte Carlo average flatness factor under fading.
    Mc(McArgs),
    /// Information leakage bounds.
    Info(InfoArgs),
    /// Shell counts of a lattice.
    Theta(ThetaArgs),
    /// Print a catalog lattice as JSON.
    Catalog(CatalogArgs),
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LatticeArgs {
    /// Lattice JSON file.
    #[arg(long, conflicts_with = "name")]
    pub lattice: Option<PathBuf>,
    /// Catalog name (Z8, E8, Leech, A8*, D4, BCC, H4, ...).
    #[arg(long)]
    pub name: Option<String>,
    /// Normalize to unit volume.
    #[arg(long)]
    pub unit_volume: bool,
}

impl LatticeArgs {
    pub fn load(&self) -> CliResult<Lattice> {
        let l = match (&self.lattice, &self.name) {
            (Some(path), _) => Lattice::from_json(&fs::read_to_string(path)?)?,
            (None, Some(name)) => catalog::make(name, false)?,
            (None, None) => return Err(CliError::Usage("give --lattice FILE or --name NAME".into())),
        };
        Ok(if self.unit_volume { l.unit_volume() } else { l })
    }
}

#[derive(Debug, Args)]
pub struct TruncArgs {
    /// Fixed truncation radius (not squared).
    #[arg(long, conflicts_with = "rel_tol")]
    pub radius: Option<f64>,
    /// Relative tolerance of the adaptive truncation.
    #[arg(long)]
    pub rel_tol: Option<f64>,
}

impl TruncArgs {
    fn policy(&self, settings: &Settings) -> TruncationPolicy {
        match (self.radius, self.rel_tol) {
            (Some(r), _) => TruncationPolicy::fixed(r),
            (None, Some(t)) => TruncationPolicy::adaptive(t),
            (None, None) => TruncationPolicy::adaptive(settings.rel_tol),
        }
        .with_budget(settings.budget)
    }
}

#[derive(Debug, Args)]
pub struct FigArgs {
    /// SNR grid in dB as start:end:count.
    #[arg(long, default_value = DEFAULT_SNR_GRID, allow_hyphen_values = true)]
    pub snr_grid: String,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    /// Number of random quartic fields.
    #[arg(long, default_value_t = DEFAULT_FIELD_COUNT)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Bound on the absolute value of the polynomial coefficients.
    #[arg(long, default_value_t = latsec_core::algebraic::DEFAULT_COEFF_BOUND)]
    pub coeff_bound: i64,
    /// Truncation radius of the fading series.
    #[arg(long, default_value_t = latsec_core::theta::DEFAULT_FIXED_RADIUS)]
    pub radius: f64,
}

impl FieldArgs {
    fn apply(&self, s: &mut Settings) {
        s.coeff_bound = self.coeff_bound;
        s.psi_radius = self.radius;
    }
}

#[derive(Debug, Args)]
pub struct DiscScatterArgs {
    #[command(flatten)]
    pub fields: FieldArgs,
    /// Values of σ_h²/σ², comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    pub gamma_sq: Vec<f64>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct InsScatterArgs {
    #[command(flatten)]
    pub fields: FieldArgs,
    #[arg(long, default_value_t = 3.5)]
    pub gamma_sq: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct DiversityArgs {
    #[command(flatten)]
    pub fields: FieldArgs,
    /// Grid of σ_h²/σ² as start:end:count.
    #[arg(long, default_value = "0.5:4:8")]
    pub gamma_sq_grid: String,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PathChoice {
    Auto,
    Primal,
    Dual,
}

#[derive(Debug, Args)]
pub struct FlatnessArgs {
    #[command(flatten)]
    pub lattice: LatticeArgs,
    /// Single σ; prints one value.
    #[arg(long, conflicts_with = "snr_grid")]
    pub sigma: Option<f64>,
    /// SNR grid in dB; prints `snr_db,value` rows.
    #[arg(long, allow_hyphen_values = true)]
    pub snr_grid: Option<String>,
    #[arg(long, value_enum, default_value_t = PathChoice::Auto)]
    pub path: PathChoice,
    #[command(flatten)]
    pub trunc: TruncArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq)]
pub enum ModelChoice {
    Awgn,
    Ff,
    Bf,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModelChoice::Awgn)]
    pub model: ModelChoice,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_h: f64,
    /// Block length T for block fading.
    #[arg(long, default_value_t = 1)]
    pub block: usize,
}

impl ModelArgs {
    fn model(&self) -> FadingModel {
        match self.model {
            ModelChoice::Awgn => FadingModel::Awgn,
            ModelChoice::Ff => FadingModel::RayleighFast { sigma_h: self.sigma_h },
            ModelChoice::Bf => FadingModel::RayleighBlock {
                sigma_h: self.sigma_h,
                t: self.block,
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct EcdpArgs {
    /// Bob's lattice.
    #[command(flatten)]
    pub lattice: LatticeArgs,
    /// Eve's lattice as JSON; defaults to `eve_scale`·Λ_b.
    #[arg(long)]
    pub eve: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub eve_scale: u32,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = DEFAULT_SNR_GRID, allow_hyphen_values = true)]
    pub snr_grid: String,
    #[command(flatten)]
    pub trunc: TruncArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// Eve's lattice.
    #[command(flatten)]
    pub lattice: LatticeArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = DEFAULT_SNR_GRID, allow_hyphen_values = true)]
    pub snr_grid: String,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub trunc: TruncArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BoundChoice {
    /// h(E, |M|)
    H,
    /// mod-Λ_s channel bound
    ModLambda,
    /// discrete Gaussian coset coding bound
    GaussianCoset,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BaseChoice {
    Bits,
    Nats,
}

#[derive(Debug, Args)]
pub struct InfoArgs {
    #[arg(long, value_enum, default_value_t = BoundChoice::ModLambda)]
    pub bound: BoundChoice,
    /// E (or ε for `h`).
    #[arg(long)]
    pub e: f64,
    /// Message set size |M|.
    #[arg(long)]
    pub m: u64,
    #[arg(long, value_enum, default_value_t = BaseChoice::Bits)]
    pub base: BaseChoice,
}

#[derive(Debug, Args)]
pub struct ThetaArgs {
    #[command(flatten)]
    pub lattice: LatticeArgs,
    /// Squared radius of the enumerated ball.
    #[arg(long)]
    pub radius_sq: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct CatalogArgs {
    #[arg(long)]
    pub name: String,
    #[arg(long)]
    pub unit_volume: bool,
}

/// Single values print with round-trip precision; tables as CSV.
fn value_text(v: f64) -> String {
    format!("{v:?}\n")
}

fn write_out(out: &OutArgs, text: String) -> CliResult<Option<String>> {
    match &out.out {
        Some(path) => {
            fs::write(path, text)?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}

fn snr_table(header: &[&str], grid: &[f64], rows: Vec<Vec<f64>>) -> CliResult<Table> {
    let mut t = Table::new(header.iter().copied());
    for (snr, vals) in grid.iter().zip(rows) {
        let mut row = vec![(*snr).into()];
        row.extend(vals.into_iter().map(Into::into));
        t.push(row)?;
    }
    Ok(t)
}

/// Runs a command; returns the text destined for stdout, if any.
pub fn run(cli: Cli) -> CliResult<Option<String>> {
    let mut settings = Settings::from_env()?;
    match cli.command {
        Command::Fig1(a) => {
            if let Some(t) = a.rel_tol {
                settings.rel_tol = t;
            }
            let table = experiments::fig1(&parse_grid(&a.snr_grid)?, &settings)?;
            write_out(&a.out, table.to_csv())
        }
        Command::Fig2(a) => {
            if let Some(t) = a.rel_tol {
                settings.rel_tol = t;
            }
            let table = experiments::fig2(&parse_grid(&a.snr_grid)?, &settings)?;
            write_out(&a.out, table.to_csv())
        }
        Command::DiscScatter(a) => {
            a.fields.apply(&mut settings);
            let table = experiments::disc_scatter(a.fields.count, a.fields.seed, &a.gamma_sq, &settings)?;
            write_out(&a.out, table.to_csv())
        }
        Command::InsScatter(a) => {
            a.fields.apply(&mut settings);
            let table = experiments::ins_scatter(a.fields.count, a.fields.seed, a.gamma_sq, &settings)?;
            write_out(&a.out, table.to_csv())
        }
        Command::DiversityZ4(a) => {
            a.fields.apply(&mut settings);
            let grid = parse_grid(&a.gamma_sq_grid)?;
            let table = experiments::diversity_z4(&grid, a.fields.count, a.fields.seed, &settings)?;
            write_out(&a.out, table.to_csv())
        }
        Command::Flatness(a) => {
            let l = a.lattice.load()?;
            let policy = a.trunc.policy(&settings);
            let eval = |s: f64| -> CliResult<f64> {
                let f = match a.path {
                    PathChoice::Auto => flatness(&l, s, &policy)?,
                    PathChoice::Primal => flatness_primal(&l, s, &policy)?,
                    PathChoice::Dual => flatness_dual(&l, s, &policy)?,
                };
                Ok(f.value)
            };
            match (a.sigma, &a.snr_grid) {
                (Some(s), _) => write_out(&a.out, value_text(eval(s)?)),
                (None, Some(g)) => {
                    let grid = parse_grid(g)?;
                    let rows = grid
                        .iter()
                        .map(|&snr| Ok(vec![eval(sigma_from_snr_db(snr))?]))
                        .collect::<CliResult<_>>()?;
                    write_out(&a.out, snr_table(&["snr_db", "value"], &grid, rows)?.to_csv())
                }
                (None, None) => Err(CliError::Usage("give --sigma or --snr-grid".into())),
            }
        }
        Command::Ecdp(a) => {
            let bob = a.lattice.load()?;
            let code = match &a.eve {
                Some(path) => CosetCode::new(bob, Lattice::from_json(&fs::read_to_string(path)?)?)?,
                None => CosetCode::scaled(bob, a.eve_scale)?,
            };
            let model = a.model.model();
            let policy = match (a.trunc.radius, a.trunc.rel_tol, model) {
                // Fading series default to the fixed radius used in the experiments.
                (None, None, FadingModel::RayleighFast { .. } | FadingModel::RayleighBlock { .. }) => settings.psi_policy(),
                _ => a.trunc.policy(&settings),
            };
            let grid = parse_grid(&a.snr_grid)?;
            let rows = grid
                .iter()
                .map(|&snr| {
                    let s = sigma_from_snr_db(snr);
                    let e = match model {
                        FadingModel::Awgn => ecdp_awgn(&code, s, &policy)?,
                        _ => ecdp_fading(&code, model, s, &policy)?,
                    };
                    Ok(vec![e.value])
                })
                .collect::<CliResult<_>>()?;
            write_out(&a.out, snr_table(&["snr_db", "value"], &grid, rows)?.to_csv())
        }
        Command::Mc(a) => {
            let eve = a.lattice.load()?;
            let policy = a.trunc.policy(&settings);
            let grid = parse_grid(&a.snr_grid)?;
            let rows = grid
                .iter()
                .map(|&snr| {
                    let est = avg_flatness_mc(&eve, a.model.model(), sigma_from_snr_db(snr), a.samples, a.seed, &policy)?;
                    Ok(vec![est.mean, est.std_error])
                })
                .collect::<CliResult<_>>()?;
            write_out(&a.out, snr_table(&["snr_db", "value", "std_error"], &grid, rows)?.to_csv())
        }
        Command::Info(a) => {
            let base = match a.base {
                BaseChoice::Bits => LogBase::Bits,
                BaseChoice::Nats => LogBase::Nats,
            };
            let v = match a.bound {
                BoundChoice::H => info_bound_h(a.e, a.m, base)?,
                BoundChoice::ModLambda => info_bound_mod_lambda(a.e, a.m, base)?,
                BoundChoice::GaussianCoset => info_bound_gaussian_coset(a.e, a.m, base)?,
            };
            Ok(Some(format!("{}\n", fmt12(v))))
        }
        Command::Theta(a) => {
            let l = a.lattice.load()?;
            let p = ThetaProfile::compute(&l, a.radius_sq, settings.budget)?;
            write_out(&a.out, p.to_table().to_csv())
        }
        Command::Catalog(a) => {
            let l = catalog::make(&a.name, a.unit_volume)?;
            Ok(Some(format!("{}\n", l.to_json())))
        }
    }
}
