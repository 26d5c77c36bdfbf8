//! The figure and scatter experiments, each producing one CSV table.

use rayon::prelude::*;

use latsec_core::algebraic::{embed, random_totally_real_quartic, sublattice_procedure, AlgebraicLattice, FieldSpec, SublatticeResult};
use latsec_core::bounds::{ecdp_fading, ins, CosetCode, FadingModel};
use latsec_core::catalog;
use latsec_core::csv::{Cell, Table};
use latsec_core::enumerate::DEFAULT_POINT_BUDGET;
use latsec_core::flatness::{direct_sum_flatness, FlatnessCurve};
use latsec_core::theta::{TruncationPolicy, DEFAULT_FIXED_RADIUS, DEFAULT_REL_TOL};
use latsec_core::{Error, Lattice};

use crate::error::{CliError, CliResult};
use crate::stats::spearman;

pub const DEFAULT_SNR_GRID: &str = "-20:20:41";
pub const DEFAULT_FIELD_COUNT: usize = 50;
/// Squared truncation radius for the Leech lattice in the 24-dimensional roster.
pub const LEECH_RADIUS_SQ: f64 = 6.0;
/// Enumeration budget for that radius (the R² = 6 ball needs about 1.03e8 nodes).
pub const LEECH_BUDGET: f64 = 2e8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub budget: f64,
    /// Set when the budget came from the environment rather than the default.
    pub budget_overridden: bool,
    pub rel_tol: f64,
    pub psi_radius: f64,
    pub coeff_bound: i64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            budget: DEFAULT_POINT_BUDGET,
            budget_overridden: false,
            rel_tol: DEFAULT_REL_TOL,
            psi_radius: DEFAULT_FIXED_RADIUS,
            coeff_bound: latsec_core::algebraic::DEFAULT_COEFF_BOUND,
        }
    }
}

impl Settings {
    /// Applies `LATSEC_POINT_BUDGET` when set.
    pub fn from_env() -> CliResult<Self> {
        let mut s = Settings::default();
        if let Ok(v) = std::env::var("LATSEC_POINT_BUDGET") {
            let b: f64 = v
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("LATSEC_POINT_BUDGET is not a number: `{v}`")))?;
            if !(b >= 1.0) {
                return Err(CliError::Usage(format!("LATSEC_POINT_BUDGET must be at least 1, got {b}")));
            }
            s.budget = b;
            s.budget_overridden = true;
        }
        Ok(s)
    }

    pub fn series_policy(&self) -> TruncationPolicy {
        TruncationPolicy::adaptive(self.rel_tol).with_budget(self.budget)
    }

    pub fn psi_policy(&self) -> TruncationPolicy {
        TruncationPolicy::fixed(self.psi_radius).with_budget(self.budget)
    }
}

/// Parses `a:b:n` into `n` evenly spaced points from `a` to `b`.
pub fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || CliError::Usage(format!("grid must look like start:end:count, got `{spec}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    if b <= a {
        return Err(CliError::Usage(format!("grid must be strictly increasing, got `{spec}`")));
    }
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}

pub fn check_increasing(values: &[f64], what: &str) -> CliResult<()> {
    if values.is_empty() {
        return Err(CliError::Usage(format!("{what} is empty")));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) || values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Usage(format!("{what} must be finite and strictly increasing")));
    }
    Ok(())
}

/// `σ = 10^{−snr/20}`, from `snr_db = 10·log10(σ⁻²)`.
pub fn sigma_from_snr_db(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 20.0)
}

/// One factor `Λ^k` of an orthogonal direct sum.
#[derive(Debug, Clone)]
pub struct Factor {
    pub lattice: Lattice,
    pub power: u32,
    pub policy: TruncationPolicy,
}

/// An eavesdropper lattice given as a direct sum, with `Λ_b = ½Λ_e`.
#[derive(Debug, Clone)]
pub struct RosterCode {
    pub column: &'static str,
    pub factors: Vec<Factor>,
}

impl RosterCode {
    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.lattice.rank() * f.power as usize).sum()
    }

    /// `[Λ_b : Λ_e] = 2^n` for `Λ_b = ½Λ_e`.
    pub fn index(&self) -> f64 {
        2f64.powi(self.dim() as i32)
    }

    /// AWGN ECDP bound `(ε_{Λ_e}(σ) + 1)/[Λ_b:Λ_e]` at each σ.
    pub fn ecdp_curve(&self, sigmas: &[f64]) -> CliResult<Vec<f64>> {
        let curves: Vec<FlatnessCurve> = self
            .factors
            .iter()
            .map(|f| FlatnessCurve::build(&f.lattice, sigmas, &f.policy))
            .collect::<latsec_core::Result<_>>()?;
        let index = self.index();
        Ok(sigmas
            .iter()
            .map(|&s| {
                let parts: Vec<_> = curves
                    .iter()
                    .zip(&self.factors)
                    .map(|(c, f)| (c.evaluate(s), f.power))
                    .collect();
                (direct_sum_flatness(&parts).value + 1.0) / index
            })
            .collect())
    }
}

fn factor(lattice: Lattice, power: u32, policy: TruncationPolicy) -> Factor {
    Factor { lattice, power, policy }
}

/// Eight-dimensional roster: `Z⁸`, `L = 2Z × ½Z × Z⁶`, `E8`, unit-volume `A8*`.
pub fn fig1_roster(settings: &Settings) -> CliResult<Vec<RosterCode>> {
    let p = settings.series_policy();
    let z = Lattice::integer(1);
    Ok(vec![
        RosterCode {
            column: "ecdp_Z8",
            factors: vec![factor(z.clone(), 8, p)],
        },
        RosterCode {
            column: "ecdp_L",
            factors: vec![
                factor(z.scale(2.0)?, 1, p),
                factor(z.scale(0.5)?, 1, p),
                factor(z.clone(), 6, p),
            ],
        },
        RosterCode {
            column: "ecdp_E8",
            factors: vec![factor(catalog::make("E8", true)?, 1, p)],
        },
        RosterCode {
            column: "ecdp_A8star",
            factors: vec![factor(catalog::make("A8*", true)?, 1, p)],
        },
    ])
}

/// Twenty-four-dimensional roster: `Z²⁴`, Leech, `E8³`, `E6⁴`, all unit volume.
pub fn fig2_roster(settings: &Settings) -> CliResult<Vec<RosterCode>> {
    let p = settings.series_policy();
    let leech_budget = if settings.budget_overridden {
        settings.budget
    } else {
        LEECH_BUDGET
    };
    let leech_policy = TruncationPolicy::fixed(LEECH_RADIUS_SQ.sqrt()).with_budget(leech_budget);
    Ok(vec![
        RosterCode {
            column: "ecdp_Z24",
            factors: vec![factor(Lattice::integer(1), 24, p)],
        },
        RosterCode {
            column: "ecdp_Leech",
            factors: vec![factor(catalog::make("Leech", true)?, 1, leech_policy)],
        },
        RosterCode {
            column: "ecdp_E8_3",
            factors: vec![factor(catalog::make("E8", true)?, 3, p)],
        },
        RosterCode {
            column: "ecdp_E6_4",
            factors: vec![factor(catalog::make("E6", true)?, 4, p)],
        },
    ])
}

pub fn roster_table(roster: &[RosterCode], snr_db: &[f64]) -> CliResult<Table> {
    check_increasing(snr_db, "SNR grid")?;
    let sigmas: Vec<f64> = snr_db.iter().map(|&s| sigma_from_snr_db(s)).collect();
    let columns: Vec<Vec<f64>> = roster
        .par_iter()
        .map(|code| code.ecdp_curve(&sigmas))
        .collect::<CliResult<_>>()?;
    let mut header = vec!["snr_db"];
    header.extend(roster.iter().map(|c| c.column));
    let mut table = Table::new(header);
    for (i, &snr) in snr_db.iter().enumerate() {
        let mut row: Vec<Cell> = vec![snr.into()];
        row.extend(columns.iter().map(|c| Cell::Num(c[i])));
        table.push(row)?;
    }
    Ok(table)
}

pub fn fig1(snr_db: &[f64], settings: &Settings) -> CliResult<Table> {
    roster_table(&fig1_roster(settings)?, snr_db)
}

pub fn fig2(snr_db: &[f64], settings: &Settings) -> CliResult<Table> {
    roster_table(&fig2_roster(settings)?, snr_db)
}

/// A random quartic field with its unit-volume lattice and `Λ′`.
#[derive(Debug, Clone)]
pub struct FieldSample {
    pub index: usize,
    pub algebraic: AlgebraicLattice,
    pub sublattice: SublatticeResult,
    /// `Λ′` renormalized to unit volume.
    pub sub_unit: Lattice,
}

impl FieldSample {
    pub fn spec(&self) -> &FieldSpec {
        &self.algebraic.field
    }

    pub fn coeff_text(&self) -> String {
        match self.spec() {
            FieldSpec::Quartic(c) => c.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "),
            FieldSpec::Biquadratic { p, q } => format!("sqrt{p} sqrt{q}"),
        }
    }
}

/// Seed of the `attempt`-th field draw.
pub fn field_seed(seed: u64, attempt: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(attempt)
}

/// `count` fields; failed draws are skipped and replaced by further draws.
pub fn sample_fields(count: usize, seed: u64, coeff_bound: i64) -> CliResult<Vec<FieldSample>> {
    if count == 0 {
        return Err(CliError::Usage("field count must be positive".into()));
    }
    let mut out = Vec::with_capacity(count);
    let max_attempts = 10 * count as u64;
    let mut attempt = 0u64;
    while out.len() < count {
        if attempt >= max_attempts {
            return Err(Error::GenerationFailed {
                attempts: attempt as usize,
            }
            .into());
        }
        let drawn = random_totally_real_quartic(field_seed(seed, attempt), coeff_bound);
        attempt += 1;
        let spec = match drawn {
            Ok(s) => s,
            Err(Error::GenerationFailed { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        let algebraic = embed(&spec)?;
        let sublattice = sublattice_procedure(&algebraic)?;
        let sub_unit = sublattice.lattice.unit_volume();
        out.push(FieldSample {
            index: out.len(),
            algebraic,
            sublattice,
            sub_unit,
        });
    }
    Ok(out)
}

/// Fast-fading ECDP bound of the code `Λ_b ⊃ 2Λ_b` at `σ_h = 1`, `σ_h²/σ² = γ²`.
pub fn fast_fading_ecdp(bob: &Lattice, gamma_sq: f64, settings: &Settings) -> CliResult<f64> {
    if !(gamma_sq > 0.0 && gamma_sq.is_finite()) {
        return Err(Error::Domain(format!("gamma_sq must be positive, got {gamma_sq}")).into());
    }
    let code = CosetCode::scaled(bob.clone(), 2)?;
    let model = FadingModel::RayleighFast { sigma_h: 1.0 };
    Ok(ecdp_fading(&code, model, 1.0 / gamma_sq.sqrt(), &settings.psi_policy())?.value)
}

/// Per field and `γ²`: disc proxy and ECDP of the raw lattice and of `Λ′`,
/// followed by one Spearman footer row per `γ²` (rank correlation between
/// `sqrt_disc_proxy` and each ECDP column).
pub fn disc_scatter(count: usize, seed: u64, gamma_sqs: &[f64], settings: &Settings) -> CliResult<Table> {
    if gamma_sqs.is_empty() {
        return Err(CliError::Usage("at least one gamma_sq value is required".into()));
    }
    let fields = sample_fields(count, seed, settings.coeff_bound)?;
    let rows: Vec<Vec<(f64, f64)>> = fields
        .par_iter()
        .map(|f| {
            gamma_sqs
                .iter()
                .map(|&g| {
                    Ok((
                        fast_fading_ecdp(&f.algebraic.lattice, g, settings)?,
                        fast_fading_ecdp(&f.sub_unit, g, settings)?,
                    ))
                })
                .collect::<CliResult<Vec<_>>>()
        })
        .collect::<CliResult<_>>()?;
    let mut table = Table::new([
        "field",
        "coeffs",
        "disc_proxy",
        "sqrt_disc_proxy",
        "gamma_sq",
        "ecdp_raw",
        "ecdp_sublattice",
    ]);
    for (f, vals) in fields.iter().zip(&rows) {
        for (&g, &(raw, sub)) in gamma_sqs.iter().zip(vals) {
            table.push(vec![
                f.index.into(),
                f.coeff_text().into(),
                f.algebraic.disc_proxy.into(),
                f.algebraic.sqrt_disc_proxy().into(),
                g.into(),
                raw.into(),
                sub.into(),
            ])?;
        }
    }
    let disc: Vec<f64> = fields.iter().map(|f| f.algebraic.sqrt_disc_proxy()).collect();
    for (j, &g) in gamma_sqs.iter().enumerate() {
        let raw: Vec<f64> = rows.iter().map(|r| r[j].0).collect();
        let sub: Vec<f64> = rows.iter().map(|r| r[j].1).collect();
        table.push(vec![
            "spearman".into(),
            "".into(),
            "".into(),
            "".into(),
            g.into(),
            spearman(&disc, &raw).into(),
            spearman(&disc, &sub).into(),
        ])?;
    }
    Ok(table)
}

/// Per field: inverse norm sum of `Λ_e = 2Λ_b` and the fast-fading ECDP,
/// for the raw lattice and for `Λ′`.
pub fn ins_scatter(count: usize, seed: u64, gamma_sq: f64, settings: &Settings) -> CliResult<Table> {
    let fields = sample_fields(count, seed, settings.coeff_bound)?;
    let policy = settings.psi_policy();
    let rows: Vec<[(f64, f64); 2]> = fields
        .par_iter()
        .map(|f| {
            let one = |bob: &Lattice| -> CliResult<(f64, f64)> {
                let eve = bob.scale(2.0)?;
                let s = ins(&eve, 3.0, &policy)?;
                Ok((s.value, fast_fading_ecdp(bob, gamma_sq, settings)?))
            };
            Ok([one(&f.algebraic.lattice)?, one(&f.sub_unit)?])
        })
        .collect::<CliResult<_>>()?;
    let mut table = Table::new(["field", "coeffs", "population", "gamma_sq", "ins", "ecdp"]);
    for (f, pair) in fields.iter().zip(&rows) {
        for (name, (s, e)) in ["raw", "sublattice"].iter().zip(pair) {
            table.push(vec![
                f.index.into(),
                f.coeff_text().into(),
                (*name).into(),
                gamma_sq.into(),
                (*s).into(),
                (*e).into(),
            ])?;
        }
    }
    Ok(table)
}

/// ECDP of `Z⁴` against the best and worst `Λ′` of a field population.
pub fn diversity_z4(gamma_sqs: &[f64], count: usize, seed: u64, settings: &Settings) -> CliResult<Table> {
    check_increasing(gamma_sqs, "gamma_sq grid")?;
    let fields = sample_fields(count, seed, settings.coeff_bound)?;
    let z4 = Lattice::integer(4);
    let per_gamma: Vec<(f64, f64, f64)> = gamma_sqs
        .par_iter()
        .map(|&g| {
            let z = fast_fading_ecdp(&z4, g, settings)?;
            let mut best = f64::INFINITY;
            let mut worst = f64::NEG_INFINITY;
            for f in &fields {
                let e = fast_fading_ecdp(&f.sub_unit, g, settings)?;
                best = best.min(e);
                worst = worst.max(e);
            }
            Ok((z, best, worst))
        })
        .collect::<CliResult<_>>()?;
    let mut table = Table::new(["gamma_sq", "ecdp_Z4", "ecdp_best_fd", "ecdp_worst_fd"]);
    for (&g, &(z, b, w)) in gamma_sqs.iter().zip(&per_gamma) {
        table.push(vec![g.into(), z.into(), b.into(), w.into()])?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("-20:20:5").unwrap(), vec![-20.0, -10.0, 0.0, 10.0, 20.0]);
        assert_eq!(parse_grid("3:3:1").unwrap(), vec![3.0]);
        assert!(parse_grid("1:0:3").is_err());
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(check_increasing(&[1.0, 1.0], "grid").is_err());
    }

    #[test]
    fn snr_convention() {
        assert!((sigma_from_snr_db(20.0) - 0.1).abs() < 1e-15);
        assert_eq!(sigma_from_snr_db(0.0), 1.0);
    }

    #[test]
    fn field_sampling_is_seeded() {
        let a = sample_fields(5, 3, 10).unwrap();
        let b = sample_fields(5, 3, 10).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.spec(), y.spec());
        }
        assert!(sample_fields(0, 3, 10).is_err());
    }
}
