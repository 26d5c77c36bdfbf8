//! Theta series `Θ_Λ(q) = Σ_{λ∈Λ} q^{‖λ‖²}` and Gaussian lattice sums with
//! explicit truncation control.
//!
//! Every truncated sum carries a tail estimate built from two pieces: the
//! continuum integral of the summand outside the enumeration ball, and the
//! contribution of the outermost enumerated shell (which dominates when the
//! sum is far from the continuum regime).

use std::collections::BTreeMap;
use std::f64::consts::PI;

use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::csv::Table;
use crate::enumerate::{Enumerator, DEFAULT_POINT_BUDGET, SHELL_TOL};
use crate::error::{Error, Result};
use crate::lattice::Lattice;

pub const DEFAULT_REL_TOL: f64 = 1e-8;
pub const DEFAULT_FIXED_RADIUS: f64 = 15.0;
pub const DEFAULT_MAX_RADIUS: f64 = 1e3;
/// Radius growth factor between adaptive rounds.
pub const GROWTH: f64 = 1.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationMode {
    /// Enumerate the ball of the given radius (not squared).
    FixedRadius(f64),
    /// Grow the radius until the estimated tail is below `rel_tol` of the sum.
    Adaptive { rel_tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    pub mode: TruncationMode,
    pub max_radius: f64,
    pub point_budget: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self::adaptive(DEFAULT_REL_TOL)
    }
}

impl TruncationPolicy {
    pub fn adaptive(rel_tol: f64) -> Self {
        TruncationPolicy {
            mode: TruncationMode::Adaptive { rel_tol },
            max_radius: DEFAULT_MAX_RADIUS,
            point_budget: DEFAULT_POINT_BUDGET,
        }
    }

    pub fn fixed(radius: f64) -> Self {
        TruncationPolicy {
            mode: TruncationMode::FixedRadius(radius),
            max_radius: DEFAULT_MAX_RADIUS.max(radius),
            point_budget: DEFAULT_POINT_BUDGET,
        }
    }

    pub fn with_budget(mut self, budget: f64) -> Self {
        self.point_budget = budget;
        self
    }

    pub fn with_max_radius(mut self, r: f64) -> Self {
        self.max_radius = r;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.mode {
            TruncationMode::FixedRadius(r) if !(r > 0.0 && r.is_finite()) => {
                return Err(Error::domain(format!("truncation radius must be positive, got {r}")))
            }
            TruncationMode::Adaptive { rel_tol } if !(rel_tol > 0.0 && rel_tol < 1.0) => {
                return Err(Error::domain(format!("rel_tol must lie in (0, 1), got {rel_tol}")))
            }
            _ => {}
        }
        if !(self.max_radius > 0.0) {
            return Err(Error::domain("max_radius must be positive"));
        }
        if !(self.point_budget >= 1.0) {
            return Err(Error::domain("point budget must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shell {
    pub norm_sq: f64,
    pub count: u64,
}

/// Shell counts of a lattice up to a squared radius. Reusable across `q`.
#[derive(Debug, Clone)]
pub struct ThetaProfile {
    shells: Vec<Shell>,
    radius_sq: f64,
    rank: usize,
    volume: f64,
    /// Upper bound on the covering radius, for the boundary correction.
    boundary: f64,
    /// False when the adaptive loop stopped at the budget or radius cap.
    pub converged: bool,
}

impl ThetaProfile {
    /// Enumerates all shells with `‖x‖² ≤ radius_sq`.
    pub fn compute(lattice: &Lattice, radius_sq: f64, budget: f64) -> Result<Self> {
        let en = Enumerator::new(lattice)?.with_budget(budget);
        Self::from_enumerator(&en, radius_sq)
    }

    pub fn from_enumerator(en: &Enumerator, radius_sq: f64) -> Result<Self> {
        let mut acc = ShellAccumulator::default();
        en.for_each_half(radius_sq, |_, n| acc.add(n, 2))?;
        let mut shells = vec![Shell { norm_sq: 0.0, count: 1 }];
        shells.extend(acc.into_shells());
        Ok(ThetaProfile {
            shells,
            radius_sq,
            rank: en.lattice().rank(),
            volume: en.lattice().volume(),
            boundary: en.covering_radius_bound(),
            converged: true,
        })
    }

    /// Builds a profile from known shell data (used for tests and imports).
    pub fn from_shells(shells: Vec<Shell>, radius_sq: f64, rank: usize, volume: f64) -> Self {
        ThetaProfile {
            shells,
            radius_sq,
            rank,
            volume,
            boundary: 0.0,
            converged: true,
        }
    }

    pub fn shells(&self) -> &[Shell] {
        &self.shells
    }

    pub fn radius_sq(&self) -> f64 {
        self.radius_sq
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// Smallest nonzero squared norm seen, if any.
    pub fn min_norm(&self) -> Option<f64> {
        self.shells.iter().find(|s| s.norm_sq > 0.0).map(|s| s.norm_sq)
    }

    pub fn point_count(&self) -> u64 {
        self.shells.iter().map(|s| s.count).sum()
    }

    /// Truncated `Θ(q)`, origin included.
    pub fn evaluate(&self, q: f64) -> f64 {
        1.0 + self.evaluate_nonzero(q)
    }

    /// Truncated `Θ(q) − 1`, summed without cancellation.
    pub fn evaluate_nonzero(&self, q: f64) -> f64 {
        let ln_q = q.ln();
        // Ascending shells, descending terms: sum from the small end.
        let mut sum = Neumaier::default();
        for s in self.shells.iter().rev().filter(|s| s.norm_sq > 0.0) {
            sum.add(s.count as f64 * (s.norm_sq * ln_q).exp());
        }
        sum.value()
    }

    /// `Σ count·q^n·(1 + n·|ln q|)` including the origin: the truncated sum
    /// weighted by the sensitivity of each term to relative errors in its
    /// norm. Scaled by ε it bounds the floating-point error of `evaluate`.
    pub fn sensitivity_at(&self, q: f64) -> f64 {
        let ln_q = q.ln();
        let mut sum = Neumaier::default();
        for s in self.shells.iter().rev() {
            let x = s.norm_sq * ln_q;
            if s.norm_sq == 0.0 {
                sum.add(1.0);
            } else if x.is_finite() {
                sum.add(s.count as f64 * x.exp() * (1.0 - x));
            }
        }
        sum.value()
    }

    /// Contribution of the outermost nonzero shell at `q`.
    pub fn last_shell_term(&self, q: f64) -> f64 {
        self.shells
            .iter()
            .rev()
            .find(|s| s.norm_sq > 0.0)
            .map_or(0.0, |s| s.count as f64 * (s.norm_sq * q.ln()).exp())
    }

    /// Estimated `Σ_{‖λ‖² > R²} q^{‖λ‖²}`: the integral beyond `R`, the
    /// outermost enumerated shell, and the boundary correction.
    pub fn tail_at(&self, q: f64) -> f64 {
        self.integral_part(q) + self.last_shell_term(q)
    }

    /// Integral beyond `R` plus a lattice-point discrepancy term.
    ///
    /// Counting points instead of volume is off by at most the number of
    /// cells meeting the sphere, `(V(R+ρ) − V(R−ρ))/Vol`, and each such
    /// discrepancy is weighted by about `q^{R²}`; the factor 2 covers the
    /// boundary term and the integral of the derivative.
    fn integral_part(&self, q: f64) -> f64 {
        let r = self.radius_sq.sqrt();
        let m = self.rank as i32;
        let ln_ball = ln_unit_ball_volume(self.rank) - self.volume.ln();
        let outer = (r + self.boundary).powi(m);
        let inner = (r - self.boundary).max(0.0).powi(m);
        let cells = ln_ball.exp() * (outer - inner);
        integral_tail(self.rank, self.volume, -q.ln(), self.radius_sq) + 2.0 * cells * (self.radius_sq * q.ln()).exp()
    }

    /// `norm_sq,count` rows, origin first.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["norm_sq", "count"]);
        for s in &self.shells {
            t.push(vec![s.norm_sq.into(), s.count.into()])
                .expect("finite shell data");
        }
        t
    }
}

/// `(1/Vol)·∫_{‖x‖>R} e^{−a‖x‖²} dx` over an m-dimensional space.
pub fn integral_tail(rank: usize, volume: f64, a: f64, radius_sq: f64) -> f64 {
    if !(a > 0.0) {
        return f64::INFINITY;
    }
    if a.is_infinite() {
        return 0.0;
    }
    let half = 0.5 * rank as f64;
    let scale = (half * (PI / a).ln() - volume.ln()).exp();
    let x = a * radius_sq;
    if x <= 0.0 {
        return scale;
    }
    scale * gamma_ur(half, x)
}

/// Smallest `R²` with `integral_tail ≤ target`, found by bisection.
pub fn radius_for_integral_tail(rank: usize, volume: f64, a: f64, target: f64) -> f64 {
    let f = |r2: f64| integral_tail(rank, volume, a, r2);
    if f(0.0) <= target {
        return 0.0;
    }
    let mut hi = 1.0 / a;
    while f(hi) > target {
        hi *= 2.0;
        if hi > 1e12 {
            return hi;
        }
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Largest `R² ≤ upper` whose enumeration estimate fits in the budget.
fn largest_affordable_radius_sq(en: &Enumerator, upper: f64) -> f64 {
    if en.estimated_nodes(upper) <= en.budget() {
        return upper;
    }
    let (mut lo, mut hi) = (0.0, upper);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if en.estimated_nodes(mid) <= en.budget() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// A theta value with its truncation data.
#[derive(Debug, Clone)]
pub struct ThetaValue {
    pub value: f64,
    pub tail_estimate: f64,
    pub profile: ThetaProfile,
}

/// Computes `Θ_Λ(q)` for `0 ≤ q < 1` under the given policy.
///
/// `q = 0` arises when `e^{−x}` underflows; the series is then exactly 1.
pub fn theta(lattice: &Lattice, q: f64, policy: &TruncationPolicy) -> Result<ThetaValue> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::domain(format!("theta series needs 0 <= q < 1, got {q}")));
    }
    let profile = theta_profile_for(lattice, &[q], policy)?;
    Ok(ThetaValue {
        value: profile.evaluate(q),
        tail_estimate: profile.tail_at(q),
        profile,
    })
}

/// A profile deep enough for every `q` in `qs` under the policy.
pub fn theta_profile_for(lattice: &Lattice, qs: &[f64], policy: &TruncationPolicy) -> Result<ThetaProfile> {
    policy.validate()?;
    if qs.iter().any(|&q| !(0.0..1.0).contains(&q)) {
        return Err(Error::domain("theta series needs 0 <= q < 1"));
    }
    let en = Enumerator::new(lattice)?.with_budget(policy.point_budget);
    match policy.mode {
        TruncationMode::FixedRadius(r) => ThetaProfile::from_enumerator(&en, r * r),
        TruncationMode::Adaptive { rel_tol } => adaptive_profile(&en, qs, rel_tol, policy.max_radius),
    }
}

fn adaptive_profile(en: &Enumerator, qs: &[f64], rel_tol: f64, max_radius: f64) -> Result<ThetaProfile> {
    let l = en.lattice();
    let (rank, volume) = (l.rank(), l.volume());
    let cap_sq = max_radius * max_radius;
    let mut r2 = en.shortest_basis_norm_sq() * (1.0 + 1e-6);
    for &q in qs {
        // Θ ≥ 1, so an absolute target is at least as strict as a relative one.
        r2 = r2.max(radius_for_integral_tail(rank, volume, -q.ln(), rel_tol));
    }
    loop {
        let target = r2.min(cap_sq);
        let affordable = largest_affordable_radius_sq(en, target);
        let clamped = affordable < target || target < r2;
        if affordable <= 0.0 {
            // Not even the first shell fits; report the budget failure.
            en.for_each_half(target, |_, _| {})?;
        }
        let mut profile = ThetaProfile::from_enumerator(en, affordable)?;
        let done = qs.iter().all(|&q| {
            let sum = profile.evaluate(q);
            profile.last_shell_term(q) < rel_tol * sum && profile.integral_part(q) < rel_tol * sum
        });
        if done {
            return Ok(profile);
        }
        if clamped {
            profile.converged = false;
            return Ok(profile);
        }
        r2 *= GROWTH * GROWTH;
    }
}

/// `g_m(Λ + s; σ) = Σ_{λ∈Λ} (2πσ²)^{−m/2} exp(−‖λ + s‖²/(2σ²))`.
///
/// The shift may leave the span of the lattice; its orthogonal component
/// contributes a common factor. Returns the value and a tail estimate.
pub fn gaussian_sum(lattice: &Lattice, shift: &[f64], sigma: f64, policy: &TruncationPolicy) -> Result<(f64, f64)> {
    policy.validate()?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::domain(format!("sigma must be positive, got {sigma}")));
    }
    let n = lattice.ambient_dim();
    if shift.len() != n {
        return Err(Error::Shape(format!("shift has length {}, ambient dimension is {n}", shift.len())));
    }
    let en = Enumerator::new(lattice)?.with_budget(policy.point_budget);
    let s = nalgebra::DVector::from_column_slice(shift);
    let coords = en.reduced_coordinates(&s)?;
    let in_span = en.reduced().basis() * nalgebra::DVector::from_column_slice(&coords);
    let perp_sq = (&s - in_span).norm_squared();

    let rank = lattice.rank();
    let volume = lattice.volume();
    let a = 1.0 / (2.0 * sigma * sigma);
    let log_norm = -0.5 * rank as f64 * (2.0 * PI * sigma * sigma).ln() - a * perp_sq;
    let sum_within = |r2: f64| -> Result<(f64, f64)> {
        let mut total = Neumaier::default();
        let mut outer = Neumaier::default();
        let inner_r2 = r2 / (GROWTH * GROWTH);
        en.for_each_shifted(&coords, r2, |_, d| {
            let t = (-a * d).exp();
            total.add(t);
            if d > inner_r2 {
                outer.add(t);
            }
        })?;
        Ok((total.value(), outer.value()))
    };

    let (sum, tail) = match policy.mode {
        TruncationMode::FixedRadius(r) => {
            let r2 = r * r;
            let (sum, outer) = sum_within(r2)?;
            (sum, integral_tail(rank, volume, a, r2) + outer)
        }
        TruncationMode::Adaptive { rel_tol } => {
            let cap_sq = policy.max_radius * policy.max_radius;
            // The shift moves the ball centre by at most a covering radius;
            // start from the unshifted requirement and grow.
            let mut r2 = radius_for_integral_tail(rank, volume, a, rel_tol)
                .max(en.shortest_basis_norm_sq());
            loop {
                let target = r2.min(cap_sq);
                let affordable = largest_affordable_radius_sq(&en, target);
                let (sum, outer) = sum_within(affordable)?;
                let tail = integral_tail(rank, volume, a, affordable) + outer;
                let clamped = affordable < target || target < r2;
                if (sum > 0.0 && outer < rel_tol * sum && tail < 2.0 * rel_tol * sum.max(1.0)) || clamped {
                    break (sum, tail);
                }
                r2 *= GROWTH * GROWTH;
            }
        }
    };
    let scale = log_norm.exp();
    Ok((scale * sum, scale * tail))
}

/// Groups squared norms into shells, merging values within `SHELL_TOL`.
#[derive(Debug, Default)]
pub(crate) struct ShellAccumulator {
    // Key: bit pattern of a nonnegative f64, which orders like the value.
    map: BTreeMap<u64, u64>,
}

impl ShellAccumulator {
    pub(crate) fn add(&mut self, norm_sq: f64, count: u64) {
        let tol = SHELL_TOL * norm_sq.max(1.0);
        let lo = (norm_sq - tol).max(0.0).to_bits();
        let hi = (norm_sq + tol).to_bits();
        let hit = self.map.range(lo..=hi).next().map(|(k, _)| *k);
        *self.map.entry(hit.unwrap_or(norm_sq.to_bits())).or_insert(0) += count;
    }

    pub(crate) fn into_shells(self) -> Vec<Shell> {
        self.map
            .into_iter()
            .map(|(k, count)| Shell {
                norm_sq: f64::from_bits(k),
                count,
            })
            .collect()
    }
}

/// Compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Volume of the unit ball in `m` dimensions, in log form.
pub fn ln_unit_ball_volume(m: usize) -> f64 {
    let h = 0.5 * m as f64;
    h * PI.ln() - ln_gamma(h + 1.0)
}
