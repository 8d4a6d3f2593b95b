//! Cantor-type subsets of an interval: the ternary set, "fat" Cantor sets with
//! a scaled middle-`4^-k` removal schedule, and finite point sets.
//!
//! Ternary digits are generated with exact dyadic arithmetic on the binary
//! value of the `f64` input, so membership and the Cantor function are exact
//! for the number actually passed in (no drift from repeated `x * 3.0`).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{domain, precondition, Error, Result};

/// Default construction depth used when a caller does not pick one.
pub const DEFAULT_DEPTH: u32 = 40;

/// Removal schedule of a fat Cantor set on an interval of length `L`:
/// stage `k >= 1` removes an open middle interval of length `scale * 4^-k * L`
/// from each of the `2^(k-1)` surviving closed intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct FatSchedule {
    scale: BigRational,
    /// Relative (unit-ambient) stage interval lengths, `lengths[k]` for stage `k`.
    lengths: Vec<f64>,
}

impl FatSchedule {
    const CACHED_STAGES: usize = 64;

    /// `scale` must lie in `(0, 1]`; larger values would not fit the stage intervals.
    pub fn new(scale: BigRational) -> Result<Self> {
        if scale <= BigRational::zero() || scale > BigRational::one() {
            return Err(precondition(format!("fat Cantor scale {scale} must lie in (0, 1]")));
        }
        let mut lengths = Vec::with_capacity(Self::CACHED_STAGES + 1);
        let mut len = BigRational::one();
        lengths.push(1.0);
        for k in 1..=Self::CACHED_STAGES as u32 {
            len = (len - Self::removal_rel(&scale, k)) / BigRational::from_integer(2.into());
            lengths.push(len.to_f64().unwrap_or(0.0));
        }
        Ok(Self { scale, lengths })
    }

    pub fn scale(&self) -> &BigRational {
        &self.scale
    }

    fn removal_rel(scale: &BigRational, stage: u32) -> BigRational {
        scale / BigRational::from_integer(BigInt::from(4).pow(stage))
    }

    /// Relative length removed from each interval at `stage` (unit ambient).
    pub fn removal(&self, stage: u32) -> BigRational {
        Self::removal_rel(&self.scale, stage)
    }

    /// Exact relative length of every stage-`depth` interval.
    pub fn stage_length(&self, depth: u32) -> BigRational {
        let two = BigRational::from_integer(2.into());
        let mut len = BigRational::one();
        for k in 1..=depth {
            len = (len - self.removal(k)) / &two;
        }
        len
    }

    fn stage_length_f64(&self, depth: u32) -> f64 {
        match self.lengths.get(depth as usize) {
            Some(&l) => l,
            None => self.stage_length(depth).to_f64().unwrap_or(0.0),
        }
    }

    fn removal_f64(&self, stage: u32) -> f64 {
        self.scale.to_f64().unwrap_or(0.0) * 0.25f64.powi(stage as i32)
    }

    /// Relative residual measure of the limit set: `1 - scale / 2`.
    pub fn residual_fraction(&self) -> BigRational {
        BigRational::one() - &self.scale / BigRational::from_integer(2.into())
    }
}

/// Which Cantor-type set.
#[derive(Debug, Clone, PartialEq)]
pub enum CantorVariant {
    Ternary,
    Fat(FatSchedule),
    /// Finitely many points, sorted ascending.
    Discrete(Vec<f64>),
}

/// A closed, nowhere dense subset of a compact interval `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CantorLikeSet {
    variant: CantorVariant,
    ambient: (f64, f64),
    depth: u32,
}

impl CantorLikeSet {
    pub fn ternary(lo: f64, hi: f64) -> Result<Self> {
        Self::with_variant(CantorVariant::Ternary, (lo, hi))
    }

    pub fn fat(lo: f64, hi: f64, schedule: FatSchedule) -> Result<Self> {
        Self::with_variant(CantorVariant::Fat(schedule), (lo, hi))
    }

    pub fn discrete(mut points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(precondition("a discrete set needs at least one point"));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(precondition("discrete points must be finite"));
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        let lo = points[0];
        let hi = *points.last().unwrap();
        let ambient = if lo < hi { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        Ok(Self {
            variant: CantorVariant::Discrete(points),
            ambient,
            depth: DEFAULT_DEPTH,
        })
    }

    fn with_variant(variant: CantorVariant, ambient: (f64, f64)) -> Result<Self> {
        let (lo, hi) = ambient;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(precondition(format!("ambient interval ({lo}, {hi}) is invalid")));
        }
        Ok(Self {
            variant,
            ambient,
            depth: DEFAULT_DEPTH,
        })
    }

    pub fn with_depth(mut self, depth: u32) -> Self {
        self.depth = depth.max(1);
        self
    }

    pub fn variant(&self) -> &CantorVariant {
        &self.variant
    }

    pub fn ambient(&self) -> (f64, f64) {
        self.ambient
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self.variant, CantorVariant::Discrete(_))
    }

    fn ambient_len(&self) -> f64 {
        self.ambient.1 - self.ambient.0
    }

    fn relative(&self, x: f64) -> f64 {
        (x - self.ambient.0) / self.ambient_len()
    }

    /// Membership in the stage-`depth` cover. `x` must lie in the ambient interval.
    pub fn contains(&self, x: f64, depth: u32) -> Result<bool> {
        if depth == 0 {
            return Err(precondition("depth must be at least 1"));
        }
        if !(self.ambient.0 <= x && x <= self.ambient.1) {
            return Err(domain(format!(
                "{x} lies outside the ambient interval {:?}",
                self.ambient
            )));
        }
        Ok(self.covers(x, depth))
    }

    /// Like [`contains`](Self::contains) but `false` outside the ambient interval.
    pub fn covers(&self, x: f64, depth: u32) -> bool {
        if !(self.ambient.0 <= x && x <= self.ambient.1) {
            return false;
        }
        match &self.variant {
            CantorVariant::Ternary => ternary_member(self.relative(x).clamp(0.0, 1.0), depth),
            CantorVariant::Fat(s) => fat_member(s, self.relative(x).clamp(0.0, 1.0), depth),
            CantorVariant::Discrete(p) => p.binary_search_by(|q| q.total_cmp(&x)).is_ok(),
        }
    }

    /// Does the stage-`depth` cover meet the half-open interval `[lo, hi)`?
    pub fn meets(&self, lo: f64, hi: f64, depth: u32) -> bool {
        if hi <= self.ambient.0 || lo > self.ambient.1 {
            return false;
        }
        match &self.variant {
            CantorVariant::Discrete(p) => {
                let start = p.partition_point(|&q| q < lo);
                start < p.len() && p[start] < hi
            }
            _ => {
                let l = self.ambient_len();
                let rel_lo = (lo - self.ambient.0) / l;
                let rel_hi = (hi - self.ambient.0) / l;
                self.meets_rel(0.0, 0, rel_lo, rel_hi, depth)
            }
        }
    }

    fn stage_len_rel(&self, stage: u32) -> f64 {
        match &self.variant {
            CantorVariant::Ternary => 3f64.powi(-(stage as i32)),
            CantorVariant::Fat(s) => s.stage_length_f64(stage),
            CantorVariant::Discrete(_) => 0.0,
        }
    }

    // Stage interval [start, start + len_k] against [lo, hi), relative units.
    fn meets_rel(&self, start: f64, stage: u32, lo: f64, hi: f64, depth: u32) -> bool {
        let len = self.stage_len_rel(stage);
        let end = start + len;
        if !(start < hi && end >= lo) {
            return false;
        }
        if stage >= depth || (lo <= start && end < hi) {
            return true;
        }
        let child = self.stage_len_rel(stage + 1);
        self.meets_rel(start, stage + 1, lo, hi, depth)
            || self.meets_rel(end - child, stage + 1, lo, hi, depth)
    }

    /// Closed intervals of the stage-`depth` cover (points for the discrete variant).
    pub fn stage_intervals(&self, depth: u32) -> Vec<(f64, f64)> {
        match &self.variant {
            CantorVariant::Discrete(p) => p.iter().map(|&q| (q, q)).collect(),
            _ => {
                let l = self.ambient_len();
                let mut out = vec![(0.0f64, 1.0f64)];
                for stage in 1..=depth {
                    let child = self.stage_len_rel(stage);
                    out = out
                        .into_iter()
                        .flat_map(|(a, b)| [(a, a + child), (b - child, b)])
                        .collect();
                }
                out.into_iter()
                    .map(|(a, b)| (self.ambient.0 + a * l, self.ambient.0 + b * l))
                    .collect()
            }
        }
    }

    /// Exact Lebesgue measure of the stage-`depth` cover.
    pub fn stage_measure(&self, depth: u32) -> BigRational {
        let l = exact(self.ambient_len());
        let count = BigRational::from_integer(BigInt::from(2).pow(depth));
        match &self.variant {
            CantorVariant::Discrete(_) => BigRational::zero(),
            CantorVariant::Ternary => {
                l * count / BigRational::from_integer(BigInt::from(3).pow(depth))
            }
            CantorVariant::Fat(s) => l * count * s.stage_length(depth),
        }
    }

    /// Exact Lebesgue measure of the limit set.
    pub fn measure(&self) -> BigRational {
        match &self.variant {
            CantorVariant::Fat(s) => exact(self.ambient_len()) * s.residual_fraction(),
            _ => BigRational::zero(),
        }
    }

    /// Smallest gap between consecutive points (discrete variant only).
    pub fn min_gap(&self) -> Option<f64> {
        match &self.variant {
            CantorVariant::Discrete(p) if p.len() > 1 => {
                p.windows(2).map(|w| w[1] - w[0]).min_by(f64::total_cmp)
            }
            _ => None,
        }
    }
}

/// Exact rational value of a finite `f64`.
pub fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

/// Builds a fat Cantor set on `ambient` whose exact measure strictly exceeds
/// `target`. The removal scale is `min(1, 1 - target / L)`, giving measure
/// `(L + target) / 2` for positive targets.
pub fn fat_cantor_build(ambient: (f64, f64), target: f64) -> Result<CantorLikeSet> {
    let (lo, hi) = ambient;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(precondition(format!("ambient interval ({lo}, {hi}) is invalid")));
    }
    if !target.is_finite() || target < 0.0 {
        return Err(precondition(format!("target measure {target} must be >= 0")));
    }
    let len = exact(hi) - exact(lo);
    let target_q = exact(target);
    if target_q >= len {
        return Err(Error::Infeasible(format!(
            "target measure {target} is not below the ambient length {}",
            hi - lo
        )));
    }
    let fraction = &target_q / &len;
    let scale = (BigRational::one() - fraction).min(BigRational::one());
    let set = CantorLikeSet::fat(lo, hi, FatSchedule::new(scale)?)?;
    debug_assert!(set.measure() > target_q);
    Ok(set)
}

// Dyadic form of t in [0, 1]: t = num / 2^exp. None when 2^exp would not
// leave room for the factor 3 in a u128.
fn dyadic(t: f64) -> Option<(u128, u32)> {
    if t == 0.0 {
        return Some((0, 0));
    }
    let bits = t.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut mant, mut e) = if exp_bits == 0 {
        (frac, 1074i32)
    } else {
        (frac | (1u64 << 52), 1075 - exp_bits)
    };
    while e > 0 && mant & 1 == 0 {
        mant >>= 1;
        e -= 1;
    }
    if e < 0 {
        // t >= 2 cannot happen for clamped inputs; t == 1 lands at e == 0
        return None;
    }
    if e > 125 {
        return None;
    }
    Some((mant as u128, e as u32))
}

enum Walk {
    /// Inside an open removed interval; carries the Cantor function's plateau value.
    Removed(f64),
    Plateau(f64),
    Survived { acc: f64, remainder: f64 },
}

fn ternary_walk(t: f64, depth: u32) -> Walk {
    let mut acc = 0.0;
    let mut weight = 1.0;
    if let Some((mut num, e)) = dyadic(t) {
        let den = 1u128 << e;
        for _ in 0..depth {
            weight *= 0.5;
            let n3 = 3 * num;
            if n3 > den && n3 < 2 * den {
                return Walk::Removed(acc + weight);
            }
            if n3 == den || n3 == 2 * den {
                return Walk::Plateau(acc + weight);
            }
            if n3 < den {
                num = n3;
            } else {
                acc += weight;
                num = n3 - 2 * den;
            }
        }
        Walk::Survived {
            acc,
            remainder: num as f64 / den as f64,
        }
    } else {
        let mut u = t;
        for _ in 0..depth {
            weight *= 0.5;
            let u3 = 3.0 * u;
            if u3 > 1.0 && u3 < 2.0 {
                return Walk::Removed(acc + weight);
            }
            if u3 == 1.0 || u3 == 2.0 {
                return Walk::Plateau(acc + weight);
            }
            if u3 < 1.0 {
                u = u3;
            } else {
                acc += weight;
                u = u3 - 2.0;
            }
        }
        Walk::Survived { acc, remainder: u }
    }
}

fn ternary_member(t: f64, depth: u32) -> bool {
    !matches!(ternary_walk(t, depth), Walk::Removed(_))
}

/// Membership of `x` in the stage-`depth` cover of the ternary set on `[0, 1]`.
pub fn cantor_contains(x: f64, depth: u32) -> Result<bool> {
    CantorLikeSet::ternary(0.0, 1.0)?.contains(x, depth)
}

/// Stage-`depth` approximation of the Cantor function, extended by 0 below 0
/// and 1 above 1. Exact on every removed interval of stage `<= depth`; between
/// them it is the piecewise-linear stage-`depth` staircase.
pub fn cantor_function(x: f64, depth: u32) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let mut acc = 0.0;
    let mut weight = 1.0;
    let depth = depth.max(1);
    match dyadic(x) {
        Some((mut num, e)) => {
            let den = 1u128 << e;
            for _ in 0..depth {
                weight *= 0.5;
                let n3 = 3 * num;
                if n3 >= den && n3 <= 2 * den {
                    return acc + weight;
                }
                if n3 < den {
                    num = n3;
                } else {
                    acc += weight;
                    num = n3 - 2 * den;
                }
            }
            acc + weight * (num as f64 / den as f64)
        }
        None => match ternary_walk(x, depth) {
            Walk::Removed(v) | Walk::Plateau(v) => v,
            Walk::Survived { acc, remainder } => acc + remainder * 0.5f64.powi(depth as i32),
        },
    }
}

fn fat_member(schedule: &FatSchedule, t: f64, depth: u32) -> bool {
    let mut start = 0.0;
    for stage in 1..=depth {
        let len = schedule.stage_length_f64(stage - 1);
        let gap = schedule.removal_f64(stage);
        let gap_lo = start + 0.5 * (len - gap);
        let gap_hi = start + 0.5 * (len + gap);
        if t > gap_lo && t < gap_hi {
            return false;
        }
        if t >= gap_hi {
            start = start + len - schedule.stage_length_f64(stage);
        }
    }
    true
}
