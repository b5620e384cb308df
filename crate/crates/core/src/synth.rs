//! Synthetic reputation series with controlled suppression of mildly
//! positive scores, plus an independent recount of the expected
//! missing-sentiment percentage.
//!
//! # Generator
//!
//! The stream is `ChaCha8Rng` from `rand_chacha` 0.3, seeded with
//! `seed_from_u64(seed)`. Every uniform draw is
//! `(next_u64() >> 11) as f64 * 2^-53`, in `[0, 1)`.
//!
//! Normal variates come from the basic Box-Muller transform, one variate per
//! pair of uniforms: `u1 = 1 - uniform()`, `u2 = uniform()`,
//! `z = sqrt(-2 ln u1) * cos(2 pi u2)`. A draw `mean + sd * z` outside
//! `[-1, 1]` is discarded and redrawn.
//!
//! After all `n` scores are drawn, the truncated mean `m` and range of the
//! full series fix the deletion band `(m, m + w_abs]` with
//! `w_abs = suppress_band_pct / 100 * range`. Scores are then visited in
//! order; each one inside the band consumes one uniform `u` and is deleted
//! when `u < suppress_fraction`. Because the same `u` is drawn for a given
//! seed regardless of the fraction, deletion sets are nested in the fraction.

use std::f64::consts::TAU;

use chrono::NaiveDate;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bias::truncated_mean;
use crate::error::SynthError;
use crate::model::{IndexPoint, ReputationSeries};

pub const GENERATOR_NAME: &str = "ChaCha8Rng (rand_chacha 0.3) + Box-Muller, redraw outside [-1, 1]";

/// First day of every synthetic series.
pub fn start_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2014, 1, 1).expect("valid date")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub seed: u64,
    pub suppress_fraction: f64,
    pub suppress_band_pct: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n: 730,
            mean: 0.1,
            sd: 0.3,
            seed: 0,
            suppress_fraction: 0.0,
            suppress_band_pct: 16.5,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |msg: String| Err(SynthError::InvalidSpec(msg));
        if self.n < 10 {
            return bad(format!("n must be at least 10, got {}", self.n));
        }
        if !(self.sd.is_finite() && self.sd > 0.0) {
            return bad(format!("sd must be positive, got {}", self.sd));
        }
        if !self.mean.is_finite() || !(-1.0..=1.0).contains(&self.mean) {
            // a mean far outside [-1, 1] would make redraw-truncation spin
            return bad(format!("mean must lie in [-1, 1], got {}", self.mean));
        }
        if !(0.0..=1.0).contains(&self.suppress_fraction) {
            return bad(format!(
                "suppress_fraction must lie in [0, 1], got {}",
                self.suppress_fraction
            ));
        }
        if !(self.suppress_band_pct.is_finite() && self.suppress_band_pct > 0.0) {
            return bad(format!(
                "suppress_band_pct must be positive, got {}",
                self.suppress_band_pct
            ));
        }
        Ok(())
    }
}

/// Exact bookkeeping of what the generator deleted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub generator: String,
    pub spec: SynthSpec,
    /// Truncated mean of the full series; lower (open) edge of the deletion band.
    pub band_lo: f64,
    /// `band_lo + w_abs`; upper (closed) edge of the deletion band.
    pub band_hi: f64,
    pub full_range: f64,
    pub w_abs: f64,
    pub band_pct: f64,
    /// Full-series scores that fell inside the deletion band.
    pub in_band: usize,
    pub deleted: usize,
    pub deleted_periods: Vec<NaiveDate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub full: ReputationSeries,
    pub suppressed: ReputationSeries,
    pub ground_truth: GroundTruth,
}

struct Stream(ChaCha8Rng);

impl Stream {
    fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn standard_normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
    }
}

pub fn generate(spec: &SynthSpec) -> Result<SynthOutput, SynthError> {
    spec.validate()?;
    let mut rng = Stream(ChaCha8Rng::seed_from_u64(spec.seed));

    let mut scores = Vec::with_capacity(spec.n);
    while scores.len() < spec.n {
        let x = spec.mean + spec.sd * rng.standard_normal();
        if (-1.0..=1.0).contains(&x) {
            scores.push(x);
        }
    }

    let m = truncated_mean(&scores)?;
    let (lo, hi) = scores
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let range = hi - lo;
    let w_abs = (spec.suppress_band_pct / 100.0) * range;

    let mut full = Vec::with_capacity(spec.n);
    let mut kept = Vec::with_capacity(spec.n);
    let mut deleted_periods = Vec::new();
    let mut in_band = 0;
    for (day, &x) in start_date().iter_days().zip(&scores) {
        let point = IndexPoint::new(day, x, 1)?;
        full.push(point);
        if x > m && x <= m + w_abs {
            in_band += 1;
            if rng.uniform() < spec.suppress_fraction {
                deleted_periods.push(day);
                continue;
            }
        }
        kept.push(point);
    }

    Ok(SynthOutput {
        full: ReputationSeries::new("synth", full)?,
        suppressed: ReputationSeries::new("synth", kept)?,
        ground_truth: GroundTruth {
            generator: GENERATOR_NAME.to_owned(),
            spec: *spec,
            band_lo: m,
            band_hi: m + w_abs,
            full_range: range,
            w_abs,
            band_pct: spec.suppress_band_pct,
            in_band,
            deleted: deleted_periods.len(),
            deleted_periods,
        },
    })
}

/// Reference missing-sentiment percentage for `suppressed` at the ground
/// truth's band width.
///
/// This is a plain recount, kept separate from the analyzer: the truncated
/// mean is the total minus one maximum and one minimum, and all four counts
/// come from a single pass over distances to the centre. Band edges carry the
/// same few-ulp slack as the analyzer (`4 eps (|m| + w)`). Scores are used as
/// given (positive-branch orientation).
pub fn expected_m(ground_truth: &GroundTruth, suppressed: &ReputationSeries) -> Result<f64, SynthError> {
    let xs: Vec<f64> = suppressed.points().iter().map(|p| p.score).collect();
    if xs.len() < 3 {
        return Err(SynthError::InvalidSpec("suppressed series has fewer than 3 points".into()));
    }
    let mut total = 0.0;
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    for &x in &xs {
        total += x;
        if x > max {
            max = x;
        }
        if x < min {
            min = x;
        }
    }
    let centre = (total - max - min) / (xs.len() - 2) as f64;
    let w = (ground_truth.band_pct / 100.0) * (max - min);
    let tol = 4.0 * f64::EPSILON * (centre.abs() + w);

    let (mut upper, mut lower, mut pos, mut neg) = (0u64, 0u64, 0u64, 0u64);
    for &x in &xs {
        let d = x - centre;
        if d > tol && d <= w + tol {
            upper += 1;
        }
        if -d > tol && -d <= w + tol {
            lower += 1;
        }
        if x > 0.0 {
            pos += 1;
        }
        if x < 0.0 {
            neg += 1;
        }
    }
    if upper == 0 || pos == 0 || neg == 0 {
        return Err(SynthError::InvalidSpec(format!(
            "undefined ratio in recount (upper band {upper}, positives {pos}, negatives {neg})"
        )));
    }
    let alpha = lower as f64 / upper as f64;
    let beta = neg as f64 / pos as f64;
    Ok(100.0 * (alpha - beta) / beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(seed: u64, fraction: f64) -> SynthSpec {
        SynthSpec {
            n: 2000,
            seed,
            suppress_fraction: fraction,
            ..Default::default()
        }
    }

    #[test]
    fn no_suppression_is_identity() {
        let out = generate(&spec(1, 0.0)).unwrap();
        assert_eq!(out.full, out.suppressed);
        assert_eq!(out.ground_truth.deleted, 0);
        assert!(out.ground_truth.in_band > 0);
    }

    #[test]
    fn full_suppression_empties_band() {
        let out = generate(&spec(2, 1.0)).unwrap();
        let gt = &out.ground_truth;
        assert_eq!(gt.deleted, gt.in_band);
        assert!(out
            .suppressed
            .scores()
            .iter()
            .all(|&x| !(x > gt.band_lo && x <= gt.band_hi)));
        assert_eq!(out.suppressed.len(), out.full.len() - gt.deleted);
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate(&spec(42, 0.3)).unwrap();
        let b = generate(&spec(42, 0.3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            serde_json::to_string(&a.ground_truth).unwrap(),
            serde_json::to_string(&b.ground_truth).unwrap()
        );
        let c = generate(&spec(43, 0.3)).unwrap();
        assert_ne!(a.full, c.full);
    }

    // Frozen output of the documented algorithm; catches accidental changes
    // to the stream or transform.
    #[test]
    fn stream_is_stable() {
        let out = generate(&SynthSpec {
            n: 10,
            mean: 0.0,
            sd: 0.3,
            seed: 7,
            suppress_fraction: 0.0,
            suppress_band_pct: 10.0,
        })
        .unwrap();
        let first = out.full.scores()[0];
        let mut rng = Stream(ChaCha8Rng::seed_from_u64(7));
        let u1 = 1.0 - (rng.0.next_u64() >> 11) as f64 / 9007199254740992.0;
        let u2 = (rng.0.next_u64() >> 11) as f64 / 9007199254740992.0;
        let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        assert_eq!(first, 0.3 * z);
    }

    #[test]
    fn scores_stay_in_range() {
        let out = generate(&SynthSpec {
            n: 5000,
            mean: 0.8,
            sd: 0.9,
            ..Default::default()
        })
        .unwrap();
        assert!(out.full.scores().iter().all(|x| (-1.0..=1.0).contains(x)));
    }

    #[test]
    fn deletion_sets_nested() {
        let lo = generate(&spec(5, 0.2)).unwrap();
        let hi = generate(&spec(5, 0.6)).unwrap();
        assert!(lo
            .ground_truth
            .deleted_periods
            .iter()
            .all(|d| hi.ground_truth.deleted_periods.contains(d)));
    }

    // The recount re-centres on the suppressed data, so monotonicity is only
    // reliable while the centre has not drifted far; at fractions near 1 the
    // shifted band picks up unsuppressed scores below the original centre.
    #[test]
    fn heavier_deletion_raises_expected_m() {
        for seed in [11, 12, 13] {
            let ms: Vec<f64> = (0..=9)
                .map(|k| {
                    let out = generate(&SynthSpec {
                        n: 10_000,
                        seed,
                        suppress_fraction: k as f64 / 10.0,
                        ..Default::default()
                    })
                    .unwrap();
                    expected_m(&out.ground_truth, &out.suppressed).unwrap()
                })
                .collect();
            assert!(ms[..7].windows(2).all(|w| w[1] >= w[0]), "seed {seed}: {ms:?}");
            assert!(ms[1..].iter().all(|&m| m > ms[0]), "seed {seed}: {ms:?}");
        }
    }

    // Counting against the fixed full-series centre, deleting band-positives
    // can only raise M: pos/upper grows as both lose the same k.
    #[test]
    fn fixed_centre_recount_is_monotone() {
        for seed in 0..5 {
            let mut last = f64::NEG_INFINITY;
            for k in 0..=10 {
                let out = generate(&spec(seed, k as f64 / 10.0)).unwrap();
                let gt = &out.ground_truth;
                let xs = out.suppressed.scores();
                let upper = xs.iter().filter(|&&x| x > gt.band_lo && x <= gt.band_hi).count() as f64;
                let lower = xs.iter().filter(|&&x| x < gt.band_lo && x >= gt.band_lo - gt.w_abs).count() as f64;
                let pos = xs.iter().filter(|&&x| x > 0.0).count() as f64;
                let neg = xs.iter().filter(|&&x| x < 0.0).count() as f64;
                if upper == 0.0 {
                    break;
                }
                let m = 100.0 * ((lower / upper) - (neg / pos)) / (neg / pos);
                assert!(m >= last, "seed {seed} fraction {k}: {m} < {last}");
                last = m;
            }
        }
    }

    #[test]
    fn invalid_specs() {
        for s in [
            SynthSpec { n: 9, ..Default::default() },
            SynthSpec { sd: 0.0, ..Default::default() },
            SynthSpec { suppress_fraction: 1.5, ..Default::default() },
            SynthSpec { suppress_fraction: -0.1, ..Default::default() },
            SynthSpec { suppress_band_pct: 0.0, ..Default::default() },
        ] {
            assert!(matches!(generate(&s), Err(SynthError::InvalidSpec(_))), "{s:?}");
        }
    }
}
