//! Gram-Schmidt orthonormalization of a two-frame fringe pair, wrapped-phase
//! retrieval, and the two phase-step estimators built on top of it.
//!
//! Given background-free frames `u1 = b cos(phi)` and `u2 = b cos(phi + delta)`:
//!
//! ```text
//! u1~ = u1 / |u1|
//! u2^ = u2 - <u2, u1~> u1~          ~ -b sin(delta) sin(phi)
//! u2~ = u2^ / |u2^|
//! phi^ = atan2(-u2~, u1~)
//! ```
//!
//! The *tan* estimator forms the step map `m = u1~ u2^ / (u1 u2~)` and takes
//! `asin` of its robust mean; it tolerates a varying amplitude `b`. The *sin*
//! estimator is the least-squares fit of `u2^ = -sin(delta) sin(phi^)`, which
//! assumes `b = 1`.
//!
//! `asin` cannot tell `delta` from `pi - delta`, so estimates are reported as
//! a magnitude in `[0, pi/2]` together with the sign of the `asin` argument.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{inner_product, norm, ScalarField};
use crate::scalar::Real;
use crate::stats;

/// Pixels whose step-map denominator falls below this percentile are dropped.
pub const MASK_PERCENTILE: f64 = 10.0;

/// Minimum fraction of pixels that must survive the step-map mask.
pub const MIN_MASK_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    /// Robust expectation of the per-pixel step map.
    Tan,
    /// Closed-form least squares for unit amplitude.
    Sin,
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Estimator::Tan => "tan",
            Estimator::Sin => "sin",
        })
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tan" => Ok(Estimator::Tan),
            "sin" => Ok(Estimator::Sin),
            other => Err(Error::InvalidParameter(format!("unknown estimator '{other}' (expected tan or sin)"))),
        }
    }
}

/// How the step map is reduced to a single value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregator {
    Mean,
    #[default]
    Median,
}

impl fmt::Display for Aggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregator::Mean => "mean",
            Aggregator::Median => "median",
        })
    }
}

impl FromStr for Aggregator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mean" => Ok(Aggregator::Mean),
            "median" => Ok(Aggregator::Median),
            other => Err(Error::InvalidParameter(format!("unknown aggregator '{other}' (expected mean or median)"))),
        }
    }
}

/// Output of the orthonormalization.
#[derive(Debug, Clone, PartialEq)]
pub struct GsDecomposition<T> {
    /// First frame scaled to unit norm.
    pub u1_tilde: ScalarField<T>,
    /// Second frame with its component along `u1_tilde` removed.
    pub u2_hat: ScalarField<T>,
    /// `u2_hat` scaled to unit norm.
    pub u2_tilde: ScalarField<T>,
    /// `<u2, u1_tilde>`, the coefficient removed from the second frame.
    pub proj_coeff: T,
}

/// Wrapped phase in `(-pi, pi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMap<T> {
    pub phase: ScalarField<T>,
    /// Pixels where both quadrature components vanish; their phase is set to 0.
    pub undefined: usize,
}

/// Per-pixel step map and the pixels that enter the aggregate.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaMap<T> {
    /// `m(x)`; zero at excluded pixels.
    pub values: ScalarField<T>,
    /// `true` where the pixel is used.
    pub mask: Vec<bool>,
    pub kept: usize,
}

impl<T: Real> DeltaMap<T> {
    pub fn kept_values(&self) -> Vec<T> {
        self.values.data().iter().zip(&self.mask).filter(|(_, &m)| m).map(|(&v, _)| v).collect()
    }

    pub fn fraction(&self) -> f64 {
        self.kept as f64 / self.mask.len() as f64
    }
}

/// An estimated phase step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepEstimate<T> {
    /// `|asin(argument)|`, in `[0, pi/2]`.
    pub delta_hat: T,
    /// Sign of the `asin` argument (`+1` or `-1`).
    pub sign: i8,
    pub estimator: Estimator,
    /// Estimate of `sin(delta)` before clamping to `[-1, 1]`.
    pub argument: T,
    /// Whether `argument` had to be clamped.
    pub clamped: bool,
    /// Magnitude of the neglected cross term, see [`kappa_ratio`].
    pub kappa_ratio: T,
    /// Fraction of pixels used by the estimator.
    pub mask_fraction: T,
}

impl<T: Real> StepEstimate<T> {
    /// The step assuming it lies in `(0, pi/2]` with a positive `asin` argument,
    /// otherwise the signed principal value.
    pub fn signed_delta(&self) -> T {
        if self.sign < 0 {
            -self.delta_hat
        } else {
            self.delta_hat
        }
    }
}

/// Orthonormalizes `u2` against `u1`.
pub fn gs_decompose<T: Real>(u1: &ScalarField<T>, u2: &ScalarField<T>) -> Result<GsDecomposition<T>> {
    u1.check_same_shape(u2)?;
    if !u1.is_finite() || !u2.is_finite() {
        return Err(Error::NonFinite("interferogram"));
    }
    let n1 = norm(u1);
    if n1 <= T::min_positive_value() {
        return Err(Error::BlankFrame);
    }
    let u1_tilde = u1.scaled(n1.recip());
    let proj_coeff = inner_product(u2, &u1_tilde)?;
    let u2_hat = u2.zip_map(&u1_tilde, |a, b| a - proj_coeff * b)?;
    let n2 = norm(&u2_hat);
    // A residual at rounding level means the frames are parallel.
    let tol = T::epsilon().sqrt() * norm(u2).max(T::min_positive_value());
    if !(n2 > tol) {
        return Err(Error::DegeneratePair);
    }
    let u2_tilde = u2_hat.scaled(n2.recip());
    Ok(GsDecomposition { u1_tilde, u2_hat, u2_tilde, proj_coeff })
}

/// `phi^ = atan2(-u2~, u1~)`, wrapped to `(-pi, pi]`.
pub fn wrapped_phase<T: Real>(d: &GsDecomposition<T>) -> PhaseMap<T> {
    let mut undefined = 0;
    let data = d
        .u1_tilde
        .data()
        .iter()
        .zip(d.u2_tilde.data())
        .map(|(&c, &s)| {
            if c == T::zero() && s == T::zero() {
                undefined += 1;
                T::zero()
            } else {
                let p = (-s).atan2(c);
                if p <= -T::PI() {
                    T::PI()
                } else {
                    p
                }
            }
        })
        .collect();
    let phase = ScalarField::new(d.u1_tilde.width(), d.u1_tilde.height(), data).expect("shape preserved");
    PhaseMap { phase, undefined }
}

/// Magnitude of the cross term dropped when `u2^` is taken as `-b sin(delta) sin(phi)`.
///
/// Any quadrature proxy that is linear in the decomposition is orthogonal to
/// `u1` by construction, so the ratio is evaluated on the unit-amplitude
/// recovered phase: `|<cos phi^, sin phi^>| / <cos phi^, cos phi^>`.
pub fn kappa_ratio<T: Real>(d: &GsDecomposition<T>) -> T {
    let phase = wrapped_phase(d).phase;
    kappa_ratio_of_phase(&phase)
}

fn kappa_ratio_of_phase<T: Real>(phase: &ScalarField<T>) -> T {
    let c = phase.map(T::cos);
    let s = phase.map(T::sin);
    let cc = norm(&c).powi(2);
    if cc <= T::zero() {
        return T::zero();
    }
    inner_product(&c, &s).expect("same shape").abs() / cc
}

/// Per-pixel step map `m(x) = u1~(x) u2^(x) / (u1(x) u2~(x))`.
///
/// Pixels where `|u1 u2~|` is zero or below its [`MASK_PERCENTILE`]-th
/// percentile are excluded.
pub fn delta_map<T: Real>(u1: &ScalarField<T>, d: &GsDecomposition<T>) -> Result<DeltaMap<T>> {
    u1.check_same_shape(&d.u1_tilde)?;
    let denom: Vec<T> = u1.data().iter().zip(d.u2_tilde.data()).map(|(&a, &b)| a * b).collect();
    let mags: Vec<T> = denom.iter().map(|v| v.abs()).collect();
    let threshold = stats::percentile(&mags, T::lit(MASK_PERCENTILE))?;

    let total = u1.len();
    let mut mask = Vec::with_capacity(total);
    let mut values = Vec::with_capacity(total);
    for (i, (&den, &mag)) in denom.iter().zip(&mags).enumerate() {
        let keep = mag > T::zero() && mag >= threshold;
        mask.push(keep);
        values.push(if keep { d.u1_tilde.data()[i] * d.u2_hat.data()[i] / den } else { T::zero() });
    }
    let kept = mask.iter().filter(|&&m| m).count();
    if (kept as f64) < MIN_MASK_FRACTION * total as f64 || kept == 0 {
        return Err(Error::MaskStarvation { kept, total });
    }
    Ok(DeltaMap { values: ScalarField::new(u1.width(), u1.height(), values)?, mask, kept })
}

fn fold_arcsin<T: Real>(argument: T) -> (T, i8, bool) {
    let clamped = argument > T::one() || argument < -T::one();
    let a = argument.max(-T::one()).min(T::one());
    let sign = if a < T::zero() { -1 } else { 1 };
    (a.asin().abs(), sign, clamped)
}

/// Step from the robust expectation of the step map.
///
/// Invariant under a common positive rescaling of both frames.
pub fn estimate_step_tan<T: Real>(
    u1: &ScalarField<T>,
    u2: &ScalarField<T>,
    aggregator: Aggregator,
) -> Result<StepEstimate<T>> {
    let d = gs_decompose(u1, u2)?;
    let map = delta_map(u1, &d)?;
    let kept = map.kept_values();
    let argument = match aggregator {
        Aggregator::Mean => stats::mean(&kept)?,
        Aggregator::Median => stats::median(&kept)?,
    };
    if !argument.is_finite() {
        return Err(Error::NonFinite("step-map aggregate"));
    }
    let (delta_hat, sign, clamped) = fold_arcsin(argument);
    Ok(StepEstimate {
        delta_hat,
        sign,
        estimator: Estimator::Tan,
        argument,
        clamped,
        kappa_ratio: kappa_ratio(&d),
        mask_fraction: T::lit(map.fraction()),
    })
}

/// Closed-form least-squares step for unit-amplitude fringes:
/// `asin(-<u2^, sin phi^> / <sin phi^, sin phi^>)`.
pub fn estimate_step_sin<T: Real>(u1: &ScalarField<T>, u2: &ScalarField<T>) -> Result<StepEstimate<T>> {
    let d = gs_decompose(u1, u2)?;
    let phase = wrapped_phase(&d).phase;
    let s = phase.map(T::sin);
    let ss = inner_product(&s, &s)?;
    if !(ss > T::zero()) {
        return Err(Error::DegeneratePair);
    }
    let argument = -inner_product(&d.u2_hat, &s)? / ss;
    if !argument.is_finite() {
        return Err(Error::NonFinite("least-squares step"));
    }
    let (delta_hat, sign, clamped) = fold_arcsin(argument);
    Ok(StepEstimate {
        delta_hat,
        sign,
        estimator: Estimator::Sin,
        argument,
        clamped,
        kappa_ratio: kappa_ratio_of_phase(&phase),
        mask_fraction: T::one(),
    })
}

/// Dispatches to [`estimate_step_tan`] or [`estimate_step_sin`]. The
/// aggregator only affects the tan estimator.
pub fn estimate_step<T: Real>(
    u1: &ScalarField<T>,
    u2: &ScalarField<T>,
    estimator: Estimator,
    aggregator: Aggregator,
) -> Result<StepEstimate<T>> {
    match estimator {
        Estimator::Tan => estimate_step_tan(u1, u2, aggregator),
        Estimator::Sin => estimate_step_sin(u1, u2),
    }
}

/// Wrapped phase of a background-free pair.
pub fn demodulate<T: Real>(u1: &ScalarField<T>, u2: &ScalarField<T>) -> Result<ScalarField<T>> {
    Ok(wrapped_phase(&gs_decompose(u1, u2)?).phase)
}

/// Wraps an angle difference into `(-pi, pi]`.
pub fn wrap_angle<T: Real>(a: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut w = a - two_pi * ((a + T::PI()) / two_pi).floor();
    if w <= -T::PI() {
        w = w + two_pi;
    }
    w
}

/// RMS of the wrapped difference between two phase maps.
pub fn rms_wrapped_error<T: Real>(a: &ScalarField<T>, b: &ScalarField<T>) -> Result<T> {
    let diff = a.zip_map(b, |x, y| wrap_angle(x - y))?;
    Ok((norm(&diff).powi(2) / T::from_count(diff.len())).sqrt())
}
