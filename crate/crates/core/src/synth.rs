//! Synthetic phase-shifted fringe pairs.
//!
//! Frames follow the usual intensity model
//! `I_k(x) = A(x) + B(x) cos(phi(x) + delta_k) + eta_k(x)` with
//! `delta_1 = 0`, `delta_2 = delta`. The three evaluation cases differ only in
//! which of `A` and `B` are allowed to vary over the field:
//!
//! | case | A      | B      |
//! |------|--------|--------|
//! | I    | 0      | 1      |
//! | II   | 0      | `b(x)` |
//! | III  | `a(x)` | `b(x)` |
//!
//! Coordinates are normalized so the first and last pixel of each axis sit at
//! -1 and +1.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::scalar::Real;
use crate::seed::derive_seed;

pub const DEFAULT_SIZE: usize = 256;
pub const DEFAULT_FRINGE_SCALE: f64 = 20.0;

/// Which components of the intensity model vary over the field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Case {
    /// No background, unit amplitude.
    #[serde(rename = "I", alias = "1")]
    I,
    /// No background, spatially varying amplitude.
    #[serde(rename = "II", alias = "2")]
    II,
    /// Varying background and amplitude.
    #[serde(rename = "III", alias = "3")]
    III,
}

impl Case {
    pub const ALL: [Case; 3] = [Case::I, Case::II, Case::III];

    pub fn has_background(self) -> bool {
        self == Case::III
    }

    pub fn has_varying_amplitude(self) -> bool {
        self != Case::I
    }

    pub fn index(self) -> u64 {
        match self {
            Case::I => 1,
            Case::II => 2,
            Case::III => 3,
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::I => "I",
            Case::II => "II",
            Case::III => "III",
        })
    }
}

impl FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "I" | "i" | "1" => Ok(Case::I),
            "II" | "ii" | "2" => Ok(Case::II),
            "III" | "iii" | "3" => Ok(Case::III),
            other => Err(Error::InvalidParameter(format!("unknown case '{other}' (expected I, II or III)"))),
        }
    }
}

/// Recipe for one synthetic pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub width: usize,
    pub height: usize,
    pub case: Case,
    /// Phase step between the frames, radians in (0, pi).
    pub delta: f64,
    /// Standard deviation of the additive Gaussian noise on each frame.
    pub sigma: f64,
    pub seed: u64,
    /// Strength of the quadratic phase term; sets the fringe density.
    pub fringe_scale: f64,
}

impl SynthSpec {
    pub fn new(case: Case, delta: f64, sigma: f64, seed: u64) -> Self {
        Self {
            width: DEFAULT_SIZE,
            height: DEFAULT_SIZE,
            case,
            delta,
            sigma,
            seed,
            fringe_scale: DEFAULT_FRINGE_SCALE,
        }
    }

    pub fn with_size(mut self, width: usize, height: usize) -> Self {
        self.width = width;
        self.height = height;
        self
    }

    pub fn with_fringe_scale(mut self, fringe_scale: f64) -> Self {
        self.fringe_scale = fringe_scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_dims(self.width, self.height)?;
        if !(self.delta > 0.0 && self.delta < std::f64::consts::PI) {
            return Err(Error::InvalidParameter(format!("delta {} outside (0, pi)", self.delta)));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma {} must be finite and >= 0", self.sigma)));
        }
        if !(self.fringe_scale > 0.0 && self.fringe_scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("fringe_scale {} must be > 0", self.fringe_scale)));
        }
        Ok(())
    }
}

/// Fields used to build a synthetic pair.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth<T> {
    pub phi: ScalarField<T>,
    pub a: ScalarField<T>,
    pub b: ScalarField<T>,
    pub delta: f64,
}

/// Two co-registered interferograms, `i1` at step 0 and `i2` at step delta.
#[derive(Debug, Clone, PartialEq)]
pub struct FringePair<T> {
    pub i1: ScalarField<T>,
    pub i2: ScalarField<T>,
    pub truth: Option<GroundTruth<T>>,
}

impl<T: Real> FringePair<T> {
    pub fn new(i1: ScalarField<T>, i2: ScalarField<T>) -> Result<Self> {
        i1.check_same_shape(&i2)?;
        Ok(Self { i1, i2, truth: None })
    }
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width < 2 || height < 2 {
        return Err(Error::InvalidParameter(format!("synthetic fields need width, height >= 2 (got {width}x{height})")));
    }
    Ok(())
}

/// Normalized coordinate of pixel `i` on an axis of `n` pixels, in [-1, 1].
#[inline]
pub fn normalized_coord<T: Real>(i: usize, n: usize) -> T {
    T::lit(-1.0) + T::lit(2.0) * T::from_count(i) / T::from_count(n - 1)
}

fn radial_field<T: Real>(width: usize, height: usize, f: impl Fn(T, T) -> T) -> Result<ScalarField<T>> {
    check_dims(width, height)?;
    Ok(ScalarField::from_fn(width, height, |c, r| f(normalized_coord(c, width), normalized_coord(r, height))))
}

/// Quadratic part of the test phase, `fringe_scale * (x^2 + y^2)`.
pub fn quadratic_phase<T: Real>(x: T, y: T, fringe_scale: T) -> T {
    fringe_scale * (x * x + y * y)
}

/// Off-center Gaussian bump that breaks the radial symmetry of the phase.
pub fn bump_phase<T: Real>(x: T, y: T) -> T {
    let dx = x - T::lit(0.3);
    let dy = y + T::lit(0.2);
    T::lit(3.0) * (-(dx * dx + dy * dy) / T::lit(0.18)).exp()
}

/// Smooth closed-fringe phase map.
pub fn phase_function<T: Real>(width: usize, height: usize, fringe_scale: T) -> Result<ScalarField<T>> {
    radial_field(width, height, |x, y| quadratic_phase(x, y, fringe_scale) + bump_phase(x, y))
}

/// Background `a(x) = 0.5 exp(-(x^2 + y^2) / 0.8)`.
pub fn background_function<T: Real>(width: usize, height: usize) -> Result<ScalarField<T>> {
    radial_field(width, height, |x: T, y: T| T::lit(0.5) * (-(x * x + y * y) / T::lit(0.8)).exp())
}

/// Modulation `b(x) = 0.2 + 0.8 exp(-(x^2 + y^2) / 1.2)`.
pub fn amplitude_function<T: Real>(width: usize, height: usize) -> Result<ScalarField<T>> {
    radial_field(width, height, |x: T, y: T| T::lit(0.2) + T::lit(0.8) * (-(x * x + y * y) / T::lit(1.2)).exp())
}

/// White Gaussian noise, `N(0, sigma^2)` i.i.d. per pixel.
///
/// Samples come from a ChaCha8 stream seeded with `stream_seed`, mapped to
/// normal variates by the ziggurat method (`rand_distr::StandardNormal`).
pub fn gaussian_noise<T: Real>(width: usize, height: usize, sigma: f64, stream_seed: u64) -> Result<ScalarField<T>> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise sigma {sigma} must be finite and >= 0")));
    }
    if width == 0 || height == 0 {
        return Err(Error::InvalidShape { width, height, len: 0 });
    }
    if sigma == 0.0 {
        return Ok(ScalarField::zeros(width, height));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed);
    let data = (0..width * height)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            T::lit(sigma * z)
        })
        .collect();
    ScalarField::new(width, height, data)
}

/// Seed of the noise stream for frame `k` (1-based) of a pair.
pub fn frame_seed(seed: u64, k: u64) -> u64 {
    derive_seed(seed, &[0x0066_7261_6d65, k])
}

/// Builds a pair per `spec`, with ground truth attached.
pub fn synthesize<T: Real>(spec: &SynthSpec) -> Result<FringePair<T>> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let phi = phase_function::<T>(w, h, T::lit(spec.fringe_scale))?;
    let a = if spec.case.has_background() { background_function(w, h)? } else { ScalarField::zeros(w, h) };
    let b = if spec.case.has_varying_amplitude() {
        amplitude_function(w, h)?
    } else {
        ScalarField::filled(w, h, T::one())
    };

    let delta = T::lit(spec.delta);
    let frame = |step: T, k: u64| -> Result<ScalarField<T>> {
        let noise = gaussian_noise::<T>(w, h, spec.sigma, frame_seed(spec.seed, k))?;
        let data = phi
            .data()
            .iter()
            .zip(a.data())
            .zip(b.data())
            .zip(noise.data())
            .map(|(((&p, &a), &b), &n)| a + b * (p + step).cos() + n)
            .collect();
        ScalarField::new(w, h, data)
    };
    let i1 = frame(T::zero(), 1)?;
    let i2 = frame(delta, 2)?;
    Ok(FringePair { i1, i2, truth: Some(GroundTruth { phi, a, b, delta: spec.delta }) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn center(f: &ScalarField<f64>) -> f64 {
        f.get(f.width() / 2, f.height() / 2)
    }

    #[test]
    fn phase_function_examples() {
        // odd size puts a pixel exactly at the origin
        let phi = phase_function::<f64>(65, 65, 20.0).unwrap();
        let expected = 3.0 * (-0.13f64 / 0.18).exp();
        assert!((center(&phi) - expected).abs() < 1e-12);
        assert!((expected - 1.457).abs() < 1e-3);

        let bump = phase_function::<f64>(64, 64, 0.0).unwrap();
        assert!(bump.max_value() < 3.0);
        assert!(bump.min_value() > 0.0);
    }

    #[test]
    fn quadratic_term_is_mirror_symmetric_bump_is_not() {
        let n = 33;
        let phi = phase_function::<f64>(n, n, 20.0).unwrap();
        let (c, r) = (5, 9);
        let mirrored = n - 1 - c;
        let quad = |c: usize, r: usize| {
            quadratic_phase(normalized_coord::<f64>(c, n), normalized_coord::<f64>(r, n), 20.0)
        };
        assert!((quad(c, r) - quad(mirrored, r)).abs() < 1e-12);
        let bump = |c: usize, r: usize| bump_phase(normalized_coord::<f64>(c, n), normalized_coord::<f64>(r, n));
        assert!((phi.get(c, r) - quad(c, r) - bump(c, r)).abs() < 1e-12);
        assert!((bump(c, r) - bump(mirrored, r)).abs() > 1e-6);
    }

    #[test]
    fn background_examples() {
        let a = background_function::<f64>(65, 65).unwrap();
        assert!((center(&a) - 0.5).abs() < 1e-15);
        assert!((a.get(0, 0) - 0.5 * (-2.5f64).exp()).abs() < 1e-15);
        assert!((a.get(0, 0) - 0.04104).abs() < 1e-5);
        assert!(a.data().iter().all(|&v| v > 0.0 && v <= 0.5));
    }

    #[test]
    fn amplitude_examples() {
        let b = amplitude_function::<f64>(65, 65).unwrap();
        assert!((center(&b) - 1.0).abs() < 1e-15);
        assert!((b.get(64, 0) - 0.3511).abs() < 1e-4);
        assert!(b.min_value() >= 0.2);
        assert!(b.max_value() <= 1.0);
    }

    #[test]
    fn rejects_tiny_fields() {
        assert!(phase_function::<f64>(1, 5, 20.0).is_err());
        assert!(background_function::<f64>(5, 1).is_err());
    }

    #[test]
    fn noise_examples() {
        let z = gaussian_noise::<f64>(16, 16, 0.0, 7).unwrap();
        assert!(z.data().iter().all(|&v| v == 0.0));

        let n = gaussian_noise::<f64>(256, 256, 1.0, 42).unwrap();
        let mean = n.mean();
        let std = (n.data().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n.len() - 1) as f64).sqrt();
        assert!(mean.abs() <= 0.02, "mean {mean}");
        assert!((0.99..=1.01).contains(&std), "std {std}");

        assert_eq!(gaussian_noise::<f64>(8, 8, 0.5, 3).unwrap(), gaussian_noise::<f64>(8, 8, 0.5, 3).unwrap());
        assert_ne!(gaussian_noise::<f64>(8, 8, 0.5, 3).unwrap(), gaussian_noise::<f64>(8, 8, 0.5, 4).unwrap());
        assert!(gaussian_noise::<f64>(8, 8, -0.1, 3).is_err());
    }

    #[test]
    fn case_one_noiseless() {
        let pair = synthesize::<f64>(&SynthSpec::new(Case::I, PI / 3.0, 0.0, 1)).unwrap();
        let truth = pair.truth.as_ref().unwrap();
        for (&i, &p) in pair.i1.data().iter().zip(truth.phi.data()) {
            assert_eq!(i, p.cos());
        }
        assert!(pair.i1.max_abs() <= 1.0);
    }

    #[test]
    fn case_one_step_pi_negates() {
        let spec = SynthSpec { delta: PI - 1e-15, ..SynthSpec::new(Case::I, 1.0, 0.0, 1) };
        // delta must lie strictly inside (0, pi); PI itself is rejected
        assert!(SynthSpec { delta: PI, ..spec.clone() }.validate().is_err());
        let pair = synthesize::<f64>(&spec).unwrap();
        for (&a, &b) in pair.i1.data().iter().zip(pair.i2.data()) {
            assert!((a + b).abs() < 1e-12);
        }
    }

    #[test]
    fn construction_identity_all_cases() {
        for case in Case::ALL {
            let spec = SynthSpec::new(case, 1.1, 0.0, 9).with_size(48, 40);
            let pair = synthesize::<f64>(&spec).unwrap();
            let t = pair.truth.unwrap();
            for idx in 0..pair.i1.len() {
                let (a, b, p) = (t.a.data()[idx], t.b.data()[idx], t.phi.data()[idx]);
                assert_eq!(pair.i1.data()[idx], a + b * p.cos());
                assert_eq!(pair.i2.data()[idx], a + b * (p + 1.1).cos());
            }
            let a_const = t.a.min_value() == t.a.max_value();
            let b_const = t.b.min_value() == t.b.max_value();
            match case {
                Case::I => {
                    assert!(t.a.data().iter().all(|&v| v == 0.0));
                    assert!(t.b.data().iter().all(|&v| v == 1.0));
                }
                Case::II => {
                    assert!(t.a.data().iter().all(|&v| v == 0.0));
                    assert!(!b_const);
                }
                Case::III => assert!(!a_const && !b_const),
            }
        }
    }

    #[test]
    fn synthesis_is_reproducible_and_frames_independent() {
        let spec = SynthSpec::new(Case::III, 1.0, 0.3, 77).with_size(32, 32);
        let p1 = synthesize::<f64>(&spec).unwrap();
        let p2 = synthesize::<f64>(&spec).unwrap();
        assert_eq!(p1, p2);
        let t = p1.truth.as_ref().unwrap();
        let eta1: Vec<f64> = (0..p1.i1.len())
            .map(|i| p1.i1.data()[i] - t.a.data()[i] - t.b.data()[i] * t.phi.data()[i].cos())
            .collect();
        let eta2: Vec<f64> = (0..p1.i2.len())
            .map(|i| p1.i2.data()[i] - t.a.data()[i] - t.b.data()[i] * (t.phi.data()[i] + 1.0).cos())
            .collect();
        assert!(eta1.iter().zip(&eta2).any(|(a, b)| (a - b).abs() > 1e-6));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let base = SynthSpec::new(Case::I, 1.0, 0.0, 0);
        assert!(synthesize::<f64>(&SynthSpec { delta: 0.0, ..base.clone() }).is_err());
        assert!(synthesize::<f64>(&SynthSpec { sigma: -1.0, ..base.clone() }).is_err());
        assert!(synthesize::<f64>(&SynthSpec { width: 1, ..base.clone() }).is_err());
        assert!(synthesize::<f64>(&SynthSpec { fringe_scale: 0.0, ..base }).is_err());
    }

    #[test]
    fn phase_span_at_default_density() {
        let phi = phase_function::<f64>(256, 256, 20.0).unwrap();
        let span = phi.max_value() - phi.min_value();
        // corners reach 20 * 2 = 40 rad, the minimum sits near the origin
        assert!(span > 6.0 * 2.0 * PI && span < 40.0, "span {span}");
    }

    #[test]
    fn case_parsing() {
        assert_eq!("II".parse::<Case>().unwrap(), Case::II);
        assert_eq!("3".parse::<Case>().unwrap(), Case::III);
        assert!("IV".parse::<Case>().is_err());
        assert_eq!(Case::III.to_string(), "III");
    }

    #[test]
    fn single_precision_synthesis() {
        let pair = synthesize::<f32>(&SynthSpec::new(Case::II, 1.0, 0.1, 5).with_size(16, 16)).unwrap();
        assert!(pair.i1.is_finite() && pair.i2.is_finite());
    }
}
