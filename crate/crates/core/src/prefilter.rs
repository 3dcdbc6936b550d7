//! Fringe normalization ahead of the step estimators.
//!
//! Both backends first strip the low-frequency background with a radial
//! spectral high-pass, then taper the borders with a raised cosine so the
//! periodic transforms do not wrap discontinuities around the edges.
//!
//! * [`isotropic_normalize`] builds a quadrature signal with the spiral-phase
//!   (vortex) transform and divides by the local amplitude.
//! * [`gabor_filter_bank`] runs a bank of analytic Gabor filters, keeps the
//!   strongest response per pixel and returns its unit-modulus real part.

use std::fmt;
use std::str::FromStr;

use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::scalar::Real;
use crate::spectral::{dft2_forward, dft2_inverse, dft2_inverse_real, frequencies, Spectrum};

/// Default high-pass cutoff, cycles/pixel. The synthetic background has a
/// spectral width around 0.002 cycles/pixel on a 256-pixel field.
pub const DEFAULT_BACKGROUND_CUTOFF: f64 = 0.01;

/// Default border taper width as a fraction of each axis.
pub const DEFAULT_TAPER_FRACTION: f64 = 0.1;

/// Pixels whose strongest bank response is below this fraction of the global
/// maximum are set to zero.
pub const GFB_RESPONSE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Prefilter {
    #[default]
    None,
    Isotropic,
    Gfb,
}

impl fmt::Display for Prefilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Prefilter::None => "none",
            Prefilter::Isotropic => "isotropic",
            Prefilter::Gfb => "gfb",
        })
    }
}

impl FromStr for Prefilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(Prefilter::None),
            "isotropic" | "iso" => Ok(Prefilter::Isotropic),
            "gfb" | "gabor" => Ok(Prefilter::Gfb),
            other => Err(Error::InvalidParameter(format!("unknown prefilter '{other}' (expected none, isotropic or gfb)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IsotropicParams {
    pub cutoff: f64,
    pub taper: f64,
    /// Amplitude floor relative to the maximum amplitude.
    pub floor_ratio: f64,
}

impl Default for IsotropicParams {
    fn default() -> Self {
        Self { cutoff: DEFAULT_BACKGROUND_CUTOFF, taper: DEFAULT_TAPER_FRACTION, floor_ratio: 1e-3 }
    }
}

/// Gabor bank layout: `n_orientations` evenly spaced in `[0, pi)` times
/// `n_frequencies` geometrically spaced in `[freq_min, freq_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GfbParams {
    pub n_orientations: usize,
    pub n_frequencies: usize,
    /// Cycles/pixel.
    pub freq_min: f64,
    /// Cycles/pixel, at most 0.5.
    pub freq_max: f64,
    /// Half-magnitude bandwidth of each filter in octaves.
    pub bandwidth: f64,
    pub cutoff: f64,
    pub taper: f64,
}

impl Default for GfbParams {
    fn default() -> Self {
        Self {
            n_orientations: 8,
            n_frequencies: 5,
            freq_min: 0.02,
            freq_max: 0.25,
            bandwidth: 2.0,
            cutoff: DEFAULT_BACKGROUND_CUTOFF,
            taper: DEFAULT_TAPER_FRACTION,
        }
    }
}

impl GfbParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_orientations == 0 || self.n_frequencies == 0 {
            return Err(Error::Empty("gabor filter bank"));
        }
        if self.n_orientations < 2 {
            return Err(Error::InvalidParameter("gabor bank needs at least 2 orientations".into()));
        }
        if !(self.freq_min > 0.0 && self.freq_min < self.freq_max && self.freq_max <= 0.5) {
            return Err(Error::InvalidParameter(format!(
                "gabor frequencies must satisfy 0 < freq_min < freq_max <= 0.5 (got {}, {})",
                self.freq_min, self.freq_max
            )));
        }
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(Error::InvalidParameter(format!("gabor bandwidth {} must be > 0", self.bandwidth)));
        }
        check_cutoff(self.cutoff)?;
        check_taper(self.taper)
    }

    /// Center frequencies, geometric from `freq_min` to `freq_max`.
    pub fn center_frequencies(&self) -> Vec<f64> {
        if self.n_frequencies == 1 {
            return vec![self.freq_min];
        }
        let ratio = (self.freq_max / self.freq_min).powf(1.0 / (self.n_frequencies - 1) as f64);
        (0..self.n_frequencies).map(|k| self.freq_min * ratio.powi(k as i32)).collect()
    }

    pub fn orientations(&self) -> Vec<f64> {
        (0..self.n_orientations).map(|k| std::f64::consts::PI * k as f64 / self.n_orientations as f64).collect()
    }

    /// Radial standard deviation of the spectral envelope for center `f0`.
    ///
    /// Half-magnitude points sit at `f0 (1 +- r)` with `r = (2^B - 1)/(2^B + 1)`
    /// so that their ratio spans `B` octaves.
    pub fn spectral_sigma(&self, f0: f64) -> f64 {
        let r = (2f64.powf(self.bandwidth) - 1.0) / (2f64.powf(self.bandwidth) + 1.0);
        f0 * r / (2.0 * std::f64::consts::LN_2).sqrt()
    }
}

/// Parameters for every backend, passed around as one value.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PrefilterConfig {
    pub isotropic: IsotropicParams,
    pub gfb: GfbParams,
}

impl Prefilter {
    pub fn apply<T: Real>(self, i: &ScalarField<T>, config: &PrefilterConfig) -> Result<ScalarField<T>> {
        match self {
            Prefilter::None => Ok(i.clone()),
            Prefilter::Isotropic => isotropic_normalize_with(i, &config.isotropic),
            Prefilter::Gfb => gabor_filter_bank(i, &config.gfb),
        }
    }
}

fn check_cutoff(cutoff: f64) -> Result<()> {
    if !(cutoff > 0.0 && cutoff < 0.5) {
        return Err(Error::InvalidParameter(format!("cutoff {cutoff} outside (0, 0.5)")));
    }
    Ok(())
}

fn check_taper(taper: f64) -> Result<()> {
    if !(0.0..0.5).contains(&taper) {
        return Err(Error::InvalidParameter(format!("taper fraction {taper} outside [0, 0.5)")));
    }
    Ok(())
}

fn check_input<T: Real>(i: &ScalarField<T>) -> Result<()> {
    if i.width() < 2 || i.height() < 2 {
        return Err(Error::InvalidParameter(format!("prefilters need width, height >= 2 (got {}x{})", i.width(), i.height())));
    }
    if !i.is_finite() {
        return Err(Error::NonFinite("prefilter input"));
    }
    Ok(())
}

/// Radial high-pass: every spectral bin with `sqrt(fx^2 + fy^2) < cutoff` is
/// zeroed, including DC. The mask is binary, so the operation is a projection.
pub fn remove_background<T: Real>(i: &ScalarField<T>, cutoff: f64) -> Result<ScalarField<T>> {
    check_cutoff(cutoff)?;
    check_input(i)?;
    let c2 = T::lit(cutoff * cutoff);
    let s = dft2_forward(i).filtered(|fx, fy| if fx * fx + fy * fy < c2 { T::zero() } else { T::one() });
    Ok(dft2_inverse_real(&s))
}

fn taper_profile(n: usize, fraction: f64) -> Vec<f64> {
    let m = ((n as f64) * fraction).round() as usize;
    let mut w = vec![1.0; n];
    if m == 0 || 2 * m > n {
        return w;
    }
    for k in 0..m {
        let v = 0.5 - 0.5 * (std::f64::consts::PI * (k as f64 + 0.5) / m as f64).cos();
        w[k] = v;
        w[n - 1 - k] = v;
    }
    w
}

/// Separable raised-cosine window rising over `fraction` of each axis.
pub fn border_taper<T: Real>(width: usize, height: usize, fraction: f64) -> ScalarField<T> {
    let wx = taper_profile(width, fraction);
    let wy = taper_profile(height, fraction);
    ScalarField::from_fn(width, height, |c, r| T::lit(wx[c] * wy[r]))
}

fn high_pass_tapered<T: Real>(i: &ScalarField<T>, cutoff: f64, taper: f64) -> Result<ScalarField<T>> {
    check_taper(taper)?;
    let h = remove_background(i, cutoff)?;
    if taper == 0.0 {
        return Ok(h);
    }
    h.zip_map(&border_taper(i.width(), i.height(), taper), |a, b| a * b)
}

fn is_constant<T: Real>(i: &ScalarField<T>) -> bool {
    i.max_value() - i.min_value() <= T::zero()
}

/// Isotropic normalization with default parameters.
pub fn isotropic_normalize<T: Real>(i: &ScalarField<T>) -> Result<ScalarField<T>> {
    isotropic_normalize_with(i, &IsotropicParams::default())
}

/// Spiral-phase quadrature normalization.
///
/// `q = IDFT(exp(i theta(f)) DFT(h))` with `theta` the polar angle of the
/// frequency vector; `A = sqrt(h^2 + |q|^2)`; output `h / max(A, floor)`.
pub fn isotropic_normalize_with<T: Real>(i: &ScalarField<T>, p: &IsotropicParams) -> Result<ScalarField<T>> {
    check_input(i)?;
    if is_constant(i) {
        return Err(Error::ConstantInput);
    }
    let h = high_pass_tapered(i, p.cutoff, p.taper)?;
    let mut s = dft2_forward(&h);
    s.apply(|fx, fy| {
        if fx == T::zero() && fy == T::zero() {
            Complex::new(T::zero(), T::zero())
        } else {
            let r = (fx * fx + fy * fy).sqrt();
            Complex::new(fx / r, fy / r)
        }
    });
    let q = dft2_inverse(&s);
    let amp: Vec<T> = h.data().iter().zip(&q).map(|(&hv, qv)| (hv * hv + qv.norm_sqr()).sqrt()).collect();
    let max_amp = amp.iter().copied().fold(T::zero(), T::max);
    if !(max_amp > T::zero()) {
        return Err(Error::ConstantInput);
    }
    let floor = T::lit(p.floor_ratio) * max_amp;
    let data = h.data().iter().zip(&amp).map(|(&hv, &a)| hv / a.max(floor)).collect();
    ScalarField::new(i.width(), i.height(), data)
}

/// Unit-energy spectral gain of one analytic Gabor filter.
fn gabor_gain<T: Real>(fxs: &[T], fys: &[T], f0: f64, theta: f64, sigma_f: f64) -> Vec<T> {
    let (u0, v0) = (f0 * theta.cos(), f0 * theta.sin());
    let inv = 1.0 / (2.0 * sigma_f * sigma_f);
    let mut g: Vec<f64> = Vec::with_capacity(fxs.len() * fys.len());
    for &fy in fys {
        let dy = fy.to_f64_lossy() - v0;
        for &fx in fxs {
            let dx = fx.to_f64_lossy() - u0;
            g.push((-(dx * dx + dy * dy) * inv).exp());
        }
    }
    let energy = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    g.into_iter().map(|v| T::lit(v / energy)).collect()
}

/// Max-response Gabor filter bank normalization.
///
/// Each filter is a Gaussian bump in the frequency domain centered on
/// `f0 (cos theta, sin theta)`, scaled to unit energy so that white noise
/// excites every filter equally. The output is `Re(g / |g|)` for the response
/// `g` of largest magnitude at each pixel.
pub fn gabor_filter_bank<T: Real>(i: &ScalarField<T>, p: &GfbParams) -> Result<ScalarField<T>> {
    p.validate()?;
    check_input(i)?;
    let h = high_pass_tapered(i, p.cutoff, p.taper)?;
    let spectrum: Spectrum<T> = dft2_forward(&h);
    let fxs = frequencies::<T>(i.width());
    let fys = frequencies::<T>(i.height());

    let n = i.len();
    let mut best = vec![Complex::new(T::zero(), T::zero()); n];
    let mut best_mag = vec![T::zero(); n];
    for f0 in p.center_frequencies() {
        let sigma_f = p.spectral_sigma(f0);
        for theta in p.orientations() {
            let gain = gabor_gain(&fxs, &fys, f0, theta, sigma_f);
            let response = dft2_inverse(&spectrum.multiplied(&gain));
            for ((b, m), g) in best.iter_mut().zip(best_mag.iter_mut()).zip(response) {
                let mag = g.norm();
                if mag > *m {
                    *m = mag;
                    *b = g;
                }
            }
        }
    }

    let global = best_mag.iter().copied().fold(T::zero(), T::max);
    let floor = T::lit(GFB_RESPONSE_FLOOR) * global;
    let data = best
        .iter()
        .zip(&best_mag)
        .map(|(g, &m)| if m > floor && m > T::zero() { g.re / m } else { T::zero() })
        .collect();
    ScalarField::new(i.width(), i.height(), data)
}
