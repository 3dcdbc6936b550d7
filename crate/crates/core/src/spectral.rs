//! 2D discrete Fourier transforms on [`ScalarField`]s.
//!
//! The forward transform is unnormalized; the inverse carries the `1/(W H)`
//! factor, so `inverse(forward(f)) == f` and
//! `sum |f|^2 == sum |F|^2 / (W H)`.

use rustfft::num_complex::Complex;
use rustfft::{FftDirection, FftPlanner};

use crate::field::ScalarField;
use crate::scalar::Real;

/// Frequency-domain samples in row-major order, DC at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    width: usize,
    height: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> Spectrum<T> {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    /// Multiplies every bin by `gain(fx, fy)`, frequencies in cycles/pixel.
    pub fn apply(&mut self, gain: impl Fn(T, T) -> Complex<T>) {
        let fxs = frequencies::<T>(self.width);
        let fys = frequencies::<T>(self.height);
        for (row, &fy) in fys.iter().enumerate() {
            for (col, &fx) in fxs.iter().enumerate() {
                let v = &mut self.data[row * self.width + col];
                *v = *v * gain(fx, fy);
            }
        }
    }

    /// Product with a real gain.
    pub fn filtered(&self, gain: impl Fn(T, T) -> T) -> Self {
        let mut out = self.clone();
        out.apply(|fx, fy| Complex::new(gain(fx, fy), T::zero()));
        out
    }

    /// Bin-by-bin product with a precomputed gain table of the same shape.
    pub fn multiplied(&self, gain: &[T]) -> Self {
        assert_eq!(gain.len(), self.data.len(), "gain table shape");
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().zip(gain).map(|(&v, &g)| v * g).collect(),
        }
    }
}

/// `fftfreq`-style bin frequencies in cycles/sample: `0, 1/n, ..., -1/n`.
pub fn frequencies<T: Real>(n: usize) -> Vec<T> {
    let nf = T::from_count(n);
    (0..n)
        .map(|k| {
            let k = if k <= (n - 1) / 2 { k as f64 } else { k as f64 - n as f64 };
            T::lit(k) / nf
        })
        .collect()
}

fn transform_2d<T: Real>(width: usize, height: usize, buf: &mut [Complex<T>], direction: FftDirection) {
    let mut planner = FftPlanner::<T>::new();
    let row_fft = planner.plan_fft(width, direction);
    let mut scratch = vec![Complex::default(); row_fft.get_inplace_scratch_len()];
    for row in buf.chunks_exact_mut(width) {
        row_fft.process_with_scratch(row, &mut scratch);
    }

    let col_fft = planner.plan_fft(height, direction);
    scratch.resize(col_fft.get_inplace_scratch_len(), Complex::default());
    let mut column = vec![Complex::default(); height];
    for col in 0..width {
        for (row, v) in column.iter_mut().enumerate() {
            *v = buf[row * width + col];
        }
        col_fft.process_with_scratch(&mut column, &mut scratch);
        for (row, v) in column.iter().enumerate() {
            buf[row * width + col] = *v;
        }
    }
}

pub fn dft2_forward<T: Real>(f: &ScalarField<T>) -> Spectrum<T> {
    let mut data: Vec<Complex<T>> = f.data().iter().map(|&v| Complex::new(v, T::zero())).collect();
    transform_2d(f.width(), f.height(), &mut data, FftDirection::Forward);
    Spectrum { width: f.width(), height: f.height(), data }
}

pub fn dft2_forward_complex<T: Real>(width: usize, height: usize, mut data: Vec<Complex<T>>) -> Spectrum<T> {
    assert_eq!(data.len(), width * height, "complex field shape");
    transform_2d(width, height, &mut data, FftDirection::Forward);
    Spectrum { width, height, data }
}

/// Normalized inverse transform; returns the complex field.
pub fn dft2_inverse<T: Real>(s: &Spectrum<T>) -> Vec<Complex<T>> {
    let mut data = s.data.clone();
    transform_2d(s.width, s.height, &mut data, FftDirection::Inverse);
    let scale = T::from_count(s.width * s.height).recip();
    for v in &mut data {
        *v = *v * scale;
    }
    data
}

/// Real part of the normalized inverse transform.
pub fn dft2_inverse_real<T: Real>(s: &Spectrum<T>) -> ScalarField<T> {
    let data = dft2_inverse(s).into_iter().map(|c| c.re).collect();
    ScalarField::new(s.width, s.height, data).expect("spectrum shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(w: usize, h: usize, seed: u64) -> ScalarField<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ScalarField::from_fn(w, h, |_, _| rng.random_range(-1.0..1.0))
    }

    /// Direct O(N^2) DFT used as an independent reference.
    fn naive_dft(f: &ScalarField<f64>) -> Vec<Complex<f64>> {
        let (w, h) = (f.width(), f.height());
        let mut out = vec![Complex::new(0.0, 0.0); w * h];
        for v in 0..h {
            for u in 0..w {
                let mut acc = Complex::new(0.0, 0.0);
                for y in 0..h {
                    for x in 0..w {
                        let ang = -2.0 * std::f64::consts::PI * (u as f64 * x as f64 / w as f64 + v as f64 * y as f64 / h as f64);
                        acc += Complex::from_polar(f.get(x, y), ang);
                    }
                }
                out[v * w + u] = acc;
            }
        }
        out
    }

    #[test]
    fn impulse_has_flat_spectrum() {
        let mut f = ScalarField::<f64>::zeros(8, 6);
        f.set(0, 0, 1.0);
        let s = dft2_forward(&f);
        for c in s.data() {
            assert!((c.re - 1.0).abs() < 1e-15 && c.im.abs() < 1e-15);
        }
    }

    #[test]
    fn matches_direct_dft() {
        let f = random_field(6, 5, 1);
        let s = dft2_forward(&f);
        for (a, b) in s.data().iter().zip(naive_dft(&f)) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        for (w, h, seed) in [(32, 32, 2), (30, 17, 3), (256, 256, 4)] {
            let f = random_field(w, h, seed);
            let s = dft2_forward(&f);
            let back = dft2_inverse(&s);
            let err = f.data().iter().zip(&back).map(|(a, b)| (a - b.re).abs().max(b.im.abs())).fold(0.0, f64::max);
            assert!(err <= 1e-10, "round trip {err}");

            let energy: f64 = f.data().iter().map(|v| v * v).sum();
            let spec: f64 = s.data().iter().map(|c| c.norm_sqr()).sum::<f64>() / (w * h) as f64;
            assert!((energy - spec).abs() <= 1e-8 * energy);
        }
    }

    #[test]
    fn frequency_layout() {
        assert_eq!(frequencies::<f64>(4), vec![0.0, 0.25, -0.5, -0.25]);
        assert_eq!(frequencies::<f64>(5), vec![0.0, 0.2, 0.4, -0.4, -0.2]);
    }
}
