//! Two-dimensional real sample grids and the inner-product-space operations
//! the Gram-Schmidt pipeline is built from.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A `width x height` grid of real samples in row-major order.
///
/// Images are treated as vectors: all pixels carry equal weight in
/// [`inner_product`] and [`norm`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::InvalidShape { width, height, len: data.len() });
        }
        Ok(Self { width, height, data })
    }

    /// Builds a field from nested rows, top row first.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(width * height);
        for r in rows {
            let r = r.as_ref();
            if r.len() != width {
                return Err(Error::InvalidShape { width, height, len: data.len() + r.len() });
            }
            data.extend_from_slice(r);
        }
        Self::new(width, height, data)
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, T::zero())
    }

    pub fn filled(width: usize, height: usize, value: T) -> Self {
        assert!(width > 0 && height > 0, "field dimensions must be positive");
        Self { width, height, data: vec![value; width * height] }
    }

    /// Evaluates `f(column, row)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(width > 0 && height > 0, "field dimensions must be positive");
        let mut data = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                data.push(f(col, row));
            }
        }
        Self { width, height, data }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> T {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, col: usize, row: usize, value: T) {
        self.data[row * self.width + col] = value;
    }

    pub fn same_shape<U>(&self, other: &ScalarField<U>) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn check_same_shape<U>(&self, other: &ScalarField<U>) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left_w: self.width,
                left_h: self.height,
                right_w: other.width,
                right_h: other.height,
            })
        }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { width: self.width, height: self.height, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    /// Pixelwise combination of two equally sized fields.
    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { width: self.width, height: self.height, data })
    }

    pub fn scaled(&self, c: T) -> Self {
        self.map(|v| v * c)
    }

    pub fn sum(&self) -> T {
        pairwise_sum(&self.data)
    }

    pub fn mean(&self) -> T {
        self.sum() / T::from_count(self.len())
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> T {
        self.data.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max_value(&self) -> T {
        self.data.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Converts every sample to another scalar type.
    pub fn cast<U: Real>(&self) -> ScalarField<U> {
        ScalarField {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| U::lit(v.to_f64_lossy())).collect(),
        }
    }

    /// Copies the sub-rectangle starting at `(col0, row0)`.
    pub fn crop(&self, col0: usize, row0: usize, width: usize, height: usize) -> Self {
        assert!(col0 + width <= self.width && row0 + height <= self.height, "crop out of bounds");
        Self::from_fn(width, height, |c, r| self.get(col0 + c, row0 + r))
    }

    /// The central window covering `fraction` of each axis.
    pub fn central(&self, fraction: f64) -> Self {
        let (c0, w) = central_span(self.width, fraction);
        let (r0, h) = central_span(self.height, fraction);
        self.crop(c0, r0, w, h)
    }
}

fn central_span(n: usize, fraction: f64) -> (usize, usize) {
    let keep = ((n as f64) * fraction.clamp(0.0, 1.0)).round().max(1.0) as usize;
    let keep = keep.min(n);
    ((n - keep) / 2, keep)
}

// Below this length sums are accumulated sequentially.
const PAIRWISE_BLOCK: usize = 128;

/// Deterministic pairwise summation.
pub(crate) fn pairwise_sum<T: Real>(v: &[T]) -> T {
    if v.len() <= PAIRWISE_BLOCK {
        v.iter().fold(T::zero(), |acc, &x| acc + x)
    } else {
        let mid = v.len() / 2;
        pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
    }
}

fn pairwise_dot<T: Real>(a: &[T], b: &[T]) -> T {
    if a.len() <= PAIRWISE_BLOCK {
        a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
    } else {
        let mid = a.len() / 2;
        pairwise_dot(&a[..mid], &b[..mid]) + pairwise_dot(&a[mid..], &b[mid..])
    }
}

/// `<f, g>`: sum over all pixels of `f(x) g(x)`.
pub fn inner_product<T: Real>(f: &ScalarField<T>, g: &ScalarField<T>) -> Result<T> {
    f.check_same_shape(g)?;
    Ok(pairwise_dot(&f.data, &g.data))
}

/// Euclidean norm `sqrt(<f, f>)`.
pub fn norm<T: Real>(f: &ScalarField<T>) -> T {
    pairwise_dot(&f.data, &f.data).sqrt()
}

/// `alpha f + beta g`, pixelwise.
pub fn scale_add<T: Real>(f: &ScalarField<T>, alpha: T, g: &ScalarField<T>, beta: T) -> Result<ScalarField<T>> {
    f.zip_map(g, |a, b| alpha * a + beta * b)
}
