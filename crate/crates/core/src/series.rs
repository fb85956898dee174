//! Truncated complex power series `c_0 + c_1 z + … + c_M z^M`.
//!
//! Every operation keeps the truncation order of its inputs (the smaller one
//! for binary operations) and never reads coefficients beyond it.

use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::scalar::{cplx, Cplx, Scalar};

pub const DEFAULT_ORDER: usize = 32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("logarithm of a series with vanishing constant term")]
    LogOfZero,
    #[error("division by a series with vanishing constant term")]
    DivisionByZero,
    #[error("composition needs an inner series with zero constant term (got {0})")]
    ComposeConstant(String),
    #[error("series order {0} is out of range")]
    BadOrder(usize),
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Numerical(String),
    #[error("series JSON: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries<T> {
    coeffs: Vec<Cplx<T>>,
}

impl<T: Scalar> PowerSeries<T> {
    /// Series of the given order from leading coefficients; missing ones are
    /// zero and extra ones are dropped.
    pub fn new(coeffs: impl IntoIterator<Item = Cplx<T>>, order: usize) -> Self {
        let mut c: Vec<Cplx<T>> = coeffs.into_iter().take(order + 1).collect();
        c.resize(order + 1, Cplx::new(T::zero(), T::zero()));
        Self { coeffs: c }
    }

    pub fn from_real(coeffs: &[T], order: usize) -> Self {
        Self::new(coeffs.iter().map(|&x| cplx(x, T::zero())), order)
    }

    pub fn zero(order: usize) -> Self {
        Self::new([], order)
    }

    pub fn constant(c: Cplx<T>, order: usize) -> Self {
        Self::new([c], order)
    }

    /// The coordinate `z` itself.
    pub fn identity(order: usize) -> Self {
        Self::new([Cplx::new(T::zero(), T::zero()), Cplx::new(T::one(), T::zero())], order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Cplx<T>] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> Cplx<T> {
        self.coeffs.get(n).copied().unwrap_or_else(Cplx::default)
    }

    pub fn set_coeff(&mut self, n: usize, c: Cplx<T>) {
        if n <= self.order() {
            self.coeffs[n] = c;
        }
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self::new(self.coeffs.iter().copied(), order)
    }

    pub fn scale(&self, c: Cplx<T>) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|x| *x * c).collect(),
        }
    }

    /// Multiplies by `z^k`, dropping terms beyond the order.
    pub fn shift_up(&self, k: usize) -> Self {
        let zero = Cplx::new(T::zero(), T::zero());
        Self::new(
            std::iter::repeat_n(zero, k).chain(self.coeffs.iter().copied()),
            self.order(),
        )
    }

    /// Divides by `z^k`; the result has order `M − k`. The caller guarantees
    /// the first `k` coefficients vanish; they are discarded.
    pub fn shift_down(&self, k: usize) -> Self {
        let order = self.order().saturating_sub(k);
        Self::new(self.coeffs.iter().copied().skip(k), order)
    }

    /// `z · d/dz`, exact to the full order.
    pub fn euler_derivative(&self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(n, c)| *c * T::from_usize_lossy(n))
                .collect(),
        }
    }

    /// `d/dz`; the top coefficient is unknown after differentiation and is
    /// set to zero.
    pub fn derivative(&self) -> Self {
        let m = self.order();
        Self::new(
            (1..=m).map(|n| self.coeffs[n] * T::from_usize_lossy(n)),
            m,
        )
    }

    /// Antiderivative with zero constant term.
    pub fn integral(&self) -> Self {
        let zero = Cplx::new(T::zero(), T::zero());
        Self::new(
            std::iter::once(zero).chain(
                self.coeffs
                    .iter()
                    .enumerate()
                    .map(|(n, c)| *c / T::from_usize_lossy(n + 1)),
            ),
            self.order(),
        )
    }

    pub fn eval(&self, z: Cplx<T>) -> Cplx<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Cplx::new(T::zero(), T::zero()), |acc, c| acc * z + *c)
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.norm()))
    }

    pub fn recip(&self) -> Result<Self, SeriesError> {
        let c0 = self.coeffs[0];
        if c0.norm() == T::zero() {
            return Err(SeriesError::DivisionByZero);
        }
        let inv0 = c0.inv();
        let m = self.order();
        let mut out = vec![Cplx::new(T::zero(), T::zero()); m + 1];
        out[0] = inv0;
        for n in 1..=m {
            let mut s = Cplx::new(T::zero(), T::zero());
            for k in 1..=n {
                s += self.coeffs[k] * out[n - k];
            }
            out[n] = -s * inv0;
        }
        Ok(Self { coeffs: out })
    }

    pub fn div(&self, other: &Self) -> Result<Self, SeriesError> {
        Ok(self * &other.recip()?)
    }

    /// `exp(s)` via `n g_n = Σ_{k=1}^{n} k s_k g_{n−k}`.
    pub fn exp(&self) -> Self {
        let m = self.order();
        let mut g = vec![Cplx::new(T::zero(), T::zero()); m + 1];
        g[0] = self.coeffs[0].exp();
        for n in 1..=m {
            let mut s = Cplx::new(T::zero(), T::zero());
            for k in 1..=n {
                s += self.coeffs[k] * g[n - k] * T::from_usize_lossy(k);
            }
            g[n] = s / T::from_usize_lossy(n);
        }
        Self { coeffs: g }
    }

    /// Principal-branch logarithm; the constant term is `ln s_0`.
    pub fn log(&self) -> Result<Self, SeriesError> {
        let s0 = self.coeffs[0];
        if s0.norm() == T::zero() {
            return Err(SeriesError::LogOfZero);
        }
        let m = self.order();
        let mut g = vec![Cplx::new(T::zero(), T::zero()); m + 1];
        g[0] = s0.ln();
        // s g' = s'  ⇒  n s_0 g_n = n s_n − Σ_{k=1}^{n−1} k g_k s_{n−k}
        for n in 1..=m {
            let mut acc = self.coeffs[n] * T::from_usize_lossy(n);
            for k in 1..n {
                acc -= g[k] * self.coeffs[n - k] * T::from_usize_lossy(k);
            }
            g[n] = acc / (s0 * T::from_usize_lossy(n));
        }
        Ok(Self { coeffs: g })
    }

    /// `s^p = exp(p · log s)` on the principal branch.
    pub fn powc(&self, p: Cplx<T>) -> Result<Self, SeriesError> {
        Ok(self.log()?.scale(p).exp())
    }

    pub fn powf(&self, p: T) -> Result<Self, SeriesError> {
        self.powc(cplx(p, T::zero()))
    }

    /// `self ∘ inner`, for `inner(0) = 0`.
    pub fn compose(&self, inner: &Self) -> Result<Self, SeriesError> {
        if inner.coeffs[0].norm() != T::zero() {
            return Err(SeriesError::ComposeConstant(format!("{}", inner.coeffs[0])));
        }
        let m = self.order().min(inner.order());
        let inner = inner.truncate(m);
        let mut acc = Self::constant(self.coeffs[m], m);
        for k in (0..m).rev() {
            acc = &acc * &inner;
            acc.coeffs[0] += self.coeffs[k];
        }
        Ok(acc)
    }

    /// Same coefficients in another scalar type, rounded through `f64`.
    pub fn cast<U: Scalar>(&self) -> PowerSeries<U> {
        PowerSeries::new(
            self.coeffs
                .iter()
                .map(|c| Cplx::new(U::lit(c.re.to_f64_lossy()), U::lit(c.im.to_f64_lossy()))),
            self.order(),
        )
    }

    /// `[[re, im], …]`.
    pub fn to_pairs(&self) -> Vec<[f64; 2]> {
        self.coeffs
            .iter()
            .map(|c| [c.re.to_f64_lossy(), c.im.to_f64_lossy()])
            .collect()
    }

    /// Parses a JSON array of `[re, im]` pairs (bare numbers are real).
    pub fn from_json(text: &str, order: usize) -> Result<Self, SeriesError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| SeriesError::Format(e.to_string()))?;
        let coeffs = parse_complex_list::<T>(&value).map_err(SeriesError::Format)?;
        Ok(Self::new(coeffs, order))
    }
}

/// Reads `[c0, c1, …]` where each entry is a number or a `[re, im]` pair.
pub fn parse_complex_list<T: Scalar>(value: &serde_json::Value) -> Result<Vec<Cplx<T>>, String> {
    let arr = value
        .as_array()
        .ok_or_else(|| "expected an array of coefficients".to_string())?;
    arr.iter()
        .enumerate()
        .map(|(i, v)| {
            if let Some(x) = v.as_f64() {
                return Ok(cplx(T::lit(x), T::zero()));
            }
            match v.as_array().map(|p| p.as_slice()) {
                Some([re, im]) => match (re.as_f64(), im.as_f64()) {
                    (Some(re), Some(im)) => Ok(cplx(T::lit(re), T::lit(im))),
                    _ => Err(format!("coefficient {i}: pair entries must be numbers")),
                },
                _ => Err(format!("coefficient {i}: expected a number or [re, im]")),
            }
        })
        .collect()
}

impl<T: Scalar> Add for &PowerSeries<T> {
    type Output = PowerSeries<T>;
    fn add(self, rhs: Self) -> PowerSeries<T> {
        let m = self.order().min(rhs.order());
        PowerSeries::new((0..=m).map(|n| self.coeffs[n] + rhs.coeffs[n]), m)
    }
}

impl<T: Scalar> Sub for &PowerSeries<T> {
    type Output = PowerSeries<T>;
    fn sub(self, rhs: Self) -> PowerSeries<T> {
        let m = self.order().min(rhs.order());
        PowerSeries::new((0..=m).map(|n| self.coeffs[n] - rhs.coeffs[n]), m)
    }
}

impl<T: Scalar> Neg for &PowerSeries<T> {
    type Output = PowerSeries<T>;
    fn neg(self) -> PowerSeries<T> {
        PowerSeries {
            coeffs: self.coeffs.iter().map(|c| -*c).collect(),
        }
    }
}

impl<T: Scalar> Mul for &PowerSeries<T> {
    type Output = PowerSeries<T>;
    fn mul(self, rhs: Self) -> PowerSeries<T> {
        let m = self.order().min(rhs.order());
        let mut out = vec![Cplx::new(T::zero(), T::zero()); m + 1];
        for (i, a) in self.coeffs.iter().take(m + 1).enumerate() {
            if a.norm_sqr() == T::zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().take(m + 1 - i).enumerate() {
                out[i + j] += *a * *b;
            }
        }
        PowerSeries { coeffs: out }
    }
}
