//! Radial cutoff functions and the flux of `Δ(φ log r)`.
//!
//! The bump `φ` is `1` on `[0, ε/4]`, `0` on `[ε/2, ∞)` and in between the
//! smooth step `1 − S(x)` with `x = (r − ε/4)/(ε/4)` and
//! `S(x) = 1/(1 + exp(k (1/x − 1/(1−x))))`. With `k = 1` this is the usual
//! `e^{−1/x}` interpolation; other steepness values give different but
//! equally valid profiles.

use thiserror::Error;

use crate::quadrature::{integrate, QuadratureFailure};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CutoffError {
    #[error("cutoff radius must be positive and finite, got {0}")]
    BadEpsilon(f64),
    #[error("steepness must be positive and finite, got {0}")]
    BadSteepness(f64),
    #[error("quadrature did not converge (estimate {estimate:e}, error bound {error_bound:e})")]
    Quadrature { estimate: f64, error_bound: f64 },
}

impl From<QuadratureFailure> for CutoffError {
    fn from(f: QuadratureFailure) -> Self {
        CutoffError::Quadrature {
            estimate: f.estimate,
            error_bound: f.error_bound,
        }
    }
}

/// Absolute tolerance handed to the adaptive quadrature, per unit of `|θ|`.
pub const QUADRATURE_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffProfile<T> {
    epsilon: T,
    steepness: T,
}

impl<T: Scalar> CutoffProfile<T> {
    pub fn new(epsilon: T) -> Result<Self, CutoffError> {
        Self::with_steepness(epsilon, T::one())
    }

    pub fn with_steepness(epsilon: T, steepness: T) -> Result<Self, CutoffError> {
        if !(epsilon > T::zero() && epsilon.is_finite()) {
            return Err(CutoffError::BadEpsilon(epsilon.to_f64_lossy()));
        }
        if !(steepness > T::zero() && steepness.is_finite()) {
            return Err(CutoffError::BadSteepness(steepness.to_f64_lossy()));
        }
        Ok(CutoffProfile { epsilon, steepness })
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn steepness(&self) -> T {
        self.steepness
    }

    /// Inner and outer radius of the transition annulus.
    pub fn transition(&self) -> (T, T) {
        let q = self.epsilon * T::lit(0.25);
        (q, q + q)
    }

    /// `(S, S', S'')` in the variable `x`, or `None` outside `(0, 1)`.
    fn step(&self, x: T) -> Option<(T, T, T)> {
        let one = T::one();
        if !(x > T::zero() && x < one) {
            return None;
        }
        let k = self.steepness;
        let y = one - x;
        let q = one / x - one / y;
        let dq = -(one / (x * x) + one / (y * y));
        let d2q = T::lit(2.0) * (one / (x * x * x) - one / (y * y * y));
        let kq = k * q;
        let s = one / (one + kq.exp());
        let t = one / (one + (-kq).exp());
        let st = s * t;
        if st == T::zero() {
            return Some((s, T::zero(), T::zero()));
        }
        let ds = -k * dq * st;
        let d2s = -k * d2q * st - k * dq * (t - s) * ds;
        Some((s, ds, d2s))
    }

    pub fn phi(&self, r: T) -> T {
        let (r0, _) = self.transition();
        match self.step((r - r0) / r0) {
            Some((s, _, _)) => T::one() - s,
            None if r <= r0 => T::one(),
            None => T::zero(),
        }
    }

    /// `(φ', φ'')` with respect to `r`.
    pub fn derivatives(&self, r: T) -> (T, T) {
        let (r0, _) = self.transition();
        match self.step((r - r0) / r0) {
            Some((_, ds, d2s)) => {
                let inv = T::one() / r0;
                (-ds * inv, -d2s * inv * inv)
            }
            None => (T::zero(), T::zero()),
        }
    }

    /// `Δ(θ φ log r) · 2π r` with `Δ = −r^{−1} ∂_r r ∂_r`, i.e. the radial
    /// density whose integral over `r` is the planar integral.
    pub fn flux_density(&self, theta: T, r: T) -> T {
        let (d1, d2) = self.derivatives(r);
        -T::two_pi() * theta * (r.ln() * (d1 + r * d2) + T::lit(2.0) * d1)
    }
}

/// `∫_{ℝ²} Δ(θ φ(r) log r)` over the punctured plane. Equals `2πθ` for every
/// admissible profile.
pub fn cutoff_log_integral<T: Scalar>(
    profile: &CutoffProfile<T>,
    theta: T,
) -> Result<T, CutoffError> {
    cutoff_log_integral_tol(profile, theta, T::lit(QUADRATURE_TOL))
}

/// [`cutoff_log_integral`] with the quadrature tolerance per unit of `|θ|`.
pub fn cutoff_log_integral_tol<T: Scalar>(
    profile: &CutoffProfile<T>,
    theta: T,
    tol: T,
) -> Result<T, CutoffError> {
    if theta == T::zero() {
        return Ok(T::zero());
    }
    let (a, b) = profile.transition();
    let tol = tol * theta.abs().max(T::one());
    Ok(integrate(|r| profile.flux_density(theta, r), a, b, tol)?)
}
