//! Orientation-preserving isometries of the plane, `z ↦ e^{iβ} z + t`.

use crate::scalar::{cplx, wrap_angle, Cplx, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidMotion<T> {
    /// `β`, kept in `(−π, π]`.
    pub rotation: T,
    pub translation: Cplx<T>,
}

impl<T: Scalar> RigidMotion<T> {
    pub fn new(rotation: T, translation: Cplx<T>) -> Self {
        Self {
            rotation: wrap_angle(rotation),
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::new(T::zero(), cplx(T::zero(), T::zero()))
    }

    pub fn rotor(&self) -> Cplx<T> {
        Cplx::from_polar(T::one(), self.rotation)
    }

    pub fn apply(&self, z: Cplx<T>) -> Cplx<T> {
        self.rotor() * z + self.translation
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self::new(
            self.rotation + other.rotation,
            self.rotor() * other.translation + self.translation,
        )
    }

    pub fn inverse(&self) -> Self {
        let back = Cplx::from_polar(T::one(), -self.rotation);
        Self::new(-self.rotation, -(back * self.translation))
    }

    /// The motion sending `a ↦ a2` and the direction of `b − a` to that of
    /// `b2 − a2`. Exact when `|b − a| = |b2 − a2|`.
    pub fn from_point_pairs(a: Cplx<T>, b: Cplx<T>, a2: Cplx<T>, b2: Cplx<T>) -> Self {
        let rotation = ((b2 - a2) / (b - a)).arg();
        let rotor = Cplx::from_polar(T::one(), rotation);
        Self::new(rotation, a2 - rotor * a)
    }

    /// Whether the rotation part is `0 mod 2π` within `tol`.
    pub fn is_translation(&self, tol: T) -> bool {
        self.rotation.abs() <= tol
    }

    /// `|t|`, meaningful only for pure translations.
    pub fn translation_length(&self, tol: T) -> Option<T> {
        self.is_translation(tol).then(|| self.translation.norm())
    }

    /// Centre of rotation, `t / (1 − e^{iβ})`, when the rotation is
    /// nontrivial.
    pub fn fixed_point(&self, tol: T) -> Option<Cplx<T>> {
        if self.is_translation(tol) {
            None
        } else {
            Some(self.translation / (cplx(T::one(), T::zero()) - self.rotor()))
        }
    }

    /// Largest displacement of the given points.
    pub fn max_displacement(&self, points: &[Cplx<T>]) -> T {
        points
            .iter()
            .map(|&p| (self.apply(p) - p).norm())
            .fold(T::zero(), T::max)
    }
}
