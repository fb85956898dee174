//! Normal forms of conformally rescaled conical metrics.
//!
//! Near a cone point the metric `e^{-2f}|z^{-θ} dz|²` with `f = Re F`
//! harmonic is brought, by a holomorphic change of coordinate `u = z·h(z)`,
//! to one of three model forms:
//!
//! * `θ ∉ {1, 2, …}`: `|u^{-θ} du|²`, a plain cone of angle `2π(1 − θ)`;
//! * `θ = 1`: `e^{-2 Re F(0)} (l/2π)² |du/u|²`, a cylinder of circumference
//!   `e^{-Re F(0)} l`;
//! * `θ ∈ {2, 3, …}`: `|(1 + c u^{θ−1}) u^{-θ} du|²` with `c` the residue of
//!   `z^{-θ} e^{-F}`, a cone of angle `2π(1 − θ)` whose holonomy carries a
//!   translation of length `2π|c|`.

use crate::dd::DoubleDouble;
use crate::scalar::{cplx, Cplx, Scalar};
use crate::series::{PowerSeries, SeriesError};

/// Newton tolerance for the implicit equation of the translation case, in
/// units of the scalar's machine epsilon.
pub const IMPLICIT_TOL_ULPS: f64 = 64.0;
pub const IMPLICIT_MAX_ITER: usize = 40;

/// Which model the metric reduces to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalFormCase {
    /// `θ = 0`: already smooth, `u = z`.
    Smooth,
    Cone,
    Cylinder,
    Translation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalForm<T> {
    pub theta: T,
    /// `2π(1 − θ)`.
    pub angle: T,
    pub case: NormalFormCase,
    /// New coordinate, `u(0) = 0`, `u'(0) ≠ 0`.
    pub u: PowerSeries<T>,
    pub circumference: Option<T>,
    pub translation_c: Option<Cplx<T>>,
    /// `2π|c|`.
    pub translation_length: Option<T>,
    /// Imaginary part removed from `F(0)` before solving.
    pub imaginary_shift: T,
    /// Newton iterations spent on the implicit equation (translation case).
    pub newton_iterations: usize,
}

/// Exponent `θ` as a positive integer, if it is one.
pub fn positive_integer<T: Scalar>(theta: T) -> Option<usize> {
    let r = theta.round();
    if r >= T::one() && (theta - r).abs() <= T::lit(1e-12) {
        r.to_usize()
    } else {
        None
    }
}

/// `F` with `Im F(0)` set to zero, and the removed imaginary part.
pub fn normalize_potential<T: Scalar>(f: &PowerSeries<T>) -> (PowerSeries<T>, T) {
    let mut g = f.clone();
    let c0 = g.coeff(0);
    g.set_coeff(0, cplx(c0.re, T::zero()));
    (g, c0.im)
}

/// Radial coordinate `R(r)` in which `(dr² + r² dσ²)/r^{2θ}` becomes a
/// standard cone or cylinder: `R'(r)² r^{2θ} = 1`.
pub fn radial_reparam<T: Scalar>(theta: T, r: T) -> Result<T, SeriesError> {
    if !(r > T::zero()) {
        return Err(SeriesError::Domain(format!("radius must be positive, got {r}")));
    }
    let one = T::one();
    Ok(if theta < one {
        r.powf(one - theta) / (one - theta)
    } else if theta == one {
        r
    } else {
        r.powf(one - theta) / (theta - one)
    })
}

/// Computes the normal form of `|e^{-F} z^{-θ} dz|²`. `circumference` is the
/// circumference `l` of the unscaled cylinder and is required when `θ = 1`.
pub fn normal_form<T: Scalar>(
    f: &PowerSeries<T>,
    theta: T,
    circumference: Option<T>,
) -> Result<NormalForm<T>, SeriesError> {
    let m = f.order();
    if m < 1 {
        return Err(SeriesError::BadOrder(m));
    }
    let (f, shift) = normalize_potential(f);
    let one = T::one();
    let angle = T::two_pi() * (one - theta);
    let base = NormalForm {
        theta,
        angle,
        case: NormalFormCase::Smooth,
        u: PowerSeries::identity(m),
        circumference: None,
        translation_c: None,
        translation_length: None,
        imaginary_shift: shift,
        newton_iterations: 0,
    };
    if theta == T::zero() {
        return Ok(base);
    }
    let a = (-&f).exp();
    match positive_integer(theta) {
        None => {
            // (1 − θ + n) v_n = (1 − θ) a_n, then h = v^{1/(1−θ)}.
            let v = cone_v(&a, theta);
            let h = v.log()?.scale(cplx(one / (one - theta), T::zero())).exp();
            Ok(NormalForm {
                case: NormalFormCase::Cone,
                u: h.shift_up(1),
                ..base
            })
        }
        Some(1) => {
            let l = circumference.ok_or_else(|| {
                SeriesError::Domain("θ = 1 needs the cylinder circumference l".into())
            })?;
            // 1 + z v' = a / a_0, v(0) = 0, u = z e^v.
            let a0 = a.coeff(0);
            let mut v = PowerSeries::zero(m);
            for n in 1..=m {
                v.set_coeff(n, a.coeff(n) / (a0 * T::from_usize_lossy(n)));
            }
            let u = v.exp().shift_up(1);
            Ok(NormalForm {
                case: NormalFormCase::Cylinder,
                u,
                circumference: Some((-f.coeff(0).re).exp() * l),
                ..base
            })
        }
        Some(k) => {
            let c = a.coeff(k - 1);
            let big_a = translation_rhs(&a, k);
            let (h, iterations) = solve_implicit(&big_a, c, k)?;
            let w = h
                .log()?
                .scale(cplx(one / (one - T::from_usize_lossy(k)), T::zero()))
                .exp();
            Ok(NormalForm {
                case: NormalFormCase::Translation,
                u: w.shift_up(1),
                translation_c: Some(c),
                translation_length: Some(T::two_pi() * c.norm()),
                newton_iterations: iterations,
                ..base
            })
        }
    }
}

impl<T: Scalar> NormalForm<T> {
    /// Same normal form in another scalar type, rounded through `f64`.
    pub fn cast<U: Scalar>(&self) -> NormalForm<U> {
        let r = |x: T| U::lit(x.to_f64_lossy());
        let c = |z: Cplx<T>| Cplx::new(r(z.re), r(z.im));
        NormalForm {
            theta: r(self.theta),
            angle: r(self.angle),
            case: self.case,
            u: self.u.cast(),
            circumference: self.circumference.map(r),
            translation_c: self.translation_c.map(c),
            translation_length: self.translation_length.map(r),
            imaginary_shift: r(self.imaginary_shift),
            newton_iterations: self.newton_iterations,
        }
    }
}

/// [`normal_form`] evaluated in double-double arithmetic and rounded to
/// `f64`, together with the double-double residual of
/// [`verify_normal_form`]. Coefficient recursions for large `θ` lose a few
/// digits, which this keeps below `f64` rounding.
pub fn normal_form_extended(
    f: &PowerSeries<f64>,
    theta: f64,
    circumference: Option<f64>,
) -> Result<(NormalForm<f64>, f64), SeriesError> {
    let fd = f.cast::<DoubleDouble>();
    let td = DoubleDouble::from(theta);
    let nf = normal_form(&fd, td, circumference.map(DoubleDouble::from))?;
    let residual = verify_normal_form(&fd, td, &nf)?;
    Ok((nf.cast(), residual.into()))
}

/// Coefficients `v_n = (1 − θ)/(1 − θ + n) · a_n`.
pub fn cone_v<T: Scalar>(a: &PowerSeries<T>, theta: T) -> PowerSeries<T> {
    let one_minus = T::one() - theta;
    PowerSeries::new(
        a.coeffs()
            .iter()
            .enumerate()
            .map(|(n, an)| *an * (one_minus / (one_minus + T::from_usize_lossy(n)))),
        a.order(),
    )
}

/// `A(z) = Σ_{n ≠ k−1} (1 − k)/(n + 1 − k) · a_n z^n`; the free constant of
/// integration (coefficient `k − 1`) is fixed to zero.
fn translation_rhs<T: Scalar>(a: &PowerSeries<T>, k: usize) -> PowerSeries<T> {
    let one_minus_k = T::one() - T::from_usize_lossy(k);
    PowerSeries::new(
        a.coeffs().iter().enumerate().map(|(n, an)| {
            if n + 1 == k {
                Cplx::new(T::zero(), T::zero())
            } else {
                *an * (one_minus_k / (T::from_usize_lossy(n + 1) - T::from_usize_lossy(k)))
            }
        }),
        a.order(),
    )
}

/// Solves `h + c z^{k−1} log h = A` for `h(0) = A(0)` by Newton iteration
/// on the coefficient vector.
fn solve_implicit<T: Scalar>(
    big_a: &PowerSeries<T>,
    c: Cplx<T>,
    k: usize,
) -> Result<(PowerSeries<T>, usize), SeriesError> {
    let eps = T::epsilon();
    // Rounding in the defect is relative to the largest term summed, which
    // can be `c z^{k−1} log h` rather than `A`.
    let defect = |h: &PowerSeries<T>| -> Result<(PowerSeries<T>, T), SeriesError> {
        let log_term = h.log()?.scale(c).shift_up(k - 1);
        let scale = T::one()
            .max(big_a.max_abs())
            .max(h.max_abs())
            .max(log_term.max_abs());
        Ok((&(h + &log_term) - big_a, scale))
    };
    let tol = |scale: T| T::lit(IMPLICIT_TOL_ULPS) * eps * scale;
    // Below this a stalled residual is attributed to rounding.
    let floor = |scale: T| T::lit(1e-2) * eps.sqrt() * scale;
    let mut h = big_a.clone();
    let (mut phi, mut scale) = defect(&h)?;
    let mut res = phi.max_abs();
    let mut best = (h.clone(), res, scale);
    let mut stalls = 0;
    for it in 0..IMPLICIT_MAX_ITER {
        if res <= tol(scale) {
            return Ok((h, it));
        }
        // Φ'(h) δ = δ (1 + c z^{k−1} / h)
        let jac = &PowerSeries::constant(cplx(T::one(), T::zero()), h.order())
            + &h.recip()?.scale(c).shift_up(k - 1);
        let next = &h - &phi.div(&jac)?;
        let (next_phi, next_scale) = defect(&next)?;
        let next_res = next_phi.max_abs();
        // Newton on formal series doubles the number of exact leading orders
        // per step, so the largest coefficient need not shrink monotonically.
        if next_res > T::lit(0.5) * res {
            stalls += 1;
        } else {
            stalls = 0;
        }
        if next_res < best.1 {
            best = (next.clone(), next_res, next_scale);
        }
        h = next;
        phi = next_phi;
        res = next_res;
        scale = next_scale;
        if stalls >= 3 {
            if best.1 <= floor(best.2) {
                return Ok((best.0, it + 1));
            }
            return Err(SeriesError::Numerical(format!(
                "implicit equation: residual stalled at {:e}",
                best.1
            )));
        }
    }
    if best.1 <= floor(best.2) {
        Ok((best.0, IMPLICIT_MAX_ITER))
    } else {
        Err(SeriesError::Numerical(format!(
            "implicit equation did not converge in {IMPLICIT_MAX_ITER} iterations (residual {:e})",
            best.1
        )))
    }
}

/// Largest coefficient of the difference between the two sides of the
/// defining identity, after multiplying through by `z^θ`:
///
/// * cone: `e^{-F} = w^{-θ}(w + z w')`,
/// * cylinder: `e^{-F} = e^{-F(0)}(w + z w')/w`,
/// * translation: `e^{-F} = (1 + c z^{θ−1} w^{θ−1}) w^{-θ}(w + z w')`,
///
/// where `w = u/z`. Compared up to order `M − 1` (one order is spent on
/// dividing `u` by `z`). For `θ = 0` the residual is `max |u − z|`.
pub fn verify_normal_form<T: Scalar>(
    f: &PowerSeries<T>,
    theta: T,
    nf: &NormalForm<T>,
) -> Result<T, SeriesError> {
    if nf.case == NormalFormCase::Smooth {
        return Ok((&nf.u - &PowerSeries::identity(nf.u.order())).max_abs());
    }
    let (f, _) = normalize_potential(f);
    let m = nf.u.order().min(f.order());
    if m < 2 {
        return Err(SeriesError::BadOrder(m));
    }
    let u = nf.u.truncate(m);
    let w = u.shift_down(1);
    let order = w.order();
    let lhs = (-&f.truncate(order)).exp();
    let du_dz = &w + &w.euler_derivative();
    let rhs = match nf.case {
        NormalFormCase::Cone => &w.powf(-theta)? * &du_dz,
        NormalFormCase::Cylinder => du_dz.div(&w)?.scale(lhs.coeff(0)),
        NormalFormCase::Translation => {
            let k = positive_integer(theta).ok_or_else(|| {
                SeriesError::Domain(format!("translation form needs integer θ ≥ 2, got {theta}"))
            })?;
            let c = nf
                .translation_c
                .ok_or_else(|| SeriesError::Domain("translation form without c".into()))?;
            let log_w = w.log()?;
            let w_pow = log_w.scale(cplx(T::from_usize_lossy(k - 1), T::zero())).exp();
            let one = PowerSeries::constant(cplx(T::one(), T::zero()), order);
            let corr = &one + &w_pow.scale(c).shift_up(k - 1);
            let w_neg = log_w.scale(cplx(-T::from_usize_lossy(k), T::zero())).exp();
            &(&corr * &w_neg) * &du_dz
        }
        NormalFormCase::Smooth => unreachable!(),
    };
    Ok((&lhs - &rhs).max_abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    type S = PowerSeries<f64>;

    fn c(re: f64, im: f64) -> Cplx<f64> {
        Cplx::new(re, im)
    }

    #[test]
    fn radial_branches() {
        assert!((radial_reparam(0.5f64, 0.25).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(radial_reparam(1.0, 0.7).unwrap(), 0.7);
        assert!((radial_reparam(2.0f64, 0.5).unwrap() - 2.0).abs() < 1e-15);
        assert!(radial_reparam(0.5, 0.0).is_err());
        assert!(radial_reparam(0.5, -1.0).is_err());
    }

    /// Finite-difference oracle for the pullback identity `R'(r)² r^{2θ} = 1`
    /// and `(|1 − θ| R)² = r^{2(1−θ)}`.
    #[test]
    fn radial_pullback_identity() {
        for &theta in &[-1.5f64, 0.25, 0.5, 2.0, 3.0, 4.5] {
            for &r in &[0.1f64, 0.5, 0.9, 2.0] {
                let h = 1e-6 * r;
                let d = (radial_reparam(theta, r + h).unwrap() - radial_reparam(theta, r - h).unwrap())
                    / (2.0 * h);
                let pull = d * d * r.powf(2.0 * theta);
                assert!((pull - 1.0).abs() < 1e-7, "θ={theta} r={r}: {pull}");
                let big_r = radial_reparam(theta, r).unwrap();
                let lhs = ((1.0 - theta).abs() * big_r).powi(2);
                assert!((lhs - r.powf(2.0 * (1.0 - theta))).abs() < 1e-12 * lhs.max(1.0));
            }
        }
    }

    #[test]
    fn flat_potential_is_identity() {
        let nf = normal_form(&S::zero(32), 0.5, None).unwrap();
        assert_eq!(nf.case, NormalFormCase::Cone);
        assert!((&nf.u - &S::identity(32)).max_abs() < 1e-15);
        assert!((nf.angle - PI).abs() < 1e-15);
        assert!(nf.translation_length.is_none());
    }

    #[test]
    fn first_cone_coefficient() {
        let f = S::from_real(&[0.0, 1.0], 32);
        let a = (-&f).exp();
        let v = cone_v(&a, 0.5);
        assert!((v.coeff(1) - c(-1.0 / 3.0, 0.0)).norm() < 1e-16);
    }

    #[test]
    fn translation_read_off() {
        // e^{-F} = 1 + z  ⇒  F = −log(1 + z).
        let f = -&S::from_real(&[1.0, 1.0], 32).log().unwrap();
        let nf = normal_form(&f, 2.0, None).unwrap();
        assert_eq!(nf.case, NormalFormCase::Translation);
        assert!((nf.translation_c.unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!((nf.translation_length.unwrap() - 2.0 * PI).abs() < 1e-14);
        assert!(verify_normal_form(&f, 2.0, &nf).unwrap() < 1e-13);
    }

    #[test]
    fn cylinder_circumference() {
        let f = S::constant(c(1.0, 0.0), 32);
        let nf = normal_form(&f, 1.0, Some(2.0 * PI)).unwrap();
        assert!((nf.circumference.unwrap() - 2.0 * PI * (-1.0f64).exp()).abs() < 1e-15);
        assert!(normal_form(&f, 1.0, None).is_err());
    }

    #[test]
    fn zero_theta_is_trivial() {
        let f = S::from_real(&[0.3, 0.2], 8);
        let nf = normal_form(&f, 0.0, None).unwrap();
        assert_eq!(nf.case, NormalFormCase::Smooth);
        assert_eq!(nf.u, S::identity(8));
        assert_eq!(verify_normal_form(&f, 0.0, &nf).unwrap(), 0.0);
    }

    #[test]
    fn perturbation_is_detected() {
        let f = S::from_real(&[0.1, -0.4, 0.2], 32);
        let mut nf = normal_form(&f, 0.5, None).unwrap();
        assert!(verify_normal_form(&f, 0.5, &nf).unwrap() < 1e-13);
        let u2 = nf.u.coeff(2);
        nf.u.set_coeff(2, u2 + c(1e-3, 0.0));
        assert!(verify_normal_form(&f, 0.5, &nf).unwrap() >= 1e-4);
    }

    #[test]
    fn imaginary_constant_is_normalized() {
        let f = S::new([c(0.2, 0.7), c(0.5, 0.1), c(0.0, -0.3)], 16);
        let nf = normal_form(&f, 3.0, None).unwrap();
        assert!((nf.imaginary_shift - 0.7).abs() < 1e-16);
        let (g, _) = normalize_potential(&f);
        let plain = normal_form(&g, 3.0, None).unwrap();
        assert_eq!(nf.u, plain.u);
        assert_eq!(nf.translation_c, plain.translation_c);
    }

    #[test]
    fn extended_precision_matches_plain() {
        let f = S::new((0..=24).map(|n| c(0.9f64.powi(n) * (n as f64).cos(), 0.3 * (n as f64).sin())), 24);
        for &theta in &[0.5, 1.0, 3.0, 5.0] {
            let (nf, res) = normal_form_extended(&f, theta, Some(2.0 * PI)).unwrap();
            let plain = normal_form(&f, theta, Some(2.0 * PI)).unwrap();
            assert!(res <= 1e-20, "θ={theta}: {res:e}");
            assert_eq!(nf.case, plain.case);
            let d = (&nf.u - &plain.u).max_abs();
            assert!(d <= 1e-9 * plain.u.max_abs(), "θ={theta}: {d:e}");
        }
    }
}
