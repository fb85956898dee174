//! Flat conical metrics `|μ|²` from rational 1-forms `μ = P(z)/Q(z) dz` and
//! quadratic differentials `P(z)/Q(z) dz²` on the Riemann sphere.

use std::fmt;

use thiserror::Error;

use crate::poly::{PolyError, Polynomial, CLUSTER_TOL};
use crate::scalar::{cplx, Cplx, Scalar};
use crate::series::PowerSeries;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormError {
    #[error("denominator is identically zero")]
    ZeroDenominator,
    #[error("numerator is identically zero; the metric is degenerate")]
    ZeroNumerator,
    #[error("root finding: {0}")]
    Roots(#[from] PolyError),
    #[error("{0} is not a pole of the form")]
    NotAPole(String),
    #[error("{0} is a pole of the form")]
    AtPole(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormKind {
    Abelian,
    Quadratic,
}

impl FormKind {
    /// Power of `w` picked up by `dz` (resp. `dz²`) in the chart `w = 1/z`.
    fn infinity_shift(self) -> i64 {
        match self {
            FormKind::Abelian => 2,
            FormKind::Quadratic => 4,
        }
    }
}

/// A point of the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Location<T> {
    Finite(Cplx<T>),
    Infinity,
}

impl<T: Scalar> fmt::Display for Location<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Finite(z) => write!(f, "{z}"),
            Location::Infinity => write!(f, "∞"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeromorphicForm<T> {
    numerator: Polynomial<T>,
    denominator: Polynomial<T>,
    kind: FormKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularityDatum<T> {
    pub location: Location<T>,
    /// Zeros positive, poles negative.
    pub ord: i64,
    /// `z^{-1}` Laurent coefficient (`w^{-1}` at ∞); zero at zeros.
    pub residue: Cplx<T>,
    pub cone_angle: T,
    pub cylinder_circumference: Option<T>,
    pub translation_length: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FormAnalysis<T> {
    pub kind: FormKind,
    pub singularities: Vec<SingularityDatum<T>>,
    /// Common roots of numerator and denominator and how often they cancelled.
    pub cancelled: Vec<(Cplx<T>, usize)>,
    pub warnings: Vec<String>,
}

impl<T: Scalar> FormAnalysis<T> {
    /// `Σ ord` over the sphere.
    pub fn degree(&self) -> i64 {
        self.singularities.iter().map(|s| s.ord).sum()
    }

    pub fn residue_sum(&self) -> Cplx<T> {
        self.singularities
            .iter()
            .fold(cplx(T::zero(), T::zero()), |s, d| s + d.residue)
    }

    pub fn total_cone_angle(&self) -> T {
        self.singularities
            .iter()
            .fold(T::zero(), |s, d| s + d.cone_angle)
    }
}

impl<T: Scalar> MeromorphicForm<T> {
    pub fn new(
        numerator: Polynomial<T>,
        denominator: Polynomial<T>,
        kind: FormKind,
    ) -> Result<Self, FormError> {
        if denominator.is_zero() {
            return Err(FormError::ZeroDenominator);
        }
        if numerator.is_zero() {
            return Err(FormError::ZeroNumerator);
        }
        Ok(Self {
            numerator,
            denominator,
            kind,
        })
    }

    pub fn abelian(numerator: &[Cplx<T>], denominator: &[Cplx<T>]) -> Result<Self, FormError> {
        Self::new(
            Polynomial::new(numerator.to_vec()),
            Polynomial::new(denominator.to_vec()),
            FormKind::Abelian,
        )
    }

    pub fn quadratic(numerator: &[Cplx<T>], denominator: &[Cplx<T>]) -> Result<Self, FormError> {
        Self::new(
            Polynomial::new(numerator.to_vec()),
            Polynomial::new(denominator.to_vec()),
            FormKind::Quadratic,
        )
    }

    pub fn numerator(&self) -> &Polynomial<T> {
        &self.numerator
    }

    pub fn denominator(&self) -> &Polynomial<T> {
        &self.denominator
    }

    pub fn kind(&self) -> FormKind {
        self.kind
    }

    /// Order at ∞, `deg Q − deg P − 2` (abelian) or `− 4` (quadratic).
    pub fn order_at_infinity(&self) -> i64 {
        let p = self.numerator.degree().unwrap_or(0) as i64;
        let q = self.denominator.degree().unwrap_or(0) as i64;
        q - p - self.kind.infinity_shift()
    }

    fn cone_data(&self, ord: i64, residue: Cplx<T>) -> (T, Option<T>, Option<T>) {
        let ord_t = T::from_i64(ord).expect("order fits");
        match self.kind {
            FormKind::Abelian => {
                let angle = T::two_pi() * (T::one() + ord_t);
                let length = T::two_pi() * residue.norm();
                match ord {
                    -1 => (angle, Some(length), None),
                    o if o <= -2 => (angle, None, Some(length)),
                    _ => (angle, None, None),
                }
            }
            FormKind::Quadratic => (T::PI() * (T::lit(2.0) + ord_t), None, None),
        }
    }

    /// Laurent coefficient of `z^{-1}` at `z0`, where the numerator vanishes
    /// to order `a` and the denominator to order `b > a`.
    fn local_residue(&self, z0: Cplx<T>, a: usize, b: usize) -> Cplx<T> {
        let n = b - a - 1;
        let tp = self.numerator.taylor_at(z0);
        let tq = self.denominator.taylor_at(z0);
        let num = PowerSeries::new(tp[a..].iter().copied(), n);
        let den = PowerSeries::new(tq[b..].iter().copied(), n);
        num.div(&den)
            .expect("shifted denominator has a nonzero constant term")
            .coeff(n)
    }

    /// `w^{-1}` coefficient of the form in the chart `w = 1/z`:
    /// `μ = −w^{q−p−2} P̃(w)/Q̃(w) dw` with reversed coefficient lists
    /// (no sign for quadratic differentials).
    fn infinity_residue(&self) -> Cplx<T> {
        let ord = self.order_at_infinity();
        if ord >= 0 {
            return cplx(T::zero(), T::zero());
        }
        let n = (-1 - ord) as usize;
        let num = PowerSeries::new(self.numerator.reversed().coeffs().iter().copied(), n);
        let den = PowerSeries::new(self.denominator.reversed().coeffs().iter().copied(), n);
        let c = num
            .div(&den)
            .expect("leading coefficient is nonzero")
            .coeff(n);
        match self.kind {
            FormKind::Abelian => -c,
            FormKind::Quadratic => c,
        }
    }

    /// Finite points where numerator or denominator vanish, with the two
    /// multiplicities, after matching common roots.
    fn finite_points(&self) -> Result<(Vec<(Cplx<T>, usize, usize)>, Vec<String>), FormError> {
        let pr = self.numerator.roots()?;
        let qr = self.denominator.roots()?;
        let mut warnings = pr.warnings;
        warnings.extend(qr.warnings);
        let mut points: Vec<(Cplx<T>, usize, usize)> =
            qr.roots.iter().map(|r| (r.z, 0, r.multiplicity)).collect();
        for r in &pr.roots {
            let tol = T::lit(CLUSTER_TOL) * T::one().max(r.z.norm());
            match points
                .iter_mut()
                .filter(|p| p.1 == 0)
                .find(|p| (p.0 - r.z).norm() <= tol)
            {
                Some(p) => p.1 = r.multiplicity,
                None => points.push((r.z, r.multiplicity, 0)),
            }
        }
        Ok((points, warnings))
    }
}

/// Zeros and poles on the whole sphere with orders, residues and cone data.
pub fn analyze<T: Scalar>(form: &MeromorphicForm<T>) -> Result<FormAnalysis<T>, FormError> {
    let (points, warnings) = form.finite_points()?;
    let mut singularities = Vec::new();
    let mut cancelled = Vec::new();
    for (z, a, b) in points {
        if a > 0 && b > 0 {
            cancelled.push((z, a.min(b)));
        }
        let ord = a as i64 - b as i64;
        if ord == 0 {
            continue;
        }
        let residue = if ord < 0 {
            form.local_residue(z, a, b)
        } else {
            cplx(T::zero(), T::zero())
        };
        let (cone_angle, cylinder_circumference, translation_length) = form.cone_data(ord, residue);
        singularities.push(SingularityDatum {
            location: Location::Finite(z),
            ord,
            residue,
            cone_angle,
            cylinder_circumference,
            translation_length,
        });
    }
    singularities.sort_by(|x, y| match (x.location, y.location) {
        (Location::Finite(a), Location::Finite(b)) => a
            .re
            .partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal)),
        _ => std::cmp::Ordering::Equal,
    });
    let ord = form.order_at_infinity();
    if ord != 0 {
        let residue = form.infinity_residue();
        let (cone_angle, cylinder_circumference, translation_length) = form.cone_data(ord, residue);
        singularities.push(SingularityDatum {
            location: Location::Infinity,
            ord,
            residue,
            cone_angle,
            cylinder_circumference,
            translation_length,
        });
    }
    Ok(FormAnalysis {
        kind: form.kind,
        singularities,
        cancelled,
        warnings,
    })
}

/// `Σ ord` over all singularities including ∞: `−2` for abelian forms and
/// `−4` for quadratic differentials.
pub fn degree_check<T: Scalar>(form: &MeromorphicForm<T>) -> Result<i64, FormError> {
    Ok(analyze(form)?.degree())
}

/// Residue at a pole. Finite locations are matched to the computed poles
/// within the clustering tolerance.
pub fn residue_at<T: Scalar>(
    form: &MeromorphicForm<T>,
    location: Location<T>,
) -> Result<Cplx<T>, FormError> {
    match location {
        Location::Infinity => {
            if form.order_at_infinity() < 0 {
                Ok(form.infinity_residue())
            } else {
                Err(FormError::NotAPole(location.to_string()))
            }
        }
        Location::Finite(z) => {
            let (points, _) = form.finite_points()?;
            let tol = T::lit(CLUSTER_TOL) * T::one().max(z.norm());
            points
                .into_iter()
                .find(|p| (p.0 - z).norm() <= tol && p.2 > p.1)
                .map(|(z0, a, b)| form.local_residue(z0, a, b))
                .ok_or_else(|| FormError::NotAPole(location.to_string()))
        }
    }
}

/// Length scale of the flat metric relative to `|dz|` at `z`: `|P/Q|` for
/// abelian forms, `|P/Q|^{1/2}` for quadratic ones.
pub fn flat_metric_sample<T: Scalar>(form: &MeromorphicForm<T>, z: Cplx<T>) -> Result<T, FormError> {
    let slack = T::lit(64.0) * T::epsilon();
    let p = form.numerator.eval(z);
    let q = form.denominator.eval(z);
    let p_small = p.norm() <= slack * form.numerator.magnitude_at(z);
    let q_small = q.norm() <= slack * form.denominator.magnitude_at(z);
    let ratio = if !q_small {
        (p / q).norm()
    } else if !p_small {
        return Err(FormError::AtPole(z.to_string()));
    } else {
        // Common root: compare the first non-vanishing Taylor coefficients.
        let first = |poly: &Polynomial<T>| {
            let b = poly.taylor_at(z);
            let scale = b.iter().fold(T::zero(), |m, c| m.max(c.norm()));
            b.iter()
                .position(|c| c.norm() > slack * scale)
                .map(|i| (i, b[i]))
        };
        match (first(&form.numerator), first(&form.denominator)) {
            (Some((i, bp)), Some((j, bq))) if i == j => (bp / bq).norm(),
            (Some((i, _)), Some((j, _))) if i > j => T::zero(),
            _ => return Err(FormError::AtPole(z.to_string())),
        }
    };
    Ok(match form.kind {
        FormKind::Abelian => ratio,
        FormKind::Quadratic => ratio.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Cplx<f64> {
        cplx(re, im)
    }

    fn r(xs: &[f64]) -> Vec<Cplx<f64>> {
        xs.iter().map(|&x| c(x, 0.0)).collect()
    }

    #[test]
    fn dz_has_a_double_pole_at_infinity() {
        let f = MeromorphicForm::abelian(&r(&[1.0]), &r(&[1.0])).unwrap();
        let a = analyze(&f).unwrap();
        assert_eq!(a.singularities.len(), 1);
        let s = &a.singularities[0];
        assert_eq!(s.location, Location::Infinity);
        assert_eq!(s.ord, -2);
        assert_eq!(s.residue, c(0.0, 0.0));
        assert!((s.cone_angle + 2.0 * PI).abs() < 1e-15);
        assert_eq!(s.translation_length, Some(0.0));
        assert_eq!(a.degree(), -2);
    }

    #[test]
    fn dz_over_z_is_two_cylinders() {
        let f = MeromorphicForm::abelian(&r(&[1.0]), &r(&[0.0, 1.0])).unwrap();
        let a = analyze(&f).unwrap();
        assert_eq!(a.singularities.len(), 2);
        let (zero, inf) = (&a.singularities[0], &a.singularities[1]);
        assert_eq!(zero.location, Location::Finite(c(0.0, 0.0)));
        assert_eq!((zero.ord, inf.ord), (-1, -1));
        assert!((zero.residue - c(1.0, 0.0)).norm() < 1e-15);
        assert!((inf.residue - c(-1.0, 0.0)).norm() < 1e-15);
        for s in &a.singularities {
            assert!((s.cylinder_circumference.unwrap() - 2.0 * PI).abs() < 1e-14);
            assert_eq!(s.cone_angle, 0.0);
        }
    }

    #[test]
    fn z_over_z_squared_minus_one() {
        let f = MeromorphicForm::abelian(&r(&[0.0, 1.0]), &r(&[-1.0, 0.0, 1.0])).unwrap();
        let a = analyze(&f).unwrap();
        let poles: Vec<_> = a.singularities.iter().filter(|s| s.ord < 0).collect();
        assert_eq!(poles.len(), 3);
        for s in &poles {
            let expect = match s.location {
                Location::Infinity => c(-1.0, 0.0),
                Location::Finite(_) => c(0.5, 0.0),
            };
            assert!((s.residue - expect).norm() < 1e-14, "{:?}", s);
        }
        assert!(a.residue_sum().norm() < 1e-14);
        let at_one = residue_at(&f, Location::Finite(c(1.0, 0.0))).unwrap();
        assert!((at_one - c(0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn degree_examples() {
        let f = MeromorphicForm::abelian(&r(&[1.0, 0.0, 1.0]), &r(&[0.0, 0.0, 0.0, 1.0])).unwrap();
        let a = analyze(&f).unwrap();
        assert_eq!(a.degree(), -2);
        let ords: Vec<i64> = a.singularities.iter().map(|s| s.ord).collect();
        // zeros ±i, triple pole at 0, simple pole at ∞
        assert_eq!(ords.iter().filter(|&&o| o == 1).count(), 2);
        assert!(ords.contains(&-3));
        let inf = a.singularities.last().unwrap();
        assert_eq!((inf.location, inf.ord), (Location::Infinity, -1));
        assert!((inf.residue - c(-1.0, 0.0)).norm() < 1e-14);
        assert!(a.residue_sum().norm() < 1e-14);

        let q = MeromorphicForm::quadratic(&r(&[1.0]), &r(&[0.0, 1.0])).unwrap();
        let a = analyze(&q).unwrap();
        assert_eq!(a.degree(), -4);
        assert_eq!(a.singularities.last().unwrap().ord, -3);
        assert!((a.total_cone_angle() - (2.0 * PI * 2.0 - 4.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn residues_of_pure_powers() {
        let f = MeromorphicForm::abelian(&r(&[1.0]), &r(&[0.0, 0.0, 1.0])).unwrap();
        assert_eq!(residue_at(&f, Location::Finite(c(0.0, 0.0))).unwrap(), c(0.0, 0.0));
        let g = MeromorphicForm::abelian(&r(&[1.0]), &r(&[0.0, 1.0])).unwrap();
        assert_eq!(residue_at(&g, Location::Finite(c(0.0, 0.0))).unwrap(), c(1.0, 0.0));
        assert!(matches!(
            residue_at(&g, Location::Finite(c(1.0, 0.0))),
            Err(FormError::NotAPole(_))
        ));
    }

    #[test]
    fn common_roots_cancel() {
        // (z − 2)/((z − 2) z) dz = dz/z
        let f = MeromorphicForm::abelian(&r(&[-2.0, 1.0]), &r(&[0.0, -2.0, 1.0])).unwrap();
        let a = analyze(&f).unwrap();
        assert_eq!(a.cancelled.len(), 1);
        assert!((a.cancelled[0].0 - c(2.0, 0.0)).norm() < 1e-12);
        assert_eq!(a.singularities.len(), 2);
        assert!((a.singularities[0].residue - c(1.0, 0.0)).norm() < 1e-14);
        assert!((flat_metric_sample(&f, c(2.0, 0.0)).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn metric_samples() {
        let dz = MeromorphicForm::abelian(&r(&[1.0]), &r(&[1.0])).unwrap();
        assert_eq!(flat_metric_sample(&dz, c(3.0, -1.0)).unwrap(), 1.0);
        let dz_z = MeromorphicForm::abelian(&r(&[1.0]), &r(&[0.0, 1.0])).unwrap();
        assert_eq!(flat_metric_sample(&dz_z, c(2.0, 0.0)).unwrap(), 0.5);
        assert!(matches!(flat_metric_sample(&dz_z, c(0.0, 0.0)), Err(FormError::AtPole(_))));
        let zdz = MeromorphicForm::abelian(&r(&[0.0, 1.0]), &r(&[1.0])).unwrap();
        assert_eq!(flat_metric_sample(&zdz, c(0.0, 1.0)).unwrap(), 1.0);
        assert_eq!(flat_metric_sample(&zdz, c(0.0, 0.0)).unwrap(), 0.0);
        let q = MeromorphicForm::quadratic(&r(&[1.0]), &r(&[0.0, 1.0])).unwrap();
        assert_eq!(flat_metric_sample(&q, c(4.0, 0.0)).unwrap(), 0.5);
    }

    #[test]
    fn rejects_degenerate_forms() {
        assert_eq!(
            MeromorphicForm::abelian(&r(&[1.0]), &r(&[0.0])).unwrap_err(),
            FormError::ZeroDenominator
        );
        assert_eq!(
            MeromorphicForm::abelian(&r(&[]), &r(&[1.0])).unwrap_err(),
            FormError::ZeroNumerator
        );
    }
}
