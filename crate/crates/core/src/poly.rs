//! Complex polynomials and their roots with multiplicity.

use thiserror::Error;

use crate::scalar::{cplx, Cplx, Scalar};

/// Roots closer than this (relative to `max(1, |z|)`) are the same root.
pub const CLUSTER_TOL: f64 = 1e-9;
pub const ABERTH_MAX_ITER: usize = 2000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolyError {
    #[error("polynomial is identically zero")]
    Zero,
    #[error("root finder did not converge after {iterations} iterations (worst |P| = {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("non-finite coefficient")]
    NonFinite,
}

/// `c_0 + c_1 z + … + c_n z^n` with `c_n ≠ 0` (the zero polynomial is empty).
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T> {
    coeffs: Vec<Cplx<T>>,
}

/// A root and how many times it occurs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root<T> {
    pub z: Cplx<T>,
    pub multiplicity: usize,
}

/// Roots with multiplicity plus diagnostics about clusters that could not be
/// told apart cleanly.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSet<T> {
    pub roots: Vec<Root<T>>,
    pub warnings: Vec<String>,
}

fn zero<T: Scalar>() -> Cplx<T> {
    cplx(T::zero(), T::zero())
}

fn scale_of<T: Scalar>(z: Cplx<T>) -> T {
    T::one().max(z.norm())
}

impl<T: Scalar> Polynomial<T> {
    /// Drops trailing (leading-power) zero coefficients.
    pub fn new(mut coeffs: Vec<Cplx<T>>) -> Self {
        while coeffs.last().is_some_and(|c| c.norm() == T::zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[T]) -> Self {
        Self::new(coeffs.iter().map(|&x| cplx(x, T::zero())).collect())
    }

    /// `Π (z − r_k)` times `lead`.
    pub fn from_roots(roots: &[Cplx<T>], lead: Cplx<T>) -> Self {
        let mut c = vec![lead];
        for &r in roots {
            let mut next = vec![zero(); c.len() + 1];
            for (k, &ck) in c.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= ck * r;
            }
            c = next;
        }
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[Cplx<T>] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Cplx<T> {
        self.coeffs.last().copied().unwrap_or_else(zero)
    }

    pub fn eval(&self, z: Cplx<T>) -> Cplx<T> {
        self.coeffs.iter().rev().fold(zero(), |acc, &c| acc * z + c)
    }

    /// `(P(z), P'(z))` by Horner.
    pub fn eval_with_derivative(&self, z: Cplx<T>) -> (Cplx<T>, Cplx<T>) {
        let mut p = zero();
        let mut dp = zero();
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// `Σ |c_k| |z|^k`, the natural scale of the rounding error in `P(z)`.
    pub fn magnitude_at(&self, z: Cplx<T>) -> T {
        let r = z.norm();
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * r + c.norm())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * T::from_usize_lossy(k))
                .collect(),
        )
    }

    /// Coefficients `b_j = P^{(j)}(c)/j!` of `P(c + t) = Σ b_j t^j`.
    pub fn taylor_at(&self, c: Cplx<T>) -> Vec<Cplx<T>> {
        let mut b = self.coeffs.clone();
        let n = b.len();
        for j in 0..n {
            for k in (j..n - 1).rev() {
                let carry = b[k + 1] * c;
                b[k] += carry;
            }
        }
        b
    }

    /// Rounding scale of each Taylor coefficient at `c`.
    fn taylor_magnitudes(&self, c: Cplx<T>) -> Vec<T> {
        let r = c.norm();
        let mut b: Vec<T> = self.coeffs.iter().map(|x| x.norm()).collect();
        let n = b.len();
        for j in 0..n {
            for k in (j..n - 1).rev() {
                let carry = b[k + 1] * r;
                b[k] += carry;
            }
        }
        b
    }

    /// Coefficients in reverse order: `z^n P(1/z)`.
    pub fn reversed(&self) -> Self {
        Self::new(self.coeffs.iter().rev().copied().collect())
    }

    /// Roots with multiplicity. Exact zero roots are split off first; the
    /// rest come from Aberth iteration, Newton polishing and clustering.
    pub fn roots(&self) -> Result<RootSet<T>, PolyError> {
        if self.is_zero() {
            return Err(PolyError::Zero);
        }
        if self.coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(PolyError::NonFinite);
        }
        let zeros_at_origin = self.coeffs.iter().take_while(|c| c.norm() == T::zero()).count();
        let rest = Self::new(self.coeffs[zeros_at_origin..].to_vec());
        let approx = rest.aberth()?;
        let polished: Vec<Cplx<T>> = approx.into_iter().map(|z| rest.polish(z, 2)).collect();
        let mut set = rest.cluster(polished);
        if zeros_at_origin > 0 {
            if let Some(r) = set.roots.iter_mut().find(|r| r.z.norm() <= T::lit(CLUSTER_TOL)) {
                r.z = zero();
                r.multiplicity += zeros_at_origin;
            } else {
                set.roots.push(Root {
                    z: zero(),
                    multiplicity: zeros_at_origin,
                });
            }
        }
        sort_roots(&mut set.roots);
        set.warnings.extend(proximity_warnings(&set.roots));
        Ok(set)
    }

    fn aberth(&self) -> Result<Vec<Cplx<T>>, PolyError> {
        let n = match self.degree() {
            Some(0) | None => return Ok(Vec::new()),
            Some(n) => n,
        };
        if n == 1 {
            return Ok(vec![-self.coeffs[0] / self.coeffs[1]]);
        }
        let eps = T::epsilon();
        let lead = self.leading().norm();
        let radius = (self.coeffs[0].norm() / lead)
            .powf(T::one() / T::from_usize_lossy(n))
            .max(T::lit(1e-3));
        let mut z: Vec<Cplx<T>> = (0..n)
            .map(|k| {
                let a = T::two_pi() * T::from_usize_lossy(k) / T::from_usize_lossy(n) + T::lit(0.4);
                Cplx::from_polar(radius, a)
            })
            .collect();
        let mut done = vec![false; n];
        for _ in 0..ABERTH_MAX_ITER {
            let mut all = true;
            for k in 0..n {
                if done[k] {
                    continue;
                }
                let (p, dp) = self.eval_with_derivative(z[k]);
                if p.norm() <= T::lit(4.0) * eps * self.magnitude_at(z[k]) {
                    done[k] = true;
                    continue;
                }
                all = false;
                let mut s = zero();
                for j in 0..n {
                    if j != k {
                        let d = z[k] - z[j];
                        if d.norm() > T::zero() {
                            s += d.inv();
                        }
                    }
                }
                let corr = if dp.norm() == T::zero() {
                    // Nudge off a critical point.
                    cplx(radius, radius) * T::lit(1e-3)
                } else {
                    let w = p / dp;
                    let denom = cplx(T::one(), T::zero()) - w * s;
                    if denom.norm() == T::zero() {
                        w
                    } else {
                        w / denom
                    }
                };
                z[k] -= corr;
                if corr.norm() <= eps * scale_of(z[k]) {
                    done[k] = true;
                }
            }
            if all {
                return Ok(z);
            }
        }
        let residual = z
            .iter()
            .map(|&x| self.eval(x).norm().to_f64_lossy())
            .fold(0.0, f64::max);
        Err(PolyError::NoConvergence {
            iterations: ABERTH_MAX_ITER,
            residual,
        })
    }

    /// Newton steps that are kept only while they reduce `|P|`.
    fn polish(&self, mut z: Cplx<T>, steps: usize) -> Cplx<T> {
        for _ in 0..steps {
            let (p, dp) = self.eval_with_derivative(z);
            if dp.norm() == T::zero() {
                break;
            }
            let next = z - p / dp;
            if self.eval(next).norm() < p.norm() {
                z = next;
            } else {
                break;
            }
        }
        z
    }

    /// Whether `c` is a root of multiplicity at least `m`, judged by the
    /// first `m` Taylor coefficients vanishing to rounding.
    fn vanishes_to_order(&self, c: Cplx<T>, m: usize) -> bool {
        let b = self.taylor_at(c);
        let mag = self.taylor_magnitudes(c);
        let slack = T::lit(64.0) * T::from_usize_lossy(self.coeffs.len()) * T::epsilon();
        (0..m).all(|j| b[j].norm() <= slack * mag[j])
    }

    /// Refines the centre of a suspected `m`-fold root as a simple root of
    /// `P^{(m−1)}`.
    fn refine_center(&self, start: Cplx<T>, m: usize) -> Cplx<T> {
        let mut d = self.clone();
        for _ in 1..m {
            d = d.derivative();
        }
        let mut z = start;
        for _ in 0..20 {
            let (p, dp) = d.eval_with_derivative(z);
            if dp.norm() == T::zero() {
                break;
            }
            let step = p / dp;
            let next = z - step;
            if d.eval(next).norm() >= p.norm() {
                break;
            }
            z = next;
            if step.norm() <= T::epsilon() * scale_of(z) {
                break;
            }
        }
        z
    }

    fn cluster(&self, roots: Vec<Cplx<T>>) -> RootSet<T> {
        let mut out = RootSet {
            roots: Vec::new(),
            warnings: Vec::new(),
        };
        let idx: Vec<usize> = (0..roots.len()).collect();
        self.split_group(&roots, idx, T::lit(0.05), &mut out);
        out
    }

    /// Single-link groups at relative radius `delta`; each group is accepted
    /// as one multiple root if `P` vanishes to that order at its refined
    /// centre, and otherwise split at a smaller radius.
    fn split_group(&self, roots: &[Cplx<T>], idx: Vec<usize>, delta: T, out: &mut RootSet<T>) {
        for group in link_groups(roots, &idx, delta) {
            let m = group.len();
            if m == 1 {
                out.roots.push(Root {
                    z: roots[group[0]],
                    multiplicity: 1,
                });
                continue;
            }
            let mean = group.iter().fold(zero(), |s, &i| s + roots[i]) / T::from_usize_lossy(m);
            let center = self.refine_center(mean, m);
            let spread = group
                .iter()
                .map(|&i| (roots[i] - center).norm())
                .fold(T::zero(), T::max);
            let tight = spread <= T::lit(CLUSTER_TOL) * scale_of(center);
            if tight || self.vanishes_to_order(center, m) {
                out.roots.push(Root {
                    z: center,
                    multiplicity: m,
                });
            } else if delta <= T::lit(CLUSTER_TOL) {
                for &i in &group {
                    out.roots.push(Root {
                        z: roots[i],
                        multiplicity: 1,
                    });
                }
            } else {
                self.split_group(roots, group, delta * T::lit(0.1), out);
            }
        }
    }
}

/// Connected components of the "within `delta·max(1,|z|)`" relation.
fn link_groups<T: Scalar>(roots: &[Cplx<T>], idx: &[usize], delta: T) -> Vec<Vec<usize>> {
    let mut comp: Vec<usize> = (0..idx.len()).collect();
    fn find(comp: &mut [usize], mut i: usize) -> usize {
        while comp[i] != i {
            comp[i] = comp[comp[i]];
            i = comp[i];
        }
        i
    }
    for a in 0..idx.len() {
        for b in a + 1..idx.len() {
            let (za, zb) = (roots[idx[a]], roots[idx[b]]);
            if (za - zb).norm() <= delta * scale_of(za).max(scale_of(zb)) {
                let (ra, rb) = (find(&mut comp, a), find(&mut comp, b));
                if ra != rb {
                    comp[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut label: Vec<Option<usize>> = vec![None; idx.len()];
    for a in 0..idx.len() {
        let r = find(&mut comp, a);
        match label[r] {
            Some(g) => groups[g].push(idx[a]),
            None => {
                label[r] = Some(groups.len());
                groups.push(vec![idx[a]]);
            }
        }
    }
    groups
}

fn sort_roots<T: Scalar>(roots: &mut [Root<T>]) {
    roots.sort_by(|a, b| {
        a.z.re
            .partial_cmp(&b.z.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.z.im.partial_cmp(&b.z.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}

/// Distinct roots that sit within ten times the clustering tolerance.
fn proximity_warnings<T: Scalar>(roots: &[Root<T>]) -> Vec<String> {
    let mut w = Vec::new();
    for a in 0..roots.len() {
        for b in a + 1..roots.len() {
            let (za, zb) = (roots[a].z, roots[b].z);
            let d = (za - zb).norm();
            if d <= T::lit(10.0 * CLUSTER_TOL) * scale_of(za).max(scale_of(zb)) {
                w.push(format!(
                    "roots {} and {} are {:e} apart, close to the clustering tolerance",
                    za, zb, d
                ));
            }
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Cplx<f64> {
        cplx(re, im)
    }

    fn has_root(set: &RootSet<f64>, z: Cplx<f64>, m: usize, tol: f64) -> bool {
        set.roots
            .iter()
            .any(|r| (r.z - z).norm() <= tol && r.multiplicity == m)
    }

    #[test]
    fn trims_leading_zeros() {
        let p = Polynomial::new(vec![c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(p.degree(), Some(1));
        assert!(Polynomial::<f64>::new(vec![c(0.0, 0.0)]).is_zero());
    }

    #[test]
    fn quadratic_roots() {
        let p = Polynomial::from_real(&[-1.0, 0.0, 1.0]);
        let r = p.roots().unwrap();
        assert_eq!(r.roots.len(), 2);
        assert!(has_root(&r, c(1.0, 0.0), 1, 1e-14));
        assert!(has_root(&r, c(-1.0, 0.0), 1, 1e-14));
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn exact_zero_roots_are_counted() {
        let p = Polynomial::from_real(&[0.0, 0.0, 0.0, 1.0, 1.0]);
        let r = p.roots().unwrap();
        assert!(has_root(&r, c(0.0, 0.0), 3, 0.0));
        assert!(has_root(&r, c(-1.0, 0.0), 1, 1e-14));
    }

    #[test]
    fn multiple_roots_are_clustered() {
        let roots = [c(0.5, 0.2), c(0.5, 0.2), c(0.5, 0.2), c(-1.0, 1.0), c(-1.0, 1.0), c(2.0, 0.0)];
        let p = Polynomial::from_roots(&roots, c(1.5, -0.5));
        let r = p.roots().unwrap();
        assert_eq!(r.roots.len(), 3, "{:?}", r.roots);
        assert!(has_root(&r, c(0.5, 0.2), 3, 1e-10));
        assert!(has_root(&r, c(-1.0, 1.0), 2, 1e-10));
        assert!(has_root(&r, c(2.0, 0.0), 1, 1e-12));
    }

    #[test]
    fn close_but_distinct_roots_stay_apart() {
        let p = Polynomial::from_roots(&[c(1.0, 0.0), c(1.001, 0.0), c(-2.0, 0.5)], c(1.0, 0.0));
        let r = p.roots().unwrap();
        assert_eq!(r.roots.len(), 3);
        assert!(has_root(&r, c(1.001, 0.0), 1, 1e-10));
    }

    #[test]
    fn taylor_coefficients() {
        // (z − 1)^2 (z + 2) = z³ − 3z + 2
        let p = Polynomial::from_real(&[2.0, -3.0, 0.0, 1.0]);
        let b = p.taylor_at(c(1.0, 0.0));
        assert!(b[0].norm() < 1e-15 && b[1].norm() < 1e-15);
        assert!((b[2] - c(3.0, 0.0)).norm() < 1e-15);
        assert!((b[3] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn derivative_and_reverse() {
        let p = Polynomial::from_real(&[1.0, 2.0, 3.0]);
        assert_eq!(p.derivative(), Polynomial::from_real(&[2.0, 6.0]));
        assert_eq!(p.reversed(), Polynomial::from_real(&[3.0, 2.0, 1.0]));
        let (v, dv) = p.eval_with_derivative(c(0.0, 1.0));
        assert_eq!(v, c(-2.0, 2.0));
        assert_eq!(dv, c(2.0, 6.0));
    }

    #[test]
    fn zero_polynomial_has_no_roots() {
        assert_eq!(Polynomial::<f64>::new(vec![]).roots(), Err(PolyError::Zero));
    }

    #[test]
    fn constant_has_empty_root_set() {
        let r = Polynomial::from_real(&[3.0f64]).roots().unwrap();
        assert!(r.roots.is_empty());
    }
}
