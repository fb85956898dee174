//! Compressed sparse rows and a solver for singular symmetric systems whose
//! kernel is the constant vector (graph Laplacians of connected meshes).

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    /// Square matrix from `(row, col, value)` triplets. Duplicates are summed
    /// in input order after a stable sort, so assembly is deterministic.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, T)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col = Vec::with_capacity(triplets.len());
        let mut val: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *val.last_mut().unwrap() += v;
            } else {
                col.push(c);
                val.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, col, val }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col[range.clone()].binary_search(&c) {
            Ok(k) => self.val[range.start + k],
            Err(_) => T::zero(),
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .map(|k| self.val[k] * x[self.col[k]])
                    .fold(T::zero(), |a, b| a + b)
            })
            .collect()
    }

    fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution<T> {
    /// Mean-zero solution.
    pub x: Vec<T>,
    /// `‖A x − b‖∞` for the projected right-hand side.
    pub residual: T,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveFailure {
    pub residual: f64,
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + *x * *y)
}

fn inf_norm<T: Scalar>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

pub(crate) fn subtract_mean<T: Scalar>(x: &mut [T]) {
    if x.is_empty() {
        return;
    }
    let mean = x.iter().fold(T::zero(), |s, &v| s + v) / T::from_usize_lossy(x.len());
    for v in x.iter_mut() {
        *v -= mean;
    }
}

/// Solves `A x = b` for symmetric positive semi-definite `A` with kernel
/// spanned by the constant vector. `b` is projected onto mean zero first.
/// Jacobi-preconditioned CG runs until `‖r‖∞ ≤ tol`; if it stalls, a dense
/// pivoted elimination is tried for systems up to 4000 unknowns.
pub fn solve_laplacian<T: Scalar>(
    a: &CsrMatrix<T>,
    b: &[T],
    tol: T,
) -> Result<Solution<T>, SolveFailure> {
    let n = a.dim();
    let mut rhs = b.to_vec();
    subtract_mean(&mut rhs);
    if inf_norm(&rhs) <= tol {
        let x = vec![T::zero(); n];
        let residual = inf_norm(&rhs);
        return Ok(Solution { x, residual, iterations: 0 });
    }
    let cg = pcg(a, &rhs, tol);
    match cg {
        Ok(sol) => Ok(sol),
        Err(fail) if n <= 4000 => dense_solve(a, &rhs, tol).or(Err(fail)),
        Err(fail) => Err(fail),
    }
}

fn true_residual<T: Scalar>(a: &CsrMatrix<T>, x: &[T], b: &[T]) -> T {
    let ax = a.mul_vec(x);
    ax.iter().zip(b).fold(T::zero(), |m, (p, q)| m.max((*p - *q).abs()))
}

fn pcg<T: Scalar>(a: &CsrMatrix<T>, b: &[T], tol: T) -> Result<Solution<T>, SolveFailure> {
    let n = a.dim();
    let max_iter = (10 * n).max(200);
    let diag = a.diagonal();
    let precond = |r: &[T]| -> Vec<T> {
        r.iter()
            .zip(&diag)
            .map(|(x, d)| if *d > T::zero() { *x / *d } else { *x })
            .collect()
    };
    let mut x = vec![T::zero(); n];
    let mut r = b.to_vec();
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut best = (inf_norm(&r), x.clone());
    for it in 1..=max_iter {
        let ap = a.mul_vec(&p);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rn = inf_norm(&r);
        if rn < best.0 {
            best = (rn, x.clone());
        }
        if rn <= tol * T::lit(0.5) {
            subtract_mean(&mut x);
            let residual = true_residual(a, &x, b);
            if residual <= tol {
                return Ok(Solution { x, residual, iterations: it });
            }
            // Recurrence drifted from the true residual; restart from x.
            let ax = a.mul_vec(&x);
            for i in 0..n {
                r[i] = b[i] - ax[i];
            }
            z = precond(&r);
            p = z.clone();
            rz = dot(&r, &z);
            continue;
        }
        z = precond(&r);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let mut x = best.1;
    subtract_mean(&mut x);
    let residual = true_residual(a, &x, b);
    if residual <= tol {
        Ok(Solution { x, residual, iterations: max_iter })
    } else {
        Err(SolveFailure {
            residual: residual.to_f64_lossy(),
        })
    }
}

/// Gaussian elimination with partial pivoting on the system whose last
/// equation is replaced by `Σ x = 0`.
fn dense_solve<T: Scalar>(a: &CsrMatrix<T>, b: &[T], tol: T) -> Result<Solution<T>, SolveFailure> {
    let n = a.dim();
    let mut m = vec![T::zero(); n * n];
    for r in 0..n {
        for k in a.row_ptr[r]..a.row_ptr[r + 1] {
            m[r * n + a.col[k]] = a.val[k];
        }
    }
    let mut rhs = b.to_vec();
    for c in 0..n {
        m[(n - 1) * n + c] = T::one();
    }
    rhs[n - 1] = T::zero();
    let scale = m.iter().fold(T::zero(), |s, x| s.max(x.abs()));
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| m[i * n + k].abs().partial_cmp(&m[j * n + k].abs()).unwrap())
            .unwrap();
        if m[piv * n + k].abs() <= scale * T::epsilon() * T::from_usize_lossy(n) {
            return Err(SolveFailure { residual: f64::INFINITY });
        }
        if piv != k {
            for c in 0..n {
                m.swap(k * n + c, piv * n + c);
            }
            rhs.swap(k, piv);
        }
        for i in k + 1..n {
            let f = m[i * n + k] / m[k * n + k];
            if f != T::zero() {
                for c in k..n {
                    let v = m[k * n + c];
                    m[i * n + c] -= f * v;
                }
                let v = rhs[k];
                rhs[i] -= f * v;
            }
        }
    }
    let mut x = vec![T::zero(); n];
    for k in (0..n).rev() {
        let mut s = rhs[k];
        for c in k + 1..n {
            s -= m[k * n + c] * x[c];
        }
        x[k] = s / m[k * n + k];
    }
    subtract_mean(&mut x);
    let residual = true_residual(a, &x, b);
    if residual <= tol {
        Ok(Solution { x, residual, iterations: 1 })
    } else {
        Err(SolveFailure {
            residual: residual.to_f64_lossy(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_laplacian(n: usize) -> CsrMatrix<f64> {
        let mut t = Vec::new();
        for i in 0..n - 1 {
            t.push((i, i, 1.0));
            t.push((i + 1, i + 1, 1.0));
            t.push((i, i + 1, -1.0));
            t.push((i + 1, i, -1.0));
        }
        CsrMatrix::from_triplets(n, t)
    }

    #[test]
    fn duplicates_are_summed() {
        let a = path_laplacian(4);
        assert_eq!(a.get(1, 1), 2.0);
        assert_eq!(a.get(0, 3), 0.0);
    }

    #[test]
    fn solves_path_laplacian() {
        let a = path_laplacian(50);
        let mut b: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
        subtract_mean(&mut b);
        let s = solve_laplacian(&a, &b, 1e-12).unwrap();
        assert!(s.residual <= 1e-12);
        assert!(s.x.iter().sum::<f64>().abs() < 1e-10);
    }

    #[test]
    fn dense_fallback_agrees() {
        let a = path_laplacian(20);
        let mut b: Vec<f64> = (0..20).map(|i| (i * i % 7) as f64).collect();
        subtract_mean(&mut b);
        let cg = pcg(&a, &b, 1e-11).unwrap();
        let dense = dense_solve(&a, &b, 1e-11).unwrap();
        for (p, q) in cg.x.iter().zip(&dense.x) {
            assert!((p - q).abs() < 1e-9);
        }
    }
}
