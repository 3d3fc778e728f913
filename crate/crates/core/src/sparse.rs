//! Sparse complex operators and largest-singular-value estimation.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SparseError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("norm estimate did not converge within {0} operator applications")]
    NoConvergence(usize),
    #[error("operator has dimension zero")]
    EmptyOperator,
}

/// Square sparse operator with entries kept in `(row, column)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    entries: BTreeMap<(usize, usize), Complex64>,
}

impl SparseOperator {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![Complex64::new(1.0, 0.0); dim])
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        let mut op = Self::zero(values.len());
        for (i, v) in values.iter().enumerate() {
            op.add_entry(i, i, *v);
        }
        op
    }

    pub fn from_entries(
        dim: usize,
        entries: impl IntoIterator<Item = ((usize, usize), Complex64)>,
    ) -> Self {
        let mut op = Self::zero(dim);
        for ((r, c), v) in entries {
            op.add_entry(r, c, v);
        }
        op
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &Complex64)> {
        self.entries.iter()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries.get(&(row, col)).copied().unwrap_or_default()
    }

    /// Adds `v` to entry `(row, col)`; entries that cancel exactly are removed.
    pub fn add_entry(&mut self, row: usize, col: usize, v: Complex64) {
        assert!(row < self.dim && col < self.dim, "entry out of range");
        if v == Complex64::default() {
            return;
        }
        let e = self.entries.entry((row, col)).or_default();
        *e += v;
        if *e == Complex64::default() {
            self.entries.remove(&(row, col));
        }
    }

    fn check(&self, other: &Self) -> Result<(), SparseError> {
        if self.dim != other.dim {
            return Err(SparseError::DimensionMismatch(self.dim, other.dim));
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|(&(r, c), v)| ((c, r), v.conj()))
                .collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_entries(self.dim, self.entries.iter().map(|(&k, v)| (k, v * s)))
    }

    pub fn add(&self, other: &Self) -> Result<Self, SparseError> {
        self.check(other)?;
        let mut out = self.clone();
        for (&(r, c), v) in &other.entries {
            out.add_entry(r, c, *v);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SparseError> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, SparseError> {
        self.check(other)?;
        let mut rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); self.dim];
        for (&(r, c), v) in &other.entries {
            rows[r].push((c, *v));
        }
        let mut acc: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
        for (&(r, k), a) in &self.entries {
            for &(c, b) in &rows[k] {
                *acc.entry((r, c)).or_default() += a * b;
            }
        }
        acc.retain(|_, v| *v != Complex64::default());
        Ok(Self {
            dim: self.dim,
            entries: acc,
        })
    }

    /// Product of a sequence of operators, identity for an empty sequence.
    pub fn product<'a>(
        dim: usize,
        factors: impl IntoIterator<Item = &'a SparseOperator>,
    ) -> Result<Self, SparseError> {
        let mut out = Self::identity(dim);
        for f in factors {
            out = out.mul(f)?;
        }
        Ok(out)
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::default(); self.dim];
        for (&(r, c), v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    /// Keeps only the columns whose index is flagged in `mask`, i.e. the
    /// operator composed with the coordinate projection onto that subspace.
    pub fn restrict_columns(&self, mask: &[bool]) -> Self {
        Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .filter(|(&(_, c), _)| mask[c])
                .map(|(&k, &v)| (k, v))
                .collect(),
        }
    }

    /// Conjugation by the diagonal coordinate projection onto `mask`.
    pub fn compress(&self, mask: &[bool]) -> Self {
        Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .filter(|(&(r, c), _)| mask[r] && mask[c])
                .map(|(&k, &v)| (k, v))
                .collect(),
        }
    }

    /// Drops entries with modulus at most `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .filter(|(_, v)| v.norm() > tol)
                .map(|(&k, &v)| (k, v))
                .collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .values()
            .map(|v| v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (&(r, c), v) in &self.entries {
            m[(r, c)] = *v;
        }
        m
    }
}

/// Compressed row storage used inside the iteration.
struct Csr {
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl Csr {
    fn new(op: &SparseOperator) -> Self {
        let mut row_start = vec![0; op.dim + 1];
        let mut cols = Vec::with_capacity(op.nnz());
        let mut vals = Vec::with_capacity(op.nnz());
        for (&(r, c), v) in &op.entries {
            row_start[r + 1] += 1;
            cols.push(c);
            vals.push(*v);
        }
        for i in 0..op.dim {
            row_start[i + 1] += row_start[i];
        }
        Self {
            row_start,
            cols,
            vals,
        }
    }

    fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = Complex64::default();
            for k in self.row_start[r]..self.row_start[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value of a sparse operator.
///
/// Runs the power iteration on `B^*B` inside a Krylov basis (Lanczos with
/// full reorthogonalization and explicit restarts from the best Ritz
/// vector). Converged when the Ritz residual falls below `tol · θ`.
#[derive(Debug, Clone, Copy)]
pub struct NormEstimator {
    pub tol: f64,
    pub max_applications: usize,
    pub krylov_dim: usize,
    pub seed: u64,
}

impl Default for NormEstimator {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_applications: 10_000,
            krylov_dim: 80,
            seed: 0x5eed_c0de,
        }
    }
}

impl NormEstimator {
    pub fn estimate(&self, op: &SparseOperator) -> Result<f64, SparseError> {
        let dim = op.dim();
        if dim == 0 {
            return Err(SparseError::EmptyOperator);
        }
        if op.nnz() == 0 {
            return Ok(0.0);
        }
        let fwd = Csr::new(op);
        let bwd = Csr::new(&op.adjoint());
        let mut tmp = vec![Complex64::default(); dim];
        let mut apply_gram = |x: &[Complex64], y: &mut [Complex64]| {
            fwd.apply_into(x, &mut tmp);
            bwd.apply_into(&tmp, y);
        };

        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut q: Vec<Complex64> = (0..dim)
            .map(|_| {
                Complex64::new(
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                )
            })
            .collect();
        let n0 = norm(&q);
        q.iter_mut().for_each(|x| *x /= n0);

        let kmax = self.krylov_dim.min(dim).max(1);
        let mut applications = 0;
        loop {
            let mut basis: Vec<Vec<Complex64>> = vec![q.clone()];
            let mut alphas: Vec<f64> = Vec::new();
            let mut betas: Vec<f64> = Vec::new();
            let mut w = vec![Complex64::default(); dim];
            let mut ritz = (0.0, vec![1.0]);
            for j in 0..kmax {
                apply_gram(&basis[j], &mut w);
                applications += 1;
                let a = dot(&basis[j], &w).re;
                alphas.push(a);
                for _ in 0..2 {
                    for v in &basis {
                        let c = dot(v, &w);
                        w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
                    }
                }
                let b = norm(&w);
                ritz = top_ritz_pair(&alphas, &betas);
                let theta = ritz.0;
                let last = *ritz.1.last().expect("nonempty");
                let residual = b * last.abs();
                if theta <= 0.0 && b <= f64::EPSILON {
                    return Ok(0.0);
                }
                if residual <= self.tol * theta || b <= 1e-14 * theta.max(f64::MIN_POSITIVE) {
                    return Ok(theta.max(0.0).sqrt());
                }
                if applications >= self.max_applications {
                    return Err(SparseError::NoConvergence(applications));
                }
                if j + 1 == kmax {
                    break;
                }
                betas.push(b);
                basis.push(w.iter().map(|x| x / b).collect());
            }
            let mut y = vec![Complex64::default(); dim];
            for (coef, v) in ritz.1.iter().zip(&basis) {
                y.iter_mut().zip(v).for_each(|(acc, x)| *acc += *coef * x);
            }
            let ny = norm(&y);
            q = y.into_iter().map(|x| x / ny).collect();
        }
    }
}

/// Largest eigenpair of the symmetric tridiagonal matrix with diagonal
/// `alphas` and off-diagonal `betas`.
fn top_ritz_pair(alphas: &[f64], betas: &[f64]) -> (f64, Vec<f64>) {
    let k = alphas.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let (idx, theta) =
        eig.eigenvalues
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, v)| {
                if v > best.1 {
                    (i, v)
                } else {
                    best
                }
            });
    (
        theta,
        eig.eigenvectors.column(idx).iter().copied().collect(),
    )
}

/// Operator norm estimate with the default estimator.
pub fn norm_estimate(op: &SparseOperator) -> Result<f64, SparseError> {
    NormEstimator::default().estimate(op)
}

/// Norm used for residual reports: the Frobenius norm when it is already
/// negligible (it bounds the operator norm), otherwise the estimate.
pub fn residual_norm(op: &SparseOperator) -> f64 {
    let fro = op.frobenius_norm();
    if fro <= 1e-9 {
        return fro;
    }
    norm_estimate(op).unwrap_or(fro)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_norm() {
        assert_eq!(norm_estimate(&SparseOperator::zero(5)).unwrap(), 0.0);
        assert_eq!(
            norm_estimate(&SparseOperator::zero(0)),
            Err(SparseError::EmptyOperator)
        );
    }

    #[test]
    fn skew_part_of_diagonal_unitary() {
        let d = SparseOperator::diagonal(&[c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)]);
        let b = d.sub(&d.adjoint()).unwrap();
        assert!((norm_estimate(&b).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn shift_matrix_norm() {
        // Truncated shift on 200 sites: norm 1.
        let s = SparseOperator::from_entries(200, (0..199).map(|i| ((i + 1, i), c(1.0, 0.0))));
        assert!((norm_estimate(&s).unwrap() - 1.0).abs() < 1e-9);
        // S + S^*: 2 cos(π / 201).
        let h = s.add(&s.adjoint()).unwrap();
        let exact = 2.0 * (std::f64::consts::PI / 201.0).cos();
        assert!((norm_estimate(&h).unwrap() - exact).abs() < 1e-8);
    }

    #[test]
    fn matches_dense_singular_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for dim in [3usize, 17, 60, 150] {
            let entries: Vec<_> = (0..dim * 3)
                .map(|k| {
                    let r = (k * 7 + 3) % dim;
                    let col = (k * 13 + 1) % dim;
                    let v = c(
                        StandardNormal.sample(&mut rng),
                        StandardNormal.sample(&mut rng),
                    );
                    ((r, col), v)
                })
                .collect();
            let op = SparseOperator::from_entries(dim, entries);
            let dense = op.to_dense().singular_values().max();
            let est = norm_estimate(&op).unwrap();
            assert!(
                (est - dense).abs() <= 1e-6 * dense,
                "{dim}: {est} vs {dense}"
            );
        }
    }

    #[test]
    fn products_and_adjoints() {
        let a = SparseOperator::from_entries(3, [((0, 1), c(1.0, 2.0)), ((2, 0), c(0.0, 1.0))]);
        let b = SparseOperator::from_entries(3, [((1, 2), c(3.0, 0.0))]);
        let ab = a.mul(&b).unwrap();
        assert_eq!(ab.get(0, 2), c(3.0, 6.0));
        assert_eq!(ab.nnz(), 1);
        let lhs = ab.adjoint();
        let rhs = b.adjoint().mul(&a.adjoint()).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(
            a.mul(&SparseOperator::zero(4)),
            Err(SparseError::DimensionMismatch(3, 4))
        );
    }
}
