//! Truncated path-space representation of the Cuntz-Krieger generators.
//!
//! The basis is every admissible word of length `1..=L`; `S_i` prepends
//! `i` and kills words that are already of length `L`. The empty word is
//! not part of the basis, so the relations carry a defect on length-one
//! words (bottom) and on length-`L` words (top). Both loci are reported
//! rather than patched.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::af_core::LevelElement;
use crate::matrix_subshift::{admissible_words_up_to, Word, ZeroOneMatrix};
use crate::sparse::{residual_norm, SparseError, SparseOperator};
use crate::tolerance;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RepError {
    #[error("truncation length {0} is below the minimum of 3")]
    TruncationTooSmall(usize),
    #[error("level {level} exceeds what truncation {trunc} can represent")]
    LevelExceedsTruncation { level: usize, trunc: usize },
    #[error("operator is not of pure gauge degree {0}")]
    NotPureDegree(i64),
    #[error(transparent)]
    Sparse(#[from] SparseError),
}

/// Anything that assigns operators to the generators `S_1..S_n`.
pub trait GeneratorModel {
    fn matrix(&self) -> &ZeroOneMatrix;
    fn dim(&self) -> usize;
    /// `S_i` for a 0-based symbol `i`.
    fn generator(&self, i: usize) -> &SparseOperator;

    /// `S_μ = S_{μ_1} ⋯ S_{μ_k}`; the identity for the empty word.
    fn word_operator(&self, mu: &Word) -> SparseOperator {
        SparseOperator::product(self.dim(), mu.symbols().iter().map(|&i| self.generator(i)))
            .expect("generators share the model dimension")
    }

    /// `S_μ S_ν^*`.
    fn monomial(&self, mu: &Word, nu: &Word) -> SparseOperator {
        self.word_operator(mu)
            .mul(&self.word_operator(nu).adjoint())
            .expect("same dimension")
    }

    /// `P_j = S_j S_j^*`.
    fn range_projection(&self, j: usize) -> SparseOperator {
        let s = self.generator(j);
        s.mul(&s.adjoint()).expect("same dimension")
    }

    /// Operators that vanish in an exact representation of the relations
    /// (including the unit relation `Σ_j P_j = 1`), with readable labels.
    fn relation_operators(&self) -> Vec<(String, SparseOperator)> {
        let a = self.matrix();
        let n = a.n();
        let dim = self.dim();
        let projections: Vec<SparseOperator> = (0..n).map(|j| self.range_projection(j)).collect();
        let mut out = Vec::new();
        for i in 0..n {
            let s = self.generator(i);
            let mut rhs = SparseOperator::zero(dim);
            for j in a.successors(i) {
                rhs = rhs.add(&projections[j]).expect("same dimension");
            }
            let lhs = s.adjoint().mul(s).expect("same dimension");
            out.push((
                format!("S{}*S{} = sum_j A({},j) P_j", i + 1, i + 1, i + 1),
                lhs.sub(&rhs).expect("same dimension"),
            ));
        }
        for i in 0..n {
            for k in 0..n {
                if i != k {
                    let r = self
                        .generator(i)
                        .adjoint()
                        .mul(self.generator(k))
                        .expect("same dimension");
                    out.push((format!("S{}*S{} = 0", i + 1, k + 1), r));
                }
            }
        }
        let mut total = SparseOperator::zero(dim);
        for p in &projections {
            total = total.add(p).expect("same dimension");
        }
        out.push((
            "sum_j P_j = 1".to_string(),
            total
                .sub(&SparseOperator::identity(dim))
                .expect("same dimension"),
        ));
        out
    }
}

/// Residual of one relation, split by basis-word length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationResidual {
    pub relation: String,
    pub interior_residual: f64,
    pub boundary_residual: f64,
    pub interior_range: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub trunc: usize,
    pub dimension: usize,
    pub relations: Vec<RelationResidual>,
    pub divergence_flags: Vec<String>,
}

impl ResidualReport {
    pub fn max_interior(&self) -> f64 {
        self.relations
            .iter()
            .map(|r| r.interior_residual)
            .fold(0.0, f64::max)
    }
}

/// Flag carried by every report that uses `Σ_j S_j S_j^* = 1`.
pub const UNIT_RELATION_FLAG: &str = "unit_relation_adopted";

/// The gauge unitary `|μ⟩ ↦ λ^{|μ|} |μ⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeUnitary {
    lambda: Complex64,
}

impl GaugeUnitary {
    /// Normalizes `lambda` onto the unit circle.
    pub fn new(lambda: Complex64) -> Self {
        Self {
            lambda: lambda / lambda.norm(),
        }
    }

    pub fn at_angle(theta: f64) -> Self {
        Self {
            lambda: Complex64::from_polar(1.0, theta),
        }
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn operator(&self, rep: &TruncatedRep) -> SparseOperator {
        let diag: Vec<Complex64> = rep
            .lengths
            .iter()
            .map(|&len| self.lambda.powu(len as u32))
            .collect();
        SparseOperator::diagonal(&diag)
    }

    /// `γ_λ(b) = U b U^*`.
    pub fn conjugate(
        &self,
        b: &SparseOperator,
        rep: &TruncatedRep,
    ) -> Result<SparseOperator, RepError> {
        let u = self.operator(rep);
        Ok(u.mul(b)?.mul(&u.adjoint())?)
    }
}

#[derive(Debug, Clone)]
pub struct TruncatedRep {
    matrix: ZeroOneMatrix,
    trunc: usize,
    basis: Vec<Word>,
    index: HashMap<Word, usize>,
    lengths: Vec<usize>,
    generators: Vec<SparseOperator>,
}

impl TruncatedRep {
    pub fn build(matrix: &ZeroOneMatrix, trunc: usize) -> Result<Self, RepError> {
        if trunc < 3 {
            return Err(RepError::TruncationTooSmall(trunc));
        }
        let basis = admissible_words_up_to(matrix, trunc);
        let index: HashMap<Word, usize> = basis
            .iter()
            .enumerate()
            .map(|(k, w)| (w.clone(), k))
            .collect();
        let lengths: Vec<usize> = basis.iter().map(Word::len).collect();
        let dim = basis.len();
        let one = Complex64::new(1.0, 0.0);
        let generators = (0..matrix.n())
            .map(|i| {
                let mut s = SparseOperator::zero(dim);
                for (col, w) in basis.iter().enumerate() {
                    if w.len() < trunc && matrix.allows(i, w.first().expect("nonempty")) {
                        s.add_entry(index[&w.prepended(i)], col, one);
                    }
                }
                s
            })
            .collect();
        Ok(Self {
            matrix: matrix.clone(),
            trunc,
            basis,
            index,
            lengths,
            generators,
        })
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn basis(&self) -> &[Word] {
        &self.basis
    }

    pub fn index_of(&self, w: &Word) -> Option<usize> {
        self.index.get(w).copied()
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    /// Coordinate mask of basis words with `lo ≤ |μ| ≤ hi`.
    pub fn length_mask(&self, lo: usize, hi: usize) -> Vec<bool> {
        self.lengths.iter().map(|&l| lo <= l && l <= hi).collect()
    }

    /// Interior ranges on which each relation holds exactly:
    /// the range relation needs a prefix to strip and room to prepend,
    /// the unit relation needs a first symbol plus a nonempty tail.
    fn interior_for(&self, relation: &str) -> [usize; 2] {
        if relation.starts_with("sum_j") {
            [2, self.trunc]
        } else if relation.ends_with("= 0") {
            [1, self.trunc]
        } else {
            [2, self.trunc - 1]
        }
    }

    /// Splits `op` into its action on the interior span and on the rest.
    pub fn split_residual(&self, op: &SparseOperator, interior: [usize; 2]) -> (f64, f64) {
        let mask = self.length_mask(interior[0], interior[1]);
        let inside = op.restrict_columns(&mask);
        let outside_mask: Vec<bool> = mask.iter().map(|b| !b).collect();
        let outside = op.restrict_columns(&outside_mask);
        (residual_norm(&inside), residual_norm(&outside))
    }

    pub fn relation_residuals(&self) -> ResidualReport {
        let relations = self
            .relation_operators()
            .into_iter()
            .map(|(relation, op)| {
                let interior_range = self.interior_for(&relation);
                let (interior_residual, boundary_residual) =
                    self.split_residual(&op, interior_range);
                RelationResidual {
                    relation,
                    interior_residual,
                    boundary_residual,
                    interior_range,
                }
            })
            .collect();
        ResidualReport {
            trunc: self.trunc,
            dimension: self.dim(),
            relations,
            divergence_flags: vec![UNIT_RELATION_FLAG.to_string()],
        }
    }

    /// Number of roots of unity used by the gauge average.
    pub fn quadrature_points(&self) -> usize {
        2 * self.trunc + 1
    }

    /// `E_n(b) = ∫ γ_λ(b) λ^{-n} dλ`, discretized on the `2L+1`-th roots of
    /// unity. Entry degrees lie in `[-(L-1), L-1]`, so no aliasing occurs and
    /// the average is the exact degree-`n` part up to rounding, which is
    /// cleared below `1e-13 · max|b|`.
    pub fn spectral_projection(
        &self,
        b: &SparseOperator,
        n: i64,
    ) -> Result<SparseOperator, RepError> {
        if b.dim() != self.dim() {
            return Err(SparseError::DimensionMismatch(b.dim(), self.dim()).into());
        }
        let m = self.quadrature_points();
        let mut acc = SparseOperator::zero(self.dim());
        for t in 0..m {
            let theta = 2.0 * PI * t as f64 / m as f64;
            let u = GaugeUnitary::at_angle(theta);
            let weight = Complex64::from_polar(1.0 / m as f64, -(n as f64) * theta);
            acc = acc.add(&u.conjugate(b, self)?.scale(weight))?;
        }
        Ok(acc.pruned(tolerance::ROUNDOFF_PRUNE * b.max_abs()))
    }

    /// Whether `b` lies in the degree-`n` spectral subspace.
    pub fn is_pure_degree(&self, b: &SparseOperator, n: i64) -> Result<bool, RepError> {
        let e = self.spectral_projection(b, n)?;
        let scale = b.frobenius_norm().max(1.0);
        Ok(e.sub(b)?.frobenius_norm() <= tolerance::EXACT * scale)
    }

    /// Checks `B_n B_m ⊂ B_{n+m}` and `B_n^* = B_{-n}` on a given pair.
    pub fn grading_check(
        &self,
        a: &SparseOperator,
        deg_a: i64,
        b: &SparseOperator,
        deg_b: i64,
    ) -> Result<bool, RepError> {
        if !self.is_pure_degree(a, deg_a)? {
            return Err(RepError::NotPureDegree(deg_a));
        }
        if !self.is_pure_degree(b, deg_b)? {
            return Err(RepError::NotPureDegree(deg_b));
        }
        let ab = a.mul(b)?;
        Ok(
            self.is_pure_degree(&ab, deg_a + deg_b)?
                && self.is_pure_degree(&a.adjoint(), -deg_a)?,
        )
    }

    /// Realizes `e_{μν}` as `S_μ S_ν^*`: `|ν η⟩ ↦ |μ η⟩` for nonempty `η`.
    pub fn level_element_to_operator(&self, a: &LevelElement) -> Result<SparseOperator, RepError> {
        let k = a.level();
        if k + 1 > self.trunc {
            return Err(RepError::LevelExceedsTruncation {
                level: k,
                trunc: self.trunc,
            });
        }
        let mut op = SparseOperator::zero(self.dim());
        for ((mu, nu), c) in a.terms() {
            for (col, w) in self.basis.iter().enumerate() {
                if w.len() > k && w.starts_with(nu) {
                    let target = mu.concat(&w.suffix_from(k));
                    op.add_entry(self.index[&target], col, *c);
                }
            }
        }
        Ok(op)
    }
}

impl GeneratorModel for TruncatedRep {
    fn matrix(&self) -> &ZeroOneMatrix {
        &self.matrix
    }

    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn generator(&self, i: usize) -> &SparseOperator {
        &self.generators[i]
    }
}
