//! Experiments on whether the Cuntz-Krieger relations determine the
//! generated C*-algebra.
//!
//! When the shift space has isolated points, two exact finite-dimensional
//! representations are built whose norms disagree on a single element.
//! Otherwise, norms of random gauge polynomials are compared across two
//! different truncated models and across increasing truncations.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use thiserror::Error;

use crate::matrix_subshift::{
    admissible_words, admissible_words_up_to, check_condition_i, forced_states, ConditionIVerdict,
    Word, ZeroOneMatrix,
};
use crate::path_rep::{GeneratorModel, RepError, TruncatedRep, UNIT_RELATION_FLAG};
use crate::sparse::{norm_estimate, residual_norm, SparseError, SparseOperator};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UniquenessError {
    #[error("condition (I) holds, so no norm-gap witness exists")]
    ConditionIHolds,
    #[error("condition (I) fails; the agreement experiment needs it to hold")]
    ConditionIFails,
    #[error(
        "condition (I) fails but some state is not forced; only unions of cycles are supported"
    )]
    UnsupportedShape,
    #[error("truncations must be ascending and at least {min}, got {got:?}")]
    BadTruncations { min: usize, got: Vec<usize> },
    #[error("at least one sample is required")]
    NoSamples,
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Sparse(#[from] SparseError),
}

/// Smallest truncation accepted by the experiments.
pub const MIN_TRUNC: usize = 4;

/// Largest final relative gap still read as agreement.
pub const AGREEMENT_TOLERANCE: f64 = 0.05;

/// Allowed excess of `‖E_0(b)‖` over `‖b‖`, from estimator error.
pub const CONTRACTIVITY_TOLERANCE: f64 = 1e-6;

/// Tolerance on norms and relations of the exact witness assignments.
pub const WITNESS_TOLERANCE: f64 = 1e-12;

/// Number of terms in a sampled gauge polynomial.
const SAMPLE_TERMS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexJson {
    fn from(c: Complex64) -> Self {
        Self { re: c.re, im: c.im }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolynomialTerm {
    pub mu: Word,
    pub nu: Word,
    pub coefficient: ComplexJson,
}

/// `b = Σ c S_μ S_ν^*`; the empty word stands for the identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaugePolynomial {
    pub terms: Vec<PolynomialTerm>,
}

impl GaugePolynomial {
    pub fn new(terms: impl IntoIterator<Item = (Word, Word, Complex64)>) -> Self {
        Self {
            terms: terms
                .into_iter()
                .map(|(mu, nu, c)| PolynomialTerm {
                    mu,
                    nu,
                    coefficient: c.into(),
                })
                .collect(),
        }
    }

    /// `SAMPLE_TERMS` terms with words drawn uniformly from the admissible
    /// words of length `0..=max_len` and standard complex Gaussian
    /// coefficients.
    pub fn random<R: Rng + ?Sized>(a: &ZeroOneMatrix, max_len: usize, rng: &mut R) -> Self {
        let mut pool = vec![Word::default()];
        if max_len > 0 {
            pool.extend(admissible_words_up_to(a, max_len));
        }
        let terms = (0..SAMPLE_TERMS)
            .map(|_| {
                let mu = pool[rng.random_range(0..pool.len())].clone();
                let nu = pool[rng.random_range(0..pool.len())].clone();
                let c = Complex64::new(
                    StandardNormal.sample(&mut *rng),
                    StandardNormal.sample(&mut *rng),
                );
                (mu, nu, c)
            })
            .collect::<Vec<_>>();
        Self::new(terms)
    }

    /// Gauge degrees `|μ| − |ν|` of the terms, sorted and deduplicated.
    pub fn degrees(&self) -> Vec<i64> {
        let mut d: Vec<i64> = self
            .terms
            .iter()
            .map(|t| t.mu.len() as i64 - t.nu.len() as i64)
            .collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    pub fn operator<M: GeneratorModel + ?Sized>(&self, model: &M) -> SparseOperator {
        let mut out = SparseOperator::zero(model.dim());
        for t in &self.terms {
            let c = Complex64::new(t.coefficient.re, t.coefficient.im);
            out = out
                .add(&model.monomial(&t.mu, &t.nu).scale(c))
                .expect("same dimension");
        }
        out
    }
}

/// Words of length exactly `L`; `S_i` prepends `i` and drops the last
/// symbol, weighted by `k^{-1/2}` with `k` the out-degree of the symbol that
/// becomes last. This is the compression of the representation on the
/// Markov measure with uniform transitions to functions of the first `L`
/// coordinates, so every relation holds except `S_i^*S_i = Σ A(i,j) P_j`
/// near the far end.
#[derive(Debug, Clone)]
pub struct CylinderRep {
    matrix: ZeroOneMatrix,
    trunc: usize,
    basis: Vec<Word>,
    generators: Vec<SparseOperator>,
}

impl CylinderRep {
    pub fn build(matrix: &ZeroOneMatrix, trunc: usize) -> Result<Self, UniquenessError> {
        if trunc < 2 {
            return Err(RepError::TruncationTooSmall(trunc).into());
        }
        let basis = admissible_words(matrix, trunc).expect("trunc >= 1");
        let index: std::collections::HashMap<&Word, usize> =
            basis.iter().enumerate().map(|(k, w)| (w, k)).collect();
        let dim = basis.len();
        let generators = (0..matrix.n())
            .map(|i| {
                let mut s = SparseOperator::zero(dim);
                for (col, w) in basis.iter().enumerate() {
                    if !matrix.allows(i, w.first().expect("nonempty")) {
                        continue;
                    }
                    let kept = w.prefix(trunc - 1);
                    let k = matrix.out_degree(kept.last().expect("trunc >= 2"));
                    let target = kept.prepended(i);
                    s.add_entry(
                        index[&target],
                        col,
                        Complex64::new(1.0 / (k as f64).sqrt(), 0.0),
                    );
                }
                s
            })
            .collect();
        Ok(Self {
            matrix: matrix.clone(),
            trunc,
            basis,
            generators,
        })
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn basis(&self) -> &[Word] {
        &self.basis
    }
}

impl GeneratorModel for CylinderRep {
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

/// Explicit operators for each generator.
#[derive(Debug, Clone)]
pub struct FiniteAssignment {
    matrix: ZeroOneMatrix,
    dim: usize,
    generators: Vec<SparseOperator>,
}

impl GeneratorModel for FiniteAssignment {
    fn matrix(&self) -> &ZeroOneMatrix {
        &self.matrix
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn generator(&self, i: usize) -> &SparseOperator {
        &self.generators[i]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measurement {
    /// Truncation length, absent for exact assignments.
    pub trunc: Option<usize>,
    /// One norm estimate per representation, in report order.
    pub norms: Vec<f64>,
    pub gap: f64,
    pub relative_gap: f64,
}

impl Measurement {
    fn new(trunc: Option<usize>, norms: Vec<f64>) -> Self {
        let hi = norms.iter().copied().fold(0.0, f64::max);
        let lo = norms.iter().copied().fold(f64::INFINITY, f64::min);
        let gap = if norms.is_empty() { 0.0 } else { hi - lo };
        Self {
            trunc,
            relative_gap: if hi > 0.0 { gap / hi } else { 0.0 },
            gap,
            norms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub element: GaugePolynomial,
    pub measurements: Vec<Measurement>,
    /// Whether the relative gap never grows with the truncation.
    pub gaps_nonincreasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssignmentResidual {
    pub representation: String,
    pub relation: String,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conclusion {
    GapWitness,
    Agreement,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub matrix: ZeroOneMatrix,
    pub condition_i: ConditionIVerdict,
    pub representations: Vec<String>,
    pub seed: Option<u64>,
    pub tolerance: f64,
    pub experiments: Vec<ExperimentRecord>,
    pub relation_residuals: Vec<AssignmentResidual>,
    pub divergence_flags: Vec<String>,
    pub conclusion: Conclusion,
}

impl UniquenessReport {
    /// Largest relative gap at the last truncation (or the only
    /// measurement) over all experiments.
    pub fn final_relative_gap(&self) -> f64 {
        self.experiments
            .iter()
            .filter_map(|e| e.measurements.last())
            .map(|m| m.relative_gap)
            .fold(0.0, f64::max)
    }
}

fn next_state(a: &ZeroOneMatrix, i: usize) -> usize {
    a.successors(i).next().expect("no zero rows")
}

/// The cycle through `start` in a matrix whose states are all forced.
fn cycle_from(a: &ZeroOneMatrix, start: usize) -> Vec<usize> {
    let mut cycle = vec![start];
    let mut cur = next_state(a, start);
    while cur != start {
        cycle.push(cur);
        cur = next_state(a, cur);
    }
    cycle
}

fn kron_diag(op: &SparseOperator, diag: &[Complex64]) -> SparseOperator {
    let m = diag.len();
    SparseOperator::from_entries(
        op.dim() * m,
        op.entries().flat_map(|(&(r, c), &v)| {
            diag.iter()
                .enumerate()
                .filter(|(_, d)| d.norm() > 0.0)
                .map(move |(k, d)| ((r * m + k, c * m + k), v * d))
        }),
    )
}

fn assignment_residuals(name: &str, model: &dyn GeneratorModel) -> Vec<AssignmentResidual> {
    model
        .relation_operators()
        .into_iter()
        .map(|(relation, op)| AssignmentResidual {
            representation: name.to_string(),
            relation,
            residual: residual_norm(&op),
        })
        .collect()
}

/// For a matrix whose shift space is a finite union of cycles, builds two
/// exact representations: the permutation representation `S_i = |i⟩⟨h(i)|`
/// and a twisted copy where the first generator of each cycle carries the
/// factor `diag(1, i, −1, −i)`. The word `c` around the first cycle gives
/// `w = S_c − S_c^*` with norm 0 in the first and 2 in the second.
pub fn norm_gap_witness(a: &ZeroOneMatrix) -> Result<UniquenessReport, UniquenessError> {
    let verdict = check_condition_i(a);
    if verdict.holds {
        return Err(UniquenessError::ConditionIHolds);
    }
    let n = a.n();
    if forced_states(a).len() != n {
        return Err(UniquenessError::UnsupportedShape);
    }
    let one = Complex64::new(1.0, 0.0);
    let plain: Vec<SparseOperator> = (0..n)
        .map(|i| SparseOperator::from_entries(n, [((i, next_state(a, i)), one)]))
        .collect();

    let mut cycle_heads = Vec::new();
    let mut seen = vec![false; n];
    for s in 0..n {
        if !seen[s] {
            let c = cycle_from(a, s);
            for &x in &c {
                seen[x] = true;
            }
            cycle_heads.push(s);
        }
    }
    let twist = [
        one,
        Complex64::new(0.0, 1.0),
        -one,
        Complex64::new(0.0, -1.0),
    ];
    let flat = [one; 4];
    let twisted: Vec<SparseOperator> = plain
        .iter()
        .enumerate()
        .map(|(i, s)| {
            kron_diag(
                s,
                if cycle_heads.contains(&i) {
                    &twist
                } else {
                    &flat
                },
            )
        })
        .collect();

    let rep1 = FiniteAssignment {
        matrix: a.clone(),
        dim: n,
        generators: plain,
    };
    let rep2 = FiniteAssignment {
        matrix: a.clone(),
        dim: 4 * n,
        generators: twisted,
    };

    let cycle = Word::new(cycle_from(a, 0), a).expect("a cycle is admissible");
    let w = GaugePolynomial::new([
        (cycle.clone(), Word::default(), one),
        (Word::default(), cycle, -one),
    ]);
    let norms = vec![
        norm_estimate(&w.operator(&rep1))?,
        norm_estimate(&w.operator(&rep2))?,
    ];
    let m = Measurement::new(None, norms);
    let conclusion = if m.gap > WITNESS_TOLERANCE {
        Conclusion::GapWitness
    } else {
        Conclusion::Inconclusive
    };
    let mut relation_residuals = assignment_residuals("permutation", &rep1);
    relation_residuals.extend(assignment_residuals("twisted", &rep2));
    Ok(UniquenessReport {
        matrix: a.clone(),
        condition_i: verdict,
        representations: vec!["permutation".into(), "twisted".into()],
        seed: None,
        tolerance: WITNESS_TOLERANCE,
        experiments: vec![ExperimentRecord {
            element: w,
            measurements: vec![m],
            gaps_nonincreasing: true,
        }],
        relation_residuals,
        divergence_flags: vec![UNIT_RELATION_FLAG.to_string()],
        conclusion,
    })
}

fn check_truncations(l_values: &[usize]) -> Result<(), UniquenessError> {
    let ok = !l_values.is_empty()
        && l_values[0] >= MIN_TRUNC
        && l_values.windows(2).all(|w| w[0] < w[1]);
    if ok {
        Ok(())
    } else {
        Err(UniquenessError::BadTruncations {
            min: MIN_TRUNC,
            got: l_values.to_vec(),
        })
    }
}

/// Longest word used in sampled elements: gauge degrees stay within
/// `[−2, 2]` and levels within `L − 3` for the smallest truncation.
pub fn sample_word_length(min_trunc: usize) -> usize {
    2.min(min_trunc.saturating_sub(3))
}

/// Compares norm estimates of random gauge polynomials in the prepend
/// model and the cylinder model for each truncation in `l_values`.
pub fn agreement_experiment(
    a: &ZeroOneMatrix,
    l_values: &[usize],
    samples: usize,
    seed: u64,
) -> Result<UniquenessReport, UniquenessError> {
    let verdict = check_condition_i(a);
    if !verdict.holds {
        return Err(UniquenessError::ConditionIFails);
    }
    check_truncations(l_values)?;
    if samples == 0 {
        return Err(UniquenessError::NoSamples);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_len = sample_word_length(l_values[0]);
    let elements: Vec<GaugePolynomial> = (0..samples)
        .map(|_| GaugePolynomial::random(a, max_len, &mut rng))
        .collect();

    let mut table: Vec<Vec<Measurement>> = vec![Vec::new(); samples];
    for &l in l_values {
        let prepend = TruncatedRep::build(a, l)?;
        let cylinder = CylinderRep::build(a, l)?;
        for (row, b) in table.iter_mut().zip(&elements) {
            let norms = vec![
                norm_estimate(&b.operator(&prepend))?,
                norm_estimate(&b.operator(&cylinder))?,
            ];
            row.push(Measurement::new(Some(l), norms));
        }
    }

    let experiments: Vec<ExperimentRecord> = elements
        .into_iter()
        .zip(table)
        .map(|(element, measurements)| ExperimentRecord {
            gaps_nonincreasing: measurements
                .windows(2)
                .all(|w| w[1].relative_gap <= w[0].relative_gap + 1e-12),
            element,
            measurements,
        })
        .collect();
    let agree = experiments.iter().all(|e| {
        e.measurements
            .last()
            .is_some_and(|m| m.relative_gap <= AGREEMENT_TOLERANCE)
    });
    Ok(UniquenessReport {
        matrix: a.clone(),
        condition_i: verdict,
        representations: vec!["prepend".into(), "cylinder".into()],
        seed: Some(seed),
        tolerance: AGREEMENT_TOLERANCE,
        experiments,
        relation_residuals: Vec::new(),
        divergence_flags: vec![UNIT_RELATION_FLAG.to_string()],
        conclusion: if agree {
            Conclusion::Agreement
        } else {
            Conclusion::Inconclusive
        },
    })
}

/// `max_b (‖E_0(b)‖ − ‖b‖)` over random gauge polynomials in the prepend
/// model at truncation `trunc`.
pub fn expectation_contractivity(
    a: &ZeroOneMatrix,
    trunc: usize,
    samples: usize,
    seed: u64,
) -> Result<f64, UniquenessError> {
    check_truncations(&[trunc])?;
    let rep = TruncatedRep::build(a, trunc)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_len = sample_word_length(trunc);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let b = GaugePolynomial::random(a, max_len, &mut rng).operator(&rep);
        let e0 = rep.spectral_projection(&b, 0)?;
        worst = worst.max(norm_estimate(&e0)? - norm_estimate(&b)?);
    }
    Ok(if worst.is_finite() { worst } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<i64>]) -> ZeroOneMatrix {
        ZeroOneMatrix::new(rows).unwrap()
    }

    #[test]
    fn cylinder_projections_are_exact() {
        for a in [
            ZeroOneMatrix::full(2).unwrap(),
            m(&[vec![1, 1], vec![1, 0]]),
        ] {
            let rep = CylinderRep::build(&a, 5).unwrap();
            let ops = rep.relation_operators();
            let unit = &ops.last().unwrap().1;
            assert!(unit.max_abs() <= 1e-15);
            for (label, op) in &ops {
                if label.ends_with("= 0") {
                    assert!(op.max_abs() <= 1e-15, "{label}");
                }
            }
            for i in 0..a.n() {
                let p = rep.range_projection(i);
                assert!(p.mul(&p).unwrap().sub(&p).unwrap().max_abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn cylinder_generators_are_partial_isometries() {
        let a = m(&[vec![1, 1, 1], vec![1, 0, 0], vec![0, 1, 0]]);
        let rep = CylinderRep::build(&a, 4).unwrap();
        for i in 0..3 {
            let s = rep.generator(i);
            let q = s.adjoint().mul(s).unwrap();
            assert!(q.mul(&q).unwrap().sub(&q).unwrap().max_abs() <= 1e-14);
        }
    }

    #[test]
    fn projection_norm_is_one_in_both_models() {
        let a = ZeroOneMatrix::full(2).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let p1 = GaugePolynomial::new([(
            Word::new(vec![0], &a).unwrap(),
            Word::new(vec![0], &a).unwrap(),
            one,
        )]);
        for l in [4, 6] {
            let n1 = norm_estimate(&p1.operator(&TruncatedRep::build(&a, l).unwrap())).unwrap();
            let n2 = norm_estimate(&p1.operator(&CylinderRep::build(&a, l).unwrap())).unwrap();
            assert!((n1 - 1.0).abs() < 1e-9 && (n2 - 1.0).abs() < 1e-9);
        }
        let zero = GaugePolynomial::new([]);
        assert_eq!(
            norm_estimate(&zero.operator(&CylinderRep::build(&a, 4).unwrap())).unwrap(),
            0.0
        );
    }

    #[test]
    fn witness_identity() {
        let r = norm_gap_witness(&ZeroOneMatrix::identity(2).unwrap()).unwrap();
        let norms = &r.experiments[0].measurements[0].norms;
        assert!(norms[0].abs() <= 1e-12);
        assert!((norms[1] - 2.0).abs() <= 1e-12);
        assert_eq!(r.conclusion, Conclusion::GapWitness);
        assert!(r.relation_residuals.iter().all(|x| x.residual <= 1e-12));
    }

    #[test]
    fn witness_swap() {
        let r = norm_gap_witness(&m(&[vec![0, 1], vec![1, 0]])).unwrap();
        let e = &r.experiments[0];
        assert_eq!(e.element.terms[0].mu.len(), 2);
        let norms = &e.measurements[0].norms;
        assert!(norms[0].abs() <= 1e-12 && (norms[1] - 2.0).abs() <= 1e-12);
        assert!(r.relation_residuals.iter().all(|x| x.residual <= 1e-12));
    }

    #[test]
    fn witness_preconditions() {
        assert_eq!(
            norm_gap_witness(&ZeroOneMatrix::full(2).unwrap()).unwrap_err(),
            UniquenessError::ConditionIHolds
        );
        // A forced loop at state 2 reachable from a branching state 1.
        let mixed = m(&[vec![1, 1], vec![0, 1]]);
        assert_eq!(
            norm_gap_witness(&mixed).unwrap_err(),
            UniquenessError::UnsupportedShape
        );
    }

    #[test]
    fn agreement_preconditions() {
        let id = ZeroOneMatrix::identity(2).unwrap();
        assert_eq!(
            agreement_experiment(&id, &[4], 1, 0).unwrap_err(),
            UniquenessError::ConditionIFails
        );
        let full = ZeroOneMatrix::full(2).unwrap();
        assert!(matches!(
            agreement_experiment(&full, &[6, 4], 1, 0),
            Err(UniquenessError::BadTruncations { .. })
        ));
        assert!(matches!(
            agreement_experiment(&full, &[3], 1, 0),
            Err(UniquenessError::BadTruncations { .. })
        ));
        assert_eq!(
            agreement_experiment(&full, &[4], 0, 0).unwrap_err(),
            UniquenessError::NoSamples
        );
    }

    #[test]
    fn sampled_degrees_in_band() {
        let a = ZeroOneMatrix::full(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let b = GaugePolynomial::random(&a, sample_word_length(6), &mut rng);
            assert!(b.degrees().iter().all(|d| (-2..=2).contains(d)));
        }
        assert_eq!(sample_word_length(4), 1);
        assert_eq!(sample_word_length(8), 2);
    }

    #[test]
    fn contractivity_small() {
        let a = ZeroOneMatrix::full(2).unwrap();
        assert!(expectation_contractivity(&a, 5, 10, 3).unwrap() <= CONTRACTIVITY_TOLERANCE);
    }
}
