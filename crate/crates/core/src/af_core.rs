//! Level algebras of the AF-core.
//!
//! The level-`k` algebra is `⊕_i M_{m_k(i)}`: block `i` is spanned by the
//! matrix units `e_{μν} ↔ S_μ S_ν^*` with `|μ| = |ν| = k` and both words
//! ending in `i`. Products across blocks are pushed one level up with
//! `S_μ S_ν^* = Σ_j A(i,j) S_{μj} S_{νj}^*`, which gives the unital
//! embeddings of the Bratteli diagram.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::SparseSpan;
use crate::matrix_subshift::{admissible_words, Word, WordError, ZeroOneMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AfError {
    #[error("levels differ: {0} vs {1}")]
    LevelMismatch(usize, usize),
    #[error("level must be at least {min}, got {got}")]
    LevelTooLow { min: usize, got: usize },
    #[error("matrix unit ({mu}, {nu}) is not in a level block")]
    NotAMatrixUnit { mu: Word, nu: Word },
    #[error("prefix of length {len} is too short, need {needed}")]
    PrefixTooShort { len: usize, needed: usize },
    #[error(transparent)]
    Word(#[from] WordError),
}

pub type Coefficients = BTreeMap<(Word, Word), Complex64>;

/// Element of the level-`k` algebra, stored by matrix-unit coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelElement {
    level: usize,
    terms: Coefficients,
}

fn is_unit_key(level: usize, mu: &Word, nu: &Word) -> bool {
    level >= 1 && mu.len() == level && nu.len() == level && mu.last() == nu.last()
}

impl LevelElement {
    pub fn zero(level: usize) -> Self {
        Self {
            level,
            terms: BTreeMap::new(),
        }
    }

    /// The matrix unit `e_{μν}`.
    pub fn unit(mu: Word, nu: Word) -> Result<Self, AfError> {
        let level = mu.len();
        if !is_unit_key(level, &mu, &nu) {
            return Err(AfError::NotAMatrixUnit { mu, nu });
        }
        let mut terms = BTreeMap::new();
        terms.insert((mu, nu), Complex64::new(1.0, 0.0));
        Ok(Self { level, terms })
    }

    pub fn from_terms(
        level: usize,
        terms: impl IntoIterator<Item = ((Word, Word), Complex64)>,
    ) -> Result<Self, AfError> {
        let mut out = Self::zero(level);
        for ((mu, nu), c) in terms {
            if !is_unit_key(level, &mu, &nu) {
                return Err(AfError::NotAMatrixUnit { mu, nu });
            }
            out.accumulate(mu, nu, c);
        }
        Ok(out)
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn terms(&self) -> &Coefficients {
        &self.terms
    }

    pub fn coefficient(&self, mu: &Word, nu: &Word) -> Complex64 {
        self.terms
            .get(&(mu.clone(), nu.clone()))
            .copied()
            .unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn accumulate(&mut self, mu: Word, nu: Word, c: Complex64) {
        if c == Complex64::default() {
            return;
        }
        let key = (mu, nu);
        let v = self.terms.entry(key.clone()).or_default();
        *v += c;
        if *v == Complex64::default() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, AfError> {
        if self.level != other.level {
            return Err(AfError::LevelMismatch(self.level, other.level));
        }
        let mut out = self.clone();
        for ((mu, nu), c) in &other.terms {
            out.accumulate(mu.clone(), nu.clone(), *c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AfError> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.level);
        for ((mu, nu), v) in &self.terms {
            out.accumulate(mu.clone(), nu.clone(), v * c);
        }
        out
    }

    /// `e_{μν}^* = e_{νμ}` with conjugated coefficients.
    pub fn adjoint(&self) -> Self {
        Self {
            level: self.level,
            terms: self
                .terms
                .iter()
                .map(|((mu, nu), c)| ((nu.clone(), mu.clone()), c.conj()))
                .collect(),
        }
    }

    /// Matrix-unit calculus `e_{μν} e_{ηζ} = δ_{νη} e_{μζ}`.
    pub fn multiply(&self, other: &Self) -> Result<Self, AfError> {
        if self.level != other.level {
            return Err(AfError::LevelMismatch(self.level, other.level));
        }
        let mut by_row: BTreeMap<&Word, Vec<(&Word, Complex64)>> = BTreeMap::new();
        for ((eta, zeta), c) in &other.terms {
            by_row.entry(eta).or_default().push((zeta, *c));
        }
        let mut out = Self::zero(self.level);
        for ((mu, nu), a) in &self.terms {
            if let Some(row) = by_row.get(nu) {
                for (zeta, b) in row {
                    out.accumulate(mu.clone(), (*zeta).clone(), a * b);
                }
            }
        }
        Ok(out)
    }

    /// Euclidean norm of the coefficient vector.
    pub fn coefficient_norm(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Coefficient norm of `self - other`.
    pub fn distance(&self, other: &Self) -> Result<f64, AfError> {
        Ok(self.sub(other)?.coefficient_norm())
    }

    pub fn to_json(&self) -> LevelElementJson {
        LevelElementJson {
            level: self.level,
            terms: self
                .terms
                .iter()
                .map(|((mu, nu), c)| TermJson {
                    mu: mu.to_one_based(),
                    nu: nu.to_one_based(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }

    pub fn from_json(raw: &LevelElementJson, a: &ZeroOneMatrix) -> Result<Self, AfError> {
        let mut terms = Vec::with_capacity(raw.terms.len());
        for t in &raw.terms {
            let mu = Word::from_one_based(&t.mu, a)?;
            let nu = Word::from_one_based(&t.nu, a)?;
            terms.push(((mu, nu), Complex64::new(t.re, t.im)));
        }
        Self::from_terms(raw.level, terms)
    }
}

/// Wire form: `{"level": k, "terms": [{"mu": [..], "nu": [..], "re": .., "im": ..}]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LevelElementJson {
    pub level: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TermJson {
    pub mu: Vec<usize>,
    pub nu: Vec<usize>,
    pub re: f64,
    pub im: f64,
}

/// Block multiplicities `m_k(i)` for levels `1..=K`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BratteliDims {
    pub levels: Vec<Vec<usize>>,
}

impl BratteliDims {
    /// Multiplicities at level `k` (1-based).
    pub fn at(&self, k: usize) -> &[usize] {
        &self.levels[k - 1]
    }

    /// `dim F^(k) = Σ_i m_k(i)^2`.
    pub fn algebra_dimension(&self, k: usize) -> usize {
        self.at(k).iter().map(|m| m * m).sum()
    }
}

/// `n_j = Σ_i A(i,j)`.
pub fn n_vector(a: &ZeroOneMatrix) -> Vec<usize> {
    a.column_sums()
}

/// Admissible prefix of an infinite path, used to evaluate the product
/// state `ω_x` on finite levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductStatePrefix(Word);

impl ProductStatePrefix {
    pub fn new(word: Word) -> Self {
        Self(word)
    }

    pub fn word(&self) -> &Word {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn shifted(&self) -> Self {
        Self(self.0.shifted())
    }
}

/// Span comparison behind the finite-level hereditary range check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HereditaryReport {
    pub level: usize,
    pub image_dimension: usize,
    pub corner_dimension: usize,
    pub corner_in_image: bool,
    pub image_in_corner: bool,
}

impl HereditaryReport {
    pub fn spans_equal(&self) -> bool {
        self.corner_in_image
            && self.image_in_corner
            && self.image_dimension == self.corner_dimension
    }
}

/// The AF-core of a Cuntz-Krieger matrix, with the endomorphism
/// `α(a) = S a S^*` for `S = Σ_{i,j} n_j^{-1/2} S_i P_j`.
#[derive(Debug, Clone)]
pub struct AfCore {
    matrix: ZeroOneMatrix,
    n_vec: Vec<usize>,
}

impl AfCore {
    pub fn new(matrix: ZeroOneMatrix) -> Self {
        let n_vec = n_vector(&matrix);
        Self { matrix, n_vec }
    }

    pub fn matrix(&self) -> &ZeroOneMatrix {
        &self.matrix
    }

    pub fn n_vector(&self) -> &[usize] {
        &self.n_vec
    }

    pub fn bratteli_dims(&self, max_level: usize) -> BratteliDims {
        let n = self.matrix.n();
        let mut levels = Vec::with_capacity(max_level);
        let mut cur = vec![1usize; n];
        for _ in 0..max_level {
            levels.push(cur.clone());
            let mut next = vec![0; n];
            for (i, &m) in cur.iter().enumerate() {
                for j in self.matrix.successors(i) {
                    next[j] += m;
                }
            }
            cur = next;
        }
        BratteliDims { levels }
    }

    /// Matrix-unit keys at level `k`, grouped by block and ordered.
    pub fn generator_keys(&self, level: usize) -> Result<Vec<(Word, Word)>, AfError> {
        if level == 0 {
            return Err(AfError::LevelTooLow { min: 1, got: 0 });
        }
        let words = admissible_words(&self.matrix, level).expect("level >= 1");
        let mut blocks: BTreeMap<usize, Vec<Word>> = BTreeMap::new();
        for w in words {
            blocks
                .entry(w.last().expect("nonempty"))
                .or_default()
                .push(w);
        }
        let mut keys = Vec::new();
        for block in blocks.values() {
            for mu in block {
                for nu in block {
                    keys.push((mu.clone(), nu.clone()));
                }
            }
        }
        Ok(keys)
    }

    pub fn generators(&self, level: usize) -> Result<Vec<LevelElement>, AfError> {
        self.generator_keys(level)?
            .into_iter()
            .map(|(mu, nu)| LevelElement::unit(mu, nu))
            .collect()
    }

    /// `1_k = Σ_{|μ|=k} e_{μμ}`.
    pub fn identity(&self, level: usize) -> Result<LevelElement, AfError> {
        if level == 0 {
            return Err(AfError::LevelTooLow { min: 1, got: 0 });
        }
        let words = admissible_words(&self.matrix, level).expect("level >= 1");
        LevelElement::from_terms(
            level,
            words
                .into_iter()
                .map(|w| ((w.clone(), w), Complex64::new(1.0, 0.0))),
        )
    }

    /// Random element with standard complex Gaussian coefficients on
    /// `terms` randomly chosen matrix units.
    pub fn random_element<R: Rng + ?Sized>(
        &self,
        level: usize,
        terms: usize,
        rng: &mut R,
    ) -> Result<LevelElement, AfError> {
        let keys = self.generator_keys(level)?;
        let mut out = LevelElement::zero(level);
        for _ in 0..terms {
            let (mu, nu) = keys[rng.random_range(0..keys.len())].clone();
            let c = Complex64::new(
                StandardNormal.sample(&mut *rng),
                StandardNormal.sample(&mut *rng),
            );
            out.accumulate(mu, nu, c);
        }
        Ok(out)
    }

    /// Bratteli embedding `e_{μν} ↦ Σ_j A(i,j) e_{μj,νj}` into level `k+1`.
    pub fn embed(&self, a: &LevelElement) -> LevelElement {
        let mut out = LevelElement::zero(a.level + 1);
        for ((mu, nu), c) in &a.terms {
            let i = mu.last().expect("level >= 1");
            for j in self.matrix.successors(i) {
                out.accumulate(mu.appended(j), nu.appended(j), *c);
            }
        }
        out
    }

    pub fn embed_to(&self, a: &LevelElement, level: usize) -> Result<LevelElement, AfError> {
        if level < a.level {
            return Err(AfError::LevelTooLow {
                min: a.level,
                got: level,
            });
        }
        let mut cur = a.clone();
        while cur.level < level {
            cur = self.embed(&cur);
        }
        Ok(cur)
    }

    /// `α(e_{μν}) = (n_{μ_1} n_{ν_1})^{-1/2} Σ_{i,j} e_{iμ, jν}`, extended
    /// linearly; terms with an inadmissible prepended symbol vanish.
    pub fn alpha(&self, a: &LevelElement) -> LevelElement {
        let mut out = LevelElement::zero(a.level + 1);
        for ((mu, nu), c) in &a.terms {
            let (p, q) = (
                mu.first().expect("level >= 1"),
                nu.first().expect("level >= 1"),
            );
            let weight = 1.0 / ((self.n_vec[p] * self.n_vec[q]) as f64).sqrt();
            for i in self.matrix.predecessors(p) {
                for j in self.matrix.predecessors(q) {
                    out.accumulate(mu.prepended(i), nu.prepended(j), c * weight);
                }
            }
        }
        out
    }

    /// `a ↦ S^* a S` on level `k ≥ 2`:
    /// `S^* e_{μν} S = (n_{μ_2} n_{ν_2})^{-1/2} e_{σμ,σν}` at level `k-1`.
    pub fn compress(&self, a: &LevelElement) -> Result<LevelElement, AfError> {
        if a.level < 2 {
            return Err(AfError::LevelTooLow {
                min: 2,
                got: a.level,
            });
        }
        let mut out = LevelElement::zero(a.level - 1);
        for ((mu, nu), c) in &a.terms {
            let (mu_s, nu_s) = (mu.shifted(), nu.shifted());
            let p = mu_s.first().expect("level >= 2");
            let q = nu_s.first().expect("level >= 2");
            let weight = 1.0 / ((self.n_vec[p] * self.n_vec[q]) as f64).sqrt();
            out.accumulate(mu_s, nu_s, c * weight);
        }
        Ok(out)
    }

    /// `ω_x(a)`: the coefficient of `e_{x[..k], x[..k]}`.
    pub fn product_state_eval(
        &self,
        x: &ProductStatePrefix,
        a: &LevelElement,
    ) -> Result<Complex64, AfError> {
        if x.len() < a.level {
            return Err(AfError::PrefixTooShort {
                len: x.len(),
                needed: a.level,
            });
        }
        let p = x.word().prefix(a.level);
        Ok(a.coefficient(&p, &p))
    }

    /// `|ω_x(α(a)) − n_{x_2}^{-1} ω_{σx}(a)|`.
    pub fn state_pullback_check(
        &self,
        x: &ProductStatePrefix,
        a: &LevelElement,
    ) -> Result<f64, AfError> {
        if x.len() < a.level + 2 {
            return Err(AfError::PrefixTooShort {
                len: x.len(),
                needed: a.level + 2,
            });
        }
        let lhs = self.product_state_eval(x, &self.alpha(a))?;
        let x2 = x.word().symbols()[1];
        let rhs = self.product_state_eval(&x.shifted(), a)? / self.n_vec[x2] as f64;
        Ok((lhs - rhs).norm())
    }

    /// Compares `span{α(g) : g generator at level k}` with
    /// `span{α(1_k) x α(1_k) : x generator at level k+1}`.
    pub fn hereditary_range_check(&self, level: usize) -> Result<HereditaryReport, AfError> {
        let p = self.alpha(&self.identity(level)?);
        let mut image = SparseSpan::new();
        for g in self.generators(level)? {
            image.insert(self.alpha(&g).terms());
        }
        let mut corner = SparseSpan::new();
        for x in self.generators(level + 1)? {
            let c = p.multiply(&x)?.multiply(&p)?;
            corner.insert(c.terms());
        }
        let corner_in_image = corner.vectors().iter().all(|v| image.contains(v));
        let image_in_corner = image.vectors().iter().all(|v| corner.contains(v));
        Ok(HereditaryReport {
            level,
            image_dimension: image.rank(),
            corner_dimension: corner.rank(),
            corner_in_image,
            image_in_corner,
        })
    }

    /// Whether `α` is injective on level `k`: the images of the matrix units
    /// are linearly independent.
    pub fn alpha_injective(&self, level: usize) -> Result<bool, AfError> {
        let gens = self.generators(level)?;
        let mut span = SparseSpan::new();
        for g in &gens {
            if !span.insert(self.alpha(g).terms()) {
                return Ok(false);
            }
        }
        Ok(span.rank() == gens.len())
    }
}
