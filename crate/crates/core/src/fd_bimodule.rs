//! Hilbert bimodules over finite direct sums of matrix algebras.
//!
//! A partial injection `h` on the blocks of `⊕_t M_{d_t}` defines the
//! bimodule whose elements are families of `d_{h(t)} × d_t` arrays indexed by
//! the domain of `h`. The spectrum of the base algebra is its finite set of
//! blocks, and the induced partial map on it is recovered from where the two
//! inner products land.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BimoduleError {
    #[error("the algebra needs at least one block")]
    NoBlocks,
    #[error("block {0} has size zero")]
    ZeroBlock(usize),
    #[error("block {block} is out of range 1..={count}")]
    BlockOutOfRange { block: usize, count: usize },
    #[error("blocks {first} and {second} both map to block {target}")]
    NotInjective {
        first: usize,
        second: usize,
        target: usize,
    },
    #[error("map key {0:?} is not a block index")]
    BadKey(String),
    #[error("element shape does not match the bimodule")]
    ShapeMismatch,
}

/// `⊕_t M_{d_t}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FdAlgebra {
    blocks: Vec<usize>,
}

impl FdAlgebra {
    pub fn new(blocks: Vec<usize>) -> Result<Self, BimoduleError> {
        if blocks.is_empty() {
            return Err(BimoduleError::NoBlocks);
        }
        if let Some(t) = blocks.iter().position(|&d| d == 0) {
            return Err(BimoduleError::ZeroBlock(t + 1));
        }
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn zero(&self) -> AlgebraElement {
        AlgebraElement {
            blocks: self.blocks.iter().map(|&d| DMatrix::zeros(d, d)).collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> AlgebraElement {
        AlgebraElement {
            blocks: self.blocks.iter().map(|&d| gaussian(d, d, rng)).collect(),
        }
    }
}

fn gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(
            StandardNormal.sample(&mut *rng),
            StandardNormal.sample(&mut *rng),
        )
    })
}

fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// An element of the base algebra, one square array per block.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    pub blocks: Vec<DMatrix<Complex64>>,
}

impl AlgebraElement {
    /// Blocks holding a nonzero array.
    pub fn support(&self, tol: f64) -> BTreeSet<usize> {
        self.blocks
            .iter()
            .enumerate()
            .filter(|(_, b)| b.iter().any(|c| c.norm() > tol))
            .map(|(t, _)| t)
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
        }
    }

    /// Largest block operator norm of `self − other`.
    pub fn distance(&self, other: &Self) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| spectral_norm(&(a - b)))
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue over all blocks, assuming each is Hermitian.
    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .filter(|b| !b.is_empty())
            .map(|b| {
                let h = (b + b.adjoint()).scale(0.5);
                h.symmetric_eigenvalues().min()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// A partial injection on block indices (0-based internally, 1-based in
/// JSON and display).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PartialMapOnSpectrum {
    map: BTreeMap<usize, usize>,
}

impl PartialMapOnSpectrum {
    pub fn new(map: BTreeMap<usize, usize>, count: usize) -> Result<Self, BimoduleError> {
        let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
        for (&s, &t) in &map {
            for b in [s, t] {
                if b >= count {
                    return Err(BimoduleError::BlockOutOfRange {
                        block: b + 1,
                        count,
                    });
                }
            }
            if let Some(&prev) = seen.get(&t) {
                return Err(BimoduleError::NotInjective {
                    first: prev + 1,
                    second: s + 1,
                    target: t + 1,
                });
            }
            seen.insert(t, s);
        }
        Ok(Self { map })
    }

    pub fn from_one_based(pairs: &[(usize, usize)], count: usize) -> Result<Self, BimoduleError> {
        let mut map = BTreeMap::new();
        for &(s, t) in pairs {
            if s == 0 || t == 0 {
                return Err(BimoduleError::BlockOutOfRange { block: 0, count });
            }
            map.insert(s - 1, t - 1);
        }
        Self::new(map, count)
    }

    pub fn identity(count: usize) -> Self {
        Self {
            map: (0..count).map(|t| (t, t)).collect(),
        }
    }

    pub fn get(&self, t: usize) -> Option<usize> {
        self.map.get(&t).copied()
    }

    pub fn domain(&self) -> BTreeSet<usize> {
        self.map.keys().copied().collect()
    }

    pub fn range(&self) -> BTreeSet<usize> {
        self.map.values().copied().collect()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.map.iter().map(|(&s, &t)| (s, t))
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// `h^p(t)` when every step is defined.
    pub fn iterate(&self, t: usize, p: usize) -> Option<usize> {
        (0..p).try_fold(t, |x, _| self.get(x))
    }

    /// Every partial injection on `count` blocks, in a fixed order.
    pub fn enumerate_all(count: usize) -> Vec<Self> {
        fn go(
            t: usize,
            count: usize,
            used: &mut Vec<bool>,
            cur: &mut BTreeMap<usize, usize>,
            out: &mut Vec<PartialMapOnSpectrum>,
        ) {
            if t == count {
                out.push(PartialMapOnSpectrum { map: cur.clone() });
                return;
            }
            go(t + 1, count, used, cur, out);
            for target in 0..count {
                if !used[target] {
                    used[target] = true;
                    cur.insert(t, target);
                    go(t + 1, count, used, cur, out);
                    cur.remove(&t);
                    used[target] = false;
                }
            }
        }
        let mut out = Vec::new();
        go(
            0,
            count,
            &mut vec![false; count],
            &mut BTreeMap::new(),
            &mut out,
        );
        out
    }
}

impl Serialize for PartialMapOnSpectrum {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let m: BTreeMap<String, usize> = self
            .map
            .iter()
            .map(|(&k, &v)| ((k + 1).to_string(), v + 1))
            .collect();
        m.serialize(s)
    }
}

/// `{"blocks": [2,2], "map": {"1": 2}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BimoduleJson {
    pub blocks: Vec<usize>,
    pub map: BTreeMap<String, usize>,
}

impl BimoduleJson {
    pub fn parse(&self) -> Result<FdHilbertBimodule, BimoduleError> {
        let base = FdAlgebra::new(self.blocks.clone())?;
        let mut pairs = Vec::new();
        for (k, &v) in &self.map {
            let s: usize = k
                .trim()
                .parse()
                .map_err(|_| BimoduleError::BadKey(k.clone()))?;
            pairs.push((s, v));
        }
        let h = PartialMapOnSpectrum::from_one_based(&pairs, base.block_count())?;
        Ok(build_bimodule(base, h))
    }
}

/// An element of the bimodule: one `d_{h(t)} × d_t` array per domain block.
#[derive(Debug, Clone, PartialEq)]
pub struct BimoduleElement {
    pub blocks: BTreeMap<usize, DMatrix<Complex64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdHilbertBimodule {
    base: FdAlgebra,
    h: PartialMapOnSpectrum,
    left_scale: f64,
}

pub fn build_bimodule(base: FdAlgebra, h: PartialMapOnSpectrum) -> FdHilbertBimodule {
    FdHilbertBimodule {
        base,
        h,
        left_scale: 1.0,
    }
}

impl FdHilbertBimodule {
    pub fn base(&self) -> &FdAlgebra {
        &self.base
    }

    pub fn defining_map(&self) -> &PartialMapOnSpectrum {
        &self.h
    }

    /// A corrupted copy whose left action is multiplied by `scale`; used to
    /// confirm the imprimitivity check can fail.
    pub fn with_left_action_scale(&self, scale: f64) -> Self {
        Self {
            left_scale: scale,
            ..self.clone()
        }
    }

    fn shape(&self, t: usize) -> (usize, usize) {
        let d = self.base.blocks();
        (d[self.h.get(t).expect("domain block")], d[t])
    }

    pub fn zero(&self) -> BimoduleElement {
        BimoduleElement {
            blocks: self
                .h
                .domain()
                .into_iter()
                .map(|t| {
                    let (r, c) = self.shape(t);
                    (t, DMatrix::zeros(r, c))
                })
                .collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> BimoduleElement {
        BimoduleElement {
            blocks: self
                .h
                .domain()
                .into_iter()
                .map(|t| {
                    let (r, c) = self.shape(t);
                    (t, gaussian(r, c, rng))
                })
                .collect(),
        }
    }

    /// Elements with a single unit entry, one per coordinate.
    pub fn unit_elements(&self) -> Vec<BimoduleElement> {
        let mut out = Vec::new();
        for t in self.h.domain() {
            let (r, c) = self.shape(t);
            for i in 0..r {
                for j in 0..c {
                    let mut e = self.zero();
                    e.blocks.get_mut(&t).expect("domain block")[(i, j)] = Complex64::new(1.0, 0.0);
                    out.push(e);
                }
            }
        }
        out
    }

    fn check(&self, x: &BimoduleElement) -> Result<(), BimoduleError> {
        let ok = x.blocks.len() == self.h.domain().len()
            && x.blocks
                .iter()
                .all(|(&t, m)| self.h.get(t).is_some() && (m.nrows(), m.ncols()) == self.shape(t));
        if ok {
            Ok(())
        } else {
            Err(BimoduleError::ShapeMismatch)
        }
    }

    /// `a · x`: block `t` becomes `a_{h(t)} x_t`.
    pub fn left_action(
        &self,
        a: &AlgebraElement,
        x: &BimoduleElement,
    ) -> Result<BimoduleElement, BimoduleError> {
        self.check(x)?;
        let s = Complex64::new(self.left_scale, 0.0);
        Ok(BimoduleElement {
            blocks: x
                .blocks
                .iter()
                .map(|(&t, m)| (t, (&a.blocks[self.h.get(t).expect("domain block")] * m) * s))
                .collect(),
        })
    }

    /// `x · a`: block `t` becomes `x_t a_t`.
    pub fn right_action(
        &self,
        x: &BimoduleElement,
        a: &AlgebraElement,
    ) -> Result<BimoduleElement, BimoduleError> {
        self.check(x)?;
        Ok(BimoduleElement {
            blocks: x
                .blocks
                .iter()
                .map(|(&t, m)| (t, m * &a.blocks[t]))
                .collect(),
        })
    }

    /// `⟨x,y⟩_R = x^* y`, supported on the domain blocks.
    pub fn right_inner(
        &self,
        x: &BimoduleElement,
        y: &BimoduleElement,
    ) -> Result<AlgebraElement, BimoduleError> {
        self.check(x)?;
        self.check(y)?;
        let mut out = self.base.zero();
        for (&t, xm) in &x.blocks {
            out.blocks[t] = xm.adjoint() * &y.blocks[&t];
        }
        Ok(out)
    }

    /// `_L⟨x,y⟩ = x y^*`, supported on the range blocks.
    pub fn left_inner(
        &self,
        x: &BimoduleElement,
        y: &BimoduleElement,
    ) -> Result<AlgebraElement, BimoduleError> {
        self.check(x)?;
        self.check(y)?;
        let mut out = self.base.zero();
        for (&t, xm) in &x.blocks {
            out.blocks[self.h.get(t).expect("domain block")] = xm * y.blocks[&t].adjoint();
        }
        Ok(out)
    }

    /// `‖a·⟨b,c⟩_R − _L⟨a,b⟩·c‖` as the largest block operator norm.
    pub fn imprimitivity_residual(
        &self,
        a: &BimoduleElement,
        b: &BimoduleElement,
        c: &BimoduleElement,
    ) -> Result<f64, BimoduleError> {
        let lhs = self.right_action(a, &self.right_inner(b, c)?)?;
        let rhs = self.left_action(&self.left_inner(a, b)?, c)?;
        Ok(lhs
            .blocks
            .iter()
            .map(|(t, m)| spectral_norm(&(m - &rhs.blocks[t])))
            .fold(0.0, f64::max))
    }
}

/// Largest imprimitivity residual over `trials` random triples.
pub fn imprimitivity_check<R: Rng + ?Sized>(
    m: &FdHilbertBimodule,
    trials: usize,
    rng: &mut R,
) -> f64 {
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let (a, b, c) = (m.random(rng), m.random(rng), m.random(rng));
        worst = worst.max(
            m.imprimitivity_residual(&a, &b, &c)
                .expect("shapes from the module"),
        );
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdealSupports {
    /// Blocks of `span ⟨B, B⟩_R`, 1-based.
    pub right: Vec<usize>,
    /// Blocks of `span _L⟨B, B⟩`, 1-based.
    pub left: Vec<usize>,
    /// Both inner products are full.
    pub morita_equivalence: bool,
}

/// Support blocks of the two inner-product ideals, read off the inner
/// products of unit elements.
pub fn ideal_supports(m: &FdHilbertBimodule) -> IdealSupports {
    let units = m.unit_elements();
    let mut right = BTreeSet::new();
    let mut left = BTreeSet::new();
    for x in &units {
        right.extend(m.right_inner(x, x).expect("module element").support(0.0));
        left.extend(m.left_inner(x, x).expect("module element").support(0.0));
    }
    let all = m.base.block_count();
    IdealSupports {
        morita_equivalence: right.len() == all && left.len() == all,
        right: right.into_iter().map(|t| t + 1).collect(),
        left: left.into_iter().map(|t| t + 1).collect(),
    }
}

/// The induced map on the spectrum: an irreducible representation of
/// block `t` in the right ideal is sent to the block where the left inner
/// products of the elements it sees are supported.
pub fn dual_partial_map(m: &FdHilbertBimodule) -> PartialMapOnSpectrum {
    let mut map = BTreeMap::new();
    for x in m.unit_elements() {
        let src = m.right_inner(&x, &x).expect("module element").support(0.0);
        let dst = m.left_inner(&x, &x).expect("module element").support(0.0);
        for &s in &src {
            for &t in &dst {
                map.insert(s, t);
            }
        }
    }
    PartialMapOnSpectrum { map }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PeriodicWitness {
    pub block: usize,
    pub period: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FreenessVerdict {
    pub free: bool,
    pub max_period: usize,
    pub periodic_points: Vec<PeriodicWitness>,
}

/// On a finite discrete spectrum a set has empty interior only when it is
/// empty, so the map is free iff no block is periodic with period
/// `1..=max_period`. Each periodic block is reported with its least period.
pub fn topological_freeness_finite(h: &PartialMapOnSpectrum, max_period: usize) -> FreenessVerdict {
    let mut periodic_points = Vec::new();
    for t in h.domain() {
        if let Some(p) = (1..=max_period).find(|&p| h.iterate(t, p) == Some(t)) {
            periodic_points.push(PeriodicWitness {
                block: t + 1,
                period: p,
            });
        }
    }
    FreenessVerdict {
        free: periodic_points.is_empty(),
        max_period,
        periodic_points,
    }
}

/// Everything the bimodule command reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BimoduleReport {
    pub blocks: Vec<usize>,
    pub map: PartialMapOnSpectrum,
    pub trials: usize,
    pub imprimitivity_residual: f64,
    pub mutation_residual: f64,
    pub inner_product_symmetry_residual: f64,
    pub min_inner_product_eigenvalue: f64,
    pub supports: IdealSupports,
    pub dual_map: PartialMapOnSpectrum,
    pub dual_map_matches: bool,
    pub freeness: FreenessVerdict,
}

impl BimoduleReport {
    pub fn contracts_met(&self) -> bool {
        self.imprimitivity_residual <= 1e-12
            && (self.map.is_empty() || self.mutation_residual > 0.1)
            && self.inner_product_symmetry_residual <= 1e-12
            && self.min_inner_product_eigenvalue >= -1e-12
            && self.dual_map_matches
    }
}

pub fn bimodule_report<R: Rng + ?Sized>(
    m: &FdHilbertBimodule,
    trials: usize,
    rng: &mut R,
) -> BimoduleReport {
    let imprimitivity_residual = imprimitivity_check(m, trials, rng);
    let mutation_residual = imprimitivity_check(&m.with_left_action_scale(2.0), trials, rng);
    let mut symmetry = 0.0f64;
    let mut min_eig = f64::INFINITY;
    for _ in 0..trials {
        let (x, y) = (m.random(rng), m.random(rng));
        let r = m.right_inner(&x, &y).expect("module element");
        let l = m.left_inner(&x, &y).expect("module element");
        symmetry = symmetry
            .max(
                r.adjoint()
                    .distance(&m.right_inner(&y, &x).expect("module element")),
            )
            .max(
                l.adjoint()
                    .distance(&m.left_inner(&y, &x).expect("module element")),
            );
        min_eig = min_eig
            .min(
                m.right_inner(&x, &x)
                    .expect("module element")
                    .min_eigenvalue(),
            )
            .min(
                m.left_inner(&x, &x)
                    .expect("module element")
                    .min_eigenvalue(),
            );
    }
    let dual_map = dual_partial_map(m);
    BimoduleReport {
        blocks: m.base.blocks().to_vec(),
        map: m.h.clone(),
        trials,
        imprimitivity_residual,
        mutation_residual,
        inner_product_symmetry_residual: symmetry,
        min_inner_product_eigenvalue: if min_eig.is_finite() { min_eig } else { 0.0 },
        supports: ideal_supports(m),
        dual_map_matches: dual_map == m.h,
        freeness: topological_freeness_finite(&dual_map, m.base.block_count()),
        dual_map,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn module(blocks: &[usize], pairs: &[(usize, usize)]) -> FdHilbertBimodule {
        let base = FdAlgebra::new(blocks.to_vec()).unwrap();
        let h = PartialMapOnSpectrum::from_one_based(pairs, blocks.len()).unwrap();
        build_bimodule(base, h)
    }

    #[test]
    fn validation() {
        assert_eq!(FdAlgebra::new(vec![]), Err(BimoduleError::NoBlocks));
        assert_eq!(FdAlgebra::new(vec![2, 0]), Err(BimoduleError::ZeroBlock(2)));
        assert!(matches!(
            PartialMapOnSpectrum::from_one_based(&[(1, 2), (2, 2)], 2),
            Err(BimoduleError::NotInjective { target: 2, .. })
        ));
        assert!(matches!(
            PartialMapOnSpectrum::from_one_based(&[(1, 3)], 2),
            Err(BimoduleError::BlockOutOfRange { block: 3, count: 2 })
        ));
    }

    #[test]
    fn json_round_trip() {
        let raw: BimoduleJson =
            serde_json::from_str(r#"{"blocks": [2,2], "map": {"1": 2}}"#).unwrap();
        let m = raw.parse().unwrap();
        assert_eq!(m.defining_map().get(0), Some(1));
        assert_eq!(
            serde_json::to_string(m.defining_map()).unwrap(),
            r#"{"1":2}"#
        );
        let bad: BimoduleJson =
            serde_json::from_str(r#"{"blocks": [2], "map": {"x": 1}}"#).unwrap();
        assert_eq!(bad.parse().unwrap_err(), BimoduleError::BadKey("x".into()));
    }

    #[test]
    fn shapes() {
        let m = module(&[2, 3], &[(1, 2)]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = m.random(&mut rng);
        assert_eq!(x.blocks[&0].shape(), (3, 2));
        assert_eq!(m.unit_elements().len(), 6);
    }

    #[test]
    fn supports_examples() {
        let s = ideal_supports(&module(&[2, 2], &[(1, 2)]));
        assert_eq!(
            (s.right, s.left, s.morita_equivalence),
            (vec![1], vec![2], false)
        );
        let s = ideal_supports(&module(&[2, 2], &[(1, 2), (2, 1)]));
        assert_eq!(
            (s.right, s.left, s.morita_equivalence),
            (vec![1, 2], vec![1, 2], true)
        );
        let s = ideal_supports(&module(&[2, 2], &[]));
        assert!(s.right.is_empty() && s.left.is_empty());
    }

    #[test]
    fn dual_map_examples() {
        let m = module(&[2, 2], &[(1, 2)]);
        assert_eq!(dual_partial_map(&m), *m.defining_map());
        let id = build_bimodule(
            FdAlgebra::new(vec![1, 2, 3]).unwrap(),
            PartialMapOnSpectrum::identity(3),
        );
        assert_eq!(dual_partial_map(&id), PartialMapOnSpectrum::identity(3));
        let chain = module(&[1, 1, 1], &[(1, 2), (2, 3)]);
        assert_eq!(dual_partial_map(&chain), *chain.defining_map());
    }

    #[test]
    fn freeness_examples() {
        let chain = PartialMapOnSpectrum::from_one_based(&[(1, 2), (2, 3)], 3).unwrap();
        assert!(topological_freeness_finite(&chain, 3).free);
        let swap = PartialMapOnSpectrum::from_one_based(&[(1, 2), (2, 1)], 2).unwrap();
        let v = topological_freeness_finite(&swap, 2);
        assert!(!v.free);
        assert_eq!(
            v.periodic_points,
            vec![
                PeriodicWitness {
                    block: 1,
                    period: 2
                },
                PeriodicWitness {
                    block: 2,
                    period: 2
                }
            ]
        );
        assert!(topological_freeness_finite(&swap, 1).free);
        let id = PartialMapOnSpectrum::identity(2);
        let v = topological_freeness_finite(&id, 2);
        assert!(v.periodic_points.iter().all(|w| w.period == 1));
    }

    #[test]
    fn imprimitivity_and_mutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = module(&[2, 3], &[(1, 2), (2, 1)]);
        assert!(imprimitivity_check(&m, 50, &mut rng) <= 1e-12);
        assert!(imprimitivity_check(&m.with_left_action_scale(2.0), 50, &mut rng) > 0.1);
        let empty = module(&[2], &[]);
        assert_eq!(imprimitivity_check(&empty, 10, &mut rng), 0.0);
    }

    #[test]
    fn single_block_never_free() {
        for d in 1..=3 {
            let m = module(&[d], &[(1, 1)]);
            assert!(!topological_freeness_finite(&dual_partial_map(&m), 1).free);
        }
    }

    #[test]
    fn enumeration_counts() {
        // Partial injections on r points: sum_k C(r,k)^2 k!.
        let counts: Vec<usize> = (1..=4)
            .map(|r| PartialMapOnSpectrum::enumerate_all(r).len())
            .collect();
        assert_eq!(counts, vec![2, 7, 34, 209]);
    }

    #[test]
    fn report_contracts() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = bimodule_report(&module(&[2, 2], &[(1, 2)]), 20, &mut rng);
        assert!(r.contracts_met(), "{r:?}");
        assert!(r.freeness.free);
    }
}
