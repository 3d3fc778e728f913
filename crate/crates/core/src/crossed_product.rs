//! The Cuntz-Krieger algebra as a crossed product of its AF-core by the
//! endomorphism `α = S(·)S^*`, checked on a truncated representation.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::af_core::{AfCore, AfError, LevelElement};
use crate::path_rep::{
    GeneratorModel, RelationResidual, RepError, TruncatedRep, UNIT_RELATION_FLAG,
};
use crate::sparse::{residual_norm, SparseOperator};
use crate::tolerance;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CrossedError {
    #[error("level {level} exceeds what truncation {trunc} can represent")]
    LevelExceedsTruncation { level: usize, trunc: usize },
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Af(#[from] AfError),
}

impl From<crate::sparse::SparseError> for CrossedError {
    fn from(e: crate::sparse::SparseError) -> Self {
        CrossedError::Rep(e.into())
    }
}

/// `S|μ⟩ = n_{μ_1}^{-1/2} Σ_i A(i,μ_1) |iμ⟩` for `|μ| < L`, zero on the top
/// level. Away from length-one words this is `Σ_{i,j} n_j^{-1/2} S_i P_j`.
pub fn build_isometry_s(rep: &TruncatedRep) -> SparseOperator {
    let a = rep.matrix();
    let n_vec = a.column_sums();
    let mut s = SparseOperator::zero(rep.dim());
    for (col, w) in rep.basis().iter().enumerate() {
        if w.len() >= rep.trunc() {
            continue;
        }
        let first = w.first().expect("nonempty");
        let weight = Complex64::new(1.0 / (n_vec[first] as f64).sqrt(), 0.0);
        for i in a.predecessors(first) {
            let row = rep
                .index_of(&w.prepended(i))
                .expect("admissible and short enough");
            s.add_entry(row, col, weight);
        }
    }
    s
}

/// The literal sum `Σ_{i,j} n_j^{-1/2} S_i P_j`.
pub fn isometry_from_generators(rep: &TruncatedRep) -> SparseOperator {
    let a = rep.matrix();
    let n_vec = a.column_sums();
    let mut s = SparseOperator::zero(rep.dim());
    for (j, &nj) in n_vec.iter().enumerate() {
        let pj = rep.range_projection(j);
        for i in a.predecessors(j) {
            let term = rep
                .generator(i)
                .mul(&pj)
                .expect("same dimension")
                .scale(Complex64::new(1.0 / (nj as f64).sqrt(), 0.0));
            s = s.add(&term).expect("same dimension");
        }
    }
    s
}

/// Residuals of `S^*S = 1` and `S a S^* = α(a)` for one element.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceReport {
    pub trunc: usize,
    pub level: usize,
    pub relations: Vec<RelationResidual>,
    pub divergence_flags: Vec<String>,
}

impl CovarianceReport {
    pub fn max_interior(&self) -> f64 {
        self.relations
            .iter()
            .map(|r| r.interior_residual)
            .fold(0.0, f64::max)
    }
}

fn residual(
    rep: &TruncatedRep,
    relation: &str,
    op: &SparseOperator,
    range: [usize; 2],
) -> RelationResidual {
    let (interior_residual, boundary_residual) = rep.split_residual(op, range);
    RelationResidual {
        relation: relation.to_string(),
        interior_residual,
        boundary_residual,
        interior_range: range,
    }
}

/// `S^*S − 1`, split at the top level where the truncation kills `S`.
pub fn isometry_residual(rep: &TruncatedRep, s: &SparseOperator) -> RelationResidual {
    let op = s
        .adjoint()
        .mul(s)
        .expect("same dimension")
        .sub(&SparseOperator::identity(rep.dim()))
        .expect("same dimension");
    residual(rep, "S*S = 1", &op, [1, rep.trunc() - 1])
}

fn check_level(rep: &TruncatedRep, level: usize, max: usize) -> Result<(), CrossedError> {
    if level > max {
        return Err(CrossedError::LevelExceedsTruncation {
            level,
            trunc: rep.trunc(),
        });
    }
    Ok(())
}

/// Compares the numerical endomorphism `S op(a) S^*` with the image of the
/// symbolic `α(a)` on words of length `level+2 ..= L-1`.
pub fn covariance_check(
    rep: &TruncatedRep,
    s: &SparseOperator,
    a: &LevelElement,
) -> Result<CovarianceReport, CrossedError> {
    let k = a.level();
    check_level(rep, k, rep.trunc() - 2)?;
    let core = AfCore::new(rep.matrix().clone());
    let lhs = s
        .mul(&rep.level_element_to_operator(a)?)?
        .mul(&s.adjoint())?;
    let rhs = rep.level_element_to_operator(&core.alpha(a))?;
    let diff = lhs.sub(&rhs)?;
    Ok(CovarianceReport {
        trunc: rep.trunc(),
        level: k,
        relations: vec![
            isometry_residual(rep, s),
            residual(rep, "S a S* = alpha(a)", &diff, [k + 2, rep.trunc() - 1]),
        ],
        divergence_flags: vec![UNIT_RELATION_FLAG.to_string()],
    })
}

/// Distance from `S^* op(a) S` to the image of the level algebras, bounded
/// above by its distance to the explicit candidate `op(S^* a S)` computed
/// symbolically. Measured on words of length `1 ..= L-1`.
pub fn star_compression_check(
    rep: &TruncatedRep,
    s: &SparseOperator,
    a: &LevelElement,
) -> Result<f64, CrossedError> {
    let k = a.level();
    if k < 2 {
        return Err(AfError::LevelTooLow { min: 2, got: k }.into());
    }
    check_level(rep, k, rep.trunc() - 1)?;
    let core = AfCore::new(rep.matrix().clone());
    let lhs = s
        .adjoint()
        .mul(&rep.level_element_to_operator(a)?)?
        .mul(s)?;
    let rhs = rep.level_element_to_operator(&core.compress(a)?)?;
    let diff = lhs.sub(&rhs)?;
    Ok(rep.split_residual(&diff, [1, rep.trunc() - 1]).0)
}

/// `S_i = Σ_j A(i,j) √n_j P_i S P_j`.
pub fn recover_generators(rep: &TruncatedRep, s: &SparseOperator) -> Vec<SparseOperator> {
    let a = rep.matrix();
    let n_vec = a.column_sums();
    let projections: Vec<SparseOperator> = (0..a.n()).map(|j| rep.range_projection(j)).collect();
    (0..a.n())
        .map(|i| {
            let mut out = SparseOperator::zero(rep.dim());
            for j in a.successors(i) {
                let term = projections[i]
                    .mul(s)
                    .and_then(|x| x.mul(&projections[j]))
                    .expect("same dimension")
                    .scale(Complex64::new((n_vec[j] as f64).sqrt(), 0.0));
                out = out.add(&term).expect("same dimension");
            }
            out
        })
        .collect()
}

/// Recovered minus original generators. Every `P_j` vanishes on length-one
/// words, so the agreement holds on lengths `2 ..= L`.
pub fn recovery_residuals(
    rep: &TruncatedRep,
    recovered: &[SparseOperator],
) -> Vec<RelationResidual> {
    recovered
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let diff = r.sub(rep.generator(i)).expect("same dimension");
            residual(
                rep,
                &format!("recovered S{} = S{}", i + 1, i + 1),
                &diff,
                [2, rep.trunc()],
            )
        })
        .collect()
}

/// Generators with the gauge degrees assigned by a circle action.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradedGeneratorSet {
    pub generators: Vec<GradedGenerator>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradedGenerator {
    pub label: String,
    pub degree: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemiSaturationVerdict {
    pub semi_saturated: bool,
    pub offenders: Vec<GradedGenerator>,
}

impl GradedGeneratorSet {
    pub fn new<S: Into<String>>(gens: impl IntoIterator<Item = (S, i64)>) -> Self {
        Self {
            generators: gens
                .into_iter()
                .map(|(label, degree)| GradedGenerator {
                    label: label.into(),
                    degree,
                })
                .collect(),
        }
    }

    /// Cuntz-Krieger generators: every `S_i` has degree one.
    pub fn cuntz_krieger(n: usize) -> Self {
        Self::new((1..=n).map(|i| (format!("S{i}"), 1)))
    }

    /// Crossed-product generators: level-`k` matrix units (degree zero)
    /// together with the isometry `S` (degree one).
    pub fn crossed_product(core: &AfCore, level: usize) -> Result<Self, AfError> {
        let mut gens: Vec<(String, i64)> = core
            .generator_keys(level)?
            .into_iter()
            .map(|(mu, nu)| (format!("e{mu}{nu}"), 0))
            .collect();
        gens.push(("S".to_string(), 1));
        Ok(Self::new(gens))
    }

    /// Degrees read off the gauge action on a truncated representation;
    /// `None` for an operator that is not homogeneous.
    pub fn measured(
        rep: &TruncatedRep,
        ops: &[(String, SparseOperator)],
    ) -> Result<Vec<Option<i64>>, RepError> {
        let l = rep.trunc() as i64;
        ops.iter()
            .map(|(_, op)| {
                for d in -l..=l {
                    if rep.is_pure_degree(op, d)? {
                        return Ok(Some(d));
                    }
                }
                Ok(None)
            })
            .collect()
    }
}

/// Semi-saturated exactly when every generator has degree 0 or 1.
pub fn semi_saturation_check(gens: &GradedGeneratorSet) -> SemiSaturationVerdict {
    let offenders: Vec<GradedGenerator> = gens
        .generators
        .iter()
        .filter(|g| g.degree != 0 && g.degree != 1)
        .cloned()
        .collect();
    SemiSaturationVerdict {
        semi_saturated: offenders.is_empty(),
        offenders,
    }
}

/// Per-level maxima of the crossed-product checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSummary {
    pub level: usize,
    pub generators: usize,
    pub covariance_interior_max: f64,
    pub compression_residual_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossedReport {
    pub trunc: usize,
    pub dimension: usize,
    pub isometry: RelationResidual,
    pub isometry_matches_generator_sum: f64,
    pub range_projection_residual: f64,
    pub s_degree: Option<i64>,
    pub levels: Vec<LevelSummary>,
    pub recovery: Vec<RelationResidual>,
    pub semi_saturation: SemiSaturationVerdict,
    pub divergence_flags: Vec<String>,
}

impl CrossedReport {
    /// Whether every residual meets its tolerance.
    pub fn contracts_met(&self) -> bool {
        let exact = tolerance::EXACT;
        self.isometry.interior_residual <= exact
            && self.isometry_matches_generator_sum <= exact
            && self.range_projection_residual <= 1e-12
            && self.s_degree == Some(1)
            && self.levels.iter().all(|l| {
                l.covariance_interior_max <= exact
                    && l.compression_residual_max.is_none_or(|r| r <= 1e-8)
            })
            && self.recovery.iter().all(|r| r.interior_residual <= exact)
            && self.semi_saturation.semi_saturated
    }
}

/// Runs every crossed-product check on all generators of levels
/// `1 ..= L-3`.
pub fn crossed_report(rep: &TruncatedRep) -> Result<CrossedReport, CrossedError> {
    let s = build_isometry_s(rep);
    let core = AfCore::new(rep.matrix().clone());
    let literal = isometry_from_generators(rep);
    let mask = rep.length_mask(2, rep.trunc());
    let isometry_matches_generator_sum = residual_norm(&s.sub(&literal)?.restrict_columns(&mask));

    let range = s.mul(&s.adjoint())?;
    let idempotent = residual_norm(&range.mul(&range)?.sub(&range)?);
    let selfadjoint = residual_norm(&range.sub(&range.adjoint())?);

    let s_degree = GradedGeneratorSet::measured(rep, &[("S".to_string(), s.clone())])?[0];

    let mut levels = Vec::new();
    for k in 1..=rep.trunc().saturating_sub(3) {
        let gens = core.generators(k)?;
        let mut cov = 0.0f64;
        let mut comp: Option<f64> = None;
        for g in &gens {
            cov = cov.max(covariance_check(rep, &s, g)?.max_interior());
            if k >= 2 {
                let r = star_compression_check(rep, &s, g)?;
                comp = Some(comp.unwrap_or(0.0).max(r));
            }
        }
        levels.push(LevelSummary {
            level: k,
            generators: gens.len(),
            covariance_interior_max: cov,
            compression_residual_max: comp,
        });
    }

    let recovery = recovery_residuals(rep, &recover_generators(rep, &s));
    let degrees =
        GradedGeneratorSet::new((1..=rep.matrix().n()).map(|i| (format!("S{i}"), 1)).chain(
            std::iter::once(("S".to_string(), s_degree.unwrap_or(i64::MIN))),
        ));
    Ok(CrossedReport {
        trunc: rep.trunc(),
        dimension: rep.dim(),
        isometry: isometry_residual(rep, &s),
        isometry_matches_generator_sum,
        range_projection_residual: idempotent.max(selfadjoint),
        s_degree,
        levels,
        recovery,
        semi_saturation: semi_saturation_check(&degrees),
        divergence_flags: vec![UNIT_RELATION_FLAG.to_string()],
    })
}
