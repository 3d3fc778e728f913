//! One function per subcommand. Each returns whether the mathematical
//! contracts of its report were met; errors are input errors.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use cklab_core::af_core::{AfCore, ProductStatePrefix, TermJson};
use cklab_core::crossed_product::crossed_report;
use cklab_core::fd_bimodule::{bimodule_report, BimoduleJson};
use cklab_core::matrix_subshift::{
    admissible_words, brute_force_condition_i, certified_oracle_depth, check_condition_i,
    forced_states, periodic_interior_check, ConditionIVerdict, MatrixJson, Word, ZeroOneMatrix,
    MAX_ORACLE_DEPTH,
};
use cklab_core::path_rep::TruncatedRep;
use cklab_core::tolerance;
use cklab_core::uniqueness_lab::{
    agreement_experiment, expectation_contractivity, norm_gap_witness, UniquenessReport,
    CONTRACTIVITY_TOLERANCE, MIN_TRUNC, WITNESS_TOLERANCE,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::report::{destination, write_report, RunManifest};

pub struct RunContext {
    pub out: Option<PathBuf>,
    pub report_dir: Option<PathBuf>,
    pub quiet: bool,
    pub timing: bool,
    pub started: Instant,
}

impl RunContext {
    fn emit<T: Serialize>(
        &self,
        mut manifest: RunManifest,
        result: &T,
        met: bool,
        summary: &str,
    ) -> Result<bool> {
        if self.timing {
            manifest.wall_time_ms = Some(self.started.elapsed().as_millis() as u64);
        }
        let dest = destination(
            self.out.as_deref(),
            self.report_dir.as_deref(),
            &manifest.command,
        );
        write_report(&manifest, result, met, dest.as_deref())?;
        if !self.quiet {
            let status = if met {
                "contracts met"
            } else {
                "CONTRACT VIOLATION"
            };
            eprintln!("{}: {summary} [{status}]", manifest.command);
            if let Some(p) = dest {
                eprintln!("report written to {}", p.display());
            }
        }
        Ok(met)
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn parse_json<T: serde::de::DeserializeOwned>(bytes: &[u8], path: &Path) -> Result<T> {
    serde_json::from_slice(bytes).with_context(|| format!("parsing {}", path.display()))
}

fn load_matrix(path: &Path) -> Result<(Vec<u8>, ZeroOneMatrix)> {
    let bytes = read(path)?;
    let raw: MatrixJson = parse_json(&bytes, path)?;
    let a = ZeroOneMatrix::from_json(&raw)
        .with_context(|| format!("invalid matrix in {}", path.display()))?;
    Ok((bytes, a))
}

#[derive(Serialize)]
struct ValidateResult {
    matrix: ZeroOneMatrix,
    column_sums: Vec<usize>,
    out_degrees: Vec<usize>,
    forced_states: Vec<usize>,
}

pub fn validate(ctx: &RunContext, input: &Path) -> Result<bool> {
    let (bytes, a) = load_matrix(input)?;
    let result = ValidateResult {
        column_sums: a.column_sums(),
        out_degrees: (0..a.n()).map(|i| a.out_degree(i)).collect(),
        forced_states: forced_states(&a).into_iter().map(|i| i + 1).collect(),
        matrix: a,
    };
    let summary = format!("valid {0}x{0} matrix", result.matrix.n());
    ctx.emit(
        RunManifest::new("validate", &bytes),
        &result,
        true,
        &summary,
    )
}

#[derive(Serialize)]
struct ConditionIResult {
    verdict: ConditionIVerdict,
    oracle_depth: usize,
    oracle: ConditionIVerdict,
    oracle_agrees: bool,
    oracle_certified: bool,
    /// `periodic_interior_check(A, p)` for `p = 1..=2n`.
    periodic_interior: Vec<bool>,
    topologically_free: bool,
}

pub fn condition_i(ctx: &RunContext, input: &Path, depth: Option<usize>) -> Result<bool> {
    let (bytes, a) = load_matrix(input)?;
    let depth = depth.unwrap_or_else(|| certified_oracle_depth(&a));
    if depth == 0 || depth > MAX_ORACLE_DEPTH {
        bail!("--oracle-depth must be in 1..={MAX_ORACLE_DEPTH}, got {depth}");
    }
    let verdict = check_condition_i(&a);
    let oracle = brute_force_condition_i(&a, depth)?;
    let periodic_interior: Vec<bool> = (1..=2 * a.n())
        .map(|p| periodic_interior_check(&a, p))
        .collect();
    let topologically_free = periodic_interior.iter().all(|&b| b);
    let certified = depth >= certified_oracle_depth(&a);
    let result = ConditionIResult {
        oracle_agrees: oracle.holds == verdict.holds,
        oracle_certified: certified,
        topologically_free,
        verdict,
        oracle_depth: depth,
        oracle,
        periodic_interior,
    };
    // Below the certified depth the oracle may legitimately miss a witness.
    let met =
        (result.oracle_agrees || !certified) && result.topologically_free == result.verdict.holds;
    let summary = format!(
        "holds={} ({}), oracle at depth {depth} {}",
        result.verdict.holds,
        serde_json::to_value(result.verdict.method)?
            .as_str()
            .unwrap_or_default(),
        if result.oracle_agrees {
            "agrees"
        } else {
            "disagrees"
        }
    );
    let manifest = RunManifest::new("condition-i", &bytes)
        .param("oracle_depth", depth)
        .anchors(&[
            "condition (I): no isolated points in the shift space",
            "topological freeness of the shift",
        ]);
    ctx.emit(manifest, &result, met, &summary)
}

#[derive(Serialize)]
struct BratteliLevel {
    level: usize,
    multiplicities: Vec<usize>,
    enumerated: Vec<usize>,
    algebra_dimension: usize,
    matches_enumeration: bool,
}

#[derive(Serialize)]
struct HereditaryLevel {
    level: usize,
    alpha_injective: bool,
    image_dimension: usize,
    corner_dimension: usize,
    spans_equal: bool,
}

#[derive(Serialize)]
struct BratteliResult {
    n_vector: Vec<usize>,
    levels: Vec<BratteliLevel>,
    hereditary_range: Vec<HereditaryLevel>,
}

/// Largest level at which the hereditary-range spans are compared.
const MAX_HEREDITARY_LEVEL: usize = 4;

pub fn bratteli(ctx: &RunContext, input: &Path, levels: usize) -> Result<bool> {
    let (bytes, a) = load_matrix(input)?;
    if levels == 0 {
        bail!("--levels must be at least 1");
    }
    let core = AfCore::new(a.clone());
    let dims = core.bratteli_dims(levels);
    let mut out = Vec::new();
    for k in 1..=levels {
        let mut enumerated = vec![0; a.n()];
        for w in admissible_words(&a, k)? {
            enumerated[w.last().expect("nonempty")] += 1;
        }
        let m = dims.at(k).to_vec();
        out.push(BratteliLevel {
            level: k,
            matches_enumeration: m == enumerated,
            algebra_dimension: dims.algebra_dimension(k),
            multiplicities: m,
            enumerated,
        });
    }
    let mut hereditary = Vec::new();
    for k in 1..levels.min(MAX_HEREDITARY_LEVEL + 1) {
        let h = core.hereditary_range_check(k)?;
        hereditary.push(HereditaryLevel {
            level: k,
            alpha_injective: core.alpha_injective(k)?,
            image_dimension: h.image_dimension,
            corner_dimension: h.corner_dimension,
            spans_equal: h.spans_equal(),
        });
    }
    let result = BratteliResult {
        n_vector: core.n_vector().to_vec(),
        levels: out,
        hereditary_range: hereditary,
    };
    let met = result.levels.iter().all(|l| l.matches_enumeration)
        && result
            .hereditary_range
            .iter()
            .all(|h| h.alpha_injective && h.spans_equal);
    let last = result.levels.last().expect("levels >= 1");
    let summary = format!(
        "level {} multiplicities {:?}",
        last.level, last.multiplicities
    );
    let manifest = RunManifest::new("bratteli", &bytes)
        .param("levels", levels)
        .anchors(&[
            "AF-core level algebras and Bratteli multiplicities",
            "hereditary range of the endomorphism",
        ]);
    ctx.emit(manifest, &result, met, &summary)
}

#[derive(Serialize)]
struct StateLevel {
    level: usize,
    generators_checked: usize,
    identity_value: TermJson,
    supporting_unit: TermJson,
    max_pullback_residual: f64,
}

#[derive(Serialize)]
struct StatesResult {
    prefix: Word,
    shift_weight: f64,
    levels: Vec<StateLevel>,
}

pub fn states(ctx: &RunContext, input: &Path, prefix: &[usize], level: usize) -> Result<bool> {
    let (bytes, a) = load_matrix(input)?;
    if level == 0 {
        bail!("--level must be at least 1");
    }
    let word = Word::from_one_based(prefix, &a).context("invalid --prefix")?;
    if word.len() < level + 2 {
        bail!(
            "--prefix needs at least {} symbols for level {level}, got {}",
            level + 2,
            word.len()
        );
    }
    let core = AfCore::new(a.clone());
    let x = ProductStatePrefix::new(word.clone());
    let mut levels = Vec::new();
    for k in 1..=level {
        let mut worst = 0.0f64;
        let gens = core.generators(k)?;
        for g in &gens {
            worst = worst.max(core.state_pullback_check(&x, g)?);
        }
        let id = core.product_state_eval(&x, &core.identity(k)?)?;
        let p = word.prefix(k);
        levels.push(StateLevel {
            level: k,
            generators_checked: gens.len(),
            identity_value: TermJson {
                mu: Vec::new(),
                nu: Vec::new(),
                re: id.re,
                im: id.im,
            },
            supporting_unit: TermJson {
                mu: p.to_one_based(),
                nu: p.to_one_based(),
                re: 1.0,
                im: 0.0,
            },
            max_pullback_residual: worst,
        });
    }
    let x2 = word.symbols()[1];
    let result = StatesResult {
        prefix: word,
        shift_weight: 1.0 / core.n_vector()[x2] as f64,
        levels,
    };
    let met = result
        .levels
        .iter()
        .all(|l| l.max_pullback_residual == 0.0 && (l.identity_value.re - 1.0).abs() == 0.0);
    let worst = result
        .levels
        .iter()
        .map(|l| l.max_pullback_residual)
        .fold(0.0, f64::max);
    let summary = format!("pullback residual {worst:e} over levels 1..={level}");
    let manifest = RunManifest::new("states", &bytes)
        .param("prefix", prefix.to_vec())
        .param("level", level)
        .anchors(&[
            "product states on the AF-core",
            "dual action of the endomorphism on product states",
        ]);
    ctx.emit(manifest, &result, met, &summary)
}

fn check_trunc(trunc: usize, min: usize) -> Result<()> {
    if trunc < min {
        bail!("--trunc must be at least {min}, got {trunc}");
    }
    Ok(())
}

pub fn relations(ctx: &RunContext, input: &Path, trunc: usize) -> Result<bool> {
    let (bytes, a) = load_matrix(input)?;
    check_trunc(trunc, 3)?;
    let rep = TruncatedRep::build(&a, trunc)?;
    let result = rep.relation_residuals();
    let met = result.max_interior() <= tolerance::EXACT;
    let summary = format!(
        "dimension {}, max interior residual {:e}",
        result.dimension,
        result.max_interior()
    );
    let manifest = RunManifest::new("relations", &bytes)
        .param("trunc", trunc)
        .anchors(&[
            "Cuntz-Krieger relations",
            "unit relation sum_j S_j S_j* = 1",
        ]);
    ctx.emit(manifest, &result, met, &summary)
}

pub fn crossed(ctx: &RunContext, input: &Path, trunc: usize) -> Result<bool> {
    let (bytes, a) = load_matrix(input)?;
    check_trunc(trunc, 4)?;
    let rep = TruncatedRep::build(&a, trunc)?;
    let result = crossed_report(&rep)?;
    let met = result.contracts_met();
    let cov = result
        .levels
        .iter()
        .map(|l| l.covariance_interior_max)
        .fold(0.0, f64::max);
    let summary = format!(
        "max covariance residual {cov:e}, S has degree {:?}",
        result.s_degree
    );
    let manifest = RunManifest::new("crossed", &bytes)
        .param("trunc", trunc)
        .anchors(&[
            "isometry S and endomorphism alpha",
            "covariance relations",
            "generator recovery from S",
            "semi-saturation of the gauge grading",
        ]);
    ctx.emit(manifest, &result, met, &summary)
}

pub fn bimodule(ctx: &RunContext, input: &Path, trials: usize, seed: u64) -> Result<bool> {
    let bytes = read(input)?;
    let raw: BimoduleJson = parse_json(&bytes, input)?;
    let m = raw
        .parse()
        .with_context(|| format!("invalid bimodule in {}", input.display()))?;
    if trials == 0 {
        bail!("--trials must be at least 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let result = bimodule_report(&m, trials, &mut rng);
    let met = result.contracts_met();
    let summary = format!(
        "imprimitivity residual {:e}, dual map {}, {}",
        result.imprimitivity_residual,
        if result.dual_map_matches {
            "recovered"
        } else {
            "NOT recovered"
        },
        if result.freeness.free {
            "free"
        } else {
            "not free"
        }
    );
    let manifest = RunManifest::new("bimodule", &bytes)
        .param("trials", trials)
        .seed(seed)
        .anchors(&[
            "Hilbert bimodule inner products",
            "imprimitivity condition",
            "dual partial map on the spectrum",
            "topological freeness of a finite partial map",
        ]);
    ctx.emit(manifest, &result, met, &summary)
}

/// Truncations used by `uniqueness --trunc L`: even values from 4, then `L`.
pub fn truncation_ladder(trunc: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (MIN_TRUNC..=trunc).step_by(2).collect();
    if out.last() != Some(&trunc) {
        out.push(trunc);
    }
    out
}

#[derive(Serialize)]
struct UniquenessResult {
    #[serde(flatten)]
    report: UniquenessReport,
    truncations: Vec<usize>,
    final_relative_gap: f64,
    expectation_violation: f64,
    expectation_tolerance: f64,
}

pub fn uniqueness(
    ctx: &RunContext,
    input: &Path,
    trunc: usize,
    samples: usize,
    seed: u64,
) -> Result<bool> {
    let (bytes, a) = load_matrix(input)?;
    check_trunc(trunc, MIN_TRUNC)?;
    let ladder = truncation_ladder(trunc);
    let report = agreement_experiment(&a, &ladder, samples, seed)?;
    let violation = expectation_contractivity(&a, trunc, samples, seed)?;
    let result = UniquenessResult {
        final_relative_gap: report.final_relative_gap(),
        report,
        truncations: ladder,
        expectation_violation: violation,
        expectation_tolerance: CONTRACTIVITY_TOLERANCE,
    };
    // Agreement is evidence rather than a contract; contractivity is a contract.
    let met = violation <= CONTRACTIVITY_TOLERANCE;
    let summary = format!(
        "conclusion {}, final relative gap {:.4}",
        serde_json::to_value(result.report.conclusion)?
            .as_str()
            .unwrap_or_default(),
        result.final_relative_gap
    );
    let manifest = RunManifest::new("uniqueness", &bytes)
        .param("trunc", trunc)
        .param("samples", samples)
        .seed(seed)
        .anchors(&[
            "uniqueness under topological freeness (observational)",
            "conditional expectation onto the fixed-point algebra",
        ]);
    ctx.emit(manifest, &result, met, &summary)
}

pub fn gap_witness(ctx: &RunContext, input: &Path) -> Result<bool> {
    let (bytes, a) = load_matrix(input)?;
    let result = norm_gap_witness(&a)?;
    let met = result
        .relation_residuals
        .iter()
        .all(|r| r.residual <= WITNESS_TOLERANCE)
        && result.conclusion == cklab_core::uniqueness_lab::Conclusion::GapWitness;
    let norms = &result.experiments[0].measurements[0].norms;
    let summary = format!("witness norms {:?}", norms);
    let manifest = RunManifest::new("gap-witness", &bytes)
        .anchors(&["failure of uniqueness without condition (I)"]);
    ctx.emit(manifest, &result, met, &summary)
}
