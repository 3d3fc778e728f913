//! Zero-one transition matrices, admissible words and the one-sided shift
//! space `X_A`.
//!
//! Symbols are `0..n` internally and `1..=n` in every serialized form.
//! Infinite paths never appear directly: everything here is decided from
//! finite prefixes together with the eventually periodic tail that a
//! forced (out-degree one) continuation must enter.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

/// Largest depth accepted by [`brute_force_condition_i`].
pub const MAX_ORACLE_DEPTH: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("matrix is not square")]
    NonSquare,
    #[error("entry ({row},{col}) is {value}, expected 0 or 1")]
    BadEntry { row: usize, col: usize, value: i64 },
    #[error("row {0} has no nonzero entry")]
    ZeroRow(usize),
    #[error("column {0} has no nonzero entry")]
    ZeroColumn(usize),
    #[error("need at least 2 symbols, got {0}")]
    TooSmall(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("symbol {symbol} is outside 1..={n}")]
    SymbolOutOfRange { symbol: usize, n: usize },
    #[error("transition at position {position} is not allowed by the matrix")]
    NotAdmissible { position: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubshiftError {
    #[error("word length must be at least 1")]
    LengthZero,
    #[error("oracle depth {0} exceeds the limit of {MAX_ORACLE_DEPTH}")]
    DepthTooLarge(usize),
    #[error("oracle depth must be at least 1")]
    DepthZero,
}

/// Square 0-1 matrix with no zero rows or columns and at least two symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ZeroOneMatrix {
    n: usize,
    entries: Vec<bool>,
}

/// Wire form: `{"n": 2, "rows": [[1,1],[1,0]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub rows: Vec<Vec<i64>>,
}

impl ZeroOneMatrix {
    /// Validates a raw integer array.
    pub fn new(rows: &[Vec<i64>]) -> Result<Self, MatrixError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(MatrixError::NonSquare);
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => entries.push(false),
                    1 => entries.push(true),
                    _ => {
                        return Err(MatrixError::BadEntry {
                            row: i + 1,
                            col: j + 1,
                            value: v,
                        })
                    }
                }
            }
        }
        if n < 2 {
            return Err(MatrixError::TooSmall(n));
        }
        for i in 0..n {
            if !(0..n).any(|j| entries[i * n + j]) {
                return Err(MatrixError::ZeroRow(i + 1));
            }
        }
        for j in 0..n {
            if !(0..n).any(|i| entries[i * n + j]) {
                return Err(MatrixError::ZeroColumn(j + 1));
            }
        }
        Ok(Self { n, entries })
    }

    pub fn from_json(raw: &MatrixJson) -> Result<Self, MatrixError> {
        if raw.rows.len() != raw.n {
            return Err(MatrixError::NonSquare);
        }
        Self::new(&raw.rows)
    }

    pub fn to_json(&self) -> MatrixJson {
        MatrixJson {
            n: self.n,
            rows: self
                .rows()
                .into_iter()
                .map(|r| r.into_iter().map(i64::from).collect())
                .collect(),
        }
    }

    /// The full shift on `n` symbols.
    pub fn full(n: usize) -> Result<Self, MatrixError> {
        Self::new(&vec![vec![1; n]; n])
    }

    /// The identity matrix: `X_A` is the set of constant sequences.
    pub fn identity(n: usize) -> Result<Self, MatrixError> {
        let rows: Vec<Vec<i64>> = (0..n)
            .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
            .collect();
        Self::new(&rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `A(i,j)` with 0-based indices.
    #[inline]
    pub fn allows(&self, i: usize, j: usize) -> bool {
        self.entries[i * self.n + j]
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if self.allows(i, j) {
            1.0
        } else {
            0.0
        }
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| u8::from(self.allows(i, j))).collect())
            .collect()
    }

    pub fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| self.allows(i, j))
    }

    pub fn predecessors(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&i| self.allows(i, j))
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.successors(i).count()
    }

    /// Column sums `n_j = Σ_i A(i,j)`, all at least 1 for a valid matrix.
    pub fn column_sums(&self) -> Vec<usize> {
        (0..self.n).map(|j| self.predecessors(j).count()).collect()
    }

    /// Every 0-1 matrix of size `n` that passes validation, in the order of
    /// the bit pattern `Σ A(i,j) 2^(i n + j)`.
    pub fn enumerate_valid(n: usize) -> Vec<ZeroOneMatrix> {
        let cells = n * n;
        assert!(cells < 32, "exhaustive enumeration only for small n");
        (0u32..(1u32 << cells))
            .filter_map(|bits| {
                let rows: Vec<Vec<i64>> = (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| i64::from((bits >> (i * n + j)) & 1))
                            .collect()
                    })
                    .collect();
                ZeroOneMatrix::new(&rows).ok()
            })
            .collect()
    }
}

impl fmt::Display for ZeroOneMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows()
            .iter()
            .map(|r| {
                let cells: Vec<String> = r.iter().map(u8::to_string).collect();
                format!("[{}]", cells.join(","))
            })
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}

impl Serialize for ZeroOneMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

/// Finite admissible word, also used as a path, a cylinder prefix or a
/// multi-index. The empty word is allowed and stands for the empty prefix.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Builds a word from 0-based symbols, checking range and admissibility.
    pub fn new(symbols: Vec<usize>, a: &ZeroOneMatrix) -> Result<Self, WordError> {
        for &s in &symbols {
            if s >= a.n() {
                return Err(WordError::SymbolOutOfRange {
                    symbol: s + 1,
                    n: a.n(),
                });
            }
        }
        for (t, pair) in symbols.windows(2).enumerate() {
            if !a.allows(pair[0], pair[1]) {
                return Err(WordError::NotAdmissible { position: t + 1 });
            }
        }
        Ok(Word(symbols))
    }

    pub fn from_one_based(symbols: &[usize], a: &ZeroOneMatrix) -> Result<Self, WordError> {
        let mut zero_based = Vec::with_capacity(symbols.len());
        for &s in symbols {
            if s == 0 || s > a.n() {
                return Err(WordError::SymbolOutOfRange {
                    symbol: s,
                    n: a.n(),
                });
            }
            zero_based.push(s - 1);
        }
        Self::new(zero_based, a)
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|s| s + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<usize> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<usize> {
        self.0.last().copied()
    }

    /// The shift σ: drops the first symbol.
    pub fn shifted(&self) -> Word {
        Word(self.0.iter().skip(1).copied().collect())
    }

    pub fn prefix(&self, k: usize) -> Word {
        Word(self.0[..k.min(self.0.len())].to_vec())
    }

    pub fn suffix_from(&self, k: usize) -> Word {
        Word(self.0[k.min(self.0.len())..].to_vec())
    }

    pub fn starts_with(&self, other: &Word) -> bool {
        self.0.starts_with(&other.0)
    }

    /// `self · j`; admissibility is the caller's concern.
    pub fn appended(&self, j: usize) -> Word {
        let mut v = self.0.clone();
        v.push(j);
        Word(v)
    }

    /// `i · self`; admissibility is the caller's concern.
    pub fn prepended(&self, i: usize) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(i);
        v.extend_from_slice(&self.0);
        Word(v)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Whether `self · other` is admissible, given both parts are.
    pub fn joins(&self, other: &Word, a: &ZeroOneMatrix) -> bool {
        match (self.last(), other.first()) {
            (Some(x), Some(y)) => a.allows(x, y),
            _ => true,
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.to_one_based().iter().map(usize::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_one_based().serialize(serializer)
    }
}

/// All admissible words of length `k` in lexicographic order.
pub fn admissible_words(a: &ZeroOneMatrix, k: usize) -> Result<Vec<Word>, SubshiftError> {
    if k == 0 {
        return Err(SubshiftError::LengthZero);
    }
    let mut out = Vec::new();
    let mut stack = Vec::with_capacity(k);
    fn extend(a: &ZeroOneMatrix, k: usize, stack: &mut Vec<usize>, out: &mut Vec<Word>) {
        if stack.len() == k {
            out.push(Word(stack.clone()));
            return;
        }
        let candidates: Vec<usize> = match stack.last() {
            None => (0..a.n()).collect(),
            Some(&s) => a.successors(s).collect(),
        };
        for j in candidates {
            stack.push(j);
            extend(a, k, stack, out);
            stack.pop();
        }
    }
    extend(a, k, &mut stack, &mut out);
    Ok(out)
}

/// Admissible words of every length `1..=max_len`, shortest first.
pub fn admissible_words_up_to(a: &ZeroOneMatrix, max_len: usize) -> Vec<Word> {
    (1..=max_len)
        .flat_map(|k| admissible_words(a, k).unwrap_or_default())
        .collect()
}

/// States from which exactly one infinite admissible path departs.
///
/// Greatest fixed point of `S = { i : out-degree(i) = 1 and succ(i) ∈ S }`,
/// computed by pruning from the set of out-degree-one states.
pub fn forced_states(a: &ZeroOneMatrix) -> BTreeSet<usize> {
    let mut forced: BTreeSet<usize> = (0..a.n()).filter(|&i| a.out_degree(i) == 1).collect();
    loop {
        let drop: Vec<usize> = forced
            .iter()
            .copied()
            .filter(|&i| {
                let succ = a.successors(i).next().expect("rows are nonzero");
                !forced.contains(&succ)
            })
            .collect();
        if drop.is_empty() {
            return forced;
        }
        for i in drop {
            forced.remove(&i);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VerdictMethod {
    #[serde(rename = "forced-cycle")]
    ForcedCycle,
    #[serde(rename = "brute-force")]
    BruteForce,
}

/// A cylinder that is a single point: `prefix` followed by `cycle` repeated
/// after the forced transient.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IsolationWitness {
    pub prefix: Word,
    pub cycle: Word,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionIVerdict {
    pub holds: bool,
    pub witness: Option<IsolationWitness>,
    pub method: VerdictMethod,
}

/// Follows a walk until the first repeated state and returns the cycle it
/// closes, listed from the first cycle state reached.
fn first_cycle(walk: &[usize]) -> Option<Vec<usize>> {
    let mut seen = BTreeMap::new();
    for (t, &s) in walk.iter().enumerate() {
        if let Some(&t0) = seen.get(&s) {
            return Some(walk[t0..t].to_vec());
        }
        seen.insert(s, t);
    }
    None
}

/// Decides whether `X_A` has no isolated points.
///
/// A cylinder `[w]` is a single point exactly when the last symbol of `w`
/// is a forced state, so the shortest isolating prefix is the smallest
/// forced symbol on its own.
pub fn check_condition_i(a: &ZeroOneMatrix) -> ConditionIVerdict {
    let forced = forced_states(a);
    let Some(&start) = forced.iter().next() else {
        return ConditionIVerdict {
            holds: true,
            witness: None,
            method: VerdictMethod::ForcedCycle,
        };
    };
    let mut walk = vec![start];
    let mut cur = start;
    for _ in 0..=a.n() {
        cur = a.successors(cur).next().expect("rows are nonzero");
        walk.push(cur);
    }
    let cycle = first_cycle(&walk).expect("a walk of n+2 states repeats");
    ConditionIVerdict {
        holds: false,
        witness: Some(IsolationWitness {
            prefix: Word(vec![start]),
            cycle: Word(cycle),
        }),
        method: VerdictMethod::ForcedCycle,
    }
}

/// Counts length-`len` continuations after `state`, stopping at `cap`.
/// Records the first continuation found in `first`.
fn count_continuations(
    a: &ZeroOneMatrix,
    state: usize,
    len: usize,
    cap: usize,
    path: &mut Vec<usize>,
    first: &mut Option<Vec<usize>>,
) -> usize {
    if len == 0 {
        if first.is_none() {
            first.replace(path.clone());
        }
        return 1;
    }
    let mut total = 0;
    for j in a.successors(state) {
        path.push(j);
        total += count_continuations(a, j, len - 1, cap - total, path, first);
        path.pop();
        if total >= cap {
            break;
        }
    }
    total
}

/// Independent oracle for condition (I) by cylinder enumeration.
///
/// Prefixes of length `ℓ ≤ depth/2` are scanned in shortlex order; a prefix
/// is declared isolating when its extensions to total length `depth` are
/// unique and the forced tail visibly closes a cycle. Every tail has at
/// least `depth - depth/2` symbols, so from `depth ≥ 2n+1` on each forced
/// tail repeats a state and the answer is exact.
pub fn brute_force_condition_i(
    a: &ZeroOneMatrix,
    depth: usize,
) -> Result<ConditionIVerdict, SubshiftError> {
    if depth == 0 {
        return Err(SubshiftError::DepthZero);
    }
    if depth > MAX_ORACLE_DEPTH {
        return Err(SubshiftError::DepthTooLarge(depth));
    }
    for len in 1..=depth / 2 {
        for prefix in admissible_words(a, len)? {
            let last = prefix.last().expect("nonempty");
            let mut first = None;
            let count = count_continuations(a, last, depth - len, 2, &mut Vec::new(), &mut first);
            if count != 1 {
                continue;
            }
            let mut walk = vec![last];
            walk.extend(first.expect("one continuation recorded"));
            if let Some(cycle) = first_cycle(&walk) {
                return Ok(ConditionIVerdict {
                    holds: false,
                    witness: Some(IsolationWitness {
                        prefix,
                        cycle: Word(cycle),
                    }),
                    method: VerdictMethod::BruteForce,
                });
            }
        }
    }
    Ok(ConditionIVerdict {
        holds: true,
        witness: None,
        method: VerdictMethod::BruteForce,
    })
}

/// Smallest oracle depth at which [`brute_force_condition_i`] is exact.
pub fn certified_oracle_depth(a: &ZeroOneMatrix) -> usize {
    2 * a.n() + 1
}

/// Periodic points of period dividing `period` that are isolated in `X_A`,
/// each given by its repeating block of length `period`.
///
/// A periodic point visits each of its states infinitely often, so it is
/// isolated only if every state on its orbit has out-degree one.
pub fn isolated_periodic_points(a: &ZeroOneMatrix, period: usize) -> Vec<Word> {
    let mut out = Vec::new();
    for start in 0..a.n() {
        let mut block = Vec::with_capacity(period);
        let mut cur = start;
        let mut closed = true;
        for _ in 0..period {
            if a.out_degree(cur) != 1 {
                closed = false;
                break;
            }
            block.push(cur);
            cur = a.successors(cur).next().expect("rows are nonzero");
        }
        if closed && cur == start {
            out.push(Word(block));
        }
    }
    out
}

/// `true` when the points with `σ^period x = x` form a set with empty
/// interior, i.e. no cylinder consists of such points only.
///
/// Any all-periodic cylinder is finite, hence contains an isolated periodic
/// point, and conversely an isolated periodic point is a singleton
/// cylinder. `period = 0` means `σ⁰ = id`, which fixes every cylinder.
pub fn periodic_interior_check(a: &ZeroOneMatrix, period: usize) -> bool {
    if period == 0 {
        return false;
    }
    isolated_periodic_points(a, period).is_empty()
}
