//! Disjunctness measurement: exhaustive search over covering tuples,
//! randomized falsification sampling, and tightness certification.
//!
//! A matrix is s^e-disjunct when every column keeps at least e+1 1-entries
//! outside the union of any other s columns. The exhaustive search computes
//! the exact minimum private count over all (column, covering-set) tuples;
//! the sampled mode checks a claimed lower bound on as many random tuples as
//! requested. Tuple iteration order is frozen (columns ascending, covering
//! sets in lexicographic order) and the reduction is a pure minimum with a
//! total tie-break, so results never depend on the worker count.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::bits::BitVec;
use crate::design::{run_partitioned, ColumnOracle, PoolingMatrix, TupleCount, WITNESS_ROW_CAP};
use crate::error::{Error, Result};
use crate::exact::binomial;
use crate::rng::CounterRng;

/// Default cap on exhaustive workloads, in (column, covering-set) tuples.
pub const DEFAULT_WORKLOAD_BUDGET_TUPLES: u64 = 200_000_000;

/// How a report was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureMode {
    Exhaustive,
    Sampled,
}

/// Verdict of a disjunctness measurement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DisjunctStatus {
    /// Exhaustive: the matrix is s^e-disjunct with this (tight) e.
    Disjunct { e: u64 },
    /// Some column is fully covered by s others (private count 0), or a
    /// sampled tuple fell below the claimed threshold.
    NotDisjunct,
    /// Sampled mode: no sampled tuple fell below `threshold`. Evidence, not
    /// proof.
    LowerBoundNotFalsified { threshold: u64 },
}

/// The tuple realizing the minimum private count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub column: u64,
    pub covering: Vec<u64>,
    /// Up to 16 of the private row ranks, ascending.
    pub private_rows: Vec<u64>,
}

/// Result of a disjunctness measurement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisjunctReport {
    pub s: u64,
    pub mode: MeasureMode,
    /// Smallest private count over the examined tuples.
    pub min_private: u64,
    /// min_private - 1 when the exhaustive minimum is positive; absent for a
    /// non-disjunct matrix and in sampled mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_measured: Option<u64>,
    pub status: DisjunctStatus,
    pub witness: Witness,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn validate_tuple(col_count: u64, c: u64, others: &[u64]) -> Result<()> {
    if c >= col_count {
        return Err(Error::IndexOutOfRange(format!(
            "column {c} out of range for {col_count} columns"
        )));
    }
    for &o in others {
        if o >= col_count {
            return Err(Error::IndexOutOfRange(format!(
                "covering column {o} out of range for {col_count} columns"
            )));
        }
        if o == c {
            return Err(Error::SelfCover(c));
        }
    }
    let mut sorted = others.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::hypothesis(
            "covering set contains a duplicate column".to_string(),
        ));
    }
    Ok(())
}

/// Number of 1-entries of column `c` outside the union of `others`.
pub fn private_count(matrix: &PoolingMatrix, c: u64, others: &[u64]) -> Result<u64> {
    validate_tuple(matrix.col_count(), c, others)?;
    let mut union = BitVec::zeros(matrix.row_count());
    for &o in others {
        union.or_assign(matrix.column(o));
    }
    Ok(matrix.column(c).andnot_count(&union))
}

/// Scans all covering s-subsets for one column; returns the minimum count and
/// the first covering set attaining it (lexicographic order).
fn column_min(matrix: &PoolingMatrix, c: u64, s: u64) -> (u64, Vec<u64>) {
    let cols = matrix.col_count();
    let col = matrix.column(c);
    if s == 0 {
        return (col.count_ones(), Vec::new());
    }
    let s = s as usize;
    // others[j]: the j-th candidate covering column, skipping c itself.
    let rank_at = |j: u64| if j < c { j } else { j + 1 };
    let pool = cols - 1;
    let mut idx: Vec<u64> = (0..s as u64).collect();
    let mut unions: Vec<BitVec> = (0..s).map(|_| BitVec::zeros(matrix.row_count())).collect();
    let rebuild = |unions: &mut [BitVec], idx: &[u64], from: usize| {
        for u in from..s {
            if u == 0 {
                unions[0].clear();
            } else {
                let (lo, hi) = unions.split_at_mut(u);
                hi[0].copy_from(&lo[u - 1]);
            }
            unions[u].or_assign(matrix.column(rank_at(idx[u])));
        }
    };
    rebuild(&mut unions, &idx, 0);
    let mut best_count = u64::MAX;
    let mut best_set: Vec<u64> = Vec::new();
    loop {
        let count = col.andnot_count(&unions[s - 1]);
        if count < best_count {
            best_count = count;
            best_set = idx.iter().map(|&j| rank_at(j)).collect();
        }
        // Lexicographic successor of the index combination.
        let mut t = s as i64 - 1;
        while t >= 0 && idx[t as usize] == pool - (s as u64 - t as u64) {
            t -= 1;
        }
        if t < 0 {
            break;
        }
        let t = t as usize;
        idx[t] += 1;
        for u in t + 1..s {
            idx[u] = idx[u - 1] + 1;
        }
        rebuild(&mut unions, &idx, t);
    }
    (best_count, best_set)
}

/// Exact workload of an exhaustive measurement: C(cols, s+1) * (s+1) tuples.
pub fn exhaustive_workload(col_count: u64, s: u64) -> BigUint {
    binomial(col_count as i64, s as i64 + 1) * BigUint::from(s + 1)
}

/// Measures the exact minimum private count over every (column, covering
/// s-subset) tuple.
pub fn measure_exhaustive(
    matrix: &PoolingMatrix,
    s: u64,
    workers: usize,
    budget_tuples: u64,
) -> Result<DisjunctReport> {
    let cols = matrix.col_count();
    if cols < s + 1 {
        return Err(Error::hypothesis(format!(
            "matrix has {cols} columns, cannot cover with s={s} others"
        )));
    }
    let tuples = exhaustive_workload(cols, s);
    if tuples > BigUint::from(budget_tuples) {
        return Err(Error::WorkloadBudgetExceeded {
            tuples,
            budget: budget_tuples,
        });
    }
    let columns: Vec<u64> = (0..cols).collect();
    let per_column = run_partitioned(&columns, workers, |&c| column_min(matrix, c, s));
    // Global minimum with the frozen tie-break: count first, then column;
    // within a column the scan already kept the lexicographically first set.
    // The winner is therefore the first tuple a sequential scan would find,
    // no matter how many workers ran.
    let mut best_c = 0u64;
    for (c, res) in columns.iter().zip(&per_column).skip(1) {
        if res.0 < per_column[best_c as usize].0 {
            best_c = *c;
        }
    }
    let (min_private, covering) = per_column[best_c as usize].clone();
    let mut union = BitVec::zeros(matrix.row_count());
    for &o in &covering {
        union.or_assign(matrix.column(o));
    }
    let witness = Witness {
        column: best_c,
        covering,
        private_rows: matrix
            .column(best_c)
            .andnot_positions(&union, WITNESS_ROW_CAP),
    };
    let (e_measured, status) = if min_private >= 1 {
        (
            Some(min_private - 1),
            DisjunctStatus::Disjunct { e: min_private - 1 },
        )
    } else {
        (None, DisjunctStatus::NotDisjunct)
    };
    Ok(DisjunctReport {
        s,
        mode: MeasureMode::Exhaustive,
        min_private,
        e_measured,
        status,
        witness,
        trials: None,
        seed: None,
    })
}

/// Samples `trials` uniform (column, covering s-subset) tuples and checks the
/// claimed lower bound `threshold` on each private count. Trial t draws from
/// the stream (seed, t), so reports are identical for any worker count.
pub fn falsify_sampled(
    oracle: &dyn ColumnOracle,
    s: u64,
    threshold: u64,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<DisjunctReport> {
    if threshold < 1 {
        return Err(Error::hypothesis("threshold >= 1 fails".to_string()));
    }
    if trials < 1 {
        return Err(Error::hypothesis("trials >= 1 fails".to_string()));
    }
    let cols = oracle.col_count();
    if cols < s + 1 {
        return Err(Error::hypothesis(format!(
            "design has {cols} columns, cannot cover with s={s} others"
        )));
    }
    let tuples: Vec<(u64, Vec<u64>)> = (0..trials)
        .map(|t| {
            let mut rng = CounterRng::new(seed, t);
            let c = rng.below(cols);
            let others = rng.distinct_excluding(s, cols, c);
            (c, others)
        })
        .collect();
    let counts: Vec<TupleCount> = oracle.private_counts(&tuples, workers);
    let mut best_trial = 0usize;
    for (t, tc) in counts.iter().enumerate() {
        if tc.count < counts[best_trial].count {
            best_trial = t;
        }
    }
    let min_private = counts[best_trial].count;
    let witness = Witness {
        column: tuples[best_trial].0,
        covering: tuples[best_trial].1.clone(),
        private_rows: counts[best_trial].private_rows.clone(),
    };
    let status = if min_private < threshold {
        DisjunctStatus::NotDisjunct
    } else {
        DisjunctStatus::LowerBoundNotFalsified { threshold }
    };
    Ok(DisjunctReport {
        s,
        mode: MeasureMode::Sampled,
        min_private,
        e_measured: None,
        status,
        witness,
        trials: Some(trials),
        seed: Some(seed),
    })
}

/// Outcome of a tightness certification.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FullyCheck {
    /// The matrix is s^e-disjunct with both parameters tight: the measured e
    /// equals the claim and no column survives s+1 covers.
    Certified,
    Refuted { reason: String },
}

/// Certifies that (s, e) are tight disjunctness parameters of the matrix:
/// it is s^e-disjunct but neither s^(e+1)- nor (s+1)^e-disjunct.
///
/// Runs the exhaustive measurement at s and at s+1. Tightness in e holds iff
/// the measured e at s equals `e` exactly; tightness in s holds iff the
/// minimum private count at s+1 is at most e (by monotonicity this rules out
/// every pair (s1, e1) with s1 > s and e1 >= e as well).
pub fn check_fully(
    matrix: &PoolingMatrix,
    s: u64,
    e: u64,
    workers: usize,
    budget_tuples: u64,
) -> Result<FullyCheck> {
    let at_s = measure_exhaustive(matrix, s, workers, budget_tuples)?;
    match at_s.e_measured {
        Some(me) if me == e => {}
        Some(me) => {
            return Ok(FullyCheck::Refuted {
                reason: format!("measured e = {me} at s = {s}, claimed {e}"),
            })
        }
        None => {
            return Ok(FullyCheck::Refuted {
                reason: format!("matrix is not even s^0-disjunct at s = {s}"),
            })
        }
    }
    let at_s1 = measure_exhaustive(matrix, s + 1, workers, budget_tuples)?;
    if at_s1.min_private > e {
        return Ok(FullyCheck::Refuted {
            reason: format!(
                "matrix is still {}^{}-disjunct, so s = {s} is not tight at e = {e}",
                s + 1,
                at_s1.min_private - 1
            ),
        });
    }
    Ok(FullyCheck::Certified)
}
