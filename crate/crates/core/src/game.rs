//! Queries, sum-game merging and the strategy driver.

use std::collections::HashSet;
use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SolveError};
use crate::strategy::{BoxStrategy, Step};

/// A query in a game closed under disjoint sums.
pub trait SumQuery: Clone + Debug + Send + 'static {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    /// Adds a query acting on a disjoint support.
    fn absorb(&mut self, other: &Self);
    /// Indices the query touches.
    fn support(&self) -> Vec<u32>;
}

/// A set of 1-based coin or element ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subset(pub Vec<u32>);

impl Subset {
    pub fn single(id: u32) -> Self {
        Subset(vec![id])
    }

    pub fn ids(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sorted(mut self) -> Self {
        self.0.sort_unstable();
        self
    }
}

impl SumQuery for Subset {
    fn zero() -> Self {
        Subset(Vec::new())
    }
    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
    fn absorb(&mut self, other: &Self) {
        self.0.extend_from_slice(&other.0);
    }
    fn support(&self) -> Vec<u32> {
        self.0.clone()
    }
}

/// A sparse Mastermind guess: `(position, color)` pairs, 0-based positions,
/// colors from 1. Unlisted positions are blank.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pattern(pub Vec<(u32, u32)>);

impl Pattern {
    pub fn dense(&self, n: usize) -> Vec<u32> {
        let mut v = vec![0; n];
        for &(p, c) in &self.0 {
            v[p as usize] = c;
        }
        v
    }

    pub fn from_dense(v: &[u32]) -> Self {
        Pattern(
            v.iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(i, &c)| (i as u32, c))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl SumQuery for Pattern {
    fn zero() -> Self {
        Pattern(Vec::new())
    }
    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
    fn absorb(&mut self, other: &Self) {
        self.0.extend_from_slice(&other.0);
    }
    fn support(&self) -> Vec<u32> {
        self.0.iter().map(|&(p, _)| p).collect()
    }
}

/// Merges local queries of instances with disjoint supports into one root query.
pub fn merge_queries<Q: SumQuery>(parts: &[(&[u32], Q)]) -> Result<Q> {
    let mut seen = HashSet::new();
    for (support, q) in parts {
        for &i in support.iter() {
            if !seen.insert(i) {
                return Err(SolveError::SupportOverlap);
            }
        }
        let own: HashSet<u32> = support.iter().copied().collect();
        if q.support().iter().any(|i| !own.contains(i)) {
            return Err(SolveError::ShapeError("query leaves its instance support".into()));
        }
    }
    let mut out = Q::zero();
    for (_, q) in parts {
        out.absorb(q);
    }
    Ok(out)
}

/// Answers queries for a hidden codeword.
pub trait Oracle<Q> {
    fn answer(&mut self, q: &Q) -> Result<u64>;
}

impl<Q, F: FnMut(&Q) -> u64> Oracle<Q> for F {
    fn answer(&mut self, q: &Q) -> Result<u64> {
        Ok(self(q))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TranscriptStep<Q> {
    pub t: u64,
    pub query: Q,
    pub answer: u64,
    pub bound: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Transcript<Q> {
    pub steps: Vec<TranscriptStep<Q>>,
}

impl<Q: SumQuery> Transcript<Q> {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Steps that actually reached the oracle.
    pub fn queries(&self) -> usize {
        self.steps.iter().filter(|s| !s.query.is_zero()).count()
    }
}

/// Counts from a run that did not keep a transcript.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RunStats {
    /// Strategy length, zero queries included.
    pub steps: u64,
    /// Queries that reached the oracle.
    pub queries: u64,
}

/// Drives a strategy against an oracle, checking declared bounds and residues.
///
/// Zero queries are answered with 0 without consulting the oracle.
pub fn run_strategy<Q: SumQuery, O>(
    strategy: BoxStrategy<Q, O>,
    oracle: impl Oracle<Q>,
    cap: u64,
) -> Result<(O, Transcript<Q>)> {
    let mut tr = Transcript { steps: Vec::new() };
    let out = drive(strategy, oracle, cap, |t, q, answer, bound| {
        tr.steps.push(TranscriptStep { t, query: q, answer, bound })
    })?;
    Ok((out.0, tr))
}

/// Like [`run_strategy`] but keeps only counts.
pub fn run_counted<Q: SumQuery, O>(
    strategy: BoxStrategy<Q, O>,
    oracle: impl Oracle<Q>,
    cap: u64,
) -> Result<(O, RunStats)> {
    drive(strategy, oracle, cap, |_, _, _, _| {})
}

/// Like [`run_strategy`] but hands each step `(t, query, answer, bound)` to `log`.
pub fn run_logged<Q: SumQuery, O>(
    strategy: BoxStrategy<Q, O>,
    oracle: impl Oracle<Q>,
    cap: u64,
    log: impl FnMut(u64, Q, u64, Option<u64>),
) -> Result<(O, RunStats)> {
    drive(strategy, oracle, cap, log)
}

fn drive<Q: SumQuery, O>(
    mut strategy: BoxStrategy<Q, O>,
    mut oracle: impl Oracle<Q>,
    cap: u64,
    mut log: impl FnMut(u64, Q, u64, Option<u64>),
) -> Result<(O, RunStats)> {
    let mut stats = RunStats::default();
    loop {
        match strategy.step()? {
            Step::Done => return Ok((strategy.finish()?, stats)),
            Step::Ask(a) => {
                if stats.steps >= cap {
                    return Err(SolveError::NonTermination { cap });
                }
                stats.steps += 1;
                let answer = if a.query.is_zero() {
                    0
                } else {
                    stats.queries += 1;
                    oracle.answer(&a.query)?
                };
                if let Some(b) = a.bound {
                    if answer > b {
                        return Err(SolveError::BoundViolation { step: stats.steps, answer, bound: b });
                    }
                }
                if let Some(r) = a.residue {
                    if !r.matches(answer) {
                        return Err(SolveError::PredictabilityViolation {
                            answer,
                            value: r.value,
                            bits: r.bits,
                        });
                    }
                }
                log(stats.steps, a.query, answer, a.bound);
                strategy.feed(answer)?;
            }
        }
    }
}

/// Step cap used against runaway strategies.
pub fn step_cap(ceiling: u64) -> u64 {
    ceiling.saturating_mul(64).saturating_add(64)
}

/// `log2 |F| / log2(range)`: no strategy can be shorter.
pub fn info_lower_bound(codewords: f64, range: f64) -> f64 {
    info_lower_bound_log2(codewords.log2(), range)
}

/// Same as [`info_lower_bound`] with the codeword count given as its log2.
pub fn info_lower_bound_log2(log2_codewords: f64, range: f64) -> f64 {
    if range <= 1.0 {
        return if log2_codewords > 0.0 { f64::INFINITY } else { 0.0 };
    }
    log2_codewords / range.log2()
}
