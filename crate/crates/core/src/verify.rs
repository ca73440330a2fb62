//! Runs solvers against synthetic oracles and checks every decode.

use std::fmt;
use std::time::Instant;

use rand::SeedableRng;
use serde::Serialize;

use crate::error::{Result, SolveError};
use crate::game::{run_logged, RunStats};
use crate::games::{AnyQuery, GameSpec};
use crate::schedule::weight_of;
use crate::strategy::BoxStrategy;

/// Default limit on exhaustive enumeration.
pub const DEFAULT_BUDGET: u128 = 1 << 20;

/// Measurements of one solver run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct RunRecord {
    /// Strategy length, zero queries included.
    pub steps: u64,
    /// Queries that reached the oracle.
    pub queries: u64,
    /// Sum of `log2(b+1)^2` over the declared bounds.
    pub weight: f64,
}

/// Runs `solver` against `code` and returns its decode.
pub fn run_once(
    spec: &GameSpec,
    solver: BoxStrategy<AnyQuery, Vec<u32>>,
    code: &[u32],
) -> Result<(Vec<u32>, RunRecord)> {
    let mut weight = 0.0;
    let (out, RunStats { steps, queries }) =
        run_logged(solver, |q: &AnyQuery| spec.answer(code, q), spec.step_cap(), |_, q, _, b| {
            if let (false, Some(b)) = (crate::game::SumQuery::is_zero(&q), b) {
                weight += weight_of(b);
            }
        })?;
    Ok((out, RunRecord { steps, queries, weight }))
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub spec: GameSpec,
    pub mode: String,
    pub codewords: u64,
    pub max_steps: u64,
    pub max_queries: u64,
    pub mean_queries: f64,
    pub max_weight: f64,
    pub ceiling: Option<u64>,
    pub lower_bound: f64,
    pub violation_count: u64,
    /// The first few violations.
    pub violations: Vec<String>,
    pub elapsed_ms: u128,
}

const KEEP: usize = 20;

impl Report {
    pub fn ok(&self) -> bool {
        self.violation_count == 0
    }

    /// Whether the worst case reaches the information-theoretic bound.
    pub fn meets_lower_bound(&self) -> bool {
        self.max_queries as f64 >= (self.lower_bound - 1e-9).ceil()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "game      {}", self.spec.describe())?;
        writeln!(f, "mode      {}", self.mode)?;
        writeln!(f, "codewords {}", self.codewords)?;
        writeln!(f, "queries   max {} mean {:.2}", self.max_queries, self.mean_queries)?;
        writeln!(f, "steps     max {}", self.max_steps)?;
        match self.ceiling {
            Some(c) => writeln!(f, "ceiling   {c}")?,
            None => writeln!(f, "ceiling   -")?,
        }
        writeln!(f, "lower     {:.3}", self.lower_bound)?;
        writeln!(f, "weight    max {:.2}", self.max_weight)?;
        writeln!(f, "elapsed   {} ms", self.elapsed_ms)?;
        writeln!(f, "violations {}", self.violation_count)?;
        for v in &self.violations {
            writeln!(f, "  {v}")?;
        }
        Ok(())
    }
}

/// Checks `solver` on each codeword: exact decode, no runtime assertion
/// failures, and length within the ceiling when one is declared.
pub fn verify_with(
    spec: &GameSpec,
    mode: &str,
    codes: impl IntoIterator<Item = Vec<u32>>,
    mut solver: impl FnMut() -> Result<BoxStrategy<AnyQuery, Vec<u32>>>,
) -> Report {
    let start = Instant::now();
    let ceiling = spec.ceiling();
    let mut r = Report {
        spec: spec.clone(),
        mode: mode.to_string(),
        codewords: 0,
        max_steps: 0,
        max_queries: 0,
        mean_queries: 0.0,
        max_weight: 0.0,
        ceiling,
        lower_bound: spec.lower_bound(),
        violation_count: 0,
        violations: Vec::new(),
        elapsed_ms: 0,
    };
    let mut total = 0u64;
    let flag = |r: &mut Report, msg: String| {
        r.violation_count += 1;
        if r.violations.len() < KEEP {
            r.violations.push(msg);
        }
    };
    for code in codes {
        r.codewords += 1;
        let outcome = solver().and_then(|s| run_once(spec, s, &code));
        match outcome {
            Err(e) => flag(&mut r, format!("{code:?}: {e}")),
            Ok((got, rec)) => {
                total += rec.queries;
                r.max_steps = r.max_steps.max(rec.steps);
                r.max_queries = r.max_queries.max(rec.queries);
                r.max_weight = r.max_weight.max(rec.weight);
                if got != code {
                    flag(&mut r, format!("{code:?}: decoded {got:?}"));
                }
                if let Some(c) = ceiling {
                    if rec.steps > c {
                        flag(&mut r, format!("{code:?}: {} steps over ceiling {c}", rec.steps));
                    }
                }
            }
        }
    }
    if r.codewords > 0 {
        r.mean_queries = total as f64 / r.codewords as f64;
    }
    r.elapsed_ms = start.elapsed().as_millis();
    r
}

/// Verifies every codeword; refuses spaces larger than `budget`.
pub fn verify_exhaustive(spec: &GameSpec, budget: u128) -> Result<Report> {
    spec.validate()?;
    let count = spec.codeword_count().unwrap_or(u128::MAX);
    if count > budget {
        return Err(SolveError::BudgetExceeded { count, cap: budget });
    }
    Ok(verify_with(spec, "exhaustive", spec.codewords(), || spec.solver()))
}

/// Verifies `trials` codewords drawn from a seeded generator.
pub fn verify_random(spec: &GameSpec, trials: u64, seed: u64) -> Result<Report> {
    spec.validate()?;
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let codes: Vec<Vec<u32>> = (0..trials).map(|_| spec.random_codeword(&mut rng)).collect();
    Ok(verify_with(spec, &format!("random({trials}, seed {seed})"), codes, || spec.solver()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::GameKind;
    use crate::strategy::{Ask, Plan};
    use crate::Subset;

    #[test]
    fn three_coins() {
        let r = verify_exhaustive(&GameSpec::new(GameKind::Coins, 3), DEFAULT_BUDGET).unwrap();
        assert_eq!(r.codewords, 8);
        assert!(r.ok(), "{r}");
        assert!(r.meets_lower_bound());
    }

    #[test]
    fn two_by_two_black_peg() {
        let r = verify_exhaustive(&GameSpec::new(GameKind::MastermindBp, 2).with_k(2), DEFAULT_BUDGET).unwrap();
        assert_eq!(r.codewords, 4);
        assert!(r.ok(), "{r}");
    }

    #[test]
    fn broken_solver_is_caught() {
        // weighs coins 1 and 2, then guesses coin 3 is genuine
        let spec = GameSpec::new(GameKind::Coins, 3);
        let broken = || -> Result<BoxStrategy<AnyQuery, Vec<u32>>> {
            let one = |i| Ask::bounded(AnyQuery::Set(Subset::single(i)), 1);
            Ok(Plan::ask(one(1), move |a| {
                Ok(Plan::ask(one(2), move |b| Ok(Plan::Done(vec![a as u32, b as u32, 0]))))
            })
            .into_strategy())
        };
        let r = verify_with(&spec, "exhaustive", spec.codewords(), broken);
        assert_eq!(r.violation_count, 4);
        assert!(!r.ok());
    }

    #[test]
    fn budget_refuses() {
        let e = verify_exhaustive(&GameSpec::new(GameKind::Coins, 30), DEFAULT_BUDGET).unwrap_err();
        assert!(matches!(e, SolveError::BudgetExceeded { .. }));
    }

    #[test]
    fn random_runs_are_seeded() {
        let s = GameSpec::new(GameKind::MastermindBp, 6).with_k(6);
        let a = verify_random(&s, 5, 3).unwrap();
        let b = verify_random(&s, 5, 3).unwrap();
        assert!(a.ok());
        assert_eq!((a.max_queries, a.max_steps), (b.max_queries, b.max_steps));
    }
}
