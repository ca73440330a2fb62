//! Sums of many independent terms, solved through the pile family
//! `B_n = k_n·A` that weighs `n` terms one by one and halves the rest.

use std::fmt::Debug;
use std::sync::Arc;

use crate::engine::{self, Outcome, SplitFamily, FamilyStrategy};
use crate::error::{Result, SolveError};
use crate::game::SumQuery;
use crate::schedule::{metered, Schedule};
use crate::strategy::{done, map_output, sequence, then, BoxStrategy};

/// `k_1 = 1`, `k_n = n + k_⌈n/2⌉ + k_⌊n/2⌋`.
pub fn k(n: usize) -> usize {
    if n <= 1 {
        return n;
    }
    n + k(n.div_ceil(2)) + k(n / 2)
}

/// Least `n` with `k_n ≥ count`.
pub fn pile_size(count: usize) -> usize {
    let mut n = 1;
    while k(n) < count {
        n += 1;
    }
    n
}

/// Builds the solver of term `i`.
pub type TermSolver<Q, T> = Arc<dyn Fn(usize) -> Result<BoxStrategy<Q, T>> + Send + Sync>;

#[derive(Clone, Debug)]
pub struct Pile {
    pub n: usize,
    pub terms: Vec<usize>,
}

struct SumFamily<Q, T> {
    count: usize,
    alpha: f64,
    solver: TermSolver<Q, T>,
}

impl<Q: SumQuery, T: Clone + Debug + Send + 'static> SumFamily<Q, T> {
    fn term(&self, i: usize) -> Result<BoxStrategy<Q, Vec<(usize, T)>>> {
        if i >= self.count {
            return Ok(done(Vec::new()));
        }
        let s = metered((self.solver)(i)?, self.alpha);
        Ok(map_output(s, move |t| Ok(vec![(i, t)])))
    }
}

impl<Q: SumQuery, T: Clone + Debug + Send + Sync + 'static> SplitFamily for SumFamily<Q, T> {
    type Query = Q;
    type Instance = Pile;
    type Fact = (usize, T);

    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn size(&self, inst: &Pile) -> usize {
        inst.n
    }

    fn base(&self, inst: Pile) -> Result<FamilyStrategy<Self>> {
        let s = self.term(inst.terms[0])?;
        Ok(map_output(s, |f| Ok(Outcome::solved(f))))
    }

    fn split(&self, inst: Pile) -> Result<FamilyStrategy<Self>> {
        let n = inst.n;
        let (now, rest) = inst.terms.split_at(n);
        let (l, r) = rest.split_at(k(n.div_ceil(2)));
        let children = vec![
            Pile { n: n.div_ceil(2), terms: l.to_vec() },
            Pile { n: n / 2, terms: r.to_vec() },
        ];
        let parts = now.iter().map(|&i| self.term(i)).collect::<Result<Vec<_>>>()?;
        Ok(map_output(sequence(parts), move |v| {
            Ok(Outcome { children, facts: v.into_iter().flatten().collect() })
        }))
    }
}

/// Solves `count` independent terms whose solutions have weight at most
/// `alpha` (length at most `alpha` with answers in {0,1} when `simple`).
/// Outcomes come back in term order.
pub fn solve_sum<Q, T>(
    count: usize,
    alpha: f64,
    simple: bool,
    solver: TermSolver<Q, T>,
) -> Result<BoxStrategy<Q, Vec<T>>>
where
    Q: SumQuery,
    T: Clone + Debug + Send + Sync + 'static,
{
    if count == 0 {
        return Ok(done(Vec::new()));
    }
    if alpha <= 0.0 {
        return Err(SolveError::InvalidParameters("term weight must be positive".into()));
    }
    let n = pile_size(count);
    let pile = Pile { n, terms: (0..k(n)).collect() };
    let fam = Arc::new(SumFamily { count, alpha, solver });
    let s = if simple {
        engine::solve(fam, pile)?
    } else {
        engine::solve_bounded(fam, pile, Schedule::root())?
    };
    Ok(map_output(s, move |facts| {
        let mut out: Vec<Option<T>> = vec![None; count];
        for (i, t) in facts {
            out[i] = Some(t);
        }
        out.into_iter()
            .enumerate()
            .map(|(i, t)| t.ok_or_else(|| SolveError::ImpossibleState(format!("term {i} unsolved"))))
            .collect()
    }))
}

/// Ceiling on the steps of [`solve_sum`].
pub fn sum_ceiling(count: usize, alpha: f64, simple: bool) -> u64 {
    if count == 0 {
        return 0;
    }
    let n = pile_size(count);
    if simple {
        engine::solve_ceiling(alpha.ceil() as u64, n)
    } else {
        engine::bounded_ceiling(alpha, n)
    }
}

/// A bounded family whose split weight grows sublinearly in the size.
pub trait LeafHeavy: SplitFamily {
    /// Upper bound on the weight of splitting a size-`m` instance.
    fn split_weight(&self, m: usize) -> f64;
    /// Upper bound on the weight of the base case.
    fn base_weight(&self) -> f64;

    /// Weight of solving a size-`m` instance by splitting all the way down.
    fn sequential_weight(&self, m: usize) -> f64 {
        match m {
            0 => 0.0,
            1 => self.base_weight(),
            _ => {
                self.split_weight(m)
                    + self.sequential_weight(m.div_ceil(2))
                    + self.sequential_weight(m / 2)
            }
        }
    }
}

/// Depth `k` with `2^k ∈ [√n, 2√n)`.
pub fn leaf_depth(n: usize) -> u32 {
    let mut k = 0;
    while ((1u64 << k) as f64) < (n as f64).sqrt() {
        k += 1;
    }
    k
}

/// Splits `k` levels deep into about `√n` terms of size about `√n`, then
/// solves them all as one sum.
pub fn solve_leaf_heavy<F>(fam: Arc<F>, inst: F::Instance) -> Result<BoxStrategy<F::Query, Vec<F::Fact>>>
where
    F: LeafHeavy,
    F::Instance: Sync,
    F::Fact: Sync,
{
    let n = fam.size(&inst);
    if n <= 1 {
        return engine::solve_sequential_weighted(&fam, inst);
    }
    let depth = leaf_depth(n);
    let f2 = fam.clone();
    Ok(then(split_levels(fam, vec![inst], Vec::new(), depth)?, move |(terms, mut facts), _| {
        let m = terms.iter().map(|t| f2.size(t)).max().unwrap_or(0);
        let alpha = f2.sequential_weight(m).max(1.0);
        let terms = Arc::new(terms);
        let f3 = f2.clone();
        let t2 = terms.clone();
        let solver: TermSolver<F::Query, Vec<F::Fact>> =
            Arc::new(move |i| engine::solve_sequential_weighted(&f3, t2[i].clone()));
        Ok(map_output(solve_sum(terms.len(), alpha, false, solver)?, move |v| {
            facts.extend(v.into_iter().flatten());
            Ok(facts)
        }))
    }))
}

type Level<F> = (Vec<<F as SplitFamily>::Instance>, Vec<<F as SplitFamily>::Fact>);

fn split_levels<F: LeafHeavy>(
    fam: Arc<F>,
    level: Vec<F::Instance>,
    facts: Vec<F::Fact>,
    depth: u32,
) -> Result<BoxStrategy<F::Query, Level<F>>> {
    if depth == 0 {
        return Ok(done((level, facts)));
    }
    let parts = level
        .into_iter()
        .map(|i| engine::split_weighted(&fam, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(then(sequence(parts), move |halves, _| {
        let mut facts = facts;
        let mut next = Vec::with_capacity(halves.len() * 2);
        for (l, r, f) in halves {
            next.push(l);
            next.push(r);
            facts.extend(f);
        }
        split_levels(fam, next, facts, depth - 1)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pile_sizes() {
        assert_eq!((k(1), k(2), k(4), k(8)), (1, 4, 12, 32));
        for p in 0..8 {
            let n = 1usize << p;
            assert_eq!(k(n), n * (1 + p));
        }
        assert_eq!(pile_size(12), 4);
        assert_eq!(pile_size(13), 5);
    }

    #[test]
    fn leaf_depths() {
        for n in 2..5000usize {
            let d = 1u64 << leaf_depth(n);
            let r = (n as f64).sqrt();
            assert!(d as f64 >= r && (d as f64) < 2.0 * r, "n={n}");
        }
    }
}
