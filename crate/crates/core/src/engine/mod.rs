//! Generic solvers for families that split in half cheaply.
//!
//! A family member `A_n` of size `n` is solved in two phases: a partial
//! splitting into the preprocessed sum `P_n`, and the recursive
//! four-into-three solution of `P_n`.

mod bounded;
mod fourthree;
mod simple;

use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{Result, SolveError};
use crate::game::SumQuery;
use crate::schedule::metered;
use crate::strategy::{done, map_output, sequence, then, BoxStrategy, Step, Strategy};

pub use bounded::{beta_units, bounded_ceiling, solve_bounded, solve_preprocessed_bounded, to_r_reduction};
pub use fourthree::{four_to_three, Layout};
pub use simple::{solve, solve_ceiling, solve_preprocessed, stacked_solve};

/// Children and learned facts at the end of a reduction.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome<I, F> {
    pub children: Vec<I>,
    pub facts: Vec<F>,
}

impl<I, F> Outcome<I, F> {
    pub fn solved(facts: Vec<F>) -> Self {
        Outcome { children: Vec::new(), facts }
    }
}

pub type FamilyStrategy<F> = BoxStrategy<
    <F as SplitFamily>::Query,
    Outcome<<F as SplitFamily>::Instance, <F as SplitFamily>::Fact>,
>;

/// A family of games `A_n` with a cheap base case and an exact halving split.
///
/// Simple families must declare bound 1 on every query; bounded families
/// declare per-query bounds whose weights `log2(b+1)^2` total at most
/// `alpha` for the base and `alpha·n` for a split.
pub trait SplitFamily: Send + Sync + 'static {
    type Query: SumQuery;
    type Instance: Clone + Debug + Send + 'static;
    type Fact: Clone + Debug + Send + 'static;

    fn alpha(&self) -> f64;
    fn size(&self, inst: &Self::Instance) -> usize;
    /// Solves a size-1 instance.
    fn base(&self, inst: Self::Instance) -> Result<FamilyStrategy<Self>>;
    /// Reduces a size-`n` instance to children of sizes `⌈n/2⌉` and `⌊n/2⌋`.
    fn split(&self, inst: Self::Instance) -> Result<FamilyStrategy<Self>>;
}

/// Shape of the preprocessed sum for a given size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlanShape {
    Empty,
    Node { n: usize, parts: Box<[PlanShape; 3]>, leaf: usize },
}

/// The preprocessed sum with its pending `A` instances.
#[derive(Clone, Debug)]
pub enum PTree<I> {
    Empty,
    Node { n: usize, parts: Box<[PTree<I>; 3]>, leaf: I },
}

impl<I> PTree<I> {
    pub fn shape<F: Fn(&I) -> usize>(&self, size: &F) -> PlanShape {
        match self {
            PTree::Empty => PlanShape::Empty,
            PTree::Node { n, parts, leaf } => PlanShape::Node {
                n: *n,
                parts: Box::new([parts[0].shape(size), parts[1].shape(size), parts[2].shape(size)]),
                leaf: size(leaf),
            },
        }
    }
}

pub fn quarters(n: usize) -> [usize; 4] {
    let (l, r) = (n.div_ceil(2), n / 2);
    [l.div_ceil(2), l / 2, r.div_ceil(2), r / 2]
}

/// `P_n` per its defining recurrence; empty for `n ≤ 3`.
pub fn build_plan(n: usize) -> PlanShape {
    if n <= 3 {
        return PlanShape::Empty;
    }
    let [a, b, c, d] = quarters(n);
    PlanShape::Node { n, parts: Box::new([build_plan(a), build_plan(b), build_plan(c)]), leaf: d }
}

impl PlanShape {
    /// The `A` sizes left in the expanded sum.
    pub fn leaves(&self) -> Vec<usize> {
        match self {
            PlanShape::Empty => Vec::new(),
            PlanShape::Node { parts, leaf, .. } => {
                let mut v: Vec<usize> = parts.iter().flat_map(|p| p.leaves()).collect();
                v.push(*leaf);
                v
            }
        }
    }
}

/// Closed-form length ceiling for the three solved quarters and the fourth's reduction.
pub(crate) fn quarter_len(n: usize, unit: u64) -> u64 {
    let n = n as u64;
    let hi = 8 * unit * n.div_ceil(4) - 8 * unit;
    let lo = 8 * unit * (n / 4) - 7 * unit;
    hi.max(lo)
}

pub(crate) fn preprocess_ceiling(n: usize, unit: u64) -> u64 {
    8 * unit * n as u64 - 7 * unit
}

pub(crate) fn postprocess_ceiling(n: usize, unit: u64) -> u64 {
    8 * unit * (n as u64).saturating_sub(1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Mode {
    Simple,
    Weighted,
}

/// Integer per-query cost of a simple family.
pub(crate) fn alpha_units<F: SplitFamily>(fam: &F) -> u64 {
    let a = fam.alpha().ceil();
    assert!(a >= 1.0, "alpha must be positive");
    a as u64
}

struct SimpleGuard<Q, O> {
    inner: BoxStrategy<Q, O>,
    cap: u64,
    count: u64,
}

impl<Q: SumQuery, O: Send> Strategy<Q, O> for SimpleGuard<Q, O> {
    fn step(&mut self) -> Result<Step<Q>> {
        let s = self.inner.step()?;
        if let Step::Ask(a) = &s {
            self.count += 1;
            if !a.query.is_zero() {
                match a.bound {
                    Some(b) if b <= 1 => {}
                    b => {
                        return Err(SolveError::SimplicityViolation {
                            step: self.count,
                            bound: b.unwrap_or(u64::MAX),
                        })
                    }
                }
            }
            if self.count > self.cap {
                return Err(SolveError::ShapeError(format!(
                    "family strategy exceeds its length {}",
                    self.cap
                )));
            }
        }
        Ok(s)
    }

    fn feed(&mut self, answer: u64) -> Result<()> {
        self.inner.feed(answer)
    }

    fn finish(self: Box<Self>) -> Result<O> {
        self.inner.finish()
    }
}

fn guard<F: SplitFamily>(
    fam: &F,
    s: FamilyStrategy<F>,
    units: usize,
    mode: Mode,
) -> FamilyStrategy<F> {
    match mode {
        Mode::Simple => Box::new(SimpleGuard { inner: s, cap: alpha_units(fam) * units as u64, count: 0 }),
        Mode::Weighted => metered(s, fam.alpha() * units as f64),
    }
}

pub type Halves<F> = (<F as SplitFamily>::Instance, <F as SplitFamily>::Instance, Vec<<F as SplitFamily>::Fact>);

fn split_checked<F: SplitFamily>(
    fam: &Arc<F>,
    inst: F::Instance,
    mode: Mode,
) -> Result<BoxStrategy<F::Query, Halves<F>>> {
    let n = fam.size(&inst);
    let s = guard(&**fam, fam.split(inst)?, n, mode);
    let fam = fam.clone();
    Ok(map_output(s, move |o| {
        let [l, r]: [F::Instance; 2] = o.children.try_into().map_err(|c: Vec<_>| {
            SolveError::ShapeError(format!("split produced {} children", c.len()))
        })?;
        let (nl, nr) = (fam.size(&l), fam.size(&r));
        if (nl, nr) != (n.div_ceil(2), n / 2) {
            return Err(SolveError::ShapeError(format!("split of {n} gave sizes {nl}, {nr}")));
        }
        Ok((l, r, o.facts))
    }))
}

fn base_checked<F: SplitFamily>(
    fam: &Arc<F>,
    inst: F::Instance,
    mode: Mode,
) -> Result<BoxStrategy<F::Query, Vec<F::Fact>>> {
    let s = guard(&**fam, fam.base(inst)?, 1, mode);
    Ok(map_output(s, |o| {
        if !o.children.is_empty() {
            return Err(SolveError::ShapeError("base case left children".into()));
        }
        Ok(o.facts)
    }))
}

/// Solves an instance by splitting all the way down, one child after the other.
pub(crate) fn solve_sequential<F: SplitFamily>(
    fam: &Arc<F>,
    inst: F::Instance,
    mode: Mode,
) -> Result<BoxStrategy<F::Query, Vec<F::Fact>>> {
    match fam.size(&inst) {
        0 => Ok(done(Vec::new())),
        1 => base_checked(fam, inst, mode),
        _ => {
            let f2 = fam.clone();
            Ok(then(split_checked(fam, inst, mode)?, move |(l, r, mut facts), _| {
                let parts = vec![solve_sequential(&f2, l, mode)?, solve_sequential(&f2, r, mode)?];
                Ok(map_output(sequence(parts), move |v| {
                    facts.extend(v.into_iter().flatten());
                    Ok(facts)
                }))
            }))
        }
    }
}

/// Solves an instance of a bounded family by splitting all the way down.
pub fn solve_sequential_weighted<F: SplitFamily>(
    fam: &Arc<F>,
    inst: F::Instance,
) -> Result<BoxStrategy<F::Query, Vec<F::Fact>>> {
    solve_sequential(fam, inst, Mode::Weighted)
}

/// One weight-checked split of a bounded family.
pub fn split_weighted<F: SplitFamily>(
    fam: &Arc<F>,
    inst: F::Instance,
) -> Result<BoxStrategy<F::Query, Halves<F>>> {
    split_checked(fam, inst, Mode::Weighted)
}

pub type Preprocessed<F> = (PTree<<F as SplitFamily>::Instance>, Vec<<F as SplitFamily>::Fact>);

/// Reduces `A_n` to the preprocessed sum `P_n`.
pub(crate) fn preprocess<F: SplitFamily>(
    fam: &Arc<F>,
    inst: F::Instance,
    mode: Mode,
) -> Result<BoxStrategy<F::Query, Preprocessed<F>>> {
    let n = fam.size(&inst);
    if n <= 3 {
        return Ok(map_output(solve_sequential(fam, inst, mode)?, |f| Ok((PTree::Empty, f))));
    }
    let f2 = fam.clone();
    Ok(then(split_checked(fam, inst, mode)?, move |(l, r, mut facts), _| {
        let f3 = f2.clone();
        Ok(then(split_checked(&f2, l, mode)?, move |(ll, lr, fl), _| {
            facts.extend(fl);
            let f4 = f3.clone();
            Ok(then(split_checked(&f3, r, mode)?, move |(rl, rr, fr), _| {
                facts.extend(fr);
                let parts = vec![
                    preprocess(&f4, ll, mode)?,
                    preprocess(&f4, lr, mode)?,
                    preprocess(&f4, rl, mode)?,
                ];
                Ok(map_output(sequence(parts), move |v| {
                    let mut trees = Vec::with_capacity(3);
                    for (t, f) in v {
                        trees.push(t);
                        facts.extend(f);
                    }
                    let parts: [PTree<F::Instance>; 3] = trees.try_into().ok().expect("three parts");
                    Ok((PTree::Node { n, parts: Box::new(parts), leaf: rr }, facts))
                }))
            }))
        }))
    }))
}

/// Length of the preprocessing reduction alone, for inspection and tests.
pub fn preprocess_reduce<F: SplitFamily>(
    fam: Arc<F>,
    inst: F::Instance,
) -> Result<BoxStrategy<F::Query, Preprocessed<F>>> {
    let n = fam.size(&inst);
    let s = preprocess(&fam, inst, Mode::Simple)?;
    Ok(crate::strategy::capped(s, preprocess_ceiling(n, alpha_units(&*fam)), "preprocessing"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_small() {
        assert_eq!(build_plan(3), PlanShape::Empty);
        assert_eq!(build_plan(4).leaves(), vec![1]);
        assert_eq!(build_plan(16).leaves(), vec![1, 1, 1, 4]);
    }

    #[test]
    fn plan_quarters_sum() {
        for n in 4..300 {
            let q = quarters(n);
            assert_eq!(q.iter().sum::<usize>(), n);
            assert!(q.iter().all(|&m| m == n / 4 || m == n.div_ceil(4)));
        }
    }

    #[test]
    fn quarter_len_values() {
        assert_eq!(quarter_len(4, 1), 1);
        assert_eq!(quarter_len(8, 1), 9);
        assert_eq!(preprocess_ceiling(1, 1), 1);
        assert_eq!(postprocess_ceiling(8, 1), 56);
    }
}
