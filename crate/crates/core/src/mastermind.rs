//! Mastermind with black-peg and white-peg feedback.
//!
//! Codewords are vectors over colors `1..=k`; guesses are [`Pattern`]s where
//! unlisted positions are blank (color 0).

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coins::{solve_sparse_on, solve_sum, TermSolver};
use crate::engine::{solve, solve_bounded, FamilyStrategy, Outcome, SplitFamily};
use crate::error::{Result, SolveError};
use crate::game::{Pattern, Subset, SumQuery};
use crate::schedule::Schedule;
use crate::setquery::solve_setquery_on;
use crate::strategy::{
    ask_all, done, map_output, then, translate, Ask, AnswerMap, BoxStrategy, Plan, Step, Strategy,
};

/// Number of positions where guess and codeword agree.
pub fn bp(x: &[u32], q: &[u32]) -> Result<u64> {
    if x.len() != q.len() {
        return Err(SolveError::ShapeError(format!("lengths {} and {}", x.len(), q.len())));
    }
    Ok(x.iter().zip(q).filter(|(a, b)| a == b).count() as u64)
}

/// Correct colors in the wrong position.
pub fn wp(x: &[u32], q: &[u32]) -> Result<u64> {
    let black = bp(x, q)?;
    let mut cx: HashMap<u32, u64> = HashMap::new();
    for &c in x {
        *cx.entry(c).or_default() += 1;
    }
    let mut cq: HashMap<u32, u64> = HashMap::new();
    for &c in q.iter().filter(|&&c| c != 0) {
        *cq.entry(c).or_default() += 1;
    }
    let common: u64 = cq.iter().map(|(c, &m)| m.min(cx.get(c).copied().unwrap_or(0))).sum();
    Ok(common - black)
}

pub fn bp_sparse(x: &[u32], q: &Pattern) -> u64 {
    q.0.iter().filter(|&&(p, c)| x[p as usize] == c).count() as u64
}

/// Which peg count a query consumes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feedback {
    Black,
    /// Black plus white.
    Total,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PegQuery {
    pub pattern: Pattern,
    pub feedback: Feedback,
}

impl SumQuery for PegQuery {
    fn zero() -> Self {
        PegQuery { pattern: Pattern::zero(), feedback: Feedback::Black }
    }
    fn is_zero(&self) -> bool {
        self.pattern.is_zero()
    }
    fn absorb(&mut self, other: &Self) {
        self.pattern.absorb(&other.pattern);
    }
    fn support(&self) -> Vec<u32> {
        self.pattern.support()
    }
}

/// The value a [`PegQuery`] consumes from `(black, white)` feedback.
pub fn peg_value(q: &PegQuery, black: u64, white: u64) -> u64 {
    match q.feedback {
        Feedback::Black => black,
        Feedback::Total => black + white,
    }
}

pub fn peg_answer(x: &[u32], q: &PegQuery) -> u64 {
    match q.feedback {
        Feedback::Black => bp_sparse(x, &q.pattern),
        Feedback::Total => {
            let dense = q.pattern.dense(x.len());
            bp(x, &dense).unwrap() + wp(x, &dense).unwrap()
        }
    }
}

fn solo(q: Pattern, bound: u64) -> Ask<Pattern> {
    Ask::bounded(q, bound)
}

fn facts_to_code(n: usize, facts: Vec<(u32, u32)>) -> Result<Vec<u32>> {
    let mut code = vec![0u32; n];
    for (p, c) in facts {
        code[p as usize] = c;
    }
    if let Some(p) = code.iter().position(|&c| c == 0) {
        return Err(SolveError::ImpossibleState(format!("position {p} undecided")));
    }
    Ok(code)
}

/// Replaces blanks by a substitute that matches the codeword nowhere.
pub fn fill_blanks<O: Send + 'static>(
    inner: BoxStrategy<Pattern, O>,
    substitute: Vec<u32>,
) -> BoxStrategy<Pattern, O> {
    translate(inner, move |q: Pattern| {
        let mut v = substitute.clone();
        for (p, c) in q.0 {
            v[p as usize] = c;
        }
        Ok((Pattern::from_dense(&v), AnswerMap::IDENTITY))
    })
}

/// Permutation codewords restricted to a range of positions.
#[derive(Clone, Debug)]
pub struct PermInst {
    pub start: u32,
    pub colors: Vec<u32>,
}

pub struct PermFamily;

impl SplitFamily for PermFamily {
    type Query = Pattern;
    type Instance = PermInst;
    type Fact = (u32, u32);

    fn alpha(&self) -> f64 {
        1.0
    }

    fn size(&self, inst: &PermInst) -> usize {
        inst.colors.len()
    }

    fn base(&self, inst: PermInst) -> Result<FamilyStrategy<Self>> {
        Ok(done(Outcome::solved(vec![(inst.start, inst.colors[0])])))
    }

    fn split(&self, inst: PermInst) -> Result<FamilyStrategy<Self>> {
        let n = inst.colors.len();
        let h = n.div_ceil(2);
        let asks = inst
            .colors
            .iter()
            .map(|&c| solo(Pattern((inst.start..inst.start + h as u32).map(|p| (p, c)).collect()), 1))
            .collect();
        Ok(ask_all(asks, move |v| {
            let (mut l, mut r) = (Vec::new(), Vec::new());
            for (&c, &a) in inst.colors.iter().zip(&v) {
                if a == 1 { l.push(c) } else { r.push(c) }
            }
            if l.len() != h {
                return Err(SolveError::InconsistentOracle("codeword is not a permutation".into()));
            }
            let children = vec![
                PermInst { start: inst.start, colors: l },
                PermInst { start: inst.start + h as u32, colors: r },
            ];
            Ok(Plan::Done(Outcome { children, facts: Vec::new() }))
        })?
        .into_strategy())
    }
}

/// Finds a guess without blanks that matches a permutation codeword nowhere.
fn perm_substitute(n: usize) -> BoxStrategy<Pattern, Vec<u32>> {
    let bits = (usize::BITS - (n - 1).leading_zeros()) as usize;
    fn go(n: usize, bit: usize, bits: usize, flip: bool) -> Plan<Pattern, Vec<u32>> {
        if bit >= bits {
            return Plan::Done(Vec::new());
        }
        let q: Vec<u32> = (0..n)
            .map(|j| if ((j >> bit) & 1 == 1) != flip { 2 } else { 1 })
            .collect();
        let guess = q.clone();
        Plan::ask(solo(Pattern::from_dense(&q), n as u64), move |v| {
            if v == 0 {
                Ok(Plan::Done(guess))
            } else if flip {
                Ok(go(n, bit + 1, bits, false))
            } else {
                Ok(go(n, bit, bits, true))
            }
        })
    }
    then(go(n, 0, bits, false).into_strategy(), |b, _| {
        if b.is_empty() {
            Err(SolveError::InconsistentOracle("codeword is not a permutation".into()))
        } else {
            Ok(done(b))
        }
    })
}

/// Permutation Mastermind on `n` positions and colors.
pub fn solve_perm(n: usize, blanks: bool) -> Result<BoxStrategy<Pattern, Vec<u32>>> {
    if n == 0 {
        return Err(SolveError::InvalidParameters("no positions".into()));
    }
    let inst = PermInst { start: 0, colors: (1..=n as u32).collect() };
    let solved = move || -> Result<BoxStrategy<Pattern, Vec<u32>>> {
        Ok(map_output(solve(Arc::new(PermFamily), inst)?, move |f| facts_to_code(n, f)))
    };
    if blanks || n == 1 {
        return solved();
    }
    Ok(then(perm_substitute(n), move |b, _| Ok(fill_blanks(solved()?, b))))
}

/// Per-position classification from the blank search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Class {
    One,
    Two,
    Other,
}

/// A guess without blanks matching the codeword nowhere, with the
/// classification of every position into color 1, color 2 or neither.
pub fn find_blank_substitute(n: usize, k: usize) -> Result<BoxStrategy<Pattern, (Vec<u32>, Vec<Class>)>> {
    if k < 2 {
        return Err(SolveError::InvalidParameters("blank substitutes need two colors".into()));
    }
    let ones = Pattern::from_dense(&vec![1; n]);
    let first = Plan::ask(solo(ones, n as u64), |v| Ok(Plan::Done(v))).into_strategy();
    Ok(then(first, move |f1, _| {
        // term i: 0 if f_i = 1, 2 if f_i = 2, 1 otherwise
        let solver: TermSolver<Subset, u64> = Arc::new(|i| {
            let q = Subset::single(i as u32 + 1);
            Ok(Plan::ask(Ask::bounded(q, 2), |v| Ok(Plan::Done(v))).into_strategy())
        });
        let alpha = crate::schedule::weight_of(2);
        let inner = solve_sum(n, alpha, false, solver)?;
        let as_pattern = translate(inner, move |s: Subset| {
            let mut v = vec![1u32; n];
            for &p in s.ids() {
                v[p as usize - 1] = 2;
            }
            let off = s.len() as i64 - f1 as i64;
            Ok((Pattern::from_dense(&v), AnswerMap { negate: false, offset: off }))
        });
        Ok(map_output(as_pattern, move |vals| {
            let mut b = Vec::with_capacity(n);
            let mut class = Vec::with_capacity(n);
            for v in vals {
                let (bi, c) = match v {
                    0 => (2, Class::One),
                    2 => (1, Class::Two),
                    1 if k > 2 => (1, Class::Other),
                    _ => return Err(SolveError::InconsistentOracle(format!("position weight {v}"))),
                };
                b.push(bi);
                class.push(c);
            }
            Ok((b, class))
        }))
    }))
}

/// One all-`c` query per color on `positions`; counts must add up.
pub fn count_colors(positions: Vec<u32>, k: usize) -> BoxStrategy<Pattern, Vec<u64>> {
    let m = positions.len() as u64;
    let asks = (1..=k as u32)
        .map(|c| solo(Pattern(positions.iter().map(|&p| (p, c)).collect()), m))
        .collect();
    ask_all(asks, move |v| {
        let total: u64 = v.iter().sum();
        if total != m {
            return Err(SolveError::InconsistentOracle(format!(
                "color counts sum to {total}, expected {m}"
            )));
        }
        Ok(Plan::Done(v))
    })
    .expect("no eager failure")
    .into_strategy()
}

/// Positions `start..start+len` with known color counts.
#[derive(Clone, Debug)]
pub struct HintedInst {
    pub start: u32,
    pub len: u32,
    /// Nonzero `(color, count)` pairs.
    pub counts: Vec<(u32, u64)>,
}

pub struct HintedFamily;

impl SplitFamily for HintedFamily {
    type Query = Pattern;
    type Instance = HintedInst;
    type Fact = (u32, u32);

    fn alpha(&self) -> f64 {
        2.0
    }

    fn size(&self, inst: &HintedInst) -> usize {
        inst.len as usize
    }

    fn base(&self, inst: HintedInst) -> Result<FamilyStrategy<Self>> {
        match inst.counts.as_slice() {
            [(c, 1)] => Ok(done(Outcome::solved(vec![(inst.start, *c)]))),
            _ => Err(SolveError::InconsistentOracle(format!("hints {:?} on one position", inst.counts))),
        }
    }

    fn split(&self, inst: HintedInst) -> Result<FamilyStrategy<Self>> {
        let h = inst.len.div_ceil(2);
        let asks = inst
            .counts
            .iter()
            .map(|&(c, n)| solo(Pattern((inst.start..inst.start + h).map(|p| (p, c)).collect()), n.min(h as u64)))
            .collect();
        Ok(ask_all(asks, move |v| {
            let (mut l, mut r) = (Vec::new(), Vec::new());
            for (&(c, n), &a) in inst.counts.iter().zip(&v) {
                if a > n {
                    return Err(SolveError::BoundViolation { step: 0, answer: a, bound: n });
                }
                if a > 0 {
                    l.push((c, a));
                }
                if n > a {
                    r.push((c, n - a));
                }
            }
            let sl: u64 = l.iter().map(|x| x.1).sum();
            if sl != h as u64 {
                return Err(SolveError::InconsistentOracle(format!(
                    "left half counts sum to {sl}, expected {h}"
                )));
            }
            let children = vec![
                HintedInst { start: inst.start, len: h, counts: l },
                HintedInst { start: inst.start + h, len: inst.len - h, counts: r },
            ];
            Ok(Plan::Done(Outcome { children, facts: Vec::new() }))
        })?
        .into_strategy())
    }
}

/// Black-peg Mastermind with blank guesses allowed.
fn solve_bp_blank(n: usize, k: usize) -> Result<BoxStrategy<Pattern, Vec<u32>>> {
    if k == 1 {
        return Ok(done(vec![1; n]));
    }
    let sqrt = (n as f64).sqrt().floor() as usize;
    if k <= sqrt {
        return Ok(solve_bp_sparse(n, k));
    }
    let positions: Vec<u32> = (0..n as u32).collect();
    Ok(then(count_colors(positions, k), move |counts, _| {
        let hints = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (i as u32 + 1, c))
            .collect();
        let inst = HintedInst { start: 0, len: n as u32, counts: hints };
        let s = solve_bounded(Arc::new(HintedFamily), inst, Schedule::root())?;
        Ok(map_output(s, move |f| facts_to_code(n, f)))
    }))
}

/// Few colors: per color, count it and locate it among undecided positions.
fn solve_bp_sparse(n: usize, k: usize) -> BoxStrategy<Pattern, Vec<u32>> {
    fn color_step(
        n: usize,
        k: u32,
        c: u32,
        pool: Vec<u32>,
        code: Vec<u32>,
    ) -> Result<BoxStrategy<Pattern, Vec<u32>>> {
        if c == k || pool.is_empty() {
            let mut code = code;
            for p in pool {
                code[p as usize] = k;
            }
            return Ok(done(code));
        }
        let all = Pattern(pool.iter().map(|&p| (p, c)).collect());
        let count = Plan::ask(solo(all, pool.len() as u64), |v| Ok(Plan::Done(v))).into_strategy();
        Ok(then(count, move |d, _| {
            let ids: Vec<u32> = pool.iter().map(|&p| p + 1).collect();
            let inner = solve_sparse_on(ids, d as usize)?;
            let located = translate(inner, move |s: Subset| {
                Ok((Pattern(s.0.iter().map(|&p| (p - 1, c)).collect()), AnswerMap::IDENTITY))
            });
            Ok(then(located, move |vals, _| {
                let mut code = code;
                let mut rest = Vec::new();
                for (&p, v) in pool.iter().zip(vals) {
                    if v == 1 {
                        code[p as usize] = c;
                    } else {
                        rest.push(p);
                    }
                }
                color_step(n, k, c + 1, rest, code)
            }))
        }))
    }
    color_step(n, k as u32, 1, (0..n as u32).collect(), vec![0; n]).expect("no eager failure")
}

/// One position: try colors in order until one hits.
struct Scan {
    k: u32,
    c: u32,
    hit: bool,
}

impl Strategy<Pattern, Vec<u32>> for Scan {
    fn step(&mut self) -> Result<Step<Pattern>> {
        if self.hit || self.c == self.k {
            return Ok(Step::Done);
        }
        Ok(Step::Ask(solo(Pattern(vec![(0, self.c)]), 1)))
    }

    fn feed(&mut self, answer: u64) -> Result<()> {
        match answer {
            0 => self.c += 1,
            1 => self.hit = true,
            _ => return Err(SolveError::InconsistentOracle(format!("{answer} pegs on one position"))),
        }
        Ok(())
    }

    fn finish(self: Box<Self>) -> Result<Vec<u32>> {
        Ok(vec![self.c])
    }
}

/// Black-peg Mastermind `M_{n,k}`.
pub fn solve_bp(n: usize, k: usize, blanks: bool) -> Result<BoxStrategy<Pattern, Vec<u32>>> {
    if n == 0 || k == 0 {
        return Err(SolveError::InvalidParameters("need positions and colors".into()));
    }
    if n == 1 {
        return Ok(Box::new(Scan { k: k as u32, c: 1, hit: false }));
    }
    if blanks || k == 1 {
        return solve_bp_blank(n, k);
    }
    Ok(then(find_blank_substitute(n, k)?, move |(b, class), _| {
        if k == 2 {
            let code = class.iter().map(|c| if *c == Class::One { 1 } else { 2 }).collect();
            return Ok(done(code));
        }
        Ok(fill_blanks(solve_bp_blank(n, k)?, b))
    }))
}

fn as_peg<O: Send + 'static>(
    inner: BoxStrategy<Pattern, O>,
    fill: Option<u32>,
    n: usize,
    feedback: Feedback,
) -> BoxStrategy<PegQuery, O> {
    translate(inner, move |p: Pattern| {
        let pattern = match fill {
            None => p,
            Some(z) => {
                let mut v = vec![z; n];
                for (i, c) in p.0 {
                    v[i as usize] = c;
                }
                Pattern::from_dense(&v)
            }
        };
        Ok((PegQuery { pattern, feedback }, AnswerMap::IDENTITY))
    })
}

/// White-peg Mastermind: for many colors, find an absent color, learn the
/// set of present colors by set queries, then solve black-peg on them.
pub fn solve_wp(n: usize, k: usize) -> Result<BoxStrategy<PegQuery, Vec<u32>>> {
    if n == 0 || k == 0 {
        return Err(SolveError::InvalidParameters("need positions and colors".into()));
    }
    if k <= 2 * n {
        return Ok(as_peg(solve_bp(n, k, false)?, None, n, Feedback::Black));
    }
    fn probe(n: usize, c: u32) -> Plan<PegQuery, u32> {
        let q = PegQuery { pattern: Pattern::from_dense(&vec![c; n]), feedback: Feedback::Total };
        Plan::ask(Ask::bounded(q, n as u64), move |v| {
            if v == 0 {
                Ok(Plan::Done(c))
            } else if c as usize > n {
                Err(SolveError::InconsistentOracle("no absent color among the probes".into()))
            } else {
                Ok(probe(n, c + 1))
            }
        })
    }
    Ok(then(probe(n, 1).into_strategy(), move |z, _| {
        let color_of = move |e: u32| if e < z { e } else { e + 1 };
        let elements: Vec<u32> = (1..k as u32).collect();
        let sq = solve_setquery_on(elements, n)?;
        let present = translate(sq, move |s: Subset| {
            let p = Pattern(s.0.iter().enumerate().map(|(i, &e)| (i as u32, color_of(e))).collect());
            Ok((p, AnswerMap::IDENTITY))
        });
        let present = as_peg(present, Some(z), n, Feedback::Total);
        Ok(then(present, move |members, _| {
            let palette: Vec<u32> = members.into_iter().map(color_of).collect();
            if palette.is_empty() {
                return Err(SolveError::InconsistentOracle("no colors present".into()));
            }
            let kk = palette.len();
            let pal = palette.clone();
            let relabeled = translate(solve_bp(n, kk, true)?, move |p: Pattern| {
                Ok((Pattern(p.0.into_iter().map(|(i, c)| (i, pal[c as usize - 1])).collect()), AnswerMap::IDENTITY))
            });
            let s = as_peg(relabeled, Some(z), n, Feedback::Black);
            Ok(map_output(s, move |code| Ok(code.into_iter().map(|c| palette[c as usize - 1]).collect())))
        }))
    }))
}
