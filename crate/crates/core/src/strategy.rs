//! Resumable strategies and the combinators used to compose them.
//!
//! A strategy is driven by alternating [`Strategy::step`] and
//! [`Strategy::feed`] until it reports [`Step::Done`], after which
//! [`Strategy::finish`] yields its outcome.

use crate::error::{Result, SolveError};
use crate::game::SumQuery;

/// The answer to a query is known in advance modulo `2^bits`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Residue {
    pub bits: u32,
    pub value: u64,
}

impl Residue {
    /// Fully known zero answer.
    pub const ZERO: Residue = Residue { bits: 63, value: 0 };

    pub fn new(bits: u32, value: u64) -> Self {
        Residue { bits, value: value & mask(bits) }
    }

    pub fn matches(&self, answer: u64) -> bool {
        answer & mask(self.bits) == self.value
    }

    /// The residue modulo `2^bits`, if this prediction is at least that fine.
    pub fn reduce(&self, bits: u32) -> Option<u64> {
        (self.bits >= bits).then(|| self.value & mask(bits))
    }
}

pub(crate) fn mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// A query together with what the strategy declares about its answer.
#[derive(Clone, Debug, PartialEq)]
pub struct Ask<Q> {
    pub query: Q,
    pub bound: Option<u64>,
    pub residue: Option<Residue>,
}

impl<Q> Ask<Q> {
    pub fn new(query: Q) -> Self {
        Ask { query, bound: None, residue: None }
    }

    pub fn bounded(query: Q, bound: u64) -> Self {
        Ask { query, bound: Some(bound), residue: None }
    }

    pub fn map<R>(self, f: impl FnOnce(Q) -> R) -> Ask<R> {
        Ask { query: f(self.query), bound: self.bound, residue: self.residue }
    }
}

impl<Q: SumQuery> Ask<Q> {
    pub fn zero() -> Self {
        Ask { query: Q::zero(), bound: Some(0), residue: Some(Residue::ZERO) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Step<Q> {
    Ask(Ask<Q>),
    Done,
}

/// A deterministic adaptive query strategy.
///
/// Callers must feed exactly one answer after every `Ask` before stepping again.
pub trait Strategy<Q, O>: Send {
    fn step(&mut self) -> Result<Step<Q>>;
    fn feed(&mut self, answer: u64) -> Result<()>;
    fn finish(self: Box<Self>) -> Result<O>;
}

pub type BoxStrategy<Q, O> = Box<dyn Strategy<Q, O>>;

type Cont<Q, O> = Box<dyn FnOnce(u64) -> Result<Plan<Q, O>> + Send>;

/// Continuation-passing description of a small adaptive strategy.
pub enum Plan<Q, O> {
    Ask(Ask<Q>, Cont<Q, O>),
    Done(O),
}

impl<Q: 'static, O: 'static> Plan<Q, O> {
    pub fn ask(
        ask: Ask<Q>,
        k: impl FnOnce(u64) -> Result<Plan<Q, O>> + Send + 'static,
    ) -> Self {
        Plan::Ask(ask, Box::new(k))
    }

    pub fn into_strategy(self) -> BoxStrategy<Q, O>
    where
        Q: Send,
        O: Send,
    {
        Box::new(PlanStrategy { plan: Some(self), pending: None, out: None })
    }
}

/// Asks every query in order, then hands all answers to `then`.
pub fn ask_all<Q, O>(
    asks: Vec<Ask<Q>>,
    then: impl FnOnce(Vec<u64>) -> Result<Plan<Q, O>> + Send + 'static,
) -> Result<Plan<Q, O>>
where
    Q: Send + 'static,
    O: 'static,
{
    fn go<Q: Send + 'static, O: 'static>(
        mut rest: std::vec::IntoIter<Ask<Q>>,
        mut got: Vec<u64>,
        then: Box<dyn FnOnce(Vec<u64>) -> Result<Plan<Q, O>> + Send>,
    ) -> Result<Plan<Q, O>> {
        match rest.next() {
            None => then(got),
            Some(a) => Ok(Plan::ask(a, move |v| {
                got.push(v);
                go(rest, got, then)
            })),
        }
    }
    let n = asks.len();
    go(asks.into_iter(), Vec::with_capacity(n), Box::new(then))
}

struct PlanStrategy<Q, O> {
    plan: Option<Plan<Q, O>>,
    pending: Option<Cont<Q, O>>,
    out: Option<O>,
}

impl<Q: Send, O: Send> Strategy<Q, O> for PlanStrategy<Q, O> {
    fn step(&mut self) -> Result<Step<Q>> {
        match self.plan.take() {
            Some(Plan::Ask(a, k)) => {
                self.pending = Some(k);
                Ok(Step::Ask(a))
            }
            Some(Plan::Done(o)) => {
                self.out = Some(o);
                Ok(Step::Done)
            }
            None if self.out.is_some() => Ok(Step::Done),
            None => Err(SolveError::Protocol("step called while awaiting an answer".into())),
        }
    }

    fn feed(&mut self, answer: u64) -> Result<()> {
        let k = self
            .pending
            .take()
            .ok_or_else(|| SolveError::Protocol("answer fed without a pending query".into()))?;
        self.plan = Some(k(answer)?);
        Ok(())
    }

    fn finish(self: Box<Self>) -> Result<O> {
        self.out
            .ok_or_else(|| SolveError::Protocol("finish called before completion".into()))
    }
}

/// A strategy that asks nothing.
pub fn done<Q: Send + 'static, O: Send + 'static>(out: O) -> BoxStrategy<Q, O> {
    Plan::Done(out).into_strategy()
}

struct Then<Q, A, O> {
    first: Option<BoxStrategy<Q, A>>,
    next: Option<Box<dyn FnOnce(A, u64) -> Result<BoxStrategy<Q, O>> + Send>>,
    second: Option<BoxStrategy<Q, O>>,
    steps: u64,
}

/// Runs `first`, then the strategy built from its outcome and its step count.
pub fn then<Q, A, O>(
    first: BoxStrategy<Q, A>,
    next: impl FnOnce(A, u64) -> Result<BoxStrategy<Q, O>> + Send + 'static,
) -> BoxStrategy<Q, O>
where
    Q: Send + 'static,
    A: Send + 'static,
    O: Send + 'static,
{
    Box::new(Then { first: Some(first), next: Some(Box::new(next)), second: None, steps: 0 })
}

impl<Q: Send, A: Send, O: Send> Strategy<Q, O> for Then<Q, A, O> {
    fn step(&mut self) -> Result<Step<Q>> {
        if self.second.is_none() {
            let first = self.first.as_mut().expect("first strategy present");
            match first.step()? {
                Step::Ask(a) => {
                    self.steps += 1;
                    return Ok(Step::Ask(a));
                }
                Step::Done => {
                    let out = self.first.take().unwrap().finish()?;
                    let next = self.next.take().unwrap();
                    self.second = Some(next(out, self.steps)?);
                }
            }
        }
        self.second.as_mut().unwrap().step()
    }

    fn feed(&mut self, answer: u64) -> Result<()> {
        match (&mut self.first, &mut self.second) {
            (_, Some(s)) => s.feed(answer),
            (Some(f), None) => f.feed(answer),
            (None, None) => Err(SolveError::ImpossibleState("sequence lost both parts".into())),
        }
    }

    fn finish(self: Box<Self>) -> Result<O> {
        self.second
            .ok_or_else(|| SolveError::Protocol("finish called before completion".into()))?
            .finish()
    }
}

/// Maps the outcome of a strategy.
pub fn map_output<Q, A, O>(
    inner: BoxStrategy<Q, A>,
    f: impl FnOnce(A) -> Result<O> + Send + 'static,
) -> BoxStrategy<Q, O>
where
    Q: Send + 'static,
    A: Send + 'static,
    O: Send + 'static,
{
    then(inner, move |a, _| Ok(done(f(a)?)))
}

/// Runs the strategies one after another and collects their outcomes.
pub fn sequence<Q, O>(parts: Vec<BoxStrategy<Q, O>>) -> BoxStrategy<Q, Vec<O>>
where
    Q: Send + 'static,
    O: Send + 'static,
{
    let n = parts.len();
    Box::new(Sequence { parts: parts.into_iter().collect(), outs: Vec::with_capacity(n) })
}

struct Sequence<Q, O> {
    parts: std::collections::VecDeque<BoxStrategy<Q, O>>,
    outs: Vec<O>,
}

impl<Q: Send, O: Send> Strategy<Q, Vec<O>> for Sequence<Q, O> {
    fn step(&mut self) -> Result<Step<Q>> {
        while let Some(p) = self.parts.front_mut() {
            match p.step()? {
                Step::Ask(a) => return Ok(Step::Ask(a)),
                Step::Done => {
                    let p = self.parts.pop_front().unwrap();
                    self.outs.push(p.finish()?);
                }
            }
        }
        Ok(Step::Done)
    }

    fn feed(&mut self, answer: u64) -> Result<()> {
        self.parts
            .front_mut()
            .ok_or_else(|| SolveError::Protocol("answer fed to a finished sequence".into()))?
            .feed(answer)
    }

    fn finish(self: Box<Self>) -> Result<Vec<O>> {
        if !self.parts.is_empty() {
            return Err(SolveError::Protocol("finish called before completion".into()));
        }
        Ok(self.outs)
    }
}

/// Pads a strategy with zero queries to exactly `len` steps.
pub struct Padded<Q, O> {
    inner: BoxStrategy<Q, O>,
    len: u64,
    count: u64,
    inner_done: bool,
    last_zero: bool,
}

pub fn padded<Q, O>(inner: BoxStrategy<Q, O>, len: u64) -> BoxStrategy<Q, O>
where
    Q: SumQuery,
    O: Send + 'static,
{
    Box::new(Padded { inner, len, count: 0, inner_done: false, last_zero: false })
}

impl<Q: SumQuery, O: Send> Strategy<Q, O> for Padded<Q, O> {
    fn step(&mut self) -> Result<Step<Q>> {
        if !self.inner_done {
            match self.inner.step()? {
                Step::Ask(a) => {
                    self.count += 1;
                    if self.count > self.len {
                        return Err(SolveError::ShapeError(format!(
                            "strategy exceeds its padded length {}",
                            self.len
                        )));
                    }
                    self.last_zero = false;
                    return Ok(Step::Ask(a));
                }
                Step::Done => self.inner_done = true,
            }
        }
        if self.count < self.len {
            self.count += 1;
            self.last_zero = true;
            Ok(Step::Ask(Ask::zero()))
        } else {
            Ok(Step::Done)
        }
    }

    fn feed(&mut self, answer: u64) -> Result<()> {
        if self.last_zero {
            if answer != 0 {
                return Err(SolveError::InconsistentOracle(format!(
                    "zero query answered {answer}"
                )));
            }
            Ok(())
        } else {
            self.inner.feed(answer)
        }
    }

    fn finish(self: Box<Self>) -> Result<O> {
        self.inner.finish()
    }
}

/// Fails once a strategy runs past `cap` steps.
pub fn capped<Q, O>(inner: BoxStrategy<Q, O>, cap: u64, what: &'static str) -> BoxStrategy<Q, O>
where
    Q: Send + 'static,
    O: Send + 'static,
{
    Box::new(Capped { inner, cap, count: 0, what })
}

struct Capped<Q, O> {
    inner: BoxStrategy<Q, O>,
    cap: u64,
    count: u64,
    what: &'static str,
}

impl<Q: Send, O: Send> Strategy<Q, O> for Capped<Q, O> {
    fn step(&mut self) -> Result<Step<Q>> {
        let s = self.inner.step()?;
        if let Step::Ask(_) = s {
            self.count += 1;
            if self.count > self.cap {
                return Err(SolveError::ShapeError(format!(
                    "{} exceeds its length ceiling {}",
                    self.what, self.cap
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

/// How an inner answer is recovered from the outer one: `inner = ±outer + offset`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnswerMap {
    pub negate: bool,
    pub offset: i64,
}

impl AnswerMap {
    pub const IDENTITY: AnswerMap = AnswerMap { negate: false, offset: 0 };

    pub fn apply(&self, outer: u64) -> Result<u64> {
        let o = outer as i64;
        let v = if self.negate { self.offset - o } else { self.offset + o };
        u64::try_from(v).map_err(|_| {
            SolveError::InconsistentOracle(format!("translated answer {v} is negative"))
        })
    }
}

type Translator<Q1, Q2> = Box<dyn FnMut(Q1) -> Result<(Q2, AnswerMap)> + Send>;

/// Runs a strategy over a different query type.
///
/// Inner zero queries are answered locally with 0 and surface as outer zero
/// queries so step counts are preserved.
pub fn translate<Q1, Q2, O>(
    inner: BoxStrategy<Q1, O>,
    f: impl FnMut(Q1) -> Result<(Q2, AnswerMap)> + Send + 'static,
) -> BoxStrategy<Q2, O>
where
    Q1: SumQuery,
    Q2: SumQuery,
    O: Send + 'static,
{
    Box::new(Translate { inner, f: Box::new(f), map: None })
}

struct Translate<Q1, Q2, O> {
    inner: BoxStrategy<Q1, O>,
    f: Translator<Q1, Q2>,
    map: Option<AnswerMap>,
}

impl<Q1: SumQuery, Q2: SumQuery, O: Send> Strategy<Q2, O> for Translate<Q1, Q2, O> {
    fn step(&mut self) -> Result<Step<Q2>> {
        match self.inner.step()? {
            Step::Done => Ok(Step::Done),
            Step::Ask(a) if a.query.is_zero() => {
                self.map = None;
                Ok(Step::Ask(Ask { query: Q2::zero(), bound: Some(0), residue: a.residue }))
            }
            Step::Ask(a) => {
                let (q, m) = (self.f)(a.query)?;
                self.map = Some(m);
                let ident = m == AnswerMap::IDENTITY;
                Ok(Step::Ask(Ask {
                    query: q,
                    bound: if ident { a.bound } else { None },
                    residue: if ident { a.residue } else { None },
                }))
            }
        }
    }

    fn feed(&mut self, answer: u64) -> Result<()> {
        match self.map.take() {
            None => self.inner.feed(0),
            Some(m) => self.inner.feed(m.apply(answer)?),
        }
    }

    fn finish(self: Box<Self>) -> Result<O> {
        self.inner.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{run_strategy, Subset};

    fn ones(n: u32) -> BoxStrategy<Subset, Vec<u64>> {
        ask_all((1..=n).map(|i| Ask::bounded(Subset::single(i), 1)).collect(), |v| {
            Ok(Plan::Done(v))
        })
        .unwrap()
        .into_strategy()
    }

    #[test]
    fn ask_all_collects_in_order() {
        let (out, tr) = run_strategy(ones(3), |q: &Subset| q.ids()[0] as u64 % 2, 100).unwrap();
        assert_eq!(out, vec![1, 0, 1]);
        assert_eq!(tr.len(), 3);
    }

    #[test]
    fn padding_is_zero_queries() {
        let s = padded(ones(2), 5);
        let (out, tr) = run_strategy(s, |_: &Subset| 1, 100).unwrap();
        assert_eq!(out, vec![1, 1]);
        assert_eq!(tr.len(), 5);
        assert!(tr.steps[2..].iter().all(|st| st.query.is_zero() && st.answer == 0));
    }

    #[test]
    fn padding_rejects_overlong_inner() {
        let s = padded(ones(3), 2);
        assert!(matches!(
            run_strategy(s, |_: &Subset| 1, 100),
            Err(SolveError::ShapeError(_))
        ));
    }

    #[test]
    fn then_passes_step_count() {
        let s = then(ones(2), |v, steps| {
            assert_eq!(steps, 2);
            Ok(map_output(ones(1), move |w| Ok([v, w].concat())))
        });
        let (out, _) = run_strategy(s, |_: &Subset| 1, 100).unwrap();
        assert_eq!(out, vec![1, 1, 1]);
    }

    #[test]
    fn empty_sequence_finishes_immediately() {
        let s: BoxStrategy<Subset, Vec<Vec<u64>>> = sequence(vec![]);
        let (out, tr) = run_strategy(s, |_: &Subset| 0, 10).unwrap();
        assert!(out.is_empty() && tr.is_empty());
    }

    #[test]
    fn residue_reduce_and_match() {
        let r = Residue::new(3, 13);
        assert_eq!(r.value, 5);
        assert!(r.matches(21));
        assert_eq!(r.reduce(2), Some(1));
        assert_eq!(r.reduce(4), None);
        assert!(Residue::ZERO.matches(0));
    }

    #[test]
    fn answer_map_complement() {
        let m = AnswerMap { negate: true, offset: 4 };
        assert_eq!(m.apply(1).unwrap(), 3);
        assert!(m.apply(5).is_err());
    }
}
