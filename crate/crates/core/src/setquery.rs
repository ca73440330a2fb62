//! Sparse set query: find a hidden set of at most `n` elements using queries
//! of at most `n` elements, each answered with the size of the intersection.

use std::sync::Arc;

use crate::coins::{solve_coins_on, solve_sparse_on};
use crate::engine::{solve_bounded, FamilyStrategy, Outcome, SplitFamily};
use crate::error::{Result, SolveError};
use crate::game::Subset;
use crate::schedule::Schedule;
use crate::strategy::{ask_all, done, map_output, sequence, then, Ask, BoxStrategy, Plan, Step, Strategy};

/// Fails any step whose query has more than `cap` elements.
pub fn size_capped<O: Send + 'static>(inner: BoxStrategy<Subset, O>, cap: usize) -> BoxStrategy<Subset, O> {
    Box::new(SizeCapped { inner, cap })
}

struct SizeCapped<O> {
    inner: BoxStrategy<Subset, O>,
    cap: usize,
}

impl<O: Send> Strategy<Subset, O> for SizeCapped<O> {
    fn step(&mut self) -> Result<Step<Subset>> {
        let s = self.inner.step()?;
        if let Step::Ask(a) = &s {
            if a.query.len() > self.cap {
                return Err(SolveError::QuerySizeCap { size: a.query.len(), cap: self.cap });
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

/// Elements with a known number of members among them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub elems: Vec<u32>,
    pub d: u64,
}

fn count(elems: Vec<u32>, cap: u64) -> Ask<Subset> {
    let b = (elems.len() as u64).min(cap);
    Ask::bounded(Subset(elems), b)
}

/// Queries groups of `n` and drops empty ones until at most `n²` elements
/// remain in kept groups plus unqueried ones. Returns the kept blocks and
/// the unqueried elements.
pub fn reduce_to_square(elements: Vec<u32>, n: usize) -> BoxStrategy<Subset, (Vec<Block>, Vec<u32>)> {
    fn go(
        mut groups: std::vec::IntoIter<Vec<u32>>,
        kept: Vec<Block>,
        kept_len: usize,
        rest_len: usize,
        n: usize,
    ) -> Plan<Subset, (Vec<Block>, Vec<u32>)> {
        if kept_len + rest_len <= n * n {
            return Plan::Done((kept, groups.flatten().collect()));
        }
        let g = groups.next().expect("elements remain while over budget");
        let len = g.len();
        Plan::ask(count(g.clone(), n as u64), move |v| {
            let mut kept = kept;
            let mut kept_len = kept_len;
            if v > 0 {
                kept.push(Block { elems: g, d: v });
                kept_len += len;
            }
            Ok(go(groups, kept, kept_len, rest_len - len, n))
        })
    }
    let total = elements.len();
    let groups: Vec<Vec<u32>> = elements.chunks(n).map(|c| c.to_vec()).collect();
    go(groups.into_iter(), Vec::new(), 0, total, n).into_strategy()
}

/// Instance of the `n²`-element game: at most `m` blocks of at most `m`
/// elements, with at most `m` members in total.
#[derive(Clone, Debug)]
pub struct SquareInst {
    pub m: usize,
    pub blocks: Vec<Block>,
}

pub struct SquareFamily;

impl SquareFamily {
    pub const ALPHA: f64 = 4.5;
}

fn thirds(v: &[u32]) -> [Vec<u32>; 3] {
    let a = v.len().div_ceil(3);
    let b = (v.len() - a).div_ceil(2);
    [v[..a].to_vec(), v[a..a + b].to_vec(), v[a + b..].to_vec()]
}

/// Places blocks greedily by decreasing overlap into lists capped at `hi`
/// and `lo`; returns the lists and the blocks fitting neither.
pub fn greedy_lists(mut parts: Vec<Block>, hi: u64, lo: u64) -> (Vec<Block>, Vec<Block>, Vec<Block>) {
    parts.sort_by(|x, y| y.d.cmp(&x.d).then(x.elems[0].cmp(&y.elems[0])));
    let (mut l, mut r, mut left) = (Vec::new(), Vec::new(), Vec::new());
    let (mut sl, mut sr) = (0, 0);
    for p in parts {
        if sl + p.d <= hi {
            sl += p.d;
            l.push(p);
        } else if sr + p.d <= lo {
            sr += p.d;
            r.push(p);
        } else {
            left.push(p);
        }
    }
    (l, r, left)
}

fn singles(elems: Vec<u32>, need: u64, found: Vec<u32>) -> Plan<Subset, Vec<u32>> {
    let unknown = elems.len() as u64;
    if need == 0 {
        return Plan::Done(found);
    }
    if unknown == need {
        let mut found = found;
        found.extend(elems);
        return Plan::Done(found);
    }
    let mut rest = elems;
    let e = rest.remove(0);
    Plan::ask(Ask::bounded(Subset::single(e), 1), move |v| {
        let mut found = found;
        if v == 1 {
            found.push(e);
        }
        Ok(singles(rest, need - v, found))
    })
}

impl SplitFamily for SquareFamily {
    type Query = Subset;
    type Instance = SquareInst;
    type Fact = u32;

    fn alpha(&self) -> f64 {
        Self::ALPHA
    }

    fn size(&self, inst: &SquareInst) -> usize {
        inst.m
    }

    fn base(&self, inst: SquareInst) -> Result<FamilyStrategy<Self>> {
        let mut facts = Vec::new();
        for b in inst.blocks.into_iter().filter(|b| b.d > 0) {
            if b.d as usize != b.elems.len() {
                return Err(SolveError::ImpossibleState(format!("unresolved block {b:?} at size 1")));
            }
            facts.extend(b.elems);
        }
        if facts.len() > 1 {
            return Err(SolveError::InconsistentOracle("more members than capacity".into()));
        }
        Ok(done(Outcome::solved(facts)))
    }

    fn split(&self, inst: SquareInst) -> Result<FamilyStrategy<Self>> {
        let m = inst.m;
        let (hi, lo) = (m.div_ceil(2), m / 2);
        let mut whole = Vec::new();
        let mut cut = Vec::new();
        for b in inst.blocks.into_iter().filter(|b| b.d > 0) {
            if b.elems.len() <= lo {
                whole.push(b);
            } else {
                cut.push((thirds(&b.elems), b.d));
            }
        }
        let asks = cut
            .iter()
            .flat_map(|(p, d)| [count(p[0].clone(), *d), count(p[1].clone(), *d)])
            .collect();
        Ok(ask_all(asks, move |v| {
            let mut parts = whole;
            for (i, ([p0, p1, p2], d)) in cut.into_iter().enumerate() {
                let (a0, a1) = (v[2 * i], v[2 * i + 1]);
                let a2 = d
                    .checked_sub(a0 + a1)
                    .filter(|&a| a <= p2.len() as u64)
                    .ok_or_else(|| SolveError::InconsistentOracle(format!("block parts answered {a0}, {a1} of {d}")))?;
                for (elems, d) in [(p0, a0), (p1, a1), (p2, a2)] {
                    if d > 0 {
                        parts.push(Block { elems, d });
                    }
                }
            }
            let total: u64 = parts.iter().map(|b| b.d).sum();
            if total > m as u64 {
                return Err(SolveError::InconsistentOracle(format!("{total} members with capacity {m}")));
            }
            let (l, r, mut left) = greedy_lists(parts, hi as u64, lo as u64);
            if left.len() > 1 {
                return Err(SolveError::ImpossibleState(format!("{} blocks fit neither list", left.len())));
            }
            let children = vec![SquareInst { m: hi, blocks: l }, SquareInst { m: lo, blocks: r }];
            match left.pop() {
                None => Ok(Plan::Done(Outcome { children, facts: Vec::new() })),
                Some(b) => {
                    let p = singles(b.elems, b.d, Vec::new());
                    Ok(map_plan(p, move |facts| Outcome { children, facts }))
                }
            }
        })?
        .into_strategy())
    }
}

fn map_plan<Q: Send + 'static, A: 'static, B: 'static>(
    p: Plan<Q, A>,
    f: impl FnOnce(A) -> B + Send + 'static,
) -> Plan<Q, B> {
    match p {
        Plan::Done(a) => Plan::Done(f(a)),
        Plan::Ask(ask, k) => Plan::Ask(ask, Box::new(move |v| Ok(map_plan(k(v)?, f)))),
    }
}

fn members(ids: &[u32], vals: Vec<u64>) -> Vec<u32> {
    ids.iter().zip(vals).filter(|(_, v)| *v == 1).map(|(&e, _)| e).collect()
}

fn coins_members(ids: Vec<u32>) -> Result<BoxStrategy<Subset, Vec<u32>>> {
    let keep = ids.clone();
    Ok(map_output(solve_coins_on(ids)?, move |v| Ok(members(&keep, v))))
}

fn uncapped(elements: Vec<u32>, n: usize) -> Result<BoxStrategy<Subset, Vec<u32>>> {
    let k = elements.len();
    if k <= n {
        return coins_members(elements);
    }
    if k < 2 * n {
        let right = elements[n..].to_vec();
        let left = coins_members(elements[..n].to_vec())?;
        return Ok(then(left, move |mut found, _| {
            Ok(map_output(coins_members(right)?, move |more| {
                found.extend(more);
                Ok(found)
            }))
        }));
    }
    if k < n * n {
        let blocks: Vec<Vec<u32>> = elements.chunks(n).map(|c| c.to_vec()).collect();
        let asks = blocks.iter().map(|b| count(b.clone(), n as u64)).collect();
        let counted = ask_all(asks, move |v| {
            let total: u64 = v.iter().sum();
            if total > n as u64 {
                return Err(SolveError::InconsistentOracle(format!("{total} members with capacity {n}")));
            }
            Ok(Plan::Done(blocks.into_iter().zip(v).collect::<Vec<_>>()))
        })?
        .into_strategy();
        return Ok(then(counted, |blocks, _| {
            let mut parts = Vec::new();
            for (b, d) in blocks.into_iter().filter(|(_, d)| *d > 0) {
                let keep = b.clone();
                parts.push(map_output(solve_sparse_on(b, d as usize)?, move |v| Ok(members(&keep, v))));
            }
            Ok(map_output(sequence(parts), |v| Ok(v.concat())))
        }));
    }
    Ok(then(reduce_to_square(elements, n), move |(kept, rest), _| {
        let groups: Vec<Vec<u32>> = rest.chunks(n).map(|c| c.to_vec()).collect();
        let asks = groups.iter().map(|g| count(g.clone(), n as u64)).collect();
        let hinted = ask_all(asks, move |v| {
            let mut blocks = kept;
            blocks.extend(groups.into_iter().zip(v).map(|(elems, d)| Block { elems, d }));
            blocks.retain(|b| b.d > 0);
            let total: u64 = blocks.iter().map(|b| b.d).sum();
            if total > n as u64 {
                return Err(SolveError::InconsistentOracle(format!("{total} members with capacity {n}")));
            }
            Ok(Plan::Done(blocks))
        })?
        .into_strategy();
        Ok(then(hinted, move |blocks, _| {
            let inst = SquareInst { m: n, blocks };
            Ok(map_output(solve_bounded(Arc::new(SquareFamily), inst, Schedule::root())?, |mut f| {
                f.sort_unstable();
                Ok(f)
            }))
        }))
    }))
}

/// Finds the members among `elements` (at most `n` of them) with queries of
/// at most `n` elements. Members come back in ascending order.
pub fn solve_setquery_on(elements: Vec<u32>, n: usize) -> Result<BoxStrategy<Subset, Vec<u32>>> {
    if n == 0 {
        return Err(SolveError::InvalidParameters("capacity must be positive".into()));
    }
    let s = uncapped(elements, n)?;
    Ok(size_capped(
        map_output(s, |mut v| {
            v.sort_unstable();
            Ok(v)
        }),
        n,
    ))
}

/// [`solve_setquery_on`] over elements `1..=k`.
pub fn solve_setquery(k: usize, n: usize) -> Result<BoxStrategy<Subset, Vec<u32>>> {
    if k < n {
        return Err(SolveError::InvalidParameters(format!("universe {k} smaller than capacity {n}")));
    }
    solve_setquery_on((1..=k as u32).collect(), n)
}
