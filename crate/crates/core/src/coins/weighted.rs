//! Coins with arbitrary non-negative values and a known total, and the
//! sparse 0/1 case with a known number of counterfeits.

use std::sync::Arc;

use super::sum::{solve_leaf_heavy, LeafHeavy};
use crate::engine::{FamilyStrategy, Outcome, SplitFamily};
use crate::error::{Result, SolveError};
use crate::game::Subset;
use crate::strategy::{done, map_output, translate, Ask, AnswerMap, BoxStrategy, Plan};

/// Coins `ids` with total value `w`, sized so that `λ·w + |ids| ≤ 2λ·m`.
#[derive(Clone, Debug)]
pub struct WeightedPile {
    pub m: usize,
    pub ids: Vec<u32>,
    pub w: u64,
}

/// The family `A_m^λ` of weighted coin piles.
pub struct WeightedFamily {
    lambda: u64,
    alpha: f64,
}

fn log2_ceil(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

impl WeightedFamily {
    pub fn new(lambda: u64) -> Self {
        let lambda = lambda.max(2);
        let mut fam = WeightedFamily { lambda, alpha: 0.0 };
        let mut a = fam.base_weight();
        for m in 2..=4096usize {
            a = a.max(fam.split_weight(m) / m as f64);
        }
        fam.alpha = a;
        fam
    }

    pub fn lambda(&self) -> u64 {
        self.lambda
    }

    fn fits(&self, p: &WeightedPile) -> bool {
        self.lambda as u128 * p.w as u128 + p.ids.len() as u128 <= 2 * self.lambda as u128 * p.m as u128
    }
}

/// Binary search for the single counterfeit among `ids`.
fn find_single(ids: Vec<u32>) -> Plan<Subset, Vec<(u32, u64)>> {
    if ids.len() == 1 {
        return Plan::Done(vec![(ids[0], 1)]);
    }
    let h = ids.len().div_ceil(2);
    let q = Subset(ids[..h].to_vec());
    Plan::ask(Ask::bounded(q, 1), move |v| {
        let (l, r) = ids.split_at(h);
        let (hit, miss) = if v == 1 { (l, r) } else { (r, l) };
        let zeros: Vec<(u32, u64)> = miss.iter().map(|&i| (i, 0)).collect();
        let hit = hit.to_vec();
        Ok(prepend(zeros, find_single(hit)))
    })
}

fn prepend(mut facts: Vec<(u32, u64)>, p: Plan<Subset, Vec<(u32, u64)>>) -> Plan<Subset, Vec<(u32, u64)>> {
    match p {
        Plan::Done(more) => {
            facts.extend(more);
            Plan::Done(facts)
        }
        Plan::Ask(a, k) => Plan::ask(a, move |v| Ok(prepend(facts, k(v)?))),
    }
}

impl SplitFamily for WeightedFamily {
    type Query = Subset;
    type Instance = WeightedPile;
    type Fact = (u32, u64);

    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn size(&self, inst: &WeightedPile) -> usize {
        inst.m
    }

    fn base(&self, inst: WeightedPile) -> Result<FamilyStrategy<Self>> {
        if inst.w == 0 {
            return Ok(done(Outcome::solved(inst.ids.iter().map(|&i| (i, 0)).collect())));
        }
        if inst.ids.is_empty() || inst.w > 1 {
            return Err(SolveError::InconsistentOracle(format!(
                "weight {} left on {} coins in a base pile",
                inst.w,
                inst.ids.len()
            )));
        }
        Ok(map_output(find_single(inst.ids).into_strategy(), |f| Ok(Outcome::solved(f))))
    }

    fn split(&self, inst: WeightedPile) -> Result<FamilyStrategy<Self>> {
        if !self.fits(&inst) {
            return Err(SolveError::ShapeError(format!("pile {inst:?} outside its family")));
        }
        let lam = self.lambda as u128;
        let cap = 2 * lam * inst.m.div_ceil(2) as u128;
        let pred = move |i: usize, f: u64| lam * f as u128 + i as u128 <= cap;
        let n = inst.ids.len();
        let finish = |inst: WeightedPile, i: usize, fi: u64, fnext: u64| -> Result<Outcome<WeightedPile, (u32, u64)>> {
            let m = inst.m;
            let mut facts = Vec::new();
            let left = WeightedPile { m: m.div_ceil(2), ids: inst.ids[..i].to_vec(), w: fi };
            let right = if i < inst.ids.len() {
                if fnext < fi || fnext > inst.w {
                    return Err(SolveError::InconsistentOracle("prefix weights not monotone".into()));
                }
                facts.push((inst.ids[i], fnext - fi));
                WeightedPile { m: m / 2, ids: inst.ids[i + 1..].to_vec(), w: inst.w - fnext }
            } else {
                WeightedPile { m: m / 2, ids: Vec::new(), w: 0 }
            };
            Ok(Outcome { children: vec![left, right], facts })
        };
        if pred(n, inst.w) {
            let w = inst.w;
            return Ok(done(finish(inst, n, w, w)?));
        }
        // invariant: pred(lo) holds, pred(hi) fails; prefix values f(lo), f(hi)
        fn search(
            inst: WeightedPile,
            lo: (usize, u64),
            hi: (usize, u64),
            pred: Arc<dyn Fn(usize, u64) -> bool + Send + Sync>,
            finish: Arc<dyn Fn(WeightedPile, usize, u64, u64) -> Result<Outcome<WeightedPile, (u32, u64)>> + Send + Sync>,
        ) -> Result<Plan<Subset, Outcome<WeightedPile, (u32, u64)>>> {
            if hi.0 - lo.0 <= 1 {
                return Ok(Plan::Done(finish(inst, lo.0, lo.1, hi.1)?));
            }
            let mid = (lo.0 + hi.0) / 2;
            let q = Subset(inst.ids[..mid].to_vec());
            Ok(Plan::ask(Ask::bounded(q, hi.1), move |v| {
                if v < lo.1 || v > hi.1 {
                    return Err(SolveError::InconsistentOracle("prefix weights not monotone".into()));
                }
                if pred(mid, v) {
                    search(inst, (mid, v), hi, pred, finish)
                } else {
                    search(inst, lo, (mid, v), pred, finish)
                }
            }))
        }
        let w = inst.w;
        Ok(search(inst, (0, 0), (n, w), Arc::new(pred), Arc::new(finish))?.into_strategy())
    }
}

impl LeafHeavy for WeightedFamily {
    fn split_weight(&self, m: usize) -> f64 {
        let n = 2 * self.lambda * m as u64;
        log2_ceil(n) as f64 * crate::schedule::weight_of(2 * m as u64)
    }

    fn base_weight(&self) -> f64 {
        log2_ceil(2 * self.lambda).max(1) as f64
    }
}

fn assemble(ids: &[u32], facts: Vec<(u32, u64)>) -> Result<Vec<u64>> {
    let pos: std::collections::HashMap<u32, usize> = ids.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut out = vec![None; ids.len()];
    for (c, v) in facts {
        let i = *pos
            .get(&c)
            .ok_or_else(|| SolveError::ImpossibleState(format!("fact about unknown coin {c}")))?;
        out[i] = Some(v);
    }
    out.into_iter()
        .zip(ids)
        .map(|(v, c)| v.ok_or_else(|| SolveError::ImpossibleState(format!("coin {c} undecided"))))
        .collect()
}

/// Finds the values of coins `ids` given their total `w`.
pub fn solve_weighted_on(ids: Vec<u32>, w: u64) -> Result<BoxStrategy<Subset, Vec<u64>>> {
    let n = ids.len() as u64;
    if w == 0 {
        return Ok(done(vec![0; ids.len()]));
    }
    if n == 0 {
        return Err(SolveError::InvalidParameters("positive weight on no coins".into()));
    }
    let fam = Arc::new(WeightedFamily::new(n.div_ceil(w)));
    let pile = WeightedPile { m: w as usize, ids: ids.clone(), w };
    Ok(map_output(solve_leaf_heavy(fam, pile)?, move |facts| assemble(&ids, facts)))
}

/// [`solve_weighted_on`] for coins `1..=n`.
pub fn solve_weighted(n: usize, w: u64) -> Result<BoxStrategy<Subset, Vec<u64>>> {
    solve_weighted_on((1..=n as u32).collect(), w)
}

/// Finds which `d` of the coins `ids` are counterfeit.
pub fn solve_sparse_on(ids: Vec<u32>, d: usize) -> Result<BoxStrategy<Subset, Vec<u64>>> {
    let n = ids.len();
    if d > n {
        return Err(SolveError::InvalidParameters(format!("{d} counterfeits among {n} coins")));
    }
    if 2 * d <= n {
        return solve_weighted_on(ids, d as u64);
    }
    // genuine coins are the sparse side
    let inner = solve_weighted_on(ids, (n - d) as u64)?;
    let flipped = translate(inner, |q: Subset| {
        let off = q.len() as i64;
        Ok((q, AnswerMap { negate: true, offset: off }))
    });
    Ok(map_output(flipped, |v| {
        v.into_iter()
            .map(|x| match x {
                0 => Ok(1),
                1 => Ok(0),
                _ => Err(SolveError::InconsistentOracle("coin value above 1".into())),
            })
            .collect()
    }))
}

/// [`solve_sparse_on`] for coins `1..=n`.
pub fn solve_sparse(n: usize, d: usize) -> Result<BoxStrategy<Subset, Vec<u64>>> {
    solve_sparse_on((1..=n as u32).collect(), d)
}

/// 0/1 coins with a known number of counterfeits, split by weighing the
/// left half.
#[derive(Clone, Debug)]
pub struct CountedPile {
    pub ids: Vec<u32>,
    pub count: u64,
}

pub struct CountedFamily;

impl SplitFamily for CountedFamily {
    type Query = Subset;
    type Instance = CountedPile;
    type Fact = (u32, u64);

    fn alpha(&self) -> f64 {
        1.0
    }

    fn size(&self, inst: &CountedPile) -> usize {
        inst.ids.len()
    }

    fn base(&self, inst: CountedPile) -> Result<FamilyStrategy<Self>> {
        if inst.count > 1 {
            return Err(SolveError::InconsistentOracle("count above 1 on a single coin".into()));
        }
        Ok(done(Outcome::solved(vec![(inst.ids[0], inst.count)])))
    }

    fn split(&self, inst: CountedPile) -> Result<FamilyStrategy<Self>> {
        let h = inst.ids.len().div_ceil(2);
        let bound = inst.count.min(h as u64);
        let q = Subset(inst.ids[..h].to_vec());
        Ok(Plan::ask(Ask::bounded(q, bound), move |v| {
            if v > inst.count {
                return Err(SolveError::InconsistentOracle("half outweighs the whole".into()));
            }
            let right = inst.ids.len() - h;
            if inst.count - v > right as u64 {
                return Err(SolveError::InconsistentOracle("count exceeds coins".into()));
            }
            let (l, r) = inst.ids.split_at(h);
            Ok(Plan::Done(Outcome {
                children: vec![
                    CountedPile { ids: l.to_vec(), count: v },
                    CountedPile { ids: r.to_vec(), count: inst.count - v },
                ],
                facts: Vec::new(),
            }))
        })
        .into_strategy())
    }
}

impl LeafHeavy for CountedFamily {
    fn split_weight(&self, m: usize) -> f64 {
        crate::schedule::weight_of(m.div_ceil(2) as u64)
    }

    fn base_weight(&self) -> f64 {
        0.0
    }
}

/// Plain coin weighing through the counted family: weigh everything once,
/// then solve the counted pile leaf-heavy.
pub fn solve_counted(n: usize) -> Result<BoxStrategy<Subset, Vec<u64>>> {
    let ids: Vec<u32> = (1..=n as u32).collect();
    if n == 0 {
        return Ok(done(Vec::new()));
    }
    let all = Subset(ids.clone());
    Ok(crate::strategy::then(
        Plan::ask(Ask::bounded(all, n as u64), |v| Ok(Plan::Done(v))).into_strategy(),
        move |count, _| {
            let pile = CountedPile { ids: ids.clone(), count };
            Ok(map_output(solve_leaf_heavy(Arc::new(CountedFamily), pile)?, move |f| assemble(&ids, f)))
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::run_strategy;

    fn weigh(code: &[u64]) -> impl FnMut(&Subset) -> u64 + '_ {
        move |q| q.ids().iter().map(|&i| code[i as usize - 1]).sum()
    }

    #[test]
    fn single_heavy_coin_by_binary_search() {
        let mut code = vec![0; 1024];
        code[700] = 1;
        let (v, tr) = run_strategy(solve_weighted(1024, 1).unwrap(), weigh(&code), 10_000).unwrap();
        assert_eq!(v, code);
        assert!(tr.queries() <= 10);
    }

    #[test]
    fn sparse_all_counterfeit_needs_nothing() {
        let (v, tr) = run_strategy(solve_sparse(5, 5).unwrap(), weigh(&[1; 5]), 100).unwrap();
        assert_eq!(v, vec![1; 5]);
        assert_eq!(tr.queries(), 0);
    }

    #[test]
    fn weighted_small_exhaustive() {
        // all compositions of 4 into 4 parts
        for a in 0..=4u64 {
            for b in 0..=4 - a {
                for c in 0..=4 - a - b {
                    let code = vec![a, b, c, 4 - a - b - c];
                    let (v, _) = run_strategy(solve_weighted(4, 4).unwrap(), weigh(&code), 1 << 20).unwrap();
                    assert_eq!(v, code);
                }
            }
        }
    }

    #[test]
    fn counted_roundtrip() {
        let code: Vec<u64> = (0..64).map(|i| (i * 7 % 5 == 0) as u64).collect();
        let (v, _) = run_strategy(solve_counted(64).unwrap(), weigh(&code), 1 << 22).unwrap();
        assert_eq!(v, code);
    }

    #[test]
    fn family_alpha_covers_splits() {
        let f = WeightedFamily::new(2);
        assert!(f.alpha() >= f.base_weight());
        for m in 2..100 {
            assert!(f.split_weight(m) <= f.alpha() * m as f64 + 1e-9);
        }
    }
}
