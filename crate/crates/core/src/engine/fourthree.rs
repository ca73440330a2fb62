//! Solving three terms and reducing a fourth with three queries per round.
//!
//! Round `t` asks `B+C+D`, `A+C+D`, `A+B+D`. The combinations
//! `−m1+m2+m3 = 2a+d`, `m1−m2+m3 = 2b+d` and `m1+m2−m3 = 2c+d` recover all
//! four sub-answers once `d` is pinned down, by parity when `d ≤ 1` and by a
//! residue of one of `a`, `b`, `c` in the scheduled layout.

use crate::error::{Result, SolveError};
use crate::game::SumQuery;
use crate::schedule::Schedule;
use crate::strategy::{Ask, BoxStrategy, Residue, Step, Strategy};

#[derive(Clone, Debug)]
pub enum Layout {
    /// All four terms advance together for `T` rounds; `D` must be simple.
    Simple,
    /// `B` and `C` lag one and two rounds behind over `T + 2` rounds; `D` is
    /// bounded by `r(t)` and the result is predictable under the schedule.
    Scheduled(Schedule),
}

/// Combines `a`, `b`, `c` (each padded to exactly `t` steps) and `d` (padded
/// to `t` steps) into one strategy of `3t` steps, or `3(t+2)` when scheduled.
pub fn four_to_three<Q, S, X>(
    subs: [BoxStrategy<Q, S>; 3],
    d: BoxStrategy<Q, X>,
    t: u64,
    layout: Layout,
) -> BoxStrategy<Q, ([S; 3], X)>
where
    Q: SumQuery,
    S: Send + 'static,
    X: Send + 'static,
{
    let rounds = match layout {
        Layout::Simple => t,
        Layout::Scheduled(_) => t + 2,
    };
    let [a, b, c] = subs;
    Box::new(FourToThree {
        subs: [Some(a), Some(b), Some(c)],
        d: Some(d),
        outs: [None, None, None],
        dout: None,
        len: t,
        rounds,
        round: 1,
        phase: 0,
        cur: [None, None, None, None],
        rows: [0; 3],
        layout,
    })
}

struct FourToThree<Q, S, X> {
    subs: [Option<BoxStrategy<Q, S>>; 3],
    d: Option<BoxStrategy<Q, X>>,
    outs: [Option<S>; 3],
    dout: Option<X>,
    len: u64,
    rounds: u64,
    round: u64,
    phase: usize,
    // current asks of A, B, C, D; None when the term is outside its window
    cur: [Option<Ask<Q>>; 4],
    rows: [u64; 3],
    layout: Layout,
}

impl<Q: SumQuery, S: Send, X: Send> FourToThree<Q, S, X> {
    fn lag(&self, k: usize) -> u64 {
        match (&self.layout, k) {
            (Layout::Scheduled(_), 1) => 1,
            (Layout::Scheduled(_), 2) => 2,
            _ => 0,
        }
    }

    fn local_step(&self, k: usize) -> Option<u64> {
        let s = self.round.checked_sub(self.lag(k))?;
        (1..=self.len).contains(&s).then_some(s)
    }

    fn pull<T>(sub: &mut BoxStrategy<Q, T>, which: char) -> Result<Ask<Q>> {
        match sub.step()? {
            Step::Ask(a) => Ok(a),
            Step::Done => Err(SolveError::ShapeError(format!(
                "term {which} finished before its padded length"
            ))),
        }
    }

    fn begin_round(&mut self) -> Result<()> {
        for k in 0..3 {
            self.cur[k] = match self.local_step(k) {
                Some(_) => Some(Self::pull(self.subs[k].as_mut().unwrap(), ['A', 'B', 'C'][k])?),
                None => None,
            };
        }
        self.cur[3] = match self.local_step(3) {
            Some(_) => Some(Self::pull(self.d.as_mut().unwrap(), 'D')?),
            None => None,
        };
        let bd = self.d_bound();
        match &self.layout {
            Layout::Simple => {
                if bd > 1 {
                    return Err(SolveError::SimplicityViolation { step: self.round, bound: bd });
                }
            }
            Layout::Scheduled(s) => {
                let r = s.r(self.round);
                if bd > r {
                    return Err(SolveError::ScheduleViolation(format!(
                        "reduced term declared bound {bd} in round {} where r = {r}",
                        self.round
                    )));
                }
            }
        }
        Ok(())
    }

    fn d_bound(&self) -> u64 {
        match &self.cur[3] {
            None => 0,
            Some(a) if a.query.is_zero() => 0,
            Some(a) => a.bound.unwrap_or(u64::MAX),
        }
    }

    fn row(&self, which: usize) -> Ask<Q> {
        // row 0 omits A, row 1 omits B, row 2 omits C
        let mut q = Q::zero();
        let mut bound = Some(0u64);
        for k in 0..4 {
            if k == which {
                continue;
            }
            if let Some(a) = &self.cur[k] {
                q.absorb(&a.query);
                let b = if a.query.is_zero() { Some(0) } else { a.bound };
                bound = match (bound, b) {
                    (Some(x), Some(y)) => x.checked_add(y),
                    _ => None,
                };
            }
        }
        Ask { query: q, bound, residue: None }
    }

    /// Residue of term `k`'s current answer modulo `2^bits`.
    fn residue_of(&self, k: usize, bits: u32) -> Result<u64> {
        if bits == 0 {
            return Ok(0);
        }
        match &self.cur[k] {
            None => Ok(0),
            Some(a) if a.query.is_zero() => Ok(0),
            Some(a) => a.residue.and_then(|r| r.reduce(bits)).ok_or_else(|| {
                SolveError::ScheduleViolation(format!(
                    "term {} gives no residue mod 2^{bits} in round {}",
                    ['A', 'B', 'C'][k],
                    self.round
                ))
            }),
        }
    }

    fn role(&self) -> usize {
        // rounds divisible by 3 use A, then B, then C
        match self.round % 3 {
            0 => 0,
            1 => 1,
            _ => 2,
        }
    }

    fn third_row_residue(&self) -> Result<Option<Residue>> {
        let Layout::Scheduled(s) = &self.layout else { return Ok(None) };
        let slot = s.at(self.round);
        let y = slot.y;
        if y == 0 {
            return Ok(Some(Residue::new(0, 0)));
        }
        // answers stay below 2^63, so 63 bits already pin them exactly
        let ybits = y.min(63) as u32;
        let k = self.role();
        let p = self.residue_of(k, ybits - 1)? as i128;
        let (m1, m2) = (self.rows[0] as i128, self.rows[1] as i128);
        let v = match k {
            0 => 2 * p + m1 - m2,
            1 => 2 * p + m2 - m1,
            _ => m1 + m2 - 2 * p,
        };
        let m = 1i128 << ybits;
        Ok(Some(Residue::new(ybits, v.rem_euclid(m) as u64)))
    }

    fn decode(&mut self) -> Result<()> {
        let [m1, m2, m3] = self.rows.map(|v| v as i128);
        let sums = [-m1 + m2 + m3, m1 - m2 + m3, m1 + m2 - m3];
        let bd = self.d_bound();
        let d: i128 = if bd == 0 {
            0
        } else {
            let l = 64 - bd.leading_zeros();
            let k = match self.layout {
                Layout::Simple => 0,
                Layout::Scheduled(_) => self.role(),
            };
            let p = self.residue_of(k, l - 1)? as i128;
            (sums[k] - 2 * p).rem_euclid(1i128 << l)
        };
        let mut vals = [0u64; 4];
        for k in 0..3 {
            let twice = sums[k] - d;
            if twice < 0 || twice % 2 != 0 {
                return Err(SolveError::InconsistentOracle(format!(
                    "round {} answers {:?} admit no decomposition",
                    self.round, self.rows
                )));
            }
            vals[k] = (twice / 2) as u64;
        }
        vals[3] = d as u64;
        for k in 0..4 {
            let v = vals[k];
            match &self.cur[k] {
                None => {
                    if v != 0 {
                        return Err(SolveError::InconsistentOracle(format!(
                            "idle term answered {v} in round {}",
                            self.round
                        )));
                    }
                }
                Some(a) => {
                    if let Some(b) = a.bound {
                        if v > b {
                            return Err(SolveError::BoundViolation { step: self.round, answer: v, bound: b });
                        }
                    }
                    if let Some(r) = a.residue {
                        if !r.matches(v) {
                            return Err(SolveError::PredictabilityViolation {
                                answer: v,
                                value: r.value,
                                bits: r.bits,
                            });
                        }
                    }
                    if k < 3 {
                        self.subs[k].as_mut().unwrap().feed(v)?;
                    } else {
                        self.d.as_mut().unwrap().feed(v)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn wrap_up(&mut self) -> Result<()> {
        for k in 0..3 {
            if let Some(mut s) = self.subs[k].take() {
                if let Step::Ask(_) = s.step()? {
                    return Err(SolveError::ShapeError("term longer than its padded length".into()));
                }
                self.outs[k] = Some(s.finish()?);
            }
        }
        if let Some(mut d) = self.d.take() {
            if let Step::Ask(_) = d.step()? {
                return Err(SolveError::ShapeError("reduced term longer than its padded length".into()));
            }
            self.dout = Some(d.finish()?);
        }
        Ok(())
    }
}

impl<Q: SumQuery, S: Send, X: Send> Strategy<Q, ([S; 3], X)> for FourToThree<Q, S, X> {
    fn step(&mut self) -> Result<Step<Q>> {
        if self.phase == 0 {
            if self.round > self.rounds {
                self.wrap_up()?;
                return Ok(Step::Done);
            }
            self.begin_round()?;
        }
        let mut ask = self.row(self.phase);
        if self.phase == 2 {
            ask.residue = self.third_row_residue()?;
        }
        Ok(Step::Ask(ask))
    }

    fn feed(&mut self, answer: u64) -> Result<()> {
        self.rows[self.phase] = answer;
        self.phase += 1;
        if self.phase == 3 {
            self.decode()?;
            self.phase = 0;
            self.round += 1;
        }
        Ok(())
    }

    fn finish(self: Box<Self>) -> Result<([S; 3], X)> {
        let me = *self;
        let [a, b, c] = me.outs;
        match (a, b, c, me.dout) {
            (Some(a), Some(b), Some(c), Some(d)) => Ok(([a, b, c], d)),
            _ => Err(SolveError::Protocol("finish called before completion".into())),
        }
    }
}
