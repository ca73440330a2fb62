//! Congruence-class timetables for bounded queries.
//!
//! Slot `t` of the greedy table carries `(x, y) = (2^i, j)` whenever
//! `t ≡ a_ij (mod 4^i)`. A slot admits answers up to `r(t) = 2^x − 1` when
//! `y = 0` and only zero queries otherwise.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Result, SolveError};
use crate::game::SumQuery;
use crate::strategy::{Ask, BoxStrategy, Step, Strategy};

pub const MAX_LEVEL: u32 = 31;

/// The lazily built greedy class assignment.
#[derive(Debug, Clone, Default)]
pub struct QSchedule {
    // levels[i-1] maps a_ij mod 4^i to j
    levels: Vec<HashMap<u64, u32>>,
    assigned: Vec<(u32, u32, u64)>,
    least: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Slot {
    /// `x = 2^level`.
    pub level: u32,
    pub y: u64,
}

impl Slot {
    pub fn x(&self) -> u64 {
        1u64 << self.level
    }

    /// Number of bits an answer may use in this slot (0 when `y > 0`).
    pub fn r_bits(&self) -> u32 {
        if self.y == 0 {
            self.x().min(64) as u32
        } else {
            0
        }
    }

    pub fn r(&self) -> u64 {
        crate::strategy::mask(self.r_bits())
    }
}

impl QSchedule {
    pub fn new() -> Self {
        QSchedule { levels: Vec::new(), assigned: Vec::new(), least: 1 }
    }

    fn next_class(&self) -> (u32, u32) {
        match self.assigned.last() {
            None => (1, 0),
            Some(&(i, j, _)) if (j as u64) + 1 < (1u64 << i) => (i, j + 1),
            Some(&(i, _, _)) => (i + 1, 0),
        }
    }

    fn lookup(&self, t: u64) -> Option<Slot> {
        for (k, level) in self.levels.iter().enumerate() {
            let i = k as u32 + 1;
            if let Some(&j) = level.get(&(t % (1u64 << (2 * i)))) {
                return Some(Slot { level: i, y: j as u64 });
            }
        }
        None
    }

    fn assign_next(&mut self) -> (u32, u32, u64) {
        let (i, j) = self.next_class();
        assert!(i <= MAX_LEVEL, "schedule exhausted its level cap");
        let mut a = self.least.max(1);
        while self.lookup(a).is_some() {
            a += 1;
        }
        if self.levels.len() < i as usize {
            self.levels.push(HashMap::new());
        }
        self.levels[i as usize - 1].insert(a % (1u64 << (2 * i)), j);
        self.assigned.push((i, j, a));
        self.least = a + 1;
        (i, j, a)
    }

    /// Assigns classes in lexicographic order up to and including `(i, j)`.
    pub fn assign_classes(&mut self, up_to: (u32, u32)) {
        while self.assigned.last().map(|&(i, j, _)| (i, j) < up_to).unwrap_or(true) {
            self.assign_next();
        }
    }

    /// The residue `a_ij`, assigning classes as needed.
    pub fn a(&mut self, i: u32, j: u32) -> u64 {
        self.assign_classes((i, j));
        self.assigned
            .iter()
            .find(|&&(ii, jj, _)| (ii, jj) == (i, j))
            .map(|&(_, _, a)| a)
            .expect("class assigned")
    }

    pub fn q_at(&mut self, t: u64) -> Slot {
        assert!(t >= 1, "slots start at 1");
        loop {
            if let Some(s) = self.lookup(t) {
                return s;
            }
            self.assign_next();
        }
    }

    /// All assigned classes as `(i, j, a_ij)`.
    pub fn classes(&self) -> &[(u32, u32, u64)] {
        &self.assigned
    }

    /// Number of assigned classes containing `t`.
    pub fn cover_count(&self, t: u64) -> usize {
        self.levels
            .iter()
            .enumerate()
            .filter(|(k, level)| level.contains_key(&(t % (1u64 << (2 * (*k as u32 + 1))))))
            .count()
    }

    /// Whether no two assigned classes share a member.
    pub fn disjoint(&self) -> bool {
        let c = &self.assigned;
        c.iter().enumerate().all(|(n, &(i, _, a))| {
            c[n + 1..].iter().all(|&(i2, _, a2)| {
                let m = 1u64 << (2 * i.min(i2));
                a % m != a2 % m
            })
        })
    }
}

fn shared_table() -> Arc<Mutex<QSchedule>> {
    static TABLE: OnceLock<Arc<Mutex<QSchedule>>> = OnceLock::new();
    TABLE.get_or_init(|| Arc::new(Mutex::new(QSchedule::new()))).clone()
}

/// A member of the schedule family: `t ↦ base(mult·t + offset)` with every
/// `y` decremented `ydec` times modulo its `x`.
#[derive(Clone)]
pub struct Schedule {
    table: Arc<Mutex<QSchedule>>,
    mult: u64,
    offset: u64,
    ydec: u64,
}

impl std::fmt::Debug for Schedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Schedule")
            .field("mult", &self.mult)
            .field("offset", &self.offset)
            .field("ydec", &self.ydec)
            .finish()
    }
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::root()
    }
}

impl Schedule {
    /// The greedy table itself, shared process-wide.
    pub fn root() -> Self {
        Schedule { table: shared_table(), mult: 1, offset: 0, ydec: 0 }
    }

    pub fn with_table(table: QSchedule) -> Self {
        Schedule { table: Arc::new(Mutex::new(table)), mult: 1, offset: 0, ydec: 0 }
    }

    pub fn at(&self, t: u64) -> Slot {
        let base = self.mult.checked_mul(t).and_then(|v| v.checked_add(self.offset));
        let base = base.expect("schedule index overflow");
        let s = self.table.lock().expect("schedule lock").q_at(base);
        let x = s.x();
        Slot { level: s.level, y: (s.y + x - self.ydec % x) % x }
    }

    pub fn r(&self, t: u64) -> u64 {
        self.at(t).r()
    }

    /// `t ↦ self(t + a)`.
    pub fn shift(&self, a: u64) -> Self {
        Schedule { offset: self.offset + self.mult * a, ..self.clone() }
    }

    /// The three derived schedules `t ↦ (x(3t+c), y(3t+c) − 1 mod x(3t+c))`.
    pub fn interlace(&self) -> [Schedule; 3] {
        let sub = |c: u64| Schedule {
            table: self.table.clone(),
            mult: self.mult * 3,
            offset: self.offset + self.mult * c,
            ydec: self.ydec + 1,
        };
        [sub(0), sub(1), sub(2)]
    }

    /// Lines `t,x,y,r` for `t = 1..=horizon`.
    pub fn dump(&self, horizon: u64) -> String {
        let mut out = String::new();
        for t in 1..=horizon {
            let s = self.at(t);
            let r = if s.r_bits() >= 64 { "inf".to_string() } else { s.r().to_string() };
            let _ = writeln!(out, "{t},{},{},{r}", s.x(), s.y);
        }
        out
    }
}

/// `log2(b + 1)^2`, the weight of a query with answer bound `b`.
pub fn weight_of(bound: u64) -> f64 {
    ((bound as f64) + 1.0).log2().powi(2)
}

/// Sums the weight of a bounded strategy, failing past `limit`.
pub fn metered<Q, O>(inner: BoxStrategy<Q, O>, limit: f64) -> BoxStrategy<Q, O>
where
    Q: SumQuery,
    O: Send + 'static,
{
    Box::new(Metered { inner, limit, weight: 0.0 })
}

struct Metered<Q, O> {
    inner: BoxStrategy<Q, O>,
    limit: f64,
    weight: f64,
}

impl<Q: SumQuery, O: Send> Strategy<Q, O> for Metered<Q, O> {
    fn step(&mut self) -> Result<Step<Q>> {
        let s = self.inner.step()?;
        if let Step::Ask(a) = &s {
            if !a.query.is_zero() {
                let b = a.bound.ok_or_else(|| {
                    SolveError::ShapeError("bounded strategy asked without a bound".into())
                })?;
                self.weight += weight_of(b);
                if self.weight > self.limit + 1e-9 {
                    return Err(SolveError::WeightViolation { weight: self.weight, limit: self.limit });
                }
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

/// Delays each query of a weighted strategy to the first slot whose `r`
/// admits its bound, asking zero queries meanwhile. Queries with bound 0
/// are answered locally and take no slot.
pub fn pad_to_r<Q, O>(inner: BoxStrategy<Q, O>, schedule: Schedule) -> BoxStrategy<Q, O>
where
    Q: SumQuery,
    O: Send + 'static,
{
    Box::new(PadToR { inner, schedule, t: 0, pending: None, emitted: false, done: false })
}

struct PadToR<Q, O> {
    inner: BoxStrategy<Q, O>,
    schedule: Schedule,
    t: u64,
    pending: Option<Ask<Q>>,
    emitted: bool,
    done: bool,
}

impl<Q: SumQuery, O: Send> Strategy<Q, O> for PadToR<Q, O> {
    fn step(&mut self) -> Result<Step<Q>> {
        while self.pending.is_none() {
            if self.done {
                return Ok(Step::Done);
            }
            match self.inner.step()? {
                Step::Done => {
                    self.done = true;
                    return Ok(Step::Done);
                }
                Step::Ask(a) => {
                    let b = a.bound.ok_or_else(|| {
                        SolveError::ShapeError("bounded strategy asked without a bound".into())
                    })?;
                    if b == 0 || a.query.is_zero() {
                        self.inner.feed(0)?;
                    } else {
                        self.pending = Some(a);
                    }
                }
            }
        }
        self.t += 1;
        let r = self.schedule.r(self.t);
        let b = self.pending.as_ref().and_then(|a| a.bound).unwrap_or(0);
        if b <= r {
            self.emitted = true;
            let a = self.pending.take().unwrap();
            Ok(Step::Ask(Ask { query: a.query, bound: a.bound, residue: None }))
        } else {
            self.emitted = false;
            Ok(Step::Ask(Ask::zero()))
        }
    }

    fn feed(&mut self, answer: u64) -> Result<()> {
        if self.emitted {
            self.emitted = false;
            self.inner.feed(answer)
        } else if answer != 0 {
            Err(SolveError::InconsistentOracle(format!("zero query answered {answer}")))
        } else {
            Ok(())
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
    use crate::strategy::{ask_all, Plan};

    #[test]
    fn first_classes() {
        let mut q = QSchedule::new();
        assert_eq!(q.a(1, 0), 1);
        assert_eq!(q.a(1, 1), 2);
        assert_eq!(q.a(2, 0), 3);
        assert_eq!(q.a(2, 1), 4);
    }

    #[test]
    fn first_slots() {
        let mut q = QSchedule::new();
        assert_eq!(q.q_at(1), Slot { level: 1, y: 0 });
        assert_eq!(q.q_at(2), Slot { level: 1, y: 1 });
        assert_eq!(q.q_at(5), Slot { level: 1, y: 0 });
        let s = q.q_at(1);
        assert_eq!((s.x(), s.r()), (2, 3));
    }

    #[test]
    fn interlace_decrements_y() {
        let s = Schedule::root();
        let [a, b, c] = s.interlace();
        for (k, d) in [a, b, c].iter().enumerate() {
            for t in 1..200u64 {
                let p = s.at(3 * t + k as u64);
                let q = d.at(t);
                assert_eq!(p.level, q.level);
                assert_eq!(q.y, (p.y + p.x() - 1) % p.x());
            }
        }
    }

    #[test]
    fn shift_composes() {
        let s = Schedule::root();
        assert_eq!(s.shift(0).at(7), s.at(7));
        assert_eq!(s.shift(4).at(1), s.at(5));
        let [a, _, _] = s.interlace();
        assert_eq!(a.shift(2).at(1), a.at(3));
    }

    #[test]
    fn dump_format() {
        let d = Schedule::root().dump(2);
        assert_eq!(d, "1,2,0,3\n2,2,1,0\n");
    }

    #[test]
    fn pad_single_unit_query() {
        let inner = ask_all(vec![Ask::bounded(Subset::single(1), 1)], |v| Ok(Plan::Done(v)))
            .unwrap()
            .into_strategy();
        let (_, tr) = run_strategy(pad_to_r(inner, Schedule::root()), |_: &Subset| 1, 100).unwrap();
        assert!(tr.len() <= 4);
    }

    #[test]
    fn pad_skips_zero_bound_queries() {
        let inner = ask_all(vec![Ask::bounded(Subset::single(1), 0)], |v| Ok(Plan::Done(v)))
            .unwrap()
            .into_strategy();
        let (out, tr) = run_strategy(pad_to_r(inner, Schedule::root()), |_: &Subset| 0, 100).unwrap();
        assert_eq!(out, vec![0]);
        assert!(tr.is_empty());
    }

    #[test]
    fn metered_rejects_overweight() {
        let inner = ask_all(vec![Ask::bounded(Subset::single(1), 3); 2], |v| Ok(Plan::Done(v)))
            .unwrap()
            .into_strategy();
        let r = run_strategy(metered(inner, 7.0), |_: &Subset| 0, 100);
        assert!(matches!(r, Err(SolveError::WeightViolation { .. })));
    }
}
