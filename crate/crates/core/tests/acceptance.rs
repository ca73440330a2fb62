//! Exit gate: one line per criterion, nonzero exit if any fails.

use std::collections::HashMap;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use querygames::engine::{four_to_three, Layout, SplitFamily};
use querygames::game::run_logged;
use querygames::games::{AnyQuery, GameKind, GameSpec};
use querygames::mastermind::{Feedback, HintedFamily, HintedInst};
use querygames::schedule::{pad_to_r, weight_of, QSchedule, Schedule};
use querygames::setquery::size_capped;
use querygames::strategy::{done, map_output, padded, Ask, Plan};
use querygames::{run_strategy, BoxStrategy, Pattern, Residue, SolveError, Subset, SumQuery};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

// ---------------------------------------------------------------- oracles

fn answer(spec: &GameSpec, code: &[u32], q: &AnyQuery) -> u64 {
    match q {
        AnyQuery::Zero => 0,
        AnyQuery::Set(s) if spec.game == GameKind::Setquery => {
            s.0.iter().filter(|e| code.contains(e)).count() as u64
        }
        AnyQuery::Set(s) => s.0.iter().map(|&i| code[i as usize - 1] as u64).sum(),
        AnyQuery::Colors(p) => black(code, p),
        AnyQuery::Pegs(p) => match p.feedback {
            Feedback::Black => black(code, &p.pattern),
            Feedback::Total => {
                let mut have: HashMap<u32, i64> = HashMap::new();
                for &c in code {
                    *have.entry(c).or_default() += 1;
                }
                let mut guess: HashMap<u32, i64> = HashMap::new();
                for &(_, c) in &p.pattern.0 {
                    *guess.entry(c).or_default() += 1;
                }
                guess.iter().map(|(c, g)| (*g).min(*have.get(c).unwrap_or(&0)) as u64).sum()
            }
        },
    }
}

fn black(code: &[u32], p: &Pattern) -> u64 {
    p.0.iter().filter(|&&(pos, c)| code[pos as usize] == c).count() as u64
}

fn enumerate(spec: &GameSpec) -> Vec<Vec<u32>> {
    let n = spec.n;
    let mut out = Vec::new();
    match spec.game {
        GameKind::Coins => {
            for m in 0u64..1 << n {
                out.push((0..n).map(|i| (m >> i & 1) as u32).collect());
            }
        }
        GameKind::CoinsSparse => {
            for m in 0u64..1 << n {
                if m.count_ones() as usize == spec.d {
                    out.push((0..n).map(|i| (m >> i & 1) as u32).collect());
                }
            }
        }
        GameKind::CoinsWeighted => {
            fn go(left: u32, slots: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
                if slots == 1 {
                    cur.push(left);
                    out.push(cur.clone());
                    cur.pop();
                    return;
                }
                for v in 0..=left {
                    cur.push(v);
                    go(left - v, slots - 1, cur, out);
                    cur.pop();
                }
            }
            go(spec.w as u32, n, &mut Vec::new(), &mut out);
        }
        GameKind::MastermindPerm => {
            fn go(n: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
                if cur.len() == n {
                    out.push(cur.clone());
                    return;
                }
                for c in 1..=n as u32 {
                    if !cur.contains(&c) {
                        cur.push(c);
                        go(n, cur, out);
                        cur.pop();
                    }
                }
            }
            go(n, &mut Vec::new(), &mut out);
        }
        GameKind::MastermindBp | GameKind::MastermindWp => {
            let k = spec.k as u64;
            for mut i in 0..k.pow(n as u32) {
                let mut v = Vec::with_capacity(n);
                for _ in 0..n {
                    v.push((i % k) as u32 + 1);
                    i /= k;
                }
                out.push(v);
            }
        }
        GameKind::Setquery => {
            for m in 0u64..1 << spec.k {
                if m.count_ones() as usize <= n {
                    out.push((0..spec.k as u32).filter(|i| m >> i & 1 == 1).map(|i| i + 1).collect());
                }
            }
        }
    }
    out
}

/// Number of distinct answers one query can get.
fn answers(spec: &GameSpec) -> f64 {
    let n = spec.n as f64;
    match spec.game {
        GameKind::CoinsSparse => spec.d.min(spec.n) as f64 + 1.0,
        GameKind::CoinsWeighted => spec.w as f64 + 1.0,
        GameKind::MastermindWp => (n + 1.0) * (n + 2.0) / 2.0,
        _ => n + 1.0,
    }
}

// ---------------------------------------------------------------- runs

#[derive(Default)]
struct Tally {
    runs: u64,
    max_steps: u64,
    max_queries: u64,
    wrong: u64,
    errors: HashMap<String, u64>,
}

impl Tally {
    fn violations(&self) -> u64 {
        self.wrong + self.errors.values().sum::<u64>()
    }

    fn absorb(&mut self, o: Tally) {
        self.runs += o.runs;
        self.max_steps = self.max_steps.max(o.max_steps);
        self.max_queries = self.max_queries.max(o.max_queries);
        self.wrong += o.wrong;
        for (k, v) in o.errors {
            *self.errors.entry(k).or_default() += v;
        }
    }
}

fn kind(e: &SolveError) -> String {
    format!("{e:?}").split(['(', ' ', '{']).next().unwrap().to_string()
}

fn run(spec: &GameSpec, codes: &[Vec<u32>]) -> Tally {
    let mut t = Tally::default();
    for code in codes {
        t.runs += 1;
        let r = spec
            .solver()
            .and_then(|s| run_logged(s, |q: &AnyQuery| answer(spec, code, q), 1 << 26, |_, _, _, _| {}));
        match r {
            Ok((got, stats)) => {
                t.max_steps = t.max_steps.max(stats.steps);
                t.max_queries = t.max_queries.max(stats.queries);
                if &got != code {
                    t.wrong += 1;
                }
            }
            Err(e) => *t.errors.entry(kind(&e)).or_default() += 1,
        }
    }
    t
}

fn random_codes(spec: &GameSpec, trials: usize, seed: u64) -> Vec<Vec<u32>> {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = spec.n;
    (0..trials)
        .map(|_| match spec.game {
            GameKind::Coins => (0..n).map(|_| rng.gen_range(0..2)).collect(),
            GameKind::MastermindBp | GameKind::MastermindWp => (0..n).map(|_| rng.gen_range(1..=spec.k as u32)).collect(),
            GameKind::Setquery => {
                let mut v: Vec<u32> = rand::seq::index::sample(&mut rng, spec.k, n).into_iter().map(|i| i as u32 + 1).collect();
                v.sort_unstable();
                v
            }
            g => panic!("no generator for {g}"),
        })
        .collect()
}

struct Outcome {
    pass: bool,
    detail: String,
}

/// Every run of criteria 1 to 5 lands here.
#[derive(Default)]
struct Ledger {
    all: Tally,
    exhaustive: Vec<(GameSpec, Tally, usize)>,
}

// ---------------------------------------------------------------- criteria

fn k_closed(n: usize) -> usize {
    n * (1 + n.ilog2() as usize)
}

fn criterion1(ledger: &mut Ledger) -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for e in 0..=6 {
        let n = 1usize << e;
        let coins = k_closed(n);
        let spec = GameSpec::new(GameKind::Coins, coins);
        let limit = 16 * n as u64 - 15;
        let mut t = run(&spec, &random_codes(&spec, 1000, 100 + e as u64));
        if n <= 4 {
            let codes = enumerate(&spec);
            let ex = run(&spec, &codes);
            ledger.exhaustive.push((spec.clone(), ex_clone(&ex), codes.len()));
            t.absorb(ex);
        }
        let ok = t.violations() == 0 && t.max_steps <= limit;
        pass &= ok;
        notes.push(format!("n={n}:{}/{limit}", t.max_steps));
        ledger.all.absorb(t);
    }
    Outcome { pass, detail: format!("C_(k_n) max steps vs 16n-15: {}", notes.join(" ")) }
}

fn ex_clone(t: &Tally) -> Tally {
    Tally {
        runs: t.runs,
        max_steps: t.max_steps,
        max_queries: t.max_queries,
        wrong: t.wrong,
        errors: t.errors.clone(),
    }
}

fn criterion2(ledger: &mut Ledger) -> Outcome {
    let mut specs = Vec::new();
    for n in 1..=12 {
        specs.push(GameSpec::new(GameKind::Coins, n));
    }
    for n in 1..=10 {
        for d in 0..=n {
            specs.push(GameSpec::new(GameKind::CoinsSparse, n).with_d(d));
        }
    }
    for n in 1..=8 {
        for w in 1..=8 {
            specs.push(GameSpec::new(GameKind::CoinsWeighted, n).with_w(w));
        }
    }
    for n in 1..=6 {
        for blanks in [false, true] {
            specs.push(GameSpec::new(GameKind::MastermindPerm, n).with_blanks(blanks));
        }
    }
    // one position costs about k/2 queries per codeword, so the full n = 1
    // sweep to k = 4096 is opt-in
    let full = std::env::var("ACCEPTANCE_FULL").is_ok_and(|v| v == "1");
    let mut skipped = 0usize;
    for k in 1usize..=4096 {
        for n in 1..=12u32 {
            if k.pow(n) > 4096 {
                break;
            }
            if n == 1 && k > 64 && !k.is_power_of_two() && !full {
                skipped += 1;
                continue;
            }
            for blanks in [false, true] {
                specs.push(GameSpec::new(GameKind::MastermindBp, n as usize).with_k(k).with_blanks(blanks));
            }
        }
    }
    specs.push(GameSpec::new(GameKind::MastermindWp, 3).with_k(9));
    for n in 1..=4 {
        for k in n..=12 {
            specs.push(GameSpec::new(GameKind::Setquery, n).with_k(k));
        }
    }
    let mut total = Tally::default();
    let mut codewords = 0;
    let mut bad = Vec::new();
    for spec in &specs {
        let codes = enumerate(spec);
        codewords += codes.len();
        let t = run(spec, &codes);
        if t.violations() > 0 {
            bad.push(spec.describe());
        }
        ledger.exhaustive.push((spec.clone(), ex_clone(&t), codes.len()));
        total.absorb(t);
    }
    let v = total.violations();
    ledger.all.absorb(total);
    let mut detail = format!("{} instances, {codewords} codewords, {v} violations", specs.len());
    if skipped > 0 {
        detail += &format!("; black-peg n=1 sampled at k <= 64 and powers of two ({skipped} k values left to ACCEPTANCE_FULL=1)");
    }
    if !bad.is_empty() {
        detail += &format!(" in {}", bad.join("; "));
    }
    Outcome { pass: v == 0, detail }
}

fn weigh(id: u32, bound: u64) -> BoxStrategy<Subset, u64> {
    Plan::ask(Ask::bounded(Subset::single(id), bound), |v| Ok(Plan::Done(v))).into_strategy()
}

fn sums(vals: &[u64]) -> impl FnMut(&Subset) -> u64 + '_ {
    move |q| q.0.iter().map(|&i| vals[i as usize - 1]).sum()
}

/// Brute force: every 4-tuple within `bounds` consistent with the three
/// round answers `(b+c+d, a+c+d, a+b+d)`.
fn brute(m: [u64; 3], bounds: &[u64]) -> Vec<[u64; 4]> {
    let mut out = Vec::new();
    for a in 0..=bounds[0] {
        for b in 0..=bounds[1] {
            for c in 0..=bounds[2] {
                for d in 0..=bounds[3] {
                    let v = [a, b, c, d];
                    if [b + c + d, a + c + d, a + b + d] != m {
                        continue;
                    }
                    out.push(v);
                }
            }
        }
    }
    out
}

const T: u64 = 64;
const INNER: u64 = 3 * (T + 2);

fn predictable(id: u32, bound: u64, s: Schedule) -> BoxStrategy<Subset, u64> {
    let idle = || padded(done(0u64), T);
    let d = padded(pad_to_r(weigh(id, bound), s.clone()), T);
    map_output(four_to_three([idle(), idle(), idle()], d, T, Layout::Scheduled(s)), |(_, v)| Ok(v))
}

fn criterion3(ledger: &mut Ledger) -> Outcome {
    let mut bad = 0u64;
    for mask in 0..16u64 {
        let vals: Vec<u64> = (0..4).map(|i| mask >> i & 1).collect();
        let subs = [weigh(1, 1), weigh(2, 1), weigh(3, 1)];
        let s = four_to_three(subs, weigh(4, 1), 1, Layout::Simple);
        let mut rows = Vec::new();
        let r = run_logged(s, sums(&vals), 10, |_, _, a, _| rows.push(a));
        let expect = brute([rows[0], rows[1], rows[2]], &[1, 1, 1, 1]);
        match r {
            Ok(((abc, d), _)) if expect == vec![[abc[0], abc[1], abc[2], d]] && abc.to_vec() == vals[..3] => {}
            _ => bad += 1,
        }
    }
    let mut rng = StdRng::seed_from_u64(3);
    let mut errs = Tally::default();
    let trials = 10_000;
    for _ in 0..trials {
        let vals: Vec<u64> = (0..4).map(|_| rng.gen_range(0..=15)).collect();
        let bounds: Vec<u64> = vals.iter().map(|&v| rng.gen_range(v..=15)).collect();
        let sched = Schedule::root().shift(rng.gen_range(0..100_000));
        let [sa, sb, sc] = sched.interlace();
        let subs = [
            padded(predictable(1, bounds[0], sa), INNER),
            padded(predictable(2, bounds[1], sb), INNER),
            padded(predictable(3, bounds[2], sc), INNER),
        ];
        let d = padded(pad_to_r(weigh(4, bounds[3]), sched.clone()), INNER);
        let s = four_to_three(subs, d, INNER, Layout::Scheduled(sched));
        errs.runs += 1;
        match run_strategy(s, sums(&vals), 1 << 20) {
            Ok(((abc, d), tr)) => {
                if [abc[0], abc[1], abc[2], d] != [vals[0], vals[1], vals[2], vals[3]] || tr.len() as u64 != 3 * (INNER + 2) {
                    bad += 1;
                }
            }
            Err(e) => *errs.errors.entry(kind(&e)).or_default() += 1,
        }
    }
    let v = errs.violations();
    ledger.all.absorb(errs);
    Outcome {
        pass: bad == 0 && v == 0,
        detail: format!("16 simple tuples and {trials} scheduled bounded tuples, {} mismatches", bad + v),
    }
}

/// Asks coins in order; each bound grows with the previous answer.
fn adaptive(bounds: Arc<Vec<u64>>, i: usize, extra: u64, mut acc: Vec<u64>) -> Plan<Subset, Vec<u64>> {
    if i == bounds.len() {
        return Plan::Done(acc);
    }
    Plan::ask(Ask::bounded(Subset::single(i as u32 + 1), bounds[i] + extra), move |v| {
        acc.push(v);
        Ok(adaptive(bounds, i + 1, v % 3, acc))
    })
}

fn criterion4(ledger: &mut Ledger) -> Outcome {
    const H: u64 = 1_000_000;
    let mut q = QSchedule::new();
    for t in 1..=H {
        q.q_at(t);
    }
    let disjoint = q.disjoint();
    let uncovered = (1..=H).filter(|&t| q.cover_count(t) != 1).count();
    let root = Schedule::root();
    let dump = root.dump(H);
    let mut shape_bad = 0u64;
    let mut lines = 0u64;
    for (i, line) in dump.lines().enumerate() {
        lines += 1;
        let f: Vec<u64> = line.split(',').map(|x| if x == "inf" { u64::MAX } else { x.parse().unwrap() }).collect();
        let [t, x, y, r] = f[..] else { panic!("{line}") };
        if t != i as u64 + 1 || !x.is_power_of_two() || y >= x || (r > 0) != (y == 0) {
            shape_bad += 1;
        }
    }

    let mut rng = StdRng::seed_from_u64(4);
    let mut over = 0u64;
    let mut errs = Tally::default();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let len = rng.gen_range(1..=40);
        let bounds: Vec<u64> = (0..len).map(|_| rng.gen_range(0..=1000)).collect();
        let vals: Vec<u64> = bounds.iter().map(|&b| rng.gen_range(0..=b)).collect();
        let shift = rng.gen_range(0..1_000_000);
        let inner = adaptive(Arc::new(bounds), 0, 0, Vec::new()).into_strategy();
        let mut weight = 0.0;
        let s = pad_to_r(inner, root.shift(shift));
        errs.runs += 1;
        let r = run_logged(s, sums(&vals), 1 << 24, |_, q: Subset, _, b| {
            if !q.is_zero() {
                weight += weight_of(b.unwrap());
            }
        });
        match r {
            Ok((out, st)) => {
                worst = worst.max(st.steps as f64 / weight);
                if out != vals || st.steps as f64 > 4.0 * weight {
                    over += 1;
                }
            }
            Err(e) => *errs.errors.entry(kind(&e)).or_default() += 1,
        }
    }
    let v = errs.violations();
    ledger.all.absorb(errs);
    let pass = disjoint && uncovered == 0 && shape_bad == 0 && lines == H && over == 0 && v == 0;
    Outcome {
        pass,
        detail: format!(
            "horizon {H}: disjoint={disjoint} uncovered={uncovered} bad dump rows={shape_bad}; pad_to_r over 4W in {over}/1000, worst steps/W {worst:.2}"
        ),
    }
}

fn criterion5(ledger: &mut Ledger) -> Outcome {
    let mut ratios = Vec::new();
    let mut parts = Vec::new();
    let mut pass = true;
    for (i, n) in [64usize, 128, 256, 512].into_iter().enumerate() {
        let spec = GameSpec::new(GameKind::MastermindBp, n).with_k(n);
        let t = run(&spec, &random_codes(&spec, 200, 500 + i as u64));
        let r = t.max_steps as f64 / n as f64;
        pass &= t.violations() == 0 && r <= 140.0;
        parts.push(format!("n={n}:{r:.2}"));
        ratios.push(r);
        ledger.all.absorb(t);
    }
    let (r128, r256, r512) = (ratios[1], ratios[2], ratios[3]);
    let monotone = r256 <= 1.05 * r128 && r512 <= 1.05 * r256 && r512 <= 1.05 * r128;
    pass &= monotone;

    let wp = GameSpec::new(GameKind::MastermindWp, 32).with_k(1024);
    let t = run(&wp, &random_codes(&wp, 50, 600));
    let c = t.max_steps as f64 / (32.0 + 1024.0 / 32.0);
    pass &= t.violations() == 0 && c <= 200.0;
    ledger.all.absorb(t);

    let (k, n) = (1_000_000usize, 100usize);
    let sq = GameSpec::new(GameKind::Setquery, n).with_k(k);
    let start = Instant::now();
    let t = run(&sq, &random_codes(&sq, 3, 700));
    let secs = start.elapsed().as_secs_f64() / 3.0;
    let cap = 200 * (k / n + n) as u64;
    pass &= t.violations() == 0 && t.max_steps <= cap && secs < 30.0;
    let sq_steps = t.max_steps;
    ledger.all.absorb(t);

    Outcome {
        pass,
        detail: format!(
            "black-peg max steps/n {} (limit 140, non-increasing within 5%: {monotone}); white-peg C = {c:.1}; set query {sq_steps} steps <= {cap} in {secs:.2} s",
            parts.join(" ")
        ),
    }
}

fn criterion6(ledger: &Ledger) -> Outcome {
    let mut below = Vec::new();
    for (spec, t, count) in &ledger.exhaustive {
        let lb = if *count <= 1 { 0.0 } else { (*count as f64).log2() / answers(spec).log2() };
        if (t.max_queries as f64) < (lb - 1e-9).ceil() {
            below.push(format!("{}: {} < {lb:.2}", spec.describe(), t.max_queries));
        }
    }
    Outcome {
        pass: below.is_empty(),
        detail: format!("{} exhaustive instances, {} below the bound {}", ledger.exhaustive.len(), below.len(), below.join("; ")),
    }
}

fn expect_err(what: &str, r: Result<(), SolveError>, want: fn(&SolveError) -> bool) -> Option<String> {
    match r {
        Err(e) if want(&e) => None,
        Err(e) => Some(format!("{what}: wrong error {e}")),
        Ok(()) => Some(format!("{what}: not detected")),
    }
}

fn criterion7(ledger: &Ledger) -> Outcome {
    // each check must fire on a planted fault
    let mut dead = Vec::new();
    let vals = [1u64, 0, 1, 3];
    dead.extend(expect_err(
        "simplicity",
        run_strategy(four_to_three([weigh(1, 1), weigh(2, 1), weigh(3, 1)], weigh(4, 3), 1, Layout::Simple), sums(&vals), 10)
            .map(|_| ()),
        |e| matches!(e, SolveError::SimplicityViolation { .. }),
    ));
    dead.extend(expect_err(
        "bound",
        run_strategy(weigh(1, 1), |_: &Subset| 2, 10).map(|_| ()),
        |e| matches!(e, SolveError::BoundViolation { .. }),
    ));
    let sched = Schedule::root();
    let subs = [padded(done(0u64), 4), padded(done(0), 4), padded(done(0), 4)];
    dead.extend(expect_err(
        "schedule",
        run_strategy(four_to_three(subs, padded(weigh(4, 1000), 4), 4, Layout::Scheduled(sched)), sums(&vals), 100)
            .map(|_| ()),
        |e| matches!(e, SolveError::ScheduleViolation(_)),
    ));
    let mut lie = Ask::bounded(Subset::single(1), 3);
    lie.residue = Some(Residue::new(1, 0));
    dead.extend(expect_err(
        "predictor",
        run_strategy(Plan::ask(lie, |v| Ok(Plan::Done(v))).into_strategy(), sums(&vals), 10).map(|_| ()),
        |e| matches!(e, SolveError::PredictabilityViolation { .. }),
    ));
    let inst = HintedInst { start: 0, len: 4, counts: vec![(1, 2), (2, 2)] };
    let split = HintedFamily.split(inst).unwrap();
    dead.extend(expect_err(
        "hint conservation",
        run_strategy(split, |q: &Pattern| q.len() as u64, 100).map(|_| ()),
        |e| matches!(e, SolveError::InconsistentOracle(_) | SolveError::BoundViolation { .. }),
    ));
    let capped = size_capped(querygames::coins::solve_coins(64).unwrap(), 1);
    dead.extend(expect_err(
        "query-size cap",
        run_strategy(capped, |q: &Subset| q.len() as u64, 10_000).map(|_| ()),
        |e| matches!(e, SolveError::QuerySizeCap { .. }),
    ));
    let v = ledger.all.violations();
    let mut kinds: Vec<String> = ledger.all.errors.iter().map(|(k, n)| format!("{k}x{n}")).collect();
    kinds.sort();
    Outcome {
        pass: dead.is_empty() && v == 0,
        detail: format!(
            "{} checked runs, {v} violations {}; planted faults caught: {}",
            ledger.all.runs,
            kinds.join(" "),
            if dead.is_empty() { "all 6".to_string() } else { dead.join("; ") }
        ),
    }
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut ledger = Ledger::default();
    let mut failed = 0;
    let mut ran = 0;
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut report = |i: usize, name: &str, f: &mut dyn FnMut(&mut Ledger) -> Outcome, ledger: &mut Ledger| {
        if only.is_some_and(|o| o != i) {
            return;
        }
        ran += 1;
        let start = Instant::now();
        let o = f(ledger);
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("criterion {i} {verdict} {name} ({:.1} s): {}", start.elapsed().as_secs_f64(), o.detail);
    };
    report(1, "coin-weighing ceiling", &mut criterion1, &mut ledger);
    report(2, "exhaustive decoding", &mut criterion2, &mut ledger);
    report(3, "four-into-three", &mut criterion3, &mut ledger);
    report(4, "schedule properties", &mut criterion4, &mut ledger);
    report(5, "scaling", &mut criterion5, &mut ledger);
    report(6, "lower-bound sanity", &mut |l| criterion6(l), &mut ledger);
    report(7, "runtime assertions", &mut |l| criterion7(l), &mut ledger);
    if failed == 0 {
        println!("acceptance: all {ran} criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria fail");
        ExitCode::FAILURE
    }
}
