//! Every game behind one query type and one codeword type, for drivers that
//! pick the game at runtime.
//!
//! Codewords are `Vec<u32>`: coin values per coin, colors per position, or
//! the sorted member ids of a set query.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coins::{coins_ceiling, solve_coins, solve_sparse, solve_weighted};
use crate::engine::solve_ceiling;
use crate::error::{Result, SolveError};
use crate::game::{Pattern, Subset, SumQuery};
use crate::mastermind::{bp_sparse, peg_answer, solve_bp, solve_perm, solve_wp, PegQuery};
use crate::setquery::solve_setquery;
use crate::strategy::{map_output, translate, AnswerMap, BoxStrategy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GameKind {
    Coins,
    CoinsSparse,
    CoinsWeighted,
    MastermindPerm,
    MastermindBp,
    MastermindWp,
    Setquery,
}

impl GameKind {
    pub const ALL: [GameKind; 7] = [
        GameKind::Coins,
        GameKind::CoinsSparse,
        GameKind::CoinsWeighted,
        GameKind::MastermindPerm,
        GameKind::MastermindBp,
        GameKind::MastermindWp,
        GameKind::Setquery,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GameKind::Coins => "coins",
            GameKind::CoinsSparse => "coins-sparse",
            GameKind::CoinsWeighted => "coins-weighted",
            GameKind::MastermindPerm => "mastermind-perm",
            GameKind::MastermindBp => "mastermind-bp",
            GameKind::MastermindWp => "mastermind-wp",
            GameKind::Setquery => "setquery",
        }
    }

    pub fn is_mastermind(self) -> bool {
        matches!(self, GameKind::MastermindPerm | GameKind::MastermindBp | GameKind::MastermindWp)
    }
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GameKind {
    type Err = SolveError;

    fn from_str(s: &str) -> Result<Self> {
        GameKind::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| SolveError::InvalidParameters(format!("unknown game {s:?}")))
    }
}

/// A game and its parameters. Unused parameters are ignored.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameSpec {
    pub game: GameKind,
    /// Coins, positions, or set-query capacity.
    pub n: usize,
    /// Colors, or set-query universe size.
    #[serde(default)]
    pub k: usize,
    /// Counterfeit count for `coins-sparse`.
    #[serde(default)]
    pub d: usize,
    /// Total weight for `coins-weighted`.
    #[serde(default, rename = "W")]
    pub w: u64,
    /// Allow blank pegs in Mastermind guesses.
    #[serde(default)]
    pub blanks: bool,
}

/// A query of any game.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnyQuery {
    Zero,
    Set(Subset),
    Colors(Pattern),
    Pegs(PegQuery),
}

impl SumQuery for AnyQuery {
    fn zero() -> Self {
        AnyQuery::Zero
    }

    fn is_zero(&self) -> bool {
        match self {
            AnyQuery::Zero => true,
            AnyQuery::Set(s) => s.is_zero(),
            AnyQuery::Colors(p) => p.is_zero(),
            AnyQuery::Pegs(p) => p.is_zero(),
        }
    }

    fn absorb(&mut self, other: &Self) {
        match (&mut *self, other) {
            (_, AnyQuery::Zero) => {}
            (AnyQuery::Zero, o) => *self = o.clone(),
            (AnyQuery::Set(a), AnyQuery::Set(b)) => a.absorb(b),
            (AnyQuery::Colors(a), AnyQuery::Colors(b)) => a.absorb(b),
            (AnyQuery::Pegs(a), AnyQuery::Pegs(b)) => a.absorb(b),
            _ => panic!("merging queries of different games"),
        }
    }

    fn support(&self) -> Vec<u32> {
        match self {
            AnyQuery::Zero => Vec::new(),
            AnyQuery::Set(s) => s.support(),
            AnyQuery::Colors(p) => p.support(),
            AnyQuery::Pegs(p) => p.support(),
        }
    }
}

fn erase<Q: SumQuery, O: Send + 'static>(
    s: BoxStrategy<Q, O>,
    wrap: fn(Q) -> AnyQuery,
) -> BoxStrategy<AnyQuery, O> {
    translate(s, move |q| Ok((wrap(q), AnswerMap::IDENTITY)))
}

fn as_u32(v: Vec<u64>) -> Result<Vec<u32>> {
    Ok(v.into_iter().map(|x| x as u32).collect())
}

fn binom(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.checked_mul(n - i)? / (i + 1);
    }
    Some(r)
}

fn log2_binom(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).log2()).sum()
}

impl GameSpec {
    pub fn new(game: GameKind, n: usize) -> Self {
        GameSpec { game, n, k: 0, d: 0, w: 0, blanks: false }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_d(mut self, d: usize) -> Self {
        self.d = d;
        self
    }

    pub fn with_w(mut self, w: u64) -> Self {
        self.w = w;
        self
    }

    pub fn with_blanks(mut self, blanks: bool) -> Self {
        self.blanks = blanks;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SolveError::InvalidParameters(m));
        let n = self.n;
        if n == 0 {
            return bad(format!("{} needs n >= 1", self.game));
        }
        match self.game {
            GameKind::CoinsSparse if self.d > n => bad(format!("d = {} exceeds n = {n}", self.d)),
            GameKind::CoinsWeighted if self.w == 0 => bad("coins-weighted needs W >= 1".into()),
            GameKind::MastermindBp | GameKind::MastermindWp if self.k == 0 => {
                bad(format!("{} needs k >= 1", self.game))
            }
            GameKind::Setquery if self.k < n => bad(format!("setquery needs k >= n, got k = {} n = {n}", self.k)),
            _ => Ok(()),
        }
    }

    /// A fresh solver for this game.
    pub fn solver(&self) -> Result<BoxStrategy<AnyQuery, Vec<u32>>> {
        self.validate()?;
        let (n, k) = (self.n, self.k);
        Ok(match self.game {
            GameKind::Coins => erase(map_output(solve_coins(n)?, as_u32), AnyQuery::Set),
            GameKind::CoinsSparse => erase(map_output(solve_sparse(n, self.d)?, as_u32), AnyQuery::Set),
            GameKind::CoinsWeighted => erase(map_output(solve_weighted(n, self.w)?, as_u32), AnyQuery::Set),
            GameKind::MastermindPerm => erase(solve_perm(n, self.blanks)?, AnyQuery::Colors),
            GameKind::MastermindBp => erase(solve_bp(n, k, self.blanks)?, AnyQuery::Colors),
            GameKind::MastermindWp => erase(solve_wp(n, k)?, AnyQuery::Pegs),
            GameKind::Setquery => erase(solve_setquery(k, n)?, AnyQuery::Set),
        })
    }

    /// The answer `code` gives to `q`.
    pub fn answer(&self, code: &[u32], q: &AnyQuery) -> u64 {
        match q {
            AnyQuery::Zero => 0,
            AnyQuery::Set(s) if self.game == GameKind::Setquery => {
                s.ids().iter().filter(|e| code.binary_search(e).is_ok()).count() as u64
            }
            AnyQuery::Set(s) => s.ids().iter().map(|&i| code[i as usize - 1] as u64).sum(),
            AnyQuery::Colors(p) => bp_sparse(code, p),
            AnyQuery::Pegs(p) => peg_answer(code, p),
        }
    }

    /// Number of codewords, if it fits in a `u128`.
    pub fn codeword_count(&self) -> Option<u128> {
        let (n, k) = (self.n as u128, self.k as u128);
        match self.game {
            GameKind::Coins => 1u128.checked_shl(self.n as u32),
            GameKind::CoinsSparse => binom(n, self.d as u128),
            GameKind::CoinsWeighted => binom(self.w as u128 + n - 1, n - 1),
            GameKind::MastermindPerm => (1..=n).try_fold(1u128, |a, i| a.checked_mul(i)),
            GameKind::MastermindBp | GameKind::MastermindWp => k.checked_pow(self.n as u32),
            GameKind::Setquery => (0..=n).try_fold(0u128, |a, i| a.checked_add(binom(k, i)?)),
        }
    }

    pub fn log2_codewords(&self) -> f64 {
        let (n, k) = (self.n as u64, self.k as u64);
        match self.game {
            GameKind::Coins => n as f64,
            GameKind::CoinsSparse => log2_binom(n, self.d as u64),
            GameKind::CoinsWeighted => log2_binom(self.w + n - 1, n - 1),
            GameKind::MastermindPerm => (1..=n).map(|i| (i as f64).log2()).sum(),
            GameKind::MastermindBp | GameKind::MastermindWp => n as f64 * (k as f64).log2(),
            GameKind::Setquery => {
                let terms: Vec<f64> = (0..=n).map(|i| log2_binom(k, i)).collect();
                let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                top + terms.iter().map(|t| (t - top).exp2()).sum::<f64>().log2()
            }
        }
    }

    /// Number of distinct answers a single query can get.
    pub fn answer_range(&self) -> f64 {
        let n = self.n as f64;
        match self.game {
            GameKind::CoinsSparse => self.d.min(self.n) as f64 + 1.0,
            GameKind::CoinsWeighted => self.w as f64 + 1.0,
            GameKind::MastermindWp => (n + 1.0) * (n + 2.0) / 2.0,
            _ => n + 1.0,
        }
    }

    /// `log2 |F| / log2(range)`.
    pub fn lower_bound(&self) -> f64 {
        crate::game::info_lower_bound_log2(self.log2_codewords(), self.answer_range())
    }

    /// Proven step ceiling, where one is known in closed form.
    pub fn ceiling(&self) -> Option<u64> {
        match self.game {
            GameKind::Coins => Some(coins_ceiling(self.n)),
            GameKind::MastermindPerm if self.blanks || self.n == 1 => Some(solve_ceiling(1, self.n)),
            _ => None,
        }
    }

    /// Step cap guarding against runaway strategies.
    pub fn step_cap(&self) -> u64 {
        match self.ceiling() {
            Some(c) => crate::game::step_cap(c),
            None => {
                let size = (self.n + self.k + self.d + self.w as usize + 16) as u64;
                crate::game::step_cap(1024 * size)
            }
        }
    }

    /// All codewords, in a fixed order.
    pub fn codewords(&self) -> Vec<Vec<u32>> {
        let n = self.n;
        match self.game {
            GameKind::Coins => (0u64..1 << n).map(|m| (0..n).map(|i| (m >> i & 1) as u32).collect()).collect(),
            GameKind::CoinsSparse => combinations(n, self.d)
                .into_iter()
                .map(|c| {
                    let mut v = vec![0; n];
                    for i in c {
                        v[i] = 1;
                    }
                    v
                })
                .collect(),
            GameKind::CoinsWeighted => compositions(self.w as u32, n),
            GameKind::MastermindPerm => permutations(n),
            GameKind::MastermindBp | GameKind::MastermindWp => {
                let k = self.k as u64;
                let total = k.pow(n as u32);
                (0..total)
                    .map(|mut i| {
                        (0..n)
                            .map(|_| {
                                let c = (i % k) as u32 + 1;
                                i /= k;
                                c
                            })
                            .collect()
                    })
                    .collect()
            }
            GameKind::Setquery => (0..=n)
                .flat_map(|s| combinations(self.k, s))
                .map(|c| c.into_iter().map(|i| i as u32 + 1).collect())
                .collect(),
        }
    }

    /// A uniformly random codeword (set queries draw exactly `n` members).
    pub fn random_codeword(&self, rng: &mut impl Rng) -> Vec<u32> {
        let n = self.n;
        match self.game {
            GameKind::Coins => (0..n).map(|_| rng.gen_range(0..=1)).collect(),
            GameKind::CoinsSparse => {
                let mut v = vec![0; n];
                for i in rand::seq::index::sample(rng, n, self.d) {
                    v[i] = 1;
                }
                v
            }
            GameKind::CoinsWeighted => {
                // stars and bars
                let slots = self.w as usize + n - 1;
                let mut bars: Vec<usize> = rand::seq::index::sample(rng, slots, n - 1).into_vec();
                bars.sort_unstable();
                let mut v = Vec::with_capacity(n);
                let mut prev = 0;
                for b in bars {
                    v.push((b - prev) as u32);
                    prev = b + 1;
                }
                v.push((slots - prev) as u32);
                v
            }
            GameKind::MastermindPerm => {
                let mut v: Vec<u32> = (1..=n as u32).collect();
                v.shuffle(rng);
                v
            }
            GameKind::MastermindBp | GameKind::MastermindWp => {
                (0..n).map(|_| rng.gen_range(1..=self.k as u32)).collect()
            }
            GameKind::Setquery => {
                let mut v: Vec<u32> =
                    rand::seq::index::sample(rng, self.k, n).into_iter().map(|i| i as u32 + 1).collect();
                v.sort_unstable();
                v
            }
        }
    }

    pub fn describe(&self) -> String {
        let mut s = format!("{} n={}", self.game, self.n);
        match self.game {
            GameKind::CoinsSparse => s += &format!(" d={}", self.d),
            GameKind::CoinsWeighted => s += &format!(" W={}", self.w),
            GameKind::MastermindBp | GameKind::MastermindWp | GameKind::Setquery => s += &format!(" k={}", self.k),
            _ => {}
        }
        if self.blanks && self.game.is_mastermind() {
            s += " blanks";
        }
        s
    }
}

fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < r - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, r, &mut Vec::new(), &mut out);
    out
}

fn compositions(w: u32, n: usize) -> Vec<Vec<u32>> {
    if n == 1 {
        return vec![vec![w]];
    }
    (0..=w)
        .flat_map(|first| {
            compositions(w - first, n - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n as u32);
            out.push(q);
        }
    }
    out
}
