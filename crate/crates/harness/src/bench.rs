//! Random-codeword benchmarks written as CSV.

use std::io::Write;
use std::time::Instant;

use querygames::games::{GameKind, GameSpec};
use querygames::verify::run_once;
use querygames::SolveError;
use rand::SeedableRng;
use serde::Serialize;
use thiserror::Error;

pub const HEADER: [&str; 8] = ["game", "n", "k", "seed", "queries", "ceiling", "weight", "elapsed_ms"];

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("{spec}: seed {seed} decoded {got:?} instead of {want:?}")]
    Wrong { spec: String, seed: u64, got: Vec<u32>, want: Vec<u32> },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One CSV row. `k` carries d for sparse coins and W for weighted coins.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub game: String,
    pub n: usize,
    pub k: u64,
    pub seed: u64,
    /// Strategy length, zero queries included.
    pub queries: u64,
    pub ceiling: Option<u64>,
    pub weight: f64,
    pub elapsed_ms: f64,
}

fn k_column(spec: &GameSpec) -> u64 {
    match spec.game {
        GameKind::CoinsSparse => spec.d as u64,
        GameKind::CoinsWeighted => spec.w,
        _ => spec.k as u64,
    }
}

/// Runs one trial per seed `seed..seed+trials`.
pub fn bench_spec(spec: &GameSpec, trials: u64, seed: u64) -> Result<Vec<Row>, BenchError> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(trials as usize);
    for s in seed..seed + trials {
        let mut rng = rand::rngs::StdRng::seed_from_u64(s);
        let code = spec.random_codeword(&mut rng);
        let start = Instant::now();
        let (got, rec) = run_once(spec, spec.solver()?, &code)?;
        let elapsed = start.elapsed().as_secs_f64() * 1e3;
        if got != code {
            return Err(BenchError::Wrong { spec: spec.describe(), seed: s, got, want: code });
        }
        rows.push(Row {
            game: spec.game.name().to_string(),
            n: spec.n,
            k: k_column(spec),
            seed: s,
            queries: rec.steps,
            ceiling: spec.ceiling(),
            weight: (rec.weight * 1e3).round() / 1e3,
            elapsed_ms: (elapsed * 1e3).round() / 1e3,
        });
    }
    Ok(rows)
}

/// Writes the header and then every row.
pub fn write_csv(rows: &[Row], out: impl Write) -> Result<(), BenchError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Rows as a JSON array, each with an added `queries_per_n` ratio.
pub fn write_json(rows: &[Row], out: impl Write) -> Result<(), BenchError> {
    let v: Vec<serde_json::Value> = rows
        .iter()
        .map(|r| {
            let mut v = serde_json::to_value(r).expect("rows serialize");
            v["queries_per_n"] = serde_json::json!(r.queries as f64 / r.n as f64);
            v
        })
        .collect();
    serde_json::to_writer_pretty(out, &v).map_err(std::io::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_only_when_empty() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "game,n,k,seed,queries,ceiling,weight,elapsed_ms\n");
    }

    #[test]
    fn rows_follow_seeds() {
        let spec = GameSpec::new(GameKind::CoinsSparse, 20).with_d(3);
        let rows = bench_spec(&spec, 3, 10).unwrap();
        assert_eq!(rows.iter().map(|r| r.seed).collect::<Vec<_>>(), vec![10, 11, 12]);
        assert!(rows.iter().all(|r| r.k == 3 && r.ceiling.is_none()));
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let second = text.lines().nth(1).unwrap();
        assert!(second.starts_with("coins-sparse,20,3,10,"), "{second}");
        assert_eq!(second.split(',').count(), 8);
        assert_eq!(second.split(',').nth(5), Some(""));
    }

    #[test]
    fn json_has_ratio() {
        let rows = bench_spec(&GameSpec::new(GameKind::MastermindBp, 8).with_k(8), 1, 0).unwrap();
        let mut buf = Vec::new();
        write_json(&rows, &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v[0]["queries_per_n"].as_f64().unwrap(), rows[0].queries as f64 / 8.0);
    }

    #[test]
    fn coins_rows_carry_the_ceiling() {
        let rows = bench_spec(&GameSpec::new(GameKind::Coins, 16), 2, 0).unwrap();
        assert!(rows.iter().all(|r| r.ceiling.is_some_and(|c| r.queries <= c)));
    }
}
