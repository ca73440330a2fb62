use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use querygames::games::{GameKind, GameSpec};
use querygames::verify::{verify_exhaustive, verify_random, DEFAULT_BUDGET};
use querygames::SolveError;
use querygames_harness::bench::{bench_spec, write_csv, write_json, Row};
use querygames_harness::play::play;
use querygames_harness::server;
use querygames_harness::session::Session;

#[derive(Parser)]
#[command(name = "querygames", version, about = "Solvers for adaptive query games")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a solver on every codeword or on random ones.
    Verify(Game),
    /// Time random trials over a grid and write CSV.
    Bench(Game),
    /// Play as codemaker on stdin and stdout.
    Play(Game),
    /// Serve the session protocol over HTTP on loopback.
    Serve(Game),
}

#[derive(Args)]
struct Game {
    #[arg(long, default_value = "coins")]
    game: GameKind,
    /// Coins or positions; a comma list for bench.
    #[arg(long, value_delimiter = ',', default_value = "16")]
    n: Vec<usize>,
    /// Colors or universe size; a comma list for bench. Mastermind defaults to n.
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    d: usize,
    #[arg(long = "W", default_value_t = 0)]
    w: u64,
    #[arg(long)]
    blanks: bool,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    exhaustive: bool,
    /// Largest codeword space verified exhaustively.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
    /// Output file; `.json` writes JSON, anything else CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    port: Option<u16>,
}

impl Game {
    fn specs(&self) -> Vec<GameSpec> {
        let mut v = Vec::new();
        for &n in &self.n {
            let ks = match (self.k.is_empty(), self.game.is_mastermind()) {
                (true, true) => vec![n],
                (true, false) => vec![self.k_default(n)],
                (false, _) => self.k.clone(),
            };
            for k in ks {
                v.push(
                    GameSpec::new(self.game, n).with_k(k).with_d(self.d).with_w(self.w).with_blanks(self.blanks),
                );
            }
        }
        v
    }

    fn k_default(&self, n: usize) -> usize {
        if self.game == GameKind::Setquery {
            n * n
        } else {
            0
        }
    }

    fn single(&self) -> Result<GameSpec, String> {
        match self.specs().as_slice() {
            [s] => Ok(s.clone()),
            _ => Err("this command takes a single --n and --k".into()),
        }
    }
}

fn verify(g: &Game) -> ExitCode {
    let mut bad = false;
    for spec in g.specs() {
        let r = if g.exhaustive { verify_exhaustive(&spec, g.budget) } else { verify_random(&spec, g.trials, g.seed) };
        match r {
            Ok(r) => {
                println!("{r}");
                bad |= !r.ok();
            }
            Err(e @ SolveError::BudgetExceeded { .. }) => {
                eprintln!("refusing: {e}; use --trials instead of --exhaustive");
                return ExitCode::from(2);
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        }
    }
    if bad {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn bench(g: &Game) -> Result<(), Box<dyn std::error::Error>> {
    let mut rows: Vec<Row> = Vec::new();
    for spec in g.specs() {
        rows.extend(bench_spec(&spec, g.trials, g.seed)?);
    }
    let json = g.out.as_ref().is_some_and(|p| p.extension().is_some_and(|e| e == "json"));
    let out: Box<dyn Write> = match &g.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    };
    if json {
        write_json(&rows, out)?;
    } else {
        write_csv(&rows, out)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.cmd {
        Cmd::Verify(g) => Ok(verify(&g)),
        Cmd::Bench(g) => bench(&g).map(|_| ExitCode::SUCCESS),
        Cmd::Play(g) => {
            let s = Session::new(g.single()?)?;
            play(s, io::stdin().lock(), io::stdout().lock())?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Serve(g) => {
            let env = std::env::var("QUERYGAMES_PORT").ok();
            let port = server::resolve_port(g.port, env.as_deref())?;
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async {
                let l = server::bind(port).await?;
                eprintln!("listening on http://{}", l.local_addr()?);
                server::serve(l).await
            })?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
