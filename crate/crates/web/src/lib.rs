//! WebAssembly bindings for the browser demo in `www/`.
//!
//! The exported functions are thin wrappers over plain Rust ones so the
//! logic can be tested natively.

use querygames::games::GameSpec;
use querygames::schedule::Schedule;
use querygames::verify::run_once;
use querygames_harness::session::{parse_answer, Message, Session};
use rand::SeedableRng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn spec_of(json: &str) -> Result<GameSpec, String> {
    serde_json::from_str(json).map_err(|e| format!("bad game: {e}"))
}

fn to_json(m: &impl Serialize) -> String {
    serde_json::to_string(m).expect("serializable")
}

/// The solver guesses; the page answers for the human.
#[wasm_bindgen]
pub struct Codemaker {
    session: Session,
}

impl Codemaker {
    pub fn create(spec_json: &str) -> Result<Codemaker, String> {
        let session = Session::new(spec_of(spec_json)?).map_err(|e| e.to_string())?;
        Ok(Codemaker { session })
    }

    /// Feeds one answer line; returns the next message, or an error message
    /// with the session unchanged.
    pub fn reply(&mut self, line: &str) -> String {
        match parse_answer(line).and_then(|a| self.session.answer(a)) {
            Ok(m) => to_json(&m),
            Err(e) => to_json(&Message::error(e)),
        }
    }
}

#[wasm_bindgen]
impl Codemaker {
    #[wasm_bindgen(constructor)]
    pub fn new(spec_json: &str) -> Result<Codemaker, JsValue> {
        Codemaker::create(spec_json).map_err(|e| JsValue::from_str(&e))
    }

    pub fn current(&self) -> String {
        to_json(&self.session.current())
    }

    pub fn answer(&mut self, line: &str) -> String {
        self.reply(line)
    }

    pub fn transcript(&self) -> String {
        to_json(&self.session.transcript())
    }

    pub fn checking(&self) -> bool {
        self.session.checking()
    }
}

/// `t,x,y,r` rows of the root schedule shifted by `shift`.
#[wasm_bindgen]
pub fn schedule_table(shift: u32, horizon: u32) -> String {
    Schedule::root().shift(shift as u64).dump(horizon.min(100_000) as u64)
}

#[derive(Serialize, Debug, PartialEq)]
pub struct Explored {
    pub trials: u64,
    pub max_steps: u64,
    pub max_queries: u64,
    pub mean_queries: f64,
    pub ceiling: Option<u64>,
    pub lower_bound: f64,
    pub all_decoded: bool,
}

/// Runs the solver on `trials` seeded random codewords and counts queries.
pub fn explore_spec(spec_json: &str, trials: u32, seed: u64) -> Result<Explored, String> {
    let spec = spec_of(spec_json)?;
    spec.validate().map_err(|e| e.to_string())?;
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut e = Explored {
        trials: 0,
        max_steps: 0,
        max_queries: 0,
        mean_queries: 0.0,
        ceiling: spec.ceiling(),
        lower_bound: spec.lower_bound(),
        all_decoded: true,
    };
    let mut total = 0;
    for _ in 0..trials.min(10_000) {
        let code = spec.random_codeword(&mut rng);
        let (got, rec) = run_once(&spec, spec.solver().map_err(|e| e.to_string())?, &code).map_err(|e| e.to_string())?;
        e.trials += 1;
        e.all_decoded &= got == code;
        e.max_steps = e.max_steps.max(rec.steps);
        e.max_queries = e.max_queries.max(rec.queries);
        total += rec.queries;
    }
    if e.trials > 0 {
        e.mean_queries = total as f64 / e.trials as f64;
    }
    Ok(e)
}

#[wasm_bindgen]
pub fn explore(spec_json: &str, trials: u32, seed: u64) -> Result<String, JsValue> {
    explore_spec(spec_json, trials, seed).map(|e| to_json(&e)).map_err(|e| JsValue::from_str(&e))
}
