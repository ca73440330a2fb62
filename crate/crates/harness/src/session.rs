//! One interactive game: the solver asks, a human answers.

use querygames::games::{AnyQuery, GameKind, GameSpec};
use querygames::mastermind::{peg_value, Feedback};
use querygames::{BoxStrategy, SolveError, Step, SumQuery};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Codeword spaces up to this size get full consistency checking.
pub const CHECK_LIMIT: u128 = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum SessionError {
    #[error("invalid game: {0}")]
    Spec(String),
    #[error("malformed answer: {0}")]
    Malformed(String),
    #[error("answer out of range: {0}")]
    Range(String),
    #[error("inconsistent answer: {0}")]
    Inconsistent(String),
    #[error("no query is awaiting an answer")]
    NotAwaiting,
    #[error("solver failed: {0}")]
    Solver(#[from] SolveError),
}

/// How a query is shown to the human.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QueryView {
    Colors {
        colors: Vec<u32>,
        #[serde(skip_serializing_if = "Option::is_none")]
        feedback: Option<Feedback>,
    },
    Ids {
        ids: Vec<u32>,
    },
}

impl QueryView {
    pub fn of(spec: &GameSpec, q: &AnyQuery) -> Self {
        match q {
            AnyQuery::Zero => QueryView::Ids { ids: Vec::new() },
            AnyQuery::Set(s) => QueryView::Ids { ids: s.clone().sorted().0 },
            AnyQuery::Colors(p) => QueryView::Colors { colors: p.dense(spec.n), feedback: None },
            AnyQuery::Pegs(p) => QueryView::Colors { colors: p.pattern.dense(spec.n), feedback: Some(p.feedback) },
        }
    }
}

/// A single count, or `[black, white]` pegs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnswerValue {
    Single(u64),
    Pegs([u64; 2]),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Message {
    Query {
        t: u64,
        query: QueryView,
        #[serde(skip_serializing_if = "Option::is_none")]
        bound: Option<u64>,
    },
    Answer {
        value: AnswerValue,
    },
    Decoded {
        codeword: Vec<u32>,
    },
    Error {
        message: String,
    },
}

impl Message {
    pub fn error(e: impl ToString) -> Self {
        Message::Error { message: e.to_string() }
    }
}

/// Parses an answer line: a JSON object with a `value` (and optionally
/// `"type":"answer"`), or whitespace-separated integers.
pub fn parse_answer(line: &str) -> Result<AnswerValue, SessionError> {
    #[derive(Deserialize)]
    struct Incoming {
        #[serde(rename = "type")]
        kind: Option<String>,
        value: AnswerValue,
    }
    let line = line.trim();
    if line.starts_with('{') {
        let a: Incoming = serde_json::from_str(line).map_err(|e| SessionError::Malformed(e.to_string()))?;
        match a.kind.as_deref() {
            None | Some("answer") => Ok(a.value),
            Some(k) => Err(SessionError::Malformed(format!("expected an answer, got type {k:?}"))),
        }
    } else {
        let nums: Result<Vec<u64>, _> = line.split_whitespace().map(str::parse).collect();
        match nums.map_err(|e| SessionError::Malformed(format!("{line:?}: {e}")))?.as_slice() {
            [v] => Ok(AnswerValue::Single(*v)),
            [b, w] => Ok(AnswerValue::Pegs([*b, *w])),
            _ => Err(SessionError::Malformed(format!("{line:?}: expected one count or black and white"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Exchange {
    pub t: u64,
    pub query: QueryView,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<u64>,
    pub answer: AnswerValue,
    /// The count the solver consumed.
    pub value: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Status {
    AwaitingAnswer,
    Decoded { codeword: Vec<u32> },
    Error { message: String },
}

pub struct Session {
    spec: GameSpec,
    solver: Option<BoxStrategy<AnyQuery, Vec<u32>>>,
    pending: Option<(AnyQuery, Option<u64>)>,
    t: u64,
    transcript: Vec<Exchange>,
    status: Status,
    candidates: Option<Vec<Vec<u32>>>,
}

impl Session {
    pub fn new(spec: GameSpec) -> Result<Self, SessionError> {
        spec.validate().map_err(|e| SessionError::Spec(e.to_string()))?;
        let solver = spec.solver().map_err(|e| SessionError::Spec(e.to_string()))?;
        let candidates = match spec.codeword_count() {
            Some(c) if c <= CHECK_LIMIT => Some(spec.codewords()),
            _ => None,
        };
        let mut s = Session {
            spec,
            solver: Some(solver),
            pending: None,
            t: 0,
            transcript: Vec::new(),
            status: Status::AwaitingAnswer,
            candidates,
        };
        s.advance();
        Ok(s)
    }

    pub fn spec(&self) -> &GameSpec {
        &self.spec
    }

    pub fn status(&self) -> &Status {
        &self.status
    }

    pub fn transcript(&self) -> &[Exchange] {
        &self.transcript
    }

    pub fn checking(&self) -> bool {
        self.candidates.is_some()
    }

    /// Runs the solver to its next real query, answering zero queries itself.
    fn advance(&mut self) {
        let Some(solver) = self.solver.as_mut() else { return };
        let r: Result<Option<Vec<u32>>, SolveError> = loop {
            match solver.step() {
                Err(e) => break Err(e),
                Ok(Step::Done) => break self.solver.take().unwrap().finish().map(Some),
                Ok(Step::Ask(a)) if a.query.is_zero() => {
                    if let Err(e) = solver.feed(0) {
                        break Err(e);
                    }
                }
                Ok(Step::Ask(a)) => {
                    self.t += 1;
                    self.pending = Some((a.query, a.bound));
                    break Ok(None);
                }
            }
        };
        match r {
            Ok(None) => {}
            Ok(Some(codeword)) => self.status = Status::Decoded { codeword },
            Err(e) => {
                self.solver = None;
                self.status = Status::Error { message: e.to_string() };
            }
        }
    }

    /// The message the human should see now.
    pub fn current(&self) -> Message {
        match (&self.status, &self.pending) {
            (Status::AwaitingAnswer, Some((q, b))) => {
                Message::Query { t: self.t, query: QueryView::of(&self.spec, q), bound: *b }
            }
            (Status::Decoded { codeword }, _) => Message::Decoded { codeword: codeword.clone() },
            (Status::Error { message }, _) => Message::Error { message: message.clone() },
            (Status::AwaitingAnswer, None) => Message::error("session has no pending query"),
        }
    }

    fn max_answer(&self, q: &AnyQuery) -> u64 {
        let n = self.spec.n as u64;
        match q {
            AnyQuery::Zero => 0,
            AnyQuery::Set(s) => {
                let len = s.len() as u64;
                match self.spec.game {
                    GameKind::CoinsWeighted => self.spec.w,
                    GameKind::CoinsSparse => len.min(self.spec.d as u64),
                    GameKind::Setquery => len.min(n),
                    _ => len,
                }
            }
            AnyQuery::Colors(p) => p.len() as u64,
            AnyQuery::Pegs(_) => n,
        }
    }

    /// Checks an answer to the pending query and turns it into the count
    /// the solver consumes. Nothing changes on error.
    fn interpret(&self, q: &AnyQuery, bound: Option<u64>, a: AnswerValue) -> Result<u64, SessionError> {
        let n = self.spec.n as u64;
        let max = self.max_answer(q);
        let v = match (q, a) {
            (AnyQuery::Pegs(p), AnswerValue::Pegs([b, w])) => {
                if b + w > n || b > p.pattern.len() as u64 {
                    return Err(SessionError::Range(format!("black {b} white {w} with {n} positions")));
                }
                peg_value(p, b, w)
            }
            (AnyQuery::Pegs(_), AnswerValue::Single(_)) => {
                return Err(SessionError::Malformed("white-peg answers are [black, white]".into()));
            }
            (AnyQuery::Colors(_), AnswerValue::Pegs([b, w])) => {
                if b + w > n {
                    return Err(SessionError::Range(format!("black {b} white {w} with {n} positions")));
                }
                b
            }
            (_, AnswerValue::Pegs(_)) => {
                return Err(SessionError::Malformed("this game takes a single count".into()));
            }
            (_, AnswerValue::Single(v)) => v,
        };
        if v > max {
            return Err(SessionError::Range(format!("{v} is outside 0..={max}")));
        }
        if let Some(b) = bound {
            if v > b {
                return Err(SessionError::Inconsistent(format!(
                    "{v} exceeds {b}, the most this query can return given the earlier answers"
                )));
            }
        }
        Ok(v)
    }

    /// Feeds an answer; on error the session is left as it was.
    pub fn answer(&mut self, a: AnswerValue) -> Result<Message, SessionError> {
        if self.status != Status::AwaitingAnswer {
            return Err(SessionError::NotAwaiting);
        }
        let (q, bound) = self.pending.clone().ok_or(SessionError::NotAwaiting)?;
        let v = self.interpret(&q, bound, a)?;
        if let Some(c) = &self.candidates {
            let left: Vec<Vec<u32>> = c.iter().filter(|x| self.spec.answer(x, &q) == v).cloned().collect();
            if left.is_empty() {
                return Err(SessionError::Inconsistent(
                    "no codeword agrees with this answer and the earlier ones".into(),
                ));
            }
            self.candidates = Some(left);
        }
        self.transcript.push(Exchange { t: self.t, query: QueryView::of(&self.spec, &q), bound, answer: a, value: v });
        self.pending = None;
        let fed = self.solver.as_mut().ok_or(SessionError::NotAwaiting)?.feed(v);
        if let Err(e) = fed {
            self.solver = None;
            self.status = Status::Error { message: e.to_string() };
            return Ok(self.current());
        }
        self.advance();
        Ok(self.current())
    }

    /// Whether `codeword` is the one decoded.
    pub fn confirm(&self, codeword: &[u32]) -> Message {
        match &self.status {
            Status::Decoded { codeword: c } if c == codeword => Message::Decoded { codeword: c.clone() },
            Status::Decoded { .. } => Message::error("inconsistent answers were given: the decode differs from your codeword"),
            _ => Message::error("nothing decoded yet"),
        }
    }
}

impl std::fmt::Debug for Session {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Session")
            .field("spec", &self.spec)
            .field("t", &self.t)
            .field("status", &self.status)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bp46() -> GameSpec {
        GameSpec::new(GameKind::MastermindBp, 4).with_k(6)
    }

    fn play(spec: GameSpec, code: &[u32]) -> Vec<u32> {
        let mut s = Session::new(spec.clone()).unwrap();
        loop {
            match s.current() {
                Message::Decoded { codeword } => return codeword,
                Message::Query { .. } => {
                    let (q, _) = s.pending.clone().unwrap();
                    let v = spec.answer(code, &q);
                    let a = match q {
                        AnyQuery::Pegs(_) => {
                            let dense = QueryView::of(&spec, &q);
                            let QueryView::Colors { colors, .. } = dense else { unreachable!() };
                            let b = querygames::mastermind::bp(code, &colors).unwrap();
                            let w = querygames::mastermind::wp(code, &colors).unwrap();
                            AnswerValue::Pegs([b, w])
                        }
                        _ => AnswerValue::Single(v),
                    };
                    s.answer(a).unwrap();
                }
                m => panic!("{m:?}"),
            }
        }
    }

    #[test]
    fn scripted_black_peg() {
        assert_eq!(play(bp46(), &[3, 1, 4, 1]), vec![3, 1, 4, 1]);
    }

    #[test]
    fn scripted_coins() {
        let code = [1, 0, 0, 1, 1, 0, 1, 0, 0, 0, 1, 1];
        assert_eq!(play(GameSpec::new(GameKind::Coins, 12), &code), code.to_vec());
    }

    #[test]
    fn scripted_white_peg() {
        let spec = GameSpec::new(GameKind::MastermindWp, 3).with_k(9);
        assert_eq!(play(spec, &[9, 2, 9]), vec![9, 2, 9]);
    }

    #[test]
    fn out_of_range_is_rejected_without_change() {
        let mut s = Session::new(bp46()).unwrap();
        let before = s.current();
        let e = s.answer(AnswerValue::Single(7)).unwrap_err();
        assert!(matches!(e, SessionError::Range(_)), "{e}");
        assert_eq!(s.current(), before);
        assert!(s.transcript().is_empty());
    }

    #[test]
    fn inconsistent_answer_is_rejected() {
        let mut s = Session::new(GameSpec::new(GameKind::Coins, 3)).unwrap();
        assert!(s.checking());
        let first = s.current();
        let Message::Query { query: QueryView::Ids { ids }, .. } = &first else { panic!() };
        assert_eq!(ids.len(), 1);
        let e = s.answer(AnswerValue::Single(2)).unwrap_err();
        assert!(matches!(e, SessionError::Range(_) | SessionError::Inconsistent(_)));
        assert_eq!(s.current(), first);
    }

    #[test]
    fn parses_answer_forms() {
        assert_eq!(parse_answer(r#"{"type":"answer","value":3}"#).unwrap(), AnswerValue::Single(3));
        assert_eq!(parse_answer(r#"{"value":[1,2]}"#).unwrap(), AnswerValue::Pegs([1, 2]));
        assert_eq!(parse_answer("2 1").unwrap(), AnswerValue::Pegs([2, 1]));
        assert_eq!(parse_answer(" 4 ").unwrap(), AnswerValue::Single(4));
        assert!(parse_answer("four").is_err());
        assert!(parse_answer(r#"{"type":"query","value":1}"#).is_err());
        assert!(parse_answer(r#"{"value":-1}"#).is_err());
    }

    #[test]
    fn messages_have_protocol_shape() {
        let q = Message::Query { t: 1, query: QueryView::Colors { colors: vec![1, 0], feedback: None }, bound: Some(2) };
        assert_eq!(serde_json::to_string(&q).unwrap(), r#"{"type":"query","t":1,"query":{"colors":[1,0]},"bound":2}"#);
        let d = Message::Decoded { codeword: vec![3, 1] };
        assert_eq!(serde_json::to_string(&d).unwrap(), r#"{"type":"decoded","codeword":[3,1]}"#);
        let e = Message::error("x");
        assert_eq!(serde_json::to_string(&e).unwrap(), r#"{"type":"error","message":"x"}"#);
        let s = Message::Query { t: 2, query: QueryView::Ids { ids: vec![1, 4] }, bound: None };
        assert_eq!(serde_json::to_string(&s).unwrap(), r#"{"type":"query","t":2,"query":{"ids":[1,4]}}"#);
    }
}
