//! JSON-lines play over any reader and writer.

use std::io::{self, BufRead, Write};

use serde::Deserialize;

use crate::session::{parse_answer, Message, Session};

#[derive(Deserialize)]
struct Confirm {
    #[serde(rename = "type")]
    kind: String,
    codeword: Vec<u32>,
}

fn emit(out: &mut impl Write, m: &Message) -> io::Result<()> {
    serde_json::to_writer(&mut *out, m)?;
    writeln!(out)?;
    out.flush()
}

/// Plays `session` until decode or end of input. Returns the final message.
pub fn play(mut session: Session, input: impl BufRead, mut out: impl Write) -> io::Result<Message> {
    emit(&mut out, &session.current())?;
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if let Ok(c) = serde_json::from_str::<Confirm>(&line) {
            if c.kind == "confirm" {
                emit(&mut out, &session.confirm(&c.codeword))?;
                continue;
            }
        }
        let m = match parse_answer(&line).and_then(|a| session.answer(a)) {
            Ok(m) => m,
            Err(e) => {
                emit(&mut out, &Message::error(e))?;
                session.current()
            }
        };
        emit(&mut out, &m)?;
    }
    Ok(session.current())
}
