// SPDX-License-Identifier: Apache-2.0

//! JSONL history files: one event per line.
//!
//! ```text
//! {"kind":"call","id":1,"obj":"set","op":"insert","args":[1],"result":true}
//! {"kind":"ret","id":1,"obj":"set","op":"insert","args":[1],"result":true}
//! ```

use std::collections::HashSet;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use super::event::{Event, EventKind, History, OperationRecord, Value};
use super::HistoryError;

#[derive(Serialize)]
struct WireEventRef<'a> {
    kind: &'static str,
    id: u64,
    obj: &'a str,
    op: &'a str,
    args: &'a [i64],
    result: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WireEvent {
    kind: String,
    id: u64,
    obj: String,
    op: String,
    args: Vec<i64>,
    result: Value,
}

/// Parses one JSONL line; `line` is 1-based and only used for error reporting.
fn parse_line(text: &str, line: usize) -> Result<Event, HistoryError> {
    let wire: WireEvent = serde_json::from_str(text).map_err(|e| HistoryError::Malformed {
        line,
        message: e.to_string(),
    })?;
    let kind = match wire.kind.as_str() {
        "call" => EventKind::Call,
        "ret" => EventKind::Return,
        _ => return Err(HistoryError::UnknownKind { line, kind: wire.kind }),
    };
    Ok(Event {
        kind,
        id: wire.id,
        object: wire.obj,
        operation: OperationRecord {
            name: wire.op,
            args: wire.args,
            result: wire.result,
        },
    })
}

/// Reads a history from a JSONL stream. Events are returned in file order;
/// the only semantic check is that no `(kind, id)` pair repeats.
pub fn parse_history<R: BufRead>(reader: R) -> Result<History, HistoryError> {
    let mut seen = HashSet::new();
    let mut events = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let text = line.map_err(|e| HistoryError::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        if text.trim().is_empty() {
            continue;
        }
        let event = parse_line(&text, line_no)?;
        if !seen.insert((event.kind, event.id)) {
            return Err(HistoryError::DuplicateEvent {
                line: line_no,
                kind: event.kind,
                id: event.id,
            });
        }
        events.push(event);
    }
    Ok(History::new(events))
}

pub fn parse_history_str(text: &str) -> Result<History, HistoryError> {
    parse_history(text.as_bytes())
}

/// Writes the canonical JSONL form: fixed field order, one line per event,
/// each terminated by `\n`.
pub fn write_history<W: Write>(history: &History, mut out: W) -> io::Result<()> {
    for event in history.events() {
        let wire = WireEventRef {
            kind: event.kind.as_str(),
            id: event.id,
            obj: &event.object,
            op: &event.operation.name,
            args: &event.operation.args,
            result: event.operation.result,
        };
        serde_json::to_writer(&mut out, &wire)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn serialize_history(history: &History) -> Vec<u8> {
    let mut buf = Vec::with_capacity(history.len() * 72);
    write_history(history, &mut buf).expect("writing to a Vec cannot fail");
    buf
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_line_layout() {
        let h = History::new(vec![Event::call(
            1,
            "set",
            OperationRecord::new("insert", [1], Value::Bool(true)),
        )]);
        assert_eq!(
            String::from_utf8(serialize_history(&h)).unwrap(),
            "{\"kind\":\"call\",\"id\":1,\"obj\":\"set\",\"op\":\"insert\",\"args\":[1],\"result\":true}\n"
        );
    }

    #[test]
    fn absent_result_is_null() {
        let text = r#"{"kind":"call","id":4,"obj":"m","op":"read","args":[3],"result":null}"#;
        let h = parse_history_str(text).unwrap();
        assert_eq!(h.events()[0].operation.result, Value::Absent);
        let back = String::from_utf8(serialize_history(&h)).unwrap();
        assert_eq!(back.trim_end(), text);
    }

    #[test]
    fn unknown_field_rejected() {
        let text = r#"{"kind":"call","id":1,"obj":"s","op":"insert","args":[1],"result":true,"ts":3}"#;
        assert!(matches!(
            parse_history_str(text),
            Err(HistoryError::Malformed { line: 1, .. })
        ));
    }

    #[test]
    fn unknown_kind_reported_with_line() {
        let text = concat!(
            r#"{"kind":"call","id":1,"obj":"s","op":"insert","args":[1],"result":true}"#,
            "\n",
            r#"{"kind":"invoke","id":1,"obj":"s","op":"insert","args":[1],"result":true}"#,
        );
        match parse_history_str(text) {
            Err(HistoryError::UnknownKind { line, kind }) => {
                assert_eq!(line, 2);
                assert_eq!(kind, "invoke");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_result_rejected() {
        let text = r#"{"kind":"call","id":1,"obj":"s","op":"insert","args":[1]}"#;
        assert!(matches!(
            parse_history_str(text),
            Err(HistoryError::Malformed { line: 1, .. })
        ));
    }
}
