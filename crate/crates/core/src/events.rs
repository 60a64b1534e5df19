//! One-line tab-separated event log: `instant \t event \t subject \t detail`.
//!
//! Secrets, passwords and OTP values must never be passed in.

use std::fmt::Display;
use std::io::Write;
use std::sync::{Arc, Mutex};

use chrono::{DateTime, SecondsFormat, Utc};

#[derive(Clone)]
pub struct EventLog {
    sink: Sink,
}

#[derive(Clone)]
enum Sink {
    Stderr,
    Memory(Arc<Mutex<Vec<String>>>),
    Discard,
}

impl EventLog {
    pub fn stderr() -> Self {
        Self { sink: Sink::Stderr }
    }

    pub fn discard() -> Self {
        Self {
            sink: Sink::Discard,
        }
    }

    /// Keeps every line in memory; the handle reads them back.
    pub fn memory() -> (Self, Arc<Mutex<Vec<String>>>) {
        let lines = Arc::new(Mutex::new(Vec::new()));
        (
            Self {
                sink: Sink::Memory(lines.clone()),
            },
            lines,
        )
    }

    pub fn event(&self, now: DateTime<Utc>, event: &str, subject: &str, detail: impl Display) {
        if matches!(self.sink, Sink::Discard) {
            return;
        }
        let line = format!(
            "{}\t{}\t{}\t{}",
            now.to_rfc3339_opts(SecondsFormat::Secs, true),
            event,
            sanitize(subject),
            detail
        );
        match &self.sink {
            Sink::Stderr => {
                let _ = writeln!(std::io::stderr().lock(), "{line}");
            }
            Sink::Memory(lines) => lines.lock().unwrap().push(line),
            Sink::Discard => {}
        }
    }
}

impl std::fmt::Debug for EventLog {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.sink {
            Sink::Stderr => "stderr",
            Sink::Memory(_) => "memory",
            Sink::Discard => "discard",
        };
        f.debug_struct("EventLog").field("sink", &kind).finish()
    }
}

// usernames come off the wire
fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_control() { '?' } else { c })
        .collect()
}
