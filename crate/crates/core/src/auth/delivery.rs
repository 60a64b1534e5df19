//! Simulated out-of-band OTP channel: an append-only log of deliveries.
//!
//! Each line is `instant \t otp_channel \t otp_value`.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;
use std::sync::{Arc, Mutex};

use chrono::{DateTime, SecondsFormat, Utc};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Delivery {
    pub at: DateTime<Utc>,
    pub channel: String,
    pub otp: String,
}

impl Delivery {
    pub fn to_line(&self) -> String {
        format!(
            "{}\t{}\t{}",
            self.at.to_rfc3339_opts(SecondsFormat::Secs, true),
            self.channel,
            self.otp
        )
    }

    pub fn parse_line(line: &str) -> Option<Self> {
        let mut parts = line.trim_end_matches(['\r', '\n']).splitn(3, '\t');
        let at = DateTime::parse_from_rfc3339(parts.next()?)
            .ok()?
            .with_timezone(&Utc);
        let channel = parts.next()?.to_string();
        let otp = parts.next()?.to_string();
        Some(Self { at, channel, otp })
    }
}

#[derive(Debug)]
enum Sink {
    File(File),
    Memory(Arc<Mutex<Vec<Delivery>>>),
}

#[derive(Debug)]
pub struct DeliveryLog {
    sink: Mutex<Sink>,
}

impl DeliveryLog {
    pub fn open(path: impl AsRef<Path>) -> io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self {
            sink: Mutex::new(Sink::File(file)),
        })
    }

    pub fn memory() -> (Self, Arc<Mutex<Vec<Delivery>>>) {
        let entries = Arc::new(Mutex::new(Vec::new()));
        (
            Self {
                sink: Mutex::new(Sink::Memory(entries.clone())),
            },
            entries,
        )
    }

    /// Appends and flushes one delivery before returning.
    pub fn deliver(&self, delivery: Delivery) -> io::Result<()> {
        match &mut *self.sink.lock().unwrap() {
            Sink::File(file) => {
                let mut line = delivery.to_line();
                line.push('\n');
                file.write_all(line.as_bytes())?;
                file.flush()
            }
            Sink::Memory(entries) => {
                entries.lock().unwrap().push(delivery);
                Ok(())
            }
        }
    }

    pub fn flush(&self) -> io::Result<()> {
        match &mut *self.sink.lock().unwrap() {
            Sink::File(file) => file.sync_data(),
            Sink::Memory(_) => Ok(()),
        }
    }
}

/// Newest OTP delivered to `channel` in the log file at `path`.
pub fn latest_otp(path: impl AsRef<Path>, channel: &str) -> io::Result<Option<String>> {
    let reader = BufReader::new(File::open(path)?);
    let mut latest = None;
    for line in reader.lines() {
        if let Some(d) = Delivery::parse_line(&line?) {
            if d.channel == channel {
                latest = Some(d.otp);
            }
        }
    }
    Ok(latest)
}
