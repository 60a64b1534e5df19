//! Retransmission cache. A request is a duplicate when peer, identifier and
//! Request Authenticator all match an entry younger than the window.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Mutex;

use chrono::{DateTime, Duration, Utc};

use crate::wire::Authenticator;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Admission {
    /// Not seen before; the caller must report back with `complete`.
    Fresh,
    /// Seen and answered; resend these bytes verbatim.
    Replay(Vec<u8>),
    /// Seen and still in progress, or originally dropped.
    Drop,
}

#[derive(Debug)]
struct Entry {
    ra: Authenticator,
    at: DateTime<Utc>,
    // None while in flight; Some(None) when the request was dropped
    outcome: Option<Option<Vec<u8>>>,
}

#[derive(Debug)]
pub struct DedupCache {
    window: Duration,
    entries: Mutex<HashMap<(SocketAddr, u8), Entry>>,
}

impl DedupCache {
    pub fn new(window: Duration) -> Self {
        Self {
            window,
            entries: Mutex::new(HashMap::new()),
        }
    }

    pub fn admit(
        &self,
        peer: SocketAddr,
        identifier: u8,
        ra: &Authenticator,
        now: DateTime<Utc>,
    ) -> Admission {
        let mut entries = self.entries.lock().unwrap();
        entries.retain(|_, e| now - e.at < self.window);
        if let Some(entry) = entries.get(&(peer, identifier)) {
            if entry.ra == *ra {
                return match &entry.outcome {
                    Some(Some(bytes)) => Admission::Replay(bytes.clone()),
                    _ => Admission::Drop,
                };
            }
        }
        entries.insert(
            (peer, identifier),
            Entry {
                ra: *ra,
                at: now,
                outcome: None,
            },
        );
        Admission::Fresh
    }

    pub fn complete(
        &self,
        peer: SocketAddr,
        identifier: u8,
        ra: &Authenticator,
        response: Option<Vec<u8>>,
    ) {
        let mut entries = self.entries.lock().unwrap();
        if let Some(entry) = entries.get_mut(&(peer, identifier)) {
            if entry.ra == *ra {
                entry.outcome = Some(response);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
