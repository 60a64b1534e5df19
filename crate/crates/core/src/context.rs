//! Situational context of a request: server time and source network.

use std::collections::{BTreeSet, HashSet};
use std::net::Ipv4Addr;

use chrono::{DateTime, Datelike, FixedOffset, NaiveTime, Timelike, Utc, Weekday};
use ipnet::Ipv4Net;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContextConfigError {
    #[error("no trusted networks configured")]
    NoTrustedNetworks,
    #[error("no working days configured")]
    NoWorkingDays,
    #[error("working day must start before it ends ({start} >= {end})")]
    EmptyWindow { start: NaiveTime, end: NaiveTime },
    #[error("unknown weekday {0:?}")]
    BadWeekday(String),
    #[error("bad time of day {0:?}, expected HH:MM")]
    BadTime(String),
    #[error("bad timezone offset {0:?}, expected +HH:MM")]
    BadTimezone(String),
    #[error("bad network {0:?}, expected a.b.c.d/len")]
    BadNetwork(String),
}

/// Working hours and trusted networks. Immutable once built.
#[derive(Debug, Clone)]
pub struct ContextConfig {
    working_days: HashSet<Weekday>,
    day_start: NaiveTime,
    day_end: NaiveTime,
    timezone: FixedOffset,
    trusted_networks: Vec<Ipv4Net>,
}

impl ContextConfig {
    pub fn new(
        working_days: impl IntoIterator<Item = Weekday>,
        day_start: NaiveTime,
        day_end: NaiveTime,
        timezone: FixedOffset,
        trusted_networks: Vec<Ipv4Net>,
    ) -> Result<Self, ContextConfigError> {
        let working_days: HashSet<_> = working_days.into_iter().collect();
        if working_days.is_empty() {
            return Err(ContextConfigError::NoWorkingDays);
        }
        if day_start >= day_end {
            return Err(ContextConfigError::EmptyWindow {
                start: day_start,
                end: day_end,
            });
        }
        if trusted_networks.is_empty() {
            return Err(ContextConfigError::NoTrustedNetworks);
        }
        Ok(Self {
            working_days,
            day_start,
            day_end,
            timezone,
            trusted_networks,
        })
    }

    pub fn timezone(&self) -> FixedOffset {
        self.timezone
    }

    pub fn trusted_networks(&self) -> &[Ipv4Net] {
        &self.trusted_networks
    }

    pub fn is_working_time(&self, now: DateTime<Utc>) -> bool {
        let local = now.with_timezone(&self.timezone);
        let tod = local.time();
        self.working_days.contains(&local.weekday()) && self.day_start <= tod && tod < self.day_end
    }

    pub fn is_trusted(&self, address: Ipv4Addr) -> bool {
        self.trusted_networks
            .iter()
            .any(|net| net.contains(&address))
    }
}

/// Textual form as found in the server configuration file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextConfigFile {
    pub working_days: Vec<String>,
    pub day_start: String,
    pub day_end: String,
    pub timezone: String,
    pub trusted_networks: Vec<String>,
}

impl TryFrom<ContextConfigFile> for ContextConfig {
    type Error = ContextConfigError;

    fn try_from(file: ContextConfigFile) -> Result<Self, Self::Error> {
        let days = file
            .working_days
            .iter()
            .map(|d| {
                d.parse::<Weekday>()
                    .map_err(|_| ContextConfigError::BadWeekday(d.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let parse_time = |s: &str| {
            NaiveTime::parse_from_str(s, "%H:%M").map_err(|_| ContextConfigError::BadTime(s.into()))
        };
        let timezone = file
            .timezone
            .parse::<FixedOffset>()
            .map_err(|_| ContextConfigError::BadTimezone(file.timezone.clone()))?;
        let networks = file
            .trusted_networks
            .iter()
            .map(|n| {
                n.parse::<Ipv4Net>()
                    .map_err(|_| ContextConfigError::BadNetwork(n.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        ContextConfig::new(
            days,
            parse_time(&file.day_start)?,
            parse_time(&file.day_end)?,
            timezone,
            networks,
        )
    }
}

/// Facts about one request, fixed at the moment it was taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContextSnapshot {
    timestamp: DateTime<Utc>,
    source_address: Ipv4Addr,
    in_working_hours: bool,
    on_site: bool,
}

impl ContextSnapshot {
    pub fn timestamp(&self) -> DateTime<Utc> {
        self.timestamp
    }

    pub fn source_address(&self) -> Ipv4Addr {
        self.source_address
    }

    pub fn in_working_hours(&self) -> bool {
        self.in_working_hours
    }

    pub fn on_site(&self) -> bool {
        self.on_site
    }

    pub fn verdict(&self) -> ContextVerdict {
        evaluate_plausibility(self)
    }
}

pub fn snapshot_context(
    source_address: Ipv4Addr,
    now: DateTime<Utc>,
    config: &ContextConfig,
) -> ContextSnapshot {
    let timestamp = now.with_nanosecond(0).unwrap_or(now);
    ContextSnapshot {
        timestamp,
        source_address,
        in_working_hours: config.is_working_time(timestamp),
        on_site: config.is_trusted(source_address),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ContextReason {
    OutsideWorkingHours,
    OffSite,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ContextVerdict {
    reasons: BTreeSet<ContextReason>,
}

impl ContextVerdict {
    pub fn plausible() -> Self {
        Self::default()
    }

    pub fn from_reasons(reasons: impl IntoIterator<Item = ContextReason>) -> Self {
        Self {
            reasons: reasons.into_iter().collect(),
        }
    }

    pub fn is_plausible(&self) -> bool {
        self.reasons.is_empty()
    }

    pub fn reasons(&self) -> &BTreeSet<ContextReason> {
        &self.reasons
    }
}

pub fn evaluate_plausibility(snapshot: &ContextSnapshot) -> ContextVerdict {
    let mut reasons = BTreeSet::new();
    if !snapshot.in_working_hours {
        reasons.insert(ContextReason::OutsideWorkingHours);
    }
    if !snapshot.on_site {
        reasons.insert(ContextReason::OffSite);
    }
    ContextVerdict { reasons }
}
