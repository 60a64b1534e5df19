#![allow(dead_code)]

pub mod vectors;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use chrono::{DateTime, Duration, FixedOffset, NaiveTime, TimeZone, Utc, Weekday};
use contextauth::auth::{AuthConfig, AuthService, DeliveryLog, UserRecord, UserStore};
use contextauth::clock::ManualClock;
use contextauth::events::EventLog;
use contextauth::server::{BackgroundServer, ClientEntry, Server};
use contextauth::ContextConfig;

pub const SECRET: &[u8] = b"testing123";
pub const PASSWORD: &[u8] = b"correct horse battery staple";
pub const USERS: [&str; 6] = ["alice", "bob", "carol", "dave", "erin", "frank"];

/// Tuesday 10:00 UTC, inside the fixture's working hours.
pub fn office_hours() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2026, 10, 13, 10, 0, 0).unwrap()
}

pub fn night() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2026, 10, 13, 23, 0, 0).unwrap()
}

pub fn context() -> ContextConfig {
    ContextConfig::new(
        [
            Weekday::Mon,
            Weekday::Tue,
            Weekday::Wed,
            Weekday::Thu,
            Weekday::Fri,
        ],
        NaiveTime::from_hms_opt(8, 0, 0).unwrap(),
        NaiveTime::from_hms_opt(18, 0, 0).unwrap(),
        FixedOffset::east_opt(0).unwrap(),
        vec![
            "127.0.0.0/8".parse().unwrap(),
            "10.0.0.0/8".parse().unwrap(),
        ],
    )
    .unwrap()
}

pub struct LiveServer {
    pub handle: BackgroundServer,
    pub clock: Arc<ManualClock>,
    pub delivery_log: PathBuf,
    _dir: tempfile::TempDir,
}

impl LiveServer {
    pub fn start() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let delivery_log = dir.path().join("otp-delivery.log");
        let users =
            UserStore::new(USERS.iter().map(|u| UserRecord::new(*u, PASSWORD, *u))).unwrap();
        let auth = AuthService::new(
            users,
            AuthConfig::default(),
            DeliveryLog::open(&delivery_log).unwrap(),
            EventLog::discard(),
        );
        let server = Server::new(
            vec![ClientEntry::new("127.0.0.0/8".parse().unwrap(), SECRET)],
            context(),
            auth,
            Duration::seconds(30),
            EventLog::discard(),
        );
        let clock = Arc::new(ManualClock::new(office_hours()));
        let handle =
            BackgroundServer::start(server, clock.clone(), "127.0.0.1:0".parse().unwrap()).unwrap();
        Self {
            handle,
            clock,
            delivery_log,
            _dir: dir,
        }
    }

    pub fn now(&self) -> DateTime<Utc> {
        use contextauth::clock::Clock;
        self.clock.now()
    }

    pub fn addr(&self) -> SocketAddr {
        self.handle.local_addr()
    }

    pub fn server(&self) -> &Server {
        self.handle.server()
    }

    pub fn deliveries_to(&self, channel: &str) -> usize {
        std::fs::read_to_string(&self.delivery_log)
            .unwrap_or_default()
            .lines()
            .filter(|l| l.split('\t').nth(1) == Some(channel))
            .count()
    }
}
