use std::net::{Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, Utc};
use ipnet::Ipv4Net;
use serde::Deserialize;
use thiserror::Error;

use crate::auth::{AuthConfig, OtpPolicy};
use crate::context::{ContextConfig, ContextConfigError, ContextConfigFile};

pub const DEFAULT_PORT: u16 = 1812;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parsing configuration: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("at least one client entry is required")]
    NoClients,
    #[error("client {0}: bad address, expected a.b.c.d or a.b.c.d/len")]
    BadClientAddress(String),
    #[error("client {0}: shared secret must be non-empty hex")]
    BadSecret(String),
    #[error("context: {0}")]
    Context(#[from] ContextConfigError),
    #[error("otp: {0}")]
    BadOtp(&'static str),
    #[error("session ttl must be positive")]
    BadSessionTtl,
    #[error("clock_override must be an RFC 3339 instant")]
    BadClockOverride,
}

/// A NAS allowed to talk to the server and the secret it shares with it.
#[derive(Clone, PartialEq, Eq)]
pub struct ClientEntry {
    pub network: Ipv4Net,
    pub shared_secret: Vec<u8>,
}

impl ClientEntry {
    pub fn new(network: Ipv4Net, shared_secret: impl Into<Vec<u8>>) -> Self {
        Self {
            network,
            shared_secret: shared_secret.into(),
        }
    }

    pub fn matches(&self, addr: Ipv4Addr) -> bool {
        self.network.contains(&addr)
    }
}

impl std::fmt::Debug for ClientEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ClientEntry")
            .field("network", &self.network)
            .field("shared_secret", &"<redacted>")
            .finish()
    }
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub bind: SocketAddr,
    pub clients: Vec<ClientEntry>,
    pub context: ContextConfig,
    pub auth: AuthConfig,
    pub dedup_window: Duration,
    pub user_store_path: PathBuf,
    pub delivery_log_path: PathBuf,
    /// Test-only: the server clock starts at this instant. Off unless set.
    pub clock_override: Option<DateTime<Utc>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default = "default_bind")]
    bind: SocketAddr,
    clients: Vec<ClientFile>,
    context: ContextConfigFile,
    #[serde(default)]
    otp: OtpFile,
    #[serde(default)]
    session: SessionFile,
    #[serde(default = "default_dedup")]
    dedup_window_seconds: i64,
    user_store_path: PathBuf,
    delivery_log_path: PathBuf,
    #[serde(default)]
    testing: TestingFile,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClientFile {
    address: String,
    secret_hex: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct OtpFile {
    ttl_seconds: i64,
    max_attempts: u32,
    digits: u32,
    max_pending: usize,
}

impl Default for OtpFile {
    fn default() -> Self {
        let p = OtpPolicy::default();
        Self {
            ttl_seconds: p.ttl.num_seconds(),
            max_attempts: p.max_attempts,
            digits: p.digits,
            max_pending: p.max_pending,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SessionFile {
    ttl_seconds: i64,
}

impl Default for SessionFile {
    fn default() -> Self {
        Self {
            ttl_seconds: AuthConfig::default().session_ttl.num_seconds(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TestingFile {
    clock_override: Option<String>,
}

fn default_bind() -> SocketAddr {
    SocketAddr::from(([0, 0, 0, 0], DEFAULT_PORT))
}

fn default_dedup() -> i64 {
    30
}

fn parse_client(c: ClientFile) -> Result<ClientEntry, ConfigError> {
    let network = c
        .address
        .parse::<Ipv4Net>()
        .or_else(|_| c.address.parse::<Ipv4Addr>().map(Ipv4Net::from))
        .map_err(|_| ConfigError::BadClientAddress(c.address.clone()))?;
    let secret = hex::decode(&c.secret_hex)
        .ok()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| ConfigError::BadSecret(c.address.clone()))?;
    Ok(ClientEntry::new(network, secret))
}

impl ServerConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml_str(&text, base)
    }

    /// Relative paths inside the file are resolved against `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let file: ConfigFile = toml::from_str(text)?;
        if file.clients.is_empty() {
            return Err(ConfigError::NoClients);
        }
        let clients = file
            .clients
            .into_iter()
            .map(parse_client)
            .collect::<Result<Vec<_>, _>>()?;

        let otp = &file.otp;
        if otp.ttl_seconds <= 0 {
            return Err(ConfigError::BadOtp("ttl_seconds must be positive"));
        }
        if otp.max_attempts == 0 {
            return Err(ConfigError::BadOtp("max_attempts must be at least 1"));
        }
        if !(4..=9).contains(&otp.digits) {
            return Err(ConfigError::BadOtp("digits must be within 4..=9"));
        }
        if otp.max_pending == 0 {
            return Err(ConfigError::BadOtp("max_pending must be at least 1"));
        }
        if file.session.ttl_seconds <= 0 {
            return Err(ConfigError::BadSessionTtl);
        }
        let clock_override = file
            .testing
            .clock_override
            .map(|s| {
                DateTime::parse_from_rfc3339(&s)
                    .map(|t| t.with_timezone(&Utc))
                    .map_err(|_| ConfigError::BadClockOverride)
            })
            .transpose()?;

        Ok(Self {
            bind: file.bind,
            clients,
            context: ContextConfig::try_from(file.context)?,
            auth: AuthConfig {
                otp: OtpPolicy {
                    ttl: Duration::seconds(otp.ttl_seconds),
                    max_attempts: otp.max_attempts,
                    digits: otp.digits,
                    max_pending: otp.max_pending,
                },
                session_ttl: Duration::seconds(file.session.ttl_seconds),
            },
            dedup_window: Duration::seconds(file.dedup_window_seconds.max(0)),
            user_store_path: base_dir.join(file.user_store_path),
            delivery_log_path: base_dir.join(file.delivery_log_path),
            clock_override,
        })
    }

    pub fn client_for(&self, addr: Ipv4Addr) -> Option<&ClientEntry> {
        self.clients.iter().find(|c| c.matches(addr))
    }
}
