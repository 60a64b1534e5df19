//! Read-only user store holding salted SHA-256 password digests.

use std::collections::HashMap;
use std::path::Path;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use subtle::ConstantTimeEq;
use thiserror::Error;

pub const SALT_LEN: usize = 16;
pub const DIGEST_LEN: usize = 32;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("reading user store: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing user store: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("user {username:?}: {field} is not valid hex")]
    BadHex {
        username: String,
        field: &'static str,
    },
    #[error("user {0:?}: salt shorter than 16 octets")]
    ShortSalt(String),
    #[error("user {0:?}: digest must be 32 octets")]
    BadDigest(String),
    #[error("user {0:?} listed twice")]
    Duplicate(String),
}

pub fn password_digest(salt: &[u8], password: &[u8]) -> [u8; DIGEST_LEN] {
    let mut h = Sha256::new();
    h.update(salt);
    h.update(password);
    h.finalize().into()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserRecord {
    username: String,
    salt: Vec<u8>,
    digest: [u8; DIGEST_LEN],
    otp_channel: String,
}

impl UserRecord {
    /// Creates a record with a fresh random salt. The password is not kept.
    pub fn new(
        username: impl Into<String>,
        password: &[u8],
        otp_channel: impl Into<String>,
    ) -> Self {
        let mut salt = vec![0u8; SALT_LEN];
        rand::rng().fill_bytes(&mut salt);
        Self::with_salt(username, salt, password, otp_channel)
    }

    pub fn with_salt(
        username: impl Into<String>,
        salt: Vec<u8>,
        password: &[u8],
        otp_channel: impl Into<String>,
    ) -> Self {
        let digest = password_digest(&salt, password);
        Self {
            username: username.into(),
            salt,
            digest,
            otp_channel: otp_channel.into(),
        }
    }

    pub fn username(&self) -> &str {
        &self.username
    }

    pub fn otp_channel(&self) -> &str {
        &self.otp_channel
    }

    pub fn salt(&self) -> &[u8] {
        &self.salt
    }

    pub fn digest(&self) -> &[u8; DIGEST_LEN] {
        &self.digest
    }

    pub fn password_matches(&self, password: &[u8]) -> bool {
        password_digest(&self.salt, password)
            .ct_eq(&self.digest)
            .into()
    }

    pub fn to_entry(&self) -> UserEntry {
        UserEntry {
            username: self.username.clone(),
            salt: hex::encode(&self.salt),
            digest: hex::encode(self.digest),
            otp_channel: self.otp_channel.clone(),
        }
    }
}

/// On-disk form of one user.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserEntry {
    pub username: String,
    pub salt: String,
    pub digest: String,
    pub otp_channel: String,
}

impl TryFrom<UserEntry> for UserRecord {
    type Error = StoreError;

    fn try_from(entry: UserEntry) -> Result<Self, Self::Error> {
        let salt = hex::decode(&entry.salt).map_err(|_| StoreError::BadHex {
            username: entry.username.clone(),
            field: "salt",
        })?;
        if salt.len() < SALT_LEN {
            return Err(StoreError::ShortSalt(entry.username));
        }
        let digest = hex::decode(&entry.digest).map_err(|_| StoreError::BadHex {
            username: entry.username.clone(),
            field: "digest",
        })?;
        let digest: [u8; DIGEST_LEN] = digest
            .try_into()
            .map_err(|_| StoreError::BadDigest(entry.username.clone()))?;
        Ok(Self {
            username: entry.username,
            salt,
            digest,
            otp_channel: entry.otp_channel,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct StoreFile {
    #[serde(default)]
    users: Vec<UserEntry>,
}

#[derive(Debug, Clone)]
pub struct UserStore {
    users: HashMap<String, UserRecord>,
    decoy: UserRecord,
}

impl Default for UserStore {
    fn default() -> Self {
        Self {
            users: HashMap::new(),
            decoy: UserRecord::new("", b"decoy", ""),
        }
    }
}

impl UserStore {
    pub fn new(records: impl IntoIterator<Item = UserRecord>) -> Result<Self, StoreError> {
        let mut store = Self::default();
        for record in records {
            store.insert(record)?;
        }
        Ok(store)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, StoreError> {
        let file: StoreFile = toml::from_str(text)?;
        let records = file
            .users
            .into_iter()
            .map(UserRecord::try_from)
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(records)
    }

    pub fn to_toml_string(&self) -> String {
        let mut users: Vec<_> = self.users.values().map(UserRecord::to_entry).collect();
        users.sort_by(|a, b| a.username.cmp(&b.username));
        toml::to_string(&StoreFile { users }).expect("user entries are plain strings")
    }

    pub fn insert(&mut self, record: UserRecord) -> Result<(), StoreError> {
        if self.users.contains_key(&record.username) {
            return Err(StoreError::Duplicate(record.username));
        }
        self.users.insert(record.username.clone(), record);
        Ok(())
    }

    pub fn get(&self, username: &str) -> Option<&UserRecord> {
        self.users.get(username)
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }
}

/// Unknown users still cost one digest so the two failure cases look alike.
pub fn verify_first_factor(username: &str, password: &[u8], store: &UserStore) -> bool {
    match store.get(username) {
        Some(record) => record.password_matches(password),
        None => {
            let _ = store.decoy.password_matches(password);
            false
        }
    }
}
