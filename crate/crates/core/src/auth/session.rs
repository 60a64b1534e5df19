use chrono::{DateTime, Utc};

use crate::policy::RequestedAction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Default,
    Root,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::Default => "default",
            Role::Root => "root",
        }
    }
}

impl From<RequestedAction> for Role {
    fn from(action: RequestedAction) -> Self {
        match action {
            RequestedAction::DefaultAccess => Role::Default,
            RequestedAction::RootAccess => Role::Root,
        }
    }
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SessionId(String);

impl SessionId {
    pub(crate) fn random() -> Self {
        Self(hex::encode(rand::random::<[u8; 16]>()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for SessionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Session {
    pub session_id: SessionId,
    pub username: String,
    pub granted_role: Role,
    pub factors_verified: u8,
    pub established_at: DateTime<Utc>,
    pub expires_at: DateTime<Utc>,
}

impl Session {
    pub fn is_active(&self, now: DateTime<Utc>) -> bool {
        now < self.expires_at
    }

    pub fn grants(&self, role: Role) -> bool {
        self.granted_role >= role
    }
}
