use std::fmt;

use chrono::{DateTime, Duration, Utc};
use rand::Rng;

use crate::policy::RequestedAction;

pub const STATE_TOKEN_LEN: usize = 16;

/// Opaque token carried in the State attribute between a challenge and its answer.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct StateToken([u8; STATE_TOKEN_LEN]);

impl StateToken {
    pub(crate) fn random() -> Self {
        Self(rand::random())
    }

    pub fn from_slice(bytes: &[u8]) -> Option<Self> {
        bytes.try_into().ok().map(Self)
    }

    pub fn as_bytes(&self) -> &[u8; STATE_TOKEN_LEN] {
        &self.0
    }
}

impl fmt::Debug for StateToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateToken({})", hex::encode(self.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OtpPolicy {
    pub ttl: Duration,
    pub max_attempts: u32,
    pub digits: u32,
    /// Concurrent unexpired challenges allowed per user.
    pub max_pending: usize,
}

impl Default for OtpPolicy {
    fn default() -> Self {
        Self {
            ttl: Duration::seconds(120),
            max_attempts: 3,
            digits: 6,
            max_pending: 3,
        }
    }
}

pub(crate) fn generate_otp(digits: u32) -> String {
    let bound = 10u64.pow(digits);
    let value = rand::rng().random_range(0..bound);
    format!("{value:0width$}", width = digits as usize)
}

#[derive(Clone, PartialEq, Eq)]
pub struct OtpChallenge {
    pub state_token: StateToken,
    pub otp_value: String,
    pub issued_at: DateTime<Utc>,
    pub expires_at: DateTime<Utc>,
    pub attempts_remaining: u32,
    pub pending_action: RequestedAction,
    pub username: String,
}

// keeps the OTP value out of debug output
impl fmt::Debug for OtpChallenge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OtpChallenge")
            .field("state_token", &self.state_token)
            .field("issued_at", &self.issued_at)
            .field("expires_at", &self.expires_at)
            .field("attempts_remaining", &self.attempts_remaining)
            .field("pending_action", &self.pending_action)
            .field("username", &self.username)
            .finish_non_exhaustive()
    }
}

/// Why an OTP answer was refused. Logged, never sent to the client.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OtpFailure {
    Unknown,
    Expired,
    Exhausted,
    Mismatch,
}

impl fmt::Display for OtpFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OtpFailure::Unknown => "unknown challenge",
            OtpFailure::Expired => "challenge expired",
            OtpFailure::Exhausted => "attempts exhausted",
            OtpFailure::Mismatch => "wrong otp",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn otp_shape() {
        for _ in 0..200 {
            let otp = generate_otp(6);
            assert_eq!(otp.len(), 6);
            assert!(otp.bytes().all(|b| b.is_ascii_digit()));
        }
        assert_eq!(generate_otp(8).len(), 8);
    }

    #[test]
    fn debug_hides_otp() {
        let c = OtpChallenge {
            state_token: StateToken::random(),
            otp_value: "987654".into(),
            issued_at: DateTime::<Utc>::UNIX_EPOCH,
            expires_at: DateTime::<Utc>::UNIX_EPOCH,
            attempts_remaining: 3,
            pending_action: RequestedAction::RootAccess,
            username: "alice".into(),
        };
        assert!(!format!("{c:?}").contains("987654"));
    }

    #[test]
    fn state_token_from_slice() {
        assert!(StateToken::from_slice(&[0; 16]).is_some());
        assert!(StateToken::from_slice(&[0; 15]).is_none());
        assert!(StateToken::from_slice(&[0; 17]).is_none());
    }
}
