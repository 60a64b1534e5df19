//! Factor verification, OTP challenges, sessions and escalation.
//!
//! A request is first matched against an existing session, then checked
//! against the user store, and finally the context decides whether one factor
//! is enough or an OTP challenge must follow. A default session can later be
//! raised to root by answering a single challenge; the session is updated in
//! place rather than replaced.

mod delivery;
mod otp;
mod session;
mod store;

pub use delivery::{latest_otp, Delivery, DeliveryLog};
pub use otp::{OtpChallenge, OtpFailure, OtpPolicy, StateToken, STATE_TOKEN_LEN};
pub use session::{Role, Session, SessionId};
pub use store::{
    password_digest, verify_first_factor, StoreError, UserEntry, UserRecord, UserStore, SALT_LEN,
};

use std::collections::HashMap;
use std::sync::Mutex;

use chrono::{DateTime, Duration, Utc};
use subtle::ConstantTimeEq;
use thiserror::Error;

use crate::context::{evaluate_plausibility, ContextSnapshot};
use crate::events::EventLog;
use crate::policy::{required_security, RequestedAction, SecurityLevel};

pub const OTP_PROMPT: &str = "enter one-time password";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuthConfig {
    pub otp: OtpPolicy,
    pub session_ttl: Duration,
}

impl Default for AuthConfig {
    fn default() -> Self {
        Self {
            otp: OtpPolicy::default(),
            session_ttl: Duration::hours(8),
        }
    }
}

#[derive(Debug, Error)]
pub enum AuthError {
    #[error("user {0:?} already has the maximum number of pending challenges")]
    ChallengeFloodLimit(String),
    #[error("unknown user {0:?}")]
    UnknownUser(String),
    #[error("otp delivery failed: {0}")]
    Delivery(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    BadCredentials,
    MalformedRequest,
    BadOtp,
    UnknownChallenge,
    SessionExpired,
    TooManyChallenges,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AuthDecision {
    Accept(Role),
    Challenge {
        state_token: StateToken,
        prompt: String,
    },
    Reject(RejectReason),
}

#[derive(Debug)]
pub struct AuthService {
    users: UserStore,
    config: AuthConfig,
    delivery: DeliveryLog,
    events: EventLog,
    challenges: Mutex<HashMap<StateToken, OtpChallenge>>,
    sessions: Mutex<HashMap<String, Session>>,
}

impl AuthService {
    pub fn new(
        users: UserStore,
        config: AuthConfig,
        delivery: DeliveryLog,
        events: EventLog,
    ) -> Self {
        Self {
            users,
            config,
            delivery,
            events,
            challenges: Mutex::new(HashMap::new()),
            sessions: Mutex::new(HashMap::new()),
        }
    }

    pub fn config(&self) -> &AuthConfig {
        &self.config
    }

    pub fn users(&self) -> &UserStore {
        &self.users
    }

    pub fn delivery(&self) -> &DeliveryLog {
        &self.delivery
    }

    pub fn verify_first_factor(&self, username: &str, password: &[u8]) -> bool {
        verify_first_factor(username, password, &self.users)
    }

    /// The user's session if it has not lapsed at `now`.
    pub fn active_session(&self, username: &str, now: DateTime<Utc>) -> Option<Session> {
        self.sessions
            .lock()
            .unwrap()
            .get(username)
            .filter(|s| s.is_active(now))
            .cloned()
    }

    pub fn pending_challenge(&self, token: &StateToken) -> Option<OtpChallenge> {
        self.challenges.lock().unwrap().get(token).cloned()
    }

    pub fn issue_otp_challenge(
        &self,
        username: &str,
        action: RequestedAction,
        now: DateTime<Utc>,
    ) -> Result<OtpChallenge, AuthError> {
        let channel = self
            .users
            .get(username)
            .ok_or_else(|| AuthError::UnknownUser(username.to_string()))?
            .otp_channel()
            .to_string();
        let policy = self.config.otp;

        let challenge = {
            let mut challenges = self.challenges.lock().unwrap();
            challenges.retain(|_, c| now < c.expires_at);
            let pending = challenges
                .values()
                .filter(|c| c.username == username)
                .count();
            if pending >= policy.max_pending {
                return Err(AuthError::ChallengeFloodLimit(username.to_string()));
            }
            let mut state_token = StateToken::random();
            while challenges.contains_key(&state_token) {
                state_token = StateToken::random();
            }
            let challenge = OtpChallenge {
                state_token,
                otp_value: otp::generate_otp(policy.digits),
                issued_at: now,
                expires_at: now + policy.ttl,
                attempts_remaining: policy.max_attempts,
                pending_action: action,
                username: username.to_string(),
            };
            challenges.insert(state_token, challenge.clone());
            challenge
        };

        let delivered = self.delivery.deliver(Delivery {
            at: now,
            channel,
            otp: challenge.otp_value.clone(),
        });
        if let Err(e) = delivered {
            self.challenges
                .lock()
                .unwrap()
                .remove(&challenge.state_token);
            return Err(e.into());
        }
        self.events.event(
            now,
            "otp.issued",
            username,
            format_args!("action={action:?}"),
        );
        Ok(challenge)
    }

    /// Checks and, on success, consumes the challenge in one step under the
    /// store lock, so concurrent answers to one token admit at most one.
    fn consume_challenge(
        &self,
        token: &StateToken,
        otp: &str,
        now: DateTime<Utc>,
    ) -> Result<OtpChallenge, OtpFailure> {
        let mut challenges = self.challenges.lock().unwrap();
        let Some(challenge) = challenges.get_mut(token) else {
            return Err(OtpFailure::Unknown);
        };
        if now >= challenge.expires_at {
            challenges.remove(token);
            return Err(OtpFailure::Expired);
        }
        if challenge.attempts_remaining == 0 {
            challenges.remove(token);
            return Err(OtpFailure::Exhausted);
        }
        let matches: bool = challenge.otp_value.as_bytes().ct_eq(otp.as_bytes()).into();
        if matches {
            return Ok(challenges.remove(token).expect("present"));
        }
        challenge.attempts_remaining -= 1;
        if challenge.attempts_remaining == 0 {
            challenges.remove(token);
        }
        Err(OtpFailure::Mismatch)
    }

    pub fn verify_otp(&self, token: &StateToken, otp: &str, now: DateTime<Utc>) -> bool {
        match self.consume_challenge(token, otp, now) {
            Ok(c) => {
                self.events.event(now, "otp.verified", &c.username, "ok");
                true
            }
            Err(failure) => {
                self.events.event(now, "otp.failed", "-", failure);
                false
            }
        }
    }

    pub fn authenticate(
        &self,
        username: Option<&str>,
        password: Option<&[u8]>,
        action: RequestedAction,
        snapshot: &ContextSnapshot,
        existing: Option<&Session>,
    ) -> AuthDecision {
        let now = snapshot.timestamp();
        let (Some(username), Some(password)) = (username, password) else {
            self.events.event(
                now,
                "auth.reject",
                username.unwrap_or("-"),
                "malformed request",
            );
            return AuthDecision::Reject(RejectReason::MalformedRequest);
        };

        // The same request's credentials are checked even when a session
        // exists; a bare username must not unlock a session.
        if !self.verify_first_factor(username, password) {
            self.events
                .event(now, "auth.reject", username, "bad credentials");
            return AuthDecision::Reject(RejectReason::BadCredentials);
        }

        if let Some(session) = existing.filter(|s| s.username == username && s.is_active(now)) {
            let wanted = Role::from(action);
            if session.grants(wanted) {
                self.events.event(
                    now,
                    "auth.accept",
                    username,
                    format_args!("session re-entry role={}", session.granted_role),
                );
                return AuthDecision::Accept(session.granted_role);
            }
            return self.escalate(session, snapshot, now);
        }

        let verdict = evaluate_plausibility(snapshot);
        let level = required_security(&verdict, action);
        self.events.event(
            now,
            "auth.context",
            username,
            format_args!(
                "in_hours={} on_site={} action={action:?} level={level:?}",
                snapshot.in_working_hours(),
                snapshot.on_site()
            ),
        );
        match level {
            SecurityLevel::Low => {
                self.open_session(username, Role::Default, 1, now);
                self.events
                    .event(now, "auth.accept", username, "role=default factors=1");
                AuthDecision::Accept(Role::Default)
            }
            SecurityLevel::High => self.challenge(username, action, now),
        }
    }

    pub fn complete_challenge(
        &self,
        token: &StateToken,
        otp: &str,
        now: DateTime<Utc>,
    ) -> AuthDecision {
        let challenge = match self.consume_challenge(token, otp, now) {
            Ok(c) => c,
            Err(OtpFailure::Unknown) => {
                self.events
                    .event(now, "auth.reject", "-", OtpFailure::Unknown);
                return AuthDecision::Reject(RejectReason::UnknownChallenge);
            }
            Err(failure) => {
                self.events.event(now, "auth.reject", "-", failure);
                return AuthDecision::Reject(RejectReason::BadOtp);
            }
        };
        let role = Role::from(challenge.pending_action);
        let session = self.open_session(&challenge.username, role, 2, now);
        self.events.event(
            now,
            "auth.accept",
            &challenge.username,
            format_args!(
                "role={role} factors=2 session_role={}",
                session.granted_role
            ),
        );
        AuthDecision::Accept(role)
    }

    pub fn escalate(
        &self,
        session: &Session,
        snapshot: &ContextSnapshot,
        now: DateTime<Utc>,
    ) -> AuthDecision {
        let username = session.username.as_str();
        let raised = {
            let mut sessions = self.sessions.lock().unwrap();
            let current = sessions
                .get_mut(username)
                .filter(|s| s.session_id == session.session_id && s.is_active(now));
            let Some(current) = current else {
                drop(sessions);
                self.events
                    .event(now, "auth.reject", username, "session expired");
                return AuthDecision::Reject(RejectReason::SessionExpired);
            };
            if current.granted_role == Role::Root {
                true
            } else if current.factors_verified >= 2 {
                current.granted_role = Role::Root;
                true
            } else {
                false
            }
        };
        if raised {
            self.events
                .event(now, "session.escalated", username, "role=root factors=2");
            return AuthDecision::Accept(Role::Root);
        }
        self.events.event(
            now,
            "session.escalate",
            username,
            format_args!(
                "on_site={} in_hours={}",
                snapshot.on_site(),
                snapshot.in_working_hours()
            ),
        );
        self.challenge(username, RequestedAction::RootAccess, now)
    }

    fn challenge(
        &self,
        username: &str,
        action: RequestedAction,
        now: DateTime<Utc>,
    ) -> AuthDecision {
        match self.issue_otp_challenge(username, action, now) {
            Ok(c) => AuthDecision::Challenge {
                state_token: c.state_token,
                prompt: OTP_PROMPT.to_string(),
            },
            Err(AuthError::ChallengeFloodLimit(_)) => {
                self.events
                    .event(now, "auth.reject", username, "challenge flood limit");
                AuthDecision::Reject(RejectReason::TooManyChallenges)
            }
            Err(e) => {
                self.events.event(now, "auth.reject", username, e);
                AuthDecision::Reject(RejectReason::Internal)
            }
        }
    }

    /// Raises an active session in place, or starts a new one.
    fn open_session(&self, username: &str, role: Role, factors: u8, now: DateTime<Utc>) -> Session {
        let mut sessions = self.sessions.lock().unwrap();
        match sessions.get_mut(username) {
            Some(s) if s.is_active(now) => {
                s.granted_role = s.granted_role.max(role);
                s.factors_verified = s.factors_verified.max(factors);
                s.clone()
            }
            _ => {
                let s = Session {
                    session_id: SessionId::random(),
                    username: username.to_string(),
                    granted_role: role,
                    factors_verified: factors,
                    established_at: now,
                    expires_at: now + self.config.session_ttl,
                };
                sessions.insert(username.to_string(), s.clone());
                s
            }
        }
    }
}
