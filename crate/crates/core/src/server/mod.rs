//! The authentication daemon: datagram handling and the UDP run loop.

mod config;
mod dedup;
mod runtime;

pub use config::{ClientEntry, ConfigError, ServerConfig, DEFAULT_PORT};
pub use dedup::{Admission, DedupCache};
pub use runtime::{bind_socket, run_server, serve, BackgroundServer};

use std::net::{IpAddr, Ipv4Addr, SocketAddr};

use chrono::{DateTime, Duration, Utc};
use thiserror::Error;

use crate::auth::{
    AuthDecision, AuthService, DeliveryLog, RejectReason, Role, StateToken, StoreError, UserStore,
};
use crate::context::{snapshot_context, ContextConfig};
use crate::events::EventLog;
use crate::policy::RequestedAction;
use crate::wire::{
    attr, build_response, recover_password, service_type, Attribute, Code, HiddenPassword, Packet,
    PasswordError,
};

pub const REJECT_MESSAGE: &str = "access denied";

pub fn grant_message(role: Role) -> String {
    format!("granted: {role}")
}

#[derive(Debug, Error)]
pub enum ServerError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("loading user store {path}: {source}")]
    UserStore { path: String, source: StoreError },
    #[error("opening delivery log {path}: {source}")]
    DeliveryLog {
        path: String,
        source: std::io::Error,
    },
    #[error("binding {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        source: std::io::Error,
    },
    #[error("socket: {0}")]
    Io(#[from] std::io::Error),
}

/// Parsed request fields, before any authentication decision.
struct Request<'a> {
    username: Option<String>,
    password: Option<Vec<u8>>,
    action: RequestedAction,
    source: Ipv4Addr,
    state: Option<&'a [u8]>,
}

#[derive(Debug)]
pub struct Server {
    clients: Vec<ClientEntry>,
    context: ContextConfig,
    auth: AuthService,
    dedup: DedupCache,
    events: EventLog,
}

impl Server {
    pub fn new(
        clients: Vec<ClientEntry>,
        context: ContextConfig,
        auth: AuthService,
        dedup_window: Duration,
        events: EventLog,
    ) -> Self {
        Self {
            clients,
            context,
            auth,
            dedup: DedupCache::new(dedup_window),
            events,
        }
    }

    /// Loads the user store and opens the delivery log named in `config`.
    pub fn from_config(config: &ServerConfig, events: EventLog) -> Result<Self, ServerError> {
        let users =
            UserStore::load(&config.user_store_path).map_err(|source| ServerError::UserStore {
                path: config.user_store_path.display().to_string(),
                source,
            })?;
        let delivery = DeliveryLog::open(&config.delivery_log_path).map_err(|source| {
            ServerError::DeliveryLog {
                path: config.delivery_log_path.display().to_string(),
                source,
            }
        })?;
        let auth = AuthService::new(users, config.auth, delivery, events.clone());
        Ok(Self::new(
            config.clients.clone(),
            config.context.clone(),
            auth,
            config.dedup_window,
            events,
        ))
    }

    pub fn auth(&self) -> &AuthService {
        &self.auth
    }

    pub fn dedup(&self) -> &DedupCache {
        &self.dedup
    }

    fn client_for(&self, peer: &SocketAddr) -> Option<&ClientEntry> {
        let ip = match peer.ip() {
            IpAddr::V4(v4) => v4,
            IpAddr::V6(v6) => v6.to_ipv4_mapped()?,
        };
        self.clients.iter().find(|c| c.matches(ip))
    }

    /// Handles one datagram and returns the reply to send, if any.
    pub fn handle_datagram(
        &self,
        bytes: &[u8],
        peer: SocketAddr,
        now: DateTime<Utc>,
    ) -> Option<Vec<u8>> {
        let peer_label = peer.to_string();
        let Some(client) = self.client_for(&peer) else {
            self.events
                .event(now, "drop", &peer_label, "unknown client");
            return None;
        };
        let request = match Packet::decode(bytes) {
            Ok(p) if p.code == Code::AccessRequest => p,
            Ok(p) => {
                self.events.event(
                    now,
                    "drop",
                    &peer_label,
                    format_args!("unexpected {}", p.code),
                );
                return None;
            }
            Err(e) => {
                self.events.event(now, "drop", &peer_label, e);
                return None;
            }
        };

        match self
            .dedup
            .admit(peer, request.identifier, &request.authenticator, now)
        {
            Admission::Fresh => {}
            Admission::Replay(bytes) => {
                self.events.event(
                    now,
                    "replay",
                    &peer_label,
                    format_args!("id={}", request.identifier),
                );
                return Some(bytes);
            }
            Admission::Drop => {
                self.events.event(
                    now,
                    "drop",
                    &peer_label,
                    format_args!("duplicate id={}", request.identifier),
                );
                return None;
            }
        }

        let response = self.respond(&request, client, &peer, now);
        let encoded = match response.encode() {
            Ok(b) => Some(b),
            Err(e) => {
                self.events.event(
                    now,
                    "drop",
                    &peer_label,
                    format_args!("encoding response: {e}"),
                );
                None
            }
        };
        self.dedup.complete(
            peer,
            request.identifier,
            &request.authenticator,
            encoded.clone(),
        );
        encoded
    }

    fn respond(
        &self,
        request: &Packet,
        client: &ClientEntry,
        peer: &SocketAddr,
        now: DateTime<Utc>,
    ) -> Packet {
        let peer_ip = match peer.ip() {
            IpAddr::V4(v4) => v4,
            IpAddr::V6(v6) => v6.to_ipv4_mapped().unwrap_or(Ipv4Addr::UNSPECIFIED),
        };
        let decision = match self.parse_request(request, client, peer_ip, now) {
            Ok(req) => self.decide(req, now),
            Err(reason) => AuthDecision::Reject(reason),
        };

        let (code, attributes) = match decision {
            AuthDecision::Accept(role) => (
                Code::AccessAccept,
                vec![Attribute::new(attr::REPLY_MESSAGE, grant_message(role))],
            ),
            AuthDecision::Challenge {
                state_token,
                prompt,
            } => (
                Code::AccessChallenge,
                vec![
                    Attribute::new(attr::STATE, state_token.as_bytes().to_vec()),
                    Attribute::new(attr::REPLY_MESSAGE, prompt),
                ],
            ),
            AuthDecision::Reject(_) => (
                Code::AccessReject,
                vec![Attribute::new(attr::REPLY_MESSAGE, REJECT_MESSAGE)],
            ),
        };
        build_response(request, code, attributes, &client.shared_secret)
    }

    fn parse_request<'a>(
        &self,
        packet: &'a Packet,
        client: &ClientEntry,
        peer_ip: Ipv4Addr,
        now: DateTime<Utc>,
    ) -> Result<Request<'a>, RejectReason> {
        let username = match packet.attribute(attr::USER_NAME) {
            Some(raw) => Some(
                std::str::from_utf8(raw)
                    .map_err(|_| RejectReason::MalformedRequest)?
                    .to_string(),
            ),
            None => None,
        };
        let subject = username.as_deref().unwrap_or("-");

        let password = match packet.attribute(attr::USER_PASSWORD) {
            Some(raw) => {
                let hidden =
                    HiddenPassword::from_bytes(raw).map_err(|_| RejectReason::MalformedRequest)?;
                match recover_password(&hidden, &client.shared_secret, &packet.authenticator) {
                    Ok(p) => Some(p),
                    Err(PasswordError::AllPadRecovered) => {
                        self.events.event(
                            now,
                            "auth.reject",
                            subject,
                            "password decodes to padding",
                        );
                        return Err(RejectReason::BadCredentials);
                    }
                    Err(_) => return Err(RejectReason::MalformedRequest),
                }
            }
            None => None,
        };

        let action = match packet.attribute(attr::SERVICE_TYPE) {
            None => RequestedAction::DefaultAccess,
            Some(raw) => {
                let raw: [u8; 4] = raw.try_into().map_err(|_| RejectReason::MalformedRequest)?;
                match u32::from_be_bytes(raw) {
                    service_type::LOGIN_USER => RequestedAction::DefaultAccess,
                    service_type::ADMINISTRATIVE_USER => RequestedAction::RootAccess,
                    _ => return Err(RejectReason::MalformedRequest),
                }
            }
        };

        let source = match packet.attribute(attr::NAS_IP_ADDRESS) {
            None => peer_ip,
            Some(raw) => {
                let raw: [u8; 4] = raw.try_into().map_err(|_| RejectReason::MalformedRequest)?;
                Ipv4Addr::from(raw)
            }
        };

        Ok(Request {
            username,
            password,
            action,
            source,
            state: packet.attribute(attr::STATE),
        })
    }

    fn decide(&self, req: Request<'_>, now: DateTime<Utc>) -> AuthDecision {
        let snapshot = snapshot_context(req.source, now, &self.context);

        if let Some(raw_state) = req.state {
            let Some(token) = StateToken::from_slice(raw_state) else {
                return AuthDecision::Reject(RejectReason::UnknownChallenge);
            };
            let (Some(username), Some(otp)) = (req.username.as_deref(), req.password.as_deref())
            else {
                return AuthDecision::Reject(RejectReason::MalformedRequest);
            };
            // the token must belong to the user answering it
            match self.auth.pending_challenge(&token) {
                Some(c) if c.username == username => {}
                Some(_) => {
                    self.events.event(
                        now,
                        "auth.reject",
                        username,
                        "state token owned by another user",
                    );
                    return AuthDecision::Reject(RejectReason::UnknownChallenge);
                }
                None => {
                    self.events
                        .event(now, "auth.reject", username, "unknown state token");
                    return AuthDecision::Reject(RejectReason::UnknownChallenge);
                }
            }
            return self
                .auth
                .complete_challenge(&token, &String::from_utf8_lossy(otp), now);
        }

        let existing = req
            .username
            .as_deref()
            .and_then(|u| self.auth.active_session(u, now));
        self.auth.authenticate(
            req.username.as_deref(),
            req.password.as_deref(),
            req.action,
            &snapshot,
            existing.as_ref(),
        )
    }

    pub fn flush(&self) -> std::io::Result<()> {
        self.auth.delivery().flush()
    }
}

#[cfg(test)]
mod tests;
