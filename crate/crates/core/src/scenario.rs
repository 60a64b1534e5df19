//! Protocol client that replays the evaluation scenarios against a server
//! and checks the observed message sequence.
//!
//! | id | request                  | context  | expected sequence             |
//! |----|--------------------------|----------|-------------------------------|
//! | S1 | default                  | on site  | Request, Accept               |
//! | S2 | root                     | on site  | Request, Challenge, Request, Accept |
//! | S3 | default                  | off site | Request, Challenge, Request, Accept |
//! | E1 | default, later root      | on site  | Request, Accept, then S2's four |
//!
//! The server decides context from its own clock and the NAS-IP-Address
//! attribute, so off-site scenarios are driven by the NAS address the client
//! reports.

use std::fmt;
use std::io::{self, ErrorKind};
use std::net::{Ipv4Addr, SocketAddr, UdpSocket};
use std::path::PathBuf;
use std::str::FromStr;
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use thiserror::Error;

use crate::auth::{latest_otp, Role};
use crate::policy::RequestedAction;
use crate::server::grant_message;
use crate::wire::{
    attr, hide_password, service_type, verify_response_authenticator, Authenticator, Code, Packet,
    PasswordError, WireError, MAX_PACKET_LEN,
};

/// NAS address reported by the off-site scenario (TEST-NET-3).
pub const OFF_SITE_ADDRESS: Ipv4Addr = Ipv4Addr::new(203, 0, 113, 7);

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("no response to id={identifier} after {attempts} attempts")]
    Timeout { identifier: u8, attempts: u32 },
    #[error("sequence mismatch: expected [{}], observed [{}]", names(.expected), names(.observed))]
    SequenceMismatch {
        expected: Vec<Code>,
        observed: Vec<Code>,
    },
    #[error("response authenticator for id={identifier} does not verify")]
    AuthenticatorMismatch { identifier: u8 },
    #[error("expected final role {expected}, reply said {observed:?}")]
    RoleMismatch {
        expected: Role,
        observed: Option<String>,
    },
    #[error("challenge carried no State attribute")]
    MissingState,
    #[error("no OTP delivered to channel {channel:?}")]
    OtpUnavailable { channel: String },
    #[error("reading OTP delivery log: {0}")]
    DeliveryLog(io::Error),
    #[error("socket: {0}")]
    Io(#[from] io::Error),
    #[error("wire: {0}")]
    Wire(#[from] WireError),
    #[error("password: {0}")]
    Password(#[from] PasswordError),
}

fn names(codes: &[Code]) -> String {
    codes
        .iter()
        .map(|c| c.name())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Fields of one outbound Access-Request.
#[derive(Debug, Clone, Default)]
pub struct AccessRequest<'a> {
    pub username: Option<&'a str>,
    pub password: Option<&'a [u8]>,
    pub action: Option<RequestedAction>,
    pub nas_ip: Option<Ipv4Addr>,
    pub state: Option<&'a [u8]>,
}

impl<'a> AccessRequest<'a> {
    pub fn new(username: &'a str, password: &'a [u8]) -> Self {
        Self {
            username: Some(username),
            password: Some(password),
            ..Self::default()
        }
    }

    pub fn action(mut self, action: RequestedAction) -> Self {
        self.action = Some(action);
        self
    }

    pub fn nas_ip(mut self, addr: Ipv4Addr) -> Self {
        self.nas_ip = Some(addr);
        self
    }

    pub fn state(mut self, state: &'a [u8]) -> Self {
        self.state = Some(state);
        self
    }

    /// Builds the packet, hiding the password under `secret` and `ra`.
    pub fn to_packet(
        &self,
        identifier: u8,
        ra: Authenticator,
        secret: &[u8],
    ) -> Result<Packet, PasswordError> {
        let mut packet = Packet::new(Code::AccessRequest, identifier, ra);
        if let Some(user) = self.username {
            packet = packet.with_attribute(attr::USER_NAME, user);
        }
        if let Some(pw) = self.password {
            packet = packet.with_attribute(
                attr::USER_PASSWORD,
                hide_password(pw, secret, &ra)?.into_bytes(),
            );
        }
        if let Some(action) = self.action {
            let value = match action {
                RequestedAction::DefaultAccess => service_type::LOGIN_USER,
                RequestedAction::RootAccess => service_type::ADMINISTRATIVE_USER,
            };
            packet = packet.with_attribute(attr::SERVICE_TYPE, value.to_be_bytes());
        }
        if let Some(ip) = self.nas_ip {
            packet = packet.with_attribute(attr::NAS_IP_ADDRESS, ip.octets());
        }
        if let Some(state) = self.state {
            packet = packet.with_attribute(attr::STATE, state);
        }
        Ok(packet)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioId {
    S1DefaultLowSec,
    S2RootHighSec,
    S3DefaultHighSec,
    E1Escalation,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 4] = [
        ScenarioId::S1DefaultLowSec,
        ScenarioId::S2RootHighSec,
        ScenarioId::S3DefaultHighSec,
        ScenarioId::E1Escalation,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            ScenarioId::S1DefaultLowSec => "S1",
            ScenarioId::S2RootHighSec => "S2",
            ScenarioId::S3DefaultHighSec => "S3",
            ScenarioId::E1Escalation => "E1",
        }
    }

    /// Actions requested in order; each may be answered with a challenge.
    pub fn steps(self) -> &'static [RequestedAction] {
        use RequestedAction::*;
        match self {
            ScenarioId::S1DefaultLowSec | ScenarioId::S3DefaultHighSec => &[DefaultAccess],
            ScenarioId::S2RootHighSec => &[RootAccess],
            ScenarioId::E1Escalation => &[DefaultAccess, RootAccess],
        }
    }

    pub fn expected_sequence(self) -> Vec<Code> {
        use Code::*;
        match self {
            ScenarioId::S1DefaultLowSec => vec![AccessRequest, AccessAccept],
            ScenarioId::S2RootHighSec | ScenarioId::S3DefaultHighSec => {
                vec![AccessRequest, AccessChallenge, AccessRequest, AccessAccept]
            }
            ScenarioId::E1Escalation => vec![
                AccessRequest,
                AccessAccept,
                AccessRequest,
                AccessChallenge,
                AccessRequest,
                AccessAccept,
            ],
        }
    }

    pub fn expected_role(self) -> Role {
        match self {
            ScenarioId::S1DefaultLowSec | ScenarioId::S3DefaultHighSec => Role::Default,
            ScenarioId::S2RootHighSec | ScenarioId::E1Escalation => Role::Root,
        }
    }

    pub fn default_source(self) -> SourceProfile {
        match self {
            ScenarioId::S3DefaultHighSec => SourceProfile::Nas(OFF_SITE_ADDRESS),
            _ => SourceProfile::Peer,
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for ScenarioId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScenarioId::ALL
            .into_iter()
            .find(|id| id.short_name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown scenario {s:?}, expected S1, S2, S3 or E1"))
    }
}

/// Which address the server should judge the request's location by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceProfile {
    /// No NAS-IP-Address; the datagram source is used.
    Peer,
    Nas(Ipv4Addr),
}

impl SourceProfile {
    fn nas_ip(self) -> Option<Ipv4Addr> {
        match self {
            SourceProfile::Peer => None,
            SourceProfile::Nas(ip) => Some(ip),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioScript {
    pub id: ScenarioId,
    pub username: String,
    pub password: Vec<u8>,
    pub otp_source: PathBuf,
    pub otp_channel: String,
    pub source: SourceProfile,
    pub expected_sequence: Vec<Code>,
    pub expected_role: Role,
}

impl ScenarioScript {
    /// Script with the scenario's standard expectations; the OTP channel
    /// defaults to the username.
    pub fn new(
        id: ScenarioId,
        username: &str,
        password: &[u8],
        otp_source: impl Into<PathBuf>,
    ) -> Self {
        Self {
            id,
            username: username.to_string(),
            password: password.to_vec(),
            otp_source: otp_source.into(),
            otp_channel: username.to_string(),
            source: id.default_source(),
            expected_sequence: id.expected_sequence(),
            expected_role: id.expected_role(),
        }
    }
}

/// Fixture usernames, one per scenario so earlier sessions do not leak into
/// later scenarios.
pub fn fixture_username(id: ScenarioId) -> &'static str {
    match id {
        ScenarioId::S1DefaultLowSec => "alice",
        ScenarioId::S2RootHighSec => "bob",
        ScenarioId::S3DefaultHighSec => "carol",
        ScenarioId::E1Escalation => "dave",
    }
}

pub fn fixture_scripts(password: &[u8], otp_source: impl Into<PathBuf>) -> Vec<ScenarioScript> {
    let otp_source = otp_source.into();
    ScenarioId::ALL
        .into_iter()
        .map(|id| ScenarioScript::new(id, fixture_username(id), password, otp_source.clone()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Sent,
    Received,
}

#[derive(Debug, Clone)]
pub struct TranscriptEntry {
    pub direction: Direction,
    pub at: DateTime<Utc>,
    pub code: Code,
    pub identifier: u8,
    pub attribute_types: Vec<u8>,
    /// Exact datagram as sent or received.
    pub datagram: Vec<u8>,
}

impl fmt::Display for TranscriptEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arrow = match self.direction {
            Direction::Sent => "→",
            Direction::Received => "←",
        };
        let attrs: Vec<String> = self
            .attribute_types
            .iter()
            .map(|t| attr::name(*t))
            .collect();
        write!(
            f,
            "{arrow} {} id={} attrs=[{}]",
            self.code.name(),
            self.identifier,
            attrs.join(", ")
        )
    }
}

#[derive(Debug)]
pub struct Transcript {
    pub scenario: ScenarioId,
    pub entries: Vec<TranscriptEntry>,
    pub verdict: Result<(), ScenarioError>,
}

impl Transcript {
    pub fn passed(&self) -> bool {
        self.verdict.is_ok()
    }

    pub fn codes(&self) -> Vec<Code> {
        self.entries.iter().map(|e| e.code).collect()
    }

    /// Reply-Message of the last received packet.
    pub fn final_reply(&self) -> Option<String> {
        let last = self
            .entries
            .iter()
            .rev()
            .find(|e| e.direction == Direction::Received)?;
        let packet = Packet::decode(&last.datagram).ok()?;
        packet
            .attribute(attr::REPLY_MESSAGE)
            .map(|m| String::from_utf8_lossy(m).into_owned())
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for entry in &self.entries {
            writeln!(f, "{entry}")?;
        }
        match &self.verdict {
            Ok(()) => write!(f, "PASS {}", self.scenario),
            Err(e) => write!(f, "FAIL {}: {e}", self.scenario),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ClientOptions {
    pub timeout: Duration,
    pub retries: u32,
}

impl Default for ClientOptions {
    fn default() -> Self {
        Self {
            timeout: Duration::from_secs(2),
            retries: 3,
        }
    }
}

/// One UDP association with the server, recording every exchange.
pub struct ProtocolClient {
    socket: UdpSocket,
    secret: Vec<u8>,
    options: ClientOptions,
    next_id: u8,
    pub entries: Vec<TranscriptEntry>,
}

impl ProtocolClient {
    pub fn connect(server: SocketAddr, secret: &[u8], options: ClientOptions) -> io::Result<Self> {
        let local: SocketAddr = if server.is_ipv4() {
            (Ipv4Addr::UNSPECIFIED, 0).into()
        } else {
            (std::net::Ipv6Addr::UNSPECIFIED, 0).into()
        };
        let socket = UdpSocket::bind(local)?;
        socket.connect(server)?;
        Ok(Self {
            socket,
            secret: secret.to_vec(),
            options,
            next_id: rand::random(),
            entries: Vec::new(),
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.socket.local_addr()
    }

    /// Sends a request with a fresh identifier and random Request
    /// Authenticator, retransmitting the same bytes on timeout.
    pub fn exchange(&mut self, request: &AccessRequest<'_>) -> Result<Packet, ScenarioError> {
        let identifier = self.next_id;
        self.next_id = self.next_id.wrapping_add(1);
        let ra: Authenticator = rand::random();
        let packet = request.to_packet(identifier, ra, &self.secret)?;
        let bytes = packet.encode()?;
        self.record(Direction::Sent, &packet, bytes.clone());

        let attempts = self.options.retries + 1;
        for _ in 0..attempts {
            self.socket.send(&bytes)?;
            if let Some(reply) = self.await_reply(identifier)? {
                let response = Packet::decode(&reply)?;
                if !verify_response_authenticator(&response, &ra, &self.secret) {
                    self.record(Direction::Received, &response, reply);
                    return Err(ScenarioError::AuthenticatorMismatch { identifier });
                }
                self.record(Direction::Received, &response, reply);
                return Ok(response);
            }
        }
        Err(ScenarioError::Timeout {
            identifier,
            attempts,
        })
    }

    fn await_reply(&self, identifier: u8) -> Result<Option<Vec<u8>>, ScenarioError> {
        let deadline = Instant::now() + self.options.timeout;
        let mut buf = vec![0u8; MAX_PACKET_LEN];
        loop {
            let remaining = deadline.saturating_duration_since(Instant::now());
            if remaining.is_zero() {
                return Ok(None);
            }
            self.socket.set_read_timeout(Some(remaining))?;
            match self.socket.recv(&mut buf) {
                // replies to earlier identifiers are stale retransmissions
                Ok(n) if n >= 2 && buf[1] == identifier => return Ok(Some(buf[..n].to_vec())),
                Ok(_) => continue,
                Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {
                    return Ok(None)
                }
                Err(e) if e.kind() == ErrorKind::ConnectionRefused => {
                    std::thread::sleep(remaining.min(Duration::from_millis(50)));
                    return Ok(None);
                }
                Err(e) => return Err(e.into()),
            }
        }
    }

    fn record(&mut self, direction: Direction, packet: &Packet, datagram: Vec<u8>) {
        self.entries.push(TranscriptEntry {
            direction,
            at: Utc::now(),
            code: packet.code,
            identifier: packet.identifier,
            attribute_types: packet.attributes.iter().map(|a| a.attr_type).collect(),
            datagram,
        });
    }
}

pub fn run_scenario(
    script: &ScenarioScript,
    server: SocketAddr,
    secret: &[u8],
    options: ClientOptions,
) -> Transcript {
    let mut client = match ProtocolClient::connect(server, secret, options) {
        Ok(c) => c,
        Err(e) => {
            return Transcript {
                scenario: script.id,
                entries: Vec::new(),
                verdict: Err(e.into()),
            }
        }
    };
    let verdict = drive(script, &mut client);
    Transcript {
        scenario: script.id,
        entries: std::mem::take(&mut client.entries),
        verdict,
    }
}

fn drive(script: &ScenarioScript, client: &mut ProtocolClient) -> Result<(), ScenarioError> {
    let nas_ip = script.source.nas_ip();
    let mut last = None;
    for &action in script.id.steps() {
        let mut request = AccessRequest::new(&script.username, &script.password).action(action);
        request.nas_ip = nas_ip;
        let mut response = client.exchange(&request)?;

        if response.code == Code::AccessChallenge {
            let state = response
                .attribute(attr::STATE)
                .ok_or(ScenarioError::MissingState)?
                .to_vec();
            let otp = latest_otp(&script.otp_source, &script.otp_channel)
                .map_err(ScenarioError::DeliveryLog)?
                .ok_or_else(|| ScenarioError::OtpUnavailable {
                    channel: script.otp_channel.clone(),
                })?;
            let mut answer = AccessRequest::new(&script.username, otp.as_bytes())
                .action(action)
                .state(&state);
            answer.nas_ip = nas_ip;
            response = client.exchange(&answer)?;
        }
        let accepted = response.code == Code::AccessAccept;
        last = Some(response);
        if !accepted {
            break;
        }
    }

    let observed: Vec<Code> = client.entries.iter().map(|e| e.code).collect();
    if observed != script.expected_sequence {
        return Err(ScenarioError::SequenceMismatch {
            expected: script.expected_sequence.clone(),
            observed,
        });
    }
    let reply = last
        .as_ref()
        .and_then(|p| p.attribute(attr::REPLY_MESSAGE))
        .map(|m| String::from_utf8_lossy(m).into_owned());
    if reply.as_deref() != Some(grant_message(script.expected_role).as_str()) {
        return Err(ScenarioError::RoleMismatch {
            expected: script.expected_role,
            observed: reply,
        });
    }
    Ok(())
}

/// Runs the scripts in order; each transcript is independent.
pub fn run_all(
    scripts: &[ScenarioScript],
    server: SocketAddr,
    secret: &[u8],
    options: ClientOptions,
) -> Vec<Transcript> {
    scripts
        .iter()
        .map(|s| run_scenario(s, server, secret, options))
        .collect()
}
