//! Context-aware multi-factor authentication over a RADIUS-style protocol.
//!
//! The required number of factors follows from two context facts (server
//! time inside working hours, source address inside a trusted network) and
//! the requested privilege. One factor is a username and password hidden
//! with the shared-secret MD5 chain; the second is a one-time password sent
//! over a simulated out-of-band channel.

pub mod auth;
pub mod clock;
pub mod context;
pub mod events;
pub mod policy;
pub mod scenario;
pub mod server;
pub mod wire;

pub use auth::{AuthDecision, AuthService, RejectReason, Role, Session};
pub use context::{
    evaluate_plausibility, snapshot_context, ContextConfig, ContextSnapshot, ContextVerdict,
};
pub use policy::{required_security, RequestedAction, SecurityLevel};
pub use wire::{Code, Packet};
