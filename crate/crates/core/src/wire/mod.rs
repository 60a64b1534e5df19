//! RADIUS-style packet codec and the shared-secret password transform.

mod packet;
mod password;

pub use packet::{
    build_response, compute_response_authenticator, decode_packet, encode_packet,
    verify_response_authenticator, Attribute, Authenticator, Code, Packet, AUTHENTICATOR_LEN,
    HEADER_LEN, MAX_ATTRIBUTE_VALUE_LEN, MAX_PACKET_LEN,
};
pub use password::{hide_password, recover_password, HiddenPassword, BLOCK_LEN, MAX_PASSWORD_LEN};

use thiserror::Error;

/// Attribute type numbers understood by this crate.
pub mod attr {
    pub const USER_NAME: u8 = 1;
    pub const USER_PASSWORD: u8 = 2;
    pub const NAS_IP_ADDRESS: u8 = 4;
    pub const SERVICE_TYPE: u8 = 6;
    pub const REPLY_MESSAGE: u8 = 18;
    pub const STATE: u8 = 24;

    pub fn name(attr_type: u8) -> String {
        match attr_type {
            USER_NAME => "User-Name".into(),
            USER_PASSWORD => "User-Password".into(),
            NAS_IP_ADDRESS => "NAS-IP-Address".into(),
            SERVICE_TYPE => "Service-Type".into(),
            REPLY_MESSAGE => "Reply-Message".into(),
            STATE => "State".into(),
            other => format!("Attr-{other}"),
        }
    }
}

/// Service-Type values.
pub mod service_type {
    pub const LOGIN_USER: u32 = 1;
    pub const ADMINISTRATIVE_USER: u32 = 6;
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("attribute {attr_type} value is {len} octets, limit is 253")]
    AttributeTooLong { attr_type: u8, len: usize },
    #[error("attribute type 0 is not encodable")]
    InvalidAttributeType,
    #[error("packet would be {0} octets, limit is 4096")]
    PacketTooLong(usize),
    #[error("truncated packet: {available} octets available, declared {declared:?}")]
    Truncated {
        declared: Option<usize>,
        available: usize,
    },
    #[error("declared packet length {0} outside 20..=4096")]
    InvalidLength(usize),
    #[error("malformed attribute at offset {offset}")]
    MalformedAttribute { offset: usize },
    #[error("unknown packet code {0}")]
    UnknownCode(u8),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PasswordError {
    #[error("password is empty")]
    EmptyPassword,
    #[error("password is {0} octets, limit is 128")]
    PasswordTooLong(usize),
    #[error("password contains a 0x00 octet")]
    PasswordContainsPad,
    #[error("shared secret is empty")]
    EmptySecret,
    #[error("hidden password length {0} is not a multiple of 16 in 16..=128")]
    BadLength(usize),
    #[error("recovered password is empty after removing padding")]
    AllPadRecovered,
}
