//! Byte-exact checks against vectors produced by `oracle/gen_vectors.py`,
//! a standalone hashlib script that shares no code with this crate.

mod common;

use common::vectors::HIDE_VECTORS;
use contextauth::wire::{
    attr, compute_response_authenticator, hide_password, recover_password, Attribute, Code,
    HiddenPassword, Packet,
};

const FULL_REQUEST: &str = "012a0033101112131415161718191a1b1c1d1e1f0107616c6963650212d2fbb2336b9656fb7a975abab9c9a5b6060600000006";
const ACCEPT_AUTHENTICATOR: &str = "591e0ce633a5da2b19c721797d2b5f10";

fn ra(hex_str: &str) -> [u8; 16] {
    hex::decode(hex_str).unwrap().try_into().unwrap()
}

#[test]
fn hide_matches_oracle() {
    assert!(HIDE_VECTORS.len() >= 11);
    for (plain, secret, ra_hex, expected) in HIDE_VECTORS {
        let plain = hex::decode(plain).unwrap();
        let secret = hex::decode(secret).unwrap();
        let hidden = hide_password(&plain, &secret, &ra(ra_hex)).unwrap();
        assert_eq!(
            hex::encode(hidden.as_bytes()),
            *expected,
            "plaintext {}",
            String::from_utf8_lossy(&plain)
        );
        assert_eq!(
            recover_password(&hidden, &secret, &ra(ra_hex)).unwrap(),
            plain
        );
    }
}

#[test]
fn wrong_secret_does_not_recover_the_hello_vector() {
    let (_, _, ra_hex, hidden) = HIDE_VECTORS[0];
    let hidden = HiddenPassword::from_bytes(&hex::decode(hidden).unwrap()).unwrap();
    let got = recover_password(&hidden, b"secreT", &ra(ra_hex));
    assert_ne!(got.as_deref().ok(), Some(&b"hello"[..]));
}

#[test]
fn full_request_image_matches_oracle() {
    let request_ra = ra("101112131415161718191a1b1c1d1e1f");
    let hidden = hide_password(b"hunter2", b"testing123", &request_ra).unwrap();
    let packet = Packet::new(Code::AccessRequest, 42, request_ra)
        .with_attribute(attr::USER_NAME, "alice")
        .with_attribute(attr::USER_PASSWORD, hidden.into_bytes())
        .with_attribute(attr::SERVICE_TYPE, 6u32.to_be_bytes());
    let bytes = packet.encode().unwrap();
    assert_eq!(hex::encode(&bytes), FULL_REQUEST);
    assert_eq!(Packet::decode(&bytes).unwrap(), packet);
}

#[test]
fn response_authenticator_matches_oracle() {
    let response = Packet {
        code: Code::AccessAccept,
        identifier: 42,
        authenticator: [0; 16],
        attributes: vec![Attribute::new(attr::REPLY_MESSAGE, "granted: default")],
    };
    let digest = compute_response_authenticator(
        &response,
        &ra("101112131415161718191a1b1c1d1e1f"),
        b"testing123",
    );
    assert_eq!(hex::encode(digest), ACCEPT_AUTHENTICATOR);
}
