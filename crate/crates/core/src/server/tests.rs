use std::sync::{Arc, Mutex};

use chrono::{FixedOffset, NaiveTime, TimeZone, Weekday};

use super::*;
use crate::auth::{AuthConfig, Delivery, UserRecord};
use crate::scenario::AccessRequest;
use crate::wire::{verify_response_authenticator, Authenticator};

const SECRET: &[u8] = b"testing123";
const PASSWORD: &[u8] = b"correct horse";

struct Fixture {
    server: Server,
    sent: Arc<Mutex<Vec<Delivery>>>,
    log: Arc<Mutex<Vec<String>>>,
}

fn fixture() -> Fixture {
    let users = UserStore::new([
        UserRecord::new("alice", PASSWORD, "alice"),
        UserRecord::new("bob", PASSWORD, "bob"),
    ])
    .unwrap();
    let (delivery, sent) = DeliveryLog::memory();
    let (events, log) = EventLog::memory();
    let context = ContextConfig::new(
        [
            Weekday::Mon,
            Weekday::Tue,
            Weekday::Wed,
            Weekday::Thu,
            Weekday::Fri,
        ],
        NaiveTime::from_hms_opt(8, 0, 0).unwrap(),
        NaiveTime::from_hms_opt(18, 0, 0).unwrap(),
        FixedOffset::east_opt(0).unwrap(),
        vec![
            "127.0.0.0/8".parse().unwrap(),
            "10.0.0.0/8".parse().unwrap(),
        ],
    )
    .unwrap();
    let auth = AuthService::new(users, AuthConfig::default(), delivery, events.clone());
    let server = Server::new(
        vec![ClientEntry::new("127.0.0.0/8".parse().unwrap(), SECRET)],
        context,
        auth,
        Duration::seconds(30),
        events,
    );
    Fixture { server, sent, log }
}

fn now() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2026, 10, 13, 10, 0, 0).unwrap()
}

fn peer() -> SocketAddr {
    "127.0.0.1:50000".parse().unwrap()
}

fn send(
    fx: &Fixture,
    req: &AccessRequest<'_>,
    id: u8,
    at: DateTime<Utc>,
) -> (Option<Packet>, Authenticator) {
    let ra: Authenticator = rand::random();
    let bytes = req.to_packet(id, ra, SECRET).unwrap().encode().unwrap();
    let reply = fx.server.handle_datagram(&bytes, peer(), at).map(|b| {
        let p = Packet::decode(&b).unwrap();
        assert_eq!(p.identifier, id);
        assert!(verify_response_authenticator(&p, &ra, SECRET));
        p
    });
    (reply, ra)
}

fn reply_message(p: &Packet) -> String {
    String::from_utf8(p.attribute(attr::REPLY_MESSAGE).unwrap().to_vec()).unwrap()
}

#[test]
fn scenario_one_single_accept() {
    let fx = fixture();
    let (reply, _) = send(&fx, &AccessRequest::new("alice", PASSWORD), 1, now());
    let reply = reply.unwrap();
    assert_eq!(reply.code, Code::AccessAccept);
    assert_eq!(reply_message(&reply), "granted: default");
}

#[test]
fn scenario_two_challenge_then_accept() {
    let fx = fixture();
    let req = AccessRequest::new("alice", PASSWORD).action(RequestedAction::RootAccess);
    let challenge = send(&fx, &req, 1, now()).0.unwrap();
    assert_eq!(challenge.code, Code::AccessChallenge);
    let state = challenge.attribute(attr::STATE).unwrap().to_vec();
    assert_eq!(state.len(), 16);

    let otp = fx.sent.lock().unwrap().last().unwrap().otp.clone();
    let answer = AccessRequest::new("alice", otp.as_bytes())
        .action(RequestedAction::RootAccess)
        .state(&state);
    let accept = send(&fx, &answer, 2, now()).0.unwrap();
    assert_eq!(accept.code, Code::AccessAccept);
    assert_eq!(reply_message(&accept), "granted: root");
}

#[test]
fn off_site_nas_address_forces_challenge() {
    let fx = fixture();
    let req = AccessRequest::new("alice", PASSWORD).nas_ip(Ipv4Addr::new(203, 0, 113, 7));
    assert_eq!(
        send(&fx, &req, 1, now()).0.unwrap().code,
        Code::AccessChallenge
    );
    // trusted NAS address keeps it low
    let req = AccessRequest::new("bob", PASSWORD).nas_ip(Ipv4Addr::new(10, 9, 9, 9));
    assert_eq!(
        send(&fx, &req, 2, now()).0.unwrap().code,
        Code::AccessAccept
    );
}

#[test]
fn out_of_hours_forces_challenge() {
    let fx = fixture();
    let night = Utc.with_ymd_and_hms(2026, 10, 13, 22, 0, 0).unwrap();
    let reply = send(&fx, &AccessRequest::new("alice", PASSWORD), 1, night)
        .0
        .unwrap();
    assert_eq!(reply.code, Code::AccessChallenge);
}

#[test]
fn unknown_peer_is_dropped() {
    let fx = fixture();
    let bytes = AccessRequest::new("alice", PASSWORD)
        .to_packet(1, [0; 16], SECRET)
        .unwrap()
        .encode()
        .unwrap();
    let stranger: SocketAddr = "192.0.2.10:1812".parse().unwrap();
    assert!(fx.server.handle_datagram(&bytes, stranger, now()).is_none());
}

#[test]
fn garbage_and_non_requests_are_dropped() {
    let fx = fixture();
    assert!(fx
        .server
        .handle_datagram(&[1, 2, 3], peer(), now())
        .is_none());
    let accept = Packet::new(Code::AccessAccept, 1, [0; 16])
        .encode()
        .unwrap();
    assert!(fx.server.handle_datagram(&accept, peer(), now()).is_none());
}

#[test]
fn wrong_password_rejected_uniformly() {
    let fx = fixture();
    let wrong = send(&fx, &AccessRequest::new("alice", b"nope"), 1, now())
        .0
        .unwrap();
    let unknown = send(&fx, &AccessRequest::new("nobody", PASSWORD), 2, now())
        .0
        .unwrap();
    assert_eq!(wrong.code, Code::AccessReject);
    assert_eq!(unknown.code, Code::AccessReject);
    assert_eq!(wrong.attributes, unknown.attributes);
}

#[test]
fn malformed_requests_rejected() {
    let fx = fixture();
    let no_password = AccessRequest {
        username: Some("alice"),
        ..Default::default()
    };
    assert_eq!(
        send(&fx, &no_password, 1, now()).0.unwrap().code,
        Code::AccessReject
    );

    // unsupported Service-Type
    let mut p = AccessRequest::new("alice", PASSWORD)
        .to_packet(2, [5; 16], SECRET)
        .unwrap();
    p = p.with_attribute(attr::SERVICE_TYPE, 2u32.to_be_bytes());
    let reply = fx
        .server
        .handle_datagram(&p.encode().unwrap(), peer(), now())
        .unwrap();
    assert_eq!(Packet::decode(&reply).unwrap().code, Code::AccessReject);

    // User-Password that is not a whole number of blocks
    let p = Packet::new(Code::AccessRequest, 3, [6; 16])
        .with_attribute(attr::USER_NAME, "alice")
        .with_attribute(attr::USER_PASSWORD, vec![1; 15]);
    let reply = fx
        .server
        .handle_datagram(&p.encode().unwrap(), peer(), now())
        .unwrap();
    assert_eq!(Packet::decode(&reply).unwrap().code, Code::AccessReject);
}

#[test]
fn forged_state_never_accepted() {
    let fx = fixture();
    let forged = [0x42u8; 16];
    let req = AccessRequest::new("alice", b"123456").state(&forged);
    assert_eq!(
        send(&fx, &req, 1, now()).0.unwrap().code,
        Code::AccessReject
    );
    let short = AccessRequest::new("alice", b"123456").state(&[1, 2, 3]);
    assert_eq!(
        send(&fx, &short, 2, now()).0.unwrap().code,
        Code::AccessReject
    );
}

#[test]
fn state_of_another_user_rejected() {
    let fx = fixture();
    let req = AccessRequest::new("alice", PASSWORD).action(RequestedAction::RootAccess);
    let state = send(&fx, &req, 1, now())
        .0
        .unwrap()
        .attribute(attr::STATE)
        .unwrap()
        .to_vec();
    let otp = fx.sent.lock().unwrap().last().unwrap().otp.clone();
    let hijack = AccessRequest::new("bob", otp.as_bytes()).state(&state);
    assert_eq!(
        send(&fx, &hijack, 2, now()).0.unwrap().code,
        Code::AccessReject
    );
    // alice can still answer
    let answer = AccessRequest::new("alice", otp.as_bytes()).state(&state);
    assert_eq!(
        send(&fx, &answer, 3, now()).0.unwrap().code,
        Code::AccessAccept
    );
}

#[test]
fn retransmission_gets_identical_reply() {
    let fx = fixture();
    let bytes = AccessRequest::new("alice", PASSWORD)
        .action(RequestedAction::RootAccess)
        .to_packet(9, [8; 16], SECRET)
        .unwrap()
        .encode()
        .unwrap();
    let first = fx.server.handle_datagram(&bytes, peer(), now()).unwrap();
    let again = fx
        .server
        .handle_datagram(&bytes, peer(), now() + Duration::seconds(3))
        .unwrap();
    assert_eq!(first, again);
    // no second challenge was issued
    assert_eq!(fx.sent.lock().unwrap().len(), 1);
}

#[test]
fn wrong_secret_never_accepted() {
    let fx = fixture();
    for id in 0..50u8 {
        let ra: Authenticator = rand::random();
        let bytes = AccessRequest::new("alice", PASSWORD)
            .to_packet(id, ra, b"not-the-secret")
            .unwrap()
            .encode()
            .unwrap();
        if let Some(reply) = fx.server.handle_datagram(&bytes, peer(), now()) {
            assert_eq!(Packet::decode(&reply).unwrap().code, Code::AccessReject);
        }
    }
}

#[test]
fn logs_never_contain_secrets() {
    let fx = fixture();
    let req = AccessRequest::new("alice", PASSWORD).action(RequestedAction::RootAccess);
    let state = send(&fx, &req, 1, now())
        .0
        .unwrap()
        .attribute(attr::STATE)
        .unwrap()
        .to_vec();
    let otp = fx.sent.lock().unwrap().last().unwrap().otp.clone();
    let wrong = if otp == "000000" { "111111" } else { "000000" };
    send(
        &fx,
        &AccessRequest::new("alice", wrong.as_bytes()).state(&state),
        2,
        now(),
    );
    send(
        &fx,
        &AccessRequest::new("alice", otp.as_bytes()).state(&state),
        3,
        now(),
    );
    send(&fx, &AccessRequest::new("bob", b"bad guess"), 4, now());

    let log = fx.log.lock().unwrap();
    assert!(!log.is_empty());
    for line in log.iter() {
        assert_eq!(line.split('\t').count(), 4, "{line}");
        assert!(!line.contains("correct horse"), "{line}");
        assert!(!line.contains("bad guess"), "{line}");
        assert!(!line.contains(&otp), "{line}");
        assert!(!line.contains("testing123"), "{line}");
    }
}
