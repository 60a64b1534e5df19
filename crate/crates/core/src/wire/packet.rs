use md5::{Digest, Md5};
use subtle::ConstantTimeEq;

use super::WireError;

/// Fixed header: code, identifier, length, authenticator.
pub const HEADER_LEN: usize = 20;
pub const MAX_PACKET_LEN: usize = 4096;
pub const MAX_ATTRIBUTE_VALUE_LEN: usize = 253;
pub const AUTHENTICATOR_LEN: usize = 16;

pub type Authenticator = [u8; AUTHENTICATOR_LEN];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Code {
    AccessRequest = 1,
    AccessAccept = 2,
    AccessReject = 3,
    AccessChallenge = 11,
}

impl Code {
    pub fn name(self) -> &'static str {
        match self {
            Code::AccessRequest => "Access-Request",
            Code::AccessAccept => "Access-Accept",
            Code::AccessReject => "Access-Reject",
            Code::AccessChallenge => "Access-Challenge",
        }
    }

    pub fn is_response(self) -> bool {
        !matches!(self, Code::AccessRequest)
    }
}

impl TryFrom<u8> for Code {
    type Error = WireError;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        match value {
            1 => Ok(Code::AccessRequest),
            2 => Ok(Code::AccessAccept),
            3 => Ok(Code::AccessReject),
            11 => Ok(Code::AccessChallenge),
            other => Err(WireError::UnknownCode(other)),
        }
    }
}

impl std::fmt::Display for Code {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A single type-length-value attribute. Unknown types are carried opaquely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    pub attr_type: u8,
    pub value: Vec<u8>,
}

impl Attribute {
    pub fn new(attr_type: u8, value: impl Into<Vec<u8>>) -> Self {
        Self {
            attr_type,
            value: value.into(),
        }
    }

    pub fn encoded_len(&self) -> usize {
        self.value.len() + 2
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Packet {
    pub code: Code,
    pub identifier: u8,
    pub authenticator: Authenticator,
    pub attributes: Vec<Attribute>,
}

impl Packet {
    pub fn new(code: Code, identifier: u8, authenticator: Authenticator) -> Self {
        Self {
            code,
            identifier,
            authenticator,
            attributes: Vec::new(),
        }
    }

    pub fn with_attribute(mut self, attr_type: u8, value: impl Into<Vec<u8>>) -> Self {
        self.attributes.push(Attribute::new(attr_type, value));
        self
    }

    /// First attribute of the given type.
    pub fn attribute(&self, attr_type: u8) -> Option<&[u8]> {
        self.attributes
            .iter()
            .find(|a| a.attr_type == attr_type)
            .map(|a| a.value.as_slice())
    }

    pub fn encoded_len(&self) -> usize {
        HEADER_LEN
            + self
                .attributes
                .iter()
                .map(Attribute::encoded_len)
                .sum::<usize>()
    }

    pub fn encode(&self) -> Result<Vec<u8>, WireError> {
        for attr in &self.attributes {
            if attr.value.len() > MAX_ATTRIBUTE_VALUE_LEN {
                return Err(WireError::AttributeTooLong {
                    attr_type: attr.attr_type,
                    len: attr.value.len(),
                });
            }
            if attr.attr_type == 0 {
                return Err(WireError::InvalidAttributeType);
            }
        }
        let len = self.encoded_len();
        if len > MAX_PACKET_LEN {
            return Err(WireError::PacketTooLong(len));
        }

        let mut out = Vec::with_capacity(len);
        out.push(self.code as u8);
        out.push(self.identifier);
        out.extend_from_slice(&(len as u16).to_be_bytes());
        out.extend_from_slice(&self.authenticator);
        write_attributes(&self.attributes, &mut out);
        Ok(out)
    }

    /// Decodes one packet. The declared length governs; octets past it are ignored.
    pub fn decode(bytes: &[u8]) -> Result<Self, WireError> {
        if bytes.len() < HEADER_LEN {
            return Err(WireError::Truncated {
                declared: None,
                available: bytes.len(),
            });
        }
        let declared = u16::from_be_bytes([bytes[2], bytes[3]]) as usize;
        if !(HEADER_LEN..=MAX_PACKET_LEN).contains(&declared) {
            return Err(WireError::InvalidLength(declared));
        }
        if bytes.len() < declared {
            return Err(WireError::Truncated {
                declared: Some(declared),
                available: bytes.len(),
            });
        }
        let code = Code::try_from(bytes[0])?;
        let identifier = bytes[1];
        let mut authenticator = [0u8; AUTHENTICATOR_LEN];
        authenticator.copy_from_slice(&bytes[4..HEADER_LEN]);

        let body = &bytes[..declared];
        let mut attributes = Vec::new();
        let mut offset = HEADER_LEN;
        while offset < declared {
            if offset + 2 > declared {
                return Err(WireError::MalformedAttribute { offset });
            }
            let attr_type = body[offset];
            let attr_len = body[offset + 1] as usize;
            if attr_type == 0 || attr_len < 2 || offset + attr_len > declared {
                return Err(WireError::MalformedAttribute { offset });
            }
            attributes.push(Attribute::new(
                attr_type,
                &body[offset + 2..offset + attr_len],
            ));
            offset += attr_len;
        }

        Ok(Self {
            code,
            identifier,
            authenticator,
            attributes,
        })
    }
}

fn write_attributes(attributes: &[Attribute], out: &mut Vec<u8>) {
    for attr in attributes {
        out.push(attr.attr_type);
        out.push(attr.encoded_len() as u8);
        out.extend_from_slice(&attr.value);
    }
}

pub fn encode_packet(packet: &Packet) -> Result<Vec<u8>, WireError> {
    packet.encode()
}

pub fn decode_packet(bytes: &[u8]) -> Result<Packet, WireError> {
    Packet::decode(bytes)
}

/// MD5(code ‖ identifier ‖ length ‖ request authenticator ‖ attributes ‖ secret).
///
/// The response's own authenticator field is not part of the digest input, so
/// this can be called before or after the field is stamped.
pub fn compute_response_authenticator(
    response: &Packet,
    request_ra: &Authenticator,
    secret: &[u8],
) -> Authenticator {
    let mut attrs = Vec::with_capacity(response.encoded_len() - HEADER_LEN);
    write_attributes(&response.attributes, &mut attrs);

    let mut hasher = Md5::new();
    hasher.update([response.code as u8, response.identifier]);
    hasher.update((response.encoded_len() as u16).to_be_bytes());
    hasher.update(request_ra);
    hasher.update(&attrs);
    hasher.update(secret);
    hasher.finalize().into()
}

pub fn verify_response_authenticator(
    response: &Packet,
    request_ra: &Authenticator,
    secret: &[u8],
) -> bool {
    let expected = compute_response_authenticator(response, request_ra, secret);
    expected.ct_eq(&response.authenticator).into()
}

/// Builds a response to `request` and stamps its Response Authenticator.
pub fn build_response(
    request: &Packet,
    code: Code,
    attributes: Vec<Attribute>,
    secret: &[u8],
) -> Packet {
    let mut response = Packet {
        code,
        identifier: request.identifier,
        authenticator: [0; AUTHENTICATOR_LEN],
        attributes,
    };
    response.authenticator =
        compute_response_authenticator(&response, &request.authenticator, secret);
    response
}
