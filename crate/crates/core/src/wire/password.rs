//! Shared-secret hiding of the User-Password attribute.
//!
//! The plaintext is zero-padded to 16-octet blocks and each block is XORed
//! with a keystream block: the first one is `MD5(secret ‖ RA)`, every later
//! one is `MD5(secret ‖ previous cipher block)`.

use md5::{Digest, Md5};

use super::{Authenticator, PasswordError};

pub const BLOCK_LEN: usize = 16;
pub const MAX_PASSWORD_LEN: usize = 128;
pub const PAD: u8 = 0x00;

/// Concatenated cipher blocks as carried in the User-Password attribute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HiddenPassword(Vec<u8>);

impl HiddenPassword {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, PasswordError> {
        let len = bytes.len();
        if len == 0 || !len.is_multiple_of(BLOCK_LEN) || len > MAX_PASSWORD_LEN {
            return Err(PasswordError::BadLength(len));
        }
        Ok(Self(bytes.to_vec()))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    pub fn block_count(&self) -> usize {
        self.0.len() / BLOCK_LEN
    }

    pub fn blocks(&self) -> impl Iterator<Item = &[u8]> {
        self.0.chunks_exact(BLOCK_LEN)
    }
}

impl AsRef<[u8]> for HiddenPassword {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

fn keystream(secret: &[u8], chain: &[u8]) -> [u8; BLOCK_LEN] {
    let mut hasher = Md5::new();
    hasher.update(secret);
    hasher.update(chain);
    hasher.finalize().into()
}

pub fn hide_password(
    plaintext: &[u8],
    secret: &[u8],
    ra: &Authenticator,
) -> Result<HiddenPassword, PasswordError> {
    if plaintext.is_empty() {
        return Err(PasswordError::EmptyPassword);
    }
    if plaintext.len() > MAX_PASSWORD_LEN {
        return Err(PasswordError::PasswordTooLong(plaintext.len()));
    }
    if plaintext.contains(&PAD) {
        return Err(PasswordError::PasswordContainsPad);
    }
    if secret.is_empty() {
        return Err(PasswordError::EmptySecret);
    }

    let padded_len = plaintext.len().div_ceil(BLOCK_LEN) * BLOCK_LEN;
    let mut out = plaintext.to_vec();
    out.resize(padded_len, PAD);

    let mut chain: [u8; BLOCK_LEN] = *ra;
    for block in out.chunks_exact_mut(BLOCK_LEN) {
        let key = keystream(secret, &chain);
        for (p, k) in block.iter_mut().zip(key) {
            *p ^= k;
        }
        chain.copy_from_slice(block);
    }
    Ok(HiddenPassword(out))
}

pub fn recover_password(
    hidden: &HiddenPassword,
    secret: &[u8],
    ra: &Authenticator,
) -> Result<Vec<u8>, PasswordError> {
    if secret.is_empty() {
        return Err(PasswordError::EmptySecret);
    }
    let mut out = Vec::with_capacity(hidden.0.len());
    let mut chain: &[u8] = ra;
    for block in hidden.blocks() {
        let key = keystream(secret, chain);
        out.extend(block.iter().zip(key).map(|(c, k)| c ^ k));
        chain = block;
    }
    while out.last() == Some(&PAD) {
        out.pop();
    }
    if out.is_empty() {
        return Err(PasswordError::AllPadRecovered);
    }
    Ok(out)
}
