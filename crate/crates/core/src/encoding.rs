//! Text encodings shared by every file format: big integers as canonical
//! decimal strings, byte strings as standard base64.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use num_bigint::BigUint;

/// Parses a canonical decimal string: ASCII digits only, no sign, no leading zeros.
pub fn parse_decimal(text: &str) -> Result<BigUint, String> {
    if text.is_empty() {
        return Err("empty integer".into());
    }
    if !text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("`{text}` is not a decimal integer"));
    }
    if text.len() > 1 && text.starts_with('0') {
        return Err(format!("`{text}` has leading zeros"));
    }
    BigUint::parse_bytes(text.as_bytes(), 10)
        .ok_or_else(|| format!("`{text}` is not a decimal integer"))
}

pub fn encode_base64(bytes: &[u8]) -> String {
    STANDARD.encode(bytes)
}

pub fn decode_base64(text: &str) -> Result<Vec<u8>, String> {
    STANDARD.decode(text).map_err(|e| e.to_string())
}

/// `#[serde(with = "decimal")]` for `BigUint` fields.
pub mod decimal {
    use num_bigint::BigUint;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&value.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let text = String::deserialize(d)?;
        super::parse_decimal(&text).map_err(de::Error::custom)
    }
}

/// `#[serde(with = "base64_bytes")]` for message payloads.
pub mod base64_bytes {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::encode_base64(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let text = String::deserialize(d)?;
        super::decode_base64(&text).map_err(de::Error::custom)
    }
}
