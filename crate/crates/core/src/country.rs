use core::fmt;
use core::str::FromStr;

use alloc::string::ToString;

use crate::Error;

/// Three-character country identifier (ISO 3166 alpha-3 in PWT data).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CountryCode([u8; 3]);

impl CountryCode {
    /// Number of distinct codes [`CountryCode::from_index`] can produce.
    pub const SYNTHETIC_CAPACITY: usize = 26 * 26 * 26;

    pub const fn new_unchecked(bytes: [u8; 3]) -> Self {
        CountryCode(bytes)
    }

    pub fn as_str(&self) -> &str {
        // Constructors only admit ASCII.
        core::str::from_utf8(&self.0).unwrap_or("???")
    }

    /// Deterministic synthetic code: 0 -> "AAA", 1 -> "AAB", ...
    pub fn from_index(index: usize) -> Option<Self> {
        if index >= Self::SYNTHETIC_CAPACITY {
            return None;
        }
        let a = (index / 676) as u8;
        let b = ((index / 26) % 26) as u8;
        let c = (index % 26) as u8;
        Some(CountryCode([b'A' + a, b'A' + b, b'A' + c]))
    }
}

impl FromStr for CountryCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let t = s.trim();
        let bytes = t.as_bytes();
        if bytes.len() != 3 || !bytes.iter().all(|b| b.is_ascii_alphanumeric()) {
            return Err(Error::InvalidCountryCode(s.to_string()));
        }
        let mut out = [0u8; 3];
        for (o, b) in out.iter_mut().zip(bytes) {
            *o = b.to_ascii_uppercase();
        }
        Ok(CountryCode(out))
    }
}

impl fmt::Display for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CountryCode({})", self.as_str())
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for CountryCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for CountryCode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = <alloc::string::String as serde::Deserialize>::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_uppercases() {
        let c: CountryCode = "ken".parse().unwrap();
        assert_eq!(c.as_str(), "KEN");
        assert!("KE".parse::<CountryCode>().is_err());
        assert!("K-N".parse::<CountryCode>().is_err());
    }

    #[test]
    fn synthetic_codes_are_distinct() {
        assert_eq!(CountryCode::from_index(0).unwrap().as_str(), "AAA");
        assert_eq!(CountryCode::from_index(27).unwrap().as_str(), "ABB");
        assert_eq!(CountryCode::from_index(17575).unwrap().as_str(), "ZZZ");
        assert!(CountryCode::from_index(17576).is_none());
    }
}
