//! Computational-basis bitstrings.
//!
//! Convention shared by every module: the leftmost character is the bit of
//! qubit `n - 1`, the rightmost is qubit 0. The integer value of the string
//! read as binary is therefore the basis-state index.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Largest register width addressable by a `u64` index with headroom.
pub const MAX_QUBITS: usize = 62;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitsError {
    #[error("bitstring {0:?} contains characters other than '0' and '1'")]
    InvalidCharacter(String),
    #[error("bitstring {text:?} has length {found}, expected {expected}")]
    WrongLength {
        text: String,
        expected: usize,
        found: usize,
    },
    #[error("bitstring is empty or longer than {MAX_QUBITS} bits")]
    BadWidth,
}

/// A basis state of an `n`-qubit register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bitstring {
    width: u8,
    value: u64,
}

impl Bitstring {
    pub fn from_index(width: usize, value: u64) -> Self {
        assert!(
            (1..=MAX_QUBITS).contains(&width),
            "width {width} out of range"
        );
        assert!(
            value < (1u64 << width),
            "index {value} exceeds {width} bits"
        );
        Self {
            width: width as u8,
            value,
        }
    }

    /// Parses and checks the width against `n`.
    pub fn parse_with_width(text: &str, n: usize) -> Result<Self, BitsError> {
        let bits: Bitstring = text.parse()?;
        if bits.width() != n {
            return Err(BitsError::WrongLength {
                text: text.to_string(),
                expected: n,
                found: bits.width(),
            });
        }
        Ok(bits)
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    pub fn index(&self) -> u64 {
        self.value
    }

    /// Bit carried by qubit `qubit` (qubit 0 is the rightmost character).
    pub fn qubit(&self, qubit: usize) -> bool {
        (self.value >> qubit) & 1 == 1
    }

    /// All `2^n` basis states in ascending index order.
    pub fn all(width: usize) -> impl Iterator<Item = Bitstring> {
        (0..(1u64 << width)).map(move |i| Bitstring::from_index(width, i))
    }
}

impl Ord for Bitstring {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.width, self.value).cmp(&(other.width, other.value))
    }
}

impl PartialOrd for Bitstring {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl FromStr for Bitstring {
    type Err = BitsError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        if text.is_empty() || text.len() > MAX_QUBITS {
            return Err(BitsError::BadWidth);
        }
        let mut value = 0u64;
        for c in text.chars() {
            value <<= 1;
            match c {
                '0' => {}
                '1' => value |= 1,
                _ => return Err(BitsError::InvalidCharacter(text.to_string())),
            }
        }
        Ok(Bitstring {
            width: text.len() as u8,
            value,
        })
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:0width$b}", self.value, width = self.width as usize)
    }
}

impl Serialize for Bitstring {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Bitstring {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn leftmost_character_is_highest_qubit() {
        let b: Bitstring = "0111".parse().unwrap();
        assert_eq!(b.index(), 7);
        assert!(b.qubit(0) && b.qubit(1) && b.qubit(2));
        assert!(!b.qubit(3));
        assert_eq!(Bitstring::from_index(2, 1).to_string(), "01");
    }

    #[test]
    fn rejects_bad_text() {
        assert!(matches!(
            "01a".parse::<Bitstring>(),
            Err(BitsError::InvalidCharacter(_))
        ));
        assert_eq!("".parse::<Bitstring>(), Err(BitsError::BadWidth));
        assert!(matches!(
            Bitstring::parse_with_width("011", 4),
            Err(BitsError::WrongLength { .. })
        ));
    }

    proptest! {
        #[test]
        fn display_parse_round_trip(width in 1usize..20, raw in any::<u64>()) {
            let value = raw & ((1u64 << width) - 1);
            let b = Bitstring::from_index(width, value);
            let text = b.to_string();
            prop_assert_eq!(text.len(), width);
            prop_assert_eq!(text.parse::<Bitstring>().unwrap(), b);
        }
    }
}
