use std::fmt;

use crate::error::{invalid, Result};

/// A finite binary string, stored as its length and the big-endian integer
/// formed by its bits. The first bit is the most significant, so ordering
/// the indices of equal-length paths is lexicographic ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicPath {
    len: u32,
    index: u64,
}

impl DyadicPath {
    pub const MAX_LEN: u32 = 63;

    pub const EMPTY: DyadicPath = DyadicPath { len: 0, index: 0 };

    pub fn new(bits: &[u8]) -> Result<Self> {
        if bits.len() > Self::MAX_LEN as usize {
            return Err(invalid(format!("path longer than {} bits", Self::MAX_LEN)));
        }
        let mut index = 0u64;
        for &b in bits {
            if b > 1 {
                return Err(invalid(format!("path bit {b} is not 0 or 1")));
            }
            index = (index << 1) | b as u64;
        }
        Ok(DyadicPath {
            len: bits.len() as u32,
            index,
        })
    }

    pub fn from_index(len: u32, index: u64) -> Result<Self> {
        if len > Self::MAX_LEN || (len < 64 && index >> len != 0) {
            return Err(invalid(format!("index {index} out of range for length {len}")));
        }
        Ok(DyadicPath { len, index })
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Position of this path in the lexicographic order of its level.
    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn bit(&self, i: u32) -> u8 {
        assert!(i < self.len, "bit {i} out of range for path of length {}", self.len);
        ((self.index >> (self.len - 1 - i)) & 1) as u8
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.bit(i)).collect()
    }

    pub fn child(&self, bit: u8) -> DyadicPath {
        assert!(bit <= 1 && self.len < Self::MAX_LEN);
        DyadicPath {
            len: self.len + 1,
            index: (self.index << 1) | bit as u64,
        }
    }

    /// `self ↾ n`.
    pub fn prefix(&self, n: u32) -> DyadicPath {
        assert!(n <= self.len);
        DyadicPath {
            len: n,
            index: self.index >> (self.len - n),
        }
    }

    pub fn concat(&self, tail: &DyadicPath) -> DyadicPath {
        assert!(self.len + tail.len <= Self::MAX_LEN);
        DyadicPath {
            len: self.len + tail.len,
            index: (self.index << tail.len) | tail.index,
        }
    }

    /// Every path of length `len`, in lexicographic order.
    pub fn all(len: u32) -> impl Iterator<Item = DyadicPath> {
        assert!(len <= Self::MAX_LEN);
        (0..1u64 << len).map(move |index| DyadicPath { len, index })
    }
}

impl fmt::Display for DyadicPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len == 0 {
            return f.write_str("∅");
        }
        for i in 0..self.len {
            write!(f, "{}", self.bit(i))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bits_roundtrip_and_order() {
        let p = DyadicPath::new(&[1, 0, 1]).unwrap();
        assert_eq!(p.index(), 5);
        assert_eq!(p.bits(), vec![1, 0, 1]);
        assert_eq!(p.to_string(), "101");
        assert_eq!(p.prefix(2), DyadicPath::new(&[1, 0]).unwrap());
        assert_eq!(p.prefix(0), DyadicPath::EMPTY);
        assert_eq!(
            DyadicPath::new(&[1]).unwrap().child(0),
            DyadicPath::new(&[1, 0]).unwrap()
        );

        let listed: Vec<_> = DyadicPath::all(2).map(|p| p.to_string()).collect();
        assert_eq!(listed, ["00", "01", "10", "11"]);
        let mut sorted = listed.clone();
        sorted.sort();
        assert_eq!(listed, sorted);
    }

    #[test]
    fn empty_path_is_valid() {
        let p = DyadicPath::new(&[]).unwrap();
        assert!(p.is_empty());
        assert_eq!(DyadicPath::all(0).count(), 1);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(DyadicPath::new(&[2]).is_err());
        assert!(DyadicPath::from_index(2, 4).is_err());
        assert!(DyadicPath::from_index(64, 0).is_err());
    }

    #[test]
    fn concat_matches_bits() {
        let a = DyadicPath::new(&[0, 1]).unwrap();
        let b = DyadicPath::new(&[1, 1, 0]).unwrap();
        assert_eq!(a.concat(&b).bits(), vec![0, 1, 1, 1, 0]);
    }
}
