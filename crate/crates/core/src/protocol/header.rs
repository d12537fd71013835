//! Source-route packet header.
//!
//! Layout, big-endian:
//!
//! ```text
//!  0        8        16       24       32
//! +--------+--------+--------+--------+
//! |  Type  |  Hop   |  Seq   |  Exp   |
//! +--------+--------+--------+--------+
//! |            Address[0]             |
//! +-----------------------------------+
//! |                ...                |
//! +-----------------------------------+
//! |            Address[n]             |
//! +-----------------------------------+
//! ```

use thiserror::Error;

/// Largest address list whose hop count still fits the 8-bit Hop field.
pub const MAX_ADDRESSES: usize = 255;

pub const FIXED_BYTES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum PacketType {
    Data = 0,
    Rreq = 1,
    Rrep = 2,
    Rerr = 3,
}

impl PacketType {
    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(PacketType::Data),
            1 => Some(PacketType::Rreq),
            2 => Some(PacketType::Rrep),
            3 => Some(PacketType::Rerr),
            _ => None,
        }
    }

    pub fn is_control(self) -> bool {
        self != PacketType::Data
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PacketType::Data => "data",
            PacketType::Rreq => "rreq",
            PacketType::Rrep => "rrep",
            PacketType::Rerr => "rerr",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HeaderError {
    #[error("address list is empty")]
    NoAddresses,
    #[error("{0} addresses do not fit an 8-bit hop count")]
    TooManyAddresses(usize),
    #[error("hop count {hop} exceeds route length {len}")]
    HopBeyondRoute { hop: u8, len: usize },
    #[error("unknown packet type code {0}")]
    UnknownType(u8),
    #[error("buffer of {0} bytes is not a whole header")]
    BadLength(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PacketHeader {
    pub kind: PacketType,
    /// Hops from source to destination.
    pub hop: u8,
    pub seq: u8,
    /// Ticks of lifetime left.
    pub exp: u8,
    /// `addresses[0]` is the source, the last entry the destination.
    pub addresses: Vec<u32>,
}

impl PacketHeader {
    pub fn source(&self) -> Option<u32> {
        self.addresses.first().copied()
    }

    pub fn destination(&self) -> Option<u32> {
        self.addresses.last().copied()
    }

    pub fn encoded_len(&self) -> usize {
        FIXED_BYTES + 4 * self.addresses.len()
    }

    pub fn encoded_bits(&self) -> usize {
        8 * self.encoded_len()
    }

    pub fn validate(&self) -> Result<(), HeaderError> {
        let len = self.addresses.len();
        if len == 0 {
            return Err(HeaderError::NoAddresses);
        }
        if len > MAX_ADDRESSES {
            return Err(HeaderError::TooManyAddresses(len));
        }
        if self.hop as usize > len - 1 {
            return Err(HeaderError::HopBeyondRoute { hop: self.hop, len });
        }
        Ok(())
    }

    pub fn encode(&self) -> Result<Vec<u8>, HeaderError> {
        self.validate()?;
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(&[self.kind as u8, self.hop, self.seq, self.exp]);
        for a in &self.addresses {
            out.extend_from_slice(&a.to_be_bytes());
        }
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, HeaderError> {
        if bytes.len() < FIXED_BYTES + 4 || !(bytes.len() - FIXED_BYTES).is_multiple_of(4) {
            return Err(HeaderError::BadLength(bytes.len()));
        }
        let kind = PacketType::from_code(bytes[0]).ok_or(HeaderError::UnknownType(bytes[0]))?;
        let addresses = bytes[FIXED_BYTES..]
            .chunks_exact(4)
            .map(|c| u32::from_be_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        let header = PacketHeader {
            kind,
            hop: bytes[1],
            seq: bytes[2],
            exp: bytes[3],
            addresses,
        };
        header.validate()?;
        Ok(header)
    }
}

/// `a` is newer than `b` under modulo-256 arithmetic with a half window.
pub fn seq_newer(a: u8, b: u8) -> bool {
    let d = a.wrapping_sub(b);
    d != 0 && d < 128
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn data_header_layout() {
        let h = PacketHeader {
            kind: PacketType::Data,
            hop: 2,
            seq: 7,
            exp: 10,
            addresses: vec![1, 5, 9],
        };
        let bytes = h.encode().unwrap();
        assert_eq!(bytes.len(), 16);
        assert_eq!(
            bytes,
            vec![0x00, 0x02, 0x07, 0x0A, 0, 0, 0, 1, 0, 0, 0, 5, 0, 0, 0, 9]
        );
        assert_eq!(h.encoded_bits(), 32 + 32 * 3);
    }

    #[test]
    fn single_address_header() {
        let h = PacketHeader { kind: PacketType::Rerr, hop: 0, seq: 0, exp: 0, addresses: vec![42] };
        let bytes = h.encode().unwrap();
        assert_eq!(bytes.len(), 8);
        assert_eq!(bytes[0], 3);
        assert_eq!(PacketHeader::decode(&bytes).unwrap(), h);
    }

    #[test]
    fn rejects_invalid_headers() {
        let mut h = PacketHeader { kind: PacketType::Data, hop: 0, seq: 0, exp: 0, addresses: vec![] };
        assert_eq!(h.encode(), Err(HeaderError::NoAddresses));
        h.addresses = (0..256).collect();
        assert_eq!(h.encode(), Err(HeaderError::TooManyAddresses(256)));
        h.addresses = vec![1, 2];
        h.hop = 2;
        assert!(matches!(h.encode(), Err(HeaderError::HopBeyondRoute { .. })));
        assert_eq!(PacketHeader::decode(&[9, 0, 0, 0, 0, 0, 0, 1]), Err(HeaderError::UnknownType(9)));
        assert_eq!(PacketHeader::decode(&[0, 0, 0, 0, 1]), Err(HeaderError::BadLength(5)));
        assert_eq!(PacketHeader::decode(&[0, 0, 0, 0]), Err(HeaderError::BadLength(4)));
    }

    #[test]
    fn largest_route_encodes() {
        let h = PacketHeader {
            kind: PacketType::Data,
            hop: 254,
            seq: 1,
            exp: 1,
            addresses: (0..255).collect(),
        };
        assert_eq!(h.encode().unwrap().len(), 4 + 4 * 255);
    }

    #[test]
    fn sequence_window() {
        assert!(seq_newer(1, 0));
        assert!(seq_newer(0, 255));
        assert!(seq_newer(100, 0));
        assert!(!seq_newer(0, 0));
        assert!(!seq_newer(0, 1));
        assert!(!seq_newer(200, 50));
    }

    fn arb_header() -> impl Strategy<Value = PacketHeader> {
        (0u8..4, any::<u8>(), any::<u8>(), prop::collection::vec(any::<u32>(), 1..=MAX_ADDRESSES), any::<u8>())
            .prop_map(|(kind, seq, exp, addresses, hop_seed)| {
                let hop = (hop_seed as usize % addresses.len()) as u8;
                PacketHeader { kind: PacketType::from_code(kind).unwrap(), hop, seq, exp, addresses }
            })
    }

    proptest! {
        #[test]
        fn codec_is_a_bijection(h in arb_header()) {
            let bytes = h.encode().unwrap();
            prop_assert_eq!(bytes.len(), h.encoded_len());
            prop_assert_eq!(PacketHeader::decode(&bytes).unwrap(), h);
        }
    }
}
