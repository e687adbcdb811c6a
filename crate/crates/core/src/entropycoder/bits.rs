//! Bit streams, Elias-gamma codes and the archive container.

use bitvec::prelude::*;
use num_bigint::BigUint;

use crate::error::{Error, Result};

/// First byte of every archive.
pub const MAGIC: u8 = 0x4A;
/// Container version written by this crate.
pub const VERSION: u8 = 1;

/// An MSB-first bit sequence.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BitStream {
    bits: BitVec<u8, Msb0>,
}

impl BitStream {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bits(bits: &BitSlice<u8, Msb0>) -> Self {
        Self { bits: bits.to_bitvec() }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &BitSlice<u8, Msb0> {
        &self.bits
    }

    pub fn push_bit(&mut self, b: bool) {
        self.bits.push(b);
    }

    /// `value` in exactly `width` bits, most significant first.
    pub fn push_u128(&mut self, value: u128, width: u32) {
        debug_assert!(width == 128 || value >> width == 0, "{value} does not fit {width} bits");
        for i in (0..width).rev() {
            self.bits.push((value >> i) & 1 == 1);
        }
    }

    pub fn push_biguint(&mut self, value: &BigUint, width: u64) {
        debug_assert!(value.bits() <= width);
        for i in (0..width).rev() {
            self.bits.push(value.bit(i));
        }
    }

    /// Elias-gamma code of `n ≥ 1`.
    pub fn push_elias_gamma(&mut self, n: u64) {
        assert!(n >= 1, "Elias gamma needs n ≥ 1");
        let width = 64 - n.leading_zeros();
        for _ in 1..width {
            self.bits.push(false);
        }
        self.push_u128(n as u128, width);
    }

    pub fn append(&mut self, other: &BitStream) {
        self.bits.extend_from_bitslice(&other.bits);
    }

    pub fn flip(&mut self, i: usize) {
        let b = self.bits[i];
        self.bits.set(i, !b);
    }

    pub fn truncate(&mut self, len: usize) {
        self.bits.truncate(len);
    }

    /// Bits as a string of `0`/`1`.
    pub fn to_bit_string(&self) -> String {
        self.bits.iter().map(|b| if *b { '1' } else { '0' }).collect()
    }

    /// Zero-padded to whole bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut v = self.bits.clone();
        v.set_uninitialized(false);
        v.into_vec()
    }
}

/// Length in bits of the Elias-gamma code of `n`.
pub fn elias_gamma_len(n: u64) -> usize {
    2 * (63 - n.leading_zeros() as usize) + 1
}

/// Sequential reader reporting bit offsets in its errors.
pub struct BitReader<'a> {
    bits: &'a BitSlice<u8, Msb0>,
    pos: usize,
    base: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bits: &'a BitSlice<u8, Msb0>) -> Self {
        Self { bits, pos: 0, base: 0 }
    }

    /// Offsets in errors are reported relative to `base`.
    pub fn with_base(bits: &'a BitSlice<u8, Msb0>, base: usize) -> Self {
        Self { bits, pos: 0, base }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }

    pub fn rest(&self) -> &'a BitSlice<u8, Msb0> {
        &self.bits[self.pos..]
    }

    pub fn error(&self, reason: impl Into<String>) -> Error {
        Error::Decode { offset: self.base + self.pos, reason: reason.into() }
    }

    fn need(&self, n: usize, what: &str) -> Result<()> {
        if self.remaining() < n {
            return Err(self.error(format!("truncated {what}: need {n} bits, {} left", self.remaining())));
        }
        Ok(())
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        self.need(1, "bit")?;
        let b = self.bits[self.pos];
        self.pos += 1;
        Ok(b)
    }

    pub fn read_u128(&mut self, width: u32, what: &str) -> Result<u128> {
        if width > 128 {
            return Err(self.error(format!("{what} wider than 128 bits")));
        }
        self.need(width as usize, what)?;
        let mut v = 0u128;
        for _ in 0..width {
            v = (v << 1) | self.bits[self.pos] as u128;
            self.pos += 1;
        }
        Ok(v)
    }

    pub fn read_biguint(&mut self, width: u64, what: &str) -> Result<BigUint> {
        self.need(width as usize, what)?;
        let mut bytes = vec![0u8; (width as usize).div_ceil(8)];
        let pad = bytes.len() * 8 - width as usize;
        let view = bytes.view_bits_mut::<Msb0>();
        view[pad..].copy_from_bitslice(&self.bits[self.pos..self.pos + width as usize]);
        self.pos += width as usize;
        Ok(BigUint::from_bytes_be(&bytes))
    }

    pub fn read_elias_gamma(&mut self) -> Result<u64> {
        let start = self.pos;
        let mut zeros = 0u32;
        loop {
            if self.remaining() == 0 {
                self.pos = start;
                return Err(self.error("truncated length prefix"));
            }
            if self.bits[self.pos] {
                break;
            }
            zeros += 1;
            self.pos += 1;
            if zeros > 63 {
                self.pos = start;
                return Err(self.error("length prefix exceeds 64 bits"));
            }
        }
        Ok(self.read_u128(zeros + 1, "length prefix")? as u64)
    }
}

/// Archive bytes: magic, version, the records back to back, zero padding.
pub fn write_archive(records: &[BitStream]) -> Vec<u8> {
    let mut body = BitStream::new();
    for r in records {
        body.append(r);
    }
    let mut out = vec![MAGIC, VERSION];
    out.extend(body.to_bytes());
    out
}

/// Checks the header and returns the record bits (padding included).
pub fn archive_body(bytes: &[u8]) -> Result<&BitSlice<u8, Msb0>> {
    match bytes {
        [] | [_] => Err(Error::Decode { offset: 0, reason: "archive shorter than its header".into() }),
        [m, _, ..] if *m != MAGIC => {
            Err(Error::Decode { offset: 0, reason: format!("bad magic byte {m:#04x}, expected {MAGIC:#04x}") })
        }
        [_, v, ..] if *v != VERSION => {
            Err(Error::Decode { offset: 8, reason: format!("unsupported container version {v}") })
        }
        [_, _, body @ ..] => Ok(body.view_bits::<Msb0>()),
    }
}

/// Whether the unread bits are only the final byte padding.
pub fn is_padding(rest: &BitSlice<u8, Msb0>) -> bool {
    rest.len() < 8 && rest.not_any()
}
