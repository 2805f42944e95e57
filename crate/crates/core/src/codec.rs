//! Little-endian framing helpers for the binary blobs (operators, states).

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub(crate) struct Writer {
    pub buf: Vec<u8>,
}

impl Writer {
    pub fn new(magic: &[u8; 8], version: u32) -> Self {
        let mut buf = Vec::new();
        buf.extend_from_slice(magic);
        buf.extend_from_slice(&version.to_le_bytes());
        Self { buf }
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_bits().to_le_bytes());
    }

    pub fn f64s(&mut self, v: &[f64]) {
        self.u64(v.len() as u64);
        for x in v {
            self.f64(*x);
        }
    }

    pub fn bytes(&mut self, v: &[u8]) {
        self.u64(v.len() as u64);
        self.buf.extend_from_slice(v);
    }
}

pub(crate) struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(data: &'a [u8], magic: &[u8; 8], max_version: u32) -> Result<(Self, u32)> {
        if data.len() < 12 || &data[..8] != magic {
            return Err(Error::Decode(String::from("bad magic")));
        }
        let version = u32::from_le_bytes(data[8..12].try_into().unwrap());
        if version == 0 || version > max_version {
            return Err(Error::Decode(alloc::format!("unsupported version {version}")));
        }
        Ok((Self { data, pos: 12 }, version))
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.data.len() {
            return Err(Error::Decode(String::from("truncated")));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn usize(&mut self) -> Result<usize> {
        let v = self.u64()?;
        usize::try_from(v).map_err(|_| Error::Decode(String::from("length overflow")))
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }

    pub fn f64s(&mut self) -> Result<Vec<f64>> {
        let n = self.usize()?;
        if n > (self.data.len() - self.pos) / 8 {
            return Err(Error::Decode(String::from("truncated array")));
        }
        (0..n).map(|_| self.f64()).collect()
    }

    pub fn bytes(&mut self) -> Result<Vec<u8>> {
        let n = self.usize()?;
        Ok(self.take(n)?.to_vec())
    }

    pub fn finish(&self) -> Result<()> {
        if self.pos != self.data.len() {
            return Err(Error::Decode(String::from("trailing bytes")));
        }
        Ok(())
    }
}
