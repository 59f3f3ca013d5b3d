//! Little-endian primitives shared by the binary formats.

use std::io::{self, Read, Write};

pub(crate) struct Writer<W: Write> {
    inner: W,
    err: Option<io::Error>,
}

impl<W: Write> Writer<W> {
    pub fn new(inner: W) -> Self {
        Self { inner, err: None }
    }

    pub fn bytes(&mut self, b: &[u8]) {
        if self.err.is_none() {
            if let Err(e) = self.inner.write_all(b) {
                self.err = Some(e);
            }
        }
    }

    pub fn u8(&mut self, v: u8) {
        self.bytes(&[v]);
    }

    pub fn u32(&mut self, v: u32) {
        self.bytes(&v.to_le_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.bytes(&v.to_le_bytes());
    }

    pub fn f64s(&mut self, vs: &[f64]) {
        for v in vs {
            self.bytes(&v.to_le_bytes());
        }
    }

    pub fn string(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.bytes(s.as_bytes());
    }

    /// Flushes and reports the first error hit while writing.
    pub fn finish(mut self) -> io::Result<()> {
        match self.err.take() {
            Some(e) => Err(e),
            None => self.inner.flush(),
        }
    }
}

pub(crate) struct Reader<R: Read> {
    inner: R,
}

impl<R: Read> Reader<R> {
    pub fn new(inner: R) -> Self {
        Self { inner }
    }

    pub fn bytes(&mut self, buf: &mut [u8]) -> io::Result<()> {
        self.inner.read_exact(buf)
    }

    pub fn u8(&mut self) -> io::Result<u8> {
        let mut b = [0u8; 1];
        self.bytes(&mut b)?;
        Ok(b[0])
    }

    pub fn u32(&mut self) -> io::Result<u32> {
        let mut b = [0u8; 4];
        self.bytes(&mut b)?;
        Ok(u32::from_le_bytes(b))
    }

    pub fn u64(&mut self) -> io::Result<u64> {
        let mut b = [0u8; 8];
        self.bytes(&mut b)?;
        Ok(u64::from_le_bytes(b))
    }

    pub fn f64s(&mut self, n: usize) -> io::Result<Vec<f64>> {
        let mut out = Vec::with_capacity(n.min(1 << 24));
        let mut b = [0u8; 8];
        for _ in 0..n {
            self.bytes(&mut b)?;
            out.push(f64::from_le_bytes(b));
        }
        Ok(out)
    }

    pub fn string(&mut self) -> io::Result<String> {
        let n = self.u32()? as usize;
        if n > 1 << 16 {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "string length out of range"));
        }
        let mut buf = vec![0u8; n];
        self.bytes(&mut buf)?;
        String::from_utf8(buf).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }

    pub fn at_end(&mut self) -> io::Result<bool> {
        let mut b = [0u8; 1];
        Ok(self.inner.read(&mut b)? == 0)
    }
}
