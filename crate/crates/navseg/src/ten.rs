//! The `.ten` tensor file format.
//!
//! Layout (all little-endian): magic bytes `NSSV`, a u32 rank, `rank` u32
//! dimensions, then the row-major IEEE-754 f32 payload. Writes are bit-exact
//! functions of their inputs, which is what corpus-level byte determinism
//! rests on.

use crate::{Error, Result};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const MAGIC: &[u8; 4] = b"NSSV";
const MAX_RANK: u32 = 8;
const MAX_ELEMS: usize = 1 << 28;

pub fn write_ten(path: &Path, dims: &[usize], data: &[f32]) -> Result<()> {
    let n: usize = dims.iter().product();
    if n != data.len() {
        return Err(Error::invalid(format!(
            "tensor payload has {} elements but dims {:?} imply {}",
            data.len(),
            dims,
            n
        )));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    w.write_all(MAGIC).map_err(io)?;
    w.write_all(&(dims.len() as u32).to_le_bytes()).map_err(io)?;
    for &d in dims {
        w.write_all(&(d as u32).to_le_bytes()).map_err(io)?;
    }
    for &v in data {
        w.write_all(&v.to_le_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_ten(path: &Path) -> Result<(Vec<usize>, Vec<f32>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let io = |e| Error::io(path, e);

    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != MAGIC {
        return Err(Error::corrupt(path, "bad magic bytes"));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4).map_err(io)?;
    let rank = u32::from_le_bytes(b4);
    if rank == 0 || rank > MAX_RANK {
        return Err(Error::corrupt(path, format!("implausible rank {rank}")));
    }
    let mut dims = Vec::with_capacity(rank as usize);
    let mut n: usize = 1;
    for _ in 0..rank {
        r.read_exact(&mut b4).map_err(io)?;
        let d = u32::from_le_bytes(b4) as usize;
        n = n.saturating_mul(d);
        dims.push(d);
    }
    if n > MAX_ELEMS {
        return Err(Error::corrupt(path, format!("implausible element count {n}")));
    }
    let mut data = Vec::with_capacity(n);
    for _ in 0..n {
        r.read_exact(&mut b4).map_err(io)?;
        data.push(f32::from_le_bytes(b4));
    }
    // Trailing bytes mean the header lied about the payload.
    let mut extra = [0u8; 1];
    match r.read(&mut extra) {
        Ok(0) => Ok((dims, data)),
        Ok(_) => Err(Error::corrupt(path, "trailing bytes after payload")),
        Err(e) => Err(Error::io(path, e)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_bad_magic() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.ten");
        std::fs::write(&p, b"XXXX\x01\x00\x00\x00\x01\x00\x00\x00\x00\x00\x80\x3f").unwrap();
        assert!(matches!(read_ten(&p), Err(Error::Corrupt { .. })));
    }

    #[test]
    fn rejects_length_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.ten");
        assert!(write_ten(&p, &[2, 3], &[0.0; 5]).is_err());
    }

    proptest! {
        #[test]
        fn round_trips(h in 1usize..6, w in 1usize..6, c in 1usize..4, seed in 0u64..1000) {
            let mut rng = crate::rng::stream(&[seed]);
            let data: Vec<f32> = (0..h * w * c).map(|_| rand::Rng::gen::<f32>(&mut rng)).collect();
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("t.ten");
            write_ten(&p, &[h, w, c], &data).unwrap();
            let (dims, back) = read_ten(&p).unwrap();
            prop_assert_eq!(dims, vec![h, w, c]);
            prop_assert_eq!(back, data);
        }
    }
}
