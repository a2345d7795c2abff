//! The `MPSW` binary container.
//!
//! ```text
//! header   : "MPSW" | version u32 | n_sites u32 | phys_dim u32 | bond_cap u32 | ortho_center u32
//! per site : left_bond u32 | right_bond u32 | left*2*right f64, row-major (a, s, b)
//! ```
//!
//! Integers and floats are little-endian. `ortho_center` is zero-based, with
//! `0xFFFF_FFFF` meaning "no center".

use std::io::{Read, Write};
use std::path::Path;

use super::{Mps, SiteTensor, PHYS_DIM};
use crate::error::{Error, Result};
use crate::Scalar;

pub const MPSW_MAGIC: &[u8; 4] = b"MPSW";
pub const MPSW_VERSION: u32 = 1;
const NO_CENTER: u32 = u32::MAX;

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            Error::Parse { offset: self.bytes.len(), message: "truncated MPSW stream".into() }
        })?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

impl<T: Scalar> Mps<T> {
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(MPSW_MAGIC)?;
        for v in [
            MPSW_VERSION,
            self.n_sites() as u32,
            PHYS_DIM as u32,
            self.bond_cap() as u32,
            self.ortho_center().map_or(NO_CENTER, |c| c as u32),
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        for s in self.sites() {
            w.write_all(&(s.left() as u32).to_le_bytes())?;
            w.write_all(&(s.right() as u32).to_le_bytes())?;
            for &x in s.data() {
                w.write_all(&x.widen().to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor { bytes, pos: 0 };
        if cur.take(4)? != MPSW_MAGIC {
            return Err(Error::Parse { offset: 0, message: "bad MPSW magic".into() });
        }
        let version = cur.u32()?;
        if version != MPSW_VERSION {
            return Err(Error::Format(format!("unsupported MPSW version {version}")));
        }
        let n = cur.u32()? as usize;
        let phys = cur.u32()? as usize;
        if phys != PHYS_DIM {
            return Err(Error::Format(format!("physical dimension {phys} unsupported")));
        }
        let bond_cap = cur.u32()? as usize;
        let center = cur.u32()?;
        let mut sites = Vec::with_capacity(n.min(1 << 16));
        for _ in 0..n {
            let l = cur.u32()? as usize;
            let r = cur.u32()? as usize;
            let len = l
                .checked_mul(PHYS_DIM * r)
                .ok_or_else(|| Error::Format("site dimensions overflow".into()))?;
            let raw = cur.take(len.checked_mul(8).ok_or_else(|| Error::Format("site too large".into()))?)?;
            let data = raw
                .chunks_exact(8)
                .map(|c| T::of(f64::from_le_bytes(c.try_into().expect("8-byte chunk"))))
                .collect();
            sites.push(SiteTensor::new(l, r, data)?);
        }
        if cur.pos != bytes.len() {
            return Err(Error::Parse { offset: cur.pos, message: "trailing bytes after MPSW payload".into() });
        }
        let mut mps = Mps::from_sites(sites, bond_cap)?;
        if center != NO_CENTER {
            let c = center as usize;
            mps.check_site(c)?;
            mps.set_center(Some(c));
        }
        Ok(mps)
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(n in 1usize..9, d in 1usize..5, seed in any::<u64>(), canon in any::<bool>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut mps = Mps::<f64>::random_raw(n, d, &mut rng).unwrap();
            if canon {
                mps.canonicalize(n / 2).unwrap();
            }
            let bytes = mps.to_bytes();
            let back = Mps::<f64>::from_bytes(&bytes).unwrap();
            prop_assert_eq!(back.to_bytes(), bytes);
            prop_assert_eq!(back, mps);
        }
    }

    #[test]
    fn header_layout() {
        let mps = Mps::<f64>::uniform(3, 7).unwrap();
        let b = mps.to_bytes();
        assert_eq!(&b[..4], b"MPSW");
        assert_eq!(u32::from_le_bytes(b[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(b[8..12].try_into().unwrap()), 3);
        assert_eq!(u32::from_le_bytes(b[12..16].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(b[16..20].try_into().unwrap()), 7);
        assert_eq!(u32::from_le_bytes(b[20..24].try_into().unwrap()), 0);
        assert_eq!(b.len(), 24 + 3 * (8 + 2 * 8));
    }

    #[test]
    fn rejects_corruption() {
        let b = Mps::<f64>::uniform(3, 2).unwrap().to_bytes();
        assert!(Mps::<f64>::from_bytes(&b[..b.len() - 3]).is_err());
        let mut bad = b.clone();
        bad[0] = b'X';
        assert!(Mps::<f64>::from_bytes(&bad).is_err());
        let mut extra = b;
        extra.push(0);
        assert!(Mps::<f64>::from_bytes(&extra).is_err());
    }
}
