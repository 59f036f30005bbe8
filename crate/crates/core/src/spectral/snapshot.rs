//! Binary snapshot files.
//!
//! Layout, all little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 8     | magic `IPMSNAP1` |
//! | 4     | `n1` (u32) |
//! | 4     | `n2` (u32) |
//! | 8     | `L` (f64) |
//! | 8     | time (f64) |
//! | 4     | name length in bytes (u32) |
//! | *     | name, UTF-8 |
//! | 8·n1·n2 | samples (f64), `x1` fastest |

use std::io::{Read, Write};

use super::{Grid, RealField, SpectralError};

pub const MAGIC: &[u8; 8] = b"IPMSNAP1";

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub name: String,
    pub time: f64,
    pub field: RealField,
}

impl Snapshot {
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let g = self.field.grid();
        w.write_all(MAGIC)?;
        w.write_all(&(g.n1() as u32).to_le_bytes())?;
        w.write_all(&(g.n2() as u32).to_le_bytes())?;
        w.write_all(&g.half_height().to_le_bytes())?;
        w.write_all(&self.time.to_le_bytes())?;
        w.write_all(&(self.name.len() as u32).to_le_bytes())?;
        w.write_all(self.name.as_bytes())?;
        let mut payload = Vec::with_capacity(8 * g.len());
        for v in self.field.values() {
            payload.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&payload)
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, SpectralError> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(SpectralError::BadSnapshot("wrong magic bytes".into()));
        }
        let n1 = read_u32(&mut r)? as usize;
        let n2 = read_u32(&mut r)? as usize;
        let half_height = read_f64(&mut r)?;
        let time = read_f64(&mut r)?;
        let name_len = read_u32(&mut r)? as usize;
        let mut name = vec![0u8; name_len];
        r.read_exact(&mut name)?;
        let name =
            String::from_utf8(name).map_err(|e| SpectralError::BadSnapshot(e.to_string()))?;
        let grid = Grid::new(n1, n2, half_height)?;
        let mut payload = vec![0u8; 8 * grid.len()];
        r.read_exact(&mut payload)?;
        let values = payload
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("chunk of 8")))
            .collect();
        Ok(Self {
            name,
            time,
            field: RealField::new(grid, values)?,
        })
    }

    pub fn save(&self, path: &std::path::Path) -> std::io::Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        self.write_to(&mut w)?;
        w.flush()
    }

    pub fn load(path: &std::path::Path) -> Result<Self, SpectralError> {
        let file = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(file))
    }
}

fn read_u32<R: Read>(r: &mut R) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> std::io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout_is_fixed() {
        let grid = Grid::new(16, 16, 3.0).unwrap();
        let snap = Snapshot {
            name: "theta".into(),
            time: 1.5,
            field: RealField::from_fn(grid, |x1, x2| x1 - x2),
        };
        let mut bytes = Vec::new();
        snap.write_to(&mut bytes).unwrap();
        assert_eq!(bytes.len(), 8 + 4 + 4 + 8 + 8 + 4 + 5 + 8 * 256);
        assert_eq!(&bytes[..8], MAGIC);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 16);
        assert_eq!(f64::from_le_bytes(bytes[16..24].try_into().unwrap()), 3.0);
        assert_eq!(f64::from_le_bytes(bytes[24..32].try_into().unwrap()), 1.5);
        assert_eq!(&bytes[36..41], b"theta");
        let back = Snapshot::read_from(bytes.as_slice()).unwrap();
        assert_eq!(back, snap);
    }

    #[test]
    fn truncated_file_is_an_error() {
        let grid = Grid::new(16, 16, 3.0).unwrap();
        let snap = Snapshot {
            name: "x".into(),
            time: 0.0,
            field: RealField::zeros(grid),
        };
        let mut bytes = Vec::new();
        snap.write_to(&mut bytes).unwrap();
        bytes.truncate(bytes.len() - 3);
        assert!(Snapshot::read_from(bytes.as_slice()).is_err());
        assert!(Snapshot::read_from(&b"NOTASNAP"[..]).is_err());
    }
}
