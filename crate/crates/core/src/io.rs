//! Flat binary field container and CSV export.
//!
//! Layout: `PELAB1`, then mode, nx, ny, nz as little-endian u32, then f64
//! values node by node (z fastest) with components interleaved.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{FieldData, HField, SField};
use crate::grid::{DomainMode, Grid3};

const MAGIC: &[u8; 6] = b"PELAB1";
const HEADER: usize = 6 + 16;

pub fn encode(field: &dyn FieldData) -> Vec<u8> {
    let g = field.grid();
    let comps = field.components();
    let mut out = Vec::with_capacity(HEADER + 8 * g.n_nodes() * comps.len());
    out.extend_from_slice(MAGIC);
    for v in [g.mode.code(), g.nx as u32, g.ny as u32, g.nz as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for n in 0..g.n_nodes() {
        for c in &comps {
            out.extend_from_slice(&c[n].to_le_bytes());
        }
    }
    out
}

/// Decodes a container into its grid and component arrays.
pub fn decode(bytes: &[u8]) -> Result<(Grid3, Vec<Vec<f64>>)> {
    if bytes.len() < HEADER || &bytes[..6] != MAGIC {
        return Err(Error::Format("missing PELAB1 header".into()));
    }
    let word = |i: usize| {
        let o = 6 + 4 * i;
        u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap())
    };
    let mode = DomainMode::from_code(word(0))
        .ok_or_else(|| Error::Format(format!("unknown mode code {}", word(0))))?;
    let grid = Grid3::from_parts(mode, word(1) as usize, word(2) as usize, word(3) as usize)?;
    let payload = &bytes[HEADER..];
    let nodes = grid.n_nodes();
    if !payload.len().is_multiple_of(8) || nodes == 0 || !(payload.len() / 8).is_multiple_of(nodes)
    {
        return Err(Error::Format(format!(
            "payload of {} bytes does not fit {nodes} nodes",
            payload.len()
        )));
    }
    let ncomp = payload.len() / 8 / nodes;
    let mut comps = vec![Vec::with_capacity(nodes); ncomp];
    for (i, chunk) in payload.chunks_exact(8).enumerate() {
        comps[i % ncomp].push(f64::from_le_bytes(chunk.try_into().unwrap()));
    }
    Ok((grid, comps))
}

pub fn write_field(path: &Path, field: &dyn FieldData) -> Result<()> {
    fs::write(path, encode(field)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read(path: &Path) -> Result<(Grid3, Vec<Vec<f64>>)> {
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode(&bytes)
}

pub fn read_sfield(path: &Path) -> Result<SField> {
    let (grid, mut comps) = read(path)?;
    if comps.len() != 1 {
        return Err(Error::Format(format!(
            "expected 1 component, found {}",
            comps.len()
        )));
    }
    SField::new(grid, comps.pop().unwrap())
}

pub fn read_hfield(path: &Path) -> Result<HField> {
    let (grid, mut comps) = read(path)?;
    if comps.len() != 2 {
        return Err(Error::Format(format!(
            "expected 2 components, found {}",
            comps.len()
        )));
    }
    let u2 = comps.pop().unwrap();
    let u1 = comps.pop().unwrap();
    HField::new(grid, u1, u2)
}

/// CSV rows `x,y,z,<components>` in storage order.
pub fn to_csv(field: &dyn FieldData) -> String {
    let g = field.grid();
    let comps = field.components();
    let mut s = String::from("x,y,z");
    if comps.len() == 1 {
        s.push_str(",value");
    } else {
        for i in 0..comps.len() {
            let _ = write!(s, ",u{}", i + 1);
        }
    }
    s.push('\n');
    for n in 0..g.n_nodes() {
        let p = g.position(n);
        let _ = write!(s, "{},{},{}", p[0], p[1], p[2]);
        for c in &comps {
            let _ = write!(s, ",{}", c[n]);
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_hfield() {
        let g = Grid3::channel(4, 3, 2).unwrap();
        let u = HField::from_fn(&g, |x, y, z| [x + 10.0 * z, y - z]);
        let bytes = encode(&u);
        assert_eq!(&bytes[..6], b"PELAB1");
        assert_eq!(bytes.len(), HEADER + 8 * 2 * g.n_nodes());
        let (g2, comps) = decode(&bytes).unwrap();
        assert_eq!(g2, g);
        assert_eq!(comps[0], u.u1);
        assert_eq!(comps[1], u.u2);
    }

    #[test]
    fn roundtrip_disk_scalar() {
        let g = Grid3::disk(6, 3).unwrap();
        let f = SField::from_fn(&g, |x, y, z| x * y + z);
        let (g2, comps) = decode(&encode(&f)).unwrap();
        assert_eq!(g2, g);
        assert_eq!(comps, vec![f.values]);
    }

    #[test]
    fn rejects_garbage() {
        assert!(decode(b"nope").is_err());
        let g = Grid3::channel(2, 2, 1).unwrap();
        let mut bytes = encode(&SField::zeros(&g));
        bytes.pop();
        assert!(decode(&bytes).is_err());
    }

    #[test]
    fn csv_header_and_rows() {
        let g = Grid3::channel(2, 1, 1).unwrap();
        let s = to_csv(&SField::constant(&g, 1.5));
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines[0], "x,y,z,value");
        assert_eq!(lines.len(), 1 + g.n_nodes());
        assert!(lines[1].ends_with(",1.5"));
    }
}
