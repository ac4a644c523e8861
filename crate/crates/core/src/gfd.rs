//! The `GFD1` grid field dump format.
//!
//! Little-endian binary layout:
//!
//! ```text
//! magic   4 bytes  "GFD1"
//! dim     u32
//! counts  dim × u32   per-axis cell counts
//! origin  dim × f64   box corner (cell centers sit at origin + (i + 1/2) h)
//! h       f64         grid spacing
//! values  Π counts × f64, row major (last axis fastest)
//! ```

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::GridGeometry;
use crate::potential::ScalarField;

pub const MAGIC: &[u8; 4] = b"GFD1";

/// Writes a scalar field in GFD1 format.
pub fn write_gfd<const N: usize>(path: &Path, field: &ScalarField<N>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_gfd_to(&mut f, &field.carrier.geom, &field.values)
}

/// Writes raw values on a grid geometry in GFD1 format.
pub fn write_gfd_to<const N: usize>(
    w: &mut impl Write,
    geom: &GridGeometry<N>,
    values: &[f64],
) -> Result<()> {
    if values.len() != geom.len() {
        return Err(Error::Precondition(format!(
            "{} values for {} cells",
            values.len(),
            geom.len()
        )));
    }
    w.write_all(MAGIC)?;
    w.write_all(&(N as u32).to_le_bytes())?;
    for i in 0..N {
        w.write_all(&(geom.shape[i] as u32).to_le_bytes())?;
    }
    for i in 0..N {
        w.write_all(&geom.origin[i].to_le_bytes())?;
    }
    w.write_all(&geom.h.to_le_bytes())?;
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Reads a GFD1 dump; returns the geometry and the cell values.
pub fn read_gfd<const N: usize>(path: &Path) -> Result<(GridGeometry<N>, Vec<f64>)> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 4];
    f.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Precondition("not a GFD1 file".into()));
    }
    let mut u32buf = [0u8; 4];
    f.read_exact(&mut u32buf)?;
    let dim = u32::from_le_bytes(u32buf) as usize;
    if dim != N {
        return Err(Error::Precondition(format!(
            "GFD1 dimension {dim}, expected {N}"
        )));
    }
    let mut shape = [0usize; N];
    for s in shape.iter_mut() {
        f.read_exact(&mut u32buf)?;
        *s = u32::from_le_bytes(u32buf) as usize;
    }
    let mut f64buf = [0u8; 8];
    let mut origin = [0.0; N];
    for o in origin.iter_mut() {
        f.read_exact(&mut f64buf)?;
        *o = f64::from_le_bytes(f64buf);
    }
    f.read_exact(&mut f64buf)?;
    let h = f64::from_le_bytes(f64buf);
    let geom = GridGeometry::new(origin, h, shape);
    let mut values = Vec::with_capacity(geom.len());
    for _ in 0..geom.len() {
        f.read_exact(&mut f64buf)?;
        values.push(f64::from_le_bytes(f64buf));
    }
    Ok((geom, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rasterize, DomainSpec};
    use std::sync::Arc;

    #[test]
    fn round_trip_bit_exact() {
        let dom = Arc::new(rasterize::<2>(&DomainSpec::ball(2, &[0.0, 0.0], 1.0), 24).unwrap());
        let values: Vec<f64> = (0..dom.len()).map(|k| (k as f64).sin() * 1e-3).collect();
        let field = ScalarField::new(dom.clone(), values.clone()).unwrap();
        let dir = std::env::temp_dir().join(format!("gfd_test_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("field.gfd");
        write_gfd(&path, &field).unwrap();
        let (geom, back) = read_gfd::<2>(&path).unwrap();
        assert_eq!(geom, dom.geom);
        assert_eq!(back.len(), values.len());
        for (a, b) in back.iter().zip(values.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        std::fs::remove_dir_all(&dir).ok();
    }
}
