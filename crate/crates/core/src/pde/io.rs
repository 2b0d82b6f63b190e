//! Field serialization.
//!
//! Binary layout (little endian): `u64 N`, `f64 spacing`, `u64 mask hash`,
//! then `N·N` values of type `f64`, row-major with `x` fastest.

use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::RingGrid;

use super::field::ScalarField;

pub fn write_field_binary(field: &ScalarField, path: &Path) -> Result<()> {
    let grid = field.grid();
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    out.write_all(&(grid.n() as u64).to_le_bytes())?;
    out.write_all(&grid.spacing().to_le_bytes())?;
    out.write_all(&grid.mask_hash().to_le_bytes())?;
    for v in field.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a binary field onto `grid`, checking size, spacing and mask hash.
pub fn read_field_binary(path: &Path, grid: &Arc<RingGrid>, outer_value: f64, inner_value: f64) -> Result<ScalarField> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?
        .read_to_end(&mut bytes)?;
    if bytes.len() < 24 {
        return Err(Error::Io(format!("{}: truncated header", path.display())));
    }
    let word = |i: usize| -> [u8; 8] { bytes[8 * i..8 * i + 8].try_into().unwrap() };
    let n = u64::from_le_bytes(word(0)) as usize;
    let spacing = f64::from_le_bytes(word(1));
    let hash = u64::from_le_bytes(word(2));
    if n != grid.n() {
        return Err(Error::invalid(format!("field has N = {n}, grid has N = {}", grid.n())));
    }
    if (spacing - grid.spacing()).abs() > 1e-12 * grid.spacing() {
        return Err(Error::invalid(format!(
            "field spacing {spacing} does not match grid spacing {}",
            grid.spacing()
        )));
    }
    if hash != grid.mask_hash() {
        return Err(Error::invalid("field mask hash does not match the ring"));
    }
    if bytes.len() != 24 + 8 * n * n {
        return Err(Error::Io(format!("{}: expected {} values", path.display(), n * n)));
    }
    let values = (0..n * n).map(|k| f64::from_le_bytes(word(3 + k))).collect();
    ScalarField::from_values(grid.clone(), values, outer_value, inner_value)
}

/// `x,y,u` rows for interior nodes.
pub fn write_field_csv(field: &ScalarField, path: &Path) -> Result<()> {
    let grid = field.grid();
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "x,y,u")?;
    for &idx in grid.interior_nodes() {
        let (i, j) = grid.coords(idx);
        let p = grid.position(i, j);
        writeln!(out, "{},{},{}", p[0], p[1], field.at(idx))?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_ball, rasterize, ConvexRing};

    #[test]
    fn binary_roundtrip() {
        let ring = ConvexRing::new(
            make_ball([0.0, 0.0], 2.0, 128).unwrap(),
            make_ball([0.0, 0.0], 1.0, 128).unwrap(),
        )
        .unwrap();
        let grid = Arc::new(rasterize(&ring, 64, 0.05).unwrap());
        let f = ScalarField::from_fn(grid.clone(), |p| p[0] * p[1], 0.0, 1.0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.bin");
        write_field_binary(&f, &path).unwrap();
        let g = read_field_binary(&path, &grid, 0.0, 1.0).unwrap();
        assert_eq!(f.values(), g.values());

        let other = ConvexRing::new(
            make_ball([0.0, 0.0], 2.0, 128).unwrap(),
            make_ball([0.2, 0.0], 1.0, 128).unwrap(),
        )
        .unwrap();
        let other_grid = Arc::new(rasterize(&other, 64, 0.05).unwrap());
        assert!(read_field_binary(&path, &other_grid, 0.0, 1.0).is_err());
    }
}
