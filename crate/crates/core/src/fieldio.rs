//! Binary field-file format.
//!
//! Layout (little-endian):
//!
//! ```text
//! magic   4 bytes  "QNKF"
//! version u32      1
//! dtype   u8       1 = f64
//! dim     u8       spatial dimension d
//! batch   u64
//! chans   u64
//! per axis (d times):
//!   kind  u8       0 = uniform endpoint, 1 = periodic, 2 = nonuniform
//!   n     u64
//!   coords n x f64
//! payload batch * chans * prod(n) x f64, row-major (last axis fastest)
//! ```
//!
//! Coordinates are stored explicitly for every axis so nonuniform grids
//! round-trip without a side channel.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::ArrayD;

use crate::error::{Error, Result};
use crate::grid::{Axis1D, AxisKind, FieldTensor, GridSpec};

const MAGIC: &[u8; 4] = b"QNKF";
const VERSION: u32 = 1;
const DTYPE_F64: u8 = 1;

fn kind_code(kind: AxisKind) -> u8 {
    match kind {
        AxisKind::UniformEndpoint => 0,
        AxisKind::Periodic => 1,
        AxisKind::Nonuniform => 2,
    }
}

fn kind_from_code(code: u8) -> Result<AxisKind> {
    match code {
        0 => Ok(AxisKind::UniformEndpoint),
        1 => Ok(AxisKind::Periodic),
        2 => Ok(AxisKind::Nonuniform),
        other => Err(Error::Format(format!("unknown axis kind code {other}"))),
    }
}

pub fn write_field<W: Write>(mut w: W, field: &FieldTensor) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[DTYPE_F64, field.grid().dim() as u8])?;
    w.write_all(&(field.batch() as u64).to_le_bytes())?;
    w.write_all(&(field.channels() as u64).to_le_bytes())?;
    for axis in field.grid().axes() {
        w.write_all(&[kind_code(axis.kind())])?;
        w.write_all(&(axis.len() as u64).to_le_bytes())?;
        for c in axis.coords() {
            w.write_all(&c.to_le_bytes())?;
        }
    }
    for v in field
        .data()
        .as_slice()
        .expect("field data is standard layout")
    {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_field_path<P: AsRef<Path>>(path: P, field: &FieldTensor) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_field(std::io::BufWriter::new(f), field)
}

fn read_exact_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_exact_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

pub fn read_field<R: Read>(mut r: R) -> Result<FieldTensor> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic; not a field file".into()));
    }
    let mut v = [0u8; 4];
    r.read_exact(&mut v)?;
    let version = u32::from_le_bytes(v);
    if version != VERSION {
        return Err(Error::Format(format!(
            "unsupported field file version {version}"
        )));
    }
    let mut hdr = [0u8; 2];
    r.read_exact(&mut hdr)?;
    if hdr[0] != DTYPE_F64 {
        return Err(Error::Format(format!("unsupported dtype code {}", hdr[0])));
    }
    let dim = hdr[1] as usize;
    if dim == 0 || dim > 3 {
        return Err(Error::Format(format!("unsupported dimension {dim}")));
    }
    let batch = read_exact_u64(&mut r)? as usize;
    let chans = read_exact_u64(&mut r)? as usize;
    let mut axes = Vec::with_capacity(dim);
    for _ in 0..dim {
        let mut kind = [0u8; 1];
        r.read_exact(&mut kind)?;
        let kind = kind_from_code(kind[0])?;
        let n = read_exact_u64(&mut r)? as usize;
        if n == 0 || n > 1 << 24 {
            return Err(Error::Format(format!("implausible axis length {n}")));
        }
        let mut coords = Vec::with_capacity(n);
        for _ in 0..n {
            coords.push(read_exact_f64(&mut r)?);
        }
        axes.push(Axis1D::from_coords_with_kind(coords, kind)?);
    }
    let grid = GridSpec::new(axes)?;
    let total = batch
        .checked_mul(chans)
        .and_then(|t| t.checked_mul(grid.num_nodes()))
        .ok_or_else(|| Error::Format("payload size overflow".into()))?;
    let mut payload = Vec::with_capacity(total);
    for _ in 0..total {
        payload.push(read_exact_f64(&mut r)?);
    }
    let mut shape = vec![batch, chans];
    shape.extend(grid.spatial_shape());
    let data = ArrayD::from_shape_vec(ndarray::IxDyn(&shape), payload)
        .map_err(|e| Error::Format(format!("payload shape: {e}")))?;
    FieldTensor::new(data, grid)
}

pub fn read_field_path<P: AsRef<Path>>(path: P) -> Result<FieldTensor> {
    let f = std::fs::File::open(path)?;
    read_field(std::io::BufReader::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{nonuniform_grid, sample_field, FieldId, NonuniformFamily};

    #[test]
    fn roundtrip_uniform_and_nonuniform() {
        let g = crate::grid::uniform_grid(&[5, 3]).unwrap();
        let x = sample_field(&FieldId::Mixed2d, &g, 2).unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &x).unwrap();
        let y = read_field(buf.as_slice()).unwrap();
        assert_eq!(x, y);

        let g =
            nonuniform_grid(&NonuniformFamily::BoundaryRefined { strength: 2.0 }, &[7]).unwrap();
        let x = sample_field(&FieldId::Quadratic1d, &g, 1).unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &x).unwrap();
        let y = read_field(buf.as_slice()).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn roundtrip_3d() {
        let g = crate::grid::uniform_grid(&[3, 4, 2]).unwrap();
        let x = sample_field(&FieldId::Constant(-0.5), &g, 3).unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &x).unwrap();
        assert_eq!(read_field(buf.as_slice()).unwrap(), x);
    }

    #[test]
    fn bad_magic_rejected() {
        let err = read_field(&b"NOPE...."[..]).unwrap_err();
        assert!(matches!(err, Error::Format(_)));
    }

    #[test]
    fn truncated_payload_rejected() {
        let g = crate::grid::uniform_grid(&[4]).unwrap();
        let x = sample_field(&FieldId::Linear, &g, 1).unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &x).unwrap();
        buf.truncate(buf.len() - 4);
        assert!(read_field(buf.as_slice()).is_err());
    }
}
