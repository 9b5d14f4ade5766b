//! Deterministic output formats.
//!
//! CSV floats use 17 significant digits in scientific notation, so every
//! `f64` survives a text round trip and identical runs give identical bytes.
//! Binary grids are raw little-endian `f64` in row-major order next to a JSON
//! sidecar describing the shape and the scan.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use freehom_core::dipfinder::{Grid, GridSpec};
use freehom_core::geometry::NormConvention;
use freehom_core::permanent::Algorithm;
use serde::{Deserialize, Serialize};

/// `x` with 17 significant digits, e.g. `3.1415926535897931e0`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv_row<W: Write + ?Sized>(out: &mut W, fields: &[f64]) -> io::Result<()> {
    let mut line = fields
        .iter()
        .map(|&x| fmt_f64(x))
        .collect::<Vec<_>>()
        .join(",");
    line.push('\n');
    out.write_all(line.as_bytes())
}

pub fn write_json<W: Write + ?Sized, T: Serialize + ?Sized>(
    out: &mut W,
    value: &T,
) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    out.write_all(b"\n")
}

pub fn write_json_file<T: Serialize + ?Sized>(path: &Path, value: &T) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_json(&mut w, value)?;
    w.flush()
}

/// Grid as CSV with header `dp<a>,dp<b>,g` (1-based phase indices), row-major.
pub fn write_grid_csv<W: Write + ?Sized>(out: &mut W, grid: &Grid) -> io::Result<()> {
    let spec = &grid.spec;
    writeln!(out, "dp{},dp{},g", spec.free[0] + 1, spec.free[1] + 1)?;
    let r = spec.resolution;
    for i in 0..r {
        let a = spec.coordinate(0, i as f64);
        for j in 0..r {
            write_csv_row(out, &[a, spec.coordinate(1, j as f64), grid.get(i, j)])?;
        }
    }
    Ok(())
}

/// Everything needed to interpret a binary grid file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSidecar {
    pub rows: usize,
    pub cols: usize,
    pub dtype: String,
    pub byte_order: String,
    pub layout: String,
    /// 1-based indices of the row and column phases.
    pub free: [usize; 2],
    pub ranges: [[f64; 2]; 2],
    /// Full phase list; entries at `free` vary over the grid.
    pub fixed_phases: Vec<f64>,
    pub algorithm: Algorithm,
    pub norm: NormConvention,
}

impl GridSidecar {
    pub fn for_spec(spec: &GridSpec) -> Self {
        GridSidecar {
            rows: spec.resolution,
            cols: spec.resolution,
            dtype: "float64".into(),
            byte_order: "little".into(),
            layout: "row_major".into(),
            free: [spec.free[0] + 1, spec.free[1] + 1],
            ranges: spec.ranges,
            fixed_phases: spec.template.clone(),
            algorithm: spec.algorithm,
            norm: spec.norm,
        }
    }

    pub fn to_spec(&self) -> freehom_core::Result<GridSpec> {
        if self.rows != self.cols || self.free.contains(&0) {
            return Err(freehom_core::Error::UnsupportedInput(
                "sidecar does not describe a square grid",
            ));
        }
        let spec = GridSpec {
            template: self.fixed_phases.clone(),
            free: [self.free[0] - 1, self.free[1] - 1],
            ranges: self.ranges,
            resolution: self.rows,
            algorithm: self.algorithm,
            norm: self.norm,
        };
        spec.validate()?;
        Ok(spec)
    }
}

pub fn write_grid_bin<W: Write + ?Sized>(out: &mut W, grid: &Grid) -> io::Result<()> {
    for v in &grid.values {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Read a grid written by [`write_grid_bin`] back, using its sidecar.
pub fn read_grid_bin(bin: &Path, sidecar: &Path) -> io::Result<Grid> {
    let meta: GridSidecar = serde_json::from_reader(BufReader::new(File::open(sidecar)?))?;
    let spec = meta
        .to_spec()
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    let mut bytes = Vec::new();
    File::open(bin)?.read_to_end(&mut bytes)?;
    if bytes.len() != meta.rows * meta.cols * 8 {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            "grid file size does not match sidecar",
        ));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Grid::from_values(spec, values).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn seventeen_digits_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let s = fmt_f64(x);
            prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn csv_row_layout() {
        let mut buf = Vec::new();
        write_csv_row(&mut buf, &[0.0, 4.0, -0.5]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "0.0000000000000000e0,4.0000000000000000e0,-5.0000000000000000e-1\n"
        );
    }

    #[test]
    fn binary_grid_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let spec = GridSpec::new(vec![0.0, 0.0, 0.0], [0, 1], 8).unwrap();
        let grid = freehom_core::dipfinder::scan_grid(&spec).unwrap();
        let bin = dir.path().join("g.bin");
        let side = dir.path().join("g.json");
        let mut f = File::create(&bin).unwrap();
        write_grid_bin(&mut f, &grid).unwrap();
        drop(f);
        write_json_file(&side, &GridSidecar::for_spec(&spec)).unwrap();
        assert_eq!(read_grid_bin(&bin, &side).unwrap(), grid);
        assert_eq!(std::fs::metadata(&bin).unwrap().len(), 8 * 64);
    }

    #[test]
    fn grid_csv_shape() {
        let spec = GridSpec::new(vec![0.0, 0.0], [0, 1], 4).unwrap();
        let grid = freehom_core::dipfinder::scan_grid(&spec).unwrap();
        let mut buf = Vec::new();
        write_grid_csv(&mut buf, &grid).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "dp1,dp2,g");
        assert_eq!(lines.len(), 17);
        assert!(lines[1].ends_with(",4.0000000000000000e0"));
    }
}
