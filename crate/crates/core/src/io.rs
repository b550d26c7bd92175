//! Grid-function serialization: CSV (coordinates then value) and a binary
//! format with a JSON header line followed by little-endian f64 samples.
//! The binary form round-trips bit-exactly; CSV uses shortest round-trip
//! decimal so values survive a write/read cycle unchanged as well.

use crate::error::{Error, Result};
use crate::grid::{Axis, BoundaryPolicy, Grid, GridFunction};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

#[derive(Serialize, Deserialize)]
struct BinaryHeader {
    axes: Vec<Axis>,
    boundary_policy: BoundaryPolicy,
    count: usize,
}

pub fn write_binary<W: Write>(f: &GridFunction, mut w: W) -> Result<()> {
    let header = BinaryHeader {
        axes: f.grid().axes().to_vec(),
        boundary_policy: f.boundary_policy,
        count: f.values().len(),
    };
    let mut line = serde_json::to_string(&header)?;
    line.push('\n');
    w.write_all(line.as_bytes())?;
    for v in f.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(r: R) -> Result<GridFunction> {
    let mut reader = BufReader::new(r);
    let mut line = String::new();
    reader.read_line(&mut line)?;
    let header: BinaryHeader = serde_json::from_str(line.trim_end())?;
    let grid = Grid::from_axes(header.axes);
    if header.count != grid.len() {
        return Err(Error::Parse(format!(
            "header count {} does not match lattice size {}",
            header.count,
            grid.len()
        )));
    }
    let mut values = Vec::with_capacity(header.count);
    let mut buf = [0u8; 8];
    for _ in 0..header.count {
        reader.read_exact(&mut buf)?;
        values.push(f64::from_le_bytes(buf));
    }
    let mut f = GridFunction::from_values(grid, values)?;
    f.boundary_policy = header.boundary_policy;
    Ok(f)
}

pub fn write_binary_file(f: &GridFunction, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_binary(f, std::io::BufWriter::new(file))
}

pub fn read_binary_file(path: impl AsRef<Path>) -> Result<GridFunction> {
    let file = std::fs::File::open(path)?;
    read_binary(file)
}

pub fn write_csv<W: Write>(f: &GridFunction, mut w: W) -> Result<()> {
    let dim = f.grid().dim();
    let mut header: Vec<String> = (0..dim).map(|a| format!("x{a}")).collect();
    header.push("value".into());
    writeln!(w, "{}", header.join(","))?;
    for (flat, v) in f.values().iter().enumerate() {
        let coords = f.grid().coords(flat);
        let mut row: Vec<String> = coords.iter().map(|c| format!("{c:?}")).collect();
        row.push(format!("{v:?}"));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Read a CSV produced by `write_csv`, reconstructing the lattice from the
/// coordinate columns (uniform spacing, symmetric box).
pub fn read_csv<R: Read>(r: R) -> Result<GridFunction> {
    let reader = BufReader::new(r);
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut dim = 0usize;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if i == 0 {
            dim = line.split(',').count() - 1;
            if dim == 0 || dim > 3 {
                return Err(Error::Parse(format!("bad csv header `{line}`")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 1 {
            return Err(Error::Parse(format!(
                "row {i}: expected {} fields",
                dim + 1
            )));
        }
        let mut nums = Vec::with_capacity(dim + 1);
        for f in &fields {
            nums.push(
                f.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {i}: {e}")))?,
            );
        }
        let v = nums.pop().unwrap();
        rows.push((nums, v));
    }
    if rows.is_empty() {
        return Err(Error::Parse("empty csv".into()));
    }

    let mut axes = Vec::with_capacity(dim);
    for a in 0..dim {
        let mut coords: Vec<f64> = rows.iter().map(|(c, _)| c[a]).collect();
        coords.sort_by(|x, y| x.partial_cmp(y).unwrap());
        coords.dedup();
        if coords.len() < 3 || coords.len() % 2 == 0 {
            return Err(Error::Parse(format!("axis {a}: not a symmetric lattice")));
        }
        let h = coords[1] - coords[0];
        for w in coords.windows(2) {
            if ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0) {
                return Err(Error::Parse(format!("axis {a}: non-uniform spacing")));
            }
        }
        if (coords[0] + coords[coords.len() - 1]).abs() > 1e-9 * h {
            return Err(Error::Parse(format!("axis {a}: box not symmetric")));
        }
        axes.push(Axis {
            half_cells: coords.len() / 2,
            spacing: h,
        });
    }
    let grid = Grid::from_axes(axes);
    if rows.len() != grid.len() {
        return Err(Error::Parse(format!(
            "row count {} does not fill the {}-point lattice",
            rows.len(),
            grid.len()
        )));
    }
    let mut values = vec![f64::NAN; grid.len()];
    for (coords, v) in rows {
        let idx: Vec<usize> = coords
            .iter()
            .zip(grid.axes())
            .map(|(&c, ax)| {
                let k = (c / ax.spacing).round() as i64 + ax.half_cells as i64;
                k as usize
            })
            .collect();
        values[grid.flatten(&idx)] = v;
    }
    GridFunction::from_values(grid, values)
}

pub fn write_csv_file(f: &GridFunction, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv(f, std::io::BufWriter::new(file))
}

pub fn read_csv_file(path: impl AsRef<Path>) -> Result<GridFunction> {
    let file = std::fs::File::open(path)?;
    read_csv(file)
}
