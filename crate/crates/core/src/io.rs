//! CSV, grid-text and JSON formats used by the command-line tool.
//!
//! All CSV files carry a header row, use UTF-8 and `.` as the decimal
//! separator. Numbers are written in Rust's shortest round-trip form, so
//! reading a file back reproduces every value bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{AscentPath, CriticalPoint};
use crate::geometry::{Rect, Vec2};
use crate::kernels::PointCloud;
use crate::levelset::{GridField, GridSpec, Mask};
use crate::oracle::{OracleField, RateTable};

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn data_error(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Data { path: path.display().to_string(), line, message: message.into() }
}

/// Writes `x,y` rows.
pub fn write_points_csv(path: &Path, points: &[Vec2]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "x,y")?;
    for p in points {
        writeln!(w, "{},{}", p.x, p.y)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a point cloud from a CSV with a header row. Columns named `x` and
/// `y` are used when present, otherwise the first two columns.
pub fn read_points_csv(path: &Path) -> Result<PointCloud> {
    let file = File::open(path)?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).flexible(true).from_reader(file);
    let headers = reader.headers().map_err(|e| data_error(path, 1, e.to_string()))?.clone();
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (ix, iy) = match (find("x"), find("y")) {
        (Some(ix), Some(iy)) => (ix, iy),
        _ if headers.len() >= 2 => (0, 1),
        _ => return Err(data_error(path, 1, "expected a header with at least two columns")),
    };
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            data_error(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let field = |k: usize| -> Result<f64> {
            let raw = record.get(k).ok_or_else(|| data_error(path, line, format!("missing column {}", k + 1)))?;
            let v: f64 = raw.parse().map_err(|_| data_error(path, line, format!("cannot parse {raw:?} as a number")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(data_error(path, line, format!("non-finite coordinate {raw:?}")))
            }
        };
        points.push(Vec2::new(field(ix)?, field(iy)?));
    }
    if points.is_empty() {
        return Err(data_error(path, 1, "no data rows"));
    }
    PointCloud::new(points)
}

/// Writes `path_id,step,x,y`.
pub fn write_paths_csv<'a>(path: &Path, paths: impl IntoIterator<Item = &'a AscentPath>) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "path_id,step,x,y")?;
    for (id, p) in paths.into_iter().enumerate() {
        for (step, v) in p.vertices.iter().enumerate() {
            writeln!(w, "{id},{step},{},{}", v.x, v.y)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads `path_id,step,x,y` rows back into vertex lists, ordered by id.
pub fn read_paths_csv(path: &Path) -> Result<Vec<Vec<Vec2>>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_path(path)?;
    let mut out: Vec<Vec<Vec2>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| data_error(path, e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let parse = |k: usize| -> Result<f64> {
            record.get(k).and_then(|s| s.parse().ok()).ok_or_else(|| data_error(path, line, format!("bad value in column {}", k + 1)))
        };
        let id = parse(0)? as usize;
        if id >= out.len() {
            out.resize(id + 1, Vec::new());
        }
        out[id].push(Vec2::new(parse(2)?, parse(3)?));
    }
    Ok(out)
}

/// Writes `x,y,value` per grid node.
pub fn write_field_csv(path: &Path, field: &GridField) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "x,y,value")?;
    let g = field.grid();
    for (k, v) in field.values().iter().enumerate() {
        let (i, j) = g.coords(k);
        writeln!(w, "{},{},{}", g.x(i), g.y(j), v)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `x,y,value,std_error,saturated` per grid node.
pub fn write_oracle_field_csv(path: &Path, oracle: &OracleField) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "x,y,value,std_error,saturated")?;
    let field = &oracle.field;
    let g = field.grid();
    for (k, v) in field.values().iter().enumerate() {
        let (i, j) = g.coords(k);
        writeln!(w, "{},{},{},{},{}", g.x(i), g.y(j), v, oracle.std_errors[k], u8::from(field.is_saturated(k)))?;
    }
    w.flush()?;
    Ok(())
}

/// Plain-text grid: a header line `nx ny xmin xmax ymin ymax`, then `ny`
/// rows of `nx` whitespace-separated values, lowest `y` first.
pub fn write_field_grid(path: &Path, field: &GridField) -> Result<()> {
    let mut w = create(path)?;
    let g = field.grid();
    let b = g.bounds;
    writeln!(w, "{} {} {} {} {} {}", g.nx, g.ny, b.min.x, b.max.x, b.min.y, b.max.y)?;
    for j in 0..g.ny {
        let row: Vec<String> = (0..g.nx).map(|i| field.value(i, j).to_string()).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_field_grid(path: &Path) -> Result<GridField> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header = lines.next().ok_or_else(|| data_error(path, 1, "empty grid file"))??;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 6 {
        return Err(data_error(path, 1, "header must read `nx ny xmin xmax ymin ymax`"));
    }
    let nx: usize = h[0].parse().map_err(|_| data_error(path, 1, "bad nx"))?;
    let ny: usize = h[1].parse().map_err(|_| data_error(path, 1, "bad ny"))?;
    let mut b = [0.0; 4];
    for (k, s) in h[2..].iter().enumerate() {
        b[k] = s.parse().map_err(|_| data_error(path, 1, format!("bad bound {s:?}")))?;
    }
    let grid = GridSpec::new(Rect::new(b[0], b[1], b[2], b[3]), nx, ny).map_err(|e| data_error(path, 1, e.to_string()))?;
    let mut values = Vec::with_capacity(grid.len());
    for (row, line) in lines.enumerate() {
        let line = line?;
        let lineno = row as u64 + 2;
        if line.trim().is_empty() {
            continue;
        }
        let before = values.len();
        for s in line.split_whitespace() {
            values.push(s.parse::<f64>().map_err(|_| data_error(path, lineno, format!("cannot parse {s:?}")))?);
        }
        if values.len() - before != nx {
            return Err(data_error(path, lineno, format!("expected {nx} values")));
        }
    }
    GridField::new(grid, values).map_err(|e| data_error(path, 1, e.to_string()))
}

/// Writes `i,j,x,y` for each member node of the mask.
pub fn write_mask_csv(path: &Path, grid: &GridSpec, mask: &Mask) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "i,j,x,y")?;
    for k in mask.indices() {
        let (i, j) = grid.coords(k);
        writeln!(w, "{i},{j},{},{}", grid.x(i), grid.y(j))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the node indices of an `i,j,x,y` mask file onto `grid`.
pub fn read_mask_csv(path: &Path, grid: &GridSpec) -> Result<Mask> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let mut mask = Mask::empty(grid);
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let idx = |k: usize| record.get(k).and_then(|s| s.parse::<usize>().ok()).ok_or_else(|| data_error(path, line, "bad index"));
        let (i, j) = (idx(0)?, idx(1)?);
        if i >= grid.nx || j >= grid.ny {
            return Err(data_error(path, line, "index outside the grid"));
        }
        mask.set(i, j, true);
    }
    Ok(mask)
}

/// Writes `x,y,kind,eigenvalue_min,eigenvalue_max`.
pub fn write_critical_points_csv(path: &Path, points: &[CriticalPoint]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "x,y,kind,eigenvalue_min,eigenvalue_max")?;
    for c in points {
        let (a, b) = c.hessian_eigenvalues;
        writeln!(w, "{},{},{},{},{}", c.location.x, c.location.y, c.kind.as_str(), a, b)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `n,replicate,sup_error`.
pub fn write_rate_table_csv(path: &Path, table: &RateTable) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "n,replicate,sup_error")?;
    for r in &table.rows {
        writeln!(w, "{},{},{}", r.n, r.replicate, r.sup_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::StopReason;

    #[test]
    fn points_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("pts.csv");
        let pts = vec![Vec2::new(0.1, -2.5e-7), Vec2::new(1.0 / 3.0, 7.0)];
        write_points_csv(&p, &pts).unwrap();
        assert_eq!(read_points_csv(&p).unwrap().points(), &pts[..]);
    }

    #[test]
    fn malformed_row_names_its_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        std::fs::write(&p, "x,y\n1,2\n3,4\n5,oops\n").unwrap();
        match read_points_csv(&p) {
            Err(Error::Data { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        std::fs::write(&p, "a,b\n1,2\n").unwrap();
        assert_eq!(read_points_csv(&p).unwrap().len(), 1);
    }

    #[test]
    fn grid_text_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.txt");
        let g = GridSpec::new(Rect::new(-1.0, 2.0, 0.5, 1.5), 4, 3).unwrap();
        let f = GridField::from_fn(g, |x| x.x * x.y + 0.1);
        write_field_grid(&p, &f).unwrap();
        assert_eq!(read_field_grid(&p).unwrap(), f);
    }

    #[test]
    fn mask_and_paths_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = GridSpec::new(Rect::unit(), 5, 5).unwrap();
        let mut m = Mask::empty(&g);
        m.set(1, 2, true);
        m.set(4, 0, true);
        let p = dir.path().join("m.csv");
        write_mask_csv(&p, &g, &m).unwrap();
        assert_eq!(read_mask_csv(&p, &g).unwrap(), m);

        let mut a = AscentPath::single(Vec2::new(0.5, 0.25), 1.0, 0.0, 1.0, StopReason::GradientTolerance);
        a.vertices.push(Vec2::new(0.75, 0.125));
        let b = AscentPath::single(Vec2::new(-1.0, 3.0), 1.0, 0.0, 1.0, StopReason::GradientTolerance);
        let pp = dir.path().join("p.csv");
        write_paths_csv(&pp, [&a, &b]).unwrap();
        assert_eq!(read_paths_csv(&pp).unwrap(), vec![a.vertices.clone(), b.vertices.clone()]);
    }
}
