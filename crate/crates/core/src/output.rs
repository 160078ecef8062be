//! CSV output. All writers build the whole text in memory, so a file is
//! either complete or absent, and rows come in a fixed order.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::reference::{McEnvelope, ReferenceField, Statistics};
use crate::solver::{GpcField, Grid};

pub const FIELD_HEADER_1D: &str = "t,x,component,kind,index,value";
pub const FIELD_HEADER_2D: &str = "t,x,y,component,kind,index,value";

fn header(grid: &Grid) -> &'static str {
    if grid.space_dim == 2 {
        FIELD_HEADER_2D
    } else {
        FIELD_HEADER_1D
    }
}

/// 17 significant digits.
pub fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

fn coords(grid: &Grid, t: f64, i: usize, j: usize) -> String {
    if grid.space_dim == 2 {
        format!("{t},{},{}", grid.x_center(i), grid.y_center(j))
    } else {
        format!("{t},{}", grid.x_center(i))
    }
}

/// Writes `text` to `path`, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// `mode` rows of every snapshot, ordered by snapshot, then y, x, component
/// and mode index.
pub fn field_csv(grid: &Grid, snapshots: &[&GpcField]) -> String {
    let mut s = String::from(header(grid));
    s.push('\n');
    for f in snapshots {
        for j in 0..f.ny {
            for i in 0..f.nx {
                let at = coords(grid, f.time, i, j);
                for c in 0..f.components {
                    for (k, v) in f.modes_of(i, j, c).iter().enumerate() {
                        let _ = writeln!(s, "{at},{c},mode,{k},{}", fmt_value(*v));
                    }
                }
            }
        }
    }
    s
}

/// `mean` and `std` rows (index 0) of every `(time, statistics)` snapshot.
pub fn stats_csv(grid: &Grid, snapshots: &[(f64, &Statistics)]) -> String {
    let mut s = String::from(header(grid));
    s.push('\n');
    for (t, st) in snapshots {
        let nc = st.components;
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let at = coords(grid, *t, i, j);
                for c in 0..nc {
                    let idx = (j * grid.nx + i) * nc + c;
                    let _ = writeln!(s, "{at},{c},mean,0,{}", fmt_value(st.mean[idx]));
                    let _ = writeln!(s, "{at},{c},std,0,{}", fmt_value(st.std[idx]));
                }
            }
        }
    }
    s
}

pub fn write_field_csv(path: &Path, grid: &Grid, snapshots: &[&GpcField]) -> Result<()> {
    write_text(path, &field_csv(grid, snapshots))
}

pub fn write_stats_csv(path: &Path, grid: &Grid, snapshots: &[(f64, &Statistics)]) -> Result<()> {
    write_text(path, &stats_csv(grid, snapshots))
}

/// Reads the last snapshot of a `mode` CSV written by [`field_csv`] into a
/// field on `grid`.
pub fn parse_field_csv(text: &str, grid: &Grid) -> Result<GpcField> {
    let bad = |line: usize, msg: String| Error::invalid(format!("field csv line {line}: {msg}"));
    let mut lines = text.lines().enumerate();
    let expected = header(grid);
    match lines.next() {
        Some((_, h)) if h.trim() == expected => {}
        other => {
            return Err(bad(
                1,
                format!(
                    "expected header `{expected}`, got `{}`",
                    other.map_or("", |l| l.1)
                ),
            ));
        }
    }
    let off = if grid.space_dim == 2 { 3 } else { 2 };
    // (t, component, index, value) in file order
    let mut rows: Vec<(f64, usize, usize, f64)> = Vec::new();
    for (n, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != off + 4 {
            return Err(bad(n + 1, format!("expected {} columns", off + 4)));
        }
        if cols[off + 1] != "mode" {
            return Err(bad(
                n + 1,
                format!("expected kind `mode`, got `{}`", cols[off + 1]),
            ));
        }
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| bad(n + 1, format!("`{s}`: {e}")))
        };
        let int = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| bad(n + 1, format!("`{s}`: {e}")))
        };
        rows.push((
            num(cols[0])?,
            int(cols[off])?,
            int(cols[off + 2])?,
            num(cols[off + 3])?,
        ));
    }
    let Some(t_last) = rows.last().map(|r| r.0) else {
        return Err(Error::invalid("field csv holds no snapshot"));
    };
    let rows: Vec<_> = rows.into_iter().filter(|r| r.0 == t_last).collect();
    let components = rows.iter().map(|r| r.1).max().unwrap_or(0) + 1;
    let modes = rows.iter().map(|r| r.2).max().unwrap_or(0) + 1;
    let stride = components * modes;
    if rows.len() != grid.cells() * stride {
        return Err(Error::invalid(format!(
            "field csv has {} rows at t = {t_last}, expected {} cells x {stride}",
            rows.len(),
            grid.cells()
        )));
    }
    let mut f = GpcField::zeros(grid, components, modes);
    f.time = t_last;
    for (n, (_, c, k, v)) in rows.into_iter().enumerate() {
        if n % stride != c * modes + k {
            return Err(Error::invalid(
                "field csv rows are not in (cell, component, index) order",
            ));
        }
        f.data[n] = v;
    }
    Ok(f)
}

/// `row,col,value` of a matrix.
pub fn matrix_csv(m: &DMatrix<f64>) -> String {
    let mut s = String::from("row,col,value\n");
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let _ = writeln!(s, "{r},{c},{}", fmt_value(m[(r, c)]));
        }
    }
    s
}

/// `k,row,col,value` of a family of matrices.
pub fn tensor_csv(ms: &[DMatrix<f64>]) -> String {
    let mut s = String::from("k,row,col,value\n");
    for (k, m) in ms.iter().enumerate() {
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let _ = writeln!(s, "{k},{r},{c},{}", fmt_value(m[(r, c)]));
            }
        }
    }
    s
}

/// `index,value` of a single mode vector.
pub fn modes_csv(modes: &[f64]) -> String {
    let mut s = String::from("index,value\n");
    for (k, v) in modes.iter().enumerate() {
        let _ = writeln!(s, "{k},{}", fmt_value(*v));
    }
    s
}

/// Reference values at the cell centres of `grid` for each stochastic
/// sample point in `xis`: `x[,y],xi,component,value`.
pub fn reference_csv(reference: &ReferenceField, grid: &Grid, components: usize, xis: &[f64]) -> String {
    let mut s = String::from(if grid.space_dim == 2 {
        "x,y,xi,component,value\n"
    } else {
        "x,xi,component,value\n"
    });
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let at = if grid.space_dim == 2 {
                format!("{},{}", grid.x_center(i), grid.y_center(j))
            } else {
                format!("{}", grid.x_center(i))
            };
            for xi in xis {
                for c in 0..components {
                    let v = reference.cell_value(grid, i, j, c, *xi);
                    let _ = writeln!(s, "{at},{xi},{c},{}", fmt_value(v));
                }
            }
        }
    }
    s
}

/// Monte Carlo envelope along the profile: `x,component,min,max,mean`.
pub fn envelope_csv(env: &McEnvelope) -> String {
    let mut s = String::from("x,component,min,max,mean\n");
    for (i, x) in env.x.iter().enumerate() {
        for c in 0..env.min.len() {
            let _ = writeln!(
                s,
                "{x},{c},{},{},{}",
                fmt_value(env.min[c][i]),
                fmt_value(env.max[c][i]),
                fmt_value(env.mean[c][i])
            );
        }
    }
    s
}

/// Galerkin mean and std along the profile: `x,component,mean,std`.
pub fn profile_csv(x: &[f64], mean: &[Vec<f64>], std: &[Vec<f64>]) -> String {
    let mut s = String::from("x,component,mean,std\n");
    for (i, xv) in x.iter().enumerate() {
        for c in 0..mean.len() {
            let _ = writeln!(s, "{xv},{c},{},{}", fmt_value(mean[c][i]), fmt_value(std[c][i]));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::GalerkinTensor;
    use crate::basis::HaarTypeBasis;
    use crate::reference::mean_std;
    use crate::solver::Boundary;

    fn one_cell() -> (Grid, GpcField) {
        let mut g = Grid::new_1d(8, (0.0, 1.0), Boundary::Transmissive).unwrap();
        g.nx = 1;
        let mut f = GpcField::zeros(&g, 1, 2);
        f.data.copy_from_slice(&[2.0, 1.0]);
        (g, f)
    }

    fn values(csv: &str) -> Vec<f64> {
        csv.lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
            .collect()
    }

    #[test]
    fn single_cell_field_and_statistics() {
        let (g, f) = one_cell();
        let csv = field_csv(&g, &[&f]);
        assert_eq!(csv.lines().next().unwrap(), "t,x,component,kind,index,value");
        assert_eq!(values(&csv), vec![2.0, 1.0]);
        assert!(csv
            .lines()
            .nth(1)
            .unwrap()
            .contains(",0,mode,0,2.0000000000000000e0"));

        let t = GalerkinTensor::new(&HaarTypeBasis::classical_haar(0).unwrap()).unwrap();
        let st = mean_std(&f, &t);
        let csv = stats_csv(&g, &[(0.0, &st)]);
        let kinds: Vec<&str> = csv
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(3).unwrap())
            .collect();
        assert_eq!(kinds, vec!["mean", "std"]);
        let v = values(&csv);
        assert!((v[0] - 2.0).abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_snapshot_list_is_header_only() {
        let (g, _) = one_cell();
        assert_eq!(field_csv(&g, &[]), "t,x,component,kind,index,value\n");
        assert_eq!(stats_csv(&g, &[]), "t,x,component,kind,index,value\n");
    }

    #[test]
    fn two_dimensional_rows_are_y_major() {
        let g = Grid::new_2d(8, 8, (0.0, 1.0), (0.0, 1.0), Boundary::Periodic).unwrap();
        let mut f = GpcField::zeros(&g, 2, 1);
        for (n, v) in f.data.iter_mut().enumerate() {
            *v = n as f64;
        }
        let csv = field_csv(&g, &[&f]);
        assert_eq!(values(&csv), (0..128).map(|n| n as f64).collect::<Vec<_>>());
        let row = csv.lines().nth(3).unwrap();
        assert!(row.starts_with("0,0.1875,0.0625,0,mode,0,"), "{row}");
    }

    #[test]
    fn field_csv_round_trips() {
        let g = Grid::new_1d(10, (-1.0, 1.0), Boundary::Transmissive).unwrap();
        let mut a = GpcField::zeros(&g, 2, 4);
        for (n, v) in a.data.iter_mut().enumerate() {
            *v = (n as f64 * 0.37).sin() / 3.0;
        }
        let mut b = a.clone();
        b.time = 0.25;
        let back = parse_field_csv(&field_csv(&g, &[&a, &b]), &g).unwrap();
        assert_eq!(back, b);
        assert!(parse_field_csv("t,x,component,kind,index,value\n", &g).is_err());
    }

    #[test]
    fn write_text_creates_directories() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a/b/c.csv");
        write_text(&p, "x\n").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "x\n");
        let blocked = dir.path().join("a/b/c.csv/d.csv");
        assert!(matches!(write_text(&blocked, "x"), Err(Error::Io { .. })));
    }
}
