//! On-disk formats: diagnostics/geometry CSV, contour snapshots, and raw
//! binary field snapshots.
//!
//! All floating-point text is written in shortest round-trip form, so
//! reading a value back yields the identical bits and identical inputs
//! produce byte-identical files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use bqpatch_core::contour::Contour;
use bqpatch_core::diagnostics::{DiagnosticsRecord, LowDissipationEntry};
use bqpatch_core::field::RealField;
use bqpatch_core::grid::Grid;

use crate::error::{CliError, Result};

/// Shortest decimal form that parses back to the same f64 bits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Column order of the diagnostics CSV, one per record field.
pub const DIAG_COLUMNS: [&str; 18] = [
    "t",
    "e_p",
    "e_k",
    "e_t",
    "ep_prime",
    "enstrophy",
    "grad_u_sq",
    "cum_dissipation",
    "a_t",
    "b_form1",
    "b_form2",
    "pe_grad_sq",
    "hdot1_sq",
    "cum_hdot1",
    "h_neg2",
    "residual_energy",
    "residual_ep_rate",
    "residual_epp",
];

pub fn diag_row(r: &DiagnosticsRecord) -> [f64; 18] {
    [
        r.t,
        r.e_p,
        r.e_k,
        r.e_t,
        r.ep_prime,
        r.enstrophy,
        r.grad_u_sq,
        r.cum_dissipation,
        r.a_t,
        r.b_form1,
        r.b_form2,
        r.pe_grad_sq,
        r.hdot1_sq,
        r.cum_hdot1,
        r.h_neg2,
        r.residual_energy,
        r.residual_ep_rate,
        r.residual_epp,
    ]
}

/// Column order of the per-output patch-geometry CSV.
pub const GEOM_COLUMNS: [&str; 10] = [
    "t",
    "area",
    "perimeter",
    "max_abs_curvature",
    "horizontal_extent",
    "inscribed_radius",
    "inscribed_center_x1",
    "inscribed_center_x2",
    "centroid_height",
    "markers",
];

pub const LOWDISS_COLUMNS: [&str; 6] =
    ["n", "window_start", "t_n", "value", "window_mean", "nt_sixth"];

pub fn lowdiss_row(e: &LowDissipationEntry) -> [f64; 6] {
    [e.n as f64, e.window_start, e.t_n, e.value, e.window_mean, e.nt_sixth]
}

/// Line-buffered CSV emitter, flushed after every row so an aborted run
/// leaves a truncated but well-formed file.
pub struct CsvWriter {
    w: BufWriter<File>,
    cols: usize,
}

impl CsvWriter {
    pub fn create(path: &Path, header: &[&str]) -> Result<CsvWriter> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{}", header.join(","))?;
        w.flush()?;
        Ok(CsvWriter { w, cols: header.len() })
    }

    pub fn row(&mut self, values: &[f64]) -> Result<()> {
        assert_eq!(values.len(), self.cols, "column count mismatch");
        let line: Vec<String> = values.iter().map(|v| fmt_f64(*v)).collect();
        writeln!(self.w, "{}", line.join(","))?;
        self.w.flush()?;
        Ok(())
    }
}

/// Read a CSV written by [`CsvWriter`]: header names plus all-float rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Usage(format!("{}: empty CSV", path.display())))?
        .split(',')
        .map(str::to_string)
        .collect::<Vec<_>>();
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::with_capacity(header.len());
        for cell in line.split(',') {
            row.push(cell.parse::<f64>().map_err(|_| {
                CliError::Usage(format!(
                    "{}: row {}: {cell:?} is not a number",
                    path.display(),
                    idx + 2
                ))
            })?);
        }
        if row.len() != header.len() {
            return Err(CliError::Usage(format!(
                "{}: row {} has {} cells, header has {}",
                path.display(),
                idx + 2,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

/// Write a marker snapshot: one `t=<value>` header line, then one
/// `x1,x2` line per marker in order.
pub fn write_contour_snapshot(path: &Path, t: f64, c: &Contour) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t={}", fmt_f64(t))?;
    for p in c.points() {
        writeln!(w, "{},{}", fmt_f64(p[0]), fmt_f64(p[1]))?;
    }
    w.flush()?;
    Ok(())
}

/// Read a marker snapshot back; the returned contour carries exactly the
/// written marker bits.
pub fn read_contour_snapshot(path: &Path) -> Result<(f64, Contour)> {
    let name = path.display();
    let f = BufReader::new(
        File::open(path).map_err(|e| CliError::Usage(format!("{name}: {e}")))?,
    );
    let mut lines = f.lines();
    let head = lines
        .next()
        .ok_or_else(|| CliError::Usage(format!("{name}: empty contour file")))??;
    let t = head
        .strip_prefix("t=")
        .and_then(|s| s.parse::<f64>().ok())
        .ok_or_else(|| CliError::Usage(format!("{name}: line 1: expected t=<value>")))?;
    let mut pts = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let bad = || CliError::Usage(format!("{name}: line {}: expected x1,x2", idx + 2));
        let (a, b) = line.split_once(',').ok_or_else(bad)?;
        let x1 = a.parse::<f64>().map_err(|_| bad())?;
        let x2 = b.parse::<f64>().map_err(|_| bad())?;
        pts.push([x1, x2]);
    }
    let c = Contour::new(pts).map_err(|e| CliError::Usage(format!("{name}: {e}")))?;
    Ok((t, c))
}

const FIELD_MAGIC: &str = "BQP1";
const FIELD_HEADER_LEN: usize = 64;

/// Write a gridded scalar as a 64-byte ASCII header
/// `BQP1 nx ny Lx Ly t` (space padded) followed by nx*ny little-endian
/// f64 values, x2 index fastest.
pub fn write_field_snapshot(path: &Path, f: &RealField, t: f64) -> Result<()> {
    let g = f.grid;
    let head = format!(
        "{FIELD_MAGIC} {} {} {} {} {}",
        g.nx,
        g.ny,
        fmt_f64(g.lx),
        fmt_f64(g.ly),
        fmt_f64(t)
    );
    if head.len() >= FIELD_HEADER_LEN {
        return Err(CliError::Numerical(format!(
            "field snapshot header too long ({} bytes): {head}",
            head.len()
        )));
    }
    let mut bytes = vec![b' '; FIELD_HEADER_LEN];
    bytes[..head.len()].copy_from_slice(head.as_bytes());
    bytes[FIELD_HEADER_LEN - 1] = b'\n';
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&bytes)?;
    for i in 0..g.nx {
        for j in 0..g.ny {
            w.write_all(&f.data[[i, j]].to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Read a field snapshot, validating magic, dimensions, and payload size.
pub fn read_field_snapshot(path: &Path) -> Result<(RealField, f64)> {
    let name = path.display();
    let mut f = File::open(path).map_err(|e| CliError::Usage(format!("{name}: {e}")))?;
    let mut head = [0u8; FIELD_HEADER_LEN];
    f.read_exact(&mut head)
        .map_err(|_| CliError::Usage(format!("{name}: shorter than the 64-byte header")))?;
    let text = std::str::from_utf8(&head)
        .map_err(|_| CliError::Usage(format!("{name}: non-ASCII header")))?;
    let mut it = text.split_ascii_whitespace();
    if it.next() != Some(FIELD_MAGIC) {
        return Err(CliError::Usage(format!("{name}: bad magic, want {FIELD_MAGIC}")));
    }
    let mut next_num = |what: &str| -> Result<f64> {
        it.next()
            .and_then(|s| s.parse::<f64>().ok())
            .ok_or_else(|| CliError::Usage(format!("{name}: header missing {what}")))
    };
    let nx = next_num("nx")? as usize;
    let ny = next_num("ny")? as usize;
    let lx = next_num("Lx")?;
    let ly = next_num("Ly")?;
    let t = next_num("t")?;
    let grid = Grid::new(nx, ny, lx, ly)
        .map_err(|e| CliError::Usage(format!("{name}: header dimensions invalid: {e}")))?;
    let mut payload = Vec::new();
    f.read_to_end(&mut payload)?;
    if payload.len() != nx * ny * 8 {
        return Err(CliError::Usage(format!(
            "{name}: payload is {} bytes, expected {} for {nx}x{ny}",
            payload.len(),
            nx * ny * 8
        )));
    }
    let mut out = RealField::zeros(grid);
    let mut k = 0;
    for i in 0..nx {
        for j in 0..ny {
            out.data[[i, j]] = f64::from_le_bytes(payload[k..k + 8].try_into().unwrap());
            k += 8;
        }
    }
    Ok((out, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use bqpatch_core::shapes;

    #[test]
    fn float_formatting_round_trips_awkward_values() {
        for x in [
            0.1,
            1.0 / 3.0,
            6.02e23,
            5e-324,
            f64::MAX,
            -0.0,
            7.300000000000063,
            f64::NAN,
        ] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert!(
                back.to_bits() == x.to_bits() || (x.is_nan() && back.is_nan()),
                "{x} -> {s} -> {back}"
            );
        }
    }

    #[test]
    fn contour_snapshot_round_trips_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        // Perturb markers to irrational-looking values to exercise the
        // shortest round-trip formatter.
        let c0 = shapes::random_star([3.0 + 1.0 / 3.0, 2.0 + 2.0_f64.sqrt()], 9, 97).unwrap();
        write_contour_snapshot(&path, 0.30000000000000004, &c0).unwrap();
        let (t, c1) = read_contour_snapshot(&path).unwrap();
        assert_eq!(t.to_bits(), 0.30000000000000004_f64.to_bits());
        assert_eq!(c0.len(), c1.len());
        for (a, b) in c0.points().iter().zip(c1.points()) {
            assert_eq!(a[0].to_bits(), b[0].to_bits());
            assert_eq!(a[1].to_bits(), b[1].to_bits());
        }
    }

    #[test]
    fn malformed_contour_files_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "t=0\n1.0,2.0\noops\n").unwrap();
        let err = read_contour_snapshot(&path).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        assert_eq!(read_contour_snapshot(&path).unwrap_err().exit_code(), 1);
    }

    #[test]
    fn field_snapshot_round_trips_and_validates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.bqp");
        let g = Grid::new(16, 8, 2.5, 1.25).unwrap();
        let f0 = RealField::from_fn(g, |x, y| (x * 7.3).sin() * (y - 0.1).cos() / 3.0);
        write_field_snapshot(&path, &f0, 1.0 / 7.0).unwrap();

        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(bytes.len(), 64 + 16 * 8 * 8);
        assert!(bytes.starts_with(b"BQP1 16 8 2.5 1.25 "));
        assert_eq!(bytes[63], b'\n');

        let (f1, t) = read_field_snapshot(&path).unwrap();
        assert_eq!(t.to_bits(), (1.0 / 7.0_f64).to_bits());
        assert_eq!(f1.grid, g);
        for i in 0..g.nx {
            for j in 0..g.ny {
                assert_eq!(f0.data[[i, j]].to_bits(), f1.data[[i, j]].to_bits());
            }
        }

        // Corrupt the magic.
        let mut bad = bytes.clone();
        bad[0] = b'X';
        std::fs::write(&path, &bad).unwrap();
        assert!(read_field_snapshot(&path).unwrap_err().to_string().contains("magic"));

        // Truncate the payload.
        std::fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
        assert!(read_field_snapshot(&path).unwrap_err().to_string().contains("payload"));
    }

    #[test]
    fn csv_writer_reader_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let mut w = CsvWriter::create(&path, &["a", "b"]).unwrap();
        w.row(&[0.1, f64::NAN]).unwrap();
        w.row(&[2.0, -3.5e-9]).unwrap();
        drop(w);
        let (header, rows) = read_csv(&path).unwrap();
        assert_eq!(header, vec!["a", "b"]);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0][0], 0.1);
        assert!(rows[0][1].is_nan());
        assert_eq!(rows[1][1], -3.5e-9);
    }
}
