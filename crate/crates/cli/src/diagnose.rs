//! Recompute diagnostics from the field snapshots of a finished run and
//! compare them against the CSV the run wrote.
//!
//! The snapshots carry the exact grid values, so recomputation goes
//! through the same spectral pipeline and must reproduce the recorded
//! instantaneous columns to rounding; a disagreement means the run
//! directory is inconsistent (edited, truncated, or produced by a
//! different build).

use std::path::Path;

use bqpatch_core::diagnostics::instantaneous;
use bqpatch_core::solver::State;
use bqpatch_core::spectral::to_spectral;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::io::{read_csv, read_field_snapshot, DIAG_COLUMNS};

/// Instantaneous columns a snapshot determines (cumulative and residual
/// columns depend on run history and are not recomputable from one time).
const CHECKED: [&str; 12] = [
    "e_p",
    "e_k",
    "e_t",
    "ep_prime",
    "enstrophy",
    "grad_u_sq",
    "a_t",
    "b_form1",
    "b_form2",
    "pe_grad_sq",
    "hdot1_sq",
    "h_neg2",
];

#[derive(Debug)]
pub struct DiagnoseOutcome {
    /// Snapshot pairs found and recomputed.
    pub snapshots: usize,
    /// Snapshots that had a diagnostics row at their time.
    pub compared: usize,
    /// Largest relative deviation over all checked columns.
    pub max_rel_dev: f64,
}

pub fn diagnose(dir: &Path, tolerance: f64) -> Result<DiagnoseOutcome> {
    let echo_path = dir.join("config.echo");
    let text = std::fs::read_to_string(&echo_path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", echo_path.display())))?;
    let cfg = RunConfig::parse(&text)?;
    let nu = cfg.solver.nu;

    let (header, rows) = read_csv(&dir.join("diagnostics.csv"))?;
    if header != DIAG_COLUMNS {
        return Err(CliError::Usage(format!(
            "{}: unexpected diagnostics header",
            dir.display()
        )));
    }
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let t_col = col("t");

    // Snapshot pairs, ordered by index for a deterministic report.
    let fields_dir = dir.join("fields");
    let mut indices: Vec<String> = Vec::new();
    if fields_dir.is_dir() {
        for entry in std::fs::read_dir(&fields_dir)? {
            let name = entry?.file_name().to_string_lossy().into_owned();
            if let Some(idx) = name.strip_prefix("rho_").and_then(|s| s.strip_suffix(".bqp")) {
                indices.push(idx.to_string());
            }
        }
    }
    indices.sort();

    let mut snapshots = 0usize;
    let mut compared = 0usize;
    let mut max_rel_dev = 0.0f64;
    for idx in &indices {
        let rho_path = fields_dir.join(format!("rho_{idx}.bqp"));
        let omega_path = fields_dir.join(format!("omega_{idx}.bqp"));
        if !omega_path.exists() {
            return Err(CliError::Usage(format!(
                "{}: rho snapshot {idx} has no omega partner",
                dir.display()
            )));
        }
        let (rho, t_rho) = read_field_snapshot(&rho_path)?;
        let (omega, t_omega) = read_field_snapshot(&omega_path)?;
        if t_rho != t_omega || rho.grid != omega.grid {
            return Err(CliError::Usage(format!(
                "snapshot pair {idx}: mismatched time or grid"
            )));
        }
        snapshots += 1;
        let state =
            State { rho_hat: to_spectral(&rho), omega_hat: to_spectral(&omega), t: t_rho };
        let rec = instantaneous(&state, nu);
        let recomputed = crate::io::diag_row(&rec);

        let Some(row) = rows.iter().find(|r| (r[t_col] - t_rho).abs() <= 1e-12) else {
            continue; // snapshot without a CSV row (e.g. horizon-zero run)
        };
        compared += 1;
        for name in CHECKED {
            let c = col(name);
            let a = recomputed[c];
            let b = row[c];
            let dev = (a - b).abs() / b.abs().max(1.0);
            if dev > max_rel_dev {
                max_rel_dev = dev;
            }
            if dev > tolerance {
                return Err(CliError::Invariant(format!(
                    "snapshot {idx} at t = {t_rho}: recomputed {name} = {a} but the run \
                     recorded {b} (relative deviation {dev:.3e} > {tolerance:.3e})"
                )));
            }
        }
    }

    if snapshots == 0 {
        return Err(CliError::Usage(format!(
            "{}: no field snapshots to recompute from",
            dir.display()
        )));
    }
    Ok(DiagnoseOutcome { snapshots, compared, max_rel_dev })
}
