//! Simulation orchestration: seed the state and the boundary contour from
//! a parsed configuration, step to the horizon, and emit every artifact
//! of a run directory.
//!
//! Directory layout:
//! - `config.echo` — resolved configuration; rerunning it is bit-identical
//! - `diagnostics.csv` — one row per output time (see [`crate::io`])
//! - `geometry.csv` — contour measurements, while geometrically valid
//! - `growth.csv` — running maxima of max |kappa| and the extent
//! - `low_dissipation.csv` — per-window minimizers of the dissipation
//!   proxy with the (n t_n)^(1/6) comparison column
//! - `summary.txt`, `status.txt`
//! - `contours/contour_NNNNNN.csv`, `fields/{rho,omega}_NNNNNN.bqp`
//!
//! Every file write goes through one thread; an abort mid-run leaves the
//! CSVs truncated but well formed and records the failure in `status.txt`.

use std::fs;
use std::path::{Path, PathBuf};

use bqpatch_core::contour::{Contour, PatchGeometry};
use bqpatch_core::diagnostics::{
    extract_low_dissipation_times, DiagnosticsRecord, DiagnosticsSeries, LowDissipationEntry,
};
use bqpatch_core::grid::Grid;
use bqpatch_core::sampler::{GridVelocity, TimeBlendVelocity};
use bqpatch_core::shapes;
use bqpatch_core::solver::{cfl_dt, seed_state, step, InitialVelocity, SolverConfig, State};

use crate::config::{FieldSnapshots, PatchShape, RunConfig, VelocitySeed};
use crate::error::{run_err, setup_err, CliError, Result};
use crate::io::{
    diag_row, lowdiss_row, read_contour_snapshot, read_field_snapshot, write_contour_snapshot,
    write_field_snapshot, CsvWriter, DIAG_COLUMNS, GEOM_COLUMNS, LOWDISS_COLUMNS,
};

/// Everything a caller might want to inspect after a run, mirroring the
/// files on disk.
#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub records: Vec<DiagnosticsRecord>,
    pub geometry: Vec<PatchGeometry>,
    pub low_dissipation: Vec<LowDissipationEntry>,
    /// Time at which marker tracking stopped being trustworthy
    /// (self-intersection or failed redistribution); `None` if it stayed
    /// valid to the end.
    pub geometry_valid_until: Option<f64>,
    /// Output steps at which the contour ran closer to the axis, seam, or
    /// lateral wrap than the rasterization margin.
    pub margin_warnings: usize,
}

/// Build the initial contour from the patch section.
pub fn build_contour(cfg: &RunConfig, grid: &Grid) -> Result<Contour> {
    let cx = cfg.patch.center_x1.unwrap_or(0.5 * grid.lx);
    let center = [cx, cfg.patch.height];
    let n = cfg.patch.markers;
    match &cfg.patch.shape {
        PatchShape::Ellipse { aspect } => {
            shapes::unit_area_ellipse(center, *aspect, n).map_err(setup_err)
        }
        PatchShape::Stadium { half_straight, cap_radius } => {
            shapes::stadium(center, *half_straight, *cap_radius, n).map_err(setup_err)
        }
        PatchShape::PolygonFile { path } => Ok(read_contour_snapshot(path)?.1),
    }
}

fn build_velocity_seed(cfg: &RunConfig, grid: &Grid) -> Result<InitialVelocity> {
    Ok(match &cfg.u0 {
        VelocitySeed::Zero => InitialVelocity::Zero,
        VelocitySeed::StreamMode { amplitude, kx, ky } => {
            InitialVelocity::StreamMode { amplitude: *amplitude, kx: *kx, ky: *ky }
        }
        VelocitySeed::File { u1, u2 } => {
            let (f1, _) = read_field_snapshot(u1)?;
            let (f2, _) = read_field_snapshot(u2)?;
            if f1.grid != *grid || f2.grid != *grid {
                return Err(CliError::Usage(format!(
                    "u0 field grids do not match the run grid {}x{}",
                    grid.nx, grid.ny
                )));
            }
            InitialVelocity::Fields(f1, f2)
        }
    })
}

/// Output times: every multiple of the interval below the horizon, then
/// the horizon itself.
fn output_times(interval: f64, t_end: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 1u64;
    loop {
        let t = k as f64 * interval;
        if t >= t_end * (1.0 - 1e-12) {
            break;
        }
        out.push(t);
        k += 1;
    }
    out.push(t_end);
    out
}

struct RunFiles {
    dir: PathBuf,
    diag: CsvWriter,
    geom: CsvWriter,
    contours: bool,
    fields: FieldSnapshots,
}

impl RunFiles {
    fn snapshot(&mut self, idx: usize, state: &State, contour: Option<&Contour>) -> Result<()> {
        if let Some(c) = contour {
            if self.contours {
                let path = self.dir.join("contours").join(format!("contour_{idx:06}.csv"));
                write_contour_snapshot(&path, state.t, c)?;
            }
        }
        if self.fields == FieldSnapshots::All {
            self.fields_now(idx, state)?;
        }
        Ok(())
    }

    fn fields_now(&mut self, idx: usize, state: &State) -> Result<()> {
        let fdir = self.dir.join("fields");
        write_field_snapshot(&fdir.join(format!("rho_{idx:06}.bqp")), &state.rho(), state.t)?;
        write_field_snapshot(&fdir.join(format!("omega_{idx:06}.bqp")), &state.omega(), state.t)?;
        Ok(())
    }

    fn geometry_row(&mut self, g: &PatchGeometry, markers: usize) -> Result<()> {
        self.geom.row(&[
            g.t,
            g.area,
            g.perimeter,
            g.max_abs_curvature,
            g.horizontal_extent,
            g.inscribed_radius,
            g.inscribed_center[0],
            g.inscribed_center[1],
            g.centroid_height,
            markers as f64,
        ])
    }
}

/// Run the simulation described by `cfg`. On error the run directory
/// still holds the configuration echo, all rows written so far, and a
/// status file naming the failure.
pub fn simulate(cfg: &RunConfig) -> Result<RunOutcome> {
    let dir = cfg.output.dir.clone();
    fs::create_dir_all(dir.join("contours"))?;
    fs::create_dir_all(dir.join("fields"))?;
    fs::write(dir.join("config.echo"), cfg.echo())?;

    let result = simulate_inner(cfg, &dir);
    let status = match &result {
        Ok(outcome) => {
            let mut s = String::from("ok\n");
            if let Some(t) = outcome.geometry_valid_until {
                s.push_str(&format!("geometry tracking ended at t = {t} (see summary)\n"));
            }
            if outcome.margin_warnings > 0 {
                s.push_str(&format!(
                    "margin warnings at {} output steps\n",
                    outcome.margin_warnings
                ));
            }
            s
        }
        Err(e) => format!("error: {e}\n"),
    };
    // Never let a failed status write mask the run's own failure.
    match fs::write(dir.join("status.txt"), status) {
        Err(e) if result.is_ok() => Err(e.into()),
        _ => result,
    }
}

fn simulate_inner(cfg: &RunConfig, dir: &Path) -> Result<RunOutcome> {
    let grid = cfg.grid.build()?;
    let epsilon = cfg.solver.resolve_epsilon(&grid);
    let solver_cfg: SolverConfig = cfg.solver.core();
    solver_cfg.validate().map_err(setup_err)?;

    let contour0 = build_contour(cfg, &grid)?;
    let u0 = build_velocity_seed(cfg, &grid)?;
    let mut state = seed_state(&contour0, grid, epsilon, &u0, &solver_cfg).map_err(setup_err)?;

    let mut files = RunFiles {
        dir: dir.to_path_buf(),
        diag: CsvWriter::create(&dir.join("diagnostics.csv"), &DIAG_COLUMNS)?,
        geom: CsvWriter::create(&dir.join("geometry.csv"), &GEOM_COLUMNS)?,
        contours: cfg.output.contours,
        fields: cfg.output.fields,
    };
    let mut series = DiagnosticsSeries::new(cfg.solver.nu);
    let mut geometry: Vec<PatchGeometry> = Vec::new();
    let mut contour = Some(contour0);
    let mut geometry_valid_until = None;
    let mut margin_warnings = 0usize;

    let t_end = cfg.experiment.t_end;
    if t_end == 0.0 {
        // Horizon zero: header-only diagnostics, snapshot of the seeded
        // state, nothing to integrate.
        files.snapshot(0, &state, contour.as_ref())?;
        if files.fields == FieldSnapshots::Ends {
            files.fields_now(0, &state)?;
        }
        CsvWriter::create(&dir.join("low_dissipation.csv"), &LOWDISS_COLUMNS)?;
        write_summary(dir, &geometry, &[], None)?;
        return Ok(RunOutcome {
            dir: dir.to_path_buf(),
            records: Vec::new(),
            geometry,
            low_dissipation: Vec::new(),
            geometry_valid_until,
            margin_warnings,
        });
    }

    // Record the initial state as output index 0.
    let rec = *series.push_state(&state).map_err(run_err)?;
    files.diag.row(&diag_row(&rec))?;
    if let Some(c) = &contour {
        let g = c.measure(state.t);
        files.geometry_row(&g, c.len())?;
        geometry.push(g);
    }
    files.snapshot(0, &state, contour.as_ref())?;
    if files.fields == FieldSnapshots::Ends {
        files.fields_now(0, &state)?;
    }

    let times = output_times(cfg.output.interval, t_end);
    let last_idx = times.len();
    // Velocity at the current time level, reused as the start level of
    // the next step's time blend.
    let (u1, u2) = state.velocity();
    let mut vel_prev = GridVelocity::new(&u1, &u2);

    for (out_idx, &t_out) in times.iter().enumerate() {
        let out_idx = out_idx + 1;
        while state.t < t_out - 1e-12 {
            let dt = cfl_dt(&state, &solver_cfg).min(t_out - state.t);
            let t_from = state.t;
            step(&mut state, &solver_cfg, dt).map_err(run_err)?;
            // Markers move through the linear-in-time blend of the
            // velocity at the two step ends; each instant of the blend is
            // divergence free, so the exact blended flow preserves area.
            if let Some(c) = &contour {
                let (u1, u2) = state.velocity();
                let vel_new = GridVelocity::new(&u1, &u2);
                let blend = TimeBlendVelocity {
                    t0: t_from,
                    t1: state.t,
                    start: vel_prev,
                    end: vel_new.clone(),
                };
                contour = Some(c.advect(&blend, t_from, state.t - t_from).map_err(run_err)?);
                vel_prev = vel_new;
            }
        }

        let rec = *series.push_state(&state).map_err(run_err)?;
        files.diag.row(&diag_row(&rec))?;

        if let Some(c) = contour.take() {
            // Resampling before measurement keeps marker spacing healthy;
            // losing that (or finding a crossing) ends geometric validity
            // but not the field run.
            match c.redistribute() {
                Ok(c) => {
                    if let Some((i, j)) = c.self_intersection() {
                        eprintln!(
                            "note: contour self-intersects (markers {i}, {j}) at t = {}; \
                             geometry tracking stops",
                            state.t
                        );
                        geometry_valid_until = Some(state.t);
                    } else {
                        if c.margin_violations(&grid, 5.0 * epsilon) > 0 {
                            margin_warnings += 1;
                        }
                        let g = c.measure(state.t);
                        files.geometry_row(&g, c.len())?;
                        geometry.push(g);
                        contour = Some(c);
                    }
                }
                Err(e) => {
                    eprintln!(
                        "note: contour resampling failed at t = {} ({e}); geometry tracking stops",
                        state.t
                    );
                    geometry_valid_until = Some(state.t);
                }
            }
        }

        files.snapshot(out_idx, &state, contour.as_ref())?;
        if files.fields == FieldSnapshots::Ends && out_idx == last_idx {
            files.fields_now(out_idx, &state)?;
        }
    }

    // Low-dissipation windows; auto count fits as many doubling windows
    // under the horizon as possible.
    let tn_count = cfg.experiment.resolve_tn_count();
    let low = if tn_count > 0 {
        extract_low_dissipation_times(series.records(), cfg.experiment.tn_base, tn_count)
            .map_err(run_err)?
    } else {
        Vec::new()
    };
    let mut ld = CsvWriter::create(&dir.join("low_dissipation.csv"), &LOWDISS_COLUMNS)?;
    for e in &low {
        ld.row(&lowdiss_row(e))?;
    }

    write_summary(dir, &geometry, &low, geometry_valid_until)?;

    Ok(RunOutcome {
        dir: dir.to_path_buf(),
        records: series.records().to_vec(),
        geometry,
        low_dissipation: low,
        geometry_valid_until,
        margin_warnings,
    })
}

/// Growth table (running maxima) and the human-readable run summary.
fn write_summary(
    dir: &Path,
    geometry: &[PatchGeometry],
    low: &[LowDissipationEntry],
    geometry_valid_until: Option<f64>,
) -> Result<()> {
    let mut w = CsvWriter::create(
        &dir.join("growth.csv"),
        &["t", "max_abs_curvature", "run_max_curvature", "horizontal_extent", "run_max_extent"],
    )?;
    let mut run_k = f64::NEG_INFINITY;
    let mut run_l = f64::NEG_INFINITY;
    for g in geometry {
        run_k = run_k.max(g.max_abs_curvature);
        run_l = run_l.max(g.horizontal_extent);
        w.row(&[g.t, g.max_abs_curvature, run_k, g.horizontal_extent, run_l])?;
    }

    let mut s = String::new();
    if let (Some(first), Some(last)) = (geometry.first(), geometry.last()) {
        s.push_str(&format!(
            "geometry records: {} over t in [{}, {}]\n",
            geometry.len(),
            first.t,
            last.t
        ));
        if let Some(t) = geometry_valid_until {
            s.push_str(&format!("tracking ended early at t = {t}\n"));
        }
        s.push_str(&format!(
            "max |curvature|: {} -> running max {} (factor {:.3})\n",
            first.max_abs_curvature,
            run_k,
            run_k / first.max_abs_curvature
        ));
        s.push_str(&format!(
            "horizontal extent: {} -> running max {} (factor {:.3})\n",
            first.horizontal_extent,
            run_l,
            run_l / first.horizontal_extent
        ));
        s.push_str(&format!(
            "area drift: {:.3e} relative\n",
            (last.area - first.area).abs() / first.area
        ));
    } else {
        s.push_str("no geometry records\n");
    }
    if !low.is_empty() {
        s.push_str(&format!(
            "low-dissipation windows: {} (see low_dissipation.csv)\n",
            low.len()
        ));
    }
    fs::write(dir.join("summary.txt"), s)?;
    Ok(())
}
