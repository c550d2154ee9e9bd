//! Driver for the constructive geometry checks: build the requested shape
//! list, evaluate both lemma checks for every comparison-field choice
//! plus the curvature/inscribed-radius product, and emit one CSV row per
//! check.
//!
//! Shape evaluations are independent, so they fan out across
//! BQPATCH_WORKERS threads; rows are collected and written in shape order
//! by a single writer, making the output independent of scheduling.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use bqpatch_core::contour::Contour;
use bqpatch_core::error::Error as CoreError;
use bqpatch_core::grid::Grid;
use bqpatch_core::lemmas::{
    check_inscribed_disk_pairing, check_extent_pairing, pestov_ionin_check, LemmaReport, OmegaChoice,
};
use bqpatch_core::shapes;

use crate::config::{worker_count, LemmaConfig, OmegaKind};
use crate::error::{setup_err, CliError, Result};
use crate::io::{fmt_f64, read_contour_snapshot};

/// One CSV row of the lemma report file.
struct ReportRow {
    shape: String,
    lemma: &'static str,
    omega: &'static str,
    /// Inscribed radius (first check) or horizontal extent (second).
    scale: f64,
    a_moment: f64,
    n_star: f64,
    report: Option<LemmaReport>,
    pass: bool,
    note: String,
}

struct PestovRow {
    shape: String,
    product: f64,
    pass: bool,
    note: String,
}

#[derive(Debug)]
pub struct LemmaOutcome {
    pub dir: PathBuf,
    pub rows: usize,
    pub failures: usize,
}

fn sanitize(msg: &str) -> String {
    msg.replace(',', ";").replace('\n', " ")
}

/// Evaluate every check for one shape. Violations become failing rows;
/// setup errors abort the sweep (the shape/grid combination is wrong, not
/// the mathematics).
fn evaluate_shape(
    name: &str,
    c: &Contour,
    grid: &Grid,
    epsilon: f64,
    omegas: &[OmegaKind],
) -> Result<(Vec<ReportRow>, PestovRow)> {
    let mut rows = Vec::new();
    for kind in omegas {
        let omega = match kind {
            OmegaKind::Zero => OmegaChoice::Zero,
            OmegaKind::Stream => OmegaChoice::StreamDerivative,
        };
        let mut row = ReportRow {
            shape: name.to_string(),
            lemma: "inscribed-disk",
            omega: kind.label(),
            scale: f64::NAN,
            a_moment: f64::NAN,
            n_star: f64::NAN,
            report: None,
            pass: false,
            note: String::new(),
        };
        match check_inscribed_disk_pairing(c, grid, epsilon, &omega) {
            Ok((report, params)) => {
                row.scale = params.r;
                row.n_star = params.n_star as f64;
                row.report = Some(report);
                row.pass = true;
            }
            Err(CoreError::LemmaViolation(msg)) => row.note = sanitize(&msg),
            Err(e) => {
                return Err(CliError::Usage(format!("{name}: inscribed-disk check: {e}")))
            }
        }
        rows.push(row);

        let omega = match kind {
            OmegaKind::Zero => OmegaChoice::Zero,
            OmegaKind::Stream => OmegaChoice::StreamDerivative,
        };
        let mut row = ReportRow {
            shape: name.to_string(),
            lemma: "extent",
            omega: kind.label(),
            scale: f64::NAN,
            a_moment: f64::NAN,
            n_star: f64::NAN,
            report: None,
            pass: false,
            note: String::new(),
        };
        match check_extent_pairing(c, grid, epsilon, &omega) {
            Ok((report, params)) => {
                row.scale = params.l_extent;
                row.a_moment = params.a_moment;
                row.report = Some(report);
                row.pass = true;
            }
            Err(CoreError::LemmaViolation(msg)) => row.note = sanitize(&msg),
            Err(e) => return Err(CliError::Usage(format!("{name}: extent check: {e}"))),
        }
        rows.push(row);
    }

    let pestov = match pestov_ionin_check(c) {
        Ok(product) => {
            PestovRow { shape: name.to_string(), product, pass: true, note: String::new() }
        }
        Err(CoreError::LemmaViolation(msg)) => PestovRow {
            shape: name.to_string(),
            product: f64::NAN,
            pass: false,
            note: sanitize(&msg),
        },
        Err(e) => return Err(CliError::Usage(format!("{name}: curvature product: {e}"))),
    };
    Ok((rows, pestov))
}

pub fn verify_lemmas(cfg: &LemmaConfig) -> Result<LemmaOutcome> {
    let grid = cfg.grid.build()?;
    let epsilon = cfg.resolve_epsilon(&grid);
    let center = [cfg.center_x1, cfg.height];

    let mut shapes_list: Vec<(String, Contour)> = Vec::new();
    for aspect in &cfg.ellipse_aspects {
        let c = shapes::unit_area_ellipse(center, *aspect, cfg.markers).map_err(setup_err)?;
        shapes_list.push((format!("ellipse_a{aspect}"), c));
    }
    for k in 0..cfg.star_count {
        let seed = cfg.star_seed + k as u64;
        let c = shapes::random_star(center, seed, cfg.markers).map_err(setup_err)?;
        shapes_list.push((format!("star_{seed}"), c));
    }
    for path in &cfg.files {
        let (_, c) = read_contour_snapshot(path)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        shapes_list.push((name, c));
    }

    // Fan out over shapes; slot k of the results belongs to shape k no
    // matter which worker computed it.
    let workers = worker_count().min(shapes_list.len().max(1));
    let results: Mutex<Vec<Option<(Vec<ReportRow>, PestovRow)>>> =
        Mutex::new((0..shapes_list.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let first_error: Mutex<Option<CliError>> = Mutex::new(None);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= shapes_list.len() {
                    break;
                }
                let (name, c) = &shapes_list[k];
                match evaluate_shape(name, c, &grid, epsilon, &cfg.omega) {
                    Ok(r) => results.lock().unwrap()[k] = Some(r),
                    Err(e) => {
                        let mut slot = first_error.lock().unwrap();
                        if slot.is_none() {
                            *slot = Some(e);
                        }
                        break;
                    }
                }
            });
        }
    });
    if let Some(e) = first_error.into_inner().unwrap() {
        return Err(e);
    }
    let results = results.into_inner().unwrap();

    fs::create_dir_all(&cfg.output_dir)?;
    fs::write(cfg.output_dir.join("config.echo"), cfg.echo())?;
    let mut reports =
        BufWriter::new(File::create(cfg.output_dir.join("lemma_reports.csv"))?);
    writeln!(
        reports,
        "shape,lemma,omega,scale,a_moment,n_star,lhs,rhs_h1,rhs_l2,predicted_lower_bound,\
         ratio,pass,note"
    )?;
    let mut pestov =
        BufWriter::new(File::create(cfg.output_dir.join("pestov.csv"))?);
    writeln!(pestov, "shape,product,pass,note")?;

    let mut rows = 0usize;
    let mut failures = 0usize;
    for slot in results {
        let (shape_rows, p) = slot.expect("every shape evaluated");
        for r in shape_rows {
            rows += 1;
            if !r.pass {
                failures += 1;
            }
            let (lhs, h1, l2, bound, ratio) = match &r.report {
                Some(rep) => {
                    (rep.lhs, rep.rhs_h1, rep.rhs_l2, rep.predicted_lower_bound, rep.ratio)
                }
                None => (f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN),
            };
            writeln!(
                reports,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.shape,
                r.lemma,
                r.omega,
                fmt_f64(r.scale),
                fmt_f64(r.a_moment),
                fmt_f64(r.n_star),
                fmt_f64(lhs),
                fmt_f64(h1),
                fmt_f64(l2),
                fmt_f64(bound),
                fmt_f64(ratio),
                r.pass,
                r.note
            )?;
        }
        rows += 1;
        if !p.pass {
            failures += 1;
        }
        writeln!(pestov, "{},{},{},{}", p.shape, fmt_f64(p.product), p.pass, p.note)?;
    }
    reports.flush()?;
    pestov.flush()?;

    Ok(LemmaOutcome { dir: cfg.output_dir.clone(), rows, failures })
}
