//! Plain-text `key = value` configuration.
//!
//! Format: UTF-8 lines, `#` starts a comment, keys are dotted section
//! paths (`solver.nu = 0.02`). Unknown and duplicate keys are errors that
//! name the offending line; missing required keys are reported all at
//! once. `echo()` serializes the fully resolved configuration in the same
//! format, and parsing that echo reproduces the configuration exactly
//! (floats are printed in shortest round-trip form).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use bqpatch_core::grid::Grid;
use bqpatch_core::solver::SolverConfig;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSection {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl GridSection {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.nx, self.ny, self.lx, self.ly).map_err(crate::error::setup_err)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSection {
    pub nu: f64,
    pub cfl: f64,
    pub dt_max: f64,
    pub dealias: bool,
    pub enforce_symmetry: bool,
    /// Interface half-width; `None` means 3 * max(hx, hy).
    pub epsilon: Option<f64>,
}

impl SolverSection {
    pub fn core(&self) -> SolverConfig {
        SolverConfig {
            nu: self.nu,
            cfl: self.cfl,
            dt_max: self.dt_max,
            dealias: self.dealias,
            enforce_symmetry: self.enforce_symmetry,
        }
    }

    pub fn resolve_epsilon(&self, grid: &Grid) -> f64 {
        self.epsilon.unwrap_or(3.0 * grid.hx().max(grid.hy()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PatchShape {
    /// Unit-area ellipse; `aspect` is the width-to-height ratio.
    Ellipse { aspect: f64 },
    /// Rectangle with semicircular caps, dimensions as given (not
    /// renormalized).
    Stadium { half_straight: f64, cap_radius: f64 },
    /// Markers from a contour snapshot file.
    PolygonFile { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchSection {
    pub shape: PatchShape,
    /// Center height above the symmetry axis (built-in shapes).
    pub height: f64,
    /// Center abscissa; `None` means the domain midpoint.
    pub center_x1: Option<f64>,
    pub markers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum VelocitySeed {
    Zero,
    StreamMode { amplitude: f64, kx: usize, ky: usize },
    /// Velocity components from two field snapshot files.
    File { u1: PathBuf, u2: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldSnapshots {
    None,
    /// First and last output times only.
    Ends,
    /// Every output time.
    All,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub interval: f64,
    pub contours: bool,
    pub fields: FieldSnapshots,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentSection {
    pub t_end: f64,
    /// First low-dissipation window starts here (windows [T, 2T] with
    /// T doubling).
    pub tn_base: f64,
    /// Number of windows; `None` picks the most that fit in [0, t_end].
    pub tn_count: Option<usize>,
}

impl ExperimentSection {
    pub fn resolve_tn_count(&self) -> usize {
        match self.tn_count {
            Some(n) => n,
            None => {
                let mut n = 0usize;
                while self.tn_base * 2f64.powi(n as i32 + 1) <= self.t_end * (1.0 + 1e-12) {
                    n += 1;
                }
                n
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridSection,
    pub solver: SolverSection,
    pub patch: PatchSection,
    pub u0: VelocitySeed,
    pub output: OutputSection,
    pub experiment: ExperimentSection,
}

/// Comparison-field choices understood by the lemma driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmegaKind {
    Zero,
    Stream,
}

impl OmegaKind {
    pub fn label(&self) -> &'static str {
        match self {
            OmegaKind::Zero => "zero",
            OmegaKind::Stream => "stream",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaConfig {
    pub grid: GridSection,
    /// Interface half-width for rasterization; `None` means 3 * max(h).
    pub epsilon: Option<f64>,
    /// Anchor abscissa for built-in shapes.
    pub center_x1: f64,
    /// Center height for built-in shapes.
    pub height: f64,
    pub ellipse_aspects: Vec<f64>,
    pub star_count: usize,
    pub star_seed: u64,
    pub files: Vec<PathBuf>,
    pub omega: Vec<OmegaKind>,
    pub markers: usize,
    pub output_dir: PathBuf,
}

impl LemmaConfig {
    pub fn resolve_epsilon(&self, grid: &Grid) -> f64 {
        self.epsilon.unwrap_or(3.0 * grid.hx().max(grid.hy()))
    }
}

/// Raw key/value table with line numbers, tracking which keys were
/// consumed so leftovers can be reported as unknown.
struct Table {
    entries: BTreeMap<String, (String, usize)>,
    missing: Vec<&'static str>,
    errors: Vec<String>,
}

impl Table {
    fn parse(text: &str) -> Result<Table> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("line {line_no}: expected key = value, got {line:?}"))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(CliError::Usage(format!("line {line_no}: empty key")));
            }
            if let Some((_, first)) = entries.insert(key.clone(), (value, line_no)) {
                return Err(CliError::Usage(format!(
                    "line {line_no}: duplicate key {key} (first set on line {first})"
                )));
            }
        }
        Ok(Table { entries, missing: Vec::new(), errors: Vec::new() })
    }

    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.remove(key)
    }

    fn record_type_error(&mut self, key: &str, line: usize, value: &str, wanted: &str) {
        self.errors.push(format!("line {line}: {key} = {value:?} is not {wanted}"));
    }

    fn record_constraint(&mut self, key: &str, line: usize, constraint: &str) {
        self.errors.push(format!("line {line}: {key} violates {constraint}"));
    }

    fn required_f64(&mut self, key: &'static str) -> Option<(f64, usize)> {
        match self.take(key) {
            None => {
                self.missing.push(key);
                None
            }
            Some((v, line)) => match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Some((x, line)),
                _ => {
                    self.record_type_error(key, line, &v, "a finite number");
                    None
                }
            },
        }
    }

    fn required_usize(&mut self, key: &'static str) -> Option<(usize, usize)> {
        match self.take(key) {
            None => {
                self.missing.push(key);
                None
            }
            Some((v, line)) => match v.parse::<usize>() {
                Ok(x) => Some((x, line)),
                _ => {
                    self.record_type_error(key, line, &v, "a nonnegative integer");
                    None
                }
            },
        }
    }

    fn required_str(&mut self, key: &'static str) -> Option<(String, usize)> {
        match self.take(key) {
            None => {
                self.missing.push(key);
                None
            }
            Some(v) => Some(v),
        }
    }

    fn optional_f64(&mut self, key: &'static str, default: f64) -> (f64, usize) {
        match self.take(key) {
            None => (default, 0),
            Some((v, line)) => match v.parse::<f64>() {
                Ok(x) if x.is_finite() => (x, line),
                _ => {
                    self.record_type_error(key, line, &v, "a finite number");
                    (default, line)
                }
            },
        }
    }

    fn optional_usize(&mut self, key: &'static str, default: usize) -> (usize, usize) {
        match self.take(key) {
            None => (default, 0),
            Some((v, line)) => match v.parse::<usize>() {
                Ok(x) => (x, line),
                _ => {
                    self.record_type_error(key, line, &v, "a nonnegative integer");
                    (default, line)
                }
            },
        }
    }

    fn optional_u64(&mut self, key: &'static str, default: u64) -> u64 {
        match self.take(key) {
            None => default,
            Some((v, line)) => match v.parse::<u64>() {
                Ok(x) => x,
                _ => {
                    self.record_type_error(key, line, &v, "a nonnegative integer");
                    default
                }
            },
        }
    }

    fn optional_bool(&mut self, key: &'static str, default: bool) -> bool {
        match self.take(key) {
            None => default,
            Some((v, line)) => match v.as_str() {
                "true" => true,
                "false" => false,
                _ => {
                    self.record_type_error(key, line, &v, "true or false");
                    default
                }
            },
        }
    }

    /// A number or the literal `auto` (returned as `None`).
    fn optional_auto_f64(&mut self, key: &'static str) -> Option<(f64, usize)> {
        match self.take(key) {
            None => None,
            Some((v, _)) if v == "auto" => None,
            Some((v, line)) => match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Some((x, line)),
                _ => {
                    self.record_type_error(key, line, &v, "a finite number or auto");
                    None
                }
            },
        }
    }

    fn optional_auto_usize(&mut self, key: &'static str) -> Option<usize> {
        match self.take(key) {
            None => None,
            Some((v, _)) if v == "auto" => None,
            Some((v, line)) => match v.parse::<usize>() {
                Ok(x) => Some(x),
                _ => {
                    self.record_type_error(key, line, &v, "a nonnegative integer or auto");
                    None
                }
            },
        }
    }

    /// Comma-separated values, each parsed by `f`; empty value = empty list.
    fn optional_list<T>(
        &mut self,
        key: &'static str,
        wanted: &str,
        f: impl Fn(&str) -> Option<T>,
    ) -> Vec<T> {
        match self.take(key) {
            None => Vec::new(),
            Some((v, line)) => {
                let mut out = Vec::new();
                for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    match f(item) {
                        Some(x) => out.push(x),
                        None => {
                            self.record_type_error(key, line, item, wanted);
                        }
                    }
                }
                out
            }
        }
    }

    /// Fail if anything was missing, mistyped, out of range, or unknown.
    fn finish(self, kind: &str) -> Result<()> {
        let mut problems = Vec::new();
        if !self.missing.is_empty() {
            problems.push(format!("missing required keys: {}", self.missing.join(", ")));
        }
        problems.extend(self.errors);
        for (key, (_, line)) in &self.entries {
            problems.push(format!("line {line}: unknown key {key}"));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(CliError::Usage(format!("invalid {kind} config:\n  {}", problems.join("\n  "))))
        }
    }
}

fn parse_grid(t: &mut Table) -> Option<GridSection> {
    let nx = t.required_usize("grid.nx");
    let ny = t.required_usize("grid.ny");
    let lx = t.required_f64("grid.lx");
    let ly = t.required_f64("grid.ly");
    if let Some((v, line)) = lx {
        if v <= 0.0 {
            t.record_constraint("grid.lx", line, &format!("lx > 0 (got {v})"));
        }
    }
    if let Some((v, line)) = ly {
        if v <= 0.0 {
            t.record_constraint("grid.ly", line, &format!("ly > 0 (got {v})"));
        }
    }
    Some(GridSection { nx: nx?.0, ny: ny?.0, lx: lx?.0, ly: ly?.0 })
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut t = Table::parse(text)?;

        let grid = parse_grid(&mut t);

        let nu = t.required_f64("solver.nu");
        if let Some((v, line)) = nu {
            if v <= 0.0 {
                t.record_constraint("solver.nu", line, &format!("nu > 0 (got {v})"));
            }
        }
        let (cfl, cfl_line) = t.optional_f64("solver.cfl", 0.4);
        if !(cfl > 0.0 && cfl <= 2.0) {
            t.record_constraint("solver.cfl", cfl_line, &format!("0 < cfl <= 2 (got {cfl})"));
        }
        let (dt_max, dtm_line) = t.optional_f64("solver.dt_max", 0.01);
        if dt_max <= 0.0 {
            t.record_constraint("solver.dt_max", dtm_line, &format!("dt_max > 0 (got {dt_max})"));
        }
        let dealias = t.optional_bool("solver.dealias", true);
        let enforce_symmetry = t.optional_bool("solver.enforce_symmetry", true);
        let epsilon = t.optional_auto_f64("solver.epsilon");
        if let Some((e, line)) = epsilon {
            if e <= 0.0 {
                t.record_constraint("solver.epsilon", line, &format!("epsilon > 0 (got {e})"));
            }
        }

        let shape = match t.take("patch.shape") {
            None => Some(PatchShape::Ellipse { aspect: t.optional_f64("patch.aspect", 1.2).0 }),
            Some((v, line)) => match v.as_str() {
                "ellipse" => {
                    let (aspect, a_line) = t.optional_f64("patch.aspect", 1.2);
                    if aspect <= 0.0 {
                        t.record_constraint(
                            "patch.aspect",
                            a_line,
                            &format!("aspect > 0 (got {aspect})"),
                        );
                    }
                    Some(PatchShape::Ellipse { aspect })
                }
                "stadium" => {
                    let hs = t.required_f64("patch.half_straight");
                    let cr = t.required_f64("patch.cap_radius");
                    match (hs, cr) {
                        (Some((h, _)), Some((r, _))) if h > 0.0 && r > 0.0 => {
                            Some(PatchShape::Stadium { half_straight: h, cap_radius: r })
                        }
                        (Some((h, hl)), Some((r, _))) => {
                            t.record_constraint(
                                "patch.half_straight",
                                hl,
                                &format!("positive stadium dimensions (got {h}, {r})"),
                            );
                            None
                        }
                        _ => None,
                    }
                }
                "polygon-file" => t
                    .required_str("patch.file")
                    .map(|(p, _)| PatchShape::PolygonFile { path: PathBuf::from(p) }),
                _ => {
                    t.record_type_error(
                        "patch.shape",
                        line,
                        &v,
                        "one of ellipse, stadium, polygon-file",
                    );
                    None
                }
            },
        };
        let (height, h_line) = t.optional_f64("patch.height", 1.5);
        if height <= 0.0 {
            t.record_constraint("patch.height", h_line, &format!("height > 0 (got {height})"));
        }
        let center_x1 = t.optional_auto_f64("patch.center_x1").map(|(v, _)| v);
        let (markers, m_line) = t.optional_usize("patch.markers", 512);
        if markers < 64 {
            t.record_constraint("patch.markers", m_line, &format!("markers >= 64 (got {markers})"));
        }

        let u0 = match t.take("u0.kind") {
            None => Some(VelocitySeed::Zero),
            Some((v, line)) => match v.as_str() {
                "zero" => Some(VelocitySeed::Zero),
                "stream-mode" => {
                    let amp = t.required_f64("u0.amplitude");
                    let kx = t.required_usize("u0.kx");
                    let ky = t.required_usize("u0.ky");
                    match (amp, kx, ky) {
                        (Some((a, _)), Some((kx, _)), Some((ky, _))) => {
                            Some(VelocitySeed::StreamMode { amplitude: a, kx, ky })
                        }
                        _ => None,
                    }
                }
                "file" => {
                    let u1 = t.required_str("u0.u1");
                    let u2 = t.required_str("u0.u2");
                    match (u1, u2) {
                        (Some((u1, _)), Some((u2, _))) => Some(VelocitySeed::File {
                            u1: PathBuf::from(u1),
                            u2: PathBuf::from(u2),
                        }),
                        _ => None,
                    }
                }
                _ => {
                    t.record_type_error("u0.kind", line, &v, "one of zero, stream-mode, file");
                    None
                }
            },
        };

        let dir = t.required_str("output.dir");
        let (interval, i_line) = t.optional_f64("output.interval", 0.05);
        if interval <= 0.0 {
            t.record_constraint(
                "output.interval",
                i_line,
                &format!("interval > 0 (got {interval})"),
            );
        }
        let contours = t.optional_bool("output.contours", true);
        let fields = match t.take("output.fields") {
            None => Some(FieldSnapshots::Ends),
            Some((v, line)) => match v.as_str() {
                "none" => Some(FieldSnapshots::None),
                "ends" => Some(FieldSnapshots::Ends),
                "all" => Some(FieldSnapshots::All),
                _ => {
                    t.record_type_error("output.fields", line, &v, "one of none, ends, all");
                    None
                }
            },
        };

        let t_end = t.required_f64("experiment.t_end");
        if let Some((v, line)) = t_end {
            if v < 0.0 {
                t.record_constraint("experiment.t_end", line, &format!("t_end >= 0 (got {v})"));
            }
        }
        let (tn_base, b_line) = t.optional_f64("experiment.tn_base", 0.5);
        if tn_base <= 0.0 {
            t.record_constraint(
                "experiment.tn_base",
                b_line,
                &format!("tn_base > 0 (got {tn_base})"),
            );
        }
        let tn_count = t.optional_auto_usize("experiment.tn_count");

        t.finish("run")?;
        Ok(RunConfig {
            grid: grid.unwrap(),
            solver: SolverSection {
                nu: nu.unwrap().0,
                cfl,
                dt_max,
                dealias,
                enforce_symmetry,
                epsilon: epsilon.map(|(v, _)| v),
            },
            patch: PatchSection { shape: shape.unwrap(), height, center_x1, markers },
            u0: u0.unwrap(),
            output: OutputSection {
                dir: PathBuf::from(dir.unwrap().0),
                interval,
                contours,
                fields: fields.unwrap(),
            },
            experiment: ExperimentSection { t_end: t_end.unwrap().0, tn_base, tn_count },
        })
    }

    /// Canonical serialization of the resolved configuration. Parsing the
    /// result reproduces `self` except that auto values appear resolved
    /// against the grid (epsilon) or horizon (tn_count), which is what a
    /// bit-identical rerun needs.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "grid.nx = {}", self.grid.nx);
        let _ = writeln!(s, "grid.ny = {}", self.grid.ny);
        let _ = writeln!(s, "grid.lx = {:?}", self.grid.lx);
        let _ = writeln!(s, "grid.ly = {:?}", self.grid.ly);
        let _ = writeln!(s, "solver.nu = {:?}", self.solver.nu);
        let _ = writeln!(s, "solver.cfl = {:?}", self.solver.cfl);
        let _ = writeln!(s, "solver.dt_max = {:?}", self.solver.dt_max);
        let _ = writeln!(s, "solver.dealias = {}", self.solver.dealias);
        let _ = writeln!(s, "solver.enforce_symmetry = {}", self.solver.enforce_symmetry);
        if let Ok(grid) = self.grid.build() {
            let _ = writeln!(s, "solver.epsilon = {:?}", self.solver.resolve_epsilon(&grid));
        }
        match &self.patch.shape {
            PatchShape::Ellipse { aspect } => {
                let _ = writeln!(s, "patch.shape = ellipse");
                let _ = writeln!(s, "patch.aspect = {aspect:?}");
            }
            PatchShape::Stadium { half_straight, cap_radius } => {
                let _ = writeln!(s, "patch.shape = stadium");
                let _ = writeln!(s, "patch.half_straight = {half_straight:?}");
                let _ = writeln!(s, "patch.cap_radius = {cap_radius:?}");
            }
            PatchShape::PolygonFile { path } => {
                let _ = writeln!(s, "patch.shape = polygon-file");
                let _ = writeln!(s, "patch.file = {}", path.display());
            }
        }
        let _ = writeln!(s, "patch.height = {:?}", self.patch.height);
        let cx = self.patch.center_x1.unwrap_or(0.5 * self.grid.lx);
        let _ = writeln!(s, "patch.center_x1 = {cx:?}");
        let _ = writeln!(s, "patch.markers = {}", self.patch.markers);
        match &self.u0 {
            VelocitySeed::Zero => {
                let _ = writeln!(s, "u0.kind = zero");
            }
            VelocitySeed::StreamMode { amplitude, kx, ky } => {
                let _ = writeln!(s, "u0.kind = stream-mode");
                let _ = writeln!(s, "u0.amplitude = {amplitude:?}");
                let _ = writeln!(s, "u0.kx = {kx}");
                let _ = writeln!(s, "u0.ky = {ky}");
            }
            VelocitySeed::File { u1, u2 } => {
                let _ = writeln!(s, "u0.kind = file");
                let _ = writeln!(s, "u0.u1 = {}", u1.display());
                let _ = writeln!(s, "u0.u2 = {}", u2.display());
            }
        }
        let _ = writeln!(s, "output.dir = {}", self.output.dir.display());
        let _ = writeln!(s, "output.interval = {:?}", self.output.interval);
        let _ = writeln!(s, "output.contours = {}", self.output.contours);
        let fields = match self.output.fields {
            FieldSnapshots::None => "none",
            FieldSnapshots::Ends => "ends",
            FieldSnapshots::All => "all",
        };
        let _ = writeln!(s, "output.fields = {fields}");
        let _ = writeln!(s, "experiment.t_end = {:?}", self.experiment.t_end);
        let _ = writeln!(s, "experiment.tn_base = {:?}", self.experiment.tn_base);
        let _ = writeln!(s, "experiment.tn_count = {}", self.experiment.resolve_tn_count());
        s
    }
}

impl LemmaConfig {
    pub fn parse(text: &str) -> Result<LemmaConfig> {
        let mut t = Table::parse(text)?;

        let grid = parse_grid(&mut t);

        let epsilon = t.optional_auto_f64("lemmas.epsilon");
        if let Some((e, line)) = epsilon {
            if e <= 0.0 {
                t.record_constraint("lemmas.epsilon", line, &format!("epsilon > 0 (got {e})"));
            }
        }
        let (center_x1, _) = t.optional_f64("lemmas.center_x1", 2.5);
        let (height, h_line) = t.optional_f64("lemmas.height", 1.5);
        if height <= 0.0 {
            t.record_constraint("lemmas.height", h_line, &format!("height > 0 (got {height})"));
        }
        let ellipse_aspects = t.optional_list("lemmas.ellipse_aspects", "a positive number", |s| {
            s.parse::<f64>().ok().filter(|v| *v > 0.0 && v.is_finite())
        });
        let (star_count, _) = t.optional_usize("lemmas.star_count", 0);
        let star_seed = t.optional_u64("lemmas.star_seed", 1);
        let files =
            t.optional_list("lemmas.files", "a path", |s| Some(PathBuf::from(s)));
        let omega = match t.take("lemmas.omega") {
            None => vec![OmegaKind::Zero],
            Some((v, line)) => {
                let mut out = Vec::new();
                for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    match item {
                        "zero" => out.push(OmegaKind::Zero),
                        "stream" => out.push(OmegaKind::Stream),
                        _ => t.record_type_error("lemmas.omega", line, item, "zero or stream"),
                    }
                }
                out
            }
        };
        let (markers, m_line) = t.optional_usize("lemmas.markers", 512);
        if markers < 64 {
            t.record_constraint(
                "lemmas.markers",
                m_line,
                &format!("markers >= 64 (got {markers})"),
            );
        }
        let dir = t.required_str("output.dir");

        if ellipse_aspects.is_empty() && star_count == 0 && files.is_empty() {
            t.errors.push(
                "no shapes requested: set lemmas.ellipse_aspects, lemmas.star_count, or \
                 lemmas.files"
                    .into(),
            );
        }
        if omega.is_empty() {
            t.errors.push("lemmas.omega resolved to an empty list".into());
        }

        t.finish("lemma")?;
        Ok(LemmaConfig {
            grid: grid.unwrap(),
            epsilon: epsilon.map(|(v, _)| v),
            center_x1,
            height,
            ellipse_aspects,
            star_count,
            star_seed,
            files,
            omega,
            markers,
            output_dir: PathBuf::from(dir.unwrap().0),
        })
    }

    /// Serialization with every auto value resolved; reparsing the echo and
    /// echoing again is a fixed point, so sweeps rerun bit-identically.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "grid.nx = {}", self.grid.nx);
        let _ = writeln!(s, "grid.ny = {}", self.grid.ny);
        let _ = writeln!(s, "grid.lx = {:?}", self.grid.lx);
        let _ = writeln!(s, "grid.ly = {:?}", self.grid.ly);
        let epsilon = match self.grid.build() {
            Ok(g) => self.resolve_epsilon(&g),
            Err(_) => self.epsilon.unwrap_or(f64::NAN),
        };
        let _ = writeln!(s, "lemmas.epsilon = {epsilon:?}");
        let _ = writeln!(s, "lemmas.center_x1 = {:?}", self.center_x1);
        let _ = writeln!(s, "lemmas.height = {:?}", self.height);
        if !self.ellipse_aspects.is_empty() {
            let list: Vec<String> = self.ellipse_aspects.iter().map(|a| format!("{a:?}")).collect();
            let _ = writeln!(s, "lemmas.ellipse_aspects = {}", list.join(", "));
        }
        let _ = writeln!(s, "lemmas.star_count = {}", self.star_count);
        let _ = writeln!(s, "lemmas.star_seed = {}", self.star_seed);
        if !self.files.is_empty() {
            let list: Vec<String> =
                self.files.iter().map(|p| p.display().to_string()).collect();
            let _ = writeln!(s, "lemmas.files = {}", list.join(", "));
        }
        let list: Vec<&str> = self.omega.iter().map(|o| o.label()).collect();
        let _ = writeln!(s, "lemmas.omega = {}", list.join(", "));
        let _ = writeln!(s, "lemmas.markers = {}", self.markers);
        let _ = writeln!(s, "output.dir = {}", self.output_dir.display());
        s
    }
}

/// Worker count for fan-out sections, from the BQPATCH_WORKERS
/// environment variable; absent or unparsable means 1.
pub fn worker_count() -> usize {
    std::env::var("BQPATCH_WORKERS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|n| *n >= 1)
        .unwrap_or(1)
}
