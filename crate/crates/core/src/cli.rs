//! Command-line front end: every solver behind a subcommand, printed as JSON,
//! CSV or whitespace-separated plot columns.

use std::io::Write;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde_json::{Map, Number, Value};

use crate::branches::{branch_values, compare_branches, spectrum_on_branch};
use crate::eigensolve::{build_hardbox_matrix, pseudo_hermiticity_residual, symmetry_residual, EigenKind};
use crate::error::{Error, Result};
use crate::hardbox::{
    self, detect_null_bands, exceptional_points, matrix_spectrum, ExceptionalPoint, HardBoxProblem, Spectrum,
    SpectrumOptions,
};
use crate::softbox::{self, SoftBoxProblem};

pub const TOL_ENV: &str = "PT_SPECTRA_TOL";
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Parser, Debug)]
#[command(name = "pt-spectra", version, about = "Spectra of the igx potential in hard and soft boxes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Root tolerance; overrides PT_SPECTRA_TOL.
    #[arg(long, global = true, allow_hyphen_values = true)]
    tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Plot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum System {
    Hard,
    Soft,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Quantity {
    Levels,
    RealCount,
    BandEdges,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Hard-box eigenvalues from the characteristic equation.
    SpectrumHard {
        /// Coupling; `5i` or `5.0i` for an imaginary value.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_coupling)]
        g: C,
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        branch: usize,
    },
    /// Soft-box bound states.
    SpectrumSoft {
        #[arg(long, allow_hyphen_values = true)]
        g: f64,
    },
    /// Eigenvalues of the truncated box-basis matrix.
    Matrix {
        #[arg(long, allow_hyphen_values = true, value_parser = parse_coupling)]
        g: C,
        #[arg(long, default_value_t = crate::eigensolve::DEFAULT_N)]
        n: usize,
    },
    /// Couplings where two real levels merge.
    Critical {
        #[arg(long, value_enum, default_value_t = System::Hard)]
        system: System,
        #[arg(long, allow_hyphen_values = true)]
        g_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        g_max: Option<f64>,
    },
    /// Energy intervals whose characteristic zeros carry null eigenvectors.
    Bands {
        #[arg(long, allow_hyphen_values = true, value_parser = parse_coupling)]
        g: C,
        #[arg(long, default_value_t = 0)]
        branch: usize,
        #[command(flatten)]
        window: Window,
    },
    /// Search for real zeros of the outgoing-wave condition at E > 0.
    Reflectionless {
        #[arg(long, allow_hyphen_values = true)]
        g: f64,
        #[arg(long, default_value_t = 1e-6)]
        e_min: f64,
        #[arg(long, default_value_t = 50.0)]
        e_max: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
    /// Spectra on the three cube-root branches of q.
    Branches {
        #[arg(long, allow_hyphen_values = true, value_parser = parse_coupling)]
        g: C,
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[command(flatten)]
        window: Window,
    },
    /// Complex rectangular well −V1 + iV2.
    Rectwell {
        #[arg(long, allow_hyphen_values = true)]
        v1: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        v2: f64,
    },
    /// Imaginary step iV0·sgn(x) inside the soft box.
    Stepwell {
        #[arg(long, allow_hyphen_values = true)]
        v0: f64,
    },
    /// One row per coupling on a grid.
    Sweep {
        #[arg(long, value_enum)]
        system: System,
        #[arg(long, value_enum, default_value_t = Quantity::Levels)]
        quantity: Quantity,
        /// Explicit comma-separated couplings.
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',', conflicts_with_all = ["g_min", "g_max", "g_step"])]
        g: Vec<f64>,
        #[arg(long, allow_hyphen_values = true)]
        g_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        g_max: Option<f64>,
        #[arg(long)]
        g_step: Option<f64>,
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[command(flatten)]
        window: Window,
    },
}

#[derive(Args, Debug, Clone, Copy)]
struct Window {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    e_min: f64,
    #[arg(long, default_value_t = 100.0, allow_hyphen_values = true)]
    e_max: f64,
    #[arg(long, default_value_t = 0.05)]
    e_step: f64,
}

/// Parses `12.31`, `-3`, `5i`, `5.0i`, `-2.5i` or `i`.
pub fn parse_coupling(s: &str) -> std::result::Result<C, String> {
    let t = s.trim();
    if let Some(im) = t.strip_suffix('i') {
        let v = match im {
            "" | "+" => 1.0,
            "-" => -1.0,
            _ => f64::from_str(im).map_err(|e| format!("bad imaginary coupling `{s}`: {e}"))?,
        };
        return finite(C::new(0.0, v), s);
    }
    let v = f64::from_str(t).map_err(|e| format!("bad coupling `{s}`: {e}"))?;
    finite(C::new(v, 0.0), s)
}

fn finite(z: C, s: &str) -> std::result::Result<C, String> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(format!("coupling `{s}` is not finite"))
    }
}

/// 12 significant digits; scientific below 1e-4 and from 1e6 up.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = v.abs();
    if !(1e-4..1e6).contains(&a) {
        let s = format!("{v:.11e}");
        let (m, e) = s.split_once('e').unwrap_or((&s, "0"));
        return format!("{}e{e}", trim_zeros(m));
    }
    let exp = a.log10().floor() as i32;
    let prec = (11 - exp).max(0) as usize;
    let s = trim_zeros(&format!("{v:.prec$}")).to_string();
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Real(f64),
    Complex(C),
    Int(i64),
    Text(String),
    Bool(bool),
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Real,
    Complex,
    Int,
    Text,
    Bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<(String, Kind)>,
    pub rows: Vec<Vec<Cell>>,
}

/// A command's result: a table plus scalar facts that only JSON and the plot
/// header carry.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub command: String,
    pub summary: Vec<(String, Cell)>,
    pub table: Table,
}

fn number(v: f64) -> Value {
    if !v.is_finite() {
        return Value::Null;
    }
    Number::from_str(&format_number(v)).map(Value::Number).unwrap_or(Value::Null)
}

fn cell_json(c: &Cell) -> Value {
    match c {
        Cell::Real(v) => number(*v),
        Cell::Complex(z) => {
            let mut m = Map::new();
            m.insert("re".into(), number(z.re));
            m.insert("im".into(), number(z.im));
            Value::Object(m)
        }
        Cell::Int(i) => Value::Number((*i).into()),
        Cell::Text(s) => Value::String(s.clone()),
        Cell::Bool(b) => Value::Bool(*b),
        Cell::Empty => Value::Null,
    }
}

fn cell_fields(c: &Cell, kind: Kind, missing: &str) -> Vec<String> {
    let width = if kind == Kind::Complex { 2 } else { 1 };
    match c {
        Cell::Real(v) => vec![format_number(*v)],
        Cell::Complex(z) => vec![format_number(z.re), format_number(z.im)],
        Cell::Int(i) => vec![i.to_string()],
        Cell::Text(s) => vec![s.clone()],
        Cell::Bool(b) => vec![b.to_string()],
        Cell::Empty => vec![missing.to_string(); width],
    }
}

fn header(columns: &[(String, Kind)]) -> Vec<String> {
    columns
        .iter()
        .flat_map(|(n, k)| if *k == Kind::Complex { vec![format!("{n}_re"), format!("{n}_im")] } else { vec![n.clone()] })
        .collect()
}

impl Output {
    pub fn to_json(&self) -> String {
        let mut doc = Map::new();
        doc.insert("command".into(), Value::String(self.command.clone()));
        if !self.summary.is_empty() {
            let mut s = Map::new();
            for (k, v) in &self.summary {
                s.insert(k.clone(), cell_json(v));
            }
            doc.insert("summary".into(), Value::Object(s));
        }
        let rows = self
            .table
            .rows
            .iter()
            .map(|r| {
                let mut m = Map::new();
                for ((name, _), c) in self.table.columns.iter().zip(r) {
                    m.insert(name.clone(), cell_json(c));
                }
                Value::Object(m)
            })
            .collect();
        doc.insert("rows".into(), Value::Array(rows));
        let mut s = serde_json::to_string_pretty(&Value::Object(doc)).unwrap_or_default();
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
        w.write_record(header(&self.table.columns)).map_err(io)?;
        for r in &self.table.rows {
            let rec: Vec<String> =
                self.table.columns.iter().zip(r).flat_map(|((_, k), c)| cell_fields(c, *k, "")).collect();
            w.write_record(rec).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::InvalidInput(format!("csv: {e}")))
    }

    pub fn to_plot(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("# {}\n", self.command));
        for (k, v) in &self.summary {
            let kind = if matches!(v, Cell::Complex(_)) { Kind::Complex } else { Kind::Real };
            s.push_str(&format!("# {k} = {}\n", cell_fields(v, kind, "nan").join(" ")));
        }
        s.push_str(&format!("# {}\n", header(&self.table.columns).join(" ")));
        for r in &self.table.rows {
            let f: Vec<String> = self
                .table
                .columns
                .iter()
                .zip(r)
                .flat_map(|((_, k), c)| cell_fields(c, *k, "nan"))
                .map(|x| x.replace(char::is_whitespace, "_"))
                .collect();
            s.push_str(&f.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => Ok(self.to_json()),
            Format::Csv => self.to_csv(),
            Format::Plot => Ok(self.to_plot()),
        }
    }
}

fn col(name: &str, kind: Kind) -> (String, Kind) {
    (name.to_string(), kind)
}

fn kind_name(k: EigenKind) -> &'static str {
    match k {
        EigenKind::Real => "real",
        EigenKind::ConjugatePair => "pair",
        EigenKind::Complex => "complex",
    }
}

fn spectrum_table(s: &Spectrum) -> Table {
    Table {
        columns: vec![col("n", Kind::Int), col("E", Kind::Complex), col("kind", Kind::Text), col("residual", Kind::Real)],
        rows: s
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(i, e)| {
                vec![Cell::Int(i as i64 + 1), Cell::Complex(e.value), Cell::Text(kind_name(e.kind).into()), Cell::Real(e.residual)]
            })
            .collect(),
    }
}

fn energies_table(levels: &[f64]) -> Table {
    Table {
        columns: vec![col("n", Kind::Int), col("E", Kind::Real)],
        rows: levels.iter().enumerate().map(|(i, e)| vec![Cell::Int(i as i64 + 1), Cell::Real(*e)]).collect(),
    }
}

fn critical_table(eps: &[ExceptionalPoint]) -> Table {
    Table {
        columns: vec![
            col("g_c", Kind::Real),
            col("E_c", Kind::Real),
            col("pair_index", Kind::Int),
            col("ground_jump", Kind::Real),
            col("residual_f", Kind::Real),
            col("residual_df", Kind::Real),
        ],
        rows: eps
            .iter()
            .map(|p| {
                vec![
                    Cell::Real(p.g_c),
                    Cell::Real(p.e_c),
                    Cell::Int(p.pair_index as i64),
                    p.ground_jump.map_or(Cell::Empty, Cell::Real),
                    Cell::Real(p.residual_f),
                    Cell::Real(p.residual_df),
                ]
            })
            .collect(),
    }
}

/// Hard-box spectrum as used by both `spectrum-hard` and `sweep`.
fn hard_spectrum(g: C, branch: usize, count: usize, tol: f64) -> Result<Spectrum> {
    if branch == 0 {
        let p = HardBoxProblem::new(g, 0)?;
        hardbox::spectrum_with(&p, count, &SpectrumOptions { tol, ..SpectrumOptions::default() })
    } else {
        spectrum_on_branch(g, branch, count)
    }
}

fn check_window(w: &Window) -> std::result::Result<(), String> {
    if !(w.e_min < w.e_max) {
        return Err(format!("energy window must be ordered (got {} .. {})", w.e_min, w.e_max));
    }
    if !(w.e_step > 0.0) {
        return Err("--e-step must be positive".into());
    }
    Ok(())
}

fn check_branch(b: usize) -> std::result::Result<(), String> {
    if b > 2 {
        Err(format!("branch must be 0, 1 or 2 (got {b})"))
    } else {
        Ok(())
    }
}

enum Failure {
    Usage(String),
    Solver(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Solver(e)
    }
}

fn usage<T>(r: std::result::Result<T, String>) -> std::result::Result<T, Failure> {
    r.map_err(Failure::Usage)
}

fn sweep_grid(g: &[f64], lo: Option<f64>, hi: Option<f64>, step: Option<f64>) -> std::result::Result<Vec<f64>, String> {
    if !g.is_empty() {
        return Ok(g.to_vec());
    }
    let (Some(lo), Some(hi)) = (lo, hi) else {
        return Err("sweep needs --g or both --g-min and --g-max".into());
    };
    if lo == hi {
        return Ok(vec![lo]);
    }
    let step = step.ok_or("sweep over a range needs --g-step")?;
    if !(lo < hi && step > 0.0) {
        return Err("need --g-min < --g-max and --g-step > 0".into());
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + step * i as f64).collect())
}

fn status_of(e: &Error) -> String {
    let s = format!("{e:?}");
    s.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string()
}

fn sweep(
    system: System,
    quantity: Quantity,
    grid: &[f64],
    count: usize,
    window: Window,
    tol: f64,
    err: &mut dyn Write,
) -> std::result::Result<Output, Failure> {
    if system == System::Soft && quantity == Quantity::BandEdges {
        return Err(Failure::Usage("band edges are defined for the hard box only".into()));
    }
    let results: Vec<Result<Vec<Cell>>> = grid
        .par_iter()
        .map(|&g| -> Result<Vec<Cell>> {
            match (system, quantity) {
                (System::Hard, Quantity::Levels) => {
                    Ok(hard_spectrum(C::new(g, 0.0), 0, count, tol)?.values().into_iter().map(Cell::Complex).collect())
                }
                (System::Hard, Quantity::RealCount) => {
                    let s = hard_spectrum(C::new(g, 0.0), 0, count, tol)?;
                    Ok(vec![Cell::Int(s.real_values().len() as i64)])
                }
                (System::Hard, Quantity::BandEdges) => {
                    let p = HardBoxProblem::new(C::new(g, 0.0), 0)?;
                    let bands = detect_null_bands(&p, window.e_min, window.e_max, window.e_step)?;
                    Ok(bands.iter().flat_map(|b| [Cell::Real(b.e_lo), Cell::Real(b.e_hi)]).collect())
                }
                (System::Soft, Quantity::Levels) => {
                    Ok(softbox::bound_spectrum(&SoftBoxProblem::new(g))?.eigenvalues.into_iter().map(Cell::Real).collect())
                }
                (System::Soft, Quantity::RealCount) => {
                    let r = softbox::bound_spectrum(&SoftBoxProblem::new(g))?;
                    Ok(vec![Cell::Int(r.eigenvalues.len() as i64)])
                }
                (System::Soft, Quantity::BandEdges) => unreachable!(),
            }
        })
        .collect();
    if results.iter().all(|r| r.is_err()) {
        if let Some(Err(e)) = results.into_iter().next() {
            return Err(Failure::Solver(e));
        }
        return Err(Failure::Usage("empty grid".into()));
    }
    let width = results.iter().filter_map(|r| r.as_ref().ok()).map(Vec::len).max().unwrap_or(0);
    let mut columns = vec![col("g", Kind::Real)];
    match (system, quantity) {
        (_, Quantity::RealCount) => columns.push(col("real_count", Kind::Int)),
        (System::Hard, Quantity::Levels) => columns.extend((1..=width).map(|i| col(&format!("E{i}"), Kind::Complex))),
        (System::Soft, Quantity::Levels) => columns.extend((1..=width).map(|i| col(&format!("E{i}"), Kind::Real))),
        (_, Quantity::BandEdges) => {
            for i in 1..=width / 2 {
                columns.push(col(&format!("band{i}_lo"), Kind::Real));
                columns.push(col(&format!("band{i}_hi"), Kind::Real));
            }
        }
    }
    columns.push(col("status", Kind::Text));
    let mut rows = Vec::new();
    for (&g, r) in grid.iter().zip(results) {
        let mut row = vec![Cell::Real(g)];
        let status = match r {
            Ok(mut cells) => {
                cells.resize(width, Cell::Empty);
                row.extend(cells);
                "ok".to_string()
            }
            Err(e) => {
                let _ = writeln!(err, "g = {}: {e}", format_number(g));
                row.extend(std::iter::repeat(Cell::Empty).take(width));
                status_of(&e)
            }
        };
        row.push(Cell::Text(status));
        rows.push(row);
    }
    Ok(Output { command: "sweep".into(), summary: vec![], table: Table { columns, rows } })
}

fn execute(cmd: Command, tol: f64, err: &mut dyn Write) -> std::result::Result<Output, Failure> {
    let out = |command: &str, summary: Vec<(String, Cell)>, table: Table| Output { command: command.into(), summary, table };
    Ok(match cmd {
        Command::SpectrumHard { g, count, branch } => {
            usage(check_branch(branch))?;
            let s = hard_spectrum(g, branch, count, tol)?;
            out("spectrum-hard", vec![("pt_broken".into(), Cell::Bool(s.pt_broken))], spectrum_table(&s))
        }
        Command::SpectrumSoft { g } => {
            let r = softbox::bound_spectrum(&SoftBoxProblem::new(g))?;
            let mut t = energies_table(&r.eigenvalues);
            t.columns.push(col("residual", Kind::Real));
            for (row, res) in t.rows.iter_mut().zip(&r.residuals) {
                row.push(Cell::Real(*res));
            }
            out("spectrum-soft", vec![("merged".into(), Cell::Bool(r.merged))], t)
        }
        Command::Matrix { g, n } => {
            if n == 0 {
                return Err(Failure::Usage("--n must be at least 1".into()));
            }
            let h = build_hardbox_matrix(g, n);
            let s = matrix_spectrum(g, n)?;
            out(
                "matrix",
                vec![
                    ("n".into(), Cell::Int(n as i64)),
                    ("pseudo_hermiticity_residual".into(), Cell::Real(pseudo_hermiticity_residual(&h))),
                    ("symmetry_residual".into(), Cell::Real(symmetry_residual(&h))),
                ],
                spectrum_table(&s),
            )
        }
        Command::Critical { system, g_min, g_max } => {
            let eps = match system {
                System::Hard => {
                    let (lo, hi) = (g_min.unwrap_or(12.0), g_max.unwrap_or(13.0));
                    if !(lo < hi) {
                        return Err(Failure::Usage("--g-min must be below --g-max".into()));
                    }
                    exceptional_points(lo, hi)?
                }
                System::Soft => {
                    let (lo, hi) = (g_min.unwrap_or(1.0), g_max.unwrap_or(1.5));
                    if !(lo < hi) {
                        return Err(Failure::Usage("--g-min must be below --g-max".into()));
                    }
                    vec![softbox::soft_critical_in(lo, hi, softbox::Exterior::default())?]
                }
            };
            out("critical", vec![], critical_table(&eps))
        }
        Command::Bands { g, branch, window } => {
            usage(check_branch(branch))?;
            usage(check_window(&window))?;
            let bands = detect_null_bands(&HardBoxProblem::new(g, branch)?, window.e_min, window.e_max, window.e_step)?;
            let t = Table {
                columns: vec![col("e_lo", Kind::Real), col("e_hi", Kind::Real)],
                rows: bands.iter().map(|b| vec![Cell::Real(b.e_lo), Cell::Real(b.e_hi)]).collect(),
            };
            out("bands", vec![], t)
        }
        Command::Reflectionless { g, e_min, e_max, step } => {
            if !(e_min > 0.0 && e_min < e_max && step > 0.0) {
                return Err(Failure::Usage("need 0 < --e-min < --e-max and --step > 0".into()));
            }
            let r = softbox::reflectionless_scan(&SoftBoxProblem::new(g), e_min, e_max, step)?;
            let mut rows: Vec<Vec<Cell>> =
                r.roots.iter().map(|e| vec![Cell::Text("root".into()), Cell::Real(*e), Cell::Empty]).collect();
            rows.push(vec![Cell::Text("minimum".into()), Cell::Real(r.argmin), Cell::Real(r.min_abs_residual)]);
            let t = Table { columns: vec![col("kind", Kind::Text), col("E", Kind::Real), col("abs_residual", Kind::Real)], rows };
            out("reflectionless", vec![("min_rel_residual".into(), Cell::Real(r.min_rel_residual))], t)
        }
        Command::Branches { g, count, window } => {
            usage(check_window(&window))?;
            let cmp = compare_branches(g, count, (window.e_min, window.e_max, window.e_step))?;
            let q = branch_values(g);
            let mut rows = Vec::new();
            for (k, s) in cmp.spectra.iter().enumerate() {
                for (i, e) in s.eigenvalues.iter().enumerate() {
                    let shared = if k == 0 {
                        Cell::Int(i as i64 + 1)
                    } else {
                        cmp.repeated
                            .iter()
                            .find(|(b, j, _)| *b == k && *j == i)
                            .map_or(Cell::Empty, |(_, _, j0)| Cell::Int(*j0 as i64 + 1))
                    };
                    rows.push(vec![
                        Cell::Int(k as i64),
                        Cell::Int(i as i64 + 1),
                        Cell::Complex(e.value),
                        Cell::Text(kind_name(e.kind).into()),
                        shared,
                    ]);
                }
            }
            let t = Table {
                columns: vec![
                    col("branch", Kind::Int),
                    col("n", Kind::Int),
                    col("E", Kind::Complex),
                    col("kind", Kind::Text),
                    col("matches_branch0", Kind::Int),
                ],
                rows,
            };
            let mut summary: Vec<(String, Cell)> = (0..3).map(|k| (format!("q{k}"), Cell::Complex(q.get(k)))).collect();
            for (k, bands) in cmp.bands.iter().enumerate() {
                summary.push((format!("null_bands_branch{k}"), Cell::Int(bands.len() as i64)));
            }
            out("branches", summary, t)
        }
        Command::Rectwell { v1, v2 } => out("rectwell", vec![], energies_table(&softbox::rect_well_spectrum(v1, v2)?)),
        Command::Stepwell { v0 } => out("stepwell", vec![], energies_table(&softbox::step_well_spectrum(v0)?)),
        Command::Sweep { system, quantity, g, g_min, g_max, g_step, count, window } => {
            let grid = usage(sweep_grid(&g, g_min, g_max, g_step))?;
            if quantity == Quantity::BandEdges {
                usage(check_window(&window))?;
            }
            sweep(system, quantity, &grid, count, window, tol, err)?
        }
    })
}

fn resolve_tol(flag: Option<f64>) -> std::result::Result<f64, String> {
    let tol = match flag {
        Some(t) => t,
        None => match std::env::var(TOL_ENV) {
            Ok(s) => f64::from_str(s.trim()).map_err(|e| format!("{TOL_ENV}: {e}"))?,
            Err(_) => DEFAULT_TOL,
        },
    };
    if tol > 0.0 && tol.is_finite() {
        Ok(tol)
    } else {
        Err(format!("tolerance must be positive (got {tol})"))
    }
}

/// Runs one invocation; returns the exit code (0 ok, 1 usage, 2 solver error).
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let tol = match resolve_tol(cli.tol) {
        Ok(t) => t,
        Err(m) => {
            let _ = writeln!(err, "error: {m}");
            return 1;
        }
    };
    match execute(cli.command, tol, err).and_then(|o| o.render(cli.format).map_err(Failure::Solver)) {
        Ok(text) => match out.write_all(text.as_bytes()) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                2
            }
        },
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
        Err(Failure::Solver(Error::InvalidInput(m))) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
        Err(Failure::Solver(e)) => {
            let _ = writeln!(err, "solver error: {e}");
            2
        }
    }
}

pub fn main_entry() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(2.4674011002723395), "2.46740110027");
        assert_eq!(format_number(61.49289), "61.49289");
        assert_eq!(format_number(-1.7857508141506565e-6), "-1.78575081415e-6");
        assert_eq!(format_number(1.5e7), "1.5e7");
        assert_eq!(format_number(1e-4), "0.0001");
    }

    #[test]
    fn couplings() {
        assert_eq!(parse_coupling("5.0i").unwrap(), C::new(0.0, 5.0));
        assert_eq!(parse_coupling("-2i").unwrap(), C::new(0.0, -2.0));
        assert_eq!(parse_coupling("12.31").unwrap(), C::new(12.31, 0.0));
        assert!(parse_coupling("x").is_err());
    }
}
