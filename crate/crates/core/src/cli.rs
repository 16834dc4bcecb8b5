//! Command-line surface: argument parsing helpers, CSV/JSON emission, and
//! the per-subcommand runners. Exit codes: 0 ok, 1 invalid input,
//! 2 solver non-convergence, 3 identity-suite failure.

use std::fmt::Write as _;
use std::time::Instant;

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::bowen;
use crate::boxdim;
use crate::dynamics::Parameter;
use crate::error::{Error, Result};
use crate::identities;
use crate::pressure;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID_INPUT: i32 = 1;
pub const EXIT_NON_CONVERGENCE: i32 = 2;
pub const EXIT_IDENTITY_FAILURE: i32 = 3;

/// Parse the shell-safe complex literal `a+bi` / `a-bi` (no spaces), or a
/// bare real `a`.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let s = text.trim();
    let invalid = || Error::InvalidInput(format!("cannot parse complex literal `{text}`"));
    if let Some(body) = s.strip_suffix(['i', 'I']) {
        // split before the sign of the imaginary part, skipping a leading
        // sign and exponent signs like 1e-3
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            let b = bytes[k];
            if (b == b'+' || b == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
                split = Some(k);
                break;
            }
        }
        let k = split.ok_or_else(invalid)?;
        let re: f64 = body[..k].parse().map_err(|_| invalid())?;
        let im_str = &body[k..];
        let im: f64 = if im_str == "+" {
            1.0
        } else if im_str == "-" {
            -1.0
        } else {
            im_str.parse().map_err(|_| invalid())?
        };
        Ok(Complex64::new(re, im))
    } else {
        let re: f64 = s.parse().map_err(|_| invalid())?;
        Ok(Complex64::new(re, 0.0))
    }
}

pub fn parse_f64_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("cannot parse number `{t}`")))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

/// One CSV cell / JSON field value. Floats render with shortest round-trip
/// decimals in both formats; NaN renders as `NaN` in CSV and null in JSON.
#[derive(Debug, Clone)]
pub enum Cell {
    UInt(u64),
    Float(f64),
    Str(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::UInt(v) => v.to_string(),
            Cell::Float(v) if v.is_nan() => "NaN".into(),
            Cell::Float(v) => format_f64(*v),
            Cell::Str(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::UInt(v) => json!(v),
            Cell::Float(v) => json!(v), // NaN -> null
            Cell::Str(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

/// Shortest decimal that parses back to the same f64.
fn format_f64(v: f64) -> String {
    let mut s = String::new();
    write!(s, "{v}").unwrap();
    s
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: &'static str,
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, headers: Vec<&'static str>) -> Self {
        Self { name, headers, rows: Vec::new() }
    }
}

#[derive(Debug, Clone)]
pub struct Emission {
    pub tables: Vec<Table>,
    pub meta: Map<String, Value>,
}

impl Emission {
    pub fn new() -> Self {
        Self { tables: Vec::new(), meta: Map::new() }
    }

    pub fn meta_entry(&mut self, key: &str, value: Value) {
        self.meta.insert(key.to_string(), value);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        for (i, table) in self.tables.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push_str(&table.headers.join(","));
            out.push('\n');
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
        out
    }

    fn render_json(&self) -> String {
        let mut root = Map::new();
        root.insert("meta".into(), Value::Object(self.meta.clone()));
        for table in &self.tables {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|row| {
                    let mut obj = Map::new();
                    for (h, cell) in table.headers.iter().zip(row) {
                        obj.insert((*h).to_string(), cell.json());
                    }
                    Value::Object(obj)
                })
                .collect();
            root.insert(table.name.to_string(), Value::Array(rows));
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(root)).unwrap();
        s.push('\n');
        s
    }
}

fn thread_count() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

fn base_meta(started: Instant) -> Map<String, Value> {
    let mut meta = Map::new();
    meta.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    meta.insert("thread_count".into(), json!(thread_count()));
    meta.insert("wall_time_s".into(), json!(started.elapsed().as_secs_f64()));
    meta
}

/// Resolve the parameter, honoring the `--force` regime override.
pub fn resolve_parameter(c: Complex64, force: bool) -> Result<Parameter> {
    if !c.re.is_finite() || !c.im.is_finite() {
        return Err(Error::InvalidInput("c must be finite".into()));
    }
    if force {
        Ok(Parameter::forced(c))
    } else {
        Parameter::new(c)
    }
}

pub fn run_dim(param: &Parameter, n_max: u32, tol: f64) -> Result<Emission> {
    if n_max < 4 || n_max > 24 {
        return Err(Error::InvalidInput("--n-max must be in 4..=24".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("--tol must be positive".into()));
    }
    let started = Instant::now();
    let report = bowen::solve_dimension(param, n_max, tol)?;

    let mut roots = Table::new("roots", vec!["n", "s_n"]);
    for &(n, s) in &report.roots_by_n {
        roots.rows.push(vec![Cell::UInt(n as u64), Cell::Float(s)]);
    }
    let mut summary = Table::new(
        "summary",
        vec!["c_re", "c_im", "s_star", "beta", "ruelle", "residual"],
    );
    summary.rows.push(vec![
        Cell::Float(report.c.re),
        Cell::Float(report.c.im),
        Cell::Float(report.s_star),
        Cell::Float(report.beta),
        Cell::Float(report.ruelle_value),
        Cell::Float(report.residual),
    ]);

    let mut em = Emission::new();
    em.tables.push(roots);
    em.tables.push(summary);
    em.meta = base_meta(started);
    em.meta_entry("c", json!(format!("{}", fmt_complex(report.c))));
    em.meta_entry("n_max", json!(n_max));
    em.meta_entry("tol", json!(tol));
    em.meta_entry("bracket", json!([report.bracket.0, report.bracket.1]));
    Ok(em)
}

pub fn run_sweep(
    moduli: &[f64],
    args: u32,
    n_max: u32,
    tol: f64,
    force: bool,
) -> Result<Emission> {
    if args == 0 {
        return Err(Error::InvalidInput("--args must be >= 1".into()));
    }
    if moduli.iter().any(|&m| m < 0.0) {
        return Err(Error::InvalidInput("moduli must be non-negative".into()));
    }
    let started = Instant::now();
    let mut table = Table::new("sweep", vec!["modulus", "argument", "s_star", "ruelle", "ratio"]);
    for &m in moduli {
        for j in 0..args {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / args as f64;
            let c = Complex64::from_polar(m, theta);
            let row = match resolve_parameter(c, force)
                .and_then(|p| bowen::solve_dimension(&p, n_max, tol))
            {
                Ok(report) => {
                    let ratio = if m == 0.0 {
                        f64::NAN
                    } else {
                        (report.s_star - 1.0) / (m * m)
                    };
                    vec![
                        Cell::Float(m),
                        Cell::Float(theta),
                        Cell::Float(report.s_star),
                        Cell::Float(report.ruelle_value),
                        Cell::Float(ratio),
                    ]
                }
                // flag the failed row, keep sweeping
                Err(_) => vec![
                    Cell::Float(m),
                    Cell::Float(theta),
                    Cell::Float(f64::NAN),
                    Cell::Float(f64::NAN),
                    Cell::Float(f64::NAN),
                ],
            };
            table.rows.push(row);
        }
    }
    let mut em = Emission::new();
    em.tables.push(table);
    em.meta = base_meta(started);
    em.meta_entry("n_max", json!(n_max));
    em.meta_entry("tol", json!(tol));
    em.meta_entry("args", json!(args));
    Ok(em)
}

pub fn run_pressure(param: &Parameter, s: f64, n: u32) -> Result<Emission> {
    if n < 1 || n > 24 {
        return Err(Error::InvalidInput("--n must be in 1..=24".into()));
    }
    let started = Instant::now();
    let mut table = Table::new("pressure", vec!["n", "s", "log_delta", "p_raw", "p_ratio"]);
    for k in 1..=n {
        let sample = pressure::pressure_sample(param, s, k)?;
        table.rows.push(vec![
            Cell::UInt(k as u64),
            Cell::Float(s),
            Cell::Float(sample.log_delta),
            Cell::Float(sample.p_raw),
            sample.p_ratio.map_or(Cell::Empty, Cell::Float),
        ]);
    }
    let mut em = Emission::new();
    em.tables.push(table);
    em.meta = base_meta(started);
    em.meta_entry("c", json!(fmt_complex(param.c())));
    em.meta_entry("s", json!(s));
    Ok(em)
}

/// Returns the emission and whether every identity held.
pub fn run_identities(param: &Parameter, n: u32) -> Result<(Emission, bool)> {
    if n < 2 || n > 12 {
        return Err(Error::InvalidInput("--n must be in 2..=12 for identities".into()));
    }
    let started = Instant::now();
    let report = identities::run_suite(param, n)?;
    let mut table = Table::new("identities", vec!["identity", "residual", "bound", "pass"]);
    for check in &report.checks {
        table.rows.push(vec![
            Cell::Str(check.name.to_string()),
            Cell::Float(check.residual),
            Cell::Float(check.bound),
            Cell::Str(if check.passed() { "true" } else { "false" }.to_string()),
        ]);
    }
    let ok = report.all_passed();
    let mut em = Emission::new();
    em.tables.push(table);
    em.meta = base_meta(started);
    em.meta_entry("c", json!(fmt_complex(param.c())));
    em.meta_entry("n", json!(n));
    Ok((em, ok))
}

pub fn run_sample(param: &Parameter, count: usize, burn_in: usize, seed: u64) -> Result<Emission> {
    if count == 0 {
        return Err(Error::InvalidInput("--count must be >= 1".into()));
    }
    let started = Instant::now();
    let cloud = boxdim::sample_julia(param, count, burn_in, seed)?;
    let mut table = Table::new("points", vec!["re", "im"]);
    table.rows.reserve(cloud.points.len());
    for z in &cloud.points {
        table.rows.push(vec![Cell::Float(z.re), Cell::Float(z.im)]);
    }
    let mut em = Emission::new();
    em.tables.push(table);
    em.meta = base_meta(started);
    em.meta_entry("c", json!(fmt_complex(param.c())));
    em.meta_entry("seed", json!(seed));
    em.meta_entry("burn_in", json!(burn_in));
    em.meta_entry("rng", json!(boxdim::RNG_ALGORITHM));
    Ok(em)
}

pub fn run_boxdim(
    param: &Parameter,
    count: usize,
    burn_in: usize,
    seed: u64,
    scales: &[f64],
) -> Result<Emission> {
    if count == 0 {
        return Err(Error::InvalidInput("--count must be >= 1".into()));
    }
    if scales.is_empty() || scales.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::InvalidInput("--scales must be positive".into()));
    }
    let started = Instant::now();
    let cloud = boxdim::sample_julia(param, count, burn_in, seed)?;
    let est = boxdim::box_dimension(&cloud, scales)?;
    let mut counts = Table::new("counts", vec!["delta", "count"]);
    for (d, n) in est.scales.iter().zip(&est.counts) {
        counts.rows.push(vec![Cell::Float(*d), Cell::UInt(*n)]);
    }
    let mut summary = Table::new("summary", vec!["slope", "intercept", "r_squared"]);
    summary.rows.push(vec![
        Cell::Float(est.slope),
        Cell::Float(est.intercept),
        Cell::Float(est.r_squared),
    ]);
    let mut em = Emission::new();
    em.tables.push(counts);
    em.tables.push(summary);
    em.meta = base_meta(started);
    em.meta_entry("c", json!(fmt_complex(param.c())));
    em.meta_entry("seed", json!(seed));
    em.meta_entry("rng", json!(boxdim::RNG_ALGORITHM));
    Ok(em)
}

pub fn run_bounds(param: &Parameter) -> Result<Emission> {
    let started = Instant::now();
    let (lower, upper) = bowen::large_c_bounds(param)?;
    let mut table = Table::new("bounds", vec!["lower", "upper"]);
    table.rows.push(vec![Cell::Float(lower), Cell::Float(upper)]);
    let mut em = Emission::new();
    em.tables.push(table);
    em.meta = base_meta(started);
    em.meta_entry("c", json!(fmt_complex(param.c())));
    Ok(em)
}

pub fn fmt_complex(c: Complex64) -> String {
    if c.im < 0.0 || (c.im == 0.0 && c.im.is_sign_negative()) {
        format!("{}-{}i", format_f64(c.re), format_f64(-c.im))
    } else {
        format!("{}+{}i", format_f64(c.re), format_f64(c.im))
    }
}

/// Map library errors to exit codes.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::BracketFailure { .. }
        | Error::NonMonotone
        | Error::NoConvergence { .. }
        | Error::CriticalCollision { .. }
        | Error::LogBranchViolation { .. } => EXIT_NON_CONVERGENCE,
        _ => EXIT_INVALID_INPUT,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_complex_literals() {
        assert_eq!(parse_complex("0+0i").unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(parse_complex("0.05+0i").unwrap(), Complex64::new(0.05, 0.0));
        assert_eq!(parse_complex("-1.12+0.222i").unwrap(), Complex64::new(-1.12, 0.222));
        assert_eq!(parse_complex("0-0.25i").unwrap(), Complex64::new(0.0, -0.25));
        assert_eq!(parse_complex("1e-3+2e-4i").unwrap(), Complex64::new(1e-3, 2e-4));
        assert_eq!(parse_complex("5").unwrap(), Complex64::new(5.0, 0.0));
        assert!(parse_complex("nonsense").is_err());
        assert!(parse_complex("1+2j").is_err());
    }

    #[test]
    fn complex_round_trip() {
        for &(re, im) in &[(0.05, 0.0), (-1.12, 0.222), (0.0, -0.25), (1e-3, -2e-7)] {
            let c = Complex64::new(re, im);
            assert_eq!(parse_complex(&fmt_complex(c)).unwrap(), c);
        }
    }

    #[test]
    fn float_emission_round_trips() {
        for &v in &[0.1, 1.0036067376022224, std::f64::consts::LN_2, 1e-300, -0.0] {
            let s = format_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn csv_schema_dim() {
        let p = Parameter::new(Complex64::new(0.0, 0.0)).unwrap();
        let em = run_dim(&p, 5, 1e-10).unwrap();
        let csv = em.render(Format::Csv);
        assert!(csv.starts_with("n,s_n\n"));
        assert!(csv.contains("c_re,c_im,s_star,beta,ruelle,residual\n"));
    }

    #[test]
    fn csv_schema_bounds() {
        let p = Parameter::new(Complex64::new(5.0, 0.0)).unwrap();
        let em = run_bounds(&p).unwrap();
        let csv = em.render(Format::Csv);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("lower,upper"));
        let row = lines.next().unwrap();
        let parts: Vec<f64> = row.split(',').map(|t| t.parse().unwrap()).collect();
        assert!(parts[0] < parts[1]);
    }

    #[test]
    fn json_has_meta() {
        let p = Parameter::new(Complex64::new(0.0, 0.0)).unwrap();
        let em = run_pressure(&p, 1.0, 4).unwrap();
        let out = em.render(Format::Json);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert!(v["meta"]["version"].is_string());
        assert!(v["meta"]["thread_count"].is_number());
        assert!(v["meta"]["wall_time_s"].is_number());
        assert_eq!(v["pressure"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn pressure_trivial_row() {
        let p = Parameter::new(Complex64::new(0.0, 0.0)).unwrap();
        let em = run_pressure(&p, 1.0, 10).unwrap();
        let csv = em.render(Format::Csv);
        let last = csv.lines().last().unwrap();
        let fields: Vec<&str> = last.split(',').collect();
        assert_eq!(fields[0], "10");
        assert!(fields[3].parse::<f64>().unwrap().abs() <= 1e-12); // p_raw
        assert!(fields[4].parse::<f64>().unwrap().abs() <= 1e-12); // p_ratio
    }

    #[test]
    fn sweep_shape_and_zero_guard() {
        let em = run_sweep(&[0.0], 3, 5, 1e-8, false).unwrap();
        let csv = em.render(Format::Csv);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "modulus,argument,s_star,ruelle,ratio");
        assert_eq!(lines.len(), 4);
        for row in &lines[1..] {
            assert!(row.ends_with("NaN"), "{row}");
        }
    }

    #[test]
    fn identities_guard() {
        let p = Parameter::new(Complex64::new(0.1, 0.0)).unwrap();
        assert!(matches!(run_identities(&p, 40), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn regime_guard_maps_to_invalid_input() {
        let err = resolve_parameter(Complex64::new(1.0, 0.0), false).unwrap_err();
        assert_eq!(exit_code_for(&err), EXIT_INVALID_INPUT);
        assert!(resolve_parameter(Complex64::new(1.0, 0.0), true).is_ok());
    }
}
