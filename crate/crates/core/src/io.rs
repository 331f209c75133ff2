//! Plain-text data files.
//!
//! Every file is a [`Table`]: metadata lines `# key = value`, one line
//! `# columns = name name …`, then whitespace-separated rows. Reals are
//! written with 17 significant digits, which round-trips every `f64`
//! exactly; integers are written without a decimal point.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::asymptotics::{LatticePrediction, MatchReport};
use crate::classical::{BandBounds, QInfinityInterval};
use crate::model1d::ResolventScan;
use crate::spectral::SpectrumRecord;
use crate::symbol::{SymbolCoefficients, SymbolError};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("missing header key `{0}`")]
    MissingKey(String),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("expected format `{expected}`, found `{found}`")]
    WrongFormat { expected: String, found: String },
    #[error(transparent)]
    Symbol(#[from] SymbolError),
}

/// One table cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Int(i64),
    Real(f64),
}

impl Value {
    pub fn as_f64(&self) -> f64 {
        match *self {
            Value::Int(i) => i as f64,
            Value::Real(x) => x,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match *self {
            Value::Int(i) => Some(i),
            Value::Real(_) => None,
        }
    }
}

/// `x` with 17 significant digits.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

fn parse_value(tok: &str, line: usize) -> Result<Value, IoError> {
    if let Ok(i) = tok.parse::<i64>() {
        return Ok(Value::Int(i));
    }
    tok.parse::<f64>()
        .map(Value::Real)
        .map_err(|_| IoError::Parse { line, msg: format!("not a number: `{tok}`") })
}

/// Header, column names and rows of a data file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(format: &str, columns: &[&str]) -> Self {
        Self {
            meta: vec![("format".into(), format.into())],
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        let v = value.to_string();
        match self.meta.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = v,
            None => self.meta.push((key.into(), v)),
        }
    }

    pub fn set_real(&mut self, key: &str, value: f64) {
        self.set(key, format_real(value));
    }

    pub fn get(&self, key: &str) -> Result<&str, IoError> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| IoError::MissingKey(key.into()))
    }

    pub fn get_f64(&self, key: &str) -> Result<f64, IoError> {
        let v = self.get(key)?;
        v.parse().map_err(|_| IoError::Parse { line: 0, msg: format!("`{key}` is not a number: `{v}`") })
    }

    pub fn get_usize(&self, key: &str) -> Result<usize, IoError> {
        let v = self.get(key)?;
        v.parse().map_err(|_| IoError::Parse { line: 0, msg: format!("`{key}` is not a count: `{v}`") })
    }

    pub fn expect_format(&self, expected: &str) -> Result<(), IoError> {
        let found = self.get("format")?;
        if found != expected {
            return Err(IoError::WrongFormat { expected: expected.into(), found: found.into() });
        }
        Ok(())
    }

    pub fn column(&self, name: &str) -> Result<usize, IoError> {
        self.columns.iter().position(|c| c == name).ok_or_else(|| IoError::MissingColumn(name.into()))
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k} = {v}");
        }
        let _ = writeln!(s, "# columns = {}", self.columns.join(" "));
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|v| match *v {
                    Value::Int(i) => i.to_string(),
                    Value::Real(x) => format_real(x),
                })
                .collect();
            let _ = writeln!(s, "{}", cells.join("\t"));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, IoError> {
        let mut t = Table::default();
        let mut have_columns = false;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let l = raw.trim();
            if l.is_empty() {
                continue;
            }
            if let Some(rest) = l.strip_prefix('#') {
                let Some((k, v)) = rest.split_once('=') else {
                    return Err(IoError::Parse { line, msg: "header line without `=`".into() });
                };
                let (k, v) = (k.trim(), v.trim());
                if k == "columns" {
                    t.columns = v.split_whitespace().map(str::to_string).collect();
                    have_columns = true;
                } else {
                    t.meta.push((k.into(), v.into()));
                }
                continue;
            }
            if !have_columns {
                return Err(IoError::Parse { line, msg: "data row before the column line".into() });
            }
            let row = l.split_whitespace().map(|tok| parse_value(tok, line)).collect::<Result<Vec<_>, _>>()?;
            if row.len() != t.columns.len() {
                return Err(IoError::Parse { line, msg: format!("expected {} fields, found {}", t.columns.len(), row.len()) });
            }
            t.rows.push(row);
        }
        Ok(t)
    }

    pub fn write(&self, path: &Path) -> Result<(), IoError> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| file_err(dir, e))?;
        }
        fs::write(path, self.render()).map_err(|e| file_err(path, e))
    }

    pub fn read(path: &Path) -> Result<Self, IoError> {
        let text = fs::read_to_string(path).map_err(|e| file_err(path, e))?;
        Self::parse(&text)
    }

    /// Values of one column as reals.
    pub fn real_column(&self, name: &str) -> Result<Vec<f64>, IoError> {
        let c = self.column(name)?;
        Ok(self.rows.iter().map(|r| r[c].as_f64()).collect())
    }
}

pub fn file_err(path: &Path, source: std::io::Error) -> IoError {
    IoError::File { path: path.display().to_string(), source }
}

fn r(x: f64) -> Value {
    Value::Real(x)
}

fn int(i: i64) -> Value {
    Value::Int(i)
}

pub const SYMBOL_FORMAT: &str = "torspec-symbol";
pub const SPECTRUM_FORMAT: &str = "torspec-spectrum";
pub const DIRECTIONS_FORMAT: &str = "torspec-classical-directions";
pub const ORIENTATIONS_FORMAT: &str = "torspec-classical-orientations";
pub const CURVE_FORMAT: &str = "torspec-classical-curve";
pub const PROBE_FORMAT: &str = "torspec-resolvent-probe";
pub const PREDICTION_FORMAT: &str = "torspec-prediction";
pub const MATCH_FORMAT: &str = "torspec-match";
pub const COMPARISON_FORMAT: &str = "torspec-comparison";

/// Symbol exchange table: `F`, `kappa`, `seed`, then `(ℓ, j, k, re, im)`.
pub fn symbol_table(q: &SymbolCoefficients) -> Table {
    let mut t = Table::new(SYMBOL_FORMAT, &["ell", "j", "k", "re", "im"]);
    t.set("F", q.degree());
    t.set_real("kappa", q.decay_kappa());
    t.set("seed", q.seed().map_or("none".to_string(), |s| s.to_string()));
    for (ell, j, k) in q.indices() {
        let c = q.coeff(ell, j, k);
        t.push(vec![int(ell as i64), int(j), int(k), r(c.re), r(c.im)]);
    }
    t
}

pub fn symbol_from_table(t: &Table) -> Result<SymbolCoefficients, IoError> {
    t.expect_format(SYMBOL_FORMAT)?;
    let f = t.get_usize("F")?;
    let kappa = t.get_f64("kappa")?;
    let seed = match t.get("seed")? {
        "none" => None,
        s => Some(s.parse().map_err(|_| IoError::Parse { line: 0, msg: format!("bad seed `{s}`") })?),
    };
    let mut q = SymbolCoefficients::zeros(f, kappa)?;
    q.set_seed(seed);
    let cols = [t.column("ell")?, t.column("j")?, t.column("k")?, t.column("re")?, t.column("im")?];
    for (i, row) in t.rows.iter().enumerate() {
        let idx = |c: usize| {
            row[cols[c]].as_i64().ok_or_else(|| IoError::Parse { line: i + 1, msg: "index is not an integer".into() })
        };
        let (ell, j, k) = (idx(0)?, idx(1)?, idx(2)?);
        if !(0..3).contains(&ell) {
            return Err(IoError::Parse { line: i + 1, msg: format!("component {ell} outside 0..3") });
        }
        let v = Complex64::new(row[cols[3]].as_f64(), row[cols[4]].as_f64());
        q.set_raw(ell as usize, j, k, v)?;
    }
    q.check_hermitian()?;
    Ok(q)
}

/// Provenance carried in spectrum headers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumMeta {
    pub e1: f64,
    pub e2: f64,
    pub degree: usize,
    pub kappa: f64,
    pub seed: Option<u64>,
}

pub fn spectrum_table(rec: &SpectrumRecord, meta: &SpectrumMeta) -> Table {
    let mut t = Table::new(SPECTRUM_FORMAT, &["re", "im", "im_over_eps"]);
    t.set_real("h", rec.h);
    t.set_real("epsilon", rec.epsilon);
    t.set_real("E1", meta.e1);
    t.set_real("E2", meta.e2);
    t.set("F", meta.degree);
    t.set_real("kappa", meta.kappa);
    t.set("seed", meta.seed.map_or("none".to_string(), |s| s.to_string()));
    t.set("dimension", rec.eigenvalues.len());
    t.set_real("residual_bound", rec.residual_bound);
    t.set_real("trace_error", rec.trace_error);
    t.set_real("trace_tolerance", rec.trace_tolerance);
    t.set("trace_identity", if rec.trace_identity_holds() { "pass" } else { "fail" });
    let mut eigs = rec.eigenvalues.clone();
    eigs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    for z in eigs {
        let s = if rec.epsilon > 0.0 { z.im / rec.epsilon } else { f64::NAN };
        t.push(vec![r(z.re), r(z.im), r(s)]);
    }
    t
}

/// Eigenvalues and `(h, ε)` from a spectrum table.
pub fn spectrum_from_table(t: &Table) -> Result<(f64, f64, Vec<Complex64>), IoError> {
    t.expect_format(SPECTRUM_FORMAT)?;
    let re = t.real_column("re")?;
    let im = t.real_column("im")?;
    let eigs = re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect();
    Ok((t.get_f64("h")?, t.get_f64("epsilon")?, eigs))
}

const INTERVAL_COLUMNS: [&str; 9] = [
    "m",
    "n",
    "torus_average",
    "q_inf",
    "q_sup",
    "t_min",
    "second_derivative_at_min",
    "torus_min_q",
    "torus_max_q",
];

fn interval_row(iv: &QInfinityInterval) -> Vec<Value> {
    vec![
        int(iv.direction.m()),
        int(iv.direction.n()),
        r(iv.torus_average),
        r(iv.q_inf),
        r(iv.q_sup),
        r(iv.t_min),
        r(iv.second_derivative_at_min),
        r(iv.torus_min_q),
        r(iv.torus_max_q),
    ]
}

/// One record per direction in canonical orientation.
pub fn directions_table(intervals: &[QInfinityInterval], energy: f64) -> Table {
    let mut t = Table::new(DIRECTIONS_FORMAT, &INTERVAL_COLUMNS);
    t.set_real("energy", energy);
    t.set("records", intervals.len());
    for iv in intervals {
        t.push(interval_row(iv));
    }
    t
}

/// Intervals of every orientation `±(ξ, η)` with the torus angle.
pub fn orientations_table(band: &BandBounds, energy: f64) -> Table {
    let mut cols = vec!["angle", "xi", "eta"];
    cols.extend(INTERVAL_COLUMNS);
    let mut t = Table::new(ORIENTATIONS_FORMAT, &cols);
    t.set_real("energy", energy);
    t.set_real("inf_band", band.inf_band);
    t.set_real("sup_band", band.sup_band);
    for iv in &band.intervals {
        let angle = crate::symbol::reduce_angle(iv.eta.atan2(iv.xi));
        let mut row = vec![r(angle), r(iv.xi), r(iv.eta)];
        row.extend(interval_row(iv));
        t.push(row);
    }
    t
}

/// Torus-average curve `(angle, ⟨q⟩_Λ, min_Λ q, max_Λ q)`.
pub fn curve_table(curve: &[(f64, f64, f64, f64)], energy: f64) -> Table {
    let mut t = Table::new(CURVE_FORMAT, &["angle", "torus_average", "torus_min_q", "torus_max_q"]);
    t.set_real("energy", energy);
    for &(a, avg, lo, hi) in curve {
        t.push(vec![r(a), r(avg), r(lo), r(hi)]);
    }
    t
}

pub fn probe_table(scan: &ResolventScan, h: f64, epsilon: f64) -> Table {
    let mut t = Table::new(PROBE_FORMAT, &["re_z", "im_z", "sigma_min", "bound_value"]);
    t.set_real("h", h);
    t.set_real("epsilon", epsilon);
    t.set_real("h_tilde", scan.probe.h_tilde);
    t.set("J_max", scan.j_max);
    t.set_real("fitted_c", scan.fitted_c);
    for (&z, &s) in scan.probe.z_grid.iter().zip(&scan.probe.sigma_min) {
        t.push(vec![r(z.re), r(z.im), r(s), r(scan.probe.bound_value(z))]);
    }
    t
}

pub fn prediction_table(p: &LatticePrediction) -> Table {
    let mut t = Table::new(PREDICTION_FORMAT, &["j", "k", "xi2", "a", "b", "re", "im"]);
    t.set("m", p.direction.m());
    t.set("n", p.direction.n());
    t.set_real("energy", p.energy);
    t.set_real("h", p.h);
    t.set_real("epsilon", p.epsilon);
    t.set_real("ladder_prefactor_re", p.ladder_prefactor.re);
    t.set_real("ladder_prefactor_im", p.ladder_prefactor.im);
    t.set_real("calibration_factor", p.calibration_factor);
    t.set("window_warning", p.window_warning.as_deref().unwrap_or("none"));
    for pt in &p.points {
        t.push(vec![int(pt.j), int(pt.k as i64), r(pt.xi2), r(pt.a), r(pt.b), r(pt.value.re), r(pt.value.im)]);
    }
    t
}

/// Predicted values with `(h, ε)` from a prediction table.
pub fn prediction_from_table(t: &Table) -> Result<(f64, f64, Vec<Complex64>), IoError> {
    t.expect_format(PREDICTION_FORMAT)?;
    let re = t.real_column("re")?;
    let im = t.real_column("im")?;
    Ok((t.get_f64("h")?, t.get_f64("epsilon")?, re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect()))
}

pub fn match_table(m: &MatchReport, h: f64, epsilon: f64) -> Table {
    let mut t = Table::new(MATCH_FORMAT, &["pred_re", "pred_im", "comp_re", "comp_im", "distance"]);
    t.set_real("h", h);
    t.set_real("epsilon", epsilon);
    t.set("matched", m.pairs.len());
    t.set("unmatched_predicted", m.unmatched_predicted);
    t.set("unmatched_computed", m.unmatched_computed);
    t.set_real("rms_rescaled_error", m.rms_rescaled_error);
    for &(p, c, d) in &m.pairs {
        t.push(vec![r(p.re), r(p.im), r(c.re), r(c.im), r(d)]);
    }
    t
}

pub fn match_from_table(t: &Table) -> Result<MatchReport, IoError> {
    t.expect_format(MATCH_FORMAT)?;
    let cols: Vec<Vec<f64>> = ["pred_re", "pred_im", "comp_re", "comp_im", "distance"]
        .iter()
        .map(|c| t.real_column(c))
        .collect::<Result<_, _>>()?;
    let pairs = (0..t.rows.len())
        .map(|i| (Complex64::new(cols[0][i], cols[1][i]), Complex64::new(cols[2][i], cols[3][i]), cols[4][i]))
        .collect();
    Ok(MatchReport {
        pairs,
        unmatched_predicted: t.get_usize("unmatched_predicted")?,
        unmatched_computed: t.get_usize("unmatched_computed")?,
        rms_rescaled_error: t.get_f64("rms_rescaled_error")?,
    })
}

/// Overlay file: `kind = 0` predicted, `kind = 1` computed; matched pairs
/// appear as consecutive rows sharing `pair`, unmatched points have
/// `pair = −1` and distance `nan`.
pub fn comparison_table(m: &MatchReport, predicted: &[Complex64], computed: &[Complex64]) -> Table {
    let mut t = Table::new(COMPARISON_FORMAT, &["kind", "pair", "re", "im", "distance"]);
    for (i, &(p, c, d)) in m.pairs.iter().enumerate() {
        t.push(vec![int(0), int(i as i64), r(p.re), r(p.im), r(d)]);
        t.push(vec![int(1), int(i as i64), r(c.re), r(c.im), r(d)]);
    }
    for (kind, list, pick) in [(0, predicted, 0usize), (1, computed, 1usize)] {
        for &z in list {
            let used = m.pairs.iter().any(|pr| if pick == 0 { pr.0 == z } else { pr.1 == z });
            if !used {
                t.push(vec![int(kind), int(-1), r(z.re), r(z.im), r(f64::NAN)]);
            }
        }
    }
    t
}
