//! Experiment configuration and end-to-end stages.
//!
//! A configuration file holds `[section]` headers and `key = value` lines;
//! `#` starts a comment. Lengths such as ε may be written relative to the
//! section's `h` (`2h`, `h/2`, `0.5h`), and scan coordinates relative to
//! `h̃ = h/√ε` with the suffix `ht`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::asymptotics::{match_spectra, predict_lattice, AsymptoticsError, MatchReport};
use crate::classical::{
    band_bounds, q_infinity_interval_at, rational_directions, torus_extrema_with_grid, BandBounds, ClassicalError,
    RationalDirection,
};
use crate::eig::{EigBackend, EigError, EigOptions};
use crate::io::{self, IoError, SpectrumMeta, Table, Value};
use crate::model1d::{
    harmonic_levels, resolvent_bound_scan, Model1D, Model1dError, Potential, ScanRegion,
};
use crate::spectral::{assemble_matrix, build_mode_shell, SpectralError};
use crate::symbol::{generate_random_symbol, SymbolCoefficients, SymbolError};

/// Environment variable naming the root for relative output directories.
pub const OUTPUT_ROOT_ENV: &str = "TORSPEC_OUTPUT_ROOT";
pub const DEFAULT_DIMENSION_CAP: usize = 3000;
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const SYMBOL_FILE: &str = "symbol.tsv";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {msg}")]
pub struct ConfigError {
    /// 1-based; 0 for errors not tied to a line.
    pub line: usize,
    pub msg: String,
}

impl ConfigError {
    fn new(line: usize, msg: impl Into<String>) -> Self {
        Self { line, msg: msg.into() }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("config error at {0}")]
    Config(#[from] ConfigError),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error("mode shell has {count} modes, above the dimension cap {cap}")]
    DimensionCapExceeded { count: usize, cap: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] IoError),
}

impl PipelineError {
    /// 2 for configuration and input errors, 3 for numerical failures, 1
    /// for file-system errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::Invalid(_) | PipelineError::MissingInput(_) => 2,
            PipelineError::DimensionCapExceeded { .. } | PipelineError::Numerical(_) => 3,
            PipelineError::Io(IoError::File { .. }) => 1,
            PipelineError::Io(_) => 2,
        }
    }
}

impl From<SymbolError> for PipelineError {
    fn from(e: SymbolError) -> Self {
        PipelineError::Invalid(e.to_string())
    }
}

impl From<EigError> for PipelineError {
    fn from(e: EigError) -> Self {
        PipelineError::Numerical(e.to_string())
    }
}

impl From<SpectralError> for PipelineError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::Eig(e) => e.into(),
            other => PipelineError::Invalid(other.to_string()),
        }
    }
}

impl From<ClassicalError> for PipelineError {
    fn from(e: ClassicalError) -> Self {
        match e {
            ClassicalError::DegenerateMinimum { .. } => PipelineError::Numerical(e.to_string()),
            other => PipelineError::Invalid(other.to_string()),
        }
    }
}

impl From<AsymptoticsError> for PipelineError {
    fn from(e: AsymptoticsError) -> Self {
        match e {
            AsymptoticsError::Classical(c) => c.into(),
            other => PipelineError::Invalid(other.to_string()),
        }
    }
}

impl From<Model1dError> for PipelineError {
    fn from(e: Model1dError) -> Self {
        match e {
            Model1dError::Eig(e) => e.into(),
            Model1dError::TruncationTooSmall { .. } => PipelineError::Numerical(e.to_string()),
            other => PipelineError::Invalid(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SymbolSource {
    Generate { degree: usize, kappa: f64, seed: u64 },
    File(PathBuf),
    /// `(ℓ, j, k, value)`; the mirror coefficient is set by conjugation.
    Inline { degree: usize, coeffs: Vec<(usize, i64, i64, Complex64)> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionConfig {
    /// Empty means every rational direction of the symbol's band.
    pub directions: Vec<(i64, i64)>,
    pub k_max: usize,
    pub j_range: usize,
    pub energy: f64,
    /// `C₀` in the matching window `|Re z − a| < h/(C₀√ε)`.
    pub c0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model1dConfig {
    pub h: f64,
    pub epsilon: f64,
    pub theta: f64,
    pub potential: Potential,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RescheckConfig {
    pub h: f64,
    pub epsilon: f64,
    pub theta: f64,
    pub potential: Potential,
    pub region: ScanRegion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub symbol: SymbolSource,
    pub h: f64,
    pub epsilon_list: Vec<f64>,
    pub e1: f64,
    pub e2: f64,
    pub energy_for_classical: f64,
    pub curve_samples: usize,
    pub dimension_cap: usize,
    pub backend: EigBackend,
    pub workers: usize,
    pub prediction: PredictionConfig,
    pub model1d: Model1dConfig,
    pub rescheck: RescheckConfig,
    pub output_dir: PathBuf,
}

struct Entry {
    key: String,
    value: String,
    line: usize,
}

/// Entries of one section, consumed key by key.
struct Section {
    name: String,
    entries: Vec<Entry>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        let pos = self.entries.iter().position(|e| e.key == key)?;
        let e = self.entries.remove(pos);
        Some((e.value, e.line))
    }

    fn take_all(&mut self, key: &str) -> Vec<(String, usize)> {
        let mut out = Vec::new();
        while let Some(v) = self.take(key) {
            out.push(v);
        }
        out
    }

    fn finish(self) -> Result<(), ConfigError> {
        match self.entries.first() {
            Some(e) => Err(ConfigError::new(e.line, format!("unknown key `{}` in [{}]", e.key, self.name))),
            None => Ok(()),
        }
    }

    fn real(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        self.take(key).map_or(Ok(default), |(v, l)| parse_real(&v, l))
    }

    fn count(&mut self, key: &str, default: usize) -> Result<usize, ConfigError> {
        self.take(key).map_or(Ok(default), |(v, l)| {
            v.parse().map_err(|_| ConfigError::new(l, format!("`{key}` expects a nonnegative integer, got `{v}`")))
        })
    }

    fn scaled(&mut self, key: &str, unit: &str, scale: f64, default: f64) -> Result<f64, ConfigError> {
        self.take(key).map_or(Ok(default), |(v, l)| parse_scaled(&v, unit, scale, l))
    }
}

fn parse_real(v: &str, line: usize) -> Result<f64, ConfigError> {
    v.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| ConfigError::new(line, format!("expected a number, got `{v}`")))
}

/// `x`, `x·unit` written `<x><unit>`, `<unit>`, or `<unit>/<x>`.
fn parse_scaled(v: &str, unit: &str, scale: f64, line: usize) -> Result<f64, ConfigError> {
    let t = v.trim();
    if t == unit {
        return Ok(scale);
    }
    if let Some(d) = t.strip_prefix(unit).and_then(|r| r.strip_prefix('/')) {
        let d = parse_real(d, line)?;
        if d == 0.0 {
            return Err(ConfigError::new(line, "division by zero"));
        }
        return Ok(scale / d);
    }
    if let Some(c) = t.strip_suffix(unit) {
        if let Ok(c) = parse_real(c.trim_end_matches('*'), line) {
            return Ok(c * scale);
        }
    }
    parse_real(t, line)
}

fn parse_list(v: &str, unit: &str, scale: f64, line: usize) -> Result<Vec<f64>, ConfigError> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_scaled(s, unit, scale, line)).collect()
}

fn parse_potential(v: &str, line: usize) -> Result<Potential, ConfigError> {
    if v.trim() == "one-minus-cos" {
        return Ok(Potential::one_minus_cos());
    }
    let mut p = Potential::zero();
    for term in v.split(';').filter(|s| !s.trim().is_empty()) {
        let f: Vec<&str> = term.split_whitespace().collect();
        if f.len() != 3 {
            return Err(ConfigError::new(line, format!("potential term `{}` is not `nu re im`", term.trim())));
        }
        let nu = f[0].parse::<i64>().map_err(|_| ConfigError::new(line, format!("bad frequency `{}`", f[0])))?;
        p.set(nu, Complex64::new(parse_real(f[1], line)?, parse_real(f[2], line)?));
    }
    p.check_hermitian().map_err(|e| ConfigError::new(line, e.to_string()))?;
    Ok(p)
}

fn split_sections(text: &str) -> Result<Vec<Section>, ConfigError> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        if let Some(name) = l.strip_prefix('[') {
            let Some(name) = name.strip_suffix(']') else {
                return Err(ConfigError::new(line, "unterminated section header"));
            };
            let name = name.trim().to_string();
            if sections.iter().any(|s| s.name == name) {
                return Err(ConfigError::new(line, format!("duplicate section [{name}]")));
            }
            sections.push(Section { name, entries: Vec::new() });
            continue;
        }
        let Some((k, v)) = l.split_once('=') else {
            return Err(ConfigError::new(line, "expected `key = value`"));
        };
        let Some(sec) = sections.last_mut() else {
            return Err(ConfigError::new(line, "key outside any section"));
        };
        let key = k.trim().to_string();
        if key != "coeff" && sec.entries.iter().any(|e| e.key == key) {
            return Err(ConfigError::new(line, format!("duplicate key `{key}`")));
        }
        sec.entries.push(Entry { key, value: v.trim().to_string(), line });
    }
    Ok(sections)
}

const SECTIONS: [&str; 8] = ["symbol", "spectrum", "classical", "predict", "model1d", "rescheck", "output", "compare"];

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map: BTreeMap<String, Section> = BTreeMap::new();
        for s in split_sections(text)? {
            if !SECTIONS.contains(&s.name.as_str()) {
                let line = s.entries.first().map_or(0, |e| e.line.saturating_sub(1));
                return Err(ConfigError::new(line, format!("unknown section [{}]", s.name)));
            }
            map.insert(s.name.clone(), s);
        }
        let mut sec = |name: &str| map.remove(name).unwrap_or(Section { name: name.into(), entries: Vec::new() });

        let mut s = sec("symbol");
        let source = s.take("source").unwrap_or(("generate".into(), 0));
        let symbol = match source.0.as_str() {
            "generate" => {
                let degree = s.count("F", 2)?;
                let kappa = s.real("kappa", 2.0)?;
                let seed = s.count("seed", 1)? as u64;
                SymbolSource::Generate { degree, kappa, seed }
            }
            "file" => {
                let (p, l) = s.take("path").ok_or_else(|| ConfigError::new(source.1, "source = file needs `path`"))?;
                if p.is_empty() {
                    return Err(ConfigError::new(l, "empty path"));
                }
                SymbolSource::File(PathBuf::from(p))
            }
            "inline" => {
                let degree = s.count("F", 2)?;
                let mut coeffs = Vec::new();
                for (v, l) in s.take_all("coeff") {
                    let f: Vec<&str> = v.split_whitespace().collect();
                    if f.len() != 5 {
                        return Err(ConfigError::new(l, "coeff expects `ell j k re im`"));
                    }
                    let int = |t: &str| t.parse::<i64>().map_err(|_| ConfigError::new(l, format!("bad index `{t}`")));
                    let ell = int(f[0])?;
                    if !(0..3).contains(&ell) {
                        return Err(ConfigError::new(l, format!("component {ell} outside 0..3")));
                    }
                    let z = Complex64::new(parse_real(f[3], l)?, parse_real(f[4], l)?);
                    coeffs.push((ell as usize, int(f[1])?, int(f[2])?, z));
                }
                SymbolSource::Inline { degree, coeffs }
            }
            other => return Err(ConfigError::new(source.1, format!("unknown symbol source `{other}`"))),
        };
        s.finish()?;

        let mut s = sec("spectrum");
        let h = s.real("h", 0.01)?;
        if h <= 0.0 {
            return Err(ConfigError::new(0, format!("h must be positive, got {h}")));
        }
        let (eps_text, eps_line) = s.take("epsilons").unwrap_or(("h/2, h, 2h, 4h, 8h, 16h".into(), 0));
        let epsilon_list = parse_list(&eps_text, "h", h, eps_line)?;
        if epsilon_list.is_empty() {
            return Err(ConfigError::new(eps_line, "epsilon list is empty"));
        }
        if let Some(e) = epsilon_list.iter().find(|e| **e < 0.0) {
            return Err(ConfigError::new(eps_line, format!("negative epsilon {e}")));
        }
        let e1_line = s.entries.iter().find(|e| e.key == "E1").map_or(0, |e| e.line);
        let e1 = s.real("E1", 0.85)?;
        let e2 = s.real("E2", 1.0)?;
        if !(0.0 <= e1 && e1 < e2) {
            return Err(ConfigError::new(e1_line, format!("need 0 <= E1 < E2, got E1 = {e1}, E2 = {e2}")));
        }
        let dimension_cap = s.count("dimension_cap", DEFAULT_DIMENSION_CAP)?;
        let backend = match s.take("backend") {
            None => EigBackend::Native,
            Some((v, l)) => match v.as_str() {
                "native" => EigBackend::Native,
                "faer" => EigBackend::Faer,
                _ => return Err(ConfigError::new(l, format!("unknown backend `{v}`"))),
            },
        };
        let workers = s.count("workers", 1)?.max(1);
        s.finish()?;

        let mut s = sec("classical");
        let energy_for_classical = s.real("energy", 1.0)?;
        let curve_samples = s.count("curve_samples", 720)?;
        s.finish()?;

        let mut s = sec("predict");
        let mut directions = Vec::new();
        if let Some((v, l)) = s.take("directions") {
            if v != "all" {
                for d in v.split(';').filter(|d| !d.trim().is_empty()) {
                    let f: Vec<i64> = d
                        .split_whitespace()
                        .map(|t| t.parse::<i64>())
                        .collect::<Result<_, _>>()
                        .map_err(|_| ConfigError::new(l, format!("bad direction `{}`", d.trim())))?;
                    if f.len() != 2 {
                        return Err(ConfigError::new(l, format!("direction `{}` is not `m n`", d.trim())));
                    }
                    RationalDirection::new(f[0], f[1]).map_err(|e| ConfigError::new(l, e.to_string()))?;
                    directions.push((f[0], f[1]));
                }
            }
        }
        let prediction = PredictionConfig {
            directions,
            k_max: s.count("k_max", 3)?,
            j_range: s.count("j_range", 2)?,
            energy: s.real("energy", energy_for_classical)?,
            c0: s.real("c0", 1.0)?,
        };
        s.finish()?;

        let mut s = sec("model1d");
        let mh = s.real("h", 0.01)?;
        let model1d = Model1dConfig {
            h: mh,
            epsilon: s.scaled("epsilon", "h", mh, 1.0)?,
            theta: s.real("theta", 0.0)?,
            potential: match s.take("potential") {
                Some((v, l)) => parse_potential(&v, l)?,
                None => Potential::one_minus_cos(),
            },
            count: s.count("count", 4)?,
        };
        s.finish()?;

        let mut s = sec("rescheck");
        let rh = s.real("h", 0.01)?;
        let reps = s.scaled("epsilon", "h", rh, rh)?;
        if reps <= 0.0 {
            return Err(ConfigError::new(0, "rescheck epsilon must be positive"));
        }
        let ht = rh / reps.sqrt();
        let im_values = match s.take("im_values") {
            Some((v, l)) => parse_list(&v, "ht", ht, l)?,
            None => vec![0.0, 0.5 * ht],
        };
        let rescheck = RescheckConfig {
            h: rh,
            epsilon: reps,
            theta: s.real("theta", 0.0)?,
            potential: match s.take("potential") {
                Some((v, l)) => parse_potential(&v, l)?,
                None => Potential::one_minus_cos(),
            },
            region: ScanRegion {
                re_min: s.scaled("re_min", "ht", ht, 5.0 * ht)?,
                re_max: s.scaled("re_max", "ht", ht, 0.8)?,
                re_points: s.count("re_points", 40)?,
                im_values,
                c_lower: s.real("c_lower", 5.0)?,
                c_imag: s.real("c_imag", 1.0)?,
                max_abs_z: s.real("max_abs_z", 1.0)?,
                smallness: s.real("smallness", 0.1)?,
            },
        };
        s.finish()?;

        let mut s = sec("output");
        let output_dir = PathBuf::from(s.take("dir").map_or("out".to_string(), |v| v.0));
        s.finish()?;
        sec("compare").finish()?;

        Ok(Self {
            symbol,
            h,
            epsilon_list,
            e1,
            e2,
            energy_for_classical,
            curve_samples,
            dimension_cap,
            backend,
            workers,
            prediction,
            model1d,
            rescheck,
            output_dir,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|e| io::file_err(path, e))?;
        Ok(Self::parse(&text)?)
    }

    /// Output directory, resolved against `root` when relative.
    pub fn resolved_output(&self, root: Option<&Path>) -> PathBuf {
        match root {
            Some(r) if self.output_dir.is_relative() => r.join(&self.output_dir),
            _ => self.output_dir.clone(),
        }
    }

    pub fn eig_options(&self) -> EigOptions {
        EigOptions { backend: self.backend, ..Default::default() }
    }
}

pub fn resolve_symbol(src: &SymbolSource) -> Result<SymbolCoefficients, PipelineError> {
    match src {
        SymbolSource::Generate { degree, kappa, seed } => Ok(generate_random_symbol(*degree, *kappa, *seed)?),
        SymbolSource::File(p) => Ok(io::symbol_from_table(&Table::read(p)?)?),
        SymbolSource::Inline { degree, coeffs } => {
            let mut q = SymbolCoefficients::zeros(*degree, 1.0)?;
            for &(ell, j, k, z) in coeffs {
                q.set_real_mode(ell, j, k, z)?;
            }
            Ok(q)
        }
    }
}

/// Tag `h<h>_eps<ε>` used in file names.
pub fn case_tag(h: f64, epsilon: f64) -> String {
    format!("h{h}_eps{epsilon}")
}

pub fn spectrum_file(h: f64, epsilon: f64) -> String {
    format!("spectrum_{}.tsv", case_tag(h, epsilon))
}

pub fn prediction_file(h: f64, epsilon: f64, dir: RationalDirection) -> String {
    format!("prediction_{}_m{}_n{}.tsv", case_tag(h, epsilon), dir.m(), dir.n())
}

/// Files written and parameters used by one stage.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StageReport {
    pub stage: String,
    pub params: Vec<(String, String)>,
    pub files: Vec<PathBuf>,
}

impl StageReport {
    fn new(stage: &str) -> Self {
        Self { stage: stage.into(), ..Default::default() }
    }

    fn param(&mut self, k: &str, v: impl ToString) {
        self.params.push((k.into(), v.to_string()));
    }

    fn write(&mut self, dir: &Path, name: &str, t: &Table) -> Result<(), PipelineError> {
        let p = dir.join(name);
        t.write(&p)?;
        self.files.push(PathBuf::from(name));
        Ok(())
    }
}

fn symbol_params(r: &mut StageReport, src: &SymbolSource) {
    match src {
        SymbolSource::Generate { degree, kappa, seed } => {
            r.param("symbol", format!("generate F={degree} kappa={kappa} seed={seed}"))
        }
        SymbolSource::File(p) => r.param("symbol", format!("file {}", p.display())),
        SymbolSource::Inline { degree, coeffs } => r.param("symbol", format!("inline F={degree} terms={}", coeffs.len())),
    }
}

/// Replaces the stage's section in the manifest, keeping other stages.
pub fn update_manifest(dir: &Path, report: &StageReport) -> Result<(), PipelineError> {
    let path = dir.join(MANIFEST_FILE);
    let mut sections: BTreeMap<String, Vec<String>> = BTreeMap::new();
    if let Ok(text) = fs::read_to_string(&path) {
        let mut current: Option<String> = None;
        for l in text.lines() {
            if let Some(name) = l.strip_prefix('[').and_then(|n| n.strip_suffix(']')) {
                current = Some(name.to_string());
                sections.entry(name.to_string()).or_default();
            } else if let Some(c) = &current {
                if !l.trim().is_empty() {
                    sections.get_mut(c).unwrap().push(l.to_string());
                }
            }
        }
    }
    sections.insert(
        "tool".into(),
        vec!["name = torspec".into(), format!("version = {}", env!("CARGO_PKG_VERSION"))],
    );
    let mut lines: Vec<String> = report.params.iter().map(|(k, v)| format!("{k} = {v}")).collect();
    let files: Vec<String> = report.files.iter().map(|f| f.display().to_string()).collect();
    lines.push(format!("files = {}", files.join(", ")));
    sections.insert(format!("stage.{}", report.stage), lines);
    let mut out = String::from("# torspec run manifest\n");
    for (name, lines) in &sections {
        let _ = writeln!(out, "[{name}]");
        for l in lines {
            let _ = writeln!(out, "{l}");
        }
    }
    fs::create_dir_all(dir).map_err(|e| io::file_err(dir, e))?;
    fs::write(&path, out).map_err(|e| io::file_err(&path, e))?;
    Ok(())
}

/// `gen-symbol`: writes the symbol exchange file.
pub fn run_gen_symbol(cfg: &ExperimentConfig, dir: &Path) -> Result<StageReport, PipelineError> {
    let q = resolve_symbol(&cfg.symbol)?;
    let mut r = StageReport::new("gen-symbol");
    symbol_params(&mut r, &cfg.symbol);
    r.write(dir, SYMBOL_FILE, &io::symbol_table(&q))?;
    Ok(r)
}

/// Angle curve `(θ, ⟨q⟩, min q, max q)` at the sample angles of `band`.
pub fn torus_curves(q: &SymbolCoefficients, band: &BandBounds, energy: f64) -> Vec<(f64, f64, f64, f64)> {
    let side = (16 * q.degree()).max(64);
    let r = energy.sqrt();
    band.curve
        .iter()
        .map(|&(a, avg)| {
            let ext = torus_extrema_with_grid(q, r * a.cos(), r * a.sin(), side);
            (a, avg, ext.min, ext.max)
        })
        .collect()
}

/// `runClassical`: direction records, both-orientation intervals and the
/// angle curves at `energy_for_classical`.
pub fn run_classical(cfg: &ExperimentConfig, dir: &Path) -> Result<StageReport, PipelineError> {
    let q = resolve_symbol(&cfg.symbol)?;
    let e = cfg.energy_for_classical;
    let band = band_bounds(&q, e, cfg.curve_samples)?;
    let intervals: Vec<_> = rational_directions(q.degree())
        .into_iter()
        .map(|d| {
            let (xi, eta) = d.on_shell(e);
            q_infinity_interval_at(&q, d, xi, eta)
        })
        .collect();
    let mut r = StageReport::new("classical");
    symbol_params(&mut r, &cfg.symbol);
    r.param("energy", e);
    r.param("curve_samples", cfg.curve_samples);
    r.write(dir, "classical_directions.tsv", &io::directions_table(&intervals, e))?;
    r.write(dir, "classical_orientations.tsv", &io::orientations_table(&band, e))?;
    r.write(dir, "classical_curve.tsv", &io::curve_table(&torus_curves(&q, &band, e), e))?;
    Ok(r)
}

/// `runSpectrum`: one spectrum file per ε.
pub fn run_spectrum(cfg: &ExperimentConfig, dir: &Path) -> Result<StageReport, PipelineError> {
    let q = resolve_symbol(&cfg.symbol)?;
    let shell = build_mode_shell(cfg.h, cfg.e1, cfg.e2)?;
    if shell.len() > cfg.dimension_cap {
        return Err(PipelineError::DimensionCapExceeded { count: shell.len(), cap: cfg.dimension_cap });
    }
    let opts = cfg.eig_options();
    let meta = SpectrumMeta { e1: cfg.e1, e2: cfg.e2, degree: q.degree(), kappa: q.decay_kappa(), seed: q.seed() };
    let one = |eps: f64| -> Result<Table, PipelineError> {
        let rec = assemble_matrix(&q, &shell, eps)?.spectrum(&opts)?;
        Ok(io::spectrum_table(&rec, &meta))
    };
    let eps = &cfg.epsilon_list;
    let tables: Vec<Result<Table, PipelineError>> = if cfg.workers <= 1 {
        eps.iter().map(|&e| one(e)).collect()
    } else {
        let chunk = eps.len().div_ceil(cfg.workers);
        std::thread::scope(|s| {
            let handles: Vec<_> = eps.chunks(chunk).map(|c| s.spawn(|| c.iter().map(|&e| one(e)).collect::<Vec<_>>())).collect();
            handles.into_iter().flat_map(|h| h.join().expect("spectrum worker panicked")).collect()
        })
    };
    let mut r = StageReport::new("spectrum2d");
    symbol_params(&mut r, &cfg.symbol);
    r.param("h", cfg.h);
    r.param("E1", cfg.e1);
    r.param("E2", cfg.e2);
    r.param("dimension", shell.len());
    r.param("epsilons", eps.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", "));
    r.param("backend", format!("{:?}", cfg.backend).to_lowercase());
    for (&e, t) in eps.iter().zip(tables) {
        r.write(dir, &spectrum_file(cfg.h, e), &t?)?;
    }
    Ok(r)
}

fn prediction_directions(cfg: &ExperimentConfig, q: &SymbolCoefficients) -> Result<Vec<RationalDirection>, PipelineError> {
    if cfg.prediction.directions.is_empty() {
        return Ok(rational_directions(q.degree()));
    }
    cfg.prediction
        .directions
        .iter()
        .map(|&(m, n)| RationalDirection::new(m, n).map_err(PipelineError::from))
        .collect()
}

/// `predict`: lattice predictions per (ε, direction), ε > 0.
pub fn run_predict(cfg: &ExperimentConfig, dir: &Path) -> Result<StageReport, PipelineError> {
    let q = resolve_symbol(&cfg.symbol)?;
    let p = &cfg.prediction;
    let mut r = StageReport::new("predict");
    symbol_params(&mut r, &cfg.symbol);
    r.param("h", cfg.h);
    r.param("energy", p.energy);
    r.param("k_max", p.k_max);
    r.param("j_range", p.j_range);
    for &eps in cfg.epsilon_list.iter().filter(|e| **e > 0.0) {
        for d in prediction_directions(cfg, &q)? {
            let pred = predict_lattice(&q, d, p.energy, cfg.h, eps, p.j_range, p.k_max)?;
            r.write(dir, &prediction_file(cfg.h, eps, d), &io::prediction_table(&pred))?;
        }
    }
    Ok(r)
}

/// Restriction of predicted and computed points to the leg below the band
/// and to the window `|Re z − center| < h/(C₀√ε)`, then greedy matching.
pub fn compare_leg(
    predicted: &[Complex64],
    computed: &[Complex64],
    center: f64,
    inf_band: f64,
    h: f64,
    epsilon: f64,
    c0: f64,
) -> (MatchReport, Vec<Complex64>, Vec<Complex64>) {
    let half = h / (c0 * epsilon.sqrt());
    let keep = |z: &&Complex64| (z.re - center).abs() < half && z.im / epsilon < inf_band;
    let p: Vec<Complex64> = predicted.iter().filter(keep).copied().collect();
    let c: Vec<Complex64> = computed.iter().filter(keep).copied().collect();
    (match_spectra(&p, &c, h, epsilon), p, c)
}

/// `runCompare`: matches every prediction file in `dir` against the
/// spectrum file of the same `(h, ε)` and summarizes the errors.
pub fn run_compare(cfg: &ExperimentConfig, dir: &Path) -> Result<StageReport, PipelineError> {
    let q = resolve_symbol(&cfg.symbol)?;
    let band = band_bounds(&q, cfg.prediction.energy, cfg.curve_samples)?;
    let mut names: Vec<String> = fs::read_dir(dir)
        .map_err(|e| PipelineError::MissingInput(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.file_name().to_string_lossy().into_owned()))
        .filter(|n| n.starts_with("prediction_") && n.ends_with(".tsv"))
        .collect();
    names.sort();
    if names.is_empty() {
        return Err(PipelineError::MissingInput(format!("no prediction files in {}", dir.display())));
    }
    let mut r = StageReport::new("compare");
    symbol_params(&mut r, &cfg.symbol);
    r.param("c0", cfg.prediction.c0);
    r.param("inf_band", io::format_real(band.inf_band));
    let mut summary = Table::new(
        "torspec-compare-summary",
        &["m", "n", "h", "epsilon", "matchable", "matched", "unmatched_predicted", "unmatched_computed", "rms"],
    );
    let mut rows: Vec<(i64, i64, f64, f64, MatchReport, usize)> = Vec::new();
    for name in names {
        let pt = Table::read(&dir.join(&name))?;
        let (h, eps, predicted) = io::prediction_from_table(&pt)?;
        let m: i64 = pt.get("m")?.parse().map_err(|_| PipelineError::Invalid(format!("{name}: bad m")))?;
        let n: i64 = pt.get("n")?.parse().map_err(|_| PipelineError::Invalid(format!("{name}: bad n")))?;
        let center = {
            let (jc, kc, re) = (pt.column("j")?, pt.column("k")?, pt.column("re")?);
            pt.rows
                .iter()
                .find(|row| row[jc] == Value::Int(0) && row[kc] == Value::Int(0))
                .map(|row| row[re].as_f64())
                .ok_or_else(|| PipelineError::Invalid(format!("{name}: no j = 0 point")))?
        };
        let spath = dir.join(spectrum_file(h, eps));
        if !spath.exists() {
            return Err(PipelineError::MissingInput(format!("{} needed by {name}", spath.display())));
        }
        let (_, _, computed) = io::spectrum_from_table(&Table::read(&spath)?)?;
        let (report, p, c) = compare_leg(&predicted, &computed, center, band.inf_band, h, eps, cfg.prediction.c0);
        let tag = format!("{}_m{m}_n{n}", case_tag(h, eps));
        r.write(dir, &format!("match_{tag}.tsv"), &io::match_table(&report, h, eps))?;
        r.write(dir, &format!("comparison_{tag}.tsv"), &io::comparison_table(&report, &p, &c))?;
        rows.push((m, n, h, eps, report, c.len()));
    }
    rows.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then((a.3 / a.2).total_cmp(&(b.3 / b.2))).then(b.2.total_cmp(&a.2)));
    for (m, n, h, eps, rep, matchable) in &rows {
        summary.push(vec![
            Value::Int(*m),
            Value::Int(*n),
            Value::Real(*h),
            Value::Real(*eps),
            Value::Int(*matchable as i64),
            Value::Int(rep.pairs.len() as i64),
            Value::Int(rep.unmatched_predicted as i64),
            Value::Int(rep.unmatched_computed as i64),
            Value::Real(rep.rms_rescaled_error),
        ]);
        if *matchable == 0 {
            summary.set(&format!("empty_leg_{}_m{m}_n{n}", case_tag(*h, *eps)), "zero matchable points");
        }
    }
    // Trend across h at fixed (direction, ε/h), rows already ordered by decreasing h.
    for w in rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if (a.0, a.1) == (b.0, b.1) && ((a.3 / a.2) - (b.3 / b.2)).abs() < 1e-12 && a.2 != b.2 {
            let trend = if b.4.rms_rescaled_error < a.4.rms_rescaled_error { "decreasing" } else { "not decreasing" };
            summary.set(&format!("trend_m{}_n{}_ratio{}_h{}_to_h{}", a.0, a.1, a.3 / a.2, a.2, b.2), trend);
        }
    }
    r.write(dir, "compare_summary.tsv", &summary)?;
    Ok(r)
}

/// `model1d`: low-lying eigenvalues of the 1D model next to the harmonic
/// prediction `iε min V + h√ε e^{iπ/4}(V''/2)^{1/2}(2k+1)`.
pub fn run_model1d(cfg: &ExperimentConfig, dir: &Path) -> Result<StageReport, PipelineError> {
    let c = &cfg.model1d;
    let model = Model1D::new(c.h, c.epsilon, c.theta, c.potential.clone(), 0.0)?;
    let min = c.potential.nondegenerate_minimum()?;
    let eigs = model.low_lying_spectrum(c.count, &cfg.eig_options())?;
    let center = Complex64::new(0.0, c.epsilon * min.value);
    let scale = c.h * c.epsilon.sqrt();
    let levels = harmonic_levels(min.second_derivative, c.count);
    let mut t = Table::new("torspec-model1d", &["k", "re", "im", "pred_re", "pred_im", "rescaled_error"]);
    t.set_real("h", c.h);
    t.set_real("epsilon", c.epsilon);
    t.set_real("theta", c.theta);
    t.set("J_max", model.j_max);
    for (k, (z, l)) in eigs.iter().zip(&levels).enumerate() {
        let p = center + l * scale;
        t.push(vec![
            Value::Int(k as i64),
            Value::Real(z.re),
            Value::Real(z.im),
            Value::Real(p.re),
            Value::Real(p.im),
            Value::Real((z - p).norm() / scale),
        ]);
    }
    let mut r = StageReport::new("model1d");
    r.param("h", c.h);
    r.param("epsilon", c.epsilon);
    r.param("theta", c.theta);
    r.param("count", c.count);
    r.write(dir, "model1d_spectrum.tsv", &t)?;
    Ok(r)
}

/// `rescheck`: resolvent probe of the 1D model over the configured region.
pub fn run_rescheck(cfg: &ExperimentConfig, dir: &Path) -> Result<StageReport, PipelineError> {
    let c = &cfg.rescheck;
    let model = Model1D::new(c.h, c.epsilon, c.theta, c.potential.clone(), 0.0)?;
    let scan = resolvent_bound_scan(&model, &c.region)?;
    let mut r = StageReport::new("rescheck");
    r.param("h", c.h);
    r.param("epsilon", c.epsilon);
    r.param("re_range", format!("{} {}", c.region.re_min, c.region.re_max));
    r.param("re_points", c.region.re_points);
    r.write(dir, "resolvent_probe.tsv", &io::probe_table(&scan, c.h, c.epsilon))?;
    Ok(r)
}
