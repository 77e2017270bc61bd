//! Experiment configuration files.
//!
//! The format is TOML with a fixed set of sections and keys:
//!
//! ```toml
//! [experiment]
//! name = "table2"
//! solvers = ["lbm", "heat-fd"]          # lbm | heat-fd | haway | exact-wave
//!
//! [mesh]
//! sizes = [13, 27, 55, 111, 223]
//! long_sizes = []                       # appended when long runs are enabled
//! extent = 2                            # side of the square box
//! origin = -1                           # lower-left corner coordinate
//!
//! [scheme]
//! scaling = "acoustic"                  # or "diffusive"
//! kappa = "1/18"                        # exactly one of kappa / s_j
//! alpha = -2
//! beta = 1
//! lambda = 6.5                          # lattice velocity, or lambda_ref for diffusive scaling
//! s_e = 1.7
//! s_x = 1.1
//! s_q = 1.1
//! s_eps = 1.7
//!
//! [time]
//! steps = [8, 16, 32, 64, 128]          # exactly one of steps / final_time
//! heat_steps = [8, 32, 128, 512, 2048]  # or heat_same_dt = true, or heat_safety = 0.9
//! haway_ratio = 4                       # or haway_safety = 0.9
//! trace_end = "2*pi"
//! trace_samples = 100
//!
//! [initial]
//! kind = "gaussian"                     # or "plane-wave" with kx, ky
//! width = 0.09
//!
//! [dispersion]
//! wave_vectors = [[3, 4], [1, 0]]
//!
//! [output]
//! dir = "out"
//! long = false
//! ```
//!
//! Numbers may be written as TOML integers or floats, or as strings holding
//! a product/quotient of numbers and `pi`, such as `"1/18"` or `"pi/2"`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use toml_edit::{Array, DocumentMut, Item, Table, Value};

use crate::error::{ConfigIssue, LabError, Result};
use crate::experiments::{
    plane_wave_init, ComparisonSpec, HawayStepPolicy, HeatStepPolicy, InitialCondition, SolverKind,
    TimeTarget, GAUSSIAN_WIDTH,
};
use crate::lattice::RelaxationRates;
use crate::scaling::{resolve_plan, ScalingKind, Transport};
use crate::spectral::WaveVector;

/// Largest mesh side accepted without enabling long runs.
pub const MESH_CAP: usize = 512;

const SCHEMA: &[(&str, &[&str])] = &[
    ("experiment", &["name", "solvers"]),
    ("mesh", &["sizes", "long_sizes", "extent", "origin"]),
    (
        "scheme",
        &[
            "scaling", "kappa", "s_j", "alpha", "beta", "lambda", "s_e", "s_x", "s_q", "s_eps",
        ],
    ),
    (
        "time",
        &[
            "final_time",
            "steps",
            "heat_same_dt",
            "heat_steps",
            "heat_safety",
            "haway_ratio",
            "haway_safety",
            "trace_end",
            "trace_samples",
        ],
    ),
    ("initial", &["kind", "width", "kx", "ky"]),
    ("dispersion", &["wave_vectors"]),
    ("output", &["dir", "long"]),
];

const REQUIRED: &[(&str, &str)] = &[
    ("experiment", "name"),
    ("experiment", "solvers"),
    ("mesh", "sizes"),
    ("mesh", "extent"),
    ("scheme", "scaling"),
    ("scheme", "lambda"),
    ("initial", "kind"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub solvers: (SolverKind, SolverKind),
    pub meshes: Vec<usize>,
    /// Extra meshes run only when `long` is set.
    pub long_meshes: Vec<usize>,
    pub extent: f64,
    pub origin: f64,
    pub scaling: ScalingKind,
    pub transport: Transport,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub s_e: f64,
    pub s_x: f64,
    pub s_q: f64,
    pub s_eps: f64,
    pub time: TimeTarget,
    pub heat_steps: HeatStepPolicy,
    pub haway_steps: HawayStepPolicy,
    pub trace_end: Option<f64>,
    pub trace_samples: usize,
    pub init: InitialCondition,
    pub wave_vectors: Vec<WaveVector>,
    pub out_dir: PathBuf,
    pub long: bool,
}

/// Command-line values applied on top of a parsed file before validation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub meshes: Option<Vec<usize>>,
    pub long: bool,
    pub out_dir: Option<PathBuf>,
    pub solvers: Option<(SolverKind, SolverKind)>,
}

impl RunConfig {
    /// Meshes actually run: `meshes`, then `long_meshes` when long runs are on.
    pub fn effective_meshes(&self) -> Vec<usize> {
        let mut m = self.meshes.clone();
        if self.long {
            m.extend(&self.long_meshes);
        }
        m
    }

    pub fn rates(&self) -> RelaxationRates {
        RelaxationRates {
            s_j: match self.transport {
                Transport::MomentumRate(s) => s,
                Transport::Diffusivity(_) => 1.0,
            },
            s_e: self.s_e,
            s_x: self.s_x,
            s_q: self.s_q,
            s_eps: self.s_eps,
        }
    }

    pub fn to_spec(&self) -> ComparisonSpec {
        ComparisonSpec {
            name: self.name.clone(),
            meshes: self.effective_meshes(),
            extent: self.extent,
            origin: self.origin,
            kind: self.scaling,
            transport: self.transport,
            alpha: self.alpha,
            beta: self.beta,
            rates: self.rates(),
            lambda_ref: self.lambda,
            time: self.time.clone(),
            init: self.init,
            solvers: self.solvers,
            heat_steps: self.heat_steps.clone(),
            haway_steps: self.haway_steps,
            trace_end: self.trace_end,
            trace_samples: self.trace_samples,
        }
    }

    /// Wave vectors for spectrum dumps: the configured list, else the
    /// plane-wave mode, else the lowest mode of the box along x.
    pub fn dispersion_vectors(&self) -> Vec<WaveVector> {
        if !self.wave_vectors.is_empty() {
            return self.wave_vectors.clone();
        }
        match self.init {
            InitialCondition::PlaneWave { k } => vec![k],
            InitialCondition::Gaussian { .. } => {
                vec![WaveVector::new(
                    2.0 * std::f64::consts::PI / self.extent,
                    0.0,
                )]
            }
        }
    }

    /// Checks every semantic constraint; issues carry no line numbers.
    pub fn validate(&self) -> Result<()> {
        let issues = check(self, &BTreeMap::new());
        if issues.is_empty() {
            Ok(())
        } else {
            Err(LabError::Config(issues))
        }
    }

    /// Canonical TOML text; parsing it yields an equal configuration.
    pub fn to_toml(&self) -> String {
        let mut doc = DocumentMut::new();
        let mut t = Table::new();
        t["name"] = toml_edit::value(self.name.as_str());
        t["solvers"] = toml_edit::value(str_array(&[self.solvers.0.name(), self.solvers.1.name()]));
        doc["experiment"] = Item::Table(t);

        let mut t = Table::new();
        t["sizes"] = toml_edit::value(int_array(&self.meshes));
        if !self.long_meshes.is_empty() {
            t["long_sizes"] = toml_edit::value(int_array(&self.long_meshes));
        }
        t["extent"] = toml_edit::value(self.extent);
        t["origin"] = toml_edit::value(self.origin);
        doc["mesh"] = Item::Table(t);

        let mut t = Table::new();
        t["scaling"] = toml_edit::value(self.scaling.name());
        match self.transport {
            Transport::Diffusivity(k) => t["kappa"] = toml_edit::value(k),
            Transport::MomentumRate(s) => t["s_j"] = toml_edit::value(s),
        }
        for (k, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("lambda", self.lambda),
            ("s_e", self.s_e),
            ("s_x", self.s_x),
            ("s_q", self.s_q),
            ("s_eps", self.s_eps),
        ] {
            t[k] = toml_edit::value(v);
        }
        doc["scheme"] = Item::Table(t);

        let mut t = Table::new();
        match &self.time {
            TimeTarget::FinalTime(f) => t["final_time"] = toml_edit::value(*f),
            TimeTarget::Steps(s) => t["steps"] = toml_edit::value(int_array(s)),
        }
        match &self.heat_steps {
            HeatStepPolicy::SameAsLattice => t["heat_same_dt"] = toml_edit::value(true),
            HeatStepPolicy::Steps(s) => t["heat_steps"] = toml_edit::value(int_array(s)),
            HeatStepPolicy::Stable { safety } => t["heat_safety"] = toml_edit::value(*safety),
        }
        match self.haway_steps {
            HawayStepPolicy::Ratio(r) => t["haway_ratio"] = toml_edit::value(r as i64),
            HawayStepPolicy::Cfl { safety } => t["haway_safety"] = toml_edit::value(safety),
        }
        if let Some(e) = self.trace_end {
            t["trace_end"] = toml_edit::value(e);
        }
        t["trace_samples"] = toml_edit::value(self.trace_samples as i64);
        doc["time"] = Item::Table(t);

        let mut t = Table::new();
        t["kind"] = toml_edit::value(self.init.name());
        match self.init {
            InitialCondition::Gaussian { width } => t["width"] = toml_edit::value(width),
            InitialCondition::PlaneWave { k } => {
                t["kx"] = toml_edit::value(k.kx);
                t["ky"] = toml_edit::value(k.ky);
            }
        }
        doc["initial"] = Item::Table(t);

        if !self.wave_vectors.is_empty() {
            let mut t = Table::new();
            let mut outer = Array::new();
            for k in &self.wave_vectors {
                let mut pair = Array::new();
                pair.push(k.kx);
                pair.push(k.ky);
                outer.push(pair);
            }
            t["wave_vectors"] = toml_edit::value(outer);
            doc["dispersion"] = Item::Table(t);
        }

        let mut t = Table::new();
        t["dir"] = toml_edit::value(self.out_dir.to_string_lossy().as_ref());
        t["long"] = toml_edit::value(self.long);
        doc["output"] = Item::Table(t);
        doc.to_string()
    }
}

fn str_array(items: &[&str]) -> Array {
    items.iter().copied().collect()
}

fn int_array(items: &[usize]) -> Array {
    items.iter().map(|&v| v as i64).collect()
}

/// Evaluates `a`, `a*b`, `a/b`, ... where each factor is a number or `pi`.
pub fn parse_number_expr(text: &str) -> std::result::Result<f64, String> {
    let s = text.trim();
    if s.is_empty() {
        return Err("empty number".into());
    }
    let mut value = 1.0;
    let mut op = '*';
    let mut rest = s;
    loop {
        let end = rest.find(['*', '/']).unwrap_or(rest.len());
        let token = rest[..end].trim();
        let factor = match token {
            "pi" => std::f64::consts::PI,
            t => t.parse::<f64>().map_err(|_| {
                format!("`{s}` is not a number or product/quotient of numbers and pi")
            })?,
        };
        value = if op == '*' {
            value * factor
        } else {
            value / factor
        };
        if end == rest.len() {
            break;
        }
        op = rest.as_bytes()[end] as char;
        rest = &rest[end + 1..];
    }
    if !value.is_finite() {
        return Err(format!("`{s}` does not evaluate to a finite number"));
    }
    Ok(value)
}

struct Reader<'a> {
    src: &'a str,
    root: &'a Table,
    issues: Vec<ConfigIssue>,
    lines: BTreeMap<String, usize>,
}

impl<'a> Reader<'a> {
    fn line_at(&self, offset: usize) -> usize {
        self.src[..offset.min(self.src.len())].matches('\n').count() + 1
    }

    fn issue(&mut self, line: usize, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            line,
            message: message.into(),
        });
    }

    fn section(&self, name: &str) -> Option<&'a Table> {
        self.root.get(name).and_then(Item::as_table)
    }

    /// Value of `section.key` together with its line; records the line.
    fn item(&mut self, section: &str, key: &str) -> Option<(&'a Item, usize)> {
        let table = self.section(section)?;
        let (k, item) = table.get_key_value(key)?;
        let line = k.span().map(|s| self.line_at(s.start)).unwrap_or(0);
        self.lines.insert(format!("{section}.{key}"), line);
        Some((item, line))
    }

    fn check_structure(&mut self) {
        for (name, item) in self.root.iter() {
            let line = self
                .root
                .key(name)
                .and_then(|k| k.span())
                .map(|s| self.line_at(s.start))
                .unwrap_or(0);
            let Some((_, allowed)) = SCHEMA.iter().find(|(s, _)| *s == name) else {
                self.issue(line, format!("unknown section or key `{name}`"));
                continue;
            };
            let Some(table) = item.as_table() else {
                self.issue(line, format!("`{name}` must be a section"));
                continue;
            };
            for (key, _) in table.iter() {
                if !allowed.contains(&key) {
                    let line = table
                        .key(key)
                        .and_then(|k| k.span())
                        .map(|s| self.line_at(s.start))
                        .unwrap_or(line);
                    self.issue(
                        line,
                        format!(
                            "unknown key `{key}` in [{name}] (allowed: {})",
                            allowed.join(", ")
                        ),
                    );
                }
            }
        }
        for (section, key) in REQUIRED {
            if self.section(section).and_then(|t| t.get(key)).is_none() {
                self.issue(0, format!("missing required key `{section}.{key}`"));
            }
        }
    }

    fn number(&mut self, section: &str, key: &str) -> Option<f64> {
        let (item, line) = self.item(section, key)?;
        let parsed = match item.as_value() {
            Some(Value::Integer(i)) => Ok(*i.value() as f64),
            Some(Value::Float(f)) => Ok(*f.value()),
            Some(Value::String(s)) => parse_number_expr(s.value()),
            _ => Err("expected a number".to_string()),
        };
        match parsed {
            Ok(v) => Some(v),
            Err(e) => {
                self.issue(line, format!("`{section}.{key}`: {e}"));
                None
            }
        }
    }

    fn string(&mut self, section: &str, key: &str) -> Option<(String, usize)> {
        let (item, line) = self.item(section, key)?;
        match item.as_str() {
            Some(s) => Some((s.to_string(), line)),
            None => {
                self.issue(line, format!("`{section}.{key}` must be a string"));
                None
            }
        }
    }

    fn boolean(&mut self, section: &str, key: &str) -> Option<bool> {
        let (item, line) = self.item(section, key)?;
        match item.as_bool() {
            Some(b) => Some(b),
            None => {
                self.issue(line, format!("`{section}.{key}` must be true or false"));
                None
            }
        }
    }

    fn count(&mut self, section: &str, key: &str) -> Option<usize> {
        let (item, line) = self.item(section, key)?;
        match item.as_integer() {
            Some(i) if i >= 0 => Some(i as usize),
            _ => {
                self.issue(
                    line,
                    format!("`{section}.{key}` must be a non-negative integer"),
                );
                None
            }
        }
    }

    fn counts(&mut self, section: &str, key: &str) -> Option<Vec<usize>> {
        let (item, line) = self.item(section, key)?;
        let arr = item.as_array();
        let parsed: Option<Vec<usize>> = arr.and_then(|a| {
            a.iter()
                .map(|v| v.as_integer().filter(|i| *i >= 0).map(|i| i as usize))
                .collect()
        });
        if parsed.is_none() {
            self.issue(
                line,
                format!("`{section}.{key}` must be a list of non-negative integers"),
            );
        }
        parsed
    }

    fn strings(&mut self, section: &str, key: &str) -> Option<(Vec<String>, usize)> {
        let (item, line) = self.item(section, key)?;
        let parsed: Option<Vec<String>> = item
            .as_array()
            .and_then(|a| a.iter().map(|v| v.as_str().map(str::to_string)).collect());
        match parsed {
            Some(v) => Some((v, line)),
            None => {
                self.issue(line, format!("`{section}.{key}` must be a list of strings"));
                None
            }
        }
    }

    fn vectors(&mut self, section: &str, key: &str) -> Option<Vec<WaveVector>> {
        let (item, line) = self.item(section, key)?;
        let to_f64 = |v: &Value| match v {
            Value::Integer(i) => Some(*i.value() as f64),
            Value::Float(f) => Some(*f.value()),
            Value::String(s) => parse_number_expr(s.value()).ok(),
            _ => None,
        };
        let parsed: Option<Vec<WaveVector>> = item.as_array().and_then(|a| {
            a.iter()
                .map(|v| {
                    let pair = v.as_array()?;
                    if pair.len() != 2 {
                        return None;
                    }
                    Some(WaveVector::new(
                        to_f64(pair.get(0)?)?,
                        to_f64(pair.get(1)?)?,
                    ))
                })
                .collect()
        });
        if parsed.is_none() {
            self.issue(
                line,
                format!("`{section}.{key}` must be a list of [kx, ky] pairs"),
            );
        }
        parsed
    }

    fn has(&self, section: &str, key: &str) -> bool {
        self.section(section).is_some_and(|t| t.contains_key(key))
    }

    fn line(&self, path: &str) -> usize {
        self.lines.get(path).copied().unwrap_or(0)
    }
}

/// Parses and validates configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with(text, &Overrides::default())
}

/// Parses configuration text, applies command-line overrides, then validates.
/// Every violation found is reported, each with its line number.
pub fn parse_config_with(text: &str, overrides: &Overrides) -> Result<RunConfig> {
    let doc = match text.parse::<toml_edit::Document<String>>() {
        Ok(d) => d,
        Err(e) => {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
                .unwrap_or(0);
            return Err(LabError::Config(vec![ConfigIssue {
                line,
                message: format!("syntax error: {}", e.message()),
            }]));
        }
    };
    let mut r = Reader {
        src: text,
        root: doc.as_table(),
        issues: Vec::new(),
        lines: BTreeMap::new(),
    };
    r.check_structure();

    let name = r
        .string("experiment", "name")
        .map(|s| s.0)
        .unwrap_or_default();
    let mut solvers = None;
    if let Some((list, line)) = r.strings("experiment", "solvers") {
        let parsed: std::result::Result<Vec<SolverKind>, String> =
            list.iter().map(|s| s.parse()).collect();
        match parsed {
            Ok(v) if v.len() == 2 => solvers = Some((v[0], v[1])),
            Ok(v) => r.issue(
                line,
                format!(
                    "`experiment.solvers` needs exactly two solvers, got {}",
                    v.len()
                ),
            ),
            Err(e) => r.issue(line, e),
        }
    }

    let meshes = r.counts("mesh", "sizes").unwrap_or_default();
    let long_meshes = r.counts("mesh", "long_sizes").unwrap_or_default();
    let extent = r.number("mesh", "extent").unwrap_or(f64::NAN);
    let origin = r.number("mesh", "origin").unwrap_or(0.0);

    let mut scaling = ScalingKind::Acoustic;
    if let Some((s, line)) = r.string("scheme", "scaling") {
        match s.parse() {
            Ok(k) => scaling = k,
            Err(e) => r.issue(line, e),
        }
    }
    let kappa = r.number("scheme", "kappa");
    let s_j = r.number("scheme", "s_j");
    let transport = match (kappa, s_j) {
        (Some(k), None) => Some(Transport::Diffusivity(k)),
        (None, Some(s)) => Some(Transport::MomentumRate(s)),
        (Some(_), Some(_)) => {
            let line = r.line("scheme.s_j");
            r.issue(
                line,
                "set exactly one of `scheme.kappa` and `scheme.s_j`, not both",
            );
            None
        }
        (None, None) => {
            if !r.has("scheme", "kappa") && !r.has("scheme", "s_j") {
                r.issue(0, "missing required key `scheme.kappa` or `scheme.s_j`");
            }
            None
        }
    };
    let alpha = r.number("scheme", "alpha").unwrap_or(-2.0);
    let beta = r.number("scheme", "beta").unwrap_or(1.0);
    let lambda = r.number("scheme", "lambda").unwrap_or(f64::NAN);
    let defaults = RelaxationRates::with_momentum_rate(1.0);
    let s_e = r.number("scheme", "s_e").unwrap_or(defaults.s_e);
    let s_x = r.number("scheme", "s_x").unwrap_or(defaults.s_x);
    let s_q = r.number("scheme", "s_q").unwrap_or(defaults.s_q);
    let s_eps = r.number("scheme", "s_eps").unwrap_or(defaults.s_eps);

    let final_time = r.number("time", "final_time");
    let steps = r.counts("time", "steps");
    let time = match (final_time, steps) {
        (Some(t), None) => Some(TimeTarget::FinalTime(t)),
        (None, Some(s)) => Some(TimeTarget::Steps(s)),
        (Some(_), Some(_)) => {
            let line = r.line("time.steps");
            r.issue(
                line,
                "set exactly one of `time.final_time` and `time.steps`, not both",
            );
            None
        }
        (None, None) => {
            if !r.has("time", "final_time") && !r.has("time", "steps") {
                r.issue(0, "missing required key `time.final_time` or `time.steps`");
            }
            None
        }
    };

    let same_dt = r.boolean("time", "heat_same_dt");
    let heat_list = r.counts("time", "heat_steps");
    let heat_safety = r.number("time", "heat_safety");
    let chosen = [
        same_dt == Some(true),
        heat_list.is_some(),
        heat_safety.is_some(),
    ];
    if chosen.iter().filter(|c| **c).count() > 1 {
        let line = r.line("time.heat_steps").max(r.line("time.heat_safety"));
        r.issue(
            line,
            "set at most one of `heat_same_dt`, `heat_steps` and `heat_safety`",
        );
    }
    let heat_steps = if same_dt == Some(true) {
        HeatStepPolicy::SameAsLattice
    } else if let Some(list) = heat_list {
        HeatStepPolicy::Steps(list)
    } else {
        HeatStepPolicy::Stable {
            safety: heat_safety.unwrap_or(0.9),
        }
    };

    let ratio = r.count("time", "haway_ratio");
    let haway_safety = r.number("time", "haway_safety");
    if ratio.is_some() && haway_safety.is_some() {
        let line = r.line("time.haway_safety");
        r.issue(line, "set at most one of `haway_ratio` and `haway_safety`");
    }
    let haway_steps = match (ratio, haway_safety) {
        (_, Some(s)) => HawayStepPolicy::Cfl { safety: s },
        (Some(k), None) => HawayStepPolicy::Ratio(k),
        (None, None) => HawayStepPolicy::Ratio(crate::reference::ACOUSTIC_STEP_RATIO),
    };
    let trace_end = r.number("time", "trace_end");
    let trace_samples = r.count("time", "trace_samples").unwrap_or(100);

    let mut init = InitialCondition::Gaussian {
        width: GAUSSIAN_WIDTH,
    };
    let width = r.number("initial", "width");
    let kx = r.number("initial", "kx");
    let ky = r.number("initial", "ky");
    if let Some((kind, line)) = r.string("initial", "kind") {
        match kind.as_str() {
            "gaussian" => {
                init = InitialCondition::Gaussian {
                    width: width.unwrap_or(GAUSSIAN_WIDTH),
                };
                if kx.is_some() || ky.is_some() {
                    r.issue(
                        line,
                        "`initial.kx`/`initial.ky` apply only to plane-wave starts",
                    );
                }
            }
            "plane-wave" => match (kx, ky) {
                (Some(kx), Some(ky)) => {
                    init = InitialCondition::PlaneWave {
                        k: WaveVector::new(kx, ky),
                    }
                }
                _ => r.issue(line, "plane-wave start needs `initial.kx` and `initial.ky`"),
            },
            other => r.issue(
                line,
                format!("unknown initial condition `{other}` (expected gaussian or plane-wave)"),
            ),
        }
    }

    let wave_vectors = r.vectors("dispersion", "wave_vectors").unwrap_or_default();
    let out_dir = r
        .string("output", "dir")
        .map(|s| PathBuf::from(s.0))
        .unwrap_or_else(|| PathBuf::from("out"));
    let long = r.boolean("output", "long").unwrap_or(false);

    let mut config = RunConfig {
        name,
        solvers: solvers.unwrap_or((SolverKind::Lbm, SolverKind::Lbm)),
        meshes,
        long_meshes,
        extent,
        origin,
        scaling,
        transport: transport.unwrap_or(Transport::Diffusivity(f64::NAN)),
        alpha,
        beta,
        lambda,
        s_e,
        s_x,
        s_q,
        s_eps,
        time: time.unwrap_or(TimeTarget::FinalTime(f64::NAN)),
        heat_steps,
        haway_steps,
        trace_end,
        trace_samples,
        init,
        wave_vectors,
        out_dir,
        long,
    };
    if overrides.long {
        config.long = true;
    }
    if let Some(m) = &overrides.meshes {
        select_meshes(&mut config, m);
    }
    if let Some(d) = &overrides.out_dir {
        config.out_dir = d.clone();
    }
    if let Some(s) = overrides.solvers {
        config.solvers = s;
    }

    // structural problems make the semantic checks noisy and unreliable
    let mut issues = r.issues;
    if issues.is_empty() {
        issues = check(&config, &r.lines);
    }
    if issues.is_empty() {
        Ok(config)
    } else {
        Err(LabError::Config(issues))
    }
}

/// Replaces the mesh list; per-mesh step lists are narrowed to the chosen
/// meshes when every chosen mesh appears in the configured list.
fn select_meshes(config: &mut RunConfig, chosen: &[usize]) {
    let original = config.effective_meshes();
    let picks: Option<Vec<usize>> = chosen
        .iter()
        .map(|n| original.iter().position(|m| m == n))
        .collect();
    if let Some(idx) = picks {
        let narrow = |list: &Vec<usize>| -> Vec<usize> {
            if list.len() == original.len() {
                idx.iter().map(|&i| list[i]).collect()
            } else {
                list.clone()
            }
        };
        if let TimeTarget::Steps(s) = &config.time {
            config.time = TimeTarget::Steps(narrow(s));
        }
        if let HeatStepPolicy::Steps(s) = &config.heat_steps {
            config.heat_steps = HeatStepPolicy::Steps(narrow(s));
        }
    }
    config.meshes = chosen.to_vec();
    config.long_meshes.clear();
}

fn check(c: &RunConfig, lines: &BTreeMap<String, usize>) -> Vec<ConfigIssue> {
    let mut issues = Vec::new();
    let mut push = |path: &str, message: String| {
        issues.push(ConfigIssue {
            line: lines.get(path).copied().unwrap_or(0),
            message,
        });
    };

    if c.name.trim().is_empty() {
        push(
            "experiment.name",
            "`experiment.name` must not be empty".into(),
        );
    }
    let meshes = c.effective_meshes();
    if meshes.is_empty() {
        push(
            "mesh.sizes",
            "`mesh.sizes` must list at least one mesh".into(),
        );
    }
    if let Some(n) = meshes.iter().find(|n| **n < 3) {
        push(
            "mesh.sizes",
            format!("mesh size {n} is below the minimum of 3"),
        );
    }
    if meshes.windows(2).any(|w| w[0] >= w[1]) {
        push(
            "mesh.sizes",
            "mesh sizes must be strictly increasing".into(),
        );
    }
    if !c.long {
        if let Some(n) = c.meshes.iter().find(|n| **n > MESH_CAP) {
            push(
                "mesh.sizes",
                format!("mesh size {n} exceeds {MESH_CAP}; enable long runs (`output.long = true` or --long)"),
            );
        }
    }
    if !(c.extent > 0.0 && c.extent.is_finite()) {
        push(
            "mesh.extent",
            format!("`mesh.extent` must be positive, got {}", c.extent),
        );
    }
    if !c.origin.is_finite() {
        push("mesh.origin", "`mesh.origin` must be finite".into());
    }
    if !(c.alpha > -4.0 && c.alpha < 2.0) {
        push(
            "scheme.alpha",
            format!("`scheme.alpha` = {} outside (-4, 2)", c.alpha),
        );
    }
    if !c.beta.is_finite() {
        push("scheme.beta", "`scheme.beta` must be finite".into());
    }
    if !(c.lambda > 0.0 && c.lambda.is_finite()) {
        push(
            "scheme.lambda",
            format!("`scheme.lambda` must be positive, got {}", c.lambda),
        );
    }
    let mut transport_ok = true;
    match c.transport {
        Transport::Diffusivity(k) => {
            if !(k > 0.0 && k.is_finite()) {
                push(
                    "scheme.kappa",
                    format!("`scheme.kappa` must be positive, got {k}"),
                );
                transport_ok = false;
            }
        }
        Transport::MomentumRate(s) => {
            if !(s > 0.0 && s < 2.0) {
                push("scheme.s_j", format!("`scheme.s_j` = {s} outside (0, 2)"));
                transport_ok = false;
            }
        }
    }
    for (key, v) in [
        ("s_e", c.s_e),
        ("s_x", c.s_x),
        ("s_q", c.s_q),
        ("s_eps", c.s_eps),
    ] {
        if !(v > 0.0 && v <= 2.0) {
            push(
                &format!("scheme.{key}"),
                format!("`scheme.{key}` = {v} outside (0, 2]"),
            );
        }
    }

    match &c.time {
        TimeTarget::FinalTime(t) => {
            if !(*t > 0.0 && t.is_finite()) {
                push(
                    "time.final_time",
                    format!("`time.final_time` must be positive, got {t}"),
                );
            }
        }
        TimeTarget::Steps(s) => {
            if s.len() != meshes.len() {
                push(
                    "time.steps",
                    format!("{} step counts for {} meshes", s.len(), meshes.len()),
                );
            }
            if s.contains(&0) {
                push("time.steps", "step counts must be positive".into());
            }
        }
    }
    let uses = |k| c.solvers.0 == k || c.solvers.1 == k;
    if uses(SolverKind::HeatFd) {
        match &c.heat_steps {
            HeatStepPolicy::Steps(s) => {
                if s.len() != meshes.len() {
                    push(
                        "time.heat_steps",
                        format!("{} heat step counts for {} meshes", s.len(), meshes.len()),
                    );
                }
                if s.contains(&0) {
                    push(
                        "time.heat_steps",
                        "heat step counts must be positive".into(),
                    );
                }
            }
            HeatStepPolicy::Stable { safety } => {
                if !(*safety > 0.0 && *safety <= 1.0) {
                    push(
                        "time.heat_safety",
                        format!("`time.heat_safety` = {safety} outside (0, 1]"),
                    );
                }
            }
            HeatStepPolicy::SameAsLattice => {}
        }
    }
    match c.haway_steps {
        HawayStepPolicy::Ratio(0) => push(
            "time.haway_ratio",
            "`time.haway_ratio` must be at least 1".into(),
        ),
        HawayStepPolicy::Cfl { safety } if !(safety > 0.0 && safety <= 1.0) => push(
            "time.haway_safety",
            format!("`time.haway_safety` = {safety} outside (0, 1]"),
        ),
        _ => {}
    }
    if let Some(e) = c.trace_end {
        if !(e > 0.0 && e.is_finite()) {
            push(
                "time.trace_end",
                format!("`time.trace_end` must be positive, got {e}"),
            );
        }
    }

    match c.init {
        InitialCondition::Gaussian { width } => {
            if !(width > 0.0 && width.is_finite()) {
                push(
                    "initial.width",
                    format!("`initial.width` must be positive, got {width}"),
                );
            }
        }
        InitialCondition::PlaneWave { k } => {
            if k.norm_sqr() == 0.0 {
                push("initial.kx", "plane-wave vector must be non-zero".into());
            } else if c.extent > 0.0 {
                if let Err(e) = plane_wave_init(k, c.extent) {
                    push("initial.kx", e.to_string());
                }
            }
        }
    }
    if uses(SolverKind::ExactWave) && !matches!(c.init, InitialCondition::PlaneWave { .. }) {
        push(
            "experiment.solvers",
            "`exact-wave` needs a plane-wave initial condition".into(),
        );
    }
    if c.wave_vectors
        .iter()
        .any(|k| k.norm_sqr() == 0.0 || !k.kx.is_finite() || !k.ky.is_finite())
    {
        push(
            "dispersion.wave_vectors",
            "wave vectors must be finite and non-zero".into(),
        );
    }

    // resolve every plan once the inputs are individually sane, so that an
    // infeasible relaxation rate is reported before anything runs
    if issues.is_empty() && transport_ok {
        let spec = c.to_spec();
        for (i, n) in meshes.iter().enumerate() {
            if let Err(e) = spec.plan_request(i).and_then(|req| resolve_plan(&req)) {
                issues.push(ConfigIssue {
                    line: lines
                        .get("scheme.kappa")
                        .or_else(|| lines.get("scheme.s_j"))
                        .copied()
                        .unwrap_or(0),
                    message: format!("mesh {n}: {e}"),
                });
            }
        }
    }
    issues
}
