//! Line-oriented `key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored; keys carry dotted section
//! prefixes. Every key is optional except `output.dir`.
//!
//! | key | default |
//! |-----|---------|
//! | `mode` | `simulate` (`conv-space`, `conv-time`, `verify`) |
//! | `profile` | `full` (`ci`) |
//! | `seed` | `1` |
//! | `model.epsilon` | `0.5`; `0.025` for the convergence modes |
//! | `model.A` | `epsilon^2/16`; `0.25` for the convergence modes |
//! | `model.scheme` | `1` (`2`, `bdf2-es-1`, `bdf2-es-2`) |
//! | `model.dealias` | `false` |
//! | `grid.n` | `256`; `64` with `profile = ci` |
//! | `grid.length` | `100` |
//! | `time.schedule` | `0.05:100` (`dt:t_end` segments, comma separated, or `long`) |
//! | `psd.tol` | `1e-9`; `1e-12` for the convergence modes |
//! | `psd.max_iter` | `200` |
//! | `psd.residual_norm` | `l2` (`hm1`) |
//! | `psd.unit_step` | `false` |
//! | `init.amplitude` | `0.05` |
//! | `init.sites` | `50,50,10` (`x,y,magnitude` triples separated by `;`, `none`) |
//! | `init.site_shape` | `impulse` (`gaussian`) |
//! | `output.dir` | required |
//! | `output.snapshot_times` | `1,10,20,40,100,200,500,3000,9000` |
//! | `output.record_every` | `1` |
//! | `study.n_list` | `6..=20` |
//! | `study.dt` | `1e-4` |
//! | `study.n` | `128`; `64` with `profile = ci` |
//! | `study.nk_list` | `100,200,400,800` |
//! | `study.t_final` | `0.16` |
//! | `study.length` | `1` |
//! | `study.schemes` | `1,2` |
//! | `verify.samples` | `20` |

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use spfc_core::harness::{PatternConfig, Site, SiteShape, SNAPSHOT_TIMES};
use spfc_core::psd::{PsdConfig, ResidualNorm};
use spfc_core::stepper::Segment;
use spfc_core::{ModelParams, Scheme};

const KEYS: &[&str] = &[
    "mode",
    "profile",
    "seed",
    "model.epsilon",
    "model.A",
    "model.scheme",
    "model.dealias",
    "grid.n",
    "grid.length",
    "time.schedule",
    "psd.tol",
    "psd.max_iter",
    "psd.residual_norm",
    "psd.unit_step",
    "init.amplitude",
    "init.sites",
    "init.site_shape",
    "output.dir",
    "output.snapshot_times",
    "output.record_every",
    "study.n_list",
    "study.dt",
    "study.n",
    "study.nk_list",
    "study.t_final",
    "study.length",
    "study.schemes",
    "verify.samples",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Simulate,
    ConvSpace,
    ConvTime,
    Verify,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::ConvSpace => "conv-space",
            Mode::ConvTime => "conv-time",
            Mode::Verify => "verify",
        }
    }

    fn is_study(self) -> bool {
        matches!(self, Mode::ConvSpace | Mode::ConvTime)
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "simulate" => Ok(Mode::Simulate),
            "conv-space" | "conv_space" => Ok(Mode::ConvSpace),
            "conv-time" | "conv_time" => Ok(Mode::ConvTime),
            "verify" => Ok(Mode::Verify),
            _ => Err(format!("unknown mode '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Full,
    Ci,
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "full" => Ok(Profile::Full),
            "ci" => Ok(Profile::Ci),
            _ => Err(format!("expected 'full' or 'ci', got '{s}'")),
        }
    }
}

/// Where a configuration value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Override,
    Default,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ConfigError {
    pub origin: Origin,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.origin {
            Origin::Line(n) => write!(f, "line {n}: {}: {}", self.key, self.message),
            Origin::Override => write!(f, "--set {}: {}", self.key, self.message),
            Origin::Default => write!(f, "{}: {}", self.key, self.message),
        }
    }
}

/// Settings of the manufactured-solution studies.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub n_list: Vec<usize>,
    pub dt: f64,
    pub n: usize,
    pub nk_list: Vec<usize>,
    pub t_final: f64,
    pub length: f64,
    pub schemes: Vec<Scheme>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub profile: Profile,
    pub seed: u64,
    pub params: ModelParams,
    pub n: usize,
    pub length: f64,
    pub schedule: Vec<Segment>,
    pub psd: PsdConfig,
    pub amplitude: f64,
    pub sites: Vec<Site>,
    pub site_shape: SiteShape,
    pub output_dir: PathBuf,
    pub snapshot_times: Vec<f64>,
    pub record_every: usize,
    pub study: StudyConfig,
    pub verify_samples: usize,
}

impl RunConfig {
    pub fn pattern(&self) -> PatternConfig {
        PatternConfig {
            length: self.length,
            n: self.n,
            params: self.params,
            seed: self.seed,
            amplitude: self.amplitude,
            sites: self.sites.clone(),
            site_shape: self.site_shape,
            schedule: self.schedule.clone(),
            snapshot_times: self.snapshot_times.clone(),
        }
    }

    /// Every key with its resolved value; parses back to an equal config.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        let p = &self.params;
        put("mode", self.mode.name().into());
        put(
            "profile",
            if self.profile == Profile::Ci {
                "ci"
            } else {
                "full"
            }
            .into(),
        );
        put("seed", self.seed.to_string());
        put("model.epsilon", p.epsilon().to_string());
        put("model.A", p.reg_a().to_string());
        put("model.scheme", p.scheme().name().into());
        put("model.dealias", p.dealias().to_string());
        put("grid.n", self.n.to_string());
        put("grid.length", self.length.to_string());
        put(
            "time.schedule",
            join(
                self.schedule
                    .iter()
                    .map(|s| format!("{}:{}", s.dt, s.t_end)),
                ", ",
            ),
        );
        put("psd.tol", self.psd.tol.to_string());
        put("psd.max_iter", self.psd.max_iter.to_string());
        put(
            "psd.residual_norm",
            match self.psd.residual_norm {
                ResidualNorm::L2 => "l2",
                ResidualNorm::Hm1 => "hm1",
            }
            .into(),
        );
        put("psd.unit_step", self.psd.unit_step.to_string());
        put("init.amplitude", self.amplitude.to_string());
        put(
            "init.sites",
            if self.sites.is_empty() {
                "none".into()
            } else {
                join(
                    self.sites
                        .iter()
                        .map(|s| format!("{},{},{}", s.x, s.y, s.magnitude)),
                    "; ",
                )
            },
        );
        put(
            "init.site_shape",
            match self.site_shape {
                SiteShape::Impulse => "impulse",
                SiteShape::Gaussian => "gaussian",
            }
            .into(),
        );
        put("output.dir", self.output_dir.display().to_string());
        put(
            "output.snapshot_times",
            if self.snapshot_times.is_empty() {
                "none".into()
            } else {
                join(self.snapshot_times.iter(), ", ")
            },
        );
        put("output.record_every", self.record_every.to_string());
        let st = &self.study;
        put("study.n_list", join(st.n_list.iter(), ", "));
        put("study.dt", st.dt.to_string());
        put("study.n", st.n.to_string());
        put("study.nk_list", join(st.nk_list.iter(), ", "));
        put("study.t_final", st.t_final.to_string());
        put("study.length", st.length.to_string());
        put(
            "study.schemes",
            join(st.schemes.iter().map(|s| s.name()), ", "),
        );
        put("verify.samples", self.verify_samples.to_string());
        s
    }
}

fn join<T: fmt::Display>(items: impl Iterator<Item = T>, sep: &str) -> String {
    items.map(|v| v.to_string()).collect::<Vec<_>>().join(sep)
}

struct Entries {
    map: BTreeMap<String, (String, Origin)>,
}

impl Entries {
    fn origin(&self, key: &str) -> Origin {
        self.map.get(key).map_or(Origin::Default, |e| e.1)
    }

    fn error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            origin: self.origin(key),
            key: key.into(),
            message: message.into(),
        }
    }

    fn get<T>(
        &self,
        key: &str,
        default: T,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<T, ConfigError> {
        match self.map.get(key) {
            None => Ok(default),
            Some((v, _)) => parse(v).map_err(|m| self.error(key, m)),
        }
    }
}

fn insert(entries: &mut Entries, line: &str, origin: Origin) -> Result<(), ConfigError> {
    let err = |key: &str, message: &str| ConfigError {
        origin,
        key: key.into(),
        message: message.into(),
    };
    let (key, value) = line
        .split_once('=')
        .ok_or_else(|| err(line.trim(), "expected 'key = value'"))?;
    let (key, value) = (key.trim(), value.trim());
    if !KEYS.contains(&key) {
        return Err(err(key, "unknown key"));
    }
    if value.is_empty() {
        return Err(err(key, "missing value"));
    }
    let previous = entries.map.insert(key.into(), (value.into(), origin));
    if let (Some((_, Origin::Line(first))), Origin::Line(_)) = (previous, origin) {
        return Err(err(
            key,
            &format!("duplicate key (first set on line {first})"),
        ));
    }
    Ok(())
}

fn number<T: FromStr>(s: &str) -> Result<T, String> {
    s.parse()
        .map_err(|_| format!("expected a number, got '{s}'"))
}

fn boolean(s: &str) -> Result<bool, String> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected 'true' or 'false', got '{s}'")),
    }
}

fn list<T>(s: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    s.split(',').map(|v| item(v.trim())).collect()
}

/// Comma-separated integers, each optionally an inclusive range `a..=b`.
fn sizes(s: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim) {
        match part.split_once("..=") {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (number(a.trim())?, number(b.trim())?);
                if a > b {
                    return Err(format!("empty range '{part}'"));
                }
                out.extend(a..=b);
            }
            None => out.push(number(part)?),
        }
    }
    Ok(out)
}

fn scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|_| format!("unknown scheme '{s}'"))
}

fn schedule(s: &str) -> Result<Vec<Segment>, String> {
    if s == "long" {
        return Ok(PatternConfig::long_schedule());
    }
    list(s, |seg| {
        let (dt, t_end) = seg
            .split_once(':')
            .ok_or_else(|| format!("expected 'dt:t_end', got '{seg}'"))?;
        Ok(Segment {
            dt: number(dt.trim())?,
            t_end: number(t_end.trim())?,
        })
    })
}

fn sites(s: &str) -> Result<Vec<Site>, String> {
    if s == "none" {
        return Ok(Vec::new());
    }
    s.split(';')
        .map(|t| {
            let v = list(t.trim(), number::<f64>)?;
            match v[..] {
                [x, y, magnitude] => Ok(Site { x, y, magnitude }),
                _ => Err(format!("expected 'x,y,magnitude', got '{}'", t.trim())),
            }
        })
        .collect()
}

fn check_schedule(segments: &[Segment]) -> Result<(), String> {
    let mut t0 = 0.0;
    for s in segments {
        if !(s.dt > 0.0 && s.dt.is_finite()) {
            return Err(format!("time step {} must be positive", s.dt));
        }
        if !(s.t_end > t0) {
            return Err(format!("segment end {} must exceed {t0}", s.t_end));
        }
        let ratio = (s.t_end - t0) / s.dt;
        if (ratio - ratio.round()).abs() > 1e-6 * ratio.max(1.0) {
            return Err(format!(
                "segment {t0}..{} is not a multiple of dt = {}",
                s.t_end, s.dt
            ));
        }
        t0 = s.t_end;
    }
    Ok(())
}

/// Parses config text, then applies `key=value` overrides in order.
pub fn parse_config_with(text: &str, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let mut e = Entries {
        map: BTreeMap::new(),
    };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if !line.is_empty() {
            insert(&mut e, line, Origin::Line(i + 1))?;
        }
    }
    for o in overrides {
        insert(&mut e, o, Origin::Override)?;
    }

    let mode = e.get("mode", Mode::Simulate, |s| s.parse())?;
    let profile = e.get("profile", Profile::Full, |s| s.parse())?;
    let ci = profile == Profile::Ci;
    let seed = e.get("seed", 1u64, number)?;

    let epsilon = e.get(
        "model.epsilon",
        if mode.is_study() { 0.025 } else { 0.5 },
        number::<f64>,
    )?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(e.error(
            "model.epsilon",
            format!("must lie in (0, 1), got {epsilon}"),
        ));
    }
    let default_a = if mode.is_study() {
        0.25
    } else {
        epsilon * epsilon / 16.0
    };
    let reg_a = e.get("model.A", default_a, number::<f64>)?;
    if !(reg_a >= 0.0 && reg_a.is_finite()) {
        return Err(e.error("model.A", format!("must be >= 0, got {reg_a}")));
    }
    let sch = e.get("model.scheme", Scheme::Bdf2Es1, scheme)?;
    let dealias = e.get("model.dealias", false, boolean)?;
    let params = ModelParams::new(epsilon, reg_a, sch)
        .map_err(|err| e.error("model.epsilon", err.to_string()))?
        .with_dealias(dealias);

    let n = e.get("grid.n", if ci { 64 } else { 256 }, number::<usize>)?;
    if n < 3 {
        return Err(e.error(
            "grid.n",
            format!("need at least 3 points per axis, got {n}"),
        ));
    }
    let length = e.get("grid.length", 100.0, number::<f64>)?;
    if !(length > 0.0 && length.is_finite()) {
        return Err(e.error("grid.length", "must be positive"));
    }

    let segments = e.get(
        "time.schedule",
        vec![Segment {
            dt: 0.05,
            t_end: 100.0,
        }],
        schedule,
    )?;
    check_schedule(&segments).map_err(|m| e.error("time.schedule", m))?;
    if segments.is_empty() && mode == Mode::Simulate {
        return Err(e.error("time.schedule", "empty schedule"));
    }

    let d = PsdConfig::default();
    let psd = PsdConfig {
        tol: e.get(
            "psd.tol",
            if mode.is_study() { 1e-12 } else { d.tol },
            number,
        )?,
        max_iter: e.get("psd.max_iter", d.max_iter, number)?,
        residual_norm: e.get("psd.residual_norm", d.residual_norm, |s| match s {
            "l2" => Ok(ResidualNorm::L2),
            "hm1" => Ok(ResidualNorm::Hm1),
            _ => Err(format!("expected 'l2' or 'hm1', got '{s}'")),
        })?,
        unit_step: e.get("psd.unit_step", d.unit_step, boolean)?,
    };
    if !(psd.tol > 0.0 && psd.tol.is_finite()) {
        return Err(e.error("psd.tol", "must be positive"));
    }
    if psd.max_iter == 0 {
        return Err(e.error("psd.max_iter", "must be at least 1"));
    }

    let amplitude = e.get("init.amplitude", 0.05, number::<f64>)?;
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(e.error("init.amplitude", "must be >= 0"));
    }
    let site_list = e.get(
        "init.sites",
        vec![Site {
            x: 50.0,
            y: 50.0,
            magnitude: 10.0,
        }],
        sites,
    )?;
    if let Some(s) = site_list
        .iter()
        .find(|s| !(s.x > 0.0 && s.x < length && s.y > 0.0 && s.y < length))
    {
        return Err(e.error(
            "init.sites",
            format!("site ({}, {}) lies outside (0, {length})^2", s.x, s.y),
        ));
    }
    let site_shape = e.get("init.site_shape", SiteShape::Impulse, |s| match s {
        "impulse" => Ok(SiteShape::Impulse),
        "gaussian" => Ok(SiteShape::Gaussian),
        _ => Err(format!("expected 'impulse' or 'gaussian', got '{s}'")),
    })?;

    let output_dir = match e.map.get("output.dir") {
        Some((v, _)) => PathBuf::from(v),
        None => return Err(e.error("output.dir", "required key is missing")),
    };
    let snapshot_times = e.get("output.snapshot_times", SNAPSHOT_TIMES.to_vec(), |s| {
        if s == "none" {
            Ok(Vec::new())
        } else {
            list(s, number::<f64>)
        }
    })?;
    if snapshot_times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(e.error("output.snapshot_times", "times must be >= 0"));
    }
    let record_every = e.get("output.record_every", 1usize, number)?;

    let study = StudyConfig {
        n_list: e.get("study.n_list", (6..=20).collect(), sizes)?,
        dt: e.get("study.dt", 1e-4, number)?,
        n: e.get("study.n", if ci { 64 } else { 128 }, number)?,
        nk_list: e.get("study.nk_list", vec![100, 200, 400, 800], sizes)?,
        t_final: e.get("study.t_final", 0.16, number)?,
        length: e.get("study.length", 1.0, number)?,
        schemes: e.get("study.schemes", Scheme::ALL.to_vec(), |s| list(s, scheme))?,
    };
    if let Some(&bad) = study.n_list.iter().find(|&&v| v < 3) {
        return Err(e.error(
            "study.n_list",
            format!("need at least 3 points per axis, got {bad}"),
        ));
    }
    if study.n < 3 {
        return Err(e.error("study.n", "need at least 3 points per axis"));
    }
    if study.nk_list.len() < 2 || study.nk_list.contains(&0) {
        return Err(e.error("study.nk_list", "need two or more positive step counts"));
    }
    for (key, v) in [
        ("study.dt", study.dt),
        ("study.t_final", study.t_final),
        ("study.length", study.length),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(e.error(key, "must be positive"));
        }
    }
    let verify_samples = e.get("verify.samples", 20usize, number)?;
    if verify_samples == 0 {
        return Err(e.error("verify.samples", "must be at least 1"));
    }

    Ok(RunConfig {
        mode,
        profile,
        seed,
        params,
        n,
        length,
        schedule: segments,
        psd,
        amplitude,
        sites: site_list,
        site_shape,
        output_dir,
        snapshot_times,
        record_every,
        study,
        verify_samples,
    })
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_with(text, &[])
}
