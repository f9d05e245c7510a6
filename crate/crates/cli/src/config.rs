//! Run configuration: a line-oriented `key = value` format with `[model]`,
//! `[run]` and `[tolerances]` sections and `#` comments.
//!
//! The full schema is in `docs/config.md`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::path::PathBuf;

use bandspec_core::asymptotics::{FitKind, DEFAULT_RATE_SLACK};
use bandspec_core::model::{PowerLikeParams, SpecialFamilyKind, SpecialFamilyParams, TauPolicy};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("[{section}] unknown key `{key}` (line {line})")]
    UnknownKey { section: String, key: String, line: usize },
    #[error("[{section}] missing required key `{key}`")]
    MissingKey { section: &'static str, key: &'static str },
    #[error("[{section}] key `{key}`: {msg}")]
    BadValue { section: String, key: String, msg: String },
}

type Res<T> = std::result::Result<T, ConfigError>;

const SECTIONS: [&str; 3] = ["model", "run", "tolerances"];

/// Parsed but unvalidated sections.
#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    sections: BTreeMap<String, BTreeMap<String, (String, usize)>>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Res<Self> {
        let mut raw = RawConfig::default();
        let mut current: Option<String> = None;
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                    line: line_no,
                    msg: format!("unterminated section header `{line}`"),
                })?;
                let name = name.trim();
                if !SECTIONS.contains(&name) {
                    return Err(ConfigError::Syntax {
                        line: line_no,
                        msg: format!("unknown section [{name}]; expected one of [model], [run], [tolerances]"),
                    });
                }
                if raw.sections.contains_key(name) {
                    return Err(ConfigError::Syntax {
                        line: line_no,
                        msg: format!("section [{name}] appears twice"),
                    });
                }
                raw.sections.insert(name.to_string(), BTreeMap::new());
                current = Some(name.to_string());
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: line_no,
                    msg: format!("expected `key = value`, got `{line}`"),
                });
            };
            let Some(section) = &current else {
                return Err(ConfigError::Syntax {
                    line: line_no,
                    msg: "key outside of any section".into(),
                });
            };
            let key = key.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(ConfigError::Syntax {
                    line: line_no,
                    msg: format!("invalid key `{key}`"),
                });
            }
            let map = raw.sections.get_mut(section).expect("section inserted");
            if map.insert(key.to_string(), (value.trim().to_string(), line_no)).is_some() {
                return Err(ConfigError::Syntax {
                    line: line_no,
                    msg: format!("key `{key}` repeated in [{section}]"),
                });
            }
        }
        Ok(raw)
    }

    /// Sorted `section.key = value` lines, independent of layout and comments.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (section, keys) in &self.sections {
            for (k, (v, _)) in keys {
                let _ = writeln!(out, "{section}.{k}={v}");
            }
        }
        out
    }
}

/// Reads keys out of one section and remembers which were used.
struct Section<'a> {
    name: &'static str,
    keys: BTreeMap<&'a str, (&'a str, usize)>,
}

impl<'a> Section<'a> {
    fn new(raw: &'a RawConfig, name: &'static str) -> Self {
        let keys = raw
            .sections
            .get(name)
            .map(|m| m.iter().map(|(k, (v, l))| (k.as_str(), (v.as_str(), *l))).collect())
            .unwrap_or_default();
        Self { name, keys }
    }

    fn take(&mut self, key: &str) -> Option<&'a str> {
        self.keys.remove(key).map(|(v, _)| v)
    }

    fn require(&mut self, key: &'static str) -> Res<&'a str> {
        self.take(key).ok_or(ConfigError::MissingKey { section: self.name, key })
    }

    fn bad(&self, key: &str, msg: impl Into<String>) -> ConfigError {
        ConfigError::BadValue {
            section: self.name.to_string(),
            key: key.to_string(),
            msg: msg.into(),
        }
    }

    fn number(&mut self, key: &'static str) -> Res<Option<f64>> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => parse_f64(v).map(Some).map_err(|m| self.bad(key, m)),
        }
    }

    fn number_or(&mut self, key: &'static str, default: f64) -> Res<f64> {
        Ok(self.number(key)?.unwrap_or(default))
    }

    fn required_number(&mut self, key: &'static str) -> Res<f64> {
        let v = self.require(key)?;
        parse_f64(v).map_err(|m| self.bad(key, m))
    }

    fn count(&mut self, key: &'static str) -> Res<Option<usize>> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<usize>()
                .map(Some)
                .map_err(|_| self.bad(key, format!("expected a nonnegative integer, got `{v}`"))),
        }
    }

    fn list(&mut self, key: &'static str) -> Res<Option<Vec<f64>>> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => parse_list(v).map(Some).map_err(|m| self.bad(key, m)),
        }
    }

    fn required_list(&mut self, key: &'static str) -> Res<Vec<f64>> {
        let v = self.require(key)?;
        parse_list(v).map_err(|m| self.bad(key, m))
    }

    /// Fails on the first key nobody asked for.
    fn finish(self, context: &str) -> Res<()> {
        match self.keys.into_iter().next() {
            None => Ok(()),
            Some((key, (_, line))) => Err(ConfigError::UnknownKey {
                section: if context.is_empty() {
                    self.name.to_string()
                } else {
                    format!("{}, {context}", self.name)
                },
                key: key.to_string(),
                line,
            }),
        }
    }
}

fn parse_f64(v: &str) -> std::result::Result<f64, String> {
    let x: f64 = v.parse().map_err(|_| format!("expected a number, got `{v}`"))?;
    if !x.is_finite() {
        return Err(format!("`{v}` is not finite"));
    }
    Ok(x)
}

fn parse_list(v: &str) -> std::result::Result<Vec<f64>, String> {
    let items: Vec<&str> = v.split(',').map(str::trim).collect();
    if items.iter().any(|s| s.is_empty()) {
        return Err(format!("empty item in list `{v}`"));
    }
    items.into_iter().map(parse_f64).collect()
}

/// `c^e` terms such as `1.0^0.5, 0.5^0.5`, meaning `c n^e`.
fn parse_power_terms(v: &str) -> std::result::Result<Vec<(f64, f64)>, String> {
    v.split(',')
        .map(|item| {
            let (c, e) = item
                .trim()
                .split_once('^')
                .ok_or_else(|| format!("expected `coefficient^exponent`, got `{}`", item.trim()))?;
            Ok((parse_f64(c.trim())?, parse_f64(e.trim())?))
        })
        .collect()
}

#[derive(Clone, Debug)]
pub enum ModelSpec {
    /// One of `M1`, `M2`, `M3`, `stretched`.
    Preset(String),
    PowerLike(PowerLikeParams),
    /// Special growth family with off-diagonal `off_scale * n^-kappa (ln n)^-kappa' omega(n)`.
    Special { params: SpecialFamilyParams, off_scale: f64 },
    /// Explicit entries: `d` and `a1, a2, ...`.
    Table { d: Vec<f64>, a: Vec<Vec<f64>> },
    /// Tridiagonal `J` from explicit entries.
    JacobiTable { sub: Vec<f64>, diag: Vec<f64>, sup: Vec<f64> },
    /// Tridiagonal `J` with entries uniform in `[low, high)`, drawn from the run seed.
    JacobiRandom { low: f64, high: f64 },
}

impl ModelSpec {
    pub fn is_jacobi(&self) -> bool {
        matches!(self, ModelSpec::JacobiTable { .. } | ModelSpec::JacobiRandom { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NRange {
    Span(RangeInclusive<usize>),
    List(Vec<usize>),
}

impl NRange {
    pub fn values(&self) -> Vec<usize> {
        match self {
            NRange::Span(r) => r.clone().collect(),
            NRange::List(v) => v.clone(),
        }
    }

    pub fn min(&self) -> usize {
        match self {
            NRange::Span(r) => *r.start(),
            NRange::List(v) => v[0],
        }
    }

    pub fn max(&self) -> usize {
        match self {
            NRange::Span(r) => *r.end(),
            NRange::List(v) => *v.last().expect("nonempty"),
        }
    }

    /// The covering span.
    pub fn span(&self) -> RangeInclusive<usize> {
        self.min()..=self.max()
    }
}

fn parse_n_range(v: &str) -> std::result::Result<NRange, String> {
    if let Some((a, b)) = v.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| format!("bad range start in `{v}`"))?;
        let b: usize = b.trim().parse().map_err(|_| format!("bad range end in `{v}`"))?;
        if a < 1 || a > b {
            return Err(format!("range `{v}` must satisfy 1 <= start <= end"));
        }
        return Ok(NRange::Span(a..=b));
    }
    let mut values = vec![];
    for item in v.split(',') {
        let n: usize = item
            .trim()
            .parse()
            .map_err(|_| format!("expected `a..b` or a comma list of indices, got `{v}`"))?;
        if n < 1 {
            return Err("indices start at 1".into());
        }
        values.push(n);
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(format!("index list `{v}` must be strictly increasing"));
    }
    Ok(NRange::List(values))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TauChoice {
    Quarter,
    Stretched { epsilon0: f64, theta: f64 },
}

impl TauChoice {
    pub fn policy(self) -> TauPolicy {
        match self {
            TauChoice::Quarter => TauPolicy::Quarter,
            TauChoice::Stretched { epsilon0, theta } => TauPolicy::Stretched { epsilon0, theta },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    pub rate_slack: f64,
    pub lemma42_rel: f64,
    pub spectrum_rel: f64,
    pub gram_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rate_slack: DEFAULT_RATE_SLACK,
            lemma42_rel: 1e-10,
            spectrum_rel: 1e-9,
            gram_rel: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub command: Option<String>,
    pub n_range: Option<NRange>,
    /// Truncation order `N`.
    pub order: Option<usize>,
    pub tau: TauChoice,
    pub chi: String,
    pub horizon: Option<usize>,
    pub tail_check: Option<usize>,
    pub fit: FitKind,
    pub seed: u64,
    pub output: Option<PathBuf>,
    /// Indices for the conjugation lab inside `report`.
    pub lab_n: Vec<usize>,
    pub tolerances: Tolerances,
    /// Hex SHA-256 of the canonical form.
    pub hash: String,
}

const SPECIAL_KINDS: [(&str, SpecialFamilyKind); 3] = [
    ("log_power", SpecialFamilyKind::LogPower),
    ("pure_log", SpecialFamilyKind::PureLog),
    ("stretched_exp", SpecialFamilyKind::StretchedExp),
];

const TABLE_BANDS: [&str; 9] = ["a1", "a2", "a3", "a4", "a5", "a6", "a7", "a8", "a9"];

fn parse_model(s: &mut Section) -> Res<ModelSpec> {
    let kind = s.require("kind")?;
    let spec = match kind {
        "preset" => {
            let name = s.require("preset")?;
            if bandspec_core::presets::by_name(name).is_none() {
                return Err(s.bad("preset", format!("unknown preset `{name}`; expected M1, M2, M3 or stretched")));
            }
            ModelSpec::Preset(name.to_string())
        }
        "power_like" => {
            let c0 = s.required_number("c0")?;
            let delta0 = s.required_number("delta0")?;
            let c = s.number_or("c", 0.0)?;
            let off = s.require("off")?;
            let off = parse_power_terms(off).map_err(|m| s.bad("off", m))?;
            ModelSpec::PowerLike(PowerLikeParams::new(c0, delta0, c, off))
        }
        k if SPECIAL_KINDS.iter().any(|(name, _)| *name == k) => {
            let kind = SPECIAL_KINDS.iter().find(|(name, _)| *name == k).expect("matched").1;
            let c0 = s.required_number("c0")?;
            let kappa = s.required_number("kappa")?;
            let (delta0, delta0_prime, c, theta) = match kind {
                SpecialFamilyKind::LogPower => (s.required_number("delta0")?, s.number_or("delta0_prime", 0.0)?, 0.0, 0.0),
                SpecialFamilyKind::PureLog => (0.0, s.required_number("delta0_prime")?, 0.0, 0.0),
                SpecialFamilyKind::StretchedExp => (
                    s.number_or("delta0", 0.0)?,
                    0.0,
                    s.required_number("c")?,
                    s.required_number("theta")?,
                ),
            };
            let kappa_prime = if kind == SpecialFamilyKind::StretchedExp { 0.0 } else { s.number_or("kappa_prime", 0.0)? };
            let epsilon0 = if kind == SpecialFamilyKind::StretchedExp { s.number_or("epsilon0", 0.5)? } else { 0.5 };
            let off_scale = s.number_or("off_scale", 0.01)?;
            ModelSpec::Special {
                params: SpecialFamilyParams {
                    kind,
                    c0,
                    delta0,
                    delta0_prime,
                    c,
                    kappa,
                    kappa_prime,
                    theta,
                    epsilon0,
                },
                off_scale,
            }
        }
        "table" => {
            let d = s.required_list("d")?;
            let mut a = vec![];
            for key in TABLE_BANDS {
                match s.list(key)? {
                    Some(v) => a.push(v),
                    None => break,
                }
            }
            if a.is_empty() {
                return Err(ConfigError::MissingKey { section: "model", key: "a1" });
            }
            ModelSpec::Table { d, a }
        }
        "jacobi_table" => ModelSpec::JacobiTable {
            sub: s.required_list("sub")?,
            diag: s.required_list("diag")?,
            sup: s.required_list("sup")?,
        },
        "jacobi_random" => {
            let low = s.number_or("low", -5.0)?;
            let high = s.number_or("high", 5.0)?;
            if !(low < high) {
                return Err(s.bad("high", format!("need low < high, got [{low}, {high})")));
            }
            ModelSpec::JacobiRandom { low, high }
        }
        other => {
            return Err(s.bad(
                "kind",
                format!(
                    "unknown model kind `{other}`; expected preset, power_like, log_power, pure_log, \
                     stretched_exp, table, jacobi_table or jacobi_random"
                ),
            ))
        }
    };
    Ok(spec)
}

impl RunConfig {
    pub fn parse(text: &str) -> Res<Self> {
        Self::from_raw(&RawConfig::parse(text)?)
    }

    pub fn from_raw(raw: &RawConfig) -> Res<Self> {
        let mut model_s = Section::new(raw, "model");
        let model = parse_model(&mut model_s)?;
        let kind = match &model {
            ModelSpec::Preset(_) => "preset",
            ModelSpec::PowerLike(_) => "power_like",
            ModelSpec::Special { params, .. } => params.kind.name(),
            ModelSpec::Table { .. } => "table",
            ModelSpec::JacobiTable { .. } => "jacobi_table",
            ModelSpec::JacobiRandom { .. } => "jacobi_random",
        };
        model_s.finish(&format!("kind = {kind}"))?;

        let mut run = Section::new(raw, "run");
        let command = run.take("command").map(str::to_string);
        let n_range = match run.take("n_range") {
            None => None,
            Some(v) => Some(parse_n_range(v).map_err(|m| run.bad("n_range", m))?),
        };
        let order = run.count("N")?;
        let tau = match run.take("tau").unwrap_or("quarter") {
            "quarter" => TauChoice::Quarter,
            "stretched" => match &model {
                ModelSpec::Special { params, .. } if params.kind == SpecialFamilyKind::StretchedExp => {
                    TauChoice::Stretched {
                        epsilon0: params.epsilon0,
                        theta: params.theta,
                    }
                }
                ModelSpec::Preset(p) if p == "stretched" => {
                    let p = bandspec_core::presets::stretched_params();
                    TauChoice::Stretched {
                        epsilon0: p.epsilon0,
                        theta: p.theta,
                    }
                }
                _ => return Err(run.bad("tau", "`stretched` needs a stretched_exp model")),
            },
            other => return Err(run.bad("tau", format!("expected quarter or stretched, got `{other}`"))),
        };
        let chi = run.take("chi").unwrap_or("smoothstep").to_string();
        if chi != "smoothstep" {
            return Err(run.bad("chi", format!("only `smoothstep` is available, got `{chi}`")));
        }
        let horizon = run.count("horizon")?;
        let tail_check = run.count("tail_check")?;
        let fit = match run.take("fit") {
            None => FitKind::PurePower,
            Some(v) => FitKind::parse(v).ok_or_else(|| run.bad("fit", format!("expected pure_power or power_with_log, got `{v}`")))?,
        };
        let seed = match run.take("seed") {
            None => 0,
            Some(v) => v.parse().map_err(|_| run.bad("seed", format!("expected an unsigned integer, got `{v}`")))?,
        };
        let output = run.take("output").map(PathBuf::from);
        let lab_n = match run.take("lab_n") {
            None => vec![],
            Some(v) => match parse_n_range(v).map_err(|m| run.bad("lab_n", m))? {
                NRange::List(l) => l,
                NRange::Span(_) => return Err(run.bad("lab_n", "expected a comma list of indices")),
            },
        };
        run.finish("")?;

        let mut tol = Section::new(raw, "tolerances");
        let d = Tolerances::default();
        let tolerances = Tolerances {
            rate_slack: tol.number_or("rate_slack", d.rate_slack)?,
            lemma42_rel: tol.number_or("lemma42_rel", d.lemma42_rel)?,
            spectrum_rel: tol.number_or("spectrum_rel", d.spectrum_rel)?,
            gram_rel: tol.number_or("gram_rel", d.gram_rel)?,
        };
        for (key, v) in [
            ("rate_slack", tolerances.rate_slack),
            ("lemma42_rel", tolerances.lemma42_rel),
            ("spectrum_rel", tolerances.spectrum_rel),
            ("gram_rel", tolerances.gram_rel),
        ] {
            if v < 0.0 {
                return Err(tol.bad(key, "must be nonnegative"));
            }
        }
        tol.finish("")?;

        let hash = hex::encode(Sha256::digest(raw.canonical().as_bytes()));
        Ok(RunConfig {
            model,
            command,
            n_range,
            order,
            tau,
            chi,
            horizon,
            tail_check,
            fit,
            seed,
            output,
            lab_n,
            tolerances,
            hash,
        })
    }

    pub fn require_n_range(&self) -> Res<&NRange> {
        self.n_range.as_ref().ok_or(ConfigError::MissingKey { section: "run", key: "n_range" })
    }

    pub fn require_order(&self) -> Res<usize> {
        self.order.ok_or(ConfigError::MissingKey { section: "run", key: "N" })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const M1: &str = "
        # the first acceptance model
        [model]
        kind = preset
        preset = M1

        [run]
        n_range = 1..50   # inclusive
        N = 200
    ";

    #[test]
    fn parses_preset() {
        let c = RunConfig::parse(M1).unwrap();
        assert!(matches!(c.model, ModelSpec::Preset(ref p) if p == "M1"));
        assert_eq!(c.n_range, Some(NRange::Span(1..=50)));
        assert_eq!(c.order, Some(200));
        assert_eq!(c.tau, TauChoice::Quarter);
        assert_eq!(c.tolerances, Tolerances::default());
    }

    #[test]
    fn hash_ignores_layout_and_comments() {
        let a = RunConfig::parse(M1).unwrap();
        let b = RunConfig::parse("[run]\nN=200\nn_range=1..50\n[model]\npreset=M1\nkind=preset\n").unwrap();
        assert_eq!(a.hash, b.hash);
        let c = RunConfig::parse(&M1.replace("200", "201")).unwrap();
        assert_ne!(a.hash, c.hash);
    }

    #[test]
    fn unknown_and_missing_keys() {
        let e = RunConfig::parse(&M1.replace("N = 200", "N = 200\nsize = 3")).unwrap_err();
        assert!(matches!(e, ConfigError::UnknownKey { ref key, .. } if key == "size"), "{e}");

        let e = RunConfig::parse("[model]\nkind = power_like\nc0 = 1\noff = 1^0.5\n").unwrap_err();
        assert_eq!(e, ConfigError::MissingKey { section: "model", key: "delta0" });
        assert!(e.to_string().contains("delta0"));

        // a key valid for another kind is still unknown here
        let e = RunConfig::parse("[model]\nkind = preset\npreset = M2\ntheta = 0.5\n").unwrap_err();
        assert!(e.to_string().contains("theta") && e.to_string().contains("kind = preset"), "{e}");
    }

    #[test]
    fn syntax_errors() {
        for (text, needle) in [
            ("kind = preset", "outside"),
            ("[model\n", "unterminated"),
            ("[models]\n", "unknown section"),
            ("[model]\nkind preset\n", "key = value"),
            ("[model]\nkind = a\nkind = b\n", "repeated"),
        ] {
            let e = RawConfig::parse(text).unwrap_err();
            assert!(e.to_string().contains(needle), "{text:?}: {e}");
        }
    }

    #[test]
    fn power_like_and_lists() {
        let c = RunConfig::parse(
            "[model]\nkind = power_like\nc0 = 1\ndelta0 = 1.5\noff = 0.5^0.5, 0.5^0.5\n[run]\nn_range = 40, 100, 200\n",
        )
        .unwrap();
        let ModelSpec::PowerLike(p) = c.model else { panic!() };
        assert_eq!(p.m(), 2);
        assert_eq!(c.n_range.unwrap().values(), vec![40, 100, 200]);

        let e = RunConfig::parse("[model]\nkind = preset\npreset = M1\n[run]\nn_range = 5, 3\n").unwrap_err();
        assert!(e.to_string().contains("increasing"));
    }

    #[test]
    fn stretched_tau_needs_stretched_model() {
        let e = RunConfig::parse("[model]\nkind = preset\npreset = M1\n[run]\ntau = stretched\n").unwrap_err();
        assert!(e.to_string().contains("stretched_exp"));
        let c = RunConfig::parse("[model]\nkind = preset\npreset = stretched\n[run]\ntau = stretched\n").unwrap();
        assert!(matches!(c.tau, TauChoice::Stretched { .. }));
    }
}
