//! Flat `key = value` run configuration.
//!
//! One assignment per line; `#` starts a comment. Keys are case-insensitive
//! and `-` is accepted in place of `_`. Command-line flags are applied on top
//! of the file through the same setter, so both paths validate identically.

use std::fmt;
use std::path::PathBuf;

use crate::bases::BasisKind;
use crate::maps::{CatMapSpec, CoupledMapSpec, MapMatrix, DEFAULT_K, DEFAULT_KC, ELLIPTIC, HYPERBOLIC};
use crate::otoc::{Preset, Scenario};
use crate::relevance::{Quadrature, DEFAULT_FRACTION};
use crate::torus::{BipartiteSpace, Subsystem};

/// Default `t_max` when neither `tmax` nor a `t0` list is given.
pub const DEFAULT_T_MAX: usize = 40;
pub const DEFAULT_N: usize = 64;
/// Reflection runs default to an odd dimension so centres can be deployed on
/// the integer grid.
pub const DEFAULT_N_REFLECTION: usize = 65;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based line in the config file, if the problem came from one.
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            line: None,
            message: message.into(),
        }
    }

    fn at(line: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Emit {
    pub csv: bool,
    pub svg: bool,
    pub json: bool,
}

impl Default for Emit {
    fn default() -> Self {
        Self {
            csv: true,
            svg: false,
            json: true,
        }
    }
}

/// Explicit scenario fields. On top of a preset they override it; without a
/// preset, `map1` and `map2` define a custom scenario.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioOverrides {
    pub k: Option<f64>,
    pub kc: Option<f64>,
    pub map1: Option<MapMatrix>,
    pub map2: Option<MapMatrix>,
    pub q1: Option<f64>,
    pub p1: Option<f64>,
    pub q2: Option<f64>,
    pub p2: Option<f64>,
    pub observe: Option<Subsystem>,
}

impl ScenarioOverrides {
    fn is_custom(&self) -> bool {
        self.map1.is_some() && self.map2.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub presets: Vec<Preset>,
    pub bases: Vec<BasisKind>,
    pub n: Option<usize>,
    pub t_max: Option<usize>,
    pub t0: Vec<usize>,
    pub fraction: f64,
    pub quadrature: Quadrature,
    pub out: PathBuf,
    pub emit: Emit,
    pub threads: Option<usize>,
    /// Deploy half-integer reflection centres onto the integer grid for odd N.
    pub remap_odd: bool,
    pub overrides: ScenarioOverrides,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            presets: Vec::new(),
            bases: Vec::new(),
            n: None,
            t_max: None,
            t0: Vec::new(),
            fraction: DEFAULT_FRACTION,
            quadrature: Quadrature::Unit,
            out: PathBuf::from("out"),
            emit: Emit::default(),
            threads: None,
            remap_odd: true,
            overrides: ScenarioOverrides::default(),
        }
    }
}

fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

fn parse_list<T>(value: &str, what: &str, item: impl Fn(&str) -> Option<T>) -> Result<Vec<T>, String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| item(s).ok_or_else(|| format!("unknown {what} `{s}`")))
        .collect()
}

fn parse_num<T: std::str::FromStr>(value: &str, key: &str) -> Result<T, String> {
    value
        .trim()
        .parse()
        .map_err(|_| format!("`{key}` expects a number, got `{}`", value.trim()))
}

fn parse_bool(value: &str, key: &str) -> Result<bool, String> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(format!("`{key}` expects true/false, got `{other}`")),
    }
}

/// `hyperbolic`, `elliptic`, `H`, `E` or four integers `m11 m12 m21 m22`.
pub fn parse_map(value: &str) -> Result<MapMatrix, String> {
    match value.trim().to_ascii_lowercase().as_str() {
        "h" | "hyperbolic" => return Ok(HYPERBOLIC),
        "e" | "elliptic" => return Ok(ELLIPTIC),
        _ => {}
    }
    let ints: Vec<i64> = value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|_| format!("map `{}` is neither a name nor four integers", value.trim()))?;
    match ints[..] {
        [a, b, c, d] => {
            CatMapSpec::new([[a, b], [c, d]], 0.0).map_err(|e| e.to_string())?;
            Ok([[a, b], [c, d]])
        }
        _ => Err(format!("map `{}` needs exactly four integers", value.trim())),
    }
}

fn parse_subsystem(value: &str) -> Result<Subsystem, String> {
    match value.trim().to_ascii_lowercase().as_str() {
        "first" | "a" | "1" => Ok(Subsystem::First),
        "second" | "b" | "2" => Ok(Subsystem::Second),
        other => Err(format!("`observe` expects first/second, got `{other}`")),
    }
}

impl RunConfig {
    /// Parses a config file, starting from the defaults.
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seen: Vec<(String, usize)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::at(line_no, format!("expected `key = value`, got `{line}`")));
            };
            let key = normalize_key(key);
            let canonical = canonical_key(&key)
                .ok_or_else(|| ConfigError::at(line_no, format!("unknown key `{key}`")))?;
            if let Some((_, first)) = seen.iter().find(|(k, _)| k == canonical) {
                return Err(ConfigError::at(
                    line_no,
                    format!("`{canonical}` already set on line {first}"),
                ));
            }
            seen.push((canonical.to_string(), line_no));
            cfg.set(canonical, value).map_err(|m| ConfigError::at(line_no, m))?;
        }
        Ok(cfg)
    }

    /// Sets one key from its textual value. `key` must be canonical.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        match key {
            "preset" => {
                self.presets = parse_list(v, "preset", Preset::parse)?;
                if self.presets.is_empty() {
                    return Err("`preset` is empty".into());
                }
            }
            "basis" => {
                self.bases = parse_list(v, "basis", BasisKind::parse)?;
                if self.bases.is_empty() {
                    return Err("`basis` is empty".into());
                }
            }
            "n" => self.n = Some(parse_num(v, key)?),
            "tmax" => self.t_max = Some(parse_num(v, key)?),
            "t0" => {
                self.t0 = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| parse_num(s, key))
                    .collect::<Result<_, _>>()?
            }
            "fraction" => {
                let f: f64 = parse_num(v, key)?;
                if !(f > 0.0 && f <= 1.0) {
                    return Err(format!("`fraction` must lie in (0, 1], got {f}"));
                }
                self.fraction = f;
            }
            "quadrature" => {
                self.quadrature = Quadrature::parse(v)
                    .ok_or_else(|| format!("unknown quadrature `{v}` (unit or trapezoid)"))?
            }
            "out" => {
                if v.is_empty() {
                    return Err("`out` is empty".into());
                }
                self.out = PathBuf::from(v);
            }
            "csv" => self.emit.csv = parse_bool(v, key)?,
            "svg" => self.emit.svg = parse_bool(v, key)?,
            "json" => self.emit.json = parse_bool(v, key)?,
            "threads" => {
                let t: usize = parse_num(v, key)?;
                if t == 0 {
                    return Err("`threads` must be at least 1".into());
                }
                self.threads = Some(t);
            }
            "remap_odd" => self.remap_odd = parse_bool(v, key)?,
            "k" => self.overrides.k = Some(parse_num(v, key)?),
            "kc" => self.overrides.kc = Some(parse_num(v, key)?),
            "map1" => self.overrides.map1 = Some(parse_map(v)?),
            "map2" => self.overrides.map2 = Some(parse_map(v)?),
            "q1" => self.overrides.q1 = Some(parse_num(v, key)?),
            "p1" => self.overrides.p1 = Some(parse_num(v, key)?),
            "q2" => self.overrides.q2 = Some(parse_num(v, key)?),
            "p2" => self.overrides.p2 = Some(parse_num(v, key)?),
            "observe" => self.overrides.observe = Some(parse_subsystem(v)?),
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    pub fn t_max(&self) -> usize {
        self.t_max
            .or_else(|| self.t0.iter().copied().max())
            .unwrap_or(DEFAULT_T_MAX)
    }

    /// Hilbert-space dimension used for a given basis.
    pub fn dimension_for(&self, kind: BasisKind) -> usize {
        self.n.unwrap_or(match kind {
            BasisKind::Reflection => DEFAULT_N_REFLECTION,
            _ => DEFAULT_N,
        })
    }

    /// Cross-field checks that do not need any numerics.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.presets.is_empty() && !self.overrides.is_custom() {
            return Err(ConfigError::new(
                "no scenario: set `preset` or both `map1` and `map2`",
            ));
        }
        if self.bases.is_empty() {
            return Err(ConfigError::new("no basis: set `basis`"));
        }
        let t_max = self.t_max();
        if let Some(&t0) = self.t0.iter().find(|&&t0| t0 > t_max) {
            return Err(ConfigError::new(format!("t0 = {t0} exceeds tmax = {t_max}")));
        }
        Ok(())
    }

    /// Every (scenario, basis) combination requested, presets first in the
    /// given order, then bases.
    pub fn scenarios(&self) -> Result<Vec<Scenario>, ConfigError> {
        self.validate()?;
        let t_max = self.t_max();
        let mut out = Vec::new();
        let names: Vec<Option<Preset>> = if self.presets.is_empty() {
            vec![None]
        } else {
            self.presets.iter().copied().map(Some).collect()
        };
        for preset in names {
            for &kind in &self.bases {
                let n = self.dimension_for(kind);
                let base = match preset {
                    Some(p) => Scenario::preset(p, n, kind, t_max),
                    None => custom_scenario(n, kind, t_max),
                }
                .map_err(|e| ConfigError::new(e.to_string()))?;
                out.push(self.apply_overrides(base)?);
            }
        }
        Ok(out)
    }

    fn apply_overrides(&self, mut sc: Scenario) -> Result<Scenario, ConfigError> {
        let o = &self.overrides;
        let k1 = o.k.unwrap_or(sc.coupled.map1.k());
        let k2 = o.k.unwrap_or(sc.coupled.map2.k());
        let m1 = o.map1.unwrap_or(sc.coupled.map1.matrix());
        let m2 = o.map2.unwrap_or(sc.coupled.map2.matrix());
        let kc = o.kc.unwrap_or(sc.coupled.kc);
        let map1 = CatMapSpec::new(m1, k1).map_err(|e| ConfigError::new(e.to_string()))?;
        let map2 = CatMapSpec::new(m2, k2).map_err(|e| ConfigError::new(e.to_string()))?;
        sc.coupled = CoupledMapSpec::new(map1, map2, kc);
        let [(q1, p1), (q2, p2)] = sc.initial;
        sc.initial = [
            (o.q1.unwrap_or(q1), o.p1.unwrap_or(p1)),
            (o.q2.unwrap_or(q2), o.p2.unwrap_or(p2)),
        ];
        if let Some(obs) = o.observe {
            sc.observed = obs;
        }
        Ok(sc)
    }
}

fn custom_scenario(n: usize, kind: BasisKind, t_max: usize) -> crate::Result<Scenario> {
    Ok(Scenario {
        name: "custom".into(),
        coupled: CoupledMapSpec::new(
            CatMapSpec::hyperbolic(DEFAULT_K),
            CatMapSpec::hyperbolic(DEFAULT_K),
            DEFAULT_KC,
        ),
        space: BipartiteSpace::symmetric(n)?,
        initial: [(0.5, 0.5), (0.5, 0.5)],
        observed: Subsystem::Second,
        basis_kind: kind,
        t_max,
    })
}

/// Maps accepted spellings onto the canonical key names used by [`RunConfig::set`].
pub fn canonical_key(key: &str) -> Option<&'static str> {
    Some(match key {
        "preset" | "presets" | "scenario" => "preset",
        "basis" | "bases" => "basis",
        "n" => "n",
        "tmax" | "t_max" => "tmax",
        "t0" | "t0_list" => "t0",
        "fraction" => "fraction",
        "quadrature" => "quadrature",
        "out" | "output" => "out",
        "csv" => "csv",
        "svg" => "svg",
        "json" => "json",
        "threads" => "threads",
        "remap_odd" => "remap_odd",
        "k" => "k",
        "kc" => "kc",
        "map1" => "map1",
        "map2" => "map2",
        "q1" => "q1",
        "p1" => "p1",
        "q2" => "q2",
        "p2" => "p2",
        "observe" | "observed" => "observe",
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_file() {
        let text = "\
# HH reflections
preset = HH, EE-fixed
basis = reflection
N = 65
tmax = 40
t0 = 5, 10,20
fraction = 0.8
svg = yes
quadrature = trapezoid
";
        let cfg = RunConfig::from_text(text).unwrap();
        assert_eq!(cfg.presets, vec![Preset::HH, Preset::EeFixed]);
        assert_eq!(cfg.bases, vec![BasisKind::Reflection]);
        assert_eq!(cfg.n, Some(65));
        assert_eq!(cfg.t0, vec![5, 10, 20]);
        assert!(cfg.emit.svg && cfg.emit.csv);
        assert_eq!(cfg.quadrature, Quadrature::Trapezoid);
        assert_eq!(cfg.scenarios().unwrap().len(), 2);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = RunConfig::from_text("preset = HH\n\nbasis = chords\n").unwrap_err();
        assert_eq!(e.line, Some(3));
        let e = RunConfig::from_text("preset = HH\nwidth = 3\n").unwrap_err();
        assert_eq!(e.line, Some(2));
        assert!(e.to_string().starts_with("line 2:"));
        let e = RunConfig::from_text("n = 4\nN = 8\n").unwrap_err();
        assert_eq!(e.line, Some(2));
        let e = RunConfig::from_text("preset HH\n").unwrap_err();
        assert_eq!(e.line, Some(1));
        let e = RunConfig::from_text("fraction = 1.5").unwrap_err();
        assert_eq!(e.line, Some(1));
    }

    #[test]
    fn defaults_and_dimensions() {
        let mut cfg = RunConfig::from_text("preset = HH\nbasis = pauli, reflection\n").unwrap();
        assert_eq!(cfg.t_max(), DEFAULT_T_MAX);
        assert_eq!(cfg.dimension_for(BasisKind::Pauli), 64);
        assert_eq!(cfg.dimension_for(BasisKind::Reflection), 65);
        cfg.t0 = vec![3, 7];
        assert_eq!(cfg.t_max(), 7);
        cfg.t_max = Some(5);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn custom_maps_and_overrides() {
        let text = "map1 = 2 1 3 2\nmap2 = elliptic\nkc = 0.1\nq2 = 0.3\nobserve = first\nbasis = translation\nn = 8\n";
        let cfg = RunConfig::from_text(text).unwrap();
        let sc = &cfg.scenarios().unwrap()[0];
        assert_eq!(sc.name, "custom");
        assert_eq!(sc.coupled.map2.matrix(), ELLIPTIC);
        assert_eq!(sc.coupled.kc, 0.1);
        assert_eq!(sc.initial[1], (0.3, 0.5));
        assert_eq!(sc.observed, Subsystem::First);
        assert!(parse_map("1 1 1 1").is_err());
        assert!(RunConfig::from_text("basis = pauli\n").unwrap().scenarios().is_err());
    }
}
