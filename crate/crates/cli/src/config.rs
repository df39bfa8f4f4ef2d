//! Flat `key=value` run configuration.
//!
//! One setting per line, `#` starts a comment, keys are case-insensitive.
//! Lists are comma-separated. Horizon lengths may be written as `L/10`.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use fracbeam::assembly::FarField;
use fracbeam::fracops::{MAX_GAUSS_ORDER, MIN_GAUSS_ORDER};
use fracbeam::{BoundaryCondition, ElementKind, LoadCase, Mode, PartialHorizon};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based line, when the problem is tied to one.
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ConfigError { line: Some(line), message: message.into() }
    }

    fn general(message: impl Into<String>) -> Self {
        ConfigError { line: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Validate,
    Converge,
    Sweep,
    Eringen,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Validate => "validate",
            Command::Converge => "converge",
            Command::Sweep => "sweep",
            Command::Eringen => "eringen",
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "solve" => Ok(Command::Solve),
            "validate" => Ok(Command::Validate),
            "converge" => Ok(Command::Converge),
            "sweep" => Ok(Command::Sweep),
            "eringen" => Ok(Command::Eringen),
            other => Err(format!("unknown command '{other}'")),
        }
    }
}

/// Which load family is applied; magnitudes live in separate keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadKind {
    Udl,
    Tip,
    V1,
    V2,
    AxialUdl,
}

impl LoadKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LoadKind::Udl => "udl",
            LoadKind::Tip => "tip",
            LoadKind::V1 => "v1",
            LoadKind::V2 => "v2",
            LoadKind::AxialUdl => "axial-udl",
        }
    }
}

impl FromStr for LoadKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "udl" => Ok(LoadKind::Udl),
            "tip" => Ok(LoadKind::Tip),
            "v1" => Ok(LoadKind::V1),
            "v2" => Ok(LoadKind::V2),
            "axial-udl" | "axial" => Ok(LoadKind::AxialUdl),
            other => Err(format!("unknown load '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub mode: Mode,
    pub bc: Option<BoundaryCondition>,
    pub load: Option<LoadKind>,
    pub q0: f64,
    pub p: f64,
    pub f0: f64,
    pub length: f64,
    pub thickness: f64,
    pub width: f64,
    pub modulus: f64,
    pub alpha: Option<Vec<f64>>,
    pub lf: Option<Vec<f64>>,
    pub ne: Option<usize>,
    pub n_inf: usize,
    pub element: ElementKind,
    pub gauss_order: usize,
    pub partial_horizon: PartialHorizon,
    pub far_field: FarField,
    pub output: String,
    pub threads: usize,
    /// Write measured runtimes; off keeps outputs byte-for-byte reproducible.
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: Command::Solve,
            mode: Mode::Fractional,
            bc: None,
            load: None,
            q0: 1.0,
            p: 1.0,
            f0: 1.0,
            length: 1.0,
            thickness: 0.01,
            width: 1.0,
            modulus: 30e9,
            alpha: None,
            lf: None,
            ne: None,
            n_inf: 10,
            element: ElementKind::TwoNoded,
            gauss_order: 4,
            partial_horizon: PartialHorizon::Exact,
            far_field: FarField::Analytic,
            output: "out".to_string(),
            threads: 1,
            timing: false,
        }
    }
}

impl RunConfig {
    pub fn load_case(&self) -> Option<LoadCase> {
        self.load.map(|k| match k {
            LoadKind::Udl => LoadCase::Udl { q0: self.q0 },
            LoadKind::Tip => LoadCase::TipPoint { p: self.p },
            LoadKind::V1 => LoadCase::ManufacturedV1,
            LoadKind::V2 => LoadCase::ManufacturedV2,
            LoadKind::AxialUdl => LoadCase::AxialUdl { f0: self.f0 },
        })
    }

    /// Canonical text that parses back to the same configuration.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k}={v}");
        };
        put("command", self.command.as_str().into());
        put("mode", self.mode.as_str().into());
        if let Some(bc) = self.bc {
            put("bc", bc.as_str().into());
        }
        if let Some(load) = self.load {
            put("load", load.as_str().into());
        }
        put("q0", self.q0.to_string());
        put("p", self.p.to_string());
        put("f0", self.f0.to_string());
        put("length", self.length.to_string());
        put("thickness", self.thickness.to_string());
        put("width", self.width.to_string());
        put("modulus", self.modulus.to_string());
        let list = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        if let Some(a) = &self.alpha {
            put("alpha", list(a));
        }
        if let Some(l) = &self.lf {
            put("lf", list(l));
        }
        if let Some(ne) = self.ne {
            put("ne", ne.to_string());
        }
        put("n_inf", self.n_inf.to_string());
        put("element", self.element.as_str().into());
        put("gauss_order", self.gauss_order.to_string());
        put("partial_horizon", self.partial_horizon.as_str().into());
        put("far_field", self.far_field.as_str().into());
        put("output", self.output.clone());
        put("threads", self.threads.to_string());
        put("timing", self.timing.to_string());
        out
    }
}

const KEYS: [&str; 22] = [
    "command",
    "mode",
    "bc",
    "load",
    "q0",
    "p",
    "f0",
    "length",
    "thickness",
    "width",
    "modulus",
    "alpha",
    "lf",
    "ne",
    "n_inf",
    "element",
    "gauss_order",
    "partial_horizon",
    "far_field",
    "output",
    "threads",
    "timing",
];

fn canonical_key(key: &str) -> Option<&'static str> {
    let key = key.to_ascii_lowercase().replace('-', "_");
    let alias = match key.as_str() {
        "l" => "length",
        "h" => "thickness",
        "b" => "width",
        "e" => "modulus",
        "ninf" => "n_inf",
        "n_gp" | "ngp" => "gauss_order",
        other => other,
    };
    KEYS.iter().copied().find(|k| *k == alias)
}

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if !v.is_finite() {
        return Err(format!("'{s}' is not finite"));
    }
    Ok(v)
}

fn positive(s: &str) -> Result<f64, String> {
    let v = number(s)?;
    if v <= 0.0 {
        return Err(format!("{s} must be positive"));
    }
    Ok(v)
}

fn count(s: &str) -> Result<usize, String> {
    s.parse().map_err(|_| format!("'{s}' is not a non-negative integer"))
}

fn list(s: &str) -> Result<Vec<&str>, String> {
    let items: Vec<&str> = s.split(',').map(str::trim).collect();
    if items.iter().any(|i| i.is_empty()) {
        return Err(format!("empty entry in list '{s}'"));
    }
    Ok(items)
}

/// A horizon entry, absolute or as a fraction `L/d` of the beam length.
#[derive(Debug, Clone, Copy)]
enum Span {
    Absolute(f64),
    OfLength(f64),
}

fn span(s: &str) -> Result<Span, String> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    match compact.split_once('/') {
        Some((l, d)) if l.eq_ignore_ascii_case("l") => Ok(Span::OfLength(positive(d)?)),
        Some(_) => Err(format!("'{s}' must be a length or of the form L/d")),
        None => Ok(Span::Absolute(positive(s)?)),
    }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut seen: Vec<(&'static str, usize)> = Vec::new();
    let mut command = None;
    let mut thickness_set = false;
    let mut spans: Option<(usize, Vec<Span>)> = None;

    for (idx, raw) in text.lines().enumerate() {
        let n = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::at(n, format!("expected key=value, found '{line}'")))?;
        let (key, value) = (key.trim(), value.trim());
        let canon = canonical_key(key).ok_or_else(|| ConfigError::at(n, format!("unknown key '{key}'")))?;
        if let Some((_, first)) = seen.iter().find(|(k, _)| *k == canon) {
            return Err(ConfigError::at(n, format!("'{canon}' already set on line {first}")));
        }
        seen.push((canon, n));
        if value.is_empty() {
            return Err(ConfigError::at(n, format!("'{canon}' has no value")));
        }
        let bad = |m: String| ConfigError::at(n, format!("{canon}: {m}"));
        match canon {
            "command" => command = Some(value.parse::<Command>().map_err(bad)?),
            "mode" => cfg.mode = value.parse().map_err(|e: fracbeam::Error| bad(e.to_string()))?,
            "bc" => cfg.bc = Some(value.parse().map_err(|e: fracbeam::Error| bad(e.to_string()))?),
            "load" => cfg.load = Some(value.parse().map_err(bad)?),
            "q0" => cfg.q0 = number(value).map_err(bad)?,
            "p" => cfg.p = number(value).map_err(bad)?,
            "f0" => cfg.f0 = number(value).map_err(bad)?,
            "length" => cfg.length = positive(value).map_err(bad)?,
            "thickness" => {
                cfg.thickness = positive(value).map_err(bad)?;
                thickness_set = true;
            }
            "width" => cfg.width = positive(value).map_err(bad)?,
            "modulus" => cfg.modulus = positive(value).map_err(bad)?,
            "alpha" => {
                let mut v = Vec::new();
                for item in list(value).map_err(bad)? {
                    let a = number(item).map_err(bad)?;
                    if !(a > 0.0 && a <= 1.0) {
                        return Err(bad(format!("order {a} out of (0,1]")));
                    }
                    v.push(a);
                }
                cfg.alpha = Some(v);
            }
            "lf" => {
                let v = list(value).map_err(bad)?.into_iter().map(span).collect::<Result<_, _>>().map_err(bad)?;
                spans = Some((n, v));
            }
            "ne" => {
                let v = count(value).map_err(bad)?;
                if v < 2 {
                    return Err(bad("at least 2 elements are needed".into()));
                }
                cfg.ne = Some(v);
            }
            "n_inf" => {
                let v = count(value).map_err(bad)?;
                if v == 0 {
                    return Err(bad("must be at least 1".into()));
                }
                cfg.n_inf = v;
            }
            "element" => cfg.element = value.parse().map_err(|e: fracbeam::Error| bad(e.to_string()))?,
            "gauss_order" => {
                let v = count(value).map_err(bad)?;
                if !(MIN_GAUSS_ORDER..=MAX_GAUSS_ORDER).contains(&v) {
                    return Err(bad(format!("must lie in {MIN_GAUSS_ORDER}..={MAX_GAUSS_ORDER}")));
                }
                cfg.gauss_order = v;
            }
            "partial_horizon" => {
                cfg.partial_horizon = value.parse().map_err(|e: fracbeam::Error| bad(e.to_string()))?
            }
            "far_field" => cfg.far_field = value.parse().map_err(|e: fracbeam::Error| bad(e.to_string()))?,
            "output" => cfg.output = value.to_string(),
            "threads" => {
                let v = count(value).map_err(bad)?;
                if v == 0 {
                    return Err(bad("must be at least 1".into()));
                }
                cfg.threads = v;
            }
            "timing" => {
                cfg.timing = match value.to_ascii_lowercase().as_str() {
                    "true" | "yes" | "on" | "1" => true,
                    "false" | "no" | "off" | "0" => false,
                    other => return Err(bad(format!("'{other}' is not a boolean"))),
                }
            }
            _ => unreachable!("every canonical key is handled"),
        }
    }

    cfg.command = command.ok_or_else(|| ConfigError::general("missing key 'command'"))?;
    if !thickness_set {
        cfg.thickness = cfg.length / 100.0;
    }
    if let Some((n, spans)) = spans {
        let mut v = Vec::with_capacity(spans.len());
        for s in spans {
            let lf = match s {
                Span::Absolute(x) => x,
                Span::OfLength(d) => cfg.length / d,
            };
            if lf > cfg.length {
                return Err(ConfigError::at(n, format!("lf: {lf} exceeds the beam length {}", cfg.length)));
            }
            v.push(lf);
        }
        cfg.lf = Some(v);
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn require<T>(value: &Option<T>, key: &str, cmd: Command) -> Result<(), ConfigError> {
    match value {
        Some(_) => Ok(()),
        None => Err(ConfigError::general(format!("missing key '{key}' required by command '{}'", cmd.as_str()))),
    }
}

fn single(values: &Option<Vec<f64>>, key: &str) -> Result<(), ConfigError> {
    match values {
        Some(v) if v.len() != 1 => Err(ConfigError::general(format!("'{key}' takes a single value for command 'solve'"))),
        _ => Ok(()),
    }
}

fn fixed_case(
    cfg: &RunConfig,
    bc: BoundaryCondition,
    loads: &[LoadKind],
) -> Result<(), ConfigError> {
    if let Some(b) = cfg.bc {
        if b != bc {
            return Err(ConfigError::general(format!(
                "command '{}' runs a {} beam, not {}",
                cfg.command.as_str(),
                bc.as_str(),
                b.as_str()
            )));
        }
    }
    if let Some(l) = cfg.load {
        if !loads.contains(&l) {
            return Err(ConfigError::general(format!(
                "command '{}' does not accept load '{}'",
                cfg.command.as_str(),
                l.as_str()
            )));
        }
    }
    Ok(())
}

fn validate(cfg: &RunConfig) -> Result<(), ConfigError> {
    let cmd = cfg.command;
    if cfg.ne.is_some() && !matches!(cmd, Command::Solve | Command::Eringen) {
        return Err(ConfigError::general(format!(
            "'ne' applies to 'solve' and 'eringen'; command '{}' sizes meshes from 'n_inf'",
            cmd.as_str()
        )));
    }
    match cmd {
        Command::Solve => {
            require(&cfg.bc, "bc", cmd)?;
            require(&cfg.load, "load", cmd)?;
            require(&cfg.alpha, "alpha", cmd)?;
            require(&cfg.lf, "lf", cmd)?;
            single(&cfg.alpha, "alpha")?;
            single(&cfg.lf, "lf")?;
        }
        Command::Validate => {
            require(&cfg.load, "load", cmd)?;
            match cfg.load {
                Some(LoadKind::V1) => fixed_case(cfg, BoundaryCondition::ClampedClamped, &[LoadKind::V1])?,
                Some(LoadKind::V2) => fixed_case(cfg, BoundaryCondition::SimplySupported, &[LoadKind::V2])?,
                _ => return Err(ConfigError::general("command 'validate' needs load=v1 or load=v2")),
            }
        }
        Command::Converge => {
            require(&cfg.lf, "lf", cmd)?;
            fixed_case(cfg, BoundaryCondition::ClampedClamped, &[LoadKind::Udl])?;
        }
        Command::Sweep => {
            require(&cfg.bc, "bc", cmd)?;
            require(&cfg.load, "load", cmd)?;
            require(&cfg.alpha, "alpha", cmd)?;
            require(&cfg.lf, "lf", cmd)?;
        }
        Command::Eringen => fixed_case(cfg, BoundaryCondition::Cantilever, &[LoadKind::Udl])?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "command=solve\nbc=clamped\nload=udl\nq0=1\nalpha=0.8\nlf=0.1";

    #[test]
    fn minimal_solve_uses_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.command, Command::Solve);
        assert_eq!(c.length, 1.0);
        assert_eq!(c.thickness, 0.01);
        assert_eq!(c.modulus, 30e9);
        assert_eq!(c.gauss_order, 4);
        assert_eq!(c.n_inf, 10);
        assert_eq!(c.alpha, Some(vec![0.8]));
    }

    #[test]
    fn rejects_bad_order_and_missing_keys() {
        let e = parse_config("command=solve\nalpha=1.5").unwrap_err();
        assert_eq!(e.line, Some(2));
        assert!(e.message.contains("out of (0,1]"), "{e}");
        let e = parse_config("command=converge").unwrap_err();
        assert!(e.message.contains("missing key 'lf'"), "{e}");
        let e = parse_config("bc=clamped").unwrap_err();
        assert!(e.message.contains("command"), "{e}");
    }

    #[test]
    fn unknown_and_malformed_lines_name_the_problem() {
        let e = parse_config("command=solve\n\n  # note\nbogus=3").unwrap_err();
        assert_eq!(e.line, Some(4));
        assert!(e.message.contains("'bogus'"));
        let e = parse_config("command=solve\njust text").unwrap_err();
        assert_eq!(e.line, Some(2));
        let e = parse_config("command=solve\nalpha=0.5\nALPHA=0.6").unwrap_err();
        assert!(e.message.contains("already set on line 2"), "{e}");
    }

    #[test]
    fn keys_are_case_insensitive_and_comments_stripped() {
        let c = parse_config("COMMAND = Sweep # trailing\nBC=ss\nLoad=UDL\nAlpha=1,0.9\nLF=L/10, L/5\nL=2").unwrap();
        assert_eq!(c.command, Command::Sweep);
        assert_eq!(c.lf, Some(vec![0.2, 0.4]));
        assert_eq!(c.thickness, 0.02);
    }

    #[test]
    fn fixed_cases_reject_conflicts() {
        assert!(parse_config("command=validate\nload=v1\nbc=ss").is_err());
        assert!(parse_config("command=validate\nload=udl").is_err());
        assert!(parse_config("command=eringen\nbc=clamped").is_err());
        assert!(parse_config("command=sweep\nbc=ss\nload=udl\nalpha=1\nlf=0.1\nne=40").is_err());
        assert!(parse_config("command=solve\nbc=ss\nload=udl\nalpha=1,0.9\nlf=0.1").is_err());
    }

    #[test]
    fn render_round_trips() {
        let texts = [
            MINIMAL.to_string(),
            "command=sweep\nbc=cantilever\nload=tip\np=2.5\nalpha=1,0.9,0.8\nlf=L/20,L/10\nelement=three-noded\nthreads=3\ntiming=on".to_string(),
            "command=converge\nlf=0.2,0.1,0.05\npartial_horizon=rounded\nfar_field=gauss\ngauss_order=6".to_string(),
            "command=eringen\nne=300\noutput=results/eringen".to_string(),
        ];
        for t in texts {
            let c = parse_config(&t).unwrap();
            assert_eq!(parse_config(&c.render()).unwrap(), c, "{}", c.render());
        }
    }
}
