//! Run configuration: an INI-style file with `[section]` headers and
//! `key = value` lines, overridable from the command line.

use std::path::{Path, PathBuf};

use extrinsic_core::immersion::{catalog_surface, Expression, Interval, ParamDomain, SurfaceSpec};
use extrinsic_core::identities::Spacing;
use extrinsic_core::sublevel::BasePointPolicy;
use extrinsic_core::AmbientVec;
use ini::Ini;

pub const DEFAULT_LEVELS: usize = 24;
pub const DEFAULT_IDENTITY_TOL: f64 = 2e-2;
pub const DEFAULT_FIT_GATE: f64 = 1e-2;
pub const DEFAULT_RESOLUTION: usize = 256;
/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "EXTRINSIC_THREADS";

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Clone, Debug, PartialEq)]
pub struct UserSurface {
    pub components: Vec<String>,
    pub u_range: (f64, f64),
    pub v_range: (f64, f64),
    pub periodic_u: bool,
    pub periodic_v: bool,
    pub collapsed_v: (bool, bool),
    pub chi: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Surface {
        name: String,
        params: Vec<(String, f64)>,
        user: Option<UserSurface>,
    },
    Mesh(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub source: Option<Source>,
    pub x0: Option<Vec<f64>>,
    pub resolution: [usize; 2],
    pub policy: BasePointPolicy,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub levels: usize,
    pub spacing: Spacing,
    pub identity_tol: f64,
    pub monotonicity_slack: f64,
    pub fit_gate: f64,
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub threads: Option<usize>,
    /// Mesh runs: Dijkstra source vertex (0-based), default nearest to `x0`.
    pub source_vertex: Option<usize>,
    /// Mesh runs from a surface: cells per direction.
    pub tessellation: [usize; 2],
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            source: None,
            x0: None,
            resolution: [DEFAULT_RESOLUTION; 2],
            policy: BasePointPolicy::AutoOffset,
            t_min: None,
            t_max: None,
            levels: DEFAULT_LEVELS,
            spacing: Spacing::Log,
            identity_tol: DEFAULT_IDENTITY_TOL,
            monotonicity_slack: extrinsic_core::identities::MONOTONICITY_SLACK,
            fit_gate: DEFAULT_FIT_GATE,
            csv: None,
            json: None,
            threads: None,
            source_vertex: None,
            tessellation: [256, 64],
        }
    }
}

/// A number, or a constant expression such as `2*pi`.
pub fn parse_number(s: &str) -> Result<f64, ConfigError> {
    let s = s.trim();
    if let Ok(x) = s.parse::<f64>() {
        return Ok(x);
    }
    Expression::parse(s, &[])
        .map(|e| e.eval(&[]))
        .map_err(|e| bad(format!("`{s}` is not a number: {e}")))
}

pub fn parse_point(s: &str) -> Result<Vec<f64>, ConfigError> {
    s.split(',').map(parse_number).collect()
}

/// `N` or `NxM`.
pub fn parse_resolution(s: &str) -> Result<[usize; 2], ConfigError> {
    let parse = |p: &str| {
        p.trim()
            .parse::<usize>()
            .map_err(|_| bad(format!("bad grid resolution `{s}`")))
    };
    match s.split_once(['x', 'X']) {
        Some((a, b)) => Ok([parse(a)?, parse(b)?]),
        None => {
            let n = parse(s)?;
            Ok([n, n])
        }
    }
}

pub fn parse_bool(s: &str) -> Result<bool, ConfigError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(bad(format!("`{s}` is not a boolean"))),
    }
}

pub fn parse_spacing(s: &str) -> Result<Spacing, ConfigError> {
    match s.trim() {
        "log" => Ok(Spacing::Log),
        "linear" => Ok(Spacing::Linear),
        _ => Err(bad(format!("spacing must be `log` or `linear`, got `{s}`"))),
    }
}

pub fn parse_policy(s: &str) -> Result<BasePointPolicy, ConfigError> {
    match s.trim() {
        "auto_offset" => Ok(BasePointPolicy::AutoOffset),
        "on_surface" => Ok(BasePointPolicy::OnSurface),
        _ => Err(bad(format!("policy must be `auto_offset` or `on_surface`, got `{s}`"))),
    }
}

const SURFACE_KEYS: [&str; 9] = [
    "name",
    "u_min",
    "u_max",
    "v_min",
    "v_max",
    "periodic_u",
    "periodic_v",
    "collapsed_v",
    "chi",
];

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        RunConfig::from_ini_str(&text)
    }

    pub fn from_ini_str(text: &str) -> Result<RunConfig, ConfigError> {
        let ini = Ini::load_from_str(text).map_err(|e| bad(format!("config: {e}")))?;
        let mut cfg = RunConfig::default();
        for (sec, props) in ini.iter() {
            let sec = sec.unwrap_or("");
            match sec {
                "surface" => {
                    let name = props.get("name").ok_or_else(|| bad("[surface] needs `name`"))?;
                    let mut comps: Vec<(usize, String)> = Vec::new();
                    let mut params = Vec::new();
                    for (k, v) in props.iter() {
                        if let Some(n) = k.strip_prefix('x').and_then(|n| n.parse::<usize>().ok()) {
                            comps.push((n, v.to_string()));
                        } else if !SURFACE_KEYS.contains(&k) {
                            params.push((k.to_string(), parse_number(v)?));
                        }
                    }
                    comps.sort();
                    let user = if comps.is_empty() {
                        None
                    } else {
                        if comps.iter().enumerate().any(|(i, (n, _))| *n != i + 1) {
                            return Err(bad("user components must be x1, x2, ... without gaps"));
                        }
                        let num = |k: &str| -> Result<f64, ConfigError> {
                            parse_number(props.get(k).ok_or_else(|| bad(format!("[surface] needs `{k}`")))?)
                        };
                        let flag = |k: &str| props.get(k).map_or(Ok(false), parse_bool);
                        let collapsed = match props.get("collapsed_v").map(str::trim) {
                            None | Some("none") => (false, false),
                            Some("min") => (true, false),
                            Some("max") => (false, true),
                            Some("both") => (true, true),
                            Some(o) => return Err(bad(format!("collapsed_v: `{o}` is not none|min|max|both"))),
                        };
                        Some(UserSurface {
                            components: comps.into_iter().map(|(_, c)| c).collect(),
                            u_range: (num("u_min")?, num("u_max")?),
                            v_range: (num("v_min")?, num("v_max")?),
                            periodic_u: flag("periodic_u")?,
                            periodic_v: flag("periodic_v")?,
                            collapsed_v: collapsed,
                            chi: props
                                .get("chi")
                                .ok_or_else(|| bad("user surfaces need `chi`"))?
                                .trim()
                                .parse()
                                .map_err(|_| bad("chi must be an integer"))?,
                        })
                    };
                    cfg.source = Some(Source::Surface {
                        name: name.trim().to_string(),
                        params,
                        user,
                    });
                }
                "mesh" => {
                    for (k, v) in props.iter() {
                        match k {
                            "path" => cfg.source = Some(Source::Mesh(PathBuf::from(v.trim()))),
                            "source_vertex" => {
                                cfg.source_vertex =
                                    Some(v.trim().parse().map_err(|_| bad("source_vertex must be an index"))?)
                            }
                            "tessellation" => cfg.tessellation = parse_resolution(v)?,
                            _ => return Err(bad(format!("unknown key `{k}` in [mesh]"))),
                        }
                    }
                }
                "grid" => {
                    for (k, v) in props.iter() {
                        match k {
                            "resolution" => cfg.resolution = parse_resolution(v)?,
                            "x0" => cfg.x0 = Some(parse_point(v)?),
                            "policy" => cfg.policy = parse_policy(v)?,
                            _ => return Err(bad(format!("unknown key `{k}` in [grid]"))),
                        }
                    }
                }
                "levels" => {
                    for (k, v) in props.iter() {
                        match k {
                            "t_min" => cfg.t_min = Some(parse_number(v)?),
                            "t_max" => cfg.t_max = Some(parse_number(v)?),
                            "count" => cfg.levels = v.trim().parse().map_err(|_| bad("count must be an integer"))?,
                            "spacing" => cfg.spacing = parse_spacing(v)?,
                            _ => return Err(bad(format!("unknown key `{k}` in [levels]"))),
                        }
                    }
                }
                "tolerances" => {
                    for (k, v) in props.iter() {
                        let x = parse_number(v)?;
                        match k {
                            "identity_tol" => cfg.identity_tol = x,
                            "monotonicity_slack" => cfg.monotonicity_slack = x,
                            "fit_gate" => cfg.fit_gate = x,
                            _ => return Err(bad(format!("unknown key `{k}` in [tolerances]"))),
                        }
                    }
                }
                "output" => {
                    for (k, v) in props.iter() {
                        match k {
                            "csv" => cfg.csv = Some(PathBuf::from(v.trim())),
                            "json" => cfg.json = Some(PathBuf::from(v.trim())),
                            _ => return Err(bad(format!("unknown key `{k}` in [output]"))),
                        }
                    }
                }
                "run" => {
                    for (k, v) in props.iter() {
                        match k {
                            "threads" => {
                                cfg.threads = Some(v.trim().parse().map_err(|_| bad("threads must be an integer"))?)
                            }
                            _ => return Err(bad(format!("unknown key `{k}` in [run]"))),
                        }
                    }
                }
                "" if props.is_empty() => {}
                other => return Err(bad(format!("unknown section `[{other}]`"))),
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.levels < 8 {
            return Err(bad(format!("level count must be at least 8, got {}", self.levels)));
        }
        for (name, x) in [
            ("identity_tol", self.identity_tol),
            ("monotonicity_slack", self.monotonicity_slack),
            ("fit_gate", self.fit_gate),
        ] {
            if !(x.is_finite() && x >= 0.0) {
                return Err(bad(format!("{name} must be a non-negative number")));
            }
        }
        if let (Some(a), Some(b)) = (self.t_min, self.t_max) {
            if !(0.0 < a && a < b) {
                return Err(bad(format!("need 0 < t_min < t_max, got {a} and {b}")));
            }
        }
        if self.threads == Some(0) {
            return Err(bad("threads must be positive"));
        }
        Ok(())
    }

    pub fn surface(&self) -> Result<SurfaceSpec, ConfigError> {
        let Some(Source::Surface { name, params, user }) = &self.source else {
            return Err(bad("no surface given"));
        };
        let p: Vec<(&str, f64)> = params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        let spec = match user {
            None => catalog_surface(name, &p),
            Some(u) => {
                let domain = ParamDomain::rect(
                    Interval::new(u.u_range.0, u.u_range.1),
                    Interval::new(u.v_range.0, u.v_range.1),
                )
                .map(|d| {
                    d.with_periodic(u.periodic_u, u.periodic_v)
                        .with_collapsed_v(u.collapsed_v.0, u.collapsed_v.1)
                });
                let comps: Vec<&str> = u.components.iter().map(String::as_str).collect();
                domain.and_then(|d| SurfaceSpec::user(name, &comps, &p, d, u.chi))
            }
        };
        spec.map_err(|e| bad(e.to_string()))
    }

    /// Base point, defaulting to the origin.
    pub fn base_point(&self, dim: usize) -> Result<AmbientVec, ConfigError> {
        match &self.x0 {
            None => Ok(AmbientVec::zeros(dim)),
            Some(c) if c.len() == dim => Ok(AmbientVec::from_slice(c)),
            Some(c) => Err(bad(format!("x0 has {} coordinates, the ambient space {dim}", c.len()))),
        }
    }

    /// Thread count: explicit setting, then the environment, then rayon's default.
    pub fn thread_count(&self) -> Result<Option<usize>, ConfigError> {
        if self.threads.is_some() {
            return Ok(self.threads);
        }
        match std::env::var(THREADS_ENV) {
            Ok(s) => match s.trim().parse::<usize>() {
                Ok(n) if n > 0 => Ok(Some(n)),
                _ => Err(bad(format!("{THREADS_ENV} must be a positive integer, got `{s}`"))),
            },
            Err(_) => Ok(None),
        }
    }
}
