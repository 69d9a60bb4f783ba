//! Flat `key = value` run configuration.
//!
//! One assignment per line, dotted keys, `#` starts a comment. Lists are comma or
//! whitespace separated. Unknown keys are rejected so typos do not silently fall back
//! to defaults.

use crate::bump::Bump;
use crate::error::{Error, Result};
use crate::geometry::region::Region;
use crate::geometry::spacetime::Theory;
use crate::grid::Grid;
use serde_json::{Map, Value};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Functor,
    Causality,
    Timeslice,
    Net,
    BuField,
    RceInvariance,
    RceTriple,
    RceDerivative,
    RceDivergence,
    States,
    Wick,
    Geometry,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::Functor,
        Suite::Causality,
        Suite::Timeslice,
        Suite::Net,
        Suite::BuField,
        Suite::RceInvariance,
        Suite::RceDerivative,
        Suite::RceDivergence,
        Suite::States,
        Suite::Wick,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Functor => "functor",
            Suite::Causality => "causality",
            Suite::Timeslice => "timeslice",
            Suite::Net => "net",
            Suite::BuField => "bu-field",
            Suite::RceInvariance => "rce-invariance",
            Suite::RceTriple => "rce-triple",
            Suite::RceDerivative => "rce-derivative",
            Suite::RceDivergence => "rce-divergence",
            Suite::States => "states",
            Suite::Wick => "wick",
            Suite::Geometry => "geometry",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Suite> {
        let s = s.trim().to_ascii_lowercase();
        Ok(match s.as_str() {
            "functor" => Suite::Functor,
            "causality" => Suite::Causality,
            "timeslice" | "time-slice" => Suite::Timeslice,
            "net" => Suite::Net,
            "bu" | "bu-field" => Suite::BuField,
            "rce-invariance" | "invariance" => Suite::RceInvariance,
            "rce-triple" | "triple" => Suite::RceTriple,
            "rce-derivative" | "derivative" => Suite::RceDerivative,
            "rce-divergence" | "divergence" => Suite::RceDivergence,
            "states" => Suite::States,
            "wick" => Suite::Wick,
            "geometry" => Suite::Geometry,
            _ => return Err(Error::Config(format!("unknown suite '{s}'"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ToleranceMode {
    /// Pinned tolerances plus a convergence pre-pass on two coarser grids.
    Auto,
    /// Pinned tolerances (or overrides) on the base grid only.
    Explicit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    pub mode: ToleranceMode,
    pub scale: f64,
    /// Keyed by the record name in kebab case.
    pub overrides: BTreeMap<String, f64>,
}

impl Tolerances {
    pub fn resolve(&self, record: &str, pinned: f64) -> f64 {
        match self.overrides.get(&kebab(record)) {
            Some(&v) => v,
            None => pinned * self.scale,
        }
    }
}

pub fn kebab(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') {
            out.push('-');
        }
    }
    out.trim_matches('-').to_string()
}

/// Which state the `wick` command profiles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StateChoice {
    Vacuum,
    Thermal(f64),
}

impl FromStr for StateChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<StateChoice> {
        let s = s.trim();
        if s == "vacuum" {
            return Ok(StateChoice::Vacuum);
        }
        if let Some(b) = s.strip_prefix("thermal:") {
            let beta = num(b)?;
            if beta > 0.0 {
                return Ok(StateChoice::Thermal(beta));
            }
        }
        Err(Error::Config(format!("state must be vacuum or thermal:BETA with BETA > 0, got '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub n_x: usize,
    pub n_t: usize,
    pub courant: f64,
    pub t0: f64,
    pub length: f64,
    pub theory: Theory,
    pub suites: Vec<Suite>,
    pub tolerances: Tolerances,
    pub output_dir: Option<PathBuf>,
    pub regions: BTreeMap<String, Region>,

    pub functor_domain: String,
    pub functor_shifts: [(isize, isize); 2],
    pub causality_pair: (String, String),
    pub timeslice_strip: String,
    pub timeslice_source: Bump,
    pub net_region: String,
    pub net_far: String,
    pub net_big: String,
    pub net_strip: String,

    pub rce_family: String,
    pub rce_amplitude: f64,
    pub rce_n_minus: (f64, f64),
    pub rce_n_plus: (f64, f64),
    pub rce_smoothstep: usize,
    pub rce_probes: usize,
    pub divergence_fields: usize,
    pub divergence_seed: u64,
    pub diffeo_s: f64,
    pub diffeo_amplitudes: (f64, f64),

    pub states_betas: Vec<f64>,
    pub states_probes: usize,
    pub wick_mu: Vec<f64>,
    pub wick_betas: Vec<f64>,
    pub wick_state: StateChoice,

    /// Every key as written, for the report echo.
    pub raw: BTreeMap<String, String>,
}

pub const DEFAULT_CONFIG: &str = "\
grid.n_x = 256
grid.n_t = 512
grid.courant = 0.5
grid.t0 = 0
physics.mass = 1
physics.xi = 0
physics.length = 2pi
suites = functor, causality, timeslice, net, bu-field, rce-invariance, rce-derivative, rce-divergence, states, wick
tolerance.mode = auto
tolerance.scale = 1
region.left = diamond 3.0 1.5 1.0
region.right = diamond 3.0 4.7 1.0
region.mid = diamond 3.1 3.0 1.2
region.small = diamond 3.0 2.0 0.8
region.far = diamond 3.0 5.2 0.8
region.big = diamond 3.0 2.0 1.5
region.late = strip 4.6 5.4
region.early = strip 1.0 1.8
functor.domain = mid
functor.shift1 = 4 6
functor.shift2 = -2 10
causality.pair = left right
timeslice.strip = early
timeslice.source = 3.2 2.0 0.8 1.0
net.region = small
net.far = far
net.big = big
net.strip = late
rce.family = tensor-bump
rce.amplitude = 1e-2
rce.n_minus = 0.10 0.25
rce.n_plus = 0.75 0.90
rce.smoothstep = 2
rce.probes = 3
divergence.fields = 8
divergence.seed = 7
diffeo.s = 0.1
diffeo.amplitudes = 0.3 -0.2
states.betas = 0.7
states.probes = 5
wick.mu = 1.0 2.0
wick.betas = 0.8 3.0
wick.state = thermal:1.0
";

fn num(s: &str) -> Result<f64> {
    let t = s.trim();
    let parsed = match t {
        "pi" => Some(std::f64::consts::PI),
        "2pi" | "tau" => Some(std::f64::consts::TAU),
        _ => t.parse::<f64>().ok(),
    };
    parsed.filter(|v| v.is_finite()).ok_or_else(|| Error::Config(format!("not a number: '{t}'")))
}

fn list(s: &str) -> Vec<&str> {
    s.split(|c: char| c == ',' || c.is_whitespace()).filter(|p| !p.is_empty()).collect()
}

fn nums(s: &str, want: Option<usize>, key: &str) -> Result<Vec<f64>> {
    let v = list(s).into_iter().map(num).collect::<Result<Vec<_>>>()?;
    if let Some(n) = want {
        if v.len() != n {
            return Err(Error::Config(format!("{key}: expected {n} numbers, got {}", v.len())));
        }
    }
    Ok(v)
}

fn int<T: FromStr>(s: &str, key: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Config(format!("{key}: not an integer: '{}'", s.trim())))
}

fn region(s: &str, key: &str) -> Result<Region> {
    let parts = list(s);
    let args = parts.iter().skip(1).map(|p| num(p)).collect::<Result<Vec<_>>>()?;
    match (parts.first().copied(), args.len()) {
        (Some("diamond"), 3) => Ok(Region::diamond(args[0], args[1], args[2])),
        (Some("strip"), 2) => Ok(Region::strip(args[0], args[1])),
        _ => Err(Error::Config(format!("{key}: expected 'diamond TC XC R' or 'strip TA TB', got '{s}'"))),
    }
}

/// key/value pairs in file order; later assignments win.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", k + 1)))?;
        let key = key.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(Error::Config(format!("line {}: bad key '{key}'", k + 1)));
        }
        out.insert(key.to_string(), value.trim().to_string());
    }
    Ok(out)
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig::parse("").expect("built-in defaults parse")
    }
}

impl RunConfig {
    /// Defaults overlaid with `text`.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut kv = parse_pairs(DEFAULT_CONFIG)?;
        let user = parse_pairs(text)?;
        // n_t follows n_x unless given
        if user.contains_key("grid.n_x") && !user.contains_key("grid.n_t") {
            let nx: usize = int(&user["grid.n_x"], "grid.n_x")?;
            kv.insert("grid.n_t".into(), (2 * nx).to_string());
        }
        kv.extend(user);
        RunConfig::from_pairs(kv)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        RunConfig::parse(&text)
    }

    fn from_pairs(kv: BTreeMap<String, String>) -> Result<RunConfig> {
        let known_default = parse_pairs(DEFAULT_CONFIG)?;
        for k in kv.keys() {
            let open = k.starts_with("region.") || k.starts_with("tolerance.") || k == "output.dir";
            if !open && !known_default.contains_key(k) {
                return Err(Error::Config(format!("unknown key '{k}'")));
            }
        }
        let get = |k: &str| kv.get(k).map(String::as_str).unwrap_or("");
        let mut regions = BTreeMap::new();
        for (k, v) in kv.range("region.".to_string()..) {
            let Some(name) = k.strip_prefix("region.") else { break };
            regions.insert(name.to_string(), region(v, k)?);
        }
        let mut overrides = BTreeMap::new();
        for (k, v) in kv.range("tolerance.".to_string()..) {
            let Some(name) = k.strip_prefix("tolerance.") else { break };
            if name != "mode" && name != "scale" {
                overrides.insert(kebab(name), num(v)?);
            }
        }
        let mode = match get("tolerance.mode") {
            "auto" => ToleranceMode::Auto,
            "explicit" => ToleranceMode::Explicit,
            m => return Err(Error::Config(format!("tolerance.mode must be auto or explicit, got '{m}'"))),
        };
        let scale = num(get("tolerance.scale"))?;
        if scale <= 0.0 {
            return Err(Error::Config("tolerance.scale must be positive".into()));
        }
        let suites = list(get("suites")).into_iter().map(Suite::from_str).collect::<Result<Vec<_>>>()?;
        let pair = |k: &str| -> Result<(f64, f64)> {
            let v = nums(get(k), Some(2), k)?;
            Ok((v[0], v[1]))
        };
        let steps = |k: &str| -> Result<(isize, isize)> {
            let v = list(get(k));
            if v.len() != 2 {
                return Err(Error::Config(format!("{k}: expected two integers")));
            }
            Ok((int(v[0], k)?, int(v[1], k)?))
        };
        let names = list(get("causality.pair"));
        if names.len() != 2 {
            return Err(Error::Config("causality.pair: expected two region names".into()));
        }
        let src = nums(get("timeslice.source"), Some(4), "timeslice.source")?;
        let cfg = RunConfig {
            n_x: int(get("grid.n_x"), "grid.n_x")?,
            n_t: int(get("grid.n_t"), "grid.n_t")?,
            courant: num(get("grid.courant"))?,
            t0: num(get("grid.t0"))?,
            length: num(get("physics.length"))?,
            theory: Theory { mass: num(get("physics.mass"))?, xi: num(get("physics.xi"))? },
            suites,
            tolerances: Tolerances { mode, scale, overrides },
            output_dir: kv.get("output.dir").map(PathBuf::from),
            regions,
            functor_domain: get("functor.domain").into(),
            functor_shifts: [steps("functor.shift1")?, steps("functor.shift2")?],
            causality_pair: (names[0].into(), names[1].into()),
            timeslice_strip: get("timeslice.strip").into(),
            timeslice_source: Bump::new(src[0], src[1], src[2], src[3]),
            net_region: get("net.region").into(),
            net_far: get("net.far").into(),
            net_big: get("net.big").into(),
            net_strip: get("net.strip").into(),
            rce_family: get("rce.family").into(),
            rce_amplitude: num(get("rce.amplitude"))?,
            rce_n_minus: pair("rce.n_minus")?,
            rce_n_plus: pair("rce.n_plus")?,
            rce_smoothstep: int(get("rce.smoothstep"), "rce.smoothstep")?,
            rce_probes: int(get("rce.probes"), "rce.probes")?,
            divergence_fields: int(get("divergence.fields"), "divergence.fields")?,
            divergence_seed: int(get("divergence.seed"), "divergence.seed")?,
            diffeo_s: num(get("diffeo.s"))?,
            diffeo_amplitudes: pair("diffeo.amplitudes")?,
            states_betas: nums(get("states.betas"), None, "states.betas")?,
            states_probes: int(get("states.probes"), "states.probes")?,
            wick_mu: nums(get("wick.mu"), None, "wick.mu")?,
            wick_betas: nums(get("wick.betas"), None, "wick.betas")?,
            wick_state: get("wick.state").parse()?,
            raw: kv.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        for name in [
            &self.functor_domain,
            &self.causality_pair.0,
            &self.causality_pair.1,
            &self.timeslice_strip,
            &self.net_region,
            &self.net_far,
            &self.net_big,
            &self.net_strip,
        ] {
            if !self.regions.contains_key(name) {
                return Err(Error::Config(format!("region '{name}' is referenced but not defined")));
            }
        }
        if !matches!(self.rce_family.as_str(), "tensor-bump" | "conformal-bump" | "flat") {
            return Err(Error::Config(format!("rce.family must be tensor-bump, conformal-bump or flat, got '{}'", self.rce_family)));
        }
        if self.wick_mu.iter().any(|&m| m <= 0.0) || self.states_betas.iter().chain(&self.wick_betas).any(|&b| b <= 0.0) {
            return Err(Error::Config("scales mu and inverse temperatures must be positive".into()));
        }
        if self.rce_probes < 2 || self.states_probes < 2 {
            return Err(Error::Config("at least two probes are needed for pairings".into()));
        }
        self.grid_at(self.n_x)?;
        Ok(())
    }

    /// The configured slab with n_x columns and n_t scaled along with it.
    pub fn grid_at(&self, n_x: usize) -> Result<Grid> {
        let n_t = self.n_t * n_x / self.n_x;
        Grid::with_courant(n_t, n_x, self.t0, self.length, self.courant)
    }

    pub fn grid(&self) -> Result<Grid> {
        self.grid_at(self.n_x)
    }

    pub fn region(&self, name: &str) -> Result<&Region> {
        self.regions.get(name).ok_or_else(|| Error::Config(format!("region '{name}' is not defined")))
    }

    /// Echo for reports: every key with its value as written.
    pub fn echo(&self) -> Map<String, Value> {
        self.raw.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect()
    }
}
