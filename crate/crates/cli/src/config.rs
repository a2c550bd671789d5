//! Plain-text key-value run configuration.
//!
//! Schema (one `key = value` per line, `#` comments):
//!
//! | key              | type            | default       | meaning                                  |
//! |------------------|-----------------|---------------|------------------------------------------|
//! | g_a              | real ≥ 0        | 25            | intra-species coupling                   |
//! | g_ab             | comma list      | 25            | post-quench couplings, one sweep point each |
//! | g_ab_range       | lo:hi:count     | none          | alternative to g_ab, inclusive endpoints |
//! | n_tot            | int ≥ 1         | 60            | total-quanta basis cutoff                |
//! | n_max            | int ≥ 1         | n_tot         | single-particle orbital cutoff           |
//! | quad_order       | int             | 2·n_max + 2   | Gauss–Hermite order for the table        |
//! | t_max            | real > 0        | 6π            | evolution horizon (1/ω)                  |
//! | dt               | real > 0        | 0.005         | Loschmidt sampling step                  |
//! | obs_times        | int ≥ 2         | 64            | output times for densities/entropies     |
//! | eta              | real > 0        | 0.05          | spectral broadening                      |
//! | omega_min/max    | real            | −12 / 4       | spectral window (ω_trap)                 |
//! | omega_points     | int ≥ 2         | 801           | spectral grid size                       |
//! | x_half_width     | real > 0        | 5             | density grid half-width (a_ho)           |
//! | x_points         | int ≥ 3, odd    | 201           | density grid size                        |
//! | densities, entropy, natural_orbitals, le, subsystem_le, spectrum | bool | see presets | output toggles |
//! | out_dir          | path            | out           | output tree root                         |
//! | workers          | int ≥ 1         | 1             | concurrent sweep points                  |

use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub g_a: f64,
    pub g_ab: Vec<f64>,
    pub n_tot: usize,
    pub n_max: usize,
    pub quad_order: usize,
    pub t_max: f64,
    pub dt: f64,
    pub obs_times: usize,
    pub eta: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_points: usize,
    pub x_half_width: f64,
    pub x_points: usize,
    pub densities: bool,
    pub entropy: bool,
    pub natural_orbitals: bool,
    pub le: bool,
    pub subsystem_le: bool,
    pub spectrum: bool,
    pub out_dir: PathBuf,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            g_a: 25.0,
            g_ab: vec![25.0],
            n_tot: 60,
            n_max: 0, // resolved to n_tot
            quad_order: 0, // resolved to 2 n_max + 2
            t_max: 6.0 * std::f64::consts::PI,
            dt: 0.005,
            obs_times: 64,
            eta: 0.05,
            omega_min: -12.0,
            omega_max: 4.0,
            omega_points: 801,
            x_half_width: 5.0,
            x_points: 201,
            densities: false,
            entropy: false,
            natural_orbitals: false,
            le: true,
            subsystem_le: false,
            spectrum: false,
            out_dir: PathBuf::from("out"),
            workers: 1,
        }
    }
}

pub const PRESETS: &[(&str, &str, &str)] = &[
    ("fig1", include_str!("../../../presets/fig1.conf"), "species densities at three couplings"),
    ("fig2", include_str!("../../../presets/fig2.conf"), "entanglement entropy time series"),
    ("fig3", include_str!("../../../presets/fig3.conf"), "natural orbital occupations"),
    ("fig4", include_str!("../../../presets/fig4.conf"), "total and subsystem Loschmidt echoes"),
    ("fig4c", include_str!("../../../presets/fig4c.conf"), "Loschmidt echo, 64-point coupling sweep"),
    ("fig5", include_str!("../../../presets/fig5.conf"), "spectral function, 51-point coupling sweep"),
];

pub fn preset(name: &str) -> Result<RunConfig, String> {
    for (n, text, _) in PRESETS {
        if *n == name {
            let mut cfg = RunConfig::default();
            cfg.apply_text(text).map_err(|e| format!("preset {name}: {e}"))?;
            return Ok(cfg);
        }
    }
    let names: Vec<&str> = PRESETS.iter().map(|(n, _, _)| *n).collect();
    Err(format!("unknown preset {name}; available: {}", names.join(", ")))
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => Err(format!("expected a boolean, got {other}")),
    }
}

fn parse_num<T: std::str::FromStr>(v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("cannot parse {v}"))
}

impl RunConfig {
    /// Applies one `key = value` assignment (also the `--override` syntax).
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), String> {
        let value = value.trim();
        let err = |e: String| format!("{key}: {e}");
        match key {
            "g_a" => self.g_a = parse_num(value).map_err(err)?,
            "g_ab" => {
                let mut list = Vec::new();
                for part in value.split(',') {
                    list.push(parse_num(part.trim()).map_err(&err)?);
                }
                self.g_ab = list;
            }
            "g_ab_range" => {
                let parts: Vec<&str> = value.split(':').collect();
                if parts.len() != 3 {
                    return Err(err("expected lo:hi:count".into()));
                }
                let lo: f64 = parse_num(parts[0]).map_err(&err)?;
                let hi: f64 = parse_num(parts[1]).map_err(&err)?;
                let count: usize = parse_num(parts[2]).map_err(&err)?;
                if count < 2 || hi <= lo {
                    return Err(err("need count >= 2 and hi > lo".into()));
                }
                self.g_ab = (0..count)
                    .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
                    .collect();
            }
            "n_tot" => self.n_tot = parse_num(value).map_err(err)?,
            "n_max" => self.n_max = parse_num(value).map_err(err)?,
            "quad_order" => self.quad_order = parse_num(value).map_err(err)?,
            "t_max" => self.t_max = parse_num(value).map_err(err)?,
            "dt" => self.dt = parse_num(value).map_err(err)?,
            "obs_times" => self.obs_times = parse_num(value).map_err(err)?,
            "eta" => self.eta = parse_num(value).map_err(err)?,
            "omega_min" => self.omega_min = parse_num(value).map_err(err)?,
            "omega_max" => self.omega_max = parse_num(value).map_err(err)?,
            "omega_points" => self.omega_points = parse_num(value).map_err(err)?,
            "x_half_width" => self.x_half_width = parse_num(value).map_err(err)?,
            "x_points" => self.x_points = parse_num(value).map_err(err)?,
            "densities" => self.densities = parse_bool(value).map_err(err)?,
            "entropy" => self.entropy = parse_bool(value).map_err(err)?,
            "natural_orbitals" => self.natural_orbitals = parse_bool(value).map_err(err)?,
            "le" => self.le = parse_bool(value).map_err(err)?,
            "subsystem_le" => self.subsystem_le = parse_bool(value).map_err(err)?,
            "spectrum" => self.spectrum = parse_bool(value).map_err(err)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "workers" => self.workers = parse_num(value).map_err(err)?,
            other => return Err(format!("unknown key {other}")),
        }
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), String> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
            self.apply(key.trim(), value)
                .map_err(|e| format!("line {}: {e}", lineno + 1))?;
        }
        Ok(())
    }

    /// Resolves the deferred defaults (n_max, quad_order) in place.
    pub fn resolve(&mut self) {
        if self.n_max == 0 {
            self.n_max = self.n_tot;
        }
        if self.quad_order == 0 {
            self.quad_order = 2 * self.n_max + 2;
        }
    }

    /// Full validation: every violation reported with its field path;
    /// warnings are non-fatal.
    pub fn validate(&self) -> (Vec<String>, Vec<String>) {
        let mut errors = Vec::new();
        let mut warnings = Vec::new();
        if !(self.g_a.is_finite() && self.g_a >= 0.0) {
            errors.push(format!("g_a: must be finite and >= 0, got {}", self.g_a));
        }
        for (i, &g) in self.g_ab.iter().enumerate() {
            if !(g.is_finite() && g >= 0.0) {
                errors.push(format!("g_ab[{i}]: must be finite and >= 0, got {g}"));
            } else if g > self.g_a {
                warnings.push(format!(
                    "g_ab[{i}] = {g} exceeds g_a = {}; outside the studied range",
                    self.g_a
                ));
            }
        }
        if self.n_tot < 1 {
            errors.push("n_tot: must be >= 1".into());
        }
        if self.n_max != 0 && self.n_max < self.n_tot {
            errors.push(format!(
                "n_max: {} cannot be below the cutoff n_tot = {}",
                self.n_max, self.n_tot
            ));
        }
        let n_max = if self.n_max == 0 { self.n_tot } else { self.n_max };
        if self.quad_order != 0 && self.quad_order < 2 * n_max + 2 {
            errors.push(format!(
                "quad_order: {} below the exactness bound 2·n_max + 2 = {}",
                self.quad_order,
                2 * n_max + 2
            ));
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            errors.push("t_max: must be > 0".into());
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            errors.push("dt: must be > 0".into());
        } else {
            // a-priori Nyquist estimate: E_max <= n_tot + 3/2 plus the
            // largest diagonal contact shift (I_0000 = 1/sqrt(2 pi) scale)
            let g_max = self.g_ab.iter().cloned().fold(0.0f64, f64::max);
            let shift = (self.g_a + 2.0 * g_max) / (2.0 * std::f64::consts::PI).sqrt();
            let e_spread = self.n_tot as f64 + shift;
            let bound = std::f64::consts::FRAC_PI_4 / e_spread.max(1e-300);
            if self.dt > bound {
                errors.push(format!(
                    "dt: {} violates the Nyquist rule; estimated bound {:.6e} \
                     for spectral spread {:.3}",
                    self.dt, bound, e_spread
                ));
            }
        }
        if self.obs_times < 2 {
            errors.push("obs_times: must be >= 2".into());
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            errors.push("eta: must be > 0".into());
        }
        if self.omega_max <= self.omega_min {
            errors.push("omega_max: must exceed omega_min".into());
        }
        if self.omega_points < 2 {
            errors.push("omega_points: must be >= 2".into());
        }
        if !(self.x_half_width.is_finite() && self.x_half_width > 0.0) {
            errors.push("x_half_width: must be > 0".into());
        }
        if self.x_points < 3 || self.x_points.is_multiple_of(2) {
            errors.push(format!("x_points: must be odd and >= 3, got {}", self.x_points));
        }
        if self.workers < 1 {
            errors.push("workers: must be >= 1".into());
        }
        (errors, warnings)
    }

    /// Normalized echo: sorted `key = value` lines with all defaults
    /// resolved; embedded verbatim in manifests and `validate` output.
    pub fn echo(&self) -> String {
        let mut resolved = self.clone();
        resolved.resolve();
        let g_ab: Vec<String> = resolved.g_ab.iter().map(|g| format!("{g:.11e}")).collect();
        let mut lines = vec![
            format!("densities = {}", resolved.densities),
            format!("dt = {:.11e}", resolved.dt),
            format!("entropy = {}", resolved.entropy),
            format!("eta = {:.11e}", resolved.eta),
            format!("g_a = {:.11e}", resolved.g_a),
            format!("g_ab = {}", g_ab.join(", ")),
            format!("le = {}", resolved.le),
            format!("n_max = {}", resolved.n_max),
            format!("n_tot = {}", resolved.n_tot),
            format!("natural_orbitals = {}", resolved.natural_orbitals),
            format!("obs_times = {}", resolved.obs_times),
            format!("omega_max = {:.11e}", resolved.omega_max),
            format!("omega_min = {:.11e}", resolved.omega_min),
            format!("omega_points = {}", resolved.omega_points),
            format!("out_dir = {}", resolved.out_dir.display()),
            format!("quad_order = {}", resolved.quad_order),
            format!("spectrum = {}", resolved.spectrum),
            format!("subsystem_le = {}", resolved.subsystem_le),
            format!("t_max = {:.11e}", resolved.t_max),
            format!("workers = {}", resolved.workers),
            format!("x_half_width = {:.11e}", resolved.x_half_width),
            format!("x_points = {}", resolved.x_points),
        ];
        lines.sort();
        let mut out = String::new();
        for l in lines {
            writeln!(out, "{l}").unwrap();
        }
        out
    }
}
