//! Run configuration read from a TOML file.
//!
//! ```toml
//! meshes = ["cube_n1.msh"]     # relative to the config file
//! omega = 1.0
//! mu0 = 1.0
//! alpha = 10.0                 # default 10
//! m = 1                        # default 1
//! source = [0.0, 0.0, 1.0]     # uniform j_e for `solve` without a manufactured solution
//!
//! [[materials]]
//! region = 1
//! sigma = 1.0
//! mu = 1.0
//!
//! [quadrature]                 # all optional
//! q = 8
//!
//! [manufactured]
//! enabled = true
//! x0 = [0.45, 0.52, 0.48]      # default: near the bounding-box centre
//! potential = "cubic"          # zero | linear | cubic | trig
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use eddykit_core::manufactured::Potential;
use eddykit_core::quadrature::QuadConfig;
use eddykit_core::{MaterialConfig, RegionMaterial};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Solve,
    Convergence,
    BemVerify,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadOverrides {
    pub q: Option<usize>,
    pub sharp_q_extra: Option<usize>,
    pub edge_q_extra: Option<usize>,
    pub regular_order: Option<usize>,
    pub near_order: Option<usize>,
    pub volume_order: Option<usize>,
    pub surface_order: Option<usize>,
    pub data_order: Option<usize>,
    pub data_subdivision: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manufactured {
    #[serde(default = "yes")]
    pub enabled: bool,
    pub x0: Option<[f64; 3]>,
    #[serde(default)]
    pub potential: Potential,
}

fn yes() -> bool {
    true
}

fn default_alpha() -> f64 {
    10.0
}

fn default_m() -> usize {
    1
}

fn default_mu0() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Checked against the mode given on the command line when present.
    pub mode: Option<Mode>,
    pub meshes: Vec<PathBuf>,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub omega: f64,
    #[serde(default = "default_mu0")]
    pub mu0: f64,
    pub materials: Vec<RegionMaterial>,
    #[serde(default)]
    pub quadrature: QuadOverrides,
    pub manufactured: Option<Manufactured>,
    /// Uniform source current for `solve` runs without manufactured data.
    pub source: Option<[f64; 3]>,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub deterministic: bool,
    pub threads: Option<usize>,
    /// Write the assembled system of a `solve` run as `system.bin`.
    #[serde(default)]
    pub dump_system: bool,
}

/// Configuration errors map to exit status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

impl RunConfig {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        toml::from_str(text).map_err(|e| invalid(format!("config: {}", e.to_string().trim_end())))
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for m in &mut cfg.meshes {
            if m.is_relative() {
                *m = base.join(&*m);
            }
        }
        if let Some(out) = &mut cfg.output {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self, mode: Mode) -> anyhow::Result<()> {
        if let Some(m) = self.mode {
            if m != mode {
                return Err(invalid(format!(
                    "config is for mode {m:?}, command line asks for {mode:?}"
                )));
            }
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(invalid(format!(
                "alpha: must satisfy alpha >= 0, got {}",
                self.alpha
            )));
        }
        if self.m < 1 {
            return Err(invalid("m: must be at least 1"));
        }
        let needed = if mode == Mode::Convergence { 3 } else { 1 };
        if self.meshes.len() < needed {
            return Err(invalid(format!(
                "meshes: {mode:?} needs at least {needed}, got {}",
                self.meshes.len()
            )));
        }
        if mode == Mode::Solve && self.meshes.len() != 1 {
            return Err(invalid("meshes: solve takes exactly one mesh"));
        }
        if self.threads == Some(0) {
            return Err(invalid("threads: must be at least 1"));
        }
        if self.manufactured_enabled() && self.source.is_some() {
            return Err(invalid(
                "source: not used together with a manufactured solution",
            ));
        }
        if mode == Mode::Convergence && !self.manufactured_enabled() {
            return Err(invalid(
                "manufactured: convergence runs need a manufactured solution",
            ));
        }
        self.materials()
            .validate()
            .map_err(|e| invalid(format!("materials: {e}")))?;
        self.quad()
            .validate()
            .map_err(|e| invalid(format!("quadrature: {e}")))?;
        Ok(())
    }

    pub fn manufactured_enabled(&self) -> bool {
        self.manufactured.as_ref().is_some_and(|m| m.enabled)
    }

    pub fn materials(&self) -> MaterialConfig {
        MaterialConfig {
            omega: self.omega,
            mu0: self.mu0,
            alpha: self.alpha,
            regions: self.materials.clone(),
        }
    }

    /// Defaults for `m` with q = 8, then the overrides. Setting `q` alone
    /// also moves the data rule to order `2m + q`.
    pub fn quad(&self) -> QuadConfig {
        let mut c = QuadConfig::for_order(self.m);
        let o = &self.quadrature;
        if let Some(q) = o.q {
            c.singular_q = q;
            c.data_order = 2 * self.m + q;
        }
        let set = |dst: &mut usize, v: Option<usize>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut c.sharp_q_extra, o.sharp_q_extra);
        set(&mut c.edge_q_extra, o.edge_q_extra);
        set(&mut c.regular_order, o.regular_order);
        set(&mut c.near_order, o.near_order);
        set(&mut c.volume_order, o.volume_order);
        set(&mut c.surface_order, o.surface_order);
        set(&mut c.data_order, o.data_order);
        set(&mut c.data_subdivision, o.data_subdivision);
        c
    }

    pub fn output_dir(&self, cli: Option<&Path>) -> PathBuf {
        cli.map(Path::to_path_buf)
            .or_else(|| self.output.clone())
            .unwrap_or_else(|| PathBuf::from("eddykit-out"))
    }
}

pub fn read(path: &Path, mode: Mode) -> anyhow::Result<RunConfig> {
    let cfg = RunConfig::load(path)?;
    cfg.validate(mode)
        .with_context(|| format!("in {}", path.display()))?;
    if cfg.meshes.iter().any(|m| !m.exists()) {
        let missing: Vec<_> = cfg
            .meshes
            .iter()
            .filter(|m| !m.exists())
            .map(|m| m.display().to_string())
            .collect();
        bail!(ConfigError(format!(
            "meshes: not found: {}",
            missing.join(", ")
        )));
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
meshes = ["a.msh"]
omega = 2.0

[[materials]]
region = 1
sigma = 1.0
mu = 1.0
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.alpha, 10.0);
        assert_eq!(c.m, 1);
        assert_eq!(c.mu0, 1.0);
        assert_eq!(c.quad().singular_q, 8);
        assert!(!c.deterministic);
        c.validate(Mode::Solve).unwrap();
    }

    #[test]
    fn negative_alpha_is_rejected() {
        let c = RunConfig::parse(&format!("alpha = -1.0\n{MINIMAL}")).unwrap();
        let e = c.validate(Mode::Solve).unwrap_err();
        assert!(e.to_string().contains("alpha >= 0"), "{e}");
        assert!(e.downcast_ref::<ConfigError>().is_some());
    }

    #[test]
    fn convergence_needs_three_meshes() {
        let c = RunConfig::parse(&format!("{MINIMAL}\n[manufactured]\n")).unwrap();
        assert!(c
            .validate(Mode::Convergence)
            .unwrap_err()
            .to_string()
            .contains("at least 3"));
    }

    #[test]
    fn unknown_fields_are_reported() {
        let e = RunConfig::parse(&format!("alhpa = 3.0\n{MINIMAL}")).unwrap_err();
        assert!(e.to_string().contains("alhpa"), "{e}");
        let e = RunConfig::parse(&format!("{MINIMAL}sgima = 2.0\n")).unwrap_err();
        assert!(e.to_string().contains("sgima"), "{e}");
    }

    #[test]
    fn q_override_moves_data_rule() {
        let c = RunConfig::parse(&format!("{MINIMAL}\n[quadrature]\nq = 10\n")).unwrap();
        let q = c.quad();
        assert_eq!((q.singular_q, q.data_order), (10, 12));
        assert_eq!(q.regular_order, QuadConfig::for_order(1).regular_order);
    }

    #[test]
    fn materials_are_checked() {
        let bad = MINIMAL.replace("sigma = 1.0", "sigma = -2.0");
        let e = RunConfig::parse(&bad)
            .unwrap()
            .validate(Mode::Solve)
            .unwrap_err();
        assert!(e.to_string().contains("materials"), "{e}");
    }
}
