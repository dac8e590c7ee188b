//! Run configuration: UTF-8 text, one `key = value` per line, `#`
//! comments, dotted keys per module (e.g. `scf.damping = 0.4`).
//! Unknown keys are rejected; command-line flags override file values.

use crate::continuation::SCFConfig;
use crate::error::{Error, Result};
use crate::radial::RadialConfig;
use std::path::Path;

#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub radial: RadialConfig,
    pub scf: SCFConfig,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn from_str_cfg(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_str_cfg(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn f64_of(key: &str, v: &str) -> Result<f64> {
            v.parse()
                .map_err(|_| Error::Config(format!("{key}: not a number: {v}")))
        }
        fn usize_of(key: &str, v: &str) -> Result<usize> {
            v.parse()
                .map_err(|_| Error::Config(format!("{key}: not an integer: {v}")))
        }
        match key {
            "radial.rtol" => self.radial.rtol = f64_of(key, value)?,
            "radial.atol_scale" => self.radial.atol_scale = f64_of(key, value)?,
            "radial.r_max_factor" => self.radial.r_max_factor = f64_of(key, value)?,
            "radial.eps_factor" => self.radial.eps_factor = f64_of(key, value)?,
            "scf.damping" => self.scf.damping = f64_of(key, value)?,
            "scf.max_iter" => self.scf.max_iter = usize_of(key, value)?,
            "scf.residual_tol" => self.scf.residual_tol = f64_of(key, value)?,
            "scf.mass_tol" => self.scf.mass_tol = f64_of(key, value)?,
            "scf.n_guard" => self.scf.n_guard = Some(f64_of(key, value)?),
            "scf.nr" => self.scf.nr = usize_of(key, value)?,
            "scf.nz" => self.scf.nz = usize_of(key, value)?,
            "scf.multipole_order" => self.scf.multipole_order = usize_of(key, value)?,
            "threads" => self.threads = Some(usize_of(key, value)?),
            other => return Err(Error::Config(format!("unknown key: {other}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.radial.rtol <= 0.0 || self.radial.atol_scale <= 0.0 {
            return Err(Error::Config("radial tolerances must be > 0".into()));
        }
        if self.radial.r_max_factor <= 1.0 || self.radial.eps_factor <= 0.0 {
            return Err(Error::Config("radial scale factors out of range".into()));
        }
        self.scf.validate()?;
        if self.scf.nr < 17 || self.scf.nz < 17 {
            return Err(Error::Config("scf grid must be at least 17 x 17".into()));
        }
        Ok(())
    }
}
