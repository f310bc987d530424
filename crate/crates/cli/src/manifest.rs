//! Flat `key=value` record of a run, written next to its CSV output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use qdiff_core::constants::{HBAR, K_B, M_DEUTERIUM, M_ELECTRON, M_HYDROGEN, M_MUON, M_TRITIUM, N_A};

use crate::format::sci;

#[derive(Debug)]
pub struct RunManifest {
    command: String,
    params: Vec<(String, String)>,
    outputs: Vec<String>,
    started: Instant,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            params: Vec::new(),
            outputs: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        self.params.push((key.to_string(), value.into()));
        self
    }

    pub fn num(&mut self, key: &str, value: f64) -> &mut Self {
        self.param(key, sci(value))
    }

    pub fn output(&mut self, file: &Path) {
        let name = file
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        self.outputs.push(name);
    }

    /// Renders the manifest. Everything but `wall_time_s` is a function of
    /// the inputs.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command={}", self.command);
        let _ = writeln!(s, "version={}", env!("CARGO_PKG_VERSION"));
        for (k, v) in &self.params {
            let _ = writeln!(s, "param.{k}={v}");
        }
        for (k, v) in [
            ("hbar", HBAR),
            ("k_b", K_B),
            ("n_a", N_A),
            ("m_electron", M_ELECTRON),
            ("m_muon", M_MUON),
            ("m_hydrogen", M_HYDROGEN),
            ("m_deuterium", M_DEUTERIUM),
            ("m_tritium", M_TRITIUM),
        ] {
            let _ = writeln!(s, "const.{k}={}", sci(v));
        }
        for (i, o) in self.outputs.iter().enumerate() {
            let _ = writeln!(s, "output.{i}={o}");
        }
        let _ = writeln!(s, "wall_time_s={:.3}", self.started.elapsed().as_secs_f64());
        s
    }

    pub fn write(&self, dir: &Path, stem: &str) -> Result<PathBuf> {
        let path = dir.join(format!("{stem}.manifest"));
        std::fs::write(&path, self.render()).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
