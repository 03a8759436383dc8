// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use rabichain::omatrix::SignPattern;
use rabichain::{ModelParams, SubspaceLabel};
use serde::Deserialize;

/// Options that may come from the `options` object of a config file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileOptions {
    pub tol: Option<f64>,
    pub blocks: Option<usize>,
    pub levels: Option<usize>,
    pub s_min: Option<f64>,
    pub s_max: Option<f64>,
    pub steps: Option<usize>,
    pub subspace: Option<String>,
    pub snap: Option<String>,
    pub window: Option<(f64, f64)>,
    pub line_tol: Option<f64>,
    pub require_converged: Option<bool>,
    pub allow_unstable: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WrappedConfig {
    model: ModelParams,
    #[serde(default)]
    options: FileOptions,
}

/// Flags shared by every subcommand. Flags override the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON config: bare model parameters or {"model": ..., "options": ...}
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the main output here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Emit JSON instead of text
    #[arg(long, global = true)]
    pub json: bool,
    #[arg(long, global = true)]
    pub n_qubits: Option<usize>,
    #[arg(long, global = true)]
    pub photon_order: Option<usize>,
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    /// Comma-separated g_1,...,g_N
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub couplings: Option<Vec<f64>>,
    /// Comma-separated Δ_1,...,Δ_N
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub splittings: Option<Vec<f64>>,
    /// Set g_1 so that this sign pattern (e.g. "+--") sums to exactly zero
    #[arg(long, global = true)]
    pub snap: Option<String>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub blocks: Option<usize>,
    #[arg(long, global = true)]
    pub levels: Option<usize>,
    #[arg(long, global = true)]
    pub s_min: Option<f64>,
    #[arg(long, global = true)]
    pub s_max: Option<f64>,
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Chain label "i,±", e.g. "0,+" or "1,-"
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub subspace: Option<String>,
    #[arg(long, global = true)]
    pub require_converged: bool,
    #[arg(long, global = true)]
    pub allow_unstable: bool,
}

/// Fully merged and validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelParams,
    pub tol: Option<f64>,
    pub blocks: Option<usize>,
    pub levels: Option<usize>,
    pub s_min: Option<f64>,
    pub s_max: Option<f64>,
    pub steps: Option<usize>,
    pub subspace: Option<SubspaceLabel>,
    pub window: Option<(f64, f64)>,
    pub line_tol: Option<f64>,
    pub require_converged: bool,
    pub allow_unstable: bool,
    pub json: bool,
    pub out: Option<PathBuf>,
}

fn read_config(path: &Path) -> Result<(Option<ModelParams>, FileOptions)> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if value.get("model").is_some() {
        let w: WrappedConfig =
            serde_json::from_value(value).with_context(|| format!("reading {}", path.display()))?;
        Ok((Some(w.model), w.options))
    } else {
        let m: ModelParams =
            serde_json::from_value(value).with_context(|| format!("reading {}", path.display()))?;
        Ok((Some(m), FileOptions::default()))
    }
}

fn positive(name: &str, v: Option<f64>) -> Result<()> {
    if let Some(x) = v {
        if !(x.is_finite() && x > 0.0) {
            bail!("{name} must be positive, got {x}");
        }
    }
    Ok(())
}

impl CommonArgs {
    pub fn resolve(&self, window: Option<(f64, f64)>) -> Result<RunConfig> {
        let (file_model, opts) = match &self.config {
            Some(p) => read_config(p)?,
            None => (None, FileOptions::default()),
        };
        let mut model = match file_model {
            Some(m) => m,
            None => {
                let (Some(g), Some(d)) = (&self.couplings, &self.splittings) else {
                    bail!("no model: pass --config or both --couplings and --splittings");
                };
                ModelParams {
                    n_qubits: g.len(),
                    photon_order: 1,
                    omega: 1.0,
                    couplings: g.clone(),
                    splittings: d.clone(),
                }
            }
        };
        if let Some(n) = self.n_qubits {
            model.n_qubits = n;
        }
        if let Some(m) = self.photon_order {
            model.photon_order = m;
        }
        if let Some(w) = self.omega {
            model.omega = w;
        }
        if let Some(g) = &self.couplings {
            model.couplings = g.clone();
        }
        if let Some(d) = &self.splittings {
            model.splittings = d.clone();
        }
        if let Some(pat) = self.snap.as_ref().or(opts.snap.as_ref()) {
            let p = SignPattern::parse(pat)?;
            model.couplings = p.snap(&model.couplings)?;
        }
        model.validate()?;

        let subspace = self
            .subspace
            .as_ref()
            .or(opts.subspace.as_ref())
            .map(|s| SubspaceLabel::parse(s))
            .transpose()?;
        if let Some(l) = subspace {
            l.validate(model.photon_order)?;
        }
        let cfg = RunConfig {
            tol: self.tol.or(opts.tol),
            blocks: self.blocks.or(opts.blocks),
            levels: self.levels.or(opts.levels),
            s_min: self.s_min.or(opts.s_min),
            s_max: self.s_max.or(opts.s_max),
            steps: self.steps.or(opts.steps),
            subspace,
            window: window.or(opts.window),
            line_tol: opts.line_tol,
            require_converged: self.require_converged || opts.require_converged.unwrap_or(false),
            allow_unstable: self.allow_unstable || opts.allow_unstable.unwrap_or(false),
            json: self.json,
            out: self.out.clone(),
            model,
        };
        positive("tol", cfg.tol)?;
        positive("line_tol", cfg.line_tol)?;
        if cfg.blocks == Some(0) || cfg.levels == Some(0) {
            bail!("blocks and levels must be positive");
        }
        if let Some((lo, hi)) = cfg.window {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                bail!("window [{lo}, {hi}] is not a finite interval");
            }
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn bare_and_wrapped_configs() {
        let bare =
            file(r#"{"n_qubits":2,"photon_order":1,"couplings":[0.1,0.1],"splittings":[0.6,0.4]}"#);
        let args = CommonArgs {
            config: Some(bare.path().into()),
            ..Default::default()
        };
        let cfg = args.resolve(None).unwrap();
        assert_eq!(cfg.model.omega, 1.0);
        assert_eq!(cfg.blocks, None);

        let wrapped = file(
            r#"{"model":{"n_qubits":2,"photon_order":2,"couplings":[0.1,0.1],"splittings":[1.6,0.4]},
                "options":{"blocks":30,"subspace":"1,+","window":[0,4]}}"#,
        );
        let args = CommonArgs {
            config: Some(wrapped.path().into()),
            blocks: Some(7),
            ..Default::default()
        };
        let cfg = args.resolve(None).unwrap();
        assert_eq!(cfg.blocks, Some(7));
        assert_eq!(cfg.subspace.unwrap().initial, 1);
        assert_eq!(cfg.window, Some((0.0, 4.0)));
    }

    #[test]
    fn unknown_keys_rejected() {
        let f = file(
            r#"{"model":{"n_qubits":1,"photon_order":1,"couplings":[0.1],"splittings":[0.6]},"options":{"bogus":1}}"#,
        );
        let args = CommonArgs {
            config: Some(f.path().into()),
            ..Default::default()
        };
        assert!(args.resolve(None).is_err());
    }

    #[test]
    fn flags_only_and_snap() {
        let args = CommonArgs {
            couplings: Some(vec![0.0, 0.2, 0.3]),
            splittings: Some(vec![1.0, 1.0, 1.0]),
            snap: Some("+--".into()),
            ..Default::default()
        };
        let cfg = args.resolve(None).unwrap();
        assert_eq!(cfg.model.n_qubits, 3);
        assert_eq!(cfg.model.couplings[0], 0.2 + 0.3);
    }

    #[test]
    fn invalid_values_rejected() {
        let base = CommonArgs {
            couplings: Some(vec![0.1]),
            splittings: Some(vec![0.1]),
            ..Default::default()
        };
        assert!(CommonArgs {
            tol: Some(-1.0),
            ..base.clone()
        }
        .resolve(None)
        .is_err());
        assert!(CommonArgs {
            subspace: Some("1,+".into()),
            ..base.clone()
        }
        .resolve(None)
        .is_err());
        assert!(CommonArgs {
            omega: Some(0.0),
            ..base.clone()
        }
        .resolve(None)
        .is_err());
        assert!(CommonArgs::default().resolve(None).is_err());
    }
}
