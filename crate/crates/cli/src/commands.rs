// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use rabichain::darksolver::{
    build_state, catalog_match, generic_scan, verify_state, ScanOptions, StateJson, CATALOG_TOL,
    VERIFY_TOL,
};
use rabichain::omatrix::{sign_pattern_eigs, zero_modes, ZERO_MODE_TOL};
use rabichain::spectrum::{detect_horizontal, stability_check, sweep, SweepOptions, LINE_TOL};
use rabichain::{assemble_chain, parity_chain_basis, DarkLikeState, Error, QubitConfig};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{CommonArgs, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_STRICT: i32 = 2;
pub const EXIT_ABSENT: i32 = 3;

pub fn exit_code_for(e: &anyhow::Error) -> i32 {
    match e.downcast_ref::<Error>() {
        Some(Error::Stability(_) | Error::NotConverged(_)) => EXIT_STRICT,
        _ => EXIT_CONFIG,
    }
}

/// Writes to `path` through a temporary file in the same directory, or to stdout.
pub fn emit(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => {
            let dir = match p.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)
                .with_context(|| format!("creating a temporary file in {}", dir.display()))?;
            tmp.write_all(content.as_bytes())?;
            tmp.persist(p)
                .with_context(|| format!("writing {}", p.display()))?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn physical(v: &[f64], omega: f64) -> Vec<f64> {
    v.iter().map(|x| x * omega).collect()
}

pub fn chains(args: &CommonArgs) -> Result<i32> {
    let cfg = args.resolve(None)?;
    let p = &cfg.model;
    let blocks = cfg.blocks.unwrap_or(4);
    let basis = parity_chain_basis(p.n_qubits)?;
    let chains = cfg
        .subspace
        .map_or_else(|| p.subspaces(), |l| vec![l])
        .into_iter()
        .map(|label| assemble_chain(p, label, blocks))
        .collect::<rabichain::Result<Vec<_>>>()?;

    let text = if cfg.json {
        let configs = |s: &[QubitConfig]| s.iter().map(|q| q.to_string()).collect::<Vec<_>>();
        let chains: Vec<Value> = chains
            .iter()
            .map(|c| {
                let blocks: Vec<Value> = (0..c.n_blocks)
                    .map(|j| {
                        json!({
                            "photon": c.photon_at(j),
                            "sector": c.sector_at(j).symbol().to_string(),
                            "diagonal": physical(&c.diag_blocks[j], p.omega),
                            "coupling_factor": c.offdiag_factors.get(j),
                        })
                    })
                    .collect();
                json!({ "subspace": c.label, "blocks": blocks })
            })
            .collect();
        to_json(&json!({
            "n_qubits": p.n_qubits,
            "photon_order": p.photon_order,
            "block_dim": basis.block_dim(),
            "plus": configs(basis.plus()),
            "minus": configs(basis.minus()),
            "chains": chains,
        }))
    } else {
        let arrows = |s: &[QubitConfig]| s.iter().map(|q| q.arrows()).collect::<Vec<_>>().join(" ");
        let mut t = String::new();
        writeln!(
            t,
            "N = {}, M = {}, block dimension {}",
            p.n_qubits,
            p.photon_order,
            basis.block_dim()
        )?;
        writeln!(t, "sector +: {}", arrows(basis.plus()))?;
        writeln!(t, "sector -: {}", arrows(basis.minus()))?;
        for c in &chains {
            writeln!(t, "chain {}:", c.label)?;
            for j in 0..c.n_blocks {
                writeln!(
                    t,
                    "  n = {:<4} sector {}  diagonal {:?}",
                    c.photon_at(j),
                    c.sector_at(j),
                    physical(&c.diag_blocks[j], p.omega)
                )?;
            }
        }
        t
    };
    emit(cfg.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

pub fn omatrix(args: &CommonArgs) -> Result<i32> {
    let cfg = args.resolve(None)?;
    let p = &cfg.model;
    let tol = cfg.tol.unwrap_or(ZERO_MODE_TOL);
    let eigs = sign_pattern_eigs(p.n_qubits, &p.couplings)?;
    let modes = zero_modes(p.n_qubits, &p.couplings, tol)?;
    let text = if cfg.json {
        let rows: Vec<Value> = eigs
            .iter()
            .map(|(pat, value, v)| {
                json!({
                    "pattern": pat.to_string(),
                    "expression": pat.expression(),
                    "value": value,
                    "vector": v.iter().collect::<Vec<_>>(),
                })
            })
            .collect();
        to_json(&json!({
            "couplings": p.couplings,
            "patterns": rows,
            "zero_modes": modes.patterns.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
        }))
    } else {
        let mut t = String::new();
        writeln!(t, "couplings {:?}", p.couplings)?;
        for (pat, value, v) in &eigs {
            let signs: String = v.iter().map(|x| if *x > 0.0 { '+' } else { '-' }).collect();
            writeln!(t, "{pat:<8} {:<24} {value:<24} {signs}", pat.expression())?;
        }
        let zm: Vec<String> = modes.patterns.iter().map(|m| m.to_string()).collect();
        writeln!(
            t,
            "zero modes: {}",
            if zm.is_empty() {
                "none".into()
            } else {
                zm.join(" ")
            }
        )?;
        t
    };
    emit(cfg.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn state_value(s: &DarkLikeState, residual: f64) -> Value {
    let mut v = serde_json::to_value(s.to_json()).expect("serializable");
    v["residual"] = json!(residual);
    v
}

pub fn dark_find(args: &CommonArgs, require: bool) -> Result<i32> {
    let cfg = args.resolve(None)?;
    let p = &cfg.model;
    let conds = catalog_match(p, cfg.tol.unwrap_or(CATALOG_TOL))?;
    let mut found = 0usize;
    let mut entries = Vec::new();
    let mut text = String::new();
    for c in &conds {
        let constraints: Vec<String> = c.constraints.iter().map(|x| x.to_string()).collect();
        let mut entry = json!({
            "family": c.id,
            "subspace": c.label,
            "energy": c.energy(p.omega),
            "degeneracy": c.degeneracy,
            "constraints": constraints,
        });
        writeln!(text, "{} on {} at E = {}", c.id, c.label, c.energy(p.omega))?;
        match build_state(c, p) {
            Ok(states) => {
                let mut out = Vec::new();
                for s in &states {
                    let r = verify_state(p, s, VERIFY_TOL)?;
                    writeln!(text, "  residual {:.3e}", r.residual)?;
                    out.push(state_value(s, r.residual));
                    found += 1;
                }
                entry["states"] = Value::Array(out);
            }
            Err(e) => {
                writeln!(text, "  not built: {e}")?;
                entry["error"] = json!(e.to_string());
            }
        }
        entries.push(entry);
    }
    if conds.is_empty() {
        writeln!(text, "no catalog family matches")?;
    }
    let body = if cfg.json {
        to_json(&json!({ "conditions": entries }))
    } else {
        text
    };
    emit(cfg.out.as_deref(), &body)?;
    Ok(if require && found == 0 {
        EXIT_ABSENT
    } else {
        EXIT_OK
    })
}

pub fn dark_scan(args: &CommonArgs, window: Option<(f64, f64)>, require: bool) -> Result<i32> {
    let cfg: RunConfig = args.resolve(window)?;
    let p = &cfg.model;
    let m = p.photon_order as f64;
    let mut opts = ScanOptions::with_window(0.0, 2.0 * m * p.omega);
    if let Some(w) = cfg.window {
        opts.window = w;
    }
    if let Some(t) = cfg.tol {
        opts.tol = t;
    }
    let mut found = 0usize;
    let mut scans = Vec::new();
    let mut text = String::new();
    for label in cfg.subspace.map_or_else(|| p.subspaces(), |l| vec![l]) {
        let out = generic_scan(p, label, &opts)?;
        writeln!(text, "chain {label}: {} zero modes", out.zero_mode_dim)?;
        let states: Vec<Value> = out
            .states
            .iter()
            .map(|s| {
                let _ = writeln!(
                    text,
                    "  E = {} (degeneracy {}, residual {:.3e})",
                    s.state.energy, s.degeneracy, s.residual
                );
                let mut v = state_value(&s.state, s.residual);
                v["degeneracy"] = json!(s.degeneracy);
                v["ratio"] = json!(s.ratio);
                v
            })
            .collect();
        for (e, r) in &out.inconclusive {
            writeln!(text, "  inconclusive near E = {e} (ratio {r:.3e})")?;
        }
        found += states.len();
        scans.push(json!({
            "subspace": label,
            "zero_mode_dim": out.zero_mode_dim,
            "states": states,
            "inconclusive": out.inconclusive,
        }));
    }
    let body = if cfg.json {
        to_json(&json!({ "scans": scans }))
    } else {
        text
    };
    emit(cfg.out.as_deref(), &body)?;
    Ok(if require && found == 0 {
        EXIT_ABSENT
    } else {
        EXIT_OK
    })
}

/// Every object carrying `amplitudes`, stripped to the fields of [`StateJson`].
fn collect_states(v: &Value, out: &mut Vec<StateJson>) -> Result<()> {
    const KEYS: [&str; 5] = ["subspace", "energy", "family", "max_photon", "amplitudes"];
    match v {
        Value::Object(m) if m.contains_key("amplitudes") => {
            let trimmed: serde_json::Map<_, _> = m
                .iter()
                .filter(|(k, _)| KEYS.contains(&k.as_str()))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect();
            out.push(serde_json::from_value(Value::Object(trimmed))?);
        }
        Value::Object(m) => {
            for v in m.values() {
                collect_states(v, out)?;
            }
        }
        Value::Array(a) => {
            for v in a {
                collect_states(v, out)?;
            }
        }
        _ => {}
    }
    Ok(())
}

pub fn dark_verify(args: &CommonArgs, state: &Path) -> Result<i32> {
    let cfg = args.resolve(None)?;
    let text =
        std::fs::read_to_string(state).with_context(|| format!("reading {}", state.display()))?;
    let value: Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", state.display()))?;
    let mut wires = Vec::new();
    collect_states(&value, &mut wires).with_context(|| format!("parsing {}", state.display()))?;
    if wires.is_empty() {
        return Err(Error::InvalidParameter(format!("{} holds no states", state.display())).into());
    }
    let tol = cfg.tol.unwrap_or(VERIFY_TOL);
    let mut reports = Vec::with_capacity(wires.len());
    for w in &wires {
        let s = DarkLikeState::from_json(w)?;
        reports.push(verify_state(&cfg.model, &s, tol)?);
    }
    let all = reports.iter().all(|r| r.passed);
    let body = if cfg.json {
        if reports.len() == 1 {
            to_json(&reports[0])
        } else {
            to_json(&reports)
        }
    } else {
        let mut out = String::new();
        for r in &reports {
            writeln!(
                out,
                "{}: residual {:.3e}, measured energy {}, claimed {}",
                if r.passed { "pass" } else { "fail" },
                r.residual,
                r.measured_energy,
                r.claimed_energy
            )?;
        }
        out
    };
    emit(cfg.out.as_deref(), &body)?;
    Ok(if all { EXIT_OK } else { EXIT_ABSENT })
}

pub fn spectrum(args: &CommonArgs, report: Option<&Path>) -> Result<i32> {
    let cfg = args.resolve(None)?;
    let p = &cfg.model;
    let blocks = cfg.blocks.unwrap_or(40);
    let opts = SweepOptions {
        blocks,
        levels: cfg
            .levels
            .unwrap_or_else(|| (blocks * p.block_dim()).min(20)),
        allow_unstable: cfg.allow_unstable,
        require_converged: cfg.require_converged,
        subspaces: cfg.subspace.map(|l| vec![l]),
        ..SweepOptions::default()
    };
    let sw = sweep(
        p,
        cfg.s_min.unwrap_or(0.0),
        cfg.s_max.unwrap_or(1.0),
        cfg.steps.unwrap_or(21),
        &opts,
    )?;
    let lines = detect_horizontal(&sw, cfg.line_tol.unwrap_or(LINE_TOL));
    let summary = json!({
        "blocks": sw.blocks,
        "doubled_blocks": sw.doubled_blocks,
        "levels": sw.levels,
        "points": sw.points.len(),
        "cuts": sw.cuts,
        "lines": lines,
    });
    if let Some(path) = report {
        emit(Some(path), &to_json(&summary))?;
    }
    if cfg.json {
        if let Some(out) = &cfg.out {
            emit(Some(out), &sw.to_csv())?;
        }
        emit(None, &to_json(&summary))?;
    } else {
        emit(cfg.out.as_deref(), &sw.to_csv())?;
        for c in &sw.cuts {
            eprintln!(
                "skipped s = {}: Σg = {} is not below ω/2 ({:?})",
                c.s, c.stability.lambda_max, c.stability.regime
            );
        }
        for l in &lines {
            eprintln!(
                "horizontal line E = {} in chain {} (max deviation {:.1e})",
                l.value, l.label, l.max_deviation
            );
        }
    }
    Ok(EXIT_OK)
}

pub fn stability(args: &CommonArgs) -> Result<i32> {
    let cfg = args.resolve(None)?;
    let r = stability_check(&cfg.model);
    let body = if cfg.json {
        to_json(&r)
    } else {
        format!(
            "{:?}: Σg = {}, threshold ω/2 = {}\n",
            r.regime, r.lambda_max, r.threshold
        )
    };
    emit(cfg.out.as_deref(), &body)?;
    if cfg.require_converged && !r.is_convergent() {
        eprintln!("error: model is {:?}", r.regime);
        return Ok(EXIT_STRICT);
    }
    Ok(EXIT_OK)
}
