use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};

use crate::diagnostics::DiagnosticsRecord;

use super::run::write_vpns_snapshots;
use super::{EpnsRun, ExperimentConfig, HarnessError, VpnsRun};

pub const EPNS_COLUMNS: [&str; 10] = [
    "t",
    "mass",
    "kinetic",
    "coulomb",
    "fluid",
    "entropy",
    "dissipation_v",
    "dissipation_drag",
    "energy_residual",
    "tracker_s",
];

fn csv(header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

/// Kinetic diagnostics as CSV. With σ = 0 the D₁ column holds the
/// alignment dissipation and is headed `d1_degenerate`.
pub fn vpns_csv(records: &[DiagnosticsRecord], sigma: f64) -> String {
    let mut header = DiagnosticsRecord::COLUMNS;
    if sigma == 0.0 {
        header[3] = "d1_degenerate";
    }
    csv(&header, records.iter().map(|r| r.values().to_vec()))
}

pub fn epns_csv(run: &EpnsRun) -> String {
    csv(&EPNS_COLUMNS, run.rows.iter().map(|r| r.values().to_vec()))
}

fn json_num(v: f64) -> Value {
    // JSON has no NaN; non-finite values become null
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

pub(crate) fn metrics_json(m: &BTreeMap<String, f64>) -> Value {
    Value::Object(m.iter().map(|(k, v)| (k.clone(), json_num(*v))).collect())
}

pub fn write_summary(path: &Path, summary: &Value) -> Result<(), HarnessError> {
    let text = serde_json::to_string_pretty(summary).map_err(|e| HarnessError::Io(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

pub fn read_summary(path: &Path) -> Result<Value, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}

/// `vpns.csv`, `summary.json`, `config.toml` and final snapshots.
pub fn write_vpns_outputs(run: &VpnsRun, cfg: &ExperimentConfig, dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("vpns.csv"), vpns_csv(&run.records, cfg.physics.sigma))?;
    std::fs::write(dir.join("config.toml"), cfg.to_toml_string())?;
    let summary = json!({
        "mode": cfg.mode,
        "d1_form": if cfg.physics.sigma > 0.0 { "fisher" } else { "degenerate" },
        "gaps": run.gaps,
        "metrics": metrics_json(&run.metrics()),
    });
    write_summary(&dir.join("summary.json"), &summary)?;
    if cfg.output.snapshots {
        write_vpns_snapshots(run, dir, cfg)?;
    }
    Ok(())
}

pub fn write_epns_outputs(run: &EpnsRun, cfg: &ExperimentConfig, dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("epns.csv"), epns_csv(run))?;
    std::fs::write(dir.join("config.toml"), cfg.to_toml_string())?;
    write_summary(&dir.join("summary.json"), &json!({ "mode": cfg.mode, "metrics": metrics_json(&run.metrics()) }))?;
    if cfg.output.snapshots {
        let s = &run.state;
        let grid = s.u.grid();
        let mut snap = crate::spectral::Snapshot::new(grid).with_scalar("rho", &s.rho());
        for a in 0..2 {
            snap = snap.with_scalar(&format!("u{a}"), s.u.component(a)).with_scalar(&format!("v{a}"), s.v.component(a));
        }
        let t = run.rows.last().map_or(0.0, |r| r.t);
        snap.write(&dir.join("limit.snap"), t, BTreeMap::from([("sigma".to_string(), cfg.physics.sigma)]))?;
    }
    Ok(())
}

/// Compares metrics with the configured tolerances: `name` is an upper
/// bound on metric `name`, `name_min` a lower bound on it.
pub fn check_tolerances(metrics: &BTreeMap<String, f64>, tolerances: &BTreeMap<String, f64>) -> Result<(), HarnessError> {
    let mut failures = Vec::new();
    for (key, bound) in tolerances {
        let (name, lower) = match key.strip_suffix("_min") {
            Some(base) if metrics.contains_key(base) => (base, true),
            _ => (key.as_str(), false),
        };
        let value = *metrics.get(name).ok_or_else(|| HarnessError::Config(format!("tolerance '{key}' names no metric")))?;
        let ok = if lower { value >= *bound } else { value <= *bound };
        if !ok {
            failures.push(format!("{name} = {value:e} {} {bound:e}", if lower { "<" } else { ">" }));
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(HarnessError::Check(failures))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_header() {
        let r = [DiagnosticsRecord { t: 0.5, ..Default::default() }];
        assert!(vpns_csv(&r, 0.0).starts_with("t,mass,free_energy,d1_degenerate,d2,"));
        let text = vpns_csv(&r, 1.0);
        assert!(text.starts_with("t,mass,free_energy,d1,d2,entropy_residual,mod_energy,coulomb_mod,l2_u_diff,l2_v_diff,rel_entropy_maxwellian,hminus1_rho,stress_defect\n"));
        assert!(text.lines().nth(1).unwrap().starts_with("5e-1,0e0,"));
    }

    #[test]
    fn tolerance_directions() {
        let m = BTreeMap::from([("slope".to_string(), 0.5), ("err".to_string(), 1e-3)]);
        assert!(check_tolerances(&m, &BTreeMap::from([("slope_min".to_string(), 0.45), ("err".to_string(), 1e-2)])).is_ok());
        assert!(matches!(check_tolerances(&m, &BTreeMap::from([("slope_min".to_string(), 0.6)])), Err(HarnessError::Check(_))));
        assert!(matches!(check_tolerances(&m, &BTreeMap::from([("nope".to_string(), 1.0)])), Err(HarnessError::Config(_))));
    }
}
