use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::diagnostics::DiagnosticsRecord;
use crate::initdata::PreparationGaps;

use super::output::metrics_json;
use super::{run_vpns, vpns_csv, write_summary, ExperimentConfig, HarnessError, Mode};

/// Least-squares line through (log ε, log value).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: Vec<(f64, f64)>,
}

pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit, HarnessError> {
    if points.len() < 3 {
        return Err(HarnessError::Config(format!("a rate fit needs at least 3 points, got {}", points.len())));
    }
    if points.iter().any(|(e, v)| !(*e > 0.0 && *v > 0.0 && e.is_finite() && v.is_finite())) {
        return Err(HarnessError::Config("rate fits need positive finite points".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(HarnessError::Config("rate fits need distinct epsilons".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Ok(RateFit { slope, intercept, r2, points: points.to_vec() })
}

#[derive(Clone, Debug)]
pub struct SweepMember {
    pub epsilon: f64,
    pub records: Vec<DiagnosticsRecord>,
    pub metrics: BTreeMap<String, f64>,
    pub gaps: PreparationGaps,
}

#[derive(Clone, Debug)]
pub struct SweepSummary {
    pub sigma: f64,
    pub members: Vec<SweepMember>,
    pub fits: BTreeMap<String, RateFit>,
    /// Why the sweep stopped early, if it did.
    pub failure: Option<String>,
}

/// Metrics fitted against ε whenever all members report positive values.
const FIT_METRICS: [&str; 4] = ["sup_modulated", "sup_rel_entropy_maxwellian", "sup_stress_defect", "final_stress_defect"];

fn fits_for(members: &[(f64, BTreeMap<String, f64>)]) -> BTreeMap<String, RateFit> {
    FIT_METRICS
        .iter()
        .filter_map(|name| {
            let pts: Option<Vec<(f64, f64)>> = members.iter().map(|(e, m)| m.get(*name).map(|v| (*e, *v))).collect();
            Some((name.to_string(), fit_rate(&pts?).ok()?))
        })
        .collect()
}

impl SweepSummary {
    /// Flat metrics for `--check`: per-fit slope and r², worst member values.
    pub fn metrics(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        for (name, fit) in &self.fits {
            m.insert(format!("slope_{name}"), fit.slope);
            m.insert(format!("r2_{name}"), fit.r2);
        }
        let worst = |k: &str| self.members.iter().filter_map(|mm| mm.metrics.get(k).copied()).fold(f64::NEG_INFINITY, f64::max);
        m.insert("max_entropy_residual_rel".into(), worst("max_entropy_residual_rel"));
        m.insert("max_mass_drift_rel".into(), worst("mass_drift_rel"));
        m.insert("complete".into(), if self.failure.is_none() { 1.0 } else { 0.0 });
        m
    }

    pub fn to_json(&self) -> Value {
        json!({
            "mode": Mode::Sweep,
            "sigma": self.sigma,
            "complete": self.failure.is_none(),
            "error": self.failure,
            "members": self.members.iter().map(|m| json!({
                "epsilon": m.epsilon,
                "gaps": m.gaps,
                "metrics": metrics_json(&m.metrics),
            })).collect::<Vec<_>>(),
            "fits": self.fits,
        })
    }
}

/// Runs every ε of the list (in parallel; members share nothing) and fits
/// rates. A failing member stops the sweep; finished members are kept.
pub fn run_sweep(cfg: &ExperimentConfig) -> (SweepSummary, Option<HarnessError>) {
    let list = cfg.physics.epsilon_list.clone().unwrap_or_default();
    let results: Vec<Result<SweepMember, HarnessError>> = list
        .par_iter()
        .map(|&eps| {
            let mut member_cfg = cfg.clone();
            member_cfg.physics.epsilon = Some(eps);
            let run = run_vpns(&member_cfg)?;
            Ok(SweepMember { epsilon: eps, metrics: run.metrics(), gaps: run.gaps, records: run.records })
        })
        .collect();
    let mut members = Vec::new();
    let mut error = None;
    for r in results {
        match r {
            Ok(m) if error.is_none() => members.push(m),
            Ok(_) => {}
            Err(e) => {
                if error.is_none() {
                    error = Some(e);
                }
            }
        }
    }
    let pairs: Vec<(f64, BTreeMap<String, f64>)> = members.iter().map(|m| (m.epsilon, m.metrics.clone())).collect();
    let fits = if error.is_none() { fits_for(&pairs) } else { BTreeMap::new() };
    let summary = SweepSummary { sigma: cfg.physics.sigma, members, fits, failure: error.as_ref().map(|e| e.to_string()) };
    (summary, error)
}

/// Per-member CSVs under `eps_<ε>/` plus `summary.json` and `config.toml`.
pub fn write_sweep_outputs(summary: &SweepSummary, cfg: &ExperimentConfig, dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("config.toml"), cfg.to_toml_string())?;
    for m in &summary.members {
        let sub = dir.join(format!("eps_{}", m.epsilon));
        std::fs::create_dir_all(&sub)?;
        std::fs::write(sub.join("vpns.csv"), vpns_csv(&m.records, summary.sigma))?;
    }
    write_summary(&dir.join("summary.json"), &summary.to_json())
}

/// Recomputes the fits of a sweep summary from its member metrics.
pub fn refit_summary(summary: &Value) -> Result<Value, HarnessError> {
    let members = summary
        .get("members")
        .and_then(Value::as_array)
        .ok_or_else(|| HarnessError::Config("summary has no members array".into()))?;
    let mut pairs = Vec::new();
    for m in members {
        let eps = m.get("epsilon").and_then(Value::as_f64).ok_or_else(|| HarnessError::Config("member lacks epsilon".into()))?;
        let metrics: BTreeMap<String, f64> = m
            .get("metrics")
            .and_then(Value::as_object)
            .map(|o| o.iter().filter_map(|(k, v)| v.as_f64().map(|x| (k.clone(), x))).collect())
            .unwrap_or_default();
        pairs.push((eps, metrics));
    }
    let mut out = summary.clone();
    out["fits"] = serde_json::to_value(fits_for(&pairs)).map_err(|e| HarnessError::Io(e.to_string()))?;
    Ok(out)
}
