use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Vpns,
    Epns,
    Sweep,
    KineticOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub d: usize,
    pub n: usize,
    #[serde(default = "default_n_v")]
    pub n_v: usize,
    /// Velocity box half-width; defaults by σ when absent.
    #[serde(default, rename = "V", alias = "v_max")]
    pub v_max: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    pub sigma: f64,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub epsilon_list: Option<Vec<f64>>,
    #[serde(default = "default_delta")]
    pub delta_floor: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "default_cutoff")]
    pub mode_cutoff: usize,
    /// Weight of the √ε velocity offset for mis-prepared data; 0 is exact.
    #[serde(default)]
    pub mis_prepared: f64,
    /// Constant velocity added to both u₀ and v₀.
    #[serde(default)]
    pub background_velocity: [f64; 2],
    /// σ = 0 only: start from a velocity Dirac instead of variance ε.
    #[serde(default)]
    pub cold: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_end: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_cadence")]
    pub cadence: usize,
    /// Sobolev index of the limit-system norm tracker.
    #[serde(default = "default_tracker_s")]
    pub tracker_s: f64,
    /// Thresholds checked by `--check`; a `_min` suffix marks a lower bound.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default = "default_true")]
    pub snapshots: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { cadence: default_cadence(), tracker_s: default_tracker_s(), tolerances: BTreeMap::new(), snapshots: true }
    }
}

fn default_n_v() -> usize {
    32
}
fn default_delta() -> f64 {
    1e-8
}
fn default_amplitude() -> f64 {
    0.1
}
fn default_cutoff() -> usize {
    2
}
fn default_cadence() -> usize {
    1
}
fn default_tracker_s() -> f64 {
    3.0
}
fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub grid: GridConfig,
    pub physics: PhysicsConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self, HarnessError> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: Self = table.try_into().map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text, overrides)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    pub fn steps(&self) -> usize {
        (self.time.t_end / self.time.dt).round() as usize
    }

    /// ε of a single run; the first list entry when only a list is given.
    pub fn epsilon(&self) -> f64 {
        self.physics.epsilon.or_else(|| self.physics.epsilon_list.as_ref().and_then(|l| l.first().copied())).unwrap_or(1.0)
    }

    /// Explicit V, else 8 for σ > 0 and 6 max|u₀| + 4 for σ = 0.
    pub fn v_max(&self, max_u0: f64) -> f64 {
        self.grid.v_max.unwrap_or(if self.physics.sigma > 0.0 { 8.0 } else { 6.0 * max_u0 + 4.0 })
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        let (g, p, t) = (&self.grid, &self.physics, &self.time);
        if !(g.d == 1 || g.d == 2) {
            return bad(format!("grid.d must be 1 or 2, got {}", g.d));
        }
        if g.n < 8 || g.n % 2 != 0 {
            return bad(format!("grid.n must be even and at least 8, got {}", g.n));
        }
        if g.n_v < 4 || g.n_v % 2 != 0 {
            return bad(format!("grid.n_v must be even and at least 4, got {}", g.n_v));
        }
        if let Some(v) = g.v_max {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("grid.V must be positive, got {v}"));
            }
        }
        if self.mode != Mode::KineticOnly && g.d != 2 {
            return bad("the coupled and limit solvers need grid.d = 2".into());
        }
        if !(p.sigma >= 0.0 && p.sigma.is_finite()) {
            return bad(format!("physics.sigma must be non-negative, got {}", p.sigma));
        }
        if !(p.delta_floor > 0.0) {
            return bad(format!("physics.delta_floor must be positive, got {}", p.delta_floor));
        }
        if !(0.0..0.5).contains(&p.amplitude) {
            return bad(format!("physics.amplitude must lie in [0, 0.5), got {}", p.amplitude));
        }
        if p.mode_cutoff == 0 || 3 * p.mode_cutoff > g.n {
            return bad(format!("physics.mode_cutoff must lie in 1..={}, got {}", g.n / 3, p.mode_cutoff));
        }
        if p.cold && p.sigma > 0.0 {
            return bad("physics.cold needs sigma = 0".into());
        }
        match self.mode {
            Mode::Sweep => {
                let list = match &p.epsilon_list {
                    Some(l) => l,
                    None => return bad("sweep needs physics.epsilon_list".into()),
                };
                if list.len() < 3 {
                    return bad(format!("physics.epsilon_list needs at least 3 entries, got {}", list.len()));
                }
                if list.iter().any(|e| !(*e > 0.0)) || list.windows(2).any(|w| w[1] >= w[0]) {
                    return bad("physics.epsilon_list must be positive and strictly decreasing".into());
                }
            }
            Mode::Vpns | Mode::KineticOnly => match p.epsilon {
                Some(e) if e > 0.0 && e.is_finite() => {}
                _ => return bad("physics.epsilon must be set and positive".into()),
            },
            Mode::Epns => {}
        }
        if !(t.dt > 0.0 && t.dt.is_finite()) {
            return bad(format!("time.dt must be positive, got {}", t.dt));
        }
        if !(t.t_end >= 0.0 && t.t_end.is_finite()) {
            return bad(format!("time.t_end must be non-negative, got {}", t.t_end));
        }
        let steps = self.steps();
        if (steps as f64 * t.dt - t.t_end).abs() > 1e-9 * t.t_end.max(t.dt) {
            return bad(format!("time.t_end = {} is not a whole number of steps of {}", t.t_end, t.dt));
        }
        if self.output.cadence == 0 || (steps > 0 && !steps.is_multiple_of(self.output.cadence)) {
            return bad(format!("output.cadence = {} must divide the {steps} steps", self.output.cadence));
        }
        Ok(())
    }
}

/// `section.key=value` or a bare `key=value` naming a unique field; the
/// value is parsed as TOML, falling back to a string.
fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), HarnessError> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| HarnessError::Config(format!("override '{spec}' is not key=value")))?;
    let (key, raw) = (key.trim(), raw.trim());
    let value = format!("x = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("x"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let path: Vec<&str> = key.split('.').collect();
    let path: Vec<String> = match path.as_slice() {
        [k] if *k == "mode" => vec![k.to_string()],
        [k] => {
            let owner = SECTION_KEYS
                .iter()
                .find(|(_, keys)| keys.contains(k))
                .map(|(s, _)| *s)
                .ok_or_else(|| HarnessError::Config(format!("unknown override key '{k}'")))?;
            vec![owner.to_string(), k.to_string()]
        }
        _ => path.iter().map(|s| s.to_string()).collect(),
    };
    let mut cur = table;
    for seg in &path[..path.len() - 1] {
        cur = cur
            .entry(seg.clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| HarnessError::Config(format!("'{seg}' is not a section")))?;
    }
    cur.insert(path[path.len() - 1].clone(), value);
    Ok(())
}

const SECTION_KEYS: [(&str, &[&str]); 4] = [
    ("grid", &["d", "n", "n_v", "V", "v_max"]),
    ("physics", &["sigma", "epsilon", "epsilon_list", "delta_floor", "seed", "amplitude", "mode_cutoff", "mis_prepared", "background_velocity", "cold"]),
    ("time", &["dt", "t_end"]),
    ("output", &["cadence", "tracker_s", "snapshots"]),
];

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
mode = "vpns"
[grid]
d = 2
n = 16
n_v = 16
[physics]
sigma = 1.0
epsilon = 0.1
[time]
dt = 0.01
t_end = 0.1
[output]
cadence = 5
"#;

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::from_toml_str(BASE, &[]).unwrap();
        assert_eq!(c.steps(), 10);
        assert_eq!(c.v_max(0.3), 8.0);
        assert_eq!(c.physics.delta_floor, 1e-8);
    }

    #[test]
    fn overrides_by_path_and_bare_key() {
        let c = ExperimentConfig::from_toml_str(BASE, &["physics.sigma=0".into(), "V=3.5".into(), "mode=epns".into()]).unwrap();
        assert_eq!(c.physics.sigma, 0.0);
        assert_eq!(c.grid.v_max, Some(3.5));
        assert_eq!(c.mode, Mode::Epns);
        assert!(ExperimentConfig::from_toml_str(BASE, &["bogus=1".into()]).is_err());
    }

    #[test]
    fn rejects_inconsistent_time_and_cadence() {
        assert!(ExperimentConfig::from_toml_str(BASE, &["cadence=3".into()]).is_err());
        assert!(ExperimentConfig::from_toml_str(BASE, &["t_end=0.105".into()]).is_err());
        assert!(ExperimentConfig::from_toml_str(BASE, &["t_end=0".into()]).is_ok());
    }

    #[test]
    fn sweep_list_rules() {
        let ok = ["mode=sweep".to_string(), "epsilon_list=[0.2, 0.1, 0.05]".into()];
        assert!(ExperimentConfig::from_toml_str(BASE, &ok).is_ok());
        assert!(ExperimentConfig::from_toml_str(BASE, &["mode=sweep".into(), "epsilon_list=[0.1, 0.2, 0.05]".into()]).is_err());
        assert!(ExperimentConfig::from_toml_str(BASE, &["mode=sweep".into(), "epsilon_list=[0.2, 0.1]".into()]).is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let c = ExperimentConfig::from_toml_str(BASE, &[]).unwrap();
        let again = ExperimentConfig::from_toml_str(&c.to_toml_string(), &[]).unwrap();
        assert_eq!(c, again);
    }
}
