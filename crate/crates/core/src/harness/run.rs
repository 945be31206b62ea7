use std::collections::BTreeMap;
use std::path::Path;

use crate::diagnostics::entropy_residual_series;
use crate::diagnostics::{
    dissipation_d1, dissipation_d2, free_energy, maxwellian, modulated_energy, rel_entropy_to_maxwellian, stress_defect,
    DiagnosticsRecord,
};
use crate::epns::{energy_report, epns_step, norm_tracker, stable_dt, MacroState};
use crate::fluid::{cfl_limit, ns_step, FluidSource, FluidState};
use crate::initdata::{cold_family, smooth_profiles, well_prepared_family, PreparationGaps, Profiles};
use crate::kinetic::{compute_moments, regularized_velocity, vpns_step, DistributionFunction, KineticMoments, StepParams, VelocityBox};
use crate::spectral::{h_minus1_norm, Snapshot, SpectralScalar, SpectralVector, TorusGrid};

use super::{ExperimentConfig, HarnessError, Mode};

/// A finished kinetic run: diagnostics at the output cadence and final state.
#[derive(Clone, Debug)]
pub struct VpnsRun {
    pub records: Vec<DiagnosticsRecord>,
    pub f: DistributionFunction,
    /// Fluid velocity; held fixed in kinetic-only mode.
    pub v: SpectralVector,
    pub limit: Option<MacroState>,
    pub gaps: PreparationGaps,
    pub fluid_substeps: usize,
    pub limit_substeps: usize,
    /// Smallest pre-clamp value of f seen over the run.
    pub min_f: f64,
    pub t_end: f64,
}

impl VpnsRun {
    pub fn metrics(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        let r0 = self.records.first().copied().unwrap_or_default();
        let last = self.records.last().copied().unwrap_or_default();
        let max_res = self.records.iter().map(|r| r.entropy_residual).fold(0.0, f64::max);
        let sup = |g: fn(&DiagnosticsRecord) -> f64| self.records.iter().map(g).fold(f64::NEG_INFINITY, f64::max);
        m.insert("free_energy_initial".into(), r0.free_energy);
        m.insert("max_entropy_residual".into(), max_res);
        m.insert("max_entropy_residual_rel".into(), max_res / r0.free_energy.abs().max(f64::MIN_POSITIVE));
        m.insert("sup_modulated".into(), sup(|r| r.mod_energy + r.coulomb_mod));
        m.insert("sup_rel_entropy_maxwellian".into(), sup(|r| r.rel_entropy_maxwellian));
        m.insert("sup_stress_defect".into(), sup(|r| r.stress_defect));
        m.insert("final_stress_defect".into(), last.stress_defect);
        m.insert("mass_drift_rel".into(), (last.mass - r0.mass).abs() / r0.mass);
        m.insert("unaccounted_mass_rel".into(), self.f.unaccounted_mass().max(0.0) / r0.mass);
        m.insert("outflow".into(), self.f.ledger.outflow);
        m.insert("clamped".into(), self.f.ledger.clamped);
        m.insert("min_f_pre_clamp".into(), self.min_f);
        m.insert("fluid_substeps".into(), self.fluid_substeps as f64);
        m.insert("limit_substeps".into(), self.limit_substeps as f64);
        m.insert("h1_gap".into(), self.gaps.h1);
        m.insert("h1_gap_per_mass".into(), self.gaps.h1_per_mass);
        m.insert("h2_gap".into(), self.gaps.h2);
        m
    }
}

fn setup(cfg: &ExperimentConfig) -> Result<(TorusGrid, Profiles), HarnessError> {
    let grid = TorusGrid::new(cfg.grid.d, cfg.grid.n).map_err(|e| HarnessError::Config(e.to_string()))?;
    let mut p = smooth_profiles(&grid, cfg.physics.seed, cfg.physics.amplitude, cfg.physics.mode_cutoff)?;
    let b = cfg.physics.background_velocity;
    if b != [0.0, 0.0] {
        let c = SpectralVector::constant(&grid, b);
        p.u = p.u.add(&c);
        p.v = p.v.add(&c);
    }
    Ok((grid, p))
}

fn solver_err(step: usize, dt: f64) -> impl Fn(String) -> HarnessError {
    move |message| HarnessError::Solver { step, t: step as f64 * dt, message }
}

/// Advances the fluid by dt in as many equal substeps as the CFL bound needs.
fn advance_fluid(state: &FluidState, m: &KineticMoments, dt: f64) -> Result<(FluidState, usize), String> {
    let limit = cfl_limit(state.v.grid(), state.v.max_abs());
    let k = ((dt / (0.9 * limit)).ceil() as usize).max(1);
    let h = dt / k as f64;
    let mut s = state.clone();
    for _ in 0..k {
        s = ns_step(&s, FluidSource::Drag { rho: &m.rho, momentum: &m.momentum }, h).map_err(|e| e.to_string())?;
    }
    Ok((s, k))
}

fn advance_limit(state: &MacroState, dt: f64) -> Result<(MacroState, usize), String> {
    let k = ((dt / (0.9 * stable_dt(state))).ceil() as usize).max(1);
    let h = dt / k as f64;
    let mut s = state.clone();
    for _ in 0..k {
        s = epns_step(&s, h).map_err(|e| e.to_string())?.0;
    }
    Ok((s, k))
}

/// All diagnostics of one time slice except the entropy residual, which
/// depends on the history.
fn record(
    f: &DistributionFunction,
    m: &KineticMoments,
    v: &SpectralVector,
    limit: Option<&MacroState>,
    t: f64,
    delta: f64,
) -> Result<DiagnosticsRecord, HarnessError> {
    let sigma = f.sigma();
    let u_eps = regularized_velocity(m, delta).map_err(|e| HarnessError::Config(e.to_string()))?;
    let mut r = DiagnosticsRecord {
        t,
        mass: f.mass(),
        free_energy: free_energy(f, v)?,
        d1: dissipation_d1(f, &u_eps),
        d2: dissipation_d2(f, v),
        ..Default::default()
    };
    match limit {
        Some(lim) => {
            let me = modulated_energy(m, v, lim, delta)?;
            r.mod_energy = me.mod_energy;
            r.coulomb_mod = me.coulomb_mod;
            r.l2_u_diff = me.l2_u_diff;
            r.l2_v_diff = me.l2_v_diff;
            r.hminus1_rho = me.coulomb_mod.sqrt();
            r.stress_defect = stress_defect(m, lim, sigma);
            r.rel_entropy_maxwellian = if sigma > 0.0 {
                let mx = maxwellian(&lim.rho(), &lim.u, sigma, *f.vbox(), f.epsilon())?;
                rel_entropy_to_maxwellian(f, &mx)?.value
            } else {
                f64::NAN
            };
        }
        None => {
            // no limit solution: compare with the kinetic state's own moments
            for x in [&mut r.mod_energy, &mut r.coulomb_mod, &mut r.l2_u_diff, &mut r.l2_v_diff, &mut r.stress_defect] {
                *x = f64::NAN;
            }
            let mean = m.rho.mean();
            r.hminus1_rho = h_minus1_norm(&m.rho.map(|x| x - mean)).map_err(crate::diagnostics::DiagnosticsError::from)?;
            r.rel_entropy_maxwellian = if sigma > 0.0 && m.rho.min() > 0.0 {
                let mx = maxwellian(&m.rho, &u_eps, sigma, *f.vbox(), f.epsilon())?;
                rel_entropy_to_maxwellian(f, &mx)?.value
            } else {
                f64::NAN
            };
        }
    }
    Ok(r)
}

/// Coupled kinetic-fluid run (or kinetic-only with v frozen at v₀) with the
/// limit system advanced in lockstep from the matching initial data.
pub fn run_vpns(cfg: &ExperimentConfig) -> Result<VpnsRun, HarnessError> {
    if !matches!(cfg.mode, Mode::Vpns | Mode::KineticOnly | Mode::Sweep) {
        return Err(HarnessError::Config(format!("run_vpns cannot run mode {:?}", cfg.mode)));
    }
    let coupled = cfg.mode != Mode::KineticOnly;
    let (grid, p) = setup(cfg)?;
    let (sigma, eps, delta) = (cfg.physics.sigma, cfg.epsilon(), cfg.physics.delta_floor);
    let vbox = VelocityBox::new(grid.dim(), cfg.grid.n_v, cfg.v_max(p.u.max_abs())).map_err(|e| HarnessError::Config(e.to_string()))?;
    let w = (cfg.physics.mis_prepared != 0.0).then(|| {
        let a = cfg.physics.mis_prepared;
        SpectralVector::from_fn(&grid, |x, y| [a * y.sin(), a * x.cos()])
    });
    let prep = if cfg.physics.cold {
        cold_family(&p.rho, &p.u, &p.v, eps, vbox, delta)?
    } else {
        well_prepared_family(&p.rho, &p.u, &p.v, sigma, eps, vbox, w.as_ref(), delta)?
    };
    let mut f = prep.f;
    let mut fluid = if coupled { Some(FluidState::new(prep.v.clone(), 1.0).map_err(|e| HarnessError::Config(e.to_string()))?) } else { None };
    let frozen_v = prep.v;
    let mut limit = if coupled {
        Some(MacroState::from_density(&p.rho, p.u.clone(), p.v.clone(), sigma).map_err(|e| HarnessError::Config(e.to_string()))?)
    } else {
        None
    };
    let params = StepParams { delta_floor: delta, ..Default::default() };
    let dt = cfg.time.dt;
    let steps = cfg.steps();
    let mut m = compute_moments(&f);
    let mut records = vec![record(&f, &m, &frozen_v, limit.as_ref(), 0.0, delta)?];
    let (mut fluid_substeps, mut limit_substeps, mut min_f) = (0, 0, f.min());
    for k in 0..steps {
        let err = solver_err(k, dt);
        let v_now = fluid.as_ref().map_or(&frozen_v, |s| &s.v).clone();
        if let Some(s) = &fluid {
            let (next, sub) = advance_fluid(s, &m, dt).map_err(&err)?;
            fluid = Some(next);
            fluid_substeps += sub;
        }
        let (m_next, rep) = vpns_step(&mut f, &v_now, dt, &params).map_err(|e| err(e.to_string()))?;
        m = m_next;
        min_f = min_f.min(rep.min_f);
        if let Some(l) = &limit {
            let (next, sub) = advance_limit(l, dt).map_err(&err)?;
            limit = Some(next);
            limit_substeps += sub;
        }
        if (k + 1) % cfg.output.cadence == 0 {
            let v = fluid.as_ref().map_or(&frozen_v, |s| &s.v);
            records.push(record(&f, &m, v, limit.as_ref(), (k + 1) as f64 * dt, delta)?);
            let series = entropy_residual_series(&records, eps, sigma, grid.dim());
            records.last_mut().expect("just pushed").entropy_residual = series[series.len() - 1];
        }
    }
    let v = fluid.map_or(frozen_v, |s| s.v);
    Ok(VpnsRun { records, f, v, limit, gaps: prep.gaps, fluid_substeps, limit_substeps, min_f, t_end: steps as f64 * dt })
}

/// One output row of a limit-system run.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EpnsRow {
    pub t: f64,
    pub mass: f64,
    pub kinetic: f64,
    pub coulomb: f64,
    pub fluid: f64,
    pub entropy: f64,
    pub dissipation_v: f64,
    pub dissipation_drag: f64,
    /// E(t) + ∫₀ᵗ(D_v + D_drag) - E(0), trapezoid at the output cadence.
    pub energy_residual: f64,
    pub tracker_s: f64,
}

impl EpnsRow {
    pub fn values(&self) -> [f64; 10] {
        [
            self.t,
            self.mass,
            self.kinetic,
            self.coulomb,
            self.fluid,
            self.entropy,
            self.dissipation_v,
            self.dissipation_drag,
            self.energy_residual,
            self.tracker_s,
        ]
    }

    fn total(&self) -> f64 {
        self.kinetic + self.coulomb + self.fluid + self.entropy
    }
}

#[derive(Clone, Debug)]
pub struct EpnsRun {
    pub rows: Vec<EpnsRow>,
    pub state: MacroState,
    pub substeps: usize,
}

impl EpnsRun {
    pub fn metrics(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        let r0 = self.rows[0];
        m.insert("max_abs_energy_residual".into(), self.rows.iter().map(|r| r.energy_residual.abs()).fold(0.0, f64::max));
        m.insert("tracker_ratio".into(), self.rows.iter().map(|r| r.tracker_s).fold(0.0, f64::max) / r0.tracker_s.max(f64::MIN_POSITIVE));
        m.insert("mass_drift_rel".into(), self.rows.iter().map(|r| (r.mass - r0.mass).abs()).fold(0.0, f64::max) / r0.mass);
        m.insert("substeps".into(), self.substeps as f64);
        m
    }
}

fn epns_row(state: &MacroState, t: f64, s: f64) -> Result<EpnsRow, HarnessError> {
    let e = energy_report(state).map_err(|e| HarnessError::Solver { step: 0, t, message: e.to_string() })?;
    Ok(EpnsRow {
        t,
        mass: state.mass(),
        kinetic: e.kinetic,
        coulomb: e.coulomb,
        fluid: e.fluid,
        entropy: e.entropy,
        dissipation_v: e.dissipation_v,
        dissipation_drag: e.dissipation_drag,
        energy_residual: 0.0,
        tracker_s: norm_tracker(state, s),
    })
}

/// Limit-system run from the configured smooth profiles.
pub fn run_epns(cfg: &ExperimentConfig) -> Result<EpnsRun, HarnessError> {
    let (_, p) = setup(cfg)?;
    let state = MacroState::from_density(&p.rho, p.u, p.v, cfg.physics.sigma).map_err(|e| HarnessError::Config(e.to_string()))?;
    run_epns_from(cfg, state)
}

pub(crate) fn run_epns_from(cfg: &ExperimentConfig, mut state: MacroState) -> Result<EpnsRun, HarnessError> {
    let (dt, s) = (cfg.time.dt, cfg.output.tracker_s);
    let mut rows = vec![epns_row(&state, 0.0, s)?];
    let mut substeps = 0;
    let mut acc = 0.0;
    for k in 0..cfg.steps() {
        let (next, sub) = advance_limit(&state, dt).map_err(solver_err(k, dt))?;
        state = next;
        substeps += sub;
        if (k + 1) % cfg.output.cadence == 0 {
            let mut row = epns_row(&state, (k + 1) as f64 * dt, s)?;
            let prev = rows[rows.len() - 1];
            acc += 0.5 * (row.t - prev.t) * (prev.dissipation_v + prev.dissipation_drag + row.dissipation_v + row.dissipation_drag);
            row.energy_residual = row.total() + acc - rows[0].total();
            rows.push(row);
        }
    }
    Ok(EpnsRun { rows, state, substeps })
}

/// Writes the state of a finished kinetic run as snapshots.
pub(crate) fn write_vpns_snapshots(run: &VpnsRun, dir: &Path, cfg: &ExperimentConfig) -> Result<(), HarnessError> {
    let mut attrs = BTreeMap::new();
    attrs.insert("sigma".to_string(), cfg.physics.sigma);
    attrs.insert("epsilon".to_string(), cfg.epsilon());
    attrs.insert("delta_floor".to_string(), cfg.physics.delta_floor);
    run.f.snapshot().write(&dir.join("kinetic.snap"), run.t_end, attrs.clone())?;
    let grid = run.f.grid();
    let vs = (0..run.v.dim()).fold(Snapshot::new(grid), |s, a| s.with_scalar(&format!("v{a}"), run.v.component(a)));
    vs.write(&dir.join("fluid.snap"), run.t_end, attrs.clone())?;
    if let Some(l) = &run.limit {
        let mut s = Snapshot::new(grid).with_scalar("rho", &l.rho());
        for a in 0..2 {
            s = s.with_scalar(&format!("u{a}"), l.u.component(a)).with_scalar(&format!("v{a}"), l.v.component(a));
        }
        s.write(&dir.join("limit.snap"), run.t_end, attrs)?;
    }
    Ok(())
}

/// Recomputes one diagnostics row from the snapshots a run left in `dir`.
/// The entropy residual needs the history and is reported as NaN.
pub fn diagnose_snapshots(dir: &Path) -> Result<DiagnosticsRecord, HarnessError> {
    let kin_path = dir.join("kinetic.snap");
    let side = crate::spectral::read_sidecar(&kin_path)?;
    let attr = |k: &str| side.attributes.get(k).copied().ok_or_else(|| HarnessError::Config(format!("snapshot sidecar lacks '{k}'")));
    let (sigma, eps, delta) = (attr("sigma")?, attr("epsilon")?, attr("delta_floor")?);
    let f = DistributionFunction::from_snapshot(&Snapshot::read(&kin_path)?, sigma, eps).map_err(|e| HarnessError::Config(e.to_string()))?;
    let grid = f.grid().clone();
    let field = |s: &Snapshot, name: &str| -> Result<SpectralScalar, HarnessError> {
        let v = s.field(name).ok_or_else(|| HarnessError::Config(format!("snapshot lacks field '{name}'")))?;
        SpectralScalar::from_values(&grid, v.to_vec()).map_err(|e| HarnessError::Config(e.to_string()))
    };
    let vector = |s: &Snapshot, prefix: &str| -> Result<SpectralVector, HarnessError> {
        let comps = (0..grid.dim()).map(|a| field(s, &format!("{prefix}{a}"))).collect::<Result<Vec<_>, _>>()?;
        SpectralVector::from_components(comps).map_err(|e| HarnessError::Config(e.to_string()))
    };
    let v = vector(&Snapshot::read(&dir.join("fluid.snap"))?, "v")?;
    let limit_path = dir.join("limit.snap");
    let limit = if limit_path.exists() {
        let s = Snapshot::read(&limit_path)?;
        Some(
            MacroState::from_density(&field(&s, "rho")?, vector(&s, "u")?, vector(&s, "v")?, sigma)
                .map_err(|e| HarnessError::Config(e.to_string()))?,
        )
    } else {
        None
    };
    let m = compute_moments(&f);
    let mut r = record(&f, &m, &v, limit.as_ref(), side.t, delta)?;
    r.entropy_residual = f64::NAN;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::vpns_csv;

    fn cfg(extra: &[&str]) -> ExperimentConfig {
        let base = r#"
mode = "vpns"
[grid]
d = 2
n = 8
n_v = 16
[physics]
sigma = 1.0
epsilon = 0.1
seed = 4
[time]
dt = 0.01
t_end = 0.04
"#;
        let o: Vec<String> = extra.iter().map(|s| s.to_string()).collect();
        ExperimentConfig::from_toml_str(base, &o).unwrap()
    }

    #[test]
    fn zero_end_time_gives_one_record() {
        let run = run_vpns(&cfg(&["t_end=0"])).unwrap();
        assert_eq!(run.records.len(), 1);
        assert_eq!(run.records[0].entropy_residual, 0.0);
    }

    #[test]
    fn runs_are_bit_identical() {
        let c = cfg(&[]);
        let a = vpns_csv(&run_vpns(&c).unwrap().records, 1.0);
        let b = vpns_csv(&run_vpns(&c).unwrap().records, 1.0);
        assert_eq!(a, b);
        assert_eq!(a.lines().count(), 6);
    }

    #[test]
    fn uniform_cold_flow_dissipates_nothing() {
        let c = cfg(&["sigma=0", "cold=true", "amplitude=0", "V=4", "delta_floor=1e-14", "background_velocity=[0.25, -0.25]"]);
        let run = run_vpns(&c).unwrap();
        for r in &run.records {
            assert!(r.d1 <= 1e-8 && r.d2 <= 1e-8, "{r:?}");
            assert!(r.mod_energy <= 1e-8 && r.stress_defect <= 1e-8, "{r:?}");
        }
    }

    #[test]
    fn kinetic_only_in_one_dimension() {
        let c = cfg(&["mode=kinetic-only", "d=1", "n_v=32", "V=8"]);
        let run = run_vpns(&c).unwrap();
        assert!(run.limit.is_none());
        let last = run.records.last().unwrap();
        assert!(last.mod_energy.is_nan() && last.rel_entropy_maxwellian >= 0.0);
        // mass changes only through the ledger (clamping here)
        assert!(run.f.unaccounted_mass() <= 1e-12 * last.mass);
    }

    #[test]
    fn limit_equilibrium_is_flat() {
        let run = run_epns(&cfg(&["mode=epns", "amplitude=0"])).unwrap();
        for r in &run.rows {
            assert!(r.energy_residual.abs() < 1e-12 && r.kinetic == 0.0 && r.tracker_s < 1e-20);
        }
    }
}
