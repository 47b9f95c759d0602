//! Fully resolved run configurations. Every field is explicit so that the
//! config line embedded in an output file is enough to repeat the run.

use quintic_duffing::chaos::REFERENCE_ONSETS;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::args::*;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum RunConfig {
    Simulate(SimulateConfig),
    Exact(ExactConfig),
    Kbm(KbmConfig),
    Melnikov(MelnikovConfig),
    Poincare(PoincareConfig),
    Scan(ScanConfig),
    Bifurcate(BifurcateConfig),
    Control(ControlConfig),
    Sde(SdeConfig),
}

impl RunConfig {
    pub fn name(&self) -> &'static str {
        match self {
            RunConfig::Simulate(_) => "simulate",
            RunConfig::Exact(_) => "exact",
            RunConfig::Kbm(_) => "kbm",
            RunConfig::Melnikov(_) => "melnikov",
            RunConfig::Poincare(_) => "poincare",
            RunConfig::Scan(_) => "scan",
            RunConfig::Bifurcate(_) => "bifurcate",
            RunConfig::Control(_) => "control",
            RunConfig::Sde(_) => "sde",
        }
    }

    pub fn preset(&self) -> Option<&str> {
        match self {
            RunConfig::Poincare(c) => c.preset.as_deref(),
            RunConfig::Scan(c) => c.preset.as_deref(),
            RunConfig::Bifurcate(c) => c.preset.as_deref(),
            RunConfig::Control(c) => c.preset.as_deref(),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        match self {
            RunConfig::Simulate(c) => c.validate(),
            RunConfig::Exact(c) => c.validate(),
            RunConfig::Kbm(c) => c.validate(),
            RunConfig::Melnikov(c) => c.validate(),
            RunConfig::Poincare(c) => c.validate(),
            RunConfig::Scan(c) => c.validate(),
            RunConfig::Bifurcate(c) => c.validate(),
            RunConfig::Control(c) => c.validate(),
            RunConfig::Sde(c) => c.validate(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Oscillator {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub delta: f64,
    pub gamma: f64,
    pub omega: f64,
    pub epsilon: f64,
}

impl Oscillator {
    pub fn params(&self) -> quintic_duffing::oscillator::OscillatorParams<f64> {
        quintic_duffing::oscillator::OscillatorParams::new(self.a, self.b, self.c, self.delta, self.gamma, self.omega, self.epsilon)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub oscillator: Oscillator,
    pub x0: f64,
    pub v0: f64,
    pub t_end: f64,
    pub method: MethodArg,
    pub dt: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactConfig {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub x0: f64,
    pub periods: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KbmConfig {
    pub oscillator: Oscillator,
    pub x0: f64,
    pub v0: f64,
    pub t_end: f64,
    pub order: OrderArg,
    pub dt_out: f64,
    /// Tolerance of the Dormand-Prince reference run.
    pub reference_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MelnikovConfig {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub kind: KindArg,
    pub branch: BranchArg,
    pub gamma: f64,
    pub delta: f64,
    pub omega: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoincareConfig {
    pub preset: Option<String>,
    pub oscillator: Oscillator,
    pub x0: f64,
    pub v0: f64,
    pub n_points: usize,
    pub n_transient: usize,
    pub steps_per_period: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub preset: Option<String>,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub delta: f64,
    pub omegas: Vec<f64>,
    pub gamma_lo: f64,
    pub gamma_hi: f64,
    pub grid_step: f64,
    pub resolution: f64,
    pub threshold: f64,
    /// Start of every Lyapunov run.
    pub initial: (f64, f64),
    pub lyapunov: quintic_duffing::chaos::LyapunovConfig<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcateConfig {
    pub preset: Option<String>,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub delta: f64,
    pub omega: f64,
    pub epsilon: f64,
    pub x0: f64,
    pub v0: f64,
    pub gamma_lo: f64,
    pub gamma_hi: f64,
    pub n_gamma: usize,
    pub n_points: usize,
    pub n_transient: usize,
    pub steps_per_period: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlConfig {
    pub preset: Option<String>,
    pub oscillator: Oscillator,
    pub x0: f64,
    pub v0: f64,
    pub mu: f64,
    pub tau: f64,
    pub history: HistoryArg,
    pub t_end: f64,
    pub steps_per_tau: usize,
    pub window_taus: usize,
    pub tolerance: f64,
    pub fit_degree: usize,
    pub search: bool,
    pub mu_range: (f64, f64),
    pub tau_range: (f64, f64),
    pub grid: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdeConfig {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub gamma: f64,
    pub omega: f64,
    pub epsilon: f64,
    pub x0: f64,
    pub v0: f64,
    pub sigma: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub seed: u64,
    pub ensemble: usize,
}

const PRESETS: [(&str, &str); 5] = [
    ("fig6", "poincare"),
    ("fig9", "poincare"),
    ("fig7", "bifurcate"),
    ("fig10", "control"),
    ("table1", "scan"),
];

fn preset_values(command: &str, name: &str) -> Result<Map<String, Value>, CliError> {
    let v = match (command, name) {
        ("poincare", "fig6") => json!({
            "a": 1.0, "b": 1.0, "c": 0.0, "delta": 0.1, "gamma": 0.35, "omega": 1.4, "epsilon": 1.0
        }),
        ("poincare", "fig9") => json!({
            "a": 1.0, "b": 1.0, "c": 0.2, "delta": 0.1, "gamma": 0.35, "omega": 1.4, "epsilon": 1.0
        }),
        ("bifurcate", "fig7") => json!({
            "a": 1.0, "b": 1.0, "c": 0.0, "delta": 0.1, "omega": 1.4, "epsilon": 1.0,
            "gamma_lo": 0.01, "gamma_hi": 0.4
        }),
        ("control", "fig10") => json!({
            "a": 1.0, "b": 1.0, "c": 0.2, "delta": 0.1, "gamma": 0.35, "omega": 1.4, "epsilon": 1.0,
            "mu": 2.25311, "tau": 3.73093, "t_end": 500.0
        }),
        ("scan", "table1") => json!({
            "a": 1.0, "b": 1.0, "c": 0.0, "delta": 0.1,
            "omegas": REFERENCE_ONSETS.iter().map(|r| r.0).collect::<Vec<_>>()
        }),
        _ => {
            return Err(match PRESETS.iter().find(|p| p.0 == name) {
                Some((_, owner)) => CliError::Validation(format!("preset `{name}` belongs to the `{owner}` command")),
                None => CliError::Validation(format!("unknown preset `{name}`")),
            })
        }
    };
    match v {
        Value::Object(m) => Ok(m),
        _ => unreachable!(),
    }
}

/// Merges user flags, preset values and defaults; a flag that a preset
/// also sets is a conflict.
struct Resolver {
    preset: Option<String>,
    values: Map<String, Value>,
}

impl Resolver {
    fn new(command: &str, preset: Option<&str>) -> Result<Self, CliError> {
        let values = match preset {
            Some(p) => preset_values(command, p)?,
            None => Map::new(),
        };
        Ok(Self {
            preset: preset.map(str::to_owned),
            values,
        })
    }

    fn pick<T: DeserializeOwned>(&self, key: &str, user: Option<T>, default: T) -> Result<T, CliError> {
        match (user, self.values.get(key)) {
            (Some(_), Some(_)) => Err(CliError::Validation(format!(
                "--{} conflicts with preset `{}`",
                key.replace('_', "-"),
                self.preset.as_deref().unwrap_or_default()
            ))),
            (Some(u), None) => Ok(u),
            (None, Some(v)) => serde_json::from_value(v.clone()).map_err(|e| CliError::Validation(format!("preset value {key}: {e}"))),
            (None, None) => Ok(default),
        }
    }

    fn oscillator(&self, c: &Coeffs, f: &Forcing, d: Oscillator) -> Result<Oscillator, CliError> {
        Ok(Oscillator {
            a: self.pick("a", c.a, d.a)?,
            b: self.pick("b", c.b, d.b)?,
            c: self.pick("c", c.c, d.c)?,
            delta: self.pick("delta", f.delta, d.delta)?,
            gamma: self.pick("gamma", f.gamma, d.gamma)?,
            omega: self.pick("omega", f.omega, d.omega)?,
            epsilon: self.pick("epsilon", f.epsilon, d.epsilon)?,
        })
    }
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Validation(format!("--{} must be positive and finite, got {v}", name.replace('_', "-"))))
    }
}

fn nonzero(name: &str, v: usize) -> Result<(), CliError> {
    if v > 0 {
        Ok(())
    } else {
        Err(CliError::Validation(format!("--{} must be at least 1", name.replace('_', "-"))))
    }
}

fn valid_params(o: &Oscillator) -> Result<(), CliError> {
    o.params().validate().map_err(CliError::from)
}

const EXAMPLE5: Oscillator = Oscillator {
    a: 1.0,
    b: 1.0,
    c: 0.2,
    delta: 0.1,
    gamma: 0.35,
    omega: 1.4,
    epsilon: 1.0,
};

pub fn resolve_simulate(a: &SimulateArgs) -> Result<RunConfig, CliError> {
    let r = Resolver::new("simulate", None)?;
    let d = Oscillator {
        a: 1.0,
        b: 1.0,
        c: 0.0,
        delta: 0.0,
        gamma: 0.0,
        omega: 1.0,
        epsilon: 1.0,
    };
    let cfg = SimulateConfig {
        oscillator: r.oscillator(&a.coeffs, &a.forcing, d)?,
        x0: r.pick("x0", a.initial.x0, 0.5)?,
        v0: r.pick("v0", a.initial.v0, 0.0)?,
        t_end: r.pick("t_end", a.t_end, 10.0)?,
        method: r.pick("method", a.method, MethodArg::Rk4)?,
        dt: r.pick("dt", a.dt, 0.01)?,
        tol: r.pick("tol", a.tol, 1e-10)?,
    };
    let cfg = RunConfig::Simulate(cfg);
    cfg.validate()?;
    Ok(cfg)
}

pub fn resolve_exact(a: &ExactArgs) -> Result<RunConfig, CliError> {
    let r = Resolver::new("exact", None)?;
    let cfg = ExactConfig {
        a: r.pick("a", a.coeffs.a, -1.0)?,
        b: r.pick("b", a.coeffs.b, 2.0)?,
        c: r.pick("c", a.coeffs.c, 3.0)?,
        x0: r.pick("x0", a.x0, 1.0)?,
        periods: r.pick("periods", a.periods, 2.0)?,
        samples: r.pick("samples", a.samples, 400)?,
    };
    let cfg = RunConfig::Exact(cfg);
    cfg.validate()?;
    Ok(cfg)
}

pub fn resolve_kbm(a: &KbmArgs) -> Result<RunConfig, CliError> {
    let r = Resolver::new("kbm", None)?;
    let d = Oscillator {
        a: -1.0,
        b: 2.0,
        c: 1.0,
        delta: 0.025,
        gamma: 0.01,
        omega: 0.1,
        epsilon: 1.0,
    };
    let cfg = KbmConfig {
        oscillator: r.oscillator(&a.coeffs, &a.forcing, d)?,
        x0: r.pick("x0", a.initial.x0, 0.25)?,
        v0: r.pick("v0", a.initial.v0, 0.0)?,
        t_end: r.pick("t_end", a.t_end, 30.0)?,
        order: r.pick("order", a.order, OrderArg::Second)?,
        dt_out: r.pick("dt_out", a.dt_out, 0.02)?,
        reference_tol: 1e-12,
    };
    let cfg = RunConfig::Kbm(cfg);
    cfg.validate()?;
    Ok(cfg)
}

pub fn resolve_melnikov(a: &MelnikovArgs) -> Result<RunConfig, CliError> {
    let r = Resolver::new("melnikov", None)?;
    let cfg = MelnikovConfig {
        a: r.pick("a", a.coeffs.a, 1.0)?,
        b: r.pick("b", a.coeffs.b, 1.0)?,
        c: r.pick("c", a.coeffs.c, 0.2)?,
        kind: r.pick("kind", a.kind, KindArg::Sech)?,
        branch: r.pick("branch", a.branch, BranchArg::Plus)?,
        gamma: r.pick("gamma", a.gamma, 0.35)?,
        delta: r.pick("delta", a.delta, 0.1)?,
        omega: r.pick("omega", a.omega, 1.4)?,
        samples: r.pick("samples", a.samples, 400)?,
    };
    let cfg = RunConfig::Melnikov(cfg);
    cfg.validate()?;
    Ok(cfg)
}

pub fn resolve_poincare(a: &PoincareArgs) -> Result<RunConfig, CliError> {
    let r = Resolver::new("poincare", a.preset.as_deref())?;
    let d = Oscillator {
        c: 0.0,
        ..EXAMPLE5
    };
    let cfg = PoincareConfig {
        preset: a.preset.clone(),
        oscillator: r.oscillator(&a.coeffs, &a.forcing, d)?,
        x0: r.pick("x0", a.initial.x0, 0.0)?,
        v0: r.pick("v0", a.initial.v0, 0.0)?,
        n_points: r.pick("n_points", a.n_points, 1000)?,
        n_transient: r.pick("n_transient", a.n_transient, 100)?,
        steps_per_period: r.pick("steps_per_period", a.steps_per_period, 200)?,
    };
    let cfg = RunConfig::Poincare(cfg);
    cfg.validate()?;
    Ok(cfg)
}

pub fn resolve_scan(a: &ScanArgs) -> Result<RunConfig, CliError> {
    let r = Resolver::new("scan", a.preset.as_deref())?;
    let defaults = quintic_duffing::chaos::ScanConfig::<f64>::default();
    let mut omegas: Vec<f64> = r.pick("omegas", a.omegas.clone(), vec![1.4])?;
    if let Some(n) = a.rows {
        nonzero("rows", n)?;
        omegas.truncate(n);
    }
    let cfg = ScanConfig {
        preset: a.preset.clone(),
        a: r.pick("a", a.coeffs.a, 1.0)?,
        b: r.pick("b", a.coeffs.b, 1.0)?,
        c: r.pick("c", a.coeffs.c, 0.0)?,
        delta: r.pick("delta", a.delta, 0.1)?,
        omegas,
        gamma_lo: r.pick("gamma_lo", a.gamma_lo, defaults.gamma_lo)?,
        gamma_hi: r.pick("gamma_hi", a.gamma_hi, defaults.gamma_hi)?,
        grid_step: r.pick("grid_step", a.grid_step, defaults.grid_step)?,
        resolution: r.pick("resolution", a.resolution, defaults.resolution)?,
        threshold: r.pick("threshold", a.threshold, defaults.threshold)?,
        initial: defaults.initial,
        lyapunov: defaults.lyapunov,
    };
    let cfg = RunConfig::Scan(cfg);
    cfg.validate()?;
    Ok(cfg)
}

pub fn resolve_bifurcate(a: &BifurcateArgs) -> Result<RunConfig, CliError> {
    let r = Resolver::new("bifurcate", a.preset.as_deref())?;
    let cfg = BifurcateConfig {
        preset: a.preset.clone(),
        a: r.pick("a", a.coeffs.a, 1.0)?,
        b: r.pick("b", a.coeffs.b, 1.0)?,
        c: r.pick("c", a.coeffs.c, 0.0)?,
        delta: r.pick("delta", a.delta, 0.1)?,
        omega: r.pick("omega", a.omega, 1.4)?,
        epsilon: 1.0,
        x0: r.pick("x0", a.initial.x0, 0.0)?,
        v0: r.pick("v0", a.initial.v0, 0.0)?,
        gamma_lo: r.pick("gamma_lo", a.gamma_lo, 0.01)?,
        gamma_hi: r.pick("gamma_hi", a.gamma_hi, 0.4)?,
        n_gamma: r.pick("n_gamma", a.n_gamma, 100)?,
        n_points: r.pick("n_points", a.n_points, 64)?,
        n_transient: r.pick("n_transient", a.n_transient, 200)?,
        steps_per_period: r.pick("steps_per_period", a.steps_per_period, 200)?,
    };
    let cfg = RunConfig::Bifurcate(cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn pair(name: &str, v: Option<Vec<f64>>) -> Result<Option<(f64, f64)>, CliError> {
    match v.as_deref() {
        None => Ok(None),
        Some([lo, hi]) if lo < hi => Ok(Some((*lo, *hi))),
        Some(_) => Err(CliError::Validation(format!("--{name} needs LO < HI"))),
    }
}

pub fn resolve_control(a: &ControlArgs) -> Result<RunConfig, CliError> {
    let r = Resolver::new("control", a.preset.as_deref())?;
    let cfg = ControlConfig {
        preset: a.preset.clone(),
        oscillator: r.oscillator(&a.coeffs, &a.forcing, EXAMPLE5)?,
        x0: r.pick("x0", a.initial.x0, 0.0)?,
        v0: r.pick("v0", a.initial.v0, 0.0)?,
        mu: r.pick("mu", a.mu, 2.25311)?,
        tau: r.pick("tau", a.tau, 3.73093)?,
        history: r.pick("history", a.history, HistoryArg::Zero)?,
        t_end: r.pick("t_end", a.t_end, 500.0)?,
        steps_per_tau: r.pick("steps_per_tau", a.steps_per_tau, 100)?,
        window_taus: r.pick("window_taus", a.window_taus, 5)?,
        tolerance: r.pick("tolerance", a.tolerance, 1e-2)?,
        fit_degree: r.pick("fit_degree", a.fit_degree, 5)?,
        search: a.search,
        mu_range: r.pick("mu_range", pair("mu-range", a.mu_range.clone())?, (0.5, 3.0))?,
        tau_range: r.pick("tau_range", pair("tau-range", a.tau_range.clone())?, (2.0, 6.0))?,
        grid: r.pick("grid", a.grid, 20)?,
    };
    let cfg = RunConfig::Control(cfg);
    cfg.validate()?;
    Ok(cfg)
}

pub fn resolve_sde(a: &SdeArgs) -> Result<RunConfig, CliError> {
    let r = Resolver::new("sde", None)?;
    let cfg = SdeConfig {
        a: r.pick("a", a.coeffs.a, 1.0)?,
        b: r.pick("b", a.coeffs.b, -1.0)?,
        c: r.pick("c", a.coeffs.c, -1.0)?,
        gamma: r.pick("gamma", a.gamma, 0.1)?,
        omega: r.pick("omega", a.omega, 1.0)?,
        epsilon: r.pick("epsilon", a.epsilon, 1.0)?,
        x0: r.pick("x0", a.initial.x0, 0.1)?,
        v0: r.pick("v0", a.initial.v0, 0.0)?,
        sigma: r.pick("sigma", a.sigma, 0.1)?,
        dt: r.pick("dt", a.dt, 1e-2)?,
        n_steps: r.pick("n_steps", a.n_steps, 1000)?,
        seed: r.pick("seed", a.seed, 0)?,
        ensemble: r.pick("ensemble", a.ensemble, 1)?,
    };
    let cfg = RunConfig::Sde(cfg);
    cfg.validate()?;
    Ok(cfg)
}

impl SimulateConfig {
    fn validate(&self) -> Result<(), CliError> {
    valid_params(&self.oscillator)?;
    positive("t_end", self.t_end)?;
    positive("dt", self.dt)?;
    positive("tol", self.tol)?;
        Ok(())
    }
}

impl ExactConfig {
    fn validate(&self) -> Result<(), CliError> {
    if self.x0 == 0.0 || !self.x0.is_finite() {
        return Err(CliError::Validation("--x0 must be nonzero and finite".into()));
    }
    positive("periods", self.periods)?;
    nonzero("samples", self.samples)?;
        Ok(())
    }
}

impl KbmConfig {
    fn validate(&self) -> Result<(), CliError> {
    valid_params(&self.oscillator)?;
    positive("t_end", self.t_end)?;
    positive("dt_out", self.dt_out)?;
        Ok(())
    }
}

impl MelnikovConfig {
    fn validate(&self) -> Result<(), CliError> {
    positive("omega", self.omega)?;
    nonzero("samples", self.samples)?;
        Ok(())
    }
}

impl PoincareConfig {
    fn validate(&self) -> Result<(), CliError> {
    valid_params(&self.oscillator)?;
    positive("omega", self.oscillator.omega)?;
    nonzero("n_points", self.n_points)?;
    nonzero("steps_per_period", self.steps_per_period)?;
        Ok(())
    }
}

impl ScanConfig {
    fn validate(&self) -> Result<(), CliError> {
    if self.omegas.is_empty() {
        return Err(CliError::Validation("--omegas needs at least one value".into()));
    }
    for &w in &self.omegas {
        positive("omegas", w)?;
    }
    positive("grid_step", self.grid_step)?;
    positive("resolution", self.resolution)?;
    if !(self.gamma_lo >= 0.0 && self.gamma_hi > self.gamma_lo) {
        return Err(CliError::Validation("need 0 <= --gamma-lo < --gamma-hi".into()));
    }
        Ok(())
    }
}

impl BifurcateConfig {
    fn validate(&self) -> Result<(), CliError> {
    positive("omega", self.omega)?;
    nonzero("n_gamma", self.n_gamma)?;
    nonzero("n_points", self.n_points)?;
    nonzero("steps_per_period", self.steps_per_period)?;
    if !(self.gamma_hi >= self.gamma_lo) {
        return Err(CliError::Validation("need --gamma-lo <= --gamma-hi".into()));
    }
        Ok(())
    }
}

impl ControlConfig {
    fn validate(&self) -> Result<(), CliError> {
    valid_params(&self.oscillator)?;
    positive("tau", self.tau)?;
    positive("t_end", self.t_end)?;
    positive("tolerance", self.tolerance)?;
    nonzero("steps_per_tau", self.steps_per_tau)?;
    nonzero("window_taus", self.window_taus)?;
    nonzero("grid", self.grid)?;
    if self.t_end < (self.window_taus + 1) as f64 * self.tau {
        return Err(CliError::Validation("--t-end must cover window_taus + 1 delays".into()));
    }
        Ok(())
    }
}

impl SdeConfig {
    fn validate(&self) -> Result<(), CliError> {
    positive("dt", self.dt)?;
    nonzero("ensemble", self.ensemble)?;
    if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
        return Err(CliError::Validation("--sigma must be finite and non-negative".into()));
    }
        Ok(())
    }
}
