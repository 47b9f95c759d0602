//! One function per command: resolved config in, table and summary out.

use std::f64::consts::PI;

use quintic_duffing::chaos::{self, REFERENCE_ONSETS};
use quintic_duffing::exact::{self, HomoclinicKind, RootBranch};
use quintic_duffing::kbm::{self, Order};
use quintic_duffing::odeint::{integrate, HistoryPolicy, StepControl};
use quintic_duffing::oscillator::{energy, OscillatorParams, State};
use quintic_duffing::pyragas::{self, ControllerConfig, RunOptions, SearchConfig};
use quintic_duffing::{melnikov, sde};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::args::*;
use crate::config::*;
use crate::output::{Cell, Output, Table};
use crate::CliError;

type Res = Result<Output, CliError>;

pub fn execute(cfg: &RunConfig) -> Res {
    match cfg {
        RunConfig::Simulate(c) => simulate(c),
        RunConfig::Exact(c) => exact_solution(c),
        RunConfig::Kbm(c) => kbm_run(c),
        RunConfig::Melnikov(c) => melnikov_run(c),
        RunConfig::Poincare(c) => poincare(c),
        RunConfig::Scan(c) => scan(c),
        RunConfig::Bifurcate(c) => bifurcate(c),
        RunConfig::Control(c) => control(c),
        RunConfig::Sde(c) => sde_run(c),
    }
}

fn summary(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("summaries are objects"),
    }
}

/// `n + 1` points from 0 to `t_end`, the last one pinned to `t_end`.
fn uniform_grid(t_end: f64, dt: f64) -> Vec<f64> {
    let n = (t_end / dt - 1e-9).ceil().max(1.0) as usize;
    (0..=n).map(|i| if i == n { t_end } else { i as f64 * dt }).collect()
}

fn simulate(c: &SimulateConfig) -> Res {
    let p = c.oscillator.params();
    let ctrl = match c.method {
        MethodArg::Rk4 => StepControl::fixed(c.dt),
        MethodArg::Dopri5 => StepControl::adaptive(c.tol, c.tol),
    };
    let traj = integrate(|t, x, v| p.accel(t, x, v), State::new(0.0, c.x0, c.v0), c.t_end, &ctrl)?;
    let mut table = Table::new(&["t", "x", "v", "energy"]);
    for t in uniform_grid(c.t_end, c.dt) {
        let s = traj.interpolate(t)?;
        table.push(vec![t.into(), s.x.into(), s.v.into(), energy(&p, &s).into()]);
    }
    let last = traj.last().expect("non-empty");
    Ok(Output {
        summary: summary(json!({ "steps": traj.len() - 1, "x_end": last.x, "v_end": last.v })),
        table,
        plot: "plot DATA using 1:2 with lines, DATA using 1:3 with lines".into(),
    })
}

fn exact_solution(c: &ExactConfig) -> Res {
    let sol = exact::solve_cn_coefficients(c.a, c.b, c.c, c.x0)?;
    let period = sol.period()?;
    let t_end = c.periods * period;
    let mut table = Table::new(&["t", "x", "v"]);
    for i in 0..=c.samples {
        let t = t_end * i as f64 / c.samples as f64;
        let (x, v) = sol.state(t);
        table.push(vec![t.into(), x.into(), v.into()]);
    }
    let residual = sol.residuals(c.a, c.b, c.c).iter().fold(0.0f64, |m, r| m.max(r.abs()));
    Ok(Output {
        summary: summary(json!({
            "lambda": sol.lambda, "mu": sol.mu, "omega": sol.omega, "m": sol.m,
            "convention": sol.convention, "period": period, "max_residual": residual,
        })),
        table,
        plot: "plot DATA using 1:2 with lines".into(),
    })
}

fn kbm_run(c: &KbmConfig) -> Res {
    let p = c.oscillator.params();
    let order = match c.order {
        OrderArg::First => Order::First,
        OrderArg::Second => Order::Second,
    };
    let sol = kbm::solve(&p, c.x0, c.v0, c.t_end, order)?;
    let ctrl = StepControl::adaptive(c.reference_tol, c.reference_tol);
    let num = integrate(|t, x, v| p.accel(t, x, v), State::new(0.0, c.x0, c.v0), c.t_end, &ctrl)?;
    let mut table = Table::new(&["t", "x_kbm", "x_num", "amp", "psi"]);
    let mut max_error = 0.0f64;
    for t in uniform_grid(c.t_end, c.dt_out) {
        let xk = sol.displacement(t)?;
        let xn = num.interpolate(t)?.x;
        let s = sol.slow_state(t)?;
        max_error = max_error.max((xk - xn).abs());
        table.push(vec![t.into(), xk.into(), xn.into(), s.amp.into(), s.psi.into()]);
    }
    Ok(Output {
        summary: summary(json!({
            "max_error": max_error,
            "initial_fit_converged": sol.initial.converged,
            "coefficients": sol.coeffs,
        })),
        table,
        plot: "plot DATA using 1:2 with lines, DATA using 1:3 with lines".into(),
    })
}

fn melnikov_run(c: &MelnikovConfig) -> Res {
    let kind = match c.kind {
        KindArg::Sech => HomoclinicKind::Sech,
        KindArg::Tanh => HomoclinicKind::Tanh,
    };
    let branch = match c.branch {
        BranchArg::Plus => RootBranch::Plus,
        BranchArg::Minus => RootBranch::Minus,
    };
    let orbit = exact::homoclinic_orbit(c.a, c.b, c.c, kind, branch)?;
    let m = melnikov::melnikov(&orbit, c.gamma, c.delta, c.omega)?;
    let period = 2.0 * PI / c.omega;
    let mut table = Table::new(&["t0", "M"]);
    for i in 0..=c.samples {
        let t0 = period * i as f64 / c.samples as f64;
        table.push(vec![t0.into(), m.eval(t0).into()]);
    }
    Ok(Output {
        summary: summary(json!({
            "orbit": orbit,
            "phase": m.phase,
            "wave_amplitude": m.wave_amplitude,
            "damping_integral": m.damping_integral,
            "threshold_ratio": m.threshold_ratio,
            "gamma_c": c.delta * m.threshold_ratio,
            "simple_zeros": m.has_simple_zeros(),
            "fit_max_error": m.fit.max_error,
        })),
        table,
        plot: "plot DATA using 1:2 with lines".into(),
    })
}

fn poincare(c: &PoincareConfig) -> Res {
    let p = c.oscillator.params();
    let ctrl = chaos::strobe_control(&p, c.steps_per_period);
    let series = chaos::poincare_map(&p, State::new(0.0, c.x0, c.v0), c.n_points, c.n_transient, &ctrl)?;
    let mut table = Table::new(&["n", "x", "v"]);
    for (i, &(x, v)) in series.points.iter().enumerate() {
        table.push(vec![Cell::U((c.n_transient + i + 1) as u64), x.into(), v.into()]);
    }
    Ok(Output {
        summary: summary(json!({ "clusters": chaos::count_clusters(&series.points, 1e-4) })),
        table,
        plot: "plot DATA using 2:3 with dots".into(),
    })
}

fn reference_onset(omega: f64) -> (f64, f64) {
    REFERENCE_ONSETS
        .iter()
        .find(|r| (r.0 - omega).abs() < 1e-12)
        .map_or((f64::NAN, f64::NAN), |r| (r.1, r.2))
}

fn scan(c: &ScanConfig) -> Res {
    let base = OscillatorParams::driven(c.a, c.b, c.c, c.delta, 0.0, 1.0);
    let core = chaos::ScanConfig {
        gamma_lo: c.gamma_lo,
        gamma_hi: c.gamma_hi,
        grid_step: c.grid_step,
        resolution: c.resolution,
        threshold: c.threshold,
        initial: c.initial,
        lyapunov: c.lyapunov,
    };
    let outcomes: Vec<_> = c.omegas.par_iter().map(|&w| chaos::gamma_scan(&base.with_omega(w), &core)).collect::<Result<_, _>>()?;
    let mut table = Table::new(&["omega", "gamma_c", "lyapunov", "reference_gamma_c", "reference_lyapunov"]);
    let mut no_onset = 0;
    for (&w, o) in c.omegas.iter().zip(&outcomes) {
        let (g, l) = match o.onset() {
            Some(row) => (row.gamma_c, row.lyapunov),
            None => {
                no_onset += 1;
                (f64::NAN, f64::NAN)
            }
        };
        let (rg, rl) = reference_onset(w);
        table.push(vec![w.into(), g.into(), l.into(), rg.into(), rl.into()]);
    }
    Ok(Output {
        summary: summary(json!({ "rows": c.omegas.len(), "no_onset": no_onset })),
        table,
        plot: "plot DATA using 1:2 with linespoints, DATA using 1:4 with points".into(),
    })
}

fn bifurcate(c: &BifurcateConfig) -> Res {
    let base = OscillatorParams::new(c.a, c.b, c.c, c.delta, 0.0, c.omega, c.epsilon);
    let gammas: Vec<f64> = (0..c.n_gamma)
        .map(|i| {
            if c.n_gamma == 1 {
                c.gamma_lo
            } else {
                c.gamma_lo + (c.gamma_hi - c.gamma_lo) * i as f64 / (c.n_gamma - 1) as f64
            }
        })
        .collect();
    let ctrl = chaos::strobe_control(&base, c.steps_per_period);
    let slices = chaos::bifurcation_data(&base, &gammas, State::new(0.0, c.x0, c.v0), c.n_points, c.n_transient, &ctrl)?;
    let mut table = Table::new(&["gamma", "x"]);
    for s in &slices {
        for &x in &s.p_values {
            table.push(vec![s.gamma.into(), x.into()]);
        }
    }
    Ok(Output {
        summary: summary(json!({ "gammas": gammas.len() })),
        table,
        plot: "plot DATA using 1:2 with dots".into(),
    })
}

fn history(h: HistoryArg) -> HistoryPolicy {
    match h {
        HistoryArg::Zero => HistoryPolicy::Zero,
        HistoryArg::ConstantInitial => HistoryPolicy::ConstantInitial,
    }
}

fn control(c: &ControlConfig) -> Res {
    let p = c.oscillator.params();
    let s0 = State::new(0.0, c.x0, c.v0);
    let opts = RunOptions {
        steps_per_tau: c.steps_per_tau,
        window_taus: c.window_taus,
        tolerance: c.tolerance,
    };
    if c.search {
        let sc = SearchConfig {
            mu_range: c.mu_range,
            tau_range: c.tau_range,
            grid: c.grid,
            run: opts,
            history: history(c.history),
            t_end: Some(c.t_end),
            ..SearchConfig::default()
        };
        let res = pyragas::search_mu_tau(&p, s0, &sc)?;
        let mut table = Table::new(&["mu", "tau", "controller_norm", "is_periodic", "refined"]);
        for (cells, refined) in [(&res.cells, false), (&res.refined, true)] {
            for cell in cells {
                table.push(vec![cell.mu.into(), cell.tau.into(), cell.controller_norm.into(), Cell::B(cell.is_periodic), Cell::B(refined)]);
            }
        }
        return Ok(Output {
            summary: summary(json!({ "best": res.best() })),
            table,
            plot: "plot DATA using 1:2:3 with points palette".into(),
        });
    }
    let cfg = ControllerConfig {
        mu: c.mu,
        tau: c.tau,
        history: history(c.history),
    };
    let (traj, report) = pyragas::run_controlled(&p, &cfg, s0, c.t_end, &opts)?;
    let samples = traj.samples();
    let (_, t_final) = traj.span().expect("non-empty");
    let fit = pyragas::chebyshev_fit_orbit(&traj, (t_final - c.tau, t_final), c.fit_degree)?;
    let before = match cfg.history {
        HistoryPolicy::Zero => 0.0,
        HistoryPolicy::ConstantInitial => c.v0,
    };
    let mut table = Table::new(&["t", "x", "v", "controller"]);
    for (i, s) in samples.iter().enumerate() {
        let vd = if i >= c.steps_per_tau { samples[i - c.steps_per_tau].v } else { before };
        table.push(vec![s.t.into(), s.x.into(), s.v.into(), (c.mu * (vd - s.v)).into()]);
    }
    Ok(Output {
        summary: summary(json!({
            "report": report,
            "fit_monomial": fit.monomial,
            "fit_residual": fit.residual,
        })),
        table,
        plot: "plot DATA using 1:2 with lines, DATA using 1:4 with lines".into(),
    })
}

fn sde_run(c: &SdeConfig) -> Res {
    let p = OscillatorParams::new(c.a, c.b, c.c, 0.0, c.gamma, c.omega, c.epsilon);
    let cfg = sde::SdeConfig {
        dt: c.dt,
        n_steps: c.n_steps,
        seed: c.seed,
        sigma: c.sigma,
        ensemble: c.ensemble,
    };
    let paths = sde::euler_maruyama(&p, &cfg, State::new(0.0, c.x0, c.v0))?;
    let mut table = Table::new(&["path", "t", "x", "v"]);
    for (i, path) in paths.iter().enumerate() {
        for s in path.trajectory.samples() {
            table.push(vec![Cell::U(i as u64), s.t.into(), s.x.into(), s.v.into()]);
        }
    }
    let truncated = paths.iter().filter(|p| p.truncated).count();
    let moments = if paths.len() >= 2 && truncated == 0 {
        Some(sde::ensemble_stats(&paths, c.dt * c.n_steps as f64)?)
    } else {
        None
    };
    Ok(Output {
        summary: summary(json!({ "truncated": truncated, "moments": moments })),
        table,
        plot: "plot DATA using 2:3 with lines".into(),
    })
}
