//! Subcommand pipelines. Each returns rendered artifacts; nothing here
//! touches the file system.

use kerrbit::dispersive::{
    coefficients, dispersive_validity, lamb_shift_and_pull, purcell_rates, ResonanceGuard, Validity,
};
use kerrbit::lindblad::{evolve_from, EngineState, IntegratorOptions, SimulationConfig};
use kerrbit::oracle::oracle_coefficients;
use kerrbit::qubit::QubitSpec;
use kerrbit::quantum::HilbertLayout;
use kerrbit::readout::{optimize, OptimizationReport, PulseGrid};
use kerrbit::semiclassical::conditioned_cavities;
use kerrbit::units::{mhz, ns, to_mhz, to_ns};
use kerrbit::Error;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::output::{num, Artifact, CsvTable, TOOL_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Subcommand {
    Spectrum,
    Shifts,
    Oracle,
    Stability,
    Sweep,
    Readout,
    Optimize,
}

/// Everything a pipeline needs besides the parsed configuration.
pub struct RunContext<'a> {
    pub config: &'a RunConfig,
    pub config_sha256: &'a str,
}

impl RunContext<'_> {
    fn file(&self, suffix: &str) -> String {
        format!("{}_{suffix}", self.config.drive.label)
    }

    fn guard(&self) -> ResonanceGuard {
        ResonanceGuard::uniform(mhz(self.config.experiment.guard_mhz))
    }

    fn table(&self, columns: &[&str]) -> CsvTable {
        CsvTable::new(columns, self.config_sha256)
    }
}

pub fn dispatch(cmd: Subcommand, ctx: &RunContext) -> kerrbit::Result<Vec<Artifact>> {
    match cmd {
        Subcommand::Spectrum => spectrum(ctx).map(|a| vec![a]),
        Subcommand::Shifts => shifts(ctx).map(|a| vec![a]),
        Subcommand::Oracle => oracle(ctx).map(|a| vec![a]),
        Subcommand::Stability => stability(ctx).map(|a| vec![a]),
        Subcommand::Sweep => sweep(ctx).map(|a| vec![a]),
        Subcommand::Readout => readout(ctx, false),
        Subcommand::Optimize => readout(ctx, true),
    }
}

fn spectrum(ctx: &RunContext) -> kerrbit::Result<Artifact> {
    let spec = ctx.config.qubit_spec()?;
    let mut t = ctx.table(&["level", "nu_MHz", "transition_MHz", "g_MHz"]);
    let m = spec.levels();
    for i in 0..m {
        let (tr, g) = if i + 1 < m { (to_mhz(spec.transition(i)), to_mhz(spec.couplings()[i])) } else { (f64::NAN, f64::NAN) };
        t.row(&[i.to_string(), num(to_mhz(spec.freqs()[i])), num(tr), num(g)]);
    }
    Ok(t.finish(ctx.file("spectrum.csv")))
}

fn validity_code(v: Validity) -> i32 {
    match v {
        Validity::Valid => 0,
        Validity::Marginal => 1,
        Validity::Breakdown => 2,
    }
}

fn shifts(ctx: &RunContext) -> kerrbit::Result<Artifact> {
    let cfg = ctx.config;
    let spec = cfg.qubit_spec()?;
    let guard = ctx.guard();
    let m = spec.levels();
    let rows: Vec<Vec<Vec<String>>> = cfg
        .nu_d_grid()
        .par_iter()
        .map(|&nu_d| {
            let drive = cfg.drive_context(nu_d, cfg.drive.eps_d_mhz);
            let nan_row = |i: usize| {
                let mut r = vec![num(nu_d), i.to_string()];
                r.extend(std::iter::repeat_n(num(f64::NAN), 6));
                r.push("-1".into());
                r
            };
            let Ok(c) = coefficients(&spec, drive.omega_d, &guard) else {
                return (0..m).map(nan_row).collect();
            };
            let alphas: Vec<C64> = conditioned_cavities(&spec, &drive, &guard)
                .map(|cav| {
                    cav.iter().map(|k| k.steady_states(drive.eps_d).first().map_or(C64::default(), |s| s.alpha)).collect()
                })
                .unwrap_or_default();
            let validity = dispersive_validity(&c, &alphas);
            let purcell = purcell_rates(&spec, drive.omega_r, drive.kappa, &guard).ok();
            (0..m)
                .map(|i| {
                    let alpha_sq = alphas.get(i).map_or(0.0, |a| a.norm_sqr());
                    let lamb = lamb_shift_and_pull(&spec, &drive, alpha_sq, &guard).map_or(f64::NAN, |l| to_mhz(l.lamb[i]));
                    let purcell_khz = match &purcell {
                        Some(p) => p.get(i).map_or(0.0, |r| to_mhz(*r) * 1e3),
                        None => f64::NAN,
                    };
                    vec![
                        num(nu_d),
                        i.to_string(),
                        num(to_mhz(c.stark[i])),
                        num(to_mhz(c.kerr1[i])),
                        num(to_mhz(c.kerr[i])),
                        num(to_mhz(c.g2[i])),
                        num(lamb),
                        num(purcell_khz),
                        validity_code(validity.per_level[i]).to_string(),
                    ]
                })
                .collect()
        })
        .collect();
    let mut t = ctx.table(&[
        "omega_d_MHz",
        "level",
        "S_MHz",
        "K1_MHz",
        "K_MHz",
        "g2_MHz",
        "lamb_MHz",
        "purcell_kHz",
        "valid_flag",
    ]);
    rows.iter().flatten().for_each(|r| t.row(r));
    Ok(t.finish(ctx.file("shifts.csv")))
}

fn oracle(ctx: &RunContext) -> kerrbit::Result<Artifact> {
    let cfg = ctx.config;
    let spec = cfg.qubit_spec()?;
    let guard = ctx.guard();
    let n_fit = cfg.experiment.n_fit;
    let rows: Vec<kerrbit::Result<Vec<Vec<String>>>> = cfg
        .nu_d_grid()
        .par_iter()
        .map(|&nu| {
            let omega = mhz(nu);
            let fitted = oracle_coefficients(&spec, omega, n_fit)?;
            let analytic = coefficients(&spec, omega, &guard).ok();
            Ok(fitted
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    let (s_an, k_an) = analytic.as_ref().map_or((f64::NAN, f64::NAN), |c| (c.stark[i], c.kerr[i]));
                    let rel = ((f.stark - s_an) / s_an).abs();
                    vec![
                        num(nu),
                        i.to_string(),
                        num(to_mhz(f.stark)),
                        num(to_mhz(f.kerr)),
                        num(to_mhz(s_an)),
                        num(to_mhz(k_an)),
                        num(rel),
                        num(f.min_overlap),
                    ]
                })
                .collect())
        })
        .collect();
    let mut t = ctx.table(&[
        "omega_MHz",
        "level",
        "S_num_MHz",
        "K_num_MHz",
        "S_analytic_MHz",
        "K_analytic_MHz",
        "rel_err_S",
        "overlap_min",
    ]);
    for r in rows {
        r?.iter().for_each(|row| t.row(row));
    }
    Ok(t.finish(ctx.file("oracle.csv")))
}

fn stability(ctx: &RunContext) -> kerrbit::Result<Artifact> {
    let cfg = ctx.config;
    let spec = cfg.qubit_spec()?;
    let guard = ctx.guard();
    let m = spec.levels();
    let rows: Vec<Vec<Vec<String>>> = cfg
        .nu_d_grid()
        .par_iter()
        .map(|&nu_d| {
            let drive = cfg.drive_context(nu_d, cfg.drive.eps_d_mhz);
            match conditioned_cavities(&spec, &drive, &guard) {
                Ok(cavities) => cavities
                    .iter()
                    .map(|cav| {
                        let (eps_l, eps_h, bistable) = match cav.thresholds() {
                            Ok(th) if th.bistable => (to_mhz(th.eps_l), to_mhz(th.eps_h), 1),
                            _ => (f64::NAN, f64::NAN, 0),
                        };
                        vec![
                            num(nu_d),
                            cav.level.to_string(),
                            num(eps_l),
                            num(eps_h),
                            num(cav.reduced_detuning()),
                            bistable.to_string(),
                        ]
                    })
                    .collect(),
                Err(_) => (0..m)
                    .map(|i| vec![num(nu_d), i.to_string(), num(f64::NAN), num(f64::NAN), num(f64::NAN), "-1".into()])
                    .collect(),
            }
        })
        .collect();
    let mut t = ctx.table(&["omega_d_MHz", "level", "eps_L_MHz", "eps_H_MHz", "Omega_reduced", "bistable"]);
    rows.iter().flatten().for_each(|r| t.row(r));
    Ok(t.finish(ctx.file("stability.csv")))
}

/// Master-equation setup at one drive frequency; the drive amplitude is set
/// by the caller through the envelope.
fn dynamics_config(cfg: &RunConfig, spec: &QubitSpec, nu_d: f64, t1_ns: f64) -> kerrbit::Result<SimulationConfig> {
    let sim = &cfg.simulation;
    let layout = HilbertLayout::new(sim.levels, sim.fock)?;
    let mut config = SimulationConfig::constant(
        layout,
        spec.truncated(sim.levels)?,
        cfg.drive_context(nu_d, 0.0),
        1.0 / ns(t1_ns),
        0.0,
        ns(sim.t_final_ns),
    );
    config.integrator = IntegratorOptions { rel_tol: sim.rel_tol, abs_tol: sim.abs_tol, ..Default::default() };
    config.validate()?;
    Ok(config)
}

/// Truncation flag values: 0 ok, 1 Fock truncation overflow, 2 other failure.
fn sweep(ctx: &RunContext) -> kerrbit::Result<Artifact> {
    let cfg = ctx.config;
    let spec = cfg.qubit_spec()?;
    let eps_grid = cfg
        .experiment
        .eps_d
        .map_or_else(|| vec![cfg.drive.eps_d_mhz], |r| r.values());
    let bases: Vec<(f64, SimulationConfig)> = cfg
        .nu_d_grid()
        .into_iter()
        .map(|nu| dynamics_config(cfg, &spec, nu, cfg.simulation.t1_ns).map(|c| (nu, c)))
        .collect::<kerrbit::Result<_>>()?;
    for &level in &cfg.experiment.init_levels {
        bases[0].1.layout.check_level_pub(level)?;
    }
    let mut jobs = Vec::new();
    for (b, _) in bases.iter().enumerate() {
        for &eps in &eps_grid {
            for &level in &cfg.experiment.init_levels {
                jobs.push((b, eps, level));
            }
        }
    }
    let rows: Vec<Vec<String>> = jobs
        .par_iter()
        .map(|&(b, eps, level)| {
            let (nu, base) = &bases[b];
            let config = SimulationConfig { envelope: kerrbit::lindblad::Envelope::Constant(mhz(eps)), ..base.clone() };
            let result = EngineState::ground_resonator(config.layout, level).and_then(|s| evolve_from(&config, &s));
            let (n, dev, flag) = match result {
                Ok(tr) => (tr.last().photon_number, tr.max_trace_deviation(), 0),
                Err(e) => {
                    log::warn!("sweep point nu_d={nu} MHz eps_d={eps} MHz level={level}: {e}");
                    let flag = if matches!(e, Error::TruncationOverflow { .. }) { 1 } else { 2 };
                    (f64::NAN, f64::NAN, flag)
                }
            };
            vec![num(*nu), num(eps), level.to_string(), num(n), num(dev), flag.to_string()]
        })
        .collect();
    let mut t = ctx.table(&["omega_d_MHz", "eps_d_MHz", "init_level", "n_final", "trace_dev", "truncation_flag"]);
    rows.iter().for_each(|r| t.row(r));
    Ok(t.finish(ctx.file("sweep.csv")))
}

fn pulse_grid(cfg: &RunConfig) -> PulseGrid {
    let e = &cfg.experiment;
    PulseGrid {
        t_s: e.t_s_ns.iter().map(|v| ns(*v)).collect(),
        sigma: e.sigma_ns.iter().map(|v| ns(*v)).collect(),
        d_eps: e.d_eps_mhz.iter().map(|v| mhz(*v)).collect(),
        eps_s: e.eps_s_mhz.iter().map(|v| mhz(*v)).collect(),
        t_hold: ns(e.t_hold_ns),
    }
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

fn readout(ctx: &RunContext, summary: bool) -> kerrbit::Result<Vec<Artifact>> {
    let cfg = ctx.config;
    let spec = cfg.qubit_spec()?;
    let grid = pulse_grid(cfg);
    let nu_d = cfg.drive.nu_d_mhz;
    let mut reports: Vec<(f64, OptimizationReport)> = Vec::new();
    for &t1 in &cfg.experiment.t1_ns {
        let base = dynamics_config(cfg, &spec, nu_d, t1)?;
        log::info!("readout {}: T1 = {t1} ns", cfg.drive.label);
        reports.push((t1, optimize(&base, &grid)?));
    }

    let mut t = ctx.table(&[
        "point_label",
        "T1_ns",
        "t_s_ns",
        "sigma_ns",
        "d_eps_MHz",
        "eps_s_MHz",
        "P_0_given_1",
        "P_1_given_0",
        "P_error",
    ]);
    for (t1, report) in &reports {
        for point in &report.points {
            let p = &point.program;
            let (p01, p10, pe) = match &point.outcome {
                Ok(o) => (o.p_0_given_1(), o.p_1_given_0(), o.p_error),
                Err(e) => {
                    log::warn!("readout point T1={t1} ns sigma={} ns eps_s={} MHz: {e}", to_ns(p.sigma), to_mhz(p.eps_s));
                    (f64::NAN, f64::NAN, f64::NAN)
                }
            };
            t.row(&[
                cfg.drive.label.clone(),
                num(*t1),
                num(to_ns(p.t_s)),
                num(to_ns(p.sigma)),
                num(to_mhz(p.d_eps)),
                num(to_mhz(p.eps_s)),
                num(p01),
                num(p10),
                num(pe),
            ]);
        }
    }
    let mut out = vec![t.finish(ctx.file("readout.csv"))];
    if summary {
        let runs: Vec<Value> = reports
            .iter()
            .map(|(t1, report)| {
                let best: Vec<Value> = report
                    .best
                    .iter()
                    .map(|b| {
                        let mut entry = json!({ "t_s_ns": to_ns(b.t_s), "failures": b.failures });
                        if let Some((p, o)) = &b.best {
                            entry["sigma_ns"] = json!(to_ns(p.sigma));
                            entry["eps_s_MHz"] = json!(to_mhz(p.eps_s));
                            entry["d_eps_MHz"] = json!(to_mhz(p.d_eps));
                            entry["P_0_given_1"] = json!(o.p_0_given_1());
                            entry["P_1_given_0"] = json!(o.p_1_given_0());
                            entry["P_error"] = json!(o.p_error);
                        }
                        entry
                    })
                    .collect();
                json!({ "T1_ns": finite_or_null(*t1), "h_label": report.h_label, "best": best })
            })
            .collect();
        let doc = json!({
            "schema": "kerrbit.optimize/1",
            "tool_version": TOOL_VERSION,
            "config_sha256": ctx.config_sha256,
            "point_label": cfg.drive.label,
            "nu_d_MHz": nu_d,
            "t_hold_ns": cfg.experiment.t_hold_ns,
            "runs": runs,
        });
        let text = serde_json::to_string_pretty(&doc).expect("JSON value serializes") + "\n";
        out.push(Artifact { file_name: ctx.file("optimize.json"), contents: text });
    }
    Ok(out)
}
