use num_complex::Complex64 as C64;

use super::generator::{Generator, PackedLayout};
use super::integrator::{Dopri5, IntegratorOptions, OdeSystem, StepStats};
use crate::dispersive::DriveContext;
use crate::error::{Error, Result};
use crate::quantum::{DensityMatrix, HilbertLayout};
use crate::qubit::QubitSpec;

/// Drive amplitude ε(t) in rad/s.
#[derive(Debug, Clone, PartialEq)]
pub enum Envelope {
    Constant(f64),
    /// Linear interpolation through (t, ε) knots sorted by time; constant
    /// beyond either end.
    PiecewiseLinear(Vec<(f64, f64)>),
}

impl Envelope {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Envelope::Constant(e) => *e,
            Envelope::PiecewiseLinear(knots) => {
                let Some(first) = knots.first() else { return 0.0 };
                if t <= first.0 {
                    return first.1;
                }
                for w in knots.windows(2) {
                    let ((t0, e0), (t1, e1)) = (w[0], w[1]);
                    if t <= t1 {
                        if t1 == t0 {
                            return e1;
                        }
                        return e0 + (e1 - e0) * (t - t0) / (t1 - t0);
                    }
                }
                knots.last().map_or(0.0, |k| k.1)
            }
        }
    }

    /// Times where the envelope has a kink.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Envelope::Constant(_) => Vec::new(),
            Envelope::PiecewiseLinear(knots) => knots.iter().map(|k| k.0).collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        if let Envelope::PiecewiseLinear(knots) = self {
            if knots.windows(2).any(|w| w[1].0 < w[0].0) || knots.iter().any(|k| !k.0.is_finite() || !k.1.is_finite()) {
                return Err(Error::InvalidParameter("envelope knots must be finite and time-ordered".into()));
            }
        }
        Ok(())
    }
}

/// Population of the top Fock levels above which a run is rejected.
pub const TRUNCATION_LIMIT: f64 = 1e-4;
/// Number of top Fock levels watched by the truncation check.
pub const TRUNCATION_LEVELS: usize = 2;
/// Default evolution horizon of the steady-state protocol (2 µs).
pub const DEFAULT_HORIZON: f64 = 2e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub layout: HilbertLayout,
    pub spec: QubitSpec,
    /// ω_d, ω_r, κ and K; `eps_d` is unused, the envelope sets the drive.
    pub ctx: DriveContext,
    /// Qubit decay rate γ = 1/T₁ of the 0 ↔ 1 transition.
    pub gamma: f64,
    pub envelope: Envelope,
    pub integrator: IntegratorOptions,
    /// Absolute end time in seconds.
    pub t_final: f64,
    /// Absolute observation times; t_final is always observed.
    pub schedule: Vec<f64>,
    /// Absolute times at which full states are kept for later branching.
    pub snapshots: Vec<f64>,
}

impl SimulationConfig {
    /// Constant drive, observed only at t_final.
    pub fn constant(layout: HilbertLayout, spec: QubitSpec, ctx: DriveContext, gamma: f64, eps: f64, t_final: f64) -> Self {
        Self {
            layout,
            spec,
            ctx,
            gamma,
            envelope: Envelope::Constant(eps),
            integrator: IntegratorOptions::default(),
            t_final,
            schedule: Vec::new(),
            snapshots: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.ctx.validate()?;
        self.integrator.validate()?;
        self.envelope.validate()?;
        if !(self.gamma >= 0.0) {
            return Err(Error::InvalidParameter("γ must be non-negative".into()));
        }
        if !(self.t_final > 0.0) {
            return Err(Error::InvalidParameter("t_final must be positive".into()));
        }
        if self.spec.levels() < self.layout.levels() {
            return Err(Error::InvalidSpec(format!(
                "spec has {} levels, layout needs {}",
                self.spec.levels(),
                self.layout.levels()
            )));
        }
        Ok(())
    }
}

/// Observables at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub time: f64,
    pub photon_number: f64,
    pub field: C64,
    pub populations: Vec<f64>,
    pub trace_deviation: f64,
    pub top_fock_population: f64,
}

/// Packed state that can seed further evolutions.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineState {
    layout: HilbertLayout,
    time: f64,
    data: Vec<f64>,
}

impl EngineState {
    pub fn from_density(rho: &DensityMatrix) -> Result<Self> {
        let packed = PackedLayout::new(*rho.layout());
        Ok(Self { layout: *rho.layout(), time: rho.time(), data: packed.pack(rho)? })
    }

    /// |level⟩ ⊗ |0⟩.
    pub fn ground_resonator(layout: HilbertLayout, level: usize) -> Result<Self> {
        layout.check_level_pub(level)?;
        let packed = PackedLayout::new(layout);
        let mut data = vec![0.0; 2 * packed.len()];
        let x = packed.internal(level, 0);
        data[packed.offset(x, x)] = 1.0;
        Ok(Self { layout, time: 0.0, data })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn to_density(&self) -> DensityMatrix {
        PackedLayout::new(self.layout).unpack(&self.data, self.time)
    }

    pub fn observe(&self) -> Observation {
        observe(&PackedLayout::new(self.layout), &self.data, self.time)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub observations: Vec<Observation>,
    pub final_state: EngineState,
    /// States at the requested snapshot times, in order.
    pub snapshots: Vec<EngineState>,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn last(&self) -> &Observation {
        self.observations.last().expect("t_final is always observed")
    }

    pub fn times(&self) -> Vec<f64> {
        self.observations.iter().map(|o| o.time).collect()
    }

    pub fn max_trace_deviation(&self) -> f64 {
        self.observations.iter().map(|o| o.trace_deviation).fold(0.0, f64::max)
    }
}

fn observe(packed: &PackedLayout, data: &[f64], time: f64) -> Observation {
    let fock = packed.fock_distribution(data);
    Observation {
        time,
        photon_number: fock.iter().enumerate().map(|(n, p)| n as f64 * p).sum(),
        field: packed.mean_field(data),
        populations: packed.populations(data),
        trace_deviation: (packed.trace(data) - 1.0).abs(),
        top_fock_population: fock.iter().rev().take(TRUNCATION_LEVELS).sum(),
    }
}

struct Driven<'a> {
    generator: &'a Generator,
    envelope: &'a Envelope,
}

impl OdeSystem for Driven<'_> {
    fn rhs(&mut self, t: f64, y: &[f64], dy: &mut [f64]) {
        self.generator.apply(self.envelope.value(t), y, dy);
    }

    fn error_norm(&self, err: &[f64], y0: &[f64], y1: &[f64], rel_tol: f64, abs_tol: f64) -> f64 {
        self.generator.packed().rms_error(err, y0, y1, rel_tol, abs_tol)
    }
}

/// Evolves a density matrix from its own time to `config.t_final`.
pub fn evolve(config: &SimulationConfig, rho0: &DensityMatrix) -> Result<Trajectory> {
    evolve_from(config, &EngineState::from_density(rho0)?)
}

/// Evolves a packed state from its time to `config.t_final`.
pub fn evolve_from(config: &SimulationConfig, start: &EngineState) -> Result<Trajectory> {
    config.validate()?;
    if start.layout != config.layout {
        return Err(Error::DimensionMismatch { expected: config.layout.dim(), found: start.layout.dim() });
    }
    let t0 = start.time;
    if config.t_final <= t0 {
        return Err(Error::InvalidParameter(format!("t_final {:e} not after start {t0:e}", config.t_final)));
    }
    let generator = Generator::new(config.layout, &config.spec, &config.ctx, config.gamma)?;
    let packed = generator.packed().clone();

    // Stops: breakpoints (clamp only), observations and snapshots.
    const OBSERVE: u8 = 1;
    const SNAPSHOT: u8 = 2;
    let mut stops: Vec<(f64, u8)> = Vec::new();
    let inside = |t: f64| t > t0 && t <= config.t_final;
    stops.extend(config.envelope.breakpoints().into_iter().filter(|t| inside(*t)).map(|t| (t, 0)));
    stops.extend(config.schedule.iter().filter(|t| inside(**t)).map(|t| (*t, OBSERVE)));
    stops.extend(config.snapshots.iter().filter(|t| inside(**t)).map(|t| (*t, SNAPSHOT)));
    stops.push((config.t_final, OBSERVE));
    stops.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, u8)> = Vec::new();
    for (t, f) in stops {
        match merged.last_mut() {
            Some(last) if (last.0 - t).abs() <= 1e-15 * t.abs().max(1e-12) => last.1 |= f,
            _ => merged.push((t, f)),
        }
    }
    let times: Vec<f64> = merged.iter().map(|s| s.0).collect();

    let mut y = start.data.clone();
    let mut observations = Vec::new();
    if config.schedule.iter().any(|t| *t == t0) {
        observations.push(observe(&packed, &y, t0));
    }
    let mut snapshots = Vec::new();
    let mut system = Driven { generator: &generator, envelope: &config.envelope };
    let mut dp = Dopri5::new(config.integrator, y.len());
    dp.integrate(&mut system, t0, &mut y, &times, |idx, t, state| {
        let flags = merged[idx].1;
        if flags & OBSERVE != 0 {
            let obs = observe(&packed, state, t);
            if obs.top_fock_population >= TRUNCATION_LIMIT {
                return Err(Error::TruncationOverflow { population: obs.top_fock_population, time: t });
            }
            observations.push(obs);
        }
        if flags & SNAPSHOT != 0 {
            snapshots.push(EngineState { layout: config.layout, time: t, data: state.to_vec() });
        }
        Ok(())
    })?;
    let stats = dp.stats();
    log::debug!(
        "evolution to {:.1} ns: {} steps, {} rejected, {} rhs evaluations",
        config.t_final * 1e9,
        stats.accepted,
        stats.rejected,
        stats.rhs_evals
    );
    Ok(Trajectory {
        observations,
        final_state: EngineState { layout: config.layout, time: config.t_final, data: y },
        snapshots,
        stats,
    })
}

/// ⟨a†a⟩ after evolving |level⟩ ⊗ |0⟩ under a constant drive until
/// `config.t_final`.
pub fn steady_photon_number(config: &SimulationConfig, level: usize) -> Result<f64> {
    if !matches!(config.envelope, Envelope::Constant(_)) {
        return Err(Error::InvalidParameter("steady-state protocol needs a constant drive".into()));
    }
    let start = EngineState::ground_resonator(config.layout, level)?;
    Ok(evolve_from(config, &start)?.last().photon_number)
}
