//! Sample-and-hold bifurcation readout: pulse envelopes, Q-function outcome
//! classification, error probabilities and the pulse-parameter search.

use rayon::prelude::*;

use crate::dispersive::ResonanceGuard;
use crate::error::{Error, Result};
use crate::lindblad::{evolve_from, EngineState, Envelope, SimulationConfig, Trajectory};
use crate::quantum::{q_function, DensityMatrix, PhaseSpaceGrid, QFunction};
use crate::semiclassical::{conditioned_cavities, Branch, KerrCavity};

/// Duration of the linear step from the sample to the hold amplitude.
pub const STEP_DOWN: f64 = 10e-9;
/// Default hold duration.
pub const DEFAULT_HOLD: f64 = 500e-9;
/// Q-grid points per axis.
pub const Q_GRID_POINTS: usize = 101;
/// Q-grid half width in units of |α_H|.
pub const Q_GRID_SPAN: f64 = 1.2;
/// Local maxima below this fraction of the global maximum are ignored.
const PEAK_FLOOR: f64 = 0.05;

/// Sample-and-hold drive: ramp 0 → ε_s over σ, plateau for t_s, step down by
/// δε_m over [`STEP_DOWN`] and hold until σ + t_s + t_hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseProgram {
    pub sigma: f64,
    pub eps_s: f64,
    pub t_s: f64,
    pub d_eps: f64,
    pub t_hold: f64,
}

impl PulseProgram {
    pub fn validate(&self) -> Result<()> {
        let durations = [self.sigma, self.t_s, self.t_hold];
        if durations.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidParameter("pulse durations must be non-negative".into()));
        }
        if !(self.d_eps >= 0.0 && self.d_eps < self.eps_s) || !self.eps_s.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "need 0 ≤ δε_m < ε_s, got δε_m = {:e}, ε_s = {:e}",
                self.d_eps, self.eps_s
            )));
        }
        if self.t_hold < STEP_DOWN {
            return Err(Error::InvalidParameter("hold shorter than the step-down edge".into()));
        }
        Ok(())
    }

    pub fn hold_amplitude(&self) -> f64 {
        self.eps_s - self.d_eps
    }

    /// End of the sample plateau.
    pub fn sample_end(&self) -> f64 {
        self.sigma + self.t_s
    }

    /// Classification time σ + t_s + t_hold.
    pub fn end(&self) -> f64 {
        self.sigma + self.t_s + self.t_hold
    }

    pub fn envelope(&self) -> Envelope {
        let s = self.sample_end();
        Envelope::PiecewiseLinear(vec![
            (0.0, 0.0),
            (self.sigma, self.eps_s),
            (s, self.eps_s),
            (s + STEP_DOWN, self.hold_amplitude()),
            (self.end(), self.hold_amplitude()),
        ])
    }
}

/// Peak structure of a Q function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QDiagnostics {
    pub peak_count: usize,
    /// Distance between the two highest peaks, zero with a single peak.
    pub peak_separation: f64,
    pub grid_spacing: f64,
    /// Σ Q ΔA over the grid.
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub p_switch: f64,
    pub radius: f64,
    pub diagnostics: QDiagnostics,
    /// Largest trace deviation along the evolution that produced the state;
    /// zero when a state is classified directly.
    pub trace_deviation: f64,
}

/// Local maxima of Q above [`PEAK_FLOOR`] of the global maximum, as
/// (|α|, α, value), highest first.
fn peaks(q: &QFunction) -> Vec<(f64, num_complex::Complex64, f64)> {
    let grid = q.grid();
    let p = grid.points();
    let top = q.values().iter().copied().fold(0.0, f64::max);
    let mut found = Vec::new();
    for iy in 0..p {
        for ix in 0..p {
            let v = q.value(ix, iy);
            if v < PEAK_FLOOR * top {
                continue;
            }
            let mut is_max = true;
            for (dx, dy) in [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)] {
                let (jx, jy) = (ix as isize + dx, iy as isize + dy);
                if jx < 0 || jy < 0 || jx >= p as isize || jy >= p as isize {
                    continue;
                }
                let w = q.value(jx as usize, jy as usize);
                // Ties resolve to the first grid point in scan order.
                if w > v || (w == v && (jy, jx) < (iy as isize, ix as isize)) {
                    is_max = false;
                    break;
                }
            }
            if is_max {
                let a = grid.alpha(ix, iy);
                found.push((a.norm(), a, v));
            }
        }
    }
    found.sort_by(|a, b| b.2.total_cmp(&a.2));
    found
}

/// Switching probability 1 − Σ_{|α|≤r*} Q ΔA of a resonator state.
pub fn classify(rho: &DensityMatrix, radius: f64, half_width: f64) -> Result<Classification> {
    if !(radius > 0.0 && half_width > radius) {
        return Err(Error::InvalidParameter(format!("grid half width {half_width} must exceed r* = {radius}")));
    }
    let grid = PhaseSpaceGrid::square(half_width, Q_GRID_POINTS);
    let q = q_function(rho, grid);
    let spacing = q.grid().spacing();
    let found = peaks(&q);
    let separation = if found.len() >= 2 { (found[0].1 - found[1].1).norm() } else { 0.0 };
    let diagnostics = QDiagnostics {
        peak_count: found.len(),
        peak_separation: separation,
        grid_spacing: spacing,
        weight: q.weight(),
    };
    let straddles = found.len() == 1 && (found[0].0 - radius).abs() < 2.0 * spacing;
    let merged = found.len() >= 2 && separation < 2.0 * spacing;
    if straddles || merged {
        return Err(Error::PeaksUnresolved { threshold: radius });
    }
    // The disk |α| ≤ r* lies inside the grid, so its complement also counts
    // the weight beyond the grid edge.
    let p_switch = 1.0 - (q.weight() - q.weight_beyond(radius));
    Ok(Classification { p_switch, radius, diagnostics, trace_deviation: 0.0 })
}

/// Threshold radius r* and Q-grid half width for the qubit in `level` at
/// drive amplitude `eps`. Inside the bistable window r* = (|α_L| + |α_H|)/2;
/// elsewhere the fold photon numbers stand in for the missing branch.
pub fn classification_radius(cavity: &KerrCavity, eps: f64) -> Result<(f64, f64)> {
    let th = cavity.thresholds()?;
    let roots = cavity.steady_states(eps);
    let low = roots
        .iter()
        .find(|s| s.branch == Branch::Low && th.bistable && eps >= th.eps_l)
        .map_or(th.n_fold_l.sqrt(), |s| s.n.sqrt());
    let high = roots
        .iter()
        .find(|s| s.branch == Branch::High)
        .map_or(th.n_fold_h.sqrt(), |s| s.n.sqrt());
    let high = high.max(th.n_fold_h.sqrt());
    Ok((0.5 * (low + high), Q_GRID_SPAN * high))
}

/// Probability that the resonator latches into H with the qubit prepared in
/// `level`, evaluated at the end of the hold.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub level: usize,
    pub classification: Classification,
    pub trajectory: Trajectory,
}

fn cavities(base: &SimulationConfig) -> Result<Vec<KerrCavity>> {
    conditioned_cavities(&base.spec, &base.ctx, &ResonanceGuard::default())
}

fn classify_state(cavity: &KerrCavity, program: &PulseProgram, rho: &DensityMatrix) -> Result<Classification> {
    let (radius, half_width) = classification_radius(cavity, program.hold_amplitude())?;
    classify(rho, radius, half_width)
}

fn pulse_config(base: &SimulationConfig, program: &PulseProgram, snapshots: Vec<f64>) -> SimulationConfig {
    SimulationConfig {
        envelope: program.envelope(),
        t_final: program.end(),
        schedule: Vec::new(),
        snapshots,
        ..base.clone()
    }
}

/// Runs the pulse from |level⟩ ⊗ |0⟩ and classifies the final resonator state.
pub fn measure(base: &SimulationConfig, program: &PulseProgram, level: usize) -> Result<Measurement> {
    program.validate()?;
    let cavity = *cavities(base)?.get(level).ok_or(Error::IndexOutOfRange { index: level, limit: base.spec.levels() })?;
    let start = EngineState::ground_resonator(base.layout, level)?;
    let trajectory = evolve_from(&pulse_config(base, program, Vec::new()), &start)?;
    let mut classification = classify_state(&cavity, program, &trajectory.final_state.to_density())?;
    classification.trace_deviation = trajectory.max_trace_deviation();
    Ok(Measurement { level, classification, trajectory })
}

/// Which qubit level the H outcome reports, from the order of the
/// semiclassical upper thresholds: the level that switches first maps to H.
pub fn h_label(base: &SimulationConfig) -> Result<usize> {
    let cav = cavities(base)?;
    let e0 = cav[0].thresholds()?.eps_h;
    let e1 = cav[1].thresholds()?.eps_h;
    Ok(if e0 <= e1 { 0 } else { 1 })
}

/// Conditional assignment probabilities and the worst-case error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutOutcome {
    /// p[i][j] = P(j | i).
    pub p: [[f64; 2]; 2],
    pub p_error: f64,
    /// Qubit level assigned to the H outcome.
    pub h_label: usize,
    pub classifications: [Classification; 2],
}

impl ReadoutOutcome {
    fn from_switching(h_label: usize, c0: Classification, c1: Classification) -> Self {
        let mut p = [[0.0; 2]; 2];
        for (i, c) in [c0, c1].iter().enumerate() {
            let ps = c.p_switch.clamp(0.0, 1.0);
            p[i][h_label] = ps;
            p[i][1 - h_label] = 1.0 - ps;
        }
        Self { p, p_error: p[0][1].max(p[1][0]), h_label, classifications: [c0, c1] }
    }

    pub fn p_1_given_0(&self) -> f64 {
        self.p[0][1]
    }

    pub fn p_0_given_1(&self) -> f64 {
        self.p[1][0]
    }

    pub fn max_trace_deviation(&self) -> f64 {
        self.classifications[0].trace_deviation.max(self.classifications[1].trace_deviation)
    }
}

/// Measures both preparations and maps outcomes to qubit labels.
pub fn error_probability(base: &SimulationConfig, program: &PulseProgram) -> Result<ReadoutOutcome> {
    let label = h_label(base)?;
    let m0 = measure(base, program, 0)?;
    let m1 = measure(base, program, 1)?;
    Ok(ReadoutOutcome::from_switching(label, m0.classification, m1.classification))
}

/// Pulse-parameter grids for [`optimize`]; amplitudes in rad/s, times in s.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseGrid {
    pub t_s: Vec<f64>,
    pub sigma: Vec<f64>,
    pub d_eps: Vec<f64>,
    pub eps_s: Vec<f64>,
    pub t_hold: f64,
}

impl PulseGrid {
    fn validate(&self) -> Result<()> {
        if self.t_s.is_empty() || self.sigma.is_empty() || self.d_eps.is_empty() || self.eps_s.is_empty() {
            return Err(Error::InvalidParameter("pulse grids must be non-empty".into()));
        }
        Ok(())
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub program: PulseProgram,
    pub outcome: std::result::Result<ReadoutOutcome, String>,
}

/// Lowest worst-case error for one sampling time.
#[derive(Debug, Clone, PartialEq)]
pub struct BestProgram {
    pub t_s: f64,
    pub best: Option<(PulseProgram, ReadoutOutcome)>,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationReport {
    pub h_label: usize,
    /// Every grid point, ordered by (σ, ε_s, t_s, δε_m) grid index.
    pub points: Vec<GridPoint>,
    /// One entry per t_s, in grid order.
    pub best: Vec<BestProgram>,
}

/// Switching classification for every (t_s, δε_m) branch of one trunk.
type BranchResults = Vec<std::result::Result<Classification, String>>;

/// Evolves the shared ramp and plateau once, then every (t_s, δε_m) branch
/// from the snapshot at σ + t_s.
fn run_trunk(
    base: &SimulationConfig,
    cavity: &KerrCavity,
    level: usize,
    sigma: f64,
    eps_s: f64,
    grid: &PulseGrid,
) -> Result<BranchResults> {
    let longest = grid.t_s.iter().copied().fold(0.0, f64::max);
    let trunk_program = PulseProgram { sigma, eps_s, t_s: longest, d_eps: 0.0, t_hold: grid.t_hold };
    let ends: Vec<f64> = grid.t_s.iter().map(|t| sigma + t).collect();
    let mut trunk_config = pulse_config(base, &trunk_program, ends.clone());
    trunk_config.t_final = sigma + longest;
    let start = EngineState::ground_resonator(base.layout, level)?;
    let (snapshots, trunk_deviation) = if trunk_config.t_final > 0.0 {
        let trunk = evolve_from(&trunk_config, &start)?;
        let deviation = trunk.max_trace_deviation();
        (trunk.snapshots, deviation)
    } else {
        (Vec::new(), 0.0)
    };
    let snapshot_at = |t: f64| -> EngineState {
        if t <= 0.0 {
            return start.clone();
        }
        snapshots
            .iter()
            .find(|s| (s.time() - t).abs() <= 1e-12 * t)
            .cloned()
            .expect("every sample end is a snapshot")
    };
    let mut out = Vec::with_capacity(grid.t_s.len() * grid.d_eps.len());
    for &t_s in &grid.t_s {
        let state = snapshot_at(sigma + t_s);
        for &d_eps in &grid.d_eps {
            let program = PulseProgram { sigma, eps_s, t_s, d_eps, t_hold: grid.t_hold };
            let result = program
                .validate()
                .and_then(|_| evolve_from(&pulse_config(base, &program, Vec::new()), &state))
                .and_then(|tr| {
                    let mut c = classify_state(cavity, &program, &tr.final_state.to_density())?;
                    c.trace_deviation = trunk_deviation.max(tr.max_trace_deviation());
                    Ok(c)
                });
            out.push(result.map_err(|e| e.to_string()));
        }
    }
    Ok(out)
}

/// Exhaustive grid search over (σ, ε_s, t_s, δε_m). Ties in P_error go to the
/// smallest σ, then the smallest ε_s, then the smallest δε_m.
pub fn optimize(base: &SimulationConfig, grid: &PulseGrid) -> Result<OptimizationReport> {
    grid.validate()?;
    let label = h_label(base)?;
    let cav = cavities(base)?;
    let mut jobs = Vec::new();
    for (is, &sigma) in grid.sigma.iter().enumerate() {
        for (ie, &eps_s) in grid.eps_s.iter().enumerate() {
            for level in 0..2 {
                jobs.push((is, ie, level, sigma, eps_s));
            }
        }
    }
    let results: Vec<BranchResults> = jobs
        .par_iter()
        .map(|&(_, _, level, sigma, eps_s)| {
            run_trunk(base, &cav[level], level, sigma, eps_s, grid)
                .unwrap_or_else(|e| vec![Err(e.to_string()); grid.t_s.len() * grid.d_eps.len()])
        })
        .collect();

    let mut points = Vec::new();
    for (job, pair) in jobs.chunks(2).zip(results.chunks(2)) {
        let (sigma, eps_s) = (job[0].3, job[0].4);
        for (it, &t_s) in grid.t_s.iter().enumerate() {
            for (id, &d_eps) in grid.d_eps.iter().enumerate() {
                let k = it * grid.d_eps.len() + id;
                let program = PulseProgram { sigma, eps_s, t_s, d_eps, t_hold: grid.t_hold };
                let outcome = match (&pair[0][k], &pair[1][k]) {
                    (Ok(c0), Ok(c1)) => Ok(ReadoutOutcome::from_switching(label, *c0, *c1)),
                    (Err(e), _) | (_, Err(e)) => Err(e.clone()),
                };
                points.push(GridPoint { program, outcome });
            }
        }
    }

    let best = grid
        .t_s
        .iter()
        .map(|&t_s| {
            let mut failures = 0;
            let mut best: Option<(PulseProgram, ReadoutOutcome)> = None;
            for point in points.iter().filter(|p| p.program.t_s == t_s) {
                match &point.outcome {
                    Err(_) => failures += 1,
                    Ok(o) => {
                        let key = |p: &PulseProgram, o: &ReadoutOutcome| (o.p_error, p.sigma, p.eps_s, p.d_eps);
                        let better = best.as_ref().is_none_or(|(bp, bo)| {
                            let (a, b) = (key(&point.program, o), key(bp, bo));
                            a.0.total_cmp(&b.0)
                                .then(a.1.total_cmp(&b.1))
                                .then(a.2.total_cmp(&b.2))
                                .then(a.3.total_cmp(&b.3))
                                .is_lt()
                        });
                        if better {
                            best = Some((point.program, *o));
                        }
                    }
                }
            }
            BestProgram { t_s, best, failures }
        })
        .collect();
    Ok(OptimizationReport { h_label: label, points, best })
}

/// ⟨a†a⟩ at the horizon against drive amplitude, for threshold location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchingSample {
    pub eps: f64,
    pub photon_number: f64,
    pub trace_deviation: f64,
    pub switched: bool,
}

/// Upper threshold ε_{H,i} of the master-equation steady-state protocol:
/// bisection on the drive amplitude for the point where ⟨a†a⟩ at
/// `base.t_final` crosses the midpoint of the semiclassical fold photon
/// numbers of the conditioned cavity, interpolated linearly inside the final
/// bracket. `lo` must stay unswitched and `hi` must switch.
pub fn switching_threshold(
    base: &SimulationConfig,
    level: usize,
    lo: f64,
    hi: f64,
    resolution: f64,
) -> Result<(f64, Vec<SwitchingSample>)> {
    let cavity = *cavities(base)?.get(level).ok_or(Error::IndexOutOfRange { index: level, limit: base.spec.levels() })?;
    let th = cavity.thresholds()?;
    let n_mid = 0.5 * (th.n_fold_l + th.n_fold_h);
    let mut samples = Vec::new();
    let mut run = |eps: f64| -> Result<f64> {
        let config = SimulationConfig { envelope: Envelope::Constant(eps), schedule: Vec::new(), snapshots: Vec::new(), ..base.clone() };
        let tr = evolve_from(&config, &EngineState::ground_resonator(config.layout, level)?)?;
        let n = tr.last().photon_number;
        let switched = n > n_mid;
        samples.push(SwitchingSample { eps, photon_number: n, trace_deviation: tr.max_trace_deviation(), switched });
        Ok(n)
    };
    let ((mut a, mut na), (mut b, mut nb)) = ((lo, run(lo)?), (hi, run(hi)?));
    if na > n_mid || nb <= n_mid {
        return Err(Error::InvalidParameter(format!("threshold of level {level} not bracketed by [{lo:e}, {hi:e}]")));
    }
    while b - a > resolution {
        let mid = 0.5 * (a + b);
        let n = run(mid)?;
        if n > n_mid {
            (b, nb) = (mid, n);
        } else {
            (a, na) = (mid, n);
        }
    }
    samples.sort_by(|x, y| x.eps.total_cmp(&y.eps));
    // Linear interpolation of ⟨a†a⟩ across the final bracket.
    let threshold = a + (b - a) * ((n_mid - na) / (nb - na)).clamp(0.0, 1.0);
    Ok((threshold, samples))
}
