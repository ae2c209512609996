//! Time evolution of the composite electronic ⊗ motional system.
//!
//! Two Hamiltonian models are provided over a (possibly windowed) Fock
//! basis:
//!
//! - the full 3-level Λ model, with the pump leg dressed by Lamb-Dicke
//!   matrix elements and the one-photon detuning carried explicitly, and
//! - an effective 2-level Raman model obtained by adiabatic elimination
//!   of the excited state, with the two-photon coupling
//!   `Ω_p Ω_s / (2Δ)` and both ac-Stark shifts kept.
//!
//! Both are written in the interaction frame of the two-photon drive: the
//! motional ladder appears as `n·ω_trap` on the diagonal and the driven
//! sideband is selected by a two-photon detuning of `0 / +ω / −ω` for
//! carrier / blue / red.

use ndarray::Array2;
use thiserror::Error;

use crate::fockspace::{lamb_dicke_element, CompositeState, FockError, Transition};
use crate::integrate::{cf4_fixed, Cf4Stepper, IntegrateError, StepStats, StepperOptions};
use crate::pulses::PulseSchedule;
use crate::{C64, TAU};

/// One-photon detuning of the Raman pair from the excited state (rad/s).
pub const PHYSICAL_DELTA: f64 = TAU * 9.2e9;
/// Default trap frequency (rad/s).
pub const DEFAULT_TRAP_FREQUENCY: f64 = TAU * 2.2e6;
/// Default Lamb-Dicke parameter.
pub const DEFAULT_ETA: f64 = 0.3;
/// Default carrier (n = 0) effective two-photon Rabi frequency (rad/s).
pub const DEFAULT_TARGET_RABI: f64 = TAU * 100e3;
/// Population in the top two Fock levels above which a trajectory is
/// flagged as truncation-limited.
pub const TRUNCATION_WARN_LIMIT: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("invalid system parameters: {0}")]
    BadParams(String),
    #[error("sample grid must be strictly increasing with at least 2 points")]
    BadGrid,
    #[error("initial state dimension {state:?} does not match params {params:?}")]
    DimensionMismatch {
        state: (usize, usize),
        params: (usize, usize),
    },
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error(transparent)]
    Fock(#[from] FockError),
}

/// Static physics parameters of a run.
///
/// The Fock basis covers physical quantum numbers
/// `fock_offset .. fock_offset + n_max`; a nonzero offset windows the
/// motional ladder around an initial Fock state, exploiting that the
/// couplings only connect `|Δn| ≤ 2`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SystemParams {
    /// One-photon detuning Δ (rad/s).
    pub delta: f64,
    /// Two-photon detuning δ (rad/s): 0 / +ω_trap / −ω_trap selects the
    /// carrier / blue sideband / red sideband.
    pub two_photon_detuning: f64,
    /// Trap frequency ω_trap (rad/s).
    pub trap_frequency: f64,
    /// Lamb-Dicke parameter.
    pub eta: f64,
    /// Number of Fock levels kept.
    pub n_max: usize,
    /// Physical quantum number of the lowest kept Fock level.
    pub fock_offset: usize,
    /// 3 for the full Λ model, 2 for the effective Raman model.
    pub electronic_levels: usize,
    /// Effective two-photon Rabi frequency on the carrier at n = 0
    /// (rad/s), including the Lamb-Dicke prefactor e^{−η²/2}.
    pub target_effective_rabi: f64,
}

/// Transition-independent physical inputs of the effective model; the
/// experiment layer combines these with a transition choice to build
/// `SystemParams`.
#[derive(Copy, Clone, Debug, PartialEq, serde::Serialize)]
pub struct Physics {
    /// Lamb-Dicke parameter.
    pub eta: f64,
    /// Trap frequency ω_trap (rad/s).
    pub trap_frequency: f64,
    /// Effective two-photon carrier Rabi frequency at n = 0 (rad/s).
    pub target_effective_rabi: f64,
    /// One-photon detuning Δ (rad/s).
    pub delta: f64,
}

impl Default for Physics {
    fn default() -> Self {
        Self {
            eta: DEFAULT_ETA,
            trap_frequency: DEFAULT_TRAP_FREQUENCY,
            target_effective_rabi: DEFAULT_TARGET_RABI,
            delta: PHYSICAL_DELTA,
        }
    }
}

impl Physics {
    /// Effective 2-level system parameters for the given transition.
    pub fn params(&self, transition: Transition, n_max: usize) -> SystemParams {
        SystemParams {
            delta: self.delta,
            two_photon_detuning: f64::from(transition.delta_n()) * self.trap_frequency,
            trap_frequency: self.trap_frequency,
            eta: self.eta,
            n_max,
            fock_offset: 0,
            electronic_levels: 2,
            target_effective_rabi: self.target_effective_rabi,
        }
    }
}

impl SystemParams {
    /// Effective 2-level model at the default physical parameters.
    pub fn effective(transition: Transition, n_max: usize) -> Self {
        Physics::default().params(transition, n_max)
    }

    /// Full 3-level model with a rescaled one-photon detuning
    /// `Δ' = ratio · Ω_max`, beam amplitudes scaled to preserve the
    /// effective two-photon Rabi frequency. The physics depends only on
    /// `Δ ≫ Ω` and `Ω_eff`; the physical 9.2 GHz detuning is numerically
    /// stiff without changing the outcome.
    pub fn full_rescaled(delta_to_rabi_ratio: f64, transition: Transition, n_max: usize) -> Self {
        let mut p = Self::effective(transition, n_max);
        p.electronic_levels = 3;
        // Δ = r·Ω with Ω = sqrt(2 Δ Ω_bare) gives Δ = 2 r² Ω_bare
        p.delta = 2.0 * delta_to_rabi_ratio * delta_to_rabi_ratio * p.bare_two_photon_rabi();
        p
    }

    /// Restrict the Fock basis to physical levels `lo .. hi`.
    pub fn windowed(&self, lo: usize, hi: usize) -> Self {
        let mut p = self.clone();
        p.fock_offset = lo;
        p.n_max = hi - lo;
        p
    }

    /// Bare two-photon Rabi frequency `Ω_p Ω_s / (2Δ)` at the pulse
    /// peaks, before Lamb-Dicke dressing.
    pub fn bare_two_photon_rabi(&self) -> f64 {
        self.target_effective_rabi * (self.eta * self.eta / 2.0).exp()
    }

    /// Single-beam peak Rabi frequency for balanced beams,
    /// `Ω = sqrt(2 Δ Ω_bare)`.
    pub fn beam_rabi(&self) -> f64 {
        (2.0 * self.delta * self.bare_two_photon_rabi()).sqrt()
    }

    /// Electronic index of the transfer target state.
    pub fn target_level(&self) -> usize {
        self.electronic_levels - 1
    }

    /// Balanced-beam STIRAP schedule at the derived beam amplitude.
    pub fn stirap_schedule(
        &self,
        t_pulse: f64,
        s_factor: f64,
        order: crate::pulses::PulseOrder,
        truncated: bool,
    ) -> Result<PulseSchedule, crate::pulses::PulseError> {
        let om = self.beam_rabi();
        PulseSchedule::stirap(t_pulse, s_factor, order, om, om, truncated)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let fail = |msg: String| Err(DynamicsError::BadParams(msg));
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return fail(format!("eta = {} outside (0, 1)", self.eta));
        }
        if self.n_max < 2 {
            return fail(format!("n_max = {} below 2", self.n_max));
        }
        if self.fock_offset + self.n_max > 198 {
            return fail(format!(
                "Fock window top {} exceeds the supported maximum of 198",
                self.fock_offset + self.n_max
            ));
        }
        if !(self.electronic_levels == 2 || self.electronic_levels == 3) {
            return fail(format!(
                "electronic_levels = {} must be 2 or 3",
                self.electronic_levels
            ));
        }
        if self.trap_frequency <= 0.0 {
            return fail(format!("trap frequency {} not positive", self.trap_frequency));
        }
        if self.target_effective_rabi <= 0.0 {
            return fail(format!(
                "target effective Rabi frequency {} not positive",
                self.target_effective_rabi
            ));
        }
        if self.delta <= 0.0 {
            return fail(format!("one-photon detuning {} not positive", self.delta));
        }
        if self.electronic_levels == 3 && self.delta < 20.0 * self.beam_rabi() * (1.0 - 1e-9) {
            return fail(format!(
                "one-photon detuning {:.3e} below 20x the beam Rabi frequency {:.3e}; \
                 the dressed-state picture assumes the large-detuning regime",
                self.delta,
                self.beam_rabi()
            ));
        }
        Ok(())
    }
}

/// Write the Lamb-Dicke-dressed coupling block `<to_base + j'| .. |from_base + j>`
/// for `|Δn| ≤ 2` into `h`, Hermitian-symmetrically.
fn couple_block(
    h: &mut Array2<C64>,
    params: &SystemParams,
    to_base: usize,
    from_base: usize,
    strength: C64,
) {
    let n = params.n_max;
    for j in 0..n {
        let n_from = (params.fock_offset + j) as u32;
        let lo = j.saturating_sub(2);
        let hi = (j + 3).min(n);
        for jp in lo..hi {
            let n_to = (params.fock_offset + jp) as u32;
            let m = lamb_dicke_element(n_to, n_from, params.eta)
                .expect("validated params keep Lamb-Dicke elements in range");
            let v = strength * m;
            h[[to_base + jp, from_base + j]] = v;
            h[[from_base + j, to_base + jp]] = v.conj();
        }
    }
}

/// Full 3-level ⊗ Fock Hamiltonian at time `t` (dimension `3·n_max`).
///
/// Basis index `e·n_max + j` with physical quantum number
/// `n = fock_offset + j`. Diagonal: `n·ω` on `|1,n>`, `Δ + n·ω` on
/// `|2,n>`, `n·ω − δ` on `|3,n>`. The pump leg carries the Lamb-Dicke
/// matrix elements (the motional kick of the Raman pair is attributed to
/// one leg); the Stokes leg is motion-diagonal.
pub fn build_full_hamiltonian(
    params: &SystemParams,
    schedule: &PulseSchedule,
    t: f64,
) -> Array2<C64> {
    let n = params.n_max;
    let mut h: Array2<C64> = Array2::zeros((3 * n, 3 * n));
    let om_p = schedule.pump_envelope(t);
    let om_s = schedule.stokes_envelope(t);
    let w = params.trap_frequency;
    for j in 0..n {
        let nw = (params.fock_offset + j) as f64 * w;
        h[[j, j]] = C64::new(nw, 0.0);
        h[[n + j, n + j]] = C64::new(params.delta + nw, 0.0);
        h[[2 * n + j, 2 * n + j]] = C64::new(nw - params.two_photon_detuning, 0.0);
        let vs = C64::new(om_s / 2.0, 0.0);
        h[[n + j, 2 * n + j]] = vs;
        h[[2 * n + j, n + j]] = vs;
    }
    couple_block(&mut h, params, n, 0, C64::new(om_p / 2.0, 0.0));
    h
}

/// Effective 2-level ⊗ Fock Raman Hamiltonian at time `t` (dimension
/// `2·n_max`), from adiabatic elimination of the excited state.
///
/// Two-photon coupling `−Ω_p Ω_s/(4Δ)` dressed by Lamb-Dicke elements;
/// ac-Stark shifts `−Ω_p²/(4Δ)` on `|1,n>` and `−Ω_s²/(4Δ)` on `|3,n>`
/// (they cancel on the two-photon resonance for balanced beams).
pub fn build_effective_hamiltonian(
    params: &SystemParams,
    schedule: &PulseSchedule,
    t: f64,
) -> Array2<C64> {
    let n = params.n_max;
    let mut h: Array2<C64> = Array2::zeros((2 * n, 2 * n));
    let om_p = schedule.pump_envelope(t);
    let om_s = schedule.stokes_envelope(t);
    let w = params.trap_frequency;
    let stark_p = om_p * om_p / (4.0 * params.delta);
    let stark_s = om_s * om_s / (4.0 * params.delta);
    for j in 0..n {
        let nw = (params.fock_offset + j) as f64 * w;
        h[[j, j]] = C64::new(nw - stark_p, 0.0);
        h[[n + j, n + j]] = C64::new(nw - params.two_photon_detuning - stark_s, 0.0);
    }
    couple_block(
        &mut h,
        params,
        n,
        0,
        C64::new(-om_p * om_s / (4.0 * params.delta), 0.0),
    );
    h
}

/// Invariant residuals and integrator statistics accumulated over a
/// trajectory.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct TrajectoryDiagnostics {
    /// Max |tr ρ − 1| over sampled points.
    pub max_trace_error: f64,
    /// Max Hermiticity residual of ρ (0 for pure states).
    pub max_hermiticity_error: f64,
    /// Max |tr ρ² − tr ρ²(0)| over sampled points.
    pub max_purity_drift: f64,
    /// Max combined population of the top two Fock levels.
    pub max_truncation_population: f64,
    /// True when the truncation population exceeded
    /// [`TRUNCATION_WARN_LIMIT`].
    pub truncation_warning: bool,
    #[serde(skip)]
    pub stats: StepStats,
}

/// Time-resolved observables of one integration.
#[derive(Clone, Debug)]
pub struct Trajectory {
    /// Sample times (s).
    pub t: Vec<f64>,
    /// Electronic-level populations per sample point.
    pub electronic: Vec<Vec<f64>>,
    /// Fock-level populations (summed over electronic levels) per sample
    /// point, indexed relative to the Fock window.
    pub fock: Vec<Vec<f64>>,
    /// Electronic index of the transfer target.
    pub target_level: usize,
    pub final_state: CompositeState,
    pub diagnostics: TrajectoryDiagnostics,
}

fn purity(state: &CompositeState) -> f64 {
    match state {
        CompositeState::Pure { amplitudes, .. } => {
            let n2: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
            n2 * n2
        }
        CompositeState::Density { matrix, .. } => matrix.iter().map(|z| z.norm_sqr()).sum(),
    }
}

fn trace_error(state: &CompositeState) -> f64 {
    match state {
        CompositeState::Pure { amplitudes, .. } => {
            (amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs()
        }
        CompositeState::Density { matrix, .. } => {
            let tr: C64 = (0..matrix.nrows()).map(|i| matrix[[i, i]]).sum();
            ((tr.re - 1.0).powi(2) + tr.im.powi(2)).sqrt()
        }
    }
}

fn hermiticity_error(state: &CompositeState) -> f64 {
    match state {
        CompositeState::Pure { .. } => 0.0,
        CompositeState::Density { matrix, .. } => {
            let n = matrix.nrows();
            let mut worst = 0.0f64;
            for i in 0..n {
                for j in i..n {
                    worst = worst.max((matrix[[i, j]] - matrix[[j, i]].conj()).norm());
                }
            }
            worst
        }
    }
}

/// Uniform sample grid over the schedule's default integration window.
pub fn sample_grid(schedule: &PulseSchedule, n_samples: usize) -> Vec<f64> {
    let (lo, hi) = schedule.window();
    (0..=n_samples.max(1))
        .map(|i| lo + (hi - lo) * i as f64 / n_samples.max(1) as f64)
        .collect()
}

/// How a trajectory is stepped between sample points.
#[derive(Copy, Clone, Debug)]
pub enum Propagation {
    /// Adaptive CF4 with local-error tolerance; the right choice for the
    /// effective model and other non-stiff problems.
    Adaptive { tol: f64 },
    /// Fixed CF4 substeps per grid interval; the right choice for the
    /// full model in the averaging regime `Δ·h ≫ 1`, where adaptive
    /// error estimation on the state norm breaks down (see
    /// [`crate::integrate::cf4_fixed`]). Convergence is checked by
    /// comparing observables across substep counts.
    Fixed { substeps: usize },
}

/// Integrate `dρ/dt = −i[H(t), ρ]` (or the state-vector equivalent) over
/// the sample grid with adaptive step-size control, recording observables
/// at every grid point.
pub fn evolve(
    initial: &CompositeState,
    params: &SystemParams,
    schedule: &PulseSchedule,
    grid: &[f64],
    tol: f64,
) -> Result<Trajectory, DynamicsError> {
    evolve_with(initial, params, schedule, grid, Propagation::Adaptive { tol })
}

/// Integrate with a fixed number of CF4 substeps per grid interval.
pub fn evolve_fixed(
    initial: &CompositeState,
    params: &SystemParams,
    schedule: &PulseSchedule,
    grid: &[f64],
    substeps: usize,
) -> Result<Trajectory, DynamicsError> {
    evolve_with(initial, params, schedule, grid, Propagation::Fixed { substeps })
}

/// Shared driver behind [`evolve`] and [`evolve_fixed`].
pub fn evolve_with(
    initial: &CompositeState,
    params: &SystemParams,
    schedule: &PulseSchedule,
    grid: &[f64],
    propagation: Propagation,
) -> Result<Trajectory, DynamicsError> {
    params.validate()?;
    if grid.len() < 2 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DynamicsError::BadGrid);
    }
    if initial.electronic_dim() != params.electronic_levels
        || initial.motional_dim() != params.n_max
    {
        return Err(DynamicsError::DimensionMismatch {
            state: (initial.electronic_dim(), initial.motional_dim()),
            params: (params.electronic_levels, params.n_max),
        });
    }
    let mut h_of_t = |t: f64| {
        if params.electronic_levels == 3 {
            build_full_hamiltonian(params, schedule, t)
        } else {
            build_effective_hamiltonian(params, schedule, t)
        }
    };
    let mut state = initial.clone();
    let purity0 = purity(&state);
    let mut traj = Trajectory {
        t: Vec::with_capacity(grid.len()),
        electronic: Vec::with_capacity(grid.len()),
        fock: Vec::with_capacity(grid.len()),
        target_level: params.target_level(),
        final_state: state.clone(),
        diagnostics: TrajectoryDiagnostics {
            max_trace_error: 0.0,
            max_hermiticity_error: 0.0,
            max_purity_drift: 0.0,
            max_truncation_population: 0.0,
            truncation_warning: false,
            stats: StepStats::default(),
        },
    };
    let record = |traj: &mut Trajectory, t: f64, state: &CompositeState| {
        let d = &mut traj.diagnostics;
        d.max_trace_error = d.max_trace_error.max(trace_error(state));
        d.max_hermiticity_error = d.max_hermiticity_error.max(hermiticity_error(state));
        d.max_purity_drift = d.max_purity_drift.max((purity(state) - purity0).abs());
        let top: f64 = (0..params.electronic_levels)
            .map(|e| state.population(e, params.n_max - 1) + state.population(e, params.n_max - 2))
            .sum();
        d.max_truncation_population = d.max_truncation_population.max(top);
        traj.t.push(t);
        traj.electronic.push(
            (0..params.electronic_levels)
                .map(|e| state.electronic_population(e))
                .collect(),
        );
        traj.fock.push(
            (0..params.n_max)
                .map(|n| (0..params.electronic_levels).map(|e| state.population(e, n)).sum())
                .collect(),
        );
    };

    record(&mut traj, grid[0], &state);
    match propagation {
        Propagation::Adaptive { tol } => {
            let opts = StepperOptions {
                tol,
                ..Default::default()
            };
            let mut stepper = Cf4Stepper::new(&mut h_of_t, &opts)?;
            for w in grid.windows(2) {
                stepper.advance(&mut state, w[0], w[1])?;
                record(&mut traj, w[1], &state);
            }
            traj.diagnostics.stats = stepper.stats();
        }
        Propagation::Fixed { substeps } => {
            for w in grid.windows(2) {
                cf4_fixed(&mut h_of_t, &mut state, w[0], w[1], substeps);
                record(&mut traj, w[1], &state);
            }
            traj.diagnostics.stats = StepStats {
                accepted: substeps * (grid.len() - 1),
                rejected: 0,
                min_h: grid
                    .windows(2)
                    .map(|w| (w[1] - w[0]) / substeps.max(1) as f64)
                    .fold(f64::INFINITY, f64::min),
            };
        }
    }
    traj.diagnostics.truncation_warning =
        traj.diagnostics.max_truncation_population > TRUNCATION_WARN_LIMIT;
    traj.final_state = state;
    Ok(traj)
}

/// Final population of the transfer target state, summed over Fock
/// levels.
pub fn transfer_efficiency(traj: &Trajectory) -> f64 {
    traj.electronic
        .last()
        .map(|pops| pops[traj.target_level])
        .unwrap_or(0.0)
}
