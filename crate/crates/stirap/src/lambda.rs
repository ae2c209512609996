//! Closed-form analytics of the driven 3-level Λ system: Hamiltonian
//! assembly, eigenfrequencies, dressed states, mixing angle, and the
//! time-dependent adiabaticity criterion evaluated along a pulse schedule.

use ndarray::{array, Array1, Array2};
use thiserror::Error;

use crate::pulses::PulseSchedule;
use crate::C64;

#[derive(Debug, Error)]
pub enum LambdaError {
    #[error("mixing angle undefined: both Rabi frequencies are zero")]
    BothZero,
    #[error("degenerate schedule: both envelopes vanish on the whole grid")]
    DegenerateSchedule,
    #[error("time grid must be strictly increasing and non-empty")]
    BadGrid,
}

/// Λ-system Hamiltonian in the rotating frame (ħ ≡ 1, angular-frequency
/// units): diagonal (−Δ_p, 0, −Δ_s), couplings Ω_p/2 on 1↔2 and Ω_s/2 on
/// 2↔3. Basis order (|1⟩, |2⟩, |3⟩).
pub fn hamiltonian(omega_p: f64, omega_s: f64, delta_p: f64, delta_s: f64) -> Array2<C64> {
    let r = |x: f64| C64::new(x, 0.0);
    array![
        [r(-delta_p), r(omega_p / 2.0), r(0.0)],
        [r(omega_p / 2.0), r(0.0), r(omega_s / 2.0)],
        [r(0.0), r(omega_s / 2.0), r(-delta_s)],
    ]
}

/// Eigenfrequencies (ω_0, ω_+, ω_−) at two-photon resonance Δ_p = Δ_s = Δ:
/// ω_0 = 0, ω_± = ½(Δ ± √(Δ² + Ω_p² + Ω_s²)).
///
/// These are quoted relative to the common ground-state energy −Δ of the
/// rotating-frame matrix, i.e. they equal its eigenvalues shifted by +Δ.
pub fn eigenfrequencies(omega_p: f64, omega_s: f64, delta: f64) -> (f64, f64, f64) {
    let root = (delta * delta + omega_p * omega_p + omega_s * omega_s).sqrt();
    (0.0, 0.5 * (delta + root), 0.5 * (delta - root))
}

/// Mixing angle Θ = atan2(Ω_p, Ω_s) ∈ [0, π/2] for non-negative inputs.
pub fn mixing_angle(omega_p: f64, omega_s: f64) -> Result<f64, LambdaError> {
    if omega_p == 0.0 && omega_s == 0.0 {
        return Err(LambdaError::BothZero);
    }
    Ok(omega_p.atan2(omega_s))
}

/// Rate of change of the mixing angle,
/// dΘ/dt = (Ω̇_p Ω_s − Ω_p Ω̇_s)/(Ω_p² + Ω_s²).
/// Returns 0 where both envelopes vanish (angle held at its last value).
pub fn mixing_angle_rate(omega_p: f64, omega_s: f64, domega_p: f64, domega_s: f64) -> f64 {
    let denom = omega_p * omega_p + omega_s * omega_s;
    if denom == 0.0 {
        0.0
    } else {
        (domega_p * omega_s - omega_p * domega_s) / denom
    }
}

/// Large-detuning dressed states for mixing angle Θ, in the order
/// (|a⁰⟩, |a⁺⟩, |a⁻⟩): cosΘ|1⟩ − sinΘ|3⟩, |2⟩, sinΘ|1⟩ + cosΘ|3⟩.
pub fn dressed_states(theta: f64) -> [Array1<f64>; 3] {
    let (sin, cos) = theta.sin_cos();
    [
        array![cos, 0.0, -sin],
        array![0.0, 1.0, 0.0],
        array![sin, 0.0, cos],
    ]
}

/// Transfer regime as a function of the delay scaling factor; the boundary
/// s = 0.6 counts as adiabatic.
#[derive(Copy, Clone, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    RabiOscillation,
    Adiabatic,
}

pub fn classify_regime(s_factor: f64) -> Regime {
    if s_factor < 0.6 {
        Regime::RabiOscillation
    } else {
        Regime::Adiabatic
    }
}

/// Both sides of the time-dependent adiabaticity criterion sampled on a
/// time grid: the nonadiabatic coupling |dΘ/dt| and the dressed-level
/// splitting |ω_− − ω_0|, plus per-point violation flags at a given
/// threshold ratio.
#[derive(Clone, Debug)]
pub struct AdiabaticityTrace {
    pub t: Vec<f64>,
    /// |dΘ/dt| (rad/s); 0 where both envelopes vanish.
    pub coupling: Vec<f64>,
    /// |ω_− − ω_0| = |½(Δ − √(Δ² + Ω_p² + Ω_s²))| (rad/s).
    pub splitting: Vec<f64>,
    /// splitting < ratio_threshold × coupling at this point.
    pub violated: Vec<bool>,
    pub ratio_threshold: f64,
}

impl AdiabaticityTrace {
    /// Maximal sub-intervals (t_start, t_end) of consecutive violated grid
    /// points.
    pub fn violation_intervals(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut start: Option<usize> = None;
        for i in 0..self.t.len() {
            match (self.violated[i], start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    out.push((self.t[s], self.t[i - 1]));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            out.push((self.t[s], self.t[self.t.len() - 1]));
        }
        out
    }

    /// Minimum of splitting/coupling over grid points with nonzero
    /// coupling; `None` if the coupling vanishes everywhere.
    pub fn margin_ratio(&self) -> Option<f64> {
        self.coupling
            .iter()
            .zip(&self.splitting)
            .filter(|(c, _)| **c > 0.0)
            .map(|(c, s)| s / c)
            .min_by(|a, b| a.total_cmp(b))
    }

    /// Plot-ready CSV: `t,coupling,splitting,violated` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,coupling,splitting,violated\n");
        for i in 0..self.t.len() {
            s.push_str(&format!(
                "{:.9e},{:.9e},{:.9e},{}\n",
                self.t[i], self.coupling[i], self.splitting[i], self.violated[i] as u8
            ));
        }
        s
    }
}

/// Evaluate the adiabaticity criterion along `schedule` on `grid`.
///
/// The coupling side uses the analytic envelope derivatives; the splitting
/// side is |ω_− − ω_0| for the instantaneous Rabi frequencies. A grid
/// point is violated when splitting < ratio_threshold × coupling; both
/// sides are compared by magnitude (the right side of the criterion is
/// negative for Δ > 0).
pub fn adiabaticity_trace(
    schedule: &PulseSchedule,
    delta: f64,
    grid: &[f64],
    ratio_threshold: f64,
) -> Result<AdiabaticityTrace, LambdaError> {
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LambdaError::BadGrid);
    }
    if schedule.pump.omega_max == 0.0 && schedule.stokes.omega_max == 0.0 {
        return Err(LambdaError::DegenerateSchedule);
    }
    let mut coupling = Vec::with_capacity(grid.len());
    let mut splitting = Vec::with_capacity(grid.len());
    let mut violated = Vec::with_capacity(grid.len());
    for &t in grid {
        let op = schedule.pump_envelope(t);
        let os = schedule.stokes_envelope(t);
        let dop = schedule.pump_envelope_derivative(t);
        let dos = schedule.stokes_envelope_derivative(t);
        let c = mixing_angle_rate(op, os, dop, dos).abs();
        let (w0, _, wm) = eigenfrequencies(op, os, delta);
        let s = (wm - w0).abs();
        coupling.push(c);
        splitting.push(s);
        violated.push(s < ratio_threshold * c);
    }
    Ok(AdiabaticityTrace {
        t: grid.to_vec(),
        coupling,
        splitting,
        violated,
        ratio_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulses::PulseOrder;
    use crate::TAU;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    /// Independent closed-form eigenvalues of a real symmetric 3×3 matrix
    /// (trigonometric solution of the characteristic cubic), sorted
    /// ascending.
    fn sym3_eigvals(m: [[f64; 3]; 3]) -> [f64; 3] {
        let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
        let b = [
            [m[0][0] - q, m[0][1], m[0][2]],
            [m[1][0], m[1][1] - q, m[1][2]],
            [m[2][0], m[2][1], m[2][2] - q],
        ];
        let p2: f64 = b.iter().flatten().map(|x| x * x).sum::<f64>() / 6.0;
        let p = p2.sqrt();
        if p == 0.0 {
            return [q, q, q];
        }
        let det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
            - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
            + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
        let r = (det / (2.0 * p * p * p)).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let e1 = q + 2.0 * p * phi.cos();
        let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        let e2 = 3.0 * q - e1 - e3;
        let mut out = [e1, e2, e3];
        out.sort_by(f64::total_cmp);
        out
    }

    fn h_real(op: f64, os: f64, d: f64) -> [[f64; 3]; 3] {
        [
            [-d, op / 2.0, 0.0],
            [op / 2.0, 0.0, os / 2.0],
            [0.0, os / 2.0, -d],
        ]
    }

    /// Eigenvector of a real symmetric 3×3 matrix for eigenvalue `lambda`
    /// via the cross product of two rows of (M − λI), normalized.
    fn sym3_eigvec(m: [[f64; 3]; 3], lambda: f64) -> [f64; 3] {
        let a = [m[0][0] - lambda, m[0][1], m[0][2]];
        let b = [m[1][0], m[1][1] - lambda, m[1][2]];
        let c = [m[2][0], m[2][1], m[2][2] - lambda];
        let cross = |u: [f64; 3], v: [f64; 3]| {
            [
                u[1] * v[2] - u[2] * v[1],
                u[2] * v[0] - u[0] * v[2],
                u[0] * v[1] - u[1] * v[0],
            ]
        };
        let mut best = cross(a, b);
        for cand in [cross(a, c), cross(b, c)] {
            if cand.iter().map(|x| x * x).sum::<f64>()
                > best.iter().map(|x| x * x).sum::<f64>()
            {
                best = cand;
            }
        }
        let norm = best.iter().map(|x| x * x).sum::<f64>().sqrt();
        [best[0] / norm, best[1] / norm, best[2] / norm]
    }

    #[test]
    fn hamiltonian_matches_matrix_form() {
        let h = hamiltonian(2.0, 3.0, 5.0, 7.0);
        assert_eq!(h[[0, 0]], C64::new(-5.0, 0.0));
        assert_eq!(h[[1, 1]], C64::new(0.0, 0.0));
        assert_eq!(h[[2, 2]], C64::new(-7.0, 0.0));
        assert_eq!(h[[0, 1]], C64::new(1.0, 0.0));
        assert_eq!(h[[1, 2]], C64::new(1.5, 0.0));
        assert_eq!(h[[0, 2]], C64::new(0.0, 0.0));
        // Hermitian
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(h[[i, j]], h[[j, i]].conj());
            }
        }
    }

    #[test]
    fn eigenfrequencies_closed_forms() {
        let (w0, wp, wm) = eigenfrequencies(0.0, 0.0, 3.0);
        assert_abs_diff_eq!(w0, 0.0);
        assert_abs_diff_eq!(wp, 3.0);
        assert_abs_diff_eq!(wm, 0.0);

        let om = TAU * 1e5;
        let (w0, wp, wm) = eigenfrequencies(om, om, 0.0);
        assert_abs_diff_eq!(w0, 0.0);
        assert_relative_eq!(wp, om / 2f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(wm, -om / 2f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn eigenfrequencies_match_diagonalization() {
        // Spectrum of the rotating-frame matrix, shifted by the common
        // ground-state energy, equals the closed forms.
        let cases = [
            (TAU * 1e5, TAU * 2e5, TAU * 3e6),
            (TAU * 4.39e7, TAU * 4.39e7, TAU * 9.2e9),
            (0.5, 0.1, -2.0),
        ];
        for (op, os, d) in cases {
            let mut eig = sym3_eigvals(h_real(op, os, d));
            eig.iter_mut().for_each(|e| *e += d);
            let (w0, wp, wm) = eigenfrequencies(op, os, d);
            let mut expect = [w0, wp, wm];
            expect.sort_by(f64::total_cmp);
            let scale = d.abs().max(op).max(os);
            for (a, b) in eig.iter().zip(&expect) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-10 * scale);
            }
        }
    }

    #[test]
    fn mixing_angle_endpoints() {
        assert_abs_diff_eq!(mixing_angle(0.0, 2.0).unwrap(), 0.0);
        assert_abs_diff_eq!(
            mixing_angle(2.0, 0.0).unwrap(),
            std::f64::consts::FRAC_PI_2
        );
        assert_abs_diff_eq!(
            mixing_angle(1.5, 1.5).unwrap(),
            std::f64::consts::FRAC_PI_4
        );
        assert!(mixing_angle(0.0, 0.0).is_err());
    }

    #[test]
    fn dressed_states_endpoints_and_orthonormality() {
        let [a0, ap, am] = dressed_states(0.0);
        assert_abs_diff_eq!(a0[0], 1.0);
        assert_abs_diff_eq!(a0[2], 0.0);
        assert_abs_diff_eq!(ap[1], 1.0);
        assert_abs_diff_eq!(am[2], 1.0);

        let [a0, _, _] = dressed_states(std::f64::consts::FRAC_PI_2);
        assert_abs_diff_eq!(a0[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a0[2], -1.0);

        let vs = dressed_states(0.37);
        for i in 0..3 {
            // no |2> component on the dark state
            assert_abs_diff_eq!(vs[0][1], 0.0);
            for j in 0..3 {
                let dot: f64 = vs[i].dot(&vs[j]);
                assert_abs_diff_eq!(dot, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn dressed_states_overlap_numeric_eigenvectors() {
        // Delta = 100 Omega: overlap error O(Omega^2/Delta^2)
        let om = 1.0;
        let delta = 100.0;
        let theta = mixing_angle(0.8 * om, 0.6 * om).unwrap();
        let h = h_real(0.8 * om, 0.6 * om, delta);
        let (w0, wp, wm) = eigenfrequencies(0.8 * om, 0.6 * om, delta);
        let [a0, ap, am] = dressed_states(theta);
        for (w, v) in [(w0, a0), (wp, ap), (wm, am)] {
            let exact = sym3_eigvec(h, w - delta);
            let overlap = (exact[0] * v[0] + exact[1] * v[1] + exact[2] * v[2]).abs();
            assert!(
                1.0 - overlap <= 5.0 * (om / delta).powi(2),
                "overlap {overlap} too small for eigenvalue {w}"
            );
        }
    }

    fn fig2_schedule(delay: f64) -> PulseSchedule {
        let om = TAU * 4.39e7;
        PulseSchedule::stirap(
            100e-6,
            delay / 100e-6,
            PulseOrder::CounterIntuitive,
            om,
            om,
            false,
        )
        .unwrap()
    }

    /// Grid over the pulse centers ± one pulse length: the region where
    /// the pulses have meaningful support. In the far Gaussian tails the
    /// splitting decays faster than the nonadiabatic coupling, so the
    /// criterion is trivially violated where no dynamics happens.
    fn grid(schedule: &PulseSchedule, n: usize) -> Vec<f64> {
        let lo = schedule.pump.center.min(schedule.stokes.center) - schedule.t_pulse();
        let hi = schedule.pump.center.max(schedule.stokes.center) + schedule.t_pulse();
        (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
    }

    #[test]
    fn rate_matches_finite_difference_of_angle() {
        let s = fig2_schedule(80e-6);
        let dt = 1e-9;
        for k in -40..=40 {
            let t = k as f64 * 2.5e-6;
            let analytic = mixing_angle_rate(
                s.pump_envelope(t),
                s.stokes_envelope(t),
                s.pump_envelope_derivative(t),
                s.stokes_envelope_derivative(t),
            );
            let fd = (mixing_angle(s.pump_envelope(t + dt), s.stokes_envelope(t + dt)).unwrap()
                - mixing_angle(s.pump_envelope(t - dt), s.stokes_envelope(t - dt)).unwrap())
                / (2.0 * dt);
            assert_relative_eq!(analytic, fd, max_relative = 1e-6, epsilon = 1e-4);
        }
    }

    #[test]
    fn trace_violation_structure_matches_delay() {
        let delta = TAU * 9.2e9;
        // 80 us delay: fully adiabatic in the overlap region
        let s80 = fig2_schedule(80e-6);
        let tr = adiabaticity_trace(&s80, delta, &grid(&s80, 2000), 10.0).unwrap();
        assert!(tr.violation_intervals().is_empty());
        assert!(tr.margin_ratio().unwrap() > 10.0);

        // 30 us: violations at both sequence edges
        let s30 = fig2_schedule(30e-6);
        let tr = adiabaticity_trace(&s30, delta, &grid(&s30, 2000), 10.0).unwrap();
        let iv = tr.violation_intervals();
        assert!(iv.len() >= 2, "expected edge violations, got {iv:?}");
        assert!(iv.first().unwrap().1 < -50e-6);
        assert!(iv.last().unwrap().0 > 50e-6);

        // 130 us: violation between the pulse peaks
        let s130 = fig2_schedule(130e-6);
        let tr = adiabaticity_trace(&s130, delta, &grid(&s130, 2000), 10.0).unwrap();
        let iv = tr.violation_intervals();
        assert!(!iv.is_empty());
        assert!(iv.iter().any(|&(a, b)| a > -65e-6 && b < 65e-6));
    }

    #[test]
    fn trace_mirror_symmetry_between_orders() {
        let om = TAU * 4.39e7;
        let delta = TAU * 9.2e9;
        let mk = |order| {
            PulseSchedule::stirap(100e-6, 0.8, order, om, om, false).unwrap()
        };
        let ci = mk(PulseOrder::CounterIntuitive);
        let int = mk(PulseOrder::Intuitive);
        let g: Vec<f64> = (0..=400).map(|i| -260e-6 + i as f64 * 1.3e-6).collect();
        let g_rev: Vec<f64> = g.iter().rev().map(|t| -t).collect();
        let tr_ci = adiabaticity_trace(&ci, delta, &g, 10.0).unwrap();
        let tr_int = adiabaticity_trace(&int, delta, &g_rev, 10.0).unwrap();
        let n = g.len();
        for i in 0..n {
            let j = n - 1 - i;
            assert_abs_diff_eq!(
                tr_ci.coupling[i],
                tr_int.coupling[j],
                epsilon = 1e-10 * tr_ci.coupling[i].abs().max(1.0)
            );
            assert_abs_diff_eq!(
                tr_ci.splitting[i],
                tr_int.splitting[j],
                epsilon = 1e-10 * tr_ci.splitting[i]
            );
        }
    }

    #[test]
    fn trace_rejects_bad_input() {
        let s = fig2_schedule(80e-6);
        assert!(adiabaticity_trace(&s, 1.0, &[], 10.0).is_err());
        assert!(adiabaticity_trace(&s, 1.0, &[0.0, 0.0], 10.0).is_err());
        let dead =
            PulseSchedule::stirap(100e-6, 0.5, PulseOrder::CounterIntuitive, 0.0, 0.0, false)
                .unwrap();
        assert!(adiabaticity_trace(&dead, 1.0, &[0.0, 1.0], 10.0).is_err());
    }

    #[test]
    fn regime_classification() {
        assert_eq!(classify_regime(0.3), Regime::RabiOscillation);
        assert_eq!(classify_regime(0.7), Regime::Adiabatic);
        assert_eq!(classify_regime(0.6), Regime::Adiabatic);
    }

    proptest! {
        #[test]
        fn eigenvalue_identity_random(
            op in 0.0..1e6f64,
            os in 0.0..1e6f64,
            d in -1e8f64..1e8,
        ) {
            let mut eig = sym3_eigvals(h_real(op, os, d));
            eig.iter_mut().for_each(|e| *e += d);
            let (w0, wp, wm) = eigenfrequencies(op, os, d);
            let mut expect = [w0, wp, wm];
            expect.sort_by(f64::total_cmp);
            let scale = d.abs().max(op).max(os).max(1.0);
            for (a, b) in eig.iter().zip(&expect) {
                prop_assert!((a - b).abs() <= 1e-9 * scale);
            }
        }

        #[test]
        fn dark_state_is_exact_eigenvector(
            op in 1.0..1e6f64,
            os in 1.0..1e6f64,
            d in -1e8f64..1e8,
        ) {
            // cos(theta)|1> - sin(theta)|3> is an exact eigenvector of the
            // two-photon-resonant matrix at eigenvalue -Delta, for any Delta
            let theta = mixing_angle(op, os).unwrap();
            let v = &dressed_states(theta)[0];
            let h = h_real(op, os, d);
            for i in 0..3 {
                let hv: f64 = (0..3).map(|j| h[i][j] * v[j]).sum();
                let scale = d.abs().max(op).max(os);
                prop_assert!((hv - (-d) * v[i]).abs() <= 1e-10 * scale);
            }
        }
    }
}
