//! Motional Fock-space machinery: generalized Laguerre polynomials, the
//! Fock-index dependence of carrier/sideband coupling strengths, thermal
//! phonon distributions, and composite electronic ⊗ motional states.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use thiserror::Error;

/// Tolerance on trace / Hermiticity when validating density matrices.
pub const DENSITY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum FockError {
    #[error("Laguerre order n = {0} exceeds the supported maximum of 200")]
    LaguerreOrder(u32),
    #[error("Laguerre argument x = {0} must be non-negative")]
    LaguerreArgument(f64),
    #[error("Lamb-Dicke parameter eta = {0} must lie in (0, 1)")]
    LambDicke(f64),
    #[error("red sideband undefined for n = 0 (no lower motional state)")]
    RedSidebandGround,
    #[error("thermal mean occupation must be non-negative, got {0}")]
    NegativeMeanN(f64),
    #[error("Fock truncation n_max = {0} is too small (need at least 2)")]
    TruncationTooSmall(usize),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid composite state: {0}")]
    InvalidState(String),
}

/// Evaluate the generalized Laguerre polynomial `L_n^k(x)` by the standard
/// upward three-term recurrence in `n`.
///
/// The recurrence is stable for the small arguments `x = eta^2 < 0.1`
/// relevant to Lamb-Dicke couplings; no asymptotic approximation is used.
pub fn laguerre(n: u32, k: u32, x: f64) -> Result<f64, FockError> {
    if n > 200 {
        return Err(FockError::LaguerreOrder(n));
    }
    if x < 0.0 {
        return Err(FockError::LaguerreArgument(x));
    }
    let k = f64::from(k);
    let mut prev = 1.0; // L_0
    if n == 0 {
        return Ok(prev);
    }
    let mut curr = 1.0 + k - x; // L_1
    for m in 2..=u64::from(n) {
        let m = m as f64;
        let next = ((2.0 * m - 1.0 + k - x) * curr - (m - 1.0 + k) * prev) / m;
        prev = curr;
        curr = next;
    }
    Ok(curr)
}

/// Which two-photon transition the Raman pair drives: motional quantum
/// number change of 0 (carrier), +1 (blue sideband) or −1 (red sideband).
#[derive(Copy, Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transition {
    Carrier,
    BlueSideband,
    RedSideband,
}

impl Transition {
    /// Motional quantum number change driven by this transition.
    pub fn delta_n(self) -> i32 {
        match self {
            Transition::Carrier => 0,
            Transition::BlueSideband => 1,
            Transition::RedSideband => -1,
        }
    }
}

/// Ratio of the Fock-state-`n` Rabi frequency to the bare two-photon Rabi
/// frequency for the given transition.
///
/// Includes the `exp(-eta^2/2)` prefactor of the Lamb-Dicke matrix element
/// `<n'| e^{i eta (a + a^†)} |n>` and, for sidebands, the factor `eta`:
///
/// - carrier: `exp(-eta^2/2) · L_n^0(eta^2)`
/// - blue sideband (n → n+1): `exp(-eta^2/2) · eta · L_n^1(eta^2) / sqrt(n+1)`
/// - red sideband (n → n−1): equal to the blue-sideband scale at `n−1`
///   by Hermiticity of the matrix element.
pub fn coupling_scale(n: u32, transition: Transition, eta: f64) -> Result<f64, FockError> {
    if !(0.0..1.0).contains(&eta) || eta == 0.0 {
        return Err(FockError::LambDicke(eta));
    }
    let x = eta * eta;
    let pref = (-x / 2.0).exp();
    match transition {
        Transition::Carrier => Ok(pref * laguerre(n, 0, x)?),
        Transition::BlueSideband => {
            Ok(pref * eta * laguerre(n, 1, x)? / f64::from(n + 1).sqrt())
        }
        Transition::RedSideband => {
            if n == 0 {
                return Err(FockError::RedSidebandGround);
            }
            coupling_scale(n - 1, Transition::BlueSideband, eta)
        }
    }
}

/// Lamb-Dicke matrix element `<n'| e^{i eta (a + a^†)} |n>` for `n' >= n`:
/// `exp(-eta^2/2) (i eta)^d sqrt(n!/n'!) L_n^d(eta^2)` with `d = n' - n`.
/// For `n' < n` use conjugate symmetry. Only |n' − n| ≤ 2 is supported;
/// higher orders are negligible at eta < 1 and excluded from the model.
pub fn lamb_dicke_element(n_to: u32, n_from: u32, eta: f64) -> Result<C64, FockError> {
    if n_to < n_from {
        return Ok(lamb_dicke_element(n_from, n_to, eta)?.conj());
    }
    let d = n_to - n_from;
    debug_assert!(d <= 2, "Lamb-Dicke expansion kept to |Δn| <= 2");
    let x = eta * eta;
    // sqrt(n!/n'!) for d <= 2
    let fact_ratio = match d {
        0 => 1.0,
        1 => 1.0 / f64::from(n_to).sqrt(),
        _ => 1.0 / (f64::from(n_to) * f64::from(n_to - 1)).sqrt(),
    };
    let radial = eta.powi(d as i32) * (-x / 2.0).exp() * fact_ratio * laguerre(n_from, d, x)?;
    let phase = C64::i().powu(d);
    Ok(phase * radial)
}

/// Probability distribution over motional Fock levels `0..n_max`.
///
/// The sum of stored populations may be below one; the remainder is the
/// truncation tail, reported explicitly.
#[derive(Clone, Debug, serde::Serialize)]
pub struct MotionalDistribution {
    populations: Vec<f64>,
    mean_n: f64,
    tail: f64,
}

/// Tail threshold above which a thermal construction is flagged.
pub const TAIL_WARN_LIMIT: f64 = 1e-2;

impl MotionalDistribution {
    /// Build from explicit per-level populations. Populations must be
    /// non-negative with sum ≤ 1.
    pub fn from_populations(populations: Vec<f64>) -> Result<Self, FockError> {
        if populations.len() < 2 {
            return Err(FockError::TruncationTooSmall(populations.len()));
        }
        if populations.iter().any(|&p| p < 0.0) {
            return Err(FockError::InvalidDistribution(
                "negative population".into(),
            ));
        }
        let total: f64 = populations.iter().sum();
        if total > 1.0 + 1e-12 {
            return Err(FockError::InvalidDistribution(format!(
                "populations sum to {total} > 1"
            )));
        }
        let mean_n = populations
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum();
        Ok(Self {
            populations,
            mean_n,
            tail: (1.0 - total).max(0.0),
        })
    }

    pub fn populations(&self) -> &[f64] {
        &self.populations
    }

    pub fn n_max(&self) -> usize {
        self.populations.len()
    }

    /// Mean occupation of the stored (truncated) distribution.
    pub fn mean_n(&self) -> f64 {
        self.mean_n
    }

    /// Probability weight beyond the truncation, `1 − Σ p_n`.
    pub fn truncation_tail(&self) -> f64 {
        self.tail
    }

    /// True when the truncation tail exceeds [`TAIL_WARN_LIMIT`].
    pub fn tail_warning(&self) -> bool {
        self.tail > TAIL_WARN_LIMIT
    }
}

/// Thermal (Bose-Einstein) distribution with mean occupation `mean_n`,
/// truncated to `n_max` levels: `p_n = n̄^n / (n̄+1)^{n+1}`.
pub fn make_thermal(mean_n: f64, n_max: usize) -> Result<MotionalDistribution, FockError> {
    if mean_n < 0.0 {
        return Err(FockError::NegativeMeanN(mean_n));
    }
    if n_max < 2 {
        return Err(FockError::TruncationTooSmall(n_max));
    }
    let ratio = mean_n / (mean_n + 1.0);
    let mut populations = Vec::with_capacity(n_max);
    let mut p = 1.0 / (mean_n + 1.0);
    for _ in 0..n_max {
        populations.push(p);
        p *= ratio;
    }
    MotionalDistribution::from_populations(populations)
}

/// Smallest truncation for which a thermal state with the given mean
/// occupation has tail below `tail_limit`.
pub fn thermal_n_max(mean_n: f64, tail_limit: f64) -> usize {
    if mean_n <= 0.0 {
        return 2;
    }
    // tail after N levels is (n̄/(n̄+1))^N
    let ratio = mean_n / (mean_n + 1.0);
    let n = (tail_limit.ln() / ratio.ln()).ceil() as usize;
    n.max(2)
}

/// Ground-state population `p_0` of a motional distribution.
pub fn ground_state_population(dist: &MotionalDistribution) -> f64 {
    dist.populations[0]
}

/// A state of the electronic ⊗ motional Hilbert space, either a pure state
/// vector or a density matrix.
///
/// Basis ordering is block-by-electronic-level: index `e * n_max + n`.
#[derive(Clone, Debug)]
pub enum CompositeState {
    Pure {
        amplitudes: Array1<C64>,
        electronic_dim: usize,
        motional_dim: usize,
    },
    Density {
        matrix: Array2<C64>,
        electronic_dim: usize,
        motional_dim: usize,
    },
}

impl CompositeState {
    /// Pure product state `|level> ⊗ |n>`.
    pub fn pure_fock(
        electronic_dim: usize,
        motional_dim: usize,
        level: usize,
        n: usize,
    ) -> Result<Self, FockError> {
        if !(electronic_dim == 2 || electronic_dim == 3) {
            return Err(FockError::InvalidState(format!(
                "electronic dimension must be 2 or 3, got {electronic_dim}"
            )));
        }
        if level >= electronic_dim || n >= motional_dim {
            return Err(FockError::InvalidState(format!(
                "basis label ({level}, {n}) outside {electronic_dim} x {motional_dim}"
            )));
        }
        let mut amplitudes = Array1::zeros(electronic_dim * motional_dim);
        amplitudes[level * motional_dim + n] = C64::new(1.0, 0.0);
        Ok(Self::Pure {
            amplitudes,
            electronic_dim,
            motional_dim,
        })
    }

    /// Wrap a density matrix, validating Hermiticity and unit trace to
    /// [`DENSITY_TOL`].
    pub fn from_density(
        matrix: Array2<C64>,
        electronic_dim: usize,
        motional_dim: usize,
    ) -> Result<Self, FockError> {
        let dim = electronic_dim * motional_dim;
        if matrix.shape() != [dim, dim] {
            return Err(FockError::InvalidState(format!(
                "density matrix shape {:?} does not match dimension {dim}",
                matrix.shape()
            )));
        }
        let trace: C64 = (0..dim).map(|i| matrix[[i, i]]).sum();
        if (trace.re - 1.0).abs() > DENSITY_TOL || trace.im.abs() > DENSITY_TOL {
            return Err(FockError::InvalidState(format!(
                "density trace {trace} deviates from 1"
            )));
        }
        for i in 0..dim {
            for j in i..dim {
                if (matrix[[i, j]] - matrix[[j, i]].conj()).norm() > DENSITY_TOL {
                    return Err(FockError::InvalidState("density not Hermitian".into()));
                }
            }
        }
        Ok(Self::Density {
            matrix,
            electronic_dim,
            motional_dim,
        })
    }

    pub fn electronic_dim(&self) -> usize {
        match self {
            Self::Pure { electronic_dim, .. } | Self::Density { electronic_dim, .. } => {
                *electronic_dim
            }
        }
    }

    pub fn motional_dim(&self) -> usize {
        match self {
            Self::Pure { motional_dim, .. } | Self::Density { motional_dim, .. } => *motional_dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.electronic_dim() * self.motional_dim()
    }

    /// Population of basis state `|level> ⊗ |n>`.
    pub fn population(&self, level: usize, n: usize) -> f64 {
        let idx = level * self.motional_dim() + n;
        match self {
            Self::Pure { amplitudes, .. } => amplitudes[idx].norm_sqr(),
            Self::Density { matrix, .. } => matrix[[idx, idx]].re,
        }
    }

    /// Total population of an electronic level, summed over Fock states.
    pub fn electronic_population(&self, level: usize) -> f64 {
        (0..self.motional_dim())
            .map(|n| self.population(level, n))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    /// Independent oracle: direct finite-sum formula
    /// L_n^k(x) = Σ_i (-1)^i C(n+k, n-i) x^i / i!.
    fn laguerre_sum(n: u32, k: u32, x: f64) -> f64 {
        let binom = |top: u64, bottom: u64| -> f64 {
            let mut acc = 1.0;
            for j in 0..bottom {
                acc *= (top - j) as f64 / (bottom - j) as f64;
            }
            acc
        };
        let mut fact_i = 1.0;
        let mut total = 0.0;
        for i in 0..=n {
            if i > 0 {
                fact_i *= f64::from(i);
            }
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            total += sign * binom(u64::from(n + k), u64::from(n - i)) * x.powi(i as i32) / fact_i;
        }
        total
    }

    #[test]
    fn laguerre_base_cases() {
        assert_abs_diff_eq!(laguerre(0, 0, 0.09).unwrap(), 1.0);
        assert_abs_diff_eq!(laguerre(1, 0, 0.09).unwrap(), 0.91, epsilon = 1e-15);
        // closed form 1 - 2x + x^2/2 at x = 0.09
        assert_abs_diff_eq!(laguerre(2, 0, 0.09).unwrap(), 0.82405, epsilon = 1e-15);
    }

    #[test]
    fn laguerre_matches_closed_forms() {
        for n in 0..=5u32 {
            for k in 0..=2u32 {
                for &x in &[0.0, 0.01, 0.09, 0.25, 1.0] {
                    let got = laguerre(n, k, x).unwrap();
                    let want = laguerre_sum(n, k, x);
                    assert_relative_eq!(got, want, max_relative = 1e-12, epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn laguerre_rejects_bad_input() {
        assert!(laguerre(201, 0, 0.1).is_err());
        assert!(laguerre(3, 0, -0.1).is_err());
    }

    #[test]
    fn coupling_scale_ground_state() {
        let eta = 0.3;
        let pref = (-0.045f64).exp();
        assert_relative_eq!(
            coupling_scale(0, Transition::Carrier, eta).unwrap(),
            pref,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            coupling_scale(0, Transition::BlueSideband, eta).unwrap(),
            pref * 0.3,
            max_relative = 1e-14
        );
    }

    #[test]
    fn carrier_zero_crossing_near_n15() {
        // L_n^0(eta^2) changes sign between n = 15 and n = 17 for eta = 0.3
        let eta = 0.3;
        let before = coupling_scale(15, Transition::Carrier, eta).unwrap();
        let after = coupling_scale(17, Transition::Carrier, eta).unwrap();
        assert!(before > 0.0 && after < 0.0, "no sign change: {before} {after}");
    }

    #[test]
    fn red_sideband_rejects_ground() {
        assert!(coupling_scale(0, Transition::RedSideband, 0.3).is_err());
    }

    proptest! {
        #[test]
        fn red_equals_shifted_blue(n in 1u32..60, eta in 0.05f64..0.9) {
            let red = coupling_scale(n, Transition::RedSideband, eta).unwrap();
            let blue = coupling_scale(n - 1, Transition::BlueSideband, eta).unwrap();
            prop_assert!((red - blue).abs() <= 1e-15 * blue.abs().max(1.0));
        }

        #[test]
        fn thermal_geometric_ratio(mean_n in 0.01f64..20.0, n_max in 4usize..40) {
            let dist = make_thermal(mean_n, n_max).unwrap();
            let p = dist.populations();
            let ratio = mean_n / (mean_n + 1.0);
            for n in 0..n_max - 1 {
                prop_assert!((p[n + 1] / p[n] - ratio).abs() < 1e-12);
            }
            // strictly decreasing
            for n in 0..n_max - 1 {
                prop_assert!(p[n + 1] < p[n]);
            }
        }
    }

    #[test]
    fn thermal_examples() {
        let ground = make_thermal(0.0, 16).unwrap();
        assert_abs_diff_eq!(ground_state_population(&ground), 1.0);
        assert!(ground.populations()[1..].iter().all(|&p| p == 0.0));

        let doppler = make_thermal(11.5, 16).unwrap();
        assert_abs_diff_eq!(ground_state_population(&doppler), 0.08, epsilon = 1e-15);
        assert!(doppler.tail_warning());

        let one = make_thermal(1.0, 4).unwrap();
        assert_abs_diff_eq!(one.populations()[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(one.populations()[3], 1.0 / 16.0, epsilon = 1e-15);
        assert_abs_diff_eq!(one.truncation_tail(), 1.0 / 16.0, epsilon = 1e-15);
    }

    #[test]
    fn thermal_mean_converges() {
        // n_max large enough that the truncated mean converges
        for &mean_n in &[0.3, 1.0, 2.0] {
            let dist = make_thermal(mean_n, 64).unwrap();
            assert_abs_diff_eq!(dist.mean_n(), mean_n, epsilon = 1e-9);
        }
    }

    #[test]
    fn thermal_n_max_controls_tail() {
        let n = thermal_n_max(11.5, 1e-2);
        let dist = make_thermal(11.5, n).unwrap();
        assert!(dist.truncation_tail() < 1e-2);
        let short = make_thermal(11.5, n - 4).unwrap();
        assert!(short.truncation_tail() > 1e-2);
    }

    #[test]
    fn uniform_ground_population() {
        let dist = MotionalDistribution::from_populations(vec![0.25; 4]).unwrap();
        assert_abs_diff_eq!(ground_state_population(&dist), 0.25);
    }

    #[test]
    fn lamb_dicke_carrier_matches_scale() {
        let eta = 0.3;
        for n in 0..10 {
            let elem = lamb_dicke_element(n, n, eta).unwrap();
            let scale = coupling_scale(n, Transition::Carrier, eta).unwrap();
            assert_relative_eq!(elem.re, scale, max_relative = 1e-13);
            assert_abs_diff_eq!(elem.im, 0.0);
        }
        for n in 0..10 {
            let elem = lamb_dicke_element(n + 1, n, eta).unwrap();
            let scale = coupling_scale(n, Transition::BlueSideband, eta).unwrap();
            assert_relative_eq!(elem.norm(), scale.abs(), max_relative = 1e-13);
        }
    }

    #[test]
    fn composite_state_validation() {
        let psi = CompositeState::pure_fock(3, 4, 0, 2).unwrap();
        assert_eq!(psi.dim(), 12);
        assert_abs_diff_eq!(psi.population(0, 2), 1.0);
        assert!(CompositeState::pure_fock(3, 4, 3, 0).is_err());

        let mut rho = Array2::<C64>::zeros((6, 6));
        rho[[0, 0]] = C64::new(0.5, 0.0);
        rho[[3, 3]] = C64::new(0.5, 0.0);
        let state = CompositeState::from_density(rho.clone(), 2, 3).unwrap();
        assert_abs_diff_eq!(state.electronic_population(1), 0.5);

        rho[[0, 0]] = C64::new(0.7, 0.0);
        assert!(CompositeState::from_density(rho, 2, 3).is_err());
    }
}
