//! Time-dependent Rabi-frequency envelopes: Gaussian pump/Stokes pairs with
//! configurable length, delay scaling, pulse order, and the truncated
//! (abrupt-edge) sequence variant.

use thiserror::Error;

/// FWHM of a Gaussian in units of its width parameter, `2 sqrt(2 ln 2)`.
pub const FWHM_FACTOR: f64 = 2.354_820_045_030_949_3;

#[derive(Debug, Error)]
pub enum PulseError {
    #[error("pulse length must be positive, got {0}")]
    NonPositiveLength(f64),
    #[error("delay scaling factor must be non-negative, got {0}")]
    NegativeScaling(f64),
    #[error("pulse amplitude must be non-negative, got {0}")]
    NegativeAmplitude(f64),
    #[error("pump asymmetry must lie in [0, 1), got {0}")]
    BadAsymmetry(f64),
    #[error("effective transfer time is defined only for truncated schedules")]
    NotTruncated,
}

/// A single Gaussian envelope `Ω_max exp(-(t - center)^2 / (2 width^2))`.
#[derive(Copy, Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GaussianPulse {
    /// Peak Rabi frequency (rad/s).
    pub omega_max: f64,
    /// Center time (s).
    pub center: f64,
    /// Gaussian width parameter (s); FWHM = [`FWHM_FACTOR`] · width.
    pub width: f64,
}

impl GaussianPulse {
    pub fn fwhm(&self) -> f64 {
        FWHM_FACTOR * self.width
    }

    /// Envelope value at time `t`.
    pub fn envelope(&self, t: f64) -> f64 {
        let u = (t - self.center) / self.width;
        self.omega_max * (-0.5 * u * u).exp()
    }

    /// Analytic time derivative of the envelope.
    pub fn envelope_derivative(&self, t: f64) -> f64 {
        -(t - self.center) / (self.width * self.width) * self.envelope(t)
    }
}

/// Which pulse peaks first. Counter-intuitive order puts the Stokes peak
/// (coupling the initially empty states) before the pump peak.
#[derive(Copy, Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseOrder {
    CounterIntuitive,
    Intuitive,
}

/// A pump/Stokes pulse pair.
///
/// The signed delay is `t_delay = pump.center - stokes.center`, so positive
/// delays correspond to the counter-intuitive order. In truncated mode the
/// Stokes envelope is held at its maximum before its center and the pump
/// envelope is cut to zero after its center.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PulseSchedule {
    pub pump: GaussianPulse,
    pub stokes: GaussianPulse,
    pub order: PulseOrder,
    pub truncated: bool,
    /// Delay scaling factor `s` used at construction, when applicable.
    pub s_factor: Option<f64>,
}

impl PulseSchedule {
    /// Standard STIRAP schedule: both envelopes share the FWHM `t_pulse`,
    /// centers placed symmetrically about t = 0 and separated by
    /// `s_factor · t_pulse`.
    pub fn stirap(
        t_pulse: f64,
        s_factor: f64,
        order: PulseOrder,
        omega_p_max: f64,
        omega_s_max: f64,
        truncated: bool,
    ) -> Result<Self, PulseError> {
        Self::stirap_asymmetric(
            t_pulse,
            s_factor,
            order,
            omega_p_max,
            omega_s_max,
            truncated,
            0.0,
        )
    }

    /// STIRAP schedule with an optional pump-length asymmetry: the pump FWHM
    /// is `(1 - pump_asymmetry) · t_pulse`. The delay remains the separation
    /// of the Rabi-frequency maxima.
    pub fn stirap_asymmetric(
        t_pulse: f64,
        s_factor: f64,
        order: PulseOrder,
        omega_p_max: f64,
        omega_s_max: f64,
        truncated: bool,
        pump_asymmetry: f64,
    ) -> Result<Self, PulseError> {
        if t_pulse <= 0.0 {
            return Err(PulseError::NonPositiveLength(t_pulse));
        }
        if s_factor < 0.0 {
            return Err(PulseError::NegativeScaling(s_factor));
        }
        if omega_p_max < 0.0 {
            return Err(PulseError::NegativeAmplitude(omega_p_max));
        }
        if omega_s_max < 0.0 {
            return Err(PulseError::NegativeAmplitude(omega_s_max));
        }
        if !(0.0..1.0).contains(&pump_asymmetry) {
            return Err(PulseError::BadAsymmetry(pump_asymmetry));
        }
        let delay = s_factor * t_pulse;
        let (pump_center, stokes_center) = match order {
            PulseOrder::CounterIntuitive => (delay / 2.0, -delay / 2.0),
            PulseOrder::Intuitive => (-delay / 2.0, delay / 2.0),
        };
        Ok(Self {
            pump: GaussianPulse {
                omega_max: omega_p_max,
                center: pump_center,
                width: (1.0 - pump_asymmetry) * t_pulse / FWHM_FACTOR,
            },
            stokes: GaussianPulse {
                omega_max: omega_s_max,
                center: stokes_center,
                width: t_pulse / FWHM_FACTOR,
            },
            order,
            truncated,
            s_factor: Some(s_factor),
        })
    }

    /// Constant-amplitude drive (for Rabi-oscillation references): both
    /// envelopes are Gaussians with a 1 s width, flat to better than
    /// 1e-9 over the microsecond timescales integrated here.
    pub fn constant(omega_p: f64, omega_s: f64) -> Self {
        let flat = |omega_max: f64| GaussianPulse {
            omega_max,
            center: 0.0,
            width: 1.0,
        };
        Self {
            pump: flat(omega_p),
            stokes: flat(omega_s),
            order: PulseOrder::CounterIntuitive,
            truncated: false,
            s_factor: None,
        }
    }

    /// Signed pulse delay `pump.center - stokes.center`; positive for the
    /// counter-intuitive order.
    pub fn t_delay(&self) -> f64 {
        self.pump.center - self.stokes.center
    }

    /// Effective pulse length: mean of the two FWHM values.
    pub fn t_pulse(&self) -> f64 {
        0.5 * (self.pump.fwhm() + self.stokes.fwhm())
    }

    /// Pump envelope at `t`, with truncation applied.
    pub fn pump_envelope(&self, t: f64) -> f64 {
        if self.truncated && t > self.pump.center {
            0.0
        } else {
            self.pump.envelope(t)
        }
    }

    /// Stokes envelope at `t`, with truncation applied.
    pub fn stokes_envelope(&self, t: f64) -> f64 {
        if self.truncated && t < self.stokes.center {
            self.stokes.omega_max
        } else {
            self.stokes.envelope(t)
        }
    }

    /// Analytic derivative of the (possibly truncated) pump envelope.
    pub fn pump_envelope_derivative(&self, t: f64) -> f64 {
        if self.truncated && t > self.pump.center {
            0.0
        } else {
            self.pump.envelope_derivative(t)
        }
    }

    /// Analytic derivative of the (possibly truncated) Stokes envelope.
    pub fn stokes_envelope_derivative(&self, t: f64) -> f64 {
        if self.truncated && t < self.stokes.center {
            0.0
        } else {
            self.stokes.envelope_derivative(t)
        }
    }

    /// Effective transfer time `(1 + s) · t_pulse` of the truncated
    /// sequence.
    pub fn effective_transfer_time(&self) -> Result<f64, PulseError> {
        if !self.truncated {
            return Err(PulseError::NotTruncated);
        }
        let s = self
            .s_factor
            .unwrap_or_else(|| self.t_delay().abs() / self.t_pulse());
        Ok((1.0 + s) * self.t_pulse())
    }

    /// Default integration window: the pulse centers ± 2 pulse lengths,
    /// where the Gaussian tails are below `e^-8` of peak. Truncation only
    /// alters the envelopes inside this window; after the abrupt pump
    /// cutoff the populations are frozen, so the same window serves both
    /// variants.
    pub fn window(&self) -> (f64, f64) {
        let lo = self.pump.center.min(self.stokes.center);
        let hi = self.pump.center.max(self.stokes.center);
        let span = 2.0 * self.t_pulse();
        (lo - span, hi + span)
    }
}
