//! Mapping from a BEC-in-cavity setup onto the spin model.
//!
//! All inputs share one frequency unit of the caller's choosing (for instance kHz with
//! `ω_R = 2π · 4 kHz`); outputs are in the same unit. Dividing by the mapped `ω_R` gives the
//! dimensionless values used everywhere else.

use crate::error::{Error, Result};
use crate::spectral::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BecParams {
    /// Cavity mode frequency.
    pub omega_1: f64,
    pub omega_pump: f64,
    /// Single-photon coupling.
    pub g_1: f64,
    /// Atomic detuning.
    pub delta_a: f64,
    /// Pump Rabi frequency `Ω_pump`.
    pub omega_pump_rabi: f64,
    pub n_atoms: u64,
    /// Mode wavevector, with `ħ = 1`.
    pub k_1: f64,
    pub m_a: f64,
    /// Scale of the modulated trap depth `V₀`.
    pub v0_scale: f64,
    /// Cavity decay rate, passed through.
    pub kappa: f64,
}

impl Default for BecParams {
    fn default() -> Self {
        Self {
            omega_1: 1.05,
            omega_pump: 0.0,
            g_1: 0.01,
            delta_a: 100.0,
            omega_pump_rabi: 1.0,
            n_atoms: 100_000,
            k_1: 1.0,
            m_a: 0.5,
            v0_scale: 1.0,
            kappa: 325.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BecMapping {
    pub model: ModelParams<f64>,
    /// Signed coupling before folding its sign into the local-oscillator phase.
    pub g_signed: f64,
    /// `√(N/8)`: `G I(t) = √(N/8) V₀(t)`.
    pub feedback_scale: f64,
    /// `V₀` amplitude in units of `G I`.
    pub v0_in_gain_units: f64,
}

/// `δ = ω₁ − ω_pump + N g₁²/(2Δ_a)`, `ω_R = k₁²/(2m_a)`, `g = Ω_pump g₁ √(N/2)/Δ_a`.
///
/// A negative `g` is mapped to `|g|` with `θ → θ + π` (the sign of `a` is a convention).
pub fn bec_to_model(bec: &BecParams) -> Result<BecMapping> {
    if bec.delta_a == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    if bec.n_atoms == 0 || !(bec.m_a > 0.0) || !(bec.kappa > 0.0) {
        return Err(Error::InvalidParameter(
            "need N_atoms >= 1, m_a > 0 and kappa > 0".into(),
        ));
    }
    let n = bec.n_atoms as f64;
    let delta = bec.omega_1 - bec.omega_pump + n * bec.g_1 * bec.g_1 / (2.0 * bec.delta_a);
    let omega_r = bec.k_1 * bec.k_1 / (2.0 * bec.m_a);
    let g = bec.omega_pump_rabi * bec.g_1 * (n / 2.0).sqrt() / bec.delta_a;
    let mut theta = std::f64::consts::FRAC_PI_2;
    if g < 0.0 {
        theta += std::f64::consts::PI;
    }
    let model = ModelParams {
        delta,
        omega_r,
        g: g.abs(),
        kappa: bec.kappa,
        gain: 0.0,
        theta,
        eta: 1.0,
        n_spins: bec.n_atoms,
    };
    model.validate()?;
    let feedback_scale = (n / 8.0).sqrt();
    Ok(BecMapping {
        model,
        g_signed: g,
        feedback_scale,
        v0_in_gain_units: bec.v0_scale * feedback_scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_pump_no_coupling() {
        let m = bec_to_model(&BecParams {
            omega_pump_rabi: 0.0,
            ..BecParams::default()
        })
        .unwrap();
        assert_eq!(m.model.g, 0.0);
    }

    #[test]
    fn zero_detuning_is_rejected() {
        let b = BecParams {
            delta_a: 0.0,
            ..BecParams::default()
        };
        assert_eq!(bec_to_model(&b), Err(Error::ZeroDetuning));
    }

    #[test]
    fn coupling_scales_as_rabi_times_sqrt_n() {
        let b = BecParams::default();
        let g1 = bec_to_model(&b).unwrap().model.g;
        let b4 = BecParams {
            n_atoms: 4 * b.n_atoms,
            omega_pump_rabi: b.omega_pump_rabi / 2.0,
            ..b
        };
        let g4 = bec_to_model(&b4).unwrap().model.g;
        assert!((g1 - g4).abs() <= 1e-15 * g1);
    }
}
