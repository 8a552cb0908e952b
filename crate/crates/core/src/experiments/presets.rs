//! Named sweeps reproducing the figure panels.
//!
//! Grid densities: 60 log points for 1-D coupling scans, 41×41 for maps.
//! Truncations are chosen per series so the sentinel rerun at `2·n_max`
//! stays below [`SENTINEL_TOLERANCE`](super::SENTINEL_TOLERANCE); the
//! `γ = κ` series carries the most photons and needs `n_max = 10`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::observables::Observable;

use super::sweep::{Axis, SweepMode, SweepParam, SweepSpec, Truncation};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// ξ, P_ee and g²(0) against g₀/κ for γ/κ ∈ {1, 0.1, 0.01, 0.001}.
    Fig2,
    /// log₁₀ ξ over (g₀/κ, Δ/κ) with Δ_A = Δ_C, γ = 0.01κ.
    Fig2Inset,
    /// Concurrence against γ/κ at g₀ = κ.
    Fig3,
    /// Concurrence over (g₀/κ, η/γ) at γ = 0.01κ. The axis ranges
    /// g₀/κ ∈ [0.05, 3] and η/γ ∈ [0.2, 40] are an artifact choice.
    Fig3Inset,
    /// log₁₀ ξ and concurrence over (g₀/κ, φ_z/π).
    Fig4,
    /// P_ee(γt) from |gg,0⟩ for the four decay rates of Fig2.
    Fig5a,
    /// Transient concurrence at γ = 10⁻³κ, g₀ = 4κ, η = 20γ.
    Fig5b,
}

/// Decay rates of the Fig2 and Fig5a series.
pub const SERIES_GAMMAS: [f64; 4] = [1.0, 0.1, 0.01, 0.001];
/// Decay rates of the two Fig3 bar diagrams.
pub const BAR_GAMMAS: [f64; 2] = [5e-3, 1e-3];

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::Fig2,
        Preset::Fig2Inset,
        Preset::Fig3,
        Preset::Fig3Inset,
        Preset::Fig4,
        Preset::Fig5a,
        Preset::Fig5b,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig2Inset => "fig2-inset",
            Preset::Fig3 => "fig3",
            Preset::Fig3Inset => "fig3-inset",
            Preset::Fig4 => "fig4",
            Preset::Fig5a => "fig5a",
            Preset::Fig5b => "fig5b",
        }
    }

    pub fn names() -> Vec<&'static str> {
        Self::ALL.iter().map(|p| p.name()).collect()
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name).ok_or_else(|| {
            Error::InvalidSweep(format!(
                "unknown figure '{name}', expected one of: {}",
                Self::names().join(", ")
            ))
        })
    }

    pub fn spec(self) -> SweepSpec {
        let base = ModelParams { phi_z: PI, ..ModelParams::default() };
        let steady = |base: ModelParams, axis1: Axis, axis2: Option<Axis>| {
            let mut s = SweepSpec::steady(base, axis1, axis2);
            s.eta_over_gamma = Some(5.0);
            s
        };
        match self {
            Preset::Fig2 => SweepSpec {
                truncation: Truncation::PerAxisValue { axis: 2, n_max: vec![10, 8, 6, 6] },
                observables: vec![Observable::PEe, Observable::Xi, Observable::G2],
                ..steady(
                    base,
                    Axis::log(SweepParam::G0OverKappa, 0.02, 2.0, 60),
                    Some(Axis::new(SweepParam::GammaOverKappa, SERIES_GAMMAS.to_vec())),
                )
            },
            Preset::Fig2Inset => SweepSpec {
                observables: vec![Observable::Xi],
                ..steady(
                    ModelParams { gamma: 0.01, n_max: 4, ..base },
                    Axis::linear(SweepParam::G0OverKappa, 0.02, 2.0, 41),
                    Some(Axis::linear(SweepParam::DeltaOverKappa, -2.0, 2.0, 41)),
                )
            },
            Preset::Fig3 => SweepSpec {
                observables: vec![Observable::Concurrence, Observable::PopPlus],
                ..steady(
                    ModelParams { g0: 1.0, n_max: 8, ..base },
                    Axis::log(SweepParam::GammaOverKappa, 1e-4, 10.0, 41),
                    None,
                )
            },
            Preset::Fig3Inset => SweepSpec {
                eta_over_gamma: None,
                observables: vec![Observable::Concurrence],
                ..steady(
                    ModelParams { gamma: 0.01, n_max: 6, ..base },
                    Axis::linear(SweepParam::G0OverKappa, 0.05, 3.0, 41),
                    Some(Axis::log(SweepParam::EtaOverGamma, 0.2, 40.0, 41)),
                )
            },
            Preset::Fig4 => SweepSpec {
                observables: vec![Observable::Xi, Observable::Concurrence],
                ..steady(
                    ModelParams { gamma: 0.01, n_max: 4, ..base },
                    Axis::linear(SweepParam::G0OverKappa, 0.02, 2.0, 41),
                    Some(Axis::linear(SweepParam::PhiZOverPi, 0.0, 2.0, 41)),
                )
            },
            Preset::Fig5a => SweepSpec {
                truncation: Truncation::PerAxisValue { axis: 1, n_max: vec![8, 6, 4, 4] },
                mode: SweepMode::Evolve { t_end: 2.0, dt_out: 0.002, gamma_units: true },
                observables: vec![Observable::PEe],
                ..steady(
                    ModelParams { g0: 1.0, ..base },
                    Axis::new(SweepParam::GammaOverKappa, SERIES_GAMMAS.to_vec()),
                    None,
                )
            },
            Preset::Fig5b => SweepSpec {
                eta_over_gamma: Some(20.0),
                mode: SweepMode::Evolve { t_end: 0.15, dt_out: 1e-4, gamma_units: true },
                observables: vec![Observable::Concurrence],
                ..steady(
                    ModelParams { g0: 4.0, n_max: 4, ..base },
                    Axis::new(SweepParam::GammaOverKappa, vec![1e-3]),
                    None,
                )
            },
        }
    }

    /// 2-D steady maps whose ξ = 1 contour is exported.
    pub fn has_xi_map(self) -> bool {
        matches!(self, Preset::Fig2Inset | Preset::Fig4)
    }
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
