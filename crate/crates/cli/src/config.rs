//! Model and sweep settings assembled from a TOML file and command-line flags.

use std::f64::consts::PI;
use std::path::Path;

use cavity_blockade::experiments::{Axis, SweepParam};
use cavity_blockade::model::ModelParams;
use cavity_blockade::observables::Observable;
use clap::Args;
use serde::Deserialize;

use crate::CliError;

/// Flat config file. Keys are the model parameter names plus sweep keys;
/// anything else is rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub delta_a: Option<f64>,
    pub delta_c: Option<f64>,
    pub g0: Option<f64>,
    pub phi_z: Option<f64>,
    pub eta: Option<f64>,
    pub kappa: Option<f64>,
    pub gamma: Option<f64>,
    pub n_max: Option<usize>,
    pub axis1: Option<String>,
    pub axis2: Option<String>,
    pub mode: Option<String>,
    pub t_end: Option<f64>,
    pub dt_out: Option<f64>,
    pub eta_over_gamma: Option<f64>,
    pub observables: Option<Vec<String>>,
    pub workers: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

#[derive(Args, Debug, Default, Clone)]
pub struct ModelArgs {
    /// TOML file with parameter and sweep keys; flags override it.
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
    /// Qubit detuning Δ_A / κ.
    #[arg(long, allow_hyphen_values = true)]
    pub delta_a: Option<f64>,
    /// Cavity detuning Δ_C / κ.
    #[arg(long, allow_hyphen_values = true)]
    pub delta_c: Option<f64>,
    /// Coupling g₀ / κ.
    #[arg(long, allow_hyphen_values = true)]
    pub g0: Option<f64>,
    /// Placement phase in radians; accepts `pi`, `pi/2`, `0.5pi`.
    #[arg(long, value_parser = parse_phase, allow_hyphen_values = true)]
    pub phi_z: Option<f64>,
    /// Drive η / κ.
    #[arg(long, allow_hyphen_values = true)]
    pub eta: Option<f64>,
    /// Qubit decay γ / κ.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// Fock truncation.
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Physical value of κ; output times are divided by it.
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub workers: Option<usize>,
}

/// Everything a command needs after merging config and flags.
pub struct Settings {
    pub params: ModelParams,
    pub time_scale: f64,
    pub workers: Option<usize>,
    pub file: ConfigFile,
}

impl ModelArgs {
    pub fn settings(&self) -> Result<Settings, CliError> {
        let file = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let d = ModelParams::default();
        let params = ModelParams {
            delta_a: self.delta_a.or(file.delta_a).unwrap_or(d.delta_a),
            delta_c: self.delta_c.or(file.delta_c).unwrap_or(d.delta_c),
            g0: self.g0.or(file.g0).unwrap_or(d.g0),
            phi_z: self.phi_z.or(file.phi_z).unwrap_or(d.phi_z),
            eta: self.eta.or(file.eta).unwrap_or(d.eta),
            kappa: 1.0,
            gamma: self.gamma.or(file.gamma).unwrap_or(d.gamma),
            n_max: self.n_max.or(file.n_max).unwrap_or(d.n_max),
        };
        params.validate()?;
        let kappa = self.kappa.or(file.kappa).unwrap_or(1.0);
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(CliError::Usage(format!("kappa must be positive, got {kappa}")));
        }
        Ok(Settings { params, time_scale: 1.0 / kappa, workers: self.workers.or(file.workers), file })
    }
}

/// Parses `pi`, `-pi`, `pi/2`, `3pi/4`, `0.5pi`, `0.5*pi` or a plain number.
pub fn parse_phase(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase().replace(['*', ' '], "");
    let bad = || format!("cannot parse phase '{s}'");
    let Some(k) = t.find("pi") else {
        return t.parse().map_err(|_| bad());
    };
    let coeff = match &t[..k] {
        "" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    let denom = match &t[k + 2..] {
        "" => 1.0,
        rest => rest.strip_prefix('/').and_then(|d| d.parse::<f64>().ok()).ok_or_else(bad)?,
    };
    Ok(coeff * PI / denom)
}

/// Parses `name=lo:hi:n`, `name=lo:hi:n:log` or `name=v1,v2,...`.
pub fn parse_axis(s: &str) -> Result<Axis, CliError> {
    let usage = |why: &str| CliError::Usage(format!("axis '{s}': {why}"));
    let (name, grid) = s.split_once('=').ok_or_else(|| usage("expected name=grid"))?;
    let param = SweepParam::parse(name.trim())?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| usage(&format!("bad number '{v}'")));
    if grid.contains(':') {
        let parts: Vec<&str> = grid.split(':').collect();
        let (lo, hi) = (num(parts[0])?, num(parts.get(1).copied().unwrap_or(""))?);
        let n: usize = parts
            .get(2)
            .and_then(|v| v.trim().parse().ok())
            .filter(|&n| n > 0)
            .ok_or_else(|| usage("expected a positive point count"))?;
        match parts.get(3).map(|v| v.trim()) {
            None | Some("lin") => Ok(Axis::linear(param, lo, hi, n)),
            Some("log") if lo > 0.0 && hi > 0.0 => Ok(Axis::log(param, lo, hi, n)),
            Some("log") => Err(usage("log grids need positive bounds")),
            Some(other) => Err(usage(&format!("unknown spacing '{other}'"))),
        }
    } else {
        let values = grid.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
        Ok(Axis::new(param, values))
    }
}

pub fn parse_observables(names: &[String]) -> Result<Vec<Observable>, CliError> {
    names.iter().map(|n| Observable::parse(n.trim()).map_err(CliError::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phases() {
        assert_eq!(parse_phase("pi").unwrap(), PI);
        assert_eq!(parse_phase("-pi").unwrap(), -PI);
        assert_eq!(parse_phase("pi/2").unwrap(), PI / 2.0);
        assert_eq!(parse_phase("0.5pi").unwrap(), 0.5 * PI);
        assert_eq!(parse_phase("3*pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_phase("1.25").unwrap(), 1.25);
        assert!(parse_phase("tau").is_err());
        assert!(parse_phase("pi/").is_err());
    }

    #[test]
    fn axes() {
        let a = parse_axis("g0_over_kappa=0.02:2:3:log").unwrap();
        assert_eq!(a.param, SweepParam::G0OverKappa);
        assert!((a.values[1] - 0.2).abs() < 1e-12);
        let a = parse_axis("gamma=1,0.1").unwrap();
        assert_eq!(a.values, vec![1.0, 0.1]);
        let a = parse_axis("phi_z_over_pi = 0:2:5").unwrap();
        assert_eq!(a.values, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert!(parse_axis("g1=0:1:3").is_err());
        assert!(parse_axis("g0=0:1").is_err());
        assert!(parse_axis("g0=0:1:3:log").is_err());
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        assert!(toml::from_str::<ConfigFile>("g0 = 1.0\ngama = 0.1\n").is_err());
        let c: ConfigFile = toml::from_str("g0 = 1.0\naxis1 = \"g0=0:1:3\"\n").unwrap();
        assert_eq!(c.g0, Some(1.0));
    }
}
