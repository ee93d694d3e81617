//! Common entry point over the three dynamical descriptions.

use std::fmt;
use std::str::FromStr;

use crate::drive::DriveSignal;
use crate::error::{Error, Result};
use crate::fock::vacuum_density;
use crate::num::Real;
use crate::params::SystemParams;
use crate::quantum::{evolve, EvolveOptions, ReadoutSample};
use crate::semiclassical::{integrate, IntegrateOptions, RhsKind, SemiclassicalState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Simulator {
    /// Lindblad master equation on the truncated Fock space.
    Quantum,
    /// Second-order cumulant closure.
    Cumulant,
    /// Coherent amplitudes only.
    MeanField,
}

impl Simulator {
    pub const ALL: [Simulator; 3] = [Simulator::Quantum, Simulator::Cumulant, Simulator::MeanField];

    pub fn name(self) -> &'static str {
        match self {
            Simulator::Quantum => "quantum",
            Simulator::Cumulant => "cumulant",
            Simulator::MeanField => "meanfield",
        }
    }
}

impl fmt::Display for Simulator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Simulator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "quantum" | "lindblad" => Ok(Simulator::Quantum),
            "cumulant" => Ok(Simulator::Cumulant),
            "meanfield" | "mean-field" | "mean_field" => Ok(Simulator::MeanField),
            _ => Err(Error::param("simulator", format!("unknown `{s}`; expected quantum, cumulant or meanfield"))),
        }
    }
}

/// Post-washout readouts of one run.
#[derive(Debug, Clone)]
pub struct Readouts {
    pub samples: Vec<ReadoutSample>,
    /// Largest cutoff-edge population; quantum runs only.
    pub max_leakage: Option<f64>,
}

/// Runs `simulator` from the vacuum up to `t_end`, keeping readouts after `washout`.
pub fn run_readouts<T: Real>(
    simulator: Simulator,
    params: &SystemParams<T>,
    signal: &DriveSignal,
    dt: f64,
    washout: f64,
    t_end: f64,
) -> Result<Readouts> {
    match simulator {
        Simulator::Quantum => {
            let rho0 = vacuum_density(params.cutoff);
            let opts = EvolveOptions { dt, washout, ..EvolveOptions::default() };
            let traj = evolve(&rho0, params, signal, &opts, t_end)?;
            Ok(Readouts { samples: traj.samples, max_leakage: Some(traj.max_leakage) })
        }
        Simulator::Cumulant | Simulator::MeanField => {
            let kind = if simulator == Simulator::Cumulant { RhsKind::Cumulant } else { RhsKind::MeanField };
            let opts = IntegrateOptions { dt, washout };
            let run = integrate(SemiclassicalState::zero(kind), params, signal, &opts, t_end)?;
            Ok(Readouts { samples: run.samples, max_leakage: None })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockCutoff;
    use crate::params::Regime;

    #[test]
    fn names_round_trip() {
        for s in Simulator::ALL {
            assert_eq!(s.name().parse::<Simulator>().unwrap(), s);
        }
        assert!("classical".parse::<Simulator>().is_err());
    }

    #[test]
    fn backends_agree_in_the_linear_limit() {
        let mut p = SystemParams::<f64>::preset(Regime::Quantum).with_cutoff(FockCutoff::new(5).unwrap());
        p.u1 = 0.0;
        p.u2 = 0.0;
        p.f_strength = 0.05;
        let signal = DriveSignal::telegraph(1.0, 1.0, 12.0, 3).unwrap();
        let runs: Vec<Readouts> = Simulator::ALL
            .iter()
            .map(|&s| run_readouts(s, &p, &signal, 0.01, 2.0, 12.0).unwrap())
            .collect();
        assert!(runs[0].max_leakage.unwrap() < 1e-6);
        for r in &runs[1..] {
            assert_eq!(r.samples.len(), runs[0].samples.len());
            for (a, b) in r.samples.iter().zip(&runs[0].samples) {
                for (x, y) in a.outputs().iter().zip(b.outputs()) {
                    assert!((x - y).abs() < 1e-6, "{x} vs {y}");
                }
            }
        }
    }
}
