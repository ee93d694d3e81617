//! Physical parameters of the two-oscillator model and the named regimes.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fock::FockCutoff;
use crate::num::Real;

/// Physical constants of the driven coupled Kerr pair.
///
/// Both cavities share the detuning `delta` and the decay rate `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams<T> {
    pub delta: T,
    pub j_coupling: T,
    pub u1: T,
    pub u2: T,
    pub gamma: T,
    pub f_strength: T,
    pub cutoff: FockCutoff,
}

impl<T: Real> SystemParams<T> {
    /// All couplings zero, default cutoff.
    pub fn zero() -> Self {
        Self {
            delta: T::zero(),
            j_coupling: T::zero(),
            u1: T::zero(),
            u2: T::zero(),
            gamma: T::zero(),
            f_strength: T::zero(),
            cutoff: FockCutoff::default(),
        }
    }

    pub fn preset(regime: Regime) -> Self {
        let (f, u1) = match regime {
            Regime::MeanField => (2.0, 6.25e-3),
            Regime::Quantum => (0.2, 4.0),
            Regime::Cumulant => (0.5, 0.2),
        };
        Self {
            delta: T::of(-2.0),
            j_coupling: T::of(2.0),
            u1: T::of(u1),
            u2: T::of(2.0 * u1),
            gamma: T::of(0.5),
            f_strength: T::of(f),
            cutoff: FockCutoff::default(),
        }
    }

    pub fn with_j(mut self, j: T) -> Self {
        self.j_coupling = j;
        self
    }

    pub fn with_gamma(mut self, gamma: T) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_cutoff(mut self, cutoff: FockCutoff) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("delta", self.delta),
            ("j_coupling", self.j_coupling),
            ("u1", self.u1),
            ("u2", self.u2),
            ("gamma", self.gamma),
            ("f_strength", self.f_strength),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        if self.gamma < T::zero() {
            return Err(Error::param("gamma", "must be >= 0"));
        }
        Ok(())
    }

    /// Converts to another scalar type.
    pub fn cast<U: Real>(&self) -> SystemParams<U> {
        SystemParams {
            delta: U::of(self.delta.as_f64()),
            j_coupling: U::of(self.j_coupling.as_f64()),
            u1: U::of(self.u1.as_f64()),
            u2: U::of(self.u2.as_f64()),
            gamma: U::of(self.gamma.as_f64()),
            f_strength: U::of(self.f_strength.as_f64()),
            cutoff: self.cutoff,
        }
    }
}

/// Named parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Large drive, weak Kerr: `F = 2`, `U1 = 6.25e-3`.
    MeanField,
    /// Weak drive, strong Kerr: `F = 0.2`, `U1 = 4`.
    Quantum,
    /// Intermediate: `F = 0.5`, `U1 = 0.2`.
    Cumulant,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::MeanField, Regime::Quantum, Regime::Cumulant];

    pub fn name(self) -> &'static str {
        match self {
            Regime::MeanField => "meanfield",
            Regime::Quantum => "quantum",
            Regime::Cumulant => "cumulant",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "meanfield" => Ok(Regime::MeanField),
            "quantum" => Ok(Regime::Quantum),
            "cumulant" => Ok(Regime::Cumulant),
            _ => Err(Error::UnknownRegime(s.to_string())),
        }
    }
}
