//! Experiment configuration: TOML schema, preset merging and validation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::FockCutoff;
use crate::params::{Regime, SystemParams};
use crate::simulator::Simulator;

/// Default signal intervals per realization for information sweeps.
pub const DEFAULT_INTERVALS: usize = 100_000;
pub const DEFAULT_REALIZATIONS: usize = 50;
pub const DEFAULT_OUTPUT_BINS: usize = 16;
pub const DEFAULT_PID_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    Delta,
    J,
    U1,
    U2,
    Gamma,
    F,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 6] = [
        SweepParameter::Delta,
        SweepParameter::J,
        SweepParameter::U1,
        SweepParameter::U2,
        SweepParameter::Gamma,
        SweepParameter::F,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Delta => "delta",
            SweepParameter::J => "j",
            SweepParameter::U1 => "u1",
            SweepParameter::U2 => "u2",
            SweepParameter::Gamma => "gamma",
            SweepParameter::F => "f",
        }
    }

    pub fn get(self, p: &SystemParams<f64>) -> f64 {
        match self {
            SweepParameter::Delta => p.delta,
            SweepParameter::J => p.j_coupling,
            SweepParameter::U1 => p.u1,
            SweepParameter::U2 => p.u2,
            SweepParameter::Gamma => p.gamma,
            SweepParameter::F => p.f_strength,
        }
    }

    /// Copy of `p` with this parameter set to `value`.
    pub fn apply(self, p: &SystemParams<f64>, value: f64) -> SystemParams<f64> {
        let mut q = *p;
        match self {
            SweepParameter::Delta => q.delta = value,
            SweepParameter::J => q.j_coupling = value,
            SweepParameter::U1 => q.u1 = value,
            SweepParameter::U2 => q.u2 = value,
            SweepParameter::Gamma => q.gamma = value,
            SweepParameter::F => q.f_strength = value,
        }
        q
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParameter {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown parameter `{s}`; expected one of delta, j, u1, u2, gamma, f"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalKind {
    Telegraph,
    Uniform,
}

impl SignalKind {
    pub fn name(self) -> &'static str {
        match self {
            SignalKind::Telegraph => "telegraph",
            SignalKind::Uniform => "uniform",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalysisKind {
    /// MI triple, PID atoms, co-information and (quantum only) QMI.
    Pid,
    /// Delayed-input recall with a linear readout.
    Memory,
}

impl AnalysisKind {
    pub fn name(self) -> &'static str {
        match self {
            AnalysisKind::Pid => "pid",
            AnalysisKind::Memory => "memory",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalSpec {
    pub kind: SignalKind,
    pub switch_rate: f64,
    pub update_interval: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingSpec {
    pub washout: f64,
    /// Post-washout signal intervals per realization.
    pub intervals: usize,
    pub realizations: usize,
    pub seed: u64,
    /// Largest integrator step.
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisSpec {
    pub kind: AnalysisKind,
    pub output_bins: usize,
    pub input_bins: usize,
    pub pid_tol: f64,
    pub qmi: bool,
    pub max_delay: usize,
    pub train_fraction: f64,
    pub lambda: f64,
}

/// A validated experiment with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub regime: Regime,
    pub params: SystemParams<f64>,
    pub sweep: Sweep,
    pub simulator: Simulator,
    pub signal: SignalSpec,
    pub sampling: SamplingSpec,
    pub analysis: AnalysisSpec,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    regime: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    simulator: Option<String>,
    #[serde(default)]
    params: RawParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<RawSweep>,
    #[serde(default)]
    signal: RawSignal,
    #[serde(default)]
    sampling: RawSampling,
    #[serde(default)]
    analysis: RawAnalysis,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    j: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    u1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    u2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_max: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    parameter: String,
    values: Vec<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSignal {
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    switch_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    update_interval: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSampling {
    #[serde(skip_serializing_if = "Option::is_none")]
    washout: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    intervals: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    realizations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dt: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnalysis {
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output_bins: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    input_bins: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pid_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    qmi: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_delay: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    train_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
}

fn config_err(path: &str, message: impl Into<String>) -> Error {
    Error::Config { path: path.to_string(), message: message.into() }
}

fn natural_simulator(regime: Regime) -> Simulator {
    match regime {
        Regime::MeanField => Simulator::MeanField,
        Regime::Quantum => Simulator::Quantum,
        Regime::Cumulant => Simulator::Cumulant,
    }
}

fn finite(path: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(config_err(path, format!("must be finite, got {v}")))
    }
}

fn positive(path: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(config_err(path, format!("must be positive, got {v}")))
    }
}

/// Parses and validates a TOML experiment document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let de = toml::Deserializer::parse(text).map_err(|e| config_err("", e.to_string().trim_end()))?;
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        config_err(if path == "." { "" } else { &path }, e.into_inner().to_string().trim_end())
    })?;
    validate(raw)
}

fn validate(raw: RawConfig) -> Result<ExperimentConfig> {
    let regime: Regime = raw.regime.parse().map_err(|_| Error::UnknownRegime(raw.regime.clone()))?;
    let simulator = match &raw.simulator {
        Some(s) => s.parse().map_err(|_| {
            config_err("simulator", format!("unknown `{s}`; expected quantum, cumulant or meanfield"))
        })?,
        None => natural_simulator(regime),
    };

    let mut params = SystemParams::<f64>::preset(regime);
    let rp = &raw.params;
    if let Some(v) = rp.delta {
        params.delta = finite("params.delta", v)?;
    }
    if let Some(v) = rp.j {
        params.j_coupling = finite("params.j", v)?;
    }
    if let Some(v) = rp.u1 {
        params.u1 = finite("params.u1", v)?;
        params.u2 = 2.0 * params.u1;
    }
    if let Some(v) = rp.u2 {
        params.u2 = finite("params.u2", v)?;
    }
    if let Some(v) = rp.gamma {
        params.gamma = finite("params.gamma", v)?;
    }
    if let Some(v) = rp.f {
        params.f_strength = finite("params.f", v)?;
    }
    if let Some(n) = rp.n_max {
        params.cutoff = FockCutoff::new(n).map_err(|e| config_err("params.n_max", e.to_string()))?;
    }
    params.validate().map_err(|e| config_err("params", e.to_string()))?;

    let sweep = match raw.sweep {
        Some(s) => {
            let parameter: SweepParameter = s.parameter.parse().map_err(|m: String| config_err("sweep.parameter", m))?;
            if s.values.is_empty() {
                return Err(config_err("sweep.values", "must not be empty"));
            }
            for (i, &v) in s.values.iter().enumerate() {
                finite(&format!("sweep.values[{i}]"), v)?;
                if parameter == SweepParameter::Gamma && v < 0.0 {
                    return Err(config_err(&format!("sweep.values[{i}]"), "gamma must be >= 0"));
                }
            }
            Sweep { parameter, values: s.values }
        }
        None => Sweep { parameter: SweepParameter::J, values: vec![params.j_coupling] },
    };

    let analysis_kind = match raw.analysis.kind.as_deref() {
        None | Some("pid") => AnalysisKind::Pid,
        Some("memory") => AnalysisKind::Memory,
        Some(other) => return Err(config_err("analysis.kind", format!("unknown `{other}`; expected pid or memory"))),
    };
    let memory = analysis_kind == AnalysisKind::Memory;

    let signal_kind = match raw.signal.kind.as_deref() {
        None if memory => SignalKind::Uniform,
        None | Some("telegraph") => SignalKind::Telegraph,
        Some("uniform") => SignalKind::Uniform,
        Some(other) => {
            return Err(config_err("signal.kind", format!("unknown `{other}`; expected telegraph or uniform")))
        }
    };
    if memory && signal_kind != SignalKind::Uniform {
        return Err(config_err("signal.kind", "memory analysis requires uniform input"));
    }
    let signal = SignalSpec {
        kind: signal_kind,
        switch_rate: match raw.signal.switch_rate {
            Some(v) if v >= 0.0 && v.is_finite() => v,
            Some(v) => return Err(config_err("signal.switch_rate", format!("must be non-negative, got {v}"))),
            None => crate::drive::DEFAULT_SWITCH_RATE,
        },
        update_interval: positive(
            "signal.update_interval",
            raw.signal.update_interval.unwrap_or(if memory { crate::memory::TASK_DT } else { 1.0 }),
        )?,
    };

    let rs = &raw.sampling;
    let sampling = SamplingSpec {
        washout: match rs.washout {
            Some(v) if v >= 0.0 && v.is_finite() => v,
            Some(v) => return Err(config_err("sampling.washout", format!("must be non-negative, got {v}"))),
            None if memory => crate::memory::TASK_WASHOUT,
            None => crate::quantum::evolve::DEFAULT_WASHOUT,
        },
        intervals: match rs.intervals {
            Some(0) => return Err(config_err("sampling.intervals", "must be >= 1")),
            Some(n) => n,
            None if memory => (crate::memory::TASK_DURATION / signal.update_interval).round() as usize,
            None => DEFAULT_INTERVALS,
        },
        realizations: match rs.realizations {
            Some(0) => return Err(config_err("sampling.realizations", "must be >= 1")),
            Some(n) => n,
            None => DEFAULT_REALIZATIONS,
        },
        seed: rs.seed.unwrap_or(0),
        dt: positive("sampling.dt", rs.dt.unwrap_or(crate::quantum::evolve::DEFAULT_DT))?,
    };

    let ra = &raw.analysis;
    let bins = |path: &str, v: Option<usize>, default: usize| -> Result<usize> {
        match v {
            Some(n) if n < 2 => Err(config_err(path, format!("need at least 2 bins, got {n}"))),
            Some(n) => Ok(n),
            None => Ok(default),
        }
    };
    let qmi = ra.qmi.unwrap_or(simulator == Simulator::Quantum && !memory);
    if qmi && simulator != Simulator::Quantum {
        return Err(config_err("analysis.qmi", "requires the quantum simulator"));
    }
    let analysis = AnalysisSpec {
        kind: analysis_kind,
        output_bins: bins("analysis.output_bins", ra.output_bins, DEFAULT_OUTPUT_BINS)?,
        input_bins: bins(
            "analysis.input_bins",
            ra.input_bins,
            if signal_kind == SignalKind::Telegraph { 2 } else { 4 },
        )?,
        pid_tol: positive("analysis.pid_tol", ra.pid_tol.unwrap_or(DEFAULT_PID_TOL))?,
        qmi,
        max_delay: match ra.max_delay {
            Some(0) => return Err(config_err("analysis.max_delay", "must be >= 1")),
            Some(n) => n,
            None => 10,
        },
        train_fraction: match ra.train_fraction {
            Some(v) if v > 0.0 && v < 1.0 => v,
            Some(v) => return Err(config_err("analysis.train_fraction", format!("must lie in (0, 1), got {v}"))),
            None => crate::memory::TRAIN_FRACTION,
        },
        lambda: match ra.lambda {
            Some(v) if v >= 0.0 && v.is_finite() => v,
            Some(v) => return Err(config_err("analysis.lambda", format!("must be non-negative, got {v}"))),
            None => 0.0,
        },
    };

    Ok(ExperimentConfig {
        name: raw.name.unwrap_or_else(|| "experiment".to_string()),
        regime,
        params,
        sweep,
        simulator,
        signal,
        sampling,
        analysis,
    })
}

impl ExperimentConfig {
    /// Canonical TOML with every field explicit; parses back to `self`.
    pub fn to_toml_string(&self) -> String {
        let p = &self.params;
        let raw = RawConfig {
            name: Some(self.name.clone()),
            regime: self.regime.name().to_string(),
            simulator: Some(self.simulator.name().to_string()),
            params: RawParams {
                delta: Some(p.delta),
                j: Some(p.j_coupling),
                u1: Some(p.u1),
                u2: Some(p.u2),
                gamma: Some(p.gamma),
                f: Some(p.f_strength),
                n_max: Some(p.cutoff.n_max()),
            },
            sweep: Some(RawSweep { parameter: self.sweep.parameter.name().to_string(), values: self.sweep.values.clone() }),
            signal: RawSignal {
                kind: Some(self.signal.kind.name().to_string()),
                switch_rate: Some(self.signal.switch_rate),
                update_interval: Some(self.signal.update_interval),
            },
            sampling: RawSampling {
                washout: Some(self.sampling.washout),
                intervals: Some(self.sampling.intervals),
                realizations: Some(self.sampling.realizations),
                seed: Some(self.sampling.seed),
                dt: Some(self.sampling.dt),
            },
            analysis: RawAnalysis {
                kind: Some(self.analysis.kind.name().to_string()),
                output_bins: Some(self.analysis.output_bins),
                input_bins: Some(self.analysis.input_bins),
                pid_tol: Some(self.analysis.pid_tol),
                qmi: Some(self.analysis.qmi),
                max_delay: Some(self.analysis.max_delay),
                train_fraction: Some(self.analysis.train_fraction),
                lambda: Some(self.analysis.lambda),
            },
        };
        toml::to_string(&raw).expect("config serializes")
    }

    /// Hex SHA-256 of the canonical TOML.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(self.to_toml_string().as_bytes()))
    }

    /// Parameters at one sweep value.
    pub fn params_at(&self, value: f64) -> SystemParams<f64> {
        self.sweep.parameter.apply(&self.params, value)
    }

    /// Signal end time: washout plus the sampled intervals.
    pub fn t_end(&self) -> f64 {
        self.sampling.washout + self.sampling.intervals as f64 * self.signal.update_interval
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantum_preset_without_overrides() {
        let c = parse_config("regime = \"quantum\"").unwrap();
        let p = c.params;
        assert_eq!((p.f_strength, p.u1, p.u2, p.delta, p.gamma), (0.2, 4.0, 8.0, -2.0, 0.5));
        assert_eq!(c.simulator, Simulator::Quantum);
        assert_eq!(c.sweep.values, vec![2.0]);
        assert_eq!(c.sampling.intervals, DEFAULT_INTERVALS);
        assert_eq!(c.sampling.realizations, DEFAULT_REALIZATIONS);
        assert!(c.analysis.qmi);
    }

    #[test]
    fn all_presets_match_the_published_sets() {
        for (name, f, u1) in [("meanfield", 2.0, 6.25e-3), ("quantum", 0.2, 4.0), ("cumulant", 0.5, 0.2)] {
            let p = parse_config(&format!("regime = \"{name}\"")).unwrap().params;
            assert_eq!((p.f_strength, p.u1, p.u2, p.delta, p.gamma), (f, u1, 2.0 * u1, -2.0, 0.5), "{name}");
        }
    }

    #[test]
    fn overrides_merge_onto_the_preset() {
        let c = parse_config("regime = \"quantum\"\n[params]\ngamma = 2.0\nn_max = 4\n").unwrap();
        assert_eq!(c.params.gamma, 2.0);
        assert_eq!(c.params.f_strength, 0.2);
        assert_eq!(c.params.cutoff.n_max(), 4);
        let c = parse_config("regime = \"quantum\"\n[params]\nu1 = 1.0\n").unwrap();
        assert_eq!((c.params.u1, c.params.u2), (1.0, 2.0));
    }

    #[test]
    fn negative_realizations_are_a_schema_error() {
        match parse_config("regime = \"quantum\"\n[sampling]\nrealizations = -3\n") {
            Err(Error::Config { path, .. }) => assert_eq!(path, "sampling.realizations"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_config("regime = \"quantum\"\n[sampling]\nrealizations = 0\n"),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn unknown_keys_are_rejected_with_their_path() {
        match parse_config("regime = \"quantum\"\n[signal]\nrate = 2.0\n") {
            Err(Error::Config { path, message }) => {
                assert_eq!(path, "signal.rate");
                assert!(message.contains("rate"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_regime_lists_presets() {
        let err = parse_config("regime = \"classical\"").unwrap_err();
        assert!(matches!(err, Error::UnknownRegime(_)));
        let msg = err.to_string();
        assert!(msg.contains("meanfield") && msg.contains("quantum") && msg.contains("cumulant"));
    }

    #[test]
    fn sweep_values_must_be_finite_and_nonempty() {
        assert!(parse_config("regime = \"quantum\"\n[sweep]\nparameter = \"j\"\nvalues = []\n").is_err());
        assert!(parse_config("regime = \"quantum\"\n[sweep]\nparameter = \"j\"\nvalues = [1.0, nan]\n").is_err());
        assert!(parse_config("regime = \"quantum\"\n[sweep]\nparameter = \"omega\"\nvalues = [1.0]\n").is_err());
    }

    #[test]
    fn memory_defaults() {
        let c = parse_config("regime = \"quantum\"\n[analysis]\nkind = \"memory\"\n").unwrap();
        assert_eq!(c.signal.kind, SignalKind::Uniform);
        assert_eq!(c.signal.update_interval, 0.01);
        assert_eq!(c.sampling.washout, 10.0);
        assert_eq!(c.sampling.intervals, 3000);
        assert!(!c.analysis.qmi);
        assert!(parse_config("regime = \"quantum\"\n[signal]\nkind = \"telegraph\"\n[analysis]\nkind = \"memory\"\n")
            .is_err());
    }

    #[test]
    fn qmi_needs_the_quantum_backend() {
        assert!(parse_config("regime = \"meanfield\"\n[analysis]\nqmi = true\n").is_err());
        assert!(!parse_config("regime = \"meanfield\"").unwrap().analysis.qmi);
    }

    #[test]
    fn canonical_toml_round_trips() {
        let c = parse_config(
            "regime = \"cumulant\"\nsimulator = \"quantum\"\n[params]\nn_max = 3\n[sweep]\nparameter = \"gamma\"\nvalues = [0.5, 1.0]\n[sampling]\nseed = 99\n",
        )
        .unwrap();
        let again = parse_config(&c.to_toml_string()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.hash(), c.hash());
        let other = parse_config("regime = \"cumulant\"").unwrap();
        assert_ne!(other.hash(), c.hash());
    }
}
