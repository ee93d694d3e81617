//! Named experiments, one per published figure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use super::config::{parse_config, AnalysisKind, ExperimentConfig};
use super::output::{emit_csv, format_value};
use super::sweep::run_sweep;
use crate::error::{Error, Result};
use crate::params::{Regime, SystemParams};
use crate::response::{effective_potential, pole_scan, write_pole_scan_csv};

pub const FIGURES: [&str; 11] =
    ["fig2_left", "fig2_right", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8a", "fig8b", "fig9", "figD1"];

/// Coupling grid of the information sweeps.
const J_GRID: &str = "[0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0]";

#[derive(Debug, Clone)]
pub enum FigureJob {
    Sweep { label: &'static str, config: Box<ExperimentConfig> },
    Poles { params: SystemParams<f64>, couplings: Vec<f64> },
    /// `V` on the `Im α = 0` plane, one grid per coupling.
    Potential { params: SystemParams<f64>, couplings: Vec<f64>, half_width: f64, points: usize },
}

#[derive(Debug, Clone)]
pub struct Figure {
    pub name: &'static str,
    pub description: &'static str,
    pub jobs: Vec<FigureJob>,
}

/// Overrides applied to every sweep of a figure.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Budget {
    /// Signal intervals per realization; information sweeps only.
    pub intervals: Option<usize>,
    pub realizations: Option<usize>,
    pub seed: Option<u64>,
}

impl Budget {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let (Some(n), AnalysisKind::Pid) = (self.intervals, cfg.analysis.kind) {
            cfg.sampling.intervals = n;
        }
        if let Some(n) = self.realizations {
            cfg.sampling.realizations = n;
        }
        if let Some(s) = self.seed {
            cfg.sampling.seed = s;
        }
    }
}

fn sweep(label: &'static str, name: &str, body: &str) -> FigureJob {
    let text = format!("name = \"{name}\"\n{body}");
    let config = parse_config(&text).unwrap_or_else(|e| panic!("built-in manifest {name}: {e}"));
    FigureJob::Sweep { label, config: Box::new(config) }
}

fn j_sweep(label: &'static str, name: &str, regime: &str, params: &str, extra: &str) -> FigureJob {
    let cutoff = if regime == "quantum" { "n_max = 4\n" } else { "" };
    sweep(
        label,
        name,
        &format!(
            "regime = \"{regime}\"\n[params]\n{cutoff}{params}[sweep]\nparameter = \"j\"\nvalues = {J_GRID}\n{extra}"
        ),
    )
}

fn memory_sweep(label: &'static str, name: &str, parameter: &str, values: &str, j: f64, max_delay: usize, reals: usize) -> FigureJob {
    sweep(
        label,
        name,
        &format!(
            "regime = \"quantum\"\n[params]\nn_max = 4\nj = {j:?}\n[sweep]\nparameter = \"{parameter}\"\nvalues = {values}\n\
             [sampling]\nrealizations = {reals}\n[analysis]\nkind = \"memory\"\nmax_delay = {max_delay}\n"
        ),
    )
}

/// The manifest for `name`.
pub fn figure(name: &str) -> Result<Figure> {
    let fig = match name {
        "fig2_left" => Figure {
            name: "fig2_left",
            description: "MI triple vs J, mean-field preset",
            jobs: vec![j_sweep("meanfield", name, "meanfield", "", "")],
        },
        "fig2_right" => Figure {
            name: "fig2_right",
            description: "MI triple vs J, quantum preset",
            jobs: vec![j_sweep("quantum", name, "quantum", "", "")],
        },
        "fig3" => Figure {
            name: "fig3",
            description: "normalized synergy and redundancy vs J in the three descriptions",
            jobs: vec![
                j_sweep("quantum", name, "quantum", "", ""),
                j_sweep("cumulant", name, "cumulant", "", ""),
                j_sweep("meanfield", name, "meanfield", "", ""),
            ],
        },
        "fig4" => Figure {
            name: "fig4",
            description: "effective potential on Im(alpha) = 0 below, at and above J = |Delta|",
            jobs: vec![FigureJob::Potential {
                params: SystemParams::preset(Regime::Quantum),
                couplings: vec![1.0, 2.0, 3.0],
                half_width: 1.0,
                points: 41,
            }],
        },
        "fig5" => Figure {
            name: "fig5",
            description: "retarded Green's function poles vs J",
            jobs: vec![FigureJob::Poles {
                params: SystemParams::preset(Regime::Quantum),
                couplings: (0..=40).map(|k| k as f64 * 0.1).collect(),
            }],
        },
        "fig6" => Figure {
            name: "fig6",
            description: "PID and MI vs J with uniform i.i.d. input",
            jobs: vec![j_sweep("quantum", name, "quantum", "", "[signal]\nkind = \"uniform\"\n")],
        },
        "fig7" => Figure {
            name: "fig7",
            description: "QMI, MI, synergy and redundancy vs J for several gamma",
            jobs: ["0.5", "1.0", "2.0", "4.0"]
                .into_iter()
                .zip(["gamma0.5", "gamma1", "gamma2", "gamma4"])
                .map(|(g, label)| j_sweep(label, name, "quantum", &format!("gamma = {g}\n"), ""))
                .collect(),
        },
        "fig8a" => Figure {
            name: "fig8a",
            description: "MC(n), n = 1..10, for J in [0, 2]",
            jobs: vec![memory_sweep("quantum", name, "j", "[0.0, 0.5, 1.0, 1.5, 1.8, 2.0]", 2.0, 10, 50)],
        },
        "fig8b" => Figure {
            name: "fig8b",
            description: "MC(n), n = 1..20, for J in [1.96, 2]",
            jobs: vec![memory_sweep("quantum", name, "j", "[1.96, 1.97, 1.98, 1.99, 2.0]", 2.0, 20, 50)],
        },
        "fig9" => Figure {
            name: "fig9",
            description: "MC(n) at J = 2 for several gamma, with fitted decay rates",
            jobs: vec![memory_sweep("quantum", name, "gamma", "[0.5, 1.0, 2.0]", 2.0, 20, 100)],
        },
        "figD1" => Figure {
            name: "figD1",
            description: "MI triple vs J, cumulant preset",
            jobs: vec![j_sweep("cumulant", name, "cumulant", "", "")],
        },
        _ => return Err(Error::UnknownFigure(name.to_string())),
    };
    Ok(fig)
}

/// Potential grid as CSV `J,x1,x2,V`.
pub fn potential_csv(params: &SystemParams<f64>, couplings: &[f64], half_width: f64, points: usize) -> String {
    let mut out = String::from("J,x1,x2,V\n");
    let step = 2.0 * half_width / (points.max(2) - 1) as f64;
    for &j in couplings {
        let p = params.with_j(j);
        for a in 0..points {
            for b in 0..points {
                let (x1, x2) = (-half_width + a as f64 * step, -half_width + b as f64 * step);
                let v = effective_potential(Complex64::new(x1, 0.0), Complex64::new(x2, 0.0), &p);
                let _ = writeln!(out, "{},{},{},{}", format_value(j), format_value(x1), format_value(x2), format_value(v));
            }
        }
    }
    out
}

/// Runs every job of `fig`, writing `<out_dir>/<fig>[_<label>].csv`.
pub fn run_figure(fig: &Figure, out_dir: &Path, budget: &Budget) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    for job in &fig.jobs {
        match job {
            FigureJob::Sweep { label, config } => {
                let mut cfg = (**config).clone();
                budget.apply(&mut cfg);
                let path = if fig.jobs.len() == 1 {
                    out_dir.join(format!("{}.csv", fig.name))
                } else {
                    out_dir.join(format!("{}_{label}.csv", fig.name))
                };
                log::info!("{}: {} points x {} realizations", path.display(), cfg.sweep.values.len(), cfg.sampling.realizations);
                emit_csv(&run_sweep(&cfg), &path)?;
                written.push(path);
            }
            FigureJob::Poles { params, couplings } => {
                let path = out_dir.join(format!("{}.csv", fig.name));
                write_pole_scan_csv(&pole_scan(params, couplings)?, &path)?;
                written.push(path);
            }
            FigureJob::Potential { params, couplings, half_width, points } => {
                let path = out_dir.join(format!("{}.csv", fig.name));
                std::fs::write(&path, potential_csv(params, couplings, *half_width, *points))
                    .map_err(|e| Error::io(&path, e))?;
                written.push(path);
            }
        }
    }
    Ok(written)
}
