use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kerr_reservoir::expctl::{self, Budget};
use kerr_reservoir::info::{self, DiscreteJoint, PidOptions};
use kerr_reservoir::response::{hessian_at_origin, retarded_poles_analytic, retarded_poles_numeric};
use kerr_reservoir::{Error, SystemParams};

#[derive(Parser)]
#[command(name = "kerr-res", version, about = "Coupled Kerr oscillator reservoir: sweeps, PID and pole analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a TOML config.
    Run {
        config: PathBuf,
        /// Output CSV; defaults to `<name>.csv` in the current directory.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Regenerate the data behind a named figure; lists the names when omitted.
    Figure {
        name: Option<String>,
        #[arg(long, default_value = "results")]
        out_dir: PathBuf,
        /// Signal intervals per realization (information sweeps).
        #[arg(long)]
        intervals: Option<usize>,
        #[arg(long)]
        realizations: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Decompose a joint distribution given as CSV `s,x1,x2,prob`.
    Pid {
        joint: PathBuf,
        /// Duality-gap target in bits.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Linear-response poles and Hessian spectrum at the origin.
    Poles {
        #[arg(long, allow_hyphen_values = true)]
        delta: f64,
        #[arg(long)]
        j: f64,
        #[arg(long)]
        gamma: f64,
    },
    /// Check the BROJA solver against the reference logic gates.
    ValidateGates,
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Run { config, out } => {
            let text = std::fs::read_to_string(&config).map_err(|e| Error::Io { path: config.clone(), source: e })?;
            let cfg = expctl::parse_config(&text)?;
            let out = out.unwrap_or_else(|| PathBuf::from(format!("{}.csv", cfg.name)));
            let records = expctl::run_sweep(&cfg);
            expctl::emit_csv(&records, &out)?;
            let failed = records.iter().filter(|r| matches!(r.outcome, expctl::Outcome::Failed(_))).count();
            println!("wrote {} ({} points, {} failed)", out.display(), records.len(), failed);
            Ok(true)
        }
        Command::Figure { name: None, .. } => {
            for name in expctl::FIGURES {
                println!("{name:<11} {}", expctl::figure(name)?.description);
            }
            Ok(true)
        }
        Command::Figure { name: Some(name), out_dir, intervals, realizations, seed } => {
            let fig = expctl::figure(&name)?;
            let budget = Budget { intervals, realizations, seed };
            for path in expctl::run_figure(&fig, &out_dir, &budget)? {
                println!("wrote {}", path.display());
            }
            Ok(true)
        }
        Command::Pid { joint, tol } => {
            let p = DiscreteJoint::read_csv(&joint)?;
            let sol = info::broja_optimize(&p, &PidOptions { tol, ..PidOptions::default() })?;
            let r = sol.result;
            println!("I(s:(x1,x2)) = {:.9}", r.mi_joint);
            println!("I(s:x1)      = {:.9}", r.mi_1);
            println!("I(s:x2)      = {:.9}", r.mi_2);
            println!("Rdn          = {:.9}", r.redundancy);
            println!("Syn          = {:.9}", r.synergy);
            println!("Unq1         = {:.9}", r.unique1);
            println!("Unq2         = {:.9}", r.unique2);
            println!("Syn_norm     = {:.9}", r.syn_norm);
            println!("Rdn_norm     = {:.9}", r.rdn_norm);
            println!("CoI          = {:.9}", info::co_information(&p));
            println!("gap          = {:.3e}", sol.gap);
            Ok(true)
        }
        Command::Poles { delta, j, gamma } => {
            let mut p = SystemParams::zero();
            p.delta = delta;
            p.j_coupling = j;
            p.gamma = gamma;
            let analytic = retarded_poles_analytic(&p)?;
            let numeric = retarded_poles_numeric(&p)?;
            let fmt = |z: num_complex::Complex64| format!("{:+.12} {:+.12}i", z.re, z.im);
            for (label, set) in [("analytic", &analytic), ("numeric", &numeric)] {
                println!("{label}:");
                println!("  slow  {}   {}", fmt(set.slow[0]), fmt(set.slow[1]));
                println!("  fast  {}   {}", fmt(set.fast[0]), fmt(set.fast[1]));
            }
            println!("max |numeric - analytic| = {:.3e}", numeric.max_distance(&analytic));
            let h = hessian_at_origin(&p);
            println!("Hessian eigenvalues: {:?}", h.eigenvalues);
            Ok(true)
        }
        Command::ValidateGates => {
            let mut ok = true;
            for c in info::validate_gates()? {
                let status = if c.passed() { "PASS" } else { "FAIL" };
                ok &= c.passed();
                let [rdn, syn, u1, u2] = c.atoms();
                println!(
                    "{status} {:<6} Rdn {rdn:.6} Syn {syn:.6} Unq1 {u1:.6} Unq2 {u2:.6}  max error {:.1e} (tol {:.0e})",
                    c.name,
                    c.max_error(),
                    c.tol
                );
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = expctl::init_thread_pool() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
