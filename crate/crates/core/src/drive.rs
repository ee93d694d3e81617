//! Stochastic input signals `s(t)`.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Default telegraph switching rate.
pub const DEFAULT_SWITCH_RATE: f64 = 1.0;

/// Which stochastic process generated a signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriveKind {
    Telegraph { switch_rate: f64 },
    Uniform,
    /// Hand-built values, e.g. constant drives in tests.
    Explicit,
}

/// Piecewise-constant signal: `s(t) = values[floor(t / update_interval)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveSignal {
    update_interval: f64,
    values: Vec<f64>,
    seed: u64,
    kind: DriveKind,
}

/// Seeded generator for stream `stream` of a sweep rooted at `seed`.
///
/// ChaCha streams are independent, so realization `k` draws the same numbers
/// regardless of which thread runs it.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Signal seed of realization `k` under master seed `master`; 63 bits, so it
/// fits a TOML integer.
pub fn realization_seed(master: u64, k: u64) -> u64 {
    rng_for(master, k).gen::<u64>() >> 1
}

fn interval_count(update_interval: f64, t_end: f64) -> Result<usize> {
    if !(update_interval > 0.0) || !update_interval.is_finite() {
        return Err(Error::param("update_interval", format!("must be positive, got {update_interval}")));
    }
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::param("t_end", format!("must be positive, got {t_end}")));
    }
    let n = (t_end / update_interval - 1e-9).ceil();
    Ok((n as usize).max(1))
}

impl DriveSignal {
    /// Builds a signal from explicit values.
    pub fn from_values(update_interval: f64, values: Vec<f64>) -> Result<Self> {
        if !(update_interval > 0.0) || !update_interval.is_finite() {
            return Err(Error::param("update_interval", format!("must be positive, got {update_interval}")));
        }
        if values.is_empty() {
            return Err(Error::Empty("drive values"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::param("values", format!("non-finite entry {v}")));
        }
        Ok(Self { update_interval, values, seed: 0, kind: DriveKind::Explicit })
    }

    /// Constant signal `s(t) = value` on `[0, t_end)`.
    pub fn constant(value: f64, update_interval: f64, t_end: f64) -> Result<Self> {
        let n = interval_count(update_interval, t_end)?;
        Self::from_values(update_interval, vec![value; n])
    }

    /// Symmetric telegraph process on `{-1, +1}`.
    pub fn telegraph(switch_rate: f64, update_interval: f64, t_end: f64, seed: u64) -> Result<Self> {
        Self::telegraph_with(switch_rate, update_interval, t_end, &mut rng_for(seed, 0), seed)
    }

    /// Telegraph signal drawn from a caller-supplied generator.
    pub fn telegraph_with<R: Rng>(
        switch_rate: f64,
        update_interval: f64,
        t_end: f64,
        rng: &mut R,
        seed: u64,
    ) -> Result<Self> {
        if !(switch_rate >= 0.0) || !switch_rate.is_finite() {
            return Err(Error::param("switch_rate", format!("must be non-negative, got {switch_rate}")));
        }
        let n = interval_count(update_interval, t_end)?;
        let p_flip = -(-switch_rate * update_interval).exp_m1();
        let mut s = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let mut values = Vec::with_capacity(n);
        values.push(s);
        for _ in 1..n {
            if rng.gen::<f64>() < p_flip {
                s = -s;
            }
            values.push(s);
        }
        Ok(Self { update_interval, values, seed, kind: DriveKind::Telegraph { switch_rate } })
    }

    /// I.i.d. uniform values on `[-1, 1]`.
    pub fn uniform_iid(update_interval: f64, t_end: f64, seed: u64) -> Result<Self> {
        Self::uniform_iid_with(update_interval, t_end, &mut rng_for(seed, 0), seed)
    }

    pub fn uniform_iid_with<R: Rng>(update_interval: f64, t_end: f64, rng: &mut R, seed: u64) -> Result<Self> {
        let n = interval_count(update_interval, t_end)?;
        let values = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        Ok(Self { update_interval, values, seed, kind: DriveKind::Uniform })
    }

    pub fn update_interval(&self) -> f64 {
        self.update_interval
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn kind(&self) -> DriveKind {
        self.kind
    }

    /// End of the last interval.
    pub fn t_end(&self) -> f64 {
        self.update_interval * self.values.len() as f64
    }

    /// Piecewise-constant lookup.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        let t_end = self.t_end();
        if !(t >= 0.0) || t >= t_end {
            return Err(Error::TimeOutOfRange { t, t_end });
        }
        let k = ((t / self.update_interval).floor() as usize).min(self.values.len() - 1);
        Ok(self.values[k])
    }

    /// Writes `time,value` rows, one per interval start.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        let mut body = String::from("time,value\n");
        for (k, v) in self.values.iter().enumerate() {
            body.push_str(&format!("{:.12e},{:.12e}\n", k as f64 * self.update_interval, v));
        }
        w.write_all(body.as_bytes()).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }
}
