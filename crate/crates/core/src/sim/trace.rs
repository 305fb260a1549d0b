use std::io::Write;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Uniformly sampled multichannel time series.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace<T> {
    t0: T,
    dt: T,
    names: Vec<String>,
    data: Vec<Vec<T>>,
}

impl<T: Scalar> Trace<T> {
    pub fn new(t0: T, dt: T, names: Vec<String>, data: Vec<Vec<T>>) -> Result<Self> {
        if !(dt > T::zero()) {
            return Err(Error::invalid("dt", "must be > 0"));
        }
        if names.len() != data.len() {
            return Err(Error::LengthMismatch { expected: names.len(), found: data.len() });
        }
        let n = data.first().map_or(0, Vec::len);
        if n == 0 {
            return Err(Error::TooFewSamples { needed: 1, found: 0 });
        }
        if let Some(bad) = data.iter().find(|c| c.len() != n) {
            return Err(Error::LengthMismatch { expected: n, found: bad.len() });
        }
        Ok(Trace { t0, dt, names, data })
    }

    /// Single-channel convenience constructor.
    pub fn single(t0: T, dt: T, name: &str, samples: Vec<T>) -> Result<Self> {
        Self::new(t0, dt, vec![name.to_string()], vec![samples])
    }

    pub fn t0(&self) -> T {
        self.t0
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.data[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, k: usize) -> T {
        self.t0 + self.dt * T::lit(k as f64)
    }

    pub fn times(&self) -> Vec<T> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn channels(&self) -> &[Vec<T>] {
        &self.data
    }

    pub fn channel(&self, name: &str) -> Option<&[T]> {
        self.names.iter().position(|n| n == name).map(|k| self.data[k].as_slice())
    }

    pub fn require(&self, name: &str) -> Result<&[T]> {
        self.channel(name)
            .ok_or_else(|| Error::invalid("channel", format!("no channel named `{name}`")))
    }

    /// State vector at sample `k` across all channels.
    pub fn row(&self, k: usize) -> Vec<T> {
        self.data.iter().map(|c| c[k]).collect()
    }

    pub fn last_row(&self) -> Vec<T> {
        self.row(self.len() - 1)
    }

    pub fn rename(mut self, names: &[&str]) -> Result<Self> {
        if names.len() != self.names.len() {
            return Err(Error::LengthMismatch { expected: self.names.len(), found: names.len() });
        }
        self.names = names.iter().map(|s| s.to_string()).collect();
        Ok(self)
    }

    pub fn push_channel(&mut self, name: &str, samples: Vec<T>) -> Result<()> {
        if samples.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), found: samples.len() });
        }
        self.names.push(name.to_string());
        self.data.push(samples);
        Ok(())
    }

    /// Keeps only the named channels, in the given order.
    pub fn select(&self, names: &[&str]) -> Result<Self> {
        let data = names.iter().map(|n| self.require(n).map(<[T]>::to_vec)).collect::<Result<_>>()?;
        Self::new(self.t0, self.dt, names.iter().map(|s| s.to_string()).collect(), data)
    }

    /// Writes `t,<channel>,...` CSV, one row per sample.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "t")?;
        for n in &self.names {
            write!(out, ",{n}")?;
        }
        writeln!(out)?;
        for k in 0..self.len() {
            write!(out, "{}", self.time(k))?;
            for c in &self.data {
                write!(out, ",{}", c[k])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}
