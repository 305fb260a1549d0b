use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalKind {
    Dc,
    Sine,
    Square,
    PulseTrain,
}

/// Declarative periodic waveform.
///
/// * `Dc`: `amplitude + offset`.
/// * `Sine`: `offset + amplitude * sin(2 pi f t + phase)`.
/// * `Square`: `offset +/- amplitude`, high for the first `duty` fraction of each period.
/// * `PulseTrain`: `offset + amplitude` for the first `duty` fraction of each period, `offset` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct DriveSignal<T> {
    pub kind: SignalKind,
    pub amplitude: T,
    #[serde(default)]
    pub frequency: T,
    #[serde(default)]
    pub phase: T,
    #[serde(default = "half")]
    pub duty: T,
    #[serde(default)]
    pub offset: T,
}

fn half<T: Scalar>() -> T {
    T::lit(0.5)
}

impl<T: Scalar> DriveSignal<T> {
    pub fn dc(amplitude: T) -> Self {
        Self::raw(SignalKind::Dc, amplitude, T::zero(), half())
    }

    pub fn sine(amplitude: T, frequency: T) -> Self {
        Self::raw(SignalKind::Sine, amplitude, frequency, half())
    }

    pub fn square(amplitude: T, frequency: T, duty: T) -> Self {
        Self::raw(SignalKind::Square, amplitude, frequency, duty)
    }

    pub fn pulse_train(amplitude: T, frequency: T, duty: T) -> Self {
        Self::raw(SignalKind::PulseTrain, amplitude, frequency, duty)
    }

    pub fn zero() -> Self {
        Self::dc(T::zero())
    }

    fn raw(kind: SignalKind, amplitude: T, frequency: T, duty: T) -> Self {
        DriveSignal { kind, amplitude, frequency, phase: T::zero(), duty, offset: T::zero() }
    }

    pub fn with_phase(mut self, phase: T) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_offset(mut self, offset: T) -> Self {
        self.offset = offset;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("amplitude", self.amplitude),
            ("frequency", self.frequency),
            ("phase", self.phase),
            ("duty", self.duty),
            ("offset", self.offset),
        ] {
            if !v.is_finite_val() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        if self.frequency < T::zero() {
            return Err(Error::invalid("frequency", "must be >= 0"));
        }
        if self.duty < T::zero() || self.duty > T::one() {
            return Err(Error::invalid("duty", "must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Fraction of the current period elapsed at `t`, in `[0, 1)`.
    fn cycle_fraction(&self, t: T) -> T {
        let x = self.frequency * t + self.phase / T::two_pi();
        x - x.floor()
    }

    pub fn eval(&self, t: T) -> T {
        let a = self.amplitude;
        let body = match self.kind {
            SignalKind::Dc => a,
            SignalKind::Sine => a * (T::two_pi() * self.frequency * t + self.phase).sin(),
            SignalKind::Square => {
                if self.cycle_fraction(t) < self.duty {
                    a
                } else {
                    -a
                }
            }
            SignalKind::PulseTrain => {
                if self.cycle_fraction(t) < self.duty {
                    a
                } else {
                    T::zero()
                }
            }
        };
        body + self.offset
    }
}

/// Piecewise drive: each segment plays its signal for `duration`, with time
/// measured from the segment start. The last segment continues past its end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Schedule<T> {
    pub segments: Vec<Segment<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Segment<T> {
    pub duration: T,
    pub signal: DriveSignal<T>,
}

impl<T: Scalar> Schedule<T> {
    pub fn new(segments: Vec<Segment<T>>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::invalid("segments", "schedule needs at least one segment"));
        }
        for s in &segments {
            s.signal.validate()?;
            if !(s.duration > T::zero()) {
                return Err(Error::invalid("duration", "segment duration must be > 0"));
            }
        }
        Ok(Schedule { segments })
    }

    pub fn constant(signal: DriveSignal<T>, duration: T) -> Self {
        Schedule { segments: vec![Segment { duration, signal }] }
    }

    pub fn total_duration(&self) -> T {
        self.segments.iter().fold(T::zero(), |acc, s| acc + s.duration)
    }

    /// Start times of every segment after the first.
    pub fn switch_times(&self) -> Vec<T> {
        let mut acc = T::zero();
        let mut out = Vec::new();
        for s in &self.segments[..self.segments.len().saturating_sub(1)] {
            acc += s.duration;
            out.push(acc);
        }
        out
    }

    pub fn eval(&self, t: T) -> T {
        let mut start = T::zero();
        let last = self.segments.len() - 1;
        for (k, s) in self.segments.iter().enumerate() {
            if k == last || t < start + s.duration {
                return s.signal.eval(t - start);
            }
            start += s.duration;
        }
        unreachable!("schedule is non-empty")
    }
}
