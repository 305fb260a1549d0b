use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sim::trace::Trace;

/// Enclosed area of a periodic I-V curve (volt-amperes).
///
/// The closed curve is cut at every zero crossing of `v` (crossing points are
/// linearly interpolated). Each piece runs from one crossing to the next and is
/// closed along the `v = 0` axis; the result is the sum of the unsigned
/// shoelace areas of the pieces. This counts both lobes of a pinched
/// figure-eight instead of letting them cancel, and the cut points do not
/// depend on where the sample window starts.
pub fn loop_area<T: Scalar>(v: &[T], i: &[T]) -> Result<T> {
    if v.len() != i.len() {
        return Err(Error::LengthMismatch { expected: v.len(), found: i.len() });
    }
    let n = v.len();
    if n < 3 {
        return Ok(T::zero());
    }
    let half = T::lit(0.5);
    let pos = |x: T| x >= T::zero();

    // (index after which the crossing lies, crossing point)
    let mut cuts: Vec<(usize, (T, T))> = Vec::new();
    for k in 0..n {
        let j = (k + 1) % n;
        if pos(v[k]) != pos(v[j]) {
            let f = v[k] / (v[k] - v[j]);
            cuts.push((k, (T::zero(), i[k] + f * (i[j] - i[k]))));
        }
    }

    let shoelace = |pts: &[(T, T)]| -> T {
        let m = pts.len();
        let mut s = T::zero();
        for a in 0..m {
            let (x0, y0) = pts[a];
            let (x1, y1) = pts[(a + 1) % m];
            s += x0 * y1 - x1 * y0;
        }
        (s * half).abs()
    };

    if cuts.len() < 2 {
        let pts: Vec<_> = v.iter().copied().zip(i.iter().copied()).collect();
        return Ok(shoelace(&pts));
    }

    let mut total = T::zero();
    let mut pts = Vec::with_capacity(n + 2);
    for c in 0..cuts.len() {
        let (ka, pa) = cuts[c];
        let (kb, pb) = cuts[(c + 1) % cuts.len()];
        pts.clear();
        pts.push(pa);
        let mut k = (ka + 1) % n;
        loop {
            pts.push((v[k], i[k]));
            if k == kb {
                break;
            }
            k = (k + 1) % n;
        }
        pts.push(pb);
        total += shoelace(&pts);
    }
    Ok(total)
}

/// Simulation-cost metrics of a trajectory: the largest second derivative
/// norm `max_k |y''(t_k)|` (central differences over all channels) and the
/// Euclidean distance of the final sample from `reference`.
pub fn simulation_cost_metrics<T: Scalar>(tr: &Trace<T>, reference: &[T]) -> Result<(T, T)> {
    let n = tr.len();
    if n < 3 {
        return Err(Error::TooFewSamples { needed: 3, found: n });
    }
    let ch = tr.channels();
    if reference.len() != ch.len() {
        return Err(Error::LengthMismatch { expected: ch.len(), found: reference.len() });
    }
    let dt2 = tr.dt() * tr.dt();
    let two = T::lit(2.0);
    let mut r = T::zero();
    for k in 1..n - 1 {
        let s = ch.iter().fold(T::zero(), |acc, c| {
            let d = (c[k + 1] - two * c[k] + c[k - 1]) / dt2;
            acc + d * d
        });
        r = r.max(s.sqrt());
    }
    let eps = ch
        .iter()
        .zip(reference)
        .fold(T::zero(), |acc, (c, &y)| {
            let d = c[n - 1] - y;
            acc + d * d
        })
        .sqrt();
    Ok((r, eps))
}
