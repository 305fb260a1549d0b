use crate::devices::{hh_model, HhParams};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sim::{integrate_with, DriveSignal, IntegratorSpec, Trace};

/// Drives both channel potentials with `v_drive`. Channels: `w1, w2, w3, i_k, i_na`.
/// Gates are clamped to `[0, 1]`.
pub fn hh_simulate<T: Scalar>(
    p: &HhParams<T>,
    v_drive: &DriveSignal<T>,
    w0: [T; 3],
    spec: &IntegratorSpec<T>,
) -> Result<Trace<T>> {
    p.validate()?;
    v_drive.validate()?;
    if w0.iter().any(|&w| !(w >= T::zero() && w <= T::one())) {
        return Err(Error::invalid("w0", "gates must start in [0, 1]"));
    }
    let out = integrate_with(
        |t, x: &[T], dx: &mut [T]| {
            let v = v_drive.eval(t);
            dx.copy_from_slice(&hh_model([x[0], x[1], x[2]], v, v, p).dw);
        },
        &w0,
        spec,
        |_, x: &mut [T]| x.iter_mut().for_each(|w| *w = w.clamp(T::zero(), T::one())),
        |_| false,
    )?;
    let mut tr = out.trace.rename(&["w1", "w2", "w3"])?;
    let (mut ik, mut ina) = (Vec::with_capacity(tr.len()), Vec::with_capacity(tr.len()));
    for k in 0..tr.len() {
        let v = v_drive.eval(tr.time(k));
        let r = tr.row(k);
        let o = hh_model([r[0], r[1], r[2]], v, v, p);
        ik.push(o.i_k);
        ina.push(o.i_na);
    }
    tr.push_channel("i_k", ik)?;
    tr.push_channel("i_na", ina)?;
    Ok(tr)
}
