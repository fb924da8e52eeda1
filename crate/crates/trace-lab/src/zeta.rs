//! Zeta-style trace profiles `g(r) = (1/r) Tr(T^{1+1/r})`.
//!
//! For trace-class powers the full trace is finite for every `r > 0`, and
//! the behavior of `g` as `r` grows probes the same residue the scale
//! profiles approach along towers. Lattice models get a fast compensated
//! `f64` summation (ten million terms per evaluation would be prohibitive in
//! the extended kernels and gain nothing at the accuracy required); their
//! analytic envelope contributes the closed-form tail integral, which is the
//! part that carries the whole limit as `r` grows. Dense models evaluate
//! through the log-domain power trace.

use crate::dd::{Accum, Dd};
use crate::profiles::{Coord, Expr, Profile, ProfileError, ProfileMeta};
use crate::stepfn::{OperatorModel, StepFnError};
use std::sync::Arc;

/// `g(r) = (1/r) Tr(T^{1+1/r})` for `r > 0`.
pub fn eval_g(model: &OperatorModel, r: f64) -> Result<f64, ProfileError> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(ProfileError::OutOfDomain(r));
    }
    let p = 1.0 + 1.0 / r;
    match model.mu.as_lattice() {
        Some((alpha, count)) => {
            let head = lattice_power_sum(alpha, count, p);
            let tail = match &model.envelope {
                Some(env) => {
                    let ap = env.alpha * p;
                    if ap <= 1.0 {
                        return Err(ProfileError::Model(StepFnError::DivergentTail));
                    }
                    let cut = count as f64;
                    (p * env.log_coeff.to_f64() + (1.0 - ap) * cut.ln()).exp() / (ap - 1.0)
                }
                None => 0.0,
            };
            Ok((head + tail) / r)
        }
        None => Ok(model.power_trace(p)?.to_f64() / r),
    }
}

/// The lattice partial sum `sum_{n<=N} n^(-alpha(1+1/r))` alone, without the
/// envelope tail or the `1/r` normalization; `None` for dense models. This
/// is the piece that admits a direct independent cross-check.
pub fn lattice_partial(model: &OperatorModel, r: f64) -> Option<f64> {
    let (alpha, count) = model.mu.as_lattice()?;
    if !(r > 0.0) {
        return None;
    }
    Some(lattice_power_sum(alpha, count, 1.0 + 1.0 / r))
}

fn lattice_power_sum(alpha: f64, count: u64, p: f64) -> f64 {
    let e = -alpha * p;
    let mut sum = Accum::default();
    for n in 1..=count {
        sum.add((n as f64).powf(e));
    }
    sum.total()
}

/// Profile of `g` on the `r` axis. The axis is not a scale coordinate, so
/// the profile rejects reframing.
pub fn zeta_profile(model: &Arc<OperatorModel>) -> Profile {
    Profile::closed_single(
        Coord::R,
        Dd::ZERO,
        Expr::Zeta(Arc::clone(model)),
        None,
        ProfileMeta {
            provenance: format!("zeta({})", model.label),
            error_bound: 0.0,
        },
    )
}
