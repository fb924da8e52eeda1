//! Acceptance battery: ten end-to-end checks that exercise the laboratory at
//! its advertised accuracy, from double-exponential tower evaluation through
//! verdict separation, spectral region bounds, and kernel cross-checks. Each
//! check produces one pass/fail line with the measured numbers; `run_all` is
//! what the `accept` command and the integration suite drive.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dd::{Accum, Dd, LN2};
use crate::gallery::{self, OracleSeries, SpectrumLaw};
use crate::lidskii;
use crate::limits::{self, SweepConfig, VerdictKind};
use crate::logreal::LogReal;
use crate::profiles::{
    beta_profile, dixmier_profile, remainder_d_profile, remainder_mu_profile, truncated_profile,
    Coord,
};
use crate::stepfn::{OperatorModel, StepFunction};
use crate::zeta;

/// Limit of the tower-plateau scale profile along `t = exp(exp(n))`.
pub const TOWER_LIMIT: f64 = 1.5819767068693265;
/// Limit of the same profile along midpoints of consecutive tower scales.
pub const MIDPOINT_LIMIT: f64 = 1.0819767068693265;
/// Number of checks in the battery.
pub const CRITERIA: u32 = 10;

/// Tolerance profile for the battery. The divisor tightens the
/// numerical-agreement tolerances (kernel cross-checks and frozen-value
/// matches); analytic gap bounds stay as derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub strict_divisor: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            strict_divisor: 1.0,
        }
    }
}

/// Outcome of one acceptance check.
#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub index: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl CriterionResult {
    /// One-line rendering used by the command-line driver and the test
    /// harness.
    pub fn line(&self) -> String {
        format!(
            "{} {:>2} {:<24} {:>7.2}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.index,
            self.name,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

/// Short name of a check, `None` outside `1..=CRITERIA`.
pub fn criterion_name(index: u32) -> Option<&'static str> {
    Some(match index {
        1 => "tower-scale-limit",
        2 => "midpoint-scale-limit",
        3 => "periodic-mean-detection",
        4 => "verdict-separation",
        5 => "oscillator-unit-mean",
        6 => "remainder-decay",
        7 => "truncation-gap",
        8 => "spectral-region-bounds",
        9 => "residue-consistency",
        10 => "integral-cross-check",
        _ => return None,
    })
}

/// Runtime budget of a check. Budgets are generous on purpose; they catch
/// complexity regressions, not scheduler noise.
pub fn budget(index: u32) -> Duration {
    let secs = match index {
        1 | 2 | 5 => 1,
        3 | 6 => 10,
        4 | 7 => 30,
        8 | 9 | 10 => 60,
        _ => 0,
    };
    Duration::from_secs(secs)
}

type CheckOutcome = Result<(bool, String), Box<dyn std::error::Error>>;

/// Run one check by index.
pub fn run_criterion(index: u32, thresholds: &Thresholds) -> CriterionResult {
    let start = Instant::now();
    let outcome = match index {
        1 => check_tower_scale_limit(thresholds),
        2 => check_midpoint_scale_limit(thresholds),
        3 => check_periodic_mean_detection(thresholds),
        4 => check_verdict_separation(thresholds),
        5 => check_oscillator_unit_mean(thresholds),
        6 => check_remainder_decay(thresholds),
        7 => check_truncation_gap(thresholds),
        8 => check_spectral_region_bounds(thresholds),
        9 => check_residue_consistency(thresholds),
        10 => check_integral_cross_check(thresholds),
        _ => Ok((false, format!("no check with index {index}"))),
    };
    let (passed, detail) = match outcome {
        Ok(pair) => pair,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult {
        index,
        name: criterion_name(index).unwrap_or("unknown"),
        passed,
        detail,
        elapsed: start.elapsed(),
    }
}

/// Run the whole battery in order.
pub fn run_all(thresholds: &Thresholds) -> Vec<CriterionResult> {
    (1..=CRITERIA)
        .map(|i| run_criterion(i, thresholds))
        .collect()
}

/// Tower scales `t = exp(exp(n))`, `n = 5..=30`: the scale profile of the
/// tower-plateau model must sit within `5 exp(-n)` of its tower limit.
fn check_tower_scale_limit(_thresholds: &Thresholds) -> CheckOutcome {
    let model = gallery::make_t0(32)?;
    let profile = dixmier_profile(&model);
    let mut worst_ratio = 0.0;
    let mut worst_n = 0u32;
    for n in 5..=30u32 {
        let value = profile.eval(n as f64)?;
        let allowance = 5.0 * (-(n as f64)).exp();
        let ratio = (value - TOWER_LIMIT).abs() / allowance;
        if ratio > worst_ratio {
            worst_ratio = ratio;
            worst_n = n;
        }
    }
    Ok((
        worst_ratio <= 1.0,
        format!(
            "worst |S - {TOWER_LIMIT}| is {worst_ratio:.3} of the 5e^-n allowance (n = {worst_n})"
        ),
    ))
}

/// Midpoint scales `t = (exp(exp(n+1)) + exp(exp(n)))/2`: the profile must
/// sit within `10 exp(-n)` of the midpoint limit. The scale itself is formed
/// in extended precision; at `n = 30` the required resolution is far below
/// one ulp of `log t`.
fn check_midpoint_scale_limit(_thresholds: &Thresholds) -> CheckOutcome {
    let model = gallery::make_t0(32)?;
    let profile = dixmier_profile(&model);
    let mut worst_ratio = 0.0;
    let mut worst_n = 0u32;
    for n in 5..=30u32 {
        let en = Dd::from_f64(n as f64).exp();
        let en1 = Dd::from_f64((n + 1) as f64).exp();
        let ell = en1 + (en - en1).log1pexp() - LN2;
        let value = profile.eval_ell(ell)?;
        let allowance = 10.0 * (-(n as f64)).exp();
        let ratio = (value - MIDPOINT_LIMIT).abs() / allowance;
        if ratio > worst_ratio {
            worst_ratio = ratio;
            worst_n = n;
        }
    }
    Ok((
        worst_ratio <= 1.0,
        format!(
            "worst |S - {MIDPOINT_LIMIT}| is {worst_ratio:.3} of the 10e^-n allowance (n = {worst_n})"
        ),
    ))
}

/// The tower sweep of the tower-plateau model must detect unit period in `u`
/// and report mean 1.
fn check_periodic_mean_detection(thresholds: &Thresholds) -> CheckOutcome {
    let model = gallery::make_t0(30)?;
    let verdict = limits::dp_verdict(&model, &SweepConfig::default())?;
    let tol = 1e-6 / thresholds.strict_divisor;
    let value = verdict.value.unwrap_or(f64::NAN);
    let period = verdict.period.unwrap_or(f64::NAN);
    let passed = verdict.kind == VerdictKind::PeriodicMean
        && (period - 1.0).abs() <= 1e-9
        && (value - 1.0).abs() <= tol;
    Ok((
        passed,
        format!(
            "kind {:?}, period {period}, |mean - 1| = {:.3e} (tol {tol:.1e})",
            verdict.kind,
            (value - 1.0).abs()
        ),
    ))
}

/// The plain-scale sweep must call the same model oscillating while the
/// tower sweep pins a single value inside the oscillation band.
fn check_verdict_separation(_thresholds: &Thresholds) -> CheckOutcome {
    let model = gallery::make_t0(30)?;
    let cfg = SweepConfig::default();
    let scale = limits::dixmier_verdict(&model, &cfg)?;
    let tower = limits::dp_verdict(&model, &cfg)?;
    let tower_value = tower.value.unwrap_or(f64::NAN);
    let passed = scale.kind == VerdictKind::Oscillating
        && scale.value.is_none()
        && scale.liminf + 1e-6 < scale.limsup
        && tower.value.is_some()
        && matches!(
            tower.kind,
            VerdictKind::PeriodicMean | VerdictKind::Convergent
        )
        && tower_value >= scale.liminf - 1e-9
        && tower_value <= scale.limsup + 1e-9;
    Ok((
        passed,
        format!(
            "scale sweep {:?} in [{:.6}, {:.6}]; tower sweep {:?} value {tower_value:.9}",
            scale.kind, scale.liminf, scale.limsup, tower.kind
        ),
    ))
}

/// The reference oscillator has period-1 mean exactly 1 in the tower
/// coordinate; the quadrature mean must land within 1e-10.
fn check_oscillator_unit_mean(thresholds: &Thresholds) -> CheckOutcome {
    let x = gallery::make_x_function();
    let report = limits::periodic_mean(&x, 1.0, 30.0, 41.0, 64, 1e-6)?;
    let tol = 1e-10 / thresholds.strict_divisor;
    let dev = (report.mean - 1.0).abs();
    Ok((
        dev <= tol,
        format!("|mean - 1| = {dev:.3e} (tol {tol:.1e})"),
    ))
}

/// Both remainder diagnostics of the tower-plateau model must vanish in the
/// Cesaro sense at rate `c/U` with `c <= 5`, and the log-domain integral
/// kernel must agree with plain-arithmetic closed-form piece sums at shallow
/// scales.
fn check_remainder_decay(thresholds: &Thresholds) -> CheckOutcome {
    let model = gallery::make_t0(31)?;
    let horizons: Vec<f64> = (5..=30).map(|u| u as f64).collect();
    let mu_rep = limits::vanishing_check(&remainder_mu_profile(&model), &horizons, 64, 1e-3, 5.0)?;
    let d_rep = limits::vanishing_check(&remainder_d_profile(&model), &horizons, 64, 1e-3, 5.0)?;

    // Shallow-scale agreement: the first four pieces in ordinary arithmetic.
    // Boundaries s = e, exp(e^1), ..., exp(e^4) and values exp(-1),
    // exp(k - e^k) all stay in comfortable f64 range for u <= 3.
    let mut boundaries = vec![std::f64::consts::E];
    let mut values = vec![(-1.0f64).exp()];
    for k in 1..=4u32 {
        let ek = (k as f64).exp();
        boundaries.push(ek.exp());
        values.push(((k as f64) - ek).exp());
    }
    let tol = 1e-9 / thresholds.strict_divisor;
    let mut worst_rel = 0.0f64;
    for i in 0..=48u32 {
        let u = 3.0 * i as f64 / 48.0;
        let ell = u.exp();
        let t = ell.exp();
        let mut acc = Accum::default();
        let mut s_prev = 0.0;
        for (s_hi, v) in boundaries.iter().zip(&values) {
            let upper = t.min(*s_hi);
            if upper > s_prev {
                acc.add(v * (upper - s_prev));
            }
            s_prev = *s_hi;
            if t <= s_prev {
                break;
            }
        }
        let reference = acc.total();
        let log_side = model.mu.integral(Dd::from_f64(u).exp())?.to_f64();
        worst_rel = worst_rel.max((log_side - reference).abs() / reference);
    }

    let passed = mu_rep.passes && d_rep.passes && worst_rel <= tol;
    Ok((
        passed,
        format!(
            "Cesaro fits c = {:.2} and {:.2} (cap 5); kernel agreement {worst_rel:.2e} (tol {tol:.1e})",
            mu_rep.fitted_c, d_rep.fitted_c
        ),
    ))
}

/// Cutting the partial integral at the threshold boundary `d(1/t)` never
/// decreases the profile by more than `1/log(1+t)`, at any scale `t >= 2`.
/// Models whose boundary stays below the scale (`d(1/t) <= t`, which every
/// lattice model in the catalog satisfies) obey the two-sided form at every
/// scale. Tower models overshoot inside the short windows at each piece end
/// where the running value still exceeds the threshold; there only the
/// one-sided form holds pointwise (the excess is exactly what the averaging
/// step absorbs), and the two-sided form is checked at the tower scales
/// themselves, where the boundary and the scale coincide.
fn check_truncation_gap(_thresholds: &Thresholds) -> CheckOutcome {
    struct Entry {
        model: Arc<OperatorModel>,
        hi: f64,
        two_sided: bool,
    }
    let roster = vec![
        Entry {
            model: gallery::make_t0(30)?,
            hi: 29.0,
            two_sided: false,
        },
        Entry {
            model: gallery::make_harmonic(1_000_000)?,
            hi: 15.0,
            two_sided: true,
        },
        Entry {
            model: gallery::make_power(2.0, 100_000)?,
            hi: 15.0,
            two_sided: true,
        },
        Entry {
            model: gallery::make_plateau(&[1.0])?,
            hi: 15.0,
            two_sided: true,
        },
        Entry {
            model: gallery::make_plateau(&[1.0, 0.5, 0.3, 0.25, 0.2, 0.1])?,
            hi: 15.0,
            two_sided: true,
        },
    ];
    let lo = -0.35f64;
    let bound_at = |u: f64| {
        let ell = u.exp();
        1.0 / (ell + (-ell).exp().ln_1p())
    };
    let mut violations = 0u32;
    let mut worst_forward = 0.0f64;
    let mut tower_overshoot = 0.0f64;
    for entry in &roster {
        let dix = dixmier_profile(&entry.model);
        let trunc = truncated_profile(&entry.model);
        for i in 0..200u32 {
            let u = lo + (entry.hi - lo) * i as f64 / 199.0;
            let gap = dix.eval(u)? - trunc.eval(u)?;
            let bound = bound_at(u);
            let fuzz = bound * 1e-9 + 1e-15;
            if gap > bound + fuzz {
                violations += 1;
            }
            worst_forward = worst_forward.max(gap / bound);
            if entry.two_sided {
                if -gap > bound + fuzz {
                    violations += 1;
                }
            } else {
                tower_overshoot = tower_overshoot.max(-gap / bound);
            }
        }
        if !entry.two_sided {
            for k in 1..=29u32 {
                let u = k as f64;
                let gap = (dix.eval(u)? - trunc.eval(u)?).abs();
                let bound = bound_at(u);
                if gap > bound * (1.0 + 1e-9) + 1e-15 {
                    violations += 1;
                }
            }
        }
    }
    Ok((
        violations == 0,
        format!(
            "{} models x 200 scales, {violations} violations; worst gap {worst_forward:.3} of bound; tower overshoot {tower_overshoot:.1} bounds inside piece-end windows",
            roster.len()
        ),
    ))
}

/// Region-sum bounds for random normal spectra: circle-versus-rectangle
/// within `(2/t) d(1/t)` and real-part-only within `(1/t) d_im(1/t)`, at 200
/// thresholds per spectrum, zero violations allowed.
fn check_spectral_region_bounds(_thresholds: &Thresholds) -> CheckOutcome {
    let mut violations = 0u64;
    let mut checked = 0u64;
    for seed in 0..50u64 {
        let law = match seed % 3 {
            0 => SpectrumLaw::Disc,
            1 => SpectrumLaw::Annulus,
            _ => SpectrumLaw::RealLine,
        };
        let n = 100 + ((seed * 199) % 9_901) as u32;
        let model = gallery::make_random_spectrum(seed, n, law)?;
        let spectrum = model.spectrum.as_ref().ok_or("spectrum missing")?;
        for i in 0..200u32 {
            let ell = 0.5 + 11.5 * i as f64 / 199.0;
            checked += 1;
            if !lidskii::region_bounds_hold(spectrum, ell, 1e-9) {
                violations += 1;
            }
        }
    }
    Ok((
        violations == 0,
        format!("50 spectra, {checked} threshold checks, {violations} violations"),
    ))
}

/// Zeta-style traces: the lattice part must match the direct-summation
/// oracle to 1e-10 relative, the full trace must approach its residue at
/// rate `2/r`, and the counting profile of the tower-plateau model must be
/// asymptotically periodic with unit mean.
fn check_residue_consistency(thresholds: &Thresholds) -> CheckOutcome {
    let harmonic = gallery::make_harmonic(10_000_000)?;
    let agree_tol = 1e-10 / thresholds.strict_divisor;
    let mut worst_rel = 0.0f64;
    for r in [100.0, 1_000.0, 10_000.0] {
        let lattice = zeta::lattice_partial(&harmonic, r).ok_or("lattice part missing")?;
        let oracle = gallery::oracle_partial_sum(OracleSeries::Zeta(1.0 + 1.0 / r), 10_000_000);
        worst_rel = worst_rel.max((lattice - oracle).abs() / oracle);
    }
    let g = zeta::eval_g(&harmonic, 10_000.0)?;
    let trend_gap = (g - 1.0).abs();

    let beta = beta_profile(&gallery::make_t0(30)?).reframe(Coord::U)?;
    let mean = limits::periodic_mean(&beta, 1.0, 5.0, 29.0, 64, 1e-6)?;
    let mean_dev = (mean.mean - 1.0).abs();

    let passed = worst_rel <= agree_tol && trend_gap <= 2e-4 && mean_dev <= 1e-3;
    Ok((
        passed,
        format!(
            "lattice agreement {worst_rel:.2e} (tol {agree_tol:.1e}); |g(1e4) - 1| = {trend_gap:.2e}; counting mean off by {mean_dev:.2e}"
        ),
    ))
}

/// One hundred thousand random step functions: the log-domain prefix
/// integral must match a plain-arithmetic Riemann sum to 1e-9 relative.
fn check_integral_cross_check(thresholds: &Thresholds) -> CheckOutcome {
    let tol = 1e-9 / thresholds.strict_divisor;
    let cap = 1e7f64.ln();
    let mut rng = ChaCha8Rng::seed_from_u64(0x51e9);
    let mut worst_rel = 0.0f64;
    for _ in 0..100_000u32 {
        let count = rng.random_range(1..=12usize);
        let mut knots: Vec<f64> = (0..count).map(|_| rng.random_range(-3.0..cap)).collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        let mut level = rng.random_range(0.2..=1.5f64);
        let mut values = Vec::with_capacity(knots.len());
        for _ in 0..knots.len() {
            values.push(level);
            level *= rng.random_range(0.1..0.95);
        }
        let mu = StepFunction::from_pieces(
            knots.iter().map(|&l| Dd::from_f64(l)).collect(),
            values.iter().map(|&v| LogReal::from_f64(v)).collect(),
            LogReal::ZERO,
        )?;
        let probe = rng.random_range(-3.0..cap);
        let log_side = mu.integral(Dd::from_f64(probe))?.to_f64();

        let t = probe.exp();
        let mut acc = Accum::default();
        let mut s_prev = 0.0;
        for (l, v) in knots.iter().zip(&values) {
            let upper = t.min(l.exp());
            if upper > s_prev {
                acc.add(v * (upper - s_prev));
            }
            s_prev = l.exp();
            if t <= s_prev {
                break;
            }
        }
        let reference = acc.total();
        worst_rel = worst_rel.max((log_side - reference).abs() / reference);
    }
    Ok((
        worst_rel <= tol,
        format!("100000 random prefix integrals, worst relative gap {worst_rel:.2e} (tol {tol:.1e})"),
    ))
}
