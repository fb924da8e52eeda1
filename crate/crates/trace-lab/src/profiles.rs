//! Scale profiles: scalar functions of the probe scale built from operator
//! models, evaluated in log coordinates.
//!
//! Every profile has one canonical evaluation variable `l = log t`, where `t`
//! is the natural scale argument of the functional. The `coord` tag only
//! selects the display and sampling coordinate:
//!
//! * `t`: the raw scale (useful for small ranges),
//! * `v = log t` (the canonical variable itself),
//! * `u = log log t` (tower coordinate; exponentiation acts by translation),
//! * `r`: the inverse-temperature axis of zeta-style profiles, which have no
//!   `t`-scale and reject reframing.
//!
//! Closed-form profiles are piecewise expressions in `l`; they evaluate
//! through the log-domain kernels and are exact to working precision at any
//! depth, including `t = exp(exp(40))`. Sampled profiles hold values on a
//! uniform grid in their own coordinate and interpolate linearly.

use crate::dd::{Accum, Dd};
use crate::lidskii::{ComplexPart, Region};
use crate::logreal::{LogReal, LogRealError};
use crate::stepfn::{OperatorModel, StepFnError, StepFunction};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("argument {0} lies outside the profile domain")]
    OutOfDomain(f64),
    #[error("domain too small after coordinate conversion")]
    DomainTooSmall,
    #[error("grid too coarse: {0} samples per unit (minimum 16)")]
    GridTooCoarse(u32),
    #[error("coordinate change not available: {0}")]
    BadCoordinate(String),
    #[error("operation needs a spectrum and model {0} has none")]
    MissingSpectrum(String),
    #[error(transparent)]
    Arithmetic(#[from] LogRealError),
    #[error(transparent)]
    Model(#[from] StepFnError),
}

/// Display/sampling coordinate of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coord {
    T,
    V,
    U,
    R,
}

impl Coord {
    pub fn axis_name(self) -> &'static str {
        match self {
            Coord::T => "t",
            Coord::V => "v",
            Coord::U => "u",
            Coord::R => "r",
        }
    }

    pub fn parse(s: &str) -> Option<Coord> {
        match s {
            "t" => Some(Coord::T),
            "v" => Some(Coord::V),
            "u" => Some(Coord::U),
            "r" => Some(Coord::R),
            _ => None,
        }
    }
}

/// Provenance and accuracy bookkeeping carried by every profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileMeta {
    /// Which functional of which operator, e.g. `dixmier(t0)`.
    pub provenance: String,
    /// Bound on quadrature/interpolation error added by construction
    /// (zero for closed forms).
    pub error_bound: f64,
}

impl ProfileMeta {
    fn exact(provenance: String) -> ProfileMeta {
        ProfileMeta {
            provenance,
            error_bound: 0.0,
        }
    }
}

/// Denominator of a rational piece, evaluated at the scaled argument `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Denom {
    One,
    /// Divide by `s` itself (the log of the scale argument).
    LogArg,
    /// Divide by `log(1 + exp(s))`.
    Log1pArg,
}

/// One analytic piece: `(a + b exp(beta s) + c s) / denom(s)` with
/// `s = arg_scale * l`, optionally negated. Coefficients live in the log
/// domain so pieces may carry factors like `exp(k - e^k)` without underflow.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalForm {
    pub a: LogReal,
    pub b: LogReal,
    pub beta: Dd,
    pub c: LogReal,
    pub denom: Denom,
    pub arg_scale: Dd,
    pub negate: bool,
}

impl RationalForm {
    /// Constant piece `a`.
    pub fn constant(a: LogReal) -> RationalForm {
        RationalForm {
            a,
            b: LogReal::ZERO,
            beta: Dd::ZERO,
            c: LogReal::ZERO,
            denom: Denom::One,
            arg_scale: Dd::ONE,
            negate: false,
        }
    }

    pub fn eval(&self, ell: Dd) -> Result<LogReal, ProfileError> {
        let s = self.arg_scale * ell;
        let mut num = self.a;
        if !self.b.is_zero() {
            let grown = LogReal::new(self.b.sign(), self.b.logmag() + self.beta * s);
            num = num.add(grown)?;
        }
        if !self.c.is_zero() {
            num = num.add(self.c.mul(LogReal::from_dd(s))?)?;
        }
        let v = match self.denom {
            Denom::One => num,
            Denom::LogArg => num.div(LogReal::from_dd(s))?,
            Denom::Log1pArg => num.div(LogReal::from_dd(s.log1pexp()))?,
        };
        Ok(if self.negate { v.neg() } else { v })
    }

    /// Conjugation by `t -> t^a` as an exact transformation of the piece:
    /// the new piece at `l` equals the old piece at `a l`.
    pub fn exponentiate_scale(&self, a: f64) -> RationalForm {
        let mut out = self.clone();
        out.arg_scale = self.arg_scale * a;
        out
    }
}

/// A closed-form piece: either a rational expression or a functional of an
/// operator model evaluated on demand.
#[derive(Debug, Clone)]
pub(crate) enum Expr {
    Rational(RationalForm),
    /// `S(t) = int_0^t mu / log(1+t)`.
    Dixmier(Arc<OperatorModel>),
    /// `S(t) - t mu(t)/log(1+t)`: the profile with the instantaneous piece
    /// contribution removed.
    DixmierSteady(Arc<OperatorModel>),
    /// `int_0^{d(1/t)} mu / log(1+t)` with the strict distribution function.
    Truncated(Arc<OperatorModel>),
    /// `t mu(t) / log(1+t)`.
    RemainderMu(Arc<OperatorModel>),
    /// `d(1/t) / (t log(1+t))`.
    RemainderD(Arc<OperatorModel>),
    /// `beta(t)/t` with `beta(t) = int_0^{d(exp(-t))} mu`; the argument is
    /// `v`-like, so canonical `l` is the argument itself.
    Beta(Arc<OperatorModel>),
    /// `g(r) = (1/r) Tr(T^{1+1/r})`; canonical variable is `r`.
    Zeta(Arc<OperatorModel>),
    /// Component of the eigenvalue sum over a spectral region, normalized by
    /// `log(1+t)`.
    Lidskii {
        model: Arc<OperatorModel>,
        region: Region,
        part: ComplexPart,
    },
}

impl Expr {
    fn model_ref(&self) -> Option<&Arc<OperatorModel>> {
        match self {
            Expr::Rational(_) => None,
            Expr::Dixmier(m)
            | Expr::DixmierSteady(m)
            | Expr::Truncated(m)
            | Expr::RemainderMu(m)
            | Expr::RemainderD(m)
            | Expr::Beta(m)
            | Expr::Zeta(m) => Some(m),
            Expr::Lidskii { model, .. } => Some(model),
        }
    }

    /// True when the canonical variable of this expression is `log t`, so
    /// that the model's knots are breakpoints of the value. Beta and zeta
    /// expressions use other canonical variables and their breakpoints are
    /// not knot images.
    fn knots_are_cuts(&self) -> bool {
        !matches!(self, Expr::Beta(_) | Expr::Zeta(_) | Expr::Rational(_))
    }

    fn eval(&self, ell: Dd) -> Result<LogReal, ProfileError> {
        match self {
            Expr::Rational(r) => r.eval(ell),
            Expr::Dixmier(m) => {
                let i = m.integral(ell)?;
                Ok(i.div(log_denominator(ell))?)
            }
            Expr::DixmierSteady(m) => {
                let i = m.integral(ell)?;
                let jump = m.eval_mu(ell).mul(LogReal::exp_of(ell))?;
                let num = match i.sub(jump) {
                    Ok(v) => v,
                    Err(LogRealError::CancellationUnderflow { .. }) => LogReal::ZERO,
                    Err(e) => return Err(e.into()),
                };
                Ok(num.div(log_denominator(ell))?)
            }
            Expr::Truncated(m) => {
                let level = LogReal::exp_of(-ell);
                let d = m.distribution(level)?;
                if d.is_zero() {
                    return Ok(LogReal::ZERO);
                }
                let i = m.integral(d.logmag())?;
                Ok(i.div(log_denominator(ell))?)
            }
            Expr::RemainderMu(m) => {
                let num = m.eval_mu(ell).mul(LogReal::exp_of(ell))?;
                Ok(num.div(log_denominator(ell))?)
            }
            Expr::RemainderD(m) => {
                let level = LogReal::exp_of(-ell);
                let d = m.distribution(level)?;
                if d.is_zero() {
                    return Ok(LogReal::ZERO);
                }
                let num = d.div(LogReal::exp_of(ell))?;
                Ok(num.div(log_denominator(ell))?)
            }
            Expr::Beta(m) => {
                let level = LogReal::exp_of(-ell);
                let d = m.distribution(level)?;
                if d.is_zero() {
                    return Ok(LogReal::ZERO);
                }
                let beta = m.integral(d.logmag())?;
                Ok(beta.div(LogReal::from_dd(ell))?)
            }
            Expr::Zeta(m) => {
                if ell.hi <= 0.0 {
                    return Err(ProfileError::OutOfDomain(ell.to_f64()));
                }
                Ok(LogReal::from_f64(crate::zeta::eval_g(m, ell.to_f64())?))
            }
            Expr::Lidskii {
                model,
                region,
                part,
            } => {
                let spectrum = model
                    .spectrum
                    .as_ref()
                    .ok_or_else(|| ProfileError::MissingSpectrum(model.label.clone()))?;
                let (re, im) = crate::lidskii::region_sum(spectrum, *region, ell.to_f64());
                let component = match part {
                    ComplexPart::Re => re,
                    ComplexPart::Im => im,
                };
                let num = LogReal::from_f64(component);
                Ok(num.div(log_denominator(ell))?)
            }
        }
    }
}

/// `log(1 + t)` at `t = exp(l)`, as a positive LogReal.
fn log_denominator(ell: Dd) -> LogReal {
    LogReal::from_dd(ell.log1pexp())
}

#[derive(Debug, Clone)]
pub(crate) struct ClosedForm {
    /// Piece boundaries in canonical `l`, ascending; `cuts[0]` may be `-inf`.
    pub cuts: Vec<Dd>,
    pub exprs: Vec<Expr>,
    /// Exclusive canonical end of validity (`None` = unbounded). Evaluation
    /// at the endpoint itself is allowed.
    pub end: Option<Dd>,
}

#[derive(Debug, Clone)]
pub(crate) struct Sampled {
    /// Grid start in the profile's own coordinate.
    pub start: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl Sampled {
    fn end(&self) -> f64 {
        self.start + self.step * (self.values.len() - 1) as f64
    }

    fn eval(&self, x: f64) -> Result<f64, ProfileError> {
        let pos = (x - self.start) / self.step;
        let n = self.values.len();
        if pos < -1e-9 || pos > (n - 1) as f64 + 1e-9 {
            return Err(ProfileError::OutOfDomain(x));
        }
        let pos = pos.clamp(0.0, (n - 1) as f64);
        let i = (pos.floor() as usize).min(n - 2);
        let frac = pos - i as f64;
        Ok(self.values[i] * (1.0 - frac) + self.values[i + 1] * frac)
    }

    /// Linear-interpolation error bound from second differences.
    fn interp_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for w in self.values.windows(3) {
            worst = worst.max((w[0] - 2.0 * w[1] + w[2]).abs());
        }
        worst / 8.0
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Repr {
    Closed(ClosedForm),
    Sampled(Sampled),
}

/// A scalar function of the probe scale with a chosen display coordinate.
#[derive(Debug, Clone)]
pub struct Profile {
    pub(crate) coord: Coord,
    pub(crate) repr: Repr,
    pub meta: ProfileMeta,
}

/// Minimum sampling density for averaging grids.
const MIN_SPU: u32 = 16;

/// Depth guard on the canonical variable: beyond this the log-domain kernels
/// would overflow their own exponent budget.
const MAX_ELL: f64 = 9.0e17;

impl Profile {
    pub(crate) fn closed(coord: Coord, form: ClosedForm, meta: ProfileMeta) -> Profile {
        assert_eq!(form.cuts.len(), form.exprs.len());
        Profile {
            coord,
            repr: Repr::Closed(form),
            meta,
        }
    }

    /// Single-piece closed form valid on all of `(-inf, end)`.
    pub(crate) fn whole_line(coord: Coord, expr: Expr, end: Option<Dd>, meta: ProfileMeta) -> Profile {
        Profile::closed_single(coord, Dd { hi: f64::NEG_INFINITY, lo: 0.0 }, expr, end, meta)
    }

    /// Single-piece closed form on `[start, end)`.
    pub(crate) fn closed_single(
        coord: Coord,
        start: Dd,
        expr: Expr,
        end: Option<Dd>,
        meta: ProfileMeta,
    ) -> Profile {
        Profile::closed(
            coord,
            ClosedForm {
                cuts: vec![start],
                exprs: vec![expr],
                end,
            },
            meta,
        )
    }

    /// Piecewise rational profile; cuts and pieces must align.
    pub fn from_rational(
        coord: Coord,
        cuts: Vec<Dd>,
        pieces: Vec<RationalForm>,
        end: Option<Dd>,
        provenance: &str,
    ) -> Profile {
        Profile::closed(
            coord,
            ClosedForm {
                cuts,
                exprs: pieces.into_iter().map(Expr::Rational).collect(),
                end,
            },
            ProfileMeta::exact(provenance.to_string()),
        )
    }

    pub(crate) fn sampled(coord: Coord, s: Sampled, meta: ProfileMeta) -> Profile {
        assert!(s.step > 0.0 && s.values.len() >= 2);
        Profile {
            coord,
            repr: Repr::Sampled(s),
            meta,
        }
    }

    pub fn coord(&self) -> Coord {
        self.coord
    }

    /// Domain in the profile's own coordinate: `(start, end)`, either side
    /// possibly unbounded.
    pub fn own_domain(&self) -> (Option<f64>, Option<f64>) {
        match &self.repr {
            Repr::Sampled(s) => (Some(s.start), Some(s.end())),
            Repr::Closed(c) => {
                let lo = if c.cuts[0].is_finite() {
                    ell_to_coord(self.coord, c.cuts[0]).ok()
                } else {
                    // An unbounded canonical start may still be a bounded
                    // own-coordinate start (u = log l needs l > 0).
                    match self.coord {
                        Coord::U => None,
                        _ => None,
                    }
                };
                let hi = c.end.and_then(|e| ell_to_coord(self.coord, e).ok());
                (lo, hi)
            }
        }
    }

    /// Evaluates at the canonical variable `l` given in full precision.
    /// Deep probes need this form: at `l ~ exp(31)` an `f64` argument would
    /// already cost more accuracy than the answer tolerates.
    pub fn eval_ell(&self, ell: Dd) -> Result<f64, ProfileError> {
        match &self.repr {
            Repr::Closed(_) => Ok(self.eval_log_ell(ell)?.to_f64()),
            Repr::Sampled(s) => {
                if !ell.hi.is_finite() || ell.hi.abs() > MAX_ELL {
                    return Err(ProfileError::OutOfDomain(ell.to_f64()));
                }
                let x = ell_to_coord(self.coord, ell)?;
                s.eval(x)
            }
        }
    }

    /// Log-domain evaluation at the canonical variable `l`. Serialization
    /// uses this form: the magnitude may underflow `f64` while the
    /// log-magnitude stays exactly representable. Sampled profiles store
    /// plain values, so their result carries only `f64` information.
    pub fn eval_log_ell(&self, ell: Dd) -> Result<LogReal, ProfileError> {
        if !ell.hi.is_finite() || ell.hi.abs() > MAX_ELL {
            return Err(ProfileError::OutOfDomain(ell.to_f64()));
        }
        match &self.repr {
            Repr::Closed(c) => {
                if let Some(end) = c.end {
                    if ell > end {
                        return Err(ProfileError::OutOfDomain(ell.to_f64()));
                    }
                }
                let i = c.cuts.partition_point(|&cut| cut <= ell);
                if i == 0 {
                    return Err(ProfileError::OutOfDomain(ell.to_f64()));
                }
                c.exprs[i - 1].eval(ell)
            }
            Repr::Sampled(s) => {
                let x = ell_to_coord(self.coord, ell)?;
                Ok(LogReal::from_f64(s.eval(x)?))
            }
        }
    }

    /// Evaluates at a point given in the profile's own coordinate.
    pub fn eval(&self, x: f64) -> Result<f64, ProfileError> {
        match &self.repr {
            Repr::Sampled(s) => s.eval(x),
            Repr::Closed(_) => self.eval_ell(coord_to_ell(self.coord, x)?),
        }
    }

    /// Log-domain value at a point in the profile's own coordinate.
    pub fn eval_log(&self, x: f64) -> Result<LogReal, ProfileError> {
        match &self.repr {
            Repr::Sampled(s) => Ok(LogReal::from_f64(s.eval(x)?)),
            Repr::Closed(_) => self.eval_log_ell(coord_to_ell(self.coord, x)?),
        }
    }

    /// Positions strictly inside `(lo, hi)`, in the profile's own
    /// coordinate, where the representation changes piece. Quadrature
    /// routines split panels here so each panel sees a smooth integrand.
    /// When there are too many to enumerate the list is empty and
    /// refinement is left to adaptive bisection.
    pub fn smoothness_cuts(&self, lo: f64, hi: f64) -> Vec<f64> {
        const CAP: usize = 4096;
        let mut out: Vec<f64> = Vec::new();
        match &self.repr {
            Repr::Sampled(s) => {
                let mut i = (((lo - s.start) / s.step).floor().max(0.0)) as usize;
                while i < s.values.len() {
                    let x = s.start + s.step * i as f64;
                    if x >= hi {
                        break;
                    }
                    if x > lo {
                        if out.len() == CAP {
                            return Vec::new();
                        }
                        out.push(x);
                    }
                    i += 1;
                }
            }
            Repr::Closed(c) => {
                for &cut in &c.cuts {
                    if !cut.hi.is_finite() {
                        continue;
                    }
                    if let Ok(x) = ell_to_coord(self.coord, cut) {
                        if x > lo && x < hi {
                            out.push(x);
                        }
                    }
                }
                for expr in &c.exprs {
                    if !expr.knots_are_cuts() {
                        continue;
                    }
                    let Some(model) = expr.model_ref() else {
                        continue;
                    };
                    if !collect_knot_cuts(&model.mu, self.coord, lo, hi, CAP, &mut out) {
                        return Vec::new();
                    }
                }
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).expect("cut positions are finite"));
        out.dedup();
        out
    }

    /// Changes the display coordinate. Closed forms convert exactly (the
    /// representation already lives in the canonical variable); sampled
    /// profiles are resampled onto a uniform grid in the new coordinate with
    /// an interpolation error recorded in the metadata. Zeta-style profiles
    /// have no scale coordinate and reject everything but the identity.
    pub fn reframe(&self, coord: Coord) -> Result<Profile, ProfileError> {
        if coord == self.coord {
            return Ok(self.clone());
        }
        if self.coord == Coord::R || coord == Coord::R {
            return Err(ProfileError::BadCoordinate(
                "zeta profiles live on the r axis only".to_string(),
            ));
        }
        match &self.repr {
            Repr::Closed(_) => {
                let mut out = self.clone();
                out.coord = coord;
                Ok(out)
            }
            Repr::Sampled(s) => {
                let n = s.values.len();
                // Clip the old grid to the part convertible into the new
                // coordinate (u = log l exists only for l > 0, etc.).
                let mut first = 0usize;
                let mut last = n - 1;
                let convert = |x: f64| -> Option<f64> {
                    let ell = coord_to_ell(self.coord, x).ok()?;
                    ell_to_coord(coord, ell).ok()
                };
                while first < last && convert(s.start + first as f64 * s.step).is_none() {
                    first += 1;
                }
                while last > first && convert(s.start + last as f64 * s.step).is_none() {
                    last -= 1;
                }
                if last - first + 1 < 2 {
                    return Err(ProfileError::DomainTooSmall);
                }
                let new_lo = convert(s.start + first as f64 * s.step)
                    .ok_or(ProfileError::DomainTooSmall)?;
                let new_hi = convert(s.start + last as f64 * s.step)
                    .ok_or(ProfileError::DomainTooSmall)?;
                if !(new_hi > new_lo) {
                    return Err(ProfileError::DomainTooSmall);
                }
                let count = last - first + 1;
                let step = (new_hi - new_lo) / (count - 1) as f64;
                let mut values = Vec::with_capacity(count);
                for j in 0..count {
                    let xb = new_lo + j as f64 * step;
                    let ell = coord_to_ell(coord, xb)?;
                    let xa = ell_to_coord(self.coord, ell)?;
                    values.push(s.eval(xa)?);
                }
                let grid = Sampled {
                    start: new_lo,
                    step,
                    values,
                };
                let mut meta = self.meta.clone();
                meta.error_bound += grid.interp_error() + s.interp_error();
                Ok(Profile::sampled(coord, grid, meta))
            }
        }
    }

    /// Running mean from the domain start (floored at zero) out to `w_end`,
    /// in the profile's own coordinate: `C(w) = (w - w0)^-1 int_{w0}^w p`.
    /// Uses the trapezoid rule on a uniform grid with at least `spu` samples
    /// per unit; the result is a sampled profile whose metadata carries the
    /// quadrature error estimate.
    pub fn cesaro(&self, w_end: f64, spu: u32) -> Result<Profile, ProfileError> {
        if spu < MIN_SPU {
            return Err(ProfileError::GridTooCoarse(spu));
        }
        let (lo, hi) = self.own_domain();
        let w0 = lo.unwrap_or(0.0).max(0.0);
        let w_end = match hi {
            Some(h) => w_end.min(h),
            None => w_end,
        };
        if !(w_end > w0) {
            return Err(ProfileError::DomainTooSmall);
        }
        let span = w_end - w0;
        let n = (span * spu as f64).ceil() as usize + 1;
        let step = span / (n - 1) as f64;
        let mut values = Vec::with_capacity(n);
        let mut integral = Accum::default();
        let mut prev = self.eval(w0)?;
        values.push(prev);
        let mut max_dd2 = 0.0f64;
        let mut prev2 = f64::NAN;
        for j in 1..n {
            let w = w0 + j as f64 * step;
            let f = self.eval(w)?;
            integral.add(0.5 * step * (prev + f));
            values.push(integral.total() / (w - w0));
            if prev2.is_finite() {
                max_dd2 = max_dd2.max((prev2 - 2.0 * prev + f).abs());
            }
            prev2 = prev;
            prev = f;
        }
        // Trapezoid error per interval is ~ step^2 f''/12; the second
        // difference estimates step^2 f''.
        let quad_error = max_dd2 / 12.0 * span.max(1.0) / span;
        let mut meta = self.meta.clone();
        meta.provenance = format!("cesaro({})", meta.provenance);
        meta.error_bound += quad_error;
        Ok(Profile::sampled(
            self.coord,
            Sampled {
                start: w0,
                step,
                values,
            },
            meta,
        ))
    }
}

/// Converts an own-coordinate value to the canonical variable.
/// Appends knot positions of `mu` that land strictly inside `(lo, hi)` in
/// coordinate `coord`. Returns `false` when there are more than `cap` such
/// knots, signalling the caller to give up on explicit cuts.
fn collect_knot_cuts(
    mu: &StepFunction,
    coord: Coord,
    lo: f64,
    hi: f64,
    cap: usize,
    out: &mut Vec<f64>,
) -> bool {
    if let Some((_, count)) = mu.as_lattice() {
        // Lattice knots sit at log-abscissa ln(n); map the window back to n
        // and enumerate only that slice.
        let lo_ell = match coord_to_ell(coord, lo) {
            Ok(v) => v.to_f64(),
            Err(_) => f64::NEG_INFINITY,
        };
        let hi_ell = match coord_to_ell(coord, hi) {
            Ok(v) => v.to_f64(),
            Err(_) => return true,
        };
        let n_lo = lo_ell.exp().ceil().max(2.0);
        let n_hi = hi_ell.exp().floor().min(count as f64);
        if n_hi < n_lo {
            return true;
        }
        if n_hi - n_lo >= cap as f64 {
            return false;
        }
        let mut n = n_lo as u64;
        while n as f64 <= n_hi {
            if let Ok(x) = ell_to_coord(coord, Dd::from_f64(n as f64).ln()) {
                if x > lo && x < hi {
                    if out.len() == cap {
                        return false;
                    }
                    out.push(x);
                }
            }
            n += 1;
        }
        return true;
    }
    if mu.len() > 4 * cap {
        return false;
    }
    for i in 0..mu.len() {
        if let Ok(x) = ell_to_coord(coord, mu.knot(i)) {
            if x > lo && x < hi {
                if out.len() == cap {
                    return false;
                }
                out.push(x);
            }
        }
    }
    true
}

pub(crate) fn coord_to_ell(coord: Coord, x: f64) -> Result<Dd, ProfileError> {
    match coord {
        Coord::T => {
            if x <= 0.0 || !x.is_finite() {
                Err(ProfileError::OutOfDomain(x))
            } else {
                Ok(Dd::from_f64(x).ln())
            }
        }
        Coord::V | Coord::R => {
            if x.is_finite() {
                Ok(Dd::from_f64(x))
            } else {
                Err(ProfileError::OutOfDomain(x))
            }
        }
        Coord::U => {
            // exp(u) must stay within the log-domain exponent budget.
            if !x.is_finite() || x > 41.0 {
                Err(ProfileError::OutOfDomain(x))
            } else {
                Ok(Dd::from_f64(x).exp())
            }
        }
    }
}

/// Converts the canonical variable to an own-coordinate value.
pub(crate) fn ell_to_coord(coord: Coord, ell: Dd) -> Result<f64, ProfileError> {
    match coord {
        Coord::T => {
            if ell.hi > 700.0 {
                Err(ProfileError::OutOfDomain(ell.to_f64()))
            } else {
                Ok(ell.exp().to_f64())
            }
        }
        Coord::V | Coord::R => Ok(ell.to_f64()),
        Coord::U => {
            if ell.hi <= 0.0 {
                Err(ProfileError::OutOfDomain(ell.to_f64()))
            } else {
                Ok(ell.ln().to_f64())
            }
        }
    }
}

/// `S(t) = (1/log(1+t)) int_0^t mu`: the normalized partial-integral profile
/// whose limit points along `t = exp(exp(u))` towers are the quantities of
/// interest.
pub fn dixmier_profile(model: &Arc<OperatorModel>) -> Profile {
    Profile::whole_line(
        Coord::U,
        Expr::Dixmier(Arc::clone(model)),
        model_end(model),
        ProfileMeta::exact(format!("dixmier({})", model.label)),
    )
}

/// `S(t) - t mu(t)/log(1+t)`: the profile with the contribution of the piece
/// currently being traversed removed, which is the natural object once the
/// instantaneous term has been accounted for separately.
pub fn dixmier_steady_profile(model: &Arc<OperatorModel>) -> Profile {
    Profile::whole_line(
        Coord::U,
        Expr::DixmierSteady(Arc::clone(model)),
        model_end(model),
        ProfileMeta::exact(format!("dixmier-steady({})", model.label)),
    )
}

/// `(1/log(1+t)) int_0^{d(1/t)} mu` with the strict distribution function:
/// the eigenvalue-threshold companion of the Dixmier profile.
pub fn truncated_profile(model: &Arc<OperatorModel>) -> Profile {
    Profile::whole_line(
        Coord::U,
        Expr::Truncated(Arc::clone(model)),
        model_end(model),
        ProfileMeta::exact(format!("truncated({})", model.label)),
    )
}

/// `t mu(t) / log(1+t)`: the instantaneous-piece remainder.
pub fn remainder_mu_profile(model: &Arc<OperatorModel>) -> Profile {
    Profile::whole_line(
        Coord::U,
        Expr::RemainderMu(Arc::clone(model)),
        model_end(model),
        ProfileMeta::exact(format!("remainder-mu({})", model.label)),
    )
}

/// `d(1/t) / (t log(1+t))`: the counting-function remainder.
pub fn remainder_d_profile(model: &Arc<OperatorModel>) -> Profile {
    Profile::whole_line(
        Coord::U,
        Expr::RemainderD(Arc::clone(model)),
        model_end(model),
        ProfileMeta::exact(format!("remainder-d({})", model.label)),
    )
}

/// `beta(t)/t` with `beta(t) = int_0^{d(exp(-t))} mu`. The argument plays
/// the role of `v = log scale`, so the profile is built in coordinate `v`.
pub fn beta_profile(model: &Arc<OperatorModel>) -> Profile {
    Profile::whole_line(
        Coord::V,
        Expr::Beta(Arc::clone(model)),
        model_end(model),
        ProfileMeta::exact(format!("beta({})", model.label)),
    )
}

/// Canonical domain end induced by a model's faithful depth.
fn model_end(model: &OperatorModel) -> Option<Dd> {
    model.truncation_depth_u().map(|u| Dd::from_f64(u).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stepfn::StepFunction;

    fn chi_model() -> Arc<OperatorModel> {
        let mu = StepFunction::from_pieces(vec![Dd::ZERO], vec![LogReal::one()], LogReal::ZERO)
            .unwrap();
        Arc::new(OperatorModel::bare("chi", mu))
    }

    #[test]
    fn dixmier_of_indicator_matches_closed_values() {
        let p = dixmier_profile(&chi_model());
        // Below the knot: S(t) = t/log(1+t); at t = 1 that is 1/log 2.
        let v = p.eval_ell(Dd::ZERO).unwrap();
        assert!((v - std::f64::consts::LOG2_E).abs() <= 1e-15);
        // At t = 1/2: 0.5/log(1.5).
        let v = p.eval_ell(Dd::from_f64(0.5).ln()).unwrap();
        assert!((v - 1.2331517311882158).abs() <= 1e-15);
        // Beyond the knot the integral saturates: S(3) = 1/log 4.
        let v = p.eval_ell(Dd::from_f64(3.0).ln()).unwrap();
        assert!((v - 0.7213475204444817).abs() <= 1e-15);
        assert_eq!(p.meta.provenance, "dixmier(chi)");
    }

    #[test]
    fn truncated_of_indicator_switches_at_the_plateau_level() {
        let p = truncated_profile(&chi_model());
        // 1/t > 1: the strict set {mu > 1/t} is empty, so the value is 0.
        assert_eq!(p.eval_ell(Dd::from_f64(-0.5)).unwrap(), 0.0);
        // 1/t < 1: d = 1 and the numerator saturates at 1.
        let v = p.eval_ell(Dd::from_f64(3.0).ln()).unwrap();
        assert!((v - 0.7213475204444817).abs() <= 1e-15);
    }

    #[test]
    fn remainder_profiles_of_indicator() {
        let p = remainder_mu_profile(&chi_model());
        // t < 1: mu = 1, so the value is t/log(1+t) = e^-1/log(1+e^-1).
        let v = p.eval_ell(Dd::from_f64(-1.0)).unwrap();
        assert!((v - 1.1743518464895019).abs() <= 1e-15);
        // Past the support mu vanishes.
        assert_eq!(p.eval_ell(Dd::from_f64(1.0)).unwrap(), 0.0);

        let q = remainder_d_profile(&chi_model());
        // t > 1: d(1/t) = 1, value = 1/(t log(1+t)); at t = 3: 1/(3 log 4).
        let v = q.eval_ell(Dd::from_f64(3.0).ln()).unwrap();
        assert!((v - 0.7213475204444817 / 3.0).abs() <= 1e-15);
        assert_eq!(q.eval_ell(Dd::from_f64(-0.5)).unwrap(), 0.0);
    }

    #[test]
    fn steady_profile_removes_the_jump_term() {
        let m = chi_model();
        let s = dixmier_profile(&m);
        let steady = dixmier_steady_profile(&m);
        let r = remainder_mu_profile(&m);
        // Inside the support: steady = dixmier - remainder, and the
        // difference I - t mu cancels exactly to zero there.
        let l = Dd::from_f64(-0.7);
        assert_eq!(steady.eval_ell(l).unwrap(), 0.0);
        assert!(
            (s.eval_ell(l).unwrap() - r.eval_ell(l).unwrap()).abs() <= 1e-16,
        );
        // Past the support the remainder vanishes and steady = dixmier.
        let l = Dd::from_f64(2.0);
        assert_eq!(steady.eval_ell(l).unwrap(), s.eval_ell(l).unwrap());
    }

    #[test]
    fn beta_profile_of_indicator_is_reciprocal() {
        let p = beta_profile(&chi_model());
        assert_eq!(p.coord(), Coord::V);
        // Level exp(-1) < 1: d = 1, beta = 1, value 1/arg = 1.
        let v = p.eval_ell(Dd::ONE).unwrap();
        assert!((v - 1.0).abs() <= 1e-16);
        let v = p.eval_ell(Dd::from_f64(4.0)).unwrap();
        assert!((v - 0.25).abs() <= 1e-16);
    }

    #[test]
    fn rational_pieces_evaluate_with_all_terms() {
        // (2 + 3 exp(s) + 0.5 s)/s at s = 2: (3 + 3 e^2)/2.
        let form = RationalForm {
            a: LogReal::from_f64(2.0),
            b: LogReal::from_f64(3.0),
            beta: Dd::ONE,
            c: LogReal::from_f64(0.5),
            denom: Denom::LogArg,
            arg_scale: Dd::ONE,
            negate: false,
        };
        let v = form.eval(Dd::from_f64(2.0)).unwrap().to_f64();
        assert!((v - 12.583584148395975).abs() <= 1e-14);
        // Negated constant over log(1+t) at t = 1: -1/log 2.
        let form = RationalForm {
            a: LogReal::one(),
            b: LogReal::ZERO,
            beta: Dd::ZERO,
            c: LogReal::ZERO,
            denom: Denom::Log1pArg,
            arg_scale: Dd::ONE,
            negate: true,
        };
        let v = form.eval(Dd::ZERO).unwrap().to_f64();
        assert!((v + std::f64::consts::LOG2_E).abs() <= 1e-15);
    }

    #[test]
    fn exponentiate_scale_is_the_exact_conjugation() {
        let form = RationalForm {
            a: LogReal::from_f64(1.0),
            b: LogReal::from_f64(2.0),
            beta: Dd::from_f64(-0.5),
            c: LogReal::from_f64(0.25),
            denom: Denom::LogArg,
            arg_scale: Dd::ONE,
            negate: false,
        };
        let scaled = form.exponentiate_scale(2.0);
        for &l in &[0.5f64, 1.0, 3.25, 10.0] {
            let direct = form.eval(Dd::from_f64(2.0 * l)).unwrap();
            let conj = scaled.eval(Dd::from_f64(l)).unwrap();
            assert_eq!(direct, conj);
        }
    }

    #[test]
    fn reframe_of_closed_forms_is_a_tag_change() {
        let p = dixmier_profile(&chi_model());
        let q = p.reframe(Coord::V).unwrap();
        assert_eq!(q.coord(), Coord::V);
        let l = Dd::from_f64(0.375);
        assert_eq!(p.eval_ell(l).unwrap(), q.eval_ell(l).unwrap());
        // Own-coordinate evaluation respects the new tag: v = 2 is l = 2.
        assert_eq!(
            q.eval(2.0).unwrap(),
            p.eval_ell(Dd::from_f64(2.0)).unwrap()
        );
    }

    #[test]
    fn cesaro_of_a_constant_is_the_constant() {
        let p = Profile::from_rational(
            Coord::V,
            vec![Dd { hi: f64::NEG_INFINITY, lo: 0.0 }],
            vec![RationalForm::constant(LogReal::from_f64(2.0))],
            None,
            "const",
        );
        let c = p.cesaro(10.0, 32).unwrap();
        assert_eq!(c.meta.provenance, "cesaro(const)");
        for &w in &[0.5f64, 3.25, 10.0] {
            assert!((c.eval(w).unwrap() - 2.0).abs() <= 1e-14);
        }
        assert!(c.meta.error_bound <= 1e-12);
    }

    #[test]
    fn cesaro_rejects_coarse_grids() {
        let p = dixmier_profile(&chi_model());
        assert_eq!(
            p.cesaro(5.0, 8).unwrap_err(),
            ProfileError::GridTooCoarse(8)
        );
    }

    #[test]
    fn sampled_reframe_resamples_with_error_tracking() {
        // Sample S(chi) on a v grid, then move to u.
        let p = dixmier_profile(&chi_model()).reframe(Coord::V).unwrap();
        let c = p.cesaro(8.0, 64).unwrap();
        let q = c.reframe(Coord::U).unwrap();
        assert_eq!(q.coord(), Coord::U);
        // Compare at an interior point: u = 1 is v = e.
        let at_u = q.eval(1.0).unwrap();
        let at_v = c.eval(std::f64::consts::E).unwrap();
        assert!((at_u - at_v).abs() <= 1e-3);
        assert!(q.meta.error_bound >= c.meta.error_bound);
        // The v grid starts at 0; only v > 0 converts, and the clipped
        // domain must still be reported.
        let (lo, hi) = q.own_domain();
        assert!(lo.unwrap().is_finite());
        assert!((hi.unwrap() - 8.0f64.ln()).abs() <= 1e-12);
    }

    #[test]
    fn zeta_axis_rejects_reframe() {
        let p = Profile::whole_line(
            Coord::R,
            Expr::Rational(RationalForm::constant(LogReal::one())),
            None,
            ProfileMeta::exact("zeta(test)".to_string()),
        );
        assert!(matches!(
            p.reframe(Coord::U).unwrap_err(),
            ProfileError::BadCoordinate(_)
        ));
        // Identity reframe stays fine.
        assert!(p.reframe(Coord::R).is_ok());
    }

    #[test]
    fn domain_guards_reject_deep_and_early_arguments() {
        let mut p = dixmier_profile(&chi_model());
        if let Repr::Closed(c) = &mut p.repr {
            c.end = Some(Dd::from_f64(10.0));
        }
        assert!(p.eval_ell(Dd::from_f64(10.0)).is_ok());
        assert!(matches!(
            p.eval_ell(Dd::from_f64(10.5)).unwrap_err(),
            ProfileError::OutOfDomain(_)
        ));
        assert!(matches!(
            p.eval_ell(Dd::from_f64(1.0e18)).unwrap_err(),
            ProfileError::OutOfDomain(_)
        ));
        // Coordinate conversion guard: u beyond the exponent budget.
        assert!(coord_to_ell(Coord::U, 42.0).is_err());
    }
}
