//! Nonincreasing step functions with log-abscissa breakpoints, and the
//! operator models built on them.
//!
//! A [`StepFunction`] represents a singular value profile: a nonnegative,
//! nonincreasing, piecewise constant function on `[0, inf)`. Breakpoints are
//! stored as logs of the abscissa because the scales of interest reach
//! `t = exp(exp(40))`; values are [`LogReal`]s for the same reason. The knot
//! list `l_0 < l_1 < ... < l_m` carries value `v_i` on `[t_{i-1}, t_i)` with
//! `t_i = exp(l_i)` and `t_{-1} = 0`, and a tail value beyond `t_m` (zero for
//! compact-operator models).
//!
//! Two storage backends share the same contract: explicit knot/value vectors,
//! and a formulaic integer lattice carrying `(n+1)^-alpha` on `[n, n+1)` that
//! avoids materializing ten million pieces. Integrals use stride-checkpointed
//! prefix sums so point queries stay cheap on large lattices.

use crate::dd::{Accum, Dd};
use crate::logreal::{LogReal, LogRealError};
use std::collections::BTreeMap;
use std::sync::OnceLock;
use thiserror::Error;

/// Hard cap on materializing lattice pieces into explicit vectors
/// (dilate/exponentiate need explicit knots).
const MAX_MATERIALIZE: u64 = 1 << 20;

/// Target number of prefix-sum checkpoints per function.
const PREFIX_CHECKPOINTS: usize = 8192;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepFnError {
    #[error("a step function needs at least one piece")]
    EmptyPieces,
    #[error("knots and values must have equal positive lengths ({knots} vs {values})")]
    LengthMismatch { knots: usize, values: usize },
    #[error("knots must be finite and ascending (violation at index {0})")]
    NonAscendingKnots(usize),
    #[error("values must be nonnegative (violation at index {0})")]
    NegativeValue(usize),
    #[error("values must be nonincreasing (violation at index {0})")]
    IncreasingValues(usize),
    #[error("tail value exceeds the last piece value")]
    TailExceedsLast,
    #[error("integral beyond the last knot diverges (nonzero tail)")]
    DivergentTail,
    #[error("operation would materialize {0} pieces (limit {MAX_MATERIALIZE})")]
    TooManyPieces(u64),
    #[error("lattice exponent {0} out of range (must be in (0, 40])")]
    BadLatticeExponent(f64),
    #[error(transparent)]
    Arithmetic(#[from] LogRealError),
}

#[derive(Debug, Clone)]
enum Pieces {
    Dense {
        knots: Vec<Dd>,
        values: Vec<LogReal>,
    },
    /// Value `(n+1)^-alpha` on `[n, n+1)` for `n < count`; knots are
    /// `log(n+1)` implicitly.
    PowerLattice { alpha: f64, count: u64 },
}

/// Checkpointed prefix integrals: `sums[c]` covers pieces `[0, c*stride)`.
/// Lattice sums stay in plain double-double (their magnitudes are tame);
/// dense sums accumulate in the log domain.
#[derive(Debug, Clone)]
enum Prefix {
    Logs { stride: usize, sums: Vec<LogReal> },
    Plain { stride: usize, sums: Vec<Dd> },
}

#[derive(Debug, Clone)]
pub struct StepFunction {
    pieces: Pieces,
    tail: LogReal,
    prefix: OnceLock<Prefix>,
}

impl StepFunction {
    /// Builds from explicit knots (log-abscissae, ascending) and values
    /// (nonincreasing, nonnegative). Zero-width pieces are dropped, equal
    /// adjacent values merged, and trailing pieces equal to the tail folded
    /// into it.
    pub fn from_pieces(
        knots: Vec<Dd>,
        values: Vec<LogReal>,
        tail: LogReal,
    ) -> Result<StepFunction, StepFnError> {
        if knots.len() != values.len() {
            return Err(StepFnError::LengthMismatch {
                knots: knots.len(),
                values: values.len(),
            });
        }
        if tail.sign() < 0 {
            return Err(StepFnError::NegativeValue(usize::MAX));
        }
        let mut ks: Vec<Dd> = Vec::with_capacity(knots.len());
        let mut vs: Vec<LogReal> = Vec::with_capacity(values.len());
        for (i, (&k, &v)) in knots.iter().zip(values.iter()).enumerate() {
            if !k.is_finite() {
                return Err(StepFnError::NonAscendingKnots(i));
            }
            if v.sign() < 0 {
                return Err(StepFnError::NegativeValue(i));
            }
            if let Some(&prev) = ks.last() {
                if k < prev {
                    return Err(StepFnError::NonAscendingKnots(i));
                }
                if k == prev {
                    // Zero-width piece: the earlier entry already owns the
                    // abscissa, so this value applies to an empty interval.
                    continue;
                }
            }
            if let Some(&pv) = vs.last() {
                if v > pv {
                    return Err(StepFnError::IncreasingValues(i));
                }
                if v == pv {
                    // Same value as the previous piece: extend it.
                    *ks.last_mut().unwrap() = k;
                    continue;
                }
            }
            ks.push(k);
            vs.push(v);
        }
        // Fold trailing pieces that already equal the tail value.
        while let Some(&v) = vs.last() {
            if v == tail {
                ks.pop();
                vs.pop();
            } else {
                break;
            }
        }
        if vs.is_empty() {
            return Err(StepFnError::EmptyPieces);
        }
        if tail > *vs.last().unwrap() {
            return Err(StepFnError::TailExceedsLast);
        }
        Ok(StepFunction {
            pieces: Pieces::Dense {
                knots: ks,
                values: vs,
            },
            tail,
            prefix: OnceLock::new(),
        })
    }

    /// Integer-lattice power model: value `(n+1)^-alpha` on `[n, n+1)` up to
    /// `count` pieces, zero tail. Stored formulaically.
    pub fn power_lattice(alpha: f64, count: u64) -> Result<StepFunction, StepFnError> {
        if !(alpha > 0.0 && alpha <= 40.0) {
            return Err(StepFnError::BadLatticeExponent(alpha));
        }
        if count == 0 {
            return Err(StepFnError::EmptyPieces);
        }
        Ok(StepFunction {
            pieces: Pieces::PowerLattice { alpha, count },
            tail: LogReal::ZERO,
            prefix: OnceLock::new(),
        })
    }

    pub fn len(&self) -> usize {
        match &self.pieces {
            Pieces::Dense { knots, .. } => knots.len(),
            Pieces::PowerLattice { count, .. } => *count as usize,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn tail(&self) -> LogReal {
        self.tail
    }

    /// Log-abscissa of the right endpoint of piece `i`.
    pub fn knot(&self, i: usize) -> Dd {
        match &self.pieces {
            Pieces::Dense { knots, .. } => knots[i],
            Pieces::PowerLattice { .. } => Dd::from_f64((i + 1) as f64).ln(),
        }
    }

    /// Value on piece `i`.
    pub fn value(&self, i: usize) -> LogReal {
        match &self.pieces {
            Pieces::Dense { values, .. } => values[i],
            Pieces::PowerLattice { alpha, .. } => lattice_value(*alpha, i as u64),
        }
    }

    pub fn last_knot(&self) -> Dd {
        self.knot(self.len() - 1)
    }

    /// Returns `(alpha, count)` when the storage is the formulaic power
    /// lattice; dense functions return `None`.
    pub fn as_lattice(&self) -> Option<(f64, u64)> {
        match &self.pieces {
            Pieces::PowerLattice { alpha, count } => Some((*alpha, *count)),
            Pieces::Dense { .. } => None,
        }
    }

    /// Value of the piece containing `t = exp(l)` (right-continuous), or the
    /// tail beyond the last knot.
    pub fn eval(&self, l: Dd) -> LogReal {
        match &self.pieces {
            Pieces::Dense { knots, values } => {
                let i = knots.partition_point(|&k| k <= l);
                if i == knots.len() {
                    self.tail
                } else {
                    values[i]
                }
            }
            Pieces::PowerLattice { alpha, count } => {
                // Piece index is floor(exp(l)); beyond the lattice it is tail.
                if l.hi > ((*count as f64) + 1.0).ln() {
                    return self.tail;
                }
                let t = l.exp().to_f64();
                let i = t.floor() as u64;
                if i >= *count {
                    self.tail
                } else {
                    lattice_value(*alpha, i)
                }
            }
        }
    }

    /// Exact integral `int_0^{exp(l)} mu(s) ds` in the log domain.
    pub fn integral(&self, l: Dd) -> Result<LogReal, StepFnError> {
        let m = self.len();
        let full = self.full_pieces_below(l);
        if full == m {
            if l > self.last_knot() && !self.tail.is_zero() {
                return Err(StepFnError::DivergentTail);
            }
            return Ok(self.prefix_sum(m)?);
        }
        let base = self.prefix_sum(full)?;
        let partial = self.partial_piece(full, l)?;
        Ok(base.add(partial)?)
    }

    /// Integral over the entire support (the tail must be zero to extend
    /// this to infinity, which all compact models satisfy).
    pub fn total(&self) -> Result<LogReal, StepFnError> {
        self.prefix_sum(self.len())
    }

    /// Distribution function `d(s) =` measure of `{mu > s}` (strict), as a
    /// LogReal measure. Pre: `s > 0`. An infinite measure (level below a
    /// nonzero tail) is reported as divergent.
    pub fn distribution(&self, s: LogReal) -> Result<LogReal, StepFnError> {
        assert!(s.sign() > 0, "distribution level must be positive");
        match &self.pieces {
            Pieces::Dense { knots, values } => {
                if values[0] <= s {
                    return Ok(LogReal::ZERO);
                }
                // First piece whose value drops to or below the level.
                let i = values.partition_point(|&v| v > s);
                if i == values.len() {
                    if self.tail > s {
                        return Err(StepFnError::DivergentTail);
                    }
                    return Ok(LogReal::exp_of(knots[knots.len() - 1]));
                }
                Ok(LogReal::exp_of(knots[i - 1]))
            }
            Pieces::PowerLattice { alpha, count } => {
                // (n+1)^-alpha > s  iff  n+1 < s^(-1/alpha).
                let x_log = s.logmag() * (-1.0 / *alpha);
                let n = if x_log.hi > ((*count as f64) + 2.0).ln() {
                    *count
                } else {
                    let x = x_log.exp().to_f64();
                    // Counting is exact at lattice levels: a threshold within
                    // rounding distance of an integer is that integer, and
                    // the strict inequality excludes it.
                    let near = x.round();
                    let raw = if (x - near).abs() < 1e-9 * near.max(1.0) {
                        near - 1.0
                    } else {
                        x.floor()
                    };
                    (raw.max(0.0) as u64).min(*count)
                };
                if n == 0 {
                    Ok(LogReal::ZERO)
                } else {
                    Ok(LogReal::from_f64(n as f64))
                }
            }
        }
    }

    /// Pointwise power `mu^p` for `p >= 1`; knots are unchanged.
    pub fn power(&self, p: f64) -> StepFunction {
        assert!(p >= 1.0, "power requires p >= 1, got {p}");
        match &self.pieces {
            Pieces::Dense { knots, values } => {
                let powered = values
                    .iter()
                    .map(|v| v.powf(p).expect("nonnegative value power"))
                    .collect();
                StepFunction {
                    pieces: Pieces::Dense {
                        knots: knots.clone(),
                        values: powered,
                    },
                    tail: self.tail.powf(p).expect("nonnegative tail power"),
                    prefix: OnceLock::new(),
                }
            }
            Pieces::PowerLattice { alpha, count } => StepFunction {
                pieces: Pieces::PowerLattice {
                    alpha: alpha * p,
                    count: *count,
                },
                tail: LogReal::ZERO,
                prefix: OnceLock::new(),
            },
        }
    }

    /// Dilation `mu'(t) = mu(beta t)`: knots shift by `-log beta`.
    pub fn dilate(&self, beta: f64) -> Result<StepFunction, StepFnError> {
        assert!(beta > 0.0 && beta.is_finite(), "dilation needs beta > 0");
        let shift = Dd::from_f64(beta).ln();
        let (knots, values) = self.materialize()?;
        let shifted = knots.iter().map(|&k| k - shift).collect();
        StepFunction::from_pieces(shifted, values, self.tail)
    }

    /// Exponentiation action `mu'(t) = mu(t^a)`: knots scale by `1/a`.
    pub fn exponentiate(&self, a: f64) -> Result<StepFunction, StepFnError> {
        assert!(a > 0.0 && a.is_finite(), "exponentiation needs a > 0");
        let (knots, values) = self.materialize()?;
        let scaled = knots.iter().map(|&k| k / a).collect();
        StepFunction::from_pieces(scaled, values, self.tail)
    }

    fn materialize(&self) -> Result<(Vec<Dd>, Vec<LogReal>), StepFnError> {
        match &self.pieces {
            Pieces::Dense { knots, values } => Ok((knots.clone(), values.clone())),
            Pieces::PowerLattice { alpha, count } => {
                if *count > MAX_MATERIALIZE {
                    return Err(StepFnError::TooManyPieces(*count));
                }
                let knots = (0..*count)
                    .map(|i| Dd::from_f64((i + 1) as f64).ln())
                    .collect();
                let values = (0..*count).map(|i| lattice_value(*alpha, i)).collect();
                Ok((knots, values))
            }
        }
    }

    /// Number of pieces lying entirely within `[0, exp(l)]`.
    fn full_pieces_below(&self, l: Dd) -> usize {
        match &self.pieces {
            Pieces::Dense { knots, .. } => knots.partition_point(|&k| k <= l),
            Pieces::PowerLattice { count, .. } => {
                if l.hi < 0.0 {
                    return 0;
                }
                if l.hi > ((*count as f64) + 2.0).ln() {
                    return *count as usize;
                }
                let t = l.exp().to_f64();
                // Piece n is complete once exp(l) >= n+1.
                (t.floor() as u64).min(*count) as usize
            }
        }
    }

    /// Contribution of the partial piece `j` up to `l` (strictly inside it).
    fn partial_piece(&self, j: usize, l: Dd) -> Result<LogReal, StepFnError> {
        let value = self.value(j);
        if value.is_zero() {
            return Ok(LogReal::ZERO);
        }
        let width_log = if j == 0 {
            // The piece starts at t = 0, so the width is exp(l) itself.
            l
        } else {
            let left = self.knot(j - 1);
            if l == left {
                return Ok(LogReal::ZERO);
            }
            l + (left - l).log1mexp()
        };
        Ok(value.mul(LogReal::exp_of(width_log))?)
    }

    /// Integral of the first `n` complete pieces via checkpoints.
    fn prefix_sum(&self, n: usize) -> Result<LogReal, StepFnError> {
        if n == 0 {
            return Ok(LogReal::ZERO);
        }
        match self.prefix_table() {
            Prefix::Logs { stride, sums } => {
                let c = n / stride;
                let mut acc = sums[c];
                for j in (c * stride)..n {
                    acc = acc.add(self.dense_piece_integral(j))?;
                }
                Ok(acc)
            }
            Prefix::Plain { stride, sums } => {
                let c = n / stride;
                let mut acc = sums[c];
                if let Pieces::PowerLattice { alpha, .. } = &self.pieces {
                    for j in (c * stride)..n {
                        acc = acc + lattice_value_dd(*alpha, j as u64);
                    }
                }
                if acc.hi <= 0.0 {
                    return Ok(LogReal::ZERO);
                }
                Ok(LogReal::exp_of(acc.ln()))
            }
        }
    }

    fn dense_piece_integral(&self, j: usize) -> LogReal {
        let value = self.value(j);
        if value.is_zero() {
            return LogReal::ZERO;
        }
        let r = self.knot(j);
        let width_log = if j == 0 {
            r
        } else {
            r + (self.knot(j - 1) - r).log1mexp()
        };
        value
            .mul(LogReal::exp_of(width_log))
            .expect("piece integral in range")
    }

    fn prefix_table(&self) -> &Prefix {
        self.prefix.get_or_init(|| match &self.pieces {
            Pieces::Dense { knots, .. } => {
                let stride = knots.len().div_ceil(PREFIX_CHECKPOINTS).max(1);
                let mut sums = Vec::with_capacity(knots.len() / stride + 2);
                let mut acc = LogReal::ZERO;
                sums.push(acc);
                for j in 0..knots.len() {
                    acc = acc
                        .add(self.dense_piece_integral(j))
                        .expect("prefix accumulation of nonnegative pieces");
                    if (j + 1) % stride == 0 {
                        sums.push(acc);
                    }
                }
                Prefix::Logs { stride, sums }
            }
            Pieces::PowerLattice { alpha, count } => {
                let stride = (*count as usize).div_ceil(PREFIX_CHECKPOINTS).max(1);
                let mut sums = Vec::with_capacity(*count as usize / stride + 2);
                let mut acc = Dd::ZERO;
                sums.push(acc);
                for j in 0..*count {
                    acc = acc + lattice_value_dd(*alpha, j);
                    if (j + 1) % stride as u64 == 0 {
                        sums.push(acc);
                    }
                }
                Prefix::Plain { stride, sums }
            }
        })
    }
}

/// `(n+1)^-alpha` as a LogReal.
fn lattice_value(alpha: f64, n: u64) -> LogReal {
    LogReal::exp_of(Dd::from_f64((n + 1) as f64).ln() * (-alpha))
}

/// `(n+1)^-alpha` in plain double-double, for lattice prefix sums whose
/// magnitudes never strain the native exponent range.
fn lattice_value_dd(alpha: f64, n: u64) -> Dd {
    if alpha == 1.0 {
        Dd::ONE / (n + 1) as f64
    } else {
        (Dd::from_f64((n + 1) as f64).ln() * (-alpha)).exp()
    }
}

/// Finite spectrum as complex eigenvalues with multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumModel {
    pub eigenvalues: Vec<Eigenvalue>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
    pub mult: u32,
}

impl Eigenvalue {
    pub fn modulus(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

impl SpectrumModel {
    pub fn new(eigenvalues: Vec<Eigenvalue>) -> SpectrumModel {
        assert!(
            eigenvalues.iter().all(|e| e.mult >= 1),
            "multiplicities must be positive"
        );
        SpectrumModel { eigenvalues }
    }

    /// Total eigenvalue count with multiplicities.
    pub fn count(&self) -> u64 {
        self.eigenvalues.iter().map(|e| e.mult as u64).sum()
    }

    /// Moduli in decreasing order, repeated per multiplicity.
    pub fn sorted_moduli(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.count() as usize);
        for e in &self.eigenvalues {
            for _ in 0..e.mult {
                out.push(e.modulus());
            }
        }
        out.sort_by(|a, b| b.partial_cmp(a).unwrap());
        out
    }
}

/// Analytic continuation of a lattice model beyond its last piece:
/// `mu(s) = exp(log_coeff) * s^-alpha` for `s >= exp(cut_log)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerEnvelope {
    pub alpha: f64,
    pub log_coeff: Dd,
}

/// How far a model faithfully represents its operator: `Exact` models are
/// the operator; truncated ones are reliable only for probe scales
/// `u = log log t` below the stated depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelDepth {
    Exact,
    TruncatedAtU(f64),
}

/// Description of how a gallery model is generated, for operator files.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub name: String,
    pub params: BTreeMap<String, serde_json::Value>,
}

/// An operator model: a singular value function, an optional spectrum, an
/// optional analytic envelope continuing a lattice, and bookkeeping.
#[derive(Debug, Clone)]
pub struct OperatorModel {
    pub label: String,
    pub mu: StepFunction,
    pub envelope: Option<PowerEnvelope>,
    pub spectrum: Option<SpectrumModel>,
    pub depth: ModelDepth,
    pub generator: Option<GeneratorSpec>,
}

impl OperatorModel {
    /// Plain model wrapping a step function with no extras.
    pub fn bare(label: &str, mu: StepFunction) -> OperatorModel {
        OperatorModel {
            label: label.to_string(),
            mu,
            envelope: None,
            spectrum: None,
            depth: ModelDepth::Exact,
            generator: None,
        }
    }

    /// Singular value at `t = exp(l)`, envelope-extended past the lattice.
    pub fn eval_mu(&self, l: Dd) -> LogReal {
        if let Some(env) = &self.envelope {
            if l > self.mu.last_knot() {
                return LogReal::exp_of(env.log_coeff - l * env.alpha);
            }
        }
        self.mu.eval(l)
    }

    /// `int_0^{exp(l)} mu`, using the analytic envelope integral beyond the
    /// lattice when one is declared.
    pub fn integral(&self, l: Dd) -> Result<LogReal, StepFnError> {
        let cut = self.mu.last_knot();
        match &self.envelope {
            Some(env) if l > cut => {
                let head = self.mu.total()?;
                let tail = envelope_integral(env, cut, l, 1.0)?;
                Ok(head.add(tail)?)
            }
            _ => self.mu.integral(l),
        }
    }

    /// Distribution function of the envelope-extended `mu`.
    pub fn distribution(&self, s: LogReal) -> Result<LogReal, StepFnError> {
        assert!(s.sign() > 0, "distribution level must be positive");
        if let Some(env) = &self.envelope {
            let cut = self.mu.last_knot();
            let at_cut = LogReal::exp_of(env.log_coeff - cut * env.alpha);
            if s < at_cut {
                // exp(log_coeff) * s^-alpha > level  iff
                // log s < (log_coeff - logmag(level)) / alpha.
                let l = (env.log_coeff - s.logmag()) / env.alpha;
                return Ok(LogReal::exp_of(l));
            }
        }
        self.mu.distribution(s)
    }

    /// `Tr(T^p) = int mu^p` over the full support, envelope included.
    pub fn power_trace(&self, p: f64) -> Result<LogReal, StepFnError> {
        assert!(p >= 1.0, "power trace requires p >= 1");
        let head = self.mu.power(p).total()?;
        match &self.envelope {
            Some(env) => {
                let cut = self.mu.last_knot();
                let tail = envelope_integral(env, cut, Dd::from_f64(f64::INFINITY), p)?;
                Ok(head.add(tail)?)
            }
            None => Ok(head),
        }
    }

    /// Weyl majorization: partial sums of eigenvalue moduli (decreasing)
    /// never exceed the matching partial integrals of `mu`.
    pub fn validate_weyl(&self) -> bool {
        let Some(spec) = &self.spectrum else {
            return false;
        };
        let moduli = spec.sorted_moduli();
        let mut partial = Accum::default();
        for (n, &m) in moduli.iter().enumerate() {
            partial.add(m);
            let sum = partial.total();
            let bound = match self.mu.integral(Dd::from_f64((n + 1) as f64).ln()) {
                Ok(v) => v.to_f64(),
                Err(_) => return false,
            };
            if sum > bound * (1.0 + 1e-12) + 1e-300 {
                return false;
            }
        }
        true
    }

    /// Probe-depth cap for scale sweeps, as `u = log log t`.
    pub fn truncation_depth_u(&self) -> Option<f64> {
        match self.depth {
            ModelDepth::Exact => None,
            ModelDepth::TruncatedAtU(u) => Some(u),
        }
    }
}

/// `int exp(log_coeff*p) * s^(-alpha*p) ds` from `exp(lo)` to `exp(hi)`
/// (`hi` may be infinite when the exponent `alpha*p > 1`).
fn envelope_integral(
    env: &PowerEnvelope,
    lo: Dd,
    hi: Dd,
    p: f64,
) -> Result<LogReal, StepFnError> {
    let a = env.alpha * p;
    let coeff = env.log_coeff * p;
    if hi.hi.is_infinite() {
        if a <= 1.0 {
            return Err(StepFnError::DivergentTail);
        }
        // coeff / (a-1) * exp((1-a) lo)
        let logmag = coeff - Dd::from_f64(a - 1.0).ln() + lo * (1.0 - a);
        return Ok(LogReal::exp_of(logmag));
    }
    if hi <= lo {
        return Ok(LogReal::ZERO);
    }
    if (a - 1.0).abs() < 1e-15 {
        // int s^-1 = log spacing; the value is coeff * (hi - lo).
        let width = hi - lo;
        return Ok(LogReal::exp_of(coeff + width.ln()));
    }
    let b = 1.0 - a;
    // coeff/|b| * |exp(b hi) - exp(b lo)| with the stable difference form.
    let (anchor, other) = if b > 0.0 { (hi, lo) } else { (lo, hi) };
    let logmag = coeff - Dd::from_f64(b.abs()).ln()
        + anchor * b
        + ((other - anchor) * b).log1mexp();
    Ok(LogReal::exp_of(logmag))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lr(x: f64) -> LogReal {
        LogReal::from_f64(x)
    }

    fn dd(x: f64) -> Dd {
        Dd::from_f64(x)
    }

    /// chi_[0,1): one piece of value 1 ending at log-abscissa 0.
    fn indicator() -> StepFunction {
        StepFunction::from_pieces(vec![Dd::ZERO], vec![LogReal::one()], LogReal::ZERO).unwrap()
    }

    #[test]
    fn construction_validates_shape() {
        let err = StepFunction::from_pieces(vec![dd(0.0)], vec![], LogReal::ZERO).unwrap_err();
        assert!(matches!(err, StepFnError::LengthMismatch { .. }));
        let err = StepFunction::from_pieces(
            vec![dd(1.0), dd(0.5)],
            vec![lr(1.0), lr(0.5)],
            LogReal::ZERO,
        )
        .unwrap_err();
        assert!(matches!(err, StepFnError::NonAscendingKnots(1)));
        let err = StepFunction::from_pieces(
            vec![dd(0.0), dd(1.0)],
            vec![lr(0.5), lr(1.0)],
            LogReal::ZERO,
        )
        .unwrap_err();
        assert!(matches!(err, StepFnError::IncreasingValues(1)));
        let err =
            StepFunction::from_pieces(vec![dd(0.0)], vec![lr(0.5)], lr(0.75)).unwrap_err();
        assert!(matches!(err, StepFnError::TailExceedsLast));
    }

    #[test]
    fn construction_normalizes_degenerate_pieces() {
        // Zero-width piece dropped, equal adjacent values merged, trailing
        // tail-equal piece folded away.
        let f = StepFunction::from_pieces(
            vec![dd(0.0), dd(0.0), dd(1.0), dd(2.0), dd(3.0)],
            vec![lr(1.0), lr(0.9), lr(1.0), lr(1.0), LogReal::ZERO],
            LogReal::ZERO,
        )
        .unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.knot(0), dd(2.0));
        assert_eq!(f.value(0), lr(1.0));
    }

    #[test]
    fn eval_is_right_continuous_with_tail() {
        let f = StepFunction::from_pieces(
            vec![dd(0.0), dd(1.0)],
            vec![lr(1.0), lr(0.5)],
            LogReal::ZERO,
        )
        .unwrap();
        assert_eq!(f.eval(dd(-1.0)), lr(1.0));
        assert_eq!(f.eval(dd(0.0)), lr(0.5));
        assert_eq!(f.eval(dd(0.999)), lr(0.5));
        assert_eq!(f.eval(dd(1.0)), LogReal::ZERO);
        assert_eq!(f.eval(dd(50.0)), LogReal::ZERO);
    }

    #[test]
    fn integral_of_scaled_indicator_is_exact() {
        // mu = exp(-1) on [0, e): integral at l = 1 is exactly 1.
        let f = StepFunction::from_pieces(
            vec![dd(1.0)],
            vec![LogReal::exp_of(dd(-1.0))],
            LogReal::ZERO,
        )
        .unwrap();
        let v = f.integral(dd(1.0)).unwrap();
        assert_eq!(v.sign(), 1);
        assert_eq!(v.logmag(), Dd::ZERO);
        // And the total saturates beyond the support.
        assert_eq!(f.integral(dd(100.0)).unwrap(), v);
    }

    #[test]
    fn integral_of_partial_piece() {
        // mu = 1 on [0,1): integral at log(0.5) is 0.5.
        let f = indicator();
        let v = f.integral(dd(0.5).ln()).unwrap();
        assert!((v.logmag() - dd(0.5).ln()).abs().to_f64() <= 1e-31);
        // Additivity across a knot.
        let g = StepFunction::from_pieces(
            vec![dd(0.0), dd(1.0)],
            vec![lr(1.0), lr(0.25)],
            LogReal::ZERO,
        )
        .unwrap();
        let whole = g.integral(dd(1.0)).unwrap();
        let left = g.integral(dd(0.0)).unwrap();
        let right = left.add(whole.sub(left).unwrap()).unwrap();
        assert!((right.logmag() - whole.logmag()).abs().to_f64() <= 1e-30);
    }

    #[test]
    fn divergent_tail_is_rejected_exactly_past_the_last_knot() {
        let f =
            StepFunction::from_pieces(vec![dd(0.0)], vec![lr(1.0)], lr(0.5)).unwrap();
        assert!(f.integral(dd(0.0)).is_ok());
        assert_eq!(f.integral(dd(0.1)).unwrap_err(), StepFnError::DivergentTail);
    }

    #[test]
    fn distribution_inverts_plateaus() {
        let f = indicator();
        // d(1/2) = 1: the measure where mu exceeds one half.
        let d = f.distribution(lr(0.5)).unwrap();
        assert_eq!(d, LogReal::one());
        // At or above the top plateau the set is empty.
        assert_eq!(f.distribution(lr(1.0)).unwrap(), LogReal::ZERO);
        assert_eq!(f.distribution(lr(7.0)).unwrap(), LogReal::ZERO);
        // Below a nonzero tail the measure is infinite.
        let g = StepFunction::from_pieces(vec![dd(0.0)], vec![lr(1.0)], lr(0.25)).unwrap();
        assert_eq!(
            g.distribution(lr(0.1)).unwrap_err(),
            StepFnError::DivergentTail
        );
    }

    #[test]
    fn lattice_matches_dense_construction() {
        let lat = StepFunction::power_lattice(1.0, 10).unwrap();
        let dense = StepFunction::from_pieces(
            (0..10).map(|i| dd((i + 1) as f64).ln()).collect(),
            (0..10)
                .map(|i| LogReal::exp_of(-dd((i + 1) as f64).ln()))
                .collect(),
            LogReal::ZERO,
        )
        .unwrap();
        for i in 0..10 {
            assert!((lat.knot(i) - dense.knot(i)).abs().to_f64() <= 1e-31);
            let dv = (lat.value(i).logmag() - dense.value(i).logmag()).abs();
            assert!(dv.to_f64() <= 1e-30);
        }
        // Harmonic number H_10 from the lattice integral.
        let h10 = lat.integral(dd(10.0).ln()).unwrap().to_f64();
        assert!((h10 - 2.9289682539682538).abs() <= 1e-15);
        // Distribution counts pieces: d(1/t) at t = 100.5 on a larger lattice.
        let big = StepFunction::power_lattice(1.0, 1000).unwrap();
        let d = big.distribution(lr(1.0 / 100.5)).unwrap();
        assert!((d.to_f64() - 100.0).abs() <= 1e-12);
        // Exact lattice level: strict inequality excludes the boundary piece.
        let d = big.distribution(lr(0.01)).unwrap();
        assert!((d.to_f64() - 99.0).abs() <= 1e-12);
    }

    #[test]
    fn lattice_eval_and_beyond() {
        let lat = StepFunction::power_lattice(2.0, 100).unwrap();
        assert!((lat.eval(dd(0.5).ln()).to_f64() - 1.0).abs() <= 1e-15);
        assert!((lat.eval(dd(5.5).ln()).to_f64() - 1.0 / 36.0).abs() <= 1e-15);
        assert_eq!(lat.eval(dd(200.0).ln()), LogReal::ZERO);
    }

    #[test]
    fn power_scales_values_pointwise() {
        let f = StepFunction::from_pieces(
            vec![dd(1.0)],
            vec![LogReal::exp_of(dd(-1.0))],
            LogReal::ZERO,
        )
        .unwrap();
        let g = f.power(2.0);
        assert_eq!(g.value(0).logmag(), dd(-2.0));
        assert_eq!(g.knot(0), f.knot(0));
        let lat = StepFunction::power_lattice(1.0, 50).unwrap().power(1.5);
        assert!((lat.value(3).to_f64() - 0.25f64.powf(1.5)).abs() <= 1e-15);
    }

    #[test]
    fn dilate_and_exponentiate_move_knots() {
        let f = indicator();
        let half = f.dilate(2.0).unwrap();
        assert!((half.knot(0) + dd(2.0).ln()).abs().to_f64() <= 1e-31);
        let sq = f.exponentiate(2.0).unwrap();
        assert_eq!(sq.knot(0), Dd::ZERO);
        // exponentiate(mu, 2) at l equals mu at 2l.
        let g = StepFunction::from_pieces(
            vec![dd(1.0), dd(3.0)],
            vec![lr(1.0), lr(0.5)],
            LogReal::ZERO,
        )
        .unwrap();
        let ge = g.exponentiate(2.0).unwrap();
        for &l in &[0.2, 0.5, 1.4, 1.5, 2.0] {
            assert_eq!(ge.eval(dd(l)), g.eval(dd(2.0 * l)));
        }
    }

    #[test]
    fn weyl_majorization_cases() {
        let mu = StepFunction::from_pieces(
            vec![dd(1.0f64).ln(), dd(2.0f64).ln()],
            vec![lr(1.0), lr(0.5)],
            LogReal::ZERO,
        )
        .unwrap();
        let mut model = OperatorModel::bare("weyl", mu);
        model.spectrum = Some(SpectrumModel::new(vec![
            Eigenvalue { re: 1.0, im: 0.0, mult: 1 },
            Eigenvalue { re: 0.0, im: 0.5, mult: 1 },
        ]));
        assert!(model.validate_weyl());
        model.spectrum = Some(SpectrumModel::new(vec![Eigenvalue {
            re: 1.0,
            im: 0.0,
            mult: 2,
        }]));
        assert!(!model.validate_weyl());
    }

    #[test]
    fn envelope_extends_lattice_models() {
        // Harmonic-style hybrid: lattice to N = 100, then exactly 1/s.
        let mu = StepFunction::power_lattice(1.0, 100).unwrap();
        let mut model = OperatorModel::bare("hybrid", mu);
        model.envelope = Some(PowerEnvelope {
            alpha: 1.0,
            log_coeff: Dd::ZERO,
        });
        let cut = dd(100.0).ln();
        // Continuity across the cut.
        let inside = model.eval_mu(cut - Dd::from_f64(1e-9));
        let outside = model.eval_mu(cut + Dd::from_f64(1e-9));
        assert!((inside.to_f64() - 0.01).abs() <= 1e-12);
        assert!((outside.to_f64() - 0.01).abs() <= 1e-10);
        // Integral grows like H_100 + (l - log 100).
        let l = dd(1000.0).ln();
        let got = model.integral(l).unwrap().to_f64();
        let h100 = model.mu.total().unwrap().to_f64();
        let want = h100 + (1000.0f64.ln() - 100.0f64.ln());
        assert!((got - want).abs() <= 1e-12 * want);
        // Distribution beyond the lattice follows the envelope inverse.
        let d = model.distribution(lr(1e-4)).unwrap();
        assert!((d.to_f64() - 1e4).abs() <= 1e-6);
        // Power trace: sum of (n+1)^-2 plus the analytic tail integral.
        let tr = model.power_trace(2.0).unwrap().to_f64();
        let head = model.mu.power(2.0).total().unwrap().to_f64();
        assert!((tr - (head + 0.01)).abs() <= 1e-12);
    }

    #[test]
    fn truncation_depth_is_reported() {
        let m = OperatorModel::bare("x", indicator());
        assert_eq!(m.truncation_depth_u(), None);
        let mut t = OperatorModel::bare("y", indicator());
        t.depth = ModelDepth::TruncatedAtU(30.0);
        assert_eq!(t.truncation_depth_u(), Some(30.0));
    }
}
