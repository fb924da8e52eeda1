//! The model gallery: canonical operator models and reference functions.
//!
//! Every generator returns a fully described [`OperatorModel`] carrying its
//! own [`GeneratorSpec`], so a model written to disk can be re-expanded
//! instead of serializing ten million lattice pieces.

use crate::dd::{Accum, Dd};
use crate::logreal::LogReal;
use crate::profiles::{Coord, Profile, RationalForm};
use crate::stepfn::{
    Eigenvalue, GeneratorSpec, ModelDepth, OperatorModel, PowerEnvelope, SpectrumModel,
    StepFnError, StepFunction,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

/// Largest supported lattice, and the cap on oracle summation lengths.
pub const MAX_LATTICE: u64 = 10_000_000;

/// Deepest supported tower-plateau model; beyond this the knot
/// log-abscissae `e^k` leave the range the kernels guarantee.
pub const MAX_TOWER_DEPTH: u32 = 40;

/// Default tower-plateau depth.
pub const DEFAULT_TOWER_DEPTH: u32 = 30;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GalleryError {
    #[error("tower depth {0} out of range (1..={MAX_TOWER_DEPTH})")]
    RangeTooDeep(u32),
    #[error("model size {0} exceeds the lattice cap {MAX_LATTICE}")]
    ModelTooLarge(u64),
    #[error("bad generator parameter: {0}")]
    BadParameter(String),
    #[error("unknown generator: {0}")]
    UnknownGenerator(String),
    #[error(transparent)]
    Step(#[from] StepFnError),
}

/// Law of the random spectra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumLaw {
    /// Uniform on the unit disc.
    Disc,
    /// Uniform on the annulus with radii 1/2 and 1.
    Annulus,
    /// Uniform real eigenvalues on [-1, 1].
    RealLine,
}

impl SpectrumLaw {
    pub fn parse(s: &str) -> Option<SpectrumLaw> {
        match s {
            "disc" => Some(SpectrumLaw::Disc),
            "annulus" => Some(SpectrumLaw::Annulus),
            "real-line" => Some(SpectrumLaw::RealLine),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SpectrumLaw::Disc => "disc",
            SpectrumLaw::Annulus => "annulus",
            SpectrumLaw::RealLine => "real-line",
        }
    }
}

/// Tower-plateau model: value `exp(k - e^k)` on `s in [e^{e^{k-1}}, e^{e^k})`
/// for `k = 1..=k_max`, preceded by `exp(-1)` on `[0, e)`, zero beyond. Its
/// scale profile is the canonical example that oscillates along plain
/// geometric scales yet settles along double-exponential towers. The model
/// is faithful for probes up to `u = log log t = k_max`.
pub fn make_t0(k_max: u32) -> Result<Arc<OperatorModel>, GalleryError> {
    if k_max < 1 || k_max > MAX_TOWER_DEPTH {
        return Err(GalleryError::RangeTooDeep(k_max));
    }
    let mut knots = Vec::with_capacity(k_max as usize + 1);
    let mut values = Vec::with_capacity(k_max as usize + 1);
    knots.push(Dd::ONE);
    values.push(LogReal::exp_of(-Dd::ONE));
    for k in 1..=k_max {
        let kd = Dd::from_f64(k as f64);
        knots.push(kd.exp());
        values.push(LogReal::exp_of(kd - kd.exp()));
    }
    let mu = StepFunction::from_pieces(knots, values, LogReal::ZERO)?;
    let mut params = BTreeMap::new();
    params.insert("k_max".to_string(), serde_json::json!(k_max));
    Ok(Arc::new(OperatorModel {
        label: "t0".to_string(),
        mu,
        envelope: None,
        spectrum: None,
        depth: ModelDepth::TruncatedAtU(k_max as f64),
        generator: Some(GeneratorSpec {
            name: "t0".to_string(),
            params,
        }),
    }))
}

/// Harmonic model: `mu_n = 1/(n+1)` on the integer lattice up to `n_max`,
/// continued by the exact envelope `1/s`. The envelope makes the model
/// faithful at every depth.
pub fn make_harmonic(n_max: u64) -> Result<Arc<OperatorModel>, GalleryError> {
    make_power_named(1.0, n_max, "harmonic".to_string(), "harmonic", |params| {
        params.insert("n_max".to_string(), serde_json::json!(n_max));
    })
}

/// Power model: `mu_n = (n+1)^-alpha` with `alpha >= 1`, enveloped by
/// `s^-alpha`.
pub fn make_power(alpha: f64, n_max: u64) -> Result<Arc<OperatorModel>, GalleryError> {
    if !(alpha >= 1.0 && alpha <= 40.0) {
        return Err(GalleryError::BadParameter(format!(
            "power exponent {alpha} must lie in [1, 40]"
        )));
    }
    make_power_named(alpha, n_max, format!("power({alpha})"), "power", |params| {
        params.insert("alpha".to_string(), serde_json::json!(alpha));
        params.insert("n_max".to_string(), serde_json::json!(n_max));
    })
}

fn make_power_named(
    alpha: f64,
    n_max: u64,
    label: String,
    generator: &str,
    fill: impl FnOnce(&mut BTreeMap<String, serde_json::Value>),
) -> Result<Arc<OperatorModel>, GalleryError> {
    if n_max == 0 {
        return Err(GalleryError::BadParameter(
            "lattice needs at least one piece".to_string(),
        ));
    }
    if n_max > MAX_LATTICE {
        return Err(GalleryError::ModelTooLarge(n_max));
    }
    let mu = StepFunction::power_lattice(alpha, n_max)?;
    let mut params = BTreeMap::new();
    fill(&mut params);
    Ok(Arc::new(OperatorModel {
        label,
        mu,
        envelope: Some(PowerEnvelope {
            alpha,
            log_coeff: Dd::ZERO,
        }),
        spectrum: None,
        depth: ModelDepth::Exact,
        generator: Some(GeneratorSpec {
            name: generator.to_string(),
            params,
        }),
    }))
}

/// Plateau model: explicit values on the unit lattice, value `seq[i]` on
/// `[i, i+1)`, zero beyond. `plateau([1])` is the unit indicator.
pub fn make_plateau(seq: &[f64]) -> Result<Arc<OperatorModel>, GalleryError> {
    if seq.is_empty() {
        return Err(GalleryError::BadParameter(
            "plateau needs at least one value".to_string(),
        ));
    }
    if seq.len() as u64 > MAX_LATTICE {
        return Err(GalleryError::ModelTooLarge(seq.len() as u64));
    }
    if let Some(bad) = seq.iter().find(|v| !v.is_finite()) {
        return Err(GalleryError::BadParameter(format!(
            "plateau value {bad} is not finite"
        )));
    }
    let knots = (0..seq.len())
        .map(|i| Dd::from_f64((i + 1) as f64).ln())
        .collect();
    let values = seq.iter().map(|&v| LogReal::from_f64(v)).collect();
    let mu = StepFunction::from_pieces(knots, values, LogReal::ZERO)?;
    let mut params = BTreeMap::new();
    params.insert("seq".to_string(), serde_json::json!(seq));
    Ok(Arc::new(OperatorModel {
        label: "plateau".to_string(),
        mu,
        envelope: None,
        spectrum: None,
        depth: ModelDepth::Exact,
        generator: Some(GeneratorSpec {
            name: "plateau".to_string(),
            params,
        }),
    }))
}

/// Random finite spectrum under the given law, with the singular value
/// function built from the sorted moduli. Deterministic in the seed.
pub fn make_random_spectrum(
    seed: u64,
    n: u32,
    law: SpectrumLaw,
) -> Result<Arc<OperatorModel>, GalleryError> {
    if n == 0 || n as u64 > MAX_LATTICE {
        return Err(GalleryError::ModelTooLarge(n as u64));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut eigenvalues = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let (re, im) = match law {
            SpectrumLaw::Disc => {
                let theta = std::f64::consts::TAU * rng.random::<f64>();
                let rad = rng.random::<f64>().sqrt();
                (rad * theta.cos(), rad * theta.sin())
            }
            SpectrumLaw::Annulus => {
                let theta = std::f64::consts::TAU * rng.random::<f64>();
                let rad = (0.25 + 0.75 * rng.random::<f64>()).sqrt();
                (rad * theta.cos(), rad * theta.sin())
            }
            SpectrumLaw::RealLine => (2.0 * rng.random::<f64>() - 1.0, 0.0),
        };
        eigenvalues.push(Eigenvalue { re, im, mult: 1 });
    }
    let spectrum = SpectrumModel::new(eigenvalues);
    let mut moduli = spectrum.sorted_moduli();
    moduli.retain(|m| *m > 0.0);
    if moduli.is_empty() {
        return Err(GalleryError::BadParameter(
            "spectrum degenerated to zero".to_string(),
        ));
    }
    let knots = (0..moduli.len())
        .map(|i| Dd::from_f64((i + 1) as f64).ln())
        .collect();
    let values = moduli.iter().map(|&m| LogReal::from_f64(m)).collect();
    let mu = StepFunction::from_pieces(knots, values, LogReal::ZERO)?;
    let mut params = BTreeMap::new();
    params.insert("seed".to_string(), serde_json::json!(seed));
    params.insert("n".to_string(), serde_json::json!(n));
    params.insert("law".to_string(), serde_json::json!(law.name()));
    Ok(Arc::new(OperatorModel {
        label: format!("random({},{seed})", law.name()),
        mu,
        envelope: None,
        spectrum: Some(spectrum),
        depth: ModelDepth::Exact,
        generator: Some(GeneratorSpec {
            name: "random_spectrum".to_string(),
            params,
        }),
    }))
}

/// Re-expands a generator description into its model. Operator files store
/// descriptions instead of materialized lattices; this is their inverse.
pub fn expand(spec: &GeneratorSpec) -> Result<Arc<OperatorModel>, GalleryError> {
    match spec.name.as_str() {
        "t0" => make_t0(param_u64(spec, "k_max")? as u32),
        "harmonic" => make_harmonic(param_u64(spec, "n_max")?),
        "power" => make_power(param_f64(spec, "alpha")?, param_u64(spec, "n_max")?),
        "plateau" => {
            let raw = spec
                .params
                .get("seq")
                .and_then(|v| v.as_array())
                .ok_or_else(|| GalleryError::BadParameter("plateau.seq".to_string()))?;
            let seq: Option<Vec<f64>> = raw.iter().map(|v| v.as_f64()).collect();
            make_plateau(&seq.ok_or_else(|| GalleryError::BadParameter("plateau.seq".to_string()))?)
        }
        "random_spectrum" => {
            let law_name = spec
                .params
                .get("law")
                .and_then(|v| v.as_str())
                .ok_or_else(|| GalleryError::BadParameter("random_spectrum.law".to_string()))?;
            let law = SpectrumLaw::parse(law_name)
                .ok_or_else(|| GalleryError::BadParameter(format!("law {law_name:?}")))?;
            make_random_spectrum(
                param_u64(spec, "seed")?,
                param_u64(spec, "n")? as u32,
                law,
            )
        }
        other => Err(GalleryError::UnknownGenerator(other.to_string())),
    }
}

fn param_u64(spec: &GeneratorSpec, key: &str) -> Result<u64, GalleryError> {
    spec.params
        .get(key)
        .and_then(|v| v.as_u64())
        .ok_or_else(|| GalleryError::BadParameter(format!("{}.{key}", spec.name)))
}

fn param_f64(spec: &GeneratorSpec, key: &str) -> Result<f64, GalleryError> {
    spec.params
        .get(key)
        .and_then(|v| v.as_f64())
        .ok_or_else(|| GalleryError::BadParameter(format!("{}.{key}", spec.name)))
}

/// The reference oscillator: `x(t) = (e/(e-1)) e^k / log t` on
/// `t in [e^{e^k}, e^{e^{k+1}})`. In the tower coordinate it is the periodic
/// function `(e/(e-1)) e^{k-u}` on `[k, k+1)` whose mean over any period is
/// exactly 1; translation invariance of a generalized limit forces value 1
/// on it, which makes it the standard probe for exponentiation-invariant
/// averaging.
pub fn make_x_function() -> Profile {
    let e_dd = Dd::ONE.exp();
    let log_c = Dd::ONE - (e_dd - Dd::ONE).ln();
    let mut cuts = Vec::new();
    let mut pieces = Vec::new();
    for k in 0..=41u32 {
        let kd = Dd::from_f64(k as f64);
        cuts.push(kd.exp());
        pieces.push(RationalForm {
            a: LogReal::exp_of(log_c + kd),
            b: LogReal::ZERO,
            beta: Dd::ZERO,
            c: LogReal::ZERO,
            denom: crate::profiles::Denom::LogArg,
            arg_scale: Dd::ONE,
            negate: false,
        });
    }
    let end = Some(Dd::from_f64(42.0).exp());
    Profile::from_rational(Coord::U, cuts, pieces, end, "x-function")
}

/// Series the independent oracle can sum: plain `f64` compensated partial
/// sums, kept deliberately separate from the log-domain kernels so the two
/// implementations can check each other.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleSeries {
    /// `sum 1/k`.
    Harmonic,
    /// `sum k^-alpha`.
    Power(f64),
    /// `sum k^-p` with `p` near 1, as zeta-style traces use.
    Zeta(f64),
}

/// Compensated partial sum of the series over `k = 1..=n`.
pub fn oracle_partial_sum(series: OracleSeries, n: u64) -> f64 {
    assert!(n >= 1 && n <= MAX_LATTICE, "oracle length out of range");
    let mut acc = Accum::default();
    for k in 1..=n {
        let term = match series {
            OracleSeries::Harmonic => 1.0 / k as f64,
            OracleSeries::Power(alpha) => (k as f64).powf(-alpha),
            OracleSeries::Zeta(p) => (k as f64).powf(-p),
        };
        acc.add(term);
    }
    acc.total()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::dixmier_profile;

    #[test]
    fn tower_plateau_shape_is_frozen() {
        let m = make_t0(10).unwrap();
        assert_eq!(m.mu.len(), 11);
        assert_eq!(m.mu.knot(0), Dd::ONE);
        assert_eq!(m.mu.value(0).logmag(), -Dd::ONE);
        // Piece 2 carries exp(2 - e^2).
        let want = Dd::parse("-5.38905609893065022723042746057500781").unwrap();
        assert!((m.mu.value(2).logmag() - want).abs().to_f64() <= 1e-31);
        assert_eq!(m.truncation_depth_u(), Some(10.0));
    }

    #[test]
    fn tower_plateau_integrals_match_the_closed_sums() {
        let m = make_t0(12).unwrap();
        let cases = [
            (3.0, "30.6360254262067157197002880123457025"),
            (7.0, "1733.70928648312122404556582364983748"),
            (10.0, "34844.2169959069500234570552578197305"),
        ];
        for (n, want) in cases {
            let got = m.integral(Dd::from_f64(n).exp()).unwrap();
            let want = Dd::parse(want).unwrap().ln();
            assert!(
                (got.logmag() - want).abs().to_f64() <= 1e-30,
                "integral at tower {n}"
            );
        }
    }

    #[test]
    fn tower_plateau_rejects_out_of_range_depths() {
        assert_eq!(make_t0(0).unwrap_err(), GalleryError::RangeTooDeep(0));
        assert_eq!(make_t0(41).unwrap_err(), GalleryError::RangeTooDeep(41));
    }

    #[test]
    fn tower_scale_profile_hits_frozen_values() {
        let m = make_t0(12).unwrap();
        let s = dixmier_profile(&m);
        // At t = exp(exp(n)) the profile approaches e/(e-1) like e^-n.
        let v7 = s.eval_ell(Dd::from_f64(7.0).exp()).unwrap();
        assert!((v7 - 1.5809382318583464).abs() <= 1e-14);
        let v10 = s.eval_ell(Dd::from_f64(10.0).exp()).unwrap();
        assert!((v10 - 1.5819250042429564).abs() <= 1e-14);
        assert!((v7 - 1.5819767068693265).abs() <= 5.0 * (-7.0f64).exp());
        // Midpoint of two towers: l = e^8 - log 2 + log(1 + exp(e^7 - e^8)).
        let l7 = Dd::from_f64(7.0).exp();
        let l8 = Dd::from_f64(8.0).exp();
        let lmid = l8 + (l7 - l8).log1pexp() - crate::dd::LN2;
        let vmid = s.eval_ell(lmid).unwrap();
        assert!((vmid - 1.0818462295297823).abs() <= 1e-13);
    }

    #[test]
    fn harmonic_model_is_exact_to_depth() {
        let m = make_harmonic(MAX_LATTICE).unwrap();
        assert_eq!(m.truncation_depth_u(), None);
        let h = m.integral(Dd::from_f64(1e6).ln()).unwrap().to_f64();
        assert!((h - 14.392726722865724).abs() <= 1e-12);
        let s = dixmier_profile(&m);
        let v = s.eval_ell(Dd::from_f64(1e6).ln()).unwrap();
        assert!((v - 1.0417802238071468).abs() <= 1e-12);
        assert!(matches!(
            make_harmonic(MAX_LATTICE + 1).unwrap_err(),
            GalleryError::ModelTooLarge(_)
        ));
    }

    #[test]
    fn power_model_envelope_continues_the_lattice() {
        let m = make_power(2.0, 100).unwrap();
        let inside = m.eval_mu(Dd::from_f64(5.5).ln()).to_f64();
        assert!((inside - 1.0 / 36.0).abs() <= 1e-17);
        let outside = m.eval_mu(Dd::from_f64(200.0).ln()).to_f64();
        assert!((outside - 2.5e-5).abs() <= 1e-19);
        assert!(matches!(
            make_power(0.9, 10).unwrap_err(),
            GalleryError::BadParameter(_)
        ));
    }

    #[test]
    fn plateau_models_validate_and_integrate() {
        let m = make_plateau(&[3.0, 1.0]).unwrap();
        let v = m.integral(Dd::from_f64(2.0).ln()).unwrap().to_f64();
        assert!((v - 4.0).abs() <= 1e-15);
        assert!(matches!(
            make_plateau(&[]).unwrap_err(),
            GalleryError::BadParameter(_)
        ));
        assert!(matches!(
            make_plateau(&[1.0, 2.0]).unwrap_err(),
            GalleryError::Step(StepFnError::IncreasingValues(1))
        ));
    }

    #[test]
    fn random_spectra_are_deterministic_and_lawful() {
        for law in [SpectrumLaw::Disc, SpectrumLaw::Annulus, SpectrumLaw::RealLine] {
            let a = make_random_spectrum(7, 200, law).unwrap();
            let b = make_random_spectrum(7, 200, law).unwrap();
            let sa = a.spectrum.as_ref().unwrap();
            let sb = b.spectrum.as_ref().unwrap();
            assert_eq!(sa.eigenvalues, sb.eigenvalues, "law {law:?}");
            assert!(a.validate_weyl(), "law {law:?}");
            for e in &sa.eigenvalues {
                let m = e.modulus();
                match law {
                    SpectrumLaw::Disc => assert!(m <= 1.0),
                    SpectrumLaw::Annulus => assert!(m >= 0.5 && m <= 1.0),
                    SpectrumLaw::RealLine => assert!(e.im == 0.0 && m <= 1.0),
                }
            }
        }
        let a = make_random_spectrum(7, 50, SpectrumLaw::Disc).unwrap();
        let c = make_random_spectrum(8, 50, SpectrumLaw::Disc).unwrap();
        assert_ne!(
            a.spectrum.as_ref().unwrap().eigenvalues,
            c.spectrum.as_ref().unwrap().eigenvalues
        );
    }

    #[test]
    fn generator_specs_round_trip_through_expand() {
        let originals = vec![
            make_t0(5).unwrap(),
            make_harmonic(1000).unwrap(),
            make_power(1.5, 500).unwrap(),
            make_plateau(&[2.0, 1.0, 0.5]).unwrap(),
            make_random_spectrum(42, 64, SpectrumLaw::Annulus).unwrap(),
        ];
        for m in originals {
            let again = expand(m.generator.as_ref().unwrap()).unwrap();
            assert_eq!(again.label, m.label);
            assert_eq!(again.mu.len(), m.mu.len());
            let l = m.mu.last_knot();
            assert_eq!(
                again.integral(l).unwrap().to_f64(),
                m.integral(l).unwrap().to_f64()
            );
            assert_eq!(
                again.spectrum.as_ref().map(|s| &s.eigenvalues),
                m.spectrum.as_ref().map(|s| &s.eigenvalues)
            );
        }
        let unknown = GeneratorSpec {
            name: "mystery".to_string(),
            params: BTreeMap::new(),
        };
        assert!(matches!(
            expand(&unknown).unwrap_err(),
            GalleryError::UnknownGenerator(_)
        ));
    }

    #[test]
    fn x_function_is_periodic_in_the_tower_coordinate() {
        let x = make_x_function();
        assert_eq!(x.coord(), Coord::U);
        assert_eq!(x.meta.provenance, "x-function");
        // At integer u the value is exactly e/(e-1); the pieces differ but
        // the ratio e^k / e^u cancels.
        let c = 1.5819767068693265;
        for &u in &[0.0f64, 1.0, 7.0, 19.0, 40.0] {
            assert!((x.eval(u).unwrap() - c).abs() <= 1e-14, "u = {u}");
        }
        // Half a phase in: c * e^-0.5, identically in every period.
        for &u in &[0.5f64, 9.5, 33.5] {
            assert!((x.eval(u).unwrap() - 0.9595173756674719).abs() <= 1e-14);
        }
    }

    #[test]
    fn oracle_sums_match_frozen_references() {
        let h10 = oracle_partial_sum(OracleSeries::Harmonic, 10);
        assert!((h10 - 2.9289682539682538).abs() <= 1e-15);
        let z = oracle_partial_sum(OracleSeries::Zeta(1.01), 1000);
        assert!((z - 7.2529798073992707).abs() / 7.25 <= 1e-14);
        let same = oracle_partial_sum(OracleSeries::Power(1.01), 1000);
        assert_eq!(z, same);
    }
}
