//! Eigenvalue partial sums over spectral regions.
//!
//! For a finite spectrum and a probe scale `t`, the sums run over eigenvalues
//! selected by a strict threshold `1/t`: inside the full modulus circle, the
//! union of the two coordinate bands, or a single band. Comparing the sums
//! across regions bounds how much the trace functional can depend on the
//! region shape; the bounds are provable pointwise and are verified over
//! random spectra elsewhere.

use crate::dd::{Accum, Dd};
use crate::profiles::{Coord, Expr, Profile, ProfileError, ProfileMeta};
use crate::stepfn::{OperatorModel, SpectrumModel};
use std::sync::Arc;

/// Region of the complex plane whose eigenvalues enter the sum, all defined
/// by strict comparison against the threshold `1/t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// `|lambda| > 1/t`.
    Circle,
    /// `|Re lambda| > 1/t` or `|Im lambda| > 1/t`.
    RectUnion,
    /// `|Re lambda| > 1/t`.
    ReOnly,
    /// `|Im lambda| > 1/t`.
    ImOnly,
}

impl Region {
    pub fn parse(s: &str) -> Option<Region> {
        match s {
            "circle" => Some(Region::Circle),
            "rect-union" => Some(Region::RectUnion),
            "re-only" => Some(Region::ReOnly),
            "im-only" => Some(Region::ImOnly),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Region::Circle => "circle",
            Region::RectUnion => "rect-union",
            Region::ReOnly => "re-only",
            Region::ImOnly => "im-only",
        }
    }
}

/// Which component of the complex sum a profile reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComplexPart {
    Re,
    Im,
}

/// Which coordinate a counting function thresholds on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountKind {
    Modulus,
    RePart,
    ImPart,
}

/// Strict threshold `1/t` at `l = log t`. Underflow to zero is exactly the
/// right limit: at depths beyond the floating range every nonzero entry
/// clears the threshold.
fn threshold(ell: f64) -> f64 {
    (-ell).exp()
}

fn in_region(re: f64, im: f64, region: Region, s: f64) -> bool {
    match region {
        Region::Circle => re.hypot(im) > s,
        Region::RectUnion => re.abs() > s || im.abs() > s,
        Region::ReOnly => re.abs() > s,
        Region::ImOnly => im.abs() > s,
    }
}

/// Sum of eigenvalues (with multiplicity) inside the region at scale
/// `t = exp(ell)`, returned as `(re, im)` with compensated accumulation.
pub fn region_sum(spectrum: &SpectrumModel, region: Region, ell: f64) -> (f64, f64) {
    let s = threshold(ell);
    let mut re_sum = Accum::default();
    let mut im_sum = Accum::default();
    for e in &spectrum.eigenvalues {
        if in_region(e.re, e.im, region, s) {
            let m = e.mult as f64;
            re_sum.add(e.re * m);
            im_sum.add(e.im * m);
        }
    }
    (re_sum.total(), im_sum.total())
}

/// Number of eigenvalues (with multiplicity) whose chosen coordinate
/// strictly exceeds `1/t`.
pub fn count_above(spectrum: &SpectrumModel, kind: CountKind, ell: f64) -> u64 {
    let s = threshold(ell);
    spectrum
        .eigenvalues
        .iter()
        .filter(|e| match kind {
            CountKind::Modulus => e.re.hypot(e.im) > s,
            CountKind::RePart => e.re.abs() > s,
            CountKind::ImPart => e.im.abs() > s,
        })
        .map(|e| e.mult as u64)
        .sum()
}

/// Pointwise region-comparison bounds at scale `t = exp(ell)`:
///
/// * circle vs band-union: `|sum_circle - sum_rect| <= (2/t) d(1/t)` with
///   `d` the modulus counting function (set difference elements have modulus
///   at most `sqrt(2)/t` and there are at most `d(1/t)` of them);
/// * real band vs union: `|Re(sum_re) - Re(sum_rect)| <= (1/t) d_im(1/t)`
///   (difference elements have `|Re| <= 1/t` and all carry `|Im| > 1/t`).
///
/// Returns true when both hold within the stated relative slack.
pub fn region_bounds_hold(spectrum: &SpectrumModel, ell: f64, slack: f64) -> bool {
    let s = threshold(ell);
    let (cr, ci) = region_sum(spectrum, Region::Circle, ell);
    let (rr, ri) = region_sum(spectrum, Region::RectUnion, ell);
    let gap = (cr - rr).hypot(ci - ri);
    let d_mod = count_above(spectrum, CountKind::Modulus, ell) as f64;
    if gap > 2.0 * s * d_mod * (1.0 + slack) + 1e-300 {
        return false;
    }
    let (er, _) = region_sum(spectrum, Region::ReOnly, ell);
    let d_im = count_above(spectrum, CountKind::ImPart, ell) as f64;
    if (er - rr).abs() > s * d_im * (1.0 + slack) + 1e-300 {
        return false;
    }
    true
}

/// Builds the `(re, im)` profile pair of normalized Lidskii sums
/// `sum lambda / log(1+t)` over the region. Needs a spectrum on the model.
pub fn lidskii_profile(
    model: &Arc<OperatorModel>,
    region: Region,
) -> Result<(Profile, Profile), ProfileError> {
    if model.spectrum.is_none() {
        return Err(ProfileError::MissingSpectrum(model.label.clone()));
    }
    let end = model
        .truncation_depth_u()
        .map(|u| Dd::from_f64(u).exp());
    let make = |part: ComplexPart, tag: &str| {
        Profile::whole_line(
            Coord::U,
            Expr::Lidskii {
                model: Arc::clone(model),
                region,
                part,
            },
            end,
            ProfileMeta {
                provenance: format!("lidskii-{}-{}({})", region.name(), tag, model.label),
                error_bound: 0.0,
            },
        )
    };
    Ok((make(ComplexPart::Re, "re"), make(ComplexPart::Im, "im")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stepfn::Eigenvalue;

    fn spectrum() -> SpectrumModel {
        SpectrumModel::new(vec![
            Eigenvalue { re: 1.0, im: 0.0, mult: 1 },
            Eigenvalue { re: 0.0, im: 0.6, mult: 1 },
            Eigenvalue { re: 0.3, im: 0.3, mult: 1 },
            Eigenvalue { re: -0.2, im: 0.0, mult: 1 },
        ])
    }

    #[test]
    fn region_sums_respect_strict_thresholds() {
        let sp = spectrum();
        // Threshold 1/t = 1/2: only the two large eigenvalues qualify, in
        // both the circle and the band union.
        let ell = 2.0f64.ln();
        assert_eq!(region_sum(&sp, Region::Circle, ell), (1.0, 0.6));
        assert_eq!(region_sum(&sp, Region::RectUnion, ell), (1.0, 0.6));
        assert_eq!(count_above(&sp, CountKind::Modulus, ell), 2);
        // Threshold 0.31 separates the regions: 0.3 + 0.3i has modulus
        // 0.424 (inside the circle) but both coordinates below the band.
        let ell = -(0.31f64.ln());
        let (cr, ci) = region_sum(&sp, Region::Circle, ell);
        assert!((cr - 1.3).abs() <= 1e-15 && (ci - 0.9).abs() <= 1e-15);
        assert_eq!(region_sum(&sp, Region::RectUnion, ell), (1.0, 0.6));
        assert_eq!(count_above(&sp, CountKind::Modulus, ell), 3);
        assert_eq!(count_above(&sp, CountKind::ImPart, ell), 1);
    }

    #[test]
    fn boundary_values_are_excluded() {
        let sp = SpectrumModel::new(vec![Eigenvalue { re: 0.5, im: 0.0, mult: 3 }]);
        // exp(-log 2) reproduces 0.5 exactly, so the strict comparison
        // excludes the eigenvalue at its own threshold.
        let ell = 2.0f64.ln();
        assert_eq!((-ell).exp(), 0.5);
        assert_eq!(region_sum(&sp, Region::Circle, ell), (0.0, 0.0));
        // Just past the threshold all three copies enter.
        let ell = 2.1f64.ln();
        assert_eq!(region_sum(&sp, Region::Circle, ell), (1.5, 0.0));
    }

    #[test]
    fn deep_scales_saturate_to_the_full_trace() {
        let sp = spectrum();
        // At l = exp(20) the threshold underflows and every nonzero
        // eigenvalue is included.
        let ell = 20.0f64.exp();
        let (re, im) = region_sum(&sp, Region::Circle, ell);
        assert!((re - 1.1).abs() <= 1e-15);
        assert!((im - 0.9).abs() <= 1e-15);
        assert_eq!(region_sum(&sp, Region::RectUnion, ell), (re, im));
    }

    #[test]
    fn comparison_bounds_hold_across_scales() {
        let sp = spectrum();
        for k in -20..200 {
            let ell = 0.1 * k as f64;
            assert!(region_bounds_hold(&sp, ell, 1e-12), "violated at ell={ell}");
        }
    }

    #[test]
    fn profile_pair_normalizes_by_the_log() {
        use crate::stepfn::StepFunction;
        let mu = StepFunction::power_lattice(1.0, 16).unwrap();
        let mut m = OperatorModel::bare("spec", mu);
        m.spectrum = Some(spectrum());
        let m = Arc::new(m);
        let (re, im) = lidskii_profile(&m, Region::Circle).unwrap();
        assert_eq!(re.meta.provenance, "lidskii-circle-re(spec)");
        // At t = 2 the sum is 1 + 0.6i and the normalizer log 3.
        let l = Dd::from_f64(2.0).ln();
        let expect_re = 1.0 / 3.0f64.ln();
        let expect_im = 0.6 / 3.0f64.ln();
        assert!((re.eval_ell(l).unwrap() - expect_re).abs() <= 1e-15);
        assert!((im.eval_ell(l).unwrap() - expect_im).abs() <= 1e-15);
        // Without a spectrum the construction refuses.
        let bare = Arc::new(OperatorModel::bare(
            "none",
            StepFunction::power_lattice(1.0, 4).unwrap(),
        ));
        assert!(matches!(
            lidskii_profile(&bare, Region::Circle).unwrap_err(),
            ProfileError::MissingSpectrum(_)
        ));
    }
}
