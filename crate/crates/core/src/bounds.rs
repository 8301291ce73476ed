//! Upper bounds on the Hölder regularity of a compactly supported solution
//! and their aggregation into a report.

use std::cmp::Ordering;
use std::fmt::{self, Write as _};

use log::info;
use serde::{Deserialize, Serialize};

use crate::equation::{validate, Diagnostics, EquationDocument, RefinementEquation};
use crate::error::{Error, Result};
use crate::fourier::{self, DecayEstimate};
use crate::hull::{extremal_subset, sample_directions};
use crate::iterate::{scan_directions, EvidenceRecord};
use crate::linalg;
use crate::scalar::{Scalar, FLOAT_TIE_TOL};

pub const NO_SMOOTHNESS: &str = "no positive smoothness certified";
pub const EMPIRICAL_CERTIFICATE: &str = "empirical certificate";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Crude,
    Eigen,
    Refined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Evidence {
    Crude {
        /// Smallest `|c_d|` over hull vertices of `D`.
        b: f64,
        tau: f64,
        extremal_indices: Vec<usize>,
    },
    Eigen {
        lambda: f64,
        w: Vec<f64>,
        maximizer: usize,
        /// `None` when `D` has a single point.
        gap: Option<f64>,
    },
    Refined {
        best: Option<EvidenceRecord>,
        m_max: usize,
        dir_count: usize,
        r0: f64,
        rows_considered: usize,
        degenerate_rows: usize,
        reason: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub kind: BoundKind,
    /// Absent only for a refined bound with no qualifying evidence.
    pub value: Option<f64>,
    pub evidence: Evidence,
    pub interpretation: String,
}

impl BoundValue {
    fn new(kind: BoundKind, value: Option<f64>, evidence: Evidence) -> Self {
        // Keeps `-0.0` out of the output.
        let value = value.map(|v| v + 0.0);
        let mut parts = Vec::new();
        if kind == BoundKind::Refined {
            parts.push(EMPIRICAL_CERTIFICATE.to_string());
        }
        match value {
            Some(v) if v <= 0.0 => parts.push(NO_SMOOTHNESS.to_string()),
            Some(_) => parts.push("upper bound on Hölder regularity".to_string()),
            None => parts.push("no qualifying evidence".to_string()),
        }
        BoundValue {
            kind,
            value,
            evidence,
            interpretation: parts.join("; "),
        }
    }

    pub fn certifies_nothing(&self) -> bool {
        self.value.is_some_and(|v| v <= 0.0)
    }
}

/// `ln b / ln τ` with `b = min |c_d|` over the hull vertices of `D`.
pub fn crude_bound(eq: &RefinementEquation, tol: f64) -> Result<BoundValue> {
    let tau = linalg::spectral_radius_inverse(eq, tol)?.tau;
    let extremal = extremal_subset(eq.translations())?;
    let c = eq.coefficients();
    let b = extremal
        .iter()
        .map(|&i| c[i].abs())
        .fold(f64::INFINITY, f64::min);
    Ok(BoundValue::new(
        BoundKind::Crude,
        Some(b.ln() / tau.ln()),
        Evidence::Crude {
            b,
            tau,
            extremal_indices: extremal,
        },
    ))
}

/// `ln|c_{d_w}| / ln(1/|λ|)` for every real eigenpair `(λ, ±w)` of `Aᵀ`
/// whose maximizer `d_w` over `D` is strict.
pub fn eigen_bounds(eq: &RefinementEquation, tol: f64) -> Result<Vec<BoundValue>> {
    let pairs = linalg::real_eigenpairs_transpose(eq, tol)?;
    let points: Vec<Vec<f64>> = eq
        .translations()
        .iter()
        .map(|d| d.iter().map(Scalar::to_f64).collect())
        .collect();
    let c = eq.coefficients();
    let mut out = Vec::new();
    for pair in pairs {
        let mut proj: Vec<(f64, usize)> = points
            .iter()
            .enumerate()
            .map(|(i, d)| (d.iter().zip(&pair.eigenvector).map(|(a, b)| a * b).sum(), i))
            .collect();
        proj.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let gap = proj.get(1).map(|p| proj[0].0 - p.0);
        if let Some(g) = gap {
            let scale = 1f64.max(proj[0].0.abs()).max(proj[1].0.abs());
            if g <= FLOAT_TIE_TOL * scale {
                info!(
                    "eigen bound skipped for lambda = {}: translations {} and {} tie",
                    pair.eigenvalue, proj[0].1, proj[1].1
                );
                continue;
            }
        }
        let maximizer = proj[0].1;
        out.push(BoundValue::new(
            BoundKind::Eigen,
            Some(c[maximizer].abs().ln() / -pair.eigenvalue.abs().ln()),
            Evidence::Eigen {
                lambda: pair.eigenvalue,
                w: pair.eigenvector,
                maximizer,
                gap,
            },
        ));
    }
    Ok(out)
}

/// Minimum of `ln|Π c_{d_j}| / (m ln τ)` over sampled directions and levels
/// `m ≤ m_max` whose gap `g_m(u)` exceeds `r0`. Directions with a tied
/// maximizer or runner-up at a level are skipped there.
pub fn refined_bound(
    eq: &RefinementEquation,
    m_max: usize,
    dir_count: usize,
    r0: f64,
    seed: u64,
    tol: f64,
) -> Result<BoundValue> {
    if m_max == 0 || dir_count == 0 {
        return Err(Error::InvalidArgument(
            "m_max and dir_count must be positive".into(),
        ));
    }
    if !(r0 >= 0.0 && r0.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "r0 must be finite and nonnegative, got {r0}"
        )));
    }
    let tau = linalg::spectral_radius_inverse(eq, tol)?.tau;
    let dirs = sample_directions(eq.dim(), dir_count, seed);
    let threshold = Scalar::from_f64(eq.arithmetic(), r0);
    let mut best: Option<EvidenceRecord> = None;
    let mut rows_considered = 0;
    let mut degenerate_rows = 0;
    if eq.len() >= 2 {
        let scans = scan_directions(eq, &dirs, m_max);
        for m in 1..=m_max {
            for scan in &scans {
                let Some(ev) = scan.evidence(eq, m) else {
                    degenerate_rows += 1;
                    continue;
                };
                if ev.gap.cmp_value(&threshold) != Ordering::Greater {
                    continue;
                }
                rows_considered += 1;
                let record = EvidenceRecord::from_evidence(&ev, tau);
                if best
                    .as_ref()
                    .is_none_or(|b| record.bound_contribution < b.bound_contribution)
                {
                    best = Some(record);
                }
            }
        }
    }
    let reason = match (&best, eq.len()) {
        (Some(_), _) => None,
        (None, 1) => Some("a single translation has no runner-up".to_string()),
        (None, _) => Some(format!("no (m, u) row has gap above r0 = {r0}")),
    };
    Ok(BoundValue::new(
        BoundKind::Refined,
        best.as_ref().map(|b| b.bound_contribution),
        Evidence::Refined {
            best,
            m_max,
            dir_count: dirs.len(),
            r0,
            rows_considered,
            degenerate_rows,
            reason,
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierOptions {
    pub rays: usize,
    pub radii: Vec<f64>,
    pub terms: usize,
}

impl Default for FourierOptions {
    fn default() -> Self {
        FourierOptions {
            rays: 64,
            radii: fourier::default_radii(),
            terms: fourier::DEFAULT_TERMS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub m_max: usize,
    pub dir_count: usize,
    pub r0: f64,
    pub seed: u64,
    pub tol: f64,
    pub fourier: Option<FourierOptions>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            m_max: 12,
            dir_count: 64,
            r0: 0.0,
            seed: 0,
            tol: 1e-9,
            fourier: Some(FourierOptions::default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub equation: EquationDocument,
    pub diagnostics: Diagnostics,
    pub tau: f64,
    pub crude: BoundValue,
    pub eigen: Vec<BoundValue>,
    pub refined: BoundValue,
    pub empirical: Option<DecayEstimate>,
    pub final_bound: f64,
    pub notes: Vec<String>,
}

impl RegularityReport {
    pub fn bounds(&self) -> impl Iterator<Item = &BoundValue> {
        std::iter::once(&self.crude)
            .chain(&self.eigen)
            .chain(std::iter::once(&self.refined))
    }

    /// The eigen bound with the smallest value, if any.
    pub fn min_eigen(&self) -> Option<&BoundValue> {
        self.eigen
            .iter()
            .filter(|b| b.value.is_some())
            .min_by(|a, b| a.value.unwrap().total_cmp(&b.value.unwrap()))
    }
}

/// Validates, then evaluates every bound and the optional decay estimate.
/// Validation errors are fatal; a violated sum rule only drops the decay
/// estimate.
pub fn regularity_report(
    eq: &RefinementEquation,
    options: &ReportOptions,
) -> Result<RegularityReport> {
    let diagnostics = validate(eq);
    if diagnostics.has_errors() {
        return Err(Error::Inadmissible(diagnostics));
    }
    let tau = linalg::spectral_radius_inverse(eq, options.tol)?.tau;
    let (crude, (eigen, refined)) = rayon::join(
        || crude_bound(eq, options.tol),
        || {
            rayon::join(
                || eigen_bounds(eq, options.tol),
                || {
                    refined_bound(
                        eq,
                        options.m_max,
                        options.dir_count,
                        options.r0,
                        options.seed,
                        options.tol,
                    )
                },
            )
        },
    );
    let (crude, eigen, refined) = (crude?, eigen?, refined?);
    let mut notes = vec![format!(
        "refined bound is an {EMPIRICAL_CERTIFICATE}: minimum over finite isolation evidence"
    )];
    if let Evidence::Refined {
        degenerate_rows, ..
    } = &refined.evidence
    {
        if *degenerate_rows > 0 {
            notes.push(format!(
                "{degenerate_rows} (m, u) rows skipped for tied maximizer or runner-up"
            ));
        }
    }
    if let Ok(pairs) = linalg::real_eigenpairs_transpose(eq, options.tol) {
        if pairs.iter().any(|p| p.repeated) {
            notes.push(
                "A^T has a repeated real eigenvalue; one eigenvector per sign is used".into(),
            );
        }
    }
    if eigen.is_empty() {
        notes.push("no eigen bound: no real eigenvalue with a strict maximizer".into());
    }
    let empirical = match &options.fourier {
        None => None,
        Some(f) => match fourier::decay_estimate(eq, f.rays, &f.radii, f.terms, options.seed) {
            Ok((est, _)) => {
                notes.push(
                    "decay exponent minus dimension is a heuristic proxy and does not enter final_bound"
                        .into(),
                );
                Some(est)
            }
            Err(e @ (Error::SumRule { .. } | Error::IllPosedFit(_))) => {
                notes.push(format!("decay estimate unavailable: {e}"));
                None
            }
            Err(e) => return Err(e),
        },
    };
    let final_bound = std::iter::once(&crude)
        .chain(&eigen)
        .chain(std::iter::once(&refined))
        .filter_map(|b| b.value)
        .fold(f64::INFINITY, f64::min);
    Ok(RegularityReport {
        equation: eq.to_document(),
        diagnostics,
        tau,
        crude,
        eigen,
        refined,
        empirical,
        final_bound,
        notes,
    })
}

fn fmt_value(v: Option<f64>) -> String {
    v.map_or_else(|| "absent".to_string(), |v| format!("{v:.6}"))
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

impl fmt::Display for BoundValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            BoundKind::Crude => "crude",
            BoundKind::Eigen => "eigen",
            BoundKind::Refined => "refined",
        };
        let summary = match &self.evidence {
            Evidence::Crude {
                b,
                tau,
                extremal_indices,
            } => format!("b = {b:.6}, tau = {tau:.6}, hull vertices {extremal_indices:?}"),
            Evidence::Eigen {
                lambda,
                w,
                maximizer,
                gap,
            } => format!(
                "lambda = {lambda:.6}, w = {}, maximizer d[{maximizer}], gap = {}",
                fmt_vec(w),
                gap.map_or("inf".to_string(), |g| format!("{g:.6}"))
            ),
            Evidence::Refined {
                best: Some(r),
                rows_considered,
                ..
            } => format!(
                "m = {}, u = {}, gap = {:.6}, coeff_product = {:.6e}, rows = {rows_considered}",
                r.m,
                fmt_vec(&r.u),
                r.gap,
                r.coeff_product
            ),
            Evidence::Refined { reason, .. } => reason.clone().unwrap_or_default(),
        };
        write!(
            f,
            "{kind:<8} {:>12}  [{}]  {summary}",
            fmt_value(self.value),
            self.interpretation
        )
    }
}

impl fmt::Display for RegularityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        writeln!(
            s,
            "dimension {}  |D| = {}",
            self.equation.dimension,
            self.equation.coefficients.len()
        )?;
        writeln!(s, "tau {:.12}", self.tau)?;
        if !self.diagnostics.is_empty() {
            writeln!(s, "diagnostics {}", self.diagnostics)?;
        }
        for b in self.bounds() {
            writeln!(s, "{b}")?;
        }
        if let Some(e) = &self.empirical {
            writeln!(
                s,
                "decay    exponent {:.4} (residual {:.4}, {} rays, {} radii, {} terms), smoothness proxy {:.4}",
                e.exponent, e.fit_residual, e.rays, e.radius_count, e.terms, e.smoothness_proxy
            )?;
        }
        let flag = if self.final_bound <= 0.0 {
            format!("  [{NO_SMOOTHNESS}]")
        } else {
            String::new()
        };
        writeln!(s, "final_bound {:.12}{flag}", self.final_bound)?;
        for n in &self.notes {
            writeln!(s, "note: {n}")?;
        }
        f.write_str(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    const TOL: f64 = 1e-9;

    #[test]
    fn hat_bounds_are_one() {
        let hat = presets::hat();
        assert_eq!(crude_bound(&hat, TOL).unwrap().value, Some(1.0));
        let eigen = eigen_bounds(&hat, TOL).unwrap();
        assert_eq!(eigen.len(), 2);
        assert!(eigen.iter().all(|b| b.value == Some(1.0)));
        let refined = refined_bound(&hat, 8, 2, 0.5, 0, TOL).unwrap();
        assert_eq!(refined.value, Some(1.0));
        assert!(refined.interpretation.contains(EMPIRICAL_CERTIFICATE));
    }

    #[test]
    fn haar_is_flagged() {
        let r = regularity_report(&presets::haar(), &ReportOptions::default()).unwrap();
        assert_eq!(r.final_bound, 0.0);
        assert!(r
            .bounds()
            .all(|b| b.value == Some(0.0) && b.certifies_nothing()));
        assert!(r.to_string().contains(NO_SMOOTHNESS));
    }

    #[test]
    fn daubechies_bounds() {
        let eq = presets::daubechies4();
        let s3 = 3f64.sqrt();
        let crude = crude_bound(&eq, TOL).unwrap().value.unwrap();
        assert!((crude - (2.0 - (s3 - 1.0).log2())).abs() < 1e-9);
        let report = regularity_report(&eq, &ReportOptions::default()).unwrap();
        let eig = report.min_eigen().unwrap();
        let expected = 2.0 - (1.0 + s3).log2();
        assert!((eig.value.unwrap() - expected).abs() < 1e-9);
        match &eig.evidence {
            Evidence::Eigen { w, maximizer, .. } => {
                assert_eq!(w, &vec![-1.0]);
                assert_eq!(*maximizer, 0);
            }
            other => panic!("{other:?}"),
        }
        assert!((report.refined.value.unwrap() - expected).abs() < 1e-9);
        assert!((report.final_bound - expected).abs() < 1e-9);
    }

    #[test]
    fn no_real_eigenvalue() {
        let eq = RefinementEquation::from_f64(
            crate::Arithmetic::Exact,
            &[&[0.0, -2.0], &[1.0, 0.0]],
            &[&[0.0, 0.0], &[1.0, 0.0]],
            &[1.0, 1.0],
        )
        .unwrap();
        assert!(eigen_bounds(&eq, TOL).unwrap().is_empty());
    }

    #[test]
    fn refined_absent_when_threshold_too_high() {
        let b = refined_bound(&presets::hat(), 4, 2, 10.0, 0, TOL).unwrap();
        assert_eq!(b.value, None);
        assert!(matches!(
            b.evidence,
            Evidence::Refined {
                reason: Some(_),
                ..
            }
        ));
    }

    #[test]
    fn report_json_round_trip() {
        let r = regularity_report(&presets::daubechies4(), &ReportOptions::default()).unwrap();
        let text = serde_json::to_string_pretty(&r).unwrap();
        let back: RegularityReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }
}
