//! Empirical smoothness from the decay of `f̂`, evaluated as the truncated
//! infinite product `Π_{j≥1} m((Aᵀ)^{−j} ξ)` of the mask symbol.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equation::RefinementEquation;
use crate::error::{Error, Result};
use crate::hull::sample_directions;
use crate::linalg::dense::{self, Lu};

/// Sum-rule tolerance required before the product is formed.
pub const PRODUCT_SUM_RULE_TOL: f64 = 1e-6;
/// Magnitudes below this are excluded from the decay fit.
pub const MAGNITUDE_FLOOR: f64 = 1e-14;
pub const DEFAULT_TERMS: usize = 40;

/// `(1/|det A|) Σ c_d e^{−i⟨ξ,d⟩}`.
pub fn symbol(eq: &RefinementEquation, xi: &[f64]) -> Complex64 {
    let ctx = Context::new(eq);
    ctx.raw_symbol(xi) / ctx.abs_det
}

/// Truncated product with `terms` factors. Requires the sum rule.
pub fn fhat(eq: &RefinementEquation, xi: &[f64], terms: usize) -> Result<Complex64> {
    let ctx = Context::new(eq);
    ctx.check_sum_rule()?;
    Ok(ctx.fhat(xi, terms))
}

struct Context {
    translations: Vec<Vec<f64>>,
    coefficients: Vec<f64>,
    abs_det: f64,
    sum: f64,
    transpose_lu: Lu,
}

impl Context {
    fn new(eq: &RefinementEquation) -> Self {
        let rows = eq.dilation().to_f64_rows();
        Context {
            translations: eq
                .translations()
                .iter()
                .map(|d| d.iter().map(|x| x.to_f64()).collect())
                .collect(),
            coefficients: eq.coefficients().to_vec(),
            abs_det: eq.abs_det(),
            sum: eq.coefficient_sum(),
            transpose_lu: Lu::factor(&dense::transpose(&rows)),
        }
    }

    fn check_sum_rule(&self) -> Result<()> {
        if (self.sum - self.abs_det).abs() > PRODUCT_SUM_RULE_TOL {
            return Err(Error::SumRule {
                sum: self.sum,
                det: self.abs_det,
            });
        }
        Ok(())
    }

    fn raw_symbol(&self, xi: &[f64]) -> Complex64 {
        self.translations
            .iter()
            .zip(&self.coefficients)
            .map(|(d, c)| {
                let phase: f64 = xi.iter().zip(d).map(|(a, b)| a * b).sum();
                Complex64::from_polar(*c, -phase)
            })
            .sum()
    }

    /// Factors are normalized by `Σ c_d` (equal to `|det A|` under the sum
    /// rule) so that every factor is exactly one at the origin.
    fn fhat(&self, xi: &[f64], terms: usize) -> Complex64 {
        let mut point = xi.to_vec();
        let mut acc = Complex64::new(1.0, 0.0);
        for _ in 0..terms {
            point = self.transpose_lu.solve(&point);
            acc *= self.raw_symbol(&point) / self.sum;
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecaySample {
    pub radius: f64,
    pub max_magnitude: f64,
}

/// Least-squares fit `max |f̂(r u)| ~ r^{−s}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayEstimate {
    pub exponent: f64,
    /// Root-mean-square residual of the log-log fit.
    pub fit_residual: f64,
    pub rays: usize,
    pub radii: [f64; 2],
    pub radius_count: usize,
    pub terms: usize,
    /// `s − n`, a heuristic smoothness proxy only.
    pub smoothness_proxy: f64,
}

/// `2^k · π/3` for `k = 3..=10`. The phase keeps 1-D spline transforms off
/// their zero set.
pub fn default_radii() -> Vec<f64> {
    (3..=10)
        .map(|k| 2f64.powi(k) * std::f64::consts::PI / 3.0)
        .collect()
}

pub fn decay_estimate(
    eq: &RefinementEquation,
    rays: usize,
    radii: &[f64],
    terms: usize,
    seed: u64,
) -> Result<(DecayEstimate, Vec<DecaySample>)> {
    if radii.len() < 8 {
        return Err(Error::InvalidArgument(format!(
            "need at least 8 radii, got {}",
            radii.len()
        )));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 {
        return Err(Error::InvalidArgument(
            "radii must be positive and strictly increasing".into(),
        ));
    }
    if rays == 0 {
        return Err(Error::InvalidArgument(
            "at least one ray is required".into(),
        ));
    }
    let ctx = Context::new(eq);
    ctx.check_sum_rule()?;
    let dirs = sample_directions(eq.dim(), rays, seed);
    let samples: Vec<DecaySample> = radii
        .par_iter()
        .map(|&r| {
            let max_magnitude = dirs
                .iter()
                .map(|d| {
                    let xi: Vec<f64> = d.u.iter().map(|x| x * r).collect();
                    ctx.fhat(&xi, terms).norm()
                })
                .fold(0.0, f64::max);
            DecaySample {
                radius: r,
                max_magnitude,
            }
        })
        .collect();
    let usable: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.max_magnitude >= MAGNITUDE_FLOOR)
        .map(|s| (s.radius.ln(), s.max_magnitude.ln()))
        .collect();
    if usable.len() < 8 {
        return Err(Error::IllPosedFit(format!(
            "only {} of {} radii have magnitude above {MAGNITUDE_FLOOR}",
            usable.len(),
            samples.len()
        )));
    }
    let k = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / k;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let fit_residual = (usable
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    let exponent = -slope;
    Ok((
        DecayEstimate {
            exponent,
            fit_residual,
            rays: dirs.len(),
            radii: [radii[0], radii[radii.len() - 1]],
            radius_count: usable.len(),
            terms,
            smoothness_proxy: exponent - eq.dim() as f64,
        },
        samples,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::scalar::Arithmetic;
    use std::f64::consts::PI;

    fn hat_closed_form(xi: f64) -> f64 {
        if xi == 0.0 {
            1.0
        } else {
            let s = (xi / 2.0).sin() / (xi / 2.0);
            s * s
        }
    }

    #[test]
    fn symbol_values() {
        let hat = presets::hat();
        assert!((symbol(&hat, &[0.0]) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(symbol(&hat, &[PI]).norm() < 1e-15);
        assert!(symbol(&presets::haar(), &[PI]).norm() < 1e-15);
    }

    #[test]
    fn product_is_one_at_origin() {
        for t in [0, 1, 7, 40] {
            assert_eq!(
                fhat(&presets::daubechies4(), &[0.0], t).unwrap(),
                Complex64::new(1.0, 0.0)
            );
        }
    }

    #[test]
    fn hat_product_matches_closed_form() {
        let hat = presets::hat();
        assert!(fhat(&hat, &[2.0 * PI], 40).unwrap().norm() < 1e-6);
        assert!((fhat(&hat, &[PI], 40).unwrap().norm() - 4.0 / (PI * PI)).abs() < 1e-6);
        for k in -80..=80 {
            let xi = k as f64 * PI / 5.0;
            let got = fhat(&hat, &[xi], 40).unwrap().norm();
            assert!((got - hat_closed_form(xi)).abs() < 1e-6, "xi = {xi}");
        }
    }

    #[test]
    fn sum_rule_required() {
        let eq = crate::RefinementEquation::from_f64(
            Arithmetic::Exact,
            &[&[2.0]],
            &[&[0.0], &[1.0]],
            &[1.0, 0.5],
        )
        .unwrap();
        assert!(matches!(fhat(&eq, &[1.0], 10), Err(Error::SumRule { .. })));
        assert!(matches!(
            decay_estimate(&eq, 4, &default_radii(), 40, 0),
            Err(Error::SumRule { .. })
        ));
    }

    #[test]
    fn radii_validated() {
        let hat = presets::hat();
        assert!(decay_estimate(&hat, 4, &[1.0, 2.0], 40, 0).is_err());
        let mut r = default_radii();
        r.swap(0, 1);
        assert!(decay_estimate(&hat, 4, &r, 40, 0).is_err());
    }

    #[test]
    fn decay_exponents_of_splines() {
        let (hat, _) = decay_estimate(&presets::hat(), 64, &default_radii(), 40, 0).unwrap();
        assert!((hat.exponent - 2.0).abs() <= 0.15, "{hat:?}");
        let (haar, _) = decay_estimate(&presets::haar(), 64, &default_radii(), 40, 0).unwrap();
        assert!((haar.exponent - 1.0).abs() <= 0.15, "{haar:?}");
    }
}
