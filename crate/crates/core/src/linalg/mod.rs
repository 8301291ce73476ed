//! Eigenstructure of the dilation matrix.
//!
//! Dimensions one and two use closed-form roots of the characteristic
//! polynomial. Higher dimensions compute the characteristic polynomial exactly
//! (floats are lifted to rationals without rounding), isolate real roots with
//! a Sturm sequence and recover eigenvectors by inverse iteration. Complex
//! moduli for the spectral radius come from an Aberth iteration whose clusters
//! carry an inclusion radius.

pub mod dense;
pub mod poly;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::equation::RefinementEquation;
use crate::error::{Error, Result};
use crate::scalar::{rational_to_f64, Matrix};

use dense::Lu;
use poly::{characteristic_polynomial, real_roots, root_clusters, RationalPoly, Sturm};

pub const DEFAULT_TOL: f64 = 1e-10;

/// Real eigenvalue of `Aᵀ` with a unit eigenvector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub eigenvalue: f64,
    pub eigenvector: Vec<f64>,
    /// `‖Aᵀw − λw‖∞`.
    pub residual: f64,
    /// The root has algebraic multiplicity above one (or coincides
    /// numerically with another root); `eigenvector` is one representative.
    pub repeated: bool,
}

/// Spectral radius τ of `A⁻¹` with an enclosing bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralRadius {
    pub tau: f64,
    pub bracket: [f64; 2],
}

/// Outcome of the expanding-matrix test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expansion {
    Expanding { min_modulus: f64 },
    NotExpanding { min_modulus: f64 },
    Indeterminate { min_modulus: f64 },
}

/// Guard band around modulus one inside which expansion is not decided.
pub const EXPANSION_GUARD: f64 = 1e-9;

struct ExactInvariants2 {
    trace: BigRational,
    det: BigRational,
    disc: BigRational,
}

fn invariants2(a: &Matrix) -> ExactInvariants2 {
    let m = a.to_rational_rows();
    let trace = &m[0][0] + &m[1][1];
    let det = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0];
    let four = BigRational::from_integer(BigInt::from(4));
    let disc = &trace * &trace - four * &det;
    ExactInvariants2 { trace, det, disc }
}

/// Real roots of `λ² − tλ + δ` with nonnegative discriminant, descending.
fn real_roots2(inv: &ExactInvariants2) -> Vec<f64> {
    let t = rational_to_f64(&inv.trace);
    let det = rational_to_f64(&inv.det);
    if inv.disc.is_zero() {
        return vec![t / 2.0];
    }
    let s = rational_to_f64(&inv.disc).sqrt();
    let big = if t >= 0.0 {
        (t + s) / 2.0
    } else {
        (t - s) / 2.0
    };
    let small = if big != 0.0 { det / big } else { -big };
    let mut roots = vec![big, small];
    roots.sort_by(|a, b| b.total_cmp(a));
    roots
}

/// Smallest eigenvalue modulus of `a` with an absolute uncertainty.
fn min_modulus(a: &Matrix) -> Result<(f64, f64)> {
    match a.dim() {
        1 => {
            let x = a.get(0, 0).to_f64().abs();
            Ok((x, 2.0 * f64::EPSILON * x))
        }
        2 => {
            let inv = invariants2(a);
            let mu = if inv.disc.is_negative() {
                rational_to_f64(&inv.det).sqrt()
            } else {
                real_roots2(&inv)
                    .into_iter()
                    .map(f64::abs)
                    .fold(f64::INFINITY, f64::min)
            };
            Ok((mu, 8.0 * f64::EPSILON * mu))
        }
        _ => {
            let p = characteristic_polynomial(&a.to_rational_rows());
            let clusters = root_clusters(&p);
            if clusters
                .iter()
                .any(|c| !c.center.is_finite() || !c.radius.is_finite())
            {
                return Err(Error::NonConvergence("root iteration diverged".into()));
            }
            let lo = clusters
                .iter()
                .map(|c| c.center.norm() - c.radius)
                .fold(f64::INFINITY, f64::min);
            let hi = clusters
                .iter()
                .map(|c| c.center.norm() + c.radius)
                .fold(f64::INFINITY, f64::min);
            let mu = clusters
                .iter()
                .map(|c| c.center.norm())
                .fold(f64::INFINITY, f64::min);
            Ok((mu, (hi - mu).max(mu - lo)))
        }
    }
}

/// Decides whether every eigenvalue of `a` has modulus above one. Real
/// eigenvalues in `[-1, 1]` (and, in dimension two, complex pairs with
/// `det ≤ 1`) are detected exactly; remaining cases compare a floating
/// estimate against [`EXPANSION_GUARD`].
pub fn expansion(a: &Matrix) -> Result<Expansion> {
    let (mu, _) = min_modulus(a)?;
    let p = characteristic_polynomial(&a.to_rational_rows());
    let one = BigRational::one();
    let sturm = Sturm::new(&p.square_free());
    let real_in_unit = p.eval(&-one.clone()).is_zero() || sturm.count(&-one.clone(), &one) > 0;
    if real_in_unit {
        return Ok(Expansion::NotExpanding { min_modulus: mu });
    }
    if a.dim() == 2 {
        let inv = invariants2(a);
        if inv.disc.is_negative() && inv.det <= one {
            return Ok(Expansion::NotExpanding { min_modulus: mu });
        }
        return Ok(Expansion::Expanding { min_modulus: mu });
    }
    if a.dim() == 1 {
        return Ok(Expansion::Expanding { min_modulus: mu });
    }
    Ok(if (mu - 1.0).abs() <= EXPANSION_GUARD {
        Expansion::Indeterminate { min_modulus: mu }
    } else if mu < 1.0 {
        Expansion::NotExpanding { min_modulus: mu }
    } else {
        Expansion::Expanding { min_modulus: mu }
    })
}

/// τ, the largest eigenvalue modulus of `A⁻¹`.
pub fn spectral_radius_inverse(eq: &RefinementEquation, tol: f64) -> Result<SpectralRadius> {
    spectral_radius_inverse_of(eq.dilation(), tol)
}

pub fn spectral_radius_inverse_of(a: &Matrix, tol: f64) -> Result<SpectralRadius> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let (mu, err) = min_modulus(a)?;
    if mu <= err || mu == 0.0 {
        return Err(Error::NonConvergence("dilation is singular".into()));
    }
    let tau = 1.0 / mu;
    let bracket = [1.0 / (mu + err), 1.0 / (mu - err)];
    if bracket[1] - bracket[0] > tol {
        return Err(Error::NonConvergence(format!(
            "spectral radius bracket [{}, {}] wider than {tol}",
            bracket[0], bracket[1]
        )));
    }
    Ok(SpectralRadius { tau, bracket })
}

/// Real eigenpairs of `Aᵀ`, eigenvalues descending, each eigenvector in both
/// orientations (`+w` first, its first nonzero component positive).
pub fn real_eigenpairs_transpose(eq: &RefinementEquation, tol: f64) -> Result<Vec<EigenPair>> {
    real_eigenpairs_transpose_of(eq.dilation(), tol)
}

pub fn real_eigenpairs_transpose_of(a: &Matrix, tol: f64) -> Result<Vec<EigenPair>> {
    let at = dense::transpose(&a.to_f64_rows());
    let roots: Vec<(f64, bool)> = match a.dim() {
        1 => vec![(at[0][0], false)],
        2 => {
            let inv = invariants2(a);
            if inv.disc.is_negative() {
                vec![]
            } else {
                let repeated = inv.disc.is_zero();
                real_roots2(&inv)
                    .into_iter()
                    .map(|r| (r, repeated))
                    .collect()
            }
        }
        _ => {
            let p = characteristic_polynomial(&a.to_rational_rows());
            merge_coincident(&real_roots(&p), tol)
        }
    };
    let mut pairs = Vec::with_capacity(2 * roots.len());
    for (lambda, repeated) in roots {
        let w = match a.dim() {
            1 => vec![1.0],
            2 => null_vector2(&at, lambda),
            _ => inverse_iteration(&at, lambda)?,
        };
        let w = orient(w);
        let residual = residual(&at, lambda, &w);
        let neg: Vec<f64> = w.iter().map(|x| -x).collect();
        pairs.push(EigenPair {
            eigenvalue: lambda,
            eigenvector: w,
            residual,
            repeated,
        });
        pairs.push(EigenPair {
            eigenvalue: lambda,
            eigenvector: neg,
            residual,
            repeated,
        });
    }
    Ok(pairs)
}

/// Descending root values with multiplicity flags; roots closer than `tol`
/// collapse to one representative.
fn merge_coincident(roots: &[poly::RealRoot], tol: f64) -> Vec<(f64, bool)> {
    let mut out: Vec<(f64, bool)> = Vec::new();
    for r in roots.iter().rev() {
        match out.last_mut() {
            Some((v, rep)) if (*v - r.value).abs() < tol => *rep = true,
            _ => out.push((r.value, r.multiple)),
        }
    }
    out
}

fn null_vector2(at: &[Vec<f64>], lambda: f64) -> Vec<f64> {
    let r0 = [at[0][0] - lambda, at[0][1]];
    let r1 = [at[1][0], at[1][1] - lambda];
    let n0 = r0[0].hypot(r0[1]);
    let n1 = r1[0].hypot(r1[1]);
    let (row, norm) = if n0 >= n1 { (r0, n0) } else { (r1, n1) };
    let scale = dense::frobenius(at).max(1.0);
    if norm <= 1e-14 * scale {
        return vec![1.0, 0.0];
    }
    vec![-row[1] / norm, row[0] / norm]
}

fn inverse_iteration(at: &[Vec<f64>], lambda: f64) -> Result<Vec<f64>> {
    let n = at.len();
    let shifted: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { at[i][j] - lambda } else { at[i][j] })
                .collect()
        })
        .collect();
    let scale = dense::frobenius(at).max(lambda.abs()).max(1.0);
    if dense::frobenius(&shifted) <= 1e-14 * scale {
        // Aᵀ = λI: every vector is an eigenvector.
        let mut e = vec![0.0; n];
        e[0] = 1.0;
        return Ok(e);
    }
    let lu = Lu::factor(&shifted);
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * i as f64).collect();
    for _ in 0..12 {
        let y = lu.solve(&x);
        let norm = dense::norm2(&y);
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::NonConvergence("inverse iteration broke down".into()));
        }
        let next: Vec<f64> = y.iter().map(|v| v / norm).collect();
        let aligned = orient(next.clone());
        let prev = orient(x.clone());
        let delta = aligned
            .iter()
            .zip(&prev)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        x = next;
        if delta < 1e-15 {
            break;
        }
    }
    Ok(x)
}

fn orient(mut w: Vec<f64>) -> Vec<f64> {
    let norm = dense::norm2(&w);
    for x in &mut w {
        *x /= norm;
    }
    if let Some(first) = w.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            for x in &mut w {
                *x = -*x;
            }
        }
    }
    for x in &mut w {
        if *x == 0.0 {
            *x = 0.0;
        }
    }
    w
}

fn residual(at: &[Vec<f64>], lambda: f64, w: &[f64]) -> f64 {
    dense::mat_vec(at, w)
        .iter()
        .zip(w)
        .map(|(aw, x)| (aw - lambda * x).abs())
        .fold(0.0, f64::max)
}

/// Exact characteristic polynomial of the dilation.
pub fn characteristic_polynomial_of(a: &Matrix) -> RationalPoly {
    characteristic_polynomial(&a.to_rational_rows())
}
