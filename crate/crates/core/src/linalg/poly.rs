//! Univariate polynomials: exact rational coefficients for characteristic
//! polynomials and Sturm sequences, plus simultaneous complex root finding.

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::scalar::rational_to_f64;

/// Coefficients stored lowest degree first; no trailing zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalPoly {
    coeffs: Vec<BigRational>,
}

impl RationalPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        RationalPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn lead(&self) -> &BigRational {
        self.coeffs.last().expect("nonzero polynomial")
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_complex(&self, z: &Complex<BigRational>) -> Complex<BigRational> {
        let mut acc = Complex::new(BigRational::zero(), BigRational::zero());
        for c in self.coeffs.iter().rev() {
            acc = acc * z.clone() + Complex::new(c.clone(), BigRational::zero());
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * BigRational::from_integer(BigInt::from(k)))
            .collect();
        RationalPoly::new(coeffs)
    }

    /// Quotient and remainder of polynomial division by a nonzero divisor.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        let mut rem = self.coeffs.clone();
        let dd = divisor.degree();
        if rem.len() < divisor.coeffs.len() {
            return (RationalPoly::new(vec![]), self.clone());
        }
        let mut quot = vec![BigRational::zero(); rem.len() - dd];
        let lead = divisor.lead();
        for k in (0..quot.len()).rev() {
            let factor = &rem[k + dd] / lead;
            if factor.is_zero() {
                continue;
            }
            for (i, c) in divisor.coeffs.iter().enumerate() {
                rem[k + i] -= &factor * c;
            }
            quot[k] = factor;
        }
        rem.truncate(dd);
        (RationalPoly::new(quot), RationalPoly::new(rem))
    }

    pub fn monic(&self) -> Self {
        let lead = self.lead().clone();
        RationalPoly::new(self.coeffs.iter().map(|c| c / &lead).collect())
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic()
        }
    }

    /// `self / gcd(self, self')`: same roots, all simple.
    pub fn square_free(&self) -> Self {
        let g = self.gcd(&self.derivative());
        if g.degree() == 0 {
            return self.clone();
        }
        self.div_rem(&g).0
    }

    /// Cauchy bound: every real or complex root has modulus below it.
    pub fn root_bound(&self) -> BigRational {
        let lead = self.lead().abs();
        let max = self.coeffs[..self.coeffs.len() - 1]
            .iter()
            .map(|c| c.abs() / &lead)
            .fold(BigRational::zero(), |a, b| if b > a { b } else { a });
        max + BigRational::one()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(rational_to_f64).collect()
    }
}

/// Characteristic polynomial `det(λI − M)` by Faddeev–LeVerrier, exactly.
pub fn characteristic_polynomial(m: &[Vec<BigRational>]) -> RationalPoly {
    let n = m.len();
    let mut coeffs = vec![BigRational::zero(); n + 1];
    coeffs[n] = BigRational::one();
    let mut prev = vec![vec![BigRational::zero(); n]; n];
    for k in 1..=n {
        // M_k = M · M_{k-1} + c_{n-k+1} I
        let mut cur = vec![vec![BigRational::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = BigRational::zero();
                for l in 0..n {
                    if !m[i][l].is_zero() && !prev[l][j].is_zero() {
                        acc += &m[i][l] * &prev[l][j];
                    }
                }
                cur[i][j] = acc;
            }
            cur[i][i] += &coeffs[n - k + 1];
        }
        let mut trace = BigRational::zero();
        for i in 0..n {
            for l in 0..n {
                trace += &m[i][l] * &cur[l][i];
            }
        }
        coeffs[n - k] = -trace / BigRational::from_integer(BigInt::from(k));
        prev = cur;
    }
    RationalPoly::new(coeffs)
}

/// Sturm sequence of a square-free polynomial.
pub struct Sturm {
    seq: Vec<RationalPoly>,
}

impl Sturm {
    pub fn new(p: &RationalPoly) -> Self {
        let mut seq = vec![p.clone(), p.derivative()];
        loop {
            let len = seq.len();
            if seq[len - 1].is_zero() {
                seq.pop();
                break;
            }
            let (_, r) = seq[len - 2].div_rem(&seq[len - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(RationalPoly::new(r.coeffs.iter().map(|c| -c).collect()));
        }
        Sturm { seq }
    }

    fn variations(&self, x: &BigRational) -> usize {
        let mut count = 0;
        let mut last = 0i8;
        for p in &self.seq {
            let v = p.eval(x);
            let s = if v.is_positive() {
                1
            } else if v.is_negative() {
                -1
            } else {
                0
            };
            if s != 0 {
                if last != 0 && s != last {
                    count += 1;
                }
                last = s;
            }
        }
        count
    }

    /// Number of distinct roots in the half-open interval `(a, b]`.
    pub fn count(&self, a: &BigRational, b: &BigRational) -> usize {
        self.variations(a).saturating_sub(self.variations(b))
    }
}

/// A real root isolated in `[lo, hi]` and refined to double precision.
#[derive(Debug, Clone)]
pub struct RealRoot {
    pub lo: BigRational,
    pub hi: BigRational,
    pub value: f64,
    pub multiple: bool,
}

/// All distinct real roots, ascending, each refined until the isolating
/// interval is narrower than double resolution at the root.
pub fn real_roots(p: &RationalPoly) -> Vec<RealRoot> {
    if p.degree() == 0 {
        return vec![];
    }
    let sf = p.square_free();
    let repeated = p.gcd(&p.derivative());
    let sturm = Sturm::new(&sf);
    let rep_sturm = (repeated.degree() > 0).then(|| Sturm::new(&repeated));
    let bound = sf.root_bound();
    let mut pending = vec![(-bound.clone(), bound)];
    let mut isolated = Vec::new();
    let two = BigRational::from_integer(BigInt::from(2));
    while let Some((a, b)) = pending.pop() {
        match sturm.count(&a, &b) {
            0 => {}
            1 => isolated.push((a, b)),
            _ => {
                let mid = (&a + &b) / &two;
                pending.push((mid.clone(), b));
                pending.push((a, mid));
            }
        }
    }
    isolated.sort_by(|x, y| x.0.cmp(&y.0));
    isolated
        .into_iter()
        .map(|(mut a, mut b)| {
            // Root lies in (a, b]; tighten by bisection with exact sign tests.
            for _ in 0..400 {
                if sf.eval(&b).is_zero() {
                    a = b.clone();
                    break;
                }
                let (fa, fb) = (rational_to_f64(&a), rational_to_f64(&b));
                if (fb - fa).abs() <= 2.0 * f64::EPSILON * fa.abs().max(fb.abs()).max(1e-300) {
                    break;
                }
                let mid = (&a + &b) / &two;
                if sturm.count(&a, &mid) == 1 {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            let multiple = rep_sturm.as_ref().is_some_and(|s| {
                s.count(&a, &b) > 0 || repeated.eval(&a).is_zero() || repeated.eval(&b).is_zero()
            });
            let value = rational_to_f64(&((&a + &b) / &two));
            RealRoot {
                lo: a,
                hi: b,
                value,
                multiple,
            }
        })
        .collect()
}

/// All complex roots of a polynomial with double coefficients (lowest degree
/// first) by the Aberth–Ehrlich iteration.
pub fn complex_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return vec![];
    }
    let lead = coeffs[deg];
    let monic: Vec<f64> = coeffs.iter().map(|c| c / lead).collect();
    let radius = 1.0 + monic[..deg].iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let mut roots: Vec<Complex64> = (0..deg)
        .map(|k| {
            let angle = 0.4 + 2.0 * std::f64::consts::PI * k as f64 / deg as f64;
            Complex64::from_polar(0.5 * radius, angle)
        })
        .collect();
    let eval = |z: Complex64| {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for c in monic.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    };
    for _ in 0..1000 {
        let mut max_step = 0.0f64;
        for i in 0..deg {
            let z = roots[i];
            let (p, dp) = eval(z);
            if p == Complex64::new(0.0, 0.0) {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..deg)
                .filter(|&j| j != i)
                .map(|j| {
                    let diff = z - roots[j];
                    if diff.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        diff.inv()
                    }
                })
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                roots[i] = z - step;
                max_step = max_step.max(step.norm() / z.norm().max(1.0));
            }
        }
        if max_step < 1e-17 {
            break;
        }
    }
    roots
}

/// A cluster of numerically coincident complex roots with an inclusion radius
/// computed from an exact evaluation of the polynomial at the cluster centre.
#[derive(Debug, Clone, Copy)]
pub struct RootCluster {
    pub center: Complex64,
    pub multiplicity: usize,
    pub radius: f64,
}

pub fn root_clusters(p: &RationalPoly) -> Vec<RootCluster> {
    let approx = complex_roots(&p.to_f64());
    let n = approx.len();
    let mut assigned = vec![usize::MAX; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if assigned[i] != usize::MAX {
            continue;
        }
        let g = groups.len();
        let mut members = vec![i];
        assigned[i] = g;
        let mut k = 0;
        while k < members.len() {
            let zi = approx[members[k]];
            for j in 0..n {
                if assigned[j] == usize::MAX && (approx[j] - zi).norm() <= 1e-3 * zi.norm().max(1.0)
                {
                    assigned[j] = g;
                    members.push(j);
                }
            }
            k += 1;
        }
        groups.push(members);
    }
    let lead = rational_to_f64(p.lead()).abs();
    groups
        .iter()
        .map(|members| {
            let k = members.len();
            let mean = members.iter().map(|&i| approx[i]).sum::<Complex64>() / k as f64;
            let center = if k > 1 {
                polish_cluster(p, k, mean)
            } else {
                mean
            };
            let exact_center = Complex::new(
                BigRational::from_float(center.re).unwrap_or_else(BigRational::zero),
                BigRational::from_float(center.im).unwrap_or_else(BigRational::zero),
            );
            let value = p.eval_complex(&exact_center);
            let modulus = rational_to_f64(&(&value.re * &value.re + &value.im * &value.im)).sqrt();
            let others: f64 = (0..n)
                .filter(|j| !members.contains(j))
                .map(|j| (center - approx[j]).norm())
                .product();
            let radius = if modulus == 0.0 {
                0.0
            } else {
                n as f64 * (modulus / (lead * others)).powf(1.0 / k as f64)
            };
            RootCluster {
                center,
                multiplicity: k,
                radius,
            }
        })
        .collect()
}

/// A root cluster of size `k` is a simple root of the `(k−1)`-th derivative;
/// Newton on that derivative recovers the centre to full precision.
fn polish_cluster(p: &RationalPoly, k: usize, start: Complex64) -> Complex64 {
    let mut q = p.clone();
    for _ in 1..k {
        q = q.derivative();
    }
    let coeffs = q.to_f64();
    let mut z = start;
    for _ in 0..60 {
        let mut v = Complex64::new(0.0, 0.0);
        let mut dv = Complex64::new(0.0, 0.0);
        for c in coeffs.iter().rev() {
            dv = dv * z + v;
            v = v * z + c;
        }
        if dv.norm() == 0.0 {
            break;
        }
        let step = v / dv;
        if !step.is_finite() {
            break;
        }
        z -= step;
        if step.norm() <= f64::EPSILON * z.norm().max(1.0) {
            break;
        }
    }
    if (z - start).norm() <= 1e-2 * start.norm().max(1.0) {
        z
    } else {
        start
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn faddeev_leverrier_on_rotation_scaling() {
        // [[0,-2],[1,0]] -> λ² + 2
        let p = characteristic_polynomial(&[vec![q(0), q(-2)], vec![q(1), q(0)]]);
        assert_eq!(p.coeffs(), &[q(2), q(0), q(1)]);
    }

    #[test]
    fn sturm_counts_and_refines_real_roots() {
        // (x-1)(x-2)^2(x+3) = x^4 - 2x^3 - 7x^2 + 20x - 12
        let p = RationalPoly::new(vec![q(-12), q(20), q(-7), q(-2), q(1)]);
        let roots = real_roots(&p);
        let values: Vec<f64> = roots.iter().map(|r| r.value).collect();
        assert_eq!(values.len(), 3);
        assert!((values[0] + 3.0).abs() < 1e-14);
        assert!((values[1] - 1.0).abs() < 1e-14);
        assert!((values[2] - 2.0).abs() < 1e-14);
        assert_eq!(
            roots.iter().map(|r| r.multiple).collect::<Vec<_>>(),
            vec![false, false, true]
        );
    }

    #[test]
    fn irrational_root_refined_to_double_precision() {
        // x^2 - 2
        let p = RationalPoly::new(vec![q(-2), q(0), q(1)]);
        let roots = real_roots(&p);
        assert_eq!(roots.len(), 2);
        assert!((roots[1].value - 2f64.sqrt()).abs() < 4e-16);
    }

    #[test]
    fn clusters_resolve_triple_root() {
        // (x-2)^3
        let p = RationalPoly::new(vec![q(-8), q(12), q(-6), q(1)]);
        let clusters = root_clusters(&p);
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].multiplicity, 3);
        assert!((clusters[0].center.re - 2.0).abs() < 1e-10);
        assert!(clusters[0].radius < 1e-10);
    }

    #[test]
    fn aberth_finds_complex_pair() {
        // x^3 - 1
        let roots = complex_roots(&[-1.0, 0.0, 0.0, 1.0]);
        for z in roots {
            assert!((z.norm() - 1.0).abs() < 1e-14);
        }
    }
}
