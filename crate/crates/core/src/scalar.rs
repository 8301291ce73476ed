//! Real scalars in either exact rational or double-precision form.
//!
//! An equation fixes one [`Arithmetic`] mode and every scalar derived from it
//! carries the same mode. Mixing modes in a binary operation is a logic error
//! and panics.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arithmetic {
    Exact,
    Float,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Exact(BigRational),
    Float(f64),
}

/// Relative tolerance used for tie detection between projections in float mode.
pub const FLOAT_TIE_TOL: f64 = 1e-12;

impl Scalar {
    pub fn zero(mode: Arithmetic) -> Self {
        match mode {
            Arithmetic::Exact => Scalar::Exact(BigRational::zero()),
            Arithmetic::Float => Scalar::Float(0.0),
        }
    }

    pub fn one(mode: Arithmetic) -> Self {
        match mode {
            Arithmetic::Exact => Scalar::Exact(BigRational::one()),
            Arithmetic::Float => Scalar::Float(1.0),
        }
    }

    /// Lifts a finite double into the given mode. In exact mode the binary
    /// value of `x` is reproduced exactly.
    pub fn from_f64(mode: Arithmetic, x: f64) -> Self {
        assert!(x.is_finite(), "non-finite scalar");
        match mode {
            Arithmetic::Exact => Scalar::Exact(BigRational::from_float(x).expect("finite")),
            Arithmetic::Float => Scalar::Float(x),
        }
    }

    pub fn from_integer(mode: Arithmetic, x: i64) -> Self {
        match mode {
            Arithmetic::Exact => Scalar::Exact(BigRational::from_integer(BigInt::from(x))),
            Arithmetic::Float => Scalar::Float(x as f64),
        }
    }

    pub fn mode(&self) -> Arithmetic {
        match self {
            Scalar::Exact(_) => Arithmetic::Exact,
            Scalar::Float(_) => Arithmetic::Float,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => rational_to_f64(r),
            Scalar::Float(x) => *x,
        }
    }

    /// The exact rational value. Floats convert without rounding.
    pub fn to_rational(&self) -> BigRational {
        match self {
            Scalar::Exact(r) => r.clone(),
            Scalar::Float(x) => BigRational::from_float(*x).expect("finite"),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(x) => *x == 0.0,
        }
    }

    pub fn abs(&self) -> Self {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.abs()),
            Scalar::Float(x) => Scalar::Float(x.abs()),
        }
    }

    /// Total order on values of the same mode.
    pub fn cmp_value(&self, other: &Scalar) -> Ordering {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.cmp(b),
            (Scalar::Float(a), Scalar::Float(b)) => a.total_cmp(b),
            _ => panic!("mixed arithmetic modes"),
        }
    }

    /// Equality up to the mode's tie rule: exact equality for rationals,
    /// relative tolerance [`FLOAT_TIE_TOL`] for floats.
    pub fn ties_with(&self, other: &Scalar) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            (Scalar::Float(a), Scalar::Float(b)) => {
                let scale = 1f64.max(a.abs()).max(b.abs());
                (a - b).abs() <= FLOAT_TIE_TOL * scale
            }
            _ => panic!("mixed arithmetic modes"),
        }
    }

    /// Parses a literal of the form `p`, `p/q` or a decimal number. Decimal
    /// text is read exactly in exact mode (`"0.1"` is `1/10`).
    pub fn parse_literal(mode: Arithmetic, text: &str) -> Option<Self> {
        let text = text.trim();
        if let Some((p, q)) = text.split_once('/') {
            if mode == Arithmetic::Float {
                return None;
            }
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            return Some(Scalar::Exact(BigRational::new(p, q)));
        }
        match mode {
            Arithmetic::Exact => parse_decimal(text).map(Scalar::Exact),
            Arithmetic::Float => {
                let x: f64 = text.parse().ok()?;
                x.is_finite().then_some(Scalar::Float(x))
            }
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Scalar::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Scalar::Float(x) => write!(f, "{x}"),
        }
    }
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Exact decimal parse: optional sign, digits with optional fraction, optional exponent.
fn parse_decimal(text: &str) -> Option<BigRational> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a $op b),
                    (Scalar::Float(a), Scalar::Float(b)) => Scalar::Float(a $op b),
                    _ => panic!("mixed arithmetic modes"),
                }
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
    };
}

scalar_binop!(Add, add, +);
scalar_binop!(Sub, sub, -);
scalar_binop!(Mul, mul, *);

impl Scalar {
    /// Division; `None` when dividing by zero.
    pub fn checked_div(&self, rhs: &Scalar) -> Option<Scalar> {
        if rhs.is_zero() {
            return None;
        }
        Some(match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a / b),
            (Scalar::Float(a), Scalar::Float(b)) => Scalar::Float(a / b),
            _ => panic!("mixed arithmetic modes"),
        })
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(-a),
            Scalar::Float(a) => Scalar::Float(-a),
        }
    }
}

/// A point of R^n with scalar coordinates.
pub type Point = Vec<Scalar>;

pub fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Scalar::zero(a[0].mode());
    for (x, y) in a.iter().zip(b) {
        acc = &acc + &(x * y);
    }
    acc
}

pub fn add_points(a: &[Scalar], b: &[Scalar]) -> Point {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub_points(a: &[Scalar], b: &[Scalar]) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn to_f64_vec(p: &[Scalar]) -> Vec<f64> {
    p.iter().map(Scalar::to_f64).collect()
}

/// Lexicographic order of points in the same mode.
pub fn cmp_points(a: &[Scalar], b: &[Scalar]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.cmp_value(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

/// Max-norm distance of two points, as a double.
pub fn max_norm_distance(a: &[Scalar], b: &[Scalar]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).to_f64().abs())
        .fold(0.0, f64::max)
}

/// Square matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    entries: Vec<Scalar>,
}

impl Matrix {
    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Option<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return None;
        }
        Some(Matrix {
            n,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn identity(mode: Arithmetic, n: usize) -> Self {
        let mut entries = vec![Scalar::zero(mode); n * n];
        for i in 0..n {
            entries[i * n + i] = Scalar::one(mode);
        }
        Matrix { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> Arithmetic {
        self.entries[0].mode()
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.entries[i * self.n + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Scalar]> {
        self.entries.chunks(self.n)
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(to_f64_vec).collect()
    }

    pub fn to_rational_rows(&self) -> Vec<Vec<BigRational>> {
        self.rows()
            .map(|r| r.iter().map(Scalar::to_rational).collect())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let entries = (0..n * n)
            .map(|k| self.entries[(k % n) * n + k / n].clone())
            .collect();
        Matrix { n, entries }
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Point {
        self.rows().map(|row| dot(row, v)).collect()
    }

    /// `Aᵀ v` without materializing the transpose.
    pub fn transpose_mul_vec(&self, v: &[Scalar]) -> Point {
        let n = self.n;
        (0..n)
            .map(|j| {
                let mut acc = Scalar::zero(self.mode());
                for (i, vi) in v.iter().enumerate() {
                    acc = &acc + &(self.get(i, j) * vi);
                }
                acc
            })
            .collect()
    }

    /// Determinant by fraction-free elimination in the matrix's own mode.
    pub fn determinant(&self) -> Scalar {
        match self.mode() {
            Arithmetic::Exact => Scalar::Exact(rational_determinant(&self.to_rational_rows())),
            Arithmetic::Float => Scalar::Float(f64_determinant(&self.to_f64_rows())),
        }
    }
}

#[allow(clippy::needless_range_loop)]
pub(crate) fn rational_determinant(rows: &[Vec<BigRational>]) -> BigRational {
    let n = rows.len();
    let mut m = rows.to_vec();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let p = m[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] / &p;
            for c in col..n {
                let delta = &factor * &m[col][c];
                m[r][c] -= delta;
            }
        }
    }
    det
}

#[allow(clippy::needless_range_loop)]
pub(crate) fn f64_determinant(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    let mut m = rows.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        for r in col + 1..n {
            let factor = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= factor * m[col][c];
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rational_and_decimal_literals() {
        let r = Scalar::parse_literal(Arithmetic::Exact, "3/2").unwrap();
        assert_eq!(r, Scalar::Exact(BigRational::new(3.into(), 2.into())));
        let d = Scalar::parse_literal(Arithmetic::Exact, "0.1").unwrap();
        assert_eq!(d, Scalar::Exact(BigRational::new(1.into(), 10.into())));
        let e = Scalar::parse_literal(Arithmetic::Exact, "-2.5e1").unwrap();
        assert_eq!(e, Scalar::from_integer(Arithmetic::Exact, -25));
        assert!(Scalar::parse_literal(Arithmetic::Float, "3/2").is_none());
        assert!(Scalar::parse_literal(Arithmetic::Exact, "1/0").is_none());
        assert!(Scalar::parse_literal(Arithmetic::Exact, "abc").is_none());
    }

    #[test]
    fn determinant_matches_in_both_modes() {
        let rows = |mode| {
            Matrix::from_rows(vec![
                vec![
                    Scalar::from_integer(mode, 0),
                    Scalar::from_integer(mode, -2),
                ],
                vec![Scalar::from_integer(mode, 1), Scalar::from_integer(mode, 0)],
            ])
            .unwrap()
        };
        assert_eq!(rows(Arithmetic::Exact).determinant().to_f64(), 2.0);
        assert_eq!(rows(Arithmetic::Float).determinant().to_f64(), 2.0);
    }

    #[test]
    fn transpose_mul_matches_explicit_transpose() {
        let m = Matrix::from_rows(vec![
            vec![Scalar::Float(1.0), Scalar::Float(2.0)],
            vec![Scalar::Float(3.0), Scalar::Float(4.0)],
        ])
        .unwrap();
        let v = vec![Scalar::Float(1.0), Scalar::Float(-1.0)];
        assert_eq!(m.transpose_mul_vec(&v), m.transpose().mul_vec(&v));
    }

    #[test]
    #[should_panic(expected = "mixed arithmetic modes")]
    fn mixing_modes_panics() {
        let _ = &Scalar::Float(1.0) + &Scalar::from_integer(Arithmetic::Exact, 1);
    }
}
