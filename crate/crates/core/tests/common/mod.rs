//! Independent reference computations for integration tests: brute-force
//! enumeration of `D^m` in exact rational arithmetic, and a generator of
//! small random exact equations.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use refinable::{parse_equation, validate, RefinementEquation};

pub type Q = BigRational;
pub type QPoint = Vec<Q>;

pub fn q(p: i64, d: i64) -> Q {
    Q::new(BigInt::from(p), BigInt::from(d))
}

pub fn q_text(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap()
}

pub fn lift(u: &[f64]) -> QPoint {
    u.iter().map(|&x| Q::from_float(x).unwrap()).collect()
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

pub fn mat_vec(a: &[Vec<Q>], v: &[Q]) -> QPoint {
    a.iter().map(|row| dot(row, v)).collect()
}

pub fn add(a: &[Q], b: &[Q]) -> QPoint {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// An exact equation kept alongside its library counterpart.
#[derive(Debug, Clone)]
pub struct ExactEquation {
    pub a: Vec<Vec<Q>>,
    pub d: Vec<QPoint>,
    pub c: Vec<Q>,
}

impl ExactEquation {
    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn document(&self) -> String {
        let mat = |rows: &[Vec<Q>]| {
            let r: Vec<String> = rows
                .iter()
                .map(|row| {
                    let e: Vec<String> = row.iter().map(|x| format!("\"{}\"", q_text(x))).collect();
                    format!("[{}]", e.join(", "))
                })
                .collect();
            format!("[{}]", r.join(", "))
        };
        let c: Vec<String> = self
            .c
            .iter()
            .map(|x| format!("\"{}\"", q_text(x)))
            .collect();
        format!(
            r#"{{"dimension": {}, "arithmetic": "exact", "dilation": {}, "translations": {}, "coefficients": [{}]}}"#,
            self.dim(),
            mat(&self.a),
            mat(&self.d),
            c.join(", ")
        )
    }

    pub fn library(&self) -> RefinementEquation {
        parse_equation(&self.document()).expect("generated document parses")
    }

    /// `Σ_j A^j d_{w_j}` by direct evaluation.
    pub fn pi(&self, word: &[usize]) -> QPoint {
        let n = self.dim();
        let mut total = vec![Q::zero(); n];
        for (j, &digit) in word.iter().enumerate() {
            let mut v = self.d[digit].clone();
            for _ in 0..j {
                v = mat_vec(&self.a, &v);
            }
            total = add(&total, &v);
        }
        total
    }

    pub fn words(&self, m: usize) -> Vec<Vec<usize>> {
        let k = self.d.len();
        let total = k.pow(m as u32);
        (0..total)
            .map(|mut idx| {
                (0..m)
                    .map(|_| {
                        let digit = idx % k;
                        idx /= k;
                        digit
                    })
                    .collect()
            })
            .collect()
    }

    /// Every point of `D_m` with its iterated coefficient and preimage words.
    pub fn enumerate(&self, m: usize) -> BTreeMap<QPoint, (Q, Vec<Vec<usize>>)> {
        // images[j][i] = A^j d_i
        let mut images = vec![self.d.clone()];
        for j in 1..m {
            let next = images[j - 1].iter().map(|v| mat_vec(&self.a, v)).collect();
            images.push(next);
        }
        let mut out: BTreeMap<QPoint, (Q, Vec<Vec<usize>>)> = BTreeMap::new();
        for w in self.words(m) {
            let coeff = w.iter().fold(q(1, 1), |acc, &i| acc * &self.c[i]);
            let point = w
                .iter()
                .enumerate()
                .fold(vec![Q::zero(); self.dim()], |acc, (j, &i)| {
                    add(&acc, &images[j][i])
                });
            let e = out.entry(point).or_insert_with(|| (Q::zero(), Vec::new()));
            e.0 += coeff;
            e.1.push(w);
        }
        out
    }

    pub fn scaled_translations(&self, s: &Q) -> Self {
        ExactEquation {
            a: self.a.clone(),
            d: self
                .d
                .iter()
                .map(|p| p.iter().map(|x| x * s).collect())
                .collect(),
            c: self.c.clone(),
        }
    }
}

fn small_rational(rng: &mut ChaCha8Rng, max_abs: i64) -> Q {
    let den = rng.random_range(1..=8);
    let num = rng.random_range(-max_abs * den..=max_abs * den);
    q(num, den)
}

fn nonzero_rational(rng: &mut ChaCha8Rng, max_abs: i64) -> Q {
    loop {
        let x = small_rational(rng, max_abs);
        if !x.is_zero() {
            return x;
        }
    }
}

/// Random admissible equation with `n ∈ {1, 2}`, `2 ≤ |D| ≤ 4` and entries
/// of denominator at most 8. Coefficients are drawn so that they do not
/// nearly cancel (`|Σ c| ≥ Σ|c| / 4`), keeping relative checks on `Σ c̃`
/// meaningful.
pub fn random_equation(rng: &mut ChaCha8Rng) -> ExactEquation {
    loop {
        let n = rng.random_range(1..=2);
        let a: Vec<Vec<Q>> = (0..n)
            .map(|_| (0..n).map(|_| small_rational(rng, 3)).collect())
            .collect();
        let k = rng.random_range(2..=4);
        let mut d: Vec<QPoint> = Vec::new();
        while d.len() < k {
            let p: QPoint = (0..n).map(|_| small_rational(rng, 2)).collect();
            if !d.contains(&p) {
                d.push(p);
            }
        }
        let c: Vec<Q> = (0..k).map(|_| nonzero_rational(rng, 2)).collect();
        let sum: Q = c.iter().sum();
        let abs_sum: Q = c.iter().map(|x| x.abs()).sum();
        if sum.abs() * q(4, 1) < abs_sum {
            continue;
        }
        let eq = ExactEquation { a, d, c };
        if !validate(&eq.library()).has_errors() {
            return eq;
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.1 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

pub fn hamming(a: &[usize], b: &[usize]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

pub fn points_of(p: &refinable::scalar::Point) -> QPoint {
    p.iter().map(|x| x.to_rational()).collect()
}
