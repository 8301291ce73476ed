//! Small dense double-precision solves.

/// LU factorization with partial pivoting of a square matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    singular: bool,
}

impl Lu {
    pub fn factor(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut lu: Vec<f64> = rows.iter().flatten().copied().collect();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = lu
            .iter()
            .fold(0.0f64, |a, x| a.max(x.abs()))
            .max(f64::MIN_POSITIVE);
        let mut singular = false;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&a, &b| lu[a * n + col].abs().total_cmp(&lu[b * n + col].abs()))
                .unwrap();
            if pivot != col {
                for c in 0..n {
                    lu.swap(pivot * n + c, col * n + c);
                }
                perm.swap(pivot, col);
            }
            if lu[col * n + col].abs() <= f64::EPSILON * scale * 1e-3 {
                // Exactly singular pivot; nudge so inverse iteration still
                // produces the null direction.
                singular = true;
                lu[col * n + col] = f64::EPSILON * scale;
            }
            let p = lu[col * n + col];
            for r in col + 1..n {
                let factor = lu[r * n + col] / p;
                lu[r * n + col] = factor;
                for c in col + 1..n {
                    lu[r * n + c] -= factor * lu[col * n + c];
                }
            }
        }
        Lu {
            n,
            lu,
            perm,
            singular,
        }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for r in 0..n {
            for c in 0..r {
                x[r] -= self.lu[r * n + c] * x[c];
            }
        }
        for r in (0..n).rev() {
            for c in r + 1..n {
                x[r] -= self.lu[r * n + c] * x[c];
            }
            x[r] /= self.lu[r * n + r];
        }
        x
    }
}

pub fn mat_vec(rows: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    rows.iter()
        .map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| a[j][i]).collect()).collect()
}

pub fn inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let lu = Lu::factor(a);
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            lu.solve(&e)
        })
        .collect();
    transpose(&cols)
}

pub fn frobenius(a: &[Vec<f64>]) -> f64 {
    a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
