//! Standard test equations.

use crate::equation::RefinementEquation;
use crate::scalar::Arithmetic;

/// Hat function: `A = 2`, `D = {0, 1, 2}`, `c = {1/2, 1, 1/2}`.
pub fn hat() -> RefinementEquation {
    RefinementEquation::from_f64(
        Arithmetic::Exact,
        &[&[2.0]],
        &[&[0.0], &[1.0], &[2.0]],
        &[0.5, 1.0, 0.5],
    )
    .expect("valid preset")
}

/// Haar scaling function: `A = 2`, `D = {0, 1}`, `c = {1, 1}`.
pub fn haar() -> RefinementEquation {
    RefinementEquation::from_f64(Arithmetic::Exact, &[&[2.0]], &[&[0.0], &[1.0]], &[1.0, 1.0])
        .expect("valid preset")
}

/// Daubechies' four-tap scaling function, normalized so that `Σ c_d = 2`.
pub fn daubechies4() -> RefinementEquation {
    let s3 = 3f64.sqrt();
    RefinementEquation::from_f64(
        Arithmetic::Exact,
        &[&[2.0]],
        &[&[0.0], &[1.0], &[2.0], &[3.0]],
        &[
            (1.0 + s3) / 4.0,
            (3.0 + s3) / 4.0,
            (3.0 - s3) / 4.0,
            (1.0 - s3) / 4.0,
        ],
    )
    .expect("valid preset")
}
