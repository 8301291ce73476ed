//! Point-cloud approximation of the attractor `T = ∪_d A⁻¹(T + d)` of the
//! IFS associated with the equation. The support of every compactly
//! supported solution lies inside `T`.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::equation::{sorted_translation_order, RefinementEquation};
use crate::error::{Error, Result};
use crate::hull::Direction;
use crate::linalg::dense::{self, Lu};
use crate::linalg::{self, DEFAULT_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorCloud {
    pub depth: usize,
    pub points: Vec<Vec<f64>>,
    /// Per-axis `[min, max]`.
    pub bounding_box: Vec<[f64; 2]>,
    /// Largest move of any bounding-box face at each iteration; shrinks at
    /// rate about τ once the transient has passed.
    pub step_diameters: Vec<f64>,
    pub notes: Vec<String>,
}

struct Ifs {
    inverse: Vec<Vec<f64>>,
    /// `A⁻¹ d` in lexicographic translation order.
    offsets: Vec<Vec<f64>>,
}

impl Ifs {
    fn new(eq: &RefinementEquation) -> Self {
        let inverse = dense::inverse(&eq.dilation().to_f64_rows());
        let offsets = sorted_translation_order(eq)
            .into_iter()
            .map(|i| {
                let d: Vec<f64> = eq.translations()[i].iter().map(|x| x.to_f64()).collect();
                dense::mat_vec(&inverse, &d)
            })
            .collect();
        Ifs { inverse, offsets }
    }

    fn apply(&self, cloud: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mapped: Vec<Vec<f64>> = cloud
            .iter()
            .map(|p| dense::mat_vec(&self.inverse, p))
            .collect();
        let mut out = Vec::with_capacity(cloud.len() * self.offsets.len());
        for off in &self.offsets {
            for p in &mapped {
                out.push(p.iter().zip(off).map(|(a, b)| a + b).collect());
            }
        }
        out
    }
}

fn bounding_box(points: &[Vec<f64>]) -> Vec<[f64; 2]> {
    let n = points[0].len();
    (0..n)
        .map(|k| {
            points
                .iter()
                .fold([f64::INFINITY, f64::NEG_INFINITY], |b, p| {
                    [b[0].min(p[k]), b[1].max(p[k])]
                })
        })
        .collect()
}

/// Keeps the per-axis extreme points and a seeded uniform sample of the rest,
/// in original order.
fn subsample(points: Vec<Vec<f64>>, budget: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points[0].len();
    let mut keep = vec![false; points.len()];
    for k in 0..n {
        let by = |a: &usize, b: &usize| points[*a][k].total_cmp(&points[*b][k]);
        keep[(0..points.len()).min_by(by).unwrap()] = true;
        keep[(0..points.len()).max_by(by).unwrap()] = true;
    }
    let rest: Vec<usize> = (0..points.len()).filter(|&i| !keep[i]).collect();
    let kept = keep.iter().filter(|&&k| k).count();
    let want = budget.saturating_sub(kept).min(rest.len());
    for j in sample(rng, rest.len(), want) {
        keep[rest[j]] = true;
    }
    points
        .into_iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect()
}

/// Iterates the Hutchinson operator `depth` times from the fixed point of the
/// map with the lexicographically smallest translation.
pub fn attractor_cloud(
    eq: &RefinementEquation,
    depth: usize,
    budget: usize,
    seed: u64,
) -> Result<AttractorCloud> {
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    if budget < eq.len() {
        return Err(Error::InvalidArgument(format!(
            "budget {budget} below the number of translations {}",
            eq.len()
        )));
    }
    let n = eq.dim();
    let ifs = Ifs::new(eq);
    let mut notes = Vec::new();
    let a = eq.dilation().to_f64_rows();
    let shifted: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| a[i][j] - if i == j { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    let lu = Lu::factor(&shifted);
    let start = if lu.is_singular() {
        notes.push("A - I is singular; starting from the origin".to_string());
        vec![0.0; n]
    } else {
        let first = sorted_translation_order(eq)[0];
        let d0: Vec<f64> = eq.translations()[first]
            .iter()
            .map(|x| x.to_f64())
            .collect();
        lu.solve(&d0)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cloud = vec![start];
    let mut bbox = bounding_box(&cloud);
    let mut step_diameters = Vec::with_capacity(depth);
    let mut subsampled = false;
    for _ in 0..depth {
        let mut next = ifs.apply(&cloud);
        if next.len() > budget {
            next = subsample(next, budget, &mut rng);
            subsampled = true;
        }
        let nb = bounding_box(&next);
        let step = nb
            .iter()
            .zip(&bbox)
            .map(|(x, y)| (x[0] - y[0]).abs().max((x[1] - y[1]).abs()))
            .fold(0.0, f64::max);
        step_diameters.push(step);
        bbox = nb;
        cloud = next;
    }
    if subsampled {
        notes.push(format!("cloud subsampled to {budget} points per iteration"));
    }
    Ok(AttractorCloud {
        depth,
        points: cloud,
        bounding_box: bbox,
        step_diameters,
        notes,
    })
}

impl AttractorCloud {
    /// One-sided Hausdorff distance from `Φ(cloud)` to `cloud` (max norm).
    /// Quadratic in the cloud size; meant for diagnostics on small clouds.
    pub fn invariance_defect(&self, eq: &RefinementEquation) -> f64 {
        let image = Ifs::new(eq).apply(&self.points);
        image
            .iter()
            .map(|p| {
                self.points
                    .iter()
                    .map(|q| {
                        p.iter()
                            .zip(q)
                            .map(|(a, b)| (a - b).abs())
                            .fold(0.0, f64::max)
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }

    /// Largest value of `⟨u, x⟩` over the cloud and the point achieving it.
    pub fn support_point(&self, u: &Direction) -> (f64, &[f64]) {
        self.points
            .iter()
            .map(|p| {
                (
                    p.iter().zip(&u.u).map(|(a, b)| a * b).sum::<f64>(),
                    p.as_slice(),
                )
            })
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .expect("nonempty cloud")
    }
}

/// Extremal point of `T` for `u`, truncated after `depth` terms:
/// `Σ_{j=1}^{depth} A^{−j} d_j` with `d_j` maximizing `⟨u, A^{−j} d⟩`. The
/// second value bounds the distance to the untruncated point.
pub fn extremal_point_series(
    eq: &RefinementEquation,
    u: &Direction,
    depth: usize,
) -> Result<(Vec<f64>, f64)> {
    if u.dim() != eq.dim() {
        return Err(Error::DimensionMismatch(
            "direction and equation dimensions differ".into(),
        ));
    }
    let tau = linalg::spectral_radius_inverse(eq, DEFAULT_TOL)?.tau;
    let inverse = dense::inverse(&eq.dilation().to_f64_rows());
    let n = eq.dim();
    let mut images: Vec<Vec<f64>> = eq
        .translations()
        .iter()
        .map(|d| d.iter().map(|x| x.to_f64()).collect())
        .collect();
    let max_norm = images.iter().map(|d| dense::norm2(d)).fold(0.0, f64::max);
    let mut power = dense::inverse(&eq.dilation().to_f64_rows());
    let mut constant = 0.0f64;
    let mut point = vec![0.0; n];
    for j in 1..=depth {
        images = images.iter().map(|d| dense::mat_vec(&inverse, d)).collect();
        let mut proj: Vec<(f64, usize)> = images
            .iter()
            .enumerate()
            .map(|(i, d)| (d.iter().zip(&u.u).map(|(a, b)| a * b).sum::<f64>(), i))
            .collect();
        proj.sort_by(|a, b| b.0.total_cmp(&a.0));
        if proj.len() > 1 {
            let scale = 1f64.max(proj[0].0.abs()).max(proj[1].0.abs());
            if (proj[0].0 - proj[1].0).abs() <= crate::scalar::FLOAT_TIE_TOL * scale {
                return Err(Error::DegenerateDirection(format!(
                    "tie between translations {} and {} at term {j}",
                    proj[0].1, proj[1].1
                )));
            }
        }
        for (x, y) in point.iter_mut().zip(&images[proj[0].1]) {
            *x += y;
        }
        constant = constant.max(dense::frobenius(&power) / tau.powi(j as i32));
        power = dense::mat_mul(&power, &inverse);
    }
    let bound = max_norm * constant.max(1.0) * tau.powi(depth as i32 + 1) / (1.0 - tau);
    Ok((point, bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn up() -> Direction {
        Direction::new(vec![1.0], 0).unwrap()
    }

    fn down() -> Direction {
        Direction::new(vec![-1.0], 1).unwrap()
    }

    #[test]
    fn depth_one_applies_each_map_once() {
        let eq = presets::hat();
        let cloud = attractor_cloud(&eq, 1, 100, 0).unwrap();
        assert_eq!(cloud.points, vec![vec![0.0], vec![0.5], vec![1.0]]);
    }

    #[test]
    fn unit_interval_and_hat_support() {
        let haar = attractor_cloud(&presets::haar(), 20, 4096, 0).unwrap();
        assert!(haar.bounding_box[0][0].abs() < 1e-3);
        assert!((haar.bounding_box[0][1] - 1.0).abs() < 1e-3);
        let hat = attractor_cloud(&presets::hat(), 20, 4096, 0).unwrap();
        assert!(hat.bounding_box[0][0].abs() < 1e-3);
        assert!((hat.bounding_box[0][1] - 2.0).abs() < 1e-3);
        assert!(hat.points.len() <= 4096);
        let steps = &hat.step_diameters;
        assert!(steps[19] < steps[10]);
    }

    #[test]
    fn small_cloud_is_nearly_invariant() {
        let eq = presets::haar();
        let cloud = attractor_cloud(&eq, 10, 1 << 12, 0).unwrap();
        let defect = cloud.invariance_defect(&eq);
        assert!(
            defect <= 5.0 * cloud.step_diameters.last().unwrap(),
            "{defect}"
        );
    }

    #[test]
    fn series_endpoints() {
        let hat = presets::hat();
        let (top, bound) = extremal_point_series(&hat, &up(), 30).unwrap();
        assert!((top[0] - 2.0).abs() <= bound + 1e-15);
        let (bottom, _) = extremal_point_series(&hat, &down(), 30).unwrap();
        assert_eq!(bottom, vec![0.0]);
        let (haar_top, bound) = extremal_point_series(&presets::haar(), &up(), 30).unwrap();
        assert!((haar_top[0] - 1.0).abs() <= bound + 1e-15);
    }

    #[test]
    fn series_matches_cloud_support_point() {
        let eq = presets::daubechies4();
        let cloud = attractor_cloud(&eq, 8, 1 << 20, 0).unwrap();
        for u in [up(), down()] {
            let (p, bound) = extremal_point_series(&eq, &u, 8).unwrap();
            let (best, _) = cloud.support_point(&u);
            let proj: f64 = p.iter().zip(&u.u).map(|(a, b)| a * b).sum();
            assert!((best - proj).abs() <= bound + 1e-12);
        }
    }
}
