//! Extremal-point geometry of finite point sets.

use std::cmp::Ordering;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cmp_points, dot, max_norm_distance, sub_points, Arithmetic, Point, Scalar};

/// Float-mode tolerance of the hull vertex tests.
pub const HULL_TOL: f64 = 1e-9;

/// Unit direction with the index it was drawn at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub u: Vec<f64>,
    pub seed_index: usize,
}

impl Direction {
    /// Normalizes `u`; `None` for the zero vector.
    pub fn new(u: Vec<f64>, seed_index: usize) -> Option<Self> {
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return None;
        }
        Some(Direction {
            u: u.iter().map(|x| x / norm).collect(),
            seed_index,
        })
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    /// Components as scalars of the given mode (exact lift in exact mode).
    pub fn lift(&self, mode: Arithmetic) -> Vec<Scalar> {
        self.u.iter().map(|&x| Scalar::from_f64(mode, x)).collect()
    }
}

/// Deterministic pseudo-random unit vectors. Dimension one always yields
/// `[+1, −1]`. A larger `count` extends the list of a smaller one.
pub fn sample_directions(n: usize, count: usize, seed: u64) -> Vec<Direction> {
    if n == 1 {
        return vec![
            Direction::new(vec![1.0], 0).unwrap(),
            Direction::new(vec![-1.0], 1).unwrap(),
        ];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        if let Some(d) = Direction::new(v, out.len()) {
            if d.u.iter().map(|x| x * x).sum::<f64>() > 0.0 {
                out.push(d);
            }
        }
    }
    out
}

fn check_distinct(points: &[Point]) -> Result<()> {
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let same = match points[i][0].mode() {
                Arithmetic::Exact => points[i] == points[j],
                Arithmetic::Float => max_norm_distance(&points[i], &points[j]) <= HULL_TOL,
            };
            if same {
                return Err(Error::DuplicatePoint(i, j));
            }
        }
    }
    Ok(())
}

/// Indices (ascending) of the points that are vertices of the convex hull.
pub fn extremal_subset(points: &[Point]) -> Result<Vec<usize>> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("empty point set".into()));
    }
    check_distinct(points)?;
    if points.len() == 1 {
        return Ok(vec![0]);
    }
    let mut idx = match points[0].len() {
        1 => {
            let cmp = |a: &usize, b: &usize| points[*a][0].cmp_value(&points[*b][0]);
            let lo = (0..points.len()).min_by(cmp).unwrap();
            let hi = (0..points.len()).max_by(cmp).unwrap();
            vec![lo, hi]
        }
        2 => monotone_chain(points),
        _ => (0..points.len())
            .filter(|&i| {
                let others: Vec<Point> = points
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, p)| p.clone())
                    .collect();
                !in_convex_hull(&others, &points[i])
            })
            .collect(),
    };
    idx.sort_unstable();
    idx.dedup();
    Ok(idx)
}

fn cross(o: &Point, a: &Point, b: &Point) -> Scalar {
    let oa = sub_points(a, o);
    let ob = sub_points(b, o);
    &(&oa[0] * &ob[1]) - &(&oa[1] * &ob[0])
}

/// Strict left turn; collinear points are not hull vertices.
fn left_turn(o: &Point, a: &Point, b: &Point) -> bool {
    let c = cross(o, a, b);
    match c {
        Scalar::Exact(_) => c.cmp_value(&Scalar::zero(Arithmetic::Exact)) == Ordering::Greater,
        Scalar::Float(x) => {
            let scale = max_norm_distance(a, o).max(1.0) * max_norm_distance(b, o).max(1.0);
            x > HULL_TOL * scale
        }
    }
}

fn monotone_chain(points: &[Point]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| cmp_points(&points[a], &points[b]));
    let mut hull: Vec<usize> = Vec::with_capacity(2 * order.len());
    for pass in 0..2 {
        let start = hull.len();
        let seq: Box<dyn Iterator<Item = &usize>> = if pass == 0 {
            Box::new(order.iter())
        } else {
            Box::new(order.iter().rev())
        };
        for &i in seq {
            while hull.len() >= start + 2
                && !left_turn(
                    &points[hull[hull.len() - 2]],
                    &points[hull[hull.len() - 1]],
                    &points[i],
                )
            {
                hull.pop();
            }
            hull.push(i);
        }
        hull.pop();
    }
    hull
}

fn is_pos(s: &Scalar) -> bool {
    match s {
        Scalar::Exact(_) => s.cmp_value(&Scalar::zero(Arithmetic::Exact)) == Ordering::Greater,
        Scalar::Float(x) => *x > HULL_TOL,
    }
}

fn is_neg(s: &Scalar) -> bool {
    is_pos(&-s)
}

/// Whether `target` is a convex combination of `points`, by a phase-one
/// simplex with Bland's rule. Exact in exact mode.
pub fn in_convex_hull(points: &[Point], target: &Point) -> bool {
    if points.is_empty() {
        return false;
    }
    let mode = target[0].mode();
    let n = target.len();
    let k = points.len();
    let rows = n + 1;
    let cols = k + rows + 1;
    let rhs = cols - 1;
    let zero = Scalar::zero(mode);
    let one = Scalar::one(mode);
    let mut t = vec![vec![zero.clone(); cols]; rows];
    for r in 0..n {
        for (j, p) in points.iter().enumerate() {
            t[r][j] = p[r].clone();
        }
        t[r][rhs] = target[r].clone();
    }
    for cell in &mut t[n][..k] {
        *cell = one.clone();
    }
    t[n][rhs] = one.clone();
    for (r, row) in t.iter_mut().enumerate() {
        if row[rhs].cmp_value(&zero) == Ordering::Less {
            for x in row.iter_mut() {
                *x = -&*x;
            }
        }
        row[k + r] = one.clone();
    }
    let mut basis: Vec<usize> = (k..k + rows).collect();
    // Reduced costs of minimizing the sum of artificials.
    let mut cost = vec![zero.clone(); cols];
    for row in &t {
        for j in 0..k {
            cost[j] = &cost[j] - &row[j];
        }
        cost[rhs] = &cost[rhs] - &row[rhs];
    }
    for _ in 0..10_000 {
        let Some(enter) = (0..k + rows).find(|&j| is_neg(&cost[j])) else {
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best: Option<Scalar> = None;
        for r in 0..rows {
            if !is_pos(&t[r][enter]) {
                continue;
            }
            let ratio = t[r][rhs].checked_div(&t[r][enter]).expect("positive pivot");
            let better = match &best {
                None => true,
                Some(b) => match ratio.cmp_value(b) {
                    Ordering::Less => true,
                    Ordering::Equal => basis[r] < basis[leave.unwrap()],
                    Ordering::Greater => false,
                },
            };
            if better {
                best = Some(ratio);
                leave = Some(r);
            }
        }
        let Some(pr) = leave else {
            break;
        };
        let pivot = t[pr][enter].clone();
        for x in t[pr].iter_mut() {
            *x = x.checked_div(&pivot).expect("nonzero pivot");
        }
        let prow = t[pr].clone();
        for (r, row) in t.iter_mut().enumerate() {
            if r == pr || row[enter].is_zero() {
                continue;
            }
            let f = row[enter].clone();
            for (x, p) in row.iter_mut().zip(&prow) {
                *x = &*x - &(&f * p);
            }
        }
        if !cost[enter].is_zero() {
            let f = cost[enter].clone();
            for (x, p) in cost.iter_mut().zip(&prow) {
                *x = &*x - &(&f * p);
            }
        }
        basis[pr] = enter;
    }
    // cost[rhs] holds minus the residual artificial mass.
    !is_neg(&cost[rhs])
}

/// Outcome of the `(u, r₀)` isolation test.
#[derive(Debug, Clone, PartialEq)]
pub struct IsolationWitness {
    pub holds: bool,
    pub maximizer: Point,
    pub runner_up: Option<Point>,
    /// `⟨u, z₀⟩ − max_{z≠z₀} ⟨u, z⟩`; `None` stands for +∞ (single point).
    pub gap: Option<Scalar>,
}

impl IsolationWitness {
    pub fn gap_f64(&self) -> f64 {
        self.gap.as_ref().map_or(f64::INFINITY, Scalar::to_f64)
    }
}

/// Tests whether `points` has a `(u, r0)`-isolated extremal point. A tie
/// for the maximum gives `holds = false` with gap zero.
pub fn is_isolated(points: &[Point], u: &Direction, r0: f64) -> IsolationWitness {
    assert!(!points.is_empty(), "empty point set");
    let mode = points[0][0].mode();
    let lifted = u.lift(mode);
    let mut proj: Vec<(Scalar, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (dot(&lifted, p), i))
        .collect();
    proj.sort_by(|a, b| b.0.cmp_value(&a.0).then(a.1.cmp(&b.1)));
    let maximizer = points[proj[0].1].clone();
    if proj.len() == 1 {
        return IsolationWitness {
            holds: true,
            maximizer,
            runner_up: None,
            gap: None,
        };
    }
    let runner_up = points[proj[1].1].clone();
    if proj[0].0.ties_with(&proj[1].0) {
        return IsolationWitness {
            holds: false,
            maximizer,
            runner_up: Some(runner_up),
            gap: Some(Scalar::zero(mode)),
        };
    }
    let gap = &proj[0].0 - &proj[1].0;
    IsolationWitness {
        holds: gap.cmp_value(&Scalar::from_f64(mode, r0)) == Ordering::Greater,
        maximizer,
        runner_up: Some(runner_up),
        gap: Some(gap),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(mode: Arithmetic, raw: &[&[f64]]) -> Vec<Point> {
        raw.iter()
            .map(|r| r.iter().map(|&x| Scalar::from_f64(mode, x)).collect())
            .collect()
    }

    #[test]
    fn interval_endpoints() {
        let p = pts(Arithmetic::Exact, &[&[0.0], &[1.0], &[2.0]]);
        assert_eq!(extremal_subset(&p).unwrap(), vec![0, 2]);
        let p = pts(Arithmetic::Float, &[&[0.0], &[1.0], &[2.0], &[3.0]]);
        assert_eq!(extremal_subset(&p).unwrap(), vec![0, 3]);
    }

    #[test]
    fn square_with_center() {
        for mode in [Arithmetic::Exact, Arithmetic::Float] {
            let p = pts(
                mode,
                &[
                    &[0.0, 0.0],
                    &[1.0, 0.0],
                    &[0.5, 0.5],
                    &[1.0, 1.0],
                    &[0.0, 1.0],
                ],
            );
            assert_eq!(extremal_subset(&p).unwrap(), vec![0, 1, 3, 4]);
        }
    }

    #[test]
    fn collinear_midpoints_are_not_vertices() {
        let p = pts(Arithmetic::Exact, &[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]]);
        assert_eq!(extremal_subset(&p).unwrap(), vec![0, 2]);
    }

    #[test]
    fn cube_with_interior_and_face_points_via_lp() {
        let mut raw: Vec<Vec<f64>> = Vec::new();
        for b in 0..8 {
            raw.push(vec![
                (b & 1) as f64,
                ((b >> 1) & 1) as f64,
                ((b >> 2) & 1) as f64,
            ]);
        }
        raw.push(vec![0.5, 0.5, 0.5]);
        raw.push(vec![0.5, 0.5, 0.0]);
        let refs: Vec<&[f64]> = raw.iter().map(|v| v.as_slice()).collect();
        for mode in [Arithmetic::Exact, Arithmetic::Float] {
            let p = pts(mode, &refs);
            assert_eq!(extremal_subset(&p).unwrap(), (0..8).collect::<Vec<_>>());
        }
    }

    #[test]
    fn duplicates_rejected() {
        let p = pts(Arithmetic::Exact, &[&[0.0], &[0.0]]);
        assert!(matches!(
            extremal_subset(&p),
            Err(Error::DuplicatePoint(0, 1))
        ));
    }

    #[test]
    fn directions_are_deterministic_unit_vectors() {
        assert_eq!(
            sample_directions(1, 17, 3)
                .iter()
                .map(|d| d.u.clone())
                .collect::<Vec<_>>(),
            vec![vec![1.0], vec![-1.0]]
        );
        let a = sample_directions(2, 8, 7);
        let b = sample_directions(2, 8, 7);
        assert_eq!(a, b);
        assert_eq!(a.len(), 8);
        for d in &a {
            let norm = d.u.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() <= 1e-12);
        }
        let longer = sample_directions(2, 12, 7);
        assert_eq!(&longer[..8], &a[..]);
    }

    #[test]
    fn isolation_examples() {
        let p = pts(Arithmetic::Exact, &[&[0.0], &[1.0], &[3.0]]);
        let up = Direction::new(vec![1.0], 0).unwrap();
        let w = is_isolated(&p, &up, 1.5);
        assert!(w.holds);
        assert_eq!(w.maximizer, p[2]);
        assert_eq!(w.gap, Some(Scalar::from_integer(Arithmetic::Exact, 2)));
        let w = is_isolated(&p, &up, 2.5);
        assert!(!w.holds);
        assert_eq!(w.gap_f64(), 2.0);

        let q = pts(Arithmetic::Float, &[&[1.0, 0.0], &[0.0, 1.0]]);
        let diag = Direction::new(vec![1.0, 1.0], 0).unwrap();
        let w = is_isolated(&q, &diag, 0.1);
        assert!(!w.holds);
        assert_eq!(w.gap_f64(), 0.0);

        let single = pts(Arithmetic::Exact, &[&[4.0]]);
        let w = is_isolated(&single, &up, 100.0);
        assert!(w.holds && w.gap.is_none() && w.gap_f64().is_infinite());
    }
}
