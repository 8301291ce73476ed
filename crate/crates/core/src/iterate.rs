//! Iterated masks and the extremal / second-extremal structure of `D_m`.
//!
//! `π_m([d_0, …, d_{m−1}]) = Σ A^j d_j` maps digit words to points of `D_m`.
//! Along a generic direction `u` the maximizer of `⟨u, ·⟩` over `D_m` is
//! found digit by digit (digit `j` maximizes `⟨(Aᵀ)^j u, d⟩`), and the
//! runner-up differs from it in exactly one digit, so both are available in
//! `O(m·|D|)` without enumerating `D^m`.

use std::cmp::Ordering;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equation::RefinementEquation;
use crate::error::{Error, Result};
use crate::hull::{sample_directions, Direction};
use crate::linalg::{self, DEFAULT_TOL};
use crate::scalar::{
    add_points, cmp_points, dot, max_norm_distance, sub_points, Arithmetic, Point, Scalar,
};

/// Default cap on `|D|^m` for explicit enumeration.
pub const DEFAULT_BUDGET: u64 = 1_000_000;
/// Max-norm tolerance for merging points of `D_m` in float mode.
pub const MERGE_TOL: f64 = 1e-9;

/// `π_m` of a digit word (translation indices, lowest power first).
pub fn pi_m(eq: &RefinementEquation, word: &[usize]) -> Result<Point> {
    if word.is_empty() {
        return Err(Error::EmptyWord);
    }
    if let Some(&bad) = word.iter().find(|&&d| d >= eq.len()) {
        return Err(Error::BadDigit(bad));
    }
    // Horner: d_0 + A(d_1 + A(d_2 + …))
    let d = eq.translations();
    let mut acc = d[*word.last().unwrap()].clone();
    for &digit in word.iter().rev().skip(1) {
        acc = add_points(&d[digit], &eq.dilation().mul_vec(&acc));
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskEntry {
    #[serde(skip)]
    pub point: Point,
    pub coefficient: f64,
}

/// The set `D_m` with accumulated coefficients `c̃_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct IteratedMask {
    pub level: usize,
    /// Sorted lexicographically by coordinates.
    pub entries: Vec<MaskEntry>,
    /// Words merged beyond one per point: `|D|^m − |D_m|`.
    pub collision_count: u64,
}

impl IteratedMask {
    pub fn coefficient_sum(&self) -> f64 {
        self.entries.iter().map(|e| e.coefficient).sum()
    }

    pub fn points(&self) -> Vec<Point> {
        self.entries.iter().map(|e| e.point.clone()).collect()
    }

    /// Accumulated coefficient at `point`, if it lies in `D_m`.
    pub fn coefficient_at(&self, point: &Point) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| match point[0].mode() {
                Arithmetic::Exact => &e.point == point,
                Arithmetic::Float => max_norm_distance(&e.point, point) <= MERGE_TOL,
            })
            .map(|e| e.coefficient)
    }
}

fn word_count(eq: &RefinementEquation, m: usize) -> u128 {
    (eq.len() as u128)
        .checked_pow(m as u32)
        .unwrap_or(u128::MAX)
}

/// Enumerates `D_m` with `c̃_d = Σ_{π_m(v)=d} Π c_{v_j}`, built level by level
/// through `D_{k+1} = D + A·D_k`.
pub fn iterated_mask(eq: &RefinementEquation, m: usize, budget: u64) -> Result<IteratedMask> {
    if m == 0 {
        return Err(Error::InvalidArgument("level must be positive".into()));
    }
    let words = word_count(eq, m);
    if words > budget as u128 {
        return Err(Error::BudgetExceeded {
            level: m,
            words,
            budget,
        });
    }
    let mode = eq.arithmetic();
    let base: Vec<(Point, f64)> = eq
        .translations()
        .iter()
        .cloned()
        .zip(eq.coefficients().iter().copied())
        .collect();
    let mut level = merge(base, mode);
    for _ in 1..m {
        let scaled: Vec<(Point, f64)> = level
            .iter()
            .map(|(p, c)| (eq.dilation().mul_vec(p), *c))
            .collect();
        let mut next = Vec::with_capacity(scaled.len() * eq.len());
        for (d, cd) in eq.translations().iter().zip(eq.coefficients()) {
            for (p, c) in &scaled {
                next.push((add_points(d, p), cd * c));
            }
        }
        level = merge(next, mode);
    }
    let collision_count = (words - level.len() as u128) as u64;
    Ok(IteratedMask {
        level: m,
        entries: level
            .into_iter()
            .map(|(point, coefficient)| MaskEntry { point, coefficient })
            .collect(),
        collision_count,
    })
}

fn merge(mut items: Vec<(Point, f64)>, mode: Arithmetic) -> Vec<(Point, f64)> {
    items.sort_by(|a, b| cmp_points(&a.0, &b.0));
    let mut out: Vec<(Point, f64)> = Vec::with_capacity(items.len());
    for (p, c) in items {
        match mode {
            Arithmetic::Exact => match out.last_mut() {
                Some((q, acc)) if *q == p => *acc += c,
                _ => out.push((p, c)),
            },
            Arithmetic::Float => {
                let first = p[0].to_f64();
                let hit = out
                    .iter_mut()
                    .rev()
                    .take_while(|(q, _)| first - q[0].to_f64() <= MERGE_TOL)
                    .find(|(q, _)| max_norm_distance(q, &p) <= MERGE_TOL);
                match hit {
                    Some((_, acc)) => *acc += c,
                    None => out.push((p, c)),
                }
            }
        }
    }
    out
}

/// The maximizer `d_m^u` of `⟨u, ·⟩` over `D_m` and its digit word.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalDecomposition {
    pub direction: Direction,
    pub level: usize,
    pub digits: Vec<usize>,
    pub point: Point,
    /// `Π c_{d_j}`, equal to `c̃` at `point` when `unique`.
    pub coeff_product: f64,
    /// `Σ log|c_{d_j}|`.
    pub log_abs_product: f64,
    /// No two translations tied at any digit position.
    pub unique: bool,
}

/// The runner-up `e_m^u = d_m^u − A^{p_m} v_m` and the gap `g_m(u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondExtremal {
    pub point: Point,
    /// `p_m`, the single digit position where `e_m^u` differs.
    pub swap_position: usize,
    /// Translation index replacing the maximizer's digit at `swap_position`.
    pub replacement: usize,
    /// `v_m = d_{p_m} − e_{p_m}`.
    pub difference: Point,
    /// `g_m(u) = ⟨u, A^{p_m} v_m⟩`.
    pub gap: Scalar,
    /// The runner-up point is determined without ties.
    pub unique: bool,
}

#[derive(Debug, Clone)]
struct PositionScan {
    best: usize,
    best_tied: bool,
    /// Runner-up digit and `⟨w_j, d_best − d_runner⟩`.
    runner: Option<(usize, Scalar)>,
    runner_tied: bool,
}

/// Per-position projection data for one direction, reusable for every level
/// up to the scanned depth.
#[derive(Debug, Clone)]
pub struct DirectionScan {
    direction: Direction,
    positions: Vec<PositionScan>,
}

/// Evidence for one `(m, u)` pair with a unique maximizer and runner-up.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelEvidence {
    pub m: usize,
    pub direction: Direction,
    pub digits: Vec<usize>,
    pub coeff_product: f64,
    pub log_abs_product: f64,
    pub gap: Scalar,
    pub swap_position: usize,
    pub replacement: usize,
    pub difference: Point,
}

impl DirectionScan {
    pub fn new(eq: &RefinementEquation, direction: &Direction, depth: usize) -> Self {
        let mode = eq.arithmetic();
        let mut w = direction.lift(mode);
        let mut positions = Vec::with_capacity(depth);
        for j in 0..depth {
            if j > 0 {
                w = eq.dilation().transpose_mul_vec(&w);
            }
            let mut proj: Vec<(Scalar, usize)> = eq
                .translations()
                .iter()
                .enumerate()
                .map(|(i, d)| (dot(&w, d), i))
                .collect();
            proj.sort_by(|a, b| b.0.cmp_value(&a.0).then(a.1.cmp(&b.1)));
            let best = proj[0].1;
            let best_tied = proj.len() > 1 && proj[0].0.ties_with(&proj[1].0);
            let runner = proj.get(1).map(|(v, i)| (*i, &proj[0].0 - v));
            let runner_tied = proj.len() > 2 && proj[1].0.ties_with(&proj[2].0);
            positions.push(PositionScan {
                best,
                best_tied,
                runner,
                runner_tied,
            });
        }
        DirectionScan {
            direction: direction.clone(),
            positions,
        }
    }

    pub fn direction(&self) -> &Direction {
        &self.direction
    }

    pub fn depth(&self) -> usize {
        self.positions.len()
    }

    pub fn digits(&self, m: usize) -> Vec<usize> {
        self.positions[..m].iter().map(|p| p.best).collect()
    }

    pub fn unique(&self, m: usize) -> bool {
        self.positions[..m].iter().all(|p| !p.best_tied)
    }

    pub fn decomposition(&self, eq: &RefinementEquation, m: usize) -> ExtremalDecomposition {
        let digits = self.digits(m);
        let unique = self.unique(m);
        if !unique {
            warn!(
                "direction {} ties at level {m}; resample",
                self.direction.seed_index
            );
        }
        let c = eq.coefficients();
        ExtremalDecomposition {
            direction: self.direction.clone(),
            level: m,
            point: pi_m(eq, &digits).expect("valid digits"),
            coeff_product: digits.iter().map(|&d| c[d]).product(),
            log_abs_product: digits.iter().map(|&d| c[d].abs().ln()).sum(),
            digits,
            unique,
        }
    }

    /// Minimal single-digit swap over positions `< m`, with a flag telling
    /// whether the runner-up point is unambiguous.
    fn best_swap(&self, eq: &RefinementEquation, m: usize) -> Option<(usize, usize, Scalar, bool)> {
        let mut best: Option<(usize, usize, Scalar)> = None;
        for (k, pos) in self.positions[..m].iter().enumerate() {
            let Some((alt, gap)) = &pos.runner else {
                return None;
            };
            let better = match &best {
                None => true,
                Some((_, _, g)) => gap.cmp_value(g) == Ordering::Less,
            };
            if better {
                best = Some((k, *alt, gap.clone()));
            }
        }
        let (k, alt, gap) = best?;
        let mut unique = !self.positions[k].runner_tied;
        if unique {
            let shift = |k: usize, alt: usize| {
                let d = eq.translations();
                let mut v = sub_points(&d[self.positions[k].best], &d[alt]);
                for _ in 0..k {
                    v = eq.dilation().mul_vec(&v);
                }
                v
            };
            let mut reference: Option<Point> = None;
            for (k2, pos) in self.positions[..m].iter().enumerate() {
                if k2 == k {
                    continue;
                }
                let (alt2, gap2) = pos.runner.as_ref().expect("checked above");
                if gap2.ties_with(&gap) {
                    let r = reference.get_or_insert_with(|| shift(k, alt));
                    let other = shift(k2, *alt2);
                    let same = match eq.arithmetic() {
                        Arithmetic::Exact => *r == other,
                        Arithmetic::Float => max_norm_distance(r, &other) <= MERGE_TOL,
                    };
                    if !same {
                        unique = false;
                        break;
                    }
                }
            }
        }
        Some((k, alt, gap, unique))
    }

    pub fn second(&self, eq: &RefinementEquation, m: usize) -> Result<SecondExtremal> {
        if eq.len() < 2 {
            return Err(Error::NoRunnerUp);
        }
        let (k, alt, gap, swap_unique) = self.best_swap(eq, m).ok_or(Error::NoRunnerUp)?;
        let digits = self.digits(m);
        let mut swapped = digits.clone();
        swapped[k] = alt;
        let d = eq.translations();
        Ok(SecondExtremal {
            point: pi_m(eq, &swapped).expect("valid digits"),
            swap_position: k,
            replacement: alt,
            difference: sub_points(&d[digits[k]], &d[alt]),
            gap,
            unique: swap_unique && self.unique(m),
        })
    }

    /// Evidence at level `m`, or `None` when the direction is degenerate there.
    pub fn evidence(&self, eq: &RefinementEquation, m: usize) -> Option<LevelEvidence> {
        if !self.unique(m) {
            return None;
        }
        let (k, alt, gap, unique) = self.best_swap(eq, m)?;
        if !unique {
            return None;
        }
        let digits = self.digits(m);
        let c = eq.coefficients();
        let d = eq.translations();
        Some(LevelEvidence {
            m,
            direction: self.direction.clone(),
            coeff_product: digits.iter().map(|&i| c[i]).product(),
            log_abs_product: digits.iter().map(|&i| c[i].abs().ln()).sum(),
            difference: sub_points(&d[digits[k]], &d[alt]),
            digits,
            gap,
            swap_position: k,
            replacement: alt,
        })
    }
}

pub fn extremal_decomposition(
    eq: &RefinementEquation,
    u: &Direction,
    m: usize,
) -> Result<ExtremalDecomposition> {
    check_direction(eq, u, m)?;
    Ok(DirectionScan::new(eq, u, m).decomposition(eq, m))
}

pub fn second_extremal(eq: &RefinementEquation, u: &Direction, m: usize) -> Result<SecondExtremal> {
    check_direction(eq, u, m)?;
    if eq.len() < 2 {
        return Err(Error::NoRunnerUp);
    }
    let scan = DirectionScan::new(eq, u, m);
    if !scan.unique(m) {
        return Err(Error::DegenerateDirection(format!(
            "maximizer along direction {} is not unique at level {m}",
            u.seed_index
        )));
    }
    scan.second(eq, m)
}

fn check_direction(eq: &RefinementEquation, u: &Direction, m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidArgument("level must be positive".into()));
    }
    if u.dim() != eq.dim() {
        return Err(Error::DimensionMismatch(format!(
            "direction has {} components, equation dimension is {}",
            u.dim(),
            eq.dim()
        )));
    }
    Ok(())
}

/// Scans every direction to depth `m_max`; order follows `dirs`.
pub fn scan_directions(
    eq: &RefinementEquation,
    dirs: &[Direction],
    m_max: usize,
) -> Vec<DirectionScan> {
    dirs.par_iter()
        .map(|u| DirectionScan::new(eq, u, m_max))
        .collect()
}

/// One row of the isolation evidence table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolationRow {
    pub m: usize,
    /// `None` when every sampled direction was degenerate at this level.
    pub best: Option<EvidenceRecord>,
    pub degenerate_directions: usize,
}

/// Serializable form of [`LevelEvidence`] with its bound contribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceRecord {
    pub m: usize,
    pub u: Vec<f64>,
    pub direction_index: usize,
    pub digits: Vec<usize>,
    pub gap: f64,
    pub p_m: usize,
    pub v_m: Vec<f64>,
    pub coeff_product: f64,
    /// `log|Π c_{d_j}| / (m log τ)`.
    pub bound_contribution: f64,
}

impl EvidenceRecord {
    pub fn from_evidence(ev: &LevelEvidence, tau: f64) -> Self {
        EvidenceRecord {
            m: ev.m,
            u: ev.direction.u.clone(),
            direction_index: ev.direction.seed_index,
            digits: ev.digits.clone(),
            gap: ev.gap.to_f64(),
            p_m: ev.swap_position,
            v_m: ev.difference.iter().map(Scalar::to_f64).collect(),
            coeff_product: ev.coeff_product,
            bound_contribution: ev.log_abs_product / (ev.m as f64 * tau.ln()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceTable {
    pub tau: f64,
    pub rows: Vec<IsolationRow>,
}

/// For each level `1..=m_max`, the sampled direction with the largest gap
/// `g_m(u)` (lowest direction index on ties).
pub fn isolation_search(
    eq: &RefinementEquation,
    m_max: usize,
    dir_count: usize,
    seed: u64,
) -> Result<EvidenceTable> {
    if m_max == 0 || dir_count == 0 {
        return Err(Error::InvalidArgument(
            "m_max and dir_count must be positive".into(),
        ));
    }
    if eq.len() < 2 {
        return Err(Error::NoRunnerUp);
    }
    let tau = linalg::spectral_radius_inverse(eq, DEFAULT_TOL)?.tau;
    let dirs = sample_directions(eq.dim(), dir_count, seed);
    let scans = scan_directions(eq, &dirs, m_max);
    let rows = (1..=m_max)
        .map(|m| {
            let mut best: Option<LevelEvidence> = None;
            let mut degenerate = 0;
            for scan in &scans {
                match scan.evidence(eq, m) {
                    None => degenerate += 1,
                    Some(ev) => {
                        let better = best
                            .as_ref()
                            .is_none_or(|b| ev.gap.cmp_value(&b.gap) == Ordering::Greater);
                        if better {
                            best = Some(ev);
                        }
                    }
                }
            }
            if best.is_none() {
                warn!("all {} directions degenerate at level {m}", scans.len());
            }
            IsolationRow {
                m,
                best: best.map(|ev| EvidenceRecord::from_evidence(&ev, tau)),
                degenerate_directions: degenerate,
            }
        })
        .collect();
    Ok(EvidenceTable { tau, rows })
}
