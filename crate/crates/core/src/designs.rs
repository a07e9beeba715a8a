//! Knot placement: 1-D node sets, replication designs, the subset criterion
//! `c(A)`, random-subset search and sequential knot addition.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{dims, invalid, Error, Result};
use crate::estimators::{predict, FittedModel};
use crate::interpolators::KnotSet;

pub const DEFAULT_TRIALS: usize = 20_000;
pub const KNOTS_PER_DIMENSION: usize = 10;
const MIN_GAP: f64 = 1e-12;

/// `a_j = 1/2 - cos((2j - 1) pi / 2m) / 2`, ascending.
pub fn chebyshev_knots(m: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(invalid("need at least one Chebyshev node"));
    }
    Ok((1..=m)
        .map(|j| 0.5 - 0.5 * ((m as f64 + 1.0 - 2.0 * j as f64) * PI / (2 * m) as f64).sin())
        .collect())
}

/// `a_j = (j - 1)/(m - 1)`.
pub fn equispaced_knots(m: usize) -> Result<Vec<f64>> {
    if m < 2 {
        return Err(invalid("equispaced knots need m >= 2"));
    }
    Ok((0..m).map(|j| j as f64 / (m - 1) as f64).collect())
}

/// Default knot count `10 d`.
pub fn default_knot_count(d: usize) -> usize {
    KNOTS_PER_DIMENSION * d
}

/// `max_{i<j} sum_l 1 / |a_il - a_jl|`, with gaps clamped below at `1e-12`.
pub fn knot_criterion(knots: &KnotSet) -> Result<f64> {
    let rm = crate::kernels::row_major(knots.points());
    let idx: Vec<usize> = (0..knots.len()).collect();
    criterion_rows(&rm, knots.dim(), &idx)
}

fn criterion_rows(rm: &[f64], d: usize, rows: &[usize]) -> Result<f64> {
    if rows.len() < 2 {
        return Err(invalid("the criterion needs at least two knots"));
    }
    let mut worst: f64 = 0.0;
    for (k, &i) in rows.iter().enumerate() {
        let pi = &rm[i * d..(i + 1) * d];
        for &j in &rows[k + 1..] {
            let pj = &rm[j * d..(j + 1) * d];
            let s: f64 = pi
                .iter()
                .zip(pj)
                .map(|(a, b)| 1.0 / (a - b).abs().max(MIN_GAP))
                .sum();
            worst = worst.max(s);
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnotSelection {
    pub knots: KnotSet,
    /// Rows of the candidate matrix, in selection order.
    pub indices: Vec<usize>,
    pub criterion: f64,
}

/// Best of `trials` random `m`-subsets of the rows of `x` under
/// [`knot_criterion`]. The subset stream depends only on `seed`; ties go to
/// the earliest trial.
pub fn select_knots(x: &DMatrix<f64>, m: usize, trials: usize, seed: u64) -> Result<KnotSelection> {
    let n = x.nrows();
    if m > n {
        return Err(invalid(format!("cannot pick {m} knots from {n} candidates")));
    }
    if m < 2 {
        return Err(invalid("need at least two knots"));
    }
    if trials == 0 {
        return Err(invalid("trials must be positive"));
    }
    let d = x.ncols();
    let rm = crate::kernels::row_major(x);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let subsets: Vec<Vec<usize>> = (0..trials).map(|_| sample(&mut rng, n, m).into_vec()).collect();
    let scores: Vec<f64> = subsets
        .par_iter()
        .map(|s| criterion_rows(&rm, d, s).unwrap_or(f64::INFINITY))
        .collect();
    let mut best = 0;
    for (t, s) in scores.iter().enumerate() {
        if *s < scores[best] {
            best = t;
        }
    }
    let indices = subsets.into_iter().nth(best).unwrap_or_default();
    Ok(KnotSelection {
        knots: KnotSet::subset(x, &indices)?,
        indices,
        criterion: scores[best],
    })
}

/// Candidate with the largest squared residual among rows of `x` not in
/// `chosen`; ties go to the lowest index.
pub fn next_knot(x: &DMatrix<f64>, chosen: &[usize], y: &[f64], model: &FittedModel) -> Result<usize> {
    if y.len() != x.nrows() {
        return Err(Error::LengthMismatch {
            expected: x.nrows(),
            got: y.len(),
        });
    }
    let fitted = predict(model, x)?;
    let mut best: Option<(usize, f64)> = None;
    for (i, (yi, fi)) in y.iter().zip(fitted.iter()).enumerate() {
        if chosen.contains(&i) {
            continue;
        }
        let r2 = (yi - fi).powi(2);
        if best.is_none_or(|(_, b)| r2 > b) {
            best = Some((i, r2));
        }
    }
    best.map(|(i, _)| i).ok_or(Error::NoCandidatesLeft)
}

/// `l` copies of each knot, grouped by knot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicationDesign {
    pub knots: Vec<f64>,
    pub replications_per_knot: usize,
}

impl ReplicationDesign {
    pub fn len(&self) -> usize {
        self.knots.len() * self.replications_per_knot
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Vec<f64> {
        self.knots
            .iter()
            .flat_map(|&a| std::iter::repeat_n(a, self.replications_per_knot))
            .collect()
    }
}

pub fn replication_design(knots: &[f64], l: usize) -> Result<ReplicationDesign> {
    if l == 0 {
        return Err(invalid("need at least one replication per knot"));
    }
    if knots.is_empty() {
        return Err(dims("replication design needs knots"));
    }
    Ok(ReplicationDesign {
        knots: knots.to_vec(),
        replications_per_knot: l,
    })
}

/// Stop sequential knot addition once GCV has failed to improve by at least
/// `min_improvement` (relative) for `patience` consecutive additions, or after
/// `max_additions`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequentialStop {
    pub min_improvement: f64,
    pub patience: usize,
    pub max_additions: usize,
}

impl Default for SequentialStop {
    fn default() -> Self {
        Self {
            min_improvement: 1e-3,
            patience: 3,
            max_additions: 15,
        }
    }
}

impl SequentialStop {
    /// `history` holds the GCV of the initial fit followed by one value per
    /// addition.
    pub fn should_stop(&self, history: &[f64]) -> bool {
        let additions = history.len().saturating_sub(1);
        if additions >= self.max_additions {
            return true;
        }
        let mut stalled = 0;
        let mut best = match history.first() {
            Some(v) => *v,
            None => return false,
        };
        for &g in &history[1..] {
            if g < best * (1.0 - self.min_improvement) {
                stalled = 0;
            } else {
                stalled += 1;
            }
            best = best.min(g);
        }
        stalled >= self.patience
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn chebyshev_values() {
        assert_eq!(chebyshev_knots(1).unwrap(), vec![0.5]);
        let c2 = chebyshev_knots(2).unwrap();
        assert!((c2[0] - 0.1464466094067262).abs() < 1e-15);
        assert!((c2[1] - 0.8535533905932737).abs() < 1e-15);
        let c7 = chebyshev_knots(7).unwrap();
        for j in 0..7 {
            assert!((c7[j] + c7[6 - j] - 1.0).abs() < 1e-15);
            assert!(c7[j] > 0.0 && c7[j] < 1.0);
            if j > 0 {
                assert!(c7[j] > c7[j - 1]);
            }
        }
        assert!(chebyshev_knots(0).is_err());
    }

    #[test]
    fn chebyshev_are_polynomial_roots() {
        for m in [3usize, 7, 12] {
            for a in chebyshev_knots(m).unwrap() {
                let t = (m as f64 * (2.0 * a - 1.0).acos()).cos();
                assert!(t.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn equispaced_values() {
        assert_eq!(equispaced_knots(2).unwrap(), vec![0.0, 1.0]);
        assert_eq!(equispaced_knots(5).unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let e7 = equispaced_knots(7).unwrap();
        assert!(e7.windows(2).all(|w| (w[1] - w[0] - 1.0 / 6.0).abs() < 1e-15));
        assert!(equispaced_knots(1).is_err());
    }

    #[test]
    fn criterion_hand_values() {
        let c = |rows: &[&[f64]]| {
            let d = rows[0].len();
            let flat: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
            knot_criterion(&KnotSet::new(DMatrix::from_row_slice(rows.len(), d, &flat)).unwrap())
                .unwrap()
        };
        assert_eq!(c(&[&[0.0], &[1.0]]), 1.0);
        assert_eq!(c(&[&[0.0, 0.0], &[1.0, 0.5]]), 3.0);
        assert_eq!(c(&[&[0.0], &[0.5], &[1.0]]), 2.0);
        let shared = c(&[&[0.2, 0.3], &[0.2, 0.9]]);
        assert!(shared.is_finite() && shared > 1e11);
    }

    #[test]
    fn criterion_invariances() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = DMatrix::from_fn(8, 3, |_, _| rng.gen::<f64>());
        let base = knot_criterion(&KnotSet::new(p.clone()).unwrap()).unwrap();
        let rows = KnotSet::subset(&p, &[7, 2, 5, 0, 1, 6, 3, 4]).unwrap();
        assert_eq!(knot_criterion(&rows).unwrap(), base);
        let cols = KnotSet::new(p.select_columns(&[2, 0, 1])).unwrap();
        assert!((knot_criterion(&cols).unwrap() - base).abs() < 1e-12 * base);
    }

    #[test]
    fn select_knots_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = DMatrix::from_fn(30, 2, |_, _| rng.gen::<f64>());
        let all = select_knots(&x, 30, 5, 0).unwrap();
        let mut idx = all.indices.clone();
        idx.sort();
        assert_eq!(idx, (0..30).collect::<Vec<_>>());
        let a = select_knots(&x, 6, 300, 9).unwrap();
        let b = select_knots(&x, 6, 300, 9).unwrap();
        assert_eq!(a, b);
        for (r, &i) in a.indices.iter().enumerate() {
            assert_eq!(a.knots.points().row(r), x.row(i));
        }
        assert!(select_knots(&x, 31, 5, 0).is_err());
    }

    #[test]
    fn more_trials_help() {
        let mut better = 0;
        for rep in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + rep);
            let x = DMatrix::from_fn(100, 2, |_, _| rng.gen::<f64>());
            let one = select_knots(&x, 10, 1, rep).unwrap().criterion;
            let many = select_knots(&x, 10, 2000, rep).unwrap().criterion;
            assert!(many <= one);
            if many < one {
                better += 1;
            }
        }
        assert!(better >= 95, "{better}");
    }

    #[test]
    fn replication_layout() {
        let r = replication_design(&[0.1, 0.5, 0.9], 2).unwrap();
        assert_eq!(r.points(), vec![0.1, 0.1, 0.5, 0.5, 0.9, 0.9]);
        assert_eq!(replication_design(&[0.0, 1.0], 1).unwrap().points(), vec![0.0, 1.0]);
        assert_eq!(replication_design(&chebyshev_knots(7).unwrap(), 7).unwrap().len(), 49);
        assert!(replication_design(&[0.5], 0).is_err());
    }

    #[test]
    fn stopping_rule() {
        let rule = SequentialStop::default();
        assert!(!rule.should_stop(&[1.0]));
        assert!(!rule.should_stop(&[1.0, 0.5, 0.4, 0.3]));
        assert!(!rule.should_stop(&[1.0, 0.9995, 0.9993]));
        assert!(rule.should_stop(&[1.0, 0.9995, 0.9993, 0.9992]));
        assert!(!rule.should_stop(&[1.0, 0.9995, 0.9993, 0.9, 0.8999]));
        let long: Vec<f64> = (0..16).map(|i| 0.5f64.powi(i)).collect();
        assert!(rule.should_stop(&long));
    }
}
