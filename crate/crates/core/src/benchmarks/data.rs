use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::functions::{eval, TestFunction};
use crate::error::{dims, invalid, Error, Result};
use crate::estimators::{predict, FittedModel};

/// Rows of `x` in `[0,1]^d` with responses `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::LengthMismatch {
                expected: x.nrows(),
                got: y.len(),
            });
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    /// Reads a CSV with a header row; the last column is the response.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let width = reader.headers()?.len();
        if width < 2 {
            return Err(Error::BadSchema("need at least one input column and a response".into()));
        }
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (line, rec) in reader.records().enumerate() {
            let rec = rec?;
            if rec.len() != width {
                return Err(Error::BadSchema(format!("row {} has {} fields, expected {width}", line + 2, rec.len())));
            }
            for (j, field) in rec.iter().enumerate() {
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::BadSchema(format!("row {} column {}: {field:?} is not a number", line + 2, j + 1))
                })?;
                if j + 1 == width {
                    ys.push(v);
                } else {
                    xs.push(v);
                }
            }
        }
        let n = ys.len();
        Dataset::new(DMatrix::from_row_slice(n, width - 1, &xs), DVector::from_vec(ys))
    }

    pub fn to_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<String> = (1..=self.dim()).map(|j| format!("x{j}")).collect();
        header.push("y".into());
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut row: Vec<String> = self.x.row(i).iter().map(|v| v.to_string()).collect();
            row.push(self.y[i].to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn uniform_points(n: usize, d: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let v: Vec<f64> = (0..n * d).map(|_| rng.gen::<f64>()).collect();
    DMatrix::from_row_slice(n, d, &v)
}

pub(crate) fn truth_values(f: &(dyn Fn(&[f64]) -> f64 + Sync), x: &DMatrix<f64>) -> DVector<f64> {
    let d = x.ncols();
    let rm = crate::kernels::row_major(x);
    DVector::from_iterator(x.nrows(), rm.chunks(d).map(f))
}

pub(crate) fn simulate_with(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    d: usize,
    n: usize,
    sigma: f64,
    rng: &mut ChaCha8Rng,
) -> Dataset {
    let x = uniform_points(n, d, rng);
    let mut y = truth_values(f, &x);
    for v in y.iter_mut() {
        let e: f64 = rng.sample(StandardNormal);
        *v += sigma * e;
    }
    Dataset { x, y }
}

/// `n` uniform inputs on `[0,1]^d` with responses `f(x) + sigma * N(0,1)`.
/// Inputs are drawn first (row by row), then the noise, from one stream
/// seeded by `seed`.
pub fn simulate(id: TestFunction, d: usize, n: usize, sigma: f64, seed: u64) -> Result<Dataset> {
    id.check_dim(d)?;
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(invalid("sigma must be finite and nonnegative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(simulate_with(&|x| eval(id, x), d, n, sigma, &mut rng))
}

/// Mean squared error of the model against noiseless truth values.
pub fn evaluate(model: &FittedModel, x_test: &DMatrix<f64>, truth: &DVector<f64>) -> Result<f64> {
    if x_test.nrows() != truth.len() {
        return Err(Error::LengthMismatch {
            expected: x_test.nrows(),
            got: truth.len(),
        });
    }
    if truth.is_empty() {
        return Err(invalid("empty test set"));
    }
    let p = predict(model, x_test)?;
    Ok((p - truth).norm_squared() / truth.len() as f64)
}

/// Trapezoid-rule integral of the squared error over `[0,1]` on an
/// equispaced grid of `grid` points.
pub fn mise_1d(model: &FittedModel, truth: impl Fn(f64) -> f64, grid: usize) -> Result<f64> {
    if model.dim() != 1 {
        return Err(dims("mise_1d needs a one-dimensional model"));
    }
    if grid < 2 {
        return Err(invalid("grid needs at least two points"));
    }
    let h = 1.0 / (grid - 1) as f64;
    let x = DMatrix::from_fn(grid, 1, |i, _| i as f64 * h);
    let p = predict(model, &x)?;
    let mut total = 0.0;
    for i in 0..grid {
        let e = (p[i] - truth(x[(i, 0)])).powi(2);
        total += if i == 0 || i + 1 == grid { 0.5 * e } else { e };
    }
    Ok(total * h)
}

pub const CCPP_COLUMNS: [&str; 5] = ["AT", "V", "AP", "RH", "PE"];
pub const CCPP_ROWS: usize = 9568;
pub const CCPP_TRAIN_ROWS: usize = 9000;

/// Power-plant data split into the first 9000 rows for training and the rest
/// for testing, with features min-max scaled by the training rows.
#[derive(Clone, Debug, PartialEq)]
pub struct CcppSplit {
    pub train: Dataset,
    pub test: Dataset,
    pub rows: usize,
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
    /// Set when the file does not have the expected row count; the split
    /// then keeps the same train fraction.
    pub warning: Option<String>,
}

/// Loads the CCPP table from CSV (header `AT,V,AP,RH,PE`).
pub fn load_ccpp(path: &Path) -> Result<CcppSplit> {
    let mut reader = csv::Reader::from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header.len() != 5 || header.iter().zip(CCPP_COLUMNS).any(|(a, b)| !a.eq_ignore_ascii_case(b)) {
        return Err(Error::BadSchema(format!("expected columns {CCPP_COLUMNS:?}, found {header:?}")));
    }
    let mut rows: Vec<[f64; 5]> = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec?;
        if rec.len() != 5 {
            return Err(Error::BadSchema(format!("row {} has {} fields", line + 2, rec.len())));
        }
        let mut row = [0.0; 5];
        for (j, field) in rec.iter().enumerate() {
            row[j] = field.trim().parse().map_err(|_| {
                Error::BadSchema(format!("row {} column {}: {field:?} is not a number", line + 2, j + 1))
            })?;
        }
        rows.push(row);
    }
    let total = rows.len();
    let warning = (total != CCPP_ROWS).then(|| format!("expected {CCPP_ROWS} rows, found {total}"));
    let n_train = if total == CCPP_ROWS {
        CCPP_TRAIN_ROWS
    } else {
        (total * CCPP_TRAIN_ROWS) / CCPP_ROWS
    };
    if n_train < 2 || n_train >= total {
        return Err(Error::BadSchema(format!("{total} rows are too few to split")));
    }
    let mut mins = vec![f64::INFINITY; 4];
    let mut maxs = vec![f64::NEG_INFINITY; 4];
    for row in &rows[..n_train] {
        for j in 0..4 {
            mins[j] = mins[j].min(row[j]);
            maxs[j] = maxs[j].max(row[j]);
        }
    }
    if mins.iter().zip(&maxs).any(|(a, b)| !(b > a)) {
        return Err(Error::DegenerateData("a training feature is constant".into()));
    }
    let build = |part: &[[f64; 5]]| {
        let x = DMatrix::from_fn(part.len(), 4, |i, j| (part[i][j] - mins[j]) / (maxs[j] - mins[j]));
        let y = DVector::from_iterator(part.len(), part.iter().map(|r| r[4]));
        Dataset { x, y }
    };
    Ok(CcppSplit {
        train: build(&rows[..n_train]),
        test: build(&rows[n_train..]),
        rows: total,
        mins,
        maxs,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{InterpolatorKind, Method};
    use crate::interpolators::{KnotSet, RegressionBasis};
    use std::io::Write;

    fn line(a: f64, b: f64) -> FittedModel {
        FittedModel {
            method: Method::Replication,
            interpolator: InterpolatorKind::Spline,
            knots: KnotSet::from_1d(&[0.0, 1.0]).unwrap(),
            gamma_hat: vec![a, b],
            lambda: 0.0,
            kernel: None,
            g_kind: RegressionBasis::None,
            spline_boundary: None,
            expansion: None,
            diagnostics: Default::default(),
        }
    }

    #[test]
    fn simulate_is_deterministic_and_noise_free_at_zero_sigma() {
        let a = simulate(TestFunction::I, 2, 50, 0.0, 3).unwrap();
        for i in 0..50 {
            assert_eq!(a.y[i], eval(TestFunction::I, &[a.x[(i, 0)], a.x[(i, 1)]]));
        }
        assert_eq!(simulate(TestFunction::I, 2, 50, 0.7, 3).unwrap(), simulate(TestFunction::I, 2, 50, 0.7, 3).unwrap());
        assert!(simulate(TestFunction::I, 2, 50, -1.0, 3).is_err());
    }

    #[test]
    fn noise_variance_band() {
        let a = simulate(TestFunction::III, 3, 10_000, 1.0, 11).unwrap();
        let b = simulate(TestFunction::III, 3, 10_000, 0.0, 11).unwrap();
        assert_eq!(a.x, b.x);
        let e = &a.y - &b.y;
        let mean = e.sum() / 1e4;
        let var = e.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (1e4 - 1.0);
        assert!(var > 0.94 && var < 1.06, "{var}");
    }

    #[test]
    fn mse_and_mise_examples() {
        let x = DMatrix::from_column_slice(2, 1, &[0.2, 0.6]);
        let flat = line(0.0, 0.0);
        assert_eq!(evaluate(&flat, &x, &DVector::from_vec(vec![1.0, 3.0])).unwrap(), 5.0);
        assert_eq!(evaluate(&flat, &x, &DVector::zeros(2)).unwrap(), 0.0);
        let c = line(0.5, 0.5);
        assert!((mise_1d(&c, |_| 0.0, 1001).unwrap() - 0.25).abs() < 1e-15);
        let ramp = line(0.0, 1.0);
        assert!((mise_1d(&ramp, |_| 0.0, 1001).unwrap() - 1.0 / 3.0).abs() < 1e-5);
        assert_eq!(mise_1d(&ramp, |t| t, 1001).unwrap(), 0.0);
    }

    #[test]
    fn ccpp_loading_scales_by_training_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ccpp.csv");
        let mut f = std::fs::File::create(&p).unwrap();
        writeln!(f, "AT,V,AP,RH,PE").unwrap();
        for i in 0..10 {
            let t = i as f64;
            writeln!(f, "{},{},{},{},{}", 10.0 + t, 40.0 - 2.0 * t, 1000.0 + t * t, 50.0, 400.0 + t).unwrap();
        }
        // constant RH breaks scaling
        assert!(matches!(load_ccpp(&p), Err(Error::DegenerateData(_))));
        let mut f = std::fs::File::create(&p).unwrap();
        writeln!(f, "AT,V,AP,RH,PE").unwrap();
        for i in 0..10 {
            let t = i as f64;
            writeln!(f, "{},{},{},{},{}", 10.0 + t, 40.0 - 2.0 * t, 1000.0 + t * t, 50.0 + (t - 4.0).abs(), 400.0 + t).unwrap();
        }
        drop(f);
        let s = load_ccpp(&p).unwrap();
        // 10 * 9000 / 9568 = 9 training rows
        assert_eq!(s.train.len(), 9);
        assert_eq!(s.test.len(), 1);
        assert!(s.warning.is_some());
        assert_eq!(s.mins, vec![10.0, 24.0, 1000.0, 50.0]);
        assert_eq!(s.maxs, vec![18.0, 40.0, 1064.0, 54.0]);
        let x = &s.train.x;
        assert_eq!(x[(0, 0)], 0.0);
        assert_eq!(x[(8, 0)], 1.0);
        assert_eq!(x[(0, 1)], 1.0);
        assert_eq!(x[(2, 2)], 4.0 / 64.0);
        assert_eq!(x[(0, 3)], 1.0);
        assert_eq!(x[(4, 3)], 0.0);
        assert_eq!(s.test.x[(0, 0)], 9.0 / 8.0);
        assert_eq!(s.test.y[0], 409.0);
    }

    #[test]
    fn ccpp_schema_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        std::fs::write(&p, "a,b,c\n1,2,3\n").unwrap();
        assert!(matches!(load_ccpp(&p), Err(Error::BadSchema(_))));
        std::fs::write(&p, "AT,V,AP,RH,PE\n1,2,x,4,5\n").unwrap();
        assert!(matches!(load_ccpp(&p), Err(Error::BadSchema(_))));
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        let a = simulate(TestFunction::I, 3, 20, 0.5, 1).unwrap();
        a.to_csv(&p).unwrap();
        assert_eq!(Dataset::from_csv(&p).unwrap(), a);
    }
}
