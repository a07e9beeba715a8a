use serde::{Deserialize, Serialize};

use crate::error::{dims, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TestFunction {
    #[serde(rename = "f1d")]
    F1d,
    I,
    II,
    III,
    #[serde(rename = "borehole")]
    Borehole,
}

impl TestFunction {
    pub fn name(self) -> &'static str {
        match self {
            TestFunction::F1d => "f1d",
            TestFunction::I => "I",
            TestFunction::II => "II",
            TestFunction::III => "III",
            TestFunction::Borehole => "borehole",
        }
    }

    /// Required input dimension, if fixed.
    pub fn fixed_dim(self) -> Option<usize> {
        match self {
            TestFunction::F1d => Some(1),
            TestFunction::Borehole => Some(8),
            _ => None,
        }
    }

    pub fn check_dim(self, d: usize) -> Result<()> {
        match self.fixed_dim() {
            Some(k) if k != d => Err(dims(format!("{} takes {k} inputs, got {d}", self.name()))),
            _ if d == 0 => Err(dims("zero-dimensional input")),
            _ => Ok(()),
        }
    }
}

impl std::fmt::Display for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "f1d" => TestFunction::F1d,
            "i" | "1" => TestFunction::I,
            "ii" | "2" => TestFunction::II,
            "iii" | "3" => TestFunction::III,
            "borehole" => TestFunction::Borehole,
            _ => return Err(Error::UnknownFunction(s.to_string())),
        })
    }
}

/// Physical ranges of the eight borehole inputs
/// `(r_w, r, T_u, H_u, T_l, H_l, L, K_w)`.
pub const BOREHOLE_RANGES: [(f64, f64); 8] = [
    (0.05, 0.15),
    (100.0, 50000.0),
    (63070.0, 115600.0),
    (990.0, 1110.0),
    (63.1, 116.0),
    (700.0, 820.0),
    (1120.0, 1680.0),
    (1500.0, 15000.0),
];

/// Maps a point of `[0,1]^8` affinely onto [`BOREHOLE_RANGES`].
pub fn borehole_inputs(x: &[f64]) -> [f64; 8] {
    let mut out = [0.0; 8];
    for (o, (v, (lo, hi))) in out.iter_mut().zip(x.iter().zip(BOREHOLE_RANGES)) {
        *o = lo + v * (hi - lo);
    }
    out
}

/// Water flow through a borehole, in physical units.
pub fn borehole(p: &[f64; 8]) -> f64 {
    let [rw, r, tu, hu, tl, hl, l, kw] = *p;
    let lr = (r / rw).ln();
    2.0 * std::f64::consts::PI * tu * (hu - hl) / (lr * (1.0 + 2.0 * l * tu / (lr * rw * rw * kw) + tu / tl))
}

/// Ackley's function with the cosine terms, as opposed to the variant
/// evaluated by [`test_function`] for model II.
pub fn ackley_standard(x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let sq = x.iter().map(|v| v * v).sum::<f64>() / d;
    let cs = x.iter().map(|v| (2.0 * std::f64::consts::PI * v).cos()).sum::<f64>() / d;
    -20.0 * (-0.2 * sq.sqrt()).exp() - cs.exp() + 20.0 + std::f64::consts::E
}

/// Evaluates a benchmark function at `x` in the unit cube.
pub fn test_function(id: TestFunction, x: &[f64]) -> Result<f64> {
    id.check_dim(x.len())?;
    Ok(eval(id, x))
}

pub(crate) fn eval(id: TestFunction, x: &[f64]) -> f64 {
    use std::f64::consts::{E, PI};
    let d = x.len() as f64;
    match id {
        TestFunction::F1d => (-1.4 * x[0]).exp() * (3.5 * PI * x[0]).cos(),
        TestFunction::I => x.iter().enumerate().map(|(j, v)| (j + 1) as f64 * v * v).sum(),
        TestFunction::II => {
            let sq = x.iter().map(|v| v * v).sum::<f64>() / d;
            let lin = x.iter().map(|v| 2.0 * PI * v).sum::<f64>() / d;
            -20.0 * (-0.2 * sq.sqrt()).exp() - lin.exp() + 20.0 + E
        }
        TestFunction::III => {
            let s: f64 = x.iter().sum();
            let q: f64 = x.iter().map(|v| v * v).sum();
            -s * (-q).exp()
        }
        TestFunction::Borehole => borehole(&borehole_inputs(x)),
    }
}
