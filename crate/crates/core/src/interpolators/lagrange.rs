use crate::error::{dims, Error, Result};

/// Polynomial interpolation in the second (true) barycentric form.
#[derive(Clone, Debug)]
pub struct LagrangeInterpolator {
    knots: Vec<f64>,
    weights: Vec<f64>,
}

impl LagrangeInterpolator {
    pub fn new(knots: &[f64]) -> Result<Self> {
        if knots.is_empty() {
            return Err(crate::error::invalid("Lagrange interpolation needs a knot"));
        }
        let mut weights = vec![1.0; knots.len()];
        for (j, w) in weights.iter_mut().enumerate() {
            for (k, ak) in knots.iter().enumerate() {
                if k != j {
                    let diff = knots[j] - ak;
                    if diff == 0.0 {
                        return Err(Error::DuplicateKnots);
                    }
                    *w /= diff;
                }
            }
        }
        Ok(Self {
            knots: knots.to_vec(),
            weights,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn eval(&self, gamma: &[f64], x: f64) -> Result<f64> {
        if gamma.len() != self.knots.len() {
            return Err(dims(format!(
                "{} values for {} knots",
                gamma.len(),
                self.knots.len()
            )));
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for ((a, w), g) in self.knots.iter().zip(&self.weights).zip(gamma) {
            let diff = x - a;
            if diff == 0.0 {
                return Ok(*g);
            }
            let t = w / diff;
            num += t * g;
            den += t;
        }
        Ok(num / den)
    }
}

pub fn lagrange_eval(knots: &[f64], gamma: &[f64], x: f64) -> Result<f64> {
    LagrangeInterpolator::new(knots)?.eval(gamma, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_through_origin() {
        assert!((lagrange_eval(&[0.0, 1.0], &[0.0, 1.0], 0.3).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn parabola_through_three_points() {
        let v = lagrange_eval(&[0.0, 0.5, 1.0], &[0.0, 0.25, 1.0], 0.75).unwrap();
        assert!((v - 0.5625).abs() < 1e-15);
    }

    #[test]
    fn exact_at_knots_and_duplicates_rejected() {
        let knots = [0.1, 0.4, 0.9];
        let gamma = [3.0, -1.0, 2.5];
        for (a, g) in knots.iter().zip(&gamma) {
            assert_eq!(lagrange_eval(&knots, &gamma, *a).unwrap(), *g);
        }
        assert!(matches!(
            LagrangeInterpolator::new(&[0.1, 0.1]),
            Err(Error::DuplicateKnots)
        ));
    }

    #[test]
    fn reproduces_low_degree_polynomials() {
        let knots: Vec<f64> = (0..9).map(|j| (j as f64 / 8.0).powf(1.3)).collect();
        let p = |x: f64| 1.0 - 2.0 * x + 0.5 * x.powi(3) - x.powi(8);
        let gamma: Vec<f64> = knots.iter().map(|&a| p(a)).collect();
        let li = LagrangeInterpolator::new(&knots).unwrap();
        for i in 0..50 {
            let x = i as f64 / 49.0;
            assert!((li.eval(&gamma, x).unwrap() - p(x)).abs() < 1e-11);
        }
    }
}
