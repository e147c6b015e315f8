use crate::error::{Error, Result};

/// Natural cubic spline through (x_i, y_i) with strictly ascending x.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
    uniform_step: Option<f64>,
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 3 || y.len() != n {
            return Err(Error::InsufficientData("spline needs >= 3 matching nodes".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("spline abscissae must ascend strictly".into()));
        }
        // second derivatives, natural end conditions, Thomas algorithm
        let mut m = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut r = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let a = h0 / 6.0;
            let b = (h0 + h1) / 3.0;
            let cc = h1 / 6.0;
            let rhs = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
            let denom = b - a * c[i - 1];
            c[i] = cc / denom;
            r[i] = (rhs - a * r[i - 1]) / denom;
        }
        for i in (1..n - 1).rev() {
            m[i] = r[i] - c[i] * m[i + 1];
        }
        let h = x[1] - x[0];
        let uniform = x.windows(2).all(|w| ((w[1] - w[0]) - h).abs() < 1e-9 * h.abs().max(1e-300));
        Ok(Self { x, y, m, uniform_step: uniform.then_some(h) })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().unwrap())
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.x.len();
        let i = match self.uniform_step {
            Some(h) => ((t - self.x[0]) / h).floor() as isize,
            None => self.x.partition_point(|&v| v <= t) as isize - 1,
        };
        i.clamp(0, n as isize - 2) as usize
    }

    /// Value and first derivative at t (cubic extrapolation of the end segments outside the range).
    pub fn eval_with_derivative(&self, t: f64) -> (f64, f64) {
        let i = self.segment(t);
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let h = x1 - x0;
        let a = (x1 - t) / h;
        let b = (t - x0) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let v = a * self.y[i] + b * self.y[i + 1] + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let dv = (self.y[i + 1] - self.y[i]) / h + (-(3.0 * a * a - 1.0) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        (v, dv)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_with_derivative(t).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_nodes_and_linear_data() {
        let x: Vec<f64> = (0..10).map(|i| i as f64 * 0.5).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 1.0).collect();
        let s = CubicSpline::new(x.clone(), y.clone()).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert!((s.eval(*xi) - yi).abs() < 1e-12);
        }
        let (v, dv) = s.eval_with_derivative(1.3);
        assert!((v - 2.9).abs() < 1e-12 && (dv - 3.0).abs() < 1e-12);
    }

    #[test]
    fn smooth_function_accuracy() {
        let x: Vec<f64> = (0..60).map(|i| 0.1 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| v.sin()).collect();
        let s = CubicSpline::new(x, y).unwrap();
        for t in [0.55, 1.234, 3.3, 5.01] {
            let (v, dv) = s.eval_with_derivative(t);
            assert!((v - f64::sin(t)).abs() < 1e-5);
            assert!((dv - f64::cos(t)).abs() < 1e-3);
        }
    }
}
