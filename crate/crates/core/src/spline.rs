//! Natural cubic spline interpolation on strictly increasing knots.

/// Interpolating natural cubic spline: second derivative zero at both ends.
/// Evaluation outside the knot range extends the boundary segment's cubic.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct NaturalCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the knots; first and last are 0.
    m: Vec<f64>,
}

impl NaturalCubic {
    /// Fits the spline. Requires at least two knots with strictly
    /// increasing x.
    pub fn fit(xs: &[f64], ys: &[f64]) -> Self {
        assert_eq!(xs.len(), ys.len());
        assert!(xs.len() >= 2, "spline needs at least two knots");
        assert!(xs.windows(2).all(|w| w[1] > w[0]), "knots must be strictly increasing");

        let k = xs.len();
        let mut m = vec![0.0; k];
        if k > 2 {
            // Tridiagonal system for interior second derivatives (Thomas
            // algorithm). Row i: (h0/6)M[i-1] + ((h0+h1)/3)M[i] + (h1/6)M[i+1]
            // = slope difference.
            let rows = k - 2;
            let mut diag = vec![0.0; rows];
            let mut upper = vec![0.0; rows];
            let mut lower = vec![0.0; rows];
            let mut rhs = vec![0.0; rows];
            for i in 0..rows {
                let h0 = xs[i + 1] - xs[i];
                let h1 = xs[i + 2] - xs[i + 1];
                lower[i] = h0 / 6.0;
                diag[i] = (h0 + h1) / 3.0;
                upper[i] = h1 / 6.0;
                rhs[i] = (ys[i + 2] - ys[i + 1]) / h1 - (ys[i + 1] - ys[i]) / h0;
            }
            for i in 1..rows {
                let factor = lower[i] / diag[i - 1];
                diag[i] -= factor * upper[i - 1];
                rhs[i] -= factor * rhs[i - 1];
            }
            m[rows] = rhs[rows - 1] / diag[rows - 1];
            for i in (0..rows - 1).rev() {
                m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
            }
        }
        Self { xs: xs.to_vec(), ys: ys.to_vec(), m }
    }

    fn segment(&self, x: f64) -> usize {
        // Index i such that the segment [xs[i], xs[i+1]] is used; outside the
        // range the boundary segment extends.
        match self.xs.binary_search_by(|probe| probe.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.xs.len() - 2),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        a * y0
            + b * y1
            + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        (y1 - y0) / h - (3.0 * a * a - 1.0) * h * m0 / 6.0 + (3.0 * b * b - 1.0) * h * m1 / 6.0
    }

    pub fn last_x(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    /// Slope at the last knot.
    pub fn end_slope(&self) -> f64 {
        self.deriv(self.last_x())
    }

    /// Cubic coefficient `d` of the extension around the last knot:
    /// `S(x_end + v) = y_end + slope·v + d·v^3` (the quadratic term vanishes
    /// under the natural end condition).
    pub fn end_cubic_coefficient(&self) -> f64 {
        let k = self.xs.len() - 1;
        let h = self.xs[k] - self.xs[k - 1];
        (self.m[k] - self.m[k - 1]) / (6.0 * h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_knots_exactly() {
        let xs: Vec<f64> = (0..12).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.3 * x * x * x - 2.0 * x * x + x + 5.0).collect();
        let s = NaturalCubic::fit(&xs, &ys);
        for (x, y) in xs.iter().zip(&ys) {
            assert!((s.eval(*x) - y).abs() < 1e-9, "at {x}: {} vs {y}", s.eval(*x));
        }
    }

    #[test]
    fn linear_data_is_reproduced_everywhere() {
        let xs: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let s = NaturalCubic::fit(&xs, &ys);
        for i in 0..90 {
            let x = 1.0 + i as f64 * 0.1;
            assert!((s.eval(x) - (2.0 * x + 1.0)).abs() < 1e-9);
        }
        assert!((s.end_slope() - 2.0).abs() < 1e-9);
        assert!((s.eval(15.0) - 31.0).abs() < 1e-9); // linear extension
        assert!(s.end_cubic_coefficient().abs() < 1e-12);
    }

    #[test]
    fn natural_end_condition_holds() {
        let xs: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let ys = vec![0.0, 1.5, 2.0, 4.5, 5.0, 5.2, 6.9, 7.0];
        let s = NaturalCubic::fit(&xs, &ys);
        // Second derivative via central differences near each end.
        let eps = 1e-4;
        let dd_start = (s.eval(eps) - 2.0 * s.eval(2.0 * eps) + s.eval(3.0 * eps)) / (eps * eps);
        assert!(dd_start.abs() < 1e-2, "start curvature {dd_start}");
        let x_end = 7.0;
        let dd_end = (s.eval(x_end - 3.0 * eps) - 2.0 * s.eval(x_end - 2.0 * eps)
            + s.eval(x_end - eps))
            / (eps * eps);
        assert!(dd_end.abs() < 1e-2, "end curvature {dd_end}");
    }

    #[test]
    fn two_knots_degenerate_to_a_line() {
        let s = NaturalCubic::fit(&[0.0, 4.0], &[1.0, 9.0]);
        assert!((s.eval(2.0) - 5.0).abs() < 1e-12);
        assert!((s.end_slope() - 2.0).abs() < 1e-12);
    }
}
