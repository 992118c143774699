//! Cubic spline with zero slope at the left end (even extension through
//! the origin) and a natural right end.

#[derive(Debug, Clone, PartialEq)]
pub struct EvenSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>, // second derivatives at the knots
}

impl EvenSpline {
    /// Knots must be strictly increasing and start at zero.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        assert!(n >= 2 && n == y.len());
        // Tridiagonal system for the knot second derivatives.
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        let h0 = x[1] - x[0];
        // Clamped: s'(x0) = 0.
        diag[0] = h0 / 3.0;
        sup[0] = h0 / 6.0;
        rhs[0] = (y[1] - y[0]) / h0;
        for i in 1..n - 1 {
            let hl = x[i] - x[i - 1];
            let hr = x[i + 1] - x[i];
            sub[i] = hl / 6.0;
            diag[i] = (hl + hr) / 3.0;
            sup[i] = hr / 6.0;
            rhs[i] = (y[i + 1] - y[i]) / hr - (y[i] - y[i - 1]) / hl;
        }
        // Natural: s''(x_{n-1}) = 0.
        diag[n - 1] = 1.0;
        sub[n - 1] = 0.0;
        rhs[n - 1] = 0.0;
        // Thomas algorithm.
        for i in 1..n {
            let w = sub[i] / diag[i - 1];
            diag[i] -= w * sup[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (rhs[i] - sup[i] * m[i + 1]) / diag[i];
        }
        Self { x, y, m }
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn x_max(&self) -> f64 {
        *self.x.last().unwrap()
    }

    fn segment(&self, t: f64) -> usize {
        let i = self.x.partition_point(|&k| k <= t);
        i.clamp(1, self.x.len() - 1) - 1
    }

    /// Value, first and second derivative at `t` (with `t >= 0`).
    pub fn eval3(&self, t: f64) -> (f64, f64, f64) {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let (mi, mj) = (self.m[i], self.m[i + 1]);
        let v = a * self.y[i] + b * self.y[i + 1] + ((a * a * a - a) * mi + (b * b * b - b) * mj) * h * h / 6.0;
        let d1 =
            (self.y[i + 1] - self.y[i]) / h - (3.0 * a * a - 1.0) / 6.0 * h * mi + (3.0 * b * b - 1.0) / 6.0 * h * mj;
        let d2 = a * mi + b * mj;
        (v, d1, d2)
    }

    /// Exact integral of the spline over `[x_i, t]` within segment `i`.
    pub fn integral_in_segment(&self, i: usize, t: f64) -> f64 {
        let h = self.x[i + 1] - self.x[i];
        let b = (t - self.x[i]) / h;
        // ∫ a dx, ∫ b dx, ∫ (a^3 - a) dx, ∫ (b^3 - b) dx, with a = 1 - b.
        let ia = h * (b - 0.5 * b * b);
        let ib = h * 0.5 * b * b;
        let a_end = 1.0 - b;
        let ia3 = h * (0.25 - 0.25 * a_end.powi(4));
        let ib3 = h * 0.25 * b.powi(4);
        self.y[i] * ia + self.y[i + 1] * ib + (self.m[i] * (ia3 - ia) + self.m[i + 1] * (ib3 - ib)) * h * h / 6.0
    }

    pub fn segment_of(&self, t: f64) -> usize {
        self.segment(t)
    }
}
