
/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson slopes).
/// Constant extrapolation outside the table.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneCubic {
    t: Vec<f64>,
    v: Vec<f64>,
    m: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(t: Vec<f64>, v: Vec<f64>) -> Result<Self, String> {
        if t.len() != v.len() || t.len() < 2 {
            return Err("tabulation needs at least two (t, value) pairs of equal length".into());
        }
        if t.windows(2).any(|w| w[1] <= w[0]) || t.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err("tabulation abscissae must be finite and strictly increasing".into());
        }
        let n = t.len();
        let delta: Vec<f64> = (0..n - 1).map(|i| (v[i + 1] - v[i]) / (t[i + 1] - t[i])).collect();
        let mut m = vec![0.0; n];
        m[0] = delta[0];
        m[n - 1] = delta[n - 2];
        for i in 1..n - 1 {
            m[i] = if delta[i - 1] * delta[i] <= 0.0 { 0.0 } else { 0.5 * (delta[i - 1] + delta[i]) };
        }
        for i in 0..n - 1 {
            if delta[i] == 0.0 {
                m[i] = 0.0;
                m[i + 1] = 0.0;
                continue;
            }
            let a = m[i] / delta[i];
            let b = m[i + 1] / delta[i];
            let s = a * a + b * b;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                m[i] = tau * a * delta[i];
                m[i + 1] = tau * b * delta[i];
            }
        }
        Ok(MonotoneCubic { t, v, m })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.t[0], *self.t.last().unwrap())
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.t.len();
        if x <= self.t[0] {
            return self.v[0];
        }
        if x >= self.t[n - 1] {
            return self.v[n - 1];
        }
        let i = self.t.partition_point(|&ti| ti <= x) - 1;
        let h = self.t[i + 1] - self.t[i];
        let s = (x - self.t[i]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.v[i] + h10 * h * self.m[i] + h01 * self.v[i + 1] + h11 * h * self.m[i + 1]
    }
}
