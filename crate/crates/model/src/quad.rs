/// Result of a quadrature with an error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
}

/// Two-stage Richardson extrapolation of trapezoid values on grids with
/// spacing h, h/2, h/4. Returns the extrapolated value and `|R2 − R1|`,
/// where R1 is the first-stage value on the two finest grids.
pub fn richardson(t: [f64; 3]) -> Quadrature {
    let r1a = (4.0 * t[1] - t[0]) / 3.0;
    let r1b = (4.0 * t[2] - t[1]) / 3.0;
    let r2 = (16.0 * r1b - r1a) / 15.0;
    Quadrature { value: r2, error_estimate: (r2 - r1b).abs() }
}

/// Union of uniform subgrids between consecutive breakpoints.
///
/// Every piece gets the same number of intervals, so node `k` of level 0
/// is node `k << l` of level `l`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseGrid {
    breaks: Vec<f64>,
    base: usize,
}

/// One refinement level of a [`PiecewiseGrid`].
#[derive(Clone, Debug)]
pub struct GridLevel {
    pub nodes: Vec<f64>,
    /// Midpoint of interval `i` (between nodes `i` and `i+1`); used to
    /// evaluate piecewise-constant factors such as time-ordering indicators.
    pub mids: Vec<f64>,
}

impl PiecewiseGrid {
    /// Breakpoints outside `[lo, hi]` are ignored; duplicates are merged.
    pub fn new(lo: f64, hi: f64, breakpoints: &[f64], base: usize) -> Self {
        assert!(lo < hi, "empty integration range");
        let mut breaks: Vec<f64> = breakpoints.iter().copied().filter(|&b| b > lo && b < hi).collect();
        breaks.push(lo);
        breaks.push(hi);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
        PiecewiseGrid { breaks, base: base.max(1) }
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn pieces(&self) -> usize {
        self.breaks.len() - 1
    }

    pub fn level(&self, l: u32) -> GridLevel {
        let per = self.base << l;
        let mut nodes = Vec::with_capacity(self.pieces() * per + 1);
        for w in self.breaks.windows(2) {
            let h = (w[1] - w[0]) / per as f64;
            for k in 0..per {
                nodes.push(w[0] + h * k as f64);
            }
        }
        nodes.push(*self.breaks.last().unwrap());
        let mids = nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        GridLevel { nodes, mids }
    }
}

impl GridLevel {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Cumulative trapezoid of `mask(i) · g` where `g` holds continuous node
    /// values and `mask` is constant on each interval.
    pub fn cumulative(&self, g: &[f64], mask: impl Fn(usize) -> f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.nodes.len());
        out.push(0.0);
        let mut acc = 0.0;
        for i in 0..self.nodes.len() - 1 {
            let m = mask(i);
            if m != 0.0 {
                acc += m * 0.5 * (self.nodes[i + 1] - self.nodes[i]) * (g[i] + g[i + 1]);
            }
            out.push(acc);
        }
        out
    }

    /// Index of the first node at or above `x` (within rounding).
    pub fn index_of(&self, x: f64) -> usize {
        let i = self.nodes.partition_point(|&n| n < x - 1e-12 * (1.0 + x.abs()));
        i.min(self.nodes.len() - 1)
    }
}

/// Integrates a function that is smooth between `breakpoints` over `[lo, hi]`
/// by trapezoid refinement plus Richardson extrapolation. Refines until the
/// error estimate drops below `tol · max(1, |value|)` or a size limit is hit.
pub fn integrate_1d(f: impl Fn(f64) -> f64, lo: f64, hi: f64, breakpoints: &[f64], tol: f64) -> Quadrature {
    if hi <= lo {
        return Quadrature { value: 0.0, error_estimate: 0.0 };
    }
    let mut base = 8;
    loop {
        let grid = PiecewiseGrid::new(lo, hi, breakpoints, base);
        let mut t = [0.0; 3];
        for (l, slot) in t.iter_mut().enumerate() {
            let level = grid.level(l as u32);
            let g: Vec<f64> = level.nodes.iter().map(|&x| f(x)).collect();
            *slot = *level.cumulative(&g, |_| 1.0).last().unwrap();
        }
        let q = richardson(t);
        if q.error_estimate <= tol * q.value.abs().max(1.0) || base >= 1 << 14 {
            return q;
        }
        base *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_is_exact_for_quartics_on_one_piece() {
        let q = integrate_1d(|x| x.powi(4) - 3.0 * x * x, 0.0, 2.0, &[], 1e-14);
        assert!((q.value - (32.0 / 5.0 - 8.0)).abs() < 1e-12);
    }

    #[test]
    fn level_nodes_nest() {
        let g = PiecewiseGrid::new(0.0, 3.0, &[1.0, 2.5, 7.0], 3);
        let l0 = g.level(0);
        let l2 = g.level(2);
        for (k, &x) in l0.nodes.iter().enumerate() {
            assert!((l2.nodes[k << 2] - x).abs() < 1e-14);
        }
        assert_eq!(g.pieces(), 3);
    }

    #[test]
    fn masks_apply_per_interval() {
        let g = PiecewiseGrid::new(0.0, 2.0, &[1.0], 4).level(0);
        let ones = vec![1.0; g.len()];
        let c = g.cumulative(&ones, |i| if g.mids[i] < 1.0 { 1.0 } else { 0.0 });
        assert!((c.last().unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(g.index_of(1.0), 4);
    }
}
