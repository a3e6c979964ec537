use crate::OracleError;

/// Largest number of ξ-slots accepted by [`isserlis_gamma_delta`].
pub const MAX_XI_SLOTS: usize = 6;

/// Uniform grid of `cells` cells on `[lo, hi]`. Cell `i` is represented by
/// its left endpoint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsserlisGrid {
    pub lo: f64,
    pub hi: f64,
    pub cells: usize,
}

impl IsserlisGrid {
    pub fn new(lo: f64, hi: f64, cells: usize) -> Self {
        IsserlisGrid { lo, hi, cells }
    }

    pub fn delta(&self) -> f64 {
        (self.hi - self.lo) / self.cells as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.delta()
    }

    /// Discrete retarded kernel between cells with `G(s,s) = 1/2`.
    pub fn theta(&self, later: usize, earlier: usize) -> f64 {
        match later.cmp(&earlier) {
            std::cmp::Ordering::Greater => 1.0,
            std::cmp::Ordering::Equal => 0.5,
            std::cmp::Ordering::Less => 0.0,
        }
    }

    /// Kernel from an external time to a cell: only cells starting strictly
    /// before `t` contribute.
    pub fn theta_external(&self, t: f64, cell: usize) -> f64 {
        if self.node(cell) < t - 1e-12 * self.delta() {
            1.0
        } else {
            0.0
        }
    }
}

/// All pair partitions of `0..n` (empty for odd `n`).
pub fn pair_partitions(n: usize) -> Vec<Vec<(usize, usize)>> {
    fn go(free: &[usize], cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        let Some((&a, rest)) = free.split_first() else {
            out.push(cur.clone());
            return;
        };
        for i in 0..rest.len() {
            let mut left = rest.to_vec();
            let b = left.remove(i);
            cur.push((a, b));
            go(&left, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n % 2 == 0 {
        go(&(0..n).collect::<Vec<_>>(), &mut Vec::new(), &mut out);
    }
    out
}

/// `Γ_{δ/2}[F]|_{ξ=0}` for `F(ξ) = Δ^k Σ T(i₁..i_k) ξ_{i₁}⋯ξ_{i_k}` with the
/// discrete delta `δ_{ij}/Δ`. Each pair partition sets paired indices equal,
/// so a partition into `k/2` pairs costs `cells^{k/2}` evaluations of `T`.
pub fn isserlis_gamma_delta(grid: &IsserlisGrid, slots: usize, tensor: impl Fn(&[usize]) -> f64) -> Result<f64, OracleError> {
    if slots > MAX_XI_SLOTS {
        return Err(OracleError::TooManySlots { slots, max: MAX_XI_SLOTS });
    }
    if slots % 2 == 1 {
        return Ok(0.0);
    }
    let pairs = slots / 2;
    let n = grid.cells;
    let weight = grid.delta().powi(pairs as i32);
    let mut idx = vec![0usize; slots];
    let mut total = 0.0;
    for partition in pair_partitions(slots) {
        let mut counter = vec![0usize; pairs];
        let mut sum = 0.0;
        loop {
            for (p, &(a, b)) in partition.iter().enumerate() {
                idx[a] = counter[p];
                idx[b] = counter[p];
            }
            sum += tensor(&idx);
            let mut d = 0;
            while d < pairs {
                counter[d] += 1;
                if counter[d] < n {
                    break;
                }
                counter[d] = 0;
                d += 1;
            }
            if d == pairs {
                break;
            }
        }
        total += sum * weight;
    }
    Ok(total)
}
