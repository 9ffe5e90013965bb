//! Shape-preserving cubic interpolation on a strictly increasing node vector
//! (Fritsch–Carlson slopes). Used for field rescaling/translation and for
//! tabulated nonlinearities.

/// Piecewise cubic Hermite interpolant with monotonicity-limited slopes.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    slope: Vec<f64>,
    /// Prefix integrals: `prefix[i]` = ∫ from x[0] to x[i] of the interpolant.
    prefix: Vec<f64>,
}

impl MonotoneCubic {
    /// Builds the interpolant. `x` must be strictly increasing with at least
    /// two nodes.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert_eq!(x.len(), y.len());
        assert!(x.len() >= 2, "need at least two nodes");
        let n = x.len();
        let mut h = vec![0.0; n - 1];
        let mut d = vec![0.0; n - 1];
        for i in 0..n - 1 {
            h[i] = x[i + 1] - x[i];
            assert!(h[i] > 0.0, "nodes must be strictly increasing");
            d[i] = (y[i + 1] - y[i]) / h[i];
        }
        let mut slope = vec![0.0; n];
        if n == 2 {
            slope[0] = d[0];
            slope[1] = d[0];
        } else {
            slope[0] = end_slope(h[0], h[1], d[0], d[1]);
            slope[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
            for i in 1..n - 1 {
                slope[i] = if d[i - 1] * d[i] <= 0.0 {
                    0.0
                } else {
                    // Weighted harmonic mean keeps the interpolant monotone
                    // on monotone data (Fritsch–Carlson condition).
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    (w1 + w2) / (w1 / d[i - 1] + w2 / d[i])
                };
            }
        }
        let mut prefix = vec![0.0; n];
        for i in 0..n - 1 {
            let seg = h[i] * (y[i] + y[i + 1]) / 2.0 + h[i] * h[i] * (slope[i] - slope[i + 1]) / 12.0;
            prefix[i + 1] = prefix[i] + seg;
        }
        Self { x, y, slope, prefix }
    }

    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.x.last().unwrap()
    }

    fn interval(&self, q: f64) -> usize {
        // Largest i with x[i] <= q, clamped to a valid interval index.
        match self.x.binary_search_by(|v| v.partial_cmp(&q).unwrap()) {
            Ok(i) => i.min(self.x.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.x.len() - 2),
        }
    }

    /// Evaluates the interpolant; queries outside the node range clamp to the
    /// boundary values.
    pub fn eval(&self, q: f64) -> f64 {
        if q <= self.x[0] {
            return self.y[0];
        }
        if q >= *self.x.last().unwrap() {
            return *self.y.last().unwrap();
        }
        let i = self.interval(q);
        let h = self.x[i + 1] - self.x[i];
        let t = (q - self.x[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.y[i] + h10 * h * self.slope[i] + h01 * self.y[i + 1] + h11 * h * self.slope[i + 1]
    }

    /// ∫ of the interpolant from x[0] to q (q clamped to the node range).
    pub fn integral_from_start(&self, q: f64) -> f64 {
        if q <= self.x[0] {
            return 0.0;
        }
        if q >= *self.x.last().unwrap() {
            return *self.prefix.last().unwrap();
        }
        let i = self.interval(q);
        let h = self.x[i + 1] - self.x[i];
        let t = (q - self.x[i]) / h;
        let (t2, t3, t4) = (t * t, t * t * t, t * t * t * t);
        // Antiderivatives of the Hermite basis on [0,1], scaled by h.
        let ih00 = t4 / 2.0 - t3 + t;
        let ih10 = t4 / 4.0 - 2.0 * t3 / 3.0 + t2 / 2.0;
        let ih01 = -t4 / 2.0 + t3;
        let ih11 = t4 / 4.0 - t3 / 3.0;
        self.prefix[i]
            + h * (ih00 * self.y[i]
                + ih10 * h * self.slope[i]
                + ih01 * self.y[i + 1]
                + ih11 * h * self.slope[i + 1])
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    // Three-point end slope with the usual shape-preserving clamps.
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

/// Resamples `values` given on uniform `nodes` at query positions `q`,
/// returning 0 for queries outside `[nodes[0], nodes[last]]`. Grid-aligned
/// queries are snapped and copied exactly. The interpolant is the linear
/// cubic Hermite with central-difference slopes: being a linear operator, it
/// commutes with axis swaps and with resampling along other tensor axes,
/// which symmetry projections rely on.
pub fn resample_zero_fill(nodes: &[f64], values: &[f64], queries: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let lo = nodes[0];
    let hi = nodes[n - 1];
    let h = nodes[1] - nodes[0];
    let snap_tol = 1e-12 * h.max(1.0);
    let all_aligned = queries.iter().all(|&q| {
        if q < lo - snap_tol || q > hi + snap_tol {
            return true;
        }
        let k = (q - lo) / h;
        (k - k.round()).abs() * h < snap_tol
    });
    if all_aligned {
        return queries
            .iter()
            .map(|&q| {
                if q < lo - snap_tol || q > hi + snap_tol {
                    0.0
                } else {
                    let k = ((q - lo) / h).round() as usize;
                    values[k.min(n - 1)]
                }
            })
            .collect();
    }
    // Node slopes: central differences inside, second-order one-sided at ends.
    let mut slope = vec![0.0; n];
    slope[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
    slope[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h);
    for i in 1..n - 1 {
        slope[i] = (values[i + 1] - values[i - 1]) / (2.0 * h);
    }
    queries
        .iter()
        .map(|&q| {
            if q < lo || q > hi {
                return 0.0;
            }
            let mut i = ((q - lo) / h).floor() as usize;
            if i >= n - 1 {
                i = n - 2;
            }
            let t = (q - nodes[i]) / h;
            let (t2, t3) = (t * t, t * t * t);
            let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
            let h10 = t3 - 2.0 * t2 + t;
            let h01 = -2.0 * t3 + 3.0 * t2;
            let h11 = t3 - t2;
            h00 * values[i] + h10 * h * slope[i] + h01 * values[i + 1] + h11 * h * slope[i + 1]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_nodes_exactly() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|&v| (v * 1.3).sin()).collect();
        let s = MonotoneCubic::new(x.clone(), y.clone());
        for (xi, yi) in x.iter().zip(&y) {
            assert!((s.eval(*xi) - yi).abs() < 1e-14);
        }
    }

    #[test]
    fn monotone_data_stays_monotone() {
        let x: Vec<f64> = (0..30).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|&v| v.tanh()).collect();
        let s = MonotoneCubic::new(x, y);
        let mut prev = f64::NEG_INFINITY;
        for k in 0..300 {
            let v = s.eval(k as f64 * 0.0097);
            assert!(v >= prev - 1e-13);
            prev = v;
        }
    }

    #[test]
    fn integral_matches_closed_form_for_smooth_data() {
        let x: Vec<f64> = (0..401).map(|i| i as f64 * 0.01).collect();
        let y: Vec<f64> = x.iter().map(|&v| v * v).collect();
        let s = MonotoneCubic::new(x, y);
        let q = 3.1415;
        let exact = q * q * q / 3.0;
        assert!((s.integral_from_start(q) - exact).abs() < 1e-6);
    }

    #[test]
    fn aligned_resample_is_exact_shift() {
        let nodes: Vec<f64> = (0..64).map(|i| -8.0 + i as f64 * 0.25).collect();
        let vals: Vec<f64> = nodes.iter().map(|&z| (-z * z).exp()).collect();
        let queries: Vec<f64> = nodes.iter().map(|&z| z + 1.0).collect();
        let shifted = resample_zero_fill(&nodes, &vals, &queries);
        for (i, q) in queries.iter().enumerate() {
            if *q <= nodes[nodes.len() - 1] {
                let k = ((q - nodes[0]) / 0.25).round() as usize;
                assert_eq!(shifted[i], vals[k]);
            } else {
                assert_eq!(shifted[i], 0.0);
            }
        }
    }
}
