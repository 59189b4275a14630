//! Composite Gauss-Legendre panel quadrature.
//!
//! Kernel applications need two things beyond plain weighted sums: panel-wise
//! polynomial interpolation of grid data (the iterates are only known at the
//! nodes) and partial-panel moments `int_{panel_lo}^{t} y^k h(y) dy`, which
//! let the inner integral split exactly at the kernel kink y = x.

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n(x) and P_n'(x)
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Barycentric weights for a set of interpolation nodes.
fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![1.0; n];
    for j in 0..n {
        for k in 0..n {
            if k != j {
                w[j] /= nodes[j] - nodes[k];
            }
        }
    }
    w
}

/// Composite Gauss-Legendre rule on [lo, hi] with uniform panels.
#[derive(Debug, Clone)]
pub struct PanelRule {
    pub lo: f64,
    pub hi: f64,
    pub n_panels: usize,
    pub nodes_per_panel: usize,
    /// All nodes, panel-major.
    pub nodes: Vec<f64>,
    /// Matching weights; their sum equals hi - lo.
    pub weights: Vec<f64>,
    ref_nodes: Vec<f64>,
    ref_weights: Vec<f64>,
    bary: Vec<f64>,
}

impl PanelRule {
    pub fn uniform(lo: f64, hi: f64, n_panels: usize, nodes_per_panel: usize) -> Self {
        assert!(hi > lo && n_panels >= 1 && nodes_per_panel >= 2);
        let (rx, rw) = gauss_legendre(nodes_per_panel);
        let bary = barycentric_weights(&rx);
        let width = (hi - lo) / n_panels as f64;
        let mut nodes = Vec::with_capacity(n_panels * nodes_per_panel);
        let mut weights = Vec::with_capacity(n_panels * nodes_per_panel);
        for p in 0..n_panels {
            let plo = lo + p as f64 * width;
            let mid = plo + width / 2.0;
            let hw = width / 2.0;
            for (x, w) in rx.iter().zip(&rw) {
                nodes.push(mid + hw * x);
                weights.push(hw * w);
            }
        }
        PanelRule {
            lo,
            hi,
            n_panels,
            nodes_per_panel,
            nodes,
            weights,
            ref_nodes: rx,
            ref_weights: rw,
            bary,
        }
    }

    /// Centered rule on an interval of length `a`.
    pub fn centered(a: f64, n_panels: usize, nodes_per_panel: usize) -> Self {
        Self::uniform(-a / 2.0, a / 2.0, n_panels, nodes_per_panel)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn panel_width(&self) -> f64 {
        (self.hi - self.lo) / self.n_panels as f64
    }

    pub fn panel_lo(&self, p: usize) -> f64 {
        self.lo + p as f64 * self.panel_width()
    }

    /// Panel containing node index `i`.
    pub fn panel_of_node(&self, i: usize) -> usize {
        i / self.nodes_per_panel
    }

    /// Panel containing coordinate `t` (clamped to the valid range).
    pub fn panel_of(&self, t: f64) -> usize {
        let p = ((t - self.lo) / self.panel_width()).floor() as isize;
        p.clamp(0, self.n_panels as isize - 1) as usize
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.len());
        debug_assert_eq!(g.len(), self.len());
        self.weights.iter().zip(f).zip(g).map(|((w, a), b)| w * a * b).sum()
    }

    /// Interpolate grid data at `t` using the Lagrange polynomial through the
    /// Gauss nodes of the panel containing `t`.
    pub fn interpolate(&self, values: &[f64], t: f64) -> f64 {
        let p = self.panel_of(t);
        self.interpolate_in_panel(values, p, t)
    }

    fn interpolate_in_panel(&self, values: &[f64], p: usize, t: f64) -> f64 {
        let base = p * self.nodes_per_panel;
        let width = self.panel_width();
        let mid = self.panel_lo(p) + width / 2.0;
        // reference coordinate; barycentric weights are affine-invariant
        let s = (t - mid) / (width / 2.0);
        let mut num = 0.0;
        let mut den = 0.0;
        for (j, (&rn, &bw)) in self.ref_nodes.iter().zip(&self.bary).enumerate() {
            let d = s - rn;
            if d.abs() < 1e-14 {
                return values[base + j];
            }
            let c = bw / d;
            num += c * values[base + j];
            den += c;
        }
        num / den
    }

    /// Moments m_k = int_panel y^k h(y) dy for k = 0, 1, 2 of every panel.
    pub fn panel_moments(&self, h: &[f64]) -> Vec<[f64; 3]> {
        let mut out = vec![[0.0; 3]; self.n_panels];
        for p in 0..self.n_panels {
            let base = p * self.nodes_per_panel;
            let mut m = [0.0; 3];
            for j in 0..self.nodes_per_panel {
                let x = self.nodes[base + j];
                let wh = self.weights[base + j] * h[base + j];
                m[0] += wh;
                m[1] += wh * x;
                m[2] += wh * x * x;
            }
            out[p] = m;
        }
        out
    }

    /// Partial moments int_{panel_lo(p)}^{t} y^k interp(h)(y) dy for
    /// k = 0, 1, 2, with `t` inside panel `p`. Exact for the panel
    /// interpolant: the sub-interval is integrated with a fresh Gauss rule
    /// of the same order.
    pub fn partial_moments(&self, h: &[f64], p: usize, t: f64) -> [f64; 3] {
        let lo = self.panel_lo(p);
        let mut m = [0.0; 3];
        if t - lo < 1e-300 {
            return m;
        }
        let mid = (lo + t) / 2.0;
        let hw = (t - lo) / 2.0;
        for (&rn, &rw) in self.ref_nodes.iter().zip(&self.ref_weights) {
            let y = mid + hw * rn;
            let w = hw * rw;
            let hv = self.interpolate_in_panel(h, p, y);
            let wh = w * hv;
            m[0] += wh;
            m[1] += wh * y;
            m[2] += wh * y * y;
        }
        m
    }

    /// Integrate `kernel(y) * interp(h)(y)` over [self.lo, self.hi] with the
    /// integration split at `t` and fresh sub-panels of width at most
    /// `max_width` on each side. Used for transverse kernels with a kink at
    /// y = t and exponential variation too fast for the base panels.
    pub fn integrate_kernel_split(
        &self,
        h: &[f64],
        t: f64,
        max_width: f64,
        mut kernel: impl FnMut(f64) -> f64,
    ) -> f64 {
        let mut total = 0.0;
        for (lo, hi) in [(self.lo, t), (t, self.hi)] {
            let span = hi - lo;
            if span <= 1e-300 {
                continue;
            }
            let n_sub = (span / max_width).ceil().max(1.0) as usize;
            let w = span / n_sub as f64;
            for s in 0..n_sub {
                let slo = lo + s as f64 * w;
                let mid = slo + w / 2.0;
                let hw = w / 2.0;
                for (&rn, &rw) in self.ref_nodes.iter().zip(&self.ref_weights) {
                    let y = mid + hw * rn;
                    total += hw * rw * kernel(y) * self.interpolate(h, y);
                }
            }
        }
        total
    }
}

/// Tensor-product panel rule on a rectangle; node ordering is x-major
/// (index = ix * ny + iy).
#[derive(Debug, Clone)]
pub struct PanelRule2D {
    pub x: PanelRule,
    pub y: PanelRule,
}

impl PanelRule2D {
    pub fn centered(a: f64, b: f64, panels_x: usize, panels_y: usize, nodes_per_panel: usize) -> Self {
        PanelRule2D {
            x: PanelRule::centered(a, panels_x, nodes_per_panel),
            y: PanelRule::centered(b, panels_y, nodes_per_panel),
        }
    }

    pub fn len(&self) -> usize {
        self.x.len() * self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        let ny = self.y.len();
        let mut total = 0.0;
        for (ix, wx) in self.x.weights.iter().enumerate() {
            let row = &values[ix * ny..(ix + 1) * ny];
            let mut s = 0.0;
            for (wy, v) in self.y.weights.iter().zip(row) {
                s += wy * v;
            }
            total += wx * s;
        }
        total
    }

    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        let ny = self.y.len();
        let mut total = 0.0;
        for (ix, wx) in self.x.weights.iter().enumerate() {
            let mut s = 0.0;
            for iy in 0..ny {
                let k = ix * ny + iy;
                s += self.y.weights[iy] * f[k] * g[k];
            }
            total += wx * s;
        }
        total
    }
}

/// Panel count so that composite Gauss resolves an integrand of angular
/// frequency `freq` over a span `len` (about half a period per panel).
pub fn panels_for_frequency(len: f64, freq: f64, minimum: usize) -> usize {
    let p = (len * freq / 6.0).ceil() as usize;
    p.max(minimum)
}

/// Validate that the requested panel setup is usable.
pub fn validate_counts(n_panels: usize, nodes_per_panel: usize) -> Result<()> {
    if n_panels == 0 || nodes_per_panel < 4 || nodes_per_panel > 64 {
        return Err(Error::Config(format!(
            "invalid quadrature setup: {n_panels} panels x {nodes_per_panel} nodes"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_nodes_match_reference() {
        // 5-point rule, Abramowitz & Stegun 25.4.30
        let (x, w) = gauss_legendre(5);
        assert!((x[0] + 0.906179845938664).abs() < 1e-14);
        assert!((x[1] + 0.538469310105683).abs() < 1e-14);
        assert!(x[2].abs() < 1e-15);
        assert!((w[0] - 0.236926885056189).abs() < 1e-14);
        assert!((w[2] - 0.568888888888889).abs() < 1e-14);
    }

    #[test]
    fn polynomial_exactness() {
        let (x, w) = gauss_legendre(12);
        // exact through degree 23
        for k in [0usize, 5, 12, 23] {
            let num: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(k as i32)).sum();
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((num - exact).abs() < 1e-13, "degree {k}: {num} vs {exact}");
        }
    }

    #[test]
    fn weights_sum_to_length() {
        let rule = PanelRule::centered(1.0, 10, 12);
        let total: f64 = rule.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-13);
        assert!(rule.nodes.iter().all(|x| x.abs() < 0.5));
    }

    #[test]
    fn integrates_trig() {
        let rule = PanelRule::centered(1.0, 8, 12);
        let vals: Vec<f64> = rule.nodes.iter().map(|x| (3.0 * x).cos()).collect();
        let exact = 2.0 * (1.5f64).sin() / 3.0;
        assert!((rule.integrate(&vals) - exact).abs() < 1e-14);
    }

    #[test]
    fn interpolation_reproduces_smooth_function() {
        let rule = PanelRule::centered(1.0, 6, 12);
        let f = |x: f64| (2.0 * x).sin() + x * x;
        let vals: Vec<f64> = rule.nodes.iter().map(|&x| f(x)).collect();
        for i in 0..50 {
            let t = -0.49 + i as f64 * 0.02;
            assert!((rule.interpolate(&vals, t) - f(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_moments_against_closed_form() {
        let rule = PanelRule::centered(2.0, 5, 12);
        // h(y) = y^2: partial moment k over [panel_lo, t] is
        // int y^(k+2) = (t^(k+3) - lo^(k+3)) / (k+3)
        let h: Vec<f64> = rule.nodes.iter().map(|y| y * y).collect();
        let p = 2usize;
        let lo = rule.panel_lo(p);
        let t = lo + 0.17;
        let m = rule.partial_moments(&h, p, t);
        for k in 0..3 {
            let e = (t.powi(k + 3) - lo.powi(k + 3)) / (k as f64 + 3.0);
            assert!((m[k as usize] - e).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn kernel_split_handles_kink() {
        // int_{-1/2}^{1/2} |y - t| dy has a kink at y = t
        let rule = PanelRule::centered(1.0, 4, 12);
        let h = vec![1.0; rule.len()];
        let t = 0.123;
        let got = rule.integrate_kernel_split(&h, t, 0.25, |y| (y - t).abs());
        let exact = ((t + 0.5).powi(2) + (0.5 - t).powi(2)) / 2.0;
        assert!((got - exact).abs() < 1e-14);
    }

    #[test]
    fn rect_rule_volume() {
        let r = PanelRule2D::centered(1.0, 0.5, 4, 3, 8);
        let ones = vec![1.0; r.len()];
        assert!((r.integrate(&ones) - 0.5).abs() < 1e-13);
    }
}
