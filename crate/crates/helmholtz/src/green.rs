//! Green kernels of the homogeneous negative Laplacian.
//!
//! For the interval, every kernel is a closed form: the Dirichlet one is the
//! textbook tent product, the mixed ones degenerate to one-sided ramps, and
//! the Neumann/periodic kernels are the regularized inverses (zero mode
//! removed), quadratic polynomials in x, y and |x - y|. On each side of the
//! diagonal all of them are short sums u_k(x) y^k, which is what lets the
//! quadrature engine integrate across the kink exactly; `branch_coeffs`
//! exposes that form.
//!
//! The rectangle kernel is the partial sum over x-modes with the transverse
//! sinh factor summed in closed form.

use std::f64::consts::PI;

use crate::domain::{BoundaryCondition, Domain};
use crate::error::{Error, Result};

/// Closed-form kernel for the conditions without a zero mode (DD, ND, DN).
///
/// DD: (a - 2 max)(a + 2 min)/(4a); ND: a/2 - max; DN: a/2 + min.
pub fn closed_1d(bc: BoundaryCondition, domain: &Domain, x: f64, y: f64) -> Result<f64> {
    domain.check_x(x)?;
    domain.check_x(y)?;
    let a = domain.side_a();
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    match bc {
        BoundaryCondition::DD => Ok((a - 2.0 * hi) * (a + 2.0 * lo) / (4.0 * a)),
        BoundaryCondition::ND => Ok(a / 2.0 - hi),
        BoundaryCondition::DN => Ok(a / 2.0 + lo),
        BoundaryCondition::NN | BoundaryCondition::PP => Err(Error::ZeroModePresent),
    }
}

/// Regularized kernel G^(0) for the zero-mode conditions (NN, PP): the
/// spectral sum over nonzero modes, in closed form.
///
/// NN: (x^2 + y^2)/(2a) - |x - y|/2 + a/12; PP the same with x^2 + y^2
/// replaced by (x - y)^2.
pub fn regularized_1d(bc: BoundaryCondition, domain: &Domain, x: f64, y: f64) -> Result<f64> {
    domain.check_x(x)?;
    domain.check_x(y)?;
    let a = domain.side_a();
    let r = (x - y).abs();
    match bc {
        BoundaryCondition::NN => Ok((x * x + y * y) / (2.0 * a) - r / 2.0 + a / 12.0),
        BoundaryCondition::PP => Ok(r * r / (2.0 * a) - r / 2.0 + a / 12.0),
        _ => Err(Error::UnsupportedBoundary { op: "regularized kernel" }),
    }
}

/// Resolvent kernel of (-d^2/dx^2 + gamma) with Neumann conditions,
/// cosh(s(x_< + a/2)) cosh(s(a/2 - x_>)) / (s sinh(s a)) with s = sqrt(gamma),
/// evaluated in an overflow-free exponential form. Its gamma -> 0 expansion
/// is 1/(a gamma) + G^(0) + O(gamma).
pub fn gamma_nn_1d(domain: &Domain, gamma: f64, x: f64, y: f64) -> Result<f64> {
    if gamma <= 0.0 {
        return Err(Error::NonPositiveGamma { gamma });
    }
    domain.check_x(x)?;
    domain.check_x(y)?;
    let a = domain.side_a();
    let s = gamma.sqrt();
    let c = s * a;
    let d = (x - y).abs();
    // 2 cosh(A) cosh(B) = cosh(A+B) + cosh(A-B) with A+B = c - s*d and
    // A-B = s(x+y); all exponents below are <= 0.
    let num = (-s * d).exp() + (s * d - 2.0 * c).exp()
        + (s * (x + y) - c).exp()
        + (-s * (x + y) - c).exp();
    let den = 2.0 * s * (-(-2.0 * c).exp_m1());
    Ok(num / den)
}

/// Transverse factor g_n(y, y') of the rectangle kernel: the Dirichlet
/// resolvent of (-d^2/dy^2 + s^2) on (-b/2, b/2), in a form stable for
/// large s:
/// [e^{-s d} + e^{s d - 2 s b} - e^{s(y+y') - s b} - e^{-s(y+y') - s b}]
///   / (2 s (1 - e^{-2 s b})).
pub fn transverse_kernel(s: f64, b: f64, y: f64, yp: f64) -> f64 {
    let d = (y - yp).abs();
    let c = s * b;
    let num = (-s * d).exp() + (s * d - 2.0 * c).exp()
        - (s * (y + yp) - c).exp()
        - (-s * (y + yp) - c).exp();
    num / (2.0 * s * (-(-2.0 * c).exp_m1()))
}

/// Dirichlet kernel of the rectangle as a partial sum over x-modes.
/// Returns the value and the magnitude of the first omitted term, which
/// bounds the truncation error scale (terms decay like
/// exp(-n pi |y - y'| / a)).
pub fn rect_partial_sum(
    domain: &Domain,
    x: f64,
    y: f64,
    xp: f64,
    yp: f64,
    nx_max: usize,
) -> Result<(f64, f64)> {
    let (a, b) = match *domain {
        Domain::Rectangle { a, b } => (a, b),
        _ => return Err(Error::UnsupportedBoundary { op: "rectangle kernel" }),
    };
    domain.check_x(x)?;
    domain.check_x(xp)?;
    domain.check_y(y)?;
    domain.check_y(yp)?;
    let psi = |n: usize, t: f64| (2.0 / a).sqrt() * (n as f64 * PI * (t + a / 2.0) / a).sin();
    let mut total = 0.0;
    for n in 1..=nx_max {
        let s = n as f64 * PI / a;
        total += transverse_kernel(s, b, y, yp) * psi(n, x) * psi(n, xp);
    }
    let s1 = (nx_max + 1) as f64 * PI / a;
    let tail = (transverse_kernel(s1, b, y, yp) * psi(nx_max + 1, x) * psi(nx_max + 1, xp)).abs();
    Ok((total, tail))
}

/// Kernel form selector mirroring the catalog above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelForm {
    ClosedForm1D,
    Regularized1D,
    GammaShifted1D { gamma: f64 },
    RectPartialSum { nx_max: usize },
}

/// A kernel bound to a domain and boundary condition.
#[derive(Debug, Clone)]
pub struct GreenKernel {
    pub bc: BoundaryCondition,
    pub domain: Domain,
    pub form: KernelForm,
}

impl GreenKernel {
    pub fn new(bc: BoundaryCondition, domain: Domain, form: KernelForm) -> Result<Self> {
        match form {
            KernelForm::ClosedForm1D if bc.has_zero_mode() => Err(Error::ZeroModePresent),
            KernelForm::Regularized1D if !bc.has_zero_mode() => {
                Err(Error::UnsupportedBoundary { op: "regularized kernel" })
            }
            KernelForm::GammaShifted1D { gamma } if gamma <= 0.0 => {
                Err(Error::NonPositiveGamma { gamma })
            }
            KernelForm::RectPartialSum { .. } if domain.is_interval() => {
                Err(Error::UnsupportedBoundary { op: "rectangle kernel" })
            }
            _ => Ok(GreenKernel { bc, domain, form }),
        }
    }

    /// Evaluate a one-dimensional kernel.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        match self.form {
            KernelForm::ClosedForm1D => closed_1d(self.bc, &self.domain, x, y),
            KernelForm::Regularized1D => regularized_1d(self.bc, &self.domain, x, y),
            KernelForm::GammaShifted1D { gamma } => gamma_nn_1d(&self.domain, gamma, x, y),
            KernelForm::RectPartialSum { .. } => {
                Err(Error::UnsupportedBoundary { op: "pointwise 1D evaluation" })
            }
        }
    }

    /// Evaluate the rectangle kernel; returns (value, truncation estimate).
    pub fn eval2(&self, x: f64, y: f64, xp: f64, yp: f64) -> Result<(f64, f64)> {
        match self.form {
            KernelForm::RectPartialSum { nx_max } => {
                rect_partial_sum(&self.domain, x, y, xp, yp, nx_max)
            }
            _ => Err(Error::UnsupportedBoundary { op: "pointwise 2D evaluation" }),
        }
    }
}

/// Coefficients of the kernel's separable branch form: on each side of the
/// diagonal, G(x, y) = sum_k c_k(x) y^k with k <= 2. Returns
/// (lower coefficients for y < x, upper coefficients for y > x).
pub(crate) fn branch_coeffs(bc: BoundaryCondition, a: f64, x: f64) -> ([f64; 3], [f64; 3]) {
    match bc {
        BoundaryCondition::DD => (
            [(a - 2.0 * x) / 4.0, (a - 2.0 * x) / (2.0 * a), 0.0],
            [(a + 2.0 * x) / 4.0, -(a + 2.0 * x) / (2.0 * a), 0.0],
        ),
        BoundaryCondition::ND => ([a / 2.0 - x, 0.0, 0.0], [a / 2.0, -1.0, 0.0]),
        BoundaryCondition::DN => ([a / 2.0, 1.0, 0.0], [a / 2.0 + x, 0.0, 0.0]),
        BoundaryCondition::NN => (
            [x * x / (2.0 * a) - x / 2.0 + a / 12.0, 0.5, 1.0 / (2.0 * a)],
            [x * x / (2.0 * a) + x / 2.0 + a / 12.0, -0.5, 1.0 / (2.0 * a)],
        ),
        BoundaryCondition::PP => (
            [x * x / (2.0 * a) - x / 2.0 + a / 12.0, 0.5 - x / a, 1.0 / (2.0 * a)],
            [x * x / (2.0 * a) + x / 2.0 + a / 12.0, -0.5 - x / a, 1.0 / (2.0 * a)],
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{basis_modes, mode};
    use crate::quadrature::PanelRule;

    const A: f64 = 1.0;

    fn dom() -> Domain {
        Domain::interval(A)
    }

    /// Truncated spectral sum oracle sum_n phi_n(x) phi_n(y) / (eps_n + gamma).
    fn spectral_sum(bc: BoundaryCondition, x: f64, y: f64, terms: usize, gamma: f64) -> f64 {
        basis_modes(bc, &dom(), terms)
            .iter()
            .map(|m| m.eval(x) * m.eval(y) / (m.eigenvalue + gamma))
            .sum()
    }

    #[test]
    fn dd_closed_form_values() {
        assert!((closed_1d(BoundaryCondition::DD, &dom(), 0.0, 0.0).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(closed_1d(BoundaryCondition::DD, &dom(), -0.5, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn nd_matches_spectral_sum() {
        // 1e4-term truncated eigenfunction expansion; tail ~ 1/n
        let v = closed_1d(BoundaryCondition::ND, &dom(), 0.0, 0.0).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        assert!((v - spectral_sum(BoundaryCondition::ND, 0.0, 0.0, 10_000, 0.0)).abs() < 1e-4);
        let v = closed_1d(BoundaryCondition::ND, &dom(), 0.3, -0.2).unwrap();
        assert!((v - spectral_sum(BoundaryCondition::ND, 0.3, -0.2, 10_000, 0.0)).abs() < 1e-6);
    }

    #[test]
    fn dn_matches_spectral_sum() {
        for (x, y) in [(0.1, 0.4), (-0.25, 0.25), (0.0, 0.0)] {
            let v = closed_1d(BoundaryCondition::DN, &dom(), x, y).unwrap();
            let s = spectral_sum(BoundaryCondition::DN, x, y, 10_000, 0.0);
            assert!((v - s).abs() < 1e-4, "({x},{y}): {v} vs {s}");
        }
    }

    #[test]
    fn regularized_match_spectral_sums() {
        for bc in [BoundaryCondition::NN, BoundaryCondition::PP] {
            for (x, y) in [(0.2, -0.1), (0.33, 0.47), (-0.4, 0.4)] {
                let v = regularized_1d(bc, &dom(), x, y).unwrap();
                let s = spectral_sum(bc, x, y, 100_000, 0.0);
                assert!((v - s).abs() < 2e-6, "{bc:?} ({x},{y}): {v} vs {s}");
            }
        }
    }

    #[test]
    fn kernels_symmetric() {
        let pts = [(0.3, -0.2), (0.17, 0.41), (-0.45, 0.02)];
        for bc in [
            BoundaryCondition::DD,
            BoundaryCondition::ND,
            BoundaryCondition::DN,
        ] {
            for (x, y) in pts {
                let g = closed_1d(bc, &dom(), x, y).unwrap();
                let gt = closed_1d(bc, &dom(), y, x).unwrap();
                assert!((g - gt).abs() < 1e-13);
            }
        }
        for bc in [BoundaryCondition::NN, BoundaryCondition::PP] {
            for (x, y) in pts {
                let g = regularized_1d(bc, &dom(), x, y).unwrap();
                let gt = regularized_1d(bc, &dom(), y, x).unwrap();
                assert!((g - gt).abs() < 1e-13);
            }
        }
        for (x, y) in pts {
            let g = gamma_nn_1d(&dom(), 1.0, x, y).unwrap();
            let gt = gamma_nn_1d(&dom(), 1.0, y, x).unwrap();
            assert!((g - gt).abs() < 1e-13);
        }
    }

    #[test]
    fn regularized_orthogonal_to_zero_mode() {
        // int G0(x, y) dy = 0 for every x
        let rule = PanelRule::centered(A, 12, 12);
        for bc in [BoundaryCondition::NN, BoundaryCondition::PP] {
            for &x in &[0.0, 0.31, -0.22] {
                let vals: Vec<f64> =
                    rule.nodes.iter().map(|&y| regularized_1d(bc, &dom(), x, y).unwrap()).collect();
                assert!(rule.integrate(&vals).abs() < 1e-10, "{bc:?} x={x}");
            }
        }
    }

    #[test]
    fn gamma_kernel_matches_spectral_sum() {
        for gamma in [1.0, 0.01, 100.0] {
            for (x, y) in [(0.3, -0.2), (0.0, 0.0)] {
                let v = gamma_nn_1d(&dom(), gamma, x, y).unwrap();
                let s = 1.0 / (A * gamma) + spectral_sum(BoundaryCondition::NN, x, y, 200_000, gamma);
                assert!((v - s).abs() < 1e-5 * v.abs().max(1.0), "g={gamma} ({x},{y}): {v} vs {s}");
            }
        }
    }

    #[test]
    fn gamma_limit_recovers_regularized_kernel() {
        // G_gamma - 1/(a gamma) -> G0 first order in gamma
        let (x, y) = (0.3, -0.2);
        let g0 = regularized_1d(BoundaryCondition::NN, &dom(), x, y).unwrap();
        let d4 = gamma_nn_1d(&dom(), 1e-4, x, y).unwrap() - 1.0 / (A * 1e-4) - g0;
        let d6 = gamma_nn_1d(&dom(), 1e-6, x, y).unwrap() - 1.0 / (A * 1e-6) - g0;
        let ratio = d4 / d6;
        assert!((50.0..150.0).contains(&ratio), "ratio {ratio}");
        // two-point extrapolation lands on the closed form
        let v4 = gamma_nn_1d(&dom(), 1e-4, 0.0, 0.0).unwrap() - 1e4;
        let v6 = gamma_nn_1d(&dom(), 1e-6, 0.0, 0.0).unwrap() - 1e6;
        let extrap = (1e-4 * v6 - 1e-6 * v4) / (1e-4 - 1e-6);
        let g0 = regularized_1d(BoundaryCondition::NN, &dom(), 0.0, 0.0).unwrap();
        assert!((extrap - g0).abs() < 1e-7, "{extrap} vs {g0}");
    }

    #[test]
    fn gamma_kernel_decays_with_gamma() {
        let (x, y) = (0.3, -0.2);
        let v2 = gamma_nn_1d(&dom(), 1e2, x, y).unwrap();
        let v4 = gamma_nn_1d(&dom(), 1e4, x, y).unwrap();
        assert!(v2 > v4 && v4 > 0.0);
        assert!(gamma_nn_1d(&dom(), 0.0, x, y).is_err());
        // no overflow for extreme shifts
        assert!(gamma_nn_1d(&dom(), 1e12, x, y).unwrap().is_finite());
    }

    #[test]
    fn gamma_kernel_neumann_properties() {
        // finite differences: (-d2/dx2 + gamma) G = 0 away from the diagonal,
        // and the normal derivative vanishes at the ends
        let gamma = 3.0;
        let y = 0.1;
        let h = 1e-5;
        let g = |x: f64| gamma_nn_1d(&dom(), gamma, x, y).unwrap();
        for x in [-0.3, 0.35] {
            let lap = (g(x + h) - 2.0 * g(x) + g(x - h)) / (h * h);
            assert!((-lap + gamma * g(x)).abs() < 1e-4);
        }
        let d_left = (g(-0.5 + h) - g(-0.5)) / h;
        let d_right = (g(0.5) - g(0.5 - h)) / h;
        assert!(d_left.abs() < 1e-4, "left derivative {d_left}");
        assert!(d_right.abs() < 1e-4, "right derivative {d_right}");
        // unit jump of the derivative across x = y
        let jump = (g(y + h) - g(y)) / h - (g(y) - g(y - h)) / h;
        assert!((jump + 1.0).abs() < 1e-3, "jump {jump}");
    }

    #[test]
    fn reproducing_property_all_bcs() {
        // int G(x, y) phi_n(y) dy = phi_n(x) / eps_n for nonzero modes
        let rule = PanelRule::centered(A, 16, 12);
        let d = dom();
        for bc in [
            BoundaryCondition::DD,
            BoundaryCondition::ND,
            BoundaryCondition::DN,
            BoundaryCondition::NN,
            BoundaryCondition::PP,
        ] {
            for m in basis_modes(bc, &d, 8) {
                for &x in &[0.0, 0.31, -0.17] {
                    let vals: Vec<f64> = rule
                        .nodes
                        .iter()
                        .map(|&y| {
                            let g = if bc.has_zero_mode() {
                                regularized_1d(bc, &d, x, y).unwrap()
                            } else {
                                closed_1d(bc, &d, x, y).unwrap()
                            };
                            g * m.eval(y)
                        })
                        .collect();
                    let got = rule.integrate(&vals);
                    let want = m.eval(x) / m.eigenvalue;
                    assert!(
                        (got - want).abs() < 1e-8,
                        "{bc:?} {:?} x={x}: {got} vs {want}",
                        m.index
                    );
                }
            }
        }
    }

    #[test]
    fn rect_kernel_edge_and_symmetry() {
        let d = Domain::rectangle(1.0, 0.5);
        let (v, _) = rect_partial_sum(&d, -0.5, 0.1, 0.2, 0.05, 40).unwrap();
        assert!(v.abs() < 1e-12, "Dirichlet edge: {v}");
        let (g, _) = rect_partial_sum(&d, 0.12, 0.08, -0.2, -0.15, 60).unwrap();
        let (gt, _) = rect_partial_sum(&d, -0.2, -0.15, 0.12, 0.08, 60).unwrap();
        assert!((g - gt).abs() < 1e-13);
    }

    #[test]
    fn rect_kernel_truncation_self_consistency() {
        // off the diagonal the terms decay like exp(-n pi |y - y'| / a)
        let d = Domain::rectangle(1.0, 0.5);
        let (v60, t60) = rect_partial_sum(&d, 0.0, 0.1, 0.0, -0.1, 60).unwrap();
        let (v120, _) = rect_partial_sum(&d, 0.0, 0.1, 0.0, -0.1, 120).unwrap();
        assert!((v60 - v120).abs() < 1e-12, "delta {}", (v60 - v120).abs());
        assert!((v60 - v120).abs() <= 2.0 * t60.max(1e-13));
    }

    #[test]
    fn rect_kernel_reproduces_lowest_product_mode() {
        let d = Domain::rectangle(1.0, 0.5);
        let rx = PanelRule::centered(1.0, 10, 12);
        let ry = PanelRule::centered(0.5, 8, 12);
        let dx = Domain::interval(1.0);
        let dy = Domain::interval(0.5);
        let mx = mode(BoundaryCondition::DD, &dx, 1, None).unwrap();
        let my = mode(BoundaryCondition::DD, &dy, 1, None).unwrap();
        let lam = PI * PI * (1.0 + 4.0);
        let (x, y) = (0.2, -0.05);
        let mut total = 0.0;
        for (&xp, wx) in rx.nodes.iter().zip(&rx.weights) {
            for (&yp, wy) in ry.nodes.iter().zip(&ry.weights) {
                let (g, _) = rect_partial_sum(&d, x, y, xp, yp, 60).unwrap();
                total += wx * wy * g * mx.eval(xp) * my.eval(yp);
            }
        }
        let want = mx.eval(x) * my.eval(y) / lam;
        assert!((total - want).abs() < 1e-8, "{total} vs {want}");
    }

    #[test]
    fn branch_coeffs_consistent_with_kernels() {
        let a = 1.0;
        let d = dom();
        for bc in [
            BoundaryCondition::DD,
            BoundaryCondition::ND,
            BoundaryCondition::DN,
            BoundaryCondition::NN,
            BoundaryCondition::PP,
        ] {
            let evalk = |x: f64, y: f64| -> f64 {
                if bc.has_zero_mode() {
                    regularized_1d(bc, &d, x, y).unwrap()
                } else {
                    closed_1d(bc, &d, x, y).unwrap()
                }
            };
            for &x in &[-0.3, 0.0, 0.42] {
                let (p, q) = branch_coeffs(bc, a, x);
                for &y in &[-0.45, -0.1, 0.2, 0.48] {
                    let c = if y < x { p } else { q };
                    let poly = c[0] + c[1] * y + c[2] * y * y;
                    assert!((poly - evalk(x, y)).abs() < 1e-13, "{bc:?} x={x} y={y}");
                }
            }
        }
    }

    #[test]
    fn kernel_struct_validation() {
        let d = dom();
        assert!(GreenKernel::new(BoundaryCondition::NN, d, KernelForm::ClosedForm1D).is_err());
        assert!(GreenKernel::new(BoundaryCondition::DD, d, KernelForm::Regularized1D).is_err());
        assert!(
            GreenKernel::new(BoundaryCondition::NN, d, KernelForm::GammaShifted1D { gamma: -1.0 })
                .is_err()
        );
        let k = GreenKernel::new(BoundaryCondition::DD, d, KernelForm::ClosedForm1D).unwrap();
        assert!((k.eval(0.0, 0.0).unwrap() - 0.25).abs() < 1e-15);
        assert!(k.eval(0.9, 0.0).is_err());
    }
}
