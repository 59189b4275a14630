//! Application of the inverse operator sqrt(Sigma) (-Lap)^{-1} sqrt(Sigma)
//! by kernel quadrature, the zero-mode projector, and the finite spectral
//! matrices of the inverse operators.
//!
//! The grid engine stores iterates at composite Gauss nodes. A kernel
//! application splits the inner integral at the diagonal kink y = x using
//! the kernels' branch form (polynomials of degree <= 2 in y on each side),
//! so the only error left is panel interpolation of a smooth integrand.
//! The forward operator is applied spectrally, never by differentiating
//! grid data.

use nalgebra::DMatrix;

use crate::basis::{self, Mode, Mode2D};
use crate::density::DensitySpec;
use crate::domain::{BoundaryCondition, Domain};
use crate::error::{Error, Result};
use crate::green;
use crate::quadrature::{panels_for_frequency, validate_counts, PanelRule, PanelRule2D};

/// Function sampled at the quadrature nodes of a context (x-major for 2D).
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Self {
        GridFunction { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.values {
            *v *= c;
        }
    }

    pub fn add_scaled(&mut self, c: f64, other: &GridFunction) {
        debug_assert_eq!(self.len(), other.len());
        for (v, o) in self.values.iter_mut().zip(&other.values) {
            *v += c * o;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Quadrature grid of a context.
#[derive(Debug, Clone)]
pub enum Grid {
    OneD(PanelRule),
    TwoD(PanelRule2D),
}

impl Grid {
    pub fn len(&self) -> usize {
        match self {
            Grid::OneD(r) => r.len(),
            Grid::TwoD(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        match self {
            Grid::OneD(r) => r.integrate(values),
            Grid::TwoD(r) => r.integrate(values),
        }
    }

    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        match self {
            Grid::OneD(r) => r.inner(f, g),
            Grid::TwoD(r) => r.inner(f, g),
        }
    }
}

/// Options for building an [`OperatorContext`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ContextOptions {
    /// Panels along x (default: 10, refined for oscillating densities).
    pub panels_x: Option<usize>,
    /// Panels along y for rectangles (default: 8).
    pub panels_y: Option<usize>,
    /// Gauss nodes per panel (default 12).
    pub nodes_per_panel: Option<usize>,
    /// x-mode truncation of the rectangle kernel (default 80).
    pub nx_max: Option<usize>,
}

/// Immutable bundle of domain, boundary condition, density and grid, with
/// the density sampled at the nodes.
#[derive(Debug, Clone)]
pub struct OperatorContext {
    pub domain: Domain,
    pub bc: BoundaryCondition,
    pub density: DensitySpec,
    pub grid: Grid,
    /// Rectangle kernel truncation.
    pub nx_max: usize,
    sqrt_sigma: Vec<f64>,
    sigma_integral: f64,
    sqrt_sigma_norm2: f64,
}

impl OperatorContext {
    pub fn new(domain: Domain, bc: BoundaryCondition, density: DensitySpec) -> Result<Self> {
        Self::with_options(domain, bc, density, ContextOptions::default())
    }

    pub fn with_options(
        domain: Domain,
        bc: BoundaryCondition,
        density: DensitySpec,
        opts: ContextOptions,
    ) -> Result<Self> {
        let a = domain.side_a();
        density.validate_for_length(a)?;
        let npp = opts.nodes_per_panel.unwrap_or(12);
        // oscillating densities need panels no wider than a quarter period
        let min_panels = |len: f64, floor: usize| -> usize {
            match density.oscillation_period() {
                Some(eps) => ((4.0 * len / eps).ceil() as usize).max(floor),
                None => floor,
            }
        };
        let grid = match domain {
            Domain::Interval { a } => {
                let panels = opts.panels_x.unwrap_or_else(|| min_panels(a, 10));
                validate_counts(panels, npp)?;
                Grid::OneD(PanelRule::centered(a, panels, npp))
            }
            Domain::Rectangle { a, b } => {
                if bc != BoundaryCondition::DD {
                    return Err(Error::UnsupportedBoundary { op: "rectangle basis" });
                }
                let px = opts.panels_x.unwrap_or_else(|| min_panels(a, 10));
                let py = opts.panels_y.unwrap_or(8);
                validate_counts(px, npp)?;
                validate_counts(py, npp)?;
                Grid::TwoD(PanelRule2D::centered(a, b, px, py, npp))
            }
        };
        let mut ctx = OperatorContext {
            domain,
            bc,
            density,
            grid,
            nx_max: opts.nx_max.unwrap_or(80),
            sqrt_sigma: Vec::new(),
            sigma_integral: 0.0,
            sqrt_sigma_norm2: 0.0,
        };
        ctx.sample_density()?;
        Ok(ctx)
    }

    fn sample_density(&mut self) -> Result<()> {
        let mut ss = Vec::with_capacity(self.grid.len());
        match &self.grid {
            Grid::OneD(r) => {
                for &x in &r.nodes {
                    ss.push(self.density.eval_sqrt(x)?);
                }
            }
            Grid::TwoD(r) => {
                for &x in &r.x.nodes {
                    for &y in &r.y.nodes {
                        ss.push(self.density.eval_sqrt_xy(x, y)?);
                    }
                }
            }
        }
        let sigma: Vec<f64> = ss.iter().map(|s| s * s).collect();
        self.sigma_integral = self.grid.integrate(&sigma);
        self.sqrt_sigma_norm2 = self.sigma_integral;
        self.sqrt_sigma = ss;
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.grid.len()
    }

    /// sqrt(Sigma) sampled at the nodes.
    pub fn sqrt_sigma(&self) -> &[f64] {
        &self.sqrt_sigma
    }

    /// int Sigma over the domain.
    pub fn sigma_integral(&self) -> f64 {
        self.sigma_integral
    }

    /// Sample a 1D function at the nodes.
    pub fn grid_from_fn(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        match &self.grid {
            Grid::OneD(r) => GridFunction::new(r.nodes.iter().map(|&x| f(x)).collect()),
            Grid::TwoD(_) => panic!("grid_from_fn on a 2D context"),
        }
    }

    /// Sample a 2D function at the nodes, x-major.
    pub fn grid_from_fn2(&self, f: impl Fn(f64, f64) -> f64) -> GridFunction {
        match &self.grid {
            Grid::TwoD(r) => {
                let mut v = Vec::with_capacity(r.len());
                for &x in &r.x.nodes {
                    for &y in &r.y.nodes {
                        v.push(f(x, y));
                    }
                }
                GridFunction::new(v)
            }
            Grid::OneD(_) => panic!("grid_from_fn2 on a 1D context"),
        }
    }

    /// The paper's weighted ansatz sqrt(Sigma(x)) * phi(x) for a mode of
    /// this context's basis.
    pub fn weighted_mode(&self, m: &Mode) -> GridFunction {
        match &self.grid {
            Grid::OneD(r) => GridFunction::new(
                r.nodes.iter().zip(&self.sqrt_sigma).map(|(&x, s)| s * m.eval(x)).collect(),
            ),
            Grid::TwoD(_) => panic!("weighted_mode on a 2D context"),
        }
    }

    pub fn inner(&self, f: &GridFunction, g: &GridFunction) -> f64 {
        self.grid.inner(&f.values, &g.values)
    }

    pub fn norm(&self, f: &GridFunction) -> f64 {
        self.inner(f, f).sqrt()
    }

    /// Divide out the density weight: Psi = Xi / sqrt(Sigma).
    pub fn to_physical(&self, xi: &GridFunction) -> GridFunction {
        GridFunction::new(
            xi.values.iter().zip(&self.sqrt_sigma).map(|(v, s)| v / s).collect(),
        )
    }

    /// Short descriptor of the grid for report metadata.
    pub fn grid_descriptor(&self) -> String {
        match &self.grid {
            Grid::OneD(r) => format!("panels={} nodes_per_panel={}", r.n_panels, r.nodes_per_panel),
            Grid::TwoD(r) => format!(
                "panels={}x{} nodes_per_panel={} nx_max={}",
                r.x.n_panels, r.y.n_panels, r.x.nodes_per_panel, self.nx_max
            ),
        }
    }
}

/// sqrt(Sigma(x)) int G(x, y) sqrt(Sigma(y)) f(y) dy at every node, for the
/// boundary conditions without a zero mode. Linear in `f`.
pub fn apply_inverse(ctx: &OperatorContext, f: &GridFunction) -> Result<GridFunction> {
    if ctx.bc.has_zero_mode() {
        return Err(Error::ZeroModePresent);
    }
    match &ctx.grid {
        Grid::OneD(_) => Ok(apply_kernel_1d(ctx, f)),
        Grid::TwoD(_) => Ok(apply_kernel_2d(ctx, f)),
    }
}

/// The zero-mode path (NN/PP): regularized kernel followed by projection,
/// so the result is orthogonal to sqrt(Sigma).
pub fn apply_inverse_regularized(ctx: &OperatorContext, f: &GridFunction) -> Result<GridFunction> {
    if !ctx.bc.has_zero_mode() {
        return Err(Error::UnsupportedBoundary { op: "regularized inverse" });
    }
    let tilde = apply_kernel_1d(ctx, f);
    project_out_zero_mode(ctx, &tilde)
}

/// f - sqrt(Sigma) (int sqrt(Sigma) f) / (int Sigma); idempotent.
pub fn project_out_zero_mode(ctx: &OperatorContext, f: &GridFunction) -> Result<GridFunction> {
    if !ctx.bc.has_zero_mode() {
        return Err(Error::UnsupportedBoundary { op: "zero-mode projection" });
    }
    let overlap = ctx.grid.inner(&f.values, &ctx.sqrt_sigma);
    let c = overlap / ctx.sqrt_sigma_norm2;
    let values = f
        .values
        .iter()
        .zip(&ctx.sqrt_sigma)
        .map(|(v, s)| v - c * s)
        .collect();
    Ok(GridFunction::new(values))
}

/// One-dimensional kernel application via branch moments.
fn apply_kernel_1d(ctx: &OperatorContext, f: &GridFunction) -> GridFunction {
    let rule = match &ctx.grid {
        Grid::OneD(r) => r,
        Grid::TwoD(_) => unreachable!(),
    };
    let a = ctx.domain.side_a();
    let h: Vec<f64> =
        f.values.iter().zip(&ctx.sqrt_sigma).map(|(v, s)| v * s).collect();
    let per_panel = rule.panel_moments(&h);
    // prefix[p][k] = sum of moments of panels < p
    let mut prefix = vec![[0.0; 3]; rule.n_panels + 1];
    for p in 0..rule.n_panels {
        for k in 0..3 {
            prefix[p + 1][k] = prefix[p][k] + per_panel[p][k];
        }
    }
    let total = prefix[rule.n_panels];
    let mut out = vec![0.0; rule.len()];
    for (i, &xi) in rule.nodes.iter().enumerate() {
        let p = rule.panel_of_node(i);
        let part = rule.partial_moments(&h, p, xi);
        let mut low = [0.0; 3];
        let mut high = [0.0; 3];
        for k in 0..3 {
            low[k] = prefix[p][k] + part[k];
            high[k] = total[k] - low[k];
        }
        let (cl, cu) = green::branch_coeffs(ctx.bc, a, xi);
        let u = cl[0] * low[0] + cl[1] * low[1] + cl[2] * low[2]
            + cu[0] * high[0] + cu[1] * high[1] + cu[2] * high[2];
        out[i] = ctx.sqrt_sigma[i] * u;
    }
    GridFunction::new(out)
}

/// Rectangle kernel application, factorized over x-modes: for each n the
/// x overlap is a weighted sum and the transverse integral runs against the
/// sinh kernel with the integration split at the kink y' = y.
fn apply_kernel_2d(ctx: &OperatorContext, f: &GridFunction) -> GridFunction {
    let rule = match &ctx.grid {
        Grid::TwoD(r) => r,
        Grid::OneD(_) => unreachable!(),
    };
    let a = ctx.domain.side_a();
    let b = ctx.domain.side_b().expect("rectangle");
    let nx = rule.x.len();
    let ny = rule.y.len();
    let h: Vec<f64> =
        f.values.iter().zip(&ctx.sqrt_sigma).map(|(v, s)| v * s).collect();
    let mut out = vec![0.0; nx * ny];
    let base_width = rule.y.panel_width();
    let mut a_n = vec![0.0; ny];
    let mut b_n = vec![0.0; ny];
    for n in 1..=ctx.nx_max {
        let s = n as f64 * std::f64::consts::PI / a;
        let psi: Vec<f64> = rule
            .x
            .nodes
            .iter()
            .map(|&x| (2.0 / a).sqrt() * (s * (x + a / 2.0)).sin())
            .collect();
        // x overlap per transverse node
        for iy in 0..ny {
            let mut acc = 0.0;
            for ix in 0..nx {
                acc += rule.x.weights[ix] * psi[ix] * h[ix * ny + iy];
            }
            a_n[iy] = acc;
        }
        // transverse integral with the kink split; sub-panels resolve e^{-s d}
        let max_width = base_width.min(8.0 / s);
        for (iy, yo) in rule.y.nodes.iter().enumerate() {
            b_n[iy] = rule.y.integrate_kernel_split(&a_n, *yo, max_width, |yp| {
                green::transverse_kernel(s, b, *yo, yp)
            });
        }
        for ix in 0..nx {
            let px = psi[ix];
            let row = &mut out[ix * ny..(ix + 1) * ny];
            for (o, bv) in row.iter_mut().zip(&b_n) {
                *o += px * bv;
            }
        }
    }
    for (o, s) in out.iter_mut().zip(&ctx.sqrt_sigma) {
        *o *= s;
    }
    GridFunction::new(out)
}

/// The forward operator Sigma^{-1/2} (-Lap) Sigma^{-1/2} applied spectrally:
/// expand Sigma^{-1/2} g in the first `n_modes` nonzero Laplacian modes,
/// multiply by the eigenvalues, and return to the grid. The overlaps are
/// taken on a grid refined to resolve the highest mode.
pub fn apply_forward_spectral(
    ctx: &OperatorContext,
    g: &GridFunction,
    n_modes: usize,
) -> Result<GridFunction> {
    let rule = match &ctx.grid {
        Grid::OneD(r) => r,
        Grid::TwoD(_) => return Err(Error::UnsupportedBoundary { op: "spectral forward on 2D" }),
    };
    let a = ctx.domain.side_a();
    let u: Vec<f64> = g
        .values
        .iter()
        .zip(&ctx.sqrt_sigma)
        .map(|(v, s)| v / s)
        .collect();
    let modes = basis::basis_modes(ctx.bc, &ctx.domain, n_modes);
    let max_freq = modes.last().map(|m| m.frequency()).unwrap_or(1.0);
    let fine = PanelRule::centered(
        a,
        panels_for_frequency(a, 2.0 * max_freq, rule.n_panels),
        rule.nodes_per_panel,
    );
    let u_fine: Vec<f64> = fine.nodes.iter().map(|&x| rule.interpolate(&u, x)).collect();
    let mut acc = vec![0.0; rule.len()];
    for m in &modes {
        let phi_fine: Vec<f64> = fine.nodes.iter().map(|&x| m.eval(x)).collect();
        let c = fine.inner(&phi_fine, &u_fine) * m.eigenvalue;
        for (av, &x) in acc.iter_mut().zip(&rule.nodes) {
            *av += c * m.eval(x);
        }
    }
    let out: Vec<f64> = acc.iter().zip(&ctx.sqrt_sigma).map(|(v, s)| v / s).collect();
    Ok(GridFunction::new(out))
}

/// int phi_m Sigma phi_n over the domain, on a grid refined for the joint
/// oscillation of the two modes and the density.
pub fn density_overlap(ctx: &OperatorContext, m: &Mode, n: &Mode) -> f64 {
    let a = ctx.domain.side_a();
    let dens_freq = ctx
        .density
        .oscillation_period()
        .map(|eps| 2.0 * std::f64::consts::PI / eps)
        .unwrap_or(0.0);
    let freq = m.frequency() + n.frequency() + dens_freq;
    let rule = PanelRule::centered(a, panels_for_frequency(a, freq, 16), 12);
    let vals: Vec<f64> = rule
        .nodes
        .iter()
        .map(|&x| m.eval(x) * self_density(ctx, x) * n.eval(x))
        .collect();
    rule.integrate(&vals)
}

fn self_density(ctx: &OperatorContext, x: f64) -> f64 {
    // context construction already validated positivity on grids; overlap
    // rules stay interior as well
    ctx.density.eval(x).unwrap_or(0.0)
}

/// Matrix engine selector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralEngine {
    /// Matrix of O^{-1} via sqrt-density overlaps with internal truncation R
    /// (default 2N). Finite-basis estimates from this route are the poorer
    /// ones; the truncation delta is reported.
    OInv { truncation: Option<usize> },
    /// Matrix of W^{-1}: <n|Sigma|m> / sqrt(eps_n eps_m) over nonzero modes.
    WInv,
    /// Zero-mode conditions: density overlaps deflated against the zero
    /// mode, then weighted as in WInv.
    WInvDeflated,
}

impl SpectralEngine {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpectralEngine::OInv { .. } => "oinv",
            SpectralEngine::WInv => "winv",
            SpectralEngine::WInvDeflated => "winv-deflated",
        }
    }
}

/// Basis the matrix was assembled in.
#[derive(Debug, Clone)]
pub enum ModeSet {
    OneD(Vec<Mode>),
    TwoD(Vec<Mode2D>),
}

impl ModeSet {
    pub fn len(&self) -> usize {
        match self {
            ModeSet::OneD(v) => v.len(),
            ModeSet::TwoD(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn laplacian_eigenvalue(&self, i: usize) -> f64 {
        match self {
            ModeSet::OneD(v) => v[i].eigenvalue,
            ModeSet::TwoD(v) => v[i].eigenvalue,
        }
    }
}

/// Finite section of an inverse operator in the Laplacian eigenbasis.
#[derive(Debug, Clone)]
pub struct SpectralMatrix {
    pub engine: SpectralEngine,
    pub n: usize,
    /// Symmetric matrix entries of the chosen inverse operator.
    pub entries: DMatrix<f64>,
    /// Raw density overlaps <n|Sigma|m> of the basis modes.
    pub density_overlaps: DMatrix<f64>,
    pub modes: ModeSet,
    /// Max entry change when the OInv internal truncation is doubled.
    pub oinv_truncation_delta: Option<f64>,
}

/// Assemble the n x n matrix of the chosen engine.
pub fn build_spectral_matrix(
    ctx: &OperatorContext,
    n: usize,
    engine: SpectralEngine,
) -> Result<SpectralMatrix> {
    if n < 2 {
        return Err(Error::Config(format!("basis size {n} too small")));
    }
    match &ctx.grid {
        Grid::OneD(_) => build_matrix_1d(ctx, n, engine),
        Grid::TwoD(_) => build_matrix_2d(ctx, n, engine),
    }
}

fn assembly_rule(ctx: &OperatorContext, max_freq: f64) -> PanelRule {
    let a = ctx.domain.side_a();
    let dens_freq = ctx
        .density
        .oscillation_period()
        .map(|eps| 2.0 * std::f64::consts::PI / eps)
        .unwrap_or(0.0);
    PanelRule::centered(a, panels_for_frequency(a, 2.0 * max_freq + dens_freq, 16), 12)
}

/// Overlap matrix Phi diag(w rho) Phi^T for sampled mode values.
fn gram(phi: &[Vec<f64>], rule: &PanelRule, rho: &[f64]) -> DMatrix<f64> {
    let n = phi.len();
    let mut m = DMatrix::zeros(n, n);
    let wr: Vec<f64> = rule.weights.iter().zip(rho).map(|(w, r)| w * r).collect();
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for k in 0..rule.len() {
                acc += wr[k] * phi[i][k] * phi[j][k];
            }
            m[(i, j)] = acc;
            m[(j, i)] = acc;
        }
    }
    m
}

fn build_matrix_1d(ctx: &OperatorContext, n: usize, engine: SpectralEngine) -> Result<SpectralMatrix> {
    let modes = basis::basis_modes(ctx.bc, &ctx.domain, n);
    let max_freq = modes.last().unwrap().frequency();

    match engine {
        SpectralEngine::WInv | SpectralEngine::WInvDeflated => {
            if engine == SpectralEngine::WInvDeflated && !ctx.bc.has_zero_mode() {
                return Err(Error::UnsupportedBoundary { op: "deflated engine" });
            }
            let rule = assembly_rule(ctx, max_freq);
            let sigma: Vec<f64> = rule.nodes.iter().map(|&x| self_density(ctx, x)).collect();
            let phi: Vec<Vec<f64>> = modes.iter().map(|m| m.sample(&rule.nodes)).collect();
            let overlaps = gram(&phi, &rule, &sigma);
            let mut entries = overlaps.clone();
            if engine == SpectralEngine::WInvDeflated {
                let zero = basis::zero_mode(ctx.bc, &ctx.domain).unwrap();
                let z = zero.sample(&rule.nodes);
                let wr: Vec<f64> = rule.weights.iter().zip(&sigma).map(|(w, s)| w * s).collect();
                let s00: f64 = wr.iter().zip(&z).map(|(w, zi)| w * zi * zi).sum();
                let s0: Vec<f64> = phi
                    .iter()
                    .map(|p| wr.iter().zip(p).zip(&z).map(|((w, pi), zi)| w * pi * zi).sum())
                    .collect();
                for i in 0..n {
                    for j in 0..n {
                        entries[(i, j)] -= s0[i] * s0[j] / s00;
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    entries[(i, j)] /=
                        (modes[i].eigenvalue * modes[j].eigenvalue).sqrt();
                }
            }
            Ok(SpectralMatrix {
                engine,
                n,
                entries,
                density_overlaps: overlaps,
                modes: ModeSet::OneD(modes),
                oinv_truncation_delta: None,
            })
        }
        SpectralEngine::OInv { truncation } => {
            if ctx.bc.has_zero_mode() {
                return Err(Error::ZeroModePresent);
            }
            let r = truncation.unwrap_or(2 * n);
            if r < n {
                return Err(Error::InsufficientTruncation { basis: n, truncation: r });
            }
            let inner_modes = basis::basis_modes(ctx.bc, &ctx.domain, 2 * r);
            let rule = assembly_rule(ctx, inner_modes.last().unwrap().frequency());
            let sqrt_sigma: Vec<f64> =
                rule.nodes.iter().map(|&x| self_density(ctx, x).sqrt()).collect();
            let sigma: Vec<f64> = sqrt_sigma.iter().map(|s| s * s).collect();
            let phi: Vec<Vec<f64>> = inner_modes.iter().map(|m| m.sample(&rule.nodes)).collect();
            // B[i][rr] = <i|sqrtSigma|rr> for i < n, rr < 2R
            let wr: Vec<f64> =
                rule.weights.iter().zip(&sqrt_sigma).map(|(w, s)| w * s).collect();
            let mut b = DMatrix::zeros(n, 2 * r);
            for i in 0..n {
                for rr in 0..2 * r {
                    let mut acc = 0.0;
                    for k in 0..rule.len() {
                        acc += wr[k] * phi[i][k] * phi[rr][k];
                    }
                    b[(i, rr)] = acc;
                }
            }
            let section = |upto: usize| -> DMatrix<f64> {
                let mut m = DMatrix::zeros(n, n);
                for i in 0..n {
                    for j in i..n {
                        let mut acc = 0.0;
                        for rr in 0..upto {
                            acc += b[(i, rr)] * b[(j, rr)] / inner_modes[rr].eigenvalue;
                        }
                        m[(i, j)] = acc;
                        m[(j, i)] = acc;
                    }
                }
                m
            };
            let entries = section(r);
            let refined = section(2 * r);
            let delta = (&refined - &entries).abs().max();
            let overlaps = gram(&phi[..n].to_vec(), &rule, &sigma);
            Ok(SpectralMatrix {
                engine,
                n,
                entries,
                density_overlaps: overlaps,
                modes: ModeSet::OneD(modes),
                oinv_truncation_delta: Some(delta),
            })
        }
    }
}

fn build_matrix_2d(ctx: &OperatorContext, n: usize, engine: SpectralEngine) -> Result<SpectralMatrix> {
    if !matches!(engine, SpectralEngine::WInv) {
        return Err(Error::UnsupportedBoundary { op: "2D engine other than WInv" });
    }
    let modes = basis::product_modes(&ctx.domain, n)?;
    let a = ctx.domain.side_a();
    let b = ctx.domain.side_b().expect("rectangle");
    let (fx, fy): (DensitySpec, DensitySpec) = match &ctx.density {
        DensitySpec::Separable2D(fx, fy) => ((**fx).clone(), (**fy).clone()),
        other => (other.clone(), DensitySpec::Constant(1.0)),
    };
    let nx_hi = modes.iter().map(|m| m.x.index.n).max().unwrap();
    let ny_hi = modes.iter().map(|m| m.y.index.n).max().unwrap();
    let sx = factor_overlaps(&fx, a, nx_hi);
    let sy = factor_overlaps(&fy, b, ny_hi);
    let mut overlaps = DMatrix::zeros(n, n);
    let mut entries = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let (mi, mj) = (&modes[i], &modes[j]);
            let s = sx[(mi.x.index.n - 1, mj.x.index.n - 1)] * sy[(mi.y.index.n - 1, mj.y.index.n - 1)];
            overlaps[(i, j)] = s;
            overlaps[(j, i)] = s;
            let e = s / (mi.eigenvalue * mj.eigenvalue).sqrt();
            entries[(i, j)] = e;
            entries[(j, i)] = e;
        }
    }
    Ok(SpectralMatrix {
        engine,
        n,
        entries,
        density_overlaps: overlaps,
        modes: ModeSet::TwoD(modes),
        oinv_truncation_delta: None,
    })
}

/// 1D Dirichlet-mode density overlaps of one separable factor.
fn factor_overlaps(factor: &DensitySpec, len: f64, n_hi: usize) -> DMatrix<f64> {
    let dom = Domain::interval(len);
    let modes = basis::basis_modes(BoundaryCondition::DD, &dom, n_hi);
    let dens_freq = factor
        .oscillation_period()
        .map(|eps| 2.0 * std::f64::consts::PI / eps)
        .unwrap_or(0.0);
    let rule = PanelRule::centered(
        len,
        panels_for_frequency(len, 2.0 * modes.last().unwrap().frequency() + dens_freq, 16),
        12,
    );
    let rho: Vec<f64> = rule.nodes.iter().map(|&x| factor.eval(x).unwrap_or(0.0)).collect();
    let phi: Vec<Vec<f64>> = modes.iter().map(|m| m.sample(&rule.nodes)).collect();
    gram(&phi, &rule, &rho)
}
