//! Iteration schemes for the lowest modes: inverse-power iteration (with the
//! zero-mode-projected variant), the two-vector inverse-operator subspace
//! iteration, block iteration with re-orthogonalization, and the matrix
//! (Rayleigh-Ritz) path.
//!
//! Rayleigh quotients and mean-square deviations come from overlap
//! identities of the iteration, never from differentiation: with
//! O Xi_p = Xi_{p-1} and the previous iterate normalized,
//! <O>_p = <Xi_p, Xi_{p-1}> / <Xi_p, Xi_p> and
//! <O^2>_p = 1 / <Xi_p, Xi_p>.

use std::io::Write;
use std::time::Instant;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::operators::{
    apply_inverse, apply_inverse_regularized, build_spectral_matrix, project_out_zero_mode,
    GridFunction, OperatorContext, SpectralEngine, SpectralMatrix,
};

/// Default convergence tolerance on successive Rayleigh quotients.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default iteration cap.
pub const DEFAULT_P_MAX: usize = 64;

const NORM_FLOOR: f64 = 1e-300;

/// One row of a solve: iteration count, eigenvalue estimate and the
/// mean-square deviation (for the subspace method, the inverse-operator
/// deviation upsilon).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub p: usize,
    pub eigenvalue: f64,
    pub msd: f64,
}

/// State of the inverse-power iteration after an application.
#[derive(Debug, Clone)]
pub struct IterateState {
    pub p: usize,
    /// Current iterate, normalized to unit L2 norm.
    pub xi: GridFunction,
    /// <Xi_p, Xi_p> before normalization.
    pub overlap_curr: f64,
    /// <Xi_p, Xi_{p-1}>.
    pub overlap_cross: f64,
    /// <Xi_{p-1}, Xi_{p-1}> (unity: iterates are renormalized).
    pub overlap_prev: f64,
    pub rayleigh: f64,
    pub msd: f64,
}

/// State of the two-vector subspace iteration.
#[derive(Debug, Clone)]
pub struct LanczosState {
    pub xi: GridFunction,
    pub chi: GridFunction,
    /// <xi|O^{-1}|xi>.
    pub eta: f64,
    /// sqrt(<xi|O^{-2}|xi> - eta^2).
    pub upsilon: f64,
    /// <chi|O^{-1}|chi>.
    pub epsilon_q: f64,
    /// sqrt((eta - epsilon_q)^2 + (2 upsilon)^2).
    pub delta: f64,
    /// Subspace eigenvalues of O^{-1}: e1 <= eta <= e2.
    pub e1: f64,
    pub e2: f64,
}

/// Outcome of a solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub method: String,
    pub converged: bool,
    /// Final eigenvalue estimate.
    pub eigenvalue: f64,
    pub iterations: Vec<IterationRecord>,
    /// Physical eigenfunction Psi = Xi / sqrt(Sigma), normalized to
    /// int Sigma Psi^2 = 1.
    pub psi: GridFunction,
    pub wall: std::time::Duration,
    /// Grid / engine metadata (not part of serialized records).
    pub engine: String,
    pub final_state: Option<IterateState>,
    pub final_lanczos: Option<LanczosState>,
}

impl SolveReport {
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.iterations.iter().map(|r| r.eigenvalue).collect()
    }

    /// Line-oriented records: one `p,eigenvalue,msd` row per iteration,
    /// 17 significant digits.
    pub fn write_records<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "p,eigenvalue,msd")?;
        for r in &self.iterations {
            writeln!(w, "{},{:.16e},{:.16e}", r.p, r.eigenvalue, r.msd)?;
        }
        Ok(())
    }
}

fn apply_step(ctx: &OperatorContext, f: &GridFunction) -> Result<GridFunction> {
    if ctx.bc.has_zero_mode() {
        apply_inverse_regularized(ctx, f)
    } else {
        apply_inverse(ctx, f)
    }
}

/// Prepare the starting iterate: normalize, and for zero-mode conditions
/// project out the zero mode. An ansatz proportional to sqrt(Sigma) itself
/// (the paper's linear ansatz at alpha = 2/a is one) projects to zero; the
/// kernel is then applied once to the raw ansatz first, which injects
/// overlap with the positive modes.
fn prepare_ansatz(ctx: &OperatorContext, ansatz: &GridFunction) -> Result<GridFunction> {
    let raw_norm = ctx.norm(ansatz);
    if raw_norm < NORM_FLOOR {
        return Err(Error::LostOverlap);
    }
    if !ctx.bc.has_zero_mode() {
        let mut x = ansatz.clone();
        x.scale(1.0 / raw_norm);
        return Ok(x);
    }
    let mut x = project_out_zero_mode(ctx, ansatz)?;
    let mut n = ctx.norm(&x);
    if n < 1e-13 * raw_norm {
        x = apply_inverse_regularized(ctx, ansatz)?;
        n = ctx.norm(&x);
        if n < NORM_FLOOR {
            return Err(Error::LostOverlap);
        }
    }
    x.scale(1.0 / n);
    Ok(x)
}

/// Inverse-power iteration (Green's-function form). Converges to the lowest
/// mode overlapping the ansatz; under NN/PP the zero mode is projected out
/// of the ansatz and of every iterate, and the limit is the lowest mode
/// with positive eigenvalue.
pub fn power_iterate(
    ctx: &OperatorContext,
    ansatz: &GridFunction,
    p_max: usize,
    tol: f64,
) -> Result<SolveReport> {
    let start = Instant::now();
    let mut x = prepare_ansatz(ctx, ansatz)?;
    let mut records = Vec::new();
    let mut converged = false;
    let mut state: Option<IterateState> = None;
    for p in 1..=p_max {
        let y = apply_step(ctx, &x)?;
        let yy = ctx.inner(&y, &y);
        if yy.sqrt() < NORM_FLOOR {
            return Err(Error::LostOverlap);
        }
        let yx = ctx.inner(&y, &x);
        let rayleigh = yx / yy;
        let msd2 = (1.0 / yy - rayleigh * rayleigh).max(0.0);
        let msd = msd2.sqrt();
        records.push(IterationRecord { p, eigenvalue: rayleigh, msd });
        let prev = records.len().checked_sub(2).map(|i| records[i].eigenvalue);
        let mut xi = y;
        xi.scale(1.0 / yy.sqrt());
        state = Some(IterateState {
            p,
            xi: xi.clone(),
            overlap_curr: yy,
            overlap_cross: yx,
            overlap_prev: 1.0,
            rayleigh,
            msd,
        });
        x = xi;
        if let Some(prev) = prev {
            if (rayleigh - prev).abs() < tol {
                converged = true;
                break;
            }
        }
    }
    let eigenvalue = records.last().map(|r| r.eigenvalue).unwrap_or(f64::NAN);
    Ok(SolveReport {
        method: "power".into(),
        converged,
        eigenvalue,
        iterations: records,
        psi: ctx.to_physical(&x),
        wall: start.elapsed(),
        engine: ctx.grid_descriptor(),
        final_state: state,
        final_lanczos: None,
    })
}

/// Two-vector subspace iteration on the inverse operator. Each step costs
/// two kernel applications (one for the iterate, one for its companion) and
/// reports the eigenvalue estimate 1/e2. Requires an ansatz satisfying the
/// boundary conditions; the zero-mode variant is not provided.
pub fn lanczos_iterate(
    ctx: &OperatorContext,
    ansatz: &GridFunction,
    p_max: usize,
    tol: f64,
) -> Result<SolveReport> {
    if ctx.bc.has_zero_mode() {
        return Err(Error::UnsupportedBoundary { op: "subspace iteration with a zero mode" });
    }
    let start = Instant::now();
    let mut xi = ansatz.clone();
    let n0 = ctx.norm(&xi);
    if n0 < NORM_FLOOR {
        return Err(Error::LostOverlap);
    }
    xi.scale(1.0 / n0);
    let mut records = Vec::new();
    let mut converged = false;
    let mut last: Option<LanczosState> = None;
    for p in 1..=p_max {
        let w = apply_step(ctx, &xi)?;
        let eta = ctx.inner(&xi, &w);
        let o2 = ctx.inner(&w, &w);
        let upsilon = (o2 - eta * eta).max(0.0).sqrt();
        if upsilon < 1e-14 * eta.abs() {
            // the iterate is already an eigenfunction of the inverse operator
            records.push(IterationRecord { p, eigenvalue: 1.0 / eta, msd: upsilon });
            converged = true;
            break;
        }
        let mut chi = w;
        chi.add_scaled(-eta, &xi);
        chi.scale(1.0 / upsilon);
        let z = apply_step(ctx, &chi)?;
        let epsilon_q = ctx.inner(&chi, &z);
        let delta = ((eta - epsilon_q).powi(2) + 4.0 * upsilon * upsilon).sqrt();
        let e1 = 0.5 * (eta + epsilon_q - delta);
        let e2 = 0.5 * (eta + epsilon_q + delta);
        records.push(IterationRecord { p, eigenvalue: 1.0 / e2, msd: upsilon });
        let ca = ((-epsilon_q + eta + delta) / delta).sqrt() / 2.0f64.sqrt();
        let cb = ((epsilon_q - eta + delta) / delta).sqrt() / 2.0f64.sqrt();
        let mut next = xi.clone();
        next.scale(ca);
        next.add_scaled(cb, &chi);
        last = Some(LanczosState { xi: xi.clone(), chi, eta, upsilon, epsilon_q, delta, e1, e2 });
        xi = next;
        if records.len() >= 2 {
            let m = records.len();
            if (records[m - 1].eigenvalue - records[m - 2].eigenvalue).abs() < tol {
                converged = true;
                break;
            }
        }
    }
    let eigenvalue = records.last().map(|r| r.eigenvalue).unwrap_or(f64::NAN);
    Ok(SolveReport {
        method: "lanczos".into(),
        converged,
        eigenvalue,
        iterations: records,
        psi: ctx.to_physical(&xi),
        wall: start.elapsed(),
        engine: ctx.grid_descriptor(),
        final_state: None,
        final_lanczos: last,
    })
}

/// Block inverse iteration: apply the inverse to every member, then
/// re-orthogonalize by modified Gram-Schmidt in the plain L2 inner product.
/// Member j converges to the j-th lowest mode. Members are ordered by the
/// Rayleigh quotient after the first application.
pub fn block_iterate(
    ctx: &OperatorContext,
    ansatzes: &[GridFunction],
    p_max: usize,
    tol: f64,
) -> Result<Vec<SolveReport>> {
    let start = Instant::now();
    let n = ansatzes.len();
    if n == 0 {
        return Err(Error::Config("block iteration needs at least one ansatz".into()));
    }
    let mut members: Vec<GridFunction> =
        ansatzes.iter().map(|f| prepare_ansatz(ctx, f)).collect::<Result<_>>()?;
    // images under the forward operator; O (O^{-1} X) = X keeps these exact
    let mut images: Vec<GridFunction> = members.clone();
    let mut history: Vec<Vec<IterationRecord>> = vec![Vec::new(); n];
    let mut rayleigh = vec![f64::NAN; n];
    let mut converged = false;
    for p in 1..=p_max {
        let mut ys = Vec::with_capacity(n);
        for x in &members {
            ys.push(apply_step(ctx, x)?);
        }
        let mut zs: Vec<GridFunction> = members.clone();
        if p == 1 {
            // order by the first-iterate Rayleigh quotient
            let mut order: Vec<usize> = (0..n).collect();
            let q: Vec<f64> = ys
                .iter()
                .zip(&members)
                .map(|(y, x)| ctx.inner(y, x) / ctx.inner(y, y))
                .collect();
            order.sort_by(|&i, &j| q[i].partial_cmp(&q[j]).unwrap());
            ys = order.iter().map(|&i| ys[i].clone()).collect();
            zs = order.iter().map(|&i| zs[i].clone()).collect();
        }
        for j in 0..n {
            let pre_norm = ctx.norm(&ys[j]);
            for k in 0..j {
                let c = ctx.inner(&ys[k], &ys[j]);
                let (head, tail) = ys.split_at_mut(j);
                tail[0].add_scaled(-c, &head[k]);
                let (zh, zt) = zs.split_at_mut(j);
                zt[0].add_scaled(-c, &zh[k]);
            }
            let nrm = ctx.norm(&ys[j]);
            if nrm < 1e-12 * pre_norm {
                return Err(Error::RankCollapse { member: j });
            }
            ys[j].scale(1.0 / nrm);
            zs[j].scale(1.0 / nrm);
        }
        let mut max_change: f64 = 0.0;
        for j in 0..n {
            let r = ctx.inner(&ys[j], &zs[j]);
            let msd = (ctx.inner(&zs[j], &zs[j]) - r * r).max(0.0).sqrt();
            history[j].push(IterationRecord { p, eigenvalue: r, msd });
            if rayleigh[j].is_finite() {
                max_change = max_change.max((r - rayleigh[j]).abs());
            } else {
                max_change = f64::INFINITY;
            }
            rayleigh[j] = r;
        }
        members = ys;
        images = zs;
        if max_change < tol {
            converged = true;
            break;
        }
    }
    let _ = &images;
    let wall = start.elapsed();
    Ok((0..n)
        .map(|j| SolveReport {
            method: format!("block[{j}]"),
            converged,
            eigenvalue: rayleigh[j],
            iterations: history[j].clone(),
            psi: ctx.to_physical(&members[j]),
            wall,
            engine: ctx.grid_descriptor(),
            final_state: None,
            final_lanczos: None,
        })
        .collect())
}

/// Dense Rayleigh-Ritz: diagonalize the spectral matrix and convert the k
/// largest inverse-operator eigenvalues to Helmholtz eigenvalues, ascending.
pub fn rr_matrix_solve(
    ctx: &OperatorContext,
    n_basis: usize,
    engine: SpectralEngine,
    k: usize,
) -> Result<Vec<(f64, DVector<f64>)>> {
    if k == 0 || k > n_basis {
        return Err(Error::Config(format!("requested {k} modes from a basis of {n_basis}")));
    }
    let m = build_spectral_matrix(ctx, n_basis, engine)?;
    Ok(dense_modes(&m, k))
}

/// The k largest-eigenvalue pairs of an assembled matrix, converted to
/// Helmholtz eigenvalues (ascending).
pub fn dense_modes(m: &SpectralMatrix, k: usize) -> Vec<(f64, DVector<f64>)> {
    let eig = SymmetricEigen::new(m.entries.clone());
    let mut idx: Vec<usize> = (0..m.n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    idx.truncate(k);
    idx.iter()
        .map(|&i| (1.0 / eig.eigenvalues[i], eig.eigenvectors.column(i).into_owned()))
        .collect()
}

/// Dominant eigenpair of a spectral matrix by the power method, with
/// deflation against previously found eigenvectors. Returns the matrix
/// eigenvalue (the inverse-operator one) and the normalized vector.
pub fn matrix_power_method(
    matrix: &SpectralMatrix,
    trial: &DVector<f64>,
    deflate_against: &[DVector<f64>],
    p_max: usize,
    tol: f64,
) -> Result<(f64, DVector<f64>)> {
    let deflate = |v: &mut DVector<f64>| {
        for d in deflate_against {
            let c = d.dot(v);
            v.axpy(-c, d, 1.0);
        }
    };
    let mut x = trial.clone();
    deflate(&mut x);
    let n = x.norm();
    if n < NORM_FLOOR {
        return Err(Error::LostOverlap);
    }
    x /= n;
    let mut lambda_prev = f64::NAN;
    for _ in 0..p_max {
        let mut y = &matrix.entries * &x;
        deflate(&mut y);
        let lambda = x.dot(&y);
        let yn = y.norm();
        if yn < NORM_FLOOR {
            return Err(Error::LostOverlap);
        }
        x = y / yn;
        if (lambda - lambda_prev).abs() < tol * lambda.abs().max(1.0) {
            return Ok((lambda, x));
        }
        lambda_prev = lambda;
    }
    Err(Error::NoConvergence { iterations: p_max })
}

/// Round-off-proof check that a sequence never increases beyond `slack`.
pub fn is_nonincreasing(seq: &[f64], slack: f64) -> bool {
    seq.windows(2).all(|w| w[1] <= w[0] + slack)
}

/// Matrix counterpart of [`is_nonincreasing`] for ascent sequences.
pub fn is_nondecreasing(seq: &[f64], slack: f64) -> bool {
    seq.windows(2).all(|w| w[1] >= w[0] - slack)
}
