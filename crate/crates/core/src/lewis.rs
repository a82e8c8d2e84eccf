//! Lewis change of density and the blended density `α = (β + 1)/2`.
//!
//! For an `n`-dimensional subspace `X ⊂ L_p(μ)` the Lewis density `β` is the
//! density for which `Y = {x / β^{1/p}}` has a basis `f_1..f_n`, orthonormal in
//! `L_2(β dμ)`, with `Σ_i f_i(ω)² = n` at every atom. It is computed here by a
//! fixed-point iteration on the atom masses `v = β·μ`:
//!
//! ```text
//! G  = Σ_ω v_ω β_ω^{-2/p} b_ω b_ωᵀ          (Gram matrix of b/β^{1/p} under v)
//! v' ∝ μ_ω (b_ωᵀ G⁻¹ b_ω)^{p/2}
//! ```
//!
//! which is a contraction for `p < 4`; for larger `p` the update is damped
//! geometrically. Success is certified after the fact by the residual
//! `max_ω |Σ_i f_i(ω)² − n|`, so correctness never rests on the convergence
//! theory.

use nalgebra::{Cholesky, DMatrix, Dyn};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{check_finite_exponent, lp_pow, Density, Subspace, WeightedSpace};
use crate::rng;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, Copy)]
pub struct LewisOptions {
    /// Relative tolerance: success means residual ≤ `tol · n`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LewisOptions {
    fn default() -> Self {
        LewisOptions {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LewisResult {
    pub beta: Density,
    /// `size × n`; columns orthonormal in `L_2(β dμ)`.
    pub lewis_basis: DMatrix<f64>,
    /// `max_ω |Σ_i f_i(ω)² − n|`.
    pub residual: f64,
    pub iterations: usize,
}

/// Exponent applied to the fixed-point update.
fn damping(p: f64) -> f64 {
    if p < 4.0 {
        1.0
    } else if p < 8.0 {
        0.5
    } else {
        2.0 / p
    }
}

struct Evaluation {
    /// `b_ωᵀ G⁻¹ b_ω`.
    quad: Vec<f64>,
    basis: DMatrix<f64>,
    residual: f64,
}

/// Orthonormalizes `b/β^{1/p}` under the masses `v` and measures the Lewis residual.
fn evaluate(b: &DMatrix<f64>, mu: &[f64], v: &[f64], p: f64) -> Result<Evaluation> {
    let (size, n) = b.shape();
    let mut rescaled = b.clone();
    let mut sqrt_v_rescaled = b.clone();
    for i in 0..size {
        let beta = v[i] / mu[i];
        let s = beta.powf(-1.0 / p);
        let sv = v[i].sqrt() * s;
        for j in 0..n {
            rescaled[(i, j)] *= s;
            sqrt_v_rescaled[(i, j)] *= sv;
        }
    }
    let gram = sqrt_v_rescaled.tr_mul(&sqrt_v_rescaled);
    let chol = Cholesky::<f64, Dyn>::new(gram).ok_or_else(|| {
        Error::RankDeficient("weighted Gram matrix is not positive definite".into())
    })?;
    let l = chol.l();
    // f = rescaled · L^{-T}, i.e. fᵀ = L⁻¹ rescaledᵀ.
    let ft = l
        .solve_lower_triangular(&rescaled.transpose())
        .ok_or_else(|| Error::RankDeficient("singular Cholesky factor".into()))?;
    let basis = ft.transpose();
    let nf = n as f64;
    let mut quad = Vec::with_capacity(size);
    let mut residual = 0.0_f64;
    for i in 0..size {
        let sq: f64 = basis.row(i).iter().map(|x| x * x).sum();
        residual = residual.max((sq - nf).abs());
        // ‖f_ω‖² = β_ω^{-2/p} b_ωᵀ G⁻¹ b_ω
        quad.push(sq * (v[i] / mu[i]).powf(2.0 / p));
    }
    Ok(Evaluation {
        quad,
        basis,
        residual,
    })
}

/// Lewis density of `sub` in `L_p`, `1 < p < ∞`.
pub fn lewis_density(sub: &Subspace, p: f64, opts: &LewisOptions) -> Result<LewisResult> {
    check_finite_exponent(p)?;
    if p <= 1.0 {
        return Err(Error::invalid(format!(
            "Lewis densities need p > 1, got {p}"
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let mu = sub.space().weights();
    // Same span, better conditioned.
    let b = sub.l2_orthonormal_basis();
    let n = sub.dim() as f64;
    let lambda = damping(p);

    let mut v: Vec<f64> = mu.to_vec();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for iter in 0..=opts.max_iter {
        let eval = evaluate(&b, mu, &v, p)?;
        if best.as_ref().is_none_or(|(r, _)| eval.residual < *r) {
            best = Some((eval.residual, v.clone()));
        }
        if eval.residual <= opts.tol * n {
            let space = sub.space();
            let beta: Vec<f64> = v.iter().zip(mu).map(|(v, m)| v / m).collect();
            return Ok(LewisResult {
                beta: Density::normalized(beta, space)?,
                lewis_basis: eval.basis,
                residual: eval.residual,
                iterations: iter,
            });
        }
        if iter == opts.max_iter {
            break;
        }
        let mut next: Vec<f64> = eval
            .quad
            .iter()
            .zip(mu)
            .zip(&v)
            .map(|((q, m), old)| {
                let target = m * q.powf(p / 2.0);
                if lambda == 1.0 {
                    target
                } else {
                    old.powf(1.0 - lambda) * target.powf(lambda)
                }
            })
            .collect();
        let total: f64 = next.iter().sum();
        if !(total.is_finite() && total > 0.0) || next.iter().any(|x| !(*x > 0.0)) {
            break;
        }
        next.iter_mut().for_each(|x| *x /= total);
        v = next;
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        best_residual: best.map_or(f64::INFINITY, |b| b.0),
    })
}

/// `α = (β + 1)/2`. Every value exceeds 1/2.
pub fn blend_density(beta: &Density, space: &WeightedSpace) -> Result<Density> {
    let alpha: Vec<f64> = beta.values().iter().map(|b| (b + 1.0) / 2.0).collect();
    Density::new(alpha, space)
}

/// `(2n)^{1/p}` for `p < 2`, `(2n)^{1/2}` otherwise.
pub fn sup_bound(n: usize, p: f64) -> f64 {
    let two_n = 2.0 * n as f64;
    if p < 2.0 {
        two_n.powf(1.0 / p)
    } else {
        two_n.sqrt()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SupBoundReport {
    pub max_ratio: f64,
    pub bound: f64,
    pub samples: usize,
    pub violated: bool,
}

/// Largest observed `‖f‖_∞ / ‖f‖_{L_p}` over random elements of `sub_tilde`
/// and over the elements peaked at each atom, against [`sup_bound`].
///
/// `sub_tilde` is expected to be the image of a subspace under
/// [`crate::measure::change_density`] with the blended density.
pub fn verify_sup_bounds(
    sub_tilde: &Subspace,
    p: f64,
    samples: usize,
    seed: u64,
) -> Result<SupBoundReport> {
    check_finite_exponent(p)?;
    let q = sub_tilde.l2_orthonormal_basis();
    let w = sub_tilde.space().weights();
    let n = sub_tilde.dim();
    let ratio = |f: &nalgebra::DVector<f64>| {
        let lp = lp_pow(f.as_slice(), w, p).powf(1.0 / p);
        f.amax() / lp
    };
    let mut max_ratio = 0.0_f64;
    let mut r = rng::rng(seed);
    for _ in 0..samples {
        let c = rng::gaussian_vector(&mut r, n);
        max_ratio = max_ratio.max(ratio(&(&q * c)));
    }
    // The element of an L_2-orthonormal basis most concentrated at atom ω is
    // Σ_i q_i(ω) q_i; include those as deterministic probes.
    for i in 0..q.nrows() {
        let c = q.row(i).transpose();
        if c.norm() > 0.0 {
            max_ratio = max_ratio.max(ratio(&(&q * c)));
        }
    }
    let bound = sup_bound(n, p);
    Ok(SupBoundReport {
        max_ratio,
        bound,
        samples,
        violated: max_ratio > bound * (1.0 + 1e-9),
    })
}
