//! Lower bounds for the `k`-vector `p`-summing norm
//!
//! ```text
//! π_p^(k)(u) = sup { (Σ_{i≤k} ‖u x_i‖^p)^{1/p} : weak_p(x_1, …, x_k) ≤ 1 }.
//! ```
//!
//! The ratio `F(X) = Σ_i ‖u x_i‖^p / weak_p(X)^p` is invariant under scaling
//! the whole system `X = (x_1 … x_k)`, so it is maximized over the unit
//! sphere of `d×k` matrices and the maximizer is rescaled to weak norm 1.
//! The weak norm is a maximum of `h_a(X) = Σ_i |a(x_i)|^p` over dual
//! functionals `a`; the search replaces the maximum by the soft maximum
//! `(Σ_a h_a^s)^{1/s}` and raises `s` in stages. The dual family is
//!
//! * the point evaluations of a sup-normed domain (exact);
//! * the eigenvectors of `XXᵀ` for a Euclidean domain at `p = 2` (exact);
//! * otherwise a growing active set: after each stage the maximizers found
//!   by the weak-norm search on the current `X` that beat every active
//!   functional are added, and stages repeat until none are found.
//!
//! Every candidate is scored with the full weak norm, so reported values are
//! attained by the returned witnesses.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measure::{
    check_finite_exponent, lp_norm, pow_abs, weak_lp_norm, weak_lp_norm_detail, DomainNorm,
    VectorSystem, WeakNorm, WeakNormOptions, WeightedSpace,
};
use crate::rng;
use crate::sphere::{self, AscentOptions};

pub const DEFAULT_RESTARTS: usize = 32;
pub const DEFAULT_STEPS: usize = 2000;
pub const DEFAULT_EXCHANGE_ROUNDS: usize = 4;
/// Relative gap between the best and the median restart above which an
/// estimate is flagged.
pub const SPREAD_FLAG: f64 = 0.05;
/// Soft-maximum exponents, in order.
const SOFTMAX_SCHEDULE: [f64; 7] = [2.0, 8.0, 32.0, 128.0, 512.0, 2048.0, 8192.0];
const DUALS_PER_ROUND: usize = 4;
const WEAK_STARTS_FROM_ACTIVE: usize = 8;
const BRUTEFORCE_GRID_CAP: usize = 4_000_000;

/// A linear map from a normed domain of dimension `d` into `L_r(target)`,
/// acting on domain coordinates by `matrix` (`target.size() × d`).
#[derive(Debug, Clone)]
pub struct FiniteRankOperator {
    matrix: DMatrix<f64>,
    domain: DomainNorm,
    target: WeightedSpace,
    p: f64,
}

impl FiniteRankOperator {
    pub fn new(
        matrix: DMatrix<f64>,
        domain: DomainNorm,
        target: WeightedSpace,
        p: f64,
    ) -> Result<Self> {
        check_finite_exponent(p)?;
        if matrix.ncols() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                found: matrix.ncols(),
            });
        }
        if matrix.nrows() != target.size() {
            return Err(Error::DimensionMismatch {
                expected: target.size(),
                found: matrix.nrows(),
            });
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("operator entries must be finite"));
        }
        Ok(FiniteRankOperator {
            matrix,
            domain,
            target,
            p,
        })
    }

    /// `ℓ_2^d → ℓ_2^m` given by `matrix`, realized on the uniform measure of
    /// `m` atoms (the matrix is scaled by `√m`).
    pub fn into_euclidean(matrix: DMatrix<f64>) -> Result<Self> {
        let (m, d) = matrix.shape();
        if m == 0 || d == 0 {
            return Err(Error::invalid("operator matrix must be nonempty"));
        }
        let scaled = matrix * (m as f64).sqrt();
        Self::new(
            scaled,
            DomainNorm::EuclideanBall { dim: d },
            WeightedSpace::uniform(m),
            2.0,
        )
    }

    /// Identity of `ℓ_2^n`.
    pub fn hilbert_identity(n: usize) -> Result<Self> {
        Self::into_euclidean(DMatrix::identity(n, n))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn domain(&self) -> &DomainNorm {
        &self.domain
    }

    pub fn target(&self) -> &WeightedSpace {
        &self.target
    }

    /// Exponent of the target space.
    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn scaled(&self, c: f64) -> Self {
        FiniteRankOperator {
            matrix: &self.matrix * c,
            ..self.clone()
        }
    }

    /// `‖u x‖` in the target.
    pub fn image_norm(&self, x: &DVector<f64>) -> f64 {
        let z = &self.matrix * x;
        lp_norm(z.as_slice(), &self.target, self.p).expect("validated operator")
    }

    /// `(Σ_i ‖u x_i‖^p)^{1/p}` over the columns of `x`.
    pub fn summing_value(&self, x: &DMatrix<f64>, p: f64) -> f64 {
        let s: f64 = x
            .column_iter()
            .map(|c| self.image_norm(&c.into_owned()).powf(p))
            .sum();
        s.powf(1.0 / p)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SummingOptions {
    pub restarts: usize,
    /// Ascent steps per exchange round, spread over the soft-max stages.
    pub steps: usize,
    pub exchange_rounds: usize,
}

impl Default for SummingOptions {
    fn default() -> Self {
        SummingOptions {
            restarts: DEFAULT_RESTARTS,
            steps: DEFAULT_STEPS,
            exchange_rounds: DEFAULT_EXCHANGE_ROUNDS,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SummingEstimate {
    pub value: f64,
    pub k: usize,
    /// A system of weak norm 1 attaining `value`.
    pub witnesses: VectorSystem,
    pub restarts_used: usize,
    /// `weak_lp_norm(witnesses) − 1`.
    pub constraint_residual: f64,
    /// `(best − median) / best` over the restarts.
    pub spread: f64,
    pub flagged: bool,
}

/// Lower bound on `π_p^(k)(u)` with default step and exchange budgets.
pub fn pi_pk_lower(
    u: &FiniteRankOperator,
    k: usize,
    p: f64,
    restarts: usize,
    seed: u64,
) -> Result<SummingEstimate> {
    let opts = SummingOptions {
        restarts,
        ..SummingOptions::default()
    };
    pi_pk_lower_with(u, k, p, &opts, seed, None)
}

/// [`pi_pk_lower`] with explicit options and an optional estimate at a
/// smaller `k` to warm-start from. The result is never below `warm.value`.
pub fn pi_pk_lower_with(
    u: &FiniteRankOperator,
    k: usize,
    p: f64,
    opts: &SummingOptions,
    seed: u64,
    warm: Option<&SummingEstimate>,
) -> Result<SummingEstimate> {
    check_finite_exponent(p)?;
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if let Some(w) = warm {
        if w.k > k || w.witnesses.dim() != u.dim() {
            return Err(Error::invalid(
                "warm start must come from a smaller k on the same operator",
            ));
        }
    }
    let d = u.dim();
    let search = Search::new(u, p, opts);

    let mut starts = Vec::with_capacity(opts.restarts + 2);
    if let Some(w) = warm {
        starts.push(pad_warm(w.witnesses.matrix(), k, seed));
    }
    starts.push(DMatrix::from_fn(
        d,
        k,
        |i, j| if i == j % d { 1.0 } else { 0.0 },
    ));
    let mut r = rng::rng(seed);
    while starts.len() < opts.restarts.max(1) + usize::from(warm.is_some()) {
        starts.push(rng::gaussian_matrix(&mut r, d, k));
    }

    let runs: Vec<Result<(f64, DMatrix<f64>)>> =
        starts.into_par_iter().map(|x0| search.run(x0)).collect();
    let mut runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let restarts_used = runs.len();

    let mut values: Vec<f64> = runs.iter().map(|r| r.0).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    let best_value = values[0];
    let median = values[values.len() / 2];
    let spread = if best_value > 0.0 {
        (best_value - median) / best_value
    } else {
        0.0
    };
    let best_index = runs
        .iter()
        .position(|r| r.0 == best_value)
        .expect("best value comes from a run");
    let (_, witnesses) = runs.swap_remove(best_index);

    if let Some(w) = warm {
        if best_value < w.value {
            let mut padded = DMatrix::zeros(d, k);
            padded.columns_mut(0, w.k).copy_from(w.witnesses.matrix());
            return Ok(SummingEstimate {
                value: w.value,
                k,
                witnesses: VectorSystem::new(padded)?,
                restarts_used,
                constraint_residual: w.constraint_residual,
                spread,
                flagged: spread > SPREAD_FLAG,
            });
        }
    }

    let witnesses = VectorSystem::new(witnesses)?;
    let value = u.summing_value(witnesses.matrix(), p);
    let constraint_residual = weak_lp_norm(&witnesses, u.domain(), p)? - 1.0;
    Ok(SummingEstimate {
        value,
        k,
        witnesses,
        restarts_used,
        constraint_residual,
        spread,
        flagged: spread > SPREAD_FLAG,
    })
}

/// Previous witnesses with small random columns appended.
fn pad_warm(prev: &DMatrix<f64>, k: usize, seed: u64) -> DMatrix<f64> {
    let (d, kp) = prev.shape();
    let scale = 1e-3 * prev.norm() / (kp as f64).sqrt();
    let mut r = rng::rng(rng::derive_seed(seed, u64::MAX));
    let mut x = DMatrix::zeros(d, k);
    x.columns_mut(0, kp).copy_from(prev);
    for j in kp..k {
        for i in 0..d {
            x[(i, j)] = scale * r.sample::<f64, _>(rand_distr::StandardNormal);
        }
    }
    x
}

enum DualFamily {
    /// Rows are dual functionals.
    Rows(DMatrix<f64>),
    /// Eigenvectors of `XXᵀ`, for `p = 2` on a Euclidean domain.
    Spectral,
}

struct Search<'a> {
    u: &'a FiniteRankOperator,
    p: f64,
    opts: &'a SummingOptions,
}

impl<'a> Search<'a> {
    fn new(u: &'a FiniteRankOperator, p: f64, opts: &'a SummingOptions) -> Self {
        Search { u, p, opts }
    }

    fn shape(&self, v: &DVector<f64>) -> DMatrix<f64> {
        let d = self.u.dim();
        DMatrix::from_column_slice(d, v.len() / d, v.as_slice())
    }

    /// `Σ_i ‖u x_i‖_r^p` and its gradient.
    fn image_sum(&self, x: &DMatrix<f64>) -> (f64, DMatrix<f64>) {
        let (r, p) = (self.u.p, self.p);
        let w = self.u.target.weights();
        let z = &self.u.matrix * x;
        let mut total = 0.0;
        let mut y = DMatrix::zeros(z.nrows(), z.ncols());
        for (i, col) in z.column_iter().enumerate() {
            let nr: f64 = col.iter().zip(w).map(|(v, wi)| wi * pow_abs(*v, r)).sum();
            if nr <= 0.0 {
                continue;
            }
            let norm = nr.powf(1.0 / r);
            total += norm.powf(p);
            let c = p * norm.powf(p - r);
            for (o, v) in col.iter().enumerate() {
                y[(o, i)] = c * w[o] * pow_abs(*v, r - 1.0) * v.signum();
            }
        }
        (total, self.u.matrix.tr_mul(&y))
    }

    /// `ln (Σ_a h_a^s)^{1/s}` and its gradient, where `h_a ≈ weak_p(X)^p`.
    fn log_soft_weak(&self, x: &DMatrix<f64>, duals: &DualFamily, s: f64) -> (f64, DMatrix<f64>) {
        let p = self.p;
        match duals {
            DualFamily::Rows(b) => {
                let v = b * x;
                let h: Vec<f64> = v
                    .row_iter()
                    .map(|row| row.iter().map(|t| pow_abs(*t, p)).sum())
                    .collect();
                let (lse, pi) = soft_weights(&h, s);
                let mut q = DMatrix::zeros(v.nrows(), v.ncols());
                for (j, hj) in h.iter().enumerate() {
                    if pi[j] == 0.0 || *hj <= 0.0 {
                        continue;
                    }
                    let c = pi[j] / hj * p;
                    for i in 0..v.ncols() {
                        let t = v[(j, i)];
                        q[(j, i)] = c * pow_abs(t, p - 1.0) * t.signum();
                    }
                }
                (lse, b.tr_mul(&q))
            }
            DualFamily::Spectral => {
                let eig = (x * x.transpose()).symmetric_eigen();
                let h: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(0.0)).collect();
                let (lse, pi) = soft_weights(&h, s);
                let mut g = DMatrix::zeros(x.nrows(), x.nrows());
                for (j, hj) in h.iter().enumerate() {
                    if pi[j] == 0.0 || *hj <= 0.0 {
                        continue;
                    }
                    let vj = eig.eigenvectors.column(j);
                    g += vj * vj.transpose() * (2.0 * pi[j] / hj);
                }
                (lse, g * x)
            }
        }
    }

    fn log_ratio(&self, v: &DVector<f64>, duals: &DualFamily, s: f64) -> (f64, DVector<f64>) {
        let x = self.shape(v);
        let (total, gs) = self.image_sum(&x);
        if total <= 0.0 {
            return (f64::NEG_INFINITY, DVector::zeros(v.len()));
        }
        let (lh, gh) = self.log_soft_weak(&x, duals, s);
        if !lh.is_finite() {
            return (f64::NEG_INFINITY, DVector::zeros(v.len()));
        }
        let g = gs / total - gh;
        (total.ln() - lh, DVector::from_column_slice(g.as_slice()))
    }

    fn weak(&self, x: &DMatrix<f64>, duals: &DualFamily) -> Result<WeakNorm> {
        let sys = VectorSystem::new(x.clone())?;
        // The search always includes the default starts, so the result is
        // never below `weak_lp_norm`; active functionals only add starts.
        let starts: Vec<DVector<f64>> = match duals {
            DualFamily::Rows(b) if matches!(self.u.domain, DomainNorm::EuclideanBall { .. }) => {
                let v = b * x;
                let mut scored: Vec<(f64, usize)> = v
                    .row_iter()
                    .enumerate()
                    .map(|(j, row)| (row.iter().map(|t| pow_abs(*t, self.p)).sum(), j))
                    .collect();
                scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
                scored
                    .iter()
                    .take(WEAK_STARTS_FROM_ACTIVE)
                    .map(|&(_, j)| b.row(j).transpose())
                    .collect()
            }
            _ => Vec::new(),
        };
        weak_lp_norm_detail(
            &sys,
            &self.u.domain,
            self.p,
            &WeakNormOptions::default(),
            &starts,
        )
    }

    /// Attained value and the candidate rescaled to weak norm 1.
    fn score(&self, x: &DMatrix<f64>, weak: &WeakNorm) -> Option<(f64, DMatrix<f64>)> {
        if !(weak.value > 0.0) {
            return None;
        }
        let scaled = x / weak.value;
        Some((self.u.summing_value(&scaled, self.p), scaled))
    }

    fn run(&self, x0: DMatrix<f64>) -> Result<(f64, DMatrix<f64>)> {
        let d = self.u.dim();
        let exchange = matches!(self.u.domain, DomainNorm::EuclideanBall { .. }) && self.p != 2.0;
        let mut duals = match &self.u.domain {
            DomainNorm::SupOnPoints(sub) => DualFamily::Rows(sub.basis().clone()),
            DomainNorm::EuclideanBall { .. } if self.p == 2.0 => DualFamily::Spectral,
            DomainNorm::EuclideanBall { .. } => {
                let mut rows: Vec<DVector<f64>> = (0..d)
                    .map(|i| DVector::from_fn(d, |j, _| f64::from(u8::from(i == j))))
                    .collect();
                rows.extend(
                    x0.column_iter()
                        .filter(|c| c.norm() > 0.0)
                        .map(|c| c.normalize()),
                );
                DualFamily::Rows(stack_rows(&rows))
            }
        };
        let ascent = AscentOptions {
            max_steps: (self.opts.steps / SOFTMAX_SCHEDULE.len()).max(1),
            ..AscentOptions::default()
        };

        let mut best = self.score(&x0, &self.weak(&x0, &duals)?);
        let mut v = DVector::from_column_slice(x0.as_slice());
        let rounds = if exchange {
            self.opts.exchange_rounds.max(1)
        } else {
            1
        };
        for _ in 0..rounds {
            let mut added = false;
            for &s in &SOFTMAX_SCHEDULE {
                v = sphere::ascend(v, |c| self.log_ratio(c, &duals, s), &ascent).point;
                let x = self.shape(&v);
                let weak = self.weak(&x, &duals)?;
                if let Some(c) = self.score(&x, &weak) {
                    if best.as_ref().is_none_or(|b| c.0 > b.0) {
                        best = Some(c);
                    }
                }
                if !exchange {
                    continue;
                }
                // Add the dual maximizers the active set does not yet dominate.
                let DualFamily::Rows(b) = &duals else {
                    unreachable!()
                };
                let h =
                    |a: &DVector<f64>| x.tr_mul(a).iter().map(|t| pow_abs(*t, self.p)).sum::<f64>();
                let active = b.row_iter().map(|r| h(&r.transpose())).fold(0.0, f64::max);
                let mut rows: Vec<DVector<f64>> = b.row_iter().map(|r| r.transpose()).collect();
                let before = rows.len();
                rows.extend(
                    weak.local_maxima
                        .into_iter()
                        .filter(|a| h(a) > active * (1.0 + 1e-9))
                        .take(DUALS_PER_ROUND),
                );
                if rows.len() > before {
                    added = true;
                    duals = DualFamily::Rows(stack_rows(&rows));
                }
            }
            if !added {
                break;
            }
        }
        Ok(best.unwrap_or_else(|| (0.0, DMatrix::zeros(d, x0.ncols()))))
    }
}

fn stack_rows(rows: &[DVector<f64>]) -> DMatrix<f64> {
    let d = rows[0].len();
    DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j])
}

/// `ln (Σ h_j^s)^{1/s}` and the soft-max weights `h_j^s / Σ h^s`.
fn soft_weights(h: &[f64], s: f64) -> (f64, Vec<f64>) {
    let hmax = h.iter().cloned().fold(0.0, f64::max);
    if hmax <= 0.0 {
        return (f64::NEG_INFINITY, vec![0.0; h.len()]);
    }
    let e: Vec<f64> = h.iter().map(|v| (v / hmax).powf(s)).collect();
    let total: f64 = e.iter().sum();
    (
        hmax.ln() + total.ln() / s,
        e.into_iter().map(|v| v / total).collect(),
    )
}

/// Exact `π_2` of an operator on a Euclidean domain: the Hilbert-Schmidt norm
/// of its matrix into `L_2` of the target.
pub fn hilbert_pi2_exact(u: &FiniteRankOperator) -> Result<f64> {
    if !matches!(u.domain, DomainNorm::EuclideanBall { .. }) {
        return Err(Error::invalid("exact pi_2 needs a Euclidean domain"));
    }
    if u.p != 2.0 {
        return Err(Error::invalid("exact pi_2 needs an L_2 target"));
    }
    let w = u.target.weights();
    let sum: f64 = u
        .matrix
        .row_iter()
        .zip(w)
        .map(|(row, wi)| wi * row.norm_squared())
        .sum();
    Ok(sum.sqrt())
}

/// Exhaustive search over a grid in hyperspherical coordinates of the unit
/// sphere of `d×k` systems (`resolution` points per angle), followed by
/// random local refinement. The weak norm is computed independently of
/// [`weak_lp_norm`] from a dense grid of dual directions.
pub fn pi_pk_bruteforce(
    u: &FiniteRankOperator,
    k: usize,
    p: f64,
    resolution: usize,
) -> Result<f64> {
    check_finite_exponent(p)?;
    let d = u.dim();
    if d > 3 || k == 0 || k > 3 {
        return Err(Error::invalid(
            "brute force needs domain dimension ≤ 3 and 1 ≤ k ≤ 3",
        ));
    }
    if resolution == 0 {
        return Err(Error::invalid("resolution must be positive"));
    }
    let dims = d * k;
    let angles = dims - 1;
    let total = (resolution as f64).powi(angles as i32);
    if total > BRUTEFORCE_GRID_CAP as f64 {
        return Err(Error::invalid(format!(
            "grid of {total} points exceeds the cap"
        )));
    }
    let dual_grid = dual_directions(d);
    let ratio = |v: &DVector<f64>| -> f64 {
        let x = DMatrix::from_column_slice(d, k, v.as_slice());
        let w = grid_weak_norm(&x, u.domain(), p, &dual_grid);
        if w > 0.0 {
            u.summing_value(&x, p) / w
        } else {
            0.0
        }
    };

    let mut top: Vec<(f64, DVector<f64>)> = Vec::new();
    let mut idx = vec![0usize; angles];
    for _ in 0..total as usize {
        let phi: Vec<f64> = idx
            .iter()
            .map(|&i| std::f64::consts::PI * (i as f64 + 0.5) / resolution as f64)
            .collect();
        let v = hyperspherical(&phi, dims);
        let val = ratio(&v);
        if top.len() < 8 || val > top[top.len() - 1].0 {
            top.push((val, v));
            top.sort_by(|a, b| b.0.total_cmp(&a.0));
            top.truncate(8);
        }
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < resolution {
                break;
            }
            *slot = 0;
        }
    }

    let mut r = rng::rng(0);
    let mut best = top[0].0;
    for (mut val, mut v) in top {
        let mut sigma = std::f64::consts::PI / resolution as f64;
        for _ in 0..400 {
            let cand = sphere::normalized(&v + rng::gaussian_vector(&mut r, dims) * sigma);
            let cv = ratio(&cand);
            if cv > val {
                val = cv;
                v = cand;
            } else {
                sigma *= 0.98;
            }
        }
        best = best.max(val);
    }
    Ok(best)
}

fn hyperspherical(phi: &[f64], dims: usize) -> DVector<f64> {
    let mut v = DVector::zeros(dims);
    let mut sin_prod = 1.0;
    for (j, a) in phi.iter().enumerate() {
        v[j] = sin_prod * a.cos();
        sin_prod *= a.sin();
    }
    v[dims - 1] = sin_prod;
    v
}

/// Unit directions covering half of the sphere of `ℓ_2^d`, `d ≤ 3`.
fn dual_directions(d: usize) -> Vec<DVector<f64>> {
    match d {
        1 => vec![DVector::from_element(1, 1.0)],
        2 => (0..2048)
            .map(|j| {
                let t = std::f64::consts::PI * j as f64 / 2048.0;
                DVector::from_vec(vec![t.cos(), t.sin()])
            })
            .collect(),
        _ => {
            // Fibonacci lattice on the upper hemisphere.
            let n = 8000;
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|j| {
                    let z = (j as f64 + 0.5) / n as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let t = golden * j as f64;
                    DVector::from_vec(vec![rho * t.cos(), rho * t.sin(), z])
                })
                .collect()
        }
    }
}

fn grid_weak_norm(x: &DMatrix<f64>, dom: &DomainNorm, p: f64, grid: &[DVector<f64>]) -> f64 {
    let h = |a: &DVector<f64>| -> f64 { x.tr_mul(a).iter().map(|t| t.abs().powf(p)).sum() };
    match dom {
        DomainNorm::SupOnPoints(sub) => (sub.basis() * x)
            .row_iter()
            .map(|row| row.iter().map(|t| t.abs().powf(p)).sum::<f64>())
            .fold(0.0, f64::max)
            .powf(1.0 / p),
        DomainNorm::EuclideanBall { .. } => {
            let (mut best, mut at) = (f64::NEG_INFINITY, grid[0].clone());
            for a in grid {
                let v = h(a);
                if v > best {
                    best = v;
                    at = a.clone();
                }
            }
            // Coordinate-free local polish around the best grid direction.
            let mut step = 0.02;
            while step > 1e-9 {
                let mut improved = false;
                for i in 0..at.len() {
                    for sgn in [1.0, -1.0] {
                        let mut cand = at.clone();
                        cand[i] += sgn * step;
                        let cand = sphere::normalized(cand);
                        let v = h(&cand);
                        if v > best {
                            best = v;
                            at = cand;
                            improved = true;
                        }
                    }
                }
                if !improved {
                    step *= 0.5;
                }
            }
            best.powf(1.0 / p)
        }
    }
}

/// [`pi_pk_lower_with`] along increasing `ks`, each run warm-started from the
/// previous witnesses, so the values are nondecreasing.
pub fn saturation_curve(
    u: &FiniteRankOperator,
    ks: &[usize],
    p: f64,
    opts: &SummingOptions,
    seed: u64,
) -> Result<Vec<SummingEstimate>> {
    if ks.is_empty() || ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(
            "ks must be nonempty and strictly increasing",
        ));
    }
    let mut out: Vec<SummingEstimate> = Vec::with_capacity(ks.len());
    for (i, &k) in ks.iter().enumerate() {
        let est = pi_pk_lower_with(u, k, p, opts, rng::derive_seed(seed, i as u64), out.last())?;
        out.push(est);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Subspace;

    fn quick() -> SummingOptions {
        SummingOptions {
            restarts: 8,
            steps: 700,
            exchange_rounds: 3,
        }
    }

    fn diag(entries: &[f64]) -> FiniteRankOperator {
        FiniteRankOperator::into_euclidean(DMatrix::from_diagonal(&DVector::from_column_slice(
            entries,
        )))
        .unwrap()
    }

    fn check_witnesses(u: &FiniteRankOperator, est: &SummingEstimate, p: f64) {
        let w = weak_lp_norm(&est.witnesses, u.domain(), p).unwrap();
        assert!(w <= 1.0 + 1e-8, "weak norm {w}");
        let v = u.summing_value(est.witnesses.matrix(), p);
        assert!((v - est.value).abs() <= 1e-10 * est.value.max(1.0));
    }

    #[test]
    fn euclidean_operator_norms() {
        let u = diag(&[3.0, 4.0]);
        let x = DVector::from_vec(vec![0.6, 0.8]);
        assert!((u.image_norm(&x) - (1.8f64.powi(2) + 3.2f64.powi(2)).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn operator_validation() {
        let dom = DomainNorm::EuclideanBall { dim: 2 };
        let bad = FiniteRankOperator::new(
            DMatrix::zeros(3, 3),
            dom.clone(),
            WeightedSpace::uniform(3),
            2.0,
        );
        assert!(matches!(bad, Err(Error::DimensionMismatch { .. })));
        let bad =
            FiniteRankOperator::new(DMatrix::zeros(3, 2), dom, WeightedSpace::uniform(3), 0.5);
        assert!(bad.is_err());
    }

    #[test]
    fn k1_is_operator_norm() {
        let u = diag(&[3.0, 1.0]);
        let est = pi_pk_lower(&u, 1, 2.0, 8, 0).unwrap();
        assert!((est.value - 3.0).abs() < 1e-9, "{}", est.value);
        check_witnesses(&u, &est, 2.0);
    }

    #[test]
    fn identity_plane_p2() {
        let u = FiniteRankOperator::hilbert_identity(2).unwrap();
        let est = pi_pk_lower_with(&u, 2, 2.0, &quick(), 1, None).unwrap();
        assert!((est.value - 2f64.sqrt()).abs() < 1e-6, "{}", est.value);
        check_witnesses(&u, &est, 2.0);
    }

    #[test]
    fn identity_p4_below_k_root() {
        for n in [2, 3] {
            let u = FiniteRankOperator::hilbert_identity(n).unwrap();
            for k in [1, 2, 5] {
                let est = pi_pk_lower_with(&u, k, 4.0, &quick(), 3, None).unwrap();
                assert!(
                    est.value <= (k as f64).powf(0.25) * (1.0 + 1e-6),
                    "n={n} k={k}: {}",
                    est.value
                );
                check_witnesses(&u, &est, 4.0);
            }
        }
    }

    #[test]
    fn hilbert_schmidt_examples() {
        assert!((hilbert_pi2_exact(&diag(&[3.0, 4.0])).unwrap() - 5.0).abs() < 1e-12);
        for n in 1..5 {
            let u = FiniteRankOperator::hilbert_identity(n).unwrap();
            assert!((hilbert_pi2_exact(&u).unwrap() - (n as f64).sqrt()).abs() < 1e-12);
        }
        assert_eq!(hilbert_pi2_exact(&diag(&[0.0, 0.0])).unwrap(), 0.0);
    }

    #[test]
    fn zero_operator_has_zero_value() {
        let est = pi_pk_lower_with(&diag(&[0.0, 0.0]), 2, 2.0, &quick(), 0, None).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn p2_matches_hilbert_schmidt() {
        let mut r = rng::rng(11);
        for d in 2..=4 {
            let m = rng::gaussian_matrix(&mut r, d + 1, d);
            let u = FiniteRankOperator::into_euclidean(m).unwrap();
            let exact = hilbert_pi2_exact(&u).unwrap();
            let est = pi_pk_lower_with(&u, d, 2.0, &quick(), 5, None).unwrap();
            assert!(est.value <= exact * (1.0 + 1e-9));
            assert!(est.value >= exact * 0.98, "d={d}: {} vs {exact}", est.value);
        }
    }

    #[test]
    fn scaling_equivariance() {
        let mut r = rng::rng(2);
        let u = FiniteRankOperator::into_euclidean(rng::gaussian_matrix(&mut r, 3, 2)).unwrap();
        let a = pi_pk_lower_with(&u, 2, 3.0, &quick(), 9, None).unwrap();
        let b = pi_pk_lower_with(&u.scaled(-2.5), 2, 3.0, &quick(), 9, None).unwrap();
        // Rounding differs between the two runs, so the ascent paths agree
        // only approximately.
        assert!(
            (b.value - 2.5 * a.value).abs() < 1e-4 * b.value,
            "{} vs {}",
            b.value,
            a.value
        );
    }

    #[test]
    fn bruteforce_examples() {
        let u = diag(&[3.0, 1.0]);
        let bf = pi_pk_bruteforce(&u, 1, 2.0, 64).unwrap();
        assert!((bf - 3.0).abs() < 1e-3);
        let id = FiniteRankOperator::hilbert_identity(2).unwrap();
        let bf = pi_pk_bruteforce(&id, 2, 2.0, 24).unwrap();
        assert!((bf - 2f64.sqrt()).abs() < 1e-2, "{bf}");
        assert!(
            pi_pk_bruteforce(&FiniteRankOperator::hilbert_identity(4).unwrap(), 1, 2.0, 4).is_err()
        );
        assert!(pi_pk_bruteforce(&id, 4, 2.0, 4).is_err());
    }

    #[test]
    fn bruteforce_agrees_on_random_plane_operators() {
        let mut r = rng::rng(21);
        for trial in 0..4 {
            let u = FiniteRankOperator::into_euclidean(rng::gaussian_matrix(&mut r, 2, 2)).unwrap();
            let p = [1.5, 3.0][trial % 2];
            let bf = pi_pk_bruteforce(&u, 2, p, 24).unwrap();
            let est =
                pi_pk_lower_with(&u, 2, p, &SummingOptions::default(), trial as u64, None).unwrap();
            assert!(
                bf <= est.value * (1.0 + 1e-2),
                "p={p}: bruteforce {bf} vs {}",
                est.value
            );
            assert!(
                est.value <= bf * (1.0 + 1e-2),
                "p={p}: {} vs bruteforce {bf}",
                est.value
            );
        }
    }

    #[test]
    fn curve_is_monotone_and_saturates_at_p2() {
        let u = FiniteRankOperator::hilbert_identity(3).unwrap();
        let curve = saturation_curve(&u, &[1, 2, 3, 4, 6], 2.0, &quick(), 4).unwrap();
        for w in curve.windows(2) {
            assert!(w[1].value >= w[0].value - 1e-12);
        }
        for est in &curve[2..] {
            assert!(
                (est.value - 3f64.sqrt()).abs() < 1e-3,
                "k={}: {}",
                est.k,
                est.value
            );
        }
        assert!(saturation_curve(&u, &[2, 2], 2.0, &quick(), 0).is_err());
    }

    #[test]
    fn rank_one_curve_is_flat() {
        let u = FiniteRankOperator::hilbert_identity(1).unwrap();
        let curve = saturation_curve(&u, &[1, 2, 4], 3.0, &quick(), 0).unwrap();
        for est in curve {
            assert!((est.value - 1.0).abs() < 1e-9, "{}", est.value);
        }
    }

    #[test]
    fn sup_domain_rank_one() {
        let space = WeightedSpace::uniform(4);
        let sub = Subspace::new(
            space.clone(),
            DMatrix::from_column_slice(4, 1, &[1.0, -1.0, -1.0, 1.0]),
        )
        .unwrap();
        let u = FiniteRankOperator::new(
            sub.basis().clone(),
            DomainNorm::SupOnPoints(sub),
            space,
            1.5,
        )
        .unwrap();
        let est = pi_pk_lower_with(&u, 3, 1.5, &quick(), 0, None).unwrap();
        assert!((est.value - 1.0).abs() < 1e-9);
        check_witnesses(&u, &est, 1.5);
    }
}
