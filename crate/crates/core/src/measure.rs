//! Finite probability spaces, subspaces of functions on them, densities, and
//! the norms everything else is built from.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::rng;
use crate::sphere;

/// Tolerance on the total mass of a [`WeightedSpace`].
pub const MASS_TOL: f64 = 1e-12;
/// Tolerance on the integral of a [`Density`].
pub const DENSITY_TOL: f64 = 1e-10;
/// Relative singular-value floor for a basis to count as full rank.
pub const RANK_TOL: f64 = 1e-10;
/// `|t|^e`, by repeated multiplication when `e` is a small integer.
#[inline]
pub(crate) fn pow_abs(t: f64, e: f64) -> f64 {
    if e == e.trunc() && (0.0..=16.0).contains(&e) {
        t.abs().powi(e as i32)
    } else {
        t.abs().powf(e)
    }
}

/// Power iteration stops once a step moves the direction by less than this.
const POWER_MOVE_TOL: f64 = 1e-12;
/// Or once a step raises the objective by less than this fraction.
const POWER_GAIN_TOL: f64 = 1e-15;

/// Checks `p ∈ [1, ∞]`.
pub fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::invalid(format!(
            "exponent p must lie in [1, inf], got {p}"
        )));
    }
    Ok(())
}

/// Checks `p ∈ [1, ∞)`.
pub fn check_finite_exponent(p: f64) -> Result<()> {
    check_exponent(p)?;
    if p.is_infinite() {
        return Err(Error::invalid("exponent p must be finite here"));
    }
    Ok(())
}

/// A probability measure on `{0, .., size-1}` with strictly positive atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSpace {
    weights: Vec<f64>,
}

impl WeightedSpace {
    /// Strict constructor: every weight positive, total mass 1 within [`MASS_TOL`].
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Self::check_positive(&weights)?;
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::invalid(format!("weights sum to {total}, not 1")));
        }
        Ok(WeightedSpace { weights })
    }

    /// Positive weights rescaled to unit total mass.
    pub fn normalized(mut weights: Vec<f64>) -> Result<Self> {
        Self::check_positive(&weights)?;
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(WeightedSpace { weights })
    }

    pub fn uniform(size: usize) -> Self {
        assert!(size > 0, "a weighted space needs at least one atom");
        WeightedSpace {
            weights: vec![1.0 / size as f64; size],
        }
    }

    fn check_positive(weights: &[f64]) -> Result<()> {
        if weights.is_empty() {
            return Err(Error::invalid("a weighted space needs at least one atom"));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::invalid(format!(
                "atom {i} has non-positive weight {w}"
            )));
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mass_of(&self, indices: &[usize]) -> f64 {
        indices.iter().map(|&i| self.weights[i]).sum()
    }

    /// The measure restricted to `indices`, renormalized, and the mass it had.
    pub fn restrict(&self, indices: &[usize]) -> Result<(WeightedSpace, f64)> {
        let weights: Vec<f64> = indices.iter().map(|&i| self.weights[i]).collect();
        let mass = weights.iter().sum();
        Ok((WeightedSpace::normalized(weights)?, mass))
    }
}

/// A `dim`-dimensional space of functions on a [`WeightedSpace`], stored as a
/// `size × dim` basis whose columns are the basis functions.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    space: WeightedSpace,
    basis: DMatrix<f64>,
}

impl Subspace {
    pub fn new(space: WeightedSpace, basis: DMatrix<f64>) -> Result<Self> {
        if basis.nrows() != space.size() {
            return Err(Error::DimensionMismatch {
                expected: space.size(),
                found: basis.nrows(),
            });
        }
        if basis.ncols() == 0 {
            return Err(Error::invalid(
                "a subspace needs at least one basis function",
            ));
        }
        if basis.ncols() > basis.nrows() {
            return Err(Error::invalid(format!(
                "dimension {} exceeds the number of atoms {}",
                basis.ncols(),
                basis.nrows()
            )));
        }
        if basis.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("basis has non-finite entries"));
        }
        let sv = basis.clone().singular_values();
        let (lo, hi) = (sv.min(), sv.max());
        if !(hi > 0.0 && lo > RANK_TOL * hi) {
            return Err(Error::RankDeficient(format!(
                "basis singular values range over [{lo:e}, {hi:e}]"
            )));
        }
        Ok(Subspace { space, basis })
    }

    /// Skips validation; for bases whose columns are orthogonal by construction.
    pub(crate) fn from_orthogonal(space: WeightedSpace, basis: DMatrix<f64>) -> Subspace {
        debug_assert_eq!(space.size(), basis.nrows());
        Subspace { space, basis }
    }

    pub fn space(&self) -> &WeightedSpace {
        &self.space
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn size(&self) -> usize {
        self.space.size()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Function values of the element with the given coordinates.
    pub fn evaluate(&self, coeffs: &DVector<f64>) -> DVector<f64> {
        &self.basis * coeffs
    }

    /// A basis of the same span, orthonormal in `L_2` of the space.
    pub fn l2_orthonormal_basis(&self) -> DMatrix<f64> {
        let sqrt_w: Vec<f64> = self.space.weights.iter().map(|w| w.sqrt()).collect();
        let mut scaled = self.basis.clone();
        for (mut row, s) in scaled.row_iter_mut().zip(&sqrt_w) {
            row *= *s;
        }
        let mut q = scaled.qr().q();
        for (mut row, s) in q.row_iter_mut().zip(&sqrt_w) {
            row /= *s;
        }
        q
    }

    /// Rows `indices` of the basis over the renormalized restricted measure.
    pub fn restrict(&self, indices: &[usize]) -> Result<Subspace> {
        let (space, _) = self.space.restrict(indices)?;
        let basis = self.basis.select_rows(indices);
        Subspace::new(space, basis)
    }
}

/// A strictly positive function with unit integral against some space.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    values: Vec<f64>,
}

impl Density {
    /// Validates against `space` and removes the (at most [`DENSITY_TOL`])
    /// integration error so the integral is 1 to rounding.
    pub fn new(values: Vec<f64>, space: &WeightedSpace) -> Result<Self> {
        if values.len() != space.size() {
            return Err(Error::DimensionMismatch {
                expected: space.size(),
                found: values.len(),
            });
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::invalid(format!(
                "density value {v} at atom {i} is not positive"
            )));
        }
        let integral = integrate(&values, space);
        if (integral - 1.0).abs() > DENSITY_TOL {
            return Err(Error::invalid(format!(
                "density integrates to {integral}, not 1"
            )));
        }
        Ok(Density {
            values: values.into_iter().map(|v| v / integral).collect(),
        })
    }

    /// Rescales positive values to unit integral.
    pub fn normalized(values: Vec<f64>, space: &WeightedSpace) -> Result<Self> {
        if values.len() != space.size() {
            return Err(Error::DimensionMismatch {
                expected: space.size(),
                found: values.len(),
            });
        }
        let integral = integrate(&values, space);
        if !(integral.is_finite() && integral > 0.0) {
            return Err(Error::invalid("density has no positive integral"));
        }
        Density::new(values.into_iter().map(|v| v / integral).collect(), space)
    }

    pub fn constant(space: &WeightedSpace) -> Self {
        Density {
            values: vec![1.0; space.size()],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn integrate(values: &[f64], space: &WeightedSpace) -> f64 {
    values.iter().zip(space.weights()).map(|(v, w)| v * w).sum()
}

/// `Σ_i w_i |f_i|^p` for finite `p`.
pub(crate) fn lp_pow(f: &[f64], weights: &[f64], p: f64) -> f64 {
    f.iter().zip(weights).map(|(x, w)| w * pow_abs(*x, p)).sum()
}

/// The `L_p` norm of `f` over `space`; `p = ∞` is the plain maximum.
pub fn lp_norm(f: &[f64], space: &WeightedSpace, p: f64) -> Result<f64> {
    check_exponent(p)?;
    if f.len() != space.size() {
        return Err(Error::DimensionMismatch {
            expected: space.size(),
            found: f.len(),
        });
    }
    let peak = f.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if p.is_infinite() || peak == 0.0 {
        return Ok(peak);
    }
    let scaled: f64 = f
        .iter()
        .zip(space.weights())
        .map(|(x, w)| w * (x.abs() / peak).powf(p))
        .sum();
    Ok(peak * scaled.powf(1.0 / p))
}

/// Image of `sub` under `f ↦ f / φ^{1/p}`, living on the measure `φ·w`.
/// This is an isometry of `L_p`.
pub fn change_density(sub: &Subspace, phi: &Density, p: f64) -> Result<Subspace> {
    check_exponent(p)?;
    if phi.len() != sub.size() {
        return Err(Error::DimensionMismatch {
            expected: sub.size(),
            found: phi.len(),
        });
    }
    let weights: Vec<f64> = sub
        .space()
        .weights()
        .iter()
        .zip(phi.values())
        .map(|(w, v)| w * v)
        .collect();
    let space = WeightedSpace::normalized(weights)?;
    let mut basis = sub.basis().clone();
    if p.is_finite() {
        for (mut row, v) in basis.row_iter_mut().zip(phi.values()) {
            row /= v.powf(1.0 / p);
        }
    }
    Subspace::new(space, basis)
}

/// Function-level version of [`change_density`].
pub fn change_density_values(f: &[f64], phi: &Density, p: f64) -> Result<Vec<f64>> {
    check_exponent(p)?;
    if f.len() != phi.len() {
        return Err(Error::DimensionMismatch {
            expected: phi.len(),
            found: f.len(),
        });
    }
    if p.is_infinite() {
        return Ok(f.to_vec());
    }
    Ok(f.iter()
        .zip(phi.values())
        .map(|(x, v)| x / v.powf(1.0 / p))
        .collect())
}

/// `k` vectors of a `dim`-dimensional domain, stored as the columns of a matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSystem {
    vectors: DMatrix<f64>,
}

impl VectorSystem {
    pub fn new(vectors: DMatrix<f64>) -> Result<Self> {
        if vectors.ncols() == 0 {
            return Err(Error::invalid("empty vector system"));
        }
        if vectors.nrows() == 0 {
            return Err(Error::invalid("vectors of a zero-dimensional domain"));
        }
        Ok(VectorSystem { vectors })
    }

    pub fn from_columns(columns: &[DVector<f64>]) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::invalid("empty vector system"));
        }
        let dim = columns[0].len();
        if let Some(bad) = columns.iter().find(|c| c.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        Self::new(DMatrix::from_columns(columns))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn k(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    /// The system followed by `other`.
    pub fn concat(&self, other: &VectorSystem) -> Result<VectorSystem> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let mut m = DMatrix::zeros(self.dim(), self.k() + other.k());
        m.columns_mut(0, self.k()).copy_from(&self.vectors);
        m.columns_mut(self.k(), other.k()).copy_from(&other.vectors);
        Self::new(m)
    }
}

/// Norm of an operator's domain.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainNorm {
    /// `ℓ_2^dim`.
    EuclideanBall { dim: usize },
    /// Coordinates of a subspace, normed by the maximum of the function over
    /// the carrier's atoms.
    SupOnPoints(Subspace),
}

impl DomainNorm {
    pub fn dim(&self) -> usize {
        match self {
            DomainNorm::EuclideanBall { dim } => *dim,
            DomainNorm::SupOnPoints(sub) => sub.dim(),
        }
    }

    pub fn norm(&self, x: &DVector<f64>) -> f64 {
        match self {
            DomainNorm::EuclideanBall { .. } => x.norm(),
            DomainNorm::SupOnPoints(sub) => sub.evaluate(x).amax(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct WeakNormOptions {
    pub restarts: usize,
    pub steps: usize,
    pub seed: u64,
}

impl Default for WeakNormOptions {
    fn default() -> Self {
        WeakNormOptions {
            restarts: 16,
            steps: 500,
            seed: 0,
        }
    }
}

/// Where the weak norm is attained.
#[derive(Debug, Clone, PartialEq)]
pub enum DualWitness {
    /// Index of the maximizing atom of a sup-normed domain.
    Point(usize),
    /// Unit vector of a Euclidean domain.
    Direction(DVector<f64>),
}

#[derive(Debug, Clone)]
pub struct WeakNorm {
    pub value: f64,
    pub witness: DualWitness,
    /// Whether `value` is exact (as opposed to the best of a multi-start search).
    pub exact: bool,
    /// Distinct local maximizers met by a multi-start search, best first.
    pub local_maxima: Vec<DVector<f64>>,
}

/// `sup_{‖a‖_* ≤ 1} (Σ_i |a(x_i)|^p)^{1/p}`.
pub fn weak_lp_norm(sys: &VectorSystem, dom: &DomainNorm, p: f64) -> Result<f64> {
    weak_lp_norm_detail(sys, dom, p, &WeakNormOptions::default(), &[]).map(|w| w.value)
}

/// [`weak_lp_norm`] with search options, extra starting directions for the
/// Euclidean search, and the attaining functional.
pub fn weak_lp_norm_detail(
    sys: &VectorSystem,
    dom: &DomainNorm,
    p: f64,
    opts: &WeakNormOptions,
    starts: &[DVector<f64>],
) -> Result<WeakNorm> {
    check_exponent(p)?;
    if sys.dim() != dom.dim() {
        return Err(Error::DimensionMismatch {
            expected: dom.dim(),
            found: sys.dim(),
        });
    }
    match dom {
        DomainNorm::SupOnPoints(sub) => Ok(sup_weak_norm(sys, sub, p)),
        DomainNorm::EuclideanBall { .. } => euclidean_weak_norm(sys, p, opts, starts),
    }
}

/// Extreme points of the dual ball of a sup-normed space are point
/// evaluations, so the weak norm is a maximum over atoms.
fn sup_weak_norm(sys: &VectorSystem, sub: &Subspace, p: f64) -> WeakNorm {
    let values = sub.basis() * sys.matrix();
    let mut best = (0usize, f64::NEG_INFINITY);
    for (i, row) in values.row_iter().enumerate() {
        let h = if p.is_infinite() {
            row.amax()
        } else {
            row.iter().map(|v| pow_abs(*v, p)).sum::<f64>()
        };
        if h > best.1 {
            best = (i, h);
        }
    }
    let value = if p.is_infinite() {
        best.1
    } else {
        best.1.powf(1.0 / p)
    };
    WeakNorm {
        value,
        witness: DualWitness::Point(best.0),
        exact: true,
        local_maxima: Vec::new(),
    }
}

fn euclidean_weak_norm(
    sys: &VectorSystem,
    p: f64,
    opts: &WeakNormOptions,
    starts: &[DVector<f64>],
) -> Result<WeakNorm> {
    let x = sys.matrix();
    let d = x.nrows();
    let col_norms: Vec<f64> = x.column_iter().map(|c| c.norm()).collect();
    let scale = col_norms.iter().cloned().fold(0.0, f64::max);
    if scale == 0.0 {
        let mut e = DVector::zeros(d);
        e[0] = 1.0;
        return Ok(WeakNorm {
            value: 0.0,
            witness: DualWitness::Direction(e),
            exact: true,
            local_maxima: Vec::new(),
        });
    }

    if p.is_infinite() {
        let (i, _) = col_norms
            .iter()
            .enumerate()
            .fold((0, -1.0), |b, (i, &n)| if n > b.1 { (i, n) } else { b });
        return Ok(WeakNorm {
            value: scale,
            witness: DualWitness::Direction(x.column(i) / scale),
            exact: true,
            local_maxima: Vec::new(),
        });
    }

    let svd = x.clone().svd(true, false);
    let (top, sigma) = {
        let u = svd.u.as_ref().expect("left singular vectors requested");
        let (i, s) = svd
            .singular_values
            .iter()
            .enumerate()
            .fold((0, -1.0), |b, (i, &s)| if s > b.1 { (i, s) } else { b });
        (u.column(i).into_owned(), s)
    };
    if p == 2.0 {
        return Ok(WeakNorm {
            value: sigma,
            witness: DualWitness::Direction(top),
            exact: true,
            local_maxima: Vec::new(),
        });
    }

    // Multi-start power iteration a ← ∇f(a)/‖∇f(a)‖ for the convex,
    // p-homogeneous f(a) = Σ |⟨a, x_i⟩|^p; each step cannot decrease f on the
    // sphere. Runs on the rescaled system to keep the powers in range.
    let xs = x / scale;
    let objective = |a: &DVector<f64>| {
        let s = xs.tr_mul(a);
        let value: f64 = s.iter().map(|v| pow_abs(*v, p)).sum();
        let w = s.map(|v| pow_abs(v, p - 1.0) * v.signum());
        (value, &xs * w)
    };
    let climb = |start: DVector<f64>| {
        let mut a = sphere::normalized(start);
        let (mut value, mut grad) = objective(&a);
        for _ in 0..opts.steps {
            let gn = grad.norm();
            if !(gn > 0.0) {
                break;
            }
            let next = grad / gn;
            let (nv, ng) = objective(&next);
            let moved = (&next - &a).norm();
            if !(nv >= value) {
                break;
            }
            let gain = nv - value;
            a = next;
            value = nv;
            grad = ng;
            if moved < POWER_MOVE_TOL || gain <= POWER_GAIN_TOL * value {
                break;
            }
        }
        (value, a)
    };

    let mut initial: Vec<DVector<f64>> = Vec::new();
    initial.extend(
        starts
            .iter()
            .filter(|s| s.len() == d && s.norm() > 0.0)
            .cloned(),
    );
    initial.push(top);
    initial.extend(
        xs.column_iter()
            .filter(|c| c.norm() > 0.0)
            .map(|c| c.normalize()),
    );
    let mut r = rng::rng(opts.seed);
    for _ in 0..opts.restarts {
        initial.push(rng::unit_vector(&mut r, d));
    }

    let mut maxima: Vec<(f64, DVector<f64>)> = Vec::new();
    for start in initial {
        let (value, a) = climb(start);
        if !value.is_finite() {
            continue;
        }
        let a = canonical_sign(a);
        if let Some(m) = maxima
            .iter_mut()
            .find(|(_, b)| (a.dot(b)).abs() > 1.0 - 1e-8)
        {
            if value > m.0 {
                *m = (value, a);
            }
        } else {
            maxima.push((value, a));
        }
    }
    maxima.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (best_value, best_dir) = maxima[0].clone();
    Ok(WeakNorm {
        value: scale * best_value.powf(1.0 / p),
        witness: DualWitness::Direction(best_dir),
        exact: false,
        local_maxima: maxima.into_iter().map(|(_, a)| a).collect(),
    })
}

/// `a` or `-a`, whichever has a positive first nonzero entry.
fn canonical_sign(a: DVector<f64>) -> DVector<f64> {
    match a.iter().find(|v| **v != 0.0) {
        Some(v) if *v < 0.0 => -a,
        _ => a,
    }
}
