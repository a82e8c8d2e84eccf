//! Maximization of weighted `p`-th power ratios over a subspace:
//!
//! ```text
//! R(y) = Σ_i a_i |y_i|^p / Σ_i ν_i |y_i|^p ,   y ∈ span(basis) \ {0}
//! ```
//!
//! With `a = ν·1_A` this is `‖1_A y‖_p^p / ‖y‖_p^p`; with `a = ε·ν` for signs
//! `ε` it is the normalized Rademacher sum. `R` is scale invariant, so it is
//! searched over the unit sphere of coefficients: random probes first, then
//! projected gradient ascent from the best few. The result is the value at an
//! actual element, hence a lower bound on the supremum.

use nalgebra::{DMatrix, DVector};

use crate::measure::pow_abs;
use crate::rng;
use crate::sphere::{self, AscentOptions};

#[derive(Debug, Clone, Copy)]
pub struct RatioSearch {
    pub probes: usize,
    /// Number of best probes refined by ascent.
    pub refine: usize,
    pub steps: usize,
}

impl Default for RatioSearch {
    fn default() -> Self {
        RatioSearch {
            probes: 256,
            refine: 4,
            steps: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RatioMax {
    pub value: f64,
    /// Coefficients (unit norm) of the maximizing element.
    pub coeffs: DVector<f64>,
}

/// Value and gradient of `R` at coefficients `c`.
pub(crate) fn ratio_and_gradient(
    basis: &DMatrix<f64>,
    weights: &[f64],
    coeffs: &[f64],
    p: f64,
    c: &DVector<f64>,
) -> (f64, DVector<f64>) {
    let y = basis * c;
    let mut num = 0.0;
    let mut den = 0.0;
    let mut du = DVector::zeros(y.len());
    let mut dd = DVector::zeros(y.len());
    for i in 0..y.len() {
        let a = y[i].abs();
        let pow = pow_abs(a, p);
        num += coeffs[i] * pow;
        den += weights[i] * pow;
        let deriv = p * pow_abs(a, p - 1.0) * y[i].signum();
        du[i] = coeffs[i] * deriv;
        dd[i] = weights[i] * deriv;
    }
    if den <= 0.0 {
        return (f64::NEG_INFINITY, DVector::zeros(c.len()));
    }
    let value = num / den;
    let grad = basis.tr_mul(&((du - dd * value) / den));
    (value, grad)
}

fn ratio_value(y: nalgebra::DVectorView<f64>, weights: &[f64], coeffs: &[f64], p: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..y.len() {
        let pow = pow_abs(y[i], p);
        num += coeffs[i] * pow;
        den += weights[i] * pow;
    }
    if den > 0.0 {
        num / den
    } else {
        f64::NEG_INFINITY
    }
}

/// Lower bound on `sup R` from `search.probes` random directions plus the
/// coordinate directions, refined by ascent.
pub fn maximize_ratio(
    basis: &DMatrix<f64>,
    weights: &[f64],
    coeffs: &[f64],
    p: f64,
    search: &RatioSearch,
    seed: u64,
) -> RatioMax {
    let n = basis.ncols();
    let mut r = rng::rng(seed);
    let mut dirs = DMatrix::zeros(n, n + search.probes);
    for j in 0..n {
        dirs[(j, j)] = 1.0;
    }
    for j in 0..search.probes {
        dirs.set_column(n + j, &rng::unit_vector(&mut r, n));
    }
    let values = basis * &dirs;
    let mut scored: Vec<(f64, usize)> = (0..dirs.ncols())
        .map(|j| (ratio_value(values.column(j), weights, coeffs, p), j))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut best = RatioMax {
        value: scored[0].0,
        coeffs: dirs.column(scored[0].1).into_owned(),
    };
    if n == 1 {
        return best;
    }
    let opts = AscentOptions {
        max_steps: search.steps,
        ..AscentOptions::default()
    };
    for &(_, j) in scored.iter().take(search.refine) {
        let res = sphere::ascend(
            dirs.column(j).into_owned(),
            |c| ratio_and_gradient(basis, weights, coeffs, p, c),
            &opts,
        );
        if res.value > best.value {
            best = RatioMax {
                value: res.value,
                coeffs: res.point,
            };
        }
    }
    best
}
