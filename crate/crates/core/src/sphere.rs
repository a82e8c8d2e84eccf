//! Projected gradient ascent on the unit sphere.
//!
//! Every nonconvex maximization in the crate (the weak norm on Euclidean
//! domains, restricted-norm ratios, the summing-norm search) is a
//! scale-invariant objective, so it is maximized over the sphere with a
//! retraction by normalization and a backtracking step size.

use nalgebra::DVector;

#[derive(Debug, Clone, Copy)]
pub struct AscentOptions {
    pub max_steps: usize,
    /// Stop once an accepted step moves the iterate by less than this.
    pub move_tol: f64,
    pub initial_step: f64,
    /// Armijo constant for the sufficient-increase test.
    pub armijo: f64,
    pub max_backtracks: usize,
}

impl Default for AscentOptions {
    fn default() -> Self {
        AscentOptions {
            max_steps: 500,
            move_tol: 1e-10,
            initial_step: 1.0,
            armijo: 1e-4,
            max_backtracks: 60,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AscentResult {
    pub point: DVector<f64>,
    pub value: f64,
    pub steps: usize,
    pub converged: bool,
}

/// Maximizes `f` over the unit sphere starting from `start` (normalized
/// internally). `f` returns the value and the Euclidean gradient.
pub fn ascend<F>(start: DVector<f64>, mut f: F, opts: &AscentOptions) -> AscentResult
where
    F: FnMut(&DVector<f64>) -> (f64, DVector<f64>),
{
    let mut x = normalized(start);
    let (mut value, mut grad) = f(&x);
    let mut step = opts.initial_step;
    let mut steps = 0;
    let mut converged = false;

    while steps < opts.max_steps {
        if !value.is_finite() {
            break;
        }
        let tangent = &grad - &x * grad.dot(&x);
        let slope = tangent.norm_squared();
        if slope <= f64::MIN_POSITIVE || !slope.is_finite() {
            converged = true;
            break;
        }
        let mut accepted = None;
        for _ in 0..opts.max_backtracks {
            let trial = normalized(&x + &tangent * step);
            let (tv, tg) = f(&trial);
            if tv.is_finite() && tv >= value + opts.armijo * step * slope {
                accepted = Some((trial, tv, tg));
                break;
            }
            step *= 0.5;
        }
        steps += 1;
        match accepted {
            Some((trial, tv, tg)) => {
                let moved = (&trial - &x).norm();
                x = trial;
                value = tv;
                grad = tg;
                step *= 2.0;
                if moved < opts.move_tol {
                    converged = true;
                    break;
                }
            }
            None => {
                converged = true;
                break;
            }
        }
    }

    AscentResult {
        point: x,
        value,
        steps,
        converged,
    }
}

pub(crate) fn normalized(v: DVector<f64>) -> DVector<f64> {
    let n = v.norm();
    if n > 0.0 {
        v / n
    } else {
        v
    }
}
