//! Monte Carlo and covering-number estimates for the unit ball of a
//! subspace `Y_p ⊂ L_p(ν)`.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{check_finite_exponent, lp_norm, DomainNorm, Subspace, WeightedSpace};
use crate::ratio::{maximize_ratio, RatioSearch};
use crate::rng;
use crate::summing::FiniteRankOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SignLaw {
    Rademacher,
    Gaussian,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
}

impl MeanEstimate {
    pub fn from_samples(samples: &[f64]) -> MeanEstimate {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let std_error = if samples.len() > 1 {
            let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        MeanEstimate {
            mean,
            std_error,
            trials: samples.len(),
        }
    }
}

/// `sup_{‖y‖_p ≤ 1, y ∈ Y} |Σ_i ε_i ν_i |y_i|^p|` for fixed signs (or
/// Gaussian coefficients) `ε`, searched as the larger of `sup R` and
/// `sup −R` for the ratio `R(y) = Σ ε ν |y|^p / Σ ν |y|^p`.
pub fn process_sup(sub: &Subspace, p: f64, eps: &[f64], probes: usize, seed: u64) -> f64 {
    let basis = sub.l2_orthonormal_basis();
    let w = sub.space().weights();
    let search = RatioSearch {
        probes,
        ..RatioSearch::default()
    };
    let plus: Vec<f64> = eps.iter().zip(w).map(|(e, wi)| e * wi).collect();
    let minus: Vec<f64> = plus.iter().map(|v| -v).collect();
    let a = maximize_ratio(&basis, w, &plus, p, &search, rng::derive_seed(seed, 0)).value;
    let b = maximize_ratio(&basis, w, &minus, p, &search, rng::derive_seed(seed, 1)).value;
    a.max(b).max(0.0)
}

/// Mean and standard error of [`process_sup`] over `trials` independent
/// draws of `ε`.
pub fn rademacher_sup(
    sub: &Subspace,
    p: f64,
    trials: usize,
    probes: usize,
    law: SignLaw,
    seed: u64,
) -> Result<MeanEstimate> {
    check_finite_exponent(p)?;
    if trials == 0 {
        return Err(Error::invalid("at least one trial is needed"));
    }
    let m = sub.size();
    let samples: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::child(seed, t as u64);
            let eps: Vec<f64> = (0..m)
                .map(|_| match law {
                    SignLaw::Rademacher => {
                        if r.random::<bool>() {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                    SignLaw::Gaussian => r.sample(StandardNormal),
                })
                .collect();
            process_sup(sub, p, &eps, probes, r.random())
        })
        .collect();
    Ok(MeanEstimate::from_samples(&samples))
}

/// `ℓ(u) = (E‖Σ_i g_i u(e_i)‖²)^{1/2}` over an orthonormal basis `e_i` of a
/// Euclidean domain.
pub fn gaussian_ell(u: &FiniteRankOperator, trials: usize, seed: u64) -> Result<f64> {
    if !matches!(u.domain(), DomainNorm::EuclideanBall { .. }) {
        return Err(Error::invalid(
            "the Gaussian ell-norm needs a Euclidean domain",
        ));
    }
    if trials == 0 {
        return Err(Error::invalid("at least one trial is needed"));
    }
    let d = u.dim();
    let squares: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::child(seed, t as u64);
            u.image_norm(&rng::gaussian_vector(&mut r, d)).powi(2)
        })
        .collect();
    Ok((squares.iter().sum::<f64>() / trials as f64).sqrt())
}

/// `δ(y, z) = (Σ_i [ν_i (|y_i|^p − |z_i|^p)]²)^{1/2}`.
pub fn delta_distance(y: &[f64], z: &[f64], space: &WeightedSpace, p: f64) -> Result<f64> {
    check_finite_exponent(p)?;
    let w = space.weights();
    if y.len() != w.len() || z.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            found: if y.len() != w.len() { y.len() } else { z.len() },
        });
    }
    Ok(y.iter()
        .zip(z)
        .zip(w)
        .map(|((a, b), wi)| (wi * (a.abs().powf(p) - b.abs().powf(p))).powi(2))
        .sum::<f64>()
        .sqrt())
}

#[derive(Debug, Clone)]
pub enum Metric {
    /// `max_i |y_i − z_i|`.
    Sup,
    /// [`delta_distance`].
    Delta { space: WeightedSpace, p: f64 },
}

impl Metric {
    /// Coordinates in which the metric is a plain sup or Euclidean distance.
    fn embed(&self, y: &DVector<f64>) -> DVector<f64> {
        match self {
            Metric::Sup => y.clone(),
            Metric::Delta { space, p } => DVector::from_iterator(
                y.len(),
                y.iter()
                    .zip(space.weights())
                    .map(|(v, w)| w * v.abs().powf(*p)),
            ),
        }
    }

    fn embedded_distance(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        match self {
            Metric::Sup => (a - b).amax(),
            Metric::Delta { .. } => (a - b).norm(),
        }
    }

    pub fn distance(&self, y: &DVector<f64>, z: &DVector<f64>) -> f64 {
        self.embedded_distance(&self.embed(y), &self.embed(z))
    }

    fn check(&self, points: &[DVector<f64>]) -> Result<()> {
        let Some(first) = points.first() else {
            return Err(Error::invalid("the sample must be nonempty"));
        };
        if let Some(bad) = points.iter().find(|q| q.len() != first.len()) {
            return Err(Error::DimensionMismatch {
                expected: first.len(),
                found: bad.len(),
            });
        }
        if let Metric::Delta { space, p } = self {
            check_finite_exponent(*p)?;
            if space.size() != first.len() {
                return Err(Error::DimensionMismatch {
                    expected: space.size(),
                    found: first.len(),
                });
            }
        }
        Ok(())
    }
}

/// Covering radii of the farthest-point ordering started at `points[0]`:
/// entry `k−1` is the largest distance from a sample point to the first `k`
/// centers. Stops after `max_centers` centers or once the radius is `≤ stop`.
pub fn greedy_radii(
    points: &[DVector<f64>],
    metric: &Metric,
    max_centers: usize,
    stop: f64,
) -> Result<Vec<f64>> {
    metric.check(points)?;
    let embedded: Vec<DVector<f64>> = points.iter().map(|q| metric.embed(q)).collect();
    let mut nearest: Vec<f64> = embedded
        .iter()
        .map(|q| metric.embedded_distance(q, &embedded[0]))
        .collect();
    let mut radii = Vec::new();
    loop {
        let (far, r) = nearest
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |b, (i, &d)| if d > b.1 { (i, d) } else { b },
            );
        radii.push(r);
        if r <= stop || radii.len() >= max_centers.min(points.len()) {
            break;
        }
        let center = embedded[far].clone();
        nearest
            .par_iter_mut()
            .zip(embedded.par_iter())
            .for_each(|(n, q)| {
                let d = metric.embedded_distance(q, &center);
                if d < *n {
                    *n = d;
                }
            });
    }
    Ok(radii)
}

/// Number of greedy centers needed before every point is within `t`.
fn count_at(radii: &[f64], t: f64) -> usize {
    radii
        .iter()
        .position(|&r| r <= t)
        .map_or(radii.len(), |k| k + 1)
}

/// Greedy farthest-point cover of the sample by balls of radius `t`.
/// The count `K` has its `K` centers pairwise farther apart than `t`, so it
/// never exceeds the covering number at `t/2`.
pub fn covering_estimate(points: &[DVector<f64>], metric: &Metric, t: f64) -> Result<usize> {
    if !(t >= 0.0) {
        return Err(Error::invalid("radius must be nonnegative"));
    }
    let radii = greedy_radii(points, metric, usize::MAX, t)?;
    Ok(count_at(&radii, t))
}

/// Covering counts (as reals) at decreasing radii.
#[derive(Debug, Clone, Serialize)]
pub struct CoveringCurve {
    pub radii: Vec<f64>,
    pub counts: Vec<f64>,
}

impl CoveringCurve {
    pub fn new(radii: Vec<f64>, counts: Vec<f64>) -> Result<Self> {
        if radii.len() != counts.len() {
            return Err(Error::DimensionMismatch {
                expected: radii.len(),
                found: counts.len(),
            });
        }
        if radii.iter().any(|r| !(*r >= 0.0 && r.is_finite()))
            || radii.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(Error::invalid(
                "radii must be finite, nonnegative and strictly decreasing",
            ));
        }
        if counts.iter().any(|c| !(*c >= 1.0 && c.is_finite()))
            || counts.windows(2).any(|w| w[1] < w[0])
        {
            return Err(Error::invalid(
                "counts must be at least 1 and nondecreasing",
            ));
        }
        Ok(CoveringCurve { radii, counts })
    }
}

/// Greedy counts at each of the strictly decreasing `radii`.
pub fn covering_curve(
    points: &[DVector<f64>],
    metric: &Metric,
    radii: &[f64],
) -> Result<CoveringCurve> {
    let smallest = radii.last().copied().unwrap_or(0.0);
    let greedy = greedy_radii(points, metric, usize::MAX, smallest)?;
    let counts = radii.iter().map(|&t| count_at(&greedy, t) as f64).collect();
    CoveringCurve::new(radii.to_vec(), counts)
}

/// Counts at `t_j = r_1 · ratio^j`, where `r_1` is the one-center radius,
/// continuing until the count reaches `max_count`.
pub fn geometric_covering_curve(
    points: &[DVector<f64>],
    metric: &Metric,
    ratio: f64,
    max_count: usize,
) -> Result<CoveringCurve> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::invalid("ratio must lie in (0, 1)"));
    }
    if max_count < 2 || max_count > points.len() {
        return Err(Error::invalid("max_count must lie in [2, sample size]"));
    }
    let greedy = greedy_radii(points, metric, max_count, 0.0)?;
    let mut radii = Vec::new();
    let mut counts = Vec::new();
    let mut t = greedy[0];
    if t <= 0.0 {
        return Err(Error::invalid("the sample is a single point"));
    }
    loop {
        let c = count_at(&greedy, t);
        radii.push(t);
        counts.push(c as f64);
        if c >= max_count {
            break;
        }
        t *= ratio;
    }
    CoveringCurve::new(radii, counts)
}

/// `samples` elements of the unit sphere of `Y_p`: Gaussian combinations of
/// an `L_2`-orthonormal basis, normalized in `L_p`.
pub fn unit_sphere_sample(
    sub: &Subspace,
    p: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<DVector<f64>>> {
    check_finite_exponent(p)?;
    let q = sub.l2_orthonormal_basis();
    let mut r = rng::rng(seed);
    (0..samples)
        .map(|_| {
            let y = &q * rng::gaussian_vector(&mut r, sub.dim());
            let norm = lp_norm(y.as_slice(), sub.space(), p)?;
            Ok(y / norm)
        })
        .collect()
}

/// `∫ (ln E(t))^{1/2} dt` over the curve's radii by the trapezoid rule, with
/// constant 1.
pub fn dudley_bound(curve: &CoveringCurve) -> f64 {
    let f: Vec<f64> = curve
        .counts
        .iter()
        .map(|c| c.ln().max(0.0).sqrt())
        .collect();
    curve
        .radii
        .windows(2)
        .zip(f.windows(2))
        .map(|(t, v)| (t[0] - t[1]) * 0.5 * (v[0] + v[1]))
        .sum()
}

/// Least-squares slope of `ln ln E(t)` against `ln(1/t)` over the points with
/// `E(t) > 1` and `t > 0`.
pub fn fit_scaling(curve: &CoveringCurve) -> Result<f64> {
    let pts: Vec<(f64, f64)> = curve
        .radii
        .iter()
        .zip(&curve.counts)
        .filter(|(t, c)| **c > 1.0 && **t > 0.0)
        .map(|(t, c)| (-t.ln(), c.ln().ln()))
        .collect();
    if pts.len() < 4 {
        return Err(Error::invalid(format!(
            "scaling fit needs 4 points with count > 1, got {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}
