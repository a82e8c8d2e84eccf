//! Atom splitting, random sign halving, and the iterated reduction of the
//! measure space carrying a subspace of `L_p`.
//!
//! One reduction stage is
//!
//! ```text
//! Lewis density β → α = (β+1)/2 → f ↦ f/α^{1/p} → split heavy atoms → halve
//! ```
//!
//! where halving draws random signs, measures how far the restricted `p`-th
//! powers `‖1_{M_j} y‖_p^p / ‖y‖_p^p` stray from 1/2 over the subspace, and
//! keeps the first part once that statistic is below the schedule's cap.
//! Every step acts row-wise on the basis, so basis coordinates are preserved
//! and original and reduced functions can be compared coefficient by
//! coefficient.

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lewis::{blend_density, lewis_density, LewisOptions};
use crate::measure::{change_density, check_finite_exponent, lp_pow, Subspace, WeightedSpace};
use crate::ratio::{maximize_ratio, RatioSearch};
use crate::rng;

/// Cap on fresh sign draws in [`sign_partition`].
pub const PARTITION_DRAW_CAP: usize = 1000;
pub const DEFAULT_RETRY_BUDGET: usize = 64;
pub const DEFAULT_PROBES: usize = 256;
/// Upper clamp on scheduled acceptance thresholds.
pub const THETA_CAP: f64 = 0.999;

/// Result of splitting the heavy atoms of a space of size `N` into `M` atoms.
#[derive(Debug, Clone)]
pub struct SplitResult {
    pub space: WeightedSpace,
    /// `sigma[j]`: new atoms carved out of original atom `j`.
    pub sigma: Vec<Vec<usize>>,
    /// `embed[i]`: original atom that new atom `i` came from.
    pub embed: Vec<usize>,
}

impl SplitResult {
    /// The copy map `(J f)_i = f_{embed[i]}`, an isometry for every `L_r`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        self.embed.iter().map(|&j| f[j]).collect()
    }
}

/// Replaces every atom of mass `m > 4/N` by `⌈mN/4⌉` equal pieces, each then
/// of mass in `[2/N, 4/N]`, and copies the subspace onto the pieces.
pub fn split_atoms(sub: &Subspace) -> Result<(SplitResult, Subspace)> {
    let weights = sub.space().weights();
    let n_atoms = weights.len();
    let nf = n_atoms as f64;
    let threshold = 4.0 / nf;
    let mut new_weights = Vec::with_capacity(n_atoms + n_atoms / 4 + 1);
    let mut sigma = Vec::with_capacity(n_atoms);
    let mut embed = Vec::with_capacity(n_atoms);
    for (j, &m) in weights.iter().enumerate() {
        let pieces = if m > threshold {
            (m * nf / 4.0).ceil() as usize
        } else {
            1
        };
        let mut group = Vec::with_capacity(pieces);
        for _ in 0..pieces {
            group.push(new_weights.len());
            new_weights.push(m / pieces as f64);
            embed.push(j);
        }
        sigma.push(group);
    }
    let space = WeightedSpace::normalized(new_weights)?;
    let basis = sub.basis().select_rows(&embed);
    let split = SplitResult {
        space: space.clone(),
        sigma,
        embed,
    };
    Ok((split, Subspace::new(space, basis)?))
}

/// A partition of the atoms into two parts.
#[derive(Debug, Clone, Serialize)]
pub struct PartitionPair {
    pub part1: Vec<usize>,
    pub part2: Vec<usize>,
    /// Measured `sup_y ‖1_{M_j} y‖_p^p / ‖y‖_p^p` for each part, once known.
    pub ratios: Option<[f64; 2]>,
    /// Sign vectors drawn until the cardinality cap was met.
    pub draws: usize,
}

/// `|part| ≤ (9/16)·size`.
pub fn within_cardinality_cap(part: usize, size: usize) -> bool {
    16 * part <= 9 * size
}

/// Whether some split of `size` atoms meets the cardinality cap on both
/// sides; false exactly for `size ∈ {1, 3, 5, 7}`.
pub fn partition_exists(size: usize) -> bool {
    size > 0 && within_cardinality_cap(size.div_ceil(2), size)
}

/// Independent uniform signs per atom, redrawn until both parts hold at most
/// `(9/16)·M` atoms.
pub fn sign_partition(space: &WeightedSpace, seed: u64) -> Result<PartitionPair> {
    let m = space.size();
    if !partition_exists(m) {
        return Err(Error::invalid(format!(
            "no split of {m} atoms has both parts within 9/16 of the total"
        )));
    }
    let mut r = rng::rng(seed);
    for draw in 1..=PARTITION_DRAW_CAP {
        let mut part1 = Vec::with_capacity(m / 2 + 1);
        let mut part2 = Vec::with_capacity(m / 2 + 1);
        for i in 0..m {
            if r.random::<bool>() {
                part1.push(i);
            } else {
                part2.push(i);
            }
        }
        if within_cardinality_cap(part1.len(), m) && within_cardinality_cap(part2.len(), m) {
            return Ok(PartitionPair {
                part1,
                part2,
                ratios: None,
                draws: draw,
            });
        }
    }
    Err(Error::RetryExhausted {
        retries: PARTITION_DRAW_CAP,
        best: f64::NAN,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Distortion {
    /// `max(part_ratios)`.
    pub theta: f64,
    pub part_ratios: [f64; 2],
}

fn check_partition(size: usize, pair: &PartitionPair) -> Result<()> {
    let mut seen = vec![false; size];
    for &i in pair.part1.iter().chain(&pair.part2) {
        if i >= size || seen[i] {
            return Err(Error::invalid(
                "parts must be disjoint index sets of the space",
            ));
        }
        seen[i] = true;
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::invalid("parts must cover the space"));
    }
    Ok(())
}

/// `θ = max_j sup_y ‖1_{M_j} y‖_p^p / ‖y‖_p^p`, estimated from below by
/// `probes` random directions plus ascent refinement.
pub fn partition_distortion(
    sub: &Subspace,
    pair: &PartitionPair,
    p: f64,
    probes: usize,
    seed: u64,
) -> Result<Distortion> {
    check_finite_exponent(p)?;
    check_partition(sub.size(), pair)?;
    let basis = sub.l2_orthonormal_basis();
    let w = sub.space().weights();
    let search = RatioSearch {
        probes,
        ..RatioSearch::default()
    };
    let mut ratios = [0.0; 2];
    for (j, part) in [&pair.part1, &pair.part2].into_iter().enumerate() {
        let mut coeffs = vec![0.0; w.len()];
        for &i in part {
            coeffs[i] = w[i];
        }
        ratios[j] = maximize_ratio(
            &basis,
            w,
            &coeffs,
            p,
            &search,
            rng::derive_seed(seed, j as u64),
        )
        .value;
    }
    Ok(Distortion {
        theta: ratios[0].max(ratios[1]),
        part_ratios: ratios,
    })
}

/// An accepted halving.
#[derive(Debug, Clone)]
pub struct Halving {
    pub pair: PartitionPair,
    pub distortion: Distortion,
    /// Attempts used, counting the accepted one.
    pub retries: usize,
    /// The subspace restricted to `pair.part1`, over the renormalized measure.
    pub restricted: Subspace,
    /// Mass of `pair.part1` before renormalization.
    pub kept_mass: f64,
}

/// Draws sign partitions until one has distortion at most `theta_max`, then
/// restricts to its first part.
pub fn halve(
    sub: &Subspace,
    p: f64,
    theta_max: f64,
    retry_budget: usize,
    probes: usize,
    seed: u64,
) -> Result<Halving> {
    check_finite_exponent(p)?;
    if !(theta_max > 0.5 && theta_max < 1.0) {
        return Err(Error::invalid(format!(
            "theta_max must lie in (1/2, 1), got {theta_max}"
        )));
    }
    let mut best = f64::INFINITY;
    for attempt in 0..retry_budget {
        let pair = sign_partition(sub.space(), rng::derive_seed(seed, 2 * attempt as u64))?;
        let distortion = partition_distortion(
            sub,
            &pair,
            p,
            probes,
            rng::derive_seed(seed, 2 * attempt as u64 + 1),
        )?;
        best = best.min(distortion.theta);
        if distortion.theta > theta_max {
            continue;
        }
        // A direction vanishing on part1 would have ratio 1 on part2; probes
        // can miss it, the rank check cannot.
        let Ok(restricted) = sub.restrict(&pair.part1) else {
            continue;
        };
        let kept_mass = sub.space().mass_of(&pair.part1);
        let pair = PartitionPair {
            ratios: Some(distortion.part_ratios),
            ..pair
        };
        return Ok(Halving {
            pair,
            distortion,
            retries: attempt + 1,
            restricted,
            kept_mass,
        });
    }
    Err(Error::RetryExhausted {
        retries: retry_budget,
        best,
    })
}

/// Acceptance threshold for a halving, as a function of the subspace
/// dimension and the size of the space being halved.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThetaSchedule {
    Constant {
        theta: f64,
    },
    /// `1/2 + c·√(n/size)`.
    Sqrt {
        c: f64,
    },
    /// `1/2 + c·√(n/size)` with `c` fixed at the start so that the product of
    /// the stage factors `(2θ)^{1/p}` over the planned stages equals `1 + ε`.
    Budget {
        epsilon: f64,
    },
}

impl Default for ThetaSchedule {
    fn default() -> Self {
        ThetaSchedule::Budget { epsilon: 0.5 }
    }
}

/// Sizes at which halvings are planned, assuming each halves the space.
fn planned_sizes(size: usize, target_m: usize) -> Vec<f64> {
    let mut sizes = Vec::new();
    let mut s = size as f64;
    while s > target_m as f64 {
        sizes.push(s);
        s /= 2.0;
    }
    sizes
}

/// The `c` of [`ThetaSchedule::Budget`].
pub fn budget_constant(epsilon: f64, n: usize, size: usize, target_m: usize, p: f64) -> f64 {
    let sizes = planned_sizes(size, target_m);
    if sizes.is_empty() {
        return 0.0;
    }
    let goal = (1.0 + epsilon).ln();
    let total = |c: f64| -> f64 {
        sizes
            .iter()
            .map(|s| (1.0 + 2.0 * c * (n as f64 / s).sqrt()).ln() / p)
            .sum()
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while total(hi) < goal {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) < goal {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone)]
pub struct ReduceOptions {
    pub schedule: ThetaSchedule,
    pub retry_budget: usize,
    pub probes: usize,
    pub lewis: LewisOptions,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions {
            schedule: ThetaSchedule::default(),
            retry_budget: DEFAULT_RETRY_BUDGET,
            probes: DEFAULT_PROBES,
            lewis: LewisOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StageRecord {
    pub stage: usize,
    pub size_before: usize,
    pub size_split: usize,
    pub size_after: usize,
    pub beta_residual: f64,
    pub lewis_iterations: usize,
    pub theta_max: f64,
    /// Accepted distortion statistic `θ`.
    pub partition_ratio: f64,
    pub part_ratios: [f64; 2],
    pub retries: usize,
    /// `(2θ)^{1/p}`.
    pub distortion: f64,
    /// `(θ_1 / (1 − θ_2))^{1/p}`: ratio of the largest to the smallest norm
    /// change this stage can cause, given the measured part ratios.
    pub two_sided: f64,
}

#[derive(Debug, Clone)]
pub struct ReductionTrace {
    pub stages: Vec<StageRecord>,
    /// Product of the stage factors `(2θ)^{1/p}`.
    pub cumulative_distortion: f64,
    /// Product of the stage `two_sided` factors.
    pub two_sided_bound: f64,
    /// The reduced subspace, in the original basis coordinates.
    pub final_basis: Subspace,
}

impl ReductionTrace {
    pub fn final_space(&self) -> &WeightedSpace {
        self.final_basis.space()
    }

    fn identity(sub: &Subspace) -> Self {
        ReductionTrace {
            stages: Vec::new(),
            cumulative_distortion: 1.0,
            two_sided_bound: 1.0,
            final_basis: sub.clone(),
        }
    }
}

/// A failed reduction, with the stages completed before the failure.
#[derive(Debug, Clone, thiserror::Error)]
#[error("{error}")]
pub struct ReductionFailure {
    pub error: Error,
    pub partial: Option<Box<ReductionTrace>>,
}

impl From<Error> for ReductionFailure {
    fn from(error: Error) -> Self {
        ReductionFailure {
            error,
            partial: None,
        }
    }
}

/// Repeats the reduction stage until the space has at most `target_m` atoms.
pub fn reduce(
    sub: &Subspace,
    p: f64,
    target_m: usize,
    opts: &ReduceOptions,
    seed: u64,
) -> std::result::Result<ReductionTrace, ReductionFailure> {
    check_finite_exponent(p)?;
    if !(p > 1.0 && p != 2.0) {
        return Err(
            Error::invalid(format!("reduction needs 1 < p < 2 or 2 < p < inf, got {p}")).into(),
        );
    }
    let n = sub.dim();
    if target_m < n {
        return Err(
            Error::invalid(format!("target size {target_m} is below the dimension {n}")).into(),
        );
    }
    let budget_c = match opts.schedule {
        ThetaSchedule::Budget { epsilon } => {
            if !(epsilon > 0.0) {
                return Err(Error::invalid("epsilon must be positive").into());
            }
            budget_constant(epsilon, n, sub.size(), target_m, p)
        }
        _ => 0.0,
    };

    let mut trace = ReductionTrace::identity(sub);
    let mut current = sub.clone();
    let mut stage = 0;
    while current.size() > target_m {
        let fail = |error: Error, trace: &ReductionTrace| ReductionFailure {
            error,
            partial: Some(Box::new(trace.clone())),
        };
        let size_before = current.size();
        let lewis = lewis_density(&current, p, &opts.lewis).map_err(|e| fail(e, &trace))?;
        let alpha = blend_density(&lewis.beta, current.space()).map_err(|e| fail(e, &trace))?;
        let tilde = change_density(&current, &alpha, p).map_err(|e| fail(e, &trace))?;
        let (_, split) = split_atoms(&tilde).map_err(|e| fail(e, &trace))?;
        let size_split = split.size();
        let theta_max = match opts.schedule {
            ThetaSchedule::Constant { theta } => theta,
            ThetaSchedule::Sqrt { c } => 0.5 + c * (n as f64 / size_split as f64).sqrt(),
            ThetaSchedule::Budget { .. } => 0.5 + budget_c * (n as f64 / size_split as f64).sqrt(),
        }
        .min(THETA_CAP);
        let halving = halve(
            &split,
            p,
            theta_max,
            opts.retry_budget,
            opts.probes,
            rng::derive_seed(seed, stage as u64),
        )
        .map_err(|e| fail(e, &trace))?;

        let theta = halving.distortion.theta;
        let [r1, r2] = halving.distortion.part_ratios;
        let distortion = (2.0 * theta).powf(1.0 / p);
        let two_sided = (r1 / (1.0 - r2)).powf(1.0 / p);
        trace.cumulative_distortion *= distortion;
        trace.two_sided_bound *= two_sided;
        trace.stages.push(StageRecord {
            stage,
            size_before,
            size_split,
            size_after: halving.restricted.size(),
            beta_residual: lewis.residual,
            lewis_iterations: lewis.iterations,
            theta_max,
            partition_ratio: theta,
            part_ratios: halving.distortion.part_ratios,
            retries: halving.retries,
            distortion,
            two_sided,
        });
        current = halving.restricted;
        trace.final_basis = current.clone();
        stage += 1;
    }
    Ok(trace)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeasuredDistortion {
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// `max_ratio / min_ratio`.
    pub distortion: f64,
}

/// Compares `‖embedded·c‖_p / ‖original·c‖_p` over `samples` coefficient
/// vectors `c`, drawn so that `original·c` is uniform on its `L_2` sphere.
pub fn measure_distortion(
    original: &Subspace,
    embedded: &Subspace,
    p: f64,
    samples: usize,
    seed: u64,
) -> Result<MeasuredDistortion> {
    check_finite_exponent(p)?;
    if original.dim() != embedded.dim() {
        return Err(Error::DimensionMismatch {
            expected: original.dim(),
            found: embedded.dim(),
        });
    }
    let q = original.l2_orthonormal_basis();
    // Coefficients of q in the original basis.
    let to_coeffs = original
        .basis()
        .clone()
        .svd(true, true)
        .solve(&q, 1e-14)
        .map_err(|e| Error::invalid(e.to_string()))?;
    let mut r = rng::rng(seed);
    let n = original.dim();
    let g = rng::gaussian_matrix(&mut r, n, samples.max(1));
    let coeffs: DMatrix<f64> = to_coeffs * g;
    let before = original.basis() * &coeffs;
    let after = embedded.basis() * &coeffs;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for j in 0..coeffs.ncols() {
        let a = lp_pow(before.column(j).as_slice(), original.space().weights(), p).powf(1.0 / p);
        let b = lp_pow(after.column(j).as_slice(), embedded.space().weights(), p).powf(1.0 / p);
        let ratio = b / a;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    Ok(MeasuredDistortion {
        min_ratio: lo,
        max_ratio: hi,
        distortion: hi / lo,
    })
}
