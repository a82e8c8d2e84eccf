//! Walsh functions on the cube `G = {−1, 1}^n` and the subspace `E` spanned
//! by the characters of high degree.
//!
//! Point `b ∈ 0..2^n` of the cube has coordinate `g_i = −1` exactly when bit
//! `i` of `b` is set, so the character of a subset mask `S` is
//! `w_S(b) = (−1)^{popcount(b & S)}`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::measure::{DomainNorm, Subspace, WeightedSpace};
use crate::summing::{saturation_curve, FiniteRankOperator, SummingEstimate, SummingOptions};

pub const MAX_CUBE_DIM: usize = 14;
/// Cap on `2^n · dim E`, the number of stored basis entries.
pub const MAX_BASIS_ENTRIES: usize = 1 << 24;

#[derive(Debug, Clone)]
pub struct WalshSpace {
    pub cube_n: usize,
    pub m: usize,
    /// Subset masks with at least `n − m` elements, ascending.
    pub subsets: Vec<u32>,
    /// `E` on the uniform measure of the `2^n` points.
    pub subspace: Subspace,
}

impl WalshSpace {
    pub fn space(&self) -> &WeightedSpace {
        self.subspace.space()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        self.subspace.basis()
    }

    pub fn dim(&self) -> usize {
        self.subsets.len()
    }

    /// Whether `Σ_b w_S(b) w_T(b) = 2^n·[S = T]` for all pairs, in integers.
    pub fn gram_is_identity(&self) -> bool {
        let points = 1u64 << self.cube_n;
        self.subsets.iter().enumerate().all(|(a, &s)| {
            self.subsets[a..].iter().all(|&t| {
                let dot: i64 = (0..points).map(|b| character(b, s) * character(b, t)).sum();
                dot == if s == t { points as i64 } else { 0 }
            })
        })
    }
}

fn character(point: u64, mask: u32) -> i64 {
    if (point & mask as u64).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `Σ_{j ≥ n−m} C(n, j)`.
pub fn tail_dimension(n: usize, m: usize) -> usize {
    let mut binom = 1usize;
    let mut total = 0;
    for j in 0..=n {
        if j + m >= n {
            total += binom;
        }
        binom = binom * (n - j) / (j + 1);
    }
    total
}

/// `E = span{w_S : |S| ≥ n − m}`.
pub fn walsh_space(n: usize, m: usize) -> Result<WalshSpace> {
    if n > MAX_CUBE_DIM {
        return Err(Error::invalid(format!(
            "cube dimension {n} exceeds {MAX_CUBE_DIM}"
        )));
    }
    if m > n {
        return Err(Error::invalid(format!("m = {m} exceeds n = {n}")));
    }
    let points = 1usize << n;
    let dim = tail_dimension(n, m);
    if points * dim > MAX_BASIS_ENTRIES {
        return Err(Error::invalid(format!(
            "basis of {points}×{dim} entries exceeds the cap"
        )));
    }
    let subsets: Vec<u32> = (0..points as u32)
        .filter(|s| s.count_ones() as usize + m >= n)
        .collect();
    let basis = DMatrix::from_fn(points, dim, |b, j| character(b as u64, subsets[j]) as f64);
    let subspace = Subspace::from_orthogonal(WeightedSpace::uniform(points), basis);
    Ok(WalshSpace {
        cube_n: n,
        m,
        subsets,
        subspace,
    })
}

/// The identity from `E` with the maximum norm over the cube into `L_p` of
/// the uniform cube measure.
pub fn tail_identity_operator(ws: &WalshSpace, p: f64) -> Result<FiniteRankOperator> {
    FiniteRankOperator::new(
        ws.basis().clone(),
        DomainNorm::SupOnPoints(ws.subspace.clone()),
        ws.space().clone(),
        p,
    )
}

/// Saturation curve of the tail identity.
pub fn growth_experiment(
    n: usize,
    m: usize,
    p: f64,
    ks: &[usize],
    opts: &SummingOptions,
    seed: u64,
) -> Result<Vec<SummingEstimate>> {
    let ws = walsh_space(n, m)?;
    let u = tail_identity_operator(&ws, p)?;
    saturation_curve(&u, ks, p, opts, seed)
}
