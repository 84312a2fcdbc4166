//! Conic partitions of reaction space.
//!
//! A partitioning matrix H (kernel equal to ker Γ) splits R^nu into closed
//! sign cones W_k = {r : Σ_k H r ≥ 0}. Pairwise linearly dependent rows of H
//! are collapsed first; the surviving reduced rows index the sign vectors.
//! Regions are enumerated by an exhaustive sign-vector sweep with an LP
//! feasibility test per candidate (interior nonempty ⇔ {σ ⊙ H̃ r ≥ 1} feasible,
//! by scale invariance of the cone). Feasible signatures come in ± pairs and
//! are ordered so that signature k is the negation of signature m+1−k.

use crate::exact::{self, ExactMat, Rat};
use crate::lp::{lp_feasible, LinearProgram};
use crate::par;
use num::Zero;

/// Hard cap on the reduced row count: the sweep enumerates 2^p̃ sign vectors.
pub const MAX_REDUCED_ROWS: usize = 24;

#[derive(Clone, Debug)]
pub struct ConicPartition {
    /// p x nu partitioning matrix
    pub h: ExactMat,
    /// p̃ x nu matrix with pairwise linearly independent rows
    pub h_reduced: ExactMat,
    /// per original row: (reduced row index, relative sign vs the representative)
    pub row_map: Vec<(usize, i8)>,
    /// per reduced row: original index of its representative
    pub reduced_rep: Vec<usize>,
    /// region count (always even)
    pub m: usize,
    /// m reduced signatures; signatures[k] == -signatures[m-1-k]
    pub signatures: Vec<Vec<i8>>,
    /// m full signatures over the original p rows
    pub full_signatures: Vec<Vec<i8>>,
    /// per region: (neighbor region index, switched original H row index)
    pub neighbors: Vec<Vec<(usize, usize)>>,
    /// per region: an interior witness r* with σ ⊙ H̃ r* ≥ 1
    pub witnesses: Vec<Vec<f64>>,
}

#[derive(Debug, thiserror::Error)]
pub enum PartitionError {
    #[error("H row {0} is zero: defines no inequality")]
    ZeroRow(usize),
    #[error("H is empty")]
    EmptyH,
    #[error("ker H differs from ker Γ: H does not partition reaction space for this network")]
    KernelMismatch,
    #[error("reduced row count {0} exceeds the enumeration bound {MAX_REDUCED_ROWS}")]
    TooManyRows(usize),
    #[error("region enumeration found no feasible signature (H inconsistent)")]
    NoRegions,
}

/// Collapse pairwise linearly dependent rows of H. Returns the reduced matrix,
/// the per-row map (reduced index, relative sign) and the representatives.
pub fn reduce_rows(
    h: &ExactMat,
) -> Result<(ExactMat, Vec<(usize, i8)>, Vec<usize>), PartitionError> {
    if h.nrows() == 0 {
        return Err(PartitionError::EmptyH);
    }
    let mut reps: Vec<usize> = Vec::new();
    let mut row_map: Vec<(usize, i8)> = Vec::new();
    for i in 0..h.nrows() {
        let row = h.row(i);
        if row.iter().all(|x| x.is_zero()) {
            return Err(PartitionError::ZeroRow(i));
        }
        let mut assigned = None;
        for (t, &rep) in reps.iter().enumerate() {
            if let Some(sign) = dependent_sign(h.row(rep), row) {
                assigned = Some((t, sign));
                break;
            }
        }
        match assigned {
            Some(pair) => row_map.push(pair),
            None => {
                reps.push(i);
                row_map.push((reps.len() - 1, 1));
            }
        }
    }
    let reduced = ExactMat::from_rat_rows(reps.iter().map(|&i| h.row(i).to_vec()).collect());
    Ok((reduced, row_map, reps))
}

/// If v == c * u for a scalar c, the sign of c; None when independent.
fn dependent_sign(u: &[Rat], v: &[Rat]) -> Option<i8> {
    let p = u.iter().position(|x| !x.is_zero())?;
    if v[p].is_zero() {
        return None;
    }
    let c = &v[p] / &u[p];
    for (a, b) in u.iter().zip(v) {
        if *b != a * &c {
            return None;
        }
    }
    Some(exact::sign(&c))
}

/// Build the full partition for H over the network with stoichiometry `gamma`.
/// The caller-facing kernel precondition ker H == ker Γ is verified here.
pub fn enumerate_regions(h: ExactMat, gamma: &ExactMat) -> Result<ConicPartition, PartitionError> {
    if !exact::equal_kernels(&h, gamma).map_err(|_| PartitionError::KernelMismatch)? {
        return Err(PartitionError::KernelMismatch);
    }
    enumerate_regions_unchecked(h)
}

/// Same as [`enumerate_regions`] but trusts the caller on the kernel
/// precondition (used for tests on bare H matrices).
pub fn enumerate_regions_unchecked(h: ExactMat) -> Result<ConicPartition, PartitionError> {
    let (h_reduced, row_map, reduced_rep) = reduce_rows(&h)?;
    let p_red = h_reduced.nrows();
    if p_red > MAX_REDUCED_ROWS {
        return Err(PartitionError::TooManyRows(p_red));
    }
    let h_red_f64 = h_reduced.to_f64_rows();
    let nu = h_reduced.ncols();

    // Sweep sign vectors with leading +1; σ feasible iff −σ feasible, so each
    // hit yields a paired region. Encoding: bit b of the counter flips reduced
    // row b+1 (row 0 fixed at +1).
    let half_count = 1usize << (p_red - 1);
    let hits: Vec<Option<(Vec<i8>, Vec<f64>)>> = par::map_range(half_count, |code| {
        let sigma: Vec<i8> = (0..p_red)
            .map(|t| {
                if t == 0 {
                    1
                } else if code >> (t - 1) & 1 == 1 {
                    -1
                } else {
                    1
                }
            })
            .collect();
        interior_witness(&h_red_f64, &sigma, nu).map(|w| (sigma, w))
    });

    let mut pos: Vec<(Vec<i8>, Vec<f64>)> = hits.into_iter().flatten().collect();
    if pos.is_empty() {
        return Err(PartitionError::NoRegions);
    }
    // lexicographic order with +1 before -1 for determinism
    pos.sort_by(|a, b| {
        a.0.iter().map(|&s| -s).collect::<Vec<_>>().cmp(&b.0.iter().map(|&s| -s).collect())
    });

    let half = pos.len();
    let m = 2 * half;
    let mut signatures = Vec::with_capacity(m);
    let mut witnesses = Vec::with_capacity(m);
    for (sig, w) in &pos {
        signatures.push(sig.clone());
        witnesses.push(w.clone());
    }
    for k in (0..half).rev() {
        signatures.push(pos[k].0.iter().map(|&s| -s).collect());
        witnesses.push(pos[k].1.iter().map(|&x| -x).collect());
    }

    let full_signatures = signatures
        .iter()
        .map(|sig| row_map.iter().map(|&(t, s)| s * sig[t]).collect())
        .collect();

    let neighbors = neighbor_table(&signatures, &reduced_rep);

    Ok(ConicPartition {
        h,
        h_reduced,
        row_map,
        reduced_rep,
        m,
        signatures,
        full_signatures,
        neighbors,
        witnesses,
    })
}

fn interior_witness(h_red: &[Vec<f64>], sigma: &[i8], nu: usize) -> Option<Vec<f64>> {
    let mut lp = LinearProgram::new(nu);
    for (row, &s) in h_red.iter().zip(sigma) {
        let a: Vec<f64> = row.iter().map(|&x| s as f64 * x).collect();
        lp.ge_row(a, 1.0);
    }
    match lp_feasible(&lp) {
        Ok(out) => out.point().map(|p| p.to_vec()),
        Err(_) => None,
    }
}

/// Regions are adjacent iff their reduced signatures differ in exactly one
/// position; the switched index reported is the original H row of the flipped
/// reduced row's representative.
fn neighbor_table(signatures: &[Vec<i8>], reduced_rep: &[usize]) -> Vec<Vec<(usize, usize)>> {
    let m = signatures.len();
    let mut table = vec![Vec::new(); m];
    for k in 0..m {
        for j in k + 1..m {
            let diff: Vec<usize> = signatures[k]
                .iter()
                .zip(&signatures[j])
                .enumerate()
                .filter(|(_, (a, b))| a != b)
                .map(|(t, _)| t)
                .collect();
            if diff.len() == 1 {
                let switched = reduced_rep[diff[0]];
                table[k].push((j, switched));
                table[j].push((k, switched));
            }
        }
    }
    table
}

impl ConicPartition {
    pub fn p(&self) -> usize {
        self.h.nrows()
    }

    pub fn p_reduced(&self) -> usize {
        self.h_reduced.nrows()
    }

    pub fn half(&self) -> usize {
        self.m / 2
    }

    /// Index of the lowest region whose closed cone contains r (exact test);
    /// boundary vectors and zero belong to several regions, the lowest wins.
    pub fn region_of_f64(&self, r: &[f64]) -> usize {
        let rq: Vec<Rat> = r.iter().map(|&x| exact::rat_from_f64(x)).collect();
        self.region_of_exact(&rq)
    }

    pub fn region_of_exact(&self, r: &[Rat]) -> usize {
        let y = self.h_reduced.matvec(r);
        for (k, sig) in self.signatures.iter().enumerate() {
            if y.iter().zip(sig).all(|(v, &s)| {
                let sv = exact::sign(v);
                sv == 0 || sv == s
            }) {
                return k;
            }
        }
        // unreachable when the partition covers R^nu; guard for safety
        0
    }

    /// Full signature entry of region k at original H row idx.
    pub fn full_sign(&self, k: usize, idx: usize) -> i8 {
        self.full_signatures[k][idx]
    }
}
