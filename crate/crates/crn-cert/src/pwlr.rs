//! Piecewise-linear-in-rates Lyapunov certificates.
//!
//! A certificate is a coefficient matrix C (one row per paired region of a
//! conic partition) such that V(x) = |c_k . R(x)| on region k decreases along
//! every admissible kinetics. Checking a candidate C reduces to one small LP
//! per rank-one vertex of the rate-space inclusion; constructing C from
//! scratch is a single joint LP over (C, region multipliers, continuity
//! multipliers). Both forms are implemented, plus the convex (Metzler) and
//! l1 variants.
//!
//! Kernel identities are exact: the synthesized C is rebuilt in rational
//! arithmetic as c_k = xi_k' Sigma_k H from the LP solution, which makes
//! ker Gamma a subset of ker C by construction; equality then reduces to an
//! exact rank comparison.

use crate::exact::{self, ExactMat, Rat};
use crate::lp::{lp_feasible, LinearProgram, LpError, LpOutcome};
use crate::model::{rank_one_decomposition, RankOneDecomposition, ReactionNetwork};
use crate::par;
use crate::partition::ConicPartition;
use num::{BigInt, One, Signed, Zero};

/// LP size guard for synthesis.
pub const MAX_LP_VARS: usize = 100_000;

/// Synthesized xi entries are rounded to this denominator before the exact
/// rebuild of C; coarse enough for readable rationals, fine enough (2^-40)
/// to keep continuity residuals far below the 1e-9 test tolerance.
const XI_DENOM_BITS: u32 = 40;

#[derive(Clone, Debug)]
pub struct PwlrCertificate {
    /// (m/2) x nu coefficient matrix, exact
    pub c: ExactMat,
    pub partition: ConicPartition,
    /// per vertex: (m/2) x p multipliers from the row-form check
    pub multipliers: Vec<Vec<Vec<f64>>>,
    pub convex: bool,
    /// per vertex: m x m Metzler multipliers (convex form only)
    pub metzler: Option<Vec<Vec<Vec<f64>>>>,
    /// per vertex: (m/2) x (m/2) reduced multipliers with mu_inf <= 0
    pub lambda_tilde: Option<Vec<Vec<Vec<f64>>>>,
    /// region scaling vectors from synthesis (c_k = xi_k' Sigma_k H)
    pub xi: Vec<Vec<Rat>>,
    /// continuity multipliers from synthesis, keyed (region, neighbor)
    pub eta: Vec<((usize, usize), f64)>,
    c_f64: Vec<Vec<f64>>,
}

impl PwlrCertificate {
    pub fn half(&self) -> usize {
        self.c.nrows()
    }

    pub fn c_rows_f64(&self) -> &[Vec<f64>] {
        &self.c_f64
    }

    /// V as a function of a rate-space vector r.
    pub fn evaluate(&self, r: &[f64]) -> f64 {
        if self.convex {
            self.c_f64
                .iter()
                .map(|row| dot(row, r).abs())
                .fold(0.0, f64::max)
        } else {
            let k = self.partition.region_of_f64(r);
            let k = k.min(self.partition.m - 1 - k);
            dot(&self.c_f64[k], r).abs()
        }
    }

    pub fn from_parts(c: ExactMat, partition: ConicPartition, convex: bool) -> Self {
        let c_f64 = c.to_f64_rows();
        PwlrCertificate {
            c,
            partition,
            multipliers: Vec::new(),
            convex,
            metzler: None,
            lambda_tilde: None,
            xi: Vec::new(),
            eta: Vec::new(),
            c_f64,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// (C Gamma^ell) for the rank-one vertex ell: column j_ell of C times row
/// i_ell of Gamma, exact.
fn c_gamma_vertex(c: &ExactMat, net: &ReactionNetwork, v: &crate::model::VertexMatrix) -> ExactMat {
    let h = c.nrows();
    let nu = net.n_reactions();
    let mut out = ExactMat::zeros(h, nu);
    for k in 0..h {
        let ck = c.get(k, v.reaction);
        if ck.is_zero() {
            continue;
        }
        for col in 0..nu {
            out.set(k, col, ck * exact::rat_from_i64(net.gamma[v.species][col]));
        }
    }
    out
}

#[derive(Clone, Debug)]
pub enum VerifyOutcome {
    Valid { multipliers: Vec<Vec<Vec<f64>>> },
    KernelMismatch,
    /// first vertex (0-based) whose multiplier LP is infeasible
    VertexInfeasible { vertex: usize },
}

impl VerifyOutcome {
    pub fn is_valid(&self) -> bool {
        matches!(self, VerifyOutcome::Valid { .. })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PwlrError {
    #[error("C has {got} columns, partition space has {expect}")]
    ShapeMismatch { expect: usize, got: usize },
    #[error("synthesis LP would need {0} variables (limit {MAX_LP_VARS})")]
    TooLarge(usize),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Row-form certificate check: ker C == ker Gamma exactly, and for every
/// rank-one vertex a multiplier family with Lambda H = -C Gamma^ell where
/// each signed row lambda_k Sigma_k is nonnegative with at least one positive
/// entry (encoded as a unit lower bound on its sum; the constraint set is a
/// cone). Vertices whose Gamma row is zero freeze the flow and need no
/// multiplier.
pub fn verify_certificate(
    net: &ReactionNetwork,
    part: &ConicPartition,
    c: &ExactMat,
) -> Result<VerifyOutcome, PwlrError> {
    let nu = net.n_reactions();
    if c.ncols() != nu || part.h.ncols() != nu {
        return Err(PwlrError::ShapeMismatch { expect: nu, got: c.ncols() });
    }
    if !exact::equal_kernels(c, &net.gamma_exact()).unwrap_or(false) {
        return Ok(VerifyOutcome::KernelMismatch);
    }
    let dec = rank_one_decomposition(net);
    let h = c.nrows();
    let p = part.p();
    let h_rows = part.h.to_f64_rows();

    let results: Vec<Result<Option<Vec<Vec<f64>>>, LpError>> =
        par::map(&dec.entries, |vertex| {
            if net.gamma[vertex.species].iter().all(|&g| g == 0) {
                return Ok(Some(vec![vec![0.0; p]; h]));
            }
            let rhs = c_gamma_vertex(c, net, vertex).to_f64_rows();
            let mut lp = LinearProgram::new(h * p);
            let lam = |k: usize, i: usize| k * p + i;
            for k in 0..h {
                for col in 0..nu {
                    let mut row = vec![0.0; h * p];
                    for i in 0..p {
                        row[lam(k, i)] = h_rows[i][col];
                    }
                    lp.eq_row(row, -rhs[k][col]);
                }
                for i in 0..p {
                    lp.bound(lam(k, i), part.full_sign(k, i) as f64, 0.0);
                }
                let mut strict = vec![0.0; h * p];
                for i in 0..p {
                    strict[lam(k, i)] = part.full_sign(k, i) as f64;
                }
                lp.ge_row(strict, 1.0);
            }
            match lp_feasible(&lp)? {
                LpOutcome::Feasible { point, .. } => {
                    let rows = (0..h).map(|k| point[k * p..(k + 1) * p].to_vec()).collect();
                    Ok(Some(rows))
                }
                LpOutcome::Infeasible => Ok(None),
            }
        });

    let mut multipliers = Vec::with_capacity(dec.len());
    for (ell, res) in results.into_iter().enumerate() {
        match res? {
            Some(m) => multipliers.push(m),
            None => return Ok(VerifyOutcome::VertexInfeasible { vertex: ell }),
        }
    }
    Ok(VerifyOutcome::Valid { multipliers })
}

#[derive(Clone, Debug)]
pub enum ConvexOutcome {
    Valid {
        metzler: Vec<Vec<Vec<f64>>>,
        lambda_tilde: Vec<Vec<Vec<f64>>>,
    },
    KernelMismatch,
    VertexInfeasible { vertex: usize },
}

impl ConvexOutcome {
    pub fn is_valid(&self) -> bool {
        matches!(self, ConvexOutcome::Valid { .. })
    }
}

/// Convex-form check: per vertex a Metzler multiplier Lambda with zero row
/// sums and Lambda Ct = Ct Gamma^ell over the stacked matrix Ct = [C; -C].
/// The reduced multiplier (upper-left block minus upper-right block) then
/// satisfies C Gamma^ell = Lt C and mu_inf(Lt) <= 0; the first identity is
/// re-checked numerically after the solve, which also pins down the block
/// convention.
pub fn verify_convex(net: &ReactionNetwork, c: &ExactMat) -> Result<ConvexOutcome, PwlrError> {
    let nu = net.n_reactions();
    if c.ncols() != nu {
        return Err(PwlrError::ShapeMismatch { expect: nu, got: c.ncols() });
    }
    if !exact::equal_kernels(c, &net.gamma_exact()).unwrap_or(false) {
        return Ok(ConvexOutcome::KernelMismatch);
    }
    let dec = rank_one_decomposition(net);
    let h = c.nrows();
    let m = 2 * h;
    let c_f64 = c.to_f64_rows();
    let mut ct = c_f64.clone();
    ct.extend(c_f64.iter().map(|row| row.iter().map(|&x| -x).collect::<Vec<f64>>()));

    let results: Vec<Result<Option<Vec<Vec<f64>>>, LpError>> = par::map(&dec.entries, |vertex| {
        let rhs_half = c_gamma_vertex(c, net, vertex).to_f64_rows();
        let mut lp = LinearProgram::new(m * m);
        let idx = |a: usize, b: usize| a * m + b;
        for a in 0..m {
            let rhs_row: Vec<f64> = if a < h {
                rhs_half[a].clone()
            } else {
                rhs_half[a - h].iter().map(|&x| -x).collect()
            };
            for col in 0..nu {
                let mut row = vec![0.0; m * m];
                for b in 0..m {
                    row[idx(a, b)] = ct[b][col];
                }
                lp.eq_row(row, rhs_row[col]);
            }
            let mut ones = vec![0.0; m * m];
            for b in 0..m {
                ones[idx(a, b)] = 1.0;
            }
            lp.eq_row(ones, 0.0);
            for b in 0..m {
                if a != b {
                    lp.bound(idx(a, b), 1.0, 0.0);
                }
            }
        }
        match lp_feasible(&lp)? {
            LpOutcome::Feasible { point, .. } => {
                let rows: Vec<Vec<f64>> =
                    (0..m).map(|a| point[a * m..(a + 1) * m].to_vec()).collect();
                Ok(Some(metzler_snap(rows)))
            }
            LpOutcome::Infeasible => Ok(None),
        }
    });

    let mut metzler = Vec::with_capacity(dec.len());
    let mut lambda_tilde = Vec::with_capacity(dec.len());
    for (ell, res) in results.into_iter().enumerate() {
        match res? {
            Some(lam) => {
                let lt: Vec<Vec<f64>> = (0..h)
                    .map(|k| (0..h).map(|j| lam[k][j] - lam[k][j + h]).collect())
                    .collect();
                debug_assert!(
                    lambda_tilde_residual(&lt, &c_f64, net, &dec, ell) < 1e-6,
                    "reduced multiplier does not reproduce C Gamma^ell"
                );
                metzler.push(lam);
                lambda_tilde.push(lt);
            }
            None => return Ok(ConvexOutcome::VertexInfeasible { vertex: ell }),
        }
    }
    Ok(ConvexOutcome::Valid { metzler, lambda_tilde })
}

/// Clamp Metzler off-diagonals at zero and rebalance each diagonal so row
/// sums vanish exactly in f64; keeps mu_inf of the reduced block certifiably
/// nonpositive instead of drifting on LP slack.
fn metzler_snap(mut lam: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let m = lam.len();
    for a in 0..m {
        for b in 0..m {
            if a != b && lam[a][b] < 0.0 {
                lam[a][b] = 0.0;
            }
        }
        let off: f64 = (0..m).filter(|&b| b != a).map(|b| lam[a][b]).sum();
        lam[a][a] = -off;
    }
    lam
}

fn lambda_tilde_residual(
    lt: &[Vec<f64>],
    c_f64: &[Vec<f64>],
    net: &ReactionNetwork,
    dec: &RankOneDecomposition,
    ell: usize,
) -> f64 {
    let h = c_f64.len();
    let nu = net.n_reactions();
    let v = &dec.entries[ell];
    let mut worst = 0.0f64;
    for k in 0..h {
        for col in 0..nu {
            let lhs = c_f64[k][v.reaction] * net.gamma[v.species][col] as f64;
            let rhs: f64 = (0..h).map(|j| lt[k][j] * c_f64[j][col]).sum();
            worst = worst.max((lhs - rhs).abs());
        }
    }
    worst
}

/// l1-form check: per vertex, a reduced multiplier with C Gamma^ell = Lt C
/// whose column sums m_kk + sum_{j != k} |m_jk| are all nonpositive.
pub fn verify_l1(net: &ReactionNetwork, c: &ExactMat) -> Result<bool, PwlrError> {
    let nu = net.n_reactions();
    if c.ncols() != nu {
        return Err(PwlrError::ShapeMismatch { expect: nu, got: c.ncols() });
    }
    let dec = rank_one_decomposition(net);
    let h = c.nrows();
    let c_f64 = c.to_f64_rows();

    let results: Vec<Result<bool, LpError>> = par::map(&dec.entries, |vertex| {
        let rhs = c_gamma_vertex(c, net, vertex).to_f64_rows();
        // variables: Lt (h x h) then t (h x h envelope for |Lt| off-diagonal)
        let nv = 2 * h * h;
        let li = |a: usize, b: usize| a * h + b;
        let ti = |a: usize, b: usize| h * h + a * h + b;
        let mut lp = LinearProgram::new(nv);
        for k in 0..h {
            for col in 0..nu {
                let mut row = vec![0.0; nv];
                for b in 0..h {
                    row[li(k, b)] = c_f64[b][col];
                }
                lp.eq_row(row, rhs[k][col]);
            }
        }
        for a in 0..h {
            for b in 0..h {
                if a == b {
                    continue;
                }
                let mut r1 = vec![0.0; nv];
                r1[ti(a, b)] = 1.0;
                r1[li(a, b)] = -1.0;
                lp.ge_row(r1, 0.0);
                let mut r2 = vec![0.0; nv];
                r2[ti(a, b)] = 1.0;
                r2[li(a, b)] = 1.0;
                lp.ge_row(r2, 0.0);
            }
        }
        // column log-norm: Lt_kk + sum_{j != k} t_jk <= 0
        for k in 0..h {
            let mut row = vec![0.0; nv];
            row[li(k, k)] = -1.0;
            for j in 0..h {
                if j != k {
                    row[ti(j, k)] = -1.0;
                }
            }
            lp.ge_row(row, 0.0);
        }
        Ok(lp_feasible(&lp)?.is_feasible())
    });

    for res in results {
        if !res? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug)]
pub enum SynthesisOutcome {
    Found(Box<PwlrCertificate>),
    /// the joint LP is infeasible: no certificate exists over this partition
    Infeasible,
    /// LP feasible but the exact kernel condition failed after bounded repair
    ConditionalInfeasible { rounds: usize },
}

/// One LP over (C, xi, eta, Lambda): region consistency c_k = xi_k' Sigma_k H,
/// flow conditions C Gamma^ell = -Lambda^ell H with signed-nonnegative
/// multiplier rows, continuity across neighboring regions, and an l1-norm
/// surrogate objective for small coefficients. `convex` additionally forces
/// the continuity multipliers nonnegative and populates the Metzler data.
pub fn synthesize(
    net: &ReactionNetwork,
    part: &ConicPartition,
    convex: bool,
) -> Result<SynthesisOutcome, PwlrError> {
    let nu = net.n_reactions();
    let p = part.p();
    let h = part.half();
    let dec = rank_one_decomposition(net);
    let s = dec.len();

    // one continuity multiplier per region k < m/2 and neighbor j
    let pairs: Vec<(usize, usize, usize)> = (0..h)
        .flat_map(|k| part.neighbors[k].iter().map(move |&(j, s_idx)| (k, j, s_idx)))
        .collect();

    let n_c = h * nu;
    let n_xi = h * p;
    let n_lam = s * h * p;
    let n_eta = pairs.len();
    let n_abs = h * nu;
    let total = n_c + n_xi + n_lam + n_eta + n_abs;
    if total > MAX_LP_VARS {
        return Err(PwlrError::TooLarge(total));
    }

    let ci = |k: usize, col: usize| k * nu + col;
    let xii = |k: usize, i: usize| n_c + k * p + i;
    let lami = |ell: usize, k: usize, i: usize| n_c + n_xi + (ell * h + k) * p + i;
    let etai = |q: usize| n_c + n_xi + n_lam + q;
    let absi = |k: usize, col: usize| n_c + n_xi + n_lam + n_eta + k * nu + col;

    let h_rows = part.h.to_f64_rows();

    let build = |cuts: &[(Vec<f64>, usize, f64)]| {
        let mut lp = LinearProgram::new(total);
        for k in 0..h {
            for col in 0..nu {
                let mut row = vec![0.0; total];
                row[ci(k, col)] = 1.0;
                for i in 0..p {
                    row[xii(k, i)] = -(part.full_sign(k, i) as f64) * h_rows[i][col];
                }
                lp.eq_row(row, 0.0);
            }
            for i in 0..p {
                lp.bound(xii(k, i), 1.0, 0.0);
            }
            let mut ones = vec![0.0; total];
            for i in 0..p {
                ones[xii(k, i)] = 1.0;
            }
            // margin over the unit bound so the exact rebuild stays >= 1
            lp.ge_row(ones, 1.0 + 1e-6);
        }
        for (ell, vertex) in dec.entries.iter().enumerate() {
            for k in 0..h {
                for col in 0..nu {
                    let mut row = vec![0.0; total];
                    row[ci(k, vertex.reaction)] += net.gamma[vertex.species][col] as f64;
                    for i in 0..p {
                        row[lami(ell, k, i)] += h_rows[i][col];
                    }
                    lp.eq_row(row, 0.0);
                }
                for i in 0..p {
                    lp.bound(lami(ell, k, i), 1.0, 0.0);
                    lp.bound(lami(ell, k, i), part.full_sign(k, i) as f64, 0.0);
                }
            }
        }
        for (q, &(k, j, s_idx)) in pairs.iter().enumerate() {
            let sigma = part.full_sign(k, s_idx) as f64;
            let (j_row, j_sign) = if j < h { (j, 1.0) } else { (part.m - 1 - j, -1.0) };
            for col in 0..nu {
                let mut row = vec![0.0; total];
                row[ci(k, col)] += 1.0;
                row[ci(j_row, col)] -= j_sign;
                row[etai(q)] = -sigma * h_rows[s_idx][col];
                lp.eq_row(row, 0.0);
            }
            if convex {
                lp.bound(etai(q), 1.0, 0.0);
            }
        }
        for k in 0..h {
            for col in 0..nu {
                let mut r1 = vec![0.0; total];
                r1[absi(k, col)] = 1.0;
                r1[ci(k, col)] = -1.0;
                lp.ge_row(r1, 0.0);
                let mut r2 = vec![0.0; total];
                r2[absi(k, col)] = 1.0;
                r2[ci(k, col)] = 1.0;
                lp.ge_row(r2, 0.0);
            }
        }
        for (coeffs, k, sign) in cuts {
            let mut row = vec![0.0; total];
            for (col, &v) in coeffs.iter().enumerate() {
                row[ci(*k, col)] = v * sign;
            }
            lp.ge_row(row, 1.0);
        }
        let mut obj = vec![0.0; total];
        for k in 0..h {
            for col in 0..nu {
                obj[absi(k, col)] = 1.0;
            }
        }
        lp.objective = Some(obj);
        lp
    };

    let gamma_exact = net.gamma_exact();
    let gamma_rank = gamma_exact.rank();
    let mut cuts: Vec<(Vec<f64>, usize, f64)> = Vec::new();

    for round in 0..=3 {
        let lp = build(&cuts);
        let point = match lp_feasible(&lp)? {
            LpOutcome::Feasible { point, .. } => point,
            LpOutcome::Infeasible => {
                return Ok(if round == 0 {
                    SynthesisOutcome::Infeasible
                } else {
                    SynthesisOutcome::ConditionalInfeasible { rounds: round }
                });
            }
        };

        // exact rebuild: xi rounded to a dyadic grid, then c_k = xi_k' Sigma_k H
        let xi: Vec<Vec<Rat>> = (0..h)
            .map(|k| (0..p).map(|i| round_dyadic(point[xii(k, i)].max(0.0))).collect())
            .collect();
        let mut c_rows: Vec<Vec<Rat>> = Vec::with_capacity(h);
        for k in 0..h {
            let mut row = vec![Rat::zero(); nu];
            for i in 0..p {
                if xi[k][i].is_zero() {
                    continue;
                }
                let sgn = exact::rat_from_i64(part.full_sign(k, i) as i64);
                for col in 0..nu {
                    let v = row[col].clone() + &xi[k][i] * &sgn * part.h.get(i, col);
                    row[col] = v;
                }
            }
            c_rows.push(row);
        }
        let c = ExactMat::from_rat_rows(c_rows);

        if c.rank() == gamma_rank {
            let eta = pairs
                .iter()
                .enumerate()
                .map(|(q, &(k, j, _))| ((k, j), point[etai(q)]))
                .collect();
            let mut cert = PwlrCertificate {
                c_f64: c.to_f64_rows(),
                c,
                partition: part.clone(),
                multipliers: Vec::new(),
                convex,
                metzler: None,
                lambda_tilde: None,
                xi,
                eta,
            };
            match verify_certificate(net, part, &cert.c)? {
                VerifyOutcome::Valid { multipliers } => cert.multipliers = multipliers,
                _ => return Ok(SynthesisOutcome::ConditionalInfeasible { rounds: round }),
            }
            if convex {
                match verify_convex(net, &cert.c)? {
                    ConvexOutcome::Valid { metzler, lambda_tilde } => {
                        cert.metzler = Some(metzler);
                        cert.lambda_tilde = Some(lambda_tilde);
                    }
                    _ => return Ok(SynthesisOutcome::ConditionalInfeasible { rounds: round }),
                }
            }
            return Ok(SynthesisOutcome::Found(Box::new(cert)));
        }

        // kernel excess: cut against a direction in ker C \ ker Gamma,
        // alternating target region and sign across rounds
        let excess = c
            .kernel_basis()
            .into_iter()
            .find(|v| !gamma_exact.matvec(v).iter().all(|x| x.is_zero()));
        let Some(v) = excess else {
            return Ok(SynthesisOutcome::ConditionalInfeasible { rounds: round + 1 });
        };
        let vf: Vec<f64> = v.iter().map(exact::rat_to_f64).collect();
        let k_target = round % h;
        let sign = if round % 2 == 0 { 1.0 } else { -1.0 };
        cuts.push((vf, k_target, sign));
    }
    Ok(SynthesisOutcome::ConditionalInfeasible { rounds: 3 })
}

fn round_dyadic(x: f64) -> Rat {
    let scale = (1u64 << XI_DENOM_BITS) as f64;
    let num = (x * scale).round() as i64;
    Rat::new(BigInt::from(num), BigInt::from(1u64 << XI_DENOM_BITS))
}

/// Partition over H = Gamma, then synthesize.
pub fn synthesize_default(
    net: &ReactionNetwork,
    convex: bool,
) -> Result<SynthesisOutcome, SynthesizeDefaultError> {
    let gamma = net.gamma_exact();
    let part = crate::partition::enumerate_regions(gamma.clone(), &gamma)?;
    Ok(synthesize(net, &part, convex)?)
}

#[derive(Debug, thiserror::Error)]
pub enum SynthesizeDefaultError {
    #[error(transparent)]
    Partition(#[from] crate::partition::PartitionError),
    #[error(transparent)]
    Pwlr(#[from] PwlrError),
}

/// Exact check of the stored region scalings: xi >= 0 with unit row sums.
pub fn region_consistency_holds(cert: &PwlrCertificate) -> bool {
    if cert.xi.is_empty() {
        return false;
    }
    cert.xi.iter().all(|row| {
        row.iter().all(|x| !x.is_negative())
            && row.iter().fold(Rat::zero(), |a, b| a + b) >= Rat::one()
    })
}
