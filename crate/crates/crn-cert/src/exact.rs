//! Exact rational linear algebra: kernels, ranks, minors and linear solves.
//!
//! Certificate validity hinges on exact kernel equalities, so everything in
//! this module runs over arbitrary-precision rationals. Floating-point inputs
//! are converted exactly (every finite f64 is a rational), never rounded.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use std::fmt;

pub type Rat = BigRational;

/// Exact conversion; panics on NaN/infinite input.
pub fn rat_from_f64(x: f64) -> Rat {
    BigRational::from_float(x).expect("finite float required for exact conversion")
}

pub fn rat_from_i64(x: i64) -> Rat {
    BigRational::from_integer(BigInt::from(x))
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    let num = r.numer();
    let den = r.denom();
    // Good enough for desk-scale magnitudes; avoids BigInt->f64 overflow games.
    let fnum: f64 = num.to_string().parse().unwrap_or(f64::NAN);
    let fden: f64 = den.to_string().parse().unwrap_or(f64::NAN);
    fnum / fden
}

/// Dense matrix of exact rationals, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct ExactMat {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl fmt::Debug for ExactMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ExactMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl ExactMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExactMat { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rat::one());
        }
        m
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let data = rows.iter().flatten().map(|&x| rat_from_i64(x)).collect();
        ExactMat { rows: r, cols: c, data }
    }

    pub fn from_f64_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let data = rows.iter().flatten().map(|&x| rat_from_f64(x)).collect();
        ExactMat { rows: r, cols: c, data }
    }

    pub fn from_rat_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        ExactMat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows_vec(&self) -> Vec<Vec<Rat>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(rat_to_f64).collect())
            .collect()
    }

    pub fn transpose(&self) -> ExactMat {
        let mut t = ExactMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn matmul(&self, other: &ExactMat) -> ExactMat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matmul");
        let mut out = ExactMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in matvec");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(Rat::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Reduced row echelon form; returns (rref, pivot column indices).
    pub fn rref(&self) -> (ExactMat, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            // partial search for a nonzero pivot
            let mut sel = None;
            for i in r..m.rows {
                if !m.get(i, c).is_zero() {
                    sel = Some(i);
                    break;
                }
            }
            let Some(sel) = sel else { continue };
            m.swap_rows(r, sel);
            let inv = m.get(r, c).clone();
            for j in c..m.cols {
                let v = m.get(r, j) / &inv;
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i != r && !m.get(i, c).is_zero() {
                    let f = m.get(i, c).clone();
                    for j in c..m.cols {
                        let v = m.get(i, j) - &f * m.get(r, j);
                        m.set(i, j, v);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the (right) null space; empty iff the kernel is trivial.
    pub fn kernel_basis(&self) -> Vec<Vec<Rat>> {
        let (rref, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Vec::with_capacity(free.len());
        for &fc in &free {
            let mut v = vec![Rat::zero(); self.cols];
            v[fc] = Rat::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -rref.get(r, fc).clone();
            }
            basis.push(v);
        }
        basis
    }

    /// Basis of the left null space, i.e. kernel of the transpose.
    pub fn left_kernel_basis(&self) -> Vec<Vec<Rat>> {
        self.transpose().kernel_basis()
    }

    /// A particular solution of `self * x = b`, if one exists.
    pub fn solve(&self, b: &[Rat]) -> Option<Vec<Rat>> {
        assert_eq!(b.len(), self.rows, "rhs length mismatch");
        let mut aug = ExactMat::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, self.cols, b[i].clone());
        }
        let (rref, pivots) = aug.rref();
        // inconsistent iff a pivot lands in the augmented column
        if pivots.contains(&self.cols) {
            return None;
        }
        let mut x = vec![Rat::zero(); self.cols];
        for (r, &pc) in pivots.iter().enumerate() {
            x[pc] = rref.get(r, self.cols).clone();
        }
        Some(x)
    }

    /// Exact determinant of the square submatrix with the given row/column index sets.
    pub fn minor(&self, row_idx: &[usize], col_idx: &[usize]) -> Rat {
        assert_eq!(row_idx.len(), col_idx.len(), "minor needs |I| == |J|");
        let k = row_idx.len();
        assert!(
            row_idx.iter().all(|&i| i < self.rows) && col_idx.iter().all(|&j| j < self.cols),
            "minor index out of range"
        );
        let mut sub = ExactMat::zeros(k, k);
        for (a, &i) in row_idx.iter().enumerate() {
            for (b, &j) in col_idx.iter().enumerate() {
                sub.set(a, b, self.get(i, j).clone());
            }
        }
        sub.det()
    }

    /// Exact determinant by fraction-preserving Gaussian elimination.
    pub fn det(&self) -> Rat {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Rat::one();
        for c in 0..n {
            let mut sel = None;
            for i in c..n {
                if !m.get(i, c).is_zero() {
                    sel = Some(i);
                    break;
                }
            }
            let Some(sel) = sel else { return Rat::zero() };
            if sel != c {
                m.swap_rows(c, sel);
                det = -det;
            }
            let p = m.get(c, c).clone();
            det *= &p;
            for i in c + 1..n {
                if m.get(i, c).is_zero() {
                    continue;
                }
                let f = m.get(i, c) / &p;
                for j in c..n {
                    let v = m.get(i, j) - &f * m.get(c, j);
                    m.set(i, j, v);
                }
            }
        }
        det
    }
}

/// True iff the null spaces of `a` and `b` coincide (mutual containment, exact).
pub fn equal_kernels(a: &ExactMat, b: &ExactMat) -> Result<bool, KernelDimError> {
    if a.ncols() != b.ncols() {
        return Err(KernelDimError { left: a.ncols(), right: b.ncols() });
    }
    let ka = a.kernel_basis();
    let kb = b.kernel_basis();
    if ka.len() != kb.len() {
        return Ok(false);
    }
    let contained = |basis: &[Vec<Rat>], m: &ExactMat| {
        basis
            .iter()
            .all(|v| m.matvec(v).iter().all(|x| x.is_zero()))
    };
    Ok(contained(&ka, b) && contained(&kb, a))
}

#[derive(Debug, thiserror::Error)]
#[error("kernel comparison needs equal column counts ({left} vs {right})")]
pub struct KernelDimError {
    pub left: usize,
    pub right: usize,
}

/// Dot product of exact vectors.
pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(Rat::zero(), |acc, (x, y)| acc + x * y)
}

/// Scale a vector so its first nonzero entry is +1 (canonical kernel representative).
pub fn normalize_leading(v: &mut [Rat]) {
    if let Some(p) = v.iter().position(|x| !x.is_zero()) {
        let lead = v[p].clone();
        for x in v.iter_mut() {
            *x /= &lead;
        }
    }
}

/// Sign of a rational: -1, 0 or 1.
pub fn sign(r: &Rat) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gamma_rev() -> ExactMat {
        ExactMat::from_i64_rows(&[vec![-1, 1], vec![1, -1]])
    }

    #[test]
    fn kernel_of_reversible_exchange() {
        let k = gamma_rev().kernel_basis();
        assert_eq!(k.len(), 1);
        let mut v = k[0].clone();
        normalize_leading(&mut v);
        assert_eq!(v, vec![rat_from_i64(1), rat_from_i64(1)]);
    }

    #[test]
    fn kernel_of_identity_is_trivial() {
        assert!(ExactMat::identity(3).kernel_basis().is_empty());
    }

    #[test]
    fn equal_kernels_examples() {
        let g = gamma_rev();
        assert!(equal_kernels(&g, &g).unwrap());
        let c = ExactMat::from_i64_rows(&[vec![-1, 1]]);
        assert!(equal_kernels(&g, &c).unwrap());
        let z = ExactMat::zeros(1, 2);
        assert!(!equal_kernels(&g, &z).unwrap());
        let wide = ExactMat::zeros(1, 3);
        assert!(equal_kernels(&g, &wide).is_err());
    }

    #[test]
    fn minor_examples() {
        let m = gamma_rev();
        assert_eq!(m.minor(&[0, 1], &[0, 1]), rat_from_i64(0));
        assert_eq!(m.minor(&[0], &[0]), rat_from_i64(-1));
        let id = ExactMat::identity(3);
        assert_eq!(id.minor(&[0, 1], &[0, 1]), rat_from_i64(1));
        assert_eq!(id.minor(&[0, 1], &[0, 2]), rat_from_i64(0));
    }

    #[test]
    fn rank_plus_nullity() {
        let m = ExactMat::from_i64_rows(&[vec![1, 2, 3], vec![2, 4, 6], vec![0, 1, 1]]);
        assert_eq!(m.rank() + m.kernel_basis().len(), m.ncols());
    }

    #[test]
    fn solve_particular() {
        let m = ExactMat::from_i64_rows(&[vec![1, 1], vec![1, -1]]);
        let b = vec![rat_from_i64(3), rat_from_i64(1)];
        let x = m.solve(&b).unwrap();
        assert_eq!(m.matvec(&x), b);
        // inconsistent system
        let s = ExactMat::from_i64_rows(&[vec![1, 1], vec![1, 1]]);
        assert!(s.solve(&[rat_from_i64(0), rat_from_i64(1)]).is_none());
    }

    #[test]
    fn float_conversion_is_exact() {
        let r = rat_from_f64(0.1);
        // 0.1 is not 1/10 in binary; conversion must preserve the exact bits
        assert_ne!(r, Rat::new(BigInt::from(1), BigInt::from(10)));
        assert_eq!(rat_to_f64(&r), 0.1);
    }

    // naive cofactor expansion, the independent oracle for det/minor
    fn cofactor_det(m: &[Vec<i64>]) -> i64 {
        let n = m.len();
        if n == 0 {
            return 1;
        }
        if n == 1 {
            return m[0][0];
        }
        let mut acc = 0i64;
        for j in 0..n {
            let sub: Vec<Vec<i64>> = m[1..]
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|(c, _)| *c != j)
                        .map(|(_, &v)| v)
                        .collect()
                })
                .collect();
            let s = if j % 2 == 0 { 1 } else { -1 };
            acc += s * m[0][j] * cofactor_det(&sub);
        }
        acc
    }

    #[test]
    fn det_matches_cofactor_oracle_small() {
        let cases = [
            vec![vec![2]],
            vec![vec![1, 2], vec![3, 4]],
            vec![vec![0, 1, 2], vec![3, 0, 1], vec![-2, 1, 0]],
            vec![
                vec![1, 0, -2, 3],
                vec![0, 2, 1, -1],
                vec![3, -3, 0, 2],
                vec![1, 1, 1, 1],
            ],
        ];
        for m in &cases {
            let em = ExactMat::from_i64_rows(m);
            assert_eq!(em.det(), rat_from_i64(cofactor_det(m)));
        }
    }

    proptest::proptest! {
        #[test]
        fn det_matches_cofactor_oracle_random(
            n in 1usize..=4,
            seed in proptest::collection::vec(-3i64..=3, 16),
        ) {
            let m: Vec<Vec<i64>> = (0..n).map(|i| seed[i * 4..i * 4 + n].to_vec()).collect();
            let em = ExactMat::from_i64_rows(&m);
            proptest::prop_assert_eq!(em.det(), rat_from_i64(cofactor_det(&m)));
        }

        #[test]
        fn kernel_vectors_annihilate(
            rows in 2usize..=4,
            cols in 2usize..=4,
            seed in proptest::collection::vec(-3i64..=3, 16),
        ) {
            let m: Vec<Vec<i64>> = (0..rows).map(|i| seed[i * 4..i * 4 + cols].to_vec()).collect();
            let em = ExactMat::from_i64_rows(&m);
            let basis = em.kernel_basis();
            proptest::prop_assert_eq!(em.rank() + basis.len(), cols);
            for v in basis {
                proptest::prop_assert!(em.matvec(&v).iter().all(|x| x.is_zero()));
            }
        }
    }
}
