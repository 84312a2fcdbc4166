//! Linear-programming feasibility and optimization.
//!
//! A dense two-phase simplex with Bland's rule: deterministic pivoting so
//! synthesized certificates are reproducible run to run. Variables are free by
//! default; sign restrictions are ordinary `≥` rows. Every reported feasible
//! point is re-verified against the original constraints before it is returned.

/// Feasibility is accepted when every constraint holds to this absolute slack.
pub const FEAS_TOL: f64 = 1e-9;
/// Phase-1 optimum above this cutoff certifies infeasibility.
pub const PHASE1_TOL: f64 = 1e-7;

const PIVOT_EPS: f64 = 1e-11;

#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub num_vars: usize,
    /// rows a·y = b
    pub eq: Vec<(Vec<f64>, f64)>,
    /// rows a·y ≥ b
    pub ge: Vec<(Vec<f64>, f64)>,
    /// optional linear functional to minimize
    pub objective: Option<Vec<f64>>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram { num_vars, ..Default::default() }
    }

    pub fn eq_row(&mut self, a: Vec<f64>, b: f64) {
        debug_assert_eq!(a.len(), self.num_vars);
        self.eq.push((a, b));
    }

    pub fn ge_row(&mut self, a: Vec<f64>, b: f64) {
        debug_assert_eq!(a.len(), self.num_vars);
        self.ge.push((a, b));
    }

    /// Convenience: a single-coefficient row `sign * y[idx] ≥ b`.
    pub fn bound(&mut self, idx: usize, sign: f64, b: f64) {
        let mut a = vec![0.0; self.num_vars];
        a[idx] = sign;
        self.ge.push((a, b));
    }

    fn violation(&self, point: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (a, b) in &self.eq {
            let v = (dot(a, point) - b).abs();
            worst = worst.max(v);
        }
        for (a, b) in &self.ge {
            let v = b - dot(a, point);
            worst = worst.max(v);
        }
        worst
    }
}

#[derive(Clone, Debug)]
pub enum LpOutcome {
    Feasible { point: Vec<f64>, objective: Option<f64> },
    Infeasible,
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LpOutcome::Feasible { .. })
    }

    pub fn point(&self) -> Option<&[f64]> {
        match self {
            LpOutcome::Feasible { point, .. } => Some(point),
            LpOutcome::Infeasible => None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LpError {
    #[error("row length {got} does not match variable count {expect}")]
    DimensionMismatch { expect: usize, got: usize },
    #[error("phase-{phase} simplex reported an unbounded ray (malformed program)")]
    Unbounded { phase: u8 },
    #[error("simplex returned a point violating a constraint by {violation:.3e}")]
    SelfCheckFailed { violation: f64 },
}

pub fn lp_feasible(lp: &LinearProgram) -> Result<LpOutcome, LpError> {
    for (a, _) in lp.eq.iter().chain(lp.ge.iter()) {
        if a.len() != lp.num_vars {
            return Err(LpError::DimensionMismatch { expect: lp.num_vars, got: a.len() });
        }
    }
    if let Some(c) = &lp.objective {
        if c.len() != lp.num_vars {
            return Err(LpError::DimensionMismatch { expect: lp.num_vars, got: c.len() });
        }
    }

    let mut tab = Tableau::build(lp);
    if !tab.phase1()? {
        return Ok(LpOutcome::Infeasible);
    }
    let objective = match &lp.objective {
        Some(c) => Some(tab.phase2(c)?),
        None => None,
    };
    let point = tab.extract(lp.num_vars);

    let violation = lp.violation(&point);
    if violation > FEAS_TOL {
        return Err(LpError::SelfCheckFailed { violation });
    }
    Ok(LpOutcome::Feasible { point, objective })
}

/// Standard-form tableau. Free variables are split y = u − v with u, v ≥ 0,
/// `≥` rows get surplus variables, every row gets an artificial.
struct Tableau {
    // rows x cols, last column is the rhs
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n_struct: usize,
    n_rows: usize,
    art_start: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let n = lp.num_vars;
        let m_eq = lp.eq.len();
        let m_ge = lp.ge.len();
        let m = m_eq + m_ge;
        let n_struct = 2 * n + m_ge; // split vars + surplus
        let n_total = n_struct + m; // + artificials
        let mut t = vec![vec![0.0; n_total + 1]; m];

        for (r, (a, b)) in lp.eq.iter().chain(lp.ge.iter()).enumerate() {
            let surplus = r >= m_eq;
            let (mut row_a, mut row_b): (Vec<f64>, f64) = (a.clone(), *b);
            let mut surplus_sign = -1.0;
            if row_b < 0.0 {
                for x in row_a.iter_mut() {
                    *x = -*x;
                }
                row_b = -row_b;
                surplus_sign = 1.0;
            }
            for j in 0..n {
                t[r][2 * j] = row_a[j];
                t[r][2 * j + 1] = -row_a[j];
            }
            if surplus {
                t[r][2 * n + (r - m_eq)] = surplus_sign;
            }
            t[r][n_struct + r] = 1.0;
            t[r][n_total] = row_b;
        }

        let basis = (0..m).map(|r| n_struct + r).collect();
        Tableau { t, basis, n_struct, n_rows: m, art_start: n_struct }
    }

    fn n_cols(&self) -> usize {
        self.t.first().map_or(0, |r| r.len() - 1)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.t[row][col];
        let width = self.t[row].len();
        for j in 0..width {
            self.t[row][j] /= piv;
        }
        for r in 0..self.n_rows {
            if r != row {
                let f = self.t[r][col];
                if f != 0.0 {
                    for j in 0..width {
                        self.t[r][j] -= f * self.t[row][j];
                    }
                }
            }
        }
        self.basis[row] = col;
    }

    /// Minimize c over the current basic feasible region with Bland's rule.
    /// Returns the optimum. `allowed` masks candidate entering columns.
    fn simplex(&mut self, cost: &[f64], allowed: &dyn Fn(usize) -> bool) -> Result<f64, LpError> {
        loop {
            // reduced costs z_j = c_j - c_B . B^{-1} A_j
            let cb: Vec<f64> = self.basis.iter().map(|&j| cost[j]).collect();
            let mut entering = None;
            for j in 0..self.n_cols() {
                if !allowed(j) || self.basis.contains(&j) {
                    continue;
                }
                let mut z = cost[j];
                for r in 0..self.n_rows {
                    z -= cb[r] * self.t[r][j];
                }
                if z < -PIVOT_EPS {
                    entering = Some(j); // Bland: lowest index
                    break;
                }
            }
            let Some(col) = entering else {
                let rhs_cost: f64 = (0..self.n_rows)
                    .map(|r| cb[r] * self.t[r][self.n_cols()])
                    .sum();
                return Ok(rhs_cost);
            };
            // ratio test, Bland tie-break on lowest basis index
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.n_rows {
                let a = self.t[r][col];
                if a > PIVOT_EPS {
                    let ratio = self.t[r][self.n_cols()] / a;
                    let better = match leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - PIVOT_EPS
                                || (ratio < lratio + PIVOT_EPS && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            match leave {
                Some((row, _)) => self.pivot(row, col),
                None => return Err(LpError::Unbounded { phase: if cost[self.art_start..].iter().any(|&c| c != 0.0) { 1 } else { 2 } }),
            }
        }
    }

    fn phase1(&mut self) -> Result<bool, LpError> {
        let mut cost = vec![0.0; self.n_cols()];
        for c in cost.iter_mut().skip(self.art_start) {
            *c = 1.0;
        }
        let opt = self.simplex(&cost, &|_| true)?;
        if opt > PHASE1_TOL {
            return Ok(false);
        }
        // drive leftover artificials out of the basis where possible
        for r in 0..self.n_rows {
            if self.basis[r] >= self.art_start {
                if let Some(col) = (0..self.art_start).find(|&j| self.t[r][j].abs() > 1e-8) {
                    self.pivot(r, col);
                }
                // otherwise the row is redundant; its artificial stays basic at ~0
            }
        }
        Ok(true)
    }

    fn phase2(&mut self, objective: &[f64]) -> Result<f64, LpError> {
        let mut cost = vec![0.0; self.n_cols()];
        for (j, &c) in objective.iter().enumerate() {
            cost[2 * j] = c;
            cost[2 * j + 1] = -c;
        }
        let art_start = self.art_start;
        self.simplex(&cost, &|j| j < art_start)
    }

    fn extract(&self, n: usize) -> Vec<f64> {
        let mut vals = vec![0.0; self.n_struct];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.n_struct {
                vals[b] = self.t[r][self.n_cols()];
            }
        }
        (0..n).map(|j| vals[2 * j] - vals[2 * j + 1]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let mut lp = LinearProgram::new(1);
        lp.bound(0, 1.0, 1.0); // y1 >= 1
        lp.bound(0, -1.0, 0.0); // -y1 >= 0
        assert!(!lp_feasible(&lp).unwrap().is_feasible());
    }

    #[test]
    fn simplex_feasible_point_satisfies_constraints() {
        let mut lp = LinearProgram::new(2);
        lp.eq_row(vec![1.0, 1.0], 1.0);
        lp.bound(0, 1.0, 0.0);
        lp.bound(1, 1.0, 0.0);
        let out = lp_feasible(&lp).unwrap();
        let p = out.point().unwrap();
        assert!((p[0] + p[1] - 1.0).abs() < FEAS_TOL);
        assert!(p[0] >= -FEAS_TOL && p[1] >= -FEAS_TOL);
    }

    #[test]
    fn free_variables_can_go_negative() {
        let mut lp = LinearProgram::new(2);
        lp.eq_row(vec![1.0, 0.0], -3.0);
        lp.ge_row(vec![0.0, -1.0], 2.0); // y2 <= -2
        let out = lp_feasible(&lp).unwrap();
        let p = out.point().unwrap();
        assert!((p[0] + 3.0).abs() < FEAS_TOL);
        assert!(p[1] <= -2.0 + FEAS_TOL);
    }

    #[test]
    fn minimization_reaches_optimum() {
        // min y1 + y2 s.t. y1 + 2 y2 >= 4, y >= 0  -> optimum 2 at (0, 2)
        let mut lp = LinearProgram::new(2);
        lp.ge_row(vec![1.0, 2.0], 4.0);
        lp.bound(0, 1.0, 0.0);
        lp.bound(1, 1.0, 0.0);
        lp.objective = Some(vec![1.0, 1.0]);
        match lp_feasible(&lp).unwrap() {
            LpOutcome::Feasible { objective: Some(v), .. } => assert!((v - 2.0).abs() < 1e-7),
            other => panic!("unexpected outcome {other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch_reported() {
        let mut lp = LinearProgram::new(2);
        lp.eq.push((vec![1.0], 0.0));
        assert!(matches!(lp_feasible(&lp), Err(LpError::DimensionMismatch { .. })));
    }

    #[test]
    fn degenerate_redundant_rows() {
        let mut lp = LinearProgram::new(2);
        lp.eq_row(vec![1.0, 1.0], 2.0);
        lp.eq_row(vec![2.0, 2.0], 4.0); // redundant
        let out = lp_feasible(&lp).unwrap();
        assert!(out.is_feasible());
    }

    proptest::proptest! {
        // Random interval systems: feasibility is decidable by hand, the simplex
        // must agree and its points must satisfy the system.
        #[test]
        fn interval_systems(lo in -5.0f64..5.0, width in -2.0f64..3.0) {
            let hi = lo + width;
            let mut lp = LinearProgram::new(1);
            lp.bound(0, 1.0, lo);
            lp.bound(0, -1.0, -hi);
            let out = lp_feasible(&lp).unwrap();
            if width >= 0.0 {
                let p = out.point().expect("nonempty interval must be feasible");
                proptest::prop_assert!(p[0] >= lo - FEAS_TOL && p[0] <= hi + FEAS_TOL);
            } else if width < -1e-6 {
                proptest::prop_assert!(!out.is_feasible());
            }
        }
    }
}
