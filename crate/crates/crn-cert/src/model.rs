//! Reaction-network structure: parsing, stoichiometry matrices, the rank-one
//! vertex decomposition of the rate Jacobian image, and the two structural
//! feasibility checks (positive kernel vector, positive left kernel vector).
//!
//! Species and reactions are ordered by first appearance in the input file and
//! every matrix is indexed accordingly, so identical inputs give identical
//! outputs.

use crate::exact::{ExactMat, Rat};
use crate::lp::{lp_feasible, LinearProgram, LpOutcome};

#[derive(Clone, Debug)]
pub struct ReactionNetwork {
    pub species: Vec<String>,
    pub reactions: Vec<String>,
    /// reactant coefficients, n x nu
    pub alpha: Vec<Vec<i64>>,
    /// product coefficients, n x nu
    pub beta: Vec<Vec<i64>>,
    /// net stoichiometry beta - alpha, n x nu
    pub gamma: Vec<Vec<i64>>,
}

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: reaction '{name}' has empty reactant and product sides")]
    EmptyBothSides { line: usize, name: String },
    #[error("line {line}: negative stoichiometric coefficient")]
    NegativeCoefficient { line: usize },
    #[error("no reactions found")]
    Empty,
}

impl ReactionNetwork {
    pub fn n_species(&self) -> usize {
        self.species.len()
    }

    pub fn n_reactions(&self) -> usize {
        self.reactions.len()
    }

    pub fn gamma_exact(&self) -> ExactMat {
        ExactMat::from_i64_rows(&self.gamma)
    }

    pub fn gamma_f64(&self) -> Vec<Vec<f64>> {
        self.gamma.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect()
    }

    /// Row i of gamma as f64 (net change of species i across reactions).
    pub fn gamma_row_f64(&self, i: usize) -> Vec<f64> {
        self.gamma[i].iter().map(|&x| x as f64).collect()
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.species.iter().position(|s| s == name)
    }

    pub fn reaction_index(&self, name: &str) -> Option<usize> {
        self.reactions.iter().position(|r| r == name)
    }

    /// Reactant species indices of reaction j.
    pub fn reactants_of(&self, j: usize) -> Vec<usize> {
        (0..self.n_species()).filter(|&i| self.alpha[i][j] > 0).collect()
    }

    pub fn rank_gamma(&self) -> usize {
        self.gamma_exact().rank()
    }

    pub fn kernel_dim(&self) -> usize {
        self.n_reactions() - self.rank_gamma()
    }
}

/// One rank-one vertex of the rate-space inclusion: for a pair (i, j) with
/// alpha[i][j] > 0, the nu x nu matrix that is zero except row j, which holds
/// row i of gamma.
#[derive(Clone, Debug)]
pub struct VertexMatrix {
    /// 1-based position in the enumeration order
    pub index: usize,
    pub species: usize,
    pub reaction: usize,
}

#[derive(Clone, Debug)]
pub struct RankOneDecomposition {
    pub entries: Vec<VertexMatrix>,
}

impl RankOneDecomposition {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Materialize vertex ell as a dense nu x nu f64 matrix.
    pub fn vertex_f64(&self, net: &ReactionNetwork, ell: usize) -> Vec<Vec<f64>> {
        let v = &self.entries[ell];
        let nu = net.n_reactions();
        let mut m = vec![vec![0.0; nu]; nu];
        for c in 0..nu {
            m[v.reaction][c] = net.gamma[v.species][c] as f64;
        }
        m
    }

    /// Row i of gamma scaled into row j: returns (j, gamma_row_i) without
    /// materializing the matrix.
    pub fn vertex_parts<'a>(&self, net: &'a ReactionNetwork, ell: usize) -> (usize, &'a [i64]) {
        let v = &self.entries[ell];
        (v.reaction, &net.gamma[v.species])
    }
}

/// Enumerates the support of alpha in column-major order (reaction, then
/// species), matching the parameter indexing used everywhere else.
pub fn rank_one_decomposition(net: &ReactionNetwork) -> RankOneDecomposition {
    let mut entries = Vec::new();
    for j in 0..net.n_reactions() {
        for i in 0..net.n_species() {
            if net.alpha[i][j] > 0 {
                entries.push(VertexMatrix { index: entries.len() + 1, species: i, reaction: j });
            }
        }
    }
    RankOneDecomposition { entries }
}

pub fn parse_network(text: &str) -> Result<ReactionNetwork, ParseError> {
    let mut species: Vec<String> = Vec::new();
    let mut reactions: Vec<String> = Vec::new();
    // per reaction: (reactant terms, product terms) as (species index, coeff)
    let mut cols: Vec<(Vec<(usize, i64)>, Vec<(usize, i64)>)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let stripped = raw.trim();
        if stripped.is_empty() || stripped.starts_with('#') {
            continue;
        }
        let (name, rest) = stripped.split_once(':').ok_or_else(|| ParseError::Syntax {
            line,
            msg: "expected 'NAME: reactants -> products'".into(),
        })?;
        let name = name.trim();
        if name.is_empty() {
            return Err(ParseError::Syntax { line, msg: "empty reaction name".into() });
        }
        if reactions.iter().any(|r| r == name) {
            return Err(ParseError::Syntax { line, msg: format!("duplicate reaction name '{name}'") });
        }
        let (lhs, rhs) = rest.split_once("->").ok_or_else(|| ParseError::Syntax {
            line,
            msg: "missing '->'".into(),
        })?;
        let reactants = parse_side(lhs, line, &mut species)?;
        let products = parse_side(rhs, line, &mut species)?;
        if reactants.is_empty() && products.is_empty() {
            return Err(ParseError::EmptyBothSides { line, name: name.to_string() });
        }
        reactions.push(name.to_string());
        cols.push((reactants, products));
    }

    if reactions.is_empty() {
        return Err(ParseError::Empty);
    }

    let n = species.len();
    let nu = reactions.len();
    let mut alpha = vec![vec![0i64; nu]; n];
    let mut beta = vec![vec![0i64; nu]; n];
    for (j, (reac, prod)) in cols.iter().enumerate() {
        for &(i, c) in reac {
            alpha[i][j] += c;
        }
        for &(i, c) in prod {
            beta[i][j] += c;
        }
    }
    let gamma = (0..n)
        .map(|i| (0..nu).map(|j| beta[i][j] - alpha[i][j]).collect())
        .collect();
    Ok(ReactionNetwork { species, reactions, alpha, beta, gamma })
}

fn parse_side(
    side: &str,
    line: usize,
    species: &mut Vec<String>,
) -> Result<Vec<(usize, i64)>, ParseError> {
    let side = side.trim();
    if side.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for term in side.split('+') {
        let term = term.trim();
        if term.is_empty() {
            return Err(ParseError::Syntax { line, msg: "empty term between '+'".into() });
        }
        if term.starts_with('-') {
            return Err(ParseError::NegativeCoefficient { line });
        }
        let split = term.find(|c: char| c.is_ascii_alphabetic() || c == '_');
        let (coeff_str, name) = match split {
            Some(0) => ("", term),
            Some(p) => (term[..p].trim(), term[p..].trim()),
            None => {
                return Err(ParseError::Syntax { line, msg: format!("no species name in term '{term}'") })
            }
        };
        let coeff: i64 = if coeff_str.is_empty() {
            1
        } else {
            coeff_str.parse().map_err(|_| ParseError::Syntax {
                line,
                msg: format!("bad coefficient '{coeff_str}'"),
            })?
        };
        if coeff < 0 {
            return Err(ParseError::NegativeCoefficient { line });
        }
        if !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(ParseError::Syntax { line, msg: format!("bad species name '{name}'") });
        }
        let idx = match species.iter().position(|s| s == name) {
            Some(i) => i,
            None => {
                species.push(name.to_string());
                species.len() - 1
            }
        };
        out.push((idx, coeff));
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct AgReport {
    pub holds: bool,
    /// strictly positive kernel vector when holds
    pub witness: Option<Vec<f64>>,
}

/// Linear feasibility {Γv = 0, v ≥ 1}: necessary for interior equilibria.
/// Strict positivity is encoded as v ≥ 1 (the feasibility set is a cone).
pub fn check_ag(net: &ReactionNetwork) -> AgReport {
    let nu = net.n_reactions();
    let mut lp = LinearProgram::new(nu);
    for i in 0..net.n_species() {
        lp.eq_row(net.gamma_row_f64(i), 0.0);
    }
    for j in 0..nu {
        lp.bound(j, 1.0, 1.0);
    }
    match lp_feasible(&lp) {
        Ok(LpOutcome::Feasible { point, .. }) => AgReport { holds: true, witness: Some(point) },
        _ => AgReport { holds: false, witness: None },
    }
}

#[derive(Clone, Debug)]
pub struct ConservationReport {
    /// exact basis of {w : wᵀΓ = 0}
    pub left_kernel_basis: Vec<Vec<Rat>>,
    pub conservative: bool,
    /// strictly positive left kernel vector when conservative
    pub witness: Option<Vec<f64>>,
}

pub fn conservation_analysis(net: &ReactionNetwork) -> ConservationReport {
    let basis = net.gamma_exact().left_kernel_basis();
    let n = net.n_species();
    let mut lp = LinearProgram::new(n);
    let gamma_t: Vec<Vec<f64>> = {
        let g = net.gamma_f64();
        (0..net.n_reactions()).map(|j| (0..n).map(|i| g[i][j]).collect()).collect()
    };
    for row in gamma_t {
        lp.eq_row(row, 0.0);
    }
    for i in 0..n {
        lp.bound(i, 1.0, 1.0);
    }
    let (conservative, witness) = match lp_feasible(&lp) {
        Ok(LpOutcome::Feasible { point, .. }) => (true, Some(point)),
        _ => (false, None),
    };
    ConservationReport { left_kernel_basis: basis, conservative, witness }
}

#[cfg(test)]
pub mod fixtures {
    use super::*;

    pub const NET_REV: &str = "R1: X1 -> X2\nR2: X2 -> X1\n";
    pub const NET_SIPHON: &str = "R1: X1 + X2 -> 2 X2\nR2: X2 -> X1\n";
    pub const NET_ENZYME: &str = "\
R1: E + S -> ES
R2: ES -> E + S
R3: ES -> E + P
R4: E + P -> ES
";
    pub const NET_CHAIN: &str = "\
R1: A -> B
R2: B -> A
R3: B -> C
R4: C -> B
";
    pub const NET_FLOW: &str = "R1: -> X1\nR2: X1 ->\n";

    pub fn net_rev() -> ReactionNetwork {
        parse_network(NET_REV).unwrap()
    }

    pub fn net_siphon() -> ReactionNetwork {
        parse_network(NET_SIPHON).unwrap()
    }

    pub fn net_enzyme() -> ReactionNetwork {
        parse_network(NET_ENZYME).unwrap()
    }

    pub fn net_chain() -> ReactionNetwork {
        parse_network(NET_CHAIN).unwrap()
    }

    pub fn net_flow() -> ReactionNetwork {
        parse_network(NET_FLOW).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::exact::rat_from_i64;

    #[test]
    fn parse_reversible_exchange() {
        let net = net_rev();
        assert_eq!(net.species, vec!["X1", "X2"]);
        assert_eq!(net.n_reactions(), 2);
        assert_eq!(net.gamma, vec![vec![-1, 1], vec![1, -1]]);
    }

    #[test]
    fn parse_autocatalytic() {
        let net = net_siphon();
        assert_eq!(net.alpha, vec![vec![1, 0], vec![1, 1]]);
        assert_eq!(net.beta, vec![vec![0, 1], vec![2, 0]]);
        assert_eq!(net.gamma, vec![vec![-1, 1], vec![1, -1]]);
    }

    #[test]
    fn parse_inflow_reaction() {
        let net = parse_network("R1: -> X1").unwrap();
        assert_eq!(net.alpha, vec![vec![0]]);
        assert_eq!(net.beta, vec![vec![1]]);
    }

    #[test]
    fn parse_errors() {
        match parse_network("R1: X1 -> X2\nR2 X2 -> X1") {
            Err(ParseError::Syntax { line: 2, .. }) => {}
            other => panic!("expected syntax error on line 2, got {other:?}"),
        }
        assert!(matches!(parse_network("R1: ->"), Err(ParseError::EmptyBothSides { .. })));
        assert!(matches!(
            parse_network("R1: -1 X1 -> X2"),
            Err(ParseError::NegativeCoefficient { line: 1 })
        ));
        assert!(matches!(parse_network("# only a comment\n"), Err(ParseError::Empty)));
    }

    #[test]
    fn parse_repeated_species_accumulates() {
        let net = parse_network("R1: X + X -> Y").unwrap();
        assert_eq!(net.alpha[0][0], 2);
    }

    #[test]
    fn rank_one_support_enumeration() {
        let net = net_rev();
        let dec = rank_one_decomposition(&net);
        assert_eq!(dec.len(), 2);
        assert_eq!(dec.vertex_f64(&net, 0), vec![vec![-1.0, 1.0], vec![0.0, 0.0]]);
        assert_eq!(dec.vertex_f64(&net, 1), vec![vec![0.0, 0.0], vec![1.0, -1.0]]);

        let net = net_siphon();
        let dec = rank_one_decomposition(&net);
        let pairs: Vec<(usize, usize)> =
            dec.entries.iter().map(|v| (v.species + 1, v.reaction + 1)).collect();
        assert_eq!(pairs, vec![(1, 1), (2, 1), (2, 2)]);
    }

    #[test]
    fn rank_one_pure_inflow_contributes_nothing() {
        let net = parse_network("R1: -> X1").unwrap();
        assert!(rank_one_decomposition(&net).is_empty());
    }

    #[test]
    fn ag_examples() {
        assert!(check_ag(&net_rev()).holds);
        let single = parse_network("R1: X1 -> X2").unwrap();
        assert!(!check_ag(&single).holds);
        let enz = net_enzyme();
        let rep = check_ag(&enz);
        assert!(rep.holds);
        let v = rep.witness.unwrap();
        // witness satisfies the defining system tightly
        for i in 0..enz.n_species() {
            let r: f64 = enz.gamma[i].iter().zip(&v).map(|(&g, x)| g as f64 * x).sum();
            assert!(r.abs() < 1e-10, "Gamma v != 0: {r}");
        }
        assert!(v.iter().all(|&x| x >= 1.0 - 1e-9));
    }

    #[test]
    fn conservation_examples() {
        let rep = conservation_analysis(&net_rev());
        assert_eq!(rep.left_kernel_basis.len(), 1);
        assert!(rep.conservative);
        let w = rep.witness.unwrap();
        for j in 0..2 {
            let r: f64 = (0..2).map(|i| w[i] * net_rev().gamma[i][j] as f64).sum();
            assert!(r.abs() < 1e-10);
        }

        let inflow = parse_network("R1: -> X1").unwrap();
        let rep = conservation_analysis(&inflow);
        assert!(rep.left_kernel_basis.is_empty());
        assert!(!rep.conservative);

        let enz = net_enzyme();
        let rep = conservation_analysis(&enz);
        assert_eq!(rep.left_kernel_basis.len(), 2);
        assert!(rep.conservative);
        // the span contains the two textbook laws: total enzyme and total substrate
        let basis = ExactMat::from_rat_rows(rep.left_kernel_basis.clone()).transpose();
        let enzyme_law: Vec<Rat> = [1, 0, 1, 0].iter().map(|&x| rat_from_i64(x)).collect();
        let substrate_law: Vec<Rat> = [0, 1, 1, 1].iter().map(|&x| rat_from_i64(x)).collect();
        assert!(basis.solve(&enzyme_law).is_some());
        assert!(basis.solve(&substrate_law).is_some());
    }
}
