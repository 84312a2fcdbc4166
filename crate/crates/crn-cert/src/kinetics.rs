//! Monotone rate laws: mass-action, Michaelis-Menten and Hill, their rate
//! vectors and Jacobians, plus seeded random draws for validation sweeps.
//!
//! Every supported law vanishes when a reactant concentration is zero and is
//! strictly increasing in each reactant on the open orthant, which is exactly
//! what the certificate theory assumes about admissible kinetics.

use crate::model::ReactionNetwork;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "law", content = "params", rename_all = "kebab-case")]
pub enum RateLaw {
    /// k * prod_i x_i^alpha_ij
    MassAction { k: f64 },
    /// vmax * x / (km + x), single unit-coefficient reactant
    MichaelisMenten { vmax: f64, km: f64 },
    /// vmax * x^n / (km^n + x^n), single unit-coefficient reactant, n >= 1
    Hill { vmax: f64, km: f64, n: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KineticsSpec {
    /// one law per reaction, in network reaction order
    pub laws: Vec<RateLaw>,
}

#[derive(Debug, thiserror::Error)]
pub enum KineticsError {
    #[error("expected {expect} laws, got {got}")]
    WrongCount { expect: usize, got: usize },
    #[error("reaction {reaction}: {law} needs exactly one reactant with coefficient 1")]
    SaturatingLawShape { reaction: String, law: String },
    #[error("reaction {reaction}: nonpositive parameter")]
    NonPositiveParameter { reaction: String },
    #[error("reaction {reaction}: Hill exponent must be >= 1")]
    HillExponent { reaction: String },
    #[error("negative concentration input at species index {index}")]
    NegativeConcentration { index: usize },
    #[error("unknown reaction name '{0}' in kinetics map")]
    UnknownReaction(String),
}

impl KineticsSpec {
    pub fn mass_action(k: &[f64]) -> Self {
        KineticsSpec { laws: k.iter().map(|&k| RateLaw::MassAction { k }).collect() }
    }

    /// Validate law shapes and parameters against the network.
    pub fn check(&self, net: &ReactionNetwork) -> Result<(), KineticsError> {
        if self.laws.len() != net.n_reactions() {
            return Err(KineticsError::WrongCount {
                expect: net.n_reactions(),
                got: self.laws.len(),
            });
        }
        for (j, law) in self.laws.iter().enumerate() {
            let name = net.reactions[j].clone();
            let positive = |ps: &[f64]| ps.iter().all(|&p| p > 0.0);
            match law {
                RateLaw::MassAction { k } => {
                    if !positive(&[*k]) {
                        return Err(KineticsError::NonPositiveParameter { reaction: name });
                    }
                }
                RateLaw::MichaelisMenten { vmax, km } => {
                    if !positive(&[*vmax, *km]) {
                        return Err(KineticsError::NonPositiveParameter { reaction: name });
                    }
                    require_single_unit_reactant(net, j, "michaelis-menten")?;
                }
                RateLaw::Hill { vmax, km, n } => {
                    if !positive(&[*vmax, *km, *n]) {
                        return Err(KineticsError::NonPositiveParameter { reaction: name });
                    }
                    if *n < 1.0 {
                        return Err(KineticsError::HillExponent { reaction: name });
                    }
                    require_single_unit_reactant(net, j, "hill")?;
                }
            }
        }
        Ok(())
    }

    /// Parse the JSON sidecar: a map reaction-name -> {law, params}.
    pub fn from_sidecar_json(net: &ReactionNetwork, json: &str) -> Result<Self, SidecarError> {
        let map: std::collections::BTreeMap<String, RateLaw> = serde_json::from_str(json)?;
        let mut laws = Vec::with_capacity(net.n_reactions());
        for name in &net.reactions {
            let law = map
                .get(name)
                .cloned()
                .ok_or_else(|| SidecarError::MissingReaction(name.clone()))?;
            laws.push(law);
        }
        for name in map.keys() {
            if net.reaction_index(name).is_none() {
                return Err(SidecarError::Kinetics(KineticsError::UnknownReaction(name.clone())));
            }
        }
        let spec = KineticsSpec { laws };
        spec.check(net).map_err(SidecarError::Kinetics)?;
        Ok(spec)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SidecarError {
    #[error("kinetics sidecar: {0}")]
    Json(#[from] serde_json::Error),
    #[error("kinetics sidecar: no entry for reaction '{0}'")]
    MissingReaction(String),
    #[error(transparent)]
    Kinetics(#[from] KineticsError),
}

fn require_single_unit_reactant(
    net: &ReactionNetwork,
    j: usize,
    law: &str,
) -> Result<usize, KineticsError> {
    let reactants = net.reactants_of(j);
    if reactants.len() == 1 && net.alpha[reactants[0]][j] == 1 {
        Ok(reactants[0])
    } else {
        Err(KineticsError::SaturatingLawShape {
            reaction: net.reactions[j].clone(),
            law: law.to_string(),
        })
    }
}

fn powi(x: f64, e: i64) -> f64 {
    match e {
        0 => 1.0,
        1 => x,
        2 => x * x,
        _ => x.powi(e as i32),
    }
}

/// R(x) for x >= 0 componentwise.
pub fn rate_vector(
    net: &ReactionNetwork,
    kin: &KineticsSpec,
    x: &[f64],
) -> Result<Vec<f64>, KineticsError> {
    if let Some(index) = x.iter().position(|&v| v < 0.0) {
        return Err(KineticsError::NegativeConcentration { index });
    }
    let mut r = Vec::with_capacity(net.n_reactions());
    for (j, law) in kin.laws.iter().enumerate() {
        let v = match law {
            RateLaw::MassAction { k } => {
                let mut prod = *k;
                for i in 0..net.n_species() {
                    let a = net.alpha[i][j];
                    if a > 0 {
                        prod *= powi(x[i], a);
                    }
                }
                prod
            }
            RateLaw::MichaelisMenten { vmax, km } => {
                let i = net.reactants_of(j)[0];
                vmax * x[i] / (km + x[i])
            }
            RateLaw::Hill { vmax, km, n } => {
                let i = net.reactants_of(j)[0];
                let xn = x[i].powf(*n);
                vmax * xn / (km.powf(*n) + xn)
            }
        };
        r.push(v);
    }
    Ok(r)
}

#[derive(Clone, Debug)]
pub struct RateJacobian {
    /// nu x n matrix of partial derivatives
    pub matrix: Vec<Vec<f64>>,
    /// set when evaluated on the boundary of the orthant, where the strict
    /// support pattern can degenerate
    pub boundary: bool,
}

impl RateJacobian {
    /// The decomposition parameter rho_ell = dR_{j_ell}/dx_{i_ell}.
    pub fn rho(&self, dec: &crate::model::RankOneDecomposition) -> Vec<f64> {
        dec.entries.iter().map(|v| self.matrix[v.reaction][v.species]).collect()
    }
}

/// dR/dx at x; interior points give a support pattern equal to that of
/// alpha transposed.
pub fn rate_jacobian(
    net: &ReactionNetwork,
    kin: &KineticsSpec,
    x: &[f64],
) -> Result<RateJacobian, KineticsError> {
    if let Some(index) = x.iter().position(|&v| v < 0.0) {
        return Err(KineticsError::NegativeConcentration { index });
    }
    let boundary = x.iter().any(|&v| v == 0.0);
    let n = net.n_species();
    let mut m = vec![vec![0.0; n]; net.n_reactions()];
    for (j, law) in kin.laws.iter().enumerate() {
        match law {
            RateLaw::MassAction { k } => {
                for i in 0..n {
                    let a = net.alpha[i][j];
                    if a == 0 {
                        continue;
                    }
                    let mut d = *k * a as f64 * powi(x[i], a - 1);
                    for i2 in 0..n {
                        if i2 != i {
                            let a2 = net.alpha[i2][j];
                            if a2 > 0 {
                                d *= powi(x[i2], a2);
                            }
                        }
                    }
                    m[j][i] = d;
                }
            }
            RateLaw::MichaelisMenten { vmax, km } => {
                let i = net.reactants_of(j)[0];
                m[j][i] = vmax * km / ((km + x[i]) * (km + x[i]));
            }
            RateLaw::Hill { vmax, km, n: h } => {
                let i = net.reactants_of(j)[0];
                let kmn = km.powf(*h);
                let xn = x[i].powf(*h);
                let denom = (kmn + xn) * (kmn + xn);
                m[j][i] = if x[i] == 0.0 && *h > 1.0 {
                    0.0
                } else {
                    vmax * h * kmn * x[i].powf(h - 1.0) / denom
                };
            }
        }
    }
    Ok(RateJacobian { matrix: m, boundary })
}

/// Draw a random admissible kinetics: mass-action rate constants log-uniform
/// in [0.1, 10]; reactions shaped for saturating laws may get Michaelis-Menten
/// or Hill with parameters in [0.5, 5].
pub fn sample_kinetics<R: Rng>(net: &ReactionNetwork, rng: &mut R) -> KineticsSpec {
    let laws = (0..net.n_reactions())
        .map(|j| {
            let saturating_ok = {
                let reactants = net.reactants_of(j);
                reactants.len() == 1 && net.alpha[reactants[0]][j] == 1
            };
            let choice = if saturating_ok { rng.gen_range(0..4) } else { 0 };
            match choice {
                0 | 1 => RateLaw::MassAction { k: 10f64.powf(rng.gen_range(-1.0..1.0)) },
                2 => RateLaw::MichaelisMenten {
                    vmax: rng.gen_range(0.5..5.0),
                    km: rng.gen_range(0.5..5.0),
                },
                _ => RateLaw::Hill {
                    vmax: rng.gen_range(0.5..5.0),
                    km: rng.gen_range(0.5..5.0),
                    n: rng.gen_range(1.0..3.0),
                },
            }
        })
        .collect();
    KineticsSpec { laws }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use crate::model::rank_one_decomposition;
    use rand::SeedableRng;

    #[test]
    fn mass_action_rates() {
        let net = net_rev();
        let kin = KineticsSpec::mass_action(&[1.0, 1.0]);
        assert_eq!(rate_vector(&net, &kin, &[2.0, 0.0]).unwrap(), vec![2.0, 0.0]);
        let kin = KineticsSpec::mass_action(&[3.0, 2.0]);
        assert_eq!(rate_vector(&net, &kin, &[1.0, 1.0]).unwrap(), vec![3.0, 2.0]);
    }

    #[test]
    fn michaelis_menten_rate() {
        let net = crate::model::parse_network("R1: X1 -> X2").unwrap();
        let kin = KineticsSpec {
            laws: vec![RateLaw::MichaelisMenten { vmax: 2.0, km: 1.0 }],
        };
        kin.check(&net).unwrap();
        let r = rate_vector(&net, &kin, &[1.0, 0.0]).unwrap();
        assert!((r[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn negative_input_rejected() {
        let net = net_rev();
        let kin = KineticsSpec::mass_action(&[1.0, 1.0]);
        assert!(matches!(
            rate_vector(&net, &kin, &[-1.0, 0.0]),
            Err(KineticsError::NegativeConcentration { index: 0 })
        ));
    }

    #[test]
    fn jacobian_linear_and_product_rates() {
        let net = net_rev();
        let kin = KineticsSpec::mass_action(&[1.0, 1.0]);
        let jac = rate_jacobian(&net, &kin, &[5.0, 1.0]).unwrap();
        assert_eq!(jac.matrix[0][0], 1.0);
        assert!(!jac.boundary);

        let net2 = crate::model::parse_network("R1: X1 + X2 -> X3").unwrap();
        let kin2 = KineticsSpec::mass_action(&[2.0]);
        let jac2 = rate_jacobian(&net2, &kin2, &[1.0, 3.0, 0.5]).unwrap();
        assert_eq!(jac2.matrix[0], vec![6.0, 2.0, 0.0]);
    }

    #[test]
    fn jacobian_boundary_flagged() {
        let net = net_rev();
        let kin = KineticsSpec::mass_action(&[1.0, 1.0]);
        assert!(rate_jacobian(&net, &kin, &[0.0, 1.0]).unwrap().boundary);
    }

    #[test]
    fn jacobian_support_matches_alpha() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for net in [net_rev(), net_siphon(), net_enzyme()] {
            for _ in 0..20 {
                let kin = sample_kinetics(&net, &mut rng);
                kin.check(&net).unwrap();
                let x: Vec<f64> = (0..net.n_species()).map(|_| rng.gen_range(0.1..4.0)).collect();
                let jac = rate_jacobian(&net, &kin, &x).unwrap();
                for j in 0..net.n_reactions() {
                    for i in 0..net.n_species() {
                        let expect = net.alpha[i][j] > 0;
                        assert_eq!(jac.matrix[j][i] > 0.0, expect, "support mismatch at ({j},{i})");
                    }
                }
            }
        }
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for net in [net_rev(), net_siphon(), net_enzyme()] {
            let kin = sample_kinetics(&net, &mut rng);
            for _ in 0..100 {
                let x: Vec<f64> = (0..net.n_species()).map(|_| rng.gen_range(0.2..3.0)).collect();
                let jac = rate_jacobian(&net, &kin, &x).unwrap();
                for i in 0..net.n_species() {
                    let h = 1e-6 * (1.0 + x[i].abs());
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[i] += h;
                    xm[i] -= h;
                    let rp = rate_vector(&net, &kin, &xp).unwrap();
                    let rm = rate_vector(&net, &kin, &xm).unwrap();
                    for j in 0..net.n_reactions() {
                        let fd = (rp[j] - rm[j]) / (2.0 * h);
                        let d = jac.matrix[j][i];
                        assert!(
                            (fd - d).abs() <= 1e-6 * (1.0 + d.abs()),
                            "finite-difference mismatch at ({j},{i}): {fd} vs {d}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn rank_one_reconstruction() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for net in [net_rev(), net_siphon(), net_enzyme()] {
            let dec = rank_one_decomposition(&net);
            let kin = sample_kinetics(&net, &mut rng);
            let x: Vec<f64> = (0..net.n_species()).map(|_| rng.gen_range(0.3..2.0)).collect();
            let jac = rate_jacobian(&net, &kin, &x).unwrap();
            let rho = jac.rho(&dec);
            let nu = net.n_reactions();
            // sum_ell rho_ell * vertex_ell must reconstruct (dR/dx) Gamma
            let mut recon = vec![vec![0.0; nu]; nu];
            for (ell, &r) in rho.iter().enumerate() {
                let v = dec.vertex_f64(&net, ell);
                for a in 0..nu {
                    for b in 0..nu {
                        recon[a][b] += r * v[a][b];
                    }
                }
            }
            let g = net.gamma_f64();
            for a in 0..nu {
                for b in 0..nu {
                    let direct: f64 = (0..net.n_species()).map(|i| jac.matrix[a][i] * g[i][b]).sum();
                    assert!((recon[a][b] - direct).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn sidecar_roundtrip() {
        let net = net_rev();
        let json = r#"{
            "R1": {"law": "mass-action", "params": {"k": 1.5}},
            "R2": {"law": "michaelis-menten", "params": {"vmax": 2.0, "km": 1.0}}
        }"#;
        let kin = KineticsSpec::from_sidecar_json(&net, json).unwrap();
        assert_eq!(kin.laws[0], RateLaw::MassAction { k: 1.5 });
        assert!(KineticsSpec::from_sidecar_json(&net, r#"{"R1": {"law": "mass-action", "params": {"k": 1.0}}}"#).is_err());
    }

    #[test]
    fn saturating_law_shape_enforced() {
        let net = net_siphon(); // R1 has two reactants
        let kin = KineticsSpec {
            laws: vec![
                RateLaw::MichaelisMenten { vmax: 1.0, km: 1.0 },
                RateLaw::MassAction { k: 1.0 },
            ],
        };
        assert!(matches!(kin.check(&net), Err(KineticsError::SaturatingLawShape { .. })));
    }
}
