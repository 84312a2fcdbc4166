//! ODE integration and numeric certificate validation.
//!
//! The integrator is an explicit Dormand-Prince 5(4) pair with step rejection
//! on negativity: steps that would leave the admissible set are halved, never
//! clipped, so linear conservation laws survive to roundoff. `tol` is an
//! end-to-end accuracy knob: the controller holds the per-step error estimate
//! below tol^4 (floored at 1e-14), so the end-state error scales superlinearly
//! as tol tightens while "local error <= tol" holds with a wide margin.

use crate::dual::DualCertificate;
use crate::exact::{self, ExactMat};
use crate::kinetics::{rate_jacobian, rate_vector, sample_kinetics, KineticsSpec};
use crate::model::ReactionNetwork;
use crate::par;
use crate::pwlr::PwlrCertificate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const EQUILIBRIUM_RESIDUAL: f64 = 1e-9;
pub const POLISHED_RESIDUAL: f64 = 1e-8;
pub const LYAPUNOV_INCREASE_TOL: f64 = 1e-7;

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub accepted: usize,
    pub rejected: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().expect("nonempty trajectory")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("negative initial state at component {0}")]
    NegativeStart(usize),
    #[error("horizon must be positive")]
    BadHorizon,
    #[error("step size underflow at t = {t:.6e} (state left the admissible set unrecoverably)")]
    StepUnderflow { t: f64 },
    #[error(transparent)]
    Kinetics(#[from] crate::kinetics::KineticsError),
}

// Dormand-Prince 5(4) tableau
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Generic adaptive integration of x' = f(x). `admissible` vetoes states the
/// step controller must not cross (reject-and-halve, no clipping). The grid
/// keeps at least 64 samples over [0, T] via the step-size cap.
pub fn integrate_with<F, G>(
    f: F,
    x0: &[f64],
    t_end: f64,
    tol: f64,
    admissible: G,
) -> Result<Trajectory, SimError>
where
    F: Fn(&[f64]) -> Vec<f64>,
    G: Fn(&[f64]) -> bool,
{
    if t_end <= 0.0 {
        return Err(SimError::BadHorizon);
    }
    let n = x0.len();
    let target = tol.powi(4).max(1e-14);
    let h_max = t_end / 64.0;
    let h_min = t_end * 1e-13;

    let mut t = 0.0f64;
    let mut x = x0.to_vec();
    let mut h = h_max.min(1e-2 * t_end);
    let mut k0 = f(&x);
    let mut times = vec![0.0];
    let mut states = vec![x.clone()];
    let mut accepted = 0usize;
    let mut rejected = 0usize;

    while t < t_end {
        h = h.min(h_max).min(t_end - t);
        if h < h_min {
            return Err(SimError::StepUnderflow { t });
        }
        // stage derivatives; k0 reused from the previous step (FSAL)
        let mut ks: Vec<Vec<f64>> = Vec::with_capacity(7);
        ks.push(k0.clone());
        for stage in 0..6 {
            let mut xs = x.clone();
            for (si, k) in ks.iter().enumerate() {
                let a = A[stage][si];
                if a != 0.0 {
                    for i in 0..n {
                        xs[i] += h * a * k[i];
                    }
                }
            }
            ks.push(f(&xs));
        }
        let mut x5 = x.clone();
        let mut err = 0.0f64;
        for i in 0..n {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for s in 0..7 {
                d5 += B5[s] * ks[s][i];
                d4 += B4[s] * ks[s][i];
            }
            x5[i] += h * d5;
            let e = h * (d5 - d4);
            err = err.max(e.abs() / (1.0 + x[i].abs()));
        }

        if err <= target && admissible(&x5) {
            t += h;
            x = x5;
            k0 = ks[6].clone(); // stage 7 is f at the new state
            times.push(t);
            states.push(x.clone());
            accepted += 1;
            let grow = if err > 0.0 { 0.9 * (target / err).powf(0.2) } else { 5.0 };
            h *= grow.clamp(0.2, 5.0);
        } else {
            rejected += 1;
            h *= if err > target {
                (0.9 * (target / err).powf(0.2)).clamp(0.1, 0.5)
            } else {
                0.5 // admissibility rejection
            };
        }
    }
    Ok(Trajectory { times, states, accepted, rejected })
}

/// Integrate x' = Gamma R(x) from a nonnegative start.
pub fn integrate(
    net: &ReactionNetwork,
    kin: &KineticsSpec,
    x0: &[f64],
    t_end: f64,
    tol: f64,
) -> Result<Trajectory, SimError> {
    if let Some(i) = x0.iter().position(|&v| v < 0.0) {
        return Err(SimError::NegativeStart(i));
    }
    kin.check(net)?;
    let gamma = net.gamma_f64();
    let n = net.n_species();
    let f = |x: &[f64]| -> Vec<f64> {
        let xc: Vec<f64> = x.iter().map(|&v| v.max(0.0)).collect();
        let r = rate_vector(net, kin, &xc).expect("clamped state is nonnegative");
        (0..n).map(|i| gamma[i].iter().zip(&r).map(|(g, rr)| g * rr).sum()).collect()
    };
    integrate_with(f, x0, t_end, tol, |x| x.iter().all(|&v| v >= -1e-12))
}

#[derive(Clone, Debug)]
pub struct LyapunovTrace {
    pub values: Vec<f64>,
    pub max_increase: f64,
    pub pass: bool,
}

fn trace_from_values(values: Vec<f64>) -> LyapunovTrace {
    let max_increase = values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0);
    let pass = max_increase <= LYAPUNOV_INCREASE_TOL * (1.0 + values.first().copied().unwrap_or(0.0));
    LyapunovTrace { values, max_increase, pass }
}

/// V(t_i) = Vtilde(R(x(t_i))): the rate-space certificate along a trajectory.
/// The nondecrease check uses discrete differences on the adaptive grid (V is
/// only locally Lipschitz, so no derivative evaluation at kinks).
pub fn lyapunov_trace_rates(
    cert: &PwlrCertificate,
    net: &ReactionNetwork,
    kin: &KineticsSpec,
    traj: &Trajectory,
) -> LyapunovTrace {
    let values = traj
        .states
        .iter()
        .map(|x| {
            let xc: Vec<f64> = x.iter().map(|&v| v.max(0.0)).collect();
            let r = rate_vector(net, kin, &xc).expect("nonnegative state");
            cert.evaluate(&r)
        })
        .collect();
    trace_from_values(values)
}

/// Vhat(x(t_i) - x_e): the species-space dual certificate along a trajectory.
pub fn lyapunov_trace_dual(
    dual: &DualCertificate,
    x_e: &[f64],
    traj: &Trajectory,
) -> LyapunovTrace {
    let values = traj.states.iter().map(|x| dual.evaluate(x, x_e).value).collect();
    trace_from_values(values)
}

#[derive(Clone, Debug)]
pub struct Equilibrium {
    pub x_e: Vec<f64>,
    pub residual: f64,
    pub reduced_jacobian_nonsingular: bool,
    pub smallest_singular_value: f64,
}

impl Equilibrium {
    pub fn is_positive(&self) -> bool {
        self.x_e.iter().all(|&v| v > 0.0)
    }
}

/// Long-horizon integration with an equilibrium stopping rule, then a Newton
/// polish restricted to the stoichiometric class (coordinates x_e + span of
/// the column space of Gamma).
pub fn find_equilibrium(
    net: &ReactionNetwork,
    kin: &KineticsSpec,
    x0: &[f64],
    t_max: f64,
    tol: f64,
) -> Option<Equilibrium> {
    kin.check(net).ok()?;
    let gamma = net.gamma_f64();
    let n = net.n_species();
    let residual = |x: &[f64]| -> f64 {
        let xc: Vec<f64> = x.iter().map(|&v| v.max(0.0)).collect();
        match rate_vector(net, kin, &xc) {
            Ok(r) => {
                let mut worst = 0.0f64;
                for row in &gamma {
                    let v: f64 = row.iter().zip(&r).map(|(g, rr)| g * rr).sum();
                    worst = worst.max(v.abs());
                }
                worst
            }
            Err(_) => f64::INFINITY,
        }
    };

    let mut x = x0.to_vec();
    let mut elapsed = 0.0;
    let chunk = (t_max / 8.0).max(1.0);
    while residual(&x) >= EQUILIBRIUM_RESIDUAL && elapsed < t_max {
        let traj = integrate(net, kin, &x, chunk, tol).ok()?;
        // scan accepted samples for an early hit
        if let Some(idx) = traj.states.iter().position(|s| residual(s) < EQUILIBRIUM_RESIDUAL) {
            x = traj.states[idx].clone();
            break;
        }
        x = traj.last_state().to_vec();
        elapsed += chunk;
    }

    // Newton polish in reduced coordinates u: g(u) = U' Gamma R(x + U u)
    let basis = image_basis(net);
    if !basis.is_empty() {
        let dim = basis.len();
        let mut u = vec![0.0; dim];
        for _ in 0..25 {
            let xc: Vec<f64> = shifted(&x, &basis, &u);
            if xc.iter().any(|&v| v < -1e-9) {
                break;
            }
            let xp: Vec<f64> = xc.iter().map(|&v| v.max(0.0)).collect();
            let r = rate_vector(net, kin, &xp).ok()?;
            let gx: Vec<f64> = (0..n)
                .map(|i| gamma[i].iter().zip(&r).map(|(g, rr)| g * rr).sum())
                .collect();
            let g: Vec<f64> = basis.iter().map(|b| dotf(b, &gx)).collect();
            if g.iter().all(|&v| v.abs() < 1e-13) {
                break;
            }
            let jac = rate_jacobian(net, kin, &xp).ok()?;
            let m = reduced_jacobian(&gamma, &jac.matrix, &basis);
            let Some(step) = solve_dense(&m, &g) else { break };
            for d in 0..dim {
                u[d] -= step[d];
            }
        }
        let candidate: Vec<f64> = shifted(&x, &basis, &u)
            .into_iter()
            .map(|v| if v < 0.0 && v > -1e-9 { 0.0 } else { v })
            .collect();
        if candidate.iter().all(|&v| v >= 0.0) && residual(&candidate) <= residual(&x) {
            x = candidate;
        }
    }

    let res = residual(&x);
    if res >= POLISHED_RESIDUAL {
        return None;
    }
    let xp: Vec<f64> = x.iter().map(|&v| v.max(0.0)).collect();
    let jac = rate_jacobian(net, kin, &xp).ok()?;
    let smin = if basis.is_empty() {
        0.0
    } else {
        let m = reduced_jacobian(&gamma, &jac.matrix, &basis);
        smallest_singular_value(&m)
    };
    Some(Equilibrium {
        x_e: x,
        residual: res,
        reduced_jacobian_nonsingular: smin > 1e-8,
        smallest_singular_value: smin,
    })
}

fn shifted(x: &[f64], basis: &[Vec<f64>], u: &[f64]) -> Vec<f64> {
    let mut out = x.to_vec();
    for (b, &c) in basis.iter().zip(u) {
        for (o, &bv) in out.iter_mut().zip(b) {
            *o += c * bv;
        }
    }
    out
}

/// Orthonormal basis of Im Gamma (from the exact column-space pivots).
pub fn image_basis(net: &ReactionNetwork) -> Vec<Vec<f64>> {
    let g = net.gamma_exact();
    let (_, pivots) = g.transpose().rref();
    // pivot rows of Gamma' are independent columns of Gamma
    let cols: Vec<Vec<f64>> = pivots
        .iter()
        .map(|&j| (0..net.n_species()).map(|i| net.gamma[i][j] as f64).collect())
        .collect();
    gram_schmidt(&cols)
}

fn gram_schmidt(vs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for q in &out {
            let p = dotf(q, &w);
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi -= p * qi;
            }
        }
        let norm = dotf(&w, &w).sqrt();
        if norm > 1e-12 {
            for wi in w.iter_mut() {
                *wi /= norm;
            }
            out.push(w);
        }
    }
    out
}

fn dotf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// U' (Gamma dR/dx) U on the image basis U.
fn reduced_jacobian(gamma: &[Vec<f64>], drdx: &[Vec<f64>], basis: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = gamma.len();
    let nu = gamma[0].len();
    let dim = basis.len();
    // full Jacobian J = Gamma dR/dx (n x n)
    let mut j = vec![vec![0.0; n]; n];
    for a in 0..n {
        for (jr, drow) in drdx.iter().enumerate().take(nu) {
            let g = gamma[a][jr];
            if g != 0.0 {
                for b in 0..n {
                    j[a][b] += g * drow[b];
                }
            }
        }
    }
    let mut m = vec![vec![0.0; dim]; dim];
    for (r, br) in basis.iter().enumerate() {
        for (c, bc) in basis.iter().enumerate() {
            let jb: Vec<f64> = (0..n).map(|a| dotf(&j[a], bc)).collect();
            m[r][c] = dotf(br, &jb);
        }
    }
    m
}

/// Gaussian elimination with partial pivoting; None on (near-)singularity.
pub fn solve_dense(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.iter().cloned().collect();
    let mut rhs = b.to_vec();
    for c in 0..n {
        let (pi, pv) = (c..n)
            .map(|r| (r, m[r][c].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if pv < 1e-14 {
            return None;
        }
        m.swap(c, pi);
        rhs.swap(c, pi);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            if f != 0.0 {
                for k in c..n {
                    m[r][k] -= f * m[c][k];
                }
                rhs[r] -= f * rhs[c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for c in (0..n).rev() {
        let s: f64 = (c + 1..n).map(|k| m[c][k] * x[k]).sum();
        x[c] = (rhs[c] - s) / m[c][c];
    }
    Some(x)
}

/// Smallest singular value via Jacobi eigenvalues of M'M.
pub fn smallest_singular_value(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    if n == 0 {
        return 0.0;
    }
    let mut a = vec![vec![0.0; n]; n];
    for r in 0..n {
        for c in 0..n {
            a[r][c] = (0..n).map(|k| m[k][r] * m[k][c]).sum();
        }
    }
    // cyclic Jacobi on the symmetric matrix a
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for r in 0..n {
            for c in r + 1..n {
                off = off.max(a[r][c].abs());
            }
        }
        if off < 1e-18 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-18 {
                    continue;
                }
                let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let cth = 1.0 / (t * t + 1.0).sqrt();
                let sth = t * cth;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = cth * akp - sth * akq;
                    a[k][q] = sth * akp + cth * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = cth * apk - sth * aqk;
                    a[q][k] = sth * apk + cth * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i].max(0.0)).fold(f64::INFINITY, f64::min).sqrt()
}

#[derive(Clone, Debug)]
pub struct ValidationRun {
    pub kinetics: KineticsSpec,
    pub x0: Vec<f64>,
    pub max_increase: f64,
    pub dual_max_increase: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub runs: Vec<ValidationRun>,
    pub all_pass: bool,
    pub worst_increase: f64,
}

/// Monte-Carlo decrease validation: `draws` random kinetics, `starts` random
/// initial conditions each, fixed horizon; checks the rate-space trace and,
/// when a dual certificate is supplied, the species-space trace from the
/// per-run equilibrium. Runs fan out in parallel; per-run seeds derive from
/// `seed`, so results do not depend on scheduling.
pub fn validate_certificate(
    net: &ReactionNetwork,
    cert: &PwlrCertificate,
    dual: Option<&DualCertificate>,
    draws: usize,
    starts: usize,
    t_end: f64,
    seed: u64,
) -> ValidationReport {
    let tasks: Vec<u64> = (0..draws as u64).collect();
    let runs_nested: Vec<Vec<ValidationRun>> = par::map(&tasks, |&draw| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(draw + 1)));
        let kin = sample_kinetics(net, &mut rng);
        let mut out = Vec::with_capacity(starts);
        for _ in 0..starts {
            let x0: Vec<f64> = (0..net.n_species()).map(|_| rng.gen_range(0.1..3.0)).collect();
            let Ok(traj) = integrate(net, &kin, &x0, t_end, 1e-3) else {
                out.push(ValidationRun {
                    kinetics: kin.clone(),
                    x0,
                    max_increase: f64::INFINITY,
                    dual_max_increase: None,
                    pass: false,
                });
                continue;
            };
            let trace = lyapunov_trace_rates(cert, net, &kin, &traj);
            let mut pass = trace.pass;
            let dual_max = dual.and_then(|d| {
                let eq = find_equilibrium(net, &kin, &x0, 400.0, 1e-3)?;
                let dt = lyapunov_trace_dual(d, &eq.x_e, &traj);
                pass = pass && dt.pass;
                Some(dt.max_increase)
            });
            out.push(ValidationRun {
                kinetics: kin.clone(),
                x0,
                max_increase: trace.max_increase,
                dual_max_increase: dual_max,
                pass,
            });
        }
        out
    });
    let runs: Vec<ValidationRun> = runs_nested.into_iter().flatten().collect();
    let all_pass = runs.iter().all(|r| r.pass);
    let worst_increase = runs.iter().map(|r| r.max_increase).fold(0.0, f64::max);
    ValidationReport { runs, all_pass, worst_increase }
}

/// Check the linear conservation laws along a trajectory: w'x(t) constant to
/// 1e-6 relative, for every exact left-kernel basis vector w.
pub fn conservation_drift(net: &ReactionNetwork, traj: &Trajectory) -> f64 {
    let basis = net.gamma_exact().left_kernel_basis();
    let mut worst = 0.0f64;
    for w in basis {
        let wf: Vec<f64> = w.iter().map(exact::rat_to_f64).collect();
        let v0 = dotf(&wf, &traj.states[0]);
        for s in &traj.states {
            let v = dotf(&wf, s);
            worst = worst.max((v - v0).abs() / (1.0 + v0.abs()));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;

    fn k11() -> KineticsSpec {
        KineticsSpec::mass_action(&[1.0, 1.0])
    }

    #[test]
    fn closed_form_reversible_exchange() {
        let net = net_rev();
        let traj = integrate(&net, &k11(), &[2.0, 0.0], 5.0, 1e-2).unwrap();
        assert!(traj.len() >= 65, "needs at least 64 samples");
        let xe = traj.last_state();
        let expect = [1.0 + (-10.0f64).exp(), 1.0 - (-10.0f64).exp()];
        assert!((xe[0] - expect[0]).abs() < 1e-5);
        assert!((xe[1] - expect[1]).abs() < 1e-5);
        assert!(conservation_drift(&net, &traj) < 1e-6);
        assert!(traj.states.iter().all(|s| s.iter().all(|&v| v >= -1e-9)));
    }

    #[test]
    fn tolerance_halving_reduces_error_eightfold() {
        let net = net_rev();
        let err_at = |tol: f64| {
            let traj = integrate(&net, &k11(), &[2.0, 0.0], 5.0, tol).unwrap();
            let xe = traj.last_state();
            let expect = [1.0 + (-10.0f64).exp(), 1.0 - (-10.0f64).exp()];
            ((xe[0] - expect[0]).abs()).max((xe[1] - expect[1]).abs())
        };
        let coarse = err_at(2e-2);
        let fine = err_at(1e-2);
        assert!(fine > 1e-14, "fine error hit the floating floor, ratio meaningless");
        assert!(
            coarse / fine >= 8.0,
            "error should drop >= 8x when tol halves: {coarse:.3e} -> {fine:.3e}"
        );
    }

    #[test]
    fn equilibrium_start_stays_constant() {
        let net = net_rev();
        let traj = integrate(&net, &k11(), &[1.0, 1.0], 3.0, 1e-3).unwrap();
        for s in &traj.states {
            assert!((s[0] - 1.0).abs() < 1e-9 && (s[1] - 1.0).abs() < 1e-9);
        }
        let traj = integrate(&net, &k11(), &[0.0, 0.0], 1.0, 1e-3).unwrap();
        assert!(traj.last_state().iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn find_equilibrium_reversible_exchange() {
        let net = net_rev();
        let eq = find_equilibrium(&net, &k11(), &[2.0, 0.0], 100.0, 1e-3).unwrap();
        assert!((eq.x_e[0] - 1.0).abs() < 1e-6);
        assert!((eq.x_e[1] - 1.0).abs() < 1e-6);
        assert!(eq.residual < POLISHED_RESIDUAL);
        assert!(eq.reduced_jacobian_nonsingular);
        // reduced direction (1,-1)/sqrt2: eigenvalue -2
        assert!((eq.smallest_singular_value - 2.0).abs() < 1e-4);
    }

    #[test]
    fn autocatalytic_interior_point_is_equilibrium() {
        // (1,1) satisfies R(1,1) = (1,1) in ker Gamma: the trajectory is constant
        let net = net_siphon();
        let eq = find_equilibrium(&net, &k11(), &[1.0, 1.0], 50.0, 1e-3).unwrap();
        assert!((eq.x_e[0] - 1.0).abs() < 1e-9 && (eq.x_e[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn autocatalytic_low_mass_class_hits_boundary() {
        // on x1 + x2 = 0.8 the only equilibrium is on the face x2 = 0, the
        // critical-deadlock face; the zero set must be a siphon
        let net = net_siphon();
        let eq = find_equilibrium(&net, &k11(), &[0.5, 0.3], 2000.0, 1e-3).unwrap();
        assert!((eq.x_e[0] - 0.8).abs() < 1e-5, "mass conserved: {:?}", eq.x_e);
        assert!(eq.x_e[1].abs() < 1e-6, "x2 must die out: {:?}", eq.x_e);
        let zero_set: Vec<usize> = eq
            .x_e
            .iter()
            .enumerate()
            .filter(|(_, &v)| v < 1e-6)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(zero_set, vec![1]);
    }

    #[test]
    fn zero_start_equilibrium() {
        let net = net_rev();
        let eq = find_equilibrium(&net, &k11(), &[0.0, 0.0], 10.0, 1e-3).unwrap();
        assert!(eq.x_e.iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn lyapunov_trace_decreases_on_certified_network() {
        let net = net_rev();
        let crate::pwlr::SynthesisOutcome::Found(cert) =
            crate::pwlr::synthesize_default(&net, true).unwrap()
        else {
            panic!()
        };
        let traj = integrate(&net, &k11(), &[2.0, 0.0], 5.0, 1e-3).unwrap();
        let trace = lyapunov_trace_rates(&cert, &net, &k11(), &traj);
        assert!(trace.pass, "max increase {}", trace.max_increase);
        // closed form: V(t) proportional to e^{-2t}, strictly decreasing
        for w in trace.values.windows(2) {
            assert!(w[1] <= w[0] + 1e-9);
        }
        // equilibrium trajectory: identically zero
        let traj_eq = integrate(&net, &k11(), &[1.0, 1.0], 3.0, 1e-3).unwrap();
        let trace_eq = lyapunov_trace_rates(&cert, &net, &k11(), &traj_eq);
        assert!(trace_eq.values.iter().all(|&v| v < 1e-9));
    }

    #[test]
    fn invalid_candidate_has_increasing_trace_for_some_kinetics() {
        // the autocatalytic network admits no certificate; for C = (-1, 1)
        // a grid search over rate constants finds an increasing trace
        let net = net_siphon();
        let c = ExactMat::from_i64_rows(&[vec![-1, 1]]);
        let gamma = net.gamma_exact();
        let part = crate::partition::enumerate_regions(gamma.clone(), &gamma).unwrap();
        let cert = PwlrCertificate::from_parts(c, part, true);
        let mut found = false;
        'grid: for k1 in [0.1, 1.0, 10.0] {
            for k2 in [0.1, 1.0, 10.0] {
                for x0 in [[2.0, 0.1], [0.1, 2.0], [1.0, 1.0]] {
                    let kin = KineticsSpec::mass_action(&[k1, k2]);
                    let traj = integrate(&net, &kin, &x0, 5.0, 1e-3).unwrap();
                    let trace = lyapunov_trace_rates(&cert, &net, &kin, &traj);
                    if trace.max_increase > 1e-3 {
                        found = true;
                        break 'grid;
                    }
                }
            }
        }
        assert!(found, "expected a kinetics with increasing V");
    }

    #[test]
    fn smallest_singular_value_examples() {
        let m = vec![vec![3.0, 0.0], vec![0.0, -2.0]];
        assert!((smallest_singular_value(&m) - 2.0).abs() < 1e-9);
        let sing = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        assert!(smallest_singular_value(&sing) < 1e-9);
    }

    #[test]
    fn solve_dense_roundtrip() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let x = solve_dense(&a, &[5.0, 10.0]).unwrap();
        assert!((2.0 * x[0] + x[1] - 5.0).abs() < 1e-12);
        assert!((x[0] + 3.0 * x[1] - 10.0).abs() < 1e-12);
        assert!(solve_dense(&vec![vec![1.0, 1.0], vec![1.0, 1.0]], &[1.0, 2.0]).is_none());
    }
}
