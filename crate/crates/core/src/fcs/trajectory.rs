//! Quantum-jump unraveling used as an independent statistical oracle.
//!
//! Waiting times are sampled exactly: the no-jump propagator is applied in
//! fixed steps until the norm drops below a uniform draw, then the crossing
//! is bisected with precomputed propagators of halved duration. Every jump
//! operator here has rank one, so the post-jump state is exact.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Cumulants, Method};
use crate::error::{Result, TurError};
use crate::exec::map_indexed;
use crate::linalg::{expm, CMatrix};
use crate::models::{EngineParams, Generator, ModelKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryOptions {
    /// Counting window; `None` means 100 relaxation times.
    pub horizon: Option<f64>,
    pub n_traj: usize,
    pub seed: u64,
    /// Discarded initial segment; `None` means 20 relaxation times.
    pub burn_in: Option<f64>,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        TrajectoryOptions {
            horizon: None,
            n_traj: 10_000,
            seed: 20_240_611,
            burn_in: None,
        }
    }
}

/// `sqrt(rate)·|to⟩⟨from|`-type jump, stored densely; `count` is the
/// contribution to the net cold-bath emission counter.
struct Jump {
    op: CMatrix<f64>,
    count: i64,
}

fn jumps(kind: ModelKind, params: &EngineParams) -> Vec<Jump> {
    let d = kind.levels();
    let (gh, gc, nh, nc, p) = (
        params.gamma_h,
        params.gamma_c,
        params.n_h,
        params.n_c,
        params.p,
    );
    let unit = |to: &[(usize, f64)], from: &[(usize, f64)], amp: f64| {
        let mut m = CMatrix::zeros(d);
        for &(t, a) in to {
            for &(f, b) in from {
                m.add_at(t, f, Complex64::new(amp * a * b, 0.0));
            }
        }
        m
    };
    let (g, l0, l1, l2) = (0usize, 1usize, 2usize, 3usize);
    let mut out = Vec::new();
    let mut push = |op: CMatrix<f64>, rate: f64, count: i64| {
        if rate > 0.0 {
            out.push(Jump {
                op: op.scaled(Complex64::new(rate.sqrt(), 0.0)),
                count,
            });
        }
    };
    match kind {
        ModelKind::ThreeLevelI | ModelKind::ThreeLevelII => {
            push(unit(&[(g, 1.0)], &[(l1, 1.0)], 1.0), gh * (nh + 1.0), 0);
            push(unit(&[(l1, 1.0)], &[(g, 1.0)], 1.0), gh * nh, 0);
        }
        ModelKind::FourLevelNIC => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            for sign in [1.0, -1.0] {
                let w = gh * (1.0 + sign * p);
                let bright = [(l1, s), (l2, sign * s)];
                push(unit(&[(g, 1.0)], &bright, 1.0), w * (nh + 1.0), 0);
                push(unit(&bright, &[(g, 1.0)], 1.0), w * nh, 0);
            }
        }
    }
    let (lo, hi) = if kind == ModelKind::ThreeLevelII {
        (l0, l1)
    } else {
        (g, l0)
    };
    push(unit(&[(lo, 1.0)], &[(hi, 1.0)], 1.0), gc * (nc + 1.0), 1);
    push(unit(&[(hi, 1.0)], &[(lo, 1.0)], 1.0), gc * nc, -1);
    out
}

fn hamiltonian(kind: ModelKind, lambda: f64) -> CMatrix<f64> {
    let d = kind.levels();
    let mut h = CMatrix::zeros(d);
    let l = Complex64::new(lambda, 0.0);
    let pairs: &[(usize, usize)] = match kind {
        ModelKind::ThreeLevelI => &[(2, 1)],
        ModelKind::ThreeLevelII => &[(1, 0)],
        ModelKind::FourLevelNIC => &[(2, 1), (3, 1)],
    };
    for &(a, b) in pairs {
        h.set(a, b, l);
        h.set(b, a, l);
    }
    h
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

const HALVINGS: usize = 40;

struct Propagators {
    /// `exp(−i H_eff Δ/2^k)` for `k = 0..=HALVINGS`.
    u: Vec<CMatrix<f64>>,
    dt: f64,
}

fn simulate(
    jumps: &[Jump],
    props: &Propagators,
    start: &[Complex64],
    burn_in: f64,
    horizon: f64,
    rng: &mut ChaCha8Rng,
) -> (i64, i64) {
    let end = burn_in + horizon;
    let mid = burn_in + horizon / 2.0;
    let mut psi = start.to_vec();
    let mut t = 0.0;
    let mut n = 0i64;
    let mut n_half = 0i64;
    let mut weights = vec![0.0; jumps.len()];
    loop {
        let r: f64 = rng.gen::<f64>();
        // no-jump evolution until the norm crosses r
        loop {
            let next = props.u[0].matvec(&psi);
            if norm2(&next) > r {
                psi = next;
                t += props.dt;
                if t >= end {
                    return (n, n_half);
                }
                continue;
            }
            let mut tau = props.dt;
            for k in 1..=HALVINGS {
                tau *= 0.5;
                let trial = props.u[k].matvec(&psi);
                if norm2(&trial) > r {
                    psi = trial;
                    t += tau;
                }
            }
            break;
        }
        if t >= end {
            return (n, n_half);
        }
        for (w, j) in weights.iter_mut().zip(jumps) {
            *w = norm2(&j.op.matvec(&psi));
        }
        let total: f64 = weights.iter().sum();
        let mut pick = rng.gen::<f64>() * total;
        let mut which = jumps.len() - 1;
        for (k, &w) in weights.iter().enumerate() {
            if pick < w {
                which = k;
                break;
            }
            pick -= w;
        }
        let next = jumps[which].op.matvec(&psi);
        let nn = norm2(&next).sqrt();
        psi = next.into_iter().map(|z| z / nn).collect();
        if t >= burn_in {
            n += jumps[which].count;
            if t < mid {
                n_half += jumps[which].count;
            }
        }
    }
}

/// Relaxation time `1/gap` of `L(0)`.
fn relaxation_time(kind: ModelKind, params: &EngineParams) -> Result<f64> {
    let g = Generator::<f64>::new(kind, params)?;
    let (ev, norm) = crate::models::spectrum_at_zero(&g)?;
    let gap = -ev[1].re;
    if gap <= crate::models::KERNEL_TOL * norm {
        return Err(TurError::DegenerateKernel {
            second: ev[1].norm(),
        });
    }
    Ok(1.0 / gap)
}

/// Sample mean and variance rates of the net cold-bath photon count over
/// `n_traj` independent trajectories started in the ground state.
pub fn trajectory_cumulants(
    kind: ModelKind,
    params: &EngineParams,
    opts: &TrajectoryOptions,
) -> Result<Cumulants> {
    params.validate()?;
    if opts.n_traj < 1000 {
        return Err(TurError::invalid(
            "n_traj",
            format!("need at least 1000 trajectories, got {}", opts.n_traj),
        ));
    }
    let tau = relaxation_time(kind, params)?;
    let horizon = opts.horizon.unwrap_or(100.0 * tau);
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(TurError::invalid("horizon", "must be finite and > 0"));
    }
    if tau > horizon / 10.0 {
        return Err(TurError::InsufficientHorizon {
            horizon,
            relaxation: tau,
        });
    }
    let burn_in = opts.burn_in.unwrap_or(20.0 * tau);

    let js = jumps(kind, params);
    let d = kind.levels();
    let mut heff = hamiltonian(kind, params.lambda);
    for j in &js {
        // −(i/2) L†L
        let mut ldl = CMatrix::zeros(d);
        for r in 0..d {
            for c in 0..d {
                let s: Complex64 = (0..d).map(|k| j.op.get(k, r).conj() * j.op.get(k, c)).sum();
                ldl.set(r, c, s);
            }
        }
        heff = heff.add(&ldl.scaled(Complex64::new(0.0, -0.5)));
    }
    let dt = 0.1 / heff.norm_inf().max(1e-300);
    let gen = heff.scaled(Complex64::new(0.0, -1.0));
    let u = (0..=HALVINGS)
        .map(|k| expm(&gen.scaled(Complex64::new(dt * 0.5f64.powi(k as i32), 0.0))))
        .collect();
    let props = Propagators { u, dt };
    let mut start = vec![Complex64::new(0.0, 0.0); d];
    start[0] = Complex64::new(1.0, 0.0);

    let counts = map_indexed(opts.n_traj, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(i as u64);
        simulate(&js, &props, &start, burn_in, horizon, &mut rng)
    });

    let nf = counts.len() as f64;
    let full: Vec<f64> = counts.iter().map(|&(n, _)| n as f64).collect();
    let mean = full.iter().sum::<f64>() / nf;
    let m2 = full.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / nf;
    let m4 = full.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / nf;
    let s2 = m2 * nf / (nf - 1.0);
    let se_mean = (s2 / nf).sqrt() / horizon;
    let se_var = ((m4 - m2 * m2 * (nf - 3.0) / (nf - 1.0)) / nf)
        .max(0.0)
        .sqrt()
        / horizon;

    // Var(N_T) = var·T + C + o(1): the half-window removes the constant offset.
    let half: Vec<f64> = counts.iter().map(|&(_, h)| h as f64).collect();
    let hmean = half.iter().sum::<f64>() / nf;
    let hs2 = half.iter().map(|x| (x - hmean).powi(2)).sum::<f64>() / (nf - 1.0);
    let var_corrected = (s2 - hs2) / (horizon / 2.0);

    Ok(
        Cumulants::new(mean / horizon, s2 / horizon, Method::Trajectory)
            .diag("se_current", se_mean)
            .diag("se_variance", se_var)
            .diag("horizon", horizon)
            .diag("burn_in", burn_in)
            .diag("relaxation_time", tau)
            .diag("n_traj", nf)
            .diag("variance_offset_corrected", var_corrected),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nic_jump_decomposition_reproduces_cross_rates() {
        let p = EngineParams::new(0.3, 0.03, 0.2, 6.0, 3.0, 0.7).unwrap();
        let js = jumps(ModelKind::FourLevelNIC, &p);
        // Σ_j L_j† L_j restricted to the excited doublet is Γ_h(n_h+1)·[[1,p],[p,1]].
        let mut m = [[0.0; 2]; 2];
        for j in &js {
            for (a, ra) in [2usize, 3].iter().enumerate() {
                for (b, rb) in [2usize, 3].iter().enumerate() {
                    m[a][b] += (0..4)
                        .map(|k| (j.op.get(k, *ra).conj() * j.op.get(k, *rb)).re)
                        .sum::<f64>();
                }
            }
        }
        let e = 0.3 * 7.0;
        assert!((m[0][0] - e).abs() < 1e-12 && (m[0][1] - 0.7 * e).abs() < 1e-12);
    }

    #[test]
    fn rejects_short_horizon_and_small_batches() {
        let p = EngineParams::new(0.1, 2.0, 0.2, 5.0, 0.027, 0.0).unwrap();
        let short = TrajectoryOptions {
            horizon: Some(1.0),
            ..Default::default()
        };
        assert!(matches!(
            trajectory_cumulants(ModelKind::ThreeLevelI, &p, &short),
            Err(TurError::InsufficientHorizon { .. })
        ));
        let small = TrajectoryOptions {
            n_traj: 10,
            ..Default::default()
        };
        assert!(matches!(
            trajectory_cumulants(ModelKind::ThreeLevelI, &p, &small),
            Err(TurError::InvalidParams { .. })
        ));
    }

    #[test]
    fn deterministic_given_seed() {
        let p = EngineParams::new(1.0, 1.0, 0.5, 3.0, 0.5, 0.0).unwrap();
        let o = TrajectoryOptions {
            n_traj: 1000,
            horizon: Some(60.0),
            burn_in: Some(10.0),
            seed: 3,
        };
        let a = trajectory_cumulants(ModelKind::ThreeLevelI, &p, &o).unwrap();
        let b = trajectory_cumulants(ModelKind::ThreeLevelI, &p, &o).unwrap();
        assert_eq!(a, b);
    }
}
