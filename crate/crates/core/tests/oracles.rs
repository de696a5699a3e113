//! Independent oracles: a dense Lindbladian assembled from operator products
//! with nalgebra, its eigenvalues, finite differences of the dominant
//! eigenvalue, and long-time integration of the population equations.

use maser_tur::fcs::{current_model1_closed_form, dominant_eigenvalue};
use maser_tur::models::{cold_current_from_state, DensityVector};
use maser_tur::{
    build_tilted_liouvillian, cumulants, steady_state, EngineParams, FcsOptions, Method, ModelKind,
};
use nalgebra::{Complex, DMatrix};

type C = Complex<f64>;
type M = DMatrix<C>;

fn ket_bra(d: usize, a: usize, b: usize) -> M {
    let mut m = M::zeros(d, d);
    m[(a, b)] = C::new(1.0, 0.0);
    m
}

const G: usize = 0;
const L0: usize = 1;
const L1: usize = 2;
const L2: usize = 3;

/// `(rate, X, Y, tilt)` for `rate·(XρY† − ½{Y†X, ρ})`; the sandwich term is
/// multiplied by `e^{−iχ·tilt}`.
struct Dissipator {
    rate: f64,
    x: M,
    y: M,
    tilt: f64,
}

struct Model {
    d: usize,
    h: M,
    dissipators: Vec<Dissipator>,
}

fn model(kind: ModelKind, p: &EngineParams) -> Model {
    let d = kind.levels();
    let lam = C::new(p.lambda, 0.0);
    let hop = |a, b| (ket_bra(d, a, b) + ket_bra(d, b, a)) * lam;
    let diss = |rate: f64, x: M, y: M, tilt: f64| Dissipator { rate, x, y, tilt };
    let mut ds = Vec::new();
    let (h, cold) = match kind {
        ModelKind::ThreeLevelI => (hop(L1, L0), (G, L0)),
        ModelKind::ThreeLevelII => (hop(L0, G), (L0, L1)),
        ModelKind::FourLevelNIC => (hop(L1, L0) + hop(L2, L0), (G, L0)),
    };
    let hot_levels: &[usize] = if kind == ModelKind::FourLevelNIC {
        &[L1, L2]
    } else {
        &[L1]
    };
    for &k in hot_levels {
        for &l in hot_levels {
            let w = if k == l { 1.0 } else { p.p };
            ds.push(diss(
                w * p.gamma_h * (p.n_h + 1.0),
                ket_bra(d, G, k),
                ket_bra(d, G, l),
                0.0,
            ));
            ds.push(diss(
                w * p.gamma_h * p.n_h,
                ket_bra(d, k, G),
                ket_bra(d, l, G),
                0.0,
            ));
        }
    }
    let down = ket_bra(d, cold.0, cold.1);
    let up = ket_bra(d, cold.1, cold.0);
    ds.push(diss(p.gamma_c * (p.n_c + 1.0), down.clone(), down, 1.0));
    ds.push(diss(p.gamma_c * p.n_c, up.clone(), up, -1.0));
    Model {
        d,
        h,
        dissipators: ds,
    }
}

fn apply(m: &Model, rho: &M, chi: f64) -> M {
    let i = C::new(0.0, 1.0);
    let mut out = (&m.h * rho - rho * &m.h) * (-i);
    for t in &m.dissipators {
        let yd = t.y.adjoint();
        let yx = &yd * &t.x;
        let phase = C::new(0.0, -chi * t.tilt).exp();
        out += (&t.x * rho * &yd * phase - (&yx * rho + rho * &yx) * C::new(0.5, 0.0))
            * C::new(t.rate, 0.0);
    }
    out
}

fn labels(kind: ModelKind) -> Vec<(usize, usize)> {
    let idx = |c: char| match c {
        'g' => G,
        '0' => L0,
        '1' => L1,
        _ => L2,
    };
    kind.basis_labels()
        .iter()
        .map(|s| {
            let c: Vec<char> = s.chars().collect();
            (idx(c[0]), idx(c[1]))
        })
        .collect()
}

/// Restricted generator from the oracle, plus the largest entry leaking out of the block.
fn oracle_block(kind: ModelKind, p: &EngineParams, chi: f64) -> (M, f64) {
    let m = model(kind, p);
    let basis = labels(kind);
    let n = basis.len();
    let mut out = M::zeros(n, n);
    let mut leak: f64 = 0.0;
    for (col, &(a, b)) in basis.iter().enumerate() {
        let img = apply(&m, &ket_bra(m.d, a, b), chi);
        for r in 0..m.d {
            for s in 0..m.d {
                match basis.iter().position(|&q| q == (r, s)) {
                    Some(row) => out[(row, col)] = img[(r, s)],
                    None => leak = leak.max(img[(r, s)].norm()),
                }
            }
        }
    }
    (out, leak)
}

fn crate_block(kind: ModelKind, p: &EngineParams, chi: f64) -> M {
    let l = build_tilted_liouvillian(kind, p, chi).unwrap();
    let n = l.dim();
    M::from_fn(n, n, |r, c| {
        let z = l.get(r, c);
        C::new(z.re, z.im)
    })
}

fn points() -> Vec<(ModelKind, EngineParams)> {
    let fig2 = EngineParams::new(0.1, 2.0, 0.2, 5.0, 0.027, 0.0).unwrap();
    let fig4 = EngineParams::new(0.3, 0.03, 0.3, 6.0, 3.0, 0.7).unwrap();
    let odd = EngineParams::new(1.7, 0.45, 0.8, 0.6, 2.4, -0.35).unwrap();
    let mut v = Vec::new();
    for kind in ModelKind::ALL {
        v.push((
            kind,
            if kind == ModelKind::FourLevelNIC {
                fig4
            } else {
                fig2
            },
        ));
        v.push((kind, odd));
    }
    v
}

#[test]
fn block_matches_operator_products() {
    for (kind, p) in points() {
        for chi in [0.0, 0.37, -1.2] {
            let (want, leak) = oracle_block(kind, &p, chi);
            assert!(leak < 1e-15, "{kind}: block is not invariant ({leak})");
            let got = crate_block(kind, &p, chi);
            let err = (&got - &want).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(err < 1e-14, "{kind} chi={chi}: {err}");
        }
    }
}

fn oracle_dominant(kind: ModelKind, p: &EngineParams, chi: f64) -> C {
    let (m, _) = oracle_block(kind, p, chi);
    let ev = m
        .schur()
        .eigenvalues()
        .expect("complex Schur form is triangular");
    *ev.iter()
        .max_by(|a, b| a.re.partial_cmp(&b.re).unwrap())
        .unwrap()
}

#[test]
fn dominant_eigenvalue_matches_dense_schur() {
    for (kind, p) in points() {
        for chi in [0.0, 0.1, 0.3] {
            let want = oracle_dominant(kind, &p, chi);
            let l = build_tilted_liouvillian(kind, &p, chi).unwrap();
            let got = dominant_eigenvalue(&l).unwrap();
            assert!(
                (C::new(got.re, got.im) - want).norm() < 1e-12,
                "{kind} chi={chi}: {got} vs {want}"
            );
            let mirror =
                dominant_eigenvalue(&build_tilted_liouvillian(kind, &p, -chi).unwrap()).unwrap();
            assert!((mirror - got.conj()).norm() < 1e-10);
        }
    }
}

#[test]
fn cumulants_match_dense_finite_differences() {
    let h = 2e-3;
    for (kind, p) in points() {
        let xi = |chi| oracle_dominant(kind, &p, chi);
        let (xp, xm, x2p, x2m, x0) = (xi(h), xi(-h), xi(2.0 * h), xi(-2.0 * h), xi(0.0));
        // Fourth-order central differences of ξ in χ.
        let d1 = (-x2p + xp * 8.0 - xm * 8.0 + x2m) / (12.0 * h);
        let d2 = (-x2p + xp * 16.0 - x0 * 30.0 + xm * 16.0 - x2m) / (12.0 * h * h);
        let current = (C::new(0.0, 1.0) * d1).re;
        let variance = -d2.re;
        let c = cumulants(kind, &p, Method::CharPoly, &FcsOptions::default()).unwrap();
        assert!(
            ((c.current - current) / c.current).abs() < 1e-7,
            "{kind}: {} vs {current}",
            c.current
        );
        assert!(
            ((c.variance - variance) / c.variance).abs() < 1e-6,
            "{kind}: {} vs {variance}",
            c.variance
        );
    }
}

/// The population and coherence equations of the three-level Model I,
/// integrated with classical RK4.
fn model_one_rhs(p: &EngineParams, r: &[C; 5]) -> [C; 5] {
    let [gg, r00, r11, r10, r01] = *r;
    let i = C::new(0.0, 1.0);
    let (gh, gc, lam, nh, nc) = (p.gamma_h, p.gamma_c, p.lambda, p.n_h, p.n_c);
    let d_gg = r11 * (gh * (nh + 1.0)) + r00 * (gc * (nc + 1.0)) - gg * (gh * nh + gc * nc);
    let d11 = i * lam * (r10 - r01) - (r11 * (nh + 1.0) - gg * nh) * gh;
    let d00 = -i * lam * (r10 - r01) - (r00 * (nc + 1.0) - gg * nc) * gc;
    let d10 = i * lam * (r11 - r00) - r10 * (0.5 * (gh * (nh + 1.0) + gc * (nc + 1.0)));
    [d_gg, d00, d11, d10, d10.conj()]
}

#[test]
fn long_time_integration_reaches_the_steady_state() {
    let p = EngineParams::new(0.1, 2.0, 0.2, 5.0, 0.027, 0.0).unwrap();
    let zero = C::new(0.0, 0.0);
    let mut r = [C::new(1.0, 0.0), zero, zero, zero, zero];
    let dt = 0.05;
    let add =
        |a: &[C; 5], b: &[C; 5], s: f64| -> [C; 5] { std::array::from_fn(|k| a[k] + b[k] * s) };
    let norm = |a: &[C; 5]| a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut steps = 0;
    while norm(&model_one_rhs(&p, &r)) >= 1e-12 {
        let k1 = model_one_rhs(&p, &r);
        let k2 = model_one_rhs(&p, &add(&r, &k1, dt / 2.0));
        let k3 = model_one_rhs(&p, &add(&r, &k2, dt / 2.0));
        let k4 = model_one_rhs(&p, &add(&r, &k3, dt));
        r = std::array::from_fn(|k| {
            r[k] + (k1[k] + k2[k] * 2.0 + k3[k] * 2.0 + k4[k]) * (dt / 6.0)
        });
        steps += 1;
        assert!(steps < 2_000_000, "integration did not settle");
    }
    let s = steady_state(ModelKind::ThreeLevelI, &p).unwrap();
    for (k, z) in s.components.iter().enumerate() {
        assert!(
            (C::new(z.re, z.im) - r[k]).norm() < 1e-10,
            "component {k}: {z} vs {}",
            r[k]
        );
    }
    let integrated = DensityVector {
        kind: ModelKind::ThreeLevelI,
        components: r
            .iter()
            .map(|z| num_complex::Complex64::new(z.re, z.im))
            .collect(),
        low: Vec::new(),
    };
    let i = cold_current_from_state(ModelKind::ThreeLevelI, &p, &integrated).unwrap();
    assert!(((i - current_model1_closed_form(&p)) / i).abs() < 1e-8);
}

#[test]
fn steady_state_residual_and_trace() {
    for (kind, p) in points() {
        let s = steady_state(kind, &p).unwrap();
        let (l, _) = oracle_block(kind, &p, 0.0);
        let v = nalgebra::DVector::from_iterator(
            s.components.len(),
            s.components.iter().map(|z| C::new(z.re, z.im)),
        );
        let res = (&l * &v).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(res < 1e-10, "{kind}: residual {res}");
        assert!((s.populations().iter().sum::<f64>() - 1.0).abs() < 1e-14);
        s.check_physical(1e-12).unwrap();
    }
}
