//! Engine parameters and vectorized Lindblad generators.
//!
//! Generators are assembled from the Hamiltonian and the jump operators and
//! then restricted to the population/coherence block that the dynamics
//! actually populates. The cold-bath sandwich terms are kept aside so the
//! counting field can be attached to them.

use std::fmt;
use std::str::FromStr;

use num_complex::{Complex, Complex64};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TurError};
use crate::linalg::{CMatrix, Triplets};
use crate::scalar::{cis, DoubleDouble, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineParams {
    pub gamma_h: f64,
    pub gamma_c: f64,
    pub lambda: f64,
    pub n_h: f64,
    pub n_c: f64,
    /// Noise-induced coherence parameter `cos θ`; read only by the four-level model.
    #[serde(default)]
    pub p: f64,
}

impl EngineParams {
    pub fn new(
        gamma_h: f64,
        gamma_c: f64,
        lambda: f64,
        n_h: f64,
        n_c: f64,
        p: f64,
    ) -> Result<Self> {
        let params = EngineParams {
            gamma_h,
            gamma_c,
            lambda,
            n_h,
            n_c,
            p,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(TurError::invalid(
                    name,
                    format!("must be finite and > 0, got {v}"),
                ))
            }
        };
        let nonneg = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(TurError::invalid(
                    name,
                    format!("must be finite and >= 0, got {v}"),
                ))
            }
        };
        positive("gamma_h", self.gamma_h)?;
        positive("gamma_c", self.gamma_c)?;
        nonneg("lambda", self.lambda)?;
        nonneg("n_h", self.n_h)?;
        nonneg("n_c", self.n_c)?;
        if !(self.p.is_finite() && (-1.0..=1.0).contains(&self.p)) {
            return Err(TurError::invalid(
                "p",
                format!("must lie in [-1, 1], got {}", self.p),
            ));
        }
        Ok(())
    }

    /// Multiply every rate (Γ_h, Γ_c, λ) by `k`.
    pub fn with_rates_scaled(&self, k: f64) -> Self {
        EngineParams {
            gamma_h: self.gamma_h * k,
            gamma_c: self.gamma_c * k,
            lambda: self.lambda * k,
            ..*self
        }
    }

    /// Multiply both occupations by `s`.
    pub fn with_occupations_scaled(&self, s: f64) -> Self {
        EngineParams {
            n_h: self.n_h * s,
            n_c: self.n_c * s,
            ..*self
        }
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        EngineParams { lambda, ..*self }
    }

    pub fn with_p(&self, p: f64) -> Self {
        EngineParams { p, ..*self }
    }

    /// Largest bare transition rate; sets the numerical scale of the generator.
    pub fn rate_scale(&self) -> f64 {
        (self.gamma_h * (2.0 * self.n_h + 1.0))
            .max(self.gamma_c * (2.0 * self.n_c + 1.0))
            .max(self.lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelFrequencies {
    pub omega_h: f64,
    pub omega_c: f64,
}

impl LevelFrequencies {
    pub fn new(omega_h: f64, omega_c: f64) -> Result<Self> {
        if !(omega_c.is_finite() && omega_c > 0.0) {
            return Err(TurError::invalid("omega_c", "must be finite and > 0"));
        }
        if !(omega_h.is_finite() && omega_h > omega_c) {
            return Err(TurError::invalid("omega_h", "must exceed omega_c"));
        }
        Ok(LevelFrequencies { omega_h, omega_c })
    }

    /// Energy carried per photon, `ω_h − ω_c`.
    pub fn quantum(&self) -> f64 {
        self.omega_h - self.omega_c
    }
}

/// Bose–Einstein occupation `1/(e^{ω/T} − 1)` with ħ = k_B = 1.
pub fn occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(TurError::invalid("omega", "must be finite and > 0"));
    }
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(TurError::invalid("temperature", "must be finite and > 0"));
    }
    Ok(1.0 / (omega / temperature).exp_m1())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "I")]
    ThreeLevelI,
    #[serde(rename = "II")]
    ThreeLevelII,
    #[serde(rename = "NIC")]
    FourLevelNIC,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [
        ModelKind::ThreeLevelI,
        ModelKind::ThreeLevelII,
        ModelKind::FourLevelNIC,
    ];

    /// Dimension of the vectorized block.
    pub fn dim(self) -> usize {
        match self {
            ModelKind::FourLevelNIC => 10,
            _ => 5,
        }
    }

    pub fn levels(self) -> usize {
        match self {
            ModelKind::FourLevelNIC => 4,
            _ => 3,
        }
    }

    /// Number of leading basis entries that are populations.
    pub fn populations(self) -> usize {
        self.levels()
    }

    pub fn basis_labels(self) -> Vec<String> {
        self.basis()
            .iter()
            .map(|&(a, b)| format!("{}{}", LEVEL_NAMES[a], LEVEL_NAMES[b]))
            .collect()
    }

    /// `(row, col)` level pairs in basis order.
    pub(crate) fn basis(self) -> &'static [(usize, usize)] {
        match self {
            ModelKind::ThreeLevelI => &[(G, G), (L0, L0), (L1, L1), (L1, L0), (L0, L1)],
            ModelKind::ThreeLevelII => &[(G, G), (L0, L0), (L1, L1), (G, L0), (L0, G)],
            ModelKind::FourLevelNIC => &[
                (G, G),
                (L0, L0),
                (L1, L1),
                (L2, L2),
                (L1, L2),
                (L2, L1),
                (L1, L0),
                (L0, L1),
                (L2, L0),
                (L0, L2),
            ],
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            ModelKind::ThreeLevelI => "I",
            ModelKind::ThreeLevelII => "II",
            ModelKind::FourLevelNIC => "NIC",
        }
    }

    pub fn uses_p(self) -> bool {
        self == ModelKind::FourLevelNIC
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for ModelKind {
    type Err = TurError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" | "MODEL-I" | "THREELEVELI" => Ok(ModelKind::ThreeLevelI),
            "II" | "2" | "MODEL-II" | "THREELEVELII" => Ok(ModelKind::ThreeLevelII),
            "NIC" | "4" | "FOUR" | "FOURLEVELNIC" => Ok(ModelKind::FourLevelNIC),
            other => Err(TurError::invalid(
                "model",
                format!("expected I, II or NIC, got '{other}'"),
            )),
        }
    }
}

const G: usize = 0;
const L0: usize = 1;
const L1: usize = 2;
const L2: usize = 3;
const LEVEL_NAMES: [&str; 4] = ["g", "0", "1", "2"];

/// Which cold-bath process a sandwich term belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Channel {
    Other,
    ColdEmission,
    ColdAbsorption,
}

/// `rate · (X ρ Y† − ½{Y† X, ρ})` with `X = |x.0⟩⟨x.1|`, `Y = |y.0⟩⟨y.1|`.
struct Term<R> {
    rate: R,
    x: (usize, usize),
    y: (usize, usize),
    channel: Channel,
}

struct LindbladSpec<R> {
    levels: usize,
    /// Real symmetric Hamiltonian entries `(i, j, h_ij)`.
    hamiltonian: Vec<(usize, usize, R)>,
    terms: Vec<Term<R>>,
}

fn lindblad_spec<R: Real>(kind: ModelKind, params: &EngineParams) -> LindbladSpec<R> {
    let gh = R::lift(params.gamma_h);
    let gc = R::lift(params.gamma_c);
    let lam = R::lift(params.lambda);
    let nh = R::lift(params.n_h);
    let nc = R::lift(params.n_c);
    let one = R::one();
    let plain = |rate, x, y| Term {
        rate,
        x,
        y,
        channel: Channel::Other,
    };

    let (levels, hamiltonian, mut terms) = match kind {
        ModelKind::ThreeLevelI => (
            3,
            vec![(L1, L0, lam), (L0, L1, lam)],
            vec![
                plain(gh * (nh + one), (G, L1), (G, L1)),
                plain(gh * nh, (L1, G), (L1, G)),
            ],
        ),
        ModelKind::ThreeLevelII => (
            3,
            vec![(L0, G, lam), (G, L0, lam)],
            vec![
                plain(gh * (nh + one), (G, L1), (G, L1)),
                plain(gh * nh, (L1, G), (L1, G)),
            ],
        ),
        ModelKind::FourLevelNIC => {
            let p = R::lift(params.p);
            let mut t = Vec::new();
            for (k, l, w) in [(L1, L1, one), (L2, L2, one), (L1, L2, p), (L2, L1, p)] {
                t.push(plain(gh * w * (nh + one), (G, k), (G, l)));
                t.push(plain(gh * w * nh, (k, G), (l, G)));
            }
            (
                4,
                vec![(L1, L0, lam), (L0, L1, lam), (L2, L0, lam), (L0, L2, lam)],
                t,
            )
        }
    };
    let cold = match kind {
        ModelKind::ThreeLevelII => (L0, L1),
        _ => (G, L0),
    };
    terms.push(Term {
        rate: gc * (nc + one),
        x: cold,
        y: cold,
        channel: Channel::ColdEmission,
    });
    let up = (cold.1, cold.0);
    terms.push(Term {
        rate: gc * nc,
        x: up,
        y: up,
        channel: Channel::ColdAbsorption,
    });
    LindbladSpec {
        levels,
        hamiltonian,
        terms,
    }
}

/// Image of `|a⟩⟨b|` under the generator, split by channel.
fn apply_to_unit<R: Real>(
    spec: &LindbladSpec<R>,
    a: usize,
    b: usize,
) -> Vec<((usize, usize), Complex<R>, Channel)> {
    let mut out = Vec::new();
    let i = Complex::new(R::zero(), R::one());
    let half = R::lift(0.5);
    for &(r, c, h) in &spec.hamiltonian {
        // -i H|a><b| : H_{r a} |r><b|
        if c == a {
            out.push(((r, b), -i * h, Channel::Other));
        }
        // +i |a><b| H : H_{b c} |a><c|
        if r == b {
            out.push(((a, c), i * h, Channel::Other));
        }
    }
    for t in &spec.terms {
        let (p, q) = t.x;
        let (r, s) = t.y;
        let rate = Complex::new(t.rate, R::zero());
        // X |a><b| Y† = δ(q,a) δ(b,s) |p><r|
        if q == a && b == s {
            out.push(((p, r), rate, t.channel));
        }
        // Y†X = δ(r,p) |s><q|
        if r == p {
            let h = Complex::new(half * t.rate, R::zero());
            if q == a {
                out.push(((s, b), -h, Channel::Other));
            }
            if b == s {
                out.push(((a, q), -h, Channel::Other));
            }
        }
    }
    out
}

/// Generator split as `L(χ) = base + (e^{−iχ}−1)·emission + (e^{iχ}−1)·absorption`.
#[derive(Debug, Clone)]
pub struct Generator<R> {
    pub kind: ModelKind,
    pub base: CMatrix<R>,
    pub emission: Triplets<R>,
    pub absorption: Triplets<R>,
}

impl<R: Real> Generator<R> {
    pub fn new(kind: ModelKind, params: &EngineParams) -> Result<Self> {
        params.validate()?;
        let spec = lindblad_spec::<R>(kind, params);
        let basis = kind.basis();
        let index = |pair: (usize, usize)| basis.iter().position(|&q| q == pair);
        let n = basis.len();
        let mut base = CMatrix::zeros(n);
        let mut emission = Vec::new();
        let mut absorption = Vec::new();
        for (col, &(a, b)) in basis.iter().enumerate() {
            for (pair, v, ch) in apply_to_unit(&spec, a, b) {
                let row = index(pair).expect("generator leaks out of the restricted block");
                base.add_at(row, col, v);
                match ch {
                    Channel::ColdEmission => emission.push((row, col, v)),
                    Channel::ColdAbsorption => absorption.push((row, col, v)),
                    Channel::Other => {}
                }
            }
        }
        Ok(Generator {
            kind,
            base,
            emission,
            absorption,
        })
    }

    /// Dense tilted generator at counting field `chi`.
    pub fn at(&self, chi: R) -> CMatrix<R> {
        let mut m = self.base.clone();
        if chi != R::zero() {
            let one = Complex::new(R::one(), R::zero());
            let e = cis(chi);
            m.add_triplets(&self.emission, e.conj() - one);
            m.add_triplets(&self.absorption, e - one);
        }
        m
    }

    /// Taylor coefficients `(A1, A2)` of `L(χ) = base + A1 χ + A2 χ² + O(χ³)`.
    pub fn taylor(&self) -> (Triplets<R>, Triplets<R>) {
        let i = Complex::new(R::zero(), R::one());
        let mhalf = Complex::new(R::lift(-0.5), R::zero());
        let mut a1 = Vec::new();
        let mut a2 = Vec::new();
        for &(r, c, v) in &self.emission {
            a1.push((r, c, -i * v));
            a2.push((r, c, mhalf * v));
        }
        for &(r, c, v) in &self.absorption {
            a1.push((r, c, i * v));
            a2.push((r, c, mhalf * v));
        }
        (a1, a2)
    }

    /// Row vector `1ᵀ` picking out the trace.
    pub fn trace_functional(&self) -> Vec<Complex<R>> {
        let np = self.kind.populations();
        (0..self.kind.dim())
            .map(|k| {
                if k < np {
                    Complex::new(R::one(), R::zero())
                } else {
                    Complex::zero()
                }
            })
            .collect()
    }
}

/// Full `d² × d²` superoperator at χ = 0 on `vec(ρ)` with index `a·d + b`.
/// Used to audit that the restricted block is closed.
pub fn full_superoperator(kind: ModelKind, params: &EngineParams) -> Result<CMatrix<f64>> {
    params.validate()?;
    let spec = lindblad_spec::<f64>(kind, params);
    let d = spec.levels;
    let mut m = CMatrix::zeros(d * d);
    for a in 0..d {
        for b in 0..d {
            for ((x, y), v, _) in apply_to_unit(&spec, a, b) {
                m.add_at(x * d + y, a * d + b, v);
            }
        }
    }
    Ok(m)
}

/// Dense tilted generator in the model's restricted basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltedLiouvillian {
    pub kind: ModelKind,
    pub chi: f64,
    pub basis: Vec<String>,
    matrix: CMatrix<f64>,
}

impl TiltedLiouvillian {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix.get(row, col)
    }

    pub fn matrix(&self) -> &CMatrix<f64> {
        &self.matrix
    }

    pub fn from_matrix(kind: ModelKind, chi: f64, matrix: CMatrix<f64>) -> Self {
        assert_eq!(matrix.dim(), kind.dim());
        TiltedLiouvillian {
            kind,
            chi,
            basis: kind.basis_labels(),
            matrix,
        }
    }

    /// Entry at the basis labels, e.g. `("gg", "00")`.
    pub fn entry(&self, row: &str, col: &str) -> Option<Complex64> {
        let r = self.basis.iter().position(|b| b == row)?;
        let c = self.basis.iter().position(|b| b == col)?;
        Some(self.get(r, c))
    }
}

#[derive(Serialize)]
struct TiltedLiouvillianJson<'a> {
    kind: ModelKind,
    chi: f64,
    dim: usize,
    basis: &'a [String],
    entries: Vec<Vec<[f64; 2]>>,
}

impl Serialize for TiltedLiouvillian {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let entries = (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| [self.get(r, c).re, self.get(r, c).im])
                    .collect()
            })
            .collect();
        TiltedLiouvillianJson {
            kind: self.kind,
            chi: self.chi,
            dim: n,
            basis: &self.basis,
            entries,
        }
        .serialize(s)
    }
}

pub fn build_tilted_liouvillian(
    kind: ModelKind,
    params: &EngineParams,
    chi: f64,
) -> Result<TiltedLiouvillian> {
    if !chi.is_finite() {
        return Err(TurError::invalid("chi", "must be finite"));
    }
    let g = Generator::<f64>::new(kind, params)?;
    Ok(TiltedLiouvillian::from_matrix(kind, chi, g.at(chi)))
}

/// Density matrix components in the model's basis order.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityVector {
    pub kind: ModelKind,
    pub components: Vec<Complex64>,
    /// Rounding remainders `ρ − components` of the extended-precision solve
    /// (empty when unknown). Lets bath currents be formed without cancellation.
    pub low: Vec<Complex64>,
}

impl DensityVector {
    pub fn populations(&self) -> Vec<f64> {
        self.components[..self.kind.populations()]
            .iter()
            .map(|z| z.re)
            .collect()
    }

    /// Component by label, e.g. `"10"`.
    pub fn component(&self, label: &str) -> Option<Complex64> {
        let k = self.kind.basis_labels().iter().position(|b| b == label)?;
        Some(self.components[k])
    }

    /// Checks populations, normalization, conjugate pairs and the 2×2
    /// positivity witness for every stored coherence.
    pub fn check_physical(&self, tol: f64) -> std::result::Result<(), String> {
        let pops = self.populations();
        for (k, &p) in pops.iter().enumerate() {
            if !(-tol..=1.0 + tol).contains(&p) {
                return Err(format!("population {k} = {p} outside [0,1]"));
            }
        }
        let sum: f64 = pops.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(format!("populations sum to {sum}"));
        }
        let basis = self.kind.basis();
        let pop_of = |lvl: usize| {
            basis
                .iter()
                .position(|&q| q == (lvl, lvl))
                .map(|k| self.components[k].re)
        };
        for (k, &(a, b)) in basis.iter().enumerate() {
            if a == b {
                continue;
            }
            let partner = basis
                .iter()
                .position(|&q| q == (b, a))
                .ok_or("unpaired coherence")?;
            if (self.components[k] - self.components[partner].conj()).norm() > tol {
                return Err(format!("coherence {k} is not the conjugate of {partner}"));
            }
            let (pa, pb) = (pop_of(a).unwrap_or(0.0), pop_of(b).unwrap_or(0.0));
            if self.components[k].norm_sqr() > pa * pb + tol {
                return Err(format!("coherence {k} violates positivity"));
            }
        }
        Ok(())
    }
}

impl Serialize for DensityVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Json {
            kind: ModelKind,
            basis: Vec<String>,
            components: Vec<[f64; 2]>,
        }
        Json {
            kind: self.kind,
            basis: self.kind.basis_labels(),
            components: self.components.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(s)
    }
}

/// Relative tolerance on `|ξ|/‖L‖` for counting an eigenvalue as part of the kernel.
pub const KERNEL_TOL: f64 = 1e-8;

/// Spectrum of `L(0)` sorted by decreasing real part, plus `‖L‖`.
pub(crate) fn spectrum_at_zero<R: Real>(g: &Generator<R>) -> Result<(Vec<Complex<R>>, R)> {
    let l0 = &g.base;
    let mut ev = l0.eigenvalues().map_err(|e| TurError::EigenSolverFailure {
        iterations: e.iterations,
    })?;
    ev.sort_by(|a, b| b.re.partial_cmp(&a.re).unwrap_or(std::cmp::Ordering::Equal));
    Ok((ev, l0.norm_inf()))
}

/// Errors with `DegenerateKernel` unless exactly one eigenvalue of `L(0)` is ~0.
pub(crate) fn check_kernel<R: Real>(g: &Generator<R>) -> Result<()> {
    let (ev, norm) = spectrum_at_zero(g)?;
    let second = crate::scalar::cabs(ev[1]);
    if second <= R::lift(KERNEL_TOL) * norm {
        return Err(TurError::DegenerateKernel {
            second: second.lower(),
        });
    }
    Ok(())
}

/// Solve `L(0)ρ = 0`, `tr ρ = 1` with the trace row replacing the first equation.
pub(crate) fn solve_steady<R: Real>(g: &Generator<R>) -> Result<Vec<Complex<R>>> {
    let n = g.kind.dim();
    let mut a = g.base.clone();
    let tr = g.trace_functional();
    for (c, &v) in tr.iter().enumerate() {
        a.set(0, c, v);
    }
    let mut rhs = vec![Complex::zero(); n];
    rhs[0] = Complex::new(R::one(), R::zero());
    a.solve(&rhs)
        .ok_or(TurError::DegenerateKernel { second: 0.0 })
}

pub fn steady_state(kind: ModelKind, params: &EngineParams) -> Result<DensityVector> {
    let g = Generator::<DoubleDouble>::new(kind, params)?;
    check_kernel(&g)?;
    let rho = solve_steady(&g)?;
    let components: Vec<Complex64> = rho.iter().map(|&z| crate::scalar::clower(z)).collect();
    let low = rho
        .iter()
        .zip(&components)
        .map(|(z, c)| {
            let rem = |x: DoubleDouble, h: f64| (x - DoubleDouble::from(h)).lower();
            Complex64::new(rem(z.re, c.re), rem(z.im, c.im))
        })
        .collect();
    Ok(DensityVector {
        kind,
        components,
        low,
    })
}

/// Net photon emission rate into the cold bath read off the cold dissipator.
pub fn cold_current_from_state(
    kind: ModelKind,
    params: &EngineParams,
    state: &DensityVector,
) -> Result<f64> {
    params.validate()?;
    if state.kind != kind {
        return Err(TurError::invalid(
            "state",
            format!("state is for model {}, not {kind}", state.kind),
        ));
    }
    let (upper, lower) = match kind {
        ModelKind::ThreeLevelII => (L1, L0),
        _ => (L0, G),
    };
    let basis = kind.basis();
    let pop = |lvl: usize| {
        let k = basis.iter().position(|&q| q == (lvl, lvl)).unwrap();
        let lo = state.low.get(k).map_or(0.0, |z| z.re);
        DoubleDouble::from(state.components[k].re) + DoubleDouble::from(lo)
    };
    let dd = DoubleDouble::from;
    let nc = dd(params.n_c);
    Ok((dd(params.gamma_c) * ((nc + dd(1.0)) * pop(upper) - nc * pop(lower))).lower())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2() -> EngineParams {
        EngineParams::new(0.1, 2.0, 0.5, 5.0, 0.027, 0.0).unwrap()
    }

    #[test]
    fn rejects_bad_fields_by_name() {
        let e = EngineParams::new(0.1, 2.0, 0.5, 5.0, 0.027, 1.5).unwrap_err();
        assert!(matches!(e, TurError::InvalidParams { ref field, .. } if field == "p"));
        let e = EngineParams::new(0.0, 2.0, 0.5, 5.0, 0.027, 0.0).unwrap_err();
        assert!(matches!(e, TurError::InvalidParams { ref field, .. } if field == "gamma_h"));
        let e = EngineParams::new(0.1, 2.0, -0.5, 5.0, 0.027, 0.0).unwrap_err();
        assert!(matches!(e, TurError::InvalidParams { ref field, .. } if field == "lambda"));
        assert!(EngineParams::new(0.1, 2.0, 0.0, 0.0, 0.0, -1.0).is_ok());
    }

    #[test]
    fn cold_current_survives_near_threshold() {
        let p = EngineParams::new(0.7, 1.3, 0.4, 2.0 * (1.0 + 1e-9), 2.0, 0.0).unwrap();
        let s = steady_state(ModelKind::ThreeLevelI, &p).unwrap();
        let i = cold_current_from_state(ModelKind::ThreeLevelI, &p, &s).unwrap();
        let want = crate::fcs::current_model1_closed_form(&p);
        assert!(((i - want) / want).abs() < 1e-8, "{i} vs {want}");
    }

    #[test]
    fn model_one_cold_entries() {
        let l = build_tilted_liouvillian(ModelKind::ThreeLevelI, &fig2(), 0.0).unwrap();
        assert!((l.entry("gg", "00").unwrap() - Complex64::new(2.054, 0.0)).norm() < 1e-15);
        assert!((l.entry("00", "gg").unwrap() - Complex64::new(0.054, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn tilt_dresses_only_cold_sandwiches() {
        let chi = 0.3;
        let l = build_tilted_liouvillian(ModelKind::ThreeLevelI, &fig2(), chi).unwrap();
        let e = Complex64::new(0.0, -chi).exp();
        assert!((l.entry("gg", "00").unwrap() - 2.054 * e).norm() < 1e-15);
        assert!((l.entry("00", "gg").unwrap() - 0.054 * e.conj()).norm() < 1e-15);
        assert!((l.entry("gg", "11").unwrap() - Complex64::new(0.6, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn basis_labels() {
        assert_eq!(
            ModelKind::ThreeLevelII.basis_labels(),
            ["gg", "00", "11", "g0", "0g"]
        );
        assert_eq!(ModelKind::FourLevelNIC.basis_labels()[4], "12");
        assert_eq!(ModelKind::FourLevelNIC.dim(), 10);
    }

    #[test]
    fn restricted_block_is_closed() {
        let params = EngineParams::new(0.7, 1.3, 0.4, 2.0, 0.5, 0.3).unwrap();
        for kind in ModelKind::ALL {
            let full = full_superoperator(kind, &params).unwrap();
            let d = kind.levels();
            let inside: Vec<usize> = kind.basis().iter().map(|&(a, b)| a * d + b).collect();
            for r in 0..d * d {
                for c in 0..d * d {
                    if inside.contains(&r) != inside.contains(&c) {
                        assert_eq!(
                            full.get(r, c),
                            Complex64::new(0.0, 0.0),
                            "{kind}: ({r},{c})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn occupation_values() {
        assert!((occupation(1.0, 1.0).unwrap() - 1.0 / (std::f64::consts::E - 1.0)).abs() < 1e-15);
        assert!(occupation(1.0, 1e-3).unwrap() < 1e-300);
        assert!((occupation(1.0, 1e4).unwrap() / 1e4 - 1.0).abs() < 1e-4);
        assert!(occupation(0.0, 1.0).is_err());
        assert!(occupation(1.0, -1.0).is_err());
    }

    #[test]
    fn model_kind_parsing() {
        assert_eq!("nic".parse::<ModelKind>().unwrap(), ModelKind::FourLevelNIC);
        assert_eq!("II".parse::<ModelKind>().unwrap(), ModelKind::ThreeLevelII);
        assert!("III".parse::<ModelKind>().is_err());
        assert_eq!(
            serde_json::to_string(&ModelKind::ThreeLevelI).unwrap(),
            "\"I\""
        );
    }
}
