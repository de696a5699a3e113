//! Full counting statistics of the photon current into the cold bath.
//!
//! Three independent routes to the first two scaled cumulants:
//! the dominant eigenvalue of `L(χ)` differentiated numerically, the
//! characteristic-polynomial coefficients differentiated exactly with Taylor
//! jets, and a quantum-jump Monte Carlo unraveling.

mod charpoly;
mod trajectory;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::scalar::DoubleDouble;
use num_complex::{Complex, Complex64};
use serde::{Deserialize, Serialize};

use crate::error::{Result, TurError};
use crate::linalg::CMatrix;
use crate::models::{EngineParams, Generator, ModelKind, TiltedLiouvillian, KERNEL_TOL};
use crate::scalar::{cabs, clower, Precision, Real};

pub use charpoly::{
    charpoly_coeffs_numeric, charpoly_coeffs_taylor, cumulants_charpoly, nic_endpoint_slopes,
    CharPolyCoefficients, EndpointSlopes,
};
pub use trajectory::{trajectory_cumulants, TrajectoryOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Method {
    #[serde(rename = "eigfd")]
    EigFD,
    #[default]
    #[serde(rename = "charpoly")]
    CharPoly,
    #[serde(rename = "trajectory")]
    Trajectory,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::EigFD => "eigfd",
            Method::CharPoly => "charpoly",
            Method::Trajectory => "trajectory",
        })
    }
}

impl FromStr for Method {
    type Err = TurError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "eigfd" | "eig-fd" | "eig" => Ok(Method::EigFD),
            "charpoly" | "char-poly" | "cp" => Ok(Method::CharPoly),
            "trajectory" | "traj" | "mc" => Ok(Method::Trajectory),
            other => Err(TurError::invalid(
                "method",
                format!("expected eigfd, charpoly or trajectory, got '{other}'"),
            )),
        }
    }
}

/// Long-time current and scaled variance of the net cold-bath photon count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cumulants {
    pub current: f64,
    pub variance: f64,
    pub method: Method,
    pub diagnostics: BTreeMap<String, f64>,
}

impl Cumulants {
    fn new(current: f64, variance: f64, method: Method) -> Self {
        Cumulants {
            current,
            variance,
            method,
            diagnostics: BTreeMap::new(),
        }
    }

    fn diag(mut self, key: &str, value: f64) -> Self {
        self.diagnostics.insert(key.to_string(), value);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FcsOptions {
    /// Finite-difference step in χ (eigenvalue route and the numeric
    /// coefficient route).
    pub step: f64,
    pub precision: Precision,
}

impl Default for FcsOptions {
    fn default() -> Self {
        FcsOptions {
            step: 1e-3,
            precision: Precision::DoubleDouble,
        }
    }
}

impl FcsOptions {
    pub fn with_precision(precision: Precision) -> Self {
        FcsOptions {
            precision,
            ..Self::default()
        }
    }

    pub(crate) fn check_step(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0 && self.step <= 0.1) {
            return Err(TurError::invalid(
                "step",
                format!("must lie in (0, 0.1], got {}", self.step),
            ));
        }
        Ok(())
    }
}

/// Smallest |current| treated as a running engine. Scales with the bare
/// rates and with the unit roundoff of the arithmetic that produced it.
pub fn degeneracy_floor(params: &EngineParams, precision: Precision) -> f64 {
    let eps = match precision {
        Precision::Double => f64::EPS,
        Precision::DoubleDouble | Precision::Auto => DoubleDouble::EPS,
    };
    1e4 * eps * params.rate_scale()
}

/// Eigenvalues sorted by decreasing real part.
fn sorted_spectrum<R: Real>(m: &CMatrix<R>) -> Result<Vec<Complex<R>>> {
    let mut ev = m.eigenvalues().map_err(|e| TurError::EigenSolverFailure {
        iterations: e.iterations,
    })?;
    ev.sort_by(|a, b| b.re.partial_cmp(&a.re).unwrap_or(std::cmp::Ordering::Equal));
    Ok(ev)
}

fn dominant_in<R: Real>(m: &CMatrix<R>, chi: f64) -> Result<Complex<R>> {
    let ev = sorted_spectrum(m)?;
    if chi != 0.0 && ev.len() > 1 {
        let gap = (ev[0].re - ev[1].re).lower();
        if gap <= 1e-10 * m.norm_inf().lower() {
            return Err(TurError::DegenerateDominantRoot { chi, gap });
        }
    }
    Ok(ev[0])
}

/// Eigenvalue of largest real part (computed in double-double on the given entries).
pub fn dominant_eigenvalue(l: &TiltedLiouvillian) -> Result<Complex64> {
    let m = CMatrix::<DoubleDouble>::lift(l.matrix());
    dominant_in(&m, l.chi).map(clower)
}

fn eig_fd_in<R: Real>(kind: ModelKind, params: &EngineParams, step: f64) -> Result<Cumulants> {
    let g = Generator::<R>::new(kind, params)?;
    let ev0 = sorted_spectrum(&g.base)?;
    let norm = g.base.norm_inf();
    if cabs(ev0[1]) <= R::lift(KERNEL_TOL) * norm {
        return Err(TurError::DegenerateKernel {
            second: cabs(ev0[1]).lower(),
        });
    }
    let xi0 = ev0[0];
    let xi = |chi: f64| dominant_in(&g.at(R::lift(chi)), chi);
    let i = Complex::new(R::zero(), R::one());
    let two = R::lift(2.0);
    let estimate = |h: f64| -> Result<(Complex<R>, Complex<R>)> {
        let (p, m) = (xi(h)?, xi(-h)?);
        let hh = R::lift(h);
        let first = i * (p - m) / (two * hh);
        let second = -(p - xi0 * two + m) / (hh * hh);
        Ok((first, second))
    };
    let (i1, v1) = estimate(step)?;
    let (i2, v2) = estimate(step / 2.0)?;
    let three = R::lift(3.0);
    let four = R::lift(4.0);
    let cur = (i2 * four - i1) / three;
    let var = (v2 * four - v1) / three;
    let (cur, var) = (clower(cur), clower(var));
    let scale = params.rate_scale();
    if cur.im.abs() > 1e-6 * cur.re.abs().max(1e-6 * scale)
        || var.im.abs() > 1e-6 * var.re.abs().max(1e-6 * scale)
    {
        return Err(TurError::StepTooSmall { step });
    }
    Ok(Cumulants::new(cur.re, var.re, Method::EigFD)
        .diag("step", step)
        .diag("imag_current", cur.im)
        .diag("imag_variance", var.im)
        .diag("xi0_abs", cabs(xi0).lower())
        .diag("richardson_delta_current", (clower(i2) - clower(i1)).re))
}

/// Cumulants from finite differences of the dominant eigenvalue with one Richardson halving.
pub fn cumulants_eig_fd(
    kind: ModelKind,
    params: &EngineParams,
    opts: &FcsOptions,
) -> Result<Cumulants> {
    opts.check_step()?;
    match opts.precision {
        Precision::Double => eig_fd_in::<f64>(kind, params, opts.step),
        Precision::DoubleDouble | Precision::Auto => {
            eig_fd_in::<DoubleDouble>(kind, params, opts.step)
        }
    }
}

/// Dispatch on `method`. Trajectory runs use [`TrajectoryOptions::default`].
pub fn cumulants(
    kind: ModelKind,
    params: &EngineParams,
    method: Method,
    opts: &FcsOptions,
) -> Result<Cumulants> {
    match method {
        Method::EigFD => cumulants_eig_fd(kind, params, opts),
        Method::CharPoly => cumulants_charpoly(kind, params, opts),
        Method::Trajectory => trajectory_cumulants(kind, params, &TrajectoryOptions::default()),
    }
}

/// Closed-form Model I current,
/// `4(n_h−n_c)Γ_hΓ_cλ² / {4λ²[Γ_h(3n_h+1)+Γ_c(3n_c+1)] + (3n_hn_c+2n_h+2n_c+1)Γ'Γ_hΓ_c}`
/// with `Γ' = Γ_h(n_h+1)+Γ_c(n_c+1)`.
pub fn current_model1_closed_form(params: &EngineParams) -> f64 {
    let EngineParams {
        gamma_h: gh,
        gamma_c: gc,
        lambda: lam,
        n_h: nh,
        n_c: nc,
        ..
    } = *params;
    let gp = gh * (nh + 1.0) + gc * (nc + 1.0);
    let b = 3.0 * nh * nc + 2.0 * nh + 2.0 * nc + 1.0;
    let l2 = lam * lam;
    4.0 * (nh - nc) * gh * gc * l2
        / (4.0 * l2 * (gh * (3.0 * nh + 1.0) + gc * (3.0 * nc + 1.0)) + b * gp * gh * gc)
}
