//! Thermodynamic observables assembled from the counting statistics:
//! entropy production σ, power, the TUR ratio `Q = σ·var/I²` and the
//! reliability `R = I/√var`.

pub mod closed_forms;
mod discrepancy;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TurError};
use crate::fcs::{self, Cumulants, FcsOptions, Method, TrajectoryOptions};
use crate::models::{EngineParams, LevelFrequencies, ModelKind};
use crate::scalar::Precision;

pub use closed_forms::{q1_closed_form, q2_closed_form, q_ht_closed_form};
pub use discrepancy::{discrepancy_report, DiscrepancyEntry, DiscrepancyReport};

/// One evaluated operating point; the unit of CSV/JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurReport {
    pub kind: ModelKind,
    #[serde(flatten)]
    pub params: EngineParams,
    pub current: f64,
    pub variance: f64,
    pub sigma: f64,
    pub q: f64,
    pub reliability: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub power: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub power_variance: Option<f64>,
    pub method: Method,
    #[serde(default)]
    pub diagnostics: BTreeMap<String, f64>,
}

impl TurReport {
    pub const CSV_HEADER: [&'static str; 13] = [
        "kind",
        "gamma_h",
        "gamma_c",
        "lambda",
        "n_h",
        "n_c",
        "p",
        "current",
        "variance",
        "sigma",
        "q",
        "reliability",
        "method",
    ];

    /// Fields in `CSV_HEADER` order, floats with 17 significant digits.
    pub fn csv_fields(&self) -> Vec<String> {
        let f = crate::io::fmt_f64;
        let p = &self.params;
        vec![
            self.kind.to_string(),
            f(p.gamma_h),
            f(p.gamma_c),
            f(p.lambda),
            f(p.n_h),
            f(p.n_c),
            f(p.p),
            f(self.current),
            f(self.variance),
            f(self.sigma),
            f(self.q),
            f(self.reliability),
            self.method.to_string(),
        ]
    }
}

/// Knobs for [`tur_q_with`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TurOptions {
    pub fcs: FcsOptions,
    pub trajectory: TrajectoryOptions,
    pub freqs: Option<LevelFrequencies>,
}

/// `ln[n_h(n_c+1)/(n_c(n_h+1))]`, evaluated without cancellation near `n_h = n_c`.
pub fn affinity(n_h: f64, n_c: f64) -> Result<f64> {
    if !(n_h > 0.0 && n_h.is_finite()) {
        return Err(TurError::invalid("n_h", "entropy production needs n_h > 0"));
    }
    if !(n_c > 0.0 && n_c.is_finite()) {
        return Err(TurError::invalid("n_c", "entropy production needs n_c > 0"));
    }
    Ok(((n_h - n_c) / (n_c * (n_h + 1.0))).ln_1p())
}

pub fn entropy_production(current: f64, n_h: f64, n_c: f64) -> Result<f64> {
    Ok(affinity(n_h, n_c)? * current)
}

pub fn power(current: f64, freqs: &LevelFrequencies) -> f64 {
    freqs.quantum() * current
}

pub fn power_variance(variance: f64, freqs: &LevelFrequencies) -> f64 {
    freqs.quantum().powi(2) * variance
}

/// `R = I/√var(I)`; the photon energy cancels.
pub fn reliability(c: &Cumulants) -> Result<f64> {
    if !(c.variance > 0.0) {
        return Err(TurError::DegenerateOperation {
            current: c.current,
            floor: 0.0,
        });
    }
    Ok(c.current / c.variance.sqrt())
}

/// Population-only part of Q: `ln[n_h(n_c+1)/(n_c(n_h+1))]·(n_h+n_c+2n_hn_c)/(n_h−n_c)`.
pub fn q_pop(n_h: f64, n_c: f64) -> Result<f64> {
    let a = affinity(n_h, n_c)?;
    if n_h == n_c {
        return Err(TurError::DegenerateOperation {
            current: 0.0,
            floor: 0.0,
        });
    }
    Ok(a * (n_h + n_c + 2.0 * n_h * n_c) / (n_h - n_c))
}

/// Four-level model at `p = −1`: identical to [`q_pop`].
pub fn q_nic_p_minus1(n_h: f64, n_c: f64) -> Result<f64> {
    q_pop(n_h, n_c)
}

pub fn tur_q(kind: ModelKind, params: &EngineParams, method: Method) -> Result<TurReport> {
    tur_q_with(kind, params, method, &TurOptions::default())
}

pub fn tur_q_with(
    kind: ModelKind,
    params: &EngineParams,
    method: Method,
    opts: &TurOptions,
) -> Result<TurReport> {
    params.validate()?;
    let a = affinity(params.n_h, params.n_c)?;
    if kind == ModelKind::FourLevelNIC && params.p == -1.0 {
        // The current vanishes identically; sampling cannot resolve the limit.
        if method == Method::Trajectory {
            return Err(TurError::DegenerateOperation {
                current: 0.0,
                floor: 0.0,
            });
        }
        return nic_endpoint(params, method, opts, a);
    }
    let c = cumulants_for(kind, params, method, opts)?;
    let floor = floor_for(params, &c);
    if !(c.current.abs() > floor) {
        return Err(TurError::DegenerateOperation {
            current: c.current,
            floor,
        });
    }
    let r = reliability(&c)?;
    let mut report = TurReport {
        kind,
        params: *params,
        current: c.current,
        variance: c.variance,
        sigma: a * c.current,
        q: a * c.variance / c.current,
        reliability: r,
        power: None,
        power_variance: None,
        method,
        diagnostics: c.diagnostics,
    };
    if let Some(f) = opts.freqs {
        report.power = Some(power(c.current, &f));
        report.power_variance = Some(power_variance(c.variance, &f));
    }
    Ok(report)
}

fn cumulants_for(
    kind: ModelKind,
    params: &EngineParams,
    method: Method,
    opts: &TurOptions,
) -> Result<Cumulants> {
    match method {
        Method::Trajectory => fcs::trajectory_cumulants(kind, params, &opts.trajectory),
        m => fcs::cumulants(kind, params, m, &opts.fcs),
    }
}

fn floor_for(params: &EngineParams, c: &Cumulants) -> f64 {
    match c.method {
        Method::Trajectory => c.diagnostics.get("se_current").copied().unwrap_or(0.0),
        _ => {
            let bits = c.diagnostics.get("mantissa_bits").copied().unwrap_or(106.0);
            let precision = if bits > 60.0 {
                Precision::DoubleDouble
            } else {
                Precision::Double
            };
            fcs::degeneracy_floor(params, precision)
        }
    }
}

/// At `p = −1` one hot-bath superposition is dark and the current vanishes
/// identically, so Q is 0/0. Report the one-sided limit: current and
/// variance both vanish linearly in `1+p`, and Q is the ratio of the slopes.
fn nic_endpoint(
    params: &EngineParams,
    method: Method,
    opts: &TurOptions,
    a: f64,
) -> Result<TurReport> {
    if params.n_h == params.n_c || params.lambda == 0.0 {
        return Err(TurError::DegenerateOperation {
            current: 0.0,
            floor: 0.0,
        });
    }
    let slopes = fcs::nic_endpoint_slopes(params, opts.fcs.precision)?;
    let q = a * slopes.ratio();
    if !q.is_finite() {
        return Err(TurError::DegenerateOperation {
            current: 0.0,
            floor: 0.0,
        });
    }
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("endpoint_current_slope".into(), slopes.current_slope);
    diagnostics.insert("endpoint_variance_slope".into(), slopes.variance_slope);
    Ok(TurReport {
        kind: ModelKind::FourLevelNIC,
        params: *params,
        current: 0.0,
        variance: 0.0,
        sigma: 0.0,
        q,
        reliability: 0.0,
        power: opts.freqs.map(|_| 0.0),
        power_variance: opts.freqs.map(|_| 0.0),
        method,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_production_values() {
        assert_eq!(entropy_production(0.3, 1.0, 1.0).unwrap(), 0.0);
        let s = entropy_production(0.01, 5.0, 0.027).unwrap();
        assert!((s - 0.01 * (5.0f64 * 1.027 / (0.027 * 6.0)).ln()).abs() < 1e-15);
        assert!(entropy_production(-0.2, 1.0, 2.0).unwrap() > 0.0);
        assert!(entropy_production(0.1, 1.0, 0.0).is_err());
    }

    #[test]
    fn power_scaling() {
        let f = LevelFrequencies::new(2.0, 1.0).unwrap();
        assert_eq!(power(0.0, &f), 0.0);
        assert!((power(0.3, &f) - 0.3).abs() < 1e-16);
        let f = LevelFrequencies::new(3.5, 1.25).unwrap();
        let (i, v, a) = (0.37, 0.21, 1.3);
        let q_i = a * i * v / (i * i);
        let p = power(i, &f);
        let q_p = a * i * power_variance(v, &f) / (p * p);
        assert!((q_i - q_p).abs() < 1e-14);
        assert!(LevelFrequencies::new(1.0, 2.0).is_err());
    }

    #[test]
    fn q_pop_values() {
        let v = q_pop(5.0, 0.027).unwrap();
        let want = (5.0f64 * 1.027 / (0.027 * 6.0)).ln() * (5.0 + 0.027 + 0.27) / 4.973;
        assert!((v - want).abs() < 1e-13 && (v - 3.6814).abs() < 1e-4);
        assert!((q_pop(5.0, 2.0).unwrap() - 1.25f64.ln() * 9.0).abs() < 1e-14);
        assert!((q_pop(1.0 + 1e-9, 1.0).unwrap() - 2.0).abs() < 1e-8);
        assert!(matches!(
            q_pop(2.0, 2.0),
            Err(TurError::DegenerateOperation { .. })
        ));
        assert_eq!(q_nic_p_minus1(3.0, 0.5).unwrap(), q_pop(3.0, 0.5).unwrap());
    }

    #[test]
    fn four_level_endpoint_is_the_one_sided_limit() {
        let p = EngineParams::new(0.6, 0.4, 0.15, 5.0, 2.0, -1.0).unwrap();
        let at = tur_q(ModelKind::FourLevelNIC, &p, Method::CharPoly).unwrap();
        let near = tur_q(
            ModelKind::FourLevelNIC,
            &p.with_p(-1.0 + 1e-9),
            Method::CharPoly,
        )
        .unwrap();
        assert!((at.q - near.q).abs() < 1e-8, "{} vs {}", at.q, near.q);
        assert_eq!((at.current, at.variance), (0.0, 0.0));
        assert!((at.q - q_pop(5.0, 2.0).unwrap()).abs() < 1e-12);
        let traj = tur_q_with(
            ModelKind::FourLevelNIC,
            &p,
            Method::Trajectory,
            &TurOptions::default(),
        );
        assert!(traj.is_err());
    }

    #[test]
    fn reliability_zero_current() {
        let c = Cumulants {
            current: 0.0,
            variance: 1.0,
            method: Method::CharPoly,
            diagnostics: BTreeMap::new(),
        };
        assert_eq!(reliability(&c).unwrap(), 0.0);
    }
}
