//! Closed-form expressions transcribed symbol for symbol.
//!
//! These are kept apart from the counting-statistics pipeline on purpose:
//! several of them disagree with it (see [`super::discrepancy_report`]), and
//! nothing downstream consumes them except that report and its tests.
//! The `*_occupation_weighted` / `*_primed` variants are the readings that
//! the numerics single out; they are provided for comparison only.

use crate::error::{Result, TurError};
use crate::fcs::CharPolyCoefficients;
use crate::models::EngineParams;

use super::affinity;

fn nonthreshold(p: &EngineParams) -> Result<()> {
    p.validate()?;
    if p.n_h == p.n_c {
        return Err(TurError::DegenerateOperation {
            current: 0.0,
            floor: 0.0,
        });
    }
    Ok(())
}

struct Model1Symbols {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    f: f64,
    g: f64,
    h: f64,
}

fn model1_symbols(p: &EngineParams, weighted: bool) -> Model1Symbols {
    let EngineParams {
        gamma_h: gh,
        gamma_c: gc,
        lambda: lam,
        n_h: nh,
        n_c: nc,
        ..
    } = *p;
    let l2 = lam * lam;
    let (wg, wh) = if weighted { (nh, nc) } else { (1.0, 1.0) };
    Model1Symbols {
        a: gc * (1.0 + nc) + gh * (1.0 + nh),
        b: 1.0 + 2.0 * nh + nc * (2.0 + 3.0 * nh),
        c: 4.0 * (gc * (1.0 + 3.0 * nc) + gh * (1.0 + 3.0 * nh)),
        d: (1.0 + 2.0 * nc) * gc * ((1.0 + nc).powi(2) * gc * gc + 16.0 * l2),
        f: (1.0 + 2.0 * nh) * gh * ((1.0 + nh).powi(2) * gh * gh + 16.0 * l2),
        g: (1.0 + nc) * (7.0 + 13.0 * nc + 6.0 * (2.0 + 3.0 * nc) * wg) * gc * gc * gh,
        h: (1.0 + nh) * (7.0 + 13.0 * nh + 6.0 * (2.0 + 3.0 * nh) * wh) * gh * gh * gc,
    }
}

fn q1_from(p: &EngineParams, s: &Model1Symbols) -> Result<f64> {
    let EngineParams {
        gamma_h: gh,
        gamma_c: gc,
        lambda: lam,
        n_h: nh,
        n_c: nc,
        ..
    } = *p;
    let l2 = lam * lam;
    let dn = nh - nc;
    let den = s.a * s.b * gc * gh + s.c * l2;
    let inner = s.a * (nh + nc + 2.0 * nh * nc)
        + 8.0 * dn * dn * l2 * gc * gh / den * (2.0 - (s.d + s.f + s.g + s.h) / den);
    Ok(inner / (s.a * dn) * affinity(nh, nc)?)
}

/// Model I TUR ratio as printed (the `G`, `H` groups carry no occupation
/// factor on `6(2+3n)`).
pub fn q1_closed_form(p: &EngineParams) -> Result<f64> {
    nonthreshold(p)?;
    q1_from(p, &model1_symbols(p, false))
}

/// Model I TUR ratio with `G ∝ 6(2+3n_c)n_h`, `H ∝ 6(2+3n_h)n_c`.
pub fn q1_closed_form_occupation_weighted(p: &EngineParams) -> Result<f64> {
    nonthreshold(p)?;
    q1_from(p, &model1_symbols(p, true))
}

fn q2_from(p: &EngineParams, primed_bracket: bool) -> Result<f64> {
    let EngineParams {
        gamma_h: gh,
        gamma_c: gc,
        lambda: lam,
        n_h: nh,
        n_c: nc,
        ..
    } = *p;
    let l2 = lam * lam;
    let dn = nh - nc;
    let ap = gc * nc + gh * nh;
    let bp = nc + nh + 3.0 * nc * nh;
    let cp = gc * (1.0 + 2.0 * nc) + gh * (1.0 + 2.0 * nh);
    let dp = gc * (2.0 + 3.0 * nc) + gh * (2.0 + 3.0 * nh);
    let den = ap * (ap * bp + 4.0 * dp * l2);
    let bracket = if primed_bracket {
        ap * (4.0 * bp + ap * cp) + 16.0 * cp * l2
    } else {
        let s = model1_symbols(p, false);
        s.a * (4.0 * s.b + s.a * s.c) + 16.0 * s.c * l2
    };
    let braces =
        (nh + nc + 2.0 * nh * nc) / dn + 8.0 * dn * gc * gh * l2 / den * (2.0 - bracket / den);
    Ok(affinity(nh, nc)? * braces)
}

/// Model II TUR ratio as printed: the inner bracket uses the unprimed
/// Model I symbols `A`, `B`, `C`.
pub fn q2_closed_form(p: &EngineParams) -> Result<f64> {
    nonthreshold(p)?;
    q2_from(p, false)
}

/// Model II TUR ratio with primed symbols throughout the inner bracket.
pub fn q2_closed_form_primed(p: &EngineParams) -> Result<f64> {
    nonthreshold(p)?;
    q2_from(p, true)
}

/// High-temperature TUR ratio shared by both three-level models.
pub fn q_ht_closed_form(p: &EngineParams) -> Result<f64> {
    nonthreshold(p)?;
    let EngineParams {
        gamma_h: gh,
        gamma_c: gc,
        lambda: lam,
        n_h: nh,
        n_c: nc,
        ..
    } = *p;
    let l2 = lam * lam;
    let dn = nh - nc;
    let num = 16.0
        * dn
        * dn
        * gh
        * gc
        * l2
        * (gc * gc * nc * nc + gh * gh * nh * nh + 5.0 * gc * gh * nh * nc + l2);
    let den = 9.0 * nh * nc * (gc * nc + gh * nh).powi(2) * (4.0 * l2 + gh * gc * nh * nc).powi(2);
    Ok(2.0 - num / den)
}

/// Model I characteristic-polynomial coefficients as printed.
/// `c0` is not printed and is reported as 0.
pub fn model1_coefficients_printed(p: &EngineParams) -> CharPolyCoefficients {
    let EngineParams {
        gamma_h: gh,
        gamma_c: gc,
        lambda: lam,
        n_h: nh,
        n_c: nc,
        ..
    } = *p;
    let l2 = lam * lam;
    let gp = gh * (nh + 1.0) + gc * (nc + 1.0);
    CharPolyCoefficients {
        c0: 0.0,
        c0p: (nh - nc) * gh * gc * gp * l2,
        c0pp: (2.0 * nh * nc + nh + nc) * gh * gc * gp * l2,
        c1: 0.25
            * gp
            * ((3.0 * nh * nc + 2.0 * nh + 2.0 * nc + 1.0) * gc * gh * gp
                + 4.0 * (gh * (3.0 * nh + 1.0) + gc * (3.0 * nc + 1.0))),
        c1p: 2.0 * (nh - nc) * gh * gc * l2,
        c2: -0.25
            * ((nh + 1.0).powi(2) * (2.0 * nh + 1.0) * gh.powi(3)
                + (nc + 1.0).powi(2) * (2.0 * nc + 1.0) * gc.powi(3)
                + (nh + 1.0) * (7.0 + 13.0 * nh + 6.0 * (2.0 + 3.0 * nh) * nc)
                + (nc + 1.0) * (7.0 + 13.0 * nc + 6.0 * (2.0 + 3.0 * nc) * nh))
            - 4.0 * ((2.0 * nh + 1.0) * gh + (2.0 * nc + 1.0) * gc),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::q_pop;

    fn fig2(lambda: f64) -> EngineParams {
        EngineParams::new(0.1, 2.0, lambda, 5.0, 0.027, 0.0).unwrap()
    }

    #[test]
    fn small_coupling_reduces_to_population_term() {
        let qp = q_pop(5.0, 0.027).unwrap();
        for f in [
            q1_closed_form,
            q1_closed_form_occupation_weighted,
            q2_closed_form,
            q2_closed_form_primed,
        ] {
            assert!((f(&fig2(1e-9)).unwrap() - qp).abs() < 1e-12);
        }
    }

    #[test]
    fn threshold_limits() {
        let p = EngineParams::new(0.4, 1.1, 0.3, 2.0 * (1.0 + 1e-6), 2.0, 0.0).unwrap();
        assert!((q1_closed_form(&p).unwrap() - 2.0).abs() < 1e-4);
        let eq = EngineParams::new(0.4, 1.1, 0.3, 2.0, 2.0, 0.0).unwrap();
        assert!(q1_closed_form(&eq).is_err());
        assert!(q2_closed_form(&eq).is_err());
        assert!(q_ht_closed_form(&eq).is_err());
    }

    #[test]
    fn high_temperature_form_stays_below_two() {
        for &(nh, nc) in &[(50.0, 20.0), (3.0, 9.0), (1e3, 900.0)] {
            let p = EngineParams::new(0.7, 0.2, 0.5, nh, nc, 0.0).unwrap();
            assert!(q_ht_closed_form(&p).unwrap() < 2.0);
        }
    }

    #[test]
    fn model_two_printed_form_reduces_to_high_temperature_form() {
        let p = EngineParams::new(0.7, 0.2, 0.5, 5.0e4, 2.0e4, 0.0).unwrap();
        let (a, b) = (q2_closed_form(&p).unwrap(), q_ht_closed_form(&p).unwrap());
        assert!((a - b).abs() < 1e-6 * b, "{a} vs {b}");
    }

    #[test]
    fn printed_model_one_form_at_fig2_point() {
        // Regression values of the verbatim transcriptions.
        let v = q1_closed_form(&fig2(0.2)).unwrap();
        let w = q1_closed_form_occupation_weighted(&fig2(0.2)).unwrap();
        assert!((w - 3.3510808704699648).abs() < 1e-12, "{w}");
        assert!((v - w).abs() > 1e-2);
    }
}
