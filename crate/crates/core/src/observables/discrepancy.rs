//! Signed comparison of the transcribed closed forms against the counting
//! statistics pipeline. Informational: nothing here passes or fails.

use serde::Serialize;

use super::closed_forms::{
    model1_coefficients_printed, q1_closed_form, q1_closed_form_occupation_weighted,
    q2_closed_form, q2_closed_form_primed, q_ht_closed_form,
};
use super::{q_nic_p_minus1, tur_q};
use crate::error::Result;
use crate::fcs::{
    charpoly_coeffs_taylor, cumulants_charpoly, current_model1_closed_form, FcsOptions, Method,
};
use crate::models::{EngineParams, ModelKind};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyEntry {
    pub quantity: String,
    pub kind: ModelKind,
    pub params: EngineParams,
    pub closed_form: f64,
    pub fcs: f64,
    /// `(closed_form − fcs)/|fcs|`.
    pub signed_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyReport {
    pub entries: Vec<DiscrepancyEntry>,
}

impl DiscrepancyReport {
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{:<34} {:<4} {:>8} {:>24} {:>24} {:>12}\n",
            "quantity", "kind", "lambda", "closed_form", "fcs", "rel_err"
        );
        for e in &self.entries {
            s.push_str(&format!(
                "{:<34} {:<4} {:>8.4} {:>24.16e} {:>24.16e} {:>12.3e}\n",
                e.quantity, e.kind, e.params.lambda, e.closed_form, e.fcs, e.signed_rel_error
            ));
        }
        s
    }

    /// Largest |relative error| for entries whose quantity starts with `prefix`.
    pub fn max_abs_error(&self, prefix: &str) -> Option<f64> {
        self.entries
            .iter()
            .filter(|e| e.quantity.starts_with(prefix))
            .map(|e| e.signed_rel_error.abs())
            .fold(None, |m, x| Some(m.map_or(x, |m: f64| m.max(x))))
    }
}

fn entry(
    quantity: &str,
    kind: ModelKind,
    params: EngineParams,
    closed_form: f64,
    fcs: f64,
) -> DiscrepancyEntry {
    DiscrepancyEntry {
        quantity: quantity.to_string(),
        kind,
        params,
        closed_form,
        fcs,
        signed_rel_error: (closed_form - fcs) / fcs.abs(),
    }
}

/// Reference operating points: the Fig. 2 caption parameters along λ, a
/// high-temperature point, and the four-level endpoint `p = −1`.
pub fn discrepancy_report() -> Result<DiscrepancyReport> {
    let mut out = Vec::new();
    let base = EngineParams::new(0.1, 2.0, 0.2, 5.0, 0.027, 0.0)?;
    let opts = FcsOptions::default();
    for lam in [0.05, 0.2, 0.5, 1.0] {
        let p = base.with_lambda(lam);
        let i1 = ModelKind::ThreeLevelI;
        let r1 = tur_q(i1, &p, Method::CharPoly)?;
        out.push(entry("q1 (printed)", i1, p, q1_closed_form(&p)?, r1.q));
        out.push(entry(
            "q1 (occupation-weighted G,H)",
            i1,
            p,
            q1_closed_form_occupation_weighted(&p)?,
            r1.q,
        ));
        out.push(entry(
            "current closed form",
            i1,
            p,
            current_model1_closed_form(&p),
            r1.current,
        ));

        let printed = model1_coefficients_printed(&p);
        let exact = charpoly_coeffs_taylor(i1, &p)?;
        for (name, a, b) in [
            ("c0' (printed)", printed.c0p, exact.c0p),
            ("c0'' (printed)", printed.c0pp, exact.c0pp),
            ("c1 (printed)", printed.c1, exact.c1),
            ("c1' (printed)", printed.c1p, exact.c1p),
            ("c2 (printed)", printed.c2, exact.c2),
        ] {
            out.push(entry(name, i1, p, a, b));
        }
        let printed_current = -printed.c0p / printed.c1;
        let fcs_current = cumulants_charpoly(i1, &p, &opts)?.current;
        out.push(entry(
            "current from printed c0', c1",
            i1,
            p,
            printed_current,
            fcs_current,
        ));

        let i2 = ModelKind::ThreeLevelII;
        let r2 = tur_q(i2, &p, Method::CharPoly)?;
        out.push(entry("q2 (printed)", i2, p, q2_closed_form(&p)?, r2.q));
        out.push(entry(
            "q2 (primed bracket)",
            i2,
            p,
            q2_closed_form_primed(&p)?,
            r2.q,
        ));
    }

    let ht = EngineParams::new(0.7, 0.4, 0.3, 3.0, 1.0, 0.0)?.with_occupations_scaled(1e4);
    for kind in [ModelKind::ThreeLevelI, ModelKind::ThreeLevelII] {
        let r = tur_q(kind, &ht, Method::CharPoly)?;
        out.push(entry("q_ht", kind, ht, q_ht_closed_form(&ht)?, r.q));
        out.push(entry(
            "q_ht - 2",
            kind,
            ht,
            q_ht_closed_form(&ht)? - 2.0,
            r.q - 2.0,
        ));
    }

    let nic = EngineParams::new(0.6, 0.4, 0.5, 5.0, 2.0, -1.0)?;
    let r = tur_q(ModelKind::FourLevelNIC, &nic, Method::CharPoly)?;
    out.push(entry(
        "q_nic(p=-1)",
        ModelKind::FourLevelNIC,
        nic,
        q_nic_p_minus1(nic.n_h, nic.n_c)?,
        r.q,
    ));

    Ok(DiscrepancyReport { entries: out })
}
