//! Parameter sweeps: random samples for histograms, λ- and p-grids for
//! curves, and the rate-scaling audit.
//!
//! Sample `i` draws from its own ChaCha stream `(seed, i)`, so results are
//! independent of worker count and any prefix of a run is a run.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TurError};
use crate::exec::map_indexed;
use crate::fcs::{FcsOptions, Method};
use crate::io::fmt_f64;
use crate::models::{EngineParams, ModelKind};
use crate::observables::{tur_q_with, TurOptions, TurReport};
use crate::scalar::Precision;

/// Closed interval `[lo, hi]`.
pub type Range = (f64, f64);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamRanges {
    pub gamma_h: Range,
    pub gamma_c: Range,
    pub lambda: Range,
    pub n_h: Range,
    pub n_c: Range,
    pub p: Range,
}

impl ParamRanges {
    /// Γ ∈ [1e-4, 5], n ∈ [0, 10], λ ∈ [1e-4, 1]; p ∈ [−0.999, 0.999].
    pub const FIG3: ParamRanges = ParamRanges {
        gamma_h: (1e-4, 5.0),
        gamma_c: (1e-4, 5.0),
        lambda: (1e-4, 1.0),
        n_h: (0.0, 10.0),
        n_c: (0.0, 10.0),
        p: (-0.999, 0.999),
    };

    fn validate(&self) -> Result<()> {
        let check = |name: &str, (lo, hi): Range, min: f64, max: f64, strict_lo: bool| {
            let ok = lo.is_finite()
                && hi.is_finite()
                && lo <= hi
                && hi <= max
                && if strict_lo { lo > min } else { lo >= min };
            if ok {
                Ok(())
            } else {
                Err(TurError::invalid(
                    name,
                    format!("range [{lo}, {hi}] is not admissible"),
                ))
            }
        };
        check("gamma_h", self.gamma_h, 0.0, f64::MAX, true)?;
        check("gamma_c", self.gamma_c, 0.0, f64::MAX, true)?;
        check("lambda", self.lambda, 0.0, f64::MAX, false)?;
        check("n_h", self.n_h, 0.0, f64::MAX, false)?;
        check("n_c", self.n_c, 0.0, f64::MAX, false)?;
        check("p", self.p, -1.0, 1.0, false)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub kind: ModelKind,
    pub ranges: ParamRanges,
    pub count: usize,
    pub seed: u64,
    pub bin_width: f64,
    /// Parameters pinned to a value instead of sampled (`"lambda"`, `"p"`, ...).
    pub fixed: BTreeMap<String, f64>,
    pub method: Method,
    pub precision: Precision,
}

impl SweepSpec {
    pub fn fig3(kind: ModelKind, count: usize, seed: u64) -> Self {
        SweepSpec {
            kind,
            ranges: ParamRanges::FIG3,
            count,
            seed,
            bin_width: 0.01,
            fixed: BTreeMap::new(),
            method: Method::CharPoly,
            precision: Precision::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.ranges.validate()?;
        if !(self.bin_width.is_finite() && self.bin_width > 0.0) {
            return Err(TurError::invalid("bin_width", "must be > 0"));
        }
        for key in self.fixed.keys() {
            if !["gamma_h", "gamma_c", "lambda", "n_h", "n_c", "p"].contains(&key.as_str()) {
                return Err(TurError::invalid(
                    "fixed",
                    format!("unknown parameter '{key}'"),
                ));
            }
        }
        Ok(())
    }

    /// Parameters of sample `i` (independent of every other sample).
    pub fn sample(&self, i: usize) -> EngineParams {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(i as u64);
        let mut draw = |(lo, hi): Range| lo + (hi - lo) * rng.gen::<f64>();
        let r = &self.ranges;
        let mut p = EngineParams {
            gamma_h: draw(r.gamma_h),
            gamma_c: draw(r.gamma_c),
            lambda: draw(r.lambda),
            n_h: draw(r.n_h),
            n_c: draw(r.n_c),
            p: draw(r.p),
        };
        for (k, &v) in &self.fixed {
            match k.as_str() {
                "gamma_h" => p.gamma_h = v,
                "gamma_c" => p.gamma_c = v,
                "lambda" => p.lambda = v,
                "n_h" => p.n_h = v,
                "n_c" => p.n_c = v,
                "p" => p.p = v,
                _ => {}
            }
        }
        p
    }

    fn tur_options(&self) -> TurOptions {
        TurOptions {
            fcs: FcsOptions::with_precision(self.precision),
            ..Default::default()
        }
    }
}

/// Deterministic stream of the first `spec.count` parameter draws.
pub fn sample_params(spec: &SweepSpec) -> impl Iterator<Item = EngineParams> + '_ {
    (0..spec.count).map(move |i| spec.sample(i))
}

/// Sparse fixed-width histogram of q values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: f64,
    pub origin: f64,
    /// Bin index `k` covers `[origin + k·w, origin + (k+1)·w)`.
    pub counts: BTreeMap<i64, u64>,
    /// Number of histogrammed (non-excluded) samples.
    pub total: u64,
    pub requested: u64,
    /// Excluded samples by failure tag.
    pub exclusions: BTreeMap<String, u64>,
    /// A few excluded sample indices per tag, for inspection.
    pub exclusion_examples: BTreeMap<String, Vec<u64>>,
    pub min_value: f64,
    pub max_value: f64,
    /// Sample index and parameters at the minimum.
    pub argmin: Option<(u64, EngineParams)>,
    pub violation_fraction: f64,
}

impl Histogram {
    pub fn excluded(&self) -> u64 {
        self.exclusions.values().sum()
    }

    pub fn bin_of(&self, q: f64) -> i64 {
        ((q - self.origin) / self.bin_width).floor() as i64
    }

    /// Lower edge of bin `k`.
    pub fn edge(&self, k: i64) -> f64 {
        self.origin + k as f64 * self.bin_width
    }

    /// Share of histogrammed samples in bins lying inside `[lo, hi)`.
    pub fn fraction_within(&self, lo: f64, hi: f64) -> f64 {
        let n: u64 = self
            .counts
            .iter()
            .filter(|(&k, _)| self.edge(k) >= lo - 1e-12 && self.edge(k + 1) <= hi + 1e-12)
            .map(|(_, &c)| c)
            .sum();
        n as f64 / self.total.max(1) as f64
    }

    /// Sub-histogram of bins lying entirely below 2 (STUR violations).
    pub fn violations(&self) -> BTreeMap<i64, u64> {
        self.counts
            .iter()
            .filter(|(&k, _)| self.edge(k + 1) <= 2.0 + 1e-12)
            .map(|(&k, &c)| (k, c))
            .collect()
    }

    /// `(bin_lo, bin_hi, count)` rows.
    pub fn rows(&self) -> Vec<(f64, f64, u64)> {
        self.counts
            .iter()
            .map(|(&k, &c)| (self.edge(k), self.edge(k + 1), c))
            .collect()
    }

    pub const CSV_HEADER: [&'static str; 3] = ["bin_lo", "bin_hi", "count"];

    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows()
            .into_iter()
            .map(|(lo, hi, c)| vec![fmt_f64(lo), fmt_f64(hi), c.to_string()])
            .collect()
    }
}

type Outcome = std::result::Result<f64, &'static str>;

fn evaluate(spec: &SweepSpec, opts: &TurOptions, i: usize) -> Outcome {
    let params = spec.sample(i);
    match tur_q_with(spec.kind, &params, spec.method, opts) {
        Ok(r) if r.q.is_finite() => Ok(r.q),
        Ok(_) => Err("non-finite-q"),
        Err(e) => Err(e.tag()),
    }
}

fn reduce(spec: &SweepSpec, outcomes: &[Outcome]) -> Histogram {
    let mut h = Histogram {
        bin_width: spec.bin_width,
        origin: 0.0,
        counts: BTreeMap::new(),
        total: 0,
        requested: spec.count as u64,
        exclusions: BTreeMap::new(),
        exclusion_examples: BTreeMap::new(),
        min_value: f64::INFINITY,
        max_value: f64::NEG_INFINITY,
        argmin: None,
        violation_fraction: 0.0,
    };
    let mut below_two = 0u64;
    for (i, o) in outcomes.iter().enumerate() {
        match *o {
            Ok(q) => {
                *h.counts.entry(h.bin_of(q)).or_insert(0) += 1;
                h.total += 1;
                if q < h.min_value {
                    h.min_value = q;
                    h.argmin = Some((i as u64, spec.sample(i)));
                }
                h.max_value = h.max_value.max(q);
                if q < 2.0 {
                    below_two += 1;
                }
            }
            Err(tag) => {
                *h.exclusions.entry(tag.to_string()).or_insert(0) += 1;
                let ex = h.exclusion_examples.entry(tag.to_string()).or_default();
                if ex.len() < 5 {
                    ex.push(i as u64);
                }
            }
        }
    }
    h.violation_fraction = below_two as f64 / h.total.max(1) as f64;
    h
}

/// Histogram of q over `spec.count` random operating points. Failing points
/// are counted per failure tag and never abort the sweep.
pub fn q_histogram(spec: &SweepSpec) -> Result<Histogram> {
    spec.validate()?;
    let opts = spec.tur_options();
    let outcomes = map_indexed(spec.count, |i| evaluate(spec, &opts, i));
    Ok(reduce(spec, &outcomes))
}

/// Same as [`q_histogram`] but always single-threaded (reference path).
pub fn q_histogram_sequential(spec: &SweepSpec) -> Result<Histogram> {
    spec.validate()?;
    let opts = spec.tur_options();
    let outcomes: Vec<Outcome> = (0..spec.count).map(|i| evaluate(spec, &opts, i)).collect();
    Ok(reduce(spec, &outcomes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    /// `"ok"` or a failure tag.
    pub status: String,
    pub report: Option<TurReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub abscissa: String,
    pub kind: ModelKind,
    pub points: Vec<CurvePoint>,
}

impl Curve {
    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.x).collect()
    }

    /// q values (NaN at failed points).
    pub fn qs(&self) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| p.report.as_ref().map_or(f64::NAN, |r| r.q))
            .collect()
    }

    pub fn reliabilities(&self) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| p.report.as_ref().map_or(f64::NAN, |r| r.reliability))
            .collect()
    }

    /// Column names of [`Curve::csv_rows`]; the first is the abscissa name.
    pub fn csv_header(&self) -> Vec<&str> {
        vec![
            self.abscissa.as_str(),
            "status",
            "current",
            "variance",
            "sigma",
            "q",
            "reliability",
        ]
    }

    /// One row per grid point; failed points carry their tag and NaN values.
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.points
            .iter()
            .map(|pt| {
                let v = pt.report.as_ref().map_or([f64::NAN; 5], |r| {
                    [r.current, r.variance, r.sigma, r.q, r.reliability]
                });
                let mut row = vec![fmt_f64(pt.x), pt.status.clone()];
                row.extend(v.iter().map(|&x| fmt_f64(x)));
                row
            })
            .collect()
    }

    /// `(x, status, reliability)` rows.
    pub fn reliability_rows(&self) -> Vec<Vec<String>> {
        self.points
            .iter()
            .map(|pt| {
                vec![
                    fmt_f64(pt.x),
                    pt.status.clone(),
                    fmt_f64(pt.report.as_ref().map_or(f64::NAN, |r| r.reliability)),
                ]
            })
            .collect()
    }

    /// Index of the smallest q if it is not at either end of the grid.
    pub fn interior_minimum(&self) -> Option<usize> {
        let qs = self.qs();
        let (k, _) = qs
            .iter()
            .enumerate()
            .filter(|(_, q)| q.is_finite())
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())?;
        (k > 0 && k + 1 < qs.len()).then_some(k)
    }
}

fn check_grid(name: &str, grid: &[f64], lo: f64, hi: f64, open_lo: bool) -> Result<()> {
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(TurError::invalid(name, "grid must be strictly increasing"));
    }
    for &x in grid {
        let ok = x.is_finite() && x <= hi && if open_lo { x > lo } else { x >= lo };
        if !ok {
            return Err(TurError::invalid(
                name,
                format!("grid value {x} out of range"),
            ));
        }
    }
    Ok(())
}

fn curve(
    kind: ModelKind,
    abscissa: &str,
    points: Vec<(f64, EngineParams)>,
    opts: &TurOptions,
) -> Curve {
    let evaluated = map_indexed(points.len(), |i| {
        let (x, p) = points[i];
        match tur_q_with(kind, &p, Method::CharPoly, opts) {
            Ok(r) => CurvePoint {
                x,
                status: "ok".into(),
                report: Some(r),
            },
            Err(e) => CurvePoint {
                x,
                status: e.tag().into(),
                report: None,
            },
        }
    });
    Curve {
        abscissa: abscissa.into(),
        kind,
        points: evaluated,
    }
}

/// q along a λ-grid with all other parameters from `base`.
pub fn lambda_curve(
    kind: ModelKind,
    base: &EngineParams,
    grid: &[f64],
    opts: &TurOptions,
) -> Result<Curve> {
    base.validate()?;
    check_grid("lambda", grid, 0.0, f64::INFINITY, true)?;
    let pts = grid.iter().map(|&l| (l, base.with_lambda(l))).collect();
    Ok(curve(kind, "lambda", pts, opts))
}

/// q of the four-level model along a p-grid.
pub fn p_curve(base: &EngineParams, grid: &[f64], opts: &TurOptions) -> Result<Curve> {
    base.validate()?;
    check_grid("p", grid, -1.0, 1.0, false)?;
    let pts = grid.iter().map(|&p| (p, base.with_p(p))).collect();
    Ok(curve(ModelKind::FourLevelNIC, "p", pts, opts))
}

/// Largest |q(kΓ_h, kΓ_c, kλ) − q(Γ_h, Γ_c, λ)| over `ks`.
pub fn scaling_check(
    kind: ModelKind,
    params: &EngineParams,
    ks: &[f64],
    opts: &TurOptions,
) -> Result<f64> {
    if let Some(&k) = ks.iter().find(|&&k| !(k.is_finite() && k > 0.0)) {
        return Err(TurError::invalid(
            "k",
            format!("scale factors must be > 0, got {k}"),
        ));
    }
    let q0 = tur_q_with(kind, params, Method::CharPoly, opts)?.q;
    let mut worst: f64 = 0.0;
    for &k in ks {
        let q = tur_q_with(kind, &params.with_rates_scaled(k), Method::CharPoly, opts)?.q;
        worst = worst.max((q - q0).abs());
    }
    Ok(worst)
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}
