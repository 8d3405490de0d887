//! Least-squares extrapolation of eigenvalue ladders and mean geodesic
//! lengths.
//!
//! Ladders are fitted to `α_N = α_∞ + λ/(log N)^δ`, linear in `(α_∞, λ)`
//! for fixed `δ`; [`scan_delta`] picks `δ` on a grid by maximal `R²` and
//! reports the band of `δ` whose `R²` stays within a fraction of the best.
//! Mean geodesic lengths are fitted to `⟨ℓ⟩_n = A n + b n^δ`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Grid spacing of [`default_delta_grid`].
pub const DEFAULT_DELTA_STEP: f64 = 0.05;
pub const DEFAULT_BAND_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub alpha_inf: f64,
    pub lambda: f64,
    pub delta: f64,
    pub r_squared: f64,
    pub delta_band: (f64, f64),
    pub value_band: (f64, f64),
    pub points_used: usize,
    /// SHA-256 of the fitted points, hex.
    pub input_digest: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRow {
    pub delta: f64,
    pub r_squared: f64,
    pub alpha_inf: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scan {
    pub result: FitResult,
    /// Fits that succeeded, in grid order.
    pub grid: Vec<GridRow>,
}

impl Scan {
    pub fn grid_csv(&self) -> String {
        let mut out = String::from("delta,r_squared,alpha_inf\n");
        for row in &self.grid {
            writeln!(out, "{},{},{}", row.delta, row.r_squared, row.alpha_inf).unwrap();
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapeFit {
    pub delta: f64,
    /// Rate of escape.
    pub a: f64,
    pub b: f64,
    pub r_squared: f64,
}

/// `k · 0.05` for `k = 3..=240`, i.e. the grid over `(0.1, 12]`.
pub fn default_delta_grid() -> Vec<f64> {
    (3..=240).map(|k| k as f64 * DEFAULT_DELTA_STEP).collect()
}

/// Ordinary least squares of `y` on `x` with an intercept.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument("x and y lengths differ".into()));
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument("a line needs at least two points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        let (dx, dy) = (xi - mx, yi - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if !(sxx > 0.0) || !sxx.is_finite() || !syy.is_finite() {
        return Err(Error::DegenerateFit("the predictor takes a single value".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(&xi, &yi)| (yi - intercept - slope * xi).powi(2)).sum();
    Ok(LineFit {
        intercept,
        slope,
        r_squared: r_squared(ss_res, syy),
    })
}

fn r_squared(ss_res: f64, ss_tot: f64) -> f64 {
    if ss_tot == 0.0 {
        // constant data fitted exactly
        return if ss_res == 0.0 { 1.0 } else { 0.0 };
    }
    (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
}

/// Fits `α_N = α_∞ + λ (log N)^(−δ)`; returns intercept `α_∞`, slope `λ`.
pub fn fit_fixed_delta(points: &[(f64, f64)], delta: f64) -> Result<LineFit> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument("need at least three points".into()));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    if let Some(&(n, _)) = points.iter().find(|&&(n, _)| !(n >= 2.0)) {
        return Err(Error::InvalidArgument(format!("N must be at least 2, got {n}")));
    }
    let x: Vec<f64> = points.iter().map(|&(n, _)| n.ln().powf(-delta)).collect();
    let y: Vec<f64> = points.iter().map(|&(_, a)| a).collect();
    fit_line(&x, &y)
}

/// Scans `grid` for the `δ` of maximal `R²` (ties go to the smaller `δ`).
/// The `δ` band is the connected run of grid points around the optimum with
/// `R² ≥ (1 − band_fraction)·R²_opt`; the value band is the range of `α_∞`
/// over it. Grid points whose fit is degenerate are skipped and break runs.
pub fn scan_delta(points: &[(f64, f64)], grid: &[f64], band_fraction: f64) -> Result<Scan> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty delta grid".into()));
    }
    if !(0.0..1.0).contains(&band_fraction) {
        return Err(Error::InvalidArgument(format!("band fraction {band_fraction} outside [0, 1)")));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let fits: Vec<Option<GridRow>> = sorted
        .iter()
        .map(|&delta| match fit_fixed_delta(points, delta) {
            Ok(f) => Ok(Some(GridRow {
                delta,
                r_squared: f.r_squared,
                alpha_inf: f.intercept,
                lambda: f.slope,
            })),
            Err(Error::DegenerateFit(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let mut best: Option<usize> = None;
    for (i, row) in fits.iter().enumerate() {
        if let Some(row) = row {
            if best.is_none_or(|b| row.r_squared > fits[b].unwrap().r_squared) {
                best = Some(i);
            }
        }
    }
    let best = best.ok_or_else(|| Error::DegenerateFit("no delta on the grid gives a usable fit".into()))?;
    let opt = fits[best].unwrap();
    let threshold = (1.0 - band_fraction) * opt.r_squared;
    let within = |i: usize| fits[i].is_some_and(|r| r.r_squared >= threshold);
    let (mut lo, mut hi) = (best, best);
    while lo > 0 && within(lo - 1) {
        lo -= 1;
    }
    while hi + 1 < fits.len() && within(hi + 1) {
        hi += 1;
    }
    let band = &fits[lo..=hi];
    let values = band.iter().map(|r| r.unwrap().alpha_inf);
    let value_band = (values.clone().fold(f64::INFINITY, f64::min), values.fold(f64::NEG_INFINITY, f64::max));
    Ok(Scan {
        result: FitResult {
            alpha_inf: opt.alpha_inf,
            lambda: opt.lambda,
            delta: opt.delta,
            r_squared: opt.r_squared,
            delta_band: (sorted[lo], sorted[hi]),
            value_band,
            points_used: points.len(),
            input_digest: input_digest(points),
        },
        grid: fits.into_iter().flatten().collect(),
    })
}

/// Fits `⟨ℓ⟩_n = A n + b n^δ` by least squares without intercept.
pub fn fit_escape(points: &[(f64, f64)], delta: f64) -> Result<EscapeFit> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument("need at least three points".into()));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::InvalidArgument(format!("delta must lie in [0, 1), got {delta}")));
    }
    if points.iter().any(|&(n, _)| !(n > 0.0)) {
        return Err(Error::InvalidArgument("lengths must be positive".into()));
    }
    // columns are rescaled to unit norm before solving the normal equations
    let u: Vec<f64> = points.iter().map(|&(n, _)| n).collect();
    let v: Vec<f64> = points.iter().map(|&(n, _)| n.powf(delta)).collect();
    let y: Vec<f64> = points.iter().map(|&(_, l)| l).collect();
    let norm = |c: &[f64]| c.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (nu, nv) = (norm(&u), norm(&v));
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let uu: Vec<f64> = u.iter().map(|x| x / nu).collect();
    let vv: Vec<f64> = v.iter().map(|x| x / nv).collect();
    let (a11, a12, a22) = (dot(&uu, &uu), dot(&uu, &vv), dot(&vv, &vv));
    let (b1, b2) = (dot(&uu, &y), dot(&vv, &y));
    let det = a11 * a22 - a12 * a12;
    if !(det > 1e-14) {
        return Err(Error::DegenerateFit(format!("n and n^{delta} are collinear on these points")));
    }
    let a = (b1 * a22 - b2 * a12) / det / nu;
    let b = (a11 * b2 - a12 * b1) / det / nv;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|l| (l - mean).powi(2)).sum();
    let ss_res: f64 = points.iter().map(|&(n, l)| (l - a * n - b * n.powf(delta)).powi(2)).sum();
    Ok(EscapeFit {
        delta,
        a,
        b,
        r_squared: r_squared(ss_res, ss_tot),
    })
}

/// [`fit_escape`] at each `δ`, as CSV `delta,A,b,r_squared`.
pub fn escape_table_csv(points: &[(f64, f64)], deltas: &[f64]) -> Result<String> {
    let mut out = String::from("delta,A,b,r_squared\n");
    for &d in deltas {
        let f = fit_escape(points, d)?;
        writeln!(out, "{},{},{},{}", f.delta, f.a, f.b, f.r_squared).unwrap();
    }
    Ok(out)
}

/// SHA-256 over the little-endian bit patterns of the points.
pub fn input_digest(points: &[(f64, f64)]) -> String {
    let mut h = Sha256::new();
    for &(x, y) in points {
        h.update(x.to_bits().to_le_bytes());
        h.update(y.to_bits().to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Reads `(x, y)` pairs from a CSV with a header row. `x` is the first
/// column; `y` is the column named `column` if given, else the first
/// column whose name ends in `_certified`, else the second column.
pub fn parse_points_csv(text: &str, column: Option<&str>) -> Result<Vec<(f64, f64)>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::Parse("empty CSV".into()))?
        .split(',')
        .map(str::trim)
        .collect();
    if header.len() < 2 {
        return Err(Error::Parse("CSV needs at least two columns".into()));
    }
    let col = match column {
        Some(name) => header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| Error::Parse(format!("no column named `{name}`")))?,
        None => header.iter().position(|h| h.ends_with("_certified")).unwrap_or(1),
    };
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != header.len() {
            return Err(Error::Parse(format!("row {} has {} fields, expected {}", i + 1, fields.len(), header.len())));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse(format!("row {}: `{s}` is not a finite number", i + 1)))
        };
        out.push((num(fields[0])?, num(fields[col])?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn synthetic(alpha: f64, lambda: f64, delta: f64) -> Vec<(f64, f64)> {
        (0..60)
            .map(|i| {
                let n = 10f64.powf(2.0 + i as f64 / 10.0);
                (n, alpha + lambda * n.ln().powf(-delta))
            })
            .collect()
    }

    #[test]
    fn exact_model_is_recovered() {
        let f = fit_fixed_delta(&synthetic(3.0, -2.0, 1.0), 1.0).unwrap();
        assert!((f.intercept - 3.0).abs() < 1e-10);
        assert!((f.slope + 2.0).abs() < 1e-10);
        assert!((f.r_squared - 1.0).abs() < 1e-10);
        let f = fit_fixed_delta(&synthetic(2.6, 0.5, 1.5), 1.5).unwrap();
        assert!((f.intercept - 2.6).abs() < 1e-10);
        assert!((f.slope - 0.5).abs() < 1e-10);
    }

    #[test]
    fn fixed_delta_preconditions() {
        let pts = synthetic(3.0, -2.0, 1.0);
        assert!(fit_fixed_delta(&pts[..2], 1.0).is_err());
        assert!(fit_fixed_delta(&pts, 0.0).is_err());
        assert!(fit_fixed_delta(&[(1.0, 1.0), (5.0, 2.0), (9.0, 3.0)], 1.0).is_err());
        assert!(matches!(
            fit_fixed_delta(&[(10.0, 1.0), (10.0, 2.0), (10.0, 3.0)], 1.0),
            Err(Error::DegenerateFit(_))
        ));
    }

    #[test]
    fn scan_finds_the_true_exponent() {
        let pts = synthetic(2.7, 0.8, 2.0);
        let scan = scan_delta(&pts, &default_delta_grid(), DEFAULT_BAND_FRACTION).unwrap();
        assert!((scan.result.delta - 2.0).abs() < 1e-9);
        assert!((scan.result.alpha_inf - 2.7).abs() < 1e-9);
        let r = &scan.result;
        assert!(r.delta_band.0 <= r.delta && r.delta <= r.delta_band.1);
        assert!(r.value_band.0 <= r.alpha_inf && r.alpha_inf <= r.value_band.1);
        assert_eq!(r.points_used, 60);
        // with a tight band only the neighbouring grid points survive
        let tight = scan_delta(&pts, &default_delta_grid(), 1e-9).unwrap().result;
        assert!(tight.delta_band.0 >= 2.0 - DEFAULT_DELTA_STEP - 1e-9);
        assert!(tight.delta_band.1 <= 2.0 + DEFAULT_DELTA_STEP + 1e-9);
        assert_eq!(scan.grid_csv().lines().count(), scan.grid.len() + 1);
    }

    #[test]
    fn ties_go_to_the_smaller_delta() {
        // constant data is fitted exactly at every delta
        let pts: Vec<(f64, f64)> = (2..10).map(|i| (10f64.powi(i), 2.5)).collect();
        let scan = scan_delta(&pts, &[1.5, 0.5], 0.05).unwrap();
        assert_eq!(scan.result.delta, 0.5);
        assert_eq!(scan.result.delta_band, (0.5, 1.5));
        assert!(scan_delta(&pts, &[], 0.05).is_err());
    }

    #[test]
    fn escape_fit() {
        let pts: Vec<(f64, f64)> = (1..=12)
            .map(|k| {
                let n = 2f64.powi(k);
                (n, 0.28 * n + 2.0 * n.sqrt())
            })
            .collect();
        let f = fit_escape(&pts, 0.5).unwrap();
        assert!((f.a - 0.28).abs() < 1e-10);
        assert!((f.b - 2.0).abs() < 1e-10);
        assert!(fit_escape(&pts, 1.0).is_err());
        assert!(fit_escape(&pts[..2], 0.5).is_err());
        let csv = escape_table_csv(&pts, &[0.0, 0.25, 0.5]).unwrap();
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn escape_at_zero_is_simple_regression() {
        let pts: Vec<(f64, f64)> = (1..20).map(|i| (i as f64 * 3.0, (i * i % 7) as f64 + 0.3 * i as f64)).collect();
        let e = fit_escape(&pts, 0.0).unwrap();
        let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let l = fit_line(&x, &y).unwrap();
        assert!((e.a - l.slope).abs() < 1e-12);
        assert!((e.b - l.intercept).abs() < 1e-10);
        assert!((e.r_squared - l.r_squared).abs() < 1e-10);
    }

    #[test]
    fn csv_columns() {
        let text = "N,1/log N,alpha_N_certified,alpha_N_rayleigh,residual,iterations\n\
                    10,0.43,1.5,1.5,0,3\n100,0.21,1.7,1.7,0,4\n";
        assert_eq!(parse_points_csv(text, None).unwrap(), vec![(10.0, 1.5), (100.0, 1.7)]);
        assert_eq!(parse_points_csv(text, Some("1/log N")).unwrap()[0].1, 0.43);
        assert!(parse_points_csv(text, Some("nope")).is_err());
        assert!(parse_points_csv("a,b\n1,x\n", None).is_err());
        assert!(parse_points_csv("a,b\n1,2,3\n", None).is_err());
        assert_eq!(parse_points_csv("n,mean\n4,2.5\n", None).unwrap(), vec![(4.0, 2.5)]);
    }

    #[test]
    fn digest_depends_on_every_point() {
        let a = synthetic(3.0, -2.0, 1.0);
        let mut b = a.clone();
        b[7].1 += 1e-15;
        assert_ne!(input_digest(&a), input_digest(&b));
        assert_eq!(input_digest(&a).len(), 64);
        let scan = scan_delta(&a, &[1.0], 0.05).unwrap();
        let json = serde_json::to_string(&scan.result).unwrap();
        let back: FitResult = serde_json::from_str(&json).unwrap();
        assert_eq!(back, scan.result);
    }

    proptest! {
        #[test]
        fn scaling_values_scales_the_fit(
            ys in prop::collection::vec(-5.0f64..5.0, 5..30),
            delta in 0.2f64..6.0,
            k in -4i32..4,
            c in 0.1f64..10.0,
        ) {
            let pts: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, &y)| (10.0 + 7.0 * i as f64, y)).collect();
            let base = fit_fixed_delta(&pts, delta).unwrap();
            // powers of two scale every rounding step exactly
            let p = 2f64.powi(k);
            let scaled: Vec<(f64, f64)> = pts.iter().map(|&(n, y)| (n, p * y)).collect();
            let f = fit_fixed_delta(&scaled, delta).unwrap();
            prop_assert_eq!(f.intercept, p * base.intercept);
            prop_assert_eq!(f.slope, p * base.slope);
            let scaled: Vec<(f64, f64)> = pts.iter().map(|&(n, y)| (n, c * y)).collect();
            let f = fit_fixed_delta(&scaled, delta).unwrap();
            let tol = 1e-9 * (1.0 + base.intercept.abs() + base.slope.abs()) * c;
            prop_assert!((f.intercept - c * base.intercept).abs() < tol);
            prop_assert!((f.slope - c * base.slope).abs() < tol);
            prop_assert!((0.0..=1.0).contains(&f.r_squared));
        }

        #[test]
        fn bands_contain_the_estimate(
            ys in prop::collection::vec(-5.0f64..5.0, 4..20),
            frac in 0.0f64..0.5,
        ) {
            let pts: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, &y)| (3.0 + 5.0 * i as f64, y)).collect();
            let r = scan_delta(&pts, &default_delta_grid(), frac).unwrap().result;
            prop_assert!(r.delta_band.0 <= r.delta && r.delta <= r.delta_band.1);
            prop_assert!(r.value_band.0 <= r.alpha_inf && r.alpha_inf <= r.value_band.1);
            prop_assert!((0.0..=1.0).contains(&r.r_squared));
        }
    }
}
