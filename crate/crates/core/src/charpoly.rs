//! Roots and stability of fractional characteristic polynomials.
//!
//! Powers are evaluated on the principal branch,
//! `s^q = exp(q (ln|s| + i arg s))` with `arg s` in `(-pi, pi]`, so the
//! negative real axis belongs to the upper side of the cut. Only roots on
//! this sheet count as closed-loop poles.
//!
//! Two root searches are available. [`find_roots_newton`] runs damped
//! Newton iteration from a grid of starting points; it is general but not
//! certified complete. When every exponent is a multiple of some `1/m`,
//! [`find_roots_commensurate`] substitutes `w = s^(1/m)`, takes all roots of
//! the resulting ordinary polynomial from companion-matrix eigenvalues and
//! keeps those with `|arg w| <= pi/m`. [`find_roots`] prefers the latter.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model::FracPoly;
use crate::{Error, Result};

/// Exponent distance from a multiple of `1/m` accepted as commensurate.
const COMMENSURATE_TOL: f64 = 1e-9;
/// Largest `w`-polynomial degree handed to the eigenvalue solver.
const MAX_COMPANION_DEGREE: usize = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct RootFindConfig {
    /// Half-width of the square grid of Newton starts.
    pub search_radius: f64,
    /// Starting points per axis.
    pub grid_density: usize,
    /// Residual threshold, scaled by `1 + max |coeff|`.
    pub newton_tol: f64,
    pub max_iter: usize,
    pub dedupe_tol: f64,
    pub commensurate_max_denominator: u32,
    /// Roots with real part above this are unstable.
    pub stability_margin: f64,
}

impl Default for RootFindConfig {
    fn default() -> Self {
        Self {
            search_radius: 100.0,
            grid_density: 40,
            newton_tol: 1e-10,
            max_iter: 200,
            dedupe_tol: 1e-6,
            commensurate_max_denominator: 100,
            stability_margin: 0.0,
        }
    }
}

impl RootFindConfig {
    /// Default search sized to cover a set of desired poles with margin:
    /// radius `10 (1 + max |pole|)`.
    pub fn around_poles(poles: &[Complex64]) -> Self {
        let reach = poles.iter().map(|p| p.norm()).fold(0.0, f64::max);
        Self {
            search_radius: 10.0 * (1.0 + reach),
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.search_radius > 0.0
            && self.grid_density > 0
            && self.newton_tol > 0.0
            && self.max_iter > 0
            && self.dedupe_tol > 0.0
            && self.commensurate_max_denominator > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(
                "root finder settings must all be positive".into(),
            ))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Stable,
    Unstable,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    NewtonGrid,
    Commensurate,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub value: Complex64,
    /// `|p(value)|` on the input polynomial.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    /// Sorted by real part, then imaginary part.
    pub roots: Vec<Root>,
    pub verdict: Verdict,
    pub method: Method,
    /// Set when the verdict rests on a search that cannot rule out missed
    /// roots.
    pub coverage_caveat: bool,
}

/// `s^q` on the principal branch; `s` must be nonzero.
pub fn principal_pow(s: Complex64, q: f64) -> Complex64 {
    let arg = if s.im == 0.0 && s.re < 0.0 {
        PI
    } else {
        s.im.atan2(s.re)
    };
    Complex64::from_polar((q * s.norm().ln()).exp(), q * arg)
}

fn principal_arg(s: Complex64) -> f64 {
    if s.im == 0.0 && s.re < 0.0 {
        PI
    } else {
        s.im.atan2(s.re)
    }
}

/// `sum coeff * s^exponent` on the principal branch.
pub fn eval_fracpoly(p: &FracPoly, s: Complex64) -> Result<Complex64> {
    if s == Complex64::new(0.0, 0.0) {
        let mut total = Complex64::new(0.0, 0.0);
        for &(c, e) in p.terms() {
            if e < 0.0 {
                return Err(Error::Domain(format!("s^{e} is undefined at s = 0")));
            }
            if e == 0.0 {
                total += c;
            }
        }
        return Ok(total);
    }
    Ok(p.terms()
        .iter()
        .map(|&(c, e)| c * principal_pow(s, e))
        .sum())
}

/// Value and derivative at a nonzero point.
fn eval_with_derivative(p: &FracPoly, s: Complex64) -> (Complex64, Complex64) {
    let ln_abs = s.norm().ln();
    let arg = principal_arg(s);
    let mut f = Complex64::new(0.0, 0.0);
    let mut df = Complex64::new(0.0, 0.0);
    for &(c, e) in p.terms() {
        let pow = Complex64::from_polar((e * ln_abs).exp(), e * arg);
        f += c * pow;
        df += c * e * pow / s;
    }
    (f, df)
}

/// Multiplies by `s^-min_exponent` so every exponent is non-negative;
/// returns the result and the applied shift (zero when already
/// non-negative).
pub fn normalize(p: &FracPoly) -> (FracPoly, f64) {
    match p.min_exponent() {
        Some(min) if min < 0.0 => (p.shift(-min), -min),
        _ => (p.clone(), 0.0),
    }
}

/// Radius outside which the polynomial cannot vanish: with leading term
/// `c_n s^q_n` and `m` lower terms, `|s| > (m |c_i / c_n|)^(1/(q_n - q_i))`
/// for every `i` makes the leading term dominate.
pub fn root_modulus_bound(p: &FracPoly) -> Option<f64> {
    let (cn, qn) = p.leading()?;
    let m = (p.len() - 1) as f64;
    p.terms()
        .iter()
        .skip(1)
        .map(|&(c, q)| (m * (c / cn).abs()).powf(1.0 / (qn - q)))
        .reduce(f64::max)
}

fn residual_limit(p: &FracPoly, cfg: &RootFindConfig) -> f64 {
    let max_coeff = p.coeffs().map(f64::abs).fold(0.0, f64::max);
    cfg.newton_tol * (1.0 + max_coeff)
}

/// Damped Newton from `start`; returns the limit point when the residual
/// stops improving, or `None` if the iteration leaves the finite plane.
fn newton(p: &FracPoly, start: Complex64, max_iter: usize) -> Option<Complex64> {
    let mut s = start;
    let (mut f, mut df) = eval_with_derivative(p, s);
    for _ in 0..max_iter {
        if f.norm() == 0.0 {
            break;
        }
        if !(df.norm() > 0.0) || !f.is_finite() || !df.is_finite() {
            return None;
        }
        let step = f / df;
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let candidate = s - step * scale;
            if candidate.norm() > 0.0 {
                let (fc, dfc) = eval_with_derivative(p, candidate);
                if fc.norm() < f.norm() {
                    accepted = Some((candidate, fc, dfc));
                    break;
                }
            }
            scale *= 0.5;
        }
        let Some((next, fc, dfc)) = accepted else {
            break;
        };
        let moved = (next - s).norm();
        s = next;
        f = fc;
        df = dfc;
        if moved <= 1e-15 * s.norm().max(1e-300) {
            break;
        }
    }
    s.is_finite().then_some(s)
}

/// Deduplicates candidates, keeping the lowest-residual representative, and
/// sorts the result.
fn dedupe(mut roots: Vec<Root>, tol: f64) -> Vec<Root> {
    roots.sort_by(|a, b| a.residual.total_cmp(&b.residual));
    let mut kept: Vec<Root> = Vec::with_capacity(roots.len());
    for r in roots {
        if kept.iter().all(|k| (k.value - r.value).norm() > tol) {
            kept.push(r);
        }
    }
    kept.sort_by(|a, b| {
        a.value
            .re
            .total_cmp(&b.value.re)
            .then(a.value.im.total_cmp(&b.value.im))
    });
    kept
}

/// Accepts `s` as a root of `p` if its residual is within the threshold;
/// adds the conjugate as well since coefficients are real.
fn accept(p: &FracPoly, s: Complex64, limit: f64, out: &mut Vec<Root>) {
    for cand in [s, s.conj()] {
        if cand.norm() == 0.0 {
            continue;
        }
        if let Ok(v) = eval_fracpoly(p, cand) {
            let residual = v.norm();
            if residual <= limit {
                out.push(Root {
                    value: cand,
                    residual,
                });
            }
        }
    }
}

fn require_terms(p: &FracPoly) -> Result<(FracPoly, f64)> {
    let (normalized, shift) = normalize(p);
    if normalized.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "root finding needs at least two terms, got {}",
            normalized.len()
        )));
    }
    Ok((normalized, shift))
}

/// Multi-start Newton search over the square `|Re|, |Im| <= R`, where `R`
/// is the configured radius clipped to [`root_modulus_bound`], plus starts
/// along both sides of the real axis.
pub fn find_roots_newton(p: &FracPoly, cfg: &RootFindConfig) -> Result<StabilityReport> {
    cfg.validate()?;
    let (normalized, _) = require_terms(p)?;
    let limit = residual_limit(p, cfg);
    let bound = root_modulus_bound(&normalized).unwrap_or(cfg.search_radius);
    let radius = cfg.search_radius.min(1.05 * bound).max(1e-3);
    let n = cfg.grid_density;
    let cell = 2.0 * radius / n as f64;
    let mut starts = Vec::with_capacity(n * n + 2 * n);
    for i in 0..n {
        let re = -radius + (i as f64 + 0.5) * cell;
        for j in 0..n {
            let im = -radius + (j as f64 + 0.5) * cell;
            starts.push(Complex64::new(re, im));
        }
    }
    for i in 0..n {
        let x = (i as f64 + 0.5) * radius / n as f64;
        starts.push(Complex64::new(x, 0.0));
        starts.push(Complex64::new(-x, 0.0));
    }
    let mut found = Vec::new();
    for start in starts {
        if let Some(s) = newton(&normalized, start, cfg.max_iter) {
            accept(p, s, limit, &mut found);
        }
    }
    let roots = dedupe(found, cfg.dedupe_tol);
    let (verdict, coverage_caveat) =
        classify_stability(&roots, Method::NewtonGrid, cfg.stability_margin);
    Ok(StabilityReport {
        roots,
        verdict,
        method: Method::NewtonGrid,
        coverage_caveat,
    })
}

/// Smallest `m` such that every exponent is within tolerance of a multiple
/// of `1/m`.
pub fn commensurate_denominator(p: &FracPoly, max_denominator: u32) -> Option<u32> {
    (1..=max_denominator).find(|&m| {
        p.exponents().all(|e| {
            let scaled = e * m as f64;
            (e - scaled.round() / m as f64).abs() <= COMMENSURATE_TOL
        })
    })
}

/// Roots of `sum a[k] w^k` (ascending coefficients) from the eigenvalues of
/// the companion matrix.
pub fn polynomial_roots(ascending: &[f64]) -> Vec<Complex64> {
    let mut coeffs = ascending.to_vec();
    while coeffs.last() == Some(&0.0) {
        coeffs.pop();
    }
    let degree = coeffs.len().saturating_sub(1);
    if degree == 0 {
        return Vec::new();
    }
    // Zero roots factor out exactly.
    let zeros = coeffs.iter().take_while(|&&c| c == 0.0).count();
    let reduced = &coeffs[zeros..];
    let d = reduced.len() - 1;
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    if d == 0 {
        return roots;
    }
    let lead = reduced[d];
    let mut companion = DMatrix::<f64>::zeros(d, d);
    for i in 1..d {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..d {
        companion[(i, d - 1)] = -reduced[i] / lead;
    }
    let eig = companion.complex_eigenvalues();
    roots.extend(eig.iter().map(|w| polish_polynomial_root(reduced, *w)));
    roots
}

fn horner(ascending: &[f64], w: Complex64) -> (Complex64, Complex64) {
    let mut f = Complex64::new(0.0, 0.0);
    let mut df = Complex64::new(0.0, 0.0);
    for &c in ascending.iter().rev() {
        df = df * w + f;
        f = f * w + c;
    }
    (f, df)
}

fn polish_polynomial_root(ascending: &[f64], mut w: Complex64) -> Complex64 {
    let (mut f, _) = horner(ascending, w);
    for _ in 0..8 {
        let (_, df) = horner(ascending, w);
        if df.norm() == 0.0 {
            break;
        }
        let next = w - f / df;
        let (fn_, _) = horner(ascending, next);
        if !(fn_.norm() < f.norm()) {
            break;
        }
        w = next;
        f = fn_;
    }
    w
}

/// Complete principal-sheet root enumeration for commensurate-order
/// polynomials. Returns `None` when the exponents are not commensurate
/// within the configured denominator, the `w`-degree is too large, or a
/// mapped root fails the residual check.
pub fn find_roots_commensurate(
    p: &FracPoly,
    cfg: &RootFindConfig,
) -> Result<Option<StabilityReport>> {
    cfg.validate()?;
    let (normalized, _) = require_terms(p)?;
    let Some(m) = commensurate_denominator(&normalized, cfg.commensurate_max_denominator) else {
        return Ok(None);
    };
    let mf = m as f64;
    let powers: Vec<usize> = normalized
        .exponents()
        .map(|e| (e * mf).round() as usize)
        .collect();
    let degree = powers[0];
    if degree > MAX_COMPANION_DEGREE {
        return Ok(None);
    }
    let mut ascending = vec![0.0; degree + 1];
    for (&k, c) in powers.iter().zip(normalized.coeffs()) {
        ascending[k] += c;
    }
    let limit = residual_limit(p, cfg);
    let sector = PI / mf * (1.0 + 1e-9) + 1e-12;
    let mut found = Vec::new();
    for w in polynomial_roots(&ascending) {
        if w.norm() == 0.0 || principal_arg(w).abs() > sector {
            continue;
        }
        let mut s = w.powu(m);
        // w on the sector edge maps onto the cut; put it on the principal side.
        if s.im.abs() <= 1e-12 * s.norm() && s.re < 0.0 {
            s.im = 0.0;
        }
        let polished = newton(&normalized, s, 8).unwrap_or(s);
        let before = found.len();
        accept(p, polished, limit, &mut found);
        if found.len() == before {
            return Ok(None);
        }
    }
    let roots = dedupe(found, cfg.dedupe_tol);
    let (verdict, coverage_caveat) =
        classify_stability(&roots, Method::Commensurate, cfg.stability_margin);
    Ok(Some(StabilityReport {
        roots,
        verdict,
        method: Method::Commensurate,
        coverage_caveat,
    }))
}

/// Principal-sheet roots of `p` with a stability verdict. Uses the
/// commensurate enumeration when it applies, multi-start Newton otherwise.
/// A search that finds nothing yields an inconclusive verdict rather than
/// an error.
pub fn find_roots(p: &FracPoly, cfg: &RootFindConfig) -> Result<StabilityReport> {
    match find_roots_commensurate(p, cfg)? {
        Some(report) => Ok(report),
        None => find_roots_newton(p, cfg),
    }
}

/// Verdict and coverage caveat for a root set.
///
/// Any root with real part above `margin` (or on it, within rounding) is
/// unstable. Otherwise a commensurate enumeration certifies stability; a
/// Newton search reports stable with the caveat set, or inconclusive when
/// it found nothing at all.
pub fn classify_stability(roots: &[Root], method: Method, margin: f64) -> (Verdict, bool) {
    let touches = roots
        .iter()
        .any(|r| r.value.re >= margin - 1e-9 * (1.0 + r.value.norm()));
    if touches {
        return (Verdict::Unstable, false);
    }
    match method {
        Method::Commensurate => (Verdict::Stable, false),
        Method::NewtonGrid if roots.is_empty() => (Verdict::Inconclusive, true),
        Method::NewtonGrid => (Verdict::Stable, true),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{char_poly_pd, PdController, Plant};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn reference_plant() -> Plant {
        Plant::new(1.0, 0.5, 0.8, 2.2, 0.9).unwrap()
    }

    fn root(re: f64, im: f64) -> Root {
        Root {
            value: c(re, im),
            residual: 0.0,
        }
    }

    #[test]
    fn eval_single_term() {
        let p = FracPoly::monomial(0.8, 2.2);
        assert_eq!(eval_fracpoly(&p, c(1.0, 0.0)).unwrap(), c(0.8, 0.0));
    }

    #[test]
    fn eval_principal_branch_on_cut() {
        let p = FracPoly::monomial(1.0, 0.5);
        let v = eval_fracpoly(&p, c(-1.0, 0.0)).unwrap();
        assert!((v - c(0.0, 1.0)).norm() < 1e-15, "{v}");
        // -0.0 imaginary part is still the upper side of the cut
        let v = eval_fracpoly(&p, c(-1.0, -0.0)).unwrap();
        assert!((v - c(0.0, 1.0)).norm() < 1e-15, "{v}");
    }

    #[test]
    fn eval_at_origin() {
        let p = FracPoly::new([(2.0, 1.5), (3.0, 0.0)]);
        assert_eq!(eval_fracpoly(&p, c(0.0, 0.0)).unwrap(), c(3.0, 0.0));
        let q = FracPoly::new([(2.0, 1.5), (3.0, -0.5)]);
        assert!(matches!(
            eval_fracpoly(&q, c(0.0, 0.0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn eval_designed_pole_residual() {
        let p = char_poly_pd(
            &reference_plant(),
            &PdController::new(24.0, 6.9407, 0.71859),
        );
        let v = eval_fracpoly(&p, c(-1.0, 6.0)).unwrap();
        assert!(v.norm() < 1e-2 * 25.0, "{v}");
    }

    #[test]
    fn normalize_unstable_case() {
        let p = FracPoly::new([(0.8, 2.2), (-79.74427, -0.55194), (0.5, 0.9), (50.0, 0.0)]);
        let (n, shift) = normalize(&p);
        assert!((shift - 0.55194).abs() < 1e-15);
        let exps: Vec<f64> = n.exponents().collect();
        for (e, want) in exps.iter().zip([2.75194, 1.45194, 0.55194, 0.0]) {
            assert!((e - want).abs() < 1e-12, "{exps:?}");
        }
        let coeffs: Vec<f64> = n.coeffs().collect();
        assert_eq!(coeffs, vec![0.8, 0.5, 50.0, -79.74427]);
    }

    #[test]
    fn normalize_identity_and_single_term() {
        let p = FracPoly::new([(1.0, 2.0), (1.0, 0.0)]);
        assert_eq!(normalize(&p), (p.clone(), 0.0));
        let (n, shift) = normalize(&FracPoly::monomial(4.0, -0.3));
        assert_eq!(n.terms(), &[(4.0, 0.0)]);
        assert_eq!(shift, 0.3);
    }

    #[test]
    fn designed_pd_roots() {
        let p = char_poly_pd(
            &reference_plant(),
            &PdController::new(24.0, 6.9407, 0.71859),
        );
        let report = find_roots(&p, &RootFindConfig::around_poles(&[c(-1.0, 6.0)])).unwrap();
        assert_eq!(report.method, Method::NewtonGrid);
        for want in [c(-1.0, 6.0), c(-1.0, -6.0)] {
            assert!(
                report.roots.iter().any(|r| (r.value - want).norm() < 5e-2),
                "{want} not in {:?}",
                report.roots
            );
        }
        assert_eq!(report.verdict, Verdict::Stable);
        assert!(report.coverage_caveat);
    }

    #[test]
    fn unstable_pd_extra_pole() {
        let p = char_poly_pd(
            &reference_plant(),
            &PdController::new(49.0, -79.74427, -0.55194),
        );
        let report = find_roots(&p, &RootFindConfig::around_poles(&[c(-1.0, 6.0)])).unwrap();
        let real: Vec<_> = report
            .roots
            .iter()
            .filter(|r| r.value.im.abs() < 1e-9 && r.value.re > 0.0)
            .collect();
        assert!(
            real.iter().any(|r| (r.value.re - 1.98).abs() <= 0.02),
            "{:?}",
            report.roots
        );
        assert_eq!(report.verdict, Verdict::Unstable);
    }

    #[test]
    fn integer_quadratic_commensurate() {
        let p = FracPoly::new([(1.0, 2.0), (1.0, 0.0)]);
        let report = find_roots(&p, &RootFindConfig::default()).unwrap();
        assert_eq!(report.method, Method::Commensurate);
        assert_eq!(report.roots.len(), 2);
        assert!((report.roots[0].value - c(0.0, -1.0)).norm() < 1e-10);
        assert!((report.roots[1].value - c(0.0, 1.0)).norm() < 1e-10);
    }

    #[test]
    fn commensurate_half_order() {
        // s + 2 s^0.5 + 5: w^2 + 2w + 5 has w = -1 +- 2i, arg > pi/2, so no
        // principal-sheet roots at all.
        let p = FracPoly::new([(1.0, 1.0), (2.0, 0.5), (5.0, 0.0)]);
        let report = find_roots(&p, &RootFindConfig::default()).unwrap();
        assert_eq!(report.method, Method::Commensurate);
        assert!(report.roots.is_empty());
        assert_eq!(report.verdict, Verdict::Stable);
        // s - 3 s^0.5 + 2: w = 1, 2 -> s = 1, 4
        let q = FracPoly::new([(1.0, 1.0), (-3.0, 0.5), (2.0, 0.0)]);
        let report = find_roots(&q, &RootFindConfig::default()).unwrap();
        let vals: Vec<f64> = report.roots.iter().map(|r| r.value.re).collect();
        assert_eq!(vals.len(), 2);
        assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[1] - 4.0).abs() < 1e-12);
        assert_eq!(report.verdict, Verdict::Unstable);
    }

    #[test]
    fn commensurate_detection() {
        let p = FracPoly::new([(0.8, 3.0), (0.5, 1.7), (25.0, 0.8), (10.0, 0.0)]);
        assert_eq!(commensurate_denominator(&p, 100), Some(10));
        let q = FracPoly::new([(0.8, 2.2), (6.9, 0.71859), (1.0, 0.0)]);
        assert_eq!(commensurate_denominator(&q, 100), None);
    }

    #[test]
    fn too_few_terms() {
        let p = FracPoly::monomial(1.0, 2.0);
        assert!(find_roots(&p, &RootFindConfig::default()).is_err());
    }

    #[test]
    fn classification_examples() {
        let stable = [root(-1.0, -6.0), root(-1.0, 6.0)];
        assert_eq!(
            classify_stability(&stable, Method::Commensurate, 0.0),
            (Verdict::Stable, false)
        );
        assert_eq!(
            classify_stability(&stable, Method::NewtonGrid, 0.0),
            (Verdict::Stable, true)
        );
        let unstable = [root(-1.0, -6.0), root(-1.0, 6.0), root(1.98, 0.0)];
        assert_eq!(
            classify_stability(&unstable, Method::NewtonGrid, 0.0).0,
            Verdict::Unstable
        );
        assert_eq!(
            classify_stability(&[], Method::NewtonGrid, 0.0),
            (Verdict::Inconclusive, true)
        );
    }

    #[test]
    fn polynomial_roots_with_zero_root() {
        // w^3 - w = w (w - 1)(w + 1)
        let mut r: Vec<f64> = polynomial_roots(&[0.0, -1.0, 0.0, 1.0])
            .iter()
            .map(|w| w.re)
            .collect();
        r.sort_by(f64::total_cmp);
        assert!((r[0] + 1.0).abs() < 1e-14 && r[1] == 0.0 && (r[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn residuals_within_threshold() {
        let cfg = RootFindConfig::default();
        let p = char_poly_pd(&reference_plant(), &PdController::new(10.0, 3.0, 0.6));
        let report = find_roots(&p, &cfg).unwrap();
        assert!(!report.roots.is_empty());
        let total: f64 = p.coeffs().map(f64::abs).sum();
        for r in &report.roots {
            let v = eval_fracpoly(&p, r.value).unwrap().norm();
            assert!(v <= cfg.newton_tol * (1.0 + total));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn scaling_invariance(scale in 0.01f64..100.0, k in 1.0f64..40.0, td in 0.5f64..10.0, delta in 0.2f64..1.2) {
            let cfg = RootFindConfig::default();
            let p = char_poly_pd(&reference_plant(), &PdController::new(k, td, delta));
            let a = find_roots(&p, &cfg).unwrap();
            let b = find_roots(&p.scale(scale), &cfg).unwrap();
            prop_assert_eq!(a.verdict, b.verdict);
            prop_assert_eq!(a.roots.len(), b.roots.len());
            for (x, y) in a.roots.iter().zip(&b.roots) {
                prop_assert!((x.value - y.value).norm() < 1e-8);
            }
        }

        #[test]
        fn roots_come_in_conjugate_pairs(k in 1.0f64..40.0, td in -5.0f64..10.0, delta in -0.5f64..1.2) {
            let p = char_poly_pd(&reference_plant(), &PdController::new(k, td, delta));
            let report = find_roots(&p, &RootFindConfig::default()).unwrap();
            for r in &report.roots {
                prop_assert!(report.roots.iter().any(|o| (o.value - r.value.conj()).norm() < 1e-6));
            }
        }
    }
}
