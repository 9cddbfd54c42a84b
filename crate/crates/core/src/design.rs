//! Pole-placement controller synthesis.
//!
//! Substituting a desired pole `p` into the characteristic equation gives
//! one complex (two real) equations in the controller parameters:
//!
//! - `PD^delta` with `K` fixed by the steady-state error: solve for
//!   `(Td, delta)` by damped Newton from a fixed list of starts.
//! - Integer PD (`delta = 1`): the equations are linear in `(K, Td)`.
//! - `PI^lambda` with three poles: solve for `(K, Ti, lambda)` by damped
//!   Gauss–Newton, started at several `lambda` values with `(K, Ti)` from
//!   the linear least-squares fit at that `lambda`.
//!
//! Designs are returned whether or not the resulting loop is stable; use
//! [`crate::charpoly::find_roots`] to check.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::charpoly::{eval_fracpoly, principal_pow};
use crate::model::{char_poly_pd, char_poly_pi, PdController, PiController, Plant};
use crate::{Error, Result};

/// Residual acceptance, relative to `|a0 + K|`.
pub const DESIGN_RESIDUAL_TOL: f64 = 1e-8;

/// Starting `(Td, delta)` pairs tried in order.
pub const PD_STARTS: [(f64, f64); 4] = [(1.0, 0.5), (1.0, 1.0), (-1.0, -0.5), (10.0, 0.7)];

/// Starting `lambda` values for the PI search.
pub const PI_LAMBDA_STARTS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

const MAX_NEWTON_ITER: usize = 100;
const MAX_HALVINGS: usize = 30;
const JACOBIAN_REL_STEP: f64 = 1e-7;

/// `K = (100 / e_ss - 1) a0`: the proportional gain giving a steady-state
/// step error of `ess_percent` with a `PD^delta` loop.
pub fn gain_from_ss_error(a0: f64, ess_percent: f64) -> Result<f64> {
    if !(ess_percent > 0.0 && ess_percent < 100.0) {
        return Err(Error::InvalidArgument(format!(
            "steady-state error must be in (0, 100) percent, got {ess_percent}"
        )));
    }
    if !(a0 > 0.0 && a0.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "plant a0 must be positive, got {a0}"
        )));
    }
    Ok((100.0 / ess_percent - 1.0) * a0)
}

/// How the proportional gain of a `PD^delta` design is fixed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GainSpec {
    SteadyStateErrorPercent(f64),
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DesignSpecPd {
    plant: Plant,
    pole: Complex64,
    gain: Option<GainSpec>,
}

impl DesignSpecPd {
    /// `pole` is one member of the desired conjugate pair. `gain` is only
    /// needed for the fractional design; the integer design solves for `K`.
    pub fn new(plant: Plant, pole: Complex64, gain: Option<GainSpec>) -> Result<Self> {
        plant.validate()?;
        if !pole.is_finite() {
            return Err(Error::InvalidArgument("desired pole must be finite".into()));
        }
        if pole.im == 0.0 {
            return Err(Error::InvalidArgument(
                "PD design needs a complex pole; a real pole gives only one equation".into(),
            ));
        }
        Ok(Self {
            plant,
            // the pair is what matters; work with the upper member
            pole: if pole.im < 0.0 { pole.conj() } else { pole },
            gain,
        })
    }

    pub fn plant(&self) -> &Plant {
        &self.plant
    }

    pub fn pole(&self) -> Complex64 {
        self.pole
    }

    pub fn gain(&self) -> Result<f64> {
        match self.gain {
            Some(GainSpec::SteadyStateErrorPercent(e)) => gain_from_ss_error(self.plant.a0(), e),
            Some(GainSpec::Fixed(k)) if k.is_finite() => Ok(k),
            Some(GainSpec::Fixed(k)) => Err(Error::InvalidArgument(format!(
                "fixed gain must be finite, got {k}"
            ))),
            None => Err(Error::InvalidArgument(
                "fractional PD design needs a steady-state error or a fixed gain".into(),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DesignSpecPi {
    plant: Plant,
    poles: [Complex64; 3],
}

impl DesignSpecPi {
    /// Three desired poles closed under conjugation: a conjugate pair and a
    /// real pole, or three real poles.
    pub fn new(plant: Plant, poles: [Complex64; 3]) -> Result<Self> {
        plant.validate()?;
        if poles.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument(
                "desired poles must be finite".into(),
            ));
        }
        let complex: Vec<&Complex64> = poles.iter().filter(|p| p.im != 0.0).collect();
        let closed = match complex.len() {
            0 => true,
            2 => *complex[0] == complex[1].conj(),
            _ => false,
        };
        if !closed {
            return Err(Error::InvalidArgument(
                "PI poles must be a conjugate pair plus a real pole, or three real poles".into(),
            ));
        }
        let mut real: Vec<f64> = poles.iter().filter(|p| p.im == 0.0).map(|p| p.re).collect();
        real.sort_by(f64::total_cmp);
        if real.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(
                "repeated real poles give dependent equations".into(),
            ));
        }
        Ok(Self { plant, poles })
    }

    pub fn plant(&self) -> &Plant {
        &self.plant
    }

    pub fn poles(&self) -> &[Complex64; 3] {
        &self.poles
    }

    /// One representative per conjugate class.
    fn distinct_poles(&self) -> Vec<Complex64> {
        self.poles.iter().filter(|p| p.im >= 0.0).copied().collect()
    }
}

/// Outcome of a damped Newton / Gauss–Newton run.
struct Solve {
    x: Vec<f64>,
    residual: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Minimizes `|f(x)|` by Gauss–Newton steps with a central-difference
/// Jacobian, halving each step until the residual norm decreases. Square
/// systems reduce to plain Newton.
fn damped_newton(f: &dyn Fn(&[f64]) -> Vec<f64>, x0: &[f64], target: f64) -> Option<Solve> {
    let mut x = x0.to_vec();
    let mut r = f(&x);
    let mut rn = norm(&r);
    if !rn.is_finite() {
        return None;
    }
    for _ in 0..MAX_NEWTON_ITER {
        if rn <= target * 1e-4 {
            break;
        }
        let m = r.len();
        let n = x.len();
        let mut jac = DMatrix::<f64>::zeros(m, n);
        for j in 0..n {
            let dh = JACOBIAN_REL_STEP * x[j].abs().max(1.0);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += dh;
            xm[j] -= dh;
            let (fp, fm) = (f(&xp), f(&xm));
            for i in 0..m {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * dh);
            }
        }
        if jac.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let rhs = -DVector::from_vec(r.clone());
        let step = jac.svd(true, true).solve(&rhs, 1e-14).ok()?;
        let mut scale = 1.0;
        let mut improved = None;
        for _ in 0..MAX_HALVINGS {
            let cand: Vec<f64> = x
                .iter()
                .zip(step.iter())
                .map(|(a, d)| a + scale * d)
                .collect();
            let rc = f(&cand);
            let rcn = norm(&rc);
            if rcn < rn {
                improved = Some((cand, rc, rcn));
                break;
            }
            scale *= 0.5;
        }
        let Some((cand, rc, rcn)) = improved else {
            break;
        };
        let moved = cand
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        x = cand;
        r = rc;
        rn = rcn;
        if moved <= 1e-15 * x.iter().map(|v| v.abs()).fold(1.0, f64::max) {
            break;
        }
    }
    Some(Solve { x, residual: rn })
}

fn pd_residual(plant: &Plant, k: f64, pole: Complex64, td: f64, delta: f64) -> Complex64 {
    plant.a2() * principal_pow(pole, plant.alpha())
        + plant.a1() * principal_pow(pole, plant.beta())
        + td * principal_pow(pole, delta)
        + (plant.a0() + k)
}

/// Every distinct `(Td, delta)` solution reached from [`PD_STARTS`] for the
/// pole pair of `spec`, in start order.
///
/// The solutions form a family `delta_n = (phi + n pi) / arg(p)`, one per
/// branch of `arctan`, with `Td` following from `|Td| |p|^delta = |g|`.
pub fn pd_fractional_solutions(spec: &DesignSpecPd) -> Result<Vec<PdController>> {
    Ok(pd_solve(spec)?.0)
}

fn pd_solve(spec: &DesignSpecPd) -> Result<(Vec<PdController>, f64)> {
    let k = spec.gain()?;
    let plant = spec.plant;
    let pole = spec.pole;
    let limit = DESIGN_RESIDUAL_TOL * (plant.a0() + k).abs().max(f64::MIN_POSITIVE);
    let f = |x: &[f64]| {
        let r = pd_residual(&plant, k, pole, x[0], x[1]);
        vec![r.re, r.im]
    };
    let mut best = f64::INFINITY;
    let mut found: Vec<PdController> = Vec::new();
    for (td0, delta0) in PD_STARTS {
        let Some(sol) = damped_newton(&f, &[td0, delta0], limit) else {
            continue;
        };
        let ctrl = PdController::new(k, sol.x[0], sol.x[1]);
        let check = eval_fracpoly(&char_poly_pd(&plant, &ctrl), pole)?.norm();
        best = best.min(check);
        if check <= limit && !found.iter().any(|c| (c.delta - ctrl.delta).abs() < 1e-6) {
            found.push(ctrl);
        }
    }
    Ok((found, best))
}

/// Places the conjugate pair at `spec.pole` with `K` fixed by the spec,
/// solving for `(Td, delta)`.
///
/// Of the converged solutions (see [`pd_fractional_solutions`]) the one on
/// the principal branch, `|delta arg(p)| < pi/2`, is returned; failing
/// that, the first in start order.
pub fn design_pd_fractional(spec: &DesignSpecPd) -> Result<PdController> {
    let (found, best) = pd_solve(spec)?;
    let theta = spec.pole.arg();
    found
        .iter()
        .find(|c| (c.delta * theta).abs() < std::f64::consts::FRAC_PI_2)
        .or(found.first())
        .copied()
        .ok_or_else(|| Error::NoSolution {
            reason: format!(
                "PD design for pole {} did not converge from any start",
                spec.pole
            ),
            residual: best,
        })
}

/// Integer-order PD (`delta = 1`): solves the real 2x2 system
/// `K + Td Re(p) = -Re(g)`, `Td Im(p) = -Im(g)` with
/// `g = a2 p^alpha + a1 p^beta + a0`.
pub fn design_pd_integer(spec: &DesignSpecPd) -> Result<PdController> {
    let plant = spec.plant;
    let p = spec.pole;
    let g = plant.a2() * principal_pow(p, plant.alpha())
        + plant.a1() * principal_pow(p, plant.beta())
        + plant.a0();
    // [1 Re p; 0 Im p] [K; Td] = -[Re g; Im g]
    let det = p.im;
    if det.abs() <= f64::EPSILON * p.norm() {
        return Err(Error::NoSolution {
            reason: "integer PD equations are singular for a real pole".into(),
            residual: f64::NAN,
        });
    }
    let td = -g.im / det;
    let k = -g.re - td * p.re;
    Ok(PdController::new(k, td, 1.0))
}

fn pi_residuals(plant: &Plant, poles: &[Complex64], x: &[f64]) -> Vec<f64> {
    let (k, ti, lambda) = (x[0], x[1], x[2]);
    poles
        .iter()
        .flat_map(|&p| {
            let r = plant.a2() * principal_pow(p, plant.alpha() + lambda)
                + plant.a1() * principal_pow(p, plant.beta() + lambda)
                + (plant.a0() + k) * principal_pow(p, lambda)
                + ti;
            [r.re, r.im]
        })
        .collect()
}

/// `(K, Ti)` minimizing the residuals at fixed `lambda`; the
/// characteristic equation is linear in both.
fn pi_linear_start(plant: &Plant, poles: &[Complex64], lambda: f64) -> Option<[f64; 2]> {
    let mut a = DMatrix::<f64>::zeros(2 * poles.len(), 2);
    let mut b = DVector::<f64>::zeros(2 * poles.len());
    for (i, &p) in poles.iter().enumerate() {
        let pl = principal_pow(p, lambda);
        let rest = plant.a2() * principal_pow(p, plant.alpha() + lambda)
            + plant.a1() * principal_pow(p, plant.beta() + lambda)
            + plant.a0() * pl;
        a[(2 * i, 0)] = pl.re;
        a[(2 * i + 1, 0)] = pl.im;
        a[(2 * i, 1)] = 1.0;
        a[(2 * i + 1, 1)] = 0.0;
        b[2 * i] = -rest.re;
        b[2 * i + 1] = -rest.im;
    }
    let x = a.svd(true, true).solve(&b, 1e-14).ok()?;
    x.iter().all(|v| v.is_finite()).then(|| [x[0], x[1]])
}

/// Places three poles with a `PI^lambda` controller. A start is accepted
/// when it converges to `lambda > 0` with residual at most
/// `1e-8 |a0 + K|` at every desired pole.
pub fn design_pi(spec: &DesignSpecPi) -> Result<PiController> {
    let plant = spec.plant;
    let poles = spec.distinct_poles();
    let f = |x: &[f64]| pi_residuals(&plant, &poles, x);
    let mut best = f64::INFINITY;
    for lambda0 in PI_LAMBDA_STARTS {
        let Some([k0, ti0]) = pi_linear_start(&plant, &poles, lambda0) else {
            continue;
        };
        let target = DESIGN_RESIDUAL_TOL * (plant.a0() + k0).abs().max(f64::MIN_POSITIVE);
        let Some(sol) = damped_newton(&f, &[k0, ti0, lambda0], target) else {
            continue;
        };
        let [k, ti, lambda] = [sol.x[0], sol.x[1], sol.x[2]];
        if !(lambda > 0.0) {
            continue;
        }
        let ctrl = PiController::new(k, ti, lambda)?;
        let poly = char_poly_pi(&plant, &ctrl);
        let limit = DESIGN_RESIDUAL_TOL * (plant.a0() + k).abs();
        let worst = spec
            .poles
            .iter()
            .map(|&p| eval_fracpoly(&poly, p).map(|v| v.norm()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        best = best.min(worst.max(sol.residual));
        if worst <= limit {
            return Ok(ctrl);
        }
    }
    Err(Error::NoSolution {
        reason: "no PI start converged to a positive integral order".into(),
        residual: best,
    })
}
