//! Plants, controllers and the closed-loop models built from them.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Exponents closer than this are treated as the same power of `s`.
pub const EXPONENT_MERGE_TOL: f64 = 1e-12;

/// Fractional plant `1 / (a2 s^alpha + a1 s^beta + a0)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plant {
    a0: f64,
    a1: f64,
    a2: f64,
    alpha: f64,
    beta: f64,
}

impl Plant {
    pub fn new(a0: f64, a1: f64, a2: f64, alpha: f64, beta: f64) -> Result<Self> {
        let plant = Self {
            a0,
            a1,
            a2,
            alpha,
            beta,
        };
        plant.validate()?;
        Ok(plant)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.a0, self.a1, self.a2, self.alpha, self.beta];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "plant parameters must be finite".into(),
            ));
        }
        if self.a2 == 0.0 {
            return Err(Error::InvalidArgument("plant a2 must be nonzero".into()));
        }
        if !(self.alpha > self.beta && self.beta >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "plant orders need alpha > beta >= 0, got alpha={} beta={}",
                self.alpha, self.beta
            )));
        }
        if self.alpha > 3.0 {
            return Err(Error::InvalidArgument(format!(
                "plant order alpha={} exceeds the supported maximum of 3",
                self.alpha
            )));
        }
        Ok(())
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }
    pub fn a1(&self) -> f64 {
        self.a1
    }
    pub fn a2(&self) -> f64 {
        self.a2
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// `K + Td s^delta`. Negative `Td` and `delta` are allowed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdController {
    pub k: f64,
    pub td: f64,
    pub delta: f64,
}

impl PdController {
    pub fn new(k: f64, td: f64, delta: f64) -> Self {
        Self { k, td, delta }
    }

    fn validate(&self) -> Result<()> {
        if [self.k, self.td, self.delta].iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(
                "PD controller parameters must be finite".into(),
            ))
        }
    }
}

/// `K + Ti s^-lambda` with `lambda > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiController {
    k: f64,
    ti: f64,
    lambda: f64,
}

impl PiController {
    pub fn new(k: f64, ti: f64, lambda: f64) -> Result<Self> {
        if ![k, ti, lambda].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument(
                "PI controller parameters must be finite".into(),
            ));
        }
        if lambda <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "PI integral order must be positive, got {lambda}"
            )));
        }
        Ok(Self { k, ti, lambda })
    }

    pub fn k(&self) -> f64 {
        self.k
    }
    pub fn ti(&self) -> f64 {
        self.ti
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Controller {
    Pd(PdController),
    Pi(PiController),
}

impl From<PdController> for Controller {
    fn from(c: PdController) -> Self {
        Controller::Pd(c)
    }
}

impl From<PiController> for Controller {
    fn from(c: PiController) -> Self {
        Controller::Pi(c)
    }
}

/// Signal a model term reads from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    State(usize),
    Input,
}

/// `gain * D^order source`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub source: Source,
    pub order: f64,
    pub gain: f64,
}

impl Term {
    fn new(source: Source, order: f64, gain: f64) -> Self {
        Self {
            source,
            order,
            gain,
        }
    }
}

/// State model with first derivatives on the left and fractional
/// derivatives of states and input on the right:
/// `x_i' = sum(gain * D^order source)` and `y = sum(gain * D^order source)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateModel {
    equations: Vec<Vec<Term>>,
    output: Vec<Term>,
}

impl StateModel {
    fn new(equations: Vec<Vec<Term>>, output: Vec<Term>, context: &'static str) -> Result<Self> {
        let dim = equations.len();
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidArgument(format!(
                "state dimension must be 2 or 3, got {dim}"
            )));
        }
        for term in equations.iter().flatten().chain(&output) {
            if !(term.order > -3.0 && term.order < 3.0) {
                return Err(Error::UnsupportedOrder {
                    order: term.order,
                    context,
                });
            }
            if !term.gain.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "{context}: non-finite gain {}",
                    term.gain
                )));
            }
            if let Source::State(i) = term.source {
                assert!(i < dim, "term references state {i} of {dim}");
            }
        }
        Ok(Self { equations, output })
    }

    pub fn dim(&self) -> usize {
        self.equations.len()
    }

    /// Right-hand side terms of `x_i'`.
    pub fn state_terms(&self, i: usize) -> &[Term] {
        &self.equations[i]
    }

    pub fn equations(&self) -> &[Vec<Term>] {
        &self.equations
    }

    pub fn output_terms(&self) -> &[Term] {
        &self.output
    }

    /// Flags the equations that are plain integrator links (every term of
    /// order zero), e.g. `x1' = x2`.
    pub fn integer_chain(&self) -> Vec<bool> {
        self.equations
            .iter()
            .map(|eq| eq.iter().all(|t| t.order == 0.0))
            .collect()
    }

    /// `A(s)[i][j]` as a fractional polynomial: the Laplace image of the
    /// state terms of equation `i` acting on `x_j`.
    pub fn system_entry(&self, i: usize, j: usize) -> FracPoly {
        FracPoly::new(
            self.equations[i]
                .iter()
                .filter(|t| t.source == Source::State(j))
                .map(|t| (t.gain, t.order)),
        )
    }

    /// `det(sI - A(s))`, the denominator of the model's transfer function.
    pub fn denominator(&self) -> FracPoly {
        let n = self.dim();
        let m: Vec<Vec<FracPoly>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let a = self.system_entry(i, j).scale(-1.0);
                        if i == j {
                            a.add(&FracPoly::monomial(1.0, 1.0))
                        } else {
                            a
                        }
                    })
                    .collect()
            })
            .collect();
        match n {
            2 => m[0][0]
                .mul(&m[1][1])
                .add(&m[0][1].mul(&m[1][0]).scale(-1.0)),
            3 => {
                let minor = |r: usize, c: usize| {
                    let rows: Vec<usize> = (0..3).filter(|&x| x != r).collect();
                    let cols: Vec<usize> = (0..3).filter(|&x| x != c).collect();
                    m[rows[0]][cols[0]]
                        .mul(&m[rows[1]][cols[1]])
                        .add(&m[rows[0]][cols[1]].mul(&m[rows[1]][cols[0]]).scale(-1.0))
                };
                m[0][0]
                    .mul(&minor(0, 0))
                    .add(&m[0][1].mul(&minor(0, 1)).scale(-1.0))
                    .add(&m[0][2].mul(&minor(0, 2)))
            }
            _ => unreachable!("dimension checked at construction"),
        }
    }
}

/// Closed loop with a `PD^delta` controller:
///
/// ```text
/// x1' = x2
/// x2' = -(a0+K)/a2 D^(2-alpha) x1 - Td/a2 D^(1+delta-alpha) x2
///       - a1/a2 D^(1+beta-alpha) x2 + 1/a2 D^(2-alpha) w
/// y   = K x1 + Td D^(delta-1) x2
/// ```
pub fn build_pd_model(plant: &Plant, ctrl: &PdController) -> Result<StateModel> {
    plant.validate()?;
    ctrl.validate()?;
    let Plant {
        a0,
        a1,
        a2,
        alpha,
        beta,
    } = *plant;
    let PdController { k, td, delta } = *ctrl;
    let x1 = Source::State(0);
    let x2 = Source::State(1);
    StateModel::new(
        vec![
            vec![Term::new(x2, 0.0, 1.0)],
            vec![
                Term::new(x1, 2.0 - alpha, -(a0 + k) / a2),
                Term::new(x2, 1.0 + delta - alpha, -td / a2),
                Term::new(x2, 1.0 + beta - alpha, -a1 / a2),
                Term::new(Source::Input, 2.0 - alpha, 1.0 / a2),
            ],
        ],
        vec![Term::new(x1, 0.0, k), Term::new(x2, delta - 1.0, td)],
        "PD state model",
    )
}

/// Closed loop with a `PI^lambda` controller; `x1` integrates the control
/// error and `y = x2`:
///
/// ```text
/// x1' = -x2 + w
/// x2' = x3
/// x3' = Ti/a2 D^(3-alpha-lambda) x1 - (a0+K)/a2 D^(2-alpha) x2
///       - a1/a2 D^(1+beta-alpha) x3 + K/a2 D^(2-alpha) w
/// y   = x2
/// ```
pub fn build_pi_model(plant: &Plant, ctrl: &PiController) -> Result<StateModel> {
    plant.validate()?;
    let Plant {
        a0,
        a1,
        a2,
        alpha,
        beta,
    } = *plant;
    let (k, ti, lambda) = (ctrl.k, ctrl.ti, ctrl.lambda);
    let x1 = Source::State(0);
    let x2 = Source::State(1);
    let x3 = Source::State(2);
    StateModel::new(
        vec![
            vec![Term::new(x2, 0.0, -1.0), Term::new(Source::Input, 0.0, 1.0)],
            vec![Term::new(x3, 0.0, 1.0)],
            vec![
                Term::new(x1, 3.0 - alpha - lambda, ti / a2),
                Term::new(x2, 2.0 - alpha, -(a0 + k) / a2),
                Term::new(x3, 1.0 + beta - alpha, -a1 / a2),
                Term::new(Source::Input, 2.0 - alpha, k / a2),
            ],
        ],
        vec![Term::new(x2, 0.0, 1.0)],
        "PI state model",
    )
}

/// Finite sum of `coeff * s^exponent` terms in canonical form: exponents
/// strictly decreasing, like powers merged, zero coefficients dropped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FracPoly {
    terms: Vec<(f64, f64)>,
}

impl FracPoly {
    /// Builds the canonical form of `(coeff, exponent)` pairs.
    pub fn new(terms: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut raw: Vec<(f64, f64)> = terms.into_iter().filter(|t| t.0 != 0.0).collect();
        raw.sort_by(|a, b| b.1.total_cmp(&a.1));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (c, e) in raw {
            match merged.last_mut() {
                Some(last) if (last.1 - e).abs() <= EXPONENT_MERGE_TOL => last.0 += c,
                _ => merged.push((c, e)),
            }
        }
        merged.retain(|t| t.0 != 0.0);
        Self { terms: merged }
    }

    pub fn monomial(coeff: f64, exponent: f64) -> Self {
        Self::new([(coeff, exponent)])
    }

    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    /// `(coeff, exponent)` pairs, highest exponent first.
    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn exponents(&self) -> impl Iterator<Item = f64> + '_ {
        self.terms.iter().map(|t| t.1)
    }

    pub fn coeffs(&self) -> impl Iterator<Item = f64> + '_ {
        self.terms.iter().map(|t| t.0)
    }

    pub fn leading(&self) -> Option<(f64, f64)> {
        self.terms.first().copied()
    }

    pub fn min_exponent(&self) -> Option<f64> {
        self.terms.last().map(|t| t.1)
    }

    pub fn add(&self, other: &FracPoly) -> FracPoly {
        FracPoly::new(self.terms.iter().chain(&other.terms).copied())
    }

    pub fn mul(&self, other: &FracPoly) -> FracPoly {
        FracPoly::new(
            self.terms
                .iter()
                .flat_map(|&(c1, e1)| other.terms.iter().map(move |&(c2, e2)| (c1 * c2, e1 + e2))),
        )
    }

    pub fn scale(&self, factor: f64) -> FracPoly {
        FracPoly::new(self.terms.iter().map(|&(c, e)| (c * factor, e)))
    }

    /// Multiplies by `s^shift`.
    pub fn shift(&self, shift: f64) -> FracPoly {
        FracPoly::new(self.terms.iter().map(|&(c, e)| (c, e + shift)))
    }

    /// Term-by-term comparison with absolute tolerance on coefficients and
    /// exponents.
    pub fn approx_eq(&self, other: &FracPoly, tol: f64) -> bool {
        self.terms.len() == other.terms.len()
            && self
                .terms
                .iter()
                .zip(&other.terms)
                .all(|(a, b)| (a.0 - b.0).abs() <= tol && (a.1 - b.1).abs() <= tol)
    }
}

/// `a2 s^alpha + a1 s^beta + Td s^delta + (a0 + K)`.
pub fn char_poly_pd(plant: &Plant, ctrl: &PdController) -> FracPoly {
    FracPoly::new([
        (plant.a2, plant.alpha),
        (plant.a1, plant.beta),
        (ctrl.td, ctrl.delta),
        (plant.a0 + ctrl.k, 0.0),
    ])
}

/// `a2 s^(alpha+lambda) + a1 s^(beta+lambda) + (a0 + K) s^lambda + Ti`.
pub fn char_poly_pi(plant: &Plant, ctrl: &PiController) -> FracPoly {
    FracPoly::new([
        (plant.a2, plant.alpha + ctrl.lambda),
        (plant.a1, plant.beta + ctrl.lambda),
        (plant.a0 + ctrl.k, ctrl.lambda),
        (ctrl.ti, 0.0),
    ])
}

pub fn char_poly(plant: &Plant, ctrl: &Controller) -> FracPoly {
    match ctrl {
        Controller::Pd(c) => char_poly_pd(plant, c),
        Controller::Pi(c) => char_poly_pi(plant, c),
    }
}
