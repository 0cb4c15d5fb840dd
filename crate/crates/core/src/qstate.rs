//! Single-qubit states in Bloch form, the depolarizing channel, distance
//! measures and measurement sampling.
//!
//! A state is stored as its Bloch vector `r`, with density operator
//! `rho = (I + r . sigma) / 2`. Every quantity used by the protocol and the
//! adversary analysis is linear or quadratic in `r`, so no complex arithmetic
//! is needed outside of [`matrix`], which exists for cross-checking.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_f, check_theta, Error, Result};

pub mod matrix;

/// Tolerance for invariants of exactly constructed states.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for derived checks (purity of user-supplied references, etc).
pub const DERIVED_TOL: f64 = 1e-9;

pub type Bloch = [f64; 3];

pub(crate) fn dot(a: &Bloch, b: &Bloch) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(a: &Bloch) -> f64 {
    dot(a, a).sqrt()
}

fn scale(a: &Bloch, k: f64) -> Bloch {
    [a[0] * k, a[1] * k, a[2] * k]
}

fn sub(a: &Bloch, b: &Bloch) -> Bloch {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// A qubit density operator, held as its Bloch vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Bloch", into = "Bloch")]
pub struct QubitState {
    bloch: Bloch,
}

impl QubitState {
    /// Builds a state, rejecting vectors outside the Bloch ball.
    pub fn from_bloch(bloch: Bloch) -> Result<Self> {
        let r = norm(&bloch);
        if !r.is_finite() || r > 1.0 + EXACT_TOL {
            return Err(Error::InvalidParameter {
                name: "|bloch|",
                value: r,
                range: "[0, 1]",
            });
        }
        Ok(Self { bloch })
    }

    /// Caller guarantees `|bloch| <= 1` up to rounding.
    pub(crate) fn from_bloch_unchecked(bloch: Bloch) -> Self {
        debug_assert!(norm(&bloch) <= 1.0 + 1e-9, "bloch vector {bloch:?} outside ball");
        Self { bloch }
    }

    pub fn maximally_mixed() -> Self {
        Self { bloch: [0.0; 3] }
    }

    pub fn bloch(&self) -> Bloch {
        self.bloch
    }

    /// Length of the Bloch vector: 1 for pure states, 0 for `I/2`.
    pub fn radius(&self) -> f64 {
        norm(&self.bloch)
    }

    /// `Tr(rho^2) = (1 + |r|^2) / 2`.
    pub fn purity(&self) -> f64 {
        0.5 * (1.0 + dot(&self.bloch, &self.bloch))
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        (self.radius() - 1.0).abs() <= tol
    }

    /// The pure state orthogonal to this one (antipodal Bloch vector).
    pub fn antipode(&self) -> Self {
        Self {
            bloch: scale(&self.bloch, -1.0),
        }
    }
}

impl TryFrom<Bloch> for QubitState {
    type Error = Error;

    fn try_from(bloch: Bloch) -> Result<Self> {
        Self::from_bloch(bloch)
    }
}

impl From<QubitState> for Bloch {
    fn from(s: QubitState) -> Bloch {
        s.bloch
    }
}

/// The two signal states `phi_0`, `phi_1` with `|<phi_0|phi_1>|^2 = cos^2(theta)`.
///
/// Convention: `phi_b = (I + cos(theta) sigma_z -/+ sin(theta) sigma_x) / 2`,
/// i.e. Bloch vectors `(-/+ sin(theta), 0, cos(theta))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolStates {
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub phi0: QubitState,
    pub phi1: QubitState,
}

impl ProtocolStates {
    pub fn state(&self, bit: u8) -> QubitState {
        if bit == 0 {
            self.phi0
        } else {
            self.phi1
        }
    }

    /// `|<phi_0|phi_1>|^2`.
    pub fn overlap(&self) -> f64 {
        0.5 * (1.0 + dot(&self.phi0.bloch, &self.phi1.bloch))
    }
}

pub fn make_protocol_states(theta: f64) -> Result<ProtocolStates> {
    let theta = check_theta(theta)?;
    // cos(pi/2) is 6e-17 in floating point; pin the orthogonal case exactly.
    let (beta, alpha) = if theta == FRAC_PI_2 {
        (1.0, 0.0)
    } else {
        theta.sin_cos()
    };
    Ok(ProtocolStates {
        theta,
        alpha,
        beta,
        phi0: QubitState::from_bloch_unchecked([-beta, 0.0, alpha]),
        phi1: QubitState::from_bloch_unchecked([beta, 0.0, alpha]),
    })
}

/// `rho -> f rho + (1 - f) I / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepolarizingChannel {
    f: f64,
}

impl DepolarizingChannel {
    pub fn new(f: f64) -> Result<Self> {
        check_f(f)?;
        Ok(Self { f })
    }

    pub fn identity() -> Self {
        Self { f: 1.0 }
    }

    pub fn shrink(&self) -> f64 {
        self.f
    }

    pub fn apply(&self, s: &QubitState) -> QubitState {
        QubitState::from_bloch_unchecked(scale(&s.bloch, self.f))
    }

    /// Sequential application is again depolarizing with the product factor.
    pub fn then(&self, next: &DepolarizingChannel) -> DepolarizingChannel {
        DepolarizingChannel { f: self.f * next.f }
    }
}

pub fn apply_channel(ch: &DepolarizingChannel, s: &QubitState) -> QubitState {
    ch.apply(s)
}

/// `<psi|rho|psi>` for a pure reference `psi`.
pub fn fidelity(s: &QubitState, pure: &QubitState) -> Result<f64> {
    let r = pure.radius();
    if r < 1.0 - DERIVED_TOL {
        return Err(Error::NotPure { radius: r });
    }
    Ok((0.5 * (1.0 + dot(&s.bloch, &pure.bloch))).clamp(0.0, 1.0))
}

/// `||rho - rho'||_1 / 2`, which for qubits is half the Bloch distance.
pub fn trace_distance(a: &QubitState, b: &QubitState) -> f64 {
    0.5 * norm(&sub(&a.bloch, &b.bloch))
}

/// Which Pauli axis a tomography measurement used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub const ALL: [PauliAxis; 3] = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> char {
        ['x', 'y', 'z'][self.index()]
    }

    pub fn basis(self) -> MeasurementBasis {
        let mut axis = [0.0; 3];
        axis[self.index()] = 1.0;
        MeasurementBasis { axis }
    }
}

/// A projective qubit measurement `{(I + n.sigma)/2, (I - n.sigma)/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Bloch", into = "Bloch")]
pub struct MeasurementBasis {
    axis: Bloch,
}

impl MeasurementBasis {
    pub fn new(axis: Bloch) -> Result<Self> {
        let r = norm(&axis);
        if (r - 1.0).abs() > EXACT_TOL {
            return Err(Error::InvalidParameter {
                name: "|axis|",
                value: r,
                range: "{1}",
            });
        }
        Ok(Self { axis })
    }

    /// Normalizes `v`; `None` for the zero vector.
    pub fn along(v: Bloch) -> Option<Self> {
        let r = norm(&v);
        (r > 0.0 && r.is_finite()).then(|| Self {
            axis: scale(&v, 1.0 / r),
        })
    }

    /// The basis containing the pure state `s` as its `+1` outcome.
    pub fn containing(s: &QubitState) -> Option<Self> {
        Self::along(s.bloch)
    }

    pub fn axis(&self) -> Bloch {
        self.axis
    }

    pub fn pauli(&self) -> Option<PauliAxis> {
        PauliAxis::ALL
            .into_iter()
            .find(|p| self.axis == p.basis().axis)
    }

    /// Born probability of the `+1` outcome.
    pub fn prob_plus(&self, s: &QubitState) -> f64 {
        (0.5 * (1.0 + dot(&s.bloch, &self.axis))).clamp(0.0, 1.0)
    }
}

impl TryFrom<Bloch> for MeasurementBasis {
    type Error = Error;

    fn try_from(axis: Bloch) -> Result<Self> {
        Self::new(axis)
    }
}

impl From<MeasurementBasis> for Bloch {
    fn from(b: MeasurementBasis) -> Bloch {
        b.axis
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn value(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }
}

pub fn measure<R: Rng + ?Sized>(s: &QubitState, basis: &MeasurementBasis, rng: &mut R) -> Outcome {
    if rng.random::<f64>() < basis.prob_plus(s) {
        Outcome::Plus
    } else {
        Outcome::Minus
    }
}

/// Minimum-error discrimination of `phi_0` against `phi_1` with equal priors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Helstrom {
    pub success: f64,
    /// Outcome `+1` along this axis is read as `phi_1`.
    pub basis: MeasurementBasis,
}

impl Helstrom {
    pub fn guess<R: Rng + ?Sized>(&self, s: &QubitState, rng: &mut R) -> u8 {
        match measure(s, &self.basis, rng) {
            Outcome::Plus => 1,
            Outcome::Minus => 0,
        }
    }
}

/// Success is `(1 + D(phi_0, phi_1)) / 2 = (1 + sin theta) / 2`, achieved by
/// measuring along `r_1 - r_0`, which is `x` in our convention.
pub fn helstrom_success(ps: &ProtocolStates) -> Helstrom {
    let d = trace_distance(&ps.phi0, &ps.phi1);
    let basis = MeasurementBasis::along(sub(&ps.phi1.bloch, &ps.phi0.bloch))
        .expect("signal states are distinct for theta > 0");
    Helstrom {
        success: 0.5 * (1.0 + d),
        basis,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Discrimination {
    Conclusive(u8),
    Inconclusive,
}

/// A POVM element `weight * (I + v . sigma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Effect {
    weight: f64,
    v: Bloch,
}

impl Effect {
    fn prob(&self, s: &QubitState) -> f64 {
        (self.weight * (1.0 + dot(&self.v, &s.bloch))).max(0.0)
    }
}

/// Optimal unambiguous discrimination of two equiprobable pure states.
///
/// `E_0` is proportional to the projector orthogonal to `phi_1` and vice versa,
/// scaled by `1 / (1 + |<phi_0|phi_1>|)` so that `E_? = I - E_0 - E_1` stays
/// positive. The conclusive rate is then `1 - cos(theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unambiguous {
    pub success_prob: f64,
    conclusive: [Effect; 2],
}

impl Unambiguous {
    pub fn outcome_probs(&self, s: &QubitState) -> [f64; 2] {
        [self.conclusive[0].prob(s), self.conclusive[1].prob(s)]
    }

    pub fn sample<R: Rng + ?Sized>(&self, s: &QubitState, rng: &mut R) -> Discrimination {
        let [p0, p1] = self.outcome_probs(s);
        let u = rng.random::<f64>();
        if u < p0 {
            Discrimination::Conclusive(0)
        } else if u < p0 + p1 {
            Discrimination::Conclusive(1)
        } else {
            Discrimination::Inconclusive
        }
    }
}

pub fn unambiguous_discrimination(ps: &ProtocolStates) -> Unambiguous {
    let amplitude = ps.overlap().sqrt();
    let w = 0.5 / (1.0 + amplitude);
    Unambiguous {
        success_prob: 1.0 - amplitude,
        conclusive: [
            Effect {
                weight: w,
                v: ps.phi1.antipode().bloch,
            },
            Effect {
                weight: w,
                v: ps.phi0.antipode().bloch,
            },
        ],
    }
}
