//! Optimal cheating biases.
//!
//! Cheating Alice holds a purification of Bob's qubit and, depending on which
//! bit she wants to declare, measures her half; Bob's conditional states are
//! `sigma`/`sigma_bar` (she wanted 0 and won/lost) and `tau`/`tau_bar` (she
//! wanted 1 and won/lost). With the subnormalized blocks
//!
//! ```text
//! q sigma           = (q I + s_x X + s_z Z) / 2
//! (1-q) sigma_bar   = ((1-q) I - s_x X + (f a - s_z) Z) / 2
//! q tau             = (q I + (f b + s_x) X + s_z Z) / 2
//! (1-q) tau_bar     = ((1-q) I - (f b + s_x) X + (f a - s_z) Z) / 2
//! ```
//!
//! (`a = cos theta`, `b = sin theta`) the mixture constraints hold identically
//! and positivity of the four blocks becomes four second-order-cone
//! inequalities in `(q, s_x, s_z)`. Alice's bias is the largest feasible
//! `q` minus one half.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_f, check_gamma, check_theta, Error, Result};
use crate::qstate::{make_protocol_states, norm, Bloch, DepolarizingChannel, ProtocolStates, QubitState};

/// Tolerance on mixture residuals and positivity of a constructed ensemble.
pub const ENSEMBLE_TOL: f64 = 1e-10;

/// Slack (in squared form) for the oracle's grid feasibility test; absorbs
/// rounding in `cos^2 + sin^2` at otherwise exactly feasible points.
const ORACLE_FEAS_TOL: f64 = 1e-12;

/// Cap on box re-centerings within one oracle refinement round.
const MAX_SLIDES: usize = 64;

/// Upper bound on Alice's bias for any channel, clamped to the meaningful
/// range: `min(1/2, sqrt(2 gamma) / sin^2 theta)`.
pub fn theorem1_bound(gamma: f64, theta: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let ps = make_protocol_states(theta)?;
    Ok(((2.0 * gamma).sqrt() / (ps.beta * ps.beta)).min(0.5))
}

fn f_star_of(ps: &ProtocolStates) -> f64 {
    // (sqrt(1 + 3a^2) - b) / (2a^2), rationalized so theta = pi/2 is regular.
    2.0 / ((1.0 + 3.0 * ps.alpha * ps.alpha).sqrt() + ps.beta)
}

/// Channel shrink factor at which the optimal attack changes form.
pub fn f_star(theta: f64) -> Result<f64> {
    Ok(f_star_of(&make_protocol_states(theta)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `f <= f*`: the `sigma_bar`/`tau_bar` cones bind; `q = 1 - f sin(theta) / 2`.
    #[serde(rename = "lowF")]
    LowF,
    /// `f > f*`: all four cones bind.
    #[serde(rename = "highF")]
    HighF,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::LowF => "lowF",
            Regime::HighF => "highF",
        }
    }
}

/// A point `(q, s_x, s_z)` of Alice's strategy space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheatPoint {
    pub q: f64,
    pub s_x: f64,
    pub s_z: f64,
}

impl CheatPoint {
    /// Honest Alice: `q = 1/2`, `sigma = tau_bar = E(phi_0)`, `sigma_bar = tau = E(phi_1)`.
    pub fn honest(ps: &ProtocolStates, f: f64) -> Self {
        Self {
            q: 0.5,
            s_x: -0.5 * f * ps.beta,
            s_z: 0.5 * f * ps.alpha,
        }
    }

    /// The four subnormalized blocks `(weight, bloch * weight)` in the order
    /// sigma, sigma_bar, tau, tau_bar.
    fn blocks(&self, ps: &ProtocolStates, f: f64) -> [(f64, Bloch); 4] {
        let (fa, fb) = (f * ps.alpha, f * ps.beta);
        let (q, sx, sz) = (self.q, self.s_x, self.s_z);
        [
            (q, [sx, 0.0, sz]),
            (1.0 - q, [-sx, 0.0, fa - sz]),
            (q, [fb + sx, 0.0, sz]),
            (1.0 - q, [-fb - sx, 0.0, fa - sz]),
        ]
    }

    /// `|block vector| - weight` for each block; positive means not PSD.
    pub fn positivity_excess(&self, ps: &ProtocolStates, f: f64) -> [f64; 4] {
        self.blocks(ps, f).map(|(w, v)| norm(&v) - w)
    }
}

const BLOCK_NAMES: [&str; 4] = [
    "sigma: s_z^2 + s_x^2 <= q^2",
    "sigma_bar: (f a - s_z)^2 + s_x^2 <= (1 - q)^2",
    "tau: s_z^2 + (f b + s_x)^2 <= q^2",
    "tau_bar: (f a - s_z)^2 + (f b + s_x)^2 <= (1 - q)^2",
];

/// Alice's cheat ensemble with normalized conditional states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheatSolution {
    pub q: f64,
    pub s_x: f64,
    pub s_z: f64,
    pub sigma: QubitState,
    pub sigma_bar: QubitState,
    pub tau: QubitState,
    pub tau_bar: QubitState,
    /// Set for closed-form optima; `None` for user or oracle points.
    pub regime: Option<Regime>,
}

impl CheatSolution {
    pub fn point(&self) -> CheatPoint {
        CheatPoint {
            q: self.q,
            s_x: self.s_x,
            s_z: self.s_z,
        }
    }

    /// Largest absolute deviation in the mixture identities
    /// `q sigma + (1-q) sigma_bar = rho_B = q tau + (1-q) tau_bar`,
    /// `q sigma + (1-q) tau_bar = rho_0`, `q tau + (1-q) sigma_bar = rho_1`,
    /// with `rho_b = E(phi_b)` and `rho_B = (rho_0 + rho_1) / 2`.
    pub fn mixture_residual(&self, ps: &ProtocolStates, f: f64) -> f64 {
        let ch = DepolarizingChannel::new(f).expect("f validated by caller");
        let rho0 = ch.apply(&ps.phi0).bloch();
        let rho1 = ch.apply(&ps.phi1).bloch();
        let rho_b: Bloch = std::array::from_fn(|k| 0.5 * (rho0[k] + rho1[k]));
        let q = self.q;
        let mix = |a: &QubitState, b: &QubitState| -> Bloch {
            let (a, b) = (a.bloch(), b.bloch());
            std::array::from_fn(|k| q * a[k] + (1.0 - q) * b[k])
        };
        let pairs = [
            (mix(&self.sigma, &self.sigma_bar), rho_b),
            (mix(&self.tau, &self.tau_bar), rho_b),
            (mix(&self.sigma, &self.tau_bar), rho0),
            (mix(&self.tau, &self.sigma_bar), rho1),
        ];
        pairs
            .iter()
            .flat_map(|(lhs, rhs)| (0..3).map(move |k| (lhs[k] - rhs[k]).abs()))
            .fold(0.0, f64::max)
    }

    /// Bob's state given Alice wants to declare `wanted` and whether her
    /// measurement lets her do so.
    pub fn conditional_state(&self, wanted: u8, wins: bool) -> &QubitState {
        match (wanted, wins) {
            (0, true) => &self.sigma,
            (0, false) => &self.sigma_bar,
            (_, true) => &self.tau,
            (_, false) => &self.tau_bar,
        }
    }
}

/// Validates `(q, s_x, s_z)` and derives the four conditional states.
pub fn build_cheat_ensemble(point: CheatPoint, ps: &ProtocolStates, f: f64) -> Result<CheatSolution> {
    check_f(f)?;
    let mut violated = Vec::new();
    if !(0.0..=1.0).contains(&point.q) || !point.s_x.is_finite() || !point.s_z.is_finite() {
        violated.push(format!("0 <= q <= 1 (q = {})", point.q));
        return Err(Error::Infeasible { violated });
    }
    let blocks = point.blocks(ps, f);
    for (name, (w, v)) in BLOCK_NAMES.iter().zip(&blocks) {
        let excess = norm(v) - w;
        if excess > ENSEMBLE_TOL {
            violated.push(format!("{name} (excess {excess:.3e})"));
        }
    }
    if !violated.is_empty() {
        return Err(Error::Infeasible { violated });
    }

    let [sigma, sigma_bar, tau, tau_bar] = blocks.map(|(w, v)| normalize(w, v));
    let sol = CheatSolution {
        q: point.q,
        s_x: point.s_x,
        s_z: point.s_z,
        sigma,
        sigma_bar,
        tau,
        tau_bar,
        regime: None,
    };
    let residual = sol.mixture_residual(ps, f);
    if residual > ENSEMBLE_TOL {
        return Err(Error::Infeasible {
            violated: vec![format!("mixture identities (residual {residual:.3e})")],
        });
    }
    Ok(sol)
}

/// `block / weight`, pulled onto the Bloch sphere if rounding left it just
/// outside. A zero-weight outcome never occurs; its state is arbitrary.
fn normalize(weight: f64, v: Bloch) -> QubitState {
    if weight <= f64::EPSILON {
        return QubitState::maximally_mixed();
    }
    let mut r = v.map(|x| x / weight);
    let len = norm(&r);
    if len > 1.0 {
        r = r.map(|x| x / len);
    }
    QubitState::from_bloch_unchecked(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AliceOptimum {
    pub eps_a: f64,
    pub solution: CheatSolution,
}

/// Bias when the `sigma_bar`/`tau_bar` cones alone bind: `(1 - f sin theta) / 2`.
pub fn low_f_bias(f: f64, theta: f64) -> f64 {
    0.5 * (1.0 - f * theta.sin())
}

/// Bias when all four cones bind:
/// `sqrt(f^2 (1 - f^2) cos^2 theta / (1 - f^2 cos^2 theta)) / 2`.
pub fn high_f_bias(f: f64, theta: f64) -> f64 {
    let fa2 = (f * theta.cos()).powi(2);
    0.5 * (fa2 * (1.0 - f * f) / (1.0 - fa2)).sqrt()
}

/// Alice's optimal uncorrelated attack through a depolarizing channel.
pub fn optimal_alice_bias(f: f64, theta: f64) -> Result<AliceOptimum> {
    check_f(f)?;
    let ps = make_protocol_states(theta)?;
    let (fa, fb) = (f * ps.alpha, f * ps.beta);
    let (eps_a, point, regime) = if f <= f_star_of(&ps) {
        let eps = 0.5 * (1.0 - fb);
        let point = CheatPoint {
            q: 1.0 - 0.5 * fb,
            s_x: -0.5 * fb,
            s_z: fa,
        };
        (eps, point, Regime::LowF)
    } else {
        let eps = 0.5 * (fa * fa * (1.0 - f * f) / (1.0 - fa * fa)).sqrt();
        let q = 0.5 + eps;
        let point = CheatPoint {
            q,
            s_x: -0.5 * fb,
            s_z: 0.5 * fa + (2.0 * q - 1.0) / (2.0 * fa),
        };
        (eps, point, Regime::HighF)
    };
    let mut solution = build_cheat_ensemble(point, &ps, f)?;
    solution.regime = Some(regime);
    Ok(AliceOptimum { eps_a, solution })
}

/// Bob's optimal bias: Helstrom success minus one half.
pub fn optimal_bob_bias(theta: f64) -> Result<f64> {
    Ok(0.5 * make_protocol_states(theta)?.beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingleCoinBounds {
    pub eps_a: f64,
    pub eps_b: f64,
}

/// Noiseless single-coin biases: `(cos theta / 2, sin theta / 2)`.
pub fn noiseless_single_coin_bounds(theta: f64) -> Result<SingleCoinBounds> {
    let ps = make_protocol_states(theta)?;
    Ok(SingleCoinBounds {
        eps_a: 0.5 * ps.alpha,
        eps_b: 0.5 * ps.beta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSettings {
    pub grid: usize,
    pub refine: usize,
}

impl OracleSettings {
    pub fn validate(&self) -> Result<()> {
        if self.grid < 100 {
            return Err(Error::InvalidParameter {
                name: "grid",
                value: self.grid as f64,
                range: ">= 100",
            });
        }
        if self.refine < 2 {
            return Err(Error::InvalidParameter {
                name: "refine",
                value: self.refine as f64,
                range: ">= 2",
            });
        }
        Ok(())
    }
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self { grid: 200, refine: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleResult {
    pub q: f64,
    pub s_x: f64,
    pub s_z: f64,
    /// Grid pitch in `(q, s)` of the last refinement round.
    pub final_pitch: [f64; 2],
}

impl OracleResult {
    pub fn eps_a(&self) -> f64 {
        self.q - 0.5
    }

    pub fn point(&self) -> CheatPoint {
        CheatPoint {
            q: self.q,
            s_x: self.s_x,
            s_z: self.s_z,
        }
    }
}

/// Evenly spaced points `center + half * k / h` for `k in -h..=h`, kept
/// inside `[lo, hi]`. The center is always a grid point.
fn axis_points(center: f64, half: f64, steps: usize, lo: f64, hi: f64) -> Vec<f64> {
    let h = (steps / 2) as i64;
    (-h..=h)
        .map(|k| center + half * (k as f64 / h as f64))
        .filter(|v| (lo..=hi).contains(v))
        .collect()
}

/// Brute-force maximization of `q` over the four positivity cones.
///
/// Each round scans a `(q, s_x, s_z)` grid of `grid_steps` intervals per axis,
/// keeps the feasible point with the largest `q`, and then re-grids a box ten
/// times smaller around it. When the best point of a round lies on the edge
/// of its box, the box is re-centered there and scanned again first. The
/// scan starts from the honest point, which is feasible for every `f`. Ties are broken by closeness to that point (first
/// in `s_x`, then `s_z`), then by coordinate order, so the result does not
/// depend on how the scan is partitioned across threads.
pub fn oracle_alice_bias(f: f64, theta: f64, grid_steps: usize, refine_rounds: usize) -> Result<OracleResult> {
    check_f(f)?;
    let ps = make_protocol_states(theta)?;
    OracleSettings {
        grid: grid_steps,
        refine: refine_rounds,
    }
    .validate()?;
    let (fa, fb) = (f * ps.alpha, f * ps.beta);
    let anchor = CheatPoint::honest(&ps, f);
    let rank = |a: &CheatPoint, b: &CheatPoint| -> Ordering {
        a.q.total_cmp(&b.q)
            .then_with(|| (b.s_x - anchor.s_x).abs().total_cmp(&(a.s_x - anchor.s_x).abs()))
            .then_with(|| (b.s_z - anchor.s_z).abs().total_cmp(&(a.s_z - anchor.s_z).abs()))
            .then_with(|| b.s_x.total_cmp(&a.s_x))
            .then_with(|| b.s_z.total_cmp(&a.s_z))
    };
    let pick = |a: CheatPoint, b: CheatPoint| if rank(&a, &b) == Ordering::Less { b } else { a };

    let scan = |q_center: f64, q_half: f64, sx_center: f64, sz_center: f64, s_half: f64| {
        let qs = axis_points(q_center, q_half, grid_steps, 0.5, 1.0);
        let sxs = axis_points(sx_center, s_half, grid_steps, -1.0, 1.0);
        let szs = axis_points(sz_center, s_half, grid_steps, -1.0, 1.0);
        sxs.par_iter()
            .filter_map(|&sx| {
                let mut col_best: Option<CheatPoint> = None;
                for &sz in &szs {
                    let dz = fa - sz;
                    let need_q = (sz * sz + sx * sx).max(sz * sz + (fb + sx) * (fb + sx));
                    let need_1mq = (dz * dz + sx * sx).max(dz * dz + (fb + sx) * (fb + sx));
                    // Descending in q: the first feasible point is the column max,
                    // and once q^2 falls short it stays short.
                    for &q in qs.iter().rev() {
                        if q * q < need_q - ORACLE_FEAS_TOL {
                            break;
                        }
                        if (1.0 - q) * (1.0 - q) >= need_1mq - ORACLE_FEAS_TOL {
                            let p = CheatPoint { q, s_x: sx, s_z: sz };
                            col_best = Some(col_best.map_or(p, |c| pick(c, p)));
                            break;
                        }
                    }
                }
                col_best
            })
            .reduce_with(pick)
    };
    // True when `x` sits on an edge of `center +- half` that is not also an
    // edge of the search domain `[lo, hi]`.
    let on_inner_edge = |x: f64, center: f64, half: f64, lo: f64, hi: f64| {
        let slack = 0.5 * half / grid_steps as f64;
        (x >= center + half - slack && center + half < hi) || (x <= center - half + slack && center - half > lo)
    };

    let mut best = anchor;
    let (mut q_center, mut q_half) = (0.75, 0.25);
    let (mut sx_center, mut sz_center, mut s_half) = (0.0, 0.0, 1.0);
    let mut pitch = [0.0; 2];
    for _round in 0..=refine_rounds {
        pitch = [2.0 * q_half / grid_steps as f64, 2.0 * s_half / grid_steps as f64];
        // A maximum on the box edge means the optimum may lie outside; slide
        // the box onto it at the same size until the maximum is interior.
        for _slide in 0..MAX_SLIDES {
            let Some(p) = scan(q_center, q_half, sx_center, sz_center, s_half) else {
                break;
            };
            let improved = rank(&p, &best) == Ordering::Greater;
            best = pick(best, p);
            let edge = on_inner_edge(p.q, q_center, q_half, 0.5, 1.0)
                || on_inner_edge(p.s_x, sx_center, s_half, -1.0, 1.0)
                || on_inner_edge(p.s_z, sz_center, s_half, -1.0, 1.0);
            if !(improved && edge) {
                break;
            }
            q_center = best.q;
            sx_center = best.s_x;
            sz_center = best.s_z;
        }

        q_center = best.q;
        sx_center = best.s_x;
        sz_center = best.s_z;
        q_half /= 10.0;
        s_half /= 10.0;
    }

    let excess = best.positivity_excess(&ps, f);
    if excess.iter().any(|e| *e > ENSEMBLE_TOL) {
        return Err(Error::OracleInfeasible { f, theta });
    }
    Ok(OracleResult {
        q: best.q,
        s_x: best.s_x,
        s_z: best.s_z,
        final_pitch: pitch,
    })
}

/// Theory values for one `(f, theta)` point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasReport {
    pub theta: f64,
    pub f: f64,
    /// Fidelity deficit fed to the general bound.
    pub gamma: f64,
    #[serde(rename = "eps_A_closed")]
    pub eps_a_closed: f64,
    #[serde(rename = "eps_A_oracle")]
    pub eps_a_oracle: Option<f64>,
    #[serde(rename = "eps_A_theorem1")]
    pub eps_a_theorem1: f64,
    #[serde(rename = "eps_B")]
    pub eps_b: f64,
    pub f_star: f64,
    pub regime: Regime,
}

/// `gamma` defaults to the honest fidelity deficit `(1 - f) / 2`.
pub fn bias_report(f: f64, theta: f64, gamma: Option<f64>, oracle: Option<OracleSettings>) -> Result<BiasReport> {
    let theta = check_theta(theta)?;
    let gamma = gamma.unwrap_or((1.0 - f) / 2.0);
    let opt = optimal_alice_bias(f, theta)?;
    let eps_a_oracle = oracle
        .map(|o| oracle_alice_bias(f, theta, o.grid, o.refine).map(|r| r.eps_a()))
        .transpose()?;
    Ok(BiasReport {
        theta,
        f,
        gamma,
        eps_a_closed: opt.eps_a,
        eps_a_oracle,
        eps_a_theorem1: theorem1_bound(gamma, theta)?,
        eps_b: optimal_bob_bias(theta)?,
        f_star: f_star(theta)?,
        regime: opt.solution.regime.expect("closed form sets the regime"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

    #[test]
    fn theorem1_examples() {
        assert_eq!(theorem1_bound(0.0, FRAC_PI_4).unwrap(), 0.0);
        assert!((theorem1_bound(0.005, FRAC_PI_2).unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(theorem1_bound(0.05, FRAC_PI_4).unwrap(), 0.5);
        assert!(theorem1_bound(-0.1, FRAC_PI_4).is_err());
    }

    #[test]
    fn f_star_examples() {
        assert_eq!(f_star(FRAC_PI_2).unwrap(), 1.0);
        assert!((f_star(FRAC_PI_4).unwrap() - 0.8740).abs() < 1e-4);
        // Same value as the unrationalized form away from pi/2.
        for k in 1..40 {
            let theta = FRAC_PI_2 * k as f64 / 40.0;
            let (s, c) = theta.sin_cos();
            let raw = ((1.0 + 3.0 * c * c).sqrt() - s) / (2.0 * c * c);
            let fs = f_star(theta).unwrap();
            assert!((fs - raw).abs() < 1e-9, "theta {theta}");
            assert!(fs > 0.75 && fs <= 1.0);
        }
        assert!(f_star(1e-6).unwrap() <= 1.0);
    }

    #[test]
    fn alice_examples() {
        for theta in [0.3, FRAC_PI_4, FRAC_PI_2] {
            assert_eq!(optimal_alice_bias(0.0, theta).unwrap().eps_a, 0.5);
            assert!(optimal_alice_bias(1.0, theta).unwrap().eps_a.abs() < 1e-15);
        }
        let low = optimal_alice_bias(0.5, FRAC_PI_4).unwrap();
        assert_eq!(low.solution.regime, Some(Regime::LowF));
        assert!((low.eps_a - 0.32322).abs() < 1e-5);
        let high = optimal_alice_bias(0.9, FRAC_PI_4).unwrap();
        assert_eq!(high.solution.regime, Some(Regime::HighF));
        assert!((high.eps_a - 0.17981).abs() < 1e-5);
        assert!((high.solution.q - 0.5 - high.eps_a).abs() < 1e-15);
    }

    #[test]
    fn f_one_ensemble_is_the_signal_states() {
        let ps = make_protocol_states(FRAC_PI_3).unwrap();
        let sol = optimal_alice_bias(1.0, FRAC_PI_3).unwrap().solution;
        assert!((sol.q - 0.5).abs() < 1e-15);
        for (a, b) in [(sol.sigma, ps.phi0), (sol.tau, ps.phi1), (sol.tau_bar, ps.phi0), (sol.sigma_bar, ps.phi1)] {
            assert!(crate::qstate::trace_distance(&a, &b) < 1e-12);
        }
    }

    #[test]
    fn honest_point_reproduces_channel_outputs() {
        let f = 0.8;
        let ps = make_protocol_states(0.6).unwrap();
        let sol = build_cheat_ensemble(CheatPoint::honest(&ps, f), &ps, f).unwrap();
        let ch = DepolarizingChannel::new(f).unwrap();
        for (a, b) in [
            (sol.sigma, ch.apply(&ps.phi0)),
            (sol.tau_bar, ch.apply(&ps.phi0)),
            (sol.sigma_bar, ch.apply(&ps.phi1)),
            (sol.tau, ch.apply(&ps.phi1)),
        ] {
            assert!(crate::qstate::trace_distance(&a, &b) < 1e-12);
        }
        assert!(sol.mixture_residual(&ps, f) < 1e-15);
    }

    #[test]
    fn infeasible_points_name_the_broken_cone() {
        let ps = make_protocol_states(FRAC_PI_4).unwrap();
        let err = build_cheat_ensemble(CheatPoint { q: 0.9, s_x: -0.3, s_z: 0.6 }, &ps, 0.9).unwrap_err();
        match err {
            Error::Infeasible { violated } => {
                assert!(violated.iter().any(|v| v.starts_with("sigma_bar")), "{violated:?}");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(build_cheat_ensemble(CheatPoint { q: 1.5, s_x: 0.0, s_z: 0.0 }, &ps, 0.5).is_err());
    }

    #[test]
    fn bob_and_noiseless_examples() {
        assert_eq!(optimal_bob_bias(FRAC_PI_2).unwrap(), 0.5);
        assert!((optimal_bob_bias(FRAC_PI_4).unwrap() - 0.35355).abs() < 1e-5);
        assert!(optimal_bob_bias(1e-12).unwrap() < 1e-11);
        let b = noiseless_single_coin_bounds(FRAC_PI_2).unwrap();
        assert_eq!((b.eps_a, b.eps_b), (0.0, 0.5));
        let b = noiseless_single_coin_bounds(FRAC_PI_4).unwrap();
        assert!((b.eps_a - b.eps_b).abs() < 1e-15 && (b.eps_a - 0.35355).abs() < 1e-5);
        assert!((noiseless_single_coin_bounds(FRAC_PI_3).unwrap().eps_a - 0.25).abs() < 1e-15);
    }

    #[test]
    fn oracle_examples() {
        let r = oracle_alice_bias(0.0, FRAC_PI_4, 200, 3).unwrap();
        assert!((r.q - 1.0).abs() < 1e-3);
        let r = oracle_alice_bias(0.5, FRAC_PI_4, 200, 3).unwrap();
        assert!((r.q - 0.82322).abs() < 1e-3, "{r:?}");
        let r = oracle_alice_bias(0.9, FRAC_PI_4, 200, 3).unwrap();
        assert!((r.q - 0.67981).abs() < 1e-3, "{r:?}");
        let ps = make_protocol_states(FRAC_PI_4).unwrap();
        let sol = build_cheat_ensemble(r.point(), &ps, 0.9).unwrap();
        assert!(sol.mixture_residual(&ps, 0.9) <= ENSEMBLE_TOL);
        for s in [sol.sigma, sol.sigma_bar, sol.tau, sol.tau_bar] {
            assert!(s.radius() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn oracle_rejects_coarse_grids() {
        assert!(oracle_alice_bias(0.5, FRAC_PI_4, 10, 3).is_err());
        assert!(oracle_alice_bias(0.5, FRAC_PI_4, 200, 1).is_err());
    }

    #[test]
    fn oracle_at_f_one_returns_honest_point() {
        let r = oracle_alice_bias(1.0, FRAC_PI_3, 100, 2).unwrap();
        assert_eq!(r.q, 0.5);
    }
}
