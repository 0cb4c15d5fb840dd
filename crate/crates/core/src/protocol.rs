//! The single-coin and n-bit string protocols, with pluggable honest and
//! cheating parties.
//!
//! Per round: Alice picks `b` and sends `phi_b` through the channel, Bob
//! answers with `b'`, Alice reveals `b`, Bob measures, and the round's output
//! is `x = b xor b'`. In the single-coin protocol Bob checks immediately in a
//! basis containing `phi_b`; in the string protocol he measures a random Pauli
//! axis each round and decides whether to abort from tomography at the end.
//!
//! Cheating Alice is simulated through her conditional states: her
//! measurement outcome is drawn before Bob measures. Both measurements act on
//! different subsystems, so the joint statistics are unchanged.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::adversary::{build_cheat_ensemble, optimal_alice_bias, CheatPoint, CheatSolution};
use crate::error::{check_f, check_gamma, check_theta, Error, Result};
use crate::qstate::{
    dot, helstrom_success, make_protocol_states, measure, unambiguous_discrimination, Bloch, DepolarizingChannel,
    Discrimination, Helstrom, MeasurementBasis, Outcome, PauliAxis, ProtocolStates, QubitState, Unambiguous,
};
use crate::rng::SeedStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub theta: f64,
    pub f: f64,
    /// Abort threshold deficit; `None` selects [`default_gamma`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub n: usize,
}

impl ProtocolParams {
    pub fn new(theta: f64, f: f64, gamma: Option<f64>, n: usize) -> Result<Self> {
        let mut p = Self { theta, f, gamma, n };
        p.validate()?;
        p.theta = check_theta(theta)?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_theta(self.theta)?;
        check_f(self.f)?;
        if let Some(g) = self.gamma {
            check_gamma(g)?;
        }
        if self.n == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                value: 0.0,
                range: ">= 1",
            });
        }
        Ok(())
    }

    pub fn gamma(&self) -> f64 {
        self.gamma.unwrap_or_else(|| default_gamma(self.f, self.n))
    }
}

/// Honest fidelity deficit `(1 - f)/2` plus `4 sqrt(3/n)`, roughly four
/// standard errors of the tomographic fidelity estimate.
pub fn default_gamma(f_expected: f64, n: usize) -> f64 {
    ((1.0 - f_expected) / 2.0 + 4.0 * (3.0 / n as f64).sqrt()).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Alice,
    Bob,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Alice => "alice",
            Role::Bob => "bob",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategyKind {
    Honest,
    /// Alice: the `|chi>` attack for a single coin, the optimal conditional
    /// ensemble for bit strings.
    CheatOptimal,
    /// Alice: a caller-chosen ensemble point.
    CheatCustom(CheatPoint),
    /// Bob: minimum-error discrimination on the noiseless signal state.
    CheatHelstrom,
    /// Bob: unambiguous discrimination; a random `b'` when inconclusive.
    CheatUnambiguous,
}

impl StrategyKind {
    pub fn is_honest(&self) -> bool {
        matches!(self, StrategyKind::Honest)
    }

    fn allowed_for(&self, role: Role) -> bool {
        match self {
            StrategyKind::Honest => true,
            StrategyKind::CheatOptimal | StrategyKind::CheatCustom(_) => role == Role::Alice,
            StrategyKind::CheatHelstrom | StrategyKind::CheatUnambiguous => role == Role::Bob,
        }
    }
}

/// A bit pattern repeated cyclically to the string length: `"0"` is all
/// zeros, `"01"` alternates, an n-character pattern is used verbatim.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitPattern(Vec<u8>);

impl BitPattern {
    pub fn zeros() -> Self {
        Self(vec![0])
    }

    pub fn bit(&self, i: usize) -> u8 {
        self.0[i % self.0.len()]
    }

    pub fn expand(&self, n: usize) -> Vec<u8> {
        (0..n).map(|i| self.bit(i)).collect()
    }
}

impl std::str::FromStr for BitPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Config(format!("target pattern may only contain 0/1, found {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        if bits.is_empty() {
            return Err(Error::Config("target pattern is empty".into()));
        }
        Ok(Self(bits))
    }
}

impl fmt::Display for BitPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_bits(f, &self.0)
    }
}

fn write_bits(f: &mut fmt::Formatter<'_>, bits: &[u8]) -> fmt::Result {
    let s: String = bits.iter().map(|b| if *b == 0 { '0' } else { '1' }).collect();
    f.write_str(&s)
}

impl Serialize for BitPattern {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitPattern {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// One party's behaviour; the role comes from which slot it fills.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartyStrategy {
    #[serde(flatten)]
    pub kind: StrategyKind,
    /// The outcome string a cheater steers toward.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<BitPattern>,
}

impl PartyStrategy {
    pub fn honest() -> Self {
        Self::new(StrategyKind::Honest)
    }

    pub fn new(kind: StrategyKind) -> Self {
        Self { kind, target: None }
    }

    pub fn with_target(mut self, target: BitPattern) -> Self {
        self.target = Some(target);
        self
    }
}

/// Per-round record. `basis`/`outcome` are `None` when Bob did not perform a
/// projective measurement (cheating Bob's discrimination POVM); the
/// depolarizing model never yields a lost-photon outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub b: u8,
    pub b_prime: u8,
    pub basis: Option<MeasurementBasis>,
    pub outcome: Option<i8>,
    pub x: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoinResult {
    Bit(u8),
    Abort,
}

impl Serialize for CoinResult {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            CoinResult::Bit(b) => s.serialize_u8(*b),
            CoinResult::Abort => s.serialize_str("ABORT"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleCoin {
    pub round: RoundRecord,
    pub result: CoinResult,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StringResult {
    Bits(Vec<u8>),
    Abort,
}

impl StringResult {
    pub fn bits(&self) -> Option<&[u8]> {
        match self {
            StringResult::Bits(b) => Some(b),
            StringResult::Abort => None,
        }
    }
}

struct BitsDisplay<'a>(&'a [u8]);

impl fmt::Display for BitsDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_bits(f, self.0)
    }
}

impl Serialize for StringResult {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            StringResult::Bits(b) => s.collect_str(&BitsDisplay(b)),
            StringResult::Abort => s.serialize_str("ABORT"),
        }
    }
}

/// One execution of the string protocol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transcript {
    pub params: ProtocolParams,
    /// Empty when rounds were not retained.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rounds: Vec<RoundRecord>,
    pub result: StringResult,
    /// Honest Bob's final test; `None` when Bob cheats or had too little data.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check: Option<AbortDecision>,
}

/// Outcome tallies per (declared bit, Pauli axis).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TomographyCounts {
    pub shots: [[u64; 3]; 2],
    pub plus: [[u64; 3]; 2],
}

impl TomographyCounts {
    pub fn add(&mut self, bit: u8, axis: PauliAxis, outcome: Outcome) {
        let (b, k) = (bit as usize, axis.index());
        self.shots[b][k] += 1;
        if outcome == Outcome::Plus {
            self.plus[b][k] += 1;
        }
    }

    pub fn merge(&mut self, other: &TomographyCounts) {
        for b in 0..2 {
            for k in 0..3 {
                self.shots[b][k] += other.shots[b][k];
                self.plus[b][k] += other.plus[b][k];
            }
        }
    }
}

/// Linear-inversion estimates of the average states Bob received for each
/// declared bit. Not projected onto the Bloch ball: fidelity is linear in the
/// state, so the raw estimate keeps it unbiased.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TomographyEstimate {
    pub rho0_hat: Bloch,
    pub rho1_hat: Bloch,
    pub counts: TomographyCounts,
}

impl TomographyEstimate {
    pub fn for_bit(&self, bit: u8) -> &Bloch {
        if bit == 0 {
            &self.rho0_hat
        } else {
            &self.rho1_hat
        }
    }
}

impl TomographyCounts {
    pub fn estimate(&self) -> Result<TomographyEstimate> {
        let mut hat = [[0.0; 3]; 2];
        for (b, row) in hat.iter_mut().enumerate() {
            for axis in PauliAxis::ALL {
                let k = axis.index();
                let shots = self.shots[b][k];
                if shots == 0 {
                    return Err(Error::InsufficientData {
                        bit: b as u8,
                        axis: axis.label(),
                    });
                }
                let plus = self.plus[b][k] as f64;
                row[k] = (2.0 * plus - shots as f64) / shots as f64;
            }
        }
        Ok(TomographyEstimate {
            rho0_hat: hat[0],
            rho1_hat: hat[1],
            counts: *self,
        })
    }
}

/// Estimates from recorded rounds; rounds without a Pauli measurement are skipped.
pub fn tomography_estimate(records: &[RoundRecord]) -> Result<TomographyEstimate> {
    let mut counts = TomographyCounts::default();
    for r in records {
        let (Some(basis), Some(outcome)) = (r.basis, r.outcome) else {
            continue;
        };
        let Some(axis) = basis.pauli() else { continue };
        let outcome = if outcome > 0 { Outcome::Plus } else { Outcome::Minus };
        counts.add(r.b, axis, outcome);
    }
    counts.estimate()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbortDecision {
    pub abort: bool,
    pub fid0: f64,
    pub fid1: f64,
}

/// Aborts when either estimated fidelity `(1 + r_hat . r_phi) / 2` is below `1 - gamma`.
pub fn abort_decision(est: &TomographyEstimate, ps: &ProtocolStates, gamma: f64) -> AbortDecision {
    let fid = |bit: u8| 0.5 * (1.0 + dot(est.for_bit(bit), &ps.state(bit).bloch()));
    let (fid0, fid1) = (fid(0), fid(1));
    let threshold = 1.0 - gamma;
    AbortDecision {
        abort: fid0 < threshold || fid1 < threshold,
        fid0,
        fid1,
    }
}

#[derive(Debug, Clone)]
enum AliceMode {
    Honest,
    Optimal(CheatSolution),
    Custom(CheatSolution),
}

#[derive(Debug, Clone)]
enum BobMode {
    Honest,
    Helstrom(Helstrom),
    Unambiguous(Unambiguous),
}

/// How honest Bob measures each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BobCheck {
    /// Single coin: the basis containing the declared state; abort on `-1`.
    Declared,
    /// String protocol: a uniformly random Pauli axis, recorded for tomography.
    RandomPauli,
}

/// A validated pairing of parties, ready to run.
#[derive(Debug, Clone)]
pub struct Session {
    params: ProtocolParams,
    gamma: f64,
    states: ProtocolStates,
    channel: DepolarizingChannel,
    chi: QubitState,
    alice: AliceMode,
    bob: BobMode,
    target: BitPattern,
}

impl Session {
    pub fn new(params: ProtocolParams, alice: &PartyStrategy, bob: &PartyStrategy) -> Result<Self> {
        params.validate()?;
        for (role, s) in [(Role::Alice, alice), (Role::Bob, bob)] {
            if !s.kind.allowed_for(role) {
                return Err(Error::InvalidStrategy(format!("{:?} is not a {role} strategy", s.kind)));
            }
        }
        if !alice.kind.is_honest() && !bob.kind.is_honest() {
            return Err(Error::InvalidStrategy("at most one party may deviate from the protocol".into()));
        }
        let states = make_protocol_states(params.theta)?;
        let alice_mode = match alice.kind {
            StrategyKind::CheatOptimal => AliceMode::Optimal(optimal_alice_bias(params.f, params.theta)?.solution),
            StrategyKind::CheatCustom(p) => AliceMode::Custom(build_cheat_ensemble(p, &states, params.f)?),
            _ => AliceMode::Honest,
        };
        let bob_mode = match bob.kind {
            StrategyKind::CheatHelstrom => BobMode::Helstrom(helstrom_success(&states)),
            StrategyKind::CheatUnambiguous => BobMode::Unambiguous(unambiguous_discrimination(&states)),
            _ => BobMode::Honest,
        };
        let target = if !bob.kind.is_honest() {
            bob.target.clone()
        } else {
            alice.target.clone().or_else(|| bob.target.clone())
        }
        .unwrap_or_else(BitPattern::zeros);
        Ok(Self {
            params,
            gamma: params.gamma(),
            states,
            channel: DepolarizingChannel::new(params.f)?,
            // Equal overlap cos^2(theta/2) with both signal states.
            chi: QubitState::from_bloch([0.0, 0.0, 1.0])?,
            alice: alice_mode,
            bob: bob_mode,
            target,
        })
    }

    pub fn params(&self) -> &ProtocolParams {
        &self.params
    }

    pub fn states(&self) -> &ProtocolStates {
        &self.states
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// The string `c` the cheater aims for (all zeros when nobody cheats).
    pub fn target(&self) -> &BitPattern {
        &self.target
    }

    pub fn bob_is_honest(&self) -> bool {
        matches!(self.bob, BobMode::Honest)
    }

    /// The optimal or custom ensemble, when Alice cheats with one.
    pub fn alice_ensemble(&self) -> Option<&CheatSolution> {
        match &self.alice {
            AliceMode::Honest => None,
            AliceMode::Optimal(s) | AliceMode::Custom(s) => Some(s),
        }
    }

    fn random_bit<R: Rng + ?Sized>(rng: &mut R) -> u8 {
        rng.random::<bool>() as u8
    }

    /// One round. Returns the record and whether Bob's immediate check failed.
    fn play_round<R: Rng + ?Sized>(&self, c: u8, check: BobCheck, rng: &mut R) -> (RoundRecord, bool) {
        // Alice commits to her quantum state and, if honest, to b.
        let honest_b = match self.alice {
            AliceMode::Honest => Some(Self::random_bit(rng)),
            _ => None,
        };
        let sent = honest_b.map(|b| {
            let pure = self.states.state(b);
            // A cheating Bob swaps in a noiseless channel.
            if self.bob_is_honest() {
                self.channel.apply(&pure)
            } else {
                pure
            }
        });

        // Bob answers with b'.
        let b_prime = match (&self.bob, sent) {
            (BobMode::Helstrom(h), Some(state)) => h.guess(&state, rng) ^ c,
            (BobMode::Unambiguous(u), Some(state)) => match u.sample(&state, rng) {
                Discrimination::Conclusive(g) => g ^ c,
                Discrimination::Inconclusive => Self::random_bit(rng),
            },
            _ => Self::random_bit(rng),
        };

        // Alice reveals b; a cheater decides only now what Bob holds.
        let (b, received) = match (&self.alice, honest_b, sent) {
            (AliceMode::Honest, Some(b), Some(state)) => (b, state),
            (AliceMode::Optimal(_), _, _) if check == BobCheck::Declared => (c ^ b_prime, self.chi),
            (AliceMode::Optimal(sol) | AliceMode::Custom(sol), _, _) => {
                let wanted = c ^ b_prime;
                let wins = rng.random::<f64>() < sol.q;
                let declared = if wins { wanted } else { 1 - wanted };
                (declared, *sol.conditional_state(wanted, wins))
            }
            _ => unreachable!("honest Alice always sends a state"),
        };

        let x = b ^ b_prime;
        if !self.bob_is_honest() {
            let record = RoundRecord {
                b,
                b_prime,
                basis: None,
                outcome: None,
                x,
            };
            return (record, false);
        }
        let basis = match check {
            BobCheck::Declared => {
                MeasurementBasis::containing(&self.states.state(b)).expect("signal states are pure")
            }
            BobCheck::RandomPauli => PauliAxis::ALL[rng.random_range(0..3)].basis(),
        };
        let outcome = measure(&received, &basis, rng);
        let failed = check == BobCheck::Declared && outcome == Outcome::Minus;
        let record = RoundRecord {
            b,
            b_prime,
            basis: Some(basis),
            outcome: Some(outcome.value()),
            x,
        };
        (record, failed)
    }

    pub fn run_single_coin<R: Rng + ?Sized>(&self, rng: &mut R) -> SingleCoin {
        let (round, failed) = self.play_round(self.target.bit(0), BobCheck::Declared, rng);
        let result = if failed { CoinResult::Abort } else { CoinResult::Bit(round.x) };
        SingleCoin { round, result }
    }

    /// Runs all `n` rounds of the string protocol. Round `i` draws from
    /// `stream.round_rng(i)`. When `keep_rounds` is false only the result and
    /// Bob's test are kept.
    pub fn run_bitstring(&self, stream: &SeedStream, keep_rounds: bool) -> Transcript {
        let n = self.params.n;
        let mut rounds = Vec::with_capacity(if keep_rounds { n } else { 0 });
        let mut bits = Vec::with_capacity(n);
        let mut counts = TomographyCounts::default();
        for i in 0..n {
            let mut rng = stream.round_rng(i as u64);
            let (record, _) = self.play_round(self.target.bit(i), BobCheck::RandomPauli, &mut rng);
            if let (Some(basis), Some(outcome)) = (record.basis, record.outcome) {
                let axis = basis.pauli().expect("honest Bob measures Pauli axes");
                counts.add(record.b, axis, if outcome > 0 { Outcome::Plus } else { Outcome::Minus });
            }
            bits.push(record.x);
            if keep_rounds {
                rounds.push(record);
            }
        }

        let check = if self.bob_is_honest() {
            // Without data for every cell Bob cannot certify Alice and aborts.
            Some(match counts.estimate() {
                Ok(est) => abort_decision(&est, &self.states, self.gamma),
                Err(_) => AbortDecision {
                    abort: true,
                    fid0: f64::NAN,
                    fid1: f64::NAN,
                },
            })
        } else {
            None
        };
        let aborted = check.is_some_and(|c| c.abort);
        Transcript {
            params: self.params,
            rounds,
            result: if aborted { StringResult::Abort } else { StringResult::Bits(bits) },
            check,
        }
    }
}

pub fn run_single_coin<R: Rng + ?Sized>(
    params: ProtocolParams,
    alice: &PartyStrategy,
    bob: &PartyStrategy,
    rng: &mut R,
) -> Result<SingleCoin> {
    Ok(Session::new(params, alice, bob)?.run_single_coin(rng))
}

pub fn run_bitstring(
    params: ProtocolParams,
    alice: &PartyStrategy,
    bob: &PartyStrategy,
    stream: &SeedStream,
) -> Result<Transcript> {
    Ok(Session::new(params, alice, bob)?.run_bitstring(stream, true))
}

/// Streaming tally of `x_i = c_i` matches over many transcripts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiasTally {
    matches: Vec<u64>,
    completed: u64,
    total: u64,
}

impl BiasTally {
    pub fn new(n: usize) -> Self {
        Self {
            matches: vec![0; n],
            completed: 0,
            total: 0,
        }
    }

    pub fn add(&mut self, result: &StringResult, target: &[u8]) {
        self.total += 1;
        if let Some(bits) = result.bits() {
            self.completed += 1;
            for ((m, x), c) in self.matches.iter_mut().zip(bits).zip(target) {
                *m += (x == c) as u64;
            }
        }
    }

    pub fn merge(mut self, other: &BiasTally) -> Self {
        for (a, b) in self.matches.iter_mut().zip(&other.matches) {
            *a += b;
        }
        self.completed += other.completed;
        self.total += other.total;
        self
    }

    pub fn completed(&self) -> u64 {
        self.completed
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn estimate(&self) -> Result<BiasEstimate> {
        if self.completed == 0 {
            return Err(Error::AllAborted);
        }
        let n = self.matches.len() as f64;
        let hits: u64 = self.matches.iter().sum();
        let p = hits as f64 / (n * self.completed as f64);
        let se = (p * (1.0 - p) / (n * self.completed as f64)).sqrt();
        let worst_bit = self
            .matches
            .iter()
            .map(|&m| (m as f64 / self.completed as f64 - 0.5).abs())
            .fold(0.0, f64::max);
        let p_uncond = hits as f64 / (n * self.total as f64);
        Ok(BiasEstimate {
            bias: p - 0.5,
            se,
            worst_bit,
            unconditional_bias: p_uncond - 0.5,
            unconditional_se: (p_uncond * (1.0 - p_uncond) / (n * self.total as f64)).sqrt(),
            completed: self.completed,
            total: self.total,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasEstimate {
    /// `(1/n) sum_i freq(x_i = c_i) - 1/2` over completed transcripts.
    pub bias: f64,
    pub se: f64,
    /// `max_i |freq(x_i = c_i) - 1/2|`.
    pub worst_bit: f64,
    /// Same average with aborted transcripts counted as misses.
    pub unconditional_bias: f64,
    pub unconditional_se: f64,
    pub completed: u64,
    pub total: u64,
}

/// Average bias toward `c` over the completed transcripts.
pub fn average_bias(transcripts: &[Transcript], c: &[u8]) -> Result<BiasEstimate> {
    let mut tally = BiasTally::new(c.len());
    for t in transcripts {
        tally.add(&t.result, c);
    }
    tally.estimate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

    fn params(theta: f64, f: f64, gamma: Option<f64>, n: usize) -> ProtocolParams {
        ProtocolParams::new(theta, f, gamma, n).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(ProtocolParams::new(FRAC_PI_4, 0.9, None, 0).is_err());
        assert!(ProtocolParams::new(0.0, 0.9, None, 10).is_err());
        assert!(ProtocolParams::new(FRAC_PI_4, 1.1, None, 10).is_err());
        assert!(ProtocolParams::new(FRAC_PI_4, 0.9, Some(-0.1), 10).is_err());
        let p = params(FRAC_PI_4, 0.9, None, 100_000);
        assert!((p.gamma() - (0.05 + 4.0 * (3e-5f64).sqrt())).abs() < 1e-15);
        assert_eq!(params(FRAC_PI_4, 0.9, Some(0.06), 10).gamma(), 0.06);
    }

    #[test]
    fn strategies_must_fit_their_role() {
        let p = params(FRAC_PI_4, 0.9, None, 10);
        let h = PartyStrategy::honest();
        let helstrom = PartyStrategy::new(StrategyKind::CheatHelstrom);
        let optimal = PartyStrategy::new(StrategyKind::CheatOptimal);
        assert!(Session::new(p, &helstrom, &h).is_err());
        assert!(Session::new(p, &h, &optimal).is_err());
        assert!(Session::new(p, &optimal, &helstrom).is_err());
        assert!(Session::new(p, &optimal, &h).is_ok());
        let bad = PartyStrategy::new(StrategyKind::CheatCustom(CheatPoint { q: 0.99, s_x: 0.0, s_z: 0.0 }));
        assert!(matches!(Session::new(p, &bad, &h), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn pattern_parsing() {
        let p: BitPattern = "01".parse().unwrap();
        assert_eq!(p.expand(5), vec![0, 1, 0, 1, 0]);
        assert_eq!(p.to_string(), "01");
        assert!("".parse::<BitPattern>().is_err());
        assert!("012".parse::<BitPattern>().is_err());
    }

    #[test]
    fn xor_holds_every_round() {
        let p = params(FRAC_PI_3, 0.8, None, 2_000);
        let h = PartyStrategy::honest();
        for (a, b) in [
            (h.clone(), h.clone()),
            (PartyStrategy::new(StrategyKind::CheatOptimal), h.clone()),
            (h.clone(), PartyStrategy::new(StrategyKind::CheatHelstrom)),
            (h.clone(), PartyStrategy::new(StrategyKind::CheatUnambiguous)),
        ] {
            let t = run_bitstring(p, &a, &b, &SeedStream::new(5, 0)).unwrap();
            assert_eq!(t.rounds.len(), 2_000);
            assert!(t.rounds.iter().all(|r| r.x == r.b ^ r.b_prime));
            if let Some(bits) = t.result.bits() {
                assert!(t.rounds.iter().zip(bits).all(|(r, x)| r.x == *x));
            }
        }
    }

    #[test]
    fn tomography_examples() {
        let z = PauliAxis::Z.basis();
        let mut records = Vec::new();
        let push = |records: &mut Vec<RoundRecord>, b: u8, axis: PauliAxis, outcome: i8| {
            records.push(RoundRecord {
                b,
                b_prime: 0,
                basis: Some(axis.basis()),
                outcome: Some(outcome),
                x: b,
            })
        };
        for _ in 0..10 {
            push(&mut records, 0, PauliAxis::Z, 1);
            push(&mut records, 0, PauliAxis::X, 1);
            push(&mut records, 0, PauliAxis::X, -1);
            push(&mut records, 0, PauliAxis::Y, 1);
            push(&mut records, 0, PauliAxis::Y, -1);
        }
        // bit 1 has no data yet
        assert!(matches!(
            tomography_estimate(&records),
            Err(Error::InsufficientData { bit: 1, .. })
        ));
        for axis in PauliAxis::ALL {
            push(&mut records, 1, axis, -1);
        }
        let est = tomography_estimate(&records).unwrap();
        assert_eq!(est.rho0_hat, [0.0, 0.0, 1.0]);
        assert_eq!(est.rho1_hat, [-1.0, -1.0, -1.0]);
        assert_eq!(est.counts.shots[0][z.pauli().unwrap().index()], 10);
    }

    #[test]
    fn tomography_of_noisy_signal_state() {
        let ps = make_protocol_states(FRAC_PI_4).unwrap();
        let state = DepolarizingChannel::new(0.9).unwrap().apply(&ps.phi0);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut counts = TomographyCounts::default();
        for i in 0..1_000_000 {
            let axis = PauliAxis::ALL[i % 3];
            counts.add(0, axis, measure(&state, &axis.basis(), &mut rng));
            counts.add(1, axis, Outcome::Plus);
        }
        let est = counts.estimate().unwrap();
        let expect = [-0.6364, 0.0, 0.6364];
        for (got, want) in est.rho0_hat.iter().zip(expect) {
            assert!((got - want).abs() < 0.01, "{:?}", est.rho0_hat);
        }
    }

    #[test]
    fn abort_threshold_examples() {
        let ps = make_protocol_states(FRAC_PI_4).unwrap();
        let exact = TomographyEstimate {
            rho0_hat: ps.phi0.bloch(),
            rho1_hat: ps.phi1.bloch(),
            counts: TomographyCounts::default(),
        };
        let d = abort_decision(&exact, &ps, 0.0);
        assert!(!d.abort && (d.fid0 - 1.0).abs() < 1e-15);

        let shrunk = TomographyEstimate {
            rho0_hat: ps.phi0.bloch().map(|v| 0.9 * v),
            rho1_hat: ps.phi1.bloch(),
            counts: TomographyCounts::default(),
        };
        let d = abort_decision(&shrunk, &ps, 0.06);
        assert!(!d.abort && (d.fid0 - 0.95).abs() < 1e-12);
        assert!(abort_decision(&shrunk, &ps, 0.04).abort);
    }

    #[test]
    fn honest_noiseless_string_never_aborts_on_orthogonal_states() {
        // phi_b along -/+x: every fidelity-relevant outcome is deterministic.
        let p = params(FRAC_PI_2, 1.0, Some(0.01), 10_000);
        let h = PartyStrategy::honest();
        let session = Session::new(p, &h, &h).unwrap();
        for run in 0..20 {
            let t = session.run_bitstring(&SeedStream::new(1, run), false);
            let check = t.check.unwrap();
            assert!(!check.abort && check.fid0 == 1.0 && check.fid1 == 1.0);
        }
    }

    #[test]
    fn average_bias_examples() {
        let p = params(FRAC_PI_4, 1.0, None, 8);
        let c = vec![0, 1, 1, 0, 0, 0, 1, 1];
        let all_match = Transcript {
            params: p,
            rounds: vec![],
            result: StringResult::Bits(c.clone()),
            check: None,
        };
        let aborted = Transcript {
            result: StringResult::Abort,
            ..all_match.clone()
        };
        let est = average_bias(&[all_match.clone(), aborted.clone()], &c).unwrap();
        assert_eq!(est.bias, 0.5);
        assert_eq!(est.unconditional_bias, 0.0);
        assert_eq!(est.worst_bit, 0.5);
        assert!(matches!(average_bias(&[aborted], &c), Err(Error::AllAborted)));
    }

    #[test]
    fn single_coin_chi_attack() {
        let p = params(FRAC_PI_3, 1.0, None, 1);
        let alice = PartyStrategy::new(StrategyKind::CheatOptimal).with_target("1".parse().unwrap());
        let session = Session::new(p, &alice, &PartyStrategy::honest()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let trials = 200_000;
        let wins = (0..trials)
            .filter(|_| session.run_single_coin(&mut rng).result == CoinResult::Bit(1))
            .count() as f64;
        let se = (0.75 * 0.25 / trials as f64).sqrt();
        assert!((wins / trials as f64 - 0.75).abs() < 4.0 * se);
    }

    #[test]
    fn cheat_alice_wins_with_probability_q() {
        let p = params(FRAC_PI_4, 0.9, None, 50_000);
        let alice = PartyStrategy::new(StrategyKind::CheatOptimal).with_target("10".parse().unwrap());
        let session = Session::new(p, &alice, &PartyStrategy::honest()).unwrap();
        let q = session.alice_ensemble().unwrap().q;
        let t = session.run_bitstring(&SeedStream::new(17, 0), false);
        let check = t.check.unwrap();
        assert!(!check.abort, "{check:?}");
        let est = average_bias(&[t], &session.target().expand(50_000)).unwrap();
        assert!((est.bias - (q - 0.5)).abs() < 4.0 * est.se, "{est:?}");
        // Bob's estimated fidelities match what honest Alice would produce.
        assert!((check.fid0 - 0.95).abs() < 0.02 && (check.fid1 - 0.95).abs() < 0.02);
    }
}
