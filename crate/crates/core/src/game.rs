//! The game itself: positions, exact N/P classification by a game-tree table,
//! the Zeckendorf winning strategy, and playouts between move sources.
//!
//! A position is the pile size together with the cap on the next removal.
//! Taking `m` stones leaves `pile - m` and hands the opponent a cap of
//! `floor(alpha * m)`. A player with no legal move loses.
//!
//! The oracle is a table over `(pile, min(cap, pile))`. Row `p` is filled in
//! increasing cap order using `N(p, c) = N(p, c - 1) or P(p - c, floor(alpha c))`,
//! so the whole table up to pile `n` costs `O(n^2)`.
//!
//! Past the table limit the engine uses the rule "a position is N iff the
//! smallest Zeckendorf part of the pile does not exceed the cap". The rule is
//! checked against the table in the tests; answers that depend on it are
//! marked [`Basis::TheoryDerived`].

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Result, TagError};
use crate::numerics::{floor_scale, Natural, Rational};
use crate::sequence::{PSequence, Zeckendorf};

/// Largest pile the game-tree table is built for by default.
pub const DEFAULT_ORACLE_LIMIT: usize = 2000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GameState {
    #[serde(with = "crate::numerics::decimal")]
    pub pile: Natural,
    /// Most stones the player to move may take.
    #[serde(with = "crate::numerics::decimal")]
    pub cap: Natural,
    pub alpha: Rational,
}

/// The opening position: `n` stones with a cap of `n - 1`.
pub fn initial_state(alpha: &Rational, n: &Natural) -> GameState {
    let cap = if n.is_zero() {
        Natural::zero()
    } else {
        n - 1u32
    };
    GameState {
        pile: n.clone(),
        cap,
        alpha: alpha.clone(),
    }
}

impl GameState {
    pub fn new(alpha: &Rational, pile: Natural, cap: Natural) -> Self {
        GameState {
            pile,
            cap,
            alpha: alpha.clone(),
        }
    }

    /// `min(cap, pile)`; legal moves are `1 ..= legal_max`.
    pub fn legal_max(&self) -> Natural {
        self.cap.clone().min(self.pile.clone())
    }

    pub fn is_terminal(&self) -> bool {
        self.pile.is_zero() || self.cap.is_zero()
    }

    pub fn is_legal(&self, take: &Natural) -> bool {
        !take.is_zero() && *take <= self.legal_max()
    }

    /// The position after removing `take` stones.
    pub fn apply(&self, take: &Natural) -> Result<GameState> {
        if !self.is_legal(take) {
            return Err(TagError::IllegalMove {
                take: take.to_string(),
                legal_max: self.legal_max().to_string(),
            });
        }
        Ok(GameState {
            pile: &self.pile - take,
            cap: floor_scale(&self.alpha, take),
            alpha: self.alpha.clone(),
        })
    }
}

impl fmt::Display for GameState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stones, take up to {}", self.pile, self.legal_max())
    }
}

/// Outcome class of a position for the player about to move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    /// The player to move wins.
    N,
    /// The player to move loses.
    P,
}

/// Where a classification or move came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Oracle,
    TheoryDerived,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub outcome: Outcome,
    pub basis: Basis,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BestMove {
    /// A move to a P position.
    Winning {
        #[serde(with = "crate::numerics::decimal")]
        take: Natural,
        basis: Basis,
    },
    /// The mover is in a P position. `stall` is the move of 1 when any move
    /// is legal; it leaves the opponent the smallest possible cap.
    Resign {
        #[serde(with = "option_decimal")]
        stall: Option<Natural>,
    },
}

impl BestMove {
    /// The move to actually play, if any.
    pub fn take(&self) -> Option<&Natural> {
        match self {
            BestMove::Winning { take, .. } => Some(take),
            BestMove::Resign { stall } => stall.as_ref(),
        }
    }
}

mod option_decimal {
    use crate::numerics::Natural;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Natural>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(n) => s.serialize_some(&n.to_str_radix(10)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Natural>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|t| t.parse().map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// Per-session solver: owns its table and its copy of the losing sequence.
#[derive(Clone, Debug)]
pub struct Solver {
    alpha: Rational,
    limit: usize,
    /// `caps[m] = floor(alpha * m)`, clipped to `limit`.
    caps: Vec<usize>,
    /// `wins[p][c]`: the position `(p, c)` with `c <= p` is N.
    wins: Vec<Vec<bool>>,
    seq: PSequence,
}

impl Solver {
    pub fn new(alpha: &Rational) -> Result<Self> {
        Self::with_limit(alpha, DEFAULT_ORACLE_LIMIT)
    }

    pub fn with_limit(alpha: &Rational, limit: usize) -> Result<Self> {
        let seq = PSequence::new(alpha)?;
        let caps = (0..=limit)
            .map(|m| {
                floor_scale(alpha, &Natural::from(m))
                    .to_usize()
                    .map_or(limit, |c| c.min(limit))
            })
            .collect();
        Ok(Solver {
            alpha: alpha.clone(),
            limit,
            caps,
            wins: vec![vec![false]],
            seq,
        })
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    fn build_rows(&mut self, pile: usize) {
        while self.wins.len() <= pile {
            let p = self.wins.len();
            let mut row = Vec::with_capacity(p + 1);
            row.push(false);
            for c in 1..=p {
                let rest = p - c;
                let reply_cap = self.caps[c].min(rest);
                let wins = row[c - 1] || !self.wins[rest][reply_cap];
                row.push(wins);
            }
            self.wins.push(row);
        }
    }

    /// Table lookup for a pile within the limit.
    pub fn oracle_outcome(&mut self, pile: usize, cap: usize) -> Outcome {
        assert!(pile <= self.limit, "pile {pile} beyond oracle limit");
        self.build_rows(pile);
        if self.wins[pile][cap.min(pile)] {
            Outcome::N
        } else {
            Outcome::P
        }
    }

    pub fn zeckendorf(&mut self, n: &Natural) -> Result<Zeckendorf> {
        self.seq.zeckendorf(n)
    }

    /// The Zeckendorf rule: N iff the smallest part of the pile fits under the cap.
    pub fn rule_outcome(&mut self, state: &GameState) -> Outcome {
        if state.is_terminal() {
            return Outcome::P;
        }
        let z = self.seq.zeckendorf(&state.pile).expect("pile is positive");
        if *z.smallest_part() <= state.cap {
            Outcome::N
        } else {
            Outcome::P
        }
    }

    fn small(&self, state: &GameState) -> Option<(usize, usize)> {
        let pile = state.pile.to_usize().filter(|&p| p <= self.limit)?;
        let cap = state.legal_max().to_usize()?;
        Some((pile, cap))
    }

    pub fn classify(&mut self, state: &GameState) -> Classification {
        match self.small(state) {
            Some((pile, cap)) => Classification {
                outcome: self.oracle_outcome(pile, cap),
                basis: Basis::Oracle,
            },
            None => Classification {
                outcome: self.rule_outcome(state),
                basis: Basis::TheoryDerived,
            },
        }
    }

    /// A winning move from an N position, or a resignation hint from a P one.
    pub fn best_move(&mut self, state: &GameState) -> BestMove {
        let class = self.classify(state);
        if class.outcome == Outcome::P {
            let stall = (!state.is_terminal()).then(Natural::one);
            return BestMove::Resign { stall };
        }
        let z = self
            .seq
            .zeckendorf(&state.pile)
            .expect("N positions have stones")
            .smallest_part()
            .clone();
        match self.small(state) {
            None => BestMove::Winning {
                take: z,
                basis: Basis::TheoryDerived,
            },
            Some((pile, cap)) => {
                let leaves_p = |solver: &mut Self, m: usize| {
                    solver.oracle_outcome(pile - m, solver.caps[m].min(pile - m)) == Outcome::P
                };
                let fast = z.to_usize().filter(|&m| m <= cap && leaves_p(self, m));
                let take = fast
                    .or_else(|| (1..=cap).find(|&m| leaves_p(self, m)))
                    .expect("an N position has a move to a P position");
                BestMove::Winning {
                    take: Natural::from(take),
                    basis: Basis::Oracle,
                }
            }
        }
    }
}

/// `{ n <= max_n : the opening position with n stones is P }`.
pub fn losing_piles_by_oracle(alpha: &Rational, max_n: u64) -> Result<Vec<Natural>> {
    if max_n > DEFAULT_ORACLE_LIMIT as u64 {
        return Err(TagError::OracleLimit {
            requested: max_n,
            limit: DEFAULT_ORACLE_LIMIT as u64,
        });
    }
    let mut solver = Solver::with_limit(alpha, max_n as usize)?;
    Ok((0..=max_n)
        .map(Natural::from)
        .filter(|n| solver.classify(&initial_state(alpha, n)).outcome == Outcome::P)
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Player {
    First,
    Second,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::First => Player::Second,
            Player::Second => Player::First,
        }
    }
}

/// A move chosen by a [`MoveSource`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Choice {
    pub take: Natural,
    pub theory_derived: bool,
}

pub trait MoveSource {
    /// Called only for positions with at least one legal move.
    fn choose(&mut self, state: &GameState) -> Choice;
}

impl<F: FnMut(&GameState) -> Natural> MoveSource for F {
    fn choose(&mut self, state: &GameState) -> Choice {
        Choice {
            take: self(state),
            theory_derived: false,
        }
    }
}

impl MoveSource for Solver {
    fn choose(&mut self, state: &GameState) -> Choice {
        match self.best_move(state) {
            BestMove::Winning { take, basis } => Choice {
                take,
                theory_derived: basis == Basis::TheoryDerived,
            },
            BestMove::Resign { stall } => Choice {
                take: stall.unwrap_or_else(Natural::one),
                theory_derived: false,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ply {
    pub player: Player,
    #[serde(with = "crate::numerics::decimal")]
    pub pile_before: Natural,
    #[serde(with = "crate::numerics::decimal")]
    pub cap_before: Natural,
    #[serde(with = "crate::numerics::decimal")]
    pub take: Natural,
    pub theory_derived: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub alpha: Rational,
    #[serde(with = "crate::numerics::decimal")]
    pub initial_pile: Natural,
    pub plies: Vec<Ply>,
    /// `None` only in a transcript cut short by an illegal move.
    pub winner: Option<Player>,
}

#[derive(Debug, Error)]
#[error("{player:?} made an illegal move: took {take} with legal range 1..={legal_max}")]
pub struct IllegalPly {
    pub player: Player,
    pub take: Natural,
    pub legal_max: Natural,
    /// Everything played before the illegal move.
    pub transcript: Transcript,
}

/// Plays `first` against `second` from the opening position with `n` stones.
pub fn playout(
    alpha: &Rational,
    n: &Natural,
    first: &mut dyn MoveSource,
    second: &mut dyn MoveSource,
) -> std::result::Result<Transcript, Box<IllegalPly>> {
    let mut state = initial_state(alpha, n);
    let mut transcript = Transcript {
        alpha: alpha.clone(),
        initial_pile: n.clone(),
        plies: Vec::new(),
        winner: None,
    };
    let mut mover = Player::First;
    while !state.is_terminal() {
        let source: &mut dyn MoveSource = match mover {
            Player::First => first,
            Player::Second => second,
        };
        let choice = source.choose(&state);
        let next = match state.apply(&choice.take) {
            Ok(next) => next,
            Err(_) => {
                return Err(Box::new(IllegalPly {
                    player: mover,
                    take: choice.take,
                    legal_max: state.legal_max(),
                    transcript,
                }))
            }
        };
        transcript.plies.push(Ply {
            player: mover,
            pile_before: state.pile.clone(),
            cap_before: state.cap.clone(),
            take: choice.take,
            theory_derived: choice.theory_derived,
        });
        state = next;
        mover = mover.other();
    }
    transcript.winner = Some(mover.other());
    Ok(transcript)
}

/// Whether the engine wins every line from `state` when it plays
/// [`Solver::best_move`] and the adversary tries every legal move.
/// Shared subtrees are visited once.
pub fn engine_wins_against_all(solver: &mut Solver, state: &GameState, engine_to_move: bool) -> bool {
    let mut memo = HashMap::new();
    engine_wins(solver, state, engine_to_move, &mut memo)
}

fn engine_wins(
    solver: &mut Solver,
    state: &GameState,
    engine_to_move: bool,
    memo: &mut HashMap<(Natural, Natural, bool), bool>,
) -> bool {
    if state.is_terminal() {
        return !engine_to_move;
    }
    let key = (state.pile.clone(), state.legal_max(), engine_to_move);
    if let Some(&known) = memo.get(&key) {
        return known;
    }
    let result = if engine_to_move {
        match solver.best_move(state) {
            BestMove::Winning { take, .. } => {
                let next = state.apply(&take).expect("engine moves are legal");
                engine_wins(solver, &next, false, memo)
            }
            BestMove::Resign { .. } => false,
        }
    } else {
        let max = state.legal_max().to_u64().expect("exhaustive search needs small piles");
        (1..=max).all(|m| {
            let next = state.apply(&Natural::from(m)).expect("in legal range");
            engine_wins(solver, &next, true, memo)
        })
    };
    memo.insert(key, result);
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p, q).unwrap()
    }

    fn nat(n: u64) -> Natural {
        Natural::from(n)
    }

    fn state(alpha: Rational, pile: u64, cap: u64) -> GameState {
        GameState::new(&alpha, nat(pile), nat(cap))
    }

    #[test]
    fn classify_examples() {
        let mut s = Solver::new(&r(2, 1)).unwrap();
        assert_eq!(s.classify(&state(r(2, 1), 0, 5)).outcome, Outcome::P);
        assert_eq!(s.classify(&state(r(2, 1), 10, 9)).outcome, Outcome::N);
        assert_eq!(s.classify(&state(r(2, 1), 13, 12)).outcome, Outcome::P);
        assert_eq!(s.classify(&state(r(2, 1), 7, 0)).outcome, Outcome::P);
    }

    #[test]
    fn initial_state_examples() {
        let s = initial_state(&r(2, 1), &nat(5));
        assert_eq!((s.pile, s.cap), (nat(5), nat(4)));
        let s = initial_state(&r(2, 1), &nat(1));
        assert_eq!((s.pile.clone(), s.cap.clone()), (nat(1), nat(0)));
        assert!(s.is_terminal());
        let s = initial_state(&r(3, 1), &nat(0));
        assert_eq!((s.pile, s.cap), (nat(0), nat(0)));
    }

    #[test]
    fn oracle_losing_piles() {
        let as_u64 = |v: Vec<Natural>| -> Vec<u64> { v.iter().map(|n| n.try_into().unwrap()).collect() };
        assert_eq!(
            as_u64(losing_piles_by_oracle(&r(2, 1), 21).unwrap()),
            [0, 1, 2, 3, 5, 8, 13, 21]
        );
        assert_eq!(
            as_u64(losing_piles_by_oracle(&r(3, 2), 16).unwrap()),
            [0, 1, 2, 4, 8, 16]
        );
        assert_eq!(
            as_u64(losing_piles_by_oracle(&r(7, 2), 21).unwrap()),
            [0, 1, 2, 3, 4, 6, 8, 11, 15, 21]
        );
        assert!(matches!(
            losing_piles_by_oracle(&r(2, 1), 5000),
            Err(TagError::OracleLimit { .. })
        ));
    }

    #[test]
    fn best_move_examples() {
        let mut s = Solver::new(&r(2, 1)).unwrap();
        assert_eq!(
            s.best_move(&state(r(2, 1), 10, 9)),
            BestMove::Winning {
                take: nat(2),
                basis: Basis::Oracle
            }
        );
        assert_eq!(
            s.best_move(&state(r(2, 1), 13, 12)),
            BestMove::Resign { stall: Some(nat(1)) }
        );
        let mut s3 = Solver::new(&r(3, 1)).unwrap();
        assert_eq!(
            s3.best_move(&state(r(3, 1), 21, 20)),
            BestMove::Resign { stall: Some(nat(1)) }
        );
        assert_eq!(
            s.best_move(&state(r(2, 1), 1, 0)),
            BestMove::Resign { stall: None }
        );
    }

    #[test]
    fn large_piles_use_the_rule() {
        let mut s = Solver::with_limit(&r(2, 1), 50).unwrap();
        // 10946 is a Fibonacci number; 10946 + 8 is not.
        let big = state(r(2, 1), 10954, 10953);
        assert_eq!(
            s.classify(&big),
            Classification {
                outcome: Outcome::N,
                basis: Basis::TheoryDerived
            }
        );
        assert_eq!(
            s.best_move(&big),
            BestMove::Winning {
                take: nat(8),
                basis: Basis::TheoryDerived
            }
        );
        assert_eq!(s.classify(&state(r(2, 1), 10946, 10945)).outcome, Outcome::P);
    }

    #[test]
    fn apply_rejects_illegal_moves() {
        let s = state(r(2, 1), 8, 4);
        assert!(s.apply(&nat(5)).is_err());
        assert!(s.apply(&nat(0)).is_err());
        let next = s.apply(&nat(3)).unwrap();
        assert_eq!((next.pile, next.cap), (nat(5), nat(6)));
    }

    #[test]
    fn playout_examples() {
        let alpha = r(2, 1);
        let mut a = Solver::new(&alpha).unwrap();
        let mut b = Solver::new(&alpha).unwrap();
        let t = playout(&alpha, &nat(13), &mut a, &mut b).unwrap();
        assert_eq!(t.winner, Some(Player::Second));

        let t = playout(&alpha, &nat(1), &mut a, &mut b).unwrap();
        assert!(t.plies.is_empty());
        assert_eq!(t.winner, Some(Player::Second));

        let t = playout(&alpha, &nat(10), &mut a, &mut |_: &GameState| nat(1)).unwrap();
        assert_eq!(t.winner, Some(Player::First));
    }

    #[test]
    fn playout_reports_illegal_moves() {
        let alpha = r(2, 1);
        let mut engine = Solver::new(&alpha).unwrap();
        let mut greedy = |s: &GameState| s.pile.clone();
        let err = playout(&alpha, &nat(10), &mut engine, &mut greedy).unwrap_err();
        assert_eq!(err.player, Player::Second);
        assert_eq!(err.transcript.plies.len(), 1);
        assert_eq!(err.legal_max, nat(4));
    }

    #[test]
    fn exhaustive_adversary_small() {
        let alpha = r(2, 1);
        let mut s = Solver::new(&alpha).unwrap();
        assert!(engine_wins_against_all(&mut s, &initial_state(&alpha, &nat(10)), true));
        assert!(engine_wins_against_all(&mut s, &initial_state(&alpha, &nat(13)), false));
        assert!(!engine_wins_against_all(&mut s, &initial_state(&alpha, &nat(13)), true));
    }
}
