use num_traits::ToPrimitive;
use proptest::prelude::*;
use tag_core::game::{
    engine_wins_against_all, losing_piles_by_oracle, playout, BestMove, GameState, Outcome,
    Player, Solver,
};
use tag_core::{generate, initial_state, Horizon, Natural, Rational};

const SAMPLES: [(i64, i64); 9] = [
    (1, 1),
    (3, 2),
    (2, 1),
    (5, 2),
    (3, 1),
    (7, 2),
    (11, 3),
    (4, 1),
    (9, 2),
];

fn r(p: i64, q: i64) -> Rational {
    Rational::new(p, q).unwrap()
}

fn nat(n: u64) -> Natural {
    Natural::from(n)
}

/// Plain memoized game-tree search, independent of the solver's table.
fn reference_is_n(alpha: &Rational, pile: u64, cap: u64, memo: &mut Vec<Vec<Option<bool>>>) -> bool {
    let cap = cap.min(pile);
    if let Some(known) = memo[pile as usize][cap as usize] {
        return known;
    }
    let wins = (1..=cap).any(|m| {
        let next_cap = tag_core::floor_scale(alpha, &nat(m)).to_u64().unwrap();
        !reference_is_n(alpha, pile - m, next_cap, memo)
    });
    memo[pile as usize][cap as usize] = Some(wins);
    wins
}

#[test]
fn table_matches_plain_search() {
    for (p, q) in SAMPLES {
        let alpha = r(p, q);
        let n = 120u64;
        let mut memo = (0..=n).map(|p| vec![None; p as usize + 1]).collect();
        let mut solver = Solver::new(&alpha).unwrap();
        for pile in 0..=n {
            for cap in 0..=pile {
                let expected = reference_is_n(&alpha, pile, cap, &mut memo);
                let got = solver.oracle_outcome(pile as usize, cap as usize) == Outcome::N;
                assert_eq!(got, expected, "alpha {alpha}, ({pile}, {cap})");
            }
        }
    }
}

#[test]
fn oracle_agrees_with_sequence() {
    for (p, q) in SAMPLES {
        let alpha = r(p, q);
        let oracle = losing_piles_by_oracle(&alpha, 300).unwrap();
        let seq = generate(&alpha, Horizon::MaxValue(nat(300))).unwrap();
        assert_eq!(oracle, seq.terms(), "alpha {alpha}");
    }
}

#[test]
fn mid_game_rule_matches_oracle() {
    for (p, q) in SAMPLES {
        let alpha = r(p, q);
        let mut solver = Solver::new(&alpha).unwrap();
        for pile in 1..=300u64 {
            for cap in 0..=pile {
                let state = GameState::new(&alpha, nat(pile), nat(cap));
                let oracle = solver.oracle_outcome(pile as usize, cap as usize);
                assert_eq!(
                    solver.rule_outcome(&state),
                    oracle,
                    "alpha {alpha}, ({pile}, {cap})"
                );
            }
        }
    }
}

#[test]
fn best_move_always_reaches_p() {
    for (p, q) in SAMPLES {
        let alpha = r(p, q);
        let mut solver = Solver::new(&alpha).unwrap();
        for pile in 1..=200u64 {
            for cap in 1..=pile {
                let state = GameState::new(&alpha, nat(pile), nat(cap));
                match solver.best_move(&state) {
                    BestMove::Winning { take, .. } => {
                        let next = state.apply(&take).unwrap();
                        assert_eq!(solver.classify(&next).outcome, Outcome::P);
                    }
                    BestMove::Resign { stall } => {
                        assert_eq!(solver.classify(&state).outcome, Outcome::P);
                        assert_eq!(stall, Some(nat(1)));
                    }
                }
            }
        }
    }
}

#[test]
fn strategy_survives_every_adversary_for_two() {
    let alpha = r(2, 1);
    let fib: Vec<u64> = vec![1, 2, 3, 5, 8, 13, 21, 34, 55];
    let mut solver = Solver::new(&alpha).unwrap();
    for n in 2..=60u64 {
        let start = initial_state(&alpha, &nat(n));
        let engine_first = !fib.contains(&n);
        assert!(
            engine_wins_against_all(&mut solver, &start, engine_first),
            "n {n}"
        );
    }
}

#[test]
fn playouts_between_engines_follow_the_sequence() {
    for (p, q) in SAMPLES {
        let alpha = r(p, q);
        let losing = losing_piles_by_oracle(&alpha, 150).unwrap();
        let mut a = Solver::new(&alpha).unwrap();
        let mut b = Solver::new(&alpha).unwrap();
        for n in 0..=150u64 {
            let t = playout(&alpha, &nat(n), &mut a, &mut b).unwrap();
            let expected = if losing.contains(&nat(n)) {
                Player::Second
            } else {
                Player::First
            };
            assert_eq!(t.winner, Some(expected), "alpha {alpha}, n {n}");
        }
    }
}

#[test]
fn large_piles_are_flagged() {
    let alpha = r(7, 2);
    let mut engine = Solver::with_limit(&alpha, 100).unwrap();
    let mut other = Solver::with_limit(&alpha, 100).unwrap();
    let t = playout(&alpha, &nat(5000), &mut engine, &mut other).unwrap();
    assert!(t.plies[0].theory_derived);
    assert!(t.plies.iter().any(|p| !p.theory_derived));
    let first_wins = !generate(&alpha, Horizon::MaxValue(nat(5000)))
        .unwrap()
        .terms()
        .contains(&nat(5000));
    assert_eq!(t.winner == Some(Player::First), first_wins);
}

#[test]
fn oracle_limit_is_enforced() {
    assert!(losing_piles_by_oracle(&r(2, 1), 2000).is_ok());
    assert!(losing_piles_by_oracle(&r(2, 1), 2001).is_err());
}

fn alpha_strategy() -> impl Strategy<Value = Rational> {
    (1i64..60, 1i64..10)
        .prop_filter("alpha >= 1", |(p, q)| p >= q)
        .prop_map(|(p, q)| r(p, q))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_playouts_respect_caps(alpha in alpha_strategy(), n in 0u64..400, seed in any::<u64>()) {
        let mut engine = Solver::new(&alpha).unwrap();
        let mut state = seed;
        let mut random = move |s: &GameState| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let max = s.legal_max().to_u64().unwrap();
            nat(1 + (state >> 33) % max)
        };
        let t = playout(&alpha, &nat(n), &mut engine, &mut random).unwrap();
        let mut pile = nat(n);
        let mut cap = if n == 0 { nat(0) } else { nat(n - 1) };
        for ply in &t.plies {
            prop_assert_eq!(&ply.pile_before, &pile);
            prop_assert_eq!(&ply.cap_before, &cap);
            prop_assert!(ply.take >= nat(1) && ply.take <= cap.clone().min(pile.clone()));
            pile -= &ply.take;
            cap = tag_core::floor_scale(&alpha, &ply.take);
        }
        prop_assert!(pile == nat(0) || cap == nat(0));
        let last_mover = t.plies.last().map(|p| p.player).unwrap_or(Player::Second);
        prop_assert_eq!(t.winner, Some(last_mover));
        let mut solver = Solver::new(&alpha).unwrap();
        let first_is_n = solver.classify(&initial_state(&alpha, &nat(n))).outcome == Outcome::N;
        if first_is_n {
            prop_assert_eq!(t.winner, Some(Player::First));
        }
    }
}
