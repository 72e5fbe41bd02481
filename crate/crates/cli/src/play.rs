//! Interactive game in the terminal: the human moves first, the engine replies.

use std::io::{BufRead, Write};

use tag_core::game::{BestMove, Basis, Outcome};
use tag_core::{initial_state, Natural, Rational, Solver};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Finish {
    HumanWon,
    EngineWon,
    Quit,
}

pub fn play<R: BufRead, W: Write>(
    alpha: &Rational,
    pile: &Natural,
    mut input: R,
    mut out: W,
) -> Result<Finish, CliError> {
    let mut solver = Solver::new(alpha)?;
    let mut state = initial_state(alpha, pile);
    writeln!(out, "alpha = {alpha}, {pile} stones. You move first.")?;
    match solver.classify(&state).outcome {
        Outcome::N => writeln!(out, "This is an N position: you can force a win.")?,
        Outcome::P => writeln!(
            out,
            "Warning: this is a P position; the engine wins with correct play."
        )?,
    }
    loop {
        if state.is_terminal() {
            writeln!(out, "You cannot move. The engine wins.")?;
            return Ok(Finish::EngineWon);
        }
        write!(
            out,
            "{} stones, take 1..={} (h for hint, q to quit)> ",
            state.pile,
            state.legal_max()
        )?;
        out.flush()?;
        let mut line = String::new();
        if input.read_line(&mut line)? == 0 {
            writeln!(out)?;
            return Ok(Finish::Quit);
        }
        let line = line.trim();
        if line.eq_ignore_ascii_case("q") {
            return Ok(Finish::Quit);
        }
        if line.eq_ignore_ascii_case("h") {
            let parts = solver.zeckendorf(&state.pile)?.parts;
            let parts: Vec<String> = parts.iter().map(ToString::to_string).collect();
            match solver.best_move(&state) {
                BestMove::Winning { take, .. } => writeln!(
                    out,
                    "hint: {} = {}; take {take}",
                    state.pile,
                    parts.join(" + ")
                )?,
                BestMove::Resign { .. } => writeln!(
                    out,
                    "hint: {} = {}; losing position, take 1 to stall",
                    state.pile,
                    parts.join(" + ")
                )?,
            }
            continue;
        }
        let take: Natural = match line.parse() {
            Ok(t) if state.is_legal(&t) => t,
            _ => {
                writeln!(
                    out,
                    "illegal move {line:?}: enter a number from 1 to {}",
                    state.legal_max()
                )?;
                continue;
            }
        };
        state = state.apply(&take)?;
        if state.is_terminal() {
            writeln!(out, "You took {take}. The engine cannot move. You win.")?;
            return Ok(Finish::HumanWon);
        }
        let best = solver.best_move(&state);
        let note = match &best {
            BestMove::Winning { basis: Basis::TheoryDerived, .. } => " (theory-derived)",
            BestMove::Resign { .. } => " (stalling)",
            _ => "",
        };
        let reply = best.take().cloned().unwrap_or_else(|| Natural::from(1u32));
        state = state.apply(&reply)?;
        writeln!(out, "Engine takes {reply}{note}.")?;
    }
}
