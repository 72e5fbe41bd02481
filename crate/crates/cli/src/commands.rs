//! Subcommand bodies. Each builds an [`OutputDocument`] from library calls and
//! leaves printing to the caller.

use std::fmt::Write as _;

use serde_json::{json, Value};
use tag_core::cache::CutoffCache;
use tag_core::cutoffs::{
    enumerate_cutoffs_cached, enumerate_intervals, gamma_table, half_integer_survey,
    oscillation_diagnostic, verify_fractional_cutoffs, verify_integer_cutoffs, GammaRow,
};
use tag_core::sequence::degree_bounds;
use tag_core::{
    dominant_root, generate, stable_interval, Horizon, Natural, PSequence, Rational, Solver,
    StableInterval, TagError,
};

use crate::output::{Kind, OutputDocument};
use crate::CliError;

fn strings<T: ToString>(items: &[T]) -> Vec<String> {
    items.iter().map(ToString::to_string).collect()
}

pub fn sequence(alpha: &Rational, horizon: Horizon) -> Result<OutputDocument, CliError> {
    let seq = generate(alpha, horizon.clone())?;
    let payload = json!({
        "count": seq.len(),
        "terms": strings(seq.terms()),
    });
    Ok(OutputDocument::new(
        Kind::Sequence,
        Some(alpha),
        Some(serde_json::to_value(&horizon)?),
        payload,
    ))
}

/// Plain text: terms separated by commas.
pub fn sequence_text(doc: &OutputDocument) -> String {
    let terms: Vec<&str> = doc.payload["terms"]
        .as_array()
        .map(|a| a.iter().filter_map(Value::as_str).collect())
        .unwrap_or_default();
    format!("{}\n", terms.join(","))
}

pub fn sequence_csv(doc: &OutputDocument) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["index", "term"])?;
    if let Some(terms) = doc.payload["terms"].as_array() {
        for (i, t) in terms.iter().enumerate() {
            w.write_record([i.to_string().as_str(), t.as_str().unwrap_or_default()])?;
        }
    }
    csv_string(w)
}

fn csv_string(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn windows(alpha: &Rational, indices: &[usize]) -> Result<OutputDocument, CliError> {
    let mut seq = PSequence::new(alpha)?;
    let mut rows = Vec::new();
    for &i in indices {
        let w = seq.window(i)?;
        rows.push(json!({
            "index": i,
            "term": seq.terms()[i].to_string(),
            "member_indices": w.member_indices.clone().collect::<Vec<_>>(),
            "members": strings(&w.values(&seq)),
        }));
    }
    Ok(OutputDocument::new(
        Kind::Windows,
        Some(alpha),
        None,
        json!({ "windows": rows }),
    ))
}

pub fn zeckendorf(alpha: &Rational, n: &Natural) -> Result<OutputDocument, CliError> {
    let mut seq = PSequence::new(alpha)?;
    let z = seq.zeckendorf(n)?;
    let payload = json!({
        "n": n.to_string(),
        "parts": strings(&z.parts),
        "part_indices": z.part_indices,
        "smallest_part": z.smallest_part().to_string(),
        "gap_condition": z.satisfies_gap(alpha),
    });
    Ok(OutputDocument::new(Kind::Zeckendorf, Some(alpha), None, payload))
}

pub fn classify(
    alpha: &Rational,
    pile: &Natural,
    cap: Option<&Natural>,
) -> Result<OutputDocument, CliError> {
    let mut solver = Solver::new(alpha)?;
    let state = match cap {
        Some(cap) => tag_core::GameState::new(alpha, pile.clone(), cap.clone()),
        None => tag_core::initial_state(alpha, pile),
    };
    let class = solver.classify(&state);
    let parts = if *pile == Natural::from(0u32) {
        Vec::new()
    } else {
        strings(&solver.zeckendorf(pile)?.parts)
    };
    let payload = json!({
        "pile": state.pile.to_string(),
        "cap": state.cap.to_string(),
        "legal_max": state.legal_max().to_string(),
        "outcome": class.outcome,
        "basis": class.basis,
        "best_move": solver.best_move(&state),
        "zeckendorf_parts": parts,
    });
    Ok(OutputDocument::new(Kind::Classify, Some(alpha), None, payload))
}

pub fn s_sequence(alpha: &Rational, count: usize) -> Result<OutputDocument, CliError> {
    let mut seq = PSequence::new(alpha)?;
    let s = seq.s_sequence(count);
    let payload = json!({
        "nondecreasing": s.is_nondecreasing(),
        "values": s.values,
    });
    Ok(OutputDocument::new(
        Kind::SSequence,
        Some(alpha),
        Some(json!({ "terms": count })),
        payload,
    ))
}

/// Cutoffs in `[from, to]`. The intervals computed along the way are returned
/// so the caller can store them.
pub fn cutoffs(
    from: &Rational,
    to: &Rational,
    cache: Option<&CutoffCache>,
) -> Result<(OutputDocument, Vec<StableInterval>), CliError> {
    let census = enumerate_cutoffs_cached(from, to, cache)?;
    let intervals = enumerate_intervals(to, cache)?;
    let payload = json!({
        "from": census.from,
        "to": census.bound,
        "gamma": census.gamma,
        "count": census.cutoffs.len(),
        "cutoffs": census.cutoffs,
    });
    let doc = OutputDocument::new(
        Kind::Cutoffs,
        None,
        Some(json!({ "from": from, "to": to })),
        payload,
    );
    Ok((doc, intervals))
}

pub fn gamma(
    start: &Rational,
    step: &Rational,
    upto: &Rational,
    cache: Option<&CutoffCache>,
) -> Result<(Vec<GammaRow>, Vec<StableInterval>), CliError> {
    if upto < start {
        return Err(CliError::Usage(format!(
            "--upto {upto} is below the first row {start}"
        )));
    }
    Ok(gamma_table(start, step, upto, cache)?)
}

pub fn gamma_document(rows: &[GammaRow], upto: &Rational) -> OutputDocument {
    let rows: Vec<Value> = rows
        .iter()
        .map(|row| {
            json!({
                "n": row.n,
                "gamma": row.gamma,
                "ratio": row.ratio,
            })
        })
        .collect();
    OutputDocument::new(
        Kind::Gamma,
        None,
        Some(json!({ "upto": upto })),
        json!({ "rows": rows }),
    )
}

/// `n,gamma,ratio` with `n` as an exact decimal where one exists and the
/// ratio rounded to twelve places.
pub fn gamma_csv(rows: &[GammaRow]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "gamma", "ratio"])?;
    for row in rows {
        w.write_record([
            decimal(&row.n),
            row.gamma.to_string(),
            format!("{:.12}", row.ratio.to_f64()),
        ])?;
    }
    csv_string(w)
}

/// Exact decimal form of `r` when its denominator has no prime factors other
/// than 2 and 5; `p/q` otherwise.
pub fn decimal(r: &Rational) -> String {
    let ten = Rational::from(10u64);
    let mut scaled = r.clone();
    let mut places = 0usize;
    while !scaled.is_integer() {
        if places == 40 {
            return r.to_string();
        }
        scaled = &scaled * &ten;
        places += 1;
    }
    let digits = scaled.floor().magnitude().to_string();
    if places == 0 {
        return scaled.floor().to_string();
    }
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (whole, frac) = padded.split_at(padded.len() - places);
    let sign = if r.is_negative() { "-" } else { "" };
    format!("{sign}{whole}.{frac}")
}

pub fn diagnostics(alpha: &Rational, count: usize) -> Result<OutputDocument, CliError> {
    let interval = stable_interval(alpha)?;
    let mut seq = PSequence::new(alpha)?;
    let recurrence = seq.certified_recurrence()?;
    let bounds = degree_bounds(alpha);
    let root = dominant_root(recurrence.degree);
    let osc = oscillation_diagnostic(alpha, count)?;
    let payload = json!({
        "stable_interval": interval,
        "recurrence": recurrence,
        "degree_bounds": {
            "lower": bounds.lower,
            "upper": bounds.upper,
            "contains_degree": bounds.contains(recurrence.degree),
        },
        "dominant_root": root,
        "oscillation": {
            "terms": osc.signs.len(),
            "sign_changes": osc.sign_changes,
            "limit": osc.limit,
            "min_q": osc.min_q,
            "min_q_index": osc.min_q_index,
            "min_below_limit": osc.min_below_limit,
            "min_above_alpha": osc.min_above_alpha,
        },
    });
    Ok(OutputDocument::new(
        Kind::Diagnostics,
        Some(alpha),
        Some(json!({ "terms": count })),
        payload,
    ))
}

pub struct VerifyOptions {
    pub integers: u64,
    pub fractional_n: u64,
    pub multiples: u64,
    pub half_limit: Rational,
}

/// Runs the integer, fractional and half-integer suites.
/// Returns the report and whether every check passed.
pub fn verify(opts: &VerifyOptions) -> Result<(OutputDocument, bool), CliError> {
    let integers = verify_integer_cutoffs(opts.integers)?;
    let fractional = verify_fractional_cutoffs(opts.fractional_n, opts.multiples)?;
    let survey = half_integer_survey(&opts.half_limit)?;
    let non_cutoffs: Vec<&Rational> = survey
        .iter()
        .filter(|(_, cut)| !cut)
        .map(|(h, _)| h)
        .collect();
    let passed = integers.passed && fractional.passed;
    let payload = json!({
        "passed": passed,
        "integer_cutoffs": integers,
        "fractional_cutoffs": fractional,
        "half_integers": {
            "limit": opts.half_limit,
            "checked": survey.len(),
            "non_cutoffs": non_cutoffs,
        },
    });
    Ok((
        OutputDocument::new(Kind::Diagnostics, None, None, payload),
        passed,
    ))
}

/// One-line summary of a verify report, for stderr.
pub fn verify_summary(doc: &OutputDocument) -> String {
    let p = &doc.payload;
    let mut out = String::new();
    let _ = write!(
        out,
        "integers: {}, fractional: {}, half-integer non-cutoffs: {}",
        p["integer_cutoffs"]["passed"],
        p["fractional_cutoffs"]["passed"],
        p["half_integers"]["non_cutoffs"]
    );
    out
}

impl From<TagError> for CliError {
    fn from(e: TagError) -> Self {
        match e {
            TagError::Verification { .. } | TagError::Uncertified { .. } => {
                CliError::Verification(e.to_string())
            }
            TagError::Io(io) => CliError::Io(io),
            other => CliError::Usage(other.to_string()),
        }
    }
}
