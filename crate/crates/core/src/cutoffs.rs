//! Ratio sequences, next cutoffs, stable intervals and cutoff enumeration.
//!
//! For a term `P_k`, let `P_x` be the largest member of its window. The ratio
//! `Q_k = P_(x+1) / P_k` is the smallest parameter at which `P_(x+1)` joins
//! that window and the sequence changes. Every ratio exceeds `alpha`; the
//! smallest of them is the next cutoff, and `[alpha, min Q)` is the stable
//! interval.
//!
//! The minimum is found by scanning the ratios past the point where the
//! eventual recurrence is certified, doubling the scan length until both the
//! minimum and the index attaining it have survived two doublings. Each result
//! is then checked directly: the sequence at the minimum must differ from the
//! sequence at `alpha`, and a rational just below the minimum must agree with
//! it over the whole scanned range.
//!
//! In the tail, `Q_n = P_(n+k)/P_n` tends to `r^k` where `r` is the dominant
//! root of `x^k - x^(k-1) - 1`, oscillating around it.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::CutoffCache;
use crate::error::{Result, TagError};
use crate::numerics::{dominant_root, Natural, Rational};
use crate::sequence::{generate, Horizon, PSequence, RecurrenceInfo};

/// Minimum number of tail ratios scanned past the start of the recurrence.
const MIN_TAIL: usize = 64;

/// One ratio `Q_k = p_hat / p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatioPoint {
    pub index: usize,
    #[serde(with = "crate::numerics::decimal")]
    pub p_hat: Natural,
    #[serde(with = "crate::numerics::decimal")]
    pub p: Natural,
    pub q: Rational,
}

/// A maximal half-open parameter range `[lower, upper)` on which the
/// losing-position sequence does not change.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StableInterval {
    pub lower: Rational,
    pub upper: Rational,
    pub degree: usize,
    /// Terms before the eventual recurrence takes over.
    #[serde(with = "crate::numerics::decimal::vec")]
    pub prefix: Vec<Natural>,
}

impl StableInterval {
    pub fn contains(&self, beta: &Rational) -> bool {
        self.lower <= *beta && *beta < self.upper
    }
}

/// Cutoffs found in `[from, bound]`; `gamma` counts every cutoff in `[1, bound]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutoffCensus {
    pub from: Rational,
    pub bound: Rational,
    pub cutoffs: Vec<Rational>,
    pub gamma: usize,
}

/// Everything learned while computing one next cutoff.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutoffSearch {
    pub alpha: Rational,
    pub cutoff: Rational,
    /// Earliest index attaining the minimum ratio.
    pub argmin: usize,
    pub recurrence: RecurrenceInfo,
    #[serde(with = "crate::numerics::decimal::vec")]
    pub prefix: Vec<Natural>,
    /// Number of ratios scanned.
    pub ratios_scanned: usize,
    /// First index where the sequence at `cutoff` differs from this one.
    pub divergence_index: usize,
}

impl CutoffSearch {
    pub fn interval(&self) -> StableInterval {
        StableInterval {
            lower: self.alpha.clone(),
            upper: self.cutoff.clone(),
            degree: self.recurrence.degree,
            prefix: self.prefix.clone(),
        }
    }
}

/// `Q_i` for `P_i` of `seq`, extending `seq` as far as the window needs.
fn ratio_parts(seq: &mut PSequence, i: usize) -> Result<(Natural, Natural)> {
    let x = seq.window_max_index(i)?;
    seq.extend_to(x + 2);
    let p_hat = seq.terms()[x + 1].clone();
    Ok((p_hat, seq.terms()[i].clone()))
}

fn ratio_point(seq: &mut PSequence, i: usize) -> Result<RatioPoint> {
    let (p_hat, p) = ratio_parts(seq, i)?;
    let q = Rational::new(BigInt::from(p_hat.clone()), BigInt::from(p.clone()))?;
    Ok(RatioPoint {
        index: i,
        p_hat,
        p,
        q,
    })
}

/// `Q_1 ..= Q_count`.
pub fn q_sequence(alpha: &Rational, count: usize) -> Result<Vec<RatioPoint>> {
    let mut seq = PSequence::new(alpha)?;
    (1..=count).map(|i| ratio_point(&mut seq, i)).collect()
}

/// Running minimum of `p_hat / p`, compared by cross-multiplication.
struct RatioMin {
    p_hat: Natural,
    p: Natural,
    index: usize,
}

impl RatioMin {
    fn offer(slot: &mut Option<RatioMin>, p_hat: Natural, p: Natural, index: usize) {
        let better = match slot {
            None => true,
            Some(m) => (&p_hat * &m.p).cmp(&(&m.p_hat * &p)) == Ordering::Less,
        };
        if better {
            *slot = Some(RatioMin { p_hat, p, index });
        }
    }

    fn value(&self) -> Rational {
        Rational::new(
            BigInt::from(self.p_hat.clone()),
            BigInt::from(self.p.clone()),
        )
        .expect("terms past P_0 are positive")
    }
}

/// The next cutoff above `alpha`, i.e. the smallest ratio `Q_k`.
pub fn next_cutoff(alpha: &Rational) -> Result<Rational> {
    Ok(next_cutoff_search(alpha)?.cutoff)
}

/// [`next_cutoff`] with the supporting data.
pub fn next_cutoff_search(alpha: &Rational) -> Result<CutoffSearch> {
    let mut seq = PSequence::new(alpha)?;
    let recurrence = seq.certified_recurrence()?;
    let prefix = seq.prefix(&recurrence).to_vec();

    let mut tail = MIN_TAIL.max(8 * recurrence.degree);
    let mut scanned = 0usize;
    let mut best: Option<RatioMin> = None;
    let mut history: Vec<(Rational, usize)> = Vec::new();
    loop {
        let target = recurrence.holds_from + tail;
        for i in scanned + 1..=target {
            let (p_hat, p) = ratio_parts(&mut seq, i)?;
            RatioMin::offer(&mut best, p_hat, p, i);
        }
        scanned = target;
        let current = best.as_ref().expect("at least one ratio scanned");
        history.push((current.value(), current.index));
        let n = history.len();
        if n >= 3 && history[n - 1] == history[n - 2] && history[n - 2] == history[n - 3] {
            break;
        }
        tail *= 2;
    }
    let (cutoff, argmin) = history.pop().expect("history is nonempty");

    let divergence_index = verify_cutoff(alpha, &mut seq, &cutoff)?;
    Ok(CutoffSearch {
        alpha: alpha.clone(),
        cutoff,
        argmin,
        recurrence,
        prefix,
        ratios_scanned: scanned,
        divergence_index,
    })
}

/// Checks both sides of a claimed next cutoff over the generated range and
/// returns the first index where the sequence at `cutoff` differs.
fn verify_cutoff(alpha: &Rational, seq: &mut PSequence, cutoff: &Rational) -> Result<usize> {
    let fail = |reason: String| TagError::Verification {
        alpha: alpha.clone(),
        reason,
    };
    if cutoff <= alpha {
        return Err(fail(format!(
            "ratio minimum {cutoff} does not exceed alpha"
        )));
    }
    let horizon = seq.len() + 2;
    seq.extend_to(horizon);
    let reference = &seq.terms()[..horizon];

    let at_cutoff = generate(cutoff, Horizon::Terms(horizon))?;
    let divergence = reference
        .iter()
        .zip(at_cutoff.terms())
        .position(|(a, b)| a != b)
        .ok_or_else(|| fail(format!("sequence at {cutoff} agrees for {horizon} terms")))?;

    // Strictly between alpha and the cutoff, since the two differ by at
    // least 1/(den(alpha) * den(cutoff)).
    let scale = BigInt::from(1_000_000u32) * cutoff.denom() * alpha.denom();
    let probe = cutoff - &Rational::new(BigInt::one(), scale)?;
    let below = generate(&probe, Horizon::Terms(horizon))?;
    if let Some(i) = reference
        .iter()
        .zip(below.terms())
        .position(|(a, b)| a != b)
    {
        return Err(fail(format!(
            "probe {probe} below the cutoff already differs at index {i}"
        )));
    }
    Ok(divergence)
}

/// The largest cutoff that is at most `alpha`, found by walking forward from
/// the integer anchor `floor(alpha)` (or 1 below 2).
fn anchor(alpha: &Rational) -> Rational {
    let floor = alpha.floor();
    if floor < BigInt::from(2) {
        Rational::one()
    } else {
        Rational::from_integer(floor)
    }
}

/// The stable interval containing `alpha`.
pub fn stable_interval(alpha: &Rational) -> Result<StableInterval> {
    if *alpha < Rational::one() {
        return Err(TagError::AlphaBelowOne(alpha.clone()));
    }
    let mut search = next_cutoff_search(&anchor(alpha))?;
    while search.cutoff <= *alpha {
        search = next_cutoff_search(&search.cutoff)?;
    }
    Ok(search.interval())
}

/// Whether `beta` is a cutoff.
pub fn is_cutoff(beta: &Rational) -> Result<bool> {
    Ok(stable_interval(beta)?.lower == *beta)
}

/// Stable intervals whose lower ends lie in `[m, m + 1)` and do not exceed
/// `bound`. Errors if the walk from `m` does not land exactly on `m + 1`
/// when `m + 1 <= bound`, since the next segment is anchored there.
fn walk_segment(
    m: u64,
    bound: &Rational,
    cache: Option<&CutoffCache>,
) -> Result<Vec<StableInterval>> {
    let start = Rational::from(m);
    let end = Rational::from(m + 1);
    let mut out = Vec::new();
    let mut c = start;
    while c < end && c <= *bound {
        let interval = match cache.and_then(|cache| cache.get(&c)) {
            Some(hit) => hit.clone(),
            None => next_cutoff_search(&c)?.interval(),
        };
        c = interval.upper.clone();
        out.push(interval);
    }
    if c > end && end <= *bound {
        return Err(TagError::Verification {
            alpha: out
                .last()
                .map(|i| i.lower.clone())
                .unwrap_or_else(Rational::one),
            reason: format!("integer {} is not a cutoff; next cutoff is {c}", m + 1),
        });
    }
    Ok(out)
}

/// Every stable interval with lower end in `[1, bound]`, in order. Segments
/// between consecutive integers are computed in parallel.
pub fn enumerate_intervals(
    bound: &Rational,
    cache: Option<&CutoffCache>,
) -> Result<Vec<StableInterval>> {
    if *bound < Rational::one() {
        return Err(TagError::InvalidRange(format!("bound {bound} is below 1")));
    }
    let top = bound.floor().to_u64().ok_or_else(|| {
        TagError::InvalidRange(format!("bound {bound} is too large to enumerate"))
    })?;
    let segments: Vec<Vec<StableInterval>> = (1..=top)
        .into_par_iter()
        .map(|m| walk_segment(m, bound, cache))
        .collect::<Result<_>>()?;
    Ok(segments.into_iter().flatten().collect())
}

/// All cutoffs in `[from, to]`, together with `gamma(to)`.
pub fn enumerate_cutoffs(from: &Rational, to: &Rational) -> Result<CutoffCensus> {
    enumerate_cutoffs_cached(from, to, None)
}

pub fn enumerate_cutoffs_cached(
    from: &Rational,
    to: &Rational,
    cache: Option<&CutoffCache>,
) -> Result<CutoffCensus> {
    if *from < Rational::one() || from > to {
        return Err(TagError::InvalidRange(format!(
            "need 1 <= from <= to, got [{from}, {to}]"
        )));
    }
    let intervals = enumerate_intervals(to, cache)?;
    Ok(census_from_intervals(from, to, &intervals))
}

pub(crate) fn census_from_intervals(
    from: &Rational,
    to: &Rational,
    intervals: &[StableInterval],
) -> CutoffCensus {
    let all: Vec<&Rational> = intervals
        .iter()
        .map(|i| &i.lower)
        .filter(|c| *c <= to)
        .collect();
    CutoffCensus {
        from: from.clone(),
        bound: to.clone(),
        gamma: all.len(),
        cutoffs: all.into_iter().filter(|c| *c >= from).cloned().collect(),
    }
}

/// `gamma(n)`, the number of cutoffs in `[1, n]`.
pub fn gamma(bound: &Rational) -> Result<usize> {
    Ok(enumerate_intervals(bound, None)?.len())
}

/// One row of the `gamma(n)` table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaRow {
    pub n: Rational,
    pub gamma: usize,
    /// `gamma(n) / n^2`, exact.
    pub ratio: Rational,
}

/// `gamma` at `start, start + step, ...` up to `upto`, from a single enumeration.
pub fn gamma_table(
    start: &Rational,
    step: &Rational,
    upto: &Rational,
    cache: Option<&CutoffCache>,
) -> Result<(Vec<GammaRow>, Vec<StableInterval>)> {
    if *step <= Rational::zero() || *start < Rational::one() {
        return Err(TagError::InvalidRange(format!(
            "need start >= 1 and step > 0, got start {start}, step {step}"
        )));
    }
    let intervals = enumerate_intervals(upto, cache)?;
    let mut rows = Vec::new();
    let mut n = start.clone();
    let mut count = 0usize;
    while n <= *upto {
        while count < intervals.len() && intervals[count].lower <= n {
            count += 1;
        }
        let ratio = Rational::from(count as u64) / (&n * &n);
        rows.push(GammaRow {
            n: n.clone(),
            gamma: count,
            ratio,
        });
        n = &n + step;
    }
    Ok((rows, intervals))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegerCutoffReport {
    pub max_n: u64,
    pub missing: Vec<u64>,
    pub passed: bool,
}

/// Confirms every integer in `[2, max_n]` is a cutoff.
pub fn verify_integer_cutoffs(max_n: u64) -> Result<IntegerCutoffReport> {
    if max_n < 2 {
        return Err(TagError::InvalidRange(format!(
            "max_n must be at least 2, got {max_n}"
        )));
    }
    let bound = Rational::from(max_n);
    // Anchor each integer from the segment below it, so the check does not
    // assume what it is checking.
    let lowers: Vec<Rational> = (1..max_n)
        .into_par_iter()
        .map(|m| -> Result<Rational> {
            let mut c = Rational::from(m);
            loop {
                let next = next_cutoff(&c)?;
                if next >= Rational::from(m + 1) {
                    return Ok(next);
                }
                c = next;
            }
        })
        .collect::<Result<_>>()?;
    let missing: Vec<u64> = (2..=max_n)
        .zip(&lowers)
        .filter(|(n, reached)| **reached != Rational::from(*n))
        .map(|(n, _)| n)
        .collect();
    let census = enumerate_cutoffs(&Rational::one(), &bound)?;
    let listed_all = (2..=max_n).all(|n| census.cutoffs.contains(&Rational::from(n)));
    Ok(IntegerCutoffReport {
        max_n,
        passed: missing.is_empty() && listed_all,
        missing,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FractionalCutoffRow {
    pub n: u64,
    pub x: u64,
    /// `x + 1/n`.
    pub target: Rational,
    pub target_is_cutoff: bool,
    /// Largest cutoff strictly below the target.
    pub alpha: Rational,
    /// `max(W_alpha(n))`.
    #[serde(with = "crate::numerics::decimal")]
    pub window_max: Natural,
    /// `n x - n + 1`.
    pub expected_window_max: u64,
    pub identity_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FractionalCutoffReport {
    pub rows: Vec<FractionalCutoffRow>,
    pub passed: bool,
}

fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

/// For `x = n!, 2 n!, ..., multiples * n!`, checks that `x + 1/n` is a cutoff
/// and that the largest cutoff `alpha` below it has `max(W_alpha(n)) = n x - n + 1`.
pub fn verify_fractional_cutoffs(n: u64, multiples: u64) -> Result<FractionalCutoffReport> {
    if n == 0 {
        return Err(TagError::InvalidRange("n must be positive".into()));
    }
    let base = factorial(n);
    let rows = (1..=multiples)
        .into_par_iter()
        .map(|j| fractional_row(n, j * base))
        .collect::<Result<Vec<_>>>()?;
    let passed = rows.iter().all(|r| r.target_is_cutoff && r.identity_holds);
    Ok(FractionalCutoffReport { rows, passed })
}

fn fractional_row(n: u64, x: u64) -> Result<FractionalCutoffRow> {
    let target = Rational::from(x) + Rational::new(1, n)?;
    let mut alpha = Rational::from(x);
    let mut next = next_cutoff(&alpha)?;
    while next < target {
        alpha = next;
        next = next_cutoff(&alpha)?;
    }
    let mut seq = PSequence::new(&alpha)?;
    let i = seq
        .index_of(&Natural::from(n))
        .ok_or_else(|| TagError::Verification {
            alpha: alpha.clone(),
            reason: format!("{n} is not a losing position"),
        })?;
    let top = seq.window_max_index(i)?;
    let window_max = seq.terms()[top].clone();
    let expected = n * x - n + 1;
    Ok(FractionalCutoffRow {
        n,
        x,
        target_is_cutoff: next == target,
        target,
        identity_holds: window_max == Natural::from(expected),
        alpha,
        window_max,
        expected_window_max: expected,
    })
}

/// Classifies every half-integer `5/2, 7/2, ...` up to `limit`.
pub fn half_integer_survey(limit: &Rational) -> Result<Vec<(Rational, bool)>> {
    let top = (limit * &Rational::from(2u64))
        .floor()
        .to_u64()
        .unwrap_or(0);
    let odds: Vec<u64> = (5..=top).step_by(2).collect();
    odds.into_par_iter()
        .map(|odd| {
            let h = Rational::new(odd, 2)?;
            let cut = is_cutoff(&h)?;
            Ok((h, cut))
        })
        .collect()
}

/// Sign of `Q_n - L` over the tail, where `L = r^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillationReport {
    pub alpha: Rational,
    pub degree: usize,
    pub holds_from: usize,
    pub dominant_root: f64,
    pub limit: f64,
    /// `-1`, `0` or `1` for each tail index starting at `holds_from`. Zero means
    /// `|Q_n - L|` was below the float resolution.
    pub signs: Vec<i8>,
    pub sign_changes: usize,
    /// Smallest ratio over `Q_1` through the end of the tail.
    pub min_q: Rational,
    pub min_q_index: usize,
    pub min_below_limit: bool,
    pub min_above_alpha: bool,
}

pub fn oscillation_diagnostic(alpha: &Rational, count: usize) -> Result<OscillationReport> {
    let mut seq = PSequence::new(alpha)?;
    let recurrence = seq.certified_recurrence()?;
    let roots = dominant_root(recurrence.degree);
    let limit = roots.q_limit;
    let end = recurrence.holds_from + count;

    let mut best: Option<RatioMin> = None;
    let mut signs = Vec::with_capacity(count);
    for i in 1..end {
        let (p_hat, p) = ratio_parts(&mut seq, i)?;
        if i >= recurrence.holds_from {
            let q = crate::numerics::ratio_to_f64(&p_hat.clone().into(), &p.clone().into());
            let diff = q - limit;
            let sign = if diff.abs() <= 4.0 * f64::EPSILON * limit {
                0
            } else if diff > 0.0 {
                1
            } else {
                -1
            };
            signs.push(sign);
        }
        RatioMin::offer(&mut best, p_hat, p, i);
    }
    let nonzero: Vec<i8> = signs.iter().copied().filter(|s| *s != 0).collect();
    let sign_changes = nonzero.windows(2).filter(|w| w[0] != w[1]).count();
    let best = best.expect("tail is nonempty");
    let min_q = best.value();
    Ok(OscillationReport {
        alpha: alpha.clone(),
        degree: recurrence.degree,
        holds_from: recurrence.holds_from,
        dominant_root: roots.dominant_root,
        limit,
        signs,
        sign_changes,
        min_below_limit: min_q.to_f64() < limit,
        min_above_alpha: min_q > *alpha,
        min_q_index: best.index,
        min_q,
    })
}
