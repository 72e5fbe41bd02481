//! The losing-position sequence `P_0 = 0, P_1 = 1, P_(k+1) = P_k + P_j`, where
//! `j` is the unique index with `alpha * P_(j-1) < P_k <= alpha * P_j`, and
//! everything derived from it: windows, generalized Zeckendorf decompositions,
//! the sequence of indices of recurrence and the eventual recurrence.
//!
//! A [`PSequence`] is append-only. Operations that need terms past the current
//! end extend it in place; terms already generated never change.

use std::cmp::Ordering;
use std::ops::Range;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Result, TagError};
use crate::numerics::{Natural, Rational};

/// Hard ceiling on how many terms [`PSequence::detect_recurrence`] will
/// generate before giving up.
pub const DEFAULT_MAX_TERMS: usize = 1 << 20;

/// How far [`generate`] should run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    /// Exactly this many terms, counting `P_0`.
    Terms(usize),
    /// Every term not exceeding this value.
    MaxValue(#[serde(with = "crate::numerics::decimal")] Natural),
}

#[derive(Clone, Debug)]
pub struct PSequence {
    alpha: Rational,
    alpha_num: Natural,
    alpha_den: Natural,
    terms: Vec<Natural>,
    /// `owners[k] = j` means `P_(k+1) = P_k + P_j`, i.e. `P_k` lies in the
    /// window of `P_j`. `owners[0]` is a placeholder.
    owners: Vec<usize>,
    cursor: usize,
    generated_by: Horizon,
}

/// Generates the sequence for `alpha` up to `horizon`.
pub fn generate(alpha: &Rational, horizon: Horizon) -> Result<PSequence> {
    let mut seq = PSequence::new(alpha)?;
    match &horizon {
        Horizon::Terms(n) => seq.extend_to(*n),
        Horizon::MaxValue(bound) => {
            while seq.peek_next() <= *bound {
                seq.push_next();
            }
        }
    }
    seq.generated_by = horizon;
    Ok(seq)
}

impl PSequence {
    /// The two seed terms `0, 1`.
    pub fn new(alpha: &Rational) -> Result<Self> {
        if *alpha < Rational::one() {
            return Err(TagError::AlphaBelowOne(alpha.clone()));
        }
        let (alpha_num, alpha_den) = alpha.unsigned_parts().expect("alpha is positive");
        Ok(PSequence {
            alpha: alpha.clone(),
            alpha_num,
            alpha_den,
            terms: vec![Natural::zero(), Natural::one()],
            owners: vec![0],
            cursor: 1,
            generated_by: Horizon::Terms(2),
        })
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    pub fn terms(&self) -> &[Natural] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term(&self, index: usize) -> Option<&Natural> {
        self.terms.get(index)
    }

    pub fn last(&self) -> &Natural {
        self.terms
            .last()
            .expect("sequence always holds its seed terms")
    }

    pub fn generated_by(&self) -> &Horizon {
        &self.generated_by
    }

    /// The index `j` with `P_(k+1) = P_k + P_j`, when `P_(k+1)` exists.
    pub fn owner(&self, k: usize) -> Option<usize> {
        if k == 0 {
            return None;
        }
        self.owners.get(k).copied()
    }

    /// Moves the window pointer to the unique `j` with
    /// `alpha * P_(j-1) < P_k <= alpha * P_j` for the current last term `P_k`.
    fn settle_cursor(&mut self) {
        let scaled_last = &self.alpha_den * self.last();
        while &self.alpha_num * &self.terms[self.cursor] < scaled_last {
            self.cursor += 1;
        }
        debug_assert!(self.cursor < self.terms.len());
        debug_assert!(&self.alpha_num * &self.terms[self.cursor - 1] < scaled_last);
    }

    fn peek_next(&mut self) -> Natural {
        self.settle_cursor();
        self.last() + &self.terms[self.cursor]
    }

    fn push_next(&mut self) {
        let next = self.peek_next();
        self.owners.push(self.cursor);
        self.terms.push(next);
    }

    /// Appends terms until the sequence holds at least `len` of them.
    pub fn extend_to(&mut self, len: usize) {
        self.terms.reserve(len.saturating_sub(self.terms.len()));
        while self.terms.len() < len {
            self.push_next();
        }
    }

    /// Appends terms until the last one strictly exceeds `value`.
    pub fn extend_past(&mut self, value: &Natural) {
        while self.last() <= value {
            self.push_next();
        }
    }

    /// Index of `value` if it is a term.
    pub fn index_of(&mut self, value: &Natural) -> Option<usize> {
        self.extend_past(value);
        self.terms.binary_search(value).ok()
    }

    /// Appends terms until `owners` has moved past `i`, so the window of
    /// `P_i` is complete.
    fn complete_window(&mut self, i: usize) {
        while *self.owners.last().unwrap() <= i {
            self.push_next();
        }
    }

    /// Index range of the window of `P_i`.
    fn window_range(&mut self, i: usize) -> Range<usize> {
        self.complete_window(i);
        let start = self.owners[1..].partition_point(|&j| j < i) + 1;
        let end = self.owners[1..].partition_point(|&j| j <= i) + 1;
        start..end
    }

    /// The window of `P_i`: every term `P_j` with
    /// `alpha * P_(i-1) < P_j <= alpha * P_i`.
    pub fn window(&mut self, i: usize) -> Result<Window> {
        if i == 0 {
            return Err(TagError::WindowOfZero);
        }
        let members = self.window_range(i);
        Ok(Window {
            owner_index: i,
            member_indices: members,
        })
    }

    /// Index of the largest member of the window of `P_i`.
    pub fn window_max_index(&mut self, i: usize) -> Result<usize> {
        let w = self.window(i)?;
        w.max_index().ok_or(TagError::IndexOutOfRange {
            index: i,
            len: self.len(),
        })
    }

    /// Greedy generalized Zeckendorf decomposition of a positive `n`.
    pub fn zeckendorf(&mut self, n: &Natural) -> Result<Zeckendorf> {
        if n.is_zero() {
            return Err(TagError::ZeckendorfOfZero);
        }
        self.extend_past(n);
        let mut remainder = n.clone();
        let mut indices = Vec::new();
        let mut hi = self.terms.len();
        while !remainder.is_zero() {
            let idx = self.terms[..hi].partition_point(|t| *t <= remainder) - 1;
            debug_assert!(idx >= 1);
            remainder -= &self.terms[idx];
            indices.push(idx);
            hi = idx;
        }
        indices.reverse();
        let parts = indices.iter().map(|&i| self.terms[i].clone()).collect();
        Ok(Zeckendorf {
            n: n.clone(),
            part_indices: indices,
            parts,
        })
    }

    /// `S_1 ..= S_count`, where `S_i = max{ j : P_i + P_(i+j-1) = P_(i+j) }`.
    pub fn s_sequence(&mut self, count: usize) -> IndexSequence {
        let values = (1..=count)
            .map(|i| {
                let range = self.window_range(i);
                // P_(n+1) - P_n = P_i exactly for n in the window of P_i.
                range.end - i
            })
            .collect();
        IndexSequence { values }
    }

    /// Scans the generated terms for the final run of `P_n = P_(n-1) + P_(n-k)`
    /// without extending the sequence.
    pub fn scan_recurrence(&self) -> RecurrenceInfo {
        let len = self.terms.len();
        let mut degree = 0;
        let mut run_start = 0;
        for n in 2..len {
            // P_n - P_(n-1) = P_(owners[n-1]); terms are strictly increasing,
            // so the lag of the relation at n is forced.
            let lag = n - self.owners[n - 1];
            if lag != degree {
                degree = lag;
                run_start = n;
            }
        }
        let run_len = len.saturating_sub(run_start);
        RecurrenceInfo {
            degree,
            holds_from: run_start,
            certified: degree > 0 && run_len >= degree + 2,
            checked_through: len.saturating_sub(1),
        }
    }

    /// Generates until the eventual recurrence is certified (it has held at
    /// `k + 2` consecutive indices, after which it holds forever) or until
    /// `max_terms` terms exist. The result says which of the two happened.
    pub fn detect_recurrence(&mut self, max_terms: usize) -> RecurrenceInfo {
        self.extend_to(16.min(max_terms));
        loop {
            let info = self.scan_recurrence();
            if info.certified || self.len() >= max_terms {
                return info;
            }
            let target = (self.len() * 2).min(max_terms);
            self.extend_to(target);
        }
    }

    /// Like [`detect_recurrence`](Self::detect_recurrence) with the default
    /// term ceiling, but an uncertified result is an error.
    pub fn certified_recurrence(&mut self) -> Result<RecurrenceInfo> {
        let info = self.detect_recurrence(DEFAULT_MAX_TERMS);
        if info.certified {
            Ok(info)
        } else {
            Err(TagError::Uncertified {
                alpha: self.alpha.clone(),
                terms: self.len(),
            })
        }
    }

    /// The terms `P_0 ..` before the eventual recurrence takes over.
    pub fn prefix(&self, info: &RecurrenceInfo) -> &[Natural] {
        &self.terms[..info.holds_from.min(self.terms.len())]
    }
}

/// Indices `j` whose terms satisfy `alpha * P_(i-1) < P_j <= alpha * P_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub owner_index: usize,
    pub member_indices: Range<usize>,
}

impl Window {
    pub fn values(&self, seq: &PSequence) -> Vec<Natural> {
        seq.terms()[self.member_indices.clone()].to_vec()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.member_indices.clone().last()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Zeckendorf {
    #[serde(with = "crate::numerics::decimal")]
    pub n: Natural,
    /// Strictly increasing indices into the sequence.
    pub part_indices: Vec<usize>,
    /// The corresponding terms, smallest first.
    #[serde(with = "crate::numerics::decimal::vec")]
    pub parts: Vec<Natural>,
}

impl Zeckendorf {
    pub fn smallest_part(&self) -> &Natural {
        &self.parts[0]
    }

    /// Whether each part is more than `alpha` times the part before it.
    pub fn satisfies_gap(&self, alpha: &Rational) -> bool {
        self.parts
            .windows(2)
            .all(|w| crate::numerics::cmp_scaled(alpha, &w[0], &w[1]) == Ordering::Less)
    }
}

/// The sequence of indices of recurrence `S_1, S_2, ...`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSequence {
    pub values: Vec<usize>,
}

impl IndexSequence {
    pub fn is_nondecreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
    }
}

/// The relation `P_n = P_(n-1) + P_(n-k)` found at the end of a sequence.
/// `degree = 1` is the doubling recurrence `P_n = 2 P_(n-1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecurrenceInfo {
    pub degree: usize,
    /// First index from which the relation holds at every generated index.
    pub holds_from: usize,
    pub certified: bool,
    /// Last index the relation was checked at.
    pub checked_through: usize,
}

/// Advisory bounds on the eventual recurrence degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeBounds {
    pub lower: usize,
    pub upper: usize,
}

impl DegreeBounds {
    pub fn contains(&self, k: usize) -> bool {
        self.lower <= k && k <= self.upper
    }
}

/// Bounds on the eventual degree `k` from
/// `log(a-1)/(log a - log(a-1)) <= k - 1 <= log a/(log(a+1) - log a)`.
///
/// The two logarithmic expressions bound `k - 1`, the number of terms strictly
/// between `P_(n-k)` and `P_(n-1)`, so one is added to each. Evaluation is in
/// floating point and rounded outward; for `alpha = 1` the lower bound is 1.
pub fn degree_bounds(alpha: &Rational) -> DegreeBounds {
    let a = alpha.to_f64();
    let widen = |x: f64| x.abs() * 4.0 * f64::EPSILON + f64::MIN_POSITIVE;
    let lower = if a > 1.0 {
        let raw = (a - 1.0).ln() / (a.ln() - (a - 1.0).ln());
        ((raw - widen(raw)).ceil().max(0.0) as usize) + 1
    } else {
        1
    };
    let raw_upper = a.ln() / ((a + 1.0).ln() - a.ln());
    let upper = ((raw_upper + widen(raw_upper)).floor().max(0.0) as usize) + 1;
    DegreeBounds {
        lower: lower.min(upper),
        upper,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p, q).unwrap()
    }

    fn terms(alpha: Rational, n: usize) -> Vec<u64> {
        let seq = generate(&alpha, Horizon::Terms(n)).unwrap();
        seq.terms().iter().map(|t| t.try_into().unwrap()).collect()
    }

    fn window_values(seq: &mut PSequence, value: u64) -> Vec<u64> {
        let i = seq.index_of(&Natural::from(value)).unwrap();
        let w = seq.window(i).unwrap();
        w.values(seq)
            .iter()
            .map(|t| t.try_into().unwrap())
            .collect()
    }

    #[test]
    fn generation_examples() {
        assert_eq!(terms(r(3, 2), 8), [0, 1, 2, 4, 8, 16, 32, 64]);
        assert_eq!(terms(r(2, 1), 9), [0, 1, 2, 3, 5, 8, 13, 21, 34]);
        assert_eq!(
            terms(r(3, 1), 13),
            [0, 1, 2, 3, 4, 6, 8, 11, 15, 21, 29, 40, 55]
        );
        assert_eq!(terms(r(9, 2), 11), [0, 1, 2, 3, 4, 5, 7, 9, 11, 14, 18]);
        assert_eq!(terms(r(1, 1), 5), [0, 1, 2, 4, 8]);
    }

    #[test]
    fn alpha_below_one_rejected() {
        assert!(matches!(
            generate(&r(1, 2), Horizon::Terms(4)),
            Err(TagError::AlphaBelowOne(_))
        ));
    }

    #[test]
    fn value_bound_horizon() {
        let seq = generate(&r(2, 1), Horizon::MaxValue(Natural::from(21u32))).unwrap();
        let got: Vec<u64> = seq.terms().iter().map(|t| t.try_into().unwrap()).collect();
        assert_eq!(got, [0, 1, 2, 3, 5, 8, 13, 21]);
        let seq = generate(&r(2, 1), Horizon::MaxValue(Natural::from(20u32))).unwrap();
        assert_eq!(seq.last(), &Natural::from(13u32));
    }

    #[test]
    fn window_examples() {
        let mut t3 = PSequence::new(&r(3, 1)).unwrap();
        assert_eq!(window_values(&mut t3, 6), [15]);
        let mut t52 = PSequence::new(&r(5, 2)).unwrap();
        assert_eq!(window_values(&mut t52, 1), [1, 2]);
        let mut t2 = PSequence::new(&r(2, 1)).unwrap();
        assert_eq!(window_values(&mut t2, 2), [3]);
        assert!(matches!(t2.window(0), Err(TagError::WindowOfZero)));
    }

    #[test]
    fn window_extends_sequence_when_needed() {
        let mut seq = PSequence::new(&r(4, 1)).unwrap();
        assert_eq!(seq.len(), 2);
        let w = seq.window(5).unwrap();
        assert!(seq.len() > w.member_indices.end);
    }

    #[test]
    fn zeckendorf_examples() {
        let mut t2 = PSequence::new(&r(2, 1)).unwrap();
        let z = t2.zeckendorf(&Natural::from(10u32)).unwrap();
        assert_eq!(z.parts, [Natural::from(2u32), Natural::from(8u32)]);
        let z = t2.zeckendorf(&Natural::from(13u32)).unwrap();
        assert_eq!(z.parts, [Natural::from(13u32)]);
        assert!(t2.zeckendorf(&Natural::zero()).is_err());

        let mut t3 = PSequence::new(&r(3, 1)).unwrap();
        let z = t3.zeckendorf(&Natural::from(20u32)).unwrap();
        // Frozen from the exhaustive subset search in tests/sequence.rs.
        let parts: Vec<u64> = z.parts.iter().map(|p| p.try_into().unwrap()).collect();
        assert_eq!(parts, [1, 4, 15]);
        assert!(z.satisfies_gap(&r(3, 1)));
    }

    #[test]
    fn s_sequence_examples() {
        let mut seq = PSequence::new(&r(7, 2)).unwrap();
        assert_eq!(
            seq.s_sequence(13).values,
            [3, 4, 4, 4, 5, 5, 5, 5, 5, 5, 5, 5, 5]
        );
        let mut fib = PSequence::new(&r(2, 1)).unwrap();
        assert_eq!(fib.s_sequence(5).values, [2, 2, 2, 2, 2]);
        let mut t3 = PSequence::new(&r(3, 1)).unwrap();
        assert!(t3.s_sequence(100).is_nondecreasing());
    }

    #[test]
    fn recurrence_examples() {
        let mut fib = PSequence::new(&r(2, 1)).unwrap();
        let info = fib.detect_recurrence(DEFAULT_MAX_TERMS);
        assert!(info.certified);
        assert_eq!((info.degree, info.holds_from), (2, 3));

        let mut t3 = PSequence::new(&r(3, 1)).unwrap();
        let info = t3.detect_recurrence(DEFAULT_MAX_TERMS);
        assert!(info.certified);
        assert_eq!(info.degree, 4);

        let mut t72 = PSequence::new(&r(7, 2)).unwrap();
        let info = t72.detect_recurrence(DEFAULT_MAX_TERMS);
        assert!(info.certified);
        assert_eq!(info.degree, 5);
        let prefix: Vec<u64> = t72
            .prefix(&info)
            .iter()
            .map(|t| t.try_into().unwrap())
            .collect();
        assert_eq!(prefix, [0, 1, 2, 3, 4, 6, 8, 11, 15, 21]);

        let mut doubling = PSequence::new(&r(3, 2)).unwrap();
        let info = doubling.detect_recurrence(DEFAULT_MAX_TERMS);
        assert_eq!((info.degree, info.holds_from, info.certified), (1, 2, true));
    }

    #[test]
    fn short_horizon_is_reported_uncertified() {
        let mut seq = PSequence::new(&r(9, 2)).unwrap();
        let info = seq.detect_recurrence(12);
        assert!(!info.certified);
        assert!(seq.len() <= 16);
    }

    #[test]
    fn degree_bound_examples() {
        assert_eq!(degree_bounds(&r(2, 1)), DegreeBounds { lower: 1, upper: 2 });
        assert!(degree_bounds(&r(3, 1)).contains(4));
        assert!(degree_bounds(&r(4, 1)).contains(6));
        assert_eq!(degree_bounds(&r(1, 1)).lower, 1);
    }
}
