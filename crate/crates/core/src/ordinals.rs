//! Ordinals below ω^ω in Cantor normal form.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::check::CheckReport;
use crate::colorings::{Color, OrdinalColoring};

/// Longest sequence accepted by [`fp_equals_set`].
pub const MAX_FP_SEQUENCE: usize = 15;
/// Largest block enumeration [`greedy_mono_sequence`] will build.
pub const MAX_ENUMERATION: u64 = 2_000_000;
pub const DEFAULT_COEFF_CAP: u64 = 8;
/// Largest range [`absorption_scan`] will cube for associativity.
pub const MAX_ALGEBRA_RANGE: usize = 400;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrdinalError {
    #[error("cannot parse ordinal {input:?}: {reason}")]
    Parse { input: String, reason: String },
    #[error("zero has no successor exponent")]
    Zero,
    #[error("sequence of {0} ordinals exceeds the limit {MAX_FP_SEQUENCE}")]
    TooLong(usize),
    #[error("sequence is not strictly increasing at index {0}")]
    NotIncreasing(usize),
    #[error("bound {bound} is below w^{target}")]
    BoundTooSmall { bound: CnfOrdinal, target: u32 },
    #[error("range of {count} ordinals exceeds the enumeration limit")]
    TooLarge { count: u64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no ordinal of color {color} in the block above {threshold} and below {bound}")]
    NoCandidate { color: Color, threshold: CnfOrdinal, bound: CnfOrdinal },
    #[error("constructed sequence failed its recheck: {0}")]
    Recheck(String),
}

/// `Σ ω^eᵢ·cᵢ` with strictly decreasing exponents and positive
/// coefficients; the empty list is 0.
///
/// The derived ordering on the term list is the ordinal ordering.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct CnfOrdinal {
    terms: Vec<(u32, u64)>,
}

impl CnfOrdinal {
    pub fn zero() -> Self {
        CnfOrdinal::default()
    }

    pub fn finite(n: u64) -> Self {
        Self::monomial(0, n)
    }

    /// `ω^e·c`
    pub fn monomial(e: u32, c: u64) -> Self {
        if c == 0 {
            CnfOrdinal::zero()
        } else {
            CnfOrdinal { terms: vec![(e, c)] }
        }
    }

    /// `ω^e`
    pub fn omega_pow(e: u32) -> Self {
        Self::monomial(e, 1)
    }

    pub fn from_terms(terms: Vec<(u32, u64)>) -> Result<Self, OrdinalError> {
        let bad = |reason: &str| OrdinalError::Parse { input: format!("{terms:?}"), reason: reason.into() };
        if terms.iter().any(|t| t.1 == 0) {
            return Err(bad("zero coefficient"));
        }
        if terms.windows(2).any(|p| p[0].0 <= p[1].0) {
            return Err(bad("exponents must strictly decrease"));
        }
        Ok(CnfOrdinal { terms })
    }

    pub fn terms(&self) -> &[(u32, u64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading_exponent(&self) -> Option<u32> {
        self.terms.first().map(|t| t.0)
    }
}

/// Ordinal sum. Terms of `γ` below the leading exponent of `δ` are absorbed.
///
/// # Panics
/// If a merged coefficient overflows `u64`.
pub fn ord_add(gamma: &CnfOrdinal, delta: &CnfOrdinal) -> CnfOrdinal {
    let Some(&(e, c)) = delta.terms.first() else {
        return gamma.clone();
    };
    let mut terms: Vec<(u32, u64)> = gamma.terms.iter().copied().take_while(|t| t.0 >= e).collect();
    match terms.last_mut() {
        Some(last) if last.0 == e => {
            last.1 = last.1.checked_add(c).expect("ordinal coefficient overflow");
            terms.extend_from_slice(&delta.terms[1..]);
        }
        _ => terms.extend_from_slice(&delta.terms),
    }
    CnfOrdinal { terms }
}

/// `α·ω = ω^(e+1)` for `α > 0` with leading exponent `e`.
pub fn times_omega(alpha: &CnfOrdinal) -> Result<CnfOrdinal, OrdinalError> {
    let e = alpha.leading_exponent().ok_or(OrdinalError::Zero)?;
    Ok(CnfOrdinal::omega_pow(e + 1))
}

/// True iff `γ + δ = δ`.
pub fn absorbs(gamma: &CnfOrdinal, delta: &CnfOrdinal) -> bool {
    ord_add(gamma, delta) == *delta
}

impl fmt::Display for CnfOrdinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, &(e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            match (e, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "w")?,
                (1, c) => write!(f, "w*{c}")?,
                (e, 1) => write!(f, "w^{e}")?,
                (e, c) => write!(f, "w^{e}*{c}")?,
            }
        }
        Ok(())
    }
}

/// Parses `w^2*3+w*2+5`; `ω` may stand for `w`, `0` is zero.
impl FromStr for CnfOrdinal {
    type Err = OrdinalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: String| OrdinalError::Parse { input: s.to_string(), reason };
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().replace('ω', "w");
        if compact == "0" {
            return Ok(CnfOrdinal::zero());
        }
        if compact.is_empty() {
            return Err(err("empty input".into()));
        }
        let parse_num = |t: &str| -> Result<u64, OrdinalError> {
            if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err(format!("expected a number, found {t:?}")));
            }
            t.parse().map_err(|_| err(format!("number {t:?} out of range")))
        };
        let mut terms = Vec::new();
        for token in compact.split('+') {
            let (e, c) = if let Some(rest) = token.strip_prefix('w') {
                let (exp_part, coeff_part) = match rest.split_once('*') {
                    Some((a, b)) => (a, Some(b)),
                    None => (rest, None),
                };
                let e = match exp_part.strip_prefix('^') {
                    Some(digits) => {
                        u32::try_from(parse_num(digits)?).map_err(|_| err(format!("exponent {digits} too large")))?
                    }
                    None if exp_part.is_empty() => 1,
                    None => return Err(err(format!("bad term {token:?}"))),
                };
                (e, coeff_part.map(parse_num).transpose()?.unwrap_or(1))
            } else {
                (0, parse_num(token)?)
            };
            if c == 0 {
                return Err(err(format!("zero coefficient in {token:?}")));
            }
            if let Some(&(prev, _)) = terms.last() {
                if e >= prev {
                    return Err(err(format!("exponents must strictly decrease at {token:?}")));
                }
            }
            terms.push((e, c));
        }
        Ok(CnfOrdinal { terms })
    }
}

impl Serialize for CnfOrdinal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Every ordinal below `ω^depth` with coefficients at most `cap`, in
/// increasing order (zero excluded).
pub fn enumerate_below_power(depth: u32, cap: u64) -> Result<Vec<CnfOrdinal>, OrdinalError> {
    let count = (cap + 1).saturating_pow(depth);
    if count > MAX_ENUMERATION {
        return Err(OrdinalError::TooLarge { count });
    }
    // digit vectors in base cap+1, most significant exponent first, give
    // increasing ordinals when counted upward
    let mut out = Vec::with_capacity(count as usize);
    let mut digits = vec![0u64; depth as usize];
    for _ in 1..count {
        let mut i = digits.len();
        loop {
            i -= 1;
            if digits[i] < cap {
                digits[i] += 1;
                break;
            }
            digits[i] = 0;
        }
        let terms =
            digits.iter().enumerate().filter(|(_, &c)| c > 0).map(|(k, &c)| (depth - 1 - k as u32, c)).collect();
        out.push(CnfOrdinal { terms });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GreedyResult {
    pub color: Color,
    pub sequence: Vec<CnfOrdinal>,
}

/// Builds `γ₀ < γ₁ < ⋯` in the majority color cell of the ordinals below
/// `bound` (coefficients capped at `coeff_cap`), each `γ_ξ` the first
/// eligible ordinal above `γ_(ξ−1)·ω`. Every increasing-index sum then
/// collapses to its last term. The output is rechecked before returning.
pub fn greedy_mono_sequence(
    coloring: &OrdinalColoring,
    bound: &CnfOrdinal,
    target_length: u32,
    coeff_cap: u64,
) -> Result<GreedyResult, OrdinalError> {
    if target_length == 0 || coeff_cap == 0 {
        return Err(OrdinalError::Config("target length and coefficient cap must be positive".into()));
    }
    if *bound < CnfOrdinal::omega_pow(target_length) {
        return Err(OrdinalError::BoundTooSmall { bound: bound.clone(), target: target_length });
    }
    let depth = match bound.terms() {
        [(e, 1)] => *e,
        _ => bound.leading_exponent().expect("bound is positive") + 1,
    };
    let universe: Vec<CnfOrdinal> =
        enumerate_below_power(depth, coeff_cap)?.into_iter().filter(|x| x < bound).collect();
    let colors: Vec<Color> = universe.iter().map(|x| coloring.color(x)).collect();
    let ones = colors.iter().filter(|&&c| c == Color::One).count();
    let color = if 2 * ones > colors.len() { Color::One } else { Color::Zero };

    let mut sequence: Vec<CnfOrdinal> = Vec::with_capacity(target_length as usize);
    let mut threshold = CnfOrdinal::zero();
    let mut start = 0;
    for _ in 0..target_length {
        let offset = universe[start..].partition_point(|x| *x <= threshold);
        let found = (start + offset..universe.len()).find(|&i| colors[i] == color);
        let Some(i) = found else {
            return Err(OrdinalError::NoCandidate { color, threshold, bound: bound.clone() });
        };
        threshold = times_omega(&universe[i])?;
        sequence.push(universe[i].clone());
        start = i + 1;
    }

    if !fp_equals_set(&sequence)? {
        return Err(OrdinalError::Recheck("some increasing sum differs from its last term".into()));
    }
    if let Some(x) = sequence.iter().find(|x| coloring.color(x) != color) {
        return Err(OrdinalError::Recheck(format!("{x} has the wrong color")));
    }
    Ok(GreedyResult { color, sequence })
}

/// True iff every increasing-index sum of the sequence equals its last
/// summand, so the finite sums are exactly the sequence's elements.
pub fn fp_equals_set(sequence: &[CnfOrdinal]) -> Result<bool, OrdinalError> {
    let m = sequence.len();
    if m > MAX_FP_SEQUENCE {
        return Err(OrdinalError::TooLong(m));
    }
    if let Some(i) = sequence.windows(2).position(|p| p[0] >= p[1]) {
        return Err(OrdinalError::NotIncreasing(i + 1));
    }
    let mut sums: Vec<CnfOrdinal> = Vec::with_capacity((1 << m) - 1);
    for mask in 1usize..(1 << m) {
        let top = usize::BITS as usize - 1 - mask.leading_zeros() as usize;
        let rest = mask & !(1 << top);
        let s = if rest == 0 { sequence[top].clone() } else { ord_add(&sums[rest - 1], &sequence[top]) };
        if s != sequence[top] {
            return Ok(false);
        }
        sums.push(s);
    }
    Ok(true)
}

/// Finite-sums closure under `x*y = max{x,y}`, returned sorted and
/// deduplicated. It always equals the distinct inputs.
pub fn max_semigroup_fs<T: Ord + Clone>(items: &[T]) -> Vec<T> {
    let mut closure: BTreeSet<T> = items.iter().cloned().collect();
    loop {
        let snapshot: Vec<T> = closure.iter().cloned().collect();
        let before = closure.len();
        for a in &snapshot {
            for b in &snapshot {
                closure.insert(std::cmp::max(a, b).clone());
            }
        }
        if closure.len() == before {
            return closure.into_iter().collect();
        }
    }
}

/// Checks `max_semigroup_fs(X) = X` as sets on `trials` random lists of
/// 1 to `max_len` ordinals below ω^5.
pub fn max_semigroup_scan(trials: u64, max_len: usize, seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport::new();
    for _ in 0..trials {
        let len = rng.gen_range(1..=max_len.max(1));
        let xs: Vec<CnfOrdinal> = (0..len)
            .map(|_| {
                let mut terms = Vec::new();
                for e in (0..5u32).rev() {
                    if rng.gen_bool(0.5) {
                        terms.push((e, rng.gen_range(1..=9)));
                    }
                }
                CnfOrdinal { terms }
            })
            .collect();
        report.checked += 1;
        report.applicable += 1;
        let closure: BTreeSet<CnfOrdinal> = max_semigroup_fs(&xs).into_iter().collect();
        let input: BTreeSet<CnfOrdinal> = xs.iter().cloned().collect();
        if closure != input {
            report.fail(|| format!("closure of {xs:?} differs from the input"));
        }
    }
    report
}

/// Exhaustive algebra check over all ordinals with exponents at most
/// `max_exp` and coefficients at most `max_coeff`: associativity, the two
/// sided identity, and the absorption law (`γ + δ = δ` for `δ ≥ γ·ω`, and
/// never when `δ < γ·ω` shares `γ`'s leading exponent).
pub fn absorption_scan(max_exp: u32, max_coeff: u64) -> Result<CheckReport, OrdinalError> {
    let mut all = enumerate_below_power(max_exp + 1, max_coeff)?;
    all.insert(0, CnfOrdinal::zero());
    if all.len() > MAX_ALGEBRA_RANGE {
        return Err(OrdinalError::TooLarge { count: all.len() as u64 });
    }
    let zero = CnfOrdinal::zero();
    let mut report = CheckReport::new();
    for g in &all {
        report.checked += 1;
        if ord_add(&zero, g) != *g || ord_add(g, &zero) != *g {
            report.fail(|| format!("0 is not an identity for {g}"));
        }
        for d in &all {
            if !g.is_zero() {
                let threshold = times_omega(g)?;
                let applies_true = *d >= threshold;
                let applies_false = *d < threshold && d.leading_exponent() == g.leading_exponent();
                if applies_true || applies_false {
                    report.applicable += 1;
                    if absorbs(g, d) != applies_true {
                        report.fail(|| format!("absorbs({g}, {d}) should be {applies_true}"));
                    }
                }
            }
            let gd = ord_add(g, d);
            for h in &all {
                if ord_add(&gd, h) != ord_add(g, &ord_add(d, h)) {
                    report.fail(|| format!("({g}+{d})+{h} differs from {g}+({d}+{h})"));
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::cmp::Ordering;

    fn o(s: &str) -> CnfOrdinal {
        s.parse().unwrap()
    }

    /// Brute-force value comparison: compare coefficient vectors indexed by
    /// exponent from the top.
    fn oracle_cmp(a: &CnfOrdinal, b: &CnfOrdinal) -> Ordering {
        let top = a.leading_exponent().into_iter().chain(b.leading_exponent()).max().unwrap_or(0);
        let coeff = |x: &CnfOrdinal, e: u32| x.terms().iter().find(|t| t.0 == e).map_or(0, |t| t.1);
        for e in (0..=top).rev() {
            match coeff(a, e).cmp(&coeff(b, e)) {
                Ordering::Equal => continue,
                other => return other,
            }
        }
        Ordering::Equal
    }

    #[test]
    fn add_examples() {
        assert_eq!(ord_add(&o("w*2+3"), &o("w^2")), o("w^2"));
        assert_eq!(ord_add(&o("w^2"), &o("w*2+3")), o("w^2+w*2+3"));
        assert_eq!(ord_add(&CnfOrdinal::zero(), &o("w+1")), o("w+1"));
        assert_eq!(ord_add(&o("w^2"), &o("w^2")), o("w^2*2"));
        assert_eq!(ord_add(&o("3"), &o("4")), o("7"));
        assert_eq!(ord_add(&o("w+5"), &o("w*2+1")), o("w*3+1"));
    }

    #[test]
    fn times_omega_examples() {
        assert_eq!(times_omega(&o("w*2+3")), Ok(o("w^2")));
        assert_eq!(times_omega(&o("5")), Ok(o("w")));
        assert_eq!(times_omega(&o("w^3")), Ok(o("w^4")));
        assert_eq!(times_omega(&CnfOrdinal::zero()), Err(OrdinalError::Zero));
    }

    #[test]
    fn absorbs_examples() {
        assert!(absorbs(&o("w*2+3"), &o("w^2")));
        assert!(!absorbs(&o("w^2"), &o("w^2")));
        assert!(absorbs(&CnfOrdinal::zero(), &o("w^3+w")));
    }

    #[test]
    fn text_form() {
        assert_eq!(o("w^2*3+w*2+5").terms(), &[(2, 3), (1, 2), (0, 5)]);
        assert_eq!(o("w^2*3+w*2+5").to_string(), "w^2*3+w*2+5");
        assert_eq!(o("ω^2 + ω").to_string(), "w^2+w");
        assert_eq!(o("0"), CnfOrdinal::zero());
        assert_eq!(CnfOrdinal::zero().to_string(), "0");
        for bad in ["", "w+w^2", "w+w", "w*0", "3+w", "x", "w^", "w^-1", "1+"] {
            assert!(bad.parse::<CnfOrdinal>().is_err(), "{bad:?} accepted");
        }
    }

    #[test]
    fn enumeration_is_sorted() {
        let all = enumerate_below_power(3, 3).unwrap();
        assert_eq!(all.len(), 63);
        assert!(all.windows(2).all(|p| p[0] < p[1]));
        assert!(all.iter().all(|x| *x < CnfOrdinal::omega_pow(3)));
        assert!(enumerate_below_power(12, 8).is_err());
    }

    #[test]
    fn greedy_constant_coloring() {
        let seq = greedy_mono_sequence(&OrdinalColoring::Constant(Color::Zero), &o("w^3"), 3, 8).unwrap();
        assert_eq!(seq.sequence, vec![o("1"), o("w+1"), o("w^2+1")]);
        assert_eq!(seq.color, Color::Zero);
        let one = greedy_mono_sequence(&OrdinalColoring::Constant(Color::One), &o("w^3"), 1, 8).unwrap();
        assert_eq!(one.sequence, vec![o("1")]);
    }

    #[test]
    fn greedy_coefficient_parity() {
        let r = greedy_mono_sequence(&OrdinalColoring::CoefficientSumParity, &o("w^3"), 3, 8).unwrap();
        let s = &r.sequence;
        assert_eq!(s.len(), 3);
        for i in 0..3 {
            assert_eq!(OrdinalColoring::CoefficientSumParity.color(&s[i]), r.color);
            for j in i + 1..3 {
                assert!(absorbs(&s[i], &s[j]));
            }
        }
        assert_eq!(ord_add(&ord_add(&s[0], &s[1]), &s[2]), s[2]);
    }

    #[test]
    fn greedy_errors() {
        let c = OrdinalColoring::Constant(Color::Zero);
        assert!(matches!(greedy_mono_sequence(&c, &o("w^2"), 3, 8), Err(OrdinalError::BoundTooSmall { .. })));
        assert!(greedy_mono_sequence(&c, &o("w^3"), 0, 8).is_err());
        assert!(matches!(greedy_mono_sequence(&c, &o("w^3+1"), 4, 8), Err(OrdinalError::BoundTooSmall { .. })));
    }

    #[test]
    fn greedy_seeded_colorings() {
        for seed in 0..10 {
            let r = greedy_mono_sequence(&OrdinalColoring::SeededRandom { seed }, &o("w^4"), 4, 4).unwrap();
            assert!(fp_equals_set(&r.sequence).unwrap());
        }
    }

    #[test]
    fn fp_equals_set_examples() {
        assert!(!fp_equals_set(&[o("1"), o("2")]).unwrap());
        assert!(fp_equals_set(&[o("1")]).unwrap());
        assert!(fp_equals_set(&[o("1"), o("w+1"), o("w^2+1")]).unwrap());
        assert_eq!(fp_equals_set(&[o("2"), o("1")]), Err(OrdinalError::NotIncreasing(1)));
    }

    #[test]
    fn max_semigroup_examples() {
        let xs = [o("3"), o("w"), o("w^2")];
        assert_eq!(max_semigroup_fs(&xs), xs.to_vec());
        assert_eq!(max_semigroup_fs(&[o("5")]), vec![o("5")]);
        assert_eq!(max_semigroup_fs(&[o("5"), o("5"), o("1")]), vec![o("1"), o("5")]);
    }

    #[test]
    fn max_semigroup_random() {
        assert!(max_semigroup_scan(200, 10, 3).passed());
    }

    #[test]
    fn algebra_guard() {
        assert!(matches!(absorption_scan(4, 3), Err(OrdinalError::TooLarge { .. })));
    }

    #[test]
    fn algebra_small() {
        let r = absorption_scan(2, 2).unwrap();
        assert!(r.passed(), "{:?}", r.counterexample);
        assert!(r.applicable > 0);
    }

    fn arb_ordinal() -> impl Strategy<Value = CnfOrdinal> {
        proptest::collection::vec(0u64..4, 4).prop_map(|digits| CnfOrdinal {
            terms: digits.iter().enumerate().filter(|(_, &c)| c > 0).map(|(k, &c)| (3 - k as u32, c)).collect(),
        })
    }

    proptest! {
        #[test]
        fn ordering_matches_oracle(a in arb_ordinal(), b in arb_ordinal()) {
            prop_assert_eq!(a.cmp(&b), oracle_cmp(&a, &b));
        }

        #[test]
        fn add_is_monotone_on_the_right(a in arb_ordinal(), b in arb_ordinal(), c in arb_ordinal()) {
            if b < c {
                prop_assert!(ord_add(&a, &b) < ord_add(&a, &c));
            }
            prop_assert!(ord_add(&a, &b) >= b);
        }

        #[test]
        fn text_round_trip(a in arb_ordinal()) {
            prop_assert_eq!(a.to_string().parse::<CnfOrdinal>().unwrap(), a);
        }

        #[test]
        fn max_semigroup_is_identity(xs in proptest::collection::vec(arb_ordinal(), 1..12)) {
            let expected: Vec<CnfOrdinal> = xs.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
            prop_assert_eq!(max_semigroup_fs(&xs), expected);
        }
    }
}
