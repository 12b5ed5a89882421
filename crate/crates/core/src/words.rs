//! Reduced words in free groups and free semigroups.
//!
//! A [`Word`] is always stored reduced: no letter sits next to its inverse.
//! Free-semigroup words are the words whose letters are all positive; for
//! them concatenation never cancels and lengths simply add.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::check::CheckReport;
use crate::setcore::log_block_of;

pub type Generator = u16;

/// Longest sequence accepted by [`fp_closure`].
pub const MAX_FP_SEQUENCE: usize = 15;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("bad token {token:?} at position {position}")]
    BadToken { token: String, position: usize },
    #[error("input is not reduced: {left} followed by {right} at position {position}")]
    NotReduced { left: Letter, right: Letter, position: usize },
    #[error("support lies inside the root; no nonempty middle part")]
    NoMiddle,
    #[error("length {length} does not exceed the cancellation constant {n}")]
    LengthTooShort { length: u64, n: u64 },
    #[error("empty length list")]
    NoLengths,
    #[error("sequence of {0} words exceeds the closure limit {MAX_FP_SEQUENCE}")]
    TooLong(usize),
    #[error("invalid family: {0}")]
    BadFamily(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: Generator,
    pub inverse: bool,
}

impl Letter {
    pub fn pos(generator: Generator) -> Self {
        Letter { generator, inverse: false }
    }

    pub fn neg(generator: Generator) -> Self {
        Letter { generator, inverse: true }
    }

    pub fn inv(self) -> Self {
        Letter { generator: self.generator, inverse: !self.inverse }
    }

    fn cancels(self, other: Letter) -> bool {
        self.generator == other.generator && self.inverse != other.inverse
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inverse {
            write!(f, "g{}^-1", self.generator)
        } else {
            write!(f, "g{}", self.generator)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn empty() -> Self {
        Word::default()
    }

    /// Free reduction of an arbitrary letter sequence.
    pub fn reduce<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut stack: Vec<Letter> = Vec::new();
        for l in letters {
            match stack.last() {
                Some(top) if top.cancels(l) => {
                    stack.pop();
                }
                _ => stack.push(l),
            }
        }
        Word { letters: stack }
    }

    /// Accepts an already reduced sequence, rejecting any cancelling pair.
    pub fn from_reduced(letters: Vec<Letter>) -> Result<Self, WordError> {
        for (i, pair) in letters.windows(2).enumerate() {
            if pair[0].cancels(pair[1]) {
                return Err(WordError::NotReduced { left: pair[0], right: pair[1], position: i });
            }
        }
        Ok(Word { letters })
    }

    /// Positive word over the given generators, for free-semigroup use.
    pub fn positive(generators: &[Generator]) -> Self {
        Word { letters: generators.iter().map(|&g| Letter::pos(g)).collect() }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// `ℓ(x)`
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// True for free-semigroup words (no inverse letters).
    pub fn is_positive(&self) -> bool {
        self.letters.iter().all(|l| !l.inverse)
    }

    /// Generators occurring with either sign.
    pub fn support(&self) -> BTreeSet<Generator> {
        self.letters.iter().map(|l| l.generator).collect()
    }

    pub fn inverse(&self) -> Word {
        Word { letters: self.letters.iter().rev().map(|l| l.inv()).collect() }
    }

    /// Product `self · other`, cancelling across the junction.
    pub fn concat_reduce(&self, other: &Word) -> Word {
        let mut keep = self.letters.len();
        let mut skip = 0;
        while keep > 0 && skip < other.letters.len() && self.letters[keep - 1].cancels(other.letters[skip]) {
            keep -= 1;
            skip += 1;
        }
        let mut letters = Vec::with_capacity(keep + other.letters.len() - skip);
        letters.extend_from_slice(&self.letters[..keep]);
        letters.extend_from_slice(&other.letters[skip..]);
        Word { letters }
    }

    /// Splits `x = z·y·w` with `z` the longest prefix and `w` the longest
    /// suffix using only root generators; `y` is the nonempty middle whose
    /// first and last letters lie outside the root.
    pub fn decompose(&self, root: &BTreeSet<Generator>) -> Result<(Word, Word, Word), WordError> {
        let in_root = |l: &Letter| root.contains(&l.generator);
        let start = self.letters.iter().position(|l| !in_root(l)).ok_or(WordError::NoMiddle)?;
        let end = self.letters.iter().rposition(|l| !in_root(l)).expect("some letter is outside the root") + 1;
        Ok((
            Word { letters: self.letters[..start].to_vec() },
            Word { letters: self.letters[start..end].to_vec() },
            Word { letters: self.letters[end..].to_vec() },
        ))
    }
}

pub fn word_support(x: &Word) -> BTreeSet<Generator> {
    x.support()
}

pub fn concat_reduce(x: &Word, y: &Word) -> Word {
    x.concat_reduce(y)
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "ε");
        }
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Parses `g0 g1^-1 g0`; `ε` or blank input is the empty word. Unreduced
/// input is rejected rather than silently reduced.
impl FromStr for Word {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut letters = Vec::new();
        for (position, token) in s.split_whitespace().enumerate() {
            if token == "ε" {
                continue;
            }
            let bad = || WordError::BadToken { token: token.to_string(), position };
            let body = token.strip_prefix('g').ok_or_else(bad)?;
            let (digits, inverse) = match body.strip_suffix("^-1") {
                Some(d) => (d, true),
                None => (body, false),
            };
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let generator: Generator = digits.parse().map_err(|_| bad())?;
            letters.push(Letter { generator, inverse });
        }
        Word::from_reduced(letters)
    }
}

/// All `2^m - 1` products over strictly increasing index tuples, in
/// index-mask order. Factor order follows index order.
pub fn fp_closure(sequence: &[Word]) -> Result<Vec<Word>, WordError> {
    let m = sequence.len();
    if m > MAX_FP_SEQUENCE {
        return Err(WordError::TooLong(m));
    }
    let mut out: Vec<Word> = Vec::with_capacity((1 << m) - 1);
    for mask in 1usize..(1 << m) {
        // the highest index is the last factor
        let top = usize::BITS as usize - 1 - mask.leading_zeros() as usize;
        let rest = mask & !(1 << top);
        let p = if rest == 0 { sequence[top].clone() } else { out[rest - 1].concat_reduce(&sequence[top]) };
        out.push(p);
    }
    Ok(out)
}

/// `Σ lengths − t·n` for a product of `t + 1` factors that all share the
/// fixed ends `z`, `w` with cancellation constant `n`.
pub fn product_length_formula(lengths: &[u64], n: u64) -> Result<u64, WordError> {
    if lengths.is_empty() {
        return Err(WordError::NoLengths);
    }
    if let Some(&short) = lengths.iter().find(|&&l| l <= n) {
        return Err(WordError::LengthTooShort { length: short, n });
    }
    let t = lengths.len() as u64 - 1;
    Ok(lengths.iter().sum::<u64>() - t * n)
}

/// Members `x_i = z·y_i·w` sharing fixed ends over a root alphabet.
///
/// The middles have first and last letters outside the root, and their
/// non-root generators are pairwise disjoint, so in any product
/// `x_{i0}⋯x_{it}` cancellation happens only inside each `w·z` junction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedFamily {
    root: BTreeSet<Generator>,
    z: Word,
    w: Word,
    members: Vec<Word>,
}

impl RootedFamily {
    pub fn new(root: BTreeSet<Generator>, z: Word, w: Word, middles: &[Word]) -> Result<Self, WordError> {
        let bad = |m: String| Err(WordError::BadFamily(m));
        if !z.support().is_subset(&root) || !w.support().is_subset(&root) {
            return bad("z and w must use root generators only".into());
        }
        let mut seen: BTreeSet<Generator> = BTreeSet::new();
        let mut members = Vec::with_capacity(middles.len());
        for y in middles {
            let (Some(first), Some(last)) = (y.letters.first(), y.letters.last()) else {
                return bad("empty middle".into());
            };
            if root.contains(&first.generator) || root.contains(&last.generator) {
                return bad(format!("middle {y} starts or ends inside the root"));
            }
            let own: BTreeSet<Generator> = y.support().difference(&root).copied().collect();
            if !own.is_disjoint(&seen) {
                return bad(format!("middle {y} shares a non-root generator with an earlier member"));
            }
            seen.extend(own);
            members.push(z.concat_reduce(y).concat_reduce(&w));
        }
        Ok(RootedFamily { root, z, w, members })
    }

    pub fn members(&self) -> &[Word] {
        &self.members
    }

    pub fn root(&self) -> &BTreeSet<Generator> {
        &self.root
    }

    /// `n = ℓ(w) + ℓ(z) − ℓ(v)` with `v` the reduced form of `w·z`.
    pub fn cancellation_constant(&self) -> u64 {
        let v = self.w.concat_reduce(&self.z);
        (self.w.len() + self.z.len() - v.len()) as u64
    }

    /// Compares every increasing-index product's reduced length with the
    /// formula. Returns the first mismatch.
    pub fn check_formula(&self) -> Result<Option<String>, WordError> {
        let n = self.cancellation_constant();
        let products = fp_closure(&self.members)?;
        for (k, p) in products.iter().enumerate() {
            let mask = k + 1;
            let lengths: Vec<u64> = (0..self.members.len())
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| self.members[i].len() as u64)
                .collect();
            let predicted = product_length_formula(&lengths, n)?;
            if predicted != p.len() as u64 {
                return Ok(Some(format!(
                    "z={} w={} members={:?} mask={mask}: reduced length {} vs formula {predicted}",
                    self.z,
                    self.w,
                    self.members.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
                    p.len()
                )));
            }
        }
        Ok(None)
    }
}

/// All reduced words of length `1..=max_len` over `alphabet`, in
/// length-then-lexicographic order. `first`/`last` filter the end letters.
pub fn reduced_words(alphabet: &[Generator], max_len: usize, end_ok: impl Fn(Letter) -> bool) -> Vec<Word> {
    let letters: Vec<Letter> = alphabet.iter().flat_map(|&g| [Letter::pos(g), Letter::neg(g)]).collect();
    let mut out = Vec::new();
    let mut layer: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for prefix in &layer {
            for &l in &letters {
                if prefix.last().is_some_and(|p| p.cancels(l)) {
                    continue;
                }
                if prefix.is_empty() && !end_ok(l) {
                    continue;
                }
                let mut w = prefix.clone();
                w.push(l);
                next.push(w);
            }
        }
        for w in &next {
            if end_ok(*w.last().expect("nonempty")) {
                out.push(Word { letters: w.clone() });
            }
        }
        layer = next;
    }
    out
}

fn random_reduced(rng: &mut ChaCha8Rng, alphabet: &[Generator], len: usize, ends: &[Generator]) -> Word {
    // rejection-free: draw letter by letter, avoiding cancellation and
    // forcing end letters from `ends`
    let mut letters: Vec<Letter> = Vec::with_capacity(len);
    for i in 0..len {
        let pool = if i == 0 || i + 1 == len { ends } else { alphabet };
        loop {
            let g = *pool.choose(rng).expect("nonempty pool");
            let l = Letter { generator: g, inverse: rng.gen() };
            if letters.last().is_some_and(|p| p.cancels(l)) {
                continue;
            }
            letters.push(l);
            break;
        }
    }
    Word { letters }
}

/// Randomized formula-versus-reduction check on `trials` rooted families.
pub fn length_formula_random_scan(trials: u64, seed: u64) -> Result<CheckReport, WordError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport::new();
    for _ in 0..trials {
        let root_size = rng.gen_range(0..=3u16);
        let root_gens: Vec<Generator> = (0..root_size).collect();
        let (z_len, w_len) = if root_size == 0 { (0, 0) } else { (rng.gen_range(0..=4), rng.gen_range(0..=4)) };
        let z = random_reduced(&mut rng, &root_gens, z_len, &root_gens);
        let w = random_reduced(&mut rng, &root_gens, w_len, &root_gens);
        let k = rng.gen_range(1..=5);
        let mut next_gen = root_size;
        let mut middles = Vec::with_capacity(k);
        for _ in 0..k {
            let own_count = rng.gen_range(1..=2);
            let own: Vec<Generator> = (next_gen..next_gen + own_count).collect();
            next_gen += own_count;
            let mut pool = own.clone();
            pool.extend_from_slice(&root_gens);
            let len = rng.gen_range(1..=5);
            middles.push(random_reduced(&mut rng, &pool, len, &own));
        }
        let root: BTreeSet<Generator> = root_gens.iter().copied().collect();
        let family = RootedFamily::new(root, z, w, &middles)?;
        report.checked += 1;
        report.applicable += (1 << k) - 1;
        if let Some(bad) = family.check_formula()? {
            report.fail(|| bad);
        }
    }
    Ok(report)
}

/// Length of the free reduction of the concatenated parts, reusing `buf`.
fn reduced_len(buf: &mut Vec<Letter>, parts: &[&Word]) -> usize {
    buf.clear();
    for part in parts {
        for &l in &part.letters {
            match buf.last() {
                Some(top) if top.cancels(l) => {
                    buf.pop();
                }
                _ => buf.push(l),
            }
        }
    }
    buf.len()
}

/// Exhaustive formula-versus-reduction check over an alphabet of
/// `alphabet_size` generators: every root, every pair of fixed ends over the
/// root, and every ordered pair (and, with `triples`, every ordered triple)
/// of members `z·y·w` of length at most `max_len` with pairwise disjoint
/// non-root generators.
pub fn length_formula_exhaustive_scan(
    alphabet_size: u16,
    max_len: usize,
    triples: bool,
) -> Result<CheckReport, WordError> {
    let mut report = CheckReport::new();
    let alphabet: Vec<Generator> = (0..alphabet_size).collect();
    for root_mask in 0u32..(1 << alphabet_size) - 1 {
        let root: BTreeSet<Generator> = alphabet.iter().copied().filter(|g| root_mask & (1 << g) != 0).collect();
        let root_gens: Vec<Generator> = root.iter().copied().collect();
        let mut ends = reduced_words(&root_gens, max_len.saturating_sub(1), |_| true);
        ends.insert(0, Word::empty());
        for z in &ends {
            for w in &ends {
                if z.len() + w.len() >= max_len {
                    continue;
                }
                let n = (w.len() + z.len() - w.concat_reduce(z).len()) as u64;
                let middles = reduced_words(&alphabet, max_len - z.len() - w.len(), |l| !root.contains(&l.generator));
                let members: Vec<(Word, u32)> = middles
                    .iter()
                    .map(|y| {
                        let own = y.letters.iter().filter(|l| !root.contains(&l.generator));
                        (z.concat_reduce(y).concat_reduce(w), own.fold(0u32, |m, l| m | 1 << l.generator))
                    })
                    .collect();
                let mut groups: std::collections::BTreeMap<u32, Vec<usize>> = Default::default();
                for (i, (_, m)) in members.iter().enumerate() {
                    groups.entry(*m).or_default().push(i);
                }
                let groups: Vec<(u32, Vec<usize>)> = groups.into_iter().collect();

                let part = members
                    .par_iter()
                    .map(|(xi, mi)| {
                        let mut local = CheckReport::new();
                        let mut buf = Vec::new();
                        let mut check = |xs: &[&Word], local: &mut CheckReport| {
                            let mut lengths = [0u64; 3];
                            for (l, x) in lengths.iter_mut().zip(xs) {
                                *l = x.len() as u64;
                            }
                            let actual = reduced_len(&mut buf, xs) as u64;
                            local.checked += 1;
                            local.applicable += 1;
                            if product_length_formula(&lengths[..xs.len()], n) != Ok(actual) {
                                local.fail(|| {
                                    let shown: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
                                    format!("z={z} w={w} product of {shown:?} reduces to length {actual}")
                                });
                            }
                        };
                        for (mj, js) in groups.iter().filter(|(m, _)| m & mi == 0) {
                            for &j in js {
                                check(&[xi, &members[j].0], &mut local);
                            }
                            if !triples {
                                continue;
                            }
                            for (_, ks) in groups.iter().filter(|(m, _)| m & (mi | mj) == 0) {
                                for &j in js {
                                    for &k in ks {
                                        check(&[xi, &members[j].0, &members[k].0], &mut local);
                                    }
                                }
                            }
                        }
                        local
                    })
                    .reduce(CheckReport::new, CheckReport::merge);
                report = CheckReport::merge(report, part);
            }
        }
    }
    Ok(report)
}

/// For every `l ≤ max_l` and `n < l`, with `k = ⌊log₂ l⌋` and
/// `m = ⌊log₂ (l − n)⌋`, the product of `2^(k−m) + 1` factors of length `l`
/// has length `2^(k−m)(l − n) + l`, inside `[2^(k+1), 2^(k+2))`.
pub fn block_flip_inequality_scan(max_l: u64) -> Result<CheckReport, WordError> {
    let mut report = CheckReport::new();
    for l in 1..=max_l {
        for n in 0..l {
            report.checked += 1;
            report.applicable += 1;
            let k = log_block_of(l).expect("l > 0");
            let m = log_block_of(l - n).expect("l > n");
            let factors = (1u64 << (k - m)) + 1;
            let len = product_length_formula(&vec![l; factors as usize], n)?;
            let closed = (1u64 << (k - m)) * (l - n) + l;
            if len != closed || !((1u64 << (k + 1))..(1u64 << (k + 2))).contains(&len) {
                report.fail(|| format!("l={l} n={n}: length {len}, closed form {closed}"));
            }
        }
    }
    Ok(report)
}
