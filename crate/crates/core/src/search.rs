//! Search for large pairwise disjoint families whose finite-union closure
//! is monochromatic, together with the exhaustive oracles used to check it.
//!
//! The main search is a branch-and-bound over candidate sets ordered by
//! `(size, bit pattern)`. A partial family is extended by a set `s` only if
//! `s` is disjoint from every member and `s` together with `s ∪ c`, for every
//! already realized union `c`, has the family color. Every new finite union
//! has one of those shapes, so the closure stays monochromatic by induction.
//!
//! Colorings that depend only on set size (log-parity) are searched up to
//! permutations of the universe: a family is then a nondecreasing list of
//! member sizes, and the witness is laid out as consecutive blocks.

use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::check::CheckReport;
use crate::colorings::{log_parity, Color, ColoringError, SetColoring};
use crate::setcore::{DisjointFamily, FinSet, SetError, Universe, MAX_CLOSURE_MEMBERS};

/// Largest universe searched without symmetry reduction (every subset gets
/// a precomputed color).
pub const MAX_GENERIC_UNIVERSE: u32 = 20;

/// Limits of [`brute_force_oracle`].
pub const ORACLE_MAX_UNIVERSE: u32 = 12;
pub const ORACLE_MAX_TARGET: usize = 4;

/// Limit of [`min_universe_for_mono_pair`]: `2^(2^n - 1)` colorings per `n`.
pub const THRESHOLD_MAX_N: u32 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("invalid search config: {0}")]
    Config(String),
    #[error("{what} limit exceeded: {got} > {limit}")]
    Guard { what: &'static str, got: u64, limit: u64 },
    #[error("witness {0} failed the independent recheck")]
    WitnessRecheck(String),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
    #[error(transparent)]
    Set(#[from] SetError),
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub universe: Universe,
    pub coloring: SetColoring,
    /// Stop as soon as a family of this size is found.
    pub target_size: Option<usize>,
    pub max_family_size: usize,
    pub time_budget: Option<Duration>,
    pub thread_count: usize,
    /// Search up to universe permutations when the coloring allows it.
    pub symmetry_pruning: bool,
}

impl SearchConfig {
    pub fn new(universe: Universe, coloring: SetColoring) -> Self {
        SearchConfig {
            universe,
            coloring,
            target_size: None,
            max_family_size: MAX_CLOSURE_MEMBERS,
            time_budget: None,
            thread_count: 1,
            symmetry_pruning: true,
        }
    }

    pub fn threads(mut self, n: usize) -> Self {
        self.thread_count = n;
        self
    }

    pub fn target(mut self, t: usize) -> Self {
        self.target_size = Some(t);
        self
    }

    pub fn budget(mut self, d: Duration) -> Self {
        self.time_budget = Some(d);
        self
    }

    pub fn without_symmetry(mut self) -> Self {
        self.symmetry_pruning = false;
        self
    }

    fn uses_sizes_only(&self) -> bool {
        self.symmetry_pruning && self.coloring.is_permutation_invariant()
    }

    fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: String| Err(SearchError::Config(m));
        if self.max_family_size == 0 || self.max_family_size > MAX_CLOSURE_MEMBERS {
            return bad(format!("max_family_size must be in 1..={MAX_CLOSURE_MEMBERS}"));
        }
        if self.thread_count == 0 {
            return bad("thread_count must be positive".into());
        }
        if self.target_size == Some(0) {
            return bad("target_size must be positive".into());
        }
        if !self.uses_sizes_only() && self.universe.size() > MAX_GENERIC_UNIVERSE {
            return bad(format!(
                "universe {} too large for a coloring without symmetry reduction (max {MAX_GENERIC_UNIVERSE})",
                self.universe.size()
            ));
        }
        if let SetColoring::Table { universe, .. } = &self.coloring {
            if *universe != self.universe {
                return bad("table coloring covers a different universe".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchResult {
    pub max_size: usize,
    pub witness: Option<DisjointFamily>,
    #[serde(rename = "color")]
    pub witness_color: Option<Color>,
    #[serde(rename = "nodes")]
    pub nodes_expanded: u64,
    /// `true` when the whole space was searched, so `max_size` is exact
    /// (subject to `max_family_size`); otherwise it is a lower bound.
    pub exhausted: bool,
}

/// Recomputes the finite-union closure of `family` from scratch and
/// recolors every union.
pub fn recheck_witness(coloring: &SetColoring, family: &DisjointFamily, color: Color) -> bool {
    let Ok(closure) = family.fu_closure() else {
        return false;
    };
    closure.iter().all(|s| coloring.color(*s) == Ok(color))
}

struct Shared {
    best_len: AtomicUsize,
    nodes: AtomicU64,
    timed_out: AtomicBool,
    target_hit: AtomicBool,
    deadline: Option<Instant>,
}

impl Shared {
    fn halted(&self) -> bool {
        self.timed_out.load(Ordering::Relaxed) || self.target_hit.load(Ordering::Relaxed)
    }
}

/// Per-task DFS state; confined to one thread.
struct Branch<'a> {
    shared: &'a Shared,
    max_len: usize,
    target: Option<usize>,
    members: Vec<u64>,
    closure: Vec<u64>,
    color: Color,
    best: Option<(Vec<u64>, Color)>,
    nodes: u64,
}

impl<'a> Branch<'a> {
    fn new(shared: &'a Shared, cfg: &SearchConfig) -> Self {
        Branch {
            shared,
            max_len: cfg.max_family_size,
            target: cfg.target_size,
            members: Vec::new(),
            closure: Vec::new(),
            color: Color::Zero,
            best: None,
            nodes: 0,
        }
    }

    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes.is_multiple_of(256) {
            if let Some(d) = self.shared.deadline {
                if Instant::now() >= d {
                    self.shared.timed_out.store(true, Ordering::Relaxed);
                }
            }
        }
        !self.shared.halted()
    }

    /// Accepts the current family as a new best if it beats the global one.
    fn offer(&mut self) {
        let len = self.members.len();
        if len > self.shared.best_len.fetch_max(len, Ordering::Relaxed) {
            self.best = Some((self.members.clone(), self.color));
        }
        if self.target.is_some_and(|t| len >= t) {
            self.shared.target_hit.store(true, Ordering::Relaxed);
        }
    }

    /// Pushes `value` (a set mask or a size) and the new closure elements
    /// produced by `join`, returning the old closure length.
    fn push(&mut self, value: u64, join: impl Fn(u64, u64) -> u64) -> usize {
        let old = self.closure.len();
        for i in 0..old {
            let u = join(self.closure[i], value);
            self.closure.push(u);
        }
        self.closure.push(value);
        self.members.push(value);
        old
    }

    fn pop(&mut self, old: usize) {
        self.closure.truncate(old);
        self.members.pop();
    }

    fn prunable(&self, extra: usize) -> bool {
        let reachable = (self.members.len() + extra).min(self.max_len);
        reachable <= self.shared.best_len.load(Ordering::Relaxed)
    }
}

/// Candidate sets sorted by `(size, bits)` with precomputed colors.
struct GenericSpace {
    cands: Vec<u64>,
    colors: Vec<Color>,
    full: u64,
}

impl GenericSpace {
    fn build(cfg: &SearchConfig) -> Result<Self, SearchError> {
        let u = cfg.universe;
        let full = u.full_mask();
        let colors = (0..=full)
            .into_par_iter()
            .map(|bits| if bits == 0 { Ok(Color::Zero) } else { cfg.coloring.color(u.set_from_bits(bits)?) })
            .collect::<Result<Vec<_>, ColoringError>>()?;
        let mut cands: Vec<u64> = (1..=full).collect();
        cands.sort_by_key(|b| (b.count_ones(), *b));
        Ok(GenericSpace { cands, colors, full })
    }

    fn dfs(&self, br: &mut Branch, start: usize, used: u64) {
        let free = self.full & !used;
        let free_count = free.count_ones();
        for i in start..self.cands.len() {
            let s = self.cands[i];
            let size = s.count_ones();
            if size > free_count {
                break;
            }
            if s & used != 0 {
                continue;
            }
            let c = self.colors[s as usize];
            if !br.members.is_empty() && c != br.color {
                continue;
            }
            if br.closure.iter().any(|&u| self.colors[(u | s) as usize] != c) {
                continue;
            }
            if !br.tick() {
                return;
            }
            if br.members.is_empty() {
                br.color = c;
            }
            let old = br.push(s, |a, b| a | b);
            br.offer();
            let left = (free_count - size) / size;
            if br.members.len() < br.max_len && !br.prunable(left as usize) && !br.shared.halted() {
                self.dfs(br, i + 1, used | s);
            }
            br.pop(old);
            if br.shared.halted() {
                return;
            }
        }
    }

    fn run_task(&self, br: &mut Branch, first: usize) {
        let s = self.cands[first];
        if !br.tick() {
            return;
        }
        br.color = self.colors[s as usize];
        let old = br.push(s, |a, b| a | b);
        br.offer();
        let size = s.count_ones();
        let left = (self.full.count_ones() - size) / size;
        if br.max_len > 1 && !br.prunable(left as usize) {
            self.dfs(br, first + 1, s);
        }
        br.pop(old);
    }
}

/// Search over nondecreasing member-size lists for size-only colorings.
struct SizeSpace {
    n: u64,
}

impl SizeSpace {
    fn color(size: u64) -> Color {
        log_parity(size).expect("sizes are positive")
    }

    fn dfs(&self, br: &mut Branch, min_size: u64, total: u64) {
        let free = self.n - total;
        for s in min_size..=free {
            let c = Self::color(s);
            if c != br.color {
                continue;
            }
            if br.closure.iter().any(|&u| Self::color(u + s) != c) {
                continue;
            }
            if !br.tick() {
                return;
            }
            let old = br.push(s, |a, b| a + b);
            br.offer();
            let left = (free - s) / s;
            if br.members.len() < br.max_len && !br.prunable(left as usize) && !br.shared.halted() {
                self.dfs(br, s, total + s);
            }
            br.pop(old);
            if br.shared.halted() {
                return;
            }
        }
    }

    fn run_task(&self, br: &mut Branch, first: u64) {
        if !br.tick() {
            return;
        }
        br.color = Self::color(first);
        let old = br.push(first, |a, b| a + b);
        br.offer();
        let left = (self.n - first) / first;
        if br.max_len > 1 && !br.prunable(left as usize) {
            self.dfs(br, first, first);
        }
        br.pop(old);
    }

    /// Lays sizes out as consecutive blocks `{0..s0-1}, {s0..s0+s1-1}, ...`.
    fn witness(universe: Universe, sizes: &[u64]) -> Result<DisjointFamily, SetError> {
        let mut start = 0;
        let mut members = Vec::with_capacity(sizes.len());
        for &s in sizes {
            members.push(universe.make_set(start..start + s)?);
            start += s;
        }
        DisjointFamily::new(members)
    }
}

/// Finds a largest pairwise disjoint family whose finite-union closure is
/// monochromatic under `cfg.coloring`.
///
/// With one thread the result, witness included, is a deterministic
/// function of the config. With more threads the first-member choices are
/// split across workers sharing one best-size cell; `max_size` and
/// `exhausted` are unchanged but the witness may differ.
pub fn max_mono_fu_family(cfg: &SearchConfig) -> Result<SearchResult, SearchError> {
    cfg.validate()?;
    let shared = Shared {
        best_len: AtomicUsize::new(0),
        nodes: AtomicU64::new(0),
        timed_out: AtomicBool::new(false),
        target_hit: AtomicBool::new(false),
        deadline: cfg.time_budget.map(|d| Instant::now() + d),
    };

    type TaskBest = Option<(Vec<u64>, Color)>;
    let sizes_only = cfg.uses_sizes_only();
    let generic = if sizes_only { None } else { Some(GenericSpace::build(cfg)?) };
    let sizes = SizeSpace { n: cfg.universe.size() as u64 };
    let task_count = match &generic {
        Some(g) => g.cands.len(),
        None => sizes.n as usize,
    };
    let run = |task: usize| -> TaskBest {
        if shared.halted() {
            return None;
        }
        let mut br = Branch::new(&shared, cfg);
        match &generic {
            Some(g) => g.run_task(&mut br, task),
            None => sizes.run_task(&mut br, task as u64 + 1),
        }
        shared.nodes.fetch_add(br.nodes, Ordering::Relaxed);
        br.best
    };
    let results: Vec<TaskBest> = if cfg.thread_count == 1 {
        (0..task_count).map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.thread_count)
            .build()
            .map_err(|e| SearchError::Config(e.to_string()))?;
        pool.install(|| (0..task_count).into_par_iter().map(run).collect())
    };

    // largest wins; ties go to the earliest task
    let mut best: TaskBest = None;
    for r in results.into_iter().flatten() {
        if best.as_ref().is_none_or(|b| r.0.len() > b.0.len()) {
            best = Some(r);
        }
    }

    let (witness, color) = match best {
        None => (None, None),
        Some((members, color)) => {
            let fam = if sizes_only {
                SizeSpace::witness(cfg.universe, &members)?
            } else {
                let sets = members.iter().map(|b| cfg.universe.set_from_bits(*b)).collect::<Result<Vec<_>, _>>()?;
                DisjointFamily::new(sets)?
            };
            if !recheck_witness(&cfg.coloring, &fam, color) {
                return Err(SearchError::WitnessRecheck(fam.to_string()));
            }
            (Some(fam), Some(color))
        }
    };
    Ok(SearchResult {
        max_size: witness.as_ref().map_or(0, |w| w.len()),
        witness,
        witness_color: color,
        nodes_expanded: shared.nodes.load(Ordering::Relaxed),
        exhausted: !shared.halted(),
    })
}

/// Exhaustive enumeration of all families of exactly `target` pairwise
/// disjoint nonempty sets, members increasing as bit patterns. Returns the
/// first whose closure (recomputed in full) is monochromatic.
pub fn brute_force_oracle(
    universe: Universe,
    coloring: &SetColoring,
    target: usize,
) -> Result<Option<DisjointFamily>, SearchError> {
    if universe.size() > ORACLE_MAX_UNIVERSE {
        return Err(SearchError::Guard {
            what: "oracle universe",
            got: universe.size() as u64,
            limit: ORACLE_MAX_UNIVERSE as u64,
        });
    }
    if target == 0 || target > ORACLE_MAX_TARGET {
        return Err(SearchError::Guard { what: "oracle target", got: target as u64, limit: ORACLE_MAX_TARGET as u64 });
    }

    fn go(
        universe: Universe,
        coloring: &SetColoring,
        target: usize,
        chosen: &mut Vec<FinSet>,
        next: u64,
        used: u64,
    ) -> Result<Option<DisjointFamily>, SearchError> {
        if chosen.len() == target {
            let fam = DisjointFamily::new(chosen.clone())?;
            let closure = fam.fu_closure()?;
            return Ok(coloring.is_monochromatic(&closure)?.map(|_| fam));
        }
        for bits in next..=universe.full_mask() {
            if bits & used != 0 {
                continue;
            }
            chosen.push(universe.set_from_bits(bits)?);
            let found = go(universe, coloring, target, chosen, bits + 1, used | bits)?;
            chosen.pop();
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }

    go(universe, coloring, target, &mut Vec::with_capacity(target), 1, 0)
}

/// Scans every disjoint family of at most four sets whose finite-union
/// closure is monochromatic under log-parity, and checks that the members'
/// log blocks are pairwise distinct.
pub fn block_injectivity_scan(universe: Universe) -> Result<CheckReport, SearchError> {
    if universe.size() > ORACLE_MAX_UNIVERSE {
        return Err(SearchError::Guard {
            what: "injectivity universe",
            got: universe.size() as u64,
            limit: ORACLE_MAX_UNIVERSE as u64,
        });
    }
    let mut report = CheckReport::new();
    let mut members = Vec::with_capacity(4);
    let mut closure = Vec::with_capacity(15);
    injectivity_step(universe, &mut report, &mut members, &mut closure, 1, 0);
    Ok(report)
}

fn injectivity_step(
    universe: Universe,
    report: &mut CheckReport,
    members: &mut Vec<FinSet>,
    closure: &mut Vec<FinSet>,
    next: u64,
    used: u64,
) {
    if members.len() == 4 {
        return;
    }
    for bits in next..=universe.full_mask() {
        if bits & used != 0 {
            continue;
        }
        let s = universe.set_from_bits(bits).expect("in range");
        let old = closure.len();
        for i in 0..old {
            let u = closure[i].disjoint_union(s).expect("disjoint");
            closure.push(u);
        }
        closure.push(s);
        members.push(s);
        report.checked += 1;
        // a monochromatic closure has monochromatic subclosures, so
        // non-monochromatic prefixes are not extended
        let mono = matches!(SetColoring::LogParity.is_monochromatic(closure), Ok(Some(_)));
        if mono {
            report.applicable += 1;
            let blocks: Vec<u32> = members.iter().map(|m| m.log_block().expect("nonempty")).collect();
            let distinct = blocks.iter().enumerate().all(|(i, b)| !blocks[..i].contains(b));
            if !distinct {
                report.fail(|| format!("family {members:?} has blocks {blocks:?}"));
            }
            injectivity_step(universe, report, members, closure, bits + 1, used | bits);
        }
        members.pop();
        closure.truncate(old);
    }
}

/// `true` iff no monochromatic-closure family of size at most four repeats
/// a log block.
pub fn verify_block_injectivity(universe: Universe) -> Result<bool, SearchError> {
    Ok(block_injectivity_scan(universe)?.passed())
}

/// Two implementations of "this coloring admits disjoint nonempty `x, y`
/// with `x`, `y`, `x ∪ y` all one color".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MonoPairMethod {
    /// Builds a table coloring and walks set pairs through the public API.
    Naive,
    /// Precomputed triple masks tested against the packed coloring word.
    Bitmask,
}

/// Packed coloring of the nonempty subsets of `{0..n-1}`: bit `s - 1` is
/// the color of the set with bit pattern `s`.
pub fn has_mono_pair_naive(n: u32, packed: u64) -> Result<bool, SearchError> {
    let universe = Universe::new(n)?;
    let coloring =
        SetColoring::tabulate(universe, |s| if packed >> (s.bits() - 1) & 1 == 0 { Color::Zero } else { Color::One })?;
    for x in universe.nonempty_subsets() {
        for y in universe.nonempty_subsets() {
            if y.bits() <= x.bits() || !x.is_disjoint(y) {
                continue;
            }
            let z = x.disjoint_union(y)?;
            if coloring.is_monochromatic(&[x, y, z])?.is_some() {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Masks of `{x, y, x ∪ y}` over coloring bit positions, one per unordered
/// disjoint pair.
pub fn mono_pair_masks(n: u32) -> Vec<u64> {
    let full = (1u64 << n) - 1;
    let mut out = Vec::new();
    for x in 1..=full {
        for y in (x + 1)..=full {
            if x & y == 0 {
                out.push(1 << (x - 1) | 1 << (y - 1) | 1 << ((x | y) - 1));
            }
        }
    }
    out
}

pub fn has_mono_pair_bitmask(masks: &[u64], packed: u64) -> bool {
    masks.iter().any(|&t| packed & t == 0 || packed & t == t)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThresholdRow {
    pub n: u32,
    pub colorings: u64,
    /// Colorings with no monochromatic `x, y, x ∪ y`.
    pub avoiding: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThresholdResult {
    pub threshold: Option<u32>,
    pub rows: Vec<ThresholdRow>,
}

/// Smallest `n ≤ max_n` such that every two-coloring of the nonempty
/// subsets of `{0..n-1}` has disjoint nonempty `x, y` with `x`, `y`, `x ∪ y`
/// monochromatic.
pub fn min_universe_for_mono_pair_with(max_n: u32, method: MonoPairMethod) -> Result<ThresholdResult, SearchError> {
    if max_n == 0 {
        return Err(SearchError::Config("max_n must be positive".into()));
    }
    if max_n > THRESHOLD_MAX_N {
        return Err(SearchError::Guard { what: "threshold max_n", got: max_n as u64, limit: THRESHOLD_MAX_N as u64 });
    }
    let mut rows = Vec::new();
    for n in 1..=max_n {
        let colorings = 1u64 << ((1u64 << n) - 1);
        let avoiding = match method {
            MonoPairMethod::Bitmask => {
                let masks = mono_pair_masks(n);
                (0..colorings).into_par_iter().filter(|&c| !has_mono_pair_bitmask(&masks, c)).count() as u64
            }
            MonoPairMethod::Naive => {
                let mut count = 0;
                for c in 0..colorings {
                    if !has_mono_pair_naive(n, c)? {
                        count += 1;
                    }
                }
                count
            }
        };
        rows.push(ThresholdRow { n, colorings, avoiding });
        if avoiding == 0 {
            return Ok(ThresholdResult { threshold: Some(n), rows });
        }
    }
    Ok(ThresholdResult { threshold: None, rows })
}

pub fn min_universe_for_mono_pair(max_n: u32) -> Result<Option<u32>, SearchError> {
    Ok(min_universe_for_mono_pair_with(max_n, MonoPairMethod::Bitmask)?.threshold)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(n: u32) -> Universe {
        Universe::new(n).unwrap()
    }

    fn log_search(n: u32) -> SearchResult {
        max_mono_fu_family(&SearchConfig::new(u(n), SetColoring::LogParity)).unwrap()
    }

    #[test]
    fn log_parity_examples() {
        let r4 = log_search(4);
        assert_eq!((r4.max_size, r4.exhausted), (1, true));
        let r5 = log_search(5);
        assert_eq!((r5.max_size, r5.exhausted), (2, true));
        assert_eq!(r5.witness.unwrap().sizes(), vec![1, 4]);
        let r21 = log_search(21);
        assert_eq!((r21.max_size, r21.exhausted), (3, true));
        let w = r21.witness.unwrap();
        assert_eq!(w.sizes(), vec![1, 4, 16]);
        assert_eq!(r21.witness_color, Some(Color::Zero));
    }

    #[test]
    fn generic_search_matches_sizes_only_search() {
        for n in 1..=10 {
            let a = log_search(n);
            let b = max_mono_fu_family(&SearchConfig::new(u(n), SetColoring::LogParity).without_symmetry()).unwrap();
            assert_eq!(a.max_size, b.max_size, "n={n}");
            assert!(b.exhausted);
            assert!(recheck_witness(&SetColoring::LogParity, b.witness.as_ref().unwrap(), b.witness_color.unwrap()));
        }
    }

    #[test]
    fn log_parity_monotone_and_bounded() {
        let mut prev = 0;
        for n in 1..=40 {
            let r = log_search(n);
            assert!(r.exhausted);
            assert!(r.max_size >= prev, "not monotone at n={n}");
            let bound = (31 - n.leading_zeros()) as usize + 1;
            assert!(r.max_size <= bound, "n={n}: {} > {bound}", r.max_size);
            prev = r.max_size;
        }
    }

    #[test]
    fn oracle_examples() {
        let lp = SetColoring::LogParity;
        let f = brute_force_oracle(u(5), &lp, 2).unwrap().unwrap();
        let mut sizes = f.sizes();
        sizes.sort();
        assert_eq!(sizes, vec![1, 4]);
        assert_eq!(brute_force_oracle(u(4), &lp, 2).unwrap(), None);
        let any = SetColoring::SeededRandom { seed: 9 };
        let single = brute_force_oracle(u(3), &any, 1).unwrap().unwrap();
        assert_eq!(single.len(), 1);
        assert!(brute_force_oracle(u(13), &lp, 1).is_err());
        assert!(brute_force_oracle(u(5), &lp, 5).is_err());
    }

    #[test]
    fn injectivity_examples() {
        assert_eq!(verify_block_injectivity(u(1)), Ok(true));
        assert_eq!(verify_block_injectivity(u(4)), Ok(true));
        let r = block_injectivity_scan(u(6)).unwrap();
        assert!(r.passed());
        assert!(r.applicable > 0);
    }

    #[test]
    fn parallel_search_agrees() {
        for seed in 0..4 {
            let cfg = SearchConfig::new(u(7), SetColoring::SeededRandom { seed });
            let one = max_mono_fu_family(&cfg).unwrap();
            let again = max_mono_fu_family(&cfg).unwrap();
            assert_eq!(one, again);
            let many = max_mono_fu_family(&cfg.clone().threads(4)).unwrap();
            assert_eq!((one.max_size, one.exhausted), (many.max_size, many.exhausted));
            let w = many.witness.unwrap();
            assert!(recheck_witness(&cfg.coloring, &w, many.witness_color.unwrap()));
        }
    }

    #[test]
    fn target_and_budget_stop_early() {
        let cfg = SearchConfig::new(u(8), SetColoring::SeededRandom { seed: 1 }).target(1);
        let r = max_mono_fu_family(&cfg).unwrap();
        assert_eq!(r.max_size, 1);
        assert!(!r.exhausted);

        let cfg = SearchConfig::new(u(20), SetColoring::SeededRandom { seed: 1 }).budget(Duration::from_millis(1));
        let r = max_mono_fu_family(&cfg).unwrap();
        assert!(!r.exhausted);
    }

    #[test]
    fn config_errors() {
        let mut cfg = SearchConfig::new(u(8), SetColoring::LogParity);
        cfg.max_family_size = 21;
        assert!(matches!(max_mono_fu_family(&cfg), Err(SearchError::Config(_))));
        let cfg = SearchConfig::new(u(21), SetColoring::SeededRandom { seed: 0 });
        assert!(matches!(max_mono_fu_family(&cfg), Err(SearchError::Config(_))));
        let cfg = SearchConfig::new(u(8), SetColoring::LogParity).threads(0);
        assert!(matches!(max_mono_fu_family(&cfg), Err(SearchError::Config(_))));
    }

    #[test]
    fn mono_pair_fixture_size_parity() {
        // color = |s| mod 2 on n = 4
        let n = 4;
        let packed = (1u64..16).filter(|s| s.count_ones() % 2 == 1).fold(0, |acc, s| acc | 1 << (s - 1));
        let color = |s: u64| packed >> (s - 1) & 1;
        assert_eq!((color(0b01), color(0b10), color(0b11)), (1, 1, 0));
        // no singleton pair is monochromatic with its union
        let singles = [1u64, 2, 4, 8];
        for &x in &singles {
            for &y in &singles {
                if x < y {
                    assert!(!(color(x) == color(y) && color(y) == color(x | y)));
                }
            }
        }
        // but {0,1} and {2,3} are
        assert!(has_mono_pair_naive(n, packed).unwrap());
        assert!(has_mono_pair_bitmask(&mono_pair_masks(n), packed));
    }

    #[test]
    fn threshold_small_cases() {
        assert_eq!(min_universe_for_mono_pair(1), Ok(None));
        assert_eq!(min_universe_for_mono_pair(2), Ok(None));
        assert!(min_universe_for_mono_pair(5).is_err());
        let naive = min_universe_for_mono_pair_with(3, MonoPairMethod::Naive).unwrap();
        let fast = min_universe_for_mono_pair_with(3, MonoPairMethod::Bitmask).unwrap();
        assert_eq!(naive, fast);
        assert_eq!(fast.rows.iter().map(|r| r.colorings).collect::<Vec<_>>(), vec![2, 8, 128]);
    }
}
