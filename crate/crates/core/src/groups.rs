//! Elements of a direct sum of circle groups with exact rational
//! coordinates.
//!
//! Only countable subgroups of the circle ever matter here, so a coordinate
//! is either torsion-free (values in ℚ, every nonzero value of infinite
//! order) or torsion (values in ℚ/ℤ, stored reduced into `[0, 1)`, which
//! contains every quasicyclic group). Elements have finite support.
//!
//! Besides addition and finite-sum closures this module extracts Δ-systems
//! (sunflowers) from families of supports and refines a Δ-system into a
//! sum subsystem on which supports add: the support of any finite sum of
//! distinct members is the union of their supports.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_integer::Integer;
use num_rational::Rational64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::check::CheckReport;
use crate::colorings::{color_group_elem_log_parity, Color};
use crate::setcore::{log_block_of, FinSet, SetError, MAX_CLOSURE_MEMBERS};

pub const MAX_DELTA_FAMILY: usize = 2000;
pub const MAX_ADDITIVITY_ITEMS: usize = 12;

pub type Coord = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("coordinate {0} is torsion in one operand and torsion-free in the other")]
    SpecMismatch(Coord),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("coordinate {0} listed twice")]
    DuplicateCoordinate(Coord),
    #[error("coordinates must be ascending ({0} after {1})")]
    Unsorted(Coord, Coord),
    #[error("zero value stored at coordinate {0}")]
    ZeroEntry(Coord),
    #[error("torsion value {0} outside [0, 1)")]
    TorsionRange(Rational64),
    #[error("unknown component tag {0:?}")]
    BadTag(String),
    #[error("{what} limit exceeded: {got} > {limit}")]
    Guard { what: &'static str, got: usize, limit: usize },
    #[error("supports do not form a Δ-system with root {0:?}")]
    NotDeltaSystem(BTreeSet<Coord>),
    #[error("refinement at coordinate {coordinate} keeps only {retained} element(s)")]
    InsufficientFamily { coordinate: Coord, retained: usize },
    #[error("support size {l} must exceed root size {root_size}")]
    RootTooLarge { l: u64, root_size: u64 },
    #[error(transparent)]
    Set(#[from] SetError),
}

/// The component group at one coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Component {
    /// ℚ
    TorsionFree,
    /// ℚ/ℤ
    Torsion,
}

impl Component {
    pub fn tag(self) -> &'static str {
        match self {
            Component::TorsionFree => "free",
            Component::Torsion => "torsion",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self, GroupError> {
        match tag {
            "free" => Ok(Component::TorsionFree),
            "torsion" => Ok(Component::Torsion),
            other => Err(GroupError::BadTag(other.to_string())),
        }
    }
}

/// One coordinate value, in lowest terms; torsion values lie in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CircleValue {
    value: Rational64,
    component: Component,
}

fn reduce_mod_one(r: Rational64) -> Rational64 {
    r - r.floor()
}

impl CircleValue {
    pub fn new(numer: i64, denom: i64, component: Component) -> Result<Self, GroupError> {
        if denom == 0 {
            return Err(GroupError::ZeroDenominator);
        }
        Ok(Self::from_ratio(Rational64::new(numer, denom), component))
    }

    pub fn torsion(numer: i64, denom: i64) -> Result<Self, GroupError> {
        Self::new(numer, denom, Component::Torsion)
    }

    pub fn free(numer: i64, denom: i64) -> Result<Self, GroupError> {
        Self::new(numer, denom, Component::TorsionFree)
    }

    fn from_ratio(value: Rational64, component: Component) -> Self {
        let value = match component {
            Component::Torsion => reduce_mod_one(value),
            Component::TorsionFree => value,
        };
        CircleValue { value, component }
    }

    pub fn value(self) -> Rational64 {
        self.value
    }

    pub fn component(self) -> Component {
        self.component
    }

    pub fn is_zero(self) -> bool {
        self.value == Rational64::from_integer(0)
    }

    /// Additive order: `Some(q)` for a torsion value `p/q`, `Some(1)` for
    /// zero, `None` (infinite) for a nonzero torsion-free value.
    pub fn order(self) -> Option<u64> {
        if self.is_zero() {
            return Some(1);
        }
        match self.component {
            Component::Torsion => Some(*self.value.denom() as u64),
            Component::TorsionFree => None,
        }
    }

    pub fn scale(self, k: i64) -> Self {
        Self::from_ratio(self.value * k, self.component)
    }

    fn checked_add(self, other: Self, coord: Coord) -> Result<Self, GroupError> {
        if self.component != other.component {
            return Err(GroupError::SpecMismatch(coord));
        }
        Ok(Self::from_ratio(self.value + other.value, self.component))
    }
}

impl fmt::Display for CircleValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = match self.component {
            Component::Torsion => "t",
            Component::TorsionFree => "q",
        };
        write!(f, "{}{t}", self.value)
    }
}

/// A finite-support element of the direct sum. Zero values are never
/// stored, so the key set is exactly the support.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct GroupElem {
    entries: BTreeMap<Coord, CircleValue>,
}

impl GroupElem {
    pub fn identity() -> Self {
        GroupElem::default()
    }

    /// Builds an element; zero values are dropped, repeated coordinates rejected.
    pub fn from_entries<I>(entries: I) -> Result<Self, GroupError>
    where
        I: IntoIterator<Item = (Coord, CircleValue)>,
    {
        let mut map = BTreeMap::new();
        for (c, v) in entries {
            if map.contains_key(&c) {
                return Err(GroupError::DuplicateCoordinate(c));
            }
            if !v.is_zero() {
                map.insert(c, v);
            }
        }
        Ok(GroupElem { entries: map })
    }

    pub fn is_identity(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, coord: Coord) -> Option<CircleValue> {
        self.entries.get(&coord).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (Coord, CircleValue)> + '_ {
        self.entries.iter().map(|(c, v)| (*c, *v))
    }

    pub fn support(&self) -> BTreeSet<Coord> {
        self.entries.keys().copied().collect()
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn add(&self, other: &GroupElem) -> Result<GroupElem, GroupError> {
        let mut entries = self.entries.clone();
        for (&c, &v) in &other.entries {
            match entries.get(&c) {
                None => {
                    entries.insert(c, v);
                }
                Some(&w) => {
                    let s = w.checked_add(v, c)?;
                    if s.is_zero() {
                        entries.remove(&c);
                    } else {
                        entries.insert(c, s);
                    }
                }
            }
        }
        Ok(GroupElem { entries })
    }

    pub fn neg(&self) -> GroupElem {
        let entries = self.entries.iter().map(|(c, v)| (*c, v.scale(-1))).collect();
        GroupElem { entries }
    }

    pub fn sum<'a, I>(items: I) -> Result<GroupElem, GroupError>
    where
        I: IntoIterator<Item = &'a GroupElem>,
    {
        items.into_iter().try_fold(GroupElem::identity(), |acc, x| acc.add(x))
    }
}

impl fmt::Display for GroupElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (c, v)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}:{v}")?;
        }
        write!(f, "}}")
    }
}

/// Text form: `[[coordinate, numerator, denominator, tag], ...]`,
/// coordinates ascending, tag `"free"` or `"torsion"`.
impl Serialize for GroupElem {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let quads: Vec<(Coord, i64, i64, &str)> =
            self.entries.iter().map(|(c, v)| (*c, *v.value.numer(), *v.value.denom(), v.component.tag())).collect();
        quads.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GroupElem {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let quads = Vec::<(Coord, i64, i64, String)>::deserialize(deserializer)?;
        GroupElem::from_quads(&quads).map_err(D::Error::custom)
    }
}

impl GroupElem {
    fn from_quads(quads: &[(Coord, i64, i64, String)]) -> Result<Self, GroupError> {
        let mut entries = BTreeMap::new();
        let mut prev: Option<Coord> = None;
        for (c, p, q, tag) in quads {
            if let Some(prev) = prev {
                if *c <= prev {
                    return Err(GroupError::Unsorted(*c, prev));
                }
            }
            prev = Some(*c);
            let component = Component::from_tag(tag)?;
            if *q == 0 {
                return Err(GroupError::ZeroDenominator);
            }
            let raw = Rational64::new(*p, *q);
            if component == Component::Torsion
                && (raw < Rational64::from_integer(0) || raw >= Rational64::from_integer(1))
            {
                return Err(GroupError::TorsionRange(raw));
            }
            let v = CircleValue::from_ratio(raw, component);
            if v.is_zero() {
                return Err(GroupError::ZeroEntry(*c));
            }
            entries.insert(*c, v);
        }
        Ok(GroupElem { entries })
    }
}

/// Component group assigned to each coordinate in use.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ComponentSpec {
    components: BTreeMap<Coord, Component>,
}

impl ComponentSpec {
    /// Collects the components used by `items`, rejecting conflicting tags.
    pub fn from_elements<'a, I>(items: I) -> Result<Self, GroupError>
    where
        I: IntoIterator<Item = &'a GroupElem>,
    {
        let mut components = BTreeMap::new();
        for x in items {
            for (c, v) in x.entries() {
                if let Some(prev) = components.insert(c, v.component()) {
                    if prev != v.component() {
                        return Err(GroupError::SpecMismatch(c));
                    }
                }
            }
        }
        Ok(ComponentSpec { components })
    }

    pub fn component(&self, coord: Coord) -> Option<Component> {
        self.components.get(&coord).copied()
    }
}

/// All `2^m - 1` subset sums in submask order. Coinciding sums are kept.
pub fn fs_closure(items: &[GroupElem]) -> Result<Vec<GroupElem>, GroupError> {
    let m = items.len();
    if m > MAX_CLOSURE_MEMBERS {
        return Err(GroupError::Guard { what: "fs_closure members", got: m, limit: MAX_CLOSURE_MEMBERS });
    }
    let mut out: Vec<GroupElem> = Vec::with_capacity((1 << m) - 1);
    for mask in 1usize..(1 << m) {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        let s = if rest == 0 { items[low].clone() } else { out[rest - 1].add(&items[low])? };
        out.push(s);
    }
    Ok(out)
}

/// Distinct elements of [`fs_closure`], in first-occurrence order.
pub fn fs_closure_distinct(items: &[GroupElem]) -> Result<Vec<GroupElem>, GroupError> {
    let mut seen = std::collections::HashSet::new();
    Ok(fs_closure(items)?.into_iter().filter(|x| seen.insert(x.clone())).collect())
}

/// A family whose supports pairwise intersect in exactly `root`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaSystem {
    root: BTreeSet<Coord>,
    family: Vec<GroupElem>,
}

impl DeltaSystem {
    pub fn new(root: BTreeSet<Coord>, family: Vec<GroupElem>) -> Result<Self, GroupError> {
        let supports: Vec<_> = family.iter().map(|x| x.support()).collect();
        for (i, a) in supports.iter().enumerate() {
            if !root.is_subset(a) {
                return Err(GroupError::NotDeltaSystem(root));
            }
            for b in &supports[..i] {
                if a.intersection(b).copied().collect::<BTreeSet<_>>() != root {
                    return Err(GroupError::NotDeltaSystem(root));
                }
            }
        }
        Ok(DeltaSystem { root, family })
    }

    pub fn root(&self) -> &BTreeSet<Coord> {
        &self.root
    }

    pub fn family(&self) -> &[GroupElem] {
        &self.family
    }

    pub fn len(&self) -> usize {
        self.family.len()
    }

    pub fn is_empty(&self) -> bool {
        self.family.is_empty()
    }
}

/// Largest sub-collection of `supports` forming a Δ-system: its root and the
/// chosen indices (ascending). `None` for an empty input.
///
/// Every Δ-system with at least two members has as root the intersection
/// of some pair, so each pairwise intersection is tried as root; for a
/// fixed root the members must contain it and have pairwise disjoint
/// petals, which is an exact maximum set packing.
pub fn largest_delta_subfamily(supports: &[BTreeSet<Coord>]) -> Option<(BTreeSet<Coord>, Vec<usize>)> {
    let first = supports.first()?;
    let mut best: (BTreeSet<Coord>, Vec<usize>) = (first.clone(), vec![0]);

    let mut roots: BTreeSet<BTreeSet<Coord>> = BTreeSet::new();
    for (i, a) in supports.iter().enumerate() {
        for b in &supports[..i] {
            roots.insert(a.intersection(b).copied().collect());
        }
    }
    // try roots with the most containing supports first
    let mut ranked: Vec<(Vec<usize>, BTreeSet<Coord>)> = roots
        .into_iter()
        .map(|r| {
            let holders = (0..supports.len()).filter(|&i| r.is_subset(&supports[i])).collect();
            (holders, r)
        })
        .collect();
    ranked.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.1.cmp(&b.1)));

    for (holders, root) in ranked {
        if holders.len() <= best.1.len() {
            break;
        }
        let petals: Vec<BTreeSet<Coord>> =
            holders.iter().map(|&i| supports[i].difference(&root).copied().collect()).collect();
        let picked = max_disjoint_packing(&petals, best.1.len());
        if picked.len() > best.1.len() {
            best = (root, picked.into_iter().map(|j| holders[j]).collect());
        }
    }
    Some(best)
}

/// Exact maximum set packing by branch and bound on the conflict graph.
/// Returns a packing strictly larger than `floor`, or an empty vector.
fn max_disjoint_packing(sets: &[BTreeSet<Coord>], floor: usize) -> Vec<usize> {
    let k = sets.len();
    let words = k.div_ceil(64);
    let mut conflict = vec![vec![0u64; words]; k];
    let mut by_coord: HashMap<Coord, Vec<usize>> = HashMap::new();
    for (i, s) in sets.iter().enumerate() {
        for c in s {
            by_coord.entry(*c).or_default().push(i);
        }
    }
    for owners in by_coord.values() {
        for &a in owners {
            for &b in owners {
                if a != b {
                    conflict[a][b / 64] |= 1 << (b % 64);
                }
            }
        }
    }
    let mut all = vec![0u64; words];
    for i in 0..k {
        all[i / 64] |= 1 << (i % 64);
    }
    let mut search = Packing { conflict, best: Vec::new(), floor };
    let mut chosen = Vec::new();
    search.branch(all, &mut chosen);
    search.best
}

struct Packing {
    conflict: Vec<Vec<u64>>,
    best: Vec<usize>,
    floor: usize,
}

fn count(bits: &[u64]) -> usize {
    bits.iter().map(|w| w.count_ones() as usize).sum()
}

fn members(bits: &[u64]) -> impl Iterator<Item = usize> + '_ {
    bits.iter().enumerate().flat_map(|(w, &word)| {
        let mut b = word;
        std::iter::from_fn(move || {
            (b != 0).then(|| {
                let i = b.trailing_zeros() as usize;
                b &= b - 1;
                w * 64 + i
            })
        })
    })
}

impl Packing {
    fn degree(&self, v: usize, cand: &[u64]) -> usize {
        self.conflict[v].iter().zip(cand).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    fn branch(&mut self, mut cand: Vec<u64>, chosen: &mut Vec<usize>) {
        let depth = chosen.len();
        // vertices of degree ≤ 1 can always be taken
        loop {
            let simple = members(&cand).find(|&v| self.degree(v, &cand) <= 1);
            match simple {
                Some(v) => {
                    chosen.push(v);
                    cand[v / 64] &= !(1 << (v % 64));
                    for (c, n) in cand.iter_mut().zip(&self.conflict[v]) {
                        *c &= !n;
                    }
                }
                None => break,
            }
        }
        let remaining = count(&cand);
        if remaining == 0 {
            if chosen.len() > self.floor.max(self.best.len()) {
                let mut b = chosen.clone();
                b.sort_unstable();
                self.best = b;
            }
        } else if chosen.len() + remaining > self.floor.max(self.best.len()) {
            let v = members(&cand).max_by_key(|&v| (self.degree(v, &cand), std::cmp::Reverse(v))).expect("nonempty");
            let mut with = cand.clone();
            with[v / 64] &= !(1 << (v % 64));
            for (c, n) in with.iter_mut().zip(&self.conflict[v]) {
                *c &= !n;
            }
            chosen.push(v);
            self.branch(with, chosen);
            chosen.pop();
            let mut without = cand;
            without[v / 64] &= !(1 << (v % 64));
            self.branch(without, chosen);
        }
        chosen.truncate(depth);
    }
}

/// Largest Δ-subsystem of `family` by supports, if it reaches `min_size`.
pub fn find_delta_system(family: &[GroupElem], min_size: usize) -> Result<Option<DeltaSystem>, GroupError> {
    if family.len() > MAX_DELTA_FAMILY {
        return Err(GroupError::Guard { what: "Δ-system family", got: family.len(), limit: MAX_DELTA_FAMILY });
    }
    let supports: Vec<_> = family.iter().map(|x| x.support()).collect();
    let Some((root, picked)) = largest_delta_subfamily(&supports) else {
        return Ok(None);
    };
    if picked.len() < min_size.max(1) {
        return Ok(None);
    }
    let members = picked.into_iter().map(|i| family[i].clone()).collect();
    DeltaSystem::new(root, members).map(Some)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RefineConfig {
    /// Each pigeonhole or blocking step must keep at least this many elements.
    pub min_retained: usize,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig { min_retained: 2 }
    }
}

/// A family of sums over pairwise disjoint blocks of an original family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumSubsystem {
    /// Root coordinates kept in every element (and every finite sum).
    pub root: BTreeSet<Coord>,
    pub elements: Vec<GroupElem>,
    /// `elements[i]` is the sum of `original[j]` for `j` in `blocks[i]`.
    pub blocks: Vec<Vec<usize>>,
}

pub fn sum_subsystem_refine(ds: &DeltaSystem) -> Result<SumSubsystem, GroupError> {
    sum_subsystem_refine_with(ds, RefineConfig::default())
}

/// Processes the root coordinates in ascending order. At each coordinate
/// the current elements are bucketed by their projection there; the bucket
/// that retains the most elements is kept. A nonzero torsion-free value has
/// infinite order, so the coordinate survives in every finite sum. A torsion
/// value of order `q` is killed by summing consecutive cells of `q`
/// elements (a trailing partial cell is dropped).
pub fn sum_subsystem_refine_with(ds: &DeltaSystem, cfg: RefineConfig) -> Result<SumSubsystem, GroupError> {
    let mut elements: Vec<GroupElem> = ds.family.clone();
    let mut blocks: Vec<Vec<usize>> = (0..elements.len()).map(|i| vec![i]).collect();
    let mut kept_root = BTreeSet::new();

    for &alpha in &ds.root {
        let mut buckets: Vec<(Option<CircleValue>, Vec<usize>)> = Vec::new();
        for (i, x) in elements.iter().enumerate() {
            let v = x.get(alpha);
            match buckets.iter_mut().find(|b| b.0 == v) {
                Some(b) => b.1.push(i),
                None => buckets.push((v, vec![i])),
            }
        }
        // an absent projection is zero, of order 1
        let order = |v: Option<CircleValue>| v.map_or(Some(1), |v| v.order());
        let retained = |b: &(Option<CircleValue>, Vec<usize>)| match order(b.0) {
            Some(q) => b.1.len() / q as usize,
            None => b.1.len(),
        };
        let mut chosen = 0;
        for (i, b) in buckets.iter().enumerate() {
            if retained(b) > retained(&buckets[chosen]) {
                chosen = i;
            }
        }
        let (value, idx) = buckets.swap_remove(chosen);
        let (next_elems, next_blocks): (Vec<_>, Vec<_>) = match order(value) {
            None => {
                kept_root.insert(alpha);
                idx.iter().map(|&i| (elements[i].clone(), blocks[i].clone())).unzip()
            }
            Some(q) => {
                let mut out = Vec::new();
                for cell in idx.chunks_exact(q as usize) {
                    let sum = GroupElem::sum(cell.iter().map(|&i| &elements[i]))?;
                    let mut block: Vec<usize> = cell.iter().flat_map(|&i| blocks[i].iter().copied()).collect();
                    block.sort_unstable();
                    out.push((sum, block));
                }
                out.into_iter().unzip()
            }
        };
        if next_elems.len() < cfg.min_retained {
            return Err(GroupError::InsufficientFamily { coordinate: alpha, retained: next_elems.len() });
        }
        elements = next_elems;
        blocks = next_blocks;
    }
    // supports now meet exactly in the kept root coordinates
    DeltaSystem::new(kept_root.clone(), elements.clone())?;
    Ok(SumSubsystem { root: kept_root, elements, blocks })
}

/// Refines `trials` random Δ-systems (2 to 8 members, roots of order 2,
/// order 3, torsion-free or mixed values) and checks each successful output:
/// supports add over every subset, blocks are disjoint, and every element
/// is the sum of its block.
pub fn refine_additivity_scan(trials: u64, seed: u64) -> Result<CheckReport, GroupError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let roots: [Vec<CircleValue>; 4] = [
        vec![CircleValue::torsion(1, 2)?],
        vec![CircleValue::torsion(1, 3)?, CircleValue::torsion(2, 3)?],
        vec![CircleValue::free(1, 1)?, CircleValue::free(1, 2)?],
        vec![CircleValue::free(3, 1)?, CircleValue::torsion(1, 2)?],
    ];
    let petals = [
        CircleValue::torsion(1, 2)?,
        CircleValue::torsion(1, 3)?,
        CircleValue::torsion(3, 4)?,
        CircleValue::free(1, 1)?,
        CircleValue::free(-5, 2)?,
    ];
    let mut report = CheckReport::new();
    for _ in 0..trials {
        let root_values = roots.choose(&mut rng).expect("nonempty");
        let root: BTreeSet<Coord> = (0..root_values.len() as Coord).collect();
        let mut next = root_values.len() as Coord;
        let mut family = Vec::new();
        for _ in 0..rng.gen_range(2..=8) {
            let mut entries: Vec<(Coord, CircleValue)> = Vec::new();
            for (&c, &v) in root.iter().zip(root_values) {
                // some members disagree on the root so the pigeonhole step matters
                let v = if rng.gen_bool(0.2) {
                    let same: Vec<&CircleValue> = petals.iter().filter(|p| p.component() == v.component()).collect();
                    **same.choose(&mut rng).expect("both components have petals")
                } else {
                    v
                };
                entries.push((c, v));
            }
            for _ in 0..rng.gen_range(1..=3) {
                entries.push((next, *petals.choose(&mut rng).expect("nonempty")));
                next += 1;
            }
            family.push(GroupElem::from_entries(entries)?);
        }
        let ds = DeltaSystem::new(root, family)?;
        report.checked += 1;
        let z = match sum_subsystem_refine(&ds) {
            Ok(z) => z,
            Err(GroupError::InsufficientFamily { .. }) => continue,
            Err(e) => return Err(e),
        };
        report.applicable += 1;
        let mut used = BTreeSet::new();
        let blocks_ok = z.elements.iter().zip(&z.blocks).all(|(e, block)| {
            block.iter().all(|&j| used.insert(j))
                && GroupElem::sum(block.iter().map(|&j| &ds.family[j])).is_ok_and(|s| s == *e)
        });
        if !blocks_ok || !verify_support_additivity(&z.elements)? {
            report.fail(|| format!("refinement of {:?} gave {:?}", ds.family, z.elements));
        }
    }
    Ok(report)
}

/// `true` iff every nonempty subset sum has support equal to the union of
/// the members' supports.
pub fn verify_support_additivity(items: &[GroupElem]) -> Result<bool, GroupError> {
    if items.len() > MAX_ADDITIVITY_ITEMS {
        return Err(GroupError::Guard { what: "additivity items", got: items.len(), limit: MAX_ADDITIVITY_ITEMS });
    }
    let sums = fs_closure(items)?;
    for (k, sum) in sums.iter().enumerate() {
        let mask = k + 1;
        let union: BTreeSet<Coord> =
            (0..items.len()).filter(|i| mask & (1 << i) != 0).flat_map(|i| items[i].support()).collect();
        if sum.support() != union {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Support size of a sum of `count` Δ-system members with support size `l`
/// and root size `root_size`, when supports add: `count·l − (count−1)·root_size`.
pub fn merged_support_size(l: u64, root_size: u64, count: u64) -> Result<u64, GroupError> {
    if root_size >= l {
        return Err(GroupError::RootTooLarge { l, root_size });
    }
    Ok(count * l - count.saturating_sub(1) * root_size)
}

/// The Boolean group of finite sets under symmetric difference.
pub fn sym_diff(x: FinSet, y: FinSet) -> Result<FinSet, SetError> {
    x.sym_diff(y)
}

/// Explicit parity-flip configuration for one `(l, root_size)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlipWitness {
    pub l: u64,
    pub root_size: u64,
    /// `⌊log₂ l⌋`
    pub m: u32,
    /// `⌊log₂ (l − root_size)⌋`
    pub n: u32,
    /// `2^(m−n) + 1`
    pub count: u64,
    pub member_color: Color,
    pub sum_support: u64,
    pub sum_color: Color,
}

/// Builds `2^(m−n) + 1` members, each with support size `l`, sharing a root
/// of `root_size` torsion-free coordinates (value 1) and carrying private
/// torsion petals (value 1/2), then sums them.
pub fn parity_flip_witness(l: u64, root_size: u64) -> Result<FlipWitness, GroupError> {
    if root_size >= l {
        return Err(GroupError::RootTooLarge { l, root_size });
    }
    let m = log_block_of(l).expect("l > 0");
    let n = log_block_of(l - root_size).expect("l > root_size");
    let count = (1u64 << (m - n)) + 1;
    let one = CircleValue::free(1, 1)?;
    let half = CircleValue::torsion(1, 2)?;
    let petal = l - root_size;
    let members: Vec<GroupElem> = (0..count)
        .map(|j| {
            let root = (0..root_size).map(|c| (c as Coord, one));
            let base = root_size + j * petal;
            let own = (base..base + petal).map(|c| (c as Coord, half));
            GroupElem::from_entries(root.chain(own))
        })
        .collect::<Result<_, _>>()?;
    let member_color = color_group_elem_log_parity(&members[0]).expect("nonempty support");
    let sum = GroupElem::sum(&members)?;
    let sum_color = color_group_elem_log_parity(&sum).expect("nonempty support");
    Ok(FlipWitness { l, root_size, m, n, count, member_color, sum_support: sum.support_size() as u64, sum_color })
}

/// Checks the merge arithmetic on explicit witnesses for all `l ≤ max_l`,
/// `root_size < l`: the sum's support size matches [`merged_support_size`],
/// lands in `[2^(m+1), 2^(m+2))`, and has the opposite log-parity color.
pub fn parity_flip_scan(max_l: u64) -> Result<CheckReport, GroupError> {
    let mut report = CheckReport::new();
    for l in 1..=max_l {
        for r in 0..l {
            report.checked += 1;
            report.applicable += 1;
            let w = parity_flip_witness(l, r)?;
            let formula = merged_support_size(l, r, w.count)?;
            let expected = (1u64 << (w.m - w.n)) * (l - r) + l;
            let lo = 1u64 << (w.m + 1);
            let hi = 1u64 << (w.m + 2);
            let ok = w.sum_support == formula
                && formula == expected
                && (lo..hi).contains(&w.sum_support)
                && w.sum_color == w.member_color.flip();
            if !ok {
                report.fail(|| format!("{w:?}"));
            }
        }
    }
    Ok(report)
}

/// Least common multiple of the orders; `None` if any order is infinite.
pub fn lcm_of_orders(values: &[CircleValue]) -> Option<u64> {
    values.iter().try_fold(1u64, |acc, v| v.order().map(|q| acc.lcm(&q)))
}
