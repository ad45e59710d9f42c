//! Exhaustive and sampled enumeration of Kakeya selections.
//!
//! The selection space is the product of the classes' line lists, walked as
//! an odometer whose last class turns fastest. Each step swaps one or more
//! chosen lines in an [`IncrementalEvaluator`]. Work is split into contiguous
//! index ranges; every worker keeps a private [`Tally`] and tallies merge by
//! sums, minima and unions, so reports do not depend on the worker count.
//!
//! Sampled mode draws selection `i` with a SplitMix64 generator whose state
//! starts at the `i`-th output of the SplitMix64 stream seeded with the user
//! seed. SplitMix64 advances its state by `0x9E3779B97F4A7C15` and outputs
//! `z ^ (z >> 31)` after `z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9` and
//! `z = (z ^ (z >> 27)) * 0x94D049BB133111EB`. Line indices are drawn with
//! `rand`'s uniform integer sampling.

use std::collections::BTreeMap;
use std::thread;

use rand::{RngExt, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::Serialize;
use thiserror::Error;

use crate::bounds::{self, classify, BoundsProfile, Verdict};
use crate::kakeya::{IncrementalEvaluator, KnotInequalities, KnotSpectrum, LineSelection};
use crate::plane::{AffinePlane, LineId};

/// Default cap on the number of selections an exhaustive run may visit.
pub const DEFAULT_BUDGET: u64 = 1 << 31;

/// Orders at or above this need `allow_big` (and the reduction) to run exhaustively.
pub const BIG_ORDER: u32 = 9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error(
        "search space has {required} selections, budget is {budget}; sample or reduce instead"
    )]
    BudgetExceeded { required: u128, budget: u64 },
    #[error("translation reduction needs a plane built with known coordinates")]
    ReductionUnavailable,
    #[error("exhaustive search at q = {0} requires the reduction and an explicit opt-in")]
    BigSearchNotAllowed(u32),
    #[error("no selection of size {0}")]
    NotFound(u64),
    #[error("target size {target} outside 1..={max}")]
    InvalidTarget { target: u64, max: u64 },
    #[error("sample count must be at least 1")]
    NoSamples,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exhaustive,
    Sampled { n: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    pub mode: Mode,
    /// Fix the chosen horizontal and vertical lines through the origin.
    pub reduce: bool,
    pub workers: usize,
    pub budget: u64,
    pub allow_big: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            mode: Mode::Exhaustive,
            reduce: false,
            workers: 1,
            budget: DEFAULT_BUDGET,
            allow_big: false,
        }
    }
}

impl SearchConfig {
    pub fn exhaustive() -> Self {
        Self::default()
    }

    pub fn sampled(n: u64, seed: u64) -> Self {
        SearchConfig {
            mode: Mode::Sampled { n, seed },
            ..Self::default()
        }
    }

    pub fn reduced(mut self, reduce: bool) -> Self {
        self.reduce = reduce;
        self
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }
}

/// Per-class candidate lines. With the reduction, the two classes moved
/// freely by translations (slope 0 and vertical) are pinned to the origin;
/// translations act freely on selections, so each orbit of size `q^2` keeps
/// exactly one representative.
#[derive(Debug, Clone)]
struct Space {
    choices: Vec<Vec<LineId>>,
    total: u128,
}

impl Space {
    fn new(plane: &AffinePlane, reduce: bool) -> Result<Self, SearchError> {
        let mut choices: Vec<Vec<LineId>> = plane.classes().to_vec();
        if reduce {
            if !plane.has_translation_coordinates() {
                return Err(SearchError::ReductionUnavailable);
            }
            let last = choices.len() - 1;
            choices[0] = vec![plane.line_through(0, 0)];
            choices[last] = vec![plane.line_through(0, last as u32)];
        }
        let total = choices.iter().map(|c| c.len() as u128).product();
        Ok(Space { choices, total })
    }

    fn decode(&self, mut index: u64) -> Vec<usize> {
        let mut digits = vec![0usize; self.choices.len()];
        for c in (0..self.choices.len()).rev() {
            let radix = self.choices[c].len() as u64;
            digits[c] = (index % radix) as usize;
            index /= radix;
        }
        digits
    }

    fn lines(&self, digits: &[usize]) -> Vec<LineId> {
        digits
            .iter()
            .enumerate()
            .map(|(c, &d)| self.choices[c][d])
            .collect()
    }
}

/// Everything a worker learns from the selections it visits.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Tally {
    q: u64,
    counts: Vec<u64>,
    first: Vec<u64>,
    // Bit j of size s: some selection of size s has largest knot j.
    knot_words: usize,
    knots: Vec<u64>,
    evaluations: u64,
    identity_failures: u64,
    inequality_failures: u64,
}

impl Tally {
    fn new(q: u32) -> Self {
        let q = q as u64;
        let sizes = (q * q + 1) as usize;
        let knot_words = (q as usize + 2).div_ceil(64);
        Tally {
            q,
            counts: vec![0; sizes],
            first: vec![u64::MAX; sizes],
            knot_words,
            knots: vec![0; sizes * knot_words],
            evaluations: 0,
            identity_failures: 0,
            inequality_failures: 0,
        }
    }

    #[inline]
    fn record(&mut self, index: u64, ev: &IncrementalEvaluator<'_>) {
        let q = self.q;
        let hist = ev.histogram();
        let x0 = hist[0];
        let size = (q * q - x0) as usize;
        let j = ev.max_knot() as usize;

        let (mut s0, mut s1, mut s2) = (0u64, 0u64, 0u64);
        for (i, &x) in hist.iter().enumerate() {
            let i = i as u64;
            s0 += x;
            s1 += i * x;
            s2 += i * i.saturating_sub(1) * x;
        }
        if s0 != q * q || s1 != q * q + q || s2 != q * q + q {
            self.identity_failures += 1;
        }
        if !KnotInequalities::evaluate(q, x0, q + 1 - j as u64).all() {
            self.inequality_failures += 1;
        }

        self.evaluations += 1;
        self.counts[size] += 1;
        if self.first[size] == u64::MAX {
            self.first[size] = index;
        }
        self.knots[size * self.knot_words + j / 64] |= 1 << (j % 64);
    }

    fn merge(&mut self, other: &Tally) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        for (a, b) in self.first.iter_mut().zip(&other.first) {
            *a = (*a).min(*b);
        }
        for (a, b) in self.knots.iter_mut().zip(&other.knots) {
            *a |= b;
        }
        self.evaluations += other.evaluations;
        self.identity_failures += other.identity_failures;
        self.inequality_failures += other.inequality_failures;
    }

    fn max_knots(&self, size: usize) -> Vec<u32> {
        let words = &self.knots[size * self.knot_words..(size + 1) * self.knot_words];
        (0..self.q as usize + 2)
            .filter(|&j| words[j / 64] >> (j % 64) & 1 == 1)
            .map(|j| j as u32)
            .collect()
    }
}

fn enumerate_range(plane: &AffinePlane, space: &Space, start: u64, end: u64) -> Tally {
    let mut tally = Tally::new(plane.order());
    if start >= end {
        return tally;
    }
    let mut digits = space.decode(start);
    let mut ev = IncrementalEvaluator::new(plane, &space.lines(&digits));
    let last = digits.len() - 1;
    let mut index = start;
    loop {
        tally.record(index, &ev);
        index += 1;
        if index == end {
            break;
        }
        let mut c = last;
        loop {
            digits[c] += 1;
            if digits[c] < space.choices[c].len() {
                ev.replace(c as u32, space.choices[c][digits[c]]);
                break;
            }
            digits[c] = 0;
            ev.replace(c as u32, space.choices[c][0]);
            c -= 1;
        }
    }
    tally
}

/// Initial state of the generator for sample `i`.
pub fn sample_seed(seed: u64, i: u64) -> u64 {
    let mut stream = SplitMix64::from_seed(
        seed.wrapping_add(i.wrapping_mul(0x9E37_79B9_7F4A_7C15))
            .to_le_bytes(),
    );
    rand::Rng::next_u64(&mut stream)
}

fn sample_selection(space: &Space, seed: u64, i: u64) -> Vec<LineId> {
    let mut rng = SplitMix64::from_seed(sample_seed(seed, i).to_le_bytes());
    space
        .choices
        .iter()
        .map(|c| c[rng.random_range(0..c.len())])
        .collect()
}

fn sample_range(plane: &AffinePlane, space: &Space, seed: u64, start: u64, end: u64) -> Tally {
    let mut tally = Tally::new(plane.order());
    for i in start..end {
        let ev = IncrementalEvaluator::new(plane, &sample_selection(space, seed, i));
        tally.record(i, &ev);
    }
    tally
}

fn run_partitioned<F>(total: u64, workers: usize, work: F) -> Vec<Tally>
where
    F: Fn(u64, u64) -> Tally + Sync,
{
    let workers = workers.max(1) as u128;
    let bounds: Vec<u64> = (0..=workers)
        .map(|w| (total as u128 * w / workers) as u64)
        .collect();
    if workers == 1 {
        return vec![work(0, total)];
    }
    thread::scope(|s| {
        let handles: Vec<_> = bounds
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                let work = &work;
                s.spawn(move || work(a, b))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SizeCount {
    pub size: u64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SizeConformance {
    pub size: u64,
    pub max_knots: Vec<u32>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Violations {
    pub identities: u64,
    pub inequalities: u64,
}

/// Result of an enumeration. With the reduction on, `attained` counts orbit
/// representatives; multiply by `orbit_size` for counts over all selections.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpectrumReport {
    pub q: u32,
    pub mode: Mode,
    pub reduced: bool,
    pub orbit_size: u64,
    pub evaluations: u64,
    pub attained: Vec<SizeCount>,
    /// First selection of each size in enumeration order.
    pub witnesses: BTreeMap<u64, Vec<LineId>>,
    /// Largest-knot values seen among selections of each size.
    pub max_knots: BTreeMap<u64, Vec<u32>>,
    pub theorem_cutoff: u64,
    pub conformance: Vec<SizeConformance>,
    /// Sizes from the theorem cutoff up to `q^2` that nothing attained.
    pub gaps: Vec<u64>,
    pub violations: Violations,
}

impl SpectrumReport {
    pub fn attained_sizes(&self) -> Vec<u64> {
        self.attained.iter().map(|a| a.size).collect()
    }

    pub fn count(&self, size: u64) -> u64 {
        self.attained
            .iter()
            .find(|a| a.size == size)
            .map_or(0, |a| a.count)
    }

    pub fn min_size(&self) -> Option<u64> {
        self.attained.first().map(|a| a.size)
    }
}

fn build_report(
    plane: &AffinePlane,
    config: &SearchConfig,
    space: &Space,
    tally: Tally,
) -> SpectrumReport {
    let q = plane.order();
    let qq = q as u64 * q as u64;
    let profile = bounds::theorem_threshold(q as u64);
    let mut attained = Vec::new();
    let mut witnesses = BTreeMap::new();
    let mut max_knots = BTreeMap::new();
    let mut conformance = Vec::new();
    let mut gaps = Vec::new();
    for size in 0..=qq {
        let s = size as usize;
        let count = tally.counts[s];
        if count == 0 {
            if size >= profile.theorem_size_cutoff {
                gaps.push(size);
            }
            continue;
        }
        attained.push(SizeCount { size, count });
        let witness = match config.mode {
            Mode::Exhaustive => space.lines(&space.decode(tally.first[s])),
            Mode::Sampled { seed, .. } => sample_selection(space, seed, tally.first[s]),
        };
        witnesses.insert(size, witness);
        let knots = tally.max_knots(s);
        if size >= profile.theorem_size_cutoff {
            conformance.push(SizeConformance {
                size,
                verdict: size_verdict(q as u64, size, &knots),
                max_knots: knots.clone(),
            });
        }
        max_knots.insert(size, knots);
    }
    SpectrumReport {
        q,
        mode: config.mode,
        reduced: config.reduce,
        orbit_size: if config.reduce { qq } else { 1 },
        evaluations: tally.evaluations,
        attained,
        witnesses,
        max_knots,
        theorem_cutoff: profile.theorem_size_cutoff,
        conformance,
        gaps,
        violations: Violations {
            identities: tally.identity_failures,
            inequalities: tally.inequality_failures,
        },
    }
}

fn size_verdict(q: u64, size: u64, knots: &[u32]) -> Verdict {
    let mut verdict = Verdict::Unclassified;
    for &j in knots {
        let v = classify(q, size, Some(q + 1 - j as u64));
        if matches!(v, Verdict::ViolatesTheorem { .. }) {
            return v;
        }
        verdict = v;
    }
    verdict
}

/// Visits every selection (or `n` sampled ones) and tallies sizes, largest
/// knots and per-selection identity/inequality checks.
pub fn enumerate(
    plane: &AffinePlane,
    config: &SearchConfig,
) -> Result<SpectrumReport, SearchError> {
    let space = Space::new(plane, config.reduce)?;
    let tally = match config.mode {
        Mode::Exhaustive => {
            if plane.order() >= BIG_ORDER && !(config.reduce && config.allow_big) {
                return Err(SearchError::BigSearchNotAllowed(plane.order()));
            }
            if space.total > config.budget as u128 {
                return Err(SearchError::BudgetExceeded {
                    required: space.total,
                    budget: config.budget,
                });
            }
            let total = space.total as u64;
            run_partitioned(total, config.workers, |a, b| {
                enumerate_range(plane, &space, a, b)
            })
        }
        Mode::Sampled { n, seed } => {
            if n == 0 {
                return Err(SearchError::NoSamples);
            }
            run_partitioned(n, config.workers, |a, b| {
                sample_range(plane, &space, seed, a, b)
            })
        }
    };
    let mut merged = Tally::new(plane.order());
    for t in &tally {
        merged.merge(t);
    }
    Ok(build_report(plane, config, &space, merged))
}

/// Smallest Kakeya set size in AG(2,q): `q(q+1)/2` for even `q`, one more
/// `(q-1)/2` for odd `q`.
pub fn desarguesian_minimum(q: u64) -> u64 {
    if q.is_multiple_of(2) {
        q * (q + 1) / 2
    } else {
        q * (q + 1) / 2 + (q - 1) / 2
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConformanceSummary {
    pub q: u32,
    pub theorem_cutoff: u64,
    /// Attained sizes at or above the cutoff, with the interval `k` they matched.
    pub conforming: Vec<(u64, u64)>,
    pub violations: Vec<String>,
    /// Attained sizes above the cutoff that sit between admissible intervals.
    pub gap_hits: Vec<u64>,
    /// Sizes attained by selections whose largest knot is a `(q-1)`-knot.
    pub q_minus_one_knot_sizes: Vec<u64>,
    pub min_size: Option<u64>,
    /// `q(q+1)/2`, valid in every affine plane.
    pub general_lower_bound: u64,
    /// Smallest size in the Desarguesian plane.
    pub desarguesian_minimum: u64,
    pub identity_failures: u64,
    pub inequality_failures: u64,
}

impl ConformanceSummary {
    pub fn conforms(&self) -> bool {
        self.violations.is_empty()
            && self.gap_hits.is_empty()
            && self.identity_failures == 0
            && self.inequality_failures == 0
            && self.min_size.is_some_and(|m| m >= self.general_lower_bound)
    }
}

/// Checks every attained size above the theorem cutoff against the
/// admissible intervals and the largest knots observed for it.
pub fn verify_theorem(report: &SpectrumReport, profile: &BoundsProfile) -> ConformanceSummary {
    let q = report.q as u64;
    let mut conforming = Vec::new();
    let mut violations = Vec::new();
    let mut gap_hits = Vec::new();
    for a in report
        .attained
        .iter()
        .filter(|a| a.size >= profile.theorem_size_cutoff)
    {
        let hits: Vec<_> = profile
            .intervals
            .iter()
            .filter(|i| i.contains(a.size))
            .collect();
        let knots = &report.max_knots[&a.size];
        match hits.as_slice() {
            [] => {
                gap_hits.push(a.size);
                violations.push(format!("size {} lies in no admissible interval", a.size));
            }
            [iv] => {
                let want = (q + 1 - iv.k) as u32;
                if knots.iter().any(|&j| j != want) {
                    violations.push(format!(
                        "size {} has largest knots {:?}, expected {want}",
                        a.size, knots
                    ));
                } else {
                    conforming.push((a.size, iv.k));
                }
            }
            _ => violations.push(format!("size {} lies in several intervals", a.size)),
        }
    }
    let q_minus_one_knot_sizes = report
        .max_knots
        .iter()
        .filter(|(_, ks)| q >= 2 && ks.contains(&((q - 1) as u32)))
        .map(|(&s, _)| s)
        .collect();
    ConformanceSummary {
        q: report.q,
        theorem_cutoff: profile.theorem_size_cutoff,
        conforming,
        violations,
        gap_hits,
        q_minus_one_knot_sizes,
        min_size: report.min_size(),
        general_lower_bound: q * (q + 1) / 2,
        desarguesian_minimum: desarguesian_minimum(q),
        identity_failures: report.violations.identities,
        inequality_failures: report.violations.inequalities,
    }
}

/// First selection of the target size in odometer order.
pub fn find_witness(
    plane: &AffinePlane,
    target: u64,
    reduce: bool,
    budget: u64,
) -> Result<LineSelection, SearchError> {
    let qq = plane.num_points() as u64;
    if target == 0 || target > qq {
        return Err(SearchError::InvalidTarget { target, max: qq });
    }
    let space = Space::new(plane, reduce)?;
    if space.total > budget as u128 {
        return Err(SearchError::BudgetExceeded {
            required: space.total,
            budget,
        });
    }
    let mut digits = space.decode(0);
    let mut ev = IncrementalEvaluator::new(plane, &space.lines(&digits));
    let last = digits.len() - 1;
    for _ in 0..space.total {
        if ev.size() == target {
            return Ok(
                LineSelection::new(plane, ev.chosen().to_vec()).expect("odometer stays in classes")
            );
        }
        let mut c = last;
        loop {
            digits[c] += 1;
            if digits[c] < space.choices[c].len() {
                ev.replace(c as u32, space.choices[c][digits[c]]);
                break;
            }
            digits[c] = 0;
            ev.replace(c as u32, space.choices[c][0]);
            if c == 0 {
                break;
            }
            c -= 1;
        }
    }
    Err(SearchError::NotFound(target))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub n: u64,
    pub seed: u64,
    pub identities_passed: u64,
    pub inequalities_passed: u64,
    /// Selections of size at least `q(q+1)/2`.
    pub lower_bound_passed: u64,
    pub min_size: u64,
    pub max_size: u64,
}

impl IdentityReport {
    pub fn all_passed(&self) -> bool {
        self.identities_passed == self.n
            && self.inequalities_passed == self.n
            && self.lower_bound_passed == self.n
    }
}

/// Draws `n` selections and checks the counting identities and the three
/// knot inequalities on each, recomputing the spectrum from scratch.
pub fn sample_check(plane: &AffinePlane, n: u64, seed: u64) -> Result<IdentityReport, SearchError> {
    if n == 0 {
        return Err(SearchError::NoSamples);
    }
    let space = Space::new(plane, false)?;
    let q = plane.order() as u64;
    let mut report = IdentityReport {
        n,
        seed,
        identities_passed: 0,
        inequalities_passed: 0,
        lower_bound_passed: 0,
        min_size: u64::MAX,
        max_size: 0,
    };
    for i in 0..n {
        let sel = LineSelection::new(plane, sample_selection(&space, seed, i))
            .expect("sampled per class");
        let ks = crate::kakeya::cover(plane, &sel).expect("validated selection");
        let spectrum: KnotSpectrum = ks.knot_spectrum();
        let size = ks.size() as u64;
        let mk = spectrum.max_knot();
        report.identities_passed += spectrum.verify_counting_identities(q) as u64;
        report.inequalities_passed +=
            KnotInequalities::evaluate(q, spectrum.uncovered(), mk.k as u64).all() as u64;
        report.lower_bound_passed += (size >= q * (q + 1) / 2) as u64;
        report.min_size = report.min_size.min(size);
        report.max_size = report.max_size.max(size);
    }
    Ok(report)
}
