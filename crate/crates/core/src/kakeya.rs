//! Kakeya sets: one chosen line per parallel class, the points they cover,
//! and the knot spectrum `x_i` (points on exactly `i` chosen lines).

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

use crate::plane::{AffinePlane, LineId, Point};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KakeyaError {
    #[error("selection has {found} lines, expected {expected}")]
    WrongLength { expected: usize, found: usize },
    #[error("line {line} is not in class {class}")]
    SelectionClassMismatch { class: u32, line: LineId },
    #[error("line index {0} out of range")]
    InvalidLine(LineId),
    #[error("point {0} is not covered")]
    PointNotCovered(Point),
    #[error("point {point} is a {incidence}-knot but the largest knot is {max}")]
    PointNotMaxKnot {
        point: Point,
        incidence: u32,
        max: u32,
    },
    #[error("cannot parse selection: {0}")]
    Parse(String),
}

/// The chosen line of every parallel class; entry `c` lies in class `c`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct LineSelection {
    chosen: Vec<LineId>,
}

impl LineSelection {
    /// Validates that `chosen[c]` is a line of class `c` for every class.
    pub fn new(plane: &AffinePlane, chosen: Vec<LineId>) -> Result<Self, KakeyaError> {
        let expected = plane.num_classes();
        if chosen.len() != expected {
            return Err(KakeyaError::WrongLength {
                expected,
                found: chosen.len(),
            });
        }
        for (c, &l) in chosen.iter().enumerate() {
            if l as usize >= plane.num_lines() {
                return Err(KakeyaError::InvalidLine(l));
            }
            if plane.class_of(l) != c as u32 {
                return Err(KakeyaError::SelectionClassMismatch {
                    class: c as u32,
                    line: l,
                });
            }
        }
        Ok(LineSelection { chosen })
    }

    /// Places lines given in any order into their classes. Two lines from the
    /// same class are a mismatch.
    pub fn from_lines<I: IntoIterator<Item = LineId>>(
        plane: &AffinePlane,
        lines: I,
    ) -> Result<Self, KakeyaError> {
        let mut chosen = vec![LineId::MAX; plane.num_classes()];
        let mut count = 0;
        for l in lines {
            count += 1;
            if l as usize >= plane.num_lines() {
                return Err(KakeyaError::InvalidLine(l));
            }
            let c = plane.class_of(l);
            if chosen[c as usize] != LineId::MAX {
                return Err(KakeyaError::SelectionClassMismatch { class: c, line: l });
            }
            chosen[c as usize] = l;
        }
        if count != plane.num_classes() {
            return Err(KakeyaError::WrongLength {
                expected: plane.num_classes(),
                found: count,
            });
        }
        Ok(LineSelection { chosen })
    }

    pub fn chosen(&self) -> &[LineId] {
        &self.chosen
    }

    pub fn line(&self, class: u32) -> LineId {
        self.chosen[class as usize]
    }

    /// Parses the selection file format: the chosen line of each class, in
    /// class order, separated by whitespace.
    pub fn parse(plane: &AffinePlane, text: &str) -> Result<Self, KakeyaError> {
        let chosen = text
            .split_whitespace()
            .map(|t| {
                t.parse::<LineId>()
                    .map_err(|_| KakeyaError::Parse(format!("bad line index `{t}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(plane, chosen)
    }

    pub fn to_text(&self) -> String {
        let mut s = self
            .chosen
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        s.push('\n');
        s
    }
}

/// Number of points on exactly `i` chosen lines, for `i` in `0..=q+1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct KnotSpectrum {
    x: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CountingIdentities {
    /// sum x_i = q^2
    pub points: bool,
    /// sum i x_i = q^2 + q
    pub incidences: bool,
    /// sum i(i-1) x_i = q^2 + q
    pub pairs: bool,
}

impl CountingIdentities {
    pub fn all(&self) -> bool {
        self.points && self.incidences && self.pairs
    }
}

/// The three size bounds on the uncovered count `x_0` in terms of
/// `k = q + 1 - (largest knot)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KnotInequalities {
    /// x_0 >= qk / (q + 1 - k)
    pub ratio_lower: bool,
    /// x_0 >= k(q - k)
    pub product_lower: bool,
    /// x_0 <= kq - k(k+1)/2
    pub upper: bool,
}

impl KnotInequalities {
    pub fn all(&self) -> bool {
        self.ratio_lower && self.product_lower && self.upper
    }

    pub fn evaluate(q: u64, uncovered: u64, k: u64) -> Self {
        let x0 = uncovered as i128;
        let (q, k) = (q as i128, k as i128);
        KnotInequalities {
            ratio_lower: x0 * (q + 1 - k) >= q * k,
            product_lower: x0 >= k * (q - k),
            upper: x0 <= k * q - k * (k + 1) / 2,
        }
    }
}

impl KnotSpectrum {
    pub fn from_counts(x: Vec<u64>) -> Self {
        KnotSpectrum { x }
    }

    pub fn counts(&self) -> &[u64] {
        &self.x
    }

    pub fn get(&self, i: usize) -> u64 {
        self.x.get(i).copied().unwrap_or(0)
    }

    pub fn uncovered(&self) -> u64 {
        self.get(0)
    }

    pub fn identities(&self, q: u64) -> CountingIdentities {
        let (mut s0, mut s1, mut s2) = (0u64, 0u64, 0u64);
        for (i, &x) in self.x.iter().enumerate() {
            let i = i as u64;
            s0 += x;
            s1 += i * x;
            s2 += i * i.saturating_sub(1) * x;
        }
        CountingIdentities {
            points: s0 == q * q,
            incidences: s1 == q * q + q,
            pairs: s2 == q * q + q,
        }
    }

    /// True iff the spectrum has length `q + 2` and satisfies all three
    /// counting identities.
    pub fn verify_counting_identities(&self, q: u64) -> bool {
        self.x.len() as u64 == q + 2 && self.identities(q).all()
    }

    /// Largest `j` with `x_j > 0` among `j >= 1`, and `k = q + 1 - j`.
    pub fn max_knot(&self) -> MaxKnot {
        let q1 = self.x.len() as u32 - 1;
        let j = (1..=q1)
            .rev()
            .find(|&j| self.x[j as usize] > 0)
            .unwrap_or(0);
        MaxKnot { j, k: q1 - j }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MaxKnot {
    /// Incidence of the largest knot.
    pub j: u32,
    /// `q + 1 - j`.
    pub k: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KakeyaSet {
    q: u32,
    selection: LineSelection,
    covered: FixedBitSet,
    incidence: Vec<u32>,
}

/// Covers the plane with the chosen lines.
pub fn cover(plane: &AffinePlane, selection: &LineSelection) -> Result<KakeyaSet, KakeyaError> {
    // Selections are validated on construction, but they carry no plane
    // reference; recheck against this plane.
    let selection = LineSelection::new(plane, selection.chosen.clone())?;
    let mut covered = FixedBitSet::with_capacity(plane.num_points());
    let mut incidence = vec![0u32; plane.num_points()];
    for &l in selection.chosen() {
        covered.union_with(plane.line_bits(l));
        for &p in plane.line(l) {
            incidence[p as usize] += 1;
        }
    }
    Ok(KakeyaSet {
        q: plane.order(),
        selection,
        covered,
        incidence,
    })
}

impl KakeyaSet {
    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn selection(&self) -> &LineSelection {
        &self.selection
    }

    pub fn covered(&self) -> &FixedBitSet {
        &self.covered
    }

    pub fn incidence(&self, p: Point) -> u32 {
        self.incidence[p as usize]
    }

    pub fn size(&self) -> usize {
        self.covered.count_ones(..)
    }

    pub fn knot_spectrum(&self) -> KnotSpectrum {
        let mut x = vec![0u64; self.q as usize + 2];
        for &c in &self.incidence {
            x[c as usize] += 1;
        }
        KnotSpectrum { x }
    }

    pub fn max_knot(&self) -> MaxKnot {
        self.knot_spectrum().max_knot()
    }

    pub fn uncovered_points(&self) -> Vec<Point> {
        self.covered.zeroes().map(|p| p as Point).collect()
    }

    /// For a point `p`: the chosen lines missing `p`, and the unchosen lines
    /// through `p`. With `require_max_knot`, `p` must be a largest knot.
    pub fn derived_views(
        &self,
        plane: &AffinePlane,
        p: Point,
        require_max_knot: bool,
    ) -> Result<DerivedViews, KakeyaError> {
        let incidence = self.incidence(p);
        if incidence == 0 {
            return Err(KakeyaError::PointNotCovered(p));
        }
        if require_max_knot {
            let max = self.max_knot().j;
            if incidence != max {
                return Err(KakeyaError::PointNotMaxKnot {
                    point: p,
                    incidence,
                    max,
                });
            }
        }
        let missing_p = self
            .selection
            .chosen()
            .iter()
            .copied()
            .filter(|&l| !plane.contains(l, p))
            .collect();
        let unchosen_through_p = plane
            .lines_through(p)
            .iter()
            .enumerate()
            .filter(|&(c, &l)| self.selection.line(c as u32) != l)
            .map(|(_, &l)| l)
            .collect();
        Ok(DerivedViews {
            missing_p,
            unchosen_through_p,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedViews {
    /// Chosen lines not through the point.
    pub missing_p: Vec<LineId>,
    /// Lines through the point that were not chosen.
    pub unchosen_through_p: Vec<LineId>,
}

/// Everything the analyzer reports about one selection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Analysis {
    pub q: u32,
    pub selection: LineSelection,
    pub size: u64,
    pub spectrum: KnotSpectrum,
    pub max_knot: MaxKnot,
    pub identities: CountingIdentities,
    pub inequalities: KnotInequalities,
}

pub fn analyze(plane: &AffinePlane, selection: &LineSelection) -> Result<Analysis, KakeyaError> {
    let ks = cover(plane, selection)?;
    let spectrum = ks.knot_spectrum();
    let q = plane.order() as u64;
    let max_knot = spectrum.max_knot();
    Ok(Analysis {
        q: plane.order(),
        selection: selection.clone(),
        size: ks.size() as u64,
        identities: spectrum.identities(q),
        inequalities: KnotInequalities::evaluate(q, spectrum.uncovered(), max_knot.k as u64),
        max_knot,
        spectrum,
    })
}

/// Keeps per-point incidence counts and the knot histogram up to date while
/// single chosen lines are swapped, at O(q) per swap.
#[derive(Debug, Clone)]
pub struct IncrementalEvaluator<'a> {
    plane: &'a AffinePlane,
    chosen: Vec<LineId>,
    incidence: Vec<u32>,
    histogram: Vec<u64>,
}

impl<'a> IncrementalEvaluator<'a> {
    /// `chosen[c]` must be a class-`c` line of `plane`.
    pub fn new(plane: &'a AffinePlane, chosen: &[LineId]) -> Self {
        debug_assert!(chosen
            .iter()
            .enumerate()
            .all(|(c, &l)| plane.class_of(l) == c as u32));
        let q = plane.order() as usize;
        let mut ev = IncrementalEvaluator {
            plane,
            chosen: chosen.to_vec(),
            incidence: vec![0; plane.num_points()],
            histogram: vec![0; q + 2],
        };
        ev.histogram[0] = plane.num_points() as u64;
        for &l in chosen {
            ev.add_line(l);
        }
        ev
    }

    #[inline]
    fn add_line(&mut self, l: LineId) {
        for &p in self.plane.line(l) {
            let c = &mut self.incidence[p as usize];
            self.histogram[*c as usize] -= 1;
            *c += 1;
            self.histogram[*c as usize] += 1;
        }
    }

    #[inline]
    fn remove_line(&mut self, l: LineId) {
        for &p in self.plane.line(l) {
            let c = &mut self.incidence[p as usize];
            self.histogram[*c as usize] -= 1;
            *c -= 1;
            self.histogram[*c as usize] += 1;
        }
    }

    /// Swaps the chosen line of `class` for `line` (a line of that class).
    #[inline]
    pub fn replace(&mut self, class: u32, line: LineId) {
        let old = self.chosen[class as usize];
        if old != line {
            self.remove_line(old);
            self.add_line(line);
            self.chosen[class as usize] = line;
        }
    }

    pub fn chosen(&self) -> &[LineId] {
        &self.chosen
    }

    pub fn histogram(&self) -> &[u64] {
        &self.histogram
    }

    pub fn uncovered(&self) -> u64 {
        self.histogram[0]
    }

    pub fn size(&self) -> u64 {
        self.plane.num_points() as u64 - self.histogram[0]
    }

    #[inline]
    pub fn max_knot(&self) -> u32 {
        let top = self.histogram.len() - 1;
        (1..=top)
            .rev()
            .find(|&j| self.histogram[j] > 0)
            .unwrap_or(0) as u32
    }

    pub fn spectrum(&self) -> KnotSpectrum {
        KnotSpectrum::from_counts(self.histogram.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::Field;
    use crate::plane::desarguesian_affine;

    fn ag(q: u32) -> AffinePlane {
        desarguesian_affine(&Field::of_order(q).unwrap())
    }

    fn pencil(plane: &AffinePlane, p: Point) -> LineSelection {
        LineSelection::new(plane, plane.lines_through(p).to_vec()).unwrap()
    }

    #[test]
    fn pencil_in_ag22() {
        let plane = ag(2);
        let sel = pencil(&plane, 0);
        let ks = cover(&plane, &sel).unwrap();
        assert_eq!(ks.size(), 4);
        let spec = ks.knot_spectrum();
        assert_eq!(spec.counts(), &[0, 3, 0, 1]);
        assert!(spec.verify_counting_identities(2));
        assert_eq!(ks.max_knot(), MaxKnot { j: 3, k: 0 });
        let views = ks.derived_views(&plane, 0, true).unwrap();
        assert!(views.missing_p.is_empty() && views.unchosen_through_p.is_empty());
    }

    #[test]
    fn tampered_spectrum_fails_identities() {
        let mut x = vec![0, 3, 0, 1];
        x[1] -= 1;
        assert!(!KnotSpectrum::from_counts(x).verify_counting_identities(2));
        assert!(!KnotSpectrum::from_counts(vec![0, 3, 1]).verify_counting_identities(2));
    }

    #[test]
    fn near_pencil_in_ag25() {
        let plane = ag(5);
        let mut chosen = plane.lines_through(0).to_vec();
        // Replace the vertical through the origin by the parallel x = 1.
        chosen[5] = plane.classes()[5][1];
        let sel = LineSelection::new(&plane, chosen).unwrap();
        let ks = cover(&plane, &sel).unwrap();
        assert_eq!(ks.knot_spectrum().counts(), &[4, 15, 5, 0, 0, 1, 0]);
        assert_eq!(ks.max_knot(), MaxKnot { j: 5, k: 1 });
        let views = ks.derived_views(&plane, 0, true).unwrap();
        assert_eq!(views.unchosen_through_p, vec![plane.classes()[5][0]]);
        assert_eq!(views.missing_p, vec![plane.classes()[5][1]]);
        // Every uncovered point lies on an unchosen line through the centre.
        for p in ks.uncovered_points() {
            assert!(views
                .unchosen_through_p
                .iter()
                .any(|&l| plane.contains(l, p)));
        }
        assert_eq!(
            ks.derived_views(&plane, 5, true),
            Err(KakeyaError::PointNotMaxKnot {
                point: 5,
                incidence: 2,
                max: 5
            })
        );
        assert!(ks.derived_views(&plane, 5, false).is_ok());
        assert_eq!(
            ks.derived_views(&plane, 1, false),
            Err(KakeyaError::PointNotCovered(1))
        );
    }

    #[test]
    fn class_mismatch_is_reported() {
        let plane = ag(3);
        let mut chosen = plane.lines_through(0).to_vec();
        chosen[1] = plane.classes()[0][1];
        assert_eq!(
            LineSelection::new(&plane, chosen.clone()),
            Err(KakeyaError::SelectionClassMismatch {
                class: 1,
                line: plane.classes()[0][1]
            })
        );
        assert!(matches!(
            LineSelection::from_lines(&plane, chosen),
            Err(KakeyaError::SelectionClassMismatch { .. })
        ));
        assert!(matches!(
            LineSelection::new(&plane, vec![0, 3]),
            Err(KakeyaError::WrongLength {
                expected: 4,
                found: 2
            })
        ));
        assert_eq!(
            LineSelection::new(&plane, vec![0, 3, 6, 99]),
            Err(KakeyaError::InvalidLine(99))
        );
    }

    #[test]
    fn selection_text_round_trip() {
        let plane = ag(4);
        let sel = pencil(&plane, 7);
        assert_eq!(LineSelection::parse(&plane, &sel.to_text()).unwrap(), sel);
        assert!(matches!(
            LineSelection::parse(&plane, "1 two"),
            Err(KakeyaError::Parse(_))
        ));
    }

    #[test]
    fn incremental_matches_full_recount() {
        let plane = ag(4);
        let start: Vec<LineId> = plane.classes().iter().map(|c| c[0]).collect();
        let mut ev = IncrementalEvaluator::new(&plane, &start);
        let swaps = [(0, 2), (3, 1), (4, 3), (0, 0), (2, 2), (1, 3)];
        for (class, idx) in swaps {
            ev.replace(class, plane.classes()[class as usize][idx]);
            let sel = LineSelection::new(&plane, ev.chosen().to_vec()).unwrap();
            let ks = cover(&plane, &sel).unwrap();
            assert_eq!(ev.spectrum(), ks.knot_spectrum());
            assert_eq!(ev.size(), ks.size() as u64);
            assert_eq!(ev.max_knot(), ks.max_knot().j);
        }
    }

    #[test]
    fn inequality_evaluation() {
        // Pencil: k = 0, x_0 = 0.
        assert!(KnotInequalities::evaluate(9, 0, 0).all());
        // Largest knot sqrt(q)+1 at q = 9: k = 6, x_0 = 18.
        assert!(KnotInequalities::evaluate(9, 18, 6).all());
        let bad = KnotInequalities::evaluate(9, 17, 6);
        assert!(!bad.product_lower);
        assert!(!KnotInequalities::evaluate(9, 40, 6).upper);
    }
}
