//! Affine and projective planes as index-based incidence structures.
//!
//! Points and lines are dense `u32` indices. Every line is stored both as a
//! sorted point list and as a point bitset, and the parallel classes of an
//! affine plane are explicit: `classes()[c]` lists the `q` lines of class `c`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

use crate::gf::{Element, Field};

pub type Point = u32;
pub type LineId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlaneError {
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("axiom `{axiom}` violated: {detail}")]
    AxiomViolation { axiom: &'static str, detail: String },
    #[error("line index {0} out of range")]
    InvalidLineIndex(u32),
    #[error("order {0} is not a perfect square")]
    NotASquareOrder(u32),
    #[error("i/o error: {0}")]
    Io(String),
}

/// One named axiom and whether it held.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomCheck {
    pub axiom: &'static str,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<AxiomCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| !c.passed)
    }

    fn push(&mut self, axiom: &'static str, failure: Option<String>) {
        self.checks.push(AxiomCheck {
            axiom,
            passed: failure.is_none(),
            detail: failure,
        });
    }

    fn into_result(self) -> Result<(), PlaneError> {
        match self.first_failure() {
            None => Ok(()),
            Some(c) => Err(PlaneError::AxiomViolation {
                axiom: c.axiom,
                detail: c.detail.clone().unwrap_or_default(),
            }),
        }
    }
}

/// Checks the affine-plane axioms on raw incidence data: `lines[i]` is the
/// point list of line `i` and `classes[c]` the line indices of class `c`.
pub fn verify_affine_axioms(
    q: u32,
    lines: &[Vec<Point>],
    classes: &[Vec<LineId>],
) -> ValidationReport {
    let mut report = ValidationReport { checks: Vec::new() };
    let n_points = (q * q) as usize;
    let n_lines = (q * q + q) as usize;

    report.push(
        "line-count",
        (lines.len() != n_lines)
            .then(|| format!("expected {n_lines} lines, found {}", lines.len())),
    );

    let mut bad_size = None;
    for (i, line) in lines.iter().enumerate() {
        if let Some(&p) = line.iter().find(|&&p| p as usize >= n_points) {
            bad_size = Some(format!("line {i} contains point {p} outside 0..{n_points}"));
            break;
        }
        let mut sorted = line.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != q as usize || line.len() != q as usize {
            bad_size = Some(format!(
                "line {i} has {} distinct points, expected {q}",
                sorted.len()
            ));
            break;
        }
    }
    let sizes_ok = bad_size.is_none();
    report.push("line-size", bad_size);

    // Pair coverage: every pair of distinct points on exactly one line.
    let mut design = None;
    if sizes_ok {
        let mut pair_count = vec![0u8; n_points * n_points];
        'lines: for (i, line) in lines.iter().enumerate() {
            for (a_idx, &a) in line.iter().enumerate() {
                for &b in &line[a_idx + 1..] {
                    let (lo, hi) = (a.min(b) as usize, a.max(b) as usize);
                    let slot = &mut pair_count[lo * n_points + hi];
                    *slot += 1;
                    if *slot > 1 {
                        design = Some(format!(
                            "points {lo} and {hi} share two lines (second is line {i})"
                        ));
                        break 'lines;
                    }
                }
            }
        }
        if design.is_none() {
            'pairs: for a in 0..n_points {
                for b in a + 1..n_points {
                    if pair_count[a * n_points + b] == 0 {
                        design = Some(format!("points {a} and {b} lie on no common line"));
                        break 'pairs;
                    }
                }
            }
        }
    } else {
        design = Some("skipped: line sizes invalid".to_string());
    }
    report.push("two-design", design);

    let mut class_shape = None;
    if classes.len() != (q + 1) as usize {
        class_shape = Some(format!(
            "expected {} classes, found {}",
            q + 1,
            classes.len()
        ));
    } else {
        let mut seen = vec![0u32; lines.len()];
        for (c, class) in classes.iter().enumerate() {
            if class.len() != q as usize {
                class_shape = Some(format!("class {c} has {} lines, expected {q}", class.len()));
                break;
            }
            for &l in class {
                match seen.get_mut(l as usize) {
                    Some(s) => *s += 1,
                    None => {
                        class_shape = Some(format!("class {c} names unknown line {l}"));
                        break;
                    }
                }
            }
        }
        if class_shape.is_none() {
            if let Some(l) = seen.iter().position(|&s| s != 1) {
                class_shape = Some(format!("line {l} belongs to {} classes", seen[l]));
            }
        }
    }
    let classes_ok = class_shape.is_none();
    report.push("class-shape", class_shape);

    let mut partition = None;
    if classes_ok && sizes_ok {
        'classes: for (c, class) in classes.iter().enumerate() {
            let mut hit = vec![false; n_points];
            for &l in class {
                for &p in &lines[l as usize] {
                    if std::mem::replace(&mut hit[p as usize], true) {
                        partition = Some(format!("class {c}: point {p} lies on two of its lines"));
                        break 'classes;
                    }
                }
            }
            if let Some(p) = hit.iter().position(|h| !h) {
                partition = Some(format!("class {c}: point {p} is not covered"));
                break;
            }
        }
    } else {
        partition = Some("skipped: classes or line sizes invalid".to_string());
    }
    report.push("class-partition", partition);

    report
}

/// Groups lines into families of pairwise disjoint lines, first fit in line order.
pub fn infer_classes(n_points: usize, lines: &[Vec<Point>]) -> Vec<Vec<LineId>> {
    let mut classes: Vec<Vec<LineId>> = Vec::new();
    let mut cover: Vec<FixedBitSet> = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        let slot = cover
            .iter()
            .position(|c| line.iter().all(|&p| !c.contains(p as usize)));
        let slot = slot.unwrap_or_else(|| {
            classes.push(Vec::new());
            cover.push(FixedBitSet::with_capacity(n_points));
            classes.len() - 1
        });
        classes[slot].push(i as LineId);
        for &p in line {
            if (p as usize) < n_points {
                cover[slot].insert(p as usize);
            }
        }
    }
    classes
}

/// Where an affine plane came from, when it was cut out of a projective plane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectiveEmbedding {
    pub removed_line: u32,
    /// Projective index of each affine point.
    pub point_to_projective: Vec<u32>,
    /// Projective index of each affine line.
    pub line_to_projective: Vec<u32>,
    /// Point on the removed line belonging to each parallel class.
    pub class_to_infinite_point: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct AffinePlane {
    q: u32,
    lines: Vec<Vec<Point>>,
    line_bits: Vec<FixedBitSet>,
    classes: Vec<Vec<LineId>>,
    line_class: Vec<u32>,
    // through[p * (q + 1) + c] is the class-c line through p.
    through: Vec<LineId>,
    translation_coordinates: bool,
    embedding: Option<ProjectiveEmbedding>,
}

impl PartialEq for AffinePlane {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q && self.lines == other.lines && self.classes == other.classes
    }
}

impl Eq for AffinePlane {}

impl AffinePlane {
    /// Validates incidence data and builds the plane. Line point lists are
    /// sorted; line and class order are kept as given.
    pub fn from_incidence(
        q: u32,
        mut lines: Vec<Vec<Point>>,
        classes: Vec<Vec<LineId>>,
    ) -> Result<Self, PlaneError> {
        verify_affine_axioms(q, &lines, &classes).into_result()?;
        for line in &mut lines {
            line.sort_unstable();
        }
        let n_points = (q * q) as usize;
        let line_bits = lines
            .iter()
            .map(|line| {
                let mut bits = FixedBitSet::with_capacity(n_points);
                bits.extend(line.iter().map(|&p| p as usize));
                bits
            })
            .collect();
        let mut line_class = vec![0u32; lines.len()];
        for (c, class) in classes.iter().enumerate() {
            for &l in class {
                line_class[l as usize] = c as u32;
            }
        }
        let width = (q + 1) as usize;
        let mut through = vec![0; n_points * width];
        for (l, line) in lines.iter().enumerate() {
            let c = line_class[l] as usize;
            for &p in line {
                through[p as usize * width + c] = l as LineId;
            }
        }
        Ok(AffinePlane {
            q,
            lines,
            line_bits,
            classes,
            line_class,
            through,
            translation_coordinates: false,
            embedding: None,
        })
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn num_points(&self) -> usize {
        (self.q * self.q) as usize
    }

    pub fn num_lines(&self) -> usize {
        self.lines.len()
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn line(&self, l: LineId) -> &[Point] {
        &self.lines[l as usize]
    }

    pub fn line_bits(&self, l: LineId) -> &FixedBitSet {
        &self.line_bits[l as usize]
    }

    pub fn lines(&self) -> &[Vec<Point>] {
        &self.lines
    }

    pub fn classes(&self) -> &[Vec<LineId>] {
        &self.classes
    }

    pub fn class_of(&self, l: LineId) -> u32 {
        self.line_class[l as usize]
    }

    /// The line of class `class` through `p`.
    #[inline]
    pub fn line_through(&self, p: Point, class: u32) -> LineId {
        self.through[(p * (self.q + 1) + class) as usize]
    }

    /// All `q + 1` lines through `p`, indexed by class.
    pub fn lines_through(&self, p: Point) -> &[LineId] {
        let w = (self.q + 1) as usize;
        &self.through[p as usize * w..(p as usize + 1) * w]
    }

    pub fn contains(&self, l: LineId, p: Point) -> bool {
        self.line_bits[l as usize].contains(p as usize)
    }

    /// Common point of two lines, if they meet.
    pub fn meet(&self, a: LineId, b: LineId) -> Option<Point> {
        if a == b || self.class_of(a) == self.class_of(b) {
            return None;
        }
        self.line(a).iter().copied().find(|&p| self.contains(b, p))
    }

    /// True when points are `x * q + y` over GF(q) and the classes are the
    /// slopes in element order followed by the verticals, so that the
    /// translations `(x, y) -> (x + a, y + b)` are known automorphisms.
    pub fn has_translation_coordinates(&self) -> bool {
        self.translation_coordinates
    }

    pub fn projective_embedding(&self) -> Option<&ProjectiveEmbedding> {
        self.embedding.as_ref()
    }

    pub fn verify(&self) -> ValidationReport {
        verify_affine_axioms(self.q, &self.lines, &self.classes)
    }

    /// Writes the plane in the text format read by [`load_plane`].
    pub fn dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(self.dump_string().as_bytes())
    }

    pub fn dump_string(&self) -> String {
        let mut s = String::new();
        writeln!(s, "q {}", self.q).unwrap();
        for (l, line) in self.lines.iter().enumerate() {
            write!(s, "L {}", self.line_class[l]).unwrap();
            for p in line {
                write!(s, " {p}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    /// Counts, for every pair of parallel classes, the parallelograms with
    /// sides in those classes and how many of them have parallel diagonals
    /// (affine subplanes of order 2). The sorted list is invariant under
    /// relabeling of points and lines.
    pub fn certificate(&self) -> PlaneCertificate {
        let mut entries = Vec::new();
        let nc = self.classes.len();
        for c1 in 0..nc {
            for c2 in c1 + 1..nc {
                let (a, b) = (&self.classes[c1], &self.classes[c2]);
                let mut total = 0u64;
                let mut fano = 0u64;
                for i in 0..a.len() {
                    for j in i + 1..a.len() {
                        for k in 0..b.len() {
                            for m in k + 1..b.len() {
                                let p00 = self.meet(a[i], b[k]).unwrap();
                                let p11 = self.meet(a[j], b[m]).unwrap();
                                let p01 = self.meet(a[i], b[m]).unwrap();
                                let p10 = self.meet(a[j], b[k]).unwrap();
                                let d1 = self.joining_line(p00, p11);
                                let d2 = self.joining_line(p01, p10);
                                total += 1;
                                if self.class_of(d1) == self.class_of(d2) {
                                    fano += 1;
                                }
                            }
                        }
                    }
                }
                entries.push((total, fano));
            }
        }
        entries.sort_unstable();
        PlaneCertificate { q: self.q, entries }
    }

    /// The line through two distinct points.
    pub fn joining_line(&self, a: Point, b: Point) -> LineId {
        let w = (self.q + 1) as usize;
        let la = &self.through[a as usize * w..(a as usize + 1) * w];
        *la.iter()
            .find(|&&l| self.contains(l, b))
            .expect("two distinct points lie on a common line")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaneCertificate {
    pub q: u32,
    /// Sorted (parallelograms, parallelograms with parallel diagonals) per class pair.
    pub entries: Vec<(u64, u64)>,
}

impl PlaneCertificate {
    /// Whether the plane contains an affine subplane of order 2.
    pub fn has_order_two_subplane(&self) -> bool {
        self.entries.iter().any(|&(_, f)| f > 0)
    }
}

/// AG(2,q): point `(x, y)` is `x * q + y`; line `m * q + c` is `y = m x + c`
/// and line `q * q + c` is `x = c`. Class `m < q` holds the slope-`m` lines,
/// class `q` the verticals.
pub fn desarguesian_affine(field: &Field) -> AffinePlane {
    let q = field.order();
    let mut lines = Vec::with_capacity((q * q + q) as usize);
    let mut classes = Vec::with_capacity(q as usize + 1);
    for m in field.elements() {
        let mut class = Vec::with_capacity(q as usize);
        for c in field.elements() {
            class.push(lines.len() as LineId);
            lines.push(
                field
                    .elements()
                    .map(|x| x * q + field.add(field.mul(m, x), c))
                    .collect::<Vec<_>>(),
            );
        }
        classes.push(class);
    }
    let mut verticals = Vec::with_capacity(q as usize);
    for c in field.elements() {
        verticals.push(lines.len() as LineId);
        lines.push(field.elements().map(|y| c * q + y).collect());
    }
    classes.push(verticals);
    let mut plane = AffinePlane::from_incidence(q, lines, classes)
        .expect("AG(2,q) satisfies the affine axioms");
    plane.translation_coordinates = true;
    plane
}

/// A projective plane of order `q` with both incidence directions stored.
#[derive(Debug, Clone)]
pub struct ProjectivePlane {
    q: u32,
    point_coords: Vec<[Element; 3]>,
    line_coords: Vec<[Element; 3]>,
    lines: Vec<Vec<u32>>,
    point_lines: Vec<Vec<u32>>,
}

/// Normalized homogeneous triples (first nonzero coordinate 1) in lex order.
fn normalized_triples(field: &Field) -> Vec<[Element; 3]> {
    let q = field.order();
    let mut out = Vec::with_capacity((q * q + q + 1) as usize);
    out.push([0, 0, 1]);
    for z in 0..q {
        out.push([0, 1, z]);
    }
    for y in 0..q {
        for z in 0..q {
            out.push([1, y, z]);
        }
    }
    out
}

/// PG(2,q) over `field`. Points and lines are both indexed by the lex order
/// of their normalized coordinate triples; `[a, b, c]` is the line
/// `a x + b y + c z = 0`.
pub fn desarguesian_projective(field: &Field) -> ProjectivePlane {
    let coords = normalized_triples(field);
    let n = coords.len();
    let mut lines = vec![Vec::new(); n];
    let mut point_lines = vec![Vec::new(); n];
    for (l, lc) in coords.iter().enumerate() {
        for (p, pc) in coords.iter().enumerate() {
            let dot = (0..3).fold(0, |acc, i| field.add(acc, field.mul(lc[i], pc[i])));
            if dot == 0 {
                lines[l].push(p as u32);
                point_lines[p].push(l as u32);
            }
        }
    }
    ProjectivePlane {
        q: field.order(),
        point_coords: coords.clone(),
        line_coords: coords,
        lines,
        point_lines,
    }
}

impl ProjectivePlane {
    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn num_points(&self) -> usize {
        self.point_coords.len()
    }

    pub fn num_lines(&self) -> usize {
        self.lines.len()
    }

    pub fn line(&self, l: u32) -> &[u32] {
        &self.lines[l as usize]
    }

    pub fn lines_through(&self, p: u32) -> &[u32] {
        &self.point_lines[p as usize]
    }

    pub fn point_coords(&self, p: u32) -> [Element; 3] {
        self.point_coords[p as usize]
    }

    pub fn line_coords(&self, l: u32) -> [Element; 3] {
        self.line_coords[l as usize]
    }

    pub fn verify(&self) -> ValidationReport {
        let mut report = ValidationReport { checks: Vec::new() };
        let q = self.q as usize;
        let n = q * q + q + 1;
        report.push(
            "counts",
            (self.num_points() != n || self.num_lines() != n)
                .then(|| format!("expected {n} points and lines")),
        );
        report.push(
            "line-size",
            self.lines
                .iter()
                .position(|l| l.len() != q + 1)
                .map(|l| format!("line {l} does not have {} points", q + 1)),
        );
        let common = |a: &[u32], b: &[u32]| a.iter().filter(|x| b.binary_search(x).is_ok()).count();
        let mut joining = None;
        'p: for a in 0..self.num_points() {
            for b in a + 1..self.num_points() {
                let k = common(&self.point_lines[a], &self.point_lines[b]);
                if k != 1 {
                    joining = Some(format!("points {a} and {b} share {k} lines"));
                    break 'p;
                }
            }
        }
        report.push("two-points-one-line", joining);
        let mut meeting = None;
        'l: for a in 0..self.num_lines() {
            for b in a + 1..self.num_lines() {
                let k = common(&self.lines[a], &self.lines[b]);
                if k != 1 {
                    meeting = Some(format!("lines {a} and {b} share {k} points"));
                    break 'l;
                }
            }
        }
        report.push("two-lines-one-point", meeting);
        report
    }
}

/// Removes `line_at_infinity` and its points. Affine points keep the order of
/// their projective indices; class `c` collects the punctured lines through
/// the `c`-th point of the removed line.
pub fn affine_from_projective(
    pp: &ProjectivePlane,
    line_at_infinity: u32,
) -> Result<AffinePlane, PlaneError> {
    if line_at_infinity as usize >= pp.num_lines() {
        return Err(PlaneError::InvalidLineIndex(line_at_infinity));
    }
    let removed = pp.line(line_at_infinity);
    let mut affine_index = vec![u32::MAX; pp.num_points()];
    let mut point_to_projective = Vec::new();
    for p in 0..pp.num_points() as u32 {
        if removed.binary_search(&p).is_err() {
            affine_index[p as usize] = point_to_projective.len() as u32;
            point_to_projective.push(p);
        }
    }
    let mut lines = Vec::new();
    let mut classes = Vec::new();
    let mut line_to_projective = Vec::new();
    for &inf in removed {
        let mut class = Vec::new();
        for &l in pp.lines_through(inf) {
            if l == line_at_infinity {
                continue;
            }
            class.push(lines.len() as LineId);
            line_to_projective.push(l);
            lines.push(
                pp.line(l)
                    .iter()
                    .filter(|&&p| p != inf)
                    .map(|&p| affine_index[p as usize])
                    .collect(),
            );
        }
        classes.push(class);
    }
    let mut plane = AffinePlane::from_incidence(pp.order(), lines, classes)?;
    plane.embedding = Some(ProjectiveEmbedding {
        removed_line: line_at_infinity,
        point_to_projective,
        line_to_projective,
        class_to_infinite_point: removed.to_vec(),
    });
    Ok(plane)
}

/// The Baer subplane PG(2, √q) of PG(2, q) over the subfield, and how every
/// line of the big plane meets it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaerSubplane {
    pub sqrt_q: u32,
    /// Sorted projective indices of the subplane points.
    pub points: Vec<u32>,
    /// Number of subplane points on each projective line (1 or √q + 1).
    pub intersection_sizes: Vec<u32>,
    /// Lines meeting the subplane in √q + 1 points, in index order.
    pub extended_lines: Vec<u32>,
}

impl BaerSubplane {
    pub fn contains(&self, p: u32) -> bool {
        self.points.binary_search(&p).is_ok()
    }

    /// Lines meeting the subplane in exactly one point.
    pub fn is_tangent(&self, l: u32) -> bool {
        self.intersection_sizes[l as usize] == 1
    }
}

pub fn integer_sqrt(n: u32) -> Option<u32> {
    let r = (n as f64).sqrt().round() as u32;
    (r * r == n).then_some(r)
}

pub fn baer_subplane(field: &Field, pp: &ProjectivePlane) -> Result<BaerSubplane, PlaneError> {
    let q = field.order();
    let r = match integer_sqrt(q) {
        Some(r) if field.degree().is_multiple_of(2) => r,
        _ => return Err(PlaneError::NotASquareOrder(q)),
    };
    let sub = field.subfield(r);
    let in_sub = |c: [Element; 3]| c.iter().all(|x| sub.binary_search(x).is_ok());
    let points: Vec<u32> = (0..pp.num_points() as u32)
        .filter(|&p| in_sub(pp.point_coords(p)))
        .collect();
    let intersection_sizes: Vec<u32> = (0..pp.num_lines() as u32)
        .map(|l| {
            pp.line(l)
                .iter()
                .filter(|p| points.binary_search(p).is_ok())
                .count() as u32
        })
        .collect();
    let extended_lines = (0..pp.num_lines() as u32)
        .filter(|&l| intersection_sizes[l as usize] == r + 1)
        .collect();
    Ok(BaerSubplane {
        sqrt_q: r,
        points,
        intersection_sizes,
        extended_lines,
    })
}

/// Reads a plane file: `q <order>` followed by `q^2 + q` lines of the form
/// `L <class> <p0> ... <p(q-1)>`. Class `-1` on every line asks for the
/// classes to be inferred.
pub fn load_plane<R: BufRead>(reader: R) -> Result<AffinePlane, PlaneError> {
    let parse_err = |line: usize, message: String| PlaneError::Parse { line, message };
    let mut q: Option<u32> = None;
    let mut lines = Vec::new();
    let mut labels: Vec<i64> = Vec::new();
    for (i, text) in reader.lines().enumerate() {
        let lineno = i + 1;
        let text = text.map_err(|e| PlaneError::Io(e.to_string()))?;
        let mut tokens = text.split_whitespace();
        let Some(tag) = tokens.next() else { continue };
        match (tag, q) {
            ("q", None) => {
                let v = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .filter(|&v: &u32| v >= 2)
                    .ok_or_else(|| {
                        parse_err(lineno, "expected `q <order>` with order >= 2".into())
                    })?;
                q = Some(v);
            }
            ("L", Some(_)) => {
                let class: i64 = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| parse_err(lineno, "missing class index".into()))?;
                let points = tokens
                    .map(|t| {
                        t.parse::<u32>()
                            .map_err(|_| parse_err(lineno, format!("bad point index `{t}`")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                labels.push(class);
                lines.push(points);
            }
            ("q", Some(_)) => return Err(parse_err(lineno, "duplicate `q` header".into())),
            (_, None) => return Err(parse_err(lineno, "file must start with `q <order>`".into())),
            (other, _) => return Err(parse_err(lineno, format!("unknown record `{other}`"))),
        }
    }
    let q = q.ok_or_else(|| parse_err(0, "empty plane file".into()))?;

    let infer = labels.iter().all(|&c| c == -1);
    let classes = if infer {
        infer_classes((q * q) as usize, &lines)
    } else {
        if let Some(pos) = labels.iter().position(|&c| c < 0 || c > q as i64) {
            return Err(parse_err(
                pos + 2,
                format!("class index {} outside 0..={q}", labels[pos]),
            ));
        }
        let mut classes = vec![Vec::new(); q as usize + 1];
        for (l, &c) in labels.iter().enumerate() {
            classes[c as usize].push(l as LineId);
        }
        classes
    };
    AffinePlane::from_incidence(q, lines, classes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ag(q: u32) -> AffinePlane {
        desarguesian_affine(&Field::of_order(q).unwrap())
    }

    #[test]
    fn desarguesian_affine_sizes() {
        for (q, pts, lines, classes) in [(2, 4, 6, 3), (3, 9, 12, 4), (9, 81, 90, 10)] {
            let plane = ag(q);
            assert_eq!(plane.num_points(), pts);
            assert_eq!(plane.num_lines(), lines);
            assert_eq!(plane.num_classes(), classes);
            assert!(plane.classes().iter().all(|c| c.len() == q as usize));
            assert!(plane.verify().all_passed());
        }
    }

    #[test]
    fn axioms_hold_for_four_and_five() {
        for q in [4, 5] {
            let report = ag(q).verify();
            assert!(report.all_passed(), "{report:?}");
            assert_eq!(report.checks.len(), 5);
        }
    }

    #[test]
    fn moved_point_breaks_the_design() {
        let plane = ag(3);
        let mut lines = plane.lines().to_vec();
        // Move point 0 from line 0 to line 1 (same class).
        let p = lines[0].remove(0);
        let q_pt = lines[1].pop().unwrap();
        lines[1].push(p);
        lines[0].push(q_pt);
        let report = verify_affine_axioms(3, &lines, plane.classes());
        let fail = report.first_failure().unwrap();
        assert_eq!(fail.axiom, "two-design");
    }

    #[test]
    fn line_through_is_consistent() {
        let plane = ag(5);
        for p in 0..plane.num_points() as u32 {
            for c in 0..6 {
                let l = plane.line_through(p, c);
                assert_eq!(plane.class_of(l), c);
                assert!(plane.contains(l, p));
            }
        }
    }

    #[test]
    fn projective_planes() {
        for (q, n) in [(2, 7), (3, 13), (4, 21), (9, 91)] {
            let pp = desarguesian_projective(&Field::of_order(q).unwrap());
            assert_eq!(pp.num_points(), n);
            assert_eq!(pp.num_lines(), n);
            assert!((0..n as u32).all(|l| pp.line(l).len() == q as usize + 1));
            assert!(pp.verify().all_passed());
        }
    }

    #[test]
    fn punctured_projective_planes_are_affine() {
        for q in [2, 3, 4, 5] {
            let pp = desarguesian_projective(&Field::of_order(q).unwrap());
            for l in [0, (pp.num_lines() - 1) as u32] {
                let plane = affine_from_projective(&pp, l).unwrap();
                assert_eq!(plane.num_classes(), q as usize + 1);
                assert!(plane.verify().all_passed());
                let emb = plane.projective_embedding().unwrap();
                assert_eq!(emb.class_to_infinite_point.len(), q as usize + 1);
            }
        }
        let pp = desarguesian_projective(&Field::of_order(2).unwrap());
        assert_eq!(
            affine_from_projective(&pp, 7).unwrap_err(),
            PlaneError::InvalidLineIndex(7)
        );
    }

    #[test]
    fn certificates_match_across_constructions() {
        for q in [2, 3, 4, 5] {
            let field = Field::of_order(q).unwrap();
            let direct = desarguesian_affine(&field).certificate();
            let pp = desarguesian_projective(&field);
            for l in 0..pp.num_lines() as u32 {
                let cut = affine_from_projective(&pp, l).unwrap();
                assert_eq!(cut.certificate(), direct, "q={q} line={l}");
            }
            assert_eq!(direct.has_order_two_subplane(), q % 2 == 0);
        }
    }

    #[test]
    fn baer_subplane_of_pg29() {
        let field = Field::of_order(9).unwrap();
        let pp = desarguesian_projective(&field);
        let baer = baer_subplane(&field, &pp).unwrap();
        assert_eq!(baer.points.len(), 13);
        assert!(baer.intersection_sizes.iter().all(|&s| s == 1 || s == 4));
        assert_eq!(baer.extended_lines.len(), 13);
        let total: u32 = baer.intersection_sizes.iter().sum();
        assert_eq!(total, 13 * 4 + 78);
    }

    #[test]
    fn baer_subplane_of_pg24_is_fano() {
        let field = Field::of_order(4).unwrap();
        let pp = desarguesian_projective(&field);
        let baer = baer_subplane(&field, &pp).unwrap();
        assert_eq!(baer.points.len(), 7);
        assert_eq!(baer.extended_lines.len(), 7);
        let field = Field::of_order(8).unwrap();
        let pp = desarguesian_projective(&field);
        assert_eq!(
            baer_subplane(&field, &pp).unwrap_err(),
            PlaneError::NotASquareOrder(8)
        );
    }

    #[test]
    fn dump_and_reload_round_trip() {
        let plane = ag(3);
        let text = plane.dump_string();
        let back = load_plane(text.as_bytes()).unwrap();
        assert_eq!(back, plane);
        assert_eq!(back.dump_string(), text);
    }

    #[test]
    fn reload_with_inferred_classes() {
        let plane = ag(4);
        let text: String = plane
            .dump_string()
            .lines()
            .map(|l| match l.strip_prefix("L ") {
                Some(rest) => format!("L -1 {}\n", rest.split_once(' ').unwrap().1),
                None => format!("{l}\n"),
            })
            .collect();
        let back = load_plane(text.as_bytes()).unwrap();
        assert_eq!(back.lines(), plane.lines());
        assert_eq!(back.classes(), plane.classes());
    }

    #[test]
    fn two_lines_sharing_two_points_is_rejected() {
        let plane = ag(3);
        let mut text = plane.dump_string();
        // Rewrite line 0 so it shares two points with line 3.
        let first = text.lines().nth(1).unwrap().to_string();
        let second = plane.line(3);
        let replacement = format!("L 0 {} {} {}", second[0], second[1], plane.line(0)[2]);
        text = text.replacen(&first, &replacement, 1);
        match load_plane(text.as_bytes()) {
            Err(PlaneError::AxiomViolation { .. }) => {}
            other => panic!("expected axiom violation, got {other:?}"),
        }
    }

    #[test]
    fn short_class_is_rejected() {
        let plane = ag(3);
        let text = plane.dump_string().replacen("L 0", "L 1", 1);
        match load_plane(text.as_bytes()) {
            Err(PlaneError::AxiomViolation { axiom, .. }) => assert_eq!(axiom, "class-shape"),
            other => panic!("expected axiom violation, got {other:?}"),
        }
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            load_plane("L 0 1 2".as_bytes()),
            Err(PlaneError::Parse { .. })
        ));
        assert!(matches!(
            load_plane("q 3\nL 0 x".as_bytes()),
            Err(PlaneError::Parse { .. })
        ));
        assert!(matches!(
            load_plane("".as_bytes()),
            Err(PlaneError::Parse { .. })
        ));
    }
}
