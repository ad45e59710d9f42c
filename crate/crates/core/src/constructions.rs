//! Named Kakeya selections: pencils, near-pencils, the dual hyperoval and
//! dual oval constructions of the smallest sets, and the Baer subplane
//! construction of size `q^2 - q sqrt(q) + q`.
//!
//! Every choice is deterministic so fixtures are stable across runs.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::gf::{Field, GfError};
use crate::kakeya::{KakeyaError, LineSelection};
use crate::plane::{
    affine_from_projective, baer_subplane, desarguesian_affine, desarguesian_projective,
    integer_sqrt, AffinePlane, BaerSubplane, LineId, PlaneError, Point, ProjectivePlane,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("family requires even order, got q = {0}")]
    OddOrder(u32),
    #[error("family requires odd order, got q = {0}")]
    EvenOrder(u32),
    #[error("q = {0} is not a perfect square")]
    NotASquareOrder(u32),
    #[error("choice {choice} out of range, {available} available")]
    InvalidChoice { choice: u32, available: u32 },
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Plane(#[from] PlaneError),
    #[error(transparent)]
    Kakeya(#[from] KakeyaError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Pencil,
    NearPencil,
    DualHyperoval,
    DualOvalPlusLine,
    Baer,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Pencil,
        Family::NearPencil,
        Family::DualHyperoval,
        Family::DualOvalPlusLine,
        Family::Baer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Pencil => "pencil",
            Family::NearPencil => "near_pencil",
            Family::DualHyperoval => "dual_hyperoval",
            Family::DualOvalPlusLine => "dual_oval_plus_line",
            Family::Baer => "baer",
        }
    }

    /// Whether the family exists for this order.
    pub fn applies_to(self, q: u32) -> bool {
        match self {
            Family::Pencil | Family::NearPencil => true,
            Family::DualHyperoval => q.is_multiple_of(2),
            Family::DualOvalPlusLine => q % 2 == 1,
            Family::Baer => integer_sqrt(q).is_some_and(|r| r > 1),
        }
    }

    /// Closed-form Kakeya set size.
    pub fn expected_size(self, q: u32) -> u64 {
        let q = q as u64;
        match self {
            Family::Pencil => q * q,
            Family::NearPencil => q * q - q + 1,
            Family::DualHyperoval => q * (q + 1) / 2,
            Family::DualOvalPlusLine => q * (q + 1) / 2 + (q - 1) / 2,
            Family::Baer => {
                let r = (q as f64).sqrt().round() as u64;
                q * q - q * r + q
            }
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = ConstructionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.replace('-', "_");
        Family::ALL
            .into_iter()
            .find(|f| f.name() == norm)
            .ok_or_else(|| ConstructionError::UnknownFamily(s.to_string()))
    }
}

/// A selection together with the plane it indexes.
#[derive(Debug, Clone)]
pub struct Construction {
    pub family: Family,
    pub plane: AffinePlane,
    pub selection: LineSelection,
}

/// All `q + 1` lines through `p`.
pub fn pencil(plane: &AffinePlane, p: Point) -> LineSelection {
    LineSelection::new(plane, plane.lines_through(p).to_vec())
        .expect("lines through a point form a selection")
}

/// The pencil at `p` with its last-class line swapped for the smallest other
/// line of that class.
pub fn near_pencil(plane: &AffinePlane, p: Point) -> LineSelection {
    let mut chosen = plane.lines_through(p).to_vec();
    let last = chosen.len() - 1;
    let dropped = chosen[last];
    chosen[last] = *plane.classes()[last]
        .iter()
        .filter(|&&l| l != dropped)
        .min()
        .expect("classes have at least two lines");
    LineSelection::new(plane, chosen).expect("one line per class")
}

// Line ids of the Desarguesian plane built by `desarguesian_affine`.
fn slope_line(q: u32, m: u32, c: u32) -> LineId {
    m * q + c
}

fn vertical_line(q: u32, c: u32) -> LineId {
    q * q + c
}

/// The lines `x = t y + t^2` for all `t`, plus `y = 0`, in AG(2,q) with `q`
/// even: together with the line at infinity a dual hyperoval.
pub fn dual_hyperoval(field: &Field) -> Result<Construction, ConstructionError> {
    let q = field.order();
    if q % 2 == 1 {
        return Err(ConstructionError::OddOrder(q));
    }
    let plane = desarguesian_affine(field);
    let mut lines = vec![vertical_line(q, 0), slope_line(q, 0, 0)];
    for t in 1..q {
        // x = t y + t^2  <=>  y = t^-1 x - t
        lines.push(slope_line(q, field.inv(t)?, field.neg(t)));
    }
    let selection = LineSelection::from_lines(&plane, lines)?;
    Ok(Construction {
        family: Family::DualHyperoval,
        plane,
        selection,
    })
}

/// The tangents `y = 2a x - a^2` of the conic `y = x^2` (a dual oval) plus the
/// vertical line `x = 0`, in AG(2,q) with `q` odd.
pub fn dual_oval_plus_line(field: &Field) -> Result<Construction, ConstructionError> {
    let q = field.order();
    if q.is_multiple_of(2) {
        return Err(ConstructionError::EvenOrder(q));
    }
    let plane = desarguesian_affine(field);
    let two = field.from_int(2);
    let mut lines: Vec<LineId> = field
        .elements()
        .map(|a| slope_line(q, field.mul(two, a), field.neg(field.mul(a, a))))
        .collect();
    lines.push(vertical_line(q, 0));
    let selection = LineSelection::from_lines(&plane, lines)?;
    Ok(Construction {
        family: Family::DualOvalPlusLine,
        plane,
        selection,
    })
}

/// The Baer construction and the data it was built from.
#[derive(Debug, Clone)]
pub struct BaerConstruction {
    pub construction: Construction,
    pub subplane: BaerSubplane,
    /// Projective index of the subplane point on the removed tangent line.
    pub tangent_point: u32,
    /// Projective index of the removed tangent line.
    pub tangent_line: u32,
    /// Projective index of the chosen extended line through the tangent point.
    pub m_line: u32,
    /// Extended lines through the tangent point, in index order.
    pub m_candidates: Vec<u32>,
    pub projective: ProjectivePlane,
}

/// Inside PG(2,q), `q` square: take the smallest subplane point `P`, remove
/// the smallest tangent line through it, and select the `q` extended subplane
/// lines missing `P` together with the `m_choice`-th extended line through `P`.
pub fn baer_construction(
    field: &Field,
    m_choice: u32,
) -> Result<BaerConstruction, ConstructionError> {
    let pp = desarguesian_projective(field);
    let subplane = match baer_subplane(field, &pp) {
        Err(PlaneError::NotASquareOrder(q)) => return Err(ConstructionError::NotASquareOrder(q)),
        other => other?,
    };
    let tangent_point = subplane.points[0];
    let tangent_line = *pp
        .lines_through(tangent_point)
        .iter()
        .filter(|&&l| subplane.is_tangent(l))
        .min()
        .expect("every subplane point has tangent lines");
    let (m_candidates, others): (Vec<u32>, Vec<u32>) = subplane
        .extended_lines
        .iter()
        .partition(|&&l| pp.line(l).binary_search(&tangent_point).is_ok());
    let m_line = *m_candidates
        .get(m_choice as usize)
        .ok_or(ConstructionError::InvalidChoice {
            choice: m_choice,
            available: m_candidates.len() as u32,
        })?;

    let plane = affine_from_projective(&pp, tangent_line)?;
    let emb = plane
        .projective_embedding()
        .expect("cut from a projective plane");
    let to_affine = |l: u32| -> LineId {
        emb.line_to_projective
            .iter()
            .position(|&x| x == l)
            .expect("line survives removal") as LineId
    };
    let lines: Vec<LineId> = others
        .iter()
        .chain(std::iter::once(&m_line))
        .map(|&l| to_affine(l))
        .collect();
    let selection = LineSelection::from_lines(&plane, lines)?;
    Ok(BaerConstruction {
        construction: Construction {
            family: Family::Baer,
            plane,
            selection,
        },
        subplane,
        tangent_point,
        tangent_line,
        m_line,
        m_candidates,
        projective: pp,
    })
}

impl BaerConstruction {
    /// Affine points on an extended line through the tangent point other
    /// than `m` that are not subplane points, recomputed from the projective
    /// data alone.
    pub fn predicted_uncovered(&self) -> Vec<Point> {
        let emb = self
            .construction
            .plane
            .projective_embedding()
            .expect("cut from a projective plane");
        let mut out: Vec<Point> = self
            .m_candidates
            .iter()
            .filter(|&&l| l != self.m_line)
            .flat_map(|&l| self.projective.line(l).iter().copied())
            .filter(|&p| p != self.tangent_point && !self.subplane.contains(p))
            .map(|p| {
                emb.point_to_projective
                    .binary_search(&p)
                    .expect("affine point") as Point
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Builds `family` at order `q`. Pencils are centred at point 0 of AG(2,q);
/// `m_choice` only matters for the Baer family.
pub fn build(family: Family, q: u32, m_choice: u32) -> Result<Construction, ConstructionError> {
    let field = Field::of_order(q)?;
    match family {
        Family::Pencil | Family::NearPencil => {
            let plane = desarguesian_affine(&field);
            let selection = if family == Family::Pencil {
                pencil(&plane, 0)
            } else {
                near_pencil(&plane, 0)
            };
            Ok(Construction {
                family,
                plane,
                selection,
            })
        }
        Family::DualHyperoval => dual_hyperoval(&field),
        Family::DualOvalPlusLine => dual_oval_plus_line(&field),
        Family::Baer => Ok(baer_construction(&field, m_choice)?.construction),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kakeya::{analyze, cover, MaxKnot};

    fn size_of(c: &Construction) -> u64 {
        cover(&c.plane, &c.selection).unwrap().size() as u64
    }

    #[test]
    fn pencil_sizes() {
        for q in [5, 8] {
            let c = build(Family::Pencil, q, 0).unwrap();
            assert_eq!(size_of(&c), (q * q) as u64);
        }
        let c = build(Family::Pencil, 5, 0).unwrap();
        let a = analyze(&c.plane, &c.selection).unwrap();
        assert_eq!(a.spectrum.counts(), &[0, 24, 0, 0, 0, 0, 1]);
    }

    #[test]
    fn near_pencil_sizes() {
        for (q, size) in [(4, 13), (5, 21), (9, 73)] {
            assert_eq!(size_of(&build(Family::NearPencil, q, 0).unwrap()), size);
        }
        let c = build(Family::NearPencil, 5, 0).unwrap();
        let a = analyze(&c.plane, &c.selection).unwrap();
        assert_eq!(a.spectrum.counts(), &[4, 15, 5, 0, 0, 1, 0]);
        assert_eq!(a.max_knot, MaxKnot { j: 5, k: 1 });
    }

    #[test]
    fn dual_hyperoval_sizes() {
        for (q, size) in [(2, 3), (4, 10), (8, 36)] {
            let c = build(Family::DualHyperoval, q, 0).unwrap();
            assert_eq!(size_of(&c), size);
        }
        let c = build(Family::DualHyperoval, 4, 0).unwrap();
        let a = analyze(&c.plane, &c.selection).unwrap();
        assert_eq!(a.spectrum.get(2), 10);
        assert_eq!(a.spectrum.get(1), 0);
        assert!(matches!(
            build(Family::DualHyperoval, 3, 0),
            Err(ConstructionError::OddOrder(3))
        ));
    }

    #[test]
    fn dual_oval_plus_line_sizes() {
        for (q, size) in [(3, 7), (5, 17), (9, 49)] {
            assert_eq!(
                size_of(&build(Family::DualOvalPlusLine, q, 0).unwrap()),
                size
            );
        }
        assert!(matches!(
            build(Family::DualOvalPlusLine, 4, 0),
            Err(ConstructionError::EvenOrder(4))
        ));
    }

    #[test]
    fn baer_q9() {
        for m in 0..4 {
            let b = baer_construction(&Field::of_order(9).unwrap(), m).unwrap();
            let c = &b.construction;
            let a = analyze(&c.plane, &c.selection).unwrap();
            assert_eq!(a.size, 63);
            assert_eq!(a.spectrum.counts(), &[18, 51, 0, 9, 3, 0, 0, 0, 0, 0, 0]);
            assert_eq!(a.max_knot, MaxKnot { j: 4, k: 6 });
            assert_eq!(b.m_candidates.len(), 4);
            let ks = cover(&c.plane, &c.selection).unwrap();
            assert_eq!(ks.uncovered_points(), b.predicted_uncovered());
        }
        assert!(matches!(
            baer_construction(&Field::of_order(9).unwrap(), 4),
            Err(ConstructionError::InvalidChoice {
                choice: 4,
                available: 4
            })
        ));
        assert!(matches!(
            baer_construction(&Field::of_order(8).unwrap(), 0),
            Err(ConstructionError::NotASquareOrder(8))
        ));
    }

    #[test]
    fn family_names_round_trip() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert_eq!(
            "dual-hyperoval".parse::<Family>().unwrap(),
            Family::DualHyperoval
        );
        assert!("kmarc".parse::<Family>().is_err());
    }
}
