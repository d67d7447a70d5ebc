//! Convex polyominoes as validated column-span sequences, with exact
//! statistics measured from the cell set.
//!
//! A polyomino is stored as one vertical span per column, left to right.
//! Construction validates that the spans describe a genuinely convex
//! polyomino (connected, column-convex and row-convex) and normalizes the
//! placement so the first column starts at height zero. All statistics are
//! then computed from first principles on the set of unit cells, so they
//! serve as the ground truth the series and formula layers are checked
//! against.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

/// Errors raised while validating polyomino input.
#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum GeometryError {
    /// No columns at all.
    #[error("empty input: a polyomino needs at least one column")]
    EmptyInput,
    /// A column whose top lies below its bottom, or cells that do not form
    /// one contiguous span per column.
    #[error("bad span: {0}")]
    BadSpan(String),
    /// Consecutive columns that do not share an edge.
    #[error("broken adjacency between columns {0} and {1}")]
    BrokenAdjacency(usize, usize),
    /// Connected and column-convex, but some row is not an interval.
    #[error("not row-convex: row {0} is not contiguous")]
    NotRowConvex(i64),
}

/// One column of a polyomino: the inclusive vertical span `[b, u]`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct ColumnSpan {
    pub b: i64,
    pub u: i64,
}

impl ColumnSpan {
    pub fn height(&self) -> u64 {
        (self.u - self.b + 1) as u64
    }
}

/// Subclass membership flags, following the up-set and bottom-set
/// conventions: `is_u` when column tops are non-increasing left to right,
/// `is_b` when column bottoms are non-decreasing left to right.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ClassFlags {
    pub is_u: bool,
    pub is_b: bool,
}

impl ClassFlags {
    pub fn is_bu(&self) -> bool {
        self.is_u && self.is_b
    }
}

/// The exact statistics of one polyomino.
///
/// `c` is the number of cells in the first column minus one, the natural
/// catalytic quantity for column-by-column recurrences. Degree counts
/// classify boundary lattice vertices by how many boundary-or-interior
/// edges meet there; interior vertices are counted separately.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct StatVector {
    /// Number of columns.
    pub v: u64,
    /// Number of rows.
    pub h: u64,
    /// Number of cells (area).
    pub a: u64,
    /// First-column height minus one.
    pub c: u64,
    /// Perimeter, always `2 * (v + h)` for convex polyominoes.
    pub perimeter: u64,
    /// Interior vertices: lattice points with all four incident cells.
    pub interior: u64,
    /// Boundary vertices of degree two.
    pub d2: u64,
    /// Boundary vertices of degree three.
    pub d3: u64,
    /// Boundary vertices of degree four.
    pub d4: u64,
    /// Outer site perimeter: distinct outside cells sharing an edge with
    /// the polyomino.
    pub outer: u64,
}

impl StatVector {
    pub fn semiperimeter(&self) -> u64 {
        self.perimeter / 2
    }

    /// Horizontal boundary edges. Derived: two per column.
    pub fn horizontal_perimeter(&self) -> u64 {
        2 * self.v
    }

    /// Vertical boundary edges. Derived: two per row.
    pub fn vertical_perimeter(&self) -> u64 {
        2 * self.h
    }

    /// Value of one named statistic; the name set matches the census and
    /// command-line interfaces.
    pub fn get(&self, name: &str) -> Option<u64> {
        Some(match name {
            "a" => self.a,
            "c" => self.c,
            "int" => self.interior,
            "d2" => self.d2,
            "d3" => self.d3,
            "d4" => self.d4,
            "o" => self.outer,
            "perimeter" => self.perimeter,
            _ => return None,
        })
    }

    /// All statistic names accepted by [`StatVector::get`].
    pub const NAMES: [&'static str; 8] = ["a", "c", "int", "d2", "d3", "d4", "o", "perimeter"];
}

/// The polyomino classes handled throughout the crate: all convex
/// polyominoes, the two one-sided monotone subclasses, and their
/// intersection.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum PolyClass {
    /// All convex polyominoes.
    Cp,
    /// Column tops non-increasing left to right.
    Cpu,
    /// Column bottoms non-decreasing left to right.
    Cpb,
    /// Both restrictions at once.
    Cpbu,
}

impl PolyClass {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "cp" => PolyClass::Cp,
            "cpu" => PolyClass::Cpu,
            "cpb" => PolyClass::Cpb,
            "cpbu" => PolyClass::Cpbu,
            _ => return None,
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            PolyClass::Cp => "cp",
            PolyClass::Cpu => "cpu",
            PolyClass::Cpb => "cpb",
            PolyClass::Cpbu => "cpbu",
        }
    }

    /// Whether a polyomino with the given flags belongs to the class.
    pub fn admits(&self, flags: &ClassFlags) -> bool {
        match self {
            PolyClass::Cp => true,
            PolyClass::Cpu => flags.is_u,
            PolyClass::Cpb => flags.is_b,
            PolyClass::Cpbu => flags.is_bu(),
        }
    }
}

/// A validated convex polyomino.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConvexPolyomino {
    columns: Vec<ColumnSpan>,
}

/// Row-convexity via span monotonicity: tops must rise then fall and
/// bottoms must fall then rise along the columns. For connected
/// column-span sequences this is equivalent to every row being an
/// interval; both checks run and the equivalence is asserted.
fn row_convex_by_unimodality(cols: &[ColumnSpan]) -> bool {
    let mut tops_descending = false;
    let mut bottoms_ascending = false;
    for w in cols.windows(2) {
        if w[1].u > w[0].u {
            if tops_descending {
                return false;
            }
        } else if w[1].u < w[0].u {
            tops_descending = true;
        }
        if w[1].b < w[0].b {
            if bottoms_ascending {
                return false;
            }
        } else if w[1].b > w[0].b {
            bottoms_ascending = true;
        }
    }
    true
}

/// Row-convexity straight from the definition: for every row, the set of
/// columns meeting it is contiguous. Returns the first offending row.
fn row_convex_directly(cols: &[ColumnSpan]) -> Result<(), i64> {
    let lo = cols.iter().map(|s| s.b).min().unwrap();
    let hi = cols.iter().map(|s| s.u).max().unwrap();
    for row in lo..=hi {
        let mut seen_gap_after_run = false;
        let mut in_run = false;
        for s in cols {
            let occupied = s.b <= row && row <= s.u;
            if occupied {
                if seen_gap_after_run {
                    return Err(row);
                }
                in_run = true;
            } else if in_run {
                seen_gap_after_run = true;
            }
        }
    }
    Ok(())
}

impl ConvexPolyomino {
    /// Validates column spans and normalizes the polyomino so the first
    /// column's bottom sits at height zero.
    pub fn from_columns(spans: &[(i64, i64)]) -> Result<Self, GeometryError> {
        if spans.is_empty() {
            return Err(GeometryError::EmptyInput);
        }
        let mut cols: Vec<ColumnSpan> = Vec::with_capacity(spans.len());
        for &(b, u) in spans {
            if b > u {
                return Err(GeometryError::BadSpan(format!("column span ({b}, {u}) has b > u")));
            }
            cols.push(ColumnSpan { b, u });
        }
        for i in 1..cols.len() {
            if cols[i - 1].b.max(cols[i].b) > cols[i - 1].u.min(cols[i].u) {
                return Err(GeometryError::BrokenAdjacency(i - 1, i));
            }
        }
        let unimodal = row_convex_by_unimodality(&cols);
        let direct = row_convex_directly(&cols);
        assert_eq!(
            unimodal,
            direct.is_ok(),
            "row-convexity formulations disagree on {cols:?}"
        );
        if let Err(row) = direct {
            return Err(GeometryError::NotRowConvex(row));
        }
        let base = cols[0].b;
        for s in &mut cols {
            s.b -= base;
            s.u -= base;
        }
        Ok(ConvexPolyomino { columns: cols })
    }

    /// Constructor for spans produced by the enumerator's search, which
    /// are valid by construction; full validation still runs in debug
    /// builds.
    pub(crate) fn from_generated(spans: &[(i64, i64)]) -> Self {
        debug_assert!(ConvexPolyomino::from_columns(spans).is_ok());
        let base = spans[0].0;
        let columns =
            spans.iter().map(|&(b, u)| ColumnSpan { b: b - base, u: u - base }).collect();
        ConvexPolyomino { columns }
    }

    pub fn columns(&self) -> &[ColumnSpan] {
        &self.columns
    }

    /// The cell set, sorted by column then row. Cell `(x, y)` is the unit
    /// square with lower-left corner at the lattice point `(x, y)`.
    pub fn cells_of(&self) -> Vec<(i64, i64)> {
        let mut cells = Vec::new();
        for (x, s) in self.columns.iter().enumerate() {
            for y in s.b..=s.u {
                cells.push((x as i64, y));
            }
        }
        cells
    }

    /// Measures every statistic from the cell set.
    pub fn compute_stats(&self) -> StatVector {
        let cells: BTreeSet<(i64, i64)> = self.cells_of().into_iter().collect();
        let a = cells.len() as u64;
        let v = self.columns.len() as u64;
        let min_y = self.columns.iter().map(|s| s.b).min().unwrap();
        let max_y = self.columns.iter().map(|s| s.u).max().unwrap();
        let h = (max_y - min_y + 1) as u64;
        let c = self.columns[0].height() - 1;

        // Perimeter: four sides per cell minus two per adjacent pair.
        let mut adjacent_pairs = 0u64;
        for &(x, y) in &cells {
            if cells.contains(&(x + 1, y)) {
                adjacent_pairs += 1;
            }
            if cells.contains(&(x, y + 1)) {
                adjacent_pairs += 1;
            }
        }
        let perimeter = 4 * a - 2 * adjacent_pairs;

        // Outer site perimeter: distinct outside neighbors.
        let mut outside: BTreeSet<(i64, i64)> = BTreeSet::new();
        for &(x, y) in &cells {
            for n in [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)] {
                if !cells.contains(&n) {
                    outside.insert(n);
                }
            }
        }
        let outer = outside.len() as u64;

        // Vertex census. The lattice point (i, j) touches the four cells
        // whose corners meet there; a vertex with all four is interior.
        // Otherwise its degree counts incident unit edges that border at
        // least one cell of the polyomino.
        let mut vertices: BTreeSet<(i64, i64)> = BTreeSet::new();
        for &(x, y) in &cells {
            for corner in [(x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1)] {
                vertices.insert(corner);
            }
        }
        let (mut interior, mut d2, mut d3, mut d4) = (0u64, 0u64, 0u64, 0u64);
        for &(i, j) in &vertices {
            let sw = cells.contains(&(i - 1, j - 1));
            let se = cells.contains(&(i, j - 1));
            let nw = cells.contains(&(i - 1, j));
            let ne = cells.contains(&(i, j));
            if sw && se && nw && ne {
                interior += 1;
                continue;
            }
            let mut degree = 0;
            if nw || ne {
                degree += 1; // edge going up
            }
            if sw || se {
                degree += 1; // edge going down
            }
            if sw || nw {
                degree += 1; // edge going left
            }
            if se || ne {
                degree += 1; // edge going right
            }
            match degree {
                2 => d2 += 1,
                3 => d3 += 1,
                4 => d4 += 1,
                other => unreachable!("boundary vertex of degree {other}"),
            }
        }

        StatVector { v, h, a, c, perimeter, interior, d2, d3, d4, outer }
    }

    /// Subclass membership from span monotonicity.
    pub fn class_flags(&self) -> ClassFlags {
        let is_u = self.columns.windows(2).all(|w| w[1].u <= w[0].u);
        let is_b = self.columns.windows(2).all(|w| w[1].b >= w[0].b);
        ClassFlags { is_u, is_b }
    }

    /// Text record: one line per column, `x b u`, columns left to right.
    pub fn to_span_text(&self) -> String {
        let mut out = String::new();
        for (x, s) in self.columns.iter().enumerate() {
            out.push_str(&format!("{x} {} {}\n", s.b, s.u));
        }
        out
    }

    /// Parses the `x b u` record. Column coordinates must be consecutive
    /// and increasing; the vertical offset is re-normalized.
    pub fn from_span_text(text: &str) -> Result<Self, GeometryError> {
        let mut rows: Vec<(i64, i64, i64)> = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(GeometryError::BadSpan(format!(
                    "expected `x b u`, got {line:?}"
                )));
            }
            let nums: Result<Vec<i64>, _> = parts.iter().map(|p| p.parse()).collect();
            let nums =
                nums.map_err(|_| GeometryError::BadSpan(format!("non-integer in {line:?}")))?;
            rows.push((nums[0], nums[1], nums[2]));
        }
        if rows.is_empty() {
            return Err(GeometryError::EmptyInput);
        }
        for w in rows.windows(2) {
            if w[1].0 != w[0].0 + 1 {
                return Err(GeometryError::BadSpan(format!(
                    "column coordinates {} and {} are not consecutive",
                    w[0].0, w[1].0
                )));
            }
        }
        let spans: Vec<(i64, i64)> = rows.iter().map(|&(_, b, u)| (b, u)).collect();
        ConvexPolyomino::from_columns(&spans)
    }

    /// JSON record: `{"cells": [[x, y], ...]}`.
    pub fn to_cells_json(&self) -> String {
        let cells = self.cells_of();
        serde_json::to_string(&CellsRecord { cells }).expect("cell list serializes")
    }

    /// Parses the JSON cell record. Cells are grouped into columns; each
    /// column must be one contiguous span and columns must be consecutive.
    pub fn from_cells_json(text: &str) -> Result<Self, GeometryError> {
        let record: CellsRecord = serde_json::from_str(text)
            .map_err(|e| GeometryError::BadSpan(format!("bad JSON cell record: {e}")))?;
        if record.cells.is_empty() {
            return Err(GeometryError::EmptyInput);
        }
        let cells: BTreeSet<(i64, i64)> = record.cells.into_iter().collect();
        let min_x = cells.iter().map(|&(x, _)| x).min().unwrap();
        let max_x = cells.iter().map(|&(x, _)| x).max().unwrap();
        let mut spans: Vec<(i64, i64)> = Vec::new();
        for x in min_x..=max_x {
            let ys: Vec<i64> = cells.iter().filter(|&&(cx, _)| cx == x).map(|&(_, y)| y).collect();
            if ys.is_empty() {
                return Err(GeometryError::BrokenAdjacency(
                    (x - min_x - 1) as usize,
                    (x - min_x) as usize,
                ));
            }
            let (b, u) = (ys[0], ys[ys.len() - 1]);
            if (u - b + 1) as usize != ys.len() {
                return Err(GeometryError::BadSpan(format!(
                    "column {x} has a vertical gap"
                )));
            }
            spans.push((b, u));
        }
        ConvexPolyomino::from_columns(&spans)
    }
}

impl fmt::Display for ConvexPolyomino {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_span_text())
    }
}

#[derive(Serialize, Deserialize)]
struct CellsRecord {
    cells: Vec<(i64, i64)>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats_of(spans: &[(i64, i64)]) -> StatVector {
        ConvexPolyomino::from_columns(spans).unwrap().compute_stats()
    }

    #[test]
    fn single_cell() {
        let s = stats_of(&[(0, 0)]);
        assert_eq!(
            s,
            StatVector {
                v: 1,
                h: 1,
                a: 1,
                c: 0,
                perimeter: 4,
                interior: 0,
                d2: 4,
                d3: 0,
                d4: 0,
                outer: 4
            }
        );
    }

    #[test]
    fn two_by_two_square() {
        let s = stats_of(&[(0, 1), (0, 1)]);
        assert_eq!(s.a, 4);
        assert_eq!(s.interior, 1);
        assert_eq!(s.d2, 4);
        assert_eq!(s.d3, 4);
        assert_eq!(s.d4, 0);
        assert_eq!(s.outer, 8);
    }

    #[test]
    fn five_column_example() {
        let s = stats_of(&[(0, 1), (-2, 2), (-1, 4), (-1, 4), (1, 3)]);
        assert_eq!(s.a, 22);
        assert_eq!(s.v, 5);
        assert_eq!(s.h, 7);
        assert_eq!(s.perimeter, 24);
        assert_eq!(s.outer, 18);
        assert_eq!(s.interior, 11);
        assert_eq!(s.d2, 10);
        assert_eq!(s.d3, 8);
        assert_eq!(s.d4, 6);
        let flags =
            ConvexPolyomino::from_columns(&[(0, 1), (-2, 2), (-1, 4), (-1, 4), (1, 3)])
                .unwrap()
                .class_flags();
        assert!(!flags.is_u);
        assert!(!flags.is_b);
        assert!(!flags.is_bu());
    }

    #[test]
    fn staircase_flags() {
        let p = ConvexPolyomino::from_columns(&[(0, 1), (0, 0)]).unwrap();
        let flags = p.class_flags();
        assert!(flags.is_u);
        assert!(flags.is_b);
        assert!(flags.is_bu());
    }

    #[test]
    fn perimeter_identity_and_degree_sum() {
        for spans in [
            vec![(0, 0)],
            vec![(0, 2), (1, 3), (2, 3)],
            vec![(0, 1), (-2, 2), (-1, 4), (-1, 4), (1, 3)],
        ] {
            let s = stats_of(&spans);
            assert_eq!(s.perimeter, 2 * (s.v + s.h));
            assert_eq!(s.d4 + 4, s.d2);
            assert_eq!(s.d2 + s.d3 + s.d4, s.perimeter);
            assert!(s.outer >= s.semiperimeter() + 2);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(ConvexPolyomino::from_columns(&[]), Err(GeometryError::EmptyInput));
        assert!(matches!(
            ConvexPolyomino::from_columns(&[(2, 1)]),
            Err(GeometryError::BadSpan(_))
        ));
        assert_eq!(
            ConvexPolyomino::from_columns(&[(0, 1), (3, 4)]),
            Err(GeometryError::BrokenAdjacency(0, 1))
        );
        // Tops dip then rise again: row 2 splits into two runs.
        assert!(matches!(
            ConvexPolyomino::from_columns(&[(0, 2), (0, 0), (0, 2)]),
            Err(GeometryError::NotRowConvex(_))
        ));
    }

    #[test]
    fn normalization_translates_first_column() {
        let p = ConvexPolyomino::from_columns(&[(5, 7), (6, 8)]).unwrap();
        assert_eq!(p.columns()[0], ColumnSpan { b: 0, u: 2 });
        assert_eq!(p.columns()[1], ColumnSpan { b: 1, u: 3 });
    }

    #[test]
    fn span_text_round_trip() {
        let p = ConvexPolyomino::from_columns(&[(0, 1), (-2, 2), (-1, 4)]).unwrap();
        let text = p.to_span_text();
        let q = ConvexPolyomino::from_span_text(&text).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn cells_json_round_trip() {
        let p = ConvexPolyomino::from_columns(&[(0, 1), (-2, 2), (-1, 4)]).unwrap();
        let json = p.to_cells_json();
        let q = ConvexPolyomino::from_cells_json(&json).unwrap();
        assert_eq!(p, q);
        assert_eq!(p.compute_stats(), q.compute_stats());
    }
}
