//! Column-transfer dynamic programming over first-column height.
//!
//! The second independent oracle: polyominoes are built by prepending a
//! first column of height `k` to a shorter polyomino whose first column has
//! height `l`, following the case decompositions of the column-by-column
//! recurrences. Each case contributes a transition weight; iterating the
//! transfer step `max_columns` times sums the weighted class exactly.
//!
//! The transition tables are written as data keyed by the case labels of
//! the decompositions ((1) is the single-column base; (2) through (8) are
//! the join cases), so each weight can be audited row by row. The
//! statistics carried per family:
//!
//! * `perimeter_area`: `x` per column, `y` per unit of height, `t` per cell
//!   (area tracking optional),
//! * `interior`: `q` per interior vertex; a join overlapping `r` rows
//!   creates `r - 1` of them,
//! * `degrees`: `q` per boundary vertex of degree two. A lone column has
//!   exactly four of them regardless of height (`q^4` base), and each join
//!   case creates a fixed number more,
//! * `outer`: `q` per outer-site neighbor (`q^{2k+2}` base, increments per
//!   case).

use crate::enumerator::{for_each_polyomino, PolyClass};
use crate::series::{SeriesError, TruncatedSeries, VarSet};
use num_bigint::BigInt;
use num_rational::BigRational;
use std::collections::BTreeMap;

/// The four statistic families the transfer recurrences cover.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Family {
    PerimeterArea,
    Interior,
    Degrees,
    Outer,
}

impl Family {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "perimeter_area" => Family::PerimeterArea,
            "interior" => Family::Interior,
            "degrees" => Family::Degrees,
            "outer" => Family::Outer,
            _ => return None,
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Family::PerimeterArea => "perimeter_area",
            Family::Interior => "interior",
            Family::Degrees => "degrees",
            Family::Outer => "outer",
        }
    }

}

/// Errors from transfer-DP construction.
#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum RecurrenceError {
    /// Bounds that contradict each other or the variable box.
    #[error("inconsistent bounds: {0}")]
    InconsistentBounds(String),
    /// Propagated series-arithmetic failure.
    #[error("series error in transfer step: {0}")]
    Series(#[from] SeriesError),
}

/// Bounds of one DP run: tallest column, deepest column count, and the
/// truncation box for the result series.
#[derive(Clone, Debug)]
pub struct DpBounds {
    pub max_k: u16,
    pub max_columns: u16,
    pub bounds: BTreeMap<char, u16>,
}

/// Internal class index for the transfer lattice; the bottom-monotone
/// class is served by symmetry (a vertical mirror maps it onto the
/// top-monotone one and preserves every statistic the families track).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum Cls {
    Cpbu,
    Cpu,
    Cp,
}

fn class_chain(top: Cls) -> &'static [Cls] {
    match top {
        Cls::Cpbu => &[Cls::Cpbu],
        Cls::Cpu => &[Cls::Cpbu, Cls::Cpu],
        Cls::Cp => &[Cls::Cpbu, Cls::Cpu, Cls::Cp],
    }
}

fn to_cls(class: PolyClass) -> Cls {
    match class {
        PolyClass::Cpbu => Cls::Cpbu,
        PolyClass::Cpu | PolyClass::Cpb => Cls::Cpu,
        PolyClass::Cp => Cls::Cp,
    }
}

/// One audited transition: prepend a column of height `k` onto a polyomino
/// of class `src` with first column of height `l`, according to the named
/// case of the decomposition. `j` is the overlap parameter of case (6);
/// zero elsewhere.
#[derive(Clone, Copy, Debug)]
struct Transition {
    case: &'static str,
    src: Cls,
    l: u16,
    mult: u16,
    y_exp: u16,
    j: u16,
}

/// The case table. Cases (2) through (8) follow the decomposition
/// figures: (2) strictly shorter column glued strictly inside, counted
/// with multiplicity k-1-l; (3)/(4) shorter column flush with the top or
/// the bottom; (5) equal heights; (6) taller or equal column overlapping
/// j rows at an end; (7) taller column containing the new one flush;
/// (8) taller column containing it strictly, multiplicity l-1-k. The
/// monotone classes only admit the subsets shown.
fn transitions(cls: Cls, k: u16, max_k: u16) -> Vec<Transition> {
    let mut out = Vec::new();
    for l in 1..k.saturating_sub(1) {
        out.push(Transition { case: "2", src: Cls::Cpbu, l, mult: k - 1 - l, y_exp: k - l, j: 0 });
    }
    match cls {
        Cls::Cpbu => {
            for l in 1..k {
                out.push(Transition { case: "3", src: Cls::Cpbu, l, mult: 1, y_exp: k - l, j: 0 });
                out.push(Transition { case: "4", src: Cls::Cpbu, l, mult: 1, y_exp: k - l, j: 0 });
            }
            out.push(Transition { case: "5", src: Cls::Cpbu, l: k, mult: 1, y_exp: 0, j: 0 });
        }
        Cls::Cpu => {
            for l in 1..k {
                out.push(Transition { case: "3", src: Cls::Cpbu, l, mult: 1, y_exp: k - l, j: 0 });
                out.push(Transition { case: "4", src: Cls::Cpu, l, mult: 1, y_exp: k - l, j: 0 });
            }
            out.push(Transition { case: "5", src: Cls::Cpu, l: k, mult: 1, y_exp: 0, j: 0 });
            for l in 2..=max_k {
                for j in 1.max(k.saturating_sub(l) + 1)..k {
                    out.push(Transition { case: "6", src: Cls::Cpu, l, mult: 1, y_exp: j, j });
                }
            }
            for l in k + 1..=max_k {
                out.push(Transition { case: "7", src: Cls::Cpu, l, mult: 1, y_exp: 0, j: 0 });
            }
        }
        Cls::Cp => {
            for l in 1..k {
                out.push(Transition { case: "3", src: Cls::Cpu, l, mult: 2, y_exp: k - l, j: 0 });
            }
            out.push(Transition { case: "5", src: Cls::Cp, l: k, mult: 1, y_exp: 0, j: 0 });
            for l in 2..=max_k {
                for j in 1.max(k.saturating_sub(l) + 1)..k {
                    out.push(Transition { case: "6", src: Cls::Cpu, l, mult: 2, y_exp: j, j });
                }
            }
            for l in k + 1..=max_k {
                out.push(Transition { case: "7", src: Cls::Cp, l, mult: 2, y_exp: 0, j: 0 });
            }
            for l in k + 2..=max_k {
                out.push(Transition { case: "8", src: Cls::Cp, l, mult: l - 1 - k, y_exp: 0, j: 0 });
            }
        }
    }
    out
}

/// Exponent increment of the degree mark per case: how many new boundary
/// vertices of degree two or three one join creates.
const DEGREE_MARK: [(&str, u16); 7] =
    [("2", 2), ("3", 1), ("4", 1), ("5", 0), ("6", 2), ("7", 1), ("8", 2)];

/// Statistic exponent carried by one transition.
fn mark_exponent(family: Family, t: &Transition, k: u16) -> u16 {
    match family {
        Family::PerimeterArea => 0, // area handled via t^k per new column
        // A join overlapping r rows creates r-1 interior vertices. Cases
        // (2) through (5) overlap the shorter column entirely (r = l),
        // case (6) overlaps k-j rows, cases (7)/(8) the new column (r = k).
        Family::Interior => match t.case {
            "2" | "3" | "4" | "5" => t.l - 1,
            "6" => k - t.j - 1,
            _ => k - 1,
        },
        Family::Degrees => {
            DEGREE_MARK.iter().find(|(c, _)| *c == t.case).map(|&(_, m)| m).unwrap()
        }
        Family::Outer => match t.case {
            "2" => 2 * (k - t.l),
            "3" | "4" => 2 * (k - t.l) + 1,
            "5" => 2,
            "6" => 2 * t.j,
            "7" => 1,
            _ => 2,
        },
    }
}

struct DpContext {
    vars: VarSet,
    bounds: Vec<u16>,
    track_area: bool,
    track_mark: bool,
}

fn make_context(family: Family, dp: &DpBounds) -> Result<DpContext, RecurrenceError> {
    let mut names = vec!['x', 'y'];
    let (track_area, track_mark) = match family {
        Family::PerimeterArea => {
            let track = dp.bounds.contains_key(&'t');
            if track {
                names.push('t');
            }
            (track, false)
        }
        _ => {
            if !dp.bounds.contains_key(&'q') {
                return Err(RecurrenceError::InconsistentBounds(format!(
                    "family {} marks its statistic in q; the box must bound q",
                    family.label()
                )));
            }
            names.push('q');
            (false, true)
        }
    };
    let mut bounds = Vec::new();
    for &v in &names {
        match dp.bounds.get(&v) {
            Some(&b) => bounds.push(b),
            None => {
                return Err(RecurrenceError::InconsistentBounds(format!(
                    "missing box bound for variable {v:?}"
                )))
            }
        }
    }
    for (&v, _) in &dp.bounds {
        if !names.contains(&v) {
            return Err(RecurrenceError::InconsistentBounds(format!(
                "variable {v:?} is not used by family {}",
                family.label()
            )));
        }
    }
    let y_bound = bounds[1];
    if dp.max_k == 0 || dp.max_k > y_bound {
        return Err(RecurrenceError::InconsistentBounds(format!(
            "max_k = {} must lie in 1..={y_bound} (the y box bounds column heights)",
            dp.max_k
        )));
    }
    if dp.max_columns == 0 {
        return Err(RecurrenceError::InconsistentBounds(
            "max_columns must be at least 1".to_string(),
        ));
    }
    let vars = VarSet::new(&names)?;
    Ok(DpContext { vars, bounds, track_area, track_mark })
}

fn state_weights(
    family: Family,
    ctx: &DpContext,
    cls: Cls,
    k: u16,
    max_k: u16,
) -> Result<Vec<(Cls, u16, TruncatedSeries)>, RecurrenceError> {
    let mut agg: BTreeMap<(Cls, u16), TruncatedSeries> = BTreeMap::new();
    for t in transitions(cls, k, max_k) {
        let mut exps: Vec<(char, u16)> = vec![('x', 1)];
        if t.y_exp > 0 {
            exps.push(('y', t.y_exp));
        }
        if ctx.track_area {
            exps.push(('t', k));
        }
        if ctx.track_mark {
            let m = mark_exponent(family, &t, k);
            if m > 0 {
                exps.push(('q', m));
            }
        }
        let mono = match TruncatedSeries::monomial(
            ctx.vars.clone(),
            &ctx.bounds,
            &exps,
            BigRational::from_integer(BigInt::from(t.mult)),
        ) {
            Ok(m) => m,
            // A transition pushed wholly outside the box contributes
            // nothing representable; skipping it is the truncation rule.
            Err(SeriesError::OutsideBox(_)) => continue,
            Err(e) => return Err(e.into()),
        };
        let slot = agg
            .entry((t.src, t.l))
            .or_insert(TruncatedSeries::zero(ctx.vars.clone(), &ctx.bounds)?);
        *slot = slot.add(&mono)?;
    }
    Ok(agg.into_iter().map(|((s, l), w)| (s, l, w)).filter(|(_, _, w)| !w.is_zero()).collect())
}

fn base_state(family: Family, ctx: &DpContext, k: u16) -> Result<TruncatedSeries, RecurrenceError> {
    let mut exps: Vec<(char, u16)> = vec![('x', 1), ('y', k)];
    if ctx.track_area {
        exps.push(('t', k));
    }
    if ctx.track_mark {
        let e = match family {
            Family::Interior => 0,
            Family::Degrees => 4,
            Family::Outer => 2 * k + 2,
            Family::PerimeterArea => unreachable!(),
        };
        if e > 0 {
            exps.push(('q', e));
        }
    }
    match TruncatedSeries::monomial(ctx.vars.clone(), &ctx.bounds, &exps, BigRational::from_integer(BigInt::from(1))) {
        Ok(m) => Ok(m),
        Err(SeriesError::OutsideBox(_)) => {
            Ok(TruncatedSeries::zero(ctx.vars.clone(), &ctx.bounds)?)
        }
        Err(e) => Err(e.into()),
    }
}

/// Per-first-column-height slices `V_k`: all class members whose first
/// column has height `k`, within `max_columns` columns and heights up to
/// `max_k`, weighted by the family's marks. Index 0 holds `k = 1`.
pub fn dp_slices(
    family: Family,
    class: PolyClass,
    dp: &DpBounds,
) -> Result<Vec<TruncatedSeries>, RecurrenceError> {
    let ctx = make_context(family, dp)?;
    let top = to_cls(class);
    let chain = class_chain(top);
    let kmax = dp.max_k;
    let mut base: BTreeMap<(Cls, u16), TruncatedSeries> = BTreeMap::new();
    let mut weights: BTreeMap<(Cls, u16), Vec<(Cls, u16, TruncatedSeries)>> = BTreeMap::new();
    for &cls in chain {
        for k in 1..=kmax {
            base.insert((cls, k), base_state(family, &ctx, k)?);
            weights.insert((cls, k), state_weights(family, &ctx, cls, k, kmax)?);
        }
    }
    let mut v: BTreeMap<(Cls, u16), TruncatedSeries> = base
        .keys()
        .map(|key| Ok((*key, TruncatedSeries::zero(ctx.vars.clone(), &ctx.bounds)?)))
        .collect::<Result<_, RecurrenceError>>()?;
    // Each sweep extends the certified column count by one; after m sweeps
    // the states hold every class member with at most m columns.
    for _ in 0..dp.max_columns {
        let mut next = BTreeMap::new();
        for &cls in chain {
            for k in 1..=kmax {
                let mut acc = base[&(cls, k)].clone();
                for (src, l, w) in &weights[&(cls, k)] {
                    let vs = &v[&(*src, *l)];
                    if !vs.is_zero() {
                        acc = acc.add(&w.mul(vs)?)?;
                    }
                }
                next.insert((cls, k), acc);
            }
        }
        v = next;
    }
    Ok((1..=kmax).map(|k| v.remove(&(top, k)).unwrap()).collect())
}

/// The class total: sum of [`dp_slices`] over the first-column height.
pub fn dp_series(
    family: Family,
    class: PolyClass,
    dp: &DpBounds,
) -> Result<TruncatedSeries, RecurrenceError> {
    let slices = dp_slices(family, class, dp)?;
    let mut acc = slices[0].clone();
    for s in &slices[1..] {
        acc = acc.add(s)?;
    }
    Ok(acc)
}

/// One coefficient-level disagreement between the DP and brute force.
#[derive(Clone, Debug)]
pub struct Mismatch {
    pub class: PolyClass,
    pub exponents: Vec<(char, u16)>,
    pub dp_value: BigRational,
    pub census_value: BigRational,
}

/// Outcome of a DP-versus-census comparison. The contract everywhere this
/// is used: `mismatches` is empty.
#[derive(Clone, Debug)]
pub struct MismatchReport {
    pub family: Family,
    pub checked: usize,
    pub mismatches: Vec<Mismatch>,
}

/// Compares the DP against the brute-force census on the joint
/// distribution of columns, rows and the family statistic, over every
/// class and the whole certified region `v + h <= max_semiperimeter`.
pub fn dp_vs_bruteforce(
    family: Family,
    max_semiperimeter: u32,
) -> Result<MismatchReport, RecurrenceError> {
    let kmax = (max_semiperimeter - 1) as u16;
    let mut report =
        MismatchReport { family, checked: 0, mismatches: Vec::new() };
    for class in [PolyClass::Cpbu, PolyClass::Cpu, PolyClass::Cp] {
        // Joint census: (v, h, statistic) -> count, plus the statistic
        // ceiling needed to size the q (or t) box.
        let mut joint: BTreeMap<(u64, u64, u64), u64> = BTreeMap::new();
        let mut stat_max = 0u64;
        for_each_polyomino(max_semiperimeter, class, |_, s| {
            let stat = match family {
                Family::PerimeterArea => s.a,
                Family::Interior => s.interior,
                Family::Degrees => s.d2,
                Family::Outer => s.outer,
            };
            stat_max = stat_max.max(stat);
            *joint.entry((s.v, s.h, stat)).or_default() += 1;
        })
        .map_err(|e| RecurrenceError::InconsistentBounds(e.to_string()))?;
        let mark = match family {
            Family::PerimeterArea => 't',
            _ => 'q',
        };
        let dp = DpBounds {
            max_k: kmax,
            max_columns: kmax,
            bounds: BTreeMap::from([
                ('x', kmax),
                ('y', kmax),
                (mark, stat_max as u16),
            ]),
        };
        let series = dp_series(family, class, &dp)?;
        for v in 1..=kmax as u64 {
            for h in 1..=kmax as u64 {
                if v + h > max_semiperimeter as u64 {
                    continue;
                }
                for stat in 0..=stat_max {
                    let exps =
                        vec![('x', v as u16), ('y', h as u16), (mark, stat as u16)];
                    let dp_value = series.coeff(&exps)?;
                    let census_value = BigRational::from_integer(BigInt::from(
                        joint.get(&(v, h, stat)).copied().unwrap_or(0),
                    ));
                    report.checked += 1;
                    if dp_value != census_value {
                        report.mismatches.push(Mismatch {
                            class,
                            exponents: exps,
                            dp_value,
                            census_value,
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};

    fn plain_counts(class: PolyClass, max_sp: u16) -> Vec<BigRational> {
        let dp = DpBounds {
            max_k: max_sp - 1,
            max_columns: max_sp - 1,
            bounds: BTreeMap::from([('x', max_sp - 1), ('y', max_sp - 1)]),
        };
        let s = dp_series(Family::PerimeterArea, class, &dp).unwrap();
        // Collapse x^v y^h onto semiperimeter v+h.
        let mut by_n = vec![BigRational::zero(); max_sp as usize + 1];
        for (k, c) in s.terms() {
            let n = (k[0] + k[1]) as usize;
            if n <= max_sp as usize {
                by_n[n] += c;
            }
        }
        by_n
    }

    #[test]
    fn cpbu_counts_are_fibonacci() {
        let counts = plain_counts(PolyClass::Cpbu, 10);
        let fib = |m: u64| -> u64 {
            let (mut a, mut b) = (1u64, 1u64);
            for _ in 1..m {
                let t = a + b;
                a = b;
                b = t;
            }
            a
        };
        for n in 2..=10u64 {
            assert_eq!(
                counts[n as usize],
                BigRational::from_integer(BigInt::from(fib(2 * n - 3))),
                "semiperimeter {n}"
            );
        }
    }

    #[test]
    fn cpu_counts_are_central_binomials() {
        let counts = plain_counts(PolyClass::Cpu, 9);
        let choose = |n: u64, k: u64| -> BigInt {
            let mut v = BigInt::one();
            for i in 0..k {
                v = v * BigInt::from(n - i) / BigInt::from(i + 1);
            }
            v
        };
        for n in 2..=9u64 {
            assert_eq!(
                counts[n as usize],
                BigRational::from_integer(choose(2 * n - 4, n - 2)),
                "semiperimeter {n}"
            );
        }
    }

    #[test]
    fn cp_counts_match_known_prefix() {
        let counts = plain_counts(PolyClass::Cp, 9);
        for (n, want) in [(2u64, 1u64), (3, 2), (4, 7), (5, 28), (6, 120), (7, 528), (8, 2344), (9, 10416)] {
            assert_eq!(
                counts[n as usize],
                BigRational::from_integer(BigInt::from(want)),
                "semiperimeter {n}"
            );
        }
    }

    #[test]
    fn cpb_is_served_by_symmetry() {
        let u = plain_counts(PolyClass::Cpu, 7);
        let b = plain_counts(PolyClass::Cpb, 7);
        assert_eq!(u, b);
    }

    #[test]
    fn bounds_validation() {
        let dp = DpBounds {
            max_k: 9,
            max_columns: 5,
            bounds: BTreeMap::from([('x', 5), ('y', 5)]),
        };
        assert!(matches!(
            dp_series(Family::PerimeterArea, PolyClass::Cp, &dp),
            Err(RecurrenceError::InconsistentBounds(_))
        ));
        let dp = DpBounds {
            max_k: 4,
            max_columns: 5,
            bounds: BTreeMap::from([('x', 5), ('y', 5)]),
        };
        assert!(matches!(
            dp_series(Family::Interior, PolyClass::Cp, &dp),
            Err(RecurrenceError::InconsistentBounds(_))
        ));
    }

    #[test]
    fn interior_family_small_cross_check() {
        let report = dp_vs_bruteforce(Family::Interior, 6).unwrap();
        assert!(report.checked > 0);
        assert!(report.mismatches.is_empty(), "{:?}", report.mismatches);
    }

    #[test]
    fn degree_family_base_case() {
        // Single cell: d2+d3 = 4, so the q-exponent of x y is exactly 4.
        let dp = DpBounds {
            max_k: 3,
            max_columns: 3,
            bounds: BTreeMap::from([('x', 3), ('y', 3), ('q', 10)]),
        };
        let s = dp_series(Family::Degrees, PolyClass::Cp, &dp).unwrap();
        assert!(s.coeff(&[('x', 1), ('y', 1), ('q', 4)]).unwrap().is_one());
        for e in 0..4u16 {
            assert!(s.coeff(&[('x', 1), ('y', 1), ('q', e)]).unwrap().is_zero());
        }
    }
}
