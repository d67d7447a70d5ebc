//! Truncated multivariate formal power series over exact rationals.
//!
//! A [`TruncatedSeries`] stores the coefficients of a formal power series
//! inside a per-variable truncation box. All arithmetic is exact
//! (`BigRational` coefficients) and coherent under truncation: an operation
//! on series known inside boxes `B1` and `B2` yields a series known inside
//! the intersection, and no coefficient inside the result box depends on
//! discarded ones. That makes "compute both sides and subtract" a sound
//! verification primitive.
//!
//! Variable names are single letters drawn from a fixed alphabet. The name
//! `s` is conventionally reserved as a square-root proxy: a series in `s`
//! represents a series in `sqrt(x)` via `x = s^2`, and callers embed
//! `x`-series into an `s`-context by doubling exponents (see
//! [`TruncatedSeries::remap_vars`] with a scale of 2).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::HashMap;
use std::fmt;

/// Maximum number of distinct variables in one context.
pub const MAX_VARS: usize = 7;

/// The variable alphabet. Exponent vectors are ordered by a series'
/// [`VarSet`], not by this list.
pub const ALLOWED_VARS: [char; MAX_VARS] = ['x', 'y', 'z', 't', 'q', 'p', 's'];

/// Packed exponent vector. Lanes beyond the context's variable count are
/// always zero, so vectors from the same context compare consistently.
pub type Exps = [u16; MAX_VARS];

/// Errors produced by series construction and arithmetic.
#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum SeriesError {
    /// Binary operation on series with different variable sets.
    #[error("variable sets differ: {0} vs {1}")]
    VarMismatch(String, String),
    /// Inversion or unit-extraction of a series with zero constant term.
    #[error("not a unit: constant term is zero")]
    NotAUnit,
    /// Exact division left a remainder.
    #[error("not divisible: {0}")]
    NotDivisible(String),
    /// Square root of a series whose constant term is not one.
    #[error("not a unit with constant term one")]
    NotUnitOne,
    /// Substitution that is not one of the supported cases.
    #[error("illegal composition: {0}")]
    IllegalComposition(String),
    /// Substitution whose result cannot be represented inside the box.
    #[error("box overflow: {0}")]
    BoxOverflow(String),
    /// Coefficient query outside the truncation box.
    #[error("outside box: {0}")]
    OutsideBox(String),
    /// Variable name outside the alphabet, repeated, or too many variables.
    #[error("bad variable set: {0}")]
    BadVariable(String),
}

/// An ordered set of distinct variable names.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct VarSet {
    names: Vec<char>,
}

impl VarSet {
    /// Builds a variable set from an ordered list of names.
    pub fn new(names: &[char]) -> Result<Self, SeriesError> {
        if names.is_empty() || names.len() > MAX_VARS {
            return Err(SeriesError::BadVariable(format!(
                "need between 1 and {MAX_VARS} variables, got {}",
                names.len()
            )));
        }
        for (i, &c) in names.iter().enumerate() {
            if !ALLOWED_VARS.contains(&c) {
                return Err(SeriesError::BadVariable(format!("unknown variable {c:?}")));
            }
            if names[..i].contains(&c) {
                return Err(SeriesError::BadVariable(format!("repeated variable {c:?}")));
            }
        }
        Ok(VarSet { names: names.to_vec() })
    }

    /// Convenience constructor from a string like `"xyq"`.
    pub fn parse(s: &str) -> Result<Self, SeriesError> {
        let chars: Vec<char> = s.chars().collect();
        VarSet::new(&chars)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[char] {
        &self.names
    }

    /// Position of a variable in exponent vectors, if present.
    pub fn index_of(&self, var: char) -> Option<usize> {
        self.names.iter().position(|&c| c == var)
    }
}

impl fmt::Display for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.names {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

fn rat_zero() -> BigRational {
    BigRational::zero()
}

/// Renders a rational as `numerator/denominator`, or just the numerator for
/// integers. Used by coefficient dumps and error messages.
pub fn rational_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// A formal power series truncated to a per-variable exponent box.
///
/// The box is inclusive: a context with bound `n` for variable `v` stores
/// coefficients of `v^0` through `v^n`. Coefficients are exact rationals and
/// zero coefficients are not stored.
#[derive(Clone, Debug)]
pub struct TruncatedSeries {
    vars: VarSet,
    bounds: Vec<u16>,
    coeffs: HashMap<Exps, BigRational>,
}

impl TruncatedSeries {
    /// The zero series in the given context.
    pub fn zero(vars: VarSet, bounds: &[u16]) -> Result<Self, SeriesError> {
        if bounds.len() != vars.len() {
            return Err(SeriesError::BadVariable(format!(
                "box has {} bounds for {} variables",
                bounds.len(),
                vars.len()
            )));
        }
        Ok(TruncatedSeries { vars, bounds: bounds.to_vec(), coeffs: HashMap::new() })
    }

    /// A constant series.
    pub fn constant(vars: VarSet, bounds: &[u16], value: BigRational) -> Result<Self, SeriesError> {
        let mut s = Self::zero(vars, bounds)?;
        if !value.is_zero() {
            s.coeffs.insert([0; MAX_VARS], value);
        }
        Ok(s)
    }

    /// An integer constant series.
    pub fn from_int(vars: VarSet, bounds: &[u16], value: i64) -> Result<Self, SeriesError> {
        Self::constant(vars, bounds, BigRational::from_integer(BigInt::from(value)))
    }

    /// The monomial `coeff * prod(v_i^{e_i})`. Exponents beyond the box are
    /// rejected rather than silently dropped.
    pub fn monomial(
        vars: VarSet,
        bounds: &[u16],
        exps: &[(char, u16)],
        coeff: BigRational,
    ) -> Result<Self, SeriesError> {
        let mut s = Self::zero(vars, bounds)?;
        let mut key = [0u16; MAX_VARS];
        for &(v, e) in exps {
            let i = s.vars.index_of(v).ok_or_else(|| {
                SeriesError::BadVariable(format!("variable {v:?} not in context {}", s.vars))
            })?;
            key[i] = key[i]
                .checked_add(e)
                .ok_or_else(|| SeriesError::BoxOverflow(format!("exponent overflow for {v:?}")))?;
        }
        for (i, &b) in s.bounds.iter().enumerate() {
            if key[i] > b {
                return Err(SeriesError::OutsideBox(format!(
                    "monomial exponent {} for {:?} exceeds bound {b}",
                    key[i], s.vars.names()[i]
                )));
            }
        }
        if !coeff.is_zero() {
            s.coeffs.insert(key, coeff);
        }
        Ok(s)
    }

    /// The series `v` (exponent one, coefficient one).
    pub fn variable(vars: VarSet, bounds: &[u16], var: char) -> Result<Self, SeriesError> {
        Self::monomial(vars, bounds, &[(var, 1)], BigRational::one())
    }

    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    pub fn bounds(&self) -> &[u16] {
        &self.bounds
    }

    /// Number of stored (nonzero) coefficients.
    pub fn term_count(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn in_box(&self, key: &Exps) -> bool {
        self.bounds.iter().enumerate().all(|(i, &b)| key[i] <= b)
            && key[self.vars.len()..].iter().all(|&e| e == 0)
    }

    /// Coefficient of the given exponent vector, keyed by variable name.
    /// Vectors outside the box are an error: the series does not know them.
    pub fn coeff(&self, exps: &[(char, u16)]) -> Result<BigRational, SeriesError> {
        let mut key = [0u16; MAX_VARS];
        for &(v, e) in exps {
            let i = self.vars.index_of(v).ok_or_else(|| {
                SeriesError::BadVariable(format!("variable {v:?} not in context {}", self.vars))
            })?;
            key[i] = e;
        }
        if !self.in_box(&key) {
            return Err(SeriesError::OutsideBox(format!(
                "exponent vector {:?} outside box {:?}",
                &key[..self.vars.len()],
                self.bounds
            )));
        }
        Ok(self.coeffs.get(&key).cloned().unwrap_or_else(rat_zero))
    }

    /// Constant term.
    pub fn constant_term(&self) -> BigRational {
        self.coeffs.get(&[0; MAX_VARS]).cloned().unwrap_or_else(rat_zero)
    }

    /// Iterates stored terms in unspecified order.
    pub fn terms(&self) -> impl Iterator<Item = (&Exps, &BigRational)> {
        self.coeffs.iter()
    }

    /// Inserts or adds a term, dropping it silently if outside the box.
    /// This is the truncation rule applied by all arithmetic.
    pub fn add_term(&mut self, key: Exps, value: BigRational) {
        if value.is_zero() || !self.in_box(&key) {
            return;
        }
        let slot = self.coeffs.entry(key).or_insert_with(rat_zero);
        *slot += value;
        if slot.is_zero() {
            self.coeffs.remove(&key);
        }
    }

    fn check_vars(&self, other: &Self) -> Result<(), SeriesError> {
        if self.vars != other.vars {
            return Err(SeriesError::VarMismatch(self.vars.to_string(), other.vars.to_string()));
        }
        Ok(())
    }

    fn meet_bounds(&self, other: &Self) -> Vec<u16> {
        self.bounds.iter().zip(&other.bounds).map(|(&a, &b)| a.min(b)).collect()
    }

    /// Restricts the series to a smaller box in the same variables.
    pub fn truncate_to(&self, bounds: &[u16]) -> Result<Self, SeriesError> {
        let mut out = Self::zero(self.vars.clone(), bounds)?;
        for (k, c) in &self.coeffs {
            out.add_term(*k, c.clone());
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_vars(other)?;
        let bounds = self.meet_bounds(other);
        let mut out = Self::zero(self.vars.clone(), &bounds)?;
        for (k, c) in self.coeffs.iter().chain(other.coeffs.iter()) {
            out.add_term(*k, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        if factor.is_zero() {
            return TruncatedSeries {
                vars: self.vars.clone(),
                bounds: self.bounds.clone(),
                coeffs: HashMap::new(),
            };
        }
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c *= factor;
        }
        out
    }

    pub fn scale_int(&self, factor: i64) -> Self {
        self.scale(&BigRational::from_integer(BigInt::from(factor)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_vars(other)?;
        let bounds = self.meet_bounds(other);
        let n = self.vars.len();
        let mut out = Self::zero(self.vars.clone(), &bounds)?;
        // Iterate the sparser operand on the outside; the exponent check
        // rejects out-of-box products before any big-integer work happens.
        let (small, large) =
            if self.coeffs.len() <= other.coeffs.len() { (self, other) } else { (other, self) };
        for (ka, ca) in &small.coeffs {
            'terms: for (kb, cb) in &large.coeffs {
                let mut key = [0u16; MAX_VARS];
                for i in 0..n {
                    let e = ka[i] + kb[i];
                    if e > bounds[i] {
                        continue 'terms;
                    }
                    key[i] = e;
                }
                let slot = out.coeffs.entry(key).or_insert_with(rat_zero);
                *slot += ca * cb;
            }
        }
        out.coeffs.retain(|_, c| !c.is_zero());
        Ok(out)
    }

    /// Multiplies by the monomial `prod(v_i^{e_i})`. Terms pushed beyond the
    /// box are truncated, consistent with multiplication by the equivalent
    /// series (which would not know them either).
    pub fn shift(&self, exps: &[(char, u16)]) -> Result<Self, SeriesError> {
        let mut delta = [0u16; MAX_VARS];
        for &(v, e) in exps {
            let i = self.vars.index_of(v).ok_or_else(|| {
                SeriesError::BadVariable(format!("variable {v:?} not in context {}", self.vars))
            })?;
            delta[i] += e;
        }
        let mut out = Self::zero(self.vars.clone(), &self.bounds)?;
        for (k, c) in &self.coeffs {
            let mut key = *k;
            let mut keep = true;
            for i in 0..self.vars.len() {
                key[i] += delta[i];
                if key[i] > self.bounds[i] {
                    keep = false;
                    break;
                }
            }
            if keep {
                out.coeffs.insert(key, c.clone());
            }
        }
        Ok(out)
    }

    /// Natural-power helper built on `mul`.
    pub fn pow(&self, mut e: u32) -> Result<Self, SeriesError> {
        let mut acc = Self::constant(self.vars.clone(), &self.bounds, BigRational::one())?;
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Largest total degree representable in the box; controls Newton
    /// iteration counts.
    fn box_total_degree(&self) -> u32 {
        self.bounds.iter().map(|&b| b as u32).sum()
    }

    fn newton_rounds(&self) -> u32 {
        // After i rounds the iterate is correct through total degree
        // 2^i - 1, so this many rounds covers the whole box.
        let d = self.box_total_degree();
        let mut i = 0;
        while (1u64 << i) <= d as u64 {
            i += 1;
        }
        i + 1
    }

    /// Multiplicative inverse of a unit.
    pub fn invert_unit(&self) -> Result<Self, SeriesError> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(SeriesError::NotAUnit);
        }
        // Newton: g <- g * (2 - f * g), with quadratic convergence in total
        // degree. The iterate stays inside the box throughout.
        let mut g = Self::constant(self.vars.clone(), &self.bounds, c0.recip())?;
        let two = Self::from_int(self.vars.clone(), &self.bounds, 2)?;
        for _ in 0..self.newton_rounds() {
            let fg = self.mul(&g)?;
            g = g.mul(&two.sub(&fg)?)?;
        }
        debug_assert!(self.mul(&g).unwrap().sub(&Self::from_int(self.vars.clone(), &self.bounds, 1).unwrap()).unwrap().is_zero());
        Ok(g)
    }

    /// Splits the componentwise-minimal exponent vector off a nonzero
    /// series, returning it with the shifted-down remainder. The remainder
    /// has a nonzero coefficient at exponent zero in at least one variable
    /// per lane, though its constant term may still vanish.
    fn factor_out_min(&self) -> (Exps, Self) {
        let mut m = [u16::MAX; MAX_VARS];
        for k in self.coeffs.keys() {
            for i in 0..MAX_VARS {
                m[i] = m[i].min(k[i]);
            }
        }
        for e in m.iter_mut() {
            if *e == u16::MAX {
                *e = 0;
            }
        }
        let mut shifted = TruncatedSeries {
            vars: self.vars.clone(),
            bounds: self.bounds.clone(),
            coeffs: HashMap::new(),
        };
        for (k, c) in &self.coeffs {
            let mut key = [0u16; MAX_VARS];
            for i in 0..MAX_VARS {
                key[i] = k[i] - m[i];
            }
            shifted.coeffs.insert(key, c.clone());
        }
        (m, shifted)
    }

    /// Exact division by a divisor of the form `monomial * unit`.
    ///
    /// The divisor's monomial part is its componentwise-minimal exponent
    /// vector; after shifting it out the remaining factor must be a unit.
    /// Every term of `self` must be divisible by the monomial, otherwise the
    /// division is refused. The quotient's box shrinks by the monomial
    /// exponents: coefficients above that are not determined by what `self`
    /// knows.
    pub fn exact_div(&self, divisor: &Self) -> Result<Self, SeriesError> {
        self.check_vars(divisor)?;
        if divisor.coeffs.is_empty() {
            return Err(SeriesError::NotAUnit);
        }
        let (m, unit) = divisor.factor_out_min();
        if unit.constant_term().is_zero() {
            return Err(SeriesError::NotDivisible(
                "divisor is not monomial times unit".to_string(),
            ));
        }
        let n = self.vars.len();
        let mut reduced_bounds: Vec<u16> = Vec::with_capacity(n);
        for i in 0..n {
            let b = self.bounds[i].min(divisor.bounds[i]);
            reduced_bounds.push(b.saturating_sub(m[i]));
        }
        let mut shifted = Self::zero(self.vars.clone(), &reduced_bounds)?;
        for (k, c) in &self.coeffs {
            let mut key = [0u16; MAX_VARS];
            for i in 0..n {
                if k[i] < m[i] {
                    return Err(SeriesError::NotDivisible(format!(
                        "term with exponent {} in {:?} not divisible by monomial exponent {}",
                        k[i],
                        self.vars.names()[i],
                        m[i]
                    )));
                }
                key[i] = k[i] - m[i];
            }
            // Terms shifted below the reduced box are discarded: they carry
            // information above the quotient's honest box.
            shifted.add_term(key, c.clone());
        }
        let unit = unit.truncate_to(&reduced_bounds)?;
        shifted.mul(&unit.invert_unit()?)
    }

    /// Square root with constant term one.
    pub fn sqrt_unit(&self) -> Result<Self, SeriesError> {
        if !self.constant_term().is_one() {
            return Err(SeriesError::NotUnitOne);
        }
        // Newton on the inverse square root avoids division inside the
        // loop: y <- y * (3 - f * y^2) / 2, then g = f * y.
        let mut y = Self::from_int(self.vars.clone(), &self.bounds, 1)?;
        let three = Self::from_int(self.vars.clone(), &self.bounds, 3)?;
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        for _ in 0..self.newton_rounds() {
            let fyy = self.mul(&y)?.mul(&y)?;
            y = y.mul(&three.sub(&fyy)?)?.scale(&half);
        }
        let g = self.mul(&y)?;
        debug_assert!(g.mul(&g).unwrap().sub(self).unwrap().is_zero());
        Ok(g)
    }

    /// Partial derivative. The differentiated variable's bound drops by
    /// one: the top coefficient would need a coefficient above the box.
    pub fn derive(&self, var: char) -> Result<Self, SeriesError> {
        let vi = self.vars.index_of(var).ok_or_else(|| {
            SeriesError::VarMismatch(var.to_string(), self.vars.to_string())
        })?;
        let mut bounds = self.bounds.clone();
        bounds[vi] = bounds[vi].saturating_sub(1);
        let mut out = Self::zero(self.vars.clone(), &bounds)?;
        for (k, c) in &self.coeffs {
            if k[vi] == 0 {
                continue;
            }
            let mut key = *k;
            key[vi] -= 1;
            out.add_term(key, c * BigRational::from_integer(BigInt::from(k[vi])));
        }
        Ok(out)
    }

    /// Case (i) substitution: replaces `var` by a series with zero constant
    /// term. The result lives in the replacement's context. Remaining
    /// variables of `self` must exist there with bounds at least as large.
    ///
    /// Soundness needs the truncated powers of the replacement to vanish
    /// beyond `self`'s knowledge: if `self` is truncated at `var^N`, the
    /// replacement's minimal total degree `d` must satisfy
    /// `(N + 1) * d > ` the total degree of its box, else coefficients the
    /// truncation discarded would have contributed and the call is refused
    /// with `BoxOverflow`.
    pub fn substitute(&self, var: char, replacement: &Self) -> Result<Self, SeriesError> {
        let vi = self
            .vars
            .index_of(var)
            .ok_or_else(|| SeriesError::IllegalComposition(format!("no variable {var:?}")))?;
        if !replacement.constant_term().is_zero() {
            return Err(SeriesError::IllegalComposition(
                "replacement series must have zero constant term".to_string(),
            ));
        }
        // Map remaining variables into the replacement's context.
        let mut lane: Vec<Option<usize>> = Vec::new();
        for (i, &v) in self.vars.names().iter().enumerate() {
            if i == vi {
                lane.push(None);
                continue;
            }
            let j = replacement.vars.index_of(v).ok_or_else(|| {
                SeriesError::IllegalComposition(format!(
                    "variable {v:?} of the outer series missing from replacement context {}",
                    replacement.vars
                ))
            })?;
            lane.push(Some(j));
        }
        let n_bound = self.bounds[vi] as u64;
        if !replacement.is_zero() {
            let min_total: u64 = replacement
                .coeffs
                .keys()
                .map(|k| k.iter().map(|&e| e as u64).sum::<u64>())
                .min()
                .unwrap_or(0);
            let box_total: u64 = replacement.bounds.iter().map(|&b| b as u64).sum();
            if min_total == 0 || (n_bound + 1) * min_total <= box_total {
                return Err(SeriesError::BoxOverflow(format!(
                    "truncation at {var:?}^{n_bound} cannot cover the replacement box \
                     (minimal replacement degree {min_total}, box total degree {box_total})"
                )));
            }
        }
        // Horner evaluation in the substituted variable.
        let mut by_pow: Vec<TruncatedSeries> = Vec::new();
        for d in 0..=self.bounds[vi] {
            let mut layer = Self::zero(replacement.vars.clone(), &replacement.bounds)?;
            for (k, c) in &self.coeffs {
                if k[vi] != d {
                    continue;
                }
                let mut key = [0u16; MAX_VARS];
                let mut ok = true;
                for (i, l) in lane.iter().enumerate() {
                    if let Some(j) = l {
                        key[*j] = k[i];
                        if key[*j] > replacement.bounds[*j] {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    layer.add_term(key, c.clone());
                }
            }
            by_pow.push(layer);
        }
        let mut acc = Self::zero(replacement.vars.clone(), &replacement.bounds)?;
        for layer in by_pow.into_iter().rev() {
            acc = acc.mul(replacement)?.add(&layer)?;
        }
        Ok(acc)
    }

    /// Case (ii) substitution: injective variable remap with optional
    /// exponent scaling, for renames and for embedding into a square-root
    /// proxy context (`x -> s` with scale 2 realizes `x = s^2`).
    ///
    /// Every variable of `self` must appear exactly once in `map` as
    /// `(old, new, scale)` with `scale >= 1`, images must be distinct and
    /// live in `target_vars`. Terms whose scaled exponents exceed
    /// `target_bounds` are an error, not a truncation: the caller asked for
    /// a box too small to hold what this series knows.
    pub fn remap_vars(
        &self,
        target_vars: VarSet,
        target_bounds: &[u16],
        map: &[(char, char, u16)],
    ) -> Result<Self, SeriesError> {
        let mut out = Self::zero(target_vars, target_bounds)?;
        let mut lane: Vec<(usize, usize, u16)> = Vec::new();
        for &(old, new, scale) in map {
            let i = self.vars.index_of(old).ok_or_else(|| {
                SeriesError::IllegalComposition(format!("no source variable {old:?}"))
            })?;
            let j = out.vars.index_of(new).ok_or_else(|| {
                SeriesError::IllegalComposition(format!("no target variable {new:?}"))
            })?;
            if scale == 0 {
                return Err(SeriesError::IllegalComposition(
                    "exponent scale must be positive".to_string(),
                ));
            }
            if lane.iter().any(|&(i2, j2, _)| i2 == i || j2 == j) {
                return Err(SeriesError::IllegalComposition(
                    "remap must be injective in sources and targets".to_string(),
                ));
            }
            lane.push((i, j, scale));
        }
        for (i, &v) in self.vars.names().iter().enumerate() {
            if !lane.iter().any(|&(i2, _, _)| i2 == i) {
                return Err(SeriesError::IllegalComposition(format!(
                    "variable {v:?} has no remap entry"
                )));
            }
        }
        for (k, c) in &self.coeffs {
            let mut key = [0u16; MAX_VARS];
            for &(i, j, scale) in &lane {
                let e = (k[i] as u32) * (scale as u32);
                if e > out.bounds[j] as u32 {
                    return Err(SeriesError::BoxOverflow(format!(
                        "remapped exponent {e} for {:?} exceeds target bound {}",
                        out.vars.names()[j],
                        out.bounds[j]
                    )));
                }
                key[j] = e as u16;
            }
            out.add_term(key, c.clone());
        }
        Ok(out)
    }

    /// Case (iii) substitution: evaluates `var` at a rational constant.
    ///
    /// This is only sound when the series is genuinely polynomial in `var`
    /// up to the certified degree: the caller must pass a bound proved from
    /// structure (the generating-function catalog records such bounds per
    /// entry). The bound must fit inside the box, and any stored term above
    /// it is a contradiction and is rejected. The variable disappears from
    /// the result context.
    pub fn eval_at_const(
        &self,
        var: char,
        value: &BigRational,
        certified_degree: u16,
    ) -> Result<Self, SeriesError> {
        let vi = self
            .vars
            .index_of(var)
            .ok_or_else(|| SeriesError::IllegalComposition(format!("no variable {var:?}")))?;
        if certified_degree > self.bounds[vi] {
            return Err(SeriesError::BoxOverflow(format!(
                "certified degree {certified_degree} in {var:?} exceeds box bound {}",
                self.bounds[vi]
            )));
        }
        if self.vars.len() == 1 {
            return Err(SeriesError::IllegalComposition(
                "cannot eliminate the only variable; extract coefficients instead".to_string(),
            ));
        }
        let mut names = self.vars.names().to_vec();
        names.remove(vi);
        let mut bounds = self.bounds.clone();
        bounds.remove(vi);
        let mut out = Self::zero(VarSet::new(&names)?, &bounds)?;
        let mut powers: Vec<BigRational> = Vec::with_capacity(certified_degree as usize + 1);
        let mut p = BigRational::one();
        for _ in 0..=certified_degree {
            powers.push(p.clone());
            p *= value;
        }
        for (k, c) in &self.coeffs {
            if k[vi] > certified_degree {
                return Err(SeriesError::IllegalComposition(format!(
                    "term with {var:?}^{} contradicts certified degree {certified_degree}",
                    k[vi]
                )));
            }
            let mut key = [0u16; MAX_VARS];
            let mut w = 0;
            for (i, &e) in k.iter().enumerate().take(self.vars.len()) {
                if i == vi {
                    continue;
                }
                key[w] = e;
                w += 1;
            }
            out.add_term(key, c * &powers[k[vi] as usize]);
        }
        Ok(out)
    }

    /// Univariate coefficient list `[c_0, ..., c_n]` for single-variable
    /// series, used by formula extraction and goldens.
    pub fn univariate_coeffs(&self) -> Result<Vec<BigRational>, SeriesError> {
        if self.vars.len() != 1 {
            return Err(SeriesError::IllegalComposition(format!(
                "series in {} is not univariate",
                self.vars
            )));
        }
        let mut out = vec![rat_zero(); self.bounds[0] as usize + 1];
        for (k, c) in &self.coeffs {
            out[k[0] as usize] = c.clone();
        }
        Ok(out)
    }

    /// Deterministic text dump: one line per nonzero coefficient,
    /// `exponent-vector<TAB>numerator/denominator`, sorted lexicographically
    /// by exponent vector. The exponent vector is space-separated in the
    /// context's variable order.
    pub fn dump(&self) -> String {
        let mut keys: Vec<&Exps> = self.coeffs.keys().collect();
        keys.sort();
        let n = self.vars.len();
        let mut out = String::new();
        for k in keys {
            let exps: Vec<String> = k[..n].iter().map(|e| e.to_string()).collect();
            out.push_str(&exps.join(" "));
            out.push('\t');
            out.push_str(&rational_string(&self.coeffs[k]));
            out.push('\n');
        }
        out
    }

    /// Parses the `dump` format back into a series. Inverse of [`dump`] for
    /// in-box data; used by golden tests and the command-line round trip.
    pub fn parse_dump(vars: VarSet, bounds: &[u16], text: &str) -> Result<Self, SeriesError> {
        let mut out = Self::zero(vars, bounds)?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| {
                SeriesError::IllegalComposition(format!("dump line {}: {what}", lineno + 1))
            };
            let (evec, coeff) = line.split_once('\t').ok_or_else(|| bad("missing tab"))?;
            let mut key = [0u16; MAX_VARS];
            let mut n = 0;
            for part in evec.split_whitespace() {
                if n >= out.vars.len() {
                    return Err(bad("too many exponents"));
                }
                key[n] = part.parse().map_err(|_| bad("bad exponent"))?;
                n += 1;
            }
            if n != out.vars.len() {
                return Err(bad("too few exponents"));
            }
            if !out.in_box(&key) {
                return Err(SeriesError::OutsideBox(format!("dump line {}", lineno + 1)));
            }
            let value = match coeff.split_once('/') {
                Some((num, den)) => BigRational::new(
                    num.parse().map_err(|_| bad("bad numerator"))?,
                    den.parse().map_err(|_| bad("bad denominator"))?,
                ),
                None => BigRational::from_integer(
                    coeff.parse().map_err(|_| bad("bad integer coefficient"))?,
                ),
            };
            out.add_term(key, value);
        }
        Ok(out)
    }

    /// Maximum stored exponent of `var`, if the variable is present at all.
    pub fn max_exponent(&self, var: char) -> Option<u16> {
        let vi = self.vars.index_of(var)?;
        self.coeffs.keys().map(|k| k[vi]).max()
    }
}

impl PartialEq for TruncatedSeries {
    /// Equality of context and of every in-box coefficient.
    fn eq(&self, other: &Self) -> bool {
        self.vars == other.vars && self.bounds == other.bounds && self.coeffs == other.coeffs
    }
}

impl Eq for TruncatedSeries {}

// Operator sugar for code that assembles large closed-form expressions from
// series that share one context by construction. These panic on a context
// mismatch; anything combining series of possibly different contexts should
// call the checked methods instead.
impl std::ops::Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: Self) -> TruncatedSeries {
        TruncatedSeries::add(self, rhs).expect("series context mismatch in +")
    }
}

impl std::ops::Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: Self) -> TruncatedSeries {
        TruncatedSeries::sub(self, rhs).expect("series context mismatch in -")
    }
}

impl std::ops::Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: Self) -> TruncatedSeries {
        TruncatedSeries::mul(self, rhs).expect("series context mismatch in *")
    }
}

impl std::ops::Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        TruncatedSeries::neg(self)
    }
}

impl std::ops::Mul<&TruncatedSeries> for i64 {
    type Output = TruncatedSeries;
    fn mul(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        rhs.scale_int(self)
    }
}

/// Expression trees evaluated into truncated series.
///
/// Trees keep generating-function constructions declarative where that is
/// clearer than a chain of method calls, and errors are annotated with the
/// path to the failing node.
#[derive(Clone, Debug)]
pub enum Expr {
    /// Integer constant.
    Int(i64),
    /// Rational constant `p/q`.
    Ratio(i64, i64),
    /// A variable of the context.
    Var(char),
    /// A named series supplied through the environment.
    Ref(&'static str),
    Add(Vec<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Vec<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
    /// Multiplicative inverse of a unit.
    Inv(Box<Expr>),
    /// Exact division, monomial-times-unit divisor.
    Div(Box<Expr>, Box<Expr>),
    /// Square root with constant term one.
    Sqrt(Box<Expr>),
    /// Partial derivative.
    Deriv(Box<Expr>, char),
}

/// An `eval_expr` failure: the underlying series error plus the path of the
/// node that raised it, like `mul[1].inv`.
#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
#[error("at {path}: {source}")]
pub struct EvalError {
    pub path: String,
    #[source]
    pub source: SeriesError,
}

fn eval_node(
    expr: &Expr,
    vars: &VarSet,
    bounds: &[u16],
    env: &dyn Fn(&str) -> Option<TruncatedSeries>,
    path: &str,
) -> Result<TruncatedSeries, EvalError> {
    let here = |e: SeriesError| EvalError { path: path.to_string(), source: e };
    match expr {
        Expr::Int(v) => TruncatedSeries::from_int(vars.clone(), bounds, *v).map_err(here),
        Expr::Ratio(p, q) => {
            if *q == 0 {
                return Err(here(SeriesError::NotAUnit));
            }
            TruncatedSeries::constant(
                vars.clone(),
                bounds,
                BigRational::new(BigInt::from(*p), BigInt::from(*q)),
            )
            .map_err(here)
        }
        Expr::Var(c) => TruncatedSeries::variable(vars.clone(), bounds, *c).map_err(here),
        Expr::Ref(name) => match env(name) {
            Some(s) => {
                if s.vars() != vars {
                    return Err(here(SeriesError::VarMismatch(
                        s.vars().to_string(),
                        vars.to_string(),
                    )));
                }
                s.truncate_to(bounds).map_err(here)
            }
            None => Err(here(SeriesError::IllegalComposition(format!(
                "unbound reference {name:?}"
            )))),
        },
        Expr::Add(items) => {
            let mut acc = TruncatedSeries::zero(vars.clone(), bounds).map_err(here)?;
            for (i, item) in items.iter().enumerate() {
                let part = eval_node(item, vars, bounds, env, &format!("{path}.add[{i}]"))?;
                acc = acc.add(&part).map_err(here)?;
            }
            Ok(acc)
        }
        Expr::Sub(a, b) => {
            let left = eval_node(a, vars, bounds, env, &format!("{path}.sub[0]"))?;
            let right = eval_node(b, vars, bounds, env, &format!("{path}.sub[1]"))?;
            left.sub(&right).map_err(here)
        }
        Expr::Mul(items) => {
            let mut acc = TruncatedSeries::from_int(vars.clone(), bounds, 1).map_err(here)?;
            for (i, item) in items.iter().enumerate() {
                let part = eval_node(item, vars, bounds, env, &format!("{path}.mul[{i}]"))?;
                acc = acc.mul(&part).map_err(here)?;
            }
            Ok(acc)
        }
        Expr::Neg(a) => Ok(eval_node(a, vars, bounds, env, &format!("{path}.neg"))?.neg()),
        Expr::Pow(a, e) => {
            let base = eval_node(a, vars, bounds, env, &format!("{path}.pow"))?;
            base.pow(*e).map_err(here)
        }
        Expr::Inv(a) => {
            let base = eval_node(a, vars, bounds, env, &format!("{path}.inv"))?;
            base.invert_unit().map_err(|e| EvalError { path: format!("{path}.inv"), source: e })
        }
        Expr::Div(a, b) => {
            let num = eval_node(a, vars, bounds, env, &format!("{path}.div[0]"))?;
            let den = eval_node(b, vars, bounds, env, &format!("{path}.div[1]"))?;
            num.exact_div(&den).map_err(|e| EvalError { path: format!("{path}.div"), source: e })
        }
        Expr::Sqrt(a) => {
            let base = eval_node(a, vars, bounds, env, &format!("{path}.sqrt"))?;
            base.sqrt_unit().map_err(|e| EvalError { path: format!("{path}.sqrt"), source: e })
        }
        Expr::Deriv(a, var) => {
            let base = eval_node(a, vars, bounds, env, &format!("{path}.deriv"))?;
            base.derive(*var).map_err(|e| EvalError { path: format!("{path}.deriv"), source: e })
        }
    }
}

/// Evaluates an expression tree into the given context. `env` resolves
/// [`Expr::Ref`] nodes; pass a closure returning `None` when no references
/// are used.
pub fn eval_expr(
    expr: &Expr,
    vars: &VarSet,
    bounds: &[u16],
    env: &dyn Fn(&str) -> Option<TruncatedSeries>,
) -> Result<TruncatedSeries, EvalError> {
    eval_node(expr, vars, bounds, env, "root")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uni(bound: u16) -> (VarSet, Vec<u16>) {
        (VarSet::parse("x").unwrap(), vec![bound])
    }

    #[test]
    fn geometric_series_inverse() {
        let (vars, bounds) = uni(10);
        let one = TruncatedSeries::from_int(vars.clone(), &bounds, 1).unwrap();
        let x = TruncatedSeries::variable(vars.clone(), &bounds, 'x').unwrap();
        let inv = one.sub(&x).unwrap().invert_unit().unwrap();
        for e in 0..=10u16 {
            assert!(inv.coeff(&[('x', e)]).unwrap().is_one());
        }
    }

    #[test]
    fn catalan_from_sqrt() {
        let (vars, bounds) = uni(12);
        let one = TruncatedSeries::from_int(vars.clone(), &bounds, 1).unwrap();
        let x4 = TruncatedSeries::variable(vars.clone(), &bounds, 'x').unwrap().scale_int(4);
        let rad = one.sub(&x4).unwrap().sqrt_unit().unwrap();
        // (1 - sqrt(1-4x)) / (2x) is the Catalan series.
        let num = one.sub(&rad).unwrap();
        let x2 = TruncatedSeries::variable(vars.clone(), &bounds, 'x').unwrap().scale_int(2);
        let cat = num.exact_div(&x2).unwrap();
        let want = [1i64, 1, 2, 5, 14, 42, 132, 429, 1430, 4862, 16796, 58786];
        for (e, w) in want.iter().enumerate() {
            let c = cat.coeff(&[('x', e as u16)]).unwrap();
            assert_eq!(c, BigRational::from_integer(BigInt::from(*w)));
        }
    }

    #[test]
    fn exact_div_refuses_remainder() {
        let (vars, bounds) = uni(6);
        let one = TruncatedSeries::from_int(vars.clone(), &bounds, 1).unwrap();
        let x = TruncatedSeries::variable(vars.clone(), &bounds, 'x').unwrap();
        let err = one.exact_div(&x).unwrap_err();
        assert!(matches!(err, SeriesError::NotDivisible(_)));
    }

    #[test]
    fn derive_drops_top_degree() {
        let (vars, bounds) = uni(5);
        let x = TruncatedSeries::variable(vars.clone(), &bounds, 'x').unwrap();
        let d = x.pow(3).unwrap().derive('x').unwrap();
        assert_eq!(d.bounds(), &[4]);
        assert_eq!(
            d.coeff(&[('x', 2)]).unwrap(),
            BigRational::from_integer(BigInt::from(3))
        );
    }

    #[test]
    fn eval_at_const_checks_certificate() {
        let vars = VarSet::parse("xq").unwrap();
        let bounds = vec![4, 4];
        let x = TruncatedSeries::variable(vars.clone(), &bounds, 'x').unwrap();
        let q = TruncatedSeries::variable(vars.clone(), &bounds, 'q').unwrap();
        let f = x.mul(&q.pow(3).unwrap()).unwrap();
        let ok = f.eval_at_const('q', &BigRational::one(), 3).unwrap();
        assert!(ok.coeff(&[('x', 1)]).unwrap().is_one());
        let err = f.eval_at_const('q', &BigRational::one(), 2).unwrap_err();
        assert!(matches!(err, SeriesError::IllegalComposition(_)));
    }

    #[test]
    fn substitution_needs_coverage() {
        // f(z) truncated at z^2, z := y + y^2 with y-box 6: powers of the
        // replacement beyond z^2 still matter at y^6, so this is refused.
        let zv = VarSet::parse("z").unwrap();
        let f = TruncatedSeries::variable(zv.clone(), &[2], 'z').unwrap();
        let yv = VarSet::parse("y").unwrap();
        let y = TruncatedSeries::variable(yv.clone(), &[6], 'y').unwrap();
        let repl = y.add(&y.pow(2).unwrap()).unwrap();
        assert!(matches!(f.substitute('z', &repl), Err(SeriesError::BoxOverflow(_))));
        // With a z-box covering the whole y-box the composition goes through.
        let f = TruncatedSeries::variable(zv, &[7], 'z').unwrap();
        let g = f.substitute('z', &repl).unwrap();
        assert_eq!(g, repl);
    }

    #[test]
    fn dump_round_trip() {
        let vars = VarSet::parse("xy").unwrap();
        let bounds = vec![3, 3];
        let x = TruncatedSeries::variable(vars.clone(), &bounds, 'x').unwrap();
        let y = TruncatedSeries::variable(vars.clone(), &bounds, 'y').unwrap();
        let f = x.mul(&y).unwrap().scale(&BigRational::new(BigInt::from(3), BigInt::from(2)));
        let text = f.dump();
        assert_eq!(text, "1 1\t3/2\n");
        let back = TruncatedSeries::parse_dump(vars, &bounds, &text).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn eval_expr_paths_name_the_failure() {
        let (vars, bounds) = uni(4);
        let expr = Expr::Mul(vec![
            Expr::Int(2),
            Expr::Inv(Box::new(Expr::Var('x'))),
        ]);
        let err = eval_expr(&expr, &vars, &bounds, &|_| None).unwrap_err();
        assert_eq!(err.path, "root.mul[1].inv");
        assert_eq!(err.source, SeriesError::NotAUnit);
    }
}
