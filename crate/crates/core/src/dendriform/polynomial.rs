//! Finite linear combinations of decorated trees.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::tree::DecoratedTree;

/// Exact rational scalar.
pub type Rational = BigRational;

pub fn rational(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses `3`, `-1/12` or a finite decimal such as `0.25` exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::parse(0, format!("invalid rational `{text}`"));
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::parse(0, "zero denominator"));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 64 {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" || int == "+" {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| bad())?
        };
        let frac_part: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let magnitude = int_part.abs() * &scale + frac_part;
        let numer = if negative { -magnitude } else { magnitude };
        return Ok(Rational::new(numer, scale));
    }
    let n: BigInt = text.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// A coefficient of a [`TreePolynomial`]: an exact scalar or a dense real
/// matrix of fixed shape.
pub trait Coefficient: Clone + fmt::Debug + PartialEq + Send + Sync {
    fn is_zero(&self) -> bool;
    /// `None` for scalars.
    fn shape(&self) -> Option<(usize, usize)>;
    fn add_ref(&self, other: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    /// Multiply by a shuffle multiplicity.
    fn times(&self, k: u64) -> Self;
    fn scale(&self, r: &Rational) -> Self;
    fn to_json(&self) -> Value;
    fn from_json(value: &Value) -> Result<Self>;
}

impl Coefficient for Rational {
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn shape(&self) -> Option<(usize, usize)> {
        None
    }

    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }

    fn neg_ref(&self) -> Self {
        -self
    }

    fn times(&self, k: u64) -> Self {
        self * Rational::from_integer(BigInt::from(k))
    }

    fn scale(&self, r: &Rational) -> Self {
        self * r
    }

    fn to_json(&self) -> Value {
        Value::String(self.to_string())
    }

    fn from_json(value: &Value) -> Result<Self> {
        match value {
            Value::String(s) => parse_rational(s),
            Value::Number(n) if n.is_i64() => Ok(Rational::from_integer(BigInt::from(n.as_i64().unwrap_or_default()))),
            _ => Err(Error::Json(
                "rational coefficient must be a string like \"-1/2\"".into(),
            )),
        }
    }
}

impl Coefficient for DMatrix<f64> {
    fn is_zero(&self) -> bool {
        self.iter().all(|&v| v == 0.0)
    }

    fn shape(&self) -> Option<(usize, usize)> {
        Some(self.shape())
    }

    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }

    fn neg_ref(&self) -> Self {
        -self
    }

    fn times(&self, k: u64) -> Self {
        self * k as f64
    }

    fn scale(&self, r: &Rational) -> Self {
        self * rational_to_f64(r)
    }

    fn to_json(&self) -> Value {
        matrix_to_json(self)
    }

    fn from_json(value: &Value) -> Result<Self> {
        matrix_from_json(value)
    }
}

/// Row-major nested arrays.
pub fn matrix_to_json(m: &DMatrix<f64>) -> Value {
    Value::Array(
        m.row_iter()
            .map(|row| Value::Array(row.iter().map(|&v| json!(v)).collect()))
            .collect(),
    )
}

pub fn matrix_from_json(value: &Value) -> Result<DMatrix<f64>> {
    let rows = value
        .as_array()
        .ok_or_else(|| Error::Json("matrix must be an array of rows".into()))?;
    if rows.is_empty() {
        return Err(Error::Json("matrix must have at least one row".into()));
    }
    let mut data = Vec::new();
    let mut ncols = None;
    for row in rows {
        let row = row
            .as_array()
            .ok_or_else(|| Error::Json("matrix row must be an array".into()))?;
        match ncols {
            None => ncols = Some(row.len()),
            Some(c) if c != row.len() => return Err(Error::Json("ragged matrix".into())),
            _ => {}
        }
        for v in row {
            let v = v
                .as_f64()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Json("matrix entries must be finite numbers".into()))?;
            data.push(v);
        }
    }
    let ncols = ncols.unwrap_or(0);
    if ncols == 0 {
        return Err(Error::Json("matrix must have at least one column".into()));
    }
    Ok(DMatrix::from_row_slice(rows.len(), ncols, &data))
}

/// Coefficient multiplication used by the bilinear products. Scalar·scalar
/// and scalar·matrix (either side) are supported; matrix·matrix is not.
pub trait CoeffMul<Rhs: Coefficient>: Coefficient {
    type Output: Coefficient;
    fn mul_coeff(&self, rhs: &Rhs) -> Self::Output;
}

impl CoeffMul<Rational> for Rational {
    type Output = Rational;
    fn mul_coeff(&self, rhs: &Rational) -> Rational {
        self * rhs
    }
}

impl CoeffMul<DMatrix<f64>> for Rational {
    type Output = DMatrix<f64>;
    fn mul_coeff(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        Coefficient::scale(rhs, self)
    }
}

impl CoeffMul<Rational> for DMatrix<f64> {
    type Output = DMatrix<f64>;
    fn mul_coeff(&self, rhs: &Rational) -> DMatrix<f64> {
        Coefficient::scale(self, rhs)
    }
}

/// A finite map `DecoratedTree → C` with no stored zeros and one shared
/// coefficient shape.
#[derive(Debug, Clone, PartialEq)]
pub struct TreePolynomial<C: Coefficient = Rational> {
    terms: BTreeMap<DecoratedTree, C>,
    shape: Option<(usize, usize)>,
}

pub type RationalPolynomial = TreePolynomial<Rational>;
pub type MatrixPolynomial = TreePolynomial<DMatrix<f64>>;

impl<C: Coefficient> Default for TreePolynomial<C> {
    fn default() -> Self {
        TreePolynomial {
            terms: BTreeMap::new(),
            shape: None,
        }
    }
}

impl<C: Coefficient> TreePolynomial<C> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(tree: DecoratedTree, coeff: C) -> Self {
        let mut p = Self::zero();
        // A single term cannot mismatch.
        let _ = p.add_term(tree, coeff);
        p
    }

    /// Adds `coeff · tree`, dropping the entry if it cancels.
    pub fn add_term(&mut self, tree: DecoratedTree, coeff: C) -> Result<()> {
        if let Some(shape) = coeff.shape() {
            match self.shape {
                None if self.terms.is_empty() => self.shape = Some(shape),
                Some(s) if s == shape => {}
                Some(s) => {
                    return Err(Error::Shape {
                        expected: s,
                        found: shape,
                    })
                }
                None => {}
            }
        }
        if coeff.is_zero() {
            return Ok(());
        }
        match self.terms.entry(tree) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add_ref(&coeff);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn shape(&self) -> Option<(usize, usize)> {
        self.shape
    }

    pub fn coeff(&self, tree: &DecoratedTree) -> Option<&C> {
        self.terms.get(tree)
    }

    /// Terms in canonical tree order.
    pub fn iter(&self) -> impl Iterator<Item = (&DecoratedTree, &C)> {
        self.terms.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &DecoratedTree> {
        self.terms.keys()
    }

    pub fn has_leaf(&self) -> bool {
        self.terms.contains_key(&DecoratedTree::Leaf)
    }

    pub fn max_order(&self) -> Option<usize> {
        self.terms.keys().map(DecoratedTree::order).max()
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for (t, c) in &other.terms {
            out.add_term(t.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.negated())
    }

    pub fn negated(&self) -> Self {
        TreePolynomial {
            terms: self.terms.iter().map(|(t, c)| (t.clone(), c.neg_ref())).collect(),
            shape: self.shape,
        }
    }

    pub fn scaled(&self, r: &Rational) -> Self {
        let mut out = Self::zero();
        out.shape = self.shape;
        for (t, c) in &self.terms {
            let _ = out.add_term(t.clone(), c.scale(r));
        }
        out
    }

    /// Drops every term of order greater than `max_order`.
    pub fn truncated(&self, max_order: usize) -> Self {
        TreePolynomial {
            terms: self
                .terms
                .iter()
                .filter(|(t, _)| t.order() <= max_order)
                .map(|(t, c)| (t.clone(), c.clone()))
                .collect(),
            shape: self.shape,
        }
    }

    /// The order-`k` homogeneous component.
    pub fn homogeneous(&self, k: usize) -> Self {
        TreePolynomial {
            terms: self
                .terms
                .iter()
                .filter(|(t, _)| t.order() == k)
                .map(|(t, c)| (t.clone(), c.clone()))
                .collect(),
            shape: self.shape,
        }
    }

    /// JSON list of `{ "coeff": ..., "tree": ... }`.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|(t, c)| json!({ "coeff": c.to_json(), "tree": t.to_json() }))
                .collect(),
        )
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let items = value
            .as_array()
            .ok_or_else(|| Error::Json("polynomial must be a JSON array".into()))?;
        let mut p = Self::zero();
        for item in items {
            let obj = item
                .as_object()
                .ok_or_else(|| Error::Json("polynomial term must be an object".into()))?;
            let coeff = C::from_json(
                obj.get("coeff")
                    .ok_or_else(|| Error::Json("term is missing `coeff`".into()))?,
            )?;
            let tree = DecoratedTree::from_json(
                obj.get("tree")
                    .ok_or_else(|| Error::Json("term is missing `tree`".into()))?,
            )?;
            p.add_term(tree, coeff)?;
        }
        Ok(p)
    }
}

impl TreePolynomial<Rational> {
    pub fn from_tree(tree: DecoratedTree) -> Self {
        Self::monomial(tree, Rational::one())
    }

    pub fn one() -> Self {
        Self::from_tree(DecoratedTree::Leaf)
    }

    pub fn rational_coeff(&self, tree: &DecoratedTree) -> Rational {
        self.coeff(tree).cloned().unwrap_or_else(Rational::zero)
    }
}

impl Add for &TreePolynomial<Rational> {
    type Output = TreePolynomial<Rational>;
    fn add(self, rhs: Self) -> Self::Output {
        self.try_add(rhs).expect("scalar polynomials have no shape")
    }
}

impl Sub for &TreePolynomial<Rational> {
    type Output = TreePolynomial<Rational>;
    fn sub(self, rhs: Self) -> Self::Output {
        self.try_sub(rhs).expect("scalar polynomials have no shape")
    }
}

impl Neg for &TreePolynomial<Rational> {
    type Output = TreePolynomial<Rational>;
    fn neg(self) -> Self::Output {
        self.negated()
    }
}

impl Mul<&Rational> for &TreePolynomial<Rational> {
    type Output = TreePolynomial<Rational>;
    fn mul(self, rhs: &Rational) -> Self::Output {
        self.scaled(rhs)
    }
}

impl fmt::Display for TreePolynomial<Rational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (t, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            let mag = c.abs();
            match (i, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if !mag.is_one() {
                write!(f, "{mag}*")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}
