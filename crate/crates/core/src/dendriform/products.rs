//! The shuffle `≺≻`, the dendriform half-products `≺`, `≻` and the pre-Lie
//! combinations built from them.
//!
//! On trees `τ¹ = τ¹¹ ∨_x τ¹²`, `τ² = τ²¹ ∨_y τ²²`:
//!
//! ```text
//! τ¹ ≺ τ²  = τ¹¹ ∨_x (τ¹² ≺≻ τ²)
//! τ¹ ≻ τ²  = (τ¹ ≺≻ τ²¹) ∨_y τ²²
//! τ¹ ≺≻ τ² = τ¹ ≺ τ² + τ¹ ≻ τ²,   | ≺≻ τ = τ ≺≻ | = τ
//! ```

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_traits::One;

use super::polynomial::{CoeffMul, Coefficient, Rational, RationalPolynomial, TreePolynomial};
use crate::error::{Error, Result};
use crate::tree::{decorate, enumerate_trees_with_cap, DecoratedTree, Letter, Word, DEFAULT_ENUMERATION_CAP};

/// Multiset of trees with multiplicities.
pub type TreeCounts = BTreeMap<DecoratedTree, u64>;

/// Memo for tree-level shuffles; reuse it across calls that share subtrees.
#[derive(Default)]
pub struct ShuffleCache {
    memo: HashMap<(DecoratedTree, DecoratedTree), Arc<TreeCounts>>,
}

impl ShuffleCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// `a ≺≻ b` on single trees.
    pub fn shuffle(&mut self, a: &DecoratedTree, b: &DecoratedTree) -> Arc<TreeCounts> {
        if a.is_leaf() {
            return Arc::new(TreeCounts::from([(b.clone(), 1)]));
        }
        if b.is_leaf() {
            return Arc::new(TreeCounts::from([(a.clone(), 1)]));
        }
        let key = (a.clone(), b.clone());
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        let mut out = self.prec(a, b);
        for (t, k) in self.succ(a, b) {
            *out.entry(t).or_insert(0) += k;
        }
        let out = Arc::new(out);
        self.memo.insert(key, out.clone());
        out
    }

    /// `a ≺ b` for a non-trivial `a` (`a ≺ | = a`).
    fn prec(&mut self, a: &DecoratedTree, b: &DecoratedTree) -> TreeCounts {
        let (a1, x, a2) = a.split().expect("left operand of ≺ is non-trivial");
        self.shuffle(a2, b)
            .iter()
            .map(|(s, &k)| (DecoratedTree::node(a1.clone(), x, s.clone()), k))
            .collect()
    }

    /// `a ≻ b` for a non-trivial `b` (`| ≻ b = b`).
    fn succ(&mut self, a: &DecoratedTree, b: &DecoratedTree) -> TreeCounts {
        let (b1, y, b2) = b.split().expect("right operand of ≻ is non-trivial");
        self.shuffle(a, b1)
            .iter()
            .map(|(s, &k)| (DecoratedTree::node(s.clone(), y, b2.clone()), k))
            .collect()
    }
}

#[derive(Clone, Copy)]
enum Product {
    Shuffle,
    Prec,
    Succ,
}

fn bilinear<A, B>(
    p: &TreePolynomial<A>,
    q: &TreePolynomial<B>,
    product: Product,
    cache: &mut ShuffleCache,
) -> Result<TreePolynomial<A::Output>>
where
    A: CoeffMul<B>,
    B: Coefficient,
{
    match product {
        Product::Prec if p.has_leaf() => {
            return Err(Error::Domain(
                "left operand of ≺ has an empty-word (|) component".into(),
            ))
        }
        Product::Succ if q.has_leaf() => {
            return Err(Error::Domain(
                "right operand of ≻ has an empty-word (|) component".into(),
            ))
        }
        _ => {}
    }
    let mut out = TreePolynomial::zero();
    for (a, ca) in p.iter() {
        for (b, cb) in q.iter() {
            let counts: Arc<TreeCounts> = match product {
                Product::Shuffle => cache.shuffle(a, b),
                Product::Prec => Arc::new(cache.prec(a, b)),
                Product::Succ if a.is_leaf() => Arc::new(TreeCounts::from([(b.clone(), 1)])),
                Product::Succ => Arc::new(cache.succ(a, b)),
            };
            let c = ca.mul_coeff(cb);
            for (t, &k) in counts.iter() {
                out.add_term(t.clone(), c.times(k))?;
            }
        }
    }
    Ok(out)
}

/// `p ≺≻ q`, extended bilinearly.
pub fn shuffle<A, B>(p: &TreePolynomial<A>, q: &TreePolynomial<B>) -> Result<TreePolynomial<A::Output>>
where
    A: CoeffMul<B>,
    B: Coefficient,
{
    bilinear(p, q, Product::Shuffle, &mut ShuffleCache::new())
}

/// `p ≺ q`. `p` must not contain the trivial tree.
pub fn prec<A, B>(p: &TreePolynomial<A>, q: &TreePolynomial<B>) -> Result<TreePolynomial<A::Output>>
where
    A: CoeffMul<B>,
    B: Coefficient,
{
    bilinear(p, q, Product::Prec, &mut ShuffleCache::new())
}

/// `p ≻ q`. `q` must not contain the trivial tree.
pub fn succ<A, B>(p: &TreePolynomial<A>, q: &TreePolynomial<B>) -> Result<TreePolynomial<A::Output>>
where
    A: CoeffMul<B>,
    B: Coefficient,
{
    bilinear(p, q, Product::Succ, &mut ShuffleCache::new())
}

/// Versions of the products that share one [`ShuffleCache`].
pub struct Products {
    cache: ShuffleCache,
}

impl Default for Products {
    fn default() -> Self {
        Self::new()
    }
}

impl Products {
    pub fn new() -> Self {
        Products {
            cache: ShuffleCache::new(),
        }
    }

    pub fn shuffle(&mut self, p: &RationalPolynomial, q: &RationalPolynomial) -> Result<RationalPolynomial> {
        bilinear(p, q, Product::Shuffle, &mut self.cache)
    }

    pub fn prec(&mut self, p: &RationalPolynomial, q: &RationalPolynomial) -> Result<RationalPolynomial> {
        bilinear(p, q, Product::Prec, &mut self.cache)
    }

    pub fn succ(&mut self, p: &RationalPolynomial, q: &RationalPolynomial) -> Result<RationalPolynomial> {
        bilinear(p, q, Product::Succ, &mut self.cache)
    }

    pub fn pre_lie(
        &mut self,
        orientation: PreLieOrientation,
        p: &RationalPolynomial,
        q: &RationalPolynomial,
    ) -> Result<RationalPolynomial> {
        match orientation {
            PreLieOrientation::PrecMinusSucc => self.prec(p, q)?.try_sub(&self.succ(p, q)?),
            PreLieOrientation::SuccMinusPrec => self.succ(p, q)?.try_sub(&self.prec(p, q)?),
            PreLieOrientation::LeftPreLie => self.succ(p, q)?.try_sub(&self.prec(q, p)?),
        }
    }

    /// `p^{≺≻ n}` with `p^{≺≻ 0} = |`.
    pub fn shuffle_power(&mut self, p: &RationalPolynomial, n: usize) -> Result<RationalPolynomial> {
        let mut acc = RationalPolynomial::one();
        for _ in 0..n {
            acc = self.shuffle(&acc, p)?;
        }
        Ok(acc)
    }
}

/// `p ▷ q = p ≺ q − p ≻ q`.
pub fn pre_lie(p: &RationalPolynomial, q: &RationalPolynomial) -> Result<RationalPolynomial> {
    Products::new().pre_lie(PreLieOrientation::PrecMinusSucc, p, q)
}

/// `p ▷ q = p ≻ q − q ≺ p`, the left pre-Lie product of a dendriform algebra.
pub fn left_pre_lie(p: &RationalPolynomial, q: &RationalPolynomial) -> Result<RationalPolynomial> {
    Products::new().pre_lie(PreLieOrientation::LeftPreLie, p, q)
}

/// Which bilinear combination of `≺`, `≻` plays the role of `▷`.
///
/// All three agree (up to sign) on `x ▷ x`; they differ from order three on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreLieOrientation {
    /// `a ≺ b − a ≻ b`.
    PrecMinusSucc,
    /// `a ≻ b − a ≺ b`.
    SuccMinusPrec,
    /// `a ≻ b − b ≺ a`. Iterated integrals map it to `∫ [A(s), b'(s)] ds`.
    LeftPreLie,
}

impl PreLieOrientation {
    pub const ALL: [PreLieOrientation; 3] = [
        PreLieOrientation::PrecMinusSucc,
        PreLieOrientation::SuccMinusPrec,
        PreLieOrientation::LeftPreLie,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PreLieOrientation::PrecMinusSucc => "prec-minus-succ",
            PreLieOrientation::SuccMinusPrec => "succ-minus-prec",
            PreLieOrientation::LeftPreLie => "left-pre-lie",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.name() == s)
    }
}

/// `char(𝔗_n)` decorated by `letter^n`: the sum of all order-`n` trees.
pub fn char_trees(n: usize, letter: Letter) -> Result<RationalPolynomial> {
    let word = Word::repeat(letter, n);
    let mut p = RationalPolynomial::zero();
    for skeleton in enumerate_trees_with_cap(n, DEFAULT_ENUMERATION_CAP)? {
        p.add_term(decorate(&word, &skeleton)?, Rational::one())?;
    }
    Ok(p)
}

/// `Σ_i char(𝔗_{n-i}) ∨_x char(𝔗_i)`, the Segner decomposition of
/// `char(𝔗_{n+1})`.
pub fn segner_decomposition(n: usize, letter: Letter) -> Result<RationalPolynomial> {
    let mut out = RationalPolynomial::zero();
    for i in 0..=n {
        let left = char_trees(n - i, letter)?;
        let right = char_trees(i, letter)?;
        for (l, _) in left.iter() {
            for (r, _) in right.iter() {
                out.add_term(DecoratedTree::node(l.clone(), letter, r.clone()), Rational::one())?;
            }
        }
    }
    Ok(out)
}
