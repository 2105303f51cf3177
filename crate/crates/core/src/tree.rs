//! Planar binary trees, their decorated counterparts and the basic
//! combinatorics on them (grafting, enumeration, combs, tree factorial).
//!
//! Both tree types are persistent: a node owns its children through an
//! [`Arc`], so grafting is O(1) and large enumerations share subtrees.
//!
//! Trees are ordered canonically by `(order, left, letter, right)`. Every
//! enumeration in this crate yields trees in that order.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Default cap on the order accepted by [`enumerate_trees`] (C₁₄ = 2,674,440).
pub const DEFAULT_ENUMERATION_CAP: usize = 14;

/// Deepest tree accepted by the text and JSON readers.
pub const MAX_PARSE_DEPTH: usize = 512;

/// A letter `x_i` of the alphabet `X = {x_0, ..., x_m}`; `x_0` is the drift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(pub usize);

impl Letter {
    pub const DRIFT: Letter = Letter(0);

    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// The alphabet `{x_0, ..., x_m}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alphabet {
    m: usize,
}

impl Alphabet {
    pub fn new(m: usize) -> Self {
        Alphabet { m }
    }

    /// Number of controlled letters (`x_1..x_m`).
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.m + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn check(&self, letter: Letter) -> Result<Letter> {
        if letter.0 <= self.m {
            Ok(letter)
        } else {
            Err(Error::Alphabet {
                index: letter.0,
                max: self.m,
            })
        }
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + Clone {
        (0..=self.m).map(Letter)
    }
}

/// An element of the free monoid `X*`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn repeat(letter: Letter, n: usize) -> Self {
        Word(vec![letter; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    /// Number of occurrences of `letter`.
    pub fn count(&self, letter: Letter) -> usize {
        self.0.iter().filter(|&&l| l == letter).count()
    }

    /// Parses `x1x2x0` (whitespace allowed between letters). The empty
    /// string and `∅` both denote the empty word.
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        if trimmed.is_empty() || trimmed == "∅" {
            return Ok(Word::empty());
        }
        let bytes = trimmed.as_bytes();
        let mut letters = Vec::new();
        let mut pos = 0;
        while pos < bytes.len() {
            match bytes[pos] {
                b' ' | b'\t' => pos += 1,
                b'x' => {
                    let (letter, next) = lex_letter(trimmed, pos)?;
                    letters.push(letter);
                    pos = next;
                }
                _ => return Err(Error::parse(pos, "expected a letter `x<digits>`")),
            }
        }
        Ok(Word(letters))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("∅");
        }
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Reads `x<digits>` starting at byte `pos` (which must hold `x`).
pub(crate) fn lex_letter(text: &str, pos: usize) -> Result<(Letter, usize)> {
    let bytes = text.as_bytes();
    debug_assert_eq!(bytes[pos], b'x');
    let start = pos + 1;
    let mut end = start;
    while end < bytes.len() && bytes[end].is_ascii_digit() {
        end += 1;
    }
    if end == start {
        return Err(Error::parse(pos, "letter `x` must be followed by an index"));
    }
    let index: usize = text[start..end]
        .parse()
        .map_err(|_| Error::parse(start, "letter index out of range"))?;
    Ok((Letter(index), end))
}

// ---------------------------------------------------------------------------
// Undecorated trees
// ---------------------------------------------------------------------------

#[derive(Debug, PartialEq, Eq, Hash)]
pub struct PlanarNode {
    left: PlanarTree,
    right: PlanarTree,
    order: usize,
}

/// A planar binary tree: the trivial tree `|` or a grafting `l ∨ r`.
#[derive(Debug, Clone, Default)]
pub enum PlanarTree {
    #[default]
    Leaf,
    Node(Arc<PlanarNode>),
}

impl PlanarTree {
    pub fn leaf() -> Self {
        PlanarTree::Leaf
    }

    /// `left ∨ right`.
    pub fn graft(left: PlanarTree, right: PlanarTree) -> Self {
        let order = left.order() + right.order() + 1;
        PlanarTree::Node(Arc::new(PlanarNode { left, right, order }))
    }

    pub fn order(&self) -> usize {
        match self {
            PlanarTree::Leaf => 0,
            PlanarTree::Node(n) => n.order,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, PlanarTree::Leaf)
    }

    /// The unique `(left, right)` decomposition of a non-trivial tree.
    pub fn split(&self) -> Option<(&PlanarTree, &PlanarTree)> {
        match self {
            PlanarTree::Leaf => None,
            PlanarTree::Node(n) => Some((&n.left, &n.right)),
        }
    }

    /// `τ_l^n = | ∨ τ_l^{n-1}`.
    pub fn left_comb(n: usize) -> Self {
        (0..n).fold(PlanarTree::Leaf, |acc, _| PlanarTree::graft(PlanarTree::Leaf, acc))
    }

    /// `τ_r^n = τ_r^{n-1} ∨ |`.
    pub fn right_comb(n: usize) -> Self {
        (0..n).fold(PlanarTree::Leaf, |acc, _| PlanarTree::graft(acc, PlanarTree::Leaf))
    }

    pub fn is_left_comb(&self) -> bool {
        let mut cur = self;
        while let Some((l, r)) = cur.split() {
            if !l.is_leaf() {
                return false;
            }
            cur = r;
        }
        true
    }

    /// Dyck-word encoding: `|` is empty and `l ∨ r` is `(` l `)` r.
    pub fn to_paren_string(&self) -> String {
        let mut out = String::with_capacity(2 * self.order());
        self.write_paren(&mut out);
        out
    }

    fn write_paren(&self, out: &mut String) {
        if let Some((l, r)) = self.split() {
            out.push('(');
            l.write_paren(out);
            out.push(')');
            r.write_paren(out);
        }
    }

    /// Inverse of [`to_paren_string`](Self::to_paren_string). `|` is
    /// accepted for the trivial tree.
    pub fn parse_paren_string(text: &str) -> Result<Self> {
        let text = text.trim();
        if text == "|" {
            return Ok(PlanarTree::Leaf);
        }
        let bytes = text.as_bytes();
        let mut pos = 0;
        let tree = parse_dyck(bytes, &mut pos, 0)?;
        if pos != bytes.len() {
            return Err(Error::parse(pos, "unmatched `)`"));
        }
        Ok(tree)
    }
}

fn parse_dyck(bytes: &[u8], pos: &mut usize, depth: usize) -> Result<PlanarTree> {
    // A right spine is consumed iteratively so long combs do not recurse.
    let mut lefts = Vec::new();
    while *pos < bytes.len() && bytes[*pos] == b'(' {
        if depth + 1 > MAX_PARSE_DEPTH {
            return Err(Error::parse(*pos, "tree nested too deeply"));
        }
        *pos += 1;
        let left = parse_dyck(bytes, pos, depth + 1)?;
        if *pos >= bytes.len() || bytes[*pos] != b')' {
            return Err(Error::parse(*pos, "expected `)`"));
        }
        *pos += 1;
        lefts.push(left);
    }
    if *pos < bytes.len() && bytes[*pos] != b')' {
        return Err(Error::parse(*pos, "unexpected character in tree string"));
    }
    Ok(lefts
        .into_iter()
        .rev()
        .fold(PlanarTree::Leaf, |right, left| PlanarTree::graft(left, right)))
}

impl PartialEq for PlanarTree {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (PlanarTree::Leaf, PlanarTree::Leaf) => true,
            (PlanarTree::Node(a), PlanarTree::Node(b)) => Arc::ptr_eq(a, b) || a == b,
            _ => false,
        }
    }
}

impl Eq for PlanarTree {}

impl Hash for PlanarTree {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            PlanarTree::Leaf => state.write_u8(0),
            PlanarTree::Node(n) => {
                state.write_u8(1);
                n.hash(state);
            }
        }
    }
}

impl Ord for PlanarTree {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (PlanarTree::Leaf, PlanarTree::Leaf) => Ordering::Equal,
            (PlanarTree::Leaf, _) => Ordering::Less,
            (_, PlanarTree::Leaf) => Ordering::Greater,
            (PlanarTree::Node(a), PlanarTree::Node(b)) => {
                if Arc::ptr_eq(a, b) {
                    return Ordering::Equal;
                }
                a.order
                    .cmp(&b.order)
                    .then_with(|| a.left.cmp(&b.left))
                    .then_with(|| a.right.cmp(&b.right))
            }
        }
    }
}

impl PartialOrd for PlanarTree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PlanarTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_leaf() {
            f.write_str("|")
        } else {
            f.write_str(&self.to_paren_string())
        }
    }
}

/// `γ(τ) = (|τ¹|+|τ²|+1)·γ(τ¹)·γ(τ²)` with `γ(|) = 1`.
///
/// Saturates at `u128::MAX` (only reachable for orders above 34).
pub fn tree_factorial(tree: &PlanarTree) -> u128 {
    match tree.split() {
        None => 1,
        Some((l, r)) => (tree.order() as u128)
            .saturating_mul(tree_factorial(l))
            .saturating_mul(tree_factorial(r)),
    }
}

/// `n!` as used for combs; saturating.
pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).fold(1u128, |acc, k| acc.saturating_mul(k))
}

/// The `n`-th Catalan number `binom(2n, n)/(n+1)`, exact.
pub fn catalan(n: usize) -> Result<u128> {
    // C_{k+1} = C_k · 2(2k+1)/(k+2); the division is exact at every step.
    let mut c: u128 = 1;
    for k in 0..n as u128 {
        let num = c.checked_mul(2 * (2 * k + 1)).ok_or(Error::Resource {
            what: "catalan index (u128 overflow)",
            requested: n,
            cap: k as usize,
        })?;
        c = num / (k + 2);
    }
    Ok(c)
}

/// All planar binary trees of order `n`, canonical order, capped at
/// [`DEFAULT_ENUMERATION_CAP`].
pub fn enumerate_trees(n: usize) -> Result<Vec<PlanarTree>> {
    enumerate_trees_with_cap(n, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_trees_with_cap(n: usize, cap: usize) -> Result<Vec<PlanarTree>> {
    if n > cap {
        return Err(Error::Resource {
            what: "tree order",
            requested: n,
            cap,
        });
    }
    Ok(planar_layers(n).pop().unwrap_or_default())
}

/// `layers[k]` = all trees of order `k`, for `k = 0..=n`.
pub(crate) fn planar_layers(n: usize) -> Vec<Vec<PlanarTree>> {
    let mut layers: Vec<Vec<PlanarTree>> = vec![vec![PlanarTree::Leaf]];
    for k in 1..=n {
        let mut layer = Vec::new();
        for i in 0..k {
            for l in &layers[i] {
                for r in &layers[k - 1 - i] {
                    layer.push(PlanarTree::graft(l.clone(), r.clone()));
                }
            }
        }
        layers.push(layer);
    }
    layers
}

// ---------------------------------------------------------------------------
// Decorated trees
// ---------------------------------------------------------------------------

#[derive(Debug, PartialEq, Eq, Hash)]
pub struct DecoratedNode {
    left: DecoratedTree,
    letter: Letter,
    right: DecoratedTree,
    order: usize,
}

/// A planar binary tree with one letter on each interior vertex. This is
/// the canonical representation of a dendriform word.
#[derive(Debug, Clone, Default)]
pub enum DecoratedTree {
    #[default]
    Leaf,
    Node(Arc<DecoratedNode>),
}

impl DecoratedTree {
    pub fn leaf() -> Self {
        DecoratedTree::Leaf
    }

    /// `left ∨_letter right`, without alphabet validation.
    pub fn node(left: DecoratedTree, letter: Letter, right: DecoratedTree) -> Self {
        let order = left.order() + right.order() + 1;
        DecoratedTree::Node(Arc::new(DecoratedNode {
            left,
            letter,
            right,
            order,
        }))
    }

    /// The single-vertex tree `| ∨_x |`.
    pub fn single(letter: Letter) -> Self {
        Self::node(DecoratedTree::Leaf, letter, DecoratedTree::Leaf)
    }

    pub fn order(&self) -> usize {
        match self {
            DecoratedTree::Leaf => 0,
            DecoratedTree::Node(n) => n.order,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, DecoratedTree::Leaf)
    }

    pub fn split(&self) -> Option<(&DecoratedTree, Letter, &DecoratedTree)> {
        match self {
            DecoratedTree::Leaf => None,
            DecoratedTree::Node(n) => Some((&n.left, n.letter, &n.right)),
        }
    }

    /// Root letter, if any.
    pub fn letter(&self) -> Option<Letter> {
        self.split().map(|(_, x, _)| x)
    }

    pub fn skeleton(&self) -> PlanarTree {
        match self.split() {
            None => PlanarTree::Leaf,
            Some((l, _, r)) => PlanarTree::graft(l.skeleton(), r.skeleton()),
        }
    }

    /// In-order read of the vertex letters.
    pub fn foliation(&self) -> Word {
        let mut letters = Vec::with_capacity(self.order());
        self.collect_letters(&mut letters);
        Word(letters)
    }

    fn collect_letters(&self, out: &mut Vec<Letter>) {
        if let Some((l, x, r)) = self.split() {
            l.collect_letters(out);
            out.push(x);
            r.collect_letters(out);
        }
    }

    /// Largest letter index used, if the tree is non-trivial.
    pub fn max_letter(&self) -> Option<Letter> {
        self.split().map(|(l, x, r)| {
            [l.max_letter(), Some(x), r.max_letter()]
                .into_iter()
                .flatten()
                .max()
                .unwrap_or(x)
        })
    }

    pub fn check_alphabet(&self, alphabet: &Alphabet) -> Result<()> {
        match self.max_letter() {
            Some(x) => alphabet.check(x).map(|_| ()),
            None => Ok(()),
        }
    }

    /// Left comb read so that the first letter sits at the root:
    /// `x_{i1} x_{i2} ... ↦ | ∨_{x_{i1}} (| ∨_{x_{i2}} (...))`.
    pub fn left_comb(word: &Word) -> Self {
        word.0.iter().rev().fold(DecoratedTree::Leaf, |acc, &x| {
            DecoratedTree::node(DecoratedTree::Leaf, x, acc)
        })
    }

    /// Right comb: the last letter sits at the root.
    pub fn right_comb(word: &Word) -> Self {
        word.0.iter().fold(DecoratedTree::Leaf, |acc, &x| {
            DecoratedTree::node(acc, x, DecoratedTree::Leaf)
        })
    }

    pub fn is_left_comb(&self) -> bool {
        let mut cur = self;
        while let Some((l, _, r)) = cur.split() {
            if !l.is_leaf() {
                return false;
            }
            cur = r;
        }
        true
    }

    /// Tree JSON: `{"l": ..., "x": i, "r": ...}` with `null` for the leaf.
    pub fn to_json(&self) -> Value {
        match self.split() {
            None => Value::Null,
            Some((l, x, r)) => json!({ "l": l.to_json(), "x": x.0, "r": r.to_json() }),
        }
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        tree_from_json(value, 0)
    }

    /// Parenthesis-word rendering (`x1[x2]`, `[x1]x2[x3]`, ...).
    pub fn to_parenthesis_word(&self) -> String {
        let mut out = String::new();
        self.write_paren_word(&mut out);
        out
    }

    fn write_paren_word(&self, out: &mut String) {
        if let Some((l, x, r)) = self.split() {
            if !l.is_leaf() {
                out.push('[');
                l.write_paren_word(out);
                out.push(']');
            }
            out.push_str(&x.to_string());
            if !r.is_leaf() {
                out.push('[');
                r.write_paren_word(out);
                out.push(']');
            }
        }
    }

    fn write_expr(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.split() {
            None => f.write_str("|"),
            Some((l, x, r)) => match (l.is_leaf(), r.is_leaf()) {
                (true, true) => write!(f, "{x}"),
                (true, false) => {
                    write!(f, "({x}<")?;
                    r.write_expr(f)?;
                    f.write_str(")")
                }
                (false, true) => {
                    f.write_str("(")?;
                    l.write_expr(f)?;
                    write!(f, ">{x})")
                }
                (false, false) => {
                    f.write_str("((")?;
                    l.write_expr(f)?;
                    write!(f, ">{x})<")?;
                    r.write_expr(f)?;
                    f.write_str(")")
                }
            },
        }
    }
}

fn tree_from_json(value: &Value, depth: usize) -> Result<DecoratedTree> {
    if depth > MAX_PARSE_DEPTH {
        return Err(Error::Json("tree nested too deeply".into()));
    }
    match value {
        Value::Null => Ok(DecoratedTree::Leaf),
        Value::Object(map) => {
            if map.len() != 3 {
                return Err(Error::Json("tree node must have exactly `l`, `x`, `r`".into()));
            }
            let field = |k: &str| {
                map.get(k)
                    .ok_or_else(|| Error::Json(format!("tree node is missing `{k}`")))
            };
            let letter = field("x")?
                .as_u64()
                .and_then(|i| usize::try_from(i).ok())
                .ok_or_else(|| Error::Json("`x` must be a non-negative integer".into()))?;
            let left = tree_from_json(field("l")?, depth + 1)?;
            let right = tree_from_json(field("r")?, depth + 1)?;
            Ok(DecoratedTree::node(left, Letter(letter), right))
        }
        _ => Err(Error::Json("tree must be null or an object".into())),
    }
}

impl PartialEq for DecoratedTree {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (DecoratedTree::Leaf, DecoratedTree::Leaf) => true,
            (DecoratedTree::Node(a), DecoratedTree::Node(b)) => Arc::ptr_eq(a, b) || a == b,
            _ => false,
        }
    }
}

impl Eq for DecoratedTree {}

impl Hash for DecoratedTree {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            DecoratedTree::Leaf => state.write_u8(0),
            DecoratedTree::Node(n) => {
                state.write_u8(1);
                n.hash(state);
            }
        }
    }
}

impl Ord for DecoratedTree {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (DecoratedTree::Leaf, DecoratedTree::Leaf) => Ordering::Equal,
            (DecoratedTree::Leaf, _) => Ordering::Less,
            (_, DecoratedTree::Leaf) => Ordering::Greater,
            (DecoratedTree::Node(a), DecoratedTree::Node(b)) => {
                if Arc::ptr_eq(a, b) {
                    return Ordering::Equal;
                }
                a.order
                    .cmp(&b.order)
                    .then_with(|| a.left.cmp(&b.left))
                    .then_with(|| a.letter.cmp(&b.letter))
                    .then_with(|| a.right.cmp(&b.right))
            }
        }
    }
}

impl PartialOrd for DecoratedTree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Renders as a fully parenthesised `<`/`>` expression, e.g. `(x1<(x2>x3))`.
impl fmt::Display for DecoratedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_expr(f)
    }
}

/// Grafting with alphabet validation.
pub fn graft(left: DecoratedTree, letter: Letter, right: DecoratedTree, alphabet: &Alphabet) -> Result<DecoratedTree> {
    alphabet.check(letter)?;
    Ok(DecoratedTree::node(left, letter, right))
}

/// `(η; τ) ↦ τ_η`: puts the letters of `word` on the interior vertices of
/// `skeleton` in in-order (vertex `v_j` joins leaves `j` and `j+1`).
pub fn decorate(word: &Word, skeleton: &PlanarTree) -> Result<DecoratedTree> {
    if word.len() != skeleton.order() {
        return Err(Error::Arity {
            word: word.len(),
            order: skeleton.order(),
        });
    }
    Ok(decorate_slice(word.letters(), skeleton))
}

fn decorate_slice(letters: &[Letter], skeleton: &PlanarTree) -> DecoratedTree {
    match skeleton.split() {
        None => DecoratedTree::Leaf,
        Some((l, r)) => {
            let k = l.order();
            DecoratedTree::node(
                decorate_slice(&letters[..k], l),
                letters[k],
                decorate_slice(&letters[k + 1..], r),
            )
        }
    }
}

pub fn foliation(tree: &DecoratedTree) -> Word {
    tree.foliation()
}

/// All decorated trees of order `n` over `alphabet`, canonical order.
/// There are `(m+1)^n · C_n` of them; `max_count` guards memory.
pub fn enumerate_decorated(n: usize, alphabet: &Alphabet, max_count: usize) -> Result<Vec<DecoratedTree>> {
    Ok(decorated_layers(n, alphabet, max_count)?.pop().unwrap_or_default())
}

pub(crate) fn decorated_layers(n: usize, alphabet: &Alphabet, max_count: usize) -> Result<Vec<Vec<DecoratedTree>>> {
    let total = (alphabet.len() as u128)
        .checked_pow(n as u32)
        .and_then(|p| p.checked_mul(catalan(n).ok()?));
    match total {
        Some(t) if t <= max_count as u128 => {}
        _ => {
            return Err(Error::Resource {
                what: "decorated tree count",
                requested: total.map_or(usize::MAX, |t| t.min(usize::MAX as u128) as usize),
                cap: max_count,
            })
        }
    }
    let mut layers: Vec<Vec<DecoratedTree>> = vec![vec![DecoratedTree::Leaf]];
    for k in 1..=n {
        let mut layer = Vec::new();
        for i in 0..k {
            for l in &layers[i] {
                for x in alphabet.letters() {
                    for r in &layers[k - 1 - i] {
                        layer.push(DecoratedTree::node(l.clone(), x, r.clone()));
                    }
                }
            }
        }
        layers.push(layer);
    }
    Ok(layers)
}

/// A random decorated tree of order `n`: the left subtree size is uniform
/// at every node, letters are uniform over `alphabet`.
pub fn random_decorated<R: rand::Rng + ?Sized>(rng: &mut R, n: usize, alphabet: &Alphabet) -> DecoratedTree {
    if n == 0 {
        return DecoratedTree::Leaf;
    }
    let left = rng.gen_range(0..n);
    let l = random_decorated(rng, left, alphabet);
    let x = Letter(rng.gen_range(0..alphabet.len()));
    let r = random_decorated(rng, n - 1 - left, alphabet);
    DecoratedTree::node(l, x, r)
}

/// All words of length `n` over `alphabet`, lexicographic.
pub fn enumerate_words(n: usize, alphabet: &Alphabet) -> Vec<Word> {
    let mut words = vec![Word::empty()];
    for _ in 0..n {
        words = words
            .into_iter()
            .flat_map(|w| {
                alphabet.letters().map(move |x| {
                    let mut v = w.0.clone();
                    v.push(x);
                    Word(v)
                })
            })
            .collect();
    }
    words
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> Letter {
        Letter(i)
    }

    #[test]
    fn graft_single_and_two_level() {
        let a = Alphabet::new(3);
        let t = graft(DecoratedTree::Leaf, x(1), DecoratedTree::Leaf, &a).unwrap();
        assert_eq!(t.order(), 1);
        assert_eq!(t.to_string(), "x1");
        let t2 = graft(DecoratedTree::Leaf, x(1), DecoratedTree::single(x(2)), &a).unwrap();
        assert_eq!(t2.order(), 2);
        assert_eq!(t2.to_string(), "(x1<x2)");
        assert!(t2.is_left_comb());
    }

    #[test]
    fn graft_rejects_letter_outside_alphabet() {
        let err = graft(DecoratedTree::Leaf, x(4), DecoratedTree::Leaf, &Alphabet::new(3));
        assert!(matches!(err, Err(Error::Alphabet { index: 4, max: 3 })));
    }

    #[test]
    fn enumeration_small_orders() {
        assert_eq!(enumerate_trees(0).unwrap(), vec![PlanarTree::Leaf]);
        assert_eq!(enumerate_trees(1).unwrap().len(), 1);
        assert_eq!(enumerate_trees(2).unwrap().len(), 2);
        assert_eq!(enumerate_trees(3).unwrap().len(), 5);
        assert_eq!(enumerate_trees(5).unwrap().len(), 42);
        assert!(matches!(enumerate_trees(15), Err(Error::Resource { .. })));
    }

    #[test]
    fn enumeration_is_sorted_and_distinct() {
        let trees = enumerate_trees(6).unwrap();
        assert!(trees.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn catalan_values() {
        assert_eq!(catalan(0).unwrap(), 1);
        assert_eq!(catalan(3).unwrap(), 5);
        assert_eq!(catalan(12).unwrap(), 208_012);
        assert!(catalan(10_000).is_err());
    }

    #[test]
    fn tree_factorial_values() {
        assert_eq!(tree_factorial(&PlanarTree::Leaf), 1);
        assert_eq!(tree_factorial(&PlanarTree::left_comb(4)), 24);
        let cherry = PlanarTree::graft(PlanarTree::left_comb(1), PlanarTree::left_comb(1));
        assert_eq!(tree_factorial(&cherry), 3);
        for n in 0..=8 {
            assert_eq!(tree_factorial(&PlanarTree::left_comb(n)), factorial(n));
            assert_eq!(tree_factorial(&PlanarTree::right_comb(n)), factorial(n));
        }
    }

    #[test]
    fn left_comb_shape() {
        let w = Word::repeat(x(1), 3);
        let t = DecoratedTree::left_comb(&w);
        assert_eq!(t.skeleton(), PlanarTree::left_comb(3));
        assert_eq!(t.foliation(), w);
        assert!(DecoratedTree::left_comb(&Word::empty()).is_leaf());
        let mixed = Word(vec![x(1), x(2), x(3)]);
        let t = DecoratedTree::left_comb(&mixed);
        assert_eq!(t.letter(), Some(x(1)));
        assert_eq!(t.foliation(), mixed);
        assert_eq!(DecoratedTree::right_comb(&mixed).letter(), Some(x(3)));
        assert_eq!(DecoratedTree::right_comb(&mixed).foliation(), mixed);
    }

    #[test]
    fn decorate_follows_in_order_vertices() {
        let w = Word(vec![x(1), x(2), x(3)]);
        // right comb skeleton ((|∨|)∨|)∨|: leaves 1,2 join lowest
        let sk = PlanarTree::right_comb(3);
        let t = decorate(&w, &sk).unwrap();
        assert_eq!(t.to_string(), "((x1>x2)>x3)");
        assert_eq!(t.foliation(), w);
        assert!(decorate(&Word::empty(), &PlanarTree::Leaf).unwrap().is_leaf());
        assert!(matches!(
            decorate(&w, &PlanarTree::left_comb(2)),
            Err(Error::Arity { word: 3, order: 2 })
        ));
    }

    #[test]
    fn paren_string_round_trip() {
        let cherry = PlanarTree::graft(PlanarTree::left_comb(1), PlanarTree::left_comb(1));
        assert_eq!(cherry.to_paren_string(), "(())()");
        for t in enumerate_trees(6).unwrap() {
            assert_eq!(PlanarTree::parse_paren_string(&t.to_paren_string()).unwrap(), t);
        }
        assert!(PlanarTree::parse_paren_string("(()").is_err());
        assert!(PlanarTree::parse_paren_string("())").is_err());
        assert_eq!(PlanarTree::parse_paren_string("|").unwrap(), PlanarTree::Leaf);
    }

    #[test]
    fn json_round_trip_and_errors() {
        let t = DecoratedTree::node(DecoratedTree::single(x(2)), x(0), DecoratedTree::Leaf);
        let v = t.to_json();
        assert_eq!(
            v,
            serde_json::json!({"l": {"l": null, "x": 2, "r": null}, "x": 0, "r": null})
        );
        assert_eq!(DecoratedTree::from_json(&v).unwrap(), t);
        assert!(DecoratedTree::from_json(&serde_json::json!({"l": null, "x": -1, "r": null})).is_err());
        assert!(DecoratedTree::from_json(&serde_json::json!([1])).is_err());
    }

    #[test]
    fn word_parse() {
        assert_eq!(Word::parse("x1x2 x10").unwrap(), Word(vec![x(1), x(2), x(10)]));
        assert!(Word::parse("").unwrap().is_empty());
        assert!(Word::parse("x").is_err());
        assert!(Word::parse("y1").is_err());
    }

    #[test]
    fn decorated_enumeration_counts() {
        let a = Alphabet::new(1);
        for n in 0..=5 {
            let trees = enumerate_decorated(n, &a, usize::MAX).unwrap();
            assert_eq!(trees.len() as u128, 2u128.pow(n as u32) * catalan(n).unwrap());
            assert!(trees.windows(2).all(|w| w[0] < w[1]));
        }
        assert!(enumerate_decorated(8, &Alphabet::new(2), 1000).is_err());
    }
}
