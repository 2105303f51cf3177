//! Non-commutative iterated integrals `E_τ[u]` on the signal grid.
//!
//! For `τ = Node(l, x_i, r)` the value at `t_k` is the composite trapezoid
//! integral of `E_l(s) u_i(s) E_r(s)` from `0` to `t_k`, with `E_| = I` and
//! `u_0 = I`. Every nested integral uses the same grid.

use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::dendriform::polynomial::{matrix_to_json, rational_to_f64, Coefficient, Rational, TreePolynomial};
use crate::dendriform::products::{char_trees, shuffle};
use crate::error::{Error, Result};
use crate::signals::{ubar, Grid, MatrixSignal};
use crate::tree::{factorial, tree_factorial, DecoratedTree, Letter, Word, DEFAULT_ENUMERATION_CAP};

/// Expected convergence order of the quadrature.
pub const SCHEME_ORDER: u32 = 2;

/// Cap on `n` for the factorial identity check.
pub const FACTORIAL_IDENTITY_CAP: usize = 7;

/// A matrix per grid node, stored as consecutive column-major blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct MatSeries {
    rows: usize,
    cols: usize,
    nodes: usize,
    data: Vec<f64>,
}

impl MatSeries {
    pub fn zeros(rows: usize, cols: usize, nodes: usize) -> Self {
        MatSeries {
            rows,
            cols,
            nodes,
            data: vec![0.0; rows * cols * nodes],
        }
    }

    pub fn identity(dim: usize, nodes: usize) -> Self {
        let mut s = Self::zeros(dim, dim, nodes);
        for k in 0..nodes {
            let b = s.block_mut(k);
            for i in 0..dim {
                b[i * dim + i] = 1.0;
            }
        }
        s
    }

    pub fn from_matrices(mats: &[DMatrix<f64>]) -> Result<Self> {
        let (rows, cols) = mats
            .first()
            .map(|a| a.shape())
            .ok_or_else(|| Error::Internal("empty matrix series".into()))?;
        let mut data = Vec::with_capacity(rows * cols * mats.len());
        for a in mats {
            if a.shape() != (rows, cols) {
                return Err(Error::Shape {
                    expected: (rows, cols),
                    found: a.shape(),
                });
            }
            data.extend_from_slice(a.as_slice());
        }
        Ok(MatSeries {
            rows,
            cols,
            nodes: mats.len(),
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn block(&self, k: usize) -> &[f64] {
        let sz = self.rows * self.cols;
        &self.data[k * sz..(k + 1) * sz]
    }

    pub fn block_mut(&mut self, k: usize) -> &mut [f64] {
        let sz = self.rows * self.cols;
        &mut self.data[k * sz..(k + 1) * sz]
    }

    pub fn at(&self, k: usize) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.rows, self.cols, self.block(k))
    }

    pub fn last(&self) -> DMatrix<f64> {
        self.at(self.nodes - 1)
    }

    pub fn norm1_at(&self, k: usize) -> f64 {
        self.block(k)
            .chunks(self.rows)
            .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_norm1(&self) -> f64 {
        (0..self.nodes).map(|k| self.norm1_at(k)).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    fn check_same(&self, other: &MatSeries) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::Shape {
                expected: self.shape(),
                found: other.shape(),
            });
        }
        if self.nodes != other.nodes {
            return Err(Error::Signal(format!(
                "grids differ: {} vs {} nodes",
                self.nodes, other.nodes
            )));
        }
        Ok(())
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &MatSeries) -> Result<()> {
        self.check_same(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn scaled(&self, alpha: f64) -> MatSeries {
        MatSeries {
            data: self.data.iter().map(|x| alpha * x).collect(),
            ..*self
        }
    }

    /// `max_k ‖self(t_k) − other(t_k)‖₁`.
    pub fn max_diff_norm1(&self, other: &MatSeries) -> Result<f64> {
        let mut d = self.clone();
        d.axpy(-1.0, other)?;
        Ok(d.max_norm1())
    }

    /// `c · self(t_k)` at every node.
    pub fn left_mul(&self, c: &DMatrix<f64>) -> Result<MatSeries> {
        if c.ncols() != self.rows {
            return Err(Error::Shape {
                expected: (c.nrows(), self.rows),
                found: c.shape(),
            });
        }
        let mut out = MatSeries::zeros(c.nrows(), self.cols, self.nodes);
        for k in 0..self.nodes {
            gemm(
                c.as_slice(),
                c.nrows(),
                c.ncols(),
                self.block(k),
                self.cols,
                out.block_mut(k),
            );
        }
        Ok(out)
    }

    /// `self(t_k) · other(t_k)` at every node.
    pub fn mul_pointwise(&self, other: &MatSeries) -> Result<MatSeries> {
        if self.cols != other.rows || self.nodes != other.nodes {
            return Err(Error::Shape {
                expected: (self.cols, other.cols),
                found: other.shape(),
            });
        }
        let mut out = MatSeries::zeros(self.rows, other.cols, self.nodes);
        for k in 0..self.nodes {
            gemm(
                self.block(k),
                self.rows,
                self.cols,
                other.block(k),
                other.cols,
                out.block_mut(k),
            );
        }
        Ok(out)
    }

    pub fn map(&self, f: impl Fn(&DMatrix<f64>) -> DMatrix<f64>) -> Result<MatSeries> {
        let mats: Vec<DMatrix<f64>> = (0..self.nodes).map(|k| f(&self.at(k))).collect();
        MatSeries::from_matrices(&mats)
    }
}

/// Column-major `out = a (r×p) · b (p×c)`.
fn gemm(a: &[f64], r: usize, p: usize, b: &[f64], c: usize, out: &mut [f64]) {
    for j in 0..c {
        let col = &mut out[j * r..(j + 1) * r];
        col.fill(0.0);
        for q in 0..p {
            let bq = b[j * p + q];
            if bq == 0.0 {
                continue;
            }
            let acol = &a[q * r..(q + 1) * r];
            for i in 0..r {
                col[i] += acol[i] * bq;
            }
        }
    }
}

/// The signal flattened for evaluation. Shareable across threads.
#[derive(Debug, Clone)]
pub struct SampledInput {
    grid: Grid,
    dim: usize,
    channels: Vec<MatSeries>,
}

impl SampledInput {
    pub fn new(u: &MatrixSignal) -> Self {
        let channels = (1..=u.m())
            .map(|i| MatSeries::from_matrices(u.channel(i).unwrap()).expect("validated signal"))
            .collect();
        SampledInput {
            grid: u.grid(),
            dim: u.dim(),
            channels,
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn m(&self) -> usize {
        self.channels.len()
    }

    fn check_letter(&self, x: Letter) -> Result<()> {
        if x.0 > self.m() {
            return Err(Error::Alphabet {
                index: x.0,
                max: self.m(),
            });
        }
        Ok(())
    }

    /// Integrates one grafted node: `∫₀^{t_k} E_l u_x E_r`, where `None`
    /// stands for the identity (a leaf).
    pub fn graft(&self, left: Option<&MatSeries>, x: Letter, right: Option<&MatSeries>) -> Result<MatSeries> {
        self.check_letter(x)?;
        let n = self.dim;
        let nodes = self.grid.nodes();
        let half_h = 0.5 * self.grid.h();
        let channel = if x.0 == 0 { None } else { Some(&self.channels[x.0 - 1]) };
        let factors: Vec<&MatSeries> = [left, channel, right].into_iter().flatten().collect();
        for f in &factors {
            if f.shape() != (n, n) || f.nodes() != nodes {
                return Err(Error::Shape {
                    expected: (n, n),
                    found: f.shape(),
                });
            }
        }

        let sz = n * n;
        let mut out = MatSeries::zeros(n, n, nodes);
        let mut prev = vec![0.0; sz];
        let mut cur = vec![0.0; sz];
        let mut tmp = vec![0.0; sz];
        let integrand = |k: usize, dst: &mut Vec<f64>, tmp: &mut Vec<f64>| match factors.as_slice() {
            [] => {
                dst.fill(0.0);
                for i in 0..n {
                    dst[i * n + i] = 1.0;
                }
            }
            [a] => dst.copy_from_slice(a.block(k)),
            [a, b] => gemm(a.block(k), n, n, b.block(k), n, dst),
            [a, b, c] => {
                gemm(a.block(k), n, n, b.block(k), n, tmp);
                gemm(tmp, n, n, c.block(k), n, dst);
            }
            _ => unreachable!(),
        };
        integrand(0, &mut prev, &mut tmp);
        for k in 1..nodes {
            integrand(k, &mut cur, &mut tmp);
            let (done, rest) = out.data.split_at_mut(k * sz);
            let before = &done[(k - 1) * sz..];
            let here = &mut rest[..sz];
            for i in 0..sz {
                here[i] = before[i] + half_h * (prev[i] + cur[i]);
            }
            std::mem::swap(&mut prev, &mut cur);
        }
        Ok(out)
    }
}

/// Memoising evaluator over one signal. Subtrees shared between trees are
/// integrated once.
pub struct Evaluator {
    input: Arc<SampledInput>,
    identity: Arc<MatSeries>,
    memo: HashMap<DecoratedTree, Arc<MatSeries>>,
}

impl Evaluator {
    pub fn new(u: &MatrixSignal) -> Self {
        Self::from_input(Arc::new(SampledInput::new(u)))
    }

    pub fn from_input(input: Arc<SampledInput>) -> Self {
        let identity = Arc::new(MatSeries::identity(input.dim(), input.grid().nodes()));
        Evaluator {
            input,
            identity,
            memo: HashMap::new(),
        }
    }

    pub fn input(&self) -> &SampledInput {
        &self.input
    }

    pub fn cache_len(&self) -> usize {
        self.memo.len()
    }

    pub fn evaluate(&mut self, t: &DecoratedTree) -> Result<Arc<MatSeries>> {
        let Some((l, x, r)) = t.split() else {
            return Ok(self.identity.clone());
        };
        if let Some(v) = self.memo.get(t) {
            return Ok(v.clone());
        }
        let lv = if l.is_leaf() { None } else { Some(self.evaluate(l)?) };
        let rv = if r.is_leaf() { None } else { Some(self.evaluate(r)?) };
        let v = Arc::new(self.input.graft(lv.as_deref(), x, rv.as_deref())?);
        self.memo.insert(t.clone(), v.clone());
        Ok(v)
    }

    /// `Σ (c,τ)·E_τ` in canonical tree order.
    pub fn evaluate_polynomial<C: ActsOnValues>(&mut self, p: &TreePolynomial<C>) -> Result<MatSeries> {
        let n = self.input.dim();
        let rows = p.shape().map_or(n, |(r, _)| r);
        let mut acc = MatSeries::zeros(rows, n, self.input.grid().nodes());
        for (tree, c) in p.iter() {
            let e = self.evaluate(tree)?;
            c.accumulate(&e, &mut acc)?;
        }
        Ok(acc)
    }
}

/// Coefficients that can weight an `n×n` iterated-integral value.
/// Scalars scale; matrices multiply from the left.
pub trait ActsOnValues: Coefficient {
    fn accumulate(&self, value: &MatSeries, acc: &mut MatSeries) -> Result<()>;
}

impl ActsOnValues for Rational {
    fn accumulate(&self, value: &MatSeries, acc: &mut MatSeries) -> Result<()> {
        acc.axpy(rational_to_f64(self), value)
    }
}

impl ActsOnValues for DMatrix<f64> {
    fn accumulate(&self, value: &MatSeries, acc: &mut MatSeries) -> Result<()> {
        acc.axpy(1.0, &value.left_mul(self)?)
    }
}

/// Plain recursive evaluation without a cache.
pub fn evaluate_tree_uncached(t: &DecoratedTree, input: &SampledInput) -> Result<MatSeries> {
    match t.split() {
        None => Ok(MatSeries::identity(input.dim(), input.grid().nodes())),
        Some((l, x, r)) => {
            let lv = if l.is_leaf() {
                None
            } else {
                Some(evaluate_tree_uncached(l, input)?)
            };
            let rv = if r.is_leaf() {
                None
            } else {
                Some(evaluate_tree_uncached(r, input)?)
            };
            input.graft(lv.as_ref(), x, rv.as_ref())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationResult {
    pub grid: Grid,
    pub values: MatSeries,
    /// `None` when the result comes from a polynomial.
    pub tree: Option<DecoratedTree>,
    pub scheme_order: u32,
}

impl EvaluationResult {
    pub fn final_value(&self) -> DMatrix<f64> {
        self.values.last()
    }

    /// `t,e11,e12,...` with entries row-major.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let (rows, cols) = self.values.shape();
        let mut header = vec!["t".to_string()];
        for r in 1..=rows {
            for c in 1..=cols {
                header.push(format!("e{r}{c}"));
            }
        }
        w.write_record(&header)?;
        for k in 0..self.values.nodes() {
            let a = self.values.at(k);
            let mut row = vec![self.grid.t(k).to_string()];
            for r in 0..rows {
                for c in 0..cols {
                    row.push(a[(r, c)].to_string());
                }
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let values: Vec<Value> = (0..self.values.nodes())
            .map(|k| matrix_to_json(&self.values.at(k)))
            .collect();
        json!({
            "tree": self.tree.as_ref().map(DecoratedTree::to_json),
            "scheme_order": self.scheme_order,
            "t": self.grid.times().collect::<Vec<_>>(),
            "values": values,
        })
    }
}

fn check_alphabet(t: &DecoratedTree, u: &MatrixSignal) -> Result<()> {
    t.check_alphabet(&u.alphabet())
}

pub fn evaluate_tree(t: &DecoratedTree, u: &MatrixSignal) -> Result<EvaluationResult> {
    check_alphabet(t, u)?;
    let values = Evaluator::new(u).evaluate(t)?.as_ref().clone();
    Ok(EvaluationResult {
        grid: u.grid(),
        values,
        tree: Some(t.clone()),
        scheme_order: SCHEME_ORDER,
    })
}

pub fn evaluate_polynomial<C: ActsOnValues>(p: &TreePolynomial<C>, u: &MatrixSignal) -> Result<EvaluationResult> {
    for t in p.support() {
        check_alphabet(t, u)?;
    }
    let values = Evaluator::new(u).evaluate_polynomial(p)?;
    Ok(EvaluationResult {
        grid: u.grid(),
        values,
        tree: None,
        scheme_order: SCHEME_ORDER,
    })
}

/// Evaluates independent trees in parallel, one cache per worker.
pub fn evaluate_trees_parallel(trees: &[DecoratedTree], u: &MatrixSignal) -> Result<Vec<MatSeries>> {
    for t in trees {
        check_alphabet(t, u)?;
    }
    let input = Arc::new(SampledInput::new(u));
    trees
        .par_iter()
        .map_init(
            || Evaluator::from_input(input.clone()),
            |ev, t| ev.evaluate(t).map(|v| v.as_ref().clone()),
        )
        .collect()
}

/// Residual of `E_{τ1} E_{τ2} = E_{τ1 ⧢ τ2}`: the max over the grid of the
/// 1-norm of the difference.
pub fn check_product_identity(t1: &DecoratedTree, t2: &DecoratedTree, u: &MatrixSignal) -> Result<f64> {
    let total = t1.order() + t2.order();
    if total > DEFAULT_ENUMERATION_CAP {
        return Err(Error::Resource {
            what: "combined order",
            requested: total,
            cap: DEFAULT_ENUMERATION_CAP,
        });
    }
    check_alphabet(t1, u)?;
    check_alphabet(t2, u)?;
    let p = shuffle(
        &TreePolynomial::from_tree(t1.clone()),
        &TreePolynomial::from_tree(t2.clone()),
    )?;
    let mut ev = Evaluator::new(u);
    let e1 = ev.evaluate(t1)?;
    let e2 = ev.evaluate(t2)?;
    let rhs = ev.evaluate_polynomial(&p)?;
    e1.mul_pointwise(&e2)?.max_diff_norm1(&rhs)
}

/// JSON record for a product-identity run.
pub fn residual_record(t1: &DecoratedTree, t2: &DecoratedTree, h: f64, residual: f64) -> Value {
    json!({
        "tree1": t1.to_json(),
        "tree2": t2.to_json(),
        "h": h,
        "residual": residual,
    })
}

/// `Ū_i(T)^{|τ|} / γ(τ)` for a tree decorated by the single letter `x_i`.
pub fn bound_tree_factorial(t: &DecoratedTree, u: &MatrixSignal) -> Result<f64> {
    check_alphabet(t, u)?;
    let word = t.foliation();
    let Some(&first) = word.letters().first() else {
        return Ok(1.0);
    };
    if word.letters().iter().any(|&l| l != first) {
        return Err(Error::Precondition(
            "tree-factorial bound needs every vertex decorated by the same letter".into(),
        ));
    }
    let big_u = ubar(u).integral(first.0);
    Ok(big_u.powi(t.order() as i32) / tree_factorial(&t.skeleton()) as f64)
}

/// `Π_j Ū_j(T)^{n_j} / n_j!` where `n_j` counts `x_j` in the word.
pub fn bound_left_comb(w: &Word, u: &MatrixSignal) -> Result<f64> {
    let alphabet = u.alphabet();
    for &l in w.letters() {
        alphabet.check(l)?;
    }
    let ub = ubar(u);
    Ok(alphabet
        .letters()
        .map(|l| {
            let n = w.count(l);
            ub.integral(l.0).powi(n as i32) / factorial(n) as f64
        })
        .product())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domination {
    /// `max_k ‖E_τ[u](t_k)‖₁`
    pub lhs: f64,
    /// `E_τ[ū](T)`, the maximum of a nondecreasing scalar.
    pub rhs: f64,
}

impl Domination {
    pub fn holds(&self, rel: f64, abs: f64) -> bool {
        self.lhs <= self.rhs * (1.0 + rel) + abs
    }
}

pub fn check_ubar_domination(t: &DecoratedTree, u: &MatrixSignal) -> Result<Domination> {
    check_alphabet(t, u)?;
    let lhs = Evaluator::new(u).evaluate(t)?.max_norm1();
    let scalar = ubar(u).to_matrix_signal();
    let rhs = Evaluator::new(&scalar).evaluate(t)?.last()[(0, 0)];
    Ok(Domination { lhs, rhs })
}

/// `|E_{char(𝔗_n), x₁}[ū](T) − n!·E_{x₁ⁿ}[ū](T)|` with the left-comb on the right.
pub fn check_factorial_identity(n: usize, u: &MatrixSignal) -> Result<f64> {
    if n > FACTORIAL_IDENTITY_CAP {
        return Err(Error::Resource {
            what: "factorial identity order",
            requested: n,
            cap: FACTORIAL_IDENTITY_CAP,
        });
    }
    if u.m() < 1 {
        return Err(Error::Precondition("factorial identity needs channel x1".into()));
    }
    let x1 = Letter(1);
    let scalar = ubar(u).to_matrix_signal();
    let mut ev = Evaluator::new(&scalar);
    let lhs = ev.evaluate_polynomial(&char_trees(n, x1)?)?.last()[(0, 0)];
    let comb = ev.evaluate(&DecoratedTree::left_comb(&Word::repeat(x1, n)))?.last()[(0, 0)];
    Ok((lhs - factorial(n) as f64 * comb).abs())
}

/// `‖A‖₁` for each grid node of a result, for reporting.
pub fn norms(values: &MatSeries) -> Vec<f64> {
    (0..values.nodes()).map(|k| values.norm1_at(k)).collect()
}
