//! Dendriform Fliess operators `F_c[u] = Σ (c,τ) E_τ[u]`, their convergence
//! certificate, the Dyson and Magnus series, and the ODE reference solver.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::dendriform::polynomial::{
    matrix_from_json, parse_rational, rational, rational_to_f64, MatrixPolynomial, Rational, RationalPolynomial,
};
use crate::dendriform::products::{PreLieOrientation, Products};
use crate::error::{Error, Result};
use crate::iterated_integrals::{EvaluationResult, Evaluator, MatSeries, SampledInput, SCHEME_ORDER};
use crate::signals::{ball_radius, matrix_norm1, MatrixSignal};
use crate::tree::{enumerate_decorated, enumerate_words, factorial, Alphabet, DecoratedTree, Letter, Word};

/// Default order cap for general-support evaluation.
pub const GENERAL_ORDER_CAP: usize = 8;
/// Default alphabet cap (`m`) for general-support evaluation.
pub const GENERAL_ALPHABET_CAP: usize = 2;
pub const MAGNUS_ORDER_CAP: usize = 6;
pub const BERNOULLI_CAP: usize = 20;
/// Trees up to this order are sampled when checking declared growth.
pub const GROWTH_SAMPLE_ORDER: usize = 5;

/// `▷` used by the Magnus recursion unless told otherwise. Chosen by
/// comparing `exp(Ω_N)` against the RK4 solution.
pub const DEFAULT_ORIENTATION: PreLieOrientation = PreLieOrientation::LeftPreLie;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportClass {
    General,
    LeftComb,
    Finite,
}

impl SupportClass {
    pub fn name(self) -> &'static str {
        match self {
            SupportClass::General => "general",
            SupportClass::LeftComb => "left_comb",
            SupportClass::Finite => "finite",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthRegime {
    /// `‖(c,τ)‖₁ ≤ K M^{|τ|}`
    Geometric,
    /// `‖(c,τ)‖₁ ≤ K M^{|τ|} |τ|!` on left-combs
    FactorialLeftComb,
}

impl GrowthRegime {
    pub fn name(self) -> &'static str {
        match self {
            GrowthRegime::Geometric => "geometric",
            GrowthRegime::FactorialLeftComb => "factorial_left_comb",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "geometric" => Some(GrowthRegime::Geometric),
            "factorial_left_comb" | "factorial" => Some(GrowthRegime::FactorialLeftComb),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Growth {
    pub k: f64,
    pub m: f64,
    pub regime: GrowthRegime,
}

impl Growth {
    pub fn bound(&self, order: usize) -> f64 {
        let base = self.k * self.m.powi(order as i32);
        match self.regime {
            GrowthRegime::Geometric => base,
            GrowthRegime::FactorialLeftComb => base * factorial(order) as f64,
        }
    }
}

type Rule = Arc<dyn Fn(&DecoratedTree) -> Option<DMatrix<f64>> + Send + Sync>;

#[derive(Clone)]
pub enum CoefficientSource {
    Finite(BTreeMap<DecoratedTree, DMatrix<f64>>),
    Rule(Rule),
}

/// Coefficients `(c,τ)` of shape `ℓ×n` on decorated trees over `x0..xm`.
#[derive(Clone)]
pub struct GeneratingSeries {
    m: usize,
    shape: (usize, usize),
    source: CoefficientSource,
    support: SupportClass,
    growth: Option<Growth>,
}

impl fmt::Debug for GeneratingSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let source = match &self.source {
            CoefficientSource::Finite(map) => format!("finite({} terms)", map.len()),
            CoefficientSource::Rule(_) => "rule".to_string(),
        };
        f.debug_struct("GeneratingSeries")
            .field("m", &self.m)
            .field("shape", &self.shape)
            .field("source", &source)
            .field("support", &self.support)
            .field("growth", &self.growth)
            .finish()
    }
}

impl GeneratingSeries {
    /// A finitely supported series. `support` must be `Finite` or `LeftComb`.
    pub fn finite(
        m: usize,
        shape: (usize, usize),
        terms: BTreeMap<DecoratedTree, DMatrix<f64>>,
        support: SupportClass,
    ) -> Result<Self> {
        if support == SupportClass::General {
            return Err(Error::Precondition(
                "a finite map cannot declare general support".into(),
            ));
        }
        let alphabet = Alphabet::new(m);
        for (t, c) in &terms {
            t.check_alphabet(&alphabet)?;
            if c.shape() != shape {
                return Err(Error::Shape {
                    expected: shape,
                    found: c.shape(),
                });
            }
            if support == SupportClass::LeftComb && !t.is_left_comb() {
                return Err(Error::Precondition(format!("{t} is not a left-comb")));
            }
        }
        Ok(GeneratingSeries {
            m,
            shape,
            source: CoefficientSource::Finite(terms),
            support,
            growth: None,
        })
    }

    pub fn from_polynomial(m: usize, p: &MatrixPolynomial) -> Result<Self> {
        let shape = p
            .shape()
            .ok_or_else(|| Error::Precondition("cannot infer the shape of a zero series".into()))?;
        let terms = p.iter().map(|(t, c)| (t.clone(), c.clone())).collect();
        Self::finite(m, shape, terms, SupportClass::Finite)
    }

    /// Coefficients given by a rule; the support class says which trees are
    /// visited during evaluation.
    pub fn rule(
        m: usize,
        shape: (usize, usize),
        support: SupportClass,
        rule: impl Fn(&DecoratedTree) -> Option<DMatrix<f64>> + Send + Sync + 'static,
    ) -> Result<Self> {
        if support == SupportClass::Finite {
            return Err(Error::Precondition(
                "a rule-based series cannot declare finite support".into(),
            ));
        }
        Ok(GeneratingSeries {
            m,
            shape,
            source: CoefficientSource::Rule(Arc::new(rule)),
            support,
            growth: None,
        })
    }

    /// General-support series `(c,τ) = K M^{|τ|} R_τ` with seeded `‖R_τ‖₁ = 1`.
    pub fn geometric_rule(m: usize, dim: usize, k: f64, growth_m: f64, seed: u64) -> Self {
        let series = Self::rule(m, (dim, dim), SupportClass::General, move |t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(t.to_string().as_bytes()));
            let r = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..=1.0));
            let norm = matrix_norm1(&r);
            let scale = k * growth_m.powi(t.order() as i32);
            Some(if norm > 0.0 { r * (scale / norm) } else { r })
        })
        .expect("general support");
        series.with_growth(Growth {
            k,
            m: growth_m,
            regime: GrowthRegime::Geometric,
        })
    }

    pub fn with_growth(mut self, growth: Growth) -> Self {
        self.growth = Some(growth);
        self
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn support_class(&self) -> SupportClass {
        self.support
    }

    pub fn growth(&self) -> Option<Growth> {
        self.growth
    }

    pub fn coefficient(&self, t: &DecoratedTree) -> Option<DMatrix<f64>> {
        match &self.source {
            CoefficientSource::Finite(map) => map.get(t).cloned(),
            CoefficientSource::Rule(rule) => {
                if self.support == SupportClass::LeftComb && !t.is_left_comb() {
                    None
                } else {
                    rule(t)
                }
            }
        }
    }

    /// The finite coefficient map, if there is one.
    pub fn terms(&self) -> Option<&BTreeMap<DecoratedTree, DMatrix<f64>>> {
        match &self.source {
            CoefficientSource::Finite(map) => Some(map),
            CoefficientSource::Rule(_) => None,
        }
    }

    /// Samples the declared growth bound on every supported tree up to
    /// [`GROWTH_SAMPLE_ORDER`] (all terms, for a finite map).
    pub fn check_growth(&self) -> Result<GrowthReport> {
        let growth = self
            .growth
            .ok_or_else(|| Error::Precondition("series declares no growth constants".into()))?;
        let mut report = GrowthReport {
            checked: 0,
            worst_ratio: 0.0,
        };
        let mut visit = |t: &DecoratedTree, c: &DMatrix<f64>| -> Result<()> {
            if growth.regime == GrowthRegime::FactorialLeftComb && !t.is_left_comb() {
                return Err(Error::Precondition(format!(
                    "factorial growth is declared but {t} is not a left-comb"
                )));
            }
            report.checked += 1;
            report.worst_ratio = report.worst_ratio.max(matrix_norm1(c) / growth.bound(t.order()));
            Ok(())
        };
        match &self.source {
            CoefficientSource::Finite(map) => {
                for (t, c) in map {
                    visit(t, c)?;
                }
            }
            CoefficientSource::Rule(_) => {
                let alphabet = Alphabet::new(self.m);
                for n in 0..=GROWTH_SAMPLE_ORDER {
                    for t in enumerate_decorated(n, &alphabet, usize::MAX)? {
                        if let Some(c) = self.coefficient(&t) {
                            visit(&t, &c)?;
                        }
                    }
                }
            }
        }
        Ok(report)
    }

    pub fn to_json(&self) -> Result<Value> {
        let map = self
            .terms()
            .ok_or_else(|| Error::Precondition("only finite series can be written out".into()))?;
        let terms: Vec<Value> = map
            .iter()
            .map(|(t, c)| json!({"tree": t.to_json(), "coeff": crate::dendriform::polynomial::matrix_to_json(c)}))
            .collect();
        let mut out = json!({"m": self.m, "terms": terms});
        if let Some(g) = self.growth {
            out["growth"] = json!({"K": g.k, "M": g.m, "regime": g.regime.name()});
        }
        Ok(out)
    }

    /// Reads a series file: either a list of terms or
    /// `{"m": .., "growth": {"K","M","regime"}, "terms": [..]}`.
    /// A term is `{"tree": .., "coeff": ..}` or `{"rule": "dyson", "order": N, "coeff": ..}`;
    /// a scalar coefficient stands for that multiple of the `dim×dim` identity.
    pub fn from_json(value: &Value, dim: usize, default_order: usize) -> Result<Self> {
        let (terms, declared_m, growth) = match value {
            Value::Array(items) => (items.as_slice(), 0, None),
            Value::Object(obj) => {
                let terms = obj
                    .get("terms")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Json("series object needs a `terms` array".into()))?;
                let m = match obj.get("m") {
                    None => 0,
                    Some(v) => v
                        .as_u64()
                        .filter(|&m| m <= 64)
                        .ok_or_else(|| Error::Json("`m` must be an integer in 0..=64".into()))?
                        as usize,
                };
                let growth = match obj.get("growth") {
                    None => None,
                    Some(g) => Some(parse_growth(g)?),
                };
                (terms.as_slice(), m, growth)
            }
            _ => return Err(Error::Json("series must be a list or an object".into())),
        };

        let mut map: BTreeMap<DecoratedTree, DMatrix<f64>> = BTreeMap::new();
        let mut shape: Option<(usize, usize)> = None;
        let mut push = |t: DecoratedTree, c: DMatrix<f64>, map: &mut BTreeMap<_, DMatrix<f64>>| -> Result<()> {
            match shape {
                Some(s) if s != c.shape() => {
                    return Err(Error::Shape {
                        expected: s,
                        found: c.shape(),
                    })
                }
                _ => shape = Some(c.shape()),
            }
            match map.get_mut(&t) {
                Some(existing) => *existing += c,
                None => {
                    map.insert(t, c);
                }
            }
            Ok(())
        };
        for item in terms {
            let obj = item
                .as_object()
                .ok_or_else(|| Error::Json("series term must be an object".into()))?;
            let coeff = match obj.get("coeff") {
                Some(c) => parse_coefficient(c, dim)?,
                None if obj.contains_key("rule") => DMatrix::identity(dim, dim),
                None => return Err(Error::Json("series term needs `coeff`".into())),
            };
            if coeff.ncols() != dim {
                return Err(Error::Shape {
                    expected: (coeff.nrows(), dim),
                    found: coeff.shape(),
                });
            }
            match (obj.get("tree"), obj.get("rule")) {
                (Some(t), None) => push(DecoratedTree::from_json(t)?, coeff, &mut map)?,
                (None, Some(Value::String(rule))) if rule == "dyson" => {
                    let order = match obj.get("order") {
                        None => default_order,
                        Some(v) => v
                            .as_u64()
                            .filter(|&n| n <= 64)
                            .ok_or_else(|| Error::Json("`order` must be an integer in 0..=64".into()))?
                            as usize,
                    };
                    for k in 0..=order {
                        let t = DecoratedTree::left_comb(&Word::repeat(Letter(1), k));
                        push(t, coeff.clone(), &mut map)?;
                    }
                }
                (None, Some(other)) => return Err(Error::Json(format!("unknown series rule {other}"))),
                _ => return Err(Error::Json("series term needs exactly one of `tree` or `rule`".into())),
            }
        }
        let shape = shape.unwrap_or((dim, dim));
        let max_letter = map
            .keys()
            .filter_map(DecoratedTree::max_letter)
            .map(|l| l.0)
            .max()
            .unwrap_or(0);
        let support = if !map.is_empty() && map.keys().all(DecoratedTree::is_left_comb) {
            SupportClass::LeftComb
        } else {
            SupportClass::Finite
        };
        let mut series = Self::finite(declared_m.max(max_letter), shape, map, support)?;
        series.growth = growth;
        Ok(series)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x100_0000_01b3)
    })
}

fn parse_growth(value: &Value) -> Result<Growth> {
    let num = |key: &str| -> Result<f64> {
        value
            .get(key)
            .and_then(Value::as_f64)
            .filter(|x| x.is_finite() && *x > 0.0)
            .ok_or_else(|| Error::Json(format!("growth `{key}` must be a positive number")))
    };
    let regime = match value.get("regime").and_then(Value::as_str) {
        None => GrowthRegime::Geometric,
        Some(s) => GrowthRegime::parse(s).ok_or_else(|| Error::Json(format!("unknown growth regime `{s}`")))?,
    };
    Ok(Growth {
        k: num("K")?,
        m: num("M")?,
        regime,
    })
}

fn parse_coefficient(value: &Value, dim: usize) -> Result<DMatrix<f64>> {
    let scalar = match value {
        Value::String(s) => rational_to_f64(&parse_rational(s)?),
        Value::Number(n) => n.as_f64().ok_or_else(|| Error::Json("bad number".into()))?,
        Value::Array(_) => return matrix_from_json(value),
        _ => {
            return Err(Error::Json(
                "coefficient must be a number, a rational string or a matrix".into(),
            ))
        }
    };
    if !scalar.is_finite() {
        return Err(Error::Json("coefficient must be finite".into()));
    }
    Ok(DMatrix::identity(dim, dim) * scalar)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthReport {
    pub checked: usize,
    /// `max ‖(c,τ)‖₁ / bound(|τ|)`; the declared growth holds when `≤ 1`.
    pub worst_ratio: f64,
}

impl GrowthReport {
    pub fn holds(&self) -> bool {
        self.worst_ratio <= 1.0 + 1e-12
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FliessOutput {
    pub result: EvaluationResult,
    pub order: usize,
    /// `‖·‖₁` max over the grid of each homogeneous order.
    pub order_norms: Vec<f64>,
    pub tail_bound: Option<f64>,
}

impl FliessOutput {
    pub fn values(&self) -> &MatSeries {
        &self.result.values
    }
}

/// Homogeneous parts `Σ_{|τ|=k} (c,τ)E_τ[u]`, `k = 0..=order`.
pub fn fliess_terms_by_order(
    c: &GeneratingSeries,
    u: &MatrixSignal,
    order: usize,
    general_cap: usize,
) -> Result<Vec<MatSeries>> {
    if c.m() > u.m() {
        return Err(Error::Alphabet {
            index: c.m(),
            max: u.m(),
        });
    }
    if c.shape().1 != u.dim() {
        return Err(Error::Shape {
            expected: (c.shape().0, u.dim()),
            found: c.shape(),
        });
    }
    let input = Arc::new(SampledInput::new(u));
    let nodes = u.grid().nodes();
    let mut out = vec![MatSeries::zeros(c.shape().0, u.dim(), nodes); order + 1];

    match (&c.source, c.support) {
        (CoefficientSource::Finite(map), _) => {
            let mut ev = Evaluator::from_input(input);
            for (t, coeff) in map {
                if t.order() > order {
                    continue;
                }
                let e = ev.evaluate(t)?;
                out[t.order()].axpy(1.0, &e.left_mul(coeff)?)?;
            }
        }
        (CoefficientSource::Rule(_), SupportClass::LeftComb) => {
            let mut ev = Evaluator::from_input(input);
            let alphabet = Alphabet::new(c.m());
            for (k, slot) in out.iter_mut().enumerate() {
                for w in enumerate_words(k, &alphabet) {
                    let t = DecoratedTree::left_comb(&w);
                    if let Some(coeff) = c.coefficient(&t) {
                        slot.axpy(1.0, &ev.evaluate(&t)?.left_mul(&coeff)?)?;
                    }
                }
            }
        }
        (CoefficientSource::Rule(_), _) => {
            if order > general_cap {
                return Err(Error::Resource {
                    what: "general-support truncation order",
                    requested: order,
                    cap: general_cap,
                });
            }
            if general_cap == GENERAL_ORDER_CAP && c.m() > GENERAL_ALPHABET_CAP {
                return Err(Error::Resource {
                    what: "general-support alphabet size",
                    requested: c.m(),
                    cap: GENERAL_ALPHABET_CAP,
                });
            }
            general_terms(c, &input, order, &mut out)?;
        }
    }
    Ok(out)
}

type Layer = Vec<(DecoratedTree, Arc<MatSeries>)>;

/// Layer-by-layer evaluation over all decorated trees. Every tree of order
/// `k` is grafted from stored lower layers; the top layer is only summed.
fn general_terms(c: &GeneratingSeries, input: &Arc<SampledInput>, order: usize, out: &mut [MatSeries]) -> Result<()> {
    let nodes = input.grid().nodes();
    let identity = Arc::new(MatSeries::identity(input.dim(), nodes));
    let letters: Vec<Letter> = Alphabet::new(c.m()).letters().collect();
    if let Some(c0) = c.coefficient(&DecoratedTree::Leaf) {
        out[0].axpy(1.0, &identity.left_mul(&c0)?)?;
    }
    let mut layers: Vec<Layer> = vec![vec![(DecoratedTree::Leaf, identity)]];
    let rows = c.shape().0;

    for k in 1..=order {
        let keep = k < order;
        // one job per (left tree, letter); it sweeps every right tree
        let jobs: Vec<(usize, usize, Letter)> = (0..k)
            .flat_map(|i| {
                let letters = &letters;
                (0..layers[i].len()).flat_map(move |a| letters.iter().map(move |&x| (i, a, x)))
            })
            .collect();
        let layers_ref = &layers;
        let chunks: Vec<Result<(MatSeries, Layer)>> = jobs
            .par_chunks(16)
            .map(|chunk| {
                let mut partial = MatSeries::zeros(rows, input.dim(), nodes);
                let mut fresh = Vec::new();
                for &(i, a, x) in chunk {
                    let (lt, lv) = &layers_ref[i][a];
                    for (rt, rv) in &layers_ref[k - 1 - i] {
                        let t = DecoratedTree::node(lt.clone(), x, rt.clone());
                        let coeff = c.coefficient(&t);
                        if coeff.is_none() && !keep {
                            continue;
                        }
                        let l = (!lt.is_leaf()).then_some(lv.as_ref());
                        let r = (!rt.is_leaf()).then_some(rv.as_ref());
                        let v = input.graft(l, x, r)?;
                        if let Some(coeff) = coeff {
                            partial.axpy(1.0, &v.left_mul(&coeff)?)?;
                        }
                        if keep {
                            fresh.push((t, Arc::new(v)));
                        }
                    }
                }
                Ok((partial, fresh))
            })
            .collect();
        let mut layer = Vec::new();
        for chunk in chunks {
            let (partial, fresh) = chunk?;
            out[k].axpy(1.0, &partial)?;
            layer.extend(fresh);
        }
        if keep {
            layers.push(layer);
        }
    }
    Ok(())
}

pub fn evaluate_fliess(c: &GeneratingSeries, u: &MatrixSignal, order: usize) -> Result<FliessOutput> {
    evaluate_fliess_with_cap(c, u, order, GENERAL_ORDER_CAP)
}

/// As [`evaluate_fliess`] with an explicit cap on the general-support order.
pub fn evaluate_fliess_with_cap(
    c: &GeneratingSeries,
    u: &MatrixSignal,
    order: usize,
    general_cap: usize,
) -> Result<FliessOutput> {
    let terms = fliess_terms_by_order(c, u, order, general_cap)?;
    let mut values = MatSeries::zeros(c.shape().0, u.dim(), u.grid().nodes());
    for t in &terms {
        values.axpy(1.0, t)?;
    }
    let tail_bound = match c.growth() {
        Some(g) if g.regime == GrowthRegime::Geometric => convergence_certificate(c, u, order)?.tail,
        _ => None,
    };
    Ok(FliessOutput {
        result: EvaluationResult {
            grid: u.grid(),
            values,
            tree: None,
            scheme_order: SCHEME_ORDER,
        },
        order,
        order_norms: terms.iter().map(MatSeries::max_norm1).collect(),
        tail_bound,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub k: f64,
    pub m_growth: f64,
    pub m: usize,
    /// `R = max{‖u‖, T}`
    pub r: f64,
    pub radius: f64,
    /// `q = M R (m+1)`
    pub q: f64,
    pub tail: Option<f64>,
    pub order: usize,
    pub diagnostic: Option<String>,
}

impl Certificate {
    pub fn to_json(&self) -> Value {
        json!({
            "K": self.k,
            "M": self.m_growth,
            "m": self.m,
            "R": self.r,
            "radius": self.radius,
            "q": self.q,
            "tail": self.tail,
            "N": self.order,
            "diagnostic": self.diagnostic,
        })
    }
}

pub fn certificate_for(growth: Growth, m: usize, r: f64, order: usize) -> Result<Certificate> {
    if growth.regime != GrowthRegime::Geometric {
        return Err(Error::Precondition(format!(
            "certificate needs geometric growth, series declares {}",
            growth.regime.name()
        )));
    }
    let m1 = (m + 1) as f64;
    let radius = 1.0 / (growth.m * m1);
    let q = growth.m * r * m1;
    let (tail, diagnostic) = if q < 1.0 {
        (Some(growth.k * q.powi(order as i32 + 1) / (1.0 - q)), None)
    } else {
        (
            None,
            Some(format!(
                "R = {r} is not below the radius {radius}: the geometric majorant diverges (q = {q})"
            )),
        )
    };
    Ok(Certificate {
        k: growth.k,
        m_growth: growth.m,
        m,
        r,
        radius,
        q,
        tail,
        order,
        diagnostic,
    })
}

pub fn convergence_certificate(c: &GeneratingSeries, u: &MatrixSignal, order: usize) -> Result<Certificate> {
    let growth = c
        .growth()
        .ok_or_else(|| Error::Precondition("series declares no growth constants".into()))?;
    certificate_for(growth, c.m(), ball_radius(u), order)
}

/// `c = Σ_{k≤N} x₁ᵏ` on left-combs with identity coefficients.
pub fn dyson_series(order: usize, dim: usize) -> GeneratingSeries {
    let terms = (0..=order)
        .map(|k| {
            (
                DecoratedTree::left_comb(&Word::repeat(Letter(1), k)),
                DMatrix::identity(dim, dim),
            )
        })
        .collect();
    GeneratingSeries::finite(1, (dim, dim), terms, SupportClass::LeftComb)
        .expect("left-combs")
        .with_growth(Growth {
            k: 1.0,
            m: 1.0,
            regime: GrowthRegime::FactorialLeftComb,
        })
}

fn scalar_of(c: &DMatrix<f64>) -> Option<f64> {
    if c.nrows() != c.ncols() || c.nrows() == 0 {
        return None;
    }
    let s = c[(0, 0)];
    let ok = (0..c.nrows()).all(|i| (0..c.ncols()).all(|j| c[(i, j)] == if i == j { s } else { 0.0 }));
    ok.then_some(s)
}

/// Series `c ⧢ d` with `F_c[u] F_d[u] = F_{c⧢d}[u]`, for finite series whose
/// coefficients are multiples of the identity.
pub fn product_connection(c: &GeneratingSeries, d: &GeneratingSeries) -> Result<GeneratingSeries> {
    let (Some(cm), Some(dm)) = (c.terms(), d.terms()) else {
        return Err(Error::Precondition("product connection needs finite support".into()));
    };
    if c.shape() != d.shape() {
        return Err(Error::Shape {
            expected: c.shape(),
            found: d.shape(),
        });
    }
    let scalars = |m: &BTreeMap<DecoratedTree, DMatrix<f64>>| -> Result<Vec<(DecoratedTree, f64)>> {
        m.iter()
            .map(|(t, a)| {
                scalar_of(a)
                    .map(|s| (t.clone(), s))
                    .ok_or_else(|| Error::Precondition(format!("coefficient of {t} is not a multiple of I")))
            })
            .collect()
    };
    let (cs, ds) = (scalars(cm)?, scalars(dm)?);
    let dim = c.shape().0;
    let mut products = Products::new();
    let mut acc: BTreeMap<DecoratedTree, f64> = BTreeMap::new();
    for (t1, a) in &cs {
        for (t2, b) in &ds {
            let p = products.shuffle(
                &RationalPolynomial::from_tree(t1.clone()),
                &RationalPolynomial::from_tree(t2.clone()),
            )?;
            for (t, n) in p.iter() {
                *acc.entry(t.clone()).or_insert(0.0) += a * b * rational_to_f64(n);
            }
        }
    }
    let terms = acc
        .into_iter()
        .filter(|(_, v)| *v != 0.0)
        .map(|(t, v)| (t, DMatrix::identity(dim, dim) * v))
        .collect();
    GeneratingSeries::finite(c.m().max(d.m()), c.shape(), terms, SupportClass::Finite)
}

/// Bernoulli numbers with `B₁ = −1/2`.
pub fn bernoulli(n: usize) -> Result<Rational> {
    if n > BERNOULLI_CAP {
        return Err(Error::Resource {
            what: "Bernoulli index",
            requested: n,
            cap: BERNOULLI_CAP,
        });
    }
    let mut b: Vec<Rational> = vec![Rational::one()];
    for k in 1..=n {
        // Σ_{j<k} C(k+1, j) B_j + (k+1) B_k = 0
        let mut s = Rational::zero();
        let mut binom = Rational::one();
        for (j, bj) in b.iter().enumerate() {
            s += &binom * bj;
            binom *= rational((k + 1 - j) as i64, (j + 1) as i64);
        }
        b.push(-s / rational((k + 1) as i64, 1));
    }
    Ok(b.pop().unwrap())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MagnusSeries {
    /// Index `k` of the stationary iterate `d^{[k]}`.
    pub iterations: usize,
    pub order: usize,
    pub orientation: PreLieOrientation,
    pub d: RationalPolynomial,
    /// For each order `j ≤ N`, the first iterate from which the order-`j`
    /// component no longer changes.
    pub stable_from: Vec<usize>,
}

pub fn magnus_generating_series(order: usize) -> Result<MagnusSeries> {
    magnus_generating_series_with(order, DEFAULT_ORIENTATION)
}

/// Iterates `d^{[k]} = Σ_n B_n/n! L^{(n)}(x₁)` from `d^{[1]} = x₁`, with
/// `L^{(0)}(x₁) = x₁` and `L^{(n)} = d^{[k-1]} ▷ L^{(n-1)}`, truncating at `order`.
pub fn magnus_generating_series_with(order: usize, orientation: PreLieOrientation) -> Result<MagnusSeries> {
    if order > MAGNUS_ORDER_CAP {
        return Err(Error::Resource {
            what: "Magnus order",
            requested: order,
            cap: MAGNUS_ORDER_CAP,
        });
    }
    let x1 = RationalPolynomial::from_tree(DecoratedTree::single(Letter(1)));
    if order == 0 {
        return Ok(MagnusSeries {
            iterations: 1,
            order,
            orientation,
            d: RationalPolynomial::zero(),
            stable_from: vec![1],
        });
    }
    let weights: Vec<Rational> = (0..order)
        .map(|n| Ok(bernoulli(n)? / rational(factorial(n) as i64, 1)))
        .collect::<Result<_>>()?;
    let mut products = Products::new();
    let mut history = vec![x1.clone()];
    loop {
        let prev = history.last().unwrap().clone();
        let mut l = x1.clone();
        let mut next = x1.clone();
        for w in weights.iter().skip(1) {
            l = truncated_pre_lie(&mut products, orientation, &prev, &l, order)?;
            next = &next + &(&l * w);
        }
        let done = next == prev;
        history.push(next);
        if done {
            break;
        }
        if history.len() > order + 2 {
            return Err(Error::Internal(format!(
                "Magnus recursion not stationary after {} iterations",
                order + 2
            )));
        }
    }
    let d = history.last().unwrap().clone();
    let stable_from = (0..=order)
        .map(|j| {
            let target = d.homogeneous(j);
            let mut first = history.len();
            for (idx, h) in history.iter().enumerate().rev() {
                if h.homogeneous(j) != target {
                    break;
                }
                first = idx + 1;
            }
            first
        })
        .collect();
    Ok(MagnusSeries {
        iterations: history.len(),
        order,
        orientation,
        d,
        stable_from,
    })
}

/// `(a ▷ b)` truncated at `order`, skipping pairs of components whose
/// orders already exceed it.
fn truncated_pre_lie(
    products: &mut Products,
    orientation: PreLieOrientation,
    a: &RationalPolynomial,
    b: &RationalPolynomial,
    order: usize,
) -> Result<RationalPolynomial> {
    let mut out = RationalPolynomial::zero();
    for i in 1..order {
        let ai = a.homogeneous(i);
        if ai.is_zero() {
            continue;
        }
        for j in 1..=order - i {
            let bj = b.homogeneous(j);
            if !bj.is_zero() {
                out = &out + &products.pre_lie(orientation, &ai, &bj)?;
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MagnusOutput {
    pub omega: EvaluationResult,
    /// `exp(Ω(t_k))`
    pub z: MatSeries,
}

pub fn magnus_evaluate(d: &MagnusSeries, u: &MatrixSignal) -> Result<MagnusOutput> {
    if u.m() < 1 {
        return Err(Error::Precondition(
            "Magnus evaluation needs the system channel x1".into(),
        ));
    }
    let omega = crate::iterated_integrals::evaluate_polynomial(&d.d, u)?;
    let z = omega.values.map(matrix_exp)?;
    Ok(MagnusOutput { omega, z })
}

/// Matrix exponential (Padé with scaling and squaring). `a` must be square.
pub fn matrix_exp(a: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.nrows(), a.ncols(), "matrix_exp needs a square matrix");
    a.exp()
}

/// Classical RK4 for `Ż = U(t) Z`, `Z(0) = I`, with `U` linearly
/// interpolated between samples and `refinement` steps per panel.
pub fn rk4_reference(u: &MatrixSignal, refinement: usize) -> Result<MatSeries> {
    if u.m() != 1 {
        return Err(Error::Precondition(format!(
            "RK4 reference needs exactly one system channel, signal has {}",
            u.m()
        )));
    }
    if refinement == 0 {
        return Err(Error::Precondition("refinement must be at least 1".into()));
    }
    let grid = u.grid();
    let n = u.dim();
    let samples = u.channel(1).unwrap();
    let step = 1.0 / refinement as f64;
    let mut z = DMatrix::identity(n, n);
    let mut out = vec![z.clone()];
    for k in 0..grid.panels() {
        let (a, b) = (&samples[k], &samples[k + 1]);
        let at = |s: f64| a + (b - a) * s;
        let h = grid.h() * step;
        for j in 0..refinement {
            let s0 = j as f64 * step;
            let (u0, um, u1) = (at(s0), at(s0 + 0.5 * step), at(s0 + step));
            let k1 = &u0 * &z;
            let k2 = &um * (&z + &k1 * (0.5 * h));
            let k3 = &um * (&z + &k2 * (0.5 * h));
            let k4 = &u1 * (&z + &k3 * h);
            z += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
        out.push(z.clone());
    }
    MatSeries::from_matrices(&out)
}
