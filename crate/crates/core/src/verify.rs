//! Seeded self-checks run by `fliess verify`. Each suite is a quick version
//! of the corresponding integration test and is deterministic in its seed.

use nalgebra::DMatrix;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::dendriform::parenthesis::{delta_to_tree, parse_parenthesis_word};
use crate::dendriform::polynomial::{rational, Rational, RationalPolynomial};
use crate::dendriform::products::{char_trees, Products};
use crate::error::{Error, Result};
use crate::iterated_integrals::{
    check_factorial_identity, check_product_identity, check_ubar_domination, evaluate_tree,
};
use crate::operators::{magnus_evaluate, magnus_generating_series, rk4_reference, DEFAULT_ORIENTATION};
use crate::signals::{constant, signal_norm, spin_field, AxisSchedule, SmoothSignal};
use crate::tree::{
    catalan, enumerate_decorated, enumerate_trees, factorial, random_decorated, tree_factorial, Alphabet,
    DecoratedTree, Letter, PlanarTree,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Axioms,
    Catalan,
    ProductTheorem,
    Bounds,
    Magnus,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Axioms,
        Suite::Catalan,
        Suite::ProductTheorem,
        Suite::Bounds,
        Suite::Magnus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Axioms => "axioms",
            Suite::Catalan => "catalan",
            Suite::ProductTheorem => "product-theorem",
            Suite::Bounds => "bounds",
            Suite::Magnus => "magnus",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Suite::ALL.into_iter().find(|x| x.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn to_json(&self) -> Value {
        json!({"suite": self.suite, "name": self.name, "passed": self.passed, "detail": self.detail})
    }
}

struct Recorder {
    suite: &'static str,
    checks: Vec<Check>,
}

impl Recorder {
    fn new(suite: Suite) -> Self {
        Recorder {
            suite: suite.name(),
            checks: Vec::new(),
        }
    }

    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check {
            suite: self.suite,
            name: name.to_string(),
            passed,
            detail,
        });
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<Check>> {
    let mut rec = Recorder::new(suite);
    match suite {
        Suite::Axioms => axioms(&mut rec, seed)?,
        Suite::Catalan => catalan_suite(&mut rec)?,
        Suite::ProductTheorem => product_theorem(&mut rec, seed)?,
        Suite::Bounds => bounds(&mut rec, seed)?,
        Suite::Magnus => magnus(&mut rec)?,
    }
    Ok(rec.checks)
}

pub fn run_all(seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for s in Suite::ALL {
        out.extend(run_suite(s, seed)?);
    }
    Ok(out)
}

fn word_tree(s: &str) -> DecoratedTree {
    delta_to_tree(&parse_parenthesis_word(s).expect("static word"))
}

fn poly(t: DecoratedTree) -> RationalPolynomial {
    RationalPolynomial::from_tree(t)
}

fn axioms(rec: &mut Recorder, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphabet = Alphabet::new(2);
    let mut pr = Products::new();
    let (mut dendri, mut sum, mut assoc) = (0, 0, 0);
    let trials = 100;
    for _ in 0..trials {
        let (na, nb, nc) = (rng.gen_range(1..=3), rng.gen_range(1..=3), rng.gen_range(1..=3));
        let a = poly(random_decorated(&mut rng, na, &alphabet));
        let b = poly(random_decorated(&mut rng, nb, &alphabet));
        let c = poly(random_decorated(&mut rng, nc, &alphabet));
        let ab_prec = pr.prec(&a, &b)?;
        let ab_succ = pr.succ(&a, &b)?;
        let bc_shuffle = pr.shuffle(&b, &c)?;
        let ab_shuffle = pr.shuffle(&a, &b)?;
        let ok_a = pr.prec(&ab_prec, &c)? == pr.prec(&a, &bc_shuffle)?;
        let bc_prec = pr.prec(&b, &c)?;
        let bc_succ = pr.succ(&b, &c)?;
        let ok_b = pr.prec(&ab_succ, &c)? == pr.succ(&a, &bc_prec)?;
        let ok_c = pr.succ(&a, &bc_succ)? == pr.succ(&ab_shuffle, &c)?;
        dendri += usize::from(ok_a && ok_b && ok_c);
        sum += usize::from(&ab_prec + &ab_succ == ab_shuffle);
        assoc += usize::from(pr.shuffle(&ab_shuffle, &c)? == pr.shuffle(&a, &bc_shuffle)?);
    }
    rec.push(
        "dendriform axioms",
        dendri == trials,
        format!("{dendri}/{trials} random triples"),
    );
    rec.push(
        "prec + succ = shuffle",
        sum == trials,
        format!("{sum}/{trials} random pairs"),
    );
    rec.push(
        "shuffle associativity",
        assoc == trials,
        format!("{assoc}/{trials} random triples"),
    );

    let got = pr.shuffle(&poly(word_tree("x1[x2]")), &poly(word_tree("x3")))?;
    let expected = &(&poly(word_tree("x1[x2[x3]]")) + &poly(word_tree("x1[[x2]x3]"))) + &poly(word_tree("[x1[x2]]x3"));
    rec.push("worked shuffle example", got == expected, format!("{got}"));

    let x1 = poly(DecoratedTree::single(Letter(1)));
    let mut ok = true;
    for n in 1..=5 {
        let power = pr.shuffle_power(&x1, n)?;
        ok &= power == char_trees(n, Letter(1))?;
    }
    rec.push("char(T_n) is the n-fold shuffle power of x1", ok, "n = 1..5".into());
    Ok(())
}

fn catalan_suite(rec: &mut Recorder) -> Result<()> {
    let mut ok = true;
    for n in 0..=10 {
        ok &= enumerate_trees(n)?.len() as u128 == catalan(n)?;
    }
    rec.push("tree counts are Catalan numbers", ok, "n = 0..10".into());

    let mut segner = true;
    for n in 1..=12 {
        let s: u128 = (0..n).map(|i| catalan(i).unwrap() * catalan(n - 1 - i).unwrap()).sum();
        segner &= s == catalan(n)?;
    }
    rec.push("Segner recurrence", segner, format!("C12 = {}", catalan(12)?));

    let combs = (0..=8).all(|n| {
        tree_factorial(&PlanarTree::left_comb(n)) == factorial(n)
            && tree_factorial(&PlanarTree::right_comb(n)) == factorial(n)
    });
    rec.push("comb factorials equal n!", combs, "n = 0..8".into());

    let mut unit = true;
    for n in 0..=8 {
        let s = enumerate_trees(n)?
            .iter()
            .fold(Rational::zero(), |acc, t| acc + rational(1, tree_factorial(t) as i64));
        unit &= s == Rational::one();
    }
    rec.push("sum of 1/gamma over T_n is 1", unit, "n = 0..8".into());
    Ok(())
}

/// A random pair whose combined order is in `2..=max` and which uses at
/// least one controlled letter.
fn random_pair(rng: &mut ChaCha8Rng, max: usize, alphabet: &Alphabet) -> (DecoratedTree, DecoratedTree) {
    loop {
        let n1 = rng.gen_range(1..max);
        let n2 = rng.gen_range(1..=max - n1);
        let a = random_decorated(rng, n1, alphabet);
        let b = random_decorated(rng, n2, alphabet);
        let controlled = |t: &DecoratedTree| t.foliation().letters().iter().any(|l| l.0 > 0);
        if controlled(&a) || controlled(&b) {
            return (a, b);
        }
    }
}

fn product_theorem(rec: &mut Recorder, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphabet = Alphabet::new(2);
    let cases = 10;
    let (mut in_band, mut worst_fine) = (0, 0.0f64);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for _ in 0..cases {
        let (a, b) = random_pair(&mut rng, 4, &alphabet);
        let s = SmoothSignal::random(rng.gen(), 2, 2, 1.0, 1.0);
        let coarse = check_product_identity(&a, &b, &s.sample(256)?)?;
        let fine = check_product_identity(&a, &b, &s.sample(512)?)?;
        let ratio = coarse / fine;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
        worst_fine = worst_fine.max(fine);
        in_band += usize::from((3.2..=4.8).contains(&ratio));
    }
    rec.push(
        "product identity converges at second order",
        in_band == cases,
        format!("{in_band}/{cases} ratios in [3.2, 4.8], observed [{lo:.3}, {hi:.3}]"),
    );
    rec.push(
        "product identity residual is small",
        worst_fine <= 1e-3,
        format!("max residual {worst_fine:.3e} at N = 512"),
    );
    Ok(())
}

fn bounds(rec: &mut Recorder, seed: u64) -> Result<()> {
    let one = constant(&[DMatrix::from_element(1, 1, 1.0)], 1.0, 1000)?;
    let mut worst = 0.0f64;
    for n in 1..=3 {
        for t in enumerate_decorated(n, &Alphabet::new(1), usize::MAX)? {
            if t.foliation().letters().iter().all(|l| l.0 == 1) {
                let v = evaluate_tree(&t, &one)?.final_value()[(0, 0)];
                worst = worst.max((v - 1.0 / tree_factorial(&t.skeleton()) as f64).abs());
            }
        }
    }
    rec.push(
        "constant input gives 1/gamma",
        worst <= 1e-6,
        format!("max error {worst:.3e}"),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphabet = Alphabet::new(2);
    let cases = 50;
    let mut ok = 0;
    for _ in 0..cases {
        let n = rng.gen_range(1..=4);
        let t = random_decorated(&mut rng, n, &alphabet);
        let u = SmoothSignal::random(rng.gen(), 2, 2, 1.0, 1.0).sample(64)?;
        ok += usize::from(check_ubar_domination(&t, &u)?.holds(1e-6, 1e-9));
    }
    rec.push(
        "norm domination by scalar input",
        ok == cases,
        format!("{ok}/{cases} cases"),
    );

    let mut worst = 0.0f64;
    for n in 1..=4 {
        worst = worst.max(check_factorial_identity(n, &one)?);
    }
    rec.push(
        "factorial identity",
        worst <= 1e-6,
        format!("max residual {worst:.3e}, n = 1..4"),
    );
    Ok(())
}

fn magnus(rec: &mut Recorder) -> Result<()> {
    let d = magnus_generating_series(3)?;
    let x1 = poly(DecoratedTree::single(Letter(1)));
    let mut pr = Products::new();
    let o = DEFAULT_ORIENTATION;
    let xx = pr.pre_lie(o, &x1, &x1)?;
    let expected = &(&(&x1 - &(&xx * &rational(1, 2))) + &(&pr.pre_lie(o, &xx, &x1)? * &rational(1, 4)))
        + &(&pr.pre_lie(o, &x1, &xx)? * &rational(1, 12));
    rec.push("order-3 Magnus series", d.d == expected, format!("{} terms", d.d.len()));

    let schedule = AxisSchedule::parse("x-y")?;
    let base = spin_field(1.0, schedule, 1.0, 400)?;
    let u = spin_field(0.5 / signal_norm(&base), schedule, 1.0, 400)?;
    let reference = rk4_reference(&u, 4)?.last();
    let mut errors = Vec::new();
    let mut orthogonality = 0.0;
    for n in 1..=4 {
        let out = magnus_evaluate(&magnus_generating_series(n)?, &u)?;
        let z = out.z.last();
        errors.push(crate::signals::matrix_norm1(&(&z - &reference)));
        if n == 4 {
            orthogonality = (z.transpose() * &z - DMatrix::identity(3, 3)).amax();
        }
    }
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    let detail = errors.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(", ");
    rec.push(
        "exp(Omega_N) approaches the ODE solution",
        decreasing && errors[3] <= 1e-4,
        format!("N = 1..4: {detail} ({})", o.name()),
    );
    rec.push(
        "exp(Omega_4) is orthogonal",
        orthogonality <= 1e-6,
        format!("max |Z^T Z - I| = {orthogonality:.3e}"),
    );
    Ok(())
}

/// Turns a failed suite run into an error for callers that only need a verdict.
pub fn require_pass(checks: &[Check]) -> Result<()> {
    match checks.iter().find(|c| !c.passed) {
        None => Ok(()),
        Some(c) => Err(Error::Internal(format!(
            "{}: {} failed ({})",
            c.suite, c.name, c.detail
        ))),
    }
}
