//! Acceptance run. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Reference values come from small oracles defined
//! here (closed forms, a direct nested-trapezoid evaluator, an RK4 on the
//! analytic field), not from the library paths under test.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::time::{Duration, Instant};

use dendriform_fliess::dendriform::parenthesis::{delta_to_tree, parse_parenthesis_word};
use dendriform_fliess::dendriform::{rational, Products, RationalPolynomial};
use dendriform_fliess::iterated_integrals::{
    check_factorial_identity, check_product_identity, check_ubar_domination, evaluate_tree, MatSeries,
};
use dendriform_fliess::operators::{
    certificate_for, dyson_series, evaluate_fliess, fliess_terms_by_order, magnus_evaluate, magnus_generating_series,
    product_connection, rk4_reference, GeneratingSeries, Growth, GrowthRegime, SupportClass,
};
use dendriform_fliess::signals::{
    constant, matrix_norm1, signal_norm, so3_generators, spin_field, AxisSchedule, MatrixSignal, SmoothSignal,
};
use dendriform_fliess::tree::{
    catalan, decorate, enumerate_decorated, enumerate_trees, random_decorated, tree_factorial, Alphabet, DecoratedTree,
    Letter, PlanarTree, Word,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = dendriform_fliess::Result<(bool, String)>;
type Criterion = (&'static str, fn() -> Outcome);

// ---- oracles ----

fn oracle_catalan(n: u128) -> u128 {
    // C_n = binom(2n, n) / (n + 1), built incrementally to stay exact.
    let mut c: u128 = 1;
    for k in 0..n {
        c = c * 2 * (2 * k + 1) / (k + 2);
    }
    c
}

fn oracle_factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

fn oracle_gamma(t: &PlanarTree) -> u128 {
    match t.split() {
        None => 1,
        Some((l, r)) => (l.order() + r.order() + 1) as u128 * oracle_gamma(l) * oracle_gamma(r),
    }
}

/// Direct nested trapezoid: `E_τ(t_k) = ∫₀^{t_k} E_l u_x E_r`, `E_| = I`.
fn oracle_eval(t: &DecoratedTree, u: &MatrixSignal) -> Vec<DMatrix<f64>> {
    let g = u.grid();
    let n = u.dim();
    match t.split() {
        None => vec![DMatrix::identity(n, n); g.nodes()],
        Some((l, x, r)) => {
            let (el, er) = (oracle_eval(l, u), oracle_eval(r, u));
            let f: Vec<DMatrix<f64>> = (0..g.nodes()).map(|k| &el[k] * u.sample(x.0, k) * &er[k]).collect();
            let mut out = vec![DMatrix::zeros(n, n)];
            for k in 1..g.nodes() {
                let next = &out[k - 1] + (&f[k - 1] + &f[k]) * (0.5 * g.h());
                out.push(next);
            }
            out
        }
    }
}

fn scalar_signal(u: &MatrixSignal) -> MatrixSignal {
    let g = u.grid();
    let channels = (1..=u.m())
        .map(|i| {
            (0..g.nodes())
                .map(|k| DMatrix::from_element(1, 1, matrix_norm1(&u.sample(i, k))))
                .collect()
        })
        .collect();
    MatrixSignal::new(g, 1, channels).unwrap()
}

/// Classical RK4 for `Ż = U(t) Z` with the spin field evaluated exactly.
fn oracle_spin_rk4(magnitude: f64, horizon: f64, panels: usize, sub: usize) -> Vec<DMatrix<f64>> {
    let [jx, jy, _] = so3_generators();
    let field = |t: f64| {
        let phi = FRAC_PI_2 * t / horizon;
        (&jx * phi.cos() + &jy * phi.sin()) * magnitude
    };
    let h = horizon / (panels * sub) as f64;
    let mut z = DMatrix::identity(3, 3);
    let mut out = vec![z.clone()];
    for k in 0..panels {
        for j in 0..sub {
            let t = (k * sub + j) as f64 * h;
            let k1 = field(t) * &z;
            let k2 = field(t + 0.5 * h) * (&z + &k1 * (0.5 * h));
            let k3 = field(t + 0.5 * h) * (&z + &k2 * (0.5 * h));
            let k4 = field(t + h) * (&z + &k3 * h);
            z += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
        out.push(z.clone());
    }
    out
}

fn max_dist(a: &[DMatrix<f64>], b: &MatSeries) -> f64 {
    a.iter()
        .enumerate()
        .map(|(k, m)| matrix_norm1(&(m - b.at(k))))
        .fold(0.0, f64::max)
}

fn poly(t: DecoratedTree) -> RationalPolynomial {
    RationalPolynomial::from_tree(t)
}

fn word_tree(s: &str) -> DecoratedTree {
    delta_to_tree(&parse_parenthesis_word(s).unwrap())
}

/// Spin example on `[0, 1]` rotating x to y, scaled so `sup‖U(t)‖₁ · T = 0.5`.
fn spin_example(panels: usize) -> (MatrixSignal, f64) {
    let schedule = AxisSchedule::parse("x-y").unwrap();
    let unit = spin_field(1.0, schedule, 1.0, panels).unwrap();
    let sup = (0..=panels)
        .map(|k| matrix_norm1(&unit.sample(1, k)))
        .fold(0.0, f64::max);
    let magnitude = 0.5 / sup;
    (spin_field(magnitude, schedule, 1.0, panels).unwrap(), magnitude)
}

// ---- criteria ----

fn combinatorics() -> Outcome {
    let start = Instant::now();
    let mut counts = true;
    for n in 0..=12 {
        let got = enumerate_trees(n)?.len() as u128;
        counts &= got == oracle_catalan(n as u128) && catalan(n)? == got;
    }
    let c12 = enumerate_trees(12)?.len();
    let combs = (0..=8).all(|n| {
        let f = oracle_factorial(n);
        tree_factorial(&PlanarTree::left_comb(n)) == f
            && tree_factorial(&PlanarTree::right_comb(n)) == f
            && oracle_gamma(&PlanarTree::left_comb(n)) == f
    });
    let elapsed = start.elapsed();
    Ok((
        counts && combs && c12 == 208012 && elapsed < Duration::from_secs(10),
        format!("counts n = 0..12 match Catalan (C12 = {c12}), comb gamma = n! for n <= 8, {elapsed:.2?}"),
    ))
}

fn algebra() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let alphabet = Alphabet::new(2);
    let mut pr = Products::new();
    let trials = 500;
    let mut ok = 0;
    for _ in 0..trials {
        let pick = |rng: &mut ChaCha8Rng| {
            let n = rng.gen_range(1..=4);
            poly(random_decorated(rng, n, &alphabet))
        };
        let (a, b, c) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
        let ab = pr.shuffle(&a, &b)?;
        let bc = pr.shuffle(&b, &c)?;
        let (ab_prec, ab_succ) = (pr.prec(&a, &b)?, pr.succ(&a, &b)?);
        let (bc_prec, bc_succ) = (pr.prec(&b, &c)?, pr.succ(&b, &c)?);
        let ax_a = pr.prec(&ab_prec, &c)? == pr.prec(&a, &bc)?;
        let ax_b = pr.prec(&ab_succ, &c)? == pr.succ(&a, &bc_prec)?;
        let ax_c = pr.succ(&ab, &c)? == pr.succ(&a, &bc_succ)?;
        let split = &ab_prec + &ab_succ == ab;
        let assoc = pr.shuffle(&ab, &c)? == pr.shuffle(&a, &bc)?;
        ok += usize::from(ax_a && ax_b && ax_c && split && assoc);
    }

    let example = pr.shuffle(&poly(word_tree("x1[x2]")), &poly(word_tree("x3")))?;
    let mut expected = RationalPolynomial::zero();
    for w in ["x1[x2[x3]]", "x1[[x2]x3]", "[x1[x2]]x3"] {
        expected.add_term(word_tree(w), rational(1, 1))?;
    }
    let example_ok = example == expected;

    let x1 = Letter(1);
    let mut char_ok = true;
    for n in 1..=7 {
        let mut sum = RationalPolynomial::zero();
        for s in enumerate_trees(n)? {
            sum.add_term(decorate(&Word::repeat(x1, n), &s)?, rational(1, 1))?;
        }
        char_ok &= pr.shuffle_power(&poly(DecoratedTree::single(x1)), n)? == sum;
    }
    let elapsed = start.elapsed();
    Ok((
        ok == trials && example_ok && char_ok && elapsed < Duration::from_secs(60),
        format!(
            "{ok}/{trials} triples satisfy all five identities, worked shuffle {}, char = shuffle power n <= 7 {}, {elapsed:.2?}",
            if example_ok { "exact" } else { "WRONG" },
            if char_ok { "exact" } else { "WRONG" },
        ),
    ))
}

fn product_theorem() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(31337);
    let alphabet = Alphabet::new(2);
    let cases = 100;
    // 1024, 2048 and 4096 grid nodes.
    let panels = [1023, 2047, 4095];
    let (mut in_band, mut worst_fine, mut worst_oracle) = (0, 0.0f64, 0.0f64);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for _ in 0..cases {
        let (a, b) = loop {
            let n1 = rng.gen_range(1..=4);
            let n2 = rng.gen_range(1..=5 - n1);
            let a = random_decorated(&mut rng, n1, &alphabet);
            let b = random_decorated(&mut rng, n2, &alphabet);
            let controlled = |t: &DecoratedTree| t.foliation().letters().iter().any(|l| l.0 > 0);
            if controlled(&a) || controlled(&b) {
                break (a, b);
            }
        };
        let s = SmoothSignal::random(rng.gen(), 2, 2, 1.0, 1.0);
        let mut res = Vec::new();
        for p in panels {
            res.push(check_product_identity(&a, &b, &s.sample(p)?)?);
        }
        let ratios = [res[0] / res[1], res[1] / res[2]];
        for r in ratios {
            lo = lo.min(r);
            hi = hi.max(r);
        }
        in_band += usize::from(ratios.iter().all(|r| (3.2..=4.8).contains(r)));
        worst_fine = worst_fine.max(res[2]);

        // Independent residual on the finest grid.
        let u = s.sample(panels[2])?;
        let (ea, eb) = (oracle_eval(&a, &u), oracle_eval(&b, &u));
        let sh = Products::new().shuffle(&poly(a.clone()), &poly(b.clone()))?;
        let mut rhs = vec![DMatrix::zeros(2, 2); u.grid().nodes()];
        for (t, c) in sh.iter() {
            let w = dendriform_fliess::dendriform::rational_to_f64(c);
            for (acc, v) in rhs.iter_mut().zip(oracle_eval(t, &u)) {
                *acc += v * w;
            }
        }
        let oracle = (0..u.grid().nodes())
            .map(|k| matrix_norm1(&(&ea[k] * &eb[k] - &rhs[k])))
            .fold(0.0, f64::max);
        worst_oracle = worst_oracle.max((oracle - res[2]).abs());
    }
    let elapsed = start.elapsed();
    Ok((
        in_band == cases && worst_fine <= 1e-5 && worst_oracle <= 1e-10 && elapsed < Duration::from_secs(300),
        format!(
            "{in_band}/{cases} cases with both ratios in [3.2, 4.8] (observed [{lo:.3}, {hi:.3}]), \
             max residual {worst_fine:.3e} at 4096 nodes, oracle agreement {worst_oracle:.1e}, {elapsed:.2?}"
        ),
    ))
}

fn bounds() -> Outcome {
    // Closed form on constant input: E_τ(t) = tⁿ/γ(τ), all nodes, h = 1e-3.
    let one = constant(&[DMatrix::from_element(1, 1, 1.0)], 1.0, 1000)?;
    let mut closed = 0.0f64;
    for n in 0..=4 {
        for t in enumerate_decorated(n, &Alphabet::new(1), usize::MAX)? {
            let values = evaluate_tree(&t, &one)?.values;
            let gamma = oracle_gamma(&t.skeleton()) as f64;
            for k in 0..values.nodes() {
                let expect = one.grid().t(k).powi(n as i32) / gamma;
                closed = closed.max((values.at(k)[(0, 0)] - expect).abs());
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let alphabet = Alphabet::new(2);
    let cases = 200;
    let (mut dominated, mut agree) = (0, 0.0f64);
    for _ in 0..cases {
        let n = rng.gen_range(1..=4);
        let t = random_decorated(&mut rng, n, &alphabet);
        let u = SmoothSignal::random(rng.gen(), 2, 2, 1.0, 1.0).sample(128)?;
        let d = check_ubar_domination(&t, &u)?;
        let (lhs, rhs) = (oracle_eval(&t, &u), oracle_eval(&t, &scalar_signal(&u)));
        let pointwise = lhs
            .iter()
            .zip(&rhs)
            .all(|(a, b)| matrix_norm1(a) <= b[(0, 0)] * (1.0 + 1e-6) + 1e-9);
        let lib = d.lhs <= d.rhs * (1.0 + 1e-6) + 1e-9;
        dominated += usize::from(pointwise && lib);
        let oracle_lhs = lhs.iter().map(matrix_norm1).fold(0.0, f64::max);
        agree = agree
            .max((oracle_lhs - d.lhs).abs())
            .max((rhs.last().unwrap()[(0, 0)] - d.rhs).abs());
    }

    // n!-identity with constant ū: rotation generator, ‖A‖₁ = 1.
    let rot = constant(&[DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])], 1.0, 1000)?;
    let mut factorial_res = 0.0f64;
    for n in 1..=4 {
        factorial_res = factorial_res.max(check_factorial_identity(n, &rot)?);
    }
    Ok((
        closed <= 1e-6 && dominated == cases && agree <= 1e-9 && factorial_res <= 1e-6,
        format!(
            "closed form max error {closed:.3e} (n <= 4, h = 1e-3), domination {dominated}/{cases} \
             (oracle agreement {agree:.1e}), n!-identity residual {factorial_res:.3e}"
        ),
    ))
}

fn certificate() -> Outcome {
    let growth = Growth {
        k: 1.0,
        m: 1.0,
        regime: GrowthRegime::Geometric,
    };
    let radius = certificate_for(growth, 1, 0.25, 8)?.radius;

    // T = 1/4 and ‖u‖ = 1/4 give R = 1/4 and q = M R (m+1) = 1/2.
    let base = SmoothSignal::random(5, 1, 2, 0.25, 1.0).sample(8)?;
    let u = base.scaled(0.25 / signal_norm(&base))?;
    let c = GeneratingSeries::geometric_rule(1, 2, 1.0, 1.0, 11);
    let cert = certificate_for(growth, 1, 0.25f64.max(signal_norm(&u)), 8)?;
    let q = cert.q;
    let terms = fliess_terms_by_order(&c, &u, 9, 9)?;
    let mut ok = true;
    let mut worst = 0.0f64;
    for n in 0..=8 {
        let majorant = growth.k * q.powi(n as i32 + 1);
        let inc = &terms[n + 1];
        for k in 0..inc.nodes() {
            ok &= inc.norm1_at(k) <= majorant;
            worst = worst.max(inc.norm1_at(k) / majorant);
        }
    }
    Ok((
        radius == 0.5 && (q - 0.5).abs() <= 1e-12 && ok,
        format!(
            "radius = {radius}, q = {q:.15}, increments N = 0..8 at all nodes, worst ratio to majorant {worst:.3e}"
        ),
    ))
}

fn dyson() -> Outcome {
    let start = Instant::now();
    let panels = 1000;
    let (u, magnitude) = spin_example(panels);
    let f = evaluate_fliess(&dyson_series(10, 3), &u, 10)?;
    let reference = rk4_reference(&u, 8)?;
    let dev = f.values().max_diff_norm1(&reference)?;
    let exact = oracle_spin_rk4(magnitude, 1.0, panels, 8);
    let oracle_dev = max_dist(&exact, f.values()).max(max_dist(&exact, &reference));
    let elapsed = start.elapsed();
    Ok((
        dev <= 1e-4 && oracle_dev <= 1e-4 && elapsed < Duration::from_secs(60),
        format!("max deviation {dev:.3e} vs RK4, {oracle_dev:.3e} vs analytic-field RK4, {elapsed:.2?}"),
    ))
}

fn magnus() -> Outcome {
    let d = magnus_generating_series(3)?;
    let x1 = poly(DecoratedTree::single(Letter(1)));
    let mut pr = Products::new();
    // a ▷ b = a ≻ b − b ≺ a
    let mut tri = |a: &RationalPolynomial, b: &RationalPolynomial| -> dendriform_fliess::Result<RationalPolynomial> {
        Ok(&pr.succ(a, b)? - &pr.prec(b, a)?)
    };
    let xx = tri(&x1, &x1)?;
    let expected = &(&(&x1 - &(&xx * &rational(1, 2))) + &(&tri(&xx, &x1)? * &rational(1, 4)))
        + &(&tri(&x1, &xx)? * &rational(1, 12));
    let exact = d.d == expected;

    let panels = 1000;
    let (u, magnitude) = spin_example(panels);
    let reference = oracle_spin_rk4(magnitude, 1.0, panels, 8);
    let lib_reference = rk4_reference(&u, 8)?.last();
    let mut errors = Vec::new();
    let mut lib_errors = Vec::new();
    let mut orth = 0.0;
    for n in 1..=4 {
        let z = magnus_evaluate(&magnus_generating_series(n)?, &u)?.z.last();
        errors.push(matrix_norm1(&(&z - reference.last().unwrap())));
        lib_errors.push(matrix_norm1(&(&z - &lib_reference)));
        if n == 4 {
            orth = (z.transpose() * &z - DMatrix::identity(3, 3)).amax();
        }
    }
    let decreasing = |e: &[f64]| e.windows(2).all(|w| w[1] < w[0]);
    let fmt = |e: &[f64]| e.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(", ");
    Ok((
        exact
            && decreasing(&errors)
            && decreasing(&lib_errors)
            && errors[3] <= 1e-4
            && lib_errors[3] <= 1e-4
            && orth <= 1e-6,
        format!(
            "order-3 series {}, errors N = 1..4: {} (library RK4: {}), orthogonality {orth:.1e}",
            if exact { "exact" } else { "WRONG" },
            fmt(&errors),
            fmt(&lib_errors)
        ),
    ))
}

fn random_finite_series(rng: &mut ChaCha8Rng, alphabet: &Alphabet) -> dendriform_fliess::Result<GeneratingSeries> {
    let mut terms = BTreeMap::new();
    terms.insert(
        DecoratedTree::leaf(),
        DMatrix::identity(2, 2) * rng.gen_range(-1.0..1.0),
    );
    loop {
        let n = rng.gen_range(1..=2);
        let t = random_decorated(rng, n, alphabet);
        if t.foliation().letters().iter().any(|l| l.0 > 0) {
            terms.insert(t, DMatrix::identity(2, 2) * rng.gen_range(0.5..1.5));
            break;
        }
    }
    let n = rng.gen_range(1..=2);
    terms.insert(
        random_decorated(rng, n, alphabet),
        DMatrix::identity(2, 2) * rng.gen_range(-1.0..1.0),
    );
    GeneratingSeries::finite(2, (2, 2), terms, SupportClass::Finite)
}

fn product_connection_rate() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let alphabet = Alphabet::new(2);
    let cases = 20;
    let panels = [128, 256, 512];
    let (mut in_band, mut lo, mut hi, mut agree) = (0, f64::INFINITY, 0.0f64, 0.0f64);
    for _ in 0..cases {
        let c = random_finite_series(&mut rng, &alphabet)?;
        let d = random_finite_series(&mut rng, &alphabet)?;
        let cd = product_connection(&c, &d)?;
        let s = SmoothSignal::random(rng.gen(), 2, 2, 1.0, 1.0);
        let mut res = Vec::new();
        for p in panels {
            let u = s.sample(p)?;
            let fc = evaluate_fliess(&c, &u, 2)?;
            let fd = evaluate_fliess(&d, &u, 2)?;
            let fcd = evaluate_fliess(&cd, &u, 4)?;
            res.push(fc.values().mul_pointwise(fd.values())?.max_diff_norm1(fcd.values())?);
            if p == panels[2] {
                let mut oracle = vec![DMatrix::zeros(2, 2); u.grid().nodes()];
                for (t, a) in c.terms().unwrap() {
                    for (acc, v) in oracle.iter_mut().zip(oracle_eval(t, &u)) {
                        *acc += a * v;
                    }
                }
                agree = agree.max(max_dist(&oracle, fc.values()));
            }
        }
        let ratios = [res[0] / res[1], res[1] / res[2]];
        for r in ratios {
            lo = lo.min(r);
            hi = hi.max(r);
        }
        in_band += usize::from(ratios.iter().all(|r| (3.2..=4.8).contains(r)));
    }
    Ok((
        in_band == cases && agree <= 1e-10,
        format!("{in_band}/{cases} cases with both halving ratios in [3.2, 4.8] (observed [{lo:.3}, {hi:.3}]), oracle agreement {agree:.1e}"),
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("combinatorics", combinatorics),
        ("dendriform algebra", algebra),
        ("product theorem", product_theorem),
        ("integral bounds", bounds),
        ("convergence certificate", certificate),
        ("Dyson series vs ODE", dyson),
        ("Magnus recursion", magnus),
        ("product connection", product_connection_rate),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (passed, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!passed);
        println!(
            "{} criterion {}: {name}: {detail}",
            if passed { "PASS" } else { "FAIL" },
            i + 1
        );
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
