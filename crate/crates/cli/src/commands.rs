use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use dendriform_fliess::dendriform::polynomial::matrix_to_json;
use dendriform_fliess::dendriform::{
    char_trees, parse_dendriform_expr, rational, PreLieOrientation, Products, RationalPolynomial,
};
use dendriform_fliess::iterated_integrals::{evaluate_polynomial, EvaluationResult, MatSeries};
use dendriform_fliess::operators::{
    convergence_certificate, dyson_series, evaluate_fliess, magnus_evaluate, magnus_generating_series_with,
    rk4_reference, GeneratingSeries,
};
use dendriform_fliess::signals::{matrix_norm1, MatrixSignal, SignalSpec};
use dendriform_fliess::tree::{decorate, enumerate_trees, tree_factorial, Alphabet, DecoratedTree, Word};
use dendriform_fliess::verify::{run_all, run_suite, Suite};
use dendriform_fliess::{Error, Result};
use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::args::{AlgebraCmd, Cli, Command, EvalCmd, FliessCmd, MagnusArgs, Operands, SignalArgs, TreesCmd};

pub struct Outcome {
    pub stdout: String,
    /// `false` maps to exit status 1 with the output still printed.
    pub success: bool,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, success: true }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let json = cli.json;
    match &cli.command {
        Command::Trees(TreesCmd::Enum { order, decorate }) => trees_enum(*order, decorate.as_deref(), json),
        Command::Algebra(cmd) => algebra(cmd, json),
        Command::Eval(EvalCmd::Tree { expr, signal }) => eval_tree(expr, signal, json),
        Command::Fliess(FliessCmd::Eval {
            series,
            signal,
            order,
            certificate,
        }) => fliess_eval(series, signal, *order, *certificate, json),
        Command::Magnus(args) => magnus(args, json),
        Command::Verify(args) => verify(&args.suite, args.seed, json),
    }
}

fn json_line(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn gamma_json(g: u128) -> Value {
    match u64::try_from(g) {
        Ok(g) => json!(g),
        Err(_) => json!(g.to_string()),
    }
}

fn matrix_lines(out: &mut String, a: &DMatrix<f64>) {
    for r in 0..a.nrows() {
        let row: Vec<String> = (0..a.ncols()).map(|c| format!("{:>22.15e}", a[(r, c)])).collect();
        let _ = writeln!(out, "  {}", row.join(" "));
    }
}

fn trees_enum(order: usize, word: Option<&str>, json: bool) -> Result<Outcome> {
    let skeletons = enumerate_trees(order)?;
    let word = word.map(Word::parse).transpose()?;
    if let Some(w) = &word {
        if w.len() != order {
            return Err(Error::Precondition(format!(
                "decoration `{w}` has {} letters, trees of order {order} need {order}",
                w.len()
            )));
        }
    }
    let mut out = String::new();
    let mut items = Vec::new();
    for s in &skeletons {
        let gamma = tree_factorial(s);
        match &word {
            None => {
                if json {
                    items.push(json!({"skeleton": s.to_string(), "gamma": gamma_json(gamma)}));
                } else {
                    let _ = writeln!(out, "{s}\tgamma={gamma}");
                }
            }
            Some(w) => {
                let t = decorate(w, s)?;
                if json {
                    items.push(json!({
                        "skeleton": s.to_string(),
                        "gamma": gamma_json(gamma),
                        "tree": t.to_string(),
                        "parenthesis": t.to_parenthesis_word(),
                        "structure": t.to_json(),
                    }));
                } else {
                    let _ = writeln!(out, "{t}\t{}\tgamma={gamma}", t.to_parenthesis_word());
                }
            }
        }
    }
    if json {
        out = json_line(&json!({
            "order": order,
            "count": skeletons.len(),
            "decoration": word.map(|w| w.to_string()),
            "trees": items,
        }));
    }
    Ok(Outcome::ok(out))
}

fn orientation(name: &str) -> PreLieOrientation {
    PreLieOrientation::parse(name).expect("clap restricts orientation names")
}

fn polynomial_output(op: &str, p: &RationalPolynomial, json: bool) -> String {
    if json {
        json_line(&json!({
            "op": op,
            "count": p.len(),
            "result": p.to_string(),
            "terms": p.to_json(),
        }))
    } else {
        format!("{p}\n")
    }
}

fn algebra(cmd: &AlgebraCmd, json: bool) -> Result<Outcome> {
    let mut products = Products::new();
    let parse = |o: &Operands| -> Result<(RationalPolynomial, RationalPolynomial)> {
        let alphabet = Alphabet::new(o.letters);
        Ok((
            parse_dendriform_expr(&o.left, &alphabet)?,
            parse_dendriform_expr(&o.right, &alphabet)?,
        ))
    };
    let (op, p) = match cmd {
        AlgebraCmd::Shuffle(o) => {
            let (a, b) = parse(o)?;
            ("shuffle", products.shuffle(&a, &b)?)
        }
        AlgebraCmd::Prec(o) => {
            let (a, b) = parse(o)?;
            ("prec", products.prec(&a, &b)?)
        }
        AlgebraCmd::Succ(o) => {
            let (a, b) = parse(o)?;
            ("succ", products.succ(&a, &b)?)
        }
        AlgebraCmd::Prelie {
            operands,
            orientation: name,
        } => {
            let (a, b) = parse(operands)?;
            ("prelie", products.pre_lie(orientation(name), &a, &b)?)
        }
        AlgebraCmd::Char { order, letter } => {
            let w = Word::parse(letter)?;
            let [x] = w.letters() else {
                return Err(Error::Precondition(format!("`{letter}` is not a single letter")));
            };
            ("char", char_trees(*order, *x)?)
        }
    };
    Ok(Outcome::ok(polynomial_output(op, &p, json)))
}

fn build_signal(args: &SignalArgs) -> Result<MatrixSignal> {
    if !(args.horizon.is_finite() && args.horizon > 0.0) {
        return Err(Error::Precondition(format!(
            "horizon must be positive, got {}",
            args.horizon
        )));
    }
    SignalSpec::parse(&args.signal)?.build(args.horizon, args.grid)
}

fn io_error(e: std::io::Error, path: &str) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{path}: {e}")))
}

fn write_trajectory(path: &Path, result: &EvaluationResult) -> Result<()> {
    let file = File::create(path).map_err(|e| io_error(e, &path.display().to_string()))?;
    result.write_csv(BufWriter::new(file))
}

fn grid_summary(out: &mut String, u: &MatrixSignal) {
    let g = u.grid();
    let _ = writeln!(
        out,
        "grid: {} panels on [0, {}], h = {}, m = {}, dim = {}",
        g.panels(),
        g.horizon(),
        g.h(),
        u.m(),
        u.dim()
    );
}

fn grid_json(u: &MatrixSignal) -> Value {
    let g = u.grid();
    json!({"panels": g.panels(), "horizon": g.horizon(), "h": g.h(), "m": u.m(), "dim": u.dim()})
}

fn eval_tree(expr: &str, args: &SignalArgs, json: bool) -> Result<Outcome> {
    let u = build_signal(args)?;
    let p = parse_dendriform_expr(expr, &u.alphabet())?;
    let mut result = evaluate_polynomial(&p, &u)?;
    if p.len() == 1 {
        let (t, c) = p.iter().next().unwrap();
        if *c == rational(1, 1) {
            result.tree = Some(t.clone());
        }
    }
    if let Some(path) = &args.out {
        write_trajectory(path, &result)?;
    }
    let last = result.final_value();
    let mut out = String::new();
    if json {
        out = json_line(&json!({
            "expr": p.to_string(),
            "tree": result.tree.as_ref().map(DecoratedTree::to_json),
            "grid": grid_json(&u),
            "scheme_order": result.scheme_order,
            "final": matrix_to_json(&last),
            "final_norm1": matrix_norm1(&last),
            "max_norm1": result.values.max_norm1(),
            "out": args.out.as_ref().map(|p| p.display().to_string()),
        }));
    } else {
        let _ = writeln!(out, "expr: {p}");
        grid_summary(&mut out, &u);
        let _ = writeln!(out, "value at T (norm1 = {:e}):", matrix_norm1(&last));
        matrix_lines(&mut out, &last);
    }
    Ok(Outcome::ok(out))
}

fn load_series(spec: &str, dim: usize, order: usize) -> Result<GeneratingSeries> {
    if let Some(n) = spec.strip_prefix("dyson:") {
        let n: usize = n
            .trim()
            .parse()
            .map_err(|_| Error::Precondition(format!("`{spec}`: expected dyson:<order>")))?;
        return Ok(dyson_series(n, dim));
    }
    let text = std::fs::read_to_string(spec).map_err(|e| io_error(e, spec))?;
    let value: Value = serde_json::from_str(&text)?;
    GeneratingSeries::from_json(&value, dim, order)
}

fn fliess_eval(spec: &str, args: &SignalArgs, order: usize, certificate: bool, json: bool) -> Result<Outcome> {
    let u = build_signal(args)?;
    let c = load_series(spec, u.dim(), order)?;
    let f = evaluate_fliess(&c, &u, order)?;
    if let Some(path) = &args.out {
        write_trajectory(path, &f.result)?;
    }
    // Factorial series carry no certified radius; that is reported, not fatal.
    let cert = certificate.then(|| convergence_certificate(&c, &u, order));
    let last = f.result.final_value();
    let mut out = String::new();
    if json {
        let cert_json = match &cert {
            None => Value::Null,
            Some(Ok(cert)) => cert.to_json(),
            Some(Err(e)) => json!({"available": false, "reason": e.to_string()}),
        };
        out = json_line(&json!({
            "series": spec,
            "support": c.support_class().name(),
            "grid": grid_json(&u),
            "order": f.order,
            "order_norms": f.order_norms,
            "tail_bound": f.tail_bound,
            "final": matrix_to_json(&last),
            "certificate": cert_json,
            "out": args.out.as_ref().map(|p| p.display().to_string()),
        }));
    } else {
        let _ = writeln!(out, "series: {spec} (support {})", c.support_class().name());
        grid_summary(&mut out, &u);
        let _ = writeln!(out, "order  max norm1 of order-k term");
        for (k, n) in f.order_norms.iter().enumerate() {
            let _ = writeln!(out, "{k:>5}  {n:e}");
        }
        let _ = writeln!(out, "F_c[u](T):");
        matrix_lines(&mut out, &last);
        match &cert {
            None => {}
            Some(Ok(cert)) => {
                let _ = writeln!(
                    out,
                    "certificate: K = {}, M = {}, m = {}, R = {}, radius = {}, q = {}",
                    cert.k, cert.m_growth, cert.m, cert.r, cert.radius, cert.q
                );
                match (cert.tail, &cert.diagnostic) {
                    (Some(t), _) => {
                        let _ = writeln!(out, "tail bound after order {}: {t:e}", cert.order);
                    }
                    (None, Some(d)) => {
                        let _ = writeln!(out, "no tail bound: {d}");
                    }
                    (None, None) => {}
                }
            }
            Some(Err(e)) => {
                let _ = writeln!(out, "certificate: unavailable ({e})");
            }
        }
    }
    Ok(Outcome::ok(out))
}

fn orthogonality_defect(z: &DMatrix<f64>) -> f64 {
    let n = z.nrows();
    matrix_norm1(&(z.transpose() * z - DMatrix::identity(n, n)))
}

fn magnus(args: &MagnusArgs, json: bool) -> Result<Outcome> {
    let u = build_signal(&args.signal)?;
    let series = magnus_generating_series_with(args.order, orientation(&args.orientation))?;
    let m = magnus_evaluate(&series, &u)?;
    if let Some(path) = &args.signal.out {
        write_trajectory(path, &m.omega)?;
    }
    let omega = m.omega.final_value();
    let z = m.z.last();
    let rk4 = if args.compare_rk4 {
        let reference: MatSeries = rk4_reference(&u, args.refine)?;
        Some(matrix_norm1(&(&z - reference.last())))
    } else {
        None
    };
    let defect = orthogonality_defect(&z);
    let mut out = String::new();
    if json {
        out = json_line(&json!({
            "order": series.order,
            "orientation": series.orientation.name(),
            "iterations": series.iterations,
            "stable_from": series.stable_from,
            "series": series.d.to_string(),
            "grid": grid_json(&u),
            "omega": matrix_to_json(&omega),
            "exp_omega": matrix_to_json(&z),
            "orthogonality_defect": defect,
            "rk4_refine": args.compare_rk4.then_some(args.refine),
            "rk4_error": rk4,
            "out": args.signal.out.as_ref().map(|p| p.display().to_string()),
        }));
    } else {
        let _ = writeln!(
            out,
            "d (order {}, {}, stationary after {} iterations):",
            series.order,
            series.orientation.name(),
            series.iterations
        );
        let _ = writeln!(out, "  {}", series.d);
        grid_summary(&mut out, &u);
        let _ = writeln!(out, "Omega(T):");
        matrix_lines(&mut out, &omega);
        let _ = writeln!(out, "exp(Omega(T)):");
        matrix_lines(&mut out, &z);
        let _ = writeln!(out, "orthogonality defect: {defect:e}");
        if let Some(e) = rk4 {
            let _ = writeln!(out, "norm1 distance to RK4 (refine {}): {e:e}", args.refine);
        }
    }
    Ok(Outcome::ok(out))
}

fn verify(name: &str, seed: u64, json: bool) -> Result<Outcome> {
    let checks = match name {
        "all" => run_all(seed)?,
        s => run_suite(Suite::parse(s).expect("clap restricts suite names"), seed)?,
    };
    let passed = checks.iter().filter(|c| c.passed).count();
    let success = passed == checks.len();
    let mut out = String::new();
    if json {
        out = json_line(&json!({
            "suite": name,
            "seed": seed,
            "passed": success,
            "checks": checks.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
        }));
    } else {
        for c in &checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{tag} {} {}: {}", c.suite, c.name, c.detail);
        }
        let _ = writeln!(out, "{passed}/{} checks passed", checks.len());
    }
    Ok(Outcome { stdout: out, success })
}
