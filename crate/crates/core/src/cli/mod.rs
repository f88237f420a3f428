//! Command-line front end. Results are computed in full before anything is
//! written, so a failing run leaves no output file behind.

mod args;
mod output;

use args::{AnalysisCmd, Basis, CombinatCmd, Format, Group, LayerArg, Method, QArgs, RiordanCmd, RouteArg, ShefferCmd, ZerosCmd};
use clap::Parser;
use output::{to_value, Output, Table};
use rayon::prelude::*;
use riordan_critline::analysis::{
    boundary_layer_approx, contour_integral, pick_sign, reconstruct_h, saddle_approx, smallt_approx, Branch, ContourOptions, CriticalData, Gates, Layer, Route,
};
use riordan_critline::combinat::{lattice_sigma, tree_levels, vector_recurrence};
use riordan_critline::fmt::{self, complex, rational};
use riordan_critline::sheffer::{c_matrix, h_polys, lq_decomposition, QuadraticQ};
use riordan_critline::zeros::{critical_line_report, empirical_threshold, line_zero_count, open_grid, RootClass, ROOT_PRECISION};
use riordan_critline::{Error, Result, DEFAULT_PRECISION};
use rug::{Complex, Float, Rational};
use serde_json::json;

pub fn main() -> i32 {
    let cli = args::Cli::parse();
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run(cli: &args::Cli) -> Result<()> {
    if cli.jobs == 0 {
        return Err(Error::Invalid("--jobs must be at least 1".into()));
    }
    if let Some(p) = cli.precision {
        if p < 64 {
            return Err(Error::Invalid(format!("precision must be at least 64 bits, got {p}")));
        }
    }
    let format = cli.format.unwrap_or(default_format(&cli.command));
    if format == Format::Csv && !has_csv(&cli.command) {
        return Err(Error::Invalid("this command has no CSV form".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build().map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    let out = pool.install(|| dispatch(cli))?;
    let text = output::render(cli, format, &out)?;
    match &cli.output {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Invalid(format!("cannot write {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            match std::io::stdout().lock().write_all(text.as_bytes()) {
                // a closed pipe (e.g. `| head`) is not an error of ours
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::Invalid(format!("cannot write output: {e}"))),
                _ => Ok(()),
            }
        }
    }
}

fn default_format(g: &Group) -> Format {
    match g {
        Group::Analysis(AnalysisCmd::Curves { .. }) => Format::Csv,
        _ => Format::Json,
    }
}

fn has_csv(g: &Group) -> bool {
    !matches!(g, Group::Analysis(AnalysisCmd::Compare { .. }) | Group::Zeros(ZerosCmd::Count { .. }) | Group::Zeros(ZerosCmd::Verify { nmax: Some(_), .. }))
}

fn precision(cli: &args::Cli, default: u32) -> u32 {
    cli.precision.unwrap_or(default)
}

fn parse_rational(s: &str, flag: &str) -> Result<Rational> {
    s.trim().parse::<Rational>().map_err(|_| Error::Invalid(format!("--{flag}: expected a rational like 3 or 3/2, got {s:?}")))
}

fn quadratic(q: &QArgs) -> Result<QuadraticQ> {
    match (&q.a, &q.b, &q.z1, &q.z2) {
        (Some(a), Some(b), None, None) => QuadraticQ::ab_rational(parse_rational(a, "a")?, parse_rational(b, "b")?),
        (None, None, Some(z1), Some(z2)) => QuadraticQ::roots(parse_rational(z1, "z1")?, parse_rational(z2, "z2")?),
        _ => Err(Error::Invalid("supply exactly one Q form: --a and --b, or --z1 and --z2".into())),
    }
}

fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(rational).collect()
}

fn dispatch(cli: &args::Cli) -> Result<Output> {
    match &cli.command {
        Group::Sheffer(ShefferCmd::Coeffs { q, nmax, basis }) => sheffer_coeffs(&quadratic(q)?, *nmax, *basis),
        Group::Riordan(RiordanCmd::Production { q, size }) => riordan_production(&quadratic(q)?, *size),
        Group::Combinat(CombinatCmd::Tree { q, depth }) => combinat_tree(&quadratic(q)?, *depth),
        Group::Combinat(CombinatCmd::Paths { q, nmax }) => combinat_paths(&quadratic(q)?, *nmax),
        Group::Analysis(AnalysisCmd::Curves { z1, z2, samples }) => {
            curves(&parse_rational(z1, "z1")?, &parse_rational(z2, "z2")?, *samples, precision(cli, DEFAULT_PRECISION))
        }
        Group::Analysis(cmd @ AnalysisCmd::Compare { .. }) => compare(cmd, precision(cli, DEFAULT_PRECISION)),
        Group::Zeros(ZerosCmd::Verify { q, n, nmax, tol }) => verify(&quadratic(q)?, *n, *nmax, *tol, precision(cli, ROOT_PRECISION)),
        Group::Zeros(ZerosCmd::Count { q, n, samples }) => count(&quadratic(q)?, *n, *samples, precision(cli, ROOT_PRECISION)),
    }
}

fn sheffer_coeffs(q: &QuadraticQ, nmax: usize, basis: Basis) -> Result<Output> {
    let polys = h_polys(q, nmax)?;
    let mut rows = vec![];
    let mut list = vec![];
    for (n, p) in polys.iter().enumerate() {
        let coeffs = match basis {
            Basis::Power => p.coeffs().to_vec(),
            Basis::Falling => p.to_falling(),
        };
        for (k, c) in coeffs.iter().enumerate() {
            rows.push(vec![n.to_string(), k.to_string(), rational(c)]);
        }
        list.push(json!({ "n": n, "coeffs": strings(&coeffs) }));
    }
    Ok(Output {
        json: json!({ "q": to_value(q)?, "nmax": nmax, "basis": basis, "polynomials": list }),
        table: Some(Table { columns: vec!["n", "k", "coeff"], rows }),
    })
}

fn riordan_production(q: &QuadraticQ, size: usize) -> Result<Output> {
    if size == 0 {
        return Err(Error::Invalid("--size must be at least 1".into()));
    }
    let (lq, _) = lq_decomposition(q, size)?;
    let p = lq.horizontal_pair()?;
    let mut rows = vec![];
    for (i, row) in p.entries.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            rows.push(vec![i.to_string(), j.to_string(), rational(v)]);
        }
    }
    let entries: Vec<Vec<String>> = p.entries.iter().map(|r| strings(r)).collect();
    Ok(Output {
        json: json!({
            "q": to_value(q)?,
            "size": p.size(),
            "entries": entries,
            "c": strings(&p.c),
            "r": strings(&p.r),
            "integral": p.is_integral(),
            "stieltjes_holds": lq.stieltjes_holds(&p),
        }),
        table: Some(Table { columns: vec!["i", "j", "p"], rows }),
    })
}

fn combinat_tree(q: &QuadraticQ, depth: usize) -> Result<Output> {
    let (lq, _) = lq_decomposition(q, depth + 1)?;
    let p = lq.horizontal_pair()?;
    let levels = tree_levels(&p, depth)?;
    let rec = vector_recurrence(&p, depth);
    let mut agree = true;
    let mut rows = vec![];
    let mut list = vec![];
    for lv in &levels {
        let net: Vec<i128> = (0..=lv.level).map(|k| lv.net(k)).collect();
        let want = &rec[lv.level];
        for (k, v) in net.iter().enumerate() {
            agree &= Rational::from(*v) == want[k];
            rows.push(vec![
                lv.level.to_string(),
                k.to_string(),
                lv.unmarked.get(&k).copied().unwrap_or(0).to_string(),
                lv.marked.get(&k).copied().unwrap_or(0).to_string(),
                v.to_string(),
                rational(&want[k]),
            ]);
        }
        list.push(json!({
            "level": lv.level,
            "unmarked": lv.unmarked,
            "marked": lv.marked,
            "net": net.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "recurrence": strings(want),
        }));
    }
    Ok(Output {
        json: json!({ "q": to_value(q)?, "depth": depth, "levels": list, "agree": agree }),
        table: Some(Table { columns: vec!["level", "label", "unmarked", "marked", "net", "recurrence"], rows }),
    })
}

fn combinat_paths(q: &QuadraticQ, nmax: usize) -> Result<Output> {
    let t = lattice_sigma(q, nmax)?;
    let c = c_matrix(q, nmax)?;
    let matches = t.sigma.iter().zip(c.entries()).all(|(a, b)| a == b);
    let mut rows = vec![];
    for (n, row) in t.sigma.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            rows.push(vec![n.to_string(), k.to_string(), rational(v)]);
        }
    }
    Ok(Output {
        json: json!({ "q": to_value(q)?, "nmax": nmax, "sigma": to_value(&t)?["sigma"], "matches_falling_factorial": matches }),
        table: Some(Table { columns: vec!["n", "k", "sigma"], rows }),
    })
}

fn curves(z1: &Rational, z2: &Rational, samples: usize, prec: u32) -> Result<Output> {
    if samples < 2 {
        return Err(Error::Invalid("--samples must be at least 2".into()));
    }
    let cd = CriticalData::new(z1, z2, prec)?;
    let ts: Vec<Float> = (0..samples).map(|k| Float::with_val(prec, &cd.t * k as u32) / (samples - 1) as u32).collect();
    let rows: Vec<[Complex; 3]> = ts
        .par_iter()
        .map(|t| {
            let a = cd.zeta_at(t, Branch::One);
            let b = cd.zeta_at(t, Branch::Two);
            // the t·(log terms) part vanishes at t = 0 while the logs are singular at z1
            let phi = if t.is_zero() { Complex::with_val(prec, a.ln_ref()) } else { cd.phi_c(&a, &Complex::with_val(prec, (t, 0))) };
            [a, b, phi]
        })
        .collect();
    let mut table = vec![];
    let mut list = vec![];
    for (t, [a, b, phi]) in ts.iter().zip(&rows) {
        table.push(vec![
            fmt::float(t),
            fmt::float(a.real()),
            fmt::float(a.imag()),
            fmt::float(b.real()),
            fmt::float(b.imag()),
            fmt::float(phi.real()),
            fmt::float(phi.imag()),
        ]);
        list.push(json!({ "t": fmt::float(t), "zeta1": complex(a), "zeta2": complex(b), "phi": complex(phi) }));
    }
    Ok(Output {
        json: json!({
            "z1": rational(z1),
            "z2": rational(z2),
            "regime": cd.regime,
            "t_end": fmt::float(&cd.t),
            "rows": list,
        }),
        table: Some(Table { columns: vec!["t", "re_zeta1", "im_zeta1", "re_zeta2", "im_zeta2", "re_phi", "im_phi"], rows: table }),
    })
}

fn compare(cmd: &AnalysisCmd, prec: u32) -> Result<Output> {
    let AnalysisCmd::Compare { z1, z2, n, t, method, layer, route, tol, max_precision, gate_saddle, gate_smallt, gate_layer_lower, gate_layer_upper } = cmd
    else {
        unreachable!()
    };
    let cd = CriticalData::new(&parse_rational(z1, "z1")?, &parse_rational(z2, "z2")?, prec)?;
    let gates = Gates { saddle: *gate_saddle, smallt: *gate_smallt, layer_lower: *gate_layer_lower, layer_upper: *gate_layer_upper };
    let route = match route {
        RouteArg::Auto => Route::Auto,
        RouteArg::RealAxis => Route::RealAxis,
        RouteArg::Steepest => Route::Steepest,
    };
    if *max_precision < prec {
        return Err(Error::Invalid(format!("--max-precision {max_precision} is below the working precision {prec}")));
    }
    let opts = ContourOptions { prec, tol: *tol, route, max_prec: *max_precision };
    // the approximant goes first: its window check is cheap and fails fast
    let mut extra = serde_json::Map::new();
    let approx = match method {
        Method::Saddle => {
            let a = saddle_approx(&cd, *n, *t, &gates)?;
            extra.insert("gate_value".into(), json!(a.gate_value));
            extra.insert("saddle".into(), json!(complex(&a.zeta)));
            Approx::Saddle(a)
        }
        Method::Layer => {
            let which = match layer {
                LayerArg::AtT => Layer::AtT,
                LayerArg::AtT1Minus => Layer::AtT1Minus,
                LayerArg::AtT1Plus => Layer::AtT1Plus,
            };
            let l = boundary_layer_approx(&cd, *n, *t, which, &gates)?;
            extra.insert("layer".into(), to_value(&l.layer)?);
            extra.insert("layer_constant".into(), json!(complex(&l.constant)));
            extra.insert("y_range".into(), json!([l.y_range.0, l.y_range.1]));
            extra.insert("oriented".into(), json!(l.oriented));
            Approx::Plain(l.value)
        }
        Method::Smallt => Approx::Plain(smallt_approx(&cd, *n, *t, &gates)?),
    };
    let c = contour_integral(&cd, *n, *t, &opts)?;
    let p = c.integral.prec().0;
    let value = match approx {
        Approx::Saddle(a) => {
            let (sign, _) = pick_sign(&c.integral, &a);
            let sq = Complex::with_val(p, c.integral.square_ref()) / &a.squared;
            extra.insert("sign".into(), json!(sign));
            extra.insert("squared_ratio".into(), json!(complex(&sq)));
            if sign > 0 {
                a.plus
            } else {
                a.minus
            }
        }
        Approx::Plain(v) => v,
    };
    let ratio = Complex::with_val(p, &c.integral / &value);
    let mut obj = serde_json::Map::new();
    obj.insert("method".into(), to_value(method)?);
    obj.insert("z1".into(), json!(rational(cd.roots().0)));
    obj.insert("z2".into(), json!(rational(cd.roots().1)));
    obj.insert("n".into(), json!(n));
    obj.insert("t".into(), json!(t));
    obj.insert("route".into(), to_value(&c.route)?);
    obj.insert("working_precision".into(), json!(c.prec));
    obj.insert("contour".into(), json!(complex(&c.integral)));
    obj.insert("est_error".into(), json!(fmt::float(&c.est_error)));
    obj.insert("h_on_line".into(), json!(complex(&reconstruct_h(*n, &c.integral))));
    obj.insert("approximant".into(), json!(complex(&value)));
    obj.insert("ratio".into(), json!(complex(&ratio)));
    obj.extend(extra);
    Ok(Output { json: serde_json::Value::Object(obj), table: None })
}

enum Approx {
    Saddle(riordan_critline::analysis::SaddleApprox),
    Plain(Complex),
}

fn verify(q: &QuadraticQ, n: usize, nmax: Option<usize>, tol: f64, prec: u32) -> Result<Output> {
    if let Some(m) = nmax {
        let rep = empirical_threshold(q, n..=m, tol, prec)?;
        return Ok(Output { json: to_value(&rep)?, table: None });
    }
    let rep = critical_line_report(q, n, tol, prec)?;
    let rows = rep
        .roots
        .iter()
        .map(|r| {
            let (kind, distance) = match &r.class {
                RootClass::TrivialZero { at } => {
                    (format!("trivial_{}", to_value(at).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()), String::new())
                }
                RootClass::OnLine { distance } => ("on_line".to_string(), distance.to_string()),
                RootClass::OffLine { distance } => ("off_line".to_string(), distance.to_string()),
            };
            vec![fmt::float(r.value.real()), fmt::float(r.value.imag()), r.t.to_string(), r.residual.to_string(), kind, distance]
        })
        .collect();
    Ok(Output { json: to_value(&rep)?, table: Some(Table { columns: vec!["re", "im", "t", "residual", "kind", "distance"], rows }) })
}

fn count(q: &QuadraticQ, n: usize, samples: usize, prec: u32) -> Result<Output> {
    if samples < 2 {
        return Err(Error::Invalid("--samples must be at least 2".into()));
    }
    let t_end = CriticalData::from_q(q, 64)?.t_end();
    let c = line_zero_count(q, n, &open_grid(t_end, samples), prec)?;
    let mut v = to_value(&c)?;
    v["q"] = to_value(q)?;
    Ok(Output { json: v, table: None })
}
