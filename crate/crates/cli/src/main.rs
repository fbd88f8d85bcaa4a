use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sigma_toda::acceptance::{run_all, run_criterion};
use sigma_toda::addition::{
    baker_check, cor_add_check, deg1_check, deg2_f_check, fay_check, fs_check, thm_add_check,
};
use sigma_toda::division::{cantor_alpha, expected_degree, lattice_residual, torsion_to_frame, xi_set};
use sigma_toda::io::{parse_conic, parse_curve, parse_points, parse_state};
use sigma_toda::linalg::CMatrix;
use sigma_toda::periods::periods;
use sigma_toda::poncelet::Poncelet;
use sigma_toda::sigma::SigmaContext;
use sigma_toda::toda::{char_poly, invariant_drift, spectral_morphism, state_from_frame, TodaFrame};
use sigma_toda::{Error, HyperellipticCurve, C64};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "sigma-toda", version, about = "Hyperelliptic sigma functions and Toda lattice solutions")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Curve file: {"genus": g, "lambda": [[re, im], ...]}
    #[arg(long, global = true)]
    curve: Option<PathBuf>,
    /// Residual tolerance for pass/fail decisions
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 50)]
    samples: usize,
    #[arg(long, global = true, default_value_t = 20240901)]
    seed: u64,
    /// Write output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Half-period matrices, Riemann matrix and Legendre residual
    Periods,
    /// sigma, zeta_i and wp_ij at u
    Sigma {
        /// Coordinates of u as re,im; repeat once per component
        #[arg(long = "u", value_parser = parse_complex, allow_hyphen_values = true)]
        u: Vec<C64>,
    },
    /// Abel image of a point list {"points": [{"x": [re, im], "y": [re, im]}]}
    Abel {
        #[arg(long)]
        points: PathBuf,
    },
    /// Residual table of the addition formulae over random samples
    VerifyAddition,
    /// alpha_n coefficients and degree certificate
    Division {
        #[arg(long)]
        n: usize,
    },
    /// Points of Xi_2N with lattice certificates for N c
    Torsion {
        #[arg(long = "N")]
        n: usize,
    },
    /// Flaschka variables a_k, b_k of the frame with base point over x
    TodaRun {
        /// Abscissa of the base point, re,im
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        base_x: C64,
        /// -1 selects the other sheet
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        sheet: i8,
        #[arg(long = "N")]
        n: usize,
        /// Times as start:stop:count
        #[arg(long, default_value = "0:0.1:11")]
        t_grid: String,
        /// Offset of the frame, re,im per component
        #[arg(long = "t-perp", value_parser = parse_complex, allow_hyphen_values = true)]
        t_perp: Vec<C64>,
    },
    /// Characteristic polynomial, invariants and branch points of a Toda state
    Spectral {
        #[arg(long)]
        state: PathBuf,
    },
    /// Poncelet polygons for a conic matrix file {"a": [[re, im]; 9]}
    Poncelet {
        #[arg(long)]
        conic: PathBuf,
        #[arg(long = "N")]
        n: usize,
        /// Comma-separated real start parameters
        #[arg(long, default_value = "0.13,0.37,0.61,0.89,1.17", value_delimiter = ',')]
        t: Vec<f64>,
    },
    /// The full acceptance suite, one line per criterion
    VerifyAll {
        /// Run only these criteria (1..=7); criterion 8 needs the full run
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

/// Failure classes mapped to exit codes 1 and 2.
enum Failure {
    Input(String),
    Criterion(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_)
            | Error::BadGenus
            | Error::BadArity { .. }
            | Error::DegenerateCurve(..)
            | Error::DegenerateConicPair(_) => Failure::Input(e.to_string()),
            other => Failure::Criterion(other.to_string()),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn parse_complex(s: &str) -> std::result::Result<C64, String> {
    let parts: Vec<&str> = s.split(',').collect();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    match parts.as_slice() {
        [re] => Ok(C64::new(num(re)?, 0.0)),
        [re, im] => Ok(C64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected re or re,im, got {s:?}")),
    }
}

fn read(path: &PathBuf) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_curve(c: &Common) -> std::result::Result<HyperellipticCurve, Failure> {
    let path = c.curve.as_ref().ok_or_else(|| Failure::Input("--curve is required".into()))?;
    parse_curve(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(c: &Common, text: &str) -> Outcome {
    match &c.out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| Failure::Input(e.to_string()))
        }
    }
}

fn emit_json(c: &Common, v: &Value) -> Outcome {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    emit(c, &s)
}

fn matrix(m: &CMatrix) -> Value {
    json!((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn max_median(v: &mut [f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    v.sort_by(f64::total_cmp);
    (v[v.len() - 1], v[v.len() / 2])
}

fn cmd_periods(c: &Common) -> Outcome {
    let curve = load_curve(c)?;
    let pd = periods(&curve)?;
    emit_json(
        c,
        &json!({
            "module": "periods",
            "genus": curve.genus(),
            "omega1": matrix(&pd.omega1),
            "omega2": matrix(&pd.omega2),
            "eta1": matrix(&pd.eta1),
            "eta2": matrix(&pd.eta2),
            "riemann_matrix": matrix(&pd.riemann),
            "legendre_residual": pd.legendre_residual,
            "quadrature_error": pd.quad_error,
        }),
    )
}

fn cmd_sigma(c: &Common, u: &[C64]) -> Outcome {
    let curve = load_curve(c)?;
    if u.len() != curve.genus() {
        return Err(Failure::Input(format!("--u given {} times, genus is {}", u.len(), curve.genus())));
    }
    let ctx = SigmaContext::new(&curve)?;
    emit_json(
        c,
        &json!({
            "module": "sigma",
            "u": u,
            "sigma": ctx.sigma(u)?,
            "zeta": ctx.zeta_vec(u)?,
            "wp": matrix(&ctx.wp_matrix(u)?),
        }),
    )
}

fn cmd_abel(c: &Common, points: &PathBuf) -> Outcome {
    let curve = load_curve(c)?;
    let pts = parse_points(&read(points)?, &curve).map_err(|e| Failure::Input(format!("{}: {e}", points.display())))?;
    let images: Vec<Vec<C64>> =
        pts.iter().map(|p| sigma_toda::abel::abel_point(&curve, *p)).collect::<sigma_toda::Result<_>>()?;
    let mut total = vec![C64::new(0.0, 0.0); curve.genus()];
    for im in &images {
        for (t, v) in total.iter_mut().zip(im) {
            *t += v;
        }
    }
    emit_json(c, &json!({ "module": "abel", "images": images, "sum": total }))
}

fn cmd_verify_addition(c: &Common) -> Outcome {
    use rand::SeedableRng;
    let curve = load_curve(c)?;
    let ctx = SigmaContext::new(&curve)?;
    let g = curve.genus();
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(c.seed);
    let mut tables: Vec<(&str, Vec<f64>)> = if g == 1 {
        vec![("frobenius-stickelberger", vec![]), ("sigma-addition-theorem", vec![])]
    } else {
        ["frobenius-stickelberger", "sigma-addition-theorem", "two-term-addition", "baker-addition", "fay-trisecant", "fay-one-point", "fay-confluent"]
            .into_iter()
            .map(|n| (n, vec![]))
            .collect()
    };
    let pt = |r: &mut rand_chacha::ChaCha8Rng| curve.random_point(r, 1.5 * curve.scale(), 0.1 * curve.scale());
    for _ in 0..c.samples {
        let d: Vec<_> = (0..g).map(|_| pt(&mut r)).collect();
        let v: Vec<_> = (0..g.max(2)).map(|_| pt(&mut r)).collect();
        if g == 1 {
            tables[0].1.push(fs_check(&ctx, &v)?.residual);
            tables[1].1.push(thm_add_check(&ctx, &d, &v[..1])?.residual);
        } else {
            tables[0].1.push(fs_check(&ctx, &v[..g])?.residual);
            tables[1].1.push(thm_add_check(&ctx, &d, &v[..g])?.residual);
            tables[2].1.push(cor_add_check(&ctx, &d, v[0], v[1])?.residual);
            tables[3].1.push(baker_check(&ctx, &d, v[0].x, v[1].x)?.residual);
            tables[4].1.push(fay_check(&ctx, &d, v[0], v[1])?.residual);
            tables[5].1.push(deg1_check(&ctx, &d, v[0])?.residual);
            tables[6].1.push(deg2_f_check(&ctx, &d, v[0])?.residual);
        }
    }
    let mut failing = Vec::new();
    let rows: Vec<Value> = tables
        .iter_mut()
        .map(|(name, v)| {
            let (max, median) = max_median(v);
            if !(max < c.tol) {
                failing.push(format!("{name}: max residual {max:.3e} >= {:.1e}", c.tol));
            }
            json!({ "identity": name, "max": max, "median": median, "samples": v.len() })
        })
        .collect();
    emit_json(c, &json!({ "module": "addition", "genus": g, "seed": c.seed, "tol": c.tol, "identities": rows }))?;
    if failing.is_empty() {
        Ok(())
    } else {
        Err(Failure::Criterion(format!("addition: {}", failing.join("; "))))
    }
}

fn cmd_division(c: &Common, n: usize) -> Outcome {
    let curve = load_curve(c)?;
    let dp = cantor_alpha(&curve, n)?;
    emit_json(
        c,
        &json!({
            "module": "division",
            "n": n,
            "y_exponent": dp.y_exponent,
            "degree": dp.alpha.degree(),
            "expected_degree": expected_degree(curve.genus(), n),
            "alpha": dp.alpha.coeffs(),
        }),
    )
}

fn cmd_torsion(c: &Common, n: usize) -> Outcome {
    let curve = load_curve(c)?;
    let ctx = SigmaContext::new(&curve)?;
    let cands = xi_set(&curve, n)?;
    let mut rows = Vec::new();
    for cand in &cands {
        let frame = TodaFrame::new(&ctx, cand.point, vec![C64::new(0.0, 0.0); curve.genus()]);
        let (dist, certified) = match frame {
            Ok(f) => {
                let d = lattice_residual(&ctx, &f.c, n)?;
                (d, torsion_to_frame(&ctx, cand, n, f.t_perp.clone()).is_ok())
            }
            Err(e) => {
                rows.push(json!({ "x": cand.point.x, "y": cand.point.y, "error": e.to_string() }));
                continue;
            }
        };
        rows.push(json!({
            "x": cand.point.x,
            "y": cand.point.y,
            "order_target": cand.order_target,
            "cluster_residuals": cand.residuals,
            "lattice_residual": dist,
            "certified_period": if certified { Some(n) } else { None },
        }));
    }
    emit_json(c, &json!({ "module": "division", "N": n, "candidates": rows }))
}

fn parse_grid(s: &str) -> std::result::Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Failure::Input(format!("--t-grid: expected start:stop:count, got {s:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let (a, b): (f64, f64) = (parts[0].parse().map_err(|_| bad())?, parts[1].parse().map_err(|_| bad())?);
    let k: usize = parts[2].parse().map_err(|_| bad())?;
    if k == 0 || k > 100_000 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    Ok((0..k).map(|i| if k == 1 { a } else { a + (b - a) * i as f64 / (k - 1) as f64 }).collect())
}

fn cmd_toda_run(c: &Common, base_x: C64, sheet: i8, n: usize, grid: &str, t_perp: &[C64]) -> Outcome {
    let curve = load_curve(c)?;
    let g = curve.genus();
    let ts = parse_grid(grid)?;
    let tp = if t_perp.is_empty() { vec![C64::new(0.1, 0.05); g] } else { t_perp.to_vec() };
    if tp.len() != g {
        return Err(Failure::Input(format!("--t-perp given {} times, genus is {g}", tp.len())));
    }
    let ctx = SigmaContext::new(&curve)?;
    let mut base = curve.lift(base_x);
    if sheet < 0 {
        base = base.involution();
    }
    let frame = TodaFrame::new(&ctx, base, tp)?;
    let times: Vec<C64> = ts.iter().map(|&t| C64::new(t, 0.0)).collect();
    let mut series = Vec::new();
    for &t in &times {
        let st = state_from_frame(&frame, n, t)?;
        series.push((t, st));
    }
    let drift = invariant_drift(&frame, n, &times)?;
    let period = lattice_residual(&ctx, &frame.c, n)?;
    if c.format == Format::Csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["t", "k", "a_re", "a_im", "b_re", "b_im"]).map_err(|e| Failure::Input(e.to_string()))?;
        for (t, st) in &series {
            for k in 0..n {
                w.write_record(&[
                    t.re.to_string(),
                    (k + 1).to_string(),
                    st.a[k].re.to_string(),
                    st.a[k].im.to_string(),
                    st.b[k].re.to_string(),
                    st.b[k].im.to_string(),
                ])
                .map_err(|e| Failure::Input(e.to_string()))?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Failure::Input(e.to_string()))?;
        return emit(c, &String::from_utf8(bytes).expect("csv is utf-8"));
    }
    let rows: Vec<Value> = series.iter().map(|(t, st)| json!({ "t": t.re, "a": st.a, "b": st.b })).collect();
    emit_json(
        c,
        &json!({
            "module": "toda",
            "base": { "x": base.x, "y": base.y },
            "c": frame.c,
            "N": n,
            "lattice_residual_Nc": period,
            "invariant_drift": drift,
            "series": rows,
        }),
    )
}

fn cmd_spectral(c: &Common, state: &PathBuf) -> Outcome {
    let st = parse_state(&read(state)?).map_err(|e| Failure::Input(format!("{}: {e}", state.display())))?;
    let sp = char_poly(&st)?;
    let zs: Vec<C64> = (0..8).map(|k| C64::from_polar(1.0 + 0.1 * k as f64, 0.7 * k as f64)).collect();
    let m = spectral_morphism(&sp, &zs)?;
    emit_json(
        c,
        &json!({
            "module": "toda",
            "N": st.len(),
            "p": sp.p.coeffs(),
            "invariants": sp.invariants,
            "weierstrass_z": sp.weierstrass_z,
            "spectral_genus": m.genus,
            "morphism_residual": m.residual,
        }),
    )
}

fn cmd_poncelet(c: &Common, conic: &PathBuf, n: usize, ts: &[f64]) -> Outcome {
    let pair = parse_conic(&read(conic)?).map_err(|e| Failure::Input(format!("{}: {e}", conic.display())))?;
    let pon = Poncelet::new(&pair)?;
    let hits = pon.cayley_closure_check(n)?;
    let cand = match hits.first() {
        Some(h) => h.clone(),
        None => sigma_toda::division::TorsionCandidate { point: pon.step, order_target: n, residuals: vec![] },
    };
    let mut polys = Vec::new();
    for &t in ts {
        match pon.vertices(&cand, n, t) {
            Ok(p) => polys.push(p),
            Err(Error::ThetaDivisorPole(_)) => polys.push(pon.vertices(&cand, n, t + 1e-3)?),
            Err(e) => return Err(e.into()),
        }
    }
    let closure = polys.iter().map(|p| p.closure).fold(0.0, f64::max);
    let tangency = polys.iter().map(|p| p.tangency).fold(0.0, f64::max);
    if c.format == Format::Csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["t", "n", "x_re", "x_im"]).map_err(|e| Failure::Input(e.to_string()))?;
        for p in &polys {
            for (k, x) in p.xs.iter().enumerate().skip(1).take(n) {
                w.write_record(&[p.t.to_string(), k.to_string(), x.re.to_string(), x.im.to_string()])
                    .map_err(|e| Failure::Input(e.to_string()))?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Failure::Input(e.to_string()))?;
        emit(c, &String::from_utf8(bytes).expect("csv is utf-8"))?;
    } else {
        emit_json(
            c,
            &json!({
                "module": "poncelet",
                "N": n,
                "step_x": pon.step.x,
                "cayley_criterion": !hits.is_empty(),
                "max_closure_residual": closure,
                "max_tangency_residual": tangency,
                "polygons": polys.iter().map(|p| json!({ "t": p.t, "vertices": p.vertices(), "closure": p.closure, "tangency": p.tangency, "toda": p.toda })).collect::<Vec<_>>(),
            }),
        )?;
    }
    if hits.is_empty() {
        Err(Failure::Criterion(format!("poncelet: psi_{n} does not vanish at the step, the polygon does not close")))
    } else {
        Ok(())
    }
}

fn cmd_verify_all(c: &Common, only: &[u8]) -> Outcome {
    if let Some(bad) = only.iter().find(|i| !(1..=7).contains(*i)) {
        return Err(Failure::Input(format!("--only: criterion {bad} is not in 1..=7")));
    }
    let reports = if only.is_empty() {
        run_all(c.seed, |r| eprintln!("{}", r.summary()))
    } else {
        only.iter()
            .map(|&id| {
                let r = run_criterion(id, c.seed);
                eprintln!("{}", r.summary());
                r
            })
            .collect()
    };
    let failed: Vec<String> = reports.iter().filter(|r| !r.pass).map(|r| r.summary()).collect();
    emit_json(c, &json!({ "module": "acceptance", "seed": c.seed, "criteria": reports }))?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Criterion(failed.join("\n")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let c = &cli.common;
    let res = match &cli.cmd {
        Cmd::Periods => cmd_periods(c),
        Cmd::Sigma { u } => cmd_sigma(c, u),
        Cmd::Abel { points } => cmd_abel(c, points),
        Cmd::VerifyAddition => cmd_verify_addition(c),
        Cmd::Division { n } => cmd_division(c, *n),
        Cmd::Torsion { n } => cmd_torsion(c, *n),
        Cmd::TodaRun { base_x, sheet, n, t_grid, t_perp } => cmd_toda_run(c, *base_x, *sheet, *n, t_grid, t_perp),
        Cmd::Spectral { state } => cmd_spectral(c, state),
        Cmd::Poncelet { conic, n, t } => cmd_poncelet(c, conic, *n, t),
        Cmd::VerifyAll { only } => cmd_verify_all(c, only),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Criterion(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Input(m)) => {
            eprintln!("input error: {m}");
            ExitCode::from(2)
        }
    }
}
