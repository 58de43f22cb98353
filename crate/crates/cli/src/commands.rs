use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::ops::Range;
use std::path::Path;

use serde::Serialize;
use serde_json::json;
use sphectra_core::asymptotics::{
    arc_exponent, bessel_order, excursion_exponent, exponent_ladder, heat_kernel, ladder_candidates,
    quarter_plane_reflection, rationality_check, rationality_scan, ConeSpectrum, LadderEntry, ScanOptions,
};
use sphectra_core::continuation::{Continuation, LevelCurve, Sampling, SplitSlope};
use sphectra_core::fem::{Domain, Grading};
use sphectra_core::geometry::{Digon, Triangle};
use sphectra_core::richardson::{Discretization, Estimate, ExtrapolatedSpectrum};
use sphectra_core::shape_derivative::{
    feynman_hellmann_extrapolated, feynman_hellmann_multiplet_extrapolated, finite_difference_gradient,
    hadamard_multiplet_extrapolated, hadamard_simple_extrapolated, DerivativeEstimate,
};

use crate::format::{error_bar, human, machine};
use crate::{
    Cli, Command, ConeKind, DerivativeArgs, ExponentsArgs, Failure, Global, HeatKernelArgs, LevelCurveArgs,
    SamplingArg, ScanArgs, SpectrumArgs,
};

/// Caveat printed next to every rationality verdict.
const CAVEAT: &str = "note: verdicts are numerical; the eigenvalue error bars exceed the rationality tolerance, \
                      so they are evidence and not proof";

type Outcome = Result<(), Failure>;

pub fn dispatch(cli: &Cli) -> Outcome {
    let g = &cli.global;
    validate_global(g)?;
    match &cli.command {
        Command::Spectrum(a) => spectrum(g, a),
        Command::Derivative(a) => derivative(g, a),
        Command::LevelCurve(a) => level_curve(g, a),
        Command::HeatKernel(a) => heat(g, a),
        Command::Exponents(a) => exponents(g, a),
        Command::RationalityScan(a) => scan(g, a),
    }
}

fn input(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

fn validate_global(g: &Global) -> Outcome {
    if g.mesh_n < 16 || g.mesh_n % 4 != 0 {
        return Err(input(format!("mesh-n must be a multiple of 4 and at least 16, got {}", g.mesh_n)));
    }
    if !(g.tol > 0.0 && g.tol < 1e-2) {
        return Err(input(format!("tol out of range: {}", g.tol)));
    }
    if let Some(gamma) = g.gamma {
        if !(1.0..=6.0).contains(&gamma) {
            return Err(input(format!("gamma out of range: {gamma} (expected [1, 6])")));
        }
    }
    Ok(())
}

fn disc(g: &Global) -> Discretization {
    Discretization {
        base_n: g.mesh_n / 4,
        grading: g.gamma.map(Grading::uniform),
        tol: g.tol,
    }
}

fn angle(g: &Global, x: f64) -> f64 {
    if g.degrees {
        x.to_radians()
    } else {
        x
    }
}

fn required(g: &Global, name: &str, x: Option<f64>) -> Result<f64, Failure> {
    x.map(|x| angle(g, x)).ok_or_else(|| input(format!("--{name} is required")))
}

fn print_json(value: &impl Serialize) -> Outcome {
    let text = serde_json::to_string(value).map_err(|e| Failure::Compute(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn io_failure(e: io::Error) -> Failure {
    Failure::Compute(format!("io: {e}"))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| input(format!("cannot write {}: {e}", path.display())))
}

fn multiplet_label(r: &Range<usize>) -> String {
    if r.len() == 1 {
        format!("{}", r.start + 1)
    } else {
        format!("{}-{}", r.start + 1, r.end)
    }
}

fn print_estimates(estimates: &[Estimate], multiplets: &[Range<usize>]) {
    println!("{:>3}  {:>12}  {:>8}  {:>5}  multiplet", "j", "lambda", "error", "order");
    for (i, e) in estimates.iter().enumerate() {
        let group = multiplets
            .iter()
            .find(|r| r.contains(&i))
            .map_or_else(|| "-".into(), multiplet_label);
        let order = e.order.map_or_else(|| "-".into(), |o| format!("{o:.2}"));
        println!("{:>3}  {:>12}  {:>8}  {:>5}  {group}", i + 1, human(e.value), error_bar(e.error), order);
    }
}

fn describe(domain: &Domain) -> String {
    match domain {
        Domain::Triangle(t) => format!("triangle alpha={} beta={}", human(t.alpha), human(t.beta)),
        Domain::Digon(d) => format!("digon beta={}", human(d.beta)),
    }
}

fn domain_json(domain: &Domain) -> serde_json::Value {
    match domain {
        Domain::Triangle(t) => json!({"kind": "triangle", "alpha": t.alpha, "beta": t.beta}),
        Domain::Digon(d) => json!({"kind": "digon", "beta": d.beta}),
    }
}

fn ranges(multiplets: &[Range<usize>]) -> Vec<[usize; 2]> {
    multiplets.iter().map(|r| [r.start, r.end]).collect()
}

fn spectrum(g: &Global, a: &SpectrumArgs) -> Outcome {
    let beta = angle(g, a.beta);
    let domain = if a.digon {
        Domain::Digon(Digon::new(beta)?)
    } else {
        let alpha = required(g, "alpha", a.alpha)?;
        Domain::Triangle(Triangle::new(alpha, beta)?)
    };
    if a.k == 0 {
        return Err(input("k must be at least 1"));
    }
    let d = disc(g);
    let study = d.solve(domain, a.k)?;
    if g.json {
        return print_json(&json!({
            "domain": domain_json(&domain),
            "mesh_sizes": d.level_sizes(),
            "grading": d.grading_for(&domain),
            "eigenvalues": study.estimates,
            "multiplets": ranges(&study.multiplets),
        }));
    }
    let sizes = d.level_sizes();
    println!("{}  meshes {}, {}, {}", describe(&domain), sizes[0], sizes[1], sizes[2]);
    print_estimates(&study.estimates, &study.multiplets);
    Ok(())
}

fn direction(a: &DerivativeArgs) -> Result<Option<(f64, f64)>, Failure> {
    match a.direction.as_deref() {
        None => Ok(None),
        Some(&[x, y]) => Ok(Some((x, y))),
        Some(_) => Err(input("direction needs exactly two components, as DA,DB")),
    }
}

/// Largest entrywise difference relative to the size of the reference.
fn disagreement(reference: &[f64], other: &[f64]) -> f64 {
    let scale = reference.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
    reference
        .iter()
        .zip(other)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
        / scale
}

fn derivative(g: &Global, a: &DerivativeArgs) -> Outcome {
    let t = Triangle::new(angle(g, a.alpha), angle(g, a.beta))?;
    if !(a.h > 0.0 && a.h < 0.1) {
        return Err(input(format!("h out of range: {} (expected (0, 0.1))", a.h)));
    }
    if !(a.agreement > 0.0) {
        return Err(input("agreement must be positive"));
    }
    let dir = direction(a)?;
    if let Some((x, y)) = dir {
        if !(x.is_finite() && y.is_finite()) || (x == 0.0 && y == 0.0) {
            return Err(input("direction must be finite and nonzero"));
        }
    }
    let d = disc(g);
    match a.multiplet {
        Some(j) => multiplet_derivative(g, a, &d, t, j, dir),
        None => simple_derivative(g, a, &d, t, dir),
    }
}

fn gradient_row(name: &str, e: &DerivativeEstimate, dir: Option<(f64, f64)>) {
    let directional = dir.map_or_else(String::new, |(x, y)| human(x * e.d_alpha.value + y * e.d_beta.value));
    println!(
        "{:<18}  {:>12}  {:>8}  {:>12}  {:>8}  {:>12}",
        name,
        human(e.d_alpha.value),
        error_bar(e.d_alpha.error),
        human(e.d_beta.value),
        error_bar(e.d_beta.error),
        directional
    );
}

fn simple_derivative(g: &Global, a: &DerivativeArgs, d: &Discretization, t: Triangle, dir: Option<(f64, f64)>) -> Outcome {
    if a.index == 0 {
        return Err(input("index is 1-based"));
    }
    let which = a.index - 1;
    let study = d.solve(t, which + 2)?;
    if let Some(r) = study.multiplet_of(which).filter(|r| r.len() > 1) {
        return Err(input(format!(
            "eigenvalue {} belongs to multiplet {}; use --multiplet",
            a.index,
            multiplet_label(&r)
        )));
    }
    let had = hadamard_simple_extrapolated(&study, which)?;
    let fh = feynman_hellmann_extrapolated(&study, which, a.h)?;
    let fd = if a.finite_difference {
        Some(finite_difference_gradient(d, t, which, a.h)?)
    } else {
        None
    };
    let gap = disagreement(&[had.d_alpha.value, had.d_beta.value], &[fh.d_alpha.value, fh.d_beta.value]);
    let agree = gap <= a.agreement;
    let lambda = study.estimates[which];
    if g.json {
        print_json(&json!({
            "domain": domain_json(&Domain::Triangle(t)),
            "index": a.index,
            "eigenvalue": lambda,
            "direction": dir,
            "hadamard": had,
            "feynman_hellmann": fh,
            "finite_difference": fd,
            "disagreement": gap,
            "agree": agree,
        }))?;
    } else {
        println!(
            "{}  eigenvalue {} = {} ± {}",
            describe(&Domain::Triangle(t)),
            a.index,
            human(lambda.value),
            error_bar(lambda.error)
        );
        println!(
            "{:<18}  {:>12}  {:>8}  {:>12}  {:>8}  {:>12}",
            "method",
            "d/dalpha",
            "error",
            "d/dbeta",
            "error",
            if dir.is_some() { "directional" } else { "" }
        );
        gradient_row("hadamard", &had, dir);
        gradient_row("feynman_hellmann", &fh, dir);
        if let Some(fd) = &fd {
            gradient_row("finite_difference", fd, dir);
        }
        println!("relative disagreement {} (limit {})", error_bar(gap), error_bar(a.agreement));
    }
    if !agree {
        return Err(Failure::Mismatch(format!(
            "methods disagree: hadamard ({}, {}) vs feynman_hellmann ({}, {})",
            machine(had.d_alpha.value),
            machine(had.d_beta.value),
            machine(fh.d_alpha.value),
            machine(fh.d_beta.value)
        )));
    }
    Ok(())
}

/// Study with enough eigenvalues that the multiplet of `which` is followed
/// by at least one computed eigenvalue outside it.
fn study_covering(d: &Discretization, t: Triangle, which: usize) -> Result<ExtrapolatedSpectrum, Failure> {
    let mut k = which + 2;
    loop {
        let study = d.solve(t, k)?;
        match study.multiplet_of(which) {
            Some(r) if r.end < k => return Ok(study),
            _ if k >= which + 32 => return Err(input("multiplet too large to resolve")),
            _ => k += 2,
        }
    }
}

fn multiplet_derivative(
    g: &Global,
    a: &DerivativeArgs,
    d: &Discretization,
    t: Triangle,
    j: usize,
    dir: Option<(f64, f64)>,
) -> Outcome {
    if j == 0 {
        return Err(input("multiplet index is 1-based"));
    }
    let dir = dir.ok_or_else(|| input("--direction is required with --multiplet"))?;
    let which = j - 1;
    let study = study_covering(d, t, which)?;
    let position = study
        .multiplets
        .iter()
        .position(|r| r.contains(&which))
        .expect("covered");
    let range = study.multiplets[position].clone();
    if range.len() < 2 {
        return Err(input(format!("eigenvalue {j} is simple; use --index")));
    }
    let (matrix, had) = hadamard_multiplet_extrapolated(&study, position, dir)?;
    let fh = feynman_hellmann_multiplet_extrapolated(&study, position, dir, a.h)?;
    let values = |v: &[Estimate]| v.iter().map(|e| e.value).collect::<Vec<_>>();
    let gap = disagreement(&values(&had), &values(&fh));
    let agree = gap <= a.agreement;
    let eigenvalues = &study.estimates[range.clone()];
    if g.json {
        print_json(&json!({
            "domain": domain_json(&Domain::Triangle(t)),
            "multiplet": [range.start + 1, range.end],
            "eigenvalues": eigenvalues,
            "direction": dir,
            "hadamard_matrix": matrix.matrix,
            "hadamard": had,
            "feynman_hellmann": fh,
            "disagreement": gap,
            "agree": agree,
        }))?;
    } else {
        println!(
            "{}  multiplet {}  direction ({}, {})",
            describe(&Domain::Triangle(t)),
            multiplet_label(&range),
            human(dir.0),
            human(dir.1)
        );
        println!("{:>6}  {:>12}  {:>8}  {:>12}  {:>8}", "branch", "hadamard", "error", "feynman_h.", "error");
        for (i, (x, y)) in had.iter().zip(&fh).enumerate() {
            println!(
                "{:>6}  {:>12}  {:>8}  {:>12}  {:>8}",
                i + 1,
                human(x.value),
                error_bar(x.error),
                human(y.value),
                error_bar(y.error)
            );
        }
        println!("relative disagreement {} (limit {})", error_bar(gap), error_bar(a.agreement));
    }
    if !agree {
        let list = |v: &[Estimate]| v.iter().map(|e| machine(e.value)).collect::<Vec<_>>().join(", ");
        return Err(Failure::Mismatch(format!(
            "methods disagree: hadamard [{}] vs feynman_hellmann [{}]",
            list(&had),
            list(&fh)
        )));
    }
    Ok(())
}

fn continuation(g: &Global, sampling: Sampling) -> Continuation {
    Continuation {
        disc: disc(g),
        grading: g.gamma.map(Grading::uniform).unwrap_or_default(),
        sampling,
        ..Continuation::default()
    }
}

fn level_curve(g: &Global, a: &LevelCurveArgs) -> Outcome {
    let sampling = match a.sampling {
        SamplingArg::Symmetric => Sampling::Symmetric,
        SamplingArg::Uniform => Sampling::Uniform,
    };
    let cont = continuation(g, sampling);
    sphectra_core::continuation::level_alpha_c(a.c)?;
    let curve = cont.trace_curve(a.c, a.samples)?;
    let split = if a.split_slope {
        Some(cont.split_slope(a.c)?)
    } else {
        None
    };
    match &a.out {
        Some(path) => {
            let mut w = create(path)?;
            curve.write_csv(&mut w)?;
            w.flush().map_err(io_failure)?;
        }
        None if !g.json => {
            let stdout = io::stdout();
            curve.write_csv(stdout.lock())?;
        }
        None => {}
    }
    let ends = curve.extrapolated_ends();
    if g.json {
        return print_json(&json!({
            "c": curve.c,
            "alpha_c": curve.alpha_c,
            "samples": curve.samples,
            "endpoints": curve.endpoints,
            "level_defect": curve.level_defect(),
            "level_tolerance": cont.level_tolerance(a.c),
            "decreasing": curve.is_decreasing(),
            "extrapolated_ends": ends,
            "split_slope": split,
        }));
    }
    // The summary must not interleave with CSV on stdout.
    let to_stdout = a.out.is_some();
    let mut lines = vec![
        format!(
            "level {}  alpha_c {}  samples {}",
            human(curve.c),
            human(curve.alpha_c),
            curve.samples.len()
        ),
        format!(
            "max |lambda1 - c| {} (limit {})  decreasing {}",
            error_bar(curve.level_defect()),
            error_bar(cont.level_tolerance(a.c)),
            curve.is_decreasing()
        ),
    ];
    if let Some((left, right)) = ends {
        lines.push(format!("extrapolated B(alpha_c) {}  B(pi) {}", human(left), human(right)));
    }
    if let Some(s) = &split {
        lines.extend(split_lines(s));
    }
    for line in lines {
        if to_stdout {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }
    Ok(())
}

fn split_lines(s: &SplitSlope) -> Vec<String> {
    let pm = |x: &sphectra_core::continuation::OneSidedSlope| format!("{} ± {}", human(x.value), error_bar(x.error));
    vec![
        format!("split at alpha_s {}  probe defect {}", human(s.alpha_s), error_bar(s.level_defect)),
        format!("lambda2 slope  t>0 {}  t<0 {}", pm(&s.lambda2[0]), pm(&s.lambda2[1])),
        format!("lambda3 slope  t>0 {}  t<0 {}", pm(&s.lambda3[0]), pm(&s.lambda3[1])),
        format!(
            "boundary-form prediction {}",
            s.predicted.iter().map(|&x| human(x)).collect::<Vec<_>>().join(", ")
        ),
    ]
}

fn heat(g: &Global, a: &HeatKernelArgs) -> Outcome {
    if a.t.is_empty() {
        return Err(input("need at least one time"));
    }
    if a.verify_reflection {
        return verify_reflection(g, a);
    }
    let (cone, default_terms) = match a.cone {
        ConeKind::Arc => (ConeSpectrum::arc(required(g, "beta", a.beta)?)?, 50),
        ConeKind::Triangle => {
            let t = Triangle::new(required(g, "alpha", a.alpha)?, required(g, "beta", a.beta)?)?;
            let terms = a.terms.unwrap_or(12);
            (ConeSpectrum::from_study(&disc(g).solve(t, terms)?)?, terms)
        }
    };
    let terms = a.terms.unwrap_or(default_terms);
    let rows = a
        .t
        .iter()
        .map(|&t| Ok((t, heat_kernel(&cone, &a.x, &a.y, t, terms)?)))
        .collect::<Result<Vec<_>, sphectra_core::Error>>()?;
    if g.json {
        let rows: Vec<_> = rows
            .iter()
            .map(|(t, v)| json!({"t": t, "p": v.value, "tail": v.tail}))
            .collect();
        return print_json(&json!({"dimension": cone.dimension(), "terms": terms, "x": a.x, "y": a.y, "rows": rows}));
    }
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    let csv_err = |e: csv::Error| Failure::Compute(e.to_string());
    w.write_record(["t", "p", "tail"]).map_err(csv_err)?;
    for (t, v) in rows {
        w.write_record([machine(t), machine(v.value), machine(v.tail)]).map_err(csv_err)?;
    }
    w.flush().map_err(io_failure)
}

/// Quarter-plane series against the reflection product at the given times.
fn verify_reflection(g: &Global, a: &HeatKernelArgs) -> Outcome {
    let cone = ConeSpectrum::arc(FRAC_PI_2)?;
    let diag = [FRAC_PI_4.cos(), FRAC_PI_4.sin()];
    let point = |v: &[f64]| -> Result<[f64; 2], Failure> {
        match v {
            [] => Ok(diag),
            [x, y] => Ok([*x, *y]),
            _ => Err(input("quarter-plane points have two coordinates")),
        }
    };
    let (x, y) = (point(&a.x)?, point(&a.y)?);
    let terms = a.terms.unwrap_or(50);
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    for &t in &a.t {
        let series = heat_kernel(&cone, &x, &y, t, terms)?.value;
        let exact = quarter_plane_reflection(x, y, t);
        let dev = ((series - exact) / exact).abs();
        worst = worst.max(dev);
        rows.push(json!({"t": t, "series": series, "reflection": exact, "relative_deviation": dev}));
    }
    let pass = worst <= 1e-8;
    if g.json {
        print_json(&json!({"rows": rows, "max_relative_deviation": worst, "pass": pass}))?;
    } else {
        println!("max relative deviation {} over {} times", error_bar(worst), a.t.len());
    }
    if !pass {
        return Err(Failure::Compute(format!("reflection check failed: deviation {worst:e} above 1e-8")));
    }
    Ok(())
}

#[derive(Serialize)]
struct LadderRow {
    value: f64,
    j: usize,
    k: u32,
    verdict: String,
    best_rational: String,
    distance: f64,
}

fn verdict_rows(entries: &[LadderEntry], q_max: u64, tol: f64) -> Result<Vec<LadderRow>, Failure> {
    entries
        .iter()
        .map(|e| {
            let v = rationality_check(e.value, q_max, tol)?;
            Ok(LadderRow {
                value: e.value,
                j: e.j,
                k: e.k,
                verdict: v.verdict.to_string(),
                best_rational: v.best_rational.to_string(),
                distance: v.distance,
            })
        })
        .collect()
}

fn exponents(g: &Global, a: &ExponentsArgs) -> Outcome {
    if a.depth == 0 {
        return Err(input("depth must be at least 1"));
    }
    let planar = match a.r {
        Some(r) => Some(arc_exponent(r)?),
        None => None,
    };
    let (dimension, eigenvalues, entries) = if let Some(lambdas) = &a.lambda {
        if lambdas.is_empty() || lambdas.iter().any(|&l| !(l > 0.0)) || lambdas.windows(2).any(|w| w[1] < w[0]) {
            return Err(input("lambda must be positive and nondecreasing"));
        }
        if a.d == 0 {
            return Err(input("d must be at least 1"));
        }
        let cutoff = bessel_order(*lambdas.last().expect("nonempty"), a.d) + 1.0;
        let mut entries = ladder_candidates(lambdas, a.d, cutoff);
        if entries.len() < a.depth {
            return Err(input(format!(
                "only {} exponents are certified by these eigenvalues, depth {} requested",
                entries.len(),
                a.depth
            )));
        }
        entries.truncate(a.depth);
        let estimates: Vec<Estimate> = lambdas
            .iter()
            .map(|&value| Estimate { value, error: 0.0, order: None })
            .collect();
        (a.d, estimates, entries)
    } else {
        let (cone, estimates) = match a.cone {
            ConeKind::Arc => {
                let beta = match (a.beta, a.r) {
                    (Some(b), _) => angle(g, b),
                    (None, Some(r)) => (-r).acos(),
                    (None, None) => return Err(input("--beta or --r is required for an arc cone")),
                };
                let cone = ConeSpectrum::arc(beta)?;
                let values = cone.eigenvalues(a.depth + 1)?;
                let estimates = values.into_iter().map(|value| Estimate { value, error: 0.0, order: None }).collect();
                (cone, estimates)
            }
            ConeKind::Triangle => {
                if a.alpha.is_none() && a.beta.is_none() && planar.is_some() {
                    return report_planar(g, planar.expect("checked"));
                }
                let t = Triangle::new(required(g, "alpha", a.alpha)?, required(g, "beta", a.beta)?)?;
                let study = disc(g).solve(t, a.k)?;
                (ConeSpectrum::from_study(&study)?, study.estimates)
            }
        };
        let ladder = exponent_ladder(&cone, a.depth)?;
        (cone.dimension(), estimates, ladder.entries)
    };
    let excursion = excursion_exponent(eigenvalues[0].value, dimension)?;
    let rows = verdict_rows(&entries, a.q_max, a.rational_tol)?;
    if g.json {
        return print_json(&json!({
            "dimension": dimension,
            "eigenvalues": eigenvalues,
            "excursion_exponent": excursion,
            "arc_exponent": planar,
            "ladder": rows,
        }));
    }
    println!("dimension {dimension}  lambda1 {}  excursion exponent {}", human(eigenvalues[0].value), human(excursion));
    if let Some(p) = planar {
        println!("planar walk exponent {}", human(p));
    }
    println!("{:>3}  {:>12}  {:>3}  {:>3}  {:<24}  {:>10}  distance", "#", "exponent", "j", "k", "verdict", "best");
    for (i, r) in rows.iter().enumerate() {
        println!(
            "{:>3}  {:>12}  {:>3}  {:>3}  {:<24}  {:>10}  {}",
            i + 1,
            human(r.value),
            r.j,
            r.k,
            r.verdict,
            r.best_rational,
            error_bar(r.distance)
        );
    }
    println!("exponents are candidates; which ones carry nonzero coefficients is not determined");
    if eigenvalues.iter().any(|e| e.error > 0.0) {
        eprintln!("{CAVEAT}");
    }
    Ok(())
}

fn report_planar(g: &Global, p: f64) -> Outcome {
    if g.json {
        return print_json(&json!({"arc_exponent": p}));
    }
    println!("planar walk exponent {}", human(p));
    Ok(())
}

fn read_curve(path: &Path, c: Option<f64>) -> Result<LevelCurve, Failure> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        io::stdin().read_to_string(&mut text).map_err(io_failure)?;
    } else {
        text = std::fs::read_to_string(path).map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
    }
    Ok(LevelCurve::read_csv(text.as_bytes(), c)?)
}

fn scan(g: &Global, a: &ScanArgs) -> Outcome {
    let curve = read_curve(&a.curve, a.c)?;
    let opts = ScanOptions {
        dimension: a.d,
        depth: a.depth,
        q_max: a.q_max,
        tol: a.rational_tol,
    };
    if !(opts.tol > 0.0) || opts.q_max == 0 || opts.dimension == 0 {
        return Err(input("rational-tol, q-max and d must be positive"));
    }
    let records = rationality_scan(&curve, &opts)?;
    if g.json {
        print_json(&json!({"c": curve.c, "options": opts, "records": records, "caveat": CAVEAT}))?;
    } else {
        let mut lines = Vec::with_capacity(records.len());
        for r in &records {
            lines.push(serde_json::to_string(r).map_err(|e| Failure::Compute(e.to_string()))?);
        }
        let body = lines.join("\n") + if lines.is_empty() { "" } else { "\n" };
        match &a.out {
            Some(path) => {
                let mut w = create(path)?;
                w.write_all(body.as_bytes()).map_err(io_failure)?;
                w.flush().map_err(io_failure)?;
                for r in &records {
                    let first = r.first_non_rational.map_or_else(
                        || "all rational".to_string(),
                        |i| format!("first non-rational #{} = {} (j={})", i + 1, human(r.ladder[i].value), r.ladder[i].j),
                    );
                    println!(
                        "alpha {}  beta {}  lambda2 {} ± {}  {first}",
                        human(r.alpha),
                        human(r.beta),
                        human(r.lambda2),
                        error_bar(r.lambda2_error)
                    );
                }
            }
            None => print!("{body}"),
        }
    }
    eprintln!("{CAVEAT}");
    Ok(())
}
