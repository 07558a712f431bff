use crate::error::CliError;
use crate::{Format, Global};
use carnot_core::algebra::StratifiedLieAlgebra;
use carnot_core::group::{calibrate_norm as search_norm, CarnotGroup};
use carnot_core::numerics::io::{read_report, write_field, write_report, REPORT_CSV, REPORT_JSON};
use carnot_core::numerics::pipeline::{ExperimentConfig, ExperimentReport, PrimitiveSolver};
use carnot_core::numerics::samples::zero_average_family;
use carnot_core::poly::Poly;
use carnot_core::rumin::{RuminComplex, VerificationReport};
use carnot_core::scalar::rat_to_string;
use serde::Serialize;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

type Result<T> = std::result::Result<T, CliError>;

/// A file path, then `$CARNOT_PRESET_DIR/<name>.json`, then a built-in preset.
pub fn load_algebra(arg: &str) -> Result<StratifiedLieAlgebra> {
    let direct = Path::new(arg);
    let candidate = if direct.is_file() {
        Some(direct.to_path_buf())
    } else {
        std::env::var_os("CARNOT_PRESET_DIR")
            .map(|d| PathBuf::from(d).join(format!("{arg}.json")))
            .filter(|p| p.is_file())
    };
    match candidate {
        Some(path) => Ok(StratifiedLieAlgebra::from_json_str(&fs::read_to_string(path)?)?),
        None => StratifiedLieAlgebra::preset(arg)
            .ok_or_else(|| CliError::Usage(format!("{arg:?} is neither a file nor a known preset"))),
    }
}

fn require_format(g: &Global, allowed: &[Format], verb: &str) -> Result<()> {
    if allowed.contains(&g.format) {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{verb} does not support --format {:?}", g.format).to_lowercase()))
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes") + "\n"
}

/// Writes a deterministic report to `<out>/<name>` and its wall time to
/// `<out>/<name stem>.timing.json`.
fn write_out(g: &Global, name: &str, contents: &str, started: Instant) -> Result<PathBuf> {
    fs::create_dir_all(&g.out)?;
    let path = g.out.join(name);
    fs::write(&path, contents)?;
    let stem = name.split('.').next().unwrap_or(name);
    let timing = json!({ "report": name, "seconds": started.elapsed().as_secs_f64() });
    fs::write(g.out.join(format!("{stem}.timing.json")), to_json(&timing))?;
    Ok(path)
}

fn emit(text: &str) {
    print!("{text}");
}

pub fn algebra_validate(g: &Global, arg: &str) -> Result<()> {
    require_format(g, &[Format::Json], "algebra validate")?;
    let t = Instant::now();
    let alg = load_algebra(arg)?;
    let report = json!({
        "algebra": alg.name(),
        "valid": true,
        "layers": alg.layer_dims(),
        "dimension": alg.dim(),
        "step": alg.step(),
        "homogeneous_dimension": alg.homogeneous_dimension(),
        "degrees": alg.degrees(),
        "spec": alg.to_spec(),
    });
    let text = to_json(&report);
    write_out(g, "algebra.json", &text, t)?;
    emit(&text);
    Ok(())
}

fn coordinate_names(n: usize, latex: bool) -> Vec<String> {
    let name = |s: &str, k: usize| if latex { format!("{s}_{{{k}}}") } else { format!("{s}{k}") };
    (1..=n).map(|k| name("x", k)).chain((1..=n).map(|k| name("y", k))).collect()
}

fn latex_poly(p: &Poly, names: &[String]) -> String {
    let mut out = String::new();
    for (idx, (e, c)) in p.terms().enumerate() {
        let c = rat_to_string(c);
        let (neg, abs) = match c.strip_prefix('-') {
            Some(a) => (true, a.to_string()),
            None => (false, c),
        };
        out.push_str(match (idx, neg) {
            (0, true) => "-",
            (0, false) => "",
            (_, true) => " - ",
            (_, false) => " + ",
        });
        let mono: String = e
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0)
            .map(|(k, &a)| if a == 1 { names[k].clone() } else { format!("{}^{{{a}}}", names[k]) })
            .collect();
        let coeff = match abs.split_once('/') {
            Some((n, d)) => format!("\\frac{{{n}}}{{{d}}}"),
            None => abs,
        };
        if mono.is_empty() {
            out.push_str(&coeff);
        } else {
            if coeff != "1" {
                out.push_str(&coeff);
            }
            out.push_str(&mono);
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

pub fn group_law(g: &Global, arg: &str) -> Result<()> {
    require_format(g, &[Format::Json, Format::Latex], "group law")?;
    let t = Instant::now();
    let group = CarnotGroup::new(load_algebra(arg)?);
    let law = group.product_formula();
    let n = group.dim();
    let json_names = coordinate_names(n, false);
    let report = json!({
        "algebra": group.algebra().name(),
        "coordinates": &json_names[..n],
        "product": law.iter().map(|p| p.render(&json_names)).collect::<Vec<_>>(),
        "inverse": (1..=n).map(|k| format!("-x{k}")).collect::<Vec<_>>(),
    });
    let text = to_json(&report);
    write_out(g, "group-law.json", &text, t)?;
    if g.format == Format::Latex {
        let names = coordinate_names(n, true);
        let mut tex = String::from("\\begin{aligned}\n");
        for (k, p) in law.iter().enumerate() {
            let _ = writeln!(tex, "(x \\cdot y)_{{{}}} &= {} \\\\", k + 1, latex_poly(p, &names));
        }
        tex.push_str("\\end{aligned}\n");
        write_out(g, "group-law.tex", &tex, t)?;
        emit(&tex);
    } else {
        emit(&text);
    }
    Ok(())
}

pub fn calibrate_norm(g: &Global, arg: &str, samples: usize) -> Result<()> {
    require_format(g, &[Format::Json], "group calibrate-norm")?;
    let t = Instant::now();
    let group = CarnotGroup::new(load_algebra(arg)?);
    let cfg = search_norm(&group, samples, g.seed.unwrap_or(0))?;
    let text = to_json(&cfg);
    write_out(g, "norm.json", &text, t)?;
    emit(&text);
    Ok(())
}

fn degree_json(cx: &RuminComplex, h: usize) -> Result<Value> {
    let mut v = json!({
        "degree": h,
        "lambda_basis": cx.lambda_basis(h),
        "e0_basis": cx.e0_basis(h)?,
        "pi_e_order": cx.pi_e_order(h),
    });
    if h < cx.dim() {
        v["dc"] = cx.dc(h)?.to_json();
        v["dc_order"] = json!(cx.dc(h)?.max_order());
    }
    Ok(v)
}

pub fn rumin_build(g: &Global, arg: &str, degree: Option<usize>) -> Result<()> {
    require_format(g, &[Format::Json, Format::Latex], "rumin build")?;
    let t = Instant::now();
    let alg = load_algebra(arg)?;
    let cx = RuminComplex::build(&alg)?;
    let degrees: Vec<usize> = match degree {
        Some(h) if h > cx.dim() => return Err(CliError::Usage(format!("--degree {h} exceeds {}", cx.dim()))),
        Some(h) => vec![h],
        None => (0..=cx.dim()).collect(),
    };
    let report = json!({
        "algebra": alg.name(),
        "layers": alg.layer_dims(),
        "e0_dims": cx.e0_dims(),
        "degrees": degrees.iter().map(|&h| degree_json(&cx, h)).collect::<Result<Vec<_>>>()?,
    });
    let text = to_json(&report);
    write_out(g, "complex.json", &text, t)?;
    if g.format == Format::Latex {
        let mut tex = String::new();
        for &h in degrees.iter().filter(|&&h| h < cx.dim()) {
            let _ = writeln!(tex, "% d_c on E_0^{h}\nd_c^{{({h})}} = {}\n", cx.dc(h)?.to_latex());
        }
        write_out(g, "complex.tex", &tex, t)?;
        emit(&tex);
    } else {
        emit(&text);
    }
    Ok(())
}

fn checks_csv(rep: &VerificationReport) -> String {
    let mut s = String::from("name,degree,passed\n");
    for c in &rep.checks {
        let _ = writeln!(s, "{},{},{}", c.name, c.degree.map(|d| d.to_string()).unwrap_or_default(), c.passed);
    }
    s
}

pub fn rumin_verify(g: &Global, arg: &str) -> Result<()> {
    require_format(g, &[Format::Json, Format::Csv], "rumin verify")?;
    let t = Instant::now();
    let alg = load_algebra(arg)?;
    let rep = RuminComplex::build(&alg)?.verify();
    let text = to_json(&rep);
    write_out(g, "verify.json", &text, t)?;
    emit(&if g.format == Format::Csv { checks_csv(&rep) } else { text });
    let failed: Vec<String> = rep
        .failures()
        .map(|c| match c.degree {
            Some(d) => format!("{} (degree {d})", c.name),
            None => c.name.clone(),
        })
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Identity(failed.join(", ")))
    }
}

pub fn primitive_run(g: &Global, config: &Path, fields: bool) -> Result<()> {
    require_format(g, &[Format::Json, Format::Csv], "primitive run")?;
    let t = Instant::now();
    let mut cfg = ExperimentConfig::from_json_str(&fs::read_to_string(config)?)?;
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    let solver = PrimitiveSolver::new(cfg)?;
    let report = if fields {
        let c = &solver.config;
        let family = zero_average_family(solver.group(), &solver.grid, c.support, c.seed, c.samples)?;
        let dir = g.out.join("fields");
        let mut samples = Vec::new();
        for (i, f) in family.iter().enumerate() {
            let sol = solver.solve(f, i)?;
            write_field(&dir, &format!("f_{i:03}"), &solver.grid, &[f])?;
            write_field(&dir, &format!("F_{i:03}"), &solver.grid, &[&sol.field[0], &sol.field[1]])?;
            samples.push(sol.report);
        }
        ExperimentReport::new(&solver, samples)
    } else {
        solver.run()?
    };
    write_report(&g.out, &report)?;
    let timing = json!({ "report": REPORT_JSON, "seconds": t.elapsed().as_secs_f64() });
    fs::write(g.out.join("report.timing.json"), to_json(&timing))?;
    emit(&match g.format {
        Format::Csv => fs::read_to_string(g.out.join(REPORT_CSV))?,
        _ => to_json(&summary(&report)),
    });
    Ok(())
}

fn summary(r: &ExperimentReport) -> Value {
    json!({
        "p": r.config.p,
        "q": r.config.q,
        "lambda": r.config.lambda,
        "support": r.config.support,
        "cutoff_radius": r.config.cutoff_radius,
        "grid": r.config.grid,
        "seed": r.config.seed,
        "samples": r.samples.len(),
        "kernel_constant": r.kernel_constant,
        "empirical_constant": r.empirical_constant,
        "max_divergence_residual": r.max_divergence_residual,
        "max_homotopy_residual": r.max_homotopy_residual,
        "all_supports_ok": r.all_supports_ok,
    })
}

pub fn primitive_report(g: &Global, dir: &Path) -> Result<()> {
    require_format(g, &[Format::Json, Format::Csv], "primitive report")?;
    let report = read_report(dir).map_err(|e| CliError::Usage(format!("{}: {e}", dir.join(REPORT_JSON).display())))?;
    emit(&match g.format {
        Format::Csv => report.to_csv(),
        _ => to_json(&summary(&report)),
    });
    Ok(())
}
