//! The `autodens` command line.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::dfao::{parse_dfao, Dfao};
use crate::error::Error;
use crate::extremal::{build_problem, lower_density, upper_density};
use crate::mullner::{cycle_notation, mullner_decompose};
use crate::rational::fmt_q;
use crate::structure::{decompose, generators};
use crate::subseq::{natural_density_along, Along, LogDensityReport};
use crate::verify::{compare, empirical_density, ExactValue};

#[derive(Parser, Debug)]
#[command(name = "autodens", version, about = "Densities of automatic sequences along subsequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Group data of each primitive component
    Info { file: PathBuf },
    /// Split into primitive components; writes FILE.b<i> and FILE.m<i>
    Decompose {
        file: PathBuf,
        /// Digit length of the generator preview
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// Exact densities along a subsequence
    Density {
        file: PathBuf,
        #[arg(long, default_value = "naturals")]
        along: String,
        /// Report logarithmic densities first
        #[arg(long)]
        log: bool,
    },
    /// Exact upper and lower densities of one symbol
    Extremal {
        file: PathBuf,
        #[arg(long)]
        along: String,
        #[arg(long)]
        alpha: String,
    },
    /// Compare exact values with frequencies over the first N terms
    Verify {
        file: PathBuf,
        #[arg(long)]
        along: String,
        #[arg(long)]
        limit: u64,
        #[arg(long)]
        log: bool,
        #[arg(long, default_value_t = 0.01)]
        tol: f64,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(origin: &str, msg: impl std::fmt::Display) -> Self {
        Failure {
            code: 2,
            message: format!("{origin}: {msg}"),
        }
    }
}

fn origin(e: &Error, cmd: &str) -> &'static str {
    match e {
        Error::Parse(_) => "parse",
        Error::BaseMismatch(..) | Error::NotPrimePower(_) | Error::BudgetExceeded(_) => "dfao",
        Error::NotPrimitive(_) => "mullner",
        Error::SquaresUnsupported(_) => "density",
        Error::Overflow(_) => "verify",
        _ => match cmd {
            "info" => "mullner",
            "decompose" => "structure",
            "density" => "density",
            "extremal" => "extremal",
            _ => "verify",
        },
    }
}

fn domain(cmd: &'static str) -> impl Fn(Error) -> Failure {
    move |e| {
        let code = match e {
            Error::Parse(_) | Error::InvalidArgument(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            message: format!("{}: {e}", origin(&e, cmd)),
        }
    }
}

fn load(path: &Path) -> Result<Dfao, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::input("input", format!("{}: {e}", path.display())))?;
    parse_dfao(&text).map_err(|e| Failure::input("parse", e))
}

fn parse_along(s: &str) -> Result<Along, Failure> {
    s.parse::<Along>().map_err(|e| Failure::input("input", e))
}

/// Runs the command line and returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = if code == 0 { write!(out, "{}", e.render()) } else { write!(err, "{}", e.render()) };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Info { file } => info(file),
        Command::Decompose { file, depth } => decompose_cmd(file, *depth),
        Command::Density { file, along, log } => density(file, along, *log),
        Command::Extremal { file, along, alpha } => extremal(file, along, alpha),
        Command::Verify {
            file,
            along,
            limit,
            log,
            tol,
        } => verify(file, along, *limit, *log, *tol),
    };
    match result {
        Ok(report) => {
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&report.json).expect("json"),
                Format::Text => report.text,
            };
            let _ = writeln!(out, "{text}");
            report.code
        }
        Err(f) => {
            let _ = writeln!(err, "{}", f.message);
            f.code
        }
    }
}

struct Report {
    json: Value,
    text: String,
    code: i32,
}

impl Report {
    fn ok(json: Value, text: String) -> Self {
        Report { json, text, code: 0 }
    }
}

fn info(file: &Path) -> Result<Report, Failure> {
    let a = load(file)?;
    let dec = decompose(&a).map_err(domain("info"))?;
    let mut comps = Vec::new();
    let mut text = String::new();
    for (i, c) in dec.components.iter().enumerate() {
        let md = mullner_decompose(&c.b).map_err(domain("info"))?;
        let gens: BTreeSet<String> = md.labels.iter().map(|&g| cycle_notation(&md.group[g])).collect();
        let gens: BTreeSet<String> = if gens.len() > 1 { gens.into_iter().filter(|g| g != "()").collect() } else { gens };
        let cosets: Vec<usize> = (0..md.d).map(|j| md.phi.iter().filter(|&&v| v == j).count()).collect();
        let sync = md.c == 1;
        text.push_str(&format!(
            "component {}: c = {}, |X| = {}, |G| = {} generated by {}, d = {}, cosets {:?}, i0 = 0, synchronizing: {}\n",
            i + 1,
            md.c,
            md.sets.len(),
            md.group.len(),
            gens.iter().cloned().collect::<Vec<_>>().join(" "),
            md.d,
            cosets,
            if sync { "yes" } else { "no" }
        ));
        comps.push(json!({
            "component": i + 1,
            "c": md.c,
            "sets": md.sets.len(),
            "group_order": md.group.len(),
            "generators": gens,
            "d": md.d,
            "coset_sizes": cosets,
            "i0": 0,
            "synchronizing": sync,
            "base_exponent": md.exponent,
        }));
    }
    Ok(Report::ok(json!({ "components": comps }), text))
}

fn decompose_cmd(file: &Path, depth: usize) -> Result<Report, Failure> {
    let a = load(file)?;
    let dec = decompose(&a).map_err(domain("decompose"))?;
    let mut comps = Vec::new();
    let mut text = format!(
        "base {} (input base {} to the power {}), {} final component(s), {} primitive component(s)\n",
        dec.base(),
        a.base(),
        dec.report.exponent,
        dec.report.finals.len(),
        dec.components.len()
    );
    for (i, c) in dec.components.iter().enumerate() {
        let bpath = suffixed(file, &format!("b{}", i + 1));
        let mpath = suffixed(file, &format!("m{}", i + 1));
        std::fs::write(&bpath, c.b.serialize()).map_err(|e| Failure::input("output", e))?;
        std::fs::write(&mpath, c.indicator.serialize()).map_err(|e| Failure::input("output", e))?;
        let g = generators(&c.indicator, depth);
        let preview: Vec<String> = g.elements.iter().take(20).map(|x| x.to_string()).collect();
        text.push_str(&format!(
            "component {}: anchor {}, {} states, least member {}, generators {}{} ({})\n  wrote {} and {}\n",
            i + 1,
            dec.automaton().name(c.anchor),
            c.b.len(),
            c.least.map_or("none".into(), |x| x.to_string()),
            preview.join(", "),
            if g.elements.len() > preview.len() { ", ..." } else { "" },
            if g.finite { "finite" } else { "infinite" },
            bpath.display(),
            mpath.display()
        ));
        comps.push(json!({
            "component": i + 1,
            "anchor": dec.automaton().name(c.anchor),
            "states": c.b.len(),
            "least": c.least.map(|x| x.to_string()),
            "generators": preview,
            "generators_finite": g.finite,
            "b_file": bpath.display().to_string(),
            "m_file": mpath.display().to_string(),
        }));
    }
    let json = json!({
        "base": dec.base(),
        "exponent": dec.report.exponent,
        "final_components": dec.report.minimal_components(),
        "components": comps,
        "residual_thin": true,
    });
    Ok(Report::ok(json, text))
}

fn suffixed(file: &Path, suffix: &str) -> PathBuf {
    let mut s = file.as_os_str().to_owned();
    s.push(format!(".{suffix}"));
    PathBuf::from(s)
}

fn log_text(log: &LogDensityReport) -> String {
    log.values.iter().map(|(s, v)| format!("  {s:>8}  {v}\n")).collect()
}

fn density(file: &Path, along: &str, log: bool) -> Result<Report, Failure> {
    let a = load(file)?;
    let along = parse_along(along)?;
    let r = natural_density_along(&a, along).map_err(domain("density"))?;
    let mut natural = String::new();
    match (&r.values, &r.witness) {
        (Some(t), _) => {
            for (s, v) in t {
                natural.push_str(&format!("  {s:>8}  {}\n", fmt_q(v)));
            }
        }
        (None, Some(w)) => natural.push_str(&format!(
            "  does not exist: components {} and {} give {} and {} for {}\n",
            w.first + 1,
            w.second + 1,
            fmt_q(&w.first_value),
            fmt_q(&w.second_value),
            w.symbol
        )),
        _ => {}
    }
    let nat_json = json!({
        "exists": r.exists,
        "density": r.values.as_ref().map(crate::subseq::table_json),
        "witness": r.to_json()["witness"].clone(),
    });
    let (json, text) = if log {
        let mut j = r.log.to_json();
        j["natural"] = nat_json;
        let text = format!("logarithmic densities along {along}\n{}natural density\n{natural}", log_text(&r.log));
        (j, text)
    } else {
        let mut j = nat_json;
        j["along"] = json!(along.to_string());
        j["log_density"] = r.log.to_json()["log_density"].clone();
        let text = format!("densities along {along}\n{natural}logarithmic densities\n{}", log_text(&r.log));
        (j, text)
    };
    Ok(Report::ok(json, text))
}

fn extremal(file: &Path, along: &str, alpha: &str) -> Result<Report, Failure> {
    let a = load(file)?;
    let along = parse_along(along)?;
    let p = build_problem(&a, along, alpha).map_err(domain("extremal"))?;
    let up = upper_density(&p).map_err(domain("extremal"))?;
    let lo = lower_density(&p).map_err(domain("extremal"))?;
    let json = json!({
        "along": along.to_string(),
        "alpha": alpha,
        "upper": fmt_q(&up.value),
        "lower": fmt_q(&lo.value),
        "certificate": {
            "upper": { "preperiod": up.certificate.preperiod, "period": up.certificate.period },
            "lower": { "preperiod": lo.certificate.preperiod, "period": lo.certificate.period },
        },
        "base": p.automaton.base(),
    });
    let text = format!(
        "along {along}, symbol {alpha}\n  upper {} attained at x = {}\n  lower {} attained at x = {}\n",
        fmt_q(&up.value),
        up.certificate.digits_string(),
        fmt_q(&lo.value),
        lo.certificate.digits_string()
    );
    Ok(Report::ok(json, text))
}

fn verify(file: &Path, along: &str, limit: u64, log: bool, tol: f64) -> Result<Report, Failure> {
    let a = load(file)?;
    let along = parse_along(along)?;
    if limit == 0 {
        return Err(Failure::input("input", "--limit must be positive"));
    }
    let r = natural_density_along(&a, along).map_err(domain("verify"))?;
    let exact: BTreeMap<String, ExactValue> = if log {
        r.log.values.iter().map(|(s, v)| (s.clone(), ExactValue::Log(v.clone()))).collect()
    } else {
        match &r.values {
            Some(t) => t.iter().map(|(s, v)| (s.clone(), ExactValue::Rational(v.clone()))).collect(),
            None => {
                return Err(Failure {
                    code: 1,
                    message: format!("verify: the density along {along} does not exist; use --log"),
                })
            }
        }
    };
    let emp = empirical_density(&a, along, limit).map_err(domain("verify"))?;
    let freq = if log { &emp.log } else { &emp.natural };
    let cmp = compare(&exact, freq, tol);
    let mut text = format!(
        "{} frequencies over the first {limit} terms along {along} (largest {}), tolerance {tol}\n",
        if log { "logarithmic" } else { "natural" },
        emp.largest
    );
    for row in &cmp.rows {
        text.push_str(&format!(
            "  {:>8}  exact {}  empirical {:.6}  error {:.2e}  {}\n",
            row.symbol,
            row.exact,
            row.empirical,
            row.error,
            if row.ok { "ok" } else { "FAIL" }
        ));
    }
    text.push_str(if cmp.pass { "pass\n" } else { "fail\n" });
    let json = json!({
        "along": along.to_string(),
        "mode": if log { "log" } else { "natural" },
        "limit": limit,
        "empirical": emp.to_json(),
        "comparison": cmp.to_json(),
    });
    Ok(Report {
        json,
        text,
        code: if cmp.pass { 0 } else { 1 },
    })
}
