use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use f2factor::apps::{decompose_dnf, decompose_table, minimize_monotone, DataTable, DnfFormula, DnfMode, MergeConstants};
use f2factor::bench::{self, BenchConfig};
use f2factor::factor::{factor_complete, Driver, FactorConfig};
use f2factor::gen::{generate, GenSpec, GeneratedJson, Planted};
use f2factor::identity::{IsEqualConfig, PivotRule};
use f2factor::poly::{parse, Polynomial, PolynomialJson};
use f2factor::precheck::precheck;
use f2factor::Error;

/// Factorization of multilinear polynomials over GF(2) and its
/// applications to DNF formulas and data tables.
#[derive(Parser)]
#[command(name = "f2factor", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Factor a polynomial given as text or JSON.
    Factor(FactorArgs),
    /// Report the irreducibility prechecks.
    Check {
        #[arg(long = "in", default_value = "-")]
        input: String,
        #[arg(long)]
        json: bool,
    },
    /// Decompose a DNF formula into conjunctive components.
    Dnf {
        #[arg(long = "in", default_value = "-")]
        input: String,
        #[arg(long, default_value = "monotone")]
        mode: String,
        /// Remove absorbed terms first (monotone mode).
        #[arg(long)]
        minimize: bool,
        #[arg(long)]
        json: bool,
    },
    /// Decompose a CSV table into a Cartesian product.
    Table {
        #[arg(long)]
        csv: String,
        /// `auto`, `none` or a table index.
        #[arg(long, default_value = "none")]
        merge_constants: String,
        /// Drop duplicate rows instead of rejecting them.
        #[arg(long)]
        dedupe: bool,
        #[arg(long)]
        json: bool,
    },
    /// Generate a random instance.
    Gen {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `n1,m1,n2,m2` for a product of two random components.
        #[arg(long)]
        planted: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run drivers over a corpus of generator specs.
    Bench {
        /// JSON list of generator specs.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value = "fd,modfd")]
        drivers: String,
        #[arg(long, default_value_t = 1)]
        repeat: usize,
        #[arg(long)]
        cutoff: Option<usize>,
        #[arg(long)]
        out_csv: Option<PathBuf>,
        #[arg(long)]
        out_json: Option<PathBuf>,
    },
}

#[derive(Args)]
struct FactorArgs {
    #[arg(long = "in", default_value = "-")]
    input: String,
    #[arg(long, default_value = "modfd")]
    algo: String,
    #[arg(long, default_value_t = 512)]
    cutoff: usize,
    #[arg(long, default_value = "balanced_median")]
    pivot_rule: String,
    /// Skip the irreducibility prechecks.
    #[arg(long)]
    no_precheck: bool,
    #[arg(long)]
    json: bool,
}

fn read_input(path: &str) -> Result<String, Error> {
    let mut s = String::new();
    let res = if path == "-" {
        io::stdin().read_to_string(&mut s).map(|_| ())
    } else {
        fs::read_to_string(path).map(|t| s = t)
    };
    res.map_err(|e| Error::Data(format!("{path}: {e}")))?;
    Ok(s)
}

fn read_polynomial(path: &str) -> Result<Polynomial, Error> {
    let text = read_input(path)?;
    if text.trim_start().starts_with('{') {
        if let Ok(g) = serde_json::from_str::<GeneratedJson>(&text) {
            return g.polynomial.to_polynomial();
        }
        let pj: PolynomialJson =
            serde_json::from_str(&text).map_err(|e| Error::Data(format!("json: {e}")))?;
        return pj.to_polynomial();
    }
    parse(&text, None)
}

fn write_out(out: Option<&PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::Data(format!("{}: {e}", p.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Data(format!("stdout: {e}"))),
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn cmd_factor(a: FactorArgs) -> Result<String, Error> {
    let f = read_polynomial(&a.input)?;
    let driver: Driver = a.algo.parse()?;
    let rule: PivotRule = a.pivot_rule.parse()?;
    let cfg = FactorConfig::default()
        .with_precheck(!a.no_precheck)
        .with_identity(IsEqualConfig::default().with_cutoff(a.cutoff).with_pivot_rule(rule));
    let fz = factor_complete(&f, driver, &cfg)?;
    let trivial: Vec<String> = fz.trivial.iter().map(ToString::to_string).collect();
    let factors: Vec<String> = fz.iter().map(ToString::to_string).collect();
    if a.json {
        return Ok(to_json(&json!({
            "driver": driver.name(),
            "irreducible": !fz.is_factorable() && fz.trivial.is_empty(),
            "trivial": trivial,
            "factors": factors,
            "factors_json": fz.to_json(),
        })));
    }
    let mut s = String::new();
    for t in &trivial {
        s += &format!("trivial: {t}\n");
    }
    for (i, f) in factors.iter().enumerate() {
        s += &format!("factor {}: {f}\n", i + 1);
    }
    Ok(s)
}

fn cmd_check(input: &str, as_json: bool) -> Result<String, Error> {
    let f = read_polynomial(input)?;
    let (_, core) = f.strip_trivial_divisors();
    let r = precheck(&core)?;
    let name = |i: usize| core.vars().name(i).to_string();
    let classes: Vec<Vec<String>> = r.cooccurrence_classes.iter().map(|c| c.iter().map(name).collect()).collect();
    if as_json {
        let mu: Vec<(String, usize)> = r.mu.iter().map(|&(i, c)| (name(i), c)).collect();
        return Ok(to_json(&json!({
            "monomials": r.monomial_count,
            "mu": mu,
            "gcd_condition_holds": r.gcd_condition_holds,
            "cooccurrence_classes": classes,
            "verdict": r.verdict,
        })));
    }
    let classes: Vec<String> = classes.iter().map(|c| format!("{{{}}}", c.join(", "))).collect();
    Ok(format!(
        "monomials: {}\ngcd condition: {}\nco-occurrence classes: {}\nverdict: {}\n",
        r.monomial_count,
        if r.gcd_condition_holds { "holds" } else { "fails" },
        classes.join(" "),
        serde_json::to_value(r.verdict).expect("serializable").as_str().unwrap_or_default(),
    ))
}

fn cmd_dnf(input: &str, mode: &str, minimize: bool, as_json: bool) -> Result<String, Error> {
    let mode: DnfMode = mode.parse()?;
    let f = DnfFormula::parse(read_input(input)?.trim(), mode)?;
    let f = if minimize { minimize_monotone(&f)? } else { f };
    // Reject absorbable input unless minimization was requested.
    f2factor::apps::dnf_to_polynomial(&f, false)?;
    let parts: Vec<String> = decompose_dnf(&f, &FactorConfig::default())?
        .iter()
        .map(ToString::to_string)
        .collect();
    if as_json {
        return Ok(to_json(&json!({ "input": f.to_string(), "components": parts })));
    }
    Ok(parts.iter().map(|p| format!("({p})\n")).collect())
}

fn cmd_table(path: &str, merge: &str, dedupe: bool, as_json: bool) -> Result<String, Error> {
    let merge: MergeConstants = merge.parse()?;
    let file = fs::File::open(path).map_err(|e| Error::Data(format!("{path}: {e}")))?;
    let t = DataTable::from_csv(file, dedupe)?;
    let d = decompose_table(&t, merge, &FactorConfig::default())?;
    if as_json {
        return Ok(to_json(&d));
    }
    let mut out = Vec::new();
    for (i, tb) in d.tables.iter().enumerate() {
        writeln!(out, "# table {}", i + 1).expect("in-memory write");
        tb.to_csv(&mut out)?;
    }
    if !d.constant_columns.is_empty() {
        writeln!(out, "# constant columns").expect("in-memory write");
        for (a, v) in &d.constant_columns {
            writeln!(out, "{a}={v}").expect("in-memory write");
        }
    }
    Ok(String::from_utf8(out).expect("csv output is utf-8"))
}

fn parse_planted(s: &str) -> Result<Planted, Error> {
    let v: Vec<usize> = s
        .split(',')
        .map(|x| x.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| Error::Data(format!("bad --planted `{s}`: expected n1,m1,n2,m2")))?;
    match v[..] {
        [n1, m1, n2, m2] => Ok(Planted { n1, m1, n2, m2 }),
        _ => Err(Error::Data(format!("bad --planted `{s}`: expected n1,m1,n2,m2"))),
    }
}

fn cmd_gen(n: Option<usize>, m: Option<usize>, p: f64, seed: u64, planted: Option<String>) -> Result<String, Error> {
    let spec = match planted {
        Some(s) => {
            let pl = parse_planted(&s)?;
            let mut spec = GenSpec::planted(pl.n1, pl.m1, pl.n2, pl.m2, seed);
            spec.n = n.unwrap_or(spec.n);
            spec.m = m.unwrap_or(spec.m);
            spec.p = p;
            spec
        }
        None => {
            let (Some(n), Some(m)) = (n, m) else {
                return Err(Error::Data("--n and --m are required without --planted".into()));
            };
            let mut spec = GenSpec::random(n, m, seed);
            spec.p = p;
            spec
        }
    };
    let g = generate(&spec)?;
    Ok(to_json(&g.to_json(&spec)))
}

fn cmd_bench(
    spec: &PathBuf,
    drivers: &str,
    repeat: usize,
    cutoff: Option<usize>,
    out_csv: Option<PathBuf>,
    out_json: Option<PathBuf>,
) -> Result<String, Error> {
    let text = fs::read_to_string(spec).map_err(|e| Error::Data(format!("{}: {e}", spec.display())))?;
    let corpus: Vec<GenSpec> = serde_json::from_str(&text).map_err(|e| Error::Data(format!("json: {e}")))?;
    let drivers = drivers.split(',').map(|d| d.trim().parse()).collect::<Result<Vec<Driver>, _>>()?;
    let mut cfg = BenchConfig {
        drivers,
        repeat,
        ..BenchConfig::default()
    };
    if let Some(c) = cutoff {
        cfg.factor.identity = cfg.factor.identity.clone().with_cutoff(c);
    }
    let results = bench::bench(&corpus, &cfg);
    if let Some(p) = &out_csv {
        let f = fs::File::create(p).map_err(|e| Error::Data(format!("{}: {e}", p.display())))?;
        bench::write_csv(&results, f)?;
    }
    if let Some(p) = &out_json {
        let f = fs::File::create(p).map_err(|e| Error::Data(format!("{}: {e}", p.display())))?;
        bench::write_json(&results, f)?;
    }
    let mut s = String::new();
    for r in &results {
        s += &format!(
            "{:<40} {:<6} rep={} time={:.4}s factors={} calls={}{}\n",
            r.instance,
            r.driver,
            r.repeat,
            r.wall_time_s,
            r.factor_count,
            r.calls,
            r.error.as_ref().map(|e| format!(" error: {e}")).unwrap_or_default()
        );
    }
    if let Some(d) = bench::disparity(&results) {
        s += &format!(
            "classification disparity: {:.1}x ({} slower; same={:.3e}s cross={:.3e}s; reference {})\n",
            d.ratio, d.slower, d.same_factor_mean_s, d.cross_factor_mean_s, d.reference
        );
    }
    Ok(s)
}

fn run(cli: Cli) -> Result<String, Error> {
    match cli.cmd {
        Cmd::Factor(a) => cmd_factor(a),
        Cmd::Check { input, json } => cmd_check(&input, json),
        Cmd::Dnf {
            input,
            mode,
            minimize,
            json,
        } => cmd_dnf(&input, &mode, minimize, json),
        Cmd::Table {
            csv,
            merge_constants,
            dedupe,
            json,
        } => cmd_table(&csv, &merge_constants, dedupe, json),
        Cmd::Gen {
            n,
            m,
            p,
            seed,
            planted,
            out,
        } => cmd_gen(n, m, p, seed, planted).and_then(|s| write_out(out.as_ref(), &s).map(|_| String::new())),
        Cmd::Bench {
            spec,
            drivers,
            repeat,
            cutoff,
            out_csv,
            out_json,
        } => cmd_bench(&spec, &drivers, repeat, cutoff, out_csv, out_json),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = std::env::var("F2FACTOR_THREADS").ok().and_then(|v| v.parse().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Defect(_) => 3,
                _ => 2,
            })
        }
    }
}
