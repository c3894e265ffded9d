use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use avbounds::auxbound::BoundCertificate;
use avbounds::chebyshev::{closed_form, growth_rate, ChebyshevFamily};
use avbounds::config::{OutputFormat, RunConfig};
use avbounds::enumerate::{enumerate_orbits, load_cache, save_cache, OrbitSet, Side};
use avbounds::lpopt::{build_lp, optimize_and_certify, solve_with_log, Optimized};
use avbounds::paperlab::{
    audit_side, new_points_scan, published_system, refit_tables, reproduce_tables, torsion_from_tables,
    SUPPORTED_Q,
};
use avbounds::weil::FieldSize;
use avbounds::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

/// Writes to standard output; a closed pipe ends the process quietly.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: writing output: {e}");
        std::process::exit(EXIT_INTERNAL as i32);
    }
}

macro_rules! out {
    ($($t:tt)*) => { emit(&format!($($t)*)) };
}

macro_rules! outln {
    ($($t:tt)*) => { emit(&format!("{}\n", format_args!($($t)*))) };
}

const EXIT_DISCREPANCY: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(name = "avbounds", version, about = "Certified point-count bounds for simple abelian varieties over small finite fields")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Config file of key = value lines (default: ./avbounds.conf if present)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Certification tolerance, e.g. 1e-4
    #[arg(long, global = true)]
    tolerance: Option<String>,
    #[arg(long, global = true)]
    mesh_size: Option<usize>,
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Print solver diagnostics to standard error
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Lower,
    Upper,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Lower => Side::Lower,
            SideArg::Upper => Side::Upper,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Certify the lower and/or upper bound for one q
    Bounds {
        #[arg(long)]
        q: u64,
        #[arg(long, value_enum)]
        side: Option<SideArg>,
        /// Use the published auxiliary systems (default)
        #[arg(long, conflicts_with = "optimize")]
        from_paper: bool,
        /// Choose polynomials from enumerated orbits and fit exponents
        #[arg(long)]
        optimize: bool,
        /// Degree of the enumerated pool for --optimize
        #[arg(long, default_value_t = 3)]
        pool_degree: usize,
        /// Number of extremal pool orbits used for --optimize
        #[arg(long, default_value_t = 6)]
        pool_size: usize,
        /// Also write the certificate JSON to this file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List all orbits up to a degree
    Enumerate {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        max_degree: usize,
        /// Write the orbit cache file here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shifted Chebyshev polynomial data
    Chebyshev {
        #[arg(long = "N")]
        shift: u64,
        #[arg(long)]
        ell: usize,
    },
    /// Reproduce and audit the published tables
    VerifyPaper {
        #[arg(long, default_value = "all")]
        table: String,
        /// Also write the JSON report to this file
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Scan for varieties without new points over extensions
    NewPoints {
        #[arg(long)]
        degree_cap: Option<usize>,
    },
    /// Bound on rational 2-torsion over F_3
    Torsion,
}

/// A failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidInput(_) | Error::Parse { .. } => EXIT_USAGE,
            _ => EXIT_INTERNAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn config(g: &GlobalArgs) -> CliResult<RunConfig> {
    let mut c = RunConfig::load(g.config.as_deref())?;
    c.apply_env();
    if let Some(f) = g.format {
        c.output_format = match f {
            Format::Text => OutputFormat::Text,
            Format::Json => OutputFormat::Json,
        };
    }
    if let Some(t) = &g.tolerance {
        c.set("tolerance", t)?;
    }
    if let Some(m) = g.mesh_size {
        c.set("mesh_size", &m.to_string())?;
    }
    if let Some(d) = &g.cache_dir {
        c.cache_dir = d.clone();
    }
    Ok(c)
}

fn field(q: u64) -> CliResult<FieldSize> {
    FieldSize::new(q).map_err(|e| usage(e.to_string()))
}

fn sides(side: Option<SideArg>) -> Vec<Side> {
    match side {
        Some(s) => vec![s.into()],
        None => vec![Side::Lower, Side::Upper],
    }
}

fn print_json(v: &Value) -> CliResult<()> {
    let s = serde_json::to_string_pretty(v).map_err(Error::from)?;
    outln!("{s}");
    Ok(())
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| {
        Failure::from(Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    })
}

fn run(cli: Cli) -> CliResult<u8> {
    let cfg = config(&cli.global)?;
    let verbose = cli.global.verbose;
    match cli.command {
        Command::Bounds {
            q,
            side,
            from_paper: _,
            optimize,
            pool_degree,
            pool_size,
            out,
        } => {
            let fq = field(q)?;
            if optimize {
                bounds_optimized(&cfg, fq, sides(side), pool_degree, pool_size, out, verbose)
            } else {
                if !SUPPORTED_Q.contains(&q) {
                    return Err(usage(format!(
                        "no published system for q = {q}; supported values: {}",
                        SUPPORTED_Q.map(|v| v.to_string()).join(", ")
                    )));
                }
                bounds_published(&cfg, fq, sides(side), out)
            }
        }
        Command::Enumerate { q, max_degree, out } => enumerate(&cfg, field(q)?, max_degree, out),
        Command::Chebyshev { shift, ell } => chebyshev(&cfg, shift, ell),
        Command::VerifyPaper { table, json_out } => verify_paper(&cfg, &table, json_out),
        Command::NewPoints { degree_cap } => new_points(&cfg, degree_cap.unwrap_or(cfg.degree_cap)),
        Command::Torsion => torsion(&cfg),
    }
}

fn certificate_text(cert: &BoundCertificate) -> String {
    let mut s = String::new();
    let name = match cert.side() {
        Side::Lower => "m",
        Side::Upper => "M",
    };
    let _ = writeln!(s, "q = {}, {} bound: {name} {}", cert.q(), cert.side(), cert.marked());
    let terms: Vec<String> = cert
        .system
        .polynomials
        .iter()
        .zip(&cert.system.exponents)
        .map(|(p, e)| format!("({p})^{}", avbounds::auxbound::rational_decimal(e)))
        .collect();
    if !terms.is_empty() {
        let _ = writeln!(s, "  auxiliary polynomials: {}", terms.join(", "));
    }
    let _ = writeln!(s, "  tolerance {}, subdivision depth {}", avbounds::auxbound::rational_decimal(&cert.tolerance), cert.subdivision_depth);
    for e in &cert.exceptions {
        let _ = writeln!(
            s,
            "  exception: {} (normalized norm {}{})",
            e.poly,
            e.normalized_norm,
            if e.violates { ", breaks the bound" } else { "" }
        );
    }
    for w in &cert.warnings {
        let _ = writeln!(s, "  note: {w}");
    }
    s
}

fn emit_certificates(cfg: &RunConfig, certs: &[BoundCertificate], extra_text: &[String], out: Option<PathBuf>) -> CliResult<()> {
    let docs: Vec<Value> = certs
        .iter()
        .map(|c| c.to_document().and_then(|d| Ok(serde_json::to_value(d)?)))
        .collect::<Result<_, Error>>()?;
    let doc = if docs.len() == 1 { docs[0].clone() } else { Value::Array(docs) };
    if let Some(path) = out {
        let text = serde_json::to_string_pretty(&doc).map_err(Error::from)?;
        write_file(&path, &(text + "\n"))?;
    }
    match cfg.output_format {
        OutputFormat::Json => print_json(&doc)?,
        OutputFormat::Text => {
            for (c, extra) in certs.iter().zip(extra_text) {
                out!("{}{}", certificate_text(c), extra);
            }
        }
    }
    Ok(())
}

fn bounds_published(cfg: &RunConfig, q: FieldSize, sides: Vec<Side>, out: Option<PathBuf>) -> CliResult<u8> {
    let mut certs = Vec::new();
    let mut extra = Vec::new();
    for side in sides {
        let sys = published_system(q, side)?;
        let audit = audit_side(&sys, &cfg.tolerance)?;
        let mut s = format!("  printed bound: {}\n", sys.bound_text);
        for n in &sys.notes {
            let _ = writeln!(s, "  fixture note: {n}");
        }
        for d in &audit.discrepancies {
            let tag = if d.annotated { "annotated" } else { "discrepancy" };
            let _ = writeln!(s, "  {tag} [{:?}]: {}", d.kind, d.message);
        }
        certs.push(audit.certificate);
        extra.push(s);
    }
    emit_certificates(cfg, &certs, &extra, out)?;
    Ok(0)
}

fn cached_pool(cfg: &RunConfig, q: FieldSize, degree: usize, verbose: u8) -> CliResult<OrbitSet> {
    let path = cfg.cache_dir.join(format!("orbits-q{}-d{degree}.txt", q.q()));
    if path.exists() {
        match load_cache(&path) {
            Ok(set) if set.q() == q && set.max_degree() == degree => return Ok(set),
            Ok(_) => eprintln!("warning: cache {} does not match; re-enumerating", path.display()),
            Err(e) => eprintln!("warning: ignoring unreadable cache: {e}"),
        }
    }
    let set = enumerate_orbits(q, degree)?;
    if let Err(e) = std::fs::create_dir_all(&cfg.cache_dir)
        .map_err(|e| Error::Io {
            path: cfg.cache_dir.clone(),
            source: e,
        })
        .and_then(|_| save_cache(&set, &path))
    {
        eprintln!("warning: could not write cache: {e}");
    } else if verbose > 0 {
        eprintln!("cached {} orbits at {}", set.len(), path.display());
    }
    Ok(set)
}

fn bounds_optimized(
    cfg: &RunConfig,
    q: FieldSize,
    sides: Vec<Side>,
    pool_degree: usize,
    pool_size: usize,
    out: Option<PathBuf>,
    verbose: u8,
) -> CliResult<u8> {
    if pool_size == 0 {
        return Err(usage("pool size must be positive"));
    }
    let pool = cached_pool(cfg, q, pool_degree, verbose)?;
    let mut certs = Vec::new();
    let mut extra = Vec::new();
    for side in sides {
        let Optimized {
            solution,
            certificate,
            dropped,
        } = optimize_and_certify(q, side, &pool, pool_size, cfg.mesh_size, &cfg.tolerance)?;
        if verbose > 0 {
            let polys: Vec<_> = certificate
                .system
                .polynomials
                .iter()
                .chain(&dropped)
                .cloned()
                .collect();
            let lp = build_lp(q, side, polys, cfg.mesh_size)?;
            let mut log = String::new();
            solve_with_log(&lp, Some(&mut log))?;
            eprint!("{log}");
        }
        let mut s = format!(
            "  mesh objective: {:.6} ({} pivots)\n",
            solution.objective.exp(),
            solution.pivots
        );
        if !dropped.is_empty() {
            let names: Vec<String> = dropped.iter().map(|p| p.to_string()).collect();
            let _ = writeln!(s, "  dropped (exponent below 1e-4): {}", names.join(", "));
        }
        certs.push(certificate);
        extra.push(s);
    }
    emit_certificates(cfg, &certs, &extra, out)?;
    Ok(0)
}

fn enumerate(cfg: &RunConfig, q: FieldSize, max_degree: usize, out: Option<PathBuf>) -> CliResult<u8> {
    let set = enumerate_orbits(q, max_degree)?;
    if let Some(path) = &out {
        save_cache(&set, path)?;
    }
    match cfg.output_format {
        OutputFormat::Json => {
            let lines: Vec<String> = set.iter().map(|o| o.to_line()).collect();
            let counts: serde_json::Map<String, Value> = set
                .counts_by_degree()
                .into_iter()
                .map(|(d, n)| (d.to_string(), json!(n)))
                .collect();
            print_json(&json!({
                "q": q.q(),
                "max_degree": max_degree,
                "count": set.len(),
                "counts_by_degree": counts,
                "orbits": lines,
            }))?;
        }
        OutputFormat::Text => {
            for o in set.iter() {
                outln!("{}", o.to_line());
            }
            let counts: Vec<String> = set
                .counts_by_degree()
                .into_iter()
                .map(|(d, n)| format!("degree {d}: {n}"))
                .collect();
            outln!("# {} orbits for q = {} ({})", set.len(), q, counts.join(", "));
        }
    }
    Ok(0)
}

fn chebyshev(cfg: &RunConfig, shift: u64, ell: usize) -> CliResult<u8> {
    let fam = ChebyshevFamily::new(ell, shift)?;
    let rate = growth_rate(ell, shift)?;
    let limit = closed_form(shift);
    let translate = fam.translate();
    let norm = fam.normalized_norm();
    match cfg.output_format {
        OutputFormat::Json => print_json(&json!({
            "family": fam,
            "growth_rate": format!("{rate:.6}"),
            "limit": format!("{limit:.6}"),
            "bracket": [format!("{:.6}", shift as f64 + 2.0 - 1.0 / shift as f64), format!("{:.6}", shift as f64 + 2.0)],
            "translate": translate.to_string(),
            "translate_normalized_norm": format!("{norm:.6}"),
        }))?,
        OutputFormat::Text => {
            outln!("P_{ell} = {}", fam.p_n);
            match &fam.r_n {
                Some(r) => outln!("R_{ell} = P_{ell} / (x - 2) = {r}"),
                None => outln!("R_{ell}: none ({ell} is not an odd prime)"),
            }
            outln!("|P_{ell}(-{shift})|^(1/{ell}) = {rate:.6}");
            outln!("limit (1 + N/2) + sqrt((1 + N/2)^2 - 1) = {limit:.6}");
            outln!("translate {translate}: normalized norm {norm:.6}");
        }
    }
    Ok(0)
}

fn parse_tables(s: &str) -> CliResult<Vec<u8>> {
    match s {
        "all" => Ok(vec![1, 2, 3]),
        "1" | "2" | "3" => Ok(vec![s.parse().unwrap_or(1)]),
        _ => Err(usage(format!("--table must be 1, 2, 3 or all, not {s:?}"))),
    }
}

fn verify_paper(cfg: &RunConfig, table: &str, json_out: Option<PathBuf>) -> CliResult<u8> {
    let tables = parse_tables(table)?;
    let report = reproduce_tables(&cfg.tolerance)?;
    let refit = if tables.contains(&3) {
        Some(refit_tables(cfg.mesh_size, &cfg.tolerance)?)
    } else {
        None
    };
    let doc = json!({
        "tables": tables,
        "report": report,
        "refit": refit,
    });
    if let Some(path) = &json_out {
        let text = serde_json::to_string_pretty(&doc).map_err(Error::from)?;
        write_file(path, &(text + "\n"))?;
    }
    match cfg.output_format {
        OutputFormat::Json => print_json(&doc)?,
        OutputFormat::Text => {
            out!("{}", report.render(&tables));
            if let Some(rows) = &refit {
                outln!("\nexponents re-fitted on a mesh of {} points", cfg.mesh_size);
                for r in rows {
                    outln!(
                        "  q={} {}: mesh {} certified {} printed {} exponents {}",
                        r.q,
                        r.side,
                        r.lp_objective,
                        r.certified,
                        r.printed,
                        r.exponents.join(", ")
                    );
                }
            }
        }
    }
    let contradiction = tables.contains(&1) && report.has_contradiction();
    Ok(if contradiction { EXIT_DISCREPANCY } else { 0 })
}

fn new_points(cfg: &RunConfig, degree_cap: usize) -> CliResult<u8> {
    let report = new_points_scan(degree_cap)?;
    match cfg.output_format {
        OutputFormat::Json => print_json(&serde_json::to_value(&report).map_err(Error::from)?)?,
        OutputFormat::Text => {
            let fmt = |v: &[(u64, u32)]| v.iter().map(|(q, r)| format!("({q},{r})")).collect::<Vec<_>>().join(" ");
            outln!("pairs passing the divisor-count test: {}", fmt(&report.candidate_pairs));
            outln!("pairs passing the sum test: {}", fmt(&report.surviving_pairs));
            for e in &report.exceptional_orbits {
                outln!(
                    "  q={} r={}: {} has no new points (#A(F_q^r) = {}, subfields {}, #A(F_q) = {})",
                    e.q, e.r, e.orbit, e.count, e.subfield_count, e.base_count
                );
            }
            outln!("orbits of degree above {} were not examined", report.degree_cap);
        }
    }
    Ok(0)
}

fn torsion(cfg: &RunConfig) -> CliResult<u8> {
    let (bound, cert) = torsion_from_tables(&cfg.tolerance)?;
    let text = avbounds::exact::format_directed(&bound, 3, true);
    match cfg.output_format {
        OutputFormat::Json => print_json(&json!({
            "torsion_bound": format!("≤{text}"),
            "upper_bound_q9": cert.bound_text(),
            "weil_fallback": cert.bound_f64() > 16.0,
        }))?,
        OutputFormat::Text => {
            outln!("#A(F_3)[2] ≤{text}^g");
            outln!("  from M(9) {}{}", cert.marked(), if cert.bound_f64() > 16.0 { ", above the Weil value 16, so 16 is used" } else { "" });
        }
    }
    Ok(0)
}
