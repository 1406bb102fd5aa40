use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use mibs_core::affine::agl_order;
use mibs_core::bounds::{bounds_report, index_degree_check, BoundsReport, ConstantMode, FamilyParams, IndexReport};
use mibs_core::group::parse_generator_file;
use mibs_core::oracle::natural_pair;
use mibs_core::{
    build_agl, build_coset_action, build_wreath, mibs, verify_certificate, Ambient, ChainCertificate, Error,
    OracleLimits, OracleOptions, PermutationGroup, SubgroupDescription, SubgroupFamily, VerificationReport,
};
use num_bigint::BigUint;
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "mibs", version, about = "Maximum irredundant base sizes of coset actions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a descending chain certificate for an affine or product-action subgroup.
    Chain(ChainArgs),
    /// Compute the maximum irredundant base size exactly.
    Oracle(OracleArgs),
    /// Check a chain certificate level by level.
    Verify(VerifyArgs),
    /// Evaluate closed-form bounds.
    Bounds(BoundsArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ChainFamily {
    Affine,
    Wreath,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SubgroupKind {
    Natural,
    Agl,
    Wreath,
    Explicit,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Text,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Constants {
    LargeN,
    SmallRange,
}

#[derive(Args, Debug, Clone)]
struct Limits {
    /// Largest index |G : H| the oracle accepts.
    #[arg(long, default_value_t = mibs_core::oracle::DEFAULT_INDEX_LIMIT, value_parser = positive)]
    limit_t: usize,
    /// Largest group order enumerated.
    #[arg(long, default_value_t = mibs_core::group::DEFAULT_ENUMERATION_LIMIT, value_parser = positive)]
    limit_enum: usize,
    /// Largest number of memoized subgroups.
    #[arg(long, default_value_t = mibs_core::oracle::DEFAULT_MEMO_LIMIT, value_parser = positive)]
    limit_memo: usize,
}

#[derive(Args, Debug)]
struct ChainArgs {
    #[arg(long, value_enum)]
    family: ChainFamily,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    d: Option<u64>,
    #[arg(long)]
    m: Option<u64>,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long, default_value = "S")]
    ambient: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    limits: Limits,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long, default_value = "S")]
    ambient: String,
    #[arg(long, value_enum)]
    subgroup: SubgroupKind,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    d: Option<u64>,
    #[arg(long)]
    m: Option<u64>,
    #[arg(long)]
    k: Option<u64>,
    /// Generator file for `--subgroup explicit`: degree line, then one cycle string per line.
    #[arg(long)]
    generators: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Try every point at each level instead of one per orbit.
    #[arg(long)]
    no_prune: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Where to write the witness certificate.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    limits: Limits,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    certificate: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long, default_value_t = mibs_core::group::DEFAULT_ENUMERATION_LIMIT, value_parser = positive)]
    limit_enum: usize,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long)]
    n: u64,
    #[arg(long, default_value = "S")]
    ambient: String,
    #[arg(long, value_enum)]
    family: Option<SubgroupKind>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    d: Option<u64>,
    #[arg(long)]
    m: Option<u64>,
    #[arg(long)]
    k: Option<u64>,
    /// Order of the subgroup, as a decimal integer.
    #[arg(long)]
    order_h: Option<String>,
    /// A computed value (oracle result or certificate length) to compare against the bounds.
    #[arg(long)]
    computed: Option<u64>,
    /// Check the inequalities relating n and the index t instead.
    #[arg(long)]
    index_check: bool,
    /// Constant set for the index check; defaults to large-n when n > 100.
    #[arg(long, value_enum)]
    constants: Option<Constants>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

/// Failure carrying its exit code: 1 for a mathematical failure, 2 for usage or limits.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn verification(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::usage(e.to_string())
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("MIBS_LOG", "warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Chain(a) => cmd_chain(&a),
        Command::Oracle(a) => cmd_oracle(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Bounds(a) => cmd_bounds(&a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn require<T: Copy>(value: Option<T>, flag: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::usage(format!("--{flag} is required")))
}

fn write_output(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
    info!("wrote {}", path.display());
    Ok(())
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
}

fn cmd_chain(args: &ChainArgs) -> CliResult {
    let ambient = Ambient::parse(&args.ambient)?;
    let (cert, h) = match args.family {
        ChainFamily::Affine => {
            let ctx = build_agl(require(args.p, "p")?, require(args.d, "d")?)?;
            (ctx.affine_chain(ambient)?, ctx.agl().clone())
        }
        ChainFamily::Wreath => {
            let ctx = build_wreath(require(args.m, "m")?, require(args.k, "k")?)?;
            (ctx.wreath_chain(ambient)?, ctx.group().clone())
        }
    };
    match verify_certificate(&cert, &h, args.limits.limit_enum) {
        Ok(report) if report.passed => info!("self-check passed"),
        Ok(report) => {
            return Err(Failure::verification(format!(
                "built certificate failed its self-check at level {:?}: {}",
                report.first_failing_level(),
                report.failures.join("; ")
            )))
        }
        Err(e @ Error::GroupTooLarge { .. }) => warn!("self-check skipped: {e}"),
        Err(e) => return Err(e.into()),
    }
    let text = cert.to_json();
    match &args.out {
        Some(path) => {
            write_output(path, &text)?;
            println!("claimed_length = {}", cert.claimed_length);
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn subgroup_for(args: &OracleArgs, ambient: Ambient) -> Result<(PermutationGroup, PermutationGroup, SubgroupDescription), Failure> {
    let ambient_group = |n: usize| match ambient {
        Ambient::Symmetric => PermutationGroup::symmetric(n),
        Ambient::Alternating => PermutationGroup::alternating(n),
    };
    let restrict = |h: &PermutationGroup| match ambient {
        Ambient::Symmetric => h.clone(),
        Ambient::Alternating => h.even_part(),
    };
    Ok(match args.subgroup {
        SubgroupKind::Natural => {
            let n = require(args.n, "n")?;
            if n < 2 {
                return Err(Failure::usage("--n must be at least 2"));
            }
            let (g, h) = natural_pair(n, ambient)?;
            let desc = SubgroupDescription::new(SubgroupFamily::Natural, &[("n", n as u64)], h.generators().to_vec());
            (g, h, desc)
        }
        SubgroupKind::Agl => {
            let ctx = build_agl(require(args.p, "p")?, require(args.d, "d")?)?;
            let h = restrict(ctx.agl());
            let mut desc = ctx.description();
            desc.generators = h.generators().to_vec();
            (ambient_group(ctx.degree()), h, desc)
        }
        SubgroupKind::Wreath => {
            let ctx = build_wreath(require(args.m, "m")?, require(args.k, "k")?)?;
            let h = restrict(ctx.group());
            let mut desc = ctx.description();
            desc.generators = h.generators().to_vec();
            (ambient_group(ctx.degree()), h, desc)
        }
        SubgroupKind::Explicit => {
            let path = args
                .generators
                .as_ref()
                .ok_or_else(|| Failure::usage("--generators is required for an explicit subgroup"))?;
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
            let (degree, gens) = parse_generator_file(&text)?;
            let h = PermutationGroup::from_generators(&gens, degree)?;
            let desc = SubgroupDescription::new(SubgroupFamily::Explicit, &[], gens);
            (ambient_group(degree), h, desc)
        }
    })
}

#[derive(Serialize)]
struct OracleOutput {
    mibs: usize,
    degree: usize,
    index: usize,
    witness_points: Vec<usize>,
    memo_entries: usize,
}

fn cmd_oracle(args: &OracleArgs) -> CliResult {
    let ambient = Ambient::parse(&args.ambient)?;
    let (g, h, desc) = subgroup_for(args, ambient)?;
    if h.order() > BigUint::from(args.limits.limit_enum) {
        return Err(Error::GroupTooLarge {
            order: h.order().to_string(),
            limit: args.limits.limit_enum,
        }
        .into());
    }
    let action = build_coset_action(&g, &h, args.limits.limit_t)?;
    let options = OracleOptions {
        limits: OracleLimits {
            max_index: args.limits.limit_t,
            max_enumeration: args.limits.limit_enum,
            max_memo: args.limits.limit_memo,
        },
        prune: !args.no_prune,
        threads: args.threads,
    };
    let result = mibs(&action, &options)?;
    let out = OracleOutput {
        mibs: result.value,
        degree: g.degree(),
        index: action.degree(),
        witness_points: result.points.clone(),
        memo_entries: result.memo_entries,
    };
    match args.format {
        Format::Json => print_json(&out),
        Format::Text => {
            println!("mibs = {}", out.mibs);
            println!("index = {}", out.index);
            println!("witness base = {:?}", out.witness_points);
        }
    }
    if let Some(path) = &args.out {
        let cert = result.certificate(g.degree(), ambient, desc);
        write_output(path, &cert.to_json())?;
    }
    Ok(())
}

fn print_verification(report: &VerificationReport) {
    println!("{:>5}  {:>12}  {:>12}  {:>6}", "level", "claimed", "computed", "status");
    for level in &report.levels {
        println!(
            "{:>5}  {:>12}  {:>12}  {:>6}",
            level.index,
            level.claimed_order,
            level.computed_order,
            if level.passed { "ok" } else { "FAIL" }
        );
    }
    println!("terminal trivial: {}", report.terminal_trivial);
    println!("length matches: {}", report.length_matches);
    println!("result: {}", if report.passed { "PASS" } else { "FAIL" });
}

fn cmd_verify(args: &VerifyArgs) -> CliResult {
    let text = fs::read_to_string(&args.certificate)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", args.certificate.display())))?;
    let cert = ChainCertificate::from_json(&text)?;
    let h = match cert.subgroup_group() {
        Ok(h) => h,
        Err(e @ Error::InvalidCertificate(_)) => return Err(Failure::verification(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    let report = verify_certificate(&cert, &h, args.limit_enum)?;
    match args.format {
        Format::Json => print_json(&report),
        Format::Text => print_verification(&report),
    }
    if report.passed {
        return Ok(());
    }
    let reason = match report.first_failing_level() {
        Some(level) => format!("level {level} failed"),
        None => report.failures.join("; "),
    };
    Err(Failure::verification(reason))
}

fn family_params(args: &BoundsArgs) -> Result<(FamilyParams, Option<BigUint>), Failure> {
    Ok(match args.family {
        None | Some(SubgroupKind::Natural) | Some(SubgroupKind::Explicit) => (FamilyParams::None, None),
        Some(SubgroupKind::Agl) => {
            let (p, d) = (require(args.p, "p")?, require(args.d, "d")?);
            (FamilyParams::Agl { p, d }, Some(agl_order(p, d)))
        }
        Some(SubgroupKind::Wreath) => {
            let (m, k) = (require(args.m, "m")?, require(args.k, "k")?);
            if m < 2 || k < 1 {
                return Err(Failure::usage("need m >= 2 and k >= 1"));
            }
            let factorial: BigUint = (1..=m).map(BigUint::from).product();
            let top: BigUint = (1..=k).map(BigUint::from).product();
            (FamilyParams::Wreath { m, k }, Some(factorial.pow(k as u32) * top))
        }
    })
}

fn parse_order(text: &str) -> Result<BigUint, Failure> {
    text.parse::<BigUint>()
        .ok()
        .filter(|o| *o > BigUint::from(0u32))
        .ok_or_else(|| Failure::usage(format!("--order-h must be a positive integer, got `{text}`")))
}

fn print_bounds(r: &BoundsReport) {
    let mut rows: Vec<(String, String)> = vec![
        ("n".into(), r.n.to_string()),
        ("ambient".into(), r.ambient.tag().into()),
        ("epsilon".into(), r.epsilon.to_string()),
        ("omega(n-1)".into(), r.omega_n_minus_1.to_string()),
        ("binary weight".into(), r.binary_weight.to_string()),
        ("chain length l(G)".into(), r.length.to_string()),
        ("large subgroup".into(), r.large.to_string()),
        ("general bound".into(), format!("{:.2}", r.general_bound)),
    ];
    if let Some(a) = &r.affine {
        rows.push(("affine window".into(), format!("[{}, {}]", a.lower(), a.max_integer())));
    }
    if let Some((lo, hi)) = r.wreath {
        rows.push(("product-action window".into(), format!("[{lo}, {hi:.2}]")));
    }
    if let Some(m) = r.maximal {
        rows.push(("maximal".into(), m.to_string()));
    }
    if let Some(po) = &r.primitive_order {
        rows.push(("primitive order bound".into(), po.general.holds.to_string()));
    }
    for c in &r.comparisons {
        rows.push((c.formula.clone(), format!("{:.4} vs {:.4}: {}", c.lhs, c.rhs, c.holds)));
    }
    print_rows(&rows);
}

fn print_index(r: &IndexReport) {
    let mut rows: Vec<(String, String)> = vec![
        ("n".into(), r.n.to_string()),
        ("log2 t".into(), format!("{:.6}", r.log_t)),
        ("log2 log2 t".into(), format!("{:.6}", r.log_log_t)),
    ];
    for c in &r.comparisons {
        rows.push((c.formula.clone(), format!("{:.4} vs {:.4}: {}", c.lhs, c.rhs, c.holds)));
    }
    rows.push(("all hold".into(), r.all_hold.to_string()));
    if r.partial {
        rows.push(("note".into(), "small-range constants, checked on this family only".into()));
    }
    print_rows(&rows);
}

fn print_rows(rows: &[(String, String)]) {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in rows {
        println!("{k:<width$}  {v}");
    }
}

fn cmd_bounds(args: &BoundsArgs) -> CliResult {
    let ambient = Ambient::parse(&args.ambient)?;
    if args.n < 7 {
        return Err(Failure::usage(format!("bounds require n >= 7, got {}", args.n)));
    }
    let (family, family_order) = family_params(args)?;
    let order = match &args.order_h {
        Some(text) => Some(parse_order(text)?),
        None => family_order,
    };
    if args.index_check {
        let order = order.ok_or_else(|| Failure::usage("--index-check needs --order-h or a family"))?;
        let mode = match args.constants {
            Some(Constants::LargeN) => ConstantMode::LargeN,
            Some(Constants::SmallRange) => ConstantMode::SmallRange,
            None if args.n > 100 => ConstantMode::LargeN,
            None => ConstantMode::SmallRange,
        };
        let report = index_degree_check(args.n, &order, ambient, mode)?;
        match args.format {
            Format::Json => print_json(&report),
            Format::Text => print_index(&report),
        }
        return Ok(());
    }
    let report = bounds_report(args.n, ambient, family, order.as_ref(), args.computed)?;
    match args.format {
        Format::Json => print_json(&report),
        Format::Text => print_bounds(&report),
    }
    Ok(())
}
