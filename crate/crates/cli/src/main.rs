//! Batch command-line front end: constructions, verification, bound tables,
//! and proof-machinery audits with machine-readable output.
//!
//! Exit codes: 0 on pass, 1 on verification failure, 2 on usage errors.
//! Identical invocations (including seeds) produce byte-identical output;
//! KAKEYA_THREADS caps the internal worker pool.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;

use kakeya_core::geometry::Direction;
use kakeya_core::gf::{prime_power_split, Field};
use kakeya_core::kakeya::{
    bounds, construct_almost_kakeya_odd, construct_kakeya_recursive, is_almost_kakeya, is_kakeya,
    minimal_kakeya_2d, recursive_expectation_bound, select_lines, BoundReport, PointSet,
    PointSetDoc, SelectedLineDoc, ShiftStrategy,
};
use kakeya_core::poly::compositions;
use kakeya_core::proofcheck::{
    assemble_order2_system, assemble_vanishing_system, dim_v_closed_form, monomial_set_3d,
    monomial_set_general, polytope_count, polytope_volume_exact, theorem_inequality_audit,
    verify_lemma_3dim, verify_zero_lemma, PolytopeRegion, RegionKind, VanishingOrderSpec,
    ALL_REGIONS,
};
use kakeya_core::rational::{decimal_string, fraction_string, from_u64};

#[derive(Parser)]
#[command(
    name = "kakeya",
    version,
    about = "Exact-arithmetic toolkit for Kakeya sets over finite fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Almost,
    Kakeya,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Strategy {
    Exhaustive,
    Sampled,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Lemma3Set {
    /// The full space F_q^3.
    Full,
    /// The recursive Kakeya construction (odd q).
    Recursive,
}

#[derive(Subcommand)]
enum Command {
    /// Print the size-bound table for a (q, n) pair
    Bounds {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a set, self-verify it, and emit it as JSON with its size bound
    Construct {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Strategy::Exhaustive)]
        strategy: Strategy,
        /// Seed for the sampled strategy
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of candidate shifts for the sampled strategy
        #[arg(long, default_value_t = 64)]
        trials: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a point-set JSON file for the Kakeya and almost-Kakeya properties
    Verify {
        file: PathBuf,
        /// Which verdict gates the exit code
        #[arg(long, value_enum, default_value_t = Kind::Kakeya)]
        kind: Kind,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one proof-machinery audit and report pass/fail with exact numbers
    Audit {
        #[command(subcommand)]
        which: Audit,
    },
    /// Run the whole verification grid and emit one summary CSV
    Report {
        /// Required flag selecting the full grid
        #[arg(long)]
        all: bool,
        #[arg(long, default_value_t = 5)]
        qmax: u64,
        #[arg(long, default_value_t = 3)]
        nmax: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Audit {
    /// Kernel triviality of the order-2 system over the 3-D basis
    Lemma3 {
        #[arg(long)]
        q: u64,
        #[arg(long, value_enum, default_value_t = Lemma3Set::Full)]
        set: Lemma3Set,
        /// Dump the assembled condition matrix to a file
        #[arg(long)]
        emit_matrix: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Kernel triviality of the order-(r, (2-1/q)r) system
    Zerolemma {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: u64,
        /// Dump the assembled condition matrix to a file
        #[arg(long)]
        emit_matrix: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lattice counts, the disjoint-union identity, and exact volumes
    Polytopes {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        r: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Basis enumeration against the closed-form dimension
    Dimv {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        r: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive minimum Kakeya size in dimension 2
    Minimal2d {
        #[arg(long)]
        q: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Equivalence of the final inequality with its rearranged form
    Inequality {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A usage-class failure: bad parameters, bad input files, I/O trouble.
struct UsageError(String);

impl From<kakeya_core::Error> for UsageError {
    fn from(e: kakeya_core::Error) -> Self {
        UsageError(e.to_string())
    }
}

impl From<std::io::Error> for UsageError {
    fn from(e: std::io::Error) -> Self {
        UsageError(e.to_string())
    }
}

type CmdResult = Result<bool, UsageError>;

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() {
    if let Ok(raw) = std::env::var("KAKEYA_THREADS") {
        match raw.parse::<usize>() {
            Ok(threads) if threads >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
            _ => eprintln!("warning: ignoring invalid KAKEYA_THREADS value `{raw}`"),
        }
    }
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Bounds { q, n, format, out } => cmd_bounds(q, n, format, out.as_deref()),
        Command::Construct {
            kind,
            q,
            n,
            strategy,
            seed,
            trials,
            format,
            out,
        } => cmd_construct(kind, q, n, strategy, seed, trials, format, out.as_deref()),
        Command::Verify {
            file,
            kind,
            format,
            out,
        } => cmd_verify(&file, kind, format, out.as_deref()),
        Command::Audit { which } => match which {
            Audit::Lemma3 {
                q,
                set,
                emit_matrix,
                format,
                out,
            } => audit_lemma3(q, set, emit_matrix.as_deref(), format, out.as_deref()),
            Audit::Zerolemma {
                q,
                n,
                r,
                emit_matrix,
                format,
                out,
            } => audit_zerolemma(q, n, r, emit_matrix.as_deref(), format, out.as_deref()),
            Audit::Polytopes {
                n,
                q,
                r,
                format,
                out,
            } => audit_polytopes(n, q, r, format, out.as_deref()),
            Audit::Dimv {
                n,
                q,
                r,
                format,
                out,
            } => audit_dimv(n, q, r, format, out.as_deref()),
            Audit::Minimal2d { q, format, out } => audit_minimal2d(q, format, out.as_deref()),
            Audit::Inequality { q, n, format, out } => {
                audit_inequality(q, n, format, out.as_deref())
            }
        },
        Command::Report {
            all,
            qmax,
            nmax,
            out,
        } => {
            if !all {
                return Err(UsageError("report requires --all".into()));
            }
            cmd_report(qmax, nmax, out.as_deref())
        }
    }
}

fn emit(out: Option<&Path>, content: &str) -> Result<(), UsageError> {
    let content = if content.ends_with('\n') {
        content.to_string()
    } else {
        format!("{content}\n")
    };
    match out {
        Some(path) => fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn reject_csv(format: Format) -> Result<(), UsageError> {
    if format == Format::Csv {
        Err(UsageError("csv output is only available for `bounds` and `report`".into()))
    } else {
        Ok(())
    }
}

// --- bounds -----------------------------------------------------------------

#[derive(Serialize)]
struct BoundRowDoc {
    name: String,
    numerator: String,
    denominator: String,
    decimal: String,
}

#[derive(Serialize)]
struct BoundsDoc {
    q: u64,
    n: u32,
    bounds: Vec<BoundRowDoc>,
}

fn bound_rows_doc(report: &BoundReport) -> Vec<BoundRowDoc> {
    report
        .rows()
        .into_iter()
        .map(|(name, value)| BoundRowDoc {
            name: name.to_string(),
            numerator: value.numer().to_string(),
            denominator: value.denom().to_string(),
            decimal: decimal_string(&value, 6),
        })
        .collect()
}

fn cmd_bounds(q: u64, n: u32, format: Format, out: Option<&Path>) -> CmdResult {
    if n < 1 {
        return Err(UsageError("n must be at least 1".into()));
    }
    let report = bounds(q, n)?;
    let rows = bound_rows_doc(&report);
    let rendered = match format {
        Format::Text => {
            let mut s = format!("q={q} n={n}\n");
            for row in &rows {
                let _ = writeln!(
                    s,
                    "{:<26} {}/{} = {}",
                    row.name, row.numerator, row.denominator, row.decimal
                );
            }
            s
        }
        Format::Csv => {
            let mut s = String::from("q,n,bound_name,numerator,denominator,decimal\n");
            for row in &rows {
                let _ = writeln!(
                    s,
                    "{q},{n},{},{},{},{}",
                    row.name, row.numerator, row.denominator, row.decimal
                );
            }
            s
        }
        Format::Json => serde_json::to_string_pretty(&BoundsDoc { q, n, bounds: rows })
            .expect("serialization cannot fail"),
    };
    emit(out, &rendered)?;
    Ok(true)
}

// --- construct ---------------------------------------------------------------

#[derive(Serialize)]
struct ConstructDoc {
    #[serde(flatten)]
    set: PointSetDoc,
    kind: &'static str,
    size: usize,
    bound_name: &'static str,
    bound: String,
    bound_decimal: String,
    slack: String,
    verified: bool,
    witness: Vec<SelectedLineDoc>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_construct(
    kind: Kind,
    q: u64,
    n: usize,
    strategy: Strategy,
    seed: u64,
    trials: u64,
    format: Format,
    out: Option<&Path>,
) -> CmdResult {
    reject_csv(format)?;
    if n < 1 {
        return Err(UsageError("n must be at least 1".into()));
    }
    let field = Field::new(q)?;
    let shift = match strategy {
        Strategy::Exhaustive => ShiftStrategy::Exhaustive,
        Strategy::Sampled => ShiftStrategy::Sampled { seed, trials },
    };
    let (set, witness, verified, kind_name) = match kind {
        Kind::Almost => {
            let (set, witness) = construct_almost_kakeya_odd(&field, n)?;
            let verified = is_almost_kakeya(&set)?.is_covered();
            (set, witness, verified, "almost")
        }
        Kind::Kakeya => {
            let set = construct_kakeya_recursive(&field, n, shift)?;
            let verdict = is_kakeya(&set)?;
            let verified = verdict.is_covered();
            let witness = verdict.witness().cloned().unwrap_or_default();
            (set, witness, verified, "kakeya")
        }
    };
    let report = bounds(q, n as u32)?;
    let bound = report.new_bound.clone();
    let slack = from_u64(set.len() as u64) - &bound;
    let doc = ConstructDoc {
        set: set.to_doc(),
        kind: kind_name,
        size: set.len(),
        bound_name: "new",
        bound: fraction_string(&bound),
        bound_decimal: decimal_string(&bound, 6),
        slack: fraction_string(&slack),
        verified,
        witness: witness.to_doc(),
    };
    let rendered = match format {
        Format::Json => serde_json::to_string_pretty(&doc).expect("serialization cannot fail"),
        Format::Text => format!(
            "kind={} q={q} n={n}\nsize={}\nbound new = {} = {}\nslack={}\nverified={}\n",
            doc.kind, doc.size, doc.bound, doc.bound_decimal, doc.slack, doc.verified
        ),
        Format::Csv => unreachable!("rejected above"),
    };
    emit(out, &rendered)?;
    Ok(verified)
}

// --- verify --------------------------------------------------------------------

#[derive(Serialize)]
struct VerifyDoc {
    q: u64,
    n: usize,
    size: usize,
    kakeya: bool,
    kakeya_failing_direction: Option<Vec<u64>>,
    almost_kakeya: bool,
    almost_failing_direction: Option<Vec<u64>>,
}

fn cmd_verify(file: &Path, kind: Kind, format: Format, out: Option<&Path>) -> CmdResult {
    reject_csv(format)?;
    let raw = fs::read_to_string(file)?;
    let doc: PointSetDoc =
        serde_json::from_str(&raw).map_err(|e| UsageError(format!("cannot parse {file:?}: {e}")))?;
    let set = PointSet::from_doc(&doc)?;
    let kakeya_verdict = is_kakeya(&set)?;
    let almost_verdict = is_almost_kakeya(&set)?;
    let doc = VerifyDoc {
        q: set.field().q(),
        n: set.n(),
        size: set.len(),
        kakeya: kakeya_verdict.is_covered(),
        kakeya_failing_direction: kakeya_verdict
            .failing_direction()
            .map(|d: &Direction| d.coords().to_vec()),
        almost_kakeya: almost_verdict.is_covered(),
        almost_failing_direction: almost_verdict
            .failing_direction()
            .map(|d| d.coords().to_vec()),
    };
    let rendered = match format {
        Format::Json => serde_json::to_string_pretty(&doc).expect("serialization cannot fail"),
        Format::Text => {
            let mut s = format!("q={} n={} size={}\n", doc.q, doc.n, doc.size);
            match &doc.kakeya_failing_direction {
                None => {
                    let _ = writeln!(s, "kakeya: true");
                }
                Some(d) => {
                    let _ = writeln!(s, "kakeya: false (missing direction {d:?})");
                }
            }
            match &doc.almost_failing_direction {
                None => {
                    let _ = writeln!(s, "almost_kakeya: true");
                }
                Some(d) => {
                    let _ = writeln!(s, "almost_kakeya: false (missing direction {d:?})");
                }
            }
            s
        }
        Format::Csv => unreachable!("rejected above"),
    };
    emit(out, &rendered)?;
    Ok(match kind {
        Kind::Kakeya => doc.kakeya,
        Kind::Almost => doc.almost_kakeya,
    })
}

// --- audits ----------------------------------------------------------------------

fn render_audit(
    format: Format,
    out: Option<&Path>,
    text: String,
    json: serde_json::Value,
) -> Result<(), UsageError> {
    let rendered = match format {
        Format::Text => text,
        Format::Json => serde_json::to_string_pretty(&json).expect("serialization cannot fail"),
        Format::Csv => unreachable!("audits reject csv earlier"),
    };
    emit(out, &rendered)
}

fn audit_lemma3(
    q: u64,
    which: Lemma3Set,
    emit_matrix: Option<&Path>,
    format: Format,
    out: Option<&Path>,
) -> CmdResult {
    reject_csv(format)?;
    let field = Field::new(q)?;
    let set = match which {
        Lemma3Set::Full => PointSet::full_space(field.clone(), 3)?,
        Lemma3Set::Recursive => construct_kakeya_recursive(&field, 3, ShiftStrategy::Exhaustive)?,
    };
    let report = verify_lemma_3dim(&set)?;
    if let Some(path) = emit_matrix {
        let basis = monomial_set_3d(q)?;
        let system = assemble_order2_system(&basis, &set)?;
        let mut buf = Vec::new();
        system.emit_matrix(3, &mut buf)?;
        fs::write(path, buf)?;
    }
    let ok = report.kernel_trivial && report.corollary_ok;
    let text = format!(
        "lemma3 q={q} set_size={}\ndim_v={} conditions={} rank={} kernel_dim={}\n\
         kernel_trivial={} corollary_4K_ge_dimV={}\nresult: {}\n",
        report.set_size,
        report.dim_v,
        report.conditions,
        report.rank,
        report.kernel_dim,
        report.kernel_trivial,
        report.corollary_ok,
        pass_str(ok),
    );
    let json = serde_json::json!({
        "audit": "lemma3",
        "q": q,
        "set_size": report.set_size,
        "dim_v": report.dim_v,
        "conditions": report.conditions,
        "rank": report.rank,
        "kernel_dim": report.kernel_dim,
        "kernel_trivial": report.kernel_trivial,
        "corollary_ok": report.corollary_ok,
        "ok": ok,
    });
    render_audit(format, out, text, json)?;
    Ok(ok)
}

fn audit_zerolemma(
    q: u64,
    n: usize,
    r: u64,
    emit_matrix: Option<&Path>,
    format: Format,
    out: Option<&Path>,
) -> CmdResult {
    reject_csv(format)?;
    let field = Field::new(q)?;
    // Even q: the quadratic construction needs odd characteristic, so audit
    // the full space; odd q: audit the constructed almost-Kakeya set with
    // its own witness lines.
    let (set, witness) = if field.p() == 2 {
        (PointSet::full_space(field.clone(), n)?, None)
    } else {
        let (set, witness) = construct_almost_kakeya_odd(&field, n)?;
        (set, Some(witness))
    };
    let report = verify_zero_lemma(&set, witness.as_ref(), r)?;
    if let Some(path) = emit_matrix {
        let basis = monomial_set_general(n, q, r)?;
        let spec = VanishingOrderSpec::new(q, r)?;
        let selection = select_lines(&set, witness.as_ref())?;
        let system = assemble_vanishing_system(&basis, &set, &selection, &spec)?;
        let mut buf = Vec::new();
        system.emit_matrix(n, &mut buf)?;
        fs::write(path, buf)?;
    }
    let ok = report.kernel_trivial && report.dim_v_within_rows && report.dim_v_within_codim_bound;
    let text = format!(
        "zerolemma q={q} n={n} r={r} set_size={}\ndim_v={} rows={} rank={} kernel_dim={}\n\
         kernel_trivial={} dim_v<=rows={} dim_v<=codim_bound({})={}\nresult: {}\n",
        report.set_size,
        report.dim_v,
        report.rows,
        report.rank,
        report.kernel_dim,
        report.kernel_trivial,
        report.dim_v_within_rows,
        report.codim_bound_total,
        report.dim_v_within_codim_bound,
        pass_str(ok),
    );
    let json = serde_json::json!({
        "audit": "zerolemma",
        "q": q,
        "n": n,
        "r": r,
        "set_size": report.set_size,
        "dim_v": report.dim_v,
        "rows": report.rows,
        "rank": report.rank,
        "kernel_dim": report.kernel_dim,
        "kernel_trivial": report.kernel_trivial,
        "codim_bound_total": report.codim_bound_total,
        "dim_v_within_rows": report.dim_v_within_rows,
        "dim_v_within_codim_bound": report.dim_v_within_codim_bound,
        "ok": ok,
    });
    render_audit(format, out, text, json)?;
    Ok(ok)
}

fn audit_polytopes(n: usize, q: u64, r: u64, format: Format, out: Option<&Path>) -> CmdResult {
    reject_csv(format)?;
    if n < 2 {
        return Err(UsageError("polytopes require n >= 2".into()));
    }
    prime_power_split(q).ok_or(kakeya_core::Error::NotAPrimePower(q))?;
    if r < 1 {
        return Err(UsageError("r must be at least 1".into()));
    }
    if r > 1000 {
        return Err(UsageError("lattice enumeration is capped at r = 1000".into()));
    }
    let count = |kind| polytope_count(&PolytopeRegion::new(kind, n, q), r);
    let para = count(RegionKind::Parallelogramoid);
    let cyl = count(RegionKind::Cylinder);
    let s1 = count(RegionKind::Simplex1);
    let s2 = count(RegionKind::Simplex2);
    let count_identity = para + s1 == cyl + s2;

    let pointwise_identity = pointwise_union_identity(n, q, r);

    let vol = |kind| polytope_volume_exact(kind, n, q);
    let vol_para = vol(RegionKind::Parallelogramoid);
    let volume_identity = vol_para
        == vol(RegionKind::Cylinder) - vol(RegionKind::Simplex1) + vol(RegionKind::Simplex2);
    let ok = count_identity && pointwise_identity && volume_identity;
    let text = format!(
        "polytopes n={n} q={q} r={r}\n\
         counts: parallelogramoid={para} cylinder={cyl} simplex1={s1} simplex2={s2}\n\
         count_identity({para}+{s1}={cyl}+{s2}): {count_identity}\n\
         pointwise_identity: {pointwise_identity}\n\
         vol(parallelogramoid)={} volume_identity: {volume_identity}\nresult: {}\n",
        fraction_string(&vol_para),
        pass_str(ok),
    );
    let json = serde_json::json!({
        "audit": "polytopes",
        "n": n,
        "q": q,
        "r": r,
        "counts": {
            "parallelogramoid": para,
            "cylinder": cyl,
            "simplex1": s1,
            "simplex2": s2,
        },
        "count_identity": count_identity,
        "pointwise_identity": pointwise_identity,
        "volumes": ALL_REGIONS
            .iter()
            .map(|&k| (k.label(), fraction_string(&vol(k))))
            .collect::<std::collections::BTreeMap<_, _>>(),
        "volume_identity": volume_identity,
        "ok": ok,
    });
    render_audit(format, out, text, json)?;
    Ok(ok)
}

fn pointwise_union_identity(n: usize, q: u64, r: u64) -> bool {
    let reg = |kind| PolytopeRegion::new(kind, n, q);
    let para = reg(RegionKind::Parallelogramoid);
    let cyl = reg(RegionKind::Cylinder);
    let s1 = reg(RegionKind::Simplex1);
    let s2 = reg(RegionKind::Simplex2);
    for w in 0..r {
        for i in compositions(w, n - 1) {
            for j in 0..=2 * r {
                let a = para.contains(&i, j, r);
                let b = s1.contains(&i, j, r);
                let c = cyl.contains(&i, j, r);
                let d = s2.contains(&i, j, r);
                if (a && b) || (c && d) || ((a || b) != (c || d)) {
                    return false;
                }
            }
        }
    }
    true
}

fn audit_dimv(n: usize, q: u64, r: u64, format: Format, out: Option<&Path>) -> CmdResult {
    reject_csv(format)?;
    if n < 1 {
        return Err(UsageError("n must be at least 1".into()));
    }
    prime_power_split(q).ok_or(kakeya_core::Error::NotAPrimePower(q))?;
    let enumerated = monomial_set_general(n, q, r)?.len() as u64;
    let closed_form = dim_v_closed_form(n, q, r)?;
    let ok = enumerated == closed_form;
    let text = format!(
        "dimv n={n} q={q} r={r}\nenumerated={enumerated} closed_form={closed_form}\nresult: {}\n",
        pass_str(ok)
    );
    let json = serde_json::json!({
        "audit": "dimv",
        "n": n,
        "q": q,
        "r": r,
        "enumerated": enumerated,
        "closed_form": closed_form,
        "ok": ok,
    });
    render_audit(format, out, text, json)?;
    Ok(ok)
}

fn audit_minimal2d(q: u64, format: Format, out: Option<&Path>) -> CmdResult {
    reject_csv(format)?;
    let field = Field::new(q)?;
    let (minimum, _example) = minimal_kakeya_2d(&field)?;
    let expected = bounds(q, 2)?.sharp_2d.expect("n = 2 has a sharp value");
    let ok = minimum == expected;
    let text = format!(
        "minimal2d q={q}\nminimum={minimum} sharp_bound={expected}\nresult: {}\n",
        pass_str(ok)
    );
    let json = serde_json::json!({
        "audit": "minimal2d",
        "q": q,
        "minimum": minimum,
        "sharp_bound": expected,
        "ok": ok,
    });
    render_audit(format, out, text, json)?;
    Ok(ok)
}

fn audit_inequality(q: u64, n: u32, format: Format, out: Option<&Path>) -> CmdResult {
    reject_csv(format)?;
    if n < 1 {
        return Err(UsageError("n must be at least 1".into()));
    }
    let report = theorem_inequality_audit(q, n)?;
    let mut text = format!(
        "inequality q={q} n={n}\nthreshold={} = {}\n",
        fraction_string(&report.threshold),
        decimal_string(&report.threshold, 6)
    );
    for s in &report.samples {
        let _ = writeln!(
            text,
            "x={} raw={} rearranged={}",
            fraction_string(&s.x),
            s.raw_holds,
            s.rearranged_holds
        );
    }
    let _ = writeln!(text, "result: {}", pass_str(report.ok));
    let json = serde_json::json!({
        "audit": "inequality",
        "q": q,
        "n": n,
        "threshold": fraction_string(&report.threshold),
        "samples": report.samples.iter().map(|s| serde_json::json!({
            "x": fraction_string(&s.x),
            "raw_holds": s.raw_holds,
            "rearranged_holds": s.rearranged_holds,
        })).collect::<Vec<_>>(),
        "ok": report.ok,
    });
    render_audit(format, out, text, json)?;
    Ok(report.ok)
}

fn pass_str(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

// --- report --------------------------------------------------------------------

struct ReportRow {
    check: &'static str,
    q: u64,
    n: u32,
    r: Option<u64>,
    name: String,
    value: String,
    ok: Option<bool>,
}

impl ReportRow {
    fn render(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.check,
            self.q,
            self.n,
            self.r.map_or(String::new(), |r| r.to_string()),
            self.name,
            self.value,
            self.ok.map_or(String::new(), |b| u8::from(b).to_string()),
        )
    }
}

fn prime_powers_up_to(qmax: u64) -> Vec<u64> {
    (2..=qmax).filter(|&q| prime_power_split(q).is_some()).collect()
}

fn cmd_report(qmax: u64, nmax: u32, out: Option<&Path>) -> CmdResult {
    if nmax < 2 {
        return Err(UsageError("nmax must be at least 2".into()));
    }
    let mut rows: Vec<ReportRow> = Vec::new();
    let qs = prime_powers_up_to(qmax);

    // Bound tables plus the exact ratio identity between the two bounds.
    for &q in &qs {
        for n in 2..=nmax {
            let report = bounds(q, n)?;
            for (name, value) in report.rows() {
                rows.push(ReportRow {
                    check: "bounds",
                    q,
                    n,
                    r: None,
                    name: name.to_string(),
                    value: fraction_string(&value),
                    ok: None,
                });
            }
            let ratio = &report.new_bound / &report.dkss;
            let expected = BigRational::new((2 * q - 1).into(), q.into());
            rows.push(ReportRow {
                check: "bounds",
                q,
                n,
                r: None,
                name: "ratio_new_over_dkss".to_string(),
                value: fraction_string(&ratio),
                ok: Some(ratio == expected),
            });
        }
    }

    // Constructions: sizes against formulas, self-verified.
    for &q in &qs {
        let field = Field::new(q)?;
        if field.p() == 2 {
            continue;
        }
        for n in 2..=nmax.min(3) {
            let (set, _) = construct_almost_kakeya_odd(&field, n as usize)?;
            let formula = bounds(q, n)?
                .almost_construction_size
                .expect("odd q has a construction size");
            let verified = is_almost_kakeya(&set)?.is_covered();
            let ok = from_u64(set.len() as u64) == formula && verified;
            rows.push(ReportRow {
                check: "construct_almost",
                q,
                n,
                r: None,
                name: "size".to_string(),
                value: set.len().to_string(),
                ok: Some(ok),
            });
        }
    }
    for &q in &qs {
        let field = Field::new(q)?;
        if field.p() == 2 || q > 5 {
            continue;
        }
        for n in 2..=nmax.min(3) {
            let set = construct_kakeya_recursive(&field, n as usize, ShiftStrategy::Exhaustive)?;
            let (kprime, _) = construct_almost_kakeya_odd(&field, n as usize)?;
            let prev =
                construct_kakeya_recursive(&field, n as usize - 1, ShiftStrategy::Exhaustive)?;
            let expectation = recursive_expectation_bound(
                kprime.len() as u64,
                prev.len() as u64,
                set.domain(),
            );
            let ok = is_kakeya(&set)?.is_covered()
                && from_u64(set.len() as u64) <= expectation;
            rows.push(ReportRow {
                check: "construct_recursive",
                q,
                n,
                r: None,
                name: "size".to_string(),
                value: set.len().to_string(),
                ok: Some(ok),
            });
        }
    }

    // Exhaustive 2-D minima against the sharp values.
    for &q in &qs {
        if q > 5 {
            continue;
        }
        let field = Field::new(q)?;
        let (minimum, _) = minimal_kakeya_2d(&field)?;
        let expected = bounds(q, 2)?.sharp_2d.expect("sharp value at n = 2");
        rows.push(ReportRow {
            check: "minimal2d",
            q,
            n: 2,
            r: None,
            name: "minimum".to_string(),
            value: minimum.to_string(),
            ok: Some(minimum == expected),
        });
    }

    // Order-2 kernel triviality.
    for &q in &qs {
        if q > 3 {
            continue;
        }
        let field = Field::new(q)?;
        let full = PointSet::full_space(field.clone(), 3)?;
        let report = verify_lemma_3dim(&full)?;
        rows.push(ReportRow {
            check: "lemma3_full",
            q,
            n: 3,
            r: None,
            name: "kernel_dim".to_string(),
            value: report.kernel_dim.to_string(),
            ok: Some(report.kernel_trivial && report.corollary_ok),
        });
        if field.p() != 2 {
            let set = construct_kakeya_recursive(&field, 3, ShiftStrategy::Exhaustive)?;
            let report = verify_lemma_3dim(&set)?;
            rows.push(ReportRow {
                check: "lemma3_recursive",
                q,
                n: 3,
                r: None,
                name: "kernel_dim".to_string(),
                value: report.kernel_dim.to_string(),
                ok: Some(report.kernel_trivial && report.corollary_ok),
            });
        }
    }

    // Basis dimensions against the closed form.
    for n in 1..=3u32 {
        for q in [2u64, 3] {
            if q > qmax {
                continue;
            }
            for r in [q, 2 * q] {
                let enumerated = monomial_set_general(n as usize, q, r)?.len() as u64;
                let closed = dim_v_closed_form(n as usize, q, r)?;
                rows.push(ReportRow {
                    check: "dimv",
                    q,
                    n,
                    r: Some(r),
                    name: "enumerated".to_string(),
                    value: enumerated.to_string(),
                    ok: Some(enumerated == closed),
                });
            }
        }
    }
    for q in [2u64, 3, 4, 5, 7] {
        if q > qmax {
            continue;
        }
        let count = monomial_set_3d(q)?.len() as u64;
        rows.push(ReportRow {
            check: "dimv_3d",
            q,
            n: 3,
            r: None,
            name: "enumerated".to_string(),
            value: count.to_string(),
            ok: Some(count == q * q * q + q * q),
        });
    }

    // Polytope counts, the pointwise disjoint-union identity, and volumes.
    for n in [2usize, 3] {
        for q in [2u64, 3] {
            if q > qmax {
                continue;
            }
            for r in [q, 2 * q, 4 * q] {
                let count =
                    |kind| polytope_count(&PolytopeRegion::new(kind, n, q), r);
                for kind in ALL_REGIONS {
                    rows.push(ReportRow {
                        check: "polytope_count",
                        q,
                        n: n as u32,
                        r: Some(r),
                        name: kind.label().to_string(),
                        value: count(kind).to_string(),
                        ok: None,
                    });
                }
                rows.push(ReportRow {
                    check: "polytope_identity",
                    q,
                    n: n as u32,
                    r: Some(r),
                    name: "pointwise".to_string(),
                    value: String::new(),
                    ok: Some(pointwise_union_identity(n, q, r)),
                });
            }
            let vol = |kind| polytope_volume_exact(kind, n, q);
            let identity = vol(RegionKind::Parallelogramoid)
                == vol(RegionKind::Cylinder) - vol(RegionKind::Simplex1)
                    + vol(RegionKind::Simplex2);
            rows.push(ReportRow {
                check: "polytope_volume",
                q,
                n: n as u32,
                r: None,
                name: "parallelogramoid".to_string(),
                value: fraction_string(&vol(RegionKind::Parallelogramoid)),
                ok: Some(identity),
            });
        }
    }

    // Kernel triviality of the order-(r, r') systems at the desk instances.
    let zero_lemma_cases: &[(u64, usize, u64)] = &[(2, 2, 2), (3, 2, 3)];
    for &(q, n, r) in zero_lemma_cases {
        if q > qmax {
            continue;
        }
        let field = Field::new(q)?;
        let (set, witness) = if field.p() == 2 {
            (PointSet::full_space(field.clone(), n)?, None)
        } else {
            let (set, witness) = construct_almost_kakeya_odd(&field, n)?;
            (set, Some(witness))
        };
        let report = verify_zero_lemma(&set, witness.as_ref(), r)?;
        rows.push(ReportRow {
            check: "zerolemma",
            q,
            n: n as u32,
            r: Some(r),
            name: "kernel_dim".to_string(),
            value: report.kernel_dim.to_string(),
            ok: Some(
                report.kernel_trivial
                    && report.dim_v_within_rows
                    && report.dim_v_within_codim_bound,
            ),
        });
    }

    // Rearranged-inequality equivalence.
    for &q in &qs {
        for n in 2..=nmax {
            let report = theorem_inequality_audit(q, n)?;
            rows.push(ReportRow {
                check: "inequality",
                q,
                n,
                r: None,
                name: "threshold".to_string(),
                value: fraction_string(&report.threshold),
                ok: Some(report.ok),
            });
        }
    }

    let mut csv = String::from("check,q,n,r,name,value,ok\n");
    for row in &rows {
        csv.push_str(&row.render());
        csv.push('\n');
    }
    emit(out, &csv)?;
    Ok(rows.iter().all(|r| r.ok.unwrap_or(true)))
}
