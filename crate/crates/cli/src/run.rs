//! Subcommand execution. Artifacts are written single-threaded; every
//! artifact gets a sidecar manifest.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Serialize;

use waring_core::arcs::{weyl_sum, ArcSystem, SumSpec};
use waring_core::arith::{block_set, rep_count_all, smooth_set, RepParams, RepTable};
use waring_core::audit::{
    build_audit, context_bounds, exceptional_scan, theorem_entries, theorem_exponent,
    theorem_source, PsiFunction,
};
use waring_core::moments::{
    difference_table, even_moment_exact, hua_ladder, theta_direct, theta_via_kernel,
    twelfth_moment_smooth, BenchmarkConstants, LinearFormSystem, MomentSpec,
};
use waring_core::series::singular_series_truncated;
use waring_core::Budget;

use crate::cli::{
    ArcsArgs, AuditArgs, Cli, Command, ExponentsArgs, FamilyArg, MomentsArgs, RepsArgs,
    RepsFormat, ScanArgs, SeriesArgs, SystemArg, ThetaArgs,
};
use crate::formats::{fmt_g12, read_rep_table, write_audit_table, write_rep_table, Csv};
use crate::manifest::Manifest;

/// Exit status for budget and exact-arithmetic capacity rejections.
pub const EXIT_BUDGET: i32 = 2;

pub struct Ctx {
    pub threads: usize,
    pub budget: Budget,
    pub out_dir: Option<PathBuf>,
}

impl Ctx {
    fn resolve(&self, path: &Path) -> PathBuf {
        match (&self.out_dir, path.is_relative()) {
            (Some(dir), true) => dir.join(path),
            _ => path.to_path_buf(),
        }
    }

    fn write(&self, path: &Path, bytes: &[u8]) -> anyhow::Result<PathBuf> {
        let path = self.resolve(path);
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent)
                    .with_context(|| format!("creating {}", parent.display()))?;
            }
        }
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        eprintln!("[waring] wrote {}", path.display());
        Ok(path)
    }
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let budget_bytes = cli
        .budget_bytes
        .or_else(|| {
            std::env::var("WARING_BUDGET_BYTES")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(4 << 30);
    let out_dir = cli
        .out_dir
        .or_else(|| std::env::var("WARING_OUT_DIR").ok().map(PathBuf::from));
    let ctx = Ctx {
        threads: cli.threads.max(1),
        budget: Budget {
            max_bytes: budget_bytes,
            ..Budget::default()
        },
        out_dir,
    };
    match cli.command {
        Command::Reps(args) => reps(&ctx, args),
        Command::Series(args) => series(&ctx, args),
        Command::Audit(args) => audit(&ctx, args),
        Command::Scan(args) => scan(&ctx, args),
        Command::Moments(args) => moments(&ctx, args),
        Command::Theta(args) => theta(&ctx, args),
        Command::Arcs(args) => arcs(&ctx, args),
        Command::Exponents(args) => exponents(&ctx, args),
    }
}

fn finish_manifest<P: Serialize>(
    command: &'static str,
    params: &P,
    inputs: &[&Path],
    artifact: &Path,
) -> anyhow::Result<()> {
    let mut manifest = Manifest::new(command, serde_json::to_value(params)?);
    for input in inputs {
        manifest.record_input(input)?;
    }
    manifest.write_beside(artifact)?;
    Ok(())
}

fn reps_csv(table: &RepTable) -> String {
    let mut csv = Csv::new("n,count");
    for n in 1..=table.params.limit {
        csv.row(&[n.to_string(), table.count(n).to_string()]);
    }
    csv.finish()
}

fn reps(ctx: &Ctx, args: RepsArgs) -> anyhow::Result<()> {
    let params = RepParams::new(args.s, args.k, args.limit)?;
    eprintln!(
        "[waring] counting: s={} k={} N={} (P={})",
        params.s, params.k, params.limit, params.root
    );
    let table = rep_count_all(&params, ctx.threads, &ctx.budget)?;
    let format = args.format.unwrap_or_else(|| {
        match args.out.extension().and_then(|e| e.to_str()) {
            Some("csv") => RepsFormat::Csv,
            _ => RepsFormat::Bin,
        }
    });
    let bytes = match format {
        RepsFormat::Csv => reps_csv(&table).into_bytes(),
        RepsFormat::Bin => {
            let mut buf = Vec::new();
            write_rep_table(&mut buf, &table)?;
            buf
        }
    };
    let artifact = ctx.write(&args.out, &bytes)?;
    finish_manifest("reps", &args, &[], &artifact)
}

#[derive(Serialize)]
struct SeriesTermJson {
    q: u64,
    value: f64,
}

#[derive(Serialize)]
struct SeriesJson {
    n: u64,
    s: u32,
    k: u32,
    #[serde(rename = "Q")]
    q: u64,
    value: f64,
    #[serde(rename = "tailEstimate")]
    tail_estimate: f64,
    terms: Vec<SeriesTermJson>,
}

fn series(ctx: &Ctx, args: SeriesArgs) -> anyhow::Result<()> {
    let mut targets = args.n.clone();
    if let Some((lo, hi)) = args.n_range {
        targets.extend(lo..=hi);
    }
    if targets.is_empty() {
        bail!("series: give at least one --n or an --n-range (try --n 100)");
    }
    let mut reports = Vec::with_capacity(targets.len());
    for &n in &targets {
        let eval = singular_series_truncated(n, args.s, args.k, args.q_limit, ctx.threads)?;
        let terms = eval
            .terms
            .iter()
            .take(args.max_terms)
            .map(|t| SeriesTermJson {
                q: t.q,
                value: t.value,
            })
            .collect();
        reports.push(SeriesJson {
            n,
            s: args.s,
            k: args.k,
            q: args.q_limit,
            value: eval.value,
            tail_estimate: eval.tail_estimate,
            terms,
        });
    }
    let body = if reports.len() == 1 {
        serde_json::to_string_pretty(&reports[0])?
    } else {
        serde_json::to_string_pretty(&reports)?
    };
    match &args.out {
        Some(path) => {
            let artifact = ctx.write(path, body.as_bytes())?;
            finish_manifest("series", &args, &[], &artifact)?;
        }
        None => println!("{body}"),
    }
    Ok(())
}

fn load_or_build_reps(
    ctx: &Ctx,
    s: u32,
    k: u32,
    limit: u64,
    reps: &Option<PathBuf>,
) -> anyhow::Result<RepTable> {
    match reps {
        Some(path) => {
            let bytes = fs::read(path)
                .with_context(|| format!("reading reps table {}", path.display()))?;
            let table = read_rep_table(&mut &bytes[..])?;
            let want = RepParams::new(s, k, limit)?;
            if table.params != want {
                bail!(
                    "reps file {} carries (s={}, k={}, N={}), run asked for (s={s}, k={k}, N={limit})",
                    path.display(),
                    table.params.s,
                    table.params.k,
                    table.params.limit
                );
            }
            eprintln!("[waring] loaded counts from {}", path.display());
            Ok(table)
        }
        None => {
            let params = RepParams::new(s, k, limit)?;
            eprintln!("[waring] counting: s={s} k={k} N={limit}");
            Ok(rep_count_all(&params, ctx.threads, &ctx.budget)?)
        }
    }
}

fn audit_csv(audit: &waring_core::audit::AuditTable) -> String {
    let mut csv = Csv::new("n,count,series,mainTerm,E");
    for row in audit.rows() {
        csv.row(&[
            row.n.to_string(),
            row.count.to_string(),
            fmt_g12(row.series),
            fmt_g12(row.main_term),
            fmt_g12(row.error),
        ]);
    }
    csv.finish()
}

fn audit(ctx: &Ctx, args: AuditArgs) -> anyhow::Result<()> {
    let table = load_or_build_reps(ctx, args.s, args.k, args.limit, &args.reps)?;
    eprintln!("[waring] series tables to Q={}", args.q_limit);
    let audit = build_audit(&table, args.q_limit, ctx.threads)?;
    let mut buf = Vec::new();
    write_audit_table(&mut buf, &audit)?;
    let artifact = ctx.write(&args.out, &buf)?;
    if let Some(csv_path) = &args.csv {
        ctx.write(csv_path, audit_csv(&audit).as_bytes())?;
    }
    let inputs: Vec<&Path> = args.reps.iter().map(|p| p.as_path()).collect();
    finish_manifest("audit", &args, &inputs, &artifact)
}

fn parse_psi(text: &str) -> anyhow::Result<PsiFunction> {
    let (kind, value) = text.split_once(':').unwrap_or((text, "1"));
    let value: f64 = value
        .parse()
        .with_context(|| format!("bad psi parameter in `{text}`"))?;
    Ok(match kind {
        "log" => PsiFunction::log_power(value)?,
        "pow" => PsiFunction::small_power(value)?,
        "const" => PsiFunction::constant(value)?,
        other => bail!("unknown psi kind `{other}` (expected log, pow or const)"),
    })
}

#[derive(Serialize)]
struct ScanBlockJson {
    block_n: u64,
    total: u64,
    z_low: u64,
    z_high: u64,
    uncertain: u64,
    threshold_exponent: f64,
}

#[derive(Serialize)]
struct SlopeJson {
    slope: f64,
    intercept: f64,
    std_err: f64,
    ci_half_width: f64,
}

#[derive(Serialize)]
struct TheoremJson {
    exponent: String,
    exponent_value: f64,
    psi_power: u32,
    source: &'static str,
}

#[derive(Serialize)]
struct ScanJson {
    s: u32,
    k: u32,
    psi: String,
    series_q: u64,
    blocks: Vec<ScanBlockJson>,
    fitted_slope: Option<SlopeJson>,
    theorem_exponent: Option<TheoremJson>,
}

fn scan(ctx: &Ctx, args: ScanArgs) -> anyhow::Result<()> {
    let psi = parse_psi(&args.psi)?;
    let table = load_or_build_reps(ctx, args.s, args.k, args.limit, &args.reps)?;
    eprintln!("[waring] series tables to Q={}", args.q_limit);
    let audit = build_audit(&table, args.q_limit, ctx.threads)?;
    eprintln!("[waring] scanning dyadic blocks down to {}", args.min_block);
    let report = exceptional_scan(&audit, &psi, args.min_block)?;

    let json = ScanJson {
        s: report.s,
        k: report.k,
        psi: psi.label(),
        series_q: report.series_q,
        blocks: report
            .blocks
            .iter()
            .map(|b| ScanBlockJson {
                block_n: b.block_n,
                total: b.total,
                z_low: b.violations_low,
                z_high: b.violations_high,
                uncertain: b.uncertain,
                threshold_exponent: b.threshold_exponent,
            })
            .collect(),
        fitted_slope: report.fit.as_ref().map(|f| SlopeJson {
            slope: f.slope,
            intercept: f.intercept,
            std_err: f.std_err,
            ci_half_width: f.ci_half_width,
        }),
        theorem_exponent: report.theorem.map(|(r, p)| TheoremJson {
            exponent: r.to_string(),
            exponent_value: r.as_f64(),
            psi_power: p,
            source: theorem_source(report.s, report.k).unwrap_or(""),
        }),
    };
    let artifact = ctx.write(&args.out, serde_json::to_string_pretty(&json)?.as_bytes())?;

    if let Some(csv_path) = &args.csv {
        let slope = report
            .fit
            .as_ref()
            .map(|f| fmt_g12(f.slope))
            .unwrap_or_default();
        let theorem = report
            .theorem
            .map(|(r, _)| r.to_string())
            .unwrap_or_default();
        let mut csv = Csv::new("blockN,Z_low,Z_high,threshold_exponent,fitted_slope,theorem_exponent");
        for b in &report.blocks {
            csv.row(&[
                b.block_n.to_string(),
                b.violations_low.to_string(),
                b.violations_high.to_string(),
                fmt_g12(b.threshold_exponent),
                slope.clone(),
                theorem.clone(),
            ]);
        }
        ctx.write(csv_path, csv.finish().as_bytes())?;
    }
    let inputs: Vec<&Path> = args.reps.iter().map(|p| p.as_path()).collect();
    finish_manifest("scan", &args, &inputs, &artifact)
}

fn family_label(f: FamilyArg) -> &'static str {
    match f {
        FamilyArg::Full => "full",
        FamilyArg::Dyadic => "dyadic",
        FamilyArg::Smooth => "smooth",
        FamilyArg::Block => "block",
    }
}

fn family_kind(f: FamilyArg) -> waring_core::arcs::SumFamily {
    match f {
        FamilyArg::Full => waring_core::arcs::SumFamily::Full,
        FamilyArg::Dyadic => waring_core::arcs::SumFamily::Dyadic,
        FamilyArg::Smooth => waring_core::arcs::SumFamily::Smooth,
        FamilyArg::Block => waring_core::arcs::SumFamily::Block,
    }
}

fn r_for(rule: &str, p: u64) -> anyhow::Result<f64> {
    if rule == "sqrt" {
        Ok((p as f64).sqrt())
    } else {
        rule.parse::<f64>()
            .with_context(|| format!("bad R rule `{rule}` (expected `sqrt` or a number)"))
    }
}

#[derive(Serialize)]
struct RungJson {
    p: u64,
    r: f64,
    /// log R / log P, the smoothness exponent actually realised; R is a
    /// direct parameter and eta is recorded, never chosen
    realised_eta: f64,
}

#[derive(Serialize)]
struct ConstantsJson {
    tau: f64,
    xi: f64,
    reference_exponents: Vec<(String, f64)>,
    ladder_reference_exponent: Option<f64>,
    observed_slope: Option<SlopeJson>,
    ladder: Option<Vec<RungJson>>,
}

fn build_factor(
    family: FamilyArg,
    k: u32,
    p: u64,
    r: f64,
) -> anyhow::Result<SumSpec> {
    Ok(match family {
        FamilyArg::Full => SumSpec::full(p, k)?,
        FamilyArg::Dyadic => SumSpec::dyadic(p)?,
        FamilyArg::Smooth => SumSpec::smooth(&smooth_set(p, r))?,
        FamilyArg::Block => SumSpec::block(&block_set(p, r))?,
    })
}

fn moments(ctx: &Ctx, args: MomentsArgs) -> anyhow::Result<()> {
    let constants = BenchmarkConstants::new();
    let mut csv = Csv::new("family,degree,P,R,count,log2count");
    let mut ladder_reference = None;
    let mut observed = None;
    let mut rungs = None;

    if let Some(mixed) = &args.mixed {
        if args.p_values.len() != 1 {
            bail!("mixed moments need exactly one --P value");
        }
        let p = args.p_values[0];
        let r = r_for(&args.r_rule, p)?;
        let mut factors = Vec::new();
        let mut label = String::new();
        for part in mixed.split(',') {
            let (fam, pow) = part
                .split_once(':')
                .with_context(|| format!("bad factor `{part}` (expected family:power)"))?;
            let family = match fam {
                "full" => FamilyArg::Full,
                "dyadic" => FamilyArg::Dyadic,
                "smooth" => FamilyArg::Smooth,
                "block" => FamilyArg::Block,
                other => bail!("unknown family `{other}`"),
            };
            let power: u32 = pow.parse().with_context(|| format!("bad power `{pow}`"))?;
            if !label.is_empty() {
                label.push('*');
            }
            label.push_str(&format!("{fam}^{power}"));
            factors.push((build_factor(family, args.k, p, r)?, power));
        }
        let spec = MomentSpec::new(factors)?;
        let degree = spec.degree();
        let count = even_moment_exact(&spec, args.seed, ctx.threads, &ctx.budget)?;
        csv.row(&[
            label,
            degree.to_string(),
            p.to_string(),
            fmt_g12(r),
            count.to_string(),
            fmt_g12((count as f64).log2()),
        ]);
    } else {
        if args.p_values.len() < 4 {
            bail!("moment ladders need at least four --P values");
        }
        let ladder: Vec<(u64, f64)> = args
            .p_values
            .iter()
            .map(|&p| Ok((p, r_for(&args.r_rule, p)?)))
            .collect::<anyhow::Result<_>>()?;
        eprintln!(
            "[waring] {} ladder, 2t={} over {} rungs",
            family_label(args.family),
            args.power,
            ladder.len()
        );
        let out = hua_ladder(
            family_kind(args.family),
            args.k,
            args.power,
            &ladder,
            args.seed,
            ctx.threads,
            &ctx.budget,
        )?;
        for row in &out.rows {
            csv.row(&[
                family_label(args.family).to_string(),
                args.power.to_string(),
                row.p.to_string(),
                fmt_g12(row.r),
                row.count.to_string(),
                fmt_g12(row.log2_count),
            ]);
        }
        ladder_reference = out.reference_exponent;
        observed = out.fit.map(|f| SlopeJson {
            slope: f.slope,
            intercept: f.intercept,
            std_err: f.std_err,
            ci_half_width: f.ci_half_width,
        });
        rungs = Some(
            out.rows
                .iter()
                .map(|row| RungJson {
                    p: row.p,
                    r: row.r,
                    realised_eta: row.r.max(1.0).ln() / (row.p as f64).ln(),
                })
                .collect(),
        );
        if let (Some(reference), Some(fit)) = (ladder_reference, &observed) {
            println!(
                "reference exponent {} observed slope {}",
                fmt_g12(reference),
                fmt_g12(fit.slope)
            );
        }
    }

    let artifact = ctx.write(&args.out, csv.finish().as_bytes())?;
    let constants_json = ConstantsJson {
        tau: constants.tau,
        xi: constants.xi,
        reference_exponents: constants
            .reference_exponents
            .iter()
            .map(|(name, v)| (name.to_string(), *v))
            .collect(),
        ladder_reference_exponent: ladder_reference,
        observed_slope: observed,
        ladder: rungs,
    };
    let constants_path = args.out.with_extension("constants.json");
    ctx.write(
        &constants_path,
        serde_json::to_string_pretty(&constants_json)?.as_bytes(),
    )?;
    finish_manifest("moments", &args, &[], &artifact)
}

fn theta(ctx: &Ctx, args: ThetaArgs) -> anyhow::Result<()> {
    let system = LinearFormSystem::new(args.c, args.d)?;
    eprintln!(
        "[waring] difference table P={} R={} (kernel {:?})",
        args.p,
        args.r,
        system.kernel()
    );
    let table = difference_table(args.p, args.r, args.seed, &ctx.budget)?;
    let direct = theta_direct(&table, &system)?;
    let kernel = theta_via_kernel(&table, &system)?;
    println!("direct: {direct}");
    println!("kernel: {kernel}");
    let twelfth = if args.twelfth {
        let v = twelfth_moment_smooth(args.p, args.r, &system, args.seed, &ctx.budget)?;
        println!("twelfth: {v}");
        Some(v)
    } else {
        None
    };
    if let Some(out) = &args.out {
        let m = system.kernel();
        let mut csv = Csv::new("c,d,m,P,R,direct,kernel,twelfth");
        csv.row(&[
            format!("{} {} {}", args.c[0], args.c[1], args.c[2]),
            format!("{} {} {}", args.d[0], args.d[1], args.d[2]),
            format!("{} {} {}", m[0], m[1], m[2]),
            args.p.to_string(),
            fmt_g12(args.r),
            direct.to_string(),
            kernel.to_string(),
            twelfth.map(|v| v.to_string()).unwrap_or_default(),
        ]);
        let artifact = ctx.write(out, csv.finish().as_bytes())?;
        finish_manifest("theta", &args, &[], &artifact)?;
    }
    Ok(())
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn arcs(ctx: &Ctx, args: ArcsArgs) -> anyhow::Result<()> {
    let (system, label) = match args.system {
        SystemArg::Waring => {
            let limit = args
                .limit
                .ok_or_else(|| anyhow::anyhow!("waring system needs --N (try --N 1000000)"))?;
            (ArcSystem::waring(args.k, limit)?, "waring")
        }
        SystemArg::Cubic5 => {
            let p = args
                .p
                .ok_or_else(|| anyhow::anyhow!("cubic5 system needs --P (try --P 10000)"))?;
            (ArcSystem::cubic_five(p)?, "cubic5")
        }
    };

    let mut rows: Vec<(f64, waring_core::arcs::ArcDecision)> = Vec::new();
    for &alpha in &args.alpha {
        rows.push((alpha, system.classify(alpha)));
    }
    for text in &args.rational {
        let (num, den) = text
            .split_once('/')
            .with_context(|| format!("bad rational `{text}` (expected a/b)"))?;
        let num: u64 = num.parse()?;
        let den: u64 = den.parse()?;
        rows.push((num as f64 / den as f64, system.classify_rational(num, den)?));
    }
    let mut state = args.seed;
    for _ in 0..args.random {
        let alpha = (splitmix(&mut state) >> 11) as f64 / (1u64 << 53) as f64;
        rows.push((alpha, system.classify(alpha)));
    }
    if rows.is_empty() {
        bail!("arcs: nothing to classify (give --alpha, --rational or --random)");
    }

    let mut csv = Csv::new("alpha,system,isMajor,q,a");
    for (alpha, decision) in &rows {
        let (q, a) = decision
            .witness
            .map(|(q, a)| (q.to_string(), a.to_string()))
            .unwrap_or_default();
        csv.row(&[
            fmt_g12(*alpha),
            label.to_string(),
            decision.major.to_string(),
            q,
            a,
        ]);
    }
    let artifact = ctx.write(&args.out, csv.finish().as_bytes())?;

    if let Some(sums_path) = &args.sums_out {
        let spec = SumSpec::full(system.power(), system.k())?;
        let mut csv = Csv::new("alpha,re,im");
        for (alpha, _) in &rows {
            let v = weyl_sum(&spec, *alpha);
            csv.row(&[fmt_g12(*alpha), fmt_g12(v.re), fmt_g12(v.im)]);
        }
        ctx.write(sums_path, csv.finish().as_bytes())?;
    }
    finish_manifest("arcs", &args, &[], &artifact)
}

fn exponents(ctx: &Ctx, args: ExponentsArgs) -> anyhow::Result<()> {
    if let (Some(s), Some(k)) = (args.s, args.k) {
        match theorem_exponent(s, k) {
            Some((r, psi)) => {
                println!("{} psi^{} ({})", r, psi, theorem_source(s, k).unwrap_or(""));
            }
            None => println!("not covered"),
        }
        if args.context {
            for b in context_bounds(s, k) {
                println!("context: {} psi^{} ({})", b.exponent, b.psi_power, b.source);
            }
        }
        return Ok(());
    }
    if !args.all {
        bail!("exponents: give both --s and --k, or --all for the whole table");
    }
    // full table dump
    let mut csv = Csv::new("s,k,exponent,exponent_value,psi_power,source");
    for e in theorem_entries() {
        csv.row(&[
            e.s.to_string(),
            e.k.to_string(),
            e.exponent.to_string(),
            fmt_g12(e.exponent.as_f64()),
            e.psi_power.to_string(),
            e.source.to_string(),
        ]);
    }
    if args.context {
        for k in 3..=8u32 {
            for s in 4..=(1u32 << k).min(223) {
                for b in context_bounds(s, k) {
                    csv.row(&[
                        s.to_string(),
                        k.to_string(),
                        b.exponent.to_string(),
                        fmt_g12(b.exponent.as_f64()),
                        b.psi_power.to_string(),
                        format!("external: {}", b.source),
                    ]);
                }
            }
        }
    }
    let body = csv.finish();
    match &args.out {
        Some(path) => {
            let artifact = ctx.write(path, body.as_bytes())?;
            finish_manifest("exponents", &args, &[], &artifact)?;
        }
        None => print!("{body}"),
    }
    Ok(())
}
