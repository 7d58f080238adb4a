use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Value};
use soskp_core::analysis::{
    bound_shapes, check_ij_inequalities, run_smoothed_with, SampleBound,
};
use soskp_core::certlib::{
    build_certificate, construct_verified, BuildOptions, Certificate, CertificateDoc,
    RegimeChoice, VerifyOptions, verify_certificate,
};
use soskp_core::model::KnapsackInstance;
use soskp_core::oracle::{sos_rank, Method, RankOptions, CONVENTION};

use crate::config::{CommandName, Format, MethodArg, RegimeArg, RunConfig, SweepKind};
use crate::output::{write_csv, write_json};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum Exit {
    Ok = 0,
    Failed = 1,
    Usage = 2,
    Unresolved = 3,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit(&self) -> Exit {
        match self {
            CliError::Usage(_) => Exit::Usage,
            CliError::Failed(_) | CliError::Io(_) => Exit::Failed,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn run(cfg: &RunConfig) -> Exit {
    if let Some(j) = cfg.jobs {
        // only fails if a pool already exists, which never happens here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global();
    }
    let result = match cfg.command {
        None => Err(usage("no command given (pass a subcommand or a config naming one)")),
        Some(CommandName::Construct) => construct(cfg),
        Some(CommandName::Verify) => verify(cfg),
        Some(CommandName::Rank) => rank(cfg),
        Some(CommandName::Sweep) => sweep(cfg),
        Some(CommandName::Smooth) => smooth(cfg),
        Some(CommandName::Bounds) => bounds(cfg),
        Some(CommandName::CheckIj) => check_ij(cfg),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => Exit::Ok,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit()
        }
    }
}

fn instance(cfg: &RunConfig) -> Result<KnapsackInstance, CliError> {
    let n = cfg.n.ok_or_else(|| usage("--n is required"))?;
    let q = cfg.q.as_deref().ok_or_else(|| usage("--q is required"))?;
    KnapsackInstance::parse(n, q).map_err(|e| usage(e.to_string()))
}

/// Shortest round-trip text; exponent form for very small or large magnitudes.
fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn format_or(cfg: &RunConfig, default: Format) -> Format {
    cfg.format.unwrap_or(default)
}

fn json_only(cfg: &RunConfig, what: &str) -> Result<(), CliError> {
    match format_or(cfg, Format::Json) {
        Format::Json => Ok(()),
        Format::Csv => Err(usage(format!("{what} writes JSON only"))),
    }
}

fn build_options(cfg: &RunConfig) -> BuildOptions {
    BuildOptions {
        precision_bits: cfg.precision_bits,
        dense_limit: cfg.dense_limit,
        regime: match cfg.regime {
            RegimeArg::Auto => RegimeChoice::Auto,
            RegimeArg::Lower => RegimeChoice::Lower,
            RegimeArg::Upper => RegimeChoice::Upper,
        },
    }
}

fn verify_options(cfg: &RunConfig) -> VerifyOptions {
    VerifyOptions {
        tol: cfg.tol,
        ..VerifyOptions::default()
    }
}

fn rank_options(cfg: &RunConfig) -> RankOptions {
    RankOptions {
        method: match cfg.method {
            MethodArg::Symmetric => Method::Symmetric,
            MethodArg::Dense => Method::Dense,
        },
        eps: cfg.eps,
    }
}

fn construct(cfg: &RunConfig) -> Result<Exit, CliError> {
    json_only(cfg, "construct")?;
    let inst = instance(cfg)?;
    let (cert, report) = construct_verified(&inst, &build_options(cfg), &verify_options(cfg))
        .map_err(|e| usage(e.to_string()))?;
    eprintln!(
        "{inst}: {} certificate, reported_degree {}, verification {}",
        cert.regime,
        cert.reported_degree,
        if report.pass { "pass" } else { "FAIL" }
    );
    let doc = serde_json::to_value(CertificateDoc::from_certificate(&cert)).expect("serializable");
    write_json(
        cfg,
        json!({ "certificate": doc, "verification": report.to_json() }),
    )?;
    Ok(if report.pass { Exit::Ok } else { Exit::Failed })
}

fn load_certificate(path: &Path) -> Result<Certificate, CliError> {
    let text = std::fs::read_to_string(path)?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Failed(format!("{}: not JSON: {e}", path.display())))?;
    let body = v.get("certificate").cloned().unwrap_or(v);
    Certificate::from_json_verified(&body.to_string()).map_err(|e| CliError::Failed(e.to_string()))
}

fn verify(cfg: &RunConfig) -> Result<Exit, CliError> {
    json_only(cfg, "verify")?;
    let path = cfg.input.as_ref().ok_or_else(|| usage("verify needs a certificate file"))?;
    let cert = load_certificate(path)?;
    let report = verify_certificate(&cert, &verify_options(cfg));
    if report.pass {
        eprintln!("{}: pass", cert.inst);
    } else {
        eprintln!("{}: FAIL {:?}", cert.inst, report.failed_checks());
    }
    write_json(
        cfg,
        json!({
            "instance": cert.inst,
            "regime": cert.regime.to_string(),
            "reported_degree": cert.reported_degree,
            "report": report.to_json(),
        }),
    )?;
    Ok(if report.pass { Exit::Ok } else { Exit::Failed })
}

fn rank(cfg: &RunConfig) -> Result<Exit, CliError> {
    let inst = instance(cfg)?;
    let dmax = cfg.dmax.unwrap_or(inst.n() as u32);
    let res = sos_rank(&inst, dmax, &rank_options(cfg)).map_err(|e| usage(e.to_string()))?;
    match res.rank {
        Some(r) => eprintln!("{inst}: rank {r} (convention {CONVENTION})"),
        None if res.unresolved => eprintln!("{inst}: rank unresolved (convention {CONVENTION})"),
        None => eprintln!("{inst}: no feasible degree up to {dmax} (convention {CONVENTION})"),
    }
    match format_or(cfg, Format::Json) {
        Format::Json => write_json(cfg, json!({ "report": res.to_json() }))?,
        Format::Csv => write_csv(cfg, &[format!("convention {CONVENTION}")], |w| {
            w.write_record(["d", "status", "margin"])?;
            for o in &res.per_degree {
                w.write_record([o.d.to_string(), format!("{:?}", o.status), num(o.margin)])?;
            }
            Ok(())
        })?,
    }
    Ok(if res.unresolved { Exit::Unresolved } else { Exit::Ok })
}

struct SweepRow {
    e: u32,
    q: String,
    regime: String,
    value: Option<u32>,
    status: String,
}

fn sweep(cfg: &RunConfig) -> Result<Exit, CliError> {
    let n = cfg.n.ok_or_else(|| usage("--n is required"))?;
    if cfg.e_min > cfg.e_max {
        return Err(usage("--e-min exceeds --e-max"));
    }
    let opts = build_options(cfg);
    let rank_opts = rank_options(cfg);
    let rows: Vec<Result<SweepRow, CliError>> = (cfg.e_min..=cfg.e_max)
        .into_par_iter()
        .map(|e| {
            let q = format!("{}+2^-{e}", cfg.q_floor);
            let inst = KnapsackInstance::parse(n, &q).map_err(|err| usage(err.to_string()))?;
            match cfg.sweep_kind {
                SweepKind::Degree => {
                    let cert = build_certificate(&inst, &opts).map_err(|err| usage(err.to_string()))?;
                    Ok(SweepRow {
                        e,
                        q,
                        regime: cert.regime.to_string(),
                        value: Some(cert.reported_degree),
                        status: "built".into(),
                    })
                }
                SweepKind::Rank => {
                    let dmax = cfg.dmax.unwrap_or(n as u32);
                    let r = sos_rank(&inst, dmax, &rank_opts).map_err(|err| usage(err.to_string()))?;
                    let status = if r.unresolved {
                        "unresolved"
                    } else if r.rank.is_some() {
                        "resolved"
                    } else {
                        "none-up-to-dmax"
                    };
                    Ok(SweepRow {
                        e,
                        q,
                        regime: "oracle".into(),
                        value: r.rank,
                        status: status.into(),
                    })
                }
            }
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    let unresolved = rows.iter().any(|r| r.status == "unresolved");
    let kind = match cfg.sweep_kind {
        SweepKind::Degree => "reported_degree",
        SweepKind::Rank => "rank",
    };
    match format_or(cfg, Format::Csv) {
        Format::Csv => write_csv(cfg, &[format!("value = {kind}")], |w| {
            w.write_record(["e", "q", "regime", "value", "status"])?;
            for r in &rows {
                w.write_record([
                    r.e.to_string(),
                    r.q.clone(),
                    r.regime.clone(),
                    r.value.map_or(String::new(), |v| v.to_string()),
                    r.status.clone(),
                ])?;
            }
            Ok(())
        })?,
        Format::Json => {
            let body: Vec<Value> = rows
                .iter()
                .map(|r| json!({"e": r.e, "q": r.q, "regime": r.regime, "value": r.value, "status": r.status}))
                .collect();
            write_json(cfg, json!({ "value": kind, "rows": body }))?
        }
    }
    Ok(if unresolved { Exit::Unresolved } else { Exit::Ok })
}

fn smooth(cfg: &RunConfig) -> Result<Exit, CliError> {
    let inst = instance(cfg)?;
    let sigma = cfg.sigma.ok_or_else(|| usage("--sigma is required"))?;
    let what = if cfg.oracle { SampleBound::OracleRank } else { SampleBound::Shape };
    let (stats, rows) = run_smoothed_with(&inst, sigma, cfg.samples, cfg.seed, what)
        .map_err(|e| usage(e.to_string()))?;
    let c = stats.scaling_constant(&inst);
    eprintln!(
        "{inst} sigma={sigma}: mean {} stderr {} (C = {c})",
        stats.mean, stats.stderr
    );
    match format_or(cfg, Format::Csv) {
        Format::Csv => write_csv(
            cfg,
            &[
                format!("mean {} stderr {} samples {} seed {}", stats.mean, stats.stderr, stats.samples, stats.seed),
                format!("bound {}", stats.per_sample_bound_fn),
                format!("scaling_constant {c}"),
            ],
            |w| {
                w.write_record(["sample_index", "eta", "q_prime", "bound"])?;
                for r in &rows {
                    w.write_record([
                        r.sample_index.to_string(),
                        num(r.eta),
                        num(r.q_prime),
                        num(r.bound),
                    ])?;
                }
                Ok(())
            },
        )?,
        Format::Json => write_json(cfg, json!({ "stats": stats, "scaling_constant": c }))?,
    }
    Ok(Exit::Ok)
}

const INTEGRALITY_NOTE: &str =
    "integrality uses constant 1 in both branches; the second-branch constant is unspecified";

fn bounds(cfg: &RunConfig) -> Result<Exit, CliError> {
    let inst = instance(cfg)?;
    let s = bound_shapes(&inst, cfg.sigma);
    match format_or(cfg, Format::Json) {
        Format::Json => write_json(cfg, json!({ "instance": inst, "shapes": s, "note": INTEGRALITY_NOTE }))?,
        Format::Csv => write_csv(cfg, &[s.label.to_string(), INTEGRALITY_NOTE.to_string()], |w| {
            w.write_record(["quantity", "value"])?;
            let mut put = |k: &str, v: f64| w.write_record([k.to_string(), num(v)]);
            put("baseline", s.baseline)?;
            put("integrality", s.integrality)?;
            put("upper_lower_layers", s.upper_lower_layers)?;
            put("upper_upper_layers", s.upper_upper_layers)?;
            if let Some(v) = s.smoothed {
                put("smoothed", v)?;
            }
            Ok(())
        })?,
    }
    Ok(Exit::Ok)
}

fn check_ij(cfg: &RunConfig) -> Result<Exit, CliError> {
    let inst = instance(cfg)?;
    let sigma = cfg.sigma.ok_or_else(|| usage("--sigma is required"))?;
    let report = check_ij_inequalities(&inst, sigma).map_err(|e| match e {
        soskp_core::analysis::AnalysisError::Precondition(m) => usage(m),
        other => CliError::Failed(other.to_string()),
    })?;
    let ok = report.all_hold();
    eprintln!(
        "{inst} sigma={sigma}: {} of {} inequalities hold, min relative margin {:e}",
        report.rows.iter().filter(|r| r.margin > 0.0).count(),
        report.rows.len(),
        report.min_margin()
    );
    match format_or(cfg, Format::Csv) {
        Format::Csv => write_csv(cfg, &[], |w| {
            w.write_record(["k", "in_C", "I_k", "I_bound", "J_k", "J_bound", "margin"])?;
            for r in &report.rows {
                w.write_record([
                    r.k.to_string(),
                    r.in_c.to_string(),
                    num(r.i_k),
                    num(r.i_bound),
                    num(r.j_k),
                    num(r.j_bound),
                    num(r.margin),
                ])?;
            }
            Ok(())
        })?,
        Format::Json => write_json(cfg, json!({ "report": report }))?,
    }
    Ok(if ok { Exit::Ok } else { Exit::Failed })
}
