//! Acceptance criteria, one printed line each. Run with
//! `cargo test -p soskp-core --test acceptance`.
//!
//! Criteria listed in `EXPECTED_FAIL` are implemented in full and reported as
//! FAIL; the analysis is kept with the project notes. The binary exits
//! nonzero if any other criterion fails, or if an expected failure starts
//! passing (so the list cannot go stale).

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Rational;
use serde_json::{json, Value};

use soskp_core::analysis::{check_ij_inequalities, fit_affine, run_smoothed};
use soskp_core::certlib::{
    akr_polynomial, build_certificate, chebyshev_parameters, verify_certificate, BuildOptions,
    CertMeta, Regime, VerifyOptions,
};
use soskp_core::model::KnapsackInstance;
use soskp_core::numerics::{cheb_eval, smallest_root_shifted_cheb, HpFloat};
use soskp_core::oracle::{feasibility_at, sos_rank, Method, RankOptions, Status};

const EXPECTED_FAIL: &[u32] = &[5, 7];

struct Outcome {
    pass: bool,
    detail: String,
}

fn inst(n: u64, q: &str) -> KnapsackInstance {
    KnapsackInstance::parse(n, q).unwrap()
}

fn rat(s: &str) -> Rational {
    soskp_core::model::parse_rational(s).unwrap()
}

// ---------------------------------------------------------------- 1

/// Naive product of monic linear factors `prod (t - roots_i)`, lowest degree first.
fn expand_roots(roots: &[Rational]) -> Vec<Rational> {
    let mut c = vec![Rational::from(1)];
    for r in roots {
        let mut next = vec![Rational::new(); c.len() + 1];
        for (i, a) in c.iter().enumerate() {
            next[i + 1] += a;
            next[i] -= Rational::from(a * r);
        }
        c = next;
    }
    c
}

fn trim(mut v: Vec<Rational>) -> Vec<Rational> {
    while v.last().is_some_and(|c| *c == 0) {
        v.pop();
    }
    v
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    let mut bad = Vec::new();
    for k in 1..=25u32 {
        let falling: Vec<Rational> = (0..k).map(Rational::from).collect();
        let ck = expand_roots(&falling);
        let mut falling1 = falling.clone();
        falling1.push(Rational::from(k));
        let ck1 = expand_roots(&falling1);
        for _ in 0..100 {
            // r = k - 1 + a/b with 0 < a <= b
            let b: u64 = rng.gen_range(1..=1_000_000);
            let a: u64 = rng.gen_range(1..=b);
            let r = Rational::from(k - 1) + Rational::from((a, b));
            let id = akr_polynomial(k, &r).unwrap();

            let mut roots = falling.clone();
            roots.push(r.clone());
            let lhs = trim(expand_roots(&roots));
            // (k - r) k! C(t,k) + (k+1)! C(t,k+1) = (k - r) * falling_k + falling_{k+1}
            let coef = Rational::from(k) - &r;
            let mut rhs = vec![Rational::new(); ck1.len()];
            for (i, c) in ck.iter().enumerate() {
                rhs[i] += Rational::from(c * &coef);
            }
            for (i, c) in ck1.iter().enumerate() {
                rhs[i] += c;
            }
            let rhs = trim(rhs);
            let lib_l = id.lhs.coeffs().to_vec();
            let lib_r = id.rhs.coeffs().to_vec();
            let ok = id.equal && lhs == rhs && lib_l == lhs && lib_r == rhs;
            if !ok {
                bad.push(format!("k={k} r={r}"));
            }
            checked += 1;
        }
    }
    Outcome {
        pass: bad.is_empty(),
        detail: format!("{checked} identities compared coefficientwise, {} mismatches {:?}", bad.len(), &bad[..bad.len().min(3)]),
    }
}

// ---------------------------------------------------------------- 2

fn criterion_2() -> Outcome {
    let opts = RankOptions::default();
    let mut rows = Vec::new();
    let mut ok = true;
    let cases: &[(u64, &str, u32)] = &[
        (2, "1/2", 2),
        (4, "2", 0),
        (5, "0", 0),
        (5, "5", 0),
        (3, "-1/2", 0),
        (3, "7/2", 0),
        (6, "-3", 0),
        (6, "13", 0),
    ];
    for &(n, q, want) in cases {
        let r = sos_rank(&inst(n, q), n as u32, &opts).unwrap();
        ok &= r.rank == Some(want) && !r.unresolved;
        rows.push(format!("({n},{q})->{:?}", r.rank));
    }
    // the dense formulation agrees on the headline value
    let d = sos_rank(&inst(2, "1/2"), 2, &RankOptions { method: Method::Dense, ..opts }).unwrap();
    ok &= d.rank == Some(2);
    rows.push(format!("dense (2,1/2)->{:?}", d.rank));
    Outcome {
        pass: ok,
        detail: rows.join(" "),
    }
}

// ---------------------------------------------------------------- 3

fn criterion_3() -> Outcome {
    let qs = ["1/2", "3/4", "3/2", "5/2", "1+2^-8"];
    let mut total = 0;
    let mut mismatches = Vec::new();
    let mut marginal = 0;
    for n in 2..=5u64 {
        for q in qs {
            let i = inst(n, q);
            for d in 0..=3u32 {
                let dense = feasibility_at(&i, d, &RankOptions { method: Method::Dense, ..RankOptions::default() }).unwrap();
                let sym = feasibility_at(&i, d, &RankOptions::default()).unwrap();
                total += 1;
                if dense.status == Status::Marginal || sym.status == Status::Marginal {
                    marginal += 1;
                }
                if dense.status != sym.status {
                    mismatches.push(format!("n={n} q={q} d={d}: {:?} vs {:?}", dense.status, sym.status));
                }
            }
        }
    }
    Outcome {
        pass: mismatches.is_empty() && marginal == 0,
        detail: format!("{total} (n,q,d) points, {} mismatches, {marginal} marginal {:?}", mismatches.len(), mismatches),
    }
}

// ---------------------------------------------------------------- 4

fn criterion_4() -> Outcome {
    let vopts = VerifyOptions::default();
    let mut fails = Vec::new();
    let mut lower = 0;
    let mut upper = 0;
    for n in [100u64, 1000, 10000] {
        for qh in ["1/2", "1/10", "2^-20", "2^-30"] {
            let i = inst(n, qh);
            let cert = build_certificate(&i, &BuildOptions::default()).unwrap();
            let rep = verify_certificate(&cert, &vopts);
            let (_, d, m) = chebyshev_parameters(&i);
            let degree_ok = cert.sigma1.degree() == Some(2 * (d * m) as usize)
                && matches!(&cert.meta, CertMeta::Lower(l) if l.d == d && l.m == m);
            let resid_ok = rep.max_identity_residual.to_f64() <= 1e-12;
            if cert.regime != Regime::LowerLayers || !rep.pass || !degree_ok || !resid_ok {
                fails.push(format!("lower n={n} q={qh} {:?} degree_ok={degree_ok}", rep.failed_checks()));
            }
            lower += 1;
        }
    }
    for n in 4u64..=40 {
        let fl = n / 2;
        let mut qs = vec![format!("{}/2", 2 * n - 1), format!("{}/2", 2 * n - 3), format!("{}/2", 2 * fl + 1)];
        qs.dedup();
        for q in qs {
            let i = inst(n, &q);
            let cert = build_certificate(&i, &BuildOptions::default()).unwrap();
            let rep = verify_certificate(&cert, &vopts);
            let structural = ["sign_alternation", "roots_at_upper_layers", "single_root_in_floor_ceil"]
                .iter()
                .all(|k| rep.lemma_checks.get(*k) == Some(&true));
            let resid_ok = rep.max_identity_residual.to_f64() <= 1e-12;
            if cert.regime != Regime::UpperLayers || !rep.pass || !structural || !resid_ok {
                fails.push(format!("upper n={n} q={q} {:?}", rep.failed_checks()));
            }
            upper += 1;
        }
    }
    Outcome {
        pass: fails.is_empty(),
        detail: format!("{lower} lower-layer and {upper} upper-layer certificates, {} failures {:?}", fails.len(), fails),
    }
}

// ---------------------------------------------------------------- 5

fn criterion_5() -> Outcome {
    let mut checked = 0;
    let mut fails = Vec::new();
    // diagnostics for violations: regime, and whether the rank equals n - floor q
    let mut upper_only = true;
    let mut rank_is_n_minus_floor = true;
    for n in 1..=6u64 {
        for k in 0..n {
            for frac in ["1/2", "1/4", "3/4", "2^-8"] {
                let qr = Rational::from(k) + rat(frac);
                let q = qr.to_string();
                let i = KnapsackInstance::new(n, qr).unwrap();
                let Ok(cert) = build_certificate(&i, &BuildOptions::default()) else {
                    continue;
                };
                let r = sos_rank(&i, n as u32, &RankOptions::default()).unwrap();
                checked += 1;
                match r.rank {
                    Some(rank) if !r.unresolved && rank >= 1 && rank <= cert.reported_degree => {}
                    other => {
                        upper_only &= cert.regime == Regime::UpperLayers;
                        rank_is_n_minus_floor &= other == Some((n - k) as u32);
                        fails.push(format!(
                            "n={n} q={q} {}: oracle {other:?} vs reported {}",
                            cert.regime, cert.reported_degree
                        ))
                    }
                }
            }
        }
    }
    // integral q in (0, n): rank 0 and certlib declines to build
    for n in 2..=6u64 {
        for k in 1..n {
            let i = inst(n, &k.to_string());
            let r = sos_rank(&i, n as u32, &RankOptions::default()).unwrap();
            if r.rank != Some(0) || build_certificate(&i, &BuildOptions::default()).is_ok() {
                upper_only = false;
                fails.push(format!("n={n} q={k}: integral case"));
            }
        }
    }
    let diag = if fails.is_empty() {
        String::new()
    } else {
        format!(
            "; all violations upper-layer: {upper_only}; violating ranks all equal n - floor q: {rank_is_n_minus_floor}"
        )
    };
    Outcome {
        pass: fails.is_empty() && checked > 0,
        detail: format!(
            "{checked} instances with both oracle and certificate, {} violations{diag} {:?}",
            fails.len(),
            &fails[..fails.len().min(4)]
        ),
    }
}

// ---------------------------------------------------------------- 6

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/integrality_trend_n6.json")
}

fn criterion_6() -> Outcome {
    let hats = ["2^-12", "2^-8", "2^-4", "2^-1"];
    let mut rows = Vec::new();
    let mut ranks = Vec::new();
    for h in hats {
        let q = format!("1+{h}");
        let r = sos_rank(&inst(6, &q), 6, &RankOptions::default()).unwrap();
        rows.push(json!({ "q": q, "q_hat": h, "rank": r.rank, "unresolved": r.unresolved }));
        ranks.push(r.rank.filter(|_| !r.unresolved));
    }
    let table = json!({
        "n": 6,
        "floor_q": 1,
        "method": "symmetric",
        "convention": soskp_core::oracle::CONVENTION,
        "rows": rows,
    });
    if std::env::var_os("SOSKP_BLESS").is_some() {
        std::fs::create_dir_all(golden_path().parent().unwrap()).unwrap();
        std::fs::write(golden_path(), serde_json::to_string_pretty(&table).unwrap() + "\n").unwrap();
    }
    let golden: Option<Value> = std::fs::read_to_string(golden_path())
        .ok()
        .and_then(|t| serde_json::from_str(&t).ok());
    let resolved = ranks.iter().all(Option::is_some);
    let monotone = ranks.windows(2).all(|w| w[0] >= w[1]);
    let matches = golden.as_ref() == Some(&table);
    Outcome {
        pass: resolved && monotone && matches,
        detail: format!(
            "ranks {:?} for q̂ = {hats:?}; non-increasing {monotone}; golden file {}",
            ranks,
            if golden.is_none() { "missing" } else if matches { "matches" } else { "differs" }
        ),
    }
}

// ---------------------------------------------------------------- 7

fn criterion_7() -> Outcome {
    let i = inst(100, "3/2");
    let sigmas = [1e-1, 1e-2, 1e-3, 1e-4];
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut means = Vec::new();
    for s in sigmas {
        let st = run_smoothed(&i, s, 100_000, 42).unwrap();
        xs.push(-s.ln());
        ys.push(st.mean);
        means.push(format!("{:.5}±{:.1e}", st.mean, st.stderr));
    }
    let fit = fit_affine(&xs, &ys);
    let fit_ok = fit.r_squared >= 0.99;

    let j = inst(50, "5/2");
    let mut ij_ok = true;
    let mut margins = Vec::new();
    for s in [0.3, 0.1, 0.03] {
        match check_ij_inequalities(&j, s) {
            Ok(r) => {
                ij_ok &= r.all_hold() && r.rows.len() == 50;
                margins.push(format!("σ={s}: min margin {:.2e}", r.min_margin()));
            }
            Err(e) => {
                ij_ok = false;
                margins.push(format!("σ={s}: {e}"));
            }
        }
    }
    Outcome {
        pass: fit_ok && ij_ok,
        detail: format!(
            "means {means:?}, affine-in-ln(1/σ) R² = {:.4} (needs ≥ 0.99: {}); I/J inequalities {} [{}]",
            fit.r_squared,
            if fit_ok { "ok" } else { "not met" },
            if ij_ok { "all hold" } else { "VIOLATED" },
            margins.join("; ")
        ),
    }
}

// ---------------------------------------------------------------- 8

/// `T_d(y)` for `|y| >= 1` by the hyperbolic closed form, in f64.
fn cheb_outside(d: u32, y: f64) -> f64 {
    let v = (d as f64 * y.abs().acosh()).cosh();
    if y < 0.0 && d % 2 == 1 {
        -v
    } else {
        v
    }
}

fn criterion_8() -> Outcome {
    let slack = 1e-10;
    let mut fails = Vec::new();
    let mut root_checks = 0;
    for d in 1..=50u32 {
        for big_n in 1..=50u64 {
            let r0 = smallest_root_shifted_cheb(d, big_n, 128).to_f64();
            let direct = big_n as f64 * (1.0 - (std::f64::consts::PI / (2.0 * d as f64)).cos());
            let bound = std::f64::consts::PI.powi(2) * big_n as f64 / (8.0 * (d * d) as f64);
            let agree = (r0 - direct).abs() <= 1e-9 * (1.0 + direct);
            if !(r0 <= bound * (1.0 + slack)) || !agree {
                fails.push(format!("r0 d={d} N={big_n}: {r0} vs {bound}"));
            }
            root_checks += 1;
        }
    }
    let mut growth_checks = 0;
    for d in [5u32, 10, 20] {
        for big_n in [10u64, 100] {
            for i in 0..100 {
                let c = big_n as f64 * i as f64 / 99.0;
                let y = -c / big_n as f64 - 1.0;
                let lib = cheb_eval(d, &HpFloat::from_f64(y, 128)).to_f64();
                let indep = cheb_outside(d, y);
                let rhs = 0.25 * (1.0 + (2.0 * c / big_n as f64).sqrt()).powi(2 * d as i32);
                let agree = (lib - indep).abs() <= 1e-10 * indep.abs();
                if !(lib * lib >= rhs * (1.0 - slack)) || !agree {
                    fails.push(format!("T_{d}^2 at c={c} N={big_n}: {} < {rhs}", lib * lib));
                }
                growth_checks += 1;
            }
        }
    }
    Outcome {
        pass: fails.is_empty(),
        detail: format!("{root_checks} root bounds, {growth_checks} growth bounds, {} violations {:?}", fails.len(), &fails[..fails.len().min(3)]),
    }
}

fn main() {
    // honour `cargo test -- <filter>` loosely: run everything unless told to list
    if std::env::args().any(|a| a == "--list") {
        for k in 1..=8 {
            println!("criterion_{k}: test");
        }
        return;
    }
    type Crit = fn() -> Outcome;
    let criteria: BTreeMap<u32, (&str, Duration, Crit)> = BTreeMap::from([
        (1, ("exact AKR identity suite", Duration::from_secs(5), criterion_1 as Crit)),
        (2, ("known rank values", Duration::from_secs(10), criterion_2)),
        (3, ("dense vs symmetric cross-validation", Duration::from_secs(300), criterion_3)),
        (4, ("constructive certificates verify", Duration::from_secs(120), criterion_4)),
        (5, ("oracle rank within certificate degree", Duration::from_secs(600), criterion_5)),
        (6, ("integrality-hardness trend (golden)", Duration::from_secs(900), criterion_6)),
        (7, ("smoothed scaling signature and I/J bounds", Duration::from_secs(120), criterion_7)),
        (8, ("Chebyshev lemma checks", Duration::from_secs(30), criterion_8)),
    ]);
    let mut unexpected = Vec::new();
    for (id, (name, limit, f)) in &criteria {
        let t = Instant::now();
        let out = f();
        let took = t.elapsed();
        let in_time = took <= *limit;
        let pass = out.pass && in_time;
        let expected_fail = EXPECTED_FAIL.contains(id);
        let tag = match (pass, expected_fail) {
            (true, false) => "PASS",
            (false, true) => "FAIL (expected, analysed in notes)",
            (true, true) => "PASS (unexpected; update EXPECTED_FAIL)",
            (false, false) => "FAIL",
        };
        if pass == expected_fail {
            unexpected.push(*id);
        }
        println!(
            "criterion {id} [{tag}] {name}: {} | {:.2?} (limit {:?}{})",
            out.detail,
            took,
            limit,
            if in_time { "" } else { ", EXCEEDED" }
        );
    }
    if unexpected.is_empty() {
        println!("acceptance: all outcomes as recorded");
    } else {
        println!("acceptance: unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
