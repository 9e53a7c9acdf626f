//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero when any criterion fails.
//!
//! Suites run through the `coupleman` binary at their default parameters, so
//! this also exercises config resolution, JSON output and exit codes.

use std::process::{Command, ExitCode};
use std::time::Instant;

use coupleman::sde::{fitted_order, strong_convergence_probe, ComplexHyperbolicBm};
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_coupleman");

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn run(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(BIN).args(args).env_remove("COUPLEMAN_SEED").output().expect("binary runs");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn verify(suite: &str) -> (i32, Value) {
    let (code, stdout) = run(&["verify", suite, "--threads", "1"]);
    (code, serde_json::from_slice(&stdout).expect("JSON report"))
}

fn checks<'a>(report: &'a Value, prefix: &str) -> std::vec::IntoIter<&'a Value> {
    let all = report["checks"].as_array().expect("checks array");
    let hits: Vec<&Value> = all.iter().filter(|c| c["name"].as_str().is_some_and(|n| n.starts_with(prefix))).collect();
    hits.into_iter()
}

fn num(c: &Value, field: &str) -> f64 {
    c[field].as_f64().unwrap_or_else(|| panic!("{} has no numeric {field}", c["name"]))
}

fn passed(c: &Value) -> bool {
    c["verdict"] == "pass"
}

fn comparison_oracle(report: &Value, secs: f64) -> Outcome {
    let want = (-2.0f64 * 1.0 * 0.5 / 2.0).exp();
    let Some(c) = checks(report, "comparison_1d/absorbed/t=50").next() else {
        return outcome(false, "absorbed check missing");
    };
    let got = num(c, "point");
    outcome((got - want).abs() <= 0.015 && passed(c), format!("absorbed {got:.6} vs {want:.6} (±0.015), {secs:.1} s"))
}

fn martingale() -> Outcome {
    let (code, r) = verify("martingale");
    let mut n = 0;
    let mut worst: f64 = 0.0;
    let mut ok = code == 0;
    for strategy in ["synchronous", "independent", "mirror"] {
        for f in ["z", "z^2", "moebius"] {
            for t in ["0.25", "0.5", "1", "2"] {
                let name = format!("martingale/{strategy}/{f}/t={t}");
                let Some(c) = checks(&r, &name).find(|c| c["name"] == name.as_str()) else {
                    return outcome(false, format!("{name} missing"));
                };
                let ratio = num(c, "point") / num(c, "se");
                worst = worst.max(ratio);
                ok &= ratio <= 3.0 && passed(c);
                n += 1;
            }
        }
    }
    outcome(ok && n == 36, format!("{n} means, worst |error|/se = {worst:.2}, exit {code}"))
}

fn caratheodory() -> Outcome {
    let (code, r) = verify("caratheodory");
    let mut ok = code == 0;
    let mut parts = Vec::new();
    for t in ["0.5", "1", "2", "4"] {
        let sb = checks(&r, &format!("caratheodory/mirror/survival_bound/t={t}")).next();
        let fs = checks(&r, &format!("caratheodory/mirror/family_sup/t={t}")).next();
        let (Some(sb), Some(fs)) = (sb, fs) else {
            return outcome(false, format!("t={t} checks missing"));
        };
        // The recorded se belongs to 2P̂.
        ok &= 0.5 <= num(sb, "point") + 3.0 * num(sb, "se") && passed(sb);
        ok &= (num(fs, "point") - 0.5).abs() <= 3.0 * num(fs, "se") && passed(fs);
        parts.push(format!("t={t}: 2P={:.3} sup={:.4}", num(sb, "point"), num(fs, "point")));
    }
    outcome(ok, parts.join(", "))
}

fn disk_schwarz() -> Outcome {
    let (code, r) = verify("disk_schwarz");
    let mut ok = code == 0;
    let mut n = 0;
    for x in ["0.3", "0.5", "0.7"] {
        for kind in ["z^2", "rotation"] {
            let name = format!("schwarz/mirror/{kind}/x={x}");
            let Some(c) = checks(&r, &name).next() else {
                return outcome(false, format!("{name} missing"));
            };
            ok &= passed(c);
            n += 1;
        }
    }
    outcome(ok, format!("{n} Schwarz checks, exit {code}"))
}

fn h2c() -> Outcome {
    let start = Instant::now();
    let (code, r) = verify("h2c_prop72");
    let mut ok = code == 0;
    let mut parts = Vec::new();
    for s in ["synchronous", "independent"] {
        let Some(c) = checks(&r, &format!("h2c_failure/{s}/survival/t=10")).next() else {
            return outcome(false, format!("{s} check missing"));
        };
        ok &= num(c, "point") >= 0.09 - 3.0 * num(c, "se") && passed(c);
        parts.push(format!("{s} P={:.4}", num(c, "point")));
    }
    parts.push(format!("{:.1} s", start.elapsed().as_secs_f64()));
    outcome(ok, parts.join(", "))
}

fn psd() -> Outcome {
    let (code, r) = verify("psd_probe");
    let get = |name: &str| checks(&r, name).next().map(|c| (num(c, "point"), passed(c)));
    let (Some(sym), Some(eig), Some(drift)) = (
        get("psd/h2c/diffusion_symmetry"),
        get("psd/h2c/eigenvalue_multiset"),
        get("trace_identity/h2c/synchronous/relative_error"),
    ) else {
        return outcome(false, "matrix checks missing");
    };
    let joint: Vec<_> = checks(&r, "psd/").filter(|c| c["name"].as_str().unwrap().ends_with("joint_min_eigenvalue")).collect();
    let min_joint = joint.iter().map(|c| num(c, "point")).fold(f64::INFINITY, f64::min);
    let ok = code == 0
        && sym.0 <= 1e-14
        && eig.0 <= 1e-10
        && joint.len() == 5
        && min_joint >= -1e-9
        && joint.iter().all(|c| passed(c))
        && drift.0 <= 0.1
        && sym.1
        && eig.1
        && drift.1;
    outcome(ok, format!("asym {:.1e}, eig err {:.1e}, min joint eig {min_joint:.1e}, drift rel err {:.3}", sym.0, eig.0, drift.0))
}

fn bounds() -> Outcome {
    let (code, stdout) = run(&["bounds"]);
    let text = String::from_utf8(stdout).expect("utf-8 CSV");
    let mut lines = text.lines();
    if lines.next() != Some("quantity,n,k1,k2,m,r,value") {
        return outcome(false, "unexpected header");
    }
    let mut counts = [0usize; 5];
    let mut mismatches = Vec::new();
    let mut example = false;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let parse = |i: usize| f[i].parse::<f64>().ok();
        let (Some(n), Some(k1), Some(k2), Some(value)) = (parse(1), parse(2), parse(3), parse(6)) else { continue };
        let (m, r) = (parse(4), parse(5));
        let (s1, s2) = ((-k1).sqrt(), (-k2).sqrt());
        let want = match (f[0], m, r) {
            ("coupling_failure_kahler", Some(m), Some(rho)) => Some((0, (8.0 * ((n - 1.0) * s2 + s1) + 2.0 * m) * rho)),
            ("coupling_failure_quaternionic", Some(m), Some(rho)) => {
                Some((1, (8.0 * (n - 1.0) * s2 + 24.0 * s1 + 2.0 * m) * rho))
            }
            ("schwarz_kahler", Some(_), Some(rho)) => Some((2, 16.0 * ((n - 1.0) * s2 + s1) * rho)),
            ("gradient_kahler", Some(m), Some(sup)) => Some((3, (8.0 * ((n - 1.0) * s2 + s1) + 2.0 * m) * sup)),
            ("gradient_quaternionic", Some(m), Some(sup)) => Some((4, (8.0 * (n - 1.0) * s2 + 24.0 * s1 + 2.0 * m) * sup)),
            _ => None,
        };
        if let Some((slot, want)) = want {
            counts[slot] += 1;
            if value != want {
                mismatches.push(format!("{line} (want {want:e})"));
            }
        }
        if line == "coupling_failure_kahler,2,-1.0000000000000000e0,-1.0000000000000000e0,0.0000000000000000e0,1.0000000000000001e-1,1.6000000000000001e0" {
            example = true;
        }
    }
    // 4 n × 9 (k1, k2) × 2 m × 2 ρ; Schwarz only at m = 0; gradients per m.
    let ok = code == 0 && mismatches.is_empty() && counts == [144, 144, 72, 72, 72] && example;
    let mut detail = format!("rows checked {counts:?}, example 1.6 row {}", if example { "present" } else { "missing" });
    if let Some(first) = mismatches.first() {
        detail.push_str(&format!(", {} mismatches, first: {first}", mismatches.len()));
    }
    outcome(ok, detail)
}

fn dominance(report: &Value) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for t in ["0.5", "1", "2"] {
        let Some(c) = checks(report, &format!("dominance/mirror/t={t}")).next() else {
            return outcome(false, format!("t={t} missing"));
        };
        let (disk, line, joint) = (num(c, "point"), num(c, "bound"), num(c, "se"));
        ok &= disk <= line + 3.0 * joint && passed(c);
        parts.push(format!("t={t}: disk {disk:.4} <= line {line:.4}"));
    }
    outcome(ok, parts.join(", "))
}

fn integrator_order() -> Outcome {
    let rows = match strong_convergence_probe(&ComplexHyperbolicBm, [0.0; 4], &[4e-3, 2e-3, 1e-3, 5e-4], 0.512, 2000, 1) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    match fitted_order(&rows) {
        Some(p) => outcome((0.3..=0.7).contains(&p), format!("fitted order {p:.3}")),
        None => outcome(false, "no fit"),
    }
}

fn determinism() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for suite in ["psd_probe", "disk_schwarz"] {
        let (c1, one) = run(&["verify", suite, "--threads", "1", "--seed", "7"]);
        let (c4, four) = run(&["verify", suite, "--threads", "4", "--seed", "7"]);
        let same = one == four && !one.is_empty();
        ok &= same && c1 == c4;
        parts.push(format!("{suite}: {} bytes {}", one.len(), if same { "identical" } else { "DIFFER" }));
    }
    outcome(ok, parts.join(", "))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let (code, comparison) = verify("comparison_1d");
    let comparison_secs = start.elapsed().as_secs_f64();
    type Criterion<'a> = (&'a str, Box<dyn Fn() -> Outcome + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("1-D comparison oracle", Box::new(|| {
            let mut o = comparison_oracle(&comparison, comparison_secs);
            o.pass &= code == 0;
            o
        })),
        ("martingale means", Box::new(martingale)),
        ("Carathéodory survival bound and family sup", Box::new(caratheodory)),
        ("disk stochastic Schwarz", Box::new(disk_schwarz)),
        ("H²(ℂ) coupling failure lower bound", Box::new(h2c)),
        ("diffusion matrix structure", Box::new(psd)),
        ("closed-form bound regression", Box::new(bounds)),
        ("comparison dominance", Box::new(|| dominance(&comparison))),
        ("integrator order", Box::new(integrator_order)),
        ("thread-count determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (title, check)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "criterion {:>2} {} {title}: {} [{:.1} s]",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t0.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
