//! Acceptance criteria P1-P9. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line; exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use exciton_trap::classical::{absorption_time_estimate, mfpt_closed_form};
use exciton_trap::scan::{linspace, logspace};
use exciton_trap::validate::{classical_suite, invariant_suite, isomorphism_suite, reduced_suite};
use exciton_trap::{absorption_time_for, critical_length, Engine, NetworkKind, NetworkSpec};

const SEED: u64 = 20240611;

type Criterion = (&'static str, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn tau(spec: &NetworkSpec, gamma: f64, engine: Engine) -> f64 {
    absorption_time_for(spec, gamma, engine).map(|r| r.tau).unwrap_or(f64::NAN)
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn p1() -> Outcome {
    let star = NetworkSpec::star(4, 4).with_defect(3f64.sqrt());
    let chain = NetworkSpec { kind: NetworkKind::AsymmetricChain, ..star };
    let cases = [
        ("tau(0)", tau(&star, 0.0, Engine::FullFls), 37.0, 2.0),
        ("chain(0.02)", tau(&chain, 0.02, Engine::FullFls), 45.0, 3.0),
        ("star(0.02)", tau(&star, 0.02, Engine::FullFls), 75.0, 5.0),
        ("star(0.1)", tau(&star, 0.1, Engine::FullFls), 200.0, 15.0),
        ("chain(0.1)", tau(&chain, 0.1, Engine::FullFls), 50.0, 4.0),
    ];
    let pass = cases.iter().all(|&(_, v, t, tol)| within(v, t, tol));
    let detail = cases
        .iter()
        .map(|(n, v, t, tol)| format!("{n}={v:.2}[{t}±{tol}]{}", if within(*v, *t, *tol) { "" } else { "!" }))
        .collect::<Vec<_>>()
        .join(" ");
    Outcome { pass, detail }
}

fn p2() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for delta in [0.0, 2.0] {
        let star = NetworkSpec::star(5, 5).with_defect(delta);
        let chain = NetworkSpec { kind: NetworkKind::AsymmetricChain, ..star };
        let ts = tau(&star, 0.5, Engine::Reduced);
        let tc = tau(&chain, 0.5, Engine::FullFls);
        pass &= (160.0..=230.0).contains(&ts) && (40.0..=60.0).contains(&tc);
        detail.push(format!("delta={delta}: star={ts:.2} chain={tc:.2}"));
    }
    Outcome { pass, detail: detail.join(" ") }
}

fn p3() -> Outcome {
    let deltas = linspace(0.0, 4.0, 81);
    let mut pass = true;
    let mut detail = Vec::new();
    for kind in [NetworkKind::ExtendedStar, NetworkKind::AsymmetricChain] {
        for gamma in [0.01, 0.1, 0.5] {
            let taus: Vec<f64> = deltas
                .iter()
                .map(|&d| tau(&NetworkSpec::new(kind, 5, 5).with_defect(d), gamma, Engine::Auto))
                .collect();
            let (imin, tmin) = taus
                .iter()
                .cloned()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            let tmax = taus.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let argmin = deltas[imin];
            let at_optimum = (argmin - 2.0).abs() <= 0.15 + 1e-12;
            let flat = (tmax - tmin) / tmin < 0.01;
            let ok = if gamma < 0.5 { at_optimum && taus.iter().all(|t| t.is_finite()) } else { !at_optimum || flat };
            pass &= ok;
            let excess = taus[40] / tmin - 1.0;
            detail.push(format!(
                "{kind}/{gamma}: argmin={argmin:.2} tau(2J)/min-1={excess:.4}{}",
                if ok { "" } else { "!" }
            ));
        }
    }
    Outcome { pass, detail: detail.join(" ") }
}

fn suite_outcome(r: exciton_trap::Result<exciton_trap::validate::SuiteReport>) -> Outcome {
    match r {
        Ok(rep) => Outcome {
            pass: rep.passed(),
            detail: format!(
                "checks={} violations={} worst={:.3e}{}",
                rep.checks,
                rep.violations.len(),
                rep.worst,
                rep.violations.first().map(|v| format!(" first: {v}")).unwrap_or_default()
            ),
        },
        Err(e) => Outcome { pass: false, detail: format!("error: {e}") },
    }
}

fn p7() -> Outcome {
    let mut worst_strong: f64 = 0.0;
    let mut worst_weak: f64 = 0.0;
    let mut strong_ok = true;
    for kind in [NetworkKind::ExtendedStar, NetworkKind::AsymmetricChain] {
        for delta in [0.0, 2.0] {
            let spec = NetworkSpec::new(kind, 5, 4).with_defect(delta);
            let rel = |g: f64| {
                let q = tau(&spec, g, Engine::Auto);
                let c = mfpt_closed_form(&spec, g).map(absorption_time_estimate).unwrap_or(f64::NAN);
                (q - c).abs() / q
            };
            for g in logspace(1.0, 10.0, 5) {
                let e = rel(g);
                strong_ok &= e < 0.10;
                worst_strong = worst_strong.max(e);
            }
            for g in [0.01, 0.02] {
                worst_weak = worst_weak.max(rel(g));
            }
        }
    }
    Outcome {
        pass: strong_ok && worst_weak > 0.10,
        detail: format!("max error gamma in [1,10]: {worst_strong:.4}; max error weak: {worst_weak:.4}"),
    }
}

fn p8() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for n in 3..=8usize {
        let lstar = critical_length(n).unwrap();
        let mut last_positive = None;
        for l in 2..=12usize {
            let spec = NetworkSpec::star(n, l);
            let opt = tau(&spec.with_defect(spec.optimal_defect()), 0.0, Engine::Reduced);
            let zero = tau(&spec, 0.0, Engine::Reduced);
            if 1.0 - opt / zero > 0.0 {
                last_positive = Some(l);
            }
        }
        // the region S > 0 ends between the last positive L and the next one
        let boundary = last_positive.map(|l| l as f64 + 0.5).unwrap_or(f64::NAN);
        let ok = (boundary - lstar).abs() <= 1.0;
        pass &= ok;
        detail.push(format!("N={n}: {boundary:.1} vs {lstar:.2}{}", if ok { "" } else { "!" }));
    }
    Outcome { pass, detail: detail.join(" ") }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("P1", "absorption times N=L=4", p1),
        ("P2", "plateau N=L=5 gamma=0.5J", p2),
        ("P3", "optimal defect survival and loss", p3),
        ("P4", "star/chain isomorphism", || suite_outcome(isomorphism_suite(SEED, 20))),
        ("P5", "reduced vs full", || suite_outcome(reduced_suite(SEED, 20))),
        ("P6", "classical MFPT three ways", || suite_outcome(classical_suite(SEED, 50))),
        ("P7", "quantum vs classical", p7),
        ("P8", "critical length boundary", p8),
        ("P9", "invariants", || suite_outcome(invariant_suite(SEED, 30))),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        let start = Instant::now();
        let out = run();
        if !out.pass {
            failed += 1;
        }
        println!(
            "{id} {:<4} {name} ({:.1}s): {}",
            if out.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            out.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
