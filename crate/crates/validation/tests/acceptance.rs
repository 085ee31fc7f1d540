//! End-to-end acceptance run. Prints one `PASS`/`FAIL` line per criterion
//! and exits non-zero if any criterion fails.
//!
//! With `--as-rwvd` as its first argument the executable behaves as the
//! `rwvd` binary instead.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rwvd_cli::sequence::parse_sequence_spec;
use rwvd_core::criteria::{
    classify, criterion_partial_sums, lemma46_partial_sums, log_growth_slope, prop61_sums, Verdict, WalkKind,
};
use rwvd_core::estimators::{
    bound_band_scan, exact_hitting_dp, exact_return_prob, exact_return_prob_2d, lclt_exponent_fit, mc_hitting_grid,
    ratio_grid, DpTable, DpTable2,
};
use rwvd_core::lattice_walk::{build_adaptive_progress, estimate_planar_return, AdaptiveConfig, LatticeDistribution, Marginal};
use rwvd_core::numeric::SeriesVerdict;
use rwvd_core::rng::StreamKey;
use rwvd_core::schedules::ScheduleFamily;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lazy(dim: usize) -> LatticeDistribution<f64> {
    LatticeDistribution::lazy(dim).unwrap()
}

fn verdicts() -> Outcome {
    use ScheduleFamily as F;
    let cases = [
        (WalkKind::Z2inZ3, F::DoubleExpSqrt, Verdict::Recurrent),
        (WalkKind::Z2inZ3, F::DoubleExpTheta { theta: 0.4 }, Verdict::Transient),
        (WalkKind::Z2inZ4, F::SingleExp, Verdict::Recurrent),
        (WalkKind::Z2inZ4, F::DoubleExpTheta { theta: 0.9 }, Verdict::Transient),
        (WalkKind::Z1inZ3, F::ExpPolyLog { alpha: 2.0 }, Verdict::Recurrent),
        (WalkKind::Z1inZ3, F::ExpPolyLog { alpha: 2.5 }, Verdict::Transient),
    ];
    let mut slowest = Duration::ZERO;
    for (kind, fam, want) in cases {
        let start = Instant::now();
        let report = classify(kind, &fam, 100_000).map_err(|e| format!("{kind:?} {fam:?}: {e}"))?;
        let took = start.elapsed();
        slowest = slowest.max(took);
        ensure(report.verdict == want, || format!("{kind:?} {fam:?}: {:?}, want {want:?}", report.verdict))?;
        ensure(took < Duration::from_secs(10), || format!("{kind:?} {fam:?} took {took:?}"))?;
    }
    Ok(format!("6/6 verdicts at N = 1e5, slowest {:.2} s", slowest.as_secs_f64()))
}

fn series_asymptotics() -> Outcome {
    let sums = criterion_partial_sums(WalkKind::Z2inZ3, &ScheduleFamily::<f64>::DoubleExpSqrt, 1_000_000)
        .map_err(|e| e.to_string())?;
    let slope = log_growth_slope(&sums, 1_000, 1_000_000).ok_or("no fit")?;
    ensure((slope - 0.5).abs() <= 0.05, || format!("slope {slope}"))?;
    let mut worst: f64 = 0.0;
    for ratio in [1.01, 1.5, 2.0, std::f64::consts::E, 10.0, 1000.0] {
        let fam = ScheduleFamily::Geometric { ratio };
        for n in fam.first_index()..=10_000 {
            let p = fam.phi(n).map_err(|e| e.to_string())?;
            worst = worst.max((p - 1.0 / (n as f64 + 1.0)).abs());
        }
    }
    ensure(worst <= 1e-12, || format!("geometric phi off by {worst:e}"))?;
    Ok(format!("slope {slope:.4}, geometric phi max error {worst:.1e}"))
}

fn lclt_exponents() -> Outcome {
    let start = Instant::now();
    let one = lclt_exponent_fit(&lazy(1), 64, 4096).map_err(|e| e.to_string())?;
    let two = lclt_exponent_fit(&lazy(2), 32, 512).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    ensure((one.slope + 0.5).abs() <= 0.03, || format!("1D slope {}", one.slope))?;
    ensure((two.slope + 1.0).abs() <= 0.05, || format!("2D slope {}", two.slope))?;
    ensure(took < Duration::from_secs(60), || format!("took {took:?}"))?;
    Ok(format!("1D {:.4}, 2D {:.4}, {:.2} s", one.slope, two.slope, took.as_secs_f64()))
}

fn bound_bands() -> Outcome {
    let one = bound_band_scan(&lazy(1), 1, &ratio_grid(&[64, 128, 256, 512, 1024], &[0.25, 1.0, 4.0]))
        .map_err(|e| e.to_string())?;
    let two = bound_band_scan(&lazy(2), 2, &ratio_grid(&[4, 8, 16, 32, 64, 128], &[2.0, 4.0, 8.0]))
        .map_err(|e| e.to_string())?;
    ensure(two.excluded.is_empty() && two.cells.len() == 18, || "2D grid lost cells".into())?;
    ensure(one.spread() <= 10.0, || format!("1D spread {}", one.spread()))?;
    ensure(two.spread() <= 10.0, || format!("2D spread {}", two.spread()))?;
    Ok(format!("1D spread {:.3}, 2D spread {:.3}", one.spread(), two.spread()))
}

/// Probability of a visit to the origin at some `k` in `[a, b)`, summed over
/// every path of the 1D simple walk.
fn enumerate_simple(a: usize, b: usize) -> f64 {
    fn go(x: i64, k: usize, a: usize, b: usize, w: f64) -> f64 {
        if k >= a && x == 0 {
            return w;
        }
        if k + 1 == b {
            return 0.0;
        }
        go(x - 1, k + 1, a, b, w / 2.0) + go(x + 1, k + 1, a, b, w / 2.0)
    }
    go(0, 0, a, b, 1.0)
}

fn oracle_equivalence() -> Outcome {
    let dist = lazy(1);
    let starts = [1u64, 3, 8, 20, 50, 100, 200, 400, 700, 1024];
    let lengths = [1u64, 2, 5, 10, 25, 50, 100, 250, 500, 1000];
    let cells: Vec<(u64, u64)> = starts
        .iter()
        .flat_map(|&a| lengths.iter().map(move |&l| (a, a + l)))
        .collect();
    let mc = mc_hitting_grid(&dist, &cells, 100_000, 2024).map_err(|e| e.to_string())?;
    let mut agree = 0;
    for (&(a, b), est) in cells.iter().zip(&mc) {
        let exact = exact_hitting_dp(&dist, a, b, None).map_err(|e| e.to_string())?.value;
        if (est.p_hat - exact).abs() <= 3.0 * est.stderr {
            agree += 1;
        }
    }
    ensure(agree >= 97, || format!("{agree}/100 cells within 3 se"))?;
    let brute = enumerate_simple(4, 8);
    let dp = exact_hitting_dp(&LatticeDistribution::<f64>::simple(1).unwrap(), 4, 8, None)
        .map_err(|e| e.to_string())?
        .value;
    ensure((brute - dp).abs() <= 1e-12, || format!("enumeration {brute} vs {dp}"))?;
    Ok(format!("{agree}/100 cells within 3 se, enumeration gap {:.1e}", (brute - dp).abs()))
}

fn alternating_transience() -> Outcome {
    let check = |a: &str, b: &str, n: usize| -> Result<rwvd_core::criteria::Prop61Report<f64>, String> {
        let a = parse_sequence_spec(a, None).map_err(|e| e.to_string())?.values(n)?;
        let b = parse_sequence_spec(b, None).map_err(|e| e.to_string())?.values(n)?;
        prop61_sums(&a, &b, n).map_err(|e| e.to_string())
    };
    let exp = check("n^2", "2^n", 200)?;
    let both = |r: &rwvd_core::criteria::Prop61Report<f64>| {
        r.dumb_verdict == SeriesVerdict::Convergent && r.t_verdict == SeriesVerdict::Convergent
    };
    ensure(both(&exp), || format!("n^2, 2^n: {:?} / {:?}", exp.dumb_verdict, exp.t_verdict))?;
    let beta = exp.dumb_fit.map(|f| f.beta).ok_or("no tail fit")?;
    ensure((beta + 1.5).abs() <= 0.1, || format!("dumb exponent {beta}"))?;

    let logs = check("(log n)^2.5", "(log n)^4.5", 100_000)?;
    ensure(both(&logs), || format!("log sequences: {:?} / {:?}", logs.dumb_verdict, logs.t_verdict))?;

    // Super-geometric decay: the successive ratio t_{n+1} / t_n tends to zero,
    // so it must at least halve while n doubles.
    let t = &exp.t_terms;
    let ratio = |n: usize| t[n] / t[n - 1];
    let (mid, end) = (ratio(t.len() / 2), ratio(t.len() - 1));
    ensure(end <= 0.5 * mid, || {
        format!("t-terms decay only geometrically: ratio {mid:.4} at n = {}, {end:.4} at n = {}", t.len() / 2, t.len())
    })?;
    Ok(format!("dumb exponent {beta:.3}, t ratio {mid:.2e} -> {end:.2e}, both series convergent in both cases"))
}

/// A positive integer sequence of length `n` built from blocks whose values
/// are set relative to the level the previous block ended at.
fn mixture(key: StreamKey, n: usize, cap: f64) -> Vec<f64> {
    let mut counter = 0u64;
    let mut u = || {
        counter += 1;
        key.uniform(counter)
    };
    let mut seq = Vec::with_capacity(n);
    let mut level = (1.0 + 99.0 * u()).round();
    while seq.len() < n {
        let len = (1e4f64.powf(u())).round() as usize;
        let kind = (u() * 4.0) as u32;
        let ratio = 1.05 + 0.5 * u();
        let spike = 2f64.powi(1 + (u() * 20.0) as i32);
        for j in 0..len.min(n - seq.len()) {
            let v = match kind {
                0 => level,
                1 => level * ratio.powi(j as i32 + 1),
                2 => level * ((j + 2) as f64).powi(2),
                _ if j % 2 == 0 => level * spike,
                _ => 1.0,
            };
            seq.push(v.min(cap).round().max(1.0));
        }
        level = *seq.last().unwrap();
    }
    seq
}

fn min_term_suite() -> Outcome {
    let n = 100_000;
    let root = StreamKey::master(46);
    let mut failures = Vec::new();
    for i in 0..1000u64 {
        let seq = mixture(root.split(i), n, 1e6);
        let report = lemma46_partial_sums(&seq, n).map_err(|e| e.to_string())?;
        if report.bounded_heuristic != Some(true) {
            failures.push(i);
        }
    }
    ensure(failures.is_empty(), || {
        format!(
            "{}/1000 sequences without strictly decreasing increments (first: {:?})",
            failures.len(),
            &failures[..failures.len().min(5)]
        )
    })?;
    Ok("1000/1000 sequences with strictly decreasing increments".into())
}

fn adaptive_schedule() -> Outcome {
    let dist = lazy(3);
    let cfg = AdaptiveConfig {
        levels: 8,
        target: 0.5,
        replicas: 10_000,
        seed: 8,
        ..AdaptiveConfig::default()
    };
    let progress = build_adaptive_progress(&dist, &cfg).map_err(|e| e.to_string())?;
    let mut checked = Vec::new();
    for w in progress.values.windows(2) {
        let est = estimate_planar_return(&dist, w[0], w[1], 10_000, 9_001).map_err(|e| e.to_string())?;
        ensure(est.p_hat >= 0.45, || format!("({}, {}] re-estimated at {}", w[0], w[1], est.p_hat))?;
        checked.push(format!("({}, {}]: {:.3}", w[0], w[1], est.p_hat));
    }
    if let Some(e) = progress.failure {
        return Err(format!(
            "built {} of 8 intervals before stopping ({e}); re-estimated {}",
            checked.len(),
            checked.join(", ")
        ));
    }
    Ok(format!("8/8 intervals re-estimated at or above 0.45: {}", checked.join(", ")))
}

fn determinism() -> Outcome {
    let runs: &[&[&str]] = &[
        &["simulate", "--walk", "z1z3", "--family", "geometric", "--ratio", "1.5", "--horizon", "4000", "--replicas", "500", "--seed", "3"],
        &["simulate", "--walk", "alternating", "--a-seq", "n^2", "--b-seq", "2^n", "--horizon", "2000", "--replicas", "300", "--seed", "4"],
        &["hitting", "--dim", "2", "--a", "10", "--b", "500", "--replicas", "20000", "--seed", "5"],
        &["adaptive", "--levels", "1", "--replicas", "2000", "--seed", "6"],
        &["bands", "--dim", "1", "--grid", "64,128;0.25,1,4"],
        &["lclt", "--dim", "2", "--kmin", "32", "--kmax", "256"],
    ];
    for args in runs {
        let mut outputs = Vec::new();
        for threads in ["1", "4", "16"] {
            let out = Command::new(std::env::current_exe().map_err(|e| e.to_string())?)
                .arg(CLI_MODE)
                .args(*args)
                .env("RWVD_THREADS", threads)
                .output()
                .map_err(|e| e.to_string())?;
            ensure(out.status.success(), || {
                format!("{} failed: {}", args[0], String::from_utf8_lossy(&out.stderr))
            })?;
            outputs.push(out.stdout);
        }
        ensure(outputs.windows(2).all(|w| w[0] == w[1]), || format!("{} differs across thread counts", args[0]))?;
    }
    Ok(format!("{} commands byte-identical under 1, 4 and 16 threads", runs.len()))
}

fn structural_invariants() -> Outcome {
    let laws = [Marginal::<f64>::simple(), Marginal::lazy(), Marginal::new(vec![(-2, 0.2), (-1, 0.1), (0, 0.4), (1, 0.1), (2, 0.2)]).unwrap()];
    let mut worst: f64 = 0.0;
    for m in &laws {
        let mut table = DpTable::new(2 * 2000).map_err(|e| e.to_string())?;
        for _ in 0..2000 {
            table.step(m);
            table.absorb_origin();
            worst = worst.max(table.conservation_error());
        }
        let mut table = DpTable2::new(2 * 200).map_err(|e| e.to_string())?;
        for _ in 0..200 {
            table.step(m, &laws[1]);
            table.absorb_origin();
            worst = worst.max(table.conservation_error());
        }
    }
    ensure(worst <= 1e-10, || format!("conservation error {worst:e}"))?;

    let mut product_gap: f64 = 0.0;
    for mx in &laws {
        for my in &laws {
            let dist = LatticeDistribution::new(vec![mx.clone(), my.clone()]).map_err(|e| e.to_string())?;
            for k in [0, 1, 2, 5, 10, 33, 64, 100] {
                let p = exact_return_prob(&dist, k, None).map_err(|e| e.to_string())?;
                let q = exact_return_prob_2d(&dist, k, None).map_err(|e| e.to_string())?;
                product_gap = product_gap.max((p - q).abs());
            }
        }
    }
    ensure(product_gap <= 1e-12, || format!("2D vs product gap {product_gap:e}"))?;

    let mut triples = 0;
    for (dist, top) in [(lazy(1), 600u64), (LatticeDistribution::simple(1).unwrap(), 600), (lazy(2), 120)] {
        let points: Vec<u64> = [1u64, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377, 600]
            .into_iter()
            .filter(|&p| p <= top)
            .collect();
        let hit = |a: u64, b: u64| exact_hitting_dp(&dist, a, b, None).map(|h| h.value).map_err(|e| e.to_string());
        for (i, &a) in points.iter().enumerate() {
            for (j, &b) in points.iter().enumerate().skip(i + 1) {
                for &c in &points[j + 1..] {
                    let (ab, bc, ac) = (hit(a, b)?, hit(b, c)?, hit(a, c)?);
                    ensure(ab <= ac + 1e-12 && bc <= ac + 1e-12, || format!("inclusion fails at ({a}, {b}, {c})"))?;
                    ensure(ac <= ab + bc + 1e-12, || format!("subadditivity fails at ({a}, {b}, {c})"))?;
                    triples += 1;
                }
            }
        }
    }
    Ok(format!(
        "conservation {worst:.1e}, product gap {product_gap:.1e}, {triples} triples ordered"
    ))
}

/// First argument that turns this executable into the `rwvd` command line,
/// so the determinism check runs each command in a fresh process.
const CLI_MODE: &str = "--as-rwvd";

fn main() -> ExitCode {
    let mut argv: Vec<_> = std::env::args_os().collect();
    if argv.get(1).is_some_and(|a| a == CLI_MODE) {
        argv.remove(1);
        return ExitCode::from(rwvd_cli::run(argv) as u8);
    }
    let checks: [(&str, fn() -> Outcome); 10] = [
        ("classifier verdicts", verdicts),
        ("criterion-series asymptotics", series_asymptotics),
        ("local CLT exponents", lclt_exponents),
        ("hitting bound bands", bound_bands),
        ("Monte Carlo vs exact hitting", oracle_equivalence),
        ("alternating-walk transience sums", alternating_transience),
        ("min-term increments", min_term_suite),
        ("adaptive schedule", adaptive_schedule),
        ("thread-count determinism", determinism),
        ("structural invariants", structural_invariants),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
