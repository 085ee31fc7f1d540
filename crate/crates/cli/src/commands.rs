//! One function per subcommand: validate, call the library, render.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use rwvd_core::criteria::{classify, lemma46_partial_sums, prop61_sums, WalkKind};
use rwvd_core::estimators::{bound_band_scan, exact_hitting_dp, lclt_exponent_fit, mc_hitting, ratio_grid, HittingEstimate};
use rwvd_core::lattice_walk::{
    build_adaptive_progress, simulate_replicas, trace_replicas, AdaptiveConfig, AlternatingWalk, LatticeDistribution,
    ReturnRecord, VaryingWalk, Walk,
};
use rwvd_core::schedules::{ExplicitSchedule, PhiKind, ScheduleFamily};

use crate::args::*;
use crate::sequence::{parse_sequence_spec, SequenceSpec};
use crate::{envelope, write_atomic, CliError, CliResult, Rendered};

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn resolve(path: &Path, base: Option<&Path>) -> PathBuf {
    match base {
        Some(b) if path.is_relative() => b.join(path),
        _ => path.to_path_buf(),
    }
}

fn law(arg: LawArg, dim: usize) -> CliResult<LatticeDistribution<f64>> {
    Ok(match arg {
        LawArg::Simple => LatticeDistribution::simple(dim)?,
        LawArg::Lazy => LatticeDistribution::lazy(dim)?,
    })
}

fn walk_kind(w: WalkArg) -> WalkKind {
    match w {
        WalkArg::Z2z3 => WalkKind::Z2inZ3,
        WalkArg::Z2z4 => WalkKind::Z2inZ4,
        WalkArg::Z1z3 => WalkKind::Z1inZ3,
    }
}

fn spec(flag: &str, text: &str, base: Option<&Path>) -> CliResult<SequenceSpec> {
    parse_sequence_spec(text, base).map_err(|e| config(format!("--{flag}: {e}")))
}

struct FamilyParams<'a> {
    kind: FamilyKind,
    theta: Option<f64>,
    alpha: Option<f64>,
    ratio: Option<f64>,
    power: Option<f64>,
    file: Option<&'a Path>,
}

impl<'a> From<&'a FamilyArgs> for FamilyParams<'a> {
    fn from(f: &'a FamilyArgs) -> Self {
        Self {
            kind: f.family,
            theta: f.theta,
            alpha: f.alpha,
            ratio: f.ratio,
            power: f.power,
            file: f.file.as_deref(),
        }
    }
}

fn family(p: FamilyParams<'_>, base: Option<&Path>) -> CliResult<ScheduleFamily<f64>> {
    let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| config(format!("--{flag} is required for this family")));
    let fam = match p.kind {
        FamilyKind::DoubleexpSqrt => ScheduleFamily::DoubleExpSqrt,
        FamilyKind::DoubleexpTheta => ScheduleFamily::DoubleExpTheta {
            theta: need(p.theta, "theta")?,
        },
        FamilyKind::SingleExp => ScheduleFamily::SingleExp,
        FamilyKind::ExpPolylog => ScheduleFamily::ExpPolyLog {
            alpha: need(p.alpha, "alpha")?,
        },
        FamilyKind::Geometric => ScheduleFamily::Geometric {
            ratio: need(p.ratio, "ratio")?,
        },
        FamilyKind::PowerLaw => ScheduleFamily::PowerLaw {
            power: need(p.power, "power")?,
        },
        FamilyKind::Explicit => {
            let file = p.file.ok_or_else(|| config("--file is required for the explicit family"))?;
            let path = resolve(file, base);
            let list = match spec("file", &format!("@{}", path.display()), None)? {
                SequenceSpec::List(v) => v,
                _ => unreachable!(),
            };
            ScheduleFamily::Explicit(ExplicitSchedule::new(list)?)
        }
    };
    fam.validate()?;
    Ok(fam)
}

fn csv_table<R: Serialize>(header: &[&str], rows: impl IntoIterator<Item = R>) -> CliResult<String> {
    let io = |e: csv::Error| CliError::Runtime(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.serialize(row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Runtime(e.to_string()))
}

pub(crate) fn render(command: Command, base: Option<&Path>) -> CliResult<Rendered> {
    let started = Instant::now();
    let name = command.name();
    match command {
        Command::Classify(a) => {
            let fam = family((&a.family).into(), base)?;
            let report = classify(walk_kind(a.walk), &fam, a.nmax)?;
            envelope(name, &a, &a.out, started, &report)
        }
        Command::Phi(a) => phi(a, base, started),
        Command::Simulate(a) => simulate(a, base, started),
        Command::Hitting(a) => {
            if !(a.dim == 1 || a.dim == 2) {
                return Err(config("--dim must be 1 or 2"));
            }
            let dist = law(a.law, a.dim)?;
            let est = if a.exact {
                HittingEstimate::exact(exact_hitting_dp(&dist, a.a, a.b, None)?.value)
            } else {
                if a.replicas == 0 {
                    return Err(config("--replicas must be positive"));
                }
                mc_hitting(&dist, a.a, a.b, a.replicas, a.seed)?
            };
            envelope(name, &a, &a.out, started, &est)
        }
        Command::Bands(a) => bands(a, started),
        Command::Lclt(a) => {
            if !(a.dim == 1 || a.dim == 2) {
                return Err(config("--dim must be 1 or 2"));
            }
            let fit = lclt_exponent_fit(&law(a.law, a.dim)?, a.kmin, a.kmax)?;
            envelope(name, &a, &a.out, started, &fit)
        }
        Command::Adaptive(a) => {
            let cfg = AdaptiveConfig {
                levels: a.levels,
                target: a.target,
                replicas: a.replicas,
                seed: a.seed,
                cap: a.cap,
            };
            let progress = build_adaptive_progress(&law(a.law, 3)?, &cfg)?;
            if let Some(e) = progress.failure {
                return Err(CliError::Runtime(format!("{e}; built so far: {:?}", progress.values)));
            }
            #[derive(Serialize)]
            struct Payload {
                schedule: Vec<u64>,
                estimates: Vec<f64>,
                target: f64,
                replicas: u64,
                seed: u64,
            }
            let payload = Payload {
                schedule: progress.values,
                estimates: progress.estimates,
                target: a.target,
                replicas: a.replicas,
                seed: a.seed,
            };
            envelope(name, &a, &a.out, started, &payload)
        }
        Command::Prop61(a) => {
            let av = spec("a-seq", &a.a_seq, base)?.values(a.nmax).map_err(|e| config(format!("--a-seq: {e}")))?;
            let bv = spec("b-seq", &a.b_seq, base)?.values(a.nmax).map_err(|e| config(format!("--b-seq: {e}")))?;
            let report = prop61_sums(&av, &bv, a.nmax)?;
            envelope(name, &a, &a.out, started, &report)
        }
        Command::Lemma46(a) => {
            let bv = spec("b-seq", &a.b_seq, base)?.values(a.nmax).map_err(|e| config(format!("--b-seq: {e}")))?;
            let report = lemma46_partial_sums(&bv, a.nmax)?;
            envelope(name, &a, &a.out, started, &report)
        }
        Command::Sweep(_) => Err(config("sweep entries cannot nest another sweep")),
    }
}

fn phi(a: PhiArgs, base: Option<&Path>, started: Instant) -> CliResult<Rendered> {
    if a.n_from == 0 || a.n_to < a.n_from {
        return Err(config("need 1 <= --n-from <= --n-to"));
    }
    let fam = family((&a.family).into(), base)?;
    let kind = match a.kind {
        PhiKindArg::Phi => PhiKind::Phi,
        PhiKindArg::Phi1 => PhiKind::Phi1,
    };
    let rows = (a.n_from..=a.n_to)
        .map(|n| fam.phi_kind(kind, n).map(|v| (n, v)))
        .collect::<rwvd_core::Result<Vec<(u64, f64)>>>()?;
    match a.format {
        TableFormat::Csv => Ok(Rendered {
            text: csv_table(&["n", "value"], rows)?,
            output: a.out.output.clone(),
        }),
        TableFormat::Json => {
            #[derive(Serialize)]
            struct Row {
                n: u64,
                value: f64,
            }
            let rows: Vec<Row> = rows.into_iter().map(|(n, value)| Row { n, value }).collect();
            envelope("phi", &a, &a.out, started, &rows)
        }
    }
}

/// Block lengths for the alternating walk, enough to pass `horizon` (or the
/// whole list for file specs).
fn blocks(a: &SequenceSpec, b: &SequenceSpec, horizon: u64) -> CliResult<(Vec<u64>, Vec<u64>)> {
    let take = |s: &SequenceSpec, n: usize, flag: &str| -> CliResult<Vec<u64>> {
        let n = match s {
            SequenceSpec::List(v) => n.min(v.len()),
            _ => n,
        };
        s.integers(n).map_err(|e| config(format!("--{flag}: {e}")))
    };
    let mut n = 8usize;
    loop {
        let av = take(a, n, "a-seq")?;
        let bv = take(b, n, "b-seq")?;
        let covered: u64 = av.iter().zip(&bv).map(|(x, y)| x.saturating_add(*y)).fold(0, u64::saturating_add);
        if covered >= horizon || av.len() < n || bv.len() < n || n as u64 >= horizon {
            return Ok((av, bv));
        }
        n *= 2;
    }
}

fn simulate(a: SimulateArgs, base: Option<&Path>, started: Instant) -> CliResult<Rendered> {
    if a.replicas == 0 {
        return Err(config("--replicas must be positive"));
    }
    let walk: Box<dyn Walk> = match a.walk {
        SimWalkArg::Alternating => {
            let a_txt = a.a_seq.as_deref().ok_or_else(|| config("--a-seq is required for the alternating walk"))?;
            let b_txt = a.b_seq.as_deref().ok_or_else(|| config("--b-seq is required for the alternating walk"))?;
            let (av, bv) = blocks(&spec("a-seq", a_txt, base)?, &spec("b-seq", b_txt, base)?, a.horizon)?;
            Box::new(AlternatingWalk::new(&av, &bv, a.horizon)?)
        }
        w => {
            let kind = match w {
                SimWalkArg::Z2z3 => WalkKind::Z2inZ3,
                SimWalkArg::Z2z4 => WalkKind::Z2inZ4,
                _ => WalkKind::Z1inZ3,
            };
            let (low, full) = kind.dims().unwrap();
            let params = FamilyParams {
                kind: a.family.ok_or_else(|| config("--family is required for this walk"))?,
                theta: a.theta,
                alpha: a.alpha,
                ratio: a.ratio,
                power: a.power,
                file: a.file.as_deref(),
            };
            let fam = family(params, base)?;
            Box::new(VaryingWalk::new(&law(a.law, full)?, low, &fam, a.horizon)?)
        }
    };
    let summary = simulate_replicas(walk.as_ref(), a.seed, a.replicas);
    if let Some(trace) = &a.trace {
        let starts = walk.interval_starts();
        let records = trace_replicas(walk.as_ref(), a.seed, a.replicas);
        let rows = records.iter().flat_map(|r| {
            r.return_times
                .iter()
                .map(move |&k| (r.replica, k, ReturnRecord::interval_of(starts, k)))
        });
        let text = csv_table(&["replica", "k", "interval_index"], rows)?;
        write_atomic(trace, text.as_bytes())?;
    }
    envelope("simulate", &a, &a.out, started, &summary)
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> CliResult<Vec<T>> {
    text.split(',')
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| config(format!("--grid: bad {what} `{t}`"))))
        .collect()
}

fn bands(a: BandsArgs, started: Instant) -> CliResult<Rendered> {
    if !(a.dim == 1 || a.dim == 2) {
        return Err(config("--dim must be 1 or 2"));
    }
    let (starts, factors) = a
        .grid
        .split_once(';')
        .ok_or_else(|| config("--grid must look like `a1,a2,...;f1,f2,...`"))?;
    let starts: Vec<u64> = parse_list(starts, "start")?;
    let factors: Vec<f64> = parse_list(factors, "factor")?;
    if starts.is_empty() || factors.is_empty() {
        return Err(config("--grid needs at least one start and one factor"));
    }
    if starts.contains(&0) || factors.iter().any(|f| !(*f > 0.0) || !f.is_finite()) {
        return Err(config("--grid starts and factors must be positive"));
    }
    let report = bound_band_scan(&law(a.law, a.dim)?, a.dim, &ratio_grid(&starts, &factors))?;
    match a.format {
        TableFormat::Csv => Ok(Rendered {
            text: csv_table(&["a", "b", "p_exact", "reference", "ratio"], report.cells.iter().map(|c| {
                (c.a, c.b, c.p_exact, c.reference, c.ratio)
            }))?,
            output: a.out.output.clone(),
        }),
        TableFormat::Json => envelope("bands", &a, &a.out, started, &report),
    }
}
