use rayon::prelude::*;
use serde::Serialize;

use super::distribution::{LatticeDistribution, Marginal, ProductSampler};
use crate::error::{Error, Result};
use crate::rng::{replica_key, StreamKey};
use crate::schedules::{ScheduleFamily, DEFAULT_CAP};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ProfileMode {
    /// Coordinates `0..low_dim` move at every step; all `full_dim`
    /// coordinates move at the scheduled times.
    VaryingDimension {
        low_dim: usize,
        full_dim: usize,
        schedule: ScheduleFamily<f64>,
    },
    /// `a_1` diagonal steps, `b_1` horizontal steps, `a_2` diagonal, ...
    AlternatingBlocks { a_seq: Vec<u64>, b_seq: Vec<u64> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionProfile {
    pub mode: ProfileMode,
    pub horizon: u64,
}

impl DimensionProfile {
    pub fn varying(low_dim: usize, full_dim: usize, schedule: ScheduleFamily<f64>, horizon: u64) -> Self {
        Self {
            mode: ProfileMode::VaryingDimension {
                low_dim,
                full_dim,
                schedule,
            },
            horizon,
        }
    }

    pub fn alternating(a_seq: Vec<u64>, b_seq: Vec<u64>, horizon: u64) -> Self {
        Self {
            mode: ProfileMode::AlternatingBlocks { a_seq, b_seq },
            horizon,
        }
    }
}

/// Returns to the origin observed in one run. Time `0` is not a return.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReturnRecord {
    /// Filled only when the trace was requested.
    pub return_times: Vec<u64>,
    /// Entry `i` counts returns inside interval `i` (see
    /// [`Walk::interval_starts`]).
    pub per_interval_counts: Vec<u64>,
    pub returns_before_first: u64,
    pub total_returns: u64,
    pub final_position: Vec<i64>,
    pub steps_taken: u64,
    pub seed: u64,
    pub replica: u64,
}

impl ReturnRecord {
    /// 1-based interval index of time `k`, `0` before the first interval.
    pub fn interval_of(starts: &[u64], k: u64) -> usize {
        starts.partition_point(|&s| s <= k)
    }
}

/// A prepared walk that can be replayed for any stream key.
pub trait Walk: Sync {
    fn horizon(&self) -> u64;
    fn dimension(&self) -> usize;
    /// First time of each counted interval; interval `i` runs up to (not
    /// including) `starts[i + 1]`, the last one up to the horizon.
    fn interval_starts(&self) -> &[u64];
    fn run(&self, key: StreamKey, trace: bool) -> RunOutcome;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub return_times: Vec<u64>,
    pub per_interval_counts: Vec<u64>,
    pub returns_before_first: u64,
    pub total_returns: u64,
    pub final_position: Vec<i64>,
}

struct Tracker {
    pos: Vec<i64>,
    nonzero: usize,
}

impl Tracker {
    fn new(dim: usize) -> Self {
        Self {
            pos: vec![0; dim],
            nonzero: 0,
        }
    }

    #[inline(always)]
    fn shift(&mut self, j: usize, step: i64) {
        if step != 0 {
            let old = self.pos[j];
            let new = old + step;
            self.pos[j] = new;
            if old == 0 {
                self.nonzero += 1;
            }
            if new == 0 {
                self.nonzero -= 1;
            }
        }
    }

    fn at_origin(&self) -> bool {
        self.nonzero == 0
    }
}

struct Counter {
    trace: bool,
    times: Vec<u64>,
    per_interval: Vec<u64>,
    before_first: u64,
    total: u64,
}

impl Counter {
    fn new(intervals: usize, trace: bool) -> Self {
        Self {
            trace,
            times: Vec::new(),
            per_interval: vec![0; intervals],
            before_first: 0,
            total: 0,
        }
    }

    #[inline]
    fn record(&mut self, k: u64, interval: Option<usize>) {
        self.total += 1;
        match interval {
            Some(i) => self.per_interval[i] += 1,
            None => self.before_first += 1,
        }
        if self.trace {
            self.times.push(k);
        }
    }

    fn finish(self, pos: Vec<i64>) -> RunOutcome {
        RunOutcome {
            return_times: self.times,
            per_interval_counts: self.per_interval,
            returns_before_first: self.before_first,
            total_returns: self.total,
            final_position: pos,
        }
    }
}

/// Z^d-in-Z^D walk in varying dimension with frozen high coordinates.
pub struct VaryingWalk {
    sampler: ProductSampler,
    low_dim: usize,
    full_dim: usize,
    times: Vec<u64>,
    horizon: u64,
}

impl VaryingWalk {
    /// `low_dim == full_dim` is accepted and gives the homogeneous walk.
    pub fn new(
        dist: &LatticeDistribution<f64>,
        low_dim: usize,
        schedule: &ScheduleFamily<f64>,
        horizon: u64,
    ) -> Result<Self> {
        dist.validate()?;
        let full_dim = dist.dimension();
        if low_dim == 0 || low_dim > full_dim {
            return Err(Error::param(
                "low_dim",
                format!("need 1 <= d <= D = {full_dim}, got {low_dim}"),
            ));
        }
        if horizon > DEFAULT_CAP {
            return Err(Error::NotMaterializable {
                index: 0,
                cap: DEFAULT_CAP,
            });
        }
        let times = schedule.materialize_up_to(horizon, DEFAULT_CAP)?;
        Ok(Self {
            sampler: ProductSampler::new(dist),
            low_dim,
            full_dim,
            times,
            horizon,
        })
    }

    pub fn schedule_times(&self) -> &[u64] {
        &self.times
    }
}

impl Walk for VaryingWalk {
    fn horizon(&self) -> u64 {
        self.horizon
    }

    fn dimension(&self) -> usize {
        self.full_dim
    }

    fn interval_starts(&self) -> &[u64] {
        &self.times
    }

    fn run(&self, key: StreamKey, trace: bool) -> RunOutcome {
        let big = self.full_dim as u64;
        let mut walker = Tracker::new(self.full_dim);
        let mut counter = Counter::new(self.times.len(), trace);
        let mut next = 0usize;
        let mut interval = None;
        for k in 1..=self.horizon {
            let full = next < self.times.len() && self.times[next] == k;
            if full {
                interval = Some(next);
                next += 1;
            }
            let active = if full { self.full_dim } else { self.low_dim };
            let base = (k - 1) * big;
            for j in 0..active {
                let step = self.sampler.coords[j].sample(key.draw(base + j as u64));
                walker.shift(j, step);
            }
            if walker.at_origin() {
                counter.record(k, interval);
            }
        }
        counter.finish(walker.pos)
    }
}

/// The planar walk alternating diagonal blocks (both coordinates fair ±1)
/// with horizontal blocks (x fair ±1, y frozen).
pub struct AlternatingWalk {
    fair: ProductSampler,
    /// `(first step, length, diagonal)` for every block reaching the horizon.
    blocks: Vec<(u64, u64, bool)>,
    starts: Vec<u64>,
    horizon: u64,
}

impl AlternatingWalk {
    pub fn new(a_seq: &[u64], b_seq: &[u64], horizon: u64) -> Result<Self> {
        if a_seq.contains(&0) || b_seq.contains(&0) {
            return Err(Error::param("a_seq/b_seq", "block lengths must be positive"));
        }
        if horizon > DEFAULT_CAP {
            return Err(Error::NotMaterializable {
                index: 0,
                cap: DEFAULT_CAP,
            });
        }
        let mut blocks = Vec::new();
        let mut t = 0u64;
        let mut n = 0usize;
        while t < horizon {
            let a = *a_seq.get(n).ok_or(Error::SequenceExhausted {
                name: "a_seq",
                len: a_seq.len(),
            })?;
            blocks.push((t + 1, a, true));
            t = t.saturating_add(a);
            if t >= horizon {
                break;
            }
            let b = *b_seq.get(n).ok_or(Error::SequenceExhausted {
                name: "b_seq",
                len: b_seq.len(),
            })?;
            blocks.push((t + 1, b, false));
            t = t.saturating_add(b);
            n += 1;
        }
        let fair = LatticeDistribution::product_of(Marginal::<f64>::simple(), 2)?;
        Ok(Self {
            fair: ProductSampler::new(&fair),
            starts: blocks.iter().map(|b| b.0).collect(),
            blocks,
            horizon,
        })
    }
}

impl Walk for AlternatingWalk {
    fn horizon(&self) -> u64 {
        self.horizon
    }

    fn dimension(&self) -> usize {
        2
    }

    fn interval_starts(&self) -> &[u64] {
        &self.starts
    }

    fn run(&self, key: StreamKey, trace: bool) -> RunOutcome {
        let mut walker = Tracker::new(2);
        let mut counter = Counter::new(self.blocks.len(), trace);
        for (i, &(start, len, diagonal)) in self.blocks.iter().enumerate() {
            let end = (start + len - 1).min(self.horizon);
            let active = if diagonal { 2 } else { 1 };
            for k in start..=end {
                let base = (k - 1) * 2;
                for j in 0..active {
                    let step = self.fair.coords[j].sample(key.draw(base + j as u64));
                    walker.shift(j, step);
                }
                if walker.at_origin() {
                    counter.record(k, Some(i));
                }
            }
        }
        counter.finish(walker.pos)
    }
}

fn record_from(outcome: RunOutcome, horizon: u64, seed: u64, replica: u64) -> ReturnRecord {
    ReturnRecord {
        return_times: outcome.return_times,
        per_interval_counts: outcome.per_interval_counts,
        returns_before_first: outcome.returns_before_first,
        total_returns: outcome.total_returns,
        final_position: outcome.final_position,
        steps_taken: horizon,
        seed,
        replica,
    }
}

/// One run of replica `replica` of master seed `seed`.
pub fn run_replica(walk: &dyn Walk, seed: u64, replica: u64, trace: bool) -> ReturnRecord {
    let outcome = walk.run(replica_key(seed, replica), trace);
    record_from(outcome, walk.horizon(), seed, replica)
}

/// Simulates the walk in varying dimension described by `profile`; a single
/// run with seed `s` is replica `0` of master seed `s`.
pub fn simulate_rwvd(
    dist: &LatticeDistribution<f64>,
    profile: &DimensionProfile,
    seed: u64,
    record_trace: bool,
) -> Result<ReturnRecord> {
    match &profile.mode {
        ProfileMode::VaryingDimension {
            low_dim,
            full_dim,
            schedule,
        } => {
            if *full_dim != dist.dimension() {
                return Err(Error::param(
                    "full_dim",
                    format!("profile says D = {full_dim}, distribution has {}", dist.dimension()),
                ));
            }
            let walk = VaryingWalk::new(dist, *low_dim, schedule, profile.horizon)?;
            Ok(run_replica(&walk, seed, 0, record_trace))
        }
        ProfileMode::AlternatingBlocks { .. } => Err(Error::param(
            "profile",
            "alternating blocks use simulate_alternating",
        )),
    }
}

pub fn simulate_alternating(a_seq: &[u64], b_seq: &[u64], horizon: u64, seed: u64) -> Result<ReturnRecord> {
    let walk = AlternatingWalk::new(a_seq, b_seq, horizon)?;
    Ok(run_replica(&walk, seed, 0, true))
}

/// Order-independent aggregate over replicas.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicaSummary {
    pub replicas: u64,
    pub seed: u64,
    pub horizon: u64,
    pub interval_starts: Vec<u64>,
    pub interval_return_totals: Vec<u64>,
    pub mean_returns_per_interval: Vec<f64>,
    pub returns_before_first_total: u64,
    pub total_returns: u64,
    pub replicas_with_return: u64,
    pub mean_final_position: Vec<f64>,
    pub var_final_position: Vec<f64>,
}

#[derive(Debug, Clone)]
struct Acc {
    per_interval: Vec<u64>,
    before_first: u64,
    total: u64,
    with_return: u64,
    sum: Vec<i128>,
    sum_sq: Vec<u128>,
}

impl Acc {
    fn new(intervals: usize, dim: usize) -> Self {
        Self {
            per_interval: vec![0; intervals],
            before_first: 0,
            total: 0,
            with_return: 0,
            sum: vec![0; dim],
            sum_sq: vec![0; dim],
        }
    }

    fn push(mut self, o: &RunOutcome) -> Self {
        for (a, c) in self.per_interval.iter_mut().zip(&o.per_interval_counts) {
            *a += c;
        }
        self.before_first += o.returns_before_first;
        self.total += o.total_returns;
        self.with_return += u64::from(o.total_returns > 0);
        for (j, &x) in o.final_position.iter().enumerate() {
            self.sum[j] += x as i128;
            self.sum_sq[j] += (x as i128 * x as i128) as u128;
        }
        self
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.per_interval.iter_mut().zip(other.per_interval) {
            *a += b;
        }
        self.before_first += other.before_first;
        self.total += other.total;
        self.with_return += other.with_return;
        for j in 0..self.sum.len() {
            self.sum[j] += other.sum[j];
            self.sum_sq[j] += other.sum_sq[j];
        }
        self
    }
}

/// Runs `replicas` independent replicas in parallel and aggregates them.
///
/// The result only depends on `(walk, seed, replicas)`: every replica owns
/// its stream and the aggregate is a sum of integers.
pub fn simulate_replicas(walk: &dyn Walk, seed: u64, replicas: u64) -> ReplicaSummary {
    let intervals = walk.interval_starts().len();
    let dim = walk.dimension();
    let acc = (0..replicas)
        .into_par_iter()
        .fold(
            || Acc::new(intervals, dim),
            |acc, r| acc.push(&walk.run(replica_key(seed, r), false)),
        )
        .reduce(|| Acc::new(intervals, dim), Acc::merge);
    let rf = replicas.max(1) as f64;
    let mean: Vec<f64> = acc.sum.iter().map(|&s| s as f64 / rf).collect();
    let var = acc
        .sum_sq
        .iter()
        .zip(&mean)
        .map(|(&s2, m)| s2 as f64 / rf - m * m)
        .collect();
    ReplicaSummary {
        replicas,
        seed,
        horizon: walk.horizon(),
        interval_starts: walk.interval_starts().to_vec(),
        mean_returns_per_interval: acc.per_interval.iter().map(|&c| c as f64 / rf).collect(),
        interval_return_totals: acc.per_interval,
        returns_before_first_total: acc.before_first,
        total_returns: acc.total,
        replicas_with_return: acc.with_return,
        mean_final_position: mean,
        var_final_position: var,
    }
}

/// Per-replica records with traces, in replica order.
pub fn trace_replicas(walk: &dyn Walk, seed: u64, replicas: u64) -> Vec<ReturnRecord> {
    (0..replicas)
        .into_par_iter()
        .map(|r| run_replica(walk, seed, r, true))
        .collect()
}
