//! Resonance functions and exhaustive checks of their lower bounds.
//!
//! For a zero-sum tuple (n₁, …, n_{k+2}) the resonance function is
//! Ω = Σ p(n_j). Two bounds are checked by enumerating every labeled tuple
//! inside a magnitude cap that satisfies the ordering hypotheses:
//!
//! * `Res1`: |Ω| ≳ |n₃||n₁| when |n₁| ∼ |n₂| ≳ |n₃| and |n₃| ≫ k·max_{j≥4}|n_j|;
//! * `Res2`: |Ω| ≳ |n₃+n₄||n₁| when |n₁| ∼ |n₂| ≫ |n₃| ≳ |n₄| and
//!   |n₃+n₄| ≫ k·max_{j≥5}|n_j|.
//!
//! Both also require |n₁| ≫ max_{0≤n≤n₀}|p′(n)|.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::fmt_float;
use crate::symbols::{ComparisonConstants, DepthParam, Regime};

pub const MAX_CAP: u32 = 128;
pub const WORST_KEPT: usize = 100;
pub const WORST_CSV_HEADER: &str = "delta,ratio,omega,reference,tuple";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FrequencyTuple {
    entries: Vec<i64>,
}

impl FrequencyTuple {
    pub fn new(entries: Vec<i64>) -> Result<Self> {
        if entries.iter().sum::<i64>() != 0 {
            return Err(Error::NonZeroSum(entries));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Magnitudes in decreasing order.
    pub fn sorted_magnitudes(&self) -> Vec<u64> {
        let mut m: Vec<u64> = self.entries.iter().map(|n| n.unsigned_abs()).collect();
        m.sort_unstable_by(|a, b| b.cmp(a));
        m
    }

    pub fn negated(&self) -> Self {
        Self {
            entries: self.entries.iter().map(|n| -n).collect(),
        }
    }
}

fn omega_unchecked(depth: &DepthParam, entries: &[i64]) -> f64 {
    entries.iter().map(|&n| depth.dispersion(n as f64)).sum()
}

/// Ω = Σ p(n_j) for the dispersion of `depth`, which must belong to `regime`.
pub fn omega(regime: Regime, depth: DepthParam, tuple: &FrequencyTuple) -> Result<f64> {
    if depth.regime() != regime {
        return Err(Error::param(
            "depth",
            format!("{depth} does not belong to the {regime:?} regime"),
        ));
    }
    Ok(omega_unchecked(&depth, tuple.entries()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lemma {
    Res1,
    Res2,
}

impl Lemma {
    pub fn min_k(&self) -> u32 {
        match self {
            Lemma::Res1 => 1,
            Lemma::Res2 => 2,
        }
    }
}

/// One brute-force check: a lemma, a δ-grid and the enumeration box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceQuery {
    pub regime: Regime,
    pub lemma: Lemma,
    pub k: u32,
    pub cap: u32,
    pub deltas: Vec<DepthParam>,
    #[serde(default)]
    pub constants: ComparisonConstants,
}

impl ResonanceQuery {
    pub fn validate(&self) -> Result<()> {
        if self.k < self.lemma.min_k() {
            return Err(Error::param(
                "k",
                format!("{:?} needs k >= {}, got {}", self.lemma, self.lemma.min_k(), self.k),
            ));
        }
        if self.cap == 0 || self.cap > MAX_CAP {
            return Err(Error::param(
                "cap",
                format!("must be in 1..={MAX_CAP}, got {}", self.cap),
            ));
        }
        if self.deltas.is_empty() {
            return Err(Error::param("deltas", "empty depth grid"));
        }
        if let Some(d) = self.deltas.iter().find(|d| d.regime() != self.regime) {
            return Err(Error::param(
                "deltas",
                format!("{d} is not a {:?}-regime depth", self.regime),
            ));
        }
        let c = &self.constants;
        if !(c.sim >= 1.0 && c.much >= 1.0 && c.floor > 0.0) {
            return Err(Error::param(
                "constants",
                "need sim >= 1, much >= 1 and floor > 0",
            ));
        }
        Ok(())
    }
}

/// Smallest admissible |n₁|: much · max_{0≤n≤n₀}|p′(n)|.
pub fn size_threshold(depth: &DepthParam, constants: &ComparisonConstants) -> f64 {
    let max_slope = (0..=constants.n0)
        .map(|n| depth.dispersion_slope(n as f64).abs())
        .fold(0.0, f64::max);
    constants.much * max_slope
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedTuple {
    pub delta: f64,
    pub ratio: f64,
    pub omega: f64,
    pub reference: f64,
    pub tuple: FrequencyTuple,
}

fn rank_order(a: &RankedTuple, b: &RankedTuple) -> std::cmp::Ordering {
    a.ratio
        .total_cmp(&b.ratio)
        .then_with(|| a.delta.total_cmp(&b.delta))
        .then_with(|| a.tuple.cmp(&b.tuple))
}

/// Bounded list of the smallest ratios; deterministic under any merge order.
#[derive(Debug, Clone, Default)]
struct Worst {
    items: Vec<RankedTuple>,
}

impl Worst {
    fn push(&mut self, item: RankedTuple) {
        self.items.push(item);
        if self.items.len() >= 4 * WORST_KEPT {
            self.compact();
        }
    }

    fn compact(&mut self) {
        self.items.sort_by(rank_order);
        self.items.truncate(WORST_KEPT);
    }

    fn merge(mut self, other: Worst) -> Worst {
        self.items.extend(other.items);
        self.compact();
        self
    }

    fn finish(mut self) -> Vec<RankedTuple> {
        self.compact();
        self.items
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaOutcome {
    pub depth: DepthParam,
    pub size_threshold: f64,
    pub tuple_count: u64,
    /// Tuples with |n₁| < 1/δ (the low-frequency sub-regime of the shallow symbol).
    pub below_inverse_delta: u64,
    pub min_ratio: Option<f64>,
    pub argmin: Option<FrequencyTuple>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Every δ has tuples and every minimum is at or above the floor.
    Pass,
    /// Every δ has tuples but some minimum is below the floor.
    BelowFloor,
    /// Some δ has no tuple satisfying the hypotheses.
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub query: ResonanceQuery,
    pub per_delta: Vec<DeltaOutcome>,
    pub tuple_count: u64,
    pub min_ratio: Option<f64>,
    pub argmin: Option<RankedTuple>,
    /// max/min of the per-δ minima (1 means perfectly uniform).
    pub uniformity_spread: Option<f64>,
    pub verdict: Verdict,
    pub worst: Vec<RankedTuple>,
}

impl BoundReport {
    pub fn write_worst_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{WORST_CSV_HEADER}")?;
        for w in &self.worst {
            let tuple: Vec<String> = w.tuple.entries().iter().map(|n| n.to_string()).collect();
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt_float(w.delta),
                fmt_float(w.ratio),
                fmt_float(w.omega),
                fmt_float(w.reference),
                tuple.join(" ")
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Default)]
struct Partial {
    count: u64,
    below_inverse_delta: u64,
    best: Option<RankedTuple>,
    worst: Worst,
}

impl Partial {
    fn record(&mut self, item: RankedTuple) {
        self.count += 1;
        let better = match &self.best {
            None => true,
            Some(b) => rank_order(&item, b).is_lt(),
        };
        if better {
            self.best = Some(item.clone());
        }
        self.worst.push(item);
    }

    fn merge(self, other: Partial) -> Partial {
        let best = match (self.best, other.best) {
            (Some(a), Some(b)) => Some(if rank_order(&a, &b).is_le() { a } else { b }),
            (a, b) => a.or(b),
        };
        Partial {
            count: self.count + other.count,
            below_inverse_delta: self.below_inverse_delta + other.below_inverse_delta,
            best,
            worst: self.worst.merge(other.worst),
        }
    }
}

/// Calls `f` on every vector of `len` integers in [−bound, bound].
fn for_each_tail(len: usize, bound: i64, f: &mut impl FnMut(&[i64])) {
    let mut tail = vec![-bound; len];
    loop {
        f(&tail);
        let mut i = 0;
        loop {
            if i == len {
                return;
            }
            if tail[i] < bound {
                tail[i] += 1;
                break;
            }
            tail[i] = -bound;
            i += 1;
        }
    }
}

struct Enumeration<'a> {
    lemma: Lemma,
    k: usize,
    cap: i64,
    depth: &'a DepthParam,
    constants: &'a ComparisonConstants,
    threshold: f64,
}

impl Enumeration<'_> {
    /// Entries before n₁, n₂ for a given leading choice: (n₃) or (n₃, n₄).
    fn heads(&self) -> Vec<Vec<i64>> {
        let cap = self.cap;
        match self.lemma {
            Lemma::Res1 => (-cap..=cap).filter(|&n| n != 0).map(|n| vec![n]).collect(),
            Lemma::Res2 => {
                let top = (cap as f64 / self.constants.much).floor() as i64;
                let mut out = Vec::new();
                for n3 in -top..=top {
                    for n4 in -n3.abs()..=n3.abs() {
                        if n3 + n4 != 0 {
                            out.push(vec![n3, n4]);
                        }
                    }
                }
                out
            }
        }
    }

    fn reference_scale(&self, head: &[i64]) -> i64 {
        match self.lemma {
            Lemma::Res1 => head[0].abs(),
            Lemma::Res2 => (head[0] + head[1]).abs(),
        }
    }

    fn run_head(&self, head: &[i64]) -> Partial {
        let mut partial = Partial::default();
        let scale = self.reference_scale(head);
        let tail_len = self.k + 2 - 2 - head.len();
        let tail_bound = if tail_len == 0 {
            0
        } else {
            (scale as f64 / (self.constants.much * self.k as f64)).floor() as i64
        };
        let n3 = head[0].unsigned_abs() as f64;
        let delta = self.depth.delta();
        let mut entries = vec![0i64; self.k + 2];
        entries[2..2 + head.len()].copy_from_slice(head);
        for_each_tail(tail_len, tail_bound, &mut |tail: &[i64]| {
            entries[2 + head.len()..].copy_from_slice(tail);
            let fixed: i64 = head.iter().chain(tail).sum();
            for n1 in -self.cap..=self.cap {
                let n2 = -fixed - n1;
                if n2.abs() > self.cap {
                    continue;
                }
                let (a1, a2) = (n1.unsigned_abs() as f64, n2.unsigned_abs() as f64);
                if a1 < self.threshold || !self.constants.comparable(a1, a2) {
                    continue;
                }
                let lower = a1.min(a2);
                let ordered = match self.lemma {
                    Lemma::Res1 => lower >= n3,
                    Lemma::Res2 => self.constants.much_greater(lower, n3),
                };
                if !ordered {
                    continue;
                }
                if a1 * delta < 1.0 {
                    partial.below_inverse_delta += 1;
                }
                entries[0] = n1;
                entries[1] = n2;
                let om = omega_unchecked(self.depth, &entries);
                let reference = (scale as f64) * a1;
                partial.record(RankedTuple {
                    delta,
                    ratio: om.abs() / reference,
                    omega: om,
                    reference,
                    tuple: FrequencyTuple {
                        entries: entries.clone(),
                    },
                });
            }
        });
        partial
    }
}

fn run_delta(query: &ResonanceQuery, depth: &DepthParam) -> (DeltaOutcome, Vec<RankedTuple>) {
    let threshold = size_threshold(depth, &query.constants);
    let en = Enumeration {
        lemma: query.lemma,
        k: query.k as usize,
        cap: query.cap as i64,
        depth,
        constants: &query.constants,
        threshold,
    };
    let partial = en
        .heads()
        .par_iter()
        .map(|h| en.run_head(h))
        .reduce(Partial::default, Partial::merge);
    let outcome = DeltaOutcome {
        depth: *depth,
        size_threshold: threshold,
        tuple_count: partial.count,
        below_inverse_delta: partial.below_inverse_delta,
        min_ratio: partial.best.as_ref().map(|b| b.ratio),
        argmin: partial.best.map(|b| b.tuple),
    };
    (outcome, partial.worst.finish())
}

/// Exhaustive check of `query.lemma` on every depth of the grid.
pub fn check_bound(query: &ResonanceQuery) -> Result<BoundReport> {
    query.validate()?;
    let mut per_delta = Vec::with_capacity(query.deltas.len());
    let mut worst = Worst::default();
    let mut best: Option<RankedTuple> = None;
    for depth in &query.deltas {
        let (outcome, w) = run_delta(query, depth);
        if let Some(first) = w.first() {
            if best.as_ref().is_none_or(|b| rank_order(first, b).is_lt()) {
                best = Some(first.clone());
            }
        }
        worst = worst.merge(Worst { items: w });
        per_delta.push(outcome);
    }
    let tuple_count = per_delta.iter().map(|o| o.tuple_count).sum();
    let any_empty = per_delta.iter().any(|o| o.tuple_count == 0);
    let mins: Vec<f64> = per_delta.iter().filter_map(|o| o.min_ratio).collect();
    let uniformity_spread = (!mins.is_empty()).then(|| {
        let hi = mins.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = mins.iter().cloned().fold(f64::INFINITY, f64::min);
        hi / lo
    });
    let verdict = if any_empty {
        Verdict::Indeterminate
    } else if mins.iter().all(|&m| m >= query.constants.floor) {
        Verdict::Pass
    } else {
        Verdict::BelowFloor
    };
    Ok(BoundReport {
        query: query.clone(),
        per_delta,
        tuple_count,
        min_ratio: best.as_ref().map(|b| b.ratio),
        argmin: best,
        uniformity_spread,
        verdict,
        worst: worst.finish(),
    })
}

pub fn check_res1(
    regime: Regime,
    deltas: &[DepthParam],
    k: u32,
    cap: u32,
    constants: ComparisonConstants,
) -> Result<BoundReport> {
    check_bound(&ResonanceQuery {
        regime,
        lemma: Lemma::Res1,
        k,
        cap,
        deltas: deltas.to_vec(),
        constants,
    })
}

pub fn check_res2(
    regime: Regime,
    deltas: &[DepthParam],
    k: u32,
    cap: u32,
    constants: ComparisonConstants,
) -> Result<BoundReport> {
    check_bound(&ResonanceQuery {
        regime,
        lemma: Lemma::Res2,
        k,
        cap,
        deltas: deltas.to_vec(),
        constants,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityRow {
    pub n0: u32,
    pub much: f64,
    pub tuple_count: u64,
    pub min_ratio: Option<f64>,
    pub verdict: Verdict,
}

/// Re-runs the query for each (n₀, ≫-factor) pair.
pub fn sensitivity(query: &ResonanceQuery, n0s: &[u32], muchs: &[f64]) -> Result<Vec<SensitivityRow>> {
    let mut rows = Vec::new();
    for &n0 in n0s {
        for &much in muchs {
            let mut q = query.clone();
            q.constants.n0 = n0;
            q.constants.much = much;
            let r = check_bound(&q)?;
            rows.push(SensitivityRow {
                n0,
                much,
                tuple_count: r.tuple_count,
                min_ratio: r.min_ratio,
                verdict: r.verdict,
            });
        }
    }
    Ok(rows)
}
