//! Empirical census: reduce a curve at every good prime up to x and count
//! cyclic groups or prime orders.

mod curve;
mod cyclic;

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_integer::Roots;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use curve::{
    bsgs_count, check_hasse, count_on, naive_count, point_count, sqrt_mod, FpCurve, Point,
    ShortModel, NAIVE_LIMIT,
};
pub use cyclic::{
    division_polynomial, full_torsion, is_cyclic, is_cyclic_seeded, sylow_rank_two, Cyclicity,
    Poly, DIVISION_POLY_MAX_L,
};

use crate::arith::{is_prime, primes_up_to};
use crate::catalog::WeierstrassCurve;
use crate::density::{DensityProblem, DensityResult};
use crate::error::{invalid, Error, Result};

/// Numbers per sieve segment.
const SEGMENT: u64 = 1 << 18;
/// Primes between checkpoint writes.
pub const CHECKPOINT_EVERY: u64 = 10_000_000;

/// Directory for checkpoints, from ELLDENSITY_CACHE.
pub fn cache_dir() -> Option<PathBuf> {
    std::env::var_os("ELLDENSITY_CACHE").map(PathBuf::from)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeRange {
    pub lo: u64,
    pub hi: u64,
    /// Sorted primes to skip.
    pub excluded: Vec<u64>,
}

impl PrimeRange {
    pub fn new(lo: u64, hi: u64, mut excluded: Vec<u64>) -> Result<Self> {
        if lo > hi || hi > 1 << 63 {
            return invalid(format!("bad prime range [{lo}, {hi}]"));
        }
        excluded.sort_unstable();
        Ok(PrimeRange { lo, hi, excluded })
    }
}

/// Primes in [lo, hi) given every prime up to sqrt(hi).
fn segment(lo: u64, hi: u64, base: &[u64]) -> Vec<u64> {
    let lo = lo.max(2);
    if lo >= hi {
        return Vec::new();
    }
    let mut composite = vec![false; (hi - lo) as usize];
    for &q in base {
        if q * q >= hi {
            break;
        }
        let start = (q * q).max(lo.div_ceil(q) * q);
        for k in (start..hi).step_by(q as usize) {
            composite[(k - lo) as usize] = true;
        }
    }
    composite
        .iter()
        .enumerate()
        .filter(|(_, &c)| !c)
        .map(|(i, _)| lo + i as u64)
        .collect()
}

/// Primes of the range in increasing order, a segment at a time.
pub fn sieve(range: &PrimeRange) -> impl Iterator<Item = u64> + '_ {
    let base = primes_up_to(range.hi.sqrt() + 1);
    let end = range.hi.saturating_add(1);
    let starts = (range.lo..end).step_by(SEGMENT as usize);
    starts.flat_map(move |s| {
        let e = s.saturating_add(SEGMENT).min(end);
        segment(s, e, &base)
            .into_iter()
            .filter(|p| range.excluded.binary_search(p).is_err())
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionRecord {
    pub p: u64,
    pub n: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cyclic: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub in_progression: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub koblitz_prime: Option<bool>,
}

impl ReductionRecord {
    fn matches(&self) -> bool {
        self.koblitz_prime.unwrap_or(false)
            || (self.cyclic == Some(true) && self.in_progression != Some(false))
    }

    fn csv_row(&self) -> String {
        let b = |x: Option<bool>| x.map_or(String::new(), |v| u8::from(v).to_string());
        format!(
            "{},{},{},{},{},{}\n",
            self.p,
            self.n,
            b(self.cyclic),
            self.witness.map_or(String::new(), |w| w.to_string()),
            b(self.in_progression),
            b(self.koblitz_prime)
        )
    }
}

const CSV_HEADER: &str = "p,N,cyclic,witness,in_progression,koblitz_prime\n";

/// Reduce at one good prime and evaluate the problem's condition.
pub fn reduce_at(
    model: &ShortModel,
    problem: &DensityProblem,
    p: u64,
    seed: u64,
) -> Result<ReductionRecord> {
    let e = model.at(p)?;
    let n = count_on(&e, seed)?;
    let mut r = ReductionRecord {
        p,
        n,
        cyclic: None,
        witness: None,
        in_progression: None,
        koblitz_prime: None,
    };
    match *problem {
        DensityProblem::Cyclic => {
            let c = is_cyclic_seeded(&e, n, seed)?;
            r.cyclic = Some(c.cyclic);
            r.witness = c.witness;
        }
        DensityProblem::CyclicAp { a, f } => {
            let inside = p % f == a % f;
            r.in_progression = Some(inside);
            if inside {
                let c = is_cyclic_seeded(&e, n, seed)?;
                r.cyclic = Some(c.cyclic);
                r.witness = c.witness;
            }
        }
        DensityProblem::Koblitz { t } => {
            r.koblitz_prime = Some(n % t == 0 && is_prime(n / t));
        }
    }
    Ok(r)
}

/// Counts over a set of primes; merging is addition.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub primes: u64,
    pub good: u64,
    pub progression: u64,
    pub matching: u64,
    /// Non-cyclic reductions by witnessing prime.
    pub witnesses: BTreeMap<u64, u64>,
}

impl Tally {
    fn add_record(&mut self, r: &ReductionRecord) {
        self.good += 1;
        if r.in_progression == Some(true) {
            self.progression += 1;
        }
        if r.matches() {
            self.matching += 1;
        }
        if let Some(w) = r.witness {
            *self.witnesses.entry(w).or_default() += 1;
        }
    }

    fn merge(&mut self, o: &Tally) {
        self.primes += o.primes;
        self.good += o.good;
        self.progression += o.progression;
        self.matching += o.matching;
        for (w, c) in &o.witnesses {
            *self.witnesses.entry(*w).or_default() += c;
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CensusOptions {
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
    pub seed: u64,
    /// CSV of every good prime.
    pub dump: Option<PathBuf>,
    /// Resume from, and periodically write, this file.
    pub checkpoint: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KoblitzScale {
    /// Trapezoid value of the integral of 1/log^2 t over [2, x].
    pub li2: f64,
    /// Bound on the trapezoid error.
    pub li2_error: f64,
    pub x_over_log2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusReport {
    pub version: String,
    pub curve: [i64; 5],
    pub problem: DensityProblem,
    pub x: u64,
    pub seed: u64,
    /// Primes up to x skipped as bad or at most 3.
    pub excluded: Vec<u64>,
    pub primes_total: u64,
    pub good_primes: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub progression_primes: Option<u64>,
    pub matching: u64,
    /// matching / good primes.
    pub observed: f64,
    /// matching / all primes up to x.
    pub observed_all_primes: f64,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub witnesses: BTreeMap<u64, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub koblitz: Option<KoblitzScale>,
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    curve: [i64; 5],
    problem: DensityProblem,
    x: u64,
    seed: u64,
    next_lo: u64,
    tally: Tally,
}

fn load_checkpoint(
    path: &Path,
    curve: &[i64; 5],
    problem: &DensityProblem,
    x: u64,
    seed: u64,
) -> Result<Option<Checkpoint>> {
    if !path.exists() {
        return Ok(None);
    }
    let c: Checkpoint = serde_json::from_str(&fs::read_to_string(path)?)?;
    if &c.curve != curve || &c.problem != problem || c.x != x || c.seed != seed {
        return invalid(format!(
            "checkpoint {} belongs to a different run",
            path.display()
        ));
    }
    Ok(Some(c))
}

fn write_checkpoint(path: &Path, c: &Checkpoint) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, serde_json::to_string(c)?)?;
    fs::rename(tmp, path)?;
    Ok(())
}

/// Census over the primes up to x.
pub fn census(
    curve: &WeierstrassCurve,
    problem: &DensityProblem,
    x: u64,
    opts: &CensusOptions,
) -> Result<CensusReport> {
    match *problem {
        DensityProblem::CyclicAp { f: 0, .. } => return invalid("modulus f must be positive"),
        DensityProblem::Koblitz { t: 0 } => return invalid("t must be positive"),
        _ => {}
    }
    if x > 1 << 40 {
        return invalid("census bound too large for this tool");
    }
    let model = ShortModel::new(curve);
    let base = primes_up_to(x.sqrt() + 1);
    let mut tally = Tally::default();
    let mut lo = 2u64;
    if let Some(path) = &opts.checkpoint {
        if let Some(c) = load_checkpoint(path, &curve.a, problem, x, opts.seed)? {
            tally = c.tally;
            lo = c.next_lo;
        }
    }
    let resumed = lo > 2;
    let mut dump = match &opts.dump {
        Some(path) => {
            let file = OpenOptions::new()
                .create(true)
                .append(resumed)
                .write(true)
                .truncate(!resumed)
                .open(path)?;
            let mut w = BufWriter::new(file);
            if !resumed {
                w.write_all(CSV_HEADER.as_bytes())?;
            }
            Some(w)
        }
        None => None,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| Error::Invalid(e.to_string()))?;
    let round = (pool.current_num_threads().max(1) * 4) as u64;
    let keep = dump.is_some();
    let mut since_checkpoint = 0u64;
    while lo <= x {
        let hi = lo.saturating_add(round * SEGMENT).min(x + 1);
        let starts: Vec<u64> = (lo..hi).step_by(SEGMENT as usize).collect();
        let parts: Vec<Result<(Tally, Vec<ReductionRecord>)>> = pool.install(|| {
            starts
                .par_iter()
                .map(|&s| {
                    let e = (s + SEGMENT).min(hi);
                    let mut t = Tally::default();
                    let mut recs = Vec::new();
                    for p in segment(s, e, &base) {
                        t.primes += 1;
                        if !model.is_good(p) {
                            continue;
                        }
                        let r = reduce_at(&model, problem, p, opts.seed)?;
                        t.add_record(&r);
                        if keep {
                            recs.push(r);
                        }
                    }
                    Ok((t, recs))
                })
                .collect()
        });
        for part in parts {
            let (t, recs) = part?;
            since_checkpoint += t.primes;
            tally.merge(&t);
            if let Some(w) = dump.as_mut() {
                for r in &recs {
                    w.write_all(r.csv_row().as_bytes())?;
                }
            }
        }
        lo = hi;
        if let Some(path) = &opts.checkpoint {
            if since_checkpoint >= CHECKPOINT_EVERY || lo > x {
                if let Some(w) = dump.as_mut() {
                    w.flush()?;
                }
                let c = Checkpoint {
                    curve: curve.a,
                    problem: problem.clone(),
                    x,
                    seed: opts.seed,
                    next_lo: lo,
                    tally: tally.clone(),
                };
                write_checkpoint(path, &c)?;
                since_checkpoint = 0;
            }
        }
    }
    if let Some(mut w) = dump {
        w.flush()?;
    }
    let mut excluded: Vec<u64> = [2u64, 3].into_iter().filter(|&p| p <= x).collect();
    excluded.extend(
        curve
            .bad_primes()
            .iter()
            .copied()
            .filter(|&p| p > 3 && p <= x),
    );
    let ratio = |num: u64, den: u64| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    Ok(CensusReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        curve: curve.a,
        problem: problem.clone(),
        x,
        seed: opts.seed,
        excluded,
        primes_total: tally.primes,
        good_primes: tally.good,
        progression_primes: matches!(problem, DensityProblem::CyclicAp { .. })
            .then_some(tally.progression),
        matching: tally.matching,
        observed: ratio(tally.matching, tally.good),
        observed_all_primes: ratio(tally.matching, tally.primes),
        witnesses: tally.witnesses,
        koblitz: matches!(problem, DensityProblem::Koblitz { .. }).then(|| koblitz_scale(x)),
    })
}

/// Trapezoid rule with unit steps for the integral of 1/log^2 t on [2, x].
pub fn li2(x: f64) -> (f64, f64) {
    if x <= 2.0 {
        return (0.0, 0.0);
    }
    let f = |t: f64| 1.0 / (t.ln() * t.ln());
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut t = 2.0;
    while t < x {
        let h = (x - t).min(1.0);
        let term = 0.5 * h * (f(t) + f(t + h)) - comp;
        let s = sum + term;
        comp = (s - sum) - term;
        sum = s;
        t += h;
    }
    // Per unit step the error is at most f''/12, and f'' decreases; its sum
    // is at most f''(2) + |f'(2)|.
    let l = 2f64.ln();
    let f1 = 2.0 / (2.0 * l.powi(3));
    let f2 = (2.0 / l.powi(3) + 6.0 / l.powi(4)) / 4.0;
    (sum, (f2 + f1) / 12.0)
}

fn koblitz_scale(x: u64) -> KoblitzScale {
    let xf = x as f64;
    let (v, err) = li2(xf);
    KoblitzScale {
        li2: v,
        li2_error: err,
        x_over_log2: xf / (xf.ln() * xf.ln()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub problem: DensityProblem,
    pub observed: f64,
    pub predicted: f64,
    /// observed - predicted.
    pub deviation: f64,
    /// 1/sqrt(matching), for scale only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    /// Koblitz: count over C times the log-integral.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    /// Koblitz: count over C x / log^2 x.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_x_over_log2: Option<f64>,
}

/// Observed statistic against the constant. For Koblitz both sides are counts.
pub fn compare(report: &CensusReport, result: &DensityResult) -> Result<Comparison> {
    if report.problem != result.problem {
        return invalid("census and density are for different problems");
    }
    let c = result.constant_f64();
    let scale = (report.matching > 0).then(|| 1.0 / (report.matching as f64).sqrt());
    Ok(match &report.koblitz {
        Some(k) => {
            let observed = report.matching as f64;
            let predicted = c * k.li2;
            let div = |a: f64, b: f64| if b > 0.0 { Some(a / b) } else { None };
            Comparison {
                problem: report.problem.clone(),
                observed,
                predicted,
                deviation: observed - predicted,
                scale,
                ratio: div(observed, predicted),
                ratio_x_over_log2: div(observed, c * k.x_over_log2),
            }
        }
        None => Comparison {
            problem: report.problem.clone(),
            observed: report.observed,
            predicted: c,
            deviation: report.observed - c,
            scale,
            ratio: None,
            ratio_x_over_log2: None,
        },
    })
}

#[cfg(test)]
mod tests;
