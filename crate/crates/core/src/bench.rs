//! Benchmark harness: runs drivers over generated corpora and reports
//! timings, recursion statistics and the derived summaries (classification
//! time disparity, cutoff sweep, log-log scaling slope).

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::io;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::factor::{factor_complete, partition_modfd_timed, Driver, FactorConfig, Factorization};
use crate::gen::{generate, GenSpec, RNG_ALGORITHM};
use crate::identity::RecursionStats;
use crate::poly::Polynomial;

/// Real root of the characteristic equation of the identity-test recursion.
pub const ANALYTIC_EXPONENT: f64 = 2.226552;

/// Same-factor vs cross-factor speed-up quoted for the reference runs.
pub const REFERENCE_DISPARITY: &str = "10-15x";

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub drivers: Vec<Driver>,
    pub repeat: usize,
    pub factor: FactorConfig,
    /// Collect per-variable classification times (ModFD only).
    pub timings: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            drivers: vec![Driver::Fd, Driver::ModFd],
            repeat: 1,
            factor: FactorConfig::default(),
            timings: true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchResult {
    pub instance: String,
    pub seed: u64,
    pub rng: &'static str,
    pub n: usize,
    pub monomials: usize,
    pub length: usize,
    pub driver: &'static str,
    pub repeat: usize,
    pub cutoff: usize,
    pub wall_time_s: f64,
    pub calls: u64,
    pub max_depth: u64,
    pub cutoff_hits: u64,
    pub irreducible: bool,
    pub factor_count: usize,
    /// Monomial counts of the factors, ascending.
    pub factor_sizes: Vec<usize>,
    /// Hash of the canonical factor set, for cross-run comparison.
    pub factor_digest: String,
    pub planted_recovered: Option<bool>,
    pub same_factor_times_s: Vec<f64>,
    pub cross_factor_times_s: Vec<f64>,
    pub error: Option<String>,
}

/// Flat form of [`BenchResult`] for CSV.
#[derive(Serialize)]
struct BenchRow<'a> {
    instance: &'a str,
    seed: u64,
    rng: &'a str,
    n: usize,
    monomials: usize,
    length: usize,
    driver: &'a str,
    repeat: usize,
    cutoff: usize,
    wall_time_s: f64,
    calls: u64,
    max_depth: u64,
    cutoff_hits: u64,
    irreducible: bool,
    factor_count: usize,
    factor_sizes: String,
    factor_digest: &'a str,
    planted_recovered: Option<bool>,
    mean_same_factor_s: Option<f64>,
    mean_cross_factor_s: Option<f64>,
    error: Option<&'a str>,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

impl BenchResult {
    pub fn mean_same_factor_s(&self) -> Option<f64> {
        mean(&self.same_factor_times_s)
    }

    pub fn mean_cross_factor_s(&self) -> Option<f64> {
        mean(&self.cross_factor_times_s)
    }

    fn row(&self) -> BenchRow<'_> {
        BenchRow {
            instance: &self.instance,
            seed: self.seed,
            rng: self.rng,
            n: self.n,
            monomials: self.monomials,
            length: self.length,
            driver: self.driver,
            repeat: self.repeat,
            cutoff: self.cutoff,
            wall_time_s: self.wall_time_s,
            calls: self.calls,
            max_depth: self.max_depth,
            cutoff_hits: self.cutoff_hits,
            irreducible: self.irreducible,
            factor_count: self.factor_count,
            factor_sizes: self
                .factor_sizes
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(";"),
            factor_digest: &self.factor_digest,
            planted_recovered: self.planted_recovered,
            mean_same_factor_s: self.mean_same_factor_s(),
            mean_cross_factor_s: self.mean_cross_factor_s(),
            error: self.error.as_deref(),
        }
    }
}

/// Order-insensitive digest of the factor set.
pub fn factor_digest(fz: &Factorization) -> String {
    let mut all: Vec<String> = fz.iter().map(ToString::to_string).collect();
    all.sort();
    let mut h = DefaultHasher::new();
    all.hash(&mut h);
    format!("{:016x}", h.finish())
}

fn run_one(spec: &GenSpec, poly: &Polynomial, truth: Option<&crate::gen::PlantedTruth>, driver: Driver, rep: usize, cfg: &BenchConfig) -> BenchResult {
    let stats = Arc::new(RecursionStats::default());
    let mut fcfg = cfg.factor.clone();
    fcfg.identity = fcfg.identity.clone().with_stats(Arc::clone(&stats));
    let mut res = BenchResult {
        instance: spec.describe(),
        seed: spec.seed,
        rng: RNG_ALGORITHM,
        n: spec.n,
        monomials: poly.num_monomials(),
        length: poly.length(),
        driver: driver.name(),
        repeat: rep,
        cutoff: cfg.factor.identity.cutoff_length,
        wall_time_s: 0.0,
        calls: 0,
        max_depth: 0,
        cutoff_hits: 0,
        irreducible: false,
        factor_count: 0,
        factor_sizes: Vec::new(),
        factor_digest: String::new(),
        planted_recovered: None,
        same_factor_times_s: Vec::new(),
        cross_factor_times_s: Vec::new(),
        error: None,
    };
    let start = Instant::now();
    let outcome = factor_complete(poly, driver, &fcfg);
    res.wall_time_s = start.elapsed().as_secs_f64();
    res.calls = stats.calls();
    res.max_depth = stats.max_depth();
    res.cutoff_hits = stats.cutoff_hits();
    let fz = match outcome {
        Ok(fz) => fz,
        Err(e) => {
            res.error = Some(e.to_string());
            return res;
        }
    };
    res.irreducible = !fz.is_factorable();
    res.factor_count = fz.len();
    let mut sizes: Vec<usize> = fz.iter().map(Polynomial::num_monomials).collect();
    sizes.sort_unstable();
    res.factor_sizes = sizes;
    res.factor_digest = factor_digest(&fz);
    if let Some(t) = truth {
        let mut got = fz.var_partition();
        got.sort();
        let mut want = t.partition().to_vec();
        want.sort();
        res.planted_recovered = Some(fz.trivial.is_empty() && got == want);
    }
    if cfg.timings && driver == Driver::ModFd {
        let (_, core) = poly.strip_trivial_divisors();
        if let Some(x) = core.support().first() {
            match partition_modfd_timed(&core, x, &cfg.factor.identity) {
                Ok((_, times)) => {
                    for c in times {
                        let t = c.elapsed.as_secs_f64();
                        if c.same_factor {
                            res.same_factor_times_s.push(t);
                        } else {
                            res.cross_factor_times_s.push(t);
                        }
                    }
                }
                Err(e) => res.error = Some(e.to_string()),
            }
        }
    }
    res
}

/// Runs every driver `repeat` times on every instance. Results come back
/// sorted by instance, driver and repetition.
pub fn bench(corpus: &[GenSpec], cfg: &BenchConfig) -> Vec<BenchResult> {
    let instances: Vec<(usize, Result<crate::gen::Generated>)> =
        corpus.iter().enumerate().map(|(i, s)| (i, generate(s))).collect();
    let mut jobs = Vec::new();
    for (i, g) in &instances {
        for (d, &driver) in cfg.drivers.iter().enumerate() {
            for rep in 0..cfg.repeat.max(1) {
                jobs.push((*i, g, d, driver, rep));
            }
        }
    }
    let mut out: Vec<(usize, usize, usize, BenchResult)> = jobs
        .into_par_iter()
        .map(|(i, g, d, driver, rep)| {
            let spec = &corpus[i];
            let res = match g {
                Ok(g) => run_one(spec, &g.poly, g.planted.as_ref(), driver, rep, cfg),
                Err(e) => failed(spec, driver, rep, cfg, e),
            };
            (i, d, rep, res)
        })
        .collect();
    out.sort_by_key(|(i, d, rep, _)| (*i, *d, *rep));
    out.into_iter().map(|(.., r)| r).collect()
}

fn failed(spec: &GenSpec, driver: Driver, rep: usize, cfg: &BenchConfig, e: &Error) -> BenchResult {
    BenchResult {
        instance: spec.describe(),
        seed: spec.seed,
        rng: RNG_ALGORITHM,
        n: spec.n,
        monomials: 0,
        length: 0,
        driver: driver.name(),
        repeat: rep,
        cutoff: cfg.factor.identity.cutoff_length,
        wall_time_s: 0.0,
        calls: 0,
        max_depth: 0,
        cutoff_hits: 0,
        irreducible: false,
        factor_count: 0,
        factor_sizes: Vec::new(),
        factor_digest: String::new(),
        planted_recovered: None,
        same_factor_times_s: Vec::new(),
        cross_factor_times_s: Vec::new(),
        error: Some(e.to_string()),
    }
}

pub fn write_csv<W: io::Write>(results: &[BenchResult], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in results {
        w.serialize(r.row()).map_err(|e| Error::data(format!("csv: {e}")))?;
    }
    w.flush().map_err(|e| Error::data(format!("csv: {e}")))
}

pub fn write_json<W: io::Write>(results: &[BenchResult], writer: W) -> Result<()> {
    serde_json::to_writer_pretty(writer, results).map_err(|e| Error::data(format!("json: {e}")))
}

#[derive(Clone, Debug, Serialize)]
pub struct Disparity {
    pub same_factor_mean_s: f64,
    pub cross_factor_mean_s: f64,
    /// Slower mean over faster mean.
    pub ratio: f64,
    /// Which class of variables is slower to classify.
    pub slower: &'static str,
    pub reference: &'static str,
}

/// Pools the per-variable classification times of all results.
pub fn disparity(results: &[BenchResult]) -> Option<Disparity> {
    let same: Vec<f64> = results.iter().flat_map(|r| r.same_factor_times_s.iter().copied()).collect();
    let cross: Vec<f64> = results.iter().flat_map(|r| r.cross_factor_times_s.iter().copied()).collect();
    let (s, c) = (mean(&same)?, mean(&cross)?);
    let (ratio, slower) = if c >= s {
        (c / s.max(f64::MIN_POSITIVE), "cross_factor")
    } else {
        (s / c.max(f64::MIN_POSITIVE), "same_factor")
    };
    Some(Disparity {
        same_factor_mean_s: s,
        cross_factor_mean_s: c,
        ratio,
        slower,
        reference: REFERENCE_DISPARITY,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub cutoff: usize,
    pub total_time_s: f64,
    /// Relative to the first cutoff in the sweep.
    pub time_delta: f64,
    /// Factor sets equal those of the first cutoff on every instance.
    pub identical: bool,
}

/// Runs ModFD over the corpus at each cutoff and compares factor sets.
pub fn cutoff_sweep(corpus: &[GenSpec], cutoffs: &[usize], base: &FactorConfig) -> Vec<SweepPoint> {
    let mut reference: Option<Vec<String>> = None;
    let mut base_time = None;
    let mut out = Vec::new();
    for &cutoff in cutoffs {
        let mut cfg = BenchConfig {
            drivers: vec![Driver::ModFd],
            repeat: 1,
            factor: base.clone(),
            timings: false,
        };
        cfg.factor.identity = cfg.factor.identity.clone().with_cutoff(cutoff);
        let results = bench(corpus, &cfg);
        let digests: Vec<String> = results
            .iter()
            .map(|r| r.error.clone().unwrap_or_else(|| r.factor_digest.clone()))
            .collect();
        let total: f64 = results.iter().map(|r| r.wall_time_s).sum();
        let t0 = *base_time.get_or_insert(total);
        let identical = match &reference {
            None => {
                let ok = results.iter().all(|r| r.error.is_none());
                reference = Some(digests);
                ok
            }
            Some(d) => *d == digests,
        };
        out.push(SweepPoint {
            cutoff,
            total_time_s: total,
            time_delta: if t0 > 0.0 { total / t0 - 1.0 } else { 0.0 },
            identical,
        });
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingReport {
    /// `(|F|, seconds)` per ladder step.
    pub points: Vec<(usize, f64)>,
    pub slope: f64,
    pub analytic_exponent: f64,
}

/// Least-squares slope of `log t` against `log |F|`.
pub fn loglog_slope(points: &[(usize, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(x, t)| x > 0 && t > 0.0)
        .map(|&(x, t)| ((x as f64).ln(), t.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Times ModFD on each instance of a ladder (typically doubling `|F|`)
/// and fits the scaling exponent.
pub fn scaling(ladder: &[GenSpec], base: &FactorConfig) -> Result<ScalingReport> {
    let mut points = Vec::new();
    for spec in ladder {
        let g = generate(spec)?;
        let start = Instant::now();
        factor_complete(&g.poly, Driver::ModFd, base)?;
        points.push((g.poly.length(), start.elapsed().as_secs_f64()));
    }
    let slope = loglog_slope(&points).ok_or_else(|| Error::data("scaling ladder needs two sizes"))?;
    Ok(ScalingReport {
        points,
        slope,
        analytic_exponent: ANALYTIC_EXPONENT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus() -> Vec<GenSpec> {
        vec![GenSpec::planted(6, 4, 6, 4, 1), GenSpec::random(8, 12, 2)]
    }

    #[test]
    fn results_are_sorted_and_reproducible() {
        let cfg = BenchConfig::default();
        let a = bench(&corpus(), &cfg);
        let b = bench(&corpus(), &cfg);
        assert_eq!(a.len(), 4);
        assert_eq!(a[0].driver, "fd");
        assert_eq!(a[1].driver, "modfd");
        let digests = |rs: &[BenchResult]| rs.iter().map(|r| r.factor_digest.clone()).collect::<Vec<_>>();
        assert_eq!(digests(&a), digests(&b));
        assert_eq!(a[0].factor_digest, a[1].factor_digest);
        assert_eq!(a[0].planted_recovered, Some(true));
        assert!(a.iter().all(|r| r.error.is_none()));
    }

    #[test]
    fn csv_has_one_row_per_result() {
        let rs = bench(&corpus(), &BenchConfig::default());
        let mut buf = Vec::new();
        write_csv(&rs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), rs.len() + 1);
        assert!(text.lines().nth(1).unwrap().contains("ChaCha8Rng"));
    }

    #[test]
    fn disparity_direction() {
        let mut r = bench(&corpus()[..1], &BenchConfig::default()).pop().unwrap();
        r.same_factor_times_s = vec![1.0, 1.0];
        r.cross_factor_times_s = vec![4.0];
        let d = disparity(&[r.clone()]).unwrap();
        assert_eq!(d.slower, "cross_factor");
        assert!((d.ratio - 4.0).abs() < 1e-12);
        r.cross_factor_times_s = vec![0.5];
        assert_eq!(disparity(&[r]).unwrap().slower, "same_factor");
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(usize, f64)> = (1..6).map(|k| (1usize << k, (1u64 << (2 * k)) as f64)).collect();
        assert!((loglog_slope(&pts).unwrap() - 2.0).abs() < 1e-9);
        assert!(loglog_slope(&pts[..1]).is_none());
    }

    #[test]
    fn sweep_is_invariant() {
        let pts = cutoff_sweep(&corpus(), &[0, 64, 512], &FactorConfig::default());
        assert_eq!(pts.len(), 3);
        assert!(pts.iter().all(|p| p.identical));
    }
}
