use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};

use super::sampling::{rng_for, stream};
use super::{generate_witnessed_with, verify_lemmas, GenerateOptions, LemmaReport, MapOptions, WitnessedElement};
use crate::decomp::{format_float, Precision};
use crate::error::{Error, Result};
use crate::exactmat::{format_rational, height, parse_rational, MAX_DIM};
use crate::siegel::SiegelParams;

/// Column order of experiment CSV files.
pub const CSV_HEADER: [&str; 13] = [
    "seed", "n", "N", "D", "H", "r32", "r33", "r34", "r35", "r36", "r37", "rH", "ms",
];

/// Law for the requested `|det|` of each sample.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum NLaw {
    Fixed { value: u64 },
    Uniform { min: u64, max: u64 },
    LogUniform { min: u64, max: u64 },
    /// Cycles through `min..=max` in order.
    Sweep { min: u64, max: u64 },
}

impl NLaw {
    fn validate(&self) -> Result<()> {
        let (min, max) = match *self {
            NLaw::Fixed { value } => (value, value),
            NLaw::Uniform { min, max } | NLaw::LogUniform { min, max } | NLaw::Sweep { min, max } => (min, max),
        };
        if min == 0 || min > max {
            return Err(Error::InvalidArgument(format!(
                "N law needs 1 <= min <= max, got {self:?}"
            )));
        }
        Ok(())
    }

    fn draw<R: Rng>(&self, position: usize, rng: &mut R) -> u64 {
        match *self {
            NLaw::Fixed { value } => value,
            NLaw::Uniform { min, max } => rng.random_range(min..=max),
            NLaw::LogUniform { min, max } => {
                let lo = (min as f64).ln();
                let hi = ((max + 1) as f64).ln();
                let v = rng.random_range(lo..hi).exp().floor() as u64;
                v.clamp(min, max)
            }
            NLaw::Sweep { min, max } => min + (position as u64) % (max - min + 1),
        }
    }
}

/// A seeded batch of witnessed samples.
///
/// Samples run over every `(n, D)` in `dims × denominators`, `samples` each.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dims: Vec<usize>,
    pub n_law: NLaw,
    pub denominators: Vec<u64>,
    pub samples: usize,
    pub seed: u64,
    pub params: SiegelParams,
    /// Working precision in bits.
    pub precision: u32,
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
    /// Fill the `ms` column with wall time. Off by default so that output is
    /// byte-identical across runs.
    pub record_timing: bool,
    pub word_length: Option<usize>,
    pub retries: usize,
    pub emit_matrices: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dims: vec![2, 3],
            n_law: NLaw::LogUniform { min: 1, max: 1000 },
            denominators: vec![1, 2, 3],
            samples: 100,
            seed: 0,
            params: SiegelParams::fundamental(),
            precision: Precision::DEFAULT.bits(),
            threads: 0,
            record_timing: false,
            word_length: None,
            retries: MapOptions::default().retries,
            emit_matrices: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<Precision> {
        for &n in &self.dims {
            if n == 0 || n > MAX_DIM {
                return Err(Error::DimensionOutOfRange(n));
            }
        }
        if self.denominators.contains(&0) {
            return Err(Error::InvalidArgument("denominators must be positive".into()));
        }
        self.n_law.validate()?;
        Precision::new(self.precision)
    }

    /// Number of samples the config expands to.
    pub fn total_samples(&self) -> usize {
        self.dims.len() * self.denominators.len() * self.samples
    }

    fn jobs(&self) -> Vec<Job> {
        let mut out = Vec::with_capacity(self.total_samples());
        for &n in &self.dims {
            for &d in &self.denominators {
                for position in 0..self.samples {
                    let index = out.len();
                    let seed = splitmix64(self.seed.wrapping_add((index as u64).wrapping_mul(GOLDEN)));
                    let big_n = self.n_law.draw(position, &mut rng_for(seed, stream::EXPERIMENT_N));
                    out.push(Job { index, seed, n, big_n, d });
                }
            }
        }
        out
    }
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer of `x + golden ratio`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug)]
struct Job {
    index: usize,
    seed: u64,
    n: usize,
    big_n: u64,
    d: u64,
}

/// Matrices behind one record, embedded in JSON output on request.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordMatrices {
    pub gamma: Vec<Vec<String>>,
    pub mu: Vec<Vec<String>>,
    pub alpha: Vec<String>,
    pub nu: Vec<Vec<String>>,
    pub beta: Vec<String>,
    pub kappa: Vec<Vec<String>>,
}

/// One sample: exact `N`, `D`, `H` and decimal ratio fields.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub seed: u64,
    pub n: usize,
    #[serde(rename = "N")]
    pub det: String,
    #[serde(rename = "D")]
    pub denominator: String,
    #[serde(rename = "H")]
    pub height: String,
    pub r32: String,
    pub r33: String,
    pub r34: String,
    pub r35: String,
    pub r36: String,
    pub r37: String,
    #[serde(rename = "rH")]
    pub r_h: String,
    pub ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<RecordMatrices>,
}

impl ExperimentRecord {
    pub fn from_witness(w: &WitnessedElement, report: &LemmaReport, digits: usize, ms: u64, emit_matrices: bool) -> Self {
        let f = |x: &Float| format_float(x, digits);
        let vec = |v: &[Float]| v.iter().map(f).collect::<Vec<_>>();
        let matrices = emit_matrices.then(|| RecordMatrices {
            gamma: w.gamma.to_string_rows(),
            mu: w.mu.to_string_rows(),
            alpha: vec(&w.alpha),
            nu: w.nu.to_string_rows(),
            beta: vec(&w.beta),
            kappa: w.kappa.to_string_rows(),
        });
        Self {
            seed: w.seed,
            n: w.n(),
            det: format_rational(&w.det_abs),
            denominator: w.denominator.to_string(),
            height: height(&w.gamma).to_string(),
            r32: f(&report.r32),
            r33: f(&report.r33),
            r34: f(&report.r34),
            r35: f(&report.r35),
            r36: f(&report.r36),
            r37: f(&report.r37),
            r_h: f(&report.r_h),
            ms,
            matrices,
        }
    }

    fn columns(&self) -> [String; 13] {
        [
            self.seed.to_string(),
            self.n.to_string(),
            self.det.clone(),
            self.denominator.clone(),
            self.height.clone(),
            self.r32.clone(),
            self.r33.clone(),
            self.r34.clone(),
            self.r35.clone(),
            self.r36.clone(),
            self.r37.clone(),
            self.r_h.clone(),
            self.ms.to_string(),
        ]
    }

    pub fn det_f64(&self) -> f64 {
        parse_rational(&self.det).map_or(f64::NAN, |r| r.to_f64())
    }

    pub fn denominator_u64(&self) -> u64 {
        self.denominator.parse().unwrap_or(0)
    }

    pub fn height_f64(&self) -> f64 {
        self.height.parse().unwrap_or(f64::NAN)
    }

    pub fn r_h_f64(&self) -> f64 {
        self.r_h.parse().unwrap_or(f64::NAN)
    }

    /// Writes records as CSV with [`CSV_HEADER`]; matrices are not included.
    pub fn write_csv<W: Write>(records: &[ExperimentRecord], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in records {
            w.write_record(r.columns())?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Vec<ExperimentRecord>> {
        let mut rd = csv::Reader::from_reader(input);
        let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
        if header != CSV_HEADER {
            return Err(Error::Parse(format!("unexpected CSV header {header:?}")));
        }
        let mut out = Vec::new();
        for row in rd.records() {
            let row = row?;
            let col = |k: usize| row.get(k).unwrap_or_default().to_string();
            let int = |k: usize| {
                col(k)
                    .parse::<u64>()
                    .map_err(|e| Error::Parse(format!("column {}: {e}", CSV_HEADER[k])))
            };
            out.push(ExperimentRecord {
                seed: int(0)?,
                n: int(1)? as usize,
                det: col(2),
                denominator: col(3),
                height: col(4),
                r32: col(5),
                r33: col(6),
                r34: col(7),
                r35: col(8),
                r36: col(9),
                r37: col(10),
                r_h: col(11),
                ms: int(12)?,
                matrices: None,
            });
        }
        Ok(out)
    }
}

/// A sample that could not be generated, kept with its seed for replay.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentFailure {
    pub index: usize,
    pub seed: u64,
    pub n: usize,
    #[serde(rename = "N")]
    pub requested_det: u64,
    #[serde(rename = "D")]
    pub requested_denominator: u64,
    pub error: String,
}

/// Fitted exponent of `H` against `N` for one `(n, D)` group.
///
/// `slope` fits every record; `envelope_slope` fits, per dyadic bin
/// `⌊log₂ N⌋`, the record with the largest `H`, which tracks the growth of
/// the worst case that the height bound controls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub n: usize,
    #[serde(rename = "D")]
    pub denominator: u64,
    pub points: usize,
    pub slope: Option<f64>,
    pub envelope_points: usize,
    pub envelope_slope: Option<f64>,
}

/// Maxima of the ratio fields and exponent fits. Fields are `None` when no
/// sample succeeded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub samples: usize,
    pub failures: usize,
    pub max_r32: Option<String>,
    pub max_r33: Option<String>,
    pub max_r34: Option<String>,
    pub max_r35: Option<String>,
    pub max_r36: Option<String>,
    pub max_r37: Option<String>,
    #[serde(rename = "max_rH")]
    pub max_r_h: Option<String>,
    pub slopes: Vec<SlopeFit>,
}

impl ExperimentSummary {
    pub fn slope_for(&self, n: usize, d: u64) -> Option<&SlopeFit> {
        self.slopes.iter().find(|s| s.n == n && s.denominator == d)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub records: Vec<ExperimentRecord>,
    pub failures: Vec<ExperimentFailure>,
    pub summary: ExperimentSummary,
}

struct Sample {
    record: ExperimentRecord,
    report: LemmaReport,
}

/// Runs every sample of `config`, in parallel, with output in sample order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let prec = config.validate()?;
    let opts = GenerateOptions {
        precision: prec,
        map: MapOptions {
            word_length: config.word_length,
            retries: config.retries,
        },
    };
    let jobs = config.jobs();
    let run_one = |job: &Job| -> std::result::Result<Sample, ExperimentFailure> {
        let start = Instant::now();
        let made = generate_witnessed_with(job.n, job.big_n, job.d, &config.params, job.seed, &opts);
        match made {
            Ok(w) => {
                let report = verify_lemmas(&w);
                let ms = if config.record_timing {
                    start.elapsed().as_millis() as u64
                } else {
                    0
                };
                let record = ExperimentRecord::from_witness(&w, &report, prec.decimal_digits(), ms, config.emit_matrices);
                Ok(Sample { record, report })
            }
            Err(e) => Err(ExperimentFailure {
                index: job.index,
                seed: job.seed,
                n: job.n,
                requested_det: job.big_n,
                requested_denominator: job.d,
                error: e.to_string(),
            }),
        }
    };
    let results: Vec<_> = if config.threads == 0 {
        jobs.par_iter().map(run_one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start {} threads: {e}", config.threads)))?;
        pool.install(|| jobs.par_iter().map(run_one).collect())
    };

    let mut samples = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(s) => samples.push(s),
            Err(f) => failures.push(f),
        }
    }
    let summary = summarize(&samples, failures.len(), prec);
    Ok(ExperimentOutput {
        config: config.clone(),
        records: samples.into_iter().map(|s| s.record).collect(),
        failures,
        summary,
    })
}

fn summarize(samples: &[Sample], failures: usize, prec: Precision) -> ExperimentSummary {
    let digits = prec.decimal_digits();
    let max_of = |pick: fn(&LemmaReport) -> &Float| {
        samples
            .iter()
            .map(|s| pick(&s.report))
            .max_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal))
            .map(|m| format_float(m, digits))
    };

    let mut groups: BTreeMap<(usize, u64), Vec<(f64, f64)>> = BTreeMap::new();
    for s in samples {
        let key = (s.record.n, s.record.denominator_u64());
        groups
            .entry(key)
            .or_default()
            .push((s.record.det_f64().ln(), s.record.height_f64().ln()));
    }
    let slopes = groups
        .into_iter()
        .map(|((n, d), pts)| {
            let env = envelope(&pts);
            SlopeFit {
                n,
                denominator: d,
                points: pts.len(),
                slope: least_squares_slope(&pts),
                envelope_points: env.len(),
                envelope_slope: least_squares_slope(&env),
            }
        })
        .collect();

    ExperimentSummary {
        samples: samples.len(),
        failures,
        max_r32: max_of(|r| &r.r32),
        max_r33: max_of(|r| &r.r33),
        max_r34: max_of(|r| &r.r34),
        max_r35: max_of(|r| &r.r35),
        max_r36: max_of(|r| &r.r36),
        max_r37: max_of(|r| &r.r37),
        max_r_h: max_of(|r| &r.r_h),
        slopes,
    }
}

/// Per dyadic bin of `N`, the point with the largest `log H`.
fn envelope(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut best: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
    for &(x, y) in points {
        let bin = (x / std::f64::consts::LN_2 + 1e-9).floor() as i64;
        let slot = best.entry(bin).or_insert((x, y));
        if y > slot.1 {
            *slot = (x, y);
        }
    }
    best.into_values().collect()
}

/// Ordinary least-squares slope; `None` without two distinct abscissae.
pub(crate) fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    let k = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 1e-12).then(|| sxy / sxx)
}
