//! Command-line front end. [`run`] parses arguments and returns the process
//! exit code: 0 on success, 1 when an operation rejects its input, 2 on a
//! usage error.

mod io;

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rug::Float;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::boundlab::{run_experiment, ExperimentConfig};
use crate::decomp::{format_float, iwasawa, IwasawaDecomposition, Precision, RealMatrix};
use crate::error::{Error, Result};
use crate::exactmat::{parse_rational, Rational};
use crate::gensiegel::{standardize, verify_containment, ContainmentGrid, SiegelTripleGLn};
use crate::gl2::{hp_experiment, UpperHalfPoint};
use crate::segments::{leading_entries, satisfies_chain_condition, segment_partition, witnessing_sequence};
use crate::siegel::{in_siegel, parse_t_squared, reduce_to_siegel, SiegelParams};

pub use io::{emit_records, read_input, read_matrix, write_records, CsvRecord, Format};

/// A full invocation. Serializable, so a saved config replays a run.
#[derive(Parser, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[command(name = "siegelkit", version, about = "Reduction theory in GL_n")]
pub struct RunConfig {
    #[command(flatten)]
    pub global: GlobalOptions,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GlobalOptions {
    /// Working precision in bits (64..=4096) [default: 128]
    #[arg(long, global = true)]
    pub precision: Option<u32>,
    /// Seed for commands that sample
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 lets the runtime decide
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Emit JSON, optionally to the given file
    #[arg(long, global = true, num_args = 0..=1, conflicts_with = "csv")]
    pub json: Option<Option<PathBuf>>,
    /// Emit CSV, optionally to the given file
    #[arg(long, global = true, num_args = 0..=1)]
    pub csv: Option<Option<PathBuf>>,
    /// Output file (default stdout)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write the parsed invocation as JSON to this file before running
    #[arg(long, global = true)]
    pub save_config: Option<PathBuf>,
}

impl GlobalOptions {
    fn precision(&self) -> Result<Precision> {
        Precision::new(self.precision.unwrap_or(Precision::DEFAULT.bits()))
    }

    fn format(&self) -> Option<Format> {
        if self.json.is_some() {
            Some(Format::Json)
        } else if self.csv.is_some() {
            Some(Format::Csv)
        } else {
            None
        }
    }

    fn out_path(&self) -> Option<&Path> {
        self.json
            .as_ref()
            .or(self.csv.as_ref())
            .and_then(|p| p.as_deref())
            .or(self.out.as_deref())
    }
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamArgs {
    /// Bound on the unipotent entries
    #[arg(long, default_value = "1/2", value_parser = rational_arg)]
    #[serde(with = "rational_text")]
    pub u: Rational,
    /// Cone parameter: `sqrt3over2`, `sqrt(a/b)` or a rational
    #[arg(long, default_value = "sqrt3over2", value_parser = t_squared_arg)]
    #[serde(with = "rational_text", rename = "t_squared")]
    pub t: Rational,
}

impl ParamArgs {
    fn params(&self) -> Result<SiegelParams> {
        SiegelParams::with_t_squared(self.u.clone(), self.t.clone())
    }
}

#[derive(Subcommand, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Command {
    /// Reduce g into the Siegel set by a unimodular δ
    Reduce {
        /// Matrix file (`;`-separated rows or JSON), `-` for stdin
        #[arg(long)]
        matrix: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Iwasawa decomposition g = ν·diag(α)·κ
    Decompose {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Test whether g lies in the Siegel set
    Membership {
        #[arg(long)]
        matrix: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        /// Absolute tolerance of the test
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Leading entries, segment partition and witnessing sequences
    Segments {
        #[arg(long)]
        matrix: PathBuf,
        /// Pair `i,j` (1-based, i > j) to witness
        #[arg(long, value_parser = pair_arg)]
        pair: Option<(usize, usize)>,
    },
    /// Seeded height-bound experiment from a JSON config
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Embed the matrices of every sample in JSON output
        #[arg(long)]
        emit_matrices: bool,
    },
    /// Heights of reduced isogeny matrices in GL_2
    Gl2 {
        /// Base point `re,im` in the upper half-plane
        #[arg(long, default_value = "0,1", value_parser = point_arg)]
        x: String,
        #[arg(long, default_value_t = 100)]
        nmax: u64,
    },
    /// Conjugate a non-standard Siegel set into a standard one
    Standardize {
        /// JSON with flag, form, t and omega samples
        #[arg(long)]
        triple: PathBuf,
        /// Also check containment on a grid of this many points
        #[arg(long)]
        verify: Option<usize>,
    },
}

fn rational_arg(s: &str) -> std::result::Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn t_squared_arg(s: &str) -> std::result::Result<Rational, String> {
    parse_t_squared(s).map_err(|e| e.to_string())
}

fn pair_arg(s: &str) -> std::result::Result<(usize, usize), String> {
    let (i, j) = s.split_once(',').ok_or("expected `i,j`")?;
    let i = i.trim().parse().map_err(|e| format!("{e}"))?;
    let j = j.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((i, j))
}

fn point_arg(s: &str) -> std::result::Result<String, String> {
    UpperHalfPoint::parse(s, Precision::DEFAULT).map_err(|e| e.to_string())?;
    Ok(s.to_string())
}

mod rational_text {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::exactmat::{format_rational, parse_rational, Rational};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

/// Parses `argv` (including the program name) and runs it.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&config) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Runs a parsed invocation.
pub fn execute(config: &RunConfig) -> Result<()> {
    let g = &config.global;
    if let Some(path) = &g.save_config {
        let text = serde_json::to_string_pretty(config)?;
        std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
    }
    let prec = g.precision()?;
    match &config.command {
        Command::Reduce { matrix, params } => {
            let m = read_matrix(matrix)?;
            let red = reduce_to_siegel(&RealMatrix::from_rational(&m, prec), &params.params()?)?;
            let value = json!({
                "delta": red.delta.to_string_rows(),
                "swaps": red.swaps,
                "nu": red.decomposition.nu.to_string_rows(),
                "alpha": floats(&red.decomposition.alpha, prec),
                "kappa": red.decomposition.kappa.to_string_rows(),
            });
            let text = format!(
                "delta =\n{}\nswaps = {}\n{}",
                block(&red.delta.to_string_rows()),
                red.swaps,
                decomposition_text(&red.decomposition)
            );
            print_value(g, &value, &text)
        }
        Command::Decompose { matrix } => {
            let m = read_matrix(matrix)?;
            let dec = iwasawa(&RealMatrix::from_rational(&m, prec))?;
            let value = decomposition_json(&dec, prec);
            print_value(g, &value, &decomposition_text(&dec))
        }
        Command::Membership { matrix, params, tol } => {
            let m = read_matrix(matrix)?;
            let params = params.params()?;
            let (inside, dec) = in_siegel(&RealMatrix::from_rational(&m, prec), &params, *tol)?;
            let mut value = decomposition_json(&dec, prec);
            value["in_siegel"] = json!(inside);
            value["params"] = serde_json::to_value(&params)?;
            let text = format!(
                "in_siegel = {inside} ({params})\n{}",
                decomposition_text(&dec)
            );
            print_value(g, &value, &text)
        }
        Command::Segments { matrix, pair } => {
            let m = read_matrix(matrix)?;
            let leading = leading_entries(&m)?;
            let part = segment_partition(&m)?;
            let lead_text: Vec<String> = leading.iter().map(ToString::to_string).collect();
            let mut value = json!({
                "leading_entries": lead_text,
                "partition": part.to_string(),
            });
            let mut text = format!("leading entries: {}\npartition: {part}", lead_text.join(" "));
            if let Some((i, j)) = *pair {
                let seq = witnessing_sequence(&m, i, j)?;
                debug_assert!(satisfies_chain_condition(&m, &seq, i, j)?);
                let seq_text: Vec<String> = seq.iter().map(ToString::to_string).collect();
                value["witness"] = json!({ "i": i, "j": j, "sequence": seq_text });
                text.push_str(&format!("\nwitness ({i},{j}): {}", seq_text.join(" ")));
            }
            print_value(g, &value, &text)
        }
        Command::Experiment { config: path, emit_matrices } => {
            let mut cfg: ExperimentConfig = serde_json::from_str(&read_input(path)?)?;
            if let Some(seed) = g.seed {
                cfg.seed = seed;
            }
            if let Some(threads) = g.threads {
                cfg.threads = threads;
            }
            if let Some(bits) = g.precision {
                cfg.precision = bits;
            }
            cfg.emit_matrices |= *emit_matrices;
            let out = run_experiment(&cfg)?;
            match g.format() {
                Some(Format::Json) => write_json(&out, g.out_path())?,
                _ => emit_records(&out.records, Format::Csv, g.out_path())?,
            }
            eprintln!("{}", serde_json::to_string_pretty(&out.summary)?);
            for f in &out.failures {
                eprintln!("sample {} (seed {}) failed: {}", f.index, f.seed, f.error);
            }
            Ok(())
        }
        Command::Gl2 { x, nmax } => {
            let point = UpperHalfPoint::parse(x, prec)?;
            let out = hp_experiment(&point, *nmax, prec)?;
            match g.format() {
                Some(Format::Json) => write_json(&out, g.out_path())?,
                _ => emit_records(&out.records, Format::Csv, g.out_path())?,
            }
            eprintln!("{}", serde_json::to_string_pretty(&out.summary)?);
            Ok(())
        }
        Command::Standardize { triple, verify } => {
            let triple = SiegelTripleGLn::from_json(&read_input(triple)?, prec)?;
            let result = standardize(&triple, prec)?;
            let mut value: serde_json::Value = serde_json::from_str(&result.to_json()?)?;
            if let Some(points) = *verify {
                let grid = ContainmentGrid {
                    points,
                    seed: g.seed.unwrap_or(0),
                    ..ContainmentGrid::default()
                };
                value["containment"] = serde_json::to_value(verify_containment(&triple, &result, &grid)?)?;
            }
            write_json(&value, g.out_path())
        }
    }
}

fn floats(v: &[Float], prec: Precision) -> Vec<String> {
    v.iter().map(|x| format_float(x, prec.decimal_digits())).collect()
}

fn decomposition_json(dec: &IwasawaDecomposition, prec: Precision) -> serde_json::Value {
    json!({
        "nu": dec.nu.to_string_rows(),
        "alpha": floats(&dec.alpha, prec),
        "kappa": dec.kappa.to_string_rows(),
    })
}

/// Significant digits in human-readable output; JSON carries full precision.
const TEXT_DIGITS: usize = 12;

fn decomposition_text(dec: &IwasawaDecomposition) -> String {
    let alpha: Vec<String> = dec.alpha.iter().map(|x| format_float(x, TEXT_DIGITS)).collect();
    format!(
        "nu =\n{}\nalpha = ({})\nkappa =\n{}",
        real_block(&dec.nu),
        alpha.join(", "),
        real_block(&dec.kappa)
    )
}

fn real_block(m: &RealMatrix) -> String {
    let rows: Vec<Vec<String>> = (0..m.n())
        .map(|i| (0..m.n()).map(|j| format_float(&m[(i, j)], TEXT_DIGITS)).collect())
        .collect();
    block(&rows)
}

fn block(rows: &[Vec<String>]) -> String {
    rows.iter()
        .map(|r| format!("  {}", r.join(" ")))
        .collect::<Vec<_>>()
        .join("\n")
}

fn print_value(g: &GlobalOptions, value: &serde_json::Value, text: &str) -> Result<()> {
    if g.format() == Some(Format::Json) {
        return write_json(value, g.out_path());
    }
    let mut out = io::open_output(g.out_path())?;
    writeln!(out, "{text}").and_then(|()| out.flush()).map_err(|source| Error::Io {
        path: g.out_path().map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf),
        source,
    })
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut out = io::open_output(path)?;
    let text = serde_json::to_string_pretty(value)?;
    writeln!(out, "{text}").and_then(|()| out.flush()).map_err(|source| Error::Io {
        path: path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips() {
        let c = RunConfig::try_parse_from(["siegelkit", "reduce", "--matrix", "m.txt", "--u", "3/4", "--precision", "256"]).unwrap();
        let text = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.global.precision, Some(256));
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["siegelkit", "decompose"]), 2);
        assert_eq!(run(["siegelkit", "reduce", "--matrix", "m", "--t", "x"]), 2);
        assert_eq!(run(["siegelkit", "frobnicate"]), 2);
        assert_eq!(run(["siegelkit", "gl2", "--x", "0,-1"]), 2);
    }

    #[test]
    fn domain_errors_exit_1() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.txt");
        std::fs::write(&p, "1 2; 2 4").unwrap();
        let argv: Vec<OsString> = vec!["siegelkit".into(), "decompose".into(), "--matrix".into(), p.into()];
        assert_eq!(run(argv), 1);
        assert_eq!(run(["siegelkit", "decompose", "--matrix", "/nonexistent/m.txt"]), 1);
    }
}
