//! `scatterx` command line.
//!
//! Every invocation prints exactly one JSON document on stdout; diagnostics go
//! to stderr. Exit codes: `0` success, `1` I/O or parse failure, `2` validation
//! or argument error, `3` collision under `--policy error`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::analysis::analyze;
use crate::engine::{scatter, scatter_nd_update, torch_scatter, CollisionPolicy, ScatterReport, Scattering};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::json::{self, dispatch, AnyTensor};
use crate::tensor::{IntTensor, Shape};
use crate::transformer::{compose_provision, ProvisionTensor};

#[derive(Debug, Parser)]
#[command(name = "scatterx", version, about = "Dense tensor scattering and sliceability analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Collision policy: error, first, last, sum or prod.
    #[arg(long, default_value = "last", value_parser = parse_policy)]
    pub policy: CollisionPolicy,
    /// Write the result tensor here instead of embedding it in stdout.
    #[arg(long, conflicts_with = "in_place")]
    pub out: Option<PathBuf>,
    /// Replace the background tensor file with the result.
    #[arg(long)]
    pub in_place: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scatter updates into a background through a provision tensor.
    Scatter {
        /// i64 table of shape S1 + (L,); row I is the target index of source I.
        #[arg(long)]
        provision: PathBuf,
        /// Data tensor of shape S1.
        #[arg(long)]
        updates: PathBuf,
        /// Data tensor of the target shape; untouched cells keep their values.
        #[arg(long)]
        background: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// tensor_scatter_nd_update(tensor, indices, updates).
    TfScatter {
        #[arg(long)]
        tensor: PathBuf,
        #[arg(long)]
        indices: PathBuf,
        #[arg(long)]
        updates: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// self.scatter(dim, index, src).
    TorchScatter {
        #[arg(long = "self")]
        self_t: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        dim: i64,
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        src: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Collision, coverage and sliceability report for a provision tensor.
    Analyze {
        /// i64 provision table.
        #[arg(long)]
        provision: PathBuf,
        /// Comma-separated target extents; defaults to the bounding shape of the entries.
        #[arg(long)]
        target_shape: Option<String>,
    },
    /// Tabulate an x-transformer spec into a provision tensor.
    Compose {
        /// Spec document with inner table and picks.
        #[arg(long)]
        spec: PathBuf,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the golden example tensors into a directory.
    Fixtures {
        #[arg(long)]
        dir: PathBuf,
    },
}

fn parse_policy(s: &str) -> std::result::Result<CollisionPolicy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Parses `"a,b,c"`; the empty string is the rank-0 shape.
pub fn parse_shape(s: &str) -> Result<Shape> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Shape::scalar());
    }
    s.split(',')
        .map(|d| d.trim().parse::<usize>().map_err(|_| Error::argument(format!("bad extent {d:?} in shape {s:?}"))))
        .collect::<Result<Vec<_>>>()
        .map(Shape::new)
}

fn read_tensor(path: &Path) -> Result<AnyTensor> {
    AnyTensor::parse(&fs::read_to_string(path)?)
}

/// Writes through a sibling temp file and a rename, so a failed run never
/// leaves a partial file behind.
pub fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn emit_scatter(result: AnyTensor, report: ScatterReport, output: &OutputArgs, background: &Path) -> Result<Value> {
    let tensor = result.to_value()?;
    let report = json::scatter_report_to_value(&report);
    if output.in_place {
        write_atomic(background, &json::to_text(&tensor))?;
        Ok(report)
    } else if let Some(out) = &output.out {
        write_atomic(out, &json::to_text(&tensor))?;
        Ok(report)
    } else {
        Ok(json!({ "result": tensor, "report": report }))
    }
}

fn fixture_documents() -> Result<Vec<(&'static str, Value)>> {
    Ok(vec![
        ("e_minus1.json", json::int_to_value(fixtures::e_minus1().table())),
        ("a1.json", json::real_to_value(&fixtures::a1())?),
        ("x1.json", json::real_to_value(&fixtures::x1())?),
        ("b1.json", json::real_to_value(&fixtures::b1())?),
        ("e_minus2.json", json::int_to_value(fixtures::e_minus2().table())),
        ("t_prime_minus2.json", json::int_to_value(fixtures::t_prime_minus2().table())),
        ("e_minus2_spec.json", json::spec_to_value(&fixtures::e_minus2_spec())),
        ("e3.json", json::int_to_value(fixtures::e3().table())),
    ])
}

pub fn execute(command: &Command) -> Result<Value> {
    match command {
        Command::Scatter { provision, updates, background, output } => {
            let table = read_tensor(provision)?.into_int()?;
            let upd = read_tensor(updates)?;
            let bg = read_tensor(background)?;
            let e = ProvisionTensor::new(table, bg.shape().clone())?;
            let policy = output.policy;
            let (result, report) = dispatch(
                upd,
                bg,
                |u, b| scatter(&Scattering::new(&e, u, b)?, policy),
                |u, b| scatter(&Scattering::new(&e, u, b)?, policy),
            )?;
            emit_scatter(result, report, output, background)
        }
        Command::TfScatter { tensor, indices, updates, output } => {
            let ts = read_tensor(tensor)?;
            let idx = read_tensor(indices)?.into_int()?;
            let upd = read_tensor(updates)?;
            let policy = output.policy;
            let (result, report) = dispatch(
                upd,
                ts,
                |u, t| scatter_nd_update(t, &idx, u, policy),
                |u, t| scatter_nd_update(t, &idx, u, policy),
            )?;
            emit_scatter(result, report, output, tensor)
        }
        Command::TorchScatter { self_t, dim, index, src, output } => {
            let base = read_tensor(self_t)?;
            let idx: IntTensor = read_tensor(index)?.into_int()?;
            let source = read_tensor(src)?;
            let dim = usize::try_from(*dim).map_err(|_| Error::argument(format!("dim {dim} out of range")))?;
            let policy = output.policy;
            let (result, report) = dispatch(
                source,
                base,
                |s, b| torch_scatter(b, dim, &idx, s, policy),
                |s, b| torch_scatter(b, dim, &idx, s, policy),
            )?;
            emit_scatter(result, report, output, self_t)
        }
        Command::Analyze { provision, target_shape } => {
            let table = read_tensor(provision)?.into_int()?;
            let e = match target_shape {
                Some(s) => ProvisionTensor::new(table, parse_shape(s)?)?,
                None => ProvisionTensor::with_bounding_target(table)?,
            };
            Ok(json::analysis_to_value(&analyze(&e)?))
        }
        Command::Compose { spec, out } => {
            let spec = json::spec_from_value(serde_json::from_str(&fs::read_to_string(spec)?)?)?;
            let e = compose_provision(&spec)?;
            let doc = json::int_to_value(e.table());
            match out {
                Some(path) => {
                    write_atomic(path, &json::to_text(&doc))?;
                    Ok(json!({ "written": path, "shape": e.table().shape().dims() }))
                }
                None => Ok(doc),
            }
        }
        Command::Fixtures { dir } => {
            fs::create_dir_all(dir)?;
            let mut files = Vec::new();
            for (name, doc) in fixture_documents()? {
                write_atomic(&dir.join(name), &json::to_text(&doc))?;
                files.push(name);
            }
            Ok(json!({ "dir": dir, "files": files }))
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() {
                2
            } else {
                let _ = write!(stdout, "{}", e.render());
                0
            };
        }
    };
    match execute(&cli.command) {
        Ok(doc) => {
            let _ = stdout.write_all(json::to_text(&doc).as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
