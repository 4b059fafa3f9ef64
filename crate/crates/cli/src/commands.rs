//! Command grammar and dispatch. Every command except `serve` is a pure
//! function of its input file and flags.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dgonlab::homology::{cohomology_dim, verify_nonzero_class};
use dgonlab::io::pathsum_from_json;
use dgonlab::mutation::{mutate, vertex_of};
use dgonlab::qsp::all_sign_choices;
use dgonlab::reduce::{reduce_to_fixpoint, verify_commute, ReduceOptions, Strategy};
use dgonlab::surface::flip_orbit;
use dgonlab::{IsoMode, MutationMode, Surface, VerifyReport};
use serde_json::{json, Value};

use crate::input::{Failure, Input};
use crate::views::{ginzburg_view, mutation_view, qsp_view, reduction_view, to_value};

#[derive(Parser, Debug)]
#[command(name = "dgonlab", version, about = "Quivers with superpotential of d-angulated surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the JSON result to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FileArg {
    /// Surface, quiver-with-superpotential or dg-algebra JSON file.
    pub file: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a surface and report (g, b, c, m, n) and its self-folded arcs.
    Validate(FileArg),
    /// Build the quiver with superpotential of a surface.
    Qsp {
        #[command(flatten)]
        input: FileArg,
        /// List every valid choice of face signs instead of the first.
        #[arg(long)]
        all_signs: bool,
        /// Maximum number of sign choices listed with --all-signs.
        #[arg(long, default_value_t = 64)]
        limit: usize,
    },
    /// Build the Ginzburg dg algebra of a surface or quiver with superpotential.
    Ginzburg(FileArg),
    /// Flip an arc, then keep flipping the new arc.
    Flip {
        #[command(flatten)]
        input: FileArg,
        #[arg(long)]
        arc: String,
        #[arg(long, default_value_t = 1)]
        times: usize,
    },
    /// Flip an arc repeatedly until the surface returns.
    Orbit {
        #[command(flatten)]
        input: FileArg,
        #[arg(long)]
        arc: String,
        /// Maximum number of flips.
        #[arg(long, default_value_t = 12)]
        times: usize,
    },
    /// Mutate a quiver with superpotential at the vertex of an arc.
    Mutate {
        #[command(flatten)]
        input: FileArg,
        #[arg(long)]
        arc: String,
        #[arg(long, value_enum, default_value_t = MutationArg::Surface)]
        mode: MutationArg,
    },
    /// Cancel arrow pairs until the dg algebra is minimal.
    Reduce {
        #[command(flatten)]
        input: FileArg,
        #[arg(long, value_enum, default_value_t = StrategyArg::SmallestDegree)]
        strategy: StrategyArg,
        /// Cancel even when the algebra has a degree-0 cycle.
        #[arg(long)]
        complete: bool,
    },
    /// Check that mutation and flip commute up to reduction.
    ///
    /// The default mode is strict for a single arc and sign-relaxed with
    /// --all-arcs. Exits 1 when a check does not pass.
    VerifyCommute {
        #[command(flatten)]
        input: FileArg,
        #[arg(long, required_unless_present = "all_arcs", conflicts_with = "all_arcs")]
        arc: Option<String>,
        #[arg(long)]
        all_arcs: bool,
        #[arg(long, value_enum)]
        mode: Option<IsoArg>,
        /// Worker threads for --all-arcs.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Keep stage timings; they make the output run-dependent.
        #[arg(long)]
        timings: bool,
    },
    /// Truncated cohomology, and optionally a non-vanishing check for a class.
    Homology {
        #[command(flatten)]
        input: FileArg,
        #[arg(long, allow_hyphen_values = true)]
        degree: i64,
        /// Path-length window.
        #[arg(long, default_value_t = 8)]
        length: usize,
        /// Cocycle as JSON terms, e.g. '[{"path":["a","a"],"coeff":"1"}]'.
        #[arg(long)]
        class: Option<String>,
    },
    /// Serve the pipelines over HTTP.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
        /// Snapshot sessions as surface files here and reload them at start.
        #[arg(long)]
        state_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        sessions: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MutationArg {
    Surface,
    Oppermann,
}

impl From<MutationArg> for MutationMode {
    fn from(m: MutationArg) -> Self {
        match m {
            MutationArg::Surface => MutationMode::Surface,
            MutationArg::Oppermann => MutationMode::Oppermann,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrategyArg {
    SmallestDegree,
    LargestDegree,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum IsoArg {
    Strict,
    SignRelaxed,
    Support,
}

impl From<IsoArg> for IsoMode {
    fn from(m: IsoArg) -> Self {
        match m {
            IsoArg::Strict => IsoMode::Strict,
            IsoArg::SignRelaxed => IsoMode::SignRelaxed,
            IsoArg::Support => IsoMode::Support,
        }
    }
}

/// A JSON result and whether the command counts as a success.
pub struct Outcome {
    pub value: Value,
    pub ok: bool,
}

impl From<Value> for Outcome {
    fn from(value: Value) -> Self {
        Outcome { value, ok: true }
    }
}

pub fn surface_value(s: &Surface) -> Value {
    serde_json::from_str(&s.to_json()).expect("surface json")
}

/// Run a command other than `serve`.
pub fn run(command: &Command) -> Result<Outcome, Failure> {
    let load = |f: &FileArg| Input::load(&f.file);
    match command {
        Command::Validate(f) => Ok(to_value(&load(f)?.surface()?.validate()?).into()),
        Command::Qsp { input, all_signs: false, .. } => Ok(qsp_view(&load(input)?.qsp()?).into()),
        Command::Qsp { input, all_signs: true, limit } => {
            let s = load(input)?.surface()?;
            let choices = all_sign_choices(&s, *limit)?;
            Ok(json!({ "choices": choices.iter().map(qsp_view).collect::<Vec<_>>() }).into())
        }
        Command::Ginzburg(f) => {
            let (alg, w) = load(f)?.dga()?;
            Ok(ginzburg_view(&alg, &w).into())
        }
        Command::Flip { input, arc, times } => {
            let mut s = load(input)?.surface()?;
            let mut label = arc.clone();
            for _ in 0..*times {
                let (next, new) = s.flip(&label)?;
                s = next;
                label = new;
            }
            Ok(surface_value(&s).into())
        }
        Command::Orbit { input, arc, times } => {
            let s = load(input)?.surface()?;
            Ok(json!({ "arc": arc, "result": flip_orbit(&s, arc, *times)? }).into())
        }
        Command::Mutate { input, arc, mode } => {
            let q = load(input)?.qsp()?;
            let v = vertex_of(&q.quiver, arc)?;
            Ok(mutation_view(&mutate(&q, v, (*mode).into())?).into())
        }
        Command::Reduce { input, strategy, complete } => {
            let (alg, _) = load(input)?.dga()?;
            let strategy = match strategy {
                StrategyArg::SmallestDegree => Strategy::SmallestDegree,
                StrategyArg::LargestDegree => Strategy::LargestDegree,
            };
            let (out, trace) = reduce_to_fixpoint(&alg, ReduceOptions { strategy, complete: *complete })?;
            Ok(reduction_view(&out, &trace).into())
        }
        Command::VerifyCommute { input, arc, all_arcs, mode, jobs, timings } => {
            let s = load(input)?.surface()?;
            let finish = |r: VerifyReport| if *timings { r } else { r.without_timings() };
            if *all_arcs {
                let mode = mode.map_or(IsoMode::SignRelaxed, IsoMode::from);
                let reports = verify_all(&s, mode, *jobs)?.into_iter().map(finish).collect::<Vec<_>>();
                let passed = reports.iter().all(|r| r.passed);
                let value = json!({ "mode": mode, "passed": passed, "reports": reports });
                Ok(Outcome { value, ok: passed })
            } else {
                let arc = arc.as_deref().expect("clap requires --arc without --all-arcs");
                let mode = mode.map_or(IsoMode::Strict, IsoMode::from);
                let report = finish(verify_commute(&s, arc, mode)?);
                Ok(Outcome { ok: report.passed, value: to_value(&report) })
            }
        }
        Command::Homology { input, degree, length, class } => {
            let (alg, _) = load(input)?.dga()?;
            let mut value = json!({ "cohomology": cohomology_dim(&alg, *degree, *length)? });
            if let Some(text) = class {
                let terms: Vec<dgonlab::io::TermJson> = serde_json::from_str(text)
                    .map_err(|e| Failure::new("parse", e.to_string(), json!({ "at": "--class" })))?;
                let z = pathsum_from_json(&alg.quiver, &terms, "--class")?;
                let (verdict, unknowns) = verify_nonzero_class(&alg, &z)?;
                value["class"] = to_value(&verdict.report(&alg, unknowns));
            }
            Ok(value.into())
        }
        Command::Serve { .. } => Err(Failure::new("usage", "serve is handled by the binary", Value::Null)),
    }
}

/// Verify every arc, spreading arcs over `jobs` threads. Reports come back
/// in arc order whatever the scheduling.
pub fn verify_all(s: &Surface, mode: IsoMode, jobs: usize) -> Result<Vec<VerifyReport>, Failure> {
    let arcs: Vec<String> = s.arcs().into_iter().collect();
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<dgonlab::Result<VerifyReport>>>> = Mutex::new(arcs.iter().map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, arcs.len().max(1)) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(arc) = arcs.get(k) else { break };
                let r = verify_commute(s, arc, mode);
                slots.lock().expect("worker panicked")[k] = Some(r);
            });
        }
    });
    let slots = slots.into_inner().expect("worker panicked");
    slots.into_iter().map(|r| r.expect("every arc visited").map_err(Failure::from)).collect()
}
