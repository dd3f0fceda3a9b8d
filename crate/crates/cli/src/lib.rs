//! Command-line front end: diagrams and models are JSON files, trajectories
//! are CSV files.
//!
//! All indices in diagram files are 0-based.

pub mod error;
pub mod files;
pub mod plot;
pub mod sim;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use compdyn::cset::CSetInstance;
use compdyn::modelspec::{builtin, builtin_names, ModelSpec};
use compdyn::wiring::{
    grid, ocompose_cpg, ocompose_dwd, ocompose_dwd_at, ocompose_uwd, ocompose_uwd_at, CPGraph, DWDiagram, Diagram,
    UWDiagram,
};
use serde_json::Value;

pub use error::CliError;
use files::Labels;
use sim::Scheme;

#[derive(Debug, Parser)]
#[command(name = "compdyn", version, about = "Compose and simulate open dynamical systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check diagram and model files; exits 1 if any has problems.
    Validate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Substitute inner diagrams into the boxes of an outer diagram.
    Compose {
        #[arg(long)]
        outer: PathBuf,
        /// One per outer box, or exactly one together with --slot.
        #[arg(long = "inner", required = true, num_args = 1..)]
        inners: Vec<PathBuf>,
        #[arg(long)]
        slot: Option<usize>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Compose models along a diagram and write the trajectory as CSV.
    Simulate {
        #[arg(long)]
        diagram: PathBuf,
        /// One model per box, or a single model used for every box.
        #[arg(long = "models", required = true, num_args = 1..)]
        models: Vec<PathBuf>,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Scheme::Euler)]
        scheme: Scheme,
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Write a diagram as Graphviz source.
    ExportDot {
        #[arg(long)]
        diagram: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Write a width × height grid of four-port cells as a circular port graph.
    Grid {
        width: usize,
        height: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Reinterpret a circular port graph as a directed wiring diagram.
    Migrate {
        #[arg(long)]
        cpg: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Plot CSV columns against the first column as an SVG line chart.
    Plot {
        #[arg(long)]
        csv: PathBuf,
        /// Column names; all columns when omitted.
        #[arg(long, value_delimiter = ',')]
        columns: Vec<String>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Write the model file of a builtin model.
    Builtin {
        #[arg(value_parser = builtin_name)]
        name: String,
        /// Parameter as NAME=VALUE; every parameter of the model is required.
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, f64)>,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn builtin_name(s: &str) -> Result<String, String> {
    if builtin_names().any(|n| n == s) {
        Ok(s.to_string())
    } else {
        Err(format!("expected one of {}", builtin_names().collect::<Vec<_>>().join(", ")))
    }
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected NAME=VALUE")?;
    let v = v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

/// Runs one command. `Ok(false)` means the command completed but found
/// problems (only `validate` does this).
pub fn run(cli: &Cli) -> Result<bool, CliError> {
    match &cli.command {
        Command::Validate { paths } => validate(paths),
        Command::Compose { outer, inners, slot, output } => {
            let c = compose(outer, inners, *slot)?;
            files::write_diagram(output, &c)?;
            println!("wrote {} ({} boxes)", output.display(), c.n_boxes());
            Ok(true)
        }
        Command::Simulate { diagram, models, config, out, svg, scheme, labels } => {
            simulate(diagram, models, config, out, svg.as_deref(), *scheme, labels.as_ref())?;
            Ok(true)
        }
        Command::ExportDot { diagram, output, labels } => {
            let d = files::read_diagram(diagram)?;
            let labels = Labels::read_opt(labels.as_ref())?.box_names(d.n_boxes())?;
            files::write_text(output, &d.to_dot(Some(&labels)))?;
            println!("wrote {}", output.display());
            Ok(true)
        }
        Command::Grid { width, height, output } => {
            let g = grid(*width, *height)?;
            files::write_diagram(output, &Diagram::Cpg(g))?;
            println!("wrote {}", output.display());
            Ok(true)
        }
        Command::Migrate { cpg, output } => {
            let Diagram::Cpg(g) = files::read_diagram(cpg)? else {
                return Err(CliError::invalid(format!("{} is not a CPG diagram", cpg.display())));
            };
            files::write_diagram(output, &Diagram::Dwd(g.to_dwd()))?;
            println!("wrote {}", output.display());
            Ok(true)
        }
        Command::Plot { csv, columns, output } => {
            let table = plot::read_csv(csv)?;
            files::write_text(output, &plot::chart_from_table(&table, columns)?)?;
            println!("wrote {}", output.display());
            Ok(true)
        }
        Command::Builtin { name, params, output } => {
            let params: BTreeMap<String, f64> = params.iter().cloned().collect();
            let spec = builtin(name, &params)?;
            files::write_text(output, &format!("{}\n", spec.to_json()))?;
            println!("wrote {}", output.display());
            Ok(true)
        }
    }
}

/// One report line per file: `<path>: N violations`, followed by the
/// violations themselves.
fn validate(paths: &[PathBuf]) -> Result<bool, CliError> {
    let mut clean = true;
    for path in paths {
        let problems = match check_file(path) {
            Ok(p) => p,
            Err(e) => vec![e.to_string()],
        };
        println!("{}: {} violations", path.display(), problems.len());
        for p in &problems {
            println!("  {p}");
        }
        clean &= problems.is_empty();
    }
    Ok(clean)
}

fn check_file(path: &Path) -> Result<Vec<String>, CliError> {
    let value = files::read_json(path)?;
    if value.get("schema").is_some() {
        let x = CSetInstance::from_json(&value)?;
        let violations: Vec<String> = x.validate().iter().map(ToString::to_string).collect();
        if violations.is_empty() {
            Diagram::from_instance(x)?;
        }
        Ok(violations)
    } else if value.get("kind").is_some() {
        let spec: ModelSpec = serde_json::from_value(value).map_err(|e| CliError::invalid(e.to_string()))?;
        Ok(spec.validate().err().map(|e| e.to_string()).into_iter().collect())
    } else {
        Err(CliError::invalid("neither a diagram (no `schema` key) nor a model (no `kind` key)"))
    }
}

pub fn compose(outer: &Path, inners: &[PathBuf], slot: Option<usize>) -> Result<Diagram, CliError> {
    let outer = files::read_diagram(outer)?;
    let inners = inners.iter().map(|p| files::read_diagram(p)).collect::<Result<Vec<_>, _>>()?;
    if let Some(bad) = inners.iter().find(|d| d.schema_name() != outer.schema_name()) {
        return Err(CliError::invalid(format!(
            "cannot substitute a {} diagram into a {} diagram",
            bad.schema_name(),
            outer.schema_name()
        )));
    }
    // Diagrams of one schema, unwrapped.
    fn unwrap<T>(ds: &[Diagram], f: impl Fn(&Diagram) -> Option<&T>) -> Vec<T>
    where
        T: Clone,
    {
        ds.iter().map(|d| f(d).expect("schemas checked").clone()).collect()
    }
    if slot.is_some() && inners.len() != 1 {
        return Err(CliError::invalid("--slot takes exactly one --inner"));
    }
    Ok(match (&outer, slot) {
        (Diagram::Uwd(o), Some(i)) => {
            let inner = unwrap::<UWDiagram>(&inners, |d| if let Diagram::Uwd(x) = d { Some(x) } else { None });
            Diagram::Uwd(ocompose_uwd_at(o, i, &inner[0])?)
        }
        (Diagram::Uwd(o), None) => {
            let inner = unwrap::<UWDiagram>(&inners, |d| if let Diagram::Uwd(x) = d { Some(x) } else { None });
            Diagram::Uwd(ocompose_uwd(o, &inner)?)
        }
        (Diagram::Dwd(o), Some(i)) => {
            let inner = unwrap::<DWDiagram>(&inners, |d| if let Diagram::Dwd(x) = d { Some(x) } else { None });
            Diagram::Dwd(ocompose_dwd_at(o, i, &inner[0])?)
        }
        (Diagram::Dwd(o), None) => {
            let inner = unwrap::<DWDiagram>(&inners, |d| if let Diagram::Dwd(x) = d { Some(x) } else { None });
            Diagram::Dwd(ocompose_dwd(o, &inner)?)
        }
        (Diagram::Cpg(o), slot) => {
            let mut inner = unwrap::<CPGraph>(&inners, |d| if let Diagram::Cpg(x) = d { Some(x) } else { None });
            if let Some(i) = slot {
                if i >= o.n_boxes() {
                    return Err(compdyn::wiring::WiringError::Slot { index: i, boxes: o.n_boxes() }.into());
                }
                let only = inner.remove(0);
                inner = o.signature().into_iter().map(CPGraph::identity).collect();
                inner[i] = only;
            }
            Diagram::Cpg(ocompose_cpg(o, &inner)?)
        }
    })
}

fn simulate(
    diagram: &Path,
    models: &[PathBuf],
    config: &Path,
    out: &Path,
    svg: Option<&Path>,
    scheme: Scheme,
    labels: Option<&PathBuf>,
) -> Result<(), CliError> {
    let d = files::read_diagram(diagram)?;
    let specs = models.iter().map(|p| files::read_model(p)).collect::<Result<Vec<_>, _>>()?;
    let cfg: sim::SimConfig = serde_json::from_value(files::read_json(config)?)
        .map_err(|e| CliError::Parse { path: config.into(), message: e.to_string() })?;
    let labels = Labels::read_opt(labels)?;
    let assembled = sim::assemble(&d, &specs, &labels)?;
    let (traj, info) = sim::simulate(&assembled, &cfg, scheme)?;

    let file = File::create(out).map_err(|source| CliError::Io { path: out.into(), source })?;
    sim::write_csv(BufWriter::new(file), &traj)?;
    let meta_path = PathBuf::from(format!("{}.meta.json", out.display()));
    let mut meta = serde_json::to_value(&info).expect("plain data");
    meta["diagram"] = Value::String(d.schema_name().into());
    files::write_text(&meta_path, &format!("{}\n", serde_json::to_string_pretty(&meta).expect("plain data")))?;
    if let Some(svg) = svg {
        let series: Vec<Vec<f64>> =
            (0..traj.names.len()).map(|i| traj.states.iter().map(|x| x[i]).collect()).collect();
        let named: Vec<(&str, &[f64])> = traj.names.iter().map(String::as_str).zip(series.iter().map(|s| &s[..])).collect();
        files::write_text(svg, &plot::line_chart("t", &traj.times, &named))?;
    }
    println!("wrote {} ({} steps, {} states)", out.display(), cfg.steps, traj.names.len());
    Ok(())
}
