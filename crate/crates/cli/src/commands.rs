use std::fs;
use std::path::Path;

use ecst_core::callgraph::{build_call_graph, collect_functions, EdgeDirection};
use ecst_core::ecfg::{basis_paths, build_ecfg};
use ecst_core::metrics::unit_report;
use ecst_core::persistence::Store;
use ecst_core::{detect_language, EcstNode, LanguageId, ParsedFile};
use rayon::prelude::*;

use crate::render;
use crate::{Command, Failure, Format, Inputs};

pub fn execute(command: &Command) -> Result<String, Failure> {
    match command {
        Command::Parse(inputs) => {
            let files = load(inputs)?;
            render::trees(&files, inputs.output.format)
        }
        Command::Metrics(inputs) => {
            let files = load(inputs)?;
            let report = unit_report(&files).map_err(Failure::analysis)?;
            render::metrics(&report, inputs.output.format)
        }
        Command::Callgraph {
            inputs,
            conventional,
        } => {
            let files = load(inputs)?;
            let forest: Vec<&EcstNode> = files.iter().map(|f| &f.tree).collect();
            let graph = build_call_graph(&forest).map_err(Failure::analysis)?;
            let direction = if *conventional {
                EdgeDirection::Conventional
            } else {
                EdgeDirection::CalleeToCaller
            };
            render::callgraph(&graph, direction, inputs.output.format)
        }
        Command::Cfg {
            inputs,
            function,
            basis_paths: with_paths,
        } => {
            if *with_paths && inputs.output.format == Format::Csv {
                return Err(Failure::Usage(
                    "--basis-paths is not available with --format csv".to_string(),
                ));
            }
            let files = load(inputs)?;
            cfg(&files, function, *with_paths, inputs.output.format)
        }
        Command::SnapshotSave {
            inputs,
            label,
            store,
        } => {
            let files = load(inputs)?;
            let snapshot = Store::new(&store.store)
                .save(label, &files)
                .map_err(Failure::analysis)?;
            render::snapshot(&snapshot, inputs.output.format)
        }
        Command::SnapshotDiff {
            before,
            after,
            store,
            output,
        } => {
            let diff = Store::new(&store.store)
                .diff(before, after)
                .map_err(Failure::analysis)?;
            render::diff(&diff, output.format)
        }
    }
}

/// Reads and parses every input in parallel; results come back in path order.
fn load(inputs: &Inputs) -> Result<Vec<ParsedFile>, Failure> {
    let mut jobs = Vec::with_capacity(inputs.files.len());
    for path in &inputs.files {
        let lang = match inputs.lang {
            Some(lang) => lang,
            None => detect_language(path).map_err(|e| Failure::Usage(e.to_string()))?,
        };
        jobs.push((path.as_path(), lang));
    }
    let mut results: Vec<(String, Result<ParsedFile, String>)> = jobs
        .par_iter()
        .map(|&(path, lang)| (path.display().to_string(), load_one(path, lang)))
        .collect();
    results.sort_by(|a, b| a.0.cmp(&b.0));

    let mut files = Vec::with_capacity(results.len());
    let mut errors = Vec::new();
    for (_, r) in results {
        match r {
            Ok(f) => files.push(f),
            Err(e) => errors.push(e),
        }
    }
    if errors.is_empty() {
        Ok(files)
    } else {
        Err(Failure::Analysis(errors))
    }
}

fn load_one(path: &Path, lang: LanguageId) -> Result<ParsedFile, String> {
    let shown = path.display().to_string();
    let source = fs::read_to_string(path).map_err(|e| format!("{shown}: {e}"))?;
    ParsedFile::parse(shown, source, lang).map_err(|e| e.to_string())
}

fn cfg(
    files: &[ParsedFile],
    wanted: &str,
    with_paths: bool,
    format: Format,
) -> Result<String, Failure> {
    let forest: Vec<&EcstNode> = files.iter().map(|f| &f.tree).collect();
    let records = collect_functions(&forest).map_err(Failure::analysis)?;
    let matches: Vec<_> = records
        .iter()
        .filter(|r| r.qualified() == wanted || r.name == wanted)
        .collect();
    let rec = match matches.as_slice() {
        [one] => *one,
        [] => {
            return Err(Failure::analysis(format!(
                "no function `{wanted}` in the inputs"
            )))
        }
        many => {
            let mut names: Vec<String> = many.iter().map(|r| r.qualified()).collect();
            names.sort();
            return Err(Failure::analysis(format!(
                "function `{wanted}` is ambiguous; use one of {}",
                names.join(", ")
            )));
        }
    };
    let cfg = build_ecfg(&rec.unit, rec.def).map_err(Failure::analysis)?;
    let paths = if with_paths {
        Some(basis_paths(&cfg).map_err(Failure::analysis)?)
    } else {
        None
    };
    render::cfg(&cfg, paths.as_deref(), format)
}
