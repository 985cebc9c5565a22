//! Cross-checks call-graph edges against call sites found by a line-based
//! regex scan of the sources, independent of the parsers.

mod common;

use std::collections::BTreeMap;

use ecst_core::callgraph::build_call_graph;
use ecst_core::{EcstNode, LanguageId, ParsedFile};
use regex::Regex;

use common::{corpus_paths, fixture, load};

/// (line, column) of a call site mapped to (callee, caller).
type Sites = BTreeMap<(u32, u32), (String, String)>;

fn scan(file: &ParsedFile) -> Sites {
    let header = match file.lang {
        LanguageId::LangK => Regex::new(r"^PROCEDURE\s+(\w+)\s*\(").unwrap(),
        LanguageId::LangC => Regex::new(r"^\s*\w+\s+(\w+)\s*\(.*\)\s*\{").unwrap(),
    };
    let call = Regex::new(r"^(\s*)(\w+)\s*\(").unwrap();
    let control = [
        "if", "while", "IF", "WHILE", "ELSIF", "UNTIL", "RETURN", "return",
    ];
    let mut caller = String::new();
    let mut sites = Sites::new();
    for (i, line) in file.source.lines().enumerate() {
        if let Some(m) = header.captures(line) {
            caller = m[1].to_string();
            continue;
        }
        if let Some(m) = call.captures(line) {
            if control.contains(&&m[2]) {
                continue;
            }
            let col = m[1].chars().count() as u32 + 1;
            sites.insert((i as u32 + 1, col), (m[2].to_string(), caller.clone()));
        }
    }
    sites
}

fn check(files: &[ParsedFile]) -> usize {
    let forest: Vec<&EcstNode> = files.iter().map(|f| &f.tree).collect();
    let graph = build_call_graph(&forest).unwrap();
    let mut total = 0;
    for file in files {
        let sites = scan(file);
        let edges: Sites = graph
            .edges
            .iter()
            .filter(|e| *e.call_site.file == file.path)
            .map(|e| {
                let callee = graph.nodes[e.from].label();
                let caller = graph.nodes[e.to].label();
                let bare = |l: &str| l.rsplit(['.', ':']).next().unwrap().to_string();
                (
                    (e.call_site.line, e.call_site.column),
                    (bare(&callee), bare(&caller)),
                )
            })
            .collect();
        assert_eq!(edges, sites, "{}", file.path);
        total += sites.len();
    }
    total
}

#[test]
fn corpus_edges_point_from_callee_to_caller() {
    let mut checked = 0;
    for lang in ["mod", "cls"] {
        let files: Vec<ParsedFile> = corpus_paths()
            .iter()
            .filter(|p| p.extension().unwrap() == lang)
            .map(|p| load(p))
            .collect();
        checked += check(&files);
    }
    assert!(checked > 20, "only {checked} call sites scanned");
}

#[test]
fn fixture_edges_point_from_callee_to_caller() {
    let files: Vec<ParsedFile> = ["pair.mod", "Main.mod", "Util.cls", "Io.mod"]
        .iter()
        .map(|n| load(&fixture(&format!("callgraph/{n}"))))
        .collect();
    assert_eq!(check(&files[..1]), 1);
    assert_eq!(check(&files[1..]), 11);
}
