mod common;

use std::fs;

use ecst_core::callgraph::{build_call_graph, callgraph_to_dot};
use ecst_core::ecfg::{build_ecfg, cfg_to_dot};
use ecst_core::{find_all, EcstNode, ParsedFile, UniversalKind};

use common::{fixture, load};

fn golden(rel: &str) -> String {
    fs::read_to_string(fixture(rel)).unwrap()
}

#[test]
fn one_loop_cfg_matches_golden() {
    let file = load(&fixture("cfg/one_loop.mod"));
    let def = find_all(&file.tree, UniversalKind::FunctionDef)[0];
    let cfg = build_ecfg("L", def).unwrap();
    let dot = cfg_to_dot(&cfg);
    assert_eq!(dot, golden("cfg/one_loop.dot"));
    assert_eq!(dot, cfg_to_dot(&build_ecfg("L", def).unwrap()));
}

fn graph_dot(files: &[ParsedFile]) -> String {
    let forest: Vec<&EcstNode> = files.iter().map(|f| &f.tree).collect();
    callgraph_to_dot(&build_call_graph(&forest).unwrap())
}

#[test]
fn a_calls_b_matches_golden() {
    let files = [load(&fixture("callgraph/pair.mod"))];
    assert_eq!(graph_dot(&files), golden("callgraph/pair.dot"));
}

#[test]
fn three_units_match_golden_in_any_order() {
    let names = ["Main.mod", "Util.cls", "Io.mod"];
    let mut files: Vec<ParsedFile> = names
        .iter()
        .map(|n| load(&fixture(&format!("callgraph/{n}"))))
        .collect();
    let want = golden("callgraph/three_units.dot");
    assert_eq!(graph_dot(&files), want);
    files.reverse();
    assert_eq!(graph_dot(&files), want);
    files.swap(0, 1);
    assert_eq!(graph_dot(&files), want);
}
