//! Randomised cross-language properties. Programs are generated as a tiny
//! AST, rendered once per language, and checked against values computed from
//! the AST itself.

use std::collections::BTreeSet;

use ecst_core::callgraph::{build_call_graph, collect_functions};
use ecst_core::ecfg::{basis_paths, build_ecfg, cc_from_cfg};
use ecst_core::frontends::tokenize;
use ecst_core::metrics::{cyclomatic_complexity, FunctionMetrics, MetricsReport};
use ecst_core::persistence::{diff_reports, ecst_to_xml, xml_to_ecst};
use ecst_core::{find_all, parse, skeleton, EcstNode, LanguageId, UniversalKind};
use proptest::prelude::*;

#[derive(Debug, Clone)]
enum Cond {
    Rel(u8, i32),
    And(Box<Cond>, Box<Cond>),
    Or(Box<Cond>, Box<Cond>),
    Not(Box<Cond>),
}

#[derive(Debug, Clone)]
enum Stmt {
    Assign(i32),
    Call(String),
    If {
        arms: Vec<(Cond, Vec<Stmt>)>,
        otherwise: Option<Vec<Stmt>>,
        returns: bool,
    },
    While(Cond, Vec<Stmt>),
    Repeat(Vec<Stmt>, Cond),
}

#[derive(Debug, Clone)]
struct Function {
    body: Vec<Stmt>,
    returns: bool,
}

fn cond() -> impl Strategy<Value = Cond> {
    let leaf = (0u8..6, 0i32..50).prop_map(|(op, n)| Cond::Rel(op, n));
    leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Cond::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Cond::Or(Box::new(a), Box::new(b))),
            inner.prop_map(|c| Cond::Not(Box::new(c))),
        ]
    })
}

fn stmts() -> impl Strategy<Value = Vec<Stmt>> {
    let leaf = prop_oneof![
        (0i32..9).prop_map(Stmt::Assign),
        prop::sample::select(vec!["log", "emit", "step"]).prop_map(|s| Stmt::Call(s.to_string())),
    ];
    let stmt = leaf.prop_recursive(4, 32, 4, |inner| {
        let block = prop::collection::vec(inner, 0..3);
        prop_oneof![
            (
                prop::collection::vec((cond(), block.clone()), 1..4),
                prop::option::of(block.clone()),
                any::<bool>(),
            )
                .prop_map(|(arms, otherwise, returns)| {
                    // A returning arm is only emitted on a lone IF so that no
                    // statement is ever made unreachable.
                    let returns = returns && arms.len() == 1 && otherwise.is_none();
                    Stmt::If {
                        arms,
                        otherwise,
                        returns,
                    }
                }),
            (cond(), block.clone()).prop_map(|(c, b)| Stmt::While(c, b)),
            (block, cond()).prop_map(|(b, c)| Stmt::Repeat(b, c)),
        ]
    });
    prop::collection::vec(stmt, 0..4)
}

fn function() -> impl Strategy<Value = Function> {
    (stmts(), any::<bool>()).prop_map(|(body, returns)| Function { body, returns })
}

fn predicates(stmts: &[Stmt]) -> u32 {
    stmts
        .iter()
        .map(|s| match s {
            Stmt::Assign(_) | Stmt::Call(_) => 0,
            Stmt::If {
                arms, otherwise, ..
            } => {
                arms.iter().map(|(_, b)| 1 + predicates(b)).sum::<u32>()
                    + otherwise.as_deref().map_or(0, predicates)
            }
            Stmt::While(_, b) | Stmt::Repeat(b, _) => 1 + predicates(b),
        })
        .sum()
}

const REL_K: [&str; 6] = ["<", "<=", ">", ">=", "=", "#"];
const REL_C: [&str; 6] = ["<", "<=", ">", ">=", "==", "!="];

fn render_cond(c: &Cond, lang: LanguageId) -> String {
    let k = lang == LanguageId::LangK;
    match c {
        Cond::Rel(op, n) => {
            let op = if k { REL_K } else { REL_C }[*op as usize];
            format!("x {op} {n}")
        }
        Cond::And(a, b) => {
            let op = if k { "AND" } else { "&&" };
            format!("({}) {op} ({})", render_cond(a, lang), render_cond(b, lang))
        }
        Cond::Or(a, b) => {
            let op = if k { "OR" } else { "||" };
            format!("({}) {op} ({})", render_cond(a, lang), render_cond(b, lang))
        }
        Cond::Not(a) => {
            let op = if k { "NOT" } else { "!" };
            format!("{op} ({})", render_cond(a, lang))
        }
    }
}

fn render_block(stmts: &[Stmt], lang: LanguageId, depth: usize, out: &mut String) {
    for s in stmts {
        render_stmt(s, lang, depth, out);
    }
}

fn render_stmt(s: &Stmt, lang: LanguageId, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    let k = lang == LanguageId::LangK;
    match s {
        Stmt::Assign(n) if k => out.push_str(&format!("{pad}x := x + {n};\n")),
        Stmt::Assign(n) => out.push_str(&format!("{pad}x = x + {n};\n")),
        Stmt::Call(name) => out.push_str(&format!("{pad}{name}(x, 1);\n")),
        Stmt::If {
            arms,
            otherwise,
            returns,
        } => {
            for (i, (c, body)) in arms.iter().enumerate() {
                let c = render_cond(c, lang);
                let head = match (k, i) {
                    (true, 0) => format!("{pad}IF {c} THEN\n"),
                    (true, _) => format!("{pad}ELSIF {c} THEN\n"),
                    (false, 0) => format!("{pad}if ({c}) {{\n"),
                    (false, _) => format!("{pad}}} else if ({c}) {{\n"),
                };
                out.push_str(&head);
                render_block(body, lang, depth + 1, out);
                if *returns {
                    let kw = if k { "RETURN" } else { "return" };
                    out.push_str(&format!("{pad}  {kw} x;\n"));
                }
            }
            if let Some(body) = otherwise {
                out.push_str(&format!("{pad}{}\n", if k { "ELSE" } else { "} else {" }));
                render_block(body, lang, depth + 1, out);
            }
            out.push_str(&format!("{pad}{}\n", if k { "END;" } else { "}" }));
        }
        Stmt::While(c, body) => {
            let c = render_cond(c, lang);
            out.push_str(&if k {
                format!("{pad}WHILE {c} DO\n")
            } else {
                format!("{pad}while ({c}) {{\n")
            });
            render_block(body, lang, depth + 1, out);
            out.push_str(&format!("{pad}{}\n", if k { "END;" } else { "}" }));
        }
        Stmt::Repeat(body, c) => {
            let c = render_cond(c, lang);
            out.push_str(&format!("{pad}{}\n", if k { "REPEAT" } else { "do {" }));
            render_block(body, lang, depth + 1, out);
            out.push_str(&if k {
                format!("{pad}UNTIL {c};\n")
            } else {
                format!("{pad}}} while (!({c}));\n")
            });
        }
    }
}

fn render_unit(functions: &[Function], lang: LanguageId) -> String {
    let mut out = String::new();
    let k = lang == LanguageId::LangK;
    out.push_str(if k { "MODULE R;\n" } else { "class R {\n" });
    for (i, f) in functions.iter().enumerate() {
        if k {
            out.push_str(&format!("PROCEDURE f{i}(x);\n"));
        } else {
            out.push_str(&format!("  int f{i}(int x) {{\n"));
        }
        render_block(&f.body, lang, 2, &mut out);
        if f.returns {
            out.push_str(if k {
                "  RETURN x;\n"
            } else {
                "    return x;\n"
            });
        }
        out.push_str(&if k {
            format!("END f{i};\n")
        } else {
            "  }\n".to_string()
        });
    }
    out.push_str(if k { "END R.\n" } else { "}\n" });
    out
}

fn defs(tree: &EcstNode) -> Vec<&EcstNode> {
    find_all(tree, UniversalKind::FunctionDef)
}

/// Rank of the path/edge incidence matrix over the rationals.
fn incidence_rank(rows: Vec<Vec<f64>>) -> usize {
    let mut m = rows;
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..m.len()).find(|&r| m[r][col].abs() > 1e-9) else {
            continue;
        };
        m.swap(rank, pivot);
        for r in 0..m.len() {
            if r != rank {
                let factor = m[r][col] / m[rank][col];
                let pivot_row = m[rank].clone();
                for (x, p) in m[r].iter_mut().zip(&pivot_row) {
                    *x -= factor * p;
                }
            }
        }
        rank += 1;
    }
    rank
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn both_languages_agree_with_the_generator(fs in prop::collection::vec(function(), 1..4)) {
        let k_src = render_unit(&fs, LanguageId::LangK);
        let c_src = render_unit(&fs, LanguageId::LangC);
        let k = parse(&k_src, LanguageId::LangK, "r.mod").map_err(|e| TestCaseError::fail(format!("{e}\n{k_src}")))?;
        let c = parse(&c_src, LanguageId::LangC, "r.cls").map_err(|e| TestCaseError::fail(format!("{e}\n{c_src}")))?;
        prop_assert_eq!(skeleton(&k), skeleton(&c));
        for (f, (kd, cd)) in fs.iter().zip(defs(&k).into_iter().zip(defs(&c))) {
            let want = 1 + predicates(&f.body);
            prop_assert_eq!(cyclomatic_complexity(kd).unwrap(), want);
            prop_assert_eq!(cyclomatic_complexity(cd).unwrap(), want);
        }
    }

    #[test]
    fn cfg_and_basis_paths_match_predicate_counting(fs in prop::collection::vec(function(), 1..3), lang_k in any::<bool>()) {
        let lang = if lang_k { LanguageId::LangK } else { LanguageId::LangC };
        let tree = parse(&render_unit(&fs, lang), lang, "r").unwrap();
        for def in defs(&tree) {
            let cfg = build_ecfg("R", def).unwrap();
            prop_assert!(cfg.warnings.is_empty(), "{:?}", cfg.warnings);
            cfg.validate().unwrap();
            let cc = cyclomatic_complexity(def).unwrap();
            prop_assert_eq!(cc_from_cfg(&cfg).unwrap(), cc);
            let paths = basis_paths(&cfg).unwrap();
            prop_assert_eq!(paths.len(), cc as usize);
            let rows = paths
                .iter()
                .map(|p| {
                    let mut row = vec![0.0; cfg.edges.len()];
                    for &e in &p.edges {
                        row[e] += 1.0;
                    }
                    row
                })
                .collect();
            prop_assert_eq!(incidence_rank(rows), cc as usize, "paths not independent");
        }
    }

    #[test]
    fn xml_and_token_stream_round_trip(fs in prop::collection::vec(function(), 0..3), lang_k in any::<bool>()) {
        let lang = if lang_k { LanguageId::LangK } else { LanguageId::LangC };
        let src = render_unit(&fs, lang);
        let tree = parse(&src, lang, "r").unwrap();
        let lexed: Vec<(String, u32, u32)> = tokenize(&src, lang, "r")
            .unwrap()
            .into_iter()
            .map(|t| (t.text, t.span.line, t.span.column))
            .collect();
        let leaves: Vec<(String, u32, u32)> = tree
            .tokens()
            .map(|t| (t.text().to_string(), t.span().line, t.span().column))
            .collect();
        prop_assert_eq!(leaves, lexed);
        let bytes = ecst_to_xml(&tree, lang);
        prop_assert_eq!(&bytes, &ecst_to_xml(&tree, lang));
        let loaded = xml_to_ecst(&bytes).unwrap();
        prop_assert_eq!(loaded.tree, tree);
    }
}

fn call_unit(unit: usize, bodies: &[Vec<String>]) -> String {
    let mut s = format!("MODULE U{unit};\n");
    for (i, calls) in bodies.iter().enumerate() {
        s.push_str(&format!("PROCEDURE u{unit}f{i}();\n"));
        for c in calls {
            s.push_str(&format!("  {c}();\n"));
        }
        s.push_str(&format!("END u{unit}f{i};\n"));
    }
    s.push_str(&format!("END U{unit}.\n"));
    s
}

fn call_forest() -> impl Strategy<Value = Vec<Vec<Vec<String>>>> {
    let callee = prop_oneof![
        (0usize..3, 0usize..3).prop_map(|(u, f)| format!("u{u}f{f}")),
        (0usize..3).prop_map(|e| format!("ext{e}")),
    ];
    prop::collection::vec(
        prop::collection::vec(prop::collection::vec(callee, 0..4), 1..4),
        1..4,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn call_graph_counts_and_order(units in call_forest(), seed in any::<u64>()) {
        let sources: Vec<String> = units.iter().enumerate().map(|(u, b)| call_unit(u, b)).collect();
        let trees: Vec<EcstNode> = sources
            .iter()
            .enumerate()
            .map(|(u, s)| parse(s, LanguageId::LangK, &format!("u{u}.mod")).unwrap())
            .collect();
        let forest: Vec<&EcstNode> = trees.iter().collect();
        let graph = build_call_graph(&forest).unwrap();

        let defined: BTreeSet<String> = units
            .iter()
            .enumerate()
            .flat_map(|(u, b)| (0..b.len()).map(move |f| format!("u{u}f{f}")))
            .collect();
        let externals: BTreeSet<&String> = units
            .iter()
            .flatten()
            .flatten()
            .filter(|c| !defined.contains(*c))
            .collect();
        let records = collect_functions(&forest).unwrap().len();
        prop_assert_eq!(graph.nodes.len(), records + externals.len());

        let calls: usize = units.iter().flatten().map(Vec::len).sum();
        prop_assert_eq!(graph.edges.len(), calls);
        for e in &graph.edges {
            let caller = graph.nodes[e.to].label();
            prop_assert!(!graph.nodes[e.to].is_external(), "caller {} is external", caller);
        }

        let mut shuffled = forest.clone();
        let n = shuffled.len();
        shuffled.rotate_left((seed as usize) % n);
        if seed % 2 == 1 {
            shuffled.reverse();
        }
        let again = build_call_graph(&shuffled).unwrap();
        prop_assert_eq!(again.labelled_edges(), graph.labelled_edges());
        prop_assert_eq!(
            again.nodes.iter().map(|n| n.label()).collect::<Vec<_>>(),
            graph.nodes.iter().map(|n| n.label()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn diff_is_antisymmetric(
        a in prop::collection::btree_map((0u8..3, 0u8..5), 1u32..6, 0..8),
        b in prop::collection::btree_map((0u8..3, 0u8..5), 1u32..6, 0..8),
    ) {
        let report = |m: &std::collections::BTreeMap<(u8, u8), u32>| MetricsReport {
            files: Vec::new(),
            functions: m
                .iter()
                .map(|(&(u, f), &cc)| FunctionMetrics {
                    path: format!("u{u}.mod"),
                    unit: format!("U{u}"),
                    function: format!("f{f}"),
                    cc,
                    statements: 0,
                })
                .collect(),
        };
        let (ra, rb) = (report(&a), report(&b));
        let fwd = diff_reports(&ra, &rb);
        let back = diff_reports(&rb, &ra);
        prop_assert_eq!(&fwd.added, &back.removed);
        prop_assert_eq!(&fwd.removed, &back.added);
        let mut reversed: Vec<_> = back.changed.iter().map(|c| (c.key.clone(), c.after, c.before)).collect();
        reversed.sort();
        let mut forward: Vec<_> = fwd.changed.iter().map(|c| (c.key.clone(), c.before, c.after)).collect();
        forward.sort();
        prop_assert_eq!(forward, reversed);

        let added: BTreeSet<_> = fwd.added.iter().collect();
        let removed: BTreeSet<_> = fwd.removed.iter().collect();
        let changed: BTreeSet<_> = fwd.changed.iter().map(|c| &c.key).collect();
        prop_assert!(added.is_disjoint(&removed) && added.is_disjoint(&changed) && removed.is_disjoint(&changed));
        prop_assert!(diff_reports(&ra, &ra).is_empty());
    }
}
