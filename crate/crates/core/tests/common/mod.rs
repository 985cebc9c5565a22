#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ecst_core::{detect_language, LanguageId, ParsedFile};

pub fn tests_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests")
}

pub fn fixture(rel: &str) -> PathBuf {
    tests_dir().join("fixtures").join(rel)
}

pub fn load(path: &Path) -> ParsedFile {
    let lang = detect_language(path).unwrap();
    let source = std::fs::read_to_string(path).unwrap();
    let name = path.file_name().unwrap().to_string_lossy();
    ParsedFile::parse(name, source, lang).unwrap_or_else(|e| panic!("{e}"))
}

/// One program written once per language.
pub struct Pair {
    pub stem: String,
    pub k: ParsedFile,
    pub c: ParsedFile,
}

pub fn corpus_paths() -> Vec<PathBuf> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(tests_dir().join("corpus"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| detect_language(p).is_ok())
        .collect();
    paths.sort();
    paths
}

pub fn corpus() -> Vec<Pair> {
    let paths = corpus_paths();
    let mut pairs = Vec::new();
    for k_path in paths.iter().filter(|p| p.extension().unwrap() == "mod") {
        let c_path = k_path.with_extension("cls");
        assert!(
            paths.contains(&c_path),
            "{} has no partner",
            k_path.display()
        );
        pairs.push(Pair {
            stem: k_path.file_stem().unwrap().to_string_lossy().into_owned(),
            k: load(k_path),
            c: load(&c_path),
        });
    }
    assert_eq!(pairs.len() * 2, paths.len(), "unpaired corpus files");
    pairs
}

/// Deterministic synthetic sources, about `lines` lines in total.
pub fn synthetic_corpus(lines: usize) -> Vec<(String, String, LanguageId)> {
    let mut files = Vec::new();
    let mut written = 0;
    let mut unit = 0;
    while written < lines {
        let lang = if unit % 2 == 0 {
            LanguageId::LangK
        } else {
            LanguageId::LangC
        };
        let src = synthetic_unit(unit, 8, lang);
        written += src.lines().count();
        files.push((format!("gen{unit}.{}", lang.extension()), src, lang));
        unit += 1;
    }
    files
}

fn synthetic_unit(unit: usize, functions: usize, lang: LanguageId) -> String {
    let mut s = String::new();
    match lang {
        LanguageId::LangK => {
            let _ = writeln!(s, "MODULE G{unit};");
            for f in 0..functions {
                let _ = write!(
                    s,
                    "(* generated *)\nPROCEDURE f{f}(a, b);\n  WHILE a > b DO\n    IF a = 1 THEN\n      \
                     g(a);\n    ELSIF a = 2 AND b # 0 THEN\n      a := a - 1;\n    ELSE\n      \
                     b := b + 1;\n    END;\n  END;\n  REPEAT\n    a := a - 1;\n  UNTIL a < 0;\n  \
                     RETURN a * b;\nEND f{f};\n\n"
                );
            }
            let _ = writeln!(s, "END G{unit}.");
        }
        LanguageId::LangC => {
            let _ = writeln!(s, "class G{unit} {{");
            for f in 0..functions {
                let _ = write!(
                    s,
                    "  // generated\n  int f{f}(int a, int b) {{\n    while (a > b) {{\n      if (a == 1) {{\n        \
                     g(a);\n      }} else if (a == 2 && b != 0) {{\n        a = a - 1;\n      }} else {{\n        \
                     b = b + 1;\n      }}\n    }}\n    do {{\n      a = a - 1;\n    }} while (a >= 0);\n    \
                     return a * b;\n  }}\n\n"
                );
            }
            let _ = writeln!(s, "}}");
        }
    }
    s
}
