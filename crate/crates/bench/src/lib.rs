//! Synthetic inputs for the benchmarks.

use std::fmt::Write as _;

use ecst_core::{LanguageId, ParsedFile};

/// Units alternate between the two languages; each function holds a loop,
/// an IF/ELSIF/ELSE chain, a post-tested loop and a call.
pub fn synthetic_sources(min_lines: usize) -> Vec<(String, String, LanguageId)> {
    let mut out = Vec::new();
    let mut lines = 0;
    while lines < min_lines {
        let unit = out.len();
        let lang = if unit % 2 == 0 {
            LanguageId::LangK
        } else {
            LanguageId::LangC
        };
        let src = unit_source(unit, 10, lang);
        lines += src.lines().count();
        out.push((format!("gen{unit}.{}", lang.extension()), src, lang));
    }
    out
}

pub fn parse_all(sources: &[(String, String, LanguageId)]) -> Vec<ParsedFile> {
    sources
        .iter()
        .map(|(path, src, lang)| ParsedFile::parse(path.as_str(), src.as_str(), *lang).unwrap())
        .collect()
}

fn unit_source(unit: usize, functions: usize, lang: LanguageId) -> String {
    let mut s = String::new();
    if lang == LanguageId::LangK {
        let _ = writeln!(s, "MODULE U{unit};");
        for f in 0..functions {
            let _ = write!(
                s,
                "PROCEDURE p{f}(a, b);\n  WHILE a > b DO\n    IF a = 1 THEN\n      p{}(a, b);\n    \
                 ELSIF a = 2 OR b = 0 THEN\n      a := a - 1;\n    ELSE\n      b := b + 1;\n    END;\n  \
                 END;\n  REPEAT\n    a := a - 1;\n  UNTIL a < 0;\n  RETURN a * b;\nEND p{f};\n",
                (f + 1) % functions
            );
        }
        let _ = writeln!(s, "END U{unit}.");
    } else {
        let _ = writeln!(s, "class U{unit} {{");
        for f in 0..functions {
            let _ = write!(
                s,
                "  int p{f}(int a, int b) {{\n    while (a > b) {{\n      if (a == 1) {{\n        \
                 p{}(a, b);\n      }} else if (a == 2 || b == 0) {{\n        a = a - 1;\n      }} else {{\n        \
                 b = b + 1;\n      }}\n    }}\n    do {{\n      a = a - 1;\n    }} while (a >= 0);\n    \
                 return a * b;\n  }}\n",
                (f + 1) % functions
            );
        }
        let _ = writeln!(s, "}}");
    }
    s
}
