//! DIMACS CNF reading and writing.

use std::io::{self, Write};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {0}: malformed problem line")]
    BadHeader(usize),
    #[error("line {0}: bad literal {1:?}")]
    BadLiteral(usize, String),
    #[error("clause before problem line at line {0}")]
    MissingHeader(usize),
    #[error("literal {lit} exceeds declared variable count {vars}")]
    VarOutOfRange { lit: i32, vars: u32 },
    #[error("declared {declared} clauses, found {found}")]
    ClauseCount { declared: usize, found: usize },
    #[error("unterminated final clause")]
    Unterminated,
}

/// A parsed DIMACS file; comment lines are kept verbatim without the
/// leading `c `.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DimacsFile {
    pub num_vars: u32,
    pub clauses: Vec<Vec<i32>>,
    pub comments: Vec<String>,
}

pub fn write_dimacs<W: Write>(
    mut w: W,
    num_vars: u32,
    clauses: &[Vec<i32>],
    comments: &[String],
) -> io::Result<()> {
    for c in comments {
        writeln!(w, "c {c}")?;
    }
    writeln!(w, "p cnf {} {}", num_vars, clauses.len())?;
    for cl in clauses {
        for l in cl {
            write!(w, "{l} ")?;
        }
        writeln!(w, "0")?;
    }
    Ok(())
}

pub fn parse_dimacs(text: &str) -> Result<DimacsFile, DimacsError> {
    let mut out = DimacsFile::default();
    let mut declared: Option<usize> = None;
    let mut current = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('c') {
            if rest.is_empty() || rest.starts_with(char::is_whitespace) {
                out.comments.push(rest.trim_start().to_string());
                continue;
            }
        }
        if line.starts_with('p') {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 4 || toks[1] != "cnf" || declared.is_some() {
                return Err(DimacsError::BadHeader(lineno));
            }
            out.num_vars = toks[2]
                .parse()
                .map_err(|_| DimacsError::BadHeader(lineno))?;
            declared = Some(
                toks[3]
                    .parse()
                    .map_err(|_| DimacsError::BadHeader(lineno))?,
            );
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if declared.is_none() {
            return Err(DimacsError::MissingHeader(lineno));
        }
        for tok in line.split_whitespace() {
            let l: i32 = tok
                .parse()
                .map_err(|_| DimacsError::BadLiteral(lineno, tok.to_string()))?;
            if l == 0 {
                out.clauses.push(std::mem::take(&mut current));
            } else {
                if l.unsigned_abs() > out.num_vars {
                    return Err(DimacsError::VarOutOfRange {
                        lit: l,
                        vars: out.num_vars,
                    });
                }
                current.push(l);
            }
        }
    }
    if !current.is_empty() {
        return Err(DimacsError::Unterminated);
    }
    let declared = declared.unwrap_or(0);
    if declared != out.clauses.len() {
        return Err(DimacsError::ClauseCount {
            declared,
            found: out.clauses.len(),
        });
    }
    Ok(out)
}
