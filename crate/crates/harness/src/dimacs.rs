//! DIMACS CNF reader.

use stratpol::generators::CnfFormula;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DimacsError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing `p cnf` header")]
    NoHeader,
    #[error("header declares {declared} clauses, found {found}")]
    ClauseCount { declared: usize, found: usize },
    #[error("{0}")]
    Formula(String),
}

fn syntax(line: usize, message: impl Into<String>) -> DimacsError {
    DimacsError::Syntax {
        line,
        message: message.into(),
    }
}

/// Parses DIMACS text. Clauses end at `0` and may span lines; `c` lines are
/// comments and a lone `%` ends the input, as in the SATLIB benchmarks.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, DimacsError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<i32> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line == "%" {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(syntax(line_no, "duplicate header"));
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
                return Err(syntax(line_no, "expected `p cnf <vars> <clauses>`"));
            }
            let vars = fields[2].parse().map_err(|_| syntax(line_no, "bad variable count"))?;
            let count = fields[3].parse().map_err(|_| syntax(line_no, "bad clause count"))?;
            header = Some((vars, count));
            continue;
        }
        let Some((vars, _)) = header else {
            return Err(syntax(line_no, "clause before header"));
        };
        for tok in line.split_whitespace() {
            let lit: i32 = tok
                .parse()
                .map_err(|_| syntax(line_no, format!("bad literal `{tok}`")))?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else if lit.unsigned_abs() as usize > vars {
                return Err(syntax(line_no, format!("literal {lit} exceeds {vars} variables")));
            } else {
                current.push(lit);
            }
        }
    }

    let (vars, declared) = header.ok_or(DimacsError::NoHeader)?;
    // Tolerate a missing terminator on the last clause.
    if !current.is_empty() {
        clauses.push(current);
    }
    if clauses.len() != declared {
        return Err(DimacsError::ClauseCount {
            declared,
            found: clauses.len(),
        });
    }
    CnfFormula::new(vars, clauses).map_err(|e| DimacsError::Formula(e.to_string()))
}

/// Renders an assignment as a DIMACS solution line, `v 1 -2 3 0`.
pub fn format_assignment(assignment: &[bool]) -> String {
    let mut out = String::from("v");
    for (i, &val) in assignment.iter().enumerate() {
        let lit = i as i64 + 1;
        out.push_str(&format!(" {}", if val { lit } else { -lit }));
    }
    out.push_str(" 0");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_multiline_clauses() {
        let f = parse_dimacs("c tiny\np cnf 3 2\n1 -2\n 3 0 -1 0\n").unwrap();
        assert_eq!(f.num_vars, 3);
        assert_eq!(f.clauses, vec![vec![1, -2, 3], vec![-1]]);
    }

    #[test]
    fn stops_at_percent() {
        let f = parse_dimacs("p cnf 1 1\n1 0\n%\n0\n").unwrap();
        assert_eq!(f.clauses, vec![vec![1]]);
    }

    #[test]
    fn unterminated_last_clause() {
        let f = parse_dimacs("p cnf 2 1\n1 2").unwrap();
        assert_eq!(f.clauses, vec![vec![1, 2]]);
    }

    #[test]
    fn errors() {
        assert_eq!(parse_dimacs("1 0\n"), Err(syntax(1, "clause before header")));
        assert_eq!(parse_dimacs("c only\n"), Err(DimacsError::NoHeader));
        assert!(matches!(
            parse_dimacs("p cnf 2 2\n1 0\n"),
            Err(DimacsError::ClauseCount { declared: 2, found: 1 })
        ));
        assert!(matches!(parse_dimacs("p cnf 2 1\n3 0\n"), Err(DimacsError::Syntax { line: 2, .. })));
        assert!(matches!(parse_dimacs("p cnf 2 1\nx 0\n"), Err(DimacsError::Syntax { .. })));
        assert!(matches!(parse_dimacs("p cnf 2 1\n0\n"), Err(DimacsError::Formula(_))));
    }

    #[test]
    fn assignment_line() {
        assert_eq!(format_assignment(&[true, false, true]), "v 1 -2 3 0");
    }
}
