//! DIMACS CNF reading and writing, with the `x` extension lines for
//! parity constraints (`x 1 -2 3 0` constrains x1 xor !x2 xor x3 to be
//! true). Extension lines count toward the header's clause total.

use thiserror::Error;

use super::cnf::{Cnf, Literal, VarId, XorConstraint};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {line}, column {col}: {msg}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("header declares {declared} clauses but {found} were found")]
    HeaderMismatch { declared: usize, found: usize },
    #[error("clause {index} is tautological (contains a variable and its negation)")]
    Tautology { index: usize },
}

/// What to do with a clause containing both `x` and `!x`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum TautologyPolicy {
    /// Drop the clause (it is always satisfied).
    #[default]
    Strip,
    /// Fail with [`DimacsError::Tautology`].
    Reject,
}

/// A parsed DIMACS file: plain clauses plus any parity extension lines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimacsDocument {
    pub cnf: Cnf,
    pub xors: Vec<XorConstraint>,
}

pub fn parse_dimacs(text: &str, policy: TautologyPolicy) -> Result<Cnf, DimacsError> {
    let doc = parse_dimacs_full(text, policy)?;
    Ok(doc.cnf)
}

pub fn parse_dimacs_full(
    text: &str,
    policy: TautologyPolicy,
) -> Result<DimacsDocument, DimacsError> {
    let err = |line: usize, col: usize, msg: String| DimacsError::Parse { line, col, msg };

    let mut declared: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<Literal>> = Vec::new();
    let mut xors: Vec<XorConstraint> = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut current_is_xor = false;
    let mut tautological = 0usize;
    let mut max_var = 0u32;

    for (line_idx, raw) in text.lines().enumerate() {
        let line_no = line_idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('p') {
            if declared.is_some() {
                return Err(err(line_no, 1, "duplicate `p` header".into()));
            }
            let mut parts = rest.split_whitespace();
            match (parts.next(), parts.next(), parts.next(), parts.next()) {
                (Some("cnf"), Some(n), Some(m), None) => {
                    let n: usize = n
                        .parse()
                        .map_err(|_| err(line_no, 1, format!("bad variable count `{n}`")))?;
                    let m: usize = m
                        .parse()
                        .map_err(|_| err(line_no, 1, format!("bad clause count `{m}`")))?;
                    declared = Some((n, m));
                }
                _ => return Err(err(line_no, 1, format!("bad header `{line}`"))),
            }
            continue;
        }
        if declared.is_none() {
            return Err(err(line_no, 1, "clause before `p cnf` header".into()));
        }

        let mut tokens = line.split_whitespace().peekable();
        if !current_is_xor && current.is_empty() && tokens.peek() == Some(&"x") {
            current_is_xor = true;
            tokens.next();
        }
        for (col, tok) in tokens.enumerate() {
            let val: i64 = tok
                .parse()
                .map_err(|_| err(line_no, col + 1, format!("bad literal `{tok}`")))?;
            if val == 0 {
                if current_is_xor {
                    xors.push(XorConstraint::from_literals(&current));
                } else {
                    let clause = std::mem::take(&mut current);
                    let is_taut = {
                        let pos: std::collections::BTreeSet<_> = clause
                            .iter()
                            .filter(|l| l.positive)
                            .map(|l| l.var)
                            .collect();
                        clause.iter().any(|l| !l.positive && pos.contains(&l.var))
                    };
                    if is_taut {
                        match policy {
                            TautologyPolicy::Reject => {
                                return Err(DimacsError::Tautology {
                                    index: clauses.len() + tautological,
                                })
                            }
                            TautologyPolicy::Strip => tautological += 1,
                        }
                    } else {
                        clauses.push(clause);
                    }
                }
                current = Vec::new();
                current_is_xor = false;
                continue;
            }
            let var = val.unsigned_abs() as u32 - 1;
            max_var = max_var.max(var + 1);
            current.push(Literal {
                var: VarId(var),
                positive: val > 0,
            });
        }
    }

    if !current.is_empty() {
        return Err(err(text.lines().count(), 1, "unterminated clause".into()));
    }

    let (n, m) = declared.ok_or_else(|| err(1, 1, "missing `p cnf` header".into()))?;
    let found = clauses.len() + xors.len() + tautological;
    if found != m {
        return Err(DimacsError::HeaderMismatch {
            declared: m,
            found,
        });
    }
    if (max_var as usize) > n {
        return Err(err(
            1,
            1,
            format!("literal references variable {max_var} beyond declared {n}"),
        ));
    }

    Ok(DimacsDocument {
        cnf: Cnf::new(n, clauses),
        xors,
    })
}

pub fn emit_dimacs(cnf: &Cnf) -> String {
    let mut out = format!("p cnf {} {}\n", cnf.variable_count, cnf.clauses.len());
    for clause in &cnf.clauses {
        for lit in clause {
            let v = lit.var.0 as i64 + 1;
            out.push_str(&format!("{} ", if lit.positive { v } else { -v }));
        }
        out.push_str("0\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_clause() {
        let cnf = parse_dimacs("p cnf 2 1\n1 -2 0\n", TautologyPolicy::Strip).unwrap();
        assert_eq!(cnf.variable_count, 2);
        assert_eq!(
            cnf.clauses,
            vec![vec![Literal::pos(VarId(0)), Literal::neg(VarId(1))]]
        );
    }

    #[test]
    fn two_unit_clauses() {
        let cnf = parse_dimacs("p cnf 1 2\n1 0\n-1 0\n", TautologyPolicy::Strip).unwrap();
        assert_eq!(cnf.clauses.len(), 2);
    }

    #[test]
    fn header_mismatch() {
        let err = parse_dimacs("p cnf 1 2\n1 0\n", TautologyPolicy::Strip).unwrap_err();
        assert_eq!(
            err,
            DimacsError::HeaderMismatch {
                declared: 2,
                found: 1
            }
        );
    }

    #[test]
    fn clause_spanning_lines_and_comments() {
        let cnf = parse_dimacs(
            "c comment\np cnf 3 1\n1 2\n3 0\n",
            TautologyPolicy::Strip,
        )
        .unwrap();
        assert_eq!(cnf.clauses[0].len(), 3);
    }

    #[test]
    fn tautology_policy() {
        let text = "p cnf 1 1\n1 -1 0\n";
        let cnf = parse_dimacs(text, TautologyPolicy::Strip).unwrap();
        assert!(cnf.clauses.is_empty());
        assert!(matches!(
            parse_dimacs(text, TautologyPolicy::Reject),
            Err(DimacsError::Tautology { index: 0 })
        ));
    }

    #[test]
    fn xor_extension_lines() {
        let doc = parse_dimacs_full("p cnf 3 2\n1 2 0\nx 1 -2 3 0\n", TautologyPolicy::Strip)
            .unwrap();
        assert_eq!(doc.cnf.clauses.len(), 1);
        assert_eq!(doc.xors.len(), 1);
        assert_eq!(doc.xors[0].vars, vec![VarId(0), VarId(1), VarId(2)]);
        assert!(!doc.xors[0].rhs, "one negation flips the parity");
    }

    #[test]
    fn emit_then_parse() {
        let cnf = crate::fixtures::eq4_canonical_cnf();
        let text = emit_dimacs(&cnf);
        let again = parse_dimacs(&text, TautologyPolicy::Reject).unwrap();
        assert_eq!(again.clauses, cnf.clauses);
        assert_eq!(again.variable_count, cnf.variable_count);
    }
}
