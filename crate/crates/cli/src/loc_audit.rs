//! Counts the API statements in each bundled application's `compose` body.
//!
//! A statement is a `;` outside comments and literals; a trailing expression
//! without `;` counts as one more. Blank lines, comments and `use` lines
//! outside the body are not counted.

use crate::apps::App;

pub const BUDGET: usize = 40;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditLine {
    pub app: &'static str,
    pub statements: usize,
}

impl AuditLine {
    pub fn passes(&self) -> bool {
        self.statements <= BUDGET
    }
}

pub fn loc_audit() -> Vec<AuditLine> {
    App::ALL
        .iter()
        .map(|app| AuditLine {
            app: app.name(),
            statements: audit_source(app.source()).unwrap_or(usize::MAX),
        })
        .collect()
}

/// Statement count of the first `fn compose` body in `src`.
pub fn audit_source(src: &str) -> Option<usize> {
    let code = strip(src);
    let at = code.find("fn compose")?;
    let open = at + code[at..].find('{')?;
    let mut depth = 0usize;
    for (i, ch) in code[open..].char_indices() {
        match ch {
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(count_statements(&code[open + 1..open + i]));
                }
            }
            _ => {}
        }
    }
    None
}

/// Statements in a block body that has already been stripped.
pub fn count_statements(body: &str) -> usize {
    let semis = body.matches(';').count();
    let tail = body.rsplit(';').next().unwrap_or("");
    semis + usize::from(!tail.trim().is_empty())
}

/// Blanks out comments, string literals and char literals, keeping length.
pub fn strip(src: &str) -> String {
    let chars: Vec<char> = src.chars().collect();
    let mut out = String::with_capacity(src.len());
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        if c == '/' && next == Some('/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if c == '/' && next == Some('*') {
            let mut depth = 0;
            while i < chars.len() {
                if chars[i] == '/' && chars.get(i + 1) == Some(&'*') {
                    depth += 1;
                    i += 2;
                } else if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    depth -= 1;
                    i += 2;
                    if depth == 0 {
                        break;
                    }
                } else {
                    i += 1;
                }
            }
            out.push(' ');
        } else if c == '"' {
            i += 1;
            while i < chars.len() && chars[i] != '"' {
                i += if chars[i] == '\\' { 2 } else { 1 };
            }
            i += 1;
            out.push_str("\"\"");
        } else if c == '\'' && chars.get(i + 2) == Some(&'\'') {
            i += 3;
            out.push_str("' '");
        } else if c == '\'' && next == Some('\\') {
            i += 2;
            while i < chars.len() && chars[i] != '\'' {
                i += 1;
            }
            i += 1;
            out.push_str("' '");
        } else {
            out.push(c);
            i += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_only_counts_zero() {
        assert_eq!(count_statements(&strip("// a; b;\n/* c; */\n")), 0);
    }

    #[test]
    fn literals_and_tail_expression() {
        let src = "fn compose() { let a = \";;\"; let b = ';'; f(a, b) }";
        assert_eq!(audit_source(src), Some(3));
    }
}
