use crate::formula::{Formula, Node, NOT_PRECEDENCE};

/// Printing style for [`print_formula`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    /// Every binary node parenthesized.
    Canonical,
    /// Parentheses only where precedence or associativity require them.
    Pretty,
}

pub fn print_formula(f: &Formula, style: Style) -> String {
    match style {
        Style::Canonical => canonical(f),
        Style::Pretty => pretty(f),
    }
}

pub(crate) fn canonical(f: &Formula) -> String {
    let mut out = String::new();
    write_canonical(f, &mut out);
    out
}

fn write_canonical(f: &Formula, out: &mut String) {
    match f.node() {
        Node::Atom(name) => out.push_str(name),
        Node::Top => out.push('T'),
        Node::Bot => out.push('F'),
        Node::Not(inner) => {
            out.push('~');
            write_canonical(inner, out);
        }
        Node::Binary(op, l, r) => {
            out.push('(');
            write_canonical(l, out);
            out.push(' ');
            out.push_str(op.token());
            out.push(' ');
            write_canonical(r, out);
            out.push(')');
        }
    }
}

pub(crate) fn pretty(f: &Formula) -> String {
    let mut out = String::new();
    write_pretty(f, 0, &mut out);
    out
}

fn precedence(f: &Formula) -> u8 {
    match f.node() {
        Node::Binary(op, _, _) => op.precedence(),
        _ => u8::MAX,
    }
}

/// Writes `f`, parenthesizing it when its own precedence is below `min`.
fn write_pretty(f: &Formula, min: u8, out: &mut String) {
    let wrap = precedence(f) < min;
    if wrap {
        out.push('(');
    }
    match f.node() {
        Node::Atom(name) => out.push_str(name),
        Node::Top => out.push('T'),
        Node::Bot => out.push('F'),
        Node::Not(inner) => {
            out.push('~');
            write_pretty(inner, NOT_PRECEDENCE, out);
        }
        Node::Binary(op, l, r) => {
            let p = op.precedence();
            let (left_min, right_min) = if op.is_right_assoc() {
                (p + 1, p)
            } else {
                (p, p + 1)
            };
            write_pretty(l, left_min, out);
            out.push(' ');
            out.push_str(op.token());
            out.push(' ');
            write_pretty(r, right_min, out);
        }
    }
    if wrap {
        out.push(')');
    }
}

/// Pretty form using logic symbols (¬ ∧ ∨ → ↔ ⊤ ⊥) and a caller-supplied
/// atom renaming, e.g. `a -> b` as `α → β`.
pub fn symbolic(f: &Formula, rename: &dyn Fn(&str) -> String) -> String {
    let mut out = String::new();
    write_symbolic(f, 0, rename, &mut out);
    out
}

fn write_symbolic(f: &Formula, min: u8, rename: &dyn Fn(&str) -> String, out: &mut String) {
    let wrap = precedence(f) < min;
    if wrap {
        out.push('(');
    }
    match f.node() {
        Node::Atom(name) => out.push_str(&rename(name)),
        Node::Top => out.push('⊤'),
        Node::Bot => out.push('⊥'),
        Node::Not(inner) => {
            out.push('¬');
            write_symbolic(inner, NOT_PRECEDENCE, rename, out);
        }
        Node::Binary(op, l, r) => {
            let p = op.precedence();
            let (left_min, right_min) = if op.is_right_assoc() {
                (p + 1, p)
            } else {
                (p, p + 1)
            };
            write_symbolic(l, left_min, rename, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_symbolic(r, right_min, rename, out);
        }
    }
    if wrap {
        out.push(')');
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse_formula;

    #[test]
    fn canonical_and_pretty_examples() {
        let mp = Formula::and(
            Formula::implies(Formula::atom("a"), Formula::atom("b")),
            Formula::atom("a"),
        );
        assert_eq!(print_formula(&mp, Style::Canonical), "((a -> b) & a)");
        assert_eq!(print_formula(&mp, Style::Pretty), "(a -> b) & a");
    }

    #[test]
    fn pretty_respects_associativity() {
        for s in [
            "a -> b -> c",
            "(a -> b) -> c",
            "a & b & c",
            "a & (b & c)",
            "a <-> b <-> c",
            "(a <-> b) <-> c",
        ] {
            let f = parse_formula(s).unwrap();
            assert_eq!(f.pretty(), s);
        }
        assert_eq!(
            parse_formula("~(a & b) | ~~c").unwrap().pretty(),
            "~(a & b) | ~~c"
        );
        assert_eq!(parse_formula("((a))").unwrap().pretty(), "a");
    }

    #[test]
    fn symbolic_rendering() {
        let f = parse_formula("(a -> b) & ~a | T").unwrap();
        let greek = |n: &str| {
            if n == "a" {
                "α".to_string()
            } else {
                "β".to_string()
            }
        };
        assert_eq!(symbolic(&f, &greek), "(α → β) ∧ ¬α ∨ ⊤");
    }
}
