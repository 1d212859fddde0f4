//! Reference implementations used to cross-check the library. They share
//! nothing with it beyond the formula type.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use logaug_core::{Connective, Formula, Node, RewriteRule, RuleBase, RuleKind};

pub fn eval(f: &Formula, env: &HashMap<String, bool>) -> bool {
    match f.node() {
        Node::Atom(a) => env[&**a],
        Node::Top => true,
        Node::Bot => false,
        Node::Not(x) => !eval(x, env),
        Node::Binary(op, l, r) => {
            let (l, r) = (eval(l, env), eval(r, env));
            match op {
                Connective::And => l && r,
                Connective::Or => l || r,
                Connective::Implies => !l || r,
                Connective::Iff => l == r,
            }
        }
    }
}

fn atoms(f: &Formula, out: &mut BTreeSet<String>) {
    match f.node() {
        Node::Atom(a) => {
            out.insert(a.to_string());
        }
        Node::Top | Node::Bot => {}
        Node::Not(x) => atoms(x, out),
        Node::Binary(_, l, r) => {
            atoms(l, out);
            atoms(r, out);
        }
    }
}

fn assignments(fs: &[&Formula]) -> impl Iterator<Item = HashMap<String, bool>> {
    let mut names = BTreeSet::new();
    for f in fs {
        atoms(f, &mut names);
    }
    let names: Vec<String> = names.into_iter().collect();
    assert!(names.len() <= 16, "reference oracle is exponential");
    (0u32..1 << names.len()).map(move |bits| {
        names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), bits >> i & 1 == 1))
            .collect()
    })
}

pub fn entails(a: &Formula, b: &Formula) -> bool {
    assignments(&[a, b]).all(|env| !eval(a, &env) || eval(b, &env))
}

pub fn equivalent(a: &Formula, b: &Formula) -> bool {
    assignments(&[a, b]).all(|env| eval(a, &env) == eval(b, &env))
}

pub fn size(f: &Formula) -> usize {
    match f.node() {
        Node::Atom(_) | Node::Top | Node::Bot => 1,
        Node::Not(x) => 1 + size(x),
        Node::Binary(_, l, r) => 1 + size(l) + size(r),
    }
}

fn is_meta(name: &str) -> bool {
    name.len() == 1 && name.as_bytes()[0].is_ascii_uppercase()
}

/// Matches pattern `p` against `f`, extending `env`.
fn matches(p: &Formula, f: &Formula, env: &mut BTreeMap<String, Formula>) -> bool {
    match (p.node(), f.node()) {
        (Node::Atom(v), _) if is_meta(v) => match env.get(&**v) {
            Some(bound) => bound == f,
            None => {
                env.insert(v.to_string(), f.clone());
                true
            }
        },
        (Node::Atom(x), Node::Atom(y)) => x == y,
        (Node::Top, Node::Top) | (Node::Bot, Node::Bot) => true,
        (Node::Not(p), Node::Not(f)) => matches(p, f, env),
        (Node::Binary(o1, pl, pr), Node::Binary(o2, fl, fr)) => {
            o1 == o2 && matches(pl, fl, env) && matches(pr, fr, env)
        }
        _ => false,
    }
}

fn subst(p: &Formula, env: &BTreeMap<String, Formula>) -> Option<Formula> {
    Some(match p.node() {
        Node::Atom(v) if is_meta(v) => env.get(&**v)?.clone(),
        Node::Atom(_) | Node::Top | Node::Bot => p.clone(),
        Node::Not(x) => Formula::not(subst(x, env)?),
        Node::Binary(op, l, r) => Formula::binary(*op, subst(l, env)?, subst(r, env)?),
    })
}

fn rewrite_here(from: &Formula, to: &Formula, f: &Formula) -> Option<Formula> {
    let mut env = BTreeMap::new();
    if matches(from, f, &mut env) {
        subst(to, &env)
    } else {
        None
    }
}

/// Every formula one step away from `f`, with the label of the rule used.
/// Implications fire at the root only; equivalences anywhere, both ways.
pub fn successors(f: &Formula, rules: &[&RewriteRule], node_cap: usize) -> Vec<(Formula, u8)> {
    let mut out = Vec::new();
    for rule in rules {
        let (l, r) = (rule.lhs.formula(), rule.rhs.formula());
        match rule.kind {
            RuleKind::Implication => {
                out.extend(rewrite_here(l, r, f).map(|g| (g, rule.label)));
            }
            RuleKind::Equivalence => {
                for g in everywhere(f, &|s| {
                    [rewrite_here(l, r, s), rewrite_here(r, l, s)]
                        .into_iter()
                        .flatten()
                        .collect()
                }) {
                    out.push((g, rule.label));
                }
            }
        }
    }
    out.retain(|(g, _)| size(g) <= node_cap);
    out
}

fn everywhere(f: &Formula, step: &dyn Fn(&Formula) -> Vec<Formula>) -> Vec<Formula> {
    let mut out = step(f);
    match f.node() {
        Node::Atom(_) | Node::Top | Node::Bot => {}
        Node::Not(x) => out.extend(everywhere(x, step).into_iter().map(Formula::not)),
        Node::Binary(op, l, r) => {
            out.extend(
                everywhere(l, step)
                    .into_iter()
                    .map(|g| Formula::binary(*op, g, r.clone())),
            );
            out.extend(
                everywhere(r, step)
                    .into_iter()
                    .map(|g| Formula::binary(*op, l.clone(), g)),
            );
        }
    }
    out
}

/// Breadth-first closure: every formula reachable from `start` in 1 to
/// `depth` steps using the enabled rules, with `only_sound` restricting to
/// label-1 rules. The start itself is excluded.
pub fn closure(
    start: &Formula,
    rb: &RuleBase,
    depth: usize,
    only_sound: bool,
    node_cap: usize,
) -> HashSet<Formula> {
    let rules: Vec<&RewriteRule> = rb
        .enabled()
        .map(|(_, r)| r)
        .filter(|r| !only_sound || r.label == 1)
        .collect();
    let mut seen: HashSet<Formula> = HashSet::from([start.clone()]);
    let mut frontier = vec![start.clone()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for f in &frontier {
            for (g, _) in successors(f, &rules, node_cap) {
                if seen.insert(g.clone()) {
                    next.push(g);
                }
            }
        }
        frontier = next;
    }
    seen.remove(start);
    seen
}

/// Random formula over atoms `a`.. with at most `vars` atoms and the given
/// depth, driven by `next(n)` returning a value below `n`.
pub fn random_formula(next: &mut dyn FnMut(u32) -> u32, depth: u32, vars: u32) -> Formula {
    let leaf = |next: &mut dyn FnMut(u32) -> u32| {
        let k = next(vars + 1);
        if k == vars {
            if next(2) == 0 {
                Formula::top()
            } else {
                Formula::bot()
            }
        } else {
            Formula::atom(((b'a' + k as u8) as char).to_string())
        }
    };
    if depth == 0 || next(4) == 0 {
        return leaf(next);
    }
    match next(5) {
        0 => Formula::not(random_formula(next, depth - 1, vars)),
        k => {
            let op = [
                Connective::And,
                Connective::Or,
                Connective::Implies,
                Connective::Iff,
            ][k as usize - 1];
            Formula::binary(
                op,
                random_formula(next, depth - 1, vars),
                random_formula(next, depth - 1, vars),
            )
        }
    }
}
