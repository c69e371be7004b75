use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Least or greatest fixed point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FixKind {
    Mu,
    Nu,
}

impl FixKind {
    pub fn keyword(self) -> &'static str {
        match self {
            FixKind::Mu => "mu",
            FixKind::Nu => "nu",
        }
    }

    /// μ binders carry odd priorities, ν binders even ones.
    pub fn matches_priority(self, priority: u32) -> bool {
        match self {
            FixKind::Mu => !priority.is_multiple_of(2),
            FixKind::Nu => priority.is_multiple_of(2),
        }
    }

    pub fn for_priority(priority: u32) -> FixKind {
        if priority.is_multiple_of(2) {
            FixKind::Nu
        } else {
            FixKind::Mu
        }
    }
}

/// A μ-term. Cheap to clone; subterms are shared.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MuTerm(Arc<TermNode>);

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TermNode {
    Var(String),
    /// `Prod([])` is the terminal object.
    Prod(Vec<MuTerm>),
    /// `Coprod([])` is the initial object.
    Coprod(Vec<MuTerm>),
    Fix(FixKind, String, MuTerm),
}

impl MuTerm {
    pub fn var(name: impl Into<String>) -> Self {
        MuTerm(Arc::new(TermNode::Var(name.into())))
    }

    pub fn prod(children: Vec<MuTerm>) -> Self {
        MuTerm(Arc::new(TermNode::Prod(children)))
    }

    pub fn coprod(children: Vec<MuTerm>) -> Self {
        MuTerm(Arc::new(TermNode::Coprod(children)))
    }

    pub fn one() -> Self {
        Self::prod(Vec::new())
    }

    pub fn zero() -> Self {
        Self::coprod(Vec::new())
    }

    pub fn fix(kind: FixKind, var: impl Into<String>, body: MuTerm) -> Self {
        MuTerm(Arc::new(TermNode::Fix(kind, var.into(), body)))
    }

    pub fn mu(var: impl Into<String>, body: MuTerm) -> Self {
        Self::fix(FixKind::Mu, var, body)
    }

    pub fn nu(var: impl Into<String>, body: MuTerm) -> Self {
        Self::fix(FixKind::Nu, var, body)
    }

    pub fn node(&self) -> &TermNode {
        &self.0
    }

    pub fn ptr_eq(&self, other: &MuTerm) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub(crate) fn ptr_id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    /// Number of syntax nodes, counting every occurrence of a shared subterm.
    pub fn size(&self) -> usize {
        self.fold_dag(&mut HashMap::new(), &|t, cs: &[usize]| match t {
            TermNode::Var(_) => 1,
            _ => cs.iter().fold(1usize, |a, &c| a.saturating_add(c)),
        })
    }

    /// Number of distinct nodes in memory.
    pub fn node_count(&self) -> usize {
        let mut seen = HashSet::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            if seen.insert(t.ptr_id()) {
                match t.node() {
                    TermNode::Var(_) => {}
                    TermNode::Prod(ts) | TermNode::Coprod(ts) => stack.extend(ts),
                    TermNode::Fix(_, _, b) => stack.push(b),
                }
            }
        }
        seen.len()
    }

    /// Maximal nesting depth of binders.
    pub fn binder_depth(&self) -> usize {
        self.fold_dag(&mut HashMap::new(), &|t, cs: &[usize]| {
            let m = cs.iter().copied().max().unwrap_or(0);
            if matches!(t, TermNode::Fix(..)) {
                m + 1
            } else {
                m
            }
        })
    }

    fn fold_dag<V: Copy>(
        &self,
        memo: &mut HashMap<usize, V>,
        f: &impl Fn(&TermNode, &[V]) -> V,
    ) -> V {
        if let Some(&v) = memo.get(&self.ptr_id()) {
            return v;
        }
        let cs: Vec<V> = match self.node() {
            TermNode::Var(_) => Vec::new(),
            TermNode::Prod(ts) | TermNode::Coprod(ts) => {
                ts.iter().map(|c| c.fold_dag(memo, f)).collect()
            }
            TermNode::Fix(_, _, b) => vec![b.fold_dag(memo, f)],
        };
        let v = f(self.node(), &cs);
        memo.insert(self.ptr_id(), v);
        v
    }

    pub fn is_closed(&self) -> bool {
        free_vars(self).is_empty()
    }
}

impl fmt::Debug for MuTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", super::print(self))
    }
}

impl fmt::Display for MuTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", super::print(self))
    }
}

/// An ordered list of distinct variable names.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Context(Vec<String>);

impl Context {
    pub fn new() -> Self {
        Context(Vec::new())
    }

    /// Builds a context, dropping repeated names after their first occurrence.
    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut ctx = Context::new();
        for n in names {
            ctx.push(n.into());
        }
        ctx
    }

    /// Appends `name` unless already present; returns whether it was added.
    pub fn push(&mut self, name: String) -> bool {
        if self.contains(&name) {
            false
        } else {
            self.0.push(name);
            true
        }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.iter().any(|n| n == name)
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }
}

impl<'a> IntoIterator for &'a Context {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

pub(crate) type FreeMemo = HashMap<usize, (MuTerm, Arc<Vec<String>>)>;

/// Free variables of `t` in order of first occurrence, memoized per node.
pub(crate) fn free_list(t: &MuTerm, memo: &mut FreeMemo) -> Arc<Vec<String>> {
    if let Some((_, v)) = memo.get(&t.ptr_id()) {
        return v.clone();
    }
    let v = match t.node() {
        TermNode::Var(x) => Arc::new(vec![x.clone()]),
        TermNode::Prod(ts) | TermNode::Coprod(ts) => {
            let mut out: Vec<String> = Vec::new();
            for c in ts {
                for x in free_list(c, memo).iter() {
                    if !out.contains(x) {
                        out.push(x.clone());
                    }
                }
            }
            Arc::new(out)
        }
        TermNode::Fix(_, x, b) => {
            let inner = free_list(b, memo);
            if inner.contains(x) {
                Arc::new(inner.iter().filter(|y| *y != x).cloned().collect())
            } else {
                inner
            }
        }
    };
    memo.insert(t.ptr_id(), (t.clone(), v.clone()));
    v
}

/// Free variables in order of first occurrence.
pub fn free_vars(t: &MuTerm) -> Context {
    Context::from_names(free_list(t, &mut HashMap::new()).iter().cloned())
}

pub fn occurs_free(t: &MuTerm, name: &str) -> bool {
    let mut seen = HashSet::new();
    let mut stack = vec![t];
    while let Some(t) = stack.pop() {
        if !seen.insert(t.ptr_id()) {
            continue;
        }
        match t.node() {
            TermNode::Var(x) if x == name => return true,
            TermNode::Var(_) => {}
            TermNode::Prod(ts) | TermNode::Coprod(ts) => stack.extend(ts),
            TermNode::Fix(_, x, b) => {
                if x != name {
                    stack.push(b);
                }
            }
        }
    }
    false
}

/// Every name occurring in `t`, bound or free.
pub fn all_names(t: &MuTerm, out: &mut HashSet<String>) {
    let mut seen = HashSet::new();
    let mut stack = vec![t];
    while let Some(t) = stack.pop() {
        if !seen.insert(t.ptr_id()) {
            continue;
        }
        match t.node() {
            TermNode::Var(x) => {
                out.insert(x.clone());
            }
            TermNode::Prod(ts) | TermNode::Coprod(ts) => stack.extend(ts),
            TermNode::Fix(_, x, b) => {
                out.insert(x.clone());
                stack.push(b);
            }
        }
    }
}

/// `base` with its trailing digits replaced by the smallest suffix not in `avoid`.
pub fn fresh_name(base: &str, avoid: &HashSet<String>) -> String {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "X" } else { stem };
    (1..)
        .map(|k| format!("{stem}{k}"))
        .find(|n| !avoid.contains(n))
        .expect("unbounded supply of names")
}

type Rewrites = HashMap<usize, (MuTerm, MuTerm)>;

/// Rebuilds a node from rewritten children, reusing `t` when nothing changed.
fn rebuild(t: &MuTerm, mut f: impl FnMut(&MuTerm) -> MuTerm) -> MuTerm {
    match t.node() {
        TermNode::Var(_) => t.clone(),
        TermNode::Prod(ts) | TermNode::Coprod(ts) => {
            let cs: Vec<MuTerm> = ts.iter().map(&mut f).collect();
            if cs.iter().zip(ts).all(|(a, b)| a.ptr_id() == b.ptr_id()) {
                t.clone()
            } else if matches!(t.node(), TermNode::Prod(_)) {
                MuTerm::prod(cs)
            } else {
                MuTerm::coprod(cs)
            }
        }
        TermNode::Fix(k, x, b) => {
            let nb = f(b);
            if nb.ptr_id() == b.ptr_id() {
                t.clone()
            } else {
                MuTerm::fix(*k, x.clone(), nb)
            }
        }
    }
}

fn rename_free(t: &MuTerm, from: &str, to: &str) -> MuTerm {
    fn go(t: &MuTerm, from: &str, to: &str, memo: &mut Rewrites) -> MuTerm {
        if let Some((_, r)) = memo.get(&t.ptr_id()) {
            return r.clone();
        }
        let r = match t.node() {
            TermNode::Var(x) if x == from => MuTerm::var(to),
            TermNode::Fix(_, x, _) if x == from => t.clone(),
            _ => rebuild(t, |c| go(c, from, to, memo)),
        };
        memo.insert(t.ptr_id(), (t.clone(), r.clone()));
        r
    }
    go(t, from, to, &mut HashMap::new())
}

/// Capture-avoiding substitution `t[s/var]`.
///
/// Binders of `t` that would capture a free variable of `s` are renamed.
/// Every occurrence of `var` is replaced by `s` itself, so the copies share
/// structure; an inserted copy may reuse a binder name of an enclosing
/// binder, which only shadows it.
pub fn substitute(t: &MuTerm, var: &str, s: &MuTerm) -> MuTerm {
    if !occurs_free(t, var) {
        return t.clone();
    }
    let fv_s: BTreeSet<String> = free_vars(s).names().iter().cloned().collect();
    let mut names = HashSet::new();
    all_names(t, &mut names);
    all_names(s, &mut names);
    let mut memo = HashMap::new();
    subst_go(t, var, s, &fv_s, &mut names, &mut memo)
}

fn subst_go(
    t: &MuTerm,
    var: &str,
    s: &MuTerm,
    fv_s: &BTreeSet<String>,
    names: &mut HashSet<String>,
    memo: &mut Rewrites,
) -> MuTerm {
    if let Some((_, r)) = memo.get(&t.ptr_id()) {
        return r.clone();
    }
    let r = match t.node() {
        TermNode::Var(x) if x == var => s.clone(),
        TermNode::Fix(_, x, _) if x == var => t.clone(),
        TermNode::Fix(k, x, b) if fv_s.contains(x) => {
            let nb = subst_go(b, var, s, fv_s, names, memo);
            if nb.ptr_id() == b.ptr_id() {
                t.clone()
            } else {
                let n = fresh_name(x, names);
                names.insert(n.clone());
                let renamed = rename_free(b, x, &n);
                MuTerm::fix(*k, n, subst_go(&renamed, var, s, fv_s, names, memo))
            }
        }
        _ => rebuild(t, |c| subst_go(c, var, s, fv_s, names, memo)),
    };
    memo.insert(t.ptr_id(), (t.clone(), r.clone()));
    r
}

/// Equality up to renaming of bound variables.
pub fn alpha_eq(a: &MuTerm, b: &MuTerm) -> bool {
    fn go<'a>(a: &'a MuTerm, b: &'a MuTerm, env: &mut Vec<(&'a str, &'a str)>) -> bool {
        match (a.node(), b.node()) {
            (TermNode::Var(x), TermNode::Var(y)) => {
                let bx = env.iter().rposition(|(l, _)| *l == x);
                let by = env.iter().rposition(|(_, r)| *r == y);
                match (bx, by) {
                    (Some(i), Some(j)) => i == j,
                    (None, None) => x == y,
                    _ => false,
                }
            }
            (TermNode::Prod(xs), TermNode::Prod(ys))
            | (TermNode::Coprod(xs), TermNode::Coprod(ys)) => {
                xs.len() == ys.len() && xs.iter().zip(ys).all(|(p, q)| go(p, q, env))
            }
            (TermNode::Fix(k1, x, p), TermNode::Fix(k2, y, q)) => {
                if k1 != k2 {
                    return false;
                }
                env.push((x, y));
                let r = go(p, q, env);
                env.pop();
                r
            }
            _ => false,
        }
    }
    go(a, b, &mut Vec::new())
}

/// Whether binder names are pairwise distinct along every path and disjoint
/// from the free names.
pub fn is_barendregt(t: &MuTerm) -> bool {
    fn go(t: &MuTerm, path: &mut Vec<String>, free: &Context) -> bool {
        match t.node() {
            TermNode::Var(_) => true,
            TermNode::Prod(ts) | TermNode::Coprod(ts) => ts.iter().all(|c| go(c, path, free)),
            TermNode::Fix(_, x, b) => {
                if path.contains(x) || free.contains(x) {
                    return false;
                }
                path.push(x.clone());
                let ok = go(b, path, free);
                path.pop();
                ok
            }
        }
    }
    go(t, &mut Vec::new(), &free_vars(t))
}

/// Renames shadowing binders; returns the renamed term and the renamings made.
pub fn barendregt(t: &MuTerm) -> (MuTerm, Vec<(String, String)>) {
    fn go(
        t: &MuTerm,
        path: &mut Vec<String>,
        taken: &mut HashSet<String>,
        forbidden: &Context,
        log: &mut Vec<(String, String)>,
    ) -> MuTerm {
        match t.node() {
            TermNode::Var(_) => t.clone(),
            TermNode::Prod(ts) => MuTerm::prod(
                ts.iter()
                    .map(|c| go(c, path, taken, forbidden, log))
                    .collect(),
            ),
            TermNode::Coprod(ts) => MuTerm::coprod(
                ts.iter()
                    .map(|c| go(c, path, taken, forbidden, log))
                    .collect(),
            ),
            TermNode::Fix(k, x, b) => {
                let (name, body) = if path.contains(x) || forbidden.contains(x) {
                    let n = fresh_name(x, taken);
                    log.push((x.clone(), n.clone()));
                    let body = rename_free(b, x, &n);
                    (n, body)
                } else {
                    (x.clone(), b.clone())
                };
                taken.insert(name.clone());
                path.push(name.clone());
                let body = go(&body, path, taken, forbidden, log);
                path.pop();
                MuTerm::fix(*k, name, body)
            }
        }
    }
    if is_barendregt(t) {
        return (t.clone(), Vec::new());
    }
    let mut taken = HashSet::new();
    all_names(t, &mut taken);
    let mut log = Vec::new();
    let out = go(t, &mut Vec::new(), &mut taken, &free_vars(t), &mut log);
    (out, log)
}

/// Drops vacuous binders: `σX.b` with `X` not free in `b` becomes `b`.
pub fn simplify(t: &MuTerm) -> MuTerm {
    fn go(t: &MuTerm, memo: &mut Rewrites, free: &mut FreeMemo) -> MuTerm {
        if let Some((_, r)) = memo.get(&t.ptr_id()) {
            return r.clone();
        }
        let r = match t.node() {
            TermNode::Fix(k, x, b) => {
                let body = go(b, memo, free);
                if !free_list(&body, free).contains(x) {
                    body
                } else if body.ptr_id() == b.ptr_id() {
                    t.clone()
                } else {
                    MuTerm::fix(*k, x.clone(), body)
                }
            }
            _ => rebuild(t, |c| go(c, memo, free)),
        };
        memo.insert(t.ptr_id(), (t.clone(), r.clone()));
        r
    }
    go(t, &mut HashMap::new(), &mut HashMap::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &str) -> MuTerm {
        MuTerm::var(x)
    }

    #[test]
    fn free_variables() {
        assert_eq!(free_vars(&v("X")).names(), &["X".to_string()]);
        let closed = MuTerm::mu("X", MuTerm::coprod(vec![MuTerm::one(), v("X")]));
        assert!(free_vars(&closed).is_empty());
        let open = MuTerm::mu("X", MuTerm::prod(vec![v("X"), v("Y")]));
        assert_eq!(free_vars(&open).names(), &["Y".to_string()]);
    }

    #[test]
    fn substitution_examples() {
        let s = MuTerm::prod(vec![v("A"), v("B")]);
        assert_eq!(substitute(&v("X"), "X", &s), s);
        let bound = MuTerm::mu("X", v("X"));
        assert_eq!(substitute(&bound, "X", &s), bound);

        let t = MuTerm::mu("Y", MuTerm::prod(vec![v("X"), v("Y")]));
        let r = substitute(&t, "X", &v("Y"));
        let expected = MuTerm::mu("Y1", MuTerm::prod(vec![v("Y"), v("Y1")]));
        assert!(alpha_eq(&r, &expected), "{r}");
        assert!(!alpha_eq(
            &r,
            &MuTerm::mu("Y", MuTerm::prod(vec![v("Y"), v("Y")]))
        ));
        assert_eq!(free_vars(&r).names(), &["Y".to_string()]);
    }

    #[test]
    fn substituted_copies_are_shared() {
        let t = MuTerm::mu(
            "X",
            MuTerm::coprod(vec![v("Z"), MuTerm::prod(vec![v("Z"), v("X")])]),
        );
        let s = MuTerm::mu("X", MuTerm::prod(vec![v("X")]));
        let r = substitute(&t, "Z", &s);
        let expected = MuTerm::mu(
            "X",
            MuTerm::coprod(vec![
                MuTerm::mu("Q", MuTerm::prod(vec![v("Q")])),
                MuTerm::prod(vec![MuTerm::mu("Q", MuTerm::prod(vec![v("Q")])), v("X")]),
            ]),
        );
        assert!(alpha_eq(&r, &expected), "{r}");
        let TermNode::Fix(_, _, body) = r.node() else {
            panic!("{r}")
        };
        let TermNode::Coprod(cs) = body.node() else {
            panic!("{r}")
        };
        let TermNode::Prod(ps) = cs[1].node() else {
            panic!("{r}")
        };
        assert_eq!(cs[0].ptr_id(), s.ptr_id());
        assert_eq!(ps[0].ptr_id(), s.ptr_id());
        let (canon, _) = barendregt(&r);
        assert!(is_barendregt(&canon) && alpha_eq(&canon, &r));
    }

    #[test]
    fn alpha_equivalence() {
        assert!(alpha_eq(&MuTerm::mu("X", v("X")), &MuTerm::mu("Y", v("Y"))));
        assert!(!alpha_eq(
            &MuTerm::mu("X", v("X")),
            &MuTerm::nu("X", v("X"))
        ));
        let a = MuTerm::one();
        let b = MuTerm::zero();
        assert!(!alpha_eq(
            &MuTerm::prod(vec![a.clone(), b.clone()]),
            &MuTerm::prod(vec![b, a])
        ));
        // free names must match literally
        assert!(!alpha_eq(&v("X"), &v("Y")));
        // bound vs free
        assert!(!alpha_eq(
            &MuTerm::mu("X", v("Y")),
            &MuTerm::mu("Y", v("Y"))
        ));
    }

    #[test]
    fn barendregt_renames_shadowing() {
        let t = MuTerm::mu("X", MuTerm::nu("X", v("X")));
        assert!(!is_barendregt(&t));
        let (r, log) = barendregt(&t);
        assert!(is_barendregt(&r));
        assert!(alpha_eq(&r, &t));
        assert_eq!(log.len(), 1);
    }

    #[test]
    fn simplify_drops_vacuous_binders() {
        let t = MuTerm::mu(
            "X",
            MuTerm::coprod(vec![MuTerm::nu("L", MuTerm::one()), v("X")]),
        );
        let s = simplify(&t);
        assert!(alpha_eq(
            &s,
            &MuTerm::mu("X", MuTerm::coprod(vec![MuTerm::one(), v("X")]))
        ));
    }

    #[test]
    fn priority_parity() {
        assert!(FixKind::Mu.matches_priority(1));
        assert!(!FixKind::Mu.matches_priority(2));
        assert!(FixKind::Nu.matches_priority(0));
        assert_eq!(FixKind::for_priority(3), FixKind::Mu);
    }
}
