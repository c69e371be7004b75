//! The action of terms on maps.
//!
//! Walking an element of a term's denotation while replacing what sits at
//! each variable position gives the functorial action. Least fixed points
//! are walked fold by fold; greatest fixed points layer by layer, with a
//! memo on graph positions that ties the cycles of the output.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use super::builder::{BRef, Builder, Shape, View};
use super::compile::{CNode, Dag, Edge, NodeId, Root};
use super::element::Element;
use super::EvalError;
use crate::term::FixKind;

#[derive(Clone)]
pub(crate) enum MapEntry {
    Identity,
    Map(Rc<HashMap<Element, Element>>),
    States(Rc<HashMap<Element, BRef>>),
    MuRec {
        fix: NodeId,
        env: Env,
    },
    NuRec(Rc<NuRec>),
    /// Component `j` of a simultaneous system.
    Sys(usize),
}

pub(crate) struct NuRec {
    fix: NodeId,
    env: Env,
    memo: RefCell<HashMap<(usize, u32), BRef>>,
}

pub(crate) type Env = Rc<Vec<MapEntry>>;

pub(crate) struct System {
    pub(crate) kind: FixKind,
    pub(crate) rhs: Vec<Root>,
    memo: Vec<HashMap<(usize, u32), BRef>>,
}

impl System {
    pub(crate) fn new(kind: FixKind, rhs: Vec<Root>) -> System {
        let memo = vec![HashMap::new(); rhs.len()];
        System { kind, rhs, memo }
    }
}

pub(crate) struct Walker<'a> {
    dag: &'a Dag,
    pub(crate) b: Builder,
    free: Vec<MapEntry>,
    sys: Option<System>,
}

fn mismatch(what: &str, v: &View) -> EvalError {
    EvalError::Morphism(format!("{} does not inhabit {what}", v.to_element()))
}

/// The environment of a binder's body, with `e` for the bound variable.
fn under(body: &Edge, env: &Env, e: MapEntry) -> Env {
    let mut v = (**env).clone();
    v.push(e);
    Rc::new(body.select(&v))
}

impl<'a> Walker<'a> {
    pub(crate) fn new(dag: &'a Dag) -> Walker<'a> {
        Walker {
            dag,
            b: Builder::new(),
            free: vec![MapEntry::Identity; dag.name_count()],
            sys: None,
        }
    }

    pub(crate) fn set_free(&mut self, name: u32, e: MapEntry) {
        self.free[name as usize] = e;
    }

    pub(crate) fn with_system(mut self, sys: System) -> Walker<'a> {
        self.sys = Some(sys);
        self
    }

    pub(crate) fn walk(&mut self, node: NodeId, env: &Env, v: View) -> Result<BRef, EvalError> {
        match self.dag.node(node) {
            CNode::Free(n) => {
                let e = self.free[*n as usize].clone();
                self.apply(&e, v)
            }
            CNode::Bound => {
                let e = env[0].clone();
                self.apply(&e, v)
            }
            CNode::Prod(cs) => match v.shape() {
                Shape::Tuple(xs) if xs.len() == cs.len() => {
                    let mut out = Vec::with_capacity(xs.len());
                    for (c, x) in cs.iter().zip(xs) {
                        out.push(self.walk(c.node, &Rc::new(c.select(env)), x)?);
                    }
                    Ok(self.b.tuple(out))
                }
                _ => Err(mismatch("a product", &v)),
            },
            CNode::Coprod(cs) => match v.shape() {
                Shape::Inj(i, x) if (i as usize) < cs.len() => {
                    let c = &cs[i as usize];
                    let r = self.walk(c.node, &Rc::new(c.select(env)), x)?;
                    Ok(self.b.inj(i, r))
                }
                _ => Err(mismatch("a sum", &v)),
            },
            CNode::Fix(FixKind::Mu, body) => match v.shape() {
                Shape::Fold(x) => {
                    let inner = under(
                        body,
                        env,
                        MapEntry::MuRec {
                            fix: node,
                            env: env.clone(),
                        },
                    );
                    let r = self.walk(body.node, &inner, x)?;
                    Ok(self.b.fold(r))
                }
                _ => Err(mismatch("a least fixed point", &v)),
            },
            CNode::Fix(FixKind::Nu, _) => {
                let rec = Rc::new(NuRec {
                    fix: node,
                    env: env.clone(),
                    memo: RefCell::new(HashMap::new()),
                });
                self.nu_step(&rec, v)
            }
        }
    }

    fn nu_step(&mut self, rec: &Rc<NuRec>, v: View) -> Result<BRef, EvalError> {
        let key = v.key();
        if let Some(&r) = rec.memo.borrow().get(&key) {
            return Ok(r);
        }
        let Shape::Layer(x) = v.shape() else {
            return Err(mismatch("a greatest fixed point", &v));
        };
        let p = self.b.pending();
        rec.memo.borrow_mut().insert(key, p);
        let CNode::Fix(_, body) = self.dag.node(rec.fix) else {
            unreachable!("ν record points at a binder")
        };
        let inner = under(body, &rec.env, MapEntry::NuRec(rec.clone()));
        let c = self.walk(body.node, &inner, x)?;
        self.b.set_layer(p, c);
        Ok(p)
    }

    pub(crate) fn apply(&mut self, e: &MapEntry, v: View) -> Result<BRef, EvalError> {
        match e {
            MapEntry::Identity => Ok(self.b.ext(v.to_element())),
            MapEntry::Map(m) => {
                let x = v.to_element();
                match m.get(&x) {
                    Some(y) => Ok(self.b.ext(y.clone())),
                    None => Err(EvalError::Morphism(format!(
                        "{x} is outside the domain of a map"
                    ))),
                }
            }
            MapEntry::States(m) => {
                let x = v.to_element();
                m.get(&x)
                    .copied()
                    .ok_or_else(|| EvalError::Morphism(format!("{x} is not a stage element")))
            }
            MapEntry::MuRec { fix, env } => self.walk(*fix, env, v),
            MapEntry::NuRec(rec) => self.nu_step(rec, v),
            MapEntry::Sys(j) => self.sys_step(*j, v),
        }
    }

    fn sys_env(&self, j: usize) -> Env {
        let sys = self.sys.as_ref().expect("system walker");
        let all: Vec<MapEntry> = (0..sys.rhs.len()).map(MapEntry::Sys).collect();
        Rc::new(sys.rhs[j].select(&all))
    }

    /// Maps an element of component `j` of the simultaneous solution.
    pub(crate) fn sys_step(&mut self, j: usize, v: View) -> Result<BRef, EvalError> {
        let sys = self.sys.as_ref().expect("system walker");
        let (kind, rhs) = (sys.kind, sys.rhs[j].node);
        let env = self.sys_env(j);
        match kind {
            FixKind::Mu => match v.shape() {
                Shape::Fold(x) => {
                    let r = self.walk(rhs, &env, x)?;
                    Ok(self.b.fold(r))
                }
                _ => Err(mismatch("a least solution", &v)),
            },
            FixKind::Nu => {
                let key = v.key();
                if let Some(&r) = self.sys.as_ref().expect("system").memo[j].get(&key) {
                    return Ok(r);
                }
                let Shape::Layer(x) = v.shape() else {
                    return Err(mismatch("a greatest solution", &v));
                };
                let p = self.b.pending();
                self.sys.as_mut().expect("system").memo[j].insert(key, p);
                let c = self.walk(rhs, &env, x)?;
                self.b.set_layer(p, c);
                Ok(p)
            }
        }
    }
}
