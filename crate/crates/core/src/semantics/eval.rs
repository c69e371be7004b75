//! Evaluation of compiled terms to finite carriers.
//!
//! Least fixed points are computed by Kleene iteration from the empty
//! set. Greatest fixed points iterate from a one-point set, tracking the
//! projections between consecutive stages; once a projection is a
//! bijection the stage is isomorphic to the fixed point and its elements
//! are re-expressed as canonical regular trees. Every binder is analysed
//! first, so iteration only ever runs on finite, nonempty fixed points.

use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;
use std::sync::atomic::{AtomicU64, Ordering};

use super::analysis::{clamp, Analysis, Analyzer, Finiteness};
use super::builder::View;
use super::carrier::Carrier;
use super::compile::{CNode, Dag, Edge, NodeId, Root};
use super::element::Element;
use super::walk::{MapEntry, Walker};
use super::{EvalError, EvalOptions};
use crate::term::{FixKind, MuTerm};

static HOLE_TOKENS: AtomicU64 = AtomicU64::new(1);

pub(crate) fn fresh_token() -> u64 {
    HOLE_TOKENS.fetch_add(1, Ordering::Relaxed)
}

#[derive(Clone, Debug)]
pub(crate) enum Sem {
    Finite(Carrier),
    Infinite(String),
}

/// How a greatest fixed point was reached.
#[derive(Clone, Debug)]
pub(crate) struct NuInfo {
    pub(crate) stage: usize,
}

pub(crate) struct Evaluator {
    pub(crate) dag: Dag,
    env: BTreeMap<String, Carrier>,
    free: Vec<Option<Carrier>>,
    free_sizes: Vec<u8>,
    analyzer: Analyzer,
    memo: HashMap<(NodeId, Vec<Carrier>), Sem>,
    nu_info: HashMap<(NodeId, Vec<Carrier>), NuInfo>,
    pub(crate) opts: EvalOptions,
}

impl Evaluator {
    pub(crate) fn new(env: &BTreeMap<String, Carrier>, opts: EvalOptions) -> Evaluator {
        Evaluator {
            dag: Dag::default(),
            env: env.clone(),
            free: Vec::new(),
            free_sizes: Vec::new(),
            analyzer: Analyzer::default(),
            memo: HashMap::new(),
            nu_info: HashMap::new(),
            opts,
        }
    }

    /// Compiles `t` with `scope` bound (outermost first) and resolves its free variables.
    pub(crate) fn compile(&mut self, t: &MuTerm, scope: &[String]) -> Result<Root, EvalError> {
        let id = self.dag.compile(t, scope);
        for n in self.free.len()..self.dag.name_count() {
            let name = self.dag.name(n as u32).to_string();
            let c = self
                .env
                .get(&name)
                .cloned()
                .ok_or(EvalError::Unbound(name))?;
            self.free_sizes.push(clamp(c.len()));
            self.free.push(Some(c));
        }
        Ok(id)
    }

    pub(crate) fn analyze(&mut self, node: NodeId, env: &[Carrier]) -> Analysis {
        let sizes: Vec<u8> = env.iter().map(|c| clamp(c.len())).collect();
        self.analyzer
            .analyze(&self.dag, &self.free_sizes, node, &sizes)
    }

    pub(crate) fn nu_info(&self, node: NodeId, env: &[Carrier]) -> Option<&NuInfo> {
        self.nu_info.get(&(node, env.to_vec()))
    }

    fn check_size(&self, n: usize) -> Result<(), EvalError> {
        if n > self.opts.max_elements {
            Err(EvalError::ResourceLimit(format!(
                "a carrier would exceed {} elements",
                self.opts.max_elements
            )))
        } else {
            Ok(())
        }
    }

    /// `env` is the node's own environment.
    pub(crate) fn eval(&mut self, node: NodeId, env: &[Carrier]) -> Result<Sem, EvalError> {
        debug_assert_eq!(env.len(), self.dag.arity(node));
        let key = (node, env.to_vec());
        if let Some(s) = self.memo.get(&key) {
            return Ok(s.clone());
        }
        let s = match self.dag.node(node).clone() {
            CNode::Free(n) => Sem::Finite(
                self.free[n as usize]
                    .clone()
                    .expect("resolved at compile time"),
            ),
            CNode::Bound => Sem::Finite(env[0].clone()),
            CNode::Prod(cs) => {
                let mut parts = Vec::with_capacity(cs.len());
                for c in cs {
                    parts.push(self.eval(c.node, &c.select(env))?);
                }
                self.product(parts)?
            }
            CNode::Coprod(cs) => {
                let mut out = Vec::new();
                let mut infinite = None;
                for (i, c) in cs.into_iter().enumerate() {
                    match self.eval(c.node, &c.select(env))? {
                        Sem::Infinite(cert) => infinite = infinite.or(Some(cert)),
                        Sem::Finite(a) => out.extend(
                            a.elements()
                                .iter()
                                .map(|e| Element::inj(i as u32, e.clone())),
                        ),
                    }
                }
                match infinite {
                    Some(cert) => Sem::Infinite(cert),
                    None => {
                        self.check_size(out.len())?;
                        Sem::Finite(Carrier::from_vec(out))
                    }
                }
            }
            CNode::Fix(kind, body) => {
                let a = self.analyze(node, env);
                match a.verdict {
                    Finiteness::Empty => Sem::Finite(Carrier::empty()),
                    Finiteness::Infinite => Sem::Infinite(
                        a.certificate
                            .expect("infinite verdicts carry a certificate"),
                    ),
                    Finiteness::NonemptyFinite => match kind {
                        FixKind::Mu => Sem::Finite(self.least(&body, env)?),
                        FixKind::Nu => {
                            let (c, info) = self.greatest(&body, env)?;
                            self.nu_info.insert(key.clone(), info);
                            Sem::Finite(c)
                        }
                    },
                }
            }
        };
        self.memo.insert(key, s.clone());
        Ok(s)
    }

    fn product(&self, parts: Vec<Sem>) -> Result<Sem, EvalError> {
        let mut finite = Vec::with_capacity(parts.len());
        let mut infinite = None;
        for p in parts {
            match p {
                Sem::Finite(c) if c.is_empty() => return Ok(Sem::Finite(c)),
                Sem::Finite(c) => finite.push(c),
                Sem::Infinite(cert) => infinite = infinite.or(Some(cert)),
            }
        }
        if let Some(cert) = infinite {
            return Ok(Sem::Infinite(cert));
        }
        let total = finite
            .iter()
            .try_fold(1usize, |acc, c| acc.checked_mul(c.len()));
        self.check_size(total.unwrap_or(usize::MAX))?;
        let mut tuples: Vec<Vec<Element>> = vec![Vec::new()];
        for c in &finite {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    c.elements().iter().map(move |e| {
                        let mut t = t.clone();
                        t.push(e.clone());
                        t
                    })
                })
                .collect();
        }
        Ok(Sem::Finite(Carrier::from_vec(
            tuples.into_iter().map(Element::tuple).collect(),
        )))
    }

    fn body_finite(
        &mut self,
        body: &Edge,
        env: &[Carrier],
        x: Carrier,
    ) -> Result<Carrier, EvalError> {
        let mut inner = env.to_vec();
        inner.push(x);
        match self.eval(body.node, &body.select(&inner))? {
            Sem::Finite(c) => Ok(c),
            Sem::Infinite(cert) => Err(EvalError::Internal(format!(
                "an approximant of a finite fixed point is infinite: {cert}"
            ))),
        }
    }

    fn least(&mut self, body: &Edge, env: &[Carrier]) -> Result<Carrier, EvalError> {
        let mut a = Carrier::empty();
        for _ in 0..=self.opts.budget {
            let next = self.body_finite(body, env, a.clone())?;
            let next =
                Carrier::from_vec(next.elements().iter().cloned().map(Element::fold).collect());
            self.check_size(next.len())?;
            if next == a {
                return Ok(a);
            }
            if !a.is_subset(&next) {
                return Err(EvalError::Internal(
                    "Kleene iteration is not increasing".into(),
                ));
            }
            a = next;
        }
        Err(EvalError::BudgetExhausted {
            budget: self.opts.budget,
        })
    }

    /// Walks an element of `body[X := domain]` with `X` mapped through `map`.
    fn project(
        &self,
        body: &Edge,
        outer: usize,
        map: &Rc<HashMap<Element, Element>>,
        e: &Element,
    ) -> Result<Element, EvalError> {
        let mut w = Walker::new(&self.dag);
        let mut env = vec![MapEntry::Identity; outer];
        env.push(MapEntry::Map(map.clone()));
        let r = w.walk(body.node, &Rc::new(body.select(&env)), View::new(e))?;
        Ok(w.b.finish(r))
    }

    fn greatest(&mut self, body: &Edge, env: &[Carrier]) -> Result<(Carrier, NuInfo), EvalError> {
        let star = Element::hole(fresh_token(), 0);
        let mut prev = Carrier::from_vec(vec![star.clone()]);
        let mut cur = self.body_finite(body, env, prev.clone())?;
        // proj[i] is the index in `prev` of the image of cur[i].
        let mut proj: Vec<usize> = vec![0; cur.len()];
        for stage in 0..=self.opts.budget {
            if cur.len() == prev.len() && is_injective(&proj, prev.len()) {
                let c = self.tie(body, env, &prev, &cur, &proj)?;
                return Ok((c, NuInfo { stage }));
            }
            let next = self.body_finite(body, env, cur.clone())?;
            self.check_size(next.len())?;
            let map: HashMap<Element, Element> = cur
                .elements()
                .iter()
                .zip(&proj)
                .map(|(e, &j)| (e.clone(), prev.elements()[j].clone()))
                .collect();
            let map = Rc::new(map);
            let mut next_proj = Vec::with_capacity(next.len());
            for e in next.elements() {
                let img = self.project(body, env.len(), &map, e)?;
                let j = cur.index_of(&img).ok_or_else(|| {
                    EvalError::Internal(format!(
                        "stage projection of {e} leaves the previous stage"
                    ))
                })?;
                next_proj.push(j);
            }
            prev = cur;
            cur = next;
            proj = next_proj;
        }
        Err(EvalError::BudgetExhausted {
            budget: self.opts.budget,
        })
    }

    /// Turns a stage that maps bijectively onto its predecessor into canonical elements.
    fn tie(
        &self,
        body: &Edge,
        env: &[Carrier],
        prev: &Carrier,
        cur: &Carrier,
        proj: &[usize],
    ) -> Result<Carrier, EvalError> {
        let mut w = Walker::new(&self.dag);
        let states: Vec<_> = (0..prev.len()).map(|_| w.b.pending()).collect();
        let table: HashMap<Element, _> = prev
            .elements()
            .iter()
            .cloned()
            .zip(states.iter().copied())
            .collect();
        let mut wenv = vec![MapEntry::Identity; env.len()];
        wenv.push(MapEntry::States(Rc::new(table)));
        let wenv = Rc::new(body.select(&wenv));
        for (i, &j) in proj.iter().enumerate() {
            let r = w.walk(body.node, &wenv, View::new(&cur.elements()[i]))?;
            w.b.set_layer(states[j], r);
        }
        Ok(Carrier::from_vec(w.b.finish_many(&states)))
    }
}

fn is_injective(map: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    map.iter().all(|&j| !std::mem::replace(&mut seen[j], true))
}
