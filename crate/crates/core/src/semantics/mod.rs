//! Set-valued semantics of μ-terms.
//!
//! A term with free variables denotes a functor on sets; [`eval`] computes
//! its value at finite sets of atoms, [`eval_on_morphism`] its action on
//! functions between them, and [`fold`] / [`unfold`] the structure maps of
//! least and greatest fixed points.

mod analysis;
mod builder;
mod carrier;
mod compile;
mod element;
mod eval;
mod system;
mod walk;

use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use serde_json::{json, Value};
use thiserror::Error;

pub use analysis::{Analysis, Finiteness};
pub use carrier::{Carrier, FiniteFunction};
pub use element::{Element, ElementTree, GNode, NuGraph};
pub use system::{comparison_maps, eval_system, SystemValue};

use builder::View;
use compile::CNode;
use eval::{Evaluator, Sem};
use walk::{MapEntry, Walker};

use crate::term::{substitute, FixKind, MuTerm, TermNode};

pub const DEFAULT_BUDGET: usize = 64;
pub const DEFAULT_MAX_ELEMENTS: usize = 200_000;
/// Elements beyond this many are left out of JSON output.
pub const PRINT_CAP: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound variable {0}")]
    Unbound(String),
    #[error("iteration did not stabilize within {budget} steps")]
    BudgetExhausted { budget: usize },
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("bad morphism: {0}")]
    Morphism(String),
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalOptions {
    pub budget: usize,
    pub max_elements: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            budget: DEFAULT_BUDGET,
            max_elements: DEFAULT_MAX_ELEMENTS,
        }
    }
}

impl EvalOptions {
    pub fn with_budget(budget: usize) -> Self {
        EvalOptions {
            budget,
            ..Self::default()
        }
    }
}

/// Values of the free variables.
pub type Env = BTreeMap<String, Carrier>;

/// Assigns `n` fresh atoms to each variable.
pub fn sized_env<'a>(sizes: impl IntoIterator<Item = (&'a str, usize)>) -> Env {
    sizes
        .into_iter()
        .map(|(x, n)| (x.to_string(), Carrier::atoms(x, n)))
        .collect()
}

/// The root greatest fixed point of a finite value, with its coalgebra structure.
#[derive(Clone, Debug)]
pub struct NuTable {
    pub binder: String,
    /// Index of the stage whose projection became a bijection.
    pub stage: usize,
    pub unfold: FiniteFunction,
}

#[derive(Clone, Debug)]
pub enum SetValue {
    Finite {
        elements: Carrier,
        nu_table: Option<NuTable>,
    },
    Infinite {
        certificate: String,
    },
}

impl SetValue {
    /// `None` for infinite values.
    pub fn cardinality(&self) -> Option<usize> {
        match self {
            SetValue::Finite { elements, .. } => Some(elements.len()),
            SetValue::Infinite { .. } => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, SetValue::Infinite { .. })
    }

    pub fn is_empty(&self) -> bool {
        self.cardinality() == Some(0)
    }

    pub fn elements(&self) -> Option<&Carrier> {
        match self {
            SetValue::Finite { elements, .. } => Some(elements),
            SetValue::Infinite { .. } => None,
        }
    }

    pub fn to_json(&self, cap: usize) -> Value {
        match self {
            SetValue::Finite { elements, nu_table } => {
                let mut v = json!({
                    "verdict": "finite",
                    "cardinality": elements.len(),
                    "certificate": null,
                });
                if elements.len() <= cap {
                    v["elements"] = elements.elements().iter().map(Element::to_json).collect();
                }
                if let Some(t) = nu_table {
                    v["nu_table"] = json!({
                        "binder": t.binder,
                        "stage": t.stage,
                        "unfold": t.unfold.indices(),
                    });
                }
                v
            }
            SetValue::Infinite { certificate } => json!({
                "verdict": "infinite",
                "cardinality": "infinite",
                "certificate": certificate,
            }),
        }
    }
}

pub fn eval(t: &MuTerm, env: &Env, budget: usize) -> Result<SetValue, EvalError> {
    eval_with(t, env, &EvalOptions::with_budget(budget))
}

pub fn eval_with(t: &MuTerm, env: &Env, opts: &EvalOptions) -> Result<SetValue, EvalError> {
    if opts.budget == 0 {
        return Err(EvalError::Unsupported(
            "the budget must be at least 1".into(),
        ));
    }
    let mut ev = Evaluator::new(env, *opts);
    let root = ev.compile(t, &[])?.node;
    match ev.eval(root, &[])? {
        Sem::Infinite(certificate) => Ok(SetValue::Infinite { certificate }),
        Sem::Finite(elements) => {
            let nu_table = match (ev.dag.node(root).clone(), ev.nu_info(root, &[]).cloned()) {
                (CNode::Fix(FixKind::Nu, body), Some(info)) => {
                    let image =
                        match ev.eval(body.node, &body.select(std::slice::from_ref(&elements)))? {
                            Sem::Finite(c) => c,
                            Sem::Infinite(_) => {
                                return Err(EvalError::Internal(
                                    "unfolding of a finite ν is infinite".into(),
                                ))
                            }
                        };
                    Some(NuTable {
                        binder: ev.dag.hint(root).to_string(),
                        stage: info.stage,
                        unfold: FiniteFunction::new(elements.clone(), image, unfold_element)?,
                    })
                }
                _ => None,
            };
            Ok(SetValue::Finite { elements, nu_table })
        }
    }
}

/// Emptiness and finiteness from the sizes of the free variables alone.
pub fn finiteness_analysis<'a>(
    t: &MuTerm,
    sizes: impl IntoIterator<Item = (&'a str, usize)>,
) -> Result<Analysis, EvalError> {
    let env = sized_env(sizes.into_iter().map(|(x, n)| (x, n.min(2))));
    let mut ev = Evaluator::new(&env, EvalOptions::default());
    let root = ev.compile(t, &[])?.node;
    Ok(ev.analyze(root, &[]))
}

fn finite(v: SetValue, what: &str) -> Result<Carrier, EvalError> {
    match v {
        SetValue::Finite { elements, .. } => Ok(elements),
        SetValue::Infinite { .. } => Err(EvalError::Unsupported(format!("{what} is infinite"))),
    }
}

/// The function `eval(t, domains) → eval(t, codomains)` induced by `fs`.
pub fn eval_on_morphism(
    t: &MuTerm,
    fs: &BTreeMap<String, FiniteFunction>,
    budget: usize,
) -> Result<FiniteFunction, EvalError> {
    let opts = EvalOptions::with_budget(budget);
    let doms: Env = fs
        .iter()
        .map(|(x, f)| (x.clone(), f.domain().clone()))
        .collect();
    let cods: Env = fs
        .iter()
        .map(|(x, f)| (x.clone(), f.codomain().clone()))
        .collect();
    let source = finite(eval_with(t, &doms, &opts)?, "the source")?;
    let target = finite(eval_with(t, &cods, &opts)?, "the target")?;

    let mut ev = Evaluator::new(&doms, opts);
    let root = ev.compile(t, &[])?.node;
    let mut w = Walker::new(&ev.dag);
    for n in 0..ev.dag.name_count() as u32 {
        let f = &fs[ev.dag.name(n)];
        let table: HashMap<Element, Element> = f
            .domain()
            .elements()
            .iter()
            .zip(f.indices())
            .map(|(x, &j)| (x.clone(), f.codomain().elements()[j].clone()))
            .collect();
        w.set_free(n, MapEntry::Map(Rc::new(table)));
    }
    let env = Rc::new(Vec::new());
    let mut roots = Vec::with_capacity(source.len());
    for e in source.elements() {
        roots.push(w.walk(root, &env, View::new(e))?);
    }
    let images = w.b.finish_many(&roots);
    let map = images
        .iter()
        .map(|y| {
            target
                .index_of(y)
                .ok_or_else(|| EvalError::Morphism(format!("image {y} is not in the target")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    FiniteFunction::from_indices(source, target, map)
}

/// `b[t/X]`, the one-step unrolling of a fixed point `t`.
pub fn unroll(t: &MuTerm) -> Option<MuTerm> {
    match t.node() {
        TermNode::Fix(_, x, body) => Some(substitute(body, x, t)),
        _ => None,
    }
}

fn wrap_layer(x: &Element) -> Element {
    let mut b = builder::Builder::new();
    let layer = b.pending();
    let child = b.ext(x.clone());
    b.set_layer(layer, child);
    b.finish(layer)
}

fn unfold_element(e: &Element) -> Option<Element> {
    match View::new(e).shape() {
        builder::Shape::Layer(x) => Some(x.to_element()),
        _ => None,
    }
}

fn both_sides(
    t: &MuTerm,
    env: &Env,
    budget: usize,
) -> Result<(FixKind, Carrier, Carrier), EvalError> {
    let TermNode::Fix(kind, ..) = t.node() else {
        return Err(EvalError::Unsupported(
            "fold and unfold need a fixed-point term".into(),
        ));
    };
    let opts = EvalOptions::with_budget(budget);
    let whole = finite(eval_with(t, env, &opts)?, "the fixed point")?;
    let unrolled = finite(
        eval_with(&unroll(t).expect("binder"), env, &opts)?,
        "the unrolling",
    )?;
    Ok((*kind, whole, unrolled))
}

fn checked(f: FiniteFunction, what: &str) -> Result<FiniteFunction, EvalError> {
    if f.is_bijection() {
        Ok(f)
    } else {
        Err(EvalError::Internal(format!("{what} is not a bijection")))
    }
}

/// The algebra structure `eval(b[t/X]) → eval(t)` of a fixed point `t`:
/// a `Fold` constructor for μ, one more layer for ν.
pub fn fold(t: &MuTerm, env: &Env, budget: usize) -> Result<FiniteFunction, EvalError> {
    let (kind, whole, unrolled) = both_sides(t, env, budget)?;
    let f = match kind {
        FixKind::Mu => FiniteFunction::new(unrolled, whole, |e| Some(Element::fold(e.clone())))?,
        FixKind::Nu => FiniteFunction::new(unrolled, whole, |e| Some(wrap_layer(e)))?,
    };
    checked(f, "fold")
}

/// The coalgebra structure `eval(t) → eval(b[t/X])` of a fixed point `t`.
pub fn unfold(t: &MuTerm, env: &Env, budget: usize) -> Result<FiniteFunction, EvalError> {
    let (kind, whole, unrolled) = both_sides(t, env, budget)?;
    let f = match kind {
        FixKind::Mu => FiniteFunction::new(whole, unrolled, |e| match e.tree() {
            ElementTree::Fold(x) => Some(x.clone()),
            _ => None,
        })?,
        FixKind::Nu => FiniteFunction::new(whole, unrolled, unfold_element)?,
    };
    checked(f, "unfold")
}
