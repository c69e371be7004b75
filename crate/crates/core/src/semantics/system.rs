//! Simultaneous fixed points of uniform equation systems.
//!
//! All components are iterated in lockstep, independently of any nesting
//! of binders, which makes this a reference for checking eliminated
//! solutions.

use std::collections::HashMap;
use std::rc::Rc;

use super::builder::View;
use super::carrier::{Carrier, FiniteFunction};
use super::compile::Root;
use super::element::Element;
use super::eval::{fresh_token, Evaluator, Sem};
use super::walk::{MapEntry, System, Walker};
use super::{eval_with, finite, Env, EvalError, EvalOptions};
use crate::bekic::SolvedSystem;
use crate::term::{EquationSystem, FixKind};

#[derive(Clone, Debug)]
pub enum SystemValue {
    Stabilized {
        kind: FixKind,
        /// One carrier per equation, in equation order.
        components: Vec<Carrier>,
        iterations: usize,
    },
    /// The iteration was stopped; sizes per step, or the reason it could not continue.
    Diverged {
        history: Vec<Vec<usize>>,
        reason: String,
    },
}

struct Setup {
    ev: Evaluator,
    kind: FixKind,
    rhs: Vec<Root>,
}

fn setup(sys: &EquationSystem, env: &Env, opts: &EvalOptions) -> Result<Setup, EvalError> {
    let kind = sys.uniform_kind().ok_or_else(|| {
        EvalError::Unsupported("simultaneous evaluation needs all-μ or all-ν systems".into())
    })?;
    let scope: Vec<String> = sys.equations().iter().map(|e| e.var.clone()).collect();
    let mut ev = Evaluator::new(env, *opts);
    let mut rhs = Vec::new();
    for eq in sys.equations() {
        rhs.push(ev.compile(&eq.rhs, &scope)?);
    }
    Ok(Setup { ev, kind, rhs })
}

fn step(s: &mut Setup, cur: &[Carrier]) -> Result<Result<Vec<Carrier>, String>, EvalError> {
    let mut out = Vec::with_capacity(s.rhs.len());
    for r in &s.rhs {
        match s.ev.eval(r.node, &r.select(cur)) {
            Ok(Sem::Finite(c)) => out.push(c),
            Ok(Sem::Infinite(cert)) => return Ok(Err(cert)),
            Err(EvalError::ResourceLimit(m)) => return Ok(Err(m)),
            Err(e) => return Err(e),
        }
    }
    Ok(Ok(out))
}

fn sizes(cs: &[Carrier]) -> Vec<usize> {
    cs.iter().map(Carrier::len).collect()
}

pub fn eval_system(
    sys: &EquationSystem,
    env: &Env,
    opts: &EvalOptions,
) -> Result<SystemValue, EvalError> {
    let mut s = setup(sys, env, opts)?;
    match s.kind {
        FixKind::Mu => least(&mut s),
        FixKind::Nu => greatest(&mut s),
    }
}

fn least(s: &mut Setup) -> Result<SystemValue, EvalError> {
    let budget = s.ev.opts.budget;
    let mut cur = vec![Carrier::empty(); s.rhs.len()];
    let mut history = vec![sizes(&cur)];
    for it in 0..=budget {
        let next = match step(s, &cur)? {
            Ok(n) => n,
            Err(reason) => return Ok(SystemValue::Diverged { history, reason }),
        };
        let next: Vec<Carrier> = next
            .iter()
            .map(|c| Carrier::from_vec(c.elements().iter().cloned().map(Element::fold).collect()))
            .collect();
        if next == cur {
            return Ok(SystemValue::Stabilized {
                kind: FixKind::Mu,
                components: cur,
                iterations: it,
            });
        }
        if cur.iter().zip(&next).any(|(a, b)| !a.is_subset(b)) {
            return Err(EvalError::Internal(
                "simultaneous iteration is not increasing".into(),
            ));
        }
        history.push(sizes(&next));
        cur = next;
    }
    Ok(SystemValue::Diverged {
        history,
        reason: format!("no stabilization within {budget} steps"),
    })
}

fn greatest(s: &mut Setup) -> Result<SystemValue, EvalError> {
    let budget = s.ev.opts.budget;
    let m = s.rhs.len();
    let token = fresh_token();
    let mut prev: Vec<Carrier> = (0..m)
        .map(|i| Carrier::from_vec(vec![Element::hole(token, i as u32)]))
        .collect();
    // Components whose fixed point is empty start empty; otherwise their
    // unreachable stage elements would keep later projections from being onto.
    let mut cur = loop {
        let cur = match step(s, &prev)? {
            Ok(c) => c,
            Err(reason) => {
                return Ok(SystemValue::Diverged {
                    history: vec![sizes(&prev)],
                    reason,
                })
            }
        };
        let dead: Vec<usize> = (0..m)
            .filter(|&i| cur[i].is_empty() && !prev[i].is_empty())
            .collect();
        if dead.is_empty() {
            break cur;
        }
        for i in dead {
            prev[i] = Carrier::empty();
        }
    };
    let mut history = vec![sizes(&prev), sizes(&cur)];
    let mut proj: Vec<Vec<usize>> = cur.iter().map(|c| vec![0; c.len()]).collect();
    for it in 0..=budget {
        let bijective = (0..m).all(|i| {
            cur[i].len() == prev[i].len() && {
                let mut seen = vec![false; prev[i].len()];
                proj[i]
                    .iter()
                    .all(|&j| !std::mem::replace(&mut seen[j], true))
            }
        });
        if bijective {
            let components = tie(s, &prev, &cur, &proj)?;
            return Ok(SystemValue::Stabilized {
                kind: FixKind::Nu,
                components,
                iterations: it,
            });
        }
        let next = match step(s, &cur)? {
            Ok(n) => n,
            Err(reason) => return Ok(SystemValue::Diverged { history, reason }),
        };
        history.push(sizes(&next));
        let env: Vec<MapEntry> = (0..m)
            .map(|i| {
                let table: HashMap<Element, Element> = cur[i]
                    .elements()
                    .iter()
                    .zip(&proj[i])
                    .map(|(e, &j)| (e.clone(), prev[i].elements()[j].clone()))
                    .collect();
                MapEntry::Map(Rc::new(table))
            })
            .collect();
        let mut next_proj = Vec::with_capacity(m);
        for i in 0..m {
            let mut p = Vec::with_capacity(next[i].len());
            for e in next[i].elements() {
                let mut w = Walker::new(&s.ev.dag);
                let r = w.walk(s.rhs[i].node, &Rc::new(s.rhs[i].select(&env)), View::new(e))?;
                let img = w.b.finish(r);
                p.push(cur[i].index_of(&img).ok_or_else(|| {
                    EvalError::Internal(format!(
                        "stage projection of {e} leaves the previous stage"
                    ))
                })?);
            }
            next_proj.push(p);
        }
        prev = cur;
        cur = next;
        proj = next_proj;
    }
    Ok(SystemValue::Diverged {
        history,
        reason: format!("no stabilization within {budget} steps"),
    })
}

fn tie(
    s: &Setup,
    prev: &[Carrier],
    cur: &[Carrier],
    proj: &[Vec<usize>],
) -> Result<Vec<Carrier>, EvalError> {
    let mut w = Walker::new(&s.ev.dag);
    let states: Vec<Vec<u32>> = prev
        .iter()
        .map(|c| (0..c.len()).map(|_| w.b.pending()).collect())
        .collect();
    let env: Vec<MapEntry> = prev
        .iter()
        .zip(&states)
        .map(|(c, st)| {
            MapEntry::States(Rc::new(
                c.elements()
                    .iter()
                    .cloned()
                    .zip(st.iter().copied())
                    .collect(),
            ))
        })
        .collect();
    for i in 0..prev.len() {
        let env = Rc::new(s.rhs[i].select(&env));
        for (k, &j) in proj[i].iter().enumerate() {
            let r = w.walk(s.rhs[i].node, &env, View::new(&cur[i].elements()[k]))?;
            w.b.set_layer(states[i][j], r);
        }
    }
    let all: Vec<u32> = states.iter().flatten().copied().collect();
    let mut elems = w.b.finish_many(&all).into_iter();
    Ok(states
        .iter()
        .map(|st| Carrier::from_vec(elems.by_ref().take(st.len()).collect()))
        .collect())
}

/// For each equation, the map from its simultaneous component to the value
/// of its eliminated solution term, obtained by unfolding equation by equation.
pub fn comparison_maps(
    sys: &EquationSystem,
    env: &Env,
    opts: &EvalOptions,
    components: &[Carrier],
    solved: &SolvedSystem,
) -> Result<Vec<FiniteFunction>, EvalError> {
    let s = setup(sys, env, opts)?;
    let mut out = Vec::with_capacity(components.len());
    for (i, eq) in sys.equations().iter().enumerate() {
        let term = solved
            .get(&eq.var)
            .ok_or_else(|| EvalError::Unsupported(format!("no solution for {}", eq.var)))?;
        let target = finite(eval_with(term, env, opts)?, "an eliminated solution")?;
        let mut w = Walker::new(&s.ev.dag).with_system(System::new(s.kind, s.rhs.clone()));
        let roots = components[i]
            .elements()
            .iter()
            .map(|e| w.sys_step(i, View::new(e)))
            .collect::<Result<Vec<_>, _>>()?;
        let images = w.b.finish_many(&roots);
        let map = images
            .iter()
            .map(|y| {
                target
                    .index_of(y)
                    .ok_or_else(|| EvalError::Morphism(format!("{y} is not a value of {}", eq.var)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        out.push(FiniteFunction::from_indices(
            components[i].clone(),
            target,
            map,
        )?);
    }
    Ok(out)
}
