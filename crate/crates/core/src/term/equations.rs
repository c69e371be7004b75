//! Priority-annotated systems of fixed-point equations and their `.eqs`
//! text format:
//!
//! ```text
//! param Y;
//! X =mu[1] (sum (prod) (var X) (var Y))
//! Z =nu[2] (prod (var X) (var Z))
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use super::parse::{is_valid_name, parse, ParseError};
use super::syntax::{free_vars, Context, FixKind, MuTerm};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    pub var: String,
    pub kind: FixKind,
    pub priority: u32,
    pub rhs: MuTerm,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SystemError {
    #[error("variable '{0}' is defined twice")]
    DuplicateVariable(String),
    #[error("'{0}' is both a parameter and an equation variable")]
    ParameterClash(String),
    #[error(
        "equation for '{var}' uses '{name}', which is neither an equation variable nor a parameter"
    )]
    Dangling { var: String, name: String },
    #[error("equation for '{var}' is {kind:?} but priority {priority} has the wrong parity")]
    Parity {
        var: String,
        kind: FixKind,
        priority: u32,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Term { line: usize, source: ParseError },
}

/// Simultaneous equations `X_i =σ_i[p_i] t_i` over a parameter context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationSystem {
    equations: Vec<Equation>,
    params: Context,
}

impl EquationSystem {
    pub fn new(equations: Vec<Equation>, params: Context) -> Result<Self, SystemError> {
        let mut lhs = BTreeSet::new();
        for eq in &equations {
            if !lhs.insert(eq.var.clone()) {
                return Err(SystemError::DuplicateVariable(eq.var.clone()));
            }
            if params.contains(&eq.var) {
                return Err(SystemError::ParameterClash(eq.var.clone()));
            }
            if !eq.kind.matches_priority(eq.priority) {
                return Err(SystemError::Parity {
                    var: eq.var.clone(),
                    kind: eq.kind,
                    priority: eq.priority,
                });
            }
        }
        for eq in &equations {
            for name in &free_vars(&eq.rhs) {
                if !lhs.contains(name) && !params.contains(name) {
                    return Err(SystemError::Dangling {
                        var: eq.var.clone(),
                        name: name.clone(),
                    });
                }
            }
        }
        Ok(EquationSystem { equations, params })
    }

    pub fn equations(&self) -> &[Equation] {
        &self.equations
    }

    pub fn params(&self) -> &Context {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn index_of(&self, var: &str) -> Option<usize> {
        self.equations.iter().position(|e| e.var == var)
    }

    /// All equations share a binder kind.
    pub fn uniform_kind(&self) -> Option<FixKind> {
        let first = self.equations.first()?.kind;
        self.equations
            .iter()
            .all(|e| e.kind == first)
            .then_some(first)
    }

    pub fn parse(text: &str) -> Result<Self, SystemError> {
        let mut equations = Vec::new();
        let mut params = Context::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with(';') {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix("param ") {
                let name = rest
                    .trim()
                    .strip_suffix(';')
                    .ok_or_else(|| SystemError::Syntax {
                        line,
                        message: "parameter declaration must end with ';'".into(),
                    })?;
                let name = name.trim();
                if !is_valid_name(name) {
                    return Err(SystemError::Syntax {
                        line,
                        message: format!("invalid parameter name '{name}'"),
                    });
                }
                params.push(name.to_string());
                continue;
            }
            let (lhs, rest) = trimmed.split_once('=').ok_or_else(|| SystemError::Syntax {
                line,
                message: "expected 'X =mu[P] TERM' or 'X =nu[P] TERM'".into(),
            })?;
            let var = lhs.trim();
            if !is_valid_name(var) {
                return Err(SystemError::Syntax {
                    line,
                    message: format!("invalid variable name '{var}'"),
                });
            }
            let (kind, rest) = if let Some(r) = rest.strip_prefix("mu[") {
                (FixKind::Mu, r)
            } else if let Some(r) = rest.strip_prefix("nu[") {
                (FixKind::Nu, r)
            } else {
                return Err(SystemError::Syntax {
                    line,
                    message: "expected '=mu[' or '=nu['".into(),
                });
            };
            let (prio, term_text) = rest.split_once(']').ok_or_else(|| SystemError::Syntax {
                line,
                message: "missing ']' after priority".into(),
            })?;
            let priority: u32 = prio.trim().parse().map_err(|_| SystemError::Syntax {
                line,
                message: format!("invalid priority '{prio}'"),
            })?;
            let rhs = parse(term_text).map_err(|source| SystemError::Term { line, source })?;
            equations.push(Equation {
                var: var.to_string(),
                kind,
                priority,
                rhs,
            });
        }
        EquationSystem::new(equations, params)
    }

    /// Canonical text: parameters first, then one equation per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in &self.params {
            writeln!(out, "param {p};").unwrap();
        }
        for eq in &self.equations {
            writeln!(
                out,
                "{} ={}[{}] {}",
                eq.var,
                eq.kind.keyword(),
                eq.priority,
                super::print(&eq.rhs)
            )
            .unwrap();
        }
        out
    }
}
