//! Solving equation systems by nesting single-variable fixed points.
//!
//! A simultaneous least fixed point of `<F, G>` is obtained as
//! `y = μY.G(μX.F(X,Y), Y)` and `x = μX.F(X, y)`; iterating this step over
//! a whole system, one variable at a time, is Gaussian elimination.

use std::fmt;

use thiserror::Error;

use crate::term::{
    alpha_eq, free_vars, occurs_free, simplify, substitute, Context, EquationSystem, FixKind,
    MuTerm, SystemError,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BekicError {
    #[error("unsupported shape: {0}")]
    Shape(String),
    #[error(transparent)]
    System(#[from] SystemError),
}

/// Closed-in-parameters solution terms, one per equation variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolvedSystem {
    solutions: Vec<(String, MuTerm)>,
    params: Context,
}

impl SolvedSystem {
    fn new(solutions: Vec<(String, MuTerm)>, params: Context) -> Self {
        debug_assert!(solutions
            .iter()
            .all(|(_, t)| free_vars(t).names().iter().all(|n| params.contains(n))));
        SolvedSystem { solutions, params }
    }

    pub fn solutions(&self) -> &[(String, MuTerm)] {
        &self.solutions
    }

    pub fn params(&self) -> &Context {
        &self.params
    }

    pub fn get(&self, var: &str) -> Option<&MuTerm> {
        self.solutions
            .iter()
            .find(|(v, _)| v == var)
            .map(|(_, t)| t)
    }

    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }
}

impl fmt::Display for SolvedSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (v, t) in &self.solutions {
            writeln!(f, "{v} = {t}")?;
        }
        Ok(())
    }
}

/// Two least-fixed-point equations `X =μ F(X,Y)`, `Y =μ G(X,Y)` in nested form.
pub fn bekic_nest(sys: &EquationSystem) -> Result<SolvedSystem, BekicError> {
    let eqs = sys.equations();
    if eqs.len() != 2 {
        return Err(BekicError::Shape(format!(
            "expected 2 equations, found {}",
            eqs.len()
        )));
    }
    if eqs.iter().any(|e| e.kind != FixKind::Mu) {
        return Err(BekicError::Shape(
            "both equations must be least fixed points".into(),
        ));
    }
    let (x, f) = (&eqs[0].var, &eqs[0].rhs);
    let (y, g) = (&eqs[1].var, &eqs[1].rhs);
    let mx = MuTerm::mu(x.clone(), f.clone());
    let y_sol = MuTerm::mu(y.clone(), substitute(g, x, &mx));
    let x_sol = substitute(&mx, y, &y_sol);
    Ok(SolvedSystem::new(
        vec![(x.clone(), x_sol), (y.clone(), y_sol)],
        sys.params().clone(),
    ))
}

/// The system `X = F(Y)`, `Y =μ G(X,Y)` where `X` has no fixed-point content.
pub fn pairing_forward(
    x: &str,
    y: &str,
    f: &MuTerm,
    g: &MuTerm,
) -> Result<SolvedSystem, BekicError> {
    if occurs_free(f, x) {
        return Err(BekicError::Shape(format!("F must not mention {x}")));
    }
    let y_sol = MuTerm::mu(y, substitute(g, x, f));
    let x_sol = substitute(f, y, &y_sol);
    let mut params = free_vars(&x_sol);
    for n in &free_vars(&y_sol) {
        params.push(n.clone());
    }
    Ok(SolvedSystem::new(
        vec![(x.to_string(), x_sol), (y.to_string(), y_sol)],
        params,
    ))
}

/// The single-variable term `μY.G(F(Y),Y)`, after checking that `nested`
/// solves `<F∘pr, G>` with that `Y`-component.
pub fn pairing_backward(
    x: &str,
    y: &str,
    f: &MuTerm,
    g: &MuTerm,
    nested: &SolvedSystem,
) -> Result<MuTerm, BekicError> {
    if occurs_free(f, x) {
        return Err(BekicError::Shape(format!("F must not mention {x}")));
    }
    let term = MuTerm::mu(y, substitute(g, x, f));
    let given = nested
        .get(y)
        .ok_or_else(|| BekicError::Shape(format!("no solution for {y}")))?;
    if !alpha_eq(&simplify(given), &simplify(&term)) {
        return Err(BekicError::Shape(format!(
            "the {y}-component {given} is not a solution of the paired system"
        )));
    }
    Ok(term)
}

/// Eliminates variables lowest priority first, ties by equation index.
pub fn gaussian_eliminate(sys: &EquationSystem) -> Result<SolvedSystem, BekicError> {
    let mut order: Vec<usize> = (0..sys.len()).collect();
    order.sort_by_key(|&i| (sys.equations()[i].priority, i));
    gaussian_eliminate_with_order(sys, &order)
}

/// Gaussian elimination in an explicit order (a permutation of equation indices).
pub fn gaussian_eliminate_with_order(
    sys: &EquationSystem,
    order: &[usize],
) -> Result<SolvedSystem, BekicError> {
    let n = sys.len();
    let mut seen = vec![false; n];
    if order.len() != n
        || order
            .iter()
            .any(|&i| i >= n || std::mem::replace(&mut seen[i], true))
    {
        return Err(BekicError::Shape(
            "order must be a permutation of the equations".into(),
        ));
    }
    let eqs = sys.equations();
    let mut rhs: Vec<MuTerm> = eqs.iter().map(|e| e.rhs.clone()).collect();
    let mut solved: Vec<Option<MuTerm>> = vec![None; n];
    for (step, &k) in order.iter().enumerate() {
        let sol = MuTerm::fix(eqs[k].kind, eqs[k].var.clone(), rhs[k].clone());
        for &j in &order[step + 1..] {
            rhs[j] = substitute(&rhs[j], &eqs[k].var, &sol);
        }
        solved[k] = Some(sol);
    }
    let mut closed: Vec<Option<MuTerm>> = vec![None; n];
    for (step, &k) in order.iter().enumerate().rev() {
        let mut t = solved[k].take().expect("every equation solved");
        for &j in &order[step + 1..] {
            let later = closed[j].as_ref().expect("later variables are closed");
            t = substitute(&t, &eqs[j].var, later);
        }
        closed[k] = Some(t);
    }
    let solutions = eqs
        .iter()
        .zip(closed)
        .map(|(e, t)| (e.var.clone(), t.expect("closed")))
        .collect();
    Ok(SolvedSystem::new(solutions, sys.params().clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{parse, Equation};

    fn v(x: &str) -> MuTerm {
        MuTerm::var(x)
    }

    fn eq(var: &str, kind: FixKind, priority: u32, rhs: MuTerm) -> Equation {
        Equation {
            var: var.into(),
            kind,
            priority,
            rhs,
        }
    }

    #[test]
    fn nest_instantiates_the_recipe() {
        let sys = EquationSystem::new(
            vec![
                eq(
                    "X",
                    FixKind::Mu,
                    1,
                    MuTerm::coprod(vec![MuTerm::one(), v("Y")]),
                ),
                eq("Y", FixKind::Mu, 1, v("X")),
            ],
            Context::new(),
        )
        .unwrap();
        let s = bekic_nest(&sys).unwrap();
        let y = parse("(mu Y (mu X (sum (prod) (var Y))))").unwrap();
        let x = parse("(mu X (sum (prod) (mu Y (mu X1 (sum (prod) (var Y))))))").unwrap();
        assert!(alpha_eq(s.get("Y").unwrap(), &y));
        assert!(alpha_eq(s.get("X").unwrap(), &x));
        assert!(s.get("X").unwrap().is_closed());
    }

    #[test]
    fn nest_rejects_other_shapes() {
        let one =
            EquationSystem::new(vec![eq("X", FixKind::Mu, 1, v("X"))], Context::new()).unwrap();
        assert!(matches!(bekic_nest(&one), Err(BekicError::Shape(_))));
        let mixed = EquationSystem::new(
            vec![
                eq("X", FixKind::Mu, 1, v("Y")),
                eq("Y", FixKind::Nu, 0, v("X")),
            ],
            Context::new(),
        )
        .unwrap();
        assert!(matches!(bekic_nest(&mixed), Err(BekicError::Shape(_))));
    }

    #[test]
    fn independent_component_is_unchanged() {
        let g = MuTerm::coprod(vec![MuTerm::one(), v("Y")]);
        let sys = EquationSystem::new(
            vec![
                eq("X", FixKind::Mu, 1, v("Y")),
                eq("Y", FixKind::Mu, 1, g.clone()),
            ],
            Context::new(),
        )
        .unwrap();
        let s = bekic_nest(&sys).unwrap();
        assert!(alpha_eq(s.get("Y").unwrap(), &MuTerm::mu("Y", g)));
    }

    #[test]
    fn mutual_variables_collapse() {
        let sys = EquationSystem::new(
            vec![
                eq("X", FixKind::Mu, 1, v("Y")),
                eq("Y", FixKind::Mu, 1, v("X")),
            ],
            Context::new(),
        )
        .unwrap();
        let s = bekic_nest(&sys).unwrap();
        let target = MuTerm::mu("Y", v("Y"));
        assert!(alpha_eq(&simplify(s.get("Y").unwrap()), &target));
        assert!(alpha_eq(&simplify(s.get("X").unwrap()), &target));
    }

    #[test]
    fn pairing_examples() {
        let f = MuTerm::prod(vec![v("Y"), v("Y")]);
        let g = MuTerm::coprod(vec![MuTerm::one(), v("X")]);
        let s = pairing_forward("X", "Y", &f, &g).unwrap();
        let trees = parse("(mu Y (sum (prod) (prod (var Y) (var Y))))").unwrap();
        assert!(alpha_eq(s.get("Y").unwrap(), &trees));
        let back = pairing_backward("X", "Y", &f, &g, &s).unwrap();
        assert!(alpha_eq(&back, s.get("Y").unwrap()));

        let s = pairing_forward("X", "Y", &MuTerm::one(), &g).unwrap();
        assert!(alpha_eq(
            s.get("Y").unwrap(),
            &MuTerm::mu("Y", MuTerm::coprod(vec![MuTerm::one(), MuTerm::one()]))
        ));

        assert!(pairing_forward("X", "Y", &v("X"), &g).is_err());
    }

    #[test]
    fn pairing_backward_accepts_eliminated_form() {
        let f = MuTerm::coprod(vec![MuTerm::one(), v("Y")]);
        let g = v("X");
        let sys = EquationSystem::new(
            vec![
                eq("X", FixKind::Mu, 1, f.clone()),
                eq("Y", FixKind::Mu, 1, g.clone()),
            ],
            Context::new(),
        )
        .unwrap();
        let nested = gaussian_eliminate(&sys).unwrap();
        let t = pairing_backward("X", "Y", &f, &g, &nested).unwrap();
        assert!(alpha_eq(&t, &parse("(mu Y (sum (prod) (var Y)))").unwrap()));
        let wrong = pairing_forward("X", "Y", &MuTerm::one(), &g).unwrap();
        assert!(pairing_backward("X", "Y", &f, &g, &wrong).is_err());
    }

    #[test]
    fn elimination_matches_nesting() {
        let sys = EquationSystem::parse(
            "param P;\nX =mu[1] (sum (var P) (prod (var X) (var Y)))\nY =mu[1] (sum (prod) (var X))\n",
        )
        .unwrap();
        let a = gaussian_eliminate(&sys).unwrap();
        let b = bekic_nest(&sys).unwrap();
        for (va, ta) in a.solutions() {
            assert!(alpha_eq(ta, b.get(va).unwrap()));
            assert_eq!(free_vars(ta).names(), &["P".to_string()]);
        }
    }

    #[test]
    fn single_equation() {
        let sys = EquationSystem::parse("X =mu[3] (sum (prod) (var X))\n").unwrap();
        let s = gaussian_eliminate(&sys).unwrap();
        assert!(alpha_eq(
            s.get("X").unwrap(),
            &parse("(mu X (sum (prod) (var X)))").unwrap()
        ));
    }

    #[test]
    fn highest_priority_outermost() {
        let sys = EquationSystem::parse(
            "X =nu[2] (prod (var Y) (var Y))\nY =mu[1] (sum (var X) (var X))\n",
        )
        .unwrap();
        let s = gaussian_eliminate(&sys).unwrap();
        let expected =
            parse("(nu X (prod (mu Y (sum (var X) (var X))) (mu Y1 (sum (var X) (var X)))))")
                .unwrap();
        assert!(alpha_eq(s.get("X").unwrap(), &expected));
        let y = s.get("Y").unwrap();
        assert!(matches!(
            y.node(),
            crate::term::TermNode::Fix(FixKind::Mu, _, _)
        ));
        assert!(y.is_closed());
    }

    #[test]
    fn bad_orders_are_rejected() {
        let sys = EquationSystem::parse("X =mu[1] (var X)\nY =mu[1] (var Y)\n").unwrap();
        assert!(gaussian_eliminate_with_order(&sys, &[0, 0]).is_err());
        assert!(gaussian_eliminate_with_order(&sys, &[1]).is_err());
        assert!(gaussian_eliminate_with_order(&sys, &[1, 0]).is_ok());
    }
}
