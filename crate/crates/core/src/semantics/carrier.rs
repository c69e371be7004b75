//! Finite sets of elements and functions between them.

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use super::element::Element;
use super::EvalError;

/// A finite set of elements, kept sorted.
#[derive(Clone)]
pub struct Carrier(Arc<Inner>);

struct Inner {
    elems: Vec<Element>,
    hash: u64,
}

impl Carrier {
    pub fn from_vec(mut elems: Vec<Element>) -> Carrier {
        elems.sort();
        elems.dedup();
        let mut h = DefaultHasher::new();
        elems.len().hash(&mut h);
        for e in &elems {
            e.hash(&mut h);
        }
        Carrier(Arc::new(Inner {
            elems,
            hash: h.finish(),
        }))
    }

    pub fn empty() -> Carrier {
        Carrier::from_vec(Vec::new())
    }

    /// `n` distinct atoms tagged with `name`.
    pub fn atoms(name: &str, n: usize) -> Carrier {
        let set: Arc<str> = Arc::from(name);
        Carrier::from_vec(
            (0..n as u32)
                .map(|i| Element::atom_shared(set.clone(), i))
                .collect(),
        )
    }

    pub fn elements(&self) -> &[Element] {
        &self.0.elems
    }

    pub fn len(&self) -> usize {
        self.0.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.elems.is_empty()
    }

    pub fn index_of(&self, e: &Element) -> Option<usize> {
        self.0.elems.binary_search(e).ok()
    }

    pub fn contains(&self, e: &Element) -> bool {
        self.index_of(e).is_some()
    }

    pub fn is_subset(&self, other: &Carrier) -> bool {
        self.len() <= other.len() && self.elements().iter().all(|e| other.contains(e))
    }
}

impl PartialEq for Carrier {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.hash == other.0.hash && self.0.elems == other.0.elems)
    }
}

impl Eq for Carrier {}

impl Hash for Carrier {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl fmt::Debug for Carrier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.elements()).finish()
    }
}

/// A total function between finite carriers.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteFunction {
    domain: Carrier,
    codomain: Carrier,
    map: Vec<usize>,
}

impl FiniteFunction {
    /// Fails when some image is missing or lies outside the codomain.
    pub fn new(
        domain: Carrier,
        codomain: Carrier,
        mut f: impl FnMut(&Element) -> Option<Element>,
    ) -> Result<FiniteFunction, EvalError> {
        let mut map = Vec::with_capacity(domain.len());
        for x in domain.elements() {
            let y = f(x).ok_or_else(|| EvalError::Morphism(format!("no image for {x}")))?;
            let j = codomain.index_of(&y).ok_or_else(|| {
                EvalError::Morphism(format!("{x} maps to {y}, outside the codomain"))
            })?;
            map.push(j);
        }
        Ok(FiniteFunction {
            domain,
            codomain,
            map,
        })
    }

    /// Builds a function from domain and codomain indices.
    pub fn from_indices(
        domain: Carrier,
        codomain: Carrier,
        map: Vec<usize>,
    ) -> Result<FiniteFunction, EvalError> {
        if map.len() != domain.len() || map.iter().any(|&j| j >= codomain.len()) {
            return Err(EvalError::Morphism(
                "index table does not fit the carriers".into(),
            ));
        }
        Ok(FiniteFunction {
            domain,
            codomain,
            map,
        })
    }

    pub fn identity(c: &Carrier) -> FiniteFunction {
        FiniteFunction {
            domain: c.clone(),
            codomain: c.clone(),
            map: (0..c.len()).collect(),
        }
    }

    pub fn domain(&self) -> &Carrier {
        &self.domain
    }

    pub fn codomain(&self) -> &Carrier {
        &self.codomain
    }

    pub fn indices(&self) -> &[usize] {
        &self.map
    }

    pub fn apply(&self, x: &Element) -> Option<&Element> {
        let i = self.domain.index_of(x)?;
        Some(&self.codomain.elements()[self.map[i]])
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &FiniteFunction) -> Result<FiniteFunction, EvalError> {
        if self.codomain != next.domain {
            return Err(EvalError::Morphism(
                "composing functions with mismatched carriers".into(),
            ));
        }
        Ok(FiniteFunction {
            domain: self.domain.clone(),
            codomain: next.codomain.clone(),
            map: self.map.iter().map(|&j| next.map[j]).collect(),
        })
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.codomain.len()];
        self.map
            .iter()
            .all(|&j| !std::mem::replace(&mut seen[j], true))
    }

    pub fn is_surjective(&self) -> bool {
        let mut seen = vec![false; self.codomain.len()];
        for &j in &self.map {
            seen[j] = true;
        }
        seen.into_iter().all(|b| b)
    }

    pub fn is_bijection(&self) -> bool {
        self.domain.len() == self.codomain.len() && self.is_injective()
    }

    pub fn is_identity(&self) -> bool {
        self.domain == self.codomain && self.map.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn inverse(&self) -> Option<FiniteFunction> {
        if !self.is_bijection() {
            return None;
        }
        let mut map = vec![0; self.map.len()];
        for (i, &j) in self.map.iter().enumerate() {
            map[j] = i;
        }
        Some(FiniteFunction {
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            map,
        })
    }
}

impl fmt::Debug for FiniteFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(
                self.domain
                    .elements()
                    .iter()
                    .zip(&self.map)
                    .map(|(x, &j)| (x, &self.codomain.elements()[j])),
            )
            .finish()
    }
}
