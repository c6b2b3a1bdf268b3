//! Sparse multivariate polynomials and polynomial vector fields.
//!
//! A [`Polynomial`] represents a potential `U(u_0, ..., u_{D-1})` as a merged
//! collection of monomials. A [`PolyField`] represents a polynomial vector
//! field `du/dt = sum_k F_k u^{⊗k}` as degree-indexed sparse coefficient
//! tables, the form consumed by the Carleman lifting. Index tuples are kept
//! sorted ascending so every monomial has a single representative column in
//! tensor space.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::Scalar;

/// Exponent map of a monomial: variable index -> positive exponent.
pub type Exponents = BTreeMap<usize, u32>;

/// A single monomial `coefficient * prod_i u_i^{e_i}`.
///
/// Stored exponents are always positive; variables with exponent zero are
/// dropped so equality of exponent maps is syntactic.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial<S> {
    pub exponents: Exponents,
    pub coefficient: S,
}

impl<S: Scalar> Monomial<S> {
    pub fn new(exponents: Exponents, coefficient: S) -> Self {
        let exponents = exponents.into_iter().filter(|&(_, e)| e > 0).collect();
        Self {
            exponents,
            coefficient,
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.exponents.values().sum()
    }

    pub fn eval(&self, u: &[S]) -> S {
        let mut acc = self.coefficient;
        for (&var, &exp) in &self.exponents {
            acc = acc * u[var].powi(exp as i32);
        }
        acc
    }

    /// Partial derivative with respect to variable `var`; `None` if the
    /// monomial does not contain it.
    pub fn partial(&self, var: usize) -> Option<Monomial<S>> {
        let &exp = self.exponents.get(&var)?;
        let mut exponents = self.exponents.clone();
        if exp == 1 {
            exponents.remove(&var);
        } else {
            exponents.insert(var, exp - 1);
        }
        Some(Monomial {
            exponents,
            coefficient: self.coefficient * S::from_u32(exp).unwrap(),
        })
    }
}

/// Sparse multivariate polynomial over `dim` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<S> {
    dim: usize,
    terms: BTreeMap<Exponents, S>,
}

impl<S: Scalar> Polynomial<S> {
    pub fn zero(dim: usize) -> Self {
        assert!(dim >= 1, "polynomial dimension must be at least 1");
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: S) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(Exponents::new(), c);
        p
    }

    pub fn variable(dim: usize, var: usize) -> Self {
        assert!(var < dim, "variable index out of range");
        let mut p = Self::zero(dim);
        p.add_term([(var, 1)].into_iter().collect(), S::one());
        p
    }

    /// Adds `coeff * u^exps`, merging with an existing term and dropping the
    /// term if the merged coefficient is exactly zero.
    pub fn add_term(&mut self, exps: Exponents, coeff: S) {
        if coeff == S::zero() {
            return;
        }
        let exps: Exponents = exps.into_iter().filter(|&(_, e)| e > 0).collect();
        for (&var, _) in &exps {
            assert!(var < self.dim, "variable index out of range");
        }
        let entry = self.terms.entry(exps.clone()).or_insert_with(S::zero);
        *entry = *entry + coeff;
        if *entry == S::zero() {
            self.terms.remove(&exps);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree of the polynomial (0 for the zero polynomial).
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.values().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = Monomial<S>> + '_ {
        self.terms.iter().map(|(e, &c)| Monomial {
            exponents: e.clone(),
            coefficient: c,
        })
    }

    pub fn eval(&self, u: &[S]) -> S {
        assert_eq!(u.len(), self.dim, "state dimension mismatch");
        self.terms
            .iter()
            .map(|(exps, &c)| {
                let mut acc = c;
                for (&var, &exp) in exps {
                    acc = acc * u[var].powi(exp as i32);
                }
                acc
            })
            .sum()
    }

    /// Partial derivative with respect to variable `var`.
    pub fn partial(&self, var: usize) -> Polynomial<S> {
        assert!(var < self.dim, "variable index out of range");
        let mut out = Polynomial::zero(self.dim);
        for mono in self.terms() {
            if let Some(d) = mono.partial(var) {
                out.add_term(d.exponents, d.coefficient);
            }
        }
        out
    }

    /// Exact gradient: component `i` is `∂p/∂u_i`.
    pub fn gradient(&self) -> Vec<Polynomial<S>> {
        (0..self.dim).map(|i| self.partial(i)).collect()
    }

    pub fn scale(&self, factor: S) -> Polynomial<S> {
        let mut out = Polynomial::zero(self.dim);
        for (exps, &c) in &self.terms {
            out.add_term(exps.clone(), c * factor);
        }
        out
    }

    pub fn pow(&self, exp: u32) -> Polynomial<S> {
        let mut out = Polynomial::constant(self.dim, S::one());
        for _ in 0..exp {
            out = &out * self;
        }
        out
    }

    /// Substitutes each variable by the given polynomial (all of one common
    /// dimension). Used to express edge energies in global coordinates.
    pub fn substitute(&self, subs: &[Polynomial<S>]) -> Polynomial<S> {
        assert_eq!(subs.len(), self.dim, "one substitution per variable");
        let out_dim = subs[0].dim();
        let mut out = Polynomial::zero(out_dim);
        for (exps, &c) in &self.terms {
            let mut term = Polynomial::constant(out_dim, c);
            for (&var, &exp) in exps {
                term = &term * &subs[var].pow(exp);
            }
            out = &out + &term;
        }
        out
    }
}

impl<S: Scalar> Add for &Polynomial<S> {
    type Output = Polynomial<S>;
    fn add(self, rhs: &Polynomial<S>) -> Polynomial<S> {
        assert_eq!(self.dim, rhs.dim);
        let mut out = self.clone();
        for (exps, &c) in &rhs.terms {
            out.add_term(exps.clone(), c);
        }
        out
    }
}

impl<S: Scalar> Sub for &Polynomial<S> {
    type Output = Polynomial<S>;
    fn sub(self, rhs: &Polynomial<S>) -> Polynomial<S> {
        assert_eq!(self.dim, rhs.dim);
        let mut out = self.clone();
        for (exps, &c) in &rhs.terms {
            out.add_term(exps.clone(), -c);
        }
        out
    }
}

impl<S: Scalar> Neg for &Polynomial<S> {
    type Output = Polynomial<S>;
    fn neg(self) -> Polynomial<S> {
        self.scale(-S::one())
    }
}

impl<S: Scalar> Mul for &Polynomial<S> {
    type Output = Polynomial<S>;
    fn mul(self, rhs: &Polynomial<S>) -> Polynomial<S> {
        assert_eq!(self.dim, rhs.dim);
        let mut out = Polynomial::zero(self.dim);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &rhs.terms {
                let mut exps = ea.clone();
                for (&var, &e) in eb {
                    *exps.entry(var).or_insert(0) += e;
                }
                out.add_term(exps, ca * cb);
            }
        }
        out
    }
}

/// One sparse entry of a degree-`k` coefficient table: the value at
/// `(row, sorted index tuple)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldEntry<S> {
    pub row: usize,
    pub indices: Vec<usize>,
    pub coeff: S,
}

/// Polynomial vector field `du/dt = sum_{k in K} F_k u^{⊗k}` stored as
/// degree-indexed sparse tables with sorted representative index tuples.
#[derive(Clone, Debug)]
pub struct PolyField<S> {
    dim: usize,
    tables: BTreeMap<usize, Vec<FieldEntry<S>>>,
}

impl<S: Scalar> PolyField<S> {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "field dimension must be at least 1");
        Self {
            dim,
            tables: BTreeMap::new(),
        }
    }

    /// Adds `coeff * prod_j u[indices_j]` to component `row`. Indices are
    /// sorted into the canonical representative; duplicates merge.
    pub fn add_entry(&mut self, row: usize, mut indices: Vec<usize>, coeff: S) {
        assert!(row < self.dim, "row index out of range");
        for &i in &indices {
            assert!(i < self.dim, "tuple index out of range");
        }
        if coeff == S::zero() {
            return;
        }
        indices.sort_unstable();
        let table = self.tables.entry(indices.len()).or_default();
        match table
            .binary_search_by(|e| (e.row, e.indices.as_slice()).cmp(&(row, indices.as_slice())))
        {
            Ok(pos) => {
                table[pos].coeff = table[pos].coeff + coeff;
                if table[pos].coeff == S::zero() {
                    table.remove(pos);
                }
            }
            Err(pos) => table.insert(
                pos,
                FieldEntry {
                    row,
                    indices,
                    coeff,
                },
            ),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Degrees `k` with a nonempty table, ascending.
    pub fn degrees(&self) -> Vec<usize> {
        self.tables
            .iter()
            .filter(|(_, t)| !t.is_empty())
            .map(|(&k, _)| k)
            .collect()
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().last().copied().unwrap_or(0)
    }

    pub fn entries(&self, degree: usize) -> &[FieldEntry<S>] {
        self.tables.get(&degree).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Evaluates the field at `u` by monomial substitution.
    pub fn eval(&self, u: &[S]) -> Vec<S> {
        assert_eq!(u.len(), self.dim, "state dimension mismatch");
        let mut out = vec![S::zero(); self.dim];
        for table in self.tables.values() {
            for e in table {
                let mut prod = e.coeff;
                for &i in &e.indices {
                    prod = prod * u[i];
                }
                out[e.row] = out[e.row] + prod;
            }
        }
        out
    }
}

/// Builds the gradient-flow field `du/dt = -∇U` from a potential.
pub fn flow_from_potential<S: Scalar>(potential: &Polynomial<S>) -> PolyField<S> {
    let mut field = PolyField::new(potential.dim());
    for (row, component) in potential.gradient().iter().enumerate() {
        for mono in component.terms() {
            let mut indices = Vec::with_capacity(mono.total_degree() as usize);
            for (&var, &exp) in &mono.exponents {
                for _ in 0..exp {
                    indices.push(var);
                }
            }
            field.add_entry(row, indices, -mono.coefficient);
        }
    }
    field
}

/// Exact gradient of a polynomial (free-function form of
/// [`Polynomial::gradient`]).
pub fn gradient<S: Scalar>(p: &Polynomial<S>) -> Vec<Polynomial<S>> {
    p.gradient()
}
