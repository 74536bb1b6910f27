//! Functions on the trivialized bundle `chart x G1`.
//!
//! A [`FiberFunction`] stores, for each tensor component of its value space,
//! a polynomial in the base coordinates `x` and the fiber coordinates `xi`.
//! Contravariant slots are symmetric and keyed by sorted multi-indices;
//! covariant slots are kept as raw index tuples (they are only symmetric
//! after [`FiberFunction::symmetrize_covariant`]). Structure-group-equivariant
//! data is exactly the fiber-constant case, which is what [`lift`] produces
//! and [`project`] demands.

use std::collections::BTreeMap;

use crate::algebra::{component_keys, ValueSpec};
use crate::exact::poly::Poly;
use crate::exact::rational::Rational;
use crate::{Error, Result};

/// Tensor-density-valued function on `chart x G1` with polynomial components.
#[derive(Clone, PartialEq, Debug)]
pub struct FiberFunction {
    m: usize,
    spec: ValueSpec,
    comps: BTreeMap<(Vec<u8>, Vec<u8>), Poly>,
}

impl FiberFunction {
    /// The zero function with the given value spec.
    pub fn zero(m: usize, spec: ValueSpec) -> Self {
        let comps = component_keys(m, &spec)
            .into_iter()
            .map(|k| (k, Poly::zero(2 * m)))
            .collect();
        FiberFunction { m, spec, comps }
    }

    /// Builds componentwise; `f` receives `(cov tuple, sorted contra)`.
    pub fn from_fn(m: usize, spec: ValueSpec, mut f: impl FnMut(&[u8], &[u8]) -> Poly) -> Self {
        let comps = component_keys(m, &spec)
            .into_iter()
            .map(|k| {
                let p = f(&k.0, &k.1);
                assert_eq!(p.nvars(), 2 * m, "component in the wrong universe");
                (k, p)
            })
            .collect();
        FiberFunction { m, spec, comps }
    }

    /// Chart dimension.
    pub fn dim(&self) -> usize {
        self.m
    }

    /// Value spec of this function.
    pub fn spec(&self) -> &ValueSpec {
        &self.spec
    }

    /// Component at a covariant tuple and a contravariant multi-index (the
    /// latter is sorted internally).
    pub fn component(&self, cov: &[u8], contra: &[u8]) -> &Poly {
        let mut c = contra.to_vec();
        c.sort_unstable();
        self.comps
            .get(&(cov.to_vec(), c))
            .expect("component key out of range")
    }

    /// Iterates `(cov, contra, component)` in canonical order.
    pub fn components(&self) -> impl Iterator<Item = (&[u8], &[u8], &Poly)> {
        self.comps
            .iter()
            .map(|((cov, con), p)| (cov.as_slice(), con.as_slice(), p))
    }

    /// Applies `f` to every component.
    pub fn map(&self, mut f: impl FnMut(&Poly) -> Poly) -> Self {
        FiberFunction {
            m: self.m,
            spec: self.spec.clone(),
            comps: self.comps.iter().map(|(k, p)| (k.clone(), f(p))).collect(),
        }
    }

    /// Componentwise sum.
    pub fn add(&self, other: &FiberFunction) -> Self {
        assert_eq!(self.spec, other.spec, "spec mismatch");
        FiberFunction {
            m: self.m,
            spec: self.spec.clone(),
            comps: self
                .comps
                .iter()
                .map(|(k, p)| (k.clone(), p + &other.comps[k]))
                .collect(),
        }
    }

    /// Componentwise difference.
    pub fn sub(&self, other: &FiberFunction) -> Self {
        assert_eq!(self.spec, other.spec, "spec mismatch");
        FiberFunction {
            m: self.m,
            spec: self.spec.clone(),
            comps: self
                .comps
                .iter()
                .map(|(k, p)| (k.clone(), p - &other.comps[k]))
                .collect(),
        }
    }

    /// Rescales every component.
    pub fn scale(&self, c: &Rational) -> Self {
        self.map(|p| p.scale(c))
    }

    /// True when all components vanish identically.
    pub fn is_zero(&self) -> bool {
        self.comps.values().all(Poly::is_zero)
    }

    /// Maximal degree in the fiber variables over all components.
    pub fn fiber_degree(&self) -> u32 {
        let m = self.m;
        self.comps
            .values()
            .map(|p| p.degree_in(m..2 * m))
            .max()
            .unwrap_or(0)
    }

    /// Inserts the constant covector `h` into the first contravariant slot.
    pub fn insert_covector(&self, h: &[Rational]) -> Self {
        assert!(self.spec.contra >= 1, "nothing to contract");
        assert_eq!(h.len(), self.m);
        let out_spec = ValueSpec {
            contra: self.spec.contra - 1,
            ..self.spec.clone()
        };
        FiberFunction::from_fn(self.m, out_spec, |cov, con| {
            let mut acc = Poly::zero(2 * self.m);
            for p in 0..self.m {
                let mut full = con.to_vec();
                full.push(p as u8);
                acc = &acc + &self.component(cov, &full).scale(&h[p]);
            }
            acc
        })
    }

    /// Symmetric product with the constant covector `h`: appends one
    /// covariant slot so that evaluating on `(X, ..., X)` multiplies the
    /// original value by `h(X)`. Requires symmetric covariant input.
    pub fn wedge_covector(&self, h: &[Rational]) -> Self {
        assert_eq!(h.len(), self.m);
        let r = self.spec.cov;
        let out_spec = ValueSpec {
            cov: r + 1,
            ..self.spec.clone()
        };
        let norm = Rational::new(1.into(), ((r + 1) as i64).into());
        FiberFunction::from_fn(self.m, out_spec, |cov, con| {
            let mut acc = Poly::zero(2 * self.m);
            for a in 0..=r {
                let mut rest = cov.to_vec();
                let slot = rest.remove(a) as usize;
                acc = &acc + &self.component(&rest, con).scale(&h[slot]);
            }
            acc.scale(&norm)
        })
    }

    /// Averages the covariant slots over all orderings.
    pub fn symmetrize_covariant(&self) -> Self {
        let r = self.spec.cov;
        if r <= 1 {
            return self.clone();
        }
        FiberFunction::from_fn(self.m, self.spec.clone(), |cov, con| {
            let mut perms: Vec<Vec<u8>> = Vec::new();
            permutations(cov, &mut Vec::new(), &mut vec![false; r], &mut perms);
            let mut acc = Poly::zero(2 * self.m);
            for p in &perms {
                acc = &acc + self.component(p, con);
            }
            acc.scale(&Rational::new(1.into(), (perms.len() as i64).into()))
        })
    }

    /// Whether the covariant slots are already symmetric.
    pub fn covariant_is_symmetric(&self) -> bool {
        *self == self.symmetrize_covariant()
    }

    /// Restriction to the fiber origin: substitutes zero for every fiber
    /// coordinate. Agrees with [`project`] on fiber-constant functions but is
    /// defined for all of them.
    pub fn at_fiber_origin(&self) -> Self {
        let m = self.m;
        self.map(|p| p.substitute_zero(m..2 * m))
    }
}

fn permutations(items: &[u8], cur: &mut Vec<u8>, used: &mut Vec<bool>, out: &mut Vec<Vec<u8>>) {
    if cur.len() == items.len() {
        out.push(cur.clone());
        return;
    }
    for i in 0..items.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        cur.push(items[i]);
        permutations(items, cur, used, out);
        cur.pop();
        used[i] = false;
    }
}

/// Extends a base section to the bundle by fiber-constant continuation.
///
/// The input must not depend on the fiber coordinates; the output is the
/// equivariant function it determines.
pub fn lift(base: &FiberFunction) -> Result<FiberFunction> {
    if base.fiber_degree() > 0 {
        return Err(Error::NotFiberConstant(
            "lift input already depends on fiber coordinates".into(),
        ));
    }
    Ok(base.clone())
}

/// Reads a fiber-constant function back as a base section.
///
/// Fails with [`Error::NotFiberConstant`] when any component depends on the
/// fiber coordinates; in the quantization pipeline that signals a convention
/// or normality bug upstream.
pub fn project(f: &FiberFunction) -> Result<FiberFunction> {
    if f.fiber_degree() > 0 {
        let witness = f
            .components()
            .find(|(_, _, p)| p.degree_in(f.m..2 * f.m) > 0)
            .map(|(cov, con, p)| format!("component {cov:?}/{con:?} = {p}"))
            .unwrap_or_default();
        return Err(Error::NotFiberConstant(witness));
    }
    Ok(f.clone())
}

/// Derivative along the fundamental fiber direction of the covector `h`.
///
/// In the trivialization the fundamental field of a `g_1` element is the
/// constant coordinate field on the abelian fiber, so this is `h . d/dxi`.
pub fn fundamental_derivative(h: &[Rational], f: &FiberFunction) -> FiberFunction {
    let m = f.dim();
    assert_eq!(h.len(), m);
    f.map(|p| {
        let mut acc = Poly::zero(2 * m);
        for q in 0..m {
            acc = &acc + &p.diff(m + q).scale(&h[q]);
        }
        acc
    })
}
