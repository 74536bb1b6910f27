//! Multivariate polynomials over the rationals.
//!
//! A [`Poly`] lives in a fixed variable universe of size `2m`: base chart
//! coordinates `x1..xm` at indices `0..m` followed by fiber coordinates
//! `xi1..xim` at indices `m..2m`. The universe is fixed when the engine is
//! constructed from the chart dimension; mixing universes is a programming
//! error and panics rather than being a runtime case.
//!
//! Terms are kept in a `BTreeMap` keyed by exponent vectors with no zero
//! coefficients stored, so equality is structural and iteration order (and
//! hence printing) is canonical.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::rational::Rational;

/// Sparse multivariate polynomial with rational coefficients.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl Poly {
    /// The zero polynomial in `nvars` variables.
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    /// The constant polynomial `c`.
    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Poly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    /// The constant polynomial `1`.
    pub fn one(nvars: usize) -> Self {
        Poly::constant(nvars, Rational::one())
    }

    /// The variable with the given index.
    pub fn var(nvars: usize, idx: usize) -> Self {
        assert!(idx < nvars, "variable index {idx} out of universe {nvars}");
        let mut e = vec![0; nvars];
        e[idx] = 1;
        let mut p = Poly::zero(nvars);
        p.terms.insert(e, Rational::one());
        p
    }

    /// A single term `c * prod_i v_i^{e_i}`.
    pub fn monomial(nvars: usize, exps: &[u32], c: Rational) -> Self {
        assert_eq!(exps.len(), nvars, "exponent vector length mismatch");
        let mut p = Poly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(exps.to_vec(), c);
        }
        p
    }

    /// Number of variables in the universe.
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Whether this is the zero polynomial.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant value, if the polynomial has degree zero.
    pub fn constant_value(&self) -> Option<Rational> {
        if self.terms.is_empty() {
            return Some(Rational::zero());
        }
        if self.terms.len() == 1 {
            let (e, c) = self.terms.iter().next().unwrap();
            if e.iter().all(|&x| x == 0) {
                return Some(c.clone());
            }
        }
        None
    }

    /// Iterates over `(exponents, coefficient)` pairs in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &Rational)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    /// Total degree, or 0 for the zero polynomial.
    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Maximal total degree in the variables `vars`; 0 if none occur.
    pub fn degree_in(&self, vars: std::ops::Range<usize>) -> u32 {
        self.terms
            .keys()
            .map(|e| e[vars.clone()].iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    fn assert_same_universe(&self, other: &Poly) {
        assert_eq!(
            self.nvars, other.nvars,
            "polynomials from different variable universes"
        );
    }

    fn insert_term(&mut self, e: Vec<u32>, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Multiplies by a rational scalar.
    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    /// Formal partial derivative with respect to variable `idx`.
    pub fn diff(&self, idx: usize) -> Poly {
        assert!(idx < self.nvars, "variable index out of universe");
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            let k = e[idx];
            if k == 0 {
                continue;
            }
            let mut ne = e.clone();
            ne[idx] = k - 1;
            out.insert_term(ne, c * Rational::from_integer(k.into()));
        }
        out
    }

    /// `self^n` by repeated multiplication.
    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one(self.nvars);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Evaluates at a rational point (one value per variable).
    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.nvars);
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    t *= &point[i];
                }
            }
            acc += t;
        }
        acc
    }

    /// Sets every variable in `vars` to zero, dropping the terms that
    /// contain them.
    pub fn substitute_zero(&self, vars: std::ops::Range<usize>) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e[vars.clone()].iter().all(|&k| k == 0))
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// Substitutes `subs[i]` for variable `i`; all must share one universe.
    pub fn substitute(&self, subs: &[Poly]) -> Poly {
        assert_eq!(subs.len(), self.nvars);
        let nv = if subs.is_empty() {
            self.nvars
        } else {
            subs[0].nvars
        };
        let mut acc = Poly::zero(nv);
        for (e, c) in &self.terms {
            let mut t = Poly::constant(nv, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = &t * &subs[i].pow(k);
                }
            }
            acc = &acc + &t;
        }
        acc
    }

    fn var_name(&self, idx: usize) -> String {
        let m = self.nvars / 2;
        if idx < m {
            format!("x{}", idx + 1)
        } else {
            format!("xi{}", idx - m + 1)
        }
    }

    fn fmt_term(&self, e: &[u32], c: &Rational, out: &mut String) {
        let mut factors: Vec<String> = Vec::new();
        let abs = c.abs();
        if !abs.is_one() || e.iter().all(|&k| k == 0) {
            factors.push(abs.to_string());
        }
        for (i, &k) in e.iter().enumerate() {
            if k == 1 {
                factors.push(self.var_name(i));
            } else if k > 1 {
                factors.push(format!("{}^{}", self.var_name(i), k));
            }
        }
        out.push_str(&factors.join("*"));
    }
}

impl fmt::Display for Poly {
    /// Canonical rendering: terms sorted by total degree descending, then by
    /// exponent vector descending. Re-parses to the identical polynomial.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut entries: Vec<(&Vec<u32>, &Rational)> = self.terms.iter().collect();
        entries.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then_with(|| b.0.cmp(a.0))
        });
        let mut s = String::new();
        for (i, (e, c)) in entries.iter().enumerate() {
            if i == 0 {
                if c.is_negative() {
                    s.push('-');
                }
            } else if c.is_negative() {
                s.push_str(" - ");
            } else {
                s.push_str(" + ");
            }
            self.fmt_term(e, c, &mut s);
        }
        write!(f, "{s}")
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        self.assert_same_universe(rhs);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.insert_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self.assert_same_universe(rhs);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.insert_term(e.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    // exponent vectors add when monomials multiply
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: &Poly) -> Poly {
        self.assert_same_universe(rhs);
        let mut out = Poly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.insert_term(e, ca * cb);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), -c.clone()))
                .collect(),
        }
    }
}

/// Float evaluation, for use by numeric test oracles only; the quantization
/// pipeline itself never leaves the rationals.
pub fn eval_f64(p: &Poly, point: &[f64]) -> f64 {
    assert_eq!(point.len(), p.nvars());
    let mut acc = 0.0;
    for (e, c) in p.terms() {
        let mut t = c.to_f64().expect("rational out of f64 range");
        for (i, &k) in e.iter().enumerate() {
            t *= point[i].powi(k as i32);
        }
        acc += t;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::super::rational::{int, rat};
    use super::*;

    fn x(i: usize) -> Poly {
        Poly::var(4, i)
    }

    #[test]
    fn add_cancels() {
        // (x1 + 1) + (x1 - 1) = 2 x1
        let a = &x(0) + &Poly::one(4);
        let b = &x(0) - &Poly::one(4);
        assert_eq!(&a + &b, x(0).scale(&int(2)));
    }

    #[test]
    fn mul_by_zero_annihilates() {
        let p = &(&x(0) + &x(3)) * &x(1);
        assert_eq!(&p * &Poly::zero(4), Poly::zero(4));
    }

    #[test]
    fn binomial_square() {
        // (x1 + xi2)^2 = x1^2 + 2 x1 xi2 + xi2^2  (xi2 has index 3 when m = 2)
        let s = (&x(0) + &x(3)).pow(2);
        let expect = &(&x(0) * &x(0)) + &(&(&x(0) * &x(3)).scale(&int(2)) + &(&x(3) * &x(3)));
        assert_eq!(s, expect);
    }

    #[test]
    fn partial_derivatives() {
        // d/dx1 (x1^2 x2) = 2 x1 x2
        let p = &(&x(0) * &x(0)) * &x(1);
        assert_eq!(p.diff(0), (&x(0) * &x(1)).scale(&int(2)));
        // d/dxi1 (x1) = 0
        assert_eq!(x(0).diff(2), Poly::zero(4));
        // d/dx2 (x1 xi2 + x2^2) = 2 x2
        let q = &(&x(0) * &x(3)) + &(&x(1) * &x(1));
        assert_eq!(q.diff(1), x(1).scale(&int(2)));
    }

    #[test]
    fn display_is_canonical() {
        let p = &(&x(0) * &x(0)) - &(&x(1).scale(&rat(3, 2)) + &Poly::one(4));
        assert_eq!(p.to_string(), "x1^2 - 3/2*x2 - 1");
        assert_eq!(Poly::zero(4).to_string(), "0");
    }

    #[test]
    fn substitution_composes() {
        // p(x1, x2) = x1 * x2; substitute x1 -> x2 + 1
        let p = &x(0) * &x(1);
        let mut subs: Vec<Poly> = (0..4).map(|i| Poly::var(4, i)).collect();
        subs[0] = &x(1) + &Poly::one(4);
        let q = p.substitute(&subs);
        assert_eq!(q, &(&x(1) * &x(1)) + &x(1));
    }

    #[test]
    #[should_panic(expected = "different variable universes")]
    fn universe_mixing_panics() {
        let _ = &Poly::var(4, 0) + &Poly::var(6, 0);
    }
}
