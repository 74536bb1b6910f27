//! The graded Lie algebra `g = g_{-1} + g_0 + g_1 = R^m + gl(m,R) + R^{m*}`
//! underlying projective geometry in dimension `m`, together with the value
//! spaces (weighted symmetric tensors) it acts on.
//!
//! Brackets are computed through `(m+1) x (m+1)` matrix representatives with
//! vanishing last diagonal entry,
//!
//! ```text
//!   (v, A, xi)  <->  [ A  v ]
//!                    [ xi 0 ]
//! ```
//!
//! and the commutator is decomposed back through `[(A v; xi a)] -> (v, A - a*Id, xi)`.
//! Since the identity is central, the result does not depend on the chosen
//! representative, so this realizes the quotient algebra without any coset
//! arithmetic. The same machinery is reused with polynomial entries by the
//! curvature and frame computations.

use num_traits::Zero;

use crate::exact::poly::Poly;
use crate::exact::rational::Rational;

/// Graded element with polynomial entries.
///
/// Used wherever connection or fiber data enters the bracket: entries are
/// then polynomials on the chart (and fiber), not constants.
#[derive(Clone, PartialEq, Debug)]
pub struct GradedPoly {
    /// Chart dimension.
    pub m: usize,
    /// `g_{-1}` part, a vector.
    pub v: Vec<Poly>,
    /// `g_0` part, an `m x m` matrix (row major).
    pub a: Vec<Vec<Poly>>,
    /// `g_1` part, a covector.
    pub xi: Vec<Poly>,
}

impl GradedPoly {
    /// The zero element.
    pub fn zero(m: usize) -> Self {
        let nv = 2 * m;
        GradedPoly {
            m,
            v: vec![Poly::zero(nv); m],
            a: vec![vec![Poly::zero(nv); m]; m],
            xi: vec![Poly::zero(nv); m],
        }
    }

    fn embed(&self) -> Vec<Vec<Poly>> {
        let n = self.m + 1;
        let nv = 2 * self.m;
        let mut mat = vec![vec![Poly::zero(nv); n]; n];
        for i in 0..self.m {
            for j in 0..self.m {
                mat[i][j] = self.a[i][j].clone();
            }
            mat[i][self.m] = self.v[i].clone();
            mat[self.m][i] = self.xi[i].clone();
        }
        mat
    }

    fn decompose(m: usize, mat: Vec<Vec<Poly>>) -> GradedPoly {
        let mut out = GradedPoly::zero(m);
        let trace_part = mat[m][m].clone();
        for i in 0..m {
            for j in 0..m {
                out.a[i][j] = if i == j {
                    &mat[i][j] - &trace_part
                } else {
                    mat[i][j].clone()
                };
            }
            out.v[i] = mat[i][m].clone();
            out.xi[i] = mat[m][i].clone();
        }
        out
    }

    /// Lie bracket `[self, other]` via matrix commutator of representatives.
    pub fn bracket(&self, other: &GradedPoly) -> GradedPoly {
        assert_eq!(self.m, other.m, "bracket of elements with different m");
        let (x, y) = (self.embed(), other.embed());
        let n = self.m + 1;
        let nv = 2 * self.m;
        let mut comm = vec![vec![Poly::zero(nv); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = Poly::zero(nv);
                for k in 0..n {
                    acc = &acc + &(&x[i][k] * &y[k][j]);
                    acc = &acc - &(&y[i][k] * &x[k][j]);
                }
                comm[i][j] = acc;
            }
        }
        GradedPoly::decompose(self.m, comm)
    }

    /// Componentwise sum.
    pub fn add(&self, other: &GradedPoly) -> GradedPoly {
        assert_eq!(self.m, other.m);
        let mut out = self.clone();
        for i in 0..self.m {
            out.v[i] = &out.v[i] + &other.v[i];
            out.xi[i] = &out.xi[i] + &other.xi[i];
            for j in 0..self.m {
                out.a[i][j] = &out.a[i][j] + &other.a[i][j];
            }
        }
        out
    }

    /// Componentwise rescale.
    pub fn scale(&self, c: &Rational) -> GradedPoly {
        let mut out = self.clone();
        for i in 0..self.m {
            out.v[i] = out.v[i].scale(c);
            out.xi[i] = out.xi[i].scale(c);
            for j in 0..self.m {
                out.a[i][j] = out.a[i][j].scale(c);
            }
        }
        out
    }

    /// True when every component is the zero polynomial.
    pub fn is_zero(&self) -> bool {
        self.v.iter().all(Poly::is_zero)
            && self.xi.iter().all(Poly::is_zero)
            && self.a.iter().flatten().all(Poly::is_zero)
    }
}

/// Graded element with rational entries.
#[derive(Clone, PartialEq, Debug)]
pub struct GradedElement {
    /// Chart dimension.
    pub m: usize,
    /// `g_{-1}` part.
    pub v: Vec<Rational>,
    /// `g_0` part, row major.
    pub a: Vec<Vec<Rational>>,
    /// `g_1` part.
    pub xi: Vec<Rational>,
}

impl GradedElement {
    /// The zero element.
    pub fn zero(m: usize) -> Self {
        GradedElement {
            m,
            v: vec![Rational::zero(); m],
            a: vec![vec![Rational::zero(); m]; m],
            xi: vec![Rational::zero(); m],
        }
    }

    /// Basis vector `e_j` of `g_{-1}`.
    pub fn basis_vector(m: usize, j: usize) -> Self {
        let mut e = GradedElement::zero(m);
        e.v[j] = Rational::from_integer(1.into());
        e
    }

    /// Dual basis covector `eps^j` of `g_1`.
    pub fn basis_covector(m: usize, j: usize) -> Self {
        let mut e = GradedElement::zero(m);
        e.xi[j] = Rational::from_integer(1.into());
        e
    }

    /// Matrix unit `E_{ij}` of `g_0`.
    pub fn basis_matrix(m: usize, i: usize, j: usize) -> Self {
        let mut e = GradedElement::zero(m);
        e.a[i][j] = Rational::from_integer(1.into());
        e
    }

    /// Promotes entries to constant polynomials.
    pub fn to_poly(&self) -> GradedPoly {
        let nv = 2 * self.m;
        let mut out = GradedPoly::zero(self.m);
        for i in 0..self.m {
            out.v[i] = Poly::constant(nv, self.v[i].clone());
            out.xi[i] = Poly::constant(nv, self.xi[i].clone());
            for j in 0..self.m {
                out.a[i][j] = Poly::constant(nv, self.a[i][j].clone());
            }
        }
        out
    }

    /// Lie bracket `[self, other]`.
    pub fn bracket(&self, other: &GradedElement) -> GradedElement {
        let b = self.to_poly().bracket(&other.to_poly());
        let back = |p: &Poly| p.constant_value().expect("constant bracket entry");
        GradedElement {
            m: self.m,
            v: b.v.iter().map(back).collect(),
            a: b.a.iter().map(|r| r.iter().map(back).collect()).collect(),
            xi: b.xi.iter().map(back).collect(),
        }
    }

    /// Componentwise sum.
    pub fn add(&self, other: &GradedElement) -> GradedElement {
        assert_eq!(self.m, other.m);
        let mut out = self.clone();
        for i in 0..self.m {
            out.v[i] += &other.v[i];
            out.xi[i] += &other.xi[i];
            for j in 0..self.m {
                out.a[i][j] += &other.a[i][j];
            }
        }
        out
    }

    /// True when all entries vanish.
    pub fn is_zero(&self) -> bool {
        self.v.iter().all(Zero::is_zero)
            && self.xi.iter().all(Zero::is_zero)
            && self.a.iter().flatten().all(Zero::is_zero)
    }
}

/// Identifies a weighted symmetric tensor value space.
///
/// `contra` counts symmetric contravariant slots (symbols), `cov` counts
/// covariant slots (iterated derivatives), and `weight` is the density
/// weight. Scalars of weight `w` are `(0, 0, w)`.
#[derive(Clone, PartialEq, Debug)]
pub struct ValueSpec {
    /// Symmetric contravariant degree.
    pub contra: usize,
    /// Covariant degree.
    pub cov: usize,
    /// Density weight.
    pub weight: Rational,
}

impl ValueSpec {
    /// Scalar densities of weight `w`.
    pub fn density(w: Rational) -> Self {
        ValueSpec {
            contra: 0,
            cov: 0,
            weight: w,
        }
    }

    /// Degree-`k` symbols of weight `w`.
    pub fn symbol(k: usize, w: Rational) -> Self {
        ValueSpec {
            contra: k,
            cov: 0,
            weight: w,
        }
    }

    /// Covariant degree-`k` tensors of weight `w`.
    pub fn covariant(k: usize, w: Rational) -> Self {
        ValueSpec {
            contra: 0,
            cov: k,
            weight: w,
        }
    }
}

/// All sorted contravariant multi-indices of length `k` over `0..m`.
pub fn contra_indices(m: usize, k: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(m: usize, k: usize, start: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..m {
            cur.push(v as u8);
            rec(m, k, v, cur, out);
            cur.pop();
        }
    }
    rec(m, k, 0, &mut cur, &mut out);
    out
}

/// All covariant index tuples of length `k` over `0..m`, in lexical order.
pub fn cov_indices(m: usize, k: usize) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::with_capacity(out.len() * m);
        for t in &out {
            for v in 0..m {
                let mut u = t.clone();
                u.push(v as u8);
                next.push(u);
            }
        }
        out = next;
    }
    out
}

/// Number of distinct orderings of a sorted multi-index.
pub fn orderings(multi: &[u8]) -> Rational {
    let mut fact = Rational::from_integer(1.into());
    for n in 1..=multi.len() {
        fact *= Rational::from_integer((n as i64).into());
    }
    let mut i = 0;
    while i < multi.len() {
        let mut j = i;
        while j < multi.len() && multi[j] == multi[i] {
            j += 1;
        }
        let mut group = Rational::from_integer(1.into());
        for n in 1..=(j - i) {
            group *= Rational::from_integer((n as i64).into());
        }
        fact /= group;
        i = j;
    }
    fact
}

/// Enumerates the component basis of a value spec as `(cov, contra)` keys.
pub fn component_keys(m: usize, spec: &ValueSpec) -> Vec<(Vec<u8>, Vec<u8>)> {
    let mut out = Vec::new();
    for cov in cov_indices(m, spec.cov) {
        for con in contra_indices(m, spec.contra) {
            out.push((cov.clone(), con));
        }
    }
    out
}

/// Derived action of `h = g_0 + g_1` on a value spec, as a matrix over the
/// basis from [`component_keys`].
///
/// The `g_0` part acts naturally on the tensor slots and by `-weight * tr`
/// on the density factor; the `g_1` part acts as zero; the `g_{-1}` part is
/// ignored (it does not belong to the isotropy algebra).
pub fn rho_star(h: &GradedElement, spec: &ValueSpec) -> Vec<Vec<Rational>> {
    let m = h.m;
    let keys = component_keys(m, spec);
    let pos: std::collections::BTreeMap<&(Vec<u8>, Vec<u8>), usize> =
        keys.iter().zip(0..).collect();
    let n = keys.len();
    let mut mat = vec![vec![Rational::zero(); n]; n];
    let trace: Rational = (0..m).map(|i| h.a[i][i].clone()).sum();
    // Gather per output component: the component formula reads
    //   out[cov, con] = -w tr(A) in[cov, con]
    //                 + sum_{a, p} A^{con_a}_p in[cov, con: a -> p]
    //                 - sum_{b, p} A^p_{cov_b} in[cov: b -> p, con]
    // evaluated on the sorted contravariant representative.
    for (row, (cov, con)) in keys.iter().enumerate() {
        let mut add = |cov_k: Vec<u8>, con_k: Vec<u8>, val: Rational| {
            if val.is_zero() {
                return;
            }
            let mut sorted = con_k;
            sorted.sort_unstable();
            let col = pos[&(cov_k, sorted)];
            mat[row][col] += val;
        };
        add(cov.clone(), con.clone(), -(&spec.weight * &trace));
        for a in 0..con.len() {
            let v = con[a] as usize;
            for p in 0..m {
                let mut nc = con.clone();
                nc[a] = p as u8;
                add(cov.clone(), nc, h.a[v][p].clone());
            }
        }
        for b in 0..cov.len() {
            let u = cov[b] as usize;
            for p in 0..m {
                let mut t = cov.clone();
                t[b] = p as u8;
                add(t, con.clone(), -h.a[p][u].clone());
            }
        }
    }
    mat
}

/// Matrix product helper for endomorphisms returned by [`rho_star`].
pub fn endo_mul(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let n = a.len();
    let mut out = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                out[i][j] += &a[i][k] * &b[k][j];
            }
        }
    }
    out
}
