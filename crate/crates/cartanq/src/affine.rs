//! Affine chart changes and pullbacks of the pipeline's objects.
//!
//! Only affine maps are supported: they compose with polynomials inside the
//! ring, and their Jacobian is constant, so density factors are a single
//! rational power `|det A|^w`. That power must itself be rational for the
//! transport to stay exact; [`AffineMap::pullback_density`] reports the
//! offending weight otherwise. Naturality of the quantization is checked
//! against these transports.

use num_traits::{One, Zero};

use crate::exact::poly::Poly;
use crate::exact::rational::{pow_rational, Rational};
use crate::fiber::FiberFunction;
use crate::geometry::ChristoffelField;
use crate::quantization::{operator_from_probes, DifferentialOperator, Weights};
use crate::{Error, Result};

/// Invertible affine chart change `x -> A x + b` with rational entries.
#[derive(Clone, Debug)]
pub struct AffineMap {
    m: usize,
    mat: Vec<Vec<Rational>>,
    shift: Vec<Rational>,
    inv: Vec<Vec<Rational>>,
    det_abs: Rational,
}

fn invert(m: usize, a: &[Vec<Rational>]) -> Option<(Vec<Vec<Rational>>, Rational)> {
    let mut work: Vec<Vec<Rational>> = a.to_vec();
    let mut inv: Vec<Vec<Rational>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    if i == j {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                })
                .collect()
        })
        .collect();
    let mut det = Rational::one();
    for col in 0..m {
        let pivot = (col..m).find(|&r| !work[r][col].is_zero())?;
        if pivot != col {
            work.swap(col, pivot);
            inv.swap(col, pivot);
            det = -det;
        }
        det *= &work[col][col];
        let p = work[col][col].recip();
        for j in 0..m {
            work[col][j] *= &p;
            inv[col][j] *= &p;
        }
        for r in 0..m {
            if r == col || work[r][col].is_zero() {
                continue;
            }
            let f = work[r][col].clone();
            for j in 0..m {
                let t = &work[col][j] * &f;
                work[r][j] -= t;
                let t = &inv[col][j] * &f;
                inv[r][j] -= t;
            }
        }
    }
    Some((inv, det))
}

impl AffineMap {
    /// Builds a map, rejecting singular matrices.
    pub fn new(m: usize, mat: Vec<Vec<Rational>>, shift: Vec<Rational>) -> Result<Self> {
        assert_eq!(mat.len(), m);
        assert!(mat.iter().all(|r| r.len() == m));
        assert_eq!(shift.len(), m);
        let (inv, det) = invert(m, &mat)
            .ok_or_else(|| Error::InvalidJob("affine map matrix is singular".into()))?;
        let det_abs = if det < Rational::zero() { -det } else { det };
        Ok(AffineMap {
            m,
            mat,
            shift,
            inv,
            det_abs,
        })
    }

    /// The inverse chart change.
    pub fn inverse(&self) -> AffineMap {
        let m = self.m;
        let shift: Vec<Rational> = (0..m)
            .map(|i| {
                let mut acc = Rational::zero();
                for j in 0..m {
                    acc -= &self.inv[i][j] * &self.shift[j];
                }
                acc
            })
            .collect();
        AffineMap {
            m,
            mat: self.inv.clone(),
            shift,
            inv: self.mat.clone(),
            det_abs: self.det_abs.recip(),
        }
    }

    /// `|det A|`.
    pub fn det_abs(&self) -> &Rational {
        &self.det_abs
    }

    fn density_factor(&self, w: &Rational) -> Result<Rational> {
        pow_rational(&self.det_abs, w).ok_or_else(|| {
            Error::InvalidJob(format!(
                "|det| = {} raised to weight {} is not rational",
                self.det_abs, w
            ))
        })
    }

    /// Substitution list realizing composition with the map (fiber variables
    /// are untouched).
    fn composition_subs(&self) -> Vec<Poly> {
        let m = self.m;
        let nv = 2 * m;
        let mut subs: Vec<Poly> = (0..nv).map(|i| Poly::var(nv, i)).collect();
        for (i, sub) in subs.iter_mut().take(m).enumerate() {
            let mut p = Poly::constant(nv, self.shift[i].clone());
            for j in 0..m {
                p = &p + &Poly::var(nv, j).scale(&self.mat[i][j]);
            }
            *sub = p;
        }
        subs
    }

    /// Pullback of a weight-`w` density component: `|det A|^w f(Ax + b)`.
    pub fn pullback_density(&self, f: &Poly, w: &Rational) -> Result<Poly> {
        let factor = self.density_factor(w)?;
        Ok(f.substitute(&self.composition_subs()).scale(&factor))
    }

    /// Pullback of a symbol section: each contravariant slot transforms by
    /// `A^{-1}`, the density factor by `|det A|^delta`.
    pub fn pullback_symbol(&self, s: &FiberFunction) -> Result<FiberFunction> {
        let m = self.m;
        assert_eq!(s.spec().cov, 0, "symbol transport only");
        let k = s.spec().contra;
        let factor = self.density_factor(&s.spec().weight)?;
        let subs = self.composition_subs();
        let tuples = crate::algebra::cov_indices(m, k);
        Ok(FiberFunction::from_fn(m, s.spec().clone(), |_, con| {
            let mut acc = Poly::zero(2 * m);
            for src in &tuples {
                let mut coeff = Rational::one();
                for (a, &out_idx) in con.iter().enumerate() {
                    coeff *= &self.inv[out_idx as usize][src[a] as usize];
                }
                if coeff.is_zero() {
                    continue;
                }
                acc = &acc + &s.component(&[], src).scale(&coeff);
            }
            acc.substitute(&subs).scale(&factor)
        }))
    }

    /// Pullback of a connection. Affine maps contribute no inhomogeneous
    /// term, so this is the pure tensor transport.
    pub fn pullback_connection(&self, g: &ChristoffelField) -> Result<ChristoffelField> {
        let m = self.m;
        assert_eq!(m, g.dim());
        let subs = self.composition_subs();
        let transported: Vec<Vec<Vec<Poly>>> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        (0..m)
                            .map(|k| {
                                let mut acc = Poly::zero(2 * m);
                                for p in 0..m {
                                    for q in 0..m {
                                        for r in 0..m {
                                            let c = &(&self.inv[i][p] * &self.mat[q][j])
                                                * &self.mat[r][k];
                                            if c.is_zero() {
                                                continue;
                                            }
                                            acc = &acc + &g.gamma(p, q, r).scale(&c);
                                        }
                                    }
                                }
                                acc.substitute(&subs)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        ChristoffelField::from_fn(m, |i, j, k| transported[i][j][k].clone())
    }

    /// Pullback of an operator: the unique operator `D'` with
    /// `D'(phi^* f) = phi^*(D f)`, recovered by probing.
    pub fn pullback_operator(&self, d: &DifferentialOperator) -> Result<DifferentialOperator> {
        let w: Weights = d.weights().clone();
        let inv = self.inverse();
        let order = d.order();
        operator_from_probes(self.m, &w, order, |g| {
            let pushed = inv.pullback_density(g, &w.lambda)?;
            self.pullback_density(&d.apply(&pushed), &w.mu)
        })
    }
}
