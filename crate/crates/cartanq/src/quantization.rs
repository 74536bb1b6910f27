//! Coefficient tables, the quantization map, differential operators and the
//! flat equivariance oracle.
//!
//! For a symbol of degree `k` the quantization is the projected combination
//!
//! ```text
//!   Q(S)(f) = project( sum_l C_{k,l} < div^l S~ , nabla_s^{k-l} f~ > )
//! ```
//!
//! with lifted arguments and coefficients built from the obstruction values
//!
//! ```text
//!   gamma(m, k, l, delta) = (m + 2k - l - (m+1) delta) / (m + 1)
//! ```
//!
//! through the recurrence
//! `C_l l (m + 2k - l - (m+1)d) = C_{l-1} (k-l+1) ((m+1)L + k - l)`,
//! anchored at `C_0 = 1`. The closed product form is kept alongside as a
//! cross-check. At critical shifts the table either survives with a zeroed
//! tail (when the weight sits on the admissible ladder) or no equivariant
//! quantization exists at all.
//!
//! Operators are recovered from the pipeline by probing the monomial basis:
//! with exact coefficients the triangular extraction is lossless, and probing
//! one degree above the order certifies the order bound.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::algebra::ValueSpec;
use crate::calculus::{divergence_with, invariant_derivative_with, pairing, OmegaRealization};
use crate::exact::poly::Poly;
use crate::exact::rational::{int, Rational};
use crate::fiber::{lift, project, FiberFunction};
use crate::geometry::{normal_cartan, ChristoffelField};
use crate::{Error, Result};

/// Source and target density weights.
#[derive(Clone, PartialEq, Debug)]
pub struct Weights {
    /// Weight of the argument densities.
    pub lambda: Rational,
    /// Weight of the value densities.
    pub mu: Rational,
}

impl Weights {
    /// Builds a weight pair.
    pub fn new(lambda: Rational, mu: Rational) -> Self {
        Weights { lambda, mu }
    }

    /// The shift `delta = mu - lambda`.
    pub fn delta(&self) -> Rational {
        &self.mu - &self.lambda
    }
}

/// The obstruction value `gamma(m, k, l, delta)`; its vanishing is what makes
/// a shift critical.
pub fn gamma_value(m: usize, k: usize, l: usize, delta: &Rational) -> Rational {
    assert!(m >= 2, "needs chart dimension >= 2");
    assert!(l >= 1 && l <= k, "needs 1 <= l <= k");
    let num = int((m + 2 * k - l) as i64) - int(m as i64 + 1) * delta;
    num / int(m as i64 + 1)
}

/// All pairs `(k, l)` with `1 <= l <= k <= k_max` whose obstruction value
/// vanishes at the given shift.
pub fn critical_pairs(m: usize, k_max: usize, delta: &Rational) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for k in 1..=k_max {
        for l in 1..=k {
            if gamma_value(m, k, l, delta).is_zero() {
                out.push((k, l));
            }
        }
    }
    out
}

/// Coefficients of the order-`k` quantization together with the obstruction
/// values they were built from.
#[derive(Clone, PartialEq, Debug)]
pub struct CoefficientTable {
    /// Chart dimension.
    pub m: usize,
    /// Symbol degree.
    pub k: usize,
    /// Coefficients `C_{k,0} ..= C_{k,k}`.
    pub c: Vec<Rational>,
    /// Obstruction values for `l = 1 ..= k`.
    pub gammas: Vec<Rational>,
    /// Critical `(k, l)` pairs seen at this order.
    pub critical: Vec<(usize, usize)>,
    /// First zeroed coefficient index when the rescue rule was applied.
    pub zeroed_from: Option<usize>,
}

/// Builds the coefficient table by the recurrence. Fails with
/// [`Error::CriticalDelta`] when the shift is critical at this order.
pub fn coefficient_table(m: usize, k: usize, w: &Weights) -> Result<CoefficientTable> {
    let delta = w.delta();
    let gammas: Vec<Rational> = (1..=k).map(|l| gamma_value(m, k, l, &delta)).collect();
    let pairs: Vec<(usize, usize)> = (1..=k)
        .filter(|&l| gammas[l - 1].is_zero())
        .map(|l| (k, l))
        .collect();
    if !pairs.is_empty() {
        return Err(Error::CriticalDelta { k, pairs });
    }
    let mut c = vec![Rational::one()];
    for l in 1..=k {
        let num = &c[l - 1]
            * int((k - l + 1) as i64)
            * (int(m as i64 + 1) * &w.lambda + int((k - l) as i64));
        let den = int(l as i64) * int(m as i64 + 1) * &gammas[l - 1];
        c.push(num / den);
    }
    Ok(CoefficientTable {
        m,
        k,
        c,
        gammas,
        critical: Vec::new(),
        zeroed_from: None,
    })
}

/// Closed product form of a coefficient; only valid away from critical
/// shifts. Kept as an independent cross-check of the recurrence.
pub fn coefficient_closed_form(m: usize, k: usize, l: usize, w: &Weights) -> Rational {
    let delta = w.delta();
    let mut num = Rational::one();
    let mut den = Rational::one();
    for j in 1..=l {
        num *= &w.lambda + Rational::new(((k - j) as i64).into(), (m as i64 + 1).into());
        den *= gamma_value(m, k, j, &delta);
    }
    // binomial(k, l)
    let mut binom = Rational::one();
    for j in 0..l {
        binom *= int((k - j) as i64);
        binom /= int(j as i64 + 1);
    }
    num / den * binom
}

/// Result of attempting the critical-case rescue.
#[derive(Clone, PartialEq, Debug)]
pub enum RescueOutcome {
    /// A table with a zeroed tail that still yields an equivariant map.
    Rescued(CoefficientTable),
    /// No equivariant quantization exists for these weights; carries the
    /// admissible weight values that would have allowed a rescue.
    NoExistence {
        /// The argument weights that admit a rescue at this order.
        admissible_lambdas: Vec<Rational>,
    },
}

/// Critical-case handling: zeroes the coefficient tail when the argument
/// weight sits on the admissible ladder, and reports non-existence otherwise.
///
/// With a non-critical shift this degenerates to the plain table.
pub fn rescue_table(m: usize, k: usize, w: &Weights) -> RescueOutcome {
    let delta = w.delta();
    let gammas: Vec<Rational> = (1..=k).map(|l| gamma_value(m, k, l, &delta)).collect();
    let criticals: Vec<usize> = (1..=k).filter(|&l| gammas[l - 1].is_zero()).collect();
    let r = match criticals.as_slice() {
        [] => {
            return RescueOutcome::Rescued(coefficient_table(m, k, w).expect("non-critical table"))
        }
        [r] => *r,
        _ => unreachable!("at most one l can be critical for fixed k and delta"),
    };
    // The rescue index i solves lambda = -(k - i)/(m + 1), i.e.
    // i = k + (m+1) lambda; it must be an integer in 1..=r.
    let i_rat = int(k as i64) + int(m as i64 + 1) * &w.lambda;
    let admissible: Vec<Rational> = (1..=r)
        .map(|i| -Rational::new(((k - i) as i64).into(), (m as i64 + 1).into()))
        .collect();
    let i = if i_rat.is_integer() && i_rat.is_positive() {
        let v = i_rat.to_integer();
        match usize::try_from(&v) {
            Ok(v) if (1..=r).contains(&v) => v,
            _ => {
                return RescueOutcome::NoExistence {
                    admissible_lambdas: admissible,
                }
            }
        }
    } else {
        return RescueOutcome::NoExistence {
            admissible_lambdas: admissible,
        };
    };
    let mut c = vec![Rational::one()];
    for l in 1..i {
        let num = &c[l - 1]
            * int((k - l + 1) as i64)
            * (int(m as i64 + 1) * &w.lambda + int((k - l) as i64));
        let den = int(l as i64) * int(m as i64 + 1) * &gammas[l - 1];
        c.push(num / den);
    }
    c.resize(k + 1, Rational::zero());
    RescueOutcome::Rescued(CoefficientTable {
        m,
        k,
        c,
        gammas,
        critical: vec![(k, r)],
        zeroed_from: Some(i),
    })
}

/// The table to quantize with: plain when possible, rescued when critical,
/// [`Error::NoExistence`] when neither applies.
pub fn table_for(m: usize, k: usize, w: &Weights) -> Result<CoefficientTable> {
    match coefficient_table(m, k, w) {
        Ok(t) => Ok(t),
        Err(Error::CriticalDelta { .. }) => match rescue_table(m, k, w) {
            RescueOutcome::Rescued(t) => Ok(t),
            RescueOutcome::NoExistence { admissible_lambdas } => Err(Error::NoExistence(format!(
                "critical shift at order {k} and lambda off the admissible set {admissible_lambdas:?}"
            ))),
        },
        Err(e) => Err(e),
    }
}

/// Differential operator from weight-`lambda` densities to weight-`mu`
/// densities, stored as polynomial coefficients per derivative multi-index.
#[derive(Clone, PartialEq, Debug)]
pub struct DifferentialOperator {
    m: usize,
    order: usize,
    weights: Weights,
    coeffs: BTreeMap<Vec<u32>, Poly>,
}

impl DifferentialOperator {
    /// Builds from a coefficient map, dropping zero entries.
    pub fn new(m: usize, order: usize, weights: Weights, coeffs: BTreeMap<Vec<u32>, Poly>) -> Self {
        let coeffs: BTreeMap<Vec<u32>, Poly> = coeffs
            .into_iter()
            .filter(|(a, p)| {
                assert_eq!(a.len(), m);
                assert!(
                    a.iter().sum::<u32>() as usize <= order,
                    "order bound violated"
                );
                !p.is_zero()
            })
            .collect();
        DifferentialOperator {
            m,
            order,
            weights,
            coeffs,
        }
    }

    /// Chart dimension.
    pub fn dim(&self) -> usize {
        self.m
    }

    /// Declared order bound.
    pub fn order(&self) -> usize {
        self.order
    }

    /// The weights this operator maps between.
    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    /// Coefficient at a derivative multi-index (zero when absent).
    pub fn coefficient(&self, alpha: &[u32]) -> Poly {
        self.coeffs
            .get(alpha)
            .cloned()
            .unwrap_or_else(|| Poly::zero(2 * self.m))
    }

    /// Iterates `(multi-index, coefficient)` pairs in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &Poly)> {
        self.coeffs.iter().map(|(a, p)| (a.as_slice(), p))
    }

    /// Applies the operator to a polynomial density component.
    pub fn apply(&self, f: &Poly) -> Poly {
        let mut acc = Poly::zero(2 * self.m);
        for (alpha, c) in &self.coeffs {
            let mut d = f.clone();
            for (i, &e) in alpha.iter().enumerate() {
                for _ in 0..e {
                    d = d.diff(i);
                }
            }
            acc = &acc + &(c * &d);
        }
        acc
    }
}

/// All multi-indices over `m` variables with total degree `<= max_deg`,
/// ordered by degree then lexicographically.
pub fn multi_indices(m: usize, max_deg: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for deg in 0..=max_deg {
        let mut cur = vec![0u32; m];
        fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if pos + 1 == cur.len() {
                cur[pos] = left;
                out.push(cur.clone());
                return;
            }
            for take in (0..=left).rev() {
                cur[pos] = take;
                rec(pos + 1, left - take, cur, out);
            }
        }
        rec(0, deg as u32, &mut cur, &mut out);
    }
    out
}

/// The monomial `x^beta` in the full variable universe.
pub fn base_monomial(m: usize, beta: &[u32]) -> Poly {
    let mut exps = beta.to_vec();
    exps.resize(2 * m, 0);
    Poly::monomial(2 * m, &exps, Rational::one())
}

fn factorial(n: u32) -> Rational {
    let mut acc = Rational::one();
    for i in 1..=n {
        acc *= int(i as i64);
    }
    acc
}

fn multi_factorial(beta: &[u32]) -> Rational {
    beta.iter().map(|&b| factorial(b)).product()
}

fn falling(beta: &[u32], alpha: &[u32]) -> Rational {
    beta.iter()
        .zip(alpha)
        .map(|(&b, &a)| factorial(b) / factorial(b - a))
        .product()
}

/// Recovers a differential operator of order `<= order` from its values on
/// the monomial basis.
///
/// Probes every `x^beta` with `|beta| <= order + 1`; the extra degree
/// certifies that nothing of higher order is present (an
/// [`Error::Internal`] otherwise).
pub fn operator_from_probes(
    m: usize,
    w: &Weights,
    order: usize,
    mut probe: impl FnMut(&Poly) -> Result<Poly>,
) -> Result<DifferentialOperator> {
    let mut coeffs: BTreeMap<Vec<u32>, Poly> = BTreeMap::new();
    for beta in multi_indices(m, order + 1) {
        let mut rem = probe(&base_monomial(m, &beta))?;
        for (alpha, c) in &coeffs {
            if alpha.iter().zip(&beta).all(|(a, b)| a <= b) {
                let shift: Vec<u32> = beta.iter().zip(alpha).map(|(b, a)| b - a).collect();
                let term = c * &base_monomial(m, &shift);
                rem = &rem - &term.scale(&falling(&beta, alpha));
            }
        }
        let c_beta = rem.scale(&multi_factorial(&beta).recip());
        let deg: u32 = beta.iter().sum();
        if deg as usize > order {
            if !c_beta.is_zero() {
                return Err(Error::Internal(format!(
                    "operator extraction found order {deg} content at index {beta:?}"
                )));
            }
        } else if !c_beta.is_zero() {
            coeffs.insert(beta, c_beta);
        }
    }
    Ok(DifferentialOperator::new(m, order, w.clone(), coeffs))
}

fn validate_symbol(s: &FiberFunction, w: &Weights) -> Result<usize> {
    if s.spec().cov != 0 {
        return Err(Error::InvalidJob(
            "symbol must be purely contravariant".into(),
        ));
    }
    if s.spec().weight != w.delta() {
        return Err(Error::InvalidJob(format!(
            "symbol weight {} does not match shift {}",
            s.spec().weight,
            w.delta()
        )));
    }
    Ok(s.spec().contra)
}

/// How the fiber-valued combination is read back to the chart.
enum Readout {
    /// Demand fiber-constancy; fails when the combination is not
    /// equivariant. This is the quantization contract.
    Project,
    /// Evaluate at the fiber origin. Agrees with `Project` for tables
    /// satisfying the recurrence; for arbitrary tables it yields the
    /// classical flat-formula operator so equivariance defects become
    /// measurable instead of aborting.
    FiberOrigin,
}

fn assemble_operator(
    g: &ChristoffelField,
    s: &FiberFunction,
    w: &Weights,
    table: &CoefficientTable,
    readout: Readout,
) -> Result<DifferentialOperator> {
    let m = g.dim();
    let k = validate_symbol(s, w)?;
    assert_eq!(table.k, k, "table order mismatch");
    assert_eq!(table.m, m, "table dimension mismatch");
    let nc = normal_cartan(g)?;
    let om = OmegaRealization::new(&nc);
    let s_lift = lift(s)?;
    let mut div_side = vec![s_lift];
    for l in 1..=k {
        div_side.push(divergence_with(&div_side[l - 1], &om)?);
    }
    let probe = |fp: &Poly| -> Result<Poly> {
        let f = FiberFunction::from_fn(m, ValueSpec::density(w.lambda.clone()), |_, _| fp.clone());
        let mut nabla_side = vec![lift(&f)?];
        for r in 1..=k {
            nabla_side.push(invariant_derivative_with(&nabla_side[r - 1], &om));
        }
        let mut total = FiberFunction::zero(m, ValueSpec::density(w.mu.clone()));
        for l in 0..=k {
            if table.c[l].is_zero() {
                continue;
            }
            let term = pairing(&div_side[l], &nabla_side[k - l].symmetrize_covariant())?;
            total = total.add(&term.scale(&table.c[l]));
        }
        let read = match readout {
            Readout::Project => project(&total)?,
            Readout::FiberOrigin => total.at_fiber_origin(),
        };
        Ok(read.component(&[], &[]).clone())
    };
    operator_from_probes(m, w, k, probe)
}

/// Quantization with an explicitly supplied coefficient table.
///
/// Used by the mutation tests; [`quantize`] builds the table itself.
pub fn quantize_with_table(
    g: &ChristoffelField,
    s: &FiberFunction,
    w: &Weights,
    table: &CoefficientTable,
) -> Result<DifferentialOperator> {
    assemble_operator(g, s, w, table, Readout::Project)
}

/// The flat-chart operator of an arbitrary coefficient table, read off at the
/// fiber origin.
///
/// For a table satisfying the recurrence this coincides with
/// [`quantize_with_table`] on the flat connection; for any other table it is
/// the combination the classical flat formula would produce, whose
/// equivariance defect the residual probes can then measure.
pub fn flat_operator_with_table(
    s: &FiberFunction,
    w: &Weights,
    table: &CoefficientTable,
) -> Result<DifferentialOperator> {
    let flat = ChristoffelField::flat(s.dim())?;
    assemble_operator(&flat, s, w, table, Readout::FiberOrigin)
}

/// The quantization map: builds the (possibly rescued) coefficient table and
/// assembles the operator for a degree-`k` symbol.
///
/// The returned operator has order at most `k` and principal symbol equal to
/// the input, both certified by the probing extraction.
pub fn quantize(
    g: &ChristoffelField,
    s: &FiberFunction,
    w: &Weights,
) -> Result<DifferentialOperator> {
    let k = validate_symbol(s, w)?;
    let table = table_for(g.dim(), k, w)?;
    quantize_with_table(g, s, w, &table)
}

/// Reads the degree-`k` principal symbol off the top-order coefficients.
pub fn principal_symbol(d: &DifferentialOperator, k: usize) -> FiberFunction {
    let m = d.dim();
    assert!(d.order() <= k, "operator exceeds the requested degree");
    let delta = d.weights().delta();
    let kfact = factorial(k as u32);
    FiberFunction::from_fn(m, ValueSpec::symbol(k, delta), |_, con| {
        let mut alpha = vec![0u32; m];
        for &v in con {
            alpha[v as usize] += 1;
        }
        d.coefficient(&alpha)
            .scale(&(multi_factorial(&alpha) / kfact.clone()))
    })
}

/// Vector field with polynomial components on the chart.
#[derive(Clone, PartialEq, Debug)]
pub struct VectorField {
    m: usize,
    comp: Vec<Poly>,
}

impl VectorField {
    /// Builds from components.
    pub fn new(m: usize, comp: Vec<Poly>) -> Self {
        assert_eq!(comp.len(), m);
        VectorField { m, comp }
    }

    /// Chart dimension.
    pub fn dim(&self) -> usize {
        self.m
    }

    /// Component `X^i`.
    pub fn component(&self, i: usize) -> &Poly {
        &self.comp[i]
    }

    /// Coordinate divergence.
    pub fn divergence(&self) -> Poly {
        let mut acc = Poly::zero(2 * self.m);
        for i in 0..self.m {
            acc = &acc + &self.comp[i].diff(i);
        }
        acc
    }

    /// Derivative of a scalar along the field.
    pub fn derive(&self, f: &Poly) -> Poly {
        let mut acc = Poly::zero(2 * self.m);
        for i in 0..self.m {
            acc = &acc + &(&self.comp[i] * &f.diff(i));
        }
        acc
    }

    /// Vector field bracket `[self, other]`.
    pub fn bracket(&self, other: &VectorField) -> VectorField {
        let m = self.m;
        VectorField::new(
            m,
            (0..m)
                .map(|i| &self.derive(&other.comp[i]) - &other.derive(&self.comp[i]))
                .collect(),
        )
    }
}

/// Generators of the projective symmetry algebra of the flat chart:
/// `m` constant fields, `m^2` linear fields and `m` quadratic fields,
/// `m^2 + 2m` in total.
pub fn projective_vector_fields(m: usize) -> Vec<VectorField> {
    assert!(m >= 2);
    let nv = 2 * m;
    let mut out = Vec::new();
    for i in 0..m {
        let mut comp = vec![Poly::zero(nv); m];
        comp[i] = Poly::one(nv);
        out.push(VectorField::new(m, comp));
    }
    for i in 0..m {
        for j in 0..m {
            let mut comp = vec![Poly::zero(nv); m];
            comp[i] = Poly::var(nv, j);
            out.push(VectorField::new(m, comp));
        }
    }
    for j in 0..m {
        let comp = (0..m)
            .map(|i| &Poly::var(nv, i) * &Poly::var(nv, j))
            .collect();
        out.push(VectorField::new(m, comp));
    }
    out
}

/// Lie derivative of a weight-`lambda` density component on the flat chart.
pub fn lie_derivative_density(x: &VectorField, f: &Poly, lambda: &Rational) -> Poly {
    &x.derive(f) + &(&x.divergence() * f).scale(lambda)
}

/// Lie derivative of a symbol section on the flat chart.
pub fn lie_derivative_symbol(x: &VectorField, s: &FiberFunction) -> FiberFunction {
    let m = s.dim();
    assert_eq!(s.spec().cov, 0);
    let jac: Vec<Vec<Poly>> = (0..m)
        .map(|i| (0..m).map(|p| x.component(i).diff(p)).collect())
        .collect();
    let transported = s.map(|p| x.derive(p));
    transported.sub(&crate::calculus::rho_poly_action(&jac, s))
}

/// Equivariance residual of the flat quantization against one symmetry
/// generator, reported on the probing monomial basis.
#[derive(Clone, Debug)]
pub struct ResidualReport {
    /// `(multi-index, residual)` per probe.
    pub probes: Vec<(Vec<u32>, Poly)>,
}

impl ResidualReport {
    /// True when every probe residual vanishes identically.
    pub fn is_zero(&self) -> bool {
        self.probes.iter().all(|(_, p)| p.is_zero())
    }
}

/// Computes `L_X (Q(S)) - Q(L_X S)` on the flat chart, as an operator probed
/// on all monomials of degree `<= k + 1` (which pins it as an operator).
///
/// The coefficient table is an explicit argument so that mutated tables can
/// be probed; the true table must yield an identically zero residual.
pub fn flat_equivariance_residual(
    w: &Weights,
    s: &FiberFunction,
    x: &VectorField,
    table: &CoefficientTable,
) -> Result<ResidualReport> {
    let m = s.dim();
    let q_s = flat_operator_with_table(s, w, table)?;
    let ls = lie_derivative_symbol(x, s);
    let q_ls = flat_operator_with_table(&ls, w, table)?;
    let k = s.spec().contra;
    let probes = multi_indices(m, k + 1)
        .into_iter()
        .map(|beta| {
            let f = base_monomial(m, &beta);
            let lhs = lie_derivative_density(x, &q_s.apply(&f), &w.mu);
            let mid = q_s.apply(&lie_derivative_density(x, &f, &w.lambda));
            let res = &(&lhs - &mid) - &q_ls.apply(&f);
            (beta, res)
        })
        .collect();
    Ok(ResidualReport { probes })
}

/// Convenience constructor for symbol sections from sorted-multiset
/// components; absent components are zero.
pub fn symbol_from_components(
    m: usize,
    k: usize,
    delta: Rational,
    comps: &BTreeMap<Vec<u8>, Poly>,
) -> FiberFunction {
    for key in comps.keys() {
        assert_eq!(key.len(), k, "component key of wrong degree");
    }
    FiberFunction::from_fn(m, ValueSpec::symbol(k, delta), |_, con| {
        comps.get(con).cloned().unwrap_or_else(|| Poly::zero(2 * m))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::GradedElement;
    use crate::exact::rational::rat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gamma_examples() {
        // (m=2, k=1, l=1, delta=0) -> 1
        assert_eq!(gamma_value(2, 1, 1, &int(0)), int(1));
        // any m, k = l = 1, delta = 1 -> 0
        for m in 2..=5 {
            assert_eq!(gamma_value(m, 1, 1, &int(1)), int(0));
        }
        // (m=3, k=2, l=1, delta=1/2) -> (3 + 3 - 2)/4 = 1
        assert_eq!(gamma_value(3, 2, 1, &rat(1, 2)), int(1));
    }

    #[test]
    fn critical_pair_enumeration() {
        for m in [2usize, 3] {
            assert!(critical_pairs(m, 6, &int(0)).is_empty());
        }
        assert_eq!(critical_pairs(2, 2, &int(1)), vec![(1, 1)]);
        // inverted definition: delta = (m + 2k - l)/(m + 1) flags (k, l)
        let (m, k, l) = (2usize, 3usize, 2usize);
        let delta = rat((m + 2 * k - l) as i64, (m + 1) as i64);
        assert!(critical_pairs(m, 3, &delta).contains(&(k, l)));
    }

    #[test]
    fn table_examples() {
        let w = Weights::new(rat(1, 3), rat(8, 15)); // delta = 1/5
        let t0 = coefficient_table(2, 0, &w).unwrap();
        assert_eq!(t0.c, vec![int(1)]);
        // C_{1,1} = lambda / (1 - delta)
        let t1 = coefficient_table(2, 1, &w).unwrap();
        assert_eq!(t1.c[1], rat(1, 3) / rat(4, 5));
        // critical delta is reported with its pairs
        let wc = Weights::new(int(0), int(1));
        match coefficient_table(2, 1, &wc) {
            Err(Error::CriticalDelta { k, pairs }) => {
                assert_eq!(k, 1);
                assert_eq!(pairs, vec![(1, 1)]);
            }
            other => panic!("expected CriticalDelta, got {other:?}"),
        }
    }

    #[test]
    fn closed_form_agrees_with_recurrence() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for m in [2usize, 3] {
            for _ in 0..10 {
                let w = crate::verify::random_noncritical_weights(&mut rng, m, 6);
                for k in 0..=6usize {
                    let t = coefficient_table(m, k, &w).unwrap();
                    for l in 1..=k {
                        assert_eq!(t.c[l], coefficient_closed_form(m, k, l, &w));
                    }
                }
            }
        }
    }

    #[test]
    fn rescue_cases() {
        // k = 1, delta = 1, lambda = 0: rescue applies with table {1, 0}
        let w = Weights::new(int(0), int(1));
        match rescue_table(2, 1, &w) {
            RescueOutcome::Rescued(t) => {
                assert_eq!(t.c, vec![int(1), int(0)]);
                assert_eq!(t.zeroed_from, Some(1));
                assert_eq!(t.critical, vec![(1, 1)]);
            }
            other => panic!("expected rescue, got {other:?}"),
        }
        // lambda = 1/3 is off the ladder
        let w = Weights::new(rat(1, 3), rat(4, 3));
        match rescue_table(2, 1, &w) {
            RescueOutcome::NoExistence { admissible_lambdas } => {
                assert_eq!(admissible_lambdas, vec![int(0)]);
            }
            other => panic!("expected NoExistence, got {other:?}"),
        }
        // non-critical shifts degenerate to the plain table
        let w = Weights::new(rat(1, 2), rat(3, 5));
        assert_eq!(
            rescue_table(2, 2, &w),
            RescueOutcome::Rescued(coefficient_table(2, 2, &w).unwrap())
        );
    }

    #[test]
    fn order_zero_is_multiplication() {
        let m = 2;
        let w = Weights::new(rat(1, 2), rat(1, 2));
        let flat = ChristoffelField::flat(m).unwrap();
        let sval = &Poly::var(4, 0) + &Poly::one(4);
        let s = FiberFunction::from_fn(m, ValueSpec::symbol(0, int(0)), |_, _| sval.clone());
        let q = quantize(&flat, &s, &w).unwrap();
        assert_eq!(q.order(), 0);
        assert_eq!(q.coefficient(&[0, 0]), sval);
        let f = &Poly::var(4, 1) * &Poly::var(4, 1);
        assert_eq!(q.apply(&f), &sval * &f);
        assert_eq!(q.apply(&Poly::zero(4)), Poly::zero(4));
        // degree-zero principal symbol is the scalar itself
        assert_eq!(*principal_symbol(&q, 0).component(&[], &[]), sval);
    }

    #[test]
    fn order_one_flat_closed_form() {
        // Q(S)(f) = S^i d_i f + lambda/(1 - delta) (d_i S^i) f
        let m = 2;
        let w = Weights::new(rat(1, 3), rat(8, 15)); // delta = 1/5
        let flat = ChristoffelField::flat(m).unwrap();
        let s1 = &Poly::var(4, 1) * &Poly::var(4, 1);
        let s2 = &Poly::var(4, 0) * &Poly::var(4, 1);
        let s = FiberFunction::from_fn(m, ValueSpec::symbol(1, w.delta()), |_, con| {
            if con == [0] {
                s1.clone()
            } else {
                s2.clone()
            }
        });
        let q = quantize(&flat, &s, &w).unwrap();
        let c11 = rat(1, 3) / rat(4, 5);
        let div = &s1.diff(0) + &s2.diff(1);
        assert_eq!(q.coefficient(&[1, 0]), s1);
        assert_eq!(q.coefficient(&[0, 1]), s2);
        assert_eq!(q.coefficient(&[0, 0]), div.scale(&c11));
        // spec'd application example: f = x1 gives S^1 + C (div S) x1
        let fx = Poly::var(4, 0);
        let expect = &s1 + &(&div * &fx).scale(&c11);
        assert_eq!(q.apply(&fx), expect);
    }

    #[test]
    fn principal_symbol_edge_cases() {
        let m = 2;
        let w = Weights::new(rat(1, 4), rat(1, 2));
        // an operator with zero top coefficients has zero symbol
        let mut coeffs = BTreeMap::new();
        coeffs.insert(vec![0u32, 0], Poly::var(4, 0));
        let d = DifferentialOperator::new(m, 2, w.clone(), coeffs);
        assert!(principal_symbol(&d, 2).is_zero());
        // flat round trip at k = 2
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = crate::verify::random_symbol(&mut rng, m, 2, w.delta());
        let q = quantize(&ChristoffelField::flat(m).unwrap(), &s, &w).unwrap();
        assert_eq!(principal_symbol(&q, 2), s);
    }

    #[test]
    fn generator_count_and_closure() {
        for m in [2usize, 3] {
            let fields = projective_vector_fields(m);
            assert_eq!(fields.len(), m * m + 2 * m);
            // quadratic-quadratic brackets vanish
            let quad = &fields[m + m * m..];
            for a in quad {
                for b in quad {
                    let br = a.bracket(b);
                    assert!((0..m).all(|i| br.component(i).is_zero()));
                }
            }
            // constant-quadratic brackets are nonzero linear fields
            for i in 0..m {
                for q in quad {
                    let br = fields[i].bracket(q);
                    assert!((0..m).any(|c| !br.component(c).is_zero()));
                    for c in 0..m {
                        let p = br.component(c);
                        assert!(p.total_degree() <= 1);
                        assert!(p.substitute_zero(0..2 * m).is_zero(), "no constant part");
                    }
                }
            }
        }
    }

    #[test]
    fn generators_anti_represent_the_graded_algebra() {
        // the field map (v, A, xi) -> v^i d_i + A^i_j x^j d_i - x^i (xi.x) d_i
        // satisfies [field(a), field(b)] = -field([a, b]) on all basis pairs
        let m = 2;
        let nv = 2 * m;
        let field_of = |e: &GradedElement| -> VectorField {
            VectorField::new(
                m,
                (0..m)
                    .map(|i| {
                        let mut p = Poly::constant(nv, e.v[i].clone());
                        for j in 0..m {
                            p = &p + &Poly::var(nv, j).scale(&e.a[i][j]);
                        }
                        for j in 0..m {
                            let quad = &Poly::var(nv, i) * &Poly::var(nv, j);
                            p = &p - &quad.scale(&e.xi[j]);
                        }
                        p
                    })
                    .collect(),
            )
        };
        let mut basis = Vec::new();
        for i in 0..m {
            basis.push(GradedElement::basis_vector(m, i));
            basis.push(GradedElement::basis_covector(m, i));
            for j in 0..m {
                basis.push(GradedElement::basis_matrix(m, i, j));
            }
        }
        for a in &basis {
            for b in &basis {
                let lhs = field_of(a).bracket(&field_of(b));
                let rhs = field_of(&a.bracket(b));
                for i in 0..m {
                    assert_eq!(*lhs.component(i), -rhs.component(i));
                }
            }
        }
    }

    #[test]
    fn lie_derivative_density_examples() {
        let m = 2;
        let nv = 4;
        let d1 = VectorField::new(m, vec![Poly::one(nv), Poly::zero(nv)]);
        assert_eq!(
            lie_derivative_density(&d1, &Poly::var(nv, 0), &rat(1, 2)),
            Poly::one(nv)
        );
        // weight zero reduces to the directional derivative
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = crate::verify::random_base_poly(&mut rng, m, 2);
        let x = VectorField::new(m, vec![Poly::var(nv, 1), Poly::var(nv, 0)]);
        assert_eq!(lie_derivative_density(&x, &f, &int(0)), x.derive(&f));
        // quadratic generator on a constant: lambda (m+1) (xi . x) f
        let quad = &projective_vector_fields(m)[m + m * m..][0];
        let lam = rat(2, 3);
        let got = lie_derivative_density(quad, &Poly::one(nv), &lam);
        let expect = Poly::var(nv, 0).scale(&(int(m as i64 + 1) * &lam));
        assert_eq!(got, expect);
    }

    #[test]
    fn lie_derivative_is_an_action() {
        // L_{[X,Y]} = [L_X, L_Y] on densities, including quadratic fields
        let m = 2;
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let fields = projective_vector_fields(m);
        let lam = rat(3, 7);
        for _ in 0..6 {
            let x = &fields[rng.gen_range(0..fields.len())];
            let y = &fields[rng.gen_range(0..fields.len())];
            let f = crate::verify::random_base_poly(&mut rng, m, 2);
            let lhs = lie_derivative_density(&x.bracket(y), &f, &lam);
            let rhs = &lie_derivative_density(x, &lie_derivative_density(y, &f, &lam), &lam)
                - &lie_derivative_density(y, &lie_derivative_density(x, &f, &lam), &lam);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn affine_generators_are_equivariant_for_any_table() {
        // constant and linear fields commute with every term of the flat
        // formula separately, so even a mutated table has zero residual there
        let m = 2;
        let w = Weights::new(rat(1, 2), rat(4, 5));
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let s = crate::verify::random_symbol(&mut rng, m, 2, w.delta());
        let mut table = coefficient_table(m, 2, &w).unwrap();
        table.c[1] += int(3); // deliberately wrong
        let fields = projective_vector_fields(m);
        for x in &fields[..m + m * m] {
            let r = flat_equivariance_residual(&w, &s, x, &table).unwrap();
            assert!(r.is_zero());
        }
        // while a quadratic generator sees the mutation
        let quad = &fields[m + m * m..];
        assert!(quad
            .iter()
            .any(|x| !flat_equivariance_residual(&w, &s, x, &table)
                .unwrap()
                .is_zero()));
    }

    #[test]
    fn operator_extraction_recovers_known_operator() {
        // D = x2 d1^2 + 3 d2 + x1 x2: probe-extract and compare
        let m = 2;
        let w = Weights::new(int(0), int(0));
        let mut coeffs = BTreeMap::new();
        coeffs.insert(vec![2u32, 0], Poly::var(4, 1));
        coeffs.insert(vec![0u32, 1], Poly::constant(4, int(3)));
        coeffs.insert(vec![0u32, 0], &Poly::var(4, 0) * &Poly::var(4, 1));
        let d = DifferentialOperator::new(m, 2, w.clone(), coeffs);
        let e = operator_from_probes(m, &w, 2, |f| Ok(d.apply(f))).unwrap();
        assert_eq!(d, e);
        // an order-3 impostor is caught by the certification probes
        let mut coeffs = BTreeMap::new();
        coeffs.insert(vec![3u32, 0], Poly::one(4));
        let d3 = DifferentialOperator::new(m, 3, w.clone(), coeffs);
        assert!(matches!(
            operator_from_probes(m, &w, 2, |f| Ok(d3.apply(f))),
            Err(Error::Internal(_))
        ));
    }

    #[test]
    fn symbol_validation_rejects_mismatched_weight() {
        let m = 2;
        let w = Weights::new(rat(1, 3), rat(2, 3)); // delta = 1/3
        let flat = ChristoffelField::flat(m).unwrap();
        let s = FiberFunction::from_fn(m, ValueSpec::symbol(1, rat(1, 5)), |_, _| Poly::one(4));
        assert!(matches!(
            quantize(&flat, &s, &w),
            Err(Error::InvalidJob(_))
        ));
    }

    #[test]
    fn multi_index_order_is_by_degree_then_lex() {
        let idx = multi_indices(2, 2);
        assert_eq!(
            idx,
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![0, 1],
                vec![2, 0],
                vec![1, 1],
                vec![0, 2]
            ]
        );
    }
}
