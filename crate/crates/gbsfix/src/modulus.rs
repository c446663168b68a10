//! The modular homomorphism Δ and canonical finitely generated subgroups of ℚ*.
//!
//! ℚ* ≅ {±1} × ⊕_p ℤ, so a finitely generated subgroup is a sign datum plus
//! an integer lattice over a finite prime support. Hermite normal form of the
//! exponent lattice gives a canonical representation, which makes subgroup
//! equality, cyclicity and the Δ(G) predicates of the classification decidable.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::graph::{EdgeIx, LabelledGraph, Presentation, MAX_LABEL};

pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModulusError {
    #[error("system is elementary ({0}); the modulus is not defined")]
    ElementarySystem(String),
    #[error("subgroup is not cyclic (lattice rank {rank}, contains -1: {has_minus_one})")]
    NotCyclic { rank: usize, has_minus_one: bool },
    #[error("cannot factor {0}: exceeds the trial-division bound")]
    FactorBound(String),
}

/// A nonzero rational kept in fully factored form: sign and prime exponents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredRational {
    negative: bool,
    /// prime → exponent, exponents nonzero.
    exps: BTreeMap<i64, i64>,
}

impl FactoredRational {
    pub fn one() -> Self {
        FactoredRational { negative: false, exps: BTreeMap::new() }
    }

    /// Factors a nonzero integer with |n| ≤ [`MAX_LABEL`] by trial division.
    /// After stripping factors up to 10^6 the cofactor is prime.
    pub fn from_i64(n: i64) -> Result<Self, ModulusError> {
        assert!(n != 0, "zero has no factorisation in Q*");
        if n.abs() > MAX_LABEL {
            return Err(ModulusError::FactorBound(n.to_string()));
        }
        let negative = n < 0;
        let mut m = n.abs();
        let mut exps = BTreeMap::new();
        let mut d: i64 = 2;
        while d * d <= m && d <= 1_000_000 {
            while m % d == 0 {
                *exps.entry(d).or_insert(0) += 1;
                m /= d;
            }
            d += if d == 2 { 1 } else { 2 };
        }
        if m > 1 {
            *exps.entry(m).or_insert(0) += 1;
        }
        Ok(FactoredRational { negative, exps })
    }

    pub fn from_ratio(num: i64, den: i64) -> Result<Self, ModulusError> {
        Ok(Self::from_i64(num)?.div(&Self::from_i64(den)?))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut exps = self.exps.clone();
        for (p, e) in &other.exps {
            let entry = exps.entry(*p).or_insert(0);
            *entry += e;
            if *entry == 0 {
                exps.remove(p);
            }
        }
        FactoredRational { negative: self.negative ^ other.negative, exps }
    }

    pub fn inv(&self) -> Self {
        FactoredRational {
            negative: self.negative,
            exps: self.exps.iter().map(|(p, e)| (*p, -e)).collect(),
        }
    }

    pub fn div(&self, other: &Self) -> Self {
        self.mul(&other.inv())
    }

    pub fn is_one(&self) -> bool {
        !self.negative && self.exps.is_empty()
    }

    pub fn is_minus_one(&self) -> bool {
        self.negative && self.exps.is_empty()
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn primes(&self) -> impl Iterator<Item = i64> + '_ {
        self.exps.keys().copied()
    }

    pub fn exponent_of(&self, p: i64) -> i64 {
        self.exps.get(&p).copied().unwrap_or(0)
    }

    pub fn to_rational(&self) -> Rational {
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for (p, e) in &self.exps {
            let base = BigInt::from(*p);
            if *e > 0 {
                num *= base.pow(*e as u32);
            } else {
                den *= base.pow((-*e) as u32);
            }
        }
        if self.negative {
            num = -num;
        }
        Rational::new(num, den)
    }
}

impl fmt::Display for FactoredRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_rational())
    }
}

/// A finitely generated subgroup of ℚ* in canonical form.
///
/// `basis` is the Hermite normal form of the exponent lattice over `primes`.
/// When −1 is not in the subgroup, each lattice point lifts to a unique sign,
/// recorded on the basis rows by `basis_negative`; when −1 is in the subgroup
/// both lifts are present and the sign data is dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModulusSubgroup {
    primes: Vec<i64>,
    basis: Vec<Vec<BigInt>>,
    basis_negative: Vec<bool>,
    minus_one: bool,
}

impl ModulusSubgroup {
    pub fn trivial() -> Self {
        ModulusSubgroup {
            primes: Vec::new(),
            basis: Vec::new(),
            basis_negative: Vec::new(),
            minus_one: false,
        }
    }

    /// Canonicalises the subgroup generated by the given rationals.
    pub fn from_generators(generators: &[FactoredRational]) -> Self {
        let mut primes: Vec<i64> = Vec::new();
        for g in generators {
            for p in g.primes() {
                if !primes.contains(&p) {
                    primes.push(p);
                }
            }
        }
        primes.sort_unstable();
        let mut rows: Vec<(Vec<BigInt>, bool)> = generators
            .iter()
            .map(|g| {
                (
                    primes.iter().map(|p| BigInt::from(g.exponent_of(*p))).collect(),
                    g.is_negative(),
                )
            })
            .collect();
        let mut minus_one = false;
        let basis_rows = hermite_normal_form(&mut rows, &mut minus_one);
        let (mut basis, mut basis_negative): (Vec<_>, Vec<_>) = basis_rows.into_iter().unzip();
        if minus_one {
            basis_negative = vec![false; basis.len()];
        }
        // Trim primes whose column is entirely zero.
        let keep: Vec<usize> = (0..primes.len())
            .filter(|j| basis.iter().any(|r| !r[*j].is_zero()))
            .collect();
        let primes: Vec<i64> = keep.iter().map(|j| primes[*j]).collect();
        for row in &mut basis {
            *row = keep.iter().map(|j| row[*j].clone()).collect();
        }
        ModulusSubgroup { primes, basis, basis_negative, minus_one }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn contains_minus_one(&self) -> bool {
        self.minus_one
    }

    pub fn primes(&self) -> &[i64] {
        &self.primes
    }

    pub fn basis(&self) -> &[Vec<BigInt>] {
        &self.basis
    }

    pub fn basis_signs(&self) -> &[bool] {
        &self.basis_negative
    }

    /// True iff the subgroup is exactly {1, −1}.
    pub fn is_pm_one(&self) -> bool {
        self.minus_one && self.basis.is_empty()
    }

    /// True iff the subgroup is {1}.
    pub fn is_trivial(&self) -> bool {
        !self.minus_one && self.basis.is_empty()
    }

    /// True iff the subgroup is cyclic; every subgroup arising from a
    /// Betti-1 system is (Δ factors through π₁ of the graph).
    pub fn is_cyclic(&self) -> bool {
        self.basis.is_empty() || (self.basis.len() == 1 && !self.minus_one)
    }

    /// The generator of a cyclic subgroup.
    pub fn cyclic_generator(&self) -> Result<Rational, ModulusError> {
        if !self.is_cyclic() {
            return Err(ModulusError::NotCyclic {
                rank: self.rank(),
                has_minus_one: self.minus_one,
            });
        }
        if self.basis.is_empty() {
            return Ok(if self.minus_one {
                -Rational::one()
            } else {
                Rational::one()
            });
        }
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for (j, p) in self.primes.iter().enumerate() {
            let e = &self.basis[0][j];
            let base = BigInt::from(*p);
            if e.is_positive() {
                num *= pow_big(&base, e);
            } else if e.is_negative() {
                den *= pow_big(&base, &-e.clone());
            }
        }
        if self.basis_negative[0] {
            num = -num;
        }
        Ok(Rational::new(num, den))
    }

    /// Decides whether a cyclic subgroup is generated by an integer and
    /// returns that integer when it is.
    ///
    /// ⟨r⟩ equals ⟨n⟩ for an integer n exactly when r or r^{-1} is an integer.
    pub fn generated_by_integer(&self) -> Result<Option<BigInt>, ModulusError> {
        let r = self.cyclic_generator()?;
        if r.denom().is_one() {
            return Ok(Some(r.numer().clone()));
        }
        let inv = r.recip();
        if inv.denom().is_one() {
            return Ok(Some(inv.numer().clone()));
        }
        Ok(None)
    }
}

fn pow_big(base: &BigInt, exp: &BigInt) -> BigInt {
    let e: u32 = exp.try_into().expect("exponent fits u32");
    base.pow(e)
}

/// Row-style Hermite normal form with sign tracking.
///
/// Rows generate the lattice; the output basis has strictly increasing pivot
/// columns, positive pivots, and entries above each pivot reduced into
/// [0, pivot). Row operations are mirrored on the ℤ/2 sign bits; a relation
/// (zero row) with sign 1 certifies that −1 lies in the subgroup.
fn hermite_normal_form(
    rows: &mut Vec<(Vec<BigInt>, bool)>,
    minus_one: &mut bool,
) -> Vec<(Vec<BigInt>, bool)> {
    let cols = rows.first().map(|(r, _)| r.len()).unwrap_or(0);
    let mut basis: Vec<(Vec<BigInt>, bool)> = Vec::new();
    let mut work: Vec<(Vec<BigInt>, bool)> = std::mem::take(rows);
    for col in 0..cols {
        loop {
            // Pick the row with the smallest nonzero |entry| in this column.
            let mut best: Option<usize> = None;
            for (i, (r, _)) in work.iter().enumerate() {
                if r[col].is_zero() {
                    continue;
                }
                match best {
                    None => best = Some(i),
                    Some(b) => {
                        if r[col].abs() < work[b].0[col].abs() {
                            best = Some(i)
                        }
                    }
                }
            }
            let Some(pivot_row) = best else { break };
            let pivot = work[pivot_row].0[col].clone();
            let mut done = true;
            for i in 0..work.len() {
                if i == pivot_row || work[i].0[col].is_zero() {
                    continue;
                }
                let q = floored_div(&work[i].0[col], &pivot);
                let (pr, ps) = (work[pivot_row].0.clone(), work[pivot_row].1);
                let (row, sign) = &mut work[i];
                for j in 0..cols {
                    row[j] -= &q * &pr[j];
                }
                // Sign bit transforms additively mod 2 under row combination.
                if !(&q % 2u8).is_zero() {
                    *sign ^= ps;
                }
                if !row[col].is_zero() {
                    done = false;
                }
            }
            if done {
                // Pivot row is the unique nonzero entry in this column.
                let (mut prow, psign) = work.remove(pivot_row);
                if prow[col].is_negative() {
                    for x in prow.iter_mut() {
                        *x = -x.clone();
                    }
                }
                basis.push((prow, psign));
                break;
            }
        }
        // Collapse zero rows; a negative zero row witnesses −1.
        work.retain(|(r, s)| {
            if r.iter().all(|x| x.is_zero()) {
                if *s {
                    *minus_one = true;
                }
                false
            } else {
                true
            }
        });
    }
    for (r, s) in work.drain(..) {
        debug_assert!(r.iter().all(|x| x.is_zero()));
        if s {
            *minus_one = true;
        }
    }
    // Reduce entries above each pivot into [0, pivot). Pivots are processed
    // left to right: row i has zeros at every earlier pivot column, so a
    // later reduction cannot disturb an earlier one.
    for i in 0..basis.len() {
        let pivot_col = basis[i].0.iter().position(|x| !x.is_zero()).unwrap();
        let pivot = basis[i].0[pivot_col].clone();
        for k in 0..i {
            let q = floored_div(&basis[k].0[pivot_col], &pivot);
            if q.is_zero() {
                continue;
            }
            let (pr, ps) = (basis[i].0.clone(), basis[i].1);
            let (row, sign) = &mut basis[k];
            for j in 0..row.len() {
                row[j] -= &q * &pr[j];
            }
            if !(&q % 2u8).is_zero() {
                *sign ^= ps;
            }
        }
    }
    basis
}

fn floored_div(a: &BigInt, b: &BigInt) -> BigInt {
    use num_integer::Integer;
    a.div_floor(b)
}

/// Δ(t) for one oriented stable letter plus the subgroup they generate.
#[derive(Debug, Clone)]
pub struct SystemModulus {
    /// (edge, Δ(t_e)) per stable letter, in presentation order.
    pub stable_deltas: Vec<(EdgeIx, FactoredRational)>,
    pub subgroup: ModulusSubgroup,
    /// Propagated commensuration ratio per vertex (root ↦ 1).
    pub vertex_ratio: Vec<FactoredRational>,
}

impl SystemModulus {
    pub fn delta_of(&self, e: EdgeIx) -> Option<&FactoredRational> {
        self.stable_deltas.iter().find(|(ix, _)| *ix == e).map(|(_, d)| d)
    }
}

/// Computes Δ(t_e) for every stable letter and the subgroup Δ(G) ≤ ℚ*.
///
/// Writing x_v = X^{c_v} for a formal commensuration parameter с with
/// c_root = 1, a tree edge (a at the near end, b at the far end) forces
/// c_far = c_near·a/b, and a non-tree edge e from u (label a) to w (label b)
/// gives Δ(t_e) = (c_w·b)/(c_u·a): the product of label ratios along the
/// loop the stable letter closes.
pub fn modulus_of_system(
    graph: &LabelledGraph,
    pres: &Presentation,
) -> Result<SystemModulus, ModulusError> {
    if let Some(kind) = graph.elementary_kind() {
        return Err(ModulusError::ElementarySystem(kind.to_string()));
    }
    let ratios = vertex_ratios(graph, pres)?;
    let mut stable_deltas = Vec::new();
    for &e in pres.stable_letters() {
        let edge = graph.edge(e);
        let cu_a = ratios[edge.from.0].mul(&FactoredRational::from_i64(edge.label_from)?);
        let cw_b = ratios[edge.to.0].mul(&FactoredRational::from_i64(edge.label_to)?);
        stable_deltas.push((e, cw_b.div(&cu_a)));
    }
    let gens: Vec<FactoredRational> = stable_deltas.iter().map(|(_, d)| d.clone()).collect();
    let subgroup = ModulusSubgroup::from_generators(&gens);
    Ok(SystemModulus { stable_deltas, subgroup, vertex_ratio: ratios })
}

/// Propagates c_root = 1 through the spanning tree: c_far = c_near·a/b,
/// giving the commensuration ratio x_v = X^{c_v} of each vertex generator.
pub fn vertex_ratios(
    graph: &LabelledGraph,
    pres: &Presentation,
) -> Result<Vec<FactoredRational>, ModulusError> {
    let n = graph.vertex_count();
    let mut ratios = vec![FactoredRational::one(); n];
    for v in pres.bfs_order() {
        let Some((parent, e, forward)) = pres.parent_link(v) else { continue };
        let edge = graph.edge(e);
        let (near, far) = if forward {
            (edge.label_from, edge.label_to)
        } else {
            (edge.label_to, edge.label_from)
        };
        ratios[v.0] = ratios[parent.0]
            .mul(&FactoredRational::from_i64(near)?)
            .div(&FactoredRational::from_i64(far)?);
    }
    Ok(ratios)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::RawEdge;

    fn fr(num: i64, den: i64) -> FactoredRational {
        FactoredRational::from_ratio(num, den).unwrap()
    }

    #[test]
    fn factorisation_roundtrip() {
        let r = fr(-84, 90);
        assert_eq!(r.to_rational(), Rational::new(BigInt::from(-14), BigInt::from(15)));
    }

    #[test]
    fn bs_moduli() {
        let g = LabelledGraph::bs(2, 3).unwrap();
        let p = g.presentation("x").unwrap();
        let m = modulus_of_system(&g, &p).unwrap();
        assert_eq!(m.stable_deltas.len(), 1);
        assert_eq!(m.stable_deltas[0].1, fr(3, 2));
        // The canonical generator of ⟨3/2⟩ may be either 3/2 or its inverse.
        assert_eq!(m.subgroup, ModulusSubgroup::from_generators(&[fr(3, 2)]));
        let gen = m.subgroup.cyclic_generator().unwrap();
        assert!(gen == fr(3, 2).to_rational() || gen == fr(2, 3).to_rational());

        let g = LabelledGraph::bs(2, -2).unwrap();
        let p = g.presentation("x").unwrap();
        let m = modulus_of_system(&g, &p).unwrap();
        assert!(m.stable_deltas[0].1.is_minus_one());
        assert!(m.subgroup.is_pm_one());
    }

    #[test]
    fn betti_zero_modulus_is_trivial() {
        let g = LabelledGraph::validate(
            vec!["u".into(), "v".into()],
            vec![RawEdge {
                id: "e".into(),
                from: "u".into(),
                label_from: 2,
                to: "v".into(),
                label_to: 3,
            }],
        )
        .unwrap();
        let p = g.presentation("u").unwrap();
        let m = modulus_of_system(&g, &p).unwrap();
        assert!(m.stable_deltas.is_empty());
        assert!(m.subgroup.is_trivial());
    }

    #[test]
    fn elementary_systems_are_rejected() {
        let g = LabelledGraph::bs(1, 1).unwrap();
        let p = g.presentation("x").unwrap();
        assert!(matches!(
            modulus_of_system(&g, &p),
            Err(ModulusError::ElementarySystem(_))
        ));
    }

    #[test]
    fn tree_path_delta_accounts_for_labels() {
        // Two vertices, tree edge (2,3), extra edge (5,7):
        // c_u = 1, c_v = 2/3, Δ(t) = (c_v·7)/(c_u·5) = 14/15.
        let g = LabelledGraph::validate(
            vec!["u".into(), "v".into()],
            vec![
                RawEdge { id: "a".into(), from: "u".into(), label_from: 2, to: "v".into(), label_to: 3 },
                RawEdge { id: "b".into(), from: "u".into(), label_from: 5, to: "v".into(), label_to: 7 },
            ],
        )
        .unwrap();
        let p = g.presentation("u").unwrap();
        let m = modulus_of_system(&g, &p).unwrap();
        assert_eq!(m.stable_deltas.len(), 1);
        assert_eq!(m.stable_deltas[0].1, fr(14, 15));
    }

    #[test]
    fn pm_one_predicate() {
        let minus = ModulusSubgroup::from_generators(&[fr(-1, 1)]);
        assert!(minus.is_pm_one());
        let three_half = ModulusSubgroup::from_generators(&[fr(3, 2)]);
        assert!(!three_half.is_pm_one());
        assert!(!ModulusSubgroup::trivial().is_pm_one());
    }

    #[test]
    fn integer_generator_detection() {
        let s = ModulusSubgroup::from_generators(&[fr(3, 2)]);
        assert_eq!(s.generated_by_integer().unwrap(), None);
        let s = ModulusSubgroup::from_generators(&[fr(4, 2)]);
        assert_eq!(s.generated_by_integer().unwrap(), Some(BigInt::from(2)));
        let s = ModulusSubgroup::from_generators(&[fr(-1, 1)]);
        assert_eq!(s.generated_by_integer().unwrap(), Some(BigInt::from(-1)));
        let s = ModulusSubgroup::from_generators(&[fr(1, 3)]);
        assert_eq!(s.generated_by_integer().unwrap(), Some(BigInt::from(3)));
        let s = ModulusSubgroup::from_generators(&[fr(-1, 5)]);
        assert_eq!(s.generated_by_integer().unwrap(), Some(BigInt::from(-5)));
        let trivial = ModulusSubgroup::trivial();
        assert_eq!(trivial.generated_by_integer().unwrap(), Some(BigInt::from(1)));
    }

    #[test]
    fn subgroup_equality_examples() {
        let a = ModulusSubgroup::from_generators(&[fr(4, 6)]);
        let b = ModulusSubgroup::from_generators(&[fr(2, 3)]);
        assert_eq!(a, b);
        let two_three = ModulusSubgroup::from_generators(&[fr(2, 1), fr(3, 1)]);
        let six = ModulusSubgroup::from_generators(&[fr(6, 1)]);
        assert_ne!(two_three, six);
        let r = ModulusSubgroup::from_generators(&[fr(10, 21)]);
        let r_inv = ModulusSubgroup::from_generators(&[fr(21, 10)]);
        assert_eq!(r, r_inv);
    }

    #[test]
    fn sign_tracking_through_relations() {
        // ⟨-2, 2⟩ contains -1; ⟨-2⟩ alone does not.
        let s = ModulusSubgroup::from_generators(&[fr(-2, 1), fr(2, 1)]);
        assert!(s.contains_minus_one());
        let s = ModulusSubgroup::from_generators(&[fr(-2, 1)]);
        assert!(!s.contains_minus_one());
        assert_eq!(s.cyclic_generator().unwrap(), fr(-2, 1).to_rational());
        // ⟨-2⟩ and ⟨2⟩ differ exactly in the sign lift.
        let t = ModulusSubgroup::from_generators(&[fr(2, 1)]);
        assert_ne!(s, t);
        // (-2)^2 = 4 adds nothing.
        let s4 = ModulusSubgroup::from_generators(&[fr(-2, 1), fr(4, 1)]);
        assert_eq!(s, s4);
    }

    #[test]
    fn not_cyclic_for_rank_two() {
        let s = ModulusSubgroup::from_generators(&[fr(2, 1), fr(3, 1)]);
        assert!(matches!(
            s.generated_by_integer(),
            Err(ModulusError::NotCyclic { rank: 2, .. })
        ));
        // {±1} × ⟨2⟩ is rank 1 but not cyclic either.
        let s = ModulusSubgroup::from_generators(&[fr(-1, 1), fr(2, 1)]);
        assert!(!s.is_cyclic());
    }

    #[cfg(test)]
    mod canonical {
        use super::*;
        use proptest::prelude::*;

        fn gen_rational() -> impl Strategy<Value = FactoredRational> {
            (
                prop::sample::select(vec![-30i64, -15, -12, -9, -8, -6, -5, -4, -3, -2, 2, 3, 4, 5, 6, 8, 9, 12, 15, 30]),
                prop::sample::select(vec![1i64, 2, 3, 4, 5, 6, 8, 9, 10, 12]),
            )
                .prop_map(|(n, d)| FactoredRational::from_ratio(n, d).unwrap())
        }

        proptest! {
            #[test]
            fn canonical_under_generator_changes(
                gens in prop::collection::vec(gen_rational(), 1..5),
                seed in 0usize..4,
            ) {
                let original = ModulusSubgroup::from_generators(&gens);
                // Shuffle deterministically by rotation.
                let mut rotated = gens.clone();
                rotated.rotate_left(seed % gens.len().max(1));
                prop_assert_eq!(&original, &ModulusSubgroup::from_generators(&rotated));
                // Invert one generator.
                let mut inverted = gens.clone();
                inverted[0] = inverted[0].inv();
                prop_assert_eq!(&original, &ModulusSubgroup::from_generators(&inverted));
                // Multiply one generator into another.
                if gens.len() >= 2 {
                    let mut mixed = gens.clone();
                    mixed[1] = mixed[1].mul(&gens[0]);
                    prop_assert_eq!(&original, &ModulusSubgroup::from_generators(&mixed));
                }
            }
        }
    }
}
