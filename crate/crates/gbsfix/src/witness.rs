//! Explicit twist automorphisms witnessing non-finite generation (Betti 1
//! with integral modulus; Betti ≥ 2) and unbounded rank (Betti 1 with
//! non-integral modulus), with exact word-level verification of the
//! identities their constructions rest on.
//!
//! A recipe is always a twist φ: t^ε ↦ t^ε·x^{pN} fixing every other
//! generator, where x is the vertex generator at the target of the oriented
//! stable letter and p clears the commutation condition
//! x^p·t^ε = t^ε·x^{p·Δ}. Along the fixed ray the exponents follow the
//! geometric series l_k = Σ_{i<k} Δ^i, which the verifier reproduces
//! symbolically and cross-checks against its closed form.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::autos::{check_automorphism, twist_map, AutoError, Automorphism};
use crate::classify::WitnessRecipeKind;
use crate::graph::{EdgeIx, Presentation, VertexIx};
use crate::modulus::{modulus_of_system, ModulusError, Rational};
use crate::words::{word_equal, GroupWord, Syllable, WordError};

/// Cap on the twist-exponent search (multiples tried before giving up).
pub const P_SEARCH_CAP: u64 = 1_000_000;
/// Cap on the exponent m in the N = q'^m search.
pub const N_EXPONENT_CAP: u32 = 64;

#[derive(Debug, Error)]
pub enum WitnessError {
    #[error("no stable letter has integral modulus other than -1")]
    NoSuitableStableLetter,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("search exhausted after {bound} candidates while {task}")]
    SearchExhausted { bound: u64, task: String },
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Auto(#[from] AutoError),
    #[error(transparent)]
    Modulus(#[from] ModulusError),
}

/// A twist recipe: the automorphism φ_N with φ_N(t^ε) = t^ε·x^{pN} and all
/// other generators fixed, plus the data the verifier needs.
#[derive(Debug, Clone)]
pub struct TwistRecipe {
    pres: Arc<Presentation>,
    pub kind: WitnessRecipeKind,
    /// The twisted stable letter and its orientation.
    pub edge: EdgeIx,
    pub forward: bool,
    /// Vertex of the twisting generator x (the target end of t^ε).
    pub vertex: VertexIx,
    /// Twist exponent base: x^p·t^ε = t^ε·x^{pΔ} holds.
    pub p: i64,
    /// Scaling N (1 for the commutator family).
    pub scale: BigInt,
    /// Δ(t^ε) of the oriented letter.
    pub delta: Rational,
    /// Second stable letter s for the commutator family.
    pub partner: Option<(EdgeIx, bool)>,
    /// γ = p(Δ(s)−1)/(Δ(s)Δ(t)) for the commutator family.
    pub gamma: Option<BigInt>,
    /// Prime dividing the denominator of Δ(t^ε), non-integral family only.
    pub q_prime: Option<i64>,
    /// M_N: length of the integral prefix, non-integral family only.
    pub prefix_len: Option<u64>,
}

impl TwistRecipe {
    pub fn presentation(&self) -> &Arc<Presentation> {
        &self.pres
    }

    /// The oriented stable letter t^ε as a group element.
    pub fn letter(&self) -> GroupWord {
        GroupWord::stable_letter(&self.pres, self.edge, self.forward)
    }

    /// The element whose powers trace the fixed ray: t^ε, or [t,s] for the
    /// commutator family.
    pub fn ray_element(&self) -> Result<GroupWord, WordError> {
        match self.partner {
            None => Ok(self.letter()),
            Some((s_edge, s_forward)) => {
                let t = self.letter();
                let s = GroupWord::stable_letter(&self.pres, s_edge, s_forward);
                t.concat(&s)?.concat(&t.inverse())?.concat(&s.inverse())
            }
        }
    }

    /// Ratio of the exponent series along the ray: Δ(t^ε), or 1 for the
    /// commutator family (Δ vanishes on commutators).
    pub fn ray_ratio(&self) -> Rational {
        match self.kind {
            WitnessRecipeKind::Commutator => Rational::one(),
            _ => self.delta.clone(),
        }
    }

    /// Per-step exponent multiplier: p·N, or γ for the commutator family.
    pub fn step_exponent(&self) -> BigInt {
        match self.kind {
            WitnessRecipeKind::Commutator => self.gamma.clone().expect("commutator recipes carry γ"),
            _ => BigInt::from(self.p) * &self.scale,
        }
    }

    /// Builds and validates the twist automorphism.
    pub fn automorphism(&self) -> Result<Automorphism, WitnessError> {
        let exp = BigInt::from(self.p) * &self.scale;
        let map = twist_map(&self.pres, self.edge, self.forward, self.vertex, &exp)?;
        Ok(check_automorphism(map)?)
    }

    /// Human-readable description of the twist, e.g. `t -> t x^2`.
    pub fn describe(&self) -> String {
        let graph = self.pres.graph();
        let t = &graph.edge(self.edge).id;
        let x = graph.vertex_id(self.vertex);
        let exp = BigInt::from(self.p) * &self.scale;
        if self.forward {
            format!("{t} -> {t} {x}^{exp}")
        } else {
            format!("{t} -> {x}^{} {t}", -exp)
        }
    }
}

/// l_k = Σ_{i<k} ratio^i, the exponent series of the ray.
pub fn geometric_prefix_sum(ratio: &Rational, k: u64) -> Rational {
    let mut acc = Rational::zero();
    let mut term = Rational::one();
    for _ in 0..k {
        acc += &term;
        term *= ratio;
    }
    acc
}

/// Closed form of the series: (ratio^k − 1)/(ratio − 1), or k when ratio = 1.
pub fn geometric_closed_form(ratio: &Rational, k: u64) -> Rational {
    if ratio.is_one() {
        return Rational::from(BigInt::from(k));
    }
    let mut pow = Rational::one();
    for _ in 0..k {
        pow *= ratio;
    }
    (pow - Rational::one()) / (ratio.clone() - Rational::one())
}

fn is_integral(r: &Rational) -> bool {
    r.denom().is_one()
}

/// Finds the smallest p > 0 with x^p·u = u·x^{pΔ(u)}, x at the target
/// vertex of the oriented letter u, each candidate certified by word_equal.
fn find_twist_base(
    pres: &Arc<Presentation>,
    edge: EdgeIx,
    forward: bool,
    delta: &Rational,
) -> Result<i64, WitnessError> {
    let e = pres.graph().edge(edge);
    let vertex = if forward { e.to } else { e.from };
    let u = GroupWord::stable_letter(pres, edge, forward);
    let den: i64 = delta
        .denom()
        .try_into()
        .map_err(|_| WitnessError::PreconditionViolated("modulus denominator too large".into()))?;
    for k in 1..=P_SEARCH_CAP {
        let p = match (k as i64).checked_mul(den) {
            Some(p) => p,
            None => break,
        };
        let scaled = Rational::from(BigInt::from(p)) * delta;
        debug_assert!(is_integral(&scaled));
        let xp = GroupWord::vertex_power(pres, vertex, p);
        let lhs = xp.concat(&u)?;
        let rhs = u.concat(&GroupWord::vertex_power(pres, vertex, scaled.to_integer()))?;
        if word_equal(&lhs, &rhs)? {
            return Ok(p);
        }
    }
    Err(WitnessError::SearchExhausted {
        bound: P_SEARCH_CAP,
        task: format!("solving x^p {id} = {id} x^(p·Δ)", id = e.id),
    })
}

/// Δ of one oriented stable letter.
fn oriented_delta(
    pres: &Arc<Presentation>,
    edge: EdgeIx,
    forward: bool,
) -> Result<Rational, WitnessError> {
    let m = modulus_of_system(pres.graph(), pres)?;
    let d = m
        .delta_of(edge)
        .ok_or_else(|| WitnessError::PreconditionViolated("not a stable letter".into()))?
        .to_rational();
    Ok(if forward { d } else { d.recip() })
}

/// Builds the scaled-twist witness for a stable letter with Δ(t^ε) ∈ ℤ∖{−1}.
///
/// All stable letters are searched in both orientations; the recipe twists
/// the first suitable one. Along the ray, φ_N(t^{εk}) = t^{εk}·x^{pN·l_k}
/// with l_k the geometric series of Δ(t^ε) — an integer series here, so the
/// fixed ray never ends.
pub fn build_integral_witness(
    pres: &Arc<Presentation>,
    scale: impl Into<BigInt>,
) -> Result<TwistRecipe, WitnessError> {
    let scale = scale.into();
    if scale.is_zero() {
        return Err(WitnessError::PreconditionViolated("N must be nonzero".into()));
    }
    for &edge in pres.stable_letters() {
        for forward in [true, false] {
            let delta = oriented_delta(pres, edge, forward)?;
            if !is_integral(&delta) || delta == -Rational::one() {
                continue;
            }
            let p = find_twist_base(pres, edge, forward, &delta)?;
            let e = pres.graph().edge(edge);
            let vertex = if forward { e.to } else { e.from };
            return Ok(TwistRecipe {
                pres: Arc::clone(pres),
                kind: WitnessRecipeKind::IntegralModulus,
                edge,
                forward,
                vertex,
                p,
                scale,
                delta,
                partner: None,
                gamma: None,
                q_prime: None,
                prefix_len: None,
            });
        }
    }
    Err(WitnessError::NoSuitableStableLetter)
}

/// M_N: the largest M such that N·l_i is an integer for every i < M.
pub fn integral_prefix_length(ratio: &Rational, scale: &BigInt) -> u64 {
    let n = Rational::from(scale.clone());
    let mut l = Rational::zero();
    let mut term = Rational::one();
    let mut i: u64 = 0;
    // Bounded scan: denominators grow strictly once they appear, so the
    // prefix of a non-integral ratio is finite.
    const SCAN_CAP: u64 = 100_000;
    while i < SCAN_CAP {
        if !is_integral(&(n.clone() * &l)) {
            return i;
        }
        i += 1;
        l += &term;
        term *= ratio;
    }
    i
}

/// Builds the bounded-prefix twist family member reaching rank ≥ `target_rank`.
///
/// Requires Betti 1 and Δ(t) = a/b in lowest terms with |a|, |b| ≥ 2. Takes
/// N = b^m with m minimal such that M_N ≥ target_rank (denominators of the
/// exponent series are exact powers of b, so powers of a single prime
/// factor would stall when b is composite). The plateau evidence uses q',
/// the smallest prime factor of b.
pub fn build_unbounded_family(
    pres: &Arc<Presentation>,
    target_rank: u64,
) -> Result<TwistRecipe, WitnessError> {
    if pres.graph().betti() != 1 {
        return Err(WitnessError::PreconditionViolated(format!(
            "the bounded-prefix family needs Betti number 1, got {}",
            pres.graph().betti()
        )));
    }
    let edge = pres.stable_letters()[0];
    let forward = true;
    let delta = oriented_delta(pres, edge, forward)?;
    if delta.numer().abs().is_one() || delta.denom().abs().is_one() {
        return Err(WitnessError::PreconditionViolated(format!(
            "Δ(t) = {delta} must have both numerator and denominator of absolute value ≥ 2"
        )));
    }
    let den: i64 = delta
        .denom()
        .try_into()
        .map_err(|_| WitnessError::PreconditionViolated("denominator too large".into()))?;
    let q_prime = smallest_prime_factor(den);
    let mut scale = BigInt::one();
    let mut chosen = None;
    for _ in 0..=N_EXPONENT_CAP {
        let prefix = integral_prefix_length(&delta, &scale);
        if prefix >= target_rank {
            chosen = Some((scale.clone(), prefix));
            break;
        }
        scale *= BigInt::from(den.abs());
    }
    let Some((scale, prefix)) = chosen else {
        return Err(WitnessError::SearchExhausted {
            bound: N_EXPONENT_CAP as u64,
            task: format!("growing N = {den}^m until the integral prefix reaches {target_rank}"),
        });
    };
    let p = find_twist_base(pres, edge, forward, &delta)?;
    let e = pres.graph().edge(edge);
    Ok(TwistRecipe {
        pres: Arc::clone(pres),
        kind: WitnessRecipeKind::NonIntegralModulus,
        edge,
        forward,
        vertex: e.to,
        p,
        scale,
        delta,
        partner: None,
        gamma: None,
        q_prime: Some(q_prime),
        prefix_len: Some(prefix),
    })
}

fn smallest_prime_factor(n: i64) -> i64 {
    let n = n.abs();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return d;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    n
}

/// Solves for the twist parameter of the commutator family on a system of
/// Betti ≥ 2: the smallest p > 0 such that, with x at the target of t,
///
///   (1) x^p s = s x^{pΔ(s)}
///   (2) γ = p(Δ(s)−1)/(Δ(s)Δ(t)) is a nonzero integer
///   (3) x^{p(Δ(s)−1)} t⁻¹s⁻¹ = t⁻¹s⁻¹ x^γ
///   (4) x^γ commutes with [t,s] = tst⁻¹s⁻¹
///
/// each certified by word_equal. The recipe is φ: t ↦ t x^p, and conditions
/// (1)–(4) force φ([t,s]^k) = [t,s]^k x^{kγ}.
pub fn solve_twist_parameter(
    pres: &Arc<Presentation>,
    s_edge: EdgeIx,
    t_edge: EdgeIx,
) -> Result<TwistRecipe, WitnessError> {
    if pres.graph().betti() < 2 {
        return Err(WitnessError::PreconditionViolated(
            "the commutator family needs Betti number at least 2".into(),
        ));
    }
    if s_edge == t_edge {
        return Err(WitnessError::PreconditionViolated(
            "s and t must be distinct stable letters".into(),
        ));
    }
    for e in [s_edge, t_edge] {
        if pres.is_tree_edge(e) {
            return Err(WitnessError::PreconditionViolated(format!(
                "'{}' is not a stable letter",
                pres.graph().edge(e).id
            )));
        }
    }
    let delta_s = oriented_delta(pres, s_edge, true)?;
    let delta_t = oriented_delta(pres, t_edge, true)?;
    if delta_s.is_one() {
        return Err(WitnessError::PreconditionViolated(
            "Δ(s) = 1: use the integral-modulus twist on s instead".into(),
        ));
    }
    let t_graph_edge = pres.graph().edge(t_edge);
    let vertex = t_graph_edge.to;
    let s = GroupWord::stable_letter(pres, s_edge, true);
    let t = GroupWord::stable_letter(pres, t_edge, true);
    let ts_comm = t.concat(&s)?.concat(&t.inverse())?.concat(&s.inverse())?;
    let t_inv_s_inv = t.inverse().concat(&s.inverse())?;

    // γ/p and the other exponent coefficients as exact rationals.
    let gamma_coeff = (delta_s.clone() - Rational::one()) / (delta_s.clone() * delta_t.clone());
    let shift_coeff = delta_s.clone() - Rational::one();
    // p must clear every denominator in sight.
    let mut base = BigInt::one();
    for c in [&gamma_coeff, &shift_coeff, &delta_s] {
        base = num_integer::lcm(base, c.denom().clone());
    }
    let base: i64 = base
        .try_into()
        .map_err(|_| WitnessError::PreconditionViolated("commutation modulus too large".into()))?;

    for k in 1..=P_SEARCH_CAP {
        let p = match (k as i64).checked_mul(base) {
            Some(p) => p,
            None => break,
        };
        let p_rat = Rational::from(BigInt::from(p));
        let gamma = (p_rat.clone() * &gamma_coeff).to_integer();
        debug_assert!(!gamma.is_zero(), "γ ≠ 0 whenever Δ(s) ≠ 1");
        let shift = (p_rat.clone() * &shift_coeff).to_integer();
        let scaled_s = (p_rat * &delta_s).to_integer();
        // (1) x^p s = s x^{pΔ(s)}
        let lhs1 = GroupWord::vertex_power(pres, vertex, p).concat(&s)?;
        let rhs1 = s.concat(&GroupWord::vertex_power(pres, vertex, scaled_s))?;
        if !word_equal(&lhs1, &rhs1)? {
            continue;
        }
        // (3) x^{p(Δ(s)-1)} t⁻¹s⁻¹ = t⁻¹s⁻¹ x^γ
        let lhs3 = GroupWord::vertex_power(pres, vertex, shift).concat(&t_inv_s_inv)?;
        let rhs3 = t_inv_s_inv.concat(&GroupWord::vertex_power(pres, vertex, gamma.clone()))?;
        if !word_equal(&lhs3, &rhs3)? {
            continue;
        }
        // (4) x^γ [t,s] = [t,s] x^γ
        let xg = GroupWord::vertex_power(pres, vertex, gamma.clone());
        let lhs4 = xg.concat(&ts_comm)?;
        let rhs4 = ts_comm.concat(&xg)?;
        if !word_equal(&lhs4, &rhs4)? {
            continue;
        }
        return Ok(TwistRecipe {
            pres: Arc::clone(pres),
            kind: WitnessRecipeKind::Commutator,
            edge: t_edge,
            forward: true,
            vertex,
            p,
            scale: BigInt::one(),
            delta: delta_t,
            partner: Some((s_edge, true)),
            gamma: Some(gamma),
            q_prime: None,
            prefix_len: None,
        });
    }
    Err(WitnessError::SearchExhausted {
        bound: P_SEARCH_CAP,
        task: "solving the four commutator-twist conditions".into(),
    })
}

/// One entry of the ray verification.
#[derive(Debug, Clone)]
pub struct RayCheck {
    pub k: u64,
    pub l_k: Rational,
    /// Whether N·l_k is an integer (the gate for the word identity).
    pub scaled_integral: bool,
    /// The verified exponent: step·l_k, present when the gate is open.
    pub exponent: Option<BigInt>,
    /// Result of word_equal(φ(g^k), g^k·x^{exponent}); None when gated out.
    pub identity_holds: Option<bool>,
}

/// Distinctness certificate for one pair of ray vertices.
#[derive(Debug, Clone)]
pub struct OrbitCheck {
    pub k1: u64,
    pub k2: u64,
    pub distinct: bool,
}

/// q'-divisibility evidence along one step of the fixed ray.
#[derive(Debug, Clone)]
pub struct PlateauCheck {
    pub k: u64,
    /// Every end label on the quotient-graph path the ray letter crosses,
    /// with its q'-adic valuation.
    pub labels: Vec<(i64, u32)>,
    pub divisible: bool,
}

/// The full desk-scale verification of a recipe.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub depth: u64,
    pub ray: Vec<RayCheck>,
    pub orbits: Vec<OrbitCheck>,
    pub q_prime: Option<i64>,
    pub prefix_len: Option<u64>,
    pub plateau: Vec<PlateauCheck>,
    pub pass: bool,
}

/// Verifies a recipe to depth K:
///
/// (a) for every k ≤ K whose integrality gate is open, the exact word
///     identity φ(g^k) = g^k·x^{step·l_k};
/// (b) pairwise distinctness of the series values l_{k1} ≠ l_{k2}, which
///     (since Δ ≠ −1) certifies the ray vertices lie in distinct orbits;
/// (c) for the non-integral family, M_N and the q'-divisibility of the
///     labels along the ray.
///
/// Failures are recorded in the report, not raised.
pub fn verify_witness(recipe: &TwistRecipe, depth: u64) -> Result<VerificationReport, WitnessError> {
    let auto = recipe.automorphism()?;
    let pres = &recipe.pres;
    let ratio = recipe.ray_ratio();
    let step = recipe.step_exponent();
    let scale = match recipe.kind {
        WitnessRecipeKind::Commutator => BigInt::one(),
        _ => recipe.scale.clone(),
    };
    let ray_elem = recipe.ray_element()?;

    let mut ray = Vec::new();
    let mut gate_open = true;
    let mut l = Rational::zero();
    let mut term = Rational::one();
    let mut ray_power = GroupWord::identity(pres);
    for k in 1..=depth {
        l += &term;
        term *= &ratio;
        ray_power = ray_power.concat(&ray_elem)?;
        // The gate needs N·l_i ∈ ℤ for all i < k; l here is l_k, so the
        // gate for k+1 closes when N·l_k leaves ℤ.
        let scaled = Rational::from(scale.clone()) * &l;
        let scaled_integral = is_integral(&scaled);
        let (exponent, identity_holds) = if gate_open {
            let e_k = Rational::from(step.clone()) * &l;
            debug_assert!(is_integral(&e_k), "step·l_k must be integral when the gate is open");
            let e_k = e_k.to_integer();
            let image = auto.apply(&ray_power)?;
            let expected =
                ray_power.concat(&GroupWord::vertex_power(pres, recipe.vertex, e_k.clone()))?;
            (Some(e_k), Some(word_equal(&image, &expected)?))
        } else {
            (None, None)
        };
        ray.push(RayCheck { k, l_k: l.clone(), scaled_integral, exponent, identity_holds });
        if !scaled_integral {
            gate_open = false;
        }
    }

    // Orbit distinctness: exact inequality of the series values; the step
    // multiplier is nonzero, so distinct l values mean distinct exponents
    // and distinct ray orbits (the k = 0 basepoint included).
    let mut orbits = Vec::new();
    let series: Vec<Rational> = (0..=depth).map(|k| geometric_prefix_sum(&ratio, k)).collect();
    for k1 in 0..=depth {
        for k2 in (k1 + 1)..=depth {
            let distinct = series[k1 as usize] != series[k2 as usize];
            orbits.push(OrbitCheck { k1, k2, distinct });
        }
    }

    // Plateau evidence for the non-integral family.
    let (q_prime, prefix_len, plateau) = match recipe.kind {
        WitnessRecipeKind::NonIntegralModulus => {
            let q = recipe.q_prime.expect("non-integral recipes carry q'");
            let m_n = integral_prefix_length(&ratio, &recipe.scale);
            let labels = ray_labels(pres, &recipe.letter());
            let checks = (0..m_n.min(depth + 1))
                .map(|k| {
                    let entries: Vec<(i64, u32)> =
                        labels.iter().map(|l| (*l, valuation(*l, q))).collect();
                    let divisible = entries.iter().any(|(_, v)| *v >= 1);
                    PlateauCheck { k, labels: entries, divisible }
                })
                .collect::<Vec<_>>();
            (Some(q), Some(m_n), checks)
        }
        _ => (None, None, Vec::new()),
    };

    let pass = ray.iter().all(|r| r.identity_holds != Some(false))
        && orbits.iter().all(|o| o.distinct)
        && plateau.iter().all(|p| p.divisible);
    Ok(VerificationReport { depth, ray, orbits, q_prime, prefix_len, plateau, pass })
}

/// End labels of every quotient edge the oriented letter crosses.
fn ray_labels(pres: &Arc<Presentation>, letter: &GroupWord) -> Vec<i64> {
    let mut labels = Vec::new();
    for s in letter.syllables() {
        if let Syllable::Crossing { edge, .. } = s {
            let e = pres.graph().edge(*edge);
            labels.push(e.label_from);
            labels.push(e.label_to);
        }
    }
    labels
}

fn valuation(n: i64, p: i64) -> u32 {
    let mut n = n.abs();
    let mut v = 0;
    while n % p == 0 && n > 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Builds the witness a classification verdict calls for.
pub fn build_for(
    pres: &Arc<Presentation>,
    kind: WitnessRecipeKind,
    scale: impl Into<BigInt>,
    target_rank: u64,
) -> Result<TwistRecipe, WitnessError> {
    match kind {
        WitnessRecipeKind::IntegralModulus => build_integral_witness(pres, scale),
        WitnessRecipeKind::NonIntegralModulus => build_unbounded_family(pres, target_rank),
        WitnessRecipeKind::Commutator => {
            let letters = pres.stable_letters();
            // Prefer a pair with Δ(s) ≠ 1; fall back to the integral twist
            // (with Δ = 1) when every letter has trivial modulus.
            for &s in letters {
                let ds = oriented_delta(pres, s, true)?;
                if ds.is_one() {
                    continue;
                }
                for &t in letters {
                    if t != s {
                        return solve_twist_parameter(pres, s, t);
                    }
                }
            }
            build_integral_witness(pres, scale)
        }
    }
}
