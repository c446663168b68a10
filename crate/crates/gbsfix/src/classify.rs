//! The decision procedure: which 1-free non-elementary systems have all
//! tree-compatible automorphisms with finitely generated fixed subgroups,
//! with the applicable rank bounds, plus the Betti-0 extras (centre and the
//! all-automorphisms strengthening).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};
use thiserror::Error;

use crate::graph::{ElementaryKind, GraphError, LabelledGraph, VertexIx};
use crate::modulus::{
    modulus_of_system, vertex_ratios, FactoredRational, ModulusError, ModulusSubgroup, Rational,
};
use crate::words::{word_equal, GroupWord, WordError};
use std::sync::Arc;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("system is not 1-free: edge '{edge}' carries label {label}")]
    NotOneFree { edge: String, label: i64 },
    #[error("system is elementary ({kind}): all fixed subgroups have rank at most 2")]
    Elementary { kind: ElementaryKind },
    #[error("operation requires Betti number 0, got {betti}")]
    NonzeroBetti { betti: usize },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("internal check failed: {0}")]
    Internal(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Modulus(#[from] ModulusError),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// The three possible answers for a 1-free non-elementary system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// Every fixed subgroup is finitely generated, with a uniform rank bound.
    AllFgBounded { bound: u64 },
    /// Every fixed subgroup is finitely generated, but ranks are unbounded.
    AllFgUnbounded,
    /// Some automorphism has a non-finitely-generated fixed subgroup.
    NotAllFg,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::AllFgBounded { .. } => "ALL_FG_BOUNDED",
            Verdict::AllFgUnbounded => "ALL_FG_UNBOUNDED",
            Verdict::NotAllFg => "NOT_ALL_FG",
        }
    }
}

/// Whether the verdict is proved for all of Aut(G) or only for the
/// tree-compatible subgroup Aut^T(G).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    AutTOnly,
    AllAut,
}

impl Scope {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scope::AutTOnly => "AUT_T_ONLY",
            Scope::AllAut => "ALL_AUT",
        }
    }
}

/// Which witness family applies when the verdict is not `ALL_FG_BOUNDED`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessRecipeKind {
    /// Betti 1, modulus generated by an integer ≠ −1: the scaled twist family.
    IntegralModulus,
    /// Betti 1, modulus not generated by an integer: bounded-prefix twists of
    /// arbitrarily large rank.
    NonIntegralModulus,
    /// Betti ≥ 2: twist acting along a commutator ray.
    Commutator,
}

impl WitnessRecipeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            WitnessRecipeKind::IntegralModulus => "INTEGRAL_MODULUS",
            WitnessRecipeKind::NonIntegralModulus => "NON_INTEGRAL_MODULUS",
            WitnessRecipeKind::Commutator => "COMMUTATOR",
        }
    }
}

/// Summary of the modulus data entering the decision.
#[derive(Debug, Clone)]
pub struct ModulusSummary {
    /// Δ(t_e) per stable letter, in presentation order.
    pub generators: Vec<(String, Rational)>,
    pub subgroup: ModulusSubgroup,
    pub pm_one: bool,
    /// The integer generating Δ(G), when Δ(G) is cyclic and integral.
    pub integer_generator: Option<BigInt>,
}

/// The verdict record.
#[derive(Debug, Clone)]
pub struct Classification {
    pub betti: usize,
    pub vertex_count: usize,
    pub edge_count: usize,
    pub one_free: bool,
    pub modulus: ModulusSummary,
    pub verdict: Verdict,
    pub scope: Scope,
    pub witness_recipe: Option<WitnessRecipeKind>,
    pub notes: Vec<String>,
}

/// Classifies a valid, 1-free, non-elementary system.
///
/// The case split is a function of the Betti number and the Δ(G) predicates:
/// Betti 0 is bounded by max(1, 2|E|) for all of Aut(G); Betti 1 splits on
/// Δ(G) = {1,−1} (bounded by 2|V|+1), Δ(G) not generated by an integer
/// (finitely generated, unbounded rank), or Δ(G) generated by an integer
/// other than −1 (not all finitely generated); Betti ≥ 2 is never all
/// finitely generated.
pub fn classify(graph: &LabelledGraph) -> Result<Classification, ClassifyError> {
    if let Some(kind) = graph.elementary_kind() {
        return Err(ClassifyError::Elementary { kind });
    }
    if let Some(edge) = graph.one_free_violation() {
        let label = if edge.label_from.abs() == 1 { edge.label_from } else { edge.label_to };
        return Err(ClassifyError::NotOneFree { edge: edge.id.clone(), label });
    }
    let root = graph.vertex_ids().next().expect("validated graphs are nonempty").to_string();
    let pres = graph.presentation(&root)?;
    let modulus = modulus_of_system(graph, &pres)?;

    let betti = graph.betti();
    let vertex_count = graph.vertex_count();
    let edge_count = graph.edge_count();
    let pm_one = modulus.subgroup.is_pm_one();
    let integer_generator = if modulus.subgroup.is_cyclic() {
        modulus.subgroup.generated_by_integer()?
    } else {
        None
    };

    let (verdict, scope, witness_recipe) = match betti {
        0 => (
            Verdict::AllFgBounded { bound: (2 * edge_count as u64).max(1) },
            Scope::AllAut,
            None,
        ),
        1 => {
            if pm_one {
                (
                    Verdict::AllFgBounded { bound: 2 * vertex_count as u64 + 1 },
                    Scope::AutTOnly,
                    None,
                )
            } else if integer_generator.is_none() {
                (
                    Verdict::AllFgUnbounded,
                    Scope::AutTOnly,
                    Some(WitnessRecipeKind::NonIntegralModulus),
                )
            } else {
                (
                    Verdict::NotAllFg,
                    Scope::AutTOnly,
                    Some(WitnessRecipeKind::IntegralModulus),
                )
            }
        }
        _ => (Verdict::NotAllFg, Scope::AutTOnly, Some(WitnessRecipeKind::Commutator)),
    };

    let mut notes = vec![
        "point-free automorphisms have fixed subgroups of rank at most 2".to_string(),
        format!(
            "sign -1 automorphisms have free fixed subgroups of rank at most 2|E| = {}",
            2 * edge_count
        ),
        "finite-order automorphisms always have finitely generated fixed subgroups".to_string(),
    ];
    if betti == 1 && modulus.subgroup.is_trivial() {
        notes.push(
            "modulus subgroup is trivial {1}; treated as generated by the integer 1".to_string(),
        );
    }
    if scope == Scope::AutTOnly {
        notes.push(
            "open: whether the verdict extends to automorphisms that preserve no tree is not settled for this class"
                .to_string(),
        );
    }

    let generators = modulus
        .stable_deltas
        .iter()
        .map(|(e, d)| (graph.edge(*e).id.clone(), d.to_rational()))
        .collect();

    Ok(Classification {
        betti,
        vertex_count,
        edge_count,
        one_free: true,
        modulus: ModulusSummary {
            generators,
            subgroup: modulus.subgroup,
            pm_one,
            integer_generator,
        },
        verdict,
        scope,
        witness_recipe,
        notes,
    })
}

/// Classification of the one-loop system ⟨x, t | x^p = t x^q t^{-1}⟩,
/// normalised so |q| ≥ |p| and |p| ≠ 1.
///
/// Cross-checks the general decision against the three expected cases
/// (p = −q bounded by 3; p ∤ q unbounded; otherwise not all f.g.) and
/// upgrades the scope to all of Aut(G) in the first two, where the system
/// is rigid.
pub fn classify_bs(p: i64, q: i64) -> Result<Classification, ClassifyError> {
    if p == 0 || q == 0 {
        return Err(ClassifyError::PreconditionViolated("p and q must be nonzero".into()));
    }
    if q.abs() < p.abs() {
        return Err(ClassifyError::PreconditionViolated(format!(
            "require |q| >= |p|, got p={p}, q={q}"
        )));
    }
    if p.abs() == 1 {
        return Err(ClassifyError::PreconditionViolated(
            "require |p| != 1 (the solvable groups are excluded)".into(),
        ));
    }
    let graph = LabelledGraph::bs(p, q)?;
    let mut c = classify(&graph)?;
    let expected = if p == -q {
        Verdict::AllFgBounded { bound: 3 }
    } else if q % p != 0 {
        Verdict::AllFgUnbounded
    } else {
        Verdict::NotAllFg
    };
    if c.verdict != expected {
        return Err(ClassifyError::Internal(format!(
            "BS({p},{q}) classified as {:?}, expected {:?}",
            c.verdict, expected
        )));
    }
    if !matches!(c.verdict, Verdict::NotAllFg) {
        c.scope = Scope::AllAut;
        c.notes.retain(|n| !n.starts_with("open:"));
    }
    Ok(c)
}

/// Centre data for a Betti-0 system: x_root^c generates the centre.
#[derive(Debug, Clone)]
pub struct CenterInfo {
    pub root: String,
    pub exponent: BigInt,
    /// Propagated ratio m_v per vertex (x_root = x_v^{m_v} formally).
    pub ratios: Vec<(String, Rational)>,
}

/// Computes the minimal c > 0 such that x_root^c is central, for Betti-0
/// systems.
///
/// Propagates m_root = 1 with m_far = m_near·(far label)/(near label) across
/// the tree, and takes the minimal c for which every tree crossing of
/// x_root^c is an exact rewrite: crossing an edge with near label a from
/// vertex u requires den(m_u/a) | c. Centrality of x_root^c is then verified
/// against every generator by word equality.
pub fn center_exponent(graph: &LabelledGraph, root: &str) -> Result<CenterInfo, ClassifyError> {
    if graph.betti() != 0 {
        return Err(ClassifyError::NonzeroBetti { betti: graph.betti() });
    }
    let pres = Arc::new(graph.presentation(root)?);
    // m_v = 1 / c_v with c_v the commensuration ratio of vertex_ratios.
    let ratios: Vec<FactoredRational> = vertex_ratios(graph, &pres)?
        .into_iter()
        .map(|c| c.inv())
        .collect();
    let mut c = BigInt::one();
    for v in pres.bfs_order() {
        let Some((parent, e, forward)) = pres.parent_link(v) else { continue };
        let edge = graph.edge(e);
        let near = if forward { edge.label_from } else { edge.label_to };
        let m_u = ratios[parent.0].to_rational();
        let step = m_u / Rational::from(BigInt::from(near));
        c = c.lcm(step.denom());
    }
    debug_assert!(c.is_positive());
    // Necessary consequence: c·m_v is an integer for every vertex.
    for m in &ratios {
        let scaled = m.to_rational() * Rational::from(c.clone());
        debug_assert!(scaled.denom().is_one());
    }
    // Verify centrality by conjugating with every generator.
    let z = GroupWord::vertex_power(&pres, pres.root(), c.clone());
    let mut gens: Vec<GroupWord> = (0..graph.vertex_count())
        .map(|i| GroupWord::vertex_power(&pres, VertexIx(i), 1))
        .collect();
    gens.extend(
        pres.stable_letters()
            .iter()
            .map(|e| GroupWord::stable_letter(&pres, *e, true)),
    );
    for g in &gens {
        let conj = g.concat(&z)?.concat(&g.inverse())?;
        if !word_equal(&conj, &z)? {
            return Err(ClassifyError::Internal(format!(
                "computed centre exponent {c} fails the commutation check"
            )));
        }
    }
    let ratios = ratios
        .iter()
        .enumerate()
        .map(|(i, m)| (graph.vertex_id(VertexIx(i)).to_string(), m.to_rational()))
        .collect();
    Ok(CenterInfo { root: root.to_string(), exponent: c, ratios })
}
