//! JSON report types.
//!
//! Field order is fixed by the struct definitions, and every arbitrary-
//! precision integer is serialised as a decimal string (rationals as
//! `{"num": "...", "den": "..."}`), so output is stable enough for golden
//! tests and safe for consumers without big-integer JSON support.

use num_bigint::BigInt;
use serde::Serialize;

use crate::classify::Classification;
use crate::graph::LabelledGraph;
use crate::modulus::Rational;
use crate::witness::{TwistRecipe, VerificationReport};

#[derive(Debug, Clone, Serialize)]
pub struct RationalJson {
    pub num: String,
    pub den: String,
}

pub fn rational_json(r: &Rational) -> RationalJson {
    RationalJson { num: r.numer().to_string(), den: r.denom().to_string() }
}

pub fn bigint_json(n: &BigInt) -> String {
    n.to_string()
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeJson {
    pub id: String,
    pub from: String,
    pub label_from: i64,
    pub to: String,
    pub label_to: i64,
    #[serde(rename = "loop")]
    pub is_loop: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModulusGeneratorJson {
    pub edge: String,
    pub delta: RationalJson,
}

#[derive(Debug, Clone, Serialize)]
pub struct CanonicalSubgroupJson {
    pub minus_one: bool,
    pub primes: Vec<String>,
    pub basis: Vec<Vec<String>>,
    pub basis_signs: Vec<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModulusJson {
    pub generators: Vec<ModulusGeneratorJson>,
    pub canonical: CanonicalSubgroupJson,
    pub pm_one: bool,
    pub integer_generator: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SystemJson {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeJson>,
    pub betti: usize,
    pub one_free: bool,
    pub elementary: Option<String>,
    pub modulus: Option<ModulusJson>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationJson {
    pub verdict: String,
    pub bound: Option<String>,
    pub scope: String,
    pub witness_recipe: Option<String>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessJson {
    pub kind: String,
    pub stable_letter: String,
    pub orientation: String,
    pub vertex: String,
    pub p: i64,
    #[serde(rename = "N")]
    pub scale: String,
    pub delta: RationalJson,
    pub automorphism: String,
    pub partner: Option<String>,
    pub gamma: Option<String>,
    pub q_prime: Option<String>,
    pub prefix_len: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RayCheckJson {
    pub k: u64,
    pub l_k: RationalJson,
    pub scaled_integral: bool,
    pub exponent: Option<String>,
    pub identity_holds: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitCheckJson {
    pub k1: u64,
    pub k2: u64,
    pub distinct: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlateauCheckJson {
    pub k: u64,
    pub labels: Vec<LabelValuationJson>,
    pub divisible: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LabelValuationJson {
    pub label: i64,
    pub valuation: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationJson {
    pub depth: u64,
    pub pass: bool,
    pub ray: Vec<RayCheckJson>,
    pub orbits: Vec<OrbitCheckJson>,
    pub q_prime: Option<String>,
    pub prefix_len: Option<u64>,
    pub plateau: Vec<PlateauCheckJson>,
}

/// The top-level report emitted by `classify`, `bs` and `witness`.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub system: SystemJson,
    pub classification: Option<ClassificationJson>,
    pub witness: Option<WitnessJson>,
    pub verification: Option<VerificationJson>,
    pub warnings: Vec<String>,
}

pub fn system_json(graph: &LabelledGraph, classification: Option<&Classification>) -> SystemJson {
    let edges = graph
        .edges()
        .iter()
        .map(|e| EdgeJson {
            id: e.id.clone(),
            from: graph.vertex_id(e.from).to_string(),
            label_from: e.label_from,
            to: graph.vertex_id(e.to).to_string(),
            label_to: e.label_to,
            is_loop: e.is_loop(),
        })
        .collect();
    let modulus = classification.map(|c| {
        let s = &c.modulus.subgroup;
        ModulusJson {
            generators: c
                .modulus
                .generators
                .iter()
                .map(|(edge, d)| ModulusGeneratorJson {
                    edge: edge.clone(),
                    delta: rational_json(d),
                })
                .collect(),
            canonical: CanonicalSubgroupJson {
                minus_one: s.contains_minus_one(),
                primes: s.primes().iter().map(|p| p.to_string()).collect(),
                basis: s
                    .basis()
                    .iter()
                    .map(|row| row.iter().map(bigint_json).collect())
                    .collect(),
                basis_signs: s.basis_signs().to_vec(),
            },
            pm_one: c.modulus.pm_one,
            integer_generator: c.modulus.integer_generator.as_ref().map(bigint_json),
        }
    });
    SystemJson {
        vertices: graph.vertex_ids().map(str::to_string).collect(),
        edges,
        betti: graph.betti(),
        one_free: graph.is_one_free(),
        elementary: graph.elementary_kind().map(|k| k.to_string()),
        modulus,
    }
}

pub fn classification_json(c: &Classification) -> ClassificationJson {
    let bound = match &c.verdict {
        crate::classify::Verdict::AllFgBounded { bound } => Some(bound.to_string()),
        _ => None,
    };
    ClassificationJson {
        verdict: c.verdict.as_str().to_string(),
        bound,
        scope: c.scope.as_str().to_string(),
        witness_recipe: c.witness_recipe.map(|k| k.as_str().to_string()),
        notes: c.notes.clone(),
    }
}

pub fn witness_json(r: &TwistRecipe) -> WitnessJson {
    let graph = r.presentation().graph();
    WitnessJson {
        kind: r.kind.as_str().to_string(),
        stable_letter: graph.edge(r.edge).id.clone(),
        orientation: if r.forward { "forward".into() } else { "reversed".into() },
        vertex: graph.vertex_id(r.vertex).to_string(),
        p: r.p,
        scale: r.scale.to_string(),
        delta: rational_json(&r.delta),
        automorphism: r.describe(),
        partner: r.partner.map(|(e, _)| graph.edge(e).id.clone()),
        gamma: r.gamma.as_ref().map(bigint_json),
        q_prime: r.q_prime.map(|q| q.to_string()),
        prefix_len: r.prefix_len,
    }
}

pub fn verification_json(v: &VerificationReport) -> VerificationJson {
    VerificationJson {
        depth: v.depth,
        pass: v.pass,
        ray: v
            .ray
            .iter()
            .map(|r| RayCheckJson {
                k: r.k,
                l_k: rational_json(&r.l_k),
                scaled_integral: r.scaled_integral,
                exponent: r.exponent.as_ref().map(bigint_json),
                identity_holds: r.identity_holds,
            })
            .collect(),
        orbits: v
            .orbits
            .iter()
            .map(|o| OrbitCheckJson { k1: o.k1, k2: o.k2, distinct: o.distinct })
            .collect(),
        q_prime: v.q_prime.map(|q| q.to_string()),
        prefix_len: v.prefix_len,
        plateau: v
            .plateau
            .iter()
            .map(|p| PlateauCheckJson {
                k: p.k,
                labels: p
                    .labels
                    .iter()
                    .map(|(label, valuation)| LabelValuationJson { label: *label, valuation: *valuation })
                    .collect(),
                divisible: p.divisible,
            })
            .collect(),
    }
}
