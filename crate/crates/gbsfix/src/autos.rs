//! Automorphisms given by generator images.
//!
//! A [`GeneratorMap`] assigns an image word to every generator together with
//! a declared inverse map. [`check_automorphism`] verifies that every relator
//! maps to the identity and that the two maps compose to the identity on
//! generators; nothing is assumed. Validated automorphisms can be applied to
//! words, composed, and interrogated for the sign invariant.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use thiserror::Error;

use crate::graph::{EdgeIx, Presentation, VertexIx};
use crate::words::{
    close_path, tree_ball_capped, word_equal, GroupWord, Syllable, WordError, DEFAULT_RADIUS_CAP,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutoError {
    #[error("images do not preserve relator '{relator}'")]
    NotHomomorphism { relator: String },
    #[error("declared inverse fails on generator '{generator}'")]
    NotInvertible { generator: String },
    #[error("image given for unknown generator '{name}'")]
    UnknownGenerator { name: String },
    #[error(transparent)]
    Word(#[from] WordError),
}

/// A generator of the presentation: a vertex generator or a stable letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gen {
    Vertex(VertexIx),
    Stable(EdgeIx),
}

/// Generator images plus declared inverse images. Generators without an
/// explicit image map to themselves.
#[derive(Debug, Clone)]
pub struct GeneratorMap {
    pres: Arc<Presentation>,
    images: BTreeMap<Gen, GroupWord>,
    inverse_images: BTreeMap<Gen, GroupWord>,
}

impl GeneratorMap {
    pub fn new(pres: &Arc<Presentation>) -> Self {
        GeneratorMap {
            pres: Arc::clone(pres),
            images: BTreeMap::new(),
            inverse_images: BTreeMap::new(),
        }
    }

    pub fn presentation(&self) -> &Arc<Presentation> {
        &self.pres
    }

    fn resolve(&self, name: &str) -> Result<Gen, AutoError> {
        let g = self.pres.graph();
        if let Some(v) = g.vertex(name) {
            return Ok(Gen::Vertex(v));
        }
        if let Some(e) = g.edge_by_id(name) {
            if !self.pres.is_tree_edge(e) {
                return Ok(Gen::Stable(e));
            }
        }
        Err(AutoError::UnknownGenerator { name: name.to_string() })
    }

    pub fn set_image(&mut self, name: &str, image: GroupWord) -> Result<(), AutoError> {
        let gen = self.resolve(name)?;
        self.images.insert(gen, image);
        Ok(())
    }

    pub fn set_inverse_image(&mut self, name: &str, image: GroupWord) -> Result<(), AutoError> {
        let gen = self.resolve(name)?;
        self.inverse_images.insert(gen, image);
        Ok(())
    }

    fn gen_word(&self, gen: Gen) -> GroupWord {
        match gen {
            Gen::Vertex(v) => GroupWord::vertex_power(&self.pres, v, 1),
            Gen::Stable(e) => GroupWord::stable_letter(&self.pres, e, true),
        }
    }

    fn image_of(&self, gen: Gen) -> GroupWord {
        self.images.get(&gen).cloned().unwrap_or_else(|| self.gen_word(gen))
    }

    fn inverse_image_of(&self, gen: Gen) -> GroupWord {
        self.inverse_images
            .get(&gen)
            .cloned()
            .unwrap_or_else(|| self.gen_word(gen))
    }

    fn all_generators(&self) -> Vec<Gen> {
        let g = self.pres.graph();
        let mut gens: Vec<Gen> = (0..g.vertex_count()).map(|i| Gen::Vertex(VertexIx(i))).collect();
        gens.extend(self.pres.stable_letters().iter().map(|e| Gen::Stable(*e)));
        gens
    }

    fn apply_map(&self, w: &GroupWord, inverse: bool) -> Result<GroupWord, WordError> {
        w.substitute(|syl| {
            let gen = match syl {
                Syllable::Vertex { vertex, .. } => Gen::Vertex(*vertex),
                Syllable::Crossing { edge, .. } => Gen::Stable(*edge),
            };
            let img = if inverse { self.inverse_image_of(gen) } else { self.image_of(gen) };
            match syl {
                Syllable::Vertex { exp, .. } => img.pow_big(exp),
                Syllable::Crossing { forward, .. } => {
                    Ok(if *forward { img } else { img.inverse() })
                }
            }
        })
    }
}

/// How the compatibility of a validated map with the tree action is known.
///
/// Twists and global vertex-generator inversions are the classes the
/// constructions use and are certified structurally; anything else passes
/// the homomorphism/invertibility checks only and is tagged unverified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompatibilityClass {
    Identity,
    Twist,
    VertexInversion,
    Unverified,
}

impl CompatibilityClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            CompatibilityClass::Identity => "identity",
            CompatibilityClass::Twist => "twist",
            CompatibilityClass::VertexInversion => "vertex-inversion",
            CompatibilityClass::Unverified => "unverified compatibility",
        }
    }
}

/// A generator map that passed relator and invertibility checks.
#[derive(Debug, Clone)]
pub struct Automorphism {
    map: GeneratorMap,
    compatibility: CompatibilityClass,
}

/// The sign of a compatible automorphism: +1 when it restricts to the
/// identity on the stabiliser of some fixed tree point, −1 when it inverts
/// stabilisers, undefined when no fixed point is found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
    Undefined,
}

/// Verifies the two [`GeneratorMap`] invariants and returns a validated
/// handle. Relators are checked with `word_equal`; the failing relator or
/// generator is named in the error.
///
/// Relators are mapped as formal products of generators: a relator reduces
/// to the identity as a group element, so substituting into its reduced
/// form would make the check vacuous.
pub fn check_automorphism(map: GeneratorMap) -> Result<Automorphism, AutoError> {
    let pres = Arc::clone(&map.pres);
    let graph = pres.graph();
    // Every relator must map to the identity.
    for (i, edge) in graph.edges().iter().enumerate() {
        let e = EdgeIx(i);
        let factors: Vec<(Gen, BigInt)> = if pres.is_tree_edge(e) {
            // x_from^a x_to^{-b}
            vec![
                (Gen::Vertex(edge.from), BigInt::from(edge.label_from)),
                (Gen::Vertex(edge.to), BigInt::from(-edge.label_to)),
            ]
        } else {
            // t x_to^b t^{-1} x_from^{-a}
            vec![
                (Gen::Stable(e), BigInt::from(1)),
                (Gen::Vertex(edge.to), BigInt::from(edge.label_to)),
                (Gen::Stable(e), BigInt::from(-1)),
                (Gen::Vertex(edge.from), BigInt::from(-edge.label_from)),
            ]
        };
        let mut image = GroupWord::identity(&pres);
        for (gen, exp) in &factors {
            image = image.concat(&map.image_of(*gen).pow_big(exp)?)?;
        }
        if !image.is_identity() {
            return Err(AutoError::NotHomomorphism { relator: describe_relator(&pres, e) });
        }
    }
    // The declared inverse must invert on every generator, both ways round.
    for gen in map.all_generators() {
        let g = map.gen_word(gen);
        let round1 = map.apply_map(&map.inverse_image_of(gen), false)?;
        let round2 = map.apply_map(&map.image_of(gen), true)?;
        if !word_equal(&round1, &g)? || !word_equal(&round2, &g)? {
            return Err(AutoError::NotInvertible { generator: gen_name(&pres, gen) });
        }
    }
    let compatibility = classify_compatibility(&map);
    Ok(Automorphism { map, compatibility })
}

fn describe_relator(pres: &Presentation, e: EdgeIx) -> String {
    let edge = pres.graph().edge(e);
    let from = pres.graph().vertex_id(edge.from);
    let to = pres.graph().vertex_id(edge.to);
    if pres.is_tree_edge(e) {
        format!("{from}^{} = {to}^{}", edge.label_from, edge.label_to)
    } else {
        format!("{id} {to}^{} {id}^-1 = {from}^{}", edge.label_to, edge.label_from, id = edge.id)
    }
}

fn gen_name(pres: &Presentation, gen: Gen) -> String {
    match gen {
        Gen::Vertex(v) => pres.graph().vertex_id(v).to_string(),
        Gen::Stable(e) => pres.graph().edge(e).id.clone(),
    }
}

/// Syntactic classification of the map against the certified classes.
fn classify_compatibility(map: &GeneratorMap) -> CompatibilityClass {
    let pres = &map.pres;
    let mut vertex_fixed = true;
    let mut vertex_inverted = true;
    for gen in map.all_generators() {
        if let Gen::Vertex(_) = gen {
            let g = map.gen_word(gen);
            let img = map.image_of(gen);
            if !word_equal(&img, &g).unwrap_or(false) {
                vertex_fixed = false;
            }
            if !word_equal(&img, &g.inverse()).unwrap_or(false) {
                vertex_inverted = false;
            }
        }
    }
    let mut twisted_letters = Vec::new();
    let mut stable_fixed = true;
    for &e in pres.stable_letters() {
        let t = GroupWord::stable_letter(pres, e, true);
        let img = map.image_of(Gen::Stable(e));
        if word_equal(&img, &t).unwrap_or(false) {
            continue;
        }
        stable_fixed = false;
        // A twist multiplies one stable letter by an elliptic element on
        // either side: t ↦ t·z or t ↦ z·t with z elliptic.
        let right = t.inverse().concat(&img).map(|z| z.is_elliptic()).unwrap_or(false);
        let left = img.concat(&t.inverse()).map(|z| z.is_elliptic()).unwrap_or(false);
        if right || left {
            twisted_letters.push(e);
        } else {
            return CompatibilityClass::Unverified;
        }
    }
    if vertex_fixed && stable_fixed {
        CompatibilityClass::Identity
    } else if vertex_fixed && !twisted_letters.is_empty() {
        CompatibilityClass::Twist
    } else if vertex_inverted {
        CompatibilityClass::VertexInversion
    } else {
        CompatibilityClass::Unverified
    }
}

impl Automorphism {
    pub fn presentation(&self) -> &Arc<Presentation> {
        &self.map.pres
    }

    pub fn compatibility(&self) -> CompatibilityClass {
        self.compatibility
    }

    pub fn image_of_generator(&self, name: &str) -> Option<GroupWord> {
        let gen = self.map.resolve(name).ok()?;
        Some(self.map.image_of(gen))
    }

    /// Applies the automorphism: substitutes generator images and reduces.
    pub fn apply(&self, w: &GroupWord) -> Result<GroupWord, WordError> {
        self.map.apply_map(w, false)
    }

    pub fn apply_inverse(&self, w: &GroupWord) -> Result<GroupWord, WordError> {
        self.map.apply_map(w, true)
    }

    /// The inverse automorphism (maps swapped); already validated.
    pub fn inverse(&self) -> Automorphism {
        let map = GeneratorMap {
            pres: Arc::clone(&self.map.pres),
            images: self.map.inverse_images.clone(),
            inverse_images: self.map.images.clone(),
        };
        let compatibility = classify_compatibility(&map);
        Automorphism { map, compatibility }
    }

    /// Composition self ∘ other: apply `other` first.
    pub fn compose(&self, other: &Automorphism) -> Result<Automorphism, AutoError> {
        let pres = Arc::clone(&self.map.pres);
        let mut images = BTreeMap::new();
        let mut inverse_images = BTreeMap::new();
        for gen in self.map.all_generators() {
            images.insert(gen, self.apply(&other.map.image_of(gen))?);
            inverse_images.insert(gen, other.apply_inverse(&self.map.inverse_image_of(gen))?);
        }
        let map = GeneratorMap { pres, images, inverse_images };
        let compatibility = classify_compatibility(&map);
        Ok(Automorphism { map, compatibility })
    }

    /// Computes the sign by inspecting vertex-generator images, falling back
    /// to a search for a fixed vertex coset in the ball of radius `cap`
    /// around the root: a coset g·G_v is certified fixed with identity
    /// (resp. inverted) restriction when φ(g x_v g^{-1}) = (g x_v g^{-1})^{±1}.
    pub fn sign_with_cap(&self, cap: usize) -> Sign {
        let pres = &self.map.pres;
        let n = pres.graph().vertex_count();
        let mut all_fixed = true;
        let mut all_inverted = true;
        for i in 0..n {
            let gen = Gen::Vertex(VertexIx(i));
            let g = self.map.gen_word(gen);
            let img = self.map.image_of(gen);
            if !word_equal(&img, &g).unwrap_or(false) {
                all_fixed = false;
            }
            if !word_equal(&img, &g.inverse()).unwrap_or(false) {
                all_inverted = false;
            }
        }
        if all_fixed {
            return Sign::Plus;
        }
        if all_inverted {
            return Sign::Minus;
        }
        // Ball search for a fixed coset.
        let Ok(ball) = tree_ball_capped(pres, pres.root(), cap, cap) else {
            return Sign::Undefined;
        };
        let mut found_inverted = false;
        for bv in &ball.vertices {
            let g = close_path(&bv.representative);
            let x = GroupWord::vertex_power(pres, bv.coset.vertex, 1);
            let Ok(stab) = g.concat(&x).and_then(|gx| gx.concat(&g.inverse())) else {
                continue;
            };
            let Ok(image) = self.apply(&stab) else { continue };
            if word_equal(&image, &stab).unwrap_or(false) {
                return Sign::Plus;
            }
            if word_equal(&image, &stab.inverse()).unwrap_or(false) {
                found_inverted = true;
            }
        }
        if found_inverted {
            Sign::Minus
        } else {
            Sign::Undefined
        }
    }

    pub fn sign(&self) -> Sign {
        self.sign_with_cap(DEFAULT_RADIUS_CAP)
    }
}

/// Convenience constructor for twist-style maps: `letter ↦ letter·x_v^{exp}`
/// (or `x_v^{exp}·letter` for the reversed orientation), everything else
/// fixed.
pub fn twist_map(
    pres: &Arc<Presentation>,
    edge: EdgeIx,
    positive_orientation: bool,
    vertex: VertexIx,
    exp: &BigInt,
) -> Result<GeneratorMap, AutoError> {
    let t = GroupWord::stable_letter(pres, edge, true);
    let z = GroupWord::vertex_power(pres, vertex, exp.clone());
    let zinv = GroupWord::vertex_power(pres, vertex, -exp.clone());
    let (image, inverse_image) = if positive_orientation {
        (t.concat(&z)?, t.concat(&zinv)?)
    } else {
        (zinv.concat(&t)?, z.concat(&t)?)
    };
    let mut map = GeneratorMap::new(pres);
    let name = pres.graph().edge(edge).id.clone();
    map.set_image(&name, image)?;
    map.set_inverse_image(&name, inverse_image)?;
    Ok(map)
}
