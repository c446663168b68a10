//! Exact element arithmetic in the fundamental group of the graph of groups.
//!
//! Elements are stored as *path words* based at the presentation root: an
//! alternating sequence of vertex-generator powers and edge crossings, where
//! spanning-tree crossings are explicit letters that happen to be trivial in
//! the group. This gives one uniform pinch rule for tree and non-tree edges:
//!
//!   crossing(e) x_to^{b·k} crossing(e)⁻¹  →  x_from^{a·k}
//!
//! (labels a at the `from` end, b at the `to` end). Britton's lemma then
//! decides equality: a word is trivial iff it reduces to the empty path.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::graph::{EdgeIx, Presentation, VertexIx};
use crate::modulus::{vertex_ratios, FactoredRational, Rational};

/// Default cap on word length, in syllables.
pub const MAX_SYLLABLES: usize = 10_000;

/// Default cap on tree-ball radius.
pub const DEFAULT_RADIUS_CAP: usize = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("unknown generator '{name}' at byte {position}")]
    UnknownGenerator { name: String, position: usize },
    #[error("syntax error at byte {position}: {message}")]
    Syntax { message: String, position: usize },
    #[error("words live over different presentations")]
    PresentationMismatch,
    #[error("word exceeds the {cap}-syllable cap")]
    WordTooLong { cap: usize },
    #[error("radius {requested} exceeds the cap {cap}")]
    RadiusTooLarge { requested: usize, cap: usize },
}

/// One syllable of a path word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Syllable {
    /// A power of the vertex generator at `vertex`.
    Vertex { vertex: VertexIx, exp: BigInt },
    /// A traversal of `edge`; `forward` means from→to.
    Crossing { edge: EdgeIx, forward: bool },
}

impl Syllable {
    fn is_crossing(&self) -> bool {
        matches!(self, Syllable::Crossing { .. })
    }
}

/// A reduced path word based at the presentation root.
///
/// Group elements are loops at the root; the machinery also handles open
/// paths internally (coset representatives in the Bass-Serre tree).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupWord {
    pres: Arc<Presentation>,
    start: VertexIx,
    syllables: Vec<Syllable>,
}

/// Endpoints of one crossing: (source vertex, source label, target vertex,
/// target label) in the direction of traversal.
fn crossing_data(pres: &Presentation, edge: EdgeIx, forward: bool) -> (VertexIx, i64, VertexIx, i64) {
    let e = pres.graph().edge(edge);
    if forward {
        (e.from, e.label_from, e.to, e.label_to)
    } else {
        (e.to, e.label_to, e.from, e.label_from)
    }
}

impl GroupWord {
    pub fn presentation(&self) -> &Arc<Presentation> {
        &self.pres
    }

    pub fn identity(pres: &Arc<Presentation>) -> Self {
        GroupWord {
            pres: Arc::clone(pres),
            start: pres.root(),
            syllables: Vec::new(),
        }
    }

    /// x_v^k as a root-based loop (tree detour to v and back).
    pub fn vertex_power(pres: &Arc<Presentation>, v: VertexIx, exp: impl Into<BigInt>) -> Self {
        let exp = exp.into();
        let mut syllables = Vec::new();
        for (e, fwd) in pres.tree_path(pres.root(), v) {
            syllables.push(Syllable::Crossing { edge: e, forward: fwd });
        }
        syllables.push(Syllable::Vertex { vertex: v, exp });
        for (e, fwd) in pres.tree_path(v, pres.root()) {
            syllables.push(Syllable::Crossing { edge: e, forward: fwd });
        }
        let mut w = GroupWord {
            pres: Arc::clone(pres),
            start: pres.root(),
            syllables,
        };
        w.reduce_in_place();
        w
    }

    /// A stable letter t_e^{±1} as a root-based loop.
    pub fn stable_letter(pres: &Arc<Presentation>, e: EdgeIx, positive: bool) -> Self {
        assert!(
            !pres.is_tree_edge(e),
            "stable letters are non-tree edges only"
        );
        let (src, _, dst, _) = crossing_data(pres, e, positive);
        let mut syllables = Vec::new();
        for (f, fwd) in pres.tree_path(pres.root(), src) {
            syllables.push(Syllable::Crossing { edge: f, forward: fwd });
        }
        syllables.push(Syllable::Crossing { edge: e, forward: positive });
        for (f, fwd) in pres.tree_path(dst, pres.root()) {
            syllables.push(Syllable::Crossing { edge: f, forward: fwd });
        }
        let mut w = GroupWord {
            pres: Arc::clone(pres),
            start: pres.root(),
            syllables,
        };
        w.reduce_in_place();
        w
    }

    /// A generator by name: vertex id or stable-letter edge id.
    pub fn generator(pres: &Arc<Presentation>, name: &str) -> Option<Self> {
        if let Some(v) = pres.graph().vertex(name) {
            return Some(Self::vertex_power(pres, v, 1));
        }
        if let Some(e) = pres.graph().edge_by_id(name) {
            if !pres.is_tree_edge(e) {
                return Some(Self::stable_letter(pres, e, true));
            }
        }
        None
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn syllable_count(&self) -> usize {
        self.syllables.len()
    }

    pub fn crossing_count(&self) -> usize {
        self.syllables.iter().filter(|s| s.is_crossing()).count()
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Concatenation (group product for root-based loops), reduced.
    pub fn concat(&self, other: &GroupWord) -> Result<GroupWord, WordError> {
        if !Arc::ptr_eq(&self.pres, &other.pres) && self.pres != other.pres {
            return Err(WordError::PresentationMismatch);
        }
        let total = self.syllables.len() + other.syllables.len();
        if total > MAX_SYLLABLES {
            return Err(WordError::WordTooLong { cap: MAX_SYLLABLES });
        }
        let mut syllables = self.syllables.clone();
        syllables.extend(other.syllables.iter().cloned());
        let mut w = GroupWord {
            pres: Arc::clone(&self.pres),
            start: self.start,
            syllables,
        };
        w.reduce_in_place();
        Ok(w)
    }

    pub fn inverse(&self) -> GroupWord {
        let syllables = self
            .syllables
            .iter()
            .rev()
            .map(|s| match s {
                Syllable::Vertex { vertex, exp } => Syllable::Vertex {
                    vertex: *vertex,
                    exp: -exp.clone(),
                },
                Syllable::Crossing { edge, forward } => Syllable::Crossing {
                    edge: *edge,
                    forward: !forward,
                },
            })
            .collect();
        GroupWord {
            pres: Arc::clone(&self.pres),
            start: self.start,
            syllables,
        }
    }

    pub fn pow(&self, n: i64) -> Result<GroupWord, WordError> {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut acc = GroupWord::identity(&self.pres);
        for _ in 0..n.unsigned_abs() {
            acc = acc.concat(&base)?;
        }
        Ok(acc)
    }

    /// Square-and-multiply power for arbitrary-precision exponents.
    pub fn pow_big(&self, n: &BigInt) -> Result<GroupWord, WordError> {
        let mut base = if n.is_negative() { self.inverse() } else { self.clone() };
        let mut e = n.abs();
        let mut acc = GroupWord::identity(&self.pres);
        let two = BigInt::from(2);
        while !e.is_zero() {
            if (&e % &two).is_one() {
                acc = acc.concat(&base)?;
            }
            e /= &two;
            if !e.is_zero() {
                base = base.concat(&base)?;
            }
        }
        Ok(acc)
    }

    /// Britton reduction: removes pinches and merges adjacent vertex powers
    /// until none remain. Idempotent.
    pub fn reduce(&self) -> GroupWord {
        let mut w = self.clone();
        w.reduce_in_place();
        w
    }

    fn reduce_in_place(&mut self) {
        let pres = Arc::clone(&self.pres);
        let mut out: Vec<Syllable> = Vec::with_capacity(self.syllables.len());
        for syl in self.syllables.drain(..) {
            push_reduced(&pres, &mut out, syl);
        }
        self.syllables = out;
    }

    /// The Δ value of the element: the product of the label ratios of its
    /// crossings. Tree crossings contribute 1, so this is the product of
    /// Δ(t_e)^{±1} over stable-letter occurrences.
    pub fn delta(&self) -> FactoredRational {
        let ratios = vertex_ratios(self.pres.graph(), &self.pres)
            .expect("labels already validated against the factor bound");
        let mut acc = FactoredRational::one();
        for s in &self.syllables {
            if let Syllable::Crossing { edge, forward } = s {
                let (src, a, dst, b) = crossing_data(&self.pres, *edge, *forward);
                let src_side = ratios[src.0].mul(&FactoredRational::from_i64(a).unwrap());
                let dst_side = ratios[dst.0].mul(&FactoredRational::from_i64(b).unwrap());
                acc = acc.mul(&dst_side.div(&src_side));
            }
        }
        acc
    }

    pub fn delta_rational(&self) -> Rational {
        self.delta().to_rational()
    }

    /// True iff the element fixes a point of the Bass-Serre tree, i.e. is
    /// conjugate into a vertex group. Decided by cyclic reduction: an element
    /// whose cyclically reduced form still crosses edges is hyperbolic.
    pub fn is_elliptic(&self) -> bool {
        let mut w = self.reduce();
        loop {
            if w.crossing_count() == 0 {
                return true;
            }
            // Locate the first and last crossings and the flanking exponents.
            let first_cross = w.syllables.iter().position(|s| s.is_crossing()).unwrap();
            let last_cross = w.syllables.iter().rposition(|s| s.is_crossing()).unwrap();
            let (e1, d1) = match &w.syllables[first_cross] {
                Syllable::Crossing { edge, forward } => (*edge, *forward),
                _ => unreachable!(),
            };
            let (e2, d2) = match &w.syllables[last_cross] {
                Syllable::Crossing { edge, forward } => (*edge, *forward),
                _ => unreachable!(),
            };
            if e1 != e2 || d1 == d2 {
                return false;
            }
            // Junction exponent: trailing syllable + leading syllable.
            let mut wrap = BigInt::zero();
            if first_cross == 1 {
                if let Syllable::Vertex { exp, .. } = &w.syllables[0] {
                    wrap += exp;
                }
            }
            if last_cross + 2 == w.syllables.len() {
                if let Syllable::Vertex { exp, .. } = &w.syllables[last_cross + 1] {
                    wrap += exp;
                }
            }
            // The wrap sits at the source vertex of the first crossing; the
            // junction pinches iff the source label divides it.
            let (_, a, _, _) = crossing_data(&w.pres, e1, d1);
            if (&wrap % BigInt::from(a.abs())).is_zero() {
                // Conjugate by the leading segment and re-reduce; this
                // removes (at least) the junction pair of crossings.
                let prefix = GroupWord {
                    pres: Arc::clone(&w.pres),
                    start: w.start,
                    syllables: w.syllables[..=first_cross].to_vec(),
                };
                let conj = prefix
                    .inverse()
                    .concat(&w)
                    .and_then(|u| u.concat(&prefix))
                    .expect("cyclic reduction stays within the length cap");
                if conj.crossing_count() >= w.crossing_count() {
                    // No progress; treat as cyclically reduced.
                    return false;
                }
                w = conj;
            } else {
                return false;
            }
        }
    }

    /// Left-to-right normal form: residues in [0, |label|) before every
    /// crossing, all excess pushed into the trailing syllable. Equal group
    /// elements have identical canonical forms.
    ///
    /// Pushing through a crossing carries an amount divisible by the far
    /// label, so pinch-freeness of the reduced input is preserved and the
    /// output is the unique normal form of this element.
    pub fn canonicalize(&self) -> GroupWord {
        let w = self.reduce();
        let mut out: Vec<Syllable> = Vec::with_capacity(w.syllables.len());
        let mut pending: Option<(VertexIx, BigInt)> = None;
        for s in w.syllables {
            match s {
                Syllable::Vertex { vertex, exp } => match pending.as_mut() {
                    Some((v, e)) => {
                        debug_assert_eq!(*v, vertex);
                        *e += exp;
                    }
                    None => pending = Some((vertex, exp)),
                },
                Syllable::Crossing { edge, forward } => {
                    let (src, a, dst, b) = crossing_data(&w.pres, edge, forward);
                    let exp = match pending.take() {
                        Some((_, e)) => e,
                        None => BigInt::zero(),
                    };
                    let r = exp.mod_floor(&BigInt::from(a.abs()));
                    let q = (&exp - &r) / BigInt::from(a);
                    if !r.is_zero() {
                        out.push(Syllable::Vertex { vertex: src, exp: r });
                    }
                    out.push(Syllable::Crossing { edge, forward });
                    let carried = BigInt::from(b) * q;
                    if !carried.is_zero() {
                        pending = Some((dst, carried));
                    }
                }
            }
        }
        if let Some((v, e)) = pending {
            if !e.is_zero() {
                out.push(Syllable::Vertex { vertex: v, exp: e });
            }
        }
        GroupWord {
            pres: Arc::clone(&w.pres),
            start: w.start,
            syllables: out,
        }
    }

    /// Substitutes each generator occurrence using `image` and reduces.
    /// Tree crossings are trivial in the group and map to the identity.
    pub(crate) fn substitute<F>(&self, image: F) -> Result<GroupWord, WordError>
    where
        F: Fn(&Syllable) -> Result<GroupWord, WordError>,
    {
        let mut acc = GroupWord::identity(&self.pres);
        for s in &self.syllables {
            match s {
                Syllable::Crossing { edge, .. } if self.pres.is_tree_edge(*edge) => continue,
                _ => {}
            }
            acc = acc.concat(&image(s)?)?;
        }
        Ok(acc)
    }

    /// Renders the word in generator syntax, omitting tree crossings
    /// (they are trivial in the group). The identity renders as "1".
    pub fn display(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        for s in &self.syllables {
            match s {
                Syllable::Vertex { vertex, exp } => {
                    if exp.is_zero() {
                        continue;
                    }
                    let name = self.pres.graph().vertex_id(*vertex);
                    if exp.is_one() {
                        parts.push(name.to_string());
                    } else {
                        parts.push(format!("{name}^{exp}"));
                    }
                }
                Syllable::Crossing { edge, forward } => {
                    if self.pres.is_tree_edge(*edge) {
                        continue;
                    }
                    let name = &self.pres.graph().edge(*edge).id;
                    if *forward {
                        parts.push(name.clone());
                    } else {
                        parts.push(format!("{name}^-1"));
                    }
                }
            }
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join(" ")
        }
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display())
    }
}

/// Pushes one syllable onto a reduced stack, restoring reducedness.
fn push_reduced(pres: &Presentation, out: &mut Vec<Syllable>, syl: Syllable) {
    match syl {
        Syllable::Vertex { vertex, exp } => {
            if exp.is_zero() {
                return;
            }
            if let Some(Syllable::Vertex { vertex: v2, exp: e2 }) = out.last_mut() {
                debug_assert_eq!(*v2, vertex, "path words visit one vertex between crossings");
                *e2 += exp;
                if e2.is_zero() {
                    out.pop();
                }
                return;
            }
            out.push(Syllable::Vertex { vertex, exp });
        }
        Syllable::Crossing { edge, forward } => {
            // Look for a pinch: reverse crossing of the same edge with a
            // divisible (possibly zero) exponent between.
            let (pinch, mid) = match out.last() {
                Some(Syllable::Crossing { edge: e2, forward: f2 })
                    if *e2 == edge && *f2 != forward =>
                {
                    (true, BigInt::zero())
                }
                Some(Syllable::Vertex { exp, .. }) if out.len() >= 2 => {
                    match &out[out.len() - 2] {
                        Syllable::Crossing { edge: e2, forward: f2 }
                            if *e2 == edge && *f2 != forward =>
                        {
                            // The inner crossing went src→dst; the exponent
                            // sits at dst and pinches iff divisible by the
                            // dst-side label.
                            let (_, _, _, b) = crossing_data(pres, edge, !forward);
                            if (exp % BigInt::from(b.abs())).is_zero() {
                                (true, exp.clone())
                            } else {
                                (false, BigInt::zero())
                            }
                        }
                        _ => (false, BigInt::zero()),
                    }
                }
                _ => (false, BigInt::zero()),
            };
            if pinch {
                // Remove [crossing, middle] and emit the translated exponent
                // on the source side of the inner crossing.
                let (src, a, _, b) = crossing_data(pres, edge, !forward);
                if !mid.is_zero() {
                    out.pop();
                }
                out.pop();
                let k = mid / BigInt::from(b);
                let translated = BigInt::from(a) * k;
                push_reduced(pres, out, Syllable::Vertex { vertex: src, exp: translated });
            } else {
                out.push(Syllable::Crossing { edge, forward });
            }
        }
    }
}

/// Equality in the group: u = v iff u·v^{-1} reduces to the empty word.
pub fn word_equal(u: &GroupWord, v: &GroupWord) -> Result<bool, WordError> {
    Ok(u.concat(&v.inverse())?.is_identity())
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

/// Parses word syntax over a presentation: whitespace-separated `gen`,
/// `gen^k`, `gen^-k`, parenthesised subwords, and `[a,b]` commutators.
pub fn parse_word(text: &str, pres: &Arc<Presentation>) -> Result<GroupWord, WordError> {
    let mut parser = WordParser {
        bytes: text.as_bytes(),
        pos: 0,
        pres: Arc::clone(pres),
    };
    let w = parser.parse_sequence(&[])?;
    parser.skip_ws();
    if parser.pos < parser.bytes.len() {
        return Err(WordError::Syntax {
            message: format!("unexpected '{}'", parser.current_char()),
            position: parser.pos,
        });
    }
    Ok(w)
}

struct WordParser<'a> {
    bytes: &'a [u8],
    pos: usize,
    pres: Arc<Presentation>,
}

impl WordParser<'_> {
    fn current_char(&self) -> char {
        self.bytes
            .get(self.pos)
            .map(|b| *b as char)
            .unwrap_or('\0')
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn parse_sequence(&mut self, stop: &[u8]) -> Result<GroupWord, WordError> {
        let mut acc = GroupWord::identity(&self.pres);
        loop {
            self.skip_ws();
            if self.pos >= self.bytes.len() || stop.contains(&self.bytes[self.pos]) {
                return Ok(acc);
            }
            let atom = self.parse_atom()?;
            acc = acc.concat(&atom)?;
        }
    }

    fn parse_atom(&mut self) -> Result<GroupWord, WordError> {
        self.skip_ws();
        let base = match self.bytes.get(self.pos) {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.parse_sequence(b")")?;
                self.expect(b')')?;
                inner
            }
            Some(b'[') => {
                self.pos += 1;
                let a = self.parse_sequence(b",")?;
                self.expect(b',')?;
                let b = self.parse_sequence(b"]")?;
                self.expect(b']')?;
                // Commutator [a,b] = a b a^{-1} b^{-1}.
                a.concat(&b)?.concat(&a.inverse())?.concat(&b.inverse())?
            }
            Some(c) if c.is_ascii_alphanumeric() || *c == b'_' => {
                let start = self.pos;
                while self.pos < self.bytes.len()
                    && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
                GroupWord::generator(&self.pres, name).ok_or_else(|| {
                    WordError::UnknownGenerator {
                        name: name.to_string(),
                        position: start,
                    }
                })?
            }
            _ => {
                return Err(WordError::Syntax {
                    message: format!("expected a generator, '(' or '[', found '{}'", self.current_char()),
                    position: self.pos,
                })
            }
        };
        if self.bytes.get(self.pos) == Some(&b'^') {
            self.pos += 1;
            let exp = self.parse_int()?;
            return base.pow(exp);
        }
        Ok(base)
    }

    fn parse_int(&mut self) -> Result<i64, WordError> {
        let start = self.pos;
        if self.bytes.get(self.pos) == Some(&b'-') {
            self.pos += 1;
        }
        let digits_start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == digits_start {
            return Err(WordError::Syntax {
                message: "expected an integer exponent".into(),
                position: self.pos,
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| WordError::Syntax {
                message: "exponent out of range".into(),
                position: start,
            })
    }

    fn expect(&mut self, b: u8) -> Result<(), WordError> {
        self.skip_ws();
        if self.bytes.get(self.pos) == Some(&b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(WordError::Syntax {
                message: format!("expected '{}'", b as char),
                position: self.pos,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Bass-Serre tree balls
// ---------------------------------------------------------------------------

/// Canonical name of a coset of a vertex group: the residue/crossing path
/// from the base coset, in left-to-right normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CosetPath {
    /// Alternating (residue before crossing, crossing) steps.
    pub steps: Vec<(BigInt, EdgeIx, bool)>,
    /// Vertex (orbit) of the coset.
    pub vertex: VertexIx,
}

/// One vertex of a materialised ball of the Bass-Serre tree.
#[derive(Debug, Clone)]
pub struct BallVertex {
    pub coset: CosetPath,
    /// A representative element as a root-based path word ending at the
    /// coset's vertex (trailing stabiliser power omitted).
    pub representative: GroupWord,
    pub depth: usize,
}

/// A radius-r ball around a base vertex coset, materialised as a tree.
#[derive(Debug, Clone)]
pub struct TreeBall {
    pub radius: usize,
    pub base: VertexIx,
    pub vertices: Vec<BallVertex>,
    /// (parent index, child index, edge crossed).
    pub edges: Vec<(usize, usize, EdgeIx)>,
}

impl TreeBall {
    pub fn degree(&self, index: usize) -> usize {
        self.edges
            .iter()
            .filter(|(a, b, _)| *a == index || *b == index)
            .count()
    }

    /// Stable text label for a ball vertex, used by the DOT emitter.
    pub fn vertex_label(&self, index: usize) -> String {
        let v = &self.vertices[index];
        if v.coset.steps.is_empty() {
            return "1".to_string();
        }
        let g = self.vertices[index].representative.presentation().graph();
        let mut parts = Vec::new();
        for (residue, edge, forward) in &v.coset.steps {
            let (src, _, _, _) = crossing_data(self.vertices[index].representative.presentation(), *edge, *forward);
            if !residue.is_zero() {
                let name = g.vertex_id(src);
                if residue.is_one() {
                    parts.push(name.to_string());
                } else {
                    parts.push(format!("{name}^{residue}"));
                }
            }
            let ename = &g.edge(*edge).id;
            parts.push(if *forward { ename.clone() } else { format!("{ename}^-1") });
        }
        parts.join(" ")
    }
}

/// Breadth-first coset enumeration out to `radius`, capped at
/// [`DEFAULT_RADIUS_CAP`] unless a larger cap is supplied.
pub fn tree_ball(
    pres: &Arc<Presentation>,
    base: VertexIx,
    radius: usize,
) -> Result<TreeBall, WordError> {
    tree_ball_capped(pres, base, radius, DEFAULT_RADIUS_CAP)
}

pub fn tree_ball_capped(
    pres: &Arc<Presentation>,
    base: VertexIx,
    radius: usize,
    cap: usize,
) -> Result<TreeBall, WordError> {
    if radius > cap {
        return Err(WordError::RadiusTooLarge { requested: radius, cap });
    }
    let graph = pres.graph();
    let base_word = {
        // Representative of the base coset: the tree path root→base.
        let mut syllables = Vec::new();
        for (e, fwd) in pres.tree_path(pres.root(), base) {
            syllables.push(Syllable::Crossing { edge: e, forward: fwd });
        }
        GroupWord { pres: Arc::clone(pres), start: pres.root(), syllables }
    };
    let mut vertices = vec![BallVertex {
        coset: CosetPath { steps: Vec::new(), vertex: base },
        representative: base_word,
        depth: 0,
    }];
    let mut edges = Vec::new();
    let mut frontier: Vec<usize> = vec![0];
    for depth in 1..=radius {
        let mut next = Vec::new();
        for &idx in &frontier {
            let at = vertices[idx].coset.vertex;
            let arrived_by = vertices[idx].coset.steps.last().map(|(_, e, f)| (*e, *f));
            for (ei, _edge) in graph.edges().iter().enumerate() {
                let e = EdgeIx(ei);
                for forward in [true, false] {
                    let (src, a, _, _) = crossing_data(pres, e, forward);
                    if src != at {
                        continue;
                    }
                    for i in 0..a.unsigned_abs() {
                        let residue = BigInt::from(i);
                        // Skip the backtracking step that returns to the parent.
                        if residue.is_zero() {
                            if let Some((pe, pf)) = arrived_by {
                                if pe == e && pf == !forward {
                                    continue;
                                }
                            }
                        }
                        let mut steps = vertices[idx].coset.steps.clone();
                        steps.push((residue.clone(), e, forward));
                        let (_, _, dst, _) = crossing_data(pres, e, forward);
                        let mut rep_syl = vertices[idx].representative.syllables.clone();
                        if !residue.is_zero() {
                            rep_syl.push(Syllable::Vertex { vertex: at, exp: residue });
                        }
                        rep_syl.push(Syllable::Crossing { edge: e, forward });
                        let child = BallVertex {
                            coset: CosetPath { steps, vertex: dst },
                            representative: GroupWord {
                                pres: Arc::clone(pres),
                                start: pres.root(),
                                syllables: rep_syl,
                            },
                            depth,
                        };
                        vertices.push(child);
                        let child_idx = vertices.len() - 1;
                        edges.push((idx, child_idx, e));
                        next.push(child_idx);
                    }
                }
            }
        }
        frontier = next;
    }
    Ok(TreeBall { radius, base, vertices, edges })
}

/// Canonical form of the coset g·G_v: the normal form of g viewed as a path
/// from the root to v, with the trailing stabiliser power dropped.
pub fn coset_canonical(g: &GroupWord, v: VertexIx) -> CosetPath {
    let pres = &g.pres;
    let mut syllables = g.syllables.clone();
    for (e, fwd) in pres.tree_path(pres.root(), v) {
        syllables.push(Syllable::Crossing { edge: e, forward: fwd });
    }
    let path = GroupWord { pres: Arc::clone(pres), start: g.start, syllables };
    let canon = path.canonicalize();
    let mut steps = Vec::new();
    let mut pending = BigInt::zero();
    for s in &canon.syllables {
        match s {
            Syllable::Vertex { exp, .. } => pending = exp.clone(),
            Syllable::Crossing { edge, forward } => {
                steps.push((std::mem::take(&mut pending), *edge, *forward));
            }
        }
    }
    // Whatever exponent remains after the last crossing is stabiliser data.
    CosetPath { steps, vertex: v }
}

/// True iff g₁·G_v = g₂·G_v.
pub fn coset_equal(g1: &GroupWord, g2: &GroupWord, v: VertexIx) -> Result<bool, WordError> {
    if !Arc::ptr_eq(&g1.pres, &g2.pres) && g1.pres != g2.pres {
        return Err(WordError::PresentationMismatch);
    }
    Ok(coset_canonical(g1, v) == coset_canonical(g2, v))
}

/// Closes an open coset-representative path into a root-based loop by
/// appending the (trivial) tree path back to the root.
pub fn close_path(w: &GroupWord) -> GroupWord {
    let pres = &w.pres;
    let mut end = w.start;
    for s in &w.syllables {
        if let Syllable::Crossing { edge, forward } = s {
            let (_, _, dst, _) = crossing_data(pres, *edge, *forward);
            end = dst;
        }
    }
    let mut syllables = w.syllables.clone();
    for (e, fwd) in pres.tree_path(end, pres.root()) {
        syllables.push(Syllable::Crossing { edge: e, forward: fwd });
    }
    let mut out = GroupWord { pres: Arc::clone(pres), start: w.start, syllables };
    out.reduce_in_place();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{LabelledGraph, RawEdge};

    fn bs(p: i64, q: i64) -> Arc<Presentation> {
        Arc::new(LabelledGraph::bs(p, q).unwrap().presentation("x").unwrap())
    }

    fn segment(p: i64, q: i64) -> Arc<Presentation> {
        let g = LabelledGraph::validate(
            vec!["u".into(), "v".into()],
            vec![RawEdge {
                id: "e".into(),
                from: "u".into(),
                label_from: p,
                to: "v".into(),
                label_to: q,
            }],
        )
        .unwrap();
        Arc::new(g.presentation("u").unwrap())
    }

    fn w(p: &Arc<Presentation>, text: &str) -> GroupWord {
        parse_word(text, p).unwrap()
    }

    #[test]
    fn defining_relation_reduces() {
        let p = bs(2, 3);
        let lhs = w(&p, "t x^3 t^-1");
        let rhs = w(&p, "x^2");
        assert!(word_equal(&lhs, &rhs).unwrap());
        assert_eq!(lhs.display(), "x^2");
    }

    #[test]
    fn identity_parsing() {
        let p = bs(2, 3);
        assert!(w(&p, "x^0").is_identity());
        assert!(w(&p, "").is_identity());
        assert_eq!(w(&p, "x^0").display(), "1");
    }

    #[test]
    fn unknown_generator_errors() {
        let p = bs(2, 3);
        match parse_word("s y", &p) {
            Err(WordError::UnknownGenerator { name, .. }) => assert_eq!(name, "s"),
            other => panic!("expected UnknownGenerator, got {other:?}"),
        }
    }

    #[test]
    fn reduction_examples() {
        let p = bs(2, 3);
        // t x^6 t^-1 = (t x^3 t^-1)^2 = x^4.
        assert_eq!(w(&p, "t x^6 t^-1").display(), "x^4");
        // 3 ∤ 1: no pinch.
        assert_eq!(w(&p, "t x t^-1").crossing_count(), 2);
        // Inverse form of the relation.
        assert_eq!(w(&p, "t^-1 x^2 t").display(), "x^3");
    }

    #[test]
    fn reduce_is_idempotent() {
        let p = bs(2, 3);
        let word = w(&p, "t x t^-1 x^5 t^2 x^-4");
        assert_eq!(word.reduce(), word.reduce().reduce());
    }

    #[test]
    fn inverse_cancels() {
        let p = bs(2, 3);
        let word = w(&p, "t x t^-1 x^5 t^2");
        assert!(word.concat(&word.inverse()).unwrap().is_identity());
    }

    #[test]
    fn word_equality_examples() {
        let p = bs(2, 3);
        assert!(word_equal(&w(&p, "x^2"), &w(&p, "t x^3 t^-1")).unwrap());
        assert!(!word_equal(&w(&p, "t"), &w(&p, "x t")).unwrap());
        let v = w(&p, "t x t^-1");
        assert!(word_equal(&v, &v).unwrap());
    }

    #[test]
    fn presentation_mismatch_detected() {
        let p1 = bs(2, 3);
        let p2 = bs(2, 4);
        let u = w(&p1, "x");
        let v = w(&p2, "x");
        assert!(matches!(
            word_equal(&u, &v),
            Err(WordError::PresentationMismatch)
        ));
    }

    #[test]
    fn tree_relation_via_segment() {
        // ⟨u, v | u^2 = v^3⟩: the trefoil group.
        let p = segment(2, 3);
        assert!(word_equal(&w(&p, "u^2"), &w(&p, "v^3")).unwrap());
        assert!(!word_equal(&w(&p, "u"), &w(&p, "v")).unwrap());
        // u^2 is central.
        let z = w(&p, "u^2");
        let conj = w(&p, "v").concat(&z).unwrap().concat(&w(&p, "v^-1")).unwrap();
        assert!(word_equal(&z, &conj).unwrap());
    }

    #[test]
    fn delta_examples() {
        let p = bs(2, 3);
        assert_eq!(w(&p, "t").delta().to_rational(), Rational::new(3.into(), 2.into()));
        assert!(w(&p, "x^17").delta().is_one());
        // Commutators have trivial Δ.
        let two_loops = {
            let g = LabelledGraph::validate(
                vec!["x".into()],
                vec![
                    RawEdge { id: "s".into(), from: "x".into(), label_from: 2, to: "x".into(), label_to: 4 },
                    RawEdge { id: "t".into(), from: "x".into(), label_from: 2, to: "x".into(), label_to: 6 },
                ],
            )
            .unwrap();
            Arc::new(g.presentation("x").unwrap())
        };
        assert!(w(&two_loops, "[t,s]").delta().is_one());
    }

    #[test]
    fn delta_is_multiplicative() {
        let p = bs(2, 3);
        let u = w(&p, "t x^2 t");
        let v = w(&p, "t^-1 x");
        let uv = u.concat(&v).unwrap();
        assert_eq!(uv.delta(), u.delta().mul(&v.delta()));
    }

    #[test]
    fn ellipticity() {
        let p = bs(2, 3);
        assert!(w(&p, "x^5").is_elliptic());
        assert!(!w(&p, "t").is_elliptic());
        assert!(w(&p, "t x^3 t^-1").is_elliptic());
        // Conjugates of elliptic elements are elliptic.
        assert!(w(&p, "t x^2 t^-1").is_elliptic());
        assert!(w(&p, "t^3 x^8 t^-3").is_elliptic());
        // Conjugates of hyperbolic elements are hyperbolic.
        assert!(!w(&p, "x t x^-1").is_elliptic());
    }

    #[test]
    fn elliptic_across_tree_edges() {
        let p = segment(2, 3);
        assert!(w(&p, "v^5").is_elliptic());
        assert!(!w(&p, "u v").is_elliptic());
    }

    #[test]
    fn canonical_form_agrees_with_equality() {
        let p = bs(2, 3);
        let pairs = [
            ("t x^3 t^-1", "x^2"),
            ("t x^7 t^-1 t x^2", "t x^9"),
            ("x^2 t x^3", "t x^6"),
        ];
        for (a, b) in pairs {
            let (wa, wb) = (w(&p, a), w(&p, b));
            assert_eq!(
                word_equal(&wa, &wb).unwrap(),
                wa.canonicalize() == wb.canonicalize(),
                "canonical forms disagree with word_equal on {a} vs {b}"
            );
        }
    }

    #[test]
    fn ball_bs23_radius_one() {
        let p = bs(2, 3);
        let ball = tree_ball(&p, p.root(), 1).unwrap();
        assert_eq!(ball.vertices.len(), 6);
        assert_eq!(ball.degree(0), 5);
        assert_eq!(ball.edges.len(), ball.vertices.len() - 1);
    }

    #[test]
    fn ball_radius_zero() {
        let p = bs(2, 3);
        let ball = tree_ball(&p, p.root(), 0).unwrap();
        assert_eq!(ball.vertices.len(), 1);
        assert!(ball.edges.is_empty());
    }

    #[test]
    fn ball_segment_degree() {
        let p = segment(2, 3);
        let u = p.graph().vertex("u").unwrap();
        let ball = tree_ball(&p, u, 1).unwrap();
        // Cosets x_u^i·(edge crossing), i = 0,1.
        assert_eq!(ball.degree(0), 2);
    }

    #[test]
    fn ball_radius_cap() {
        let p = bs(2, 3);
        assert!(matches!(
            tree_ball(&p, p.root(), 7),
            Err(WordError::RadiusTooLarge { requested: 7, cap: 6 })
        ));
        assert!(tree_ball_capped(&p, p.root(), 7, 8).is_ok());
    }

    #[test]
    fn ball_matches_coset_oracle() {
        // Neighbours of the base coset in BS(2,3), built as raw words and
        // deduplicated with the coset test, must match the ball's count.
        let p = bs(2, 3);
        let root = p.root();
        let mut reps: Vec<GroupWord> = Vec::new();
        for i in 0..2 {
            reps.push(w(&p, &format!("x^{i} t")));
        }
        for j in 0..3 {
            reps.push(w(&p, &format!("x^{j} t^-1")));
        }
        for a in 0..reps.len() {
            for b in (a + 1)..reps.len() {
                assert!(
                    !coset_equal(&reps[a], &reps[b], root).unwrap(),
                    "oracle cosets {a} and {b} collide"
                );
            }
        }
        let ball = tree_ball(&p, root, 1).unwrap();
        assert_eq!(ball.vertices.len() - 1, reps.len());
        // And each ball representative matches exactly one oracle coset.
        for bv in &ball.vertices[1..] {
            let closed = close_path(&bv.representative);
            let hits = reps
                .iter()
                .filter(|r| coset_equal(&closed, r, root).unwrap())
                .count();
            assert_eq!(hits, 1);
        }
    }

    #[test]
    fn reduction_is_confluent_across_association_orders() {
        use rand::{Rng, SeedableRng};
        let two_loops = {
            let g = LabelledGraph::validate(
                vec!["x".into()],
                vec![
                    RawEdge { id: "s".into(), from: "x".into(), label_from: 2, to: "x".into(), label_to: 4 },
                    RawEdge { id: "t".into(), from: "x".into(), label_from: 2, to: "x".into(), label_to: 6 },
                ],
            )
            .unwrap();
            Arc::new(g.presentation("x").unwrap())
        };
        for pres in [bs(2, 3), two_loops] {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xc0f);
            let names: Vec<String> =
                pres.generator_names().iter().map(|s| s.to_string()).collect();
            let rand_word = |rng: &mut rand_chacha::ChaCha8Rng| {
                let mut w = GroupWord::identity(&pres);
                for _ in 0..rng.gen_range(0..6) {
                    let name = &names[rng.gen_range(0..names.len())];
                    let e = rng.gen_range(1..=5i64) * if rng.gen_bool(0.5) { 1 } else { -1 };
                    w = w
                        .concat(&GroupWord::generator(&pres, name).unwrap().pow(e).unwrap())
                        .unwrap();
                }
                w
            };
            for _ in 0..500 {
                let (u, v, w) = (rand_word(&mut rng), rand_word(&mut rng), rand_word(&mut rng));
                let left = u.concat(&v).unwrap().concat(&w).unwrap();
                let right = u.concat(&v.concat(&w).unwrap()).unwrap();
                assert!(word_equal(&left, &right).unwrap());
                assert_eq!(left.canonicalize(), right.canonicalize());
            }
        }
    }

    #[test]
    fn length_cap_is_an_error() {
        let p = bs(2, 3);
        let t = w(&p, "t");
        match t.pow_big(&BigInt::from(MAX_SYLLABLES + 1)) {
            Err(WordError::WordTooLong { cap }) => assert_eq!(cap, MAX_SYLLABLES),
            other => panic!("expected WordTooLong, got {other:?}"),
        }
    }

    #[test]
    fn elliptic_is_conjugation_invariant() {
        use rand::{Rng, SeedableRng};
        let p = bs(2, 3);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let names = ["x", "t"];
        let random_word = |rng: &mut rand_chacha::ChaCha8Rng| {
            let mut w = GroupWord::identity(&p);
            for _ in 0..rng.gen_range(0..6) {
                let name = names[rng.gen_range(0..names.len())];
                let e = rng.gen_range(1..=4i64) * if rng.gen_bool(0.5) { 1 } else { -1 };
                w = w
                    .concat(&GroupWord::generator(&p, name).unwrap().pow(e).unwrap())
                    .unwrap();
            }
            w
        };
        for _ in 0..200 {
            let w = random_word(&mut rng);
            let g = random_word(&mut rng);
            let conj = g.concat(&w).unwrap().concat(&g.inverse()).unwrap();
            assert_eq!(w.is_elliptic(), conj.is_elliptic(), "w = {w}, g = {g}");
        }
    }

    #[test]
    fn commutator_parsing() {
        let p = bs(2, 3);
        let c = w(&p, "[t,x]");
        let manual = w(&p, "t x t^-1 x^-1");
        assert!(word_equal(&c, &manual).unwrap());
        assert!(w(&p, "[x,x]").is_identity());
        let grouped = w(&p, "(t x)^2");
        assert!(word_equal(&grouped, &w(&p, "t x t x")).unwrap());
    }
}
