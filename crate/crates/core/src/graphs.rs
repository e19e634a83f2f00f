//! Kontsevich graphs: ground vertices `0..m` (the slots of a polyvector),
//! internal vertices `m..m+k`, each sending an ordered pair of edges.
//!
//! An internal vertex whose outgoing edges carry labels `(a, b)` stands for
//! `P^{ab}`, differentiated by the labels of its incoming edges. Edges from a
//! vertex to itself (tadpoles) differentiate that vertex's own coefficient.
//! Each ground vertex receives exactly one edge; the labels arriving at the
//! ground vertices form the component index, and the labeled sum is
//! skew-symmetrized over the ground slots with weight `1/m!`.
//!
//! Text format, one graph per line, optionally preceded by a rational weight:
//!
//! ```text
//! [weight] m k ; (t t')(t t')...
//! ```

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use num::{One, Signed, Zero};
use thiserror::Error;

use crate::jetcore::parse::Cursor;
use crate::jetcore::{DiffPoly, ParseError, Rational};
use crate::schouten::{schouten_bracket, sort_sign, PolyVector, SchoutenError};
use crate::tetraflow::JetTable;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph has no internal vertices")]
    NoInternalVertices,
    #[error("edge of vertex {vertex} targets {target}, but the graph has {count} vertices")]
    TargetOutOfRange { vertex: usize, target: usize, count: usize },
    #[error("ground vertex {slot} receives {found} edges, expected exactly 1")]
    GroundInDegree { slot: usize, found: usize },
    #[error("ground slot {slot} out of range for {ground} ground vertices")]
    SlotOutOfRange { slot: usize, ground: usize },
    #[error("graph sum mixes {left} and {right} ground vertices")]
    MixedArity { left: usize, right: usize },
    #[error("expected {expected} edge labels, got {found}")]
    LabelCount { expected: usize, found: usize },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Schouten(#[from] SchoutenError),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KGraph {
    ground: usize,
    targets: Vec<[usize; 2]>,
}

impl KGraph {
    pub fn new(ground: usize, targets: Vec<[usize; 2]>) -> Result<Self, GraphError> {
        if targets.is_empty() {
            return Err(GraphError::NoInternalVertices);
        }
        let count = ground + targets.len();
        for (v, pair) in targets.iter().enumerate() {
            for &t in pair {
                if t >= count {
                    return Err(GraphError::TargetOutOfRange {
                        vertex: ground + v,
                        target: t,
                        count,
                    });
                }
            }
        }
        Ok(KGraph { ground, targets })
    }

    pub fn ground_count(&self) -> usize {
        self.ground
    }

    pub fn internal_count(&self) -> usize {
        self.targets.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.ground + self.targets.len()
    }

    /// Targets of internal vertex `m + v`, in edge order.
    pub fn targets(&self) -> &[[usize; 2]] {
        &self.targets
    }

    pub fn has_double_edge(&self) -> bool {
        self.targets.iter().any(|[a, b]| a == b)
    }

    pub fn has_tadpole(&self) -> bool {
        self.targets
            .iter()
            .enumerate()
            .any(|(v, pair)| pair.contains(&(self.ground + v)))
    }

    /// Edges arriving at `vertex`, as `(internal source index, edge slot)`.
    fn incoming(&self, vertex: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (v, pair) in self.targets.iter().enumerate() {
            for (s, &t) in pair.iter().enumerate() {
                if t == vertex {
                    out.push((v, s));
                }
            }
        }
        out
    }

    fn check_ground(&self) -> Result<(), GraphError> {
        for slot in 0..self.ground {
            let found = self.incoming(slot).len();
            if found != 1 {
                return Err(GraphError::GroundInDegree { slot, found });
            }
        }
        Ok(())
    }

    /// Representative of the isomorphism class under relabeling of internal
    /// vertices (ground order and edge order fixed): the lexicographically
    /// least target list.
    pub fn canonical(&self) -> KGraph {
        let m = self.ground;
        let k = self.targets.len();
        let mut best: Option<Vec<[usize; 2]>> = None;
        for perm in (0..k).permutations(k) {
            let map = |t: usize| if t < m { t } else { m + perm[t - m] };
            let mut relabeled = vec![[0, 0]; k];
            for (v, [a, b]) in self.targets.iter().enumerate() {
                relabeled[perm[v]] = [map(*a), map(*b)];
            }
            if best.as_ref().is_none_or(|b| relabeled < *b) {
                best = Some(relabeled);
            }
        }
        KGraph {
            ground: m,
            targets: best.expect("at least one permutation"),
        }
    }

    pub fn parse(text: &str) -> Result<KGraph, GraphError> {
        let sum = GraphSum::parse(text)?;
        match sum.terms.as_slice() {
            [(w, g)] if w.is_one() => Ok(g.clone()),
            _ => Err(ParseError::new(1, 1, "expected exactly one unweighted graph").into()),
        }
    }
}

impl fmt::Display for KGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} ;", self.ground, self.targets.len())?;
        for [a, b] in &self.targets {
            write!(f, " ({a} {b})")?;
        }
        Ok(())
    }
}

/// Rational linear combination of graphs with a common number of ground
/// vertices. The ground count is remembered even when every term cancels.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GraphSum {
    terms: Vec<(Rational, KGraph)>,
    arity: Option<usize>,
}

impl GraphSum {
    pub fn new() -> Self {
        GraphSum::default()
    }

    /// The empty sum of `ground`-vectors.
    pub fn zero(ground: usize) -> Self {
        GraphSum {
            terms: Vec::new(),
            arity: Some(ground),
        }
    }

    pub fn single(g: KGraph) -> Self {
        let mut out = GraphSum::new();
        out.push(Rational::one(), g);
        out
    }

    pub fn push(&mut self, weight: Rational, g: KGraph) {
        self.arity.get_or_insert(g.ground);
        self.terms.push((weight, g));
    }

    pub fn terms(&self) -> &[(Rational, KGraph)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: &Rational) -> GraphSum {
        GraphSum {
            terms: self.terms.iter().map(|(w, g)| (w * c, g.clone())).collect(),
            arity: self.arity,
        }
    }

    pub fn concat(&self, other: &GraphSum) -> GraphSum {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        GraphSum {
            terms,
            arity: self.arity.or(other.arity),
        }
    }

    fn ground_count(&self) -> Result<Option<usize>, GraphError> {
        let mut arity = self.arity;
        for (_, g) in &self.terms {
            match arity {
                None => arity = Some(g.ground),
                Some(a) if a != g.ground => {
                    return Err(GraphError::MixedArity {
                        left: a,
                        right: g.ground,
                    })
                }
                _ => {}
            }
        }
        Ok(arity)
    }

    pub fn parse(text: &str) -> Result<GraphSum, GraphError> {
        let mut out = GraphSum::new();
        for (ln, line) in text.lines().enumerate() {
            let body = line.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            let (w, g) = parse_line(line).map_err(|e| e.offset(ln, 0))?;
            out.push(w, g);
        }
        Ok(out)
    }
}

impl fmt::Display for GraphSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (w, g)) in self.terms.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            if w.is_one() {
                write!(f, "{g}")?;
            } else {
                write!(f, "{w} {g}")?;
            }
        }
        Ok(())
    }
}

fn signed_rational(cur: &mut Cursor<'_>) -> Result<Rational, ParseError> {
    let negative = cur.eat('-');
    let r = cur.rational()?;
    Ok(if negative { -r } else { r })
}

fn parse_line(line: &str) -> Result<(Rational, KGraph), ParseError> {
    let mut cur = Cursor::new(line);
    let mut head = Vec::new();
    while !matches!(cur.peek(), Some(';') | None) {
        let at = cur.here();
        head.push((at, signed_rational(&mut cur)?));
    }
    let semicolon = cur.here();
    cur.expect(';')?;
    let (weight, m, k) = match head.as_slice() {
        [m, k] => (Rational::one(), m, k),
        [w, m, k] => (w.1.clone(), m, k),
        _ => {
            return Err(ParseError::new(
                semicolon.0,
                semicolon.1,
                "expected '[weight] ground internal ;'",
            ))
        }
    };
    let count = |(at, r): &((usize, usize), Rational)| {
        if r.is_integer() && !r.is_negative() {
            usize::try_from(r.to_integer()).map_err(|_| ParseError::new(at.0, at.1, "count out of range"))
        } else {
            Err(ParseError::new(
                at.0,
                at.1,
                "vertex count must be a nonnegative integer",
            ))
        }
    };
    let (m, k) = (count(m)?, count(k)?);
    let mut targets = Vec::with_capacity(k);
    while !cur.at_end() {
        let at = cur.here();
        cur.expect('(')?;
        let a = cur.unsigned()? as usize;
        let b = cur.unsigned()? as usize;
        cur.expect(')')?;
        if a >= m + k || b >= m + k {
            return Err(ParseError::new(
                at.0,
                at.1,
                format!("target out of range for {} vertices", m + k),
            ));
        }
        targets.push([a, b]);
    }
    if targets.len() != k || k == 0 {
        let at = cur.here();
        return Err(ParseError::new(
            at.0,
            at.1,
            format!("expected {k} edge pairs, found {}", targets.len()),
        ));
    }
    Ok((weight, KGraph { ground: m, targets }))
}

/// Drops double-edge graphs, merges isomorphic graphs and zero weights;
/// terms come out sorted by canonical form.
pub fn normalize(sum: &GraphSum) -> GraphSum {
    let mut merged: BTreeMap<KGraph, Rational> = BTreeMap::new();
    for (w, g) in &sum.terms {
        if g.has_double_edge() || w.is_zero() {
            continue;
        }
        *merged.entry(g.canonical()).or_insert_with(Rational::zero) += w;
    }
    GraphSum {
        terms: merged
            .into_iter()
            .filter(|(_, w)| !w.is_zero())
            .map(|(g, w)| (w, g))
            .collect(),
        arity: sum.arity,
    }
}

/// The value of one labeling: the product over internal vertices, with the
/// edge labels given in edge order (two per internal vertex).
pub fn evaluate_with_labels(g: &KGraph, labels: &[u8], p: &PolyVector) -> Result<DiffPoly, GraphError> {
    if labels.len() != 2 * g.internal_count() {
        return Err(GraphError::LabelCount {
            expected: 2 * g.internal_count(),
            found: labels.len(),
        });
    }
    let mut jets = JetTable::new(p)?;
    Ok(labeled_product(g, labels, &mut jets))
}

fn labeled_product(g: &KGraph, labels: &[u8], jets: &mut JetTable<'_>) -> DiffPoly {
    let mut out = DiffPoly::one(jets.dim());
    for v in 0..g.internal_count() {
        let sigma: Vec<u8> = g
            .incoming(g.ground + v)
            .iter()
            .map(|&(src, s)| labels[2 * src + s])
            .collect();
        let factor = jets.get(labels[2 * v], labels[2 * v + 1], &sigma);
        if factor.is_zero() {
            return factor;
        }
        out = &out * &factor;
    }
    out
}

/// Evaluates a graph against a concrete or symbolic bivector `p`.
pub fn evaluate_graph_on(g: &KGraph, p: &PolyVector) -> Result<PolyVector, GraphError> {
    let mut jets = JetTable::new(p)?;
    let n = p.dim();
    let m = g.ground;
    let mut out = PolyVector::zero(m, n);
    if g.has_double_edge() {
        return Ok(out);
    }
    g.check_ground()?;
    let ground_edges: Vec<(usize, usize)> = (0..m).map(|slot| g.incoming(slot)[0]).collect();
    let pairs: Vec<(u8, u8)> = (1..=n as u8)
        .cartesian_product(1..=n as u8)
        .filter(|(a, b)| a != b)
        .collect();
    let norm = Rational::from_integer((1..=m as i64).product::<i64>().into());

    let mut components: BTreeMap<Vec<u8>, DiffPoly> = BTreeMap::new();
    let mut labels = vec![0u8; 2 * g.internal_count()];
    for choice in (0..g.internal_count()).map(|_| pairs.iter()).multi_cartesian_product() {
        for (v, (a, b)) in choice.iter().enumerate() {
            labels[2 * v] = *a;
            labels[2 * v + 1] = *b;
        }
        let ground_labels: Vec<u8> = ground_edges.iter().map(|&(src, s)| labels[2 * src + s]).collect();
        let Some((sign, idx)) = sort_sign(&ground_labels) else {
            continue;
        };
        let value = labeled_product(g, &labels, &mut jets);
        if value.is_zero() {
            continue;
        }
        let c = Rational::from_integer(sign.into()) / &norm;
        components
            .entry(idx)
            .or_insert_with(|| DiffPoly::zero(n))
            .add_scaled(&value, &c);
    }
    for (idx, v) in components {
        let idx: Vec<usize> = idx.into_iter().map(usize::from).collect();
        out.set(&idx, v)?;
    }
    Ok(out)
}

pub fn evaluate_on(sum: &GraphSum, p: &PolyVector) -> Result<PolyVector, GraphError> {
    let m = sum.ground_count()?.unwrap_or(0);
    let mut out = PolyVector::zero(m, p.dim());
    for (w, g) in &sum.terms {
        out.add_scaled(&evaluate_graph_on(g, p)?, w);
    }
    Ok(out)
}

/// Evaluation against the symbolic bivector in dimension `n`.
pub fn evaluate(sum: &GraphSum, n: usize) -> Result<PolyVector, GraphError> {
    evaluate_on(sum, &PolyVector::symbolic_bivector(n))
}

/// Removes ground vertex `slot` and lets its edge fall on each internal
/// vertex in turn (Leibniz rule), producing one graph per internal vertex.
pub fn leibniz_redirect(g: &KGraph, slot: usize) -> Result<GraphSum, GraphError> {
    if slot >= g.ground {
        return Err(GraphError::SlotOutOfRange { slot, ground: g.ground });
    }
    let incoming = g.incoming(slot);
    let [(src, s)] = incoming.as_slice() else {
        return Err(GraphError::GroundInDegree {
            slot,
            found: incoming.len(),
        });
    };
    let m = g.ground - 1;
    let renumber = |t: usize| if t > slot { t - 1 } else { t };
    let base: Vec<[usize; 2]> = g.targets.iter().map(|[a, b]| [renumber(*a), renumber(*b)]).collect();
    let mut out = GraphSum::new();
    for v in 0..g.internal_count() {
        let mut targets = base.clone();
        targets[*src][*s] = m + v;
        out.push(Rational::one(), KGraph { ground: m, targets });
    }
    Ok(out)
}

/// `[[X, P]]` for the vector field encoded by `x`.
pub fn schouten_of_graphs(x: &GraphSum, p: &PolyVector) -> Result<PolyVector, GraphError> {
    let field = evaluate_on(x, p)?;
    Ok(schouten_bracket(&field, p)?)
}

/// Single vertex sending its edges to both ground vertices; evaluates to `P`.
pub fn wedge_graph() -> KGraph {
    KGraph {
        ground: 2,
        targets: vec![[0, 1]],
    }
}

/// Three-vertex bivector graph whose 2D evaluation is the potential
/// `u_xx u_y² − 2 u_xy u_x u_y + u_yy u_x²` of the divergence-free
/// trivializing field. Vertex 2 feeds the ground; vertices 3 and 4 each
/// send one edge to vertex 2 and one to each other.
pub fn potential_graph() -> KGraph {
    KGraph {
        ground: 2,
        targets: vec![[0, 1], [2, 4], [2, 3]],
    }
}

/// Leibniz redirection of the potential graph: the vector field
/// `(H_y, −H_x)` in 2D.
pub fn potential_field_graphs() -> GraphSum {
    leibniz_redirect(&potential_graph(), 1).expect("slot 1 has one edge")
}

/// Tadpole graph from redirecting the wedge graph; `(Σ_j ∂_j P^{ij})_i`.
pub fn tadpole_graphs() -> GraphSum {
    leibniz_redirect(&wedge_graph(), 1).expect("slot 1 has one edge")
}
