//! Involutive link diagrams: τ-symmetric planar diagrams with classified
//! crossings, derived orientations, and an optional axis basepoint.
//!
//! A diagram is a combinatorial object: a set of oriented edges (arcs
//! between crossings), a list of crossings, an involution `tau_edges` on
//! edges and `tau_crossings` on crossings describing the half-turn
//! symmetry about an axis in the projection plane, and an optional
//! basepoint on a τ-fixed edge. Crossings fixed by the symmetry are
//! *on-axis*; the rest come in partner pairs (*off-axis*). The symmetry
//! swaps the over- and under-strands at a crossing and preserves signs.
//!
//! Diagrams are read from a small line-oriented text format ("IKD"):
//!
//! ```text
//! ikd 1
//! edges 6
//! orient 0->3
//! crossing 0 + 4,0,1,5 off:2
//! crossing 1 + 0,2,3,1 on
//! crossing 2 + 2,4,5,3 off:0
//! tau_edge 0 2
//! tau_edge 1 3
//! basepoint 4
//! ```
//!
//! A crossing's four incident edges are listed in planar cyclic order with
//! the over-strand pair in positions 1 and 3 (slots 0 and 2). Orientations
//! are derived by propagating along strands; `orient a->b` lines pin the
//! direction of a component (a flows directly into b), and a component
//! without such a line gets the default direction in which its lowest
//! edge flows into its lowest (crossing id, slot) occurrence. Edges not
//! mentioned in any `tau_edge` line are fixed by the symmetry. Smoothing
//! bit order is crossing declaration order, and comments start with `#`.

use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// An edge label (an arc between crossings, or a crossing-free loop).
pub type EdgeId = u32;

/// Slot paired with `slot` on the same strand through a crossing.
#[inline]
pub fn strand_partner(slot: usize) -> usize {
    (slot + 2) % 4
}

/// Classification of a crossing under the diagram symmetry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisClass {
    /// Fixed by the symmetry; the crossing point lies on the axis.
    OnAxis,
    /// Swapped with a distinct partner crossing (given by index).
    OffAxis { partner: usize },
}

/// How the symmetry acts on the two strand orientations through an
/// on-axis crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrientationBehavior {
    /// Each strand maps to the other with direction reversed
    /// (in-edges go to out-edges).
    Reverses,
    /// Strand directions are preserved (in-edges go to in-edges).
    Preserves,
}

/// A single crossing: sign, incident edges in planar cyclic order with
/// the over-strand pair in slots {0, 2}, derived orientations, and the
/// axis classification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Crossing {
    /// +1 or -1.
    pub sign: i8,
    /// Incident edges in planar cyclic order; slots 0 and 2 carry the
    /// over-strand.
    pub tuple: [EdgeId; 4],
    /// `incoming[s]` is true when the edge in slot `s` is directed into
    /// the crossing at that end.
    pub incoming: [bool; 4],
    pub axis_class: AxisClass,
}

impl Crossing {
    pub fn is_positive(&self) -> bool {
        self.sign > 0
    }

    pub fn is_on_axis(&self) -> bool {
        self.axis_class == AxisClass::OnAxis
    }

    fn in_slot_of_strand(&self, base: usize) -> usize {
        if self.incoming[base] {
            base
        } else {
            strand_partner(base)
        }
    }

    pub fn over_in_slot(&self) -> usize {
        self.in_slot_of_strand(0)
    }

    pub fn over_out_slot(&self) -> usize {
        strand_partner(self.over_in_slot())
    }

    pub fn under_in_slot(&self) -> usize {
        self.in_slot_of_strand(1)
    }

    pub fn under_out_slot(&self) -> usize {
        strand_partner(self.under_in_slot())
    }

    pub fn over_in(&self) -> EdgeId {
        self.tuple[self.over_in_slot()]
    }

    pub fn over_out(&self) -> EdgeId {
        self.tuple[self.over_out_slot()]
    }

    pub fn under_in(&self) -> EdgeId {
        self.tuple[self.under_in_slot()]
    }

    pub fn under_out(&self) -> EdgeId {
        self.tuple[self.under_out_slot()]
    }

    /// The over-strand edges as a sorted multiset.
    pub fn over_pair(&self) -> [EdgeId; 2] {
        sorted_pair(self.tuple[0], self.tuple[2])
    }

    /// The under-strand edges as a sorted multiset.
    pub fn under_pair(&self) -> [EdgeId; 2] {
        sorted_pair(self.tuple[1], self.tuple[3])
    }

    /// The two slot pairs joined by the requested smoothing.
    ///
    /// The orientation-respecting smoothing joins the over-in slot with
    /// the under-out slot; bit 0 selects it at positive crossings and
    /// the other planar smoothing at negative ones.
    pub fn smoothing_slot_pairs(&self, bit: bool) -> [(usize, usize); 2] {
        let oi = self.over_in_slot();
        let uo = self.under_out_slot();
        let oriented = [(oi, uo), (strand_partner(oi), strand_partner(uo))];
        let disoriented = [(oi, strand_partner(uo)), (strand_partner(oi), uo)];
        if bit == (self.sign < 0) {
            oriented
        } else {
            disoriented
        }
    }

    /// Representation-independent key: the cyclic tuple may be rotated by
    /// two slots without changing the crossing.
    fn canonical_key(&self) -> ([EdgeId; 4], [bool; 4]) {
        let t = self.tuple;
        let i = self.incoming;
        let rot = ([t[2], t[3], t[0], t[1]], [i[2], i[3], i[0], i[1]]);
        std::cmp::min((t, i), rot)
    }
}

fn sorted_pair(a: EdgeId, b: EdgeId) -> [EdgeId; 2] {
    if a <= b {
        [a, b]
    } else {
        [b, a]
    }
}

/// A choice of 0- or 1-smoothing at every crossing, packed as a bit mask
/// in crossing declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Smoothing {
    mask: u32,
    n: u8,
}

impl Smoothing {
    pub fn new(mask: u32, n: usize) -> Self {
        assert!(n <= 32, "at most 32 crossings supported");
        assert!(n == 32 || mask < (1u32 << n), "mask out of range");
        Smoothing { mask, n: n as u8 }
    }

    pub fn zero(n: usize) -> Self {
        Smoothing::new(0, n)
    }

    pub fn len(&self) -> usize {
        self.n as usize
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn bit(&self, c: usize) -> bool {
        assert!(c < self.n as usize);
        self.mask >> c & 1 == 1
    }

    /// Number of 1-smoothings.
    pub fn weight(&self) -> u32 {
        self.mask.count_ones()
    }

    pub fn flipped(&self, c: usize) -> Smoothing {
        assert!(c < self.n as usize);
        Smoothing { mask: self.mask ^ (1 << c), n: self.n }
    }

    /// All smoothings of `n` crossings in mask order.
    pub fn enumerate(n: usize) -> impl Iterator<Item = Smoothing> {
        assert!(n < 32, "smoothing enumeration limited to 31 crossings");
        (0u32..1 << n).map(move |mask| Smoothing { mask, n: n as u8 })
    }
}

/// The circles of a smoothed diagram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolution {
    /// Each circle is a sorted list of the edges lying on it; circles are
    /// sorted by their lowest edge.
    pub circles: Vec<Vec<EdgeId>>,
    /// Circle index of each edge.
    pub edge_circle: Vec<u32>,
    /// The permutation the symmetry induces on circles, present exactly
    /// when the smoothing is symmetric.
    pub tau_on_circles: Option<Vec<u32>>,
}

impl Resolution {
    pub fn n_circles(&self) -> usize {
        self.circles.len()
    }

    pub fn circle_of(&self, e: EdgeId) -> usize {
        self.edge_circle[e as usize] as usize
    }

    /// Flags the circles fixed by the induced symmetry (symmetric
    /// smoothings only).
    pub fn fixed_circle_flags(&self) -> Option<Vec<bool>> {
        self.tau_on_circles
            .as_ref()
            .map(|tau| tau.iter().enumerate().map(|(i, &t)| t as usize == i).collect())
    }
}

/// Signed crossing counts by axis class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrossingCensus {
    pub on_axis_positive: usize,
    pub on_axis_negative: usize,
    pub off_axis_positive: usize,
    pub off_axis_negative: usize,
    /// On-axis crossings whose strand orientations are preserved by the
    /// symmetry.
    pub on_axis_preserving: usize,
}

impl CrossingCensus {
    pub fn n_positive(&self) -> usize {
        self.on_axis_positive + self.off_axis_positive
    }

    pub fn n_negative(&self) -> usize {
        self.on_axis_negative + self.off_axis_negative
    }

    pub fn total(&self) -> usize {
        self.n_positive() + self.n_negative()
    }
}

/// Errors from parsing or using a diagram.
#[derive(Debug, Error)]
pub enum DiagramError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("involution violation: {0}")]
    Involution(String),
    #[error("orientation inconsistency: {0}")]
    Orientation(String),
    #[error("invalid diagram: {0}")]
    Structure(String),
    #[error("crossing {0} is not on the axis")]
    NotOnAxis(u32),
}

/// Kind of a validation finding, used to classify parse failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Involution,
    Orientation,
    Structure,
}

/// One violated invariant, as reported by [`InvolutiveDiagram::validate`].
#[derive(Debug, Clone)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl Violation {
    pub(crate) fn into_error(self) -> DiagramError {
        match self.kind {
            ViolationKind::Involution => DiagramError::Involution(self.message),
            ViolationKind::Orientation => DiagramError::Orientation(self.message),
            ViolationKind::Structure => DiagramError::Structure(self.message),
        }
    }
}

/// A validated τ-symmetric link diagram.
#[derive(Debug, Clone)]
pub struct InvolutiveDiagram {
    /// Edges are labelled `0..n_edges`.
    pub n_edges: u32,
    /// Crossings in declaration order (= smoothing bit order).
    pub crossings: Vec<Crossing>,
    /// Declared crossing ids, parallel to `crossings`.
    pub crossing_ids: Vec<u32>,
    /// Edge involution of the symmetry.
    pub tau_edges: Vec<EdgeId>,
    /// Crossing involution of the symmetry (indices into `crossings`).
    pub tau_crossings: Vec<usize>,
    /// Optional basepoint on a τ-fixed edge.
    pub basepoint: Option<EdgeId>,
    /// Link components as cyclic edge sequences in flow order, each
    /// rotated to start at its lowest edge and sorted by lowest edge.
    pub components: Vec<Vec<EdgeId>>,
}

impl PartialEq for InvolutiveDiagram {
    fn eq(&self, other: &Self) -> bool {
        self.n_edges == other.n_edges
            && self.tau_edges == other.tau_edges
            && self.tau_crossings == other.tau_crossings
            && self.basepoint == other.basepoint
            && self.components == other.components
            && self.crossings.len() == other.crossings.len()
            && self.crossings.iter().zip(&other.crossings).all(|(a, b)| {
                a.sign == b.sign
                    && a.axis_class == b.axis_class
                    && a.canonical_key() == b.canonical_key()
            })
    }
}

impl Eq for InvolutiveDiagram {}

/// Occurrence of an edge at a crossing slot.
type Occurrence = (usize, usize);

impl InvolutiveDiagram {
    pub fn n_crossings(&self) -> usize {
        self.crossings.len()
    }

    /// Occurrences of each edge among crossing slots, sorted by
    /// (crossing id, slot). Every edge occurs 0 or 2 times.
    fn occurrences(&self) -> Vec<Vec<Occurrence>> {
        let mut occ: Vec<Vec<Occurrence>> = vec![Vec::new(); self.n_edges as usize];
        let mut order: Vec<usize> = (0..self.crossings.len()).collect();
        order.sort_by_key(|&i| self.crossing_ids[i]);
        for &c in &order {
            for (s, &e) in self.crossings[c].tuple.iter().enumerate() {
                occ[e as usize].push((c, s));
            }
        }
        occ
    }

    /// The occurrence where each edge enters a crossing, if any.
    fn head_occurrences(&self) -> Vec<Option<Occurrence>> {
        let mut head = vec![None; self.n_edges as usize];
        for (c, cr) in self.crossings.iter().enumerate() {
            for s in 0..4 {
                if cr.incoming[s] {
                    head[cr.tuple[s] as usize] = Some((c, s));
                }
            }
        }
        head
    }

    /// Edge directly following `e` along its strand, if `e` meets a
    /// crossing.
    pub fn next_edge(&self, e: EdgeId) -> Option<EdgeId> {
        let (c, s) = self.head_occurrences()[e as usize]?;
        Some(self.crossings[c].tuple[strand_partner(s)])
    }

    fn succ_map(&self) -> Vec<Option<EdgeId>> {
        let head = self.head_occurrences();
        (0..self.n_edges)
            .map(|e| {
                head[e as usize].map(|(c, s)| self.crossings[c].tuple[strand_partner(s)])
            })
            .collect()
    }

    /// Index of the component containing each edge.
    pub fn edge_component(&self, e: EdgeId) -> usize {
        self.components
            .iter()
            .position(|comp| comp.contains(&e))
            .expect("edge not in any component")
    }

    /// Checks all structural invariants, returning an empty report for a
    /// valid diagram.
    pub fn validate(&self) -> Vec<Violation> {
        let mut report = Vec::new();
        let n = self.n_edges as usize;
        let nc = self.crossings.len();
        let mut push = |kind, message: String| report.push(Violation { kind, message });

        if self.tau_edges.len() != n {
            push(
                ViolationKind::Structure,
                format!("tau_edges has {} entries for {} edges", self.tau_edges.len(), n),
            );
            return report;
        }
        if self.tau_crossings.len() != nc {
            push(
                ViolationKind::Structure,
                format!(
                    "tau_crossings has {} entries for {} crossings",
                    self.tau_crossings.len(),
                    nc
                ),
            );
            return report;
        }
        for (e, &t) in self.tau_edges.iter().enumerate() {
            if t as usize >= n {
                push(ViolationKind::Structure, format!("tau_edges({e}) = {t} out of range"));
                return report;
            }
        }
        for (c, &t) in self.tau_crossings.iter().enumerate() {
            if t >= nc {
                push(ViolationKind::Structure, format!("tau_crossings({c}) = {t} out of range"));
                return report;
            }
        }

        for e in 0..n {
            let t = self.tau_edges[e] as usize;
            if self.tau_edges[t] as usize != e {
                push(
                    ViolationKind::Involution,
                    format!("tau_edges is not an involution at edge {e}"),
                );
            }
        }
        for c in 0..nc {
            let t = self.tau_crossings[c];
            if self.tau_crossings[t] != c {
                push(
                    ViolationKind::Involution,
                    format!("tau_crossings is not an involution at crossing {}", self.crossing_ids[c]),
                );
            }
        }

        for (c, cr) in self.crossings.iter().enumerate() {
            let id = self.crossing_ids[c];
            let t = self.tau_crossings[c];
            match cr.axis_class {
                AxisClass::OnAxis => {
                    if t != c {
                        push(
                            ViolationKind::Structure,
                            format!("crossing {id} marked on-axis but not fixed by tau_crossings"),
                        );
                    }
                }
                AxisClass::OffAxis { partner } => {
                    if t != partner || partner == c {
                        push(
                            ViolationKind::Structure,
                            format!("crossing {id} off-axis partner disagrees with tau_crossings"),
                        );
                    } else if self.crossings[partner].axis_class
                        != (AxisClass::OffAxis { partner: c })
                    {
                        push(
                            ViolationKind::Structure,
                            format!("off-axis pairing of crossing {id} is not symmetric"),
                        );
                    }
                }
            }
            if cr.sign != self.crossings[t].sign {
                push(
                    ViolationKind::Structure,
                    format!(
                        "sign not tau-invariant for crossings {id} and {}",
                        self.crossing_ids[t]
                    ),
                );
            }
            if cr.sign != 1 && cr.sign != -1 {
                push(ViolationKind::Structure, format!("crossing {id} has sign {}", cr.sign));
            }
            for &e in &cr.tuple {
                if e as usize >= n {
                    push(
                        ViolationKind::Structure,
                        format!("crossing {id} references edge {e} out of range"),
                    );
                    return report;
                }
            }
            if cr.incoming[0] == cr.incoming[2] || cr.incoming[1] == cr.incoming[3] {
                push(
                    ViolationKind::Orientation,
                    format!("crossing {id} does not have one in- and one out-edge per strand"),
                );
            }
        }

        // The symmetry must exchange over- and under-strands.
        for (c, cr) in self.crossings.iter().enumerate() {
            let t = self.tau_crossings[c];
            let image_over =
                sorted_pair(self.tau_edges[cr.tuple[0] as usize], self.tau_edges[cr.tuple[2] as usize]);
            let image_under =
                sorted_pair(self.tau_edges[cr.tuple[1] as usize], self.tau_edges[cr.tuple[3] as usize]);
            if image_over != self.crossings[t].under_pair()
                || image_under != self.crossings[t].over_pair()
            {
                push(
                    ViolationKind::Involution,
                    format!(
                        "tau_edges does not exchange the strands of crossings {} and {}",
                        self.crossing_ids[c], self.crossing_ids[t]
                    ),
                );
            }
        }

        // Each edge is incoming at exactly one of its occurrences.
        let occ = self.occurrences();
        for (e, ends) in occ.iter().enumerate() {
            let k = ends.len();
            if k != 0 && k != 2 {
                push(
                    ViolationKind::Structure,
                    format!("edge {e} appears {k} times in crossing tuples (expected 0 or 2)"),
                );
                continue;
            }
            if k == 2 {
                let ins = ends
                    .iter()
                    .filter(|&&(c, s)| self.crossings[c].incoming[s])
                    .count();
                if ins != 1 {
                    push(
                        ViolationKind::Orientation,
                        format!("edge {e} has {ins} incoming ends (expected 1)"),
                    );
                }
            }
        }

        if let Some(b) = self.basepoint {
            if b >= self.n_edges {
                push(ViolationKind::Structure, format!("basepoint {b} out of range"));
            } else if self.tau_edges[b as usize] != b {
                push(
                    ViolationKind::Structure,
                    format!("basepoint {b} is not on a tau-fixed edge"),
                );
            }
        }

        // Components partition the edges and follow the strand flow.
        let mut seen = vec![false; n];
        let succ = self.succ_map();
        for comp in &self.components {
            for (i, &e) in comp.iter().enumerate() {
                if seen[e as usize] {
                    push(ViolationKind::Structure, format!("edge {e} listed twice in components"));
                }
                seen[e as usize] = true;
                if comp.len() > 1 || occ[e as usize].len() == 2 {
                    let f = comp[(i + 1) % comp.len()];
                    if succ[e as usize] != Some(f) {
                        push(
                            ViolationKind::Orientation,
                            format!("component order breaks strand flow at edge {e}"),
                        );
                    }
                }
            }
        }
        if seen.iter().any(|&s| !s) {
            push(ViolationKind::Structure, "components do not cover all edges".into());
        }

        // The symmetry maps components to components, acting on each
        // either direction-preservingly or direction-reversingly.
        for comp in &self.components {
            let image: BTreeSet<EdgeId> =
                comp.iter().map(|&e| self.tau_edges[e as usize]).collect();
            let target = self
                .components
                .iter()
                .find(|c2| c2.iter().any(|&e| image.contains(&e)));
            match target {
                Some(c2) if c2.iter().copied().collect::<BTreeSet<_>>() == image => {}
                _ => {
                    push(
                        ViolationKind::Involution,
                        format!("tau_edges does not map the component of edge {} to a component", comp[0]),
                    );
                    continue;
                }
            }
            if comp.len() < 2 {
                continue;
            }
            let mut preserves = false;
            let mut reverses = false;
            for (i, &e) in comp.iter().enumerate() {
                let s = comp[(i + 1) % comp.len()];
                let te = self.tau_edges[e as usize];
                let ts = self.tau_edges[s as usize];
                // Preserving pattern: tau(succ e) = succ(tau e).
                let fwd = succ[te as usize] == Some(ts);
                // Reversing pattern: tau(succ e) = pred(tau e).
                let bwd = succ[ts as usize] == Some(te);
                if fwd {
                    preserves = true;
                }
                if bwd {
                    reverses = true;
                }
                if !fwd && !bwd {
                    push(
                        ViolationKind::Involution,
                        format!("tau_edges is incompatible with the strand flow at edge {e}"),
                    );
                }
            }
            // Two-edge components satisfy both patterns; only a genuine
            // mixture is an error.
            if preserves && reverses && comp.len() > 2 {
                push(
                    ViolationKind::Orientation,
                    format!(
                        "orientation behavior of the symmetry is inconsistent along the component of edge {}",
                        comp[0]
                    ),
                );
            }
        }

        report
    }

    /// The mirror diagram: all signs negated and over-strands swapped to
    /// under-strands. An involution up to representation.
    pub fn mirror(&self) -> InvolutiveDiagram {
        let crossings = self
            .crossings
            .iter()
            .map(|cr| Crossing {
                sign: -cr.sign,
                tuple: [cr.tuple[1], cr.tuple[2], cr.tuple[3], cr.tuple[0]],
                incoming: [cr.incoming[1], cr.incoming[2], cr.incoming[3], cr.incoming[0]],
                axis_class: cr.axis_class,
            })
            .collect();
        InvolutiveDiagram {
            n_edges: self.n_edges,
            crossings,
            crossing_ids: self.crossing_ids.clone(),
            tau_edges: self.tau_edges.clone(),
            tau_crossings: self.tau_crossings.clone(),
            basepoint: self.basepoint,
            components: self.components.clone(),
        }
    }

    /// How the symmetry acts on strand orientations at an on-axis
    /// crossing (index into `crossings`).
    pub fn onaxis_orientation_behavior(
        &self,
        c: usize,
    ) -> Result<OrientationBehavior, DiagramError> {
        let cr = &self.crossings[c];
        if !cr.is_on_axis() {
            return Err(DiagramError::NotOnAxis(self.crossing_ids[c]));
        }
        if self.tau_edges[cr.over_in() as usize] == cr.under_out() {
            Ok(OrientationBehavior::Reverses)
        } else {
            Ok(OrientationBehavior::Preserves)
        }
    }

    /// Signed crossing counts by axis class.
    pub fn crossing_census(&self) -> CrossingCensus {
        let mut census = CrossingCensus {
            on_axis_positive: 0,
            on_axis_negative: 0,
            off_axis_positive: 0,
            off_axis_negative: 0,
            on_axis_preserving: 0,
        };
        for (c, cr) in self.crossings.iter().enumerate() {
            match (cr.is_on_axis(), cr.is_positive()) {
                (true, true) => census.on_axis_positive += 1,
                (true, false) => census.on_axis_negative += 1,
                (false, true) => census.off_axis_positive += 1,
                (false, false) => census.off_axis_negative += 1,
            }
            if cr.is_on_axis()
                && self.onaxis_orientation_behavior(c).unwrap() == OrientationBehavior::Preserves
            {
                census.on_axis_preserving += 1;
            }
        }
        debug_assert!(census.off_axis_positive.is_multiple_of(2));
        debug_assert!(census.off_axis_negative.is_multiple_of(2));
        census
    }

    /// The smoothing with the image bit pattern under the symmetry.
    pub fn tau_smoothing(&self, s: Smoothing) -> Smoothing {
        assert_eq!(s.len(), self.n_crossings());
        let mut mask = 0u32;
        for c in 0..self.n_crossings() {
            if s.bit(c) {
                mask |= 1 << self.tau_crossings[c];
            }
        }
        Smoothing::new(mask, s.len())
    }

    /// Whether a smoothing is symmetric (equal bits on each partner pair).
    pub fn is_equivariant(&self, s: Smoothing) -> bool {
        self.tau_smoothing(s) == s
    }

    /// The orientation-respecting smoothing (bit 0 at positive crossings,
    /// bit 1 at negative crossings).
    pub fn oriented_smoothing(&self) -> Smoothing {
        let mut mask = 0u32;
        for (c, cr) in self.crossings.iter().enumerate() {
            if !cr.is_positive() {
                mask |= 1 << c;
            }
        }
        Smoothing::new(mask, self.n_crossings())
    }

    /// Replaces every crossing by its chosen smoothing and collects the
    /// resulting circles.
    pub fn resolve(&self, s: Smoothing) -> Resolution {
        assert_eq!(s.len(), self.n_crossings(), "smoothing length mismatch");
        let mut uf = UnionFind::new(self.n_edges as usize);
        for (c, cr) in self.crossings.iter().enumerate() {
            for (a, b) in cr.smoothing_slot_pairs(s.bit(c)) {
                uf.union(cr.tuple[a] as usize, cr.tuple[b] as usize);
            }
        }
        let mut reps: Vec<usize> = (0..self.n_edges as usize).map(|e| uf.find(e)).collect();
        let mut circle_ids: Vec<usize> = reps.clone();
        circle_ids.sort_unstable();
        circle_ids.dedup();
        let mut circles = vec![Vec::new(); circle_ids.len()];
        let mut edge_circle = vec![0u32; self.n_edges as usize];
        for e in 0..self.n_edges as usize {
            let idx = circle_ids.binary_search(&reps[e]).unwrap();
            circles[idx].push(e as u32);
            edge_circle[e] = idx as u32;
            reps[e] = idx;
        }
        let tau_on_circles = if self.is_equivariant(s) {
            let mut tau = vec![u32::MAX; circles.len()];
            for e in 0..self.n_edges as usize {
                let image = edge_circle[self.tau_edges[e] as usize];
                let t = &mut tau[edge_circle[e] as usize];
                assert!(*t == u32::MAX || *t == image, "symmetry does not permute circles");
                *t = image;
            }
            Some(tau)
        } else {
            None
        };
        Resolution { circles, edge_circle, tau_on_circles }
    }

    /// Number of intersection points of the link with the axis: one per
    /// τ-fixed edge meeting a crossing, two per τ-fixed free loop.
    pub fn axis_intersection_points(&self) -> usize {
        let occ = self.occurrences();
        (0..self.n_edges as usize)
            .filter(|&e| self.tau_edges[e] as usize == e)
            .map(|e| if occ[e].is_empty() { 2 } else { 1 })
            .sum()
    }

    /// Whether the symmetry reverses every component's orientation and
    /// each component meets the axis in exactly two points.
    pub fn is_strongly_invertible(&self) -> bool {
        let occ = self.occurrences();
        let succ = self.succ_map();
        for comp in &self.components {
            let fixed = comp.iter().all(|&e| {
                comp.contains(&self.tau_edges[e as usize])
            });
            if !fixed {
                return false;
            }
            let axis_points: usize = comp
                .iter()
                .filter(|&&e| self.tau_edges[e as usize] == e)
                .map(|&e| if occ[e as usize].is_empty() { 2 } else { 1 })
                .sum();
            if axis_points != 2 {
                return false;
            }
            if comp.len() > 2 {
                // Direction must be reversed: tau(succ(e)) = pred(tau(e)),
                // equivalently succ(tau(succ(e))) = tau(e).
                for (i, &e) in comp.iter().enumerate() {
                    let s = comp[(i + 1) % comp.len()];
                    let te = self.tau_edges[e as usize];
                    let ts = self.tau_edges[s as usize];
                    if succ[ts as usize] != Some(te) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Canonical IKD serialization: normalized whitespace, declaration
    /// lines in canonical order, orientations pinned per component where
    /// expressible. Content hashes of this text identify the diagram.
    pub fn canonical_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        writeln!(out, "ikd 1").unwrap();
        writeln!(out, "edges {}", self.n_edges).unwrap();
        for comp in &self.components {
            if comp.len() >= 2 {
                writeln!(out, "orient {}->{}", comp[0], comp[1]).unwrap();
            }
        }
        let mut order: Vec<usize> = (0..self.crossings.len()).collect();
        order.sort_by_key(|&c| self.crossing_ids[c]);
        for c in order {
            let cr = &self.crossings[c];
            let axis = match cr.axis_class {
                AxisClass::OnAxis => "on".to_string(),
                AxisClass::OffAxis { partner } => format!("off:{}", self.crossing_ids[partner]),
            };
            writeln!(
                out,
                "crossing {} {} {},{},{},{} {}",
                self.crossing_ids[c],
                if cr.is_positive() { '+' } else { '-' },
                cr.tuple[0],
                cr.tuple[1],
                cr.tuple[2],
                cr.tuple[3],
                axis
            )
            .unwrap();
        }
        for e in 0..self.n_edges {
            let t = self.tau_edges[e as usize];
            if e < t {
                writeln!(out, "tau_edge {e} {t}").unwrap();
            }
        }
        if let Some(b) = self.basepoint {
            writeln!(out, "basepoint {b}").unwrap();
        }
        out
    }
}

/// Parses and validates an IKD document.
pub fn parse_diagram(text: &str) -> Result<InvolutiveDiagram, DiagramError> {
    Parser::new(text).run()
}

struct Parser<'a> {
    text: &'a str,
}

struct RawCrossing {
    id: u32,
    sign: i8,
    tuple: [EdgeId; 4],
    on_axis: bool,
    partner_id: Option<u32>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { text }
    }

    fn syntax(line_no: usize, line: &str, token: &str, msg: impl Into<String>) -> DiagramError {
        let col = line.find(token).map_or(1, |p| p + 1);
        DiagramError::Syntax { line: line_no, col, msg: msg.into() }
    }

    fn run(&self) -> Result<InvolutiveDiagram, DiagramError> {
        let mut n_edges: Option<u32> = None;
        let mut orient_chains: Vec<(Vec<EdgeId>, usize)> = Vec::new();
        let mut raw: Vec<RawCrossing> = Vec::new();
        let mut tau_pairs: Vec<(EdgeId, EdgeId, usize)> = Vec::new();
        let mut basepoint: Option<EdgeId> = None;
        let mut saw_header = false;

        for (idx, raw_line) in self.text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if !saw_header {
                if tokens != ["ikd", "1"] {
                    return Err(Self::syntax(line_no, raw_line, tokens[0], "expected header `ikd 1`"));
                }
                saw_header = true;
                continue;
            }
            let parse_edge = |tok: &str| -> Result<EdgeId, DiagramError> {
                let e: EdgeId = tok.parse().map_err(|_| {
                    Self::syntax(line_no, raw_line, tok, format!("invalid edge label `{tok}`"))
                })?;
                if let Some(n) = n_edges {
                    if e >= n {
                        return Err(Self::syntax(
                            line_no,
                            raw_line,
                            tok,
                            format!("edge {e} out of range (edges {n})"),
                        ));
                    }
                }
                Ok(e)
            };
            match tokens[0] {
                "edges" => {
                    if tokens.len() != 2 {
                        return Err(Self::syntax(line_no, raw_line, tokens[0], "expected `edges N`"));
                    }
                    let n = tokens[1].parse().map_err(|_| {
                        Self::syntax(line_no, raw_line, tokens[1], "invalid edge count")
                    })?;
                    if n_edges.replace(n).is_some() {
                        return Err(Self::syntax(line_no, raw_line, tokens[0], "duplicate `edges` line"));
                    }
                }
                "orient" => {
                    if tokens.len() != 2 {
                        return Err(Self::syntax(
                            line_no,
                            raw_line,
                            tokens[0],
                            "expected `orient a->b` (chains a->b->c allowed)",
                        ));
                    }
                    let chain: Vec<EdgeId> = tokens[1]
                        .split("->")
                        .map(parse_edge)
                        .collect::<Result<_, _>>()?;
                    if chain.len() < 2 {
                        return Err(Self::syntax(
                            line_no,
                            raw_line,
                            tokens[1],
                            "orient needs at least two edges",
                        ));
                    }
                    orient_chains.push((chain, line_no));
                }
                "crossing" => {
                    if tokens.len() != 5 {
                        return Err(Self::syntax(
                            line_no,
                            raw_line,
                            tokens[0],
                            "expected `crossing <id> <+|-> <a,b,c,d> <on|off:<partner>>`",
                        ));
                    }
                    let id: u32 = tokens[1].parse().map_err(|_| {
                        Self::syntax(line_no, raw_line, tokens[1], "invalid crossing id")
                    })?;
                    if raw.iter().any(|r| r.id == id) {
                        return Err(Self::syntax(
                            line_no,
                            raw_line,
                            tokens[1],
                            format!("duplicate crossing id {id}"),
                        ));
                    }
                    let sign = match tokens[2] {
                        "+" => 1,
                        "-" => -1,
                        other => {
                            return Err(Self::syntax(
                                line_no,
                                raw_line,
                                other,
                                "crossing sign must be `+` or `-`",
                            ))
                        }
                    };
                    let parts: Vec<EdgeId> = tokens[3]
                        .split(',')
                        .map(parse_edge)
                        .collect::<Result<_, _>>()?;
                    if parts.len() != 4 {
                        return Err(Self::syntax(
                            line_no,
                            raw_line,
                            tokens[3],
                            "crossing needs exactly four edges",
                        ));
                    }
                    let tuple = [parts[0], parts[1], parts[2], parts[3]];
                    let (on_axis, partner_id) = if tokens[4] == "on" {
                        (true, None)
                    } else if let Some(p) = tokens[4].strip_prefix("off:") {
                        let pid = p.parse().map_err(|_| {
                            Self::syntax(line_no, raw_line, tokens[4], "invalid partner id")
                        })?;
                        (false, Some(pid))
                    } else {
                        return Err(Self::syntax(
                            line_no,
                            raw_line,
                            tokens[4],
                            "axis class must be `on` or `off:<partner>`",
                        ));
                    };
                    raw.push(RawCrossing { id, sign, tuple, on_axis, partner_id });
                }
                "tau_edge" => {
                    if tokens.len() != 3 {
                        return Err(Self::syntax(line_no, raw_line, tokens[0], "expected `tau_edge i j`"));
                    }
                    let i = parse_edge(tokens[1])?;
                    let j = parse_edge(tokens[2])?;
                    tau_pairs.push((i, j, line_no));
                }
                "basepoint" => {
                    if tokens.len() != 2 {
                        return Err(Self::syntax(line_no, raw_line, tokens[0], "expected `basepoint e`"));
                    }
                    let b = parse_edge(tokens[1])?;
                    if basepoint.replace(b).is_some() {
                        return Err(Self::syntax(
                            line_no,
                            raw_line,
                            tokens[0],
                            "duplicate `basepoint` line",
                        ));
                    }
                }
                other => {
                    return Err(Self::syntax(
                        line_no,
                        raw_line,
                        other,
                        format!("unknown directive `{other}`"),
                    ));
                }
            }
        }

        if !saw_header {
            return Err(DiagramError::Syntax {
                line: 1,
                col: 1,
                msg: "empty document (missing `ikd 1` header)".into(),
            });
        }
        let n_edges = n_edges.ok_or(DiagramError::Syntax {
            line: 1,
            col: 1,
            msg: "missing `edges N` line".into(),
        })?;
        for r in &raw {
            for &e in &r.tuple {
                if e >= n_edges {
                    return Err(DiagramError::Structure(format!(
                        "crossing {} references edge {e} out of range (edges {n_edges})",
                        r.id
                    )));
                }
            }
        }

        // Crossing id resolution.
        let index_of = |id: u32| raw.iter().position(|r| r.id == id);
        let mut axis_classes = Vec::with_capacity(raw.len());
        for r in &raw {
            let class = match (r.on_axis, r.partner_id) {
                (true, _) => AxisClass::OnAxis,
                (false, Some(pid)) => {
                    let p = index_of(pid).ok_or_else(|| {
                        DiagramError::Structure(format!(
                            "crossing {} names unknown partner {pid}",
                            r.id
                        ))
                    })?;
                    AxisClass::OffAxis { partner: p }
                }
                (false, None) => unreachable!(),
            };
            axis_classes.push(class);
        }

        // Edge involution from the listed pairs; unlisted edges are fixed.
        let mut tau_edges: Vec<EdgeId> = (0..n_edges).collect();
        let mut listed = vec![false; n_edges as usize];
        for &(i, j, line) in &tau_pairs {
            for &(e, f) in &[(i, j), (j, i)] {
                if listed[e as usize] && tau_edges[e as usize] != f {
                    return Err(DiagramError::Involution(format!(
                        "edge {e} listed in conflicting tau_edge pairs (line {line})"
                    )));
                }
                listed[e as usize] = true;
                tau_edges[e as usize] = f;
            }
        }

        let tau_crossings: Vec<usize> = axis_classes
            .iter()
            .enumerate()
            .map(|(c, class)| match class {
                AxisClass::OnAxis => c,
                AxisClass::OffAxis { partner } => *partner,
            })
            .collect();

        let crossing_ids: Vec<u32> = raw.iter().map(|r| r.id).collect();
        let mut crossings: Vec<Crossing> = raw
            .iter()
            .zip(&axis_classes)
            .map(|(r, &axis_class)| Crossing {
                sign: r.sign,
                tuple: r.tuple,
                incoming: [false; 4],
                axis_class,
            })
            .collect();

        let components = derive_orientations(
            n_edges,
            &mut crossings,
            &crossing_ids,
            &orient_chains,
        )?;

        let diagram = InvolutiveDiagram {
            n_edges,
            crossings,
            crossing_ids,
            tau_edges,
            tau_crossings,
            basepoint,
            components,
        };
        let report = diagram.validate();
        if let Some(v) = report.into_iter().next() {
            return Err(v.into_error());
        }
        Ok(diagram)
    }
}

/// Assigns edge directions: walks each component propagating the flow
/// through crossings, applies `orient` constraints, and writes the
/// `incoming` flags. Returns the components in canonical order.
fn derive_orientations(
    n_edges: u32,
    crossings: &mut [Crossing],
    crossing_ids: &[u32],
    orient_chains: &[(Vec<EdgeId>, usize)],
) -> Result<Vec<Vec<EdgeId>>, DiagramError> {
    let n = n_edges as usize;
    let mut occ: Vec<Vec<Occurrence>> = vec![Vec::new(); n];
    let mut order: Vec<usize> = (0..crossings.len()).collect();
    order.sort_by_key(|&i| crossing_ids[i]);
    for &c in &order {
        for (s, &e) in crossings[c].tuple.iter().enumerate() {
            occ[e as usize].push((c, s));
        }
    }
    for (e, ends) in occ.iter().enumerate() {
        let k = ends.len();
        if k != 0 && k != 2 {
            return Err(DiagramError::Structure(format!(
                "edge {e} appears {k} times in crossing tuples (expected 0 or 2)"
            )));
        }
    }

    let constraints: Vec<(EdgeId, EdgeId, usize)> = orient_chains
        .iter()
        .flat_map(|(chain, line)| {
            chain.windows(2).map(move |w| (w[0], w[1], *line)).collect::<Vec<_>>()
        })
        .collect();

    // Walks one component starting from `e0` flowing into occurrence
    // `head0`; returns the edge cycle in flow order.
    fn walk(
        crossings: &[Crossing],
        occ: &[Vec<Occurrence>],
        e0: EdgeId,
        head0: Occurrence,
    ) -> Result<Vec<(EdgeId, Occurrence)>, DiagramError> {
        let mut cycle = Vec::new();
        let mut cur = e0;
        let mut head = head0;
        loop {
            if cycle.iter().any(|&(e, _)| e == cur) {
                return Err(DiagramError::Orientation(format!(
                    "strand flow revisits edge {cur} (non-orientable crossing data)"
                )));
            }
            cycle.push((cur, head));
            let (c, s) = head;
            let out_slot = strand_partner(s);
            let next = crossings[c].tuple[out_slot];
            let next_tail = (c, out_slot);
            let next_head = *occ[next as usize]
                .iter()
                .find(|&&o| o != next_tail)
                .expect("edge occurrence table inconsistent");
            if next == e0 && next_head == head0 {
                return Ok(cycle);
            }
            cur = next;
            head = next_head;
        }
    }

    let mut assigned = vec![false; n];
    let mut components = Vec::new();
    for e0 in 0..n as u32 {
        if assigned[e0 as usize] {
            continue;
        }
        if occ[e0 as usize].is_empty() {
            assigned[e0 as usize] = true;
            components.push(vec![e0]);
            continue;
        }
        let default_head = occ[e0 as usize][0];
        let other_head = occ[e0 as usize][1];
        let cycle = walk(crossings, &occ, e0, default_head)?;
        let in_comp =
            |e: EdgeId, cyc: &[(EdgeId, Occurrence)]| cyc.iter().any(|&(x, _)| x == e);

        // Evaluate the orientation constraints touching this component.
        let mut keep = false;
        let mut flip = false;
        for &(a, b, line) in &constraints {
            if !in_comp(a, &cycle) {
                continue;
            }
            let pos = cycle.iter().position(|&(x, _)| x == a).unwrap();
            let succ_a = cycle[(pos + 1) % cycle.len()].0;
            let pred_a = cycle[(pos + cycle.len() - 1) % cycle.len()].0;
            let forward = succ_a == b;
            let backward = pred_a == b;
            match (forward, backward) {
                (true, true) => {}
                (true, false) => keep = true,
                (false, true) => flip = true,
                (false, false) => {
                    return Err(DiagramError::Orientation(format!(
                        "orient line {line}: edges {a} and {b} are not strand-adjacent"
                    )));
                }
            }
        }
        if keep && flip {
            return Err(DiagramError::Orientation(format!(
                "conflicting orient constraints on the component of edge {e0}"
            )));
        }
        let cycle = if flip { walk(crossings, &occ, e0, other_head)? } else { cycle };
        for &(e, (c, s)) in &cycle {
            assigned[e as usize] = true;
            crossings[c].incoming[s] = true;
        }
        components.push(cycle.into_iter().map(|(e, _)| e).collect());
    }
    components.sort_by_key(|c| c[0]);
    Ok(components)
}

/// Union-find with path halving.
struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const UNKNOT: &str = "ikd 1\nedges 1\nbasepoint 0\n";

    pub const HOPF: &str = "\
ikd 1
edges 4
crossing 0 + 2,0,1,3 off:1
crossing 1 + 0,2,3,1 off:0
basepoint 0
";

    pub const TREFOIL: &str = "\
ikd 1
edges 6
orient 0->3
crossing 0 + 4,0,1,5 off:2
crossing 1 + 0,2,3,1 on
crossing 2 + 2,4,5,3 off:0
tau_edge 0 2
tau_edge 1 3
basepoint 4
";

    pub const KINK: &str = "\
ikd 1
edges 2
crossing 0 + 0,1,1,0 on
basepoint 0
";

    pub const CLASP: &str = "\
ikd 1
edges 4
crossing 0 + 0,2,1,3 on
crossing 1 + 3,1,2,0 on
tau_edge 0 2
tau_edge 1 3
";

    fn parse(text: &str) -> InvolutiveDiagram {
        let d = parse_diagram(text).expect("fixture should parse");
        assert!(d.validate().is_empty());
        d
    }

    #[test]
    fn unknot_parses() {
        let d = parse(UNKNOT);
        assert_eq!(d.n_crossings(), 0);
        assert_eq!(d.components, vec![vec![0]]);
        assert_eq!(d.basepoint, Some(0));
        assert_eq!(d.axis_intersection_points(), 2);
        assert!(d.is_strongly_invertible());
        let r = d.resolve(Smoothing::zero(0));
        assert_eq!(r.n_circles(), 1);
        assert_eq!(r.fixed_circle_flags(), Some(vec![true]));
    }

    #[test]
    fn hopf_parses() {
        let d = parse(HOPF);
        assert_eq!(d.n_crossings(), 2);
        assert_eq!(d.components.len(), 2);
        assert_eq!(d.components, vec![vec![0, 3], vec![1, 2]]);
        let census = d.crossing_census();
        assert_eq!(
            (census.on_axis_positive, census.on_axis_negative, census.off_axis_positive,
             census.off_axis_negative, census.on_axis_preserving),
            (0, 0, 2, 0, 0)
        );
        assert_eq!(d.tau_crossings, vec![1, 0]);
        assert!(d.is_strongly_invertible());
        assert_eq!(d.axis_intersection_points(), 4);
        // Symmetric smoothings: equal bits on the one partner pair.
        let sym: Vec<u32> = Smoothing::enumerate(2)
            .filter(|&s| d.is_equivariant(s))
            .map(|s| s.mask())
            .collect();
        assert_eq!(sym, vec![0b00, 0b11]);
    }

    #[test]
    fn hopf_resolutions() {
        let d = parse(HOPF);
        assert_eq!(d.resolve(Smoothing::new(0b00, 2)).n_circles(), 2);
        assert_eq!(d.resolve(Smoothing::new(0b11, 2)).n_circles(), 2);
        assert_eq!(d.resolve(Smoothing::new(0b01, 2)).n_circles(), 1);
        assert_eq!(d.resolve(Smoothing::new(0b10, 2)).n_circles(), 1);
        // The oriented smoothing of an all-positive diagram is all-0.
        assert_eq!(d.oriented_smoothing().mask(), 0);
        let r = d.resolve(Smoothing::new(0b00, 2));
        assert_eq!(r.circles, vec![vec![0, 2], vec![1, 3]]);
        assert_eq!(r.fixed_circle_flags(), Some(vec![true, true]));
        assert!(d.resolve(Smoothing::new(0b01, 2)).tau_on_circles.is_none());
    }

    #[test]
    fn trefoil_parses() {
        let d = parse(TREFOIL);
        let census = d.crossing_census();
        assert_eq!(
            (census.on_axis_positive, census.on_axis_negative, census.off_axis_positive,
             census.off_axis_negative, census.on_axis_preserving),
            (1, 0, 2, 0, 0)
        );
        assert_eq!(d.components, vec![vec![0, 3, 4, 1, 2, 5]]);
        assert_eq!(
            d.onaxis_orientation_behavior(1).unwrap(),
            OrientationBehavior::Reverses
        );
        assert!(matches!(
            d.onaxis_orientation_behavior(0),
            Err(DiagramError::NotOnAxis(0))
        ));
        assert_eq!(d.axis_intersection_points(), 2);
        assert!(d.is_strongly_invertible());
        // The orient line pins the flow: edge 0 enters crossing 1.
        assert_eq!(d.next_edge(0), Some(3));
    }

    #[test]
    fn kink_parses() {
        let d = parse(KINK);
        let census = d.crossing_census();
        assert_eq!((census.on_axis_positive, census.total()), (1, 1));
        assert_eq!(d.onaxis_orientation_behavior(0).unwrap(), OrientationBehavior::Reverses);
        assert!(d.is_strongly_invertible());
        assert_eq!(d.axis_intersection_points(), 2);
        // Both smoothings: one gives 1 circle, the other 2.
        let counts: Vec<usize> = Smoothing::enumerate(1)
            .map(|s| d.resolve(s).n_circles())
            .collect();
        assert_eq!(counts.iter().sum::<usize>(), 3);
    }

    #[test]
    fn clasp_is_orientation_preserving() {
        let d = parse(CLASP);
        let census = d.crossing_census();
        assert_eq!(
            (census.on_axis_positive, census.on_axis_preserving),
            (2, 2)
        );
        assert_eq!(d.onaxis_orientation_behavior(0).unwrap(), OrientationBehavior::Preserves);
        assert_eq!(d.onaxis_orientation_behavior(1).unwrap(), OrientationBehavior::Preserves);
        assert!(!d.is_strongly_invertible());
        assert_eq!(d.axis_intersection_points(), 0);
        assert_eq!(d.components.len(), 2);
    }

    #[test]
    fn mirror_involution_and_census() {
        for text in [HOPF, TREFOIL, KINK, CLASP, UNKNOT] {
            let d = parse(text);
            let m = d.mirror();
            assert!(m.validate().is_empty());
            assert_eq!(m.mirror(), d);
            let (c, mc) = (d.crossing_census(), m.crossing_census());
            assert_eq!(c.on_axis_positive, mc.on_axis_negative);
            assert_eq!(c.off_axis_positive, mc.off_axis_negative);
            assert_eq!(c.on_axis_preserving, mc.on_axis_preserving);
        }
        let m = parse(TREFOIL).mirror();
        let census = m.crossing_census();
        assert_eq!(
            (census.on_axis_negative, census.off_axis_negative),
            (1, 2)
        );
    }

    #[test]
    fn validate_flags_sign_violation() {
        let bad = "\
ikd 1
edges 4
crossing 0 + 2,0,1,3 off:1
crossing 1 - 0,2,3,1 off:0
";
        match parse_diagram(bad) {
            Err(DiagramError::Structure(msg)) => assert!(msg.contains("sign"), "{msg}"),
            other => panic!("expected sign violation, got {other:?}"),
        }
    }

    #[test]
    fn validate_flags_non_involution() {
        let mut d = parse(HOPF);
        // Install a 3-cycle 0 -> 1 -> 2 -> 0 (and fix 3).
        d.tau_edges = vec![1, 2, 0, 3];
        let report = d.validate();
        assert!(report
            .iter()
            .any(|v| v.kind == ViolationKind::Involution && v.message.contains("involution")));
    }

    #[test]
    fn parse_rejects_bad_orient() {
        let bad = "\
ikd 1
edges 6
orient 0->4
crossing 0 + 4,0,1,5 off:2
crossing 1 + 0,2,3,1 on
crossing 2 + 2,4,5,3 off:0
tau_edge 0 2
tau_edge 1 3
";
        match parse_diagram(bad) {
            Err(DiagramError::Orientation(msg)) => {
                assert!(msg.contains("strand-adjacent"), "{msg}")
            }
            other => panic!("expected orientation error, got {other:?}"),
        }
    }

    #[test]
    fn parse_reports_syntax_position() {
        match parse_diagram("ikd 1\nedges 2\ncrossing 0 * 0,1,1,0 on\n") {
            Err(DiagramError::Syntax { line, col, .. }) => {
                assert_eq!(line, 3);
                assert!(col > 1);
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn canonical_text_roundtrip() {
        for text in [UNKNOT, HOPF, TREFOIL, KINK, CLASP] {
            let d = parse(text);
            let canon = d.canonical_text();
            let d2 = parse_diagram(&canon).expect("canonical text should parse");
            assert_eq!(d, d2, "canonical round-trip for:\n{text}");
            assert_eq!(canon, d2.canonical_text());
        }
    }

    #[test]
    fn canonical_text_ignores_formatting() {
        let noisy = "\
# a comment
ikd 1

edges   6
orient 0->3
crossing 2 + 2,4,5,3 off:0   # reordered
crossing 0 + 4,0,1,5 off:2
crossing 1 + 0,2,3,1 on
tau_edge 1 3
tau_edge 0 2
basepoint 4
";
        let a = parse(TREFOIL);
        let b = parse(noisy);
        assert_eq!(a.canonical_text(), b.canonical_text());
    }

    /// Independent circle count: walk edge-ends through smoothing arcs.
    fn circles_by_walking(d: &InvolutiveDiagram, s: Smoothing) -> usize {
        let mut occ: Vec<Vec<Occurrence>> = vec![Vec::new(); d.n_edges as usize];
        for (c, cr) in d.crossings.iter().enumerate() {
            for (slot, &e) in cr.tuple.iter().enumerate() {
                occ[e as usize].push((c, slot));
            }
        }
        let arc_partner = |c: usize, slot: usize| -> usize {
            for (a, b) in d.crossings[c].smoothing_slot_pairs(s.bit(c)) {
                if a == slot {
                    return b;
                }
                if b == slot {
                    return a;
                }
            }
            unreachable!("slot not matched by smoothing arcs")
        };
        let mut visited_ends: BTreeSet<(u32, usize)> = BTreeSet::new();
        let mut circles = 0;
        for e in 0..d.n_edges {
            if occ[e as usize].is_empty() {
                circles += 1;
                continue;
            }
            for start in 0..2 {
                if visited_ends.contains(&(e, start)) {
                    continue;
                }
                circles += 1;
                let (mut cur, mut end_idx) = (e, start);
                loop {
                    if !visited_ends.insert((cur, end_idx)) {
                        break;
                    }
                    // Cross the edge to its other end, then follow the arc.
                    let other = 1 - end_idx;
                    visited_ends.insert((cur, other));
                    let (c, slot) = occ[cur as usize][other];
                    let pslot = arc_partner(c, slot);
                    let next = d.crossings[c].tuple[pslot];
                    let next_end = occ[next as usize]
                        .iter()
                        .position(|&o| o == (c, pslot))
                        .unwrap();
                    cur = next;
                    end_idx = next_end;
                    if (cur, end_idx) == (e, start) {
                        break;
                    }
                }
            }
        }
        circles
    }

    #[test]
    fn union_find_matches_walking_oracle() {
        for text in [UNKNOT, HOPF, TREFOIL, KINK, CLASP] {
            let d = parse(text);
            for s in Smoothing::enumerate(d.n_crossings()) {
                let uf = d.resolve(s).n_circles();
                let walk = circles_by_walking(&d, s);
                assert_eq!(uf, walk, "fixture:\n{text}\nsmoothing {:#b}", s.mask());
            }
        }
    }

    #[test]
    fn single_bit_flip_changes_circles_by_one() {
        for text in [HOPF, TREFOIL, KINK, CLASP] {
            let d = parse(text);
            for s in Smoothing::enumerate(d.n_crossings()) {
                let base = d.resolve(s).n_circles() as i64;
                for c in 0..d.n_crossings() {
                    let flipped = d.resolve(s.flipped(c)).n_circles() as i64;
                    assert_eq!((base - flipped).abs(), 1);
                }
            }
        }
    }

    #[test]
    fn equivariant_smoothing_count() {
        for text in [HOPF, TREFOIL, KINK, CLASP] {
            let d = parse(text);
            let census = d.crossing_census();
            let m = census.on_axis_positive + census.on_axis_negative;
            let pairs = (census.off_axis_positive + census.off_axis_negative) / 2;
            let count = Smoothing::enumerate(d.n_crossings())
                .filter(|&s| d.is_equivariant(s))
                .count();
            assert_eq!(count, 1 << (m + pairs));
        }
    }

    #[test]
    fn fixed_circles_touch_the_axis() {
        for text in [UNKNOT, HOPF, TREFOIL, KINK, CLASP] {
            let d = parse(text);
            for s in Smoothing::enumerate(d.n_crossings()).filter(|&s| d.is_equivariant(s)) {
                let r = d.resolve(s);
                let fixed = r.fixed_circle_flags().unwrap();
                for (ci, circle) in r.circles.iter().enumerate() {
                    let has_fixed_edge =
                        circle.iter().any(|&e| d.tau_edges[e as usize] == e);
                    let meets_axis_crossing = d
                        .crossings
                        .iter()
                        .any(|cr| cr.is_on_axis() && cr.tuple.iter().any(|e| circle.contains(e)));
                    if fixed[ci] {
                        assert!(has_fixed_edge || meets_axis_crossing);
                    }
                    if has_fixed_edge {
                        assert!(fixed[ci]);
                    }
                }
            }
        }
    }

    #[test]
    fn smoothing_bits_respect_orientation_convention() {
        let d = parse(TREFOIL);
        // At the positive on-axis crossing, bit 0 joins over-in to
        // under-out (the orientation-respecting arcs).
        let cr = &d.crossings[1];
        let pairs = cr.smoothing_slot_pairs(false);
        assert!(pairs.contains(&(cr.over_in_slot(), cr.under_out_slot()))
            || pairs.contains(&(cr.under_out_slot(), cr.over_in_slot())));
        // The fully oriented smoothing of the all-positive trefoil is all-0
        // and resolves into tau-fixed circles only.
        let r = d.resolve(d.oriented_smoothing());
        assert!(r.fixed_circle_flags().unwrap().iter().all(|&f| f));
    }
}
