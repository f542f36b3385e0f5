//! Top-level invariants and consistency suites.
//!
//! This module packages the machinery of the lower layers into the
//! user-facing computations: the triply graded invariant and its reduced
//! version, an independent ordinary-cohomology oracle that ignores the
//! symmetry, support bounds on the axis weight derived from signed
//! crossing censuses, resolution of an off-axis crossing pair and the
//! induced dimension bookkeeping of the resulting sub/quotient pieces,
//! mirror duality, and extensional move-invariance testing (compute both
//! diagrams, compare every table).
//!
//! All checks return reports rather than panicking on mathematical
//! disagreement; panics are reserved for violations of structural
//! guarantees of the constructions themselves.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::complex::{
    build_complex_limited, ComplexError, GradedComplex, HalfInt, DEFAULT_MAX_CROSSINGS,
};
use crate::diagram::{
    strand_partner, AxisClass, Crossing, DiagramError, EdgeId, InvolutiveDiagram,
    OrientationBehavior, Resolution, Smoothing,
};
use crate::f2linalg::{kernel_basis, rank, SparseMatF2, SparseVecF2};
use crate::homology::{
    reduced_complex_limited, reduced_table_limited, unreduced_table_limited, HomologyError,
    TriGradedTable,
};
use crate::specseq::{build_e2g_explicit_all_limited, f_pages, g_pages, FiltrationKind, SymComplex};

/// Errors from the top-level computations.
#[derive(Debug, Error)]
pub enum InvariantError {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error("crossing index {0} out of range")]
    NoSuchCrossing(usize),
    #[error("crossing {0} is on the axis; resolution acts on off-axis partner pairs")]
    NotOffAxis(u32),
    #[error("the skein decomposition requires every crossing to be positive")]
    NotPositive,
    #[error("support bounds are certified for strongly invertible diagrams only")]
    NotStronglyInvertible,
}

// ---------------------------------------------------------------------------
// The invariant proper.
// ---------------------------------------------------------------------------

/// The triply graded invariant of an involutive diagram: dimensions of the
/// doubly associated graded total cohomology, keyed by (i, j, 2k).
pub fn kh_tau(d: &InvolutiveDiagram) -> Result<TriGradedTable, InvariantError> {
    kh_tau_limited(d, DEFAULT_MAX_CROSSINGS)
}

pub fn kh_tau_limited(
    d: &InvolutiveDiagram,
    max_crossings: usize,
) -> Result<TriGradedTable, InvariantError> {
    Ok(unreduced_table_limited(d, max_crossings)?)
}

/// The reduced (basepointed) triply graded invariant.
pub fn kh_tau_reduced(d: &InvolutiveDiagram) -> Result<TriGradedTable, InvariantError> {
    kh_tau_reduced_limited(d, DEFAULT_MAX_CROSSINGS)
}

pub fn kh_tau_reduced_limited(
    d: &InvolutiveDiagram,
    max_crossings: usize,
) -> Result<TriGradedTable, InvariantError> {
    Ok(reduced_table_limited(d, max_crossings)?)
}

// ---------------------------------------------------------------------------
// Ordinary-cohomology oracle.
// ---------------------------------------------------------------------------

/// Cohomology dimensions of a complex whose differential raises the level
/// by exactly one, as a per-level rank count. Zero entries are omitted.
fn cohomology_by_level(differential: &SparseMatF2, level_of: &[i32]) -> BTreeMap<i32, usize> {
    let mut dims: BTreeMap<i32, usize> = BTreeMap::new();
    for &l in level_of {
        *dims.entry(l).or_insert(0) += 1;
    }
    let mut rank_from: BTreeMap<i32, usize> = BTreeMap::new();
    for &l in dims.keys() {
        let columns: Vec<SparseVecF2> = (0..level_of.len())
            .filter(|&g| level_of[g] == l)
            .map(|g| differential.column(g).clone())
            .collect();
        rank_from.insert(l, rank(&SparseMatF2::from_columns(differential.nrows(), columns)));
    }
    dims.iter()
        .filter_map(|(&l, &dim)| {
            let outgoing = rank_from[&l];
            let incoming = rank_from.get(&(l - 1)).copied().unwrap_or(0);
            let h = dim - outgoing - incoming;
            (h > 0).then_some((l, h))
        })
        .collect()
}

/// Ordinary cube cohomology over GF(2), ignoring the symmetry entirely:
/// an independent oracle for the second homological-filtration page.
/// Keyed by (i, j); zero entries are omitted.
pub fn standard_kh(d: &InvolutiveDiagram) -> Result<BTreeMap<(i32, i32), usize>, InvariantError> {
    standard_kh_limited(d, DEFAULT_MAX_CROSSINGS)
}

pub fn standard_kh_limited(
    d: &InvolutiveDiagram,
    max_crossings: usize,
) -> Result<BTreeMap<(i32, i32), usize>, InvariantError> {
    let mut out = BTreeMap::new();
    for piece in build_complex_limited(d, max_crossings)? {
        for (i, h) in cohomology_by_level(&piece.d, &piece.i_of) {
            *out.entry((i, piece.j + piece.j_shift)).or_insert(0) += h;
        }
    }
    Ok(out)
}

/// Ordinary reduced cube cohomology from the basepointed subcomplex,
/// keyed by (i, emitted j).
pub fn standard_kh_reduced(
    d: &InvolutiveDiagram,
) -> Result<BTreeMap<(i32, i32), usize>, InvariantError> {
    standard_kh_reduced_limited(d, DEFAULT_MAX_CROSSINGS)
}

pub fn standard_kh_reduced_limited(
    d: &InvolutiveDiagram,
    max_crossings: usize,
) -> Result<BTreeMap<(i32, i32), usize>, InvariantError> {
    let mut out = BTreeMap::new();
    for pair in reduced_complex_limited(d, max_crossings)? {
        for (i, h) in cohomology_by_level(&pair.sub.d, &pair.sub.i_of) {
            *out.entry((i, pair.sub.j + pair.sub.j_shift)).or_insert(0) += h;
        }
    }
    Ok(out)
}

/// Comparison of the second homological-filtration page against the
/// ordinary-cohomology oracle.
#[derive(Debug, Clone)]
pub struct OracleReport {
    /// Page dimensions keyed by (i, j).
    pub page_dims: BTreeMap<(i32, i32), usize>,
    /// Oracle dimensions keyed by (i, j).
    pub oracle_dims: BTreeMap<(i32, i32), usize>,
    /// Keys where the two disagree, with (page, oracle) dimensions.
    pub mismatches: Vec<((i32, i32), usize, usize)>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Computes the second homological-filtration page with the generic
/// engine and compares it against [`standard_kh`].
pub fn oracle_check(d: &InvolutiveDiagram) -> Result<OracleReport, InvariantError> {
    oracle_check_limited(d, DEFAULT_MAX_CROSSINGS)
}

pub fn oracle_check_limited(
    d: &InvolutiveDiagram,
    max_crossings: usize,
) -> Result<OracleReport, InvariantError> {
    let mut page_dims = BTreeMap::new();
    for piece in build_complex_limited(d, max_crossings)? {
        let pages = f_pages(&piece, 2);
        let page = pages.iter().find(|p| p.n == 2).expect("second page requested");
        for (&level, &dim) in &page.dims {
            assert!(level.is_integral(), "homological levels are integers");
            *page_dims.entry((level.twice() / 2, piece.j + piece.j_shift)).or_insert(0) += dim;
        }
    }
    let oracle_dims = standard_kh_limited(d, max_crossings)?;
    let keys: BTreeSet<(i32, i32)> =
        page_dims.keys().chain(oracle_dims.keys()).copied().collect();
    let mismatches = keys
        .into_iter()
        .filter_map(|key| {
            let p = page_dims.get(&key).copied().unwrap_or(0);
            let o = oracle_dims.get(&key).copied().unwrap_or(0);
            (p != o).then_some((key, p, o))
        })
        .collect();
    Ok(OracleReport { page_dims, oracle_dims, mismatches })
}

// ---------------------------------------------------------------------------
// Support bounds.
// ---------------------------------------------------------------------------

/// Bounds on the axis-weight support of the invariant, computed from the
/// signed crossing census: each off-axis negative crossing can lower the
/// weight by ½ and each on-axis negative crossing by 1, and dually for
/// positive crossings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SupportBounds {
    pub k_min: HalfInt,
    pub k_max: HalfInt,
}

pub fn support_bounds(d: &InvolutiveDiagram) -> SupportBounds {
    let census = d.crossing_census();
    SupportBounds {
        k_min: HalfInt::from_twice(
            -(census.off_axis_negative as i32) - 2 * census.on_axis_negative as i32,
        ),
        k_max: HalfInt::from_twice(
            census.off_axis_positive as i32 + 2 * census.on_axis_positive as i32,
        ),
    }
}

/// Outcome of the support check on a strongly invertible basepointed
/// diagram.
#[derive(Debug, Clone)]
pub struct SupportReport {
    pub bounds: SupportBounds,
    /// When the reduced oracle is nonzero in the lowest homological
    /// degree, the (i, j, 2k) corner entry the reduced table must hit.
    pub negative_corner: Option<(i32, i32, i32)>,
    /// Whether the reduced oracle is nonzero in the highest homological
    /// degree, which forces a reduced entry at the maximal weight there.
    pub positive_case: bool,
    pub failures: Vec<String>,
}

impl SupportReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Verifies the support bounds and the pinned corner generators.
///
/// Every unreduced and reduced table entry must lie in the weight window
/// `[k_min, k_max]` and the homological window `[-n₋, n₊]`. If the
/// reduced ordinary cohomology is nonzero in degree `-n₋`, the reduced
/// table must be nonzero at `(-n₋, j₀, k_min)` where `j₀` is determined
/// by the census and the circle count of the all-zero smoothing; dually a
/// nonzero top degree forces a reduced entry at weight `k_max`.
pub fn support_lemma_check(d: &InvolutiveDiagram) -> Result<SupportReport, InvariantError> {
    support_lemma_check_limited(d, DEFAULT_MAX_CROSSINGS)
}

pub fn support_lemma_check_limited(
    d: &InvolutiveDiagram,
    max_crossings: usize,
) -> Result<SupportReport, InvariantError> {
    if !d.is_strongly_invertible() {
        return Err(InvariantError::NotStronglyInvertible);
    }
    let bounds = support_bounds(d);
    let census = d.crossing_census();
    let negatives = census.n_negative() as i32;
    let positives = census.n_positive() as i32;
    let unreduced = unreduced_table_limited(d, max_crossings)?;
    let reduced = reduced_table_limited(d, max_crossings)?;
    let mut failures = Vec::new();

    for (name, table) in [("unreduced", &unreduced), ("reduced", &reduced)] {
        for &(i, j, k2) in table.entries.keys() {
            if k2 < bounds.k_min.twice() || k2 > bounds.k_max.twice() {
                failures.push(format!(
                    "{name} entry ({i}, {j}, {k2}/2) outside the weight window \
                     [{}, {}]",
                    bounds.k_min, bounds.k_max
                ));
            }
            if i < -negatives || i > positives {
                failures.push(format!(
                    "{name} entry ({i}, {j}, {k2}/2) outside homological degrees \
                     [{}, {}]",
                    -negatives, positives
                ));
            }
        }
    }

    let oracle = standard_kh_reduced_limited(d, max_crossings)?;
    let mut negative_corner = None;
    if oracle.keys().any(|&(i, _)| i == -negatives) {
        let zero_circles =
            d.resolve(Smoothing::zero(d.n_crossings())).n_circles() as i32;
        let j_corner = positives - 2 * negatives - zero_circles + 1;
        let corner = (-negatives, j_corner, bounds.k_min.twice());
        if reduced.get(corner.0, corner.1, corner.2) == 0 {
            failures.push(format!(
                "reduced table vanishes at the pinned corner ({}, {}, {}/2)",
                corner.0, corner.1, corner.2
            ));
        }
        negative_corner = Some(corner);
    }
    let positive_case = oracle.keys().any(|&(i, _)| i == positives);
    if positive_case
        && !reduced
            .entries
            .keys()
            .any(|&(i, _, k2)| i == positives && k2 == bounds.k_max.twice())
    {
        failures.push(format!(
            "reduced table vanishes at homological degree {} and weight {}",
            positives, bounds.k_max
        ));
    }

    Ok(SupportReport { bounds, negative_corner, positive_case, failures })
}

// ---------------------------------------------------------------------------
// Mirror duality.
// ---------------------------------------------------------------------------

/// Comparison of a diagram's table against its mirror's under negation of
/// all three gradings.
#[derive(Debug, Clone)]
pub struct MirrorReport {
    /// Triples (i, j, 2k) where dim(d) at the triple differs from
    /// dim(mirror) at the negated triple.
    pub mismatches: Vec<(i32, i32, i32)>,
}

impl MirrorReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

pub fn mirror_check(d: &InvolutiveDiagram) -> Result<MirrorReport, InvariantError> {
    mirror_check_limited(d, DEFAULT_MAX_CROSSINGS)
}

pub fn mirror_check_limited(
    d: &InvolutiveDiagram,
    max_crossings: usize,
) -> Result<MirrorReport, InvariantError> {
    let table = unreduced_table_limited(d, max_crossings)?;
    let mirrored = unreduced_table_limited(&d.mirror(), max_crossings)?;
    let keys: BTreeSet<(i32, i32, i32)> = table
        .entries
        .keys()
        .copied()
        .chain(mirrored.entries.keys().map(|&(i, j, k2)| (-i, -j, -k2)))
        .collect();
    let mismatches = keys
        .into_iter()
        .filter(|&(i, j, k2)| table.get(i, j, k2) != mirrored.get(-i, -j, -k2))
        .collect();
    Ok(MirrorReport { mismatches })
}

// ---------------------------------------------------------------------------
// Resolving an off-axis partner pair.
// ---------------------------------------------------------------------------

/// A diagram obtained by replacing an off-axis crossing and its partner
/// by their common smoothing, together with the label maps into it.
#[derive(Debug, Clone)]
pub struct ResolvedPair {
    pub diagram: InvolutiveDiagram,
    /// Old edge → new edge; spliced edges share their image.
    pub edge_map: Vec<EdgeId>,
    /// Old crossing index → surviving crossing index.
    pub crossing_map: Vec<Option<usize>>,
    /// Whether the chosen orientation gives partner crossings equal
    /// signs. Resolving can merge a flow-preserved and a flow-reversed
    /// strand orbit, in which case no orientation does, and censuses
    /// count the two members of a partner orbit separately.
    pub signs_symmetric: bool,
}

fn find_root(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn union_min(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find_root(parent, a), find_root(parent, b));
    if ra != rb {
        parent[ra.max(rb)] = ra.min(rb);
    }
}

/// Sign a surviving crossing inherits under a re-orientation: reversing
/// exactly one of its strands negates the declared sign, reversing both
/// or neither keeps it.
fn inherited_sign(old: &Crossing, incoming: &[bool; 4]) -> i8 {
    let over_reversed = incoming[0] != (old.over_in_slot() == 0);
    let under_reversed = incoming[1] != (old.under_in_slot() == 1);
    if over_reversed != under_reversed {
        -old.sign
    } else {
        old.sign
    }
}

/// Replaces the off-axis crossing `crossing` and its partner by their
/// `bit`-smoothings (simultaneously, preserving the symmetry),
/// re-derives an orientation — preferring inherited strand directions and
/// adjusting component directions so that partner crossings keep equal
/// signs — and returns the validated diagram with its label maps.
pub fn resolve_pair(
    d: &InvolutiveDiagram,
    crossing: usize,
    bit: bool,
) -> Result<ResolvedPair, InvariantError> {
    let nc = d.n_crossings();
    if crossing >= nc {
        return Err(InvariantError::NoSuchCrossing(crossing));
    }
    let partner = d.tau_crossings[crossing];
    if partner == crossing {
        return Err(InvariantError::NotOffAxis(d.crossing_ids[crossing]));
    }
    let removed = [crossing.min(partner), crossing.max(partner)];

    // Splice the edges through both removed crossings along the smoothing.
    let n_old = d.n_edges as usize;
    let mut parent: Vec<usize> = (0..n_old).collect();
    for &c in &removed {
        let cr = &d.crossings[c];
        for (a, b) in cr.smoothing_slot_pairs(bit) {
            union_min(&mut parent, cr.tuple[a] as usize, cr.tuple[b] as usize);
        }
    }
    let roots: Vec<usize> = (0..n_old).map(|e| find_root(&mut parent, e)).collect();
    let mut class_reps: Vec<usize> = roots.clone();
    class_reps.sort_unstable();
    class_reps.dedup();
    let n_new = class_reps.len();
    let edge_map: Vec<EdgeId> = roots
        .iter()
        .map(|r| class_reps.binary_search(r).unwrap() as EdgeId)
        .collect();
    let mut class_members: Vec<Vec<usize>> = vec![Vec::new(); n_new];
    for e in 0..n_old {
        class_members[edge_map[e] as usize].push(e);
    }

    // The symmetry descends to edge classes because the removed pair is a
    // symmetry orbit smoothed the same way on both sides.
    let mut tau_edges = vec![EdgeId::MAX; n_new];
    for e in 0..n_old {
        let (from, to) = (edge_map[e], edge_map[d.tau_edges[e] as usize]);
        let slot = &mut tau_edges[from as usize];
        assert!(
            *slot == EdgeId::MAX || *slot == to,
            "edge splice must commute with the symmetry"
        );
        *slot = to;
    }

    // Surviving crossings, with tuples rewritten to edge classes.
    let survivors: Vec<usize> = (0..nc).filter(|c| !removed.contains(c)).collect();
    let mut crossing_map = vec![None; nc];
    for (new_idx, &c) in survivors.iter().enumerate() {
        crossing_map[c] = Some(new_idx);
    }
    let tuples: Vec<[EdgeId; 4]> = survivors
        .iter()
        .map(|&c| d.crossings[c].tuple.map(|e| edge_map[e as usize]))
        .collect();
    let ids: Vec<u32> = survivors.iter().map(|&c| d.crossing_ids[c]).collect();
    let tau_crossings: Vec<usize> = survivors
        .iter()
        .map(|&c| {
            crossing_map[d.tau_crossings[c]]
                .expect("the symmetry orbit of a surviving crossing survives")
        })
        .collect();
    let axis_classes: Vec<AxisClass> = survivors
        .iter()
        .enumerate()
        .map(|(x, &c)| match d.crossings[c].axis_class {
            AxisClass::OnAxis => AxisClass::OnAxis,
            AxisClass::OffAxis { .. } => AxisClass::OffAxis { partner: tau_crossings[x] },
        })
        .collect();

    // Occurrences of each class among surviving slots, in (crossing id,
    // slot) order so that default directions match the text parser's.
    let m = survivors.len();
    let mut occ: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_new];
    let mut id_order: Vec<usize> = (0..m).collect();
    id_order.sort_by_key(|&x| ids[x]);
    for &x in &id_order {
        for (s, &e) in tuples[x].iter().enumerate() {
            occ[e as usize].push((x, s));
        }
    }
    for ends in &occ {
        assert!(
            ends.is_empty() || ends.len() == 2,
            "every spliced edge class has zero or two surviving ends"
        );
    }

    // Directions inherited from the original diagram, where an end of a
    // class survives to witness one.
    let mut old_head: Vec<Option<(usize, usize)>> = vec![None; n_old];
    for &c in &survivors {
        let cr = &d.crossings[c];
        for s in 0..4 {
            if cr.incoming[s] {
                old_head[cr.tuple[s] as usize] = Some((crossing_map[c].unwrap(), s));
            }
        }
    }

    // Walk the components. Each walk starts at the lowest unvisited edge;
    // the direction is chosen to agree with the first inherited witness.
    let walk = |e0: usize, head0: (usize, usize)| -> Vec<(EdgeId, (usize, usize))> {
        let mut cycle = Vec::new();
        let (mut cur, mut head) = (e0 as EdgeId, head0);
        loop {
            assert!(
                cycle.iter().all(|&(e, _)| e != cur),
                "resolved strand flow must close into simple cycles"
            );
            cycle.push((cur, head));
            let (c, s) = head;
            let out = strand_partner(s);
            let next = tuples[c][out];
            let next_tail = (c, out);
            let next_head = *occ[next as usize]
                .iter()
                .find(|&&o| o != next_tail)
                .expect("occurrence table inconsistent");
            if next == e0 as EdgeId && next_head == head0 {
                return cycle;
            }
            cur = next;
            head = next_head;
        }
    };
    let mut assigned = vec![false; n_new];
    let mut cycles: Vec<Vec<(EdgeId, (usize, usize))>> = Vec::new();
    for e0 in 0..n_new {
        if assigned[e0] {
            continue;
        }
        if occ[e0].is_empty() {
            assigned[e0] = true;
            cycles.push(vec![(e0 as EdgeId, (usize::MAX, usize::MAX))]);
            continue;
        }
        let mut cycle = walk(e0, occ[e0][0]);
        let prefer_flip = cycle.iter().find_map(|&(e, head)| {
            class_members[e as usize]
                .iter()
                .find_map(|&o| old_head[o].map(|h| h != head))
        });
        if prefer_flip == Some(true) {
            cycle = walk(e0, occ[e0][1]);
        }
        for &(e, _) in &cycle {
            assigned[e as usize] = true;
        }
        cycles.push(cycle);
    }

    let apply_cycles = |cycles: &[Vec<(EdgeId, (usize, usize))>]| -> Vec<[bool; 4]> {
        let mut incoming = vec![[false; 4]; m];
        for cycle in cycles {
            for &(_, (c, s)) in cycle {
                if c != usize::MAX {
                    incoming[c][s] = true;
                }
            }
        }
        incoming
    };
    let incoming = apply_cycles(&cycles);
    let sign0: Vec<i8> = (0..m)
        .map(|x| inherited_sign(&d.crossings[survivors[x]], &incoming[x]))
        .collect();

    // Reversing a component toggles the sign of every crossing with
    // exactly one strand on it. Solve for a set of reversals making the
    // signs of partner crossings equal (over GF(2): one unknown per
    // component, one equation per partner pair).
    let comp_of: Vec<usize> = {
        let mut comp_of = vec![0usize; n_new];
        for (ci, cycle) in cycles.iter().enumerate() {
            for &(e, _) in cycle {
                comp_of[e as usize] = ci;
            }
        }
        comp_of
    };
    let strand_comps =
        |x: usize| (comp_of[tuples[x][0] as usize], comp_of[tuples[x][1] as usize]);
    let mut equations: Vec<(Vec<usize>, bool)> = Vec::new();
    for (x, &t) in tau_crossings.iter().enumerate() {
        if t <= x {
            continue;
        }
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for comp in [strand_comps(x).0, strand_comps(x).1, strand_comps(t).0, strand_comps(t).1]
        {
            *counts.entry(comp).or_insert(0) += 1;
        }
        let vars: Vec<usize> =
            counts.into_iter().filter(|&(_, n)| n % 2 == 1).map(|(c, _)| c).collect();
        equations.push((vars, sign0[x] != sign0[t]));
    }
    let flips: Option<Vec<bool>> = if equations.iter().all(|(_, rhs)| !rhs) {
        Some(vec![false; cycles.len()])
    } else {
        // Solve the affine system by finding a kernel vector of the
        // augmented matrix that uses the constant column. The system can
        // be inconsistent: a crossing orbit whose strands lie on a
        // flow-preserved and a flow-reversed self-symmetric component has
        // opposite signs under every orientation.
        let n_comp = cycles.len();
        let mut columns = vec![Vec::new(); n_comp + 1];
        for (row, (vars, rhs)) in equations.iter().enumerate() {
            for &v in vars {
                columns[v].push(row as u32);
            }
            if *rhs {
                columns[n_comp].push(row as u32);
            }
        }
        let matrix = SparseMatF2::from_columns(
            equations.len(),
            columns.into_iter().map(SparseVecF2::from_support).collect(),
        );
        kernel_basis(&matrix)
            .into_iter()
            .find(|v| v.contains(n_comp as u32))
            .map(|solution| (0..n_comp).map(|c| solution.contains(c as u32)).collect())
    };
    let signs_symmetric = flips.is_some();
    let flips = flips.unwrap_or_else(|| vec![false; cycles.len()]);
    let mut final_cycles = cycles;
    for (ci, cycle) in final_cycles.iter_mut().enumerate() {
        if !flips[ci] || cycle[0].1 .0 == usize::MAX {
            continue;
        }
        // Reverse the flow: traverse backwards from the same lowest edge
        // and move each head to the other end of its edge.
        let mut reversed = vec![cycle[0]];
        reversed.extend(cycle[1..].iter().rev());
        for entry in &mut reversed {
            let other = *occ[entry.0 as usize]
                .iter()
                .find(|&&o| o != entry.1)
                .expect("two-ended edge");
            entry.1 = other;
        }
        *cycle = reversed;
    }
    let incoming = apply_cycles(&final_cycles);
    let signs: Vec<i8> = (0..m)
        .map(|x| inherited_sign(&d.crossings[survivors[x]], &incoming[x]))
        .collect();
    if signs_symmetric {
        for (x, &t) in tau_crossings.iter().enumerate() {
            assert_eq!(signs[x], signs[t], "component reversals must equalize partner signs");
        }
    }

    let crossings: Vec<Crossing> = (0..m)
        .map(|x| Crossing {
            sign: signs[x],
            tuple: tuples[x],
            incoming: incoming[x],
            axis_class: axis_classes[x],
        })
        .collect();
    let components: Vec<Vec<EdgeId>> =
        final_cycles.iter().map(|cycle| cycle.iter().map(|&(e, _)| e).collect()).collect();
    let diagram = InvolutiveDiagram {
        n_edges: n_new as u32,
        crossings,
        crossing_ids: ids,
        tau_edges,
        tau_crossings,
        basepoint: d.basepoint.map(|b| edge_map[b as usize]),
        components,
    };
    for v in diagram.validate() {
        if !signs_symmetric && v.message.starts_with("sign not tau-invariant") {
            continue;
        }
        return Err(InvariantError::Diagram(v.into_error()));
    }
    Ok(ResolvedPair { diagram, edge_map, crossing_map, signs_symmetric })
}

// ---------------------------------------------------------------------------
// Skein decomposition of the symmetric model.
// ---------------------------------------------------------------------------

/// Dimension bookkeeping for the decomposition of the symmetric model
/// along an off-axis partner pair of a positive diagram.
#[derive(Debug, Clone)]
pub struct SkeinReport {
    /// The resolved pair, as (lower index, partner index).
    pub pair: (usize, usize),
    /// Census-predicted weight shift of the one-resolved side.
    pub ell: HalfInt,
    /// Empirical grading shifts: a generator of the whole diagram at
    /// (j, k) corresponds to a zero-resolved generator at
    /// (j − j_shift_quot, k − k_shift_quot), and likewise for the
    /// one-resolved subcomplex side.
    pub j_shift_quot: i32,
    pub k_shift_quot: HalfInt,
    pub j_shift_sub: i32,
    pub k_shift_sub: HalfInt,
    /// Rank of the connecting map forced by the cohomology dimensions.
    pub rank_delta: usize,
    /// Third-page dimensions in the whole diagram's (j, 2k) coordinates.
    pub e3_total: BTreeMap<(i32, i32), usize>,
    pub e3_quot: BTreeMap<(i32, i32), usize>,
    pub e3_sub: BTreeMap<(i32, i32), usize>,
    /// The same decomposition for the basepointed theory, when the
    /// diagram carries a basepoint.
    pub rank_delta_reduced: Option<usize>,
    pub e3_total_reduced: Option<BTreeMap<(i32, i32), usize>>,
    pub e3_quot_reduced: Option<BTreeMap<(i32, i32), usize>>,
    pub e3_sub_reduced: Option<BTreeMap<(i32, i32), usize>>,
    /// Residues 2k mod 2 occupied by the one-resolved diagram's own
    /// generators, and whether its census predicts half-integral weights.
    pub sub_k_residues: BTreeSet<i32>,
    pub census_half_integral: bool,
    /// Whether the resolved sides admit orientations with symmetric
    /// partner signs (see [`ResolvedPair::signs_symmetric`]).
    pub quot_signs_symmetric: bool,
    pub sub_signs_symmetric: bool,
    pub failures: Vec<String>,
}

impl SkeinReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn drop_two_bits(mask: u32, lo: usize, hi: usize) -> u32 {
    let drop_one = |m: u32, p: usize| (m & ((1u32 << p) - 1)) | (m >> (p + 1) << p);
    drop_one(drop_one(mask, hi), lo)
}

/// Generators of a symmetric-model family indexed by (smoothing mask,
/// decoration), with their quantum degree, weight, and position.
struct SymIndex {
    lookup: HashMap<(u32, u32), (usize, usize)>,
}

fn index_sym(pieces: &[SymComplex]) -> SymIndex {
    let mut lookup = HashMap::new();
    for (pi, piece) in pieces.iter().enumerate() {
        for (gi, g) in piece.generators.iter().enumerate() {
            let prev = lookup.insert((g.smoothing.mask(), g.decoration), (pi, gi));
            assert!(prev.is_none(), "symmetric generators are distinct");
        }
    }
    SymIndex { lookup }
}

fn sym_dims_by_jk(pieces: &[SymComplex], dj: i32, dk: HalfInt) -> BTreeMap<(i32, i32), usize> {
    let mut out = BTreeMap::new();
    for piece in pieces {
        for &k in &piece.k_of {
            *out.entry((piece.j + dj, (k + dk).twice())).or_insert(0) += 1;
        }
    }
    out
}

fn sym_cohomology_by_jk(
    pieces: &[SymComplex],
    dj: i32,
    dk: HalfInt,
) -> BTreeMap<(i32, i32), usize> {
    let mut out = BTreeMap::new();
    for piece in pieces {
        for (k, dim) in piece.cohomology_by_k() {
            *out.entry((piece.j + dj, (k + dk).twice())).or_insert(0) += dim;
        }
    }
    out
}

/// Dimensions of one axis-filtration page of the basepointed theory,
/// keyed by (j, 2k) and shifted by (dj, dk).
fn reduced_g_page_dims(
    d: &InvolutiveDiagram,
    n: u32,
    dj: i32,
    dk: HalfInt,
    max_crossings: usize,
) -> Result<BTreeMap<(i32, i32), usize>, InvariantError> {
    let mut out = BTreeMap::new();
    for pair in reduced_complex_limited(d, max_crossings)? {
        if pair.sub.dim() == 0 {
            continue;
        }
        let pages = g_pages(&pair.sub, n);
        if let Some(page) = pages.iter().find(|p| p.n == n) {
            for (&k, &dim) in &page.dims {
                *out.entry((pair.sub.j + pair.sub.j_shift + dj, (k + dk).twice()))
                    .or_insert(0) += dim;
            }
        }
    }
    Ok(out)
}

/// Greedy reconciliation of third-page dimensions through a connecting
/// map raising the weight by 1: returns the forced total rank, pushing a
/// failure whenever no rank assignment fits the dimensions.
fn reconcile_connecting_rank(
    e3_total: &BTreeMap<(i32, i32), usize>,
    e3_quot: &BTreeMap<(i32, i32), usize>,
    e3_sub: &BTreeMap<(i32, i32), usize>,
    label: &str,
    failures: &mut Vec<String>,
) -> usize {
    let mut rank_delta = 0usize;
    let js: BTreeSet<i32> =
        e3_total.keys().chain(e3_quot.keys()).chain(e3_sub.keys()).map(|&(j, _)| j).collect();
    for &j in &js {
        let k2s: Vec<i32> = e3_total
            .keys()
            .chain(e3_quot.keys())
            .chain(e3_sub.keys())
            .filter(|&&(jj, _)| jj == j)
            .map(|&(_, k2)| k2)
            .collect();
        let (&k2_min, &k2_max) = match (k2s.iter().min(), k2s.iter().max()) {
            (Some(a), Some(b)) => (a, b),
            _ => continue,
        };
        let mut carried = 0usize;
        let mut k2 = k2_min;
        while k2 <= k2_max + 2 {
            let total = e3_total.get(&(j, k2)).copied().unwrap_or(0);
            let quot_dim = e3_quot.get(&(j, k2)).copied().unwrap_or(0);
            let sub_dim = e3_sub.get(&(j, k2)).copied().unwrap_or(0);
            let deficit = match (quot_dim + sub_dim).checked_sub(total) {
                Some(deficit) => deficit,
                None => {
                    failures.push(format!(
                        "{label}third page exceeds the resolved pieces at (j, 2k) = \
                         ({j}, {k2})"
                    ));
                    carried = 0;
                    k2 += 2;
                    continue;
                }
            };
            // The connecting map consumes from the zero-resolved side at
            // (j, k) and from the one-resolved side at (j, k + 1).
            let outgoing = match deficit.checked_sub(carried) {
                Some(r) if r <= quot_dim => r,
                _ => {
                    failures.push(format!(
                        "{label}no connecting-map ranks reconcile quantum degree {j}"
                    ));
                    carried = 0;
                    k2 += 2;
                    continue;
                }
            };
            if outgoing > e3_sub.get(&(j, k2 + 2)).copied().unwrap_or(0) {
                failures.push(format!(
                    "{label}connecting map overflows the one-resolved side at (j, 2k) = \
                     ({j}, {k2})"
                ));
            }
            rank_delta += outgoing;
            carried = outgoing;
            k2 += 2;
        }
        if carried != 0 {
            failures
                .push(format!("{label}connecting map dangles past the top weight in j = {j}"));
        }
    }
    rank_delta
}

/// Decomposes the symmetric model of a positive diagram along an
/// off-axis partner pair: the one-resolved generators span a subcomplex,
/// the zero-resolved generators present the quotient, and on third pages
/// the dimensions reconcile through a connecting map raising the weight
/// by 1, whose rank is reported.
pub fn skein_check(d: &InvolutiveDiagram, crossing: usize) -> Result<SkeinReport, InvariantError> {
    skein_check_limited(d, crossing, DEFAULT_MAX_CROSSINGS)
}

pub fn skein_check_limited(
    d: &InvolutiveDiagram,
    crossing: usize,
    max_crossings: usize,
) -> Result<SkeinReport, InvariantError> {
    if !d.crossings.iter().all(|cr| cr.is_positive()) {
        return Err(InvariantError::NotPositive);
    }
    let nc = d.n_crossings();
    if crossing >= nc {
        return Err(InvariantError::NoSuchCrossing(crossing));
    }
    let partner = d.tau_crossings[crossing];
    if partner == crossing {
        return Err(InvariantError::NotOffAxis(d.crossing_ids[crossing]));
    }
    let (lo, hi) = (crossing.min(partner), crossing.max(partner));

    let quot = resolve_pair(d, crossing, false)?;
    let sub = resolve_pair(d, crossing, true)?;
    let total_pieces = build_e2g_explicit_all_limited(d, max_crossings)?;
    let quot_pieces = build_e2g_explicit_all_limited(&quot.diagram, max_crossings)?;
    let sub_pieces = build_e2g_explicit_all_limited(&sub.diagram, max_crossings)?;
    let quot_index = index_sym(&quot_pieces);
    let sub_index = index_sym(&sub_pieces);

    let mut failures = Vec::new();

    // Match every generator of the whole diagram with its image after
    // resolving the pair, transporting decorations circle by circle.
    let mut resolution_cache: HashMap<u32, Resolution> = HashMap::new();
    let mut side_cache: [HashMap<u32, Resolution>; 2] = [HashMap::new(), HashMap::new()];
    let mut matched: BTreeMap<(usize, usize), (bool, usize, usize)> = BTreeMap::new();
    let mut shift: [Option<(i32, HalfInt)>; 2] = [None, None];
    for (pi, piece) in total_pieces.iter().enumerate() {
        for (gi, g) in piece.generators.iter().enumerate() {
            let one_side = g.smoothing.bit(crossing);
            assert_eq!(
                one_side,
                g.smoothing.bit(partner),
                "equivariant smoothings agree on partner pairs"
            );
            let resolved = if one_side { &sub } else { &quot };
            let small = Smoothing::new(drop_two_bits(g.smoothing.mask(), lo, hi), nc - 2);
            let res = resolution_cache
                .entry(g.smoothing.mask())
                .or_insert_with(|| d.resolve(g.smoothing))
                .clone();
            let res_small = side_cache[one_side as usize]
                .entry(small.mask())
                .or_insert_with(|| resolved.diagram.resolve(small));
            assert_eq!(
                res.n_circles(),
                res_small.n_circles(),
                "resolving the pair preserves the circle partition"
            );
            let mut dec_small = 0u32;
            for (ci, circle) in res.circles.iter().enumerate() {
                if g.decoration >> ci & 1 == 1 {
                    let image = res_small.circle_of(resolved.edge_map[circle[0] as usize]);
                    dec_small |= 1 << image;
                }
            }
            let index = if one_side { &sub_index } else { &quot_index };
            let pieces = if one_side { &sub_pieces } else { &quot_pieces };
            let &(pi2, gi2) = index
                .lookup
                .get(&(small.mask(), dec_small))
                .expect("resolved generator exists in the resolved model");
            let dj = piece.j - pieces[pi2].j;
            let dk = piece.k_of[gi] - pieces[pi2].k_of[gi2];
            match shift[one_side as usize] {
                None => shift[one_side as usize] = Some((dj, dk)),
                Some((sj, sk)) => {
                    if (sj, sk) != (dj, dk) {
                        failures.push(format!(
                            "grading shift not constant on the {} side: ({sj}, {sk}) vs \
                             ({dj}, {dk})",
                            if one_side { "one-resolved" } else { "zero-resolved" }
                        ));
                    }
                }
            }
            matched.insert((pi, gi), (one_side, pi2, gi2));
        }
    }
    let side_total = |side: bool| {
        matched.values().filter(|&&(s, _, _)| s == side).count()
    };
    let pieces_total =
        |pieces: &[SymComplex]| pieces.iter().map(|p| p.dim()).sum::<usize>();
    assert_eq!(side_total(false), pieces_total(&quot_pieces), "zero side matches bijectively");
    assert_eq!(side_total(true), pieces_total(&sub_pieces), "one side matches bijectively");

    let (j_shift_quot, k_shift_quot) = shift[0].unwrap_or((0, HalfInt::ZERO));
    let (j_shift_sub, k_shift_sub) = shift[1].unwrap_or((0, HalfInt::ZERO));

    // The one-resolved generators span a subcomplex, the differential on
    // them agrees with the one-resolved model, and the zero-resolved
    // remainder presents the zero-resolved model's differential.
    for (pi, piece) in total_pieces.iter().enumerate() {
        for gi in 0..piece.generators.len() {
            let &(one_side, pi2, gi2) = &matched[&(pi, gi)];
            let mut image: BTreeSet<(usize, usize)> = BTreeSet::new();
            for &r in piece.differential.column(gi).support() {
                let &(r_side, rp, rg) = &matched[&(pi, r as usize)];
                if one_side && !r_side {
                    failures.push(format!(
                        "one-resolved span leaks through the differential in quantum \
                         degree {}",
                        piece.j
                    ));
                }
                if r_side == one_side {
                    image.insert((rp, rg));
                }
            }
            let pieces = if one_side { &sub_pieces } else { &quot_pieces };
            let expected: BTreeSet<(usize, usize)> = pieces[pi2]
                .differential
                .column(gi2)
                .support()
                .iter()
                .map(|&r| (pi2, r as usize))
                .collect();
            if image != expected {
                failures.push(format!(
                    "resolved differential disagrees with the {} model in quantum \
                     degree {}",
                    if one_side { "one-resolved" } else { "zero-resolved" },
                    piece.j
                ));
            }
        }
    }

    // Predicted weight shift from the one-resolved diagram's census.
    let d1 = &sub.diagram;
    let mut ell_twice = 2i32;
    for (x, cr) in d1.crossings.iter().enumerate() {
        if cr.is_positive() {
            continue;
        }
        if cr.is_on_axis() {
            match d1.onaxis_orientation_behavior(x).expect("on-axis crossing") {
                OrientationBehavior::Preserves => ell_twice += 1,
                OrientationBehavior::Reverses => ell_twice += 2,
            }
        } else {
            ell_twice += 1;
        }
    }
    let ell = HalfInt::from_twice(ell_twice);
    if ell != k_shift_sub {
        failures.push(format!(
            "census predicts weight shift {ell} but the matched generators shift by \
             {k_shift_sub}"
        ));
    }

    // Dimension accounting: exactness on the second page, and third pages
    // reconciled by a connecting map raising the weight by 1.
    let e2_total = sym_dims_by_jk(&total_pieces, 0, HalfInt::ZERO);
    let mut e2_sum = sym_dims_by_jk(&quot_pieces, j_shift_quot, k_shift_quot);
    for (key, dim) in sym_dims_by_jk(&sub_pieces, j_shift_sub, k_shift_sub) {
        *e2_sum.entry(key).or_insert(0) += dim;
    }
    if e2_total != e2_sum {
        failures.push("second-page dimensions are not additive over the pair".into());
    }

    let e3_total = sym_cohomology_by_jk(&total_pieces, 0, HalfInt::ZERO);
    let e3_quot = sym_cohomology_by_jk(&quot_pieces, j_shift_quot, k_shift_quot);
    let e3_sub = sym_cohomology_by_jk(&sub_pieces, j_shift_sub, k_shift_sub);
    let rank_delta =
        reconcile_connecting_rank(&e3_total, &e3_quot, &e3_sub, "", &mut failures);

    // The basepoint survives resolution, so the decomposition restricts
    // to the basepointed theory with the same shifts.
    let mut rank_delta_reduced = None;
    let mut e3_total_reduced = None;
    let mut e3_quot_reduced = None;
    let mut e3_sub_reduced = None;
    if d.basepoint.is_some() {
        let total = reduced_g_page_dims(d, 2, 0, HalfInt::ZERO, max_crossings)?;
        let mut pieces =
            reduced_g_page_dims(&quot.diagram, 2, j_shift_quot, k_shift_quot, max_crossings)?;
        for (key, dim) in
            reduced_g_page_dims(&sub.diagram, 2, j_shift_sub, k_shift_sub, max_crossings)?
        {
            *pieces.entry(key).or_insert(0) += dim;
        }
        if total != pieces {
            failures.push("reduced second-page dimensions are not additive over the pair".into());
        }
        let total = reduced_g_page_dims(d, 3, 0, HalfInt::ZERO, max_crossings)?;
        let quot_dims =
            reduced_g_page_dims(&quot.diagram, 3, j_shift_quot, k_shift_quot, max_crossings)?;
        let sub_dims =
            reduced_g_page_dims(&sub.diagram, 3, j_shift_sub, k_shift_sub, max_crossings)?;
        rank_delta_reduced = Some(reconcile_connecting_rank(
            &total,
            &quot_dims,
            &sub_dims,
            "reduced ",
            &mut failures,
        ));
        e3_total_reduced = Some(total);
        e3_quot_reduced = Some(quot_dims);
        e3_sub_reduced = Some(sub_dims);
    }

    // Weight integrality classes of the one-resolved diagram.
    let sub_k_residues: BTreeSet<i32> = sub_pieces
        .iter()
        .flat_map(|p| p.k_of.iter().map(|k| k.twice().rem_euclid(2)))
        .collect();
    let census1 = d1.crossing_census();
    let census_half_integral =
        (census1.off_axis_negative + census1.on_axis_preserving) % 2 == 1;
    let expected_residue = i32::from(census_half_integral);
    if sub_k_residues.iter().any(|&r| r != expected_residue) {
        failures.push(format!(
            "one-resolved weights occupy residues {sub_k_residues:?} but the census \
             parity predicts {expected_residue}"
        ));
    }

    Ok(SkeinReport {
        pair: (lo, hi),
        ell,
        j_shift_quot,
        k_shift_quot,
        j_shift_sub,
        k_shift_sub,
        rank_delta,
        e3_total,
        e3_quot,
        e3_sub,
        rank_delta_reduced,
        e3_total_reduced,
        e3_quot_reduced,
        e3_sub_reduced,
        sub_k_residues,
        census_half_integral,
        quot_signs_symmetric: quot.signs_symmetric,
        sub_signs_symmetric: sub.signs_symmetric,
        failures,
    })
}

// ---------------------------------------------------------------------------
// Move invariance.
// ---------------------------------------------------------------------------

/// Comparison of two diagrams asserted to present the same involutive
/// link: the full tables and all stabilized page dimensions must agree.
#[derive(Debug, Clone)]
pub struct MoveReport {
    pub table_equal: bool,
    /// Reduced comparison when both diagrams carry a basepoint.
    pub reduced_equal: Option<bool>,
    pub f_pages_equal: bool,
    pub g_pages_equal: bool,
    pub details: Vec<String>,
}

impl MoveReport {
    pub fn passed(&self) -> bool {
        self.table_equal
            && self.reduced_equal.unwrap_or(true)
            && self.f_pages_equal
            && self.g_pages_equal
    }
}

/// Dimensions of one page of the chosen filtration, keyed by
/// (j, twice the level).
fn page_dim_table(
    pieces: &[GradedComplex],
    kind: FiltrationKind,
    n: u32,
) -> BTreeMap<(i32, i32), usize> {
    let mut out = BTreeMap::new();
    for piece in pieces {
        if piece.dim() == 0 {
            continue;
        }
        let pages = match kind {
            FiltrationKind::F => f_pages(piece, n),
            FiltrationKind::G => g_pages(piece, n),
        };
        if let Some(page) = pages.iter().find(|p| p.n == n) {
            for (&level, &dim) in &page.dims {
                *out.entry((piece.j + piece.j_shift, level.twice())).or_insert(0) += dim;
            }
        }
    }
    out
}

/// Page labels beyond which the filtration spectral sequences of these
/// pieces can no longer move: any deeper differential would overshoot
/// the occupied level span.
fn page_horizons(pieces: &[GradedComplex]) -> (u32, u32) {
    let mut span_i = 0i32;
    let mut span_k2 = 0i32;
    for piece in pieces {
        if piece.dim() == 0 {
            continue;
        }
        let (i_min, i_max) = (
            *piece.i_of.iter().min().unwrap(),
            *piece.i_of.iter().max().unwrap(),
        );
        let (k_min, k_max) = (
            piece.k_of.iter().min().unwrap().twice(),
            piece.k_of.iter().max().unwrap().twice(),
        );
        span_i = span_i.max(i_max - i_min);
        span_k2 = span_k2.max(k_max - k_min);
    }
    ((span_i + 2) as u32, (span_k2 / 2 + 3) as u32)
}

pub fn move_invariance_check(
    d1: &InvolutiveDiagram,
    d2: &InvolutiveDiagram,
) -> Result<MoveReport, InvariantError> {
    move_invariance_check_limited(d1, d2, DEFAULT_MAX_CROSSINGS)
}

pub fn move_invariance_check_limited(
    d1: &InvolutiveDiagram,
    d2: &InvolutiveDiagram,
    max_crossings: usize,
) -> Result<MoveReport, InvariantError> {
    let mut details = Vec::new();
    let t1 = unreduced_table_limited(d1, max_crossings)?;
    let t2 = unreduced_table_limited(d2, max_crossings)?;
    let table_equal = t1 == t2;
    if !table_equal {
        details.push("triply graded tables differ".into());
    }
    let reduced_equal = match (d1.basepoint, d2.basepoint) {
        (Some(_), Some(_)) => {
            let r1 = reduced_table_limited(d1, max_crossings)?;
            let r2 = reduced_table_limited(d2, max_crossings)?;
            if r1 != r2 {
                details.push("reduced tables differ".into());
            }
            Some(r1 == r2)
        }
        _ => None,
    };

    let pieces1 = build_complex_limited(d1, max_crossings)?;
    let pieces2 = build_complex_limited(d2, max_crossings)?;
    let (f1, g1) = page_horizons(&pieces1);
    let (f2, g2) = page_horizons(&pieces2);
    let (f_stop, g_stop) = (f1.max(f2), g1.max(g2));

    let mut f_pages_equal = true;
    for n in 2..=f_stop {
        let p1 = page_dim_table(&pieces1, FiltrationKind::F, n);
        let p2 = page_dim_table(&pieces2, FiltrationKind::F, n);
        if p1 != p2 {
            f_pages_equal = false;
            details.push(format!("homological-filtration page {n} differs"));
        }
    }
    let mut g_pages_equal = true;
    for n in 3..=g_stop.max(3) {
        let p1 = page_dim_table(&pieces1, FiltrationKind::G, n);
        let p2 = page_dim_table(&pieces2, FiltrationKind::G, n);
        if p1 != p2 {
            g_pages_equal = false;
            details.push(format!("weight-filtration page {n} differs"));
        }
    }

    Ok(MoveReport { table_equal, reduced_equal, f_pages_equal, g_pages_equal, details })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::parse_diagram;

    fn fixture(name: &str) -> InvolutiveDiagram {
        let path = format!("{}/../../fixtures/{name}.ikd", env!("CARGO_MANIFEST_DIR"));
        let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
        parse_diagram(&text).unwrap_or_else(|e| panic!("{path}: {e}"))
    }

    fn dims(entries: &[((i32, i32), usize)]) -> BTreeMap<(i32, i32), usize> {
        entries.iter().copied().collect()
    }

    #[test]
    fn oracle_matches_known_tables() {
        assert_eq!(
            standard_kh(&fixture("unknot")).unwrap(),
            dims(&[((0, -1), 1), ((0, 1), 1)])
        );
        assert_eq!(
            standard_kh(&fixture("hopf")).unwrap(),
            dims(&[((0, 0), 1), ((0, 2), 1), ((2, 4), 1), ((2, 6), 1)])
        );
        let trefoil = standard_kh(&fixture("trefoil")).unwrap();
        assert_eq!(trefoil.values().sum::<usize>(), 6);
        assert_eq!(
            standard_kh_reduced(&fixture("trefoil")).unwrap(),
            dims(&[((0, 2), 1), ((2, 6), 1), ((3, 8), 1)])
        );
    }

    #[test]
    fn second_page_agrees_with_the_oracle() {
        for name in ["unknot", "hopf", "trefoil", "fig8_a", "t25"] {
            let report = oracle_check(&fixture(name)).unwrap();
            assert!(report.passed(), "{name}: {:?}", report.mismatches);
        }
    }

    #[test]
    fn support_bounds_from_censuses() {
        let trefoil = fixture("trefoil");
        let bounds = support_bounds(&trefoil);
        assert_eq!((bounds.k_min, bounds.k_max), (HalfInt::ZERO, HalfInt::from_int(2)));
        let mirror_bounds = support_bounds(&trefoil.mirror());
        assert_eq!(
            (mirror_bounds.k_min, mirror_bounds.k_max),
            (HalfInt::from_int(-2), HalfInt::ZERO)
        );
    }

    #[test]
    fn support_corners_are_hit_for_the_trefoil() {
        let report = support_lemma_check(&fixture("trefoil")).unwrap();
        assert!(report.passed(), "{:?}", report.failures);
        assert_eq!(report.negative_corner, Some((0, 2, 0)));
        assert!(report.positive_case);

        let mirrored = support_lemma_check(&fixture("trefoil").mirror()).unwrap();
        assert!(mirrored.passed(), "{:?}", mirrored.failures);
        assert_eq!(mirrored.negative_corner, Some((-3, -8, -4)));
    }

    #[test]
    fn mirror_duality_on_small_fixtures() {
        for name in ["unknot", "hopf", "trefoil", "fig8_a"] {
            let report = mirror_check(&fixture(name)).unwrap();
            assert!(report.passed(), "{name}: {:?}", report.mismatches);
        }
    }

    #[test]
    fn double_mirror_restores_the_table() {
        let d = fixture("trefoil");
        assert_eq!(
            kh_tau(&d).unwrap(),
            kh_tau(&d.mirror().mirror()).unwrap()
        );
    }

    #[test]
    fn resolving_the_trefoil_pair() {
        let d = fixture("trefoil");
        let pair = (0..d.n_crossings())
            .find(|&c| d.tau_crossings[c] != c)
            .expect("trefoil has an off-axis pair");

        let quot = resolve_pair(&d, pair, false).unwrap();
        assert_eq!(quot.diagram.n_crossings(), 1);
        assert!(quot.diagram.crossings.iter().all(|cr| cr.is_positive()));
        assert!(quot.diagram.validate().is_empty());

        let sub = resolve_pair(&d, pair, true).unwrap();
        assert_eq!(sub.diagram.n_crossings(), 1);
        assert!(sub.diagram.validate().is_empty());
        assert_eq!(sub.diagram.components.len(), 2);
        assert!(!sub.diagram.is_strongly_invertible());
    }

    #[test]
    fn resolving_rejects_on_axis_crossings() {
        let d = fixture("trefoil");
        let on_axis = (0..d.n_crossings())
            .find(|&c| d.tau_crossings[c] == c)
            .expect("trefoil has an on-axis crossing");
        assert!(matches!(
            resolve_pair(&d, on_axis, false),
            Err(InvariantError::NotOffAxis(_))
        ));
        assert!(matches!(
            resolve_pair(&d, 99, false),
            Err(InvariantError::NoSuchCrossing(99))
        ));
    }

    #[test]
    fn trefoil_skein_decomposition() {
        let d = fixture("trefoil");
        let pair = (0..d.n_crossings()).find(|&c| d.tau_crossings[c] != c).unwrap();
        let report = skein_check(&d, pair).unwrap();
        assert!(report.passed(), "{:?}", report.failures);
        assert_eq!(report.ell, HalfInt::from_twice(3));
        assert_eq!((report.j_shift_quot, report.k_shift_quot), (2, HalfInt::ZERO));
        assert_eq!(report.rank_delta, 0);
        assert_eq!(report.rank_delta_reduced, Some(0));
        assert_eq!(report.e3_total_reduced.unwrap().values().sum::<usize>(), 3);
        assert!(report.census_half_integral);
        assert_eq!(report.sub_k_residues, BTreeSet::from([1]));
    }

    #[test]
    fn torus_skein_decompositions_reconcile() {
        let d = fixture("t25");
        for c in 0..d.n_crossings() {
            if d.tau_crossings[c] <= c {
                continue;
            }
            let report = skein_check(&d, c).unwrap();
            assert!(report.passed(), "pair {c}: {:?}", report.failures);
            assert_eq!(report.rank_delta, 0, "pair {c}");
            assert_eq!(report.rank_delta_reduced, Some(0), "pair {c}");
        }
    }

    #[test]
    fn move_invariance_of_small_pairs() {
        for (a, b) in [("unknot", "unknot_r1"), ("hopf", "hopf_r2"), ("trefoil", "trefoil_ir1")]
        {
            let report = move_invariance_check(&fixture(a), &fixture(b)).unwrap();
            assert!(report.passed(), "{a} vs {b}: {:?}", report.details);
        }
    }

    #[test]
    fn tables_fit_their_support_windows() {
        for name in ["unknot", "hopf", "trefoil", "fig8_a", "fig8_b", "t25"] {
            let d = fixture(name);
            let bounds = support_bounds(&d);
            let census = d.crossing_census();
            let table = kh_tau(&d).unwrap();
            for &(i, j, k2) in table.entries.keys() {
                assert!(
                    k2 >= bounds.k_min.twice() && k2 <= bounds.k_max.twice(),
                    "{name}: ({i}, {j}, {k2}/2) outside weight window"
                );
                assert!(
                    i >= -(census.n_negative() as i32) && i <= census.n_positive() as i32,
                    "{name}: ({i}, {j}, {k2}/2) outside homological window"
                );
            }
        }
    }
}
