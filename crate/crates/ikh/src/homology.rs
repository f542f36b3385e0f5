//! Cohomology of the perturbed complex with its two filtrations, the
//! associated triply graded table, and the reduced (basepointed) theory.
//!
//! The total differential ∂ = d + d_τ mixes the i and k gradings but
//! respects two filtrations: the increasing filtration F^i spanned by
//! generators of homological degree ≤ i, and the decreasing filtration
//! G^k spanned by generators of axis weight ≥ k. Cohomology H = ker ∂ /
//! im ∂ therefore carries two nested families of subspaces, and the
//! doubly associated graded pieces form a table of dimensions keyed by
//! (i, j, k).
//!
//! When the diagram has a basepoint on a τ-fixed edge, the generators
//! whose basepoint circle is decorated v₋ span a subcomplex; the quotient
//! is spanned by the v₊ decorations. Either one computes the reduced
//! theory, and the unreduced complex is the cone of a connecting map Φ
//! between them. Over GF(2) the map Φ is null-homotopic via an explicit
//! homotopy, which is why the unreduced table splits into two
//! quantum-shifted copies of the reduced one.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::complex::{
    build_complex_limited, ComplexError, GradedComplex, DEFAULT_MAX_CROSSINGS,
};
use crate::diagram::{InvolutiveDiagram, Smoothing};
use crate::f2linalg::{
    image_basis, kernel_basis, subspace_intersection, SparseMatF2, SparseVecF2, Subspace,
};

/// Errors from reduced-theory construction.
#[derive(Debug, Error)]
pub enum HomologyError {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error("reduced theory requires a basepoint on a symmetry-fixed edge")]
    MissingBasepoint,
}

/// Cohomology of one quantum piece together with both filtrations,
/// realized as concrete subspaces of one representative space.
#[derive(Debug, Clone)]
pub struct BifilteredCohomology {
    pub j: i32,
    pub j_shift: i32,
    pub total_dim: usize,
    /// ker ∂ reduced modulo im ∂: a complement of the coboundaries.
    pub representatives: Subspace,
    /// i → image of ker ∂ ∩ F^i in the representative space (increasing).
    pub f_levels: BTreeMap<i32, Subspace>,
    /// 2k → image of ker ∂ ∩ G^k (decreasing in k).
    pub g_levels: BTreeMap<i32, Subspace>,
}

/// Dimensions of the doubly associated graded pieces, keyed by
/// (i, emitted j, 2k). Entries are always positive.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TriGradedTable {
    pub entries: BTreeMap<(i32, i32, i32), usize>,
}

impl TriGradedTable {
    pub fn total(&self) -> usize {
        self.entries.values().sum()
    }

    pub fn get(&self, i: i32, j: i32, twice_k: i32) -> usize {
        self.entries.get(&(i, j, twice_k)).copied().unwrap_or(0)
    }

    pub fn add(&mut self, i: i32, j: i32, twice_k: i32, dim: usize) {
        if dim > 0 {
            *self.entries.entry((i, j, twice_k)).or_insert(0) += dim;
        }
    }

    pub fn merge(&mut self, other: &TriGradedTable) {
        for (&(i, j, k2), &dim) in &other.entries {
            self.add(i, j, k2, dim);
        }
    }

    /// The same table with every quantum grading moved by `dj`.
    pub fn shifted_j(&self, dj: i32) -> TriGradedTable {
        TriGradedTable {
            entries: self
                .entries
                .iter()
                .map(|(&(i, j, k2), &dim)| ((i, j + dj, k2), dim))
                .collect(),
        }
    }

    /// Dimensions summed over k, keyed by (i, j).
    pub fn ij_marginal(&self) -> BTreeMap<(i32, i32), usize> {
        let mut out = BTreeMap::new();
        for (&(i, j, _), &dim) in &self.entries {
            *out.entry((i, j)).or_insert(0) += dim;
        }
        out
    }

    /// Dimensions summed over (i, j), keyed by 2k.
    pub fn k_marginal(&self) -> BTreeMap<i32, usize> {
        let mut out = BTreeMap::new();
        for (&(_, _, k2), &dim) in &self.entries {
            *out.entry(k2).or_insert(0) += dim;
        }
        out
    }
}

/// Kernel of the square matrix `m` restricted to the coordinate subspace
/// spanned by `cols`, as vectors in the ambient index space.
fn kernel_on_columns(m: &SparseMatF2, cols: &[u32]) -> Vec<SparseVecF2> {
    let selected: Vec<SparseVecF2> =
        cols.iter().map(|&c| m.column(c as usize).clone()).collect();
    let restricted = SparseMatF2::from_columns(m.nrows(), selected);
    kernel_basis(&restricted)
        .into_iter()
        .map(|v| SparseVecF2::from_indices(v.support().iter().map(|&c| cols[c as usize])))
        .collect()
}

/// Computes H = ker ∂ / im ∂ for one quantum piece along with the images
/// of both cochain-level filtrations in H.
pub fn total_cohomology(c: &GradedComplex) -> BifilteredCohomology {
    let n = c.dim();
    if n == 0 {
        return BifilteredCohomology {
            j: c.j,
            j_shift: c.j_shift,
            total_dim: 0,
            representatives: Subspace::zero(0),
            f_levels: BTreeMap::new(),
            g_levels: BTreeMap::new(),
        };
    }
    let total = c.total_differential();
    let boundaries = image_basis(&total);
    // Reduction modulo im ∂ is linear; applied to ker ∂ it realizes H as
    // a concrete complement of the coboundaries.
    let project = |v: &SparseVecF2| boundaries.reduce(v);
    let representatives =
        Subspace::from_vectors(n, kernel_basis(&total).iter().map(project));

    let mut i_levels: Vec<i32> = c.i_of.clone();
    i_levels.sort_unstable();
    i_levels.dedup();
    let mut k_levels: Vec<i32> = c.k_of.iter().map(|k| k.twice()).collect();
    k_levels.sort_unstable();
    k_levels.dedup();

    let filtered_image = |keep: &dyn Fn(usize) -> bool| {
        let cols: Vec<u32> =
            (0..n).filter(|&g| keep(g)).map(|g| g as u32).collect();
        Subspace::from_vectors(n, kernel_on_columns(&total, &cols).iter().map(project))
    };

    let mut f_levels = BTreeMap::new();
    let mut prev = 0usize;
    for &i in &i_levels {
        let space = filtered_image(&|g| c.i_of[g] <= i);
        assert!(space.dim() >= prev, "filtration dimensions must not decrease");
        prev = space.dim();
        f_levels.insert(i, space);
    }
    assert_eq!(
        f_levels.get(i_levels.last().unwrap()).unwrap().dim(),
        representatives.dim(),
        "top filtration level must exhaust cohomology"
    );

    let mut g_levels = BTreeMap::new();
    for &k2 in &k_levels {
        let space = filtered_image(&|g| c.k_of[g].twice() >= k2);
        g_levels.insert(k2, space);
    }
    let mut prev = representatives.dim() + 1;
    for space in g_levels.values() {
        assert!(space.dim() <= prev, "deep filtration levels must shrink");
        prev = space.dim();
    }
    assert_eq!(
        g_levels.get(&k_levels[0]).unwrap().dim(),
        representatives.dim(),
        "lowest weight level must exhaust cohomology"
    );

    BifilteredCohomology {
        j: c.j,
        j_shift: c.j_shift,
        total_dim: representatives.dim(),
        representatives,
        f_levels,
        g_levels,
    }
}

/// Extracts the doubly associated graded dimensions by finite differences
/// of the pairwise intersection dimensions.
pub fn trigraded_table(bc: &BifilteredCohomology) -> TriGradedTable {
    let j_out = bc.j + bc.j_shift;
    let is: Vec<i32> = bc.f_levels.keys().copied().collect();
    let ks: Vec<i32> = bc.g_levels.keys().copied().collect();

    // dims[a][b] = dim(F^{is[a]} ∩ G^{ks[b]})
    let dims: Vec<Vec<usize>> = is
        .iter()
        .map(|i| {
            ks.iter()
                .map(|k2| {
                    subspace_intersection(&bc.f_levels[i], &bc.g_levels[k2]).dim()
                })
                .collect()
        })
        .collect();

    let mut table = TriGradedTable::default();
    for a in 0..is.len() {
        for b in 0..ks.len() {
            let cur = dims[a][b] as i64;
            let up = if b + 1 < ks.len() { dims[a][b + 1] as i64 } else { 0 };
            let left = if a > 0 { dims[a - 1][b] as i64 } else { 0 };
            let left_up =
                if a > 0 && b + 1 < ks.len() { dims[a - 1][b + 1] as i64 } else { 0 };
            let entry = cur - up - left + left_up;
            assert!(entry >= 0, "associated graded dimensions are nonnegative");
            table.add(is[a], j_out, ks[b], entry as usize);
        }
    }
    assert_eq!(table.total(), bc.total_dim, "graded pieces must account for all of H");
    table
}

/// Full unreduced table of a diagram: tables of all quantum pieces merged.
pub fn unreduced_table_limited(
    d: &InvolutiveDiagram,
    max_crossings: usize,
) -> Result<TriGradedTable, ComplexError> {
    let mut table = TriGradedTable::default();
    for piece in build_complex_limited(d, max_crossings)? {
        table.merge(&trigraded_table(&total_cohomology(&piece)));
    }
    Ok(table)
}

pub fn unreduced_table(d: &InvolutiveDiagram) -> Result<TriGradedTable, ComplexError> {
    unreduced_table_limited(d, DEFAULT_MAX_CROSSINGS)
}

/// One quantum piece of the basepointed theory: the v₋ subcomplex, the
/// v₊ quotient complex, and the connecting map between them.
#[derive(Debug, Clone)]
pub struct ReducedPair {
    pub sub: GradedComplex,
    pub quot: GradedComplex,
    /// Component of the cube differential from quotient generators to
    /// subcomplex generators; the unreduced piece is its cone.
    pub phi: SparseMatF2,
}

/// Sends the rows of the selected columns of `m` into the sub/quot index
/// spaces. Every row must be mapped by exactly one of the two maps.
fn split_columns(
    m: &SparseMatF2,
    cols: &[u32],
    map_sub: &[Option<u32>],
    dim_sub: usize,
    map_quot: &[Option<u32>],
    dim_quot: usize,
) -> (SparseMatF2, SparseMatF2) {
    let mut sub_cols = Vec::with_capacity(cols.len());
    let mut quot_cols = Vec::with_capacity(cols.len());
    for &c in cols {
        let mut to_sub = Vec::new();
        let mut to_quot = Vec::new();
        for &r in m.column(c as usize).support() {
            match (map_sub[r as usize], map_quot[r as usize]) {
                (Some(s), None) => to_sub.push(s),
                (None, Some(q)) => to_quot.push(q),
                _ => unreachable!("row maps must partition the generators"),
            }
        }
        to_sub.sort_unstable();
        to_quot.sort_unstable();
        sub_cols.push(SparseVecF2::from_support(to_sub));
        quot_cols.push(SparseVecF2::from_support(to_quot));
    }
    (
        SparseMatF2::from_columns(dim_sub, sub_cols),
        SparseMatF2::from_columns(dim_quot, quot_cols),
    )
}

/// Splits every quantum piece of the complex along the basepoint circle
/// decoration. Construction-time checks confirm the cone structure: the
/// v₋ span is closed under both differentials, and the symmetry part
/// never mixes the two halves.
pub fn reduced_complex_limited(
    d: &InvolutiveDiagram,
    max_crossings: usize,
) -> Result<Vec<ReducedPair>, HomologyError> {
    let bp = d.basepoint.ok_or(HomologyError::MissingBasepoint)?;
    let pieces = build_complex_limited(d, max_crossings)?;
    let n = d.n_crossings();
    let bp_circle: Vec<u32> = Smoothing::enumerate(n)
        .map(|s| d.resolve(s).circle_of(bp) as u32)
        .collect();

    let mut out = Vec::with_capacity(pieces.len());
    for piece in pieces {
        let on_basepoint = |g: usize| {
            let gen = &piece.generators[g];
            gen.decoration >> bp_circle[gen.smoothing.mask() as usize] & 1 == 1
        };
        let mut map_sub = vec![None; piece.dim()];
        let mut map_quot = vec![None; piece.dim()];
        let mut sub_idx: Vec<u32> = Vec::new();
        let mut quot_idx: Vec<u32> = Vec::new();
        for g in 0..piece.dim() {
            if on_basepoint(g) {
                map_quot[g] = Some(quot_idx.len() as u32);
                quot_idx.push(g as u32);
            } else {
                map_sub[g] = Some(sub_idx.len() as u32);
                sub_idx.push(g as u32);
            }
        }
        let (ds, dim_sub, dim_quot) = (&piece.d, sub_idx.len(), quot_idx.len());

        let (d_sub, leak) =
            split_columns(ds, &sub_idx, &map_sub, dim_sub, &map_quot, dim_quot);
        assert!(leak.is_zero(), "v₋ decorations must span a subcomplex");
        let (phi, d_quot) =
            split_columns(ds, &quot_idx, &map_sub, dim_sub, &map_quot, dim_quot);

        let (tau_sub, tau_leak) =
            split_columns(&piece.d_tau, &sub_idx, &map_sub, dim_sub, &map_quot, dim_quot);
        assert!(tau_leak.is_zero(), "the symmetry preserves the basepoint label");
        let (tau_mix, tau_quot) =
            split_columns(&piece.d_tau, &quot_idx, &map_sub, dim_sub, &map_quot, dim_quot);
        assert!(tau_mix.is_zero(), "the symmetry preserves the basepoint label");

        let extract = |idx: &[u32], map: &[Option<u32>], dmat: SparseMatF2, tmat: SparseMatF2, j_shift: i32| {
            GradedComplex {
                j: piece.j,
                j_shift,
                generators: idx.iter().map(|&g| piece.generators[g as usize]).collect(),
                d: dmat,
                d_tau: tmat,
                i_of: idx.iter().map(|&g| piece.i_of[g as usize]).collect(),
                k_of: idx.iter().map(|&g| piece.k_of[g as usize]).collect(),
                tau_perm: idx
                    .iter()
                    .map(|&g| {
                        map[piece.tau_perm[g as usize] as usize]
                            .expect("symmetry preserves the basepoint label")
                    })
                    .collect(),
            }
        };
        let sub = extract(&sub_idx, &map_sub, d_sub, tau_sub, 1);
        let quot = extract(&quot_idx, &map_quot, d_quot, tau_quot, -1);
        out.push(ReducedPair { sub, quot, phi });
    }
    Ok(out)
}

pub fn reduced_complex(d: &InvolutiveDiagram) -> Result<Vec<ReducedPair>, HomologyError> {
    reduced_complex_limited(d, DEFAULT_MAX_CROSSINGS)
}

/// Reduced table of a basepointed diagram, computed from the subcomplex
/// pieces with their emitted quantum shift.
pub fn reduced_table_limited(
    d: &InvolutiveDiagram,
    max_crossings: usize,
) -> Result<TriGradedTable, HomologyError> {
    let mut table = TriGradedTable::default();
    for pair in reduced_complex_limited(d, max_crossings)? {
        table.merge(&trigraded_table(&total_cohomology(&pair.sub)));
    }
    Ok(table)
}

pub fn reduced_table(d: &InvolutiveDiagram) -> Result<TriGradedTable, HomologyError> {
    reduced_table_limited(d, DEFAULT_MAX_CROSSINGS)
}

/// The explicit degree-(0,0) homotopy witnessing that Φ is null-homotopic:
/// a basepoint-v₊ decoration maps to the sum of decorations of the same
/// smoothing and quantum degree that differ on exactly two circles, one of
/// them the basepoint circle.
pub fn splitting_homotopy(d: &InvolutiveDiagram, pair: &ReducedPair) -> SparseMatF2 {
    let bp = d.basepoint.expect("reduced pair requires a basepoint");
    let n = d.n_crossings();
    let circle_info: Vec<(u32, u32)> = Smoothing::enumerate(n)
        .map(|s| {
            let res = d.resolve(s);
            (res.circle_of(bp) as u32, res.n_circles() as u32)
        })
        .collect();

    let columns = pair
        .quot
        .generators
        .iter()
        .map(|g| {
            let (bpc, circles) = circle_info[g.smoothing.mask() as usize];
            debug_assert_eq!(g.decoration >> bpc & 1, 1);
            let mut support = Vec::new();
            for y in 0..circles {
                if y != bpc && g.decoration >> y & 1 == 0 {
                    let dec = g.decoration ^ (1 << bpc) ^ (1 << y);
                    let target = crate::complex::Generator { smoothing: g.smoothing, decoration: dec };
                    let idx = pair
                        .sub
                        .index_of(&target)
                        .expect("swapped decoration stays in the quantum piece");
                    support.push(idx as u32);
                }
            }
            support.sort_unstable();
            SparseVecF2::from_support(support)
        })
        .collect();
    SparseMatF2::from_columns(pair.sub.dim(), columns)
}

/// Outcome of the splitting verification.
#[derive(Debug, Default)]
pub struct SplittingReport {
    pub failures: Vec<String>,
}

impl SplittingReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Verifies the two computable consequences of the splitting: the
/// homotopy identity Φ = ∂h + h∂ (with h commuting with the symmetry
/// part), and the equality of the unreduced table with the two
/// quantum-shifted copies of the reduced one.
pub fn splitting_check(d: &InvolutiveDiagram) -> Result<SplittingReport, HomologyError> {
    splitting_check_limited(d, DEFAULT_MAX_CROSSINGS)
}

pub fn splitting_check_limited(
    d: &InvolutiveDiagram,
    max_crossings: usize,
) -> Result<SplittingReport, HomologyError> {
    let mut report = SplittingReport::default();
    let pairs = reduced_complex_limited(d, max_crossings)?;
    for pair in &pairs {
        let h = splitting_homotopy(d, pair);
        let dh = pair.sub.total_differential().compose(&h);
        let hd = h.compose(&pair.quot.total_differential());
        if dh.add(&hd) != pair.phi {
            report
                .failures
                .push(format!("j={}: connecting map is not ∂h + h∂", pair.sub.j));
        }
        if pair.sub.d_tau.compose(&h) != h.compose(&pair.quot.d_tau) {
            report
                .failures
                .push(format!("j={}: homotopy fails to commute with the symmetry", pair.sub.j));
        }
    }

    let unreduced = unreduced_table_limited(d, max_crossings)?;
    let mut reduced = TriGradedTable::default();
    for pair in &pairs {
        reduced.merge(&trigraded_table(&total_cohomology(&pair.sub)));
    }
    let mut expected = reduced.shifted_j(-1);
    expected.merge(&reduced.shifted_j(1));
    if unreduced != expected {
        report.failures.push(format!(
            "table does not split: unreduced {:?} vs shifted reduced {:?}",
            unreduced.entries, expected.entries
        ));
    }
    Ok(report)
}
