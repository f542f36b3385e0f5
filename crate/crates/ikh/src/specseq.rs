//! Spectral-sequence pages of filtered GF(2) complexes, computed by
//! iterated Gauss elimination, together with an explicit symmetric model
//! of the second axis-weight page.
//!
//! The involutive complex carries two filtrations: the increasing
//! homological filtration `F` (by the degree `i`, leading differential
//! step `+1`) and the decreasing axis-weight filtration `G` (by the
//! half-integer weight `k`, leading step `0`). Both are normalized to an
//! increasing integer filtration — a decreasing half-integer level `k`
//! becomes the integer `−2k` — so a single engine drives both.
//!
//! The engine works on a [`MatrixComplex`] and proceeds in *rounds*: the
//! round for level-degree `g` repeatedly Gauss-eliminates entries whose
//! source and target levels differ by exactly `g` until none remain.
//! Rounds run in descending degree order starting from the leading
//! degree; the state after each completed round is the next page.
//! Because the total differential squares to zero, a round can never
//! stall: while any degree-`g` entry survives, an off-diagonal one
//! exists (a purely diagonal degree-`g` part would square to itself, not
//! to zero), so the round's postcondition is enforced by `assert`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::complex::{
    j_grading, k_weight, surgery_targets, ComplexError, Generator, GradedComplex, HalfInt,
    DEFAULT_MAX_CROSSINGS,
};
use crate::diagram::{InvolutiveDiagram, OrientationBehavior, Resolution, Smoothing};
use crate::f2linalg::{rank, MatrixComplex, SparseMatF2, SparseVecF2};
use crate::homology::total_cohomology;

/// The two standard filtrations of the involutive complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FiltrationKind {
    /// Increasing filtration by homological degree `i`.
    F,
    /// Decreasing filtration by the axis weight `k`.
    G,
}

impl std::fmt::Display for FiltrationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FiltrationKind::F => write!(f, "F"),
            FiltrationKind::G => write!(f, "G"),
        }
    }
}

/// Direction in which the filtration subspaces are nested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Increasing,
    Decreasing,
}

/// A finite-dimensional GF(2) complex with a filtration by generator
/// levels. The differential must respect the filtration: entries never
/// move against the direction and never move further with it than
/// `leading_degree` steps.
#[derive(Debug, Clone)]
pub struct FilteredComplex {
    /// Total differential; must be square and square to zero.
    pub differential: SparseMatF2,
    /// Filtration level of every generator.
    pub level_of: Vec<HalfInt>,
    pub direction: Direction,
    /// Granularity of the level grading (`1` for integer levels, `½` for
    /// half-integer ones); levels are normalized to integers in units of
    /// this step.
    pub step: HalfInt,
    /// Degree, in units of `step` measured along the filtration
    /// direction, of the leading component of the differential. Rounds
    /// eliminate degrees `leading_degree`, `leading_degree − 1`, … in
    /// order.
    pub leading_degree: i32,
}

impl FilteredComplex {
    /// The increasing filtration of ∂ = d + d_τ by homological degree:
    /// `d` moves one step (the leading component), `d_τ` none.
    pub fn homological(c: &GradedComplex) -> FilteredComplex {
        let fc = FilteredComplex {
            differential: c.total_differential(),
            level_of: c.i_of.iter().map(|&i| HalfInt::from_int(i)).collect(),
            direction: Direction::Increasing,
            step: HalfInt::from_int(1),
            leading_degree: 1,
        };
        fc.validate();
        fc
    }

    /// The decreasing filtration of ∂ = d + d_τ by axis weight: `d_τ`
    /// preserves the weight (the leading component), `d` strictly raises
    /// it.
    pub fn axis_weight(c: &GradedComplex) -> FilteredComplex {
        let fc = FilteredComplex {
            differential: c.total_differential(),
            level_of: c.k_of.clone(),
            direction: Direction::Decreasing,
            step: HalfInt::from_twice(1),
            leading_degree: 0,
        };
        fc.validate();
        fc
    }

    pub fn for_kind(c: &GradedComplex, kind: FiltrationKind) -> FilteredComplex {
        match kind {
            FiltrationKind::F => FilteredComplex::homological(c),
            FiltrationKind::G => FilteredComplex::axis_weight(c),
        }
    }

    /// Levels as integers in units of `step`, oriented so that the
    /// filtration increases.
    fn normalized_levels(&self) -> Vec<i32> {
        let step = self.step.twice();
        assert!(step > 0, "filtration step must be positive");
        self.level_of
            .iter()
            .map(|l| {
                let twice = l.twice();
                assert_eq!(twice % step, 0, "level {l} is not a multiple of the filtration step");
                match self.direction {
                    Direction::Increasing => twice / step,
                    Direction::Decreasing => -(twice / step),
                }
            })
            .collect()
    }

    /// Panics unless the differential is square, sized to the level
    /// vector, and respects the filtration.
    fn validate(&self) {
        let n = self.level_of.len();
        assert_eq!(self.differential.nrows(), n, "level vector must match the matrix rows");
        assert_eq!(self.differential.ncols(), n, "differential must be square");
        let levels = self.normalized_levels();
        for (c, col) in self.differential.columns().iter().enumerate() {
            for &r in col.support() {
                let deg = levels[r as usize] - levels[c];
                assert!(
                    deg <= self.leading_degree,
                    "entry ({r}, {c}) moves {deg} steps, past the leading degree",
                );
                if self.direction == Direction::Increasing {
                    assert!(deg >= 0, "entry ({r}, {c}) moves against the filtration");
                }
            }
        }
    }
}

/// One page of a spectral sequence: the survivors of the elimination
/// rounds performed so far, with the differential they induce.
#[derive(Debug, Clone)]
pub struct Page {
    /// Page number (in the labeling of the filtration it came from).
    pub n: u32,
    /// Ambient generator indices of the page basis, ascending.
    pub live: Vec<u32>,
    /// Dimension at each filtration level, in original level units.
    pub dims: BTreeMap<HalfInt, usize>,
    /// Induced differential on the page basis (indexed like `live`).
    pub differential: SparseMatF2,
}

impl Page {
    pub fn total_dim(&self) -> usize {
        self.live.len()
    }
}

fn snapshot(n: u32, fc: &FilteredComplex, levels: &[i32], m: &MatrixComplex) -> Page {
    let live: Vec<u32> = m.alive_indices().iter().map(|&i| i as u32).collect();
    let mut dims: BTreeMap<HalfInt, usize> = BTreeMap::new();
    for &i in &live {
        *dims.entry(fc.level_of[i as usize]).or_insert(0) += 1;
    }
    let position: HashMap<u32, u32> =
        live.iter().enumerate().map(|(p, &i)| (i, p as u32)).collect();
    // Rounds up to this page have cleared every degree above
    // leading − (n − 1).
    let max_degree = fc.leading_degree - (n as i32 - 1);
    let columns = live
        .iter()
        .map(|&c| {
            let support = m
                .column(c as usize)
                .iter()
                .map(|&r| {
                    let deg = levels[r as usize] - levels[c as usize];
                    assert!(deg <= max_degree, "page {n} carries an entry of level-degree {deg}");
                    position[&r]
                })
                .collect();
            SparseVecF2::from_support(support)
        })
        .collect();
    let differential = SparseMatF2::from_columns(live.len(), columns);
    Page { n, live, dims, differential }
}

fn find_pivot(m: &MatrixComplex, levels: &[i32], degree: i32) -> Option<(usize, usize)> {
    for row in m.alive_indices() {
        for &col in m.row(row) {
            let col = col as usize;
            if col != row && levels[row] - levels[col] == degree {
                return Some((row, col));
            }
        }
    }
    None
}

/// Exhaustively eliminates all entries of the given level-degree and
/// returns how many eliminations that took (= the rank of that component
/// of the induced differential).
fn run_round(m: &mut MatrixComplex, levels: &[i32], degree: i32) -> usize {
    let mut eliminated = 0;
    while let Some((row, col)) = find_pivot(m, levels, degree) {
        m.eliminate(row, col);
        eliminated += 1;
    }
    // With the off-diagonal entries exhausted, no diagonal ones of this
    // degree can survive either: the degree-`degree` part squares to
    // zero, which a nonzero diagonal part cannot.
    for col in m.alive_indices() {
        for &row in m.column(col) {
            assert_ne!(
                levels[row as usize] - levels[col],
                degree,
                "a level-degree {degree} entry survived its elimination round",
            );
        }
    }
    eliminated
}

/// Pages 1 through `upto` of the spectral sequence of a filtered
/// complex. Page 1 is the associated graded with its induced
/// differential; page `p + 1` arises from page `p` by eliminating every
/// entry of level-degree `leading_degree − (p − 1)`.
///
/// Deterministic: within a round, pivots are taken in ascending
/// (row, column) order.
pub fn pages(fc: &FilteredComplex, upto: u32) -> Vec<Page> {
    assert!(upto >= 1, "at least the first page must be requested");
    fc.validate();
    let levels = fc.normalized_levels();
    let mut m = MatrixComplex::from_square(&fc.differential);
    let mut out = vec![snapshot(1, fc, &levels, &m)];
    for p in 2..=upto {
        run_round(&mut m, &levels, fc.leading_degree - (p as i32 - 2));
        out.push(snapshot(p, fc, &levels, &m));
    }
    for w in out.windows(2) {
        for (level, &dim) in &w[1].dims {
            assert!(
                dim <= w[0].dims.get(level).copied().unwrap_or(0),
                "page dimensions must shrink levelwise",
            );
        }
    }
    out
}

/// Dimensions of the stable (infinity) page per filtration level,
/// obtained by running elimination rounds of descending degree until the
/// differential is exhausted.
pub fn infinity_dims(fc: &FilteredComplex) -> BTreeMap<HalfInt, usize> {
    fc.validate();
    let levels = fc.normalized_levels();
    let mut m = MatrixComplex::from_square(&fc.differential);
    if let (Some(&lo), Some(&hi)) = (levels.iter().min(), levels.iter().max()) {
        let mut degree = fc.leading_degree;
        while degree >= lo - hi {
            run_round(&mut m, &levels, degree);
            degree -= 1;
        }
    }
    for col in m.alive_indices() {
        assert!(
            m.column(col).is_empty(),
            "differential must be exhausted once every possible degree is eliminated",
        );
    }
    let mut dims: BTreeMap<HalfInt, usize> = BTreeMap::new();
    for i in m.alive_indices() {
        *dims.entry(fc.level_of[i]).or_insert(0) += 1;
    }
    dims
}

/// Relabels raw axis-weight rounds to the weight-graded page numbering:
/// the round eliminating weight-step 0 (the perturbation d_τ) yields page
/// 2, the weight-step-1 round yields page 3, and so on. The interleaved
/// half-step rounds must be empty — every second-page survivor carries
/// the same weight parity — and that is checked whenever the next raw
/// page is available.
pub fn page_indexing_g(raw: Vec<Page>) -> Vec<Page> {
    let mut out = Vec::new();
    let mut n: usize = 2;
    // Labeled page n is raw page 2n − 2.
    while 2 * n - 3 < raw.len() {
        let mut page = raw[2 * n - 3].clone();
        if let Some(half) = raw.get(2 * n - 2) {
            assert_eq!(
                half.live, page.live,
                "a half-step elimination round removed generators",
            );
        }
        page.n = n as u32;
        out.push(page);
        n += 1;
    }
    out
}

/// Homological-filtration pages 1..=`upto` of a graded piece. Page 2 is
/// the ordinary Khovanov cohomology of the piece.
pub fn f_pages(c: &GradedComplex, upto: u32) -> Vec<Page> {
    pages(&FilteredComplex::homological(c), upto)
}

/// Axis-weight pages 2..=`upto` of a graded piece, in the weight-graded
/// labeling of [`page_indexing_g`]. Page dims are keyed by the weight
/// `k`.
pub fn g_pages(c: &GradedComplex, upto: u32) -> Vec<Page> {
    assert!(upto >= 2, "the axis-weight labeling starts at page 2");
    page_indexing_g(pages(&FilteredComplex::axis_weight(c), 2 * upto - 1))
}

/// One disagreement between stable page dimensions and the graded
/// dimensions of the filtration on cohomology.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EInfinityMismatch {
    pub filtration: FiltrationKind,
    pub level: HalfInt,
    pub page_dim: usize,
    pub cohomology_dim: usize,
}

/// Result of [`e_infinity_check`]; empty means the spectral sequence
/// converges to the filtration on cohomology, as it must.
#[derive(Debug, Clone, Default)]
pub struct EInfinityReport {
    pub mismatches: Vec<EInfinityMismatch>,
}

impl EInfinityReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compares the stable page of one filtration with the graded
/// dimensions of the corresponding filtration on the total cohomology,
/// computed independently by the homology module.
pub fn e_infinity_check(c: &GradedComplex, kind: FiltrationKind) -> EInfinityReport {
    let bc = total_cohomology(c);
    let stable = infinity_dims(&FilteredComplex::for_kind(c, kind));
    let mut graded: BTreeMap<HalfInt, usize> = BTreeMap::new();
    match kind {
        FiltrationKind::F => {
            // Increasing: the jump at level i against the previous
            // occupied level.
            let mut prev = 0;
            for (&i, space) in &bc.f_levels {
                graded.insert(HalfInt::from_int(i), space.dim() - prev);
                prev = space.dim();
            }
        }
        FiltrationKind::G => {
            // Decreasing: the jump at weight k against the next occupied
            // weight.
            let dims: Vec<(i32, usize)> =
                bc.g_levels.iter().map(|(&k2, space)| (k2, space.dim())).collect();
            for (idx, &(k2, dim)) in dims.iter().enumerate() {
                let deeper = dims.get(idx + 1).map(|&(_, d)| d).unwrap_or(0);
                graded.insert(HalfInt::from_twice(k2), dim - deeper);
            }
        }
    }
    let levels: BTreeSet<HalfInt> = graded.keys().chain(stable.keys()).copied().collect();
    let mismatches = levels
        .into_iter()
        .filter_map(|level| {
            let page_dim = stable.get(&level).copied().unwrap_or(0);
            let cohomology_dim = graded.get(&level).copied().unwrap_or(0);
            (page_dim != cohomology_dim).then_some(EInfinityMismatch {
                filtration: kind,
                level,
                page_dim,
                cohomology_dim,
            })
        })
        .collect();
    EInfinityReport { mismatches }
}

/// Runs [`e_infinity_check`] for both filtrations and concatenates the
/// mismatches.
pub fn e_infinity_check_both(c: &GradedComplex) -> EInfinityReport {
    let mut report = e_infinity_check(c, FiltrationKind::F);
    report.mismatches.extend(e_infinity_check(c, FiltrationKind::G).mismatches);
    report
}

/// A degree with at most one second-page survivor cannot support a
/// degree-preserving differential: the induced involution fixes a
/// one-dimensional GF(2) space pointwise, so its perturbation id + τ
/// vanishes there. Returns all offending (level, source, target)
/// triples found on the second homological page, in ambient indices; an
/// empty list certifies the property for this piece.
pub fn vanishing_check(c: &GradedComplex) -> Vec<(i32, u32, u32)> {
    let page = f_pages(c, 2).pop().expect("two pages were requested");
    let mut offending = Vec::new();
    for (p, col) in page.differential.columns().iter().enumerate() {
        let src = page.live[p] as usize;
        for &r in col.support() {
            let tgt = page.live[r as usize] as usize;
            if c.i_of[src] == c.i_of[tgt]
                && page.dims.get(&HalfInt::from_int(c.i_of[src])).copied().unwrap_or(0) <= 1
            {
                offending.push((c.i_of[src], page.live[p], page.live[r as usize]));
            }
        }
    }
    offending
}

/// A basis element of the symmetric model: an equivariant smoothing
/// carrying a decoration constant on the τ-orbits of its circles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymGenerator {
    pub smoothing: Smoothing,
    /// Bit per circle of the resolution (set = v₊), constant on orbits.
    pub decoration: u32,
}

/// The symmetric model of the second axis-weight page in one quantum
/// degree: equivariant generators, their weights, and the induced
/// differential, which raises the weight by exactly 1. Its cohomology is
/// the third axis-weight page.
#[derive(Debug, Clone)]
pub struct SymComplex {
    pub j: i32,
    pub generators: Vec<SymGenerator>,
    pub k_of: Vec<HalfInt>,
    pub differential: SparseMatF2,
}

impl SymComplex {
    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    /// Generator count per axis weight.
    pub fn dims_by_k(&self) -> BTreeMap<HalfInt, usize> {
        let mut dims = BTreeMap::new();
        for &k in &self.k_of {
            *dims.entry(k).or_insert(0) += 1;
        }
        dims
    }

    /// Cohomology dimension per axis weight (zero entries omitted).
    /// Every differential entry steps the weight by exactly 1, so the
    /// computation is a rank count per weight.
    pub fn cohomology_by_k(&self) -> BTreeMap<HalfInt, usize> {
        let dims = self.dims_by_k();
        let mut rank_from: BTreeMap<HalfInt, usize> = BTreeMap::new();
        for &k in dims.keys() {
            let columns: Vec<SparseVecF2> = (0..self.dim())
                .filter(|&g| self.k_of[g] == k)
                .map(|g| self.differential.column(g).clone())
                .collect();
            rank_from.insert(k, rank(&SparseMatF2::from_columns(self.dim(), columns)));
        }
        let one = HalfInt::from_int(1);
        dims.iter()
            .filter_map(|(&k, &dim)| {
                let outgoing = rank_from.get(&k).copied().unwrap_or(0);
                let incoming = rank_from.get(&(k - one)).copied().unwrap_or(0);
                let h = dim - outgoing - incoming;
                (h > 0).then_some((k, h))
            })
            .collect()
    }
}

/// Number of independent cube coordinates of the symmetric model: one
/// per on-axis crossing plus one per off-axis pair. The equivariant
/// smoothings form a cube of this dimension.
pub fn sym_cube_dimension(d: &InvolutiveDiagram) -> usize {
    d.crossings
        .iter()
        .enumerate()
        .filter(|&(c, cr)| cr.is_on_axis() || d.tau_crossings[c] > c)
        .count()
}

/// Symmetric model of the second axis-weight page in quantum degree `j`
/// (empty if that degree carries no equivariant generators), using the
/// default crossing cap.
pub fn build_e2g_explicit(d: &InvolutiveDiagram, j: i32) -> Result<SymComplex, ComplexError> {
    build_e2g_explicit_limited(d, j, DEFAULT_MAX_CROSSINGS)
}

pub fn build_e2g_explicit_limited(
    d: &InvolutiveDiagram,
    j: i32,
    max_crossings: usize,
) -> Result<SymComplex, ComplexError> {
    Ok(build_e2g_explicit_all_limited(d, max_crossings)?
        .into_iter()
        .find(|sc| sc.j == j)
        .unwrap_or_else(|| SymComplex {
            j,
            generators: Vec::new(),
            k_of: Vec::new(),
            differential: SparseMatF2::zero(0, 0),
        }))
}

/// Symmetric models for every occupied quantum degree, ascending.
pub fn build_e2g_explicit_all(d: &InvolutiveDiagram) -> Result<Vec<SymComplex>, ComplexError> {
    build_e2g_explicit_all_limited(d, DEFAULT_MAX_CROSSINGS)
}

/// Builds the symmetric models directly from the diagram: generators are
/// the equivariant decorations of equivariant smoothings, and the
/// differential applies, for each equivariant way of flipping
/// 0-smoothings to 1-smoothings by one cube step — a single on-axis
/// flip, or both flips of an off-axis pair composed through the
/// intermediate smoothing — the corresponding circle surgeries, then
/// projects back onto the symmetric basis.
pub fn build_e2g_explicit_all_limited(
    d: &InvolutiveDiagram,
    max_crossings: usize,
) -> Result<Vec<SymComplex>, ComplexError> {
    let n = d.n_crossings();
    if n > max_crossings || n > 31 {
        return Err(ComplexError::SizeLimit {
            crossings: n,
            limit: max_crossings.min(31),
            smoothings: 1u128 << n,
        });
    }

    // The axis weight of an equivariant smoothing is its cube coordinate
    // sum plus a shift fixed by the crossing census; the coordinate sum
    // counts on-axis 1-smoothings and 1-smoothed off-axis pairs.
    let mut shift_twice = 0i32;
    for (c, cr) in d.crossings.iter().enumerate() {
        if cr.is_on_axis() {
            match d.onaxis_orientation_behavior(c).expect("crossing is on the axis") {
                OrientationBehavior::Reverses => {
                    if !cr.is_positive() {
                        shift_twice -= 2;
                    }
                }
                OrientationBehavior::Preserves => shift_twice -= 1,
            }
        } else if !cr.is_positive() {
            shift_twice -= 1;
        }
    }

    let equivariant: Vec<Smoothing> =
        Smoothing::enumerate(n).filter(|&s| d.is_equivariant(s)).collect();
    assert_eq!(equivariant.len(), 1 << sym_cube_dimension(d), "equivariant smoothings form a cube");

    // Resolutions of the equivariant smoothings (which include all
    // surgery targets) and of the intermediate one-flip smoothings the
    // pair surgeries pass through.
    let mut resolutions: HashMap<u32, Resolution> = HashMap::new();
    for &s in &equivariant {
        resolutions.entry(s.mask()).or_insert_with(|| d.resolve(s));
        for c in 0..n {
            if !s.bit(c) {
                let mid = s.flipped(c);
                resolutions.entry(mid.mask()).or_insert_with(|| d.resolve(mid));
            }
        }
    }

    let symmetric = |res: &Resolution, dec: u32| -> bool {
        let orbits = res
            .tau_on_circles
            .as_ref()
            .expect("equivariant smoothings carry a circle action");
        (0..res.n_circles()).all(|circ| (dec >> circ) & 1 == (dec >> orbits[circ] as usize) & 1)
    };

    let mut buckets: BTreeMap<i32, Vec<(SymGenerator, HalfInt)>> = BTreeMap::new();
    for &s in &equivariant {
        let res = &resolutions[&s.mask()];
        let k = k_weight(d, s);
        let mut coordinate_sum = 0i32;
        for (c, cr) in d.crossings.iter().enumerate() {
            if s.bit(c) && (cr.is_on_axis() || d.tau_crossings[c] > c) {
                coordinate_sum += 1;
            }
        }
        assert_eq!(
            k.twice(),
            2 * coordinate_sum + shift_twice,
            "axis weight must agree with the cube-coordinate formula",
        );
        for decoration in 0u32..1 << res.n_circles() {
            if symmetric(res, decoration) {
                let j = j_grading(d, &Generator { smoothing: s, decoration });
                buckets
                    .entry(j)
                    .or_default()
                    .push((SymGenerator { smoothing: s, decoration }, k));
            }
        }
    }

    let mut out = Vec::new();
    for (j, gens) in buckets {
        let index: HashMap<(u32, u32), usize> = gens
            .iter()
            .enumerate()
            .map(|(i, (g, _))| ((g.smoothing.mask(), g.decoration), i))
            .collect();
        let mut columns = Vec::with_capacity(gens.len());
        for (g, k) in &gens {
            let s = g.smoothing;
            let res_s = &resolutions[&s.mask()];
            // XOR-accumulate image generators across all cube steps.
            let mut image: BTreeSet<(u32, u32)> = BTreeSet::new();
            let toggle = |image: &mut BTreeSet<(u32, u32)>, key: (u32, u32)| {
                if !image.insert(key) {
                    image.remove(&key);
                }
            };
            for c in 0..n {
                if s.bit(c) {
                    continue;
                }
                if d.crossings[c].is_on_axis() {
                    let t = s.flipped(c);
                    let res_t = &resolutions[&t.mask()];
                    for dec in surgery_targets(d, res_s, res_t, c, s, t, g.decoration) {
                        toggle(&mut image, (t.mask(), dec));
                    }
                } else {
                    let partner = d.tau_crossings[c];
                    if partner < c {
                        continue;
                    }
                    let mid = s.flipped(c);
                    let t = mid.flipped(partner);
                    let res_mid = &resolutions[&mid.mask()];
                    let res_t = &resolutions[&t.mask()];
                    for dec_mid in surgery_targets(d, res_s, res_mid, c, s, mid, g.decoration) {
                        for dec in surgery_targets(d, res_mid, res_t, partner, mid, t, dec_mid) {
                            toggle(&mut image, (t.mask(), dec));
                        }
                    }
                }
            }
            let mut support: Vec<u32> = Vec::new();
            for (mask, dec) in image {
                if !symmetric(&resolutions[&mask], dec) {
                    continue;
                }
                let target =
                    *index.get(&(mask, dec)).expect("surgery image left its quantum degree");
                assert_eq!(
                    (gens[target].1 - *k).twice(),
                    2,
                    "symmetric differential entries must raise the weight by exactly 1",
                );
                support.push(target as u32);
            }
            support.sort_unstable();
            columns.push(SparseVecF2::from_support(support));
        }
        let differential = SparseMatF2::from_columns(gens.len(), columns);
        assert!(
            differential.compose(&differential).is_zero(),
            "symmetric differential must square to zero",
        );
        let (generators, k_of): (Vec<SymGenerator>, Vec<HalfInt>) = gens.into_iter().unzip();
        out.push(SymComplex { j, generators, k_of, differential });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::build_complex;
    use crate::diagram::parse_diagram;
    use crate::homology::reduced_complex;
    use std::path::PathBuf;

    const UNKNOT: &str = "ikd 1\nedges 1\nbasepoint 0\n";

    const HOPF: &str = "\
ikd 1
edges 4
crossing 0 + 2,0,1,3 off:1
crossing 1 + 0,2,3,1 off:0
basepoint 0
";

    const TREFOIL: &str = "\
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

    const ALL_FIXTURES: [&str; 17] = [
        "unknot.ikd",
        "unknot_r1.ikd",
        "hopf.ikd",
        "hopf_r2.ikd",
        "trefoil.ikd",
        "trefoil_ir1.ikd",
        "trefoil_ir2.ikd",
        "trefoil_m2.ikd",
        "fig8_a.ikd",
        "fig8_b.ikd",
        "t25.ikd",
        "t27.ikd",
        "t34.ikd",
        "t34_ir3.ikd",
        "t34_m1.ikd",
        "mutant_k.ikd",
        "mutant_kmu.ikd",
    ];

    fn fixture(file: &str) -> String {
        let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(file);
        std::fs::read_to_string(path).unwrap()
    }

    fn pieces(text: &str) -> (crate::diagram::InvolutiveDiagram, Vec<GradedComplex>) {
        let d = parse_diagram(text).unwrap();
        let cs = build_complex(&d).unwrap();
        (d, cs)
    }

    fn ik(i: i32) -> HalfInt {
        HalfInt::from_int(i)
    }

    fn dims(entries: &[(HalfInt, usize)]) -> BTreeMap<HalfInt, usize> {
        entries.iter().copied().collect()
    }

    #[test]
    fn zero_differential_pages_never_move() {
        let fc = FilteredComplex {
            differential: SparseMatF2::zero(3, 3),
            level_of: vec![ik(0), ik(1), ik(5)],
            direction: Direction::Increasing,
            step: HalfInt::from_int(1),
            leading_degree: 1,
        };
        let expected = dims(&[(ik(0), 1), (ik(1), 1), (ik(5), 1)]);
        for page in pages(&fc, 5) {
            assert_eq!(page.dims, expected);
            assert!(page.differential.is_zero());
        }
        assert_eq!(infinity_dims(&fc), expected);
    }

    #[test]
    fn single_arrow_cancels_on_page_two() {
        // Two generators at levels 0 and 1 joined by one leading-degree
        // arrow: page 1 sees both, page 2 nothing.
        let differential = SparseMatF2::from_columns(
            2,
            vec![SparseVecF2::from_support(vec![1]), SparseVecF2::zero()],
        );
        let fc = FilteredComplex {
            differential,
            level_of: vec![ik(0), ik(1)],
            direction: Direction::Increasing,
            step: HalfInt::from_int(1),
            leading_degree: 1,
        };
        let ps = pages(&fc, 2);
        assert_eq!(ps[0].dims, dims(&[(ik(0), 1), (ik(1), 1)]));
        assert!(ps[1].dims.is_empty());
        assert!(infinity_dims(&fc).is_empty());
    }

    #[test]
    #[should_panic(expected = "moves against the filtration")]
    fn backwards_arrow_is_rejected() {
        let differential = SparseMatF2::from_columns(
            2,
            vec![SparseVecF2::from_support(vec![1]), SparseVecF2::zero()],
        );
        let fc = FilteredComplex {
            differential,
            level_of: vec![ik(1), ik(0)],
            direction: Direction::Increasing,
            step: HalfInt::from_int(1),
            leading_degree: 1,
        };
        fc.validate();
    }

    #[test]
    fn hopf_homological_pages_match_standard_cohomology() {
        let (_, cs) = pieces(HOPF);
        let expected: BTreeMap<i32, (i32, usize)> =
            [(0, (0, 1)), (2, (0, 1)), (4, (2, 1)), (6, (2, 1))].into_iter().collect();
        assert_eq!(cs.len(), 4);
        for c in &cs {
            let (i, dim) = expected[&c.j];
            let want = dims(&[(ik(i), dim)]);
            let ps = f_pages(c, 3);
            assert_eq!(ps[1].dims, want, "page 2 at j={}", c.j);
            assert_eq!(ps[2].dims, want, "page 3 at j={}", c.j);
            assert_eq!(infinity_dims(&FilteredComplex::homological(c)), want);
        }
    }

    #[test]
    fn hopf_axis_pages_lose_dimension() {
        let (_, cs) = pieces(HOPF);
        let half = HalfInt::from_twice(1);
        let e2: BTreeMap<i32, Vec<(HalfInt, usize)>> = [
            (0, vec![(ik(0), 1)]),
            (2, vec![(ik(0), 2), (ik(1), 1)]),
            (4, vec![(ik(0), 1), (ik(1), 2)]),
            (6, vec![(ik(1), 1)]),
        ]
        .into_iter()
        .collect();
        let e3: BTreeMap<i32, Vec<(HalfInt, usize)>> = [
            (0, vec![(ik(0), 1)]),
            (2, vec![(ik(0), 1)]),
            (4, vec![(ik(1), 1)]),
            (6, vec![(ik(1), 1)]),
        ]
        .into_iter()
        .collect();
        let mut total2 = 0;
        let mut total3 = 0;
        for c in &cs {
            let ps = g_pages(c, 3);
            assert_eq!((ps[0].n, ps[1].n), (2, 3));
            assert_eq!(ps[0].dims, dims(&e2[&c.j]), "page 2 at j={}", c.j);
            assert_eq!(ps[1].dims, dims(&e3[&c.j]), "page 3 at j={}", c.j);
            assert!(!ps[0].dims.contains_key(&half), "weights stay integral");
            total2 += ps[0].total_dim();
            total3 += ps[1].total_dim();
        }
        assert_eq!((total2, total3), (8, 4));
        assert!(total3 < total2, "the induced differential is nonzero");
    }

    #[test]
    fn trefoil_axis_pages_unreduced_and_reduced() {
        let (d, cs) = pieces(TREFOIL);
        let unreduced: usize = cs.iter().map(|c| g_pages(c, 3)[1].total_dim()).sum();
        assert_eq!(unreduced, 6);
        let reduced: usize = reduced_complex(&d)
            .unwrap()
            .iter()
            .map(|pair| g_pages(&pair.sub, 3)[1].total_dim())
            .sum();
        assert_eq!(reduced, 3);
    }

    #[test]
    fn deep_pages_reach_the_stable_page() {
        let (_, cs) = pieces(TREFOIL);
        for c in &cs {
            for kind in [FiltrationKind::F, FiltrationKind::G] {
                let fc = FilteredComplex::for_kind(c, kind);
                // The level span is at most 4, so 9 rounds exhaust every
                // possible entry degree.
                assert_eq!(pages(&fc, 10).last().unwrap().dims, infinity_dims(&fc));
            }
        }
    }

    #[test]
    fn explicit_model_census_and_cube() {
        let (d, cs) = pieces(TREFOIL);
        assert_eq!(sym_cube_dimension(&d), 2);
        let all = build_e2g_explicit_all(&d).unwrap();
        let total: usize = all.iter().map(|sc| sc.dim()).sum();
        let tau_fixed: usize = cs
            .iter()
            .map(|c| c.tau_perm.iter().enumerate().filter(|&(g, &t)| t as usize == g).count())
            .sum();
        assert_eq!(total, tau_fixed);

        let (dh, _) = pieces(HOPF);
        assert_eq!(sym_cube_dimension(&dh), 1);
        let allh = build_e2g_explicit_all(&dh).unwrap();
        let by_j: Vec<(i32, usize)> = allh.iter().map(|sc| (sc.j, sc.dim())).collect();
        assert_eq!(by_j, vec![(0, 1), (2, 3), (4, 3), (6, 1)]);

        match build_e2g_explicit_limited(&d, 2, 2) {
            Err(ComplexError::SizeLimit { crossings, limit, smoothings }) => {
                assert_eq!((crossings, limit, smoothings), (3, 2, 8));
            }
            other => panic!("expected size-limit error, got {other:?}"),
        }
    }

    #[test]
    fn explicit_model_matches_engine_pages() {
        for file in ALL_FIXTURES {
            let d = parse_diagram(&fixture(file)).unwrap();
            if d.n_crossings() > 8 {
                continue;
            }
            let cs = build_complex(&d).unwrap();
            let explicit: BTreeMap<i32, SymComplex> =
                build_e2g_explicit_all(&d).unwrap().into_iter().map(|sc| (sc.j, sc)).collect();
            for c in &cs {
                let ps = g_pages(c, 3);
                let (e2, e3) = match explicit.get(&c.j) {
                    Some(sc) => (sc.dims_by_k(), sc.cohomology_by_k()),
                    None => (BTreeMap::new(), BTreeMap::new()),
                };
                assert_eq!(ps[0].dims, e2, "{file}: page 2 at j={}", c.j);
                assert_eq!(ps[1].dims, e3, "{file}: page 3 at j={}", c.j);
            }
        }
    }

    #[test]
    fn stable_pages_agree_with_the_cohomology_filtration() {
        for file in ALL_FIXTURES {
            let d = parse_diagram(&fixture(file)).unwrap();
            for c in build_complex(&d).unwrap() {
                let report = e_infinity_check_both(&c);
                assert!(report.passed(), "{file} j={}: {:?}", c.j, report.mismatches);
            }
        }
        for text in [UNKNOT, HOPF, TREFOIL] {
            let (_, cs) = pieces(text);
            for c in &cs {
                assert!(e_infinity_check_both(c).passed());
            }
        }
    }

    #[test]
    fn thin_degrees_admit_no_level_preserving_differential() {
        for file in ALL_FIXTURES {
            let d = parse_diagram(&fixture(file)).unwrap();
            for c in build_complex(&d).unwrap() {
                let offending = vanishing_check(&c);
                assert!(offending.is_empty(), "{file} j={}: {offending:?}", c.j);
            }
        }
    }

    #[test]
    fn strongly_invertible_axis_weights_are_integral() {
        for file in ALL_FIXTURES {
            let d = parse_diagram(&fixture(file)).unwrap();
            if !d.is_strongly_invertible() {
                continue;
            }
            for c in build_complex(&d).unwrap() {
                for page in g_pages(&c, 3) {
                    assert!(
                        page.dims.keys().all(|k| k.is_integral()),
                        "{file} j={}: non-integral weight on page {}",
                        c.j,
                        page.n,
                    );
                }
            }
        }
    }
}
