//! The perturbed cube complex of an involutive diagram.
//!
//! Generators are decorations of smoothings: every circle of a resolved
//! diagram carries a label v₊ or v₋. The complex splits along the quantum
//! grading j; within each piece the differential is ∂ = d + d_τ, where d
//! is the usual cube differential assembled from merge/split maps of the
//! rank-2 Frobenius algebra over GF(2) (m: v₊v₊ ↦ v₊, mixed ↦ v₋,
//! v₋v₋ ↦ 0; Δ: v₊ ↦ v₊v₋ + v₋v₊, v₋ ↦ v₋v₋) and d_τ = id + τ uses the
//! permutation the diagram symmetry induces on generators.
//!
//! Three gradings live on the complex: the homological grading
//! i = r − n₋ (r = number of 1-smoothings), the quantum grading
//! j = i + (#v₊ − #v₋) + n₊ − n₋, and a half-integer axis grading k
//! attached to each smoothing by summing local crossing weights
//! ([`k_weight`]). d raises i by exactly one and k by ½ or 1 per cube
//! edge; d_τ preserves all three gradings.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub};

use thiserror::Error;

use crate::diagram::{InvolutiveDiagram, OrientationBehavior, Resolution, Smoothing};
use crate::f2linalg::{SparseMatF2, SparseVecF2};

/// Exact half-integer arithmetic (stored as twice the value).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct HalfInt {
    twice: i32,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };

    pub fn from_int(n: i32) -> Self {
        HalfInt { twice: 2 * n }
    }

    pub fn from_twice(twice: i32) -> Self {
        HalfInt { twice }
    }

    pub fn half() -> Self {
        HalfInt { twice: 1 }
    }

    pub fn twice(self) -> i32 {
        self.twice
    }

    pub fn is_integral(self) -> bool {
        self.twice % 2 == 0
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt { twice: self.twice + rhs.twice }
    }
}

impl AddAssign for HalfInt {
    fn add_assign(&mut self, rhs: HalfInt) {
        self.twice += rhs.twice;
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt { twice: self.twice - rhs.twice }
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt { twice: -self.twice }
    }
}

impl Sum for HalfInt {
    fn sum<I: Iterator<Item = HalfInt>>(iter: I) -> HalfInt {
        iter.fold(HalfInt::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

/// A basis element: a smoothing together with one decoration bit per
/// circle of its resolution (bit set = v₊).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Generator {
    pub smoothing: Smoothing,
    pub decoration: u32,
}

/// Errors from complex construction.
#[derive(Debug, Error)]
pub enum ComplexError {
    #[error(
        "diagram has {crossings} crossings (limit {limit}); the cube would \
         hold {smoothings} smoothings"
    )]
    SizeLimit { crossings: usize, limit: usize, smoothings: u128 },
}

/// Default crossing-count cap for complex construction.
pub const DEFAULT_MAX_CROSSINGS: usize = 14;

/// One quantum-degree piece of the perturbed complex.
#[derive(Debug, Clone)]
pub struct GradedComplex {
    /// Quantum degree of every generator (before `j_shift`).
    pub j: i32,
    /// Emission-time shift of j, used by reduced complexes; 0 otherwise.
    pub j_shift: i32,
    /// Basis, in smoothing-major binary order with decorations ascending.
    pub generators: Vec<Generator>,
    /// Cube differential (degree +1 in i).
    pub d: SparseMatF2,
    /// Perturbation id + τ (degree 0 in all gradings).
    pub d_tau: SparseMatF2,
    pub i_of: Vec<i32>,
    pub k_of: Vec<HalfInt>,
    /// Generator permutation induced by the diagram symmetry.
    pub tau_perm: Vec<u32>,
}

impl GradedComplex {
    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    /// The full differential ∂ = d + d_τ.
    pub fn total_differential(&self) -> SparseMatF2 {
        self.d.add(&self.d_tau)
    }

    /// Index of a generator in this piece, if present.
    pub fn index_of(&self, g: &Generator) -> Option<usize> {
        self.generators
            .binary_search_by_key(&(g.smoothing.mask(), g.decoration), |h| {
                (h.smoothing.mask(), h.decoration)
            })
            .ok()
    }

    /// Applies the symmetry permutation to a cochain.
    pub fn apply_tau(&self, v: &SparseVecF2) -> SparseVecF2 {
        SparseVecF2::from_indices(v.support().iter().map(|&i| self.tau_perm[i as usize]))
    }
}

/// Local axis weight of a smoothing: each crossing contributes according
/// to its axis class, sign, and whether its chosen smoothing respects the
/// strand orientations.
pub fn k_weight(d: &InvolutiveDiagram, s: Smoothing) -> HalfInt {
    let mut twice = 0i32;
    for (c, cr) in d.crossings.iter().enumerate() {
        let oriented = s.bit(c) == (cr.sign < 0);
        let positive = cr.is_positive();
        twice += if !cr.is_on_axis() {
            match (oriented, positive) {
                (true, _) => 0,
                (false, true) => 1,
                (false, false) => -1,
            }
        } else {
            match d.onaxis_orientation_behavior(c).expect("on-axis crossing") {
                OrientationBehavior::Reverses => match (oriented, positive) {
                    (true, _) => 0,
                    (false, true) => 2,
                    (false, false) => -2,
                },
                OrientationBehavior::Preserves => match (oriented, positive) {
                    (true, true) => -1,
                    (false, true) => 1,
                    (true, false) => 1,
                    (false, false) => -1,
                },
            }
        };
    }
    HalfInt::from_twice(twice)
}

/// The generator image under the diagram symmetry: the smoothing maps by
/// the crossing permutation and each circle label follows its circle.
fn tau_generator(d: &InvolutiveDiagram, resolutions: &[Resolution], g: Generator) -> Generator {
    let ts = d.tau_smoothing(g.smoothing);
    let res_s = &resolutions[g.smoothing.mask() as usize];
    let res_ts = &resolutions[ts.mask() as usize];
    let mut decoration = 0u32;
    for (x, circle) in res_s.circles.iter().enumerate() {
        if g.decoration >> x & 1 == 1 {
            let image = res_ts.circle_of(d.tau_edges[circle[0] as usize]);
            decoration |= 1 << image;
        }
    }
    Generator { smoothing: ts, decoration }
}

/// Homological degree of a generator: number of 1-smoothings minus the
/// number of negative crossings.
pub fn i_grading(d: &InvolutiveDiagram, g: &Generator) -> i32 {
    g.smoothing.weight() as i32 - d.crossing_census().n_negative() as i32
}

/// Quantum degree of a generator: i + (#v₊ − #v₋) + n₊ − n₋.
pub fn j_grading(d: &InvolutiveDiagram, g: &Generator) -> i32 {
    let census = d.crossing_census();
    let circles = d.resolve(g.smoothing).n_circles() as i32;
    let v_plus = g.decoration.count_ones() as i32;
    i_grading(d, g) + 2 * v_plus - circles + census.n_positive() as i32
        - census.n_negative() as i32
}

/// Decorations produced by flipping crossing `c` of `g.smoothing` from 0
/// to 1: one merge image, or the one/two split images.
pub(crate) fn surgery_targets(
    d: &InvolutiveDiagram,
    res_s: &Resolution,
    res_t: &Resolution,
    c: usize,
    s: Smoothing,
    t: Smoothing,
    decoration: u32,
) -> Vec<u32> {
    let cr = &d.crossings[c];
    let pairs_s = cr.smoothing_slot_pairs(s.bit(c));
    let a = res_s.circle_of(cr.tuple[pairs_s[0].0]);
    let b = res_s.circle_of(cr.tuple[pairs_s[1].0]);

    // Labels of circles untouched by the surgery carry over.
    let mut base = 0u32;
    for (x, circle) in res_s.circles.iter().enumerate() {
        if x != a && x != b && decoration >> x & 1 == 1 {
            base |= 1 << res_t.circle_of(circle[0]);
        }
    }

    if a != b {
        // Merge: both circles land on one circle of t.
        let m = res_t.circle_of(res_s.circles[a][0]);
        debug_assert_eq!(m, res_t.circle_of(res_s.circles[b][0]));
        let va = decoration >> a & 1 == 1;
        let vb = decoration >> b & 1 == 1;
        match (va, vb) {
            (true, true) => vec![base | 1 << m],
            (true, false) | (false, true) => vec![base],
            (false, false) => vec![],
        }
    } else {
        // Split: circle a becomes the two t-circles through the crossing.
        let pairs_t = cr.smoothing_slot_pairs(t.bit(c));
        let m1 = res_t.circle_of(cr.tuple[pairs_t[0].0]);
        let m2 = res_t.circle_of(cr.tuple[pairs_t[1].0]);
        debug_assert_ne!(m1, m2);
        if decoration >> a & 1 == 1 {
            vec![base | 1 << m1, base | 1 << m2]
        } else {
            vec![base]
        }
    }
}

/// Builds the perturbed complex, one piece per occupied quantum degree,
/// using the default crossing cap.
pub fn build_complex(d: &InvolutiveDiagram) -> Result<Vec<GradedComplex>, ComplexError> {
    build_complex_limited(d, DEFAULT_MAX_CROSSINGS)
}

/// Builds the perturbed complex with an explicit crossing cap.
pub fn build_complex_limited(
    d: &InvolutiveDiagram,
    max_crossings: usize,
) -> Result<Vec<GradedComplex>, ComplexError> {
    let n = d.n_crossings();
    if n > max_crossings || n > 31 {
        return Err(ComplexError::SizeLimit {
            crossings: n,
            limit: max_crossings.min(31),
            smoothings: 1u128 << n,
        });
    }
    let census = d.crossing_census();
    let (n_plus, n_minus) = (census.n_positive() as i32, census.n_negative() as i32);
    let resolutions: Vec<Resolution> = Smoothing::enumerate(n).map(|s| d.resolve(s)).collect();
    let weights: Vec<HalfInt> = Smoothing::enumerate(n).map(|s| k_weight(d, s)).collect();

    let mut buckets: BTreeMap<i32, Vec<Generator>> = BTreeMap::new();
    for s in Smoothing::enumerate(n) {
        let circles = resolutions[s.mask() as usize].n_circles();
        assert!(circles < 31, "too many circles for a packed decoration");
        let i = s.weight() as i32 - n_minus;
        for decoration in 0u32..1 << circles {
            let v_plus = decoration.count_ones() as i32;
            let j = i + 2 * v_plus - circles as i32 + n_plus - n_minus;
            buckets.entry(j).or_default().push(Generator { smoothing: s, decoration });
        }
    }

    let mut out = Vec::new();
    for (j, generators) in buckets {
        let index: HashMap<(u32, u32), u32> = generators
            .iter()
            .enumerate()
            .map(|(i, g)| ((g.smoothing.mask(), g.decoration), i as u32))
            .collect();
        let i_of: Vec<i32> = generators
            .iter()
            .map(|g| g.smoothing.weight() as i32 - n_minus)
            .collect();
        let k_of: Vec<HalfInt> =
            generators.iter().map(|g| weights[g.smoothing.mask() as usize]).collect();

        let mut d_cols = Vec::with_capacity(generators.len());
        let mut tau_perm = Vec::with_capacity(generators.len());
        for (src, g) in generators.iter().enumerate() {
            let s = g.smoothing;
            let res_s = &resolutions[s.mask() as usize];
            let mut support: Vec<u32> = Vec::new();
            for c in 0..n {
                if s.bit(c) {
                    continue;
                }
                let t = s.flipped(c);
                let res_t = &resolutions[t.mask() as usize];
                let step = weights[t.mask() as usize] - weights[s.mask() as usize];
                debug_assert!(
                    step == HalfInt::half() || step == HalfInt::from_int(1),
                    "cube edge must raise the axis weight by 1/2 or 1"
                );
                for dec in surgery_targets(d, res_s, res_t, c, s, t, g.decoration) {
                    let tgt = *index
                        .get(&(t.mask(), dec))
                        .expect("cube edge left its quantum degree");
                    debug_assert_eq!(i_of[tgt as usize], i_of[src] + 1);
                    support.push(tgt);
                }
            }
            support.sort_unstable();
            debug_assert!(support.windows(2).all(|w| w[0] < w[1]));
            d_cols.push(SparseVecF2::from_support(support));

            let tg = tau_generator(d, &resolutions, *g);
            let t_idx = *index
                .get(&(tg.smoothing.mask(), tg.decoration))
                .expect("symmetry left the quantum degree");
            debug_assert_eq!(i_of[t_idx as usize], i_of[src]);
            debug_assert_eq!(k_of[t_idx as usize], k_of[src]);
            tau_perm.push(t_idx);
        }

        let dim = generators.len();
        let d_mat = SparseMatF2::from_columns(dim, d_cols);
        let tau_cols: Vec<SparseVecF2> = tau_perm
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                if t as usize == i {
                    SparseVecF2::zero()
                } else {
                    SparseVecF2::from_indices([i as u32, t])
                }
            })
            .collect();
        let d_tau = SparseMatF2::from_columns(dim, tau_cols);
        out.push(GradedComplex {
            j,
            j_shift: 0,
            generators,
            d: d_mat,
            d_tau,
            i_of,
            k_of,
            tau_perm,
        });
    }
    Ok(out)
}
