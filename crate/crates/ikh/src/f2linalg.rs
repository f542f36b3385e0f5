//! Linear algebra over the two-element field GF(2).
//!
//! Two vector representations are used, with lossless conversion between
//! them:
//!
//! * [`SparseVecF2`] — a sorted, strictly increasing list of the indices
//!   carrying a 1. Suits the very sparse differentials of cube complexes
//!   and keeps all set arithmetic exact and deterministic.
//! * [`DenseVecF2`] — bits packed into 64-bit words. Suits the elimination
//!   kernels ([`rank`], [`kernel_basis`]) where whole-row XOR dominates.
//!
//! A [`Subspace`] stores a basis in reduced row echelon form (RREF): pivot
//! indices strictly increase across the basis and each pivot column is
//! cleared in every other basis vector. This makes membership testing,
//! sums, intersections and quotient dimensions canonical and
//! order-independent.
//!
//! [`MatrixComplex`] supports Gauss elimination of a single differential
//! entry (delooping-style reduction): eliminating an entry `∂(x) ∋ y`
//! removes the pair `{x, y}` and corrects the remaining differential so
//! that its cohomology is unchanged.

use std::collections::BTreeSet;
use std::fmt;

/// A vector over GF(2), stored as the sorted list of indices with a 1.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct SparseVecF2 {
    support: Vec<u32>,
}

impl SparseVecF2 {
    /// The zero vector.
    pub fn zero() -> Self {
        SparseVecF2 { support: Vec::new() }
    }

    /// Builds a vector from its support. Panics unless the indices are
    /// strictly increasing.
    pub fn from_support(support: Vec<u32>) -> Self {
        assert!(
            support.windows(2).all(|w| w[0] < w[1]),
            "support must be sorted and strictly increasing"
        );
        SparseVecF2 { support }
    }

    /// Builds a vector from indices in any order; repeated indices cancel
    /// in pairs (XOR semantics).
    pub fn from_indices<I: IntoIterator<Item = u32>>(indices: I) -> Self {
        let mut v: Vec<u32> = indices.into_iter().collect();
        v.sort_unstable();
        let mut support = Vec::with_capacity(v.len());
        let mut it = v.into_iter().peekable();
        while let Some(i) = it.next() {
            if it.peek() == Some(&i) {
                it.next();
            } else {
                support.push(i);
            }
        }
        SparseVecF2 { support }
    }

    /// The basis vector `e_i`.
    pub fn singleton(i: u32) -> Self {
        SparseVecF2 { support: vec![i] }
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    /// Number of nonzero coordinates.
    pub fn weight(&self) -> usize {
        self.support.len()
    }

    /// The sorted support.
    pub fn support(&self) -> &[u32] {
        &self.support
    }

    pub fn contains(&self, i: u32) -> bool {
        self.support.binary_search(&i).is_ok()
    }

    /// Lowest index with a 1 (the pivot position), if any.
    pub fn min_index(&self) -> Option<u32> {
        self.support.first().copied()
    }

    /// Sum (= difference) of two vectors: symmetric difference of supports.
    pub fn add(&self, other: &SparseVecF2) -> SparseVecF2 {
        let mut support = Vec::with_capacity(self.support.len() + other.support.len());
        let (mut a, mut b) = (self.support.iter().peekable(), other.support.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&x), Some(&&y)) if x == y => {
                    a.next();
                    b.next();
                }
                (Some(&&x), Some(&&y)) if x < y => {
                    support.push(x);
                    a.next();
                }
                (Some(_), Some(_)) => {
                    support.push(*b.next().unwrap());
                }
                (Some(_), None) => support.push(*a.next().unwrap()),
                (None, Some(_)) => support.push(*b.next().unwrap()),
                (None, None) => break,
            }
        }
        SparseVecF2 { support }
    }

    pub fn add_assign(&mut self, other: &SparseVecF2) {
        *self = self.add(other);
    }

    /// Packs into words; indices must be `< nbits`.
    pub fn to_dense(&self, nbits: usize) -> DenseVecF2 {
        let mut d = DenseVecF2::zero(nbits);
        for &i in &self.support {
            d.set(i as usize);
        }
        d
    }
}

impl fmt::Debug for SparseVecF2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SparseVecF2{:?}", self.support)
    }
}

/// A vector over GF(2) packed into 64-bit words.
#[derive(Clone, PartialEq, Eq)]
pub struct DenseVecF2 {
    nbits: usize,
    words: Vec<u64>,
}

impl DenseVecF2 {
    pub fn zero(nbits: usize) -> Self {
        DenseVecF2 { nbits, words: vec![0; nbits.div_ceil(64)] }
    }

    pub fn nbits(&self) -> usize {
        self.nbits
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.nbits);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize) {
        assert!(i < self.nbits);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor_assign(&mut self, other: &DenseVecF2) {
        assert_eq!(self.nbits, other.nbits, "dimension mismatch");
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w ^= o;
        }
    }

    /// Lowest set bit, if any.
    pub fn first_one(&self) -> Option<usize> {
        for (wi, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(wi * 64 + w.trailing_zeros() as usize);
            }
        }
        None
    }

    /// Unpacks back to the sorted-support form.
    pub fn to_sparse(&self) -> SparseVecF2 {
        let mut support = Vec::new();
        for (wi, &w) in self.words.iter().enumerate() {
            let mut bits = w;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                support.push((wi * 64 + b) as u32);
                bits &= bits - 1;
            }
        }
        SparseVecF2 { support }
    }
}

impl fmt::Debug for DenseVecF2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseVecF2[{}; {:?}]", self.nbits, self.to_sparse().support())
    }
}

/// A matrix over GF(2), stored column-major as sparse columns.
///
/// The row count is declared explicitly; every index appearing in a column
/// must be smaller than it.
#[derive(Clone, PartialEq, Eq)]
pub struct SparseMatF2 {
    nrows: usize,
    columns: Vec<SparseVecF2>,
}

impl SparseMatF2 {
    /// The zero matrix of the given shape.
    pub fn zero(nrows: usize, ncols: usize) -> Self {
        SparseMatF2 { nrows, columns: vec![SparseVecF2::zero(); ncols] }
    }

    pub fn from_columns(nrows: usize, columns: Vec<SparseVecF2>) -> Self {
        for col in &columns {
            if let Some(&max) = col.support().last() {
                assert!((max as usize) < nrows, "column index {max} out of {nrows} rows");
            }
        }
        SparseMatF2 { nrows, columns }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, c: usize) -> &SparseVecF2 {
        &self.columns[c]
    }

    pub fn columns(&self) -> &[SparseVecF2] {
        &self.columns
    }

    pub fn set_column(&mut self, c: usize, col: SparseVecF2) {
        if let Some(&max) = col.support().last() {
            assert!((max as usize) < self.nrows);
        }
        self.columns[c] = col;
    }

    pub fn entry(&self, r: usize, c: usize) -> bool {
        self.columns[c].contains(r as u32)
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(|c| c.is_zero())
    }

    /// Matrix–vector product; `v` holds coordinates indexing the columns.
    pub fn apply(&self, v: &SparseVecF2) -> SparseVecF2 {
        let mut out = SparseVecF2::zero();
        for &c in v.support() {
            out.add_assign(&self.columns[c as usize]);
        }
        out
    }

    /// Matrix product `self ∘ other`.
    pub fn compose(&self, other: &SparseMatF2) -> SparseMatF2 {
        assert_eq!(self.ncols(), other.nrows(), "dimension mismatch");
        let columns = other.columns.iter().map(|c| self.apply(c)).collect();
        SparseMatF2 { nrows: self.nrows, columns }
    }

    /// Entrywise sum.
    pub fn add(&self, other: &SparseMatF2) -> SparseMatF2 {
        assert_eq!(self.nrows, other.nrows, "dimension mismatch");
        assert_eq!(self.ncols(), other.ncols(), "dimension mismatch");
        let columns =
            self.columns.iter().zip(&other.columns).map(|(a, b)| a.add(b)).collect();
        SparseMatF2 { nrows: self.nrows, columns }
    }

    pub fn transpose(&self) -> SparseMatF2 {
        let mut columns = vec![SparseVecF2::zero(); self.nrows];
        let mut supports: Vec<Vec<u32>> = vec![Vec::new(); self.nrows];
        for (c, col) in self.columns.iter().enumerate() {
            for &r in col.support() {
                supports[r as usize].push(c as u32);
            }
        }
        for (r, support) in supports.into_iter().enumerate() {
            columns[r] = SparseVecF2 { support };
        }
        SparseMatF2 { nrows: self.ncols(), columns }
    }
}

impl fmt::Debug for SparseMatF2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SparseMatF2 {}x{} [", self.nrows, self.ncols())?;
        for (c, col) in self.columns.iter().enumerate() {
            writeln!(f, "  col {c}: {:?}", col.support())?;
        }
        write!(f, "]")
    }
}

/// Echelon state shared by the dense elimination kernels: reduced columns
/// together with the coordinates expressing them in the original columns.
struct Elimination {
    /// Reduced nonzero columns, each tagged with its pivot (lowest set bit).
    reduced: Vec<(usize, DenseVecF2, DenseVecF2)>,
    /// Kernel combinations discovered (in original column coordinates).
    kernel: Vec<DenseVecF2>,
}

fn eliminate_columns(m: &SparseMatF2) -> Elimination {
    let mut state = Elimination { reduced: Vec::new(), kernel: Vec::new() };
    for (j, col) in m.columns.iter().enumerate() {
        let mut v = col.to_dense(m.nrows);
        let mut comb = DenseVecF2::zero(m.ncols());
        comb.set(j);
        loop {
            let Some(p) = v.first_one() else {
                state.kernel.push(comb);
                break;
            };
            match state.reduced.iter().find(|(piv, _, _)| *piv == p) {
                Some((_, basis, basis_comb)) => {
                    // Clone to appease the borrow checker; vectors are small.
                    let (b, bc) = (basis.clone(), basis_comb.clone());
                    v.xor_assign(&b);
                    comb.xor_assign(&bc);
                }
                None => {
                    state.reduced.push((p, v, comb));
                    break;
                }
            }
        }
    }
    state
}

/// Rank of a matrix.
pub fn rank(m: &SparseMatF2) -> usize {
    eliminate_columns(m).reduced.len()
}

/// A basis of `{x : Mx = 0}`, in deterministic order.
pub fn kernel_basis(m: &SparseMatF2) -> Vec<SparseVecF2> {
    eliminate_columns(m).kernel.iter().map(DenseVecF2::to_sparse).collect()
}

/// The column space of a matrix, as a [`Subspace`] in RREF.
pub fn image_basis(m: &SparseMatF2) -> Subspace {
    let mut s = Subspace::zero(m.nrows);
    for col in &m.columns {
        s.insert(col.clone());
    }
    s
}

/// A subspace of GF(2)^ambient with an RREF basis: pivots strictly
/// increasing, every pivot index cleared in the other basis vectors.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<SparseVecF2>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace { ambient, basis: Vec::new() }
    }

    /// The full space, with the standard basis.
    pub fn full(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: (0..ambient as u32).map(SparseVecF2::singleton).collect(),
        }
    }

    pub fn from_vectors<I: IntoIterator<Item = SparseVecF2>>(ambient: usize, vecs: I) -> Self {
        let mut s = Subspace::zero(ambient);
        for v in vecs {
            s.insert(v);
        }
        s
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// The RREF basis, ordered by increasing pivot.
    pub fn basis(&self) -> &[SparseVecF2] {
        &self.basis
    }

    pub fn pivots(&self) -> Vec<u32> {
        self.basis.iter().map(|b| b.min_index().unwrap()).collect()
    }

    /// Canonical remainder of `v` modulo the subspace; zero iff `v` lies in
    /// the subspace.
    pub fn reduce(&self, v: &SparseVecF2) -> SparseVecF2 {
        let mut v = v.clone();
        for b in &self.basis {
            let p = b.min_index().unwrap();
            if v.contains(p) {
                v.add_assign(b);
            }
        }
        v
    }

    pub fn contains(&self, v: &SparseVecF2) -> bool {
        self.reduce(v).is_zero()
    }

    /// Adjoins a vector, keeping RREF. Returns whether the dimension grew.
    pub fn insert(&mut self, v: SparseVecF2) -> bool {
        if let Some(&max) = v.support().last() {
            assert!((max as usize) < self.ambient, "vector exceeds ambient dimension");
        }
        let v = self.reduce(&v);
        let Some(p) = v.min_index() else { return false };
        for b in &mut self.basis {
            if b.contains(p) {
                b.add_assign(&v);
            }
        }
        let pos = self.basis.partition_point(|b| b.min_index().unwrap() < p);
        self.basis.insert(pos, v);
        true
    }
}

/// Sum of two subspaces of the same ambient space.
pub fn subspace_sum(a: &Subspace, b: &Subspace) -> Subspace {
    assert_eq!(a.ambient, b.ambient, "dimension mismatch");
    let mut s = a.clone();
    for v in &b.basis {
        s.insert(v.clone());
    }
    s
}

/// Intersection of two subspaces of the same ambient space.
///
/// A kernel computation on the concatenated basis matrix: a relation
/// `Σ u_i a_i + Σ w_j b_j = 0` exhibits the element `Σ u_i a_i` of the
/// intersection.
pub fn subspace_intersection(a: &Subspace, b: &Subspace) -> Subspace {
    assert_eq!(a.ambient, b.ambient, "dimension mismatch");
    let columns: Vec<SparseVecF2> =
        a.basis.iter().chain(&b.basis).cloned().collect();
    let stacked = SparseMatF2::from_columns(a.ambient, columns);
    let mut out = Subspace::zero(a.ambient);
    for rel in kernel_basis(&stacked) {
        let mut elt = SparseVecF2::zero();
        for &c in rel.support() {
            if (c as usize) < a.dim() {
                elt.add_assign(&a.basis[c as usize]);
            }
        }
        out.insert(elt);
    }
    out
}

/// Dimension of `sup / sub`. Panics unless `sub ⊆ sup`.
pub fn quotient_dim(sub: &Subspace, sup: &Subspace) -> usize {
    assert_eq!(sub.ambient, sup.ambient, "dimension mismatch");
    for v in &sub.basis {
        assert!(sup.contains(v), "quotient_dim: subspace not contained in ambient space");
    }
    sup.dim() - sub.dim()
}

/// A square differential matrix with `∂² = 0` and a set of live indices,
/// supporting Gauss elimination of single entries.
///
/// Entry `(r, c)` set means the differential of generator `c` contains
/// generator `r`.
#[derive(Clone)]
pub struct MatrixComplex {
    n: usize,
    alive: Vec<bool>,
    /// For each row r: the set of columns c with entry (r, c).
    rows: Vec<BTreeSet<u32>>,
    /// For each column c: the set of rows r with entry (r, c).
    cols: Vec<BTreeSet<u32>>,
}

impl MatrixComplex {
    /// Wraps a square matrix. Panics unless the matrix squares to zero.
    pub fn from_square(m: &SparseMatF2) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "matrix must be square");
        assert!(m.compose(m).is_zero(), "differential must square to zero");
        let n = m.nrows();
        let mut rows = vec![BTreeSet::new(); n];
        let mut cols = vec![BTreeSet::new(); n];
        for (c, col) in m.columns.iter().enumerate() {
            for &r in col.support() {
                rows[r as usize].insert(c as u32);
                cols[c].insert(r);
            }
        }
        MatrixComplex { n, alive: vec![true; n], rows, cols }
    }

    /// Total size of the underlying index set (live and dead).
    pub fn size(&self) -> usize {
        self.n
    }

    /// Number of live generators.
    pub fn dim(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }

    pub fn is_alive(&self, i: usize) -> bool {
        self.alive[i]
    }

    pub fn alive_indices(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.alive[i]).collect()
    }

    pub fn entry(&self, r: usize, c: usize) -> bool {
        self.cols[c].contains(&(r as u32))
    }

    /// Rows hit by the differential of generator `c`.
    pub fn column(&self, c: usize) -> &BTreeSet<u32> {
        &self.cols[c]
    }

    /// Columns whose differential hits row `r`.
    pub fn row(&self, r: usize) -> &BTreeSet<u32> {
        &self.rows[r]
    }

    /// The current differential as a full-size sparse matrix (dead indices
    /// have empty rows and columns).
    pub fn to_sparse(&self) -> SparseMatF2 {
        let columns = self
            .cols
            .iter()
            .map(|c| SparseVecF2::from_support(c.iter().copied().collect()))
            .collect();
        SparseMatF2::from_columns(self.n, columns)
    }

    fn toggle(&mut self, r: usize, c: usize) {
        if !self.cols[c].insert(r as u32) {
            self.cols[c].remove(&(r as u32));
            self.rows[r].remove(&(c as u32));
        } else {
            self.rows[r].insert(c as u32);
        }
    }

    /// Gauss-eliminates the entry `(row, col)`: generators `col` (source)
    /// and `row` (target) are removed and for every other source `a`
    /// hitting `row` and every other target `b` hit by `col`, the entry
    /// `(b, a)` is toggled. Cohomology is unchanged.
    ///
    /// Panics unless both indices are live, distinct, and the entry is 1.
    pub fn eliminate(&mut self, row: usize, col: usize) {
        assert!(self.alive[row] && self.alive[col], "eliminating dead index");
        assert_ne!(row, col, "cannot eliminate a diagonal entry");
        assert!(self.entry(row, col), "entry to eliminate must be 1");
        let sources: Vec<u32> =
            self.rows[row].iter().copied().filter(|&a| a as usize != col).collect();
        let targets: Vec<u32> =
            self.cols[col].iter().copied().filter(|&b| b as usize != row).collect();
        for &a in &sources {
            for &b in &targets {
                self.toggle(b as usize, a as usize);
            }
        }
        for i in [row, col] {
            self.alive[i] = false;
            for c in std::mem::take(&mut self.rows[i]) {
                self.cols[c as usize].remove(&(i as u32));
            }
            for r in std::mem::take(&mut self.cols[i]) {
                self.rows[r as usize].remove(&(i as u32));
            }
        }
    }
}

/// Non-mutating form of [`MatrixComplex::eliminate`].
pub fn gauss_eliminate(complex: &MatrixComplex, row: usize, col: usize) -> MatrixComplex {
    let mut out = complex.clone();
    out.eliminate(row, col);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::collections::HashSet;

    fn sparse(idx: &[u32]) -> SparseVecF2 {
        SparseVecF2::from_indices(idx.iter().copied())
    }

    #[test]
    fn sparse_add_cancels() {
        let a = sparse(&[0, 2, 5]);
        let b = sparse(&[2, 3, 5]);
        assert_eq!(a.add(&b), sparse(&[0, 3]));
        assert!(a.add(&a).is_zero());
    }

    #[test]
    fn from_indices_xor_semantics() {
        assert_eq!(
            SparseVecF2::from_indices([3, 1, 3, 2, 1, 1]),
            SparseVecF2::from_support(vec![1, 2]),
        );
    }

    #[test]
    fn subspace_rref_shape() {
        let mut s = Subspace::zero(6);
        s.insert(sparse(&[1, 2, 4]));
        s.insert(sparse(&[1, 3]));
        s.insert(sparse(&[2, 3, 4]));
        // Third vector is the sum of the first two.
        assert_eq!(s.dim(), 2);
        let pivots = s.pivots();
        assert!(pivots.windows(2).all(|w| w[0] < w[1]));
        // Each pivot is cleared in the other basis vectors.
        for (i, b) in s.basis().iter().enumerate() {
            for (j, p) in pivots.iter().enumerate() {
                if i != j {
                    assert!(!b.contains(*p));
                }
            }
        }
    }

    #[test]
    fn quotient_dim_checks_containment() {
        let sup = Subspace::from_vectors(4, [sparse(&[0]), sparse(&[1])]);
        let sub = Subspace::from_vectors(4, [sparse(&[0, 1])]);
        assert_eq!(quotient_dim(&sub, &sup), 1);
        let bad = Subspace::from_vectors(4, [sparse(&[2])]);
        let res = std::panic::catch_unwind(|| quotient_dim(&bad, &sup));
        assert!(res.is_err());
    }

    proptest! {
        #[test]
        fn dense_sparse_roundtrip(bits in proptest::collection::btree_set(0u32..64, 0..20)) {
            let v = SparseVecF2::from_support(bits.into_iter().collect());
            prop_assert_eq!(v.to_dense(64).to_sparse(), v);
        }

        #[test]
        fn rank_nullity(
            nrows in 1usize..12,
            ncols in 1usize..12,
            seed in any::<u64>(),
        ) {
            let mut rng = StdRng::seed_from_u64(seed);
            let columns: Vec<SparseVecF2> = (0..ncols)
                .map(|_| {
                    SparseVecF2::from_indices(
                        (0..nrows as u32).filter(|_| rng.gen_bool(0.4)),
                    )
                })
                .collect();
            let m = SparseMatF2::from_columns(nrows, columns);
            let r = rank(&m);
            let kernel = kernel_basis(&m);
            prop_assert_eq!(r + kernel.len(), ncols);
            prop_assert_eq!(image_basis(&m).dim(), r);
            for k in &kernel {
                prop_assert!(m.apply(k).is_zero());
            }
            // Kernel vectors are independent: insert into a subspace.
            let span = Subspace::from_vectors(ncols, kernel.iter().cloned());
            prop_assert_eq!(span.dim(), ncols - r);
        }
    }

    /// Brute-force set of all elements of a subspace (ambient ≤ 16).
    fn enumerate(s: &Subspace) -> HashSet<Vec<u32>> {
        let mut out = HashSet::new();
        for mask in 0u32..(1 << s.dim()) {
            let mut v = SparseVecF2::zero();
            for (i, b) in s.basis().iter().enumerate() {
                if mask >> i & 1 == 1 {
                    v.add_assign(b);
                }
            }
            out.insert(v.support().to_vec());
        }
        out
    }

    proptest! {
        // Spec floor is 50 random pairs; proptest runs 256 cases.
        #[test]
        fn subspace_ops_against_enumeration(
            ambient in 1usize..=10,
            seed in any::<u64>(),
        ) {
            let mut rng = StdRng::seed_from_u64(seed);
            let random_subspace = |rng: &mut StdRng| {
                let gens = rng.gen_range(0..=4);
                Subspace::from_vectors(
                    ambient,
                    (0..gens).map(|_| {
                        SparseVecF2::from_indices(
                            (0..ambient as u32).filter(|_| rng.gen_bool(0.5)),
                        )
                    }),
                )
            };
            let a = random_subspace(&mut rng);
            let b = random_subspace(&mut rng);
            let sum = subspace_sum(&a, &b);
            let int = subspace_intersection(&a, &b);

            let (ea, eb) = (enumerate(&a), enumerate(&b));
            let esum = enumerate(&sum);
            let eint = enumerate(&int);

            // Membership agrees with the brute-force element sets.
            let expected_int: HashSet<_> = ea.intersection(&eb).cloned().collect();
            prop_assert_eq!(&eint, &expected_int);
            for x in &ea {
                prop_assert!(esum.contains(x));
            }
            for x in &eb {
                prop_assert!(esum.contains(x));
            }
            // Inclusion–exclusion and idempotence.
            prop_assert_eq!(sum.dim() + int.dim(), a.dim() + b.dim());
            prop_assert_eq!(subspace_sum(&a, &a), a.clone());
            prop_assert_eq!(subspace_intersection(&a, &a), a.clone());
            // Intersection and both factors sit inside the sum.
            prop_assert_eq!(quotient_dim(&int, &a), a.dim() - int.dim());
            prop_assert_eq!(quotient_dim(&a, &sum), sum.dim() - a.dim());
        }
    }

    /// Builds a random differential with known cohomology: `pairs` acyclic
    /// two-generator pieces plus isolated generators, conjugated by random
    /// elementary row operations. Squares to zero by construction.
    fn random_complex(rng: &mut StdRng, n: usize) -> (SparseMatF2, usize) {
        let pairs = if n >= 2 { rng.gen_range(0..=n / 2) } else { 0 };
        let mut m = SparseMatF2::zero(n, n);
        for p in 0..pairs {
            // Differential sends generator 2p to generator 2p+1.
            m.set_column(2 * p, SparseVecF2::singleton(2 * p as u32 + 1));
        }
        // Conjugate by transvections T: x_i += x_j. In matrix terms
        // M <- E M E^{-1}, with E^{-1} = E over GF(2).
        for _ in 0..3 * n {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            if i == j {
                continue;
            }
            // Row operation: row_i += row_j, then column op: col_j += col_i.
            let mut t = SparseMatF2::zero(n, n);
            for d in 0..n {
                t.set_column(d, SparseVecF2::singleton(d as u32));
            }
            let mut col_j = t.column(j).clone();
            col_j.add_assign(&SparseVecF2::singleton(i as u32));
            t.set_column(j, col_j);
            m = t.compose(&m).compose(&t);
        }
        (m, n - 2 * pairs)
    }

    #[test]
    fn gauss_elimination_preserves_cohomology() {
        let mut rng = StdRng::seed_from_u64(0x1bf5);
        for trial in 0..25 {
            let n = 2 + (trial % 11);
            let (m, expected_h) = random_complex(&mut rng, n);
            assert!(m.compose(&m).is_zero());
            let mut mc = MatrixComplex::from_square(&m);
            loop {
                // Deterministic pivot: lowest (row, col) live off-diagonal 1.
                let pick = (0..n)
                    .filter(|&r| mc.is_alive(r))
                    .flat_map(|r| {
                        mc.row(r).iter().map(move |&c| (r, c as usize))
                    })
                    .find(|&(r, c)| r != c);
                let Some((r, c)) = pick else { break };
                let before = mc.dim();
                mc.eliminate(r, c);
                assert_eq!(mc.dim(), before - 2);
                let d = mc.to_sparse();
                assert!(d.compose(&d).is_zero(), "square-zero lost after elimination");
            }
            // No off-diagonal entries remain; with a square-zero matrix the
            // diagonal must be zero too, so the differential is zero and the
            // live count is the cohomology dimension.
            assert!(mc.to_sparse().is_zero());
            assert_eq!(mc.dim(), expected_h, "trial {trial}");
        }
    }

    #[test]
    fn matrix_compose_transpose() {
        let m = SparseMatF2::from_columns(3, vec![sparse(&[0, 1]), sparse(&[2])]);
        let t = m.transpose();
        assert_eq!(t.nrows(), 2);
        assert_eq!(t.ncols(), 3);
        assert!(t.entry(0, 0) && t.entry(0, 1) && t.entry(1, 2));
        let id2 = SparseMatF2::from_columns(2, vec![sparse(&[0]), sparse(&[1])]);
        assert_eq!(m.compose(&id2), m);
    }
}
