//! Subspaces of GF(q)^n in canonical form: construction, enumeration,
//! ranking, and intersection queries.
//!
//! Every subspace is represented by the reduced row echelon form of a basis,
//! which is unique, so structural equality is subspace equality. Enumeration
//! follows the frozen `rref-rank-v1` order: pivot sets ascend lexicographically
//! (as sorted 0-based tuples), and within a pivot set the free entries, read
//! row-major with the first-scanned position most significant, ascend as a
//! base-q number. Ranking and unranking are exact inverses of that order.

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::exact::gaussian;
use crate::gf::FieldSpec;

/// A subspace of GF(q)^n in reduced row echelon form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subspace {
    q: u64,
    n: u32,
    dim: u32,
    /// Row-major dim x n matrix of field elements.
    mat: Vec<u64>,
    /// Strictly increasing pivot columns, one per row.
    pivots: Vec<u32>,
}

impl Subspace {
    /// The zero-dimensional subspace (empty basis).
    pub fn zero(q: u64, n: u32) -> Subspace {
        Subspace {
            q,
            n,
            dim: 0,
            mat: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn ambient_dim(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn pivots(&self) -> &[u32] {
        &self.pivots
    }

    pub fn row(&self, t: u32) -> &[u64] {
        let n = self.n as usize;
        &self.mat[t as usize * n..(t as usize + 1) * n]
    }

    pub fn entry(&self, t: u32, c: u32) -> u64 {
        self.mat[t as usize * self.n as usize + c as usize]
    }

    fn same_space(&self, other: &Subspace) -> Result<()> {
        if self.q != other.q || self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "subspaces live in GF({})^{} and GF({})^{}",
                self.q, self.n, other.q, other.n
            )));
        }
        Ok(())
    }

    /// dim(self ∩ other) via the dimension formula
    /// dim A + dim B − rank(stacked bases).
    pub fn intersect_dim(&self, field: &FieldSpec, other: &Subspace) -> Result<u32> {
        self.same_space(other)?;
        let rank = rank_of_union(field, other, self);
        Ok(self.dim + other.dim - rank)
    }

    /// Whether `self` is contained in `other`: every basis row of `self`
    /// reduces to zero against `other`'s canonical basis.
    pub fn is_contained_in(&self, field: &FieldSpec, other: &Subspace) -> Result<bool> {
        self.same_space(other)?;
        if self.dim > other.dim {
            return Ok(false);
        }
        let n = self.n as usize;
        let mut scratch = vec![0u64; n];
        for t in 0..self.dim {
            scratch.copy_from_slice(self.row(t));
            for (u, &p) in other.pivots.iter().enumerate() {
                let coef = scratch[p as usize];
                if coef != 0 {
                    let prow = other.row(u as u32);
                    for c in 0..n {
                        scratch[c] = field.sub(scratch[c], field.mul(coef, prow[c]));
                    }
                }
            }
            if scratch.iter().any(|&x| x != 0) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Rank of span(a) + span(b): starts from b's echelon basis and inserts a's
/// rows one at a time.
fn rank_of_union(field: &FieldSpec, b: &Subspace, a: &Subspace) -> u32 {
    let n = a.n as usize;
    // Echelon rows sorted by pivot column.
    let mut ech: Vec<(u32, Vec<u64>)> = (0..b.dim)
        .map(|t| (b.pivots[t as usize], b.row(t).to_vec()))
        .collect();
    let mut rank = b.dim;
    let mut v = vec![0u64; n];
    for t in 0..a.dim {
        v.copy_from_slice(a.row(t));
        for (p, prow) in &ech {
            let coef = v[*p as usize];
            if coef != 0 {
                for c in *p as usize..n {
                    v[c] = field.sub(v[c], field.mul(coef, prow[c]));
                }
            }
        }
        if let Some(lead) = v.iter().position(|&x| x != 0) {
            let inv = field.inv(v[lead]).expect("leading entry is nonzero");
            for c in lead..n {
                v[c] = field.mul(v[c], inv);
            }
            let pos = ech.partition_point(|(p, _)| (*p as usize) < lead);
            ech.insert(pos, (lead as u32, v.clone()));
            rank += 1;
        }
    }
    rank
}

/// Canonicalizes the span of the given rows into a [`Subspace`].
pub fn rref(field: &FieldSpec, n: u32, rows: &[Vec<u64>]) -> Result<Subspace> {
    let q = field.q();
    let nn = n as usize;
    let mut mat: Vec<Vec<u64>> = Vec::with_capacity(rows.len());
    for r in rows {
        if r.len() != nn {
            return Err(Error::DimensionMismatch(format!(
                "row has length {}, ambient dimension is {n}",
                r.len()
            )));
        }
        if r.iter().any(|&x| x >= q) {
            return Err(Error::DimensionMismatch(format!(
                "row entry out of range for GF({q})"
            )));
        }
        mat.push(r.clone());
    }
    let mut pivots: Vec<u32> = Vec::new();
    let mut next = 0usize;
    for col in 0..nn {
        let Some(src) = (next..mat.len()).find(|&r| mat[r][col] != 0) else {
            continue;
        };
        mat.swap(next, src);
        let inv = field.inv(mat[next][col])?;
        for c in col..nn {
            mat[next][c] = field.mul(mat[next][c], inv);
        }
        for r in 0..mat.len() {
            if r != next && mat[r][col] != 0 {
                let coef = mat[r][col];
                for c in col..nn {
                    mat[r][c] = field.sub(mat[r][c], field.mul(coef, mat[next][c]));
                }
            }
        }
        pivots.push(col as u32);
        next += 1;
    }
    let dim = next as u32;
    let mut flat = Vec::with_capacity(next * nn);
    for row in mat.iter().take(next) {
        flat.extend_from_slice(row);
    }
    Ok(Subspace {
        q,
        n,
        dim,
        mat: flat,
        pivots,
    })
}

/// All j-dimensional subspaces of `parent`, as subspaces of the ambient space.
pub fn subspaces_of(field: &FieldSpec, parent: &Subspace, j: u32) -> Result<Vec<Subspace>> {
    if j > parent.dim() {
        return Err(Error::hypothesis(format!(
            "j <= dim(parent) fails: j={j}, dim={}",
            parent.dim()
        )));
    }
    let inner = Grassmannian::new(field, parent.dim(), j)?;
    let n = parent.ambient_dim() as usize;
    let mut out = Vec::with_capacity(inner.count() as usize);
    for small in inner.iter() {
        // Map the inner basis through the parent's basis.
        let mut rows = Vec::with_capacity(j as usize);
        for t in 0..j {
            let mut row = vec![0u64; n];
            for (u, &coef) in small.row(t).iter().enumerate() {
                if coef != 0 {
                    for c in 0..n {
                        row[c] = field.add(row[c], field.mul(coef, parent.row(u as u32)[c]));
                    }
                }
            }
            rows.push(row);
        }
        out.push(rref(field, parent.ambient_dim(), &rows)?);
    }
    Ok(out)
}

/// The set of k-dimensional subspaces of GF(q)^n with a fixed, rankable
/// enumeration order.
pub struct Grassmannian<'f> {
    field: &'f FieldSpec,
    n: u32,
    k: u32,
    count: u64,
    /// q^t for t up to k(n-k); every entry is at most `count`.
    qpow: Vec<u64>,
    /// gauss[b][a] = [a choose b]_q for b <= k, b <= a <= n, a-b <= n-k.
    gauss: Vec<Vec<u64>>,
}

impl<'f> Grassmannian<'f> {
    pub fn new(field: &'f FieldSpec, n: u32, k: u32) -> Result<Self> {
        if k > n {
            return Err(Error::hypothesis(format!("k <= n fails: k={k}, n={n}")));
        }
        let q = field.q();
        let count_big = gaussian(q, n as i64, k as i64)?;
        let count = count_big
            .to_u64()
            .ok_or(Error::EnumerationOverflow { count: count_big })?;
        let max_exp = (k * (n - k)) as usize;
        let mut qpow = Vec::with_capacity(max_exp + 1);
        let mut acc = 1u64;
        qpow.push(acc);
        for _ in 0..max_exp {
            acc *= q; // q^{k(n-k)} is the largest cell size, <= count
            qpow.push(acc);
        }
        let mut gauss = vec![Vec::new(); k as usize + 1];
        for (b, row) in gauss.iter_mut().enumerate() {
            let hi = (b as u32 + (n - k)).min(n);
            let mut vals = vec![0u64; hi as usize + 1];
            for (a, slot) in vals.iter_mut().enumerate().take(hi as usize + 1).skip(b) {
                *slot = gaussian(q, a as i64, b as i64)?
                    .to_u64()
                    .expect("sub-Grassmannian counts are bounded by the total count");
            }
            *row = vals;
        }
        Ok(Grassmannian {
            field,
            n,
            k,
            count,
            qpow,
            gauss,
        })
    }

    pub fn field(&self) -> &FieldSpec {
        self.field
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// [n choose k]_q, the number of subspaces.
    pub fn count(&self) -> u64 {
        self.count
    }

    #[inline]
    fn gauss_at(&self, a: u32, b: u32) -> u64 {
        self.gauss[b as usize][a as usize]
    }

    /// Free-entry exponent contributed by a pivot at column c in row t.
    #[inline]
    fn contrib(&self, t: u32, c: u32) -> u32 {
        self.n - c - (self.k - t)
    }

    pub fn iter(&self) -> SubspaceIter<'_, 'f> {
        SubspaceIter::new(self, 0)
    }

    /// Iterator positioned at `start` in enumeration order.
    pub fn iter_at(&self, start: u64) -> Result<SubspaceIter<'_, 'f>> {
        if start > self.count {
            return Err(Error::IndexOutOfRange(format!(
                "start {start} exceeds count {}",
                self.count
            )));
        }
        Ok(SubspaceIter::new(self, start))
    }

    /// Position of `sub` in enumeration order.
    pub fn rank(&self, sub: &Subspace) -> Result<u64> {
        if sub.q != self.field.q() || sub.n != self.n || sub.dim != self.k {
            return Err(Error::DimensionMismatch(format!(
                "rank expects a {}-dimensional subspace of GF({})^{}",
                self.k,
                self.field.q(),
                self.n
            )));
        }
        let q = self.field.q();
        let mut acc = 0u64;
        let mut prefix_e = 0u32;
        let mut prev: i64 = -1;
        for t in 0..self.k {
            let p_t = sub.pivots[t as usize];
            for c in (prev + 1) as u32..p_t {
                let e = prefix_e + self.contrib(t, c);
                acc += self.qpow[e as usize] * self.gauss_at(self.n - c - 1, self.k - t - 1);
            }
            prefix_e += self.contrib(t, p_t);
            prev = p_t as i64;
        }
        // Free-entry value, first-scanned position most significant.
        let mut v = 0u64;
        for t in 0..self.k {
            for c in sub.pivots[t as usize] + 1..self.n {
                if !sub.pivots.contains(&c) {
                    v = v * q + sub.entry(t, c);
                }
            }
        }
        Ok(acc + v)
    }

    /// The subspace at position `index` in enumeration order.
    pub fn unrank(&self, index: u64) -> Result<Subspace> {
        let (pivots, v) = self.locate(index)?;
        Ok(self.build(&pivots, v))
    }

    /// Splits a global rank into (pivot set, value within cell).
    fn locate(&self, index: u64) -> Result<(Vec<u32>, u64)> {
        if index >= self.count {
            return Err(Error::IndexOutOfRange(format!(
                "rank {index} out of range for count {}",
                self.count
            )));
        }
        let mut rem = index;
        let mut pivots = Vec::with_capacity(self.k as usize);
        let mut prefix_e = 0u32;
        let mut c = 0u32;
        for t in 0..self.k {
            loop {
                let e = prefix_e + self.contrib(t, c);
                let block = self.qpow[e as usize] * self.gauss_at(self.n - c - 1, self.k - t - 1);
                if rem < block {
                    pivots.push(c);
                    prefix_e += self.contrib(t, c);
                    c += 1;
                    break;
                }
                rem -= block;
                c += 1;
            }
        }
        Ok((pivots, rem))
    }

    /// Materializes the subspace with the given pivot set and free-entry value.
    fn build(&self, pivots: &[u32], v: u64) -> Subspace {
        let q = self.field.q();
        let n = self.n as usize;
        let k = self.k as usize;
        let mut mat = vec![0u64; k * n];
        for (t, &p) in pivots.iter().enumerate() {
            mat[t * n + p as usize] = 1;
        }
        let free = free_positions(self.n, pivots);
        // Digits msb-first along the scan order.
        let mut rem = v;
        for idx in (0..free.len()).rev() {
            let (t, c) = free[idx];
            mat[t as usize * n + c as usize] = rem % q;
            rem /= q;
        }
        Subspace {
            q,
            n: self.n,
            dim: self.k,
            mat,
            pivots: pivots.to_vec(),
        }
    }

    fn cell_size(&self, pivots: &[u32]) -> u64 {
        let e: u32 = pivots
            .iter()
            .enumerate()
            .map(|(t, &p)| self.contrib(t as u32, p))
            .sum();
        self.qpow[e as usize]
    }
}

/// Free positions (row, col) of a pivot set in row-major scan order.
fn free_positions(n: u32, pivots: &[u32]) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for (t, &p) in pivots.iter().enumerate() {
        for c in p + 1..n {
            if !pivots.contains(&c) {
                out.push((t as u32, c));
            }
        }
    }
    out
}

/// Lexicographic successor of a k-combination of {0..n-1}; false when done.
fn next_combination(pivots: &mut [u32], n: u32) -> bool {
    let k = pivots.len();
    for t in (0..k).rev() {
        if pivots[t] < n - (k - t) as u32 {
            pivots[t] += 1;
            for u in t + 1..k {
                pivots[u] = pivots[u - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Streaming enumeration of a Grassmannian in `rref-rank-v1` order.
pub struct SubspaceIter<'g, 'f> {
    g: &'g Grassmannian<'f>,
    pivots: Vec<u32>,
    cell: u64,
    v: u64,
    next_rank: u64,
}

impl<'g, 'f> SubspaceIter<'g, 'f> {
    fn new(g: &'g Grassmannian<'f>, start: u64) -> Self {
        if start >= g.count {
            return SubspaceIter {
                g,
                pivots: Vec::new(),
                cell: 0,
                v: 0,
                next_rank: g.count,
            };
        }
        let (pivots, v) = g.locate(start).expect("start < count");
        let cell = g.cell_size(&pivots);
        SubspaceIter {
            g,
            pivots,
            cell,
            v,
            next_rank: start,
        }
    }

    /// Rank of the element the next `next()` call will yield.
    pub fn next_rank(&self) -> u64 {
        self.next_rank
    }

    /// Skips `delta` elements.
    pub fn advance(&mut self, delta: u64) {
        let mut rem = delta;
        while rem > 0 && self.next_rank < self.g.count {
            let left = self.cell - self.v;
            if rem < left {
                self.v += rem;
                self.next_rank += rem;
                return;
            }
            rem -= left;
            self.next_rank += left;
            self.v = 0;
            if !next_combination(&mut self.pivots, self.g.n) {
                return; // exhausted; next_rank == count
            }
            self.cell = self.g.cell_size(&self.pivots);
        }
    }
}

impl Iterator for SubspaceIter<'_, '_> {
    type Item = Subspace;

    fn next(&mut self) -> Option<Subspace> {
        if self.next_rank >= self.g.count {
            return None;
        }
        let out = self.g.build(&self.pivots, self.v);
        self.advance(1);
        Some(out)
    }
}

/// Bit-packed kernels for q = 2.
///
/// Over GF(2) a basis row of a subspace of GF(2)^n is a single word (bit c =
/// column c), which turns the hot loops of matrix construction and private
/// counting into XOR/popcount streams. Semantics are identical to the generic
/// path; the tests cross-check the two.
pub mod pack2 {
    use super::{free_positions, next_combination, Grassmannian, Subspace};
    use crate::error::{Error, Result};

    /// A subspace of GF(2)^n with one u64 word per basis row.
    #[derive(Clone, Debug)]
    pub struct PackedSubspace {
        pub n: u32,
        pub rows: Vec<u64>,
        pub pivots: Vec<u32>,
    }

    impl PackedSubspace {
        pub fn from_subspace(s: &Subspace) -> Result<PackedSubspace> {
            if s.q() != 2 || s.ambient_dim() > 64 {
                return Err(Error::hypothesis(format!(
                    "bit packing needs q=2 and n <= 64; got q={}, n={}",
                    s.q(),
                    s.ambient_dim()
                )));
            }
            let rows = (0..s.dim())
                .map(|t| {
                    s.row(t)
                        .iter()
                        .enumerate()
                        .fold(0u64, |acc, (c, &x)| acc | (x << c))
                })
                .collect();
            Ok(PackedSubspace {
                n: s.ambient_dim(),
                rows,
                pivots: s.pivots().to_vec(),
            })
        }

        pub fn dim(&self) -> u32 {
            self.rows.len() as u32
        }
    }

    /// Reduction modulo a fixed subspace B of GF(2)^n, used to compute
    /// dim(D ∩ B) = dim D − rank(D mod B) without touching B again.
    ///
    /// For n <= 20 the linear map v ↦ v mod B is tabulated over two half-width
    /// lookup tables; beyond that it falls back to pivot elimination.
    pub struct QuotientMap {
        lo: Vec<u64>,
        hi: Vec<u64>,
        lo_bits: u32,
        pivots: Vec<u32>,
        rows: Vec<u64>,
    }

    const TABLE_BITS_LIMIT: u32 = 20;

    impl QuotientMap {
        pub fn new(b: &PackedSubspace) -> QuotientMap {
            let reduce = |mut v: u64| {
                for (p, row) in b.pivots.iter().zip(&b.rows) {
                    if v >> p & 1 == 1 {
                        v ^= row;
                    }
                }
                v
            };
            if b.n <= TABLE_BITS_LIMIT {
                let lo_bits = b.n / 2;
                let hi_bits = b.n - lo_bits;
                let lo = (0..1u64 << lo_bits).map(reduce).collect();
                let hi = (0..1u64 << hi_bits).map(|x| reduce(x << lo_bits)).collect();
                QuotientMap {
                    lo,
                    hi,
                    lo_bits,
                    pivots: Vec::new(),
                    rows: Vec::new(),
                }
            } else {
                QuotientMap {
                    lo: Vec::new(),
                    hi: Vec::new(),
                    lo_bits: 0,
                    pivots: b.pivots.clone(),
                    rows: b.rows.clone(),
                }
            }
        }

        #[inline]
        pub fn project(&self, v: u64) -> u64 {
            if !self.lo.is_empty() {
                self.lo[(v & ((1 << self.lo_bits) - 1)) as usize] ^ self.hi[(v >> self.lo_bits) as usize]
            } else {
                let mut v = v;
                for (p, row) in self.pivots.iter().zip(&self.rows) {
                    if v >> p & 1 == 1 {
                        v ^= row;
                    }
                }
                v
            }
        }

        /// Rank of {project(row) : row in rows}; dim(span(rows) ∩ B) is then
        /// rows.len() − this value. Supports up to 16 rows.
        #[inline]
        pub fn projected_rank(&self, rows: &[u64]) -> u32 {
            match rows.len() {
                0 => 0,
                1 => (self.project(rows[0]) != 0) as u32,
                2 => rank_of_2(self.project(rows[0]), self.project(rows[1])),
                3 => rank_of_3(
                    self.project(rows[0]),
                    self.project(rows[1]),
                    self.project(rows[2]),
                ),
                _ => self.projected_rank_generic(rows),
            }
        }

        fn projected_rank_generic(&self, rows: &[u64]) -> u32 {
            assert!(rows.len() <= 16, "rank kernel supports at most 16 rows");
            let mut basis = [0u64; 16];
            let mut rank = 0u32;
            for &r in rows {
                let mut v = self.project(r);
                let mut i = 0;
                while v != 0 && i < rank {
                    let b = basis[i as usize];
                    if v >> (63 - b.leading_zeros()) & 1 == 1 {
                        v ^= b;
                    }
                    i += 1;
                }
                if v != 0 {
                    basis[rank as usize] = v;
                    rank += 1;
                }
            }
            rank
        }
    }

    /// Rank of span{a, b} over GF(2).
    #[inline]
    fn rank_of_2(a: u64, b: u64) -> u32 {
        if a != 0 && b != 0 && a != b {
            2
        } else {
            (a | b != 0) as u32
        }
    }

    /// Rank of span{a, b, c} over GF(2): 3 iff none of the seven nontrivial
    /// XOR combinations vanishes.
    #[inline]
    fn rank_of_3(a: u64, b: u64, c: u64) -> u32 {
        let ab = a ^ b;
        let ac = a ^ c;
        let bc = b ^ c;
        if a != 0 && b != 0 && c != 0 && ab != 0 && ac != 0 && bc != 0 && ab != c {
            3
        } else if (a != 0 && b != 0 && ab != 0)
            || (a != 0 && c != 0 && ac != 0)
            || (b != 0 && c != 0 && bc != 0)
        {
            2
        } else {
            (a | b | c != 0) as u32
        }
    }

    /// Streaming enumeration of G(2, n, k) yielding packed rows, in the same
    /// `rref-rank-v1` order as the generic iterator.
    pub struct PackedIter {
        n: u32,
        count: u64,
        pivots: Vec<u32>,
        /// free_pos[digit] for msb-first digit order; bit b of the cell value
        /// is digit free_pos.len()-1-b.
        free_pos: Vec<(u32, u32)>,
        v: u64,
        cell: u64,
        rows: Vec<u64>,
        rank: u64,
        started: bool,
    }

    impl PackedIter {
        pub fn new(g: &Grassmannian<'_>) -> Result<PackedIter> {
            if g.field().q() != 2 || g.n() > 64 {
                return Err(Error::hypothesis(format!(
                    "bit packing needs q=2 and n <= 64; got q={}, n={}",
                    g.field().q(),
                    g.n()
                )));
            }
            let pivots: Vec<u32> = (0..g.k()).collect();
            let mut it = PackedIter {
                n: g.n(),
                count: g.count(),
                pivots,
                free_pos: Vec::new(),
                v: 0,
                cell: 0,
                rows: vec![0; g.k() as usize],
                rank: 0,
                started: false,
            };
            it.enter_cell();
            Ok(it)
        }

        fn enter_cell(&mut self) {
            self.free_pos = free_positions(self.n, &self.pivots);
            self.cell = 1u64 << self.free_pos.len();
            self.v = 0;
            for (t, row) in self.rows.iter_mut().enumerate() {
                *row = 1u64 << self.pivots[t];
            }
        }

        pub fn pivots(&self) -> &[u32] {
            &self.pivots
        }

        /// Advances to the next subspace, exposing its rank and packed rows.
        /// The slice is valid until the next call.
        #[inline]
        pub fn next_rows(&mut self) -> Option<(u64, &[u64])> {
            if !self.started {
                self.started = true;
                if self.count == 0 {
                    return None;
                }
                return Some((0, &self.rows));
            }
            if self.rank + 1 >= self.count {
                return None;
            }
            self.step();
            self.rank += 1;
            Some((self.rank, &self.rows))
        }

        /// Moves the internal state one subspace forward.
        fn step(&mut self) {
            let new_v = self.v + 1;
            if new_v == self.cell {
                if next_combination(&mut self.pivots, self.n) {
                    self.enter_cell();
                }
                return;
            }
            // Toggle exactly the packed bits whose digits changed.
            let mut changed = self.v ^ new_v;
            let fcount = self.free_pos.len() as u32;
            while changed != 0 {
                let b = changed.trailing_zeros();
                let (t, c) = self.free_pos[(fcount - 1 - b) as usize];
                self.rows[t as usize] ^= 1u64 << c;
                changed &= changed - 1;
            }
            self.v = new_v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(q: u64) -> FieldSpec {
        FieldSpec::new(q).unwrap()
    }

    #[test]
    fn rref_examples() {
        let f = field(2);
        let s = rref(&f, 3, &[vec![1, 1, 0], vec![0, 1, 0]]).unwrap();
        assert_eq!(s.pivots(), &[0, 1]);
        assert_eq!(s.row(0), &[1, 0, 0]);
        assert_eq!(s.row(1), &[0, 1, 0]);

        let z = rref(&f, 3, &[vec![0, 0, 0]]).unwrap();
        assert_eq!(z.dim(), 0);
        assert_eq!(z, Subspace::zero(2, 3));

        let f3 = field(3);
        let dup = rref(&f3, 2, &[vec![1, 0], vec![1, 0]]).unwrap();
        assert_eq!(dup.dim(), 1);
        assert_eq!(dup.row(0), &[1, 0]);

        // Scaling: (2, 1) over GF(3) normalizes to (1, 2).
        let sc = rref(&f3, 2, &[vec![2, 1]]).unwrap();
        assert_eq!(sc.row(0), &[1, 2]);
    }

    #[test]
    fn rref_rejects_bad_rows() {
        let f = field(2);
        assert!(matches!(
            rref(&f, 3, &[vec![1, 0]]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            rref(&f, 2, &[vec![2, 0]]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn enumerate_counts() {
        let f2 = field(2);
        assert_eq!(Grassmannian::new(&f2, 3, 1).unwrap().iter().count(), 7);
        assert_eq!(Grassmannian::new(&f2, 3, 3).unwrap().iter().count(), 1);
        let f3 = field(3);
        assert_eq!(Grassmannian::new(&f3, 2, 1).unwrap().iter().count(), 4);
    }

    #[test]
    fn enumeration_is_canonical_and_unique() {
        use std::collections::HashSet;
        for q in [2u64, 3] {
            let f = field(q);
            for n in 0..=4u32 {
                for k in 0..=n {
                    let g = Grassmannian::new(&f, n, k).unwrap();
                    let all: Vec<Subspace> = g.iter().collect();
                    assert_eq!(all.len() as u64, g.count());
                    let set: HashSet<_> = all.iter().cloned().collect();
                    assert_eq!(set.len(), all.len(), "duplicates at q={q} n={n} k={k}");
                    for s in &all {
                        // Canonical: re-canonicalizing is the identity.
                        let rows: Vec<Vec<u64>> =
                            (0..s.dim()).map(|t| s.row(t).to_vec()).collect();
                        assert_eq!(&rref(&f, n, &rows).unwrap(), s);
                    }
                }
            }
        }
    }

    #[test]
    fn rank_unrank_roundtrip() {
        for q in [2u64, 3] {
            let f = field(q);
            for n in 0..=4u32 {
                for k in 0..=n {
                    let g = Grassmannian::new(&f, n, k).unwrap();
                    for (idx, s) in g.iter().enumerate() {
                        assert_eq!(g.rank(&s).unwrap(), idx as u64);
                        assert_eq!(g.unrank(idx as u64).unwrap(), s);
                    }
                    assert!(g.unrank(g.count()).is_err());
                }
            }
        }
    }

    #[test]
    fn first_element_has_leading_pivots_and_zero_freevalue() {
        let f = field(2);
        let g = Grassmannian::new(&f, 5, 2).unwrap();
        let first = g.unrank(0).unwrap();
        assert_eq!(first.pivots(), &[0, 1]);
        assert_eq!(first.row(0), &[1, 0, 0, 0, 0]);
        assert_eq!(first.row(1), &[0, 1, 0, 0, 0]);
    }

    #[test]
    fn advance_matches_skipping() {
        let f = field(2);
        let g = Grassmannian::new(&f, 5, 2).unwrap();
        let all: Vec<Subspace> = g.iter().collect();
        for stride in [1u64, 2, 3, 7, 34, 35, 200] {
            let mut it = g.iter();
            let mut idx = 0usize;
            while let Some(s) = it.next() {
                assert_eq!(s, all[idx]);
                it.advance(stride - 1);
                idx += stride as usize;
                if idx >= all.len() {
                    break;
                }
            }
        }
    }

    #[test]
    fn intersect_and_containment() {
        let f = field(2);
        let g1 = Grassmannian::new(&f, 2, 1).unwrap();
        let lines: Vec<Subspace> = g1.iter().collect();
        assert_eq!(lines.len(), 3);
        for a in &lines {
            assert_eq!(a.intersect_dim(&f, a).unwrap(), 1);
            for b in &lines {
                if a != b {
                    assert_eq!(a.intersect_dim(&f, b).unwrap(), 0);
                }
            }
        }
        let zero = Subspace::zero(2, 2);
        for b in &lines {
            assert!(zero.is_contained_in(&f, b).unwrap());
        }
        // Equal dimensions: containment iff equality.
        assert!(lines[0].is_contained_in(&f, &lines[0]).unwrap());
        assert!(!lines[0].is_contained_in(&f, &lines[1]).unwrap());
    }

    #[test]
    fn intersect_agrees_with_elementwise_oracle() {
        // Enumerate the actual vectors of each subspace and intersect as sets.
        let f = field(2);
        let n = 4u32;
        let vectors_of = |s: &Subspace| -> std::collections::HashSet<u64> {
            let mut out = std::collections::HashSet::new();
            let dim = s.dim();
            for mask in 0u64..(1 << dim) {
                let mut v = 0u64;
                for t in 0..dim {
                    if mask >> t & 1 == 1 {
                        for (c, &x) in s.row(t).iter().enumerate() {
                            v ^= x << c;
                        }
                    }
                }
                out.insert(v);
            }
            out
        };
        for ka in 0..=n {
            for kb in 0..=n {
                let ga = Grassmannian::new(&f, n, ka).unwrap();
                let gb = Grassmannian::new(&f, n, kb).unwrap();
                for a in ga.iter() {
                    for b in gb.iter() {
                        let inter = vectors_of(&a)
                            .intersection(&vectors_of(&b))
                            .count();
                        let expect = inter.trailing_zeros(); // |A∩B| = 2^dim
                        assert_eq!(
                            a.intersect_dim(&f, &b).unwrap(),
                            expect,
                            "a={a:?} b={b:?}"
                        );
                        assert_eq!(
                            a.is_contained_in(&f, &b).unwrap(),
                            a.intersect_dim(&f, &b).unwrap() == a.dim()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn subspaces_of_parent_counts() {
        let f = field(2);
        let g = Grassmannian::new(&f, 5, 3).unwrap();
        let parent = g.unrank(17).unwrap();
        let subs = subspaces_of(&f, &parent, 1).unwrap();
        assert_eq!(subs.len(), 7); // [3 choose 1]_2
        for s in &subs {
            assert!(s.is_contained_in(&f, &parent).unwrap());
            assert_eq!(s.ambient_dim(), 5);
        }
        let subs2 = subspaces_of(&f, &parent, 2).unwrap();
        assert_eq!(subs2.len(), 7); // [3 choose 2]_2
    }

    #[test]
    fn cell_decomposition_sizes() {
        let f = field(3);
        let g = Grassmannian::new(&f, 4, 2).unwrap();
        use std::collections::BTreeMap;
        let mut by_pivots: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
        for s in g.iter() {
            *by_pivots.entry(s.pivots().to_vec()).or_default() += 1;
        }
        let mut total = 0u64;
        for (pivots, size) in &by_pivots {
            let f_exp: u32 = pivots
                .iter()
                .enumerate()
                .map(|(t, &p)| 4 - p - (2 - t as u32))
                .sum();
            assert_eq!(*size, 3u64.pow(f_exp), "pivots {pivots:?}");
            total += size;
        }
        assert_eq!(total, g.count());
    }

    #[test]
    fn packed_iteration_matches_generic() {
        let f = field(2);
        for n in 1..=5u32 {
            for k in 0..=n {
                let g = Grassmannian::new(&f, n, k).unwrap();
                let generic: Vec<Subspace> = g.iter().collect();
                let mut it = pack2::PackedIter::new(&g).unwrap();
                let mut seen = 0u64;
                while let Some((rank, rows)) = it.next_rows() {
                    assert_eq!(rank, seen);
                    let s = &generic[rank as usize];
                    for (t, &word) in rows.iter().enumerate() {
                        let expect: u64 = s
                            .row(t as u32)
                            .iter()
                            .enumerate()
                            .fold(0, |acc, (c, &x)| acc | (x << c));
                        assert_eq!(word, expect, "n={n} k={k} rank={rank} row={t}");
                    }
                    seen += 1;
                }
                assert_eq!(seen, g.count());
            }
        }
    }

    #[test]
    fn quotient_map_intersections_match_generic() {
        let f = field(2);
        let n = 5u32;
        let gb = Grassmannian::new(&f, n, 3).unwrap();
        let gd = Grassmannian::new(&f, n, 2).unwrap();
        for b in gb.iter() {
            let packed_b = pack2::PackedSubspace::from_subspace(&b).unwrap();
            let qm = pack2::QuotientMap::new(&packed_b);
            for d in gd.iter() {
                let packed_d = pack2::PackedSubspace::from_subspace(&d).unwrap();
                let fast = d.dim() - qm.projected_rank(&packed_d.rows);
                let slow = d.intersect_dim(&f, &b).unwrap();
                assert_eq!(fast, slow);
            }
        }
    }
}
