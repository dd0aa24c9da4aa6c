//! Construction of the four pooling-design families and their interchange
//! format.
//!
//! Rows are indexed by d-subsets (or d-dimensional subspaces) and columns by
//! k-subsets (or k-dimensional subspaces); an entry is 1 when the row object
//! is contained in, or meets at the prescribed size, the column object. Rows
//! and columns follow the frozen orders `lex-subset-v1` (subsets as sorted
//! tuples, ascending lexicographically) and `rref-rank-v1` (see
//! [`crate::grassmann`]), so a parameter set always produces the same matrix.
//!
//! Matrices are stored column-major: one row-indexed bitset per column, which
//! is the layout every disjunctness kernel consumes.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::bits::BitVec;
use crate::error::{Error, Result};
use crate::exact::{binomial, gaussian};
use crate::gf::FieldSpec;
use crate::grassmann::{pack2, Grassmannian, Subspace};

/// Default cap on row_count x col_count, in matrix bits.
pub const DEFAULT_BUILD_BUDGET_BITS: u64 = 1 << 31;

/// The four design families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    QContainment,
    QIntersection,
    SetContainment,
    SetIntersection,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::QContainment => "q-containment",
            Family::QIntersection => "q-intersection",
            Family::SetContainment => "set-containment",
            Family::SetIntersection => "set-intersection",
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        Some(match s {
            "q-containment" => Family::QContainment,
            "q-intersection" => Family::QIntersection,
            "set-containment" => Family::SetContainment,
            "set-intersection" => Family::SetIntersection,
            _ => None?,
        })
    }

    pub fn is_q(self) -> bool {
        matches!(self, Family::QContainment | Family::QIntersection)
    }

    pub fn is_intersection(self) -> bool {
        matches!(self, Family::QIntersection | Family::SetIntersection)
    }
}

/// Parameters identifying one design matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DesignParams {
    pub family: Family,
    /// Field order; present exactly for the q-families.
    pub q: Option<u64>,
    pub n: u32,
    pub k: u32,
    pub d: u32,
    /// Intersection size; present exactly for the intersection families.
    pub i: Option<u32>,
}

impl DesignParams {
    pub fn validate(&self) -> Result<()> {
        if self.family.is_q() != self.q.is_some() {
            return Err(Error::hypothesis(format!(
                "family {} {} a field order q",
                self.family.as_str(),
                if self.family.is_q() { "requires" } else { "does not take" }
            )));
        }
        if self.family.is_intersection() != self.i.is_some() {
            return Err(Error::hypothesis(format!(
                "family {} {} an intersection size i",
                self.family.as_str(),
                if self.family.is_intersection() { "requires" } else { "does not take" }
            )));
        }
        let (d, k, n) = (self.d, self.k, self.n);
        if d < 1 || d >= k || k >= n {
            return Err(Error::hypothesis(format!(
                "1 <= d < k < n fails: d={d}, k={k}, n={n}"
            )));
        }
        if let Some(q) = self.q {
            crate::gf::prime_power(q).ok_or(Error::NonPrimePower(q))?;
        }
        if let Some(i) = self.i {
            if i > d {
                return Err(Error::hypothesis(format!("i <= d fails: i={i}, d={d}")));
            }
            if self.family == Family::QIntersection {
                let lower = (d as i64 + k as i64 - n as i64).max(0);
                if (i as i64) < lower {
                    return Err(Error::hypothesis(format!(
                        "i >= max(0, d+k-n) fails: i={i}, d+k-n={}",
                        d as i64 + k as i64 - n as i64
                    )));
                }
            }
        }
        if !self.family.is_q() && self.n > 63 {
            return Err(Error::hypothesis(format!(
                "set families support n <= 63; got n={}",
                self.n
            )));
        }
        Ok(())
    }

    /// Number of rows, [n choose d]_q or C(n, d).
    pub fn row_count(&self) -> Result<BigUint> {
        match self.q {
            Some(q) => gaussian(q, self.n as i64, self.d as i64),
            None => Ok(binomial(self.n as i64, self.d as i64)),
        }
    }

    /// Number of columns, [n choose k]_q or C(n, k).
    pub fn col_count(&self) -> Result<BigUint> {
        match self.q {
            Some(q) => gaussian(q, self.n as i64, self.k as i64),
            None => Ok(binomial(self.n as i64, self.k as i64)),
        }
    }

    fn order_name(&self) -> &'static str {
        if self.family.is_q() {
            "rref-rank-v1"
        } else {
            "lex-subset-v1"
        }
    }
}

/// A materialized pooling matrix with column-major bitset storage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoolingMatrix {
    params: DesignParams,
    row_count: u64,
    col_count: u64,
    columns: Vec<BitVec>,
}

impl PoolingMatrix {
    pub fn params(&self) -> &DesignParams {
        &self.params
    }

    pub fn row_count(&self) -> u64 {
        self.row_count
    }

    pub fn col_count(&self) -> u64 {
        self.col_count
    }

    pub fn column(&self, c: u64) -> &BitVec {
        &self.columns[c as usize]
    }

    pub fn entry(&self, r: u64, c: u64) -> bool {
        self.columns[c as usize].get(r)
    }
}

/// Builds the subspace-containment design M_q(d,k,n):
/// entry (A, B) = 1 iff A ⊆ B.
pub fn build_q_containment(
    q: u64,
    d: u32,
    k: u32,
    n: u32,
    budget_bits: u64,
) -> Result<PoolingMatrix> {
    build_design(
        &DesignParams {
            family: Family::QContainment,
            q: Some(q),
            n,
            k,
            d,
            i: None,
        },
        budget_bits,
    )
}

/// Builds the subspace-intersection design M_q(i;d,k,n):
/// entry (A, B) = 1 iff dim(A ∩ B) = i.
pub fn build_q_intersection(
    q: u64,
    i: u32,
    d: u32,
    k: u32,
    n: u32,
    budget_bits: u64,
) -> Result<PoolingMatrix> {
    build_design(
        &DesignParams {
            family: Family::QIntersection,
            q: Some(q),
            n,
            k,
            d,
            i: Some(i),
        },
        budget_bits,
    )
}

/// Builds the set-containment design M(d,k,n): entry (A, B) = 1 iff A ⊆ B.
pub fn build_set_containment(d: u32, k: u32, n: u32, budget_bits: u64) -> Result<PoolingMatrix> {
    build_design(
        &DesignParams {
            family: Family::SetContainment,
            q: None,
            n,
            k,
            d,
            i: None,
        },
        budget_bits,
    )
}

/// Builds the set-intersection design M(i;d,k,n):
/// entry (A, B) = 1 iff |A ∩ B| = i.
pub fn build_set_intersection(
    i: u32,
    d: u32,
    k: u32,
    n: u32,
    budget_bits: u64,
) -> Result<PoolingMatrix> {
    build_design(
        &DesignParams {
            family: Family::SetIntersection,
            q: None,
            n,
            k,
            d,
            i: Some(i),
        },
        budget_bits,
    )
}

/// Builds any family from its parameters, enforcing the bit budget before
/// allocating anything.
pub fn build_design(params: &DesignParams, budget_bits: u64) -> Result<PoolingMatrix> {
    params.validate()?;
    let rows_big = params.row_count()?;
    let cols_big = params.col_count()?;
    let bits = &rows_big * &cols_big;
    if bits > BigUint::from(budget_bits) {
        return Err(Error::ResourceBudgetExceeded {
            rows: rows_big,
            cols: cols_big,
            bits,
            budget: budget_bits,
        });
    }
    let row_count = rows_big.to_u64().expect("within budget");
    let col_count = cols_big.to_u64().expect("within budget");
    let columns = if params.family.is_q() {
        let q = params.q.unwrap();
        let field = FieldSpec::new(q)?;
        if q == 2 && params.n <= 64 && params.d <= 16 {
            build_q_columns_packed(&field, params, row_count, col_count)?
        } else {
            build_q_columns_generic(&field, params, row_count, col_count)?
        }
    } else {
        build_set_columns(params, row_count)
    };
    Ok(PoolingMatrix {
        params: params.clone(),
        row_count,
        col_count,
        columns,
    })
}

fn build_q_columns_generic(
    field: &FieldSpec,
    params: &DesignParams,
    row_count: u64,
    col_count: u64,
) -> Result<Vec<BitVec>> {
    let g_rows = Grassmannian::new(field, params.n, params.d)?;
    let g_cols = Grassmannian::new(field, params.n, params.k)?;
    let rows: Vec<Subspace> = g_rows.iter().collect();
    let mut columns = Vec::with_capacity(col_count as usize);
    for col in g_cols.iter() {
        let mut bits = BitVec::zeros(row_count);
        for (r, row) in rows.iter().enumerate() {
            let hit = match params.i {
                Some(i) => row.intersect_dim(field, &col)? == i,
                None => row.is_contained_in(field, &col)?,
            };
            if hit {
                bits.set(r as u64);
            }
        }
        columns.push(bits);
    }
    Ok(columns)
}

fn build_q_columns_packed(
    field: &FieldSpec,
    params: &DesignParams,
    row_count: u64,
    col_count: u64,
) -> Result<Vec<BitVec>> {
    let g_rows = Grassmannian::new(field, params.n, params.d)?;
    let g_cols = Grassmannian::new(field, params.n, params.k)?;
    let d = params.d as usize;
    // Flat row storage: d packed words per row subspace.
    let mut row_words: Vec<u64> = Vec::with_capacity(row_count as usize * d);
    let mut it = pack2::PackedIter::new(&g_rows)?;
    while let Some((_, words)) = it.next_rows() {
        row_words.extend_from_slice(words);
    }
    // dim(D ∩ B) = d - rank(D mod B); containment means full collapse.
    let want_rank = match params.i {
        Some(i) => params.d - i,
        None => 0,
    };
    let mut columns = Vec::with_capacity(col_count as usize);
    let mut col_it = pack2::PackedIter::new(&g_cols)?;
    while let Some((_, col_rows)) = col_it.next_rows() {
        let packed = pack2::PackedSubspace {
            n: params.n,
            rows: col_rows.to_vec(),
            pivots: col_it.pivots().to_vec(),
        };
        let qm = pack2::QuotientMap::new(&packed);
        let mut bits = BitVec::zeros(row_count);
        for (r, chunk) in row_words.chunks_exact(d).enumerate() {
            if qm.projected_rank(chunk) == want_rank {
                bits.set(r as u64);
            }
        }
        columns.push(bits);
    }
    Ok(columns)
}

/// All k-subsets of {0..n-1} as bitmasks, in lexicographic order of the
/// sorted index tuples.
fn combinations(n: u32, k: u32) -> Vec<u64> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    if k == 0 {
        return vec![0];
    }
    let mut idx: Vec<u32> = (0..k).collect();
    loop {
        out.push(idx.iter().fold(0u64, |m, &c| m | (1 << c)));
        let mut t = k as i64 - 1;
        while t >= 0 && idx[t as usize] == n - (k - t as u32) {
            t -= 1;
        }
        if t < 0 {
            break;
        }
        idx[t as usize] += 1;
        for u in t as usize + 1..k as usize {
            idx[u] = idx[u - 1] + 1;
        }
    }
    out
}

fn build_set_columns(params: &DesignParams, row_count: u64) -> Vec<BitVec> {
    let rows = combinations(params.n, params.d);
    let cols = combinations(params.n, params.k);
    cols.iter()
        .map(|&b| {
            let mut bits = BitVec::zeros(row_count);
            for (r, &a) in rows.iter().enumerate() {
                let hit = match params.i {
                    Some(i) => (a & b).count_ones() == i,
                    None => a & !b == 0,
                };
                if hit {
                    bits.set(r as u64);
                }
            }
            bits
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Interchange format
// ---------------------------------------------------------------------------

pub const FORMAT_V1: &str = "qpool-matrix/v1";

/// Export encodings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    /// Bit-exact versioned JSON; the only importable encoding.
    JsonV1,
    /// `row,col` listing of 1-entries for human inspection; not importable.
    Csv,
}

impl ExportFormat {
    pub fn parse(s: &str) -> Option<ExportFormat> {
        match s {
            "json-v1" => Some(ExportFormat::JsonV1),
            "csv" => Some(ExportFormat::Csv),
            _ => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsRepr {
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<u64>,
    n: u32,
    k: u32,
    d: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    i: Option<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFileV1 {
    format: String,
    family: String,
    params: ParamsRepr,
    row_count: u64,
    col_count: u64,
    row_order: String,
    col_order: String,
    /// CRC-32 of the concatenated column payload bytes.
    checksum: u32,
    /// One lowercase-hex string of ceil(row_count/8) bytes per column;
    /// row r sits in byte r/8 at bit r%8, bit 0 least significant.
    columns: Vec<String>,
}

fn to_hex(bytes: &[u8]) -> String {
    use std::fmt::Write;
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        write!(s, "{b:02x}").unwrap();
    }
    s
}

fn from_hex(s: &str) -> Option<Vec<u8>> {
    if s.len() % 2 != 0 {
        return None;
    }
    let nib = |c: u8| -> Option<u8> {
        match c {
            b'0'..=b'9' => Some(c - b'0'),
            b'a'..=b'f' => Some(c - b'a' + 10),
            _ => None,
        }
    };
    let mut out = Vec::with_capacity(s.len() / 2);
    for pair in s.as_bytes().chunks_exact(2) {
        out.push(nib(pair[0])? << 4 | nib(pair[1])?);
    }
    Some(out)
}

/// Serializes a matrix. `JsonV1` output is byte-identical across runs and
/// platforms for the same matrix.
pub fn export(matrix: &PoolingMatrix, format: ExportFormat) -> Vec<u8> {
    match format {
        ExportFormat::JsonV1 => {
            let mut hasher = crc32fast::Hasher::new();
            let mut columns = Vec::with_capacity(matrix.col_count as usize);
            for col in &matrix.columns {
                let bytes = col.to_bytes();
                hasher.update(&bytes);
                columns.push(to_hex(&bytes));
            }
            let repr = MatrixFileV1 {
                format: FORMAT_V1.to_string(),
                family: matrix.params.family.as_str().to_string(),
                params: ParamsRepr {
                    q: matrix.params.q,
                    n: matrix.params.n,
                    k: matrix.params.k,
                    d: matrix.params.d,
                    i: matrix.params.i,
                },
                row_count: matrix.row_count,
                col_count: matrix.col_count,
                row_order: matrix.params.order_name().to_string(),
                col_order: matrix.params.order_name().to_string(),
                checksum: hasher.finalize(),
                columns,
            };
            let mut out = serde_json::to_vec(&repr).expect("serialization cannot fail");
            out.push(b'\n');
            out
        }
        ExportFormat::Csv => {
            use std::fmt::Write;
            let mut out = String::from("row,col\n");
            for r in 0..matrix.row_count {
                for c in 0..matrix.col_count {
                    if matrix.entry(r, c) {
                        writeln!(out, "{r},{c}").unwrap();
                    }
                }
            }
            out.into_bytes()
        }
    }
}

fn malformed(detail: impl Into<String>) -> Error {
    Error::MalformedFile {
        offset: None,
        detail: detail.into(),
    }
}

/// Parses a `json-v1` matrix file, validating structure, parameter coherence,
/// column payloads, and the checksum.
pub fn import(bytes: &[u8]) -> Result<PoolingMatrix> {
    let repr: MatrixFileV1 = serde_json::from_slice(bytes).map_err(|e| {
        let offset = byte_offset(bytes, e.line(), e.column());
        Error::MalformedFile {
            offset,
            detail: e.to_string(),
        }
    })?;
    if repr.format != FORMAT_V1 {
        return Err(Error::VersionMismatch {
            found: repr.format,
            expected: FORMAT_V1.to_string(),
        });
    }
    let family = Family::parse(&repr.family)
        .ok_or_else(|| malformed(format!("unknown family {:?}", repr.family)))?;
    if family.is_q() && repr.params.q.is_none() {
        return Err(malformed(format!("family {:?} requires params.q", repr.family)));
    }
    if !family.is_q() && repr.params.q.is_some() {
        return Err(malformed(format!("family {:?} does not take params.q", repr.family)));
    }
    if family.is_intersection() && repr.params.i.is_none() {
        return Err(malformed(format!("family {:?} requires params.i", repr.family)));
    }
    if !family.is_intersection() && repr.params.i.is_some() {
        return Err(malformed(format!("family {:?} does not take params.i", repr.family)));
    }
    let params = DesignParams {
        family,
        q: repr.params.q,
        n: repr.params.n,
        k: repr.params.k,
        d: repr.params.d,
        i: repr.params.i,
    };
    params.validate().map_err(|e| malformed(e.to_string()))?;
    let expect_order = params.order_name();
    if repr.row_order != expect_order || repr.col_order != expect_order {
        return Err(malformed(format!(
            "expected row/col order {expect_order:?}, found {:?}/{:?}",
            repr.row_order, repr.col_order
        )));
    }
    let rows_big = params.row_count()?;
    let cols_big = params.col_count()?;
    if BigUint::from(repr.row_count) != rows_big || BigUint::from(repr.col_count) != cols_big {
        return Err(malformed(format!(
            "declared size {}x{} does not match parameters ({rows_big}x{cols_big})",
            repr.row_count, repr.col_count
        )));
    }
    if repr.columns.len() as u64 != repr.col_count {
        return Err(malformed(format!(
            "declared col_count {} but {} column records",
            repr.col_count,
            repr.columns.len()
        )));
    }
    let payload_len = (repr.row_count as usize).div_ceil(8);
    let mut hasher = crc32fast::Hasher::new();
    let mut columns = Vec::with_capacity(repr.columns.len());
    for (c, hex) in repr.columns.iter().enumerate() {
        let bytes =
            from_hex(hex).ok_or_else(|| malformed(format!("column {c} is not lowercase hex")))?;
        if bytes.len() != payload_len {
            return Err(malformed(format!(
                "column {c} has {} payload bytes, expected {payload_len}",
                bytes.len()
            )));
        }
        hasher.update(&bytes);
        let bits = BitVec::from_bytes(repr.row_count, &bytes)
            .ok_or_else(|| malformed(format!("column {c} sets bits past row_count")))?;
        columns.push(bits);
    }
    let computed = hasher.finalize();
    if computed != repr.checksum {
        return Err(Error::ChecksumMismatch {
            declared: repr.checksum,
            computed,
        });
    }
    Ok(PoolingMatrix {
        params,
        row_count: repr.row_count,
        col_count: repr.col_count,
        columns,
    })
}

/// Converts a serde line/column position to a byte offset in the input.
fn byte_offset(bytes: &[u8], line: usize, column: usize) -> Option<usize> {
    if line == 0 {
        return None;
    }
    let mut line_start = 0usize;
    if line > 1 {
        let mut seen = 1usize;
        let mut found = false;
        for (pos, &b) in bytes.iter().enumerate() {
            if b == b'\n' {
                seen += 1;
                if seen == line {
                    line_start = pos + 1;
                    found = true;
                    break;
                }
            }
        }
        if !found {
            return None;
        }
    }
    Some(line_start + column.saturating_sub(1))
}

// ---------------------------------------------------------------------------
// Column oracles: uniform access for dense and virtual designs
// ---------------------------------------------------------------------------

/// Per-tuple result of a private-count query.
#[derive(Clone, Debug)]
pub struct TupleCount {
    pub count: u64,
    /// Row ranks of up to 16 of the private 1-entries, ascending.
    pub private_rows: Vec<u64>,
}

pub(crate) const WITNESS_ROW_CAP: usize = 16;

/// Read access to a design's columns sufficient for disjunctness queries.
pub trait ColumnOracle: Sync {
    fn row_count(&self) -> u64;
    fn col_count(&self) -> u64;

    /// For each tuple (c, others): the number of rows where column c has a 1
    /// and every column in `others` has a 0, plus up to 16 of those rows.
    /// Tuples must be pre-validated (ranks in range, c not in others).
    fn private_counts(&self, tuples: &[(u64, Vec<u64>)], workers: usize) -> Vec<TupleCount>;
}

impl ColumnOracle for PoolingMatrix {
    fn row_count(&self) -> u64 {
        self.row_count
    }

    fn col_count(&self) -> u64 {
        self.col_count
    }

    fn private_counts(&self, tuples: &[(u64, Vec<u64>)], workers: usize) -> Vec<TupleCount> {
        let work = |(c, others): &(u64, Vec<u64>)| {
            let col = self.column(*c);
            let mut union = BitVec::zeros(self.row_count);
            for &o in others {
                union.or_assign(self.column(o));
            }
            TupleCount {
                count: col.andnot_count(&union),
                private_rows: col.andnot_positions(&union, WITNESS_ROW_CAP),
            }
        };
        run_partitioned(tuples, workers, work)
    }
}

/// Runs `work` over `items` partitioned across `workers` threads by index
/// residue; the output order matches the input order regardless of workers.
pub(crate) fn run_partitioned<T: Sync, R: Send>(
    items: &[T],
    workers: usize,
    work: impl Fn(&T) -> R + Sync,
) -> Vec<R> {
    let workers = workers.max(1);
    if workers == 1 || items.len() <= 1 {
        return items.iter().map(&work).collect();
    }
    let mut gathered: Vec<Vec<(usize, R)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let work = &work;
                scope.spawn(move || {
                    let mut local: Vec<(usize, R)> = Vec::new();
                    let mut idx = w;
                    while idx < items.len() {
                        local.push((idx, work(&items[idx])));
                        idx += workers;
                    }
                    local
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    let mut slots: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
    for chunk in gathered.drain(..) {
        for (idx, r) in chunk {
            slots[idx] = Some(r);
        }
    }
    slots.into_iter().map(|s| s.unwrap()).collect()
}

/// A design accessed without materializing the matrix: columns are unranked
/// on demand and private counts stream the full row enumeration per tuple.
pub struct VirtualDesign {
    params: DesignParams,
    field: Option<FieldSpec>,
    row_count: u64,
    col_count: u64,
}

impl VirtualDesign {
    pub fn new(params: DesignParams) -> Result<VirtualDesign> {
        params.validate()?;
        let rows_big = params.row_count()?;
        let row_count = rows_big
            .to_u64()
            .ok_or(Error::EnumerationOverflow { count: rows_big })?;
        let cols_big = params.col_count()?;
        let col_count = cols_big
            .to_u64()
            .ok_or(Error::EnumerationOverflow { count: cols_big })?;
        let field = params.q.map(FieldSpec::new).transpose()?;
        Ok(VirtualDesign {
            params,
            field,
            row_count,
            col_count,
        })
    }

    pub fn params(&self) -> &DesignParams {
        &self.params
    }

    /// Whether the packed q=2 row-streaming kernel applies: basis rows fit a
    /// machine word each and row subspaces fit the rank kernel.
    fn packable(&self) -> bool {
        self.params.q == Some(2) && self.params.n <= 64 && self.params.d <= 16
    }

    fn q_incident(&self, field: &FieldSpec, row: &Subspace, col: &Subspace) -> bool {
        match self.params.i {
            Some(i) => row.intersect_dim(field, col).expect("same ambient space") == i,
            None => row.is_contained_in(field, col).expect("same ambient space"),
        }
    }

    fn private_counts_q_generic(
        &self,
        tuples: &[(u64, Vec<u64>)],
        workers: usize,
    ) -> Vec<TupleCount> {
        let field = self.field.as_ref().unwrap();
        let g_cols =
            Grassmannian::new(field, self.params.n, self.params.k).expect("validated params");
        let work = |(c, others): &(u64, Vec<u64>)| {
            let col = g_cols.unrank(*c).expect("validated rank");
            let other_subs: Vec<Subspace> = others
                .iter()
                .map(|&o| g_cols.unrank(o).expect("validated rank"))
                .collect();
            let g_rows =
                Grassmannian::new(field, self.params.n, self.params.d).expect("validated params");
            let mut count = 0u64;
            let mut rows = Vec::new();
            for (r, d_sub) in g_rows.iter().enumerate() {
                if !self.q_incident(field, &d_sub, &col) {
                    continue;
                }
                if other_subs.iter().all(|o| !self.q_incident(field, &d_sub, o)) {
                    if rows.len() < WITNESS_ROW_CAP {
                        rows.push(r as u64);
                    }
                    count += 1;
                }
            }
            TupleCount {
                count,
                private_rows: rows,
            }
        };
        run_partitioned(tuples, workers, work)
    }

    /// Packed q=2 kernel: each worker streams the row enumeration once and
    /// checks all of its tuples per row.
    fn private_counts_q_packed(
        &self,
        tuples: &[(u64, Vec<u64>)],
        workers: usize,
    ) -> Vec<TupleCount> {
        let field = self.field.as_ref().unwrap();
        let n = self.params.n;
        let d = self.params.d;
        let g_cols = Grassmannian::new(field, n, self.params.k).expect("validated params");
        let want_rank = match self.params.i {
            Some(i) => d - i,
            None => 0,
        };
        let to_map = |rank: u64| {
            let sub = g_cols.unrank(rank).expect("validated rank");
            let packed = pack2::PackedSubspace::from_subspace(&sub).expect("q=2, n<=64");
            pack2::QuotientMap::new(&packed)
        };
        let workers = workers.max(1);
        let chunks: Vec<Vec<usize>> = (0..workers)
            .map(|w| (w..tuples.len()).step_by(workers).collect())
            .collect();
        let run_chunk = |mine: &[usize]| -> Vec<(usize, TupleCount)> {
            let maps: Vec<(pack2::QuotientMap, Vec<pack2::QuotientMap>)> = mine
                .iter()
                .map(|&idx| {
                    let (c, others) = &tuples[idx];
                    (to_map(*c), others.iter().map(|&o| to_map(o)).collect())
                })
                .collect();
            let mut counts = vec![0u64; mine.len()];
            let mut rows_out: Vec<Vec<u64>> = vec![Vec::new(); mine.len()];
            let g_rows = Grassmannian::new(field, n, d).expect("validated params");
            let mut it = pack2::PackedIter::new(&g_rows).expect("q=2, n<=64");
            while let Some((rank, words)) = it.next_rows() {
                for (t, (col_map, other_maps)) in maps.iter().enumerate() {
                    if col_map.projected_rank(words) != want_rank {
                        continue;
                    }
                    if other_maps.iter().all(|o| o.projected_rank(words) != want_rank) {
                        if rows_out[t].len() < WITNESS_ROW_CAP {
                            rows_out[t].push(rank);
                        }
                        counts[t] += 1;
                    }
                }
            }
            mine.iter()
                .zip(counts.into_iter().zip(rows_out))
                .map(|(&idx, (count, private_rows))| {
                    (
                        idx,
                        TupleCount {
                            count,
                            private_rows,
                        },
                    )
                })
                .collect()
        };
        let mut slots: Vec<Option<TupleCount>> = (0..tuples.len()).map(|_| None).collect();
        if workers == 1 {
            for (idx, tc) in run_chunk(&chunks[0]) {
                slots[idx] = Some(tc);
            }
        } else {
            let gathered: Vec<Vec<(usize, TupleCount)>> = std::thread::scope(|scope| {
                let handles: Vec<_> = chunks
                    .iter()
                    .map(|mine| {
                        let run_chunk = &run_chunk;
                        scope.spawn(move || run_chunk(mine))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("worker panicked"))
                    .collect()
            });
            for chunk in gathered {
                for (idx, tc) in chunk {
                    slots[idx] = Some(tc);
                }
            }
        }
        slots.into_iter().map(|s| s.unwrap()).collect()
    }

    fn private_counts_set(&self, tuples: &[(u64, Vec<u64>)], workers: usize) -> Vec<TupleCount> {
        let cols = combinations(self.params.n, self.params.k);
        let rows = combinations(self.params.n, self.params.d);
        let incident = |a: u64, b: u64| -> bool {
            match self.params.i {
                Some(i) => (a & b).count_ones() == i,
                None => a & !b == 0,
            }
        };
        let work = |(c, others): &(u64, Vec<u64>)| {
            let col = cols[*c as usize];
            let other_masks: Vec<u64> = others.iter().map(|&o| cols[o as usize]).collect();
            let mut count = 0u64;
            let mut out_rows = Vec::new();
            for (r, &a) in rows.iter().enumerate() {
                if incident(a, col) && other_masks.iter().all(|&o| !incident(a, o)) {
                    if out_rows.len() < WITNESS_ROW_CAP {
                        out_rows.push(r as u64);
                    }
                    count += 1;
                }
            }
            TupleCount {
                count,
                private_rows: out_rows,
            }
        };
        run_partitioned(tuples, workers, work)
    }
}

impl ColumnOracle for VirtualDesign {
    fn row_count(&self) -> u64 {
        self.row_count
    }

    fn col_count(&self) -> u64 {
        self.col_count
    }

    fn private_counts(&self, tuples: &[(u64, Vec<u64>)], workers: usize) -> Vec<TupleCount> {
        if self.params.family.is_q() {
            if self.packable() {
                self.private_counts_q_packed(tuples, workers)
            } else {
                self.private_counts_q_generic(tuples, workers)
            }
        } else {
            self.private_counts_set(tuples, workers)
        }
    }
}
