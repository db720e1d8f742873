//! Index transformers tabulated by provision tensors.
//!
//! A provision tensor of shape `S1 + (L,)` encodes a map from indices of `S1`
//! to length-`L` indices: the last axis at `I` holds `T(I)`. An x-transformer
//! is the composition `T(I) = p(f(p1(I)) + p2(I))` of an inner provision `f`
//! with three picks; [`compose_provision`] tabulates it.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::tensor::{Index, IntTensor, Pick, Shape, Tensor};

#[derive(Debug, Clone, PartialEq)]
pub struct ProvisionTensor {
    table: IntTensor,
    target_shape: Shape,
}

/// One table entry outside the declared target shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub index: Index,
    pub axis: usize,
    pub value: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn into_result(self, target: &Shape) -> Result<()> {
        match self.violations.first() {
            None => Ok(()),
            Some(v) => Err(Error::Validation(format!(
                "entry {} on axis {} at source index {} is outside target shape {:?} ({} violations)",
                v.value,
                v.axis,
                v.index,
                target.dims(),
                self.violations.len()
            ))),
        }
    }
}

impl ProvisionTensor {
    /// Wraps a table of shape `S1 + (rank(target_shape),)`. Entries are not
    /// bounds-checked here; see [`ProvisionTensor::validate`].
    pub fn new(table: IntTensor, target_shape: impl Into<Shape>) -> Result<Self> {
        let target_shape = target_shape.into();
        let dims = table.shape().dims();
        match dims.last() {
            None => Err(Error::argument("provision table must have rank >= 1")),
            Some(&l) if l != target_shape.rank() => Err(Error::shape_mismatch(format!(
                "provision rows have length {l} but target shape {:?} has rank {}",
                target_shape.dims(),
                target_shape.rank()
            ))),
            Some(_) => Ok(ProvisionTensor { table, target_shape }),
        }
    }

    /// Uses the smallest target shape that holds every entry (`max + 1` per axis).
    pub fn with_bounding_target(table: IntTensor) -> Result<Self> {
        let l = *table.shape().dims().last().ok_or_else(|| Error::argument("provision table must have rank >= 1"))?;
        let mut extents = vec![0usize; l];
        if l > 0 {
            for row in table.data().chunks(l) {
                for (e, &v) in extents.iter_mut().zip(row) {
                    *e = (*e).max(usize::try_from(v.saturating_add(1)).unwrap_or(0));
                }
            }
        }
        Self::new(table, extents)
    }

    /// Provision of the identity on `shape`.
    pub fn identity(shape: impl Into<Shape>) -> Self {
        let shape: Shape = shape.into();
        let k = shape.rank();
        let table_shape = shape.concat(&Shape::new([k]));
        let mut data = Vec::with_capacity(table_shape.size());
        for i in shape.indices() {
            data.extend(i.coords().iter().map(|&c| c as i64));
        }
        ProvisionTensor { table: Tensor::from_vec(table_shape, data).expect("sized"), target_shape: shape }
    }

    pub fn table(&self) -> &IntTensor {
        &self.table
    }

    pub fn into_table(self) -> IntTensor {
        self.table
    }

    pub fn source_shape(&self) -> Shape {
        let dims = self.table.shape().dims();
        Shape::from(&dims[..dims.len() - 1])
    }

    pub fn target_shape(&self) -> &Shape {
        &self.target_shape
    }

    pub fn target_rank(&self) -> usize {
        self.target_shape.rank()
    }

    /// Number of source indices (rows).
    pub fn rows(&self) -> usize {
        self.source_shape().size()
    }

    /// Raw table row at a row-major source offset.
    pub fn row(&self, flat: usize) -> &[i64] {
        let l = self.target_rank();
        &self.table.data()[flat * l..(flat + 1) * l]
    }

    pub fn raw_transform(&self, index: &Index) -> Result<&[i64]> {
        let flat = self.source_shape().offset(index)?;
        Ok(self.row(flat))
    }

    /// `T(I)`, read from the last axis of the table at `I`.
    pub fn transform(&self, index: &Index) -> Result<Index> {
        let row = self.raw_transform(index)?;
        row_to_index(row)
    }

    /// Every `(I, axis)` whose entry falls outside the target shape.
    pub fn validate(&self) -> ValidationReport {
        let l = self.target_rank();
        let dims = self.target_shape.dims();
        let mut violations = Vec::new();
        if l == 0 {
            return ValidationReport { violations };
        }
        for (flat, row) in self.table.data().chunks(l).enumerate() {
            for (axis, (&v, &m)) in row.iter().zip(dims).enumerate() {
                if v < 0 || v as u64 >= m as u64 {
                    violations.push(Violation { index: unravel(&self.source_shape(), flat), axis, value: v });
                }
            }
        }
        ValidationReport { violations }
    }

    pub fn ensure_valid(&self) -> Result<()> {
        self.validate().into_result(&self.target_shape)
    }

    /// Target offset of every row, in row-major source order. Requires a valid table.
    pub(crate) fn target_offsets(&self) -> Vec<usize> {
        let l = self.target_rank();
        let dims = self.target_shape.dims();
        let rows = self.rows();
        if l == 0 {
            return vec![0; rows];
        }
        self.table
            .data()
            .chunks(l)
            .map(|row| row.iter().zip(dims).fold(0usize, |acc, (&v, &m)| acc * m + v as usize))
            .collect()
    }

    /// `{T(I) : I in S1}`.
    pub fn image(&self) -> Result<BTreeSet<Index>> {
        self.ensure_valid()?;
        (0..self.rows()).map(|f| row_to_index(self.row(f))).collect()
    }
}

pub(crate) fn row_to_index(row: &[i64]) -> Result<Index> {
    row.iter()
        .map(|&v| usize::try_from(v).map_err(|_| Error::Validation(format!("negative coordinate {v}"))))
        .collect::<Result<Vec<_>>>()
        .map(Index::from)
}

pub(crate) fn unravel(shape: &Shape, mut flat: usize) -> Index {
    let dims = shape.dims();
    let mut coords = vec![0; dims.len()];
    for (c, &m) in coords.iter_mut().zip(dims).rev() {
        *c = flat % m;
        flat /= m;
    }
    Index::from(coords)
}

pub fn transform(e: &ProvisionTensor, index: &Index) -> Result<Index> {
    e.transform(index)
}

pub fn validate_provision(e: &ProvisionTensor) -> ValidationReport {
    e.validate()
}

pub fn image(e: &ProvisionTensor) -> Result<BTreeSet<Index>> {
    e.image()
}

/// Representation `T(I) = out_pick(inner(inner_pick(I)) + pass_pick(I))`.
#[derive(Debug, Clone, PartialEq)]
pub struct XTransformerSpec {
    pub inner: ProvisionTensor,
    pub inner_pick: Pick,
    pub pass_pick: Pick,
    pub out_pick: Pick,
    pub source_shape: Shape,
    pub target_shape: Shape,
}

impl XTransformerSpec {
    /// The representation `p = id, p1 = id, p2 = []` of a provision.
    pub fn trivial(inner: ProvisionTensor) -> Self {
        let source_shape = inner.source_shape();
        let target_shape = inner.target_shape().clone();
        XTransformerSpec {
            inner_pick: Pick::identity(source_shape.rank()),
            pass_pick: Pick::new([]),
            out_pick: Pick::identity(target_shape.rank()),
            inner,
            source_shape,
            target_shape,
        }
    }

    pub fn check(&self) -> Result<()> {
        let k = self.source_shape.rank();
        self.inner_pick.check_applicable(k)?;
        self.pass_pick.check_applicable(k)?;
        if self.inner_pick.len() != self.inner.source_shape().rank() {
            return Err(Error::argument(format!(
                "inner_pick has length {} but inner source rank is {}",
                self.inner_pick.len(),
                self.inner.source_shape().rank()
            )));
        }
        self.out_pick.check_applicable(self.inner.target_rank() + self.pass_pick.len())?;
        if self.out_pick.len() != self.target_shape.rank() {
            return Err(Error::argument(format!(
                "out_pick has length {} but target rank is {}",
                self.out_pick.len(),
                self.target_shape.rank()
            )));
        }
        Ok(())
    }
}

/// Tabulates an x-transformer into a provision of shape `S1 + (rank(S2),)`.
pub fn compose_provision(spec: &XTransformerSpec) -> Result<ProvisionTensor> {
    spec.check()?;
    let inner_source = spec.inner.source_shape();
    let out_len = spec.target_shape.rank();
    let mut data = Vec::with_capacity(spec.source_shape.size() * out_len);
    let mut joined: Vec<i64> = Vec::with_capacity(spec.inner.target_rank() + spec.pass_pick.len());
    for i in spec.source_shape.indices() {
        let inner_index = spec.inner_pick.apply_unchecked(i.coords());
        let flat = inner_source.offset(&inner_index)?;
        joined.clear();
        joined.extend_from_slice(spec.inner.row(flat));
        joined.extend(spec.pass_pick.values().iter().map(|&v| i.coords()[v] as i64));
        data.extend(spec.out_pick.values().iter().map(|&v| joined[v]));
    }
    let table = Tensor::from_vec(spec.source_shape.concat(&Shape::new([out_len])), data)?;
    ProvisionTensor::new(table, spec.target_shape.clone())
}

/// `T(I) = I[..dim] + (index[I],) + I[dim+1..]`.
pub fn torch_transformer(index: &IntTensor, dim: usize, target_shape: &Shape) -> Result<ProvisionTensor> {
    let rank = index.rank();
    if dim >= rank {
        return Err(Error::argument(format!("dim {dim} out of range for index of rank {rank}")));
    }
    if target_shape.rank() != rank {
        return Err(Error::argument(format!("index rank {rank} does not match target rank {}", target_shape.rank())));
    }
    let table_shape = index.shape().concat(&Shape::new([rank]));
    let mut data = Vec::with_capacity(table_shape.size());
    for (i, &v) in index.shape().indices().zip(index.data()) {
        data.extend(i.coords().iter().enumerate().map(|(a, &c)| if a == dim { v } else { c as i64 }));
    }
    let provision = ProvisionTensor::new(Tensor::from_vec(table_shape, data)?, target_shape.clone())?;
    provision.ensure_valid()?;
    Ok(provision)
}

/// `tensor_scatter_nd_update` transformer: `T(I) = indices[I[..b]] + I[b..]`
/// with `b = rank(indices) - 1`.
pub fn tf_transformer(indices: &IntTensor, target_shape: &Shape) -> Result<XTransformerSpec> {
    let dims = indices.shape().dims();
    let Some((&q, batch)) = dims.split_last() else {
        return Err(Error::argument("indices must have rank >= 1"));
    };
    let r = target_shape.rank();
    if q > r {
        return Err(Error::argument(format!("index depth {q} exceeds target rank {r}")));
    }
    let inner = ProvisionTensor::new(indices.clone(), Shape::from(&target_shape.dims()[..q]))?;
    inner.ensure_valid()?;
    let b = batch.len();
    let source_shape = Shape::from(batch).concat(&Shape::from(&target_shape.dims()[q..]));
    let k = source_shape.rank();
    Ok(XTransformerSpec {
        inner,
        inner_pick: Pick::range(0, b),
        pass_pick: Pick::range(b, k),
        out_pick: Pick::identity(r),
        source_shape,
        target_shape: target_shape.clone(),
    })
}
