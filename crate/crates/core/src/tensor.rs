//! Shapes, indices, dense row-major tensors and picks.
//!
//! A tensor of shape `(m_0, .., m_{k-1})` is a total function from the
//! rectangular index set `N_{m_0} x .. x N_{m_{k-1}}` to scalars. Storage is
//! always dense and row-major (last axis fastest); every traversal order in
//! this crate is stated against that layout.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// Extent per axis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Shape(Vec<usize>);

impl Shape {
    pub fn new(dims: impl Into<Vec<usize>>) -> Self {
        Shape(dims.into())
    }

    pub fn scalar() -> Self {
        Shape(Vec::new())
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    /// Product of extents; `1` for rank 0.
    pub fn size(&self) -> usize {
        self.0.iter().product()
    }

    /// Row-major strides, `stride[k-1] = 1`.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.0.len()];
        for i in (0..self.0.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.0[i + 1];
        }
        strides
    }

    pub fn contains(&self, index: &Index) -> bool {
        index.len() == self.rank() && index.0.iter().zip(&self.0).all(|(&c, &m)| c < m)
    }

    /// Flat row-major offset of a valid index.
    pub fn offset(&self, index: &Index) -> Result<usize> {
        if !self.contains(index) {
            return Err(Error::InvalidIndex { index: index.clone(), shape: self.0.clone() });
        }
        Ok(self.offset_unchecked(index.coords()))
    }

    pub(crate) fn offset_unchecked(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.0).fold(0, |acc, (&c, &m)| acc * m + c)
    }

    pub fn indices(&self) -> IndexIter {
        IndexIter::new(self.clone())
    }

    /// Sub-shape made of the given axes, in order.
    pub fn select(&self, axes: &[usize]) -> Shape {
        Shape(axes.iter().map(|&a| self.0[a]).collect())
    }

    pub fn concat(&self, other: &Shape) -> Shape {
        let mut dims = self.0.clone();
        dims.extend_from_slice(&other.0);
        Shape(dims)
    }
}

impl From<Vec<usize>> for Shape {
    fn from(dims: Vec<usize>) -> Self {
        Shape(dims)
    }
}

impl From<&[usize]> for Shape {
    fn from(dims: &[usize]) -> Self {
        Shape(dims.to_vec())
    }
}

impl<const N: usize> From<[usize; N]> for Shape {
    fn from(dims: [usize; N]) -> Self {
        Shape(dims.to_vec())
    }
}

pub fn size(shape: &Shape) -> usize {
    shape.size()
}

/// A tuple of coordinates. Concatenation follows python tuple `+`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Index(Vec<usize>);

impl Index {
    pub fn new(coords: impl Into<Vec<usize>>) -> Self {
        Index(coords.into())
    }

    pub fn empty() -> Self {
        Index(Vec::new())
    }

    pub fn coords(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_coords(self) -> Vec<usize> {
        self.0
    }

    pub fn concat(&self, other: &Index) -> Index {
        let mut coords = Vec::with_capacity(self.len() + other.len());
        coords.extend_from_slice(&self.0);
        coords.extend_from_slice(&other.0);
        Index(coords)
    }
}

impl From<Vec<usize>> for Index {
    fn from(coords: Vec<usize>) -> Self {
        Index(coords)
    }
}

impl<const N: usize> From<[usize; N]> for Index {
    fn from(coords: [usize; N]) -> Self {
        Index(coords.to_vec())
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

pub fn concat_index(a: &Index, b: &Index) -> Index {
    a.concat(b)
}

/// Row-major odometer over every valid index of a shape.
///
/// Zero-size shapes yield nothing; rank-0 shapes yield the single empty index.
#[derive(Debug, Clone)]
pub struct IndexIter {
    shape: Shape,
    next: Option<Vec<usize>>,
}

impl IndexIter {
    fn new(shape: Shape) -> Self {
        let next = if shape.size() == 0 { None } else { Some(vec![0; shape.rank()]) };
        IndexIter { shape, next }
    }
}

impl Iterator for IndexIter {
    type Item = Index;

    fn next(&mut self) -> Option<Index> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let dims = self.shape.dims();
        let mut axis = dims.len();
        let mut carried_out = true;
        while axis > 0 {
            axis -= 1;
            succ[axis] += 1;
            if succ[axis] < dims[axis] {
                carried_out = false;
                break;
            }
            succ[axis] = 0;
        }
        if !carried_out {
            self.next = Some(succ);
        }
        Some(Index(current))
    }
}

pub fn index_iter(shape: &Shape) -> IndexIter {
    shape.indices()
}

/// Row-major visit of `(flat offset, coords)` without allocating per index.
pub(crate) fn for_each_coords(shape: &Shape, mut f: impl FnMut(usize, &[usize])) {
    let dims = shape.dims();
    let total = shape.size();
    let mut coords = vec![0usize; dims.len()];
    for flat in 0..total {
        f(flat, &coords);
        for axis in (0..dims.len()).rev() {
            coords[axis] += 1;
            if coords[axis] < dims[axis] {
                break;
            }
            coords[axis] = 0;
        }
    }
}

/// Coordinate selection: `pick(I)[i] = I[values[i]]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Pick(Vec<usize>);

impl Pick {
    pub fn new(values: impl Into<Vec<usize>>) -> Self {
        Pick(values.into())
    }

    /// Rejects negative positions.
    pub fn from_signed(values: &[i64]) -> Result<Self> {
        values
            .iter()
            .map(|&v| usize::try_from(v).map_err(|_| Error::NegativePick(v)))
            .collect::<Result<Vec<_>>>()
            .map(Pick)
    }

    pub fn identity(n: usize) -> Self {
        Pick((0..n).collect())
    }

    /// `[h, h+1, .., k-1]`.
    pub fn range(h: usize, k: usize) -> Self {
        Pick((h..k).collect())
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Whether the pick can be applied to indices of length `len`.
    pub fn applicable_to(&self, len: usize) -> bool {
        self.0.iter().all(|&v| v < len)
    }

    pub fn check_applicable(&self, len: usize) -> Result<()> {
        match self.0.iter().find(|&&v| v >= len) {
            Some(&value) => Err(Error::PickRange { value, len }),
            None => Ok(()),
        }
    }

    pub fn apply(&self, index: &Index) -> Result<Index> {
        self.check_applicable(index.len())?;
        Ok(self.apply_unchecked(index.coords()))
    }

    pub(crate) fn apply_unchecked(&self, coords: &[usize]) -> Index {
        Index(self.0.iter().map(|&v| coords[v]).collect())
    }

    pub fn is_smooth(&self) -> bool {
        self.0.windows(2).all(|w| w[1] == w[0] + 1)
    }

    pub fn image(&self) -> BTreeSet<usize> {
        self.0.iter().copied().collect()
    }

    /// Whether the image is exactly `{0, .., n-1}`.
    pub fn is_shuffle(&self, n: usize) -> bool {
        self.0.len() == n && self.image().into_iter().eq(0..n)
    }

    /// `(self o inner)(j) = self(inner(j))`.
    pub fn compose(&self, inner: &Pick) -> Result<Pick> {
        inner.check_applicable(self.0.len())?;
        Ok(Pick(inner.0.iter().map(|&j| self.0[j]).collect()))
    }
}

pub fn apply_pick(p: &Pick, index: &Index) -> Result<Index> {
    p.apply(index)
}

pub fn is_smooth(p: &Pick) -> bool {
    p.is_smooth()
}

pub fn pick_image(p: &Pick) -> BTreeSet<usize> {
    p.image()
}

pub fn is_shuffle(p: &Pick, n: usize) -> bool {
    p.is_shuffle(n)
}

/// Dense row-major tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    shape: Shape,
    data: Vec<T>,
}

pub type RealTensor = Tensor<f64>;
pub type IntTensor = Tensor<i64>;

impl<T: Copy> Tensor<T> {
    pub fn from_vec(shape: impl Into<Shape>, data: Vec<T>) -> Result<Self> {
        let shape = shape.into();
        if data.len() != shape.size() {
            return Err(Error::shape_mismatch(format!(
                "shape {:?} needs {} elements, got {}",
                shape.dims(),
                shape.size(),
                data.len()
            )));
        }
        Ok(Tensor { shape, data })
    }

    pub fn full(shape: impl Into<Shape>, value: T) -> Self {
        let shape = shape.into();
        let data = vec![value; shape.size()];
        Tensor { shape, data }
    }

    /// Builds a tensor by evaluating `f` at every index in row-major order.
    pub fn from_fn(shape: impl Into<Shape>, mut f: impl FnMut(&Index) -> T) -> Self {
        let shape = shape.into();
        let data = shape.indices().map(|i| f(&i)).collect();
        Tensor { shape, data }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.rank()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn get(&self, index: &Index) -> Result<T> {
        Ok(self.data[self.shape.offset(index)?])
    }

    pub fn set(&mut self, index: &Index, value: T) -> Result<()> {
        let off = self.shape.offset(index)?;
        self.data[off] = value;
        Ok(())
    }

    pub fn map<U: Copy>(&self, f: impl FnMut(T) -> U) -> Tensor<U> {
        Tensor { shape: self.shape.clone(), data: self.data.iter().copied().map(f).collect() }
    }

    /// `G[I_0, .., I_{k-1}] = E[p_0(I_0), .., p_{k-1}(I_{k-1})]`, one pick per axis.
    pub fn slice(&self, picks: &[Pick]) -> Result<Self> {
        if picks.len() != self.rank() {
            return Err(Error::Rank { expected: self.rank(), actual: picks.len() });
        }
        for (pick, &extent) in picks.iter().zip(self.shape.dims()) {
            pick.check_applicable(extent)?;
        }
        let out_shape = Shape(picks.iter().map(Pick::len).collect());
        let data = out_shape
            .indices()
            .map(|g| {
                let src: Vec<usize> = g.coords().iter().zip(picks).map(|(&c, p)| p.values()[c]).collect();
                self.data[self.shape.offset_unchecked(&src)]
            })
            .collect();
        Ok(Tensor { shape: out_shape, data })
    }

    /// `H[J] = E[prefix + J]` over the trailing axes.
    pub fn subtensor(&self, prefix: &Index) -> Result<Self> {
        let k = prefix.len();
        let dims = self.shape.dims();
        if k > dims.len() || prefix.coords().iter().zip(dims).any(|(&c, &m)| c >= m) {
            return Err(Error::InvalidIndex { index: prefix.clone(), shape: dims.to_vec() });
        }
        let trailing = Shape(dims[k..].to_vec());
        let block = trailing.size();
        let mut padded = prefix.coords().to_vec();
        padded.resize(dims.len(), 0);
        let start = self.shape.offset_unchecked(&padded);
        Ok(Tensor { shape: trailing, data: self.data[start..start + block].to_vec() })
    }
}

pub fn slice<T: Copy>(e: &Tensor<T>, picks: &[Pick]) -> Result<Tensor<T>> {
    e.slice(picks)
}

pub fn subtensor<T: Copy>(e: &Tensor<T>, prefix: &Index) -> Result<Tensor<T>> {
    e.subtensor(prefix)
}

/// All indices of `shape` that agree with `index` under `pick`.
pub fn index_class(shape: &Shape, pick: &Pick, index: &Index) -> Result<BTreeSet<Index>> {
    if !shape.contains(index) {
        return Err(Error::InvalidIndex { index: index.clone(), shape: shape.dims().to_vec() });
    }
    let key = pick.apply(index)?;
    Ok(shape.indices().filter(|k| pick.apply_unchecked(k.coords()) == key).collect())
}

/// Rank-1 integer tensor to tuple.
pub fn to_tuple(t: &IntTensor) -> Result<Index> {
    if t.rank() != 1 {
        return Err(Error::Rank { expected: 1, actual: t.rank() });
    }
    t.data()
        .iter()
        .map(|&v| usize::try_from(v).map_err(|_| Error::argument(format!("negative coordinate {v}"))))
        .collect::<Result<Vec<_>>>()
        .map(Index)
}

/// Tuple to rank-1 integer tensor.
pub fn to_tensor(index: &Index) -> IntTensor {
    Tensor { shape: Shape(vec![index.len()]), data: index.0.iter().map(|&c| c as i64).collect() }
}
