//! Scattering execution.
//!
//! A scattering `(T, A, X)` writes every update `A[I]` to `T(I)` in a copy of
//! the background `X`; cells outside the image of `T` keep their background
//! value. When several sources share a target the [`CollisionPolicy`] decides
//! the result, always relative to row-major order over the source shape.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::analysis::max_sliceable_suffix;
use crate::error::{Error, Result};
use crate::tensor::{index_class, Index, IntTensor, Pick, Tensor};
use crate::transformer::{
    compose_provision, tf_transformer, torch_transformer, unravel, ProvisionTensor, XTransformerSpec,
};

/// Element types the engine can reduce.
pub trait Scalar: Copy + PartialEq + fmt::Debug + Send + Sync + 'static {
    fn add(self, other: Self) -> Self;
    fn mul(self, other: Self) -> Self;
}

impl Scalar for f64 {
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn mul(self, other: Self) -> Self {
        self * other
    }
}

impl Scalar for i64 {
    fn add(self, other: Self) -> Self {
        self.wrapping_add(other)
    }
    fn mul(self, other: Self) -> Self {
        self.wrapping_mul(other)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CollisionPolicy {
    /// Any target written twice is an error.
    Error,
    FirstWins,
    #[default]
    LastWins,
    /// Sum of the colliding updates; the background value is not included.
    Sum,
    /// Product of the colliding updates; the background value is not included.
    Prod,
}

impl CollisionPolicy {
    pub const ALL: [CollisionPolicy; 5] = [
        CollisionPolicy::Error,
        CollisionPolicy::FirstWins,
        CollisionPolicy::LastWins,
        CollisionPolicy::Sum,
        CollisionPolicy::Prod,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CollisionPolicy::Error => "error",
            CollisionPolicy::FirstWins => "first",
            CollisionPolicy::LastWins => "last",
            CollisionPolicy::Sum => "sum",
            CollisionPolicy::Prod => "prod",
        }
    }

    /// Folds one update into a cell that has already been written `hits` times.
    #[inline]
    fn combine<T: Scalar>(self, cell: &mut T, update: T, hits: u32) -> bool {
        match (self, hits) {
            (_, 0) | (CollisionPolicy::LastWins, _) => *cell = update,
            (CollisionPolicy::FirstWins, _) => {}
            (CollisionPolicy::Sum, _) => *cell = cell.add(update),
            (CollisionPolicy::Prod, _) => *cell = cell.mul(update),
            (CollisionPolicy::Error, _) => return false,
        }
        true
    }
}

impl fmt::Display for CollisionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CollisionPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CollisionPolicy::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::argument(format!("unknown policy {s:?}")))
    }
}

/// The triple `(T, A, X)`.
#[derive(Debug, Clone, Copy)]
pub struct Scattering<'a, T> {
    transformer: &'a ProvisionTensor,
    updates: &'a Tensor<T>,
    background: &'a Tensor<T>,
}

impl<'a, T: Scalar> Scattering<'a, T> {
    pub fn new(transformer: &'a ProvisionTensor, updates: &'a Tensor<T>, background: &'a Tensor<T>) -> Result<Self> {
        let source = transformer.source_shape();
        if updates.shape() != &source {
            return Err(Error::shape_mismatch(format!(
                "updates shape {:?} differs from transformer source shape {:?}",
                updates.shape().dims(),
                source.dims()
            )));
        }
        if background.shape() != transformer.target_shape() {
            return Err(Error::shape_mismatch(format!(
                "background shape {:?} differs from transformer target shape {:?}",
                background.shape().dims(),
                transformer.target_shape().dims()
            )));
        }
        Ok(Scattering { transformer, updates, background })
    }

    pub fn transformer(&self) -> &ProvisionTensor {
        self.transformer
    }

    pub fn updates(&self) -> &Tensor<T> {
        self.updates
    }

    pub fn background(&self) -> &Tensor<T> {
        self.background
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ScatterReport {
    /// Distinct target cells written.
    pub writes: usize,
    /// Target cells reached by two or more sources.
    pub colliding_groups: usize,
    pub uncovered_targets: usize,
    pub fast_path_used: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecPath {
    /// Slice copies when the transformer has an untouched suffix, otherwise element-wise.
    #[default]
    Auto,
    Elementwise,
    SliceCopy,
}

/// Contiguous-run layout of a sliceable transformer.
///
/// Each run covers the trailing `run_axes` source axes and lands contiguously
/// in the target because those axes pass through and all but the outermost of
/// them have equal extents on both sides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlicePlan {
    suffix: usize,
    run_axes: usize,
    run: usize,
}

impl SlicePlan {
    pub fn for_provision(e: &ProvisionTensor) -> Option<Self> {
        let suffix = max_sliceable_suffix(e).suffix;
        Self::with_suffix(e, suffix)
    }

    fn with_suffix(e: &ProvisionTensor, suffix: usize) -> Option<Self> {
        if suffix == 0 {
            return None;
        }
        let s1 = e.source_shape();
        let src = s1.dims();
        let dst = e.target_shape().dims();
        let (k, l) = (src.len(), dst.len());
        let mut run_axes = 1;
        while run_axes < suffix && src[k - run_axes] == dst[l - run_axes] {
            run_axes += 1;
        }
        let run = src[k - run_axes..].iter().product();
        Some(SlicePlan { suffix, run_axes, run })
    }

    pub fn suffix(&self) -> usize {
        self.suffix
    }

    /// Elements per contiguous copy.
    pub fn run_len(&self) -> usize {
        self.run
    }

    pub fn run_axes(&self) -> usize {
        self.run_axes
    }
}

fn finish_report(hits: &[u32], weight: usize, total: usize, fast_path_used: bool) -> ScatterReport {
    let writes = hits.iter().filter(|&&h| h > 0).count() * weight;
    let colliding_groups = hits.iter().filter(|&&h| h > 1).count() * weight;
    ScatterReport { writes, colliding_groups, uncovered_targets: total - writes, fast_path_used }
}

fn scatter_elementwise<T: Scalar>(
    s: &Scattering<'_, T>,
    policy: CollisionPolicy,
) -> Result<(Tensor<T>, ScatterReport)> {
    let target = s.transformer.target_shape();
    let mut out = s.background.clone();
    let mut hits = vec![0u32; target.size()];
    let cells = out.data_mut();
    for (dst, &update) in s.transformer.target_offsets().into_iter().zip(s.updates.data()) {
        if !policy.combine(&mut cells[dst], update, hits[dst]) {
            return Err(Error::Collision { target: unravel(target, dst) });
        }
        hits[dst] = hits[dst].saturating_add(1);
    }
    let report = finish_report(&hits, 1, target.size(), false);
    Ok((out, report))
}

fn scatter_runs<T: Scalar>(
    s: &Scattering<'_, T>,
    policy: CollisionPolicy,
    plan: &SlicePlan,
) -> Result<(Tensor<T>, ScatterReport)> {
    let e = s.transformer;
    let target = e.target_shape();
    let dims = target.dims();
    let mut out = s.background.clone();
    // hit counters live at run starts only; runs are identical or disjoint
    let mut hits = vec![0u32; target.size()];
    let run = plan.run;
    let cells = out.data_mut();
    let updates = s.updates.data();
    if run > 0 {
        for (n, chunk) in updates.chunks_exact(run).enumerate() {
            let row = e.row(n * run);
            let start = row.iter().zip(dims).fold(0usize, |acc, (&v, &m)| acc * m + v as usize);
            let h = hits[start];
            let dst = &mut cells[start..start + run];
            match (policy, h) {
                (_, 0) | (CollisionPolicy::LastWins, _) => dst.copy_from_slice(chunk),
                (CollisionPolicy::FirstWins, _) => {}
                (CollisionPolicy::Sum, _) => dst.iter_mut().zip(chunk).for_each(|(d, &u)| *d = d.add(u)),
                (CollisionPolicy::Prod, _) => dst.iter_mut().zip(chunk).for_each(|(d, &u)| *d = d.mul(u)),
                (CollisionPolicy::Error, _) => return Err(Error::Collision { target: unravel(target, start) }),
            }
            hits[start] = h.saturating_add(1);
        }
    }
    let report = finish_report(&hits, run, target.size(), true);
    Ok((out, report))
}

/// Runs a scattering under `policy` on the requested execution path.
///
/// `ExecPath::SliceCopy` on a transformer without an untouched suffix is an
/// argument error.
pub fn scatter_with<T: Scalar>(
    s: &Scattering<'_, T>,
    policy: CollisionPolicy,
    path: ExecPath,
) -> Result<(Tensor<T>, ScatterReport)> {
    let plan = match path {
        ExecPath::Elementwise => None,
        _ => SlicePlan::for_provision(s.transformer),
    };
    match (plan, path) {
        (Some(plan), _) => scatter_planned(s, policy, &plan),
        (None, ExecPath::SliceCopy) => {
            s.transformer.ensure_valid()?;
            Err(Error::argument("transformer has no sliceable suffix"))
        }
        (None, _) => {
            s.transformer.ensure_valid()?;
            scatter_elementwise(s, policy)
        }
    }
}

/// Validity of a sliceable table from its run-start rows alone: inside a block
/// the leading entries repeat and the trailing ones are source coordinates.
fn runs_in_bounds(e: &ProvisionTensor, plan: &SlicePlan) -> bool {
    let s1 = e.source_shape();
    let src = s1.dims();
    let dst = e.target_shape().dims();
    let (k, l, r) = (src.len(), dst.len(), plan.suffix);
    if s1.size() == 0 {
        return true;
    }
    let suffix_fits = src[k - r..].iter().zip(&dst[l - r..]).all(|(a, b)| a <= b);
    suffix_fits
        && plan.run > 0
        && (0..e.rows())
            .step_by(plan.run)
            .all(|f| e.row(f)[..l - r].iter().zip(dst).all(|(&v, &m)| v >= 0 && (v as u64) < m as u64))
}

/// Runs a scattering with a plan computed ahead of time.
///
/// The plan must come from [`SlicePlan::for_provision`] on the same transformer.
pub fn scatter_planned<T: Scalar>(
    s: &Scattering<'_, T>,
    policy: CollisionPolicy,
    plan: &SlicePlan,
) -> Result<(Tensor<T>, ScatterReport)> {
    if !runs_in_bounds(s.transformer, plan) {
        s.transformer.ensure_valid()?;
    }
    scatter_runs(s, policy, plan)
}

pub fn scatter<T: Scalar>(s: &Scattering<'_, T>, policy: CollisionPolicy) -> Result<(Tensor<T>, ScatterReport)> {
    scatter_with(s, policy, ExecPath::Auto)
}

/// Composes `spec` and scatters `updates` into `target` with it.
pub fn scatter_x<T: Scalar>(
    target: &Tensor<T>,
    updates: &Tensor<T>,
    spec: &XTransformerSpec,
    policy: CollisionPolicy,
) -> Result<(Tensor<T>, ScatterReport)> {
    let provision = compose_provision(spec)?;
    scatter(&Scattering::new(&provision, updates, target)?, policy)
}

/// `tensor_scatter_nd_update(ts, indices, updates)`.
pub fn scatter_nd_update<T: Scalar>(
    ts: &Tensor<T>,
    indices: &IntTensor,
    updates: &Tensor<T>,
    policy: CollisionPolicy,
) -> Result<(Tensor<T>, ScatterReport)> {
    let spec = tf_transformer(indices, ts.shape())?;
    if updates.shape() != &spec.source_shape {
        return Err(Error::argument(format!(
            "updates shape {:?} must be indices.shape[:-1] + tensor.shape[Q:] = {:?}",
            updates.shape().dims(),
            spec.source_shape.dims()
        )));
    }
    scatter_x(ts, updates, &spec, policy)
}

/// `self.scatter(dim, index, src)`; only the `index.shape` region of `src` is read.
pub fn torch_scatter<T: Scalar>(
    self_t: &Tensor<T>,
    dim: usize,
    index: &IntTensor,
    src: &Tensor<T>,
    policy: CollisionPolicy,
) -> Result<(Tensor<T>, ScatterReport)> {
    let provision = torch_transformer(index, dim, self_t.shape())?;
    let covers =
        src.rank() == index.rank() && src.shape().dims().iter().zip(index.shape().dims()).all(|(&s, &i)| s >= i);
    if !covers {
        return Err(Error::argument(format!(
            "src shape {:?} does not cover index shape {:?}",
            src.shape().dims(),
            index.shape().dims()
        )));
    }
    let region: Vec<Pick> = index.shape().dims().iter().map(|&n| Pick::identity(n)).collect();
    let updates = src.slice(&region)?;
    scatter(&Scattering::new(&provision, &updates, self_t)?, policy)
}

/// Target footprint of the source class of `i0` under `pass_pick`.
pub fn disseminate_slice(e: &ProvisionTensor, pass_pick: &Pick, i0: &Index) -> Result<BTreeSet<Index>> {
    let class = index_class(&e.source_shape(), pass_pick, i0)?;
    class.iter().map(|k| e.transform(k)).collect()
}
