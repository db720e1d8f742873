//! Static analysis of provision tensors.
//!
//! Answers two questions about a tabulated transformer `T`:
//!
//! * where applying it is ambiguous or partial: source indices that collide on
//!   one target, and targets no source reaches;
//! * whether it can be lowered to block copies: the longest suffix of
//!   coordinates that `T` passes through untouched while the leading output
//!   coordinates depend only on the leading input coordinates.
//!
//! When no such suffix exists, [`weak_decomposition`] still factors `T` as
//! `p(f(p1(I)) + p2(I))`. A non-empty overlap between the dimensions read by
//! `p1` and `p2` in that canonical factorisation is the witness that block
//! copying is impossible for it.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::Result;
use crate::tensor::{for_each_coords, Index, IntTensor, Pick, Shape, Tensor};
use crate::transformer::{unravel, ProvisionTensor, XTransformerSpec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollisionGroup {
    pub target: Index,
    /// Row-major order, at least two members.
    pub sources: Vec<Index>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CollisionReport {
    pub groups: Vec<CollisionGroup>,
    pub uncovered_count: usize,
    pub image_size: usize,
}

impl CollisionReport {
    pub fn is_collision_free(&self) -> bool {
        self.groups.is_empty()
    }
}

/// Preimage classes of size >= 2, ordered by target in row-major order.
pub fn detect_collisions(e: &ProvisionTensor) -> Result<CollisionReport> {
    e.ensure_valid()?;
    let mut preimages: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (src, dst) in e.target_offsets().into_iter().enumerate() {
        preimages.entry(dst).or_default().push(src);
    }
    let source = e.source_shape();
    let target = e.target_shape();
    let image_size = preimages.len();
    let groups = preimages
        .into_iter()
        .filter(|(_, srcs)| srcs.len() >= 2)
        .map(|(dst, srcs)| CollisionGroup {
            target: unravel(target, dst),
            sources: srcs.into_iter().map(|s| unravel(&source, s)).collect(),
        })
        .collect();
    Ok(CollisionReport { groups, uncovered_count: target.size() - image_size, image_size })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceableSuffix {
    /// Number of trailing coordinates passed through; `0` means not sliceable.
    pub suffix: usize,
    /// Tabulated prefix transformer over the leading `rank(S1) - suffix` input axes.
    pub inner: Option<ProvisionTensor>,
}

fn suffix_holds(e: &ProvisionTensor, r: usize) -> bool {
    let s1 = e.source_shape();
    let dims = s1.dims();
    let k = s1.rank();
    let l = e.target_rank();
    if s1.size() == 0 {
        return true;
    }
    // odometer over the trailing r coordinates only; they repeat per block
    let mut tail = vec![0usize; r];
    for flat in 0..s1.size() {
        let row = &e.row(flat)[l - r..];
        if row.iter().zip(&tail).any(|(&v, &c)| v != c as i64) {
            return false;
        }
        for (c, &m) in tail.iter_mut().zip(&dims[k - r..]).rev() {
            *c += 1;
            if *c < m {
                break;
            }
            *c = 0;
        }
    }
    let block: usize = s1.dims()[k - r..].iter().product();
    if block == 0 {
        return true;
    }
    let blocks = s1.size() / block;
    (0..blocks).all(|b| {
        let head = &e.row(b * block)[..l - r];
        (1..block).all(|o| &e.row(b * block + o)[..l - r] == head)
    })
}

fn tabulate_prefix(e: &ProvisionTensor, r: usize) -> ProvisionTensor {
    let s1 = e.source_shape();
    let k = s1.rank();
    let l = e.target_rank();
    let prefix = Shape::from(&s1.dims()[..k - r]);
    let lead = l - r;
    let block: usize = s1.dims()[k - r..].iter().product();
    let mut data = Vec::with_capacity(prefix.size() * lead);
    for b in 0..prefix.size() {
        if block == 0 {
            data.resize(data.len() + lead, 0);
        } else {
            data.extend_from_slice(&e.row(b * block)[..lead]);
        }
    }
    let table = Tensor::from_vec(prefix.concat(&Shape::new([lead])), data).expect("sized");
    ProvisionTensor::new(table, Shape::from(&e.target_shape().dims()[..lead])).expect("rank matches")
}

/// Largest `r` such that `T(I) = T'(I[..k-r]) + I[k-r..]` for every `I`.
pub fn max_sliceable_suffix(e: &ProvisionTensor) -> SliceableSuffix {
    let max_r = e.source_shape().rank().min(e.target_rank());
    for r in (1..=max_r).rev() {
        if suffix_holds(e, r) {
            return SliceableSuffix { suffix: r, inner: Some(tabulate_prefix(e, r)) };
        }
    }
    SliceableSuffix { suffix: 0, inner: None }
}

/// All `(input_dim, output_dim)` with `T(I)[output_dim] = I[input_dim]` for every `I`.
///
/// Input axes of extent <= 1 match constant-zero outputs vacuously; they are
/// kept only for outputs that have no partner of larger extent.
pub fn pass_through_map(e: &ProvisionTensor) -> BTreeSet<(usize, usize)> {
    let s1 = e.source_shape();
    let k = s1.rank();
    let l = e.target_rank();
    let mut holds = vec![vec![true; l]; k];
    for_each_coords(&s1, |flat, coords| {
        let row = e.row(flat);
        for (i, &c) in coords.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if holds[i][j] && v != c as i64 {
                    holds[i][j] = false;
                }
            }
        }
    });
    let dims = s1.dims();
    let mut pairs = BTreeSet::new();
    #[allow(clippy::needless_range_loop)]
    for j in 0..l {
        let partners: Vec<usize> = (0..k).filter(|&i| holds[i][j]).collect();
        let wide: Vec<usize> = partners.iter().copied().filter(|&i| dims[i] > 1).collect();
        let keep = if wide.is_empty() || s1.size() == 0 { partners } else { wide };
        pairs.extend(keep.into_iter().map(|i| (i, j)));
    }
    pairs
}

/// Whether output coordinate `out` changes along input axis `axis` anywhere.
fn depends_on(e: &ProvisionTensor, axis: usize, out: usize) -> bool {
    let s1 = e.source_shape();
    let extent = s1.dims()[axis];
    let stride = s1.strides()[axis];
    let mut found = false;
    for_each_coords(&s1, |flat, coords| {
        if !found && coords[axis] + 1 < extent {
            found = e.row(flat)[out] != e.row(flat + stride)[out];
        }
    });
    found
}

/// Canonical representation `T(I) = p(f(p1(I)) + p2(I))`.
///
/// `p2` collects every input axis that is copied verbatim to some output,
/// `p1` the input axes the remaining outputs depend on, and `f` tabulates those
/// remaining outputs. Composing the result reproduces `e` exactly.
pub fn weak_decomposition(e: &ProvisionTensor) -> XTransformerSpec {
    let s1 = e.source_shape();
    let s2 = e.target_shape().clone();
    let (k, l) = (s1.rank(), s2.rank());
    let pairs = pass_through_map(e);

    let pass_dims: Vec<usize> = pairs.iter().map(|&(i, _)| i).collect::<BTreeSet<_>>().into_iter().collect();
    if pass_dims.is_empty() {
        return XTransformerSpec::trivial(e.clone());
    }
    let mut partner: Vec<Option<usize>> = vec![None; l];
    for &(i, j) in &pairs {
        partner[j] = Some(partner[j].map_or(i, |p: usize| p.min(i)));
    }
    let free_outputs: Vec<usize> = (0..l).filter(|&j| partner[j].is_none()).collect();
    let inner_dims: Vec<usize> = (0..k).filter(|&d| free_outputs.iter().any(|&j| depends_on(e, d, j))).collect();

    let inner_source = s1.select(&inner_dims);
    let inner_target = s2.select(&free_outputs);
    let width = free_outputs.len();
    let mut data = vec![0i64; inner_source.size() * width];
    if width > 0 {
        for_each_coords(&s1, |flat, coords| {
            let key: Vec<usize> = inner_dims.iter().map(|&d| coords[d]).collect();
            let at = inner_source.offset_unchecked(&key) * width;
            let row = e.row(flat);
            for (slot, &j) in data[at..at + width].iter_mut().zip(&free_outputs) {
                *slot = row[j];
            }
        });
    }
    let table = IntTensor::from_vec(inner_source.concat(&Shape::new([width])), data).expect("sized");
    let inner = ProvisionTensor::new(table, inner_target).expect("rank matches");

    let out_pick: Vec<usize> = (0..l)
        .map(|j| match partner[j] {
            Some(i) => width + pass_dims.iter().position(|&d| d == i).expect("partner is a pass dim"),
            None => free_outputs.iter().position(|&f| f == j).expect("free output"),
        })
        .collect();

    XTransformerSpec {
        inner,
        inner_pick: Pick::new(inner_dims),
        pass_pick: Pick::new(pass_dims),
        out_pick: Pick::new(out_pick),
        source_shape: s1,
        target_shape: s2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// A non-empty untouched suffix exists.
    Sliceable,
    /// No untouched suffix, but some coordinates pass through.
    WeaklySliceableOnly,
    /// No pass-through structure at all.
    TrivialOnly,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Sliceable => "SLICEABLE",
            Verdict::WeaklySliceableOnly => "WEAKLY_SLICEABLE_ONLY",
            Verdict::TrivialOnly => "TRIVIAL_ONLY",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlicingDiagnostic {
    pub suffix: SliceableSuffix,
    pub canonical: XTransformerSpec,
    /// Axes read by both the inner pick and the pass pick of `canonical`.
    pub overlap: BTreeSet<usize>,
    pub verdict: Verdict,
}

pub fn slicing_impossibility(e: &ProvisionTensor) -> SlicingDiagnostic {
    let suffix = max_sliceable_suffix(e);
    let canonical = weak_decomposition(e);
    let overlap: BTreeSet<usize> =
        canonical.inner_pick.image().intersection(&canonical.pass_pick.image()).copied().collect();
    let verdict = if suffix.suffix > 0 {
        Verdict::Sliceable
    } else if !canonical.pass_pick.is_empty() {
        Verdict::WeaklySliceableOnly
    } else {
        Verdict::TrivialOnly
    };
    SlicingDiagnostic { suffix, canonical, overlap, verdict }
}

/// Everything the analyzer knows about one provision.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    pub diagnostic: SlicingDiagnostic,
    pub pass_through: BTreeSet<(usize, usize)>,
    pub collisions: CollisionReport,
}

pub fn analyze(e: &ProvisionTensor) -> Result<AnalysisReport> {
    let collisions = detect_collisions(e)?;
    Ok(AnalysisReport { diagnostic: slicing_impossibility(e), pass_through: pass_through_map(e), collisions })
}
