//! Independent oracles and random instance generators.
//!
//! Nothing here calls the engine, the analyzer or the composition code; the
//! oracles work on plain vectors and their own row-major enumeration.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use scatterx::{CollisionPolicy, IntTensor, Pick, ProvisionTensor, RealTensor, Shape, Tensor, XTransformerSpec};

/// Every index of `dims` in row-major order, by nested recursion.
pub fn enumerate(dims: &[usize]) -> Vec<Vec<usize>> {
    fn go(dims: &[usize], axis: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if axis == dims.len() {
            out.push(cur.clone());
            return;
        }
        for c in 0..dims[axis] {
            cur.push(c);
            go(dims, axis + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(dims, 0, &mut Vec::new(), &mut out);
    out
}

pub fn flat(dims: &[usize], coords: &[usize]) -> usize {
    let mut off = 0;
    let mut stride = 1;
    for (c, m) in coords.iter().zip(dims).rev() {
        off += c * stride;
        stride *= m;
    }
    off
}

/// `T(I)` read straight from the table data.
pub fn table_row(table: &[i64], src_dims: &[usize], l: usize, i: &[usize]) -> Vec<usize> {
    let at = flat(src_dims, i) * l;
    table[at..at + l].iter().map(|&v| v as usize).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleOutcome {
    Done(Vec<f64>),
    Collision(Vec<usize>),
}

/// Brute-force scattering: group updates by target, then resolve each group.
pub fn oracle_scatter(
    table: &[i64],
    src_dims: &[usize],
    dst_dims: &[usize],
    updates: &[f64],
    background: &[f64],
    policy: CollisionPolicy,
) -> OracleOutcome {
    let l = dst_dims.len();
    let sources = enumerate(src_dims);
    let mut groups: BTreeMap<Vec<usize>, Vec<(usize, f64)>> = BTreeMap::new();
    for (pos, i) in sources.iter().enumerate() {
        let k = table_row(table, src_dims, l, i);
        groups.entry(k).or_default().push((pos, updates[flat(src_dims, i)]));
    }
    if policy == CollisionPolicy::Error {
        // the first source (in row-major order) that lands on an occupied cell
        let first = groups.iter().filter(|(_, g)| g.len() > 1).min_by_key(|(_, g)| g[1].0);
        if let Some((k, _)) = first {
            return OracleOutcome::Collision(k.clone());
        }
    }
    let mut out = background.to_vec();
    for (k, g) in &groups {
        let vals: Vec<f64> = g.iter().map(|&(_, v)| v).collect();
        let v = match policy {
            CollisionPolicy::LastWins => *vals.last().unwrap(),
            CollisionPolicy::FirstWins | CollisionPolicy::Error => vals[0],
            CollisionPolicy::Sum => vals[1..].iter().fold(vals[0], |a, &b| a + b),
            CollisionPolicy::Prod => vals[1..].iter().fold(vals[0], |a, &b| a * b),
        };
        out[flat(dst_dims, k)] = v;
    }
    OracleOutcome::Done(out)
}

/// Targets reached by the table.
pub fn oracle_image(table: &[i64], src_dims: &[usize], dst_dims: &[usize]) -> Vec<bool> {
    let l = dst_dims.len();
    let mut hit = vec![false; dst_dims.iter().product()];
    for i in enumerate(src_dims) {
        hit[flat(dst_dims, &table_row(table, src_dims, l, &i))] = true;
    }
    hit
}

/// Direct evaluation of `p(f(p1(I)) + p2(I))`.
pub fn eval_x(spec: &XTransformerSpec, i: &[usize]) -> Vec<i64> {
    let inner_src: Vec<usize> = spec.inner.source_shape().dims().to_vec();
    let li = spec.inner.target_rank();
    let key: Vec<usize> = spec.inner_pick.values().iter().map(|&p| i[p]).collect();
    let at = flat(&inner_src, &key) * li;
    let mut joined: Vec<i64> = spec.inner.table().data()[at..at + li].to_vec();
    joined.extend(spec.pass_pick.values().iter().map(|&p| i[p] as i64));
    spec.out_pick.values().iter().map(|&p| joined[p]).collect()
}

/// `tensor_scatter_nd_update` as documented: each index row selects a slice of
/// the tensor, overwritten by the matching slice of updates.
pub fn oracle_tf(ts: &RealTensor, indices: &IntTensor, updates: &RealTensor) -> Vec<f64> {
    let t_dims = ts.shape().dims();
    let i_dims = indices.shape().dims();
    let q = *i_dims.last().unwrap();
    let batch = &i_dims[..i_dims.len() - 1];
    let tail = &t_dims[q..];
    let mut out = ts.data().to_vec();
    for b in enumerate(batch) {
        let at = flat(batch, &b) * q;
        let head: Vec<usize> = indices.data()[at..at + q].iter().map(|&v| v as usize).collect();
        for t in enumerate(tail) {
            let dst: Vec<usize> = head.iter().chain(&t).copied().collect();
            let src: Vec<usize> = b.iter().chain(&t).copied().collect();
            out[flat(t_dims, &dst)] = updates.data()[flat(updates.shape().dims(), &src)];
        }
    }
    out
}

/// `self.scatter(dim, index, src)` as documented: `out[..index[I]..] = src[I]`.
pub fn oracle_torch(self_t: &RealTensor, dim: usize, index: &IntTensor, src: &RealTensor) -> Vec<f64> {
    let s_dims = self_t.shape().dims();
    let mut out = self_t.data().to_vec();
    for i in enumerate(index.shape().dims()) {
        let mut dst = i.clone();
        dst[dim] = index.data()[flat(index.shape().dims(), &i)] as usize;
        out[flat(s_dims, &dst)] = src.data()[flat(src.shape().dims(), &i)];
    }
    out
}

/// Reference loop order: one recursive loop per axis, last axis innermost.
pub fn reference_traversal(shape: &[usize], action: &mut dyn FnMut(&[usize])) {
    fn inner(shape: &[usize], i: usize, ind: &mut Vec<usize>, action: &mut dyn FnMut(&[usize])) {
        for j in 0..shape[i] {
            ind[i] = j;
            if i < shape.len() - 1 {
                inner(shape, i + 1, ind, action);
            } else {
                action(ind);
            }
        }
    }
    if shape.is_empty() || shape.iter().product::<usize>() == 0 {
        return;
    }
    let mut ind = vec![0; shape.len()];
    inner(shape, 0, &mut ind, action);
}

/// Plain assignment loop `target[T[I]] = X[I]` in traversal order.
pub fn reference_scatter(target: &mut [f64], t_dims: &[usize], x: &[f64], x_dims: &[usize], table: &[Vec<usize>]) {
    reference_traversal(x_dims, &mut |ia| {
        let f = flat(x_dims, ia);
        target[flat(t_dims, &table[f])] = x[f];
    });
}

/// Tabulates the TF transformer by traversal, then runs the assignment loop.
/// The pass-through coordinates start at the batch rank.
pub fn reference_tf_scatter(ts: &RealTensor, indices: &IntTensor, updates: &RealTensor) -> Vec<f64> {
    let t_dims = ts.shape().dims().to_vec();
    let i_dims = indices.shape().dims();
    let q = *i_dims.last().unwrap();
    let b = i_dims.len() - 1;
    let x_dims = updates.shape().dims().to_vec();
    let p0: Vec<usize> = (0..b).collect();
    let p1: Vec<usize> = (b..x_dims.len()).collect();
    let mut table = vec![Vec::new(); x_dims.iter().product()];
    reference_traversal(&x_dims, &mut |ic| {
        let j0: Vec<usize> = p0.iter().map(|&p| ic[p]).collect();
        let at = flat(&i_dims[..b], &j0) * q;
        let mut j: Vec<usize> = indices.data()[at..at + q].iter().map(|&v| v as usize).collect();
        j.extend(p1.iter().map(|&p| ic[p]));
        table[flat(&x_dims, ic)] = j;
    });
    let mut out = ts.data().to_vec();
    reference_scatter(&mut out, &t_dims, updates.data(), &x_dims, &table);
    out
}

/// Reference loop for the torch transformer `I[..dim] + (index[I],) + I[dim+1..]`.
pub fn reference_torch_scatter(self_t: &RealTensor, dim: usize, index: &IntTensor, src: &RealTensor) -> Vec<f64> {
    let x_dims = index.shape().dims().to_vec();
    let mut table = vec![Vec::new(); x_dims.iter().product()];
    let mut x = vec![0.0; table.len()];
    reference_traversal(&x_dims, &mut |ic| {
        let f = flat(&x_dims, ic);
        let mut j = ic.to_vec();
        j[dim] = index.data()[f] as usize;
        table[f] = j;
        x[f] = src.data()[flat(src.shape().dims(), ic)];
    });
    let mut out = self_t.data().to_vec();
    reference_scatter(&mut out, self_t.shape().dims(), &x, &x_dims, &table);
    out
}

// ---- generators ----

pub fn random_dims(rng: &mut impl Rng, max_rank: usize, max_extent: usize, min_extent: usize) -> Vec<usize> {
    let rank = rng.gen_range(0..=max_rank);
    (0..rank).map(|_| rng.gen_range(min_extent..=max_extent)).collect()
}

pub fn random_values(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    // quarter steps keep products and sums readable without hiding rounding
    (0..n).map(|_| f64::from(rng.gen_range(-12i32..=12)) / 4.0 + rng.gen_range(0.0..1e-3)).collect()
}

pub fn real(dims: &[usize], data: Vec<f64>) -> RealTensor {
    Tensor::from_vec(Shape::from(dims), data).unwrap()
}

/// Largest `r` such that the last `r` outputs copy the last `r` inputs and the
/// leading outputs depend only on the leading `k - r` inputs.
pub fn brute_suffix(e: &ProvisionTensor) -> usize {
    let (src, dst) = (e.source_shape().dims().to_vec(), e.target_shape().dims().to_vec());
    let (k, l) = (src.len(), dst.len());
    let all = enumerate(&src);
    let rows: Vec<Vec<usize>> = all.iter().map(|i| table_row(e.table().data(), &src, l, i)).collect();
    (0..=k.min(l))
        .rev()
        .find(|&r| {
            let copies = all.iter().zip(&rows).all(|(i, t)| t[l - r..] == i[k - r..]);
            let lead_ok = all
                .iter()
                .zip(&rows)
                .all(|(i, t)| all.iter().zip(&rows).all(|(j, u)| i[..k - r] != j[..k - r] || t[..l - r] == u[..l - r]));
            copies && lead_ok
        })
        .unwrap()
}

/// Every `(input, output)` pair with `T(I)[output] = I[input]` for all `I`,
/// keeping extent-1 inputs only for outputs without a wider partner.
pub fn brute_pass_through(e: &ProvisionTensor) -> std::collections::BTreeSet<(usize, usize)> {
    let src = e.source_shape().dims().to_vec();
    let l = e.target_rank();
    let all = enumerate(&src);
    let raw: Vec<(usize, usize)> = (0..src.len())
        .flat_map(|i| (0..l).map(move |j| (i, j)))
        .filter(|&(i, j)| all.iter().all(|x| table_row(e.table().data(), &src, l, x)[j] == x[i]))
        .collect();
    if all.is_empty() {
        return raw.into_iter().collect();
    }
    raw.iter().copied().filter(|&(i, j)| src[i] > 1 || !raw.iter().any(|&(i2, j2)| j2 == j && src[i2] > 1)).collect()
}

/// A random valid provision. With `collide`, rows are drawn from a small pool
/// of targets so that more than 20% of sources share a target.
pub fn random_provision(rng: &mut impl Rng, collide: bool) -> ProvisionTensor {
    loop {
        let src = random_dims(rng, 4, 5, 1);
        let mut dst = random_dims(rng, 4, 5, 1);
        if dst.is_empty() {
            dst.push(rng.gen_range(1..=5));
        }
        let rows: usize = src.iter().product();
        let l = dst.len();
        let draw =
            |rng: &mut dyn rand::RngCore| -> Vec<i64> { dst.iter().map(|&m| rng.gen_range(0..m) as i64).collect() };
        let data: Vec<i64> = if collide {
            if rows < 2 {
                continue;
            }
            let pool: Vec<Vec<i64>> = (0..(rows / 3).max(1)).map(|_| draw(rng)).collect();
            (0..rows).flat_map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect()
        } else {
            (0..rows).flat_map(|_| draw(rng)).collect()
        };
        if collide && collision_rate(&data, l, rows) <= 0.2 {
            continue;
        }
        let mut table_dims = src.clone();
        table_dims.push(l);
        return ProvisionTensor::new(IntTensor::from_vec(table_dims, data).unwrap(), dst).unwrap();
    }
}

/// Fraction of sources whose target is shared with another source.
pub fn collision_rate(data: &[i64], l: usize, rows: usize) -> f64 {
    if rows == 0 {
        return 0.0;
    }
    let mut counts: BTreeMap<&[i64], usize> = BTreeMap::new();
    for r in 0..rows {
        *counts.entry(&data[r * l..(r + 1) * l]).or_default() += 1;
    }
    counts.values().filter(|&&c| c > 1).sum::<usize>() as f64 / rows as f64
}

/// A random spec, valid by construction: every output extent is the extent of
/// the coordinate it is sourced from.
pub fn random_spec(rng: &mut impl Rng, max_extent: usize) -> XTransformerSpec {
    let src = random_dims(rng, 4, max_extent, 1);
    let k = src.len();
    let pick = |rng: &mut dyn rand::RngCore, len: usize, bound: usize| -> Vec<usize> {
        if bound == 0 {
            return Vec::new();
        }
        (0..len).map(|_| rng.gen_range(0..bound)).collect()
    };
    let inner_len = if k == 0 { 0 } else { rng.gen_range(0..=k.min(3)) };
    let inner_pick = pick(rng, inner_len, k);
    let inner_src: Vec<usize> = inner_pick.iter().map(|&p| src[p]).collect();
    let inner_dst = random_dims(rng, 3, max_extent, 1);
    let rows: usize = inner_src.iter().product();
    let mut table_dims = inner_src.clone();
    table_dims.push(inner_dst.len());
    let data: Vec<i64> =
        (0..rows).flat_map(|_| inner_dst.iter().map(|&m| rng.gen_range(0..m) as i64).collect::<Vec<_>>()).collect();
    let inner = ProvisionTensor::new(IntTensor::from_vec(table_dims, data).unwrap(), inner_dst.clone()).unwrap();

    let pass_len = if k == 0 { 0 } else { rng.gen_range(0..=k) };
    let pass_pick = pick(rng, pass_len, k);
    let joined: Vec<usize> = inner_dst.iter().copied().chain(pass_pick.iter().map(|&p| src[p])).collect();
    let out_len = if joined.is_empty() { 0 } else { rng.gen_range(1..=4) };
    let out_pick = pick(rng, out_len, joined.len());
    let dst: Vec<usize> = out_pick.iter().map(|&p| joined[p]).collect();
    XTransformerSpec {
        inner,
        inner_pick: Pick::new(inner_pick),
        pass_pick: Pick::new(pass_pick),
        out_pick: Pick::new(out_pick),
        source_shape: Shape::new(src),
        target_shape: Shape::new(dst),
    }
}

/// A provision with an untouched suffix of `r >= 1` axes: `T(I) = T'(I[..k-r]) + I[k-r..]`,
/// targets at least as wide as the sources on the suffix.
pub fn random_sliceable(rng: &mut impl Rng) -> ProvisionTensor {
    let k = rng.gen_range(1..=4);
    let r = rng.gen_range(1..=k);
    let src: Vec<usize> = (0..k).map(|_| rng.gen_range(1..=5)).collect();
    let lead = rng.gen_range(0..=2);
    let mut dst: Vec<usize> = (0..lead).map(|_| rng.gen_range(1..=4)).collect();
    let narrow = rng.gen_bool(0.5);
    dst.extend(src[k - r..].iter().map(|&m| if narrow { m } else { m + rng.gen_range(0..=2) }));
    let prefix = &src[..k - r];
    let prefix_rows: usize = prefix.iter().product();
    let prefix_targets: Vec<Vec<i64>> =
        (0..prefix_rows).map(|_| dst[..lead].iter().map(|&m| rng.gen_range(0..m) as i64).collect()).collect();
    let mut data = Vec::new();
    for i in enumerate(&src) {
        data.extend(&prefix_targets[flat(prefix, &i[..k - r])]);
        data.extend(i[k - r..].iter().map(|&c| c as i64));
    }
    let mut table_dims = src.clone();
    table_dims.push(dst.len());
    ProvisionTensor::new(IntTensor::from_vec(table_dims, data).unwrap(), dst).unwrap()
}
