//! Golden tensors from the worked examples.
//!
//! * `E-1`: a (4,2) -> (2,2,2,2) transformer writing row `(a, b)` to the
//!   4-bit binary code of `2a + b`;
//! * `A1`, `X1`, `B1`: updates, zero background and the scatter result;
//! * `E-2`: `T(i, j, k) = (i, i, j, k)`, sliceable with prefix transformer
//!   `T'-2 = [[0, 0], [1, 1]]`;
//! * `E3`: `T(i, j) = (i, j, i mod 2, j)`, weakly sliceable only.

use crate::tensor::{IntTensor, Pick, RealTensor, Shape, Tensor};
use crate::transformer::{ProvisionTensor, XTransformerSpec};

pub fn e_minus1() -> ProvisionTensor {
    let data: Vec<i64> = (0..8i64).flat_map(|n| [(n >> 3) & 1, (n >> 2) & 1, (n >> 1) & 1, n & 1]).collect();
    ProvisionTensor::new(Tensor::from_vec([4, 2, 4], data).expect("sized"), [2, 2, 2, 2]).expect("rank 4")
}

pub fn a1() -> RealTensor {
    Tensor::from_vec([4, 2], (1..=8).map(f64::from).collect()).expect("sized")
}

pub fn x1() -> RealTensor {
    Tensor::full([2, 2, 2, 2], 0.0)
}

/// `B1[0, a, b, c] = 4a + 2b + c + 1`, zero elsewhere.
pub fn b1() -> RealTensor {
    let mut data: Vec<f64> = (1..=8).map(f64::from).collect();
    data.extend([0.0; 8]);
    Tensor::from_vec([2, 2, 2, 2], data).expect("sized")
}

pub fn t_prime_minus2() -> ProvisionTensor {
    ProvisionTensor::new(Tensor::from_vec([2, 2], vec![0, 0, 1, 1]).expect("sized"), [2, 2]).expect("rank 2")
}

/// The sliceable representation of `E-2`: inner `T'-2` on axis 0, axes 1..3 passed through.
pub fn e_minus2_spec() -> XTransformerSpec {
    XTransformerSpec {
        inner: t_prime_minus2(),
        inner_pick: Pick::new([0]),
        pass_pick: Pick::new([1, 2]),
        out_pick: Pick::identity(4),
        source_shape: Shape::from([2, 2, 2]),
        target_shape: Shape::from([2, 2, 2, 2]),
    }
}

pub fn e_minus2() -> ProvisionTensor {
    let table: IntTensor = Tensor::from_fn([2, 2, 2, 4], |ix| {
        let c = ix.coords();
        [c[0], c[0], c[1], c[2]][c[3]] as i64
    });
    ProvisionTensor::new(table, [2, 2, 2, 2]).expect("rank 4")
}

pub fn e3() -> ProvisionTensor {
    let data = vec![
        0, 0, 0, 0, //
        0, 1, 0, 1, //
        1, 0, 1, 0, //
        1, 1, 1, 1, //
        2, 0, 0, 0, //
        2, 1, 0, 1, //
        3, 0, 1, 0, //
        3, 1, 1, 1,
    ];
    ProvisionTensor::new(Tensor::from_vec([4, 2, 4], data).expect("sized"), [4, 2, 2, 2]).expect("rank 4")
}
