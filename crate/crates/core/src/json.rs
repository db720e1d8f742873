//! JSON documents.
//!
//! Tensors: `{"dtype": "f64" | "i64", "shape": [..], "data": [..]}` with data
//! in row-major order. Picks: `{"pick": [..]}`. X-transformer specs embed the
//! inner provision table as a tensor document and the picks as bare arrays.

use serde::{Deserialize, Serialize};
use serde_json::{json, Number, Value};

use crate::analysis::{AnalysisReport, CollisionReport};
use crate::engine::ScatterReport;
use crate::error::{Error, Result};
use crate::tensor::{Index, IntTensor, Pick, RealTensor, Shape, Tensor};
use crate::transformer::{ProvisionTensor, XTransformerSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DType {
    #[serde(rename = "f64")]
    F64,
    #[serde(rename = "i64")]
    I64,
}

#[derive(Serialize, Deserialize)]
struct TensorDoc<D> {
    dtype: DType,
    shape: Vec<usize>,
    data: Vec<D>,
}

/// A tensor document of either dtype.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyTensor {
    F64(RealTensor),
    I64(IntTensor),
}

impl AnyTensor {
    pub fn dtype(&self) -> DType {
        match self {
            AnyTensor::F64(_) => DType::F64,
            AnyTensor::I64(_) => DType::I64,
        }
    }

    pub fn shape(&self) -> &Shape {
        match self {
            AnyTensor::F64(t) => t.shape(),
            AnyTensor::I64(t) => t.shape(),
        }
    }

    /// Integer documents widen to reals.
    pub fn into_real(self) -> RealTensor {
        match self {
            AnyTensor::F64(t) => t,
            AnyTensor::I64(t) => t.map(|v| v as f64),
        }
    }

    pub fn into_int(self) -> Result<IntTensor> {
        match self {
            AnyTensor::I64(t) => Ok(t),
            AnyTensor::F64(_) => Err(Error::argument("expected an i64 tensor")),
        }
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let doc: TensorDoc<Number> = serde_json::from_value(value)?;
        let shape = Shape::new(doc.shape);
        match doc.dtype {
            DType::F64 => {
                let data = doc
                    .data
                    .iter()
                    .map(|n| n.as_f64().ok_or_else(|| Error::argument(format!("{n} is not an f64"))))
                    .collect::<Result<Vec<_>>>()?;
                Ok(AnyTensor::F64(Tensor::from_vec(shape, data)?))
            }
            DType::I64 => {
                let data = doc
                    .data
                    .iter()
                    .map(|n| n.as_i64().ok_or_else(|| Error::argument(format!("{n} is not an i64"))))
                    .collect::<Result<Vec<_>>>()?;
                Ok(AnyTensor::I64(Tensor::from_vec(shape, data)?))
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_value(serde_json::from_str(text)?)
    }

    pub fn to_value(&self) -> Result<Value> {
        match self {
            AnyTensor::F64(t) => real_to_value(t),
            AnyTensor::I64(t) => Ok(int_to_value(t)),
        }
    }
}

impl From<RealTensor> for AnyTensor {
    fn from(t: RealTensor) -> Self {
        AnyTensor::F64(t)
    }
}

impl From<IntTensor> for AnyTensor {
    fn from(t: IntTensor) -> Self {
        AnyTensor::I64(t)
    }
}

/// Runs a scatter-like operation in i64 when both data tensors are integer,
/// in f64 otherwise.
pub fn dispatch(
    updates: AnyTensor,
    background: AnyTensor,
    f64_op: impl FnOnce(&Tensor<f64>, &Tensor<f64>) -> Result<(Tensor<f64>, ScatterReport)>,
    i64_op: impl FnOnce(&Tensor<i64>, &Tensor<i64>) -> Result<(Tensor<i64>, ScatterReport)>,
) -> Result<(AnyTensor, ScatterReport)> {
    match (updates, background) {
        (AnyTensor::I64(u), AnyTensor::I64(b)) => i64_op(&u, &b).map(|(t, r)| (t.into(), r)),
        (u, b) => f64_op(&u.into_real(), &b.into_real()).map(|(t, r)| (t.into(), r)),
    }
}

/// Non-finite values have no JSON representation and are rejected.
pub fn real_to_value(t: &RealTensor) -> Result<Value> {
    if let Some(v) = t.data().iter().find(|v| !v.is_finite()) {
        return Err(Error::argument(format!("cannot encode non-finite value {v}")));
    }
    let doc = TensorDoc { dtype: DType::F64, shape: t.shape().dims().to_vec(), data: t.data().to_vec() };
    Ok(serde_json::to_value(doc)?)
}

pub fn int_to_value(t: &IntTensor) -> Value {
    let doc = TensorDoc { dtype: DType::I64, shape: t.shape().dims().to_vec(), data: t.data().to_vec() };
    serde_json::to_value(doc).expect("integers always encode")
}

/// Compact document text followed by a newline.
pub fn to_text(value: &Value) -> String {
    let mut s = serde_json::to_string(value).expect("values always encode");
    s.push('\n');
    s
}

#[derive(Serialize, Deserialize)]
struct PickDoc {
    pick: Vec<i64>,
}

pub fn pick_from_value(value: Value) -> Result<Pick> {
    let doc: PickDoc = serde_json::from_value(value)?;
    Pick::from_signed(&doc.pick)
}

pub fn pick_to_value(p: &Pick) -> Value {
    json!({ "pick": p.values() })
}

#[derive(Serialize, Deserialize)]
struct SpecDoc {
    inner: Value,
    inner_pick: Vec<i64>,
    pass_pick: Vec<i64>,
    out_pick: Vec<i64>,
    source_shape: Vec<usize>,
    target_shape: Vec<usize>,
}

/// The inner provision's target shape is not stored; it is taken as the
/// bounding shape of its entries.
pub fn spec_from_value(value: Value) -> Result<XTransformerSpec> {
    let doc: SpecDoc = serde_json::from_value(value)?;
    let table = AnyTensor::from_value(doc.inner)?.into_int()?;
    Ok(XTransformerSpec {
        inner: ProvisionTensor::with_bounding_target(table)?,
        inner_pick: Pick::from_signed(&doc.inner_pick)?,
        pass_pick: Pick::from_signed(&doc.pass_pick)?,
        out_pick: Pick::from_signed(&doc.out_pick)?,
        source_shape: Shape::new(doc.source_shape),
        target_shape: Shape::new(doc.target_shape),
    })
}

pub fn spec_to_value(spec: &XTransformerSpec) -> Value {
    json!({
        "inner": int_to_value(spec.inner.table()),
        "inner_pick": spec.inner_pick.values(),
        "pass_pick": spec.pass_pick.values(),
        "out_pick": spec.out_pick.values(),
        "source_shape": spec.source_shape.dims(),
        "target_shape": spec.target_shape.dims(),
    })
}

pub fn scatter_report_to_value(r: &ScatterReport) -> Value {
    json!({
        "writes": r.writes,
        "colliding_groups": r.colliding_groups,
        "uncovered_targets": r.uncovered_targets,
        "fast_path_used": r.fast_path_used,
    })
}

fn index_value(i: &Index) -> Value {
    json!(i.coords())
}

pub fn collisions_to_value(c: &CollisionReport) -> Value {
    let groups: Vec<Value> = c
        .groups
        .iter()
        .map(|g| {
            json!({
                "target": index_value(&g.target),
                "sources": g.sources.iter().map(index_value).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({ "count": c.groups.len(), "groups": groups })
}

pub fn analysis_to_value(report: &AnalysisReport) -> Value {
    let d = &report.diagnostic;
    json!({
        "max_suffix": d.suffix.suffix,
        "inner": d.suffix.inner.as_ref().map(|p| int_to_value(p.table())),
        "verdict": d.verdict.as_str(),
        "pass_through": report.pass_through.iter().map(|&(i, j)| [i, j]).collect::<Vec<_>>(),
        "collisions": collisions_to_value(&report.collisions),
        "uncovered": report.collisions.uncovered_count,
        "canonical": spec_to_value(&d.canonical),
        "overlap": d.overlap.iter().copied().collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::e3;

    #[test]
    fn tensor_text_format() {
        let t = RealTensor::from_vec([2, 1], vec![1.5, -2.0]).unwrap();
        let text = to_text(&real_to_value(&t).unwrap());
        assert_eq!(text, "{\"dtype\":\"f64\",\"shape\":[2,1],\"data\":[1.5,-2.0]}\n");
        assert_eq!(AnyTensor::parse(&text).unwrap(), AnyTensor::F64(t));

        let i = IntTensor::from_vec([3], vec![4, 6, 7]).unwrap();
        let text = to_text(&int_to_value(&i));
        assert_eq!(text, "{\"dtype\":\"i64\",\"shape\":[3],\"data\":[4,6,7]}\n");
    }

    #[test]
    fn rejects_malformed_tensors() {
        assert!(matches!(AnyTensor::parse("{"), Err(Error::Json(_))));
        assert!(matches!(AnyTensor::parse(r#"{"dtype":"f32","shape":[1],"data":[1]}"#), Err(Error::Json(_))));
        assert!(matches!(AnyTensor::parse(r#"{"dtype":"f64","shape":[2],"data":[1]}"#), Err(Error::ShapeMismatch(_))));
        assert!(matches!(AnyTensor::parse(r#"{"dtype":"i64","shape":[1],"data":[1.5]}"#), Err(Error::Argument(_))));
        let nan = RealTensor::from_vec([1], vec![f64::NAN]).unwrap();
        assert!(real_to_value(&nan).is_err());
    }

    #[test]
    fn integer_documents_widen() {
        let t = AnyTensor::parse(r#"{"dtype":"i64","shape":[2],"data":[1,2]}"#).unwrap();
        assert_eq!(t.into_real().data(), &[1.0, 2.0]);
        let t = AnyTensor::parse(r#"{"dtype":"f64","shape":[2],"data":[1,2]}"#).unwrap();
        assert!(t.into_int().is_err());
    }

    #[test]
    fn picks() {
        let p = pick_from_value(json!({"pick": [4, 6, 7]})).unwrap();
        assert_eq!(p, Pick::new([4, 6, 7]));
        assert_eq!(pick_to_value(&p), json!({"pick": [4, 6, 7]}));
        assert!(matches!(pick_from_value(json!({"pick": [-1]})), Err(Error::NegativePick(-1))));
    }

    #[test]
    fn spec_documents() {
        let spec = crate::analysis::weak_decomposition(&e3());
        let back = spec_from_value(spec_to_value(&spec)).unwrap();
        assert_eq!(back.inner.table(), spec.inner.table());
        assert_eq!(back.out_pick, spec.out_pick);
        assert_eq!(back.pass_pick, spec.pass_pick);
        assert_eq!(back.inner_pick, spec.inner_pick);
        assert_eq!(back.source_shape, spec.source_shape);
        assert_eq!(back.target_shape, spec.target_shape);
    }
}
