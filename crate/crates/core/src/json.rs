//! Canonical JSON for every artifact.
//!
//! Keys are sorted, there is no insignificant whitespace, and integers whose
//! magnitude exceeds 2^53 are written as decimal strings. Parsing accepts
//! both encodings, so `parse(print(x))` prints to the same bytes.

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::{Signed, ToPrimitive};
use serde_json::{json, Map, Value};

use crate::blowup::{BlowupModel, Chart};
use crate::error::{Error, Result};
use crate::flatten::{ChartCheck, FlatteningCertificate, Overall};
use crate::homs::{Counterexample, IntegralityStatus, IntegralityVerdict, MonoidHom};
use crate::ideals::{support_function_of_ideal, MonoidIdeal, SupportFunction};
use crate::lattice::{IntMatrix, IntVector};
use crate::monoids::FineMonoid;
use crate::polyhedra::{Cone, Fan, FanMap};

const SAFE: i64 = 1 << 53;

pub trait Artifact: Sized {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;
}

/// Compact, key-sorted serialisation.
pub fn canonical_string(v: &Value) -> String {
    // serde_json maps are ordered by key
    serde_json::to_string(v).expect("values serialise")
}

pub fn canonical_json<T: Artifact>(x: &T) -> String {
    canonical_string(&x.to_json())
}

/// Parses text, reporting the line and column of syntax errors.
pub fn parse_value(text: &str) -> Result<Value> {
    serde_json::from_str(text)
        .map_err(|e| Error::InvalidInput(format!("line {} column {}: {}", e.line(), e.column(), e)))
}

pub fn parse_artifact<T: Artifact>(text: &str) -> Result<T> {
    T::from_json(&parse_value(text)?)
}

fn bad(what: &str) -> Error {
    Error::InvalidInput(format!("expected {what}"))
}

pub fn int_to_json(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(i) if i.abs() <= SAFE => json!(i),
        _ => Value::String(x.to_string()),
    }
}

pub fn int_from_json(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigInt::from(i))
            } else if let Some(u) = n.as_u64() {
                Ok(BigInt::from(u))
            } else {
                Err(bad("an integer"))
            }
        }
        Value::String(s) => s.parse::<BigInt>().map_err(|_| bad("a decimal integer string")),
        _ => Err(bad("an integer")),
    }
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| Error::InvalidInput(format!("missing field \"{key}\"")))
}

fn usize_of(v: &Value) -> Result<usize> {
    v.as_u64().map(|u| u as usize).ok_or_else(|| bad("a nonnegative integer"))
}

fn u64_of(v: &Value) -> Result<u64> {
    v.as_u64().ok_or_else(|| bad("a nonnegative integer"))
}

fn bool_of(v: &Value) -> Result<bool> {
    v.as_bool().ok_or_else(|| bad("a boolean"))
}

fn array(v: &Value) -> Result<&Vec<Value>> {
    v.as_array().ok_or_else(|| bad("an array"))
}

pub fn vector_to_json(x: &IntVector) -> Value {
    Value::Array(x.coords().iter().map(int_to_json).collect())
}

pub fn vector_from_json(v: &Value) -> Result<IntVector> {
    Ok(IntVector(array(v)?.iter().map(int_from_json).collect::<Result<_>>()?))
}

fn vectors_to_json(xs: &[IntVector]) -> Value {
    Value::Array(xs.iter().map(vector_to_json).collect())
}

fn vectors_from_json(v: &Value, rank: usize) -> Result<Vec<IntVector>> {
    let out: Vec<IntVector> = array(v)?.iter().map(vector_from_json).collect::<Result<_>>()?;
    if let Some(x) = out.iter().find(|x| x.len() != rank) {
        return Err(Error::DimensionMismatch(format!("vector {x} in rank {rank}")));
    }
    Ok(out)
}

pub fn matrix_to_json(m: &IntMatrix) -> Value {
    vectors_to_json(&m.row_vectors())
}

/// A matrix given as a list of rows, with its shape fixed by context.
pub fn matrix_from_json(v: &Value, rows: usize, cols: usize) -> Result<IntMatrix> {
    let r = vectors_from_json(v, cols)?;
    if r.len() != rows {
        return Err(Error::DimensionMismatch(format!("{} rows, expected {rows}", r.len())));
    }
    IntMatrix::from_row_vectors(cols, &r)
}

fn rank_of(v: &Value, list: &str) -> Result<usize> {
    match v.get("rank") {
        Some(r) => usize_of(r),
        None => array(field(v, list)?)?
            .first()
            .map(|x| array(x).map(|a| a.len()))
            .unwrap_or(Err(Error::InvalidInput("missing field \"rank\"".into()))),
    }
}

impl Artifact for IntVector {
    fn to_json(&self) -> Value {
        vector_to_json(self)
    }

    fn from_json(v: &Value) -> Result<Self> {
        vector_from_json(v)
    }
}

impl Artifact for FineMonoid {
    fn to_json(&self) -> Value {
        json!({"rank": self.rank(), "generators": vectors_to_json(self.generators())})
    }

    fn from_json(v: &Value) -> Result<Self> {
        let rank = rank_of(v, "generators")?;
        FineMonoid::new(rank, &vectors_from_json(field(v, "generators")?, rank)?)
    }
}

impl Artifact for Cone {
    fn to_json(&self) -> Value {
        json!({"rank": self.rank(), "rays": vectors_to_json(self.rays())})
    }

    fn from_json(v: &Value) -> Result<Self> {
        let rank = rank_of(v, "rays")?;
        Cone::new(rank, &vectors_from_json(field(v, "rays")?, rank)?)
    }
}

impl Artifact for Fan {
    /// Maximal cones only; faces are implied.
    fn to_json(&self) -> Value {
        let cones: Vec<Value> = self.maximal_cones().iter().map(|c| json!(c)).collect();
        json!({"rank": self.rank(), "rays": vectors_to_json(self.rays()), "cones": cones})
    }

    fn from_json(v: &Value) -> Result<Self> {
        let rank = rank_of(v, "rays")?;
        let rays = vectors_from_json(field(v, "rays")?, rank)?;
        let cones: Vec<Vec<usize>> = array(field(v, "cones")?)?
            .iter()
            .map(|c| array(c)?.iter().map(usize_of).collect::<Result<Vec<usize>>>())
            .collect::<Result<_>>()?;
        Fan::new(rank, &rays, &cones)
    }
}

impl Artifact for MonoidIdeal {
    fn to_json(&self) -> Value {
        json!({"monoid": self.parent().to_json(), "generators": vectors_to_json(self.generators())})
    }

    fn from_json(v: &Value) -> Result<Self> {
        let m = FineMonoid::from_json(field(v, "monoid")?)?;
        let g = vectors_from_json(field(v, "generators")?, m.rank())?;
        MonoidIdeal::minimal_generators(&m, &g)
    }
}

impl Artifact for MonoidHom {
    fn to_json(&self) -> Value {
        json!({
            "source": self.source().to_json(),
            "target": self.target().to_json(),
            "matrix": matrix_to_json(self.matrix()),
        })
    }

    fn from_json(v: &Value) -> Result<Self> {
        let s = FineMonoid::from_json(field(v, "source")?)?;
        let t = FineMonoid::from_json(field(v, "target")?)?;
        let m = matrix_from_json(field(v, "matrix")?, t.rank(), s.rank())?;
        MonoidHom::new(s, t, m)
    }
}

impl Artifact for SupportFunction {
    fn to_json(&self) -> Value {
        let maxes = self.fan().maximal_cones();
        let mut pieces = Map::new();
        for (i, c) in maxes.iter().enumerate() {
            pieces.insert(i.to_string(), vector_to_json(&self.pieces()[c]));
        }
        json!({"domain": self.domain().to_json(), "fan": self.fan().to_json(), "pieces": pieces})
    }

    fn from_json(v: &Value) -> Result<Self> {
        let domain = Cone::from_json(field(v, "domain")?)?;
        let fan = Fan::from_json(field(v, "fan")?)?;
        let maxes = fan.maximal_cones();
        let obj = field(v, "pieces")?.as_object().ok_or_else(|| bad("an object of pieces"))?;
        let mut pieces = BTreeMap::new();
        for (k, m) in obj {
            let i: usize = k.parse().map_err(|_| bad("a cone index key"))?;
            let c = maxes.get(i).ok_or_else(|| Error::InvalidInput(format!("cone index {i} out of range")))?;
            pieces.insert(c.clone(), vector_from_json(m)?);
        }
        SupportFunction::new(domain, fan, pieces)
    }
}

impl Artifact for Counterexample {
    fn to_json(&self) -> Value {
        json!({
            "a1": vector_to_json(&self.a1),
            "a2": vector_to_json(&self.a2),
            "b1": vector_to_json(&self.b1),
            "b2": vector_to_json(&self.b2),
        })
    }

    fn from_json(v: &Value) -> Result<Self> {
        Ok(Counterexample {
            a1: vector_from_json(field(v, "a1")?)?,
            a2: vector_from_json(field(v, "a2")?)?,
            b1: vector_from_json(field(v, "b1")?)?,
            b2: vector_from_json(field(v, "b2")?)?,
        })
    }
}

impl Artifact for IntegralityVerdict {
    fn to_json(&self) -> Value {
        json!({
            "status": self.status.as_str(),
            "counterexample": self.counterexample.as_ref().map(|c| c.to_json()),
            "witness_bound": self.witness_bound,
        })
    }

    fn from_json(v: &Value) -> Result<Self> {
        let status = field(v, "status")?
            .as_str()
            .and_then(IntegralityStatus::parse)
            .ok_or_else(|| bad("an integrality status"))?;
        let counterexample = match v.get("counterexample") {
            None | Some(Value::Null) => None,
            Some(c) => Some(Counterexample::from_json(c)?),
        };
        Ok(IntegralityVerdict { status, counterexample, witness_bound: u64_of(field(v, "witness_bound")?)? })
    }
}

fn cone_position(fan: &Fan, c: &[usize]) -> usize {
    fan.maximal_cones().iter().position(|m| m == c).expect("maximal cone")
}

fn maximal_at(fan: &Fan, v: &Value) -> Result<Vec<usize>> {
    let i = usize_of(v)?;
    fan.maximal_cones().get(i).cloned().ok_or_else(|| Error::InvalidInput(format!("cone index {i} out of range")))
}

impl Artifact for BlowupModel {
    fn to_json(&self) -> Value {
        let charts: Vec<Value> = self
            .charts
            .iter()
            .map(|c| {
                json!({
                    "pivot": vector_to_json(&c.pivot),
                    "cone": cone_position(&self.fan, &c.cone),
                    "generators": vectors_to_json(c.monoid.generators()),
                    "inclusion": matrix_to_json(c.inclusion.matrix()),
                })
            })
            .collect();
        json!({
            "base": self.base.to_json(),
            "ideal": vectors_to_json(self.ideal.generators()),
            "fan": self.fan.to_json(),
            "saturated": self.saturated,
            "charts": charts,
        })
    }

    fn from_json(v: &Value) -> Result<Self> {
        let base = FineMonoid::from_json(field(v, "base")?)?;
        let r = base.rank();
        let ideal = MonoidIdeal::minimal_generators(&base, &vectors_from_json(field(v, "ideal")?, r)?)?;
        let fan = Fan::from_json(field(v, "fan")?)?;
        let function = support_function_of_ideal(&ideal)?;
        let charts = array(field(v, "charts")?)?
            .iter()
            .map(|c| {
                let monoid = FineMonoid::new(r, &vectors_from_json(field(c, "generators")?, r)?)?;
                let m = matrix_from_json(field(c, "inclusion")?, r, r)?;
                Ok(Chart {
                    pivot: vector_from_json(field(c, "pivot")?)?,
                    cone: maximal_at(&fan, field(c, "cone")?)?,
                    inclusion: MonoidHom::new(base.clone(), monoid.clone(), m)?,
                    monoid,
                })
            })
            .collect::<Result<_>>()?;
        Ok(BlowupModel { base, ideal, function, fan, charts, saturated: bool_of(field(v, "saturated")?)? })
    }
}

impl Artifact for FlatteningCertificate {
    fn to_json(&self) -> Value {
        let charts: Vec<Value> = self
            .charts
            .iter()
            .map(|c| {
                json!({
                    "base_cone": cone_position(&self.base_fan, &c.base_cone),
                    "base_chart": c.base_chart.to_json(),
                    "source_chart": c.source_chart.to_json(),
                    "matrix": matrix_to_json(c.chart_hom.matrix()),
                    "verdict": c.verdict.to_json(),
                })
            })
            .collect();
        json!({
            "input": self.input.to_json(),
            "phi": self.phi.to_json(),
            "ideal": vectors_to_json(self.ideal.generators()),
            "base_fan": self.base_fan.to_json(),
            "source_fan": self.source_fan.to_json(),
            "fan_map": matrix_to_json(&self.fan_map.matrix),
            "equidimensional": self.equidimensional,
            "base_smooth": self.base_smooth,
            "charts": charts,
            "overall": self.overall.as_str(),
            "fast_exit": self.fast_exit,
            "fallback_iterations": self.fallback_iterations,
            "oracle_bound": self.oracle_bound,
            "height_bound": self.height_bound,
        })
    }

    fn from_json(v: &Value) -> Result<Self> {
        let input = MonoidHom::from_json(field(v, "input")?)?;
        let (q, p) = (input.source().clone(), input.target().clone());
        let ideal = MonoidIdeal::minimal_generators(&q, &vectors_from_json(field(v, "ideal")?, q.rank())?)?;
        let base_fan = Fan::from_json(field(v, "base_fan")?)?;
        let source_fan = Fan::from_json(field(v, "source_fan")?)?;
        let fan_map = FanMap::new(
            matrix_from_json(field(v, "fan_map")?, q.rank(), p.rank())?,
            source_fan.clone(),
            base_fan.clone(),
        )?;
        let charts = array(field(v, "charts")?)?
            .iter()
            .map(|c| {
                let base_chart = FineMonoid::from_json(field(c, "base_chart")?)?;
                let source_chart = FineMonoid::from_json(field(c, "source_chart")?)?;
                let m = matrix_from_json(field(c, "matrix")?, p.rank(), q.rank())?;
                Ok(ChartCheck {
                    base_cone: maximal_at(&base_fan, field(c, "base_cone")?)?,
                    chart_hom: MonoidHom::new(base_chart.clone(), source_chart.clone(), m)?,
                    base_chart,
                    source_chart,
                    verdict: IntegralityVerdict::from_json(field(c, "verdict")?)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(FlatteningCertificate {
            phi: SupportFunction::from_json(field(v, "phi")?)?,
            ideal,
            base_fan,
            source_fan,
            fan_map,
            equidimensional: bool_of(field(v, "equidimensional")?)?,
            base_smooth: bool_of(field(v, "base_smooth")?)?,
            charts,
            overall: field(v, "overall")?.as_str().and_then(Overall::parse).ok_or_else(|| bad("an overall status"))?,
            fast_exit: bool_of(field(v, "fast_exit")?)?,
            fallback_iterations: usize_of(field(v, "fallback_iterations")?)?,
            oracle_bound: u64_of(field(v, "oracle_bound")?)?,
            height_bound: u64_of(field(v, "height_bound")?)?,
            input,
        })
    }
}

/// Whether a value uses only canonical integer encodings.
pub fn is_canonical_integer(v: &Value) -> bool {
    match v {
        Value::Number(n) => n.as_i64().is_some_and(|i| i.abs() <= SAFE),
        Value::String(s) => s.parse::<BigInt>().is_ok_and(|b| b.abs() > BigInt::from(SAFE)),
        _ => false,
    }
}
