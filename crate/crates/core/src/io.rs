//! JSON input documents: curves, conic matrices, Toda states and point
//! lists. Complex numbers are `[re, im]` pairs.

use crate::curve::{HyperellipticCurve, Point};
use crate::error::{Error, Result};
use crate::poncelet::ConicPair;
use crate::toda::TodaState;
use crate::C64;
use serde::{Deserialize, Serialize};

/// Largest genus accepted from a file.
pub const MAX_GENUS: usize = 16;
/// Longest Toda state or point list accepted from a file.
pub const MAX_LEN: usize = 4096;

/// `{"genus": 1, "lambda": [[0, 0], [-1, 0], [0, 0]]}`, `lambda` in
/// ascending degree without the leading 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveFile {
    pub genus: usize,
    pub lambda: Vec<C64>,
}

/// `{"a": [[re, im]; 9]}`, row-major `a_1..a_9`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConicFile {
    pub a: Vec<C64>,
}

/// `{"a": [...], "b": [...], "t": [re, im]}`; `t` defaults to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub a: Vec<C64>,
    pub b: Vec<C64>,
    #[serde(default)]
    pub t: C64,
}

/// `{"points": [{"x": [re, im], "y": [re, im]}, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointsFile {
    pub points: Vec<PointEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointEntry {
    pub x: C64,
    pub y: C64,
}

fn from_json<T: for<'de> Deserialize<'de>>(what: &str, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("{what}: {e}")))
}

fn finite(what: &str, v: &[C64]) -> Result<()> {
    match v.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
        Some(i) => Err(Error::InvalidInput(format!("{what}: entry {i} is not finite"))),
        None => Ok(()),
    }
}

pub fn parse_curve(text: &str) -> Result<HyperellipticCurve> {
    let f: CurveFile = from_json("curve file", text)?;
    if f.genus == 0 || f.genus > MAX_GENUS {
        return Err(Error::InvalidInput(format!("curve file: genus {} outside 1..={MAX_GENUS}", f.genus)));
    }
    finite("curve file: lambda", &f.lambda)?;
    HyperellipticCurve::new(f.genus, f.lambda)
}

pub fn curve_to_json(curve: &HyperellipticCurve) -> String {
    let lambda = curve.f_poly().coeffs()[..2 * curve.genus() + 1].to_vec();
    serde_json::to_string(&CurveFile { genus: curve.genus(), lambda }).expect("plain data serializes")
}

pub fn parse_conic(text: &str) -> Result<ConicPair> {
    let f: ConicFile = from_json("conic file", text)?;
    finite("conic file: a", &f.a)?;
    let a: [C64; 9] = f
        .a
        .try_into()
        .map_err(|v: Vec<C64>| Error::InvalidInput(format!("conic file: expected 9 entries, got {}", v.len())))?;
    ConicPair::new(a)
}

pub fn parse_state(text: &str) -> Result<TodaState> {
    let f: StateFile = from_json("state file", text)?;
    if f.a.len() > MAX_LEN {
        return Err(Error::InvalidInput(format!("state file: more than {MAX_LEN} sites")));
    }
    finite("state file: a", &f.a)?;
    finite("state file: b", &f.b)?;
    finite("state file: t", &[f.t])?;
    TodaState::new(f.a, f.b, f.t)
}

/// Points, each checked against `curve` to relative tolerance `1e-8`.
pub fn parse_points(text: &str, curve: &HyperellipticCurve) -> Result<Vec<Point>> {
    let f: PointsFile = from_json("point list", text)?;
    if f.points.len() > MAX_LEN {
        return Err(Error::InvalidInput(format!("point list: more than {MAX_LEN} points")));
    }
    let mut out = Vec::with_capacity(f.points.len());
    for (i, p) in f.points.iter().enumerate() {
        finite("point list", &[p.x, p.y])?;
        let q = Point::new(p.x, p.y);
        if !curve.on_curve(q, 1e-8) {
            return Err(Error::InvalidInput(format!("point list: point {i} is not on the curve")));
        }
        out.push(q);
    }
    Ok(out)
}
