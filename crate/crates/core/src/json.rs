//! JSON schema for coefficient data.
//!
//! A space-time sequence serializes as
//! `{"d":1,"s":0.0,"omega":[1.0],"entries":[{"n":[1],"j":[1],"re":1.0,"im":0.0}]}`.
//! Interval scalars carry re/im as [lo, hi] pairs; exact rational runs add
//! `re_exact`/`im_exact` strings next to the rounded doubles so exactness
//! survives the file format. Readers that only care about double precision
//! use the midpoint of pairs and ignore the exact strings.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::SpaceTimeSequence;
use crate::error::{Error, Result};
use crate::interval::{ComplexInterval, Interval};
use crate::lattice::{FrequencyVector, MultiIndex};
use crate::scalar::{RationalComplex, Scalar};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceJson {
    pub d: usize,
    pub s: f64,
    pub omega: Vec<f64>,
    pub entries: Vec<EntryJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntryJson {
    pub n: Vec<i64>,
    pub j: Vec<i64>,
    pub re: ComponentJson,
    pub im: ComponentJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub re_exact: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im_exact: Option<String>,
}

/// A real component: plain double or an interval [lo, hi].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComponentJson {
    Num(f64),
    Pair([f64; 2]),
}

impl ComponentJson {
    pub fn midpoint(self) -> f64 {
        match self {
            ComponentJson::Num(v) => v,
            ComponentJson::Pair([lo, hi]) => lo + (hi - lo) / 2.0,
        }
    }

    fn interval(self) -> Result<Interval> {
        match self {
            ComponentJson::Num(v) => Ok(Interval::point(v)),
            ComponentJson::Pair([lo, hi]) => Interval::new(lo, hi),
        }
    }
}

pub fn to_json_f64(seq: &SpaceTimeSequence<Complex64>) -> SequenceJson {
    encode(seq, |v, e| {
        e.re = ComponentJson::Num(v.re);
        e.im = ComponentJson::Num(v.im);
    })
}

pub fn to_json_rational(seq: &SpaceTimeSequence<RationalComplex>) -> SequenceJson {
    encode(seq, |v, e| {
        let approx = v.approx();
        e.re = ComponentJson::Num(approx.re);
        e.im = ComponentJson::Num(approx.im);
        e.re_exact = Some(v.re.to_string());
        e.im_exact = Some(v.im.to_string());
    })
}

pub fn to_json_interval(seq: &SpaceTimeSequence<ComplexInterval>) -> SequenceJson {
    encode(seq, |v, e| {
        e.re = ComponentJson::Pair([v.re.lo(), v.re.hi()]);
        e.im = ComponentJson::Pair([v.im.lo(), v.im.hi()]);
    })
}

fn encode<S: Scalar, F: Fn(&S, &mut EntryJson)>(
    seq: &SpaceTimeSequence<S>,
    fill: F,
) -> SequenceJson {
    let mut entries = Vec::new();
    seq.for_each(|n, j, v| {
        let mut e = EntryJson {
            n: n.entries().to_vec(),
            j: j.entries().to_vec(),
            re: ComponentJson::Num(0.0),
            im: ComponentJson::Num(0.0),
            re_exact: None,
            im_exact: None,
        };
        fill(v, &mut e);
        entries.push(e);
    });
    SequenceJson {
        d: seq.dim(),
        s: seq.weight_exponent(),
        omega: seq.omega().components().to_vec(),
        entries,
    }
}

/// Double-precision view of any stored sequence (pairs collapse to their
/// midpoints).
pub fn from_json_f64(json: &SequenceJson) -> Result<SpaceTimeSequence<Complex64>> {
    let omega = FrequencyVector::new(json.omega.clone())?;
    let mut seq = SpaceTimeSequence::new(json.d, json.s, omega)?;
    for e in &json.entries {
        let n = MultiIndex::new(e.n.clone())?;
        let j = MultiIndex::new(e.j.clone())?;
        seq.insert(n, j, Complex64::new(e.re.midpoint(), e.im.midpoint()))?;
    }
    Ok(seq)
}

/// Interval view; plain numbers become degenerate intervals.
pub fn from_json_interval(json: &SequenceJson) -> Result<SpaceTimeSequence<ComplexInterval>> {
    let omega = FrequencyVector::new(json.omega.clone())?;
    let mut seq = SpaceTimeSequence::new(json.d, json.s, omega)?;
    for e in &json.entries {
        let n = MultiIndex::new(e.n.clone())?;
        let j = MultiIndex::new(e.j.clone())?;
        seq.insert(
            n,
            j,
            ComplexInterval::new(e.re.interval()?, e.im.interval()?),
        )?;
    }
    Ok(seq)
}

/// Exact view of a file produced with rational scalars.
pub fn from_json_rational(json: &SequenceJson) -> Result<SpaceTimeSequence<RationalComplex>> {
    let omega = FrequencyVector::new(json.omega.clone())?;
    let mut seq = SpaceTimeSequence::new(json.d, json.s, omega)?;
    for e in &json.entries {
        let n = MultiIndex::new(e.n.clone())?;
        let j = MultiIndex::new(e.j.clone())?;
        let re = match &e.re_exact {
            Some(s) => crate::scalar::rational_from_str(s)?,
            None => crate::scalar::WeightRing::from_f64(e.re.midpoint()),
        };
        let im = match &e.im_exact {
            Some(s) => crate::scalar::rational_from_str(s)?,
            None => crate::scalar::WeightRing::from_f64(e.im.midpoint()),
        };
        seq.insert(n, j, RationalComplex::new(re, im))?;
    }
    Ok(seq)
}

impl SequenceJson {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("bad sequence JSON: {e}")))
    }
}
