//! Text formats: fan and polytope documents (TOML) and a compact one-line
//! fan encoding used by checkpoint files.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Deserialize;

use crate::fan::{validate_parts, Fan, ValidationReport};
use crate::lattice::LatticeVector;
use crate::polytope::{convex_hull_rational, Polytope, RationalPoint};
use crate::{Error, Result};

/// Raw contents of a fan document, before any geometric validation.
#[derive(Clone, Debug, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct FanDocument {
    pub dim: usize,
    pub rays: Vec<Vec<i64>>,
    pub max_cones: Vec<Vec<usize>>,
}

impl FanDocument {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn validate(&self) -> ValidationReport {
        validate_parts(self.dim, &self.lattice_rays(), &self.max_cones)
    }

    pub fn into_fan(self) -> Result<Fan> {
        let rays = self.lattice_rays();
        Fan::new(self.dim, rays, self.max_cones)
    }

    fn lattice_rays(&self) -> Vec<LatticeVector> {
        self.rays.iter().map(|r| LatticeVector::new(r.clone())).collect()
    }
}

pub fn parse_fan(text: &str) -> Result<Fan> {
    FanDocument::parse(text)?.into_fan()
}

fn write_int_list<T: std::fmt::Display>(out: &mut String, xs: &[T]) {
    out.push('[');
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{x}");
    }
    out.push(']');
}

fn write_nested<T: std::fmt::Display>(out: &mut String, key: &str, rows: &[Vec<T>]) {
    let _ = write!(out, "{key} = [");
    for (i, row) in rows.iter().enumerate() {
        out.push_str(if i == 0 { "\n  " } else { ",\n  " });
        write_int_list(out, row);
    }
    out.push_str(if rows.is_empty() { "]\n" } else { ",\n]\n" });
}

/// Serialize a fan. The fan keeps its cones sorted, so output is byte-stable.
pub fn write_fan(fan: &Fan) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "dim = {}", fan.dim());
    let rays: Vec<Vec<i64>> = fan.rays().iter().map(|r| r.coords().to_vec()).collect();
    write_nested(&mut out, "rays", &rays);
    let cones: Vec<Vec<usize>> = fan.max_cones().iter().map(|c| c.indices().to_vec()).collect();
    write_nested(&mut out, "max_cones", &cones);
    out
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Coord {
    Int(i64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolytopeDocument {
    dim: usize,
    vertices: Vec<Vec<Coord>>,
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Polytope(format!("bad rational coordinate {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

/// Parse a polytope document. Coordinates are integers, or strings such as
/// `"-1/2"` for rational vertices. The polytope is the convex hull of the
/// listed points.
pub fn parse_polytope(text: &str) -> Result<Polytope> {
    let doc: PolytopeDocument = toml::from_str(text)?;
    let mut points: Vec<RationalPoint> = Vec::with_capacity(doc.vertices.len());
    for v in &doc.vertices {
        if v.len() != doc.dim {
            return Err(Error::DimensionMismatch { expected: doc.dim, found: v.len() });
        }
        let p = v
            .iter()
            .map(|c| match c {
                Coord::Int(k) => Ok(BigRational::from_integer(BigInt::from(*k))),
                Coord::Text(s) => parse_rational(s),
            })
            .collect::<Result<Vec<_>>>()?;
        points.push(p);
    }
    if points.is_empty() {
        return Err(Error::Polytope("no vertices".into()));
    }
    convex_hull_rational(&points)
}

fn render_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("\"{}/{}\"", q.numer(), q.denom())
    }
}

pub fn write_polytope(p: &Polytope) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "dim = {}", p.dim());
    let rows: Vec<Vec<String>> =
        p.vertices().iter().map(|v| v.iter().map(render_rational).collect()).collect();
    write_nested(&mut out, "vertices", &rows);
    out
}

/// One-line encoding `dim:rays:cones`, with rays as `a,b,c` joined by `/`
/// and cones as `i.j.k` joined by `/`. Example: `2:1,0/0,1/-1,-1:0.1/0.2/1.2`.
pub fn encode_compact(fan: &Fan) -> String {
    let rays: Vec<String> = fan
        .rays()
        .iter()
        .map(|r| r.coords().iter().map(i64::to_string).collect::<Vec<_>>().join(","))
        .collect();
    let cones: Vec<String> = fan
        .max_cones()
        .iter()
        .map(|c| c.indices().iter().map(usize::to_string).collect::<Vec<_>>().join("."))
        .collect();
    format!("{}:{}:{}", fan.dim(), rays.join("/"), cones.join("/"))
}

pub fn decode_compact(s: &str) -> Result<Fan> {
    let err = |m: &str| Error::Parse { line: 0, message: m.to_string() };
    let mut parts = s.trim().split(':');
    let (Some(d), Some(r), Some(c), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
        return Err(err("expected dim:rays:cones"));
    };
    let dim: usize = d.parse().map_err(|_| err("bad dimension"))?;
    let rays = r
        .split('/')
        .map(|ray| {
            ray.split(',')
                .map(|x| x.parse::<i64>().map_err(|_| err("bad ray coordinate")))
                .collect::<Result<Vec<_>>>()
                .map(LatticeVector::new)
        })
        .collect::<Result<Vec<_>>>()?;
    let cones = c
        .split('/')
        .map(|cone| {
            cone.split('.')
                .map(|x| x.parse::<usize>().map_err(|_| err("bad cone index")))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Fan::new(dim, rays, cones)
}
