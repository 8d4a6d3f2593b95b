//! Text forms of boxes, sets, obstacles, connections and paths used by the
//! command line and config files. Axes are 1-based in text.

use nalgebra::DMatrix;
use negligible_core::connection::{ConnectionForm, PiecewisePath};
use negligible_core::counterexamples::scenario;
use negligible_core::sets::{fat_cantor_build, CantorLikeSet, HalfSlab, ObstacleSet, OpenBox, SideConstraint};

use crate::CliError;

type Parsed<T> = Result<T, CliError>;

fn bad(what: &str, text: &str) -> CliError {
    CliError::Usage(format!("cannot parse {what} {text:?}"))
}

pub fn real(text: &str) -> Parsed<f64> {
    let t = text.trim();
    t.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| bad("number", t))
}

pub fn reals(text: &str, sep: char) -> Parsed<Vec<f64>> {
    text.split(sep).filter(|p| !p.trim().is_empty()).map(real).collect()
}

/// 1-based axis to 0-based.
pub fn axis(text: &str) -> Parsed<usize> {
    match text.trim().parse::<usize>() {
        Ok(a) if a >= 1 => Ok(a - 1),
        _ => Err(bad("axis", text)),
    }
}

/// `lo,hi;lo,hi;...`
pub fn open_box(text: &str) -> Parsed<OpenBox> {
    let iv = intervals(text)?;
    OpenBox::new(iv).map_err(CliError::from)
}

fn intervals(text: &str) -> Parsed<Vec<(f64, f64)>> {
    text.split(';')
        .map(|p| match reals(p, ',')?.as_slice() {
            [a, b] => Ok((*a, *b)),
            _ => Err(bad("interval", p)),
        })
        .collect()
}

/// Splits `k=v,k=v` where values may themselves contain commas.
fn key_values(text: &str) -> Parsed<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for part in text.split(',') {
        match part.split_once('=') {
            Some((k, v)) => out.push((k.trim().to_string(), v.trim().to_string())),
            None => match out.last_mut() {
                Some((_, v)) => {
                    v.push(',');
                    v.push_str(part.trim());
                }
                None => return Err(bad("key=value list", text)),
            },
        }
    }
    Ok(out)
}

/// `point:a,b,...`, `ternary:lo,hi[,depth]`, `fat:lo,hi,target`.
pub fn cantor_set(text: &str) -> Parsed<CantorLikeSet> {
    let (kind, args) = text.split_once(':').ok_or_else(|| bad("set", text))?;
    let v = reals(args, ',')?;
    let set = match (kind.trim(), v.as_slice()) {
        ("point" | "points", pts) if !pts.is_empty() => CantorLikeSet::discrete(pts.to_vec())?,
        ("ternary", [lo, hi]) => CantorLikeSet::ternary(*lo, *hi)?,
        ("ternary", [lo, hi, depth]) if *depth >= 0.0 => CantorLikeSet::ternary(*lo, *hi)?.with_depth(*depth as u32),
        ("fat", [lo, hi, target]) => fat_cantor_build((*lo, *hi), *target)?,
        _ => return Err(bad("set", text)),
    };
    Ok(set)
}

/// `halfslab:b1=..,slab=1,thin=2,C=<set>`, `product:<set>|<set>`,
/// `hyperplane:axis=2,level=..[,minK=..][,maxK=..]`, `box:lo,hi;lo,hi`, or `none`.
pub fn obstacle(text: &str) -> Parsed<ObstacleSet> {
    let text = text.trim();
    if text == "none" {
        return Ok(ObstacleSet::empty());
    }
    let (kind, args) = text.split_once(':').ok_or_else(|| bad("obstacle", text))?;
    match kind.trim() {
        "halfslab" => {
            let (mut b1, mut slab, mut thin, mut set) = (None, 0, None, None);
            for (k, v) in key_values(args)? {
                match k.as_str() {
                    "b1" | "threshold" => b1 = Some(real(&v)?),
                    "slab" => slab = axis(&v)?,
                    "thin" => thin = Some(axis(&v)?),
                    "C" => set = Some(cantor_set(&v)?),
                    _ => return Err(bad("half-slab key", &k)),
                }
            }
            let thin = thin.unwrap_or(if slab == 0 { 1 } else { 0 });
            let (b1, set) = b1.zip(set).ok_or_else(|| bad("half-slab (needs b1 and C)", text))?;
            Ok(ObstacleSet::half_slab(HalfSlab::new(b1, slab, thin, set)?))
        }
        "product" => {
            let (a, b) = args.split_once('|').ok_or_else(|| bad("product", text))?;
            Ok(ObstacleSet::product2(cantor_set(a)?, cantor_set(b)?)?)
        }
        "hyperplane" => {
            let (mut ax, mut level, mut constraints) = (None, None, Vec::new());
            for (k, v) in key_values(args)? {
                match k.as_str() {
                    "axis" => ax = Some(axis(&v)?),
                    "level" => level = Some(real(&v)?),
                    _ if k.starts_with("min") => constraints.push(SideConstraint::AtLeast {
                        axis: axis(&k[3..])?,
                        bound: real(&v)?,
                    }),
                    _ if k.starts_with("max") => constraints.push(SideConstraint::AtMost {
                        axis: axis(&k[3..])?,
                        bound: real(&v)?,
                    }),
                    _ => return Err(bad("hyperplane key", &k)),
                }
            }
            let (axis, level) = ax.zip(level).ok_or_else(|| bad("hyperplane (needs axis and level)", text))?;
            Ok(ObstacleSet::HyperplanePatch {
                axis,
                level,
                constraints,
            })
        }
        "box" => Ok(ObstacleSet::ClosedBox(intervals(args)?)),
        _ => Err(bad("obstacle", text)),
    }
}

/// `standard[:rank]`, `constant:<axis 1 entries>;<axis 2 entries>;...` with
/// row-major entries, or `scenario:<name>` for a registry connection.
pub fn connection(text: &str, domain: OpenBox) -> Parsed<ConnectionForm> {
    let text = text.trim();
    let (kind, args) = text.split_once(':').unwrap_or((text, ""));
    match kind {
        "standard" => {
            let rank = if args.is_empty() {
                1
            } else {
                args.trim().parse().map_err(|_| bad("rank", args))?
            };
            Ok(ConnectionForm::standard(domain, rank)?)
        }
        "constant" => {
            let mats = args
                .split(';')
                .map(|p| {
                    let v = reals(p, ',')?;
                    let r = (v.len() as f64).sqrt().round() as usize;
                    if r == 0 || r * r != v.len() {
                        return Err(bad("square matrix", p));
                    }
                    Ok(DMatrix::from_row_slice(r, r, &v))
                })
                .collect::<Parsed<Vec<_>>>()?;
            if mats.len() != domain.dim() {
                return Err(CliError::Usage(format!(
                    "{} matrices for a {}-dimensional box",
                    mats.len(),
                    domain.dim()
                )));
            }
            Ok(ConnectionForm::constant(domain, mats)?)
        }
        "scenario" => Ok(scenario(args, Some(domain.dim()))?.connection.restrict(&domain)?),
        _ => Err(bad("connection", text)),
    }
}

fn point(text: &str) -> Parsed<Vec<f64>> {
    let t = text.trim();
    let inner = t.strip_prefix('(').and_then(|s| s.strip_suffix(')')).unwrap_or(t);
    reals(inner, ',')
}

/// `segment:(a)->(b)` or `polyline:(p0)->(p1)->...`.
pub fn path(text: &str) -> Parsed<PiecewisePath> {
    let (kind, args) = text.split_once(':').ok_or_else(|| bad("path", text))?;
    let points = args.split("->").map(point).collect::<Parsed<Vec<_>>>()?;
    match (kind.trim(), points.as_slice()) {
        ("segment", [a, b]) => Ok(PiecewisePath::segment(a, b)?),
        ("polyline", pts) if pts.len() >= 2 => Ok(PiecewisePath::polyline(pts)?),
        _ => Err(bad("path", text)),
    }
}
