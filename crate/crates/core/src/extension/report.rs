use std::fmt::{self, Write as _};

use super::{Evidence, ExtensionReport};
use crate::numfmt::num;

fn point(x: &[f64]) -> String {
    let parts: Vec<String> = x.iter().map(|v| num(*v)).collect();
    format!("({})", parts.join(", "))
}

fn pairs(v: &[(f64, f64)]) -> String {
    let parts: Vec<String> = v.iter().map(|(h, q)| format!("{}:{}", num(*h), num(*q))).collect();
    parts.join(" ")
}

impl fmt::Display for Evidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Evidence::Disagreement { location, magnitude } => {
                write!(f, "disagreement {} at {}", num(*magnitude), point(location))
            }
            Evidence::Residual {
                axis,
                location,
                sequence,
            } => write!(f, "residual axis {} at {} h:r {}", axis + 1, point(location), pairs(sequence)),
            Evidence::Jump {
                location,
                axis,
                below,
                above,
            } => write!(
                f,
                "jump axis {} at {} below {} above {} jump {}",
                axis + 1,
                point(location),
                num(*below),
                num(*above),
                num((above - below).abs())
            ),
            Evidence::Divergent {
                location,
                axis,
                quotients,
            } => write!(f, "divergent axis {} at {} h:q {}", axis + 1, point(location), pairs(quotients)),
            Evidence::Frontier { nodes, sample } => {
                write!(f, "frontier {nodes} nodes, first at {}", point(sample))
            }
        }
    }
}

impl ExtensionReport {
    /// Plain `key: value` report; deterministic for identical runs.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "verdict: {}", self.verdict);
        let t = &self.tolerances;
        let _ = writeln!(
            out,
            "tolerances: agreement {} residual {} input {} step {} depth {}",
            num(t.agreement),
            num(t.residual),
            num(t.input),
            num(t.step),
            t.depth
        );
        for (axis, a1) in &self.base {
            let _ = writeln!(out, "base: axis {} at {}", axis + 1, num(*a1));
        }
        let _ = write!(out, "agreement: {}", num(self.agreement));
        if let Some(loc) = &self.agreement_location {
            let _ = write!(out, " at {}", point(loc));
        }
        out.push('\n');
        out.push_str("residuals:\n");
        out.push_str("  axis,max,eligible,asserted,location\n");
        for r in &self.residuals {
            let _ = writeln!(
                out,
                "  {},{},{},{},{}",
                r.axis + 1,
                num(r.max),
                r.eligible,
                r.asserted,
                r.location.as_deref().map(point).unwrap_or_default()
            );
        }
        for e in &self.evidence {
            let _ = writeln!(out, "evidence: {e}");
        }
        out
    }
}
