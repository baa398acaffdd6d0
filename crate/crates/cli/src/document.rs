//! JSON form of a net.
//!
//! Floats go through serde_json's shortest round-trip formatting, so writing
//! and reading back reproduces every value bit for bit, and identical nets
//! serialize to identical bytes.

use anyhow::{bail, Context, Result};
use icnet::net::{
    Branch, Cell, CellCircle, CellPattern, CheckerboardNet, Family, NetLine, NetMeta,
};
use icnet::pencil::QuadricForm;
use icnet::{OrientedCircle, OrientedLine};
use serde::{Deserialize, Serialize};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetDocument {
    pub schema: u32,
    pub meta: MetaRecord,
    pub lines: Vec<LineRecord>,
    pub circles: Vec<CircleRecord>,
    #[serde(default)]
    pub degenerate: Vec<[i64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaRecord {
    pub kind: String,
    pub version: String,
    pub tolerance: f64,
    pub parameters: Vec<Parameter>,
    /// Upper triangle of a pencil member, `q11 q12 q13 q14 q22 ... q44`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pencil: Option<[f64; 10]>,
    /// Cells meant to carry circles when not the plain checkerboard.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<Vec<[i64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameter {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyName {
    Vertical,
    Horizontal,
}

impl From<Family> for FamilyName {
    fn from(f: Family) -> Self {
        match f {
            Family::Vertical => FamilyName::Vertical,
            Family::Horizontal => FamilyName::Horizontal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineRecord {
    pub family: FamilyName,
    pub index: i64,
    pub v: f64,
    pub w: f64,
    pub d: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<i8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleRecord {
    pub cell: [i64; 2],
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
    pub residual: f64,
}

fn line_record(family: Family, l: &NetLine) -> LineRecord {
    LineRecord {
        family: family.into(),
        index: l.index,
        v: l.line.v(),
        w: l.line.w(),
        d: l.line.d(),
        branch: l.branch.map(|b| if b == Branch::Plus { 1 } else { -1 }),
        psi: l.psi,
    }
}

impl NetDocument {
    pub fn from_net(net: &CheckerboardNet) -> Self {
        let lines = net
            .vertical
            .iter()
            .map(|l| line_record(Family::Vertical, l))
            .chain(
                net.horizontal
                    .iter()
                    .map(|l| line_record(Family::Horizontal, l)),
            )
            .collect();
        let circles = net
            .circles
            .iter()
            .map(|c| CircleRecord {
                cell: [c.cell.i, c.cell.j],
                cx: c.circle.cx,
                cy: c.circle.cy,
                r: c.circle.r,
                residual: c.residual,
            })
            .collect();
        NetDocument {
            schema: SCHEMA,
            meta: MetaRecord {
                kind: net.meta.kind.clone(),
                version: env!("CARGO_PKG_VERSION").to_owned(),
                tolerance: net.meta.tolerance,
                parameters: net
                    .meta
                    .parameters
                    .iter()
                    .map(|(name, value)| Parameter {
                        name: name.clone(),
                        value: *value,
                    })
                    .collect(),
                pencil: net.meta.pencil.map(|q| q.upper()),
                cells: match &net.pattern {
                    CellPattern::Checkerboard => None,
                    CellPattern::Listed(cells) => Some(cells.iter().map(|c| [c.i, c.j]).collect()),
                },
            },
            lines,
            circles,
            degenerate: net.degenerate.iter().map(|c| [c.i, c.j]).collect(),
        }
    }

    pub fn to_net(&self) -> Result<CheckerboardNet> {
        if self.schema != SCHEMA {
            bail!("unsupported schema {} (expected {SCHEMA})", self.schema);
        }
        let mut vertical = Vec::new();
        let mut horizontal = Vec::new();
        for r in &self.lines {
            let line = OrientedLine::from_components(r.v, r.w, r.d)
                .with_context(|| format!("{:?} line {}", r.family, r.index))?;
            let branch = match r.branch {
                None => None,
                Some(1) => Some(Branch::Plus),
                Some(-1) => Some(Branch::Minus),
                Some(b) => bail!("branch must be 1 or -1, got {b}"),
            };
            let nl = NetLine {
                index: r.index,
                line,
                branch,
                psi: r.psi,
            };
            match r.family {
                FamilyName::Vertical => vertical.push(nl),
                FamilyName::Horizontal => horizontal.push(nl),
            }
        }
        for (name, lines) in [("vertical", &vertical), ("horizontal", &horizontal)] {
            if lines.windows(2).any(|w| w[1].index != w[0].index + 1) {
                bail!("{name} line indices are not consecutive");
            }
        }
        let mut meta = NetMeta::new(&self.meta.kind);
        meta.tolerance = self.meta.tolerance;
        meta.parameters = self
            .meta
            .parameters
            .iter()
            .map(|p| (p.name.clone(), p.value))
            .collect();
        meta.pencil = self.meta.pencil.map(QuadricForm::from_upper);
        let mut net = CheckerboardNet::new(vertical, horizontal, meta);
        if let Some(cells) = &self.meta.cells {
            net.pattern =
                CellPattern::Listed(cells.iter().map(|c| Cell::new(c[0], c[1])).collect());
        }
        net.circles = self
            .circles
            .iter()
            .map(|c| CellCircle {
                cell: Cell::new(c.cell[0], c.cell[1]),
                circle: OrientedCircle {
                    cx: c.cx,
                    cy: c.cy,
                    r: c.r,
                },
                residual: c.residual,
            })
            .collect();
        net.degenerate = self
            .degenerate
            .iter()
            .map(|c| Cell::new(c[0], c[1]))
            .collect();
        Ok(net)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn parameter(&self, name: &str) -> Option<f64> {
        self.meta
            .parameters
            .iter()
            .find(|p| p.name == name)
            .map(|p| p.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use icnet::confocal::{ConfocalConic, NetParams};
    use icnet::Execution;
    use proptest::strategy::Strategy;

    #[test]
    fn round_trip_is_exact() {
        let p = NetParams::new(
            ConfocalConic::elliptic(2.0, 1.0).unwrap(),
            1.3,
            2.9,
            0.1,
            0.7,
        )
        .unwrap();
        let net = p.net(0..7, -2..5, Execution::Sequential).unwrap();
        let doc = NetDocument::from_net(&net);
        let text = doc.to_json();
        let back = NetDocument::from_json(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_net().unwrap(), net);
        assert_eq!(back.to_json(), text);
    }

    proptest::proptest! {
        #[test]
        fn arbitrary_floats_round_trip(
            v in -1e3..1e3_f64, w in -1e3..1e3_f64, d in proptest::num::f64::NORMAL,
            c in proptest::array::uniform4(proptest::num::f64::ANY.prop_filter("finite", |x| x.is_finite())),
        ) {
            proptest::prop_assume!(v != 0.0 || w != 0.0);
            let doc = NetDocument {
                schema: SCHEMA,
                meta: MetaRecord {
                    kind: "test".into(),
                    version: "0".into(),
                    tolerance: c[3].abs().max(1e-300),
                    parameters: vec![Parameter { name: "x".into(), value: c[0] }],
                    pencil: None,
                    cells: None,
                },
                lines: vec![LineRecord { family: FamilyName::Vertical, index: 0, v, w, d, branch: None, psi: Some(c[1]) }],
                circles: vec![CircleRecord { cell: [0, 0], cx: c[0], cy: c[1], r: c[2], residual: c[3] }],
                degenerate: vec![],
            };
            let back = NetDocument::from_json(&doc.to_json()).unwrap();
            proptest::prop_assert_eq!(&back, &doc);
            let net = back.to_net().unwrap();
            proptest::prop_assert_eq!(NetDocument::from_net(&net).lines, doc.lines);
        }
    }

    #[test]
    fn rejects_gaps_and_schemas() {
        let p = NetParams::new(
            ConfocalConic::elliptic(2.0, 1.0).unwrap(),
            1.3,
            2.9,
            0.1,
            0.7,
        )
        .unwrap();
        let mut doc = NetDocument::from_net(&p.net(0..4, 0..4, Execution::Sequential).unwrap());
        doc.schema = 2;
        assert!(doc.to_net().is_err());
        doc.schema = SCHEMA;
        doc.lines.remove(1);
        assert!(doc.to_net().is_err());
    }
}
