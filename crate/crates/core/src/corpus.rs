//! The `stratacalc-corpus/1` TOML format: functions with their sample data,
//! and (function, oracle) entries for the equivalence matrix.
//!
//! [`CorpusFile`] mirrors the text one-to-one, so load → serialize → load is
//! lossless; [`Corpus`] holds the validated, built objects.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::conditions::MatrixEntry;
use crate::oracles::parse_oracle;
use crate::piecewise::{
    Arrangement, BoundingBox, Curve, Hyperplane, PiecewiseFunction, Polynomial, SignVector,
    UniPoly,
};

pub const FORMAT: &str = "stratacalc-corpus/1";

/// The corpus shipped with the library.
pub const DEFAULT_CORPUS: &str = include_str!("../corpus/default.toml");

const DEFAULT_HALF_WIDTH: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusFile {
    pub format: String,
    #[serde(default, rename = "function")]
    pub functions: Vec<FunctionSpec>,
    #[serde(default, rename = "entry")]
    pub entries: Vec<EntrySpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    pub id: String,
    pub dim: usize,
    pub outputs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz_hint: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bbox: Option<BoxSpec>,
    #[serde(default)]
    pub base_points: Vec<Vec<f64>>,
    #[serde(default)]
    pub roots: Vec<Vec<f64>>,
    /// Extra hyperplanes refining the function's own arrangement.
    #[serde(default)]
    pub partition: Vec<HyperplaneSpec>,
    #[serde(default, rename = "hyperplane")]
    pub hyperplanes: Vec<HyperplaneSpec>,
    #[serde(default, rename = "piece")]
    pub pieces: Vec<PieceSpec>,
    #[serde(default, rename = "curve")]
    pub curves: Vec<CurveSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperplaneSpec {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    /// Sign vector over the hyperplanes, e.g. `"+-"`.
    pub cell: String,
    /// One term list per output component.
    pub components: Vec<Vec<TermSpec>>,
}

/// `c · x^e`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub e: Vec<u32>,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    pub breakpoints: Vec<f64>,
    /// Per interval, per coordinate: ascending coefficients in `t`.
    pub coords: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntrySpec {
    pub id: String,
    pub function: String,
    pub oracle: String,
}

/// Load failure with the source line (1-based) when known and the offending
/// field path.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusError {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = self.line {
            write!(f, "line {l}: ")?;
        }
        if !self.field.is_empty() {
            write!(f, "{}: ", self.field)?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for CorpusError {}

/// A built function together with its sample data.
#[derive(Debug, Clone)]
pub struct FunctionData {
    pub f: Arc<PiecewiseFunction>,
    pub base_points: Vec<Vec<f64>>,
    pub roots: Vec<Vec<f64>>,
    pub curves: Vec<Curve>,
    pub partition: Option<Arrangement>,
}

#[derive(Clone)]
pub struct Corpus {
    pub raw: CorpusFile,
    pub functions: BTreeMap<String, FunctionData>,
    pub entries: Vec<MatrixEntry>,
}

impl fmt::Debug for Corpus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Corpus")
            .field("functions", &self.functions.keys().collect::<Vec<_>>())
            .field(
                "entries",
                &self.entries.iter().map(|e| &e.id).collect::<Vec<_>>(),
            )
            .finish()
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of the first `key = "value"` assignment in `text`.
fn find_assignment(text: &str, key: &str, value: &str) -> Option<usize> {
    let quoted = format!("\"{value}\"");
    text.lines().position(|l| {
        let mut parts = l.splitn(2, '=');
        let k = parts.next().unwrap_or("").trim();
        let v = parts.next().unwrap_or("").trim();
        k == key && v.starts_with(&quoted)
    })
    .map(|i| i + 1)
}

impl CorpusFile {
    pub fn parse(text: &str) -> Result<CorpusFile, CorpusError> {
        toml::from_str(text).map_err(|e| CorpusError {
            line: e.span().map(|s| line_of(text, s.start)),
            field: String::new(),
            message: e.message().trim().to_string(),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("corpus model always serializes")
    }
}

impl Corpus {
    pub fn load(text: &str) -> Result<Corpus, CorpusError> {
        let raw = CorpusFile::parse(text)?;
        Corpus::build(raw, Some(text))
    }

    pub fn default_corpus() -> Corpus {
        Corpus::load(DEFAULT_CORPUS).expect("shipped corpus is valid")
    }

    /// Validates `raw` and builds every function and entry. `text`, when
    /// given, is used to attach line numbers to semantic errors.
    pub fn build(raw: CorpusFile, text: Option<&str>) -> Result<Corpus, CorpusError> {
        let locate = |key: &str, value: &str| text.and_then(|t| find_assignment(t, key, value));
        if raw.format != FORMAT {
            return Err(CorpusError {
                line: text.and_then(|t| t.lines().position(|l| l.trim_start().starts_with("format")).map(|i| i + 1)),
                field: "format".into(),
                message: format!("expected {FORMAT:?}, found {:?}", raw.format),
            });
        }
        let mut functions = BTreeMap::new();
        for (k, spec) in raw.functions.iter().enumerate() {
            let data = build_function(spec).map_err(|(field, message)| CorpusError {
                line: locate("id", &spec.id),
                field: format!("function[{k}] ({}){field}", spec.id),
                message,
            })?;
            if functions.insert(spec.id.clone(), data).is_some() {
                return Err(CorpusError {
                    line: locate("id", &spec.id),
                    field: format!("function[{k}].id"),
                    message: format!("duplicate function id {:?}", spec.id),
                });
            }
        }
        let mut entries = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for (k, e) in raw.entries.iter().enumerate() {
            let err = |field: &str, message: String| CorpusError {
                line: locate("id", &e.id),
                field: format!("entry[{k}] ({}).{field}", e.id),
                message,
            };
            if !seen.insert(e.id.clone()) {
                return Err(err("id", format!("duplicate entry id {:?}", e.id)));
            }
            let data = functions
                .get(&e.function)
                .ok_or_else(|| err("function", format!("unknown function {:?}", e.function)))?;
            let d = parse_oracle(&e.oracle, &data.f).map_err(|x| err("oracle", x.to_string()))?;
            entries.push(MatrixEntry {
                id: e.id.clone(),
                function: e.function.clone(),
                oracle: e.oracle.clone(),
                f: data.f.clone(),
                d,
                base_points: data.base_points.clone(),
                curves: data.curves.clone(),
                partition: data.partition.clone(),
            });
        }
        Ok(Corpus {
            raw,
            functions,
            entries,
        })
    }

    pub fn function(&self, id: &str) -> Option<&FunctionData> {
        self.functions.get(id)
    }

    pub fn entry(&self, id: &str) -> Option<&MatrixEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    /// Keeps only the entries whose id is in `ids`, in the given order.
    pub fn select_entries(&self, ids: &[String]) -> Result<Vec<MatrixEntry>, String> {
        ids.iter()
            .map(|id| {
                self.entry(id)
                    .cloned()
                    .ok_or_else(|| format!("unknown entry {id:?}"))
            })
            .collect()
    }
}

type FieldError = (String, String);

fn field_err(field: impl Into<String>, e: impl fmt::Display) -> FieldError {
    (field.into(), e.to_string())
}

fn hyperplanes(specs: &[HyperplaneSpec], name: &str) -> Result<Vec<Hyperplane>, FieldError> {
    specs
        .iter()
        .enumerate()
        .map(|(i, h)| {
            Hyperplane::new(h.normal.clone(), h.offset).map_err(|e| field_err(format!(".{name}[{i}]"), e))
        })
        .collect()
}

fn check_points(points: &[Vec<f64>], dim: usize, name: &str, bbox: &BoundingBox) -> Result<(), FieldError> {
    for (i, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(field_err(
                format!(".{name}[{i}]"),
                format!("expected {dim} coordinates, found {}", p.len()),
            ));
        }
        if !bbox.contains(p) {
            return Err(field_err(format!(".{name}[{i}]"), "point outside the bounding box"));
        }
    }
    Ok(())
}

fn build_function(spec: &FunctionSpec) -> Result<FunctionData, FieldError> {
    let n = spec.dim;
    let arrangement = Arrangement::new(n, hyperplanes(&spec.hyperplanes, "hyperplane")?)
        .map_err(|e| field_err(".hyperplane", e))?;
    let bbox = match &spec.bbox {
        Some(b) => BoundingBox::new(b.lo.clone(), b.hi.clone()).map_err(|e| field_err(".bbox", e))?,
        None => BoundingBox::symmetric(n, DEFAULT_HALF_WIDTH),
    };
    if let Some(l) = spec.lipschitz_hint {
        if !(l > 0.0 && l.is_finite()) {
            return Err(field_err(".lipschitz_hint", "must be positive and finite"));
        }
    }
    let mut pieces = BTreeMap::new();
    for (i, p) in spec.pieces.iter().enumerate() {
        let field = format!(".piece[{i}]");
        let sv: SignVector = p
            .cell
            .parse()
            .map_err(|e| field_err(format!("{field}.cell"), e))?;
        if p.components.len() != spec.outputs {
            return Err(field_err(
                format!("{field}.components"),
                format!("expected {} components, found {}", spec.outputs, p.components.len()),
            ));
        }
        let mut polys = Vec::with_capacity(p.components.len());
        for (c, terms) in p.components.iter().enumerate() {
            let poly = Polynomial::new(n, terms.iter().map(|t| (t.e.clone(), t.c)))
                .map_err(|e| field_err(format!("{field}.components[{c}]"), e))?;
            polys.push(poly);
        }
        if pieces.insert(sv.clone(), polys).is_some() {
            return Err(field_err(format!("{field}.cell"), format!("duplicate piece for cell {sv}")));
        }
    }
    let f = PiecewiseFunction::new(arrangement, spec.outputs, pieces, bbox.clone(), spec.lipschitz_hint)
        .map_err(|e| field_err("", e))?;
    check_points(&spec.base_points, n, "base_points", &bbox)?;
    check_points(&spec.roots, n, "roots", &bbox)?;
    let partition = if spec.partition.is_empty() {
        None
    } else {
        Some(
            Arrangement::new(n, hyperplanes(&spec.partition, "partition")?)
                .map_err(|e| field_err(".partition", e))?,
        )
    };
    let mut curves = Vec::with_capacity(spec.curves.len());
    for (i, c) in spec.curves.iter().enumerate() {
        let pieces = c
            .coords
            .iter()
            .map(|coords| coords.iter().map(|cs| UniPoly::new(cs.clone())).collect())
            .collect();
        let curve = Curve::new(c.breakpoints.clone(), pieces)
            .map_err(|e| field_err(format!(".curve[{i}]"), e))?;
        if curve.dim() != n {
            return Err(field_err(
                format!(".curve[{i}].coords"),
                format!("expected {n} coordinates, found {}", curve.dim()),
            ));
        }
        curves.push(curve);
    }
    Ok(FunctionData {
        f: Arc::new(f),
        base_points: spec.base_points.clone(),
        roots: spec.roots.clone(),
        curves,
        partition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_corpus_loads() {
        let c = Corpus::default_corpus();
        assert!(c.entries.len() >= 10);
        for id in ["abs1d", "id1d", "max2d", "relukink", "l1norm2d", "maxreg2d", "pwquad2d"] {
            assert!(c.function(id).is_some(), "{id}");
        }
        let negatives = c
            .entries
            .iter()
            .filter(|e| e.oracle.starts_with("scale:") || e.oracle.starts_with("zero-strata:"))
            .count();
        assert!(negatives >= 3);
    }

    #[test]
    fn round_trip_is_lossless() {
        let raw = CorpusFile::parse(DEFAULT_CORPUS).unwrap();
        let text = raw.to_toml();
        let again = CorpusFile::parse(&text).unwrap();
        assert_eq!(raw, again);
        assert_eq!(again.to_toml(), text);
    }

    #[test]
    fn syntax_errors_carry_lines() {
        let text = "format = \"stratacalc-corpus/1\"\n\n[[function]]\nid = \"a\"\ndim = \"one\"\n";
        let e = Corpus::load(text).unwrap_err();
        assert_eq!(e.line, Some(5));
        let e = Corpus::load("format = \"stratacalc-corpus/1\"\nbogus = 1\n").unwrap_err();
        assert_eq!(e.line, Some(2));
    }

    #[test]
    fn missing_piece_is_reported_by_sign_vector() {
        let text = r#"format = "stratacalc-corpus/1"

[[function]]
id = "half"
dim = 1
outputs = 1

[[function.hyperplane]]
normal = [1.0]
offset = 0.0

[[function.piece]]
cell = "-"
components = [[{ e = [1], c = -1.0 }]]
"#;
        let e = Corpus::load(text).unwrap_err();
        assert_eq!(e.line, Some(4));
        assert!(e.to_string().contains("+"), "{e}");
        assert!(e.field.starts_with("function[0] (half)"));
    }

    #[test]
    fn unknown_references_are_rejected() {
        let base = "format = \"stratacalc-corpus/1\"\n\n[[function]]\nid = \"x\"\ndim = 1\noutputs = 1\n\n[[function.piece]]\ncell = \"\"\ncomponents = [[{ e = [1], c = 1.0 }]]\n";
        let e = Corpus::load(&format!("{base}\n[[entry]]\nid = \"e\"\nfunction = \"y\"\noracle = \"exact\"\n")).unwrap_err();
        assert_eq!(e.field, "entry[0] (e).function");
        assert_eq!(e.line, Some(13));
        let e = Corpus::load(&format!("{base}\n[[entry]]\nid = \"e\"\nfunction = \"x\"\noracle = \"magic\"\n")).unwrap_err();
        assert_eq!(e.field, "entry[0] (e).oracle");
        let e = Corpus::load(&base.replace("stratacalc-corpus/1", "other/2")).unwrap_err();
        assert_eq!((e.line, e.field.as_str()), (Some(1), "format"));
        let ok = Corpus::load(&format!("{base}\n[[entry]]\nid = \"e\"\nfunction = \"x\"\noracle = \"exact\"\n")).unwrap();
        assert_eq!(ok.entries.len(), 1);
    }
}
