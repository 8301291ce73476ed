//! The refinement equation `f(x) = Σ c_d f(Ax − d)`, its JSON document form,
//! and admissibility diagnostics.

use std::fmt;

use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Expansion};
use crate::scalar::{cmp_points, max_norm_distance, Arithmetic, Matrix, Point, Scalar};

/// Max-norm tolerance for duplicate translations in float mode.
pub const DUPLICATE_TOL: f64 = 1e-9;
/// Absolute tolerance of the sum-rule check `Σ c_d = |det A|`.
pub const SUM_RULE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementEquation {
    arithmetic: Arithmetic,
    dilation: Matrix,
    translations: Vec<Point>,
    coefficients: Vec<f64>,
}

impl RefinementEquation {
    /// Builds an equation, checking shapes, modes, nonzero coefficients and
    /// distinct translations. Expansion is left to [`validate`].
    pub fn new(
        arithmetic: Arithmetic,
        dilation: Matrix,
        translations: Vec<Point>,
        coefficients: Vec<f64>,
    ) -> Result<Self> {
        let n = dilation.dim();
        if dilation.mode() != arithmetic
            || dilation.rows().flatten().any(|s| s.mode() != arithmetic)
        {
            return Err(Error::Malformed(
                "dilation entries in the wrong arithmetic mode".into(),
            ));
        }
        if translations.is_empty() {
            return Err(Error::Malformed("translation list is empty".into()));
        }
        for (i, d) in translations.iter().enumerate() {
            if d.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "translation {i} has {} coordinates, dilation is {n}x{n}",
                    d.len()
                )));
            }
            if d.iter().any(|s| s.mode() != arithmetic) {
                return Err(Error::Malformed(format!(
                    "translation {i} in the wrong arithmetic mode"
                )));
            }
        }
        if coefficients.len() != translations.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for {} translations",
                coefficients.len(),
                translations.len()
            )));
        }
        if let Some(i) = coefficients.iter().position(|c| !c.is_finite()) {
            return Err(Error::Malformed(format!("coefficient {i} is not finite")));
        }
        if let Some(i) = coefficients.iter().position(|&c| c == 0.0) {
            return Err(Error::ZeroCoefficient(i));
        }
        if let Some((i, j)) = find_duplicate(&translations, DUPLICATE_TOL) {
            return Err(Error::DuplicateTranslation(i, j));
        }
        Ok(RefinementEquation {
            arithmetic,
            dilation,
            translations,
            coefficients,
        })
    }

    /// Convenience constructor from double entries, lifted exactly in exact mode.
    pub fn from_f64(
        arithmetic: Arithmetic,
        dilation: &[&[f64]],
        translations: &[&[f64]],
        coefficients: &[f64],
    ) -> Result<Self> {
        let lift = |row: &[f64]| -> Vec<Scalar> {
            row.iter()
                .map(|&x| Scalar::from_f64(arithmetic, x))
                .collect()
        };
        let matrix = Matrix::from_rows(dilation.iter().map(|r| lift(r)).collect())
            .ok_or_else(|| Error::DimensionMismatch("dilation is not square".into()))?;
        Self::new(
            arithmetic,
            matrix,
            translations.iter().map(|r| lift(r)).collect(),
            coefficients.to_vec(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dilation.dim()
    }

    pub fn arithmetic(&self) -> Arithmetic {
        self.arithmetic
    }

    pub fn dilation(&self) -> &Matrix {
        &self.dilation
    }

    pub fn translations(&self) -> &[Point] {
        &self.translations
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.translations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.translations.is_empty()
    }

    pub fn abs_det(&self) -> f64 {
        self.dilation.determinant().abs().to_f64()
    }

    pub fn coefficient_sum(&self) -> f64 {
        self.coefficients.iter().sum()
    }

    /// Same equation with every translation multiplied by `s`.
    pub fn scale_translations(&self, s: &Scalar) -> Result<Self> {
        Self::new(
            self.arithmetic,
            self.dilation.clone(),
            self.translations
                .iter()
                .map(|d| d.iter().map(|x| x * s).collect())
                .collect(),
            self.coefficients.clone(),
        )
    }

    pub fn to_document(&self) -> EquationDocument {
        let entry = |s: &Scalar| Entry::from_scalar(s);
        EquationDocument {
            dimension: self.dim(),
            arithmetic: self.arithmetic,
            dilation: self
                .dilation
                .rows()
                .map(|r| r.iter().map(entry).collect())
                .collect(),
            translations: self
                .translations
                .iter()
                .map(|d| d.iter().map(entry).collect())
                .collect(),
            coefficients: self
                .coefficients
                .iter()
                .map(|&c| Entry::Number(serde_json::Number::from_f64(c).expect("finite")))
                .collect(),
        }
    }

    pub fn from_document(doc: &EquationDocument) -> Result<Self> {
        let mode = doc.arithmetic;
        let n = doc.dimension;
        if n == 0 {
            return Err(Error::Malformed("dimension must be positive".into()));
        }
        if doc.dilation.len() != n || doc.dilation.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "dilation must be {n}x{n} for dimension {n}"
            )));
        }
        let rows = doc
            .dilation
            .iter()
            .map(|r| {
                r.iter()
                    .map(|e| e.to_scalar(mode))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let translations = doc
            .translations
            .iter()
            .map(|r| {
                r.iter()
                    .map(|e| e.to_scalar(mode))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let coefficients = doc
            .coefficients
            .iter()
            .map(|e| e.to_scalar(mode).map(|s| s.to_f64()))
            .collect::<Result<Vec<_>>>()?;
        let dilation = Matrix::from_rows(rows).expect("shape checked");
        Self::new(mode, dilation, translations, coefficients)
    }
}

fn find_duplicate(points: &[Point], tol: f64) -> Option<(usize, usize)> {
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let same = match points[i][0].mode() {
                Arithmetic::Exact => points[i] == points[j],
                Arithmetic::Float => max_norm_distance(&points[i], &points[j]) <= tol,
            };
            if same {
                return Some((i, j));
            }
        }
    }
    None
}

/// Number or `"p/q"` string as it appears in an input document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Number(serde_json::Number),
    Text(String),
}

impl Entry {
    fn from_scalar(s: &Scalar) -> Self {
        match s {
            Scalar::Exact(r) if r.is_integer() && r.numer().abs() < (1i64 << 53).into() => {
                Entry::Number(r.numer().to_i64().expect("small integer").into())
            }
            Scalar::Exact(_) => Entry::Text(s.to_string()),
            Scalar::Float(x) => Entry::Number(serde_json::Number::from_f64(*x).expect("finite")),
        }
    }

    fn to_scalar(&self, mode: Arithmetic) -> Result<Scalar> {
        let text = match self {
            Entry::Number(n) => n.to_string(),
            Entry::Text(t) => {
                if mode == Arithmetic::Float {
                    return Err(Error::Malformed(format!(
                        "string literal {t:?} only allowed in exact mode"
                    )));
                }
                t.clone()
            }
        };
        Scalar::parse_literal(mode, &text)
            .ok_or_else(|| Error::Malformed(format!("bad numeric literal {text:?}")))
    }
}

/// The JSON input schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationDocument {
    pub dimension: usize,
    pub arithmetic: Arithmetic,
    pub dilation: Vec<Vec<Entry>>,
    pub translations: Vec<Vec<Entry>>,
    pub coefficients: Vec<Entry>,
}

pub fn parse_equation(text: &str) -> Result<RefinementEquation> {
    let doc: EquationDocument =
        serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    RefinementEquation::from_document(&doc)
}

pub fn serialize_equation(eq: &RefinementEquation) -> String {
    serde_json::to_string_pretty(&eq.to_document()).expect("document serializes")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Diagnostics {
    pub entries: Vec<Diagnostic>,
}

impl Diagnostics {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.entries.iter().any(|d| d.severity == Severity::Error)
    }

    pub fn has_code(&self, code: &str) -> bool {
        self.entries.iter().any(|d| d.code == code)
    }

    fn push(&mut self, severity: Severity, code: &str, message: String) {
        self.entries.push(Diagnostic {
            severity,
            code: code.into(),
            message,
        });
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            let sev = match d.severity {
                Severity::Error => "error",
                Severity::Warning => "warning",
            };
            write!(f, "{sev}[{}]: {}", d.code, d.message)?;
        }
        Ok(())
    }
}

/// Checks expansion, distinct translations and the sum rule.
pub fn validate(eq: &RefinementEquation) -> Diagnostics {
    let mut diags = Diagnostics::default();
    match linalg::expansion(eq.dilation()) {
        Ok(Expansion::Expanding { .. }) => {}
        Ok(Expansion::NotExpanding { min_modulus }) => diags.push(
            Severity::Error,
            "not-expanding",
            format!("dilation is not expanding: an eigenvalue has modulus {min_modulus} <= 1"),
        ),
        Ok(Expansion::Indeterminate { min_modulus }) => diags.push(
            Severity::Error,
            "indeterminate-expansion",
            format!(
                "indeterminate expansion: smallest eigenvalue modulus {min_modulus} is within {} of 1",
                linalg::EXPANSION_GUARD
            ),
        ),
        Err(e) => diags.push(
            Severity::Error,
            "indeterminate-expansion",
            format!("indeterminate expansion: {e}"),
        ),
    }
    if let Some((i, j)) = find_duplicate(eq.translations(), DUPLICATE_TOL) {
        diags.push(
            Severity::Error,
            "duplicate-translation",
            format!("translations {i} and {j} coincide"),
        );
    }
    let sum = eq.coefficient_sum();
    let det = eq.abs_det();
    if (sum - det).abs() > SUM_RULE_TOL {
        diags.push(
            Severity::Warning,
            "sum-rule",
            format!("sum rule violated: sum of coefficients {sum} != |det A| = {det}"),
        );
    }
    diags
}

/// Translation indices sorted lexicographically by coordinates.
pub(crate) fn sorted_translation_order(eq: &RefinementEquation) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..eq.len()).collect();
    idx.sort_by(|&a, &b| cmp_points(&eq.translations()[a], &eq.translations()[b]));
    idx
}
