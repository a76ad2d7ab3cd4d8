//! Model files: `{"kind": "tf", "num": [...], "den": [...]}` or
//! `{"kind": "ss", "A": [[...]], "B": [[...]], "C": [[...]], "D": [[...]]}`.
//! Coefficients are in ascending powers.

use serde::Deserialize;
use stripgain::linalg::Matrix;
use stripgain::{realize, tf_of, RationalFunction, StateSpace};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
enum ModelFile {
    #[serde(rename = "tf")]
    Tf { num: Vec<f64>, den: Vec<f64> },
    #[serde(rename = "ss")]
    Ss {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        #[serde(rename = "B")]
        b: Vec<Vec<f64>>,
        #[serde(rename = "C")]
        c: Vec<Vec<f64>>,
        #[serde(rename = "D")]
        d: Vec<Vec<f64>>,
    },
}

/// A parsed model in whichever form the file used.
#[derive(Debug, Clone)]
pub enum Model {
    Tf(RationalFunction),
    Ss(StateSpace),
}

impl Model {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: ModelFile = serde_json::from_str(text)
            .map_err(|e| CliError::Input(format!("model file, line {} column {}: {e}", e.line(), e.column())))?;
        match file {
            ModelFile::Tf { num, den } => {
                let g = RationalFunction::from_coeffs(&num, &den).map_err(|e| CliError::Input(format!("tf model: {e}")))?;
                if !g.is_proper() {
                    return Err(CliError::Input(format!(
                        "tf model: numerator degree {} exceeds denominator degree {}",
                        g.num().degree(),
                        g.den().degree()
                    )));
                }
                Ok(Model::Tf(g))
            }
            ModelFile::Ss { a, b, c, d } => {
                let n = a.len();
                let d = rows("D", &d, None)?;
                let a = rows("A", &a, Some(n))?;
                // a static gain may spell B and C as empty lists
                let b = if n == 0 { Matrix::zeros(0, d.ncols()) } else { rows("B", &b, None)? };
                let c = if n == 0 && c.iter().all(Vec::is_empty) { Matrix::zeros(d.nrows(), 0) } else { rows("C", &c, Some(n))? };
                let ss = StateSpace::new(a, b, c, d).map_err(|e| CliError::Input(format!("ss model: {e}")))?;
                Ok(Model::Ss(ss))
            }
        }
    }

    pub fn tf(&self) -> Result<RationalFunction, CliError> {
        match self {
            Model::Tf(g) => Ok(g.clone()),
            Model::Ss(ss) => tf_of(ss).map_err(CliError::from),
        }
    }

    pub fn ss(&self) -> Result<StateSpace, CliError> {
        match self {
            Model::Tf(g) => realize(g).map_err(CliError::from),
            Model::Ss(ss) => Ok(ss.clone()),
        }
    }
}

/// Row-major nested array to a matrix; `cols` fixes the width when the
/// row list may be empty.
fn rows(field: &str, data: &[Vec<f64>], cols: Option<usize>) -> Result<Matrix, CliError> {
    let width = data.first().map(Vec::len).or(cols).unwrap_or(0);
    for (i, r) in data.iter().enumerate() {
        if r.len() != width {
            return Err(CliError::Input(format!(
                "field {field}: row {i} has {} entries, expected {width}",
                r.len()
            )));
        }
    }
    Ok(Matrix::from_fn(data.len(), width, |i, j| data[i][j]))
}
