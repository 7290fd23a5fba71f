//! JSON forms for matrices and channels.

use serde::{Deserialize, Serialize, Serializer};

use crate::channels::{ClassicalQuantumChannel, QuantumChannel, TransposeMode};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::operators::{PsdOperator, Tolerances};

/// `{"dim": d, "entries": [[[re, im], …], …]}`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        let entries = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
        MatrixJson { dim: m.nrows(), entries }
    }
}

impl MatrixJson {
    /// `dim` counts rows; Kraus operators may be rectangular.
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let rows = self.entries.len();
        if rows != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: rows });
        }
        let cols = self.entries.first().map_or(0, |r| r.len());
        if self.entries.iter().any(|r| r.len() != cols) {
            return Err(Error::Parse("ragged matrix rows".into()));
        }
        let m = CMatrix::from_fn(rows, cols, |i, j| {
            let [re, im] = self.entries[i][j];
            C64::new(re, im)
        });
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("matrix entry".into()));
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChannelJson {
    pub kraus: Vec<MatrixJson>,
    #[serde(default)]
    pub pre_transpose: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassicalJson {
    pub outputs: Vec<MatrixJson>,
}

fn from_json<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))
}

pub fn parse_matrix(text: &str) -> Result<CMatrix> {
    from_json::<MatrixJson>(text)?.to_matrix()
}

pub fn parse_psd(text: &str, tol: Tolerances) -> Result<PsdOperator> {
    PsdOperator::with_tolerances(parse_matrix(text)?, tol)
}

pub fn parse_channel(text: &str) -> Result<QuantumChannel> {
    let cj: ChannelJson = from_json(text)?;
    let kraus = cj.kraus.iter().map(MatrixJson::to_matrix).collect::<Result<Vec<_>>>()?;
    if cj.pre_transpose {
        QuantumChannel::transpose_composed(kraus)
    } else {
        QuantumChannel::new(kraus)
    }
}

pub fn parse_classical(text: &str) -> Result<ClassicalQuantumChannel> {
    let cj: ClassicalJson = from_json(text)?;
    let outputs = cj.outputs.iter().map(|m| PsdOperator::new(m.to_matrix()?)).collect::<Result<Vec<_>>>()?;
    if outputs.is_empty() {
        return Err(Error::InvalidInput("classical channel needs at least one output".into()));
    }
    let d = outputs[0].dim();
    if let Some(o) = outputs.iter().find(|o| o.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: o.dim() });
    }
    Ok(ClassicalQuantumChannel { outputs })
}

pub fn matrix_to_json(m: &CMatrix) -> String {
    serde_json::to_string(&MatrixJson::from(m)).expect("matrix serializes")
}

/// Only non-transposed and pre-transposed maps have a JSON form.
pub fn channel_to_json(phi: &QuantumChannel) -> Result<String> {
    let pre_transpose = match phi.transpose {
        TransposeMode::None => false,
        TransposeMode::Pre => true,
        TransposeMode::Post => return Err(Error::InvalidInput("post-transposed maps have no JSON form".into())),
    };
    let cj = ChannelJson { kraus: phi.kraus.iter().map(MatrixJson::from).collect(), pre_transpose };
    Ok(serde_json::to_string(&cj).expect("channel serializes"))
}

pub fn ser_matrix<S: Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    MatrixJson::from(m).serialize(s)
}

pub fn ser_matrices<S: Serializer>(ms: &[CMatrix], s: S) -> std::result::Result<S::Ok, S::Error> {
    ms.iter().map(MatrixJson::from).collect::<Vec<_>>().serialize(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::random_channel;
    use crate::linalg;

    #[test]
    fn matrix_roundtrip() {
        let mut m = linalg::real_diag(&[1.0, 2.0]);
        m[(0, 1)] = C64::new(0.5, -0.25);
        let back = parse_matrix(&matrix_to_json(&m)).unwrap();
        assert_eq!(m, back);
        let raw = r#"{"dim": 2, "entries": [[[1,0],[0,0]],[[0,0],[0,0]]]}"#;
        assert_eq!(parse_matrix(raw).unwrap(), linalg::real_diag(&[1.0, 0.0]));
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(parse_matrix("{\"dim\": 2,"), Err(Error::Parse(_))));
        let bad = r#"{"dim": 3, "entries": [[[1,0]]]}"#;
        assert!(matches!(parse_matrix(bad), Err(Error::DimensionMismatch { .. })));
        let ragged = r#"{"dim": 2, "entries": [[[1,0],[0,0]],[[0,0]]]}"#;
        assert!(parse_matrix(ragged).is_err());
    }

    #[test]
    fn channel_roundtrip() {
        let phi = random_channel(2, 3, 2, 4).unwrap();
        let back = parse_channel(&channel_to_json(&phi).unwrap()).unwrap();
        let x = linalg::real_diag(&[0.3, 0.7]);
        assert!((phi.apply(&x) - back.apply(&x)).norm() < 1e-14);
        let t = parse_channel(r#"{"kraus": [{"dim": 2, "entries": [[[1,0],[0,0]],[[0,0],[1,0]]]}], "pre_transpose": true}"#).unwrap();
        assert_eq!(t.transpose, TransposeMode::Pre);
    }
}
