//! JSON channel descriptions.
//!
//! ```json
//! {"kind": "depolarizing", "p": 0.3}
//! {"kind": "kraus", "kraus": [[[[1,0],[0,0]], [[0,0],[1,0]]]]}
//! ```
//!
//! Matrices are arrays of rows; every entry is a `[re, im]` pair.

use serde_json::{json, Map, Value};

use super::{omega_channel, Povm, QuantumChannel};
use crate::error::{Error, Result};
use crate::qmat::{ComplexMatrix, DensityMatrix, C64};

#[derive(Clone, Debug, PartialEq)]
pub enum ChannelSpec {
    Identity {
        dim: usize,
    },
    Depolarizing {
        dim: usize,
        p: f64,
    },
    AmplitudeDamping {
        gamma: f64,
    },
    PhaseDamping {
        lambda: f64,
    },
    BitFlip {
        p: f64,
    },
    CompletelyNoisy {
        dim: usize,
    },
    Unitary {
        u: ComplexMatrix,
    },
    Kraus {
        kraus: Vec<ComplexMatrix>,
    },
    /// Measure-and-prepare: `P ↦ Σ_k R_k Tr(P X_k)`.
    Qc {
        states: Vec<ComplexMatrix>,
        povm: Vec<ComplexMatrix>,
    },
}

pub fn load_channel(text: &str) -> Result<QuantumChannel> {
    ChannelSpec::parse(text)?.build()
}

impl ChannelSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ChannelSpec::Identity { .. } => "identity",
            ChannelSpec::Depolarizing { .. } => "depolarizing",
            ChannelSpec::AmplitudeDamping { .. } => "amplitude-damping",
            ChannelSpec::PhaseDamping { .. } => "phase-damping",
            ChannelSpec::BitFlip { .. } => "bit-flip",
            ChannelSpec::CompletelyNoisy { .. } => "completely-noisy",
            ChannelSpec::Unitary { .. } => "unitary",
            ChannelSpec::Kraus { .. } => "kraus",
            ChannelSpec::Qc { .. } => "qc",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let doc: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            field: "<document>".into(),
            message: e.to_string(),
        })?;
        let obj = doc.as_object().ok_or_else(|| Error::Parse {
            line: 1,
            field: "<document>".into(),
            message: "expected a JSON object".into(),
        })?;
        let p = Fields { text, obj };
        let kind = p.string("kind")?;
        Ok(match kind.as_str() {
            "identity" => ChannelSpec::Identity {
                dim: p.dim_or("dim", 2)?,
            },
            "depolarizing" => ChannelSpec::Depolarizing {
                dim: p.dim_or("dim", 2)?,
                p: p.number("p")?,
            },
            "amplitude-damping" => ChannelSpec::AmplitudeDamping {
                gamma: p.number("gamma")?,
            },
            "phase-damping" => ChannelSpec::PhaseDamping {
                lambda: p.number("lambda")?,
            },
            "bit-flip" => ChannelSpec::BitFlip { p: p.number("p")? },
            "completely-noisy" => ChannelSpec::CompletelyNoisy {
                dim: p.dim_or("dim", 2)?,
            },
            "unitary" => ChannelSpec::Unitary { u: p.matrix("u")? },
            "kraus" => ChannelSpec::Kraus {
                kraus: p.matrix_list("kraus")?,
            },
            "qc" => ChannelSpec::Qc {
                states: p.matrix_list("states")?,
                povm: p.matrix_list("povm")?,
            },
            other => {
                return Err(p.error("kind", format!("unknown channel kind `{other}`")));
            }
        })
    }

    pub fn build(&self) -> Result<QuantumChannel> {
        match self {
            ChannelSpec::Identity { dim } => Ok(QuantumChannel::identity(*dim)),
            ChannelSpec::Depolarizing { dim, p } => QuantumChannel::depolarizing(*dim, *p),
            ChannelSpec::AmplitudeDamping { gamma } => QuantumChannel::amplitude_damping(*gamma),
            ChannelSpec::PhaseDamping { lambda } => QuantumChannel::phase_damping(*lambda),
            ChannelSpec::BitFlip { p } => QuantumChannel::bit_flip(*p),
            ChannelSpec::CompletelyNoisy { dim } => Ok(QuantumChannel::completely_noisy(*dim)),
            ChannelSpec::Unitary { u } => QuantumChannel::unitary(u.clone()),
            ChannelSpec::Kraus { kraus } => QuantumChannel::new(kraus.clone()),
            ChannelSpec::Qc { states, povm } => {
                let states = states
                    .iter()
                    .cloned()
                    .map(DensityMatrix::new)
                    .collect::<Result<Vec<_>>>()?;
                omega_channel(&states, &Povm::new(povm.clone())?)
            }
        }
    }

    pub fn to_json(&self) -> Value {
        let kind = self.kind();
        match self {
            ChannelSpec::Identity { dim } | ChannelSpec::CompletelyNoisy { dim } => {
                json!({"kind": kind, "dim": dim})
            }
            ChannelSpec::Depolarizing { dim, p } => json!({"kind": kind, "dim": dim, "p": p}),
            ChannelSpec::AmplitudeDamping { gamma } => json!({"kind": kind, "gamma": gamma}),
            ChannelSpec::PhaseDamping { lambda } => json!({"kind": kind, "lambda": lambda}),
            ChannelSpec::BitFlip { p } => json!({"kind": kind, "p": p}),
            ChannelSpec::Unitary { u } => json!({"kind": kind, "u": matrix_to_json(u)}),
            ChannelSpec::Kraus { kraus } => {
                json!({"kind": kind, "kraus": kraus.iter().map(matrix_to_json).collect::<Vec<_>>()})
            }
            ChannelSpec::Qc { states, povm } => json!({
                "kind": kind,
                "states": states.iter().map(matrix_to_json).collect::<Vec<_>>(),
                "povm": povm.iter().map(matrix_to_json).collect::<Vec<_>>(),
            }),
        }
    }

    /// Kraus form of an existing channel.
    pub fn from_channel(ch: &QuantumChannel) -> Self {
        ChannelSpec::Kraus {
            kraus: ch.kraus().to_vec(),
        }
    }
}

pub fn matrix_to_json(m: &ComplexMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array((0..m.cols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect()))
            .collect(),
    )
}

/// Parses `[[[re, im], ...], ...]`; the error string names the offending entry.
pub fn matrix_from_json(v: &Value) -> std::result::Result<ComplexMatrix, String> {
    let rows = v.as_array().ok_or("matrix must be an array of rows")?;
    let mut data = Vec::new();
    let mut ncols = None;
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().ok_or(format!("row {i} is not an array"))?;
        if *ncols.get_or_insert(row.len()) != row.len() {
            return Err(format!(
                "row {i} has {} entries, expected {}",
                row.len(),
                ncols.unwrap()
            ));
        }
        for (j, entry) in row.iter().enumerate() {
            let pair = entry
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or(format!("entry ({i}, {j}) is not a [re, im] pair"))?;
            let re = pair[0]
                .as_f64()
                .ok_or(format!("entry ({i}, {j}) real part is not a number"))?;
            let im = pair[1]
                .as_f64()
                .ok_or(format!("entry ({i}, {j}) imaginary part is not a number"))?;
            data.push(C64::new(re, im));
        }
    }
    ComplexMatrix::from_vec(rows.len(), ncols.unwrap_or(0), data).map_err(|e| e.to_string())
}

struct Fields<'a> {
    text: &'a str,
    obj: &'a Map<String, Value>,
}

impl Fields<'_> {
    /// Line of the first occurrence of the quoted key, 1 if absent.
    fn line_of(&self, field: &str) -> usize {
        let needle = format!("\"{field}\"");
        self.text.lines().position(|l| l.contains(&needle)).map_or(1, |i| i + 1)
    }

    fn error(&self, field: &str, message: String) -> Error {
        Error::Parse {
            line: self.line_of(field),
            field: field.into(),
            message,
        }
    }

    fn get(&self, field: &str) -> Result<&Value> {
        self.obj
            .get(field)
            .ok_or_else(|| self.error(field, "missing field".into()))
    }

    fn string(&self, field: &str) -> Result<String> {
        self.get(field)?
            .as_str()
            .map(str::to_owned)
            .ok_or_else(|| self.error(field, "expected a string".into()))
    }

    fn number(&self, field: &str) -> Result<f64> {
        self.get(field)?
            .as_f64()
            .ok_or_else(|| self.error(field, "expected a number".into()))
    }

    fn dim_or(&self, field: &str, default: usize) -> Result<usize> {
        match self.obj.get(field) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .filter(|&d| (1..=16).contains(&d))
                .map(|d| d as usize)
                .ok_or_else(|| self.error(field, "expected an integer in 1..=16".into())),
        }
    }

    fn matrix(&self, field: &str) -> Result<ComplexMatrix> {
        matrix_from_json(self.get(field)?).map_err(|m| self.error(field, m))
    }

    fn matrix_list(&self, field: &str) -> Result<Vec<ComplexMatrix>> {
        let arr = self
            .get(field)?
            .as_array()
            .ok_or_else(|| self.error(field, "expected an array of matrices".into()))?;
        arr.iter()
            .enumerate()
            .map(|(k, v)| matrix_from_json(v).map_err(|m| self.error(field, format!("matrix {k}: {m}"))))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_channels() {
        let id = load_channel(r#"{"kind":"identity","dim":2}"#).unwrap();
        assert_eq!(id, QuantumChannel::identity(2));
        let dep0 = load_channel(r#"{"kind":"depolarizing","p":0.0}"#).unwrap();
        let rho = DensityMatrix::new(ComplexMatrix::from_real_diag(&[0.2, 0.8])).unwrap();
        assert!(dep0.apply(&rho).unwrap().as_matrix().max_abs_diff(rho.as_matrix()) < 1e-15);
        for text in [
            r#"{"kind":"amplitude-damping","gamma":0.5}"#,
            r#"{"kind":"phase-damping","lambda":0.2}"#,
            r#"{"kind":"bit-flip","p":0.1}"#,
            r#"{"kind":"completely-noisy"}"#,
            r#"{"kind":"unitary","u":[[[0,0],[1,0]],[[1,0],[0,0]]]}"#,
        ] {
            let ch = load_channel(text).unwrap();
            assert!(ch.trace_preservation_defect() < 1e-12, "{text}");
        }
    }

    #[test]
    fn qc_kind() {
        let text = r#"{"kind":"qc",
            "states":[[[[1,0],[0,0]],[[0,0],[0,0]]], [[[0,0],[0,0]],[[0,0],[1,0]]]],
            "povm":[[[[1,0],[0,0]],[[0,0],[0,0]]], [[[0,0],[0,0]],[[0,0],[1,0]]]]}"#;
        let ch = load_channel(text).unwrap();
        assert_eq!(ch.dim_out(), 2);
    }

    #[test]
    fn non_cptp_kraus_names_deviation() {
        let text = r#"{"kind":"kraus","kraus":[[[[1,0],[0,0]],[[0,0],[0.5,0]]]]}"#;
        match load_channel(text) {
            Err(Error::NotTracePreserving { deviation }) => assert!((deviation - 0.75).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_line_and_field() {
        let text = "{\n  \"kind\": \"bit-flip\",\n  \"p\": \"high\"\n}";
        match ChannelSpec::parse(text) {
            Err(Error::Parse { line, field, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(field, "p");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            ChannelSpec::parse("{not json"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            ChannelSpec::parse(r#"{"kind":"teleporter"}"#),
            Err(Error::Parse { ref field, .. }) if field == "kind"
        ));
        assert!(matches!(
            ChannelSpec::parse(r#"{"kind":"unitary","u":[[[1,0]],[[0,0],[1,0]]]}"#),
            Err(Error::Parse { ref field, .. }) if field == "u"
        ));
    }

    #[test]
    fn json_round_trip() {
        let ch = QuantumChannel::random(2, 3, 17).unwrap();
        let spec = ChannelSpec::from_channel(&ch);
        let text = spec.to_json().to_string();
        let back = ChannelSpec::parse(&text).unwrap();
        assert_eq!(back, spec);
        assert_eq!(back.build().unwrap(), ch);
    }
}
