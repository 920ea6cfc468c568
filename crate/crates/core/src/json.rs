//! Wire formats. All big integers travel as decimal strings; keys are
//! emitted in a fixed order so identical inputs produce byte-identical
//! output.

use num_bigint::BigInt;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::iwasawa::{IwasawaElement, WeierstrassData};
use crate::logmatrix::{FrobeniusData, Provenance, ScalingBlock, SeriesMatrix};
use crate::padic::PadicScalar;
use crate::series::TruncatedSeries;

fn parse_bigint(s: &str) -> Result<BigInt> {
    BigInt::parse_bytes(s.trim().as_bytes(), 10)
        .ok_or_else(|| Error::usage(format!("not a decimal integer: {s:?}")))
}

/// `{"p", "s", "N", "D", "coeffs"}` with decimal-string coefficients.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct SeriesJson {
    pub p: u64,
    pub s: u32,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "D")]
    pub d: u32,
    pub coeffs: Vec<String>,
}

impl From<&TruncatedSeries> for SeriesJson {
    fn from(series: &TruncatedSeries) -> Self {
        SeriesJson {
            p: series.prime(),
            s: series.denom_exp(),
            n: series.prec(),
            d: series.x_prec() as u32,
            coeffs: series.coeffs().iter().map(|c| c.to_string()).collect(),
        }
    }
}

impl TryFrom<&SeriesJson> for TruncatedSeries {
    type Error = Error;

    fn try_from(j: &SeriesJson) -> Result<TruncatedSeries> {
        if j.coeffs.len() != j.d as usize + 1 {
            return Err(Error::usage(format!(
                "series needs D+1 = {} coefficients, got {}",
                j.d + 1,
                j.coeffs.len()
            )));
        }
        let coeffs = j
            .coeffs
            .iter()
            .map(|s| parse_bigint(s))
            .collect::<Result<Vec<_>>>()?;
        TruncatedSeries::from_signed_coeffs(j.p, j.s, j.n, &coeffs, j.d as usize)
    }
}

pub fn series_to_string(series: &TruncatedSeries) -> String {
    serde_json::to_string_pretty(&SeriesJson::from(series)).expect("series serializes")
}

pub fn series_from_str(text: &str) -> Result<TruncatedSeries> {
    let j: SeriesJson =
        serde_json::from_str(text).map_err(|e| Error::usage(format!("series JSON: {e}")))?;
    TruncatedSeries::try_from(&j)
}

/// `{"p", "g_plus", "g_minus", "C"}`; the C entries are decimal strings and
/// are read at the caller's working precision. The optional `scaling` field
/// (absent = "plus") round-trips dual-convention data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrobeniusJson {
    pub p: u64,
    pub g_plus: usize,
    pub g_minus: usize,
    #[serde(rename = "C")]
    pub c: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingBlock>,
}

impl FrobeniusJson {
    pub fn into_frobenius(&self, prec: u32) -> Result<FrobeniusData> {
        let entries = self
            .c
            .iter()
            .map(|row| {
                row.iter()
                    .map(|s| Ok(PadicScalar::from_bigint(self.p, &parse_bigint(s)?, prec)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        FrobeniusData::new_scaled(
            self.p,
            entries,
            self.g_minus,
            self.g_plus,
            self.scaling.unwrap_or(ScalingBlock::Plus),
        )
    }
}

pub fn frobenius_to_json(fd: &FrobeniusData, prec: u32) -> Result<FrobeniusJson> {
    let c = fd
        .c_matrix()
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| Ok(e.residue_mod(prec)?.to_string()))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FrobeniusJson {
        p: fd.prime(),
        g_plus: fd.g_plus(),
        g_minus: fd.g_minus(),
        c,
        scaling: match fd.scaling() {
            ScalingBlock::Plus => None,
            ScalingBlock::Minus => Some(ScalingBlock::Minus),
        },
    })
}

pub fn frobenius_from_str(text: &str, prec: u32) -> Result<FrobeniusData> {
    let j: FrobeniusJson =
        serde_json::from_str(text).map_err(|e| Error::usage(format!("Frobenius JSON: {e}")))?;
    j.into_frobenius(prec)
}

/// `{"g", "denominator_exp", "entries"}` plus the provenance tag when known.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesMatrixJson {
    pub g: usize,
    pub denominator_exp: u32,
    pub entries: Vec<Vec<SeriesJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl From<&SeriesMatrix> for SeriesMatrixJson {
    fn from(m: &SeriesMatrix) -> Self {
        SeriesMatrixJson {
            g: m.g(),
            denominator_exp: m.denom_exp(),
            entries: m
                .entries()
                .iter()
                .map(|row| row.iter().map(SeriesJson::from).collect())
                .collect(),
            provenance: m.provenance(),
        }
    }
}

impl TryFrom<&SeriesMatrixJson> for SeriesMatrix {
    type Error = Error;

    fn try_from(j: &SeriesMatrixJson) -> Result<SeriesMatrix> {
        if j.entries.len() != j.g {
            return Err(Error::usage("entry rows must match g"));
        }
        let entries = j
            .entries
            .iter()
            .map(|row| row.iter().map(TruncatedSeries::try_from).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let m = SeriesMatrix::from_entries(j.denominator_exp, entries, j.provenance)?;
        Ok(m)
    }
}

pub fn series_matrix_to_string(m: &SeriesMatrix) -> String {
    serde_json::to_string_pretty(&SeriesMatrixJson::from(m)).expect("matrix serializes")
}

pub fn series_matrix_from_str(text: &str) -> Result<SeriesMatrix> {
    let j: SeriesMatrixJson = serde_json::from_str(text)
        .map_err(|e| Error::usage(format!("series matrix JSON: {e}")))?;
    SeriesMatrix::try_from(&j)
}

/// `{"p", "components": {"0": series, ..., "p-2": series}}` with the
/// component keys emitted in increasing numeric order.
#[derive(Debug, Clone)]
pub struct IwasawaJson {
    pub p: u64,
    pub components: Vec<SeriesJson>,
}

impl Serialize for IwasawaJson {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Outer<'a> {
            p: u64,
            components: ComponentMap<'a>,
        }
        struct ComponentMap<'a>(&'a [SeriesJson]);
        impl Serialize for ComponentMap<'_> {
            fn serialize<S: Serializer>(
                &self,
                serializer: S,
            ) -> std::result::Result<S::Ok, S::Error> {
                let mut map = serializer.serialize_map(Some(self.0.len()))?;
                for (i, series) in self.0.iter().enumerate() {
                    map.serialize_entry(&i.to_string(), series)?;
                }
                map.end()
            }
        }
        Outer { p: self.p, components: ComponentMap(&self.components) }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for IwasawaJson {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Outer {
            p: u64,
            components: std::collections::BTreeMap<String, SeriesJson>,
        }
        let outer = Outer::deserialize(deserializer)?;
        let want = (outer.p.max(2) - 1) as usize;
        let mut components = vec![None; want];
        for (key, series) in outer.components {
            let idx: usize = key
                .parse()
                .map_err(|_| serde::de::Error::custom(format!("bad component key {key:?}")))?;
            if idx >= want {
                return Err(serde::de::Error::custom(format!(
                    "component index {idx} out of range 0..{want}"
                )));
            }
            components[idx] = Some(series);
        }
        let components = components
            .into_iter()
            .enumerate()
            .map(|(i, c)| c.ok_or_else(|| serde::de::Error::custom(format!("missing component {i}"))))
            .collect::<std::result::Result<_, _>>()?;
        Ok(IwasawaJson { p: outer.p, components })
    }
}

impl From<&IwasawaElement> for IwasawaJson {
    fn from(e: &IwasawaElement) -> Self {
        IwasawaJson {
            p: e.prime(),
            components: e.components().iter().map(SeriesJson::from).collect(),
        }
    }
}

impl TryFrom<&IwasawaJson> for IwasawaElement {
    type Error = Error;

    fn try_from(j: &IwasawaJson) -> Result<IwasawaElement> {
        let components = j
            .components
            .iter()
            .map(TruncatedSeries::try_from)
            .collect::<Result<Vec<_>>>()?;
        IwasawaElement::new(j.p, components)
    }
}

/// `{"mu", "lambda", "distinguished", "distinguished_prec", "unit",
/// "certified"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeierstrassJson {
    pub mu: u32,
    pub lambda: usize,
    pub distinguished: SeriesJson,
    pub distinguished_prec: u32,
    pub unit: SeriesJson,
    pub certified: bool,
}

impl From<&WeierstrassData> for WeierstrassJson {
    fn from(w: &WeierstrassData) -> Self {
        WeierstrassJson {
            mu: w.mu,
            lambda: w.lambda,
            distinguished: SeriesJson::from(&w.distinguished),
            distinguished_prec: w.distinguished_prec,
            unit: SeriesJson::from(&w.unit),
            certified: w.certified,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logmatrix::{logarithmic_matrix, Side};
    use crate::series::cyclotomic_shifted;

    #[test]
    fn series_roundtrip_is_bit_exact() {
        let phi = cyclotomic_shifted(5, 2, 9, 10).unwrap();
        let text = series_to_string(&phi);
        let back = series_from_str(&text).unwrap();
        assert_eq!(back, phi);
        assert_eq!(series_to_string(&back), text);
    }

    #[test]
    fn series_json_shape_is_pinned() {
        let x = TruncatedSeries::x(3, 2, 4);
        let v: serde_json::Value = serde_json::from_str(&series_to_string(&x)).unwrap();
        assert_eq!(v["p"], 3);
        assert_eq!(v["s"], 0);
        assert_eq!(v["N"], 4);
        assert_eq!(v["D"], 2);
        assert_eq!(v["coeffs"], serde_json::json!(["0", "1", "0"]));
    }

    #[test]
    fn frobenius_parses_negative_entries() {
        let text = r#"{"p": 3, "g_plus": 1, "g_minus": 1, "C": [["0", "-1"], ["1", "0"]]}"#;
        let fd = frobenius_from_str(text, 8).unwrap();
        assert_eq!(fd.g(), 2);
        // -1 is the unit p^8 - 1
        let r = fd.c_matrix()[0][1].residue_mod(8).unwrap();
        assert_eq!(r + 1u32, crate::padic::p_pow(3, 8));
    }

    #[test]
    fn frobenius_rejects_malformed_matrices() {
        let nonsquare = r#"{"p": 3, "g_plus": 1, "g_minus": 1, "C": [["1", "0", "0"], ["0", "1", "0"]]}"#;
        assert!(matches!(frobenius_from_str(nonsquare, 8), Err(Error::Usage(_))));
        let garbage = r#"{"p": 3, "g_plus": 1, "g_minus": 1, "C": [["one", "0"], ["0", "1"]]}"#;
        assert!(matches!(frobenius_from_str(garbage, 8), Err(Error::Usage(_))));
    }

    #[test]
    fn matrix_roundtrip_preserves_value_and_provenance() {
        let fd = frobenius_from_str(
            r#"{"p": 3, "g_plus": 1, "g_minus": 1, "C": [["0", "-1"], ["1", "0"]]}"#,
            8,
        )
        .unwrap();
        let m = logarithmic_matrix(&fd, 2, Side::Dual, 6, 8).unwrap();
        let text = series_matrix_to_string(&m);
        let back = series_matrix_from_str(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.provenance().unwrap().side, Side::Dual);
        assert_eq!(series_matrix_to_string(&back), text);
    }

    #[test]
    fn iwasawa_component_keys_are_numeric_and_ordered() {
        let e = crate::iwasawa::idempotent(5, 2, 3, 6).unwrap();
        let j = IwasawaJson::from(&e);
        let text = serde_json::to_string_pretty(&j).unwrap();
        let pos: Vec<usize> = (0..4).map(|i| text.find(&format!("\"{i}\"")).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]), "keys in numeric order");
        let parsed: IwasawaJson = serde_json::from_str(&text).unwrap();
        let back = IwasawaElement::try_from(&parsed).unwrap();
        assert_eq!(back, e);
    }
}
