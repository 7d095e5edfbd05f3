//! JSON schemas for polynomials, potentials, cubic forms and families, plus a
//! canonical writer that prints every float with 17 significant digits.
//!
//! Exact inputs use `"p/q"` strings and float inputs use numbers; a document
//! mixing the two is rejected. Cubic-form entry indices are 0-based.

use std::io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::CubicForm;
use crate::period::BaseBox;
use crate::poly::MVPoly;
use crate::scalar::{Complex64, GaussRat, JsonNum, Scalar, ScalarJson, ScalarMode};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Vec<u32>,
    pub re: JsonNum,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<JsonNum>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyJson {
    pub nvars: usize,
    pub terms: Vec<TermJson>,
}

fn common_mode<'a>(items: impl Iterator<Item = &'a ScalarJson>) -> Result<Option<ScalarMode>> {
    let mut mode = None;
    for s in items {
        let m = s.mode()?;
        match mode {
            None => mode = Some(m),
            Some(prev) if prev != m => {
                return Err(Error::ModeMismatch(
                    "mixed rational strings and float numbers".into(),
                ))
            }
            _ => {}
        }
    }
    Ok(mode)
}

impl PolyJson {
    pub fn from_poly<S: Scalar>(p: &MVPoly<S>) -> Self {
        PolyJson {
            nvars: p.nvars(),
            terms: p
                .terms()
                .map(|(e, c)| {
                    let j = c.to_json();
                    TermJson {
                        exp: e.clone(),
                        re: j.re,
                        im: j.im,
                    }
                })
                .collect(),
        }
    }

    fn scalars(&self) -> impl Iterator<Item = ScalarJson> + '_ {
        self.terms.iter().map(|t| ScalarJson {
            re: t.re.clone(),
            im: t.im.clone(),
        })
    }

    /// Mode of the coefficients; `None` for the zero polynomial.
    pub fn mode(&self) -> Result<Option<ScalarMode>> {
        let all: Vec<ScalarJson> = self.scalars().collect();
        common_mode(all.iter())
    }

    pub fn to_poly<S: Scalar>(&self) -> Result<MVPoly<S>> {
        if self.nvars == 0 {
            return Err(Error::Schema("nvars must be positive".into()));
        }
        self.mode()?;
        let terms = self
            .terms
            .iter()
            .zip(self.scalars())
            .map(|(t, s)| {
                if t.exp.len() != self.nvars {
                    return Err(Error::Schema(format!(
                        "exponent {:?} has length {}, expected {}",
                        t.exp,
                        t.exp.len(),
                        self.nvars
                    )));
                }
                Ok((t.exp.clone(), S::from_json(&s)?))
            })
            .collect::<Result<Vec<_>>>()?;
        MVPoly::from_terms(self.nvars, terms)
    }
}

/// A polynomial in whichever mode its document uses.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyPoly {
    Exact(MVPoly<GaussRat>),
    Float(MVPoly<Complex64>),
}

impl AnyPoly {
    /// Parses in the requested mode; a zero polynomial is accepted by both.
    pub fn parse(j: &PolyJson, mode: ScalarMode) -> Result<Self> {
        match (j.mode()?, mode) {
            (Some(m), want) if m != want => Err(Error::ModeMismatch(format!(
                "document is {m} but {want} mode was requested"
            ))),
            (_, ScalarMode::Exact) => Ok(AnyPoly::Exact(j.to_poly()?)),
            (_, ScalarMode::Float) => Ok(AnyPoly::Float(j.to_poly()?)),
        }
    }

    pub fn to_float(&self) -> MVPoly<Complex64> {
        match self {
            AnyPoly::Exact(p) => p.to_float(),
            AnyPoly::Float(p) => p.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialJson {
    pub n: usize,
    pub g: PolyJson,
}

impl PotentialJson {
    pub fn validate(&self) -> Result<()> {
        if self.g.nvars != self.n {
            return Err(Error::Schema(format!(
                "potential has n = {} but g has {} variables",
                self.n, self.g.nvars
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicEntryJson {
    pub ijk: [usize; 3],
    pub re: JsonNum,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<JsonNum>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicJson {
    pub n: usize,
    pub entries: Vec<CubicEntryJson>,
}

impl CubicJson {
    pub fn mode(&self) -> Result<Option<ScalarMode>> {
        let all: Vec<ScalarJson> = self
            .entries
            .iter()
            .map(|e| ScalarJson {
                re: e.re.clone(),
                im: e.im.clone(),
            })
            .collect();
        common_mode(all.iter())
    }

    /// Loads and symmetrizes the entries.
    pub fn to_cubic<S: Scalar>(&self) -> Result<CubicForm<S>> {
        if let Some(m) = self.mode()? {
            if m != S::MODE {
                return Err(Error::ModeMismatch(format!(
                    "cubic entries are {m} but {} mode was requested",
                    S::MODE
                )));
            }
        }
        let entries = self
            .entries
            .iter()
            .map(|e| {
                let s = ScalarJson {
                    re: e.re.clone(),
                    im: e.im.clone(),
                };
                Ok((e.ijk, S::from_json(&s)?))
            })
            .collect::<Result<Vec<_>>>()?;
        CubicForm::from_entries(self.n, &entries).map_err(|e| Error::Schema(e.to_string()))
    }

    /// One entry per sorted index triple.
    pub fn from_cubic<S: Scalar>(c: &CubicForm<S>) -> Self {
        let n = c.dim();
        let mut entries = Vec::new();
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    let v = c.get(i, j, k);
                    if v.is_zero() {
                        continue;
                    }
                    let distinct = match (i == j, j == k) {
                        (true, true) => 1,
                        (true, false) | (false, true) => 3,
                        (false, false) => 6,
                    };
                    let val = (v.clone() * S::from_i64(distinct)).to_json();
                    entries.push(CubicEntryJson {
                        ijk: [i, j, k],
                        re: val.re,
                        im: val.im,
                    });
                }
            }
        }
        CubicJson { n, entries }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointJson {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl PointJson {
    pub fn to_complex(&self) -> Result<Vec<Complex64>> {
        if self.re.len() != self.im.len() {
            return Err(Error::Schema("point re/im lengths differ".into()));
        }
        Ok(self
            .re
            .iter()
            .zip(&self.im)
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect())
    }
}

/// Elliptic family: `{"tau": MVPoly, "s": MVPoly, "box": [re_lo, re_hi, im_lo, im_hi]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyJson {
    pub tau: PolyJson,
    pub s: PolyJson,
    #[serde(rename = "box")]
    pub domain: [f64; 4],
}

/// Input of the section-based commands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionProblemJson {
    pub potential: PotentialJson,
    pub section: PolyJson,
    #[serde(rename = "box")]
    pub domain: BaseBox,
}

pub fn from_json_str<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))
}

/// Compact JSON with floats printed as `{:.16e}` (17 significant digits) and
/// non-finite floats as `null`. Struct field order is declaration order, so
/// the output is byte-stable.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigitsFormatter);
    value
        .serialize(&mut ser)
        .expect("in-memory serialization cannot fail");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

struct SigDigitsFormatter;

impl serde_json::ser::Formatter for SigDigitsFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_exact_polynomial() {
        let doc = r#"{"nvars": 2, "terms": [
            {"exp": [2, 0], "re": "1/2", "im": "0"},
            {"exp": [0, 1], "re": "0", "im": "3"}]}"#;
        let j: PolyJson = from_json_str(doc).unwrap();
        let p = match AnyPoly::parse(&j, ScalarMode::Exact).unwrap() {
            AnyPoly::Exact(p) => p,
            AnyPoly::Float(_) => unreachable!(),
        };
        assert_eq!(p.coefficient(&[2, 0]), GaussRat::from_ratio(1, 2));
        assert_eq!(p.coefficient(&[0, 1]), GaussRat::from_i64(3) * GaussRat::imag_unit());
    }

    #[test]
    fn rejects_mixed_and_mismatched_modes() {
        let mixed = r#"{"nvars": 1, "terms": [
            {"exp": [1], "re": "1/2"}, {"exp": [2], "re": 0.5}]}"#;
        let j: PolyJson = from_json_str(mixed).unwrap();
        assert!(matches!(j.mode(), Err(Error::ModeMismatch(_))));

        let within = r#"{"nvars": 1, "terms": [{"exp": [1], "re": "1", "im": 0.5}]}"#;
        let j: PolyJson = from_json_str(within).unwrap();
        assert!(matches!(j.mode(), Err(Error::ModeMismatch(_))));

        let float = r#"{"nvars": 1, "terms": [{"exp": [1], "re": 0.5}]}"#;
        let j: PolyJson = from_json_str(float).unwrap();
        assert!(matches!(
            AnyPoly::parse(&j, ScalarMode::Exact),
            Err(Error::ModeMismatch(_))
        ));
        assert!(AnyPoly::parse(&j, ScalarMode::Float).is_ok());
    }

    #[test]
    fn rejects_bad_exponent_length() {
        let doc = r#"{"nvars": 2, "terms": [{"exp": [1], "re": 1.0}]}"#;
        let j: PolyJson = from_json_str(doc).unwrap();
        assert!(matches!(j.to_poly::<Complex64>(), Err(Error::Schema(_))));
    }

    #[test]
    fn canonical_floats() {
        #[derive(Serialize)]
        struct T {
            x: f64,
            y: f64,
            z: f64,
        }
        let s = to_canonical_json(&T {
            x: 0.1,
            y: -2.0,
            z: f64::NAN,
        });
        assert_eq!(
            s,
            r#"{"x":1.0000000000000001e-1,"y":-2.0000000000000000e0,"z":null}"#
        );
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.1));
    }

    #[test]
    fn cubic_roundtrip_preserves_form() {
        let c = crate::cubic::lossen_witness::<GaussRat>();
        let j = CubicJson::from_cubic(&c);
        assert_eq!(j.to_cubic::<GaussRat>().unwrap(), c);
    }

    proptest! {
        #[test]
        fn exact_poly_json_roundtrip(
            terms in proptest::collection::vec(
                ((0u32..4, 0u32..4, 0u32..4), -50i64..50, 1i64..20, -50i64..50), 0..8)
        ) {
            let p = MVPoly::from_terms(3, terms.into_iter().map(|((a, b, c), num, den, im)| {
                (vec![a, b, c], GaussRat::from_ratio(num, den) + GaussRat::from_i64(im) * GaussRat::imag_unit())
            })).unwrap();
            let j = PolyJson::from_poly(&p);
            let text = to_canonical_json(&j);
            let back: PolyJson = from_json_str(&text).unwrap();
            prop_assert_eq!(back.to_poly::<GaussRat>().unwrap(), p);
        }

        #[test]
        fn float_poly_json_roundtrip(
            terms in proptest::collection::vec(((0u32..4, 0u32..4), -1e3f64..1e3, -1e3f64..1e3), 0..8)
        ) {
            let p = MVPoly::from_terms(2, terms.into_iter().map(|((a, b), re, im)| {
                (vec![a, b], Complex64::new(re, im))
            })).unwrap();
            let text = to_canonical_json(&PolyJson::from_poly(&p));
            let back: PolyJson = from_json_str(&text).unwrap();
            prop_assert_eq!(back.to_poly::<Complex64>().unwrap(), p);
        }
    }
}
