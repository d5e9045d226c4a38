//! The shipped catalog of bivariate bicycle codes.

use serde::Deserialize;

use crate::code::BBCode;
use crate::error::{Error, Result};
use crate::poly::{BivariatePolynomial, RingParams};

const BUILTIN: &str = include_str!("../data/bb_codes.toml");

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogEntry {
    pub name: String,
    pub ell: usize,
    pub m: usize,
    pub a: Vec<[i64; 2]>,
    pub b: Vec<[i64; 2]>,
    pub k: usize,
    pub d: Option<usize>,
}

#[derive(Debug, Deserialize)]
struct CatalogFile {
    code: Vec<CatalogEntry>,
}

impl CatalogEntry {
    /// Builds the code and checks the recorded dimension against the rank.
    pub fn build(&self) -> Result<BBCode> {
        let params = RingParams::new(self.ell, self.m)?;
        let a = BivariatePolynomial::from_terms(params, self.a.iter().map(|t| (t[0], t[1])));
        let b = BivariatePolynomial::from_terms(params, self.b.iter().map(|t| (t[0], t[1])));
        if a.weight() != self.a.len() || b.weight() != self.b.len() {
            return Err(Error::Catalog(format!("{}: repeated terms in A or B", self.name)));
        }
        let code = BBCode::new(self.name.clone(), a, b, self.d)?;
        if code.k != self.k {
            return Err(Error::Catalog(format!(
                "{}: recorded k = {} but rank computation gives {}",
                self.name, self.k, code.k
            )));
        }
        Ok(code)
    }
}

pub fn parse_catalog(text: &str) -> Result<Vec<BBCode>> {
    let file: CatalogFile = toml::from_str(text).map_err(|e| Error::Catalog(e.to_string()))?;
    file.code.iter().map(CatalogEntry::build).collect()
}

/// The built-in catalog, validated.
pub fn builtin_codes() -> Result<Vec<BBCode>> {
    parse_catalog(BUILTIN)
}

pub fn builtin_code(name: &str) -> Result<BBCode> {
    let codes = builtin_codes()?;
    let known = codes.iter().map(|c| c.name.as_str()).collect::<Vec<_>>().join(", ");
    codes
        .iter()
        .find(|c| c.name == name)
        .cloned()
        .ok_or_else(|| Error::UnknownCode { name: name.to_string(), known })
}
