//! JSON form of a certificate.

use std::collections::BTreeMap;

use jcert::certificate::{SchmudgenCertificate, WeightedSquare};
use jcert::{ChebPoly, Multidegree};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareJson {
    pub scale: f64,
    /// Chebyshev coefficients keyed by `"k1,k2,..."`.
    pub coeffs: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    #[serde(rename = "J")]
    pub j: Vec<usize>,
    pub squares: Vec<SquareJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub num_vars: usize,
    pub r: u32,
    pub eta: f64,
    pub residual: f64,
    pub terms: Vec<TermJson>,
}

fn key(k: &Multidegree) -> String {
    k.entries().iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

fn parse_key(s: &str, n: usize) -> Result<Multidegree, String> {
    let e: Vec<u32> = s
        .split(',')
        .map(|t| t.trim().parse::<u32>().map_err(|_| format!("bad multidegree key '{s}'")))
        .collect::<Result<_, _>>()?;
    if e.len() != n {
        return Err(format!("multidegree key '{s}' does not have {n} entries"));
    }
    Ok(Multidegree::new(e))
}

impl From<&SchmudgenCertificate> for CertificateJson {
    fn from(c: &SchmudgenCertificate) -> Self {
        CertificateJson {
            num_vars: c.num_vars,
            r: c.r,
            eta: c.eta,
            residual: c.residual,
            terms: c
                .terms
                .iter()
                .map(|(j, squares)| TermJson {
                    j: j.clone(),
                    squares: squares
                        .iter()
                        .map(|s| SquareJson {
                            scale: s.scale,
                            coeffs: s.root.terms().map(|(k, v)| (key(k), v)).collect(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

impl CertificateJson {
    pub fn to_certificate(&self) -> Result<SchmudgenCertificate, String> {
        let n = self.num_vars;
        if n == 0 {
            return Err("num_vars must be positive".into());
        }
        let mut terms: BTreeMap<Vec<usize>, Vec<WeightedSquare>> = BTreeMap::new();
        for t in &self.terms {
            let list = terms.entry(t.j.clone()).or_default();
            for s in &t.squares {
                let coeffs = s
                    .coeffs
                    .iter()
                    .map(|(k, &v)| Ok((parse_key(k, n)?, v)))
                    .collect::<Result<Vec<_>, String>>()?;
                list.push(WeightedSquare { scale: s.scale, root: ChebPoly::from_terms(n, coeffs) });
            }
        }
        Ok(SchmudgenCertificate { num_vars: n, r: self.r, eta: self.eta, terms, residual: self.residual })
    }
}
