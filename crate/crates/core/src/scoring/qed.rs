//! Drug-likeness as a weighted geometric mean of desirability functions.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use once_cell::race::OnceBox;

use crate::datafile::{verified_body, DataError};
use crate::featurize::{aromatic_ring_count, h_bond_acceptors, h_bond_donors, mol_weight, rotatable_bonds, tpsa};
use crate::molgraph::Molecule;
use crate::pattern::{has_match, parse_smarts, PatternGraph};

use super::crippen::crippen_logp;

pub const QED_DATA: &str = include_str!("../../data/qed.tsv");
pub const ALERTS_DATA: &str = include_str!("../../data/alerts.smarts");

/// Property order used throughout: MW, ALOGP, HBA, HBD, PSA, ROTB, AROM,
/// ALERTS.
pub const QED_PROPERTIES: [&str; 8] = ["MW", "ALOGP", "HBA", "HBD", "PSA", "ROTB", "AROM", "ALERTS"];

/// Parameters of one asymmetric double sigmoid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ads {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    pub dmax: f64,
}

impl Ads {
    /// Desirability scaled by `dmax`, so the peak is close to 1.
    pub fn eval(&self, x: f64) -> f64 {
        let rise = 1.0 + libm::exp(-(x - self.c + self.d / 2.0) / self.e);
        let fall = 1.0 + libm::exp(-(x - self.c - self.d / 2.0) / self.f);
        (self.a + self.b / rise * (1.0 - 1.0 / fall)) / self.dmax
    }
}

#[derive(Debug, Clone)]
pub struct QedParams {
    pub ads: [Ads; 8],
    pub weights: [f64; 8],
    pub alerts: Vec<(String, PatternGraph)>,
}

impl QedParams {
    pub fn parse(params: &str, alerts: &str) -> Result<QedParams, DataError> {
        let mut ads = [Ads {
            a: 0.0,
            b: 0.0,
            c: 0.0,
            d: 0.0,
            e: 1.0,
            f: 1.0,
            dmax: 1.0,
        }; 8];
        let mut weights = [0.0; 8];
        let mut seen = [false; 8];
        for (line, l) in verified_body(params)? {
            let cols: Vec<&str> = l.split('\t').map(str::trim).collect();
            let bad = |msg: &str| DataError::Malformed {
                line,
                msg: String::from(msg),
            };
            if cols.len() != 9 {
                return Err(bad("expected property and eight numbers"));
            }
            let k = QED_PROPERTIES
                .iter()
                .position(|p| *p == cols[0])
                .ok_or_else(|| bad("unknown property"))?;
            let mut v = [0.0; 8];
            for (slot, text) in v.iter_mut().zip(&cols[1..]) {
                *slot = text.parse::<f64>().map_err(|_| bad("non-numeric value"))?;
            }
            if v[6] <= 0.0 || v[7] <= 0.0 {
                return Err(bad("dmax and weight must be positive"));
            }
            ads[k] = Ads {
                a: v[0],
                b: v[1],
                c: v[2],
                d: v[3],
                e: v[4],
                f: v[5],
                dmax: v[6],
            };
            weights[k] = v[7];
            seen[k] = true;
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(DataError::Malformed {
                line: 0,
                msg: format!("missing property {}", QED_PROPERTIES[k]),
            });
        }
        let mut parsed_alerts = Vec::new();
        for (line, l) in verified_body(alerts)? {
            let (name, smarts) = l.split_once('\t').ok_or(DataError::Malformed {
                line,
                msg: String::from("expected name<TAB>smarts"),
            })?;
            let p = parse_smarts(smarts.trim()).map_err(|e| DataError::Malformed {
                line,
                msg: format!("{e}"),
            })?;
            parsed_alerts.push((String::from(name.trim()), p));
        }
        Ok(QedParams {
            ads,
            weights,
            alerts: parsed_alerts,
        })
    }

    pub fn bundled() -> &'static QedParams {
        static P: OnceBox<QedParams> = OnceBox::new();
        P.get_or_init(|| Box::new(QedParams::parse(QED_DATA, ALERTS_DATA).expect("bundled QED data is valid")))
    }

    /// Number of alert patterns present at least once.
    pub fn alert_count(&self, m: &Molecule) -> usize {
        self.alerts.iter().filter(|(_, p)| has_match(p, m)).count()
    }

    /// QED from precomputed property values (in [`QED_PROPERTIES`] order).
    pub fn qed_from_properties(&self, x: &[f64; 8]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for k in 0..8 {
            let d = self.ads[k].eval(x[k]).max(1e-300);
            num += self.weights[k] * libm::log(d);
            den += self.weights[k];
        }
        libm::exp(num / den)
    }
}

/// The eight QED properties of a molecule.
pub fn qed_properties(m: &Molecule, params: &QedParams) -> [f64; 8] {
    [
        mol_weight(m),
        crippen_logp(m),
        h_bond_acceptors(m) as f64,
        h_bond_donors(m) as f64,
        tpsa(m),
        rotatable_bonds(m) as f64,
        aromatic_ring_count(m) as f64,
        params.alert_count(m) as f64,
    ]
}

pub fn qed_with(m: &Molecule, params: &QedParams) -> f64 {
    params.qed_from_properties(&qed_properties(m, params))
}

pub fn qed(m: &Molecule) -> f64 {
    qed_with(m, QedParams::bundled())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::parse_smiles;

    #[test]
    fn bundled_params_load() {
        let p = QedParams::bundled();
        assert_eq!(p.weights[0], 0.66);
        assert!(p.alerts.len() >= 20);
    }

    #[test]
    fn in_open_unit_interval() {
        for s in ["C", "CC(=O)Nc1ccc(O)cc1", "c1ccccc1", "CCCCCCCCCCCCCCCCCCCC", "O=C(O)c1ccccc1O"] {
            let q = qed(&parse_smiles(s).unwrap());
            assert!(q > 0.0 && q < 1.0, "{s}: {q}");
        }
    }

    #[test]
    fn rotatable_bonds_past_peak_lower_qed() {
        let p = QedParams::bundled();
        let base = [300.0, 2.5, 4.0, 1.0, 60.0, 3.0, 1.0, 0.0];
        let mut prev = p.qed_from_properties(&base);
        for rotb in 4..15 {
            let mut x = base;
            x[5] = rotb as f64;
            let q = p.qed_from_properties(&x);
            assert!(q < prev, "rotb {rotb}");
            prev = q;
        }
    }

    #[test]
    fn alerts_detected() {
        let p = QedParams::bundled();
        assert_eq!(p.alert_count(&parse_smiles("CCO").unwrap()), 0);
        assert_eq!(p.alert_count(&parse_smiles("CC(=O)Cl").unwrap()), 1);
        assert!(p.alert_count(&parse_smiles("O=[N+]([O-])c1ccccc1").unwrap()) >= 1);
    }
}
