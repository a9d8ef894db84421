//! Analysis document assembly and file output.
//!
//! The JSON document round-trips losslessly: `serde_json` emits the
//! shortest decimal representation that recovers each double bit for bit,
//! so re-reading an output file and re-serializing it reproduces identical
//! bytes. The CSV rendering is a flat `key,value` view of the same data for
//! spreadsheet consumption.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use poa_pricing::demand::{DominanceProfile, InstanceJson};
use poa_pricing::equilibrium::EquilibriumPair;
use poa_pricing::oracle::{OracleResult, OracleValue};
use poa_pricing::poa::PoaReport;

/// Full output of the `analyze` command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisDocument {
    pub tool: String,
    pub version: String,
    /// Unix seconds; honors `SOURCE_DATE_EPOCH` for reproducible output.
    pub timestamp: u64,
    pub instance_path: String,
    pub instance: InstanceJson,
    /// Intercept vector the analysis actually used.
    pub intercept: Vec<f64>,
    pub profile: DominanceProfile,
    pub equilibrium: EquilibriumPair,
    pub poa: PoaReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracles: Option<Vec<OracleResult>>,
}

/// Current time, unless `SOURCE_DATE_EPOCH` pins it for reproducible runs.
pub fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or_else(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        })
}

/// Write through a temporary file and rename, so readers never observe a
/// half-written document.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)
}

impl AnalysisDocument {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("document serializes");
        text.push('\n');
        text
    }

    /// Flat `key,value` rendering; vector fields get an index suffix.
    pub fn to_csv(&self) -> String {
        let mut rows: Vec<(String, String)> = vec![
            ("tool".into(), self.tool.clone()),
            ("version".into(), self.version.clone()),
            ("timestamp".into(), self.timestamp.to_string()),
            ("instance_path".into(), self.instance_path.clone()),
            ("n".into(), self.instance.n.to_string()),
        ];
        let push_vec = |rows: &mut Vec<(String, String)>, name: &str, values: &[f64]| {
            for (i, v) in values.iter().enumerate() {
                rows.push((format!("{name}_{i}"), format!("{v}")));
            }
        };
        push_vec(&mut rows, "a", &self.intercept);
        push_vec(&mut rows, "d", &self.profile.d);
        push_vec(&mut rows, "mu_local", &self.profile.mu_local);
        rows.push(("mu".into(), format!("{}", self.profile.mu)));
        push_vec(&mut rows, "p_star", self.equilibrium.p_star.as_slice());
        push_vec(&mut rows, "p_ne", self.equilibrium.p_ne.as_slice());
        rows.push(("r_star".into(), format!("{}", self.equilibrium.r_star)));
        rows.push(("r_ne".into(), format!("{}", self.equilibrium.r_ne)));
        if let Some(poa_of_a) = self.poa.poa_of_a {
            rows.push(("poa_of_a".into(), format!("{poa_of_a}")));
        }
        rows.push(("poa_min".into(), format!("{}", self.poa.poa_min)));
        rows.push(("poa_max".into(), format!("{}", self.poa.poa_max)));
        rows.push(("mu_bound".into(), format!("{}", self.poa.mu_bound)));
        rows.push(("mu_spectral".into(), format!("{}", self.poa.mu_spectral)));
        rows.push((
            "exact_poa_min".into(),
            format!("{}", self.poa.exact_poa_min),
        ));
        push_vec(&mut rows, "worst_intercept", &self.poa.worst_intercept);
        push_vec(&mut rows, "lambda_norm", &self.poa.lambda_norm);
        rows.push(("alpha_mu".into(), format!("{}", self.poa.alpha_mu)));
        rows.push(("beta_mu".into(), format!("{}", self.poa.beta_mu)));
        if let Some(oracles) = &self.oracles {
            for oracle in oracles {
                let name = match oracle.quantity {
                    poa_pricing::oracle::OracleQuantity::CentralizedRevenue => {
                        "centralized_revenue"
                    }
                    poa_pricing::oracle::OracleQuantity::NashPrices => "nash_prices",
                    poa_pricing::oracle::OracleQuantity::PoaMinSampled => "poa_min_sampled",
                };
                let value = match &oracle.value {
                    OracleValue::Scalar(v) => format!("{v}"),
                    OracleValue::Vector(v) => v
                        .iter()
                        .map(|x| format!("{x}"))
                        .collect::<Vec<_>>()
                        .join(";"),
                };
                rows.push((format!("oracle_{name}_value"), value));
                rows.push((
                    format!("oracle_{name}_discrepancy"),
                    format!("{}", oracle.discrepancy),
                ));
                rows.push((format!("oracle_{name}_passed"), oracle.passed.to_string()));
            }
        }

        let mut out = String::from("key,value\n");
        for (k, v) in rows {
            out.push_str(&k);
            out.push(',');
            out.push_str(&v);
            out.push('\n');
        }
        out
    }
}
