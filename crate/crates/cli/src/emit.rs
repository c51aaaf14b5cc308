//! CSV and JSON emitters. Numeric cells use the shortest round-trip decimal
//! form, so parsing a file back recovers the exact bit patterns.

use serde::{Deserialize, Serialize};

use chbell::OptimumRecord;

pub const CURVE_HEADER: &str = "ratio,q,eta_crit,phi1,phi2,phi3,phi4,nu1,nu2,nu3,nu4,k1,k2,k3,k4";

/// One curve row: everything needed to recompute the record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveRow {
    pub ratio: f64,
    pub q: f64,
    pub eta_crit: Option<f64>,
    pub phi: [f64; 4],
    pub nu: [f64; 4],
    pub k: Option<[u32; 4]>,
}

impl CurveRow {
    pub fn from_record(rec: &OptimumRecord) -> Self {
        let angles = rec.config.angles();
        Self {
            ratio: rec.ratio,
            q: rec.report.q,
            eta_crit: rec.report.eta_crit,
            phi: [angles[0], angles[1], angles[2], angles[3]],
            nu: [angles[4], angles[5], angles[6], angles[7]],
            k: rec.k.map(|quad| quad.values()),
        }
    }
}

fn opt_cell<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn curve_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for r in rows {
        let ks = match r.k {
            Some(k) => format!("{},{},{},{}", k[0], k[1], k[2], k[3]),
            None => ",,,".to_string(),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.ratio,
            r.q,
            opt_cell(r.eta_crit),
            r.phi[0],
            r.phi[1],
            r.phi[2],
            r.phi[3],
            r.nu[0],
            r.nu[1],
            r.nu[2],
            r.nu[3],
            ks,
        ));
    }
    out
}

pub fn curve_json(rows: &[CurveRow]) -> String {
    let mut s = serde_json::to_string_pretty(rows).expect("serializable rows");
    s.push('\n');
    s
}

/// Parses a curve CSV back into rows (used by round-trip checks).
pub fn parse_curve_csv(text: &str) -> Result<Vec<CurveRow>, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty file")?;
    if header != CURVE_HEADER {
        return Err(format!("unexpected header `{header}`"));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 15 {
            return Err(format!("row {}: expected 15 cells, got {}", i + 2, cells.len()));
        }
        let f = |s: &str| s.parse::<f64>().map_err(|e| format!("row {}: {e}", i + 2));
        let eta_crit =
            if cells[2].is_empty() { None } else { Some(f(cells[2])?) };
        let k = if cells[11].is_empty() {
            None
        } else {
            let mut quad = [0u32; 4];
            for (slot, cell) in quad.iter_mut().zip(&cells[11..15]) {
                *slot = cell.parse::<u32>().map_err(|e| format!("row {}: {e}", i + 2))?;
            }
            Some(quad)
        };
        rows.push(CurveRow {
            ratio: f(cells[0])?,
            q: f(cells[1])?,
            eta_crit,
            phi: [f(cells[3])?, f(cells[4])?, f(cells[5])?, f(cells[6])?],
            nu: [f(cells[7])?, f(cells[8])?, f(cells[9])?, f(cells[10])?],
            k,
        });
    }
    Ok(rows)
}

/// One row of the optimal-exponent table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableRow {
    pub ratio: f64,
    pub k: [u32; 4],
    pub sin_phi: [f64; 4],
    pub eta_crit: f64,
    pub q: f64,
    pub ref_k: [u32; 4],
    pub ref_eta_crit: f64,
}

pub const TABLE_HEADER: &str =
    "ratio,k1,k2,k3,k4,sin_phi1,sin_phi2,sin_phi3,sin_phi4,eta_crit,q,ref_k1,ref_k2,ref_k3,ref_k4,ref_eta_crit";

/// Truncation (not rounding) to two decimals; the convention the reference
/// table uses for the sine columns.
pub fn trunc2(x: f64) -> f64 {
    (x * 100.0).floor() / 100.0
}

pub fn table_csv(rows: &[TableRow]) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{:.2},{:.2},{:.2},{:.2},{},{},{},{},{},{},{}\n",
            r.ratio,
            r.k[0],
            r.k[1],
            r.k[2],
            r.k[3],
            trunc2(r.sin_phi[0]),
            trunc2(r.sin_phi[1]),
            trunc2(r.sin_phi[2]),
            trunc2(r.sin_phi[3]),
            r.eta_crit,
            r.q,
            r.ref_k[0],
            r.ref_k[1],
            r.ref_k[2],
            r.ref_k[3],
            r.ref_eta_crit,
        ));
    }
    out
}

pub fn table_json(rows: &[TableRow]) -> String {
    let mut s = serde_json::to_string_pretty(rows).expect("serializable rows");
    s.push('\n');
    s
}

pub fn table_stdout(rows: &[TableRow]) -> String {
    let mut out = String::new();
    out.push_str(
        "ratio   k1    k2    k3    k4   sin1  sin2  sin3  sin4   eta_crit     q            ref_eta_crit\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{:<6}  {:<4}  {:<4}  {:<4}  {:<4} {:.2}  {:.2}  {:.2}  {:.2}   {:<11.9}  {:<11.9}  {:<11.9}\n",
            r.ratio,
            r.k[0],
            r.k[1],
            r.k[2],
            r.k[3],
            trunc2(r.sin_phi[0]),
            trunc2(r.sin_phi[1]),
            trunc2(r.sin_phi[2]),
            trunc2(r.sin_phi[3]),
            r.eta_crit,
            r.q,
            r.ref_eta_crit,
        ));
    }
    out
}

/// One analytic-solve row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyticRow {
    pub eta: f64,
    pub t_star: f64,
    pub lambda1: f64,
    pub ratio: f64,
}

pub const ANALYTIC_HEADER: &str = "eta,t_star,lambda1,ratio";

pub fn analytic_csv(rows: &[AnalyticRow]) -> String {
    let mut out = String::from(ANALYTIC_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.eta, r.t_star, r.lambda1, r.ratio));
    }
    out
}

pub fn analytic_json(rows: &[AnalyticRow]) -> String {
    let mut s = serde_json::to_string_pretty(rows).expect("serializable rows");
    s.push('\n');
    s
}
