//! Tab-separated output tables. Floats are written in shortest round-trip
//! decimal form, so every table is byte-deterministic for fixed input.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use fgp_core::backtest::BacktestReport;
use fgp_core::transport::Coupling;

/// Write the three plot tables of a backtest run into `out_dir`:
/// `logV.tsv` (date, logV over the test window), `curve.tsv` (mu1, pi1
/// samples of the allocation curve), and `theta.tsv` (date, log weight
/// ratio over the whole series).
pub fn emit_plot_data(report: &BacktestReport, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;

    let mut log_v = String::from("date\tlogV\n");
    for (date, lv) in report.test_dates.iter().zip(&report.log_v) {
        log_v.push_str(&format!("{date}\t{lv}\n"));
    }
    write_table(&out_dir.join("logV.tsv"), &log_v)?;

    let mut curve = String::from("mu1\tpi1\n");
    for &(mu1, pi1) in &report.curve {
        curve.push_str(&format!("{mu1}\t{pi1}\n"));
    }
    write_table(&out_dir.join("curve.tsv"), &curve)?;

    let mut theta = String::from("date\ttheta\n");
    for (date, th) in report.dates.iter().zip(&report.theta) {
        theta.push_str(&format!("{date}\t{th}\n"));
    }
    write_table(&out_dir.join("theta.tsv"), &theta)?;
    Ok(())
}

/// Serialize a coupling as `i<TAB>j<TAB>mass` rows under a header line.
pub fn coupling_tsv(coupling: &Coupling) -> String {
    let mut out = String::from("i\tj\tmass\n");
    for &(i, j, mass) in coupling.entries() {
        out.push_str(&format!("{i}\t{j}\t{mass}\n"));
    }
    out
}

/// Serialize a sampled transport map as `theta<TAB>map<TAB>pi1` rows.
pub fn map_table_tsv(rows: &[(f64, f64, f64)]) -> String {
    let mut out = String::from("theta\tmap\tpi1\n");
    for &(theta, map, pi1) in rows {
        out.push_str(&format!("{theta}\t{map}\t{pi1}\n"));
    }
    out
}

/// Serialize a value decomposition as `t<TAB>logV<TAB>phi<TAB>drift` rows.
pub fn decomposition_tsv(log_v: &[f64], phi_term: &[f64], drift: &[f64]) -> String {
    let mut out = String::from("t\tlogV\tphi\tdrift\n");
    for (t, ((lv, ph), dr)) in log_v.iter().zip(phi_term).zip(drift).enumerate() {
        out.push_str(&format!("{t}\t{lv}\t{ph}\t{dr}\n"));
    }
    out
}

pub fn write_table(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}
