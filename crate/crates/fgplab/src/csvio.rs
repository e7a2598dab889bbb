//! CSV and plain-text readers and writers. All loaders name the offending
//! row in their errors, counting the header as row 1.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use fgp_core::backtest::PriceSeries;
use fgp_core::dynamics::MarketPath;
use fgp_core::simplex::SimplexPoint;

/// Load a dated price table with header `date,p1,...,pn`.
pub fn load_prices(path: &Path) -> Result<PriceSeries> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("cannot open price file {}", path.display()))?;
    let headers = reader.headers().context("price file has no header row")?;
    if headers.is_empty() || headers.get(0) != Some("date") {
        bail!("price file header must start with a `date` column");
    }
    let n = headers.len() - 1;
    if n == 0 {
        bail!("price file needs at least one price column after `date`");
    }

    let mut dates: Vec<String> = Vec::new();
    let mut prices = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 2; // header is row 1
        let record = record.with_context(|| format!("row {row}: malformed CSV record"))?;
        if record.len() != n + 1 {
            bail!("row {row}: expected {} fields, found {}", n + 1, record.len());
        }
        let date = record.get(0).unwrap_or_default().trim();
        if date.is_empty() {
            bail!("row {row}: empty date");
        }
        if let Some(prev) = dates.last() {
            if date <= prev.as_str() {
                bail!("row {row}: date {date} does not increase over {prev}");
            }
        }
        let mut price_row = Vec::with_capacity(n);
        for (col, field) in record.iter().skip(1).enumerate() {
            let value: f64 = field.trim().parse().with_context(|| {
                format!("row {row}: column {} is not a number: {field:?}", col + 2)
            })?;
            if !value.is_finite() || !(value > 0.0) {
                bail!("row {row}: price {value} in column {} is not strictly positive", col + 2);
            }
            price_row.push(value);
        }
        dates.push(date.to_string());
        prices.push(price_row);
    }
    Ok(PriceSeries::new(dates, prices)?)
}

/// Write a dated price table with header `date,p1,...,pn`. Prices are
/// written in shortest round-trip decimal form, so the file is
/// byte-deterministic and reloads to identical values.
pub fn write_prices(path: &Path, series: &PriceSeries) -> Result<()> {
    let n = series.asset_count();
    let mut out = String::from("date");
    for i in 1..=n {
        out.push_str(&format!(",p{i}"));
    }
    out.push('\n');
    for (date, row) in series.dates().iter().zip(series.prices()) {
        out.push_str(date);
        for &p in row {
            out.push_str(&format!(",{p}"));
        }
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Load a weight path with header `w1,...,wn`, one simplex point per row.
/// Rows whose sum strays from one by more than the simplex tolerance are
/// rejected; tiny rounding noise is renormalized.
pub fn load_weight_path(path: &Path) -> Result<MarketPath> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("cannot open path file {}", path.display()))?;
    let headers = reader.headers().context("path file has no header row")?;
    let n = headers.len();
    if n < 2 {
        bail!("path file needs at least two weight columns");
    }

    let mut points = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 2;
        let record = record.with_context(|| format!("row {row}: malformed CSV record"))?;
        if record.len() != n {
            bail!("row {row}: expected {n} fields, found {}", record.len());
        }
        let mut coords = Vec::with_capacity(n);
        for (col, field) in record.iter().enumerate() {
            let value: f64 = field.trim().parse().with_context(|| {
                format!("row {row}: column {} is not a number: {field:?}", col + 1)
            })?;
            coords.push(value);
        }
        let point = SimplexPoint::closed(coords)
            .with_context(|| format!("row {row}: not a point of the simplex"))?;
        points.push(point);
    }
    Ok(MarketPath::new(points)?)
}

/// Write a weight path with header `w1,...,wn`.
pub fn write_weight_path(path: &Path, market: &MarketPath) -> Result<()> {
    let n = market.n();
    let mut out = (1..=n).map(|i| format!("w{i}")).collect::<Vec<_>>().join(",");
    out.push('\n');
    for point in market.points() {
        let row = point
            .coords()
            .iter()
            .map(|w| format!("{w}"))
            .collect::<Vec<_>>()
            .join(",");
        out.push_str(&row);
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Load a plain-text sample list: one number per line, blank lines and
/// `#` comment lines ignored.
pub fn load_samples(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot open samples file {}", path.display()))?;
    let mut samples = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let value: f64 = line
            .parse()
            .with_context(|| format!("row {}: not a number: {line:?}", idx + 1))?;
        if !value.is_finite() {
            bail!("row {}: samples must be finite, found {value}", idx + 1);
        }
        samples.push(value);
    }
    if samples.is_empty() {
        bail!("samples file {} holds no numbers", path.display());
    }
    Ok(samples)
}
