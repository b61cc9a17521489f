use std::io::Write;

use serde::Serialize;

use super::{kkt_residual, solve, ExtremalProblem};
use crate::error::{Error, Result};
use crate::orlicz::ConjugatePair;

/// The scan reports a plateau when the last-decade increment is below this
/// fraction of the running maximum.
pub const PLATEAU_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub n: usize,
    pub fstar: Option<f64>,
    pub lambda: Option<f64>,
    pub blocks: Option<usize>,
    pub kkt_residual: Option<f64>,
    pub error: Option<String>,
}

/// Result of [`boundedness_scan`].
///
/// `c_hat` is an empirical estimate of the uniform bound, never a
/// certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
    pub c_hat: f64,
    /// `f*(n_last) - f*(n_ref)` where `n_ref` is the smallest scanned
    /// `n >= n_last / 10`.
    pub last_decade_increment: f64,
    pub decade_start: usize,
    pub relative_increment: f64,
    pub plateau: bool,
    pub verdict_is_empirical: bool,
}

impl ScanTable {
    /// Successful `(n, f*)` pairs.
    pub fn values(&self) -> Vec<(usize, f64)> {
        self.rows
            .iter()
            .filter_map(|r| r.fstar.map(|f| (r.n, f)))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row).map_err(csv_error)?;
        }
        w.flush().map_err(|e| Error::Io {
            path: "<csv>".into(),
            message: e.to_string(),
        })
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io {
        path: "<csv>".into(),
        message: e.to_string(),
    }
}

/// Solves the extremal problem for every `n` in `n_list` (strictly
/// increasing). Failed rows keep their error message and the scan continues.
pub fn boundedness_scan(pair: &ConjugatePair, n_list: &[usize]) -> Result<ScanTable> {
    if n_list.is_empty() {
        return Err(Error::InvalidArgument("n list is empty".into()));
    }
    if n_list[0] == 0 || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "n list must be strictly increasing and positive".into(),
        ));
    }
    let n_max = *n_list.last().unwrap();
    let levels = pair.levels_up_to(n_max)?;
    let rows: Vec<ScanRow> = n_list
        .iter()
        .map(|&n| {
            let solved = ExtremalProblem::from_levels(pair, &levels[..n]).and_then(|p| solve(&p));
            match solved {
                Ok(sol) => ScanRow {
                    n,
                    fstar: Some(sol.objective),
                    lambda: Some(sol.lambda),
                    blocks: Some(sol.blocks.len()),
                    kkt_residual: Some(kkt_residual(&sol, pair)),
                    error: None,
                },
                Err(e) => ScanRow {
                    n,
                    fstar: None,
                    lambda: None,
                    blocks: None,
                    kkt_residual: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let solved: Vec<(usize, f64)> = rows
        .iter()
        .filter_map(|r| r.fstar.map(|f| (r.n, f)))
        .collect();
    let Some(&(n_last, f_last)) = solved.last() else {
        return Err(Error::Internal("every scan row failed".into()));
    };
    let c_hat = solved.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let &(decade_start, f_ref) = solved
        .iter()
        .find(|&&(n, _)| 10 * n >= n_last)
        .expect("the last row qualifies");
    let last_decade_increment = f_last - f_ref;
    let relative_increment = last_decade_increment / c_hat;
    Ok(ScanTable {
        rows,
        c_hat,
        last_decade_increment,
        decade_start,
        relative_increment,
        plateau: decade_start < n_last && relative_increment < PLATEAU_FRACTION,
        verdict_is_empirical: true,
    })
}
