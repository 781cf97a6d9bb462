//! Batch indexing, first-hit evaluation and parameter sweeps.
//!
//! Work fans out over the current rayon pool; every merge keeps input order,
//! so results do not depend on the thread count.

use std::fmt::Write as _;
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;

use crate::descriptor::{Descriptor, Encoder, GaborDescriptor, RadonDescriptor};
use crate::error::{Error, Result};
use crate::gabor::GaborBankConfig;
use crate::imaging::{load_image, GrayImage};
use crate::index::{BarcodeIndex, IndexEntry};
use crate::irma::{assign_suitability, axis_errors, pairwise_sum, BranchTable, EvalRecord, IrmaCode};
use crate::manifest::ManifestRow;
use crate::radon::RadonConfig;

/// A labelled (or unlabelled) in-memory image.
#[derive(Debug, Clone)]
pub struct LabeledImage {
    pub image_id: String,
    pub image: GrayImage,
    pub label: Option<IrmaCode>,
}

/// A manifest row that could not be loaded or encoded.
#[derive(Debug)]
pub struct RowFailure {
    pub image_id: String,
    pub error: Error,
}

pub fn median_of(values: &[f64]) -> f64 {
    crate::barcode::median(values).unwrap_or(0.0)
}

/// Load every manifest row. Failed rows are returned separately, in order.
pub fn load_rows(rows: &[ManifestRow]) -> (Vec<LabeledImage>, Vec<RowFailure>) {
    let loaded: Vec<_> = rows
        .par_iter()
        .map(|row| {
            load_image(&row.path)
                .map(|image| LabeledImage {
                    image_id: row.image_id.clone(),
                    image,
                    label: row.label,
                })
                .map_err(|error| RowFailure {
                    image_id: row.image_id.clone(),
                    error,
                })
        })
        .collect();
    let mut ok = Vec::with_capacity(loaded.len());
    let mut failed = Vec::new();
    for r in loaded {
        match r {
            Ok(img) => ok.push(img),
            Err(f) => failed.push(f),
        }
    }
    (ok, failed)
}

/// Result of encoding a batch of images into index entries.
#[derive(Debug)]
pub struct IndexBuild {
    pub entries: Vec<IndexEntry>,
    pub failures: Vec<RowFailure>,
    pub median_extract_secs: f64,
    pub elapsed_secs: f64,
}

/// Encode `images` into index entries.
pub fn encode_entries(encoder: &Encoder, images: &[LabeledImage]) -> Result<(Vec<IndexEntry>, Vec<f64>)> {
    let encoded: Vec<(IndexEntry, f64)> = images
        .par_iter()
        .map(|item| {
            let start = Instant::now();
            let barcode = encoder.encode(&item.image)?;
            let secs = start.elapsed().as_secs_f64();
            Ok((IndexEntry::new(item.image_id.clone(), barcode, item.label), secs))
        })
        .collect::<Result<_>>()?;
    Ok(encoded.into_iter().unzip())
}

/// Load and encode manifest rows. Any failure aborts unless `skip_bad`,
/// in which case failed rows are logged and left out.
pub fn index_rows(encoder: &Encoder, rows: &[ManifestRow], skip_bad: bool) -> Result<IndexBuild> {
    let start = Instant::now();
    let results: Vec<std::result::Result<(IndexEntry, f64), RowFailure>> = rows
        .par_iter()
        .map(|row| {
            let fail = |error| RowFailure {
                image_id: row.image_id.clone(),
                error,
            };
            let image = load_image(&row.path).map_err(fail)?;
            let t = Instant::now();
            let barcode = encoder.encode(&image).map_err(fail)?;
            Ok((
                IndexEntry::new(row.image_id.clone(), barcode, row.label),
                t.elapsed().as_secs_f64(),
            ))
        })
        .collect();

    let mut entries = Vec::with_capacity(results.len());
    let mut times = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok((e, t)) => {
                entries.push(e);
                times.push(t);
            }
            Err(f) if skip_bad => {
                warn!("skipping {}: {}", f.image_id, f.error);
                failures.push(f);
            }
            Err(f) => return Err(f.error),
        }
    }
    let elapsed_secs = start.elapsed().as_secs_f64();
    info!(
        "encoded {} images in {:.3}s ({:.1} images/s)",
        entries.len(),
        elapsed_secs,
        entries.len() as f64 / elapsed_secs.max(1e-9)
    );
    Ok(IndexBuild {
        entries,
        failures,
        median_extract_secs: median_of(&times),
        elapsed_secs,
    })
}

/// Which branch table produced a score.
#[derive(Debug, Clone, PartialEq)]
pub enum TableSource {
    File(String),
    Uniform(u32),
    Corpus { codes: usize },
}

impl std::fmt::Display for TableSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TableSource::File(p) => write!(f, "file {p}"),
            TableSource::Uniform(b) => write!(f, "uniform b={b}"),
            TableSource::Corpus { codes } => {
                write!(f, "derived from {codes} corpus labels (approximation)")
            }
        }
    }
}

/// Derive a branch table from every label in the index and the test set.
pub fn corpus_table<'a>(
    index: &'a BarcodeIndex,
    queries: impl IntoIterator<Item = &'a LabeledImage>,
) -> Result<(BranchTable, TableSource)> {
    let codes: Vec<IrmaCode> = index
        .entries()
        .iter()
        .filter_map(|e| e.label)
        .chain(queries.into_iter().filter_map(|q| q.label))
        .collect();
    if codes.is_empty() {
        return Err(Error::Unlabeled("no labels to derive a branch table from".into()));
    }
    let n = codes.len();
    Ok((BranchTable::from_corpus(&codes)?, TableSource::Corpus { codes: n }))
}

/// First-hit outcome for one test image.
#[derive(Debug, Clone)]
pub struct QueryOutcome {
    pub image_id: String,
    pub label: IrmaCode,
    pub hit_id: String,
    pub hit_label: IrmaCode,
    pub similarity: f64,
    pub axis_errors: [f64; 4],
    pub extract_secs: f64,
    pub query_secs: f64,
}

impl QueryOutcome {
    pub fn error(&self) -> f64 {
        self.axis_errors.iter().sum()
    }
}

#[derive(Debug, Clone)]
pub struct EvaluationReport {
    pub config_tag: String,
    pub code_length: usize,
    pub table_source: TableSource,
    pub outcomes: Vec<QueryOutcome>,
    pub e_total: f64,
    pub axis_totals: [f64; 4],
    pub exact_match_rate: f64,
    pub median_extract_secs: f64,
    pub median_query_secs: f64,
}

/// Retrieve the first hit for each query and accumulate the IRMA error.
pub fn evaluate(
    index: &BarcodeIndex,
    encoder: &Encoder,
    queries: &[LabeledImage],
    table: &BranchTable,
    table_source: TableSource,
) -> Result<EvaluationReport> {
    if encoder.tag() != index.config_tag() {
        return Err(Error::ConfigMismatch {
            index: index.config_tag().to_string(),
            probe: encoder.tag().to_string(),
        });
    }
    if queries.is_empty() {
        return Err(Error::Usage("no test images to evaluate".into()));
    }
    let outcomes: Vec<QueryOutcome> = queries
        .par_iter()
        .map(|q| {
            let label = q.label.ok_or_else(|| Error::Unlabeled(q.image_id.clone()))?;
            let t0 = Instant::now();
            let probe = encoder.encode(&q.image)?;
            let extract_secs = t0.elapsed().as_secs_f64();
            let t1 = Instant::now();
            let hit = index
                .query(&probe, 1)?
                .into_iter()
                .next()
                .ok_or(Error::EmptyIndex)?;
            let query_secs = t1.elapsed().as_secs_f64();
            let hit_label = index.entries()[hit.position]
                .label
                .ok_or_else(|| Error::Unlabeled(hit.image_id.clone()))?;
            Ok(QueryOutcome {
                image_id: q.image_id.clone(),
                label,
                hit_id: hit.image_id,
                hit_label,
                similarity: hit.similarity,
                axis_errors: axis_errors(&label, &hit_label, table),
                extract_secs,
                query_secs,
            })
        })
        .collect::<Result<_>>()?;

    let mut axis_totals = [0.0; 4];
    for (j, total) in axis_totals.iter_mut().enumerate() {
        let column: Vec<f64> = outcomes.iter().map(|o| o.axis_errors[j]).collect();
        *total = pairwise_sum(&column);
    }
    let per_pair: Vec<f64> = outcomes.iter().map(QueryOutcome::error).collect();
    let exact = outcomes.iter().filter(|o| o.label == o.hit_label).count();
    let extract: Vec<f64> = outcomes.iter().map(|o| o.extract_secs).collect();
    let query: Vec<f64> = outcomes.iter().map(|o| o.query_secs).collect();
    Ok(EvaluationReport {
        config_tag: index.config_tag().to_string(),
        code_length: index.code_length(),
        table_source,
        e_total: pairwise_sum(&per_pair),
        axis_totals,
        exact_match_rate: exact as f64 / outcomes.len() as f64,
        median_extract_secs: median_of(&extract),
        median_query_secs: median_of(&query),
        outcomes,
    })
}

impl EvaluationReport {
    pub fn record(&self) -> EvalRecord {
        EvalRecord::new(self.config_tag.clone(), self.e_total, self.code_length)
    }

    /// Per-query CSV.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "image_id,irma_code,hit_id,hit_irma_code,similarity,error,err_t,err_d,err_a,err_b\n",
        );
        for o in &self.outcomes {
            let _ = writeln!(
                s,
                "{},{},{},{},{:.6},{:.9},{:.9},{:.9},{:.9},{:.9}",
                o.image_id,
                o.label,
                o.hit_id,
                o.hit_label,
                o.similarity,
                o.error(),
                o.axis_errors[0],
                o.axis_errors[1],
                o.axis_errors[2],
                o.axis_errors[3]
            );
        }
        s
    }

    /// Human-readable summary.
    pub fn summary(&self, eta: Option<f64>) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "descriptor        {}", self.config_tag);
        let _ = writeln!(s, "code length       {} bits", self.code_length);
        let _ = writeln!(s, "branch table      {}", self.table_source);
        let _ = writeln!(s, "test images       {}", self.outcomes.len());
        let _ = writeln!(s, "E_total           {:.6}", self.e_total);
        for (j, name) in crate::irma::AXIS_NAMES.iter().enumerate() {
            let _ = writeln!(s, "  {:<16}{:.6}", name, self.axis_totals[j]);
        }
        let _ = writeln!(s, "first-hit exact   {:.2}%", 100.0 * self.exact_match_rate);
        let _ = writeln!(s, "median extract    {:.6} s", self.median_extract_secs);
        let _ = writeln!(s, "median query      {:.6} s", self.median_query_secs);
        if let Some(eta) = eta {
            let _ = writeln!(s, "eta               {eta:.8}");
        }
        s
    }
}

/// Grid of descriptors to sweep.
#[derive(Debug, Clone)]
pub struct BenchGrid {
    pub scales: Vec<usize>,
    pub orientations: Vec<usize>,
    /// `(s, t)` window sizes.
    pub windows: Vec<(usize, usize)>,
    /// Shared bank parameters (u, v, s, t are overwritten per cell).
    pub base: GaborDescriptor,
    /// Optional Radon rows: angle counts with `radon_bins` bins each.
    pub radon_angles: Vec<usize>,
    pub radon_bins: usize,
}

impl BenchGrid {
    pub fn new(scales: Vec<usize>, orientations: Vec<usize>, windows: Vec<(usize, usize)>) -> Self {
        let base = match Descriptor::gabor(1, 1, 1, 1) {
            Descriptor::Gabor(g) => g,
            Descriptor::Radon(_) => unreachable!(),
        };
        Self {
            scales,
            orientations,
            windows,
            base,
            radon_angles: Vec::new(),
            radon_bins: RadonConfig::DEFAULT_BINS,
        }
    }

    /// Cells in u-major, then v, then window order; Radon rows last.
    pub fn cells(&self) -> Vec<Descriptor> {
        let mut out = Vec::new();
        for &u in &self.scales {
            for &v in &self.orientations {
                for &(s, t) in &self.windows {
                    let mut g = self.base;
                    g.bank = GaborBankConfig {
                        scales: u,
                        orientations: v,
                        rows: s,
                        cols: t,
                        ..self.base.bank
                    };
                    out.push(Descriptor::Gabor(g));
                }
            }
        }
        for &n in &self.radon_angles {
            out.push(Descriptor::Radon(RadonDescriptor {
                radon: RadonConfig::new(n, self.radon_bins),
                side: self.base.side,
            }));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub config_tag: String,
    pub outcome: std::result::Result<BenchCell, String>,
}

#[derive(Debug, Clone)]
pub struct BenchCell {
    pub record: EvalRecord,
    pub exact_match_rate: f64,
    pub median_extract_secs: f64,
}

/// Encode + evaluate every grid cell. Failing cells are recorded and the sweep continues.
pub fn bench(
    grid: &BenchGrid,
    train: &[LabeledImage],
    test: &[LabeledImage],
    table: &BranchTable,
    table_source: &TableSource,
) -> Result<Vec<BenchRow>> {
    let cells = grid.cells();
    if cells.is_empty() {
        return Err(Error::Usage("empty parameter grid".into()));
    }
    let mut rows: Vec<BenchRow> = cells
        .iter()
        .map(|descriptor| {
            let tag = descriptor.tag();
            let run = || -> Result<BenchCell> {
                let encoder = descriptor.encoder()?;
                let (entries, times) = encode_entries(&encoder, train)?;
                let index = BarcodeIndex::from_parts(tag.clone(), descriptor.code_len(), entries)?;
                let report = evaluate(&index, &encoder, test, table, table_source.clone())?;
                let mut all_times = times;
                all_times.extend(report.outcomes.iter().map(|o| o.extract_secs));
                Ok(BenchCell {
                    record: report.record(),
                    exact_match_rate: report.exact_match_rate,
                    median_extract_secs: median_of(&all_times),
                })
            };
            let outcome = run().map_err(|e| {
                warn!("cell {tag} failed: {e}");
                e.to_string()
            });
            BenchRow {
                config_tag: tag,
                outcome,
            }
        })
        .collect();

    let mut records: Vec<EvalRecord> = rows
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok().map(|c| c.record.clone()))
        .collect();
    if !records.is_empty() && records.iter().all(|r| r.e_total > 0.0) {
        assign_suitability(&mut records, None, None)?;
        let mut it = records.into_iter();
        for row in rows.iter_mut() {
            if let Ok(cell) = &mut row.outcome {
                cell.record = it.next().expect("one record per successful row");
            }
        }
    }
    Ok(rows)
}

/// Successful rows ranked by ascending E_total and by descending η.
pub fn rankings(rows: &[BenchRow]) -> (Vec<&BenchCell>, Vec<&BenchCell>) {
    let ok: Vec<&BenchCell> = rows.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
    let mut by_error = ok.clone();
    by_error.sort_by(|a, b| a.record.e_total.total_cmp(&b.record.e_total));
    let mut by_eta = ok;
    by_eta.sort_by(|a, b| b.record.eta_suitability.total_cmp(&a.record.eta_suitability));
    (by_error, by_eta)
}

/// Two-ranking comparison table in the shape of a method comparison report.
pub fn format_rankings(rows: &[BenchRow]) -> String {
    let (by_error, by_eta) = rankings(rows);
    let mut s = String::new();
    if by_eta.iter().any(|c| c.record.eta_suitability.is_nan()) {
        let _ = writeln!(s, "{:>4}  {:<34}{:>12}{:>8}", "rank", "barcode", "E_total", "L_code");
        for (i, a) in by_error.iter().enumerate() {
            let _ = writeln!(
                s,
                "{:>4}  {:<34}{:>12.4}{:>8}",
                i + 1,
                a.record.method_name,
                a.record.e_total,
                a.record.l_code
            );
        }
        let _ = writeln!(s, "eta undefined: at least one E_total is zero");
        push_failures(&mut s, rows);
        return s;
    }
    let _ = writeln!(
        s,
        "{:>4}  {:<34}{:>12}{:>8}  | {:>4}  {:<34}{:>12}{:>8}{:>14}",
        "rank", "barcode", "E_total", "L_code", "rank", "barcode", "E_total", "L_code", "eta"
    );
    for (i, (a, b)) in by_error.iter().zip(&by_eta).enumerate() {
        let _ = writeln!(
            s,
            "{:>4}  {:<34}{:>12.4}{:>8}  | {:>4}  {:<34}{:>12.4}{:>8}{:>14.8}",
            i + 1,
            a.record.method_name,
            a.record.e_total,
            a.record.l_code,
            i + 1,
            b.record.method_name,
            b.record.e_total,
            b.record.l_code,
            b.record.eta_suitability
        );
    }
    push_failures(&mut s, rows);
    s
}

fn push_failures(s: &mut String, rows: &[BenchRow]) {
    for row in rows {
        if let Err(e) = &row.outcome {
            let _ = writeln!(s, "FAILED {}: {e}", row.config_tag);
        }
    }
}

/// One CSV line per grid cell, in grid order.
pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from("barcode,status,e_total,l_code,eta,exact_match_rate,median_extract_secs\n");
    for row in rows {
        match &row.outcome {
            Ok(c) => {
                let _ = writeln!(
                    s,
                    "\"{}\",ok,{:.6},{},{:.8},{:.6},{:.6}",
                    row.config_tag,
                    c.record.e_total,
                    c.record.l_code,
                    c.record.eta_suitability,
                    c.exact_match_rate,
                    c.median_extract_secs
                );
            }
            Err(e) => {
                let _ = writeln!(s, "\"{}\",\"error: {}\",,,,,", row.config_tag, e.replace('"', "'"));
            }
        }
    }
    s
}

/// η table for externally supplied `(method, E_total, L_code)` rows.
pub fn replay(records: &mut [EvalRecord], e_max: Option<f64>, l_max: Option<usize>) -> Result<String> {
    assign_suitability(records, e_max, l_max)?;
    let mut s = String::from("method,e_total,l_code,eta\n");
    for r in records.iter() {
        let _ = writeln!(s, "\"{}\",{},{},{:.9}", r.method_name, r.e_total, r.l_code, r.eta_suitability);
    }
    Ok(s)
}
