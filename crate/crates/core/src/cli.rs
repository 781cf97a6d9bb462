//! Command-line front end: `encode`, `index`, `query`, `evaluate`, `bench`.
//!
//! Exit codes are 0 on success, 1 for usage errors, 2 for I/O failures and
//! 3 for data or format errors.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use crate::barcode::{DownsampleMode, DownsampleSpec};
use crate::descriptor::{Descriptor, GaborDescriptor, RadonDescriptor};
use crate::error::{Error, Result};
use crate::gabor::GaborBankConfig;
use crate::imaging::{load_image, DEFAULT_SIDE};
use crate::index::BarcodeIndex;
use crate::irma::{BranchTable, EvalRecord};
use crate::manifest::read_manifest;
use crate::pipeline::{self, BenchGrid, LabeledImage, TableSource};
use crate::radon::RadonConfig;

#[derive(Debug, Parser)]
#[command(name = "gbc", version, about = "Gabor / Radon image barcodes and Hamming retrieval")]
pub struct Cli {
    /// Worker threads (0 = all cores). Results do not depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode one image as a barcode.
    Encode(EncodeArgs),
    /// Encode every image of a manifest into an index file.
    Index(IndexArgs),
    /// Rank indexed images by Hamming similarity to a probe image.
    Query(QueryArgs),
    /// First-hit IRMA error of a test manifest against an index.
    Evaluate(EvaluateArgs),
    /// Sweep filter-bank parameters and rank by error and suitability.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Gbc,
    Rbc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Binary,
}

/// Descriptor parameters. Unset flags take the defaults `GBC(5,8,23,23)` / `RBC(4,128)`.
#[derive(Debug, Clone, Default, Args)]
pub struct DescriptorArgs {
    /// Full descriptor tag, e.g. "GBC(5,8,23,23)" or "RBC(4,128)".
    #[arg(long)]
    pub tag: Option<String>,
    #[arg(long, value_enum)]
    pub kind: Option<Kind>,
    /// Gabor scales u.
    #[arg(short = 'u', long)]
    pub scales: Option<usize>,
    /// Gabor orientations v.
    #[arg(short = 'v', long)]
    pub orientations: Option<usize>,
    /// Window rows s (also columns unless --window-cols is given).
    #[arg(long)]
    pub window: Option<usize>,
    /// Window columns t.
    #[arg(long)]
    pub window_cols: Option<usize>,
    #[arg(long)]
    pub fmax: Option<f64>,
    /// Product sigma * f shared by all scales.
    #[arg(long)]
    pub sigma_f: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub eta_aspect: Option<f64>,
    #[arg(long)]
    pub phi: Option<f64>,
    /// Column downsample factor.
    #[arg(long)]
    pub d1: Option<usize>,
    /// Row downsample factor.
    #[arg(long)]
    pub d2: Option<usize>,
    /// Average blocks instead of decimating.
    #[arg(long)]
    pub block_mean: bool,
    /// Normalized image side.
    #[arg(long)]
    pub side: Option<usize>,
    /// Radon projection count.
    #[arg(long)]
    pub angles: Option<usize>,
    /// Samples per Radon projection.
    #[arg(long)]
    pub bins: Option<usize>,
}

impl DescriptorArgs {
    fn is_empty(&self) -> bool {
        self.tag.is_none()
            && self.kind.is_none()
            && self.scales.is_none()
            && self.orientations.is_none()
            && self.window.is_none()
            && self.window_cols.is_none()
            && self.fmax.is_none()
            && self.sigma_f.is_none()
            && self.gamma.is_none()
            && self.eta_aspect.is_none()
            && self.phi.is_none()
            && self.d1.is_none()
            && self.d2.is_none()
            && !self.block_mean
            && self.side.is_none()
            && self.angles.is_none()
            && self.bins.is_none()
    }

    pub fn descriptor(&self) -> Result<Descriptor> {
        if let Some(tag) = &self.tag {
            return tag.parse();
        }
        let side = self.side.unwrap_or(DEFAULT_SIDE);
        let kind = self.kind.unwrap_or(if self.angles.is_some() || self.bins.is_some() {
            Kind::Rbc
        } else {
            Kind::Gbc
        });
        let descriptor = match kind {
            Kind::Gbc => {
                let s = self.window.unwrap_or(23);
                let mut bank = GaborBankConfig::new(
                    self.scales.unwrap_or(5),
                    self.orientations.unwrap_or(8),
                    s,
                    self.window_cols.unwrap_or(s),
                );
                bank.f_max = self.fmax.unwrap_or(bank.f_max);
                bank.sigma_f = self.sigma_f.unwrap_or(bank.sigma_f);
                bank.gamma = self.gamma.unwrap_or(bank.gamma);
                bank.eta_aspect = self.eta_aspect.unwrap_or(bank.eta_aspect);
                bank.phi = self.phi.unwrap_or(bank.phi);
                let mut downsample = DownsampleSpec::new(self.d1.unwrap_or(4), self.d2.unwrap_or(4));
                if self.block_mean {
                    downsample.mode = DownsampleMode::BlockMean;
                }
                Descriptor::Gabor(GaborDescriptor {
                    bank,
                    downsample,
                    side,
                })
            }
            Kind::Rbc => Descriptor::Radon(RadonDescriptor {
                radon: RadonConfig::new(
                    self.angles.unwrap_or(4),
                    self.bins.unwrap_or(RadonConfig::DEFAULT_BINS),
                ),
                side,
            }),
        };
        descriptor.validate()?;
        Ok(descriptor)
    }
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    pub image: PathBuf,
    #[command(flatten)]
    pub descriptor: DescriptorArgs,
    /// Emit the `tag:0101...` text form.
    #[arg(long)]
    pub text: bool,
    /// text, or binary (packed little-endian u64 words).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    /// CSV manifest: image_id,path[,irma_code].
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Directory relative image paths resolve against (default: manifest directory).
    #[arg(long)]
    pub root: Option<PathBuf>,
    /// Leave out rows that fail to load or encode instead of aborting.
    #[arg(long)]
    pub skip_bad: bool,
    /// Add to an existing index built with the same descriptor.
    #[arg(long)]
    pub append: bool,
    #[command(flatten)]
    pub descriptor: DescriptorArgs,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    pub index: PathBuf,
    pub image: PathBuf,
    #[arg(short, long, default_value_t = 1)]
    pub k: usize,
    /// Descriptor flags, if given, must match the index.
    #[command(flatten)]
    pub descriptor: DescriptorArgs,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    pub index: Option<PathBuf>,
    /// Labelled test manifest: image_id,path,irma_code.
    pub test_manifest: Option<PathBuf>,
    #[arg(long)]
    pub root: Option<PathBuf>,
    /// Branch-table text file (4 lines of per-position counts).
    #[arg(long)]
    pub branch_table: Option<PathBuf>,
    /// Use the same branching factor at every position.
    #[arg(long, conflicts_with = "branch_table")]
    pub uniform_b: Option<u32>,
    #[arg(long)]
    pub emax: Option<f64>,
    #[arg(long)]
    pub lmax: Option<usize>,
    /// CSV of method,e_total,l_code rows: print the suitability column only.
    #[arg(long)]
    pub replay: Option<PathBuf>,
    /// Write the per-query CSV here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long)]
    pub root: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub scales: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub orientations: Vec<usize>,
    /// Square window sizes.
    #[arg(long, value_delimiter = ',')]
    pub windows: Vec<usize>,
    /// Also evaluate Radon barcodes with these projection counts.
    #[arg(long, value_delimiter = ',')]
    pub radon_angles: Vec<usize>,
    #[arg(long, default_value_t = RadonConfig::DEFAULT_BINS)]
    pub bins: usize,
    #[arg(long)]
    pub fmax: Option<f64>,
    #[arg(long)]
    pub sigma_f: Option<f64>,
    #[arg(long)]
    pub branch_table: Option<PathBuf>,
    #[arg(long, conflicts_with = "branch_table")]
    pub uniform_b: Option<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parse arguments; usage errors map to [`Error::Usage`], `--help` / `--version` to `Ok(None)`
/// after printing.
pub fn parse<I, T>(args: I) -> Result<Option<Cli>>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => Ok(Some(cli)),
        Err(e) => match e.kind() {
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                let _ = e.print();
                Ok(None)
            }
            _ => Err(Error::Usage(e.to_string())),
        },
    }
}

/// Execute a parsed command, writing primary output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| Error::Usage(format!("thread pool: {e}")))?;
    let mut buf: Vec<u8> = Vec::new();
    pool.install(|| match cli.command {
        Command::Encode(a) => cmd_encode(&a, &mut buf),
        Command::Index(a) => cmd_index(&a, &mut buf),
        Command::Query(a) => cmd_query(&a, &mut buf),
        Command::Evaluate(a) => cmd_evaluate(&a, &mut buf),
        Command::Bench(a) => cmd_bench(&a, &mut buf),
    })?;
    write_out(out, &buf)
}

fn write_out(out: &mut dyn Write, bytes: &[u8]) -> Result<()> {
    out.write_all(bytes).map_err(|e| Error::io("<stdout>", e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn cmd_encode(args: &EncodeArgs, out: &mut dyn Write) -> Result<()> {
    let descriptor = args.descriptor.descriptor()?;
    let image = load_image(&args.image)?;
    let code = descriptor.encode(&image)?;
    let format = match (args.text, args.format) {
        (true, Some(Format::Binary)) => {
            return Err(Error::Usage("--text conflicts with --format binary".into()))
        }
        (true, _) | (false, Some(Format::Text)) => Format::Text,
        (false, Some(Format::Csv)) => return Err(Error::Usage("encode supports text or binary".into())),
        (false, _) => Format::Binary,
    };
    let bytes = match format {
        Format::Text => format!("{}\n", code.to_text()).into_bytes(),
        _ => code.bits.words().iter().flat_map(|w| w.to_le_bytes()).collect(),
    };
    match &args.out {
        Some(path) => write_file(path, &bytes),
        None => write_out(out, &bytes),
    }
}

pub fn cmd_index(args: &IndexArgs, out: &mut dyn Write) -> Result<()> {
    let descriptor = args.descriptor.descriptor()?;
    let existing = if args.append && args.out.exists() {
        let index = BarcodeIndex::load(&args.out)?;
        if index.config_tag() != descriptor.tag() {
            return Err(Error::ConfigMismatch {
                index: index.config_tag().to_string(),
                probe: descriptor.tag(),
            });
        }
        Some(index)
    } else {
        None
    };
    let rows = read_manifest(&args.manifest, args.root.as_deref())?;
    let encoder = descriptor.encoder()?;
    let build = pipeline::index_rows(&encoder, &rows, args.skip_bad)?;
    let added = build.entries.len();
    let index = match existing {
        Some(index) => index.extended(build.entries)?,
        None => BarcodeIndex::from_parts(encoder.tag(), descriptor.code_len(), build.entries)?,
    };
    index.save(&args.out)?;
    for f in &build.failures {
        eprintln!("warning: skipped {}: {}", f.image_id, f.error);
    }
    let msg = format!(
        "indexed {added} images ({} skipped) with {} into {} ({} entries, {} bits); {:.1} images/s, median extraction {:.6} s\n",
        build.failures.len(),
        index.config_tag(),
        args.out.display(),
        index.len(),
        index.code_length(),
        added as f64 / build.elapsed_secs.max(1e-9),
        build.median_extract_secs,
    );
    info!("{}", msg.trim_end());
    write_out(out, msg.as_bytes())
}

pub fn cmd_query(args: &QueryArgs, out: &mut dyn Write) -> Result<()> {
    if args.k == 0 {
        return Err(Error::Usage("k must be at least 1".into()));
    }
    let index = BarcodeIndex::load(&args.index)?;
    let descriptor: Descriptor = index.config_tag().parse()?;
    if !args.descriptor.is_empty() {
        let requested = args.descriptor.descriptor()?;
        if requested != descriptor {
            return Err(Error::ConfigMismatch {
                index: index.config_tag().to_string(),
                probe: requested.tag(),
            });
        }
    }
    let probe = descriptor.encode(&load_image(&args.image)?)?;
    let hits = index.par_query(&probe, args.k)?;
    let mut s = String::new();
    if args.format == Format::Csv {
        s.push_str("rank,image_id,similarity,irma_code\n");
    }
    for (rank, hit) in hits.iter().enumerate() {
        let label = index.entries()[hit.position]
            .label
            .map(|l| l.to_string())
            .unwrap_or_default();
        match args.format {
            Format::Csv => s.push_str(&format!("{},{},{:.6},{}\n", rank + 1, hit.image_id, hit.similarity, label)),
            _ => {
                let line = format!("{}\t{}\t{:.6}\t{}", rank + 1, hit.image_id, hit.similarity, label);
                s.push_str(line.trim_end());
                s.push('\n');
            }
        }
    }
    write_out(out, s.as_bytes())
}

fn read_replay(path: &Path) -> Result<Vec<EvalRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file);
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Manifest(e.to_string()))?;
        if rec.get(0) == Some("method") {
            continue;
        }
        let bad = || Error::Manifest(format!("bad replay row {rec:?}"));
        let name = rec.get(0).ok_or_else(bad)?;
        let e_total: f64 = rec.get(1).and_then(|v| v.parse().ok()).ok_or_else(bad)?;
        let l_code: usize = rec.get(2).and_then(|v| v.parse().ok()).ok_or_else(bad)?;
        records.push(EvalRecord::new(name, e_total, l_code));
    }
    if records.is_empty() {
        return Err(Error::Manifest("replay file has no rows".into()));
    }
    Ok(records)
}

fn resolve_table(
    branch_table: Option<&Path>,
    uniform_b: Option<u32>,
    index: &BarcodeIndex,
    queries: &[LabeledImage],
) -> Result<(BranchTable, TableSource)> {
    match (branch_table, uniform_b) {
        (Some(path), _) => Ok((
            BranchTable::load(path)?,
            TableSource::File(path.display().to_string()),
        )),
        (None, Some(b)) => Ok((BranchTable::uniform(b)?, TableSource::Uniform(b))),
        (None, None) => pipeline::corpus_table(index, queries),
    }
}

fn load_labeled(manifest: &Path, root: Option<&Path>) -> Result<Vec<LabeledImage>> {
    let rows = read_manifest(manifest, root)?;
    let (images, failures) = pipeline::load_rows(&rows);
    if let Some(f) = failures.into_iter().next() {
        return Err(f.error);
    }
    Ok(images)
}

pub fn cmd_evaluate(args: &EvaluateArgs, out: &mut dyn Write) -> Result<()> {
    if let Some(replay) = &args.replay {
        let mut records = read_replay(replay)?;
        let csv = pipeline::replay(&mut records, args.emax, args.lmax)?;
        return write_out(out, csv.as_bytes());
    }
    let (Some(index_path), Some(test_path)) = (&args.index, &args.test_manifest) else {
        return Err(Error::Usage("evaluate needs INDEX and TEST_MANIFEST (or --replay)".into()));
    };
    let index = BarcodeIndex::load(index_path)?;
    let descriptor: Descriptor = index.config_tag().parse()?;
    let encoder = descriptor.encoder()?;
    let queries = load_labeled(test_path, args.root.as_deref())?;
    let (table, source) = resolve_table(args.branch_table.as_deref(), args.uniform_b, &index, &queries)?;
    let report = pipeline::evaluate(&index, &encoder, &queries, &table, source)?;

    let eta = match (args.emax, args.lmax) {
        (Some(e_max), Some(l_max)) => Some(crate::irma::eta_suitability(&report.record(), e_max, l_max)?),
        (None, None) => None,
        _ => return Err(Error::Usage("--emax and --lmax go together".into())),
    };
    if let Some(path) = &args.out {
        write_file(path, report.to_csv().as_bytes())?;
    }
    let text = match args.format {
        Format::Csv => {
            let mut s = String::from(
                "barcode,e_total,err_t,err_d,err_a,err_b,l_code,exact_match_rate,median_extract_secs,median_query_secs,eta,branch_table\n",
            );
            s.push_str(&format!(
                "\"{}\",{:.6},{:.6},{:.6},{:.6},{:.6},{},{:.6},{:.6},{:.6},{},\"{}\"\n",
                report.config_tag,
                report.e_total,
                report.axis_totals[0],
                report.axis_totals[1],
                report.axis_totals[2],
                report.axis_totals[3],
                report.code_length,
                report.exact_match_rate,
                report.median_extract_secs,
                report.median_query_secs,
                eta.map(|e| format!("{e:.8}")).unwrap_or_default(),
                report.table_source
            ));
            s
        }
        _ => report.summary(eta),
    };
    write_out(out, text.as_bytes())
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<()> {
    let gabor_cells = args.scales.len() * args.orientations.len() * args.windows.len();
    if gabor_cells == 0 && args.radon_angles.is_empty() {
        return Err(Error::Usage(
            "empty grid: give --scales, --orientations and --windows (or --radon-angles)".into(),
        ));
    }
    let mut grid = BenchGrid::new(
        args.scales.clone(),
        args.orientations.clone(),
        args.windows.iter().map(|&w| (w, w)).collect(),
    );
    if let Some(f) = args.fmax {
        grid.base.bank.f_max = f;
    }
    if let Some(sf) = args.sigma_f {
        grid.base.bank.sigma_f = sf;
    }
    grid.radon_angles = args.radon_angles.clone();
    grid.radon_bins = args.bins;

    let train = load_labeled(&args.train, args.root.as_deref())?;
    let test = load_labeled(&args.test, args.root.as_deref())?;
    let (table, source) = match (&args.branch_table, args.uniform_b) {
        (Some(path), _) => (BranchTable::load(path)?, TableSource::File(path.display().to_string())),
        (None, Some(b)) => (BranchTable::uniform(b)?, TableSource::Uniform(b)),
        (None, None) => {
            let codes: Vec<_> = train.iter().chain(&test).filter_map(|i| i.label).collect();
            if codes.is_empty() {
                return Err(Error::Unlabeled("bench needs labelled manifests".into()));
            }
            (BranchTable::from_corpus(&codes)?, TableSource::Corpus { codes: codes.len() })
        }
    };
    let rows = pipeline::bench(&grid, &train, &test, &table, &source)?;
    if let Some(path) = &args.out {
        write_file(path, pipeline::bench_csv(&rows).as_bytes())?;
    }
    let mut s = format!("branch table: {source}\n");
    s.push_str(&pipeline::format_rankings(&rows));
    write_out(out, s.as_bytes())
}
