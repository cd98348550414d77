//! Report generation and the file formats behind the command-line surface:
//! front files, distribution grids, timing tables, run records, experiment
//! summaries and runtime ECDF curves.
//!
//! CSV dialect: comma separated, `.` decimal, LF line endings, one header
//! row, floats at 17 significant digits so every value round-trips exactly.
//! Metadata rides in `#`-prefixed comment lines above the header.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::bo::{self, AcquisitionKind, BoError, ExperimentConfig, IterationRow, RunRecord};
use crate::dist::{BiGaussian, HviDistribution};
use crate::gauss::QuadratureConfig;
use crate::mc::{self, McConfig, TimingRow};
use crate::pareto::{ParetoFront2D, Point2};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("front file line {line}: {message}")]
    FrontParse { line: usize, message: String },
    #[error("front file contains no points")]
    EmptyFront,
    #[error("run record line {line}: {message}")]
    RunParse { line: usize, message: String },
    #[error("experiment config: {0}")]
    ConfigParse(String),
    #[error("run records come from different problems: {0} vs {1}")]
    MismatchedProblems(String, String),
    #[error("no run records given")]
    NoRecords,
    #[error("pooled hypervolume range is degenerate (all values equal)")]
    DegenerateRange,
    #[error("all repetitions aborted; first failure: {0}")]
    AllRunsFailed(String),
    #[error(transparent)]
    Bo(#[from] BoError),
}

/// Floating-point formatting used in every CSV: 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

// ---------------------------------------------------------------------------
// Front files
// ---------------------------------------------------------------------------

/// One `y1,y2` pair per line below a `# ref: r1,r2` header.
pub fn write_front_file(front: &ParetoFront2D) -> String {
    let mut out = String::new();
    let r = front.ref_point();
    let _ = writeln!(out, "# ref: {},{}", format_float(r.y1), format_float(r.y2));
    for p in front.points() {
        let _ = writeln!(out, "{},{}", format_float(p.y1), format_float(p.y2));
    }
    out
}

pub fn parse_front_file(text: &str) -> Result<ParetoFront2D, ReportError> {
    let mut reference: Option<Point2> = None;
    let mut points = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(spec) = rest.strip_prefix("ref:") {
                let (a, b) = parse_pair(spec)
                    .map_err(|message| ReportError::FrontParse { line, message })?;
                reference = Some(Point2::new(a, b));
            }
            continue;
        }
        let (a, b) =
            parse_pair(trimmed).map_err(|message| ReportError::FrontParse { line, message })?;
        points.push(Point2::new(a, b));
    }
    let reference = reference.ok_or(ReportError::FrontParse {
        line: 0,
        message: "missing `# ref: r1,r2` header".into(),
    })?;
    if points.is_empty() {
        return Err(ReportError::EmptyFront);
    }
    ParetoFront2D::new(points, reference).map_err(|e| ReportError::FrontParse {
        line: 0,
        message: e.to_string(),
    })
}

fn parse_pair(text: &str) -> Result<(f64, f64), String> {
    let mut parts = text.split(',');
    let a = parts
        .next()
        .ok_or("expected two comma-separated values")?
        .trim()
        .parse::<f64>()
        .map_err(|e| format!("bad first value: {e}"))?;
    let b = parts
        .next()
        .ok_or("expected two comma-separated values")?
        .trim()
        .parse::<f64>()
        .map_err(|e| format!("bad second value: {e}"))?;
    if parts.next().is_some() {
        return Err("expected exactly two comma-separated values".into());
    }
    Ok((a, b))
}

// ---------------------------------------------------------------------------
// Distribution grids
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistGridRow {
    pub delta: f64,
    pub pdf: f64,
    pub cdf: f64,
    pub mc_cdf: Option<f64>,
}

/// Evaluates the marginal density and distribution over an even grid; the
/// grid defaults to the distribution support. `mc` appends an empirical CDF
/// column from that many samples.
pub fn dist_grid(
    front: &ParetoFront2D,
    pred: &BiGaussian,
    quad: &QuadratureConfig,
    n_points: usize,
    range: Option<(f64, f64)>,
    mc_samples: Option<&McConfig>,
) -> Result<Vec<DistGridRow>, ReportError> {
    let dist = HviDistribution::build(front, pred, quad)
        .map_err(|e| ReportError::ConfigParse(e.to_string()))?;
    let (lo, hi) = range.unwrap_or_else(|| dist.support());
    let emp = mc_samples.map(|cfg| {
        mc::EmpiricalDistribution::new(mc::sample_hvi(front, pred, cfg)).expect("n_samples >= 1")
    });
    let n = n_points.max(2);
    let rows = (0..n)
        .map(|k| {
            let delta = lo + (hi - lo) * k as f64 / (n - 1) as f64;
            DistGridRow {
                delta,
                pdf: dist.marginal_pdf(delta),
                cdf: dist.marginal_cdf(delta),
                mc_cdf: emp.as_ref().map(|e| e.cdf(delta)),
            }
        })
        .collect();
    Ok(rows)
}

pub fn write_dist_grid(rows: &[DistGridRow]) -> String {
    let mut out = String::new();
    let with_mc = rows.iter().any(|r| r.mc_cdf.is_some());
    out.push_str(if with_mc {
        "delta,pdf,cdf,mc_cdf\n"
    } else {
        "delta,pdf,cdf\n"
    });
    for row in rows {
        let _ = write!(
            out,
            "{},{},{}",
            format_float(row.delta),
            format_float(row.pdf),
            format_float(row.cdf)
        );
        if with_mc {
            let _ = write!(out, ",{}", format_float(row.mc_cdf.unwrap_or(f64::NAN)));
        }
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// Timing tables
// ---------------------------------------------------------------------------

pub fn write_bench(rows: &[TimingRow]) -> String {
    let mut out = String::from("n,t_exact_s,t_mc_s\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{}",
            row.n,
            format_float(row.t_exact_s),
            format_float(row.t_mc_s)
        );
    }
    out
}

// ---------------------------------------------------------------------------
// Run records
// ---------------------------------------------------------------------------

/// Header comments carry the metadata the row data cannot: problem name,
/// acquisition, repetition index and reference point.
pub fn write_run_record(rec: &RunRecord) -> String {
    let mut out = String::new();
    let r = rec.final_front.ref_point();
    let _ = writeln!(out, "# problem: {}", rec.problem);
    let _ = writeln!(out, "# acquisition: {}", rec.acquisition.name());
    let _ = writeln!(out, "# rep: {}", rec.rep);
    let _ = writeln!(
        out,
        "# reference: {},{}",
        format_float(r.y1),
        format_float(r.y2)
    );
    let d = rec.rows.first().map_or(0, |row| row.x.len());
    out.push('t');
    for k in 1..=d {
        let _ = write!(out, ",x{k}");
    }
    out.push_str(",f1,f2,hv_best\n");
    for row in &rec.rows {
        let _ = write!(out, "{}", row.t);
        for v in &row.x {
            let _ = write!(out, ",{}", format_float(*v));
        }
        let _ = writeln!(
            out,
            ",{},{},{}",
            format_float(row.y[0]),
            format_float(row.y[1]),
            format_float(row.hv_best)
        );
    }
    out
}

pub fn parse_run_record(text: &str) -> Result<RunRecord, ReportError> {
    let mut problem = None;
    let mut acquisition = None;
    let mut rep = 0u64;
    let mut reference = None;
    let mut header_seen = false;
    let mut d = 0usize;
    let mut rows: Vec<IterationRow> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |message: String| ReportError::RunParse { line, message };
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(v) = rest.strip_prefix("problem:") {
                problem = Some(v.trim().to_string());
            } else if let Some(v) = rest.strip_prefix("acquisition:") {
                acquisition = Some(
                    AcquisitionKind::by_name(v.trim())
                        .ok_or_else(|| err(format!("unknown acquisition `{}`", v.trim())))?,
                );
            } else if let Some(v) = rest.strip_prefix("rep:") {
                rep = v.trim().parse().map_err(|e| err(format!("bad rep: {e}")))?;
            } else if let Some(v) = rest.strip_prefix("reference:") {
                let (a, b) = parse_pair(v).map_err(err)?;
                reference = Some(Point2::new(a, b));
            }
            continue;
        }
        if !header_seen {
            let cols: Vec<&str> = trimmed.split(',').collect();
            if cols.len() < 4 || cols[0] != "t" {
                return Err(err("expected header `t,x1..xd,f1,f2,hv_best`".into()));
            }
            d = cols.len() - 4;
            header_seen = true;
            continue;
        }
        let cols: Vec<&str> = trimmed.split(',').collect();
        if cols.len() != d + 4 {
            return Err(err(format!(
                "expected {} columns, found {}",
                d + 4,
                cols.len()
            )));
        }
        let t: usize = cols[0].parse().map_err(|e| err(format!("bad t: {e}")))?;
        let mut x = Vec::with_capacity(d);
        for c in &cols[1..=d] {
            x.push(
                c.parse::<f64>()
                    .map_err(|e| err(format!("bad coordinate: {e}")))?,
            );
        }
        let f1: f64 = cols[d + 1]
            .parse()
            .map_err(|e| err(format!("bad f1: {e}")))?;
        let f2: f64 = cols[d + 2]
            .parse()
            .map_err(|e| err(format!("bad f2: {e}")))?;
        let hv: f64 = cols[d + 3]
            .parse()
            .map_err(|e| err(format!("bad hv_best: {e}")))?;
        rows.push(IterationRow {
            t,
            x,
            y: [f1, f2],
            hv_best: hv,
        });
    }

    let reference = reference.ok_or(ReportError::RunParse {
        line: 0,
        message: "missing `# reference:` header".into(),
    })?;
    let points: Vec<Point2> = rows.iter().map(|r| Point2::new(r.y[0], r.y[1])).collect();
    let final_front = ParetoFront2D::from_observations(&points, reference).map_err(|e| {
        ReportError::RunParse {
            line: 0,
            message: e.to_string(),
        }
    })?;
    Ok(RunRecord {
        problem: problem.ok_or(ReportError::RunParse {
            line: 0,
            message: "missing `# problem:` header".into(),
        })?,
        acquisition: acquisition.unwrap_or(AcquisitionKind::EpsPohvi),
        rep,
        rows,
        final_front,
    })
}

// ---------------------------------------------------------------------------
// Experiment summaries
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow {
    pub t: usize,
    pub hv_mean: f64,
    /// Half-width of the 95% normal-approximation confidence interval.
    pub ci95_half: f64,
}

pub fn summarize(records: &[RunRecord]) -> Result<Vec<SummaryRow>, ReportError> {
    if records.is_empty() {
        return Err(ReportError::NoRecords);
    }
    let len = records.iter().map(|r| r.rows.len()).min().unwrap_or(0);
    let n = records.len() as f64;
    let mut out = Vec::with_capacity(len);
    for t in 0..len {
        let values: Vec<f64> = records.iter().map(|r| r.rows[t].hv_best).collect();
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        out.push(SummaryRow {
            t,
            hv_mean: mean,
            ci95_half: 1.96 * (var / n).sqrt(),
        });
    }
    Ok(out)
}

pub fn write_summary(rows: &[SummaryRow]) -> String {
    let mut out = String::from("t,hv_mean,ci95_half\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{}",
            row.t,
            format_float(row.hv_mean),
            format_float(row.ci95_half)
        );
    }
    out
}

// ---------------------------------------------------------------------------
// Runtime ECDF
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct EcdfReport {
    /// Hypervolume targets, strictly increasing.
    pub targets: Vec<f64>,
    /// Shift applied before log spacing when the pooled minimum is not
    /// positive.
    pub shift: Option<f64>,
    /// `(t, ecdf(t))` for every integer iteration.
    pub curve: Vec<(usize, f64)>,
}

/// Aggregated ECDF of the iterations needed to reach each of `n_targets`
/// log-evenly spaced hypervolume targets, pooled over all given runs.
pub fn ecdf_report(records: &[RunRecord], n_targets: usize) -> Result<EcdfReport, ReportError> {
    if records.is_empty() {
        return Err(ReportError::NoRecords);
    }
    let problem = &records[0].problem;
    for r in records {
        if &r.problem != problem {
            return Err(ReportError::MismatchedProblems(
                problem.clone(),
                r.problem.clone(),
            ));
        }
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for r in records {
        for row in &r.rows {
            lo = lo.min(row.hv_best);
            hi = hi.max(row.hv_best);
        }
    }
    if hi <= lo || !hi.is_finite() || !lo.is_finite() {
        return Err(ReportError::DegenerateRange);
    }
    let shift = if lo <= 0.0 { Some(1.0 - lo) } else { None };
    let s = shift.unwrap_or(0.0);
    let (log_lo, log_hi) = ((lo + s).ln(), (hi + s).ln());
    let targets: Vec<f64> = (0..n_targets)
        .map(|k| {
            // Endpoints stay exactly at the measured extremes; only the
            // interior targets go through the log map.
            if k == 0 {
                lo
            } else if k == n_targets - 1 {
                hi
            } else {
                let w = k as f64 / (n_targets - 1) as f64;
                (log_lo + w * (log_hi - log_lo)).exp() - s
            }
        })
        .collect();

    // Hitting time of each (target, run) pair: the first row index at the
    // target's level or above.
    let mut hits: Vec<Option<usize>> = Vec::with_capacity(records.len() * n_targets);
    for r in records {
        for &v in &targets {
            hits.push(r.rows.iter().position(|row| row.hv_best >= v));
        }
    }
    let max_t = records.iter().map(|r| r.rows.len()).max().unwrap_or(0);
    let denom = (records.len() * n_targets) as f64;
    let curve: Vec<(usize, f64)> = (0..max_t)
        .map(|t| {
            let count = hits
                .iter()
                .filter(|h| matches!(h, Some(ht) if *ht <= t))
                .count();
            (t, count as f64 / denom)
        })
        .collect();
    Ok(EcdfReport {
        targets,
        shift,
        curve,
    })
}

pub fn write_ecdf(report: &EcdfReport) -> String {
    let mut out = String::new();
    let targets: Vec<String> = report.targets.iter().map(|v| format_float(*v)).collect();
    let _ = writeln!(out, "# targets: {}", targets.join(","));
    if let Some(s) = report.shift {
        let _ = writeln!(out, "# shift: {}", format_float(s));
    }
    out.push_str("t,ecdf\n");
    for (t, v) in &report.curve {
        let _ = writeln!(out, "{},{}", t, format_float(*v));
    }
    out
}

// ---------------------------------------------------------------------------
// Experiment orchestration
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct OptimizeOutput {
    pub records: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
    pub run_files: Vec<PathBuf>,
    pub summary_file: PathBuf,
    /// Repetition indices that aborted, with their diagnostics.
    pub failures: Vec<(u64, String)>,
}

/// Runs every repetition of the experiment, writes one CSV per completed run
/// plus a summary CSV, and reports aborted repetitions.
pub fn optimize_experiment(
    cfg: &ExperimentConfig,
    out_dir: &Path,
) -> Result<OptimizeOutput, ReportError> {
    std::fs::create_dir_all(out_dir)?;
    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut run_files = Vec::new();
    for rep in 0..cfg.repetitions as u64 {
        match bo::run_indexed(cfg, rep) {
            Ok(record) => {
                let path = out_dir.join(format!("run_{rep:02}.csv"));
                std::fs::write(&path, write_run_record(&record))?;
                run_files.push(path);
                records.push(record);
            }
            Err(e) => failures.push((rep, e.to_string())),
        }
    }
    if records.is_empty() {
        let first = failures
            .first()
            .map(|(_, e)| e.clone())
            .unwrap_or_else(|| "no repetitions requested".into());
        return Err(ReportError::AllRunsFailed(first));
    }
    let summary = summarize(&records)?;
    let summary_file = out_dir.join("summary.csv");
    std::fs::write(&summary_file, write_summary(&summary))?;
    Ok(OptimizeOutput {
        records,
        summary,
        run_files,
        summary_file,
        failures,
    })
}

/// Parses the TOML experiment configuration.
pub fn parse_experiment_config(text: &str) -> Result<ExperimentConfig, ReportError> {
    toml::from_str(text).map_err(|e| ReportError::ConfigParse(e.to_string()))
}
