//! Command implementations behind the binary: each returns the rendered
//! output and an exit status instead of printing, so runs can be compared
//! byte for byte.

mod config;
mod render;

pub use config::{parse_backends, DimRange, FileConfig, Format, RunConfig, DEFAULT_BACKENDS, MAX_DIMENSION};

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::engine::{
    angle_bound, bound_alpha_fifth, bound_alpha_generic, dimension_bound, fifth_closed_form, gerzon, DimensionReport,
    EngineError, Pipeline,
};
use crate::rational::{Angle, Rational};
use crate::two_distance::{cache_lookup, external_sdp, BackendKind, BoundResult, Provenance, SdpCache, TwoDistanceQuery};
use crate::verify::{run_verification, VerifyConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    MissingData,
    VerificationFailed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::MissingData => 3,
            Status::VerificationFailed => 4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Output {
    pub text: String,
    /// Diagnostics meant for standard error.
    pub notes: Vec<String>,
    pub status: Status,
}

/// One evaluated dimension of a sweep.
pub type Row = (u64, Result<DimensionReport, EngineError>);

fn evaluate(r: u64, angle: Option<Angle>, pipe: &Pipeline) -> Result<DimensionReport, EngineError> {
    match angle {
        Some(a) => angle_bound(r, a, pipe).map(|b| DimensionReport::single_angle(r, b)),
        None => dimension_bound(r, pipe),
    }
}

/// Evaluates every dimension in the range on a pool of `jobs` threads;
/// rows come back in dimension order.
pub fn sweep(cfg: &RunConfig, pipe: &Pipeline) -> Result<Vec<Row>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(pool.install(|| {
        cfg.dims
            .iter()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|r| (r, evaluate(r, cfg.angle, pipe)))
            .collect()
    }))
}

fn missing_notes(rows: &[Row]) -> (Vec<String>, Status) {
    let mut notes = Vec::new();
    for (r, res) in rows {
        if let Err(e) = res {
            notes.push(format!("r = {r}: {e}"));
        }
    }
    let status = if notes.is_empty() { Status::Ok } else { Status::MissingData };
    (notes, status)
}

fn engine_error(e: EngineError) -> Result<Output, CliError> {
    match e {
        EngineError::MissingData(_) => Ok(Output { text: String::new(), notes: vec![e.to_string()], status: Status::MissingData }),
        other => Err(CliError::Config(other.to_string())),
    }
}

/// Writes the cache back when the external solver may have added entries.
fn persist_cache(cfg: &RunConfig, pipe: &Pipeline) -> Result<(), CliError> {
    if !cfg.backends.contains(&BackendKind::External) {
        return Ok(());
    }
    if let (Some(path), Some(snapshot)) = (&cfg.cache_path, pipe.backends.cache_snapshot()) {
        snapshot.save(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

/// Full report for a single dimension.
pub fn cmd_bound(cfg: &RunConfig) -> Result<Output, CliError> {
    let pipe = cfg.pipeline()?;
    let r = cfg.dims.from;
    let report = match evaluate(r, cfg.angle, &pipe) {
        Ok(rep) => rep,
        Err(e) => return engine_error(e),
    };
    persist_cache(cfg, &pipe)?;
    let text = match cfg.format {
        Format::Json => render::json(&report),
        Format::Csv | Format::Tsv => render::bound_csv(&report, cfg.format == Format::Tsv),
        Format::Text | Format::Markdown => render::bound_text(&report, cfg.angle.is_some()),
    };
    Ok(Output { text, notes: Vec::new(), status: Status::Ok })
}

/// One row per dimension over the range.
pub fn cmd_table(cfg: &RunConfig) -> Result<Output, CliError> {
    let pipe = cfg.pipeline()?;
    let rows = sweep(cfg, &pipe)?;
    persist_cache(cfg, &pipe)?;
    let (notes, status) = missing_notes(&rows);
    let text = match cfg.format {
        Format::Json => render::table_json(&rows),
        Format::Csv => render::table_csv(&rows, b','),
        Format::Tsv => render::table_csv(&rows, b'\t'),
        Format::Markdown => render::table_markdown(&rows),
        Format::Text => render::table_text(&rows),
    };
    Ok(Output { text, notes, status })
}

/// One point of the comparison series for angle `1/5` or `1/7`.
#[derive(Debug, Clone)]
pub struct FigurePoint {
    pub r: u64,
    pub gerzon: num_bigint::BigUint,
    pub method: Option<(num_bigint::BigUint, String)>,
    pub sdp: BoundResult,
}

fn sdp_only(q: &TwoDistanceQuery, pipe: &Pipeline) -> BoundResult {
    if let Some(cache) = &pipe.backends.cache {
        let hit = cache_lookup(q, &cache.read().expect("cache lock"));
        if hit.is_some() {
            return hit;
        }
    }
    match &pipe.backends.external {
        Some(solver) => external_sdp(q, Some(solver), pipe.backends.cache.as_ref()),
        None => BoundResult::none(Provenance::SdpCache, "no SDP value"),
    }
}

fn figure_point(r: u64, angle: Angle, pipe: &Pipeline) -> Result<FigurePoint, EngineError> {
    let method = if angle.denom() == 5 {
        if r > 60 {
            Some((fifth_closed_form(r), "FIFTH_CLOSED_FORM".to_string()))
        } else {
            let b = bound_alpha_fifth(r, pipe)?;
            Some((b.value.clone(), b.source.tag().to_string()))
        }
    } else {
        match bound_alpha_generic(r, angle, pipe) {
            Ok(g) => g.pillar_max.map(|v| (v, "PILLAR".to_string())),
            Err(EngineError::MissingData(_)) => None,
            Err(e) => return Err(e),
        }
    };
    let a = angle.as_rational();
    let q = TwoDistanceQuery::new(r, a.clone(), -a)?;
    Ok(FigurePoint { r, gerzon: gerzon(r), method, sdp: sdp_only(&q, pipe) })
}

/// Gerzon, the pillar or closed-form bound, and the direct SDP bound per
/// dimension, with `NA` for missing points.
pub fn cmd_figure_data(cfg: &RunConfig) -> Result<Output, CliError> {
    let angle = cfg.angle.unwrap_or(Angle::new(5).expect("odd"));
    if !matches!(angle.denom(), 5 | 7) {
        return Err(CliError::Config(format!("figure data is defined for angles 1/5 and 1/7, got {angle}")));
    }
    let pipe = cfg.pipeline()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let points: Vec<Result<FigurePoint, EngineError>> =
        pool.install(|| cfg.dims.iter().collect::<Vec<_>>().into_par_iter().map(|r| figure_point(r, angle, &pipe)).collect());
    persist_cache(cfg, &pipe)?;
    let mut ok = Vec::with_capacity(points.len());
    for p in points {
        match p {
            Ok(p) => ok.push(p),
            Err(e) => return Err(CliError::Config(e.to_string())),
        }
    }
    let text = match cfg.format {
        Format::Json => render::figure_json(angle, &ok),
        Format::Csv => render::figure_delimited(angle, &ok, ','),
        _ => render::figure_delimited(angle, &ok, '\t'),
    };
    Ok(Output { text, notes: Vec::new(), status: Status::Ok })
}

pub fn cmd_verify(vcfg: &VerifyConfig, format: Format) -> Output {
    let report = run_verification(vcfg);
    let status = if report.all_passed() { Status::Ok } else { Status::VerificationFailed };
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&report).expect("serializable") + "\n",
        _ => render::verify_text(&report),
    };
    Output { text, notes: Vec::new(), status }
}

pub fn cmd_cache_show(cache: &SdpCache, format: Format) -> Output {
    let text = match format {
        Format::Json => render::cache_json(cache),
        Format::Csv => render::cache_csv(cache),
        _ => cache.to_text(),
    };
    Output { text, notes: Vec::new(), status: Status::Ok }
}

/// Merges `inputs` into `output` (created if absent) with the keep-minimum
/// rule.
pub fn cmd_cache_merge(inputs: &[PathBuf], output: &Path) -> Result<Output, CliError> {
    let load = |p: &Path| SdpCache::load(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())));
    let mut target = if output.exists() { load(output)? } else { SdpCache::default() };
    let mut changed = 0;
    for path in inputs {
        changed += target.merge(&load(path)?);
    }
    target.save(output).map_err(|e| CliError::Config(format!("{}: {e}", output.display())))?;
    Ok(Output {
        text: format!("{} entries in {} ({changed} added or improved)\n", target.len(), output.display()),
        notes: Vec::new(),
        status: Status::Ok,
    })
}

/// Parses `p/q` for an angle flag.
pub fn parse_angle(s: &str) -> Result<Angle, String> {
    let q: Rational = s.parse().map_err(|e| format!("{e}"))?;
    Angle::from_rational(&q).map_err(|e| format!("{e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(from: u64, to: u64) -> RunConfig {
        RunConfig::new(DimRange { from, to })
    }

    #[test]
    fn example_bound_final_line() {
        let mut c = cfg(236, 236);
        c.angle = Some(Angle::new(7).unwrap());
        let out = cmd_bound(&c).unwrap();
        assert_eq!(out.text.lines().last().unwrap(), "15673 (K=7)");
        assert_eq!(out.status, Status::Ok);
    }

    #[test]
    fn fifth_bound_names_its_source() {
        let mut c = cfg(61, 61);
        c.angle = Some(Angle::new(5).unwrap());
        let out = cmd_bound(&c).unwrap();
        let last = out.text.lines().last().unwrap();
        assert!(last.starts_with("586 "), "{last}");
        assert!(last.contains("FIFTH_TWO_DISTANCE") && last.contains("SDP_CACHE"), "{last}");
    }

    #[test]
    fn table_is_deterministic_across_job_counts() {
        let mut a = cfg(15, 40);
        a.format = Format::Csv;
        let mut b = a.clone();
        b.jobs = 4;
        assert_eq!(cmd_table(&a).unwrap().text, cmd_table(&b).unwrap().text);
    }

    #[test]
    fn figure_series_for_one_fifth() {
        let mut c = cfg(61, 132);
        c.format = Format::Tsv;
        let out = cmd_figure_data(&c).unwrap();
        let row100 = out.text.lines().find(|l| l.starts_with("100\t")).unwrap();
        let fields: Vec<&str> = row100.split('\t').collect();
        assert_eq!(fields[1], "5050");
        assert_eq!(fields[2], "1505");
        assert_eq!(fields[4], "NA");
        c.angle = Some(Angle::new(9).unwrap());
        assert!(cmd_figure_data(&c).is_err());
    }

    #[test]
    fn figure_series_for_one_seventh() {
        let mut c = cfg(236, 236);
        c.angle = Some(Angle::new(7).unwrap());
        let out = cmd_figure_data(&c).unwrap();
        let row = out.text.lines().find(|l| l.starts_with("236\t")).unwrap();
        assert_eq!(row.split('\t').nth(2), Some("15673"));
    }
}
