use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde_json::json;

use super::{FigurePoint, Row};
use crate::engine::{conjecture_formula, AngleBound, AngleSource, DimensionReport, EngineError, PillarBreakdown};
use crate::rational::Angle;
use crate::two_distance::SdpCache;
use crate::verify::VerifyReport;

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

fn angle_list(angles: &[Angle]) -> String {
    angles.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

/// The one-line answer: `value (K=k)` for a pillar bound, otherwise the
/// source and its detail.
pub(super) fn summary(b: &AngleBound) -> String {
    match (b.source, b.winning_k) {
        (AngleSource::Pillar, Some(k)) => format!("{} (K={k})", b.value),
        _ => format!("{} ({}; {})", b.value, b.source, b.detail),
    }
}

fn breakdown_text(out: &mut String, bd: &PillarBreakdown) {
    let _ = writeln!(out, "  K={}: total {} (pillar sum {})", bd.k, opt(bd.total.as_ref()), opt(bd.pillar_total.as_ref()));
    for row in &bd.rows {
        let _ = writeln!(
            out,
            "    n={:<2} count {:<6} bound {:<8} [{}] {}",
            row.n,
            row.count,
            opt(row.bound.value.as_ref()),
            row.bound.provenance,
            row.bound.detail
        );
    }
    for rf in &bd.refinements {
        let _ = writeln!(out, "    refined {}: {} ({})", rf.label, rf.value, rf.detail);
    }
}

fn angle_text(out: &mut String, b: &AngleBound) {
    let _ = writeln!(out, "angle {}", b.angle);
    for c in &b.candidates {
        let _ = writeln!(out, "  candidate {:<20} {:<8} {}", c.source.tag(), opt(c.value.as_ref()), c.detail);
    }
    for bd in &b.breakdowns {
        breakdown_text(out, bd);
    }
    let weak = b.non_sdp_queries();
    if !weak.is_empty() {
        let qs = weak.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
        let _ = writeln!(out, "  note: may be weaker than published; answered without SDP values: {qs}");
    }
    let _ = writeln!(out, "  bound {}", summary(b));
}

pub(super) fn bound_text(rep: &DimensionReport, single: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "r = {}", rep.r);
    let _ = writeln!(out, "gerzon {}", rep.gerzon);
    if !single {
        let _ = writeln!(out, "baseline 2r+3 = {}", rep.baseline);
    }
    for b in &rep.per_angle {
        angle_text(&mut out, b);
    }
    if rep.overall > rep.gerzon {
        let _ = writeln!(out, "note: exceeds the gerzon bound {}", rep.gerzon);
    }
    if single {
        out.push_str(&summary(&rep.per_angle[0]));
    } else if rep.arg_angles.is_empty() {
        let _ = write!(out, "{} @ 2r+3", rep.overall);
    } else {
        let _ = write!(out, "{} @ {}", rep.overall, angle_list(&rep.arg_angles));
    }
    out.push('\n');
    out
}

pub(super) fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn writer(delim: u8) -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().delimiter(delim).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8")
}

pub(super) fn bound_csv(rep: &DimensionReport, tab: bool) -> String {
    let mut w = writer(if tab { b'\t' } else { b',' });
    w.write_record(["r", "angle", "value", "source", "k", "detail"]).expect("write");
    for b in &rep.per_angle {
        w.write_record([
            rep.r.to_string(),
            b.angle.to_string(),
            b.value.to_string(),
            b.source.tag().to_string(),
            b.winning_k.map_or(String::new(), |k| k.to_string()),
            b.detail.clone(),
        ])
        .expect("write");
    }
    finish(w)
}

/// Angle columns shared by every row of a sweep.
fn columns(rows: &[Row]) -> Vec<Angle> {
    let set: BTreeSet<Angle> =
        rows.iter().filter_map(|(_, r)| r.as_ref().ok()).flat_map(|rep| rep.per_angle.iter().map(|b| b.angle)).collect();
    let mut v: Vec<Angle> = set.into_iter().collect();
    v.sort_by_key(|a| a.denom());
    v
}

fn overall_source(rep: &DimensionReport) -> String {
    match rep.arg_angles.first().and_then(|a| rep.angle(*a)) {
        Some(b) => b.source.tag().to_string(),
        None => "BASELINE".to_string(),
    }
}

pub(super) fn table_csv(rows: &[Row], delim: u8) -> String {
    let cols = columns(rows);
    let mut header = vec!["r".to_string(), "overall".into(), "overall_src".into(), "angles".into()];
    for a in &cols {
        header.push(format!("a{}", a.denom()));
        header.push(format!("a{}_src", a.denom()));
    }
    header.extend(["conjecture", "conjecture_angle", "gerzon", "status"].map(String::from));
    let mut w = writer(delim);
    w.write_record(&header).expect("write");
    for (r, res) in rows {
        let conj = conjecture_formula(*r).ok();
        let mut rec = vec![r.to_string()];
        match res {
            Ok(rep) => {
                rec.push(rep.overall.to_string());
                rec.push(overall_source(rep));
                rec.push(angle_list(&rep.arg_angles));
                for a in &cols {
                    match rep.angle(*a) {
                        Some(b) => {
                            rec.push(b.value.to_string());
                            rec.push(b.source.tag().to_string());
                        }
                        None => rec.extend([String::new(), String::new()]),
                    }
                }
            }
            Err(_) => rec.extend(std::iter::repeat_n(String::new(), 3 + 2 * cols.len())),
        }
        rec.push(conj.as_ref().map_or(String::new(), |c| c.value.to_string()));
        rec.push(conj.as_ref().map_or(String::new(), |c| c.angle.to_string()));
        rec.push(crate::engine::gerzon(*r).to_string());
        rec.push(status(res).to_string());
        w.write_record(&rec).expect("write");
    }
    finish(w)
}

fn status(res: &Result<DimensionReport, EngineError>) -> &'static str {
    match res {
        Ok(rep) if rep.is_weaker() => "weaker",
        Ok(_) => "ok",
        Err(_) => "missing",
    }
}

fn cell(res: &Result<DimensionReport, EngineError>) -> (String, String, String) {
    match res {
        Ok(rep) if rep.arg_angles.is_empty() => (rep.overall.to_string(), "2r+3".into(), overall_source(rep)),
        Ok(rep) => (rep.overall.to_string(), angle_list(&rep.arg_angles), overall_source(rep)),
        Err(_) => ("?".into(), "?".into(), "MISSING".into()),
    }
}

/// Runs of consecutive dimensions with the same bound, angle and source, in
/// the published table layout: rows `r`, `bound`, `angle`, plus a `source`
/// row, eight runs per block.
pub(super) fn table_markdown(rows: &[Row]) -> String {
    let mut runs: Vec<(u64, u64, (String, String, String))> = Vec::new();
    for (r, res) in rows {
        let c = cell(res);
        match runs.last_mut() {
            Some(last) if last.1 + 1 == *r && last.2 == c => last.1 = *r,
            _ => runs.push((*r, *r, c)),
        }
    }
    let mut out = String::new();
    for (i, chunk) in runs.chunks(8).enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let label = |(a, b): (u64, u64)| if a == b { a.to_string() } else { format!("{a}-{b}") };
        let line = |name: &str, cells: Vec<String>| format!("| {name} | {} |\n", cells.join(" | "));
        out += &line("r", chunk.iter().map(|c| label((c.0, c.1))).collect());
        out += &line("---", chunk.iter().map(|_| "---".to_string()).collect());
        out += &line("bound", chunk.iter().map(|c| c.2 .0.clone()).collect());
        out += &line("angle", chunk.iter().map(|c| c.2 .1.clone()).collect());
        out += &line("source", chunk.iter().map(|c| c.2 .2.clone()).collect());
    }
    out
}

pub(super) fn table_text(rows: &[Row]) -> String {
    let mut out = format!(
        "{:>6} {:>10} {:<12} {:<20} {:>10} {:>10} {:<8}\n",
        "r", "bound", "angles", "source", "conjecture", "gerzon", "status"
    );
    for (r, res) in rows {
        let (v, a, src) = cell(res);
        let conj = conjecture_formula(*r).ok().map_or("-".to_string(), |c| c.value.to_string());
        let status = status(res);
        let _ = writeln!(out, "{r:>6} {v:>10} {a:<12} {src:<20} {conj:>10} {:>10} {status:<8}", crate::engine::gerzon(*r));
    }
    out
}

pub(super) fn table_json(rows: &[Row]) -> String {
    let items: Vec<serde_json::Value> = rows
        .iter()
        .map(|(r, res)| match res {
            Ok(rep) => serde_json::to_value(rep).expect("serializable"),
            Err(e) => {
                let missing: Vec<String> = match e {
                    EngineError::MissingData(qs) => qs.iter().map(ToString::to_string).collect(),
                    _ => Vec::new(),
                };
                json!({ "r": r, "error": e.to_string(), "missing": missing })
            }
        })
        .collect();
    json(&items)
}

pub(super) fn figure_delimited(angle: Angle, points: &[FigurePoint], delim: char) -> String {
    let mut out = format!("# angle {angle}\n");
    let header = ["r", "gerzon", "method", "method_src", "sdp", "sdp_src"];
    out += &header.join(&delim.to_string());
    out.push('\n');
    for p in points {
        let (m, msrc) = p.method.clone().map_or(("NA".to_string(), "NA".to_string()), |(v, s)| (v.to_string(), s));
        let (s, ssrc) = match &p.sdp.value {
            Some(v) => (v.to_string(), p.sdp.provenance.tag().to_string()),
            None => ("NA".to_string(), "NA".to_string()),
        };
        let fields = [p.r.to_string(), p.gerzon.to_string(), m, msrc, s, ssrc];
        out += &fields.join(&delim.to_string());
        out.push('\n');
    }
    out
}

pub(super) fn figure_json(angle: Angle, points: &[FigurePoint]) -> String {
    let items: Vec<serde_json::Value> = points
        .iter()
        .map(|p| {
            json!({
                "r": p.r,
                "gerzon": p.gerzon.to_string(),
                "method": p.method.as_ref().map(|(v, _)| v.to_string()),
                "method_src": p.method.as_ref().map(|(_, s)| s.clone()),
                "sdp": p.sdp.value.as_ref().map(ToString::to_string),
                "sdp_src": p.sdp.value.as_ref().map(|_| p.sdp.provenance.tag()),
            })
        })
        .collect();
    json(&json!({ "angle": angle.to_string(), "points": items }))
}

pub(super) fn verify_text(rep: &VerifyReport) -> String {
    let mut out = String::new();
    for c in &rep.checks {
        let _ = write!(
            out,
            "{} {:<26} {:>6} {:.3e} {:.1e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.cases,
            c.max_residual,
            c.tolerance
        );
        if !c.note.is_empty() {
            let _ = write!(out, "  {}", c.note);
        }
        out.push('\n');
    }
    out
}

pub(super) fn cache_csv(cache: &SdpCache) -> String {
    let mut w = writer(b',');
    w.write_record(["r", "beta", "gamma", "bound", "source"]).expect("write");
    for (q, e) in cache.iter() {
        w.write_record([q.r().to_string(), q.beta().to_string(), q.gamma().to_string(), e.bound.to_string(), e.source.clone()])
            .expect("write");
    }
    finish(w)
}

pub(super) fn cache_json(cache: &SdpCache) -> String {
    let items: Vec<serde_json::Value> = cache
        .iter()
        .map(|(q, e)| {
            json!({
                "r": q.r(),
                "beta": q.beta().to_string(),
                "gamma": q.gamma().to_string(),
                "bound": e.bound.to_string(),
                "source": e.source,
            })
        })
        .collect();
    json(&items)
}
