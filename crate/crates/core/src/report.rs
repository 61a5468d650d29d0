//! Report serialization.
//!
//! The JSON report is canonical: object keys are sorted and every float is
//! written in fixed notation with 12 significant digits, so identical runs give
//! byte-identical files. CSV is a convenience export with one row per pair plus
//! per-video and overall summary rows.

use std::io;

use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::metrics::EvaluationReport;

const SIGNIFICANT_DIGITS: i32 = 12;

/// Fixed-notation rendering with 12 significant digits, e.g. `0.800000000000`.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        // JSON has no representation for these; reports never contain them
        return "null".to_owned();
    }
    if x == 0.0 {
        return format!("{:.*}", (SIGNIFICANT_DIGITS - 1) as usize, 0.0);
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (SIGNIFICANT_DIGITS - 1 - exponent).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding may carry into a new leading digit (9.99.. -> 10.0..); drop one decimal
    let digits = s.chars().filter(char::is_ascii_digit).collect::<String>();
    if decimals > 0 && digits.trim_start_matches('0').len() > SIGNIFICANT_DIGITS as usize {
        return format!("{x:.prec$}", prec = decimals - 1);
    }
    s
}

struct ReportFormatter<'a> {
    inner: PrettyFormatter<'a>,
}

impl Formatter for ReportFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_float(value).as_bytes())
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

pub fn report_value(report: &EvaluationReport) -> Value {
    let pairs: Vec<Value> = report
        .pairs
        .iter()
        .map(|p| {
            json!({
                "video": p.video_id,
                "auto": p.auto_label,
                "user": p.user_label,
                "n_auto": p.n_auto,
                "n_user": p.n_user,
                "n_matched": p.n_matched,
                "precision": p.precision,
                "recall": p.recall,
                "f": p.f_measure,
            })
        })
        .collect();
    json!({
        "config": {
            "color_threshold": report.config.color_threshold,
            "texture_threshold": report.config.texture_threshold,
            "match_mode": report.config.match_mode.as_str(),
            "aggregation": report.aggregation.as_str(),
        },
        "pairs": pairs,
        "per_video_mean_f": report.per_video_mean_f,
        "overall_mean_f": report.overall_mean_f,
    })
}

pub fn to_json(report: &EvaluationReport) -> String {
    let mut out = Vec::new();
    let fmt = ReportFormatter {
        inner: PrettyFormatter::with_indent(b"  "),
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut out, fmt);
    serde::Serialize::serialize(&report_value(report), &mut ser).expect("serializing to memory");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON is UTF-8")
}

pub fn to_csv(report: &EvaluationReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::io("writing CSV", io::Error::other(e));
    w.write_record([
        "row",
        "video",
        "auto",
        "user",
        "n_auto",
        "n_user",
        "n_matched",
        "precision",
        "recall",
        "f",
    ])
    .map_err(csv_err)?;
    for p in &report.pairs {
        w.write_record([
            "pair".to_owned(),
            p.video_id.clone(),
            p.auto_label.clone(),
            p.user_label.clone(),
            p.n_auto.to_string(),
            p.n_user.to_string(),
            p.n_matched.to_string(),
            format_float(p.precision),
            format_float(p.recall),
            format_float(p.f_measure),
        ])
        .map_err(csv_err)?;
    }
    for (video, f) in &report.per_video_mean_f {
        w.write_record([
            "video_mean",
            video,
            "",
            "",
            "",
            "",
            "",
            "",
            "",
            &format_float(*f),
        ])
        .map_err(csv_err)?;
    }
    w.write_record([
        "overall_mean",
        "",
        "",
        "",
        "",
        "",
        "",
        "",
        "",
        &format_float(report.overall_mean_f),
    ])
    .map_err(csv_err)?;
    let bytes = w
        .into_inner()
        .map_err(|e| Error::io("writing CSV", io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("CSV is UTF-8"))
}
