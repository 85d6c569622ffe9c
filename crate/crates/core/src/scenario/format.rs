use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use super::{Results, ScenarioError};

pub const RESULTS_FILE: &str = "results.json";
pub const FAR_FIELD_FILE: &str = "far_field.csv";

/// Pretty JSON with every float in 17-significant-digit scientific form.
struct Exact17(PrettyFormatter<'static>);

impl Formatter for Exact17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Exact17(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory serialization cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

fn push_f64(line: &mut String, v: f64) {
    write!(line, ",{v:.16e}").unwrap();
}

fn far_field_table(results: &Results) -> Option<String> {
    let ff = results.far_field.as_ref()?;
    let mut out = String::from("dir_x,dir_y,dir_z,re,im,abs");
    if ff.em.is_some() {
        for f in ["e", "h"] {
            for c in ["x", "y", "z"] {
                write!(out, ",{f}{c}_re,{f}{c}_im").unwrap();
            }
        }
    }
    out.push('\n');
    for (i, (d, a)) in ff.directions.iter().zip(&ff.amplitude).enumerate() {
        let mut line = format!("{:.16e}", d[0]);
        for v in [d[1], d[2], a.0.re, a.0.im, a.0.norm()] {
            push_f64(&mut line, v);
        }
        if let Some(em) = &ff.em {
            for z in em.e[i].iter().chain(&em.h[i]) {
                push_f64(&mut line, z.0.re);
                push_f64(&mut line, z.0.im);
            }
        }
        out.push_str(&line);
        out.push('\n');
    }
    Some(out)
}

/// Writes `results.json` and, when a far field was computed,
/// `far_field.csv` into `dir`; returns the written paths.
pub fn write_results(results: &Results, dir: &Path) -> Result<Vec<PathBuf>, ScenarioError> {
    std::fs::create_dir_all(dir).map_err(|e| ScenarioError::io(dir, e))?;
    let mut written = Vec::new();
    let json = dir.join(RESULTS_FILE);
    std::fs::write(&json, to_json_string(results)).map_err(|e| ScenarioError::io(&json, e))?;
    written.push(json);
    if let Some(table) = far_field_table(results) {
        let csv = dir.join(FAR_FIELD_FILE);
        std::fs::write(&csv, table).map_err(|e| ScenarioError::io(&csv, e))?;
        written.push(csv);
    }
    Ok(written)
}
