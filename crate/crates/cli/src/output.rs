//! Serialization with 17 significant digits and all-or-nothing file commits.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use parafrac::geometry::NeighborhoodMeasurement;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

pub const CSV_HEADER: [&str; 9] = [
    "eps",
    "n_eps",
    "area",
    "centroid_re",
    "centroid_im",
    "directed_re",
    "directed_im",
    "closure_error_bound",
    "points_used",
];

/// `x` in scientific notation with 17 significant digits.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Pretty JSON whose floats carry 17 significant digits.
struct Precise<'a>(PrettyFormatter<'a>);

impl Formatter for Precise<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(float(value).as_bytes())
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

pub fn json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Precise(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(buf)
}

pub fn measurements_csv(rows: &[NeighborhoodMeasurement]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for m in rows {
        w.write_record([
            float(m.eps),
            m.n_eps.to_string(),
            float(m.area),
            float(m.centroid.re),
            float(m.centroid.im),
            float(m.directed_area.re),
            float(m.directed_area.im),
            float(m.closure_error_bound),
            m.points_used.to_string(),
        ])?;
    }
    Ok(w.into_inner()?)
}

/// Files written together: each is staged next to its target and renamed
/// only after every file of the set has been staged.
#[derive(Default)]
pub struct Outputs {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, path: PathBuf, bytes: Vec<u8>) {
        self.files.push((path, bytes));
    }

    pub fn commit(self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut staged = Vec::new();
        for (name, bytes) in &self.files {
            let target = dir.join(name);
            let tmp = target.with_extension("partial");
            if let Err(e) = std::fs::write(&tmp, bytes) {
                for (t, _) in &staged {
                    let _ = std::fs::remove_file(t);
                }
                return Err(e).with_context(|| format!("writing {}", tmp.display()));
            }
            staged.push((tmp, target));
        }
        let mut done = Vec::new();
        for (tmp, target) in staged {
            std::fs::rename(&tmp, &target).with_context(|| format!("writing {}", target.display()))?;
            done.push(target);
        }
        Ok(done)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        let s = float(0.1);
        assert_eq!(s, "1.0000000000000001e-1");
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
        let digits = s.split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).count();
        assert_eq!(digits, 17);
    }

    #[test]
    fn json_floats_round_trip() {
        let v = serde_json::json!({"x": 1.0 / 3.0, "n": 3, "z": [0.5, -2.0]});
        let text = String::from_utf8(json(&v).unwrap()).unwrap();
        assert!(text.contains("3.3333333333333331e-1"));
        assert!(text.contains("\"n\": 3"));
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["x"].as_f64().unwrap(), 1.0 / 3.0);
    }
}
