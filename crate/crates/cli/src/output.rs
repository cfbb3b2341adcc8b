//! Output directory handling: CSV, JSON and SVG files plus metadata.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use ndarray::Array2;
use serde_json::Value;
use wwm_core::grid::ComplexField;

use crate::svg::{heatmap, Axes};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => bail!("unknown format `{other}` (expected csv, json or svg)"),
        }
    }
}

pub fn parse_formats(list: &str) -> Result<BTreeSet<Format>> {
    let set: BTreeSet<Format> = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(Format::from_str)
        .collect::<Result<_>>()?;
    if set.is_empty() {
        bail!("format list is empty");
    }
    Ok(set)
}

pub struct Output {
    dir: PathBuf,
    formats: BTreeSet<Format>,
}

impl Output {
    pub fn new(dir: &Path, formats: BTreeSet<Format>) -> Result<Self> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            formats,
        })
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>> {
        let path = self.path(name);
        let file = File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(BufWriter::new(file))
    }

    pub fn text(&self, name: &str, body: &str) -> Result<()> {
        let mut w = self.create(name)?;
        w.write_all(body.as_bytes())?;
        w.flush()?;
        Ok(())
    }

    /// Pretty JSON; keys are sorted, so output is byte-stable.
    pub fn json(&self, name: &str, value: &Value) -> Result<()> {
        let mut body = serde_json::to_string_pretty(value)?;
        body.push('\n');
        self.text(name, &body)
    }

    /// Writes `<stem>.csv` through `write_rows` and its metadata sidecar.
    pub fn csv<F>(&self, stem: &str, meta: &Value, write_rows: F) -> Result<()>
    where
        F: FnOnce(&mut dyn Write) -> Result<()>,
    {
        if !self.wants(Format::Csv) {
            return Ok(());
        }
        let mut w = self.create(&format!("{stem}.csv"))?;
        write_rows(&mut w)?;
        w.flush()?;
        self.json(&format!("{stem}.meta.json"), meta)
    }

    pub fn svg(&self, stem: &str, values: &Array2<f64>, axes: &Axes) -> Result<()> {
        if !self.wants(Format::Svg) {
            return Ok(());
        }
        self.text(&format!("{stem}.svg"), &heatmap(values, axes))
    }

    /// A phase-space field in every requested format.
    pub fn field(&self, stem: &str, field: &ComplexField, meta: &Value, title: &str) -> Result<()> {
        self.csv(stem, meta, |w| Ok(field.write_csv(w)?))?;
        if self.wants(Format::Json) {
            let mut doc = field.to_json();
            doc["meta"] = meta.clone();
            self.json(&format!("{stem}.json"), &doc)?;
        }
        let g = &field.grid;
        self.svg(
            stem,
            &field.values.mapv(|v| v.re),
            &Axes {
                title,
                x_label: "q",
                y_label: "p",
                x_range: (g.q_min, g.q_max),
                y_range: (g.p_min, g.p_max),
            },
        )
    }
}
