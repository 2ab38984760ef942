//! Emission of JSON documents, CSV tables and SVG figures. Each artifact
//! carries the resolved configuration: JSON embeds it, CSV gets a sibling
//! `<file>.config.json`, SVG holds it in `<desc>`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::RunArgs;
use crate::svg::Figure;

pub struct Emitter {
    config: Value,
    out: Option<PathBuf>,
    svg: Option<PathBuf>,
    timings: bool,
    start: Instant,
}

fn is_ext(p: &Path, ext: &str) -> bool {
    p.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

impl Emitter {
    pub fn new(config: Value, run: &RunArgs) -> Result<Self> {
        if let Some(out) = &run.out {
            if !is_ext(out, "json") && !is_ext(out, "csv") {
                bail!("--out must end in .json or .csv: {}", out.display());
            }
        }
        Ok(Emitter {
            config,
            out: run.out.clone(),
            svg: run.svg.clone(),
            timings: run.timings,
            start: Instant::now(),
        })
    }

    pub fn config(&self) -> &Value {
        &self.config
    }

    pub fn out(&self) -> Option<&Path> {
        self.out.as_deref()
    }

    fn envelope(&self, key: &str, payload: Value) -> Value {
        let mut m = Map::new();
        m.insert("config".into(), self.config.clone());
        m.insert(key.into(), payload);
        if self.timings {
            m.insert("runtime_seconds".into(), self.start.elapsed().as_secs_f64().into());
        }
        Value::Object(m)
    }

    fn write(&self, path: Option<&Path>, text: &str) -> Result<()> {
        match path {
            Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    /// A JSON document `{config, result}`; refuses a CSV target.
    pub fn document<T: Serialize>(&self, result: &T) -> Result<()> {
        if let Some(out) = &self.out {
            if is_ext(out, "csv") {
                bail!("this command produces a JSON document; use a .json output path");
            }
        }
        let doc = self.envelope("result", serde_json::to_value(result)?);
        self.write(self.out.as_deref(), &(serde_json::to_string_pretty(&doc)? + "\n"))
    }

    /// A table: CSV (with a sibling config file) or, for a .json target, a
    /// document whose result is the list of rows.
    pub fn table<T: Serialize>(&self, rows: &[T]) -> Result<()> {
        match &self.out {
            Some(out) if is_ext(out, "json") => self.document(&rows),
            out => {
                self.write(out.as_deref(), &csv_text(rows)?)?;
                if let Some(out) = out {
                    self.sidecar(out)?;
                }
                Ok(())
            }
        }
    }

    /// Writes `<out>.config.json`.
    pub fn sidecar(&self, out: &Path) -> Result<()> {
        let doc = self.envelope("output", Value::String(out.display().to_string()));
        let path = sibling(out, ".config.json");
        fs::write(&path, serde_json::to_string_pretty(&doc)? + "\n")
            .with_context(|| format!("cannot write {}", path.display()))
    }

    pub fn figure(&self, fig: impl FnOnce() -> Figure) -> Result<()> {
        if let Some(path) = &self.svg {
            let desc = serde_json::to_string(&self.config)?;
            fs::write(path, fig().render(&desc)).with_context(|| format!("cannot write {}", path.display()))?;
        }
        Ok(())
    }
}

pub fn csv_text<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// One CSV record (no header) as a line of text.
pub fn csv_record(fields: &[String]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(fields)?;
    Ok(String::from_utf8(w.into_inner()?)?)
}
