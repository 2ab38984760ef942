//! One-parameter sweeps with a resumable progress manifest.
//!
//! Rows are appended to the CSV as they are computed and the manifest
//! `<out>.progress.json` records how many are complete. A rerun with
//! `--resume` and an identical configuration keeps the finished rows and
//! continues, so the final file is byte-identical to an uninterrupted run.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use quasi_core::cocycle::{lyapunov, SchrodingerCocycle};
use quasi_core::rotation::rotation;
use quasi_core::spectrum::{ids, phase_grid, truncate_with_alpha};
use quasi_core::{Frequency, PotentialSpec};

use crate::commands::{frequency, potential};
use crate::config::{Quantity, SweepArgs};
use crate::output::{csv_record, sibling, Emitter};
use crate::svg::{Figure, Raster, Style};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Param {
    Lambda,
    Energy,
    Alpha,
}

impl Param {
    fn name(self) -> &'static str {
        match self {
            Param::Lambda => "lambda",
            Param::Energy => "E",
            Param::Alpha => "alpha",
        }
    }
}

/// Parses `name=start:stop:count` or `name=v1,v2,...`.
pub fn parse_sweep(spec: &str) -> Result<(Param, Vec<f64>)> {
    let (name, range) = spec.split_once('=').with_context(|| format!("malformed sweep `{spec}`: expected name=range"))?;
    let param = match name.trim() {
        "lambda" => Param::Lambda,
        "energy" | "E" => Param::Energy,
        "alpha" => Param::Alpha,
        other => bail!("cannot sweep `{other}`; expected lambda, energy or alpha"),
    };
    let num = |s: &str| -> Result<f64> {
        let x: f64 = s.trim().parse().with_context(|| format!("malformed number `{s}` in sweep `{spec}`"))?;
        if !x.is_finite() {
            bail!("non-finite value in sweep `{spec}`");
        }
        Ok(x)
    };
    let parts: Vec<&str> = range.split(':').collect();
    let values = match parts.as_slice() {
        [start, stop, count] => {
            let (a, b) = (num(start)?, num(stop)?);
            let n: usize = count.trim().parse().with_context(|| format!("malformed count in sweep `{spec}`"))?;
            if n == 0 {
                bail!("sweep `{spec}` has zero points");
            }
            if n == 1 {
                vec![a]
            } else {
                (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
            }
        }
        [list] => list.split(',').map(num).collect::<Result<Vec<_>>>()?,
        _ => bail!("malformed sweep `{spec}`: expected start:stop:count or a comma list"),
    };
    if values.is_empty() {
        bail!("sweep `{spec}` is empty");
    }
    Ok((param, values))
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    config: Value,
    completed: usize,
    total: usize,
}

struct Context_<'a> {
    args: &'a SweepArgs,
    v: PotentialSpec,
    freq: Frequency,
}

impl Context_<'_> {
    fn header(&self, param: Param) -> Vec<String> {
        let cols: &[&str] = match self.args.quantity {
            Quantity::Lyapunov => &["L", "stderr"],
            Quantity::Rotation => &["rho", "spread"],
            Quantity::Ids => &["N"],
            Quantity::Raster => &["occupied"],
        };
        std::iter::once(param.name()).chain(cols.iter().copied()).map(String::from).collect()
    }

    fn row(&self, param: Param, x: f64) -> Result<Vec<String>> {
        let a = self.args;
        let (v, alpha, energy) = match param {
            Param::Lambda => (self.v.with_lambda(x), self.freq.alpha(), a.energy),
            Param::Energy => (self.v.clone(), self.freq.alpha(), x),
            Param::Alpha => (self.v.clone(), x, a.energy),
        };
        let mut out = vec![x.to_string()];
        match a.quantity {
            Quantity::Lyapunov => {
                let l = lyapunov(&SchrodingerCocycle::with_alpha(&v, alpha, energy), a.steps, a.phases);
                out.extend([l.value.to_string(), l.stderr.to_string()]);
            }
            Quantity::Rotation => {
                let r = rotation(&SchrodingerCocycle::with_alpha(&v, alpha, energy), a.steps, a.phases);
                out.extend([r.rho.to_string(), r.spread.to_string()]);
            }
            Quantity::Ids => {
                let n = ids(&v, &self.freq, &[energy], a.l, a.phases).values[0];
                out.push(n.to_string());
            }
            Quantity::Raster => {
                let bins = raster_row(&v, alpha, a.l, a.phases, (a.emin, a.emax), a.points);
                out.push(bins.iter().map(|&b| if b { '1' } else { '0' }).collect());
            }
        }
        Ok(out)
    }
}

/// Energy bins of `[emin, emax]` hit by an eigenvalue of some phase section.
pub fn raster_row(v: &PotentialSpec, alpha: f64, l: usize, phases: usize, range: (f64, f64), bins: usize) -> Vec<bool> {
    let mut cells = vec![false; bins];
    let width = (range.1 - range.0) / bins as f64;
    for theta in phase_grid(phases) {
        for e in truncate_with_alpha(v, alpha, theta, l).eigenvalues() {
            if e >= range.0 && e <= range.1 {
                cells[(((e - range.0) / width) as usize).min(bins - 1)] = true;
            }
        }
    }
    cells
}

fn validate(a: &SweepArgs, param: Param) -> Result<()> {
    if a.steps == 0 || a.phases == 0 || a.points == 0 {
        bail!("--steps, --phases and --points must be positive");
    }
    if a.l < 2 {
        bail!("--L must be at least 2");
    }
    if !(a.emin < a.emax) {
        bail!("need emin < emax");
    }
    match (a.quantity, param) {
        (Quantity::Ids, Param::Alpha) => bail!("ids sweeps over alpha are not supported; sweep lambda or energy"),
        (Quantity::Raster, Param::Energy) => bail!("a raster already spans energies; sweep alpha or lambda"),
        (Quantity::Raster, _) if a.l > 4000 => bail!("raster sections are dense eigensolves; keep --L <= 4000"),
        _ => Ok(()),
    }
}

fn read_manifest(path: &Path) -> Result<Option<Manifest>> {
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(Some(serde_json::from_str(&text).with_context(|| format!("corrupt manifest {}", path.display()))?))
}

pub fn run(a: &SweepArgs, emit: &Emitter) -> Result<bool> {
    if a.sweep.len() != 1 {
        bail!("sweep needs exactly one swept parameter, got {}", a.sweep.len());
    }
    let (param, values) = parse_sweep(&a.sweep[0])?;
    validate(a, param)?;
    if a.resume && emit.out().is_none() {
        bail!("--resume needs --out");
    }
    let ctx = Context_ {
        args: a,
        v: potential(&a.potential)?,
        freq: frequency(&a.freq)?,
    };
    // The manifest identifies a run by its config without the resume flag.
    let mut identity = emit.config().clone();
    if let Some(m) = identity.as_object_mut() {
        m.remove("resume");
        m.remove("timings");
        m.remove("threads");
    }
    let header = csv_record(&ctx.header(param))?;
    let mut lines: Vec<String> = Vec::new();

    let Some(out) = emit.out() else {
        print!("{header}");
        for &x in &values {
            print!("{}", csv_record(&ctx.row(param, x)?)?);
        }
        return Ok(true);
    };
    if out.extension().and_then(|e| e.to_str()) != Some("csv") {
        bail!("sweep writes CSV; use a .csv output path");
    }
    let manifest_path = sibling(out, ".progress.json");
    let mut done = 0;
    if a.resume {
        if let Some(m) = read_manifest(&manifest_path)? {
            if m.config != identity {
                bail!("manifest {} belongs to a different configuration", manifest_path.display());
            }
            let text = fs::read_to_string(out).with_context(|| format!("cannot read {}", out.display()))?;
            let existing: Vec<&str> = text.split_inclusive('\n').collect();
            if existing.len() < m.completed + 1 || existing.first() != Some(&header.as_str()) {
                bail!("{} does not match its manifest", out.display());
            }
            lines = existing[1..=m.completed].iter().map(|s| s.to_string()).collect();
            done = m.completed;
        }
    }
    let write_manifest = |completed: usize| -> Result<()> {
        let m = Manifest { config: identity.clone(), completed, total: values.len() };
        fs::write(&manifest_path, serde_json::to_string_pretty(&m)? + "\n")
            .with_context(|| format!("cannot write {}", manifest_path.display()))
    };
    fs::write(out, format!("{header}{}", lines.concat())).with_context(|| format!("cannot write {}", out.display()))?;
    write_manifest(done)?;
    let mut file = OpenOptions::new().append(true).open(out)?;
    for (i, &x) in values.iter().enumerate().skip(done) {
        let line = csv_record(&ctx.row(param, x)?)?;
        file.write_all(line.as_bytes())?;
        file.flush()?;
        lines.push(line);
        write_manifest(i + 1)?;
    }
    emit.sidecar(out)?;
    emit.figure(|| figure(&ctx, param, &values, &lines))?;
    Ok(true)
}

fn figure(ctx: &Context_, param: Param, values: &[f64], lines: &[String]) -> Figure {
    let second = |line: &str| -> String { line.trim_end().split(',').nth(1).unwrap_or("").to_string() };
    let a = ctx.args;
    match a.quantity {
        Quantity::Raster => {
            let mut fig = Figure::new("Spectrum raster", param.name(), "E");
            fig.raster = Some(Raster {
                xs: values.to_vec(),
                y_range: (a.emin, a.emax),
                cells: lines.iter().map(|l| second(l).chars().map(|c| c == '1').collect()).collect(),
            });
            fig
        }
        q => {
            let label = match q {
                Quantity::Lyapunov => "L",
                Quantity::Rotation => "rho",
                _ => "N",
            };
            let pts = values.iter().zip(lines).map(|(&x, l)| (x, second(l).parse().unwrap_or(f64::NAN))).collect();
            Figure::new(format!("{label} sweep"), param.name(), label).with(Style::Line, pts)
        }
    }
}
