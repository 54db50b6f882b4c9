//! Sample export (CSV, legacy VTK, JSON) and verification report files.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::{Branch, HelixConfig};
use crate::error::{Error, Result};
use crate::field::{FlowSample, Variant};
use crate::grid::GridSpec;
use crate::verify::ResidualReport;

pub const CSV_HEADER: &str = "rho,phi,z,u_rho,u_z,u_phi,p,t,in_support";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Vtk,
    Json,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Vtk => "vtk",
            Format::Json => "json",
        })
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Format> {
        match s {
            "csv" => Ok(Format::Csv),
            "vtk" => Ok(Format::Vtk),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidConfig(format!("unknown format `{other}`"))),
        }
    }
}

/// Everything that determines one run, echoed into reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub k: f64,
    pub branch: Branch,
    pub eps: f64,
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(command: &str, helix: &HelixConfig, seed: u64) -> RunConfig {
        RunConfig {
            command: command.to_string(),
            k: helix.k,
            branch: helix.branch,
            eps: helix.eps,
            tol: helix.tol,
            grid: None,
            variant: None,
            output: None,
            format: None,
            suite: None,
            seed,
        }
    }

    pub fn helix(&self) -> Result<HelixConfig> {
        HelixConfig::new(self.k, self.branch, self.eps, self.tol)
    }
}

/// Rejects the first sample with a non-finite value.
pub fn check_finite(samples: &[FlowSample]) -> Result<()> {
    for (index, s) in samples.iter().enumerate() {
        let fields = [
            ("u_rho", s.u_rho),
            ("u_z", s.u_z),
            ("u_phi", s.u_phi),
            ("p", s.p),
            ("t", s.t),
        ];
        if let Some((field, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                index,
                field,
                rho: s.rho,
                phi: s.phi,
                z: s.z,
            });
        }
    }
    Ok(())
}

pub fn write_csv<W: Write>(out: &mut W, samples: &[FlowSample]) -> Result<()> {
    check_finite(samples)?;
    writeln!(out, "{CSV_HEADER}")?;
    for s in samples {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            s.rho,
            s.phi,
            s.z,
            s.u_rho,
            s.u_z,
            s.u_phi,
            s.p,
            s.t,
            u8::from(s.in_support)
        )?;
    }
    Ok(())
}

/// Legacy ASCII structured grid. Samples are in `(ρ, φ, z)` row-major order
/// with `z` fastest, so the VTK dimensions are listed as `N_z N_φ N_ρ`.
pub fn write_vtk<W: Write>(
    out: &mut W,
    samples: &[FlowSample],
    grid: &GridSpec,
    title: &str,
) -> Result<()> {
    check_finite(samples)?;
    if samples.len() != grid.len() {
        return Err(Error::InvalidConfig(format!(
            "{} samples for a grid of {} points",
            samples.len(),
            grid.len()
        )));
    }
    let [nr, np, nz] = grid.counts();
    let title: String = title.chars().filter(|c| *c != '\n').take(255).collect();
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{title}")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET STRUCTURED_GRID")?;
    writeln!(out, "DIMENSIONS {nz} {np} {nr}")?;
    writeln!(out, "POINTS {} double", samples.len())?;
    for s in samples {
        let [x, y, z] = s.cartesian_position();
        writeln!(out, "{x:.16e} {y:.16e} {z:.16e}")?;
    }
    writeln!(out, "POINT_DATA {}", samples.len())?;
    writeln!(out, "VECTORS velocity double")?;
    for s in samples {
        let [x, y, z] = s.cartesian_velocity();
        writeln!(out, "{x:.16e} {y:.16e} {z:.16e}")?;
    }
    for (name, get) in [
        ("pressure", (|s: &FlowSample| s.p) as fn(&FlowSample) -> f64),
        ("t", |s: &FlowSample| s.t),
    ] {
        writeln!(out, "SCALARS {name} double 1")?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for s in samples {
            writeln!(out, "{:.16e}", get(s))?;
        }
    }
    Ok(())
}

pub fn write_json<W: Write>(out: &mut W, samples: &[FlowSample]) -> Result<()> {
    check_finite(samples)?;
    serde_json::to_writer(&mut *out, samples)?;
    writeln!(out)?;
    Ok(())
}

/// Writes `samples` covering `grid` to `path` in `format`.
pub fn export_samples(
    samples: &[FlowSample],
    grid: &GridSpec,
    format: Format,
    path: &Path,
    title: &str,
) -> Result<()> {
    // validate before touching the file system
    check_finite(samples)?;
    let mut out = BufWriter::new(File::create(path)?);
    match format {
        Format::Csv => write_csv(&mut out, samples)?,
        Format::Vtk => write_vtk(&mut out, samples, grid, title)?,
        Format::Json => write_json(&mut out, samples)?,
    }
    out.flush()?;
    Ok(())
}

/// Top-level report document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub config: RunConfig,
    pub suites: Vec<ResidualReport>,
    pub overall_passed: bool,
}

impl ReportDocument {
    pub fn new(config: RunConfig, suites: Vec<ResidualReport>) -> ReportDocument {
        let overall_passed = suites.iter().all(|s| s.passed);
        ReportDocument {
            config,
            suites,
            overall_passed,
        }
    }
}

pub fn write_report(path: &Path, config: &RunConfig, reports: &[ResidualReport]) -> Result<()> {
    let doc = ReportDocument::new(config.clone(), reports.to_vec());
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<ReportDocument> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
