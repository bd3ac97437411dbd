//! Artifact writers: CSV tables and pretty JSON.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::limit_solver::ClassicalState;
use crate::state::State;
use crate::diagnostics::EnergyReport;

#[derive(Debug, Clone)]
pub struct OutputDir {
    root: PathBuf,
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Numerical(format!("csv serialization failed: {other:?}")),
    }
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(OutputDir { root })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn write_csv<T: Serialize>(&self, name: &str, rows: impl IntoIterator<Item = T>) -> Result<PathBuf> {
        let path = self.root.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
        for r in rows {
            w.serialize(r).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(path)
    }

    pub fn write_json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let path = self.root.join(name);
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Numerical(e.to_string()))?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}

#[derive(Debug, Serialize)]
pub struct SnapshotRow {
    pub t: f64,
    pub x: f64,
    pub v: f64,
    pub u: f64,
    pub theta: f64,
    pub q: f64,
    #[serde(rename = "S")]
    pub s: f64,
}

pub fn snapshot_rows<'a>(grid: &'a Grid, states: &'a [State]) -> impl Iterator<Item = SnapshotRow> + 'a {
    states.iter().flat_map(move |st| {
        let f = &st.fields;
        grid.x().iter().enumerate().map(move |(i, &x)| SnapshotRow {
            t: st.t,
            x,
            v: f.v[i],
            u: f.u[i],
            theta: f.theta[i],
            q: f.q[i],
            s: f.s[i],
        })
    })
}

#[derive(Debug, Serialize)]
pub struct ClassicalRow {
    pub t: f64,
    pub x: f64,
    pub v: f64,
    pub u: f64,
    pub theta: f64,
}

pub fn classical_rows<'a>(grid: &'a Grid, states: &'a [ClassicalState]) -> impl Iterator<Item = ClassicalRow> + 'a {
    states.iter().flat_map(move |st| {
        grid.x().iter().enumerate().map(move |(i, &x)| ClassicalRow {
            t: st.t,
            x,
            v: st.v[i],
            u: st.u[i],
            theta: st.theta[i],
        })
    })
}

#[derive(Debug, Serialize)]
pub struct EntropyRow {
    pub t: f64,
    pub entropy: f64,
    pub mass: f64,
    pub energy: f64,
    pub dissipation: f64,
    pub res_q: f64,
    #[serde(rename = "res_S")]
    pub res_s: f64,
    #[serde(rename = "E_w")]
    pub e_w: f64,
    #[serde(rename = "D_w")]
    pub d_w: f64,
}

impl From<&EnergyReport> for EntropyRow {
    fn from(r: &EnergyReport) -> Self {
        EntropyRow {
            t: r.t,
            entropy: r.entropy_total,
            mass: r.mass,
            energy: r.energy,
            dissipation: r.dissipation_inst,
            res_q: r.relax_res_q,
            res_s: r.relax_res_s,
            e_w: r.e_weighted,
            d_w: r.d_weighted,
        }
    }
}
