//! CSV emission for time series and sweeps.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::covariance::SecondMomentMatrix;
use crate::error::{Error, Result};
use crate::experiments::{SweepMetadata, SweepResult};
use crate::model::{MeanFieldTrajectory, PulseParams, SystemParams};
use crate::numerics::TimeGrid;
use crate::rwa::BlochState;

pub const TIMESERIES_HEADER: &str =
    "t,re_a_mean,im_a_mean,re_b_mean,im_b_mean,re_omega,im_omega,phonon,photon";
pub const SWEEP_HEADER: &str = "axis_value,final_phonon,final_photon";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

/// Nine significant digits.
fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

fn write_rows<W: Write>(out: &mut W, rows: impl Iterator<Item = Vec<f64>>) -> std::io::Result<()> {
    for row in rows {
        let line: Vec<String> = row.into_iter().map(sig9).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

fn check_aligned(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::InvalidParameter(format!(
            "mean-field trajectory has {a} nodes but the moment sequence has {b}"
        )));
    }
    Ok(())
}

/// Mean fields, drive and displaced numbers, one row per `stride`-th node.
/// The final node is always written.
pub fn emit_timeseries(
    traj: &MeanFieldTrajectory,
    rseq: &[SecondMomentMatrix],
    path: &Path,
    stride: usize,
) -> Result<()> {
    check_aligned(traj.len(), rseq.len())?;
    let mut out = create(path)?;
    let grid = traj.grid;
    let rows = node_indices(&grid, stride).map(|k| {
        let (a, b, w) = (traj.a_mean[k], traj.b_mean[k], traj.omega_drive[k]);
        vec![
            grid.time(k),
            a.re,
            a.im,
            b.re,
            b.im,
            w.re,
            w.im,
            rseq[k].phonon(),
            rseq[k].photon(),
        ]
    });
    writeln!(out, "{TIMESERIES_HEADER}")
        .and_then(|_| write_rows(&mut out, rows))
        .and_then(|_| out.flush())
        .map_err(io_err(path))
}

/// Mean fields and drive only, for the drive-reconstruction mode.
pub fn emit_drive(traj: &MeanFieldTrajectory, path: &Path, stride: usize) -> Result<()> {
    let mut out = create(path)?;
    let grid = traj.grid;
    let rows = node_indices(&grid, stride).map(|k| {
        let (a, b, w) = (traj.a_mean[k], traj.b_mean[k], traj.omega_drive[k]);
        vec![grid.time(k), a.re, a.im, b.re, b.im, w.re, w.im, w.norm(), traj.phase_integral[k]]
    });
    writeln!(
        out,
        "t,re_a_mean,im_a_mean,re_b_mean,im_b_mean,re_omega,im_omega,abs_omega,phase_integral"
    )
    .and_then(|_| write_rows(&mut out, rows))
    .and_then(|_| out.flush())
    .map_err(io_err(path))
}

/// Engine phonons and Bloch vector next to the closed-form rotating-wave
/// solution (`None` columns are left empty when off the optimal manifold).
pub fn emit_oracle(
    grid: &TimeGrid,
    phonon: &[f64],
    engine: &[BlochState],
    exact: &[Option<(f64, BlochState)>],
    path: &Path,
    stride: usize,
) -> Result<()> {
    let mut out = create(path)?;
    let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(out, "t,phonon,u,v,w,rwa_phonon,u_exact,v_exact,w_exact")?;
        for k in node_indices(grid, stride) {
            let s = engine[k];
            let mut cells = vec![grid.time(k), phonon[k], s.u, s.v, s.w]
                .into_iter()
                .map(sig9)
                .collect::<Vec<_>>();
            match exact[k] {
                Some((n, e)) => cells.extend([n, e.u, e.v, e.w].map(sig9)),
                None => cells.extend(std::iter::repeat_n(String::new(), 4)),
            }
            writeln!(out, "{}", cells.join(","))?;
        }
        out.flush()
    };
    write(&mut out).map_err(io_err(path))
}

fn node_indices(grid: &TimeGrid, stride: usize) -> impl Iterator<Item = usize> {
    let last = grid.n_steps;
    let stride = stride.max(1);
    (0..=last)
        .step_by(stride)
        .chain((last % stride != 0).then_some(last))
}

fn metadata_lines(result: &SweepResult) -> Vec<(String, String)> {
    let m = &result.metadata;
    let s = &m.system;
    let p = &m.pulse;
    vec![
        ("axis".into(), result.axis_name.clone()),
        ("omega_m".into(), format!("{:e}", s.omega_m)),
        ("delta_c".into(), format!("{:e}", s.delta_c)),
        ("g".into(), format!("{:e}", s.g)),
        ("gamma_c".into(), format!("{:e}", s.gamma_c)),
        ("gamma_m".into(), format!("{:e}", s.gamma_m)),
        ("n_bar_m".into(), format!("{:e}", s.n_bar_m)),
        ("chi0".into(), format!("{:e}", p.chi0)),
        ("alpha".into(), format!("{:e}", p.alpha)),
        ("beta".into(), format!("{:e}", p.beta)),
        ("t0".into(), format!("{:e}", p.t0)),
        ("delta_dev".into(), format!("{:e}", p.delta_dev)),
        ("rwa".into(), m.rwa.to_string()),
        ("dt".into(), format!("{:e}", m.dt)),
        ("lock_chi0".into(), m.lock_chi0.to_string()),
    ]
}

/// Sweep table with the full parameter record as `#` comment lines. Numbers
/// are written in shortest round-trip form so [`read_sweep`] is exact.
pub fn emit_sweep(result: &SweepResult, path: &Path) -> Result<()> {
    let mut out = create(path)?;
    let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        for (k, v) in metadata_lines(result) {
            writeln!(out, "# {k} = {v}")?;
        }
        writeln!(out, "{SWEEP_HEADER}")?;
        for k in 0..result.axis_values.len() {
            writeln!(
                out,
                "{:e},{:e},{:e}",
                result.axis_values[k], result.final_phonon[k], result.final_photon[k]
            )?;
        }
        out.flush()
    };
    write(&mut out).map_err(io_err(path))
}

pub fn read_sweep(path: &Path) -> Result<SweepResult> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut meta = std::collections::HashMap::new();
    let mut rows = Vec::new();
    let mut seen_header = false;
    for line in BufReader::new(file).lines() {
        let line = line.map_err(io_err(path))?;
        if let Some(comment) = line.strip_prefix('#') {
            let (k, v) = comment
                .split_once('=')
                .ok_or_else(|| Error::SweepFormat(format!("bad comment line `{line}`")))?;
            meta.insert(k.trim().to_string(), v.trim().to_string());
        } else if !seen_header {
            if line.trim() != SWEEP_HEADER {
                return Err(Error::SweepFormat(format!("unexpected header `{line}`")));
            }
            seen_header = true;
        } else if !line.trim().is_empty() {
            let cells = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::SweepFormat(format!("`{line}`: {e}")))?;
            if cells.len() != 3 {
                return Err(Error::SweepFormat(format!("expected 3 columns in `{line}`")));
            }
            rows.push(cells);
        }
    }
    let get = |k: &str| -> Result<&String> {
        meta.get(k)
            .ok_or_else(|| Error::SweepFormat(format!("missing metadata `{k}`")))
    };
    let num = |k: &str| -> Result<f64> {
        get(k)?
            .parse()
            .map_err(|e| Error::SweepFormat(format!("metadata `{k}`: {e}")))
    };
    let flag = |k: &str| -> Result<bool> {
        get(k)?
            .parse()
            .map_err(|e| Error::SweepFormat(format!("metadata `{k}`: {e}")))
    };
    let metadata = SweepMetadata {
        system: SystemParams {
            omega_m: num("omega_m")?,
            delta_c: num("delta_c")?,
            g: num("g")?,
            gamma_c: num("gamma_c")?,
            gamma_m: num("gamma_m")?,
            n_bar_m: num("n_bar_m")?,
        },
        pulse: PulseParams {
            chi0: num("chi0")?,
            alpha: num("alpha")?,
            beta: num("beta")?,
            t0: num("t0")?,
            delta_dev: num("delta_dev")?,
        },
        rwa: flag("rwa")?,
        dt: num("dt")?,
        lock_chi0: flag("lock_chi0")?,
    };
    Ok(SweepResult {
        axis_name: get("axis")?.clone(),
        axis_values: rows.iter().map(|r| r[0]).collect(),
        final_phonon: rows.iter().map(|r| r[1]).collect(),
        final_photon: rows.iter().map(|r| r[2]).collect(),
        metadata,
    })
}
