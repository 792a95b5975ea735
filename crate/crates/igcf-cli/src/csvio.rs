//! CSV emission and round-trip reading: 17-significant-digit decimals,
//! LF line endings, bit-exact headers.

use igcf::{gauss_curvature_phi, MonitorSample, MonitorSeries, Snapshot};
use std::io::{self, Write};
use std::path::Path;

pub const SERIES_HEADER: &str = "t,dt,min_u_et,max_u_et,sup_grad,min_q,max_q,min_det_iota,max_det_iota,eigmin_iota,osc_phi_tilde,nbc_residual";

/// 17 significant digits: enough to reproduce any f64 exactly on re-parse.
fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_series(series: &MonitorSeries, path: &Path) -> io::Result<()> {
    let mut out = String::new();
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for s in &series.samples {
        let row = [
            s.t,
            s.dt,
            s.min_u_et,
            s.max_u_et,
            s.sup_grad,
            s.min_q,
            s.max_q,
            s.min_det_iota,
            s.max_det_iota,
            s.eigmin_iota,
            s.osc_phi_tilde,
            s.nbc_residual,
        ];
        let cells: Vec<String> = row.iter().map(|&v| fmt(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    write_atomically(path, out.as_bytes())
}

/// Inverse of [`write_series`]; kept as the reference parser for the format
/// (the round-trip test pins the encoding to full precision).
#[cfg_attr(not(test), allow(dead_code))]
pub fn read_series(path: &Path) -> io::Result<MonitorSeries> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == SERIES_HEADER => {}
        other => {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("unexpected series header: {other:?}"),
            ))
        }
    }
    let mut series = MonitorSeries::default();
    for (ln, line) in lines.enumerate() {
        let vals: Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
        let vals = vals.map_err(|e| {
            io::Error::new(io::ErrorKind::InvalidData, format!("row {}: {e}", ln + 2))
        })?;
        if vals.len() != 12 {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("row {}: expected 12 columns, got {}", ln + 2, vals.len()),
            ));
        }
        series.push(MonitorSample {
            t: vals[0],
            dt: vals[1],
            min_u_et: vals[2],
            max_u_et: vals[3],
            sup_grad: vals[4],
            min_q: vals[5],
            max_q: vals[6],
            min_det_iota: vals[7],
            max_det_iota: vals[8],
            eigmin_iota: vals[9],
            osc_phi_tilde: vals[10],
            nbc_residual: vals[11],
        });
    }
    Ok(series)
}

/// Per-node snapshot: r, theta, phi, u, K. The header comment records the
/// requested time and the completed-step time it snapped to.
pub fn write_snapshot(snap: &Snapshot, requested_t: f64, path: &Path) -> io::Result<()> {
    let k = gauss_curvature_phi(&snap.phi)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))?;
    let cap = &snap.phi.cap;
    let mut out = String::new();
    out.push_str(&format!(
        "# snapshot requested_t={} snapped_t={}\n",
        fmt(requested_t),
        fmt(snap.t)
    ));
    out.push_str("r,theta,phi,u,K\n");
    for (idx, &phi) in snap.phi.values.iter().enumerate() {
        let r = cap.r_of_ring(cap.ring_of(idx));
        let theta = cap.theta_of(idx % cap.ntheta);
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt(r),
            fmt(theta),
            fmt(phi),
            fmt(phi.exp()),
            fmt(k.values[idx])
        ));
    }
    write_atomically(path, out.as_bytes())
}

fn write_atomically(path: &Path, bytes: &[u8]) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use igcf::FlowMode;

    #[test]
    fn series_round_trip_is_exact() {
        let cap = std::sync::Arc::new(igcf::build_cap(2, 1.0, 8, 16).unwrap());
        let phi = igcf::ScalarField::constant(cap, 0.3);
        let mut series = MonitorSeries::default();
        series.push(igcf::sample_state(&phi, 0.0, 0.0, FlowMode::Raw));
        series.push(igcf::sample_state(&phi, 0.1234567890123456, 1e-4, FlowMode::Raw));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("series.csv");
        write_series(&series, &path).unwrap();
        let back = read_series(&path).unwrap();
        assert_eq!(series.samples, back.samples);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(SERIES_HEADER));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn empty_series_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        write_series(&MonitorSeries::default(), &path).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            format!("{SERIES_HEADER}\n")
        );
    }

    #[test]
    fn snapshot_has_comment_and_columns() {
        let cap = std::sync::Arc::new(igcf::build_cap(2, 1.0, 8, 16).unwrap());
        let snap = Snapshot {
            t: 0.25,
            phi: igcf::ScalarField::constant(cap, 0.0),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.csv");
        write_snapshot(&snap, 0.2, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# snapshot requested_t="));
        assert_eq!(lines.next().unwrap(), "r,theta,phi,u,K");
        assert_eq!(lines.count(), 8 * 16);
    }
}
