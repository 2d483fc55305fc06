//! Deterministic file output (CSV / JSON frames, diagnostics, manifest) and
//! the sampled-curve input formats.
//!
//! Floats are serialized as shortest round-trip decimals (Rust's `Display`),
//! so identical runs produce byte-identical artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::curve::{periodic_interpolate, PeriodicLoop, PiecewiseLinearLoop, VelocityField};
use crate::dalembert::StringState;
use crate::diagnostics::DiagnosticsReport;
use crate::error::{Error, Result};

/// Shortest round-trip decimal for a float (NaN spelled out for CSV).
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x}")
    }
}

/// One frame as CSV: columns x, gamma_1..n, gammat_1..n, gammax_1..n.
pub fn frame_csv(state: &StringState) -> String {
    let dim = state.dim();
    let mut s = String::new();
    s.push('x');
    for (prefix, _) in [("gamma", 0), ("gammat", 1), ("gammax", 2)] {
        for d in 1..=dim {
            let _ = write!(s, ",{prefix}_{d}");
        }
    }
    s.push('\n');
    for k in 0..state.n_nodes() {
        s.push_str(&fmt_f64(state.node(k)));
        for row in [state.gamma(k), state.gamma_t(k), state.gamma_x(k)] {
            for v in row {
                s.push(',');
                s.push_str(&fmt_f64(*v));
            }
        }
        s.push('\n');
    }
    s
}

/// One frame as JSON (column arrays).
pub fn frame_json(state: &StringState) -> String {
    let n = state.n_nodes();
    let xs: Vec<f64> = (0..n).map(|k| state.node(k)).collect();
    let collect = |f: &dyn Fn(usize) -> Vec<f64>| -> Vec<Vec<f64>> { (0..n).map(f).collect() };
    let obj = serde_json::json!({
        "t": state.t,
        "x": xs,
        "gamma": collect(&|k| state.gamma(k).to_vec()),
        "gamma_t": collect(&|k| state.gamma_t(k).to_vec()),
        "gamma_x": collect(&|k| state.gamma_x(k).to_vec()),
    });
    serde_json::to_string(&obj).expect("frame serializes")
}

/// diagnostics.csv: header plus one row per report, in frame order.
pub fn diagnostics_csv(reports: &[DiagnosticsReport]) -> String {
    let mut s = String::from(DiagnosticsReport::CSV_HEADER);
    s.push('\n');
    for r in reports {
        let cols = [
            r.t,
            r.conserved_energy,
            r.area_density_integral,
            r.max_orthogonality_residual,
            r.max_unitnorm_residual,
            r.max_el_residual,
            r.max_geometric_residual,
            r.min_speed,
            r.max_normal_velocity,
        ];
        let row: Vec<String> = cols.iter().map(|v| fmt_f64(*v)).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// Read a sampled-curve CSV: header `s,x1..xn[,v1..vn]`, uniform s grid over
/// one period; the period is the grid extent plus one spacing.
pub fn read_curve_csv(path: &Path) -> Result<(PeriodicLoop, VelocityField)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Config("empty curve file".into()))?;
    let cols: Vec<&str> = header.split(',').map(|c| c.trim()).collect();
    if cols.first() != Some(&"s") {
        return Err(Error::Config("curve file must start with column 's'".into()));
    }
    let nx = cols.iter().filter(|c| c.starts_with('x')).count();
    let nv = cols.iter().filter(|c| c.starts_with('v')).count();
    if nx < 2 || (nv != 0 && nv != nx) || cols.len() != 1 + nx + nv {
        return Err(Error::Config(format!(
            "curve file needs columns s,x1..xn[,v1..vn]; got {header}"
        )));
    }
    let mut svals = Vec::new();
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (ln, line) in lines.enumerate() {
        let vals: Vec<f64> = line
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("row {}: {e}", ln + 2)))
            })
            .collect::<Result<_>>()?;
        if vals.len() != cols.len() {
            return Err(Error::Config(format!("row {} has wrong arity", ln + 2)));
        }
        svals.push(vals[0]);
        xs.extend_from_slice(&vals[1..1 + nx]);
        if nv > 0 {
            vs.extend_from_slice(&vals[1 + nx..]);
        }
    }
    let n = svals.len();
    if n < 8 {
        return Err(Error::TooFewSamples { got: n, need: 8 });
    }
    let h = svals[1] - svals[0];
    for w in svals.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1.0) {
            return Err(Error::Config("curve file grid must be uniform".into()));
        }
    }
    let period = svals[n - 1] - svals[0] + h;
    let curve = periodic_interpolate(&xs, nx, period)?;
    let velocity = if nv == 0 {
        VelocityField::zero(nx, period)
    } else {
        VelocityField::new(periodic_interpolate(&vs, nx, period)?)?
    };
    Ok((curve, velocity))
}

/// Read a piecewise-linear loop as vertex rows `s,x1..xn`; the last row must
/// repeat the first vertex at s = period.
pub fn read_polyline_csv(path: &Path) -> Result<PiecewiseLinearLoop> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Config("empty polyline file".into()))?;
    let ncols = header.split(',').count();
    if ncols < 3 {
        return Err(Error::Config("polyline file needs s,x1..xn".into()));
    }
    let mut breaks = Vec::new();
    let mut verts: Vec<Vec<f64>> = Vec::new();
    for (ln, line) in lines.enumerate() {
        let vals: Vec<f64> = line
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("row {}: {e}", ln + 2)))
            })
            .collect::<Result<_>>()?;
        if vals.len() != ncols {
            return Err(Error::Config(format!("row {} has wrong arity", ln + 2)));
        }
        breaks.push(vals[0]);
        verts.push(vals[1..].to_vec());
    }
    if breaks.len() < 3 {
        return Err(Error::Config("polyline needs at least 2 segments".into()));
    }
    // last row closes the loop
    let last = verts.pop().unwrap();
    let gap: f64 = last
        .iter()
        .zip(&verts[0])
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    if gap > 1e-9 {
        return Err(Error::Config(format!(
            "polyline last row must repeat the first vertex (gap {gap:.3e})"
        )));
    }
    PiecewiseLinearLoop::from_vertices(breaks, verts)
}

/// Write a string to a file, creating parent directories.
pub fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, content)?;
    Ok(())
}

/// manifest.json body: effective config echo, library version, expected facts.
pub fn manifest_json(
    config_echo: &serde_json::Value,
    scenario: Option<&crate::scenarios::ScenarioSpec>,
) -> String {
    let obj = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": config_echo,
        "scenario": scenario,
    });
    let mut s = serde_json::to_string_pretty(&obj).expect("manifest serializes");
    s.push('\n');
    s
}

/// Parse `key=value` CLI parameter pairs.
pub fn parse_params(pairs: &[String]) -> Result<BTreeMap<String, f64>> {
    let mut map = BTreeMap::new();
    for p in pairs {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("parameter '{p}' must be key=value")))?;
        let val = v
            .trim()
            .parse::<f64>()
            .map_err(|e| Error::Config(format!("parameter '{p}': {e}")))?;
        map.insert(k.trim().to_string(), val);
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dalembert::evaluate_state;
    use crate::scenarios;

    #[test]
    fn frame_csv_is_deterministic() {
        let pair = scenarios::circle(1.0);
        let st = evaluate_state(&pair, 0.3, 16);
        let a = frame_csv(&st);
        let b = frame_csv(&st);
        assert_eq!(a, b);
        assert!(a.starts_with("x,gamma_1,gamma_2,gammat_1,gammat_2,gammax_1,gammax_2\n"));
        assert_eq!(a.lines().count(), 17);
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2.0_f64.powi(-40), std::f64::consts::PI] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }

    #[test]
    fn curve_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        let n = 16;
        let mut text = String::from("s,x1,x2\n");
        for k in 0..n {
            let s = k as f64 / n as f64;
            let _ = writeln!(
                text,
                "{s},{},{}",
                (2.0 * std::f64::consts::PI * s).cos(),
                (2.0 * std::f64::consts::PI * s).sin()
            );
        }
        fs::write(&path, &text).unwrap();
        let (curve, velocity) = read_curve_csv(&path).unwrap();
        assert_eq!(curve.dim(), 2);
        assert!((curve.period() - 1.0).abs() < 1e-12);
        assert!(velocity.is_zero());
    }

    #[test]
    fn polyline_csv_reads_square() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let text = "s,x1,x2\n0,-0.5,-0.5\n1,0.5,-0.5\n2,0.5,0.5\n3,-0.5,0.5\n4,-0.5,-0.5\n";
        fs::write(&path, text).unwrap();
        let pl = read_polyline_csv(&path).unwrap();
        assert_eq!(pl.segments(), 4);
        assert_eq!(pl.period(), 4.0);
        assert_eq!(pl.slope(0), &[1.0, 0.0]);
    }

    #[test]
    fn params_parse() {
        let m = parse_params(&["R=2.5".into(), "n=8".into()]).unwrap();
        assert_eq!(m["R"], 2.5);
        assert_eq!(m["n"], 8.0);
        assert!(parse_params(&["bad".into()]).is_err());
    }
}
