use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use macfb_core::RegionCloud;
use tempfile::NamedTempFile;

use crate::CliError;

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a half-written file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Config(format!("cannot write {}: {e}", path.display()));
    let mut tmp = NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Seventeen significant digits: enough to round-trip any `f64`.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn region_csv(cloud: &RegionCloud) -> String {
    let mut out = String::from("r1,r2,is_hull_vertex,sample_index\n");
    for p in &cloud.points {
        let index = p.sample.map(|i| i.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{index}",
            float(p.r1),
            float(p.r2),
            cloud.is_hull_vertex(p)
        );
    }
    out
}

/// A static scatter of the emitted points with the hull outlined.
pub fn region_svg(cloud: &RegionCloud) -> String {
    const SIZE: f64 = 480.0;
    const MARGIN: f64 = 56.0;
    let span = cloud.max_r1().max(cloud.max_r2()).max(1e-9) * 1.05;
    let plot = SIZE - 2.0 * MARGIN;
    let px = |r1: f64| MARGIN + r1 / span * plot;
    let py = |r2: f64| SIZE - MARGIN - r2 / span * plot;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, y0) = (px(0.0), py(0.0));
    let _ = writeln!(
        s,
        r#"<path d="M{x0:.2} {:.2} V{y0:.2} H{:.2}" stroke="black" fill="none"/>"#,
        py(span),
        px(span)
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">R1 (bits)</text>"#,
        SIZE / 2.0,
        SIZE - MARGIN / 3.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14" transform="rotate(-90 {:.2} {:.2})">R2 (bits)</text>"#,
        MARGIN / 3.0,
        SIZE / 2.0,
        MARGIN / 3.0,
        SIZE / 2.0
    );
    for (label, x, y, anchor) in [
        (format!("{span:.3}"), px(span), y0 + 18.0, "middle"),
        (format!("{span:.3}"), x0 - 6.0, py(span) + 4.0, "end"),
        ("0".to_string(), x0 - 6.0, y0 + 18.0, "end"),
    ] {
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}" font-size="11">{label}</text>"#
        );
    }
    for p in cloud.points.iter().filter(|p| p.sample.is_some()) {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="1.5" fill="steelblue" fill-opacity="0.5"/>"#,
            px(p.r1),
            py(p.r2)
        );
    }
    if cloud.hull.len() > 1 {
        let pts: Vec<String> = cloud
            .hull
            .iter()
            .map(|&(a, b)| format!("{:.2},{:.2}", px(a), py(b)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="none" stroke="firebrick" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
    }
    s.push_str("</svg>\n");
    s
}
