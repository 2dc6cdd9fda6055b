//! Minimal SVG rendering for decomposition stacks and sweep curves.

use crate::decompose::Decomposition;
use crate::experiments::SweepRow;

const WIDTH: f64 = 960.0;
const ROW_HEIGHT: f64 = 90.0;
const MARGIN: f64 = 40.0;

fn polyline(samples: &[f64], y_top: f64, height: f64) -> String {
    let n = samples.len().max(2);
    let min = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if max > min { max - min } else { 1.0 };
    let points: Vec<String> = samples
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let x = MARGIN + (WIDTH - 2.0 * MARGIN) * i as f64 / (n - 1) as f64;
            let y = y_top + height - height * (v - min) / span;
            format!("{x:.1},{y:.1}")
        })
        .collect();
    format!(
        "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1\" points=\"{}\"/>",
        points.join(" ")
    )
}

fn text(x: f64, y: f64, label: &str) -> String {
    format!("<text x=\"{x:.1}\" y=\"{y:.1}\" font-size=\"12\" font-family=\"sans-serif\">{label}</text>")
}

/// Stacked plot of the input signal, every mode, and the residue.
pub fn decomposition_svg(original: &[f64], decomp: &Decomposition) -> String {
    let rows = decomp.imfs.len() + 2;
    let height = rows as f64 * ROW_HEIGHT + 2.0 * MARGIN;
    let mut body = String::new();
    let mut y = MARGIN;
    body.push_str(&text(MARGIN, y - 6.0, "input"));
    body.push_str(&polyline(original, y, ROW_HEIGHT - 20.0));
    y += ROW_HEIGHT;
    for (k, imf) in decomp.imfs.iter().enumerate() {
        body.push_str(&text(MARGIN, y - 6.0, &format!("imf {}", k + 1)));
        body.push_str(&polyline(imf, y, ROW_HEIGHT - 20.0));
        y += ROW_HEIGHT;
    }
    body.push_str(&text(MARGIN, y - 6.0, "residue"));
    body.push_str(&polyline(&decomp.residue, y, ROW_HEIGHT - 20.0));
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{height:.0}\" viewBox=\"0 0 {WIDTH} {height:.0}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}\n</svg>\n"
    )
}

/// ECM of the aggregate rows against the swept axis (nr when it varies,
/// otherwise nstd).
pub fn sweep_svg(rows: &[SweepRow]) -> String {
    let aggregates: Vec<&SweepRow> = rows
        .iter()
        .filter(|r| r.signal_id.starts_with("mean[") && r.ecm.is_some())
        .collect();
    let nr_values: std::collections::BTreeSet<_> = aggregates.iter().filter_map(|r| r.nr).collect();
    let sweep_nr = nr_values.len() > 1;
    let mut points: Vec<(f64, f64, String)> = aggregates
        .iter()
        .map(|r| {
            let x = if sweep_nr {
                r.nr.unwrap_or(0) as f64
            } else {
                r.nstd.unwrap_or(0.0)
            };
            (x, r.ecm.unwrap(), r.criterion.clone())
        })
        .collect();
    points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let height = 480.0;
    let mut body = String::new();
    let axis = if sweep_nr { "NR" } else { "Nstd" };
    body.push_str(&text(WIDTH / 2.0, height - 8.0, axis));
    body.push_str(&text(8.0, MARGIN, "ECM"));
    if !points.is_empty() {
        let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
        let (x_min, x_max) = (
            xs.iter().cloned().fold(f64::INFINITY, f64::min),
            xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        );
        let (y_min, y_max) = (
            ys.iter().cloned().fold(f64::INFINITY, f64::min),
            ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        );
        let x_span = if x_max > x_min { x_max - x_min } else { 1.0 };
        let y_span = if y_max > y_min { y_max - y_min } else { 1.0 };
        let mut coords = Vec::new();
        for (x, y, _) in &points {
            let px = MARGIN + (WIDTH - 2.0 * MARGIN) * (x - x_min) / x_span;
            let py = height - MARGIN - (height - 2.0 * MARGIN) * (y - y_min) / y_span;
            coords.push(format!("{px:.1},{py:.1}"));
            body.push_str(&format!(
                "<circle cx=\"{px:.1}\" cy=\"{py:.1}\" r=\"3\" fill=\"#d62728\"/>"
            ));
        }
        body.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"{}\"/>",
            coords.join(" ")
        ));
    }
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{height:.0}\" viewBox=\"0 0 {WIDTH} {height:.0}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}\n</svg>\n"
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::emd;
    use crate::experiments::gen_two_tone;
    use crate::sifting::StopCriterion;

    #[test]
    fn decomposition_svg_is_well_formed() {
        let s = gen_two_tone(5.0, 40.0, 400.0, 2.0, (1.0, 1.0)).unwrap();
        let d = emd(&s, &StopCriterion::dual_threshold_defaults(), None).unwrap();
        let svg = decomposition_svg(s.samples(), &d);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.matches("<polyline").count() >= d.imf_count() + 2);
    }
}
