use std::fmt::Write;

use super::SimilarityMatrix;

/// Square CSV: header row and first column hold text ids, cells hold scores to 6 decimals.
pub fn matrix_csv(matrix: &SimilarityMatrix) -> String {
    let mut out = String::from("text");
    for t in &matrix.texts {
        out.push(',');
        out.push_str(&csv_field(t.as_str()));
    }
    out.push('\n');
    for (i, t) in matrix.texts.iter().enumerate() {
        out.push_str(&csv_field(t.as_str()));
        for j in 0..matrix.len() {
            write!(out, ",{:.6}", matrix.cell(i, j).score).unwrap();
        }
        out.push('\n');
    }
    out
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// White at 0, pure red at 1.
pub(crate) fn ramp(score: f64) -> String {
    let fade = (255.0 * (1.0 - score.clamp(0.0, 1.0))).round() as u8;
    format!("#ff{fade:02x}{fade:02x}")
}

const CELL: usize = 24;
const LABEL: usize = 160;
const LEGEND_STEPS: usize = 10;

/// Heatmap of `matrix` as a standalone SVG document.
///
/// `labels` supplies row/column captions in matrix order (text titles).
pub fn heatmap_svg(matrix: &SimilarityMatrix, labels: &[String]) -> String {
    let n = matrix.len();
    let grid = n * CELL;
    let legend_y = LABEL + grid + 30;
    let width = LABEL + grid.max(LEGEND_STEPS * CELL) + 20;
    let height = legend_y + CELL + 30;
    let label = |i: usize| {
        xml_escape(
            labels
                .get(i)
                .map(String::as_str)
                .unwrap_or(matrix.texts[i].as_str()),
        )
    };

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(
        svg,
        r#"<title>{} similarity for tag {}</title>"#,
        xml_escape(matrix.project.as_str()),
        xml_escape(matrix.tag.as_str())
    )
    .unwrap();
    for i in 0..n {
        let c = LABEL + i * CELL + CELL / 2;
        let r = LABEL + i * CELL + CELL / 2 + 4;
        writeln!(
            svg,
            r#"<text x="{}" y="{r}" text-anchor="end">{}</text>"#,
            LABEL - 6,
            label(i)
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{c}" y="{}" text-anchor="start" transform="rotate(-60 {c} {})">{}</text>"#,
            LABEL - 6,
            LABEL - 6,
            label(i)
        )
        .unwrap();
    }
    for i in 0..n {
        for j in 0..n {
            let score = matrix.cell(i, j).score;
            writeln!(
                svg,
                r#"<rect x="{}" y="{}" width="{CELL}" height="{CELL}" fill="{}"><title>{} / {}: {score:.6}</title></rect>"#,
                LABEL + j * CELL,
                LABEL + i * CELL,
                ramp(score),
                label(i),
                label(j)
            )
            .unwrap();
        }
    }
    writeln!(svg, r#"<g class="legend">"#).unwrap();
    for k in 0..=LEGEND_STEPS {
        let score = k as f64 / LEGEND_STEPS as f64;
        writeln!(
            svg,
            r##"<rect x="{}" y="{legend_y}" width="{CELL}" height="{CELL}" fill="{}" stroke="#999" stroke-width="0.5"/>"##,
            LABEL + k * CELL,
            ramp(score)
        )
        .unwrap();
    }
    writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="start">0</text><text x="{}" y="{}" text-anchor="end">1</text>"#,
        LABEL,
        legend_y + CELL + 14,
        LABEL + (LEGEND_STEPS + 1) * CELL,
        legend_y + CELL + 14
    )
    .unwrap();
    writeln!(svg, "</g>\n</svg>").unwrap();
    svg
}
