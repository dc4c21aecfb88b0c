//! SVG rendering of a trace: an `x` marker per block, the expected blocktime
//! `1/rate` as a step line, block index on x, log10 blocktime on y.
//!
//! The output is self-contained and is also the interface the figure tests
//! parse: markers carry `class="marker"`, the line `class="rate-line"`, and
//! every y tick a `data-value` attribute, so the log mapping can be inverted
//! without pixel comparisons.

use std::fs;
use std::path::Path;

use crate::format::format_sig;
use crate::trace_io::TraceRow;

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 540.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 20.0;
const MARGIN_BOTTOM: f64 = 50.0;

pub fn write_plot_svg(path: &Path, rows: &[TraceRow]) -> Result<(), String> {
    let svg = render(rows);
    fs::write(path, svg).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn render(rows: &[TraceRow]) -> String {
    let n = rows.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for r in rows {
        lo = lo.min(r.blocktime).min(1.0 / r.rate);
        hi = hi.max(r.blocktime).max(1.0 / r.rate);
    }
    // decade-aligned log range, at least one decade wide
    let mut log_lo = lo.log10().floor();
    let mut log_hi = hi.log10().ceil();
    if log_hi <= log_lo {
        log_lo -= 1.0;
        log_hi += 1.0;
    }

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_px = |index: u64| -> f64 {
        if n == 1 {
            return MARGIN_LEFT + plot_w / 2.0;
        }
        MARGIN_LEFT + (index as f64 - 1.0) / (n as f64 - 1.0) * plot_w
    };
    let y_px = |v: f64| -> f64 {
        MARGIN_TOP + (log_hi - v.log10()) / (log_hi - log_lo) * plot_h
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" data-y-scale=\"log10\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // axes
    let x0 = MARGIN_LEFT;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y0 = MARGIN_TOP;
    let y1 = HEIGHT - MARGIN_BOTTOM;
    svg.push_str(&format!(
        "<path d=\"M {x0} {y0} L {x0} {y1} L {x1} {y1}\" fill=\"none\" stroke=\"black\"/>\n"
    ));

    // y ticks at every decade
    let mut decade = log_lo as i64;
    while decade <= log_hi as i64 {
        let v = 10f64.powi(decade as i32);
        let y = y_px(v);
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{x0}\" y2=\"{y:.2}\" stroke=\"black\"/>\n",
            x0 - 5.0
        ));
        svg.push_str(&format!(
            "<text class=\"y-tick\" x=\"{:.2}\" y=\"{y:.2}\" text-anchor=\"end\" \
             dominant-baseline=\"middle\" font-size=\"12\" data-value=\"{}\">1e{decade}</text>\n",
            x0 - 8.0,
            format_sig(v)
        ));
        decade += 1;
    }

    // a handful of x ticks at round block indices
    let step = ((n as f64 / 5.0).max(1.0)).round() as u64;
    let mut index = 1;
    while index <= n as u64 {
        let x = x_px(index);
        svg.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{y1}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
            y1 + 5.0
        ));
        svg.push_str(&format!(
            "<text class=\"x-tick\" x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\" \
             font-size=\"12\" data-value=\"{index}\">{index}</text>\n",
            y1 + 18.0
        ));
        index += step;
    }
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"14\">block index</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"14\" \
         transform=\"rotate(-90 16 {:.2})\">blocktime</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    ));

    // faint rule at each retarget boundary
    for pair in rows.windows(2) {
        if pair[1].period != pair[0].period {
            let x = (x_px(pair[0].block_index) + x_px(pair[1].block_index)) / 2.0;
            svg.push_str(&format!(
                "<line class=\"period-boundary\" x1=\"{x:.2}\" y1=\"{y0}\" x2=\"{x:.2}\" \
                 y2=\"{y1}\" stroke=\"#dddddd\"/>\n"
            ));
        }
    }

    // expected blocktime 1/rate, constant within each period
    let points: Vec<String> = rows
        .iter()
        .map(|r| format!("{:.2},{:.2}", x_px(r.block_index), y_px(1.0 / r.rate)))
        .collect();
    svg.push_str(&format!(
        "<polyline class=\"rate-line\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" \
         points=\"{}\"/>\n",
        points.join(" ")
    ));

    // one x marker per block
    svg.push_str("<g class=\"markers\" stroke=\"#1f77b4\" stroke-width=\"1\">\n");
    for r in rows {
        let x = x_px(r.block_index);
        let y = y_px(r.blocktime);
        svg.push_str(&format!(
            "<path class=\"marker\" d=\"M {:.2} {:.2} L {:.2} {:.2} M {:.2} {:.2} L {:.2} {:.2}\"/>\n",
            x - 3.0,
            y - 3.0,
            x + 3.0,
            y + 3.0,
            x - 3.0,
            y + 3.0,
            x + 3.0,
            y - 3.0
        ));
    }
    svg.push_str("</g>\n</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows() -> Vec<TraceRow> {
        (1..=6)
            .map(|i| TraceRow {
                block_index: i,
                period: (i as u32 - 1) / 3 + 1,
                blocktime: 2.0 * i as f64,
                rate: if i <= 3 { 0.1 } else { 0.2 },
            })
            .collect()
    }

    #[test]
    fn emits_one_marker_per_row_and_a_rate_line() {
        let svg = render(&rows());
        assert_eq!(svg.matches("class=\"marker\"").count(), 6);
        assert_eq!(svg.matches("class=\"rate-line\"").count(), 1);
        assert_eq!(svg.matches("class=\"period-boundary\"").count(), 1);
        assert!(svg.contains("data-y-scale=\"log10\""));
        assert!(svg.contains("class=\"y-tick\""));
    }

    #[test]
    fn y_ticks_span_the_data_in_decades() {
        let svg = render(&rows());
        // data spans 2..12 and the rate line 5..10, so decades 1e0..1e2
        assert!(svg.contains("data-value=\"1\""));
        assert!(svg.contains("data-value=\"10\""));
        assert!(svg.contains("data-value=\"100\""));
    }
}
