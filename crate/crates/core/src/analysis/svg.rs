//! Minimal static SVG renderings: line chart, grouped bar chart, and a
//! stacked heatmap pair. No dependencies, deterministic output, numeric
//! labels embedded so the files stand alone.

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 46.0;
const MARGIN_BOTTOM: f64 = 56.0;

const SERIES_COLORS: [&str; 4] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"];

pub struct Series<'a> {
    pub name: &'a str,
    pub points: Vec<(f64, f64)>,
}

fn header(out: &mut String, height: f64) {
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{height}\" viewBox=\"0 0 {WIDTH} {height}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
}

fn title_text(out: &mut String, title: &str) {
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    ));
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn fmt(v: f64) -> String {
    let s = format!("{v:.4}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Multi-series line chart; x ticks at each data point of the first series,
/// y axis spanning [0, 1] unless the data exceeds it.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_max = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.0))
        .fold(1.0f64, f64::max);
    let y_max = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1))
        .fold(1.0f64, f64::max);

    let sx = |x: f64| MARGIN_LEFT + x / x_max * plot_w;
    let sy = |y: f64| MARGIN_TOP + (1.0 - y / y_max) * plot_h;

    let mut out = String::new();
    header(&mut out, HEIGHT);
    title_text(&mut out, title);

    // axes
    out.push_str(&format!(
        "<line x1=\"{MARGIN_LEFT}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
        HEIGHT - MARGIN_BOTTOM,
        WIDTH - MARGIN_RIGHT,
        HEIGHT - MARGIN_BOTTOM
    ));
    out.push_str(&format!(
        "<line x1=\"{MARGIN_LEFT}\" y1=\"{MARGIN_TOP}\" x2=\"{MARGIN_LEFT}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
        HEIGHT - MARGIN_BOTTOM
    ));

    // y ticks at 0, .25, .5, .75, 1 of y_max
    for i in 0..=4 {
        let value = y_max * i as f64 / 4.0;
        let y = sy(value);
        out.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{MARGIN_LEFT}\" y2=\"{y:.1}\" stroke=\"black\"/>\n",
            MARGIN_LEFT - 4.0
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
            MARGIN_LEFT - 8.0,
            y + 4.0,
            fmt(value)
        ));
    }

    // x ticks from the first series' checkpoints
    if let Some(first) = series.first() {
        for &(x, _) in &first.points {
            let px = sx(x);
            out.push_str(&format!(
                "<line x1=\"{px:.1}\" y1=\"{:.1}\" x2=\"{px:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
                HEIGHT - MARGIN_BOTTOM,
                HEIGHT - MARGIN_BOTTOM + 4.0
            ));
            out.push_str(&format!(
                "<text x=\"{px:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
                HEIGHT - MARGIN_BOTTOM + 18.0,
                fmt(x)
            ));
        }
    }

    for (i, s) in series.iter().enumerate() {
        let color = SERIES_COLORS[i % SERIES_COLORS.len()];
        let path: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            path.join(" ")
        ));
        for &(x, y) in &s.points {
            out.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{color}\"/>\n",
                sx(x),
                sy(y)
            ));
        }
        // legend
        let ly = MARGIN_TOP + 16.0 * i as f64;
        out.push_str(&format!(
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"12\" height=\"12\" fill=\"{color}\"/>\n",
            MARGIN_LEFT + 12.0,
            ly
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            MARGIN_LEFT + 30.0,
            ly + 10.0,
            escape(s.name)
        ));
    }

    axis_labels(&mut out, x_label, y_label, HEIGHT);
    out.push_str("</svg>\n");
    out
}

fn axis_labels(out: &mut String, x_label: &str, y_label: &str, height: f64) {
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
        (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0,
        height - 14.0,
        escape(x_label)
    ));
    out.push_str(&format!(
        "<text x=\"18\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">{}</text>\n",
        (MARGIN_TOP + height - MARGIN_BOTTOM) / 2.0,
        (MARGIN_TOP + height - MARGIN_BOTTOM) / 2.0,
        escape(y_label)
    ));
}

/// Two series of counts side by side per integer bucket, count labels on top.
pub fn grouped_bar_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    buckets: &[u32],
    groups: &[(&str, &[u32])],
) -> String {
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let max_count = groups
        .iter()
        .flat_map(|(_, counts)| counts.iter().copied())
        .max()
        .unwrap_or(1)
        .max(1) as f64;

    let slot_w = plot_w / buckets.len().max(1) as f64;
    let bar_w = slot_w / (groups.len() as f64 + 1.0);

    let mut out = String::new();
    header(&mut out, HEIGHT);
    title_text(&mut out, title);
    out.push_str(&format!(
        "<line x1=\"{MARGIN_LEFT}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
        HEIGHT - MARGIN_BOTTOM,
        WIDTH - MARGIN_RIGHT,
        HEIGHT - MARGIN_BOTTOM
    ));

    for (b, &bucket) in buckets.iter().enumerate() {
        let x0 = MARGIN_LEFT + b as f64 * slot_w;
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{bucket}</text>\n",
            x0 + slot_w / 2.0,
            HEIGHT - MARGIN_BOTTOM + 18.0
        ));
        for (g, (_, counts)) in groups.iter().enumerate() {
            let count = counts.get(b).copied().unwrap_or(0);
            let h = count as f64 / max_count * plot_h;
            let x = x0 + bar_w * (0.5 + g as f64);
            let y = HEIGHT - MARGIN_BOTTOM - h;
            out.push_str(&format!(
                "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{bar_w:.1}\" height=\"{h:.1}\" fill=\"{}\"/>\n",
                SERIES_COLORS[g % SERIES_COLORS.len()]
            ));
            if count > 0 {
                out.push_str(&format!(
                    "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">{count}</text>\n",
                    x + bar_w / 2.0,
                    y - 3.0
                ));
            }
        }
    }

    for (g, (name, _)) in groups.iter().enumerate() {
        let ly = MARGIN_TOP + 16.0 * g as f64;
        out.push_str(&format!(
            "<rect x=\"{:.1}\" y=\"{ly:.1}\" width=\"12\" height=\"12\" fill=\"{}\"/>\n",
            WIDTH - MARGIN_RIGHT - 150.0,
            SERIES_COLORS[g % SERIES_COLORS.len()]
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            WIDTH - MARGIN_RIGHT - 132.0,
            ly + 10.0,
            escape(name)
        ));
    }

    axis_labels(&mut out, x_label, y_label, HEIGHT);
    out.push_str("</svg>\n");
    out
}

/// Two positional-frequency heatmaps stacked vertically (rows = positions,
/// columns = symbols), sharing one blue color scale.
pub fn heatmap_pair(
    title: &str,
    symbols: &[char],
    top_name: &str,
    top_rows: &[Vec<f64>],
    bottom_name: &str,
    bottom_rows: &[Vec<f64>],
) -> String {
    let k = symbols.len().max(1);
    let cell = ((WIDTH - MARGIN_LEFT - MARGIN_RIGHT) / k as f64).min(26.0);
    let gap = 54.0;
    let top_h = top_rows.len() as f64 * cell;
    let bottom_h = bottom_rows.len() as f64 * cell;
    let height = MARGIN_TOP + top_h + gap + bottom_h + MARGIN_BOTTOM;

    let max_value = top_rows
        .iter()
        .chain(bottom_rows.iter())
        .flat_map(|row| row.iter().copied())
        .fold(0.0f64, f64::max)
        .max(1e-12);

    let mut out = String::new();
    header(&mut out, height);
    title_text(&mut out, title);

    let draw_block = |name: &str, rows: &[Vec<f64>], y0: f64, out: &mut String| {
        out.push_str(&format!(
            "<text x=\"{MARGIN_LEFT}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"13\">{}</text>\n",
            y0 - 8.0,
            escape(name)
        ));
        for (r, row) in rows.iter().enumerate() {
            let y = y0 + r as f64 * cell;
            out.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
                MARGIN_LEFT - 6.0,
                y + cell * 0.65,
                r
            ));
            for (c, &value) in row.iter().enumerate() {
                let x = MARGIN_LEFT + c as f64 * cell;
                let intensity = (value / max_value).clamp(0.0, 1.0);
                let shade = (255.0 - intensity * 205.0) as u8;
                out.push_str(&format!(
                    "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{cell:.1}\" height=\"{cell:.1}\" fill=\"rgb({shade},{shade},255)\" stroke=\"#ddd\" stroke-width=\"0.5\"><title>{}</title></rect>\n",
                    fmt(value)
                ));
            }
        }
        for (c, &symbol) in symbols.iter().enumerate() {
            out.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{symbol}</text>\n",
                MARGIN_LEFT + c as f64 * cell + cell / 2.0,
                y0 + rows.len() as f64 * cell + 14.0
            ));
        }
    };

    draw_block(top_name, top_rows, MARGIN_TOP + 14.0, &mut out);
    draw_block(
        bottom_name,
        bottom_rows,
        MARGIN_TOP + 14.0 + top_h + gap,
        &mut out,
    );

    // color scale legend: 0 .. max
    let legend_y = height - 26.0;
    for i in 0..=10 {
        let shade = (255.0 - (i as f64 / 10.0) * 205.0) as u8;
        out.push_str(&format!(
            "<rect x=\"{:.1}\" y=\"{legend_y:.1}\" width=\"16\" height=\"10\" fill=\"rgb({shade},{shade},255)\"/>\n",
            MARGIN_LEFT + i as f64 * 16.0
        ));
    }
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"10\">0</text>\n",
        MARGIN_LEFT,
        legend_y - 3.0
    ));
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{}</text>\n",
        MARGIN_LEFT + 11.0 * 16.0,
        legend_y - 3.0,
        fmt(max_value)
    ));

    out.push_str("</svg>\n");
    out
}
