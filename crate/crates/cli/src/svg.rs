use bondscope::descriptors::Barcode;

const UNIT: f64 = 60.0;
const LEFT: f64 = 40.0;
const TOP: f64 = 40.0;
const ROW: f64 = 16.0;

/// Static bar chart of `barcode` over shells `0..=radius`, one bar per
/// interval copy.
pub fn barcode_svg(barcode: &Barcode, radius: u32, title: &str) -> String {
    let bars: Vec<(u32, u32)> = barcode
        .intervals()
        .iter()
        .flat_map(|&(a, b, m)| std::iter::repeat_n((a, b), m as usize))
        .collect();
    let width = LEFT * 2.0 + UNIT * radius as f64;
    let axis_y = TOP + ROW * bars.len().max(1) as f64 + 10.0;
    let height = axis_y + 40.0;
    let x = |s: u32| LEFT + UNIT * s as f64;

    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    );
    out.push_str(&format!(
        "  <text x=\"{LEFT}\" y=\"20\" font-family=\"sans-serif\" font-size=\"13\">{}</text>\n",
        escape(title)
    ));
    for (k, &(a, b)) in bars.iter().enumerate() {
        let y = TOP + ROW * k as f64;
        let (x0, w) = if a == b { (x(a) - 3.0, 6.0) } else { (x(a), x(b) - x(a)) };
        out.push_str(&format!(
            "  <rect class=\"bar\" data-interval=\"({a},{b})\" x=\"{x0}\" y=\"{y}\" width=\"{w}\" height=\"{}\" fill=\"#3465a4\"/>\n",
            ROW - 4.0
        ));
    }
    out.push_str(&format!(
        "  <line x1=\"{}\" y1=\"{axis_y}\" x2=\"{}\" y2=\"{axis_y}\" stroke=\"black\"/>\n",
        x(0),
        x(radius)
    ));
    for s in 0..=radius {
        out.push_str(&format!(
            "  <line x1=\"{0}\" y1=\"{axis_y}\" x2=\"{0}\" y2=\"{1}\" stroke=\"black\"/>\n  <text x=\"{0}\" y=\"{2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{s}</text>\n",
            x(s),
            axis_y + 5.0,
            axis_y + 18.0
        ));
    }
    out.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">shell</text>\n</svg>\n",
        (x(0) + x(radius)) / 2.0,
        axis_y + 34.0
    ));
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
