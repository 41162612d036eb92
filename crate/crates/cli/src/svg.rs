//! Plain SVG plots of quantile grids and densities.

use std::fmt::Write;

use mmdflow_core::{PiecewiseDensity, QuantileGrid};

const W: f64 = 640.0;
const H: f64 = 400.0;
const M: f64 = 50.0;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let pad = |a: f64, b: f64| if b > a { (a, b) } else { (a - 0.5, a + 0.5) };
        let (x0, x1) = pad(x0, x1);
        let (y0, y1) = pad(y0, y1);
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        M + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * M)
    }

    fn py(&self, y: f64) -> f64 {
        H - M - (y.min(self.y1) - self.y0) / (self.y1 - self.y0) * (H - 2.0 * M)
    }
}

fn open(out: &mut String, title: &str, f: &Frame, xlabel: &str, ylabel: &str) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{cx}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{title}</text>\n\
         <path d=\"M{M} {top} V{bot} H{right}\" fill=\"none\" stroke=\"black\"/>\n",
        cx = W / 2.0,
        top = M,
        bot = H - M,
        right = W - M,
        title = escape(title),
    );
    let label = |out: &mut String, x: f64, y: f64, anchor: &str, text: String| {
        let _ = writeln!(
            out,
            "<text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"{anchor}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>",
            escape(&text)
        );
    };
    label(out, M, H - M + 16.0, "start", format!("{:.4}", f.x0));
    label(out, W - M, H - M + 16.0, "end", format!("{:.4}", f.x1));
    label(out, W / 2.0, H - 12.0, "middle", xlabel.to_string());
    label(out, M - 4.0, H - M, "end", format!("{:.3}", f.y0));
    label(out, M - 4.0, M + 4.0, "end", format!("{:.3}", f.y1));
    label(out, M - 4.0, H / 2.0, "end", ylabel.to_string());
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Polyline of `s ↦ g(s)`.
pub fn quantile_svg(g: &QuantileGrid, title: &str) -> String {
    let v = g.values();
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let f = Frame::new(0.0, 1.0, lo, hi);
    let mut out = String::new();
    open(&mut out, title, &f, "s", "g");
    out.push_str("<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"");
    for (i, &y) in v.iter().enumerate() {
        let _ = write!(out, "{:.2},{:.2} ", f.px(g.midpoint(i)), f.py(y));
    }
    out.push_str("\"/>\n</svg>\n");
    out
}

/// Filled step area for the density pieces and a spike per atom. Spike
/// heights are the atom masses on the right-hand scale `[0, 1]`.
pub fn density_svg(d: &PiecewiseDensity, title: &str) -> String {
    let xs = d
        .pieces
        .iter()
        .flat_map(|p| [p.x_lo, p.x_hi])
        .chain(d.atoms.iter().map(|a| a.0));
    let (x0, x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
        (a.min(x), b.max(x))
    });
    let (x0, x1) = if x0.is_finite() { (x0, x1) } else { (0.0, 1.0) };

    // the density can blow up next to atoms; the vertical range covers the
    // pieces holding 99% of the continuous mass and clips the rest
    let mut by_height: Vec<(f64, f64)> = d.pieces.iter().map(|p| (p.density, p.mass())).collect();
    by_height.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = by_height.iter().map(|p| p.1).sum();
    let mut acc = 0.0;
    let mut ymax = 0.0;
    for (h, m) in &by_height {
        ymax = *h;
        acc += m;
        if acc >= 0.99 * total {
            break;
        }
    }
    let ymax = if ymax > 0.0 { 1.1 * ymax } else { 1.0 };
    let f = Frame::new(x0, x1, 0.0, ymax);
    let mut out = String::new();
    open(&mut out, title, &f, "x", "density");

    if !d.pieces.is_empty() {
        let base = f.py(0.0);
        let _ = write!(
            out,
            "<path fill=\"lightsteelblue\" stroke=\"steelblue\" d=\""
        );
        let mut pen: Option<f64> = None;
        for p in &d.pieces {
            let (a, b, y) = (f.px(p.x_lo), f.px(p.x_hi), f.py(p.density));
            match pen {
                Some(end) if (end - a).abs() < 1e-9 => {}
                Some(_) => {
                    let _ = write!(out, "V{base:.2} Z ");
                    let _ = write!(out, "M{a:.2} {base:.2} ");
                }
                None => {
                    let _ = write!(out, "M{a:.2} {base:.2} ");
                }
            }
            let _ = write!(out, "V{y:.2} H{b:.2} ");
            pen = Some(b);
        }
        let _ = writeln!(out, "V{base:.2} Z\"/>");
    }
    for &(x, m) in &d.atoms {
        let px = f.px(x);
        let top = H - M - m.clamp(0.0, 1.0) * (H - 2.0 * M);
        let _ = writeln!(
            out,
            "<line x1=\"{px:.2}\" y1=\"{:.2}\" x2=\"{px:.2}\" y2=\"{top:.2}\" stroke=\"firebrick\" stroke-width=\"2\"/>\n\
             <circle cx=\"{px:.2}\" cy=\"{top:.2}\" r=\"3\" fill=\"firebrick\"/>\n\
             <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\" fill=\"firebrick\">{m:.4}</text>",
            H - M,
            px + 4.0,
            top - 4.0,
        );
    }
    out.push_str("</svg>\n");
    out
}
