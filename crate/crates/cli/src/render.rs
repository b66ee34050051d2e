//! SVG rendering of a placement.

use std::fmt::Write as _;

use macroplace::{Netlist, NodeKind, Placement};

pub const MACRO_FILL: &str = "red";
pub const CELL_FILL: &str = "green";
pub const PAD_FILL: &str = "gray";

/// Fixed-point with at most six decimals, trailing zeros trimmed, no negative zero.
pub fn fmt_num(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".to_string() } else { s.to_string() }
}

/// One rectangle per placed node with non-zero area, cells below macros, and the canvas
/// outline on top. The view box is the canvas with y pointing up.
pub fn render_svg(netlist: &Netlist, placement: Option<&Placement>) -> String {
    let c = netlist.canvas();
    let (w, h) = (fmt_num(c.width), fmt_num(c.height));
    let stroke = fmt_num(c.width.max(c.height) / 500.0);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w} {h}" width="{w}" height="{h}">"#
    );
    let _ = writeln!(out, r#"<g transform="matrix(1 0 0 -1 0 {h})">"#);
    if let Some(pl) = placement {
        let layers = [
            (NodeKind::StdCell, CELL_FILL),
            (NodeKind::FixedPad, PAD_FILL),
            (NodeKind::Macro, MACRO_FILL),
        ];
        for (kind, fill) in layers {
            for (i, node) in netlist.nodes().iter().enumerate() {
                if node.kind != kind || node.area() <= 0.0 || !pl.pos(i).is_finite() {
                    continue;
                }
                let r = pl.rect(netlist, i);
                let _ = writeln!(
                    out,
                    r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}"><title>{}</title></rect>"#,
                    fmt_num(r.x_lo),
                    fmt_num(r.y_lo),
                    fmt_num(r.width()),
                    fmt_num(r.height()),
                    escape(&node.name)
                );
            }
        }
    }
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{w}" height="{h}" fill="none" stroke="black" stroke-width="{stroke}"/>"#
    );
    out.push_str("</g>\n</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
