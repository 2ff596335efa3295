//! Space-time SVG of one port: quay meters across, hours downwards.

use std::fmt::Write as _;

use mcbap_core::model::{CallId, Instance, PortId, Solution};

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 720.0;
const LEFT: f64 = 70.0;
const TOP: f64 = 50.0;
const RIGHT: f64 = 170.0;
const BOTTOM: f64 = 30.0;

const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1", "#ff9da7", "#9c755f",
    "#86bcb6",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Hours shown on the time axis: up to the latest finish, end or LFT at the port.
fn time_extent(inst: &Instance, sol: &Solution, port: PortId) -> f64 {
    let mut t: f64 = 24.0;
    for (i, c) in inst.calls.iter().enumerate() {
        if c.port != port {
            continue;
        }
        t = t.max(c.lft);
        if let Some(a) = sol.get(CallId(i)) {
            t = t.max(inst.call_rect(CallId(i), a).end());
        }
    }
    for (e, ext) in inst.externals.iter().enumerate() {
        if ext.port == port {
            t = t.max(inst.external_rect(e).end());
        }
    }
    (t / 12.0).ceil() * 12.0
}

/// SVG of `port` with scheduled calls coloured per ship, external berths in
/// gray and EST / EFT / LFT ticks beside each scheduled call.
pub fn port_svg(inst: &Instance, sol: &Solution, port: PortId) -> String {
    let p = &inst.ports[port.0];
    let t_max = time_extent(inst, sol, port);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + x / p.quay_length * plot_w;
    let sy = |t: f64| TOP + t / t_max * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{LEFT}" y="20" font-size="14">{} ({} m quay)</text>"#,
        escape(&p.code),
        p.quay_length
    );

    // Axes and grid.
    let _ = writeln!(
        s,
        r#"<rect class="frame" x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    let x_tick = if p.quay_length > 1000.0 { 200.0 } else { 100.0 };
    let mut x = 0.0;
    while x <= p.quay_length + 1e-9 {
        let _ = writeln!(
            s,
            r##"<line class="grid" x1="{0:.1}" y1="{TOP}" x2="{0:.1}" y2="{1:.1}" stroke="#ddd"/><text x="{0:.1}" y="{2:.1}" text-anchor="middle">{3}</text>"##,
            sx(x),
            TOP + plot_h,
            TOP - 6.0,
            x
        );
        x += x_tick;
    }
    let t_tick = if t_max > 240.0 { 48.0 } else { 12.0 };
    let mut t = 0.0;
    while t <= t_max + 1e-9 {
        let _ = writeln!(
            s,
            r##"<line class="grid" x1="{LEFT}" y1="{0:.1}" x2="{1:.1}" y2="{0:.1}" stroke="#ddd"/><text x="{2:.1}" y="{3:.1}" text-anchor="end">{4}</text>"##,
            sy(t),
            LEFT + plot_w,
            LEFT - 6.0,
            sy(t) + 4.0,
            t
        );
        t += t_tick;
    }
    let _ = writeln!(
        s,
        r#"<text class="axis" x="{:.1}" y="{:.1}" text-anchor="middle">quay position (m)</text>"#,
        LEFT + plot_w / 2.0,
        TOP - 24.0
    );
    let _ = writeln!(
        s,
        r#"<text class="axis" x="18" y="{:.1}" transform="rotate(-90 18 {:.1})" text-anchor="middle">time (h)</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    for (e, ext) in inst.externals.iter().enumerate() {
        if ext.port != port {
            continue;
        }
        let r = inst.external_rect(e);
        let _ = writeln!(
            s,
            r##"<rect class="external" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#bbbbbb" stroke="#666"/><text x="{:.2}" y="{:.2}" fill="#333">E{}</text>"##,
            sx(r.x),
            sy(r.start),
            sx(r.x + r.length) - sx(r.x),
            sy(r.end()) - sy(r.start),
            sx(r.x) + 3.0,
            sy(r.start) + 12.0,
            e + 1
        );
    }

    for (i, call) in inst.calls.iter().enumerate() {
        if call.port != port {
            continue;
        }
        let Some(a) = sol.get(CallId(i)) else { continue };
        let r = inst.call_rect(CallId(i), a);
        let colour = PALETTE[call.ship.0 % PALETTE.len()];
        let (x0, x1) = (sx(r.x), sx(r.x + r.length));
        let _ = writeln!(
            s,
            r##"<rect class="call" x="{x0:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{colour}" fill-opacity="0.75" stroke="#222"/><text class="label" x="{:.2}" y="{:.2}">S{}.{}</text>"##,
            sy(r.start),
            x1 - x0,
            sy(r.end()) - sy(r.start),
            x0 + 3.0,
            sy(r.start) + 12.0,
            call.ship.0 + 1,
            call.call_index
        );
        for (t, stroke, dash) in [(call.est, "#2a9d8f", ""), (call.eft, "#e9c46a", "4 2"), (call.lft, "#d62828", "2 2")] {
            let _ = writeln!(
                s,
                r#"<line class="marker" x1="{x0:.2}" y1="{0:.2}" x2="{x1:.2}" y2="{0:.2}" stroke="{stroke}" stroke-width="2" stroke-dasharray="{dash}"/>"#,
                sy(t)
            );
        }
    }

    let lx = WIDTH - RIGHT + 15.0;
    for (k, (fill, text)) in [("#4e79a7", "optimized ship"), ("#bbbbbb", "external ship")].iter().enumerate() {
        let y = TOP + 20.0 * k as f64;
        let _ = writeln!(
            s,
            r##"<rect x="{lx}" y="{y}" width="14" height="12" fill="{fill}" stroke="#222"/><text x="{}" y="{}">{text}</text>"##,
            lx + 20.0,
            y + 10.0
        );
    }
    for (k, (stroke, text, dash)) in [("#2a9d8f", "EST", ""), ("#e9c46a", "EFT", "4 2"), ("#d62828", "LFT", "2 2")]
        .iter()
        .enumerate()
    {
        let y = TOP + 46.0 + 20.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{y}" x2="{}" y2="{y}" stroke="{stroke}" stroke-width="2" stroke-dasharray="{dash}"/><text x="{}" y="{}">{text}</text>"#,
            lx + 14.0,
            lx + 20.0,
            y + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}
