//! Minimal SVG phase portraits of the unit square.

use std::fmt::Write;

const SIZE: f64 = 800.0;
const MARGIN: f64 = 0.05 * SIZE;
const SPAN: f64 = SIZE - 2.0 * MARGIN;

fn px(u: [f64; 2]) -> (f64, f64) {
    (MARGIN + u[0] * SPAN, SIZE - MARGIN - u[1] * SPAN)
}

pub struct Canvas {
    body: String,
}

impl Canvas {
    pub fn new() -> Self {
        let mut body = String::new();
        let _ = write!(
            body,
            concat!(
                "<defs><clipPath id=\"square\"><rect x=\"{m:.2}\" y=\"{m:.2}\" width=\"{s:.2}\" height=\"{s:.2}\"/></clipPath></defs>\n",
                "<rect x=\"0\" y=\"0\" width=\"{w:.0}\" height=\"{w:.0}\" fill=\"white\"/>\n",
                "<rect x=\"{m:.2}\" y=\"{m:.2}\" width=\"{s:.2}\" height=\"{s:.2}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n"
            ),
            m = MARGIN,
            s = SPAN,
            w = SIZE
        );
        for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let (x, y0) = px([t, 0.0]);
            let (x0, y) = px([0.0, t]);
            let _ = writeln!(
                body,
                "<text x=\"{x:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">{t}</text>",
                y0 + 15.0
            );
            let _ = writeln!(
                body,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\">{t}</text>",
                x0 - 4.0,
                y + 4.0
            );
        }
        let _ = writeln!(
            body,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\">y</text>",
            SIZE / 2.0,
            SIZE - 4.0
        );
        let _ = writeln!(
            body,
            "<text x=\"12\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\">z</text>",
            SIZE / 2.0
        );
        Canvas { body }
    }

    pub fn polyline(&mut self, pts: &[[f64; 2]], color: &str, width: f64) {
        if pts.len() < 2 {
            return;
        }
        let coords: Vec<String> = pts
            .iter()
            .map(|&u| {
                let (x, y) = px(u);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            self.body,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"{width}\" clip-path=\"url(#square)\"/>",
            coords.join(" ")
        );
    }

    /// Closed curve, clipped to the square.
    pub fn polygon(&mut self, pts: &[[f64; 2]], stroke: &str, fill: &str) {
        let coords: Vec<String> = pts
            .iter()
            .map(|&u| {
                let (x, y) = px(u);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            self.body,
            "<polygon points=\"{}\" fill=\"{fill}\" fill-opacity=\"0.35\" stroke=\"{stroke}\" stroke-width=\"1.5\" clip-path=\"url(#square)\"/>",
            coords.join(" ")
        );
    }

    /// Equilibrium marker: filled when stable, open otherwise.
    pub fn equilibrium(&mut self, u: [f64; 2], stable: bool) {
        let (x, y) = px(u);
        let fill = if stable { "black" } else { "white" };
        let _ = writeln!(
            self.body,
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"6\" fill=\"{fill}\" stroke=\"black\" stroke-width=\"1.5\"/>"
        );
    }

    pub fn start(&mut self, u: [f64; 2]) {
        let (x, y) = px(u);
        let _ = writeln!(
            self.body,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"8\" height=\"8\" fill=\"seagreen\" stroke=\"black\"/>",
            x - 4.0,
            y - 4.0
        );
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{w:.0}\" viewBox=\"0 0 {w:.0} {w:.0}\">\n{}</svg>\n",
            self.body,
            w = SIZE
        )
    }
}
