//! Standalone SVG plots: residual decay on log-log axes and the enclosure
//! band on linear axes.

use std::fmt::Write as _;
use std::path::Path;

use bandspec_core::asymptotics::{RateFit, ResidualSeries};
use thiserror::Error;

use crate::output::{write_atomic, OutputError};

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("plot: {0}")]
    Precondition(String),
    #[error(transparent)]
    Output(#[from] OutputError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mark {
    Dots,
    Line,
    Dashed,
}

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub mark: Mark,
    pub color: &'static str,
}

#[derive(Clone, Debug)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_axes: bool,
    pub series: Vec<Series>,
}

const W: f64 = 640.0;
const H: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    fn transform(&self, v: f64) -> Option<f64> {
        if self.log_axes {
            (v > 0.0 && v.is_finite()).then(|| v.log10())
        } else {
            v.is_finite().then_some(v)
        }
    }

    pub fn render(&self) -> Result<String, PlotError> {
        let mapped: Vec<Vec<(f64, f64)>> = self
            .series
            .iter()
            .map(|s| {
                s.points
                    .iter()
                    .filter_map(|&(x, y)| Some((self.transform(x)?, self.transform(y)?)))
                    .collect()
            })
            .collect();
        let all: Vec<(f64, f64)> = mapped.iter().flatten().copied().collect();
        if all.len() < 2 {
            return Err(PlotError::Precondition(format!(
                "`{}` needs at least two plottable points, got {}",
                self.title,
                all.len()
            )));
        }
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in &all {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if x1 == x0 {
            return Err(PlotError::Precondition(format!("`{}` has a single abscissa", self.title)));
        }
        if y1 == y0 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let pad = 0.04 * (y1 - y0);
        let (y0, y1) = (y0 - pad, y1 + pad);
        let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * (W - LEFT - RIGHT);
        let py = |y: f64| H - BOTTOM - (y - y0) / (y1 - y0) * (H - TOP - BOTTOM);

        let mut s = String::new();
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">"
        );
        let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
        let _ = writeln!(s, "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>", W / 2.0, escape(&self.title));
        let _ = writeln!(
            s,
            "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
            W - LEFT - RIGHT,
            H - TOP - BOTTOM
        );
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
            let tick = |v: f64| if self.log_axes { format!("1e{v:.2}") } else { format!("{v:.4e}") };
            let _ = writeln!(
                s,
                "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
                px(xv),
                H - BOTTOM + 16.0,
                tick(xv)
            );
            let _ = writeln!(
                s,
                "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
                LEFT - 4.0,
                py(yv) + 4.0,
                tick(yv)
            );
        }
        let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>", W / 2.0, H - 16.0, escape(&self.x_label));
        let _ = writeln!(
            s,
            "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>",
            H / 2.0,
            H / 2.0,
            escape(&self.y_label)
        );

        for (k, (series, pts)) in self.series.iter().zip(&mapped).enumerate() {
            match series.mark {
                Mark::Dots => {
                    for &(x, y) in pts {
                        let _ = writeln!(s, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2\" fill=\"{}\"/>", px(x), py(y), series.color);
                    }
                }
                Mark::Line | Mark::Dashed if pts.len() >= 2 => {
                    let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
                    let dash = if series.mark == Mark::Dashed { " stroke-dasharray=\"6 4\"" } else { "" };
                    let _ = writeln!(
                        s,
                        "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"{dash}/>",
                        path.join(" "),
                        series.color
                    );
                }
                _ => {}
            }
            let ly = TOP + 16.0 + 16.0 * k as f64;
            let _ = writeln!(
                s,
                "<text x=\"{:.2}\" y=\"{ly:.2}\" fill=\"{}\">{}</text>",
                LEFT + 10.0,
                series.color,
                escape(&series.label)
            );
        }
        s.push_str("</svg>\n");
        Ok(s)
    }
}

/// `|lambda_n - d(n)|` against `n` with the fitted line and a reference line
/// of the predicted slope through the first plotted point.
pub fn residual_plot(series: &ResidualSeries, fit: Option<&RateFit>, predicted: Option<f64>, relative: bool) -> Plot {
    let value = |e: &bandspec_core::asymptotics::ResidualEntry| {
        if relative {
            e.relative_residual().abs()
        } else {
            e.residual.abs()
        }
    };
    let points: Vec<(f64, f64)> = series
        .entries
        .iter()
        .filter(|e| e.stable)
        .map(|e| (e.n as f64, value(e)))
        .collect();
    let mut out = vec![Series {
        label: if relative { "|lambda_n / d(n) - 1|".into() } else { "|lambda_n - d(n)|".into() },
        points: points.clone(),
        mark: Mark::Dots,
        color: "#1f4e9c",
    }];
    let span = fit.map(|f| (*f.window.start() as f64, *f.window.end() as f64));
    if let (Some(f), Some((a, b))) = (fit, span) {
        let eval = |n: f64| {
            let ll = if f.log_coefficient != 0.0 { f.log_coefficient * n.ln().ln() } else { 0.0 };
            (f.log_constant + f.exponent * n.ln() + ll).exp()
        };
        let grid: Vec<(f64, f64)> = (0..=32).map(|i| a * (b / a).powf(i as f64 / 32.0)).map(|n| (n, eval(n))).collect();
        out.push(Series {
            label: format!("fitted slope {:.3}", f.exponent),
            points: grid,
            mark: Mark::Line,
            color: "#c0392b",
        });
    }
    if let (Some(p), Some(&(x0, y0))) = (predicted, points.iter().find(|(_, y)| *y > 0.0)) {
        let x1 = points.last().map(|q| q.0).unwrap_or(x0);
        out.push(Series {
            label: format!("predicted slope {p}"),
            points: vec![(x0, y0), (x1, y0 * (x1 / x0).powf(p))],
            mark: Mark::Dashed,
            color: "#555555",
        });
    }
    Plot {
        title: format!("{}: residual decay against the predicted O(n^p) rate", series.model_label),
        x_label: "n".into(),
        y_label: if relative { "relative residual".into() } else { "absolute residual".into() },
        log_axes: true,
        series: out,
    }
}

/// Min-max enclosure band with the computed eigenvalues.
pub fn enclosure_plot(label: &str, rows: &[(usize, f64, f64, f64)]) -> Plot {
    let pick = |f: fn(&(usize, f64, f64, f64)) -> f64| rows.iter().map(|r| (r.0 as f64, f(r))).collect::<Vec<_>>();
    Plot {
        title: format!("{label}: min-max enclosure lower <= lambda_n <= upper"),
        x_label: "n".into(),
        y_label: "value".into(),
        log_axes: false,
        series: vec![
            Series { label: "upper".into(), points: pick(|r| r.3), mark: Mark::Line, color: "#c0392b" },
            Series { label: "lambda_n".into(), points: pick(|r| r.2), mark: Mark::Dots, color: "#1f4e9c" },
            Series { label: "lower".into(), points: pick(|r| r.1), mark: Mark::Line, color: "#27ae60" },
        ],
    }
}

pub fn emit_plot(plot: &Plot, path: &Path) -> Result<(), PlotError> {
    let svg = plot.render()?;
    write_atomic(path, svg.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use bandspec_core::asymptotics::{fit_samples, FitKind, ResidualEntry};

    fn synthetic(ns: impl Iterator<Item = usize>) -> ResidualSeries {
        ResidualSeries {
            entries: ns
                .map(|n| {
                    let r = 5.0 / n as f64;
                    ResidualEntry { n, lambda_n: 1.0 + r, d_n: 1.0, residual: r, stable: true }
                })
                .collect(),
            model_label: "synthetic".into(),
            order: 0,
        }
    }

    #[test]
    fn synthetic_power_law() {
        let s = synthetic(10..=100);
        let samples: Vec<_> = s.entries.iter().map(|e| (e.n, e.residual, 0.0)).collect();
        let fit = fit_samples(&samples, FitKind::PurePower).unwrap();
        let plot = residual_plot(&s, Some(&fit), Some(-1.0), false);
        let svg = plot.render().unwrap();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("fitted slope -1.000"));
        assert!(svg.contains("predicted slope -1"));
        assert!(!svg.contains("href"));
        assert_eq!(svg, plot.render().unwrap());
    }

    #[test]
    fn single_point_is_rejected() {
        let plot = residual_plot(&synthetic(7..=7), None, None, false);
        assert!(matches!(plot.render(), Err(PlotError::Precondition(_))));
    }

    #[test]
    fn enclosure_band_renders() {
        let rows: Vec<_> = (1..=10).map(|n| (n, n as f64 - 1.0, n as f64, n as f64 + 1.0)).collect();
        let svg = enclosure_plot("M", &rows).render().unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 10);
    }
}
