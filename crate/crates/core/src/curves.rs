//! Correspondence between order-2 posteriors and higher-order transforms,
//! sampled on a uniform grid over `[0, 1]`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::dataio::fmt_g17;
use crate::error::{Error, Result};
use crate::mink::{closed_form_transform, LossOrder, Posterior};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveTable {
    pub mu: Vec<f64>,
    pub orders: Vec<u32>,
    /// `columns[k][i]` is the order `orders[k]` transform of `mu[i]`.
    pub columns: Vec<Vec<f64>>,
}

pub fn correspondence_curves(orders: &[LossOrder], grid_points: usize) -> Result<CurveTable> {
    if grid_points < 2 {
        return Err(Error::InvalidConfig("grid_points must be at least 2"));
    }
    if orders.is_empty() {
        return Err(Error::InvalidConfig("at least one order is required"));
    }
    let last = (grid_points - 1) as f64;
    let mu: Vec<f64> = (0..grid_points).map(|i| i as f64 / last).collect();
    let columns = orders
        .iter()
        .map(|&order| {
            mu.iter()
                .map(|&m| closed_form_transform(Posterior::new(m).expect("grid in [0, 1]"), order).value())
                .collect()
        })
        .collect();
    Ok(CurveTable {
        mu,
        orders: orders.iter().map(|o| o.value()).collect(),
        columns,
    })
}

impl CurveTable {
    /// Space-separated table with a `mu order_<k>...` header.
    pub fn to_table(&self) -> String {
        let mut out = String::from("mu");
        for o in &self.orders {
            write!(out, " order_{o}").unwrap();
        }
        out.push('\n');
        for (i, m) in self.mu.iter().enumerate() {
            out.push_str(&fmt_g17(*m));
            for col in &self.columns {
                out.push(' ');
                out.push_str(&fmt_g17(col[i]));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("curves serialize");
        s.push('\n');
        s
    }

    /// Line chart of every column against `mu`, with the identity as a
    /// dashed reference.
    pub fn to_svg(&self) -> String {
        const SIZE: f64 = 400.0;
        const PAD: f64 = 40.0;
        const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
        let x = |v: f64| PAD + v * SIZE;
        let y = |v: f64| PAD + (1.0 - v) * SIZE;
        let total = SIZE + 2.0 * PAD;

        let mut svg = String::new();
        writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" viewBox="0 0 {total} {total}">"#
        )
        .unwrap();
        writeln!(
            svg,
            r#"<rect x="{PAD}" y="{PAD}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black"/>"#
        )
        .unwrap();
        writeln!(
            svg,
            r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#999" stroke-dasharray="4 4"/>"##,
            x(0.0),
            y(0.0),
            x(1.0),
            y(1.0)
        )
        .unwrap();
        for (k, col) in self.columns.iter().enumerate() {
            let points: Vec<String> = self
                .mu
                .iter()
                .zip(col)
                .map(|(&m, &v)| format!("{:.3},{:.3}", x(m), y(v)))
                .collect();
            let color = COLORS[k % COLORS.len()];
            writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                points.join(" ")
            )
            .unwrap();
            writeln!(
                svg,
                r#"<text x="{}" y="{}" font-size="12" fill="{color}">order {}</text>"#,
                PAD + 8.0,
                PAD + 16.0 * (k + 1) as f64,
                self.orders[k]
            )
            .unwrap();
        }
        writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">order-2 posterior</text>"#,
            PAD + SIZE / 2.0,
            total - 10.0
        )
        .unwrap();
        svg.push_str("</svg>\n");
        svg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_point_grid() {
        let t = correspondence_curves(&[LossOrder::FOURTH], 3).unwrap();
        assert_eq!(t.mu, vec![0.0, 0.5, 1.0]);
        assert_eq!(t.columns[0], vec![0.0, 0.5, 1.0]);
        assert_eq!(t.to_table(), "mu order_4\n0 0\n0.5 0.5\n1 1\n");
    }

    #[test]
    fn eleven_point_grid_values() {
        let t = correspondence_curves(&[LossOrder::FOURTH, LossOrder::SIXTH], 11).unwrap();
        assert!((t.mu[1] - 0.1).abs() < 1e-15);
        assert!((t.columns[0][1] - 0.324666).abs() < 5e-7);
        assert!((t.columns[1][1] - 0.391873).abs() < 5e-7);
        assert!(t.columns[1][1] > t.columns[0][1]);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(correspondence_curves(&[LossOrder::FOURTH], 1).is_err());
        assert!(correspondence_curves(&[], 10).is_err());
    }

    #[test]
    fn svg_has_one_polyline_per_order() {
        let t = correspondence_curves(&[LossOrder::FOURTH, LossOrder::SIXTH], 21).unwrap();
        let svg = t.to_svg();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.starts_with("<svg"));
    }
}
