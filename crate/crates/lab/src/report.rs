//! CSV tables, JSON verdicts and SVG figures of an experiment run.
//!
//! Everything except `timings.json` is a function of the configuration
//! and seed alone, so reruns produce identical bytes.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tembed_core::embedding::TEmbedding;
use tembed_core::graph::Color;
use tembed_core::tgraph::{build_tgraph, TGraphEmbedding, Variant};
use tembed_core::C64;
use tembed_surface::invert::Inverter;
use tembed_surface::SurfaceMap;

use crate::error::Result;
use crate::experiment::{ConvergenceRow, ExperimentResult};
use crate::pipeline::Instance;
use crate::residue::ResidueReport;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Axis-aligned box mapped to an SVG canvas with `y` pointing up.
struct Canvas {
    lo: [f64; 2],
    hi: [f64; 2],
    width: f64,
    height: f64,
    pad: f64,
    body: String,
}

impl Canvas {
    fn fit(points: impl Iterator<Item = [f64; 2]>, width: f64) -> Self {
        let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
        for p in points {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        if lo[0] > hi[0] {
            (lo, hi) = ([0.0; 2], [1.0; 2]);
        }
        let span = [(hi[0] - lo[0]).max(1e-9), (hi[1] - lo[1]).max(1e-9)];
        let height = (width * span[1] / span[0]).clamp(0.2 * width, 2.0 * width);
        Self {
            lo,
            hi,
            width,
            height,
            pad: 10.0,
            body: String::new(),
        }
    }

    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        let sx = (self.width - 2.0 * self.pad) / (self.hi[0] - self.lo[0]).max(1e-9);
        let sy = (self.height - 2.0 * self.pad) / (self.hi[1] - self.lo[1]).max(1e-9);
        (
            self.pad + (p[0] - self.lo[0]) * sx,
            self.height - self.pad - (p[1] - self.lo[1]) * sy,
        )
    }

    fn line(&mut self, a: [f64; 2], b: [f64; 2], stroke: &str, w: f64) {
        let (x1, y1) = self.map(a);
        let (x2, y2) = self.map(b);
        writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-width="{w}"/>"#
        )
        .unwrap();
    }

    fn polygon(&mut self, pts: &[[f64; 2]], fill: &str, stroke: &str) {
        let mut d = String::new();
        for p in pts {
            let (x, y) = self.map(*p);
            write!(d, "{x:.2},{y:.2} ").unwrap();
        }
        writeln!(
            self.body,
            r#"<polygon points="{}" fill="{fill}" stroke="{stroke}" stroke-width="0.4"/>"#,
            d.trim_end()
        )
        .unwrap();
    }

    fn finish(self, title: &str) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n<title>{title}</title>\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height,
        )
    }
}

fn xy(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

/// Faces of `G` as filled polygons of the embedding, black faces shaded.
pub fn embedding_svg(t: &TEmbedding, title: &str) -> String {
    let g = t.dual.graph();
    let mut c = Canvas::fit(t.t.iter().map(|z| xy(*z)), 600.0);
    for v in 0..g.n_vertices() {
        let pts: Vec<[f64; 2]> = t.polygon_points(v).into_iter().map(xy).collect();
        let fill = match g.color(v) {
            Color::Black => "#b0b0b0",
            Color::White => "#ffffff",
        };
        c.polygon(&pts, fill, "#202020");
    }
    c.finish(title)
}

/// Axonometric view of the origami graph `(T, Re O)`.
pub fn origami_svg(t: &TEmbedding, o: &[C64], title: &str) -> String {
    let (ca, sa) = (0.5f64.cos(), 0.5f64.sin());
    let proj = |v: usize| {
        let z = t.t[v];
        let depth = -z.re * sa + z.im * ca;
        [z.re * ca + z.im * sa, o[v].re + 0.35 * depth]
    };
    let mut c = Canvas::fit((0..t.t.len()).map(proj), 600.0);
    let dual = &t.dual;
    for e in 0..dual.graph().n_edges() {
        let [a, b] = dual.edge_nodes(e);
        c.line(proj(a), proj(b), "#303030", 0.6);
    }
    let nb = dual.n_boundary();
    for k in 0..nb {
        let (a, b) = (dual.boundary_node(k), dual.boundary_node((k + 1) % nb));
        c.line(proj(a), proj(b), PALETTE[1], 1.2);
    }
    c.finish(title)
}

/// First T-graph `T + alpha^2 O` that is non-degenerate for
/// `alpha = exp(i pi k / 16)`, `k = 1, 2, ...`.
pub fn first_tgraph(inst: &Instance) -> Option<TGraphEmbedding> {
    let ctx = &inst.ctx;
    (1..16).find_map(|k| {
        let alpha = C64::from_polar(1.0, PI * k as f64 / 16.0);
        build_tgraph(&ctx.t, &ctx.o.o, &ctx.eta, alpha, Variant::White).ok()
    })
}

pub fn tgraph_svg(tg: &TGraphEmbedding, title: &str) -> String {
    let mut c = Canvas::fit(tg.positions.iter().map(|z| xy(*z)), 600.0);
    let dual = &tg.dual;
    for e in 0..dual.graph().n_edges() {
        let [a, b] = dual.edge_nodes(e);
        c.line(xy(tg.positions[a]), xy(tg.positions[b]), "#303030", 0.6);
    }
    for (v, &abs) in tg.absorbing.iter().enumerate() {
        if abs {
            let (x, y) = c.map(xy(tg.positions[v]));
            writeln!(c.body, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2" fill="{}"/>"#, PALETTE[1]).unwrap();
        }
    }
    c.finish(title)
}

/// Log-log plot of relative errors (pairs) and magnitudes (odd tuples) against `m`.
pub fn error_plot_svg(result: &ExperimentResult) -> String {
    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    let mut names: Vec<&str> = result.rows.iter().map(|r| r.tuple.as_str()).collect();
    names.dedup();
    names.sort();
    names.dedup();
    for name in names {
        let tr = result.trend(name);
        let odd = result.rows.iter().any(|r| r.tuple == name && r.n % 2 == 1);
        let pts: Vec<(f64, f64)> = tr
            .sizes
            .iter()
            .zip(tr.values.iter().zip(&tr.rel_errors))
            .filter_map(|(&m, (&v, e))| {
                let y = if odd { v.abs() } else { (*e)? };
                (y > 0.0).then(|| ((m as f64).log2(), y.log10()))
            })
            .collect();
        let label = if odd { format!("|{name}|") } else { format!("rel err {name}") };
        series.push((label, pts));
    }
    let all = series.iter().flat_map(|s| s.1.iter().map(|p| [p.0, p.1]));
    let mut c = Canvas::fit(all.chain([[1.5, -1.0]]), 480.0);
    c.height = 360.0;
    c.pad = 50.0;
    c.lo[1] = c.lo[1].floor();
    c.hi[1] = c.hi[1].ceil();
    c.lo[0] -= 0.25;
    c.hi[0] += 0.25;
    let (lo, hi) = (c.lo, c.hi);
    c.line([lo[0], lo[1]], [hi[0], lo[1]], "black", 1.0);
    c.line([lo[0], lo[1]], [lo[0], hi[1]], "black", 1.0);
    let mut e = lo[1];
    while e <= hi[1] + 1e-9 {
        let (x, y) = c.map([lo[0], e]);
        writeln!(c.body, r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">1e{}</text>"#, x - 4.0, y + 4.0, e as i64).unwrap();
        e += 1.0;
    }
    let mut sizes: Vec<usize> = result.sizes.iter().map(|s| s.m).collect();
    sizes.sort();
    for m in sizes {
        let (x, y) = c.map([(m as f64).log2(), lo[1]]);
        writeln!(c.body, r#"<text x="{x:.1}" y="{:.1}" font-size="11" text-anchor="middle">{m}</text>"#, y + 14.0).unwrap();
    }
    for (i, (label, pts)) in series.iter().enumerate() {
        let col = PALETTE[i % PALETTE.len()];
        for w in pts.windows(2) {
            c.line([w[0].0, w[0].1], [w[1].0, w[1].1], col, 1.5);
        }
        for p in pts {
            let (x, y) = c.map([p.0, p.1]);
            writeln!(c.body, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{col}"/>"#).unwrap();
        }
        let ly = 16.0 + 14.0 * i as f64;
        writeln!(c.body, r#"<text x="{:.1}" y="{ly:.1}" font-size="11" fill="{col}">{label}</text>"#, c.width - 170.0).unwrap();
    }
    let (x, y) = (c.width / 2.0, c.height - 8.0);
    writeln!(c.body, r#"<text x="{x:.1}" y="{y:.1}" font-size="12" text-anchor="middle">m</text>"#).unwrap();
    c.finish("error vs m")
}

pub const CONVERGENCE_HEADER: [&str; 11] = [
    "tuple", "n", "m", "discrete", "discrete_imag", "target", "abs_err", "rel_err", "reroute_delta", "path_steps", "verified",
];

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Header row always; one record per row.
pub fn convergence_csv(rows: &[ConvergenceRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CONVERGENCE_HEADER).map_err(csv_err)?;
    for r in rows {
        let steps: Vec<String> = r.path_steps.iter().map(|s| s.to_string()).collect();
        w.write_record([
            r.tuple.clone(),
            r.n.to_string(),
            r.m.to_string(),
            r.discrete.to_string(),
            r.discrete_imag.to_string(),
            r.target.to_string(),
            r.abs_err.to_string(),
            opt(r.rel_err),
            opt(r.reroute_delta),
            steps.join(" "),
            r.verified.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish_csv(w)
}

/// Snapped endpoints of every tuple at one size.
pub fn points_csv(rows: &[ConvergenceRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["tuple", "k", "r", "x", "y", "zeta_re", "zeta_im"]).map_err(csv_err)?;
    for row in rows {
        for (k, (s, z)) in row.snapped.iter().zip(&row.zeta).enumerate() {
            for r in 0..2 {
                w.write_record([
                    row.tuple.clone(),
                    (k + 1).to_string(),
                    (r + 1).to_string(),
                    s[r][0].to_string(),
                    s[r][1].to_string(),
                    z[r][0].to_string(),
                    z[r][1].to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    finish_csv(w)
}

/// Per dual node: position, origami value, conformal preimage and `theta`
/// there (blank where inversion fails).
pub fn nodes_csv(inst: &Instance, map: &dyn SurfaceMap, inv: &Inverter) -> Result<String> {
    let t = inst.t();
    let o = &inst.ctx.o.o;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["node", "boundary", "x", "y", "o_re", "o_im", "zeta_re", "zeta_im", "theta"])
        .map_err(csv_err)?;
    for v in 0..t.t.len() {
        let zeta = if t.dual.is_boundary(v) { None } else { inv.invert(t.t[v]).ok() };
        let (zr, zi, th) = match zeta {
            Some(z) => (z.re.to_string(), z.im.to_string(), map.theta(z).to_string()),
            None => Default::default(),
        };
        w.write_record([
            v.to_string(),
            t.dual.is_boundary(v).to_string(),
            t.t[v].re.to_string(),
            t.t[v].im.to_string(),
            o[v].re.to_string(),
            o[v].im.to_string(),
            zr,
            zi,
            th,
        ])
        .map_err(csv_err)?;
    }
    finish_csv(w)
}

fn csv_err(e: csv::Error) -> crate::LabError {
    crate::LabError::Io(std::io::Error::other(e))
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| crate::LabError::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Serialize)]
struct Verdicts<'a> {
    result: &'a ExperimentResult,
    residue: &'a [ResidueReport],
}

#[derive(Serialize)]
struct Timing {
    m: usize,
    build_s: f64,
    rows_s: f64,
}

pub struct ReportInput<'a> {
    pub result: &'a ExperimentResult,
    pub instances: &'a [Instance],
    pub map: &'a dyn SurfaceMap,
    pub residue: &'a [ResidueReport],
}

/// Write every artifact under `outdir`, returning the paths in write order.
pub fn emit_reports(input: &ReportInput, outdir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(outdir)?;
    let mut written = Vec::new();
    let mut put = |name: String, body: &str| -> Result<()> {
        let p = outdir.join(name);
        fs::write(&p, body)?;
        written.push(p);
        Ok(())
    };
    let result = input.result;
    put("convergence.csv".into(), &convergence_csv(&result.rows)?)?;
    let inv = Inverter::new(input.map, 32, 128);
    for inst in input.instances {
        let m = inst.m;
        let rows: Vec<ConvergenceRow> = result.rows.iter().filter(|r| r.m == m).cloned().collect();
        put(format!("nodes_m{m}.csv"), &nodes_csv(inst, input.map, &inv)?)?;
        put(format!("points_m{m}.csv"), &points_csv(&rows)?)?;
        put(format!("embedding_m{m}.svg"), &embedding_svg(inst.t(), &format!("t-embedding m = {m}")))?;
        put(
            format!("origami_m{m}.svg"),
            &origami_svg(inst.t(), &inst.ctx.o.o, &format!("origami graph m = {m}")),
        )?;
        let tg = match first_tgraph(inst) {
            Some(tg) => tgraph_svg(&tg, &format!("T-graph m = {m}")),
            None => Canvas::fit(std::iter::empty(), 200.0).finish("no non-degenerate T-graph"),
        };
        put(format!("tgraph_m{m}.svg"), &tg)?;
    }
    put("error_vs_m.svg".into(), &error_plot_svg(result))?;
    let verdicts = Verdicts {
        result,
        residue: input.residue,
    };
    put("verdicts.json".into(), &serde_json::to_string_pretty(&verdicts)?)?;
    let timings: Vec<Timing> = result
        .sizes
        .iter()
        .map(|s| Timing {
            m: s.m,
            build_s: s.build_s,
            rows_s: result.rows.iter().filter(|r| r.m == s.m).map(|r| r.runtime_s).sum(),
        })
        .collect();
    put("timings.json".into(), &serde_json::to_string_pretty(&timings)?)?;
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_rows_give_headers_only() {
        let s = convergence_csv(&[]).unwrap();
        assert_eq!(s, CONVERGENCE_HEADER.join(",") + "\n");
        assert_eq!(points_csv(&[]).unwrap().lines().count(), 1);
    }

    #[test]
    fn canvas_flips_y() {
        let c = Canvas::fit([[0.0, 0.0], [1.0, 1.0]].into_iter(), 100.0);
        let (_, y0) = c.map([0.0, 0.0]);
        let (_, y1) = c.map([0.0, 1.0]);
        assert!(y1 < y0);
    }
}
