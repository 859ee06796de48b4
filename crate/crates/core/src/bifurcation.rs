//! Parameter-plane partitions and entropy sweeps for fixed child couplings.
//!
//! In the sheared coordinates `s = a - 1 + z`, `t = a - 1 - z` the region
//! boundaries are the axis-parallel lines `s = -c` and `t = c` for `c` in the
//! coupling sums, so the open cells form an `(m + 1) x (m + 1)` grid.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ctnn::{
    admissible_patterns, basic_set_entropy, classify, critical_a, BasicSet, ChildCouplings, RegionCode, Template,
};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cell {
    pub code: RegionCode,
    /// Interior point `(a, z)`.
    pub representative: (f64, f64),
    /// Open interval of `s = a - 1 + z`; infinite ends are unbounded.
    pub s_bounds: (f64, f64),
    /// Open interval of `t = a - 1 - z`.
    pub t_bounds: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlanePartition {
    pub couplings: ChildCouplings,
    /// Distinct coupling sums, ascending.
    pub thresholds: Vec<f64>,
    /// Row-major in `(s interval, t interval)`.
    pub cells: Vec<Cell>,
}

impl PlanePartition {
    pub fn degenerate(&self) -> bool {
        self.couplings.degenerate
    }
}

fn intervals(thresholds: &[f64]) -> Vec<((f64, f64), f64)> {
    let m = thresholds.len();
    (0..=m)
        .map(|i| {
            let lo = if i == 0 { f64::NEG_INFINITY } else { thresholds[i - 1] };
            let hi = if i == m { f64::INFINITY } else { thresholds[i] };
            let mid = match (i == 0, i == m) {
                (true, _) => hi - 1.0,
                (_, true) => lo + 1.0,
                _ => 0.5 * (lo + hi),
            };
            ((lo, hi), mid)
        })
        .collect()
}

/// Exact cell decomposition of the `(a, z)` plane.
pub fn partition_plane(cc: &ChildCouplings) -> PlanePartition {
    let thresholds = cc.distinct_sums();
    let axis = intervals(&thresholds);
    let mut cells = Vec::with_capacity(axis.len() * axis.len());
    for &(s_bounds, s) in &axis {
        for &(t_bounds, t) in &axis {
            let p = cc.sums.iter().filter(|&&c| c > -s).count();
            let q = cc.sums.iter().filter(|&&c| c < t).count();
            cells.push(Cell {
                code: RegionCode { p, q },
                representative: (1.0 + 0.5 * (s + t), 0.5 * (s - t)),
                s_bounds,
                t_bounds,
            });
        }
    }
    PlanePartition {
        couplings: cc.clone(),
        thresholds,
        cells,
    }
}

/// The basic set of every cell of the partition.
pub fn cell_basic_sets(partition: &PlanePartition) -> Result<Vec<BasicSet>> {
    let alpha = &partition.couplings.alpha;
    partition
        .cells
        .iter()
        .map(|c| admissible_patterns(&Template::new(c.representative.0, alpha.clone(), c.representative.1)?))
        .collect()
}

/// The eight couplings `(+-m1, +-m2)` and `(+-m2, +-m1)`.
pub fn orderings_d2(m1: f64, m2: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(8);
    for (x, y) in [(m1, m2), (m2, m1)] {
        for sx in [1.0, -1.0] {
            for sy in [1.0, -1.0] {
                out.push(vec![sx * x, sy * y]);
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaCatalog {
    pub alpha: Vec<f64>,
    pub cells: usize,
    pub distinct: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BasicSetCatalog {
    pub per_alpha: Vec<AlphaCatalog>,
    pub sets: BTreeSet<BasicSet>,
}

impl BasicSetCatalog {
    pub fn count(&self) -> usize {
        self.sets.len()
    }
}

/// Distinct basic sets over the cells of each coupling sample.
pub fn distinct_basic_sets(alpha_samples: &[Vec<f64>]) -> Result<BasicSetCatalog> {
    let mut sets = BTreeSet::new();
    let mut per_alpha = Vec::with_capacity(alpha_samples.len());
    for alpha in alpha_samples {
        let partition = partition_plane(&ChildCouplings::new(alpha.clone())?);
        let local: BTreeSet<BasicSet> = cell_basic_sets(&partition)?.into_iter().collect();
        per_alpha.push(AlphaCatalog {
            alpha: alpha.clone(),
            cells: partition.cells.len(),
            distinct: local.len(),
        });
        sets.extend(local);
    }
    Ok(BasicSetCatalog { per_alpha, sets })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Resolution {
    Square(usize),
    Axes([usize; 2]),
}

impl Resolution {
    /// `(a points, z points)`.
    pub fn axes(self) -> (usize, usize) {
        match self {
            Resolution::Square(n) => (n, n),
            Resolution::Axes([na, nz]) => (na, nz),
        }
    }
}

/// Run-config file `{d, alpha, a_range, z_range, resolution, tol}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub d: usize,
    pub alpha: Vec<f64>,
    pub a_range: [f64; 2],
    pub z_range: [f64; 2],
    pub resolution: Resolution,
    /// Criticality tolerance; defaults to the `a` step.
    #[serde(default)]
    pub tol: Option<f64>,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SweepConfig = serde_json::from_str(text)?;
        if cfg.alpha.len() != cfg.d {
            return Err(Error::Parse(format!("alpha has {} entries, expected d = {}", cfg.alpha.len(), cfg.d)));
        }
        Ok(cfg)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub a: f64,
    pub z: f64,
    pub p: usize,
    pub q: usize,
    /// Absent on partition lines.
    pub entropy: Option<f64>,
    pub critical: bool,
    pub boundary: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepGrid {
    pub alpha: Vec<f64>,
    pub a_values: Vec<f64>,
    pub z_values: Vec<f64>,
    pub tol: f64,
    /// `z` outer, `a` inner.
    pub points: Vec<SweepPoint>,
}

impl SweepGrid {
    pub fn point(&self, ia: usize, iz: usize) -> &SweepPoint {
        &self.points[iz * self.a_values.len() + ia]
    }

    pub fn summary(&self) -> SweepSummary {
        let ln_d = (self.alpha.len() as f64).ln();
        let mut s = SweepSummary {
            points: self.points.len(),
            ..Default::default()
        };
        for p in &self.points {
            match p.entropy {
                None => s.boundary += 1,
                Some(h) if (h - ln_d).abs() <= 1e-9 && h > 0.0 => s.ln_d += 1,
                Some(_) => s.zero += 1,
            }
            s.critical += p.critical as usize;
        }
        s
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SweepSummary {
    pub points: usize,
    pub zero: usize,
    pub ln_d: usize,
    pub boundary: usize,
    pub critical: usize,
}

fn axis(range: [f64; 2], n: usize, name: &str) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("{name} resolution must be at least 2")));
    }
    if !(range[0].is_finite() && range[1].is_finite() && range[0] < range[1]) {
        return Err(Error::InvalidInput(format!("{name} range must be a nonempty finite interval")));
    }
    let span = range[1] - range[0];
    Ok((0..n)
        .map(|i| if i + 1 == n { range[1] } else { range[0] + span * i as f64 / (n - 1) as f64 })
        .collect())
}

pub fn sweep(cfg: &SweepConfig) -> Result<SweepGrid> {
    sweep_with_workers(cfg, None)
}

/// Evaluates the grid on a pool of `workers` threads (the global pool if `None`).
/// The output does not depend on the worker count.
pub fn sweep_with_workers(cfg: &SweepConfig, workers: Option<usize>) -> Result<SweepGrid> {
    let cc = ChildCouplings::new(cfg.alpha.clone())?;
    if cfg.alpha.len() != cfg.d {
        return Err(Error::InvalidInput("alpha length must equal d".into()));
    }
    let (na, nz) = cfg.resolution.axes();
    let a_values = axis(cfg.a_range, na, "a")?;
    let z_values = axis(cfg.z_range, nz, "z")?;
    let tol = match cfg.tol {
        Some(t) if t > 0.0 => t,
        Some(_) => return Err(Error::InvalidInput("tolerance must be positive".into())),
        None => (cfg.a_range[1] - cfg.a_range[0]) / (na - 1) as f64,
    };
    let eval = |idx: usize| -> Result<SweepPoint> {
        let (a, z) = (a_values[idx % na], z_values[idx / na]);
        let t = Template {
            a,
            alpha: cfg.alpha.clone(),
            z,
        };
        let c = classify(&t);
        let code = c.basic.code();
        let entropy = if c.boundary {
            None
        } else {
            Some(basic_set_entropy(&c.basic)?.entropy)
        };
        Ok(SweepPoint {
            a,
            z,
            p: code.p,
            q: code.q,
            entropy,
            critical: (a - critical_a(&cc, z)).abs() <= tol,
            boundary: c.boundary,
        })
    };
    let run = || (0..na * nz).into_par_iter().map(eval).collect::<Result<Vec<_>>>();
    let points = match workers {
        None => run()?,
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?
            .install(run)?,
    };
    Ok(SweepGrid {
        alpha: cfg.alpha.clone(),
        a_values,
        z_values,
        tol,
        points,
    })
}

/// C `printf("%.*g")` formatting.
pub fn format_g(x: f64, precision: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let p = precision.max(1);
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if exp < -4 || exp >= p as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim(mantissa), sign, exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{:.*}", decimals, x))
    }
}

pub fn write_csv(grid: &SweepGrid, mut out: impl Write) -> Result<()> {
    let mut buf = String::from("a,z,p,q,entropy,critical,boundary\n");
    for p in &grid.points {
        writeln!(
            buf,
            "{},{},{},{},{},{},{}",
            format_g(p.a, 12),
            format_g(p.z, 12),
            p.p,
            p.q,
            format_g(p.entropy.unwrap_or(f64::NAN), 12),
            p.critical as u8,
            p.boundary as u8
        )
        .expect("write to string");
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

const SVG_WIDTH: f64 = 640.0;
const SVG_HEIGHT: f64 = 480.0;
const SVG_MARGIN: f64 = 50.0;

fn class_color(p: &SweepPoint) -> &'static str {
    match p.entropy {
        None => "#bdbdbd",
        Some(h) if h > 1e-9 => "#3b6fb6",
        Some(_) => "#e8eef7",
    }
}

/// Static SVG: `z` on the horizontal axis, `a` on the vertical axis, one
/// rectangle per grid point colored by entropy class, critical curve on top.
pub fn write_svg(grid: &SweepGrid, mut out: impl Write) -> Result<()> {
    let cc = ChildCouplings::new(grid.alpha.clone())?;
    let (na, nz) = (grid.a_values.len(), grid.z_values.len());
    let (a0, a1) = (grid.a_values[0], grid.a_values[na - 1]);
    let (z0, z1) = (grid.z_values[0], grid.z_values[nz - 1]);
    let pw = SVG_WIDTH - 2.0 * SVG_MARGIN;
    let ph = SVG_HEIGHT - 2.0 * SVG_MARGIN;
    let cw = pw / nz as f64;
    let ch = ph / na as f64;
    let x_of = |z: f64| SVG_MARGIN + cw / 2.0 + (z - z0) / (z1 - z0) * (pw - cw);
    let y_of = |a: f64| SVG_MARGIN + ch / 2.0 + (a1 - a) / (a1 - a0) * (ph - ch);

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">"#
    );
    let _ = writeln!(
        s,
        r#"<defs><clipPath id="plot"><rect x="{SVG_MARGIN}" y="{SVG_MARGIN}" width="{pw}" height="{ph}"/></clipPath></defs>"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<g shape-rendering="crispEdges">"#);
    for iz in 0..nz {
        // merge runs of equal class along a
        let mut ia = 0;
        while ia < na {
            let color = class_color(grid.point(ia, iz));
            let mut end = ia + 1;
            while end < na && class_color(grid.point(end, iz)) == color {
                end += 1;
            }
            let x = SVG_MARGIN + iz as f64 * cw;
            let y = SVG_MARGIN + (na - end) as f64 * ch;
            let _ = writeln!(
                s,
                r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{color}"/>"#,
                x,
                y,
                cw,
                (end - ia) as f64 * ch
            );
            ia = end;
        }
    }
    let _ = writeln!(s, "</g>");
    let pts: Vec<String> = grid
        .z_values
        .iter()
        .map(|&z| format!("{:.3},{:.3}", x_of(z), y_of(critical_a(&cc, z))))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline clip-path="url(#plot)" fill="none" stroke="#d62728" stroke-width="2" points="{}"/>"##,
        pts.join(" ")
    );
    let _ = writeln!(
        s,
        r#"<rect x="{SVG_MARGIN}" y="{SVG_MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let label = |s: &mut String, x: f64, y: f64, anchor: &str, text: &str| {
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{y:.1}" font-family="sans-serif" font-size="12" text-anchor="{anchor}">{text}</text>"#
        );
    };
    let bottom = SVG_HEIGHT - SVG_MARGIN;
    label(&mut s, SVG_MARGIN, bottom + 16.0, "middle", &format_g(z0, 6));
    label(&mut s, SVG_WIDTH - SVG_MARGIN, bottom + 16.0, "middle", &format_g(z1, 6));
    label(&mut s, SVG_WIDTH / 2.0, bottom + 34.0, "middle", "z");
    label(&mut s, SVG_MARGIN - 6.0, bottom, "end", &format_g(a0, 6));
    label(&mut s, SVG_MARGIN - 6.0, SVG_MARGIN + 4.0, "end", &format_g(a1, 6));
    label(&mut s, SVG_MARGIN - 30.0, SVG_HEIGHT / 2.0, "middle", "a");
    let _ = writeln!(s, "</svg>");
    out.write_all(s.as_bytes())?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagramFormat {
    Csv,
    Svg,
}

pub fn emit_diagram(grid: &SweepGrid, format: DiagramFormat, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let out = std::io::BufWriter::new(file);
    match format {
        DiagramFormat::Csv => write_csv(grid, out),
        DiagramFormat::Svg => write_svg(grid, out),
    }
}
