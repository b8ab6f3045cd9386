use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::circuit::{CapabilityKind, Dataset};
use crate::error::{Error, Result};
use crate::model::success_to_polarization;

/// Default frontier threshold, `1/e`.
pub const DEFAULT_THRESHOLD: f64 = 1.0 / std::f64::consts::E;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueMode {
    AsIs,
    /// Rescales each success probability to `(s - 2^-n) / (1 - 2^-n)`.
    PolarizationOfSuccess,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStats {
    pub max: f64,
    pub mean: f64,
    pub min: f64,
    pub count: usize,
}

impl CellStats {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let mean = (values.iter().sum::<f64>() / values.len() as f64).clamp(min, max);
        Some(Self {
            max,
            mean,
            min,
            count: values.len(),
        })
    }

    pub fn get(&self, s: Statistic) -> f64 {
        match s {
            Statistic::Max => self.max,
            Statistic::Mean => self.mean,
            Statistic::Min => self.min,
        }
    }
}

/// Summary statistics keyed by `(width, depth)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VolumetricGrid {
    pub cells: BTreeMap<(usize, usize), CellStats>,
}

impl VolumetricGrid {
    pub fn total_count(&self) -> usize {
        self.cells.values().map(|c| c.count).sum()
    }

    pub fn widths(&self) -> Vec<usize> {
        let s: BTreeSet<usize> = self.cells.keys().map(|k| k.0).collect();
        s.into_iter().collect()
    }

    pub fn depths(&self) -> Vec<usize> {
        let s: BTreeSet<usize> = self.cells.keys().map(|k| k.1).collect();
        s.into_iter().collect()
    }

    /// `width,depth,count,max,mean,min`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("width,depth,count,max,mean,min\n");
        for (&(w, d), c) in &self.cells {
            let _ = writeln!(out, "{w},{d},{},{},{},{}", c.count, c.max, c.mean, c.min);
        }
        out
    }
}

pub fn volumetric_summary(d: &Dataset, mode: ValueMode) -> Result<VolumetricGrid> {
    if d.is_empty() {
        return Err(Error::Precondition(
            "volumetric summary of an empty dataset".into(),
        ));
    }
    if mode == ValueMode::PolarizationOfSuccess
        && d.capability_kind != CapabilityKind::SuccessProbability
    {
        return Err(Error::Precondition(
            "polarization rescaling needs success-probability data".into(),
        ));
    }
    let mut groups: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for r in &d.records {
        let v = match mode {
            ValueMode::AsIs => r.estimate,
            ValueMode::PolarizationOfSuccess => success_to_polarization(r.estimate, r.width()),
        };
        groups
            .entry((r.width(), r.plot_depth()))
            .or_default()
            .push(v);
    }
    Ok(VolumetricGrid {
        cells: groups
            .into_iter()
            .map(|(k, v)| (k, CellStats::from_values(&v).expect("non-empty group")))
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Max,
    Mean,
    Min,
}

impl Statistic {
    pub const ALL: [Statistic; 3] = [Statistic::Max, Statistic::Mean, Statistic::Min];

    pub fn name(&self) -> &'static str {
        match self {
            Statistic::Max => "max",
            Statistic::Mean => "mean",
            Statistic::Min => "min",
        }
    }
}

/// Per width, the largest depth reached before the statistic first drops
/// below the threshold; `None` when the smallest depth already fails.
#[derive(Debug, Clone, PartialEq)]
pub struct Frontier {
    pub statistic: Statistic,
    pub threshold: f64,
    pub depths: BTreeMap<usize, Option<usize>>,
}

impl Frontier {
    /// `statistic,width,depth` with an empty depth for absent widths.
    pub fn to_csv_rows(&self, out: &mut String) {
        for (w, d) in &self.depths {
            let d = d.map(|d| d.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{w},{d}", self.statistic.name());
        }
    }
}

pub fn frontiers_to_csv(frontiers: &[Frontier]) -> String {
    let mut out = String::from("statistic,width,depth\n");
    for f in frontiers {
        f.to_csv_rows(&mut out);
    }
    out
}

pub fn frontier(g: &VolumetricGrid, statistic: Statistic, threshold: f64) -> Frontier {
    let mut depths = BTreeMap::new();
    for w in g.widths() {
        let mut reached = None;
        for (&(_, d), cell) in g.cells.range((w, 0)..=(w, usize::MAX)) {
            if cell.get(statistic) < threshold {
                break;
            }
            reached = Some(d);
        }
        depths.insert(w, reached);
    }
    Frontier {
        statistic,
        threshold,
        depths,
    }
}

fn color(v: f64) -> String {
    // white (0) to dark blue (1); out-of-range values clamp
    let t = v.clamp(0.0, 1.0);
    let r = (255.0 * (1.0 - 0.85 * t)).round() as u8;
    let g = (255.0 * (1.0 - 0.65 * t)).round() as u8;
    let b = (255.0 * (1.0 - 0.25 * t)).round() as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Concentric-squares plot: outer square = min, middle = mean, inner = max,
/// plus one step line per frontier.
pub fn render_svg(g: &VolumetricGrid, frontiers: &[Frontier]) -> String {
    const CELL: f64 = 40.0;
    const MARGIN: f64 = 60.0;
    let widths = g.widths();
    let depths = g.depths();
    let col = |d: usize| depths.iter().position(|&x| x == d).unwrap_or(0) as f64;
    let row = |w: usize| widths.iter().position(|&x| x == w).unwrap_or(0) as f64;
    let h = MARGIN * 2.0 + CELL * widths.len() as f64;
    let wd = MARGIN * 2.0 + CELL * depths.len() as f64;
    let y_of = |r: f64| h - MARGIN - (r + 1.0) * CELL;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{wd}" height="{h}" viewBox="0 0 {wd} {h}" font-family="sans-serif" font-size="11">"##
    );
    for (&(w, d), c) in &g.cells {
        let (cx, cy) = (
            MARGIN + col(d) * CELL + CELL / 2.0,
            y_of(row(w)) + CELL / 2.0,
        );
        for (frac, v) in [(0.9, c.min), (0.6, c.mean), (0.3, c.max)] {
            let side = frac * CELL;
            let _ = writeln!(
                s,
                r##"<rect x="{}" y="{}" width="{side}" height="{side}" fill="{}" stroke="#333" stroke-width="0.5"/>"##,
                cx - side / 2.0,
                cy - side / 2.0,
                color(v)
            );
        }
    }
    for (i, &d) in depths.iter().enumerate() {
        let _ = writeln!(
            s,
            r##"<text x="{}" y="{}" text-anchor="middle">{d}</text>"##,
            MARGIN + (i as f64 + 0.5) * CELL,
            h - MARGIN + 16.0
        );
    }
    for (i, &w) in widths.iter().enumerate() {
        let _ = writeln!(
            s,
            r##"<text x="{}" y="{}" text-anchor="end">{w}</text>"##,
            MARGIN - 6.0,
            y_of(i as f64) + CELL / 2.0 + 4.0
        );
    }
    let _ = writeln!(
        s,
        r##"<text x="{}" y="{}" text-anchor="middle">depth</text>"##,
        wd / 2.0,
        h - MARGIN + 36.0
    );
    let _ = writeln!(
        s,
        r##"<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle">width</text>"##,
        h / 2.0,
        h / 2.0
    );
    for f in frontiers {
        let stroke = match f.statistic {
            Statistic::Max => "#2ca02c",
            Statistic::Mean => "#000000",
            Statistic::Min => "#d62728",
        };
        let mut pts = Vec::new();
        for (&w, d) in &f.depths {
            let x = match d {
                Some(d) => MARGIN + (col(*d) + 1.0) * CELL,
                None => MARGIN,
            };
            let r = row(w);
            pts.push(format!("{x},{}", y_of(r) + CELL));
            pts.push(format!("{x},{}", y_of(r)));
        }
        let _ = writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="2"><title>{} frontier</title></polyline>"##,
            pts.join(" "),
            f.statistic.name()
        );
    }
    s.push_str("</svg>\n");
    s
}
