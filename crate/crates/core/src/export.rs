//! CSV and SVG renderings of archives and analyses.
//!
//! Grids are 20 rows (risk aversion bin, low to high) by 20 columns
//! (communicativeness bin, low to high). An empty niche is an empty field,
//! which keeps it distinct from a niche whose value is 0.

use crate::descriptors::{NicheCoord, GRID_SIZE, NICHE_WIDTH};
use crate::harness::{BestPartners, CrossRunReport, CrossplayMatrix, DistanceBucket};
use crate::qd::{Archive, ReevalRecord};
use std::fmt::Write;

fn bin_label(i: usize) -> String {
    format!("{:.2}", i as f64 * NICHE_WIDTH)
}

/// A 20×20 grid; `value` returns `None` for absent niches.
pub fn grid_csv(value: impl Fn(NicheCoord) -> Option<f64>) -> String {
    let mut out = String::from("r\\c");
    for ci in 0..GRID_SIZE {
        write!(out, ",{}", bin_label(ci)).unwrap();
    }
    out.push('\n');
    for ri in 0..GRID_SIZE {
        out.push_str(&bin_label(ri));
        for ci in 0..GRID_SIZE {
            out.push(',');
            if let Some(v) = value(NicheCoord::new(ci as u8, ri as u8).expect("in range")) {
                write!(out, "{v}").unwrap();
            }
        }
        out.push('\n');
    }
    out
}

/// Parses a grid written by [`grid_csv`].
pub fn parse_grid_csv(text: &str) -> Option<Vec<Option<f64>>> {
    let mut cells = vec![None; GRID_SIZE * GRID_SIZE];
    let mut lines = text.lines().skip(1);
    for ri in 0..GRID_SIZE {
        let line = lines.next()?;
        let fields: Vec<&str> = line.split(',').skip(1).collect();
        if fields.len() != GRID_SIZE {
            return None;
        }
        for (ci, f) in fields.iter().enumerate() {
            if !f.is_empty() {
                cells[NicheCoord::new(ci as u8, ri as u8).ok()?.index()] = Some(f.parse().ok()?);
            }
        }
    }
    Some(cells)
}

pub fn fitness_grid(archive: &Archive) -> String {
    grid_csv(|n| archive.get(n).map(|e| e.fitness))
}

/// Each pool agent's mean score over the whole pool.
pub fn pairwise_mean_grid(m: &CrossplayMatrix) -> String {
    let means = m.agent_means();
    grid_csv(|n| m.niches.iter().position(|&x| x == n).map(|i| means[i]))
}

/// Times each pool agent was someone's best partner.
pub fn best_partner_grid(m: &CrossplayMatrix, bp: &BestPartners) -> String {
    grid_csv(|n| m.niches.iter().position(|&x| x == n).map(|i| bp.chosen[i] as f64))
}

pub fn distance_profile_csv(profile: &[DistanceBucket]) -> String {
    let mut out = String::from("distance,mean,n\n");
    for b in profile {
        writeln!(out, "{},{},{}", b.distance, b.mean, b.n).unwrap();
    }
    out
}

/// Long-form matrix: one row per unordered pair.
pub fn crossplay_csv(m: &CrossplayMatrix) -> String {
    let mut out = String::from("ci_a,ri_a,ci_b,ri_b,mean,games\n");
    for i in 0..m.len() {
        for j in i..m.len() {
            let (a, b) = (m.niches[i], m.niches[j]);
            writeln!(out, "{},{},{},{},{},{}", a.ci, a.ri, b.ci, b.ri, m.get(i, j), m.games_per_pair).unwrap();
        }
    }
    out
}

pub fn best_partners_csv(m: &CrossplayMatrix, bp: &BestPartners) -> String {
    let mut out = String::from("ci,ri,partner_ci,partner_ri,score,chosen\n");
    for (i, &p) in bp.partner.iter().enumerate() {
        let (a, b) = (m.niches[i], m.niches[p]);
        writeln!(out, "{},{},{},{},{},{}", a.ci, a.ri, b.ci, b.ri, m.get(i, p), bp.chosen[i]).unwrap();
    }
    out
}

pub fn reeval_csv(records: &[ReevalRecord]) -> String {
    let mut out = String::from("ci,ri,previous_fitness,fitness,games,sd,sem\n");
    for r in records {
        writeln!(out, "{},{},{},{},{},{},{}", r.niche.ci, r.niche.ri, r.previous_fitness, r.fitness, r.games, r.sd, r.sem)
            .unwrap();
    }
    out
}

pub fn cross_run_csv(report: &CrossRunReport) -> String {
    let mut out = String::from("ci,ri,paired_score,self_play_a,self_play_b,hamming,similarity\n");
    for r in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.niche.ci, r.niche.ri, r.paired_score, r.self_play_a, r.self_play_b, r.hamming, r.similarity
        )
        .unwrap();
    }
    out
}

/// Plain SVG heatmap of a grid; empty niches are left white.
pub fn svg_heatmap(title: &str, value: impl Fn(NicheCoord) -> Option<f64>, max: f64) -> String {
    const CELL: usize = 24;
    const PAD: usize = 40;
    let side = GRID_SIZE * CELL;
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="11">"#,
        w = side + 2 * PAD,
        h = side + 2 * PAD
    )
    .unwrap();
    writeln!(out, r#"<text x="{PAD}" y="20">{}</text>"#, escape(title)).unwrap();
    for n in NicheCoord::all() {
        let x = PAD + n.ci as usize * CELL;
        // high risk aversion at the top
        let y = PAD + (GRID_SIZE - 1 - n.ri as usize) * CELL;
        let fill = match value(n) {
            Some(v) => {
                let t = if max > 0.0 { (v / max).clamp(0.0, 1.0) } else { 0.0 };
                let (r, g, b) = (255.0 * t, 64.0 + 96.0 * (1.0 - (2.0 * t - 1.0).abs()), 255.0 * (1.0 - t));
                format!("rgb({},{},{})", r as u8, g as u8, b as u8)
            }
            None => "white".to_string(),
        };
        writeln!(out, r##"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{fill}" stroke="#ccc"/>"##).unwrap();
    }
    writeln!(out, r#"<text x="{}" y="{}">communicativeness</text>"#, PAD + side / 2 - 50, side + PAD + 25).unwrap();
    writeln!(
        out,
        r#"<text x="15" y="{y}" transform="rotate(-90 15 {y})">risk aversion</text>"#,
        y = PAD + side / 2 + 35
    )
    .unwrap();
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
