//! Plot-ready CSV tables, one per figure panel.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{AuctionError, Result};
use crate::experiments::{Panel, PointSummary, RoundRecord, Scenario};

/// A rendered plot table: file name and CSV body.
pub type PlotFile = (String, String);

fn table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Utility loss per round, one column per manipulation factor, one file
/// per panel.
pub fn truthfulness_tables(records: &[RoundRecord]) -> Result<Vec<PlotFile>> {
    if records.is_empty() {
        return Err(AuctionError::Domain("no truthfulness records to plot".into()));
    }
    let mut files = Vec::new();
    for (tag, panel) in ["fig4a", "fig4b", "fig4c"].into_iter().zip(Panel::ALL) {
        let mut factors: Vec<f64> = Vec::new();
        let mut rows: BTreeMap<usize, BTreeMap<usize, f64>> = BTreeMap::new();
        for r in records.iter().filter(|r| r.panel == Some(panel)) {
            let (Some(f), Some(d)) = (r.factor, r.delta_u) else { continue };
            let col = match factors.iter().position(|x| *x == f) {
                Some(c) => c,
                None => {
                    factors.push(f);
                    factors.len() - 1
                }
            };
            rows.entry(r.round).or_default().insert(col, d);
        }
        let header: Vec<String> = std::iter::once("round".to_string())
            .chain(factors.iter().map(|f| format!("delta_u_f{f}")))
            .collect();
        let body: Vec<Vec<String>> = rows
            .iter()
            .map(|(round, cols)| {
                std::iter::once(round.to_string())
                    .chain((0..factors.len()).map(|c| fmt_opt(cols.get(&c).copied())))
                    .collect()
            })
            .collect();
        files.push((format!("{tag}_{}.csv", panel.as_str()), table(&header, &body)));
    }
    Ok(files)
}

fn utility_cells(p: &PointSummary) -> [String; 4] {
    [
        p.mean_utility.to_string(),
        p.ci95_utility.to_string(),
        p.mean_baseline.to_string(),
        p.improvement_pct.to_string(),
    ]
}

/// Mean utility against density.
pub fn density_table(points: &[PointSummary]) -> Result<Vec<PlotFile>> {
    if points.is_empty() {
        return Err(AuctionError::Domain("no density sweep points to plot".into()));
    }
    let header: Vec<String> = ["density", "mean_utility", "ci95", "baseline_utility", "improvement_pct"]
        .map(String::from)
        .to_vec();
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| std::iter::once(p.density.to_string()).chain(utility_cells(p)).collect())
        .collect();
    Ok(vec![("fig5a_density.csv".into(), table(&header, &rows))])
}

/// Pivot `points` on `x`, one column group per series.
fn pivot(
    points: &[PointSummary],
    x_name: &str,
    x: impl Fn(&PointSummary) -> f64,
    series: impl Fn(&PointSummary) -> String,
) -> String {
    let mut names: Vec<String> = Vec::new();
    let mut xs: Vec<f64> = Vec::new();
    for p in points {
        let s = series(p);
        if !names.contains(&s) {
            names.push(s);
        }
        if !xs.contains(&x(p)) {
            xs.push(x(p));
        }
    }
    let mut header = vec![x_name.to_string()];
    for s in &names {
        for col in ["mean_utility", "ci95", "baseline_utility", "improvement_pct"] {
            header.push(format!("{s}_{col}"));
        }
    }
    let rows: Vec<Vec<String>> = xs
        .iter()
        .map(|xv| {
            let mut row = vec![xv.to_string()];
            for s in &names {
                match points.iter().find(|p| x(p) == *xv && series(p) == *s) {
                    Some(p) => row.extend(utility_cells(p)),
                    None => row.extend(std::iter::repeat_n(String::new(), 4)),
                }
            }
            row
        })
        .collect();
    table(&header, &rows)
}

/// Mean utility against MUE count, one series per density.
pub fn mue_count_table(points: &[PointSummary]) -> Result<Vec<PlotFile>> {
    if points.is_empty() {
        return Err(AuctionError::Domain("no MUE-count sweep points to plot".into()));
    }
    let body = pivot(points, "num_mues", |p| p.num_mues as f64, |p| format!("density{}", p.density));
    Ok(vec![("fig5b_mue_count.csv".into(), body)])
}

/// Mean utility against FUE demand ceiling, one series per scenario.
pub fn demand_table(points: &[PointSummary]) -> Result<Vec<PlotFile>> {
    if points.is_empty() {
        return Err(AuctionError::Domain("no demand sweep points to plot".into()));
    }
    let body = pivot(
        points,
        "max_demand_mbps",
        |p| p.max_demand_mbps,
        |p| match p.scenario {
            Scenario::SingleMue => "single_mue".to_string(),
            Scenario::MultiMue => "multi_mue".to_string(),
        },
    );
    Ok(vec![("fig5c_demand.csv".into(), body)])
}

/// Column guide shipped next to the tables.
pub fn readme(files: &[PlotFile]) -> String {
    let mut out = String::from("# Plot data\n\nOne CSV per figure panel. Columns:\n\n");
    let describe = |c: &str| -> String {
        let what = if c == "round" {
            "auction round index"
        } else if c.starts_with("delta_u_f") {
            "utility loss U - U' of the reference agent when it reports f times its true values"
        } else if c == "density" {
            "probability that an apartment hosts a femtocell"
        } else if c == "num_mues" {
            "number of MUEs in the market"
        } else if c == "max_demand_mbps" {
            "upper bound of the uniform FUE demand, Mb/s"
        } else if c.ends_with("mean_utility") {
            "mean MUE utility over the rounds of the point"
        } else if c.ends_with("ci95") {
            "half-width of the 95% confidence interval of the mean utility"
        } else if c.ends_with("baseline_utility") {
            "mean MUE utility on the macro cell alone"
        } else if c.ends_with("improvement_pct") {
            "100 (mean_utility - baseline_utility) / baseline_utility"
        } else {
            ""
        };
        what.to_string()
    };
    for (name, body) in files {
        let _ = writeln!(out, "## {name}\n");
        for c in body.lines().next().unwrap_or_default().split(',') {
            let _ = writeln!(out, "- `{c}`: {}", describe(c));
        }
        out.push('\n');
    }
    out
}
