//! plotdata: long-format series (x, variable, value, period, scheme) from a run directory.

use std::collections::HashMap;
use std::path::Path;

use anyhow::{Context, Result};

use atc_core::scenario::{load_scenario, DemandField};

use crate::output::{num, OutputDir, RESOLVED_SCENARIO};
use crate::read_input;

pub const SERIES_HEADER: [&str; 5] = ["x", "variable", "value", "period", "scheme"];

/// Design columns emitted per node, in this order.
const DESIGN_SERIES: [&str; 8] = ["S_r", "S_c", "s", "s_c", "H", "h", "Q", "theta_r"];

fn records(text: &str) -> Result<(Vec<String>, Vec<csv::StringRecord>)> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = r.headers()?.iter().map(String::from).collect();
    let rows = r.records().collect::<std::result::Result<Vec<_>, _>>()?;
    Ok((header, rows))
}

struct Table {
    index: HashMap<String, usize>,
    rows: Vec<csv::StringRecord>,
}

impl Table {
    fn parse(text: &str, name: &str) -> Result<Self> {
        let (header, rows) = records(text).with_context(|| format!("parsing {name}"))?;
        let index = header.into_iter().enumerate().map(|(i, h)| (h, i)).collect();
        Ok(Self { index, rows })
    }

    fn get<'a>(&self, row: &'a csv::StringRecord, col: &str) -> Result<&'a str> {
        let i = *self.index.get(col).with_context(|| format!("missing column {col}"))?;
        Ok(row.get(i).unwrap_or(""))
    }
}

fn row(x: &str, variable: &str, value: &str, period: &str, scheme: &str) -> Vec<String> {
    vec![x.into(), variable.into(), value.into(), period.into(), scheme.into()]
}

pub fn run(dir: &Path) -> Result<()> {
    let params = load_scenario(&read_input(dir, RESOLVED_SCENARIO)?)?;
    let design = Table::parse(&read_input(dir, "design_profile.csv")?, "design_profile.csv")?;
    let mut out = Vec::new();

    for period in &params.periods {
        let field = DemandField::new(&params, &period.label)?;
        for x in params.grid() {
            out.push(row(&num(x), "rho", &num(field.rho(x)), &period.label, ""));
        }
        for x in params.grid() {
            out.push(row(&num(x), "cum_demand", &num(field.cum(x)), &period.label, ""));
        }
    }

    for var in DESIGN_SERIES {
        for r in &design.rows {
            let value = design.get(r, var)?;
            if value.is_empty() {
                continue;
            }
            out.push(row(design.get(r, "x")?, var, value, design.get(r, "period")?, design.get(r, "scheme")?));
        }
    }
    for r in &design.rows {
        let code = match design.get(r, "feeder")? {
            "FRF" => "1",
            "DRF" => "2",
            _ => "0",
        };
        out.push(row(design.get(r, "x")?, "feeder_mode", code, design.get(r, "period")?, design.get(r, "scheme")?));
    }

    if dir.join("costs.csv").exists() {
        let costs = Table::parse(&read_input(dir, "costs.csv")?, "costs.csv")?;
        for r in &costs.rows {
            out.push(row("", costs.get(r, "component")?, costs.get(r, "total")?, costs.get(r, "period")?, costs.get(r, "scheme")?));
        }
    }
    if dir.join("gains.csv").exists() {
        let gains = Table::parse(&read_input(dir, "gains.csv")?, "gains.csv")?;
        for r in &gains.rows {
            if gains.get(r, "kind")? != "access_min" {
                continue;
            }
            let variable = format!("{}[{}]", gains.get(r, "metric")?, gains.get(r, "zone")?);
            out.push(row("", &variable, gains.get(r, "value")?, gains.get(r, "period")?, gains.get(r, "scheme")?));
        }
    }

    let dest = OutputDir::create(dir)?;
    dest.write_csv("plot_series.csv", "atc.plot_series/1", &SERIES_HEADER, &out)?;
    log::info!("command=plotdata rows={} out={}", out.len(), dir.display());
    Ok(())
}
