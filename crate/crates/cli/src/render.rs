use serde_json::{json, Value};
use whirly_core::ExperimentReport;

use crate::config::Format;
use crate::dispatch::Product;
use crate::error::{usage, CliError};

pub fn render(product: &Product, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => Ok(render_json(product)),
        Format::Csv => render_csv(product),
    }
}

fn render_json(product: &Product) -> String {
    let mut text = match product {
        Product::Report(r) => r.to_json(),
        Product::Suite { seed, scale, outcomes } => {
            let criteria: Vec<Value> = outcomes
                .iter()
                .map(|o| {
                    json!({
                        "id": o.id,
                        "title": o.title,
                        "pass": o.pass,
                        "summary": o.summary(),
                        "reports": o.reports,
                        "controls": o.controls,
                    })
                })
                .collect();
            let doc = json!({
                "name": "suite",
                "seed": seed,
                "scale": scale,
                "pass": product.pass(),
                "criteria": criteria,
            });
            serde_json::to_string_pretty(&doc).expect("suite output serializes")
        }
    };
    text.push('\n');
    text
}

fn csv_err(e: csv::Error) -> CliError {
    usage(format!("csv: {e}"))
}

fn report_rows(w: &mut csv::Writer<Vec<u8>>, r: &ExperimentReport) -> Result<(), CliError> {
    let mut row = |section: &str, key: &str, value: String| w.write_record([r.name.as_str(), section, key, &value]);
    row("meta", "seed", r.seed.to_string()).map_err(csv_err)?;
    row("meta", "pass", r.pass.to_string()).map_err(csv_err)?;
    row("meta", "runtime_ms", r.runtime_ms.to_string()).map_err(csv_err)?;
    for (k, v) in &r.parameters {
        row("parameter", k, v.to_string()).map_err(csv_err)?;
    }
    for (k, v) in &r.observed {
        row("observed", k, v.to_string()).map_err(csv_err)?;
    }
    for (k, v) in &r.thresholds {
        row("threshold", k, v.to_string()).map_err(csv_err)?;
    }
    Ok(())
}

/// Reports become `report,section,key,value` rows; `sample` output becomes
/// one row per leaf and the suite one row per criterion.
fn render_csv(product: &Product) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    match product {
        Product::Report(r) if r.name == "sample" => {
            w.write_record(["tree", "leaf", "re", "im"]).map_err(csv_err)?;
            let trees = r.parameters["leaves"].as_array().cloned().unwrap_or_default();
            for (t, leaves) in trees.iter().enumerate() {
                for (i, c) in leaves.as_array().into_iter().flatten().enumerate() {
                    w.write_record([t.to_string(), i.to_string(), c[0].to_string(), c[1].to_string()])
                        .map_err(csv_err)?;
                }
            }
        }
        Product::Report(r) => {
            w.write_record(["report", "section", "key", "value"]).map_err(csv_err)?;
            report_rows(&mut w, r)?;
        }
        Product::Suite { outcomes, .. } => {
            w.write_record(["criterion", "title", "pass", "summary"])
                .map_err(csv_err)?;
            for o in outcomes {
                w.write_record([o.id.to_string(), o.title.to_owned(), o.pass.to_string(), o.summary()])
                    .map_err(csv_err)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| usage(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}
