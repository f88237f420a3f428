use super::args::{Cli, Format};
use riordan_critline::{Error, Result};
use serde::Serialize;
use serde_json::Value;

pub const SCHEMA: u32 = 1;

/// Column-oriented form of a result.
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub struct Output {
    pub json: Value,
    pub table: Option<Table>,
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema: u32,
    tool: &'static str,
    version: &'static str,
    generated: String,
    config: &'a Cli,
    result: &'a Value,
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

pub fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Invalid(format!("serialization failed: {e}")))
}

pub fn render(cli: &Cli, format: Format, out: &Output) -> Result<String> {
    match format {
        Format::Json => {
            let env = Envelope {
                schema: SCHEMA,
                tool: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
                generated: timestamp(),
                config: cli,
                result: &out.json,
            };
            let mut s = serde_json::to_string_pretty(&env).map_err(|e| Error::Invalid(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let table = out.table.as_ref().ok_or_else(|| Error::Invalid("this command has no CSV form".into()))?;
            let config = serde_json::to_string(cli).map_err(|e| Error::Invalid(e.to_string()))?;
            let mut s = format!(
                "# tool: {} {}\n# schema: {SCHEMA}\n# generated: {}\n# config: {config}\n",
                env!("CARGO_PKG_NAME"),
                env!("CARGO_PKG_VERSION"),
                timestamp()
            );
            let mut w = csv::Writer::from_writer(vec![]);
            let csv_err = |e: csv::Error| Error::Invalid(format!("csv: {e}"));
            w.write_record(&table.columns).map_err(csv_err)?;
            for row in &table.rows {
                w.write_record(row).map_err(csv_err)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Invalid(format!("csv: {e}")))?;
            s.push_str(&String::from_utf8(bytes).map_err(|e| Error::Invalid(e.to_string()))?);
            Ok(s)
        }
    }
}
