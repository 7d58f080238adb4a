use std::fs::File;
use std::io::{self, BufWriter, Write};

use serde_json::{json, Value};

use crate::config::RunConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn header(cfg: &RunConfig) -> Value {
    json!({
        "tool": "soskp",
        "version": VERSION,
        "config": cfg,
    })
}

pub fn sink(cfg: &RunConfig) -> io::Result<Box<dyn Write>> {
    Ok(match &cfg.output {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_json(cfg: &RunConfig, body: Value) -> io::Result<()> {
    let mut doc = header(cfg);
    if let (Value::Object(dst), Value::Object(src)) = (&mut doc, body) {
        dst.extend(src);
    }
    let mut w = sink(cfg)?;
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)?;
    w.flush()
}

/// CSV preceded by `#` comment lines carrying the version and config.
pub fn write_csv<F>(cfg: &RunConfig, extra: &[String], rows: F) -> io::Result<()>
where
    F: FnOnce(&mut csv::Writer<&mut Box<dyn Write>>) -> csv::Result<()>,
{
    let mut w = sink(cfg)?;
    writeln!(w, "# soskp {VERSION}")?;
    writeln!(w, "# config {}", serde_json::to_string(cfg)?)?;
    for line in extra {
        writeln!(w, "# {line}")?;
    }
    {
        let mut c = csv::Writer::from_writer(&mut w);
        rows(&mut c).map_err(io::Error::other)?;
        c.flush()?;
    }
    w.flush()
}
