//! Library side of the `renorm` command-line tool: run configuration,
//! tabular output and the subcommand drivers.

pub mod commands;
pub mod config;
pub mod error;
pub mod table;

use std::fs;
use std::io::Write;
use std::path::Path;

use commands::Output;
use config::Format;
use error::CliError;

/// Writes every output into `dir` (one file each) or, without a directory,
/// to `sink` with a `# name` header line before each artifact.
pub fn emit(
    outputs: &[Output],
    format: Format,
    dir: Option<&Path>,
    sink: &mut dyn Write,
) -> Result<(), CliError> {
    if let Some(dir) = dir {
        fs::create_dir_all(dir)?;
    }
    for out in outputs {
        let (ext, body) = render(out, format);
        match dir {
            Some(dir) => fs::write(dir.join(format!("{}.{ext}", out.name())), body)?,
            None => write!(sink, "# {}\n{body}", out.name())?,
        }
    }
    Ok(())
}

fn render(out: &Output, format: Format) -> (&'static str, String) {
    match out {
        Output::Table(t) => match format {
            Format::Csv => ("csv", t.to_csv()),
            Format::Json => ("json", t.to_json()),
        },
        Output::Json { value, .. } => {
            let mut s = serde_json::to_string_pretty(value).expect("json value serializes");
            s.push('\n');
            ("json", s)
        }
        Output::Text { text, .. } => ("txt", text.clone()),
    }
}
