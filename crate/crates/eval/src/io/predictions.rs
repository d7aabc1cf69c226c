use std::io::Write;
use std::path::Path;
use std::process::{Command, Stdio};

use tablegrid_core::parse::{parse_html_bytes, parse_span_markdown_bytes, ParseReport};

use super::{load_grid_list, IoError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictionFormat {
    Html,
    SpanMarkdown,
    GridJson,
}

impl PredictionFormat {
    pub const ALL: [PredictionFormat; 3] = [
        PredictionFormat::Html,
        PredictionFormat::SpanMarkdown,
        PredictionFormat::GridJson,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PredictionFormat::Html => "html",
            PredictionFormat::SpanMarkdown => "span-markdown",
            PredictionFormat::GridJson => "grid-json",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    /// File extensions, preferred first.
    pub fn extensions(self) -> &'static [&'static str] {
        match self {
            PredictionFormat::Html => &["html", "htm"],
            PredictionFormat::SpanMarkdown => &["md"],
            PredictionFormat::GridJson => &["json"],
        }
    }

    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|f| f.extensions().contains(&ext.as_str()))
    }
}

/// Parses one prediction file into grids.
///
/// Grid JSON goes through the strict loader and yields no warnings; the
/// markup formats are repaired and report what they changed.
pub fn parse_prediction(bytes: &[u8], format: PredictionFormat) -> Result<ParseReport, IoError> {
    match format {
        PredictionFormat::Html => Ok(parse_html_bytes(bytes)?),
        PredictionFormat::SpanMarkdown => Ok(parse_span_markdown_bytes(bytes)?),
        PredictionFormat::GridJson => Ok(ParseReport {
            grids: load_grid_list(bytes)?,
            warnings: Vec::new(),
            repaired: false,
        }),
    }
}

/// Rewrites raw model output before parsing, for formats that have no
/// native parser.
pub trait PreConvert: Send + Sync {
    fn convert(&self, raw: Vec<u8>) -> Result<Vec<u8>, String>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl PreConvert for Identity {
    fn convert(&self, raw: Vec<u8>) -> Result<Vec<u8>, String> {
        Ok(raw)
    }
}

/// Pipes the prediction through an external program, stdin to stdout.
#[derive(Debug, Clone)]
pub struct CommandConverter {
    pub program: String,
    pub args: Vec<String>,
}

impl CommandConverter {
    /// Splits a command line on whitespace.
    pub fn from_command_line(line: &str) -> Option<Self> {
        let mut words = line.split_whitespace().map(str::to_string);
        Some(Self {
            program: words.next()?,
            args: words.collect(),
        })
    }
}

impl PreConvert for CommandConverter {
    fn convert(&self, raw: Vec<u8>) -> Result<Vec<u8>, String> {
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| format!("cannot run {}: {e}", self.program))?;
        let mut stdin = child.stdin.take().expect("stdin is piped");
        // Write on a separate thread so a converter that streams output
        // before reading all input cannot deadlock.
        let writer = std::thread::spawn(move || stdin.write_all(&raw));
        let output = child
            .wait_with_output()
            .map_err(|e| format!("{} failed: {e}", self.program))?;
        writer
            .join()
            .map_err(|_| String::from("converter input thread panicked"))?
            .map_err(|e| format!("cannot write to {}: {e}", self.program))?;
        if !output.status.success() {
            return Err(format!(
                "{} exited with {}: {}",
                self.program,
                output.status,
                String::from_utf8_lossy(&output.stderr).trim()
            ));
        }
        Ok(output.stdout)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_by_name_and_extension() {
        for f in PredictionFormat::ALL {
            assert_eq!(PredictionFormat::from_name(f.name()), Some(f));
        }
        assert_eq!(
            PredictionFormat::from_path(Path::new("a/b.HTM")),
            Some(PredictionFormat::Html)
        );
        assert_eq!(PredictionFormat::from_path(Path::new("b.txt")), None);
    }

    #[test]
    fn markup_and_json_predictions() {
        let html = parse_prediction(
            b"<table><tr><td>a</td></tr></table>",
            PredictionFormat::Html,
        )
        .unwrap();
        assert_eq!(html.grids.len(), 1);
        let md = parse_prediction(b"| a | b |", PredictionFormat::SpanMarkdown).unwrap();
        assert_eq!(md.grids[0].n_cols(), 2);
        assert!(parse_prediction(b"{", PredictionFormat::GridJson).is_err());
        assert!(parse_prediction(b"\xff", PredictionFormat::Html).is_err());
    }

    #[test]
    fn command_converter_pipes_bytes() {
        let cat = CommandConverter::from_command_line("cat").unwrap();
        assert_eq!(cat.convert(b"<table>".to_vec()).unwrap(), b"<table>");
        let missing = CommandConverter::from_command_line("definitely-not-a-program-xyz").unwrap();
        assert!(missing.convert(Vec::new()).is_err());
        assert!(CommandConverter::from_command_line("  ").is_none());
    }
}
