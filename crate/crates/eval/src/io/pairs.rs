use serde::{Deserialize, Serialize};

use tablegrid_core::datagen::{PagePair, PairLabel};

use super::IoError;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairRecord<'a> {
    doc_id: std::borrow::Cow<'a, str>,
    first_page: usize,
    label: std::borrow::Cow<'a, str>,
}

/// One `{"doc_id", "first_page", "label"}` object per line.
pub fn write_pairs_jsonl(pairs: &[PagePair]) -> Vec<u8> {
    let mut out = Vec::new();
    for p in pairs {
        let record = PairRecord {
            doc_id: p.doc_id.as_str().into(),
            first_page: p.first_page,
            label: p.label.name().into(),
        };
        serde_json::to_writer(&mut out, &record).expect("pair records always serialize");
        out.push(b'\n');
    }
    out
}

/// Reads a pair list; blank lines are skipped.
pub fn read_pairs_jsonl(bytes: &[u8]) -> Result<Vec<PagePair>, IoError> {
    let text = std::str::from_utf8(bytes).map_err(IoError::schema)?;
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: PairRecord = serde_json::from_str(line)
            .map_err(|e| IoError::schema(format!("line {}: {e}", i + 1)))?;
        let label = PairLabel::from_name(&record.label).ok_or_else(|| {
            IoError::schema(format!("line {}: unknown label {:?}", i + 1, record.label))
        })?;
        pairs.push(PagePair {
            doc_id: record.doc_id.into_owned(),
            first_page: record.first_page,
            label,
        });
    }
    Ok(pairs)
}
