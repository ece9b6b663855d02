//! Journal-entry ingestion, attribute vocabulary construction, and binary
//! one-hot encoding.
//!
//! A journal entry is a tuple of K categorical attribute values. The
//! vocabulary assigns every distinct value of every attribute a column in
//! first-seen order; encoding a dataset of N entries yields an N x D
//! binary matrix with exactly one hot bit per attribute block.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Token substituted for empty CSV cells.
pub const MISSING_TOKEN: &str = "\u{27c2}MISSING\u{27c2}";

/// Ground-truth class of an entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Regular,
    GlobalAnomaly,
    LocalAnomaly,
    Unlabeled,
}

impl Label {
    /// Parses a label cell; matching is case-insensitive, an empty cell
    /// means unlabeled.
    pub fn parse(s: &str) -> Option<Label> {
        match s.trim().to_ascii_lowercase().as_str() {
            "regular" => Some(Label::Regular),
            "global" => Some(Label::GlobalAnomaly),
            "local" => Some(Label::LocalAnomaly),
            "" => Some(Label::Unlabeled),
            _ => None,
        }
    }

    /// Token written to the CSV label column.
    pub fn as_csv_str(self) -> &'static str {
        match self {
            Label::Regular => "regular",
            Label::GlobalAnomaly => "global",
            Label::LocalAnomaly => "local",
            Label::Unlabeled => "",
        }
    }

    pub fn is_anomaly(self) -> bool {
        matches!(self, Label::GlobalAnomaly | Label::LocalAnomaly)
    }
}

/// One categorical record: an opaque id plus K attribute values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JournalEntry {
    pub entry_id: String,
    pub attributes: Vec<String>,
    pub label: Label,
}

impl JournalEntry {
    pub fn new(entry_id: impl Into<String>, attributes: Vec<String>, label: Label) -> Self {
        JournalEntry {
            entry_id: entry_id.into(),
            attributes,
            label,
        }
    }
}

/// Distinct values of one attribute with their assigned columns.
#[derive(Debug, Clone)]
pub struct AttributeBlock {
    /// Values in first-seen order.
    pub values: Vec<String>,
    /// Column offset of this block in the encoded matrix.
    pub offset: usize,
    index_of: HashMap<String, usize>,
}

impl AttributeBlock {
    /// Position of `value` within the block, if present.
    pub fn position(&self, value: &str) -> Option<usize> {
        self.index_of.get(value).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Per-attribute value-to-column assignment covering a whole dataset.
#[derive(Debug, Clone)]
pub struct AttributeVocabulary {
    blocks: Vec<AttributeBlock>,
    dim: usize,
}

impl AttributeVocabulary {
    /// Total encoded dimension D.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Attribute count K.
    pub fn attribute_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[AttributeBlock] {
        &self.blocks
    }

    /// Absolute column of (attribute j, value), if the value is known.
    pub fn column_of(&self, attribute: usize, value: &str) -> Option<usize> {
        let block = self.blocks.get(attribute)?;
        block.position(value).map(|p| block.offset + p)
    }

    /// `[offset_0, offset_1, ..., D]` block boundaries, length K + 1.
    pub fn block_offsets(&self) -> Vec<usize> {
        let mut offsets: Vec<usize> = self.blocks.iter().map(|b| b.offset).collect();
        offsets.push(self.dim);
        offsets
    }

    /// True if `value` occurs in any attribute's block.
    pub fn contains_anywhere(&self, value: &str) -> bool {
        self.blocks.iter().any(|b| b.position(value).is_some())
    }

    /// Serializes the vocabulary as a JSON object mapping attribute name
    /// to its ordered value list, preserving attribute order.
    pub fn write_json<W: Write>(&self, names: &[String], mut w: W) -> Result<()> {
        if names.len() != self.blocks.len() {
            return Err(Error::RejectedInput(format!(
                "vocabulary has {} attributes but {} names were given",
                self.blocks.len(),
                names.len()
            )));
        }
        // serde_json writes map entries in emission order, so build the
        // document by hand to keep attribute order stable.
        let mut doc = String::from("{\n");
        for (i, (name, block)) in names.iter().zip(&self.blocks).enumerate() {
            let values: Vec<serde_json::Value> = block
                .values
                .iter()
                .map(|v| serde_json::Value::String(v.clone()))
                .collect();
            doc.push_str("  ");
            doc.push_str(&serde_json::to_string(name)?);
            doc.push_str(": ");
            doc.push_str(&serde_json::to_string(&values)?);
            if i + 1 < names.len() {
                doc.push(',');
            }
            doc.push('\n');
        }
        doc.push_str("}\n");
        w.write_all(doc.as_bytes())?;
        Ok(())
    }
}

/// Builds the vocabulary over `entries`: per attribute, distinct values in
/// first-seen order; D is the sum of block sizes.
pub fn build_vocabulary(entries: &[JournalEntry]) -> Result<AttributeVocabulary> {
    let first = entries
        .first()
        .ok_or_else(|| Error::RejectedInput("cannot build a vocabulary from zero entries".into()))?;
    let k = first.attributes.len();
    let mut values: Vec<Vec<String>> = vec![Vec::new(); k];
    let mut index_of: Vec<HashMap<String, usize>> = vec![HashMap::new(); k];
    for entry in entries {
        if entry.attributes.len() != k {
            return Err(Error::RejectedInput(format!(
                "entry '{}' has {} attributes, expected {}",
                entry.entry_id,
                entry.attributes.len(),
                k
            )));
        }
        for (j, value) in entry.attributes.iter().enumerate() {
            if !index_of[j].contains_key(value) {
                index_of[j].insert(value.clone(), values[j].len());
                values[j].push(value.clone());
            }
        }
    }
    let mut blocks = Vec::with_capacity(k);
    let mut offset = 0;
    for (vals, idx) in values.into_iter().zip(index_of) {
        let len = vals.len();
        blocks.push(AttributeBlock {
            values: vals,
            offset,
            index_of: idx,
        });
        offset += len;
    }
    Ok(AttributeVocabulary { blocks, dim: offset })
}

/// Dense one-hot matrix over a dataset, with its companion labels.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedMatrix {
    n_rows: usize,
    dim: usize,
    data: Vec<u8>,
    labels: Vec<Label>,
    block_offsets: Vec<usize>,
}

impl EncodedMatrix {
    /// Wraps raw one-hot rows. Every row must have exactly one hot bit per
    /// attribute block.
    pub fn from_rows(
        data: Vec<u8>,
        dim: usize,
        block_offsets: Vec<usize>,
        labels: Vec<Label>,
    ) -> Result<EncodedMatrix> {
        if dim == 0 || !data.len().is_multiple_of(dim) || data.is_empty() {
            return Err(Error::RejectedInput(format!(
                "data length {} is not a positive multiple of dimension {dim}",
                data.len()
            )));
        }
        let n_rows = data.len() / dim;
        if labels.len() != n_rows {
            return Err(Error::RejectedInput(format!(
                "{} labels for {n_rows} rows",
                labels.len()
            )));
        }
        if block_offsets.first() != Some(&0)
            || block_offsets.last() != Some(&dim)
            || block_offsets.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::RejectedInput(
                "block offsets must ascend from 0 to the encoded dimension".into(),
            ));
        }
        let matrix = EncodedMatrix {
            n_rows,
            dim,
            data,
            labels,
            block_offsets,
        };
        for i in 0..n_rows {
            matrix.check_row(matrix.row(i))?;
        }
        Ok(matrix)
    }

    fn check_row(&self, row: &[u8]) -> Result<()> {
        for w in self.block_offsets.windows(2) {
            let mut hot = 0usize;
            for &bit in &row[w[0]..w[1]] {
                match bit {
                    0 => {}
                    1 => hot += 1,
                    other => {
                        return Err(Error::RejectedInput(format!(
                            "encoded cell must be 0 or 1, got {other}"
                        )))
                    }
                }
            }
            if hot != 1 {
                return Err(Error::RejectedInput(format!(
                    "block {}..{} has {hot} hot bits, expected exactly 1",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    /// Encoded dimension D.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Attribute count K.
    pub fn attribute_count(&self) -> usize {
        self.block_offsets.len() - 1
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn block_offsets(&self) -> &[usize] {
        &self.block_offsets
    }

    /// Columns of the hot bits of row `i`, ascending; K indices per row.
    pub fn hot_indices(&self, i: usize) -> Vec<usize> {
        self.row(i)
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == 1)
            .map(|(j, _)| j)
            .collect()
    }

    /// Copies row `i` into `buf` as f64.
    pub fn row_f64_into(&self, i: usize, buf: &mut [f64]) {
        for (dst, &src) in buf.iter_mut().zip(self.row(i)) {
            *dst = src as f64;
        }
    }
}

/// One-hot encodes `entries` against `vocab`. Every attribute value must
/// already be present in the vocabulary; the vocabulary is always built
/// over the full population being scored.
pub fn one_hot_encode(
    entries: &[JournalEntry],
    vocab: &AttributeVocabulary,
) -> Result<EncodedMatrix> {
    if entries.is_empty() {
        return Err(Error::RejectedInput("cannot encode zero entries".into()));
    }
    let d = vocab.dim();
    let k = vocab.attribute_count();
    let mut data = vec![0u8; entries.len() * d];
    let mut labels = Vec::with_capacity(entries.len());
    for (i, entry) in entries.iter().enumerate() {
        if entry.attributes.len() != k {
            return Err(Error::RejectedInput(format!(
                "entry '{}' has {} attributes, vocabulary expects {k}",
                entry.entry_id,
                entry.attributes.len()
            )));
        }
        let row = &mut data[i * d..(i + 1) * d];
        for (j, value) in entry.attributes.iter().enumerate() {
            let col = vocab.column_of(j, value).ok_or_else(|| {
                Error::RejectedInput(format!(
                    "entry '{}': attribute {j} value '{value}' is not in the vocabulary",
                    entry.entry_id
                ))
            })?;
            row[col] = 1;
        }
        labels.push(entry.label);
    }
    EncodedMatrix::from_rows(data, d, vocab.block_offsets(), labels)
}

/// Inverts one encoded row back to its attribute value tuple.
pub fn decode(row: &[u8], vocab: &AttributeVocabulary) -> Result<Vec<String>> {
    if row.len() != vocab.dim() {
        return Err(Error::DimensionMismatch {
            expected: vocab.dim(),
            actual: row.len(),
        });
    }
    let mut values = Vec::with_capacity(vocab.attribute_count());
    for block in vocab.blocks() {
        let slice = &row[block.offset..block.offset + block.len()];
        let mut hot = None;
        for (p, &bit) in slice.iter().enumerate() {
            match (bit, hot) {
                (0, _) => {}
                (1, None) => hot = Some(p),
                (1, Some(_)) => {
                    return Err(Error::RejectedInput(format!(
                        "malformed row: multiple hot bits in block at offset {}",
                        block.offset
                    )))
                }
                (other, _) => {
                    return Err(Error::RejectedInput(format!(
                        "encoded cell must be 0 or 1, got {other}"
                    )))
                }
            }
        }
        let p = hot.ok_or_else(|| {
            Error::RejectedInput(format!(
                "malformed row: no hot bit in block at offset {}",
                block.offset
            ))
        })?;
        values.push(block.values[p].clone());
    }
    Ok(values)
}

/// Loads journal entries from an RFC 4180 CSV file with a header row.
///
/// `schema` names the attribute columns in order; `label_column`, when
/// given, must name a column holding `regular` / `global` / `local`
/// (case-insensitive, empty meaning unlabeled). Empty attribute cells
/// become [`MISSING_TOKEN`]. Entry ids are taken from an `entry_id`
/// column when one exists, otherwise rows are numbered from 1 in file
/// order.
pub fn load_csv<P: AsRef<Path>>(
    path: P,
    schema: &[String],
    label_column: Option<&str>,
) -> Result<Vec<JournalEntry>> {
    let file = std::fs::File::open(path.as_ref())?;
    read_entries(file, schema, label_column)
}

/// Same as [`load_csv`] over any reader.
pub fn read_entries<R: Read>(
    reader: R,
    schema: &[String],
    label_column: Option<&str>,
) -> Result<Vec<JournalEntry>> {
    let mut csv_reader = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    let column_index = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let attr_cols: Vec<usize> = schema
        .iter()
        .map(|name| column_index(name))
        .collect::<Result<_>>()?;
    let label_col = label_column.map(&column_index).transpose()?;
    let id_col = headers.iter().position(|h| h == "entry_id");

    let mut entries = Vec::new();
    for (row_number, record) in csv_reader.records().enumerate() {
        let record = record.map_err(|e| match e.position() {
            Some(pos) => Error::MalformedRow {
                line: pos.line(),
                reason: e.to_string(),
            },
            None => Error::Csv(e),
        })?;
        let line = record
            .position()
            .map(|p| p.line())
            .unwrap_or(row_number as u64 + 2);
        let attributes: Vec<String> = attr_cols
            .iter()
            .map(|&c| {
                let cell = record.get(c).unwrap_or("");
                if cell.is_empty() {
                    MISSING_TOKEN.to_string()
                } else {
                    cell.to_string()
                }
            })
            .collect();
        let label = match label_col {
            Some(c) => {
                let cell = record.get(c).unwrap_or("");
                Label::parse(cell).ok_or_else(|| Error::MalformedRow {
                    line,
                    reason: format!("unknown label '{cell}'"),
                })?
            }
            None => Label::Unlabeled,
        };
        let entry_id = match id_col {
            Some(c) => record.get(c).unwrap_or("").to_string(),
            None => (row_number + 1).to_string(),
        };
        entries.push(JournalEntry {
            entry_id,
            attributes,
            label,
        });
    }
    Ok(entries)
}

/// Inspects the header and loads all non-reserved columns as attributes.
///
/// Columns named `entry_id` and `label` are treated as id and label; the
/// remaining columns, in header order, form the schema. Returns the
/// schema alongside the entries.
pub fn load_csv_auto<P: AsRef<Path>>(path: P) -> Result<(Vec<String>, Vec<JournalEntry>)> {
    let file = std::fs::File::open(path.as_ref())?;
    let mut csv_reader = csv::ReaderBuilder::new().from_reader(file);
    let headers = csv_reader.headers()?.clone();
    let schema: Vec<String> = headers
        .iter()
        .filter(|h| *h != "entry_id" && *h != "label")
        .map(|h| h.to_string())
        .collect();
    if schema.is_empty() {
        return Err(Error::RejectedInput(
            "csv has no attribute columns".into(),
        ));
    }
    let label = headers.iter().any(|h| h == "label").then_some("label");
    drop(csv_reader);
    let entries = load_csv(path, &schema, label)?;
    Ok((schema, entries))
}

/// Writes entries as CSV: the attribute columns in schema order followed
/// by a `label` column.
pub fn write_csv<W: Write>(
    mut w: W,
    schema: &[String],
    entries: &[JournalEntry],
) -> Result<()> {
    let mut writer = csv::Writer::from_writer(&mut w);
    let mut header: Vec<&str> = schema.iter().map(|s| s.as_str()).collect();
    header.push("label");
    writer.write_record(&header)?;
    for entry in entries {
        if entry.attributes.len() != schema.len() {
            return Err(Error::RejectedInput(format!(
                "entry '{}' has {} attributes, schema has {}",
                entry.entry_id,
                entry.attributes.len(),
                schema.len()
            )));
        }
        let mut record: Vec<&str> = entry.attributes.iter().map(|s| s.as_str()).collect();
        record.push(entry.label.as_csv_str());
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn entry(values: &[&str]) -> JournalEntry {
        JournalEntry::new(
            "t",
            values.iter().map(|s| s.to_string()).collect(),
            Label::Unlabeled,
        )
    }

    #[test]
    fn vocabulary_counts_distinct_values() {
        let entries = vec![entry(&["A", "X"]), entry(&["A", "Y"]), entry(&["B", "X"])];
        let vocab = build_vocabulary(&entries).unwrap();
        assert_eq!(vocab.blocks()[0].len(), 2);
        assert_eq!(vocab.blocks()[1].len(), 2);
        assert_eq!(vocab.dim(), 4);
    }

    #[test]
    fn vocabulary_is_first_seen_deterministic() {
        let entries = vec![entry(&["B", "Y"]), entry(&["A", "X"]), entry(&["B", "X"])];
        let v1 = build_vocabulary(&entries).unwrap();
        let v2 = build_vocabulary(&entries).unwrap();
        assert_eq!(v1.blocks()[0].values, vec!["B", "A"]);
        for j in 0..2 {
            assert_eq!(v1.blocks()[j].values, v2.blocks()[j].values);
            assert_eq!(v1.blocks()[j].offset, v2.blocks()[j].offset);
        }
    }

    #[test]
    fn vocabulary_rejects_ragged_entries() {
        let entries = vec![entry(&["A", "X"]), entry(&["A"])];
        assert!(matches!(
            build_vocabulary(&entries),
            Err(Error::RejectedInput(_))
        ));
    }

    #[test]
    fn encode_produces_expected_row() {
        let entries = vec![entry(&["A", "X"]), entry(&["B", "Y"])];
        let vocab = build_vocabulary(&entries).unwrap();
        let matrix = one_hot_encode(&entries, &vocab).unwrap();
        assert_eq!(matrix.row(0), &[1, 0, 1, 0]);
        assert_eq!(matrix.row(1), &[0, 1, 0, 1]);
    }

    #[test]
    fn encode_rejects_out_of_vocabulary_value() {
        let known = vec![entry(&["A", "X"])];
        let vocab = build_vocabulary(&known).unwrap();
        let stranger = vec![entry(&["A", "Z"])];
        let err = one_hot_encode(&stranger, &vocab).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains('Z') && msg.contains("attribute 1"), "{msg}");
    }

    #[test]
    fn decode_inverts_encode() {
        let entries = vec![entry(&["A", "X"]), entry(&["B", "Y"]), entry(&["A", "Y"])];
        let vocab = build_vocabulary(&entries).unwrap();
        let matrix = one_hot_encode(&entries, &vocab).unwrap();
        for (i, e) in entries.iter().enumerate() {
            assert_eq!(decode(matrix.row(i), &vocab).unwrap(), e.attributes);
        }
    }

    #[test]
    fn decode_rejects_double_hot_block() {
        let entries = vec![entry(&["A", "X"]), entry(&["B", "Y"])];
        let vocab = build_vocabulary(&entries).unwrap();
        assert!(matches!(
            decode(&[1, 1, 0, 0], &vocab),
            Err(Error::RejectedInput(_))
        ));
        assert!(matches!(
            decode(&[1, 0, 0, 0], &vocab),
            Err(Error::RejectedInput(_))
        ));
    }

    #[test]
    fn loads_csv_with_labels_and_missing_cells() {
        let csv = "doc_type,account,label\nDT1,ACC1,regular\nDT2,,LOCAL\nDT1,ACC2,global\n";
        let schema = vec!["doc_type".to_string(), "account".to_string()];
        let entries = read_entries(csv.as_bytes(), &schema, Some("label")).unwrap();
        assert_eq!(entries.len(), 3);
        assert_eq!(entries[0].attributes.len(), 2);
        assert_eq!(entries[1].attributes[1], MISSING_TOKEN);
        assert_eq!(entries[1].label, Label::LocalAnomaly);
        assert_eq!(entries[2].label, Label::GlobalAnomaly);
        assert_eq!(entries[0].entry_id, "1");
        assert_eq!(entries[2].entry_id, "3");
    }

    #[test]
    fn load_reports_missing_column() {
        let csv = "doc_type\nDT1\n";
        let schema = vec!["doc_type".to_string(), "account".to_string()];
        let err = read_entries(csv.as_bytes(), &schema, None).unwrap_err();
        assert!(matches!(err, Error::MissingColumn(c) if c == "account"));
    }

    #[test]
    fn load_reports_malformed_row_with_line_number() {
        let csv = "doc_type,account\nDT1,ACC1\nDT2,ACC2,EXTRA\n";
        let schema = vec!["doc_type".to_string(), "account".to_string()];
        let err = read_entries(csv.as_bytes(), &schema, None).unwrap_err();
        match err {
            Error::MalformedRow { line, .. } => assert_eq!(line, 3),
            other => panic!("expected malformed row, got {other}"),
        }
    }

    #[test]
    fn load_reports_unknown_label() {
        let csv = "a,label\nx,bogus\n";
        let schema = vec!["a".to_string()];
        let err = read_entries(csv.as_bytes(), &schema, Some("label")).unwrap_err();
        assert!(matches!(err, Error::MalformedRow { line: 2, .. }));
    }

    #[test]
    fn csv_round_trip_preserves_entries() {
        let schema = vec!["a".to_string(), "b".to_string()];
        let entries = vec![
            JournalEntry::new("1", vec!["v,1".into(), "w\"q\"".into()], Label::Regular),
            JournalEntry::new("2", vec![MISSING_TOKEN.into(), "plain".into()], Label::LocalAnomaly),
        ];
        let mut buf = Vec::new();
        write_csv(&mut buf, &schema, &entries).unwrap();
        let back = read_entries(buf.as_slice(), &schema, Some("label")).unwrap();
        for (orig, parsed) in entries.iter().zip(&back) {
            assert_eq!(orig.attributes, parsed.attributes);
            assert_eq!(orig.label, parsed.label);
        }
    }

    #[test]
    fn vocab_json_keeps_attribute_and_value_order() {
        let entries = vec![entry(&["B", "Y"]), entry(&["A", "X"])];
        let vocab = build_vocabulary(&entries).unwrap();
        let names = vec!["second".to_string(), "first".to_string()];
        let mut buf = Vec::new();
        vocab.write_json(&names, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let second = text.find("\"second\"").unwrap();
        let first = text.find("\"first\"").unwrap();
        assert!(second < first, "{text}");
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["second"][0], "B");
        assert_eq!(parsed["second"][1], "A");
    }

    proptest! {
        #[test]
        fn every_row_sums_to_k_and_blocks_to_one(
            rows in proptest::collection::vec(
                (0usize..3, 0usize..4, 0usize..2), 1..40)
        ) {
            let entries: Vec<JournalEntry> = rows
                .iter()
                .map(|(a, b, c)| entry(&[
                    format!("a{a}").as_str(),
                    format!("b{b}").as_str(),
                    format!("c{c}").as_str(),
                ]))
                .collect();
            let vocab = build_vocabulary(&entries).unwrap();
            let matrix = one_hot_encode(&entries, &vocab).unwrap();
            for i in 0..matrix.n_rows() {
                let row = matrix.row(i);
                let total: u32 = row.iter().map(|&b| b as u32).sum();
                prop_assert_eq!(total, 3);
                for w in matrix.block_offsets().windows(2) {
                    let block: u32 = row[w[0]..w[1]].iter().map(|&b| b as u32).sum();
                    prop_assert_eq!(block, 1);
                }
                prop_assert_eq!(decode(row, &vocab).unwrap(), entries[i].attributes.clone());
            }
        }
    }
}
