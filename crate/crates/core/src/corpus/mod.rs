//! Dataset ingestion and validation.
//!
//! The canonical on-disk format is JSONL with one record per line:
//! `{"id", "text", "summary", "source_lang", "target_lang"}`. A dataset is
//! a directory holding one such file per split (`train.jsonl`,
//! `validation.jsonl`, `test.jsonl`). Adapters for the public datasets'
//! native layouts live in [`adapters`] and emit this same schema.

pub mod adapters;
pub mod registry;

use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use registry::{is_registered, LanguageTag, LANGUAGE_NAMES};

/// Errors raised while loading or validating corpus records.
#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: malformed JSON: {detail}")]
    Json { line: usize, detail: String },
    #[error("line {line}: missing field \"{key}\"")]
    MissingField { line: usize, key: String },
    #[error("line {line}: empty {field} after trim")]
    EmptyText { line: usize, field: String },
    #[error("line {line}: unknown language tag \"{tag}\"")]
    UnknownLanguage { line: usize, tag: String },
    #[error(
        "line {line}: monolingual dataset but source_lang {source_tag} != target_lang {target_tag}"
    )]
    LanguageMismatch {
        line: usize,
        source_tag: String,
        target_tag: String,
    },
    #[error("missing split file {path}")]
    MissingSplitFile { path: PathBuf },
}

/// Dataset split tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];

    pub fn as_str(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }

    /// File name for this split within a dataset directory.
    pub fn file_name(&self) -> String {
        format!("{}.jsonl", self.as_str())
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "validation" | "val" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split \"{other}\"")),
        }
    }
}

/// One source document with its reference summary and language tags.
/// The unit every pipeline stage consumes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub id: String,
    pub text: String,
    pub summary: String,
    pub source_lang: LanguageTag,
    pub target_lang: LanguageTag,
    #[serde(skip)]
    pub split: Option<Split>,
}

impl DocumentRecord {
    pub fn is_monolingual(&self) -> bool {
        self.source_lang == self.target_lang
    }
}

/// Accepted/rejected record counts per split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitStats {
    pub dataset_name: String,
    pub train_count: usize,
    pub val_count: usize,
    pub test_count: usize,
}

impl SplitStats {
    pub fn total(&self) -> usize {
        self.train_count + self.val_count + self.test_count
    }
}

/// On-disk record formats the loader understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordFormat {
    Jsonl,
}

/// Validation options applied to every record.
#[derive(Debug, Clone, Copy, Default)]
pub struct ValidationOptions {
    /// Require `source_lang == target_lang` for every record.
    pub monolingual: bool,
}

fn required_str(
    obj: &serde_json::Map<String, serde_json::Value>,
    key: &str,
    line: usize,
) -> Result<String, CorpusError> {
    match obj.get(key) {
        Some(serde_json::Value::String(s)) => Ok(s.clone()),
        Some(_) | None => Err(CorpusError::MissingField {
            line,
            key: key.to_string(),
        }),
    }
}

fn parse_record_line(
    raw: &str,
    line: usize,
    split: Split,
    options: ValidationOptions,
) -> Result<DocumentRecord, CorpusError> {
    let value: serde_json::Value = serde_json::from_str(raw).map_err(|e| CorpusError::Json {
        line,
        detail: e.to_string(),
    })?;
    let obj = value.as_object().ok_or_else(|| CorpusError::Json {
        line,
        detail: "expected a JSON object".to_string(),
    })?;

    let id = required_str(obj, "id", line)?;
    let text = required_str(obj, "text", line)?;
    let summary = required_str(obj, "summary", line)?;
    let source_raw = required_str(obj, "source_lang", line)?;
    let target_raw = required_str(obj, "target_lang", line)?;

    if text.trim().is_empty() {
        return Err(CorpusError::EmptyText {
            line,
            field: "text".to_string(),
        });
    }
    if summary.trim().is_empty() {
        return Err(CorpusError::EmptyText {
            line,
            field: "summary".to_string(),
        });
    }

    let source_lang = LanguageTag::parse_at(&source_raw, line)?;
    let target_lang = LanguageTag::parse_at(&target_raw, line)?;
    if options.monolingual && source_lang != target_lang {
        return Err(CorpusError::LanguageMismatch {
            line,
            source_tag: source_lang.to_string(),
            target_tag: target_lang.to_string(),
        });
    }

    Ok(DocumentRecord {
        id,
        text,
        summary,
        source_lang,
        target_lang,
        split: Some(split),
    })
}

/// Stream records from one JSONL split file, in file order. Each item is
/// either an accepted record or the validation error for that line; the
/// caller decides whether errors are fatal (strict) or skipped (lenient).
pub fn load_dataset(
    path: &Path,
    format: RecordFormat,
    split: Split,
) -> Result<impl Iterator<Item = Result<DocumentRecord, CorpusError>>, CorpusError> {
    let RecordFormat::Jsonl = format;
    load_with_options(path, split, ValidationOptions::default())
}

/// [`load_dataset`] with explicit validation options.
pub fn load_with_options(
    path: &Path,
    split: Split,
    options: ValidationOptions,
) -> Result<impl Iterator<Item = Result<DocumentRecord, CorpusError>>, CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let path = path.to_path_buf();
    let reader = BufReader::new(file);
    Ok(reader.lines().enumerate().filter_map(move |(idx, line)| {
        let line_no = idx + 1;
        match line {
            Err(source) => Some(Err(CorpusError::Io {
                path: path.clone(),
                source,
            })),
            Ok(raw) if raw.trim().is_empty() => None,
            Ok(raw) => Some(parse_record_line(&raw, line_no, split, options)),
        }
    }))
}

/// Collect a record stream leniently: invalid records are logged, counted
/// and skipped. Returns the accepted records and the skip count.
pub fn collect_lenient<I>(stream: I) -> (Vec<DocumentRecord>, usize)
where
    I: Iterator<Item = Result<DocumentRecord, CorpusError>>,
{
    let mut records = Vec::new();
    let mut skipped = 0;
    for item in stream {
        match item {
            Ok(record) => records.push(record),
            Err(err) => {
                log::warn!("skipping record: {err}");
                skipped += 1;
            }
        }
    }
    (records, skipped)
}

/// Collect a record stream strictly: the first invalid record aborts.
pub fn collect_strict<I>(stream: I) -> Result<Vec<DocumentRecord>, CorpusError>
where
    I: Iterator<Item = Result<DocumentRecord, CorpusError>>,
{
    stream.collect()
}

/// Serialize records to canonical JSONL. Round-trips with the loader.
pub fn write_jsonl(records: &[DocumentRecord], path: &Path) -> Result<(), CorpusError> {
    let file = File::create(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut writer = BufWriter::new(file);
    for record in records {
        let line = serde_json::to_string(record).expect("record serialization is infallible");
        writeln!(writer, "{line}").map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
    }
    writer.flush().map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Handle over a dataset directory with one JSONL file per split.
#[derive(Debug, Clone)]
pub struct Dataset {
    dir: PathBuf,
    name: String,
    options: ValidationOptions,
}

impl Dataset {
    /// Open a dataset directory. The directory must exist; split files are
    /// checked lazily so partially materialized datasets stay usable.
    pub fn open(dir: &Path) -> Result<Self, CorpusError> {
        Self::open_with_options(dir, ValidationOptions::default())
    }

    pub fn open_with_options(dir: &Path, options: ValidationOptions) -> Result<Self, CorpusError> {
        if !dir.is_dir() {
            return Err(CorpusError::MissingSplitFile {
                path: dir.to_path_buf(),
            });
        }
        let name = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".to_string());
        Ok(Dataset {
            dir: dir.to_path_buf(),
            name,
            options,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn split_path(&self, split: Split) -> PathBuf {
        self.dir.join(split.file_name())
    }

    /// Stream one split. Missing split files are an error.
    pub fn load_split(
        &self,
        split: Split,
    ) -> Result<impl Iterator<Item = Result<DocumentRecord, CorpusError>>, CorpusError> {
        let path = self.split_path(split);
        if !path.is_file() {
            return Err(CorpusError::MissingSplitFile { path });
        }
        load_with_options(&path, split, self.options)
    }

    /// Accepted-record counts across all three splits (lenient).
    pub fn split_stats(&self) -> Result<SplitStats, CorpusError> {
        let mut counts = [0usize; 3];
        for (slot, split) in counts.iter_mut().zip(Split::ALL) {
            let (records, _skipped) = collect_lenient(self.load_split(split)?);
            *slot = records.len();
        }
        Ok(SplitStats {
            dataset_name: self.name.clone(),
            train_count: counts[0],
            val_count: counts[1],
            test_count: counts[2],
        })
    }

    /// Records of one split whose (source_lang, target_lang) match, in
    /// file order.
    pub fn language_pair_view(
        &self,
        split: Split,
        source_lang: &LanguageTag,
        target_lang: &LanguageTag,
    ) -> Result<Vec<DocumentRecord>, CorpusError> {
        let (records, _skipped) = collect_lenient(self.load_split(split)?);
        Ok(filter_language_pair(records, source_lang, target_lang))
    }

    /// All distinct (source_lang, target_lang) pairs observed in a split.
    pub fn observed_pairs(
        &self,
        split: Split,
    ) -> Result<BTreeSet<(LanguageTag, LanguageTag)>, CorpusError> {
        let (records, _skipped) = collect_lenient(self.load_split(split)?);
        Ok(records
            .into_iter()
            .map(|r| (r.source_lang, r.target_lang))
            .collect())
    }
}

/// Pure filter behind [`Dataset::language_pair_view`]; order stable.
pub fn filter_language_pair(
    records: Vec<DocumentRecord>,
    source_lang: &LanguageTag,
    target_lang: &LanguageTag,
) -> Vec<DocumentRecord> {
    records
        .into_iter()
        .filter(|r| &r.source_lang == source_lang && &r.target_lang == target_lang)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_fixture(lines: &[&str]) -> tempfile::NamedTempFile {
        let file = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(file.path(), format!("{}\n", lines.join("\n"))).unwrap();
        file
    }

    fn line(id: &str, src: &str, tgt: &str) -> String {
        format!(
            r#"{{"id":"{id}","text":"some document text","summary":"a summary","source_lang":"{src}","target_lang":"{tgt}"}}"#
        )
    }

    #[test]
    fn well_formed_fixture_loads_in_order() {
        let l1 = line("a", "bengali", "english");
        let l2 = line("b", "bengali", "english");
        let l3 = line("c", "thai", "tamil");
        let file = write_fixture(&[&l1, &l2, &l3]);
        let stream = load_dataset(file.path(), RecordFormat::Jsonl, Split::Train).unwrap();
        let records = collect_strict(stream).unwrap();
        assert_eq!(records.len(), 3);
        assert_eq!(records[0].id, "a");
        assert_eq!(records[1].id, "b");
        assert_eq!(records[2].id, "c");
        assert_eq!(records[0].split, Some(Split::Train));
    }

    #[test]
    fn missing_summary_names_the_line() {
        let l1 = line("a", "bengali", "english");
        let bad = r#"{"id":"b","text":"t","source_lang":"bengali","target_lang":"english"}"#;
        let file = write_fixture(&[&l1, bad]);
        let stream = load_dataset(file.path(), RecordFormat::Jsonl, Split::Train).unwrap();
        let err = collect_strict(stream).unwrap_err();
        match err {
            CorpusError::MissingField { line, key } => {
                assert_eq!(line, 2);
                assert_eq!(key, "summary");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn blank_text_rejected() {
        let bad = r#"{"id":"a","text":"   ","summary":"s","source_lang":"bengali","target_lang":"english"}"#;
        let file = write_fixture(&[bad]);
        let stream = load_dataset(file.path(), RecordFormat::Jsonl, Split::Test).unwrap();
        let err = collect_strict(stream).unwrap_err();
        assert!(matches!(err, CorpusError::EmptyText { line: 1, .. }));
    }

    #[test]
    fn unknown_language_rejected() {
        let bad = r#"{"id":"a","text":"t","summary":"s","source_lang":"klingon","target_lang":"english"}"#;
        let file = write_fixture(&[bad]);
        let stream = load_dataset(file.path(), RecordFormat::Jsonl, Split::Test).unwrap();
        let err = collect_strict(stream).unwrap_err();
        match err {
            CorpusError::UnknownLanguage { line, tag } => {
                assert_eq!(line, 1);
                assert_eq!(tag, "klingon");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn monolingual_option_rejects_cross_lingual_records() {
        let l = line("a", "bengali", "english");
        let file = write_fixture(&[&l]);
        let stream = load_with_options(
            file.path(),
            Split::Train,
            ValidationOptions { monolingual: true },
        )
        .unwrap();
        let err = collect_strict(stream).unwrap_err();
        assert!(matches!(err, CorpusError::LanguageMismatch { line: 1, .. }));
    }

    #[test]
    fn lenient_collection_skips_and_counts() {
        let good = line("a", "bengali", "english");
        let bad = r#"{"id":"b"}"#;
        let file = write_fixture(&[&good, bad, &good]);
        let stream = load_dataset(file.path(), RecordFormat::Jsonl, Split::Train).unwrap();
        let (records, skipped) = collect_lenient(stream);
        assert_eq!(records.len(), 2);
        assert_eq!(skipped, 1);
    }

    #[test]
    fn iso_alias_tags_canonicalize_on_load() {
        let l = line("a", "bn", "en");
        let file = write_fixture(&[&l]);
        let stream = load_dataset(file.path(), RecordFormat::Jsonl, Split::Train).unwrap();
        let records = collect_strict(stream).unwrap();
        assert_eq!(records[0].source_lang.as_str(), "bengali");
        assert_eq!(records[0].target_lang.as_str(), "english");
    }

    #[test]
    fn language_pair_filter_semantics() {
        let bn_en = LanguageTag::parse("bn").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let l1 = line("a", "bengali", "english");
        let l2 = line("b", "thai", "tamil");
        let l3 = line("c", "bengali", "english");
        std::fs::write(dir.path().join("test.jsonl"), format!("{l1}\n{l2}\n{l3}\n")).unwrap();
        let dataset = Dataset::open(dir.path()).unwrap();
        let en = LanguageTag::parse("en").unwrap();
        let view = dataset
            .language_pair_view(Split::Test, &bn_en, &en)
            .unwrap();
        assert_eq!(view.len(), 2);
        assert_eq!(view[0].id, "a");
        assert_eq!(view[1].id, "c");

        let km = LanguageTag::parse("tamil").unwrap();
        let empty = dataset.language_pair_view(Split::Test, &en, &km).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn split_stats_on_empty_files() {
        let dir = tempfile::tempdir().unwrap();
        for split in Split::ALL {
            std::fs::write(dir.path().join(split.file_name()), "").unwrap();
        }
        let dataset = Dataset::open(dir.path()).unwrap();
        let stats = dataset.split_stats().unwrap();
        assert_eq!(
            (stats.train_count, stats.val_count, stats.test_count),
            (0, 0, 0)
        );
        assert_eq!(stats.total(), 0);
    }

    #[test]
    fn jsonl_round_trip_is_identity() {
        let l1 = line("a", "bengali", "english");
        let l2 = line("b", "thai", "tamil");
        let file = write_fixture(&[&l1, &l2]);
        let stream = load_dataset(file.path(), RecordFormat::Jsonl, Split::Train).unwrap();
        let records = collect_strict(stream).unwrap();

        let out = tempfile::NamedTempFile::new().unwrap();
        write_jsonl(&records, out.path()).unwrap();
        let stream = load_dataset(out.path(), RecordFormat::Jsonl, Split::Train).unwrap();
        let reloaded = collect_strict(stream).unwrap();
        assert_eq!(records, reloaded);
    }
}
