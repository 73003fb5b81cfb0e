//! Thin adapters from the public datasets' native JSONL layouts to the
//! canonical five-key record schema.
//!
//! Adapters only reshape records; downloading and mirroring are out of
//! scope. Output files load with the plain [`super::load_dataset`] path,
//! which keeps every downstream module independent of upstream layout
//! churn.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{CorpusError, LanguageTag, Split};

fn io_err(path: &Path, source: std::io::Error) -> CorpusError {
    CorpusError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn get_str<'a>(obj: &'a serde_json::Map<String, serde_json::Value>, key: &str) -> Option<&'a str> {
    obj.get(key).and_then(|v| v.as_str())
}

fn emit(
    writer: &mut impl Write,
    out_path: &Path,
    id: &str,
    text: &str,
    summary: &str,
    source_lang: &LanguageTag,
    target_lang: &LanguageTag,
) -> Result<(), CorpusError> {
    let record = serde_json::json!({
        "id": id,
        "text": text,
        "summary": summary,
        "source_lang": source_lang.as_str(),
        "target_lang": target_lang.as_str(),
    });
    writeln!(writer, "{record}").map_err(|e| io_err(out_path, e))
}

/// Convert one XL-Sum native split file (keys `id`/`url`, `title`,
/// `summary`, `text`) into canonical monolingual records. Returns the
/// number of records written.
pub fn adapt_xlsum_file(
    native_path: &Path,
    lang: &LanguageTag,
    split: Split,
    out_path: &Path,
) -> Result<usize, CorpusError> {
    let reader = BufReader::new(File::open(native_path).map_err(|e| io_err(native_path, e))?);
    let mut writer = BufWriter::new(File::create(out_path).map_err(|e| io_err(out_path, e))?);
    let mut written = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let raw = line.map_err(|e| io_err(native_path, e))?;
        if raw.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&raw).map_err(|e| CorpusError::Json {
                line: line_no,
                detail: e.to_string(),
            })?;
        let obj = value.as_object().ok_or_else(|| CorpusError::Json {
            line: line_no,
            detail: "expected a JSON object".to_string(),
        })?;
        let text = get_str(obj, "text").ok_or_else(|| CorpusError::MissingField {
            line: line_no,
            key: "text".to_string(),
        })?;
        let summary = get_str(obj, "summary").ok_or_else(|| CorpusError::MissingField {
            line: line_no,
            key: "summary".to_string(),
        })?;
        let fallback = format!("{}-{}-{line_no}", lang.as_str(), split.as_str());
        let id = get_str(obj, "id")
            .or_else(|| get_str(obj, "url"))
            .unwrap_or(&fallback);
        emit(&mut writer, out_path, id, text, summary, lang, lang)?;
        written += 1;
    }
    writer.flush().map_err(|e| io_err(out_path, e))?;
    Ok(written)
}

/// Convert one CrossSum native split file (keys `source_url`,
/// `target_url`, `summary`, `text`) into canonical cross-lingual records.
pub fn adapt_crosssum_file(
    native_path: &Path,
    source_lang: &LanguageTag,
    target_lang: &LanguageTag,
    split: Split,
    out_path: &Path,
) -> Result<usize, CorpusError> {
    let reader = BufReader::new(File::open(native_path).map_err(|e| io_err(native_path, e))?);
    let mut writer = BufWriter::new(File::create(out_path).map_err(|e| io_err(out_path, e))?);
    let mut written = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let raw = line.map_err(|e| io_err(native_path, e))?;
        if raw.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&raw).map_err(|e| CorpusError::Json {
                line: line_no,
                detail: e.to_string(),
            })?;
        let obj = value.as_object().ok_or_else(|| CorpusError::Json {
            line: line_no,
            detail: "expected a JSON object".to_string(),
        })?;
        let text = get_str(obj, "text").ok_or_else(|| CorpusError::MissingField {
            line: line_no,
            key: "text".to_string(),
        })?;
        let summary = get_str(obj, "summary").ok_or_else(|| CorpusError::MissingField {
            line: line_no,
            key: "summary".to_string(),
        })?;
        let fallback = format!(
            "{}-{}-{}-{line_no}",
            source_lang.as_str(),
            target_lang.as_str(),
            split.as_str()
        );
        let id = get_str(obj, "source_url").unwrap_or(&fallback);
        emit(
            &mut writer,
            out_path,
            id,
            text,
            summary,
            source_lang,
            target_lang,
        )?;
        written += 1;
    }
    writer.flush().map_err(|e| io_err(out_path, e))?;
    Ok(written)
}

fn find_native_split(
    native_dir: &Path,
    stem: &str,
    split: Split,
) -> Result<std::path::PathBuf, CorpusError> {
    // Public dumps name validation either `val` or `validation`.
    let names: &[&str] = match split {
        Split::Train => &["train"],
        Split::Validation => &["val", "validation"],
        Split::Test => &["test"],
    };
    for name in names {
        let candidate = native_dir.join(format!("{stem}_{name}.jsonl"));
        if candidate.is_file() {
            return Ok(candidate);
        }
    }
    Err(CorpusError::MissingSplitFile {
        path: native_dir.join(format!("{stem}_{}.jsonl", names[0])),
    })
}

/// Convert a whole XL-Sum dataset directory (`{lang}_{split}.jsonl`
/// files) into a canonical dataset directory. Returns per-split record
/// counts in train/validation/test order.
pub fn adapt_xlsum_dataset(
    native_dir: &Path,
    lang: &LanguageTag,
    out_dir: &Path,
) -> Result<[usize; 3], CorpusError> {
    std::fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    let mut counts = [0usize; 3];
    for (slot, split) in counts.iter_mut().zip(Split::ALL) {
        let native = find_native_split(native_dir, lang.as_str(), split)?;
        *slot = adapt_xlsum_file(&native, lang, split, &out_dir.join(split.file_name()))?;
    }
    Ok(counts)
}

/// Convert one CrossSum language-pair directory
/// (`{source}-{target}_{split}.jsonl` files) into a canonical dataset
/// directory.
pub fn adapt_crosssum_dataset(
    native_dir: &Path,
    source_lang: &LanguageTag,
    target_lang: &LanguageTag,
    out_dir: &Path,
) -> Result<[usize; 3], CorpusError> {
    std::fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    let stem = format!("{}-{}", source_lang.as_str(), target_lang.as_str());
    let mut counts = [0usize; 3];
    for (slot, split) in counts.iter_mut().zip(Split::ALL) {
        let native = find_native_split(native_dir, &stem, split)?;
        *slot = adapt_crosssum_file(
            &native,
            source_lang,
            target_lang,
            split,
            &out_dir.join(split.file_name()),
        )?;
    }
    Ok(counts)
}
