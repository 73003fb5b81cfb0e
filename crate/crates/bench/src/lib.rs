//! Benchmark-only crate; see `benches/hot_paths.rs`.
//!
//! Shared fixture builders live here so benches stay terse.

use conversum_core::corpus::{DocumentRecord, LanguageTag, Split};

/// A deterministic multi-sentence document for generation and scoring
/// benches.
pub fn bench_record(sentences: usize) -> DocumentRecord {
    let text: Vec<String> = (0..sentences)
        .map(|i| format!("sentence number {i} speaks of rivers markets and councils m{i}."))
        .collect();
    let text = text.join(" ");
    let summary = text
        .split_inclusive('.')
        .take(sentences / 2)
        .collect::<String>();
    DocumentRecord {
        id: "bench-doc".to_string(),
        text,
        summary: summary.trim().to_string(),
        source_lang: LanguageTag::parse("english").expect("registry language"),
        target_lang: LanguageTag::parse("bengali").expect("registry language"),
        split: Some(Split::Test),
    }
}
