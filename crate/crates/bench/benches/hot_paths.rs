//! Criterion benchmarks for the numeric hot paths: hinge loss and
//! subgradient over full pair sets, trigram encoding, candidate ranking
//! and BERTScore.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use conversum_bench::bench_record;
use conversum_core::contrastive::{
    loss_subgradient, ranking_loss, ContrastivePairBatch, LossConfig,
};
use conversum_core::corpus::LanguageTag;
use conversum_core::evaluation::bertscore;
use conversum_core::generation::{stub_generate, GenerationConfig};
use conversum_core::scoring::{
    encode, rank_candidates, tri_similarity, StubEncoder, StubTokenEncoder, TagPrefixLangId,
};

fn loss_benches(c: &mut Criterion) {
    let mut group = c.benchmark_group("ranking_loss");
    let config = LossConfig::default();
    for n in [8usize, 64, 256] {
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let batch = ContrastivePairBatch::all_pairs(scores, &config);
        group.bench_with_input(BenchmarkId::new("loss", n), &batch, |b, batch| {
            b.iter(|| ranking_loss(black_box(batch)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("subgradient", n), &batch, |b, batch| {
            b.iter(|| loss_subgradient(black_box(batch)).unwrap())
        });
    }
    group.finish();
}

fn scoring_benches(c: &mut Criterion) {
    let encoder = StubEncoder::new();
    let record = bench_record(16);

    c.bench_function("stub_encode_document", |b| {
        b.iter(|| encode(black_box(&record.text), &encoder).unwrap())
    });

    let cand = encode(&record.summary, &encoder).unwrap();
    let refr = encode(&record.summary, &encoder).unwrap();
    let doc = encode(&record.text, &encoder).unwrap();
    c.bench_function("tri_similarity_dim16", |b| {
        b.iter(|| tri_similarity(black_box(&cand), black_box(&refr), black_box(&doc)).unwrap())
    });

    let gen_config = GenerationConfig {
        target_languages: vec![
            LanguageTag::parse("bengali").unwrap(),
            LanguageTag::parse("english").unwrap(),
        ],
        ..GenerationConfig::default()
    };
    let set = stub_generate(&record, &gen_config).unwrap();
    let lang_id = TagPrefixLangId;
    c.bench_function("rank_candidates_8", |b| {
        b.iter(|| {
            rank_candidates(
                black_box(&set),
                &record.text,
                &record.summary,
                &record.target_lang,
                &encoder,
                &lang_id,
            )
            .unwrap()
        })
    });

    c.bench_function("stub_generate_8_candidates", |b| {
        b.iter(|| stub_generate(black_box(&record), &gen_config).unwrap())
    });
}

fn bertscore_benches(c: &mut Criterion) {
    let tokens = StubTokenEncoder::new();
    let record = bench_record(16);
    c.bench_function("bertscore_doc_vs_summary", |b| {
        b.iter(|| bertscore(black_box(&record.summary), black_box(&record.text), &tokens).unwrap())
    });
}

criterion_group!(benches, loss_benches, scoring_benches, bertscore_benches);
criterion_main!(benches);
