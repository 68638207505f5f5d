//! Serial versus parallel: the corpus check and a fuzz campaign.

use std::hint::black_box;
use std::path::{Path, PathBuf};

use criterion::{criterion_group, criterion_main, Criterion};

use langcert::driver::{run_corpus, CheckOptions};
use langcert::oracle::{elaborate, fuzz_soundness, FuzzConfig};
use langcert::syntax::load;

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/corpus")
}

fn corpus_sweep(c: &mut Criterion) {
    let dir = corpus();
    let manifest = dir.join("manifest.txt");
    let opts = CheckOptions::default();
    let mut g = c.benchmark_group("corpus");
    for (label, serial) in [("serial", true), ("parallel", false)] {
        g.bench_function(label, |b| {
            b.iter(|| black_box(run_corpus(&dir, &manifest, &opts, serial).expect("corpus runs")))
        });
    }
    g.finish();
}

fn fuzz_sweep(c: &mut Criterion) {
    let path = corpus().join("lists.mod");
    let text = std::fs::read_to_string(&path).expect("fixture exists");
    let rules = elaborate(&load("lists.mod", &text).expect("fixture parses"));
    let mut g = c.benchmark_group("fuzz lists");
    g.sample_size(10);
    for (label, serial) in [("serial", true), ("parallel", false)] {
        let cfg = FuzzConfig {
            serial,
            ..FuzzConfig::default()
        };
        g.bench_function(label, |b| b.iter(|| black_box(fuzz_soundness(&rules, &cfg))));
    }
    g.finish();
}

criterion_group!(benches, corpus_sweep, fuzz_sweep);
criterion_main!(benches);
