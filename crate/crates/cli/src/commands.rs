use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};

use foodlda::augment::{augment_variant, AugmentConfig};
use foodlda::dataset::{build_feature_cache, scan_food101, split_rows, subset, FeatureCache, RowSplit, SplitTag};
use foodlda::evalstats::{evaluate_with_confidence, render_table, ConfusionMatrix};
use foodlda::imageproc::{encode_ppm, load_image, preprocess as preprocess_image, PreprocessConfig};
use foodlda::lda::{fit_lda_chunked, LdaModel, Shrinkage};
use foodlda::numlin::{MappedRows, RowSelection, RowSource};
use foodlda::pca::{fit_pca_with, PcaModel, PcaOptions};
use foodlda::realfmt::format_real;

use crate::manifest::{manifest_path, RunManifest};
use crate::{
    AugmentArgs, EvaluateArgs, Failure, FeatureArgs, LdaTrainArgs, PcaArgs, PredictArgs, PreprocessArgs, SplitArgs,
};

type Outcome = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn data(msg: impl Into<String>) -> Failure {
    Failure::Data(msg.into())
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json values serialize"));
}

fn check_chunk(chunk: usize) -> Outcome {
    if chunk == 0 {
        return Err(usage("--chunk must be at least 1"));
    }
    Ok(())
}

fn check_split(s: &SplitArgs) -> Outcome {
    if !(s.train_frac > 0.0 && s.train_frac < 1.0) {
        return Err(usage(format!("--train-frac must lie in (0, 1), got {}", s.train_frac)));
    }
    if !(s.val_frac >= 0.0) || s.train_frac + s.val_frac >= 1.0 {
        return Err(usage(format!(
            "--val-frac must be >= 0 and leave room for a test set, got {}",
            s.val_frac
        )));
    }
    Ok(())
}

fn record_split(m: &mut RunManifest, s: &SplitArgs, cache: &FeatureCache) {
    m.param("split_seed", s.split_seed)
        .param("train_frac", s.train_frac)
        .param("val_frac", s.val_frac)
        .param("cache_rows", cache.n())
        .param("cache_dim", cache.d());
}

/// The split stored in an upstream manifest must match this run's split, or
/// training rows could leak into the test set.
fn check_upstream(upstream: &RunManifest, which: &Path, s: &SplitArgs, cache: &FeatureCache) -> Outcome {
    let expect = [
        ("split_seed", json!(s.split_seed)),
        ("train_frac", json!(s.train_frac)),
        ("val_frac", json!(s.val_frac)),
        ("cache_rows", json!(cache.n())),
    ];
    for (key, want) in expect {
        let got = upstream.params.get(key).cloned().unwrap_or(Value::Null);
        if got != want {
            return Err(data(format!(
                "{key} is {want} here but {got} in {}; the split would not match training",
                which.display()
            )));
        }
    }
    Ok(())
}

fn open_cache(path: &Path) -> Result<FeatureCache, Failure> {
    Ok(FeatureCache::open(path)?)
}

fn make_split(cache: &FeatureCache, s: &SplitArgs) -> Result<RowSplit, Failure> {
    Ok(split_rows(
        cache.classes(),
        cache.labels().len(),
        s.train_frac,
        s.val_frac,
        s.split_seed,
    )?)
}

fn load_features(f: &FeatureArgs) -> Result<Option<PcaModel>, Failure> {
    match &f.pca {
        Some(p) => Ok(Some(PcaModel::load(p)?)),
        None => Ok(None),
    }
}

/// Chosen rows of the cache, projected through PCA when one is given.
fn feature_rows<'a>(
    cache: &'a FeatureCache,
    rows: Vec<usize>,
    pca: Option<&'a PcaModel>,
) -> Result<Box<dyn RowSource + 'a>, Failure> {
    let selected = RowSelection::new(cache, rows)?;
    Ok(match pca {
        Some(p) => {
            if p.dim() != cache.d() {
                return Err(data(format!(
                    "PCA model expects {} features but the cache holds {}",
                    p.dim(),
                    cache.d()
                )));
            }
            Box::new(MappedRows::new(selected, p.k(), move |b| p.transform_block(b)))
        }
        None => Box::new(selected),
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Outcome {
    fs::write(path, bytes).map_err(|e| data(format!("cannot write {}: {e}", path.display())))
}

pub fn preprocess(a: &PreprocessArgs, workers: Option<usize>) -> Outcome {
    let start = Instant::now();
    check_chunk(a.chunk)?;
    let cfg = PreprocessConfig {
        target_size: a.size,
        median_radius: a.median_radius,
        equalize: !a.no_equalize,
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let tag = match a.official_split.as_str() {
        "all" => SplitTag::All,
        "train" => SplitTag::Train,
        "test" => SplitTag::Test,
        other => return Err(usage(format!("--official-split must be all, train or test, got {other:?}"))),
    };

    let mut idx = scan_food101(&a.root, tag)?;
    if !a.classes.is_empty() {
        idx = subset(&idx, &a.classes)?;
    }
    eprintln!("preprocessing {} images of {} classes", idx.len(), idx.classes().len());
    let built = build_feature_cache(&idx, &cfg, &a.out, a.chunk)?;
    for (path, why) in &built.failures {
        eprintln!("skipped {}: {why}", path.display());
    }

    let mut m = RunManifest::new("preprocess");
    m.param("classes", idx.classes())
        .param("official_split", &a.official_split)
        .param("target_size", cfg.target_size)
        .param("median_radius", cfg.median_radius)
        .param("equalize", cfg.equalize)
        .param("chunk", a.chunk)
        .param("workers", workers)
        .param("rows", built.cache.n())
        .param("dim", built.cache.d())
        .param("failures", built.failures.len())
        .input("root", &a.root)
        .output("cache", &a.out);
    m.write(&a.out, start.elapsed())?;

    let failures: Vec<Value> = built
        .failures
        .iter()
        .map(|(p, why)| json!({"path": p, "error": why}))
        .collect();
    print_json(&json!({
        "n": built.cache.n(),
        "d": built.cache.d(),
        "classes": built.cache.labels(),
        "failures": failures,
    }));
    Ok(())
}

pub fn pca(a: &PcaArgs) -> Outcome {
    let start = Instant::now();
    check_chunk(a.chunk)?;
    check_split(&a.split)?;
    if let Some(t) = a.target_variance {
        if !(t > 0.0 && t <= 1.0) {
            return Err(usage(format!("--target-variance must lie in (0, 1], got {t}")));
        }
    }
    let cache = open_cache(&a.cache)?;
    let split = make_split(&cache, &a.split)?;
    let train_labels: Vec<usize> = split.train.iter().map(|&r| cache.classes()[r]).collect();
    let train = RowSelection::new(&cache, split.train.clone())?;
    let opts = PcaOptions {
        chunk: a.chunk,
        ..PcaOptions::default()
    };
    let fitted = fit_pca_with(&train, a.k, &opts)?;
    let model = match a.target_variance {
        Some(t) => {
            let k = fitted.choose_k(t)?;
            fitted.truncated(k)?
        }
        None => fitted.clone(),
    };
    let cumulative = model.cumulative_ratio()?.last().copied().unwrap_or(0.0);
    model.save(&a.out)?;
    if let Some(path) = &a.scree {
        write_file(path, &fitted.scree_csv())?;
    }
    if let Some(path) = &a.pc_scatter {
        let projected = MappedRows::new(&train, model.k(), |b| model.transform_block(b));
        let mut csv = String::from("pc1,pc2,label\n");
        let mut row = 0;
        while row < projected.n_rows() {
            let end = (row + a.chunk).min(projected.n_rows());
            let block = projected.read_block(row, end)?;
            for (z, &c) in block.row_iter().zip(&train_labels[row..end]) {
                let pc2 = z.get(1).copied().unwrap_or(0.0);
                let _ = writeln!(csv, "{},{},{}", format_real(z[0]), format_real(pc2), cache.labels()[c]);
            }
            row = end;
        }
        write_file(path, csv.as_bytes())?;
    }

    let mut m = RunManifest::new("pca");
    record_split(&mut m, &a.split, &cache);
    m.param("k_requested", a.k)
        .param("k", model.k())
        .param("target_variance", a.target_variance)
        .param("strategy", if cache.d() > split.train.len() { "dual" } else { "primal" })
        .param("chunk", a.chunk)
        .param("train_rows", split.train.len())
        .param("cumulative_variance", cumulative)
        .input("cache", &a.cache)
        .output("model", &a.out);
    if let Some(p) = &a.scree {
        m.output("scree", p);
    }
    if let Some(p) = &a.pc_scatter {
        m.output("pc_scatter", p);
    }
    m.write(&a.out, start.elapsed())?;

    eprintln!(
        "PCA: {} components of {} explain {:.4} of the variance on {} training rows",
        model.k(),
        cache.d(),
        cumulative,
        split.train.len()
    );
    print_json(&json!({
        "k": model.k(),
        "dim": model.dim(),
        "train_rows": split.train.len(),
        "cumulative_variance": cumulative,
    }));
    Ok(())
}

fn parse_shrinkage(s: &str) -> Result<Shrinkage, Failure> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Shrinkage::Auto);
    }
    match s.parse::<f64>() {
        Ok(e) if e >= 0.0 && e.is_finite() => Ok(Shrinkage::Fixed(e)),
        _ => Err(usage(format!("--shrinkage must be \"auto\" or a number >= 0, got {s:?}"))),
    }
}

fn check_pca_manifest(pca_path: &Path, s: &SplitArgs, cache: &FeatureCache) -> Outcome {
    let mpath = manifest_path(pca_path);
    if !mpath.exists() {
        eprintln!("warning: {} not found; cannot confirm the PCA split", mpath.display());
        return Ok(());
    }
    let upstream = RunManifest::read(&mpath).map_err(|e| data(format!("{}: {e}", mpath.display())))?;
    check_upstream(&upstream, &mpath, s, cache)
}

pub fn lda_train(a: &LdaTrainArgs) -> Outcome {
    let start = Instant::now();
    check_chunk(a.chunk)?;
    check_split(&a.split)?;
    let shrinkage = parse_shrinkage(&a.shrinkage)?;
    let cache = open_cache(&a.cache)?;
    if let Some(p) = &a.features.pca {
        check_pca_manifest(p, &a.split, &cache)?;
    }
    let pca = load_features(&a.features)?;
    let split = make_split(&cache, &a.split)?;
    let labels: Vec<usize> = split.train.iter().map(|&r| cache.classes()[r]).collect();
    let train = feature_rows(&cache, split.train.clone(), pca.as_ref())?;
    let model = fit_lda_chunked(&&*train, &labels, cache.labels(), shrinkage, a.chunk)?;

    let predicted = model.predict_rows(&&*train, a.chunk)?;
    let correct = predicted.iter().zip(&labels).filter(|(p, l)| p == l).count();
    let train_accuracy = correct as f64 / labels.len() as f64;
    model.save(&a.out)?;

    if let Some(path) = &a.ld_scatter {
        let mut csv = String::from("ld1,ld2,label\n");
        let mut row = 0;
        while row < train.n_rows() {
            let end = (row + a.chunk).min(train.n_rows());
            let block = train.read_block(row, end)?;
            for (x, &c) in block.row_iter().zip(&labels[row..end]) {
                let z = model.project(x)?;
                let ld2 = z.get(1).copied().unwrap_or(0.0);
                let _ = writeln!(csv, "{},{},{}", format_real(z[0]), format_real(ld2), cache.labels()[c]);
            }
            row = end;
        }
        write_file(path, csv.as_bytes())?;
    }

    let mut m = RunManifest::new("lda-train");
    record_split(&mut m, &a.split, &cache);
    m.param("features", if pca.is_some() { "pca" } else { "raw-pixels" })
        .param("shrinkage_requested", &a.shrinkage)
        .param("shrinkage", model.shrinkage())
        .param("axes", model.axes().rows())
        .param("chunk", a.chunk)
        .param("train_rows", labels.len())
        .param("train_accuracy", train_accuracy)
        .input("cache", &a.cache)
        .output("model", &a.out);
    if let Some(p) = &a.features.pca {
        m.input("pca", p);
    }
    if let Some(p) = &a.ld_scatter {
        m.output("ld_scatter", p);
    }
    m.write(&a.out, start.elapsed())?;

    eprintln!(
        "LDA: {} classes, {} discriminant axes, training accuracy {:.4}",
        model.n_classes(),
        model.axes().rows(),
        train_accuracy
    );
    print_json(&json!({
        "classes": model.class_labels(),
        "axes": model.axes().rows(),
        "shrinkage": model.shrinkage(),
        "train_rows": labels.len(),
        "train_accuracy": train_accuracy,
    }));
    Ok(())
}

pub fn evaluate(a: &EvaluateArgs) -> Outcome {
    let start = Instant::now();
    check_chunk(a.chunk)?;
    check_split(&a.split)?;
    if !(a.confidence > 0.0 && a.confidence < 1.0) {
        return Err(usage(format!("--confidence must lie in (0, 1), got {}", a.confidence)));
    }
    let cache = open_cache(&a.cache)?;
    let mpath = manifest_path(&a.lda);
    let upstream = RunManifest::read(&mpath)
        .map_err(|e| data(format!("training manifest {} unreadable: {e}", mpath.display())))?;
    check_upstream(&upstream, &mpath, &a.split, &cache)?;

    let pca = load_features(&a.features)?;
    let model = LdaModel::load(&a.lda)?;
    if model.class_labels() != cache.labels() {
        return Err(data("the LDA model and the cache disagree on the class list"));
    }
    let split = make_split(&cache, &a.split)?;
    let actual: Vec<usize> = split.test.iter().map(|&r| cache.classes()[r]).collect();
    let test = feature_rows(&cache, split.test.clone(), pca.as_ref())?;
    if test.dim() != model.dim() {
        return Err(data(format!(
            "the LDA model expects {} features but the pipeline produces {}",
            model.dim(),
            test.dim()
        )));
    }
    let predicted = model.predict_rows(&&*test, a.chunk)?;
    let cm = ConfusionMatrix::from_indices(cache.labels().to_vec(), &actual, &predicted)?;
    let report = evaluate_with_confidence(&cm, a.confidence)?;
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| data(e.to_string()))?;
    text.push('\n');
    write_file(&a.report, text.as_bytes())?;

    let mut m = RunManifest::new("evaluate");
    record_split(&mut m, &a.split, &cache);
    m.param("features", if pca.is_some() { "pca" } else { "raw-pixels" })
        .param("confidence", a.confidence)
        .param("chunk", a.chunk)
        .param("test_rows", actual.len())
        .param("confusion", cm.counts())
        .input("cache", &a.cache)
        .input("lda", &a.lda)
        .output("report", &a.report);
    if let Some(p) = &a.features.pca {
        m.input("pca", p);
    }
    m.write(&a.report, start.elapsed())?;

    eprint!("{}", render_table(&report));
    print!("{text}");
    Ok(())
}

pub fn predict(a: &PredictArgs) -> Outcome {
    let pca = load_features(&a.features)?;
    let model = LdaModel::load(&a.lda)?;
    let d = pca.as_ref().map_or(model.dim(), |p| p.dim());
    if let Some(p) = &pca {
        if p.k() != model.dim() {
            return Err(data(format!(
                "PCA keeps {} components but the LDA model expects {}",
                p.k(),
                model.dim()
            )));
        }
    }
    // features are 3 s^2 values for an s x s RGB image
    let side = ((d / 3) as f64).sqrt().round() as usize;
    if 3 * side * side != d {
        return Err(data(format!("{d} features do not describe a square RGB image")));
    }
    let cfg = PreprocessConfig {
        target_size: side,
        median_radius: a.median_radius,
        equalize: !a.no_equalize,
    };
    let img = load_image(&a.image).map_err(|e| data(format!("{}: {e}", a.image.display())))?;
    let x = preprocess_image(&img, &cfg)?.into_inner();
    let z = match &pca {
        Some(p) => p.transform(&x)?,
        None => x,
    };
    let pred = model.predict(&z)?;
    let mut out = json!({
        "label": model.class_labels()[pred.label],
        "class_index": pred.label,
    });
    if a.probs {
        let post = model.posterior(&z)?;
        out["posteriors"] = model
            .class_labels()
            .iter()
            .zip(post)
            .map(|(l, p)| json!({"label": l, "probability": p}))
            .collect();
    }
    print_json(&out);
    Ok(())
}

pub fn augment_preview(a: &AugmentArgs) -> Outcome {
    let start = Instant::now();
    if a.count == 0 {
        return Err(usage("--count must be at least 1"));
    }
    let cfg = if a.zero_range {
        AugmentConfig::identity(a.count)
    } else {
        AugmentConfig {
            variants_per_image: a.count,
            ..AugmentConfig::default()
        }
    };
    let img = load_image(&a.image).map_err(|e| data(format!("{}: {e}", a.image.display())))?;
    fs::create_dir_all(&a.out)?;
    let mut written: Vec<PathBuf> = Vec::with_capacity(a.count);
    let variants: Vec<_> = {
        use rayon::prelude::*;
        (0..a.count)
            .into_par_iter()
            .map(|v| augment_variant(&img, &cfg, a.seed, a.image_index, v))
            .collect()
    };
    for (v, out) in variants.iter().enumerate() {
        let path = a.out.join(format!("seed{}_variant{:03}.ppm", a.seed, v));
        write_file(&path, &encode_ppm(out))?;
        written.push(path);
    }

    let mut m = RunManifest::new("augment-preview");
    m.param("seed", a.seed)
        .param("count", a.count)
        .param("image_index", a.image_index)
        .param("config", &cfg)
        .input("image", &a.image)
        .output("dir", &a.out);
    m.write(&a.out, start.elapsed())?;
    print_json(&json!({ "files": written }));
    Ok(())
}
