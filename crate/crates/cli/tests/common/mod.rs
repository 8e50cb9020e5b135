#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use foodlda::imageproc::{encode_ppm, Image};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CLASSES: [&str; 3] = ["blue_blobs", "green_blobs", "red_blobs"];

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_foodlda"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("FOOD101_ROOT").output().expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// One textured image of class `class`: a few Gaussian blobs whose colour and
/// placement depend on the class, over noisy grey.
pub fn blob_image(class: usize, size: usize, rng: &mut ChaCha8Rng) -> Image {
    let tint: [f64; 3] = match class {
        0 => [40.0, 60.0, 220.0],
        1 => [50.0, 210.0, 60.0],
        _ => [220.0, 50.0, 40.0],
    };
    let home = [(0.3, 0.3), (0.5, 0.7), (0.7, 0.4)][class % 3];
    let blobs: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            let cx = (home.0 + 0.08 * standard_normal(rng)) * size as f64;
            let cy = (home.1 + 0.08 * standard_normal(rng)) * size as f64;
            let r = size as f64 * rng.gen_range(0.12..0.22);
            (cx, cy, r)
        })
        .collect();
    Image::from_fn(size, size, |x, y| {
        let mut w = 0.0;
        for &(cx, cy, r) in &blobs {
            let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
            w += (-d2 / (2.0 * r * r)).exp();
        }
        let w = w.min(1.0);
        let mut px = [0u8; 3];
        for (c, v) in px.iter_mut().enumerate() {
            let base = 110.0 + 12.0 * standard_normal(rng);
            *v = (base * (1.0 - w) + tint[c] * w).round().clamp(0.0, 255.0) as u8;
        }
        px
    })
    .expect("valid image")
}

/// Food-101 shaped tree of PPM images: `images/<class>/<id>.ppm` plus meta
/// lists putting every fourth image in the official test list.
pub fn synthetic_food_tree(root: &Path, per_class: usize, size: usize, seed: u64) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = String::new();
    let mut test = String::new();
    for (k, name) in CLASSES.iter().enumerate() {
        let dir = root.join("images").join(name);
        fs::create_dir_all(&dir).unwrap();
        for i in 0..per_class {
            let img = blob_image(k, size, &mut rng);
            fs::write(dir.join(format!("{i:04}.ppm")), encode_ppm(&img)).unwrap();
            let line = format!("{name}/{i:04}\n");
            if i % 4 == 3 {
                test.push_str(&line);
            } else {
                train.push_str(&line);
            }
        }
    }
    fs::create_dir_all(root.join("meta")).unwrap();
    fs::write(root.join("meta/train.txt"), train).unwrap();
    fs::write(root.join("meta/test.txt"), test).unwrap();
    root.to_path_buf()
}

/// Runs preprocess, pca, lda-train and evaluate over a synthetic tree and
/// returns the parsed report.
pub struct Pipeline {
    pub cache: PathBuf,
    pub pca: PathBuf,
    pub scree: PathBuf,
    pub lda: PathBuf,
    pub ld: PathBuf,
    pub report: PathBuf,
}

impl Pipeline {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            cache: dir.join("cache.feat"),
            pca: dir.join("pca.json"),
            scree: dir.join("scree.csv"),
            lda: dir.join("lda.json"),
            ld: dir.join("ld.csv"),
            report: dir.join("report.json"),
        }
    }

    pub fn run_all(&self, root: &Path, size: usize, k: usize, seed: &str) -> [Output; 4] {
        let size = size.to_string();
        let k = k.to_string();
        let pre = run(&[
            "preprocess", "--root", s(root), "--size", &size, "--out", s(&self.cache), "--chunk", "32",
        ]);
        let pca = run(&[
            "pca", "--cache", s(&self.cache), "--split-seed", seed, "--train-frac", "0.75", "--k", &k,
            "--out", s(&self.pca), "--scree", s(&self.scree),
        ]);
        let lda = run(&[
            "lda-train", "--cache", s(&self.cache), "--pca", s(&self.pca), "--split-seed", seed,
            "--train-frac", "0.75", "--out", s(&self.lda), "--ld-scatter", s(&self.ld),
        ]);
        let eval = run(&[
            "evaluate", "--cache", s(&self.cache), "--pca", s(&self.pca), "--lda", s(&self.lda),
            "--split-seed", seed, "--train-frac", "0.75", "--report", s(&self.report),
        ]);
        [pre, pca, lda, eval]
    }
}
