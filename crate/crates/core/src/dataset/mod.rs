//! Food-101 directory scanning, class subsets, seeded stratified splits and
//! the on-disk feature cache.

mod cache;

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use cache::{build_feature_cache, write_cache, BuildReport, CacheWriter, FeatureCache, CACHE_MAGIC, CACHE_VERSION};

/// Extensions tried, in order, for each `<class>/<id>` meta line.
pub const IMAGE_EXTENSIONS: [&str; 3] = ["jpg", "ppm", "png"];

/// Guards `floor(frac * n)` against fractions such as 0.75 * 1000 landing a
/// hair below the integer.
const FLOOR_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTag {
    All,
    Train,
    Test,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub class: usize,
    /// Relative to the dataset root.
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetIndex {
    root: PathBuf,
    classes: Vec<String>,
    entries: Vec<Entry>,
    split_tag: SplitTag,
}

impl DatasetIndex {
    pub fn new(root: PathBuf, classes: Vec<String>, entries: Vec<Entry>, split_tag: SplitTag) -> Result<Self> {
        if let Some(e) = entries.iter().find(|e| e.class >= classes.len()) {
            return Err(Error::Argument(format!(
                "entry {} has class index {} but only {} classes exist",
                e.path.display(),
                e.class,
                classes.len()
            )));
        }
        let mut seen = HashSet::with_capacity(entries.len());
        if let Some(e) = entries.iter().find(|e| !seen.insert(&e.path)) {
            return Err(Error::Argument(format!("duplicate entry {}", e.path.display())));
        }
        Ok(Self {
            root,
            classes,
            entries,
            split_tag,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn split_tag(&self) -> SplitTag {
        self.split_tag
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn full_path(&self, entry: &Entry) -> PathBuf {
        self.root.join(&entry.path)
    }

    pub fn labels(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.class).collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes.len()];
        for e in &self.entries {
            counts[e.class] += 1;
        }
        counts
    }
}

fn read_meta(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::Layout(format!("missing {}", path.display())),
        _ => Error::Io(e),
    })?;
    let mut lines = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('/') {
            Some((class, id)) if !class.is_empty() && !id.is_empty() && !id.contains('/') => {
                lines.push(line.to_string())
            }
            _ => {
                return Err(Error::Layout(format!(
                    "{} line {}: expected <class>/<id>, got {line:?}",
                    path.display(),
                    no + 1
                )))
            }
        }
    }
    Ok(lines)
}

fn resolve_image(root: &Path, item: &str) -> Result<PathBuf> {
    for ext in IMAGE_EXTENSIONS {
        let rel = PathBuf::from("images").join(format!("{item}.{ext}"));
        if root.join(&rel).is_file() {
            return Ok(rel);
        }
    }
    Err(Error::MissingFile(root.join("images").join(format!("{item}.jpg"))))
}

/// Indexes a Food-101 style tree: `images/<class>/<id>.jpg` plus
/// `meta/train.txt` and `meta/test.txt`. Classes come from both meta files and
/// are sorted; `split` selects which list the entries come from.
pub fn scan_food101(root: &Path, split: SplitTag) -> Result<DatasetIndex> {
    if !root.join("meta").is_dir() {
        return Err(Error::Layout(format!("{} has no meta/ directory", root.display())));
    }
    let train = read_meta(&root.join("meta").join("train.txt"))?;
    let test = read_meta(&root.join("meta").join("test.txt"))?;

    let classes: Vec<String> = train
        .iter()
        .chain(&test)
        .map(|l| l.split_once('/').map(|(c, _)| c.to_string()).unwrap_or_default())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let items: Vec<&String> = match split {
        SplitTag::Train => train.iter().collect(),
        SplitTag::Test => test.iter().collect(),
        SplitTag::All | SplitTag::Custom => train.iter().chain(&test).collect(),
    };
    let mut entries = Vec::with_capacity(items.len());
    for item in items {
        let class_name = item.split_once('/').map(|(c, _)| c).unwrap_or_default();
        let class = classes.binary_search_by(|c| c.as_str().cmp(class_name)).expect("class collected above");
        entries.push(Entry {
            class,
            path: resolve_image(root, item)?,
        });
    }
    entries.sort_by(|a, b| (a.class, &a.path).cmp(&(b.class, &b.path)));
    entries.dedup_by(|a, b| a.path == b.path);
    let tag = if split == SplitTag::Custom { SplitTag::All } else { split };
    DatasetIndex::new(root.to_path_buf(), classes, entries, tag)
}

/// Keeps only the named classes, renumbered in request order.
pub fn subset<S: AsRef<str>>(idx: &DatasetIndex, classes: &[S]) -> Result<DatasetIndex> {
    if classes.is_empty() {
        return Err(Error::Argument("empty class list".into()));
    }
    let mut remap = vec![None; idx.classes.len()];
    let mut names = Vec::with_capacity(classes.len());
    for (new, name) in classes.iter().enumerate() {
        let name = name.as_ref();
        let old = idx
            .classes
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Argument(format!("unknown class {name:?}")))?;
        if remap[old].is_some() {
            return Err(Error::Argument(format!("class {name:?} requested twice")));
        }
        remap[old] = Some(new);
        names.push(name.to_string());
    }
    let mut entries: Vec<Entry> = idx
        .entries
        .iter()
        .filter_map(|e| {
            remap[e.class].map(|class| Entry {
                class,
                path: e.path.clone(),
            })
        })
        .collect();
    entries.sort_by(|a, b| (a.class, &a.path).cmp(&(b.class, &b.path)));
    DatasetIndex::new(idx.root.clone(), names, entries, idx.split_tag)
}

/// Row indices of each side of a split, ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowSplit {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

fn floor_frac(frac: f64, n: usize) -> usize {
    (frac * n as f64 + FLOOR_SLACK).floor() as usize
}

/// Per class: shuffle that class's rows (in row order) with a seeded stream,
/// then take `floor(train_frac n_k)` rows for training, `floor(val_frac n_k)`
/// for validation and the rest for testing.
pub fn split_rows(labels: &[usize], n_classes: usize, train_frac: f64, val_frac: f64, seed: u64) -> Result<RowSplit> {
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(Error::Argument(format!("train fraction {train_frac} outside (0, 1)")));
    }
    if !(0.0..1.0).contains(&val_frac) || train_frac + val_frac >= 1.0 {
        return Err(Error::Argument(format!(
            "validation fraction {val_frac} must be >= 0 and leave room for a test set"
        )));
    }
    let mut by_class = vec![Vec::new(); n_classes];
    for (row, &c) in labels.iter().enumerate() {
        if c >= n_classes {
            return Err(Error::Argument(format!("row {row} has class {c} outside 0..{n_classes}")));
        }
        by_class[c].push(row);
    }
    let mut split = RowSplit {
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
    };
    for (c, mut rows) in by_class.into_iter().enumerate() {
        if rows.is_empty() {
            continue;
        }
        let n_train = floor_frac(train_frac, rows.len());
        let n_val = floor_frac(val_frac, rows.len());
        if n_train == 0 || n_train + n_val >= rows.len() {
            return Err(Error::Degenerate(format!(
                "class {c} has {} rows, too few for a train/test split at {train_frac}",
                rows.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        rows.shuffle(&mut rng);
        split.train.extend_from_slice(&rows[..n_train]);
        split.val.extend_from_slice(&rows[n_train..n_train + n_val]);
        split.test.extend_from_slice(&rows[n_train + n_val..]);
    }
    split.train.sort_unstable();
    split.val.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}

fn pick(idx: &DatasetIndex, rows: &[usize]) -> DatasetIndex {
    DatasetIndex {
        root: idx.root.clone(),
        classes: idx.classes.clone(),
        entries: rows.iter().map(|&r| idx.entries[r].clone()).collect(),
        split_tag: SplitTag::Custom,
    }
}

/// Seeded per-class split of an index into train and test parts.
pub fn stratified_split(idx: &DatasetIndex, train_frac: f64, seed: u64) -> Result<(DatasetIndex, DatasetIndex)> {
    // entries are kept sorted, so the split does not depend on directory order
    let mut sorted = idx.clone();
    sorted
        .entries
        .sort_by(|a, b| (a.class, &a.path).cmp(&(b.class, &b.path)));
    let split = split_rows(&sorted.labels(), sorted.classes.len(), train_frac, 0.0, seed)?;
    Ok((pick(&sorted, &split.train), pick(&sorted, &split.test)))
}
