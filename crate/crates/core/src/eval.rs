//! Segmentation scores: Dice, best Dice, symmetric best Dice (SBD) and
//! difference in count (DiC), for label-map pairs and whole directories.
//!
//! Degenerate cases: two empty masks have Dice 1, and the best Dice of a map
//! without instances is 1. Both choices lift aggregate scores on images where
//! neither side predicts anything.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::dataset::{read_label_map, DatasetError};
use crate::label::LabelMap;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("{image}: ground truth is {gt:?} but prediction is {pred:?}")]
    DimensionMismatch { image: String, gt: (u32, u32), pred: (u32, u32) },
    #[error("unmatched files; ground truth without prediction: [{}]; prediction without ground truth: [{}]", missing_pred.join(", "), missing_gt.join(", "))]
    Unmatched { missing_pred: Vec<String>, missing_gt: Vec<String> },
    #[error("no label images in {0}")]
    Empty(PathBuf),
}

impl EvalError {
    pub fn is_io(&self) -> bool {
        match self {
            EvalError::Io { .. } => true,
            EvalError::Dataset(e) => e.is_io(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("grids differ: {a:?} vs {b:?}")]
pub struct GridMismatch {
    pub a: (u32, u32),
    pub b: (u32, u32),
}

fn check_grid(a: &LabelMap, b: &LabelMap) -> Result<(), GridMismatch> {
    if a.same_grid(b) {
        Ok(())
    } else {
        Err(GridMismatch { a: (a.width, a.height), b: (b.width, b.height) })
    }
}

/// Dice of two boolean masks over the same grid.
pub fn dice(a: &[bool], b: &[bool]) -> Result<f64, GridMismatch> {
    if a.len() != b.len() {
        return Err(GridMismatch { a: (a.len() as u32, 1), b: (b.len() as u32, 1) });
    }
    let na = a.iter().filter(|&&x| x).count();
    let nb = b.iter().filter(|&&x| x).count();
    let both = a.iter().zip(b).filter(|(&x, &y)| x && y).count();
    Ok(dice_from_counts(both as u64, na as u64, nb as u64))
}

#[inline]
fn dice_from_counts(intersection: u64, na: u64, nb: u64) -> f64 {
    if na + nb == 0 {
        1.0
    } else {
        2.0 * intersection as f64 / (na + nb) as f64
    }
}

/// Pixel overlap counts between the instances of two label maps.
struct Contingency {
    from_area: BTreeMap<u16, u64>,
    to_area: BTreeMap<u16, u64>,
    overlap: HashMap<(u16, u16), u64>,
}

impl Contingency {
    fn new(from: &LabelMap, to: &LabelMap) -> Self {
        let mut from_area = BTreeMap::new();
        let mut to_area = BTreeMap::new();
        let mut overlap = HashMap::new();
        for (&f, &t) in from.labels.iter().zip(&to.labels) {
            if f != 0 {
                *from_area.entry(f).or_insert(0) += 1;
            }
            if t != 0 {
                *to_area.entry(t).or_insert(0) += 1;
            }
            if f != 0 && t != 0 {
                *overlap.entry((f, t)).or_insert(0) += 1;
            }
        }
        Self { from_area, to_area, overlap }
    }

    fn best_dice(&self) -> f64 {
        if self.from_area.is_empty() {
            return 1.0;
        }
        let mut best: BTreeMap<u16, f64> = self.from_area.keys().map(|&k| (k, 0.0)).collect();
        for (&(f, t), &c) in &self.overlap {
            let d = dice_from_counts(c, self.from_area[&f], self.to_area[&t]);
            let b = best.get_mut(&f).expect("known id");
            if d > *b {
                *b = d;
            }
        }
        // summing in sorted order makes the mean independent of id numbering
        let mut values: Vec<f64> = best.into_values().collect();
        values.sort_by(f64::total_cmp);
        values.iter().sum::<f64>() / values.len() as f64
    }

    fn reversed(&self) -> Self {
        Self {
            from_area: self.to_area.clone(),
            to_area: self.from_area.clone(),
            overlap: self.overlap.iter().map(|(&(f, t), &c)| ((t, f), c)).collect(),
        }
    }
}

/// Mean over instances of `from` of the best Dice against any instance of `to`.
pub fn best_dice(from: &LabelMap, to: &LabelMap) -> Result<f64, GridMismatch> {
    check_grid(from, to)?;
    Ok(Contingency::new(from, to).best_dice())
}

pub fn symmetric_best_dice(gt: &LabelMap, pred: &LabelMap) -> Result<f64, GridMismatch> {
    let s = ImageScore::compute(gt, pred)?;
    Ok(s.sbd)
}

/// Predicted minus ground-truth instance count.
pub fn diff_in_count(gt: &LabelMap, pred: &LabelMap) -> i64 {
    pred.instance_count() as i64 - gt.instance_count() as i64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageScore {
    pub bd_gt_to_pred: f64,
    pub bd_pred_to_gt: f64,
    pub sbd: f64,
    pub dic: i64,
}

impl ImageScore {
    pub fn compute(gt: &LabelMap, pred: &LabelMap) -> Result<Self, GridMismatch> {
        check_grid(gt, pred)?;
        let table = Contingency::new(gt, pred);
        let bd_gt_to_pred = table.best_dice();
        let bd_pred_to_gt = table.reversed().best_dice();
        let dic = table.to_area.len() as i64 - table.from_area.len() as i64;
        Ok(Self { bd_gt_to_pred, bd_pred_to_gt, sbd: bd_gt_to_pred.min(bd_pred_to_gt), dic })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageReport {
    pub image: String,
    pub score: ImageScore,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SBDReport {
    pub images: Vec<ImageReport>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanScores {
    pub bd_gt_to_pred: f64,
    pub bd_pred_to_gt: f64,
    pub sbd: f64,
    pub dic: f64,
    pub abs_dic: f64,
}

impl SBDReport {
    /// Unweighted per-image means.
    pub fn mean(&self) -> MeanScores {
        let n = self.images.len().max(1) as f64;
        let sum = |f: &dyn Fn(&ImageScore) -> f64| self.images.iter().map(|r| f(&r.score)).sum::<f64>() / n;
        MeanScores {
            bd_gt_to_pred: sum(&|s| s.bd_gt_to_pred),
            bd_pred_to_gt: sum(&|s| s.bd_pred_to_gt),
            sbd: sum(&|s| s.sbd),
            dic: sum(&|s| s.dic as f64),
            abs_dic: sum(&|s| s.dic.abs() as f64),
        }
    }

    /// Columns `image,bd_gp,bd_pg,sbd,dic,abs_dic`; a final `mean` row holds
    /// the per-image averages.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["image", "bd_gp", "bd_pg", "sbd", "dic", "abs_dic"])?;
        for r in &self.images {
            let s = &r.score;
            w.write_record([
                r.image.clone(),
                s.bd_gt_to_pred.to_string(),
                s.bd_pred_to_gt.to_string(),
                s.sbd.to_string(),
                s.dic.to_string(),
                s.dic.abs().to_string(),
            ])?;
        }
        let m = self.mean();
        w.write_record([
            "mean".to_string(),
            m.bd_gt_to_pred.to_string(),
            m.bd_pred_to_gt.to_string(),
            m.sbd.to_string(),
            m.dic.to_string(),
            m.abs_dic.to_string(),
        ])?;
        w.flush()?;
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<(), EvalError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|source| EvalError::Io { path: dir.to_owned(), source })?;
        }
        let file = std::fs::File::create(path).map_err(|source| EvalError::Io { path: path.to_owned(), source })?;
        self.write_csv(std::io::BufWriter::new(file)).map_err(|e| EvalError::Io {
            path: path.to_owned(),
            source: std::io::Error::other(e.to_string()),
        })
    }
}

/// How files in the two directories are paired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pairing {
    /// Identical file names.
    #[default]
    ExactName,
    /// File-name prefix before the first `_`, so `plant007_label.png` pairs
    /// with `plant007_pred.png`.
    PlantKey,
}

impl std::str::FromStr for Pairing {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" | "name" => Ok(Pairing::ExactName),
            "plant" | "key" => Ok(Pairing::PlantKey),
            other => Err(format!("unknown pairing '{other}' (expected exact or plant)")),
        }
    }
}

impl Pairing {
    fn key(self, file_name: &str) -> String {
        match self {
            Pairing::ExactName => file_name.to_string(),
            Pairing::PlantKey => {
                let stem = file_name.rsplit_once('.').map_or(file_name, |(s, _)| s);
                stem.split('_').next().unwrap_or(stem).to_string()
            }
        }
    }
}

fn list_pngs(dir: &Path) -> Result<Vec<String>, EvalError> {
    let io = |source| EvalError::Io { path: dir.to_owned(), source };
    let mut names = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let entry = entry.map_err(io)?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if entry.path().is_file() && name.to_ascii_lowercase().ends_with(".png") {
            names.push(name);
        }
    }
    names.sort();
    Ok(names)
}

/// Scores every ground-truth label PNG in `gt_dir` against its partner in
/// `pred_dir`. Every file must have a partner; rows are ordered by gt name.
pub fn evaluate_directory(gt_dir: &Path, pred_dir: &Path, pairing: Pairing) -> Result<SBDReport, EvalError> {
    let gt_names = list_pngs(gt_dir)?;
    let pred_names = list_pngs(pred_dir)?;
    if gt_names.is_empty() {
        return Err(EvalError::Empty(gt_dir.to_owned()));
    }
    let pred_by_key: BTreeMap<String, String> = pred_names.iter().map(|n| (pairing.key(n), n.clone())).collect();
    let gt_keys: BTreeMap<String, String> = gt_names.iter().map(|n| (pairing.key(n), n.clone())).collect();
    let missing_pred: Vec<String> =
        gt_names.iter().filter(|n| !pred_by_key.contains_key(&pairing.key(n))).cloned().collect();
    let missing_gt: Vec<String> =
        pred_names.iter().filter(|n| !gt_keys.contains_key(&pairing.key(n))).cloned().collect();
    if !missing_pred.is_empty() || !missing_gt.is_empty() {
        return Err(EvalError::Unmatched { missing_pred, missing_gt });
    }
    let images = gt_names
        .par_iter()
        .map(|name| {
            let gt = read_label_map(&gt_dir.join(name))?;
            let pred = read_label_map(&pred_dir.join(&pred_by_key[&pairing.key(name)]))?;
            let score = ImageScore::compute(&gt, &pred).map_err(|m| EvalError::DimensionMismatch {
                image: name.clone(),
                gt: m.a,
                pred: m.b,
            })?;
            Ok(ImageReport { image: name.clone(), score })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    Ok(SBDReport { images })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dice_examples() {
        // rows of a 2x2 grid, row-major
        let a = [true, true, false, false];
        let b = [false, true, false, true];
        assert_eq!(dice(&a, &b).unwrap(), 0.5);
        assert_eq!(dice(&a, &a).unwrap(), 1.0);
        assert_eq!(dice(&[false; 4], &[false; 4]).unwrap(), 1.0);
        assert_eq!(dice(&a, &[false; 4]).unwrap(), 0.0);
        assert!(dice(&a, &[true; 3]).is_err());
    }

    #[test]
    fn best_dice_degenerate_cases() {
        let one = LabelMap::from_rows(&[&[1, 0], &[0, 0]]);
        let empty = LabelMap::new(2, 2);
        assert_eq!(best_dice(&one, &empty).unwrap(), 0.0);
        assert_eq!(best_dice(&empty, &one).unwrap(), 1.0);
        assert_eq!(symmetric_best_dice(&one, &empty).unwrap(), 0.0);
        assert_eq!(symmetric_best_dice(&empty, &empty).unwrap(), 1.0);
        assert!(best_dice(&one, &LabelMap::new(3, 2)).is_err());
    }

    #[test]
    fn merged_instances_on_8x8() {
        // gt: left half id 1 (32 px), right half id 2 (32 px); pred merges both
        let gt = LabelMap::from_vec(8, 8, (0..64).map(|i| if i % 8 < 4 { 1 } else { 2 }).collect());
        let pred = LabelMap::from_vec(8, 8, vec![7; 64]);
        // gt->pred: each half 2*32/(32+64) = 2/3; pred->gt: 2/3
        let s = ImageScore::compute(&gt, &pred).unwrap();
        assert!((s.bd_gt_to_pred - 2.0 / 3.0).abs() < 1e-15);
        assert!((s.bd_pred_to_gt - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.dic, -1);
    }

    #[test]
    fn dic_examples() {
        let gt = LabelMap::from_rows(&[&[1, 1, 2, 2]]);
        assert_eq!(diff_in_count(&gt, &gt), 0);
        assert_eq!(diff_in_count(&gt, &LabelMap::from_rows(&[&[1, 1, 0, 0]])), -1);
        assert_eq!(diff_in_count(&gt, &LabelMap::from_rows(&[&[1, 3, 2, 2]])), 1);
    }

    #[test]
    fn plant_key_pairing() {
        assert_eq!(Pairing::PlantKey.key("plant007_label.png"), "plant007");
        assert_eq!(Pairing::PlantKey.key("plant007.png"), "plant007");
        assert_eq!(Pairing::ExactName.key("a_b.png"), "a_b.png");
    }
}
