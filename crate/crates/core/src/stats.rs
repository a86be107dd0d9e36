//! Dataset distribution summaries: where leaf centroids fall in the frame and
//! how many leaves each image holds.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use image::{GrayImage, Luma};
use rayon::prelude::*;

use crate::dataset::{read_label_map, DatasetError, DatasetManifest};
use crate::label::LabelMap;

pub const DEFAULT_GRID: u32 = 32;

#[derive(Debug, thiserror::Error)]
pub enum StatsError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("no label maps found in {0}")]
    Empty(PathBuf),
    #[error("grid size must be positive")]
    ZeroGrid,
}

impl StatsError {
    pub fn is_io(&self) -> bool {
        match self {
            StatsError::Io { .. } => true,
            StatsError::Dataset(e) => e.is_io(),
            _ => false,
        }
    }
}

/// Centroid counts on a `grid × grid` lattice over normalized image coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidHeatmap {
    pub grid: u32,
    /// Row-major, `grid * grid` cells; row 0 is the top of the image.
    pub counts: Vec<u64>,
    pub total: u64,
    /// Dimensions of the first image seen.
    pub width: u32,
    pub height: u32,
    sum_r2: f64,
}

impl CentroidHeatmap {
    pub fn new(grid: u32) -> Self {
        Self { grid, counts: vec![0; (grid * grid) as usize], total: 0, width: 0, height: 0, sum_r2: 0.0 }
    }

    /// Adds one centroid given as (column, row) pixel coordinates.
    pub fn add(&mut self, centroid: [f64; 2], width: u32, height: u32) {
        if self.total == 0 {
            (self.width, self.height) = (width, height);
        }
        let u = (centroid[0] + 0.5) / width as f64;
        let v = (centroid[1] + 0.5) / height as f64;
        let cell = |t: f64| ((t * self.grid as f64).floor().max(0.0) as u32).min(self.grid - 1);
        self.counts[(cell(v) * self.grid + cell(u)) as usize] += 1;
        self.total += 1;
        self.sum_r2 += (u - 0.5).powi(2) + (v - 0.5).powi(2);
    }

    pub fn add_labels(&mut self, labels: &LabelMap) {
        for s in labels.instance_stats() {
            self.add(s.centroid, labels.width, labels.height);
        }
    }

    pub fn merge(&mut self, other: &CentroidHeatmap) {
        assert_eq!(self.grid, other.grid, "grid sizes differ");
        if self.total == 0 {
            (self.width, self.height) = (other.width, other.height);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
        self.sum_r2 += other.sum_r2;
    }

    pub fn get(&self, row: u32, col: u32) -> u64 {
        self.counts[(row * self.grid + col) as usize]
    }

    /// Root-mean-square centroid distance from the image centre, in units of
    /// the image side (each axis normalized by its own dimension).
    pub fn radial_std(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            (self.sum_r2 / self.total as f64).sqrt()
        }
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        for row in 0..self.grid {
            w.write_record((0..self.grid).map(|col| self.get(row, col).to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Counts scaled so the busiest cell is white.
    pub fn to_image(&self) -> GrayImage {
        let max = self.counts.iter().copied().max().unwrap_or(0).max(1) as f64;
        GrayImage::from_fn(self.grid, self.grid, |x, y| Luma([(self.get(y, x) as f64 / max * 255.0).round() as u8]))
    }
}

/// Images per leaf count.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CountHistogram {
    pub bins: BTreeMap<u32, u64>,
}

impl CountHistogram {
    pub fn add(&mut self, count: u32) {
        *self.bins.entry(count).or_insert(0) += 1;
    }

    pub fn merge(&mut self, other: &CountHistogram) {
        for (&k, &v) in &other.bins {
            *self.bins.entry(k).or_insert(0) += v;
        }
    }

    pub fn images(&self) -> u64 {
        self.bins.values().sum()
    }

    pub fn mean(&self) -> f64 {
        let n = self.images();
        if n == 0 {
            return 0.0;
        }
        self.bins.iter().map(|(&k, &v)| k as f64 * v as f64).sum::<f64>() / n as f64
    }

    /// Population variance of the per-image counts.
    pub fn variance(&self) -> f64 {
        let n = self.images();
        if n == 0 {
            return 0.0;
        }
        let m = self.mean();
        self.bins.iter().map(|(&k, &v)| (k as f64 - m).powi(2) * v as f64).sum::<f64>() / n as f64
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["leaf_count", "images"])?;
        for (k, v) in &self.bins {
            w.write_record([k.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Both summaries accumulated over one pass.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStats {
    pub heatmap: CentroidHeatmap,
    pub histogram: CountHistogram,
}

impl DatasetStats {
    pub fn new(grid: u32) -> Self {
        Self { heatmap: CentroidHeatmap::new(grid), histogram: CountHistogram::default() }
    }

    pub fn add_labels(&mut self, labels: &LabelMap) {
        self.heatmap.add_labels(labels);
        self.histogram.add(labels.instance_count() as u32);
    }

    pub fn merge(&mut self, other: &DatasetStats) {
        self.heatmap.merge(&other.heatmap);
        self.histogram.merge(&other.histogram);
    }
}

/// Label maps named by a manifest (`manifest.csv`, or a directory holding
/// one), or every PNG in a directory.
pub fn label_paths(source: &Path) -> Result<Vec<PathBuf>, StatsError> {
    let manifest = if source.is_dir() { source.join("manifest.csv") } else { source.to_owned() };
    let paths: Vec<PathBuf> = if manifest.is_file() {
        let m = DatasetManifest::read(&manifest)?;
        m.records.iter().map(|r| m.resolve(&r.label_path)).collect()
    } else if source.is_dir() {
        let io = |source_err| StatsError::Io { path: source.to_owned(), source: source_err };
        let mut v = Vec::new();
        for entry in std::fs::read_dir(source).map_err(io)? {
            let p = entry.map_err(io)?.path();
            if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")) {
                v.push(p);
            }
        }
        v.sort();
        v
    } else {
        return Err(StatsError::Io {
            path: source.to_owned(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such manifest or directory"),
        });
    };
    if paths.is_empty() {
        return Err(StatsError::Empty(source.to_owned()));
    }
    Ok(paths)
}

pub fn compute_stats(source: &Path, grid: u32) -> Result<DatasetStats, StatsError> {
    if grid == 0 {
        return Err(StatsError::ZeroGrid);
    }
    let paths = label_paths(source)?;
    let parts = paths
        .par_iter()
        .map(|p| {
            let labels = read_label_map(p)?;
            let mut s = DatasetStats::new(grid);
            s.add_labels(&labels);
            Ok(s)
        })
        .collect::<Result<Vec<_>, StatsError>>()?;
    let mut total = DatasetStats::new(grid);
    for p in &parts {
        total.merge(p);
    }
    Ok(total)
}

pub fn centroid_heatmap(source: &Path, grid: u32) -> Result<CentroidHeatmap, StatsError> {
    Ok(compute_stats(source, grid)?.heatmap)
}

pub fn leaf_count_histogram(source: &Path) -> Result<CountHistogram, StatsError> {
    Ok(compute_stats(source, 1)?.histogram)
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>, StatsError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| StatsError::Io { path: dir.to_owned(), source })?;
    }
    let f = std::fs::File::create(path).map_err(|source| StatsError::Io { path: path.to_owned(), source })?;
    Ok(std::io::BufWriter::new(f))
}

fn csv_io(path: &Path, e: csv::Error) -> StatsError {
    StatsError::Io { path: path.to_owned(), source: std::io::Error::other(e.to_string()) }
}

/// Writes the grid CSV at `path` and a grayscale PNG beside it.
pub fn write_heatmap(heatmap: &CentroidHeatmap, path: &Path) -> Result<PathBuf, StatsError> {
    heatmap.write_csv(create(path)?).map_err(|e| csv_io(path, e))?;
    let png = path.with_extension("png");
    heatmap.to_image().save(&png).map_err(|e| StatsError::Io {
        path: png.clone(),
        source: std::io::Error::other(e.to_string()),
    })?;
    Ok(png)
}

pub fn write_histogram(hist: &CountHistogram, path: &Path) -> Result<(), StatsError> {
    hist.write_csv(create(path)?).map_err(|e| csv_io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_pixel_leaf_lands_in_its_cell() {
        let mut m = LabelMap::new(64, 64);
        m.set(40, 10, 1);
        let mut h = CentroidHeatmap::new(8);
        h.add_labels(&m);
        assert_eq!(h.total, 1);
        assert_eq!(h.get(10 / 8, 40 / 8), 1);
        assert_eq!(h.counts.iter().sum::<u64>(), 1);
    }

    #[test]
    fn symmetric_square_centroid_is_centre() {
        let mut m = LabelMap::new(10, 10);
        for r in 3..7 {
            for c in 3..7 {
                m.set(c, r, 4);
            }
        }
        assert_eq!(m.instance_stats()[0].centroid, [4.5, 4.5]);
        let mut h = CentroidHeatmap::new(2);
        h.add_labels(&m);
        assert!(h.radial_std() < 1e-12);
    }

    #[test]
    fn forced_count_histogram_has_one_bin() {
        let mut hist = CountHistogram::default();
        for _ in 0..12 {
            hist.add(9);
        }
        assert_eq!(hist.bins.len(), 1);
        assert_eq!(hist.images(), 12);
        assert_eq!(hist.mean(), 9.0);
        assert_eq!(hist.variance(), 0.0);
    }

    #[test]
    fn variance_matches_direct_formula() {
        let counts = [3u32, 5, 5, 9, 12];
        let mut hist = CountHistogram::default();
        counts.iter().for_each(|&c| hist.add(c));
        let m = counts.iter().sum::<u32>() as f64 / 5.0;
        let v = counts.iter().map(|&c| (c as f64 - m).powi(2)).sum::<f64>() / 5.0;
        assert!((hist.variance() - v).abs() < 1e-12);
    }
}
