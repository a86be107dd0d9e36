//! Integer instance label maps: 0 is background, k is instance k.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    pub width: u32,
    pub height: u32,
    /// Row-major.
    pub labels: Vec<u16>,
}

/// Per-instance pixel statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceStats {
    pub id: u16,
    pub area: u64,
    /// Mean column and row of member pixels.
    pub centroid: [f64; 2],
    /// Tight box `[col, row, width, height]`.
    pub bbox: [u32; 4],
}

impl LabelMap {
    pub fn new(width: u32, height: u32) -> Self {
        Self { width, height, labels: vec![0; (width * height) as usize] }
    }

    pub fn from_vec(width: u32, height: u32, labels: Vec<u16>) -> Self {
        assert_eq!(labels.len(), (width * height) as usize, "label buffer size");
        Self { width, height, labels }
    }

    /// Builds a map from rows; handy in tests.
    pub fn from_rows(rows: &[&[u16]]) -> Self {
        let height = rows.len() as u32;
        let width = rows.first().map_or(0, |r| r.len()) as u32;
        assert!(rows.iter().all(|r| r.len() == width as usize), "ragged rows");
        Self { width, height, labels: rows.iter().flat_map(|r| r.iter().copied()).collect() }
    }

    #[inline]
    pub fn get(&self, col: u32, row: u32) -> u16 {
        self.labels[(row * self.width + col) as usize]
    }

    #[inline]
    pub fn set(&mut self, col: u32, row: u32, id: u16) {
        self.labels[(row * self.width + col) as usize] = id;
    }

    pub fn same_grid(&self, other: &LabelMap) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Distinct nonzero ids, ascending.
    pub fn instance_ids(&self) -> Vec<u16> {
        let mut present = vec![false; u16::MAX as usize + 1];
        for &l in &self.labels {
            present[l as usize] = true;
        }
        (1..=u16::MAX).filter(|&i| present[i as usize]).collect()
    }

    pub fn instance_count(&self) -> usize {
        self.instance_ids().len()
    }

    pub fn instance_stats(&self) -> Vec<InstanceStats> {
        struct Acc {
            area: u64,
            sx: f64,
            sy: f64,
            min: [u32; 2],
            max: [u32; 2],
        }
        let mut acc: BTreeMap<u16, Acc> = BTreeMap::new();
        for row in 0..self.height {
            for col in 0..self.width {
                let id = self.get(col, row);
                if id == 0 {
                    continue;
                }
                let a = acc.entry(id).or_insert(Acc { area: 0, sx: 0.0, sy: 0.0, min: [col, row], max: [col, row] });
                a.area += 1;
                a.sx += col as f64;
                a.sy += row as f64;
                a.min = [a.min[0].min(col), a.min[1].min(row)];
                a.max = [a.max[0].max(col), a.max[1].max(row)];
            }
        }
        acc.into_iter()
            .map(|(id, a)| InstanceStats {
                id,
                area: a.area,
                centroid: [a.sx / a.area as f64, a.sy / a.area as f64],
                bbox: [a.min[0], a.min[1], a.max[0] - a.min[0] + 1, a.max[1] - a.min[1] + 1],
            })
            .collect()
    }

    /// Applies `map` to every nonzero id.
    pub fn relabel(&self, mut map: impl FnMut(u16) -> u16) -> LabelMap {
        LabelMap {
            width: self.width,
            height: self.height,
            labels: self.labels.iter().map(|&l| if l == 0 { 0 } else { map(l) }).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_of_single_pixel_and_square() {
        let m = LabelMap::from_rows(&[&[0, 0, 0, 0], &[0, 2, 2, 0], &[0, 2, 2, 0], &[1, 0, 0, 0]]);
        let s = m.instance_stats();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].id, 1);
        assert_eq!(s[0].bbox, [0, 3, 1, 1]);
        assert_eq!(s[0].centroid, [0.0, 3.0]);
        assert_eq!(s[1].area, 4);
        assert_eq!(s[1].centroid, [1.5, 1.5]);
        assert_eq!(m.instance_ids(), vec![1, 2]);
    }
}
