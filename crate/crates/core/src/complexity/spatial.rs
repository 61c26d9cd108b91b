use std::collections::HashMap;

use crate::geometry::Norm;

/// Bucket grid of width `w` in sup coordinates. Any two points whose
/// distance in a supported norm is at most `w` sit in adjacent buckets,
/// since every supported norm dominates the sup norm.
#[derive(Debug)]
pub(crate) struct SpatialHash {
    width: f64,
    buckets: HashMap<u64, Vec<usize>>,
    probe: Vec<i64>,
    home: Vec<i64>,
}

fn mix(mut h: u64, v: i64) -> u64 {
    h ^= (v as u64).wrapping_add(0x9e37_79b9_7f4a_7c15);
    h = h.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h ^ (h >> 31)
}

impl SpatialHash {
    pub fn new(width: f64, dim: usize) -> Self {
        SpatialHash {
            width,
            buckets: HashMap::new(),
            probe: vec![0; dim],
            home: vec![0; dim],
        }
    }

    fn key(cells: &[i64]) -> u64 {
        cells.iter().fold(0x243f_6a88_85a3_08d3, |h, &c| mix(h, c))
    }

    fn locate(&mut self, x: &[f64]) {
        for (h, v) in self.home.iter_mut().zip(x) {
            *h = (v / self.width).floor() as i64;
        }
    }

    pub fn insert(&mut self, x: &[f64], id: usize) {
        self.locate(x);
        let key = Self::key(&self.home);
        self.buckets.entry(key).or_default().push(id);
    }

    /// True if some stored id passes `hit` among the neighbours of `x`.
    pub fn any_near(&mut self, x: &[f64], mut hit: impl FnMut(usize) -> bool) -> bool {
        self.locate(x);
        let d = self.home.len();
        let mut offset = vec![-1i64; d];
        loop {
            for ((p, h), o) in self.probe.iter_mut().zip(&self.home).zip(&offset) {
                *p = h + o;
            }
            if let Some(ids) = self.buckets.get(&Self::key(&self.probe)) {
                if ids.iter().any(|&id| hit(id)) {
                    return true;
                }
            }
            let mut j = 0;
            loop {
                if j == d {
                    return false;
                }
                offset[j] += 1;
                if offset[j] <= 1 {
                    break;
                }
                offset[j] = -1;
                j += 1;
            }
        }
    }
}

/// True if some point of `pool` lies within distance `< radius` of `x`.
pub(crate) fn within_open_ball<P: AsRef<[f64]>>(
    index: &mut SpatialHash,
    pool: &[P],
    x: &[f64],
    radius: f64,
    norm: Norm,
) -> bool {
    index.any_near(x, |id| norm.distance(pool[id].as_ref(), x) < radius)
}
