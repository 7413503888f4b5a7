//! Rayon versions of the grid sweeps. Every cell is computed by the same pure
//! function as the sequential path and results are collected in cell order,
//! so outputs do not depend on the thread count.

use hyperdim_core::dimension::{box_dimension, DimensionEstimate};
use hyperdim_core::models::{ModelKind, ModelSystem};
use hyperdim_core::pressure::{PointCloud, TrackingSweep, VolumeCurve};
use hyperdim_core::{Error, Result};
use rayon::prelude::*;

/// Fixed-size rayon pool; `None` uses the global default.
pub struct Pool {
    pool: Option<rayon::ThreadPool>,
}

impl Pool {
    pub fn new(threads: Option<usize>) -> Self {
        let pool = threads.map(|n| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .expect("thread pool construction")
        });
        Self { pool }
    }

    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        match &self.pool {
            Some(p) => p.install(f),
            None => f(),
        }
    }
}

pub fn survival_map(pool: &Pool, sweep: &TrackingSweep<'_>) -> Vec<u8> {
    pool.install(|| (0..sweep.grid().cells()).into_par_iter().map(|i| sweep.survival(i)).collect())
}

pub fn membership_map(pool: &Pool, sweep: &TrackingSweep<'_>) -> Vec<bool> {
    pool.install(|| (0..sweep.grid().cells()).into_par_iter().map(|i| sweep.cell_meets(i)).collect())
}

pub fn volume_curve(
    pool: &Pool,
    model: &ModelSystem,
    epsilon: f64,
    k_max: usize,
    grid_resolution: usize,
) -> Result<VolumeCurve> {
    let sweep = TrackingSweep::new(model, epsilon, k_max, grid_resolution)?;
    let survival = survival_map(pool, &sweep);
    Ok(sweep.curve(&survival))
}

pub fn sample_local_stable_set(
    pool: &Pool,
    model: &ModelSystem,
    epsilon: f64,
    depth: usize,
    grid_resolution: usize,
) -> Result<PointCloud> {
    if model.kind != ModelKind::Diffeomorphism {
        return Err(Error::ParameterOutOfRange("local stable sets need a diffeomorphism".into()));
    }
    let sweep = TrackingSweep::new(model, epsilon, depth, grid_resolution)?;
    let members = membership_map(pool, &sweep);
    Ok(sweep.cloud(&members))
}

/// Same count as [`hyperdim_core::dimension::box_count`], with keys built in
/// parallel chunks and an integer count at the end.
pub fn box_count(pool: &Pool, cloud: &PointCloud, scale: f64) -> u64 {
    assert!(scale > 0.0 && scale <= 1.0, "scale must lie in (0, 1]");
    let per_axis = (1.0 / scale).ceil() as u128;
    let dim = cloud.dim.max(1);
    pool.install(|| {
        let mut keys: Vec<u128> = cloud
            .coords
            .par_chunks(dim)
            .map(|p| {
                p.iter().rev().fold(0u128, |acc, &x| {
                    let i = ((x / scale).floor().max(0.0) as u128).min(per_axis - 1);
                    acc * per_axis + i
                })
            })
            .collect();
        keys.par_sort_unstable();
        keys.dedup();
        keys.len() as u64
    })
}

pub fn cloud_dimension(pool: &Pool, cloud: &PointCloud, scales: &[f64]) -> Result<DimensionEstimate> {
    let samples: Vec<(f64, u64)> = scales.iter().map(|&s| (s, box_count(pool, cloud, s))).collect();
    box_dimension(&samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use hyperdim_core::models::{build_cantor_repeller, build_linear_horseshoe};
    use hyperdim_core::pressure;

    #[test]
    fn matches_sequential_paths() {
        let h = build_linear_horseshoe(3.0, 0.25).unwrap();
        for threads in [1, 3] {
            let pool = Pool::new(Some(threads));
            let seq = pressure::sample_local_stable_set(&h, 0.1, 5, 256).unwrap();
            let par = sample_local_stable_set(&pool, &h, 0.1, 5, 256).unwrap();
            assert_eq!(seq, par);
            for j in 1..8 {
                let s = 0.5f64.powi(j);
                assert_eq!(box_count(&pool, &par, s), hyperdim_core::dimension::box_count(&par, s));
            }
        }
        let c = build_cantor_repeller(3, &[0, 2]).unwrap();
        let seq = pressure::volume_curve(&c, 0.05, 6, 1024).unwrap();
        let par = volume_curve(&Pool::new(Some(4)), &c, 0.05, 6, 1024).unwrap();
        assert_eq!(seq, par);
    }
}
