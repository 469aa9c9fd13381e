//! Random-wave simulation of a stationary isotropic Gaussian field.
//!
//! A realization is `B_x = sqrt(2/M) sum_j cos(<k_j, x> + phi_j)` with
//! independent wavevectors `k_j` (radius from `mu`, uniform direction) and
//! uniform phases. For every `M` the ensemble covariance is exactly
//! `rho(|x - y|)`; the only departure from the Gaussian law is the finite-`M`
//! non-Gaussianity of the marginals, of order `1/M`.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{ensure_finite, invalid, Result};
use crate::spectral::{sample_wavenumber, SpectralMeasure};

/// Points per block in the direct evaluation kernel.
pub const BLOCK_SIZE: usize = 64;
pub const DEFAULT_WAVES: usize = 2048;

/// Mixes `(root, stream, index)` into an independent 64-bit seed.
pub fn derive_seed(root: u64, stream: u64, index: u64) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    let a = splitmix(root);
    let b = splitmix(a ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03));
    splitmix(b ^ index.wrapping_mul(0xA24B_AED4_963E_E407))
}

/// One frozen realization of the field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSampler {
    d: usize,
    wavevectors: Vec<f64>,
    phases: Vec<f64>,
    amplitude: f64,
    seed: u64,
    measure_id: String,
}

/// Draws `waves` wavevectors and phases from a ChaCha stream keyed by `seed`.
pub fn build_sampler(mu: &SpectralMeasure, d: usize, waves: usize, seed: u64) -> Result<FieldSampler> {
    mu.check_dimension(d)?;
    if waves == 0 {
        return Err(invalid("number of waves must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut wavevectors = Vec::with_capacity(waves * d);
    let mut phases = Vec::with_capacity(waves);
    let mut dir = vec![0.0; d];
    for _ in 0..waves {
        let s = sample_wavenumber(mu, &mut rng);
        loop {
            for c in dir.iter_mut() {
                *c = rng.sample(StandardNormal);
            }
            let norm = dir.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm > 1e-300 {
                wavevectors.extend(dir.iter().map(|c| s * c / norm));
                break;
            }
        }
        phases.push(rng.gen::<f64>() * TAU);
    }
    Ok(FieldSampler {
        d,
        wavevectors,
        phases,
        amplitude: (2.0 / waves as f64).sqrt(),
        seed,
        measure_id: mu.id.clone(),
    })
}

impl FieldSampler {
    /// Sampler with explicit waves; `amplitude` multiplies every cosine.
    pub fn from_waves(d: usize, wavevectors: Vec<f64>, phases: Vec<f64>, amplitude: f64) -> Result<Self> {
        if d < 2 || phases.is_empty() || wavevectors.len() != d * phases.len() {
            return Err(invalid("wavevectors must hold d coordinates per phase"));
        }
        Ok(Self {
            d,
            wavevectors,
            phases,
            amplitude,
            seed: 0,
            measure_id: "explicit".into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn waves(&self) -> usize {
        self.phases.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn measure_id(&self) -> &str {
        &self.measure_id
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn wavevector(&self, j: usize) -> &[f64] {
        &self.wavevectors[j * self.d..(j + 1) * self.d]
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Field values at `points`, given as consecutive `d`-tuples.
    pub fn evaluate(&self, points: &[f64]) -> Result<Vec<f64>> {
        let d = self.d;
        if points.len() % d != 0 {
            return Err(invalid(format!(
                "point buffer length {} is not a multiple of d = {d}",
                points.len()
            )));
        }
        if let Some(bad) = points.iter().find(|v| !v.is_finite()) {
            ensure_finite("point coordinate", *bad)?;
        }
        let n = points.len() / d;
        let mut out = vec![0.0; n];
        let mut acc = [0.0f64; BLOCK_SIZE];
        for (block, chunk) in out.chunks_mut(BLOCK_SIZE).enumerate() {
            let start = block * BLOCK_SIZE;
            let len = chunk.len();
            acc[..len].fill(0.0);
            for (j, &phase) in self.phases.iter().enumerate() {
                let k = &self.wavevectors[j * d..(j + 1) * d];
                for (p, a) in acc[..len].iter_mut().enumerate() {
                    let x = &points[(start + p) * d..(start + p + 1) * d];
                    let dot: f64 = k.iter().zip(x).map(|(a, b)| a * b).sum();
                    *a += (dot + phase).cos();
                }
            }
            for (o, a) in chunk.iter_mut().zip(&acc[..len]) {
                *o = self.amplitude * a;
            }
        }
        Ok(out)
    }

    /// Field values on the tensor lattice `axes[0] x axes[1] x ...`, in
    /// row-major order (last axis fastest).
    ///
    /// Uses `Re(e^{i(k_0 x_0 + phi)} e^{i <k', x'>})` to turn the reduction
    /// into one real matrix product of shape `n_0 x 2M` times `2M x n_rest`.
    pub fn evaluate_lattice(&self, axes: &[Vec<f64>]) -> Result<Vec<f64>> {
        let d = self.d;
        if axes.len() != d {
            return Err(invalid(format!("expected {d} lattice axes, got {}", axes.len())));
        }
        if axes.iter().any(|a| a.is_empty()) {
            return Ok(Vec::new());
        }
        let m = self.waves();
        let n0 = axes[0].len();
        let rest: Vec<&Vec<f64>> = axes[1..].iter().collect();
        let n_rest: usize = rest.iter().map(|a| a.len()).product();

        let mut a = vec![0.0; n0 * 2 * m];
        for (i, &x0) in axes[0].iter().enumerate() {
            let row = &mut a[i * 2 * m..(i + 1) * 2 * m];
            let (re, im) = row.split_at_mut(m);
            for j in 0..m {
                let (s, c) = (self.wavevectors[j * d] * x0 + self.phases[j]).sin_cos();
                re[j] = c;
                im[j] = s;
            }
        }

        let mut b = vec![0.0; n_rest * 2 * m];
        let mut idx = vec![0usize; rest.len()];
        let mut partial = vec![0.0; m];
        for r in 0..n_rest {
            partial.fill(0.0);
            for (l, axis) in rest.iter().enumerate() {
                let x = axis[idx[l]];
                for (j, p) in partial.iter_mut().enumerate() {
                    *p += self.wavevectors[j * d + 1 + l] * x;
                }
            }
            let row = &mut b[r * 2 * m..(r + 1) * 2 * m];
            let (re, im) = row.split_at_mut(m);
            for j in 0..m {
                let (s, c) = partial[j].sin_cos();
                re[j] = c;
                im[j] = -s;
            }
            // odometer over the remaining axes, last axis fastest
            for l in (0..rest.len()).rev() {
                idx[l] += 1;
                if idx[l] < rest[l].len() {
                    break;
                }
                idx[l] = 0;
            }
        }

        let mut out = vec![0.0; n0 * n_rest];
        let k = 2 * m;
        // SAFETY: buffers are sized n0 x k, n_rest x k and n0 x n_rest, and the
        // strides below address them within bounds.
        unsafe {
            matrixmultiply::dgemm(
                n0,
                k,
                n_rest,
                self.amplitude,
                a.as_ptr(),
                k as isize,
                1,
                b.as_ptr(),
                1,
                k as isize,
                0.0,
                out.as_mut_ptr(),
                n_rest as isize,
                1,
            );
        }
        Ok(out)
    }
}

/// Monte Carlo estimate of `E[B_0 B_{(r,0,...,0)}]` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovarianceEstimate {
    pub lag: f64,
    pub mean: f64,
    pub std_error: f64,
}

/// Averages `B_0 B_r` over `n_reps` independent samplers.
pub fn empirical_covariance(
    mu: &SpectralMeasure,
    d: usize,
    waves: usize,
    lags: &[f64],
    n_reps: usize,
    seed: u64,
) -> Result<Vec<CovarianceEstimate>> {
    empirical_covariance_along(mu, d, waves, lags, &unit_axis(d), &vec![0.0; d], n_reps, seed)
}

fn unit_axis(d: usize) -> Vec<f64> {
    let mut e = vec![0.0; d];
    e[0] = 1.0;
    e
}

/// Like [`empirical_covariance`], with the lag taken along `direction` (unit
/// vector) from the base point `origin`.
#[allow(clippy::too_many_arguments)]
pub fn empirical_covariance_along(
    mu: &SpectralMeasure,
    d: usize,
    waves: usize,
    lags: &[f64],
    direction: &[f64],
    origin: &[f64],
    n_reps: usize,
    seed: u64,
) -> Result<Vec<CovarianceEstimate>> {
    if n_reps < 2 {
        return Err(invalid("need at least two replications"));
    }
    if direction.len() != d || origin.len() != d {
        return Err(invalid("direction and origin must have d coordinates"));
    }
    let mut points = origin.to_vec();
    for &lag in lags {
        points.extend(origin.iter().zip(direction).map(|(o, e)| o + lag * e));
    }
    let mut sum = vec![0.0; lags.len()];
    let mut sum_sq = vec![0.0; lags.len()];
    for i in 0..n_reps {
        let sampler = build_sampler(mu, d, waves, derive_seed(seed, 0, i as u64))?;
        let values = sampler.evaluate(&points)?;
        for (l, v) in values[1..].iter().enumerate() {
            let prod = values[0] * v;
            sum[l] += prod;
            sum_sq[l] += prod * prod;
        }
    }
    let n = n_reps as f64;
    Ok(lags
        .iter()
        .enumerate()
        .map(|(l, &lag)| {
            let mean = sum[l] / n;
            let var = ((sum_sq[l] - n * mean * mean) / (n - 1.0)).max(0.0);
            CovarianceEstimate {
                lag,
                mean,
                std_error: (var / n).sqrt(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::bessel_spectral_measure;
    use std::f64::consts::PI;

    #[test]
    fn single_wave_values() {
        let s = FieldSampler::from_waves(2, vec![1.0, 0.0], vec![0.0], 2f64.sqrt()).unwrap();
        let v = s.evaluate(&[0.0, 0.0, PI, 0.0]).unwrap();
        assert!((v[0] - 2f64.sqrt()).abs() < 1e-15);
        assert!((v[1] + 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn berry_single_wave_on_unit_circle() {
        let s = build_sampler(&SpectralMeasure::berry(), 2, 1, 9).unwrap();
        let k = s.wavevector(0);
        assert!(((k[0] * k[0] + k[1] * k[1]).sqrt() - 1.0).abs() < 1e-15);
        assert!((s.amplitude() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn equal_seeds_equal_samplers() {
        let mu = bessel_spectral_measure(2, 1.0).unwrap();
        let a = build_sampler(&mu, 2, 64, 77).unwrap();
        let b = build_sampler(&mu, 2, 64, 77).unwrap();
        let c = build_sampler(&mu, 2, 64, 78).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(build_sampler(&mu, 2, 0, 1).is_err());
    }

    #[test]
    fn power_law_wavenumber_cdf() {
        let mu = SpectralMeasure::power_law(0.4, 0.0, 1.0).unwrap();
        let s = build_sampler(&mu, 2, 10_000, 4).unwrap();
        let below = (0..s.waves())
            .filter(|&j| {
                let k = s.wavevector(j);
                (k[0] * k[0] + k[1] * k[1]).sqrt() <= 0.5
            })
            .count() as f64
            / s.waves() as f64;
        assert!((below - 0.5f64.powf(0.4)).abs() < 0.02);
    }

    #[test]
    fn lattice_matches_direct_evaluation() {
        for d in [2, 3] {
            let s = build_sampler(&SpectralMeasure::berry(), d, 37, 5).unwrap();
            let axes: Vec<Vec<f64>> = (0..d)
                .map(|l| (0..(5 + l)).map(|i| -3.0 + 1.3 * i as f64 + 0.1 * l as f64).collect())
                .collect();
            let fast = s.evaluate_lattice(&axes).unwrap();
            let total: usize = axes.iter().map(Vec::len).product();
            let mut points = Vec::new();
            for flat in 0..total {
                let mut rem = flat;
                let mut coords = vec![0.0; d];
                for l in (0..d).rev() {
                    coords[l] = axes[l][rem % axes[l].len()];
                    rem /= axes[l].len();
                }
                points.extend(coords);
            }
            let direct = s.evaluate(&points).unwrap();
            assert_eq!(fast.len(), direct.len());
            for (a, b) in fast.iter().zip(&direct) {
                assert!((a - b).abs() < 1e-12, "d {d}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn spatial_variance_near_one() {
        let s = build_sampler(&SpectralMeasure::berry(), 2, 4096, 21).unwrap();
        let axis: Vec<f64> = (0..317).map(|i| i as f64 * 100.0 / 317.0).collect();
        let v = s.evaluate_lattice(&[axis.clone(), axis]).unwrap();
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        assert!((var - 1.0).abs() < 0.05, "spatial variance {var}");
    }

    #[test]
    fn seeds_are_decorrelated() {
        assert_ne!(derive_seed(1, 0, 0), derive_seed(1, 0, 1));
        assert_ne!(derive_seed(1, 0, 1), derive_seed(1, 1, 0));
        assert_eq!(derive_seed(9, 2, 3), derive_seed(9, 2, 3));
    }
}
