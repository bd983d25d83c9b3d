//! Uniform streams (pseudo and Sobol) and the variates built on them.
//!
//! Every normal is produced from exactly one uniform through the inverse CDF,
//! so a Sobol coordinate maps to one normal draw. Rejection samplers (Gamma)
//! never touch the logical stream; they draw from an auxiliary pseudo stream.

mod normal;
mod sobol;
mod sobol_table;

pub use normal::inverse_normal_cdf;
pub use sobol::{sobol_point, SobolSequence, SOBOL_MAX_DIMENSION};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{HestonError, Result};

/// Source of uniform variates.
pub trait UniformSource {
    /// Next uniform in `[0, 1)`.
    fn next_uniform(&mut self) -> f64;

    /// Standard normal via the inverse CDF (one uniform per normal).
    #[inline]
    fn next_normal(&mut self) -> f64 {
        inverse_normal_cdf(self.next_uniform())
    }
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const AUX_SALT: u64 = 0x6a09_e667_f3bc_c909;

/// Counter-based pseudo-random substream: ChaCha8 keyed by the seed, with the
/// stream index selecting one of 2^64 independent streams.
#[derive(Debug, Clone)]
pub struct PseudoStream {
    rng: ChaCha8Rng,
}

impl PseudoStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        let mut key = [0u8; 32];
        let mut z = seed;
        for chunk in key.chunks_exact_mut(8) {
            z = splitmix64(z);
            chunk.copy_from_slice(&z.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(stream_index);
        Self { rng }
    }
}

impl UniformSource for PseudoStream {
    /// Midpoint of a 53-bit grid cell: lies in (0, 1), never 0.
    #[inline]
    fn next_uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }
}

/// Kind of logical uniform stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SamplerKind {
    Pseudo,
    Sobol,
}

impl SamplerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SamplerKind::Pseudo => "pseudo",
            SamplerKind::Sobol => "sobol",
        }
    }
}

impl std::str::FromStr for SamplerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "pseudo" => Ok(SamplerKind::Pseudo),
            "sobol" => Ok(SamplerKind::Sobol),
            other => Err(format!("unknown sampler `{other}` (expected pseudo|sobol)")),
        }
    }
}

#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
enum Source {
    Pseudo(PseudoStream),
    Sobol { seq: SobolSequence, coord: usize },
}

/// A logical uniform stream plus its auxiliary pseudo substream.
///
/// For `Sobol`, draws walk the coordinates of the current point and move to
/// the next point after `dimension` draws. `stream_index` selects the block
/// of `block_len` points starting at `1 + stream_index * block_len`, so the
/// origin is never emitted and distinct indices never overlap.
#[derive(Debug, Clone)]
pub struct UniformStream {
    source: Source,
    aux: PseudoStream,
    seed: u64,
    stream_index: u64,
}

impl UniformStream {
    pub fn pseudo(seed: u64, stream_index: u64) -> Self {
        Self {
            source: Source::Pseudo(PseudoStream::new(seed, stream_index)),
            aux: PseudoStream::new(seed ^ AUX_SALT, stream_index),
            seed,
            stream_index,
        }
    }

    pub fn sobol(seed: u64, dimension: usize, stream_index: u64, block_len: u64) -> Result<Self> {
        let start = stream_index
            .checked_mul(block_len)
            .and_then(|x| x.checked_add(1))
            .ok_or_else(|| HestonError::ConfigInvalid("sobol block index overflow".into()))?;
        Ok(Self {
            source: Source::Sobol {
                seq: SobolSequence::new(dimension, start)?,
                coord: 0,
            },
            aux: PseudoStream::new(seed ^ AUX_SALT, stream_index),
            seed,
            stream_index,
        })
    }

    pub fn kind(&self) -> SamplerKind {
        match self.source {
            Source::Pseudo(_) => SamplerKind::Pseudo,
            Source::Sobol { .. } => SamplerKind::Sobol,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Dimension of a Sobol stream; `None` for pseudo streams.
    pub fn dimension(&self) -> Option<usize> {
        match &self.source {
            Source::Pseudo(_) => None,
            Source::Sobol { seq, .. } => Some(seq.dimension()),
        }
    }

    /// Auxiliary pseudo substream for rejection sampling.
    pub fn aux(&mut self) -> &mut PseudoStream {
        &mut self.aux
    }

    /// Fills `out` with one full point (Sobol) or `out.len()` fresh draws
    /// (pseudo). A partially consumed Sobol point is abandoned.
    pub fn next_point(&mut self, out: &mut [f64]) {
        match &mut self.source {
            Source::Pseudo(p) => out.iter_mut().for_each(|x| *x = p.next_uniform()),
            Source::Sobol { seq, coord } => {
                if *coord != 0 {
                    seq.advance();
                    *coord = 0;
                }
                seq.next_point(out);
            }
        }
    }
}

impl UniformSource for UniformStream {
    #[inline]
    fn next_uniform(&mut self) -> f64 {
        match &mut self.source {
            Source::Pseudo(p) => p.next_uniform(),
            Source::Sobol { seq, coord } => {
                let u = seq.coordinate(*coord);
                *coord += 1;
                if *coord == seq.dimension() {
                    seq.advance();
                    *coord = 0;
                }
                u
            }
        }
    }
}

/// Standard normal variate from one uniform of `stream`.
#[inline]
pub fn sample_normal<S: UniformSource + ?Sized>(stream: &mut S) -> f64 {
    stream.next_normal()
}

/// Two standard normals with correlation `rho`: `Z1 = Za`,
/// `Z2 = rho * Z1 + sqrt(1 - rho^2) * Zb`.
#[inline]
pub fn correlated_pair<S: UniformSource + ?Sized>(stream: &mut S, rho: f64) -> (f64, f64) {
    let za = stream.next_normal();
    let zb = stream.next_normal();
    (za, rho * za + (1.0 - rho * rho).max(0.0).sqrt() * zb)
}

/// Gamma(shape, scale) variate by Marsaglia–Tsang squeeze/rejection.
/// Shapes below one use `Gamma(shape + 1) * U^(1/shape)`.
pub fn sample_gamma<S: UniformSource + ?Sized>(stream: &mut S, shape: f64, scale: f64) -> f64 {
    debug_assert!(shape > 0.0 && scale > 0.0);
    if shape < 1.0 {
        let boost = stream.next_uniform().powf(1.0 / shape);
        return sample_gamma(stream, shape + 1.0, scale) * boost;
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = stream.next_normal();
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = stream.next_uniform();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v * scale;
        }
    }
}

/// Non-central chi-squared law parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NccsParams {
    pub dof: f64,
    pub noncentrality: f64,
}

impl NccsParams {
    pub fn new(dof: f64, noncentrality: f64) -> Result<Self> {
        if !(dof > 1.0) {
            return Err(HestonError::DofOutOfRange { dof });
        }
        if !(noncentrality >= 0.0) {
            return Err(HestonError::invalid(
                "noncentrality",
                format!("must be non-negative, got {noncentrality}"),
            ));
        }
        Ok(Self { dof, noncentrality })
    }
}

/// Non-central chi-squared draw as `Gamma((d-1)/2, 2) + (Z + sqrt(lambda))^2`.
///
/// Consumes one uniform from the logical stream (for `Z`); the Gamma part is
/// drawn from the auxiliary substream.
pub fn sample_nccs(stream: &mut UniformStream, p: NccsParams) -> Result<f64> {
    if !(p.dof > 1.0) {
        return Err(HestonError::DofOutOfRange { dof: p.dof });
    }
    let z = stream.next_normal();
    Ok(nccs_from_normal(stream.aux(), p, z))
}

/// NCCS draw given the normal component explicitly; the Gamma component comes
/// from `gamma_source`.
#[inline]
pub(crate) fn nccs_from_normal<S: UniformSource + ?Sized>(
    gamma_source: &mut S,
    p: NccsParams,
    z: f64,
) -> f64 {
    let central = sample_gamma(gamma_source, 0.5 * (p.dof - 1.0), 2.0);
    let shifted = z + p.noncentrality.sqrt();
    central + shifted * shifted
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(xs: &[f64]) -> (f64, f64) {
        crate::num::mean_and_std(xs)
    }

    #[test]
    fn pseudo_stream_uniform_mean() {
        let mut s = UniformStream::pseudo(42, 0);
        let n = 1_000_000;
        let mean = (0..n).map(|_| s.next_uniform()).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.002, "mean {mean}");
    }

    #[test]
    fn pseudo_draws_in_open_unit_interval() {
        let mut s = PseudoStream::new(0, 0);
        for _ in 0..100_000 {
            let u = s.next_uniform();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let a: Vec<f64> = {
            let mut s = UniformStream::pseudo(7, 3);
            (0..16).map(|_| s.next_uniform()).collect()
        };
        let b: Vec<f64> = {
            let mut s = UniformStream::pseudo(7, 3);
            (0..16).map(|_| s.next_uniform()).collect()
        };
        let c: Vec<f64> = {
            let mut s = UniformStream::pseudo(7, 4);
            (0..16).map(|_| s.next_uniform()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn sobol_stream_skips_origin() {
        let mut s = UniformStream::sobol(0, 1, 0, 1).unwrap();
        let got: Vec<f64> = (0..4).map(|_| s.next_uniform()).collect();
        assert_eq!(got, vec![0.5, 0.75, 0.25, 0.375]);
    }

    #[test]
    fn sobol_stream_blocks_are_disjoint() {
        let mut a = UniformStream::sobol(0, 3, 0, 4).unwrap();
        let mut b = UniformStream::sobol(0, 3, 1, 4).unwrap();
        let mut pa = [0.0; 3];
        let mut pb = [0.0; 3];
        for i in 0..4u64 {
            a.next_point(&mut pa);
            b.next_point(&mut pb);
            assert_eq!(pa.to_vec(), sobol_point(3, 1 + i).unwrap());
            assert_eq!(pb.to_vec(), sobol_point(3, 5 + i).unwrap());
        }
    }

    #[test]
    fn sobol_uniform_walks_coordinates() {
        let mut s = UniformStream::sobol(0, 2, 0, 1).unwrap();
        let got: Vec<f64> = (0..4).map(|_| s.next_uniform()).collect();
        assert_eq!(got, vec![0.5, 0.5, 0.75, 0.25]);
    }

    #[test]
    fn normal_from_median_is_zero() {
        struct Fixed(f64);
        impl UniformSource for Fixed {
            fn next_uniform(&mut self) -> f64 {
                self.0
            }
        }
        assert_eq!(sample_normal(&mut Fixed(0.5)), 0.0);
    }

    #[test]
    fn normal_variance() {
        let mut s = UniformStream::pseudo(1, 0);
        let xs: Vec<f64> = (0..1_000_000).map(|_| sample_normal(&mut s)).collect();
        let (m, sd) = moments(&xs);
        assert!(m.abs() < 0.005);
        assert!((sd * sd - 1.0).abs() < 0.01);
    }

    #[test]
    fn correlated_pair_limits() {
        let mut a = UniformStream::pseudo(5, 0);
        let mut b = UniformStream::pseudo(5, 0);
        for _ in 0..1000 {
            let (z1, z2) = correlated_pair(&mut a, 1.0);
            assert_eq!(z1, z2);
            let (_, z2) = correlated_pair(&mut b, 0.0);
            let _ = z2;
        }
        let mut a = UniformStream::pseudo(9, 0);
        let mut b = UniformStream::pseudo(9, 0);
        for _ in 0..1000 {
            let (_, z2) = correlated_pair(&mut a, 0.0);
            let _za = b.next_normal();
            let zb = b.next_normal();
            assert_eq!(z2, zb);
        }
    }

    #[test]
    fn correlated_pair_moments() {
        let mut s = UniformStream::pseudo(11, 0);
        let n = 1_000_000;
        let (mut s1, mut s2, mut s11, mut s22, mut s12) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let (a, b) = correlated_pair(&mut s, -0.7);
            s1 += a;
            s2 += b;
            s11 += a * a;
            s22 += b * b;
            s12 += a * b;
        }
        let n = n as f64;
        let (m1, m2) = (s1 / n, s2 / n);
        let v1 = s11 / n - m1 * m1;
        let v2 = s22 / n - m2 * m2;
        let corr = (s12 / n - m1 * m2) / (v1 * v2).sqrt();
        assert!((corr + 0.7).abs() < 0.005, "corr {corr}");
        assert!((v1 - 1.0).abs() < 0.01 && (v2 - 1.0).abs() < 0.01);
    }

    #[test]
    fn gamma_moments() {
        let mut s = PseudoStream::new(3, 0);
        let xs: Vec<f64> = (0..1_000_000)
            .map(|_| sample_gamma(&mut s, 2.0, 2.0))
            .collect();
        let (m, sd) = moments(&xs);
        assert!((m - 4.0).abs() < 0.02, "mean {m}");
        assert!((sd * sd - 8.0).abs() < 0.1, "var {}", sd * sd);
    }

    #[test]
    fn nccs_rejects_small_dof() {
        let mut s = UniformStream::pseudo(0, 0);
        let p = NccsParams {
            dof: 1.0,
            noncentrality: 1.0,
        };
        assert_eq!(
            sample_nccs(&mut s, p),
            Err(HestonError::DofOutOfRange { dof: 1.0 })
        );
        assert!(NccsParams::new(0.5, 1.0).is_err());
        assert!(NccsParams::new(2.0, -1.0).is_err());
    }

    #[test]
    fn nccs_central_mean() {
        let mut s = UniformStream::pseudo(13, 0);
        let p = NccsParams::new(1.268, 0.0).unwrap();
        let xs: Vec<f64> = (0..1_000_000)
            .map(|_| sample_nccs(&mut s, p).unwrap())
            .collect();
        let (m, _) = moments(&xs);
        assert!((m / 1.268 - 1.0).abs() < 0.005, "mean {m}");
    }

    #[test]
    fn nccs_noncentral_moments() {
        let mut s = UniformStream::pseudo(17, 0);
        let p = NccsParams::new(2.5, 3.0).unwrap();
        let xs: Vec<f64> = (0..1_000_000)
            .map(|_| sample_nccs(&mut s, p).unwrap())
            .collect();
        let (m, sd) = moments(&xs);
        assert!((m / 5.5 - 1.0).abs() < 0.005, "mean {m}");
        assert!((sd * sd / 17.0 - 1.0).abs() < 0.02, "var {}", sd * sd);
    }

    #[test]
    fn nccs_non_negative() {
        let mut s = UniformStream::pseudo(19, 0);
        let p = NccsParams::new(1.268, 4.2).unwrap();
        for _ in 0..200_000 {
            assert!(sample_nccs(&mut s, p).unwrap() >= 0.0);
        }
    }

    #[test]
    fn sampler_kind_parses() {
        assert_eq!("sobol".parse::<SamplerKind>(), Ok(SamplerKind::Sobol));
        assert!("mt".parse::<SamplerKind>().is_err());
    }
}
