use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

/// Above this mean, inversion is replaced by the rejection sampler from `rand_distr`.
pub const POISSON_INVERSION_LIMIT: f64 = 30.0;

/// What a substream is used for; part of the stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub(crate) enum Purpose {
    Ensemble = 1,
    ReferenceCounts = 2,
    PerturbedCounts = 3,
    RatioNoise = 4,
}

/// Addresses one independent ChaCha8 stream: `(purpose, point, repeat, chunk)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct StreamId {
    pub purpose: Purpose,
    pub point: u32,
    pub repeat: u32,
    pub chunk: u32,
}

impl StreamId {
    pub fn new(purpose: Purpose, point: usize, repeat: usize) -> Self {
        Self {
            purpose,
            point: point as u32,
            repeat: repeat as u32,
            chunk: 0,
        }
    }

    pub fn chunk(self, chunk: usize) -> Self {
        Self {
            chunk: chunk as u32,
            ..self
        }
    }

    fn word(self) -> u64 {
        ((self.purpose as u64) << 56)
            | ((self.point as u64 & 0xff_ffff) << 32)
            | ((self.repeat as u64 & 0xffff) << 16)
            | (self.chunk as u64 & 0xffff)
    }

    pub fn rng(self, seed: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(self.word());
        rng
    }
}

/// Uniform draw on the open interval (0, 1).
pub(crate) fn open_unit<R: RngCore>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Poisson variate. Small means use sequential inversion, so every draw consumes
/// exactly one uniform.
pub(crate) fn poisson<R: Rng>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        let _ = open_unit(rng);
        return 0;
    }
    if mean >= POISSON_INVERSION_LIMIT {
        return Poisson::new(mean).expect("finite positive mean").sample(rng) as u64;
    }
    let u = open_unit(rng);
    let mut p = (-mean).exp();
    let mut cdf = p;
    let mut n = 0u64;
    while u > cdf {
        n += 1;
        p *= mean / n as f64;
        let next = cdf + p;
        if next == cdf {
            break;
        }
        cdf = next;
    }
    n
}

/// Compensated (Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &KahanSum) {
        self.add(other.sum);
        self.add(other.carry);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_differ_and_repeat() {
        let a = StreamId::new(Purpose::Ensemble, 0, 0);
        let x: Vec<u64> = (0..4).map(|_| a.rng(7).next_u64()).collect();
        assert!(x.windows(2).all(|w| w[0] == w[1]));
        let mut r1 = a.rng(7);
        let mut r2 = a.chunk(1).rng(7);
        assert_ne!(r1.next_u64(), r2.next_u64());
        let mut r3 = StreamId::new(Purpose::PerturbedCounts, 0, 0).rng(7);
        assert_ne!(a.rng(7).next_u64(), r3.next_u64());
    }

    #[test]
    fn open_unit_stays_inside() {
        let mut rng = StreamId::new(Purpose::Ensemble, 0, 0).rng(1);
        for _ in 0..10_000 {
            let u = open_unit(&mut rng);
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn poisson_moments() {
        for &mean in &[0.3, 2.5, 12.0, 80.0] {
            let mut rng = StreamId::new(Purpose::Ensemble, 1, 2).rng(99);
            let n = 200_000;
            let draws: Vec<f64> = (0..n).map(|_| poisson(&mut rng, mean) as f64).collect();
            let m = draws.iter().sum::<f64>() / n as f64;
            let var = draws.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            assert!((m - mean).abs() < 4.0 * (mean / n as f64).sqrt(), "mean {m} vs {mean}");
            // var of the sample variance for Poisson ≈ (λ + 2λ²)/n
            let se_var = ((mean + 2.0 * mean * mean) / n as f64).sqrt();
            assert!((var - mean).abs() < 4.0 * se_var, "var {var} vs {mean}");
        }
    }

    #[test]
    fn zero_mean_gives_zero() {
        let mut rng = StreamId::new(Purpose::Ensemble, 0, 0).rng(3);
        assert!((0..100).all(|_| poisson(&mut rng, 0.0) == 0));
    }

    #[test]
    fn compensated_sum() {
        let mut s = KahanSum::default();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }
}
