//! Gray-code Sobol sequence with Joe–Kuo direction numbers.
//!
//! Coordinates are 32-bit binary fractions. Index 0 (the origin) is a valid
//! point of the raw sequence; streams built on top of it skip it.

use std::sync::OnceLock;

use super::sobol_table::{DIRECTION_TABLE, MAX_DIMENSION};
use crate::error::{HestonError, Result};

const BITS: usize = 32;
const SCALE: f64 = 1.0 / 4_294_967_296.0;

/// Largest supported dimension.
pub const SOBOL_MAX_DIMENSION: usize = MAX_DIMENSION;

type Directions = [u32; BITS];

fn directions() -> &'static [Directions] {
    static TABLE: OnceLock<Vec<Directions>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(MAX_DIMENSION);
        let mut first = [0u32; BITS];
        for (k, v) in first.iter_mut().enumerate() {
            *v = 1u32 << (BITS - 1 - k);
        }
        table.push(first);
        for &(degree, coeffs, initial) in DIRECTION_TABLE.iter() {
            table.push(build_directions(degree as usize, coeffs, initial));
        }
        table
    })
}

fn build_directions(degree: usize, coeffs: u32, initial: &[u32]) -> Directions {
    let mut v = [0u32; BITS];
    for k in 0..degree.min(BITS) {
        v[k] = initial[k] << (BITS - 1 - k);
    }
    for k in degree..BITS {
        let mut x = v[k - degree] ^ (v[k - degree] >> degree);
        for l in 1..degree {
            if (coeffs >> (degree - 1 - l)) & 1 == 1 {
                x ^= v[k - l];
            }
        }
        v[k] = x;
    }
    v
}

/// Integer coordinates of point `index` in dimension `dim` (random access).
fn coordinate_bits(dim: usize, index: u64) -> u32 {
    let gray = index ^ (index >> 1);
    let v = &directions()[dim];
    let mut x = 0u32;
    let mut g = gray;
    let mut k = 0;
    while g != 0 && k < BITS {
        if g & 1 == 1 {
            x ^= v[k];
        }
        g >>= 1;
        k += 1;
    }
    x
}

/// Sequential Sobol generator positioned at an arbitrary index.
#[derive(Debug, Clone)]
pub struct SobolSequence {
    dimension: usize,
    index: u64,
    state: Vec<u32>,
}

impl SobolSequence {
    /// Positions the generator at point `start` (0 is the origin).
    pub fn new(dimension: usize, start: u64) -> Result<Self> {
        if dimension == 0 || dimension > MAX_DIMENSION {
            return Err(HestonError::ConfigInvalid(format!(
                "sobol dimension must be in 1..={MAX_DIMENSION}, got {dimension}"
            )));
        }
        if start >= 1u64 << BITS {
            return Err(HestonError::ConfigInvalid(format!(
                "sobol index {start} exceeds 2^32"
            )));
        }
        let state = (0..dimension).map(|d| coordinate_bits(d, start)).collect();
        Ok(Self {
            dimension,
            index: start,
            state,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Index of the point that [`current`](Self::current) returns.
    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn current(&self, out: &mut [f64]) {
        for (o, &x) in out.iter_mut().zip(&self.state) {
            *o = x as f64 * SCALE;
        }
    }

    pub fn coordinate(&self, dim: usize) -> f64 {
        self.state[dim] as f64 * SCALE
    }

    /// Moves to the next point (Antonov–Saleev update).
    pub fn advance(&mut self) {
        self.index += 1;
        let c = self.index.trailing_zeros() as usize;
        let table = directions();
        if c >= BITS {
            // wrapped past 2^32 points; restart the cycle
            self.state.iter_mut().for_each(|x| *x = 0);
            return;
        }
        for (d, x) in self.state.iter_mut().enumerate() {
            *x ^= table[d][c];
        }
    }

    /// Fills `out` with the current point and advances.
    pub fn next_point(&mut self, out: &mut [f64]) {
        self.current(out);
        self.advance();
    }
}

/// Point `index` of the raw sequence (including the origin at index 0).
pub fn sobol_point(dimension: usize, index: u64) -> Result<Vec<f64>> {
    let seq = SobolSequence::new(dimension, index)?;
    let mut out = vec![0.0; dimension];
    seq.current(&mut out);
    Ok(out)
}
