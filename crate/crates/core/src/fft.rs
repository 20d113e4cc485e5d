//! Complex FFTs for the torus grids.
//!
//! Mixed-radix (2, 3, 4, 5) decimation in time with a Bluestein fallback for
//! lengths carrying other prime factors. Transforms are unnormalized in both
//! directions.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => -1.0,
            Direction::Inverse => 1.0,
        }
    }
}

#[derive(Clone, Debug)]
enum Algorithm {
    Radix { factors: Vec<usize> },
    Bluestein(Box<Bluestein>),
}

/// A planned one-dimensional transform of fixed length.
#[derive(Clone, Debug)]
pub struct Fft {
    n: usize,
    direction: Direction,
    /// `exp(sign * 2 pi i t / n)` for `t in 0..n`.
    twiddles: Vec<Complex64>,
    algorithm: Algorithm,
}

#[derive(Clone, Debug)]
struct Bluestein {
    inner_forward: Fft,
    inner_inverse: Fft,
    chirp: Vec<Complex64>,
    kernel_hat: Vec<Complex64>,
}

fn small_factors(mut n: usize) -> Option<Vec<usize>> {
    let mut out = Vec::new();
    while n % 4 == 0 {
        out.push(4);
        n /= 4;
    }
    for p in [2usize, 3, 5] {
        while n % p == 0 {
            out.push(p);
            n /= p;
        }
    }
    if n == 1 {
        Some(out)
    } else {
        None
    }
}

impl Fft {
    pub fn new(n: usize, direction: Direction) -> Self {
        assert!(n > 0, "fft length must be positive");
        let sign = direction.sign();
        let twiddles = (0..n)
            .map(|t| {
                let ang = sign * 2.0 * PI * (t as f64) / (n as f64);
                Complex64::new(ang.cos(), ang.sin())
            })
            .collect();
        let algorithm = match small_factors(n) {
            Some(factors) => Algorithm::Radix { factors },
            None => Algorithm::Bluestein(Box::new(Bluestein::new(n, direction))),
        };
        Fft {
            n,
            direction,
            twiddles,
            algorithm,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Transforms `data` in place; `scratch` must hold at least `len()` values.
    pub fn process(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.n);
        match &self.algorithm {
            Algorithm::Radix { factors } => {
                let scratch = &mut scratch[..self.n];
                scratch.copy_from_slice(data);
                self.radix_rec(scratch, 0, 1, data, factors);
            }
            Algorithm::Bluestein(b) => b.process(data, self.direction),
        }
    }

    fn radix_rec(
        &self,
        input: &[Complex64],
        offset: usize,
        stride: usize,
        out: &mut [Complex64],
        factors: &[usize],
    ) {
        let n = out.len();
        if n == 1 {
            out[0] = input[offset];
            return;
        }
        let p = factors[0];
        let m = n / p;
        for q in 0..p {
            self.radix_rec(
                input,
                offset + q * stride,
                stride * p,
                &mut out[q * m..(q + 1) * m],
                &factors[1..],
            );
        }
        // twiddle for length n is twiddles[t * (N / n)]
        let step = self.n / n;
        let tw = |t: usize| self.twiddles[(t * step) % self.n];
        match p {
            2 => {
                for k in 0..m {
                    let a = out[k];
                    let b = out[k + m] * tw(k);
                    out[k] = a + b;
                    out[k + m] = a - b;
                }
            }
            4 => {
                // multiplication by the quarter-turn in the transform direction
                let j = Complex64::new(0.0, self.direction.sign());
                for k in 0..m {
                    let a0 = out[k];
                    let a1 = out[k + m] * tw(k);
                    let a2 = out[k + 2 * m] * tw(2 * k);
                    let a3 = out[k + 3 * m] * tw(3 * k);
                    let s02 = a0 + a2;
                    let d02 = a0 - a2;
                    let s13 = a1 + a3;
                    let d13 = (a1 - a3) * j;
                    out[k] = s02 + s13;
                    out[k + m] = d02 + d13;
                    out[k + 2 * m] = s02 - s13;
                    out[k + 3 * m] = d02 - d13;
                }
            }
            _ => {
                let mut tmp = [Complex64::new(0.0, 0.0); 5];
                let root = self.n / p;
                for k in 0..m {
                    for (q, t) in tmp.iter_mut().enumerate().take(p) {
                        *t = out[k + q * m] * tw(q * k);
                    }
                    for s in 0..p {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (q, t) in tmp.iter().enumerate().take(p) {
                            acc += *t * self.twiddles[(q * s % p) * root];
                        }
                        out[k + s * m] = acc;
                    }
                }
            }
        }
    }
}

impl Bluestein {
    fn new(n: usize, direction: Direction) -> Self {
        let m = (2 * n - 1).next_power_of_two();
        let sign = direction.sign();
        let chirp: Vec<Complex64> = (0..n)
            .map(|k| {
                // k^2 mod 2n keeps the phase argument small
                let kk = ((k as u128 * k as u128) % (2 * n as u128)) as f64;
                let ang = sign * PI * kk / (n as f64);
                Complex64::new(ang.cos(), ang.sin())
            })
            .collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); m];
        kernel[0] = chirp[0].conj();
        for k in 1..n {
            kernel[k] = chirp[k].conj();
            kernel[m - k] = chirp[k].conj();
        }
        let inner_forward = Fft::new(m, Direction::Forward);
        let inner_inverse = Fft::new(m, Direction::Inverse);
        let mut scratch = vec![Complex64::new(0.0, 0.0); m];
        inner_forward.process(&mut kernel, &mut scratch);
        Bluestein {
            inner_forward,
            inner_inverse,
            chirp,
            kernel_hat: kernel,
        }
    }

    fn process(&self, data: &mut [Complex64], _direction: Direction) {
        let n = data.len();
        let m = self.kernel_hat.len();
        let mut a = vec![Complex64::new(0.0, 0.0); m];
        let mut scratch = vec![Complex64::new(0.0, 0.0); m];
        for k in 0..n {
            a[k] = data[k] * self.chirp[k];
        }
        self.inner_forward.process(&mut a, &mut scratch);
        for (x, h) in a.iter_mut().zip(&self.kernel_hat) {
            *x *= *h;
        }
        self.inner_inverse.process(&mut a, &mut scratch);
        let inv_m = 1.0 / m as f64;
        for k in 0..n {
            data[k] = a[k] * self.chirp[k] * inv_m;
        }
    }
}

/// Lines processed together when gathering along a strided axis.
const BATCH: usize = 16;

/// Transform every line of a row-major `[n; dim]` array along `axis`.
pub fn transform_axis(data: &mut [Complex64], n: usize, dim: usize, axis: usize, fft: &Fft) {
    assert_eq!(fft.len(), n);
    debug_assert_eq!(data.len(), n.pow(dim as u32));
    let stride = n.pow((dim - 1 - axis) as u32);
    let outer = n.pow(axis as u32);
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];
    if stride == 1 {
        for line in data.chunks_exact_mut(n) {
            fft.process(line, &mut scratch);
        }
        return;
    }
    let batch = BATCH.min(stride);
    let mut buf = vec![Complex64::new(0.0, 0.0); batch * n];
    for o in 0..outer {
        let base = o * n * stride;
        let mut i0 = 0;
        while i0 < stride {
            let b = batch.min(stride - i0);
            for t in 0..n {
                let row = base + t * stride + i0;
                for (lane, v) in data[row..row + b].iter().enumerate() {
                    buf[lane * n + t] = *v;
                }
            }
            for lane in 0..b {
                fft.process(&mut buf[lane * n..(lane + 1) * n], &mut scratch);
            }
            for t in 0..n {
                let row = base + t * stride + i0;
                for (lane, v) in data[row..row + b].iter_mut().enumerate() {
                    *v = buf[lane * n + t];
                }
            }
            i0 += b;
        }
    }
}

/// Full `dim`-dimensional transform of a row-major `[n; dim]` array.
pub fn transform_all(data: &mut [Complex64], n: usize, dim: usize, direction: Direction) {
    let fft = Fft::new(n, direction);
    for axis in 0..dim {
        transform_axis(data, n, dim, axis, &fft);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[Complex64], direction: Direction) -> Vec<Complex64> {
        let n = x.len();
        let sign = direction.sign();
        (0..n)
            .map(|k| {
                x.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (j, v)| {
                    let ang = sign * 2.0 * PI * ((j * k) % n) as f64 / n as f64;
                    acc + v * Complex64::new(ang.cos(), ang.sin())
                })
            })
            .collect()
    }

    fn sample(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|j| {
                let t = j as f64;
                Complex64::new((0.37 * t).sin() + 0.1 * t, (1.3 * t).cos() - 0.05 * t * t)
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_for_mixed_and_prime_lengths() {
        for n in [1usize, 2, 3, 4, 5, 6, 8, 12, 16, 30, 48, 7, 14, 22, 96, 128] {
            for dir in [Direction::Forward, Direction::Inverse] {
                let x = sample(n);
                let expect = naive_dft(&x, dir);
                let mut got = x.clone();
                let mut scratch = vec![Complex64::new(0.0, 0.0); n];
                Fft::new(n, dir).process(&mut got, &mut scratch);
                let scale = expect.iter().map(|c| c.norm()).fold(1.0, f64::max);
                for (a, b) in got.iter().zip(&expect) {
                    assert!((a - b).norm() <= 1e-11 * scale, "n={n} {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn round_trip_multi_dimensional() {
        let n = 12;
        let dim = 3;
        let x: Vec<Complex64> = sample(n * n * n);
        let mut y = x.clone();
        transform_all(&mut y, n, dim, Direction::Forward);
        transform_all(&mut y, n, dim, Direction::Inverse);
        let scale = (n * n * n) as f64;
        let big = x.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b / scale).norm() < 1e-12 * big);
        }
    }
}
