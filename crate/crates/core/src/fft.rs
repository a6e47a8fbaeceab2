//! Unnormalized complex FFT: iterative radix-2 for powers of two, Bluestein
//! chirp-z for other lengths, and axis-by-axis transforms of `N^d` arrays.
//!
//! Forward uses `e^{-2πi jk/n}`, inverse `e^{+2πi jk/n}`; neither divides by `n`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
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

#[inline]
fn twiddle(sign: f64, num: usize, den: usize) -> Complex64 {
    let t = 2.0 * PI * (num % den) as f64 / den as f64;
    Complex64::new(libm::cos(t), sign * libm::sin(t))
}

fn radix2(data: &mut [Complex64], dir: Direction) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    let bits = n.trailing_zeros();
    if bits == 0 {
        return;
    }
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            data.swap(i, j);
        }
    }
    let sign = dir.sign();
    let roots: Vec<Complex64> = (0..n / 2).map(|k| twiddle(sign, k, n)).collect();
    let mut len = 2;
    while len <= n {
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..len / 2 {
                let w = roots[k * stride];
                let u = data[start + k];
                let v = data[start + k + len / 2] * w;
                data[start + k] = u + v;
                data[start + k + len / 2] = u - v;
            }
        }
        len <<= 1;
    }
}

fn bluestein(data: &mut [Complex64], dir: Direction) {
    let n = data.len();
    let m = (2 * n - 1).next_power_of_two();
    let sign = dir.sign();
    // chirp[k] = e^{sign·πi k²/n}
    let chirp: Vec<Complex64> = (0..n).map(|k| twiddle(sign, (k * k) % (2 * n), 2 * n)).collect();
    let mut a = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..n {
        a[k] = data[k] * chirp[k];
    }
    let mut b = vec![Complex64::new(0.0, 0.0); m];
    b[0] = chirp[0].conj();
    for k in 1..n {
        b[k] = chirp[k].conj();
        b[m - k] = chirp[k].conj();
    }
    radix2(&mut a, Direction::Forward);
    radix2(&mut b, Direction::Forward);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    radix2(&mut a, Direction::Inverse);
    let scale = 1.0 / m as f64;
    for k in 0..n {
        data[k] = a[k] * chirp[k] * scale;
    }
}

/// In-place one-dimensional transform of any length.
pub fn fft(data: &mut [Complex64], dir: Direction) {
    match data.len() {
        0 | 1 => {}
        n if n.is_power_of_two() => radix2(data, dir),
        _ => bluestein(data, dir),
    }
}

/// In-place transform of an `n^d` array stored with axis 0 slowest.
pub fn fft_nd(data: &mut [Complex64], d: usize, n: usize, dir: Direction) {
    assert_eq!(data.len(), n.pow(d as u32), "array length must be n^d");
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        let block = stride * n;
        for base in (0..data.len()).step_by(block) {
            for off in 0..stride {
                for (j, v) in line.iter_mut().enumerate() {
                    *v = data[base + off + j * stride];
                }
                fft(&mut line, dir);
                for (j, v) in line.iter().enumerate() {
                    data[base + off + j * stride] = *v;
                }
            }
        }
    }
}

/// Signed frequency in `(-n/2, n/2]` of FFT bin `j`.
#[inline]
pub fn frequency(j: usize, n: usize) -> i64 {
    if 2 * j > n {
        j as i64 - n as i64
    } else {
        j as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(x: &[Complex64], dir: Direction) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| x.iter().enumerate().map(|(j, v)| v * twiddle(dir.sign(), j * k, n)).sum())
            .collect()
    }

    fn sample(n: usize) -> Vec<Complex64> {
        (0..n).map(|j| Complex64::new(libm::sin(j as f64 * 1.3) + 0.1 * j as f64, libm::cos(j as f64 * 0.7))).collect()
    }

    #[test]
    fn matches_naive_dft() {
        for n in [1, 2, 3, 5, 8, 12, 17, 64, 100, 200] {
            let x = sample(n);
            for dir in [Direction::Forward, Direction::Inverse] {
                let mut y = x.clone();
                fft(&mut y, dir);
                let z = naive(&x, dir);
                for (a, b) in y.iter().zip(&z) {
                    assert!((a - b).norm() < 1e-10 * n as f64, "n={n}");
                }
            }
        }
    }

    #[test]
    fn round_trip_nd() {
        for (d, n) in [(1usize, 30usize), (2, 16), (2, 9), (3, 6)] {
            let x = sample(n.pow(d as u32));
            let mut y = x.clone();
            fft_nd(&mut y, d, n, Direction::Forward);
            fft_nd(&mut y, d, n, Direction::Inverse);
            let scale = 1.0 / x.len() as f64;
            for (a, b) in x.iter().zip(&y) {
                assert!((a - b * scale).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn frequencies() {
        assert_eq!((0..6).map(|j| frequency(j, 6)).collect::<Vec<_>>(), vec![0, 1, 2, 3, -2, -1]);
        assert_eq!((0..5).map(|j| frequency(j, 5)).collect::<Vec<_>>(), vec![0, 1, 2, -2, -1]);
    }
}
