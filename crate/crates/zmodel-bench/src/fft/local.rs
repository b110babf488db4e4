//! Iterative radix-2 complex FFT for power-of-two line lengths.

use num_complex::Complex64;

/// In-place transform of one line. Forward is unnormalized; the inverse
/// here is the conjugate-twiddle transform, also unnormalized (callers
/// divide by the total point count once per 2D inverse).
pub fn fft_line(data: &mut [Complex64], inverse: bool) {
    let n = data.len();
    assert!(n.is_power_of_two(), "FFT length {n} is not a power of two");
    if n <= 1 {
        return;
    }

    // Bit-reversal permutation.
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            data.swap(i, j);
        }
    }

    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    let mut twiddles: Vec<Complex64> = Vec::with_capacity(n / 2);
    while len <= n {
        let half = len / 2;
        twiddles.clear();
        for k in 0..half {
            let ang = sign * std::f64::consts::TAU * k as f64 / len as f64;
            twiddles.push(Complex64::new(ang.cos(), ang.sin()));
        }
        for chunk in data.chunks_mut(len) {
            for k in 0..half {
                let u = chunk[k];
                let v = chunk[k + half] * twiddles[k];
                chunk[k] = u + v;
                chunk[k + half] = u - v;
            }
        }
        len <<= 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::rng;

    /// Direct O(n^2) DFT, the independent oracle.
    fn naive_dft(input: &[Complex64], inverse: bool) -> Vec<Complex64> {
        let n = input.len();
        let sign = if inverse { 1.0 } else { -1.0 };
        (0..n)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (t, x) in input.iter().enumerate() {
                    let ang = sign * std::f64::consts::TAU * (k * t) as f64 / n as f64;
                    acc += x * Complex64::new(ang.cos(), ang.sin());
                }
                acc
            })
            .collect()
    }

    #[test]
    fn delta_transforms_to_ones() {
        let mut data = vec![Complex64::new(0.0, 0.0); 8];
        data[0] = Complex64::new(1.0, 0.0);
        fft_line(&mut data, false);
        for v in &data {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn constant_transforms_to_dc() {
        let mut data = vec![Complex64::new(2.5, 0.0); 16];
        fft_line(&mut data, false);
        assert!((data[0] - Complex64::new(40.0, 0.0)).norm() < 1e-12);
        for v in &data[1..] {
            assert_eq!(*v, Complex64::new(0.0, 0.0), "non-DC bins are exactly zero");
        }
    }

    #[test]
    fn matches_naive_dft() {
        for n in [2usize, 8, 32, 128] {
            let input: Vec<Complex64> = (0..n)
                .map(|k| {
                    Complex64::new(
                        rng::uniform(3, k as u64, 0) - 0.5,
                        rng::uniform(3, k as u64, 1) - 0.5,
                    )
                })
                .collect();
            let mut fast = input.clone();
            fft_line(&mut fast, false);
            let slow = naive_dft(&input, false);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-11 * n as f64, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn roundtrip_recovers_input() {
        let n = 64;
        let input: Vec<Complex64> = (0..n)
            .map(|k| Complex64::new(rng::uniform(9, k as u64, 0), rng::uniform(9, k as u64, 1)))
            .collect();
        let mut data = input.clone();
        fft_line(&mut data, false);
        fft_line(&mut data, true);
        for (a, b) in data.iter().zip(&input) {
            assert!((a / n as f64 - b).norm() < 1e-13);
        }
    }
}
