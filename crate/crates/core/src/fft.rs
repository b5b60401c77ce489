//! Mixed-radix complex FFT for arbitrary lengths.
//!
//! Decimation in time over the prime-power factorization of the length:
//! inputs are gathered through a mixed-radix digit-reversal permutation and
//! then combined stage by stage in place. Radix 2 and 4 have dedicated
//! butterflies; every other prime factor uses a direct DFT against a
//! precomputed root table, so odd primes cost O(p) per output.
//!
//! Transforms are unnormalized: `forward` computes `X[k] = sum x[j] w^{jk}`
//! with `w = exp(-2 pi i / n)` and `inverse` uses the conjugate root.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

#[derive(Debug, Clone)]
struct Stage {
    radix: usize,
    /// Length of each sub-transform entering this stage.
    span: usize,
    /// `w_L^{j q}` for `j < span`, `1 <= q < radix`, with `L = span * radix`.
    twiddles: Vec<Complex64>,
    /// `exp(-2 pi i m / radix)` for `m < radix`; only used by generic radices.
    roots: Vec<Complex64>,
}

/// Precomputed factorization, permutation and twiddle tables for one length.
#[derive(Debug, Clone)]
pub struct FftPlan {
    len: usize,
    perm: Vec<usize>,
    stages: Vec<Stage>,
}

fn factorize(mut n: usize) -> Vec<usize> {
    let mut factors = Vec::new();
    while n.is_multiple_of(4) {
        factors.push(4);
        n /= 4;
    }
    if n.is_multiple_of(2) {
        factors.push(2);
        n /= 2;
    }
    let mut p = 3;
    while p * p <= n {
        while n.is_multiple_of(p) {
            factors.push(p);
            n /= p;
        }
        p += 2;
    }
    if n > 1 {
        factors.push(n);
    }
    factors
}

fn root(num: usize, den: usize) -> Complex64 {
    // Reduce before converting so large products keep full accuracy.
    let ang = -2.0 * PI * ((num % den) as f64) / (den as f64);
    Complex64::new(libm::cos(ang), libm::sin(ang))
}

impl FftPlan {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "FFT length must be positive");
        let factors = factorize(len);

        // Position i, written with digits q_s in the mixed radix (p_1, p_2, ...),
        // holds original index sum_s q_s * len / (p_1 ... p_s).
        let mut perm = vec![0usize; len];
        for (i, slot) in perm.iter_mut().enumerate() {
            let mut rest = i;
            let mut block = len;
            let mut src = 0;
            for &p in &factors {
                block /= p;
                src += (rest % p) * block;
                rest /= p;
            }
            *slot = src;
        }

        let mut stages = Vec::with_capacity(factors.len());
        let mut span = 1;
        for &radix in &factors {
            let l = span * radix;
            let mut twiddles = Vec::with_capacity(span * (radix - 1));
            for j in 0..span {
                for q in 1..radix {
                    twiddles.push(root(j * q, l));
                }
            }
            let roots = if radix == 2 || radix == 4 {
                Vec::new()
            } else {
                (0..radix).map(|m| root(m, radix)).collect()
            };
            stages.push(Stage {
                radix,
                span,
                twiddles,
                roots,
            });
            span = l;
        }

        Self { len, perm, stages }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place forward transform. `scratch` must have at least `len` entries.
    pub fn forward(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.run(buf, scratch);
    }

    /// In-place unnormalized inverse transform.
    pub fn inverse(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        for z in buf.iter_mut() {
            *z = z.conj();
        }
        self.run(buf, scratch);
        for z in buf.iter_mut() {
            *z = z.conj();
        }
    }

    fn run(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        let n = self.len;
        debug_assert_eq!(buf.len(), n);
        let scratch = &mut scratch[..n];
        for (dst, &src) in scratch.iter_mut().zip(&self.perm) {
            *dst = buf[src];
        }
        buf.copy_from_slice(scratch);

        let mut work = [Complex64::new(0.0, 0.0); 64];
        for stage in &self.stages {
            let p = stage.radix;
            let span = stage.span;
            let l = span * p;
            match p {
                2 => {
                    for block in buf.chunks_exact_mut(l) {
                        let (lo, hi) = block.split_at_mut(span);
                        for j in 0..span {
                            let t = hi[j] * stage.twiddles[j];
                            let a = lo[j];
                            lo[j] = a + t;
                            hi[j] = a - t;
                        }
                    }
                }
                4 => {
                    for block in buf.chunks_exact_mut(l) {
                        for j in 0..span {
                            let tw = &stage.twiddles[3 * j..3 * j + 3];
                            let a0 = block[j];
                            let a1 = block[j + span] * tw[0];
                            let a2 = block[j + 2 * span] * tw[1];
                            let a3 = block[j + 3 * span] * tw[2];
                            let s02 = a0 + a2;
                            let d02 = a0 - a2;
                            let s13 = a1 + a3;
                            let d13 = a1 - a3;
                            // -i * d13
                            let rot = Complex64::new(d13.im, -d13.re);
                            block[j] = s02 + s13;
                            block[j + span] = d02 + rot;
                            block[j + 2 * span] = s02 - s13;
                            block[j + 3 * span] = d02 - rot;
                        }
                    }
                }
                _ => {
                    let mut heap;
                    let tmp: &mut [Complex64] = if p <= work.len() {
                        &mut work[..p]
                    } else {
                        heap = vec![Complex64::new(0.0, 0.0); p];
                        &mut heap
                    };
                    for block in buf.chunks_exact_mut(l) {
                        for j in 0..span {
                            tmp[0] = block[j];
                            for q in 1..p {
                                tmp[q] = block[j + q * span] * stage.twiddles[j * (p - 1) + q - 1];
                            }
                            for k in 0..p {
                                let mut acc = tmp[0];
                                let mut idx = 0;
                                for &t in tmp.iter().skip(1) {
                                    idx += k;
                                    if idx >= p {
                                        idx -= p;
                                    }
                                    acc += t * stage.roots[idx];
                                }
                                block[j + k * span] = acc;
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Applies a 1-D plan along every axis of a row-major cube `n^dim`.
pub(crate) fn transform_nd(
    plan: &FftPlan,
    dim: usize,
    data: &mut [Complex64],
    inverse: bool,
    scratch: &mut Vec<Complex64>,
) {
    let n = plan.len();
    let total = data.len();
    debug_assert_eq!(total, n.pow(dim as u32));
    // line buffer + plan scratch
    if scratch.len() < 2 * n {
        scratch.resize(2 * n, Complex64::new(0.0, 0.0));
    }
    let (line, work) = scratch.split_at_mut(n);

    let apply = |buf: &mut [Complex64], work: &mut [Complex64]| {
        if inverse {
            plan.inverse(buf, work);
        } else {
            plan.forward(buf, work);
        }
    };

    // Contiguous last axis.
    for row in data.chunks_exact_mut(n) {
        apply(row, work);
    }
    // Strided axes.
    let mut stride = n;
    for _ in 1..dim {
        let outer = total / (stride * n);
        for o in 0..outer {
            let base = o * stride * n;
            for inner in 0..stride {
                let start = base + inner;
                for (t, slot) in line.iter_mut().enumerate() {
                    *slot = data[start + t * stride];
                }
                apply(line, work);
                for (t, &v) in line.iter().enumerate() {
                    data[start + t * stride] = v;
                }
            }
        }
        stride *= n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(x: &[Complex64], sign: f64) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .fold(Complex64::new(0.0, 0.0), |acc, (j, &v)| {
                        let ang = sign * 2.0 * PI * ((j * k) % n) as f64 / n as f64;
                        acc + v * Complex64::new(libm::cos(ang), libm::sin(ang))
                    })
            })
            .collect()
    }

    fn signal(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|j| {
                let t = j as f64;
                Complex64::new(libm::sin(0.37 * t * t + 1.0), libm::cos(1.3 * t) - 0.2)
            })
            .collect()
    }

    #[test]
    fn factorization_covers_length() {
        for n in 1..200 {
            assert_eq!(factorize(n).iter().product::<usize>(), n);
        }
        assert_eq!(factorize(256), vec![4, 4, 4, 4]);
        assert_eq!(factorize(24), vec![4, 2, 3]);
    }

    #[test]
    fn matches_direct_dft() {
        for n in [
            1, 2, 3, 4, 5, 6, 7, 8, 9, 12, 14, 16, 20, 25, 30, 32, 49, 64, 97, 128,
        ] {
            let plan = FftPlan::new(n);
            let x = signal(n);
            let mut buf = x.clone();
            let mut scratch = vec![Complex64::new(0.0, 0.0); n];
            plan.forward(&mut buf, &mut scratch);
            let expect = naive(&x, -1.0);
            let scale = x.iter().map(|z| z.norm()).sum::<f64>();
            for (a, b) in buf.iter().zip(&expect) {
                assert!((a - b).norm() <= 1e-13 * scale, "n={n}");
            }
            plan.inverse(&mut buf, &mut scratch);
            for (a, b) in buf.iter().zip(&x) {
                assert!((a / n as f64 - b).norm() <= 1e-14 * scale, "n={n}");
            }
        }
    }

    #[test]
    fn nd_transform_is_separable() {
        let n = 6;
        let plan = FftPlan::new(n);
        let x = signal(n * n);
        let mut buf = x.clone();
        let mut scratch = Vec::new();
        transform_nd(&plan, 2, &mut buf, false, &mut scratch);
        for k0 in 0..n {
            for k1 in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for j0 in 0..n {
                    for j1 in 0..n {
                        let ang = -2.0 * PI * ((j0 * k0 + j1 * k1) % n) as f64 / n as f64;
                        acc += x[j0 * n + j1] * Complex64::new(libm::cos(ang), libm::sin(ang));
                    }
                }
                assert!((acc - buf[k0 * n + k1]).norm() < 1e-12);
            }
        }
    }
}
