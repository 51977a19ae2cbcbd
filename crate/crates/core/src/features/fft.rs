//! Iterative radix-2 FFT, sized once and reused across frames.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

pub struct Fft {
    size: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
    bitrev: Vec<usize>,
}

impl Fft {
    /// `size` must be a power of two.
    pub fn new(size: usize) -> Self {
        assert!(size.is_power_of_two(), "fft size must be a power of two");
        let half = size / 2;
        let step = -2.0 * core::f64::consts::PI / size as f64;
        let cos = (0..half).map(|k| math::cos(step * k as f64)).collect();
        let sin = (0..half).map(|k| math::sin(step * k as f64)).collect();
        let bits = size.trailing_zeros();
        let bitrev = (0..size)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        Self { size, cos, sin, bitrev }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// In-place forward transform.
    pub fn forward(&self, re: &mut [f64], im: &mut [f64]) {
        let n = self.size;
        debug_assert!(re.len() == n && im.len() == n);
        for i in 0..n {
            let j = self.bitrev[i];
            if j > i {
                re.swap(i, j);
                im.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let wr = self.cos[k * stride];
                    let wi = self.sin[k * stride];
                    let a = start + k;
                    let b = a + half;
                    let tr = re[b] * wr - im[b] * wi;
                    let ti = re[b] * wi + im[b] * wr;
                    re[b] = re[a] - tr;
                    im[b] = im[a] - ti;
                    re[a] += tr;
                    im[a] += ti;
                }
            }
            len *= 2;
        }
    }

    /// In-place inverse transform, scaled by `1/size`.
    pub fn inverse(&self, re: &mut [f64], im: &mut [f64]) {
        im.iter_mut().for_each(|x| *x = -*x);
        self.forward(re, im);
        let scale = 1.0 / self.size as f64;
        for (r, i) in re.iter_mut().zip(im.iter_mut()) {
            *r *= scale;
            *i = -*i * scale;
        }
    }

    /// Magnitudes of bins `0..=size/2` of a real input (zero-padded to size).
    pub fn magnitude(&self, input: &[f64], out: &mut Vec<f64>) {
        let mut re = vec![0.0; self.size];
        let mut im = vec![0.0; self.size];
        re[..input.len()].copy_from_slice(input);
        self.forward(&mut re, &mut im);
        out.clear();
        out.extend((0..=self.size / 2).map(|k| math::sqrt(re[k] * re[k] + im[k] * im[k])));
    }
}
