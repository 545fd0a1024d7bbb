//! Adaptive Gauss–Kronrod (7/15) integration.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-10, rel: 1e-12, max_intervals: 400 }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut values = [0.0; 15];
    values[7] = fc;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (lo, hi) = (f(center - dx), f(center + dx));
        values[j] = lo;
        values[14 - j] = hi;
        kronrod += WGK[j] * (lo + hi);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (lo + hi);
        }
    }
    // QUADPACK's error scaling: |K − G| relative to the integrand's spread
    let mean = 0.5 * kronrod;
    let mut spread = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        spread += WGK[j] * ((values[j] - mean).abs() + (values[14 - j] - mean).abs());
    }
    spread *= half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if spread != 0.0 && error != 0.0 {
        error = spread * (200.0 * error / spread).powf(1.5).min(1.0);
    }
    Segment { a, b, value: kronrod * half, error }
}

/// Integrates `f` over `[a, b]` after first splitting at each interior point
/// in `breaks`. Converges when the summed error estimate drops below
/// `max(tol.abs, tol.rel·|I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: Tolerance) -> Result<f64> {
    let mut points: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
    points.push(a);
    points.extend(breaks.iter().copied().filter(|&p| p > a && p < b));
    points.push(b);
    points.sort_by(f64::total_cmp);

    let mut segments: Vec<Segment> = points.windows(2).map(|w| kronrod(&f, w[0], w[1])).collect();
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::Quadrature { estimate: error });
        }
        if error <= tol.abs.max(tol.rel * value.abs()) {
            return Ok(value);
        }
        if segments.len() >= tol.max_intervals {
            return Err(Error::Quadrature { estimate: error });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("non-empty");
        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            return Err(Error::Quadrature { estimate: error });
        }
        segments.push(kronrod(&f, s.a, mid));
        segments.push(kronrod(&f, mid, s.b));
    }
}
