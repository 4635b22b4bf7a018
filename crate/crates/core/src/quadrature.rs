//! Globally adaptive Gauss–Kronrod (7/15) quadrature for complex integrands.
//!
//! The caller supplies the initial panel boundaries; for oscillatory
//! integrands these are chosen so that each panel covers a fraction of a
//! period, after which bisection of the worst panel proceeds until the summed
//! error estimate meets the absolute tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex;

use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Outcome of an adaptive integration, successful or not.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Quadrature<T> {
    pub value: Complex<T>,
    pub err: T,
    pub converged: bool,
}

struct Panel<T> {
    a: T,
    b: T,
    value: Complex<T>,
    err: T,
}

impl<T: Real> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<T: Real> Eq for Panel<T> {}
impl<T: Real> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(Ordering::Equal)
    }
}

/// Single 15-point Kronrod rule on `[a, b]` with its embedded 7-point Gauss
/// estimate. Returns the Kronrod value and an error estimate.
fn gk15<T, F>(f: &F, a: T, b: T) -> (Complex<T>, T)
where
    T: Real,
    F: Fn(T) -> Complex<T>,
{
    let half = (b - a) / T::lit(2.0);
    let centre = (a + b) / T::lit(2.0);
    let fc = f(centre);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    let mut abs_sum = fc.norm() * T::lit(WGK[7]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        let s = f1 + f2;
        kronrod = kronrod + s * T::lit(WGK[j]);
        abs_sum = abs_sum + (f1.norm() + f2.norm()) * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + s * T::lit(WG[j / 2]);
        }
    }
    let h = half.abs();
    let raw = (kronrod - gauss).norm() * h;
    let floor = T::lit(50.0) * T::epsilon() * abs_sum * h;
    (kronrod * half, raw.max(floor))
}

/// Integrates `f` over `[breaks[0], breaks[n-1]]`, starting from the given
/// panel boundaries and bisecting until the total error is at most `tol`.
pub(crate) fn integrate<T, F>(f: F, breaks: &[T], tol: T, max_subdivisions: usize) -> Quadrature<T>
where
    T: Real,
    F: Fn(T) -> Complex<T>,
{
    let zero = Complex::new(T::zero(), T::zero());
    if breaks.len() < 2 {
        return Quadrature {
            value: zero,
            err: T::zero(),
            converged: true,
        };
    }
    let mut heap = BinaryHeap::with_capacity(breaks.len() * 2);
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (value, err) = gk15(&f, w[0], w[1]);
            heap.push(Panel {
                a: w[0],
                b: w[1],
                value,
                err,
            });
        }
    }
    let total_err = |h: &BinaryHeap<Panel<T>>| h.iter().fold(T::zero(), |s, p| s + p.err);
    let mut err = total_err(&heap);
    let mut splits = 0;
    while err > tol && splits < max_subdivisions {
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = (worst.a + worst.b) / T::lit(2.0);
        if !(mid > worst.a && mid < worst.b) {
            // panel at floating point resolution
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        err = err - worst.err + e1 + e2;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
        });
        splits += 1;
        if err <= tol {
            err = total_err(&heap);
        }
    }
    // sum panels in position order for a reproducible rounding pattern
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.partial_cmp(&q.a).unwrap_or(Ordering::Equal));
    let value = panels.iter().fold(zero, |s, p| s + p.value);
    let err = panels.iter().fold(T::zero(), |s, p| s + p.err);
    Quadrature {
        value,
        err,
        converged: err <= tol,
    }
}

/// Real-valued convenience wrapper.
pub(crate) fn integrate_real<T, F>(
    f: F,
    breaks: &[T],
    tol: T,
    max_subdivisions: usize,
) -> Quadrature<T>
where
    T: Real,
    F: Fn(T) -> T,
{
    integrate(
        |t| Complex::new(f(t), T::zero()),
        breaks,
        tol,
        max_subdivisions,
    )
}

/// `n` equal panels on `[a, b]`.
pub(crate) fn uniform_breaks<T: Real>(a: T, b: T, n: usize) -> Vec<T> {
    let n = n.max(1);
    let h = (b - a) / T::from_count(n);
    let mut v: Vec<T> = (0..n).map(|i| a + h * T::from_count(i)).collect();
    v.push(b);
    v
}
