//! Pair kernels for particle dynamics: exact Ewald evaluation, a tabulated
//! form for long runs, and the mollifier-perturbed kernel.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::mollifier::Mollifier;
use crate::riesz::{Ewald, RieszSpec, SingularPart, TailMethod};
use crate::torus::reduce;

/// Even interaction kernel `W` on `T^d` with odd gradient.
pub trait PairKernel {
    fn dim(&self) -> usize;
    /// Whether `W` is infinite at the origin.
    fn singular_at_origin(&self) -> bool;
    /// `W(x)` for a displacement `x` (any representative).
    fn value(&self, x: &[f64]) -> Result<f64>;
    /// `∇W(x)`, written into `out`.
    fn grad(&self, x: &[f64], out: &mut [f64]) -> Result<()>;
}

/// Direct Ewald evaluation of `W_s`.
#[derive(Debug, Clone)]
pub struct EwaldKernel {
    ewald: Ewald,
}

impl EwaldKernel {
    pub fn new(spec: RieszSpec) -> Result<Self> {
        Ok(Self { ewald: Ewald::with_method(spec, TailMethod::SpecialFunctions)? })
    }
}

impl PairKernel for EwaldKernel {
    fn dim(&self) -> usize {
        self.ewald.spec().d
    }

    fn singular_at_origin(&self) -> bool {
        self.ewald.spec().s >= 0.0
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        self.ewald.eval(x)
    }

    fn grad(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        if x.iter().all(|&v| reduce(v) == 0.0) && !self.singular_at_origin() {
            // symmetric subgradient at the origin
            out.iter_mut().for_each(|o| *o = 0.0);
            return Ok(());
        }
        out.copy_from_slice(&self.ewald.grad(x)?);
        Ok(())
    }
}

const CUT_INNER: f64 = 0.1;
const CUT_OUTER: f64 = 0.4;

fn blend(t: f64) -> f64 {
    if t > 0.0 {
        libm::exp(-1.0 / t)
    } else {
        0.0
    }
}

fn blend_deriv(t: f64) -> f64 {
    if t > 0.0 {
        libm::exp(-1.0 / t) / (t * t)
    } else {
        0.0
    }
}

/// Smooth cutoff: one on `[0, 0.1]`, zero beyond `0.4`. Returns `(χ, χ')`.
fn cutoff(r: f64) -> (f64, f64) {
    if r <= CUT_INNER {
        return (1.0, 0.0);
    }
    let w = CUT_OUTER - CUT_INNER;
    let t = (CUT_OUTER - r) / w;
    let (a, b) = (blend(t), blend(1.0 - t));
    if a + b == 0.0 {
        return (0.0, 0.0);
    }
    let (da, db) = (blend_deriv(t), -blend_deriv(1.0 - t));
    let chi = a / (a + b);
    let dchi_dt = (da * (a + b) - a * (da + db)) / ((a + b) * (a + b));
    (chi, -dchi_dt / w)
}

/// `W_s = χ·S + R` with `S` the singular part at the origin, `χ` a smooth
/// cutoff, and the smooth periodic remainder `R` tabulated with its gradient
/// on an `M^d` mesh and interpolated by tensor four-point Lagrange.
#[derive(Debug, Clone)]
pub struct TabulatedKernel {
    d: usize,
    s: f64,
    m: usize,
    sing: SingularPart,
    /// `(1 + d)` values per node: `R`, then `∇R`.
    table: Vec<f64>,
}

fn lagrange_weights(t: f64) -> [f64; 4] {
    // nodes -1, 0, 1, 2
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

impl TabulatedKernel {
    /// Tabulates with `m` nodes per axis (`m >= 16`).
    pub fn new(spec: RieszSpec, m: usize) -> Result<Self> {
        spec.validate()?;
        if m < 16 {
            return Err(invalid("table needs at least 16 nodes per axis"));
        }
        let d = spec.d;
        let ewald = Ewald::with_method(spec, TailMethod::SpecialFunctions)?;
        let sp = SingularPart::new(d, spec.s);
        let count = m.pow(d as u32);
        let mut table = vec![0.0; count * (1 + d)];
        let mut x = vec![0.0; d];
        for idx in 0..count {
            let mut rem = idx;
            for a in (0..d).rev() {
                x[a] = reduce((rem % m) as f64 / m as f64);
                rem /= m;
            }
            let slot = &mut table[idx * (1 + d)..(idx + 1) * (1 + d)];
            let r = libm::sqrt(x.iter().map(|v| v * v).sum());
            if r == 0.0 {
                // remainder at the origin: limit along a short ray, odd gradient vanishes
                let h = 1e-7;
                let mut y = vec![0.0; d];
                y[0] = h;
                slot[0] = ewald.eval(&y).map_err(|_| Error::SingularPoint)? - sp.value(h);
                continue;
            }
            let (chi, dchi) = cutoff(r);
            let sing = if chi > 0.0 { sp.value(r) } else { 0.0 };
            let dsing = if chi > 0.0 { sp.derivative(r) } else { 0.0 };
            slot[0] = ewald.eval(&x)? - chi * sing;
            let g = ewald.grad(&x)?;
            let radial = dchi * sing + chi * dsing;
            for a in 0..d {
                slot[1 + a] = g[a] - radial * x[a] / r;
            }
        }
        Ok(Self { d, s: spec.s, m, sing: sp, table })
    }

    /// Reduces `x` into `y` and returns `|y|`.
    fn reduce_into(&self, x: &[f64], y: &mut [f64; 3]) -> f64 {
        let mut r2 = 0.0;
        for a in 0..self.d {
            y[a] = reduce(x[a]);
            r2 += y[a] * y[a];
        }
        libm::sqrt(r2)
    }

    /// Interpolates the remainder and its gradient at a reduced point.
    fn interpolate(&self, x: &[f64], out: &mut [f64]) {
        let (d, m) = (self.d, self.m);
        let stride = 1 + d;
        // per axis: flat offsets of the four nodes and their weights
        let mut nodes = [[0usize; 4]; 3];
        let mut w = [[0.0; 4]; 3];
        let mut axis_stride = 1;
        for a in (0..d).rev() {
            let u = (x[a] + 1.0) * m as f64;
            let i = libm::floor(u);
            w[a] = lagrange_weights(u - i);
            let base = i as usize + m - 1;
            for o in 0..4 {
                nodes[a][o] = ((base + o) % m) * axis_stride * stride;
            }
            axis_stride *= m;
        }
        out.iter_mut().for_each(|o| *o = 0.0);
        let t = &self.table;
        match d {
            1 => {
                for o in 0..4 {
                    let slot = &t[nodes[0][o]..nodes[0][o] + stride];
                    for (v, tv) in out.iter_mut().zip(slot) {
                        *v += w[0][o] * tv;
                    }
                }
            }
            2 => {
                for o0 in 0..4 {
                    let mut acc = [0.0; 3];
                    for o1 in 0..4 {
                        let off = nodes[0][o0] + nodes[1][o1];
                        let wt = w[1][o1];
                        acc[0] += wt * t[off];
                        acc[1] += wt * t[off + 1];
                        acc[2] += wt * t[off + 2];
                    }
                    for (v, av) in out.iter_mut().zip(&acc) {
                        *v += w[0][o0] * av;
                    }
                }
            }
            _ => {
                for c in 0..4usize.pow(d as u32) {
                    let (mut off, mut wt, mut rem) = (0, 1.0, c);
                    for a in 0..d {
                        off += nodes[a][rem % 4];
                        wt *= w[a][rem % 4];
                        rem /= 4;
                    }
                    for (v, tv) in out.iter_mut().zip(&t[off..off + stride]) {
                        *v += wt * tv;
                    }
                }
            }
        }
    }
}

impl PairKernel for TabulatedKernel {
    fn dim(&self) -> usize {
        self.d
    }

    fn singular_at_origin(&self) -> bool {
        self.s >= 0.0
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        let mut y = [0.0; 3];
        let r = self.reduce_into(x, &mut y);
        if r == 0.0 && self.singular_at_origin() {
            return Err(Error::SingularPoint);
        }
        let mut buf = [0.0; 4];
        self.interpolate(&y[..self.d], &mut buf[..1 + self.d]);
        if r >= CUT_OUTER {
            return Ok(buf[0]);
        }
        Ok(buf[0] + cutoff(r).0 * self.sing.value(r))
    }

    fn grad(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let mut y = [0.0; 3];
        let r = self.reduce_into(x, &mut y);
        if r == 0.0 {
            if self.singular_at_origin() {
                return Err(Error::SingularPoint);
            }
            out.iter_mut().for_each(|o| *o = 0.0);
            return Ok(());
        }
        let mut buf = [0.0; 4];
        self.interpolate(&y[..self.d], &mut buf[..1 + self.d]);
        let radial = if r < CUT_OUTER {
            let (chi, dchi) = cutoff(r);
            dchi * self.sing.value(r) + chi * self.sing.derivative(r)
        } else {
            0.0
        };
        for a in 0..self.d {
            out[a] = buf[1 + a] + radial * y[a] / r;
        }
        Ok(())
    }
}

/// `W̃(x) = W(x) - c0 ε^{-s} ψ(x/ε)` for a base kernel `W` of order `s`.
#[derive(Debug, Clone)]
pub struct PerturbedKernel<K> {
    base: K,
    eps: f64,
    /// `c0 ε^{-s}`.
    scale: f64,
    mollifier: Mollifier,
}

impl<K: PairKernel> PerturbedKernel<K> {
    pub fn new(base: K, s: f64, eps: f64, c0: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 0.5) {
            return Err(invalid("epsilon must lie in (0, 1/2)"));
        }
        if !(c0 > 0.0) {
            return Err(invalid("c0 must be positive"));
        }
        let mollifier = Mollifier::new(base.dim())?;
        Ok(Self { base, eps, scale: c0 * libm::pow(eps, -s), mollifier })
    }

    pub fn base(&self) -> &K {
        &self.base
    }

}

impl<K: PairKernel> PairKernel for PerturbedKernel<K> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn singular_at_origin(&self) -> bool {
        self.base.singular_at_origin()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        let mut y = [0.0; 3];
        let d = x.len();
        for a in 0..d {
            y[a] = reduce(x[a]) / self.eps;
        }
        Ok(self.base.value(x)? - self.scale * self.mollifier.value(&y[..d]))
    }

    fn grad(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.base.grad(x, out)?;
        let mut y = [0.0; 3];
        let d = x.len();
        let mut r2 = 0.0;
        for a in 0..d {
            y[a] = reduce(x[a]) / self.eps;
            r2 += y[a] * y[a];
        }
        if r2 >= 1.0 {
            return Ok(());
        }
        let mut g = [0.0; 3];
        self.mollifier.grad(&y[..d], &mut g[..d]);
        let f = self.scale / self.eps;
        for (o, gi) in out.iter_mut().zip(&g) {
            *o -= f * gi;
        }
        Ok(())
    }
}
