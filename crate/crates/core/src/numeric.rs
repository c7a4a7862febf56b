//! Small numeric helpers shared across modules.

#[allow(unused_imports)] // shadowed by std when another crate links it
use num_traits::Float;

/// Bisection for a sign change of `g` on `[a, b]`.
///
/// `g(a)` and `g(b)` must have opposite signs (or one is zero). Iterates
/// until the bracket is below `rel_tol * max(|a|,|b|)` or stops moving.
pub fn bisect<G: Fn(f64) -> f64>(g: G, mut a: f64, mut b: f64, rel_tol: f64) -> f64 {
    let mut ga = g(a);
    if ga == 0.0 {
        return a;
    }
    let gb = g(b);
    if gb == 0.0 {
        return b;
    }
    for _ in 0..400 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b || (b - a) <= rel_tol * a.abs().max(b.abs()) {
            break;
        }
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if (gm > 0.0) == (ga > 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Golden-section search for a maximum of a unimodal `g` on `[a, b]`.
/// Returns `(argmax, max)`.
pub fn golden_max<G: Fn(f64) -> f64>(g: G, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let invphi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let mut gc = g(c);
    let mut gd = g(d);
    for _ in 0..500 {
        if (b - a).abs() <= tol * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - invphi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + invphi * (b - a);
            gd = g(d);
        }
    }
    if gc >= gd {
        (c, gc)
    } else {
        (d, gd)
    }
}

/// Maximise `g` over `[lo, hi]` (with `lo > 0`) by scanning a log-spaced grid
/// of `n` points and refining the best cell with golden-section search.
pub fn grid_golden_max<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64, n: usize, tol: f64) -> (f64, f64) {
    let n = n.max(3);
    let (llo, lhi) = (lo.ln(), hi.ln());
    let at = |k: usize| (llo + (lhi - llo) * k as f64 / (n - 1) as f64).exp();
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for k in 0..n {
        let v = g(at(k));
        if v > best_v {
            best_v = v;
            best = k;
        }
    }
    let a = at(best.saturating_sub(1));
    let b = at((best + 1).min(n - 1));
    let (x, v) = golden_max(&g, a, b, tol);
    if v >= best_v {
        (x, v)
    } else {
        (at(best), best_v)
    }
}

/// Smallest `k` with `m^k >= n`, i.e. `ceil(log_m n)` for `n >= 1`, `m > 1`.
pub fn ceil_log(m: f64, n: u64) -> u32 {
    let target = n as f64;
    let mut k = 0u32;
    let mut p = 1.0f64;
    while p < target {
        p *= m;
        k += 1;
    }
    k
}

/// Neumaier-compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// A real number stored as `sign * exp(log_abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    pub sign: i8,
    pub log_abs: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog { sign: 0, log_abs: f64::NEG_INFINITY };

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            SignedLog { sign: if x > 0.0 { 1 } else { -1 }, log_abs: x.abs().ln() }
        }
    }

    pub fn to_f64(self) -> f64 {
        self.sign as f64 * self.log_abs.exp()
    }
}

/// Log-sum-exp over a sequence of signed terms, accumulated with a fixed
/// reference point so that the result does not depend on chunking.
pub fn signed_log_sum<I: IntoIterator<Item = SignedLog> + Clone>(terms: I) -> SignedLog {
    let m = terms
        .clone()
        .into_iter()
        .filter(|t| t.sign != 0)
        .map(|t| t.log_abs)
        .fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return SignedLog::ZERO;
    }
    let mut pos = KahanSum::default();
    let mut neg = KahanSum::default();
    for t in terms {
        match t.sign {
            1 => pos.add((t.log_abs - m).exp()),
            -1 => neg.add((t.log_abs - m).exp()),
            _ => {}
        }
    }
    let s = pos.value() - neg.value();
    let mut out = SignedLog::from_f64(s);
    out.log_abs += m;
    out
}

/// `ln(exp(a) + exp(b))` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Ordinary least squares of `ys` on `xs`: `(slope, intercept, r_squared)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let icept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - icept - slope * x;
            r * r
        })
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 };
    (slope, icept, r2)
}
