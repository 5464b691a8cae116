//! Scalar root finding on an interval: uniform-grid sign-change bracketing,
//! bisection, and a local-minimum pass for roots the sign scan cannot see
//! (tangential roots and close pairs inside a single cell).

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Multiplicity {
    Simple,
    /// Even multiplicity: `f` touches zero without changing sign.
    Double,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub multiplicity: Multiplicity,
}

#[derive(Debug, Clone, Copy)]
pub struct BracketOptions {
    pub intervals: usize,
    pub xtol: f64,
    /// `|f|` below this at a local minimum counts as a tangential root.
    pub tangent_tol: f64,
}

impl Default for BracketOptions {
    fn default() -> Self {
        BracketOptions {
            intervals: 10_000,
            xtol: 1e-13,
            tangent_tol: 1e-10,
        }
    }
}

/// Bisection on `[a, b]` where `f(a)` and `f(b)` have opposite signs.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, xtol: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        if (b - a).abs() < xtol {
            break;
        }
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Minimise `f` on `[a, b]` by golden-section search.
fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, xtol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() < xtol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// All roots of `f` in `[a, b]`, sorted ascending.
///
/// Roots closer together than about two grid cells may be reported as one
/// tangential root or missed when `|f|` between them exceeds `tangent_tol`.
pub fn find_roots<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &BracketOptions) -> Vec<Root> {
    let n = opts.intervals.max(2);
    let xs: Vec<f64> = (0..=n)
        .map(|i| if i == n { b } else { a + (b - a) * (i as f64 / n as f64) })
        .collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();

    for i in 0..=n {
        if fs[i] == 0.0 {
            let left = if i > 0 { fs[i - 1] } else { 0.0 };
            let right = if i < n { fs[i + 1] } else { 0.0 };
            let multiplicity = if left * right > 0.0 {
                Multiplicity::Double
            } else {
                Multiplicity::Simple
            };
            roots.push(Root { x: xs[i], multiplicity });
        }
    }

    for i in 0..n {
        if fs[i] * fs[i + 1] < 0.0 {
            roots.push(Root {
                x: bisect(&f, xs[i], xs[i + 1], opts.xtol),
                multiplicity: Multiplicity::Simple,
            });
        }
    }

    for i in 1..n {
        let (l, m, r) = (fs[i - 1], fs[i], fs[i + 1]);
        let same_sign = (l > 0.0 && m > 0.0 && r > 0.0) || (l < 0.0 && m < 0.0 && r < 0.0);
        if !same_sign || m.abs() > l.abs() || m.abs() > r.abs() {
            continue;
        }
        let s = m.signum();
        let xm = golden_min(|x| s * f(x), xs[i - 1], xs[i + 1], opts.xtol);
        let fm = f(xm);
        if s * fm < 0.0 {
            // Two sign changes hidden inside the neighbourhood.
            for (lo, hi) in [(xs[i - 1], xm), (xm, xs[i + 1])] {
                roots.push(Root {
                    x: bisect(&f, lo, hi, opts.xtol),
                    multiplicity: Multiplicity::Simple,
                });
            }
        } else if fm.abs() < opts.tangent_tol {
            roots.push(Root {
                x: xm,
                multiplicity: Multiplicity::Double,
            });
        }
    }

    roots.sort_by(|p, q| p.x.total_cmp(&q.x));
    let merge = 10.0 * opts.xtol;
    roots.dedup_by(|next, prev| {
        if (next.x - prev.x).abs() <= merge {
            if next.multiplicity == Multiplicity::Double {
                prev.multiplicity = Multiplicity::Double;
            }
            true
        } else {
            false
        }
    });
    roots
}
