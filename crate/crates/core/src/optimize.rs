//! One-dimensional search helpers shared by the detuning optimizer and the
//! scalar fitting routines.

const INV_GOLDEN: f64 = 0.381_966_011_250_105_1; // 2 - phi

/// Golden-section minimisation of `f` on `[a, b]`.
///
/// Shrinks the bracket until its width falls below `rel_tol` relative to the
/// midpoint magnitude (with a tiny absolute floor). Returns `(x_min, f_min)`.
pub fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, rel_tol: f64) -> (f64, f64) {
    let mut x1 = a + INV_GOLDEN * (b - a);
    let mut x2 = b - INV_GOLDEN * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);

    for _ in 0..400 {
        let scale = 0.5 * (a.abs() + b.abs()) + 1e-300;
        if (b - a).abs() <= rel_tol * scale {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + INV_GOLDEN * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - INV_GOLDEN * (b - a);
            f2 = f(x2);
        }
    }

    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Golden-section maximisation on `[a, b]`; returns `(x_max, f_max)`.
pub fn golden_max(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> (f64, f64) {
    let (x, fneg) = golden_min(|x| -f(x), a, b, rel_tol);
    (x, -fneg)
}

/// Successive parabolic refinement of a bracketed minimum.
///
/// `(a, b, c)` must satisfy a < b < c with f(b) below both ends. Falls back to
/// golden steps whenever the parabola degenerates or leaves the bracket.
pub fn parabolic_min(
    f: impl Fn(f64) -> f64,
    mut a: f64,
    mut b: f64,
    mut c: f64,
    rel_tol: f64,
) -> (f64, f64) {
    let mut fa = f(a);
    let mut fb = f(b);
    let mut fc = f(c);

    for _ in 0..200 {
        let scale = 0.5 * (a.abs() + c.abs()) + 1e-300;
        if (c - a).abs() <= rel_tol * scale {
            break;
        }
        let p = (b - a) * (b - a) * (fb - fc) - (b - c) * (b - c) * (fb - fa);
        let q = (b - a) * (fb - fc) - (b - c) * (fb - fa);
        let mut x = if q.abs() > 0.0 { b - 0.5 * p / q } else { f64::NAN };
        let min_step = 1e-14 * scale;
        if !x.is_finite() || x <= a + min_step || x >= c - min_step || (x - b).abs() < min_step {
            // golden step into the larger sub-interval
            x = if (c - b) > (b - a) {
                b + INV_GOLDEN * (c - b)
            } else {
                b - INV_GOLDEN * (b - a)
            };
        }
        let fx = f(x);
        if x > b {
            if fx < fb {
                a = b;
                fa = fb;
                b = x;
                fb = fx;
            } else {
                c = x;
                fc = fx;
            }
        } else if fx < fb {
            c = b;
            fc = fb;
            b = x;
            fb = fx;
        } else {
            a = x;
            fa = fx;
        }
    }
    (b, fb)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_minimum() {
        // Position resolution of any comparison-based search is limited to
        // ~sqrt(eps) around a quadratic minimum; the value does much better.
        let f = |x: f64| (x - 1.25).powi(2) + 0.5;
        let (x, fx) = golden_min(f, -4.0, 9.0, 1e-13);
        assert!((x - 1.25).abs() < 1e-6);
        assert!((fx - 0.5).abs() < 1e-13);
    }

    #[test]
    fn golden_max_on_negated_parabola() {
        let (x, fx) = golden_max(|x| 3.0 - (x + 2.0).powi(2), -10.0, 10.0, 1e-13);
        assert!((x + 2.0).abs() < 1e-6);
        assert!((fx - 3.0).abs() < 1e-13);
    }

    #[test]
    fn parabolic_hits_analytic_minimum() {
        let f = |x: f64| x.powi(4) - 2.0 * x * x + 0.3 * x;
        // brute-force reference
        let mut best = (0.0, f64::INFINITY);
        for i in 0..2_000_000 {
            let x = -2.0 + 4.0 * i as f64 / 2e6;
            let v = f(x);
            if v < best.1 {
                best = (x, v);
            }
        }
        let (x, fx) = parabolic_min(f, -2.0, best.0, 0.0, 1e-12);
        assert!((x - best.0).abs() < 1e-5);
        assert!(fx <= best.1 + 1e-12);
    }
}
