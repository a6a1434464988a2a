//! Integer-order Bessel functions of the first kind.
//!
//! Computed by backward recurrence with normalization (Miller's algorithm):
//! the three-term recurrence is stable downward, and the surviving scale
//! factor is fixed by the identity J_0(x) + 2 Σ_{k≥1} J_2k(x) = 1. Accuracy is
//! better than 1e-13 absolute for |x| ≤ 30, which covers every modulation
//! index this crate deals with.

/// All orders J_0(x) ..= J_{n_max}(x) in one downward sweep.
pub fn bessel_j_upto(n_max: usize, x: f64) -> Vec<f64> {
    let ax = x.abs();
    let mut out = vec![0.0; n_max + 1];
    if ax == 0.0 {
        out[0] = 1.0;
        return out;
    }

    // Start the recurrence well above both the requested order and the
    // turning point n ~ x past which J_n decays super-exponentially.
    let t = (n_max as f64).max(ax);
    let mut start = (t + 1.5 * t.sqrt() + 40.0).ceil() as usize;
    start += start & 1; // even

    let mut above = 0.0_f64; // scaled J_{k+1}
    let mut here = 1e-300_f64; // scaled J_k, k = start
    let mut sum = 2.0 * here; // start is even
    if start <= n_max {
        out[start] = here;
    }

    for k in (1..=start).rev() {
        let below = (2.0 * k as f64 / ax) * here - above;
        above = here;
        here = below;
        let order = k - 1;
        if order <= n_max {
            out[order] = here;
        }
        if order > 0 && order % 2 == 0 {
            sum += 2.0 * here;
        }
        if here.abs() > 1e250 {
            here *= 1e-250;
            above *= 1e-250;
            sum *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    sum += here; // J_0 enters the normalization once

    let inv = 1.0 / sum;
    for v in out.iter_mut() {
        *v *= inv;
    }
    if x < 0.0 {
        // J_n(-x) = (-1)^n J_n(x)
        for v in out.iter_mut().skip(1).step_by(2) {
            *v = -*v;
        }
    }
    out
}

/// Single value J_n(x), any integer order.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    let na = n.unsigned_abs() as usize;
    let j = bessel_j_upto(na, x)[na];
    if n < 0 && n % 2 != 0 {
        -j
    } else {
        j
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values computed with 40-digit arbitrary-precision arithmetic.
    const TABLE: &[(usize, f64, f64)] = &[
        (0, 0.5, 0.9384698072408129),
        (1, 0.5, 0.24226845767487389),
        (2, 0.5, 0.030604023458682641),
        (3, 0.5, 0.0025637299945872441),
        (5, 0.5, 8.0536272413574741e-6),
        (8, 0.5, 3.75822315479761e-10),
        (12, 0.5, 1.2383825594799327e-16),
        (0, 0.94, 0.79100387745185924),
        (1, 0.94, 0.41996491197118771),
        (2, 0.94, 0.10253848844428483),
        (3, 0.94, 0.016369081408747731),
        (5, 0.94, 0.00018419441613815374),
        (8, 0.94, 5.7622182365543014e-8),
        (1, 1.47, 0.55355932203951275),
        (2, 1.47, 0.22464092104788278),
        (3, 1.47, 0.057708490335678489),
        (5, 1.47, 0.0016326659369236624),
        (8, 1.47, 1.9889819872136161e-6),
        (12, 1.47, 4.977792389680929e-11),
        (0, 1.75, 0.36903253018515076),
        (1, 1.75, 0.5801561976389925),
        (2, 1.75, 0.29400312425941209),
        (3, 1.75, 0.091850943525377995),
        (5, 1.75, 0.0037577257273157127),
        (8, 1.75, 7.8241996244686531e-6),
        (0, 2.0, 0.22389077914123567),
        (1, 2.0, 0.57672480775687339),
        (2, 2.0, 0.35283402861563772),
        (3, 2.0, 0.12894324947440205),
        (5, 2.0, 0.0070396297558716855),
        (8, 2.0, 2.2179552287925904e-5),
        (12, 2.0, 1.9326951487239855e-9),
        (0, 5.0, -0.1775967713143383),
        (1, 5.0, -0.32757913759146522),
        (2, 5.0, 0.046565116277752216),
        (3, 5.0, 0.36483123061366699),
        (5, 5.0, 0.26114054612017009),
        (8, 5.0, 0.018405216654802001),
        (12, 5.0, 7.6278131660845514e-5),
        (20, 5.0, 2.7703300521289417e-11),
        (0, 10.0, -0.24593576445134834),
        (1, 10.0, 0.043472746168861437),
        (2, 10.0, 0.25463031368512062),
        (3, 10.0, 0.058379379305186812),
        (5, 10.0, -0.23406152818679364),
        (8, 10.0, 0.31785412684385723),
        (12, 10.0, 0.063370254970156015),
        (20, 10.0, 1.1513369247813398e-5),
        (0, 20.0, 0.16702466434058315),
        (1, 20.0, 0.066833124175850046),
        (2, 20.0, -0.16034135192299815),
        (3, 20.0, -0.098901394560449676),
        (5, 20.0, 0.15116976798239497),
        (8, 20.0, -0.073868928840750341),
        (12, 20.0, -0.11899062431039907),
        (20, 20.0, 0.16474777377532653),
        (30, 20.0, 0.00012401536360354328),
    ];

    #[test]
    fn matches_reference_table() {
        for &(n, x, expected) in TABLE {
            let got = bessel_j(n as i32, x);
            assert!(
                (got - expected).abs() < 1e-13,
                "J_{n}({x}) = {got}, expected {expected}"
            );
        }
    }

    #[test]
    fn zero_argument() {
        let j = bessel_j_upto(5, 0.0);
        assert_eq!(j[0], 1.0);
        assert!(j[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn negative_order_and_argument() {
        let x = 1.47;
        assert_eq!(bessel_j(-1, x), -bessel_j(1, x));
        assert_eq!(bessel_j(-2, x), bessel_j(2, x));
        assert_eq!(bessel_j(1, -x), -bessel_j(1, x));
        assert_eq!(bessel_j(2, -x), bessel_j(2, x));
    }

    #[test]
    fn squared_sum_is_unity() {
        for &x in &[0.1, 0.94, 1.47, 1.75, 5.0, 12.5, 20.0] {
            let j = bessel_j_upto(80, x);
            let total = j[0] * j[0] + 2.0 * j[1..].iter().map(|v| v * v).sum::<f64>();
            assert!(
                (total - 1.0).abs() < 1e-14,
                "sum J_n({x})^2 = {total}"
            );
        }
    }
}
