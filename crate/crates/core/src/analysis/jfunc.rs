//! Mutual information of a consistent Gaussian LLR, `J(sigma)`, and its inverse.
//!
//! Two-branch polynomial/exponential fit; the inverse starts from the fitted
//! inverse and is polished by bisection on `J` so that `J(J_inv(x)) = x`.

/// Beyond this `J` is taken as exactly 1.
pub const SIGMA_MAX: f64 = 10.0;

const SPLIT: f64 = 1.6363;

pub fn j(sigma: f64) -> f64 {
    let s = sigma.max(0.0);
    if s <= SPLIT {
        -0.0421061 * s.powi(3) + 0.209252 * s * s - 0.00640081 * s
    } else if s < SIGMA_MAX {
        1.0 - (0.00181491 * s.powi(3) - 0.142675 * s * s - 0.0822054 * s + 0.0549608).exp()
    } else {
        1.0
    }
    .clamp(0.0, 1.0)
}

/// Closed-form inverse fit, accurate to roughly 1e-3.
pub fn j_inv_approx(mi: f64) -> f64 {
    let x = mi.clamp(0.0, 1.0);
    if x <= 0.3646 {
        1.09542 * x * x + 0.214217 * x + 2.33727 * x.sqrt()
    } else if x < 1.0 {
        -0.706692 * (0.386013 * (1.0 - x)).ln() + 1.75017 * x
    } else {
        SIGMA_MAX
    }
}

pub fn j_inv(mi: f64) -> f64 {
    if mi <= 0.0 {
        return 0.0;
    }
    let top = j(SIGMA_MAX - 1e-9);
    if mi >= top {
        return SIGMA_MAX;
    }
    let guess = j_inv_approx(mi).clamp(0.0, SIGMA_MAX);
    // bracket around the fitted guess, then bisect
    let (mut lo, mut hi) = ((guess - 0.05).max(0.0), (guess + 0.05).min(SIGMA_MAX));
    if j(lo) > mi {
        lo = 0.0;
    }
    if j(hi) < mi {
        hi = SIGMA_MAX;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if j(mid) < mi {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `J(sqrt(sum_k w_k J_inv(I_k)^2))` over `(weight, mi)` pairs.
pub fn combine<I: IntoIterator<Item = (f64, f64)>>(terms: I) -> f64 {
    let s: f64 = terms.into_iter().map(|(w, mi)| w * j_inv(mi).powi(2)).sum();
    j(s.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `1 - E[log2(1 + e^{-L})]` for `L ~ N(s^2/2, s^2)` by Simpson quadrature.
    fn j_quadrature(s: f64) -> f64 {
        if s == 0.0 {
            return 0.0;
        }
        let mu = s * s / 2.0;
        let (a, b) = (mu - 12.0 * s, mu + 12.0 * s);
        let n = 4000;
        let h = (b - a) / n as f64;
        let f = |l: f64| {
            let z = (l - mu) / s;
            let pdf = (-0.5 * z * z).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
            // log2(1 + e^{-l}) computed stably
            let soft = if l > 0.0 { (-l).exp().ln_1p() } else { -l + l.exp().ln_1p() };
            pdf * soft / std::f64::consts::LN_2
        };
        let mut acc = f(a) + f(b);
        for i in 1..n {
            acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        1.0 - acc * h / 3.0
    }

    #[test]
    fn fit_tracks_quadrature() {
        for k in 0..=60 {
            let s = k as f64 * 0.15;
            assert!((j(s) - j_quadrature(s)).abs() < 2e-3, "sigma {s}: {} vs {}", j(s), j_quadrature(s));
        }
    }

    #[test]
    fn round_trip() {
        for k in 1..=99 {
            let x = k as f64 / 100.0;
            assert!((j(j_inv(x)) - x).abs() < 1e-9);
            assert!((j_inv(x) - j_inv_approx(x)).abs() < 0.05);
        }
    }

    #[test]
    fn monotone_and_bounded() {
        let mut prev = 0.0;
        for k in 0..2000 {
            let v = j(k as f64 * 0.01);
            assert!((0.0..=1.0).contains(&v));
            // the two branches meet with a small step near sigma = 1.64
            assert!(v >= prev - 1e-3);
            prev = v;
        }
        assert_eq!(j(0.0), 0.0);
        assert_eq!(j(20.0), 1.0);
        assert_eq!(j_inv(0.0), 0.0);
    }

    #[test]
    fn combine_of_single_term_is_identity() {
        for x in [0.1, 0.5, 0.9] {
            assert!((combine([(1.0, x)]) - x).abs() < 1e-9);
        }
        assert_eq!(combine([(2.0, 0.0), (1.0, 0.0)]), 0.0);
    }
}
