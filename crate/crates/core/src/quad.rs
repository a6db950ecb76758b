//! Quadrature over trajectory sample grids: composite Simpson on adjacent
//! interval pairs with one Richardson extrapolation level, plus small
//! closed-form helpers for Gaussian tails.

/// Simpson rule over two adjacent, possibly unequal intervals.
pub(crate) fn simpson_pair(x0: f64, x1: f64, x2: f64, f0: f64, f1: f64, f2: f64) -> f64 {
    let h1 = x1 - x0;
    let h2 = x2 - x1;
    let s = h1 + h2;
    s / 6.0 * ((2.0 - h2 / h1) * f0 + s * s / (h1 * h2) * f1 + (2.0 - h1 / h2) * f2)
}

/// Trapezoid with endpoint-derivative correction; error O(h^5) per interval.
pub(crate) fn corrected_trapezoid(x0: f64, x1: f64, f0: f64, f1: f64, fp0: f64, fp1: f64) -> f64 {
    let h = x1 - x0;
    h * 0.5 * (f0 + f1) + h * h / 12.0 * (fp0 - fp1)
}

/// Cumulative integral of sampled data from the domain origin.
///
/// `head` is the analytic integral over the unsampled leading segment
/// [0, x[0]]. Fine sums use Simpson over interval pairs, coarse sums use
/// pairs of pairs; one Richardson level combines them. Extrapolated
/// cumulative values are available at every fourth node.
#[derive(Debug, Clone)]
pub(crate) struct Cumulative {
    /// Sample indices (multiples of 4) where values are available.
    pub indices: Vec<usize>,
    /// Richardson-extrapolated cumulative integral at those indices.
    pub values: Vec<f64>,
    /// Fine (non-extrapolated) cumulative integral at those indices.
    pub fine: Vec<f64>,
    /// Largest |fine - coarse| / 15 seen: the quadrature error estimate.
    pub error_estimate: f64,
}

pub(crate) fn cumulative_richardson(x: &[f64], g: &[f64], head: f64) -> Cumulative {
    assert_eq!(x.len(), g.len());
    let n = x.len();
    let mut out = Cumulative {
        indices: Vec::new(),
        values: Vec::new(),
        fine: Vec::new(),
        error_estimate: f64::INFINITY,
    };
    if n < 5 {
        return out;
    }

    // Fine cumulative at even indices.
    let mut fine = vec![0.0; n];
    fine[0] = head;
    let mut i = 0;
    while i + 2 <= n - 1 {
        fine[i + 2] = fine[i] + simpson_pair(x[i], x[i + 1], x[i + 2], g[i], g[i + 1], g[i + 2]);
        i += 2;
    }
    // Coarse cumulative at multiples of 4.
    let mut coarse = vec![0.0; n];
    coarse[0] = head;
    let mut j = 0;
    while j + 4 <= n - 1 {
        coarse[j + 4] =
            coarse[j] + simpson_pair(x[j], x[j + 2], x[j + 4], g[j], g[j + 2], g[j + 4]);
        j += 4;
    }

    let mut err = 0.0_f64;
    let mut idx = 0;
    while idx <= j {
        let f = fine[idx];
        let c = coarse[idx];
        let corr = (f - c) / 15.0;
        out.indices.push(idx);
        out.values.push(f + corr);
        out.fine.push(f);
        err = err.max(corr.abs());
        idx += 4;
    }
    out.error_estimate = err;
    out
}

/// Integral of sampled data (values `g`, derivatives `gp`) from the origin
/// to the last sample: Richardson-extrapolated Simpson over the pair-aligned
/// prefix plus corrected-trapezoid closure of the ragged tail.
/// Returns (value, error_estimate).
pub(crate) fn integral_full(x: &[f64], g: &[f64], gp: &[f64], head: f64) -> (f64, f64) {
    let n = x.len();
    if n < 2 {
        return (head, 0.0);
    }
    if n < 5 {
        let mut acc = head;
        for i in 0..n - 1 {
            acc += corrected_trapezoid(x[i], x[i + 1], g[i], g[i + 1], gp[i], gp[i + 1]);
        }
        return (acc, f64::INFINITY);
    }
    let cum = cumulative_richardson(x, g, head);
    let last_idx = *cum.indices.last().unwrap();
    let mut acc = *cum.values.last().unwrap();
    for i in last_idx..n - 1 {
        acc += corrected_trapezoid(x[i], x[i + 1], g[i], g[i + 1], gp[i], gp[i + 1]);
    }
    (acc, cum.error_estimate)
}

/// Upper incomplete gamma function Gamma(a, x) by Lentz's continued
/// fraction; intended for x >= a + 1, where the fraction converges fast.
pub(crate) fn upper_incomplete_gamma(a: f64, x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..200 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x + a * x.ln()).exp() * h
}

/// Tail integral of a Gaussian-extrapolated profile:
/// int_R^inf [u_R exp(-(r^2 - R^2)/2)]^2 r^(d-1) dr
///   = u_R^2 exp(R^2) Gamma(d/2, R^2) / 2.
pub(crate) fn gaussian_tail_mass(u_end: f64, r_end: f64, d: u32) -> f64 {
    if u_end == 0.0 {
        return 0.0;
    }
    let a = d as f64 / 2.0;
    let x = r_end * r_end;
    // exp(R^2) * Gamma(a, R^2) computed together to avoid overflow.
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut dd = 1.0 / b;
    let mut h = dd;
    for i in 1..200 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        dd = an * dd + b;
        if dd.abs() < tiny {
            dd = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        dd = 1.0 / dd;
        let del = dd * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    // exp(R^2) * exp(-x + a ln x) = x^a, so the tail stays finite.
    u_end * u_end * x.powf(a) * h / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_pair_exact_on_cubics() {
        // Nonuniform pair must integrate cubics exactly.
        let f = |x: f64| 2.0 * x * x * x - x * x + 3.0;
        let fi = |x: f64| 0.5 * x.powi(4) - x.powi(3) / 3.0 + 3.0 * x;
        let (x0, x1, x2) = (0.2, 0.55, 1.3);
        let got = simpson_pair(x0, x1, x2, f(x0), f(x1), f(x2));
        assert!((got - (fi(x2) - fi(x0))).abs() < 1e-14);
    }

    #[test]
    fn corrected_trapezoid_exact_on_cubics() {
        let f = |x: f64| x * x * x;
        let fp = |x: f64| 3.0 * x * x;
        let got = corrected_trapezoid(1.0, 1.7, f(1.0), f(1.7), fp(1.0), fp(1.7));
        assert!((got - (1.7_f64.powi(4) - 1.0) / 4.0).abs() < 1e-14);
    }

    #[test]
    fn cumulative_converges_on_smooth_integrand() {
        // int_0^2 exp(-x^2) x^3 dx with a mildly nonuniform grid.
        let n = 401;
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                2.0 * (t + 0.05 * (6.0 * t).sin() * t * (1.0 - t))
            })
            .collect();
        let g: Vec<f64> = x.iter().map(|&x| (-x * x).exp() * x * x * x).collect();
        let gp: Vec<f64> = x
            .iter()
            .map(|&x| (-x * x).exp() * (3.0 * x * x - 2.0 * x * x * x * x))
            .collect();
        let exact = 0.5 * (1.0 - (1.0 + 4.0) * (-4.0_f64).exp()); // (1-(1+x^2)e^{-x^2})/2 at 2
        let (got, est) = integral_full(&x, &g, &gp, 0.0);
        assert!((got - exact).abs() < 1e-10, "got {got}, exact {exact}");
        assert!(est < 1e-6);
    }

    #[test]
    fn incomplete_gamma_against_closed_forms() {
        // Gamma(1, x) = exp(-x).
        for x in [2.0, 5.0, 20.0] {
            let got = upper_incomplete_gamma(1.0, x);
            assert!((got - (-x as f64).exp()).abs() < 1e-16 + 1e-12 * got.abs());
        }
        // Recurrence Gamma(a+1, x) = a Gamma(a, x) + x^a exp(-x).
        for &(a, x) in &[(1.5, 4.0), (2.5, 9.0), (3.5, 25.0)] {
            let lhs = upper_incomplete_gamma(a + 1.0, x);
            let rhs = a * upper_incomplete_gamma(a, x) + x.powf(a) * (-x).exp();
            assert!((lhs - rhs).abs() < 1e-12 * lhs.abs());
        }
    }

    #[test]
    fn gaussian_tail_matches_quadrature() {
        // d = 3, u_R = 1e-3, R = 3: compare against fine Simpson of the model.
        let (u_end, r_end, d) = (1e-3, 3.0, 3u32);
        let model = |r: f64| {
            let v = u_end * (-(r * r - r_end * r_end) / 2.0).exp();
            v * v * r.powi(d as i32 - 1)
        };
        let n = 20001;
        let hi = 12.0;
        let h = (hi - r_end) / (n - 1) as f64;
        let mut acc = 0.0;
        for i in 0..(n - 1) / 2 {
            let x0 = r_end + 2.0 * i as f64 * h;
            acc += h / 3.0 * (model(x0) + 4.0 * model(x0 + h) + model(x0 + 2.0 * h));
        }
        let got = gaussian_tail_mass(u_end, r_end, d);
        assert!(
            ((got - acc) / acc).abs() < 1e-8,
            "closed form {got}, quadrature {acc}"
        );
    }
}
