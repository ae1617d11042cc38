//! Quadrature and root bracketing shared by the rest of the crate.
//!
//! Two flavours of integration live here: [`integrate`] refines a rule on a
//! callable until successive estimates agree, and [`simpson_weights`] /
//! [`simpson_samples`] integrate data that is already sampled on a uniform
//! grid (wavefunctions, densities, Fourier integrands).

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),
    #[error("integrand is not finite at x = {x}")]
    NonFinite { x: f64 },
    #[error("quadrature did not converge after {depth} refinements (estimate {estimate}, error {error})")]
    NotConverged {
        estimate: f64,
        error: f64,
        depth: usize,
    },
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    #[error("need at least 2 uniformly spaced samples, got {0}")]
    TooFewSamples(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    Simpson,
    /// Fixed-order Gauss-Legendre rule applied on each panel.
    GaussLegendre {
        order: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rule: QuadratureRule,
    /// Panels used by the first (coarsest) estimate.
    pub panels: usize,
    pub tolerance: f64,
    /// Maximum number of panel doublings.
    pub max_depth: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rule: QuadratureRule::Simpson,
            panels: 16,
            tolerance: 1e-12,
            max_depth: 20,
        }
    }
}

impl QuadratureSpec {
    pub fn gauss_legendre(order: usize) -> Self {
        Self {
            rule: QuadratureRule::GaussLegendre { order },
            panels: 4,
            tolerance: 1e-12,
            max_depth: 16,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    fn validate(&self) -> Result<(), NumericsError> {
        if !(self.tolerance > 0.0) {
            return Err(NumericsError::InvalidSpec(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.panels == 0 {
            return Err(NumericsError::InvalidSpec("panels must be >= 1".into()));
        }
        if let QuadratureRule::GaussLegendre { order } = self.rule {
            if order == 0 {
                return Err(NumericsError::InvalidSpec(
                    "Gauss-Legendre order must be >= 1".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
    /// Number of doublings performed before the estimate was accepted.
    pub depth: usize,
}

/// Integrates `f` over `[a, b]`, doubling the panel count until two
/// successive estimates agree to `max(tol * |value|, tol)`.
///
/// The error estimate is the Richardson difference between the last two
/// refinements (divided by 15 for Simpson, whose error shrinks by 16x per
/// halving).
pub fn integrate<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Integral, NumericsError>
where
    F: Fn(f64) -> f64,
{
    spec.validate()?;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(NumericsError::InvalidInterval { a, b });
    }

    let nodes = match spec.rule {
        QuadratureRule::GaussLegendre { order } => Some(gauss_legendre_nodes(order)),
        QuadratureRule::Simpson => None,
    };
    let estimate = |panels: usize| -> Result<f64, NumericsError> {
        match &nodes {
            None => simpson_callable(&f, a, b, 2 * panels),
            Some((x, w)) => gauss_legendre_panels(&f, a, b, panels, x, w),
        }
    };

    let mut panels = spec.panels;
    let mut previous = estimate(panels)?;
    let mut error = f64::INFINITY;
    for depth in 1..=spec.max_depth {
        panels *= 2;
        let current = estimate(panels)?;
        error = match spec.rule {
            QuadratureRule::Simpson => (current - previous).abs() / 15.0,
            QuadratureRule::GaussLegendre { .. } => (current - previous).abs(),
        };
        if error <= (spec.tolerance * current.abs()).max(spec.tolerance) {
            return Ok(Integral {
                value: current,
                error_estimate: error,
                depth,
            });
        }
        previous = current;
    }
    Err(NumericsError::NotConverged {
        estimate: previous,
        error,
        depth: spec.max_depth,
    })
}

fn checked<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64, NumericsError> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(NumericsError::NonFinite { x })
    }
}

fn simpson_callable<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    intervals: usize,
) -> Result<f64, NumericsError> {
    debug_assert!(intervals.is_multiple_of(2));
    let h = (b - a) / intervals as f64;
    let mut sum = checked(f, a)? + checked(f, b)?;
    for i in 1..intervals {
        let weight = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += weight * checked(f, a + i as f64 * h)?;
    }
    Ok(sum * h / 3.0)
}

fn gauss_legendre_panels<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    panels: usize,
    nodes: &[f64],
    weights: &[f64],
) -> Result<f64, NumericsError> {
    let width = (b - a) / panels as f64;
    let half = 0.5 * width;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        let mut panel = 0.0;
        for (x, w) in nodes.iter().zip(weights) {
            panel += w * checked(f, mid + half * x)?;
        }
        total += half * panel;
    }
    Ok(total)
}

/// Nodes and weights of the `order`-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre_nodes(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Simpson weights for `n` uniformly spaced samples with step `h`.
///
/// An even sample count (odd number of intervals) closes with the 3/8 rule on
/// the last three intervals; two samples fall back to the trapezoid rule.
pub fn simpson_weights(n: usize, h: f64) -> Result<Vec<f64>, NumericsError> {
    if n < 2 {
        return Err(NumericsError::TooFewSamples(n));
    }
    let mut w = vec![0.0; n];
    if n == 2 {
        w[0] = 0.5 * h;
        w[1] = 0.5 * h;
        return Ok(w);
    }
    let simpson_end = if n % 2 == 1 { n - 1 } else { n - 4 };
    if simpson_end > 0 {
        w[0] += h / 3.0;
        w[simpson_end] += h / 3.0;
        for (i, wi) in w.iter_mut().enumerate().take(simpson_end).skip(1) {
            *wi += if i % 2 == 1 {
                4.0 * h / 3.0
            } else {
                2.0 * h / 3.0
            };
        }
    }
    if n.is_multiple_of(2) {
        let s = simpson_end;
        let c = 3.0 * h / 8.0;
        w[s] += c;
        w[s + 1] += 3.0 * c;
        w[s + 2] += 3.0 * c;
        w[s + 3] += c;
    }
    Ok(w)
}

/// Integrates samples `y` taken on a uniform grid with spacing `h`.
pub fn simpson_samples(y: &[f64], h: f64) -> Result<f64, NumericsError> {
    let w = simpson_weights(y.len(), h)?;
    Ok(w.iter().zip(y).map(|(w, y)| w * y).sum())
}

/// Returns the common spacing of `x`, or `None` when the grid is not uniform
/// to a relative tolerance of 1e-9.
pub fn uniform_step(x: &[f64]) -> Option<f64> {
    if x.len() < 2 {
        return None;
    }
    let h = (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64;
    if !(h > 0.0) {
        return None;
    }
    let scale = x[0].abs().max(x[x.len() - 1].abs()).max(h);
    let uniform = x
        .windows(2)
        .all(|pair| ((pair[1] - pair[0]) - h).abs() <= 1e-9 * scale);
    uniform.then_some(h)
}

/// Result of a bisection run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: f64,
    /// Final bracket; `value` is its midpoint.
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
}

impl Root {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Plain bisection on a sign-changing bracket.
///
/// Stops once the bracket is no wider than `tol`, or when the midpoint can no
/// longer be separated from the endpoints in floating point.
pub fn bisect<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<Root, NumericsError>
where
    F: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(Root {
            value: lo,
            lo,
            hi: lo,
            iterations: 0,
        });
    }
    if f_hi == 0.0 {
        return Ok(Root {
            value: hi,
            lo: hi,
            hi,
            iterations: 0,
        });
    }
    if !(f_lo * f_hi < 0.0) {
        return Err(NumericsError::NoSignChange { lo, hi, f_lo, f_hi });
    }
    let lo_negative = f_lo < 0.0;
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        iterations += 1;
        if f_mid == 0.0 {
            return Ok(Root {
                value: mid,
                lo: mid,
                hi: mid,
                iterations,
            });
        }
        if (f_mid < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Root {
        value: lo + 0.5 * (hi - lo),
        lo,
        hi,
        iterations,
    })
}

/// Scans `f` on a geometric grid between `lo` and `hi` (both positive) and
/// returns the first adjacent pair with a sign change.
pub fn geometric_bracket<F>(f: F, lo: f64, hi: f64, samples: usize) -> Option<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    if !(lo > 0.0 && hi > lo) || samples < 2 {
        return None;
    }
    let ratio = (hi / lo).powf(1.0 / (samples - 1) as f64);
    let mut x0 = lo;
    let mut f0 = f(x0);
    for i in 1..samples {
        let x1 = if i == samples - 1 {
            hi
        } else {
            lo * ratio.powi(i as i32)
        };
        let f1 = f(x1);
        if f0.is_finite() && f1.is_finite() && f0 * f1 <= 0.0 {
            return Some((x0, x1));
        }
        x0 = x1;
        f0 = f1;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x * x, 0.0, 1.0, &QuadratureSpec::default()).unwrap();
        assert_abs_diff_eq!(r.value, 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn truncated_exponential() {
        let r = integrate(|x: f64| (-x).exp(), 0.0, 50.0, &QuadratureSpec::default()).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn gamma_integral() {
        let r = integrate(
            |x: f64| x * (-2.0 * x).exp(),
            0.0,
            50.0,
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert_abs_diff_eq!(r.value, 0.25, epsilon = 1e-11);
    }

    #[test]
    fn gauss_legendre_agrees() {
        let spec = QuadratureSpec::gauss_legendre(8);
        let r = integrate(|x: f64| x * (-2.0 * x).exp(), 0.0, 50.0, &spec).unwrap();
        assert_abs_diff_eq!(r.value, 0.25, epsilon = 1e-11);
        let (x, w) = gauss_legendre_nodes(5);
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(x[2], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn non_convergence_reports_last_estimate() {
        let spec = QuadratureSpec {
            max_depth: 2,
            panels: 1,
            ..QuadratureSpec::default()
        };
        match integrate(|x: f64| (40.0 * x).sin(), 0.0, 10.0, &spec) {
            Err(NumericsError::NotConverged {
                depth, estimate, ..
            }) => {
                assert_eq!(depth, 2);
                assert!(estimate.is_finite());
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let spec = QuadratureSpec::default();
        assert!(matches!(
            integrate(|x| x, 1.0, 0.0, &spec),
            Err(NumericsError::InvalidInterval { .. })
        ));
        assert!(matches!(
            integrate(|x| 1.0 / x, 0.0, 1.0, &spec),
            Err(NumericsError::NonFinite { .. })
        ));
        let bad = QuadratureSpec {
            tolerance: 0.0,
            ..spec
        };
        assert!(matches!(
            integrate(|x| x, 0.0, 1.0, &bad),
            Err(NumericsError::InvalidSpec(_))
        ));
    }

    #[test]
    fn simpson_order_four_on_gaussian() {
        // Error ratio between successive halvings approaches 16.
        let exact = std::f64::consts::PI.sqrt() * 0.5 * erf_ref(3.0);
        let err = |n: usize| {
            (simpson_callable(&|x: f64| (-x * x).exp(), 0.0, 3.0, n).unwrap() - exact).abs()
        };
        let ratio = err(32) / err(64);
        assert!((ratio - 16.0).abs() < 0.5, "ratio {ratio}");
    }

    // erf via a long Gauss-Legendre sum, independent of the Simpson path.
    fn erf_ref(x: f64) -> f64 {
        let (nodes, weights) = gauss_legendre_nodes(60);
        let half = 0.5 * x;
        let s: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(t, w)| w * (-(half + half * t).powi(2)).exp())
            .sum();
        2.0 / std::f64::consts::PI.sqrt() * half * s
    }

    #[test]
    fn sampled_simpson_handles_both_parities() {
        for n in [2usize, 3, 4, 5, 10, 11, 101, 4096] {
            let h = 1.0 / (n - 1) as f64;
            let y: Vec<f64> = (0..n)
                .map(|i| (i as f64 * h).powi(if n > 3 { 3 } else { 1 }))
                .collect();
            let expected = if n > 3 { 0.25 } else { 0.5 };
            assert_abs_diff_eq!(simpson_samples(&y, h).unwrap(), expected, epsilon = 1e-13);
        }
        assert!(simpson_weights(1, 1.0).is_err());
    }

    #[test]
    fn bisection_cases() {
        let r = bisect(|x| x - 1.0, 0.0, 2.0, 1e-14).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-14);
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-13).unwrap();
        assert_abs_diff_eq!(r.value, 2f64.sqrt(), epsilon = 1e-12);
        assert!(matches!(
            bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12),
            Err(NumericsError::NoSignChange { .. })
        ));
    }

    #[test]
    fn bisection_halves_bracket_each_step() {
        let r = bisect(|x| x - 0.3, 0.0, 1.0, 2f64.powi(-30)).unwrap();
        assert_eq!(r.width(), 2f64.powi(-(r.iterations as i32)));
        assert_eq!(r.iterations, 30);
    }

    #[test]
    fn geometric_scan_finds_bracket() {
        let (a, b) = geometric_bracket(|x| x - 37.0, 1e-3, 1e4, 200).unwrap();
        assert!(a <= 37.0 && 37.0 <= b);
        assert!(geometric_bracket(|x| x + 1.0, 1e-3, 1e4, 200).is_none());
    }

    #[test]
    fn uniform_step_detection() {
        let x: Vec<f64> = (0..11).map(|i| 0.5 + 0.1 * i as f64).collect();
        assert_abs_diff_eq!(uniform_step(&x).unwrap(), 0.1, epsilon = 1e-15);
        assert!(uniform_step(&[0.0, 1.0, 3.0]).is_none());
    }
}
