//! Gauss hypergeometric series ₂F₁(a, b; c; s).
//!
//! The eigenfunctions only ever need the terminating case (one of `a`, `b` a
//! non-positive integer), which is a polynomial summed through the term-ratio
//! recurrence. [`hypergeometric_2f1`] carries that sum in double-double
//! arithmetic because alternating terms cancel badly as `s → 1`; the
//! [`TerminatingSeries`] sampler stays in plain `f64`. The non-terminating
//! series is provided for `s ∈ [0, 1)`.

use thiserror::Error;

/// Relative size of the last term at which the infinite series is cut.
pub const SERIES_TOLERANCE: f64 = 1e-15;
pub const MAX_SERIES_TERMS: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecfunError {
    #[error("non-terminating series needs s in [0, 1), got {0}")]
    OutsideDisk(f64),
    #[error("c = {c} hits a pole at term {term} before the series terminates")]
    PoleInC { c: f64, term: usize },
    #[error("non-finite argument (a={a}, b={b}, c={c}, s={s})")]
    NonFinite { a: f64, b: f64, c: f64, s: f64 },
    #[error("series did not converge in {0} terms")]
    NotConverged(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypergeometricParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub s: f64,
}

impl HypergeometricParams {
    pub fn new(a: f64, b: f64, c: f64, s: f64) -> Self {
        Self { a, b, c, s }
    }

    /// Degree of the polynomial when either numerator parameter is a
    /// non-positive integer.
    pub fn terminating_degree(&self) -> Option<usize> {
        [self.a, self.b]
            .into_iter()
            .filter_map(non_positive_integer)
            .min()
    }
}

fn non_positive_integer(x: f64) -> Option<usize> {
    (x <= 0.0 && x == x.round() && x > -(MAX_SERIES_TERMS as f64)).then(|| (-x) as usize)
}

/// Evaluates ₂F₁(a, b; c; s) = Σ (a)ₖ(b)ₖ / ((c)ₖ k!) sᵏ.
pub fn hypergeometric_2f1(p: &HypergeometricParams) -> Result<f64, SpecfunError> {
    let HypergeometricParams { a, b, c, s } = *p;
    if !(a.is_finite() && b.is_finite() && c.is_finite() && s.is_finite()) {
        return Err(SpecfunError::NonFinite { a, b, c, s });
    }

    if let Some(degree) = p.terminating_degree() {
        check_c(c, degree)?;
        return Ok(sum_terms(a, b, c, s, degree));
    }

    if !(0.0..1.0).contains(&s) {
        return Err(SpecfunError::OutsideDisk(s));
    }
    let mut sum = 1.0;
    let mut term = 1.0;
    for k in 0..MAX_SERIES_TERMS {
        let kf = k as f64;
        if c + kf == 0.0 {
            return Err(SpecfunError::PoleInC { c, term: k + 1 });
        }
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * s;
        sum += term;
        if term.abs() <= SERIES_TOLERANCE * sum.abs() {
            return Ok(sum);
        }
    }
    Err(SpecfunError::NotConverged(MAX_SERIES_TERMS))
}

/// Convenience wrapper around [`hypergeometric_2f1`].
pub fn hyp2f1(a: f64, b: f64, c: f64, s: f64) -> Result<f64, SpecfunError> {
    hypergeometric_2f1(&HypergeometricParams::new(a, b, c, s))
}

fn check_c(c: f64, degree: usize) -> Result<(), SpecfunError> {
    // (c)ₖ for k <= degree contains the factors c, c+1, ..., c+degree-1.
    if let Some(j) = non_positive_integer(c) {
        if j < degree {
            return Err(SpecfunError::PoleInC { c, term: j + 1 });
        }
    }
    Ok(())
}

fn sum_terms(a: f64, b: f64, c: f64, s: f64, degree: usize) -> f64 {
    let s = Dd::from(s);
    let mut sum = Dd::from(1.0);
    let mut term = Dd::from(1.0);
    for k in 0..degree {
        let kf = k as f64;
        let num = Dd::sum(a, kf).mul(Dd::sum(b, kf));
        let den = Dd::sum(c, kf).mul(Dd::from(kf + 1.0));
        term = term.mul(num).div(den).mul(s);
        sum = sum.add(term);
    }
    sum.hi + sum.lo
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
}

impl Dd {
    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        Dd {
            hi: s,
            lo: (a - (s - bb)) + (b - bb),
        }
    }

    fn renorm(hi: f64, lo: f64) -> Dd {
        let s = hi + lo;
        Dd {
            hi: s,
            lo: lo - (s - hi),
        }
    }

    fn sum(a: f64, b: f64) -> Dd {
        Dd::two_sum(a, b)
    }

    fn add(self, o: Dd) -> Dd {
        let Dd { hi, lo } = Dd::two_sum(self.hi, o.hi);
        Dd::renorm(hi, lo + self.lo + o.lo)
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        Dd::renorm(p, e + self.hi * o.lo + self.lo * o.hi)
    }

    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.add(o.mul(Dd::from(-q1)));
        let q2 = r.hi / o.hi;
        let r = r.add(o.mul(Dd::from(-q2)));
        let q3 = r.hi / o.hi;
        Dd::renorm(q1, q2).add(Dd::from(q3))
    }
}

/// Evaluator for a fixed terminating series at many arguments.
///
/// Precomputes the polynomial coefficients so repeated evaluation is a Horner
/// loop; used when sampling eigenfunctions on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TerminatingSeries {
    coefficients: Vec<f64>,
}

impl TerminatingSeries {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self, SpecfunError> {
        let p = HypergeometricParams::new(a, b, c, 0.0);
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(SpecfunError::NonFinite { a, b, c, s: 0.0 });
        }
        let degree = p
            .terminating_degree()
            .ok_or(SpecfunError::OutsideDisk(f64::NAN))?;
        check_c(c, degree)?;
        let mut coefficients = Vec::with_capacity(degree + 1);
        let mut coef = 1.0;
        coefficients.push(coef);
        for k in 0..degree {
            let kf = k as f64;
            coef *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0));
            coefficients.push(coef);
        }
        Ok(Self { coefficients })
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * s + c)
    }
}
