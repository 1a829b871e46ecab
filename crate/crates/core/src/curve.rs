//! Trading invariants.
//!
//! A curve is a level set `F(x, y) = C` over positive reserves. Callers only
//! ever see three derived functions: `y` as a function of `x`, its inverse,
//! and the marginal exchange rate `r(x) = |dy/dx|`. The engine relies on two
//! structural properties, which [`check_axioms`] validates numerically:
//!
//! 1. along the curve, `x` and `y` move strictly in opposite directions, and
//! 2. `r(x)` is strictly decreasing.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub trait Curve<S: Scalar> {
    /// The unique `y > 0` on the curve for this `x`.
    fn reserve_y(&self, x: &S) -> Result<S>;

    /// The unique `x > 0` on the curve for this `y`.
    fn reserve_x(&self, y: &S) -> Result<S>;

    /// `r(x) = |dy/dx|`, the marginal price of X in units of Y.
    fn marginal_rate(&self, x: &S) -> Result<S>;

    /// Finds the reserve level where `r(x) == target`.
    ///
    /// The default implementation bisects on `r`, which is sound for any
    /// curve with a strictly decreasing rate. Curves with a closed form
    /// should override it.
    fn solve_rate(&self, target: &S) -> Result<S> {
        bisect_rate(self, target)
    }
}

/// Bisection for `r(x) = target` on a strictly decreasing `r`.
///
/// The bracket starts at `[1, 1]` and is widened geometrically until it
/// contains the root. Stops after 200 halvings or once the bracket is
/// narrower than `1e-12` times its midpoint.
pub fn bisect_rate<S: Scalar, C: Curve<S> + ?Sized>(curve: &C, target: &S) -> Result<S> {
    if !target.is_positive() {
        return Err(Error::domain("target rate must be positive"));
    }
    let two = S::from_i64(2);
    let mut lo = S::one();
    let mut hi = S::one();
    for _ in 0..2048 {
        if curve.marginal_rate(&hi)? <= *target {
            break;
        }
        hi = hi * two.clone();
    }
    for _ in 0..2048 {
        if curve.marginal_rate(&lo)? >= *target {
            break;
        }
        lo = lo / two.clone();
    }
    if curve.marginal_rate(&hi)? > *target || curve.marginal_rate(&lo)? < *target {
        return Err(Error::domain("could not bracket the target rate"));
    }
    let rel_width = S::from_ratio(1, 1_000_000_000_000);
    for _ in 0..200 {
        let mid = (lo.clone() + hi.clone()) / two.clone();
        if hi.clone() - lo.clone() < rel_width.clone() * mid.clone() {
            break;
        }
        let r = curve.marginal_rate(&mid)?;
        if r == *target {
            return Ok(mid);
        }
        if r > *target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / two)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    ConstantProduct,
}

/// A concrete invariant `F(x, y) = constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveParams<S> {
    kind: CurveKind,
    constant: S,
}

impl<S: Scalar> CurveParams<S> {
    pub fn new(kind: CurveKind, constant: S) -> Result<Self> {
        if !constant.is_positive() || !constant.is_finite() {
            return Err(Error::invalid(
                "curve constant",
                "must be a positive finite number",
            ));
        }
        Ok(Self { kind, constant })
    }

    /// `x * y = k`.
    pub fn constant_product(k: S) -> Result<Self> {
        Self::new(CurveKind::ConstantProduct, k)
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn constant(&self) -> &S {
        &self.constant
    }

    /// `F(x, y)`.
    pub fn invariant(&self, x: &S, y: &S) -> S {
        match self.kind {
            CurveKind::ConstantProduct => x.clone() * y.clone(),
        }
    }
}

fn require_positive<S: Scalar>(v: &S, what: &str) -> Result<()> {
    if v.is_positive() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{what} must be positive, got {}",
            v.render()
        )))
    }
}

impl<S: Scalar> Curve<S> for CurveParams<S> {
    fn reserve_y(&self, x: &S) -> Result<S> {
        require_positive(x, "x reserve")?;
        match self.kind {
            CurveKind::ConstantProduct => Ok(self.constant.clone() / x.clone()),
        }
    }

    fn reserve_x(&self, y: &S) -> Result<S> {
        require_positive(y, "y reserve")?;
        match self.kind {
            CurveKind::ConstantProduct => Ok(self.constant.clone() / y.clone()),
        }
    }

    fn marginal_rate(&self, x: &S) -> Result<S> {
        require_positive(x, "x reserve")?;
        match self.kind {
            CurveKind::ConstantProduct => Ok(self.constant.clone() / (x.clone() * x.clone())),
        }
    }

    fn solve_rate(&self, target: &S) -> Result<S> {
        require_positive(target, "target rate")?;
        match self.kind {
            // k / x^2 = target  =>  x = sqrt(k / target)
            CurveKind::ConstantProduct => {
                let square = self.constant.clone() / target.clone();
                square
                    .sqrt()
                    .ok_or_else(|| Error::Irrational(format!("sqrt({})", square.render())))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomViolation {
    /// 1: `x` and `y` fail to move in opposite directions; 2: `r` fails to decrease.
    pub axiom: u8,
    /// Index of the first sample of the offending adjacent pair.
    pub index: usize,
    pub x_a: String,
    pub x_b: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub samples: usize,
    pub axiom1_holds: bool,
    pub axiom2_holds: bool,
    /// Worst relative gap between a central difference of `reserve_y` (step
    /// `1e-6 * x`) and `-r(x)` over the grid.
    pub max_derivative_rel_err: f64,
    pub violations: Vec<AxiomViolation>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.axiom1_holds && self.axiom2_holds
    }
}

/// Samples `samples` evenly spaced points on `[x_lo, x_hi]` and checks both
/// curve axioms on every adjacent pair.
pub fn check_axioms<S: Scalar, C: Curve<S> + ?Sized>(
    curve: &C,
    x_lo: &S,
    x_hi: &S,
    samples: usize,
) -> Result<AxiomReport> {
    if !x_lo.is_positive() || x_hi <= x_lo {
        return Err(Error::domain("axiom check needs 0 < x_lo < x_hi"));
    }
    if samples < 2 {
        return Err(Error::domain("axiom check needs at least 2 samples"));
    }
    let span = x_hi.clone() - x_lo.clone();
    let last = S::from_i64(samples as i64 - 1);
    let step_rel = S::from_ratio(1, 1_000_000);
    let two = S::from_i64(2);

    let mut points = Vec::with_capacity(samples);
    let mut max_err = 0f64;
    for i in 0..samples {
        let x = if i + 1 == samples {
            x_hi.clone()
        } else {
            x_lo.clone() + span.clone() * S::from_i64(i as i64) / last.clone()
        };
        let y = curve.reserve_y(&x)?;
        let r = curve.marginal_rate(&x)?;

        let h = step_rel.clone() * x.clone();
        let up = curve.reserve_y(&(x.clone() + h.clone()))?;
        let down = curve.reserve_y(&(x.clone() - h.clone()))?;
        let slope = (up - down) / (two.clone() * h);
        let err = ((slope + r.clone()).to_f64() / r.to_f64()).abs();
        max_err = max_err.max(if err.is_nan() { f64::INFINITY } else { err });

        points.push((x, y, r));
    }

    let mut violations = Vec::new();
    for (i, pair) in points.windows(2).enumerate() {
        let (xa, ya, ra) = &pair[0];
        let (xb, yb, rb) = &pair[1];
        if ya.partial_cmp(yb) != Some(Ordering::Greater) {
            violations.push(AxiomViolation {
                axiom: 1,
                index: i,
                x_a: xa.render(),
                x_b: xb.render(),
            });
        }
        if ra.partial_cmp(rb) != Some(Ordering::Greater) {
            violations.push(AxiomViolation {
                axiom: 2,
                index: i,
                x_a: xa.render(),
                x_b: xb.render(),
            });
        }
    }
    Ok(AxiomReport {
        samples,
        axiom1_holds: violations.iter().all(|v| v.axiom != 1),
        axiom2_holds: violations.iter().all(|v| v.axiom != 2),
        max_derivative_rel_err: max_err,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn cp(k: f64) -> CurveParams<f64> {
        CurveParams::constant_product(k).unwrap()
    }

    #[test]
    fn reserve_y_examples() {
        let c = cp(10000.0);
        assert_eq!(c.reserve_y(&100.0).unwrap(), 100.0);
        assert!((c.reserve_y(&110.0).unwrap() - 90.909_090_909_090_9).abs() < 1e-12);
        assert!((c.reserve_y(&90.0).unwrap() - 111.111_111_111_111_1).abs() < 1e-12);
    }

    #[test]
    fn reserve_x_examples() {
        let c = cp(10000.0);
        assert_eq!(c.reserve_x(&100.0).unwrap(), 100.0);
        assert!((c.reserve_x(&(10000.0 / 110.0)).unwrap() - 110.0).abs() < 1e-12);
        assert_eq!(cp(2500.0).reserve_x(&25.0).unwrap(), 100.0);
    }

    #[test]
    fn marginal_rate_examples() {
        let c = cp(10000.0);
        assert_eq!(c.marginal_rate(&100.0).unwrap(), 1.0);
        assert!((c.marginal_rate(&90.0).unwrap() - 1.234_567_901_234_567_9).abs() < 1e-12);
        assert!((c.marginal_rate(&(1000.0 / 9.0)).unwrap() - 0.81).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_positive_reserves() {
        let c = cp(10000.0);
        assert!(matches!(c.reserve_y(&0.0), Err(Error::Domain(_))));
        assert!(matches!(c.reserve_x(&-1.0), Err(Error::Domain(_))));
        assert!(matches!(c.marginal_rate(&0.0), Err(Error::Domain(_))));
        assert!(CurveParams::constant_product(0.0).is_err());
    }

    #[test]
    fn closed_form_matches_bisection() {
        let c = cp(10000.0);
        for target in [1.0 / 0.81, 0.81, 1.0, 3.7] {
            let closed = c.solve_rate(&target).unwrap();
            let bisected = bisect_rate(&c, &target).unwrap();
            assert!(
                (closed - bisected).abs() <= 1e-9 * closed,
                "{closed} vs {bisected}"
            );
        }
        assert_eq!(c.solve_rate(&(1.0 / 0.81)).unwrap(), 90.0);
    }

    #[test]
    fn exact_solve_rate_requires_square() {
        let c = CurveParams::constant_product(BigRational::from_i64(10000)).unwrap();
        let target = BigRational::from_ratio(100, 81);
        assert_eq!(c.solve_rate(&target).unwrap(), BigRational::from_i64(90));
        assert!(matches!(
            c.solve_rate(&BigRational::from_i64(2)),
            Err(Error::Irrational(_))
        ));
    }

    #[test]
    fn constant_product_passes_axioms() {
        let report = check_axioms(&cp(10000.0), &1.0, &1000.0, 1000).unwrap();
        assert!(report.passed(), "{report:?}");
        assert!(report.max_derivative_rel_err < 1e-6);
        assert!(check_axioms(&cp(1.0), &0.5, &2.0, 10).unwrap().passed());
    }

    #[test]
    fn axiom_check_rejects_bad_ranges() {
        assert!(check_axioms(&cp(1.0), &2.0, &1.0, 10).is_err());
        assert!(check_axioms(&cp(1.0), &0.0, &1.0, 10).is_err());
        assert!(check_axioms(&cp(1.0), &1.0, &2.0, 1).is_err());
    }

    struct FlatRate(CurveParams<f64>);

    impl Curve<f64> for FlatRate {
        fn reserve_y(&self, x: &f64) -> Result<f64> {
            self.0.reserve_y(x)
        }
        fn reserve_x(&self, y: &f64) -> Result<f64> {
            self.0.reserve_x(y)
        }
        fn marginal_rate(&self, _x: &f64) -> Result<f64> {
            Ok(1.0)
        }
    }

    #[test]
    fn flat_rate_violates_axiom_two() {
        let report = check_axioms(&FlatRate(cp(10000.0)), &1.0, &10.0, 5).unwrap();
        assert!(report.axiom1_holds);
        assert!(!report.axiom2_holds);
        assert_eq!(report.violations.len(), 4);
        assert!(report.violations.iter().all(|v| v.axiom == 2));
        assert!(!report.passed());
    }
}
