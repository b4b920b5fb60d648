//! The pregeometry induced by `∂`: relative dimension of a point, the
//! closure `cl(A) = {x : d(x/A) = 0}`, an exhaustive pregeometry check, and
//! the dimension of explicit tuple sets.

use std::collections::HashMap;

use serde::Serialize;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::pointset::PointSet;
use crate::predim::Predim;

/// Largest ground set [`verify_pregeometry`] will scan.
pub const PREGEOMETRY_MAX_POINTS: usize = 10;

/// `∂(A ∪ {x}) − ∂(A)`.
pub fn d_of(pd: &Predim<'_>, x: usize, a: PointSet) -> Result<i64> {
    if a.contains(x) {
        pd.check_domain(a)?;
        return Ok(0);
    }
    Ok(pd.d_partial(a.with(x))? - pd.d_partial(a)?)
}

/// Every domain point of zero relative dimension over `A`.
pub fn geom_closure(pd: &Predim<'_>, a: PointSet) -> Result<PointSet> {
    let base = pd.d_partial(a)?;
    let mut cl = a;
    for x in pd.domain().difference(a).iter() {
        pd.budget().check_time()?;
        if pd.d_partial(a.with(x))? == base {
            cl.insert(x);
        }
    }
    Ok(cl)
}

/// Anything that behaves like a closure operator on a finite ground set.
pub trait ClosureOperator {
    fn ground(&self) -> PointSet;
    fn closure(&self, a: PointSet) -> Result<PointSet>;
}

/// The closure operator of `∂` for a bound predimension.
pub struct GeomClosure<'p, 'a>(pub &'p Predim<'a>);

impl ClosureOperator for GeomClosure<'_, '_> {
    fn ground(&self) -> PointSet {
        self.0.domain()
    }

    fn closure(&self, a: PointSet) -> Result<PointSet> {
        geom_closure(self.0, a)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Inflationary,
    Monotone,
    Idempotent,
    Exchange,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PregeometryViolation {
    pub property: Property,
    pub set: Vec<usize>,
    pub x: Option<usize>,
    pub y: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PregeometryReport {
    pub checked_sets: usize,
    pub violations: Vec<PregeometryViolation>,
}

impl PregeometryReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks inflation, monotonicity, idempotence and exchange of `op` over
/// every subset of its ground set. Finite character holds trivially on a
/// finite ground set. Monotonicity is checked along single-point steps,
/// which implies it for all pairs.
pub fn verify_pregeometry(op: &dyn ClosureOperator, budget: &Budget) -> Result<PregeometryReport> {
    let ground = op.ground();
    if ground.len() > PREGEOMETRY_MAX_POINTS {
        return Err(Error::Budget {
            what: "pregeometry verification (points)".into(),
            required: ground.len() as u128,
            limit: PREGEOMETRY_MAX_POINTS as u128,
        });
    }
    budget.check_points("pregeometry verification", ground.len())?;

    let mut cache: HashMap<PointSet, PointSet> = HashMap::new();
    let mut cl = |s: PointSet| -> Result<PointSet> {
        if let Some(&c) = cache.get(&s) {
            return Ok(c);
        }
        let c = op.closure(s)?;
        cache.insert(s, c);
        Ok(c)
    };
    let v = |property, set: PointSet, x: Option<usize>, y: Option<usize>| PregeometryViolation {
        property,
        set: set.iter().collect(),
        x,
        y,
    };

    let mut report = PregeometryReport::default();
    for a in ground.subsets() {
        budget.check_time()?;
        report.checked_sets += 1;
        let ca = cl(a)?;
        if !a.is_subset(ca) {
            report.violations.push(v(Property::Inflationary, a, None, None));
        }
        if cl(ca)? != ca {
            report.violations.push(v(Property::Idempotent, a, None, None));
        }
        let outside: Vec<usize> = ground.difference(a).iter().collect();
        for &x in &outside {
            let cax = cl(a.with(x))?;
            if !ca.is_subset(cax) {
                report.violations.push(v(Property::Monotone, a, Some(x), None));
            }
        }
        for &y in &outside {
            let cay = cl(a.with(y))?;
            for x in cay.difference(ca).iter().filter(|&x| x != y) {
                if !cl(a.with(x))?.contains(y) {
                    report.violations.push(v(Property::Exchange, a, Some(x), Some(y)));
                }
            }
        }
    }
    Ok(report)
}

/// The dimension of an explicit set of tuples over `C`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Dim {
    /// No tuples at all; below every finite value.
    Empty,
    Finite(i64),
}

impl Dim {
    pub fn max(self, other: Dim) -> Dim {
        std::cmp::max(self, other)
    }
}

/// `max` over tuples of `∂(C ∪ tuple) − ∂(C)`.
pub fn dim_set(pd: &Predim<'_>, tuples: &[Vec<usize>], c: PointSet) -> Result<Dim> {
    let base = pd.d_partial(c)?;
    let mut best = Dim::Empty;
    for t in tuples {
        let s = t.iter().fold(c, |acc, &p| acc.with(p));
        best = best.max(Dim::Finite(pd.d_partial(s)? - base));
    }
    Ok(best)
}
