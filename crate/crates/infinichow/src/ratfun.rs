//! Rational functions on ℙ¹ over K[t]/(t^N) in factored form: divisors,
//! evaluation, local Laurent expansion at finite points and at infinity,
//! goodness checking, and good local lifts.
//!
//! Split model: all roots are listed individually over one ambient field K,
//! so closed points become clusters of geometric points sharing a special
//! value ("locations"), and the paper's trace sums become plain sums over
//! conjugate points. Infinity is always its own location.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numfield::{FieldElement, NumberField};
use crate::series::{LaurentBivariate, TruncSeries};

/// A closed-point location on ℙ¹ in the split model: a special value in K,
/// or the point at infinity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Location {
    Finite(FieldElement),
    Infinity,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Finite(c) => write!(f, "{c}"),
            Location::Infinity => write!(f, "∞"),
        }
    }
}

/// A point of ℙ¹ together with its chosen uniformizer lift: at a finite
/// point the uniformizer is x − local_root(t); at infinity it is 1/x.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Point {
    Finite {
        center: FieldElement,
        local_root: TruncSeries,
    },
    Infinity,
}

impl Point {
    /// A finite point with its local root; the root's special value must be
    /// the center.
    pub fn finite(center: FieldElement, local_root: TruncSeries) -> Result<Point> {
        if local_root.special_value() != &center {
            return Err(Error::OutOfRange(format!(
                "local root {local_root} does not reduce to the center {center}"
            )));
        }
        Ok(Point::Finite { center, local_root })
    }

    pub fn location(&self) -> Location {
        match self {
            Point::Finite { center, .. } => Location::Finite(center.clone()),
            Point::Infinity => Location::Infinity,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Finite { local_root, .. } => write!(f, "x = {local_root}"),
            Point::Infinity => write!(f, "∞"),
        }
    }
}

/// A divisor on ℙ¹: points with nonzero multiplicities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divisor {
    entries: Vec<(Point, i64)>,
}

impl Divisor {
    pub fn entries(&self) -> &[(Point, i64)] {
        &self.entries
    }

    /// Total degree (must vanish for the divisor of a rational function).
    pub fn degree(&self) -> i64 {
        self.entries.iter().map(|(_, m)| m).sum()
    }
}

/// A rational function lead(t) · Π (x − rootᵢ(t))^{multᵢ} with distinct
/// roots and a unit lead.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredRational {
    lead: TruncSeries,
    factors: Vec<(TruncSeries, i64)>,
}

impl FactoredRational {
    /// Build a factored rational function; equal roots are merged by adding
    /// multiplicities and zero multiplicities dropped.
    ///
    /// # Errors
    /// [`Error::NotUnit`] when the lead is not a unit;
    /// [`Error::FieldMismatch`] on mixed coefficient rings.
    pub fn new(lead: TruncSeries, factors: Vec<(TruncSeries, i64)>) -> Result<FactoredRational> {
        if !lead.is_unit() {
            return Err(Error::NotUnit(format!("lead {lead} is not a unit")));
        }
        for (root, _) in &factors {
            if root.field() != lead.field() || root.prec() != lead.prec() {
                return Err(Error::FieldMismatch(
                    "root and lead live in different coefficient rings".to_string(),
                ));
            }
        }
        let mut merged: BTreeMap<TruncSeries, i64> = BTreeMap::new();
        for (root, mult) in factors {
            *merged.entry(root).or_insert(0) += mult;
        }
        let factors = merged.into_iter().filter(|(_, m)| *m != 0).collect();
        Ok(FactoredRational { lead, factors })
    }

    /// The constant function 1.
    pub fn one(field: &Arc<NumberField>, prec: usize) -> FactoredRational {
        FactoredRational {
            lead: TruncSeries::one(field, prec),
            factors: Vec::new(),
        }
    }

    /// The linear function x − root.
    pub fn linear(root: TruncSeries) -> FactoredRational {
        let lead = TruncSeries::one(root.field(), root.prec());
        FactoredRational {
            lead,
            factors: vec![(root, 1)],
        }
    }

    pub fn lead(&self) -> &TruncSeries {
        &self.lead
    }

    pub fn factors(&self) -> &[(TruncSeries, i64)] {
        &self.factors
    }

    pub fn field(&self) -> &Arc<NumberField> {
        self.lead.field()
    }

    pub fn t_prec(&self) -> usize {
        self.lead.prec()
    }

    /// Degree as a rational map contribution: Σ multᵢ.
    pub fn degree(&self) -> i64 {
        self.factors.iter().map(|(_, m)| m).sum()
    }

    /// Product: merge factor lists, multiply leads.
    pub fn mul(&self, other: &FactoredRational) -> Result<FactoredRational> {
        if self.field() != other.field() || self.t_prec() != other.t_prec() {
            return Err(Error::FieldMismatch(
                "factored rationals over different rings".to_string(),
            ));
        }
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        FactoredRational::new(self.lead.mul(&other.lead), factors)
    }

    /// Reciprocal: invert the lead, negate all multiplicities.
    pub fn inv(&self) -> Result<FactoredRational> {
        Ok(FactoredRational {
            lead: self.lead.inv()?,
            factors: self.factors.iter().map(|(r, m)| (r.clone(), -m)).collect(),
        })
    }

    pub fn pow_i(&self, n: i64) -> Result<FactoredRational> {
        if n == 0 {
            return Ok(FactoredRational::one(self.field(), self.t_prec()));
        }
        let base = if n < 0 { self.inv()? } else { self.clone() };
        let k = n.unsigned_abs() as i64;
        Ok(FactoredRational {
            lead: base.lead.pow_i(k)?,
            factors: base.factors.iter().map(|(r, m)| (r.clone(), m * k)).collect(),
        })
    }

    /// Expanded numerator and denominator: polynomials in x with
    /// K[t]/(t^N) coefficients, constant-first, coprime by construction.
    /// The denominator is monic by construction (the lead multiplies the
    /// numerator).
    pub fn expand(&self) -> (Vec<TruncSeries>, Vec<TruncSeries>) {
        let field = self.field();
        let n = self.t_prec();
        let one = vec![TruncSeries::one(field, n)];
        let mut num = one.clone();
        let mut den = one;
        for (root, mult) in &self.factors {
            // x - root as a degree-1 polynomial
            let lin = vec![root.neg(), TruncSeries::one(field, n)];
            let target = if *mult > 0 { &mut num } else { &mut den };
            for _ in 0..mult.unsigned_abs() {
                *target = poly_mul(target, &lin);
            }
        }
        num = num.iter().map(|c| c.mul(&self.lead)).collect();
        (num, den)
    }

    /// The divisor: one entry per location (cluster of roots sharing a
    /// special value), plus the infinity entry balancing the degree. The
    /// default local root of a cluster is its first root truncated mod t².
    pub fn divisor(&self) -> Divisor {
        let mut clusters: BTreeMap<FieldElement, (TruncSeries, i64)> = BTreeMap::new();
        for (root, mult) in &self.factors {
            let c = root.special_value().clone();
            clusters
                .entry(c)
                .and_modify(|(_, m)| *m += mult)
                .or_insert_with(|| (default_local_root(root), *mult));
        }
        let mut entries: Vec<(Point, i64)> = clusters
            .into_iter()
            .filter(|(_, (_, m))| *m != 0)
            .map(|(center, (local_root, m))| (Point::Finite { center, local_root }, m))
            .collect();
        let deg = self.degree();
        if deg != 0 {
            entries.push((Point::Infinity, -deg));
        }
        Divisor { entries }
    }

    /// Order of vanishing at a location: the summed multiplicity of roots
    /// there, or −degree at infinity.
    pub fn ord_at(&self, loc: &Location) -> i64 {
        match loc {
            Location::Finite(c) => self
                .factors
                .iter()
                .filter(|(r, _)| r.special_value() == c)
                .map(|(_, m)| m)
                .sum(),
            Location::Infinity => -self.degree(),
        }
    }

    /// Exact evaluation at a point of K[t]/(t^N).
    ///
    /// # Errors
    /// [`Error::EvaluationAtDivisor`] when some factor fails to be a unit at
    /// the point.
    pub fn evaluate(&self, at: &TruncSeries) -> Result<TruncSeries> {
        let mut acc = self.lead.clone();
        for (root, mult) in &self.factors {
            let d = at.sub(root);
            if !d.is_unit() {
                return Err(Error::EvaluationAtDivisor(format!(
                    "{at} meets the divisor: factor with root {root}"
                )));
            }
            acc = acc.mul(&d.pow_i(*mult)?);
        }
        Ok(acc)
    }

    /// Exact Laurent expansion in the uniformizer of the given point.
    ///
    /// At a finite point with local root ρ the substitution is x = s + ρ:
    /// factors over the point contribute s + (ρ − root) with nilpotent
    /// constant part (exactly invertible), distant factors are units whose
    /// inverses are developed to the window. At infinity the substitution is
    /// x = 1/s: the expansion is lead · s^{−deg} · Π (1 − root·s)^{mult}.
    pub fn expand_local(&self, at: &Point, window: usize) -> Result<LaurentBivariate> {
        let field = self.field();
        let n = self.t_prec();
        let mut acc = LaurentBivariate::from_ts(&self.lead, window);
        match at {
            Point::Finite { local_root, .. } => {
                let s = LaurentBivariate::monomial(&TruncSeries::one(field, n), 1, window);
                for (root, mult) in &self.factors {
                    let c = local_root.sub(root);
                    let factor = s.add(&LaurentBivariate::from_ts(&c, window));
                    acc = acc.mul(&factor.pow_i(*mult)?);
                }
                Ok(acc)
            }
            Point::Infinity => {
                for (root, mult) in &self.factors {
                    // x − root = s^{-1} (1 − root·s)
                    let one = LaurentBivariate::from_ts(&TruncSeries::one(field, n), window);
                    let factor = one.sub(&LaurentBivariate::monomial(root, 1, window));
                    acc = acc.mul(&factor.pow_i(*mult)?);
                }
                Ok(acc.mul_s_pow(-self.degree()))
            }
        }
    }
}

fn default_local_root(root: &TruncSeries) -> TruncSeries {
    let k = root.prec().min(2);
    root.truncate(k)
        .and_then(|r| r.zero_extend(root.prec()))
        .expect("truncation within bounds")
}

/// Exact polynomial product over K[t]/(t^N) (constant-first coefficients).
pub(crate) fn poly_mul(a: &[TruncSeries], b: &[TruncSeries]) -> Vec<TruncSeries> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let field = a[0].field();
    let n = a[0].prec();
    let mut out = vec![TruncSeries::zero(field, n); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if bj.is_zero() {
                continue;
            }
            out[i + j] = out[i + j].add(&ai.mul(bj));
        }
    }
    out
}

/// Exact polynomial sum over K[t]/(t^N).
pub(crate) fn poly_add(a: &[TruncSeries], b: &[TruncSeries]) -> Vec<TruncSeries> {
    let field = a
        .first()
        .or_else(|| b.first())
        .expect("one operand nonempty")
        .field();
    let n = a.first().or_else(|| b.first()).unwrap().prec();
    let len = a.len().max(b.len());
    let mut out = vec![TruncSeries::zero(field, n); len];
    for (i, ai) in a.iter().enumerate() {
        out[i] = out[i].add(ai);
    }
    for (i, bi) in b.iter().enumerate() {
        out[i] = out[i].add(bi);
    }
    out
}

/// Per-location goodness report for a family of rational functions.
#[derive(Debug, Clone)]
pub struct LocationReport {
    pub location: Location,
    /// All roots over this location agree mod t².
    pub good: bool,
    /// The default local root: first root of the cluster truncated mod t².
    pub default_local_root: TruncSeries,
    /// Pairs of roots violating the congruence.
    pub offending: Vec<(TruncSeries, TruncSeries)>,
}

/// Goodness analysis for a family of factored rationals.
#[derive(Debug, Clone)]
pub struct GoodnessReport {
    pub locations: Vec<LocationReport>,
    pub all_good: bool,
}

/// Cluster all roots of all functions by special value and check that each
/// cluster is coherent mod t² (then a common uniformizer lift exists at each
/// location and every function is good there). Infinity needs no check: in
/// the coordinate 1/s every factored rational is automatically good.
pub fn goodness_check(fns: &[&FactoredRational]) -> GoodnessReport {
    let mut clusters: BTreeMap<FieldElement, Vec<TruncSeries>> = BTreeMap::new();
    for f in fns {
        for (root, _) in f.factors() {
            clusters
                .entry(root.special_value().clone())
                .or_default()
                .push(root.clone());
        }
    }
    let mut locations = Vec::new();
    let mut all_good = true;
    for (center, mut roots) in clusters {
        roots.sort();
        roots.dedup();
        let mut offending = Vec::new();
        for i in 0..roots.len() {
            for j in i + 1..roots.len() {
                if !roots[i].congruent_mod(&roots[j], 2.min(roots[i].prec())) {
                    offending.push((roots[i].clone(), roots[j].clone()));
                }
            }
        }
        let good = offending.is_empty();
        all_good &= good;
        locations.push(LocationReport {
            location: Location::Finite(center),
            good,
            default_local_root: default_local_root(&roots[0]),
            offending,
        });
    }
    GoodnessReport {
        locations,
        all_good,
    }
}

/// Replace every root over the point's location by the point's local root —
/// legal exactly when all of them agree with it mod t², which makes the
/// output congruent mod t² to the input and good at the point.
///
/// # Errors
/// [`Error::NotGoodAtPoint`] when some root over the location is not
/// congruent to the chosen local root mod t².
pub fn good_local_lift(
    fns: &[FactoredRational; 3],
    at: &Point,
) -> Result<[FactoredRational; 3]> {
    let (center, local_root) = match at {
        Point::Infinity => return Ok(fns.clone()),
        Point::Finite { center, local_root } => (center, local_root),
    };
    let mut out = Vec::with_capacity(3);
    for f in fns {
        let mut factors = Vec::with_capacity(f.factors().len());
        for (root, mult) in f.factors() {
            if root.special_value() == center {
                if !root.congruent_mod(local_root, 2.min(root.prec())) {
                    return Err(Error::NotGoodAtPoint(format!(
                        "root {root} over {center} is not congruent mod t² to the local root {local_root}"
                    )));
                }
                factors.push((local_root.clone(), *mult));
            } else {
                factors.push((root.clone(), *mult));
            }
        }
        out.push(FactoredRational::new(f.lead().clone(), factors)?);
    }
    Ok([out[0].clone(), out[1].clone(), out[2].clone()])
}

/// All support locations of a family: every finite location carrying a root,
/// plus infinity.
pub fn support_locations(fns: &[&FactoredRational]) -> Vec<Location> {
    let mut locs: Vec<Location> = goodness_check(fns)
        .locations
        .into_iter()
        .map(|r| r.location)
        .collect();
    locs.push(Location::Infinity);
    locs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ktheory::GoodElement;
    use crate::numfield::{rat, FieldOps};
    use crate::series::DEFAULT_WINDOW;

    fn q() -> Arc<NumberField> {
        NumberField::rationals()
    }

    fn ts(vals: &[i64]) -> TruncSeries {
        let f = q();
        TruncSeries::from_coeffs(&f, 3, vals.iter().map(|&v| f.from_i(v)).collect()).unwrap()
    }

    fn fr(lead: &[i64], factors: &[(&[i64], i64)]) -> FactoredRational {
        FactoredRational::new(
            ts(lead),
            factors.iter().map(|(r, m)| (ts(r), *m)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn mul_and_inverse_cancel() {
        let f = fr(&[1], &[(&[1], 1)]); // x - 1
        let p = f.mul(&f.inv().unwrap()).unwrap();
        assert_eq!(p, FactoredRational::one(&q(), 3));
        // leads multiply
        let a = fr(&[2], &[]);
        let b = fr(&[3], &[]);
        assert_eq!(a.mul(&b).unwrap().lead(), &ts(&[6]));
        // multiplicity cancellation
        let ab = fr(&[1], &[(&[1], 1), (&[2], 1)]);
        let binv = fr(&[1], &[(&[2], -1)]);
        assert_eq!(ab.mul(&binv).unwrap(), fr(&[1], &[(&[1], 1)]));
    }

    #[test]
    fn expansion_examples() {
        // (x−1)(x+1) → x² − 1
        let f = fr(&[1], &[(&[1], 1), (&[-1], 1)]);
        let (num, den) = f.expand();
        assert_eq!(num, vec![ts(&[-1]), ts(&[0]), ts(&[1])]);
        assert_eq!(den, vec![ts(&[1])]);
        // lead only → 1-term polynomials
        let c = fr(&[5], &[]);
        let (num, den) = c.expand();
        assert_eq!(num, vec![ts(&[5])]);
        assert_eq!(den, vec![ts(&[1])]);
        // 2(x−t) at N = 2
        let f2 = q();
        let lead = TruncSeries::from_coeffs(&f2, 2, vec![f2.from_i(2)]).unwrap();
        let root = TruncSeries::zero(&f2, 2).with_coeff(1, f2.one());
        let g = FactoredRational::new(lead, vec![(root, 1)]).unwrap();
        let (num, _) = g.expand();
        assert_eq!(
            num,
            vec![
                TruncSeries::zero(&f2, 2).with_coeff(1, f2.from_i(-2)),
                TruncSeries::from_coeffs(&f2, 2, vec![f2.from_i(2)]).unwrap()
            ]
        );
        // denominators go to the den side
        let h = fr(&[1], &[(&[1], 1), (&[2], -2)]);
        let (hn, hd) = h.expand();
        assert_eq!(hn, vec![ts(&[-1]), ts(&[1])]);
        assert_eq!(hd, vec![ts(&[4]), ts(&[-4]), ts(&[1])]);
    }

    #[test]
    fn divisor_examples() {
        // x/(x−1): {0: +1, 1: −1}, degree balance keeps ∞ out
        let f = fr(&[1], &[(&[0], 1), (&[1], -1)]);
        let d = f.divisor();
        assert_eq!(d.entries().len(), 2);
        assert_eq!(d.degree(), 0);
        // (x−1)³ → {1: 3, ∞: −3}
        let g = fr(&[1], &[(&[1], 3)]);
        let d = g.divisor();
        assert_eq!(d.entries().len(), 2);
        assert!(matches!(d.entries()[1], (Point::Infinity, -3)));
        assert_eq!(d.degree(), 0);
        // constants have empty divisors
        assert!(fr(&[7], &[]).divisor().entries().is_empty());
        // mul adds divisors
        let fg = f.mul(&g).unwrap();
        let mut sums: BTreeMap<Location, i64> = BTreeMap::new();
        for (p, m) in f.divisor().entries().iter().chain(g.divisor().entries()) {
            *sums.entry(p.location()).or_insert(0) += m;
        }
        sums.retain(|_, m| *m != 0);
        let got: BTreeMap<Location, i64> = fg
            .divisor()
            .entries()
            .iter()
            .map(|(p, m)| (p.location(), *m))
            .collect();
        assert_eq!(got, sums);
    }

    #[test]
    fn evaluation_examples() {
        let f2 = q();
        // (x−t)/x at 1+t → 1/(1+t) = 1 − t + t²
        let root_t = TruncSeries::zero(&f2, 3).with_coeff(1, f2.one());
        let f = FactoredRational::new(
            TruncSeries::one(&f2, 3),
            vec![(root_t, 1), (TruncSeries::zero(&f2, 3), -1)],
        )
        .unwrap();
        let at = ts(&[1, 1, 0]);
        assert_eq!(f.evaluate(&at).unwrap(), ts(&[1, -1, 1]));
        // x − 1 at 2 → 1
        assert!(fr(&[1], &[(&[1], 1)]).evaluate(&ts(&[2])).unwrap().is_one());
        // x at t → not a unit
        let x = fr(&[1], &[(&[0], 1)]);
        let t = TruncSeries::zero(&q(), 3).with_coeff(1, q().one());
        assert_eq!(
            x.evaluate(&t).unwrap_err().code(),
            "evaluation-at-divisor"
        );
    }

    #[test]
    fn local_expansion_at_finite_points() {
        let f2 = q();
        // x at Finite(0, 0) → s
        let x = fr(&[1], &[(&[0], 1)]);
        let p0 = Point::finite(f2.zero(), TruncSeries::zero(&f2, 3)).unwrap();
        let e = x.expand_local(&p0, DEFAULT_WINDOW).unwrap();
        assert!(e.is_exact());
        assert_eq!(e.val(), Some(1));
        assert!(e.coeff(1).unwrap().is_one());
        // x − (a₀ + a₁ t) at Finite(a₀, a₀) → s − a₁ t, with a₀ = 2, a₁ = 5
        let root = ts(&[2, 5, 0]);
        let g = FactoredRational::new(TruncSeries::one(&f2, 3), vec![(root, 1)]).unwrap();
        let p = Point::finite(f2.from_i(2), TruncSeries::from_elem(&f2.from_i(2), 3)).unwrap();
        let e = g.expand_local(&p, DEFAULT_WINDOW).unwrap();
        assert_eq!(e.coeff(1).unwrap(), TruncSeries::one(&f2, 3));
        assert_eq!(
            e.coeff(0).unwrap(),
            TruncSeries::zero(&f2, 3).with_coeff(1, f2.from_i(-5))
        );
    }

    #[test]
    fn local_expansion_at_infinity() {
        let f2 = q();
        // x − r at ∞ → s⁻¹(1 − r·s), r = 3
        let g = fr(&[1], &[(&[3], 1)]);
        let e = g.expand_local(&Point::Infinity, DEFAULT_WINDOW).unwrap();
        assert!(e.is_exact());
        assert_eq!(e.coeff(-1).unwrap(), TruncSeries::one(&f2, 3));
        assert_eq!(e.coeff(0).unwrap(), TruncSeries::from_elem(&f2.from_i(-3), 3));
        assert!(e.coeff(1).unwrap().is_zero());
    }

    #[test]
    fn local_expansion_is_multiplicative() {
        let f = fr(&[2, 1, 0], &[(&[0], 1), (&[1], -2), (&[4, 1, 0], 1)]);
        let g = fr(&[1, 0, 1], &[(&[0], -1), (&[2], 1)]);
        let prod = f.mul(&g).unwrap();
        let f2 = q();
        let at = Point::finite(f2.zero(), TruncSeries::zero(&f2, 3)).unwrap();
        for p in [at, Point::Infinity] {
            let lhs = prod.expand_local(&p, DEFAULT_WINDOW).unwrap();
            let rhs = f
                .expand_local(&p, DEFAULT_WINDOW)
                .unwrap()
                .mul(&g.expand_local(&p, DEFAULT_WINDOW).unwrap());
            assert!(lhs.agrees_with(&rhs), "at {p}");
        }
    }

    #[test]
    fn goodness_detects_t_level_splits() {
        // x and x − t share location 0, roots differ at t¹ → not good
        let f2 = q();
        let x = fr(&[1], &[(&[0], 1)]);
        let xt = FactoredRational::new(
            TruncSeries::one(&f2, 3),
            vec![(TruncSeries::zero(&f2, 3).with_coeff(1, f2.one()), 1)],
        )
        .unwrap();
        let rep = goodness_check(&[&x, &xt]);
        assert!(!rep.all_good);
        assert_eq!(rep.locations.len(), 1);
        assert!(!rep.locations[0].good);
        assert_eq!(rep.locations[0].offending.len(), 1);
        // x and x − t² agree mod t² → good
        let xt2 = FactoredRational::new(
            TruncSeries::one(&f2, 3),
            vec![(TruncSeries::zero(&f2, 3).with_coeff(2, f2.one()), 1)],
        )
        .unwrap();
        assert!(goodness_check(&[&x, &xt2]).all_good);
        // disjoint divisors are always good
        let far = fr(&[1], &[(&[9], 1)]);
        assert!(goodness_check(&[&x, &far]).all_good);
    }

    #[test]
    fn good_local_lift_replaces_cluster_roots() {
        let f2 = q();
        // roots t² and 2t² over 0, local root 0 → both become 0 (merged)
        let r1 = TruncSeries::zero(&f2, 3).with_coeff(2, f2.one());
        let r2 = TruncSeries::zero(&f2, 3).with_coeff(2, f2.from_i(2));
        let one = TruncSeries::one(&f2, 3);
        let y1 = FactoredRational::new(one.clone(), vec![(r1, 1)]).unwrap();
        let y2 = FactoredRational::new(one.clone(), vec![(r2, 1)]).unwrap();
        let y3 = FactoredRational::one(&f2, 3);
        let at = Point::finite(f2.zero(), TruncSeries::zero(&f2, 3)).unwrap();
        let lifted = good_local_lift(&[y1.mul(&y2).unwrap(), y2.clone(), y3], &at).unwrap();
        assert_eq!(lifted[0].factors(), &[(TruncSeries::zero(&f2, 3), 2)]);
        // x − (1+t²) at Finite(1, 1+5t²) → x − (1+5t²)
        let root = one.clone().with_coeff(2, f2.one());
        let lr = one.clone().with_coeff(2, f2.from_i(5));
        let g = FactoredRational::new(one.clone(), vec![(root, 1)]).unwrap();
        let at1 = Point::finite(f2.one(), lr.clone()).unwrap();
        let lifted = good_local_lift(
            &[g.clone(), FactoredRational::one(&f2, 3), FactoredRational::one(&f2, 3)],
            &at1,
        )
        .unwrap();
        assert_eq!(lifted[0].factors(), &[(lr, 1)]);
        // a t¹-level mismatch is rejected
        let bad_root = TruncSeries::zero(&f2, 3).with_coeff(1, f2.one());
        let bad = FactoredRational::new(one.clone(), vec![(bad_root, 1)]).unwrap();
        assert_eq!(
            good_local_lift(
                &[bad, FactoredRational::one(&f2, 3), FactoredRational::one(&f2, 3)],
                &at
            )
            .unwrap_err()
            .code(),
            "not-good-at-point"
        );
    }

    #[test]
    fn lifted_functions_are_good_at_the_point() {
        let f2 = q();
        // y has two roots over 0 congruent mod t², plus a distant root
        let r1 = TruncSeries::zero(&f2, 3).with_coeff(2, f2.from_i(3));
        let r2 = TruncSeries::zero(&f2, 3).with_coeff(2, f2.from_i(-1));
        let y = FactoredRational::new(
            ts(&[2, 1, 0]),
            vec![(r1.clone(), 2), (r2, -1), (ts(&[5, 1, 1]), 1)],
        )
        .unwrap();
        let at = Point::finite(f2.zero(), TruncSeries::zero(&f2, 3)).unwrap();
        let lifted = good_local_lift(
            &[y.clone(), FactoredRational::one(&f2, 3), FactoredRational::one(&f2, 3)],
            &at,
        )
        .unwrap();
        // expansion decomposes as s^a · unit: GoodElement::decompose succeeds
        let e = lifted[0].expand_local(&at, DEFAULT_WINDOW).unwrap();
        let g = GoodElement::decompose(&e).unwrap();
        assert_eq!(g.valuation(), 1);
        // and is congruent mod t² to the unlifted expansion
        let e0 = y.expand_local(&at, DEFAULT_WINDOW).unwrap();
        assert!(e.congruent_mod_t2(&e0));
    }

    #[test]
    fn evaluate_with_rational_coefficients() {
        let f2 = q();
        // (x − 1/2)² at 3/4 → 1/16
        let root = TruncSeries::from_elem(&f2.from_rat(rat(1, 2)), 3);
        let g = FactoredRational::new(TruncSeries::one(&f2, 3), vec![(root, 2)]).unwrap();
        let v = g
            .evaluate(&TruncSeries::from_elem(&f2.from_rat(rat(3, 4)), 3))
            .unwrap();
        assert_eq!(v, TruncSeries::from_elem(&f2.from_rat(rat(1, 16)), 3));
    }
}
