//! The infinitesimal Chow dilogarithm ρ on triples of good rational
//! functions on ℙ¹ over k₂ = K[t]/(t²), assembled from the per-point
//! invariant ε, plus the reciprocity and residue-compatibility checks of
//! §3.3–3.4.
//!
//! The generic lifting of a triple is the factored input itself (its roots
//! are t-series); at every support point a good local lifting q̃ is produced
//! by [`good_local_lift`], and
//!
//! ε_q̃(p̃) = ℓ(res(q̃)) + res₀ ω(p̃, q̃).
//!
//! ρ is the sum of ε over the divisor locations of the three functions plus
//! infinity; all other points provably contribute 0 and are skipped. Results
//! live in the ambient field; when the caller declares a subfield the final
//! value is asserted to lie in it ([`assert_subfield`]).

use crate::error::{Error, Result};
use crate::ktheory::{ell, li2, res_wedge2, res_wedge3, BlochSymbol, GoodElement};
use crate::numfield::{FieldElement, FieldOps};
use crate::omega::{omega_form, TriplePair};
use crate::ratfun::{
    good_local_lift, goodness_check, poly_add, poly_mul, FactoredRational, GoodnessReport,
    Location, Point,
};
use crate::series::{LaurentBivariate, TruncSeries};

/// A triple of rational functions that is good at every location
/// (Def 3.2.1): at each cluster of roots the members agree mod t².
#[derive(Debug, Clone)]
pub struct RegTriple {
    fns: [FactoredRational; 3],
}

impl RegTriple {
    /// Validate goodness of the triple at every location.
    ///
    /// # Errors
    /// [`Error::NotGood`] naming an offending location when some root
    /// cluster is incoherent mod t²; [`Error::FieldMismatch`] on mixed
    /// coefficient rings.
    pub fn new(fns: [FactoredRational; 3]) -> Result<RegTriple> {
        for f in &fns[1..] {
            if f.field() != fns[0].field() || f.t_prec() != fns[0].t_prec() {
                return Err(Error::FieldMismatch(
                    "triple entries over different coefficient rings".to_string(),
                ));
            }
        }
        let report = goodness_check(&[&fns[0], &fns[1], &fns[2]]);
        if !report.all_good {
            let bad: Vec<String> = report
                .locations
                .iter()
                .filter(|l| !l.good)
                .map(|l| l.location.to_string())
                .collect();
            return Err(Error::NotGood(format!(
                "triple is not good at location(s) {}",
                bad.join(", ")
            )));
        }
        Ok(RegTriple { fns })
    }

    pub fn fns(&self) -> &[FactoredRational; 3] {
        &self.fns
    }

    pub fn goodness(&self) -> GoodnessReport {
        goodness_check(&[&self.fns[0], &self.fns[1], &self.fns[2]])
    }

    /// The support points: one per finite root location (with the cluster's
    /// default local root as uniformizer lift), plus infinity.
    pub fn support_points(&self) -> Vec<Point> {
        let mut pts: Vec<Point> = self
            .goodness()
            .locations
            .into_iter()
            .map(|l| match l.location {
                Location::Finite(center) => Point::Finite {
                    center,
                    local_root: l.default_local_root,
                },
                Location::Infinity => Point::Infinity,
            })
            .collect();
        pts.push(Point::Infinity);
        pts
    }
}

/// The per-point invariant ε_q̃(p̃) = ℓ(res(q̃)) + res₀ ω(p̃, q̃), where q̃
/// is the good local lifting of the triple at the point. When the lifting
/// coincides with the input the ω term is skipped (ω(p, p) = 0).
///
/// # Errors
/// [`Error::NotGoodAtPoint`], [`Error::WindowExhausted`], and arithmetic
/// errors propagate.
pub fn epsilon_at(p: &RegTriple, at: &Point, window: usize) -> Result<FieldElement> {
    let field = p.fns[0].field().clone();
    let q = good_local_lift(&p.fns, at)?;
    let q_exp: Vec<LaurentBivariate> = q
        .iter()
        .map(|f| f.expand_local(at, window))
        .collect::<Result<_>>()?;
    let goods: Vec<GoodElement> = q_exp
        .iter()
        .map(GoodElement::decompose)
        .collect::<Result<_>>()?;
    let mut total = ell(&field, &res_wedge3(&goods[0], &goods[1], &goods[2])?)?;
    if q != p.fns {
        let p_exp: Vec<LaurentBivariate> = p
            .fns
            .iter()
            .map(|f| f.expand_local(at, window))
            .collect::<Result<_>>()?;
        let pair = TriplePair::new(
            [p_exp[0].clone(), p_exp[1].clone(), p_exp[2].clone()],
            [q_exp[0].clone(), q_exp[1].clone(), q_exp[2].clone()],
        )?;
        total = total.add(&omega_form(&pair)?.residue0()?);
    }
    Ok(total)
}

/// The value of ρ together with its per-point decomposition.
#[derive(Debug, Clone)]
pub struct RhoResult {
    pub total: FieldElement,
    pub per_point: Vec<(Location, FieldElement)>,
}

/// The infinitesimal Chow dilogarithm ρ(p) = Σ_points ε_q̃(p̃)
/// (Eq. 3.2.1), summed in sorted location order (finite locations by field
/// element order, then infinity) so output is deterministic.
pub fn rho(p: &RegTriple, window: usize) -> Result<RhoResult> {
    let field = p.fns[0].field().clone();
    let mut total = field.zero();
    let mut per_point = Vec::new();
    for pt in p.support_points() {
        let eps = epsilon_at(p, &pt, window)?;
        total = total.add(&eps);
        per_point.push((pt.location(), eps));
    }
    Ok(RhoResult { total, per_point })
}

/// Assert membership of a value in a declared subfield. The only declared
/// subfield currently supported is `"rational"` (ℚ ⊆ K).
///
/// # Errors
/// [`Error::NotGaloisStable`] when the value has coordinates outside the
/// subfield; [`Error::ParseError`] for an unknown subfield name.
pub fn assert_subfield(value: &FieldElement, subfield: &str) -> Result<()> {
    match subfield {
        "rational" => {
            if value.as_rat().is_some() {
                Ok(())
            } else {
                Err(Error::NotGaloisStable(format!(
                    "{value} does not lie in the rational subfield"
                )))
            }
        }
        other => Err(Error::ParseError(format!(
            "unknown subfield {other:?}; supported: \"rational\""
        ))),
    }
}

fn poly_eq(a: &[TruncSeries], b: &[TruncSeries]) -> bool {
    let trim = |p: &[TruncSeries]| {
        let mut v = p.to_vec();
        while v.last().is_some_and(|c| c.is_zero()) {
            v.pop();
        }
        v
    };
    trim(a) == trim(b)
}

/// Validate that `f` and `one_minus_f` really present x and 1 − x:
/// num_f·den_g + num_g·den_f = den_f·den_g exactly.
fn validate_pair(f: &FactoredRational, one_minus_f: &FactoredRational) -> Result<()> {
    let (nf, df) = f.expand();
    let (ng, dg) = one_minus_f.expand();
    let lhs = poly_add(&poly_mul(&nf, &dg), &poly_mul(&ng, &df));
    let rhs = poly_mul(&df, &dg);
    if poly_eq(&lhs, &rhs) {
        Ok(())
    } else {
        Err(Error::InvalidPair(
            "presented functions do not satisfy f + (1−f) = 1".to_string(),
        ))
    }
}

/// The value of a degree-balanced factored rational at a point (case (ii)
/// of the residue characterization: the point is off |div f|).
fn value_at(f: &FactoredRational, at: &Point) -> Result<TruncSeries> {
    match at {
        Point::Finite { local_root, .. } => f.evaluate(local_root),
        Point::Infinity => {
            if f.degree() != 0 {
                return Err(Error::EvaluationAtDivisor(
                    "value at infinity of a function of nonzero degree".to_string(),
                ));
            }
            Ok(f.lead().clone())
        }
    }
}

/// The residue of {f}₂ ⊗ g at a point: n = ord_point(g) and, when f is ♭
/// at the point (case ii), the symbol {f(point) mod t²}₂; `None` in case (i)
/// (the point meets |div f| ∪ |div(1−f)|) or when n = 0.
///
/// # Errors
/// [`Error::InvalidPair`] when f and one_minus_f do not sum to 1.
pub fn b2_residue(
    f: &FactoredRational,
    one_minus_f: &FactoredRational,
    g: &FactoredRational,
    at: &Point,
) -> Result<(i64, Option<BlochSymbol>)> {
    validate_pair(f, one_minus_f)?;
    let loc = at.location();
    let n = g.ord_at(&loc);
    if n == 0 || f.ord_at(&loc) != 0 || one_minus_f.ord_at(&loc) != 0 {
        return Ok((n, None));
    }
    let v = value_at(f, at)?;
    let sym = BlochSymbol::new(v.truncate(2.min(v.prec()))?)?;
    Ok((n, Some(sym)))
}

/// Prop 3.3.3: the two maps B₂(k(C₂,P₂)) ⊗ k(C₂,P₂)^× → K agree. Returns
/// (LHS, RHS) where LHS = Σ_points ord(g)·ℓi₂(residue symbol) and
/// RHS = ρ((1−f), f, g); the contract is LHS = RHS exactly.
///
/// # Errors
/// [`Error::InvalidPair`], [`Error::NotGood`], and arithmetic errors.
pub fn rho_delta_check(
    f: &FactoredRational,
    one_minus_f: &FactoredRational,
    g: &FactoredRational,
    window: usize,
) -> Result<(FieldElement, FieldElement)> {
    validate_pair(f, one_minus_f)?;
    let field = f.field().clone();
    let triple = RegTriple::new([one_minus_f.clone(), f.clone(), g.clone()])?;
    let mut lhs = field.zero();
    for pt in triple.support_points() {
        let (n, sym) = b2_residue(f, one_minus_f, g, &pt)?;
        if let Some(sym) = sym {
            lhs = lhs.add(&li2(&sym)?.mul(&field.from_i(n)));
        }
    }
    let rhs = rho(&triple, window)?.total;
    Ok((lhs, rhs))
}

/// Prop 3.4.1 (Weil reciprocity over k₂): the product over all points of
/// the signed local residues of f ∧ g,
/// (−1)^{a₁a₂} · v̄^{a₁} ū^{−a₂} reduced mod t², always equals 1.
///
/// # Errors
/// [`Error::NotGoodAtPoint`] when the pair cannot be lifted at some shared
/// location; arithmetic errors propagate.
pub fn reciprocity2(
    f: &FactoredRational,
    g: &FactoredRational,
    window: usize,
) -> Result<TruncSeries> {
    let field = f.field().clone();
    let n = f.t_prec();
    let one = FactoredRational::one(&field, n);
    let report = goodness_check(&[f, g]);
    let mut points: Vec<Point> = report
        .locations
        .into_iter()
        .map(|l| match l.location {
            Location::Finite(center) => Point::Finite {
                center,
                local_root: l.default_local_root,
            },
            Location::Infinity => Point::Infinity,
        })
        .collect();
    points.push(Point::Infinity);
    let mut acc = TruncSeries::one(&field, n);
    for pt in points {
        let lifted = good_local_lift(&[f.clone(), g.clone(), one.clone()], &pt)?;
        let ef = GoodElement::decompose(&lifted[0].expand_local(&pt, window)?)?;
        let eg = GoodElement::decompose(&lifted[1].expand_local(&pt, window)?)?;
        let local = res_wedge2(&ef, &eg)?;
        let sign = if (ef.valuation() * eg.valuation()) % 2 != 0 {
            -1
        } else {
            1
        };
        acc = acc.mul(&local.scale(&field.from_i(sign)));
    }
    acc.truncate(2.min(n))
}

/// Well-definedness of ρ over k₂: a second triple whose leads and roots
/// agree with the first mod t² must produce the identical ρ. Returns the
/// equality verdict.
///
/// # Errors
/// [`Error::NotCongruent`] when the triples do not match mod t².
pub fn lifting_independence_check(
    p: &RegTriple,
    q: &RegTriple,
    window: usize,
) -> Result<bool> {
    for (fp, fq) in p.fns.iter().zip(q.fns.iter()) {
        let k = 2.min(fp.t_prec());
        let shadow = |f: &FactoredRational| -> Result<Vec<(TruncSeries, i64)>> {
            let mut v = f
                .factors()
                .iter()
                .map(|(r, m)| Ok((r.truncate(k)?, *m)))
                .collect::<Result<Vec<_>>>()?;
            v.sort();
            Ok(v)
        };
        if !fp.lead().congruent_mod(fq.lead(), k) || shadow(fp)? != shadow(fq)? {
            return Err(Error::NotCongruent(
                "the two liftings differ below t²".to_string(),
            ));
        }
    }
    Ok(rho(p, window)?.total == rho(q, window)?.total)
}
