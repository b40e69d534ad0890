//! Formal wedges of units, residue maps on Λ² and Λ³, the ℓ map, Bloch
//! symbols, δ and Δ, the five-term combination, and the additive
//! dilogarithm ℓi₂.
//!
//! Wedge expressions are formal integer-linear combinations of ordered pairs
//! or triples of ring units, normalized by sorting with sign bookkeeping;
//! repeated entries and entries containing the ring unit 1 are dropped. They
//! support exactly the multilinear bookkeeping the residue maps need — they
//! do not know multiplicative relations between opaque units, which is why
//! the uniformizer-independence of `res_wedge3` is asserted after applying ℓ
//! (the two formal outputs name the same element of Λ² through different
//! symbols).

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numfield::{FieldElement, FieldOps, NumberField};
use crate::series::{LaurentBivariate, TruncSeries};

/// Ring elements that can appear in a formal wedge.
pub trait WedgeTerm: Clone + Eq + Ord {
    /// Is this the multiplicative identity (dropped from wedges)?
    fn is_ring_one(&self) -> bool;
}

impl WedgeTerm for TruncSeries {
    fn is_ring_one(&self) -> bool {
        self.is_one()
    }
}

impl WedgeTerm for FieldElement {
    fn is_ring_one(&self) -> bool {
        self.is_one()
    }
}

impl WedgeTerm for LaurentBivariate {
    fn is_ring_one(&self) -> bool {
        self.is_exact()
            && self.val() == Some(0)
            && self
                .coeff(0)
                .map(|c| c.is_one())
                .unwrap_or(false)
            && self.coeff(1).map(|c| c.is_zero()).unwrap_or(true)
    }
}

/// Formal integer combination of wedges a ∧ b of units of a common ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wedge2<T: WedgeTerm> {
    /// Canonical entries: coefficient, then the two terms in sorted order.
    entries: Vec<(i64, T, T)>,
}

impl<T: WedgeTerm> Wedge2<T> {
    pub fn zero() -> Wedge2<T> {
        Wedge2 { entries: Vec::new() }
    }

    /// The single wedge a ∧ b.
    pub fn term(a: T, b: T) -> Wedge2<T> {
        Wedge2::from_terms(vec![(1, a, b)])
    }

    pub fn from_terms(terms: Vec<(i64, T, T)>) -> Wedge2<T> {
        let mut entries = Vec::new();
        for (n, a, b) in terms {
            if n == 0 || a == b || a.is_ring_one() || b.is_ring_one() {
                continue;
            }
            if a < b {
                entries.push((n, a, b));
            } else {
                entries.push((-n, b, a));
            }
        }
        entries.sort_by(|x, y| (&x.1, &x.2).cmp(&(&y.1, &y.2)));
        let mut merged: Vec<(i64, T, T)> = Vec::new();
        for (n, a, b) in entries {
            match merged.last_mut() {
                Some((m, pa, pb)) if *pa == a && *pb == b => *m += n,
                _ => merged.push((n, a, b)),
            }
        }
        merged.retain(|(n, _, _)| *n != 0);
        Wedge2 { entries: merged }
    }

    pub fn entries(&self) -> &[(i64, T, T)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn add(&self, other: &Wedge2<T>) -> Wedge2<T> {
        let mut terms = self.entries.clone();
        terms.extend(other.entries.iter().cloned());
        Wedge2::from_terms(terms)
    }

    pub fn neg(&self) -> Wedge2<T> {
        self.scale(-1)
    }

    pub fn scale(&self, k: i64) -> Wedge2<T> {
        Wedge2::from_terms(
            self.entries
                .iter()
                .map(|(n, a, b)| (n * k, a.clone(), b.clone()))
                .collect(),
        )
    }
}

/// Formal integer combination of wedges a ∧ b ∧ c of units of a common ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wedge3<T: WedgeTerm> {
    entries: Vec<(i64, T, T, T)>,
}

impl<T: WedgeTerm> Wedge3<T> {
    pub fn zero() -> Wedge3<T> {
        Wedge3 { entries: Vec::new() }
    }

    pub fn term(a: T, b: T, c: T) -> Wedge3<T> {
        Wedge3::from_terms(vec![(1, a, b, c)])
    }

    pub fn from_terms(terms: Vec<(i64, T, T, T)>) -> Wedge3<T> {
        let mut entries = Vec::new();
        for (mut n, a, b, c) in terms {
            if n == 0
                || a == b
                || b == c
                || a == c
                || a.is_ring_one()
                || b.is_ring_one()
                || c.is_ring_one()
            {
                continue;
            }
            // sort the triple, tracking the permutation sign
            let mut t = [a, b, c];
            for i in 0..2 {
                for j in 0..2 - i {
                    if t[j] > t[j + 1] {
                        t.swap(j, j + 1);
                        n = -n;
                    }
                }
            }
            let [a, b, c] = t;
            entries.push((n, a, b, c));
        }
        entries.sort_by(|x, y| (&x.1, &x.2, &x.3).cmp(&(&y.1, &y.2, &y.3)));
        let mut merged: Vec<(i64, T, T, T)> = Vec::new();
        for (n, a, b, c) in entries {
            match merged.last_mut() {
                Some((m, pa, pb, pc)) if *pa == a && *pb == b && *pc == c => *m += n,
                _ => merged.push((n, a, b, c)),
            }
        }
        merged.retain(|(n, _, _, _)| *n != 0);
        Wedge3 { entries: merged }
    }

    pub fn entries(&self) -> &[(i64, T, T, T)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }
}

/// The map ℓ: Λ²(K[t]/(t^N))^× → K, sending u ∧ v to
/// log°(u)[t²]·log°(v)[t] − log°(u)[t]·log°(v)[t²], extended linearly.
///
/// # Errors
/// [`Error::PrecisionTooLow`] when any entry has t-precision < 3;
/// [`Error::NotUnit`] when an entry is not a unit.
pub fn ell(field: &Arc<NumberField>, w: &Wedge2<TruncSeries>) -> Result<FieldElement> {
    let mut acc = field.zero();
    for (n, a, b) in w.entries() {
        if a.prec() < 3 || b.prec() < 3 {
            return Err(Error::PrecisionTooLow(format!(
                "ℓ needs t-precision ≥ 3, got {}",
                a.prec().min(b.prec())
            )));
        }
        let la = a.log_circ()?;
        let lb = b.log_circ()?;
        let term = la.coeff(2).mul(lb.coeff(1)).sub(&la.coeff(1).mul(lb.coeff(2)));
        acc = acc.add(&term.mul(&field.from_i(*n)));
    }
    Ok(acc)
}

/// An element of the local ring K((s))[t]/(t^N) written as π^a · u with
/// π = s and u a unit of the subring with nonnegative s-valuation
/// (Definition 3.1.1 shape). Only such "good" elements admit residues.
#[derive(Debug, Clone)]
pub struct GoodElement {
    valuation: i64,
    unit: LaurentBivariate,
}

impl GoodElement {
    /// Decompose y = s^a · u.
    ///
    /// # Errors
    /// [`Error::NotGood`] when y is 0 mod t (no valuation) or when the unit
    /// part falls outside the nonnegative-valuation subring — e.g. s + t,
    /// whose candidate unit part 1 + t/s has a pole.
    pub fn decompose(y: &LaurentBivariate) -> Result<GoodElement> {
        let a = y.mod_t_valuation().map_err(|_| {
            Error::NotGood(format!("{y:?} is 0 mod t and has no s-valuation"))
        })?;
        let unit = y.mul_s_pow(-a);
        if unit.val().is_some_and(|v| v < 0) {
            return Err(Error::NotGood(format!(
                "unit part of {y:?} has negative s-valuation coefficients"
            )));
        }
        Ok(GoodElement { valuation: a, unit })
    }

    /// The exponent a in y = π^a · u.
    pub fn valuation(&self) -> i64 {
        self.valuation
    }

    /// The unit part u.
    pub fn unit(&self) -> &LaurentBivariate {
        &self.unit
    }

    /// The reduction ū of the unit part mod π, an element of K[t]/(t^N).
    ///
    /// # Errors
    /// [`Error::WindowExhausted`] when the constant s-coefficient is unknown.
    pub fn unit_reduced(&self) -> Result<TruncSeries> {
        self.unit.coeff(0)
    }
}

fn assert_shared_ring(gs: &[&GoodElement]) -> Result<()> {
    for w in gs.windows(2) {
        if w[0].unit.field() != w[1].unit.field() || w[0].unit.t_prec() != w[1].unit.t_prec() {
            return Err(Error::FieldMismatch(
                "residue arguments live in different local rings".to_string(),
            ));
        }
    }
    Ok(())
}

/// Residue on Λ³: sends π^{a₁}u₁ ∧ π^{a₂}u₂ ∧ π^{a₃}u₃ to
/// a₁·(ū₂∧ū₃) − a₂·(ū₁∧ū₃) + a₃·(ū₁∧ū₂) in Λ² of the residue ring
/// K[t]/(t^N) — the unique extension of res(π ∧ u₂ ∧ u₃) = ū₂ ∧ ū₃ that is
/// multilinear, antisymmetric, and kills wedges of units.
pub fn res_wedge3(
    g1: &GoodElement,
    g2: &GoodElement,
    g3: &GoodElement,
) -> Result<Wedge2<TruncSeries>> {
    assert_shared_ring(&[g1, g2, g3])?;
    let u1 = g1.unit_reduced()?;
    let u2 = g2.unit_reduced()?;
    let u3 = g3.unit_reduced()?;
    let mut w = Wedge2::zero();
    w = w.add(&Wedge2::from_terms(vec![(g1.valuation(), u2.clone(), u3.clone())]));
    w = w.add(&Wedge2::from_terms(vec![(-g2.valuation(), u1.clone(), u3)]));
    w = w.add(&Wedge2::from_terms(vec![(g3.valuation(), u1, u2)]));
    Ok(w)
}

/// Residue on Λ²: sends π^{a₁}u ∧ π^{a₂}v to the unit v̄^{a₁} · ū^{−a₂} of
/// the residue ring (multiplicative Λ¹ output, n = 2 case of the same
/// characterization).
pub fn res_wedge2(g1: &GoodElement, g2: &GoodElement) -> Result<TruncSeries> {
    assert_shared_ring(&[g1, g2])?;
    let u = g1.unit_reduced()?;
    let v = g2.unit_reduced()?;
    Ok(v.pow_i(g1.valuation())?.mul(&u.pow_i(-g2.valuation())?))
}

/// A Bloch symbol {x}₂: a unit x with 1 − x also a unit (the ♭ condition).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlochSymbol {
    arg: TruncSeries,
}

impl BlochSymbol {
    /// Wrap x, enforcing ♭.
    ///
    /// # Errors
    /// [`Error::NotFlat`] unless both x and 1 − x are units.
    pub fn new(x: TruncSeries) -> Result<BlochSymbol> {
        let one_minus = TruncSeries::one(x.field(), x.prec()).sub(&x);
        if !x.is_unit() || !one_minus.is_unit() {
            return Err(Error::NotFlat(format!(
                "{x} fails the ♭ condition: x(0) = {}",
                x.special_value()
            )));
        }
        Ok(BlochSymbol { arg: x })
    }

    pub fn arg(&self) -> &TruncSeries {
        &self.arg
    }

    /// 1 − x (a unit, by construction).
    pub fn one_minus(&self) -> TruncSeries {
        TruncSeries::one(self.arg.field(), self.arg.prec()).sub(&self.arg)
    }
}

/// The additive dilogarithm ℓi₂({s + at}₂) = −a³ / (2 s² (1−s)²), evaluated
/// on the reduction of the symbol's argument mod t².
pub fn li2(sym: &BlochSymbol) -> Result<FieldElement> {
    let field = sym.arg().field().clone();
    let s = sym.arg().special_value().clone();
    let a = if sym.arg().prec() >= 2 {
        sym.arg().coeff(1).clone()
    } else {
        field.zero()
    };
    let one_minus_s = field.one().sub(&s);
    let den = s.mul(&s).mul(&one_minus_s).mul(&one_minus_s).mul(&field.from_i(2));
    a.mul(&a).mul(&a).neg().div(&den)
}

/// ℓi₂ computed through ℓ: returns ℓ((1−α) ∧ α). Agrees with [`li2`] of
/// α mod t² — the factorization of ℓ∘δ through B₂(K₂).
///
/// # Errors
/// [`Error::NotFlat`] when α fails ♭; [`Error::PrecisionTooLow`] when N < 3.
pub fn li2_via_ell(alpha: &TruncSeries) -> Result<FieldElement> {
    let sym = BlochSymbol::new(alpha.clone())?;
    ell(alpha.field(), &delta(&sym))
}

/// δ({x}₂) = (1−x) ∧ x.
pub fn delta(sym: &BlochSymbol) -> Wedge2<TruncSeries> {
    Wedge2::term(sym.one_minus(), sym.arg().clone())
}

/// Δ({x}₂ ⊗ y) = (1−x) ∧ x ∧ y.
pub fn big_delta(sym: &BlochSymbol, y: &TruncSeries) -> Wedge3<TruncSeries> {
    Wedge3::term(sym.one_minus(), sym.arg().clone(), y.clone())
}

/// The five symbols of the five-term combination
/// {x}₂ − {y}₂ + {y/x}₂ − {(1−x⁻¹)/(1−y⁻¹)}₂ + {(1−x)/(1−y)}₂,
/// as (sign, symbol) pairs over K₂ = K[t]/(t²).
///
/// # Errors
/// [`Error::NotFlat`] when x or y fails ♭; [`Error::DifferenceNotUnit`] when
/// x − y is not a unit of K₂ (the arguments collide mod t).
pub fn five_term_symbols(
    x: &BlochSymbol,
    y: &BlochSymbol,
) -> Result<Vec<(i64, BlochSymbol)>> {
    let xs = x.arg().truncate(x.arg().prec().min(2))?;
    let ys = y.arg().truncate(y.arg().prec().min(2))?;
    let (xs, ys) = (xs.zero_extend(2)?, ys.zero_extend(2)?);
    if xs.special_value() == ys.special_value() {
        return Err(Error::DifferenceNotUnit(format!(
            "x − y = {} is not a unit of K₂",
            xs.sub(&ys)
        )));
    }
    let one = TruncSeries::one(xs.field(), 2);
    let arg3 = ys.div(&xs)?;
    let arg4 = one
        .sub(&xs.inv()?)
        .div(&one.sub(&ys.inv()?))?;
    let arg5 = one.sub(&xs).div(&one.sub(&ys))?;
    Ok(vec![
        (1, BlochSymbol::new(xs)?),
        (-1, BlochSymbol::new(ys)?),
        (1, BlochSymbol::new(arg3)?),
        (-1, BlochSymbol::new(arg4)?),
        (1, BlochSymbol::new(arg5)?),
    ])
}

/// Evaluate ℓi₂ on the five-term combination; the contract is that this is
/// always exactly 0.
pub fn five_term_li2(x: &BlochSymbol, y: &BlochSymbol) -> Result<FieldElement> {
    let field = x.arg().field().clone();
    let mut acc = field.zero();
    for (sign, sym) in five_term_symbols(x, y)? {
        acc = acc.add(&li2(&sym)?.mul(&field.from_i(sign)));
    }
    Ok(acc)
}

impl fmt::Display for BlochSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}₂", self.arg)
    }
}
