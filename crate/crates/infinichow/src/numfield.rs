//! Exact arithmetic in ℚ and in number fields K = ℚ[x]/(m(x)).
//!
//! A [`NumberField`] is described by a monic squarefree modulus m with
//! rational coefficients; its elements are represented on the power basis
//! 1, x, ..., x^(d-1). Squarefreeness (gcd(m, m') = 1) is checked at
//! construction, irreducibility deliberately is not: if m factors, the ring
//! ℚ[x]/(m) is a product of fields, and any attempt to invert a zero divisor
//! fails with [`Error::NotInvertible`] naming the offending element. All
//! arithmetic is exact; rationals are kept in lowest terms with positive
//! denominator by `num-rational`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar.
pub type Rat = num_rational::BigRational;

/// Shorthand for small rational constants.
pub fn rat_i(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Shorthand for n/d with d != 0.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parse `"p"` or `"p/q"` into a rational in lowest terms.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::ParseError(format!("invalid rational literal {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num.parse().map_err(|_| bad())?;
    let d: BigInt = den.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(Error::DivisionByZero(format!("rational literal {s:?}")));
    }
    Ok(Rat::new(n, d))
}

/// Render a rational as `"p"` or `"p/q"` (lowest terms, q > 0).
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Dense polynomials over ℚ, coefficients constant-first, no trailing zeros.
pub(crate) mod poly {
    use super::*;

    pub fn trim(v: &mut Vec<Rat>) {
        while v.last().is_some_and(|c| c.is_zero()) {
            v.pop();
        }
    }

    pub fn deg(a: &[Rat]) -> Option<usize> {
        if a.is_empty() {
            None
        } else {
            Some(a.len() - 1)
        }
    }

    pub fn sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); a.len().max(b.len())];
        for (i, c) in a.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in b.iter().enumerate() {
            out[i] -= c;
        }
        trim(&mut out);
        out
    }

    pub fn mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
        for (i, ca) in a.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (j, cb) in b.iter().enumerate() {
                out[i + j] += ca * cb;
            }
        }
        trim(&mut out);
        out
    }

    pub fn scale(a: &[Rat], c: &Rat) -> Vec<Rat> {
        if c.is_zero() {
            return Vec::new();
        }
        a.iter().map(|x| x * c).collect()
    }

    /// Euclidean division a = q b + r with deg r < deg b; b must be nonzero.
    pub fn divrem(a: &[Rat], b: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
        assert!(!b.is_empty(), "division by the zero polynomial");
        let mut r: Vec<Rat> = a.to_vec();
        trim(&mut r);
        let db = b.len() - 1;
        let lb = &b[db];
        if r.len() <= db {
            return (Vec::new(), r);
        }
        let mut q = vec![Rat::zero(); r.len() - db];
        while r.len() > db {
            let dr = r.len() - 1;
            let c = &r[dr] / lb;
            q[dr - db] = c.clone();
            for (i, cb) in b.iter().enumerate() {
                let t = cb * &c;
                r[dr - db + i] -= t;
            }
            trim(&mut r);
            if r.len() <= db {
                break;
            }
        }
        trim(&mut q);
        (q, r)
    }

    /// Monic gcd via the Euclidean algorithm.
    pub fn gcd(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
        let mut x: Vec<Rat> = a.to_vec();
        let mut y: Vec<Rat> = b.to_vec();
        trim(&mut x);
        trim(&mut y);
        while !y.is_empty() {
            let (_, r) = divrem(&x, &y);
            x = y;
            y = r;
        }
        if let Some(l) = x.last().cloned() {
            x = scale(&x, &(Rat::one() / l));
        }
        x
    }

    /// Extended gcd: returns (g, u, v) with u a + v b = g, g monic (or zero).
    pub fn xgcd(a: &[Rat], b: &[Rat]) -> (Vec<Rat>, Vec<Rat>, Vec<Rat>) {
        let mut r0: Vec<Rat> = a.to_vec();
        let mut r1: Vec<Rat> = b.to_vec();
        trim(&mut r0);
        trim(&mut r1);
        let mut s0 = vec![Rat::one()];
        let mut s1: Vec<Rat> = Vec::new();
        let mut t0: Vec<Rat> = Vec::new();
        let mut t1 = vec![Rat::one()];
        while !r1.is_empty() {
            let (q, r) = divrem(&r0, &r1);
            let ns = sub(&s0, &mul(&q, &s1));
            let nt = sub(&t0, &mul(&q, &t1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, ns);
            t0 = std::mem::replace(&mut t1, nt);
        }
        if let Some(l) = r0.last().cloned() {
            let inv = Rat::one() / l;
            r0 = scale(&r0, &inv);
            s0 = scale(&s0, &inv);
            t0 = scale(&t0, &inv);
        }
        (r0, s0, t0)
    }

    pub fn deriv(a: &[Rat]) -> Vec<Rat> {
        let mut out: Vec<Rat> = a
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * rat_i(i as i64))
            .collect();
        trim(&mut out);
        out
    }

    pub fn fmt(a: &[Rat], var: &str) -> String {
        if a.is_empty() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (i, c) in a.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let coeff = fmt_rat(c);
            let part = match i {
                0 => coeff,
                1 if coeff == "1" => var.to_string(),
                1 => format!("{coeff}*{var}"),
                _ if coeff == "1" => format!("{var}^{i}"),
                _ => format!("{coeff}*{var}^{i}"),
            };
            parts.push(part);
        }
        parts.join(" + ")
    }
}

/// A number field (or étale ℚ-algebra) K = ℚ[x]/(m) with m monic squarefree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct NumberField {
    /// Modulus, constant-first, length degree + 1, leading coefficient 1.
    min_poly: Vec<Rat>,
    /// Cosmetic name of the generator used when printing elements.
    label: String,
}

impl NumberField {
    /// Build a field from a monic squarefree modulus (constant-first,
    /// leading coefficient included).
    ///
    /// # Errors
    /// [`Error::NotMonic`] if the leading coefficient is not 1 or the
    /// degree is zero; [`Error::NotSquarefree`] if gcd(m, m') != 1.
    pub fn new(min_poly: Vec<Rat>, label: &str) -> Result<Arc<Self>> {
        let mut m = min_poly;
        poly::trim(&mut m);
        if m.len() < 2 {
            return Err(Error::NotMonic(format!(
                "modulus must have degree >= 1, got {}",
                poly::fmt(&m, label)
            )));
        }
        if !m.last().unwrap().is_one() {
            return Err(Error::NotMonic(poly::fmt(&m, label)));
        }
        let g = poly::gcd(&m, &poly::deriv(&m));
        if poly::deg(&g) != Some(0) {
            return Err(Error::NotSquarefree(format!(
                "{} shares the factor {} with its derivative",
                poly::fmt(&m, label),
                poly::fmt(&g, label)
            )));
        }
        Ok(Arc::new(NumberField {
            min_poly: m,
            label: label.to_string(),
        }))
    }

    /// The rational numbers as the degree-1 field ℚ[x]/(x).
    pub fn rationals() -> Arc<Self> {
        NumberField::new(vec![Rat::zero(), Rat::one()], "x").expect("x is monic squarefree")
    }

    /// Degree of the modulus.
    pub fn degree(&self) -> usize {
        self.min_poly.len() - 1
    }

    /// Modulus coefficients, constant-first, including the leading 1.
    pub fn min_poly(&self) -> &[Rat] {
        &self.min_poly
    }

    /// Printing name of the generator.
    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Element of a number field on the power basis of its generator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct FieldElement {
    field: Arc<NumberField>,
    /// Exactly `degree` coordinates, constant-first.
    coeffs: Vec<Rat>,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", poly::fmt(&self.coeffs, self.field.label()))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", poly::fmt(&self.coeffs, self.field.label()))
    }
}

/// Constructors living on the field handle.
///
/// The receiver is the *field* acting as a factory for its elements, so the
/// `from_*` names take `&self` deliberately.
#[allow(clippy::wrong_self_convention)]
pub trait FieldOps {
    /// The generator x of K = ℚ[x]/(m).
    fn gen(&self) -> FieldElement;
    /// Element from power-basis coordinates (constant-first, length at most
    /// the degree; shorter vectors are zero-padded).
    fn elem(&self, coeffs: Vec<Rat>) -> Result<FieldElement>;
    /// Embed a rational.
    fn from_rat(&self, r: Rat) -> FieldElement;
    /// Embed a small integer.
    fn from_i(&self, n: i64) -> FieldElement;
    /// Additive identity.
    fn zero(&self) -> FieldElement;
    /// Multiplicative identity.
    fn one(&self) -> FieldElement;
}

impl FieldOps for Arc<NumberField> {
    fn gen(&self) -> FieldElement {
        let mut coeffs = vec![Rat::zero(); self.degree()];
        if self.degree() >= 2 {
            coeffs[1] = Rat::one();
        }
        // in the degree-1 case x reduces to the root of the linear modulus
        if self.degree() == 1 {
            coeffs[0] = -self.min_poly()[0].clone();
        }
        FieldElement {
            field: self.clone(),
            coeffs,
        }
    }

    fn elem(&self, coeffs: Vec<Rat>) -> Result<FieldElement> {
        if coeffs.len() > self.degree() {
            return Err(Error::OutOfRange(format!(
                "{} coordinates for a field of degree {}",
                coeffs.len(),
                self.degree()
            )));
        }
        let mut c = coeffs;
        c.resize(self.degree(), Rat::zero());
        Ok(FieldElement {
            field: self.clone(),
            coeffs: c,
        })
    }

    fn from_rat(&self, r: Rat) -> FieldElement {
        let mut coeffs = vec![Rat::zero(); self.degree()];
        coeffs[0] = r;
        FieldElement {
            field: self.clone(),
            coeffs,
        }
    }

    fn from_i(&self, n: i64) -> FieldElement {
        self.from_rat(rat_i(n))
    }

    fn zero(&self) -> FieldElement {
        self.from_rat(Rat::zero())
    }

    fn one(&self) -> FieldElement {
        self.from_rat(Rat::one())
    }
}

impl FieldElement {
    /// The field this element lives in.
    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    /// Power-basis coordinates, constant-first, length = degree.
    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(|c| c.is_zero())
    }

    /// `Some(r)` when all coordinates above the constant vanish.
    pub fn as_rat(&self) -> Option<Rat> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    fn assert_same_field(&self, other: &FieldElement) {
        assert_eq!(
            self.field, other.field,
            "field mismatch must be caught at the API boundary"
        );
    }

    pub fn add(&self, other: &FieldElement) -> FieldElement {
        self.assert_same_field(other);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        FieldElement {
            field: self.field.clone(),
            coeffs,
        }
    }

    pub fn sub(&self, other: &FieldElement) -> FieldElement {
        self.assert_same_field(other);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        FieldElement {
            field: self.field.clone(),
            coeffs,
        }
    }

    pub fn neg(&self) -> FieldElement {
        FieldElement {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }

    pub fn mul(&self, other: &FieldElement) -> FieldElement {
        self.assert_same_field(other);
        let prod = poly::mul(&self.coeffs, &other.coeffs);
        let (_, r) = poly::divrem(&prod, self.field.min_poly());
        let mut coeffs = r;
        coeffs.resize(self.field.degree(), Rat::zero());
        FieldElement {
            field: self.field.clone(),
            coeffs,
        }
    }

    pub fn mul_rat(&self, r: &Rat) -> FieldElement {
        FieldElement {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
        }
    }

    /// Multiplicative inverse.
    ///
    /// # Errors
    /// [`Error::DivisionByZero`] for zero; [`Error::NotInvertible`] when the
    /// element is a zero divisor, which exhibits the modulus as reducible.
    pub fn inv(&self) -> Result<FieldElement> {
        if self.is_zero() {
            return Err(Error::DivisionByZero("inverse of 0".to_string()));
        }
        let (g, u, _) = poly::xgcd(&self.coeffs, self.field.min_poly());
        if poly::deg(&g) != Some(0) {
            return Err(Error::NotInvertible(format!(
                "{self} shares the factor {} with the modulus",
                poly::fmt(&g, self.field.label())
            )));
        }
        let (_, r) = poly::divrem(&u, self.field.min_poly());
        let mut coeffs = r;
        coeffs.resize(self.field.degree(), Rat::zero());
        Ok(FieldElement {
            field: self.field.clone(),
            coeffs,
        })
    }

    pub fn div(&self, other: &FieldElement) -> Result<FieldElement> {
        Ok(self.mul(&other.inv()?))
    }

    /// Integer power, negative exponents via the inverse.
    pub fn pow_i(&self, n: i64) -> Result<FieldElement> {
        let mut base = if n < 0 { self.inv()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = self.field.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        Ok(acc)
    }

    /// Matrix of multiplication by `self` on the power basis, column-major.
    fn mul_matrix(&self) -> Vec<Vec<Rat>> {
        let d = self.field.degree();
        let mut cols = Vec::with_capacity(d);
        let mut cur = self.coeffs.clone(); // self * x^0
        for i in 0..d {
            cols.push(cur.clone());
            if i + 1 < d {
                // multiply by x and reduce
                let mut shifted = vec![Rat::zero(); cur.len() + 1];
                for (k, c) in cur.iter().enumerate() {
                    shifted[k + 1] = c.clone();
                }
                let (_, r) = poly::divrem(&shifted, self.field.min_poly());
                cur = r;
                cur.resize(d, Rat::zero());
            }
        }
        cols
    }

    /// Trace of multiplication by `self`, an exact rational.
    pub fn trace(&self) -> Rat {
        let cols = self.mul_matrix();
        let mut t = Rat::zero();
        for (i, col) in cols.iter().enumerate() {
            t += &col[i];
        }
        t
    }

    /// Norm (determinant of the multiplication matrix), an exact rational.
    pub fn norm(&self) -> Rat {
        let d = self.field.degree();
        // column-major to row-major dense matrix
        let cols = self.mul_matrix();
        let mut m: Vec<Vec<Rat>> = (0..d)
            .map(|i| (0..d).map(|j| cols[j][i].clone()).collect())
            .collect();
        // exact Gaussian elimination with partial pivoting on nonzero entries
        let mut det = Rat::one();
        for k in 0..d {
            let Some(p) = (k..d).find(|&r| !m[r][k].is_zero()) else {
                return Rat::zero();
            };
            if p != k {
                m.swap(p, k);
                det = -det;
            }
            let pivot = m[k][k].clone();
            det *= &pivot;
            let (upper, lower) = m.split_at_mut(k + 1);
            let pivot_row = &upper[k];
            for row in lower.iter_mut() {
                if row[k].is_zero() {
                    continue;
                }
                let f = &row[k] / &pivot;
                for (c, p) in pivot_row.iter().enumerate().skip(k) {
                    let t = p * &f;
                    row[c] -= t;
                }
            }
        }
        det
    }

    /// Naive height: max of |numerator|, |denominator| over the coordinates.
    pub fn height(&self) -> BigInt {
        let mut h = BigInt::one();
        for c in &self.coeffs {
            let n = c.numer().abs();
            let d = c.denom().abs();
            if n > h {
                h = n;
            }
            if d > h {
                h = d;
            }
        }
        h
    }
}
