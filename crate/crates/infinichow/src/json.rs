//! The JSON request/response layer behind the `infinichow` driver.
//!
//! A request is one JSON object:
//!
//! ```json
//! {
//!   "command": "li2",
//!   "field": {"name": "theta", "min_poly": ["3","6","7","2","1"]},
//!   "t_prec": 3,
//!   "s_window": 16,
//!   "seed": 0,
//!   "assert_subfield": "rational",
//!   "payload": {"s": "1/2", "a": "1"}
//! }
//! ```
//!
//! and the response is `{"status":"ok","value":…}` (plus `"breakdown"`
//! where the command has per-point or per-face details) or
//! `{"status":"error","error":{"code":…,"message":…}}`. All values are
//! exact: rationals are canonical `"p/q"` strings, field elements are
//! coordinate vectors on the power basis (compressed to a bare rational
//! string whenever the element lies in ℚ), series are coefficient arrays
//! constant-term first. Floating-point numbers are rejected on input and
//! never produced on output.
//!
//! Responses are rendered with sorted keys, so equal requests produce
//! byte-identical responses. Payload objects may carry `_`-prefixed keys
//! as comments; any other unknown key is a [`Error::ParseError`].

use std::sync::Arc;

use serde_json::{Map, Value};

use crate::cycles::{faces_report, rho_f, Cycle, Side};
use crate::error::{Error, Result};
use crate::ktheory::{
    ell, five_term_li2, five_term_symbols, li2, BlochSymbol, Wedge2,
};
use crate::numfield::{rat_i, FieldElement, FieldOps, NumberField, Rat};
use crate::omega::{omega_form, omega_residue, TriplePair};
use crate::ratfun::{FactoredRational, Location};
use crate::regulator::{assert_subfield, reciprocity2, rho, RegTriple};
use crate::series::{LaurentBivariate, TruncSeries, DEFAULT_T_PREC, DEFAULT_WINDOW};
use crate::suites::{run_suite, SUITE_NAMES};

/// The command registry, in documentation order.
pub const COMMANDS: [&str; 10] = [
    "li2",
    "five-term",
    "ell",
    "omega",
    "residue",
    "rho-p1",
    "rho-cycle",
    "faces",
    "reciprocity-check",
    "invariant-suite",
];

/// Sanity bounds on request parameters (the artifact is a batch tool, not
/// a service, but a typo should not allocate gigabytes).
const MAX_T_PREC: u64 = 64;
const MAX_WINDOW: u64 = 1024;
const MAX_TRIALS: u64 = 100_000;

/// Default trial count for `invariant-suite` when the payload omits it.
pub const DEFAULT_TRIALS: usize = 10;

/// Process one request given as raw text; returns the response and the
/// process exit code (0 ok, 1 computation error, 2 parse/request error).
pub fn run_request_str(input: &str) -> (Value, i32) {
    let response = match serde_json::from_str::<Value>(input) {
        Ok(v) => run_request(&v),
        Err(e) => error_response(&Error::ParseError(format!("invalid JSON: {e}"))),
    };
    let code = exit_code(&response);
    (response, code)
}

/// Process one parsed request. Never panics on malformed input: every
/// failure becomes a structured error response.
pub fn run_request(request: &Value) -> Value {
    match dispatch(request) {
        Ok(response) => response,
        Err(e) => error_response(&e),
    }
}

/// The exit code a driver should report for a response: 0 for ok, 2 for a
/// request-level rejection (malformed JSON, schema violation, unknown
/// command or suite), 1 for any computation error.
pub fn exit_code(response: &Value) -> i32 {
    if response.get("status").and_then(Value::as_str) == Some("ok") {
        return 0;
    }
    let code = response
        .get("error")
        .and_then(|e| e.get("code"))
        .and_then(Value::as_str)
        .unwrap_or("");
    match code {
        "parse-error" | "unknown-command" | "unknown-suite" => 2,
        _ => 1,
    }
}

fn error_response(e: &Error) -> Value {
    let mut err = Map::new();
    err.insert("code".to_string(), Value::String(e.code().to_string()));
    err.insert("message".to_string(), Value::String(e.to_string()));
    let mut m = Map::new();
    m.insert("status".to_string(), Value::String("error".to_string()));
    m.insert("error".to_string(), Value::Object(err));
    Value::Object(m)
}

fn ok_response(value: Value, breakdown: Option<Value>) -> Value {
    let mut m = Map::new();
    m.insert("status".to_string(), Value::String("ok".to_string()));
    m.insert("value".to_string(), value);
    if let Some(b) = breakdown {
        m.insert("breakdown".to_string(), b);
    }
    Value::Object(m)
}

// ---------------------------------------------------------------- parsing

fn parse_err(msg: impl Into<String>) -> Error {
    Error::ParseError(msg.into())
}

/// Reject keys outside `allowed`, except `_`-prefixed comment keys.
fn check_keys(obj: &Map<String, Value>, what: &str, allowed: &[&str]) -> Result<()> {
    for key in obj.keys() {
        if !key.starts_with('_') && !allowed.contains(&key.as_str()) {
            return Err(parse_err(format!(
                "unknown key \"{key}\" in {what} (allowed: {})",
                allowed.join(", ")
            )));
        }
    }
    Ok(())
}

fn as_object<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| parse_err(format!("{what} must be a JSON object")))
}

fn get_required<'a>(obj: &'a Map<String, Value>, key: &str, what: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| parse_err(format!("{what} is missing required key \"{key}\"")))
}

fn parse_u64(v: &Value, what: &str, max: u64) -> Result<u64> {
    let n = v
        .as_u64()
        .ok_or_else(|| parse_err(format!("{what} must be a non-negative integer")))?;
    if n > max {
        return Err(parse_err(format!("{what} = {n} exceeds the maximum {max}")));
    }
    Ok(n)
}

fn parse_i64(v: &Value, what: &str) -> Result<i64> {
    v.as_i64()
        .ok_or_else(|| parse_err(format!("{what} must be an integer")))
}

/// A rational from a canonical `"p/q"` (or `"p"`) string or an integer
/// JSON number. Non-integer numbers are rejected: the artifact is exact.
fn parse_rat(v: &Value, what: &str) -> Result<Rat> {
    match v {
        Value::String(s) => s
            .trim()
            .parse::<Rat>()
            .map_err(|e| parse_err(format!("{what}: \"{s}\" is not a rational: {e}"))),
        Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(rat_i(i)),
            None => Err(parse_err(format!(
                "{what}: {n} is not an exact integer; write rationals as \"p/q\" strings"
            ))),
        },
        _ => Err(parse_err(format!(
            "{what} must be a rational string or an integer"
        ))),
    }
}

fn rat_to_json(r: &Rat) -> Value {
    Value::String(r.to_string())
}

/// A field element: a scalar (the rational embedded as a constant) or an
/// array of at most `degree` coordinates on the power basis.
fn parse_elem(field: &Arc<NumberField>, v: &Value, what: &str) -> Result<FieldElement> {
    match v {
        Value::Array(items) => {
            let coords = items
                .iter()
                .enumerate()
                .map(|(i, c)| parse_rat(c, &format!("{what}[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            field.elem(coords).map_err(|e| {
                parse_err(format!("{what}: {e}"))
            })
        }
        _ => Ok(field.from_rat(parse_rat(v, what)?)),
    }
}

fn elem_to_json(e: &FieldElement) -> Value {
    match e.as_rat() {
        Some(r) => rat_to_json(&r),
        None => Value::Array(e.coeffs().iter().map(rat_to_json).collect()),
    }
}

/// A truncated series at precision `t_prec`: an array of coefficient
/// elements, constant term first, padded with zeros (an over-long array is
/// an error), or a scalar for a constant series.
fn parse_series(
    field: &Arc<NumberField>,
    t_prec: usize,
    v: &Value,
    what: &str,
) -> Result<TruncSeries> {
    match v {
        Value::Array(items) => {
            if items.len() > t_prec {
                return Err(parse_err(format!(
                    "{what} has {} coefficients; t_prec is {t_prec}",
                    items.len()
                )));
            }
            let mut coeffs = items
                .iter()
                .enumerate()
                .map(|(i, c)| parse_elem(field, c, &format!("{what}[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            coeffs.resize(t_prec, field.zero());
            TruncSeries::from_coeffs(field, t_prec, coeffs)
        }
        _ => Ok(TruncSeries::from_elem(
            &parse_elem(field, v, what)?,
            t_prec,
        )),
    }
}

fn series_to_json(ts: &TruncSeries) -> Value {
    Value::Array(ts.coeffs().iter().map(elem_to_json).collect())
}

/// A factored rational function
/// `{"lead": series, "factors": [[root-series, mult], …]}`; both keys are
/// optional (`lead` defaults to 1, `factors` to none).
fn parse_factored(
    field: &Arc<NumberField>,
    t_prec: usize,
    v: &Value,
    what: &str,
) -> Result<FactoredRational> {
    let obj = as_object(v, what)?;
    check_keys(obj, what, &["lead", "factors"])?;
    let lead = match obj.get("lead") {
        Some(l) => parse_series(field, t_prec, l, &format!("{what}.lead"))?,
        None => TruncSeries::one(field, t_prec),
    };
    let mut factors = Vec::new();
    if let Some(fv) = obj.get("factors") {
        let items = fv
            .as_array()
            .ok_or_else(|| parse_err(format!("{what}.factors must be an array")))?;
        for (i, item) in items.iter().enumerate() {
            let fwhat = format!("{what}.factors[{i}]");
            let pair = item
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| parse_err(format!("{fwhat} must be a [root, mult] pair")))?;
            let root = parse_series(field, t_prec, &pair[0], &format!("{fwhat} root"))?;
            let mult = parse_i64(&pair[1], &format!("{fwhat} multiplicity"))?;
            factors.push((root, mult));
        }
    }
    FactoredRational::new(lead, factors)
}

/// A cycle `{"components": [{"mult": int, "coords": [f, f, f]}, …]}`.
fn parse_cycle(field: &Arc<NumberField>, t_prec: usize, v: &Value, what: &str) -> Result<Cycle> {
    let obj = as_object(v, what)?;
    check_keys(obj, what, &["components"])?;
    let comps = get_required(obj, "components", what)?
        .as_array()
        .ok_or_else(|| parse_err(format!("{what}.components must be an array")))?;
    let mut components = Vec::new();
    for (i, item) in comps.iter().enumerate() {
        let cwhat = format!("{what}.components[{i}]");
        let cobj = as_object(item, &cwhat)?;
        check_keys(cobj, &cwhat, &["mult", "coords"])?;
        let mult = match cobj.get("mult") {
            Some(m) => parse_i64(m, &format!("{cwhat}.mult"))?,
            None => 1,
        };
        let coords = get_required(cobj, "coords", &cwhat)?
            .as_array()
            .filter(|c| c.len() == 3)
            .ok_or_else(|| {
                parse_err(format!("{cwhat}.coords must be an array of 3 functions"))
            })?;
        let mut parsed = Vec::with_capacity(3);
        for (j, c) in coords.iter().enumerate() {
            parsed.push(parse_factored(
                field,
                t_prec,
                c,
                &format!("{cwhat}.coords[{j}]"),
            )?);
        }
        let coords: [FactoredRational; 3] = parsed.try_into().expect("length 3");
        components.push((mult, coords));
    }
    Cycle::new(components)
}

/// A bivariate Laurent element: `{"terms": [[k, series], …]}` with integer
/// s-exponents, or a bare series (s-constant shorthand).
fn parse_laurent(
    field: &Arc<NumberField>,
    t_prec: usize,
    window: usize,
    v: &Value,
    what: &str,
) -> Result<LaurentBivariate> {
    if let Value::Object(obj) = v {
        check_keys(obj, what, &["terms"])?;
        let terms = get_required(obj, "terms", what)?
            .as_array()
            .ok_or_else(|| parse_err(format!("{what}.terms must be an array")))?;
        let mut acc = LaurentBivariate::zero(field, t_prec, window);
        for (i, item) in terms.iter().enumerate() {
            let twhat = format!("{what}.terms[{i}]");
            let pair = item
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| {
                    parse_err(format!("{twhat} must be a [s-exponent, series] pair"))
                })?;
            let k = parse_i64(&pair[0], &format!("{twhat} exponent"))?;
            let ts = parse_series(field, t_prec, &pair[1], &format!("{twhat} coefficient"))?;
            acc = acc.add(&LaurentBivariate::monomial(&ts, k, window));
        }
        Ok(acc)
    } else {
        Ok(LaurentBivariate::from_ts(
            &parse_series(field, t_prec, v, what)?,
            window,
        ))
    }
}

/// The coefficient field: absent (or `"rational"`) for ℚ, or
/// `{"name": label, "min_poly": [c₀, …]}`. A minimal polynomial whose last
/// entry is 1 is taken verbatim (degree = length − 1); otherwise it lists
/// the low coefficients of a monic polynomial (degree = length).
fn parse_field(v: Option<&Value>) -> Result<Arc<NumberField>> {
    let v = match v {
        None | Some(Value::Null) => return Ok(NumberField::rationals()),
        Some(v) => v,
    };
    if let Value::String(s) = v {
        return match s.to_lowercase().as_str() {
            "rational" | "rationals" | "q" => Ok(NumberField::rationals()),
            other => Err(parse_err(format!(
                "unknown field name \"{other}\"; describe number fields as {{\"name\": …, \"min_poly\": […]}}"
            ))),
        };
    }
    let obj = as_object(v, "field")?;
    check_keys(obj, "field", &["name", "label", "min_poly"])?;
    if obj.contains_key("name") && obj.contains_key("label") {
        return Err(parse_err(
            "field takes \"name\" or its alias \"label\", not both",
        ));
    }
    let name = match obj.get("name").or_else(|| obj.get("label")) {
        Some(n) => n
            .as_str()
            .ok_or_else(|| parse_err("field.name must be a string"))?,
        None => "a",
    };
    let poly = match obj.get("min_poly") {
        Some(p) => p
            .as_array()
            .ok_or_else(|| parse_err("field.min_poly must be an array of rationals"))?,
        None => return Ok(NumberField::rationals()),
    };
    let mut coeffs = poly
        .iter()
        .enumerate()
        .map(|(i, c)| parse_rat(c, &format!("field.min_poly[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let monic = coeffs.len() >= 2 && coeffs.last() == Some(&rat_i(1));
    if !monic {
        coeffs.push(rat_i(1));
    }
    NumberField::new(coeffs, name)
}

// ------------------------------------------------------------- dispatch

struct Ctx {
    field: Arc<NumberField>,
    t_prec: usize,
    window: usize,
    seed: u64,
    subfield: Option<String>,
}

impl Ctx {
    /// Enforce the request invariant for commands touching ℓ, ω, ρ, ρ_f.
    fn require_prec3(&self, command: &str) -> Result<()> {
        if self.t_prec < 3 {
            return Err(parse_err(format!(
                "command \"{command}\" needs t_prec ≥ 3; got {}",
                self.t_prec
            )));
        }
        Ok(())
    }

    /// Apply `assert_subfield` to an element-valued result.
    fn checked(&self, value: FieldElement) -> Result<FieldElement> {
        if let Some(name) = &self.subfield {
            assert_subfield(&value, name)?;
        }
        Ok(value)
    }

    /// Commands without an element-valued result reject `assert_subfield`.
    fn reject_subfield(&self, command: &str) -> Result<()> {
        if self.subfield.is_some() {
            return Err(parse_err(format!(
                "assert_subfield does not apply to command \"{command}\""
            )));
        }
        Ok(())
    }
}

fn dispatch(request: &Value) -> Result<Value> {
    let obj = as_object(request, "request")?;
    check_keys(
        obj,
        "request",
        &[
            "command",
            "field",
            "t_prec",
            "s_window",
            "payload",
            "seed",
            "assert_subfield",
        ],
    )?;
    let command = get_required(obj, "command", "request")?
        .as_str()
        .ok_or_else(|| parse_err("command must be a string"))?
        .trim()
        .to_lowercase()
        .replace('_', "-");
    let ctx = Ctx {
        field: parse_field(obj.get("field"))?,
        t_prec: match obj.get("t_prec") {
            Some(v) => parse_u64(v, "t_prec", MAX_T_PREC)?.max(1) as usize,
            None => DEFAULT_T_PREC,
        },
        window: match obj.get("s_window") {
            Some(v) => parse_u64(v, "s_window", MAX_WINDOW)?.max(1) as usize,
            None => DEFAULT_WINDOW,
        },
        seed: match obj.get("seed") {
            Some(v) => parse_u64(v, "seed", u64::MAX)?,
            None => 0,
        },
        subfield: match obj.get("assert_subfield") {
            Some(v) => Some(
                v.as_str()
                    .ok_or_else(|| parse_err("assert_subfield must be a string"))?
                    .to_string(),
            ),
            None => None,
        },
    };
    let empty = Value::Object(Map::new());
    let payload = obj.get("payload").unwrap_or(&empty);
    match command.as_str() {
        "li2" => cmd_li2(&ctx, payload),
        "five-term" => cmd_five_term(&ctx, payload),
        "ell" => cmd_ell(&ctx, payload),
        "omega" => cmd_omega(&ctx, payload),
        "residue" => cmd_residue(&ctx, payload),
        "rho-p1" => cmd_rho_p1(&ctx, payload),
        "rho-cycle" => cmd_rho_cycle(&ctx, payload),
        "faces" => cmd_faces(&ctx, payload),
        "reciprocity-check" => cmd_reciprocity(&ctx, payload),
        "invariant-suite" => cmd_invariant_suite(&ctx, payload),
        other => Err(Error::UnknownCommand(format!(
            "{other} (known commands: {})",
            COMMANDS.join(", ")
        ))),
    }
}

/// `li2`: ℓi₂({s + a·t}₂) for payload elements `s` and `a`.
fn cmd_li2(ctx: &Ctx, payload: &Value) -> Result<Value> {
    let obj = as_object(payload, "payload")?;
    check_keys(obj, "payload", &["s", "a"])?;
    let s = parse_elem(&ctx.field, get_required(obj, "s", "payload")?, "payload.s")?;
    let a = parse_elem(&ctx.field, get_required(obj, "a", "payload")?, "payload.a")?;
    let arg = TruncSeries::from_coeffs(&ctx.field, 2, vec![s, a])?;
    let value = ctx.checked(li2(&BlochSymbol::new(arg)?)?)?;
    Ok(ok_response(elem_to_json(&value), None))
}

/// `five-term`: the alternating ℓi₂ sum over the five symbols generated by
/// prec-2 series `x` and `y`; the breakdown lists the five symbols.
fn cmd_five_term(ctx: &Ctx, payload: &Value) -> Result<Value> {
    let obj = as_object(payload, "payload")?;
    check_keys(obj, "payload", &["x", "y"])?;
    let x = BlochSymbol::new(parse_series(
        &ctx.field,
        2,
        get_required(obj, "x", "payload")?,
        "payload.x",
    )?)?;
    let y = BlochSymbol::new(parse_series(
        &ctx.field,
        2,
        get_required(obj, "y", "payload")?,
        "payload.y",
    )?)?;
    let value = ctx.checked(five_term_li2(&x, &y)?)?;
    let symbols: Vec<Value> = five_term_symbols(&x, &y)?
        .into_iter()
        .map(|(sign, sym)| {
            Value::Array(vec![
                Value::Number(sign.into()),
                series_to_json(sym.arg()),
            ])
        })
        .collect();
    let mut b = Map::new();
    b.insert("symbols".to_string(), Value::Array(symbols));
    Ok(ok_response(elem_to_json(&value), Some(Value::Object(b))))
}

/// `ell`: the map ℓ on a sum of wedges; payload
/// `{"terms": [[f, g], …]}` (or `[[n, f, g], …]` with integer weights).
fn cmd_ell(ctx: &Ctx, payload: &Value) -> Result<Value> {
    ctx.require_prec3("ell")?;
    let obj = as_object(payload, "payload")?;
    check_keys(obj, "payload", &["terms"])?;
    let items = get_required(obj, "terms", "payload")?
        .as_array()
        .ok_or_else(|| parse_err("payload.terms must be an array"))?;
    let mut terms = Vec::new();
    for (i, item) in items.iter().enumerate() {
        let twhat = format!("payload.terms[{i}]");
        let parts = item
            .as_array()
            .filter(|p| p.len() == 2 || p.len() == 3)
            .ok_or_else(|| {
                parse_err(format!("{twhat} must be [f, g] or [weight, f, g]"))
            })?;
        let (n, fv, gv) = if parts.len() == 2 {
            (1, &parts[0], &parts[1])
        } else {
            (
                parse_i64(&parts[0], &format!("{twhat} weight"))?,
                &parts[1],
                &parts[2],
            )
        };
        let f = parse_series(&ctx.field, ctx.t_prec, fv, &format!("{twhat} f"))?;
        let g = parse_series(&ctx.field, ctx.t_prec, gv, &format!("{twhat} g"))?;
        terms.push((n, f, g));
    }
    let value = ctx.checked(ell(&ctx.field, &Wedge2::from_terms(terms))?)?;
    Ok(ok_response(elem_to_json(&value), None))
}

fn parse_triple_pair(ctx: &Ctx, payload: &Value) -> Result<TriplePair> {
    let obj = as_object(payload, "payload")?;
    check_keys(obj, "payload", &["tilde", "hat"])?;
    let mut sides = Vec::with_capacity(2);
    for key in ["tilde", "hat"] {
        let arr = get_required(obj, key, "payload")?
            .as_array()
            .filter(|a| a.len() == 3)
            .ok_or_else(|| {
                parse_err(format!("payload.{key} must be an array of 3 Laurent elements"))
            })?;
        let mut triple = Vec::with_capacity(3);
        for (i, v) in arr.iter().enumerate() {
            triple.push(parse_laurent(
                &ctx.field,
                ctx.t_prec,
                ctx.window,
                v,
                &format!("payload.{key}[{i}]"),
            )?);
        }
        let triple: [LaurentBivariate; 3] = triple.try_into().expect("length 3");
        sides.push(triple);
    }
    let hat = sides.pop().expect("two sides");
    let tilde = sides.pop().expect("two sides");
    TriplePair::new(tilde, hat)
}

/// `omega`: the 1-form ω(p̃, p̂) = c(s)·ds; the value lists the known
/// nonzero s-Laurent coefficients of c(s) (each a constant of the field)
/// together with the form's residue at s = 0.
fn cmd_omega(ctx: &Ctx, payload: &Value) -> Result<Value> {
    ctx.require_prec3("omega")?;
    ctx.reject_subfield("omega")?;
    let pair = parse_triple_pair(ctx, payload)?;
    let form = omega_form(&pair)?;
    let coeff = form.coeff();
    let mut terms = Vec::new();
    if let (Some(lo), Some(hi)) = (coeff.val(), coeff.known_hi()) {
        for k in lo..hi {
            let c = coeff.coeff(k)?;
            if !c.is_zero() {
                terms.push(Value::Array(vec![
                    Value::Number(k.into()),
                    elem_to_json(c.special_value()),
                ]));
            }
        }
    }
    let mut value = Map::new();
    value.insert("ds_terms".to_string(), Value::Array(terms));
    if let Some(hi) = coeff.known_hi() {
        value.insert("known_below".to_string(), Value::Number(hi.into()));
    }
    value.insert("residue".to_string(), elem_to_json(&form.residue0()?));
    Ok(ok_response(Value::Object(value), None))
}

/// `residue`: res₀ ω(p̃, p̂), an element of the field.
fn cmd_residue(ctx: &Ctx, payload: &Value) -> Result<Value> {
    ctx.require_prec3("residue")?;
    let pair = parse_triple_pair(ctx, payload)?;
    let value = ctx.checked(omega_residue(&pair)?)?;
    Ok(ok_response(elem_to_json(&value), None))
}

fn location_to_json(loc: &Location) -> Value {
    match loc {
        Location::Finite(c) => {
            let mut m = Map::new();
            m.insert("finite".to_string(), elem_to_json(c));
            Value::Object(m)
        }
        Location::Infinity => Value::String("infinity".to_string()),
    }
}

/// `rho-p1`: the regulator ρ of a good triple of factored rationals, with
/// the per-point ε decomposition as the breakdown.
fn cmd_rho_p1(ctx: &Ctx, payload: &Value) -> Result<Value> {
    ctx.require_prec3("rho-p1")?;
    let obj = as_object(payload, "payload")?;
    check_keys(obj, "payload", &["triple", "functions"])?;
    if obj.contains_key("triple") && obj.contains_key("functions") {
        return Err(parse_err(
            "payload takes \"triple\" or its alias \"functions\", not both",
        ));
    }
    let arr = obj
        .get("triple")
        .or_else(|| obj.get("functions"))
        .ok_or_else(|| parse_err("payload.triple is required"))?
        .as_array()
        .filter(|a| a.len() == 3)
        .ok_or_else(|| parse_err("payload.triple must be an array of 3 functions"))?;
    let mut fns = Vec::with_capacity(3);
    for (i, v) in arr.iter().enumerate() {
        fns.push(parse_factored(
            &ctx.field,
            ctx.t_prec,
            v,
            &format!("payload.triple[{i}]"),
        )?);
    }
    let fns: [FactoredRational; 3] = fns.try_into().expect("length 3");
    let triple = RegTriple::new(fns)?;
    let result = rho(&triple, ctx.window)?;
    let total = ctx.checked(result.total)?;
    let per_point: Vec<Value> = result
        .per_point
        .iter()
        .map(|(loc, eps)| {
            let mut m = Map::new();
            m.insert("location".to_string(), location_to_json(loc));
            m.insert("epsilon".to_string(), elem_to_json(eps));
            Value::Object(m)
        })
        .collect();
    let mut b = Map::new();
    b.insert("per_point".to_string(), Value::Array(per_point));
    Ok(ok_response(elem_to_json(&total), Some(Value::Object(b))))
}

fn side_str(side: Side) -> &'static str {
    match side {
        Side::Zero => "zero",
        Side::Infinity => "infinity",
    }
}

/// The signed weight face (i, side) carries in ∂ = Σᵢ (−1)^i (∂ᵢ^∞ − ∂ᵢ⁰).
fn face_sign(i: usize, side: Side) -> i64 {
    let sign_inf: i64 = if i % 2 == 1 { -1 } else { 1 };
    match side {
        Side::Infinity => sign_inf,
        Side::Zero => -sign_inf,
    }
}

fn face_reports_json(z: &Cycle, with_points: bool) -> Result<Vec<Value>> {
    faces_report(z)?
        .into_iter()
        .map(|report| {
            let sign = face_sign(report.i, report.side);
            let contribution = report.l_sum.mul(&z.field().from_i(sign));
            let mut m = Map::new();
            m.insert(
                "face".to_string(),
                Value::String(format!("d{}-{}", report.i, side_str(report.side))),
            );
            m.insert("l_sum".to_string(), elem_to_json(&report.l_sum));
            m.insert("sign".to_string(), Value::Number(sign.into()));
            m.insert("contribution".to_string(), elem_to_json(&contribution));
            if with_points {
                let points: Vec<Value> = report
                    .points
                    .iter()
                    .map(|p| {
                        let mut pm = Map::new();
                        if let Some(loc) = &p.location {
                            pm.insert("location".to_string(), location_to_json(loc));
                        }
                        if let Some(at) = &p.at {
                            pm.insert("at".to_string(), series_to_json(at));
                        }
                        pm.insert(
                            "pair".to_string(),
                            Value::Array(vec![
                                series_to_json(&p.pair.0),
                                series_to_json(&p.pair.1),
                            ]),
                        );
                        pm.insert("mult".to_string(), Value::Number(p.mult.into()));
                        pm.insert("on_boundary".to_string(), Value::Bool(p.on_boundary));
                        Value::Object(pm)
                    })
                    .collect();
                m.insert("points".to_string(), Value::Array(points));
            } else {
                m.insert(
                    "points".to_string(),
                    Value::Number(report.points.len().into()),
                );
            }
            Ok(Value::Object(m))
        })
        .collect()
}

/// `rho-cycle`: the cycle regulator ρ_f; the payload is the cycle object
/// itself, and the breakdown gives each face's signed contribution.
fn cmd_rho_cycle(ctx: &Ctx, payload: &Value) -> Result<Value> {
    ctx.require_prec3("rho-cycle")?;
    let z = parse_cycle(&ctx.field, ctx.t_prec, payload, "payload")?;
    let value = ctx.checked(rho_f(&z)?)?;
    let mut b = Map::new();
    b.insert(
        "faces".to_string(),
        Value::Array(face_reports_json(&z, false)?),
    );
    Ok(ok_response(elem_to_json(&value), Some(Value::Object(b))))
}

/// `faces`: the full six-face report of a cycle, points included.
fn cmd_faces(ctx: &Ctx, payload: &Value) -> Result<Value> {
    ctx.require_prec3("faces")?;
    ctx.reject_subfield("faces")?;
    let z = parse_cycle(&ctx.field, ctx.t_prec, payload, "payload")?;
    Ok(ok_response(Value::Array(face_reports_json(&z, true)?), None))
}

/// `reciprocity-check`: the Weil product of Prop 3.4.1 for a pair of
/// functions; the value is the product in K[t]/(t²) (always 1).
fn cmd_reciprocity(ctx: &Ctx, payload: &Value) -> Result<Value> {
    ctx.require_prec3("reciprocity-check")?;
    ctx.reject_subfield("reciprocity-check")?;
    let obj = as_object(payload, "payload")?;
    check_keys(obj, "payload", &["f", "g"])?;
    let f = parse_factored(
        &ctx.field,
        ctx.t_prec,
        get_required(obj, "f", "payload")?,
        "payload.f",
    )?;
    let g = parse_factored(
        &ctx.field,
        ctx.t_prec,
        get_required(obj, "g", "payload")?,
        "payload.g",
    )?;
    let product = reciprocity2(&f, &g, ctx.window)?;
    let mut b = Map::new();
    b.insert("is_one".to_string(), Value::Bool(product.is_one()));
    Ok(ok_response(series_to_json(&product), Some(Value::Object(b))))
}

fn outcome_to_json(out: &crate::suites::SuiteOutcome) -> Value {
    let mut m = Map::new();
    m.insert("name".to_string(), Value::String(out.name.clone()));
    m.insert("trials".to_string(), Value::Number(out.trials.into()));
    m.insert("seed".to_string(), Value::Number(out.seed.into()));
    m.insert("t_prec".to_string(), Value::Number(out.t_prec.into()));
    m.insert("window".to_string(), Value::Number(out.window.into()));
    m.insert("height".to_string(), Value::Number(out.height.into()));
    m.insert("passed".to_string(), Value::Bool(out.passed));
    if let Some((trial, payload)) = &out.counterexample {
        let mut c = Map::new();
        c.insert("trial".to_string(), Value::Number((*trial).into()));
        c.insert("payload".to_string(), Value::String(payload.clone()));
        m.insert("counterexample".to_string(), Value::Object(c));
    }
    if let Some(w) = &out.warning {
        m.insert("warning".to_string(), Value::String(w.clone()));
    }
    Value::Object(m)
}

/// `invariant-suite`: run named randomized suites (all of them when
/// `names` is omitted) for `trials` trials from the request seed. Suites
/// use their own documented sampling parameters, recorded per outcome.
fn cmd_invariant_suite(ctx: &Ctx, payload: &Value) -> Result<Value> {
    ctx.reject_subfield("invariant-suite")?;
    let obj = as_object(payload, "payload")?;
    check_keys(obj, "payload", &["names", "trials"])?;
    let names: Vec<String> = match obj.get("names") {
        Some(v) => v
            .as_array()
            .ok_or_else(|| parse_err("payload.names must be an array of suite names"))?
            .iter()
            .map(|n| {
                n.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| parse_err("payload.names entries must be strings"))
            })
            .collect::<Result<Vec<_>>>()?,
        None => SUITE_NAMES.iter().map(|s| s.to_string()).collect(),
    };
    let trials = match obj.get("trials") {
        Some(v) => parse_u64(v, "payload.trials", MAX_TRIALS)? as usize,
        None => DEFAULT_TRIALS,
    };
    let outcomes = names
        .iter()
        .map(|name| run_suite(name, trials, ctx.seed))
        .collect::<Result<Vec<_>>>()?;
    let all_passed = outcomes.iter().all(|o| o.passed);
    let value: Vec<Value> = outcomes.iter().map(outcome_to_json).collect();
    let mut b = Map::new();
    b.insert("all_passed".to_string(), Value::Bool(all_passed));
    Ok(ok_response(Value::Array(value), Some(Value::Object(b))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(s: &str) -> (Value, i32) {
        run_request_str(s)
    }

    #[test]
    fn the_li2_example() {
        let (resp, code) = run(r#"{"command":"li2","payload":{"s":"1/2","a":"1"}}"#);
        assert_eq!(code, 0);
        assert_eq!(resp["status"], "ok");
        assert_eq!(resp["value"], "-8");
    }

    #[test]
    fn unknown_commands_exit_2() {
        let (resp, code) = run(r#"{"command":"unknown"}"#);
        assert_eq!(code, 2);
        assert_eq!(resp["status"], "error");
        assert_eq!(resp["error"]["code"], "unknown-command");
    }

    #[test]
    fn malformed_json_exits_2() {
        let (resp, code) = run("{nope");
        assert_eq!(code, 2);
        assert_eq!(resp["error"]["code"], "parse-error");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let (resp, code) = run(r#"{"command":"li2","payloda":{}}"#);
        assert_eq!(code, 2);
        assert!(resp["error"]["message"]
            .as_str()
            .unwrap()
            .contains("payloda"));
    }

    #[test]
    fn floats_are_rejected() {
        let (resp, code) = run(r#"{"command":"li2","payload":{"s":0.5,"a":1}}"#);
        assert_eq!(code, 2);
        assert!(resp["error"]["message"].as_str().unwrap().contains("p/q"));
    }

    #[test]
    fn domain_errors_exit_1() {
        // s = 1 makes 1 − x a non-unit: ♭ fails
        let (resp, code) = run(r#"{"command":"li2","payload":{"s":"1","a":"1"}}"#);
        assert_eq!(code, 1);
        assert_eq!(resp["status"], "error");
        assert_eq!(resp["error"]["code"], "not-flat");
    }

    #[test]
    fn low_precision_rho_requests_are_rejected() {
        let (resp, code) = run(
            r#"{"command":"rho-cycle","t_prec":2,"payload":{"components":[]}}"#,
        );
        assert_eq!(code, 2);
        assert!(resp["error"]["message"].as_str().unwrap().contains("t_prec"));
    }

    #[test]
    fn rho_p1_reports_the_per_point_breakdown() {
        // the Totaro element a = 2/7 + 5t: ρ = ℓi₂({a}₂) = −12005/8
        let req = r#"{"command":"rho-p1","payload":{"triple":[
            {"lead":"-1","factors":[["1",1]]},
            {"factors":[["0",1]]},
            {"factors":[[["2/7","5"],1],["0",-1]]}
        ]}}"#;
        let (resp, code) = run(req);
        assert_eq!(code, 0, "{resp}");
        assert_eq!(resp["value"], "-12005/8");
        let per_point = resp["breakdown"]["per_point"].as_array().unwrap();
        assert!(!per_point.is_empty());
        for p in per_point {
            assert!(p["location"].is_object() || p["location"] == "infinity");
            assert!(p["epsilon"].is_string());
        }
        // "functions" is accepted as an alias, but not alongside "triple"
        let alias = req.replace("\"triple\"", "\"functions\"");
        let (resp2, code) = run(&alias);
        assert_eq!(code, 0);
        assert_eq!(resp2, resp);
        let both = req.replace(
            r#""triple":["#,
            r#""functions":[],"triple":["#,
        );
        let (resp3, code) = run(&both);
        assert_eq!(code, 2);
        assert!(resp3["error"]["message"].as_str().unwrap().contains("alias"));
    }

    #[test]
    fn omega_reports_coefficients_and_residue() {
        // p̃ = p̂ ⇒ ω = 0 with residue 0; the keys are always present
        let triple = r#"[{"terms":[[1,["1","1"]]]},{"terms":[[0,["2","0","1"]]]},{"terms":[[-1,"3"]]}]"#;
        let req = format!(
            r#"{{"command":"omega","payload":{{"tilde":{triple},"hat":{triple}}}}}"#
        );
        let (resp, code) = run(&req);
        assert_eq!(code, 0, "{resp}");
        assert_eq!(resp["value"]["residue"], "0");
        assert_eq!(resp["value"]["ds_terms"].as_array().unwrap().len(), 0);
    }

    #[test]
    fn responses_are_byte_identical() {
        let req = r#"{"command":"invariant-suite","seed":5,"payload":{"names":["p4"],"trials":2}}"#;
        let (a, _) = run(req);
        let (b, _) = run(req);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn five_term_values_vanish() {
        let (resp, code) = run(
            r#"{"command":"five-term","payload":{"x":["2","5"],"y":["3","-1"]}}"#,
        );
        assert_eq!(code, 0);
        assert_eq!(resp["value"], "0");
        assert_eq!(resp["breakdown"]["symbols"].as_array().unwrap().len(), 5);
    }

    #[test]
    fn subfield_assertions_apply() {
        // over ℚ(√2), ρ of a good triple with conjugate data may be asked
        // to certify rationality; a value that is not rational errors
        let (resp, code) = run(
            r#"{"command":"li2","field":{"name":"r","min_poly":["-2","0"]},
                "assert_subfield":"rational","payload":{"s":["0","1"],"a":"1"}}"#,
        );
        // li2 at s = √2: value is a nontrivial element of ℚ(√2)
        assert_eq!(code, 1);
        assert_eq!(resp["error"]["code"], "not-galois-stable");
    }

    #[test]
    fn field_label_aliases_name() {
        // "label" (the documented key) and "name" describe the same field
        let (a, code) = run(
            r#"{"command":"li2","field":{"label":"w","min_poly":["1","1","1"]},
                "payload":{"s":"1/2","a":"1"}}"#,
        );
        assert_eq!(code, 0);
        let (b, _) = run(
            r#"{"command":"li2","field":{"name":"w","min_poly":["1","1","1"]},
                "payload":{"s":"1/2","a":"1"}}"#,
        );
        assert_eq!(a["value"], b["value"]);
        // implicit monic form: ["-2","0"] is x² − 2, same as the explicit list
        let (c, code) = run(
            r#"{"command":"li2","field":{"name":"r","min_poly":["-2","0"]},
                "payload":{"s":["0","1"],"a":"1"}}"#,
        );
        assert_eq!(code, 0);
        let (d, _) = run(
            r#"{"command":"li2","field":{"name":"r","min_poly":["-2","0","1"]},
                "payload":{"s":["0","1"],"a":"1"}}"#,
        );
        assert_eq!(c["value"], d["value"]);
        // giving both keys is ambiguous
        let (resp, code) = run(
            r#"{"command":"li2","field":{"name":"w","label":"v","min_poly":["1","1","1"]},
                "payload":{"s":"1/2","a":"1"}}"#,
        );
        assert_eq!(code, 2);
        assert!(resp["error"]["message"].as_str().unwrap().contains("alias"));
    }

    #[test]
    fn suite_outcomes_record_parameters() {
        let (resp, code) = run(
            r#"{"command":"invariant-suite","seed":9,"payload":{"names":["modulus"],"trials":1}}"#,
        );
        assert_eq!(code, 0);
        let out = &resp["value"][0];
        assert_eq!(out["name"], "modulus");
        assert_eq!(out["seed"], 9);
        assert_eq!(out["passed"], true);
        assert!(out["height"].is_number());
        assert!(out["window"].is_number());
    }

    #[test]
    fn unknown_suites_exit_2() {
        let (resp, code) = run(
            r#"{"command":"invariant-suite","payload":{"names":["p9"],"trials":1}}"#,
        );
        assert_eq!(code, 2);
        assert_eq!(resp["error"]["code"], "unknown-suite");
    }
}
