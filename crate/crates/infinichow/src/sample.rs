//! Deterministic random generation for the randomized identity suites.
//!
//! Every draw comes from a seeded ChaCha20 stream, so a suite run is a pure
//! function of `(seed, trials)` and reproducible across platforms. Rationals
//! are drawn with numerator and denominator bounded by a height (default
//! [`DEFAULT_HEIGHT`]); precondition violations are avoided constructively
//! where possible and by rejection sampling otherwise.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::cycles::Cycle;
use crate::ktheory::BlochSymbol;
use crate::numfield::{rat, FieldElement, FieldOps, NumberField, Rat};
use crate::omega::TriplePair;
use crate::ratfun::FactoredRational;
use crate::series::{LaurentBivariate, TruncSeries};

/// Default bound on |numerator| and on the denominator of sampled rationals.
pub const DEFAULT_HEIGHT: i64 = 20;

/// The six permutations of three slots with their signs (0-indexed).
pub const S3: [([usize; 3], i64); 6] = [
    ([0, 1, 2], 1),
    ([1, 0, 2], -1),
    ([0, 2, 1], -1),
    ([2, 1, 0], -1),
    ([1, 2, 0], 1),
    ([2, 0, 1], 1),
];

/// Seeded sampling context over a fixed coefficient field.
pub struct SampleCtx {
    rng: ChaCha20Rng,
    field: Arc<NumberField>,
    t_prec: usize,
    window: usize,
    height: i64,
}

impl SampleCtx {
    pub fn new(seed: u64, field: &Arc<NumberField>, t_prec: usize, window: usize) -> SampleCtx {
        SampleCtx {
            rng: ChaCha20Rng::seed_from_u64(seed),
            field: field.clone(),
            t_prec,
            window,
            height: DEFAULT_HEIGHT,
        }
    }

    /// Replace the height bound (recorded in suite reports).
    pub fn with_height(mut self, height: i64) -> SampleCtx {
        self.height = height;
        self
    }

    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    pub fn t_prec(&self) -> usize {
        self.t_prec
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn height(&self) -> i64 {
        self.height
    }

    // ---- scalar draws ----

    /// Uniform integer in `lo..=hi`.
    pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
        self.rng.gen_range(lo..=hi)
    }

    pub fn bool(&mut self) -> bool {
        self.rng.gen()
    }

    /// Rational with |numerator| ≤ height and 1 ≤ denominator ≤ height.
    pub fn rat(&mut self) -> Rat {
        let num = self.int(-self.height, self.height);
        let den = self.int(1, self.height);
        rat(num, den)
    }

    pub fn nonzero_rat(&mut self) -> Rat {
        loop {
            let r = self.rat();
            if r != rat(0, 1) {
                return r;
            }
        }
    }

    /// Rational avoiding an explicit finite list of values.
    pub fn rat_avoiding(&mut self, avoid: &[Rat]) -> Rat {
        loop {
            let r = self.rat();
            if !avoid.contains(&r) {
                return r;
            }
        }
    }

    /// Random rational embedded in the sampling field.
    pub fn elem(&mut self) -> FieldElement {
        let r = self.rat();
        self.field.from_rat(r)
    }

    pub fn nonzero_elem(&mut self) -> FieldElement {
        let r = self.nonzero_rat();
        self.field.from_rat(r)
    }

    // ---- truncated series draws ----

    /// Arbitrary series with random rational coefficients.
    pub fn series(&mut self) -> TruncSeries {
        let coeffs: Vec<FieldElement> = (0..self.t_prec).map(|_| self.elem()).collect();
        TruncSeries::from_coeffs(&self.field, self.t_prec, coeffs).expect("sampled coefficients")
    }

    /// A unit: nonzero constant term.
    pub fn unit_series(&mut self) -> TruncSeries {
        let s = self.series();
        s.with_coeff(0, self.nonzero_elem())
    }

    /// A ♭ series: constant term avoiding 0 and 1.
    pub fn flat_series(&mut self) -> TruncSeries {
        let c0 = self.rat_avoiding(&[rat(0, 1), rat(1, 1)]);
        let c0 = self.field.from_rat(c0);
        self.series().with_coeff(0, c0)
    }

    /// A multiple of t²: coefficients 0, 0, then random.
    pub fn t2_multiple(&mut self) -> TruncSeries {
        let mut out = TruncSeries::zero(&self.field, self.t_prec);
        for i in 2..self.t_prec {
            out = out.with_coeff(i, self.elem());
        }
        out
    }

    // ---- bivariate Laurent draws ----

    /// An exact Laurent polynomial s^val·(unit + higher s-terms): the generic
    /// decomposable entry for the ω suites.
    pub fn laurent_entry(&mut self) -> LaurentBivariate {
        let val = self.int(-2, 2);
        let mut acc = LaurentBivariate::monomial(&self.unit_series(), val, self.window);
        let extra = self.int(0, 2);
        for j in 1..=extra {
            acc = acc.add(&LaurentBivariate::monomial(
                &self.series(),
                val + j,
                self.window,
            ));
        }
        acc
    }

    /// Perturb an entry by t²-level terms at or above its valuation, keeping
    /// it congruent mod t² and decomposable.
    pub fn tweak_entry(&mut self, entry: &LaurentBivariate) -> LaurentBivariate {
        let val = entry.val().unwrap_or(0);
        let mut out = entry.clone();
        for j in 0..=1 {
            out = out.add(&LaurentBivariate::monomial(
                &self.t2_multiple(),
                val + j,
                self.window,
            ));
        }
        out
    }

    /// A random decomposable triple of Laurent entries.
    pub fn laurent_triple(&mut self) -> [LaurentBivariate; 3] {
        [
            self.laurent_entry(),
            self.laurent_entry(),
            self.laurent_entry(),
        ]
    }

    /// t²-tweak every slot of a triple.
    pub fn tweak_triple(&mut self, base: &[LaurentBivariate; 3]) -> [LaurentBivariate; 3] {
        [
            self.tweak_entry(&base[0]),
            self.tweak_entry(&base[1]),
            self.tweak_entry(&base[2]),
        ]
    }

    /// A congruent pair of triples, as consumed by the ω form.
    pub fn triple_pair(&mut self) -> TriplePair {
        let tilde = self.laurent_triple();
        let hat = self.tweak_triple(&tilde);
        TriplePair::new(tilde, hat).expect("tweaks preserve congruence mod t²")
    }

    /// A unit ≡ 1 mod t³ (needs t_prec ≥ 4): 1 + Σ_{k≥3} t^k·(s-polynomial).
    pub fn one_mod_t3_unit(&mut self) -> LaurentBivariate {
        assert!(self.t_prec >= 4, "a nontrivial unit ≡ 1 mod t³ needs N ≥ 4");
        let one = TruncSeries::one(&self.field, self.t_prec);
        let mut acc = LaurentBivariate::from_ts(&one, self.window);
        for k in 3..self.t_prec {
            for j in 0..=2 {
                let mut c = TruncSeries::zero(&self.field, self.t_prec);
                c = c.with_coeff(k, self.elem());
                acc = acc.add(&LaurentBivariate::monomial(&c, j, self.window));
            }
        }
        acc
    }

    /// A ♭ Laurent element: f and 1 − f both units. Two shapes: a constant
    /// avoiding {0, 1} mod t, or unit·s^k with k ≥ 1.
    pub fn flat_laurent(&mut self) -> LaurentBivariate {
        if self.bool() {
            LaurentBivariate::from_ts(&self.flat_series(), self.window)
        } else {
            let k = self.int(1, 2);
            LaurentBivariate::monomial(&self.unit_series(), k, self.window)
        }
    }

    /// A random permutation of three slots with its sign.
    pub fn perm_with_sign(&mut self) -> ([usize; 3], i64) {
        S3[self.int(0, 5) as usize]
    }

    // ---- Bloch-symbol draws ----

    /// A valid five-term input over K₂ = K[t]/(t²): both symbols ♭ with
    /// distinct special values.
    pub fn bloch_pair(&mut self) -> (BlochSymbol, BlochSymbol) {
        let x0 = self.rat_avoiding(&[rat(0, 1), rat(1, 1)]);
        let y0 = self.rat_avoiding(&[rat(0, 1), rat(1, 1), x0.clone()]);
        let mk = |ctx: &mut SampleCtx, c0: Rat| {
            let c1 = ctx.rat();
            let coeffs = vec![ctx.field.from_rat(c0), ctx.field.from_rat(c1)];
            let ts = TruncSeries::from_coeffs(&ctx.field, 2, coeffs).expect("prec 2");
            BlochSymbol::new(ts).expect("♭ by construction")
        };
        let x = mk(self, x0);
        let y = mk(self, y0);
        (x, y)
    }

    /// A ♭ series at the context precision (for ℓ∘δ = ℓi₂ checks).
    pub fn flat_alpha(&mut self) -> TruncSeries {
        self.flat_series()
    }

    // ---- factored rational draws ----

    /// A family of M factored rationals in good position: roots are grouped
    /// in clusters sharing their value mod t² (free t² tails), with cluster
    /// centers pairwise distinct, so `goodness_check` passes by construction.
    pub fn good_family<const M: usize>(&mut self) -> [FactoredRational; M] {
        let n_clusters = self.int(2, 3) as usize;
        let mut centers: Vec<Rat> = Vec::new();
        while centers.len() < n_clusters {
            let c = self.rat_avoiding(&centers.clone());
            centers.push(c);
        }
        // one t-linear part per cluster: every root of the cluster agrees
        // with it mod t², as goodness demands
        let linear: Vec<Rat> = (0..n_clusters).map(|_| self.rat()).collect();
        let mut out: Vec<FactoredRational> = Vec::new();
        for _ in 0..M {
            let n_factors = self.int(1, 2) as usize;
            let mut factors = Vec::new();
            for _ in 0..n_factors {
                let i = self.int(0, n_clusters as i64 - 1) as usize;
                let mut root = TruncSeries::from_elem(
                    &self.field.from_rat(centers[i].clone()),
                    self.t_prec,
                );
                if self.t_prec >= 2 {
                    root = root.with_coeff(1, self.field.from_rat(linear[i].clone()));
                }
                if self.t_prec >= 3 {
                    root = root.with_coeff(2, self.elem());
                }
                let mult = if self.bool() { 1 } else { -1 } * self.int(1, 2);
                factors.push((root, mult));
            }
            let f = FactoredRational::new(self.unit_series(), factors)
                .expect("unit lead and coherent roots");
            out.push(f);
        }
        out.try_into().map_err(|_| ()).expect("length M")
    }

    pub fn good_pair(&mut self) -> [FactoredRational; 2] {
        self.good_family::<2>()
    }

    pub fn good_triple(&mut self) -> [FactoredRational; 3] {
        self.good_family::<3>()
    }

    /// Add independent random t² tails to every root and to the lead.
    pub fn t2_tails(&mut self, f: &FactoredRational) -> FactoredRational {
        let factors = f
            .factors()
            .iter()
            .map(|(root, m)| (root.add(&self.t2_multiple()), *m))
            .collect();
        FactoredRational::new(f.lead().add(&self.t2_multiple()), factors)
            .expect("tails keep the lead a unit")
    }

    /// A constant function: a random unit of K[t]/(t^N) with no factors.
    pub fn constant_function(&mut self) -> FactoredRational {
        FactoredRational::new(self.unit_series(), Vec::new()).expect("unit lead")
    }

    // ---- cycle draws ----

    /// A weight-two cycle with one coordinate constant mod t² but genuinely
    /// x-dependent at order t²: the slot coordinate is
    /// α·Π_j (x−r_j)/(x−r_j−c_j t²), the other two coordinates have all their
    /// sections at fresh, pairwise distinct constant centers.
    pub fn constant_coordinate_cycle(&mut self, slot: usize) -> Cycle {
        assert!(slot < 3, "slot must be 0, 1, or 2");
        assert!(self.t_prec >= 3, "needs t² data");
        let mut used: Vec<Rat> = Vec::new();
        let fresh = |ctx: &mut SampleCtx, used: &mut Vec<Rat>| {
            let c = ctx.rat_avoiding(used);
            used.push(c.clone());
            ctx.field.from_rat(c)
        };
        // the constant-mod-t² coordinate
        let n_ratios = self.int(1, 2);
        let mut factors = Vec::new();
        for _ in 0..n_ratios {
            let r = fresh(self, &mut used);
            let base = TruncSeries::from_elem(&r, self.t_prec);
            let tail = {
                let mut t = TruncSeries::zero(&self.field, self.t_prec);
                t = t.with_coeff(2, self.nonzero_elem());
                t
            };
            factors.push((base.clone(), 1));
            factors.push((base.add(&tail), -1));
        }
        let constant_coord =
            FactoredRational::new(self.unit_series(), factors).expect("unit lead");
        // the other two coordinates: separated simple sections; at most one
        // coordinate of nonzero total degree, else the face at infinity of
        // the unbalanced coordinate meets another coordinate's pole there
        let other = |ctx: &mut SampleCtx, used: &mut Vec<Rat>, balanced: bool| {
            let n = ctx.int(1, 2);
            let mut factors = Vec::new();
            let mut total: i64 = 0;
            for _ in 0..n {
                let u = fresh(ctx, used);
                let mult = if ctx.bool() { 1 } else { -1 } * ctx.int(1, 2);
                total += mult;
                factors.push((TruncSeries::from_elem(&u, ctx.t_prec), mult));
            }
            if balanced && total != 0 {
                let u = fresh(ctx, used);
                factors.push((TruncSeries::from_elem(&u, ctx.t_prec), -total));
            }
            FactoredRational::new(ctx.unit_series(), factors).expect("unit lead")
        };
        let a = other(self, &mut used, false);
        let b = other(self, &mut used, true);
        let coords = match slot {
            0 => [constant_coord, a, b],
            1 => [a, constant_coord, b],
            _ => [a, b, constant_coord],
        };
        let weight = if self.bool() { 1 } else { -1 } * self.int(1, 2);
        Cycle::new(vec![(weight, coords)]).expect("nonempty single-ring component")
    }

    /// Random t² tails on every root and every lead of every component.
    pub fn cycle_t2_tails(&mut self, z: &Cycle) -> Cycle {
        let components = z
            .components()
            .iter()
            .map(|(w, coords)| {
                let coords = [
                    self.t2_tails(&coords[0]),
                    self.t2_tails(&coords[1]),
                    self.t2_tails(&coords[2]),
                ];
                (*w, coords)
            })
            .collect();
        Cycle::new(components).expect("same ring")
    }

    /// A uniformly random element of G₃ = S₃ ⋉ (ℤ/2)³ as (1-indexed
    /// permutation, inversion flags).
    pub fn g3_element(&mut self) -> ([usize; 3], [bool; 3]) {
        let (p, _) = self.perm_with_sign();
        let perm = [p[0] + 1, p[1] + 1, p[2] + 1];
        let flips = [self.bool(), self.bool(), self.bool()];
        (perm, flips)
    }
}
