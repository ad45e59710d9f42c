//! Exact bound functions for large Kakeya sets.
//!
//! With `k` the number of classes whose chosen line misses the largest knot:
//!
//! * `f(k) = qk / (q + 1 - k)` and `g(k) = k(q - k)` bound the uncovered
//!   count from below, `h(k) = kq - k(k+1)/2` bounds it from above;
//! * `kappa` is the positive root of `kappa^2 + kappa = q`, i.e.
//!   `(sqrt(4q + 1) - 1) / 2`.
//!
//! Everything that feeds a verdict is computed with big rationals or with
//! quadratic surds `a + b sqrt(d)`; floating point only appears in
//! human-readable approximations.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("argument {arg} outside the domain [0, {q}]")]
    Domain { q: u64, arg: String },
    #[error("q = {0} is below the minimum order {1} for this bound")]
    OrderTooSmall(u64, u64),
    #[error("q = {0} is not a perfect square")]
    NotASquareOrder(u64),
}

/// Exact rational number in lowest terms with positive denominator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        Rational(BigRational::new(num.into(), den.into()))
    }

    pub fn integer(n: i64) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn from_big(r: BigRational) -> Self {
        Rational(r)
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
    };
}
forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

/// `a + b * sqrt(d)` with rational `a`, `b` and a non-negative integer `d`.
/// When `d` is a perfect square the root is folded into `a`; rational values
/// always carry `d = 0`, so derived equality is value equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticSurd {
    a: BigRational,
    b: BigRational,
    d: BigInt,
}

impl QuadraticSurd {
    pub fn new(a: BigRational, b: BigRational, d: BigInt) -> Self {
        assert!(!d.is_negative(), "radicand must be non-negative");
        if b.is_zero() {
            return QuadraticSurd {
                a,
                b,
                d: BigInt::zero(),
            };
        }
        let root = d.sqrt();
        if &root * &root == d {
            let a = a + b * BigRational::from_integer(root);
            return QuadraticSurd {
                a,
                b: BigRational::zero(),
                d: BigInt::zero(),
            };
        }
        QuadraticSurd { a, b, d }
    }

    pub fn rational(r: BigRational, d: &BigInt) -> Self {
        Self::new(r, BigRational::zero(), d.clone())
    }

    pub fn integer(n: i64, d: &BigInt) -> Self {
        Self::rational(BigRational::from_integer(n.into()), d)
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn surd_part(&self) -> &BigRational {
        &self.b
    }

    pub fn radicand(&self) -> &BigInt {
        &self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    // Folded values carry d = 0; combining with any radicand is fine then.
    fn common_radicand(&self, other: &Self) -> BigInt {
        match (self.b.is_zero(), other.b.is_zero()) {
            (true, _) => other.d.clone(),
            (_, true) => self.d.clone(),
            _ => {
                assert_eq!(self.d, other.d, "mixed radicands");
                self.d.clone()
            }
        }
    }

    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&BigRational::zero());
        let sb = self.b.cmp(&BigRational::zero());
        if sb == Ordering::Equal || sa == sb {
            return if sa == Ordering::Equal { sb } else { sa };
        }
        if sa == Ordering::Equal {
            return sb;
        }
        // Opposite signs: compare a^2 with b^2 d.
        let lhs = &self.a * &self.a;
        let rhs = &self.b * &self.b * BigRational::from_integer(self.d.clone());
        match lhs.cmp(&rhs) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => Ordering::Equal,
        }
    }

    pub fn recip(&self) -> Self {
        if self.b.is_zero() {
            assert!(!self.a.is_zero(), "division by zero");
            return QuadraticSurd {
                a: self.a.recip(),
                ..self.clone()
            };
        }
        // (a - b sqrt d) / (a^2 - b^2 d); the denominator is nonzero for non-square d.
        let den = &self.a * &self.a - &self.b * &self.b * BigRational::from_integer(self.d.clone());
        QuadraticSurd {
            a: &self.a / &den,
            b: -&self.b / &den,
            d: self.d.clone(),
        }
    }

    pub fn floor(&self) -> BigInt {
        let guess = self.to_f64().floor();
        let mut n = BigInt::from(guess as i64);
        let as_surd = |n: &BigInt| Self::rational(BigRational::from_integer(n.clone()), &self.d);
        while self < &as_surd(&n) {
            n -= 1;
        }
        while self >= &as_surd(&(&n + 1)) {
            n += 1;
        }
        n
    }

    pub fn to_f64(&self) -> f64 {
        let root = self.d.to_f64().unwrap_or(0.0).sqrt();
        self.a.to_f64().unwrap_or(f64::NAN) + self.b.to_f64().unwrap_or(f64::NAN) * root
    }
}

impl Add for &QuadraticSurd {
    type Output = QuadraticSurd;
    fn add(self, o: &QuadraticSurd) -> QuadraticSurd {
        let d = self.common_radicand(o);
        QuadraticSurd::new(&self.a + &o.a, &self.b + &o.b, d)
    }
}

impl Sub for &QuadraticSurd {
    type Output = QuadraticSurd;
    fn sub(self, o: &QuadraticSurd) -> QuadraticSurd {
        self + &(-o)
    }
}

impl Neg for &QuadraticSurd {
    type Output = QuadraticSurd;
    fn neg(self) -> QuadraticSurd {
        QuadraticSurd {
            a: -&self.a,
            b: -&self.b,
            d: self.d.clone(),
        }
    }
}

impl Mul for &QuadraticSurd {
    type Output = QuadraticSurd;
    fn mul(self, o: &QuadraticSurd) -> QuadraticSurd {
        let d = self.common_radicand(o);
        let dr = BigRational::from_integer(d.clone());
        let a = &self.a * &o.a + &self.b * &o.b * dr;
        let b = &self.a * &o.b + &self.b * &o.a;
        QuadraticSurd::new(a, b, d)
    }
}

impl Div for &QuadraticSurd {
    type Output = QuadraticSurd;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: &QuadraticSurd) -> QuadraticSurd {
        self * &o.recip()
    }
}

impl PartialOrd for QuadraticSurd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadraticSurd {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum()
    }
}

impl fmt::Display for QuadraticSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else {
            write!(f, "{} + {}*sqrt({})", self.a, self.b, self.d)
        }
    }
}

fn big(n: u64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn check_domain(q: u64, k: &BigRational) -> Result<(), BoundsError> {
    if k.is_negative() || k > &big(q) {
        return Err(BoundsError::Domain {
            q,
            arg: k.to_string(),
        });
    }
    Ok(())
}

/// `f(k) = qk / (q + 1 - k)` on `[0, q]`.
pub fn f_q(q: u64, k: &Rational) -> Result<Rational, BoundsError> {
    check_domain(q, &k.0)?;
    let q = big(q);
    Ok(Rational(&q * &k.0 / (&q + BigRational::one() - &k.0)))
}

/// `g(k) = k(q - k)` on `[0, q]`.
pub fn g_q(q: u64, k: &Rational) -> Result<Rational, BoundsError> {
    check_domain(q, &k.0)?;
    Ok(Rational(&k.0 * (big(q) - &k.0)))
}

/// `h(k) = kq - k(k+1)/2` for integer `k` in `[0, q]`.
pub fn h_q(q: u64, k: u64) -> Result<u64, BoundsError> {
    if k > q {
        return Err(BoundsError::Domain {
            q,
            arg: k.to_string(),
        });
    }
    Ok(k * q - k * (k + 1) / 2)
}

fn radicand(q: u64) -> BigInt {
    BigInt::from(4 * q + 1)
}

/// `kappa = (sqrt(4q + 1) - 1) / 2` as an exact surd.
pub fn kappa(q: u64) -> QuadraticSurd {
    QuadraticSurd::new(
        BigRational::new((-1).into(), 2.into()),
        BigRational::new(1.into(), 2.into()),
        radicand(q),
    )
}

/// Largest `n` with `n^2 + n <= q`.
pub fn kappa_floor(q: u64) -> u64 {
    let mut n = ((4 * q + 1).sqrt() - 1) / 2;
    while (n + 1) * (n + 2) <= q {
        n += 1;
    }
    while n * (n + 1) > q {
        n -= 1;
    }
    n
}

pub fn kappa_ceil(q: u64) -> u64 {
    let n = kappa_floor(q);
    if n * n + n == q {
        n
    } else {
        n + 1
    }
}

/// `f` evaluated at a surd argument in `[0, q]`.
pub fn f_q_surd(q: u64, k: &QuadraticSurd) -> QuadraticSurd {
    let d = k.radicand().clone();
    let qs = QuadraticSurd::integer(q as i64, &d);
    let den = &QuadraticSurd::integer(q as i64 + 1, &d) - k;
    &(&qs * k) / &den
}

/// `g` evaluated at a surd argument.
pub fn g_q_surd(q: u64, k: &QuadraticSurd) -> QuadraticSurd {
    let qs = QuadraticSurd::integer(q as i64, k.radicand());
    k * &(&qs - k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Interval {
    pub k: u64,
    /// `q^2 - h(k)`
    pub lo: u64,
    /// `q^2 - g(k)`
    pub hi: u64,
}

impl Interval {
    pub fn contains(&self, size: u64) -> bool {
        (self.lo..=self.hi).contains(&size)
    }
}

/// Sizes a Kakeya set whose largest knot is a `(q+1-k)`-knot can take, for
/// every `k < ceil(kappa)`.
pub fn admissible_intervals(q: u64) -> Vec<Interval> {
    (0..kappa_ceil(q)).map(|k| interval(q, k)).collect()
}

/// `[q^2 - h(k), q^2 - g(k)]` for any integer `k` in `[0, q]`.
pub fn interval(q: u64, k: u64) -> Interval {
    let qq = q * q;
    Interval {
        k,
        lo: qq - (k * q - k * (k + 1) / 2),
        hi: qq - k * (q - k),
    }
}

/// `q^2 - ((q+1) sqrt(q + 1/4) - (3q+1)/2)`, written `(a + b sqrt(d)) / c`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorollaryThreshold {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
    /// Approximate value, for display only.
    pub approx: f64,
    /// Smallest integer strictly above the threshold.
    pub cutoff: u64,
}

impl CorollaryThreshold {
    pub fn exact(&self) -> QuadraticSurd {
        QuadraticSurd::new(
            BigRational::new(self.a.into(), self.c.into()),
            BigRational::new(self.b.into(), self.c.into()),
            self.d.into(),
        )
    }
}

pub fn corollary_threshold(q: u64) -> Result<CorollaryThreshold, BoundsError> {
    if q < 4 {
        return Err(BoundsError::OrderTooSmall(q, 4));
    }
    let qi = q as i64;
    let (a, b, c, d) = (2 * qi * qi + 3 * qi + 1, -(qi + 1), 2, 4 * qi + 1);
    let mut t = CorollaryThreshold {
        a,
        b,
        c,
        d,
        approx: 0.0,
        cutoff: 0,
    };
    let exact = t.exact();
    debug_assert_eq!(exact, {
        let qq = QuadraticSurd::integer(qi * qi, &radicand(q));
        &qq - &f_q_surd(q, &(&QuadraticSurd::integer(qi, &radicand(q)) - &kappa(q)))
    });
    t.approx = exact.to_f64();
    t.cutoff = (exact.floor() + 1u32).to_u64().expect("cutoff fits in u64");
    Ok(t)
}

/// `q^2 - q sqrt(q) + q` for square `q >= 9`.
pub fn square_threshold(q: u64) -> Result<u64, BoundsError> {
    let r = q.sqrt();
    if r * r != q {
        return Err(BoundsError::NotASquareOrder(q));
    }
    if q < 9 {
        return Err(BoundsError::OrderTooSmall(q, 9));
    }
    Ok(q * q - q * r + q)
}

/// The older large-Kakeya cutoff `q^2 - 3q + 9`, stated for `q > 12`.
pub fn prior_cutoff(q: u64) -> Option<u64> {
    (q > 12).then(|| q * q + 9 - 3 * q)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsProfile {
    pub q: u64,
    pub kappa_floor: u64,
    pub kappa_ceil: u64,
    pub kappa_approx: f64,
    /// `min{ g(q - ceil kappa), f(q - floor kappa) }`
    pub theorem_min: Rational,
    /// Smallest size strictly above `q^2 - theorem_min`.
    pub theorem_size_cutoff: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corollary: Option<CorollaryThreshold>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corollary_cutoff: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub square_cutoff: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prior_cutoff: Option<u64>,
    pub intervals: Vec<Interval>,
}

pub fn theorem_min(q: u64) -> Rational {
    let (lo, hi) = (kappa_floor(q), kappa_ceil(q));
    let g = Rational::from_big(big(hi) * big(q - hi));
    let f = Rational::from_big(big(q) * big(q - lo) / big(lo + 1));
    g.min(f)
}

pub fn theorem_threshold(q: u64) -> BoundsProfile {
    let min = theorem_min(q);
    let cutoff = (BigInt::from(q * q) - min.ceil() + 1u32).to_u64().unwrap();
    let corollary = corollary_threshold(q).ok();
    let square_cutoff = square_threshold(q).ok().map(|t| t + 1);
    BoundsProfile {
        q,
        kappa_floor: kappa_floor(q),
        kappa_ceil: kappa_ceil(q),
        kappa_approx: kappa(q).to_f64(),
        theorem_min: min,
        theorem_size_cutoff: cutoff,
        corollary_cutoff: corollary.as_ref().map(|c| c.cutoff),
        corollary,
        square_cutoff,
        prior_cutoff: prior_cutoff(q),
        intervals: admissible_intervals(q),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Conforms { k: u64 },
    Unclassified,
    ViolatesTheorem { reason: String },
}

/// Checks a Kakeya set size (and optionally the observed `k`) against the
/// classification: sizes at or above the cutoff must sit in exactly one
/// admissible interval whose `k` matches.
pub fn classify(q: u64, size: u64, k_observed: Option<u64>) -> Verdict {
    let cutoff = theorem_threshold(q).theorem_size_cutoff;
    if size < cutoff {
        return Verdict::Unclassified;
    }
    let hits: Vec<Interval> = admissible_intervals(q)
        .into_iter()
        .filter(|i| i.contains(size))
        .collect();
    match (hits.as_slice(), k_observed) {
        ([], _) => Verdict::ViolatesTheorem {
            reason: format!("size {size} lies in no admissible interval"),
        },
        ([one], Some(k)) if k != one.k => Verdict::ViolatesTheorem {
            reason: format!(
                "size {size} requires k = {} but k = {k} was observed",
                one.k
            ),
        },
        ([one], _) => Verdict::Conforms { k: one.k },
        (many, _) => Verdict::ViolatesTheorem {
            reason: format!("size {size} lies in {} intervals", many.len()),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GapPredicates {
    /// The intervals for `k` and `k + 1` do not overlap.
    pub disjoint: bool,
    /// At least one integer lies strictly between them.
    pub nontrivial_gap: bool,
}

/// Separation between the intervals for `k` and `k + 1`:
/// `q^2 - h(k) > q^2 - g(k+1)` exactly when `(2k+3)^2 < 8q + 1`, and
/// the gap holds an integer exactly when `(2k+3)^2 < 8q - 7`.
pub fn gap_predicates(q: u64, k: u64) -> GapPredicates {
    let s = (2 * k + 3) * (2 * k + 3);
    GapPredicates {
        disjoint: s < 8 * q + 1,
        nontrivial_gap: s + 7 < 8 * q,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaItem {
    pub item: &'static str,
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub q: u64,
    pub items: Vec<LemmaItem>,
}

impl LemmaReport {
    /// No item failed (skipped items are fine).
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.status != CheckStatus::Fail)
    }

    pub fn status(&self, item: &str) -> Option<CheckStatus> {
        self.items.iter().find(|i| i.item == item).map(|i| i.status)
    }
}

/// Grid points `j / 10` for `j = 0..=10q`.
fn grid(q: u64) -> Vec<Rational> {
    (0..=10 * q as i64).map(|j| Rational::new(j, 10)).collect()
}

fn item(name: &'static str, failure: Option<String>) -> LemmaItem {
    LemmaItem {
        item: name,
        status: if failure.is_some() {
            CheckStatus::Fail
        } else {
            CheckStatus::Pass
        },
        detail: failure,
    }
}

/// Checks the five properties of `f` and `g` on the grid `k = j/10`, with
/// the statements about `q - kappa` done in exact surd arithmetic.
pub fn lemma_checks(q: u64) -> LemmaReport {
    let pts = grid(q);
    let fs: Vec<Rational> = pts.iter().map(|k| f_q(q, k).unwrap()).collect();
    let gs: Vec<Rational> = pts.iter().map(|k| g_q(q, k).unwrap()).collect();
    let n = pts.len() - 1;
    let mut items = Vec::with_capacity(5);

    // (i) f strictly increasing.
    items.push(item(
        "i",
        (0..n)
            .find(|&j| fs[j] >= fs[j + 1])
            .map(|j| format!("f({}) >= f({})", pts[j], pts[j + 1])),
    ));

    // (ii) g(k) = g(q - k); grid point j mirrors to n - j.
    items.push(item(
        "ii",
        (0..=n)
            .find(|&j| {
                gs[j] != g_q(q, &(&Rational::integer(q as i64) - &pts[j])).unwrap()
                    || gs[j] != gs[n - j]
            })
            .map(|j| format!("g({0}) != g(q - {0})", pts[j])),
    ));

    // (iii) f(q - kappa) = g(q - kappa), and f <= g left of q - kappa.
    let d = radicand(q);
    let q_minus_kappa = &QuadraticSurd::integer(q as i64, &d) - &kappa(q);
    let mut iii = None;
    if f_q_surd(q, &q_minus_kappa) != g_q_surd(q, &q_minus_kappa) {
        iii = Some("f(q - kappa) != g(q - kappa)".to_string());
    }
    if iii.is_none() {
        iii = (0..=n)
            .filter(|&j| QuadraticSurd::rational(pts[j].as_big().clone(), &d) <= q_minus_kappa)
            .find(|&j| fs[j] > gs[j])
            .map(|j| format!("f({0}) > g({0}) although {0} <= q - kappa", pts[j]));
    }
    items.push(item("iii", iii));

    // (iv) g(s) <= g(k) for k in [s, q - s], s <= q/2. Sweep s downwards,
    // keeping the minimum of g over the growing window [s, q - s].
    let mut iv = None;
    let mid = n / 2;
    let mut window_min = gs[mid..=n - mid].iter().min().unwrap().clone();
    for s in (0..=mid).rev() {
        window_min = window_min.min(gs[s].clone()).min(gs[n - s].clone());
        if gs[s] > window_min {
            iv = Some(format!("g({}) exceeds g somewhere in [s, q - s]", pts[s]));
            break;
        }
    }
    items.push(item("iv", iv));

    // (v) g(q - kappa) <= min{g(q - ceil kappa), f(q - floor kappa)}, q >= 4.
    if q >= 4 {
        let lhs = g_q_surd(q, &q_minus_kappa);
        let min = theorem_min(q);
        let rhs = QuadraticSurd::rational(min.as_big().clone(), &d);
        items.push(item(
            "v",
            (lhs > rhs).then(|| format!("g(q - kappa) = {lhs} exceeds {min}")),
        ));
    } else {
        items.push(LemmaItem {
            item: "v",
            status: CheckStatus::Skipped,
            detail: Some("requires q >= 4".to_string()),
        });
    }

    LemmaReport { q, items }
}

/// One row of the bounds table for integer `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableRow {
    pub k: u64,
    pub f: Rational,
    pub g: u64,
    pub h: u64,
    pub lo: u64,
    pub hi: u64,
}

pub fn bounds_table(q: u64) -> Vec<TableRow> {
    (0..=q)
        .map(|k| {
            let iv = interval(q, k);
            TableRow {
                k,
                f: f_q(q, &Rational::integer(k as i64)).unwrap(),
                g: k * (q - k),
                h: h_q(q, k).unwrap(),
                lo: iv.lo,
                hi: iv.hi,
            }
        })
        .collect()
}

/// Whether `n` is an integer square root of `q`.
pub fn exact_sqrt(q: u64) -> Option<u64> {
    let r = q.sqrt();
    (r * r == q).then_some(r)
}
