//! Closed-form quantities for maximum irredundant base sizes of `Sym(n)` and
//! `Alt(n)`: chain lengths, the general and family-specific bounds, the
//! maximality criteria of the affine and product-action families, and the
//! order/index inequalities that convert bounds between `n` and the index `t`.
//!
//! Logarithms are base 2. Real comparisons use [`TOLERANCE`].

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

pub const TOLERANCE: f64 = 1e-9;

/// Lengths of the 4-transitive Mathieu groups, taken as known constants.
pub const MATHIEU_LENGTHS: [(&str, u32); 4] = [("M11", 7), ("M12", 8), ("M23", 11), ("M24", 14)];

/// Constants converting between `n` and `t` when `7 <= n <= 100` is included
/// (established by exhaustive enumeration outside this crate).
pub const SMALL_RANGE_CONSTANTS: IndexConstants = IndexConstants {
    n_lower: 1.0,
    n_upper: 4.03,
    log_lower: 0.70,
    log_upper: 1.53,
};

/// Constants that follow from the Stirling-type estimate once `n > 100`.
pub const LARGE_N_CONSTANTS: IndexConstants = IndexConstants {
    n_lower: 1.0,
    n_upper: 1.412 / 0.672,
    log_lower: 1.0 / 1.412,
    log_upper: 1.0,
};

/// Lower-order constant in `log t > STIRLING_FACTOR * n log n` for `n > 100`.
pub const STIRLING_FACTOR: f64 = 0.672;

/// Constants for the index form of the bounds: `mibs < loglog_upper (log log t)^2`
/// or, for large subgroups, `mibs < large_upper (log t / log log t)^(1/2)`; the
/// `_large_n` variants apply for `n > 100`. The `_lower` constants witness
/// that both growth rates are attained infinitely often.
pub const DEGREE_FORM_CONSTANTS: DegreeFormConstants = DegreeFormConstants {
    loglog_upper: 3.5,
    large_upper: 6.1,
    large_lower: 1.0,
    loglog_lower: 0.097,
    loglog_upper_large_n: 1.2,
    large_upper_large_n: 4.4,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndexConstants {
    pub n_lower: f64,
    pub n_upper: f64,
    pub log_lower: f64,
    pub log_upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DegreeFormConstants {
    pub loglog_upper: f64,
    pub large_upper: f64,
    pub large_lower: f64,
    pub loglog_lower: f64,
    pub loglog_upper_large_n: f64,
    pub large_upper_large_n: f64,
}

/// Ambient group type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, serde::Deserialize)]
pub enum Ambient {
    #[serde(rename = "S")]
    Symmetric,
    #[serde(rename = "A")]
    Alternating,
}

impl Ambient {
    pub fn tag(self) -> &'static str {
        match self {
            Ambient::Symmetric => "S",
            Ambient::Alternating => "A",
        }
    }

    pub fn parse(s: &str) -> Result<Ambient> {
        match s {
            "S" | "s" | "sym" => Ok(Ambient::Symmetric),
            "A" | "a" | "alt" => Ok(Ambient::Alternating),
            other => Err(Error::InvalidParameters(format!(
                "ambient must be S or A, got `{other}`"
            ))),
        }
    }

    // S -> 1, A -> 0; the value of epsilon, also valid in the length formula for n < 5
    fn offset(self) -> u64 {
        match self {
            Ambient::Symmetric => 1,
            Ambient::Alternating => 0,
        }
    }
}

/// Number of prime factors of `n` counted with multiplicity.
pub fn omega(n: u64) -> Result<u32> {
    if n == 0 {
        return Err(Error::InvalidParameters("omega(0) is undefined".into()));
    }
    Ok(prime_factors(n).len() as u32)
}

/// Ω of an arbitrary-precision integer by trial division.
pub fn omega_big(n: &BigUint) -> Result<u32> {
    if n.is_zero() {
        return Err(Error::InvalidParameters("omega(0) is undefined".into()));
    }
    let mut n = n.clone();
    let mut count = 0;
    let mut d = BigUint::from(2u32);
    while &d * &d <= n {
        while (&n % &d).is_zero() {
            n /= &d;
            count += 1;
        }
        d += 1u32;
    }
    if n > BigUint::one() {
        count += 1;
    }
    Ok(count)
}

/// Prime factors with multiplicity, ascending.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        while n.is_multiple_of(d) {
            out.push(d);
            n /= d;
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Number of ones in the binary representation of `n`.
pub fn binary_weight(n: u64) -> Result<u32> {
    if n == 0 {
        return Err(Error::InvalidParameters("binary weight needs n >= 1".into()));
    }
    Ok(n.count_ones())
}

/// Length of `G / soc(G)`: 1 for `Sym(n)`, 0 for `Alt(n)`, for `n >= 5`.
pub fn epsilon(ambient: Ambient, n: u64) -> Result<u64> {
    if n < 5 {
        return Err(Error::InvalidParameters(format!(
            "epsilon needs n >= 5 (socle differs below), got {n}"
        )));
    }
    Ok(ambient.offset())
}

/// Length of `Sym(n)` or `Alt(n)`: `floor((3n - 3)/2) - b_n + epsilon`.
pub fn length_sym(n: u64, ambient: Ambient) -> Result<u64> {
    if n < 2 {
        return Err(Error::InvalidParameters(format!("length needs n >= 2, got {n}")));
    }
    Ok((3 * n - 3) / 2 - u64::from(binary_weight(n)?) + ambient.offset())
}

/// Checks `l(G) <= (3/2) n - 3 + epsilon` in exact integer form.
pub fn length_inequality_holds(n: u64, ambient: Ambient) -> Result<bool> {
    let l = length_sym(n, ambient)?;
    Ok(2 * l + 6 <= 3 * n + 2 * ambient.offset())
}

/// General upper bound for primitive maximal subgroups:
/// `(log n)^2 + log n + 1`, or `3 sqrt(n) - 1` for large subgroups.
pub fn general_bound(n: u64, large: bool) -> Result<f64> {
    if n < 7 {
        return Err(Error::InvalidParameters(format!(
            "general bounds require n >= 7, got {n}"
        )));
    }
    let nf = n as f64;
    Ok(if large {
        3.0 * nf.sqrt() - 1.0
    } else {
        let l = nf.log2();
        l * l + l + 1.0
    })
}

/// Value or window for `mibs(G, AGL(d, p) ∩ G)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AffineBound {
    Exact { value: u64 },
    Window { lower: u64, strict_upper: f64 },
}

impl AffineBound {
    pub fn lower(&self) -> u64 {
        match self {
            AffineBound::Exact { value } => *value,
            AffineBound::Window { lower, .. } => *lower,
        }
    }

    /// Largest integer allowed by the bound.
    pub fn max_integer(&self) -> u64 {
        match self {
            AffineBound::Exact { value } => *value,
            AffineBound::Window { strict_upper, .. } => strict_integer_below(*strict_upper),
        }
    }

    pub fn admits(&self, value: u64) -> bool {
        value >= self.lower() && value <= self.max_integer()
    }
}

fn strict_integer_below(x: f64) -> u64 {
    let c = x.ceil();
    let f = if (c - x).abs() < TOLERANCE { c - 1.0 } else { x.floor() };
    f.max(0.0) as u64
}

pub fn affine_bounds(p: u64, d: u64, ambient: Ambient) -> Result<AffineBound> {
    if !crate::field::is_prime(p) || p == 2 {
        return Err(Error::InvalidParameters(format!("odd prime p required, got {p}")));
    }
    if d == 0 || (p as f64).powi(d as i32) < 7.0 {
        return Err(Error::InvalidParameters(format!(
            "need d >= 1 and p^d >= 7, got p={p}, d={d}"
        )));
    }
    let eps = ambient.offset();
    let om = u64::from(omega(p - 1)?);
    if d == 1 {
        return Ok(AffineBound::Exact { value: 1 + om + eps });
    }
    let tri = d * (d + 1) / 2;
    let lower = if p == 3 || p == 5 {
        tri + d - 1 + eps
    } else {
        tri + d * om - 1 + eps
    };
    let strict_upper = tri as f64 * (1.0 + (p as f64).log2()) + eps as f64;
    Ok(AffineBound::Window { lower, strict_upper })
}

/// `(1 + (m-1)(k-1) + epsilon, (3/2)mk - k/2 - 1)`.
pub fn wreath_bounds(m: u64, k: u64, ambient: Ambient) -> Result<(u64, f64)> {
    if m < 5 || k < 2 {
        return Err(Error::InvalidParameters(format!(
            "need m >= 5 and k >= 2, got m={m}, k={k}"
        )));
    }
    let lower = 1 + (m - 1) * (k - 1) + ambient.offset();
    let upper = 1.5 * (m * k) as f64 - 0.5 * k as f64 - 1.0;
    Ok((lower, upper))
}

/// Whether `AGL(d, p) ∩ G` is maximal in `G` (`p^d >= 7`).
pub fn maximality_affine(p: u64, d: u64, ambient: Ambient) -> bool {
    match ambient {
        Ambient::Symmetric => (d >= 2 && p >= 3) || (d == 1 && p >= 7),
        Ambient::Alternating => {
            (d >= 2 && p >= 3)
                || (d >= 3 && p == 2)
                || (d == 1 && (p == 13 || p == 19 || p >= 29))
        }
    }
}

/// Whether `(S_m wr S_k) ∩ G` in product action is maximal in `G`.
pub fn maximality_wreath(m: u64, k: u64, ambient: Ambient) -> bool {
    if m % 2 == 1 {
        return true;
    }
    match ambient {
        Ambient::Symmetric => m % 4 == 2 && k == 2,
        Ambient::Alternating => (m.is_multiple_of(4) && k == 2) || k >= 3,
    }
}

/// `log2(n!)` by compensated summation.
pub fn log2_factorial(n: u64) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for i in 2..=n {
        let y = (i as f64).log2() - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

pub fn log2_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 52 {
        return x.to_f64().unwrap().log2();
    }
    let shift = bits - 52;
    let top = (x >> shift).to_f64().unwrap();
    top.log2() + shift as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub formula: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl Comparison {
    fn less(formula: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Comparison {
            formula: formula.into(),
            lhs,
            rhs,
            holds: lhs < rhs - TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimitiveOrderReport {
    pub n: u64,
    pub order_h: String,
    /// `|H| < 50 n^sqrt(n)`, compared in log space.
    pub general: Comparison,
    /// `|H| < n^(1 + floor(log n))`, compared exactly.
    pub small_order: bool,
    pub small_order_bound: String,
}

pub fn primitive_order_check(n: u64, order_h: &BigUint) -> Result<PrimitiveOrderReport> {
    if n < 5 {
        return Err(Error::InvalidParameters(format!("need n >= 5, got {n}")));
    }
    let nf = n as f64;
    let general = Comparison::less(
        "log2|H| < log2(50) + sqrt(n) log2(n)",
        log2_big(order_h),
        50f64.log2() + nf.sqrt() * nf.log2(),
    );
    let exp = 1 + u64::from(63 - n.leading_zeros());
    let bound = BigUint::from(n).pow(exp as u32);
    Ok(PrimitiveOrderReport {
        n,
        order_h: order_h.to_string(),
        general,
        small_order: order_h < &bound,
        small_order_bound: bound.to_string(),
    })
}

/// Which constants an index check uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantMode {
    /// Constants derived analytically; only valid for `n > 100`.
    LargeN,
    /// Constants from the exhaustive small-range enumeration. This crate only
    /// checks them on its own families, so a pass is partial evidence.
    SmallRange,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexReport {
    pub n: u64,
    pub order_h: String,
    pub ambient: Ambient,
    pub mode: ConstantMode,
    pub constants: IndexConstants,
    pub log_t: f64,
    pub log_log_t: f64,
    pub log_n: f64,
    pub comparisons: Vec<Comparison>,
    pub all_hold: bool,
    pub partial: bool,
}

/// Checks the `n`-versus-`t` inequalities for `t = |G : H|`.
pub fn index_degree_check(n: u64, order_h: &BigUint, ambient: Ambient, mode: ConstantMode) -> Result<IndexReport> {
    if mode == ConstantMode::LargeN && n <= 100 {
        return Err(Error::InvalidParameters(format!(
            "large-n constants require n > 100, got {n}"
        )));
    }
    if n < 7 {
        return Err(Error::InvalidParameters(format!("need n >= 7, got {n}")));
    }
    let log_g = match ambient {
        Ambient::Symmetric => log2_factorial(n),
        Ambient::Alternating => log2_factorial(n) - 1.0,
    };
    let log_t = log_g - log2_big(order_h);
    if log_t <= 1.0 {
        return Err(Error::InvalidParameters("index too small for log log t".into()));
    }
    let log_log_t = log_t.log2();
    let nf = n as f64;
    let log_n = nf.log2();
    let c = match mode {
        ConstantMode::LargeN => LARGE_N_CONSTANTS,
        ConstantMode::SmallRange => SMALL_RANGE_CONSTANTS,
    };
    let mut comparisons = Vec::new();
    if mode == ConstantMode::LargeN {
        comparisons.push(Comparison::less(
            "0.672 n log n < log t",
            STIRLING_FACTOR * nf * log_n,
            log_t,
        ));
    }
    comparisons.push(Comparison::less("log t < n log n", log_t, nf * log_n));
    comparisons.push(Comparison::less("log_lower log log t < log n", c.log_lower * log_log_t, log_n));
    comparisons.push(Comparison::less("log n < log_upper log log t", log_n, c.log_upper * log_log_t));
    comparisons.push(Comparison::less(
        "n_lower log t / log log t < n",
        c.n_lower * log_t / log_log_t,
        nf,
    ));
    comparisons.push(Comparison::less(
        "n < n_upper log t / log log t",
        nf,
        c.n_upper * log_t / log_log_t,
    ));
    let all_hold = comparisons.iter().all(|c| c.holds);
    Ok(IndexReport {
        n,
        order_h: order_h.to_string(),
        ambient,
        mode,
        constants: c,
        log_t,
        log_log_t,
        log_n,
        comparisons,
        all_hold,
        partial: mode == ConstantMode::SmallRange,
    })
}

/// Upper bound on `mibs` from the subgroup order: `1 + Ω(|H|)`.
pub fn order_upper_bound(order_h: &BigUint) -> Result<u64> {
    Ok(1 + u64::from(omega_big(order_h)?))
}

/// Relational complexity bound implied by a maximum irredundant base size.
pub fn relational_complexity_bound(mibs: u64) -> u64 {
    mibs + 1
}

/// Parameters naming the subgroup family of a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilyParams {
    None,
    Agl { p: u64, d: u64 },
    Wreath { m: u64, k: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub n: u64,
    pub ambient: Ambient,
    pub family: FamilyParams,
    pub omega_n_minus_1: u32,
    pub binary_weight: u32,
    pub epsilon: u64,
    pub length: u64,
    pub general_bound: f64,
    pub large: bool,
    pub affine: Option<AffineBound>,
    pub wreath: Option<(u64, f64)>,
    pub maximal: Option<bool>,
    pub primitive_order: Option<PrimitiveOrderReport>,
    pub mathieu_lengths: Vec<(String, u32)>,
    pub degree_form_constants: DegreeFormConstants,
    pub comparisons: Vec<Comparison>,
}

/// Evaluates every closed-form quantity for `(n, family)` and compares each
/// supplied computed value (e.g. an oracle result or a certificate length).
pub fn bounds_report(
    n: u64,
    ambient: Ambient,
    family: FamilyParams,
    order_h: Option<&BigUint>,
    computed: Option<u64>,
) -> Result<BoundsReport> {
    if n < 7 {
        return Err(Error::InvalidParameters(format!(
            "bounds require n >= 7, got {n}"
        )));
    }
    let (large, affine, wreath, maximal) = match &family {
        FamilyParams::None => (false, None, None, None),
        FamilyParams::Agl { p, d } => {
            check_power(*p, *d, n)?;
            (
                false,
                Some(affine_bounds(*p, *d, ambient)?),
                None,
                Some(maximality_affine(*p, *d, ambient)),
            )
        }
        FamilyParams::Wreath { m, k } => {
            check_power(*m, *k, n)?;
            (
                true,
                None,
                Some(wreath_bounds(*m, *k, ambient)?),
                Some(maximality_wreath(*m, *k, ambient)),
            )
        }
    };
    let general_bound = general_bound(n, large)?;
    let length = length_sym(n, ambient)?;
    let mut comparisons = Vec::new();
    if let Some(value) = computed {
        let v = value as f64;
        comparisons.push(Comparison {
            formula: "mibs <= l(G)".into(),
            lhs: v,
            rhs: length as f64,
            holds: value <= length,
        });
        comparisons.push(Comparison::less("mibs < general bound", v, general_bound));
        if let Some(a) = &affine {
            comparisons.push(Comparison {
                formula: "affine window".into(),
                lhs: v,
                rhs: a.max_integer() as f64,
                holds: a.admits(value),
            });
        }
        if let Some((lo, hi)) = wreath {
            comparisons.push(Comparison {
                formula: "product-action window".into(),
                lhs: v,
                rhs: hi,
                holds: value >= lo && v <= hi + TOLERANCE,
            });
        }
        if let Some(order) = order_h {
            let ub = order_upper_bound(order)?;
            comparisons.push(Comparison {
                formula: "mibs <= 1 + Omega(|H|)".into(),
                lhs: v,
                rhs: ub as f64,
                holds: value <= ub,
            });
        }
    }
    Ok(BoundsReport {
        n,
        ambient,
        family,
        omega_n_minus_1: omega(n - 1)?,
        binary_weight: binary_weight(n)?,
        epsilon: epsilon(ambient, n)?,
        length,
        general_bound,
        large,
        affine,
        wreath,
        maximal,
        primitive_order: order_h.map(|o| primitive_order_check(n, o)).transpose()?,
        mathieu_lengths: MATHIEU_LENGTHS
            .iter()
            .map(|(name, l)| (name.to_string(), *l))
            .collect(),
        degree_form_constants: DEGREE_FORM_CONSTANTS,
        comparisons,
    })
}

fn check_power(base: u64, exp: u64, n: u64) -> Result<()> {
    let pow = (base as u128).checked_pow(exp as u32);
    if pow != Some(n as u128) {
        return Err(Error::InvalidParameters(format!(
            "n = {n} does not equal {base}^{exp}"
        )));
    }
    Ok(())
}
