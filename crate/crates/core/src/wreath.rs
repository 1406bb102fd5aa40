//! `S_m wr S_k` in product action on the `m^k` tuples over `{1..m}`, the
//! coordinate-twist conjugators whose two-point stabilizers are known
//! explicitly, and the resulting chain certificate.

use std::ops::ControlFlow;

use num_bigint::BigUint;
use num_traits::One;

use crate::bounds::Ambient;
use crate::certificate::{CertificateLevel, ChainCertificate, SubgroupDescription, SubgroupFamily};
use crate::error::{Error, Result};
use crate::group::PermutationGroup;
use crate::perm::Permutation;

const MAX_DEGREE: u64 = 1 << 20;

/// A point of the product action: `entries[j]` in `1..=m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tuple {
    m: usize,
    entries: Vec<usize>,
}

impl Tuple {
    pub fn new(m: usize, entries: Vec<usize>) -> Result<Self> {
        if let Some(&e) = entries.iter().find(|&&e| e == 0 || e > m) {
            return Err(Error::PointOutOfRange { point: e, degree: m });
        }
        Ok(Tuple { m, entries })
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    /// `1 + Σ_j (entries[j] - 1) m^j`.
    pub fn to_point(&self) -> usize {
        self.entries
            .iter()
            .rev()
            .fold(0usize, |acc, &e| acc * self.m + (e - 1))
            + 1
    }

    pub fn from_point(m: usize, k: usize, point: usize) -> Result<Self> {
        let n = m.pow(k as u32);
        if point == 0 || point > n {
            return Err(Error::PointOutOfRange { point, degree: n });
        }
        let mut rest = point - 1;
        let entries = (0..k)
            .map(|_| {
                let e = rest % m + 1;
                rest /= m;
                e
            })
            .collect();
        Ok(Tuple { m, entries })
    }
}

/// Number of coordinates in which two tuples differ.
pub fn hamming(a: &Tuple, b: &Tuple) -> Result<usize> {
    if a.m != b.m || a.entries.len() != b.entries.len() {
        return Err(Error::InvalidParameters("tuples have different shapes".into()));
    }
    Ok(a.entries.iter().zip(&b.entries).filter(|(x, y)| x != y).count())
}

#[derive(Debug, Clone)]
pub struct WreathContext {
    m: usize,
    k: usize,
    degree: usize,
    group: PermutationGroup,
    cycle: Permutation,
}

/// Builds `S_m wr S_k` on `m^k` points from `(1 2)`, `(1 … m)` on the first
/// coordinate and `(1 2)`, `(1 … k)` on the coordinates.
pub fn build_wreath(m: u64, k: u64) -> Result<WreathContext> {
    if m < 3 || k < 2 {
        return Err(Error::InvalidParameters(format!(
            "need m >= 3 and k >= 2, got m={m}, k={k}"
        )));
    }
    match (m as u128).checked_pow(k as u32) {
        Some(n) if n <= MAX_DEGREE as u128 => {}
        _ => {
            return Err(Error::InvalidParameters(format!("m^k = {m}^{k} is too large")));
        }
    }
    let (m, k) = (m as usize, k as usize);
    let degree = m.pow(k as u32);
    let cycle_len = if m % 2 == 1 { m } else { m - 1 };
    let cycle = Permutation::from_cycles(&[(1..=cycle_len).collect()], m)?;
    let mut ctx = WreathContext {
        m,
        k,
        degree,
        group: PermutationGroup::trivial(degree),
        cycle,
    };
    let sm = [
        Permutation::from_cycles(&[vec![1, 2]], m)?,
        Permutation::from_cycles(&[(1..=m).collect()], m)?,
    ];
    let mut gens = Vec::new();
    for v in &sm {
        gens.push(ctx.on_coordinate(1, v)?);
    }
    gens.push(ctx.top(&Permutation::from_cycles(&[vec![1, 2]], k)?)?);
    if k > 2 {
        gens.push(ctx.top(&Permutation::from_cycles(&[(1..=k).collect()], k)?)?);
    }
    ctx.group = PermutationGroup::from_generators(&gens, degree)?;
    Ok(ctx)
}

fn factorial(n: usize) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// Generators of `Sym(points)`, 1-based points.
fn symmetric_on(points: &[usize], degree: usize) -> Result<Vec<Permutation>> {
    if points.len() < 2 {
        return Ok(Vec::new());
    }
    let mut gens = vec![Permutation::from_cycles(&[vec![points[0], points[1]]], degree)?];
    if points.len() > 2 {
        gens.push(Permutation::from_cycles(&[points.to_vec()], degree)?);
    }
    Ok(gens)
}

impl WreathContext {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `S_m wr S_k` in product action.
    pub fn group(&self) -> &PermutationGroup {
        &self.group
    }

    /// `(1 … m)` for odd `m`, `(1 … m-1)` for even `m`.
    pub fn cycle(&self) -> &Permutation {
        &self.cycle
    }

    pub fn cycle_order(&self) -> usize {
        self.cycle.order() as usize
    }

    /// `(m!)^k k!`.
    pub fn expected_order(&self) -> BigUint {
        factorial(self.m).pow(self.k as u32) * factorial(self.k)
    }

    pub fn tuple_to_point(&self, t: &Tuple) -> Result<usize> {
        if t.m != self.m || t.entries.len() != self.k {
            return Err(Error::InvalidParameters("tuple has the wrong shape".into()));
        }
        Ok(t.to_point())
    }

    pub fn point_to_tuple(&self, point: usize) -> Result<Tuple> {
        Tuple::from_point(self.m, self.k, point)
    }

    fn decode(&self, mut index: usize, out: &mut [usize]) {
        for e in out.iter_mut() {
            *e = index % self.m;
            index /= self.m;
        }
    }

    fn encode(&self, entries: &[usize]) -> usize {
        entries.iter().rev().fold(0, |acc, &e| acc * self.m + e)
    }

    /// `(v_1, …, v_k) w`: coordinate `i` is moved by `v_i`, then the
    /// coordinates are permuted so that `a'_{i^w} = a_i^{v_i}`.
    pub fn embed(&self, v: &[Permutation], w: &Permutation) -> Result<Permutation> {
        if v.len() != self.k || v.iter().any(|x| x.degree() != self.m) {
            return Err(Error::DegreeMismatch {
                left: self.m,
                right: v.iter().map(Permutation::degree).find(|&d| d != self.m).unwrap_or(v.len()),
            });
        }
        if w.degree() != self.k {
            return Err(Error::DegreeMismatch {
                left: self.k,
                right: w.degree(),
            });
        }
        let mut a = vec![0; self.k];
        let mut b = vec![0; self.k];
        Ok(Permutation::from_fn(self.degree, |idx| {
            self.decode(idx, &mut a);
            for i in 0..self.k {
                b[w.images()[i] as usize] = v[i].images()[a[i]] as usize;
            }
            self.encode(&b)
        }))
    }

    /// `v` acting on coordinate `i` (1-based) only.
    pub fn on_coordinate(&self, i: usize, v: &Permutation) -> Result<Permutation> {
        let mut vs = vec![Permutation::identity(self.m); self.k];
        vs[i - 1] = v.clone();
        self.embed(&vs, &Permutation::identity(self.k))
    }

    /// The coordinate permutation `w` with trivial base part.
    pub fn top(&self, w: &Permutation) -> Result<Permutation> {
        self.embed(&vec![Permutation::identity(self.m); self.k], w)
    }

    fn check_twist(&self, i: usize, r: usize) -> Result<()> {
        if i < 2 || i > self.k || r == 0 || r > self.m {
            return Err(Error::InvalidParameters(format!(
                "need 2 <= i <= {} and 1 <= r <= {}, got i={i}, r={r}",
                self.k, self.m
            )));
        }
        Ok(())
    }

    /// Applies the cycle `u` to the first coordinate of exactly the tuples
    /// whose `i`-th coordinate is `r`. For `i >= 3` this is the `i = 2`
    /// construction conjugated by the coordinate swap `(2 i)`.
    pub fn twist_conjugator(&self, i: usize, r: usize) -> Result<Permutation> {
        self.check_twist(i, r)?;
        let mut a = vec![0; self.k];
        let x = Permutation::from_fn(self.degree, |idx| {
            self.decode(idx, &mut a);
            if a[1] == r - 1 {
                a[0] = self.cycle.images()[a[0]] as usize;
            }
            self.encode(&a)
        });
        if i == 2 {
            return Ok(x);
        }
        let swap = self.top(&Permutation::from_cycles(&[vec![2, i]], self.k)?)?;
        Ok(x.conjugate_unchecked(&swap))
    }

    /// `(U × S_m^{i-2} × Stab(r) × S_m^{k-i}) ⋊ W_i` where `U = ⟨u⟩` and
    /// `W_i` fixes coordinates `1` and `i`.
    pub fn twisted_stabilizer(&self, i: usize, r: usize) -> Result<PermutationGroup> {
        self.check_twist(i, r)?;
        let mut gens = vec![self.on_coordinate(1, &self.cycle)?];
        let all: Vec<usize> = (1..=self.m).collect();
        let others: Vec<usize> = all.iter().copied().filter(|&e| e != r).collect();
        for j in 2..=self.k {
            let points = if j == i { &others } else { &all };
            for v in symmetric_on(points, self.m)? {
                gens.push(self.on_coordinate(j, &v)?);
            }
        }
        let coords: Vec<usize> = (2..=self.k).filter(|&j| j != i).collect();
        for w in symmetric_on(&coords, self.k)? {
            gens.push(self.top(&w)?);
        }
        PermutationGroup::from_generators(&gens, self.degree)
    }

    /// `|U| (m-1)! (m!)^{k-2} (k-2)!`.
    pub fn twisted_stabilizer_order(&self) -> BigUint {
        BigUint::from(self.cycle_order())
            * factorial(self.m - 1)
            * factorial(self.m).pow(self.k as u32 - 2)
            * factorial(self.k - 2)
    }

    /// Whether `M ∩ M^x` equals the predicted stabilizer, by enumeration of `M`.
    pub fn verify_twisted_stabilizer(&self, i: usize, r: usize, limit: usize) -> Result<bool> {
        let order = self.group.order();
        if order > BigUint::from(limit) {
            return Err(Error::GroupTooLarge {
                order: order.to_string(),
                limit,
            });
        }
        let x = self.twist_conjugator(i, r)?;
        let meet = self.group.intersect(&self.group.conjugate_group(&x)?, limit)?;
        meet.equals(&self.twisted_stabilizer(i, r)?)
    }

    /// Order of `∩_{x ∈ X_{i,r}} M^x`:
    /// `|U| (m-r)! (m!)^{k-i} (k-i)!`.
    pub fn level_order(&self, i: usize, r: usize) -> BigUint {
        BigUint::from(self.cycle_order())
            * factorial(self.m - r)
            * factorial(self.m).pow((self.k - i) as u32)
            * factorial(self.k - i)
    }

    pub fn description(&self) -> SubgroupDescription {
        SubgroupDescription::new(
            SubgroupFamily::Wreath,
            &[("m", self.m as u64), ("k", self.k as u64)],
            self.group.generators().to_vec(),
        )
    }

    /// Point transpositions `y`, chosen greedily, until `current ∩ ∩_y M^y`
    /// is trivial.
    fn final_conjugators(&self, current: &PermutationGroup) -> Result<Vec<Permutation>> {
        let mut elements: Vec<Permutation> = Vec::new();
        current.for_each_element(|g| {
            elements.push(g.clone());
            ControlFlow::Continue(())
        });
        let mut chosen = Vec::new();
        while elements.len() > 1 {
            let mut best: Option<(usize, Permutation, Vec<Permutation>)> = None;
            for j in 2..=self.degree {
                let y = Permutation::from_cycles(&[vec![1, j]], self.degree)?;
                let kept: Vec<Permutation> = elements
                    .iter()
                    .filter(|e| self.group.contains_unchecked(&e.conjugate_unchecked(&y)))
                    .cloned()
                    .collect();
                if best.as_ref().is_none_or(|(n, _, _)| kept.len() < *n) {
                    let done = kept.len() == 1;
                    best = Some((kept.len(), y, kept));
                    if done {
                        break;
                    }
                }
            }
            let (n, y, kept) = best.expect("degree is at least 2");
            if n == elements.len() {
                return Err(Error::InvalidParameters(
                    "no transposition conjugator reduces the final level".into(),
                ));
            }
            chosen.push(y);
            elements = kept;
        }
        Ok(chosen)
    }

    /// Certificate `M > ∩_{X_{2,1}} M^x > … > ∩_{X_{k,m-1}} M^x > 1` of length
    /// `(m-1)(k-1) + 2` inside `Sym(m^k)`.
    pub fn wreath_chain(&self, ambient: Ambient) -> Result<ChainCertificate> {
        if ambient == Ambient::Alternating {
            return Err(Error::InvalidParameters(
                "product-action certificates are built in the symmetric group only".into(),
            ));
        }
        if self.m < 5 {
            return Err(Error::InvalidParameters(format!("need m >= 5, got {}", self.m)));
        }
        let id = Permutation::identity(self.degree);
        let mut levels = vec![CertificateLevel {
            conjugators: vec![id.clone()],
            order: self.expected_order(),
        }];
        let mut xs = vec![id];
        for i in 2..=self.k {
            for r in 1..self.m {
                xs.push(self.twist_conjugator(i, r)?);
                levels.push(CertificateLevel {
                    conjugators: xs.clone(),
                    order: self.level_order(i, r),
                });
            }
        }
        // the last level is ⟨u⟩ acting on the first coordinate
        let last = PermutationGroup::from_generators(&[self.on_coordinate(1, &self.cycle)?], self.degree)?;
        debug_assert_eq!(last.order(), self.level_order(self.k, self.m - 1));
        xs.extend(self.final_conjugators(&last)?);
        levels.push(CertificateLevel {
            conjugators: xs,
            order: BigUint::one(),
        });
        Ok(ChainCertificate::new(self.degree, ambient, self.description(), levels))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::parse_cycles;
    use proptest::prelude::*;

    fn ctx52() -> WreathContext {
        build_wreath(5, 2).unwrap()
    }

    #[test]
    fn tuple_encoding() {
        let t = |e: Vec<usize>| Tuple::new(5, e).unwrap().to_point();
        assert_eq!(t(vec![1, 1]), 1);
        assert_eq!(t(vec![2, 1]), 2);
        assert_eq!(t(vec![1, 2]), 6);
        for point in 1..=25 {
            assert_eq!(Tuple::from_point(5, 2, point).unwrap().to_point(), point);
        }
        assert!(Tuple::new(5, vec![0, 1]).is_err());
        assert!(Tuple::from_point(5, 2, 26).is_err());
    }

    #[test]
    fn hamming_examples() {
        let t = |e: Vec<usize>| Tuple::new(3, e).unwrap();
        assert_eq!(hamming(&t(vec![1, 1]), &t(vec![1, 2])).unwrap(), 1);
        assert_eq!(hamming(&t(vec![1, 2, 3]), &t(vec![1, 2, 3])).unwrap(), 0);
        assert_eq!(hamming(&t(vec![1, 2, 3]), &t(vec![3, 2, 1])).unwrap(), 2);
        assert!(hamming(&t(vec![1, 2]), &t(vec![1, 2, 3])).is_err());
    }

    #[test]
    fn group_orders() {
        assert_eq!(ctx52().group().order(), BigUint::from(28_800u32));
        assert_eq!(ctx52().expected_order(), BigUint::from(28_800u32));
        let c = build_wreath(5, 3).unwrap();
        assert_eq!(c.group().order(), c.expected_order());
        let c = build_wreath(6, 2).unwrap();
        assert_eq!(c.group().order(), BigUint::from(1_036_800u32));
        assert_eq!(c.cycle_order(), 5);
        assert!(c.cycle().parity().is_even());
        assert!(build_wreath(5, 1).is_err());
    }

    #[test]
    fn embedding_examples() {
        let c = ctx52();
        let id5 = Permutation::identity(5);
        let id2 = Permutation::identity(2);
        assert!(c.embed(&[id5.clone(), id5.clone()], &id2).unwrap().is_identity());
        let x = c.embed(&[c.cycle().clone(), id5.clone()], &id2).unwrap();
        for point in 1..=25 {
            let t = c.point_to_tuple(point).unwrap();
            let e = t.entries();
            let want = Tuple::new(5, vec![c.cycle().image(e[0]), e[1]]).unwrap();
            assert_eq!(x.image(point), want.to_point());
        }
        let swap = c.embed(&[id5.clone(), id5], &parse_cycles("(1 2)", 2).unwrap()).unwrap();
        assert_eq!(swap.order(), 2);
        let fixed: Vec<usize> = (1..=25).filter(|&p| swap.image(p) == p).collect();
        assert_eq!(fixed, vec![1, 7, 13, 19, 25]);
        assert!(c.embed(&[Permutation::identity(4), Permutation::identity(5)], &id2).is_err());
    }

    #[test]
    fn twist_examples() {
        let c = ctx52();
        let x = c.twist_conjugator(2, 1).unwrap();
        assert_eq!(x.cycle_type().iter().filter(|&&l| l > 1).collect::<Vec<_>>(), vec![&5]);
        assert!(x.parity().is_even());
        for point in 1..=25 {
            if c.point_to_tuple(point).unwrap().entries()[1] != 1 {
                assert_eq!(x.image(point), point);
            }
        }
        let c6 = build_wreath(6, 2).unwrap();
        let x = c6.twist_conjugator(2, 3).unwrap();
        assert_eq!(x.cycle_type().iter().filter(|&&l| l > 1).collect::<Vec<_>>(), vec![&5]);
        assert!(c.twist_conjugator(1, 1).is_err());
        assert!(c.twist_conjugator(2, 6).is_err());
    }

    #[test]
    fn twist_on_later_coordinates() {
        let c = build_wreath(5, 3).unwrap();
        let x = c.twist_conjugator(3, 2).unwrap();
        for point in 1..=125 {
            let e = c.point_to_tuple(point).unwrap().entries().to_vec();
            let mut want = e.clone();
            if e[2] == 2 {
                want[0] = c.cycle().image(e[0]);
            }
            assert_eq!(x.image(point), Tuple::new(5, want).unwrap().to_point());
        }
        assert!(x.parity().is_even());
    }

    #[test]
    fn stabilizer_orders() {
        let c = ctx52();
        let s = c.twisted_stabilizer(2, 1).unwrap();
        assert_eq!(s.order(), BigUint::from(120u32));
        assert_eq!(c.twisted_stabilizer_order(), BigUint::from(120u32));
        let c = build_wreath(5, 3).unwrap();
        let s = c.twisted_stabilizer(3, 2).unwrap();
        assert_eq!(s.order(), BigUint::from(14_400u32));
        assert_eq!(c.twisted_stabilizer_order(), BigUint::from(14_400u32));
    }

    #[test]
    fn conjugators_commute_with_stabilizer() {
        for (m, k) in [(5u64, 2u64), (5, 3), (6, 2)] {
            let c = build_wreath(m, k).unwrap();
            for i in 2..=c.k() {
                for r in 1..=c.m() {
                    let x = c.twist_conjugator(i, r).unwrap();
                    for h in c.twisted_stabilizer(i, r).unwrap().generators() {
                        assert_eq!(x.compose(h).unwrap(), h.compose(&x).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn stabilizer_equality_small() {
        let c = ctx52();
        for r in [1, 5] {
            assert!(c.verify_twisted_stabilizer(2, r, 100_000).unwrap());
        }
        assert!(matches!(
            c.verify_twisted_stabilizer(2, 1, 1000),
            Err(Error::GroupTooLarge { .. })
        ));
    }

    #[test]
    fn chain_shape() {
        let c = ctx52();
        let cert = c.wreath_chain(Ambient::Symmetric).unwrap();
        assert_eq!(cert.claimed_length, 6);
        let orders: Vec<String> = cert.levels.iter().map(|l| l.order.to_string()).collect();
        assert_eq!(orders, vec!["28800", "120", "30", "10", "5", "1"]);
        let c = build_wreath(5, 3).unwrap();
        assert_eq!(c.wreath_chain(Ambient::Symmetric).unwrap().claimed_length, 10);
        assert!(ctx52().wreath_chain(Ambient::Alternating).is_err());
    }

    fn arb_perm(n: usize) -> impl Strategy<Value = Permutation> {
        Just((1..=n).collect::<Vec<usize>>())
            .prop_shuffle()
            .prop_map(|v| Permutation::from_images(&v).unwrap())
    }

    proptest! {
        #[test]
        fn hamming_is_invariant(v1 in arb_perm(5), v2 in arb_perm(5), swap in any::<bool>(),
                                a in 1usize..=25, b in 1usize..=25) {
            let c = ctx52();
            let w = if swap { parse_cycles("(1 2)", 2).unwrap() } else { Permutation::identity(2) };
            let x = c.embed(&[v1, v2], &w).unwrap();
            let (ta, tb) = (c.point_to_tuple(a).unwrap(), c.point_to_tuple(b).unwrap());
            let (xa, xb) = (c.point_to_tuple(x.image(a)).unwrap(), c.point_to_tuple(x.image(b)).unwrap());
            prop_assert_eq!(hamming(&ta, &tb).unwrap(), hamming(&xa, &xb).unwrap());
        }

        #[test]
        fn embedding_is_homomorphic(v1 in arb_perm(5), v2 in arb_perm(5), u1 in arb_perm(5), u2 in arb_perm(5)) {
            let c = ctx52();
            let id = Permutation::identity(2);
            let a = c.embed(&[v1.clone(), v2.clone()], &id).unwrap();
            let b = c.embed(&[u1.clone(), u2.clone()], &id).unwrap();
            let ab = c.embed(&[v1.compose(&u1).unwrap(), v2.compose(&u2).unwrap()], &id).unwrap();
            prop_assert_eq!(a.compose(&b).unwrap(), ab);
        }
    }

    #[test]
    fn transposition_breaks_hamming_invariance() {
        let c = ctx52();
        // (1,1) and (2,2) are at distance 2; swapping them is not in M
        let y = Permutation::from_cycles(&[vec![1, 7]], 25).unwrap();
        let tuple = |p| c.point_to_tuple(p).unwrap();
        let violated = (1..=25).any(|a| {
            (1..=25).any(|b| {
                hamming(&tuple(a), &tuple(b)).unwrap() != hamming(&tuple(y.image(a)), &tuple(y.image(b))).unwrap()
            })
        });
        assert!(violated);
        assert!(!c.group().contains(&y).unwrap());
    }
}
