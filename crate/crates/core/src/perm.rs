//! Permutations of `{1..n}` stored as image tables.
//!
//! Points are 1-based in every public signature and in the cycle-notation
//! text format. Products use the right-action convention:
//! `i^(pq) = (i^p)^q`, so `p * q` means "apply `p`, then `q`".

use std::fmt;
use std::ops::Mul;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    // 0-based images
    images: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn is_even(self) -> bool {
        self == Parity::Even
    }
}

impl Permutation {
    pub fn identity(degree: usize) -> Self {
        Permutation {
            images: (0..degree as u32).collect(),
        }
    }

    /// Builds a permutation from 1-based images: `images[i - 1]` is the image of `i`.
    pub fn from_images(images: &[usize]) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        let mut table = Vec::with_capacity(n);
        for &img in images {
            if img == 0 || img > n {
                return Err(Error::PointOutOfRange {
                    point: img,
                    degree: n,
                });
            }
            if seen[img - 1] {
                return Err(Error::Parse {
                    token: img.to_string(),
                    reason: "image repeated, not a bijection".into(),
                });
            }
            seen[img - 1] = true;
            table.push((img - 1) as u32);
        }
        Ok(Permutation { images: table })
    }

    /// Builds from 0-based images without validation. Caller guarantees a bijection.
    pub(crate) fn from_zero_based_unchecked(images: Vec<u32>) -> Self {
        debug_assert!({
            let mut s = images.clone();
            s.sort_unstable();
            s.iter().enumerate().all(|(i, &v)| v as usize == i)
        });
        Permutation { images }
    }

    /// Builds a permutation from a 0-based point map `f`.
    pub(crate) fn from_fn(degree: usize, mut f: impl FnMut(usize) -> usize) -> Self {
        Self::from_zero_based_unchecked((0..degree).map(|i| f(i) as u32).collect())
    }

    /// Builds the permutation with the given disjoint cycles (1-based points).
    pub fn from_cycles(cycles: &[Vec<usize>], degree: usize) -> Result<Self> {
        let mut images: Vec<u32> = (0..degree as u32).collect();
        let mut used = vec![false; degree];
        for cycle in cycles {
            for &pt in cycle {
                if pt == 0 || pt > degree {
                    return Err(Error::PointOutOfRange { point: pt, degree });
                }
                if used[pt - 1] {
                    return Err(Error::Parse {
                        token: pt.to_string(),
                        reason: format!("point {pt} repeated"),
                    });
                }
                used[pt - 1] = true;
            }
            for (idx, &pt) in cycle.iter().enumerate() {
                let next = cycle[(idx + 1) % cycle.len()];
                images[pt - 1] = (next - 1) as u32;
            }
        }
        Ok(Permutation { images })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    /// Image of the 1-based point `point`.
    pub fn image(&self, point: usize) -> usize {
        self.images[point - 1] as usize + 1
    }

    /// 0-based image table.
    pub fn images(&self) -> &[u32] {
        &self.images
    }

    #[inline]
    pub(crate) fn apply0(&self, point: usize) -> usize {
        self.images[point] as usize
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| v as usize == i)
    }

    fn check_degree(&self, other: &Permutation) -> Result<()> {
        if self.degree() != other.degree() {
            return Err(Error::DegreeMismatch {
                left: self.degree(),
                right: other.degree(),
            });
        }
        Ok(())
    }

    /// `self` then `other`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        self.check_degree(other)?;
        Ok(self.mul_unchecked(other))
    }

    #[inline]
    pub(crate) fn mul_unchecked(&self, other: &Permutation) -> Permutation {
        Permutation {
            images: self
                .images
                .iter()
                .map(|&i| other.images[i as usize])
                .collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u32; self.images.len()];
        for (i, &img) in self.images.iter().enumerate() {
            inv[img as usize] = i as u32;
        }
        Permutation { images: inv }
    }

    /// `x^-1 * self * x`.
    pub fn conjugate(&self, x: &Permutation) -> Result<Permutation> {
        self.check_degree(x)?;
        Ok(self.conjugate_unchecked(x))
    }

    pub(crate) fn conjugate_unchecked(&self, x: &Permutation) -> Permutation {
        // i^(x^-1 g x): relabel. If i = j^x then i maps to (j^g)^x.
        let mut images = vec![0u32; self.images.len()];
        for (j, &gj) in self.images.iter().enumerate() {
            images[x.images[j] as usize] = x.images[gj as usize];
        }
        Permutation { images }
    }

    pub fn pow(&self, exp: usize) -> Permutation {
        let mut result = Permutation::identity(self.degree());
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_unchecked(&base);
            }
            base = base.mul_unchecked(&base);
            e >>= 1;
        }
        result
    }

    /// Nontrivial cycles, each starting at its smallest point, sorted by that point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] || self.images[start] as usize == start {
                continue;
            }
            let mut cycle = Vec::new();
            let mut cur = start;
            while !seen[cur] {
                seen[cur] = true;
                cycle.push(cur + 1);
                cur = self.images[cur] as usize;
            }
            out.push(cycle);
        }
        out
    }

    /// Sorted multiset of cycle lengths, fixed points included as 1-cycles.
    pub fn cycle_type(&self) -> Vec<usize> {
        let moved: usize = self.cycles().iter().map(Vec::len).sum();
        let mut lens: Vec<usize> = self.cycles().iter().map(Vec::len).collect();
        lens.extend(std::iter::repeat_n(1, self.degree() - moved));
        lens.sort_unstable();
        lens
    }

    pub fn parity(&self) -> Parity {
        let transpositions: usize = self.cycles().iter().map(|c| c.len() - 1).sum();
        if transpositions.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Element order (lcm of cycle lengths).
    pub fn order(&self) -> u64 {
        fn gcd(a: u64, b: u64) -> u64 {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        self.cycles()
            .iter()
            .map(|c| c.len() as u64)
            .fold(1, |acc, l| acc / gcd(acc, l) * l)
    }

    /// Smallest 1-based point moved, if any.
    pub fn smallest_moved_point(&self) -> Option<usize> {
        self.images
            .iter()
            .enumerate()
            .find(|(i, &v)| v as usize != *i)
            .map(|(i, _)| i + 1)
    }

    pub fn to_cycle_string(&self) -> String {
        self.to_string()
    }
}

/// Parses disjoint cycles such as `"(1 2 3)(4 5)"`; `"()"` is the identity.
pub fn parse_cycles(text: &str, degree: usize) -> Result<Permutation> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(Error::Parse {
            token: String::new(),
            reason: "empty input".into(),
        });
    }
    let mut cycles = Vec::new();
    let mut rest = trimmed;
    while !rest.is_empty() {
        let Some(body) = rest.strip_prefix('(') else {
            let tok: String = rest.chars().take_while(|c| *c != '(').collect();
            return Err(Error::Parse {
                token: tok,
                reason: "expected `(`".into(),
            });
        };
        let Some(close) = body.find(')') else {
            return Err(Error::Parse {
                token: rest.to_string(),
                reason: "unclosed cycle".into(),
            });
        };
        let inner = &body[..close];
        if inner.contains('(') {
            return Err(Error::Parse {
                token: rest[..close + 2].to_string(),
                reason: "nested `(`".into(),
            });
        }
        let mut cycle = Vec::new();
        for tok in inner.split_whitespace() {
            let pt: usize = tok.parse().map_err(|_| Error::Parse {
                token: tok.to_string(),
                reason: "not a positive integer".into(),
            })?;
            if pt == 0 || pt > degree {
                return Err(Error::Parse {
                    token: tok.to_string(),
                    reason: format!("point out of range 1..={degree}"),
                });
            }
            cycle.push(pt);
        }
        if !cycle.is_empty() {
            cycles.push(cycle);
        }
        rest = body[close + 1..].trim_start();
    }
    Permutation::from_cycles(&cycles, degree)
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return f.write_str("()");
        }
        for cycle in cycles {
            f.write_str("(")?;
            for (i, pt) in cycle.iter().enumerate() {
                if i > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{pt}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation[{}]{}", self.degree(), self)
    }
}

/// Panics on degree mismatch; use [`Permutation::compose`] for a checked product.
impl Mul for &Permutation {
    type Output = Permutation;

    fn mul(self, rhs: &Permutation) -> Permutation {
        assert_eq!(self.degree(), rhs.degree(), "degree mismatch in product");
        self.mul_unchecked(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str, n: usize) -> Permutation {
        parse_cycles(s, n).unwrap()
    }

    #[test]
    fn parse_three_cycle() {
        let g = p("(1 2 3)", 5);
        let imgs: Vec<usize> = (1..=5).map(|i| g.image(i)).collect();
        assert_eq!(imgs, vec![2, 3, 1, 4, 5]);
    }

    #[test]
    fn parse_identity() {
        let e = p("()", 4);
        assert!(e.is_identity());
        assert_eq!(e.degree(), 4);
        assert_eq!(e.to_string(), "()");
    }

    #[test]
    fn parse_rejects_repeated_point() {
        let err = parse_cycles("(1 2)(1 3)", 3).unwrap_err();
        match err {
            Error::Parse { token, .. } => assert_eq!(token, "1"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_out_of_range_and_garbage() {
        assert!(matches!(
            parse_cycles("(1 6)", 5),
            Err(Error::Parse { token, .. }) if token == "6"
        ));
        assert!(matches!(
            parse_cycles("(1 x)", 5),
            Err(Error::Parse { token, .. }) if token == "x"
        ));
        assert!(parse_cycles("(1 2", 5).is_err());
        assert!(parse_cycles("1 2)", 5).is_err());
        assert!(parse_cycles("((1 2))", 5).is_err());
        assert!(parse_cycles("", 5).is_err());
    }

    #[test]
    fn printing_is_canonical() {
        assert_eq!(p("(4 5)(3 1 2)", 5).to_string(), "(1 2 3)(4 5)");
        assert_eq!(p("(2 1)", 2).to_string(), "(1 2)");
    }

    #[test]
    fn compose_examples() {
        assert!(p("(1 2)", 3).compose(&p("(1 2)", 3)).unwrap().is_identity());
        assert_eq!(p("(1 2 3)", 3).compose(&p("(1 2 3)", 3)).unwrap(), p("(1 3 2)", 3));
        // independent image-table evaluation: 1 -> 2 -> 3, 2 -> 1 -> 1, 3 -> 3 -> 2
        let pq = p("(1 2)", 3).compose(&p("(2 3)", 3)).unwrap();
        assert_eq!(
            (1..=3).map(|i| pq.image(i)).collect::<Vec<_>>(),
            vec![3, 1, 2]
        );
        assert_eq!(pq, p("(1 3 2)", 3));
    }

    #[test]
    fn compose_degree_mismatch() {
        assert_eq!(
            p("(1 2)", 3).compose(&p("(1 2)", 4)),
            Err(Error::DegreeMismatch { left: 3, right: 4 })
        );
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(p("(1 2 3)", 3).inverse(), p("(1 3 2)", 3));
        assert!(Permutation::identity(4).inverse().is_identity());
        assert_eq!(p("(1 2)(3 4 5)", 5).inverse(), p("(1 2)(3 5 4)", 5));
    }

    #[test]
    fn conjugate_examples() {
        assert_eq!(
            p("(1 2 3)", 4).conjugate(&p("(3 4)", 4)).unwrap(),
            p("(1 2 4)", 4)
        );
        let g = p("(1 3)(2 4 5)", 5);
        assert_eq!(g.conjugate(&Permutation::identity(5)).unwrap(), g);
        assert_eq!(p("(1 2)", 3).conjugate(&p("(1 2)", 3)).unwrap(), p("(1 2)", 3));
        assert!(g.conjugate(&Permutation::identity(4)).is_err());
    }

    #[test]
    fn parity_examples() {
        assert_eq!(p("(1 2 3)", 4).parity(), Parity::Even);
        assert_eq!(p("(1 2)", 4).parity(), Parity::Odd);
        assert_eq!(p("(1 2)(3 4)", 4).parity(), Parity::Even);
    }

    #[test]
    fn from_images_validates() {
        assert!(Permutation::from_images(&[2, 1, 3]).is_ok());
        assert!(Permutation::from_images(&[2, 2, 3]).is_err());
        assert!(Permutation::from_images(&[4, 1, 2]).is_err());
    }

    #[test]
    fn order_and_pow() {
        let g = p("(1 2 3)(4 5)", 5);
        assert_eq!(g.order(), 6);
        assert!(g.pow(6).is_identity());
        assert_eq!(g.pow(2), p("(1 3 2)", 5));
    }

    fn arb_perm(n: usize) -> impl Strategy<Value = Permutation> {
        Just((0..n as u32).collect::<Vec<u32>>())
            .prop_shuffle()
            .prop_map(Permutation::from_zero_based_unchecked)
    }

    proptest! {
        #[test]
        fn cycle_text_round_trips(g in arb_perm(9)) {
            let text = g.to_string();
            prop_assert_eq!(parse_cycles(&text, 9).unwrap(), g.clone());
            prop_assert_eq!(parse_cycles(&text, 9).unwrap().to_string(), text);
        }

        #[test]
        fn conjugation_is_a_homomorphism(g in arb_perm(8), h in arb_perm(8), x in arb_perm(8)) {
            let lhs = g.compose(&h).unwrap().conjugate(&x).unwrap();
            let rhs = g.conjugate(&x).unwrap().compose(&h.conjugate(&x).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn parity_is_multiplicative(g in arb_perm(7), h in arb_perm(7)) {
            let gh = g.compose(&h).unwrap();
            prop_assert_eq!(gh.parity().is_even(), g.parity().is_even() == h.parity().is_even());
        }

        #[test]
        fn conjugation_preserves_cycle_type(g in arb_perm(10), x in arb_perm(10)) {
            prop_assert_eq!(g.conjugate(&x).unwrap().cycle_type(), g.cycle_type());
        }

        #[test]
        fn inverse_cancels(g in arb_perm(10)) {
            prop_assert!(g.compose(&g.inverse()).unwrap().is_identity());
        }
    }
}
