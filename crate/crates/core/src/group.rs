//! Permutation groups given by generators, backed by a deterministic
//! Schreier–Sims stabilizer chain.
//!
//! The chain uses every point as a base point, ascending unless a caller asks
//! for a different leading point. Levels whose basic orbit is trivial cost one
//! image lookup during sifting, and the reported base is the subsequence of
//! points with nontrivial basic orbits, i.e. at each level the smallest point
//! moved by the current stabilizer.

use std::collections::VecDeque;
use std::ops::ControlFlow;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::perm::{parse_cycles, Permutation};

/// Default cap on the number of elements enumerated by intersections and keys.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 2_000_000;

const NO_REP: u32 = u32::MAX;

#[derive(Clone, Debug)]
struct Level {
    point: usize,
    gens: Vec<Permutation>,
    orbit: Vec<usize>,
    // index into reps / reps_inv per point, NO_REP when outside the orbit
    slot: Vec<u32>,
    reps: Vec<Permutation>,
    reps_inv: Vec<Permutation>,
}

impl Level {
    fn new(point: usize, degree: usize) -> Self {
        let mut slot = vec![NO_REP; degree];
        slot[point] = 0;
        Level {
            point,
            gens: Vec::new(),
            orbit: vec![point],
            slot,
            reps: vec![Permutation::identity(degree)],
            reps_inv: vec![Permutation::identity(degree)],
        }
    }

    fn rebuild_orbit(&mut self) {
        let degree = self.slot.len();
        self.slot.iter_mut().for_each(|s| *s = NO_REP);
        self.orbit.clear();
        self.reps.clear();
        self.reps_inv.clear();
        self.slot[self.point] = 0;
        self.orbit.push(self.point);
        self.reps.push(Permutation::identity(degree));
        self.reps_inv.push(Permutation::identity(degree));
        let mut head = 0;
        while head < self.orbit.len() {
            let beta = self.orbit[head];
            let u = self.reps[self.slot[beta] as usize].clone();
            for s in &self.gens {
                let img = s.apply0(beta);
                if self.slot[img] == NO_REP {
                    let rep = u.mul_unchecked(s);
                    self.slot[img] = self.reps.len() as u32;
                    self.reps_inv.push(rep.inverse());
                    self.reps.push(rep);
                    self.orbit.push(img);
                }
            }
            head += 1;
        }
    }

    #[inline]
    fn rep(&self, beta: usize) -> Option<&Permutation> {
        match self.slot[beta] {
            NO_REP => None,
            s => Some(&self.reps[s as usize]),
        }
    }

    #[inline]
    fn rep_inv(&self, beta: usize) -> Option<&Permutation> {
        match self.slot[beta] {
            NO_REP => None,
            s => Some(&self.reps_inv[s as usize]),
        }
    }
}

#[derive(Clone, Debug)]
struct StabChain {
    levels: Vec<Level>,
}

impl StabChain {
    fn new(degree: usize, base_order: &[usize]) -> Self {
        StabChain {
            levels: base_order.iter().map(|&b| Level::new(b, degree)).collect(),
        }
    }

    /// Sifts `g` starting at `from`; returns the residue and the level where it stopped.
    fn strip(&self, mut g: Permutation, from: usize) -> (Permutation, usize) {
        for (l, level) in self.levels.iter().enumerate().skip(from) {
            let beta = g.apply0(level.point);
            if beta == level.point {
                continue;
            }
            match level.rep_inv(beta) {
                Some(inv) => g = g.mul_unchecked(inv),
                None => return (g, l),
            }
        }
        (g, self.levels.len())
    }

    fn first_moved_level(&self, g: &Permutation) -> Option<usize> {
        self.levels.iter().position(|l| g.apply0(l.point) != l.point)
    }

    fn add_generator(&mut self, g: Permutation) {
        let Some(j) = self.first_moved_level(&g) else {
            return;
        };
        for l in 0..=j {
            self.levels[l].gens.push(g.clone());
            self.levels[l].rebuild_orbit();
        }
        self.complete(j);
    }

    fn find_missing(&self, lvl: usize) -> Option<(Permutation, usize)> {
        let level = &self.levels[lvl];
        for &beta in &level.orbit {
            let u = level.rep(beta).expect("orbit point has a representative");
            for s in &level.gens {
                let us = u.mul_unchecked(s);
                let img = us.apply0(level.point);
                let back = level.rep(img).expect("orbit is closed");
                if &us == back {
                    continue;
                }
                let h = us.mul_unchecked(level.rep_inv(img).unwrap());
                let (y, j) = self.strip(h, lvl + 1);
                if !y.is_identity() {
                    return Some((y, j));
                }
            }
        }
        None
    }

    /// Schreier–Sims completion, assuming levels deeper than `start` are complete.
    fn complete(&mut self, start: usize) {
        let mut i = start as isize;
        while i >= 0 {
            let lvl = i as usize;
            match self.find_missing(lvl) {
                Some((y, j)) => {
                    debug_assert!(j < self.levels.len());
                    for l in lvl + 1..=j {
                        self.levels[l].gens.push(y.clone());
                        self.levels[l].rebuild_orbit();
                    }
                    i = j as isize;
                }
                None => i -= 1,
            }
        }
    }

    fn order(&self) -> BigUint {
        self.levels
            .iter()
            .fold(BigUint::one(), |acc, l| acc * BigUint::from(l.orbit.len()))
    }

    fn contains(&self, g: &Permutation) -> bool {
        let (y, _) = self.strip(g.clone(), 0);
        y.is_identity()
    }

    fn nontrivial_levels(&self) -> impl Iterator<Item = &Level> {
        self.levels.iter().filter(|l| l.orbit.len() > 1)
    }
}

/// A finite permutation group with a complete stabilizer chain.
#[derive(Clone, Debug)]
pub struct PermutationGroup {
    degree: usize,
    generators: Vec<Permutation>,
    chain: StabChain,
}

impl PermutationGroup {
    pub fn from_generators(gens: &[Permutation], degree: usize) -> Result<Self> {
        let order: Vec<usize> = (0..degree).collect();
        Self::with_base_order(gens, degree, order)
    }

    fn with_base_order(gens: &[Permutation], degree: usize, base: Vec<usize>) -> Result<Self> {
        for g in gens {
            if g.degree() != degree {
                return Err(Error::DegreeMismatch {
                    left: degree,
                    right: g.degree(),
                });
            }
        }
        let mut chain = StabChain::new(degree, &base);
        let mut kept = Vec::new();
        for g in gens {
            if g.is_identity() || kept.contains(g) {
                continue;
            }
            kept.push(g.clone());
            if let Some(j) = chain.first_moved_level(g) {
                for l in 0..=j {
                    chain.levels[l].gens.push(g.clone());
                }
            }
        }
        for level in &mut chain.levels {
            if !level.gens.is_empty() {
                level.rebuild_orbit();
            }
        }
        if degree > 0 {
            chain.complete(degree - 1);
        }
        Ok(PermutationGroup {
            degree,
            generators: kept,
            chain,
        })
    }

    pub fn trivial(degree: usize) -> Self {
        Self::from_generators(&[], degree).expect("no generators")
    }

    /// `Sym(n)` from `(1 2)` and `(1 2 ... n)`.
    pub fn symmetric(n: usize) -> Self {
        let mut gens = Vec::new();
        if n >= 2 {
            gens.push(Permutation::from_cycles(&[vec![1, 2]], n).unwrap());
            gens.push(Permutation::from_cycles(&[(1..=n).collect()], n).unwrap());
        }
        Self::from_generators(&gens, n).unwrap()
    }

    pub fn alternating(n: usize) -> Self {
        Self::symmetric(n).even_part()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn order(&self) -> BigUint {
        self.chain.order()
    }

    /// Order as `usize`, if it fits.
    pub fn order_usize(&self) -> Option<usize> {
        self.order().to_usize()
    }

    pub fn is_trivial(&self) -> bool {
        self.generators.is_empty()
    }

    /// Base points (1-based) with nontrivial basic orbits, in chain order.
    pub fn base(&self) -> Vec<usize> {
        self.chain.nontrivial_levels().map(|l| l.point + 1).collect()
    }

    /// Basic orbit sizes along [`PermutationGroup::base`].
    pub fn basic_orbit_sizes(&self) -> Vec<usize> {
        self.chain.nontrivial_levels().map(|l| l.orbit.len()).collect()
    }

    pub fn strong_generators(&self) -> &[Permutation] {
        self.chain
            .levels
            .first()
            .map(|l| l.gens.as_slice())
            .unwrap_or(&[])
    }

    fn check_degree(&self, p: &Permutation) -> Result<()> {
        if p.degree() != self.degree {
            return Err(Error::DegreeMismatch {
                left: self.degree,
                right: p.degree(),
            });
        }
        Ok(())
    }

    fn check_group_degree(&self, other: &PermutationGroup) -> Result<()> {
        if other.degree != self.degree {
            return Err(Error::DegreeMismatch {
                left: self.degree,
                right: other.degree,
            });
        }
        Ok(())
    }

    pub fn contains(&self, p: &Permutation) -> Result<bool> {
        self.check_degree(p)?;
        Ok(self.chain.contains(p))
    }

    pub(crate) fn contains_unchecked(&self, p: &Permutation) -> bool {
        self.chain.contains(p)
    }

    /// Adds a generator, extending the chain in place.
    pub fn add_generator(&mut self, g: Permutation) -> Result<()> {
        self.check_degree(&g)?;
        if self.chain.contains(&g) {
            return Ok(());
        }
        self.generators.push(g.clone());
        self.chain.add_generator(g);
        Ok(())
    }

    /// Visits every element exactly once, in a fixed order.
    pub fn for_each_element<F>(&self, mut f: F)
    where
        F: FnMut(&Permutation) -> ControlFlow<()>,
    {
        let levels: Vec<&Level> = self.chain.nontrivial_levels().collect();
        let id = Permutation::identity(self.degree);
        if levels.is_empty() {
            let _ = f(&id);
            return;
        }
        // element = u_k * ... * u_1, deepest level first
        fn rec<F: FnMut(&Permutation) -> ControlFlow<()>>(
            levels: &[&Level],
            acc: &Permutation,
            f: &mut F,
        ) -> ControlFlow<()> {
            let (last, rest) = levels.split_last().unwrap();
            for u in &last.reps {
                let next = acc.mul_unchecked(u);
                if rest.is_empty() {
                    f(&next)?;
                } else {
                    rec(rest, &next, f)?;
                }
            }
            ControlFlow::Continue(())
        }
        // split_last picks the deepest remaining level, which must be leftmost
        let _ = rec(&levels, &id, &mut f);
    }

    /// All elements, refusing groups larger than `limit`.
    pub fn elements(&self, limit: usize) -> Result<Vec<Permutation>> {
        self.check_enumerable(limit)?;
        let mut out = Vec::with_capacity(self.order_usize().unwrap_or(0));
        self.for_each_element(|g| {
            out.push(g.clone());
            ControlFlow::Continue(())
        });
        Ok(out)
    }

    fn check_enumerable(&self, limit: usize) -> Result<()> {
        let order = self.order();
        if order > BigUint::from(limit) {
            return Err(Error::GroupTooLarge {
                order: order.to_string(),
                limit,
            });
        }
        Ok(())
    }

    /// Orbit of a 1-based point, in breadth-first order.
    pub fn orbit(&self, point: usize) -> Result<Vec<usize>> {
        self.check_point(point)?;
        let mut seen = vec![false; self.degree];
        let mut out = vec![point - 1];
        seen[point - 1] = true;
        let mut head = 0;
        while head < out.len() {
            let b = out[head];
            for g in &self.generators {
                let img = g.apply0(b);
                if !seen[img] {
                    seen[img] = true;
                    out.push(img);
                }
            }
            head += 1;
        }
        Ok(out.into_iter().map(|p| p + 1).collect())
    }

    pub fn is_transitive(&self) -> bool {
        self.degree == 0 || self.orbit(1).map(|o| o.len() == self.degree).unwrap_or(false)
    }

    fn check_point(&self, point: usize) -> Result<()> {
        if point == 0 || point > self.degree {
            return Err(Error::PointOutOfRange {
                point,
                degree: self.degree,
            });
        }
        Ok(())
    }

    pub fn point_stabilizer(&self, point: usize) -> Result<PermutationGroup> {
        self.check_point(point)?;
        let mut base = vec![point - 1];
        base.extend((0..self.degree).filter(|&p| p != point - 1));
        let rebased = Self::with_base_order(self.strong_generators(), self.degree, base)?;
        let gens = rebased
            .chain
            .levels
            .get(1)
            .map(|l| l.gens.clone())
            .unwrap_or_default();
        Self::from_generators(&gens, self.degree)
    }

    pub fn pointwise_stabilizer(&self, points: &[usize]) -> Result<PermutationGroup> {
        points
            .iter()
            .try_fold(self.clone(), |g, &p| g.point_stabilizer(p))
    }

    /// The group generated by `{g^x : g in generators}`.
    pub fn conjugate_group(&self, x: &Permutation) -> Result<PermutationGroup> {
        self.check_degree(x)?;
        let gens: Vec<Permutation> = self
            .generators
            .iter()
            .map(|g| g.conjugate_unchecked(x))
            .collect();
        Self::from_generators(&gens, self.degree)
    }

    /// Builds the subgroup generated by the elements yielded, choosing
    /// generators greedily in iteration order.
    pub fn from_elements<'a, I>(elements: I, degree: usize) -> Result<PermutationGroup>
    where
        I: IntoIterator<Item = &'a Permutation>,
    {
        let mut group = Self::trivial(degree);
        for e in elements {
            group.check_degree(e)?;
            if !group.chain.contains(e) {
                group.generators.push(e.clone());
                group.chain.add_generator(e.clone());
            }
        }
        Ok(group)
    }

    /// Exact intersection by filtering the smaller group's elements through
    /// membership in the larger one.
    pub fn intersect(&self, other: &PermutationGroup, limit: usize) -> Result<PermutationGroup> {
        self.check_group_degree(other)?;
        let (small, large) = if self.order() <= other.order() {
            (self, other)
        } else {
            (other, self)
        };
        if small.order() > BigUint::from(limit) {
            return Err(Error::IntersectionTooLarge { limit });
        }
        let mut result = Self::trivial(self.degree);
        let mut count: usize = 0;
        small.for_each_element(|g| {
            if large.chain.contains(g) {
                count += 1;
                if !result.chain.contains(g) {
                    result.generators.push(g.clone());
                    result.chain.add_generator(g.clone());
                }
            }
            ControlFlow::Continue(())
        });
        debug_assert_eq!(result.order(), BigUint::from(count));
        Ok(result)
    }

    pub fn subgroup_of(&self, other: &PermutationGroup) -> Result<bool> {
        self.check_group_degree(other)?;
        Ok(self.generators.iter().all(|g| other.chain.contains(g)))
    }

    pub fn equals(&self, other: &PermutationGroup) -> Result<bool> {
        self.check_group_degree(other)?;
        Ok(self.order() == other.order() && self.subgroup_of(other)?)
    }

    /// Canonical fingerprint of the element set.
    pub fn group_key(&self, limit: usize) -> Result<GroupKey> {
        let mut elements = self.elements(limit)?;
        elements.sort_unstable();
        Ok(GroupKey::from_sorted_elements(&elements))
    }

    /// `G ∩ Alt(n)` via Schreier generators for the sign kernel.
    pub fn even_part(&self) -> PermutationGroup {
        let odd: Vec<&Permutation> = self
            .generators
            .iter()
            .filter(|g| !g.parity().is_even())
            .collect();
        let Some(t) = odd.first().copied() else {
            return self.clone();
        };
        let t_inv = t.inverse();
        let mut gens = Vec::new();
        for s in &self.generators {
            if s.parity().is_even() {
                gens.push(s.clone());
                gens.push(t.mul_unchecked(s).mul_unchecked(&t_inv));
            } else {
                gens.push(s.mul_unchecked(&t_inv));
                gens.push(t.mul_unchecked(s));
            }
        }
        Self::from_generators(&gens, self.degree).expect("same degree")
    }

    pub fn is_even(&self) -> bool {
        self.generators.iter().all(|g| g.parity().is_even())
    }

    /// Orbits of the group on `1..=degree`, each sorted, ordered by smallest point.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.degree];
        let mut out = Vec::new();
        for start in 0..self.degree {
            if seen[start] {
                continue;
            }
            let mut orbit = Vec::new();
            let mut queue = VecDeque::from([start]);
            seen[start] = true;
            while let Some(b) = queue.pop_front() {
                orbit.push(b + 1);
                for g in &self.generators {
                    let img = g.apply0(b);
                    if !seen[img] {
                        seen[img] = true;
                        queue.push_back(img);
                    }
                }
            }
            orbit.sort_unstable();
            out.push(orbit);
        }
        out
    }

    /// Lexicographically least element of the right coset `self * g`,
    /// a canonical representative for the coset.
    pub fn canonical_coset_rep(&self, g: &Permutation) -> Permutation {
        let mut cur = g.clone();
        for level in self.chain.nontrivial_levels() {
            let best = level
                .orbit
                .iter()
                .copied()
                .min_by_key(|&beta| cur.apply0(beta))
                .unwrap();
            if best != level.point {
                cur = level.rep(best).unwrap().mul_unchecked(&cur);
            }
        }
        cur
    }
}

/// Order plus SHA-256 over the sorted image tables of all elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupKey {
    pub order: BigUint,
    pub digest: [u8; 32],
}

impl GroupKey {
    /// Key for an element list that is already sorted and duplicate free.
    pub fn from_sorted_elements(elements: &[Permutation]) -> GroupKey {
        let mut hasher = Sha256::new();
        for e in elements {
            for &img in e.images() {
                hasher.update(img.to_le_bytes());
            }
        }
        GroupKey {
            order: BigUint::from(elements.len()),
            digest: hasher.finalize().into(),
        }
    }

    pub fn hex_digest(&self) -> String {
        self.digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Reads the generator-file format: line 1 is the degree, then one
/// permutation per line in cycle notation. Blank lines and `#` comments are skipped.
pub fn parse_generator_file(text: &str) -> Result<(usize, Vec<Permutation>)> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let first = lines.next().ok_or_else(|| Error::Parse {
        token: String::new(),
        reason: "missing degree line".into(),
    })?;
    let degree: usize = first.parse().map_err(|_| Error::Parse {
        token: first.to_string(),
        reason: "degree must be a positive integer".into(),
    })?;
    if degree == 0 {
        return Err(Error::Parse {
            token: first.to_string(),
            reason: "degree must be a positive integer".into(),
        });
    }
    let gens = lines
        .map(|l| parse_cycles(l, degree))
        .collect::<Result<Vec<_>>>()?;
    Ok((degree, gens))
}

/// Writes the generator-file format.
pub fn format_generator_file(degree: usize, gens: &[Permutation]) -> String {
    let mut out = format!("{degree}\n");
    for g in gens {
        out.push_str(&g.to_string());
        out.push('\n');
    }
    out
}
