//! Exact maximum irredundant base size of a transitive action, computed as
//! the longest strictly descending chain of point stabilizers. The action of
//! `G` on the right cosets of a core-free `H` is realized explicitly; the
//! stabilizer of coset `H x_i` is `H^{x_i}`.

use std::collections::HashMap;

use dashmap::DashMap;
use num_bigint::BigUint;
use rayon::prelude::*;

use crate::bounds::Ambient;
use crate::certificate::{CertificateLevel, ChainCertificate, SubgroupDescription};
use crate::error::{Error, Result};
use crate::group::{GroupKey, PermutationGroup, DEFAULT_ENUMERATION_LIMIT};
use crate::perm::Permutation;

pub const DEFAULT_INDEX_LIMIT: usize = 20_000;
pub const DEFAULT_MEMO_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    /// Largest index `|G : H|` accepted.
    pub max_index: usize,
    /// Largest `|H|` enumerated.
    pub max_enumeration: usize,
    /// Largest number of memoized subgroups.
    pub max_memo: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_index: DEFAULT_INDEX_LIMIT,
            max_enumeration: DEFAULT_ENUMERATION_LIMIT,
            max_memo: DEFAULT_MEMO_LIMIT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleOptions {
    pub limits: OracleLimits,
    /// Restrict moves to one point per orbit of the current subgroup.
    pub prune: bool,
    /// Worker threads; `1` runs sequentially, `0` uses every core.
    pub threads: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            limits: OracleLimits::default(),
            prune: true,
            threads: 1,
        }
    }
}

/// `G` acting on the right cosets of `H`; point `i` (1-based) is `H x_i`.
#[derive(Debug, Clone)]
pub struct CosetAction {
    ambient: PermutationGroup,
    subgroup: PermutationGroup,
    transversal: Vec<Permutation>,
    table: Vec<Vec<u32>>,
    lookup: HashMap<Permutation, u32>,
}

/// Builds the coset action by breadth-first search from the identity coset,
/// canonicalizing each coset by its lexicographically least element.
pub fn build_coset_action(g: &PermutationGroup, h: &PermutationGroup, limit_t: usize) -> Result<CosetAction> {
    if !h.subgroup_of(g)? {
        return Err(Error::NotSubgroup);
    }
    let order_g = g.order();
    let order_h = h.order();
    let index = &order_g / &order_h;
    if index > BigUint::from(limit_t) {
        return Err(Error::IndexTooLarge {
            index: index.to_string(),
            limit: limit_t,
        });
    }
    let t: usize = index.try_into().expect("index below the limit fits in usize");
    let gens = g.generators();
    let identity = Permutation::identity(g.degree());
    let mut transversal = vec![h.canonical_coset_rep(&identity)];
    let mut lookup = HashMap::with_capacity(t);
    lookup.insert(transversal[0].clone(), 0u32);
    let mut table = vec![Vec::with_capacity(t); gens.len()];
    let mut head = 0;
    while head < transversal.len() {
        let rep = transversal[head].clone();
        for (s, gen) in gens.iter().enumerate() {
            let c = h.canonical_coset_rep(&rep.mul_unchecked(gen));
            let next = transversal.len() as u32;
            let j = *lookup.entry(c.clone()).or_insert_with(|| {
                transversal.push(c);
                next
            });
            table[s].push(j);
        }
        head += 1;
    }
    debug_assert_eq!(transversal.len(), t);
    let action = CosetAction {
        ambient: g.clone(),
        subgroup: h.clone(),
        transversal,
        table,
        lookup,
    };
    if !action.is_faithful() {
        return Err(Error::NotFaithful);
    }
    log::debug!("coset action on {t} points built");
    Ok(action)
}

impl CosetAction {
    /// Number of cosets `t`.
    pub fn degree(&self) -> usize {
        self.transversal.len()
    }

    pub fn ambient(&self) -> &PermutationGroup {
        &self.ambient
    }

    pub fn subgroup(&self) -> &PermutationGroup {
        &self.subgroup
    }

    pub fn transversal(&self) -> &[Permutation] {
        &self.transversal
    }

    /// Images of each (0-based) coset under each generator of `G`.
    pub fn action_table(&self) -> &[Vec<u32>] {
        &self.table
    }

    /// The generators of `G` as permutations of the cosets.
    pub fn generator_images(&self) -> Result<Vec<Permutation>> {
        self.table
            .iter()
            .map(|row| Permutation::from_images(&row.iter().map(|&j| j as usize + 1).collect::<Vec<_>>()))
            .collect()
    }

    /// The coset `H g`, as a 1-based point.
    pub fn point_of(&self, g: &Permutation) -> Result<usize> {
        if g.degree() != self.ambient.degree() {
            return Err(Error::DegreeMismatch {
                left: self.ambient.degree(),
                right: g.degree(),
            });
        }
        let c = self.subgroup.canonical_coset_rep(g);
        self.lookup
            .get(&c)
            .map(|&i| i as usize + 1)
            .ok_or(Error::NotSubgroup)
    }

    fn image0(&self, i: usize, g: &Permutation) -> usize {
        let c = self.subgroup.canonical_coset_rep(&self.transversal[i].mul_unchecked(g));
        self.lookup[&c] as usize
    }

    /// `g` is in the stabilizer `H^{x_i}` of point `i` (0-based).
    fn fixes(&self, i: usize, g: &Permutation) -> bool {
        let x = &self.transversal[i];
        self.subgroup
            .contains_unchecked(&x.mul_unchecked(g).mul_unchecked(&x.inverse()))
    }

    // The kernel is the core of H; any nontrivial core element fixes every coset.
    fn is_faithful(&self) -> bool {
        let mut faithful = true;
        let t = self.degree();
        self.subgroup.for_each_element(|h| {
            if !h.is_identity() && (1..t).all(|i| self.fixes(i, h)) {
                faithful = false;
                return std::ops::ControlFlow::Break(());
            }
            std::ops::ControlFlow::Continue(())
        });
        faithful
    }
}

/// A subgroup of `H` during the search, held as its sorted element list.
struct State {
    elements: Vec<Permutation>,
    key: GroupKey,
}

impl State {
    fn new(elements: Vec<Permutation>) -> Self {
        let key = GroupKey::from_sorted_elements(&elements);
        State { elements, key }
    }

    fn order(&self) -> usize {
        self.elements.len()
    }
}

#[derive(Debug, Clone, Copy)]
struct MemoEntry {
    depth: usize,
    best: Option<usize>,
}

struct Search<'a> {
    action: &'a CosetAction,
    prune: bool,
    parallel: bool,
    max_memo: usize,
    memo: DashMap<GroupKey, MemoEntry>,
}

impl Search<'_> {
    fn child(&self, state: &State, point: usize) -> State {
        let kept = state
            .elements
            .iter()
            .filter(|c| self.action.fixes(point, c))
            .cloned()
            .collect();
        State::new(kept)
    }

    fn candidates(&self, state: &State) -> Result<Vec<usize>> {
        let t = self.action.degree();
        if !self.prune {
            return Ok((0..t).collect());
        }
        let group = PermutationGroup::from_elements(&state.elements, self.action.ambient.degree())?;
        let gens = group.generators();
        let mut seen = vec![false; t];
        let mut reps = Vec::new();
        for start in 0..t {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut orbit = vec![start];
            let mut head = 0;
            while head < orbit.len() {
                let i = orbit[head];
                for g in gens {
                    let j = self.action.image0(i, g);
                    if !seen[j] {
                        seen[j] = true;
                        orbit.push(j);
                    }
                }
                head += 1;
            }
            if orbit.len() > 1 {
                reps.push(start);
            }
        }
        Ok(reps)
    }

    /// Longest strictly descending stabilizer chain from `state` to `1`.
    fn depth(&self, state: &State) -> Result<usize> {
        if state.order() == 1 {
            return Ok(0);
        }
        if let Some(e) = self.memo.get(&state.key) {
            return Ok(e.depth);
        }
        let candidates = self.candidates(state)?;
        let eval = |&i: &usize| -> Result<Option<(usize, usize)>> {
            let child = self.child(state, i);
            if child.order() == state.order() {
                return Ok(None);
            }
            Ok(Some((self.depth(&child)? + 1, i)))
        };
        let results: Vec<Option<(usize, usize)>> = if self.parallel {
            candidates.par_iter().map(eval).collect::<Result<_>>()?
        } else {
            candidates.iter().map(eval).collect::<Result<_>>()?
        };
        // deepest first, ties to the smallest point
        let best = results
            .into_iter()
            .flatten()
            .fold(None, |acc: Option<(usize, usize)>, (d, i)| match acc {
                Some((bd, bi)) if bd > d || (bd == d && bi < i) => Some((bd, bi)),
                _ => Some((d, i)),
            });
        let (depth, best) = match best {
            Some((d, i)) => (d, Some(i)),
            None => unreachable!("a nontrivial subgroup of a faithful action moves some point"),
        };
        if self.memo.len() >= self.max_memo {
            return Err(Error::MemoLimit {
                limit: self.max_memo,
            });
        }
        self.memo.entry(state.key.clone()).or_insert(MemoEntry { depth, best });
        Ok(depth)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MibsResult {
    pub value: usize,
    /// Witness base (1-based coset points), one point per level.
    pub points: Vec<usize>,
    pub levels: Vec<CertificateLevel>,
    pub memo_entries: usize,
}

impl MibsResult {
    pub fn certificate(&self, degree: usize, ambient: Ambient, subgroup: SubgroupDescription) -> ChainCertificate {
        ChainCertificate::new(degree, ambient, subgroup, self.levels.clone())
    }
}

/// Exact maximum irredundant base size with one maximum-length witness.
pub fn mibs(action: &CosetAction, options: &OracleOptions) -> Result<MibsResult> {
    let limits = options.limits;
    if action.degree() > limits.max_index {
        return Err(Error::IndexTooLarge {
            index: action.degree().to_string(),
            limit: limits.max_index,
        });
    }
    let h_elements = {
        let mut e = action.subgroup.elements(limits.max_enumeration)?;
        e.sort_unstable();
        e
    };
    let search = Search {
        action,
        prune: options.prune,
        parallel: options.threads != 1,
        max_memo: limits.max_memo,
        memo: DashMap::new(),
    };
    let root = State::new(h_elements);
    let depth = if search.parallel {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if options.threads > 1 {
            builder = builder.num_threads(options.threads);
        }
        let pool = builder
            .build()
            .map_err(|e| Error::InvalidParameters(format!("thread pool: {e}")))?;
        pool.install(|| search.depth(&root))?
    } else {
        search.depth(&root)?
    };

    // replay the recorded best moves from H
    let mut points = vec![1];
    let mut conjugators = vec![action.transversal[0].clone()];
    let mut levels = vec![CertificateLevel {
        conjugators: conjugators.clone(),
        order: BigUint::from(root.order()),
    }];
    let mut state = root;
    while state.order() > 1 {
        let best = search
            .memo
            .get(&state.key)
            .and_then(|e| e.best)
            .expect("every visited nontrivial state is memoized");
        state = search.child(&state, best);
        points.push(best + 1);
        conjugators.push(action.transversal[best].clone());
        levels.push(CertificateLevel {
            conjugators: conjugators.clone(),
            order: BigUint::from(state.order()),
        });
    }
    debug_assert_eq!(levels.len(), depth + 1);
    log::debug!("mibs = {} with {} memoized subgroups", depth + 1, search.memo.len());
    Ok(MibsResult {
        value: depth + 1,
        points,
        levels,
        memo_entries: search.memo.len(),
    })
}

/// Converts a chain certificate into an irredundant base of the coset action:
/// the points `H x` for the conjugators `x` of each level, in order, keeping
/// only those that shrink the stabilizer.
pub fn chain_to_base(cert: &ChainCertificate, action: &CosetAction) -> Result<Vec<usize>> {
    let n = action.ambient.degree();
    if cert.degree != n {
        return Err(Error::DegreeMismatch {
            left: n,
            right: cert.degree,
        });
    }
    let h_elements = action.subgroup.elements(DEFAULT_ENUMERATION_LIMIT)?;
    let mut current: Option<Vec<Permutation>> = None;
    let mut base: Vec<usize> = Vec::new();
    let mut previous_order: Option<usize> = None;
    for (index, level) in cert.levels.iter().enumerate() {
        for x in &level.conjugators {
            let point = action.point_of(x)?;
            if base.contains(&point) {
                continue;
            }
            let next: Vec<Permutation> = match &current {
                None => {
                    let x_inv = x.inverse();
                    h_elements
                        .iter()
                        .map(|h| x_inv.mul_unchecked(h).mul_unchecked(x))
                        .collect()
                }
                Some(elems) => elems
                    .iter()
                    .filter(|e| action.fixes(point - 1, e))
                    .cloned()
                    .collect(),
            };
            if current.as_ref().is_none_or(|c| next.len() < c.len()) {
                base.push(point);
                current = Some(next);
            }
        }
        let order = current.as_ref().map_or(0, Vec::len);
        if previous_order.is_some_and(|p| order >= p) || BigUint::from(order) != level.order {
            return Err(Error::InvalidCertificate(format!(
                "level {index} is not strictly descending or has the wrong order"
            )));
        }
        previous_order = Some(order);
    }
    if previous_order != Some(1) {
        return Err(Error::InvalidCertificate("chain does not end at the trivial group".into()));
    }
    Ok(base)
}

/// Whether each point of `points` strictly shrinks the pointwise stabilizer
/// and the final stabilizer is trivial.
pub fn is_irredundant_base(action: &CosetAction, points: &[usize]) -> Result<bool> {
    let Some((&first, rest)) = points.split_first() else {
        return Ok(action.ambient.is_trivial());
    };
    let x = &action.transversal[first - 1];
    let x_inv = x.inverse();
    let mut current: Vec<Permutation> = action
        .subgroup
        .elements(DEFAULT_ENUMERATION_LIMIT)?
        .iter()
        .map(|h| x_inv.mul_unchecked(h).mul_unchecked(x))
        .collect();
    if BigUint::from(current.len()) >= action.ambient.order() {
        return Ok(false);
    }
    for &p in rest {
        let next: Vec<Permutation> = current.iter().filter(|e| action.fixes(p - 1, e)).cloned().collect();
        if next.len() >= current.len() {
            return Ok(false);
        }
        current = next;
    }
    Ok(current.len() == 1)
}

/// `Sym(n)` or `Alt(n)` with the stabilizer of the point `n`.
pub fn natural_pair(n: usize, ambient: Ambient) -> Result<(PermutationGroup, PermutationGroup)> {
    let g = match ambient {
        Ambient::Symmetric => PermutationGroup::symmetric(n),
        Ambient::Alternating => PermutationGroup::alternating(n),
    };
    let h = g.point_stabilizer(n)?;
    Ok((g, h))
}
