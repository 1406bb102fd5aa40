//! The affine group `AGL(d, p)` acting on `V = F_p^d`, identified with the
//! points `1..=p^d`, together with the conjugators and subgroup chains that
//! descend from `AGL(d, p)` through the diagonal subgroup to the identity.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use num_bigint::BigUint;
use num_traits::One;

use crate::bounds::{prime_factors, Ambient};
use crate::certificate::{CertificateLevel, ChainCertificate, SubgroupDescription, SubgroupFamily};
use crate::error::{Error, Result};
use crate::field::{inv_mod, is_prime, pow_mod, smallest_primitive_root};
use crate::group::PermutationGroup;
use crate::perm::Permutation;

/// Largest `p^d` accepted; keeps degrees in desk range.
const MAX_DEGREE: u64 = 1 << 20;

/// A row vector over `F_p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldVector {
    p: u64,
    coords: Vec<u64>,
}

impl FieldVector {
    pub fn new(p: u64, coords: Vec<u64>) -> Result<Self> {
        if let Some(&c) = coords.iter().find(|&&c| c >= p) {
            return Err(Error::InvalidParameters(format!(
                "coordinate {c} is not a residue mod {p}"
            )));
        }
        if coords.is_empty() {
            return Err(Error::InvalidParameters("vector must have dimension >= 1".into()));
        }
        Ok(FieldVector { p, coords })
    }

    pub fn zero(p: u64, d: usize) -> Self {
        FieldVector { p, coords: vec![0; d] }
    }

    /// The `i`-th standard basis vector, `i` 1-based.
    pub fn basis(p: u64, d: usize, i: usize) -> Self {
        let mut coords = vec![0; d];
        coords[i - 1] = 1;
        FieldVector { p, coords }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn add(&self, other: &FieldVector) -> FieldVector {
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a + b) % self.p)
            .collect();
        FieldVector { p: self.p, coords }
    }

    pub fn scale(&self, c: u64) -> FieldVector {
        let coords = self.coords.iter().map(|a| a * c % self.p).collect();
        FieldVector { p: self.p, coords }
    }

    /// `1 + Σ_j coords[j] p^j`.
    pub fn to_point(&self) -> usize {
        encode(self.p, &self.coords) + 1
    }

    pub fn from_point(p: u64, d: usize, point: usize) -> Result<Self> {
        let n = (p as usize).pow(d as u32);
        if point == 0 || point > n {
            return Err(Error::PointOutOfRange { point, degree: n });
        }
        Ok(FieldVector {
            p,
            coords: decode(p, d, point - 1),
        })
    }
}

fn encode(p: u64, coords: &[u64]) -> usize {
    coords
        .iter()
        .rev()
        .fold(0usize, |acc, &c| acc * p as usize + c as usize)
}

fn decode(p: u64, d: usize, mut index: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(d);
    for _ in 0..d {
        out.push((index % p as usize) as u64);
        index /= p as usize;
    }
    out
}

/// Determinant over `F_p` by Gaussian elimination.
pub fn determinant_mod(matrix: &[Vec<u64>], p: u64) -> u64 {
    let d = matrix.len();
    let mut a: Vec<Vec<u64>> = matrix.iter().map(|r| r.iter().map(|x| x % p).collect()).collect();
    let mut det = 1u64;
    for col in 0..d {
        let Some(pivot) = (col..d).find(|&r| a[r][col] != 0) else {
            return 0;
        };
        if pivot != col {
            a.swap(pivot, col);
            det = (p - det) % p;
        }
        det = det * a[col][col] % p;
        let inv = inv_mod(a[col][col], p);
        for r in col + 1..d {
            let f = a[r][col] * inv % p;
            if f == 0 {
                continue;
            }
            for c in col..d {
                a[r][c] = (a[r][c] + p * p - f * a[col][c] % p) % p;
            }
        }
    }
    det
}

fn rank_mod(rows: &[Vec<u64>], p: u64) -> usize {
    let mut a: Vec<Vec<u64>> = rows.to_vec();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..a.len()).find(|&r| a[r][col] != 0) else {
            continue;
        };
        a.swap(pivot, rank);
        let inv = inv_mod(a[rank][col], p);
        for r in 0..a.len() {
            if r != rank && a[r][col] != 0 {
                let f = a[r][col] * inv % p;
                for c in 0..cols {
                    a[r][c] = (a[r][c] + p * p - f * a[rank][c] % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// `v ↦ v·matrix + translation` with `matrix` invertible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineMap {
    matrix: Vec<Vec<u64>>,
    translation: FieldVector,
}

impl AffineMap {
    pub fn new(matrix: Vec<Vec<u64>>, translation: FieldVector) -> Result<Self> {
        let p = translation.p;
        let d = translation.dimension();
        if matrix.len() != d || matrix.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidParameters(format!("matrix must be {d}x{d}")));
        }
        if matrix.iter().flatten().any(|&x| x >= p) {
            return Err(Error::InvalidParameters(format!("matrix entries must be residues mod {p}")));
        }
        if determinant_mod(&matrix, p) == 0 {
            return Err(Error::SingularMatrix);
        }
        Ok(AffineMap { matrix, translation })
    }

    pub fn linear(matrix: Vec<Vec<u64>>, p: u64) -> Result<Self> {
        let d = matrix.len();
        Self::new(matrix, FieldVector::zero(p, d))
    }

    pub fn translation(t: FieldVector) -> Self {
        let d = t.dimension();
        AffineMap {
            matrix: identity_matrix(d),
            translation: t,
        }
    }

    pub fn apply(&self, v: &FieldVector) -> FieldVector {
        let p = self.translation.p;
        let d = v.dimension();
        let coords = (0..d)
            .map(|j| {
                let s: u64 = (0..d).map(|i| v.coords[i] * self.matrix[i][j] % p).sum();
                (s + self.translation.coords[j]) % p
            })
            .collect();
        FieldVector { p, coords }
    }

    /// The permutation of `1..=p^d` induced on points.
    pub fn to_permutation(&self) -> Permutation {
        let p = self.translation.p;
        let d = self.translation.dimension();
        let n = (p as usize).pow(d as u32);
        Permutation::from_fn(n, |i| {
            let v = FieldVector {
                p,
                coords: decode(p, d, i),
            };
            encode(p, &self.apply(&v).coords)
        })
    }
}

fn identity_matrix(d: usize) -> Vec<Vec<u64>> {
    (0..d)
        .map(|i| (0..d).map(|j| u64::from(i == j)).collect())
        .collect()
}

/// One step of the descent from `GL(d, p)` to the diagonal subgroup.
#[derive(Debug, Clone)]
pub struct SubspaceStep {
    /// `(i, j)`: the subspace is spanned by basis vectors `i..=j`.
    pub index: (usize, usize),
    /// Setwise stabilizer of the subspace in `GL(d, p)`.
    pub stabilizer: PermutationGroup,
    /// Lies in the previous running intersection but not in `stabilizer`.
    pub witness: Permutation,
    /// `x` with `AGL ∩ AGL^x = stabilizer`.
    pub conjugator: Permutation,
    /// Intersection of all stabilizers so far.
    pub running: PermutationGroup,
}

/// One step of the descent from the diagonal subgroup to the identity.
#[derive(Debug, Clone)]
pub struct DiagonalStep {
    /// 1-based coordinate whose scaling is restricted.
    pub coordinate: usize,
    /// The scaling on `coordinate` is restricted to its `divisor`-th powers.
    pub divisor: u64,
    pub conjugator: Permutation,
    /// `T ∩ ∩_y T^y` over all conjugators so far.
    pub running: PermutationGroup,
}

/// `AGL(d, p)` on `p^d` points with the diagonal subgroup `T`.
#[derive(Debug, Clone)]
pub struct AffineContext {
    p: u64,
    d: usize,
    primitive_root: u64,
    degree: usize,
    agl: PermutationGroup,
    gl: PermutationGroup,
    diagonal: PermutationGroup,
    diagonal_generators: Vec<Permutation>,
}

/// Builds `AGL(d, p)` from transvections, `diag(μ, 1, …, 1)` and the basis
/// translations, with `μ` the smallest primitive root mod `p`.
pub fn build_agl(p: u64, d: u64) -> Result<AffineContext> {
    if !is_prime(p) {
        return Err(Error::InvalidParameters(format!("p = {p} is not prime")));
    }
    if p == 2 {
        return Err(Error::InvalidParameters("odd p required".into()));
    }
    if d == 0 {
        return Err(Error::InvalidParameters("dimension must be >= 1".into()));
    }
    let degree = (p as u128).checked_pow(d as u32).filter(|&n| n <= MAX_DEGREE as u128);
    let Some(degree) = degree else {
        return Err(Error::InvalidParameters(format!("p^d = {p}^{d} is too large")));
    };
    let degree = degree as usize;
    let d = d as usize;
    let mu = smallest_primitive_root(p);

    let mut linear = Vec::new();
    let mut scale = identity_matrix(d);
    scale[0][0] = mu;
    linear.push(AffineMap::linear(scale, p)?.to_permutation());
    for i in 0..d {
        for j in 0..d {
            if i != j {
                let mut m = identity_matrix(d);
                m[i][j] = 1;
                linear.push(AffineMap::linear(m, p)?.to_permutation());
            }
        }
    }
    let gl = PermutationGroup::from_generators(&linear, degree)?;
    let mut affine = linear;
    for i in 1..=d {
        affine.push(AffineMap::translation(FieldVector::basis(p, d, i)).to_permutation());
    }
    let agl = PermutationGroup::from_generators(&affine, degree)?;

    let diagonal_generators: Vec<Permutation> = (0..d)
        .map(|i| {
            let mut m = identity_matrix(d);
            m[i][i] = mu;
            AffineMap::linear(m, p).map(|a| a.to_permutation())
        })
        .collect::<Result<_>>()?;
    let diagonal = PermutationGroup::from_generators(&diagonal_generators, degree)?;
    Ok(AffineContext {
        p,
        d,
        primitive_root: mu,
        degree,
        agl,
        gl,
        diagonal,
        diagonal_generators,
    })
}

/// `p^d · ∏_{i<d} (p^d - p^i)`.
pub fn agl_order(p: u64, d: u64) -> BigUint {
    let q = BigUint::from(p).pow(d as u32);
    let mut order = q.clone();
    for i in 0..d {
        order *= &q - BigUint::from(p).pow(i as u32);
    }
    order
}

/// `x` with `⟨s⟩ ∩ ⟨s⟩^x = ⟨s^a⟩` for `s = (1 2 … k)` in `Sym(m)`:
/// blocks `(1 … a)(a+1 … 2a)…` for `1 < a < k`, `(1 m)` for `a = k`,
/// and the identity for `a = 1`.
pub fn cyclic_power_conjugator(k: usize, a: usize, m: usize) -> Result<Permutation> {
    if k == 0 || a == 0 || !k.is_multiple_of(a) {
        return Err(Error::InvalidParameters(format!("{a} does not divide {k}")));
    }
    if (k, a) == (4, 2) {
        return Err(Error::ExcludedCase("(k, a) = (4, 2) admits no such conjugator".into()));
    }
    if k >= m {
        return Err(Error::InvalidParameters(format!(
            "cycle length {k} must be smaller than the degree {m}"
        )));
    }
    if a == 1 {
        return Ok(Permutation::identity(m));
    }
    if a == k {
        return Permutation::from_cycles(&[vec![1, m]], m);
    }
    let blocks: Vec<Vec<usize>> = (0..k / a)
        .map(|b| (b * a + 1..=b * a + a).collect())
        .collect();
    Permutation::from_cycles(&blocks, m)
}

impl AffineContext {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn primitive_root(&self) -> u64 {
        self.primitive_root
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn agl(&self) -> &PermutationGroup {
        &self.agl
    }

    pub fn gl(&self) -> &PermutationGroup {
        &self.gl
    }

    /// Diagonal matrices `T = ⟨g_1, …, g_d⟩`.
    pub fn diagonal(&self) -> &PermutationGroup {
        &self.diagonal
    }

    /// `g_i` scales coordinate `i` by the primitive root.
    pub fn diagonal_generators(&self) -> &[Permutation] {
        &self.diagonal_generators
    }

    pub fn vector_to_point(&self, v: &FieldVector) -> Result<usize> {
        if v.p != self.p || v.dimension() != self.d {
            return Err(Error::InvalidParameters(format!(
                "vector is not in F_{}^{}",
                self.p, self.d
            )));
        }
        Ok(v.to_point())
    }

    pub fn point_to_vector(&self, point: usize) -> Result<FieldVector> {
        FieldVector::from_point(self.p, self.d, point)
    }

    pub fn affine_to_permutation(&self, f: &AffineMap) -> Result<Permutation> {
        if f.translation.p != self.p || f.translation.dimension() != self.d {
            return Err(Error::InvalidParameters("map does not act on this space".into()));
        }
        Ok(f.to_permutation())
    }

    fn check_affine(&self, d: usize, what: &str) -> Result<()> {
        if self.d != d {
            return Err(Error::InvalidParameters(format!("{what} requires d = {d}")));
        }
        Ok(())
    }

    /// For `d = 1`: `x = (u μ⁻¹u)(μu μ⁻²u)⋯`, which inverts the scalar
    /// multiplication by `μ`, so that `AGL ∩ AGL^x = T`.
    pub fn line_inversion_conjugator(&self) -> Result<Permutation> {
        self.check_affine(1, "the line inversion conjugator")?;
        let p = self.p;
        let mu_inv = inv_mod(self.primitive_root, p);
        let cycles: Vec<Vec<usize>> = (0..(p - 1) / 2)
            .map(|j| {
                let left = pow_mod(self.primitive_root, j, p);
                let right = pow_mod(mu_inv, j + 1, p);
                vec![left as usize + 1, right as usize + 1]
            })
            .collect();
        Permutation::from_cycles(&cycles, self.degree)
    }

    fn span_points(&self, basis: &[FieldVector]) -> Result<BTreeSet<usize>> {
        for b in basis {
            self.vector_to_point(b)?;
        }
        let mut points = BTreeSet::new();
        let mut combo = vec![0u64; basis.len()];
        loop {
            let v = basis
                .iter()
                .zip(&combo)
                .fold(FieldVector::zero(self.p, self.d), |acc, (b, &c)| acc.add(&b.scale(c)));
            points.insert(v.to_point() - 1);
            let mut i = 0;
            loop {
                if i == combo.len() {
                    return Ok(points);
                }
                combo[i] += 1;
                if combo[i] < self.p {
                    break;
                }
                combo[i] = 0;
                i += 1;
            }
        }
    }

    fn proper_subspace(&self, basis: &[FieldVector]) -> Result<BTreeSet<usize>> {
        if self.d < 2 {
            return Err(Error::InvalidParameters("subspace conjugators require d >= 2".into()));
        }
        let rows: Vec<Vec<u64>> = basis.iter().map(|b| b.coords.clone()).collect();
        let points = self.span_points(basis)?;
        let rank = if rows.is_empty() { 0 } else { rank_mod(&rows, self.p) };
        if rank == 0 || rank == self.d {
            return Err(Error::InvalidParameters(
                "subspace must be proper and nontrivial".into(),
            ));
        }
        Ok(points)
    }

    /// Scales every vector of the subspace `W` by `lambda` and fixes the rest;
    /// then `AGL ∩ AGL^x` is the stabilizer of `W` in `GL`.
    pub fn subspace_scaling_conjugator(&self, basis: &[FieldVector], lambda: u64) -> Result<Permutation> {
        let w = self.proper_subspace(basis)?;
        if lambda.is_multiple_of(self.p) || lambda % self.p == 1 {
            return Err(Error::InvalidParameters(format!(
                "scaling factor must differ from 0 and 1 mod {}",
                self.p
            )));
        }
        let (p, d) = (self.p, self.d);
        Ok(Permutation::from_fn(self.degree, |i| {
            if w.contains(&i) {
                let v: Vec<u64> = decode(p, d, i).iter().map(|c| c * lambda % p).collect();
                encode(p, &v)
            } else {
                i
            }
        }))
    }

    /// Setwise stabilizer of a subspace in `GL(d, p)`, by filtering elements.
    pub fn subspace_stabilizer(&self, basis: &[FieldVector]) -> Result<PermutationGroup> {
        let w = self.proper_subspace(basis)?;
        let mut kept = Vec::new();
        self.gl.for_each_element(|g| {
            if w.iter().all(|&i| w.contains(&(g.images()[i] as usize))) {
                kept.push(g.clone());
            }
            ControlFlow::Continue(())
        });
        PermutationGroup::from_elements(&kept, self.degree)
    }

    fn span_basis(&self, i: usize, j: usize) -> Vec<FieldVector> {
        (i..=j).map(|l| FieldVector::basis(self.p, self.d, l)).collect()
    }

    /// Pairs `(i, j)` with `i <= j`, except `(1, d)`, in lexicographic order.
    pub fn subspace_indices(&self) -> Vec<(usize, usize)> {
        let d = self.d;
        (1..=d)
            .flat_map(|i| (i..=d).map(move |j| (i, j)))
            .filter(|&ij| ij != (1, d))
            .collect()
    }

    /// The linear map separating the step `(i, j)` from its predecessors:
    /// `b_j ↦ b_j + b_{j+1}` for `i = 1`, `b_j ↦ b_{i-1} + b_j` otherwise.
    fn descent_witness(&self, i: usize, j: usize) -> Result<Permutation> {
        let mut m = identity_matrix(self.d);
        if i == 1 {
            m[j - 1][j] = 1;
        } else {
            m[j - 1][i - 2] = 1;
        }
        Ok(AffineMap::linear(m, self.p)?.to_permutation())
    }

    /// Descent `K_1 > K_1 ∩ K_2 > … = T` through subspace stabilizers of
    /// `span(b_i, …, b_j)`.
    pub fn subspace_chain(&self) -> Result<Vec<SubspaceStep>> {
        if self.d < 2 {
            return Err(Error::InvalidParameters("subspace chain requires d >= 2".into()));
        }
        let mut steps: Vec<SubspaceStep> = Vec::new();
        for (i, j) in self.subspace_indices() {
            let basis = self.span_basis(i, j);
            let stabilizer = self.subspace_stabilizer(&basis)?;
            let conjugator = self.subspace_scaling_conjugator(&basis, self.primitive_root)?;
            let witness = self.descent_witness(i, j)?;
            let running = match steps.last() {
                None => stabilizer.clone(),
                Some(prev) => prev
                    .running
                    .intersect(&stabilizer, crate::group::DEFAULT_ENUMERATION_LIMIT)?,
            };
            steps.push(SubspaceStep {
                index: (i, j),
                stabilizer,
                witness,
                conjugator,
                running,
            });
        }
        Ok(steps)
    }

    /// Lifts the cyclic conjugator on the line `⟨b_i⟩` (the cycle
    /// `b_i, μb_i, μ²b_i, …` with `0` as spare point) to `V`, fixing the
    /// other coordinates; then `T ∩ T^x = ⟨…, g_i^a, …⟩`.
    pub fn diagonal_power_conjugator(&self, i: usize, a: u64) -> Result<Permutation> {
        if i == 0 || i > self.d {
            return Err(Error::InvalidParameters(format!(
                "coordinate {i} out of range 1..={}",
                self.d
            )));
        }
        let p = self.p;
        if a == 0 || !(p - 1).is_multiple_of(a) {
            return Err(Error::InvalidParameters(format!("{a} does not divide {}", p - 1)));
        }
        if (p, a) == (5, 2) {
            return Err(Error::ExcludedCase("(p, a) = (5, 2) admits no such conjugator".into()));
        }
        let k = (p - 1) as usize;
        let line = cyclic_power_conjugator(k, a as usize, k + 1)?;
        // position t + 1 holds μ^t, position p holds 0
        let mut value_at = vec![0u64; k + 1];
        let mut position_of = vec![0usize; p as usize];
        let mut c = 1u64;
        for t in 0..k {
            value_at[t] = c;
            position_of[c as usize] = t;
            c = c * self.primitive_root % p;
        }
        value_at[k] = 0;
        position_of[0] = k;
        let d = self.d;
        Ok(Permutation::from_fn(self.degree, |idx| {
            let mut v = decode(p, d, idx);
            let pos = position_of[v[i - 1] as usize];
            v[i - 1] = value_at[line.images()[pos] as usize];
            encode(p, &v)
        }))
    }

    /// Divisors applied to each coordinate: `p - 1` alone for `p ∈ {3, 5}`,
    /// otherwise cumulative products of the ascending prime factors of `p - 1`.
    pub fn divisor_sequence(&self) -> Vec<u64> {
        let p = self.p;
        if p == 3 || p == 5 {
            return vec![p - 1];
        }
        prime_factors(p - 1)
            .iter()
            .scan(1u64, |acc, &q| {
                *acc *= q;
                Some(*acc)
            })
            .collect()
    }

    /// Descent `T > T ∩ T^{y_1} > … > 1`.
    pub fn diagonal_chain(&self) -> Result<Vec<DiagonalStep>> {
        let limit = crate::group::DEFAULT_ENUMERATION_LIMIT;
        let divisors = self.divisor_sequence();
        let mut steps: Vec<DiagonalStep> = Vec::new();
        for i in 1..=self.d {
            for &a in &divisors {
                let y = self.diagonal_power_conjugator(i, a)?;
                let prev = steps.last().map_or(&self.diagonal, |s| &s.running);
                let running = prev.intersect(&self.diagonal.conjugate_group(&y)?, limit)?;
                steps.push(DiagonalStep {
                    coordinate: i,
                    divisor: a,
                    conjugator: y,
                    running,
                });
            }
        }
        Ok(steps)
    }

    pub fn description(&self) -> SubgroupDescription {
        SubgroupDescription::new(
            SubgroupFamily::Agl,
            &[("p", self.p), ("d", self.d as u64)],
            self.agl.generators().to_vec(),
        )
    }

    /// Certificate `AGL > … > T > … > 1` of length `1 + l₁ + l₂` (`d >= 2`)
    /// or `2 + Ω(p-1)` (`d = 1`) inside `Sym(p^d)`.
    pub fn affine_chain(&self, ambient: Ambient) -> Result<ChainCertificate> {
        if ambient == Ambient::Alternating {
            return Err(Error::InvalidParameters(
                "affine certificates are built in the symmetric group only".into(),
            ));
        }
        if self.degree < 7 {
            return Err(Error::InvalidParameters(format!(
                "need p^d >= 7, got {}",
                self.degree
            )));
        }
        let id = Permutation::identity(self.degree);
        let mut levels = vec![CertificateLevel {
            conjugators: vec![id.clone()],
            order: self.agl.order(),
        }];
        let mut xs = vec![id.clone()];
        if self.d == 1 {
            xs.push(self.line_inversion_conjugator()?);
            levels.push(CertificateLevel {
                conjugators: xs.clone(),
                order: self.diagonal.order(),
            });
        } else {
            for step in self.subspace_chain()? {
                xs.push(step.conjugator);
                levels.push(CertificateLevel {
                    conjugators: xs.clone(),
                    order: step.running.order(),
                });
            }
        }
        let mut ys = vec![id];
        for step in self.diagonal_chain()? {
            ys.push(step.conjugator);
            let mut zs: Vec<Permutation> = Vec::with_capacity(xs.len() * ys.len());
            for y in &ys {
                for x in &xs {
                    let z = x.mul_unchecked(y);
                    if !zs.contains(&z) {
                        zs.push(z);
                    }
                }
            }
            levels.push(CertificateLevel {
                conjugators: zs,
                order: step.running.order(),
            });
        }
        debug_assert!(levels.last().unwrap().order.is_one());
        Ok(ChainCertificate::new(self.degree, ambient, self.description(), levels))
    }
}
