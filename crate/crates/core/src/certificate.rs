//! Chain certificates: a strictly descending chain of subgroups of `H`, each
//! presented as `∩_{x ∈ X} H^x` with explicit conjugators, and an independent
//! verifier that recomputes every level by enumeration.

use std::collections::BTreeMap;
use std::ops::ControlFlow;

use num_bigint::BigUint;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::Ambient;
use crate::error::{Error, Result};
use crate::group::PermutationGroup;
use crate::perm::{parse_cycles, Permutation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubgroupFamily {
    Agl,
    Wreath,
    Natural,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupDescription {
    pub family: SubgroupFamily,
    pub params: BTreeMap<String, u64>,
    pub generators: Vec<Permutation>,
}

impl SubgroupDescription {
    pub fn new(family: SubgroupFamily, params: &[(&str, u64)], generators: Vec<Permutation>) -> Self {
        SubgroupDescription {
            family,
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            generators,
        }
    }

    fn param(&self, name: &str) -> Result<u64> {
        self.params.get(name).copied().ok_or_else(|| {
            Error::InvalidCertificate(format!("subgroup family is missing parameter `{name}`"))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateLevel {
    pub conjugators: Vec<Permutation>,
    pub order: BigUint,
}

/// Serialized as JSON with permutations in cycle notation and orders as
/// decimal strings; serialization is byte-stable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCertificate", into = "RawCertificate")]
pub struct ChainCertificate {
    pub degree: usize,
    pub ambient: Ambient,
    pub subgroup: SubgroupDescription,
    pub levels: Vec<CertificateLevel>,
    pub claimed_length: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSubgroup {
    family: SubgroupFamily,
    params: BTreeMap<String, u64>,
    generators: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLevel {
    conjugators: Vec<String>,
    order: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCertificate {
    degree: usize,
    ambient: Ambient,
    subgroup: RawSubgroup,
    levels: Vec<RawLevel>,
    claimed_length: usize,
}

impl From<ChainCertificate> for RawCertificate {
    fn from(c: ChainCertificate) -> Self {
        let cycles = |ps: &[Permutation]| ps.iter().map(Permutation::to_cycle_string).collect();
        RawCertificate {
            degree: c.degree,
            ambient: c.ambient,
            subgroup: RawSubgroup {
                family: c.subgroup.family,
                params: c.subgroup.params,
                generators: cycles(&c.subgroup.generators),
            },
            levels: c
                .levels
                .iter()
                .map(|l| RawLevel {
                    conjugators: cycles(&l.conjugators),
                    order: l.order.to_string(),
                })
                .collect(),
            claimed_length: c.claimed_length,
        }
    }
}

impl TryFrom<RawCertificate> for ChainCertificate {
    type Error = Error;

    fn try_from(raw: RawCertificate) -> Result<Self> {
        let n = raw.degree;
        if n == 0 {
            return Err(Error::InvalidCertificate("degree must be positive".into()));
        }
        let parse_all = |items: &[String]| -> Result<Vec<Permutation>> {
            items.iter().map(|s| parse_cycles(s, n)).collect()
        };
        let levels = raw
            .levels
            .iter()
            .map(|l| {
                let order = l.order.parse::<BigUint>().map_err(|_| Error::Parse {
                    token: l.order.clone(),
                    reason: "order must be a decimal integer".into(),
                })?;
                Ok(CertificateLevel {
                    conjugators: parse_all(&l.conjugators)?,
                    order,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ChainCertificate {
            degree: n,
            ambient: raw.ambient,
            subgroup: SubgroupDescription {
                family: raw.subgroup.family,
                params: raw.subgroup.params,
                generators: parse_all(&raw.subgroup.generators)?,
            },
            levels,
            claimed_length: raw.claimed_length,
        })
    }
}

impl ChainCertificate {
    /// Builds a certificate whose claimed length is the number of levels.
    pub fn new(
        degree: usize,
        ambient: Ambient,
        subgroup: SubgroupDescription,
        levels: Vec<CertificateLevel>,
    ) -> Self {
        let claimed_length = levels.len();
        ChainCertificate {
            degree,
            ambient,
            subgroup,
            levels,
            claimed_length,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("certificate serialization is infallible");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidCertificate(e.to_string()))
    }

    /// The subgroup generated by the listed generators. For the named
    /// families the group is also rebuilt from its parameters and the two
    /// must agree.
    pub fn subgroup_group(&self) -> Result<PermutationGroup> {
        let h = PermutationGroup::from_generators(&self.subgroup.generators, self.degree)?;
        let rebuilt = match self.subgroup.family {
            SubgroupFamily::Explicit => None,
            SubgroupFamily::Natural => {
                let n = self.subgroup.param("n")? as usize;
                if n != self.degree {
                    return Err(Error::InvalidCertificate(format!(
                        "natural family has n = {n} but degree {}",
                        self.degree
                    )));
                }
                let g = match self.ambient {
                    Ambient::Symmetric => PermutationGroup::symmetric(n),
                    Ambient::Alternating => PermutationGroup::alternating(n),
                };
                Some(g.point_stabilizer(n)?)
            }
            SubgroupFamily::Agl => {
                let p = self.subgroup.param("p")?;
                let d = self.subgroup.param("d")?;
                Some(crate::affine::build_agl(p, d)?.agl().clone())
            }
            SubgroupFamily::Wreath => {
                let m = self.subgroup.param("m")?;
                let k = self.subgroup.param("k")?;
                Some(crate::wreath::build_wreath(m, k)?.group().clone())
            }
        };
        if let Some(mut g) = rebuilt {
            if self.ambient == Ambient::Alternating {
                g = g.even_part();
            }
            if g.degree() != self.degree || !g.equals(&h)? {
                return Err(Error::InvalidCertificate(
                    "subgroup generators do not match the family parameters".into(),
                ));
            }
        }
        Ok(h)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelReport {
    pub index: usize,
    pub conjugators: usize,
    pub claimed_order: String,
    pub computed_order: String,
    pub order_matches: bool,
    pub contained_in_previous: bool,
    pub strictly_descends: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub degree: usize,
    pub ambient: Ambient,
    pub claimed_length: usize,
    pub level_count: usize,
    pub levels: Vec<LevelReport>,
    pub base_level_is_subgroup: bool,
    pub terminal_trivial: bool,
    pub length_matches: bool,
    pub in_ambient: bool,
    pub failures: Vec<String>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn first_failing_level(&self) -> Option<usize> {
        self.levels.iter().find(|l| !l.passed).map(|l| l.index)
    }
}

/// Counts of a level recomputed from scratch.
struct LevelCount {
    order: usize,
    in_previous: usize,
}

fn count_level(h: &PermutationGroup, xs: &[Permutation], previous: Option<&[Permutation]>) -> LevelCount {
    let first = &xs[0];
    let first_inv = first.inverse();
    let mut order = 0usize;
    let mut in_previous = 0usize;
    h.for_each_element(|g| {
        // e ranges over H^{x_0}; e ∈ H^x iff x e x^-1 ∈ H
        let e = first_inv.mul_unchecked(g).mul_unchecked(first);
        let in_all = |ys: &[Permutation]| {
            ys.iter()
                .all(|y| h.contains_unchecked(&e.conjugate_unchecked(&y.inverse())))
        };
        if in_all(&xs[1..]) {
            order += 1;
            if previous.is_none_or(in_all) {
                in_previous += 1;
            }
        }
        ControlFlow::Continue(())
    });
    LevelCount { order, in_previous }
}

/// Recomputes every level of `cert` as `∩_{x} H^x` by enumerating `H` and
/// testing membership, independently of how the certificate was built.
pub fn verify_certificate(cert: &ChainCertificate, h: &PermutationGroup, limit: usize) -> Result<VerificationReport> {
    if h.degree() != cert.degree {
        return Err(Error::DegreeMismatch {
            left: h.degree(),
            right: cert.degree,
        });
    }
    let order_h = h.order();
    if order_h > BigUint::from(limit) {
        return Err(Error::GroupTooLarge {
            order: order_h.to_string(),
            limit,
        });
    }
    let mut failures = Vec::new();
    if cert.levels.is_empty() {
        failures.push("certificate has no levels".into());
    }
    let empty: Vec<usize> = cert
        .levels
        .iter()
        .enumerate()
        .filter(|(_, l)| l.conjugators.is_empty())
        .map(|(i, _)| i)
        .collect();
    for i in &empty {
        failures.push(format!("level {i} has no conjugators"));
    }

    let counts: Vec<Option<LevelCount>> = cert
        .levels
        .par_iter()
        .enumerate()
        .map(|(i, level)| {
            if level.conjugators.is_empty() {
                return None;
            }
            let previous = if i == 0 {
                None
            } else {
                Some(cert.levels[i - 1].conjugators.as_slice())
            };
            Some(count_level(h, &level.conjugators, previous))
        })
        .collect();

    let mut levels = Vec::with_capacity(cert.levels.len());
    let mut prev_order: Option<BigUint> = None;
    for (i, (level, count)) in cert.levels.iter().zip(&counts).enumerate() {
        let (computed, contained) = match count {
            Some(c) => (BigUint::from(c.order), c.in_previous == c.order),
            None => (BigUint::from(0u32), false),
        };
        let order_matches = count.is_some() && computed == level.order;
        let strictly_descends = match &prev_order {
            None => computed == order_h,
            Some(p) => contained && &computed < p,
        };
        let passed = order_matches && strictly_descends && (i == 0 || contained);
        if !passed {
            failures.push(format!(
                "level {i}: claimed order {}, computed {computed}, contained in previous: {contained}",
                level.order
            ));
        }
        levels.push(LevelReport {
            index: i,
            conjugators: level.conjugators.len(),
            claimed_order: level.order.to_string(),
            computed_order: computed.to_string(),
            order_matches,
            contained_in_previous: i == 0 || contained,
            strictly_descends,
            passed,
        });
        prev_order = Some(computed);
    }

    let base_level_is_subgroup = cert.levels.first().is_some_and(|l| {
        !l.conjugators.is_empty() && l.conjugators.iter().all(Permutation::is_identity)
    });
    if !base_level_is_subgroup {
        failures.push("level 0 must be the subgroup itself with the identity conjugator".into());
    }
    let terminal_trivial = cert.levels.last().is_some_and(|l| l.order.is_one())
        && levels.last().is_some_and(|l| l.computed_order == "1");
    if !terminal_trivial {
        failures.push("final level is not the trivial group".into());
    }
    for pair in cert.levels.windows(2) {
        if pair[1].order >= pair[0].order {
            failures.push("claimed orders do not strictly decrease".into());
            break;
        }
    }
    let length_matches = cert.claimed_length == cert.levels.len();
    if !length_matches {
        failures.push(format!(
            "claimed length {} but {} levels",
            cert.claimed_length,
            cert.levels.len()
        ));
    }
    let in_ambient = match cert.ambient {
        Ambient::Symmetric => true,
        Ambient::Alternating => {
            h.is_even()
                && cert
                    .levels
                    .iter()
                    .all(|l| l.conjugators.iter().all(|x| x.parity().is_even()))
        }
    };
    if !in_ambient {
        failures.push("alternating ambient requires an even subgroup and even conjugators".into());
    }
    let passed = failures.is_empty();
    Ok(VerificationReport {
        degree: cert.degree,
        ambient: cert.ambient,
        claimed_length: cert.claimed_length,
        level_count: cert.levels.len(),
        levels,
        base_level_is_subgroup,
        terminal_trivial,
        length_matches,
        in_ambient,
        failures,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str, n: usize) -> Permutation {
        parse_cycles(s, n).unwrap()
    }

    // S3 natural: H = <(1 2)>, chain H > 1 via conjugator (1 3)
    fn small_certificate() -> (ChainCertificate, PermutationGroup) {
        let h = PermutationGroup::from_generators(&[p("(1 2)", 3)], 3).unwrap();
        let cert = ChainCertificate::new(
            3,
            Ambient::Symmetric,
            SubgroupDescription::new(SubgroupFamily::Explicit, &[], vec![p("(1 2)", 3)]),
            vec![
                CertificateLevel {
                    conjugators: vec![Permutation::identity(3)],
                    order: BigUint::from(2u32),
                },
                CertificateLevel {
                    conjugators: vec![Permutation::identity(3), p("(1 3)", 3)],
                    order: BigUint::from(1u32),
                },
            ],
        );
        (cert, h)
    }

    #[test]
    fn small_chain_verifies() {
        let (cert, h) = small_certificate();
        let r = verify_certificate(&cert, &h, 1000).unwrap();
        assert!(r.passed, "{:?}", r.failures);
        assert_eq!(r.level_count, 2);
    }

    #[test]
    fn json_round_trip_is_byte_stable() {
        let (cert, _) = small_certificate();
        let json = cert.to_json();
        let back = ChainCertificate::from_json(&json).unwrap();
        assert_eq!(back, cert);
        assert_eq!(back.to_json(), json);
        assert!(json.contains("\"order\": \"2\""));
        assert!(json.contains("\"(1 2)\""));
    }

    #[test]
    fn tampered_certificates_fail() {
        let (cert, h) = small_certificate();
        let mut bad = cert.clone();
        bad.levels[1].order = BigUint::from(2u32);
        let r = verify_certificate(&bad, &h, 1000).unwrap();
        assert!(!r.passed);
        assert_eq!(r.first_failing_level(), Some(1));

        let mut bad = cert.clone();
        bad.levels[1].conjugators.pop();
        let r = verify_certificate(&bad, &h, 1000).unwrap();
        assert!(!r.passed);

        let mut bad = cert.clone();
        bad.claimed_length = 3;
        assert!(!verify_certificate(&bad, &h, 1000).unwrap().passed);

        let mut bad = cert;
        bad.levels.insert(1, bad.levels[0].clone());
        assert!(!verify_certificate(&bad, &h, 1000).unwrap().passed);
    }

    #[test]
    fn malformed_json_is_rejected() {
        let (cert, _) = small_certificate();
        let json = cert.to_json();
        assert!(ChainCertificate::from_json(&json[..json.len() / 2]).is_err());
        let bad = json.replace("\"2\"", "\"two\"");
        assert!(ChainCertificate::from_json(&bad).is_err());
        let bad = json.replace("(1 3)", "(1 4)");
        assert!(ChainCertificate::from_json(&bad).is_err());
    }

    #[test]
    fn limit_is_enforced() {
        let (cert, h) = small_certificate();
        assert!(matches!(
            verify_certificate(&cert, &h, 1),
            Err(Error::GroupTooLarge { .. })
        ));
    }

    #[test]
    fn alternating_ambient_rejects_odd_conjugators() {
        let (mut cert, h) = small_certificate();
        cert.ambient = Ambient::Alternating;
        let r = verify_certificate(&cert, &h, 1000).unwrap();
        assert!(!r.in_ambient && !r.passed);
    }
}
