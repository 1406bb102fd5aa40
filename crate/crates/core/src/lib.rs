//! Maximum irredundant base sizes of symmetric and alternating groups acting
//! on the cosets of affine and product-action subgroups: permutation groups,
//! explicit subgroup chains with verifiable certificates, a brute-force
//! oracle for small actions, and the closed-form bounds.

pub mod affine;
pub mod bounds;
pub mod certificate;
pub mod error;
pub mod field;
pub mod group;
pub mod oracle;
pub mod perm;
pub mod wreath;

pub use affine::{build_agl, AffineContext, AffineMap, FieldVector};
pub use bounds::Ambient;
pub use certificate::{
    verify_certificate, CertificateLevel, ChainCertificate, SubgroupDescription, SubgroupFamily,
    VerificationReport,
};
pub use error::{Error, Result};
pub use group::{GroupKey, PermutationGroup};
pub use oracle::{build_coset_action, chain_to_base, mibs, CosetAction, MibsResult, OracleLimits, OracleOptions};
pub use perm::{parse_cycles, Parity, Permutation};
pub use wreath::{build_wreath, hamming, Tuple, WreathContext};
