//! Merge kernels: the weight a coalescent assigns to joining two components.

use num::BigUint;
use serde::{Deserialize, Serialize};

/// The three classical kernels.
///
/// `kappa(a, b)` is the number of elementary choices that produce a given
/// unordered component merge:
///
/// * `Kingman`: ordered pairs of roots, so 2 per unordered root pair;
/// * `Additive`: `a + b` (a vertex of one component attaches to the other
///   component's root, in either direction);
/// * `Multiplicative`: `a * b` (any cross pair of vertices).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Kingman,
    Additive,
    Multiplicative,
}

impl KernelKind {
    pub const ALL: [KernelKind; 3] = [
        KernelKind::Kingman,
        KernelKind::Additive,
        KernelKind::Multiplicative,
    ];

    pub fn kappa(self, a: u64, b: u64) -> u64 {
        match self {
            KernelKind::Kingman => 2,
            KernelKind::Additive => a + b,
            KernelKind::Multiplicative => a * b,
        }
    }

    pub fn kappa_big(self, a: u64, b: u64) -> BigUint {
        BigUint::from(self.kappa(a, b))
    }

    /// Kingman and additive dynamics grow rooted trees; the multiplicative
    /// dynamics grows unrooted trees.
    pub fn is_rooted(self) -> bool {
        !matches!(self, KernelKind::Multiplicative)
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Kingman => "kingman",
            KernelKind::Additive => "additive",
            KernelKind::Multiplicative => "multiplicative",
        }
    }
}
