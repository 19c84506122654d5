//! Verification that every nontrivial monotone weakly symmetric boolean
//! function on 14 variables is elusive.
//!
//! The pieces are independent and can be used on their own:
//!
//! * [`perm`]: permutations, groups and the cyclic / Ψ_p / Ψ_p^q / Sylow
//!   classifications.
//! * [`orbits`]: orbits of variable subsets and the orbit inclusion order.
//! * [`complex`]: orbit type assignments, Euler characteristics, links and
//!   fixed-point complexes.
//! * [`search`]: the backtracking case analysis over the subgroups of G6 and
//!   the replay of the worked branch.
//! * [`oracle`]: exact decision-tree depth by memoized minimax.
//! * [`data`] and [`report`]: bundled inputs and the `verify14` campaign.

pub mod complex;
pub mod data;
pub mod oracle;
pub mod orbits;
pub mod perm;
pub mod report;
pub mod search;

pub use orbits::{OrbitId, OrbitPoset, OrbitTable, SubsetMask};
pub use perm::{PermGroup, Permutation};
