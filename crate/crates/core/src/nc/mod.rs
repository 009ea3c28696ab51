//! Noncrossing partitions and the counting formulas behind the moment sums.

mod counting;
mod kgraph;
mod partition;

pub use counting::{
    binomial, catalan, count_by_profile, count_by_profile_pair, multiplicity_f, narayana,
    profiles, ClassSizeProfile,
};
pub use kgraph::{build_kgraph, KGraph};
pub use partition::{enumerate_nc, for_each_nc, is_noncrossing, kreweras, SetPartition};
