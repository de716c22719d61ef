//! Shared unit-test fixtures.

use crate::percolate::Cluster;

pub(crate) const TABLE2: [&str; 7] = ["00", "0100", "0101", "1010", "1011", "110", "1110"];

pub(crate) fn bits(s: &str) -> Vec<bool> {
    s.bytes().map(|b| b == b'1').collect()
}

/// Prefix closure of the seven-leaf example code, truncated at depth 5.
pub(crate) fn table2_cluster() -> Cluster {
    Cluster::from_paths(5, TABLE2.iter().map(|w| bits(w))).unwrap()
}
