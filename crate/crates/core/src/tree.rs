//! Complete m-ary rooted trees and the path sum `S`.
//!
//! Nodes use implicit level-order indices: the root is `0` and the parent of
//! node `i > 0` is `(i - 1) / m`. Pairs are *ordered* and include the
//! diagonal, i.e. `S` sums over all of `V x V`, so `(a, b)` and `(b, a)` are
//! both counted and `(a, a)` contributes `depth(a)`.
//!
//! Three independent routes produce `S`:
//!
//! * [`path_sum_pair_enum`] walks every ordered pair and sums LCA depths.
//! * [`path_sum_edge_contrib`] sums, over edges, the squared node count
//!   below the edge (an edge is shared by both root paths exactly when both
//!   endpoints of the pair lie beneath it).
//! * [`path_sum_depth_count`] sums `d * |P_d|` with `|P_d|` from the
//!   three-case count around the deepest common node.

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::Params;

pub const DEFAULT_PAIR_CAP: u64 = 2_500;
pub const DEFAULT_EDGE_CAP: u64 = 1_000_000;

fn pow(m: u32, e: u32) -> BigInt {
    num_traits::pow(BigInt::from(m), e as usize)
}

/// `1 + m + ... + m^(k-1)`; also valid for `m = 1`.
fn geometric(m: u32, k: u32) -> BigInt {
    (0..k).map(|i| pow(m, i)).sum()
}

/// `|V| = (m^(n+1) - 1) / (m - 1)` as an unbounded integer.
pub fn node_count(params: Params) -> BigInt {
    geometric(params.m(), params.n() + 1)
}

fn check_cap(params: Params, cap: u64, method: &'static str) -> Result<()> {
    let nodes = node_count(params);
    if nodes > BigInt::from(cap) {
        return Err(Error::SizeCap {
            method,
            nodes: nodes.to_string(),
            cap,
        });
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct TreeModel {
    params: Params,
    node_count: u64,
    // level_starts[d] is the index of the first node at depth d; the final
    // entry equals node_count.
    level_starts: Vec<u64>,
}

impl TreeModel {
    pub fn new(params: Params) -> Result<Self> {
        let too_big = || Error::SizeCap {
            method: "tree materialization",
            nodes: node_count(params).to_string(),
            cap: u64::MAX,
        };
        let m = u64::from(params.m());
        let mut level_starts = Vec::with_capacity(params.n() as usize + 2);
        let (mut start, mut width) = (0u64, 1u64);
        for depth in 0..=params.n() {
            level_starts.push(start);
            start = start.checked_add(width).ok_or_else(too_big)?;
            if depth < params.n() {
                width = width.checked_mul(m).ok_or_else(too_big)?;
            }
        }
        level_starts.push(start);
        Ok(TreeModel {
            params,
            node_count: start,
            level_starts,
        })
    }

    pub fn params(&self) -> Params {
        self.params
    }

    pub fn node_count(&self) -> u64 {
        self.node_count
    }

    pub fn edge_count(&self) -> u64 {
        self.node_count - 1
    }

    pub fn parent(&self, node: u64) -> Option<u64> {
        (node > 0).then(|| (node - 1) / u64::from(self.params.m()))
    }

    pub fn depth(&self, node: u64) -> u32 {
        debug_assert!(node < self.node_count);
        (self.level_starts.partition_point(|&s| s <= node) - 1) as u32
    }

    fn check(&self, node: u64) -> Result<()> {
        if node >= self.node_count {
            return Err(Error::NodeOutOfRange {
                index: node,
                nodes: self.node_count,
            });
        }
        Ok(())
    }

    /// `|pi(a) ∩ pi(b)|`: the depth of the lowest common ancestor.
    pub fn common_subpath_length(&self, a: u64, b: u64) -> Result<u32> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.lca(a, self.depth(a), b, self.depth(b)).1)
    }

    // Returns (lca node, lca depth).
    #[inline]
    fn lca(&self, mut a: u64, mut da: u32, mut b: u64, mut db: u32) -> (u64, u32) {
        let m = u64::from(self.params.m());
        while da > db {
            a = (a - 1) / m;
            da -= 1;
        }
        while db > da {
            b = (b - 1) / m;
            db -= 1;
        }
        while a != b {
            a = (a - 1) / m;
            b = (b - 1) / m;
            da -= 1;
        }
        (a, da)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeMethod {
    PairEnum,
    EdgeContrib,
    DepthCount,
    Closed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DepthCount {
    pub depth: u32,
    /// `|P_d|`: ordered pairs whose common root path has exactly `depth` edges.
    pub pairs: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeReport {
    pub params: Params,
    pub method: TreeMethod,
    pub edges: BigInt,
    pub path_sum: BigInt,
    pub per_depth: Vec<DepthCount>,
}

impl TreeReport {
    fn new(params: Params, method: TreeMethod, per_depth: Vec<DepthCount>, path_sum: BigInt) -> Self {
        TreeReport {
            params,
            method,
            edges: node_count(params) - 1,
            path_sum,
            per_depth,
        }
    }

    /// `sum_d d * |P_d|`.
    pub fn weighted_depth_sum(&self) -> BigInt {
        self.per_depth.iter().map(|d| BigInt::from(d.depth) * &d.pairs).sum()
    }
}

/// Per-depth tally of ordered pairs, split by where the pair sits relative to
/// its deepest common node `c`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaseCounts {
    pub depth: u32,
    /// Neither node is `c`: they lie in different child subtrees of `c`.
    pub split: BigInt,
    /// Exactly one node is `c`, the other a proper descendant.
    pub ancestor: BigInt,
    /// `(c, c)`.
    pub diagonal: BigInt,
}

impl CaseCounts {
    pub fn total(&self) -> BigInt {
        &self.split + &self.ancestor + &self.diagonal
    }
}

// counts[d] = [split, ancestor, diagonal] over all ordered pairs whose LCA
// sits at depth d (d = 0 is the root).
fn enumerate_pairs(tree: &TreeModel) -> Vec<[u64; 3]> {
    let v = tree.node_count() as usize;
    let levels = tree.params.n() as usize + 1;
    // Pair enumeration is capped far below u32::MAX nodes.
    let depths: Vec<u32> = (0..v as u64).map(|i| tree.depth(i)).collect();
    let parents: Vec<u32> = (0..v as u64).map(|i| tree.parent(i).unwrap_or(0) as u32).collect();
    let lca = |mut a: u32, mut da: u32, mut b: u32, mut db: u32| {
        while da > db {
            a = parents[a as usize];
            da -= 1;
        }
        while db > da {
            b = parents[b as usize];
            db -= 1;
        }
        while a != b {
            a = parents[a as usize];
            b = parents[b as usize];
            da -= 1;
        }
        (a, da)
    };
    let merge = |mut x: Vec<[u64; 3]>, y: Vec<[u64; 3]>| {
        for (a, b) in x.iter_mut().zip(y) {
            for k in 0..3 {
                a[k] += b[k];
            }
        }
        x
    };
    (0..v as u32)
        .into_par_iter()
        .fold(
            || vec![[0u64; 3]; levels],
            |mut acc, a| {
                let da = depths[a as usize];
                for (b, &db) in depths.iter().enumerate() {
                    let b = b as u32;
                    let (c, d) = lca(a, da, b, db);
                    // 0 = split, 1 = ancestor, 2 = diagonal
                    let case = usize::from(a == c) + usize::from(b == c);
                    acc[d as usize][case] += 1;
                }
                acc
            },
        )
        .reduce(|| vec![[0u64; 3]; levels], merge)
}

/// `S` by direct summation over all `|V|^2` ordered pairs.
pub fn path_sum_pair_enum(params: Params, cap: u64) -> Result<TreeReport> {
    check_cap(params, cap, "pair enumeration")?;
    let tree = TreeModel::new(params)?;
    let counts = enumerate_pairs(&tree);
    let per_depth: Vec<DepthCount> = counts
        .iter()
        .enumerate()
        .skip(1)
        .map(|(d, c)| DepthCount {
            depth: d as u32,
            pairs: BigInt::from(c.iter().sum::<u64>()),
        })
        .collect();
    let path_sum = per_depth.iter().map(|d| BigInt::from(d.depth) * &d.pairs).sum();
    Ok(TreeReport::new(params, TreeMethod::PairEnum, per_depth, path_sum))
}

/// Case-tagged pair counts for `d = 1..=n`, by enumeration.
pub fn depth_case_counts(params: Params, cap: u64) -> Result<Vec<CaseCounts>> {
    check_cap(params, cap, "pair enumeration")?;
    let tree = TreeModel::new(params)?;
    Ok(enumerate_pairs(&tree)
        .into_iter()
        .enumerate()
        .skip(1)
        .map(|(d, [split, ancestor, diagonal])| CaseCounts {
            depth: d as u32,
            split: split.into(),
            ancestor: ancestor.into(),
            diagonal: diagonal.into(),
        })
        .collect())
}

/// The three closed case terms at depth `d`, already multiplied by the
/// `m^d` nodes on that level.
pub fn depth_case_formula(params: Params, d: u32) -> Result<CaseCounts> {
    let (m, n) = (params.m(), params.n());
    if d < 1 || d > n {
        return Err(Error::domain("d", d, format!("depth must lie in 1..={n}")));
    }
    let level = pow(m, d);
    let child_subtree = geometric(m, n - d);
    let choose2 = BigInt::from(u64::from(m) * u64::from(m - 1) / 2);
    let descendants = geometric(m, n - d + 1) - 1;
    Ok(CaseCounts {
        depth: d,
        split: &level * 2 * choose2 * &child_subtree * &child_subtree,
        ancestor: &level * 2 * descendants,
        diagonal: level,
    })
}

/// `|P_d|` from the three-case count.
pub fn pairs_at_depth(params: Params, d: u32) -> Result<BigInt> {
    Ok(depth_case_formula(params, d)?.total())
}

/// `S = sum over edges of (nodes below the edge)^2`, grouped by depth.
pub fn path_sum_edge_contrib(params: Params, cap: u64) -> Result<TreeReport> {
    check_cap(params, cap, "edge contribution")?;
    let (m, n) = (params.m(), params.n());
    // at_least[d - 1]: ordered pairs whose common path has >= d edges.
    let at_least: Vec<BigInt> = (1..=n)
        .map(|d| {
            let below = geometric(m, n - d + 1);
            pow(m, d) * &below * &below
        })
        .collect();
    let per_depth = (1..=n)
        .map(|d| {
            let i = d as usize - 1;
            let deeper = at_least.get(i + 1).cloned().unwrap_or_else(BigInt::zero);
            DepthCount {
                depth: d,
                pairs: &at_least[i] - deeper,
            }
        })
        .collect();
    let path_sum = at_least.into_iter().sum();
    Ok(TreeReport::new(params, TreeMethod::EdgeContrib, per_depth, path_sum))
}

/// `S = sum_d d * |P_d|`, checking each summand against its simplified form
/// `d * m^d * (m^(2n-2d+1) - 1) / (m - 1)`.
pub fn path_sum_depth_count(params: Params) -> Result<TreeReport> {
    let (m, n) = (params.m(), params.n());
    let mut per_depth = Vec::with_capacity(n as usize);
    let mut path_sum = BigInt::zero();
    for d in 1..=n {
        let pairs = pairs_at_depth(params, d)?;
        let simplified = pow(m, d) * geometric(m, 2 * n - 2 * d + 1);
        if pairs != simplified {
            return Err(Error::Invariant(format!(
                "|P_{d}| = {pairs} but the simplified summand gives {simplified} for {params}"
            )));
        }
        path_sum += BigInt::from(d) * &pairs;
        per_depth.push(DepthCount { depth: d, pairs });
    }
    Ok(TreeReport::new(params, TreeMethod::DepthCount, per_depth, path_sum))
}

/// Closed-form `T` and `S`, with the per-depth table from the case count.
pub fn path_sum_closed_report(params: Params) -> Result<TreeReport> {
    let per_depth = (1..=params.n())
        .map(|d| Ok(DepthCount { depth: d, pairs: pairs_at_depth(params, d)? }))
        .collect::<Result<Vec<_>>>()?;
    let mut report = TreeReport::new(
        params,
        TreeMethod::Closed,
        per_depth,
        crate::closed_form::path_sum_closed(params),
    );
    report.edges = crate::closed_form::tree_edge_count(params);
    Ok(report)
}
