//! One-dimensional Clenshaw-Curtis rules on `[0, 1]` and their hierarchical
//! differences.
//!
//! Level `l` has `m_l` nodes (`1` for `l = 1`, `2^(l-1) + 1` otherwise). The
//! node sets are nested, so every node is identified by an exact reduced
//! fraction [`NodeKey`] `p/q` with coordinate `(1 - cos(pi p / q)) / 2`. Rules
//! of different levels are combined by matching keys, never by comparing
//! floating-point coordinates.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::sum::{compensated_sum, NeumaierSum};

/// Largest supported level; `m_25 = 2^24 + 1`.
pub const MAX_LEVEL: u32 = 25;

/// Exact identity of a Clenshaw-Curtis node: the reduced fraction
/// `numerator / denominator` in `[0, 1]`.
///
/// Keys order by the coordinate they represent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeKey {
    numerator: u32,
    denominator: u32,
}

impl NodeKey {
    /// The centre node `1/2`, the only node of level 1.
    pub const CENTER: NodeKey = NodeKey {
        numerator: 1,
        denominator: 2,
    };

    /// Builds the reduced key for `numerator / denominator`.
    pub fn new(numerator: u32, denominator: u32) -> Result<Self> {
        if denominator == 0 || numerator > denominator {
            return Err(Error::InvalidParameter(format!(
                "node key {numerator}/{denominator} is not a fraction in [0, 1]"
            )));
        }
        let g = gcd(numerator, denominator);
        Ok(Self {
            numerator: numerator / g,
            denominator: denominator / g,
        })
    }

    pub fn numerator(self) -> u32 {
        self.numerator
    }

    pub fn denominator(self) -> u32 {
        self.denominator
    }

    /// The key of the mirrored node `1 - x`.
    pub fn reflect(self) -> Self {
        Self {
            numerator: self.denominator - self.numerator,
            denominator: self.denominator,
        }
    }

    /// `(1 - cos(pi p / q)) / 2`, evaluated as `sin^2(pi p / (2q))` on the
    /// lower half and mirrored on the upper half so that
    /// `x(p/q) + x((q-p)/q) == 1` holds exactly.
    pub fn coordinate(self) -> f64 {
        let (p, q) = (u64::from(self.numerator), u64::from(self.denominator));
        match (2 * p).cmp(&q) {
            Ordering::Equal => 0.5,
            Ordering::Less => lower_half_coordinate(p, q),
            Ordering::Greater => 1.0 - lower_half_coordinate(q - p, q),
        }
    }
}

fn lower_half_coordinate(p: u64, q: u64) -> f64 {
    if p == 0 {
        return 0.0;
    }
    let s = (PI * p as f64 / (2 * q) as f64).sin();
    s * s
}

impl Ord for NodeKey {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = u64::from(self.numerator) * u64::from(other.denominator);
        let rhs = u64::from(other.numerator) * u64::from(self.denominator);
        lhs.cmp(&rhs)
    }
}

impl PartialOrd for NodeKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for NodeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn check_level(level: u32) -> Result<()> {
    if level == 0 {
        Err(Error::ZeroLevel)
    } else if level > MAX_LEVEL {
        Err(Error::LevelTooLarge {
            level,
            max: MAX_LEVEL,
        })
    } else {
        Ok(())
    }
}

/// Number of nodes `m_l` of the level-`l` rule.
pub fn level_size(level: u32) -> Result<usize> {
    check_level(level)?;
    Ok(if level == 1 {
        1
    } else {
        (1usize << (level - 1)) + 1
    })
}

/// Key of node `j` (1-based) of level `l`.
pub fn node_key(level: u32, j: usize) -> Result<NodeKey> {
    let size = level_size(level)?;
    if j == 0 || j > size {
        return Err(Error::IndexOutOfRange {
            level,
            index: j,
            size,
        });
    }
    if level == 1 {
        return Ok(NodeKey::CENTER);
    }
    NodeKey::new((j - 1) as u32, (size - 1) as u32)
}

/// One node of a [`Rule1D`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub key: NodeKey,
    pub coordinate: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    /// The Clenshaw-Curtis rule `U^l`.
    ClenshawCurtis,
    /// The difference `U^l - U^(l-1)` (`U^1` for `l = 1`).
    Difference,
}

/// A one-dimensional rule at a fixed level with nodes in increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule1D {
    level: u32,
    kind: RuleKind,
    nodes: Vec<Node>,
}

impl Rule1D {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().map(|n| n.weight)
    }

    pub fn keys(&self) -> impl Iterator<Item = NodeKey> + '_ {
        self.nodes.iter().map(|n| n.key)
    }

    pub fn weight_sum(&self) -> f64 {
        compensated_sum(self.weights())
    }

    /// Applies the rule to `f`.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        compensated_sum(self.nodes.iter().map(|n| n.weight * f(n.coordinate)))
    }
}

/// Sum of absolute weights.
pub fn rule_norm(rule: &Rule1D) -> f64 {
    compensated_sum(rule.weights().map(f64::abs))
}

/// Clenshaw-Curtis weights of level `l`, computed from the closed-form
/// cosine series with compensated summation. The weights are symmetric; the
/// upper half is mirrored from the lower half.
fn cc_weights(level: u32) -> Result<Vec<f64>> {
    let m = level_size(level)?;
    if m == 1 {
        return Ok(vec![1.0]);
    }
    let n = (m - 1) as u64;
    let nf = n as f64;
    let mut w = vec![0.0; m];
    let endpoint = 1.0 / (2.0 * m as f64 * (m as f64 - 2.0));
    w[0] = endpoint;
    w[m - 1] = endpoint;
    let half_terms = (m as u64 - 3) / 2;
    for j in 2..=m.div_ceil(2) {
        let jm1 = (j - 1) as u64;
        let sign = if jm1.is_multiple_of(2) { 1.0 } else { -1.0 };
        let mut acc = NeumaierSum::new();
        // smallest terms first
        for k in (1..=half_terms).rev() {
            let r = (2 * k * jm1) % (2 * n);
            let c = (PI * r as f64 / nf).cos();
            let kf = k as f64;
            acc += -2.0 * c / (4.0 * kf * kf - 1.0);
        }
        acc += -sign / (nf * nf - 1.0);
        acc += 1.0;
        let wj = acc.value() / nf;
        w[j - 1] = wj;
        w[m - j] = wj;
    }
    Ok(w)
}

/// The Clenshaw-Curtis rule `U^l`.
pub fn cc_rule(level: u32) -> Result<Rule1D> {
    let weights = cc_weights(level)?;
    let nodes = weights
        .into_iter()
        .enumerate()
        .map(|(i, weight)| {
            let key = node_key(level, i + 1)?;
            Ok(Node {
                key,
                coordinate: key.coordinate(),
                weight,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Rule1D {
        level,
        kind: RuleKind::ClenshawCurtis,
        nodes,
    })
}

/// The difference rule `Delta^l = U^l - U^(l-1)` (`Delta^1 = U^1`), built by
/// subtracting the coarse weights at matching keys of the fine node set.
pub fn delta_rule(level: u32) -> Result<Rule1D> {
    let fine = cc_rule(level)?;
    if level == 1 {
        return Ok(Rule1D {
            kind: RuleKind::Difference,
            ..fine
        });
    }
    let coarse = cc_rule(level - 1)?;
    let mut coarse_nodes = coarse.nodes.iter().peekable();
    let mut nodes = Vec::with_capacity(fine.len());
    for node in &fine.nodes {
        let mut weight = node.weight;
        if let Some(c) = coarse_nodes.next_if(|c| c.key == node.key) {
            weight -= c.weight;
        }
        nodes.push(Node { weight, ..*node });
    }
    debug_assert!(coarse_nodes.next().is_none(), "node sets must be nested");
    Ok(Rule1D {
        level,
        kind: RuleKind::Difference,
        nodes,
    })
}

/// Difference weights from the index-parity formula: `b_j = a_j` for even
/// `j` and `b_j = a_j - a_{(j+1)/2}^{l-1}` for odd `j`. Only valid for
/// `l >= 3`; kept as a cross-check of [`delta_rule`].
pub fn parity_delta_weights(level: u32) -> Result<Vec<f64>> {
    if level < 3 {
        return Err(Error::InvalidParameter(format!(
            "index-parity difference weights are only valid for level >= 3, got {level}"
        )));
    }
    let fine = cc_weights(level)?;
    let coarse = cc_weights(level - 1)?;
    Ok(fine
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let j = i + 1;
            if j % 2 == 0 {
                a
            } else {
                a - coarse[j.div_ceil(2) - 1]
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn level_sizes() {
        assert_eq!(level_size(1).unwrap(), 1);
        assert_eq!(level_size(2).unwrap(), 3);
        assert_eq!(level_size(5).unwrap(), 17);
        assert_eq!(level_size(0), Err(Error::ZeroLevel));
        assert!(matches!(
            level_size(MAX_LEVEL + 1),
            Err(Error::LevelTooLarge { .. })
        ));
    }

    #[test]
    fn node_keys() {
        assert_eq!(node_key(1, 1).unwrap(), NodeKey::CENTER);
        assert_eq!(node_key(3, 2).unwrap(), NodeKey::new(1, 4).unwrap());
        assert_eq!(node_key(3, 3).unwrap(), node_key(2, 2).unwrap());
        assert_eq!(node_key(3, 3).unwrap(), node_key(1, 1).unwrap());
        assert_eq!(node_key(2, 1).unwrap().to_string(), "0/1");
        assert!(matches!(
            node_key(2, 4),
            Err(Error::IndexOutOfRange { index: 4, .. })
        ));
        assert!(node_key(2, 0).is_err());
    }

    #[test]
    fn key_order_and_reflection() {
        let a = NodeKey::new(1, 4).unwrap();
        let b = NodeKey::new(3, 8).unwrap();
        assert!(a < b);
        assert_eq!(NodeKey::new(2, 4).unwrap(), NodeKey::CENTER);
        assert_eq!(a.reflect(), NodeKey::new(3, 4).unwrap());
        assert_eq!(a.coordinate() + a.reflect().coordinate(), 1.0);
        assert!(NodeKey::new(3, 2).is_err());
    }

    #[test]
    fn coordinates_match_cosine_formula() {
        for level in 2..=12 {
            let m = level_size(level).unwrap();
            for j in 1..=m {
                let x = node_key(level, j).unwrap().coordinate();
                let t = (j - 1) as f64 / (m - 1) as f64;
                let reference = 0.5 * (1.0 - (PI * t).cos());
                assert!((x - reference).abs() <= 4.0 * f64::EPSILON);
            }
        }
    }

    #[test]
    fn small_cc_weights() {
        let u1 = cc_rule(1).unwrap();
        assert_eq!(u1.nodes()[0].coordinate, 0.5);
        assert_eq!(u1.nodes()[0].weight, 1.0);

        let u2 = cc_rule(2).unwrap();
        let w2: Vec<f64> = u2.weights().collect();
        assert!(close(&w2, &[1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], 1e-15));
        let x2: Vec<f64> = u2.nodes().iter().map(|n| n.coordinate).collect();
        assert_eq!(x2, vec![0.0, 0.5, 1.0]);

        let w3: Vec<f64> = cc_rule(3).unwrap().weights().collect();
        let expected = [1.0 / 30.0, 4.0 / 15.0, 2.0 / 5.0, 4.0 / 15.0, 1.0 / 30.0];
        assert!(close(&w3, &expected, 1e-15));
    }

    #[test]
    fn small_delta_weights() {
        let d1 = delta_rule(1).unwrap();
        assert_eq!(d1.weights().collect::<Vec<_>>(), vec![1.0]);
        assert_eq!(d1.kind(), RuleKind::Difference);

        let w2: Vec<f64> = delta_rule(2).unwrap().weights().collect();
        assert!(close(&w2, &[1.0 / 6.0, -1.0 / 3.0, 1.0 / 6.0], 1e-15));

        let w3: Vec<f64> = delta_rule(3).unwrap().weights().collect();
        let expected = [
            -2.0 / 15.0,
            4.0 / 15.0,
            -4.0 / 15.0,
            4.0 / 15.0,
            -2.0 / 15.0,
        ];
        assert!(close(&w3, &expected, 1e-15));
    }

    #[test]
    fn small_norms() {
        assert_eq!(rule_norm(&delta_rule(1).unwrap()), 1.0);
        assert!((rule_norm(&delta_rule(2).unwrap()) - 2.0 / 3.0).abs() < 1e-15);
        assert!((rule_norm(&delta_rule(3).unwrap()) - 16.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn odd_difference_weights_are_negative_from_level_three() {
        for level in 3..=12 {
            let d = delta_rule(level).unwrap();
            for (i, w) in d.weights().enumerate() {
                if (i + 1) % 2 == 1 {
                    assert!(w < 0.0, "level {level} j {}", i + 1);
                } else {
                    assert!(w > 0.0);
                }
            }
        }
    }

    #[test]
    fn parity_formula_agrees_from_level_three() {
        for level in 3..=12 {
            let keyed: Vec<f64> = delta_rule(level).unwrap().weights().collect();
            let parity = parity_delta_weights(level).unwrap();
            assert!(close(&keyed, &parity, 1e-15), "level {level}");
        }
    }

    #[test]
    fn parity_formula_breaks_at_level_two() {
        // the level-1 node is the middle node of level 2, not the first
        assert!(parity_delta_weights(2).is_err());
        let u2: Vec<f64> = cc_rule(2).unwrap().weights().collect();
        let naive_first = u2[0] - 1.0;
        let keyed_first = delta_rule(2).unwrap().nodes()[0].weight;
        assert!((naive_first - keyed_first).abs() > 0.5);
    }

    #[test]
    fn weight_refinement_is_monotone() {
        for level in 2..=12 {
            let coarse: Vec<f64> = cc_rule(level).unwrap().weights().collect();
            let fine: Vec<f64> = cc_rule(level + 1).unwrap().weights().collect();
            for (j, a) in coarse.iter().enumerate() {
                assert!(fine[2 * j] < *a, "level {level} j {}", j + 1);
            }
        }
    }

    #[test]
    fn nested_key_sets() {
        for level in 1..=12 {
            let coarse: Vec<NodeKey> = cc_rule(level).unwrap().keys().collect();
            let fine: Vec<NodeKey> = cc_rule(level + 1).unwrap().keys().collect();
            assert!(coarse.iter().all(|k| fine.binary_search(k).is_ok()));
            assert!(fine.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn interpolatory_exactness() {
        for level in 1..=12 {
            let rule = cc_rule(level).unwrap();
            let m = rule.len();
            for p in 0..m as i32 {
                let q = rule.apply(|t| t.powi(p));
                let exact = 1.0 / (p as f64 + 1.0);
                assert!(
                    ((q - exact) / exact).abs() <= 1e-12,
                    "level {level} degree {p}"
                );
            }
        }
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn weights_match_moment_equations_at_level_four() {
        // independent route: solve V^T w = moments for the 9 nodes of level 4
        let rule = cc_rule(4).unwrap();
        let x: Vec<f64> = rule.nodes().iter().map(|n| n.coordinate).collect();
        let m = x.len();
        let mut a: Vec<Vec<f64>> = (0..m)
            .map(|p| {
                let mut row: Vec<f64> = x.iter().map(|xi| xi.powi(p as i32)).collect();
                row.push(1.0 / (p as f64 + 1.0));
                row
            })
            .collect();
        for col in 0..m {
            let piv = (col..m)
                .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
                .unwrap();
            a.swap(col, piv);
            for r in 0..m {
                if r != col {
                    let f = a[r][col] / a[col][col];
                    for c in col..=m {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
        let solved: Vec<f64> = (0..m).map(|i| a[i][m] / a[i][i]).collect();
        let w: Vec<f64> = rule.weights().collect();
        assert!(close(&w, &solved, 1e-11));
    }
}
