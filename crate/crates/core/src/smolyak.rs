//! Clenshaw-Curtis Smolyak cubature `A(d + k, d)` on `[0, 1]^d`.
//!
//! Three independent constructions are provided and produce the same merged
//! rule:
//!
//! * [`Construction::Delta`]: sum of tensor products of difference rules over
//!   all multi-indices with `|i| <= d + k`;
//! * [`Construction::Combination`]: signed binomial combination of full
//!   tensor Clenshaw-Curtis rules with `k + 1 <= |i| <= d + k`;
//! * [`Construction::Recursive`]: `A(d + k, d) = sum_l A(d - 1 + k + 1 - l, d - 1) (x) Delta^l`.
//!
//! Points are identified by vectors of exact [`NodeKey`]s; contributions to the
//! same point are merged with compensated summation in enumeration order and
//! the final rule is sorted by key vector. Points whose merged weight cancels
//! to zero are kept unless pruning is requested, so the point set is exactly
//! the sparse grid `H(d + k, d)`.

use std::collections::{BTreeSet, HashMap};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cc1d::{cc_rule, delta_rule, rule_norm, Node, NodeKey, MAX_LEVEL};
use crate::error::{Error, Result};
use crate::multi_index::multi_indices;
use crate::sum::{compensated_sum, NeumaierSum};
use crate::testfns::{monomial, Integrand};

/// Default limit on the number of points of a constructed rule.
pub const DEFAULT_POINT_CAP: u128 = 10_000_000;

/// Merged weights below this magnitude are dropped when pruning.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Construction {
    Delta,
    Combination,
    Recursive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    pub point_cap: u128,
    pub prune_zero: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            point_cap: DEFAULT_POINT_CAP,
            prune_zero: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubaturePoint {
    keys: Box<[NodeKey]>,
    coordinates: Box<[f64]>,
    weight: f64,
}

impl CubaturePoint {
    pub fn keys(&self) -> &[NodeKey] {
        &self.keys
    }

    pub fn coordinates(&self) -> &[f64] {
        &self.coordinates
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }
}

/// The merged rule `A(d + k, d)`: points sorted by key vector with their
/// accumulated weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CubatureRule {
    dim: usize,
    k: u32,
    construction: Construction,
    pruned: bool,
    points: Vec<CubaturePoint>,
}

impl CubatureRule {
    pub fn build(dim: usize, k: u32, construction: Construction, opts: &BuildOptions) -> Result<Self> {
        check_request(dim, k, opts)?;
        let merged = match construction {
            Construction::Delta => build_delta(dim, k),
            Construction::Combination => build_combination(dim, k),
            Construction::Recursive => build_recursive(dim, k),
        }?;
        let mut points: Vec<CubaturePoint> = merged
            .into_iter()
            .filter(|(_, w)| !opts.prune_zero || w.abs() >= PRUNE_THRESHOLD)
            .map(|(keys, weight)| CubaturePoint {
                coordinates: keys.iter().map(|key| key.coordinate()).collect(),
                keys,
                weight,
            })
            .collect();
        points.sort_unstable_by(|a, b| a.keys.cmp(&b.keys));
        Ok(Self {
            dim,
            k,
            construction,
            pruned: opts.prune_zero,
            points,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Level parameter `k = q - d`.
    pub fn k(&self) -> u32 {
        self.k
    }

    /// Smolyak parameter `q = d + k`.
    pub fn q(&self) -> u32 {
        self.dim as u32 + self.k
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn is_pruned(&self) -> bool {
        self.pruned
    }

    pub fn points(&self) -> &[CubaturePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        compensated_sum(self.points.iter().map(|p| p.weight))
    }

    pub fn key_set(&self) -> BTreeSet<Vec<NodeKey>> {
        self.points.iter().map(|p| p.keys.to_vec()).collect()
    }

    /// Weight stored for `keys`, if the point belongs to the rule.
    pub fn weight_of(&self, keys: &[NodeKey]) -> Option<f64> {
        self.points
            .binary_search_by(|p| p.keys.as_ref().cmp(keys))
            .ok()
            .map(|i| self.points[i].weight)
    }
}

/// `A(d + k, d)` from the sum of difference tensor products.
pub fn smolyak_rule(dim: usize, k: u32) -> Result<CubatureRule> {
    CubatureRule::build(dim, k, Construction::Delta, &BuildOptions::default())
}

/// `A(d + k, d)` from the combination technique.
pub fn smolyak_rule_combination(dim: usize, k: u32) -> Result<CubatureRule> {
    CubatureRule::build(dim, k, Construction::Combination, &BuildOptions::default())
}

/// `A(d + k, d)` from the dimension recursion.
pub fn smolyak_rule_recursive(dim: usize, k: u32) -> Result<CubatureRule> {
    CubatureRule::build(dim, k, Construction::Recursive, &BuildOptions::default())
}

fn check_request(dim: usize, k: u32, opts: &BuildOptions) -> Result<()> {
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    if k + 1 > MAX_LEVEL {
        return Err(Error::LevelTooLarge {
            level: k + 1,
            max: MAX_LEVEL,
        });
    }
    let predicted = predicted_node_count(dim, k);
    if predicted > opts.point_cap {
        return Err(Error::PointCapExceeded {
            predicted,
            cap: opts.point_cap,
        });
    }
    Ok(())
}

/// Number of nodes first appearing at level `l` (1, 2, 2, 4, 8, ...).
fn new_nodes_at_level(level: u32) -> u128 {
    match level {
        1 => 1,
        2 => 2,
        l => 1u128 << (l - 2),
    }
}

/// `N_d(k)` from the hierarchical decomposition of the grid: each point has a
/// unique per-coordinate introduction level and belongs to `H(d + k, d)` iff
/// those levels sum to at most `d + k`. Saturates at `u128::MAX`.
pub fn predicted_node_count(dim: usize, k: u32) -> u128 {
    let k = k as usize;
    // counts[e] = number of points whose level excess sums to e
    let mut counts = vec![0u128; k + 1];
    counts[0] = 1;
    for _ in 0..dim {
        let mut next = vec![0u128; k + 1];
        for (e, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for extra in 0..=(k - e) {
                let g = new_nodes_at_level(extra as u32 + 1);
                let t = c.saturating_mul(g);
                next[e + extra] = next[e + extra].saturating_add(t);
            }
        }
        counts = next;
    }
    counts.into_iter().fold(0u128, u128::saturating_add)
}

struct Accumulator {
    dim: usize,
    map: HashMap<Box<[NodeKey]>, NeumaierSum>,
    buf: Vec<NodeKey>,
}

impl Accumulator {
    fn new(dim: usize) -> Self {
        Self {
            dim,
            map: HashMap::new(),
            buf: Vec::with_capacity(dim),
        }
    }

    fn add_current(&mut self, weight: f64) {
        match self.map.get_mut(self.buf.as_slice()) {
            Some(acc) => *acc += weight,
            None => {
                self.map
                    .insert(self.buf.clone().into_boxed_slice(), NeumaierSum::new() + weight);
            }
        }
    }

    /// Adds `coefficient * (factors[0] (x) ... (x) factors[d-1])`.
    fn add_tensor(&mut self, coefficient: f64, factors: &[&[Node]]) {
        debug_assert_eq!(factors.len(), self.dim);
        let mut idx = vec![0usize; self.dim];
        loop {
            self.buf.clear();
            let mut w = coefficient;
            for (f, &i) in factors.iter().zip(&idx) {
                let node = f[i];
                self.buf.push(node.key);
                w *= node.weight;
            }
            self.add_current(w);
            let mut pos = 0;
            loop {
                if pos == self.dim {
                    return;
                }
                idx[pos] += 1;
                if idx[pos] < factors[pos].len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }

    fn finish(self) -> Vec<(Box<[NodeKey]>, f64)> {
        self.map.into_iter().map(|(k, v)| (k, v.value())).collect()
    }
}

fn one_dim_rules(max_level: u32, difference: bool) -> Result<Vec<Vec<Node>>> {
    (1..=max_level)
        .map(|l| {
            let rule = if difference { delta_rule(l) } else { cc_rule(l) }?;
            Ok(rule.nodes().to_vec())
        })
        .collect()
}

fn build_delta(dim: usize, k: u32) -> Result<Vec<(Box<[NodeKey]>, f64)>> {
    let deltas = one_dim_rules(k + 1, true)?;
    let q = dim as u32 + k;
    let mut acc = Accumulator::new(dim);
    for index in multi_indices(dim, dim as u32, q) {
        let factors: Vec<&[Node]> = index
            .levels()
            .iter()
            .map(|&l| deltas[l as usize - 1].as_slice())
            .collect();
        acc.add_tensor(1.0, &factors);
    }
    Ok(acc.finish())
}

fn build_combination(dim: usize, k: u32) -> Result<Vec<(Box<[NodeKey]>, f64)>> {
    let rules = one_dim_rules(k + 1, false)?;
    let d = dim as u32;
    let q = d + k;
    let lo = (q + 1).saturating_sub(d).max(d);
    let mut acc = Accumulator::new(dim);
    for index in multi_indices(dim, lo, q) {
        let gap = q - index.order();
        let magnitude = binomial_f64(dim as u64 - 1, u64::from(gap));
        let coefficient = if gap.is_multiple_of(2) { magnitude } else { -magnitude };
        let factors: Vec<&[Node]> = index
            .levels()
            .iter()
            .map(|&l| rules[l as usize - 1].as_slice())
            .collect();
        acc.add_tensor(coefficient, &factors);
    }
    Ok(acc.finish())
}

fn build_recursive(dim: usize, k: u32) -> Result<Vec<(Box<[NodeKey]>, f64)>> {
    let deltas = one_dim_rules(k + 1, true)?;
    // lower[kk] = merged A(dd + kk, dd); the zero-dimensional rule is the
    // single empty point with weight 1 for every kk.
    let empty: Box<[NodeKey]> = Vec::new().into_boxed_slice();
    let mut lower: Vec<Vec<(Box<[NodeKey]>, f64)>> = vec![vec![(empty, 1.0)]; k as usize + 1];
    for dd in 1..=dim {
        let ks: Vec<u32> = if dd == dim { vec![k] } else { (0..=k).collect() };
        let mut next = vec![Vec::new(); k as usize + 1];
        for kk in ks {
            let mut acc = Accumulator::new(dd);
            for level in 1..=kk + 1 {
                let sub = &lower[(kk + 1 - level) as usize];
                for (keys, w) in sub {
                    for node in &deltas[level as usize - 1] {
                        acc.buf.clear();
                        acc.buf.extend_from_slice(keys);
                        acc.buf.push(node.key);
                        acc.add_current(w * node.weight);
                    }
                }
            }
            let mut merged = acc.finish();
            merged.sort_unstable_by(|a, b| a.0.cmp(&b.0));
            next[kk as usize] = merged;
        }
        lower = next;
    }
    Ok(std::mem::take(&mut lower[k as usize]))
}

/// The set `H(d + k, d)` as the union of the top-shell tensor grids
/// `X^{i_1} x ... x X^{i_d}`, `|i| = d + k`.
pub fn sparse_grid_points(dim: usize, k: u32) -> Result<BTreeSet<Vec<NodeKey>>> {
    sparse_grid_points_with_cap(dim, k, DEFAULT_POINT_CAP)
}

pub fn sparse_grid_points_with_cap(dim: usize, k: u32, cap: u128) -> Result<BTreeSet<Vec<NodeKey>>> {
    check_request(
        dim,
        k,
        &BuildOptions {
            point_cap: cap,
            prune_zero: false,
        },
    )?;
    let grids: Vec<Vec<NodeKey>> = (1..=k + 1)
        .map(|l| Ok(cc_rule(l)?.keys().collect()))
        .collect::<Result<_>>()?;
    let q = dim as u32 + k;
    let mut out = BTreeSet::new();
    for index in multi_indices(dim, q, q) {
        let factors: Vec<&[NodeKey]> = index
            .levels()
            .iter()
            .map(|&l| grids[l as usize - 1].as_slice())
            .collect();
        let mut idx = vec![0usize; dim];
        'grid: loop {
            out.insert(factors.iter().zip(&idx).map(|(f, &i)| f[i]).collect());
            let mut pos = 0;
            loop {
                if pos == dim {
                    break 'grid;
                }
                idx[pos] += 1;
                if idx[pos] < factors[pos].len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }
    Ok(out)
}

/// `N_d(k) = |H(d + k, d)|` by enumeration.
pub fn node_count(dim: usize, k: u32) -> Result<usize> {
    Ok(sparse_grid_points(dim, k)?.len())
}

/// Natural log of `2 (2e)^k (1 + d/k)^k`.
pub fn ln_node_count_bound(dim: usize, k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::ZeroK);
    }
    let (d, k) = (dim as f64, f64::from(k));
    Ok(std::f64::consts::LN_2 + k * ((2.0 * std::f64::consts::E).ln() + (d / k).ln_1p()))
}

/// Upper bound `2 (2e)^k (1 + d/k)^k` on `N_d(k)`, `k >= 1`.
pub fn node_count_bound(dim: usize, k: u32) -> Result<f64> {
    ln_node_count_bound(dim, k).map(f64::exp)
}

/// Sum of absolute merged weights.
pub fn operator_norm(rule: &CubatureRule) -> f64 {
    compensated_sum(rule.points.iter().map(|p| p.weight.abs()))
}

/// Sum over all difference tensor terms of the product of their 1-D norms,
/// i.e. the absolute weight sum before coincident points are merged.
pub fn unmerged_norm(dim: usize, k: u32) -> Result<f64> {
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    let norms: Vec<f64> = (1..=k + 1)
        .map(|l| delta_rule(l).map(|r| rule_norm(&r)))
        .collect::<Result<_>>()?;
    let q = dim as u32 + k;
    Ok(compensated_sum(multi_indices(dim, dim as u32, q).map(|i| {
        i.levels()
            .iter()
            .map(|&l| norms[l as usize - 1])
            .product::<f64>()
    })))
}

/// Exact binomial coefficient, `None` on `u128` overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1)
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    Some(acc)
}

/// `ln C(n, k)`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if let Some(b) = binomial(n, k) {
        if b < (1u128 << 100) {
            return (b as f64).ln();
        }
    }
    let k = k.min(n - k);
    compensated_sum((0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()))
}

fn binomial_f64(n: u64, k: u64) -> f64 {
    binomial(n, k).map_or_else(|| ln_binomial(n, k).exp(), |b| b as f64)
}

/// Norm bound `C(d + k, d)` and, for `k >= 1`, its majorant `e^k (1 + d/k)^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormBound {
    /// `C(d + k, d)` when it fits in `u128`.
    pub binomial: Option<u128>,
    pub ln_binomial: f64,
    /// `ln(e^k (1 + d/k)^k)`; `None` for `k = 0`.
    pub ln_majorant: Option<f64>,
}

impl NormBound {
    pub fn binomial_value(&self) -> f64 {
        self.binomial.map_or_else(|| self.ln_binomial.exp(), |b| b as f64)
    }

    pub fn majorant_value(&self) -> Option<f64> {
        self.ln_majorant.map(f64::exp)
    }
}

pub fn norm_bound(dim: usize, k: u32) -> Result<NormBound> {
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    let (n, r) = (dim as u64 + u64::from(k), dim as u64);
    let ln_majorant = (k > 0).then(|| {
        let kf = f64::from(k);
        kf * (1.0 + (dim as f64 / kf).ln_1p())
    });
    Ok(NormBound {
        binomial: binomial(n, r),
        ln_binomial: ln_binomial(n, r),
        ln_majorant,
    })
}

/// `sum_p w_p f(x_p)` in key order with compensated summation.
pub fn integrate<F: Integrand + ?Sized>(rule: &CubatureRule, f: &F) -> Result<f64> {
    if f.dim() != rule.dim {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: rule.dim,
        });
    }
    let mut acc = NeumaierSum::new();
    for p in &rule.points {
        let value = f.evaluate(&p.coordinates);
        if !value.is_finite() {
            return Err(Error::NonFiniteValue {
                point: p.coordinates.to_vec(),
                value,
            });
        }
        acc += p.weight * value;
    }
    Ok(acc.value())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonomialResidual {
    pub exponents: Vec<u32>,
    pub computed: f64,
    pub exact: f64,
    /// `|computed - exact| / |exact|`
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactnessReport {
    pub degree: u32,
    /// Whether every monomial up to `degree` was tested.
    pub exhaustive: bool,
    pub residuals: Vec<MonomialResidual>,
    pub max_residual: f64,
}

impl ExactnessReport {
    pub fn worst(&self) -> Option<&MonomialResidual> {
        self.residuals
            .iter()
            .max_by(|a, b| a.residual.total_cmp(&b.residual))
    }
}

/// All exponent vectors of length `dim` with total degree `<= degree`.
pub fn monomial_exponents(dim: usize, degree: u32) -> Vec<Vec<u32>> {
    multi_indices(dim, dim as u32, dim as u32 + degree)
        .map(|i| i.levels().iter().map(|l| l - 1).collect())
        .collect()
}

const EXACTNESS_SEED: u64 = 0x0000_05ee_dcc5_0001;

/// Integrates monomials `x^alpha` with `|alpha| <= max_total_degree`: all of
/// them when there are at most `trials`, otherwise a fixed pseudo-random
/// sample of `trials` monomials.
pub fn exactness_check(rule: &CubatureRule, max_total_degree: u32, trials: usize) -> ExactnessReport {
    let dim = rule.dim;
    let total = binomial(dim as u64 + u64::from(max_total_degree), dim as u64);
    let exhaustive = total.is_some_and(|t| t <= trials as u128);
    let exps: Vec<Vec<u32>> = if exhaustive {
        monomial_exponents(dim, max_total_degree)
    } else {
        // Stars and bars: `dim` bar positions among `degree + dim` slots give
        // a uniformly distributed exponent vector of total degree <= degree.
        let slots = max_total_degree as usize + dim;
        let mut rng = ChaCha8Rng::seed_from_u64(EXACTNESS_SEED);
        let mut picked = BTreeSet::new();
        while picked.len() < trials {
            let mut bars = sample(&mut rng, slots, dim).into_vec();
            bars.sort_unstable();
            let mut prev = 0;
            let alpha: Vec<u32> = bars
                .iter()
                .map(|&b| {
                    let e = (b - prev) as u32;
                    prev = b + 1;
                    e
                })
                .collect();
            picked.insert(alpha);
        }
        picked.into_iter().collect()
    };
    let residuals: Vec<MonomialResidual> = exps
        .into_iter()
        .map(|alpha| {
            let f = monomial(alpha.clone());
            let exact = f.exact_integral().unwrap_or(f64::NAN);
            // monomials are finite on the unit cube
            let computed = integrate(rule, &f).unwrap_or(f64::NAN);
            MonomialResidual {
                exponents: alpha,
                computed,
                exact,
                residual: ((computed - exact) / exact).abs(),
            }
        })
        .collect();
    let max_residual = residuals.iter().map(|r| r.residual).fold(0.0, f64::max);
    ExactnessReport {
        degree: max_total_degree,
        exhaustive,
        residuals,
        max_residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testfns::FnIntegrand;

    fn key(p: u32, q: u32) -> NodeKey {
        NodeKey::new(p, q).unwrap()
    }

    #[test]
    fn k_zero_is_the_midpoint() {
        for d in 1..=6 {
            let rule = smolyak_rule(d, 0).unwrap();
            assert_eq!(rule.len(), 1);
            let p = &rule.points()[0];
            assert!(p.coordinates().iter().all(|&x| x == 0.5));
            assert_eq!(p.weight(), 1.0);
        }
        let c = smolyak_rule_combination(3, 0).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.points()[0].weight(), 1.0);
        let r = smolyak_rule_recursive(2, 0).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.points()[0].weight(), 1.0);
    }

    #[test]
    fn two_dimensional_level_one() {
        let rule = smolyak_rule(2, 1).unwrap();
        assert_eq!(rule.len(), 5);
        let c = NodeKey::CENTER;
        let expect = [
            (vec![c, c], 1.0 / 3.0),
            (vec![key(0, 1), c], 1.0 / 6.0),
            (vec![key(1, 1), c], 1.0 / 6.0),
            (vec![c, key(0, 1)], 1.0 / 6.0),
            (vec![c, key(1, 1)], 1.0 / 6.0),
        ];
        for (keys, w) in expect {
            let got = rule.weight_of(&keys).unwrap();
            assert!((got - w).abs() < 1e-15, "{keys:?}");
        }
        let comb = smolyak_rule_combination(2, 1).unwrap();
        let rec = smolyak_rule_recursive(2, 1).unwrap();
        for p in rule.points() {
            assert!((comb.weight_of(p.keys()).unwrap() - p.weight()).abs() < 1e-12);
            assert!((rec.weight_of(p.keys()).unwrap() - p.weight()).abs() < 1e-12);
        }
    }

    #[test]
    fn one_dimension_telescopes_to_cc() {
        for k in 0..=8 {
            let u = cc_rule(k + 1).unwrap();
            for rule in [
                smolyak_rule(1, k).unwrap(),
                smolyak_rule_combination(1, k).unwrap(),
                smolyak_rule_recursive(1, k).unwrap(),
            ] {
                assert_eq!(rule.len(), u.len());
                for (p, n) in rule.points().iter().zip(u.nodes()) {
                    assert_eq!(p.keys(), &[n.key]);
                    assert!((p.weight() - n.weight).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn grid_counts() {
        assert_eq!(node_count(2, 1).unwrap(), 5);
        assert_eq!(node_count(2, 2).unwrap(), 13);
        for d in 1..=5 {
            assert_eq!(node_count(d, 0).unwrap(), 1);
        }
        for k in 1..=10 {
            assert_eq!(node_count(1, k).unwrap(), (1usize << k) + 1);
        }
        for d in 1..=4 {
            for k in 0..=6 {
                assert_eq!(
                    node_count(d, k).unwrap() as u128,
                    predicted_node_count(d, k),
                    "d {d} k {k}"
                );
                assert_eq!(sparse_grid_points(d, k).unwrap(), smolyak_rule(d, k).unwrap().key_set());
            }
        }
    }

    #[test]
    fn count_bounds() {
        assert!((node_count_bound(1, 1).unwrap() - 8.0 * std::f64::consts::E).abs() < 1e-12);
        let b22 = node_count_bound(2, 2).unwrap();
        assert!((b22 - 32.0 * std::f64::consts::E.powi(2)).abs() < 1e-10);
        assert!(b22 > 13.0);
        assert!(node_count_bound(5, 9).unwrap() > predicted_node_count(5, 9) as f64);
        assert_eq!(node_count_bound(3, 0), Err(Error::ZeroK));
    }

    #[test]
    fn cap_is_enforced_before_construction() {
        let opts = BuildOptions {
            point_cap: 12,
            prune_zero: false,
        };
        let err = CubatureRule::build(2, 2, Construction::Delta, &opts).unwrap_err();
        assert_eq!(err, Error::PointCapExceeded { predicted: 13, cap: 12 });
        assert!(sparse_grid_points_with_cap(2, 2, 12).is_err());
        assert_eq!(smolyak_rule(0, 1).unwrap_err(), Error::ZeroDimension);
    }

    #[test]
    fn norms() {
        let r = smolyak_rule(2, 1).unwrap();
        assert!((operator_norm(&r) - 1.0).abs() < 1e-15);
        for d in 1..=5 {
            assert_eq!(operator_norm(&smolyak_rule(d, 0).unwrap()), 1.0);
        }
        let b = norm_bound(2, 2).unwrap();
        assert_eq!(b.binomial, Some(6));
        assert_eq!(norm_bound(10, 5).unwrap().binomial, Some(3003));
        for k in 0..=8 {
            let nb = norm_bound(1, k).unwrap();
            assert_eq!(nb.binomial, Some(u128::from(k) + 1));
            assert!((operator_norm(&smolyak_rule(1, k).unwrap()) - 1.0).abs() < 1e-13);
        }
        assert!(norm_bound(3, 0).unwrap().ln_majorant.is_none());
    }

    #[test]
    fn unmerged_norm_dominates_merged() {
        for d in 1..=4 {
            for k in 0..=5 {
                let merged = operator_norm(&smolyak_rule(d, k).unwrap());
                let unmerged = unmerged_norm(d, k).unwrap();
                assert!(merged <= unmerged + 1e-12);
                assert!(unmerged <= norm_bound(d, k).unwrap().binomial_value());
            }
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(12, 4), Some(495));
        assert_eq!(binomial(4, 7), Some(0));
        assert_eq!(binomial(0, 0), Some(1));
        assert!(binomial(400, 200).is_none());
        assert!((ln_binomial(15, 10) - 3003f64.ln()).abs() < 1e-14);
        assert!((ln_binomial(400, 200) - 274.036_723_598_430_46).abs() < 1e-9);
    }

    #[test]
    fn integrate_small_cases() {
        let rule = smolyak_rule(2, 1).unwrap();
        let one = FnIntegrand::new(2, |_: &[f64]| 1.0);
        assert!((integrate(&rule, &one).unwrap() - 1.0).abs() < 1e-12);
        let cube = monomial(vec![3, 0]);
        assert!((integrate(&rule, &cube).unwrap() - 0.25).abs() < 1e-12);
        let wrong_dim = monomial(vec![1, 1, 1]);
        assert!(matches!(
            integrate(&rule, &wrong_dim),
            Err(Error::DimensionMismatch { .. })
        ));
        let bad = FnIntegrand::new(2, |x: &[f64]| 1.0 / (x[0] - 0.5));
        match integrate(&rule, &bad) {
            Err(Error::NonFiniteValue { point, .. }) => assert_eq!(point[0], 0.5),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn exactness_small_cases() {
        for d in 1..=4 {
            let rep = exactness_check(&smolyak_rule(d, 0).unwrap(), 1, 1000);
            assert!(rep.exhaustive);
            assert!(rep.max_residual <= 1e-12);
        }
        let rule = smolyak_rule(2, 1).unwrap();
        assert!(exactness_check(&rule, 3, 1000).max_residual <= 1e-10);
        let rep = exactness_check(&rule, 4, 1000);
        let x4 = rep.residuals.iter().find(|r| r.exponents == [4, 0]).unwrap();
        assert!(x4.residual > 1e-6);
        assert_eq!(rep.worst().unwrap().residual, rep.max_residual);
    }

    #[test]
    fn exactness_sampling_is_deterministic() {
        let rule = smolyak_rule(3, 2).unwrap();
        let a = exactness_check(&rule, 5, 10);
        let b = exactness_check(&rule, 5, 10);
        assert!(!a.exhaustive);
        assert_eq!(a.residuals.len(), 10);
        assert_eq!(a, b);
        assert!(a.max_residual <= 1e-10);
    }

    #[test]
    fn pruning_drops_only_tiny_weights() {
        let full = smolyak_rule(3, 3).unwrap();
        let opts = BuildOptions {
            prune_zero: true,
            ..BuildOptions::default()
        };
        let pruned = CubatureRule::build(3, 3, Construction::Delta, &opts).unwrap();
        assert!(pruned.is_pruned());
        assert!(pruned.len() <= full.len());
        for p in full.points() {
            if p.weight().abs() >= PRUNE_THRESHOLD {
                assert_eq!(pruned.weight_of(p.keys()), Some(p.weight()));
            }
        }
    }

    #[test]
    fn rules_are_deterministic() {
        let a = smolyak_rule(3, 4).unwrap();
        let b = smolyak_rule(3, 4).unwrap();
        assert_eq!(a, b);
    }
}
