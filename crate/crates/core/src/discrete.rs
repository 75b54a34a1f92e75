//! Finite weighted-graph metric measure spaces.
//!
//! A [`DiscreteMMS`] is a connected graph carrying positive vertex measures
//! and edges with positive lengths and positive cross-weights.  The perimeter
//! of a vertex set is the total cross-weight of its cut, and the pointwise
//! slope of a function is the max-over-neighbors difference quotient
//! `lip(f)(i) = max_j |f_i - f_j| / d_ij`.
//!
//! On top of these primitives the module provides
//! brute-force isoperimetric profiles ([`DiscreteMMS::iso_profile_bruteforce`]),
//! the Cheeger constant with its optimal witness set
//! ([`DiscreteMMS::cheeger_constant`]), upper estimates of the p-spectral gap
//! from multi-start descent ([`DiscreteMMS::spectral_gap`]), and the discrete
//! Cheeger inequality `lambda_p >= h^p / p^p`
//! ([`DiscreteMMS::cheeger_inequality_check`]).
//!
//! The spectral gap is reported as an *upper* estimate (a minimum of valid
//! Rayleigh quotients), so a passing Cheeger check is meaningful while a
//! failing one is a genuine counterexample signal, never an optimizer
//! artifact.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::num::optim::golden_section_min;
use crate::par::{self, Parallelism};
use crate::radial::ProfileTable;

/// Hard budget for exact subset enumeration (2^24 subsets).
pub const ENUMERATION_BUDGET: usize = 24;

/// Number of random restarts used by the spectral-gap optimizer.
const SPECTRAL_RESTARTS: usize = 20;

/// Undirected weighted edge of a [`DiscreteMMS`], stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    /// First endpoint (smaller index).
    pub a: usize,
    /// Second endpoint (larger index).
    pub b: usize,
    /// Edge length `d_ab > 0` entering difference quotients.
    pub length: f64,
    /// Cross weight `w_ab > 0` entering cut perimeters.
    pub weight: f64,
}

/// A finite metric measure space: connected weighted graph with vertex
/// measures.
#[derive(Debug, Clone)]
pub struct DiscreteMMS {
    label: String,
    vertex_measures: Vec<f64>,
    edges: Vec<Edge>,
    /// Per-vertex adjacency: (neighbor, length, weight).
    adjacency: Vec<Vec<(usize, f64, f64)>>,
    total_measure: f64,
}

impl DiscreteMMS {
    /// Builds a discrete space from vertex measures and edge quadruples
    /// `(a, b, length, weight)`.
    ///
    /// Fails if any measure, length, or weight is nonpositive or non-finite,
    /// if an edge is a loop, repeated, or out of range, or if the graph is
    /// disconnected.
    pub fn new(
        vertex_measures: Vec<f64>,
        edges: Vec<(usize, usize, f64, f64)>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let n = vertex_measures.len();
        if n == 0 {
            return Err(Error::input("a discrete space needs at least one vertex"));
        }
        for (i, &mu) in vertex_measures.iter().enumerate() {
            if !(mu > 0.0) || !mu.is_finite() {
                return Err(Error::input(format!(
                    "vertex measure mu_{i} = {mu} must be positive and finite"
                )));
            }
        }
        let mut canonical = Vec::with_capacity(edges.len());
        let mut seen = BTreeSet::new();
        for &(a, b, length, weight) in &edges {
            if a >= n || b >= n {
                return Err(Error::input(format!(
                    "edge ({a}, {b}) references a vertex outside 0..{n}"
                )));
            }
            if a == b {
                return Err(Error::input(format!("loop edge at vertex {a}")));
            }
            if !(length > 0.0) || !length.is_finite() || !(weight > 0.0) || !weight.is_finite() {
                return Err(Error::input(format!(
                    "edge ({a}, {b}) needs positive finite length and weight, got d = {length}, w = {weight}"
                )));
            }
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            if !seen.insert((lo, hi)) {
                return Err(Error::input(format!("duplicate edge ({lo}, {hi})")));
            }
            canonical.push(Edge { a: lo, b: hi, length, weight });
        }
        let mut adjacency = vec![Vec::new(); n];
        for e in &canonical {
            adjacency[e.a].push((e.b, e.length, e.weight));
            adjacency[e.b].push((e.a, e.length, e.weight));
        }
        // Connectivity (breadth-first from vertex 0).
        let mut visited = vec![false; n];
        let mut queue = std::collections::VecDeque::from([0usize]);
        visited[0] = true;
        let mut reached = 1usize;
        while let Some(v) = queue.pop_front() {
            for &(w, _, _) in &adjacency[v] {
                if !visited[w] {
                    visited[w] = true;
                    reached += 1;
                    queue.push_back(w);
                }
            }
        }
        if reached != n {
            return Err(Error::input(format!(
                "graph is disconnected: reached {reached} of {n} vertices"
            )));
        }
        let total_measure = vertex_measures.iter().sum();
        Ok(Self { label: label.into(), vertex_measures, edges: canonical, adjacency, total_measure })
    }

    /// Number of vertices.
    pub fn n_vertices(&self) -> usize {
        self.vertex_measures.len()
    }

    /// Vertex measures `mu_i`.
    pub fn vertex_measures(&self) -> &[f64] {
        &self.vertex_measures
    }

    /// Canonicalized edge list (`a < b`).
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Human-readable label.
    pub fn label(&self) -> &str {
        &self.label
    }

    /// Total measure of the space.
    pub fn total_measure(&self) -> f64 {
        self.total_measure
    }

    fn check_subset(&self, subset: &[usize]) -> Result<Vec<bool>> {
        let n = self.n_vertices();
        let mut inset = vec![false; n];
        for &v in subset {
            if v >= n {
                return Err(Error::input(format!("subset vertex {v} outside 0..{n}")));
            }
            inset[v] = true;
        }
        Ok(inset)
    }

    /// Perimeter of a vertex set: total cross-weight of the cut.
    pub fn perimeter(&self, subset: &[usize]) -> Result<f64> {
        let inset = self.check_subset(subset)?;
        Ok(self
            .edges
            .iter()
            .filter(|e| inset[e.a] != inset[e.b])
            .map(|e| e.weight)
            .sum())
    }

    /// Measure of a vertex set.
    pub fn measure_of(&self, subset: &[usize]) -> Result<f64> {
        let inset = self.check_subset(subset)?;
        Ok((0..self.n_vertices()).filter(|&i| inset[i]).map(|i| self.vertex_measures[i]).sum())
    }

    /// Wraps vertex values as a [`DiscreteFunction`] carrying this space's
    /// vertex measures.
    pub fn function(&self, values: Vec<f64>) -> Result<crate::functions::DiscreteFunction> {
        self.check_values(&values)?;
        crate::functions::DiscreteFunction::new(values, self.vertex_measures.clone())
    }

    /// Pointwise slope `lip(f)(i) = max_{j ~ i} |f_i - f_j| / d_ij`.
    ///
    /// Vertices without neighbors (only possible in the one-vertex space)
    /// get slope zero.
    pub fn lip(&self, values: &[f64]) -> Result<Vec<f64>> {
        self.check_values(values)?;
        Ok((0..self.n_vertices())
            .map(|i| {
                self.adjacency[i]
                    .iter()
                    .map(|&(j, d, _)| (values[i] - values[j]).abs() / d)
                    .fold(0.0f64, f64::max)
            })
            .collect())
    }

    /// Cheeger p-energy `Ch_p(f) = sum_i mu_i lip(f)(i)^p`.
    pub fn ch_p(&self, values: &[f64], p: f64) -> Result<f64> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::domain(format!("Ch_p needs p >= 1, got {p}")));
        }
        let lip = self.lip(values)?;
        Ok(lip
            .iter()
            .zip(&self.vertex_measures)
            .map(|(&l, &mu)| mu * l.powf(p))
            .sum())
    }

    fn check_values(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.n_vertices() {
            return Err(Error::input(format!(
                "function has {} values for {} vertices",
                values.len(),
                self.n_vertices()
            )));
        }
        crate::error::ensure_finite(values, "vertex values")
    }

    fn ensure_enumeration_budget(&self) -> Result<()> {
        let n = self.n_vertices();
        if n > ENUMERATION_BUDGET {
            return Err(Error::budget(format!(
                "exact enumeration is limited to {ENUMERATION_BUDGET} vertices, got {n}"
            )));
        }
        if n < 2 {
            return Err(Error::input("enumeration needs at least two vertices"));
        }
        Ok(())
    }

    /// Measure and cut perimeter of the subset encoded by `mask`.
    fn mask_stats(&self, mask: u32) -> (f64, f64) {
        let mut mu = 0.0;
        let mut bits = mask;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            mu += self.vertex_measures[i];
            bits &= bits - 1;
        }
        let per = self
            .edges
            .iter()
            .filter(|e| ((mask >> e.a) ^ (mask >> e.b)) & 1 == 1)
            .map(|e| e.weight)
            .sum();
        (mu, per)
    }

    /// Exact isoperimetric profile by subset enumeration: for every
    /// achievable measure `t`, the minimum cut weight over subsets of
    /// measure exactly `t`.
    ///
    /// Refuses graphs with more than [`ENUMERATION_BUDGET`] vertices.
    pub fn iso_profile_bruteforce(&self, mode: Parallelism) -> Result<ProfileTable> {
        self.ensure_enumeration_budget()?;
        let n = self.n_vertices();
        let total_masks = 1u64 << n;
        let chunk = 1u64 << 16;
        let chunks = total_masks.div_ceil(chunk) as usize;
        let partials: Vec<BTreeMap<u64, f64>> = par::map_indexed(mode, chunks, |ci| {
            let lo = ci as u64 * chunk;
            let hi = (lo + chunk).min(total_masks);
            let mut best: BTreeMap<u64, f64> = BTreeMap::new();
            for mask in lo..hi {
                if mask == 0 || mask == total_masks - 1 {
                    continue;
                }
                let (mu, per) = self.mask_stats(mask as u32);
                best.entry(mu.to_bits())
                    .and_modify(|b| *b = b.min(per))
                    .or_insert(per);
            }
            best
        });
        let mut merged: BTreeMap<u64, f64> = BTreeMap::new();
        for part in partials {
            for (k, v) in part {
                merged.entry(k).and_modify(|b| *b = b.min(v)).or_insert(v);
            }
        }
        // Keys are bit patterns of positive floats, whose order agrees with
        // numeric order, so the map already iterates by increasing measure.
        let volumes: Vec<f64> = merged.keys().map(|&k| f64::from_bits(k)).collect();
        let perimeters: Vec<f64> = merged.values().copied().collect();
        ProfileTable::new(volumes, perimeters, self.total_measure)
    }

    /// Exact Cheeger constant `h = min Per(A) / mu(A)` over nonempty sets
    /// with `2 mu(A) <= mu(X)`, with an optimal witness set.
    pub fn cheeger_constant(&self, mode: Parallelism) -> Result<CheegerReport> {
        self.ensure_enumeration_budget()?;
        let n = self.n_vertices();
        let total_masks = 1u64 << n;
        let half = 0.5 * self.total_measure * (1.0 + 1e-12);
        let chunk = 1u64 << 16;
        let chunks = total_masks.div_ceil(chunk) as usize;
        let partials: Vec<Option<(f64, u64)>> = par::map_indexed(mode, chunks, |ci| {
            let lo = ci as u64 * chunk;
            let hi = (lo + chunk).min(total_masks);
            let mut best: Option<(f64, u64)> = None;
            for mask in lo..hi {
                if mask == 0 {
                    continue;
                }
                let (mu, per) = self.mask_stats(mask as u32);
                if mu > half {
                    continue;
                }
                let ratio = per / mu;
                let better = match best {
                    None => true,
                    Some((b, bm)) => ratio < b || (ratio == b && mask < bm),
                };
                if better {
                    best = Some((ratio, mask));
                }
            }
            best
        });
        let best = partials
            .into_iter()
            .flatten()
            .min_by(|x, y| x.0.partial_cmp(&y.0).unwrap().then(x.1.cmp(&y.1)))
            .ok_or_else(|| Error::input("no admissible subset with 2 mu(A) <= mu(X)"))?;
        let witness_set: Vec<usize> =
            (0..n).filter(|&i| (best.1 >> i) & 1 == 1).collect();
        Ok(CheegerReport { h: best.0, witness_set, lambda_p: Vec::new(), inequality_holds: Vec::new() })
    }

    /// Rayleigh-type quotient `Ch_p(f) / inf_c sum mu_i |f_i - c|^p` of one
    /// candidate function; the shift infimum is solved exactly for `p = 2`
    /// and by golden-section search otherwise.
    ///
    /// Returns infinity for (numerically) constant candidates.
    pub fn rayleigh_quotient(&self, values: &[f64], p: f64) -> Result<f64> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::domain(format!("spectral quotient needs p > 1, got {p}")));
        }
        self.check_values(values)?;
        Ok(self.quotient_inner(values, p).0)
    }

    fn best_shift(&self, values: &[f64], p: f64) -> (f64, f64) {
        let cost = |c: f64| -> f64 {
            values
                .iter()
                .zip(&self.vertex_measures)
                .map(|(&v, &mu)| mu * (v - c).abs().powf(p))
                .sum()
        };
        if p == 2.0 {
            let c = values
                .iter()
                .zip(&self.vertex_measures)
                .map(|(&v, &mu)| mu * v)
                .sum::<f64>()
                / self.total_measure;
            return (c, cost(c));
        }
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if lo == hi {
            return (lo, 0.0);
        }
        let tol = 1e-13 * (hi - lo).max(1e-300);
        golden_section_min(&cost, lo, hi, tol)
    }

    /// Quotient together with the optimal shift.
    fn quotient_inner(&self, values: &[f64], p: f64) -> (f64, f64) {
        let (c, d) = self.best_shift(values, p);
        let spread = values.iter().fold(0.0f64, |m, &v| m.max((v - c).abs()));
        if d <= 1e-280 || spread <= 1e-140 {
            return (f64::INFINITY, c);
        }
        let ch: f64 = self.ch_p(values, p).expect("validated values");
        (ch / d, c)
    }

    /// Subgradient of `log Ch_p(f) - log D(f)` at `f`, with `c` the optimal
    /// shift for the denominator `D`.
    fn grad_log_quotient(&self, values: &[f64], p: f64, c: f64) -> Vec<f64> {
        let n = self.n_vertices();
        let mut gch = vec![0.0; n];
        let mut ch = 0.0;
        for i in 0..n {
            let mut lip = 0.0f64;
            let mut arg: Option<(usize, f64)> = None;
            for &(j, d, _) in &self.adjacency[i] {
                let q = (values[i] - values[j]).abs() / d;
                if q > lip {
                    lip = q;
                    arg = Some((j, d));
                }
            }
            if lip == 0.0 {
                continue;
            }
            let mu = self.vertex_measures[i];
            ch += mu * lip.powf(p);
            let (j, d) = arg.expect("positive slope has an attaining neighbor");
            let t = mu * p * lip.powf(p - 1.0) * (values[i] - values[j]).signum() / d;
            gch[i] += t;
            gch[j] -= t;
        }
        let mut gd = vec![0.0; n];
        let mut dcost = 0.0;
        for i in 0..n {
            let r = values[i] - c;
            let mu = self.vertex_measures[i];
            dcost += mu * r.abs().powf(p);
            gd[i] = mu * p * r.abs().powf(p - 1.0) * r.signum();
        }
        (0..n)
            .map(|i| {
                let a = if ch > 0.0 { gch[i] / ch } else { 0.0 };
                let b = if dcost > 0.0 { gd[i] / dcost } else { 0.0 };
                a - b
            })
            .collect()
    }

    /// Runs shift-normalized descent on the quotient from one start and
    /// returns the best value and the minimizing function.
    fn descend_quotient(&self, start: &[f64], p: f64) -> (f64, Vec<f64>) {
        let n = self.n_vertices();
        let mut f: Vec<f64> = start.to_vec();
        // Center and scale so the iterate stays well-conditioned.
        let normalize = |f: &mut Vec<f64>| {
            let mean = f.iter().sum::<f64>() / n as f64;
            for v in f.iter_mut() {
                *v -= mean;
            }
            let m = f.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
            if m > 0.0 {
                for v in f.iter_mut() {
                    *v /= m;
                }
            }
        };
        normalize(&mut f);
        let (mut q, mut c) = self.quotient_inner(&f, p);
        if !q.is_finite() {
            return (q, f);
        }
        let mut step = 0.1;
        for _ in 0..300 {
            let g = self.grad_log_quotient(&f, p, c);
            let gmax = g.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
            if gmax < 1e-14 || step < 1e-13 {
                break;
            }
            let mut trial: Vec<f64> =
                f.iter().zip(&g).map(|(&v, &gi)| v - step / gmax * gi).collect();
            normalize(&mut trial);
            let (tq, tc) = self.quotient_inner(&trial, p);
            if tq < q {
                f = trial;
                q = tq;
                c = tc;
                step *= 1.3;
            } else {
                step *= 0.5;
            }
        }
        (q, f)
    }

    fn spectral_candidates(&self) -> Vec<Vec<f64>> {
        let n = self.n_vertices();
        let mut candidates = Vec::new();
        // Deterministic starts: each vertex indicator.
        for v in 0..n {
            let mut f = vec![0.0; n];
            f[v] = 1.0;
            candidates.push(f);
        }
        // Seeded random starts.
        for k in 0..SPECTRAL_RESTARTS {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0000 + k as u64);
            let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            candidates.push(f);
        }
        candidates
    }

    /// Upper estimate of the p-spectral gap
    /// `lambda_p = inf Ch_p(f) / inf_c sum mu |f - c|^p`
    /// from multi-start descent (vertex indicators plus 20 seeded random
    /// starts).  Deterministic for a fixed space and `p`.
    pub fn spectral_gap(&self, p: f64, mode: Parallelism) -> Result<f64> {
        Ok(self.spectral_gap_with_witness(p, mode)?.0)
    }

    fn spectral_gap_with_witness(&self, p: f64, mode: Parallelism) -> Result<(f64, Vec<f64>)> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::domain(format!("spectral gap needs p > 1, got {p}")));
        }
        if self.n_vertices() < 2 {
            return Err(Error::input("spectral gap needs at least two vertices"));
        }
        let candidates = self.spectral_candidates();
        let results = par::map_slice(mode, &candidates, |f| self.descend_quotient(f, p));
        results
            .into_iter()
            .filter(|(q, _)| q.is_finite())
            .min_by(|x, y| x.0.partial_cmp(&y.0).unwrap())
            .ok_or_else(|| Error::input("all spectral candidates degenerated to constants"))
    }

    /// Checks the discrete Cheeger inequality `lambda_p >= h^p / p^p` with
    /// the enumerated `h` and the optimizer's upper estimate of `lambda_p`.
    ///
    /// Since the estimate can only exceed the true gap, `holds = false` is a
    /// genuine counterexample signal and carries the witness function.
    pub fn cheeger_inequality_check(&self, p: f64, mode: Parallelism) -> Result<CheegerInequalityReport> {
        let h = self.cheeger_constant(mode)?.h;
        let (estimate, witness) = self.spectral_gap_with_witness(p, mode)?;
        let bound = h.powf(p) / p.powf(p);
        let holds = estimate >= bound - 1e-9;
        Ok(CheegerInequalityReport {
            h,
            lambda_p_estimate: estimate,
            bound,
            holds,
            witness_function: if holds { None } else { Some(witness) },
        })
    }

    /// Emits `(h, lambda_p estimate, ratio)` with
    /// `ratio = lambda_p / (h + h^p)` for empirical Buser-type analysis.
    /// No assertion is made: the matching upper bound is open in this
    /// generality.
    pub fn buser_data(&self, p: f64, mode: Parallelism) -> Result<BuserData> {
        let h = self.cheeger_constant(mode)?.h;
        let lambda = self.spectral_gap(p, mode)?;
        Ok(BuserData { h, lambda_p_estimate: lambda, ratio: lambda / (h + h.powf(p)) })
    }

    /// Full Cheeger report: constant, witness, and spectral estimates with
    /// inequality verdicts for each requested exponent.
    pub fn cheeger_report(&self, ps: &[f64], mode: Parallelism) -> Result<CheegerReport> {
        let mut report = self.cheeger_constant(mode)?;
        for &p in ps {
            let check = self.cheeger_inequality_check(p, mode)?;
            report.lambda_p.push((p, check.lambda_p_estimate));
            report.inequality_holds.push((p, check.holds));
        }
        Ok(report)
    }
}

/// Result of [`DiscreteMMS::cheeger_constant`] / [`DiscreteMMS::cheeger_report`].
#[derive(Debug, Clone)]
pub struct CheegerReport {
    /// Cheeger constant `min Per(A)/mu(A)` over `2 mu(A) <= mu(X)`.
    pub h: f64,
    /// Sorted vertices of an optimal witness set.
    pub witness_set: Vec<usize>,
    /// `(p, lambda_p upper estimate)` pairs, in request order.
    pub lambda_p: Vec<(f64, f64)>,
    /// `(p, lambda_p >= h^p/p^p - tol)` verdicts, in request order.
    pub inequality_holds: Vec<(f64, bool)>,
}

/// Result of [`DiscreteMMS::cheeger_inequality_check`].
#[derive(Debug, Clone)]
pub struct CheegerInequalityReport {
    /// Enumerated Cheeger constant.
    pub h: f64,
    /// Optimizer upper estimate of the p-spectral gap.
    pub lambda_p_estimate: f64,
    /// Lower bound `h^p / p^p` demanded by the inequality.
    pub bound: f64,
    /// Whether `lambda_p_estimate >= bound - 1e-9`.
    pub holds: bool,
    /// Minimizing function when the check fails (counterexample witness).
    pub witness_function: Option<Vec<f64>>,
}

/// Empirical Buser triple from [`DiscreteMMS::buser_data`].
#[derive(Debug, Clone, Copy)]
pub struct BuserData {
    /// Cheeger constant.
    pub h: f64,
    /// Spectral-gap upper estimate.
    pub lambda_p_estimate: f64,
    /// `lambda_p / (h + h^p)`.
    pub ratio: f64,
}

/// Unit path graph `P_n` with unit measures, lengths, and weights.
pub fn unit_path(n: usize) -> DiscreteMMS {
    let edges = (0..n.saturating_sub(1)).map(|i| (i, i + 1, 1.0, 1.0)).collect();
    DiscreteMMS::new(vec![1.0; n], edges, format!("P_{n}")).expect("valid path")
}

/// Unit cycle graph `C_n` with unit measures, lengths, and weights.
pub fn unit_cycle(n: usize) -> DiscreteMMS {
    let mut edges: Vec<(usize, usize, f64, f64)> =
        (0..n - 1).map(|i| (i, i + 1, 1.0, 1.0)).collect();
    edges.push((n - 1, 0, 1.0, 1.0));
    DiscreteMMS::new(vec![1.0; n], edges, format!("C_{n}")).expect("valid cycle")
}
