//! Cluster-based postprocessing of a model-P point list.
//!
//! A cluster is a prefix of the columns sorted by L1 distance from a center
//! column. Its diameter is the distance from the center to the farthest
//! member; its score is the sum of the point list over its members. A cluster
//! qualifies when its score exceeds `r / (r + 1)`.

mod anchors;

pub use anchors::{analyze_anchor_structure, AnchorReport};

use crate::error::{Error, Result};
use crate::linalg::{pairwise_l1_distances, DenseMatrix};
use crate::models::{solve_model_p, Certificate};
use crate::select::{prepare, top_r_diag, Dedup, SelectOptions, SelectionResult};
use crate::solvers::solve_nnls;

/// Sum of `p` over `s`.
pub fn score(s: &[usize], p: &[f64]) -> Result<f64> {
    s.iter().try_fold(0.0, |acc, &u| match p.get(u) {
        Some(v) => Ok(acc + v),
        None => Err(Error::IndexOutOfRange { index: u, len: p.len() }),
    })
}

/// Score a cluster has to beat.
pub fn qualifying_threshold(r: usize) -> f64 {
    r as f64 / (r as f64 + 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub center: usize,
    /// Members in prefix order; the center comes first.
    pub members: Vec<usize>,
    pub diameter: f64,
    pub score: f64,
}

impl Cluster {
    /// Members in ascending index order.
    pub fn sorted_members(&self) -> Vec<usize> {
        let mut m = self.members.clone();
        m.sort_unstable();
        m
    }
}

/// Pairwise distances with, for every center, the other columns sorted by
/// distance (ties to the lower index). Built once per matrix.
#[derive(Debug, Clone)]
pub struct ClusterSearch {
    dist: DenseMatrix,
    order: Vec<Vec<usize>>,
}

impl ClusterSearch {
    pub fn new(dist: DenseMatrix) -> Result<Self> {
        if !dist.is_square() {
            return Err(Error::Dimension(format!("distance matrix is {}x{}", dist.rows(), dist.cols())));
        }
        let n = dist.cols();
        let order = (0..n)
            .map(|i| {
                let mut rest: Vec<usize> = (0..n).filter(|&u| u != i).collect();
                rest.sort_by(|&a, &b| dist[(i, a)].total_cmp(&dist[(i, b)]).then(a.cmp(&b)));
                rest.insert(0, i);
                rest
            })
            .collect();
        Ok(Self { dist, order })
    }

    pub fn from_matrix(a: &DenseMatrix) -> Self {
        Self::new(pairwise_l1_distances(a)).expect("pairwise distances are square")
    }

    pub fn n(&self) -> usize {
        self.order.len()
    }

    pub fn distances(&self) -> &DenseMatrix {
        &self.dist
    }

    /// The prefix of length `len` around `center`.
    pub fn prefix(&self, center: usize, len: usize, p: &[f64]) -> Cluster {
        let members = self.order[center][..len].to_vec();
        let diameter = self.dist[(center, members[len - 1])];
        let score = members.iter().map(|&u| p[u]).sum();
        Cluster { center, members, diameter, score }
    }

    /// Shortest qualifying prefix around `center`, if any.
    pub fn minimal_prefix(&self, center: usize, p: &[f64], r: usize) -> Option<Cluster> {
        let thr = qualifying_threshold(r);
        let mut acc = 0.0;
        for (k, &u) in self.order[center].iter().enumerate() {
            acc += p[u];
            if acc > thr {
                return Some(self.prefix(center, k + 1, p));
            }
        }
        None
    }

    /// Qualifying cluster of least diameter over all centers; ties go to the
    /// lower center, then the shorter prefix.
    pub fn min_qualifying(&self, p: &[f64], r: usize) -> Result<Cluster> {
        if p.len() != self.n() {
            return Err(Error::Dimension(format!("point list of length {} for {} columns", p.len(), self.n())));
        }
        let mut best: Option<Cluster> = None;
        for i in 0..self.n() {
            if let Some(c) = self.minimal_prefix(i, p, r) {
                // Centers are scanned in ascending order and each has one
                // minimal prefix, so strict improvement keeps the tie rule.
                if best.as_ref().is_none_or(|b| c.diameter < b.diameter) {
                    best = Some(c);
                }
            }
        }
        best.ok_or(Error::NoQualifyingCluster { partial: Vec::new(), wanted: r })
    }
}

/// Minimal-diameter qualifying cluster of `a` under the point list `p`,
/// given the pairwise distance matrix `d` of `a`'s columns.
pub fn min_diam_qualifying_cluster(a: &DenseMatrix, p: &[f64], r: usize, d: &DenseMatrix) -> Result<Cluster> {
    if d.rows() != a.cols() || d.cols() != a.cols() {
        return Err(Error::Dimension(format!("distance matrix {}x{} for {} columns", d.rows(), d.cols(), a.cols())));
    }
    ClusterSearch::new(d.clone())?.min_qualifying(p, r)
}

/// One round of the extraction loop.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub cluster: Cluster,
    pub representative: usize,
}

/// Runs `r` rounds: take the minimal-diameter qualifying cluster, keep its
/// member with the largest current point value (ties to the lower index),
/// then zero the point list on the cluster.
///
/// Fails with [`Error::NoQualifyingCluster`] carrying the representatives
/// found so far when a round has nothing to extract.
pub fn extract_clusters(search: &ClusterSearch, p: &[f64], r: usize) -> Result<Vec<Extraction>> {
    if r == 0 || r > search.n() {
        return Err(Error::BadParameter(format!("r = {r} with {} columns", search.n())));
    }
    // Solver round-off can leave tiny negative diagonal entries.
    let mut current: Vec<f64> = p.iter().map(|v| v.max(0.0)).collect();
    let mut rounds: Vec<Extraction> = Vec::with_capacity(r);
    while rounds.len() < r {
        let cluster = match search.min_qualifying(&current, r) {
            Ok(c) => c,
            Err(Error::NoQualifyingCluster { .. }) => {
                let mut partial: Vec<usize> = rounds.iter().map(|e| e.representative).collect();
                partial.sort_unstable();
                return Err(Error::NoQualifyingCluster { partial, wanted: r });
            }
            Err(e) => return Err(e),
        };
        let representative = cluster
            .members
            .iter()
            .copied()
            .max_by(|&a, &b| current[a].total_cmp(&current[b]).then(b.cmp(&a)))
            .expect("clusters are never empty");
        for &u in &cluster.members {
            current[u] = 0.0;
        }
        rounds.push(Extraction { cluster, representative });
    }
    Ok(rounds)
}

fn representatives(rounds: &[Extraction]) -> Vec<usize> {
    let mut j: Vec<usize> = rounds.iter().map(|e| e.representative).collect();
    j.sort_unstable();
    j
}

/// Cluster postprocessing on a model-P certificate solved over `a`.
pub fn postprocess_certificate(a: &DenseMatrix, r: usize, cert: Certificate) -> Result<SelectionResult> {
    check_certificate(a, &cert)?;
    let search = ClusterSearch::from_matrix(a);
    let j = representatives(&extract_clusters(&search, &cert.p, r)?);
    let w_out = a.select_columns(&j)?;
    Ok(SelectionResult { j, w_out, dedup: Dedup::identity(a), certificate: cert })
}

/// Solves model P once and extracts `r` columns by cluster postprocessing.
pub fn refined_hottopixx_postprocessed(a: &DenseMatrix, r: usize, opts: &SelectOptions) -> Result<SelectionResult> {
    let prepared = prepare(a, opts.normalize)?;
    let cert = solve_model_p(&prepared, r, &opts.model)?;
    let mut res = postprocess_certificate(&prepared, r, cert)?;
    res.w_out = a.select_columns(&res.j)?;
    Ok(res)
}

/// `Σ_i min_{x >= 0} ‖a_i - A(:, J) x‖₂²`.
pub fn residual_error(a: &DenseMatrix, j: &[usize]) -> Result<f64> {
    if j.is_empty() {
        return Err(Error::BadParameter("residual error of an empty selection".into()));
    }
    if let Some(&bad) = j.iter().find(|&&u| u >= a.cols()) {
        return Err(Error::IndexOutOfRange { index: bad, len: a.cols() });
    }
    let b = a.select_columns(j)?;
    (0..a.cols()).try_fold(0.0, |acc, i| Ok(acc + solve_nnls(&b, a.col(i), 1e-12)?.residual_sq))
}

/// Hybrid selection on a model-P certificate over `a`: the top-r diagonal set
/// against the cluster-postprocessing set, whichever has the smaller
/// [`residual_error`] (the top-r set on ties).
pub fn hybrid_from_certificate(a: &DenseMatrix, r: usize, cert: Certificate) -> Result<SelectionResult> {
    check_certificate(a, &cert)?;
    let j1 = top_r_diag(&cert.p, r)?;
    let search = ClusterSearch::from_matrix(a);
    let j2 = representatives(&extract_clusters(&search, &cert.p, r)?);
    let j = if j1 == j2 || residual_error(a, &j1)? <= residual_error(a, &j2)? { j1 } else { j2 };
    let w_out = a.select_columns(&j)?;
    Ok(SelectionResult { j, w_out, dedup: Dedup::identity(a), certificate: cert })
}

pub fn hybrid_postprocessing(a: &DenseMatrix, r: usize, opts: &SelectOptions) -> Result<SelectionResult> {
    let prepared = prepare(a, opts.normalize)?;
    let cert = solve_model_p(&prepared, r, &opts.model)?;
    let mut res = hybrid_from_certificate(&prepared, r, cert)?;
    res.w_out = a.select_columns(&res.j)?;
    Ok(res)
}

fn check_certificate(a: &DenseMatrix, cert: &Certificate) -> Result<()> {
    if cert.p.len() != a.cols() {
        return Err(Error::Dimension(format!("certificate of size {} for {} columns", cert.p.len(), a.cols())));
    }
    Ok(())
}

/// `min_σ max_j ‖w_j - w_out_{σ(j)}‖₁` over column matchings σ, i.e. the
/// induced L1 error after the best reordering of `w_out`.
pub fn matched_column_error(w: &DenseMatrix, w_out: &DenseMatrix) -> Result<f64> {
    if w.shape() != w_out.shape() {
        return Err(Error::Dimension(format!("{:?} against {:?}", w.shape(), w_out.shape())));
    }
    let r = w.cols();
    if r == 0 {
        return Ok(0.0);
    }
    let cost: Vec<Vec<f64>> =
        (0..r).map(|j| (0..r).map(|k| crate::linalg::l1_distance(w.col(j), w_out.col(k))).collect()).collect();
    let mut levels: Vec<f64> = cost.iter().flatten().copied().collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    // Smallest level admitting a perfect matching.
    let (mut lo, mut hi) = (0usize, levels.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_matching(&cost, levels[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(levels[lo])
}

fn perfect_matching(cost: &[Vec<f64>], level: f64) -> bool {
    let r = cost.len();
    let mut owner: Vec<Option<usize>> = vec![None; r];
    fn augment(j: usize, cost: &[Vec<f64>], level: f64, seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for k in 0..cost.len() {
            if cost[j][k] <= level && !seen[k] {
                seen[k] = true;
                if owner[k].is_none_or(|o| augment(o, cost, level, seen, owner)) {
                    owner[k] = Some(j);
                    return true;
                }
            }
        }
        false
    }
    (0..r).all(|j| augment(j, cost, level, &mut vec![false; r], &mut owner))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{gen_h, gen_h_with_duplicates, gen_noise, gen_w_normal, SyntheticInstance};
    use crate::linalg::RngStream;
    use crate::models::{tests::dup_groups_v, Backend, ModelOptions};
    use proptest::prelude::*;

    #[test]
    fn score_examples() {
        assert_eq!(score(&[], &[0.3]).unwrap(), 0.0);
        assert!((score(&[0, 2], &[0.9, 0.5, 0.4, 0.2]).unwrap() - 1.3).abs() < 1e-15);
        assert!(matches!(score(&[4], &[0.1]), Err(Error::IndexOutOfRange { index: 4, len: 1 })));
    }

    #[test]
    fn singleton_qualifies_at_zero_diameter() {
        let a = DenseMatrix::from_rows(&[&[1.0, 1.0, 0.0, 0.2], &[0.0, 0.0, 1.0, 0.8]]).unwrap();
        let d = pairwise_l1_distances(&a);
        let c = min_diam_qualifying_cluster(&a, &[1.0, 1.0, 0.0, 0.0], 1, &d).unwrap();
        assert_eq!(c.members, vec![0]);
        assert_eq!(c.diameter, 0.0);
    }

    #[test]
    fn zero_point_list_has_no_cluster() {
        let a = DenseMatrix::identity(3);
        let d = pairwise_l1_distances(&a);
        assert!(matches!(
            min_diam_qualifying_cluster(&a, &[0.0; 3], 2, &d),
            Err(Error::NoQualifyingCluster { .. })
        ));
    }

    // Every prefix of every center, kept if it qualifies; minimum by
    // (diameter, center, size).
    fn exhaustive(search: &ClusterSearch, p: &[f64], r: usize) -> Option<Cluster> {
        let n = search.n();
        let mut all: Vec<Cluster> = Vec::new();
        for i in 0..n {
            for len in 1..=n {
                let c = search.prefix(i, len, p);
                let diam = c.members.iter().map(|&u| search.distances()[(i, u)]).fold(0.0, f64::max);
                assert_eq!(diam, c.diameter);
                if c.score > qualifying_threshold(r) {
                    all.push(c);
                }
            }
        }
        all.into_iter().min_by(|a, b| {
            a.diameter.total_cmp(&b.diameter).then(a.center.cmp(&b.center)).then(a.members.len().cmp(&b.members.len()))
        })
    }

    #[test]
    fn closest_pair_wins_for_two_thirds() {
        let a = DenseMatrix::from_rows(&[&[0.0, 0.1, 1.0, 3.0], &[0.0, 0.0, 0.0, 0.0]]).unwrap();
        let search = ClusterSearch::from_matrix(&a);
        let p = [0.5; 4];
        let c = search.min_qualifying(&p, 2).unwrap();
        assert_eq!(c.sorted_members(), vec![0, 1]);
        assert_eq!(Some(c), exhaustive(&search, &p, 2));
    }

    proptest! {
        #[test]
        fn minimal_prefix_search_matches_enumeration(
            n in 2usize..10,
            seed in 0u64..10_000,
            r in 1usize..4,
        ) {
            let mut rng = RngStream::new(seed);
            let a = rng.uniform_matrix(3, n);
            let p: Vec<f64> = (0..n).map(|_| if rng.uniform() < 0.3 { 0.0 } else { rng.uniform() }).collect();
            let search = ClusterSearch::from_matrix(&a);
            let fast = search.min_qualifying(&p, r).ok();
            prop_assert_eq!(fast, exhaustive(&search, &p, r));
        }

        #[test]
        fn zeroing_removes_extracted_members(n in 3usize..10, seed in 0u64..10_000) {
            let mut rng = RngStream::new(seed);
            let a = rng.uniform_matrix(3, n);
            let p: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
            let search = ClusterSearch::from_matrix(&a);
            let r = 2;
            let Ok(first) = search.min_qualifying(&p, r) else { return Ok(()) };
            let mut zeroed = p.clone();
            for &u in &first.members {
                zeroed[u] = 0.0;
            }
            // Compare every subset on a sample of random sets.
            for _ in 0..20 {
                let s: Vec<usize> = (0..n).filter(|_| rng.uniform() < 0.5).collect();
                let rest: Vec<usize> = s.iter().copied().filter(|u| !first.members.contains(u)).collect();
                prop_assert!((score(&s, &zeroed).unwrap() - score(&rest, &p).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dup_groups_matrix_takes_one_per_group() {
        for backend in [Backend::Simplex, Backend::FirstOrder] {
            let opts = SelectOptions::with_model(ModelOptions::with_backend(backend));
            let res = refined_hottopixx_postprocessed(&dup_groups_v(), 2, &opts).unwrap();
            assert_eq!(res.j.len(), 2);
            assert!([0, 2, 3].contains(&res.j[0]) && [1, 4].contains(&res.j[1]), "{backend}: {:?}", res.j);
        }
    }

    #[test]
    fn identity_postprocesses_to_everything() {
        let res = refined_hottopixx_postprocessed(&DenseMatrix::identity(3), 3, &SelectOptions::default()).unwrap();
        assert_eq!(res.j, vec![0, 1, 2]);
    }

    #[test]
    fn residual_error_of_all_columns_is_zero() {
        let mut rng = RngStream::new(8);
        let a = rng.uniform_matrix(4, 5);
        assert!(residual_error(&a, &[0, 1, 2, 3, 4]).unwrap() < 1e-20);
    }

    #[test]
    fn residual_error_of_basis_is_zero() {
        let mut rng = RngStream::new(9);
        let w = gen_w_normal(6, 3, &mut rng).unwrap();
        let (h, perm) = gen_h(3, 10, &mut rng).unwrap();
        let inst = SyntheticInstance::assemble(w, h, perm, DenseMatrix::zeros(6, 10), 0.0, 9).unwrap();
        assert!(residual_error(&inst.a, &inst.basis).unwrap() < 1e-10);
    }

    #[test]
    fn residual_error_singleton_closed_form() {
        let mut rng = RngStream::new(10);
        let a = rng.normal_matrix(4, 6);
        for j in 0..6 {
            let aj = a.col(j);
            let nn = crate::linalg::dot(aj, aj);
            let expected: f64 = (0..6)
                .map(|i| {
                    let ai = a.col(i);
                    let coef = crate::linalg::dot(aj, ai).max(0.0) / nn;
                    ai.iter().zip(aj).map(|(x, y)| (x - coef * y).powi(2)).sum::<f64>()
                })
                .sum();
            let got = residual_error(&a, &[j]).unwrap();
            assert!((got - expected).abs() < 1e-10, "{got} vs {expected}");
        }
    }

    #[test]
    fn residual_error_rejects_bad_sets() {
        let a = DenseMatrix::identity(2);
        assert!(residual_error(&a, &[]).is_err());
        assert!(matches!(residual_error(&a, &[2]), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn hybrid_covers_every_group_with_duplicates() {
        let mut rng = RngStream::new(12);
        let w = gen_w_normal(5, 3, &mut rng).unwrap();
        let (h, perm) = gen_h_with_duplicates(3, 10, 3, &mut rng).unwrap();
        let inst = SyntheticInstance::assemble(w, h, perm, DenseMatrix::zeros(5, 10), 0.0, 12).unwrap();
        let opts = SelectOptions { normalize: false, ..SelectOptions::default() };
        let res = hybrid_postprocessing(&inst.a, 3, &opts).unwrap();
        assert!(residual_error(&inst.a, &res.j).unwrap() < 1e-10);
        // Block index b < 3 is basis column b; b - 3 < 3 is a copy of it.
        let groups: Vec<usize> = res.j.iter().map(|&u| inst.permutation[u] % 3).collect();
        assert!(res.j.iter().all(|&u| inst.permutation[u] < 6));
        let mut g = groups.clone();
        g.sort_unstable();
        g.dedup();
        assert_eq!(g.len(), 3, "{:?}", res.j);
    }

    #[test]
    fn hybrid_on_noiseless_distinct_basis() {
        let mut rng = RngStream::new(13);
        let w = gen_w_normal(5, 3, &mut rng).unwrap();
        let (h, perm) = gen_h(3, 9, &mut rng).unwrap();
        let inst = SyntheticInstance::assemble(w, h, perm, DenseMatrix::zeros(5, 9), 0.0, 13).unwrap();
        let res = hybrid_postprocessing(&inst.a, 3, &SelectOptions::default()).unwrap();
        assert_eq!(res.j, inst.basis);
    }

    #[test]
    fn matched_error_ignores_column_order() {
        let w = DenseMatrix::from_rows(&[&[1.0, 0.0, 0.5], &[0.0, 1.0, 0.5]]).unwrap();
        let shuffled = w.select_columns(&[2, 0, 1]).unwrap();
        assert_eq!(matched_column_error(&w, &shuffled).unwrap(), 0.0);
        let mut rng = RngStream::new(14);
        let noisy = shuffled.add(&gen_noise(2, 3, 0.01, &mut rng).unwrap()).unwrap();
        assert!((matched_column_error(&w, &noisy).unwrap() - 0.01).abs() < 1e-12);
    }
}
