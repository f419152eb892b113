//! Joint analysis of two partitions: align common cases, rank their
//! distances, estimate the density of the joint-rank scatter, standardize it
//! and flag cases in unusually dense regions.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::distance::DistanceVector;
use crate::sum::{compensated_sum, dot};
use crate::{Error, Result};

pub const DEFAULT_GRID_SIZE: usize = 100;
pub const MIN_GRID_SIZE: usize = 16;
pub const DEFAULT_THRESHOLD: f64 = 2.0;

/// Default kernel width in rank units: one fiftieth of the case count.
pub fn default_bandwidth(cases: usize) -> f64 {
    cases as f64 / 50.0
}

/// Distances of the cases present in both partitions, sorted by case id.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedDistances {
    pub case_ids: Vec<String>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

pub fn align_common_cases(a: &DistanceVector, b: &DistanceVector) -> Result<AlignedDistances> {
    let lookup: BTreeMap<&str, f64> = b
        .case_ids
        .iter()
        .map(String::as_str)
        .zip(b.distances.iter().copied())
        .collect();
    let mut pairs: Vec<(&str, f64, f64)> = a
        .case_ids
        .iter()
        .zip(&a.distances)
        .filter_map(|(id, &da)| lookup.get(id.as_str()).map(|&db| (id.as_str(), da, db)))
        .collect();
    if pairs.is_empty() {
        return Err(Error::NoCommonCases);
    }
    pairs.sort_by(|x, y| x.0.cmp(y.0));
    pairs.dedup_by(|x, y| x.0 == y.0);
    Ok(AlignedDistances {
        case_ids: pairs.iter().map(|p| p.0.to_owned()).collect(),
        a: pairs.iter().map(|p| p.1).collect(),
        b: pairs.iter().map(|p| p.2).collect(),
    })
}

/// Ascending mid-ranks: the smallest value gets rank 1 and tied values share
/// the mean of the positions they occupy.
pub fn rank_distances(values: &[f64]) -> Result<Vec<f64>> {
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::invalid("cannot rank NaN"));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&x, &y| values[x].total_cmp(&values[y]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        // -0.0 and 0.0 compare equal as distances
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let mid = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = mid;
        }
        start = end;
    }
    Ok(ranks)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankVector {
    pub case_ids: Vec<String>,
    pub ranks: Vec<f64>,
}

impl RankVector {
    pub fn from_distances(case_ids: Vec<String>, distances: &[f64]) -> Result<Self> {
        if case_ids.len() != distances.len() {
            return Err(Error::invalid("case ids and distances differ in length"));
        }
        Ok(Self {
            case_ids,
            ranks: rank_distances(distances)?,
        })
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }
}

/// Ranks both partitions of an aligned set.
pub fn rank_aligned(aligned: &AlignedDistances) -> Result<(RankVector, RankVector)> {
    Ok((
        RankVector::from_distances(aligned.case_ids.clone(), &aligned.a)?,
        RankVector::from_distances(aligned.case_ids.clone(), &aligned.b)?,
    ))
}

/// Kernel density of the joint-rank scatter, per case and on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct JointRankDensity {
    pub case_ids: Vec<String>,
    pub rank_a: Vec<f64>,
    pub rank_b: Vec<f64>,
    pub density: Vec<f64>,
    pub z_score: Vec<f64>,
    /// Row-major `grid_size x grid_size` raw densities; rows step along
    /// partition b, columns along partition a.
    pub grid: Vec<f64>,
    pub grid_size: usize,
    pub bandwidth: f64,
    /// Mean and sample standard deviation of the per-case densities.
    pub density_mean: f64,
    pub density_std: f64,
}

impl JointRankDensity {
    pub fn len(&self) -> usize {
        self.case_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.case_ids.is_empty()
    }

    /// Centers of the grid cells along either axis, spanning
    /// `[0.5, m + 0.5]`.
    pub fn grid_axis(&self) -> Vec<f64> {
        grid_axis(self.len(), self.grid_size)
    }

    /// The grid in standard-deviation units of the per-case densities.
    pub fn grid_z(&self) -> Vec<f64> {
        if is_degenerate(self.density_mean, self.density_std) {
            return vec![0.0; self.grid.len()];
        }
        self.grid
            .iter()
            .map(|g| (g - self.density_mean) / self.density_std)
            .collect()
    }

    /// Elementwise mean over repetitions that share the same cases and grid.
    ///
    /// Experimental aggregation for repeated random partitions: ranks,
    /// densities, z-scores and grids are all averaged; the mean and standard
    /// deviation fields hold the averages of the per-repetition values.
    pub fn average(runs: &[JointRankDensity]) -> Result<JointRankDensity> {
        let first = runs
            .first()
            .ok_or_else(|| Error::invalid("nothing to average"))?;
        if runs
            .iter()
            .any(|r| r.case_ids != first.case_ids || r.grid_size != first.grid_size)
        {
            return Err(Error::invalid(
                "averaged densities must share cases and grid size",
            ));
        }
        let n = runs.len() as f64;
        let mean_of = |get: &dyn Fn(&JointRankDensity) -> &[f64]| -> Vec<f64> {
            (0..get(first).len())
                .map(|i| compensated_sum(runs.iter().map(|r| get(r)[i])) / n)
                .collect()
        };
        Ok(JointRankDensity {
            case_ids: first.case_ids.clone(),
            rank_a: mean_of(&|r| &r.rank_a),
            rank_b: mean_of(&|r| &r.rank_b),
            density: mean_of(&|r| &r.density),
            z_score: mean_of(&|r| &r.z_score),
            grid: mean_of(&|r| &r.grid),
            grid_size: first.grid_size,
            bandwidth: compensated_sum(runs.iter().map(|r| r.bandwidth)) / n,
            density_mean: compensated_sum(runs.iter().map(|r| r.density_mean)) / n,
            density_std: compensated_sum(runs.iter().map(|r| r.density_std)) / n,
        })
    }
}

fn grid_axis(m: usize, g: usize) -> Vec<f64> {
    let step = m as f64 / g as f64;
    (0..g).map(|k| 0.5 + (k as f64 + 0.5) * step).collect()
}

fn is_degenerate(mean: f64, std: f64) -> bool {
    !(std > 1e-12 * mean.abs())
}

/// Mean, sample standard deviation and z-scores. A constant input has no
/// departure from its mean, so every z-score is zero.
pub fn standardize(values: &[f64]) -> (f64, f64, Vec<f64>) {
    let m = values.len();
    if m == 0 {
        return (0.0, 0.0, Vec::new());
    }
    let mean = compensated_sum(values.iter().copied()) / m as f64;
    let std = if m > 1 {
        (compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (m - 1) as f64).sqrt()
    } else {
        0.0
    };
    let z = if is_degenerate(mean, std) {
        vec![0.0; m]
    } else {
        values.iter().map(|v| (v - mean) / std).collect()
    };
    (mean, std, z)
}

/// Isotropic Gaussian kernel density over the joint-rank scatter.
///
/// Per case, `ρ_i = (1/m) Σ_j K_h(a_i - a_j, b_i - b_j)` with
/// `K_h(x, y) = exp(-(x² + y²) / 2h²) / (2π h²)` and no boundary correction.
/// Pairs further apart than the radius at which the whole remaining tail
/// falls below `1e-15` of a case's own kernel contribution are skipped, so
/// the result equals the full double sum to within that relative bound.
pub fn joint_density(
    a: &RankVector,
    b: &RankVector,
    grid_size: usize,
    bandwidth: f64,
) -> Result<JointRankDensity> {
    if a.case_ids != b.case_ids {
        return Err(Error::invalid("rank vectors must cover the same cases in the same order"));
    }
    let m = a.len();
    if m < 2 {
        return Err(Error::invalid(format!(
            "joint density needs at least 2 cases, got {m}"
        )));
    }
    if grid_size < MIN_GRID_SIZE {
        return Err(Error::invalid(format!(
            "grid size {grid_size} below minimum {MIN_GRID_SIZE}"
        )));
    }
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::invalid(format!("bandwidth {bandwidth} must be positive")));
    }
    if a.ranks.iter().chain(&b.ranks).any(|r| !r.is_finite()) {
        return Err(Error::invalid("ranks must be finite"));
    }

    let density = case_densities(&a.ranks, &b.ranks, bandwidth);
    let grid = grid_densities(&a.ranks, &b.ranks, bandwidth, grid_size);
    let (density_mean, density_std, z_score) = standardize(&density);
    Ok(JointRankDensity {
        case_ids: a.case_ids.clone(),
        rank_a: a.ranks.clone(),
        rank_b: b.ranks.clone(),
        density,
        z_score,
        grid,
        grid_size,
        bandwidth,
        density_mean,
        density_std,
    })
}

/// Points with half-integer coordinates (every mid-rank is one) are doubled
/// to integers so per-axis kernel factors come from a lookup table.
fn doubled_lattice(values: &[f64]) -> Option<Vec<usize>> {
    values
        .iter()
        .map(|&v| {
            let d = 2.0 * v;
            (d >= 0.0 && d.fract() == 0.0 && d < u32::MAX as f64).then_some(d as usize)
        })
        .collect()
}

fn case_densities(a: &[f64], b: &[f64], h: f64) -> Vec<f64> {
    let m = a.len();
    let inv_two_h2 = 1.0 / (2.0 * h * h);
    let norm = 1.0 / (m as f64 * 2.0 * PI * h * h);
    let radius = h * (2.0 * (m as f64 * 1e15).ln()).sqrt();

    let cells = CellIndex::new(a, b, radius);
    let sums = match (doubled_lattice(a), doubled_lattice(b)) {
        (Some(ia), Some(ib)) => {
            let span = ia.iter().chain(&ib).copied().max().unwrap_or(0)
                - ia.iter().chain(&ib).copied().min().unwrap_or(0);
            let table: Vec<f64> = (0..=span)
                .map(|t| {
                    let d = t as f64 / 2.0;
                    (-d * d * inv_two_h2).exp()
                })
                .collect();
            cells.accumulate(|i, j| table[ia[i].abs_diff(ia[j])] * table[ib[i].abs_diff(ib[j])])
        }
        _ => cells.accumulate(|i, j| {
            let dx = a[i] - a[j];
            let dy = b[i] - b[j];
            (-(dx * dx + dy * dy) * inv_two_h2).exp()
        }),
    };
    sums.into_iter().map(|s| s * norm).collect()
}

/// Uniform grid of square cells bucketing the points, so kernel sums only
/// visit cells within the cutoff radius.
struct CellIndex {
    nx: usize,
    ny: usize,
    width: f64,
    /// Point indices grouped by cell, cell-major.
    order: Vec<usize>,
    /// `order[start[c]..start[c + 1]]` are the points of cell `c`.
    start: Vec<usize>,
    radius: f64,
}

impl CellIndex {
    const MAX_CELLS_PER_AXIS: usize = 256;

    fn new(a: &[f64], b: &[f64], radius: f64) -> Self {
        let (ax0, ax1) = min_max(a);
        let (by0, by1) = min_max(b);
        let extent = (ax1 - ax0).max(by1 - by0).max(f64::MIN_POSITIVE);
        let width = (radius / 4.0).max(extent / Self::MAX_CELLS_PER_AXIS as f64);
        let nx = ((ax1 - ax0) / width) as usize + 1;
        let ny = ((by1 - by0) / width) as usize + 1;
        let cell_of: Vec<usize> = a
            .iter()
            .zip(b)
            .map(|(&x, &y)| {
                let cx = (((x - ax0) / width) as usize).min(nx - 1);
                let cy = (((y - by0) / width) as usize).min(ny - 1);
                cy * nx + cx
            })
            .collect();
        let mut start = vec![0usize; nx * ny + 1];
        for &c in &cell_of {
            start[c + 1] += 1;
        }
        for c in 0..nx * ny {
            start[c + 1] += start[c];
        }
        let mut fill = start.clone();
        let mut order = vec![0usize; a.len()];
        for (i, &c) in cell_of.iter().enumerate() {
            order[fill[c]] = i;
            fill[c] += 1;
        }
        Self {
            nx,
            ny,
            width,
            order,
            start,
            radius,
        }
    }

    fn accumulate(&self, kernel: impl Fn(usize, usize) -> f64) -> Vec<f64> {
        let mut sums = vec![0.0; self.order.len()];
        let reach = (self.radius / self.width).ceil() as isize + 1;
        let r2 = self.radius * self.radius;
        let mut neighbours = Vec::new();
        for cy in 0..self.ny {
            for cx in 0..self.nx {
                let targets = self.points(cy * self.nx + cx);
                if targets.is_empty() {
                    continue;
                }
                neighbours.clear();
                for dy in -reach..=reach {
                    for dx in -reach..=reach {
                        let (ny, nx) = (cy as isize + dy, cx as isize + dx);
                        if ny < 0 || nx < 0 || ny >= self.ny as isize || nx >= self.nx as isize {
                            continue;
                        }
                        let gx = (dx.unsigned_abs().saturating_sub(1)) as f64 * self.width;
                        let gy = (dy.unsigned_abs().saturating_sub(1)) as f64 * self.width;
                        if gx * gx + gy * gy <= r2 {
                            neighbours.push(ny as usize * self.nx + nx as usize);
                        }
                    }
                }
                for &i in targets {
                    let mut s = 0.0;
                    for &c in &neighbours {
                        for &j in self.points(c) {
                            s += kernel(i, j);
                        }
                    }
                    sums[i] = s;
                }
            }
        }
        sums
    }

    fn points(&self, cell: usize) -> &[usize] {
        &self.order[self.start[cell]..self.start[cell + 1]]
    }
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}

/// Density at every grid node, as the product of two per-axis kernel
/// matrices.
fn grid_densities(a: &[f64], b: &[f64], h: f64, g: usize) -> Vec<f64> {
    let m = a.len();
    let inv_two_h2 = 1.0 / (2.0 * h * h);
    let norm = 1.0 / (m as f64 * 2.0 * PI * h * h);
    let axis = grid_axis(m, g);
    let factors = |coords: &[f64]| -> Vec<f64> {
        let mut out = Vec::with_capacity(g * m);
        for &x in &axis {
            out.extend(coords.iter().map(|&c| {
                let d = x - c;
                (-d * d * inv_two_h2).exp()
            }));
        }
        out
    };
    let ka = factors(a);
    let kb = factors(b);
    let mut grid = Vec::with_capacity(g * g);
    for row_b in kb.chunks_exact(m) {
        for row_a in ka.chunks_exact(m) {
            grid.push(dot(row_b, row_a) * norm);
        }
    }
    grid
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectOptions {
    /// Standard-deviation units.
    pub threshold: f64,
    /// Minimum rank fraction in `[0, 1)` required on both axes.
    pub quadrant_filter: Option<f64>,
    /// Flag `|z| > threshold` instead of `z > threshold`.
    pub two_sided: bool,
}

impl Default for DetectOptions {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            quadrant_filter: None,
            two_sided: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlaggedCase {
    pub case_id: String,
    pub rank_a: f64,
    pub rank_b: f64,
    pub z: f64,
}

/// Settings echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportParameters {
    pub threshold: f64,
    pub quadrant_filter: Option<f64>,
    pub two_sided: bool,
    pub bandwidth: f64,
    pub grid_size: usize,
    pub k_a: Option<usize>,
    pub k_b: Option<usize>,
    pub seed: Option<u64>,
    pub partition_mode: Option<String>,
    pub repetitions: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCounts {
    pub total_cases: usize,
    pub flagged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyReport {
    pub parameters: ReportParameters,
    pub counts: ReportCounts,
    pub flagged: Vec<FlaggedCase>,
}

/// Flags cases whose standardized density exceeds the threshold, highest
/// first (ties broken by case id).
pub fn detect_anomalies(jrd: &JointRankDensity, options: &DetectOptions) -> Result<AnomalyReport> {
    if !options.threshold.is_finite() {
        return Err(Error::invalid(format!(
            "threshold {} is not finite",
            options.threshold
        )));
    }
    if let Some(q) = options.quadrant_filter {
        if !(0.0..1.0).contains(&q) {
            return Err(Error::invalid(format!("quadrant filter {q} outside [0, 1)")));
        }
    }
    let m = jrd.len() as f64;
    let mut flagged: Vec<FlaggedCase> = (0..jrd.len())
        .filter(|&i| {
            let z = jrd.z_score[i];
            let extreme = if options.two_sided {
                z.abs() > options.threshold
            } else {
                z > options.threshold
            };
            let in_quadrant = options
                .quadrant_filter
                .is_none_or(|q| jrd.rank_a[i] / m >= q && jrd.rank_b[i] / m >= q);
            extreme && in_quadrant
        })
        .map(|i| FlaggedCase {
            case_id: jrd.case_ids[i].clone(),
            rank_a: jrd.rank_a[i],
            rank_b: jrd.rank_b[i],
            z: jrd.z_score[i],
        })
        .collect();
    flagged.sort_by(|x, y| y.z.total_cmp(&x.z).then_with(|| x.case_id.cmp(&y.case_id)));

    Ok(AnomalyReport {
        parameters: ReportParameters {
            threshold: options.threshold,
            quadrant_filter: options.quadrant_filter,
            two_sided: options.two_sided,
            bandwidth: jrd.bandwidth,
            grid_size: jrd.grid_size,
            k_a: None,
            k_b: None,
            seed: None,
            partition_mode: None,
            repetitions: None,
        },
        counts: ReportCounts {
            total_cases: jrd.len(),
            flagged: flagged.len(),
        },
        flagged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dv(ids: &[&str], d: &[f64]) -> DistanceVector {
        DistanceVector::new(ids.iter().map(|s| s.to_string()).collect(), d.to_vec(), 1).unwrap()
    }

    fn ranks(ids: usize, r: &[f64]) -> RankVector {
        RankVector {
            case_ids: (0..ids).map(|i| format!("c{i:03}")).collect(),
            ranks: r.to_vec(),
        }
    }

    #[test]
    fn align_examples() {
        let a = dv(&["x", "y"], &[1.0, 2.0]);
        let b = dv(&["y", "z"], &[3.0, 4.0]);
        let al = align_common_cases(&a, &b).unwrap();
        assert_eq!(al.case_ids, vec!["y"]);
        assert_eq!((al.a[0], al.b[0]), (2.0, 3.0));

        let c = dv(&["y", "x"], &[5.0, 6.0]);
        let al = align_common_cases(&a, &c).unwrap();
        assert_eq!(al.case_ids, vec!["x", "y"]);
        assert_eq!(al.b, vec![6.0, 5.0]);

        let d = dv(&["q"], &[1.0]);
        assert_eq!(align_common_cases(&a, &d), Err(Error::NoCommonCases));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank_distances(&[0.1, 0.5, 0.3]).unwrap(), vec![1.0, 3.0, 2.0]);
        assert_eq!(rank_distances(&[2.0, 2.0]).unwrap(), vec![1.5, 1.5]);
        assert_eq!(
            rank_distances(&[1.0, 3.0, 1.0, 1.0]).unwrap(),
            vec![2.0, 4.0, 2.0, 2.0]
        );
        assert!(rank_distances(&[1.0, f64::NAN]).is_err());
        assert!(rank_distances(&[]).unwrap().is_empty());
    }

    #[test]
    fn single_atom_has_zero_z() {
        let m = 20;
        let r = ranks(m, &vec![10.5; m]);
        let jrd = joint_density(&r, &r, 16, 1.0).unwrap();
        assert!(jrd.z_score.iter().all(|&z| z == 0.0));
        assert!(jrd.grid_z().iter().all(|&z| z == 0.0));
    }

    #[test]
    fn symmetric_clusters_share_z() {
        let mut ra = vec![3.0; 5];
        ra.extend([8.0; 5]);
        let a = ranks(10, &ra);
        let jrd = joint_density(&a, &a, 16, 0.5).unwrap();
        for i in 1..10 {
            assert!((jrd.z_score[i] - jrd.z_score[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn density_rejects_bad_arguments() {
        let a = ranks(3, &[1.0, 2.0, 3.0]);
        assert!(joint_density(&a, &a, 8, 1.0).is_err());
        assert!(joint_density(&a, &a, 16, 0.0).is_err());
        let one = ranks(1, &[1.0]);
        assert!(joint_density(&one, &one, 16, 1.0).is_err());
    }

    #[test]
    fn non_lattice_ranks_use_direct_kernel() {
        let a = ranks(4, &[1.0, 2.0, 3.0, 4.0]);
        let b = ranks(4, &[1.25, 2.0, 3.5, 4.0]);
        let jrd = joint_density(&a, &b, 16, 1.0).unwrap();
        let h: f64 = 1.0;
        let direct: f64 = (0..4)
            .map(|j| {
                let dx = a.ranks[0] - a.ranks[j];
                let dy = b.ranks[0] - b.ranks[j];
                (-(dx * dx + dy * dy) / (2.0 * h * h)).exp()
            })
            .sum::<f64>()
            / (4.0 * 2.0 * PI * h * h);
        assert!((jrd.density[0] - direct).abs() <= 1e-15 * direct);
    }

    fn jrd_with_z(z: &[f64]) -> JointRankDensity {
        let m = z.len();
        JointRankDensity {
            case_ids: (0..m).map(|i| format!("c{i}")).collect(),
            rank_a: (1..=m).map(|r| r as f64).collect(),
            rank_b: (1..=m).map(|r| r as f64).collect(),
            density: vec![1.0; m],
            z_score: z.to_vec(),
            grid: vec![0.0; 256],
            grid_size: 16,
            bandwidth: 1.0,
            density_mean: 1.0,
            density_std: 0.0,
        }
    }

    #[test]
    fn detect_examples() {
        let jrd = jrd_with_z(&[0.0, 3.0, 1.0]);
        let report = detect_anomalies(&jrd, &DetectOptions::default()).unwrap();
        assert_eq!(report.flagged.len(), 1);
        assert_eq!(report.flagged[0].case_id, "c1");
        assert_eq!(report.counts.total_cases, 3);

        let quiet = jrd_with_z(&[0.0, 0.5, 1.0]);
        assert!(detect_anomalies(&quiet, &DetectOptions::default())
            .unwrap()
            .flagged
            .is_empty());
    }

    #[test]
    fn detect_quadrant_and_two_sided() {
        let jrd = jrd_with_z(&[5.0, -4.0, 3.0, 4.0]);
        let opts = DetectOptions {
            quadrant_filter: Some(0.5),
            ..DetectOptions::default()
        };
        let ids: Vec<_> = detect_anomalies(&jrd, &opts)
            .unwrap()
            .flagged
            .into_iter()
            .map(|f| f.case_id)
            .collect();
        assert_eq!(ids, vec!["c3", "c2"]);

        let opts = DetectOptions {
            two_sided: true,
            ..DetectOptions::default()
        };
        assert_eq!(detect_anomalies(&jrd, &opts).unwrap().flagged.len(), 4);

        let bad = DetectOptions {
            threshold: f64::NAN,
            ..DetectOptions::default()
        };
        assert!(detect_anomalies(&jrd, &bad).is_err());
    }

    #[test]
    fn average_of_identical_runs_is_identity() {
        let jrd = jrd_with_z(&[0.0, 3.0, 1.0]);
        let avg = JointRankDensity::average(&[jrd.clone(), jrd.clone()]).unwrap();
        assert_eq!(avg.z_score, jrd.z_score);
        assert!(JointRankDensity::average(&[]).is_err());
    }
}
