//! Decomposition of the input domain into concentric rings around an anchor.
//!
//! Ring `t` (1-based) covers distances `[(t−1)δ, tδ)` from the anchor, so
//! the anchor itself lies in ring 1 and indices keep growing past the
//! configured total — test points arbitrarily far out still get a valid
//! ring, which the recurrence can reach by rolling further.

use crate::error::{Error, Result};
use crate::numkit::Matrix;
use serde::{Deserialize, Serialize};

/// How the anchor point is chosen from the training inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnchorPolicy {
    /// Coordinate-wise mean of the training inputs.
    Mean,
    /// Coordinate-wise minimum of the training inputs.
    Min,
    /// A fixed point supplied by the caller.
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceMetric {
    Euclidean,
    Manhattan,
}

impl DistanceMetric {
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        match self {
            DistanceMetric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            DistanceMetric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        }
    }
}

/// A concrete ring decomposition of a dataset.
///
/// Only the geometry (anchor, metric, δ, T, T_tr) is serialized into
/// checkpoints; per-point assignments are recomputed from it on demand.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RingPartition {
    pub anchor: Vec<f64>,
    pub metric: DistanceMetric,
    pub delta: f64,
    pub t_total: usize,
    pub t_train: usize,
    /// 1-based ring index per point, parallel to the partitioned inputs.
    #[serde(skip)]
    pub assignments: Vec<usize>,
    /// Point indices per ring, `rings[t - 1]` for ring `t`.
    #[serde(skip)]
    pub rings: Vec<Vec<usize>>,
}

/// Resolve an anchor policy against the training inputs.
pub fn resolve_anchor(policy: &AnchorPolicy, train_inputs: &Matrix) -> Result<Vec<f64>> {
    let (n, d) = (train_inputs.rows(), train_inputs.cols());
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    match policy {
        AnchorPolicy::Mean => {
            let mut out = vec![0.0; d];
            for i in 0..n {
                for (o, &v) in out.iter_mut().zip(train_inputs.row(i)) {
                    *o += v;
                }
            }
            for o in &mut out {
                *o /= n as f64;
            }
            Ok(out)
        }
        AnchorPolicy::Min => {
            let mut out = train_inputs.row(0).to_vec();
            for i in 1..n {
                for (o, &v) in out.iter_mut().zip(train_inputs.row(i)) {
                    *o = o.min(v);
                }
            }
            Ok(out)
        }
        AnchorPolicy::Explicit(point) => {
            if point.len() != d {
                return Err(Error::ShapeMismatch {
                    context: "explicit anchor",
                    expected: d,
                    actual: point.len(),
                });
            }
            Ok(point.clone())
        }
    }
}

/// Ring width δ such that every training point lands in `[1, t_train]`
/// and the farthest point lands exactly in ring `t_train`.
///
/// δ = d_max · (1 + 1e−9) / t_train; the guard factor keeps the farthest
/// point strictly inside its ring instead of on the boundary.
pub fn derive_delta(
    train_inputs: &Matrix,
    anchor: &[f64],
    metric: DistanceMetric,
    t_train: usize,
) -> Result<f64> {
    if train_inputs.rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    debug_assert!(t_train >= 1);
    let d_max = (0..train_inputs.rows())
        .map(|i| metric.distance(anchor, train_inputs.row(i)))
        .fold(0.0_f64, f64::max);
    if d_max == 0.0 {
        return Err(Error::DegenerateGeometry);
    }
    Ok(d_max * (1.0 + 1e-9) / t_train as f64)
}

/// 1-based ring index of a point at the given distance from the anchor.
/// Unbounded above: distances past the last training ring map to larger
/// indices rather than clamping.
pub fn assign_ring(distance: f64, delta: f64) -> usize {
    debug_assert!(distance >= 0.0 && delta > 0.0);
    (distance / delta).floor() as usize + 1
}

/// Partition a training input set into rings `1..=t_total`.
///
/// Rings may be empty; `t_train` is recorded as the largest non-empty
/// ring. A point falling beyond `t_total` is an error here (training
/// geometry must cover its data) — test-time assignment goes through
/// [`assign_ring`] and never errors.
pub fn partition_dataset(
    inputs: &Matrix,
    anchor: &[f64],
    metric: DistanceMetric,
    delta: f64,
    t_total: usize,
) -> Result<RingPartition> {
    debug_assert!(delta > 0.0);
    let n = inputs.rows();
    let mut assignments = Vec::with_capacity(n);
    let mut rings = vec![Vec::new(); t_total];
    for i in 0..n {
        let t = assign_ring(metric.distance(anchor, inputs.row(i)), delta);
        if t > t_total {
            return Err(Error::RingOutOfRange {
                point: i,
                ring: t,
                t_total,
            });
        }
        assignments.push(t);
        rings[t - 1].push(i);
    }
    let t_train = rings
        .iter()
        .rposition(|members| !members.is_empty())
        .map_or(t_total, |idx| idx + 1);
    Ok(RingPartition {
        anchor: anchor.to_vec(),
        metric,
        delta,
        t_total,
        t_train,
        assignments,
        rings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column(values: &[f64]) -> Matrix {
        Matrix::from_flat(values.len(), 1, values.to_vec())
    }

    #[test]
    fn anchor_policies() {
        let sym = column(&[-1.0, 0.0, 1.0]);
        assert_eq!(resolve_anchor(&AnchorPolicy::Mean, &sym).unwrap(), vec![0.0]);

        let pts = Matrix::from_rows(&[&[2.0, 5.0], &[3.0, 1.0]]);
        assert_eq!(resolve_anchor(&AnchorPolicy::Min, &pts).unwrap(), vec![2.0, 1.0]);

        let explicit = AnchorPolicy::Explicit(vec![0.5]);
        assert_eq!(resolve_anchor(&explicit, &sym).unwrap(), vec![0.5]);

        assert!(matches!(
            resolve_anchor(&AnchorPolicy::Mean, &Matrix::zeros(0, 1)),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn delta_covers_farthest_point() {
        let xs = column(&[0.0, 1.0, 2.0, 3.0]);
        let delta = derive_delta(&xs, &[0.0], DistanceMetric::Euclidean, 3).unwrap();
        assert!((delta - 1.0).abs() < 1e-8);
        assert_eq!(assign_ring(3.0, delta), 3);

        let single = column(&[5.0]);
        let d1 = derive_delta(&single, &[0.0], DistanceMetric::Euclidean, 1).unwrap();
        assert!((d1 - 5.0).abs() < 1e-6);

        let degenerate = column(&[2.0, 2.0]);
        assert!(matches!(
            derive_delta(&degenerate, &[2.0], DistanceMetric::Euclidean, 3),
            Err(Error::DegenerateGeometry)
        ));
    }

    #[test]
    fn ring_indexing_is_one_based_and_unbounded() {
        assert_eq!(assign_ring(0.0, 0.1), 1);
        assert_eq!(assign_ring(0.25, 0.1), 3);
        assert_eq!(assign_ring(10.0, 0.1), 101);
    }

    #[test]
    fn partition_with_empty_rings() {
        let xs = column(&[0.05, 0.15, 0.25]);
        let p = partition_dataset(&xs, &[0.0], DistanceMetric::Euclidean, 0.1, 5).unwrap();
        assert_eq!(p.assignments, vec![1, 2, 3]);
        assert_eq!(p.rings, vec![vec![0], vec![1], vec![2], vec![], vec![]]);
        assert_eq!(p.t_train, 3);

        let gap = column(&[0.05, 0.25]);
        let p = partition_dataset(&gap, &[0.0], DistanceMetric::Euclidean, 0.1, 3).unwrap();
        assert!(p.rings[1].is_empty());
        assert_eq!(p.t_train, 3);

        let origin = column(&[0.0]);
        let p = partition_dataset(&origin, &[0.0], DistanceMetric::Euclidean, 1.0, 1).unwrap();
        assert_eq!(p.rings[0], vec![0]);
    }

    #[test]
    fn out_of_range_training_point_errors() {
        let xs = column(&[0.05, 0.95]);
        let err = partition_dataset(&xs, &[0.0], DistanceMetric::Euclidean, 0.1, 5);
        assert!(matches!(
            err,
            Err(Error::RingOutOfRange { point: 1, ring: 10, t_total: 5 })
        ));
    }

    #[test]
    fn derived_delta_recovers_requested_t_train() {
        let mut rng = crate::numkit::Rng::new(3);
        for _ in 0..50 {
            let n = 5 + rng.next_index(40);
            let xs = column(&(0..n).map(|_| rng.next_normal() * 3.0).collect::<Vec<_>>());
            let anchor = resolve_anchor(&AnchorPolicy::Mean, &xs).unwrap();
            let t_req = 1 + rng.next_index(8);
            let delta = match derive_delta(&xs, &anchor, DistanceMetric::Euclidean, t_req) {
                Ok(d) => d,
                Err(_) => continue, // degenerate draw
            };
            let p = partition_dataset(&xs, &anchor, DistanceMetric::Euclidean, delta, t_req).unwrap();
            assert_eq!(p.t_train, t_req);
        }
    }
}
