//! Static kd-tree over unit vectors for cap queries.

use crate::geometry::Vec3;

const LEAF_SIZE: usize = 16;

#[derive(Clone, Debug)]
struct Node {
    lo: Vec3,
    hi: Vec3,
    start: usize,
    end: usize,
    /// Child indices; `None` for leaves.
    children: Option<(usize, usize)>,
    mass: f64,
}

/// Points are stored in tree order; `order[k]` is the caller's index of the
/// `k`-th stored point.
#[derive(Clone, Debug, Default)]
pub(crate) struct CapIndex {
    nodes: Vec<Node>,
    points: Vec<Vec3>,
    weights: Vec<f64>,
    order: Vec<usize>,
}

impl CapIndex {
    pub(crate) fn build(points: &[Vec3], weights: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..points.len()).collect();
        let mut nodes = Vec::new();
        if !points.is_empty() {
            split(points, weights, &mut order, 0, points.len(), &mut nodes);
        }
        Self {
            points: order.iter().map(|&i| points[i]).collect(),
            weights: order.iter().map(|&i| weights[i]).collect(),
            nodes,
            order,
        }
    }

    /// Total weight of points `u` with `|u - c| <= chord`.
    pub(crate) fn mass_within(&self, c: &Vec3, chord: f64) -> f64 {
        if self.nodes.is_empty() {
            return 0.0;
        }
        let r2 = chord * chord;
        let mut total = 0.0;
        let mut stack = vec![0usize];
        while let Some(k) = stack.pop() {
            let node = &self.nodes[k];
            if min_dist2(c, node) > r2 {
                continue;
            }
            if max_dist2(c, node) <= r2 {
                total += node.mass;
                continue;
            }
            match node.children {
                Some((l, r)) => {
                    stack.push(r);
                    stack.push(l);
                }
                None => {
                    for i in node.start..node.end {
                        if (self.points[i] - c).norm_squared() <= r2 {
                            total += self.weights[i];
                        }
                    }
                }
            }
        }
        total
    }

    /// Caller indices of the points with `|u - c| <= chord`, ascending.
    pub(crate) fn indices_within(&self, c: &Vec3, chord: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if self.nodes.is_empty() {
            return out;
        }
        let r2 = chord * chord;
        let mut stack = vec![0usize];
        while let Some(k) = stack.pop() {
            let node = &self.nodes[k];
            if min_dist2(c, node) > r2 {
                continue;
            }
            let inside = max_dist2(c, node) <= r2;
            match node.children {
                Some((l, r)) if !inside => {
                    stack.push(r);
                    stack.push(l);
                }
                _ => {
                    for i in node.start..node.end {
                        if inside || (self.points[i] - c).norm_squared() <= r2 {
                            out.push(self.order[i]);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

fn split(
    points: &[Vec3],
    weights: &[f64],
    order: &mut [usize],
    start: usize,
    end: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let slice = &mut order[start..end];
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    let mut mass = 0.0;
    for &i in slice.iter() {
        lo = lo.inf(&points[i]);
        hi = hi.sup(&points[i]);
        mass += weights[i];
    }
    let id = nodes.len();
    nodes.push(Node {
        lo,
        hi,
        start,
        end,
        children: None,
        mass,
    });
    if end - start > LEAF_SIZE {
        let axis = (hi - lo).imax();
        let mid = (end - start) / 2;
        slice.select_nth_unstable_by(mid, |&a, &b| {
            points[a][axis].total_cmp(&points[b][axis]).then(a.cmp(&b))
        });
        let l = split(points, weights, order, start, start + mid, nodes);
        let r = split(points, weights, order, start + mid, end, nodes);
        nodes[id].children = Some((l, r));
    }
    id
}

fn min_dist2(c: &Vec3, n: &Node) -> f64 {
    (0..3)
        .map(|k| {
            let d = (n.lo[k] - c[k]).max(c[k] - n.hi[k]).max(0.0);
            d * d
        })
        .sum()
}

fn max_dist2(c: &Vec3, n: &Node) -> f64 {
    (0..3)
        .map(|k| {
            let d = (c[k] - n.lo[k]).abs().max((n.hi[k] - c[k]).abs());
            d * d
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    #[test]
    fn cap_queries_match_brute_force() {
        let mut rng = SplitMix64::new(7);
        let pts: Vec<Vec3> = (0..2000)
            .map(|_| Vec3::new(rng.normal(), rng.normal(), rng.normal()).normalize())
            .collect();
        let w: Vec<f64> = (0..pts.len()).map(|_| rng.next_f64()).collect();
        let idx = CapIndex::build(&pts, &w);
        for _ in 0..50 {
            let c = Vec3::new(rng.normal(), rng.normal(), rng.normal()).normalize();
            let chord = 2.0 * rng.next_f64();
            let brute: Vec<usize> = (0..pts.len())
                .filter(|&i| (pts[i] - c).norm_squared() <= chord * chord)
                .collect();
            let m: f64 = brute.iter().map(|&i| w[i]).sum();
            assert!((idx.mass_within(&c, chord) - m).abs() < 1e-9);
            assert_eq!(idx.indices_within(&c, chord), brute);
        }
    }
}
