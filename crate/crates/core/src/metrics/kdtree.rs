//! Static 3D kd-tree answering exact nearest-neighbour distance queries.

const LEAF_SIZE: usize = 8;

#[inline]
pub(crate) fn squared_distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dz = a[0] - b[0];
    let dy = a[1] - b[1];
    let dx = a[2] - b[2];
    dz * dz + dy * dy + dx * dx
}

enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

pub struct KdTree {
    points: Vec<[f64; 3]>,
    nodes: Vec<Node>,
}

impl KdTree {
    /// Builds the tree. Panics on an empty point set.
    pub fn new(points: &[[f64; 3]]) -> Self {
        assert!(!points.is_empty(), "kd-tree needs at least one point");
        let mut tree = Self {
            points: points.to_vec(),
            nodes: Vec::with_capacity(2 * points.len() / LEAF_SIZE + 1),
        };
        let n = tree.points.len();
        tree.build(0, n);
        tree
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let slice = &mut self.points[start..end];
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in slice.iter() {
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        let axis = (0..3)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
            .unwrap();
        let mid = slice.len() / 2;
        slice.select_nth_unstable_by(mid, |a, b| a[axis].total_cmp(&b[axis]));
        let value = slice[mid][axis];
        // placeholder, patched once both children exist
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build(start, start + mid);
        let right = self.build(start + mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    /// Squared distance from `q` to its nearest point in the tree.
    pub fn nearest_squared(&self, q: &[f64; 3]) -> f64 {
        let mut best = f64::INFINITY;
        self.search(0, q, &mut best);
        best
    }

    fn search(&self, node: usize, q: &[f64; 3], best: &mut f64) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for p in &self.points[start..end] {
                    let d = squared_distance(q, p);
                    if d < *best {
                        *best = d;
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                // left holds coordinates <= value, right holds >= value
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, best);
                if diff * diff <= *best {
                    self.search(far, q, best);
                }
            }
        }
    }
}
