use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::hypercube::VertexId;

/// A vertex sequence whose consecutive entries are meant to be adjacent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Path {
    pub vertices: Vec<VertexId>,
}

impl Path {
    pub fn new(vertices: Vec<VertexId>) -> Path {
        Path { vertices }
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn start(&self) -> VertexId {
        self.vertices[0]
    }

    pub fn end(&self) -> VertexId {
        *self.vertices.last().unwrap()
    }

    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }
}

/// A closed walk given by its cyclic vertex sequence; the closing edge from
/// the last vertex back to the first is implicit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cycle {
    pub vertices: Vec<VertexId>,
}

impl Cycle {
    pub fn new(vertices: Vec<VertexId>) -> Cycle {
        Cycle { vertices }
    }

    /// Number of edges, equal to the number of vertices.
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Rotated to start at the smallest vertex and oriented towards the
    /// smaller of its two cycle neighbours.
    pub fn canonical(&self) -> Cycle {
        let n = self.vertices.len();
        if n == 0 {
            return self.clone();
        }
        let start = (0..n).min_by_key(|&i| self.vertices[i]).unwrap();
        let next = self.vertices[(start + 1) % n];
        let prev = self.vertices[(start + n - 1) % n];
        let forward = next <= prev;
        let vertices = (0..n)
            .map(|k| {
                let i = if forward { (start + k) % n } else { (start + n - k) % n };
                self.vertices[i]
            })
            .collect();
        Cycle { vertices }
    }

    /// First 16 hex digits of SHA-256 over the canonical vertex sequence
    /// (little-endian `u64` words).
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for v in &self.canonical().vertices {
            h.update(v.0.to_le_bytes());
        }
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_ignores_rotation_and_direction() {
        let c = Cycle::new([3u64, 1, 0, 2].map(VertexId).to_vec());
        let r = Cycle::new([0u64, 2, 3, 1].map(VertexId).to_vec());
        let rev = Cycle::new([1u64, 3, 2, 0].map(VertexId).to_vec());
        assert_eq!(c.canonical().vertices, [0u64, 1, 3, 2].map(VertexId).to_vec());
        assert_eq!(c.digest(), r.digest());
        assert_eq!(c.digest(), rev.digest());
        assert_eq!(c.digest().len(), 16);
    }

    #[test]
    fn lengths_count_edges() {
        let p = Path::new([0u64, 1, 3].map(VertexId).to_vec());
        assert_eq!(p.len(), 2);
        assert_eq!(p.edges().count(), 2);
        let c = Cycle::new([0u64, 1, 3, 2].map(VertexId).to_vec());
        assert_eq!(c.len(), 4);
        assert_eq!(c.edges().last(), Some((VertexId(2), VertexId(0))));
    }
}
