//! Exact combinatorial model of the hypercube `Q^d`.
//!
//! Vertices are bit vectors packed into a `u64`. Coordinate `i` of the
//! mathematical vector (numbered `1..=d`) is stored in bit `i - 1`, so in code
//! every coordinate is a 0-based bit position. The "first" coordinates of a
//! construction are the low bits and the "last" ones are the high bits.
//! Textual forms print coordinate 1 first: `VertexId(0b001)` in `Q^3` renders
//! as `"100"`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported dimension. Local adjacency inside a subcube is stored
/// as a `u32` bit mask, one bit per free coordinate.
pub const MAX_DIM: usize = 32;

#[inline]
pub(crate) fn full_mask(d: usize) -> u64 {
    if d >= 64 {
        u64::MAX
    } else {
        (1u64 << d) - 1
    }
}

pub fn check_dim(d: usize) -> Result<()> {
    if d > MAX_DIM {
        Err(Error::Dimension(d))
    } else {
        Ok(())
    }
}

#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u64);

impl VertexId {
    #[inline]
    pub fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn bit(self, coord: usize) -> bool {
        (self.0 >> coord) & 1 == 1
    }

    #[inline]
    pub fn flip(self, coord: usize) -> VertexId {
        VertexId(self.0 ^ (1u64 << coord))
    }

    #[inline]
    pub fn weight(self) -> u32 {
        self.0.count_ones()
    }

    #[inline]
    pub fn distance(self, other: VertexId) -> u32 {
        (self.0 ^ other.0).count_ones()
    }

    #[inline]
    pub fn is_adjacent(self, other: VertexId) -> bool {
        self.distance(other) == 1
    }

    /// The coordinate in which two adjacent vertices differ.
    #[inline]
    pub fn differing_coord(self, other: VertexId) -> Option<usize> {
        let x = self.0 ^ other.0;
        if x.count_ones() == 1 {
            Some(x.trailing_zeros() as usize)
        } else {
            None
        }
    }

    pub fn fits(self, d: usize) -> bool {
        self.0 & !full_mask(d) == 0
    }

    /// Renders the first `d` coordinates, coordinate 1 leftmost.
    pub fn display(self, d: usize) -> CoordString {
        CoordString { v: self, d }
    }

    /// Parses a coordinate string such as `"0110"`; returns the vertex and its
    /// dimension.
    pub fn parse(s: &str) -> Result<(VertexId, usize)> {
        let s = s.trim();
        if s.len() > MAX_DIM {
            return Err(Error::Dimension(s.len()));
        }
        let mut bits = 0u64;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << i,
                _ => {
                    return Err(Error::Parse {
                        line: 0,
                        message: format!("unexpected character {c:?} in coordinate string"),
                    })
                }
            }
        }
        Ok((VertexId(bits), s.len()))
    }
}

pub struct CoordString {
    v: VertexId,
    d: usize,
}

impl fmt::Display for CoordString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.d {
            f.write_str(if self.v.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// All `d` neighbours of `v`, in ascending coordinate order.
pub fn neighbors(v: VertexId, d: usize) -> Vec<VertexId> {
    (0..d).map(|c| v.flip(c)).collect()
}

/// Canonical edge: `base` has a zero at `coord`.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct EdgeId {
    pub base: VertexId,
    pub coord: usize,
}

impl EdgeId {
    pub fn new(u: VertexId, v: VertexId) -> Result<EdgeId> {
        let coord = u.differing_coord(v).ok_or(Error::NotAdjacent(u, v))?;
        Ok(EdgeId::canonical(u, coord))
    }

    #[inline]
    pub(crate) fn canonical(u: VertexId, coord: usize) -> EdgeId {
        EdgeId { base: VertexId(u.0 & !(1u64 << coord)), coord }
    }

    pub fn from_base(base: VertexId, coord: usize) -> Result<EdgeId> {
        if coord >= MAX_DIM {
            return Err(Error::Coordinate { coord, reason: "beyond the maximum dimension" });
        }
        if base.bit(coord) {
            return Err(Error::Coordinate { coord, reason: "edge base must be zero at the flipped coordinate" });
        }
        Ok(EdgeId { base, coord })
    }

    pub fn endpoints(self) -> (VertexId, VertexId) {
        (self.base, self.base.flip(self.coord))
    }

    pub fn is_valid_in(self, d: usize) -> bool {
        self.coord < d && self.base.fits(d) && !self.base.bit(self.coord)
    }

    /// Dense integer key used by the percolation hash.
    #[inline]
    pub fn key(self) -> u64 {
        (self.base.0 << 6) | self.coord as u64
    }
}

/// A sub-hypercube: the vertices that agree with `base` outside `free`.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Subcube {
    ambient: usize,
    free: u64,
    base: u64,
}

impl Subcube {
    pub fn full(d: usize) -> Result<Subcube> {
        check_dim(d)?;
        Ok(Subcube { ambient: d, free: full_mask(d), base: 0 })
    }

    /// `base` is canonicalised to zero on the free coordinates.
    pub fn new(d: usize, free: u64, base: VertexId) -> Result<Subcube> {
        check_dim(d)?;
        let mask = full_mask(d);
        if free & !mask != 0 {
            return Err(Error::Coordinate {
                coord: (64 - (free & !mask).leading_zeros() - 1) as usize,
                reason: "free coordinate outside the ambient dimension",
            });
        }
        if !base.fits(d) {
            return Err(Error::Membership { vertex: base.0 });
        }
        Ok(Subcube { ambient: d, free, base: base.0 & !free })
    }

    /// The subcube whose free coordinates are `coords` and which agrees with
    /// `base` everywhere else.
    pub fn with_coords(d: usize, coords: impl IntoIterator<Item = usize>, base: VertexId) -> Result<Subcube> {
        let mut free = 0u64;
        for c in coords {
            if c >= d {
                return Err(Error::Coordinate { coord: c, reason: "free coordinate outside the ambient dimension" });
            }
            free |= 1 << c;
        }
        Subcube::new(d, free, base)
    }

    #[inline]
    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    #[inline]
    pub fn free_mask(&self) -> u64 {
        self.free
    }

    #[inline]
    pub fn base(&self) -> VertexId {
        VertexId(self.base)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.free.count_ones() as usize
    }

    #[inline]
    pub fn vertex_count(&self) -> u64 {
        1u64 << self.dim()
    }

    #[inline]
    pub fn contains(&self, v: VertexId) -> bool {
        v.fits(self.ambient) && (v.0 ^ self.base) & !self.free == 0
    }

    pub fn contains_cube(&self, other: &Subcube) -> bool {
        other.free & !self.free == 0 && self.contains(other.base())
    }

    pub fn is_free(&self, coord: usize) -> bool {
        coord < 64 && (self.free >> coord) & 1 == 1
    }

    /// Free coordinates in ascending order.
    pub fn free_coords(&self) -> Vec<usize> {
        bit_positions(self.free).collect()
    }

    /// Two subcubes meet iff they agree on every coordinate fixed in both.
    pub fn is_disjoint(&self, other: &Subcube) -> bool {
        (self.base ^ other.base) & !self.free & !other.free & full_mask(self.ambient) != 0
    }

    /// The vertex whose free coordinates spell `local` (lowest free coordinate
    /// = bit 0 of `local`).
    pub fn vertex_at(&self, local: u64) -> VertexId {
        VertexId(self.base | deposit(local, self.free))
    }

    /// Inverse of [`Subcube::vertex_at`]; `None` when `v` is outside.
    pub fn local_index(&self, v: VertexId) -> Option<u64> {
        if self.contains(v) {
            Some(extract(v.0, self.free))
        } else {
            None
        }
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertex_count()).map(move |i| self.vertex_at(i))
    }

    /// Fixes a free coordinate to `value`.
    pub fn fix(&self, coord: usize, value: bool) -> Result<Subcube> {
        if !self.is_free(coord) {
            return Err(Error::Coordinate { coord, reason: "coordinate is not free in the subcube" });
        }
        let bit = 1u64 << coord;
        Ok(Subcube {
            ambient: self.ambient,
            free: self.free & !bit,
            base: if value { self.base | bit } else { self.base },
        })
    }

    /// Splits on a free coordinate into the halves where it is 0 and 1.
    /// Flipping `coord` is a perfect matching between the two halves.
    pub fn split(&self, coord: usize) -> Result<(Subcube, Subcube)> {
        Ok((self.fix(coord, false)?, self.fix(coord, true)?))
    }

    /// Fixes every coordinate of `coords` (a mask of free coordinates) in all
    /// `2^k` ways. The cells are returned in increasing order of the fixed
    /// values read as a little-endian number, and partition the subcube.
    pub fn partition(&self, coords: u64) -> Result<Vec<Subcube>> {
        if coords & !self.free != 0 {
            return Err(Error::Coordinate {
                coord: (coords & !self.free).trailing_zeros() as usize,
                reason: "coordinate is not free in the subcube",
            });
        }
        let k = coords.count_ones();
        if k > 40 {
            return Err(Error::Capacity { what: "subcube partition", requested: k as u64, limit: 40 });
        }
        Ok((0..(1u64 << k))
            .map(|j| Subcube { ambient: self.ambient, free: self.free & !coords, base: self.base | deposit(j, coords) })
            .collect())
    }

    /// Hamiltonian cycle of the subcube given by the reflected Gray code.
    /// Needs dimension at least 2.
    pub fn gray_code_cycle(&self) -> Option<Vec<VertexId>> {
        if self.dim() < 2 {
            return None;
        }
        Some((0..self.vertex_count()).map(|i| self.vertex_at(i ^ (i >> 1))).collect())
    }
}

/// A subcube with a distinguished root; layer `j` is the set of vertices at
/// distance `j` from the root.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct OrientedSubcube {
    cube: Subcube,
    root: VertexId,
}

impl OrientedSubcube {
    pub fn new(cube: Subcube, root: VertexId) -> Result<OrientedSubcube> {
        if !cube.contains(root) {
            return Err(Error::Membership { vertex: root.0 });
        }
        Ok(OrientedSubcube { cube, root })
    }

    /// The full cube rooted at the all-zero vertex.
    pub fn full(d: usize) -> Result<OrientedSubcube> {
        OrientedSubcube::new(Subcube::full(d)?, VertexId(0))
    }

    #[inline]
    pub fn cube(&self) -> &Subcube {
        &self.cube
    }

    #[inline]
    pub fn root(&self) -> VertexId {
        self.root
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.cube.dim()
    }

    /// The unique vertex of the top layer.
    pub fn antipode(&self) -> VertexId {
        VertexId(self.root.0 ^ self.cube.free)
    }

    pub fn layer_of(&self, v: VertexId) -> Result<usize> {
        if !self.cube.contains(v) {
            return Err(Error::Membership { vertex: v.0 });
        }
        Ok(((v.0 ^ self.root.0) & self.cube.free).count_ones() as usize)
    }

    /// Vertices of layer `j`, in lexicographic order of the flipped coordinate
    /// lists.
    pub fn layer(&self, j: usize) -> Vec<VertexId> {
        let coords = self.cube.free_coords();
        let mut out = Vec::new();
        for_each_combination(coords.len(), j, |idx| {
            let mut x = self.root.0;
            for &i in idx {
                x ^= 1 << coords[i];
            }
            out.push(VertexId(x));
            true
        });
        out
    }
}

pub fn layer_of(s: &OrientedSubcube, v: VertexId) -> Result<usize> {
    s.layer_of(v)
}

pub fn split_subcube(s: &Subcube, coord: usize) -> Result<(Subcube, Subcube)> {
    s.split(coord)
}

/// The subcube of `within` spanned by the coordinates where `u` and `w`
/// differ, rooted at `u`. Its dimension is the Hamming distance and `w` is
/// the only vertex of its top layer.
pub fn unique_subcube_through(u: VertexId, w: VertexId, within: &Subcube) -> Result<OrientedSubcube> {
    if !within.contains(u) {
        return Err(Error::Membership { vertex: u.0 });
    }
    if !within.contains(w) {
        return Err(Error::Membership { vertex: w.0 });
    }
    let cube = Subcube::new(within.ambient_dim(), u.0 ^ w.0, u)?;
    OrientedSubcube::new(cube, u)
}

/// For an edge `uv` along coordinate `c`, the `d - 1` pairs `(u', v')` such
/// that `u v v' u'` is a 4-cycle, one per coordinate `c' != c`, ascending.
pub fn four_cycle_partners(u: VertexId, v: VertexId, d: usize) -> Result<Vec<(VertexId, VertexId)>> {
    let c = u.differing_coord(v).ok_or(Error::NotAdjacent(u, v))?;
    if c >= d || !u.fits(d) || !v.fits(d) {
        return Err(Error::Membership { vertex: u.0.max(v.0) });
    }
    Ok((0..d).filter(|&c2| c2 != c).map(|c2| (u.flip(c2), v.flip(c2))).collect())
}

/// Iterates the set bits of a mask in ascending order.
pub(crate) fn bit_positions(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(i)
        }
    })
}

/// Scatters the low bits of `x` onto the set bits of `mask` (software pdep).
#[inline]
pub(crate) fn deposit(mut x: u64, mut mask: u64) -> u64 {
    let mut out = 0;
    while mask != 0 && x != 0 {
        let low = mask & mask.wrapping_neg();
        if x & 1 == 1 {
            out |= low;
        }
        x >>= 1;
        mask &= mask - 1;
    }
    out
}

/// Gathers the bits of `x` under `mask` into the low bits (software pext).
#[inline]
pub(crate) fn extract(x: u64, mut mask: u64) -> u64 {
    let mut out = 0;
    let mut i = 0;
    while mask != 0 {
        let low = mask & mask.wrapping_neg();
        if x & low != 0 {
            out |= 1 << i;
        }
        i += 1;
        mask &= mask - 1;
    }
    out
}

/// Calls `f` on every `k`-subset of `0..n` in lexicographic order until it
/// returns `false`.
pub(crate) fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !f(&idx) {
            return;
        }
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}
