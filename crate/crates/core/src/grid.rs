//! Dense occupancy grids indexed `(x, y, z)` with `y` pointing up.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Grid extents along x (depth), y (height) and z (width).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

impl Default for Dims {
    fn default() -> Self {
        Dims::cube(32)
    }
}

impl Dims {
    pub const fn new(x: usize, y: usize, z: usize) -> Self {
        Dims { x, y, z }
    }

    pub const fn cube(n: usize) -> Self {
        Dims { x: n, y: n, z: n }
    }

    pub fn as_array(self) -> [usize; 3] {
        [self.x, self.y, self.z]
    }

    pub fn volume(self) -> usize {
        self.x * self.y * self.z
    }

    pub fn contains(self, p: [i32; 3]) -> bool {
        p.iter().zip(self.as_array()).all(|(&c, d)| c >= 0 && (c as usize) < d)
    }

    /// Linear index; x-major, z fastest.
    #[inline]
    pub fn index(self, x: usize, y: usize, z: usize) -> usize {
        (x * self.y + y) * self.z + z
    }

    #[inline]
    pub fn coords(self, i: usize) -> [usize; 3] {
        let z = i % self.z;
        let y = (i / self.z) % self.y;
        let x = i / (self.z * self.y);
        [x, y, z]
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.x, self.y, self.z)
    }
}

impl FromStr for Dims {
    type Err = String;

    /// Parses `X,Y,Z` or a single `N` for a cube.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Result<Vec<usize>, _> = s.split(',').map(|p| p.trim().parse::<usize>()).collect();
        let parts = parts.map_err(|e| format!("bad dims {s:?}: {e}"))?;
        let d = match parts.as_slice() {
            [n] => Dims::cube(*n),
            [x, y, z] => Dims::new(*x, *y, *z),
            _ => return Err(format!("bad dims {s:?}: expected X,Y,Z")),
        };
        if d.x == 0 || d.y == 0 || d.z == 0 {
            return Err(format!("bad dims {s:?}: every extent must be >= 1"));
        }
        Ok(d)
    }
}

/// Binary occupancy grid stored as a packed bitset.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VoxelGrid {
    dims: Dims,
    words: Vec<u64>,
}

impl fmt::Debug for VoxelGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VoxelGrid")
            .field("dims", &self.dims)
            .field("occupied", &self.count())
            .finish()
    }
}

impl VoxelGrid {
    pub fn new(dims: Dims) -> Self {
        assert!(dims.volume() > 0, "grid extents must be >= 1");
        VoxelGrid {
            dims,
            words: vec![0; dims.volume().div_ceil(64)],
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.volume()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        self.get_index(self.dims.index(x, y, z))
    }

    #[inline]
    pub fn get_index(&self, i: usize) -> bool {
        self.words[i >> 6] >> (i & 63) & 1 == 1
    }

    /// Bounds-checked read; anything outside the grid is vacant.
    pub fn get_i32(&self, p: [i32; 3]) -> bool {
        self.dims.contains(p) && self.get(p[0] as usize, p[1] as usize, p[2] as usize)
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, z: usize, v: bool) {
        let i = self.dims.index(x, y, z);
        self.set_index(i, v);
    }

    #[inline]
    pub fn set_index(&mut self, i: usize, v: bool) {
        let (w, b) = (i >> 6, i & 63);
        if v {
            self.words[w] |= 1 << b;
        } else {
            self.words[w] &= !(1 << b);
        }
    }

    /// Sets a voxel if it lies inside the grid; returns whether it did.
    #[inline]
    pub fn set_clipped(&mut self, p: [i32; 3]) -> bool {
        if self.dims.contains(p) {
            self.set(p[0] as usize, p[1] as usize, p[2] as usize, true);
            true
        } else {
            false
        }
    }

    /// Packed occupancy bits, 64 voxels per word in index order. Bits past
    /// the last voxel are always zero.
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn union_with(&mut self, other: &VoxelGrid) {
        assert_eq!(self.dims, other.dims);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn union(&self, other: &VoxelGrid) -> VoxelGrid {
        let mut g = self.clone();
        g.union_with(other);
        g
    }

    pub fn intersection(&self, other: &VoxelGrid) -> VoxelGrid {
        self.zip_words(other, |a, b| a & b)
    }

    /// Voxels in `self` but not in `other`.
    pub fn difference(&self, other: &VoxelGrid) -> VoxelGrid {
        self.zip_words(other, |a, b| a & !b)
    }

    fn zip_words(&self, other: &VoxelGrid, f: impl Fn(u64, u64) -> u64) -> VoxelGrid {
        assert_eq!(self.dims, other.dims);
        VoxelGrid {
            dims: self.dims,
            words: self.words.iter().zip(&other.words).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn intersection_count(&self, other: &VoxelGrid) -> usize {
        assert_eq!(self.dims, other.dims);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn union_count(&self, other: &VoxelGrid) -> usize {
        assert_eq!(self.dims, other.dims);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    /// Linear indices of occupied voxels, ascending.
    pub fn occupied_indices(&self) -> impl Iterator<Item = usize> + '_ {
        let n = self.len();
        self.words.iter().enumerate().flat_map(move |(w, &bits)| {
            let mut bits = bits;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + b)
            })
            .take_while(move |&i| i < n)
        })
    }

    /// Occupied voxels as `[x, y, z]`, in index order.
    pub fn occupied(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        let d = self.dims;
        self.occupied_indices().map(move |i| d.coords(i))
    }

    /// Smallest box containing every occupied voxel, as inclusive
    /// `(min, max)` corners.
    pub fn bounding_box(&self) -> Option<([usize; 3], [usize; 3])> {
        let mut it = self.occupied();
        let first = it.next()?;
        let (mut lo, mut hi) = (first, first);
        for p in it {
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        Some((lo, hi))
    }

    /// Rigid shift; voxels pushed outside are dropped.
    pub fn shifted(&self, by: [i32; 3]) -> VoxelGrid {
        let mut g = VoxelGrid::new(self.dims);
        for [x, y, z] in self.occupied() {
            g.set_clipped([x as i32 + by[0], y as i32 + by[1], z as i32 + by[2]]);
        }
        g
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> bool) -> VoxelGrid {
        let mut g = VoxelGrid::new(dims);
        for x in 0..dims.x {
            for y in 0..dims.y {
                for z in 0..dims.z {
                    if f(x, y, z) {
                        g.set(x, y, z, true);
                    }
                }
            }
        }
        g
    }
}

/// Real-valued grid with every value in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatGrid {
    dims: Dims,
    values: Vec<f64>,
}

impl FloatGrid {
    /// Returns `None` if the length is wrong or any value leaves `[0, 1]`.
    pub fn new(dims: Dims, values: Vec<f64>) -> Option<Self> {
        (values.len() == dims.volume() && values.iter().all(|v| (0.0..=1.0).contains(v))).then_some(FloatGrid { dims, values })
    }

    pub fn filled(dims: Dims, v: f64) -> Self {
        FloatGrid::new(dims, vec![v; dims.volume()]).expect("fill value in [0, 1]")
    }

    /// Maps occupied voxels to `hi` and vacant ones to `lo`.
    pub fn from_grid(g: &VoxelGrid, lo: f64, hi: f64) -> Self {
        let values = (0..g.len()).map(|i| if g.get_index(i) { hi } else { lo }).collect();
        FloatGrid::new(g.dims(), values).expect("lo and hi in [0, 1]")
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}
