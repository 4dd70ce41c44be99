//! Pixel grids over rectangles of the complex plane, connected-component
//! labelling and contour extraction.
//!
//! Pixel `(col, row)` has its center at
//! `re_min + (col + 1/2)·dx`, `im_max - (row + 1/2)·dy`: row 0 is the top
//! row (largest imaginary part), columns grow to the right.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::Complex;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Window {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let w = Window { re_min, re_max, im_min, im_max };
        w.validate()?;
        Ok(w)
    }

    /// Window with corners `lo` (lower left) and `hi` (upper right).
    pub fn from_corners(lo: Complex, hi: Complex) -> Result<Self> {
        Window::new(lo.re, hi.re, lo.im, hi.im)
    }

    pub fn square(center: Complex, half_width: f64) -> Result<Self> {
        Window::new(
            center.re - half_width,
            center.re + half_width,
            center.im - half_width,
            center.im + half_width,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.re_min, self.re_max, self.im_min, self.im_max].iter().all(|v| v.is_finite())
            && self.re_max > self.re_min
            && self.im_max > self.im_min;
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!("bad window {self:?}")))
        }
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn contains(&self, z: Complex) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }
}

/// A window sampled at `width × height` pixel centers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub window: Window,
    pub width: usize,
    pub height: usize,
}

impl Grid {
    pub fn new(window: Window, width: usize, height: usize) -> Result<Self> {
        window.validate()?;
        if width == 0 || height == 0 {
            return Err(Error::Invalid("grid must have at least one pixel".into()));
        }
        Ok(Grid { window, width, height })
    }

    /// Grid whose pixels are square, `resolution` pixels along the longer side.
    pub fn with_resolution(window: Window, resolution: usize) -> Result<Self> {
        window.validate()?;
        let (w, h) = (window.width(), window.height());
        let (nx, ny) = if w >= h {
            (resolution, ((resolution as f64) * h / w).round().max(1.0) as usize)
        } else {
            (((resolution as f64) * w / h).round().max(1.0) as usize, resolution)
        };
        Grid::new(window, nx, ny)
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        self.window.width() / self.width as f64
    }

    pub fn dy(&self) -> f64 {
        self.window.height() / self.height as f64
    }

    /// Larger of the two pixel side lengths.
    pub fn pixel_size(&self) -> f64 {
        self.dx().max(self.dy())
    }

    pub fn center(&self, col: usize, row: usize) -> Complex {
        Complex::new(
            self.window.re_min + (col as f64 + 0.5) * self.dx(),
            self.window.im_max - (row as f64 + 0.5) * self.dy(),
        )
    }

    pub fn center_of_index(&self, idx: usize) -> Complex {
        self.center(idx % self.width, idx / self.width)
    }

    /// Pixel containing `z`, if it lies in the window.
    pub fn locate(&self, z: Complex) -> Option<(usize, usize)> {
        if !z.re.is_finite() || !z.im.is_finite() {
            return None;
        }
        let col = ((z.re - self.window.re_min) / self.dx()).floor();
        let row = ((self.window.im_max - z.im) / self.dy()).floor();
        if col < 0.0 || row < 0.0 || col >= self.width as f64 || row >= self.height as f64 {
            return None;
        }
        Some((col as usize, row as usize))
    }

    pub fn index(&self, col: usize, row: usize) -> usize {
        row * self.width + col
    }

    /// Same window at twice the resolution in each direction.
    pub fn refined(&self) -> Grid {
        Grid { window: self.window, width: self.width * 2, height: self.height * 2 }
    }

    /// Evaluates `f` at every pixel center in row-major order.
    pub fn sample<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(Complex) -> T + Sync,
    {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..self.height)
                .into_par_iter()
                .flat_map_iter(|row| {
                    let f = &f;
                    (0..self.width).map(move |col| f(self.center(col, row)))
                })
                .collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..self.len()).map(|i| f(self.center_of_index(i))).collect()
        }
    }
}

/// Order-preserving map over a slice, parallel when the `parallel` feature is on.
pub fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(&f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &[(1, 0), (-1, 0), (0, 1), (0, -1)],
            Connectivity::Eight => &[(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)],
        }
    }
}

/// Component labels produced by [`label_components`]; `0` means background.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Components {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u32>,
    pub sizes: Vec<usize>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    pub fn label_at(&self, col: usize, row: usize) -> u32 {
        self.labels[row * self.width + col]
    }

    /// Components of at least `min_size` pixels.
    pub fn count_at_least(&self, min_size: usize) -> usize {
        self.sizes.iter().filter(|&&s| s >= min_size).count()
    }

    /// Labels of components touching the raster border.
    pub fn border_labels(&self) -> Vec<u32> {
        let mut out = Vec::new();
        let mut push = |l: u32| {
            if l != 0 && !out.contains(&l) {
                out.push(l);
            }
        };
        for col in 0..self.width {
            push(self.label_at(col, 0));
            push(self.label_at(col, self.height - 1));
        }
        for row in 0..self.height {
            push(self.label_at(0, row));
            push(self.label_at(self.width - 1, row));
        }
        out.sort_unstable();
        out
    }
}

/// Breadth-first flood fill of `mask`; labels start at 1 and are assigned in
/// row-major order of each component's first pixel.
pub fn label_components(mask: &[bool], width: usize, height: usize, conn: Connectivity) -> Components {
    assert_eq!(mask.len(), width * height);
    let mut labels = vec![0u32; mask.len()];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..mask.len() {
        if !mask[start] || labels[start] != 0 {
            continue;
        }
        let label = sizes.len() as u32 + 1;
        labels[start] = label;
        queue.push_back(start);
        let mut size = 0;
        while let Some(idx) = queue.pop_front() {
            size += 1;
            let (col, row) = ((idx % width) as isize, (idx / width) as isize);
            for &(dc, dr) in conn.offsets() {
                let (c, r) = (col + dc, row + dr);
                if c < 0 || r < 0 || c >= width as isize || r >= height as isize {
                    continue;
                }
                let n = r as usize * width + c as usize;
                if mask[n] && labels[n] == 0 {
                    labels[n] = label;
                    queue.push_back(n);
                }
            }
        }
        sizes.push(size);
    }
    Components { width, height, labels, sizes }
}

/// A traced polyline; `closed` when its last vertex joins its first.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Polyline {
    #[serde(with = "crate::family::pair::vec")]
    pub points: Vec<Complex>,
    pub closed: bool,
}

/// Marching squares on the scalar field `values` (row-major over `grid`),
/// extracting the contour `value = level`.
///
/// Saddle cells (alternating corners) are disambiguated by `center`, which
/// is called with the cell's center point and must return the field value
/// there.
pub fn marching_squares<F>(grid: &Grid, values: &[f64], level: f64, center: F) -> Vec<Polyline>
where
    F: Fn(Complex) -> f64,
{
    assert_eq!(values.len(), grid.len());
    let (w, h) = (grid.width, grid.height);
    if w < 2 || h < 2 {
        return Vec::new();
    }
    // Edge keys: horizontal edge between (c,r)-(c+1,r) is (2*idx), vertical
    // edge between (c,r)-(c,r+1) is (2*idx + 1).
    let hkey = |c: usize, r: usize| 2 * (r * w + c);
    let vkey = |c: usize, r: usize| 2 * (r * w + c) + 1;
    let val = |c: usize, r: usize| values[r * w + c];
    let above = |v: f64| v >= level;
    let interp = |c0: usize, r0: usize, c1: usize, r1: usize| {
        let (v0, v1) = (val(c0, r0), val(c1, r1));
        let p0 = grid.center(c0, r0);
        let p1 = grid.center(c1, r1);
        let t = if v1 == v0 || !v0.is_finite() || !v1.is_finite() {
            if v0.is_finite() && !v1.is_finite() {
                0.0
            } else if !v0.is_finite() && v1.is_finite() {
                1.0
            } else {
                0.5
            }
        } else {
            ((level - v0) / (v1 - v0)).clamp(0.0, 1.0)
        };
        p0 + (p1 - p0) * t
    };

    let mut segments: Vec<(usize, usize)> = Vec::new();
    let mut positions: HashMap<usize, Complex> = HashMap::new();
    for r in 0..h - 1 {
        for c in 0..w - 1 {
            // corners: tl=(c,r) tr=(c+1,r) br=(c+1,r+1) bl=(c,r+1)
            let tl = above(val(c, r));
            let tr = above(val(c + 1, r));
            let br = above(val(c + 1, r + 1));
            let bl = above(val(c, r + 1));
            let case = (tl as u8) << 3 | (tr as u8) << 2 | (br as u8) << 1 | bl as u8;
            if case == 0 || case == 15 {
                continue;
            }
            let top = hkey(c, r);
            let bottom = hkey(c, r + 1);
            let left = vkey(c, r);
            let right = vkey(c + 1, r);
            let mut edge_pos = |key: usize| {
                positions.entry(key).or_insert_with(|| {
                    if key == top {
                        interp(c, r, c + 1, r)
                    } else if key == bottom {
                        interp(c, r + 1, c + 1, r + 1)
                    } else if key == left {
                        interp(c, r, c, r + 1)
                    } else {
                        interp(c + 1, r, c + 1, r + 1)
                    }
                });
            };
            let pairs: &[(usize, usize)] = match case {
                1 | 14 => &[(left, bottom)],
                2 | 13 => &[(bottom, right)],
                3 | 12 => &[(left, right)],
                4 | 11 => &[(top, right)],
                6 | 9 => &[(top, bottom)],
                7 | 8 => &[(left, top)],
                5 | 10 => {
                    let mid = center(grid.center(c, r) + Complex::new(grid.dx() / 2.0, -grid.dy() / 2.0));
                    // case 5: tr & bl above; case 10: tl & br above.
                    match (case, above(mid)) {
                        (5, true) | (10, false) => &[(left, top), (bottom, right)],
                        _ => &[(left, bottom), (top, right)],
                    }
                }
                _ => unreachable!(),
            };
            for &(a, b) in pairs {
                edge_pos(a);
                edge_pos(b);
                segments.push((a, b));
            }
        }
    }
    join_segments(&segments, &positions)
}

fn join_segments(segments: &[(usize, usize)], positions: &HashMap<usize, Complex>) -> Vec<Polyline> {
    let mut adjacency: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, &(a, b)) in segments.iter().enumerate() {
        adjacency.entry(a).or_default().push(i);
        adjacency.entry(b).or_default().push(i);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();
    let other = |seg: (usize, usize), key: usize| if seg.0 == key { seg.1 } else { seg.0 };

    // Open chains start at edge points with a single incident segment.
    let mut starts: Vec<usize> =
        adjacency.iter().filter(|(_, v)| v.len() == 1).map(|(&k, _)| k).collect();
    starts.sort_unstable();
    let mut all_keys: Vec<usize> = segments.iter().map(|s| s.0).collect();
    all_keys.sort_unstable();
    all_keys.dedup();

    let walk = |start: usize, used: &mut Vec<bool>| -> Option<Polyline> {
        let mut keys = vec![start];
        let mut cur = start;
        loop {
            let next_seg = adjacency[&cur].iter().copied().find(|&s| !used[s]);
            let Some(s) = next_seg else { break };
            used[s] = true;
            cur = other(segments[s], cur);
            keys.push(cur);
            if cur == start {
                break;
            }
        }
        if keys.len() < 2 {
            return None;
        }
        let closed = keys.len() > 2 && keys.first() == keys.last();
        if closed {
            keys.pop();
        }
        Some(Polyline { points: keys.iter().map(|k| positions[k]).collect(), closed })
    };
    for s in starts {
        if let Some(p) = walk(s, &mut used) {
            out.push(p);
        }
    }
    for k in all_keys {
        if adjacency[&k].iter().any(|&s| !used[s]) {
            if let Some(p) = walk(k, &mut used) {
                out.push(p);
            }
        }
    }
    out
}
