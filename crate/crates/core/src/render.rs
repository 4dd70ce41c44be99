//! Images and raster exports.
//!
//! Images are binary PPM (`P6`): ASCII header `P6\n<width> <height>\n255\n`
//! followed by row-major RGB bytes, top row first. Dynamical-plane images put
//! the maximal imaginary part on the top row; scan images put the largest
//! `w` on the top row and increase `k` to the right.
//!
//! Rasters are raw little-endian `f32` (scalar fields) or `u8` (labels), each
//! next to a JSON sidecar `<file>.json` holding `width`, `height` and
//! `window`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exotic::{basin_mask, BasinMask, MaskConfig, LABEL_INFINITY, LABEL_UNDECIDED, LABEL_W};
use crate::family::MapParams;
use crate::potential::LevelCurve;
use crate::raster::{Grid, Window};
use crate::scan::NineColorMap;

pub type Rgb = [u8; 3];

/// Colors for basin labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Palette {
    pub w_basin: Rgb,
    pub infinity: Rgb,
    pub other: Rgb,
    pub undecided: Rgb,
}

impl Default for Palette {
    fn default() -> Self {
        Palette { w_basin: [255, 255, 255], infinity: [160, 160, 160], other: [0, 0, 0], undecided: [128, 0, 0] }
    }
}

impl Palette {
    pub fn color(&self, label: u8) -> Rgb {
        match label {
            LABEL_INFINITY => self.infinity,
            LABEL_W => self.w_basin,
            LABEL_UNDECIDED => self.undecided,
            _ => self.other,
        }
    }
}

/// Scan colors indexed by the nine-color code `3·u + v`, with fates ordered
/// `inf, w, other`:
///
/// | code | u | v | hex |
/// |---|---|---|---|
/// | 0 | inf | inf | `#a0a0a0` |
/// | 1 | inf | w | `#ffd92f` |
/// | 2 | inf | other | `#e41a1c` |
/// | 3 | w | inf | `#377eb8` |
/// | 4 | w | w | `#ffffff` |
/// | 5 | w | other | `#4daf4a` |
/// | 6 | other | inf | `#984ea3` |
/// | 7 | other | w | `#ff7f00` |
/// | 8 | other | other | `#000000` |
///
/// Degenerate cells (`k = 1` or `w = 0`) use [`SCAN_DEGENERATE`].
pub const SCAN_PALETTE: [Rgb; 9] = [
    [0xa0, 0xa0, 0xa0],
    [0xff, 0xd9, 0x2f],
    [0xe4, 0x1a, 0x1c],
    [0x37, 0x7e, 0xb8],
    [0xff, 0xff, 0xff],
    [0x4d, 0xaf, 0x4a],
    [0x98, 0x4e, 0xa3],
    [0xff, 0x7f, 0x00],
    [0x00, 0x00, 0x00],
];

/// `#00ced1`
pub const SCAN_DEGENERATE: Rgb = [0x00, 0xce, 0xd1];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub rgb: Vec<u8>,
}

impl Image {
    pub fn pixel(&self, col: usize, row: usize) -> Rgb {
        let i = 3 * (row * self.width + col);
        [self.rgb[i], self.rgb[i + 1], self.rgb[i + 2]]
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.rgb);
        out
    }

    pub fn write_ppm(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_ppm())?;
        Ok(())
    }
}

/// Parses a binary PPM written by [`Image::to_ppm`].
pub fn parse_ppm(bytes: &[u8]) -> Result<Image> {
    let bad = || Error::Invalid("not a P6 image with maxval 255".into());
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad());
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad())?.to_string());
    }
    pos += 1;
    let dim = |s: &str| s.parse::<usize>().map_err(|_| bad());
    let (width, height) = (dim(&fields[1])?, dim(&fields[2])?);
    if fields[0] != "P6" || fields[3] != "255" || bytes.len() != pos + 3 * width * height {
        return Err(bad());
    }
    Ok(Image { width, height, rgb: bytes[pos..].to_vec() })
}

/// Colors a label raster laid out on `grid` (row 0 = maximal imaginary part).
pub fn render_labels(grid: &Grid, labels: &[u8], palette: &Palette) -> Image {
    let rgb = labels.iter().flat_map(|&l| palette.color(l)).collect();
    Image { width: grid.width, height: grid.height, rgb }
}

pub fn render_mask(mask: &BasinMask, palette: &Palette) -> Image {
    render_labels(&mask.grid, &mask.labels, palette)
}

/// Basin picture of `p` on a `resolution`-pixel-wide grid over `window`.
pub fn render_julia(p: &MapParams, window: Window, resolution: usize, palette: &Palette, cfg: &MaskConfig) -> Result<Image> {
    let mask = basin_mask(p, window, resolution, cfg)?;
    Ok(render_mask(&mask, palette))
}

pub fn render_scan(map: &NineColorMap) -> Image {
    let (nk, nw) = (map.grid.nk, map.grid.nw);
    let mut rgb = Vec::with_capacity(3 * nk * nw);
    for row in 0..nw {
        let j = nw - 1 - row;
        for i in 0..nk {
            let color = map.cell(i, j).color.map_or(SCAN_DEGENERATE, |c| SCAN_PALETTE[c.code() as usize]);
            rgb.extend_from_slice(&color);
        }
    }
    Image { width: nk, height: nw, rgb }
}

/// `<kind>_k<k>_w<w>_<res>.ppm`
pub fn image_file_name(kind: &str, k: f64, w: f64, resolution: usize) -> String {
    format!("{kind}_k{k}_w{w}_{resolution}.ppm")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RasterSidecar {
    pub width: usize,
    pub height: usize,
    pub window: Window,
    /// `f32le` or `u8`.
    pub format: String,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn write_sidecar(path: &Path, grid: &Grid, format: &str) -> Result<()> {
    let meta = RasterSidecar { width: grid.width, height: grid.height, window: grid.window, format: format.into() };
    fs::write(sidecar_path(path), to_json(&meta)?)?;
    Ok(())
}

/// Raw little-endian `f32` values; infinite values stay infinite.
pub fn write_f32_raster(path: &Path, grid: &Grid, values: &[f64]) -> Result<()> {
    if values.len() != grid.len() {
        return Err(Error::Invalid("raster length does not match the grid".into()));
    }
    let bytes: Vec<u8> = values.iter().flat_map(|&v| (v as f32).to_le_bytes()).collect();
    fs::write(path, bytes)?;
    write_sidecar(path, grid, "f32le")
}

pub fn write_label_raster(path: &Path, grid: &Grid, labels: &[u8]) -> Result<()> {
    if labels.len() != grid.len() {
        return Err(Error::Invalid("raster length does not match the grid".into()));
    }
    fs::write(path, labels)?;
    write_sidecar(path, grid, "u8")
}

pub fn read_f32_raster(path: &Path) -> Result<(RasterSidecar, Vec<f32>)> {
    let meta: RasterSidecar = serde_json::from_slice(&fs::read(sidecar_path(path))?)
        .map_err(|e| Error::Invalid(format!("bad sidecar: {e}")))?;
    let bytes = fs::read(path)?;
    if bytes.len() != 4 * meta.width * meta.height {
        return Err(Error::Invalid("raster size does not match its sidecar".into()));
    }
    let values = bytes.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
    Ok((meta, values))
}

/// Level curve as JSON: the level plus an array of polylines, each a list of
/// `[re, im]` pairs.
pub fn level_curve_json(curve: &LevelCurve) -> Result<String> {
    to_json(curve)
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Invalid(format!("serialization failed: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::Complex;
    use crate::orbits::{FateClass, NineColor};
    use crate::scan::{ScanCell, ScanGrid};

    #[test]
    fn ppm_header_and_round_trip() {
        let img = Image { width: 2, height: 1, rgb: vec![1, 2, 3, 4, 5, 6] };
        let bytes = img.to_ppm();
        assert!(bytes.starts_with(b"P6\n2 1\n255\n"));
        assert_eq!(bytes.len(), 11 + 6);
        assert_eq!(parse_ppm(&bytes).unwrap(), img);
    }

    #[test]
    fn scan_palette_is_injective() {
        let mut all: Vec<Rgb> = SCAN_PALETTE.to_vec();
        all.push(SCAN_DEGENERATE);
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), all.len());
        let p = Palette::default();
        let dyn_colors = [p.color(LABEL_INFINITY), p.color(LABEL_W), p.color(2), p.color(LABEL_UNDECIDED)];
        for (i, a) in dyn_colors.iter().enumerate() {
            for b in &dyn_colors[i + 1..] {
                assert_ne!(a, b);
            }
        }
    }

    #[test]
    fn synthetic_scan_strip() {
        let grid = ScanGrid::new((0.0, 8.0), (1.0, 2.0), 9, 2).unwrap();
        let mut cells = Vec::new();
        for j in 0..2 {
            for code in 0..9u8 {
                let color = if j == 1 { NineColor::from_code(code) } else { None };
                cells.push(ScanCell { k: code as f64, w: 1.0 + j as f64, color, u_period: None, v_period: None });
            }
        }
        let map = NineColorMap { grid, cells, undecided_fraction: 0.0 };
        let img = render_scan(&map);
        for code in 0..9 {
            assert_eq!(img.pixel(code, 0), SCAN_PALETTE[code]);
            assert_eq!(img.pixel(code, 1), SCAN_DEGENERATE);
        }
        assert_eq!(NineColor::from_code(2).unwrap().u, FateClass::Inf);
    }

    #[test]
    fn marked_pixel_lands_where_the_grid_puts_it() {
        let grid = Grid::with_resolution(Window::new(-2.0, 2.0, -1.0, 1.0).unwrap(), 40).unwrap();
        let z = Complex::new(1.3, 0.7);
        let (col, row) = grid.locate(z).unwrap();
        let mut labels = vec![LABEL_W; grid.len()];
        labels[grid.index(col, row)] = LABEL_INFINITY;
        let img = render_labels(&grid, &labels, &Palette::default());
        assert_eq!(img.pixel(col, row), [160, 160, 160]);
        assert!(row < grid.height / 2 && col > grid.width / 2);
        assert!((grid.center(col, row) - z).norm() <= grid.pixel_size());
    }

    #[test]
    fn file_names() {
        assert_eq!(image_file_name("julia", 0.81, 1.51545, 512), "julia_k0.81_w1.51545_512.ppm");
    }
}
