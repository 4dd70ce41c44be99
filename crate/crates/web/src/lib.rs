//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Images come back as RGBA bytes ready for `ImageData`; reports come back
//! as JSON strings.

use exobasin::exotic::{basin_mask, MaskConfig};
use exobasin::family::{from_kw, KwParams};
use exobasin::orbits::{critical_fates_kw, ClassifierConfig};
use exobasin::raster::{Grid, Window};
use exobasin::render::{render_mask, render_scan, to_json, Image, Palette};
use exobasin::scan::{scan, ScanGrid};
use wasm_bindgen::prelude::*;

fn js_err(e: exobasin::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn rgba(img: &Image) -> Vec<u8> {
    img.rgb.chunks_exact(3).flat_map(|p| [p[0], p[1], p[2], 255]).collect()
}

/// Basin picture of the slice map `(k, w)`: white for `w`, grey for `∞`,
/// black for other cycles. The longer side has `resolution` pixels; see
/// [`grid_size`] for both dimensions.
#[wasm_bindgen]
pub fn julia_rgba(k: f64, w: f64, re_min: f64, re_max: f64, im_min: f64, im_max: f64, resolution: usize) -> Result<Vec<u8>, JsError> {
    let p = from_kw(&KwParams::new(k, w)).map_err(js_err)?;
    let window = Window::new(re_min, re_max, im_min, im_max).map_err(js_err)?;
    let cfg = MaskConfig { classifier: ClassifierConfig::default().with_max_iter(500), ..MaskConfig::default() };
    let mask = basin_mask(&p, window, resolution, &cfg).map_err(js_err)?;
    Ok(rgba(&render_mask(&mask, &Palette::default())))
}

/// `[width, height]` of the pixel grid used by [`julia_rgba`].
#[wasm_bindgen]
pub fn grid_size(re_min: f64, re_max: f64, im_min: f64, im_max: f64, resolution: usize) -> Result<Vec<u32>, JsError> {
    let window = Window::new(re_min, re_max, im_min, im_max).map_err(js_err)?;
    let g = Grid::with_resolution(window, resolution).map_err(js_err)?;
    Ok(vec![g.width as u32, g.height as u32])
}

/// Nine-color parameter-plane picture, `nk` wide and `nw` tall, largest `w`
/// on top.
#[wasm_bindgen]
pub fn scan_rgba(k_min: f64, k_max: f64, w_min: f64, w_max: f64, nk: usize, nw: usize) -> Result<Vec<u8>, JsError> {
    let mut grid = ScanGrid::new((k_min, k_max), (w_min, w_max), nk, nw).map_err(js_err)?;
    grid.classifier = ClassifierConfig::default().with_max_iter(2000);
    let map = scan(&grid).map_err(js_err)?;
    Ok(rgba(&render_scan(&map)))
}

/// Fates of the free critical points `u`, `v` and of `w`, as JSON.
#[wasm_bindgen]
pub fn critical_fates_json(k: f64, w: f64) -> Result<String, JsError> {
    let kw = KwParams::new(k, w);
    let p = from_kw(&kw).map_err(js_err)?;
    let fates = critical_fates_kw(&kw, &p, &ClassifierConfig::default()).map_err(js_err)?;
    to_json(&fates).map_err(js_err)
}
