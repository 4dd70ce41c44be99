//! Basin masks, exotic verdicts and basin pictures on the k = 0.81 gallery.

use exobasin::exotic::{
    basin_mask, connectivity, exotic_verdict, ExoticConfig, MaskConfig, LABEL_INFINITY, LABEL_UNDECIDED, LABEL_W,
};
use exobasin::family::{from_kw, Complex, KwParams, MapParams};
use exobasin::raster::Window;
use exobasin::render::{parse_ppm, render_julia, render_mask, Palette};

fn kw(k: f64, w: f64) -> MapParams {
    from_kw(&KwParams::new(k, w)).unwrap()
}

fn square() -> Window {
    Window::new(-2.0, 2.0, -2.0, 2.0).unwrap()
}

#[test]
fn published_exotic_map_is_exotic() {
    let p = MapParams::real(1.719727, 0.3142117, -3.121092).unwrap();
    let v = exotic_verdict(&p, &ExoticConfig::default()).unwrap();
    assert!(v.is_exotic, "{:#?}", v.evidence);
    assert_eq!(v.connectivity.infinity_components, 1);
    assert!(v.connectivity.complement_components >= 2);
    assert!(v.evidence.iter().all(|c| c.passed), "{:#?}", v.evidence);
}

#[test]
fn disconnected_basin_is_not_exotic() {
    let v = exotic_verdict(&kw(0.81, 1.49), &ExoticConfig::default()).unwrap();
    assert!(!v.is_exotic);
    assert!(v.connectivity.infinity_components > 1);
    assert!(v.connectivity.criticals_in_immediate_infinity_basin.is_empty());
    assert!(v.connectivity.monitors.iter().all(|m| m.passed));
}

#[test]
fn exotic_gallery_member() {
    let v = exotic_verdict(&kw(0.81, 1.51545), &ExoticConfig::default()).unwrap();
    assert!(v.is_exotic, "{:#?}", v.evidence);
}

#[test]
fn newton_like_picture_has_three_colors() {
    let mask = basin_mask(&kw(0.81, 0.63), square(), 512, &MaskConfig::default()).unwrap();
    let grey = mask.fraction(LABEL_INFINITY);
    assert!(grey > 0.0 && grey < 1.0);
    assert!(mask.fraction(LABEL_W) > 0.0);
    assert!(mask.labels.iter().any(|&l| l != LABEL_INFINITY && l != LABEL_W && l != LABEL_UNDECIDED));
    let img = render_mask(&mask, &Palette::default());
    let colors: std::collections::BTreeSet<[u8; 3]> = img.rgb.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
    for c in [[255, 255, 255], [160, 160, 160], [0, 0, 0]] {
        assert!(colors.contains(&c), "missing {c:?}");
    }
}

#[test]
fn grey_region_of_the_exotic_member_is_one_piece() {
    let p = kw(0.81, 1.51545);
    let window = Window::new(0.0, 2.0, -1.0, 1.0).unwrap();
    let r = connectivity(&p, window, 512, &MaskConfig::default(), false).unwrap();
    assert_eq!(r.infinity_components, 1);
}

#[test]
fn quadratic_disc_picture() {
    let p = MapParams::quadratic(Complex::new(0.0, 0.0));
    let res = 256;
    let img = render_julia(&p, square(), res, &Palette::default(), &MaskConfig::default()).unwrap();
    let px = 4.0 / res as f64;
    for row in 0..res {
        for col in 0..res {
            let z = Complex::new(-2.0 + (col as f64 + 0.5) * px, 2.0 - (row as f64 + 0.5) * px);
            let grey = img.pixel(col, row) == [160, 160, 160];
            if z.norm() > 1.0 + px {
                assert!(grey, "({col}, {row})");
            } else if z.norm() < 1.0 - px {
                assert!(!grey, "({col}, {row})");
            }
        }
    }
}

#[test]
fn julia_image_bytes_are_deterministic() {
    let p = kw(0.81, 1.37);
    let a = render_julia(&p, square(), 128, &Palette::default(), &MaskConfig::default()).unwrap().to_ppm();
    let b = render_julia(&p, square(), 128, &Palette::default(), &MaskConfig::default()).unwrap().to_ppm();
    assert_eq!(a, b);
    let back = parse_ppm(&a).unwrap();
    assert_eq!((back.width, back.height), (128, 128));
}
