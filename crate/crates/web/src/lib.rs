//! Browser bindings. Every image comes back as row-major RGBA bytes.

use pelab::boundary::SmoothedCylinder;
use pelab::holder::{admissible, Regime};
use pelab::synth::{make_weierstrass, SyntheticSpec};
use pelab::Grid3;
use wasm_bindgen::prelude::*;

/// Blue through white to red for `v` in `[-1, 1]`.
fn diverging(v: f64) -> [u8; 4] {
    let t = v.clamp(-1.0, 1.0);
    let fade = |a: f64| (255.0 * (1.0 - a)).round() as u8;
    if t >= 0.0 {
        [255, fade(t), fade(t), 255]
    } else {
        [fade(-t), fade(-t), 255, 255]
    }
}

fn regime_colour(r: Regime) -> [u8; 4] {
    match r {
        Regime::Interior => [46, 139, 87, 255],
        Regime::SmoothHorizontal => [218, 165, 32, 255],
        Regime::Inadmissible => [235, 235, 235, 255],
    }
}

/// Horizontal slice of the first velocity component of a synthetic rough
/// field, `n x n` pixels at height `z`, coloured against the slice maximum.
pub fn weierstrass_slice(
    alpha: f64,
    beta: f64,
    octaves: u32,
    seed: u64,
    n: usize,
    z: f64,
) -> Result<Vec<u8>, String> {
    let nz = (4usize << octaves).max(8);
    let g = Grid3::channel(n, n, nz).map_err(|e| e.to_string())?;
    let spec = SyntheticSpec::new(alpha, beta, octaves).seed(seed);
    let u = make_weierstrass(&spec, &g).map_err(|e| e.to_string())?;
    let k = (z.clamp(0.0, 1.0) * nz as f64).round() as usize;
    let layer: Vec<f64> = (0..n * n).map(|c| u.comp(0)[g.node(c, k)]).collect();
    let peak = layer.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    // Columns run x-major; transpose so image rows follow y.
    let mut px = Vec::with_capacity(4 * n * n);
    for j in (0..n).rev() {
        for i in 0..n {
            px.extend_from_slice(&diverging(layer[g.column(i, j)] / peak));
        }
    }
    Ok(px)
}

/// Regime of every pixel centre, alpha in `(0, 2)` left to right and beta
/// in `(0, 1)` bottom to top.
pub fn regime_map(width: usize, height: usize) -> Vec<u8> {
    let mut px = Vec::with_capacity(4 * width * height);
    for row in 0..height {
        let beta = 1.0 - (row as f64 + 0.5) / height as f64;
        for col in 0..width {
            let alpha = 2.0 * (col as f64 + 0.5) / width as f64;
            let r = admissible(alpha, beta).unwrap_or(Regime::Inadmissible);
            px.extend_from_slice(&regime_colour(r));
        }
    }
    px
}

pub fn regime_name(alpha: f64, beta: f64) -> String {
    match admissible(alpha, beta) {
        Ok(Regime::Interior) => "interior".into(),
        Ok(Regime::SmoothHorizontal) => "smooth horizontal".into(),
        Ok(Regime::Inadmissible) => "inadmissible".into(),
        Err(e) => e.to_string(),
    }
}

/// Cutoff on the plane through the axis: `r` in `[-1, 1]` across, `z` in
/// `[0, 1]` up. Grey is the cutoff value; points outside the smoothed
/// cylinder are tinted.
pub fn cutoff_section(eta: f64, width: usize, height: usize) -> Result<Vec<u8>, String> {
    let sc = SmoothedCylinder::new(eta).map_err(|e| e.to_string())?;
    let mut px = Vec::with_capacity(4 * width * height);
    for row in 0..height {
        let z = 1.0 - (row as f64 + 0.5) / height as f64;
        for col in 0..width {
            let x = [2.0 * (col as f64 + 0.5) / width as f64 - 1.0, 0.0, z];
            let v = (255.0 * sc.psi(x)).round() as u8;
            if sc.contains(x) {
                px.extend_from_slice(&[v, v, v, 255]);
            } else {
                px.extend_from_slice(&[120, 30, 30, 255]);
            }
        }
    }
    Ok(px)
}

#[wasm_bindgen(js_name = weierstrassSlice)]
pub fn weierstrass_slice_js(
    alpha: f64,
    beta: f64,
    octaves: u32,
    seed: u32,
    n: usize,
    z: f64,
) -> Result<Vec<u8>, JsError> {
    weierstrass_slice(alpha, beta, octaves, seed as u64, n, z).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = regimeMap)]
pub fn regime_map_js(width: usize, height: usize) -> Vec<u8> {
    regime_map(width, height)
}

#[wasm_bindgen(js_name = regimeName)]
pub fn regime_name_js(alpha: f64, beta: f64) -> String {
    regime_name(alpha, beta)
}

#[wasm_bindgen(js_name = cutoffSection)]
pub fn cutoff_section_js(eta: f64, width: usize, height: usize) -> Result<Vec<u8>, JsError> {
    cutoff_section(eta, width, height).map_err(|e| JsError::new(&e))
}
