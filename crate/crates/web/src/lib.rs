//! Browser bindings: lattice layout, synthesized kernel fields and Carleson profiles.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use diskrep::measure::{carleson_constant, carleson_probes, Measure};
use diskrep::synthesis::{synth_derivative_kernel, synth_mobius};
use diskrep::{ComplexPoint, Lattice};

fn js_err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

#[derive(Serialize)]
struct LatticeView {
    r: f64,
    rho_max: f64,
    covering_radius: f64,
    rings: usize,
    centers: Vec<[f64; 2]>,
}

/// Centers of a pseudo-hyperbolic lattice as JSON.
#[wasm_bindgen]
pub fn lattice_view(r: f64, rho_max: f64) -> Result<String, JsValue> {
    let lat = Lattice::build(r, rho_max).map_err(js_err)?;
    let view = LatticeView {
        r,
        rho_max,
        covering_radius: lat.covering_radius(),
        rings: lat.rings().len(),
        centers: lat.centers().iter().map(|z| [z.re, z.im]).collect(),
    };
    serde_json::to_string(&view).map_err(js_err)
}

/// `|f(z)|` on an `n × n` grid over `[-1, 1]²`, row-major from the top; NaN outside the disk.
#[wasm_bindgen]
pub fn kernel_field(measure_json: &str, kernel: &str, n: usize) -> Result<Vec<f64>, JsValue> {
    let mu = Measure::from_json(measure_json).map_err(js_err)?;
    let f = match kernel {
        "mobius" => synth_mobius(&mu),
        "derivative" => synth_derivative_kernel(&mu),
        other => return Err(JsValue::from_str(&format!("unknown kernel {other:?}"))),
    }
    .map_err(js_err)?;
    let n = n.clamp(2, 400);
    let step = 2.0 / (n - 1) as f64;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let z = ComplexPoint::new(-1.0 + j as f64 * step, 1.0 - i as f64 * step);
            let v = if z.norm() < 0.999 {
                f.eval(z).map(|w| w.norm()).unwrap_or(f64::NAN)
            } else {
                f64::NAN
            };
            out.push(v);
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct ProfileView {
    constant: f64,
    moduli: Vec<f64>,
    shell_max: Vec<f64>,
}

/// Largest Carleson quotient `|μ|(D(z,r)) / (1-|z|²)^t` on each probe circle, as JSON.
#[wasm_bindgen]
pub fn carleson_profile(measure_json: &str, t: f64, r: f64, angles: usize, rho_max: f64) -> Result<String, JsValue> {
    let mu = Measure::from_json(measure_json).map_err(js_err)?;
    let probes = carleson_probes(angles.clamp(1, 256), rho_max);
    let prof = carleson_constant(&mu, t, r, &probes).map_err(js_err)?;
    let mut moduli: Vec<f64> = Vec::new();
    let mut shell_max: Vec<f64> = Vec::new();
    for (z, &v) in prof.probes.iter().zip(&prof.values) {
        let m = z.norm();
        match moduli.last() {
            Some(&last) if (last - m).abs() < 1e-12 => {
                let top = shell_max.last_mut().unwrap();
                *top = top.max(v);
            }
            _ => {
                moduli.push(m);
                shell_max.push(v);
            }
        }
    }
    let view = ProfileView {
        constant: prof.constant,
        moduli,
        shell_max,
    };
    serde_json::to_string(&view).map_err(js_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_view_lists_every_center() {
        let text = lattice_view(0.5, 0.9).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let lat = Lattice::build(0.5, 0.9).unwrap();
        assert_eq!(v["centers"].as_array().unwrap().len(), lat.len());
    }

    #[test]
    fn kernel_field_of_single_atom() {
        let json = r#"{"atoms":[{"z":[0.5,0.0],"w":[1.0,0.0]}]}"#;
        let field = kernel_field(json, "mobius", 5).unwrap();
        assert_eq!(field.len(), 25);
        // Center pixel is z = 0, where |(0 - a)/(1 - 0)| = |a|.
        assert!((field[12] - 0.5).abs() < 1e-12);
        assert!(field[0].is_nan());
    }

    #[test]
    fn area_profile_is_flat_at_t_two() {
        let json = r#"{"atoms":[],"density":[{"family":"constant","params":{}}]}"#;
        let text = carleson_profile(json, 2.0, 0.5, 8, 0.99).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let maxes: Vec<f64> = v["shell_max"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        let (lo, hi) = maxes.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
        assert!(hi / lo < 4.0, "{maxes:?}");
    }
}
