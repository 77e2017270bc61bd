//! WebAssembly bindings for the browser demo in `www/`.

pub mod demo;

use wasm_bindgen::prelude::*;

fn js_err(e: String) -> JsError {
    JsError::new(&e)
}

/// Flat rows of [`demo::CURVE_STRIDE`] values; see [`demo::dispersion_curve`].
#[wasm_bindgen(js_name = dispersionCurve)]
pub fn dispersion_curve(
    kappa: f64,
    n: usize,
    angle: f64,
    samples: usize,
) -> Result<Vec<f64>, JsError> {
    demo::dispersion_curve(kappa, n, angle, samples).map_err(js_err)
}

#[wasm_bindgen(js_name = curveStride)]
pub fn curve_stride() -> usize {
    demo::CURVE_STRIDE
}

/// Flat `t, lattice, exact` triples; see [`demo::autocorrelation_traces`].
#[wasm_bindgen(js_name = autocorrelationTraces)]
pub fn autocorrelation_traces(kappa: f64, n: usize) -> Result<Vec<f64>, JsError> {
    demo::autocorrelation_traces(kappa, n).map_err(js_err)
}

#[wasm_bindgen]
pub struct GaussianSim(demo::GaussianRun);

#[wasm_bindgen]
impl GaussianSim {
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, s_j: f64, lambda: f64, width: f64) -> Result<GaussianSim, JsError> {
        demo::GaussianRun::new(n, s_j, lambda, width)
            .map(GaussianSim)
            .map_err(js_err)
    }

    pub fn advance(&mut self, steps: usize) {
        self.0.advance(steps);
    }

    pub fn size(&self) -> usize {
        self.0.size()
    }

    pub fn time(&self) -> f64 {
        self.0.time()
    }

    pub fn steps(&self) -> usize {
        self.0.steps()
    }

    pub fn density(&self) -> Vec<f64> {
        self.0.density()
    }
}
