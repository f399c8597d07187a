//! Stratonovich Milstein step for the Kubo oscillator, used as a
//! non-conservative comparator in long-time runs.

/// One step on the state `(p, x)`.
pub fn kubo_milstein_step(y: [f64; 2], a: f64, sigma: f64, h: f64, dw: f64) -> [f64; 2] {
    let [p, x] = y;
    let half = 0.5 * sigma * sigma * dw * dw;
    [p - a * x * h - sigma * x * dw - half * p, x + a * p * h + sigma * p * dw - half * x]
}
