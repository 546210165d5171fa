use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gauss Pi function `Pi(z) = Gamma(z + 1)` for `z > -1`.
///
/// Lanczos approximation (g = 7, nine terms) with reflection below 1/2;
/// relative error stays near 1e-15 on the tested range.
pub fn gauss_pi(z: f64) -> Result<f64> {
    if !(z > -1.0) || !z.is_finite() {
        return Err(Error::Domain(format!("Pi(z) needs z > -1, got {z}")));
    }
    Ok(gamma(z + 1.0))
}

fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS_COEF[0];
        for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
    }
}
