//! Gamma function by the Lanczos approximation (g = 7, 9 coefficients),
//! with the reflection formula below 1/2.

use std::f64::consts::PI;

const G: f64 = 7.0;
const P: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

pub fn gamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == x.floor() && x <= 0.0 {
        return f64::NAN;
    }
    // exact factorials keep integer arguments bit-exact
    if x == x.floor() && x <= 171.0 {
        return (1..x as u64).fold(1.0, |acc, k| acc * k as f64);
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = P[0];
    let t = x + G + 0.5;
    for (i, &p) in P.iter().enumerate().skip(1) {
        a += p / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// `1 / Gamma(x)`, zero at the poles of Gamma.
pub fn rgamma(x: f64) -> f64 {
    if x == x.floor() && x <= 0.0 {
        0.0
    } else {
        1.0 / gamma(x)
    }
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Generalized binomial coefficient `binom(e, n)` for real `e`.
pub fn binomial(e: f64, n: u32) -> f64 {
    let mut acc = 1.0;
    for i in 0..n {
        acc *= (e - i as f64) / (i as f64 + 1.0);
    }
    acc
}
