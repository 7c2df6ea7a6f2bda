//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls into the library's numerics: Bloch evolution is done
//! with explicit 3×3 matrices, area equations with classical RK4, and
//! ensemble averages by brute-force summation over a dense detuning grid.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Mat = [[f64; 3]; 3];
pub type Vec3 = [f64; 3];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    r.random_range(lo..hi)
}

pub fn mat_vec(m: &Mat, v: Vec3) -> Vec3 {
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = (0..3).map(|j| m[i][j] * v[j]).sum();
    }
    out
}

/// Resonant pulse of area θ acting on (u, v, w).
pub fn pulse_matrix(theta: f64) -> Mat {
    let (s, c) = theta.sin_cos();
    [[1.0, 0.0, 0.0], [0.0, c, s], [0.0, -s, c]]
}

/// Free precession by phase φ with coherence survival Γ.
pub fn free_matrix(phi: f64, gamma: f64) -> Mat {
    let (s, c) = phi.sin_cos();
    [
        [gamma * c, -gamma * s, 0.0],
        [gamma * s, gamma * c, 0.0],
        [0.0, 0.0, 1.0],
    ]
}

/// Ground state driven by `areas` with one delay between pulses, then
/// evolved `extra` further delays after the last pulse.
pub fn sequence_state(areas: &[f64], phi: f64, gamma: f64, extra: u32) -> Vec3 {
    let mut r = [0.0, 0.0, -1.0];
    for (i, &a) in areas.iter().enumerate() {
        if i > 0 {
            r = mat_vec(&free_matrix(phi, gamma), r);
        }
        r = mat_vec(&pulse_matrix(a), r);
    }
    for _ in 0..extra {
        r = mat_vec(&free_matrix(phi, gamma), r);
    }
    r
}

/// (⟨v⟩, ⟨w⟩) at time `(echo + 1)τ` averaged over a Gaussian line of width
/// σ = 5/τ sampled at 8193 points over ±6σ. Harmonics of Δτ are suppressed
/// by at least e^(−σ²/2) ≈ 4e−6.
pub fn ensemble_sources(areas: &[f64], gamma: f64, echo: u32) -> (f64, f64) {
    let sigma = 5.0;
    let n = 8193;
    let span = 6.0 * sigma;
    let extra = echo + 1 - (areas.len() as u32 - 1);
    let (mut sv, mut sw, mut sg) = (0.0, 0.0, 0.0);
    for j in 0..n {
        let d = -span + 2.0 * span * j as f64 / (n - 1) as f64;
        let g = (-0.5 * (d / sigma).powi(2)).exp();
        let r = sequence_state(areas, d, gamma, extra);
        sv += g * r[1];
        sw += g * r[2];
        sg += g;
    }
    (sv / sg, sw / sg)
}

/// Classical RK4 for `y' = f(z, y)` on a fixed step.
pub fn rk4<const N: usize>(f: impl Fn(f64, &[f64; N]) -> [f64; N], y0: [f64; N], z_end: f64, steps: usize) -> [f64; N] {
    let h = z_end / steps as f64;
    let mut y = y0;
    for i in 0..steps {
        let z = i as f64 * h;
        let add = |a: &[f64; N], b: &[f64; N], s: f64| {
            let mut o = *a;
            for k in 0..N {
                o[k] += s * b[k];
            }
            o
        };
        let k1 = f(z, &y);
        let k2 = f(z + h / 2.0, &add(&y, &k1, h / 2.0));
        let k3 = f(z + h / 2.0, &add(&y, &k2, h / 2.0));
        let k4 = f(z + h, &add(&y, &k3, h));
        for k in 0..N {
            y[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
        }
    }
    y
}

/// Both input areas by RK4 on `∂θ₁ = −½ sin θ₁`, `∂θ₂ = −½ cos θ₁ sin θ₂`.
pub fn input_areas_rk4(theta1: f64, theta2: f64, alpha_z: f64) -> (f64, f64) {
    let steps = ((alpha_z / 1e-3).ceil() as usize).max(1);
    let y = rk4(
        |_, y: &[f64; 2]| [-0.5 * y[0].sin(), -0.5 * y[0].cos() * y[1].sin()],
        [theta1, theta2],
        alpha_z,
        steps,
    );
    (y[0], y[1])
}

/// Primary echo by RK4 on the echo-area equation with its two-pulse sources,
/// integrated together with both inputs.
pub fn primary_echo_rk4(theta1: f64, theta2: f64, gamma: f64, alpha_z: f64, steps: usize) -> f64 {
    let g2 = gamma * gamma;
    let y = rk4(
        |_, y: &[f64; 3]| {
            let (t1, t2, e) = (y[0], y[1], y[2]);
            let v0 = g2 * t1.sin() * (t2 / 2.0).sin().powi(2);
            let w0 = -t1.cos() * t2.cos();
            let c = (e / 2.0).cos();
            [
                -0.5 * t1.sin(),
                -0.5 * t1.cos() * t2.sin(),
                v0 * c * c + 0.5 * w0 * e.sin(),
            ]
        },
        [theta1, theta2, 0.0],
        alpha_z,
        steps,
    );
    y[2]
}
